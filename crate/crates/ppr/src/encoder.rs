//! The exact index encoder/decoder, a truncated reference encoder, and the
//! argmin (α = ∞) special case.
//!
//! Setting: a rate-1 Poisson process `T_1 < T_2 < …` is marked with i.i.d.
//! proposal samples `Z_i ~ Q` drawn from the shared stream. With
//! `T̃_i = T_i / r(Z_i)` for the density ratio `r = dP/dQ`, the encoder
//! selects index `K` with conditional probability `Pr(K=k) ∝ T̃_k^{-α}` and
//! transmits `K`; the decoder reproduces `Z_K` from the shared seed alone.
//! `Z_K` is then an exact sample of `P`, and the random selection keeps the
//! map from data to `((Z_i)_i, K)` differentially private at a `2α` cost.
//!
//! The α = ∞ limit (`pfr_encode`) deterministically picks `argmin T̃_i`,
//! which is optimal for compression but offers no selection privacy.
//!
//! The exact scan needs a finite bound `r* ≥ sup r(z)`: candidates are
//! enumerated in increasing order of `B_i = T_i^α min{V_i, 1}` (with `V_i`
//! i.i.d. selection marks), and `r*` converts the enumeration horizon into a
//! certificate that no future candidate can win. Everything runs in log
//! domain; linear-domain weights like `T̃^{-α}` overflow for d ≳ 30.

use crate::rng::{SampleStream, SharedSeed};
use crate::special::{adaptive_simpson, log_sum_exp, lower_incomplete_gamma, LogReal};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const E_INV: f64 = 0.36787944117144233;
const DEFAULT_MAX_POINTS: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodeError {
    #[error("alpha must be finite and > 1 (got {0}); use pfr_encode for alpha = infinity")]
    InvalidAlpha(f64),
    #[error("exact encoding requires a finite log_r_star, got {0}; use encode_truncated")]
    UnboundedRatio(f64),
    #[error(
        "scan exceeded max_points = {max_points} (examined {examined} proposal samples, \
         best index so far {best_k}, best log-weight {best_log_weight}); \
         r* may be underestimated or the target pathological"
    )]
    MaxPointsExceeded {
        max_points: u64,
        examined: u64,
        best_k: u64,
        best_log_weight: f64,
    },
    #[error("log_density_ratio returned NaN at proposal sample {index}")]
    NanLogRatio { index: u64 },
    #[error("all {0} truncated-scan weights are zero; target and proposal are mutually singular on the sample")]
    NoFiniteWeights(u64),
    #[error("selection weights must be finite or +inf, got {0}")]
    InvalidLogWeight(f64),
    #[error("all selection weights are zero")]
    AllWeightsZero,
    #[error("candidate index exceeds the u64 range")]
    IndexOverflow,
}

/// Encoder parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PprParams {
    alpha: f64,
    max_points: u64,
    far_point_shortcut: bool,
}

impl PprParams {
    /// `alpha` strictly greater than 1 and finite; the α = ∞ case is
    /// [`pfr_encode`].
    pub fn new(alpha: f64) -> Result<Self, EncodeError> {
        // 1 - 1/alpha must be a positive double: it is the shape of the
        // selection-mark Gamma law.
        if !alpha.is_finite() || alpha <= 1.0 || 1.0 - 1.0 / alpha <= 0.0 {
            return Err(EncodeError::InvalidAlpha(alpha));
        }
        Ok(PprParams {
            alpha,
            max_points: DEFAULT_MAX_POINTS,
            far_point_shortcut: true,
        })
    }

    /// Replaces the safety cap on scanned proposal samples (default 10^8).
    pub fn with_max_points(mut self, max_points: u64) -> Self {
        self.max_points = max_points;
        self
    }

    /// Enables or disables the far-point shortcut (default on).
    ///
    /// Once no future point can win, candidates still pending in the heap
    /// are resolved directly: the number of intervening points is drawn
    /// from its exact (thinned Poisson) law and the pending candidate's
    /// proposal sample is fetched by an O(1) stream jump. This leaves the
    /// output law unchanged but removes the heavy-tailed waits that plain
    /// scanning incurs for small `alpha`, where a pending candidate with a
    /// tiny selection mark may sit beyond millions of nearer points.
    pub fn with_far_point_shortcut(mut self, enabled: bool) -> Self {
        self.far_point_shortcut = enabled;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn max_points(&self) -> u64 {
        self.max_points
    }
}

/// A proposal distribution `Q` both endpoints can sample from a shared
/// stream.
pub trait Proposal {
    fn dimension(&self) -> usize;

    /// Fixed number of stream draws each sample consumes. The decoder's
    /// jump target for index `k` is `(k - 1) * draws_per_sample()`.
    fn draws_per_sample(&self) -> u64;

    fn sample_into(&self, stream: &mut SampleStream, out: &mut [f64]);

    fn sample(&self, stream: &mut SampleStream) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension()];
        self.sample_into(stream, &mut out);
        out
    }
}

/// A target distribution `P`, presented to the encoder as its density ratio
/// against the proposal.
pub trait Target {
    /// `ln (dP/dQ)(z)`; −∞ allowed where the target has no mass.
    fn log_density_ratio(&self, z: &[f64]) -> f64;

    /// An upper bound on `log_density_ratio` over the whole space. `+∞`
    /// means no bound exists and only [`encode_truncated`] applies.
    fn log_r_star(&self) -> f64;
}

/// Outcome of an encode: the transmitted index plus diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodeResult {
    /// Transmitted index, `k >= 1`.
    pub k: u64,
    /// Log-weight of the winning candidate. For [`encode`] this is
    /// `ln w* = α(ln t − ln r(z)) + ln v`; for [`pfr_encode`] it is
    /// `ln T̃_K`; for [`encode_truncated`] it is `α·ln T̃_K`.
    pub winning_log_weight: f64,
    /// Proposal samples actually drawn and evaluated. Samples skipped over
    /// by the far-point shortcut are not counted (nor drawn), so this can
    /// be smaller than `k`.
    pub points_examined: u64,
}

/// Candidate awaiting its proposal sample, keyed by arrival time.
struct HeapEntry {
    ln_t: f64,
    ln_v: f64,
    seq: u64,
    possible: bool,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.ln_t == other.ln_t && self.seq == other.seq
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // Reversed: BinaryHeap is a max-heap and the scan pops smallest t first.
    // Ties (possible only through floating-point collision) break by
    // insertion order for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .ln_t
            .partial_cmp(&self.ln_t)
            .expect("ln_t is never NaN")
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Runs the exact scan. The winning index has conditional law
/// `Pr(K=k) ∝ T̃_k^{-α}` given the shared stream, and
/// `decode(proposal, k, shared)` reproduces the winning point bit-exactly.
///
/// The shared stream supplies only the proposal samples (one fixed-size
/// block per examined candidate, in increasing-t order); every other variate
/// (arrival increments, branch choices, selection marks) comes from `local`,
/// so the decoder never needs it.
pub fn encode(
    params: &PprParams,
    proposal: &dyn Proposal,
    target: &dyn Target,
    shared: &SharedSeed,
    local: &mut SampleStream,
) -> Result<EncodeResult, EncodeError> {
    scan::<false>(params, proposal, target, shared, local).map(|(res, _)| res)
}

/// Test hook: after the termination condition fires, keeps scanning until
/// ten times as many candidates have been examined and reports the best
/// log-weight seen during the extension (which soundness says cannot beat
/// the winner). The far-point shortcut is ignored so the extension really
/// walks the scan.
#[doc(hidden)]
pub fn encode_with_overscan(
    params: &PprParams,
    proposal: &dyn Proposal,
    target: &dyn Target,
    shared: &SharedSeed,
    local: &mut SampleStream,
) -> Result<(EncodeResult, f64), EncodeError> {
    scan::<true>(params, proposal, target, shared, local)
        .map(|(res, extra)| (res, extra.expect("overscan ran")))
}

fn scan<const OVERSCAN: bool>(
    params: &PprParams,
    proposal: &dyn Proposal,
    target: &dyn Target,
    shared: &SharedSeed,
    local: &mut SampleStream,
) -> Result<(EncodeResult, Option<f64>), EncodeError> {
    let alpha = params.alpha;
    let log_r_star = target.log_r_star();
    if !log_r_star.is_finite() {
        return Err(EncodeError::UnboundedRatio(log_r_star));
    }

    let gamma1 = lower_incomplete_gamma(1.0 - 1.0 / alpha, 1.0)
        .expect("1 - 1/alpha lies in (0,1) for finite alpha > 1");
    // The arrival intensity of B_i = T_i^α·min{V_i,1} is
    // α^{-1}(e^{-1}+γ₁)·b^{1/α-1}; integrating, the i-th arrival is
    // b_i = (u_i·α/(e^{-1}+γ₁))^α for a unit-rate arrival time u_i.
    let ln_rate_const = (E_INV + gamma1).ln();
    let ln_alpha = alpha.ln();
    // Share of arrivals whose selection mark V exceeds 1 (the e^{-1} branch).
    let p_large_v = E_INV / (E_INV + gamma1);
    let v_shape = 1.0 - 1.0 / alpha;

    let mut shared_stream = SampleStream::new(shared);
    let mut zbuf = vec![0.0; proposal.dimension()];

    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut possible_count: u64 = 0;
    let mut winning = LogReal::INFINITY;
    let mut best_k: u64 = 0;
    let mut pops: u64 = 0;
    let mut seq: u64 = 0;
    let mut u: f64 = 0.0;

    // Overscan bookkeeping.
    let mut terminated_at: Option<(EncodeResult, u64)> = None;
    let mut overscan_best = f64::INFINITY;

    loop {
        if seq >= params.max_points || pops >= params.max_points {
            return Err(EncodeError::MaxPointsExceeded {
                max_points: params.max_points,
                examined: pops,
                best_k,
                best_log_weight: winning.ln(),
            });
        }

        u += local.exp1();
        let ln_b = alpha * (u.ln() + ln_alpha - ln_rate_const);
        let (ln_t, ln_v) = if local.unif01() <= p_large_v {
            let ln_v = local.exp1().ln_1p();
            (ln_b / alpha, ln_v)
        } else {
            let ln_v = local.ln_truncated_gamma01(v_shape);
            ((ln_b - ln_v) / alpha, ln_v)
        };
        // Optimistic weight: the best this candidate could score if its
        // proposal sample attained the ratio bound r*.
        let floor = LogReal::from_ln(alpha * (ln_t - log_r_star) + ln_v);
        let possible = floor <= winning;
        if possible {
            possible_count += 1;
        }
        seq += 1;
        heap.push(HeapEntry {
            ln_t,
            ln_v,
            seq,
            possible,
        });

        // Everything at or below the current horizon b^{1/α} is final in t
        // order: later arrivals have strictly larger B, hence larger t.
        let ln_horizon = ln_b / alpha;
        while heap
            .peek()
            .is_some_and(|entry| entry.ln_t <= ln_horizon)
        {
            let entry = heap.pop().expect("peeked");
            if entry.possible {
                possible_count -= 1;
            }
            proposal.sample_into(&mut shared_stream, &mut zbuf);
            pops += 1;
            let log_ratio = target.log_density_ratio(&zbuf);
            if log_ratio.is_nan() {
                return Err(EncodeError::NanLogRatio { index: pops });
            }
            let weight = LogReal::from_ln(alpha * (entry.ln_t - log_ratio) + entry.ln_v);
            if weight < winning {
                if OVERSCAN && terminated_at.is_some() {
                    overscan_best = overscan_best.min(weight.ln());
                    continue;
                }
                winning = weight;
                best_k = pops;
            }
        }

        // Certificate: any not-yet-generated point has B > b and hence
        // weight at least b·(r*)^{-α}.
        let certified = LogReal::from_ln(ln_b - alpha * log_r_star) >= winning;
        if certified {
            if possible_count == 0 {
                let result = EncodeResult {
                    k: best_k,
                    winning_log_weight: winning.ln(),
                    points_examined: pops,
                };
                if !OVERSCAN {
                    return Ok((result, None));
                }
                if terminated_at.is_none() {
                    terminated_at = Some((result, pops.max(1)));
                }
            } else if !OVERSCAN && params.far_point_shortcut {
                let evaluated = resolve_pending(
                    alpha,
                    log_r_star,
                    ln_b,
                    std::mem::take(&mut heap),
                    &mut winning,
                    &mut best_k,
                    pops,
                    proposal,
                    target,
                    &mut shared_stream,
                    local,
                    &mut zbuf,
                )?;
                let result = EncodeResult {
                    k: best_k,
                    winning_log_weight: winning.ln(),
                    points_examined: pops + evaluated,
                };
                return Ok((result, None));
            }
        }
        if OVERSCAN {
            if let Some((result, pops_at_term)) = &terminated_at {
                if pops >= 10 * pops_at_term {
                    return Ok((*result, Some(overscan_best)));
                }
            }
        }
    }
}

/// Settles every heap candidate that could still beat the winner, without
/// scanning up to its (possibly astronomical) arrival time.
///
/// Precondition: the certificate holds, i.e. every point not yet generated
/// (`B > b`) has weight above the current `winning`, whatever its proposal
/// sample turns out to be. A pending candidate with known `(t, v)` can then
/// be given its sample directly: its stream index equals the number of
/// points with smaller `t`, which splits into already-generated points (in
/// the heap, below it in `t` order) plus not-yet-generated ones. The latter
/// form a Poisson count with mean
///
/// ```text
/// μ(a, c) = (1/α) ∫_a^c exp(-b·t^(-α)) dt
/// ```
///
/// over the `t`-interval to cross — the `t`-process has rate `1/α` under
/// the scan's arrival parametrization and i.i.d. `Exp(1)` marks, and a
/// point at `t` escaped generation so far iff its mark satisfies
/// `t^α·min{v,1} > b`, which thins the rate by `exp(-b·t^{-α})`. Drawing
/// that count (local randomness) and jumping the shared stream lands on the
/// candidate's sample with the whole joint law intact: skipped points are
/// all impossible (`B > b` and the certificate), so their samples are dead
/// stream slots either way.
#[allow(clippy::too_many_arguments)]
fn resolve_pending(
    alpha: f64,
    log_r_star: f64,
    ln_b: f64,
    heap: BinaryHeap<HeapEntry>,
    winning: &mut LogReal,
    best_k: &mut u64,
    pops: u64,
    proposal: &dyn Proposal,
    target: &dyn Target,
    shared_stream: &mut SampleStream,
    local: &mut SampleStream,
    zbuf: &mut [f64],
) -> Result<u64, EncodeError> {
    let mut entries = heap.into_vec();
    entries.sort_by(|a, b| {
        a.ln_t
            .partial_cmp(&b.ln_t)
            .expect("ln_t is never NaN")
            .then_with(|| a.seq.cmp(&b.seq))
    });
    let ln_h = ln_b / alpha;
    let draws = proposal.draws_per_sample();
    let mut rank = pops;
    let mut ln_prev = ln_h;
    let mut evaluated = 0u64;
    for entry in &entries {
        let floor = LogReal::from_ln(alpha * (entry.ln_t - log_r_star) + entry.ln_v);
        if floor < *winning {
            let mu = thinned_count_mean(ln_prev, entry.ln_t, ln_h, alpha)?;
            let skipped = local.poisson(mu);
            rank = rank
                .checked_add(skipped)
                .and_then(|r| r.checked_add(1))
                .ok_or(EncodeError::IndexOverflow)?;
            ln_prev = entry.ln_t;
            let target_draw = (rank - 1)
                .checked_mul(draws)
                .ok_or(EncodeError::IndexOverflow)?;
            shared_stream
                .jump_to(target_draw)
                .expect("ranks are increasing");
            proposal.sample_into(shared_stream, zbuf);
            evaluated += 1;
            let log_ratio = target.log_density_ratio(zbuf);
            if log_ratio.is_nan() {
                return Err(EncodeError::NanLogRatio { index: rank });
            }
            let weight = LogReal::from_ln(alpha * (entry.ln_t - log_ratio) + entry.ln_v);
            if weight < *winning {
                *winning = weight;
                *best_k = rank;
            }
        } else {
            // Already generated, cannot win, but occupies a stream slot
            // ahead of any later pending candidate.
            rank = rank.checked_add(1).ok_or(EncodeError::IndexOverflow)?;
        }
    }
    Ok(evaluated)
}

/// Mean of the thinned count in `resolve_pending`, computed from log-domain
/// inputs (`a`, `c` are `t`-interval ends, `h = b^{1/α}` the scan horizon).
fn thinned_count_mean(ln_a: f64, ln_c: f64, ln_h: f64, alpha: f64) -> Result<f64, EncodeError> {
    debug_assert!(ln_a >= ln_h - 1e-9 && ln_c >= ln_a - 1e-9);
    // mu <= c/alpha; refuse anything close to u64 index range.
    if ln_c - alpha.ln() > 62.0 * std::f64::consts::LN_2 {
        return Err(EncodeError::IndexOverflow);
    }
    let x1 = (ln_a - ln_h).exp().max(1.0);
    let x2 = (ln_c - ln_h).exp().max(x1);
    let mu = (ln_h.exp() / alpha) * integral_exp_neg_pow(x1, x2, alpha);
    if !(mu >= 0.0) || mu > 4.6e18 {
        return Err(EncodeError::IndexOverflow);
    }
    Ok(mu)
}

/// `∫_{x1}^{x2} exp(-s^{-α}) ds` for `1 <= x1 <= x2`, `α > 1`.
fn integral_exp_neg_pow(x1: f64, x2: f64, alpha: f64) -> f64 {
    // Tail integral of the complement: ∫_x^∞ (1 - exp(-s^{-α})) ds by
    // term-wise integration of the exponential series. Terms alternate and
    // decrease for x >= 1, so truncation is safe.
    fn g(x: f64, alpha: f64) -> f64 {
        if !x.is_finite() {
            return 0.0;
        }
        let mut sum = 0.0f64;
        let mut factorial = 1.0f64;
        for m in 1..200u32 {
            let mf = f64::from(m);
            factorial *= mf;
            let term = x.powf(1.0 - mf * alpha) / (factorial * (mf * alpha - 1.0));
            sum += if m % 2 == 1 { term } else { -term };
            if term < 1e-18 * sum.abs() + 1e-300 {
                break;
            }
        }
        sum
    }
    if x2 - x1 < 16.0 {
        let tol = 1e-13 * (x2 - x1).max(1e-30);
        adaptive_simpson(&|s: f64| (-s.powf(-alpha)).exp(), x1, x2, tol)
    } else {
        (x2 - x1) - (g(x1, alpha) - g(x2, alpha))
    }
}

/// Reproduces the `k`-th proposal sample of the shared stream in O(1).
pub fn decode(proposal: &dyn Proposal, k: u64, shared: &SharedSeed) -> Vec<f64> {
    assert!(k >= 1, "indices are 1-based");
    let offset = (k - 1)
        .checked_mul(proposal.draws_per_sample())
        .expect("draw offset fits in u64");
    let mut stream = SampleStream::new(shared);
    stream
        .jump_to(offset)
        .expect("forward jump from a fresh stream");
    proposal.sample(&mut stream)
}

/// Selects among only the first `n_points` candidates, with the same
/// conditional weights `T̃_k^{-α}` renormalized (a log-domain softmax).
///
/// The output law converges to the exact encoder's as `n_points` grows; this
/// is the reference oracle for tests and the fallback for targets whose
/// density ratio has no finite bound (`log_r_star = +∞`).
pub fn encode_truncated(
    params: &PprParams,
    proposal: &dyn Proposal,
    target: &dyn Target,
    shared: &SharedSeed,
    local: &mut SampleStream,
    n_points: u64,
) -> Result<EncodeResult, EncodeError> {
    assert!(n_points >= 1);
    let alpha = params.alpha;
    let mut shared_stream = SampleStream::new(shared);
    let mut zbuf = vec![0.0; proposal.dimension()];

    let mut t = 0.0f64;
    let mut log_weights = Vec::with_capacity(n_points as usize);
    for i in 0..n_points {
        t += local.exp1();
        proposal.sample_into(&mut shared_stream, &mut zbuf);
        let log_ratio = target.log_density_ratio(&zbuf);
        if log_ratio.is_nan() {
            return Err(EncodeError::NanLogRatio { index: i + 1 });
        }
        // ln T̃^{-α} = -α(ln T - ln r(Z))
        log_weights.push(-alpha * (t.ln() - log_ratio));
    }
    let total = log_sum_exp(&log_weights).expect("n_points >= 1");
    if total == f64::NEG_INFINITY {
        return Err(EncodeError::NoFiniteWeights(n_points));
    }

    let u = local.unif01();
    let mut cum = 0.0f64;
    let mut k = 0u64;
    let mut last_nonzero = 0u64;
    for (i, lw) in log_weights.iter().enumerate() {
        if *lw > f64::NEG_INFINITY {
            last_nonzero = i as u64 + 1;
        }
        cum += (lw - total).exp();
        if u < cum {
            k = i as u64 + 1;
            break;
        }
    }
    if k == 0 {
        // u landed beyond the rounded cumulative sum.
        k = last_nonzero;
    }
    Ok(EncodeResult {
        k,
        winning_log_weight: -log_weights[(k - 1) as usize],
        points_examined: n_points,
    })
}

/// The α = ∞ limit: deterministically selects `argmin_i T̃_i`.
///
/// Scans arrivals in increasing `T` and stops as soon as `T_i / r*` exceeds
/// the incumbent minimum, which no later arrival can beat.
pub fn pfr_encode(
    proposal: &dyn Proposal,
    target: &dyn Target,
    shared: &SharedSeed,
    local: &mut SampleStream,
) -> Result<EncodeResult, EncodeError> {
    pfr_encode_capped(proposal, target, shared, local, DEFAULT_MAX_POINTS)
}

/// [`pfr_encode`] with an explicit scan cap. The result is invariant to the
/// cap whenever the scan terminates under it.
pub fn pfr_encode_capped(
    proposal: &dyn Proposal,
    target: &dyn Target,
    shared: &SharedSeed,
    local: &mut SampleStream,
    max_points: u64,
) -> Result<EncodeResult, EncodeError> {
    let log_r_star = target.log_r_star();
    if !log_r_star.is_finite() {
        return Err(EncodeError::UnboundedRatio(log_r_star));
    }
    let mut shared_stream = SampleStream::new(shared);
    let mut zbuf = vec![0.0; proposal.dimension()];

    let mut t = 0.0f64;
    let mut best = LogReal::INFINITY;
    let mut best_k = 0u64;
    let mut i = 0u64;
    loop {
        if i >= max_points {
            return Err(EncodeError::MaxPointsExceeded {
                max_points,
                examined: i,
                best_k,
                best_log_weight: best.ln(),
            });
        }
        t += local.exp1();
        i += 1;
        // Termination first: if even a ratio of r* cannot beat the
        // incumbent, no present or future arrival can.
        if LogReal::from_ln(t.ln() - log_r_star) > best {
            return Ok(EncodeResult {
                k: best_k,
                winning_log_weight: best.ln(),
                points_examined: i - 1,
            });
        }
        proposal.sample_into(&mut shared_stream, &mut zbuf);
        let log_ratio = target.log_density_ratio(&zbuf);
        if log_ratio.is_nan() {
            return Err(EncodeError::NanLogRatio { index: i });
        }
        let candidate = LogReal::from_ln(t.ln() - log_ratio);
        if candidate < best {
            best = candidate;
            best_k = i;
        }
    }
}

/// Log selection probabilities `ln Pr(K=k) = -α ln T̃_k - ln Σ_i T̃_i^{-α}`
/// for a finite family of candidates.
///
/// Entries of `log_ttilde` may be `+∞` (a zero-probability candidate);
/// exposed so the privacy-ratio property (a ±ε perturbation of every entry
/// moves every log-probability by at most 2αε) can be checked directly.
pub fn conditional_selection_logprobs(
    alpha: f64,
    log_ttilde: &[f64],
) -> Result<Vec<f64>, EncodeError> {
    assert!(!log_ttilde.is_empty());
    let mut weights = Vec::with_capacity(log_ttilde.len());
    for &lt in log_ttilde {
        if lt.is_nan() || lt == f64::NEG_INFINITY {
            return Err(EncodeError::InvalidLogWeight(lt));
        }
        weights.push(if lt == f64::INFINITY {
            f64::NEG_INFINITY
        } else {
            -alpha * lt
        });
    }
    let total = log_sum_exp(&weights).expect("nonempty");
    if total == f64::NEG_INFINITY {
        return Err(EncodeError::AllWeightsZero);
    }
    Ok(weights.iter().map(|w| w - total).collect())
}
