//! Desk-scale experiment harnesses: distributed mean estimation under
//! central DP (encoded Gaussian vs uncompressed), the metric-privacy
//! Laplace comparison, a per-chunk timing protocol, and CSV persistence.
//!
//! Every harness is deterministic given its config seed; simulation
//! records therefore carry `wall_time_seconds = 0.0`, and wall-clock
//! measurements live in the separate timing records.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use crate::codec::elias_delta_length;
use crate::encoder::{decode, encode, EncodeError, PprParams, Proposal, Target};
use crate::mechanisms::{
    discrete_laplace_baseline, gaussian_target, sliced_decode, sliced_encode, ChunkMech,
    DiscreteLaplaceConfig, GaussianMechSpec, GaussianProposalSpec, MechanismError, SlicedConfig,
};
use crate::privacy::{
    comm_bound_gaussian, comm_bound_laplace, eta_alpha, gaussian_sigma_for_dp, PrivacyBudget,
    PrivacyError,
};
use crate::rng::{SampleStream, SharedSeed};

/// Errors from invalid configs, infeasible budgets, or I/O.
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    InvalidConfig(&'static str),
    #[error("bit budget {bit_budget} is below the minimal achievable bound {minimal}")]
    InfeasibleBudget { bit_budget: f64, minimal: f64 },
    #[error(transparent)]
    Privacy(#[from] PrivacyError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    MalformedCsv { line: usize, message: String },
}

/// The reported schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    PprGaussian,
    SlicedPpr,
    UncompressedGaussian,
    PprLaplace,
    DiscreteLaplace,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::PprGaussian => "ppr_gaussian",
            Scheme::SlicedPpr => "sliced_ppr",
            Scheme::UncompressedGaussian => "uncompressed_gaussian",
            Scheme::PprLaplace => "ppr_laplace",
            Scheme::DiscreteLaplace => "discrete_laplace",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ppr_gaussian" => Scheme::PprGaussian,
            "sliced_ppr" => Scheme::SlicedPpr,
            "uncompressed_gaussian" => Scheme::UncompressedGaussian,
            "ppr_laplace" => Scheme::PprLaplace,
            "discrete_laplace" => Scheme::DiscreteLaplace,
            other => return Err(format!("unknown scheme {other:?}")),
        })
    }
}

/// One result row (a plot point).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub scheme: Scheme,
    pub epsilon: f64,
    pub bits_used: f64,
    pub mse: f64,
    /// Always 0.0 for seeded simulations (outputs are byte-reproducible);
    /// see [`run_timing`] for wall-clock measurements.
    pub wall_time_seconds: f64,
    /// 0 marks a closed-form (non-Monte-Carlo) entry.
    pub trials: u64,
}

/// Distributed mean estimation: `n` clients holding ±1 vectors, each
/// privatized with per-coordinate noise `σ²/n` and encoded.
#[derive(Debug, Clone)]
pub struct DmeConfig {
    pub n_clients: u64,
    pub dimension: usize,
    pub bernoulli_p: f64,
    pub delta: f64,
    pub epsilon_grid: Vec<f64>,
    pub alpha: f64,
    /// Bit budgets to sweep; `f64::INFINITY` (or an empty list) means
    /// unconstrained.
    pub bit_budgets: Vec<f64>,
    pub chunk_dim: Option<usize>,
    pub trials: u64,
    pub seed: u64,
    /// Skips the (ε, δ) calibration when set.
    pub sigma_override: Option<f64>,
    /// The proposal is `N(0, (fC)²/d + σ²/n)` per coordinate with
    /// `f = proposal_c_factor`. The minimum `f = 1` makes the encoder's
    /// termination certificate cost `e^{Θ(d)}` scan steps; widening the
    /// proposal buys a constant-factor index-size increase for an
    /// exponential scan speedup, without touching the output law of `Z`.
    pub proposal_c_factor: f64,
}

impl DmeConfig {
    /// The desk-scale defaults: n = 50, d = 20, ε = 0.5, δ = 1e−5.
    pub fn desk_default() -> Self {
        Self {
            n_clients: 50,
            dimension: 20,
            bernoulli_p: 0.8,
            delta: 1e-5,
            epsilon_grid: vec![0.5],
            alpha: 2.0,
            bit_budgets: Vec::new(),
            chunk_dim: None,
            trials: 1_000,
            seed: 7,
            sigma_override: None,
            proposal_c_factor: 2.0,
        }
    }

    /// The full-scale configuration: n = 500, d = 1000, chunks of 50.
    /// Slow; intended for offline runs only.
    pub fn full_scale() -> Self {
        Self {
            n_clients: 500,
            dimension: 1000,
            chunk_dim: Some(50),
            trials: 100,
            ..Self::desk_default()
        }
    }

    /// The clipping bound: clients are ±1 vectors, so `‖X_i‖₂ = √d`
    /// exactly and `C = √d` is tight.
    pub fn clip_norm(&self) -> f64 {
        (self.dimension as f64).sqrt()
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.n_clients == 0 || self.dimension == 0 || self.trials == 0 {
            return Err(ExperimentError::InvalidConfig(
                "n_clients, dimension, and trials must be at least 1",
            ));
        }
        if !(self.bernoulli_p > 0.0 && self.bernoulli_p <= 1.0) {
            return Err(ExperimentError::InvalidConfig(
                "bernoulli_p must lie in (0, 1]",
            ));
        }
        if !(self.proposal_c_factor >= 1.0) {
            return Err(ExperimentError::InvalidConfig(
                "proposal_c_factor must be at least 1",
            ));
        }
        if let Some(chunk) = self.chunk_dim {
            if chunk == 0 || chunk > self.dimension {
                return Err(ExperimentError::InvalidConfig(
                    "chunk_dim must lie in [1, dimension]",
                ));
            }
        }
        Ok(())
    }
}

/// A machine-readable note of the conventions a DME run used, written
/// alongside the CSV.
pub fn dme_metadata_json(cfg: &DmeConfig) -> String {
    format!(
        concat!(
            "{{\n",
            "  \"clip_norm\": {},\n",
            "  \"clip_norm_convention\": \"sqrt(d); tight for the ±1 client vectors\",\n",
            "  \"proposal_c_factor\": {},\n",
            "  \"sigma_override\": {},\n",
            "  \"wall_time_convention\": \"0.0 in simulation records; see the timing harness\"\n",
            "}}\n"
        ),
        cfg.clip_norm(),
        cfg.proposal_c_factor,
        cfg.sigma_override
            .map_or("null".to_string(), |s| s.to_string()),
    )
}

/// Draws the n × d client matrix with i.i.d. entries `2·Ber(p) − 1`.
pub fn gen_clients(cfg: &DmeConfig, stream: &mut SampleStream) -> Vec<Vec<f64>> {
    (0..cfg.n_clients)
        .map(|_| {
            (0..cfg.dimension)
                .map(|_| {
                    if stream.unif01() < cfg.bernoulli_p {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect()
        })
        .collect()
}

/// The largest `ε′ ≤ epsilon` whose calibrated Gaussian size bound fits
/// `bit_budget`, found by bisection to 1e−6. Returns `epsilon` itself when
/// it already fits.
pub fn budget_search(
    epsilon: f64,
    delta: f64,
    clip_norm: f64,
    n_clients: u64,
    dimension: usize,
    alpha: f64,
    bit_budget: f64,
) -> Result<f64, ExperimentError> {
    let bound_at = |eps: f64| -> Result<f64, ExperimentError> {
        let sigma = gaussian_sigma_for_dp(clip_norm, &PrivacyBudget::new(eps, delta)?)?;
        Ok(comm_bound_gaussian(clip_norm, n_clients, dimension, sigma, alpha)?)
    };
    if bound_at(epsilon)? <= bit_budget {
        return Ok(epsilon);
    }
    // The bound shrinks as ε′ → 0⁺ toward the η_α-only floor.
    let eta = eta_alpha(alpha)?;
    let minimal = eta + (eta + 1.0).log2() + 2.0;
    if bit_budget <= minimal {
        return Err(ExperimentError::InfeasibleBudget {
            bit_budget,
            minimal,
        });
    }
    let mut lo = epsilon * 1e-12;
    let mut hi = epsilon;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if bound_at(mid)? <= bit_budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

struct DmeNoise {
    s_p: f64,
    s_q: f64,
    sigma: f64,
}

fn dme_noise(cfg: &DmeConfig, epsilon: f64) -> Result<DmeNoise, ExperimentError> {
    let c = cfg.clip_norm();
    let sigma = match cfg.sigma_override {
        Some(s) => s,
        None => gaussian_sigma_for_dp(c, &PrivacyBudget::new(epsilon, cfg.delta)?)?,
    };
    let s_p = sigma * sigma / cfg.n_clients as f64;
    let s_q = s_p + (cfg.proposal_c_factor * c).powi(2) / cfg.dimension as f64;
    Ok(DmeNoise { s_p, s_q, sigma })
}

/// Runs the mean-estimation comparison; one record per
/// (ε, budget, scheme). PPR bit counts are the empirical mean Elias delta
/// length of the transmitted indices (per client vector, summed over
/// chunks in the sliced scheme); the uncompressed baseline is charged
/// 64 bits per coordinate.
pub fn run_dme(cfg: &DmeConfig) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    cfg.validate()?;
    let params = PprParams::new(cfg.alpha)?;
    let master = SharedSeed::from_u64(cfg.seed);
    let budgets = if cfg.bit_budgets.is_empty() {
        vec![f64::INFINITY]
    } else {
        cfg.bit_budgets.clone()
    };
    let mut records = Vec::new();
    for &epsilon in &cfg.epsilon_grid {
        for &budget in &budgets {
            let eps_eff = if budget.is_infinite() {
                epsilon
            } else {
                budget_search(
                    epsilon,
                    cfg.delta,
                    cfg.clip_norm(),
                    cfg.n_clients,
                    cfg.dimension,
                    cfg.alpha,
                    budget,
                )?
            };
            let noise = dme_noise(cfg, eps_eff)?;
            records.extend(run_dme_once(cfg, &params, &master, epsilon, &noise)?);
        }
    }
    Ok(records)
}

fn run_dme_once(
    cfg: &DmeConfig,
    params: &PprParams,
    master: &SharedSeed,
    epsilon: f64,
    noise: &DmeNoise,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let d = cfg.dimension;
    let n = cfg.n_clients;
    let run_sliced = cfg.chunk_dim.is_some_and(|c| c < d);
    let data_seed = master.derive(0);
    let direct_seed = master.derive(1);
    let ppr_shared_seed = master.derive(2);
    let ppr_local_seed = master.derive(3);
    let sliced_shared_seed = master.derive(4);
    let sliced_local_seed = master.derive(5);

    let mut mse_uncompressed = 0.0;
    let mut mse_ppr = 0.0;
    let mut mse_sliced = 0.0;
    let mut bits_ppr = 0.0;
    let mut bits_sliced = 0.0;
    let mut noise_buf = vec![0.0; d];

    for trial in 0..cfg.trials {
        let mut data_stream = SampleStream::new(&data_seed.derive(trial));
        let clients = gen_clients(cfg, &mut data_stream);
        let mut mu = vec![0.0; d];
        for x in &clients {
            for (m, xi) in mu.iter_mut().zip(x) {
                *m += xi / n as f64;
            }
        }

        // Uncompressed: add the noise directly.
        let mut hat = vec![0.0; d];
        let mut direct = SampleStream::new(&direct_seed.derive(trial));
        for x in &clients {
            direct.fill_std_normal(&mut noise_buf);
            for ((h, xi), g) in hat.iter_mut().zip(x).zip(&noise_buf) {
                *h += (xi + g * noise.s_p.sqrt()) / n as f64;
            }
        }
        mse_uncompressed += sq_dist(&hat, &mu);

        // Encoded, one index per client.
        let mut hat = vec![0.0; d];
        let proposal = GaussianProposalSpec::new(noise.s_q, d)?;
        for (i, x) in clients.iter().enumerate() {
            let spec = GaussianMechSpec::new(x.clone(), noise.s_p)?;
            let target = gaussian_target(&spec, &proposal)?;
            let shared = ppr_shared_seed.derive(trial).derive(i as u64);
            let mut local = SampleStream::new(&ppr_local_seed.derive(trial).derive(i as u64));
            let res = encode(params, &proposal, &target, &shared, &mut local)?;
            bits_ppr += elias_delta_length(res.k).expect("encoder index in range") as f64;
            let z = decode(&proposal, res.k, &shared);
            for (h, zi) in hat.iter_mut().zip(&z) {
                *h += zi / n as f64;
            }
        }
        mse_ppr += sq_dist(&hat, &mu);

        // Sliced: one index per chunk per client.
        if run_sliced {
            let chunk_cfg = SlicedConfig::new(cfg.chunk_dim.unwrap(), d)?;
            let s_p = noise.s_p;
            let s_q = noise.s_q;
            let factory = move |chunk: &[f64]| -> ChunkMech {
                let spec = GaussianMechSpec::new(chunk.to_vec(), s_p).expect("s_p > 0");
                let proposal =
                    GaussianProposalSpec::new(s_q, chunk.len()).expect("s_q > 0");
                let target = gaussian_target(&spec, &proposal).expect("s_q > s_p");
                (
                    Box::new(proposal) as Box<dyn Proposal>,
                    Box::new(target) as Box<dyn Target>,
                )
            };
            let proposal_factory = move |len: usize| {
                Box::new(GaussianProposalSpec::new(s_q, len).expect("s_q > 0"))
                    as Box<dyn Proposal>
            };
            let mut hat = vec![0.0; d];
            for (i, x) in clients.iter().enumerate() {
                let shared = sliced_shared_seed.derive(trial).derive(i as u64);
                let mut local =
                    SampleStream::new(&sliced_local_seed.derive(trial).derive(i as u64));
                let results =
                    sliced_encode(x, &factory, &chunk_cfg, params, &shared, &mut local)?;
                let ks: Vec<u64> = results.iter().map(|r| r.k).collect();
                for &k in &ks {
                    bits_sliced += elias_delta_length(k).expect("index in range") as f64;
                }
                let z = sliced_decode(&proposal_factory, &ks, &chunk_cfg, &shared);
                for (h, zi) in hat.iter_mut().zip(&z) {
                    *h += zi / n as f64;
                }
            }
            mse_sliced += sq_dist(&hat, &mu);
        }
    }

    let t = cfg.trials as f64;
    let per_client = t * n as f64;
    let mut out = vec![
        ExperimentRecord {
            scheme: Scheme::UncompressedGaussian,
            epsilon,
            bits_used: 64.0 * d as f64,
            mse: mse_uncompressed / t,
            wall_time_seconds: 0.0,
            trials: cfg.trials,
        },
        ExperimentRecord {
            scheme: Scheme::PprGaussian,
            epsilon,
            bits_used: bits_ppr / per_client,
            mse: mse_ppr / t,
            wall_time_seconds: 0.0,
            trials: cfg.trials,
        },
    ];
    if run_sliced {
        out.push(ExperimentRecord {
            scheme: Scheme::SlicedPpr,
            epsilon,
            bits_used: bits_sliced / per_client,
            mse: mse_sliced / t,
            wall_time_seconds: 0.0,
            trials: cfg.trials,
        });
    }
    Ok(out)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Metric-privacy comparison: the encoded Laplace mechanism (closed-form
/// MSE `d(d+1)/ε²`, since its output law is exact) against the
/// quantize-and-truncate baseline at each bit budget.
#[derive(Debug, Clone)]
pub struct LaplaceExpConfig {
    pub dimension: usize,
    pub epsilon_metric: f64,
    pub ball_radius: f64,
    /// The test point is placed at this fraction of the ball radius.
    pub center_norm_fraction: f64,
    pub bit_budgets: Vec<f64>,
    pub trials: u64,
    pub alpha: f64,
    pub seed: u64,
}

impl LaplaceExpConfig {
    /// Desk-scale defaults (the full-scale run uses C = 10⁴, d = 500).
    pub fn desk_default() -> Self {
        Self {
            dimension: 5,
            epsilon_metric: 1.0,
            ball_radius: 200.0,
            center_norm_fraction: 0.9,
            bit_budgets: vec![48.0, 64.0, 96.0],
            trials: 5_000,
            alpha: 2.0,
            seed: 11,
        }
    }

    fn center(&self) -> Vec<f64> {
        let d = self.dimension as f64;
        let coord = self.ball_radius * self.center_norm_fraction / d.sqrt();
        vec![coord; self.dimension]
    }
}

/// The largest quantizer step whose grid fits in `bit_budget` bits:
/// `u = 2^{(log₂ Vol(𝔅_d(C)) − B)/d}`.
pub fn step_for_bit_budget(ball_radius: f64, dimension: usize, bit_budget: f64) -> f64 {
    let d = dimension as f64;
    let log2_vol = 0.5 * d * std::f64::consts::PI.log2() + d * ball_radius.log2()
        - crate::special::log_gamma(0.5 * d + 1.0).expect("d ≥ 1") / std::f64::consts::LN_2;
    ((log2_vol - bit_budget) / d).exp2()
}

/// Runs the comparison; the first record is the closed-form encoded-Laplace
/// point (`trials = 0` marks it analytic), followed by one Monte-Carlo
/// discrete-Laplace record per bit budget.
pub fn run_laplace_experiment(
    cfg: &LaplaceExpConfig,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    if cfg.dimension == 0 || cfg.trials == 0 {
        return Err(ExperimentError::InvalidConfig(
            "dimension and trials must be at least 1",
        ));
    }
    if !(cfg.center_norm_fraction >= 0.0 && cfg.center_norm_fraction <= 1.0) {
        return Err(ExperimentError::InvalidConfig(
            "center_norm_fraction must lie in [0, 1]",
        ));
    }
    let d = cfg.dimension as f64;
    let eps = cfg.epsilon_metric;
    let mut records = vec![ExperimentRecord {
        scheme: Scheme::PprLaplace,
        epsilon: eps,
        bits_used: comm_bound_laplace(cfg.ball_radius, cfg.dimension, eps, cfg.alpha)?,
        mse: d * (d + 1.0) / (eps * eps),
        wall_time_seconds: 0.0,
        trials: 0,
    }];
    let master = SharedSeed::from_u64(cfg.seed);
    let x = cfg.center();
    for (b_idx, &budget) in cfg.bit_budgets.iter().enumerate() {
        let step = step_for_bit_budget(cfg.ball_radius, cfg.dimension, budget);
        let dl_cfg = DiscreteLaplaceConfig {
            epsilon_metric: eps,
            ball_radius: cfg.ball_radius,
            dimension: cfg.dimension,
            step,
        };
        let mut sum = 0.0;
        let mut bits = 0u64;
        for trial in 0..cfg.trials {
            let mut local =
                SampleStream::new(&master.derive(b_idx as u64).derive(trial));
            let (z, b) = discrete_laplace_baseline(&x, &dl_cfg, &mut local)?;
            bits = b;
            sum += sq_dist(&z, &x);
        }
        records.push(ExperimentRecord {
            scheme: Scheme::DiscreteLaplace,
            epsilon: eps,
            bits_used: bits as f64,
            mse: sum / cfg.trials as f64,
            wall_time_seconds: 0.0,
            trials: cfg.trials,
        });
    }
    Ok(records)
}

/// Per-chunk wall-time measurement for the encoded Gaussian mechanism.
#[derive(Debug, Clone)]
pub struct TimingConfig {
    pub chunk_dims: Vec<usize>,
    pub trials: u64,
    /// The full vector length used for the extrapolated total.
    pub total_dim: usize,
    pub n_clients: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub sigma_override: Option<f64>,
    pub proposal_c_factor: f64,
    pub seed: u64,
}

impl TimingConfig {
    pub fn desk_default() -> Self {
        Self {
            chunk_dims: vec![10, 20, 40],
            trials: 100,
            total_dim: 1000,
            n_clients: 50,
            epsilon: 0.5,
            delta: 1e-5,
            sigma_override: None,
            proposal_c_factor: 2.0,
            seed: 13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    pub chunk_dim: usize,
    pub trials: u64,
    pub mean_seconds: f64,
    pub se_seconds: f64,
    /// `⌈total_dim/chunk_dim⌉ × mean_seconds`.
    pub full_vector_seconds: f64,
    pub mean_index: f64,
}

/// Times `encode` on chunk-sized mean-estimation problems (±1 data,
/// C = √chunk_dim, DME noise calibration). Wall-clock, hence not
/// byte-reproducible; everything else about the run is seeded.
pub fn run_timing(cfg: &TimingConfig) -> Result<Vec<TimingRecord>, ExperimentError> {
    if cfg.trials == 0 || cfg.chunk_dims.is_empty() {
        return Err(ExperimentError::InvalidConfig(
            "trials and chunk_dims must be nonempty",
        ));
    }
    let params = PprParams::new(2.0)?;
    let master = SharedSeed::from_u64(cfg.seed);
    let mut records = Vec::new();
    for (ci, &chunk) in cfg.chunk_dims.iter().enumerate() {
        let c = (chunk as f64).sqrt();
        let sigma = match cfg.sigma_override {
            Some(s) => s,
            None => gaussian_sigma_for_dp(c, &PrivacyBudget::new(cfg.epsilon, cfg.delta)?)?,
        };
        let s_p = sigma * sigma / cfg.n_clients as f64;
        let s_q = s_p + (cfg.proposal_c_factor * c).powi(2) / chunk as f64;
        let proposal = GaussianProposalSpec::new(s_q, chunk)?;
        let mut times = Vec::with_capacity(cfg.trials as usize);
        let mut index_sum = 0.0;
        for trial in 0..cfg.trials {
            let mut data =
                SampleStream::new(&master.derive(ci as u64).derive(trial).derive(0));
            let x: Vec<f64> = (0..chunk)
                .map(|_| if data.unif01() < 0.8 { 1.0 } else { -1.0 })
                .collect();
            let spec = GaussianMechSpec::new(x, s_p)?;
            let target = gaussian_target(&spec, &proposal)?;
            let shared = master.derive(ci as u64).derive(trial).derive(1);
            let mut local =
                SampleStream::new(&master.derive(ci as u64).derive(trial).derive(2));
            let start = Instant::now();
            let res = encode(&params, &proposal, &target, &shared, &mut local)?;
            times.push(start.elapsed().as_secs_f64());
            index_sum += res.k as f64;
        }
        let t = cfg.trials as f64;
        let mean = times.iter().sum::<f64>() / t;
        let var = times.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (t - 1.0);
        records.push(TimingRecord {
            chunk_dim: chunk,
            trials: cfg.trials,
            mean_seconds: mean,
            se_seconds: (var / t).sqrt(),
            full_vector_seconds: cfg.total_dim.div_ceil(chunk) as f64 * mean,
            mean_index: index_sum / t,
        });
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// CSV persistence

const CSV_HEADER: &str = "scheme,epsilon,bits_used,mse,wall_time_seconds,trials";
const TIMING_HEADER: &str =
    "chunk_dim,trials,mean_seconds,se_seconds,full_vector_seconds,mean_index";

fn fmt_f64(v: f64) -> String {
    // 17 significant digits: lossless f64 round trip.
    format!("{v:.16e}")
}

/// Writes records under the fixed header; floats at 17 significant digits.
pub fn write_csv(records: &[ExperimentRecord], path: &Path) -> Result<(), ExperimentError> {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.scheme,
            fmt_f64(r.epsilon),
            fmt_f64(r.bits_used),
            fmt_f64(r.mse),
            fmt_f64(r.wall_time_seconds),
            r.trials
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`]; errors carry 1-based line numbers.
pub fn read_csv(path: &Path) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(ExperimentError::MalformedCsv {
            line: 1,
            message: "empty file".into(),
        })?;
    if header != CSV_HEADER {
        let have: Vec<&str> = header.split(',').collect();
        for want in CSV_HEADER.split(',') {
            if !have.contains(&want) {
                return Err(ExperimentError::MalformedCsv {
                    line: 1,
                    message: format!("missing column {want:?}"),
                });
            }
        }
        return Err(ExperimentError::MalformedCsv {
            line: 1,
            message: format!("unexpected header {header:?}"),
        });
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(ExperimentError::MalformedCsv {
                line: line_no,
                message: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let parse_f = |s: &str, col: &str| -> Result<f64, ExperimentError> {
            s.parse().map_err(|_| ExperimentError::MalformedCsv {
                line: line_no,
                message: format!("bad {col} value {s:?}"),
            })
        };
        records.push(ExperimentRecord {
            scheme: fields[0]
                .parse()
                .map_err(|e| ExperimentError::MalformedCsv {
                    line: line_no,
                    message: e,
                })?,
            epsilon: parse_f(fields[1], "epsilon")?,
            bits_used: parse_f(fields[2], "bits_used")?,
            mse: parse_f(fields[3], "mse")?,
            wall_time_seconds: parse_f(fields[4], "wall_time_seconds")?,
            trials: fields[5]
                .parse()
                .map_err(|_| ExperimentError::MalformedCsv {
                    line: line_no,
                    message: format!("bad trials value {:?}", fields[5]),
                })?,
        });
    }
    Ok(records)
}

/// Writes timing records (wall-clock values; not byte-reproducible).
pub fn write_timing_csv(records: &[TimingRecord], path: &Path) -> Result<(), ExperimentError> {
    let mut out = String::from(TIMING_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.chunk_dim,
            r.trials,
            fmt_f64(r.mean_seconds),
            fmt_f64(r.se_seconds),
            fmt_f64(r.full_vector_seconds),
            fmt_f64(r.mean_index),
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// The analytic uncompressed-Gaussian MSE `σ²d/n²` for a config at ε.
pub fn uncompressed_mse(cfg: &DmeConfig, epsilon: f64) -> Result<f64, ExperimentError> {
    let noise = dme_noise(cfg, epsilon)?;
    Ok(noise.sigma * noise.sigma * cfg.dimension as f64
        / (cfg.n_clients as f64 * cfg.n_clients as f64))
}
