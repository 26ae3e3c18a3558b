//! Concrete target/proposal constructions for the encoder: the Gaussian
//! mechanism, a multivariate Laplace mechanism for metric privacy, a
//! two-valued spherical-cap mechanism, chunked ("sliced") encoding for long
//! vectors, and a quantized Laplace baseline to compare against.

use crate::encoder::{encode, EncodeResult, PprParams, Proposal, Target};
use crate::rng::{SampleStream, SharedSeed};
use crate::special::{log_gamma, regularized_incomplete_beta};

/// Errors from invalid mechanism parameters.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MechanismError {
    #[error("proposal variance {s_q} must exceed target noise variance {s_p}")]
    ProposalNotWider { s_p: f64, s_q: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("center norm {norm} exceeds the ball radius {radius}")]
    CenterOutsideBall { norm: f64, radius: f64 },
    #[error("Laplace pairing requires proposal variance {expected}, got {got}")]
    WrongProposalVariance { expected: f64, got: f64 },
    #[error("cap threshold must lie in [0, 1), got {0}")]
    InvalidCapThreshold(f64),
    #[error("inside probability must lie in (0, 1), got {0}")]
    InvalidInsideProb(f64),
    #[error("cap mass {0} is numerically degenerate")]
    DegenerateCap(f64),
    #[error("chunk layout requires 1 <= chunk_dim <= total_dim, got {chunk_dim} and {total_dim}")]
    BadChunkLayout { chunk_dim: usize, total_dim: usize },
    #[error("quantizer step is too coarse: the grid bit count {0} is not positive")]
    QuantizerTooCoarse(f64),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_sq(v: &[f64]) -> f64 {
    dot(v, v)
}

// ---------------------------------------------------------------------------
// Gaussian mechanism

/// The per-client Gaussian mechanism `Z | x ~ N(x, s_p I_d)`.
#[derive(Debug, Clone)]
pub struct GaussianMechSpec {
    pub center: Vec<f64>,
    /// Per-coordinate noise variance `s_p` (σ²/n in the mean-estimation
    /// setting).
    pub noise_variance: f64,
}

impl GaussianMechSpec {
    pub fn new(center: Vec<f64>, noise_variance: f64) -> Result<Self, MechanismError> {
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(MechanismError::NonPositive {
                name: "noise_variance",
                value: noise_variance,
            });
        }
        Ok(Self {
            center,
            noise_variance,
        })
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }
}

/// A centered isotropic Gaussian proposal `N(0, s_q I_d)`. Consumes exactly
/// `d` shared draws per sample.
#[derive(Debug, Clone)]
pub struct GaussianProposalSpec {
    variance: f64,
    dimension: usize,
}

impl GaussianProposalSpec {
    pub fn new(variance: f64, dimension: usize) -> Result<Self, MechanismError> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(MechanismError::NonPositive {
                name: "variance",
                value: variance,
            });
        }
        Ok(Self {
            variance,
            dimension,
        })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

impl Proposal for GaussianProposalSpec {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn draws_per_sample(&self) -> u64 {
        self.dimension as u64
    }

    fn sample_into(&self, stream: &mut SampleStream, out: &mut [f64]) {
        stream.fill_std_normal(out);
        let scale = self.variance.sqrt();
        for v in out {
            *v *= scale;
        }
    }
}

/// `ln(dP/dQ)` for the Gaussian pairing, with the analytic supremum.
#[derive(Debug, Clone)]
pub struct GaussianTarget {
    center: Vec<f64>,
    s_p: f64,
    s_q: f64,
    log_r_star: f64,
}

impl Target for GaussianTarget {
    fn log_density_ratio(&self, z: &[f64]) -> f64 {
        let d = self.center.len() as f64;
        let mut shift_sq = 0.0;
        for (zi, xi) in z.iter().zip(&self.center) {
            shift_sq += (zi - xi) * (zi - xi);
        }
        0.5 * d * (self.s_q / self.s_p).ln() + norm_sq(z) / (2.0 * self.s_q)
            - shift_sq / (2.0 * self.s_p)
    }

    fn log_r_star(&self) -> f64 {
        self.log_r_star
    }
}

/// Pairs a Gaussian mechanism with a wider centered proposal. The log-ratio
/// is strictly concave in `z` (because `s_q > s_p`), maximized at
/// `z* = x·s_q/(s_q − s_p)`, giving
/// `log r* = (d/2)·ln(s_q/s_p) + ‖x‖²/(2(s_q − s_p))`.
pub fn gaussian_target(
    spec: &GaussianMechSpec,
    proposal: &GaussianProposalSpec,
) -> Result<GaussianTarget, MechanismError> {
    if proposal.dimension != spec.dimension() {
        return Err(MechanismError::DimensionMismatch {
            expected: spec.dimension(),
            got: proposal.dimension,
        });
    }
    let (s_p, s_q) = (spec.noise_variance, proposal.variance);
    if s_q <= s_p {
        return Err(MechanismError::ProposalNotWider { s_p, s_q });
    }
    let d = spec.dimension() as f64;
    let log_r_star = 0.5 * d * (s_q / s_p).ln() + norm_sq(&spec.center) / (2.0 * (s_q - s_p));
    Ok(GaussianTarget {
        center: spec.center.clone(),
        s_p,
        s_q,
        log_r_star,
    })
}

/// Exact `D(P‖Q)` in nats for this pairing:
/// `(d/2)·ln(s_q/s_p) + (d·s_p + ‖x‖²)/(2·s_q) − d/2`.
pub fn gaussian_kl(spec: &GaussianMechSpec, proposal: &GaussianProposalSpec) -> f64 {
    let d = spec.dimension() as f64;
    let (s_p, s_q) = (spec.noise_variance, proposal.variance);
    0.5 * d * (s_q / s_p).ln() + (d * s_p + norm_sq(&spec.center)) / (2.0 * s_q) - 0.5 * d
}

/// The center-independent KL bound in **bits**, `(d/2)·log₂(C²n/(dσ²) + 1)`,
/// tight when `‖x‖ = C`.
pub fn gaussian_kl_bound(clip_norm: f64, n_clients: u64, dimension: usize, sigma: f64) -> f64 {
    let d = dimension as f64;
    0.5 * d * (clip_norm * clip_norm * n_clients as f64 / (d * sigma * sigma) + 1.0).log2()
}

// ---------------------------------------------------------------------------
// Multivariate Laplace mechanism

/// The metric-privacy Laplace mechanism `f(z|x) ∝ e^{−ε‖z−x‖₂}` on ℝ^d.
#[derive(Debug, Clone)]
pub struct LaplaceMechSpec {
    pub center: Vec<f64>,
    pub epsilon_metric: f64,
    pub ball_radius: f64,
}

impl LaplaceMechSpec {
    pub fn new(
        center: Vec<f64>,
        epsilon_metric: f64,
        ball_radius: f64,
    ) -> Result<Self, MechanismError> {
        if !(epsilon_metric > 0.0) {
            return Err(MechanismError::NonPositive {
                name: "epsilon_metric",
                value: epsilon_metric,
            });
        }
        if !(ball_radius > 0.0) {
            return Err(MechanismError::NonPositive {
                name: "ball_radius",
                value: ball_radius,
            });
        }
        let norm = norm_sq(&center).sqrt();
        if norm > ball_radius * (1.0 + 1e-12) {
            return Err(MechanismError::CenterOutsideBall {
                norm,
                radius: ball_radius,
            });
        }
        Ok(Self {
            center,
            epsilon_metric,
            ball_radius,
        })
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }
}

/// The proposal variance this pairing requires: `C²/d + (d+1)/ε²` per
/// coordinate.
pub fn laplace_proposal_variance(ball_radius: f64, dimension: usize, epsilon: f64) -> f64 {
    let d = dimension as f64;
    ball_radius * ball_radius / d + (d + 1.0) / (epsilon * epsilon)
}

/// `ln(dP/dQ)` for the Laplace mechanism against a Gaussian proposal. The
/// ratio is unbounded (`log_r_star = +∞`), so only the truncated encoder
/// accepts this target.
#[derive(Debug, Clone)]
pub struct LaplaceTarget {
    center: Vec<f64>,
    epsilon: f64,
    /// ln c_d + d·ln ε, the log normalizer of the density.
    log_norm: f64,
    proposal_variance: f64,
}

impl Target for LaplaceTarget {
    fn log_density_ratio(&self, z: &[f64]) -> f64 {
        let d = z.len() as f64;
        let mut shift_sq = 0.0;
        for (zi, xi) in z.iter().zip(&self.center) {
            shift_sq += (zi - xi) * (zi - xi);
        }
        let ln_q = -0.5 * d * (2.0 * std::f64::consts::PI * self.proposal_variance).ln()
            - norm_sq(z) / (2.0 * self.proposal_variance);
        self.log_norm - self.epsilon * shift_sq.sqrt() - ln_q
    }

    fn log_r_star(&self) -> f64 {
        f64::INFINITY
    }
}

/// Pairs the Laplace mechanism with the Gaussian proposal of variance
/// exactly [`laplace_proposal_variance`]. The density normalizer is
/// `c_d·ε^d` with `ln c_d = ln Γ(d/2+1) − ln d − ln Γ(d) − (d/2)·ln π`,
/// from the unit-ball volume and the Gamma(d, 1/ε) radial law.
pub fn laplace_target(
    spec: &LaplaceMechSpec,
    proposal: &GaussianProposalSpec,
) -> Result<LaplaceTarget, MechanismError> {
    let d = spec.dimension();
    if proposal.dimension != d {
        return Err(MechanismError::DimensionMismatch {
            expected: d,
            got: proposal.dimension,
        });
    }
    let expected = laplace_proposal_variance(spec.ball_radius, d, spec.epsilon_metric);
    if (proposal.variance - expected).abs() > 1e-9 * expected {
        return Err(MechanismError::WrongProposalVariance {
            expected,
            got: proposal.variance,
        });
    }
    let df = d as f64;
    let ln_c_d = log_gamma(0.5 * df + 1.0).expect("d ≥ 1") - df.ln()
        - log_gamma(df).expect("d ≥ 1")
        - 0.5 * df * std::f64::consts::PI.ln();
    Ok(LaplaceTarget {
        center: spec.center.clone(),
        epsilon: spec.epsilon_metric,
        log_norm: ln_c_d + df * spec.epsilon_metric.ln(),
        proposal_variance: proposal.variance,
    })
}

/// Draws `Y` with density `∝ e^{−ε‖y‖₂}`: radius `Gamma(d, 1/ε)` (a sum of
/// `d` unit exponentials over ε), direction uniform on the sphere.
pub fn sample_laplace_noise(
    dimension: usize,
    epsilon: f64,
    stream: &mut SampleStream,
) -> Vec<f64> {
    assert!(dimension >= 1, "dimension must be at least 1");
    assert!(epsilon > 0.0, "epsilon must be positive");
    let mut radius = 0.0;
    for _ in 0..dimension {
        radius += stream.exp1();
    }
    radius /= epsilon;
    let mut out = vec![0.0; dimension];
    stream.fill_std_normal(&mut out);
    let norm = norm_sq(&out).sqrt();
    for v in &mut out {
        *v *= radius / norm;
    }
    out
}

// ---------------------------------------------------------------------------
// Spherical-cap mechanism

/// A two-valued density on the sphere of radius `sphere_radius`: mass
/// `inside_prob` spread uniformly over the cap
/// `{z : ⟨z, direction⟩/‖z‖ ≥ cap_threshold}`, the rest uniform outside.
#[derive(Debug, Clone)]
pub struct CapMechSpec {
    pub direction: Vec<f64>,
    pub cap_threshold: f64,
    pub inside_prob: f64,
    pub sphere_radius: f64,
}

/// The uniform-sphere probability of the cap `{cos ≥ γ}` in dimension `d`,
/// via the regularized incomplete beta of the cap height; `d = 1` and
/// `d = 2` reduce to `1/2` and `arccos(γ)/π`.
pub fn cap_mass(dimension: usize, cap_threshold: f64) -> Result<f64, MechanismError> {
    let g = cap_threshold;
    if !(0.0..1.0).contains(&g) {
        return Err(MechanismError::InvalidCapThreshold(g));
    }
    Ok(match dimension {
        0 => return Err(MechanismError::DimensionMismatch { expected: 1, got: 0 }),
        1 => 0.5,
        2 => g.acos() / std::f64::consts::PI,
        d => {
            let a = 0.5 * (d as f64 - 1.0);
            0.5 * regularized_incomplete_beta(a, 0.5, 1.0 - g * g).expect("domain checked")
        }
    })
}

/// A uniform proposal on the sphere of the given radius. Consumes exactly
/// `d` shared draws per sample.
#[derive(Debug, Clone)]
pub struct SphereProposal {
    dimension: usize,
    radius: f64,
}

impl SphereProposal {
    pub fn new(dimension: usize, radius: f64) -> Result<Self, MechanismError> {
        if !(radius > 0.0) {
            return Err(MechanismError::NonPositive {
                name: "radius",
                value: radius,
            });
        }
        Ok(Self { dimension, radius })
    }
}

impl Proposal for SphereProposal {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn draws_per_sample(&self) -> u64 {
        self.dimension as u64
    }

    fn sample_into(&self, stream: &mut SampleStream, out: &mut [f64]) {
        stream.fill_std_normal(out);
        let norm = norm_sq(out).sqrt();
        for v in out {
            *v *= self.radius / norm;
        }
    }
}

/// The two-valued cap density ratio; `log_r_star` is the larger branch.
#[derive(Debug, Clone)]
pub struct CapTarget {
    direction: Vec<f64>,
    cap_threshold: f64,
    ln_inside: f64,
    ln_outside: f64,
}

impl CapTarget {
    pub fn branch_values(&self) -> (f64, f64) {
        (self.ln_inside, self.ln_outside)
    }
}

impl Target for CapTarget {
    fn log_density_ratio(&self, z: &[f64]) -> f64 {
        let cos = dot(z, &self.direction) / norm_sq(z).sqrt();
        if cos >= self.cap_threshold {
            self.ln_inside
        } else {
            self.ln_outside
        }
    }

    fn log_r_star(&self) -> f64 {
        self.ln_inside.max(self.ln_outside)
    }
}

/// Builds the cap target and its uniform-sphere proposal. The ratio takes
/// the value `p/A_in` on the cap and `(1−p)/(1−A_in)` off it, where `A_in`
/// is [`cap_mass`].
pub fn cap_target(spec: &CapMechSpec) -> Result<(CapTarget, SphereProposal), MechanismError> {
    let p = spec.inside_prob;
    if !(0.0 < p && p < 1.0) {
        return Err(MechanismError::InvalidInsideProb(p));
    }
    let d = spec.direction.len();
    let a_in = cap_mass(d, spec.cap_threshold)?;
    if !(a_in > 0.0 && a_in < 1.0) || !a_in.is_finite() {
        return Err(MechanismError::DegenerateCap(a_in));
    }
    let norm = norm_sq(&spec.direction).sqrt();
    if !(norm > 0.0) {
        return Err(MechanismError::NonPositive {
            name: "direction norm",
            value: norm,
        });
    }
    let direction = spec.direction.iter().map(|v| v / norm).collect();
    let target = CapTarget {
        direction,
        cap_threshold: spec.cap_threshold,
        ln_inside: (p / a_in).ln(),
        ln_outside: ((1.0 - p) / (1.0 - a_in)).ln(),
    };
    let proposal = SphereProposal::new(d, spec.sphere_radius)?;
    Ok((target, proposal))
}

// ---------------------------------------------------------------------------
// Sliced encoding

/// Contiguous chunking of a long vector: `⌈total_dim/chunk_dim⌉` slices,
/// the last possibly shorter.
#[derive(Debug, Clone, Copy)]
pub struct SlicedConfig {
    chunk_dim: usize,
    total_dim: usize,
}

impl SlicedConfig {
    pub fn new(chunk_dim: usize, total_dim: usize) -> Result<Self, MechanismError> {
        if chunk_dim == 0 || chunk_dim > total_dim {
            return Err(MechanismError::BadChunkLayout {
                chunk_dim,
                total_dim,
            });
        }
        Ok(Self {
            chunk_dim,
            total_dim,
        })
    }

    pub fn n_chunks(&self) -> usize {
        self.total_dim.div_ceil(self.chunk_dim)
    }

    pub fn chunk_bounds(&self, index: usize) -> (usize, usize) {
        let start = index * self.chunk_dim;
        (start, (start + self.chunk_dim).min(self.total_dim))
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }
}

/// A per-chunk proposal/target pair produced by a mechanism factory.
pub type ChunkMech = (Box<dyn Proposal>, Box<dyn Target>);

/// Encodes each chunk independently. Chunk `i` runs against the derived
/// shared seed `shared.derive(i)`, so every chunk is individually
/// jump-decodable; local variates are drawn sequentially from one stream.
pub fn sliced_encode(
    x: &[f64],
    factory: &dyn Fn(&[f64]) -> ChunkMech,
    cfg: &SlicedConfig,
    params: &PprParams,
    shared: &SharedSeed,
    local: &mut SampleStream,
) -> Result<Vec<EncodeResult>, crate::encoder::EncodeError> {
    assert_eq!(x.len(), cfg.total_dim, "input length must match total_dim");
    let mut results = Vec::with_capacity(cfg.n_chunks());
    for i in 0..cfg.n_chunks() {
        let (start, end) = cfg.chunk_bounds(i);
        let (proposal, target) = factory(&x[start..end]);
        let chunk_shared = shared.derive(i as u64);
        results.push(encode(
            params,
            proposal.as_ref(),
            target.as_ref(),
            &chunk_shared,
            local,
        )?);
    }
    Ok(results)
}

/// Reassembles the vector from per-chunk indices; `proposal_factory`
/// receives each chunk's length.
pub fn sliced_decode(
    proposal_factory: &dyn Fn(usize) -> Box<dyn Proposal>,
    indices: &[u64],
    cfg: &SlicedConfig,
    shared: &SharedSeed,
) -> Vec<f64> {
    assert_eq!(indices.len(), cfg.n_chunks(), "one index per chunk");
    let mut out = Vec::with_capacity(cfg.total_dim);
    for (i, &k) in indices.iter().enumerate() {
        let (start, end) = cfg.chunk_bounds(i);
        let proposal = proposal_factory(end - start);
        let chunk_shared = shared.derive(i as u64);
        out.extend(crate::encoder::decode(proposal.as_ref(), k, &chunk_shared));
    }
    out
}

// ---------------------------------------------------------------------------
// Discrete Laplace baseline

/// The quantize-and-truncate Laplace baseline: add Laplace noise, project
/// onto the radius-`C` ball, then snap coordinates to a grid of step `u`.
#[derive(Debug, Clone)]
pub struct DiscreteLaplaceConfig {
    pub epsilon_metric: f64,
    pub ball_radius: f64,
    pub dimension: usize,
    pub step: f64,
}

/// Runs the baseline once; returns the quantized vector and the message
/// size `⌈log₂(Vol(𝔅_d(C))/u^d)⌉` in bits. A `1e-9` relief inside the
/// ceiling absorbs round-off when the count is exactly a power of two.
pub fn discrete_laplace_baseline(
    x: &[f64],
    cfg: &DiscreteLaplaceConfig,
    local: &mut SampleStream,
) -> Result<(Vec<f64>, u64), MechanismError> {
    if !(cfg.step > 0.0) {
        return Err(MechanismError::NonPositive {
            name: "step",
            value: cfg.step,
        });
    }
    if !(cfg.epsilon_metric > 0.0) {
        return Err(MechanismError::NonPositive {
            name: "epsilon_metric",
            value: cfg.epsilon_metric,
        });
    }
    if x.len() != cfg.dimension {
        return Err(MechanismError::DimensionMismatch {
            expected: cfg.dimension,
            got: x.len(),
        });
    }
    let norm = norm_sq(x).sqrt();
    if norm > cfg.ball_radius * (1.0 + 1e-12) {
        return Err(MechanismError::CenterOutsideBall {
            norm,
            radius: cfg.ball_radius,
        });
    }
    let d = cfg.dimension as f64;
    let log2_vol = 0.5 * d * std::f64::consts::PI.log2() + d * cfg.ball_radius.log2()
        - log_gamma(0.5 * d + 1.0).expect("d ≥ 1") / std::f64::consts::LN_2;
    let log2_count = log2_vol - d * cfg.step.log2();
    if !(log2_count > 0.0) {
        return Err(MechanismError::QuantizerTooCoarse(log2_count));
    }
    let bits = (log2_count - 1e-9).ceil().max(1.0) as u64;

    let noise = sample_laplace_noise(cfg.dimension, cfg.epsilon_metric, local);
    let mut z: Vec<f64> = x.iter().zip(&noise).map(|(a, b)| a + b).collect();
    let z_norm = norm_sq(&z).sqrt();
    if z_norm > cfg.ball_radius {
        let scale = cfg.ball_radius / z_norm;
        for v in &mut z {
            *v *= scale;
        }
    }
    for v in &mut z {
        *v = (*v / cfg.step).round() * cfg.step;
    }
    Ok((z, bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{decode, encode_truncated, EncodeError};

    fn seeds(i: u64) -> (SharedSeed, SampleStream) {
        let shared = SharedSeed::from_u64(31_000).derive(i);
        let local = SampleStream::new(&SharedSeed::from_u64(32_000).derive(i));
        (shared, local)
    }

    #[test]
    fn gaussian_log_r_star_closed_form() {
        // Symmetric case: the maximizer is the origin.
        let spec = GaussianMechSpec::new(vec![0.0; 4], 0.5).unwrap();
        let proposal = GaussianProposalSpec::new(1.5, 4).unwrap();
        let target = gaussian_target(&spec, &proposal).unwrap();
        assert!((target.log_r_star() - 2.0 * 3.0f64.ln()).abs() < 1e-14);
        assert!((target.log_density_ratio(&[0.0; 4]) - target.log_r_star()).abs() < 1e-14);

        // d = 1, x = 1, s_p = 1, s_q = 2: supremum (ln 2)/2 + 1/2 at z* = 2.
        let spec = GaussianMechSpec::new(vec![1.0], 1.0).unwrap();
        let proposal = GaussianProposalSpec::new(2.0, 1).unwrap();
        let target = gaussian_target(&spec, &proposal).unwrap();
        let expected = 0.5 * 2.0f64.ln() + 0.5;
        assert!((target.log_r_star() - expected).abs() < 1e-14);
        let mut grid_max = f64::NEG_INFINITY;
        let mut z = -10.0;
        while z <= 10.0 {
            grid_max = grid_max.max(target.log_density_ratio(&[z]));
            z += 1e-3;
        }
        assert!(grid_max <= target.log_r_star() + 1e-12);
        assert!(target.log_r_star() - grid_max < 1e-6);
    }

    #[test]
    fn gaussian_ratio_never_exceeds_bound() {
        let spec = GaussianMechSpec::new(vec![0.4, -0.3, 0.2], 0.3).unwrap();
        let proposal = GaussianProposalSpec::new(0.9, 3).unwrap();
        let target = gaussian_target(&spec, &proposal).unwrap();
        let (_, mut local) = seeds(1);
        let mut buf = vec![0.0; 3];
        for _ in 0..100_000 {
            proposal.sample_into(&mut local, &mut buf);
            assert!(target.log_density_ratio(&buf) <= target.log_r_star());
        }
    }

    #[test]
    fn gaussian_rejects_narrow_proposal() {
        let spec = GaussianMechSpec::new(vec![0.0], 1.0).unwrap();
        let proposal = GaussianProposalSpec::new(1.0, 1).unwrap();
        assert!(matches!(
            gaussian_target(&spec, &proposal),
            Err(MechanismError::ProposalNotWider { .. })
        ));
        let wrong_dim = GaussianProposalSpec::new(2.0, 3).unwrap();
        assert!(matches!(
            gaussian_target(&spec, &wrong_dim),
            Err(MechanismError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gaussian_kl_closed_form_and_monte_carlo() {
        let spec = GaussianMechSpec::new(vec![0.0], 1.0).unwrap();
        let proposal = GaussianProposalSpec::new(2.0, 1).unwrap();
        let kl = gaussian_kl(&spec, &proposal);
        assert!((kl - 0.5 * (2.0f64.ln() + 0.5 - 1.0)).abs() < 1e-14);

        // E_P[ln(dP/dQ)] estimated under P must match.
        let spec = GaussianMechSpec::new(vec![0.3, -0.7], 0.4).unwrap();
        let proposal = GaussianProposalSpec::new(1.1, 2).unwrap();
        let target = gaussian_target(&spec, &proposal).unwrap();
        let kl = gaussian_kl(&spec, &proposal);
        let (_, mut local) = seeds(2);
        let n = 200_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        let mut z = vec![0.0; 2];
        for _ in 0..n {
            local.fill_std_normal(&mut z);
            for (zi, xi) in z.iter_mut().zip(&spec.center) {
                *zi = xi + *zi * spec.noise_variance.sqrt();
            }
            let v = target.log_density_ratio(&z);
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - kl).abs() < 5.0 * se, "mean {mean}, kl {kl}, se {se}");
    }

    #[test]
    fn gaussian_kl_bound_is_tight_at_the_boundary() {
        // ‖x‖ = C makes the exact KL (nats) equal the bound (bits) times ln 2.
        let c: f64 = 2.0;
        let n = 40u64;
        let d = 8usize;
        let sigma: f64 = 3.0;
        let s_p = sigma * sigma / n as f64;
        let s_q = c * c / d as f64 + s_p;
        let mut x = vec![0.0; d];
        x[0] = c;
        let spec = GaussianMechSpec::new(x, s_p).unwrap();
        let proposal = GaussianProposalSpec::new(s_q, d).unwrap();
        let kl = gaussian_kl(&spec, &proposal);
        let bound_bits = gaussian_kl_bound(c, n, d, sigma);
        assert!((kl - bound_bits * std::f64::consts::LN_2).abs() < 1e-12);
        // And at C²n/(dσ²) = 1 the bound is d/2 bits.
        assert!((gaussian_kl_bound(3.0, 4, 9, 2.0) - 4.5).abs() < 1e-12);
    }

    #[test]
    fn gaussian_encode_is_unbiased() {
        let x = vec![0.3, -0.2, 0.5];
        let s_p = 0.25;
        let c_sq = norm_sq(&x);
        let s_q = c_sq / 3.0 + s_p;
        let spec = GaussianMechSpec::new(x.clone(), s_p).unwrap();
        let proposal = GaussianProposalSpec::new(s_q, 3).unwrap();
        let target = gaussian_target(&spec, &proposal).unwrap();
        let params = PprParams::new(2.0).unwrap();
        let n = 5_000;
        let mut sums = [0.0; 3];
        for i in 0..n {
            let (shared, mut local) = seeds(100 + i);
            let res = encode(&params, &proposal, &target, &shared, &mut local).unwrap();
            let z = decode(&proposal, res.k, &shared);
            for (s, zi) in sums.iter_mut().zip(&z) {
                *s += zi;
            }
        }
        let se = (s_p / n as f64).sqrt();
        for (s, xi) in sums.iter().zip(&x) {
            let mean = s / n as f64;
            assert!((mean - xi).abs() < 5.0 * se, "mean {mean} vs {xi}");
        }
    }

    #[test]
    fn laplace_reduces_to_scalar_laplace() {
        // In one dimension the density is (ε/2)·e^{−ε|z−x|}.
        let eps = 1.7;
        let spec = LaplaceMechSpec::new(vec![0.4], eps, 1.0).unwrap();
        let s_q = laplace_proposal_variance(1.0, 1, eps);
        let proposal = GaussianProposalSpec::new(s_q, 1).unwrap();
        let target = laplace_target(&spec, &proposal).unwrap();
        for z in [-1.0, 0.3, 2.0] {
            let ln_q = -0.5 * (2.0 * std::f64::consts::PI * s_q).ln() - z * z / (2.0 * s_q);
            let ln_p = target.log_density_ratio(&[z]) + ln_q;
            let expected = (eps / 2.0).ln() - eps * (z - 0.4f64).abs();
            assert!((ln_p - expected).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn laplace_normalizer_integrates_to_one() {
        // Radially: ∫ c_d ε^d e^{−εr} S_{d−1} r^{d−1} dr = 1.
        for d in [3usize, 6] {
            let eps: f64 = 0.8;
            let df = d as f64;
            let ln_c_d = log_gamma(0.5 * df + 1.0).unwrap() - df.ln() - log_gamma(df).unwrap()
                - 0.5 * df * std::f64::consts::PI.ln();
            let surface = 2.0 * std::f64::consts::PI.powf(0.5 * df)
                / log_gamma(0.5 * df).unwrap().exp();
            let density = move |r: f64| {
                (ln_c_d + df * eps.ln() - eps * r).exp() * surface * r.powf(df - 1.0)
            };
            let integral = crate::special::adaptive_simpson(&density, 1e-12, 80.0 / eps, 1e-10);
            assert!((integral - 1.0).abs() < 1e-6, "d={d}: {integral}");
        }
    }

    #[test]
    fn laplace_noise_mse_matches_closed_form() {
        // E‖Y‖² = d(d+1)/ε², which is 30 at d = 5, ε = 1.
        let (_, mut local) = seeds(3);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += norm_sq(&sample_laplace_noise(5, 1.0, &mut local));
        }
        let mse = sum / n as f64;
        assert!((mse - 30.0).abs() < 0.02 * 30.0, "mse {mse}");
    }

    #[test]
    fn laplace_target_requires_truncated_encoder() {
        let eps = 1.0;
        let spec = LaplaceMechSpec::new(vec![0.5, -0.5], eps, 1.0).unwrap();
        let s_q = laplace_proposal_variance(1.0, 2, eps);
        let proposal = GaussianProposalSpec::new(s_q, 2).unwrap();
        let target = laplace_target(&spec, &proposal).unwrap();
        let params = PprParams::new(2.0).unwrap();
        let (shared, mut local) = seeds(4);
        assert!(matches!(
            encode(&params, &proposal, &target, &shared, &mut local),
            Err(EncodeError::UnboundedRatio(_))
        ));
        let res =
            encode_truncated(&params, &proposal, &target, &shared, &mut local, 2_000).unwrap();
        let z = decode(&proposal, res.k, &shared);
        assert_eq!(z.len(), 2);
        assert!(z.iter().all(|v| v.is_finite()));

        // Mismatched proposal variance is refused up front.
        let wrong = GaussianProposalSpec::new(s_q * 1.01, 2).unwrap();
        assert!(matches!(
            laplace_target(&spec, &wrong),
            Err(MechanismError::WrongProposalVariance { .. })
        ));
    }

    #[test]
    fn laplace_rejects_center_outside_ball() {
        assert!(matches!(
            LaplaceMechSpec::new(vec![2.0, 2.0], 1.0, 1.0),
            Err(MechanismError::CenterOutsideBall { .. })
        ));
    }

    #[test]
    fn cap_mass_closed_forms() {
        assert_eq!(cap_mass(1, 0.7).unwrap(), 0.5);
        // Frozen reference values; d = 3 is (1−γ)/2 exactly.
        assert!((cap_mass(2, 0.4).unwrap() - 0.36901011956554538276).abs() < 1e-14);
        assert!((cap_mass(3, 0.4).unwrap() - 0.3).abs() < 1e-13);
        assert!((cap_mass(40, 0.3).unwrap() - 0.028345503389244134071).abs() < 1e-13);
        // Monotone shrinking in the threshold.
        let mut prev = f64::INFINITY;
        for i in 1..20 {
            let a = cap_mass(7, i as f64 * 0.05).unwrap();
            assert!(a < prev);
            prev = a;
        }
        assert!(cap_mass(3, 1.0).is_err());
        assert!(cap_mass(3, -0.2).is_err());
    }

    #[test]
    fn cap_ratio_two_valued_and_normalized() {
        let spec = CapMechSpec {
            direction: vec![0.0, 0.0, 2.0], // normalized internally
            cap_threshold: 0.4,
            inside_prob: 0.9,
            sphere_radius: 2.0,
        };
        let (target, proposal) = cap_target(&spec).unwrap();
        let a_in = cap_mass(3, 0.4).unwrap();
        let (ln_in, ln_out) = target.branch_values();
        assert!((ln_in - (0.9f64 / a_in).ln()).abs() < 1e-14);
        assert!((ln_out - (0.1f64 / (1.0 - a_in)).ln()).abs() < 1e-14);
        assert_eq!(target.log_r_star(), ln_in);

        // Every sample takes exactly one of the two values; the empirical
        // cap fraction matches A_in, hence the ratio integrates to 1.
        let (_, mut local) = seeds(5);
        let mut buf = vec![0.0; 3];
        let n = 1_000_000u64;
        let mut inside = 0u64;
        for _ in 0..n {
            proposal.sample_into(&mut local, &mut buf);
            let v = target.log_density_ratio(&buf);
            assert!(v == ln_in || v == ln_out);
            if v == ln_in {
                inside += 1;
            }
        }
        let frac = inside as f64 / n as f64;
        let se = (a_in * (1.0 - a_in) / n as f64).sqrt();
        assert!((frac - a_in).abs() < 5.0 * se, "frac {frac} vs {a_in}");
        let integral = frac * (0.9 / a_in) + (1.0 - frac) * (0.1 / (1.0 - a_in));
        let int_se = se * (0.9 / a_in - 0.1 / (1.0 - a_in)).abs();
        assert!((integral - 1.0).abs() < 5.0 * int_se + 1e-12);
    }

    #[test]
    fn cap_matched_probability_gives_flat_ratio() {
        let a_in = cap_mass(4, 0.25).unwrap();
        let spec = CapMechSpec {
            direction: vec![1.0, 0.0, 0.0, 0.0],
            cap_threshold: 0.25,
            inside_prob: a_in,
            sphere_radius: 1.0,
        };
        let (target, _) = cap_target(&spec).unwrap();
        let (ln_in, ln_out) = target.branch_values();
        assert!(ln_in.abs() < 1e-14 && ln_out.abs() < 1e-14);
        assert_eq!(target.log_r_star(), ln_in.max(ln_out));
    }

    #[test]
    fn cap_encode_hits_the_cap_with_probability_p() {
        let spec = CapMechSpec {
            direction: vec![0.0, 1.0, 0.0],
            cap_threshold: 0.5,
            inside_prob: 0.8,
            sphere_radius: 1.0,
        };
        let (target, proposal) = cap_target(&spec).unwrap();
        let params = PprParams::new(2.0).unwrap();
        let n = 3_000;
        let mut inside = 0u64;
        for i in 0..n {
            let (shared, mut local) = seeds(900 + i);
            let res = encode(&params, &proposal, &target, &shared, &mut local).unwrap();
            let z = decode(&proposal, res.k, &shared);
            assert!((norm_sq(&z).sqrt() - 1.0).abs() < 1e-12);
            if z[1] >= 0.5 {
                inside += 1;
            }
        }
        let frac = inside as f64 / n as f64;
        let se = (0.8 * 0.2 / n as f64).sqrt();
        assert!((frac - 0.8).abs() < 5.0 * se, "frac {frac}");
    }

    #[test]
    fn cap_degenerate_and_invalid_parameters() {
        let mk = |threshold, p| CapMechSpec {
            direction: vec![1.0; 2000],
            cap_threshold: threshold,
            inside_prob: p,
            sphere_radius: 1.0,
        };
        // At d = 2000 and γ close to 1 the cap mass underflows.
        assert!(matches!(
            cap_target(&mk(0.999_999, 0.5)),
            Err(MechanismError::DegenerateCap(_))
        ));
        assert!(cap_target(&mk(0.5, 0.0)).is_err());
        assert!(cap_target(&mk(0.5, 1.0)).is_err());
        assert!(cap_target(&mk(1.2, 0.5)).is_err());
    }

    // Proposal variance s_p + width, with the width a fixed a-priori bound
    // (the clip-norm convention): tying it to the realized chunk norm makes
    // ‖x‖²/(2(s_q−s_p)) collapse to d/2 nats and the scan infeasible.
    fn gaussian_chunk_factory(s_p: f64, width: f64) -> impl Fn(&[f64]) -> ChunkMech {
        move |chunk: &[f64]| {
            let d = chunk.len();
            let spec = GaussianMechSpec::new(chunk.to_vec(), s_p).unwrap();
            let proposal = GaussianProposalSpec::new(s_p + width, d).unwrap();
            let target = gaussian_target(&spec, &proposal).unwrap();
            (Box::new(proposal) as Box<dyn Proposal>, Box::new(target) as Box<dyn Target>)
        }
    }

    #[test]
    fn sliced_single_chunk_matches_plain_encode() {
        let x = vec![0.2, -0.4, 0.1];
        let cfg = SlicedConfig::new(3, 3).unwrap();
        let params = PprParams::new(2.0).unwrap();
        let factory = gaussian_chunk_factory(0.3, 0.5);
        let (shared, mut local) = seeds(6);
        let sliced = sliced_encode(&x, &factory, &cfg, &params, &shared, &mut local).unwrap();
        assert_eq!(sliced.len(), 1);

        let (proposal, target) = factory(&x);
        let (_, mut local2) = seeds(6);
        let single = encode(
            &params,
            proposal.as_ref(),
            target.as_ref(),
            &shared.derive(0),
            &mut local2,
        )
        .unwrap();
        assert_eq!(sliced[0].k, single.k);
    }

    #[test]
    fn sliced_round_trip_is_bit_exact() {
        let d = 100;
        let x: Vec<f64> = (0..d).map(|i| 0.05 * ((i % 7) as f64 - 3.0)).collect();
        let cfg = SlicedConfig::new(50, d).unwrap();
        assert_eq!(cfg.n_chunks(), 2);
        let params = PprParams::new(2.0).unwrap();
        let (s_p, width) = (8.0, 1.0);
        let factory = gaussian_chunk_factory(s_p, width);
        let (shared, mut local) = seeds(7);
        let results = sliced_encode(&x, &factory, &cfg, &params, &shared, &mut local).unwrap();
        let ks: Vec<u64> = results.iter().map(|r| r.k).collect();

        let proposal_factory = |len: usize| {
            Box::new(GaussianProposalSpec::new(s_p + width, len).unwrap()) as Box<dyn Proposal>
        };
        let decoded = sliced_decode(&proposal_factory, &ks, &cfg, &shared);
        assert_eq!(decoded.len(), d);
        let mut manual = Vec::new();
        for (i, &k) in ks.iter().enumerate() {
            let (start, end) = cfg.chunk_bounds(i);
            let prop = GaussianProposalSpec::new(s_p + width, end - start).unwrap();
            manual.extend(decode(&prop, k, &shared.derive(i as u64)));
        }
        assert_eq!(decoded, manual);
    }

    #[test]
    fn sliced_gaussian_chunks_have_the_right_moments() {
        let x = vec![0.4, -0.1, 0.2, 0.3];
        let s_p = 0.25;
        let cfg = SlicedConfig::new(2, 4).unwrap();
        let params = PprParams::new(2.0).unwrap();
        let factory = gaussian_chunk_factory(s_p, 0.15);
        let n = 10_000;
        let mut sums = [0.0; 4];
        let mut sums_sq = [0.0; 4];
        for trial in 0..n {
            let (shared, mut local) = seeds(10_000 + trial);
            let results =
                sliced_encode(&x, &factory, &cfg, &params, &shared, &mut local).unwrap();
            for (i, res) in results.iter().enumerate() {
                let (start, end) = cfg.chunk_bounds(i);
                let (proposal, _) = factory(&x[start..end]);
                let z = decode(proposal.as_ref(), res.k, &shared.derive(i as u64));
                for (j, zi) in z.iter().enumerate() {
                    sums[start + j] += zi;
                    sums_sq[start + j] += zi * zi;
                }
            }
        }
        let nf = n as f64;
        for i in 0..4 {
            let mean = sums[i] / nf;
            let var = sums_sq[i] / nf - mean * mean;
            assert!(
                (mean - x[i]).abs() < 5.0 * (s_p / nf).sqrt(),
                "coordinate {i}: mean {mean}"
            );
            assert!(
                (var - s_p).abs() < 0.05 * s_p,
                "coordinate {i}: variance {var}"
            );
        }
    }

    #[test]
    fn sliced_config_validation() {
        assert!(SlicedConfig::new(0, 5).is_err());
        assert!(SlicedConfig::new(6, 5).is_err());
        let cfg = SlicedConfig::new(3, 7).unwrap();
        assert_eq!(cfg.n_chunks(), 3);
        assert_eq!(cfg.chunk_bounds(2), (6, 7));
    }

    #[test]
    fn discrete_laplace_bits_formula() {
        let (_, mut local) = seeds(8);
        let cfg = DiscreteLaplaceConfig {
            epsilon_metric: 1.0,
            ball_radius: 1.0,
            dimension: 1,
            step: 0.5,
        };
        let (_, bits) = discrete_laplace_baseline(&[0.3], &cfg, &mut local).unwrap();
        assert_eq!(bits, 2); // ⌈log₂(Vol(𝔅₁(1))/0.5)⌉ = ⌈log₂ 4⌉

        let coarse = DiscreteLaplaceConfig {
            step: 10.0,
            ..cfg.clone()
        };
        assert!(matches!(
            discrete_laplace_baseline(&[0.3], &coarse, &mut local),
            Err(MechanismError::QuantizerTooCoarse(_))
        ));
        assert!(discrete_laplace_baseline(&[2.0], &cfg, &mut local).is_err());
    }

    #[test]
    fn discrete_laplace_quantizes_onto_the_grid() {
        let cfg = DiscreteLaplaceConfig {
            epsilon_metric: 1.0,
            ball_radius: 2.0,
            dimension: 3,
            step: 0.125, // power of two: grid points are exact in binary
        };
        for i in 0..200 {
            let (_, mut local) = seeds(40 + i);
            let (z, _) = discrete_laplace_baseline(&[0.5, -0.25, 0.75], &cfg, &mut local).unwrap();
            for v in &z {
                assert_eq!((v / cfg.step).round() * cfg.step, *v);
            }
            let norm = norm_sq(&z).sqrt();
            assert!(norm <= cfg.ball_radius + cfg.step * (cfg.dimension as f64).sqrt());
        }
    }

    #[test]
    fn discrete_laplace_fine_grid_matches_pure_noise() {
        // With the ball huge and the grid fine, the output is x + Laplace
        // noise, so the MSE approaches d(d+1)/ε² = 30.
        let cfg = DiscreteLaplaceConfig {
            epsilon_metric: 1.0,
            ball_radius: 1e6,
            dimension: 5,
            step: 1e-6,
        };
        let x = [0.1, 0.2, -0.3, 0.0, 0.4];
        let n = 30_000;
        let mut sum = 0.0;
        let (_, mut local) = seeds(9);
        for _ in 0..n {
            let (z, _) = discrete_laplace_baseline(&x, &cfg, &mut local).unwrap();
            sum += z
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
        let mse = sum / n as f64;
        // sd(‖Y‖²) = √780 ≈ 27.9 per draw.
        let tol = 5.0 * (780.0f64 / n as f64).sqrt();
        assert!((mse - 30.0).abs() < tol, "mse {mse}");
    }
}
