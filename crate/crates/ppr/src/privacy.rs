//! The privacy-budget calculus for encoded mechanisms and the
//! communication-bound formulas.
//!
//! Base convention: budgets (ε) are in nats; communication bounds are in
//! bits. The one exception is [`comm_bound_ldp`], whose `epsilon_bits`
//! argument enters a bit-count directly and must already be in log₂ units.

use crate::special::log_gamma;

/// Errors from out-of-range parameters or vacuous guarantees.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PrivacyError {
    #[error("privacy budget requires epsilon >= 0 and delta in [0, 1), got ({epsilon}, {delta})")]
    InvalidBudget { epsilon: f64, delta: f64 },
    #[error("this transform requires delta = 0, got {0}")]
    NonZeroDelta(f64),
    #[error("order parameter must exceed 1, got {0}")]
    InvalidOrder(f64),
    #[error("output delta {0} reaches 1; the guarantee would be vacuous")]
    VacuousDelta(f64),
    #[error("{name} must lie in {range}, got {value}")]
    KnobOutOfRange {
        name: &'static str,
        range: &'static str,
        value: f64,
    },
    #[error("classical calibration requires 0 < epsilon < 1, got {0}")]
    EpsilonNotCalibratable(f64),
    #[error("the local-DP form requires epsilon < 1/sqrt(n) = {limit}, got {epsilon}")]
    LocalDpRange { epsilon: f64, limit: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("the size bound is vacuous: l = {0} is not positive")]
    NonPositiveLength(f64),
}

/// An (ε, δ) differential-privacy budget; ε in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self, PrivacyError> {
        if !(epsilon >= 0.0) || !(0.0..1.0).contains(&delta) {
            return Err(PrivacyError::InvalidBudget { epsilon, delta });
        }
        Ok(Self { epsilon, delta })
    }

    /// A pure budget (δ = 0).
    pub fn pure(epsilon: f64) -> Result<Self, PrivacyError> {
        Self::new(epsilon, 0.0)
    }
}

/// A Rényi-DP budget of the given order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiBudget {
    pub order: f64,
    pub epsilon: f64,
}

impl RenyiBudget {
    pub fn new(order: f64, epsilon: f64) -> Result<Self, PrivacyError> {
        if !(order > 1.0) {
            return Err(PrivacyError::InvalidOrder(order));
        }
        if !(epsilon >= 0.0) {
            return Err(PrivacyError::InvalidBudget {
                epsilon,
                delta: 0.0,
            });
        }
        Ok(Self { order, epsilon })
    }
}

/// Free parameters of the tightened approximate-DP transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightDpKnobs {
    pub eps_tilde: f64,
    pub delta_tilde: f64,
}

impl TightDpKnobs {
    pub fn new(eps_tilde: f64, delta_tilde: f64) -> Result<Self, PrivacyError> {
        if !(eps_tilde > 0.0 && eps_tilde <= 1.0) {
            return Err(PrivacyError::KnobOutOfRange {
                name: "eps_tilde",
                range: "(0, 1]",
                value: eps_tilde,
            });
        }
        if !(delta_tilde > 0.0 && delta_tilde <= 1.0 / 3.0) {
            return Err(PrivacyError::KnobOutOfRange {
                name: "delta_tilde",
                range: "(0, 1/3]",
                value: delta_tilde,
            });
        }
        Ok(Self {
            eps_tilde,
            delta_tilde,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<(), PrivacyError> {
    if !(alpha > 1.0) {
        return Err(PrivacyError::InvalidOrder(alpha));
    }
    Ok(())
}

/// Encoding an ε-DP mechanism with order `alpha` yields a `2αε`-DP
/// mechanism (pure budgets only).
pub fn ppr_pure_dp(budget: &PrivacyBudget, alpha: f64) -> Result<PrivacyBudget, PrivacyError> {
    check_alpha(alpha)?;
    if budget.delta != 0.0 {
        return Err(PrivacyError::NonZeroDelta(budget.delta));
    }
    PrivacyBudget::pure(2.0 * alpha * budget.epsilon)
}

/// Encoding an (ε, δ)-DP mechanism yields `(2αε, 2δ)`; refused when the
/// doubled δ reaches 1.
pub fn ppr_approx_dp(budget: &PrivacyBudget, alpha: f64) -> Result<PrivacyBudget, PrivacyError> {
    check_alpha(alpha)?;
    let delta = 2.0 * budget.delta;
    if delta >= 1.0 {
        return Err(PrivacyError::VacuousDelta(delta));
    }
    PrivacyBudget::new(2.0 * alpha * budget.epsilon, delta)
}

/// Encoding an `ε·d_X`-metric-private mechanism yields coefficient `2αε`.
pub fn ppr_metric_dp(epsilon_metric: f64, alpha: f64) -> Result<f64, PrivacyError> {
    check_alpha(alpha)?;
    if !(epsilon_metric >= 0.0) {
        return Err(PrivacyError::InvalidBudget {
            epsilon: epsilon_metric,
            delta: 0.0,
        });
    }
    Ok(2.0 * alpha * epsilon_metric)
}

/// The tightened transform: any order up to
/// `alpha_max = e^{−4.2}·δ̃·ε̃²/(−ln δ̃) + 1` gives an
/// `(α·ε + ε̃, 2(δ + δ̃))` budget. Returns `alpha_max` and the budget
/// evaluated there.
pub fn ppr_tight_dp(
    budget: &PrivacyBudget,
    knobs: &TightDpKnobs,
) -> Result<(f64, PrivacyBudget), PrivacyError> {
    let alpha_max = (-4.2f64).exp() * knobs.delta_tilde * knobs.eps_tilde * knobs.eps_tilde
        / (-knobs.delta_tilde.ln())
        + 1.0;
    let delta = 2.0 * (budget.delta + knobs.delta_tilde);
    if delta >= 1.0 {
        return Err(PrivacyError::VacuousDelta(delta));
    }
    let result = PrivacyBudget::new(alpha_max * budget.epsilon + knobs.eps_tilde, delta)?;
    Ok((alpha_max, result))
}

/// Classical Gaussian calibration `σ = C·√(2·ln(1.25/δ))/ε`, valid for
/// `0 < ε < 1`.
pub fn gaussian_sigma_for_dp(clip_norm: f64, budget: &PrivacyBudget) -> Result<f64, PrivacyError> {
    if !(clip_norm > 0.0) {
        return Err(PrivacyError::NonPositive {
            name: "clip_norm",
            value: clip_norm,
        });
    }
    if !(budget.epsilon > 0.0 && budget.epsilon < 1.0) {
        return Err(PrivacyError::EpsilonNotCalibratable(budget.epsilon));
    }
    if !(budget.delta > 0.0) {
        return Err(PrivacyError::InvalidBudget {
            epsilon: budget.epsilon,
            delta: budget.delta,
        });
    }
    Ok(clip_norm * (2.0 * (1.25 / budget.delta).ln()).sqrt() / budget.epsilon)
}

/// The local guarantee of the encoded Gaussian mechanism:
/// `(2α√n·ε, 2δ)`, valid only while `ε < 1/√n`.
pub fn local_dp_of_gaussian_ppr(
    budget: &PrivacyBudget,
    n_clients: u64,
    alpha: f64,
) -> Result<PrivacyBudget, PrivacyError> {
    check_alpha(alpha)?;
    let sqrt_n = (n_clients as f64).sqrt();
    let limit = 1.0 / sqrt_n;
    if budget.epsilon >= limit {
        return Err(PrivacyError::LocalDpRange {
            epsilon: budget.epsilon,
            limit,
        });
    }
    let delta = 2.0 * budget.delta;
    if delta >= 1.0 {
        return Err(PrivacyError::VacuousDelta(delta));
    }
    PrivacyBudget::new(2.0 * alpha * sqrt_n * budget.epsilon, delta)
}

/// Converts a Rényi budget of order γ to approximate DP at the given δ:
/// `ε + ln(1/(γδ))/(γ−1) + ln(1 − 1/γ)` (nats).
pub fn renyi_to_dp(renyi: &RenyiBudget, delta: f64) -> Result<f64, PrivacyError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(PrivacyError::InvalidBudget {
            epsilon: renyi.epsilon,
            delta,
        });
    }
    let g = renyi.order;
    Ok(renyi.epsilon + (1.0 / (g * delta)).ln() / (g - 1.0) + (-1.0 / g).ln_1p())
}

/// The noise-scale condition for a (γ, ε)-Rényi guarantee of the encoded
/// Gaussian mechanism: `σ_min = √(Cγ/(2ε))`. The radicand is linear in the
/// clip norm `C`; the formula is implemented exactly as specified.
pub fn renyi_sigma_condition(clip_norm: f64, gamma: f64, epsilon: f64) -> Result<f64, PrivacyError> {
    for (name, value) in [
        ("clip_norm", clip_norm),
        ("gamma", gamma),
        ("epsilon", epsilon),
    ] {
        if !(value > 0.0) {
            return Err(PrivacyError::NonPositive { name, value });
        }
    }
    Ok((clip_norm * gamma / (2.0 * epsilon)).sqrt())
}

/// The order-dependent excess `η_α = log₂(3.56)/min{(α−1)/2, 1}` in bits.
pub fn eta_alpha(alpha: f64) -> Result<f64, PrivacyError> {
    check_alpha(alpha)?;
    Ok(3.56f64.log2() / (0.5 * (alpha - 1.0)).min(1.0))
}

fn prefix_bits(l: f64) -> Result<f64, PrivacyError> {
    if !(l > 0.0) {
        return Err(PrivacyError::NonPositiveLength(l));
    }
    Ok(l + (l + 1.0).log2() + 2.0)
}

/// Expected compression size in bits for an ε-LDP mechanism encoded
/// against one of its own conditionals: `ℓ = ε + η_α`, size
/// `ℓ + log₂(ℓ+1) + 2`. Here `epsilon_bits` enters a bit-count directly,
/// so it must be supplied in log₂ units.
pub fn comm_bound_ldp(epsilon_bits: f64, alpha: f64) -> Result<f64, PrivacyError> {
    if !(epsilon_bits >= 0.0) {
        return Err(PrivacyError::InvalidBudget {
            epsilon: epsilon_bits,
            delta: 0.0,
        });
    }
    prefix_bits(epsilon_bits + eta_alpha(alpha)?)
}

/// Per-client size bound for the encoded Gaussian mechanism:
/// `ℓ = (d/2)·log₂(C²n/(dσ²) + 1) + η_α`, size `ℓ + log₂(ℓ+1) + 2` bits.
pub fn comm_bound_gaussian(
    clip_norm: f64,
    n_clients: u64,
    dimension: usize,
    sigma: f64,
    alpha: f64,
) -> Result<f64, PrivacyError> {
    for (name, value) in [("clip_norm", clip_norm), ("sigma", sigma)] {
        if !(value > 0.0) {
            return Err(PrivacyError::NonPositive { name, value });
        }
    }
    let d = dimension as f64;
    let l = 0.5
        * d
        * (clip_norm * clip_norm * n_clients as f64 / (d * sigma * sigma) + 1.0).log2()
        + eta_alpha(alpha)?;
    prefix_bits(l)
}

/// Size bound for the encoded Laplace mechanism:
/// `ℓ = (d/2)·log₂((2/e)(C²ε²/d + d + 1)) − log₂(Γ(d+1)/Γ(d/2+1)) + η_α`,
/// size `ℓ + log₂(ℓ+1) + 2` bits.
pub fn comm_bound_laplace(
    clip_norm: f64,
    dimension: usize,
    epsilon: f64,
    alpha: f64,
) -> Result<f64, PrivacyError> {
    for (name, value) in [("clip_norm", clip_norm), ("epsilon", epsilon)] {
        if !(value > 0.0) {
            return Err(PrivacyError::NonPositive { name, value });
        }
    }
    let d = dimension as f64;
    let gamma_term = (log_gamma(d + 1.0).expect("d ≥ 1")
        - log_gamma(0.5 * d + 1.0).expect("d ≥ 1"))
        / std::f64::consts::LN_2;
    let l = 0.5
        * d
        * (2.0 / std::f64::consts::E
            * (clip_norm * clip_norm * epsilon * epsilon / d + d + 1.0))
            .log2()
        - gamma_term
        + eta_alpha(alpha)?;
    prefix_bits(l)
}
