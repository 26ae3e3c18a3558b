//! A-priori size bounds for the transmitted index.
//!
//! The index `K` produced by the encoder satisfies
//! `E[ln K] ≤ D(P‖Q) + excess(α)` where the excess depends only on the
//! order `α`. Two closed forms are available: a simple one,
//! `ln(3.56) / min{(α−1)/2, 1}`, and a tighter one obtained by optimizing a
//! free parameter `η` over `(0, min(1, α−1))`. [`log_k_bound`] returns the
//! smaller of the two. Budgets here are in nats; only
//! [`prefix_size_bound`] speaks bits, because it describes a concrete
//! prefix code.

use crate::special::log_gamma;

/// Errors from domain violations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundsError {
    #[error("index bounds require alpha > 1, got {0}")]
    InvalidAlpha(f64),
    #[error("kl divergence must be a nonnegative real, got {0}")]
    InvalidKl(f64),
}

/// Prefix-free codes with known length bounds for the index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixCode {
    EliasDelta,
    Huffman,
}

fn check_domain(alpha: f64, kl: f64) -> Result<(), BoundsError> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(BoundsError::InvalidAlpha(alpha));
    }
    if !(kl >= 0.0) {
        return Err(BoundsError::InvalidKl(kl));
    }
    Ok(())
}

/// Upper bound on `E[ln K]` in nats: the smaller of the simple and the
/// η-optimized forms.
pub fn log_k_bound(alpha: f64, kl: f64) -> Result<f64, BoundsError> {
    Ok(log_k_bound_simple(alpha, kl)?.min(log_k_bound_refined(alpha, kl)?))
}

/// The closed-form bound `kl + ln(3.56) / min{(α−1)/2, 1}`, in nats.
pub fn log_k_bound_simple(alpha: f64, kl: f64) -> Result<f64, BoundsError> {
    check_domain(alpha, kl)?;
    let denom = (0.5 * (alpha - 1.0)).min(1.0);
    Ok(kl + 3.56f64.ln() / denom)
}

/// The η-optimized bound
/// `kl + inf_η (1/η)·ln(Γ(1−(η+1)/α)·Γ(η+1)/Γ(1−1/α)^{η+1} + 1)`, in nats.
///
/// The infimum is over `η ∈ (0, min(1, α−1))` and is located by
/// golden-section search to an interval of width `1e-8`; the objective
/// diverges at both endpoints (like `1/η` on the left, through the gamma
/// pole on the right when `α ≤ 2`), so the minimizer is interior or, for
/// larger `α`, presses against `η = 1`.
pub fn log_k_bound_refined(alpha: f64, kl: f64) -> Result<f64, BoundsError> {
    check_domain(alpha, kl)?;
    let ln_gamma_base = log_gamma(1.0 - 1.0 / alpha).expect("alpha > 1");
    let excess = |eta: f64| -> f64 {
        let ln_c = log_gamma(1.0 - (eta + 1.0) / alpha).expect("eta < alpha - 1")
            + log_gamma(eta + 1.0).expect("eta > -1")
            - (eta + 1.0) * ln_gamma_base;
        // ln(c + 1) without overflow on either side.
        let ln_c_plus_1 = if ln_c > 0.0 {
            ln_c + (-ln_c).exp().ln_1p()
        } else {
            ln_c.exp().ln_1p()
        };
        ln_c_plus_1 / eta
    };

    let margin = 1e-12;
    let mut a = margin;
    let mut b = (alpha - 1.0).min(1.0) - margin;
    if b <= a {
        // alpha so close to 1 that the whole interval is below the margin.
        return Ok(kl + excess(0.5 * ((alpha - 1.0).min(1.0))));
    }
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = excess(c);
    let mut fd = excess(d);
    while b - a > 1e-8 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = excess(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = excess(d);
        }
    }
    Ok(kl + excess(0.5 * (a + b)))
}

/// Bits needed to send an index whose mean size is `mean_log2_k` bits,
/// under the given prefix code: Elias delta costs
/// `m + 2·log₂(m+1) + 1`, a Huffman code over the geometric-like index
/// law costs `m + log₂(m+1) + 2`.
pub fn prefix_size_bound(mean_log2_k: f64, code: PrefixCode) -> f64 {
    assert!(
        mean_log2_k >= 0.0,
        "mean_log2_k must be nonnegative, got {mean_log2_k}"
    );
    let m = mean_log2_k;
    match code {
        PrefixCode::EliasDelta => m + 2.0 * (m + 1.0).log2() + 1.0,
        PrefixCode::Huffman => m + (m + 1.0).log2() + 2.0,
    }
}
