//! Special functions and log-domain utilities for the encoder and bounds.
//!
//! Everything here is pure and thread-safe. Density ratios routinely exceed
//! e^±200 for moderate dimensions, so the encoder never materializes a
//! linear-domain weight; [`LogReal`] is the carrier for such quantities.

/// Errors from domain violations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecialError {
    #[error("lower_incomplete_gamma requires beta in (0, 1] and x > 0, got beta={beta}, x={x}")]
    IncompleteGammaDomain { beta: f64, x: f64 },
    #[error("log_gamma requires x > 0, got {0}")]
    LogGammaDomain(f64),
    #[error("incomplete beta requires a, b > 0 and x in [0, 1], got a={a}, b={b}, x={x}")]
    IncompleteBetaDomain { a: f64, b: f64, x: f64 },
    #[error("log_sum_exp requires a nonempty list")]
    EmptyLogSumExp,
}

/// A nonnegative extended real stored as its natural logarithm.
///
/// `ln()` is `-inf` exactly when the value is zero, which stands in for the
/// "sign = 0" case; negative values have no representation here because
/// nothing in the encoder needs them.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogReal {
    log_value: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        log_value: f64::NEG_INFINITY,
    };
    pub const INFINITY: LogReal = LogReal {
        log_value: f64::INFINITY,
    };

    /// Wraps a value already in log domain.
    pub fn from_ln(log_value: f64) -> Self {
        debug_assert!(!log_value.is_nan());
        LogReal { log_value }
    }

    pub fn from_linear(value: f64) -> Self {
        debug_assert!(value >= 0.0);
        LogReal {
            log_value: value.ln(),
        }
    }

    pub fn ln(self) -> f64 {
        self.log_value
    }

    pub fn is_zero(self) -> bool {
        self.log_value == f64::NEG_INFINITY
    }

    /// Raises to a positive power.
    pub fn powf(self, exponent: f64) -> LogReal {
        debug_assert!(exponent > 0.0);
        LogReal {
            log_value: self.log_value * exponent,
        }
    }
}

impl std::ops::Mul for LogReal {
    type Output = LogReal;

    /// Product in linear domain = sum in log domain.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, other: LogReal) -> LogReal {
        LogReal {
            log_value: self.log_value + other.log_value,
        }
    }
}

/// Lower incomplete gamma γ(β, x) = ∫₀ˣ e^(−τ) τ^(β−1) dτ for β ∈ (0, 1],
/// x > 0, to at least ten significant digits.
///
/// Series for x ≤ β + 1, continued fraction (for the upper tail, subtracted
/// from Γ(β)) otherwise.
pub fn lower_incomplete_gamma(beta: f64, x: f64) -> Result<f64, SpecialError> {
    if !(beta > 0.0 && beta <= 1.0) || !(x > 0.0) || x.is_nan() {
        return Err(SpecialError::IncompleteGammaDomain { beta, x });
    }
    if x <= beta + 1.0 {
        // γ(β,x) = x^β e^(−x) Σ_k x^k / (β(β+1)···(β+k))
        let mut term = 1.0 / beta;
        let mut sum = term;
        let mut denom = beta;
        for _ in 0..500 {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        Ok(sum * (beta * x.ln() - x).exp())
    } else {
        // Upper tail Γ(β,x) by modified Lentz continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0 - beta;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - beta);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let upper = (beta * x.ln() - x).exp() * h;
        let whole = log_gamma(beta)
            .expect("beta > 0 validated above")
            .exp();
        Ok(whole - upper)
    }
}

/// ln Γ(x) for x > 0, to at least twelve significant digits (Lanczos with
/// g = 7, reflection below 1/2).
pub fn log_gamma(x: f64) -> Result<f64, SpecialError> {
    if !(x > 0.0) || x.is_nan() {
        return Err(SpecialError::LogGammaDomain(x));
    }
    Ok(log_gamma_unchecked(x))
}

fn log_gamma_unchecked(x: f64) -> f64 {
    const COEF: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx); x ∈ (0, 0.5) so sin(πx) > 0.
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - log_gamma_unchecked(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, c) in COEF.iter().enumerate() {
        acc += c / (z + i as f64 + 1.0);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x ∈ [0, 1], by
/// the modified-Lentz continued fraction, using the symmetry
/// I_x(a, b) = 1 − I_{1−x}(b, a) on the slow side of the mean.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64, SpecialError> {
    if !(a > 0.0) || !(b > 0.0) || !(0.0..=1.0).contains(&x) {
        return Err(SpecialError::IncompleteBetaDomain { a, b, x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = log_gamma_unchecked(a + b) - log_gamma_unchecked(a) - log_gamma_unchecked(b)
        + a * x.ln()
        + b * (-x).ln_1p();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(ln_front.exp() * beta_cf(a, b, x) / a)
    } else {
        Ok(1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b)
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const FPMIN: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 3e-16 {
            break;
        }
    }
    h
}

/// ln Σ exp(vᵢ), stable under large shifts. All-(−∞) input yields −∞; any
/// +∞ entry yields +∞.
pub fn log_sum_exp(values: &[f64]) -> Result<f64, SpecialError> {
    if values.is_empty() {
        return Err(SpecialError::EmptyLogSumExp);
    }
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return Ok(m);
    }
    let sum: f64 = values
        .iter()
        .filter(|v| **v > f64::NEG_INFINITY)
        .map(|v| (v - m).exp())
        .sum();
    Ok(m + sum.ln())
}

/// Adaptive Simpson quadrature of a smooth integrand on [a, b].
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (ml, fml, left) = simpson(f, a, fa, m, fm);
        let (mr, fmr, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, ml, fml, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, mr, fmr, right, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 48)
}
