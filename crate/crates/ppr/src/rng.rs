//! Seedable sample streams with O(1) jump-ahead.
//!
//! A [`SampleStream`] is a deterministic sequence of scalar draws addressed by
//! a 64-bit counter. Both endpoints of a compression channel construct the
//! stream from the same [`SharedSeed`]; the decoder does not replay the
//! encoder's scan but jumps directly to the draws that produced the selected
//! candidate. Every sampler documents how many draws it consumes so that
//! callers can do that index arithmetic.
//!
//! The backing generator is ChaCha12. One draw is one 64-bit output (two
//! 32-bit words), which makes `jump_to` a constant-time word-position seek.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Errors from seed parsing and stream positioning.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RngError {
    /// The hex form of a seed must be exactly 64 hex characters.
    #[error("seed must be 64 hex characters, got {0}")]
    BadSeedHex(String),
    /// Streams never rewind: jump targets must be at or past the counter.
    #[error("cannot jump back from draw {counter} to draw {target}")]
    Rewind { counter: u64, target: u64 },
}

/// 256-bit seed shared between encoder and decoder.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SharedSeed([u8; 32]);

impl SharedSeed {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        SharedSeed(bytes)
    }

    /// Parses the 64-hex-character wire form.
    pub fn from_hex(s: &str) -> Result<Self, RngError> {
        let raw = hex::decode(s).map_err(|_| RngError::BadSeedHex(s.to_string()))?;
        let bytes: [u8; 32] = raw
            .try_into()
            .map_err(|_| RngError::BadSeedHex(s.to_string()))?;
        Ok(SharedSeed(bytes))
    }

    /// Expands a 64-bit integer into a full seed.
    ///
    /// The expansion runs four rounds of SplitMix64 over `x` and concatenates
    /// the little-endian outputs, so small integers still yield well-spread
    /// seed bytes. The map is fixed; it is part of the wire format.
    pub fn from_u64(x: u64) -> Self {
        let mut state = x;
        let mut bytes = [0u8; 32];
        for chunk in bytes.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        SharedSeed(bytes)
    }

    /// Derives an independent child seed for substream `index`.
    ///
    /// Defined as SHA-256 over the seed bytes followed by the little-endian
    /// index, so chunked or parallel callers can key streams by position
    /// without coordinating.
    pub fn derive(&self, index: u64) -> SharedSeed {
        let mut h = Sha256::new();
        h.update(self.0);
        h.update(index.to_le_bytes());
        SharedSeed(h.finalize().into())
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// A positioned stream of scalar draws.
///
/// ```
/// use ppr::rng::{SampleStream, SharedSeed};
///
/// let seed = SharedSeed::from_u64(7);
/// let mut a = SampleStream::new(&seed);
/// let mut b = SampleStream::new(&seed);
/// for _ in 0..100 {
///     assert_eq!(a.unif01().to_bits(), b.unif01().to_bits());
/// }
/// ```
#[derive(Clone, Debug)]
pub struct SampleStream {
    rng: ChaCha12Rng,
    counter: u64,
}

impl SampleStream {
    pub fn new(seed: &SharedSeed) -> Self {
        SampleStream {
            rng: ChaCha12Rng::from_seed(seed.0),
            counter: 0,
        }
    }

    /// Number of draws consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Repositions the stream so the next draw is draw number `target`
    /// (0-based) of a fresh stream with the same seed.
    ///
    /// Jumping is O(1). Jumping to the current position is a no-op, and
    /// `jump_to(a)` followed by `jump_to(b)` equals `jump_to(b)` whenever
    /// `b >= a`; going backwards is an error.
    ///
    /// ```
    /// use ppr::rng::{SampleStream, SharedSeed};
    ///
    /// let seed = SharedSeed::from_u64(1);
    /// let mut seq = SampleStream::new(&seed);
    /// for _ in 0..1000 {
    ///     seq.unif01();
    /// }
    /// let expected = seq.unif01();
    ///
    /// let mut jumped = SampleStream::new(&seed);
    /// jumped.jump_to(1000).unwrap();
    /// assert_eq!(jumped.unif01().to_bits(), expected.to_bits());
    /// assert!(jumped.jump_to(3).is_err());
    /// ```
    pub fn jump_to(&mut self, target: u64) -> Result<(), RngError> {
        if target < self.counter {
            return Err(RngError::Rewind {
                counter: self.counter,
                target,
            });
        }
        // One draw = one u64 = two 32-bit ChaCha words.
        self.rng.set_word_pos(2 * u128::from(target));
        self.counter = target;
        Ok(())
    }

    fn next_raw(&mut self) -> u64 {
        self.counter += 1;
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53-bit resolution. One draw.
    pub fn unif01(&mut self) -> f64 {
        let x = self.next_raw() >> 11;
        x as f64 * (1.0 / 9007199254740992.0)
    }

    /// Uniform on the open interval `(0, 1)`. One draw.
    ///
    /// Shifts the 53-bit lattice by half a step so that 0 is unreachable;
    /// inverse-CDF samplers need both endpoints excluded.
    pub fn unif_open01(&mut self) -> f64 {
        let x = self.next_raw() >> 11;
        (x as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// Standard exponential via inversion. One draw.
    pub fn exp1(&mut self) -> f64 {
        let u = self.unif01();
        exp1_from_unif(u)
    }

    /// Standard normal via the inverse CDF. One draw.
    pub fn std_normal(&mut self) -> f64 {
        norm_icdf(self.unif_open01())
    }

    /// Fills `out` with independent standard normals. `out.len()` draws.
    pub fn fill_std_normal(&mut self, out: &mut [f64]) {
        for slot in out.iter_mut() {
            *slot = norm_icdf(self.unif_open01());
        }
    }

    /// Sample from `N(mean, variance * I_d)`. Exactly `d` draws, regardless
    /// of dimension or parameters, so block offsets are `d * index`.
    pub fn isotropic_gaussian(&mut self, mean: &[f64], variance: f64) -> Vec<f64> {
        let sd = variance.sqrt();
        let mut out = vec![0.0; mean.len()];
        self.fill_std_normal(&mut out);
        for (slot, m) in out.iter_mut().zip(mean) {
            *slot = m + sd * *slot;
        }
        out
    }

    /// Uniform point on the sphere of the given radius in `R^d`.
    ///
    /// Consumes `d` draws except in the astronomically unlikely event that
    /// the underlying Gaussian vector has norm below 1e-150, in which case it
    /// redraws. Callers doing block arithmetic may treat the cost as `d`.
    pub fn sphere(&mut self, d: usize, radius: f64) -> Vec<f64> {
        let mut out = vec![0.0; d];
        loop {
            self.fill_std_normal(&mut out);
            let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-150 {
                for slot in out.iter_mut() {
                    *slot *= radius / norm;
                }
                return out;
            }
        }
    }

    /// Gamma(shape, 1) conditioned on `(0, 1]`, for `shape` in `(0, 1]`.
    ///
    /// Rejection-samples the unconditioned Gamma (Ahrens–Dieter GS) and
    /// retries until the value lands in the unit interval. Draw consumption
    /// is variable; this sampler is only appropriate on local streams where
    /// the counter is never replayed by a peer.
    pub fn truncated_gamma01(&mut self, shape: f64) -> f64 {
        self.ln_truncated_gamma01(shape).exp()
    }

    /// Log of a `truncated_gamma01` variate.
    ///
    /// For shapes near zero the variate itself underflows f64 (its log is on
    /// the order of -1/shape), so the encoder consumes it in log domain.
    pub(crate) fn ln_truncated_gamma01(&mut self, shape: f64) -> f64 {
        assert!(
            shape > 0.0 && shape <= 1.0,
            "truncated_gamma01 requires shape in (0, 1], got {shape}"
        );
        loop {
            let ln_x = self.ln_gamma_gs(shape);
            if ln_x <= 0.0 {
                return ln_x;
            }
        }
    }

    /// Poisson(mean). Exact: counts unit-exponential arrivals for small
    /// means, and uses the PTRS transformed-rejection sampler for
    /// `mean >= 10`. Draw consumption is variable (local streams only).
    pub fn poisson(&mut self, mean: f64) -> u64 {
        assert!(
            mean.is_finite() && mean >= 0.0,
            "poisson mean must be finite and nonnegative, got {mean}"
        );
        if mean < 10.0 {
            let mut n = 0u64;
            let mut acc = self.exp1();
            while acc <= mean {
                n += 1;
                acc += self.exp1();
            }
            return n;
        }
        let slam = mean.sqrt();
        let loglam = mean.ln();
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let invalpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.unif01() - 0.5;
            let v = self.unif01();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
            if us >= 0.07 && v <= vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + invalpha.ln() - (a / (us * us) + b).ln();
            let rhs =
                -mean + k * loglam - crate::special::log_gamma(k + 1.0).expect("k + 1 > 0");
            if lhs <= rhs {
                return k as u64;
            }
        }
    }

    /// Ahrens–Dieter GS sampler for Gamma(shape, 1), returning the log of
    /// the variate.
    fn ln_gamma_gs(&mut self, shape: f64) -> f64 {
        let b = 1.0 + shape * (-1.0f64).exp();
        loop {
            let p = b * self.unif01();
            let u = self.unif01();
            if p <= 1.0 {
                if p == 0.0 {
                    continue;
                }
                let ln_x = p.ln() / shape;
                // exp may underflow to 0 here; the acceptance test then
                // degenerates to u <= 1, which is the correct limit.
                if u <= (-ln_x.exp()).exp() {
                    return ln_x;
                }
            } else {
                let x = -((b - p) / shape).ln();
                if x > 0.0 && u <= x.powf(shape - 1.0) {
                    return x.ln();
                }
            }
        }
    }
}

/// `-ln(1 - u)`: maps `[0, 1)` uniforms to Exp(1). Zero maps to zero.
fn exp1_from_unif(u: f64) -> f64 {
    -(-u).ln_1p()
}

/// Inverse standard normal CDF (Wichura's PPND16), good to ~1e-15 over
/// `p` in (0, 1).
pub(crate) fn norm_icdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
            + 6.7265770927008700853e4)
            * r
            + 4.5921953931549871457e4)
            * r
            + 1.3731693765509461125e4)
            * r
            + 1.9715909503065514427e3)
            * r
            + 1.3314166789178437745e2)
            * r
            + 3.3871328727963666080e0)
            * q;
        let den = ((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
            + 3.9307895800092710610e4)
            * r
            + 2.1213794301586595867e4)
            * r
            + 5.3941960214247511077e3)
            * r
            + 6.8718700749205790830e2)
            * r
            + 4.2313330701600911252e1)
            * r
            + 1.0;
        return num / den;
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        let num = ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
            + 2.41780725177450611770e-1)
            * r
            + 1.27045825245236838258e0)
            * r
            + 3.64784832476320460504e0)
            * r
            + 5.76949722146069140550e0)
            * r
            + 4.63033784615654529590e0)
            * r
            + 1.42343711074968357734e0;
        let den = ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
            + 1.51986665636164571966e-2)
            * r
            + 1.48103976427480074590e-1)
            * r
            + 6.89767334985100004550e-1)
            * r
            + 1.67638483018380384940e0)
            * r
            + 2.05319162663775882187e0)
            * r
            + 1.0;
        num / den
    } else {
        let r = r - 5.0;
        let num = ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
            + 1.24266094738807843860e-3)
            * r
            + 2.65321895265761230930e-2)
            * r
            + 2.96560571828504891230e-1)
            * r
            + 1.78482653991729133580e0)
            * r
            + 5.46378491116411436990e0)
            * r
            + 6.65790464350110377720e0;
        let den = ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
            + 1.84631831751005468180e-5)
            * r
            + 7.86869131145613259100e-4)
            * r
            + 1.48753612908506148525e-2)
            * r
            + 1.36929880922735805310e-1)
            * r
            + 5.99832206555887937690e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}
