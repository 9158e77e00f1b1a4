//! Reduced-precision integer arithmetic, bit-for-bit as the decoder gateware
//! computes it: prior quantization, memory-strength quantization, the
//! reduced-logic shift-and-truncate multiplier, saturation, and the integer
//! realization of the min-sum scaling factor.
//!
//! Everything here is a pure value transformation. The contracts are exact:
//! any reimplementation (in hardware or another language) that matches these
//! functions input-for-input will reproduce decoder traces bitwise.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PrecisionError {
    #[error("bad precision descriptor `{0}`: expected intN.S.M, e.g. int4.2.8")]
    BadDescriptor(String),
    #[error("magnitude bits {0} outside [2, 15]")]
    BadMagnitudeBits(u32),
    #[error("memory scale {0} is not a power of two")]
    BadMemScale(u64),
    #[error("marginal width {0} outside [magnitude bits + 1, 31]")]
    BadMarginalBits(u32),
}

/// Fixed-point scheme `intN.S.M`: `N` magnitude bits for sign-magnitude
/// messages, prior scale `S` mapping LLRs into the integer domain, and a
/// power-of-two memory-strength scale `M = 2^m`.
///
/// `marginal_bits` is the two's-complement width of the marginal accumulator
/// (and of the bias register feeding it); it defaults to `N + 4` and is not
/// part of the textual form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionSpec {
    pub magnitude_bits: u32,
    pub prior_scale: f64,
    pub mem_scale_log2: u32,
    pub marginal_bits: u32,
}

impl PrecisionSpec {
    pub fn new(
        magnitude_bits: u32,
        prior_scale: f64,
        mem_scale_log2: u32,
    ) -> Result<Self, PrecisionError> {
        Self::with_marginal_bits(magnitude_bits, prior_scale, mem_scale_log2, magnitude_bits + 4)
    }

    pub fn with_marginal_bits(
        magnitude_bits: u32,
        prior_scale: f64,
        mem_scale_log2: u32,
        marginal_bits: u32,
    ) -> Result<Self, PrecisionError> {
        if !(2..=15).contains(&magnitude_bits) {
            return Err(PrecisionError::BadMagnitudeBits(magnitude_bits));
        }
        if !(magnitude_bits + 1..=31).contains(&marginal_bits) {
            return Err(PrecisionError::BadMarginalBits(marginal_bits));
        }
        Ok(Self {
            magnitude_bits,
            prior_scale,
            mem_scale_log2,
            marginal_bits,
        })
    }

    /// The default scheme studied throughout: `int4.2.8`.
    pub fn int4_2_8() -> Self {
        Self::new(4, 2.0, 3).unwrap()
    }

    /// Largest representable message magnitude, `2^N - 1`.
    pub fn max_magnitude(&self) -> u32 {
        (1 << self.magnitude_bits) - 1
    }

    /// Memory-strength scale `M = 2^m`.
    pub fn mem_scale(&self) -> u32 {
        1 << self.mem_scale_log2
    }

    /// Largest representable marginal, `2^(w-1) - 1`. Saturation is
    /// symmetric: the most-negative two's-complement code is unused, so
    /// negating a representable value is always representable.
    pub fn max_marginal(&self) -> i32 {
        (1i32 << (self.marginal_bits - 1)) - 1
    }
}

impl fmt::Display for PrecisionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "int{}.{}.{}",
            self.magnitude_bits,
            self.prior_scale,
            self.mem_scale()
        )
    }
}

impl FromStr for PrecisionSpec {
    type Err = PrecisionError;

    /// Parses the textual form `intN.S.M` with integer `S` and power-of-two
    /// `M`, e.g. `int4.2.8`.
    fn from_str(s: &str) -> Result<Self, PrecisionError> {
        let bad = || PrecisionError::BadDescriptor(s.to_string());
        let body = s.strip_prefix("int").ok_or_else(bad)?;
        let mut parts = body.split('.');
        let n: u32 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let scale: u64 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let mem: u64 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() || scale == 0 {
            return Err(bad());
        }
        if mem == 0 || !mem.is_power_of_two() {
            return Err(PrecisionError::BadMemScale(mem));
        }
        Self::new(n, scale as f64, mem.trailing_zeros())
    }
}

/// Arithmetic selector accepted wherever a precision is configurable:
/// binary64 reference or a fixed-point scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Precision {
    F64,
    Fixed(PrecisionSpec),
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::F64 => write!(f, "f64"),
            Precision::Fixed(spec) => write!(f, "{spec}"),
        }
    }
}

impl FromStr for Precision {
    type Err = PrecisionError;

    fn from_str(s: &str) -> Result<Self, PrecisionError> {
        if s == "f64" {
            Ok(Precision::F64)
        } else {
            s.parse::<PrecisionSpec>().map(Precision::Fixed)
        }
    }
}

/// A message value split into an explicit sign and an `N`-bit magnitude.
/// Zero is normalized to positive sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignMag {
    /// +1 or -1.
    pub sign: i8,
    pub mag: u32,
}

impl SignMag {
    pub const ZERO: SignMag = SignMag { sign: 1, mag: 0 };

    /// Encodes a two's-complement value, saturating the magnitude to `N`
    /// bits.
    pub fn from_value(v: i64, spec: &PrecisionSpec) -> Self {
        let mag = v.unsigned_abs().min(spec.max_magnitude() as u64) as u32;
        SignMag {
            sign: if v < 0 { -1 } else { 1 },
            mag,
        }
    }

    pub fn value(&self) -> i64 {
        self.sign as i64 * self.mag as i64
    }
}

/// Quantized memory strength: `beta_int = round((1 - gamma) * M)`, in
/// `[0, 2M]` for `gamma` in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BetaInt(pub u32);

/// Quantizes a positive LLR weight: `round(S * w)` saturated to `2^N - 1`.
/// Priors are unsigned in the gateware.
pub fn quantize_prior(weight: f64, spec: &PrecisionSpec) -> u32 {
    assert!(weight > 0.0, "prior weight must be positive");
    let scaled = (spec.prior_scale * weight).round();
    if scaled >= spec.max_magnitude() as f64 {
        spec.max_magnitude()
    } else {
        scaled as u32
    }
}

/// Quantizes a memory strength `gamma` in `[-1, 1]`.
pub fn beta_to_int(gamma: f64, spec: &PrecisionSpec) -> BetaInt {
    assert!(
        (-1.0..=1.0).contains(&gamma),
        "memory strength {gamma} outside [-1, 1]"
    );
    BetaInt(((1.0 - gamma) * spec.mem_scale() as f64).round() as u32)
}

/// Reduced-logic multiply-and-shift: expands each set bit `k` of `a` into the
/// partial product `b * 2^k`, truncates each partial to an integer after the
/// right-shift by `m`, then sums.
///
/// This truncate-per-partial behavior is what the gateware implements; it
/// never exceeds `floor(a * b / 2^m)` and falls short by fewer than
/// `popcount(a)`.
pub fn approx_mul_shift(a: u64, b: u64, m: u32) -> u64 {
    let mut acc = 0u64;
    let mut bits = a;
    while bits != 0 {
        let k = bits.trailing_zeros();
        acc += (b << k) >> m;
        bits &= bits - 1;
    }
    acc
}

/// Multiplies a signed value by the quantized memory strength
/// `gamma_int = M - beta_int` (which may be negative): the result sign is
/// `sign(x) * sign(M - beta_int)` and the magnitude is
/// `approx_mul_shift(|x|, |M - beta_int|, m)`. The sign is handled as an
/// explicit factor; there is no signed multiplier.
pub fn scaled_gamma_mul(x: i64, beta_int: BetaInt, spec: &PrecisionSpec) -> i64 {
    let gamma_int = spec.mem_scale() as i64 - beta_int.0 as i64;
    let mag = approx_mul_shift(x.unsigned_abs(), gamma_int.unsigned_abs(), spec.mem_scale_log2);
    let sign = (if x < 0 { -1i64 } else { 1 }) * (if gamma_int < 0 { -1 } else { 1 });
    sign * mag as i64
}

/// Multiplies a signed value by the complementary factor `beta_int / M`
/// (always nonnegative); this is the prior-side term of the bias update.
pub fn scaled_beta_mul(x: i64, beta_int: BetaInt, spec: &PrecisionSpec) -> i64 {
    let mag = approx_mul_shift(x.unsigned_abs(), beta_int.0 as u64, spec.mem_scale_log2);
    if x < 0 {
        -(mag as i64)
    } else {
        mag as i64
    }
}

/// Clamps a wide value to the symmetric marginal range
/// `[-(2^(w-1) - 1), 2^(w-1) - 1]`.
pub fn saturate_marginal(v: i64, spec: &PrecisionSpec) -> i32 {
    let max = spec.max_marginal() as i64;
    v.clamp(-max, max) as i32
}

/// Saturating two's-complement add at the marginal width. Not associative:
/// callers fix the evaluation order.
pub fn saturating_add(a: i32, b: i32, spec: &PrecisionSpec) -> i32 {
    saturate_marginal(a as i64 + b as i64, spec)
}

/// Integer realization of the min-sum scaling factor `1 - 2^-t`: subtracts
/// the `t`-bit right shift. The shift distance is capped at the magnitude
/// width, where the subtrahend of any representable value is already zero.
pub fn alpha_scale_int(v: u32, t: u32, spec: &PrecisionSpec) -> u32 {
    let s = t.min(spec.magnitude_bits);
    v - (v >> s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn descriptor_round_trip() {
        let spec: PrecisionSpec = "int4.2.8".parse().unwrap();
        assert_eq!(spec.magnitude_bits, 4);
        assert_eq!(spec.prior_scale, 2.0);
        assert_eq!(spec.mem_scale(), 8);
        assert_eq!(spec.marginal_bits, 8);
        assert_eq!(spec.to_string(), "int4.2.8");
        let again: PrecisionSpec = spec.to_string().parse().unwrap();
        assert_eq!(again, spec);

        assert!("int4.2".parse::<PrecisionSpec>().is_err());
        assert!("fp4.2.8".parse::<PrecisionSpec>().is_err());
        assert!("int4.2.6".parse::<PrecisionSpec>().is_err()); // M not a power of 2
        assert!("int1.2.8".parse::<PrecisionSpec>().is_err()); // N too small
        assert!("int4.0.8".parse::<PrecisionSpec>().is_err()); // zero scale
    }

    #[test]
    fn prior_quantization() {
        let spec = PrecisionSpec::int4_2_8();
        assert_eq!(quantize_prior(1.3, &spec), 3); // round(2.6)
        assert_eq!(quantize_prior(2.1972245773362196, &spec), 4); // round(4.394)
        assert_eq!(quantize_prior(1000.0, &spec), 15); // saturation ceiling
    }

    #[test]
    fn prior_quantization_is_monotone() {
        let spec = PrecisionSpec::int4_2_8();
        let mut prev = 0;
        for i in 1..200 {
            let q = quantize_prior(i as f64 * 0.05, &spec);
            assert!(q >= prev);
            prev = q;
        }
    }

    #[test]
    fn beta_quantization() {
        let spec = PrecisionSpec::int4_2_8();
        assert_eq!(beta_to_int(-0.24, &spec), BetaInt(10));
        assert_eq!(beta_to_int(0.66, &spec), BetaInt(3));
        assert_eq!(beta_to_int(0.0, &spec), BetaInt(8));
        assert_eq!(beta_to_int(1.0, &spec), BetaInt(0));
    }

    #[test]
    fn table_example_15_times_7() {
        // Partials for a=15, b=7, m=3 are 7, 3, 1, 0: sum 11 against the
        // exact product 105 (pre-shift view: 88 = 11 * 8).
        assert_eq!(approx_mul_shift(15, 7, 3), 11);
        let partials: Vec<u64> = (0..4).rev().map(|k| (7u64 << k) >> 3).collect();
        assert_eq!(partials, vec![7, 3, 1, 0]);
        assert_eq!(approx_mul_shift(15, 7, 0), 105);
        // b = 2^m makes every partial exact.
        for a in 0..64u64 {
            assert_eq!(approx_mul_shift(a, 8, 3), a);
        }
    }

    #[test]
    fn approx_mul_error_bound_exhaustive() {
        for a in 0..64u64 {
            for b in 0..64u64 {
                for m in 0..=5u32 {
                    let approx = approx_mul_shift(a, b, m);
                    let exact = (a * b) >> m;
                    assert!(approx <= exact);
                    let diff = exact - approx;
                    assert!(diff <= a.count_ones() as u64);
                    if a != 0 {
                        // Each truncated partial loses strictly less than one
                        // unit, so the strict bound holds for nonzero a.
                        assert!(diff < a.count_ones() as u64);
                    }
                    if m == 0 {
                        assert_eq!(approx, exact);
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_mul_cases() {
        let spec = PrecisionSpec::int4_2_8();
        // gamma quantizes to 0: the term vanishes for any input.
        for x in [-15i64, -1, 0, 7, 15] {
            assert_eq!(scaled_gamma_mul(x, BetaInt(8), &spec), 0);
        }
        // gamma = 1 passes the value through.
        assert_eq!(scaled_gamma_mul(5, BetaInt(0), &spec), 5);
        // Negative input composed with the table row.
        assert_eq!(scaled_gamma_mul(-15, BetaInt(1), &spec), -11);
        // Negative gamma (beta_int > M) flips the sign.
        assert_eq!(scaled_gamma_mul(8, BetaInt(10), &spec), -2);
        assert_eq!(scaled_gamma_mul(-8, BetaInt(10), &spec), 2);
    }

    #[test]
    fn beta_mul_cases() {
        let spec = PrecisionSpec::int4_2_8();
        assert_eq!(scaled_beta_mul(15, BetaInt(8), &spec), 15);
        assert_eq!(scaled_beta_mul(15, BetaInt(0), &spec), 0);
        assert_eq!(scaled_beta_mul(15, BetaInt(7), &spec), 11);
        assert_eq!(scaled_beta_mul(-15, BetaInt(7), &spec), -11);
    }

    #[test]
    fn marginal_saturation() {
        let spec = PrecisionSpec::int4_2_8(); // w = 8: range [-127, 127]
        assert_eq!(saturate_marginal(100, &spec), 100);
        assert_eq!(saturate_marginal(128 + 7, &spec), 127);
        assert_eq!(saturate_marginal(-(128 + 7), &spec), -127);
        assert_eq!(saturate_marginal(-128, &spec), -127);
    }

    #[test]
    fn saturating_add_cases() {
        let n4 = PrecisionSpec::with_marginal_bits(4, 2.0, 3, 5).unwrap(); // range [-15, 15]
        assert_eq!(saturating_add(7, 8, &n4), 15);
        assert_eq!(saturating_add(7, 9, &n4), 15);
        assert_eq!(saturating_add(-3, 5, &n4), 2);
        assert_eq!(saturating_add(11, 0, &n4), 11);
    }

    #[test]
    fn alpha_scaling() {
        let spec = PrecisionSpec::int4_2_8();
        assert_eq!(alpha_scale_int(8, 1, &spec), 4);
        assert_eq!(alpha_scale_int(15, 4, &spec), 15); // shift beyond width
        assert_eq!(alpha_scale_int(15, 9, &spec), 15);
        assert_eq!(alpha_scale_int(15, 3, &spec), 14);
        assert_eq!(alpha_scale_int(0, 1, &spec), 0);
    }

    #[test]
    fn sign_mag_round_trip_and_zero_normalization() {
        let spec = PrecisionSpec::int4_2_8();
        assert_eq!(SignMag::from_value(0, &spec), SignMag::ZERO);
        assert_eq!(SignMag::from_value(-0, &spec).sign, 1);
        assert_eq!(SignMag::from_value(-7, &spec).value(), -7);
        assert_eq!(SignMag::from_value(99, &spec).value(), 15); // saturated
        assert_eq!(SignMag::from_value(-99, &spec).value(), -15);
    }

    proptest! {
        #[test]
        fn saturation_is_idempotent_and_odd(v in -100_000i64..100_000) {
            let spec = PrecisionSpec::int4_2_8();
            let once = saturate_marginal(v, &spec);
            prop_assert_eq!(saturate_marginal(once as i64, &spec), once);
            prop_assert_eq!(saturate_marginal(-v, &spec), -once);
        }

        #[test]
        fn approx_mul_never_exceeds_exact(a in 0u64..1024, b in 0u64..1024, m in 0u32..8) {
            let approx = approx_mul_shift(a, b, m);
            let exact = (a * b) >> m;
            prop_assert!(approx <= exact);
            prop_assert!(exact - approx <= a.count_ones() as u64);
        }
    }
}
