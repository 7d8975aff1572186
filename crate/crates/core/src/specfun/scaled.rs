use core::fmt;

use num_complex::Complex64;

use super::SpecFunError;

const LN_10: f64 = core::f64::consts::LN_10;

/// A real number stored as `mantissa · exp(log_scale)`.
///
/// Airy functions span hundreds of decades over the argument ranges used
/// here (`Bi(300) ≈ e^3462`), so every Airy evaluation comes back in this
/// form. The mantissa is renormalized to `|mantissa| ∈ [0.1, 10)` or is
/// exactly zero.
#[derive(Clone, Copy, PartialEq)]
pub struct ScaledAiry {
    mantissa: f64,
    log_scale: f64,
}

impl ScaledAiry {
    pub const ZERO: Self = Self { mantissa: 0.0, log_scale: 0.0 };

    /// Builds and renormalizes `mantissa · exp(log_scale)`.
    pub fn new(mantissa: f64, log_scale: f64) -> Self {
        if mantissa == 0.0 || !mantissa.is_finite() || !log_scale.is_finite() {
            return Self { mantissa: if mantissa.is_nan() { f64::NAN } else { 0.0 }, log_scale: 0.0 };
        }
        let decade = libm::floor(libm::log10(libm::fabs(mantissa)));
        // Keep the shift exact: powers of ten up to 1e22 are representable.
        let (m, shift) = if (-22.0..=22.0).contains(&decade) {
            if decade >= 0.0 {
                (mantissa / pow10(decade as i32), decade)
            } else {
                (mantissa * pow10(-decade as i32), decade)
            }
        } else {
            (mantissa * libm::exp(-decade * LN_10), decade)
        };
        // log10 can be off by one ulp right at a power of ten.
        let (m, shift) = if libm::fabs(m) >= 10.0 {
            (m / 10.0, shift + 1.0)
        } else if libm::fabs(m) < 0.1 {
            (m * 10.0, shift - 1.0)
        } else {
            (m, shift)
        };
        Self { mantissa: m, log_scale: log_scale + shift * LN_10 }
    }

    pub fn from_f64(value: f64) -> Self {
        Self::new(value, 0.0)
    }

    pub fn mantissa(&self) -> f64 {
        self.mantissa
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Reconstructed value; saturates to `±inf` or `0` outside the f64 range.
    pub fn value(&self) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa * libm::exp(self.log_scale)
    }

    /// Reconstructed value, or [`SpecFunError::Overflow`] when it does not
    /// fit in an f64.
    pub fn to_f64(&self, function: &'static str, x: f64) -> Result<f64, SpecFunError> {
        let v = self.value();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(SpecFunError::Overflow { function, x })
        }
    }

    /// `ln|value|`, `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            libm::log(libm::fabs(self.mantissa)) + self.log_scale
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0.0
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(self.mantissa * other.mantissa, self.log_scale + other.log_scale)
    }

    pub fn scale(self, factor: f64) -> Self {
        Self::new(self.mantissa * factor, self.log_scale)
    }
}

impl fmt::Debug for ScaledAiry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}·e^{}", self.mantissa, self.log_scale)
    }
}

fn pow10(n: i32) -> f64 {
    let mut p = 1.0;
    for _ in 0..n {
        p *= 10.0;
    }
    p
}

/// A complex number `(re + i·im) · exp(log_scale)`, used for `Ci = Bi + i·Ai`
/// where the two parts live on different scales.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    pub re: f64,
    pub im: f64,
    pub log_scale: f64,
}

impl ScaledComplex {
    /// Combines two scaled reals into one common scale (the larger one).
    pub fn from_parts(re: ScaledAiry, im: ScaledAiry) -> Self {
        let s = match (re.is_zero(), im.is_zero()) {
            (true, true) => 0.0,
            (true, false) => im.log_scale,
            (false, true) => re.log_scale,
            (false, false) => re.log_scale.max(im.log_scale),
        };
        let shift = |p: ScaledAiry| {
            if p.is_zero() {
                0.0
            } else {
                p.mantissa * libm::exp(p.log_scale - s)
            }
        };
        Self { re: shift(re), im: shift(im), log_scale: s }
    }

    pub fn value(&self) -> Complex64 {
        let e = libm::exp(self.log_scale);
        Complex64::new(self.re * e, self.im * e)
    }

    /// `scalar · self`, with the scale exponents added before exponentiating.
    pub fn mul_real(&self, scalar: ScaledAiry) -> Complex64 {
        if scalar.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let e = libm::exp(self.log_scale + scalar.log_scale());
        Complex64::new(self.re, self.im) * (scalar.mantissa() * e)
    }
}
