//! Outcoupled matter-wave amplitude at a detector below the condensate.
//!
//! Two formulations are provided. The intuitive one expands the outcoupled
//! wave in free-fall Airy states and keeps the resonant shell
//! `Ē(k̄⊥) = ν − k̄⊥²/ā²`:
//!
//! `f̄ = (2π/√2) A ∫₀^{k_max} dk k J₀(k r̄⊥) Ai(ȳ − Ē(k)) Q(k, Ē(k))`.
//!
//! The scattering one uses the outgoing-wave Green function of the linear
//! potential; for a detector below the source
//!
//! `F̄ = −iπ A ∫₀^{k_max} dk k J₀(k r̄⊥) Ci(ȳ − Ē(k)) Q(k, Ē(k))`.
//!
//! `A` is the condensate amplitude in `l0^{-3/2}` and `Q` the source
//! integral of [`source_integral`]. Amplitudes are in units
//! `l0^{-3/2}·(Mg·l0)^{-1}`, so `|f̄|²` is the resolution function `D` in
//! units of `l0^{-3}`.

mod green;
mod source;

pub use green::green_1d;
pub use source::{
    overlap_cyl, overlap_cyl_nested, source_integral, source_integral_nested,
};

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cell::Cell;
use core::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};

use num_complex::Complex64;

use crate::model::Condensate;
use crate::quadrature::{truncate_kperp, Bundle, Integrator, QuadError, QuadResult};
use crate::specfun::{ai_unscaled, airy_ai, ci_unscaled, j0, sph_j1_over_arg, SpecFunError};

/// `2π/√2`, prefactor of the intuitive amplitude.
pub const INTUITIVE_PREFACTOR: f64 = PI * SQRT_2;
/// `2π/2`, magnitude of the scattering prefactor.
pub const SCATTERING_PREFACTOR: f64 = PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OutcouplingError {
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error("{name} = {value} is out of range")]
    Input { name: &'static str, value: f64 },
    #[error(
        "detector at y = {y_bar} is not below the condensate (bottom at {bottom}); \
         the closed-form scattering amplitude needs y < bottom"
    )]
    UnsupportedRegion { y_bar: f64, bottom: f64 },
    #[error("detector ({r_perp}, {y_bar}) lies outside the region the transform was built for")]
    OutsideRegion { r_perp: f64, y_bar: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Intuitive,
    Scattering,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Intuitive => "intuitive",
            Method::Scattering => "scattering",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub value: Complex64,
    pub method: Method,
    /// Absolute error estimate of `value`.
    pub error: f64,
    pub converged: bool,
}

impl Amplitude {
    /// `|value|²`, the resolution function in frame units.
    pub fn density(&self) -> f64 {
        self.value.norm_sqr()
    }
}

/// Free-fall eigenstate `ψ_Ē(ȳ) = Ai(ȳ − Ē)` (the `1/(l0√(Mg))`
/// normalization is one in frame units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryBasisState {
    pub energy: f64,
}

impl AiryBasisState {
    pub fn new(energy: f64) -> Self {
        Self { energy }
    }

    pub fn eval(&self, y_bar: f64) -> Result<f64, SpecFunError> {
        Ok(airy_ai(y_bar - self.energy)?.value())
    }
}

/// Basis states resonant with drive frequency `ν`: vertical energy
/// `Ē(k̄⊥) = ν − k̄⊥²/ā²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantShell {
    pub nu: f64,
    pub a_bar: f64,
}

impl ResonantShell {
    pub fn new(nu: f64, cond: &Condensate) -> Self {
        Self { nu, a_bar: cond.a_bar() }
    }

    #[inline]
    pub fn energy(&self, k: f64) -> f64 {
        self.nu - k * k / (self.a_bar * self.a_bar)
    }
}

/// Box of detector positions `r̄⊥ ∈ [0, r_max]`, `ȳ ∈ [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorRegion {
    pub r_perp_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl DetectorRegion {
    pub fn point(r_perp: f64, y_bar: f64) -> Self {
        Self { r_perp_max: r_perp, y_min: y_bar, y_max: y_bar }
    }

    pub fn contains(&self, r_perp: f64, y_bar: f64) -> bool {
        (0.0..=self.r_perp_max).contains(&r_perp) && (self.y_min..=self.y_max).contains(&y_bar)
    }

    fn validate(&self) -> Result<(), OutcouplingError> {
        if !(self.r_perp_max >= 0.0 && self.r_perp_max.is_finite()) {
            return Err(OutcouplingError::Input { name: "r_perp", value: self.r_perp_max });
        }
        if !(self.y_min.is_finite() && self.y_max.is_finite() && self.y_min <= self.y_max) {
            return Err(OutcouplingError::Input { name: "y_bar", value: self.y_min });
        }
        Ok(())
    }
}

/// The `k̄⊥` integral at fixed `ν`, discretized once for a detector region.
///
/// The radial-momentum rule is refined adaptively on the amplitude at three
/// points of the region, with panels capped at a quarter of the local
/// oscillation wavelength for every detector in it, and the source integral
/// `Q` is cached at each node. Amplitudes anywhere in the region, for either
/// method, are then a single weighted sum.
#[derive(Debug, Clone)]
pub struct SourceTransform {
    cond: Condensate,
    nu: f64,
    region: DetectorRegion,
    nodes: Vec<f64>,
    energies: Vec<f64>,
    /// `wᵢ kᵢ Q(kᵢ, Ē(kᵢ))`
    weighted: Vec<f64>,
    /// Error bound on each `weighted` entry from the inner integrals.
    weighted_error: Vec<f64>,
    outer_error: f64,
    converged: bool,
}

impl SourceTransform {
    pub fn build(
        cond: &Condensate,
        nu: f64,
        region: &DetectorRegion,
        integ: &Integrator,
    ) -> Result<Self, OutcouplingError> {
        if !nu.is_finite() {
            return Err(OutcouplingError::Input { name: "nu", value: nu });
        }
        region.validate()?;
        let shell = ResonantShell::new(nu, cond);
        let k_max = truncate_kperp(cond, nu, integ.spec());
        let mut out = Self {
            cond: *cond,
            nu,
            region: *region,
            nodes: Vec::new(),
            energies: Vec::new(),
            weighted: Vec::new(),
            weighted_error: Vec::new(),
            outer_error: 0.0,
            converged: true,
        };
        if k_max == 0.0 {
            return Ok(out);
        }

        let inner = integ.nested();
        let below = region.y_max < -cond.b_bar();
        let kernel = |x: f64| {
            if below {
                ci_unscaled(x)
            } else {
                Complex64::new(0.0, ai_unscaled(x))
            }
        };
        let y_mid = 0.5 * (region.y_min + region.y_max);
        let probes = [
            (0.0, region.y_min),
            (0.5 * region.r_perp_max, y_mid),
            (region.r_perp_max, region.y_max),
        ];

        let mut cache: BTreeMap<u64, QuadResult<f64>> = BTreeMap::new();
        let mut failure = None;
        let integrand = |k: f64| {
            let e = shell.energy(k);
            let q = match source_integral(cond, k, e, &inner) {
                Ok(q) => q,
                Err(err) => {
                    failure.get_or_insert(err);
                    QuadResult { value: 0.0, error: 0.0, converged: false, evaluations: 0 }
                }
            };
            cache.insert(k.to_bits(), q);
            Bundle(probes.map(|(r, y)| kernel(y - e) * (k * j0(k * r) * q.value)))
        };

        let a2 = cond.a_bar() * cond.a_bar();
        let b = cond.b_bar();
        let y_low = region.y_min;
        let r_max = region.r_perp_max;
        let lambda = move |k: f64| {
            let e = nu - k * k / a2;
            let slope = 2.0 * k / a2;
            let detector = libm::sqrt(libm::fmax(0.0, e - y_low));
            let source = libm::sqrt(libm::fmax(0.0, e + b));
            TAU / (slope * (detector + source) + r_max + 1.0)
        };

        let (result, rule) = integ.integrate_with_rule(integrand, 0.0, k_max, Some(&lambda))?;
        if let Some(err) = failure {
            return Err(err);
        }
        out.outer_error = result.error;
        out.converged = result.converged;
        out.nodes.reserve(rule.nodes.len());
        for (&k, &w) in rule.nodes.iter().zip(&rule.weights) {
            let e = shell.energy(k);
            let q = match cache.get(&k.to_bits()) {
                Some(q) => *q,
                None => source_integral(cond, k, e, &inner)?,
            };
            out.converged &= q.converged;
            out.nodes.push(k);
            out.energies.push(e);
            out.weighted.push(w * k * q.value);
            out.weighted_error.push(libm::fabs(w * k) * q.error);
        }
        Ok(out)
    }

    pub fn condensate(&self) -> &Condensate {
        &self.cond
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn region(&self) -> &DetectorRegion {
        &self.region
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest radial momentum in the rule (zero when no state is resonant).
    pub fn k_max(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0)
    }

    fn check(&self, r_perp: f64, y_bar: f64) -> Result<(), OutcouplingError> {
        if self.region.contains(r_perp, y_bar) {
            Ok(())
        } else {
            Err(OutcouplingError::OutsideRegion { r_perp, y_bar })
        }
    }

    fn sum<K: Fn(f64) -> Complex64>(&self, r_perp: f64, y_bar: f64, kernel: K) -> (Complex64, f64) {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        for i in 0..self.nodes.len() {
            let k = self.nodes[i];
            let kern = kernel(y_bar - self.energies[i]) * j0(k * r_perp);
            acc += kern * self.weighted[i];
            err += kern.norm() * self.weighted_error[i];
        }
        (acc, err)
    }

    fn amplitude(&self, value: Complex64, inner_err: f64, scale: f64, method: Method) -> Amplitude {
        // The outer estimate is measured on the probe detectors only.
        Amplitude {
            value,
            method,
            error: scale * (self.outer_error + inner_err),
            converged: self.converged,
        }
    }

    pub fn intuitive(&self, r_perp: f64, y_bar: f64) -> Result<Amplitude, OutcouplingError> {
        self.check(r_perp, y_bar)?;
        let (s, err) = self.sum(r_perp, y_bar, |x| Complex64::new(ai_unscaled(x), 0.0));
        let scale = INTUITIVE_PREFACTOR * self.cond.amplitude();
        Ok(self.amplitude(Complex64::new(s.re * scale, 0.0), err, scale, Method::Intuitive))
    }

    pub fn scattering(&self, r_perp: f64, y_bar: f64) -> Result<Amplitude, OutcouplingError> {
        self.check(r_perp, y_bar)?;
        let bottom = -self.cond.b_bar();
        if !(y_bar < bottom) {
            return Err(OutcouplingError::UnsupportedRegion { y_bar, bottom });
        }
        let (s, err) = self.sum(r_perp, y_bar, ci_unscaled);
        let scale = SCATTERING_PREFACTOR * self.cond.amplitude();
        let value = Complex64::new(0.0, -scale) * s;
        Ok(self.amplitude(value, err, scale, Method::Scattering))
    }

    pub fn evaluate(&self, method: Method, r_perp: f64, y_bar: f64) -> Result<Amplitude, OutcouplingError> {
        match method {
            Method::Intuitive => self.intuitive(r_perp, y_bar),
            Method::Scattering => self.scattering(r_perp, y_bar),
        }
    }
}

/// Intuitive amplitude `f̄(ν; r̄⊥, ȳ)`.
pub fn f_intuitive(
    cond: &Condensate,
    nu: f64,
    r_perp: f64,
    y_bar: f64,
    integ: &Integrator,
) -> Result<Amplitude, OutcouplingError> {
    SourceTransform::build(cond, nu, &DetectorRegion::point(r_perp, y_bar), integ)?
        .intuitive(r_perp, y_bar)
}

/// Scattering amplitude `F̄(ν; r̄⊥, ȳ)` for a detector below the condensate.
pub fn f_scattering(
    cond: &Condensate,
    nu: f64,
    r_perp: f64,
    y_bar: f64,
    integ: &Integrator,
) -> Result<Amplitude, OutcouplingError> {
    let bottom = -cond.b_bar();
    if !(y_bar < bottom) {
        return Err(OutcouplingError::UnsupportedRegion { y_bar, bottom });
    }
    SourceTransform::build(cond, nu, &DetectorRegion::point(r_perp, y_bar), integ)?
        .scattering(r_perp, y_bar)
}

/// Scattering amplitude at any detector height, integrating the full Green
/// function across the source.
///
/// `F̄ = i A ∫ dk k J₀(k r̄⊥) ∫ dȳ′ R(ȳ′)³ j₁(kR)/(kR) G(ȳ, ȳ′; Ē(k))` with
/// `R = √(1 − ȳ′²/b̄²)`. Much slower than [`f_scattering`]; below the
/// condensate the two agree.
pub fn f_scattering_general(
    cond: &Condensate,
    nu: f64,
    r_perp: f64,
    y_bar: f64,
    integ: &Integrator,
) -> Result<Amplitude, OutcouplingError> {
    if !(nu.is_finite() && y_bar.is_finite()) {
        return Err(OutcouplingError::Input { name: "nu", value: nu });
    }
    DetectorRegion::point(r_perp, y_bar).validate()?;
    let shell = ResonantShell::new(nu, cond);
    let b = cond.b_bar();
    let inner = integ.nested();
    // The kink of G at ȳ′ = ȳ becomes a panel edge.
    let theta_split = if y_bar.abs() < b { Some(libm::asin(y_bar / b)) } else { None };
    let top = libm::fmax(y_bar, -b);
    let k_max = {
        let t = integ.spec().tail_threshold;
        let s = t + nu - top;
        if s > 0.0 { cond.a_bar() * libm::sqrt(s) } else { 0.0 }
    };

    let mut failure: Option<OutcouplingError> = None;
    let green_err = Cell::new(None);
    let mut inner_error = 0.0f64;
    let mut inner_ok = true;
    let integrand = |k: f64| {
        let e = shell.energy(k);
        let f = |t: f64| {
            let (s, c) = libm::sincos(t);
            let c2 = c * c;
            match green_1d(y_bar, b * s, e) {
                Ok(g) => g * (c2 * c2 * sph_j1_over_arg(k * c)),
                Err(err) => {
                    green_err.set(Some(err));
                    Complex64::new(0.0, 0.0)
                }
            }
        };
        let lam = |t: f64| {
            let (s, c) = libm::sincos(t);
            let airy = b * c * libm::sqrt(libm::fmax(0.0, e - b * s));
            TAU / (airy + k * libm::fabs(s) + 1.0)
        };
        let mut run = |lo: f64, hi: f64| match inner.integrate(&f, lo, hi, Some(&lam)) {
            Ok(r) => {
                inner_error = libm::fmax(inner_error, r.error);
                inner_ok &= r.converged;
                r.value
            }
            Err(err) => {
                failure.get_or_insert(err.into());
                Complex64::new(0.0, 0.0)
            }
        };
        let v = match theta_split {
            Some(ts) => run(-FRAC_PI_2, ts) + run(ts, FRAC_PI_2),
            None => run(-FRAC_PI_2, FRAC_PI_2),
        };
        v * (k * j0(k * r_perp) * b)
    };
    let a2 = cond.a_bar() * cond.a_bar();
    let lambda = |k: f64| {
        let e = shell.energy(k);
        let wave = libm::sqrt(libm::fmax(0.0, e - y_bar)) + libm::sqrt(libm::fmax(0.0, e + b));
        TAU / (2.0 * k / a2 * wave + r_perp + 1.0)
    };
    let outer = integ.integrate(integrand, 0.0, k_max, Some(&lambda))?;
    if let Some(err) = green_err.take() {
        return Err(err.into());
    }
    if let Some(err) = failure {
        return Err(err);
    }
    let scale = cond.amplitude();
    Ok(Amplitude {
        value: Complex64::new(0.0, scale) * outer.value,
        method: Method::Scattering,
        error: scale * (outer.error + inner_error * b * k_max * k_max),
        converged: outer.converged && inner_ok,
    })
}

/// One-dimensional Thomas-Fermi profile `√(3/4b̄) √(1 − ȳ²/b̄²)`, normalized on
/// `[−b̄, b̄]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condensate1d {
    b_bar: f64,
}

impl Condensate1d {
    pub fn new(b_bar: f64) -> Result<Self, OutcouplingError> {
        if !(b_bar > 0.0 && b_bar.is_finite()) {
            return Err(OutcouplingError::Input { name: "b_bar", value: b_bar });
        }
        Ok(Self { b_bar })
    }

    pub fn b_bar(&self) -> f64 {
        self.b_bar
    }

    pub fn amplitude(&self) -> f64 {
        libm::sqrt(3.0 / (4.0 * self.b_bar))
    }

    pub fn value(&self, y_bar: f64) -> f64 {
        let s = 1.0 - (y_bar / self.b_bar) * (y_bar / self.b_bar);
        if s > 0.0 {
            self.amplitude() * libm::sqrt(s)
        } else {
            0.0
        }
    }

    /// `⟨ψ_Ē|Φ¹ᴰ⟩`.
    pub fn overlap(&self, energy: f64, integ: &Integrator) -> Result<QuadResult<f64>, OutcouplingError> {
        let b = self.b_bar;
        let f = |t: f64| {
            let (s, c) = libm::sincos(t);
            c * c * ai_unscaled(b * s - energy)
        };
        let lam = |t: f64| {
            let (s, c) = libm::sincos(t);
            TAU / (b * c * libm::sqrt(libm::fmax(0.0, energy - b * s)) + 1.0)
        };
        let r = integ.integrate(f, -FRAC_PI_2, FRAC_PI_2, Some(&lam))?;
        let s = self.amplitude() * b;
        Ok(QuadResult { value: s * r.value, error: s * r.error, ..r })
    }
}

/// 1D amplitude: the single resonant state `Ē = ν` projected on the source,
/// `⟨ψ_ν|Φ¹ᴰ⟩ ψ_ν(ȳ)`.
pub fn f_1d(
    cond: &Condensate1d,
    nu: f64,
    y_bar: f64,
    integ: &Integrator,
) -> Result<Amplitude, OutcouplingError> {
    if !(nu.is_finite() && y_bar.is_finite()) {
        return Err(OutcouplingError::Input { name: "nu", value: nu });
    }
    let overlap = cond.overlap(nu, integ)?;
    let psi = airy_ai(y_bar - nu)?.value();
    Ok(Amplitude {
        value: Complex64::new(overlap.value * psi, 0.0),
        method: Method::Intuitive,
        error: overlap.error * libm::fabs(psi),
        converged: overlap.converged,
    })
}
