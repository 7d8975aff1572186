//! Detection-layer quantities: the spectral resolution function
//! `D(ν; r) = |f̄(ν; r)|²`, its convolution with a noise spectrum, spatial
//! averaging over a detection volume, and curve diagnostics.
//!
//! Everything here is in frame units: `ν = ω − Δ` in `Mg·l0/ħ`, `D` in
//! `l0^{-3}`.

mod diagnostics;

pub use diagnostics::{curve_diagnostics, oscillation_amplitude, Diagnostics, DiagnosticsError, DiagnosticsOptions};

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::model::Condensate;
use crate::outcoupling::{DetectorRegion, Method, OutcouplingError, SourceTransform};
use crate::quadrature::Integrator;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectraError {
    #[error(transparent)]
    Outcoupling(#[from] OutcouplingError),
    #[error("noise spectrum is invalid: {0}")]
    Spectrum(&'static str),
    #[error("detuning grid must be finite and strictly increasing")]
    Grid,
    #[error("averaging window must be positive and finite, got {0}")]
    Window(f64),
    #[error("resolution curve does not cover frequencies {missing_lo}..{missing_hi} needed by the noise spectrum")]
    Coverage { missing_lo: f64, missing_hi: f64 },
}

/// Magnetic noise power spectrum `S(ω) ≥ 0`, frequencies in frame units.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpectrum {
    /// `weight · δ(ω − omega0)`.
    Monochromatic { omega0: f64, weight: f64 },
    /// Flat `S(ω) = level`.
    White { level: f64 },
    /// Samples on the uniform grid `start + i·step`, linearly interpolated
    /// and zero outside.
    Tabulated { start: f64, step: f64, values: Vec<f64> },
    /// Sum of components.
    Sum(Vec<NoiseSpectrum>),
}

impl NoiseSpectrum {
    pub fn validate(&self) -> Result<(), SpectraError> {
        match self {
            NoiseSpectrum::Monochromatic { omega0, weight } => {
                if !omega0.is_finite() {
                    return Err(SpectraError::Spectrum("omega0 must be finite"));
                }
                if !(*weight >= 0.0 && weight.is_finite()) {
                    return Err(SpectraError::Spectrum("weight must be non-negative"));
                }
            }
            NoiseSpectrum::White { level } => {
                if !(*level >= 0.0 && level.is_finite()) {
                    return Err(SpectraError::Spectrum("level must be non-negative"));
                }
            }
            NoiseSpectrum::Tabulated { start, step, values } => {
                if !start.is_finite() || !(*step > 0.0 && step.is_finite()) {
                    return Err(SpectraError::Spectrum("grid must be finite and strictly increasing"));
                }
                if values.is_empty() {
                    return Err(SpectraError::Spectrum("no samples"));
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(SpectraError::Spectrum("samples must be non-negative"));
                }
            }
            NoiseSpectrum::Sum(parts) => {
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Same spectrum multiplied by `alpha ≥ 0`.
    pub fn scaled(&self, alpha: f64) -> Self {
        match self {
            NoiseSpectrum::Monochromatic { omega0, weight } => {
                NoiseSpectrum::Monochromatic { omega0: *omega0, weight: alpha * weight }
            }
            NoiseSpectrum::White { level } => NoiseSpectrum::White { level: alpha * level },
            NoiseSpectrum::Tabulated { start, step, values } => NoiseSpectrum::Tabulated {
                start: *start,
                step: *step,
                values: values.iter().map(|v| alpha * v).collect(),
            },
            NoiseSpectrum::Sum(parts) => NoiseSpectrum::Sum(parts.iter().map(|p| p.scaled(alpha)).collect()),
        }
    }

    /// Density part of `S` at `omega` (delta components excluded).
    fn density(&self, omega: f64) -> f64 {
        match self {
            NoiseSpectrum::Monochromatic { .. } => 0.0,
            NoiseSpectrum::White { level } => *level,
            NoiseSpectrum::Tabulated { start, step, values } => {
                let pos = (omega - start) / step;
                let last = (values.len() - 1) as f64;
                if !(0.0..=last).contains(&pos) {
                    return 0.0;
                }
                let i = libm::floor(pos) as usize;
                if i + 1 >= values.len() {
                    return values[values.len() - 1];
                }
                let t = pos - i as f64;
                values[i] * (1.0 - t) + values[i + 1] * t
            }
            NoiseSpectrum::Sum(parts) => parts.iter().map(|p| p.density(omega)).sum(),
        }
    }
}

/// How the detector samples `|f̄|²` along the vertical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Averaging {
    Point,
    /// Uniform mean over `[ȳ − width/2, ȳ + width/2]`.
    TopHat { width: f64 },
    /// Uniform mean over `count` local wavelengths of the resonant Airy
    /// state at the detector, see [`local_wavelength`].
    Wavelengths { count: f64 },
}

impl Default for Averaging {
    fn default() -> Self {
        Averaging::Wavelengths { count: 1.0 }
    }
}

impl Averaging {
    /// Window width at detuning `nu` around `y_bar`; zero for a point.
    pub fn width(&self, y_bar: f64, nu: f64) -> f64 {
        match *self {
            Averaging::Point => 0.0,
            Averaging::TopHat { width } => width,
            Averaging::Wavelengths { count } => count * local_wavelength(y_bar, nu),
        }
    }

    /// Vertical extent `[lo, hi]` sampled around `y_bar`.
    pub fn extent(&self, y_bar: f64, nu: f64) -> (f64, f64) {
        let w = self.width(y_bar, nu);
        (y_bar - 0.5 * w, y_bar + 0.5 * w)
    }

    pub fn validate(&self) -> Result<(), SpectraError> {
        let w = match *self {
            Averaging::Point => return Ok(()),
            Averaging::TopHat { width } => width,
            Averaging::Wavelengths { count } => count,
        };
        if w > 0.0 && w.is_finite() {
            Ok(())
        } else {
            Err(SpectraError::Window(w))
        }
    }
}

/// Local wavelength `2π/√(ν − ȳ)` of `Ai(ȳ − ν)` at the detector, the
/// basis state resonant at zero transverse momentum. Reduces to
/// `2π/√|ȳ|` for `|ν| ≪ |ȳ|`. The argument is clamped at 1 above the
/// turning point.
pub fn local_wavelength(y_bar: f64, nu: f64) -> f64 {
    TAU / libm::sqrt(libm::fmax(nu - y_bar, 1.0))
}

/// Mean of `field` over `[center − window/2, center + window/2]`.
///
/// A zero window returns the point value.
pub fn spatial_average(
    field: impl FnMut(f64) -> f64,
    center: f64,
    window: f64,
    integ: &Integrator,
) -> Result<f64, SpectraError> {
    let mut field = field;
    if window == 0.0 {
        return Ok(field(center));
    }
    if !(window > 0.0 && window.is_finite()) {
        return Err(SpectraError::Window(window));
    }
    let lo = center - 0.5 * window;
    let hi = center + 0.5 * window;
    // |Ai|² oscillates at half the Airy wavelength.
    let lambda = |y: f64| 0.5 * local_wavelength(y, 0.0);
    let r = integ
        .integrate(field, lo, hi, Some(&lambda))
        .map_err(OutcouplingError::from)?;
    Ok(r.value / (hi - lo))
}

/// One sample of the resolution function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub nu: f64,
    pub d: f64,
    pub error: f64,
    pub converged: bool,
}

/// Metadata carried with a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveMeta {
    pub a_bar: f64,
    pub b_bar: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub averaging: Averaging,
}

/// Sampled `D(ν)` at one detector position.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionCurve {
    pub r_perp: f64,
    pub y_bar: f64,
    pub method: Method,
    pub points: Vec<CurvePoint>,
    pub meta: CurveMeta,
}

impl ResolutionCurve {
    pub fn nu(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.nu).collect()
    }

    pub fn d(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.d).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }

    /// `D ≥ 0` and a strictly increasing grid.
    pub fn validate(&self) -> Result<(), SpectraError> {
        check_grid(self.points.iter().map(|p| p.nu))?;
        if self.points.iter().any(|p| !(p.d >= 0.0)) {
            return Err(SpectraError::Grid);
        }
        Ok(())
    }

    /// Linear interpolation of `D` at `nu`, `None` outside the grid.
    pub fn interpolate(&self, nu: f64) -> Option<f64> {
        let pts = &self.points;
        let first = pts.first()?;
        let last = pts.last()?;
        if !(first.nu..=last.nu).contains(&nu) {
            return None;
        }
        let i = pts.partition_point(|p| p.nu <= nu);
        if i == 0 {
            return Some(first.d);
        }
        let p0 = &pts[i - 1];
        if p0.nu == nu || i == pts.len() {
            return Some(p0.d);
        }
        let p1 = &pts[i];
        let t = (nu - p0.nu) / (p1.nu - p0.nu);
        Some(p0.d * (1.0 - t) + p1.d * t)
    }
}

fn check_grid(nu: impl Iterator<Item = f64>) -> Result<(), SpectraError> {
    let mut prev = f64::NEG_INFINITY;
    for v in nu {
        if !(v.is_finite() && v > prev) {
            return Err(SpectraError::Grid);
        }
        prev = v;
    }
    Ok(())
}

/// Resolution function of both methods at one detuning, sharing one
/// source transform. `None` for a method not requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePair {
    pub intuitive: Option<CurvePoint>,
    pub scattering: Option<CurvePoint>,
}

/// `D(ν)` at detector `(r̄⊥, ȳ)` for the requested methods.
pub fn sample_resolution(
    cond: &Condensate,
    nu: f64,
    r_perp: f64,
    y_bar: f64,
    averaging: Averaging,
    methods: &[Method],
    integ: &Integrator,
) -> Result<SamplePair, SpectraError> {
    averaging.validate()?;
    let (lo, hi) = averaging.extent(y_bar, nu);
    let region = DetectorRegion { r_perp_max: r_perp, y_min: lo, y_max: hi };
    let st = SourceTransform::build(cond, nu, &region, integ)?;
    let mut out = SamplePair { intuitive: None, scattering: None };
    for &m in methods {
        let point = sample_transform(&st, m, r_perp, y_bar, averaging, integ)?;
        match m {
            Method::Intuitive => out.intuitive = Some(point),
            Method::Scattering => out.scattering = Some(point),
        }
    }
    Ok(out)
}

/// `D` at `(r̄⊥, ȳ)` from a prebuilt transform, which must cover the
/// averaging extent.
pub fn sample_transform(
    st: &SourceTransform,
    method: Method,
    r_perp: f64,
    y_bar: f64,
    averaging: Averaging,
    integ: &Integrator,
) -> Result<CurvePoint, SpectraError> {
    let nu = st.nu();
    let mut error = 0.0f64;
    let mut converged = true;
    let mut failure = None;
    let mut field = |y: f64| match st.evaluate(method, r_perp, y) {
        Ok(a) => {
            // |δ|f|²| ≤ 2|f|·δ|f| + δ|f|²
            let e = a.error * (2.0 * a.value.norm() + a.error);
            error = libm::fmax(error, e);
            converged &= a.converged;
            a.density()
        }
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let d = match averaging {
        Averaging::Point => field(y_bar),
        _ => spatial_average(&mut field, y_bar, averaging.width(y_bar, nu), integ)?,
    };
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(CurvePoint { nu, d, error, converged })
}

/// `D(ν_i)` over a grid for one method, evaluated in order.
pub fn resolution_function(
    cond: &Condensate,
    r_perp: f64,
    y_bar: f64,
    nu_grid: &[f64],
    method: Method,
    averaging: Averaging,
    integ: &Integrator,
) -> Result<ResolutionCurve, SpectraError> {
    check_grid(nu_grid.iter().copied())?;
    let mut points = Vec::with_capacity(nu_grid.len());
    for &nu in nu_grid {
        let s = sample_resolution(cond, nu, r_perp, y_bar, averaging, &[method], integ)?;
        points.push(match method {
            Method::Intuitive => s.intuitive,
            Method::Scattering => s.scattering,
        }
        .expect("requested method is sampled"));
    }
    Ok(ResolutionCurve {
        r_perp,
        y_bar,
        method,
        points,
        meta: CurveMeta {
            a_bar: cond.a_bar(),
            b_bar: cond.b_bar(),
            rel_tol: integ.spec().rel_tol,
            abs_tol: integ.spec().abs_tol,
            averaging,
        },
    })
}

/// Outcoupled atom rate density at one detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convolution {
    pub delta: f64,
    pub value: f64,
    /// Trapezoid contribution of the two grid ends over one grid step,
    /// a scale for what lies beyond the curve.
    pub tail_bound: f64,
}

/// `N(Δ) = η̄² ∫ dω D(ω − Δ) S(ω)` with `η̄ = η/(Mg·l0/ħ)`, by the trapezoid
/// rule on the curve's own grid. Delta components of `S` use the linearly
/// interpolated curve.
pub fn convolve_noise(
    curve: &ResolutionCurve,
    spectrum: &NoiseSpectrum,
    delta: f64,
    coupling: f64,
) -> Result<Convolution, SpectraError> {
    spectrum.validate()?;
    curve.validate()?;
    if curve.points.is_empty() {
        return Err(SpectraError::Grid);
    }
    let pref = coupling * coupling;
    let first = curve.points[0].nu;
    let last = curve.points[curve.points.len() - 1].nu;
    check_coverage(spectrum, first + delta, last + delta)?;

    let pts = &curve.points;
    let mut value = deltas(curve, spectrum, delta)?;
    let mut cont = 0.0;
    for i in 0..pts.len().saturating_sub(1) {
        let (p0, p1) = (&pts[i], &pts[i + 1]);
        let h = p1.nu - p0.nu;
        cont += 0.5 * h * (p0.d * spectrum.density(p0.nu + delta) + p1.d * spectrum.density(p1.nu + delta));
    }
    value += cont;

    let tail = if pts.len() >= 2 {
        let h0 = pts[1].nu - pts[0].nu;
        let h1 = pts[pts.len() - 1].nu - pts[pts.len() - 2].nu;
        h0 * pts[0].d * spectrum.density(first + delta) + h1 * pts[pts.len() - 1].d * spectrum.density(last + delta)
    } else {
        0.0
    };
    Ok(Convolution { delta, value: pref * value, tail_bound: pref * tail })
}

fn deltas(curve: &ResolutionCurve, s: &NoiseSpectrum, delta: f64) -> Result<f64, SpectraError> {
    Ok(match s {
        NoiseSpectrum::Monochromatic { omega0, weight } => {
            let nu = omega0 - delta;
            let d = curve
                .interpolate(nu)
                .ok_or(SpectraError::Coverage { missing_lo: *omega0, missing_hi: *omega0 })?;
            weight * d
        }
        NoiseSpectrum::Sum(parts) => {
            let mut acc = 0.0;
            for p in parts {
                acc += deltas(curve, p, delta)?;
            }
            acc
        }
        _ => 0.0,
    })
}

/// Frequencies `[lo, hi]` are covered by the curve shifted by `Δ`; every
/// component of `S` must vanish outside.
fn check_coverage(s: &NoiseSpectrum, lo: f64, hi: f64) -> Result<(), SpectraError> {
    match s {
        NoiseSpectrum::Monochromatic { omega0, .. } => {
            if *omega0 < lo || *omega0 > hi {
                return Err(SpectraError::Coverage { missing_lo: *omega0, missing_hi: *omega0 });
            }
        }
        NoiseSpectrum::White { level } => {
            // A flat spectrum extends to ±∞; the curve ends must carry the
            // tail, which `tail_bound` reports.
            let _ = level;
        }
        NoiseSpectrum::Tabulated { start, step, values } => {
            let end = start + step * (values.len() - 1) as f64;
            // Support of the interpolant: first and last non-zero samples,
            // widened by one step.
            let nz_first = values.iter().position(|v| *v > 0.0);
            let nz_last = values.iter().rposition(|v| *v > 0.0);
            if let (Some(a), Some(b)) = (nz_first, nz_last) {
                let s_lo = libm::fmax(*start, start + step * (a as f64 - 1.0));
                let s_hi = libm::fmin(end, start + step * (b as f64 + 1.0));
                if s_lo < lo {
                    return Err(SpectraError::Coverage { missing_lo: s_lo, missing_hi: lo });
                }
                if s_hi > hi {
                    return Err(SpectraError::Coverage { missing_lo: hi, missing_hi: s_hi });
                }
            }
        }
        NoiseSpectrum::Sum(parts) => {
            for p in parts {
                check_coverage(p, lo, hi)?;
            }
        }
    }
    Ok(())
}
