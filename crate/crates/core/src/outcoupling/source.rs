//! Overlap of a resonant basis state with the condensate.

use core::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::model::Condensate;
use crate::quadrature::{Integrator, QuadResult};
use crate::specfun::{ai_unscaled, j0, sph_j1_over_arg};

use super::OutcouplingError;

/// `Q(k, Ē) = ∫ dȳ′ Ai(ȳ′ − Ē) ∫₀¹ dr r J₀(k r) √(1 − r² − ȳ′²/b̄²)`.
///
/// The radial integral is done in closed form,
/// `∫₀^R r J₀(kr) √(R² − r²) dr = R³ j₁(kR)/(kR)`, and `ȳ′ = b̄ sin θ`
/// leaves a smooth integrand `b̄ cos⁴θ · j₁(k cos θ)/(k cos θ) · Ai(b̄ sin θ − Ē)`.
pub fn source_integral(
    cond: &Condensate,
    k: f64,
    energy: f64,
    integ: &Integrator,
) -> Result<QuadResult<f64>, OutcouplingError> {
    let b = cond.b_bar();
    let tail = integ.spec().tail_threshold;
    // Above θ_hi the Airy argument exceeds the tail threshold.
    let s_hi = (energy + tail) / b;
    if s_hi <= -1.0 {
        return Ok(QuadResult { value: 0.0, error: 0.0, converged: true, evaluations: 0 });
    }
    let theta_hi = if s_hi >= 1.0 { FRAC_PI_2 } else { libm::asin(s_hi) };
    let f = |t: f64| {
        let (s, c) = libm::sincos(t);
        let c2 = c * c;
        c2 * c2 * sph_j1_over_arg(k * c) * ai_unscaled(b * s - energy)
    };
    let lambda = |t: f64| {
        let (s, c) = libm::sincos(t);
        let airy = b * c * libm::sqrt(libm::fmax(0.0, energy - b * s));
        TAU / (airy + k * libm::fabs(s) + 1.0)
    };
    let r = integ.integrate(f, -FRAC_PI_2, theta_hi, Some(&lambda))?;
    Ok(QuadResult { value: b * r.value, error: b * r.error, ..r })
}

/// Literal nested form of the overlap kernel: outer radial integral with a
/// Bessel weight, inner vertical integral across the ellipsoid chord. Slow;
/// kept as an independent route to [`source_integral`].
pub fn source_integral_nested(
    cond: &Condensate,
    k: f64,
    energy: f64,
    integ: &Integrator,
) -> Result<QuadResult<f64>, OutcouplingError> {
    let b = cond.b_bar();
    let inner = integ.nested();
    let mut inner_error = 0.0f64;
    let mut inner_ok = true;
    let mut failure = None;
    let outer = integ.integrate(
        |r: f64| {
            let rho2 = 1.0 - r * r;
            if rho2 <= 0.0 {
                return 0.0;
            }
            let rho = libm::sqrt(rho2);
            // ȳ′ = b̄ρ sin φ on the chord |ȳ′| ≤ b̄ρ.
            let g = |phi: f64| {
                let (s, c) = libm::sincos(phi);
                c * c * ai_unscaled(b * rho * s - energy)
            };
            let lam = |phi: f64| {
                let (s, c) = libm::sincos(phi);
                TAU / (b * rho * c * libm::sqrt(libm::fmax(0.0, energy - b * rho * s)) + 1.0)
            };
            match inner.integrate(g, -FRAC_PI_2, FRAC_PI_2, Some(&lam)) {
                Ok(h) => {
                    inner_error = libm::fmax(inner_error, b * rho2 * h.error);
                    inner_ok &= h.converged;
                    r * j0(k * r) * b * rho2 * h.value
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        0.0,
        1.0,
        Some(&|_| TAU / (k + 1.0)),
    )?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(QuadResult {
        value: outer.value,
        error: outer.error + inner_error,
        converged: outer.converged && inner_ok,
        evaluations: outer.evaluations,
    })
}

/// `2π ā² A · Q(k, Ē)`: the scalar product of the resonant basis state
/// `(k̄⊥, Ē)` with the condensate, in units `l0·(Mg·l0)^{-1/2}`.
pub fn overlap_cyl(
    cond: &Condensate,
    k: f64,
    energy: f64,
    integ: &Integrator,
) -> Result<QuadResult<f64>, OutcouplingError> {
    check_k(k, energy)?;
    let q = source_integral(cond, k, energy, integ)?;
    Ok(scale(q, overlap_factor(cond)))
}

/// [`overlap_cyl`] evaluated by the nested route.
pub fn overlap_cyl_nested(
    cond: &Condensate,
    k: f64,
    energy: f64,
    integ: &Integrator,
) -> Result<QuadResult<f64>, OutcouplingError> {
    check_k(k, energy)?;
    let q = source_integral_nested(cond, k, energy, integ)?;
    Ok(scale(q, overlap_factor(cond)))
}

fn overlap_factor(cond: &Condensate) -> f64 {
    2.0 * PI * cond.a_bar() * cond.a_bar() * cond.amplitude()
}

fn scale(q: QuadResult<f64>, s: f64) -> QuadResult<f64> {
    QuadResult { value: s * q.value, error: s * q.error, ..q }
}

fn check_k(k: f64, energy: f64) -> Result<(), OutcouplingError> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(OutcouplingError::Input { name: "k_perp", value: k });
    }
    if !energy.is_finite() {
        return Err(OutcouplingError::Input { name: "energy", value: energy });
    }
    Ok(())
}
