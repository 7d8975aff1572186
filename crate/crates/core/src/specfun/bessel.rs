use super::SpecFunError;

/// Bessel function of the first kind, order zero.
///
/// Backed by the FreeBSD msun algorithm shipped in `libm` (rational
/// approximations near the origin, Hankel asymptotics with fitted `P0/Q0`
/// beyond `x = 2`).
pub fn bessel_j0(x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::Domain { x });
    }
    Ok(j0(x))
}

#[inline]
pub(crate) fn j0(x: f64) -> f64 {
    libm::j0(libm::fabs(x))
}

/// `j1(z)/z = (sin z − z cos z)/z³`, with `j1` the spherical Bessel function.
///
/// This is the radial kernel `∫₀¹ t J₀(z t) √(1 − t²) dt` in closed form.
#[inline]
pub fn sph_j1_over_arg(z: f64) -> f64 {
    let z = libm::fabs(z);
    if z < 0.5 {
        let z2 = z * z;
        // 1/3 − z²/30 + z⁴/840 − z⁶/45360 + z⁸/3991680 − z¹⁰/518918400
        1.0 / 3.0
            + z2 * (-1.0 / 30.0
                + z2 * (1.0 / 840.0
                    + z2 * (-1.0 / 45_360.0 + z2 * (1.0 / 3_991_680.0 - z2 / 518_918_400.0))))
    } else {
        let (s, c) = libm::sincos(z);
        (s - z * c) / (z * z * z)
    }
}
