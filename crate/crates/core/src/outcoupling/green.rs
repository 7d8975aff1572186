use num_complex::Complex64;

use crate::specfun::{airy_ai, airy_ci_scaled, SpecFunError};

/// Energy-dependent Green function of the 1D linear potential, in units of
/// `1/(Mg·l0²)`.
///
/// `G(ȳ, ȳ′; Ē) = −π Ai(max(ȳ,ȳ′) − Ē) · Ci(min(ȳ,ȳ′) − Ē)`: decaying above
/// the source point, outgoing below it. The two factors are multiplied in
/// scaled form, so `Ci` growth is absorbed by `Ai` decay.
pub fn green_1d(y: f64, y_src: f64, energy: f64) -> Result<Complex64, SpecFunError> {
    let (hi, lo) = if y >= y_src { (y, y_src) } else { (y_src, y) };
    let ai = airy_ai(hi - energy)?;
    let ci = airy_ci_scaled(lo - energy)?;
    Ok(ci.mul_real(ai) * -core::f64::consts::PI)
}
