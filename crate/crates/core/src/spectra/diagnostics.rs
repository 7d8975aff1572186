use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::ResolutionCurve;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagnosticsError {
    #[error("curve needs at least 3 samples on a strictly increasing grid")]
    TooShort,
    #[error("global maximum at the grid edge (nu = {0})")]
    EdgeMaximum(f64),
    #[error("curve does not fall to half maximum on the {0} side")]
    NoHalfCrossing(&'static str),
    #[error("detrend width must be positive, got {0}")]
    DetrendWidth(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsOptions {
    /// Gaussian smoothing width (in ν) whose output is the trend.
    pub detrend_width: f64,
    /// Residuals below `floor · peak` count as zero for sign changes.
    pub floor: f64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self { detrend_width: 1.0, floor: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub peak_position: f64,
    pub peak_value: f64,
    pub fwhm: f64,
    pub left_half_width: f64,
    pub right_half_width: f64,
    /// `(right − left)/fwhm`.
    pub asymmetry: f64,
    /// Period of the strongest periodogram line of the detrended curve.
    pub oscillation_period: Option<f64>,
    /// Amplitude of that line.
    pub oscillation_amplitude: f64,
    pub sign_changes: usize,
    pub local_maxima: usize,
}

pub fn curve_diagnostics(curve: &ResolutionCurve, opts: &DiagnosticsOptions) -> Result<Diagnostics, DiagnosticsError> {
    let nu = curve.nu();
    let d = curve.d();
    check(&nu, opts)?;
    let n = nu.len();

    let imax = (0..n).fold(0, |best, i| if d[i] > d[best] { i } else { best });
    if imax == 0 || imax == n - 1 {
        return Err(DiagnosticsError::EdgeMaximum(nu[imax]));
    }
    // Parabolic vertex through the three samples around the maximum.
    let (x0, x1, x2) = (nu[imax - 1], nu[imax], nu[imax + 1]);
    let (y0, y1, y2) = (d[imax - 1], d[imax], d[imax + 1]);
    let den = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let ca = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den;
    let cb = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den;
    let (peak_nu, peak) = if ca < 0.0 {
        let v = -cb / (2.0 * ca);
        (v, y1 + ca * (v - x1) * (v - x1) + (2.0 * ca * x1 + cb) * (v - x1))
    } else {
        (x1, y1)
    };
    let half = 0.5 * peak;
    let left = (0..imax)
        .rev()
        .find(|&i| d[i] < half)
        .map(|i| cross(nu[i], d[i], nu[i + 1], d[i + 1], half))
        .ok_or(DiagnosticsError::NoHalfCrossing("left"))?;
    let right = (imax + 1..n)
        .find(|&i| d[i] < half)
        .map(|i| cross(nu[i - 1], d[i - 1], nu[i], d[i], half))
        .ok_or(DiagnosticsError::NoHalfCrossing("right"))?;
    let lw = peak_nu - left;
    let rw = right - peak_nu;
    let fwhm = right - left;

    let resid = detrend(&nu, &d, opts.detrend_width);
    let floor = opts.floor * peak;
    let line = periodogram_peak(&nu, &resid);
    Ok(Diagnostics {
        peak_position: peak_nu,
        peak_value: peak,
        fwhm,
        left_half_width: lw,
        right_half_width: rw,
        asymmetry: (rw - lw) / fwhm,
        oscillation_period: line.map(|(f, _)| 1.0 / f),
        oscillation_amplitude: line.map_or(0.0, |(_, a)| a),
        sign_changes: sign_changes(&resid, floor),
        local_maxima: (1..n - 1).filter(|&i| d[i] > d[i - 1] && d[i] > d[i + 1]).count(),
    })
}

/// Amplitude of the detrended curve's Fourier component at `frequency`
/// (cycles per unit ν).
pub fn oscillation_amplitude(curve: &ResolutionCurve, frequency: f64, detrend_width: f64) -> Result<f64, DiagnosticsError> {
    let nu = curve.nu();
    check(&nu, &DiagnosticsOptions { detrend_width, floor: 0.0 })?;
    let resid = detrend(&nu, &curve.d(), detrend_width);
    Ok(line_amplitude(&nu, &resid, &tapered_weights(&nu), frequency))
}

fn check(nu: &[f64], opts: &DiagnosticsOptions) -> Result<(), DiagnosticsError> {
    if nu.len() < 3 || nu.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(DiagnosticsError::TooShort);
    }
    if !(opts.detrend_width > 0.0 && opts.detrend_width.is_finite()) {
        return Err(DiagnosticsError::DetrendWidth(opts.detrend_width));
    }
    Ok(())
}

fn cross(x0: f64, y0: f64, x1: f64, y1: f64, level: f64) -> f64 {
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

/// `d` minus its Gaussian-kernel smoothing, renormalized near the edges.
pub(crate) fn detrend(nu: &[f64], d: &[f64], width: f64) -> Vec<f64> {
    let w = trapezoid_weights(nu);
    let mut out = Vec::with_capacity(nu.len());
    for (i, &x) in nu.iter().enumerate() {
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..nu.len() {
            let u = (nu[j] - x) / width;
            if u.abs() > 8.0 {
                continue;
            }
            let k = w[j] * libm::exp(-0.5 * u * u);
            num += k * d[j];
            den += k;
        }
        out.push(d[i] - num / den);
    }
    out
}

fn trapezoid_weights(nu: &[f64]) -> Vec<f64> {
    let n = nu.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { nu[0] } else { nu[i - 1] };
            let hi = if i + 1 == n { nu[n - 1] } else { nu[i + 1] };
            0.5 * (hi - lo)
        })
        .collect()
}

/// Hann-tapered trapezoid weights, so that the record edges do not leak
/// into the periodogram.
fn tapered_weights(nu: &[f64]) -> Vec<f64> {
    let (lo, span) = (nu[0], nu[nu.len() - 1] - nu[0]);
    trapezoid_weights(nu)
        .into_iter()
        .zip(nu)
        .map(|(w, &x)| w * 0.5 * (1.0 - libm::cos(TAU * (x - lo) / span)))
        .collect()
}

fn line_amplitude(nu: &[f64], r: &[f64], w: &[f64], f: f64) -> f64 {
    let (mut re, mut im, mut tot) = (0.0, 0.0, 0.0);
    for i in 0..nu.len() {
        let (s, c) = libm::sincos(TAU * f * nu[i]);
        re += w[i] * r[i] * c;
        im += w[i] * r[i] * s;
        tot += w[i];
    }
    2.0 * libm::sqrt(re * re + im * im) / tot
}

/// Strongest line of the residual between two cycles per record and the
/// Nyquist rate of the coarsest spacing, as `(frequency, amplitude)`.
fn periodogram_peak(nu: &[f64], r: &[f64]) -> Option<(f64, f64)> {
    let n = nu.len();
    let span = nu[n - 1] - nu[0];
    let h = nu.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
    let (f_lo, f_hi) = (2.0 / span, 0.5 / h);
    if f_lo >= f_hi || r.iter().all(|v| *v == 0.0) {
        return None;
    }
    let w = tapered_weights(nu);
    let df = 0.125 / span;
    let steps = libm::ceil((f_hi - f_lo) / df) as usize;
    let mut best = (f_lo, 0.0);
    for s in 0..=steps {
        let f = libm::fmin(f_lo + s as f64 * df, f_hi);
        let a = line_amplitude(nu, r, &w, f);
        if a > best.1 {
            best = (f, a);
        }
    }
    // Golden-section polish inside the winning bin.
    let (mut a, mut b) = (libm::fmax(f_lo, best.0 - df), libm::fmin(f_hi, best.0 + df));
    let g = 0.5 * (libm::sqrt(5.0) - 1.0);
    for _ in 0..40 {
        let c = b - g * (b - a);
        let e = a + g * (b - a);
        if line_amplitude(nu, r, &w, c) > line_amplitude(nu, r, &w, e) {
            b = e;
        } else {
            a = c;
        }
    }
    let f = 0.5 * (a + b);
    let amp = line_amplitude(nu, r, &w, f);
    Some(if amp >= best.1 { (f, amp) } else { best })
}

fn sign_changes(r: &[f64], floor: f64) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for &v in r {
        let s = if v > floor {
            1
        } else if v < -floor {
            -1
        } else {
            continue;
        };
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}
