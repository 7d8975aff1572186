//! Real-argument Airy functions `Ai`, `Bi` and their derivatives.
//!
//! Two regimes, switched at `|x| = SERIES_SWITCH`:
//!
//! * Maclaurin series `Ai = c1·f − c2·g`, `Bi = √3(c1·f + c2·g)`. Near the
//!   origin plain f64 suffices; further out the sums are carried in
//!   double-double so the cancellation in `Ai(x > 0)` and in the oscillatory
//!   branch does not eat the result.
//! * Asymptotic expansions in `ζ = (2/3)|x|^(3/2)` (exponential for `x > 0`,
//!   modulus/phase for `x < 0`). At the switch `ζ ≈ 16.5`, where the
//!   optimally truncated expansion is good to a few ulp.
//!
//! For `x > 0` the exponential factors `e^{∓ζ}` are returned separately in
//! the [`ScaledAiry`] log-scale, so nothing overflows before `x ~ 1e200`.

use core::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use super::ddouble::DoubleDouble as Dd;
use super::scaled::{ScaledAiry, ScaledComplex};
use super::SpecFunError;

/// `|x|` beyond which the asymptotic expansions take over.
pub const SERIES_SWITCH: f64 = 8.5;

const INV_SQRT_PI: f64 = 0.564_189_583_547_756_3;

// Ai(0), -Ai'(0), Bi(0), Bi'(0) as double-double pairs.
const AI0: Dd = Dd::new(0.355_028_053_887_817_2, 2.052_336_324_362_12e-17);
const MAIP0: Dd = Dd::new(0.258_819_403_792_806_8, -2.522_243_111_610_832e-17);
const BI0: Dd = Dd::new(0.614_926_627_446_000_7, 5.089_920_779_489_141_6e-17);
const BIP0: Dd = Dd::new(0.448_288_357_353_826_4, -2.536_323_777_441_730_5e-17);

/// Ai, Ai', Bi, Bi' at one argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiryValues {
    pub ai: ScaledAiry,
    pub aip: ScaledAiry,
    pub bi: ScaledAiry,
    pub bip: ScaledAiry,
}

fn check(x: f64) -> Result<(), SpecFunError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(SpecFunError::Domain { x })
    }
}

/// All four Airy functions at `x`.
pub fn airy(x: f64) -> Result<AiryValues, SpecFunError> {
    check(x)?;
    Ok(eval_all(x))
}

pub fn airy_ai(x: f64) -> Result<ScaledAiry, SpecFunError> {
    check(x)?;
    Ok(ScaledAiry::new(ai_mantissa(x), ai_log_scale(x)))
}

pub fn airy_aip(x: f64) -> Result<ScaledAiry, SpecFunError> {
    airy(x).map(|v| v.aip)
}

pub fn airy_bi(x: f64) -> Result<ScaledAiry, SpecFunError> {
    airy(x).map(|v| v.bi)
}

pub fn airy_bip(x: f64) -> Result<ScaledAiry, SpecFunError> {
    airy(x).map(|v| v.bip)
}

/// `Ci(x) = Bi(x) + i·Ai(x)`, unscaled.
///
/// Fails with [`SpecFunError::Overflow`] once `Bi(x)` no longer fits in an
/// f64 (`x ≳ 104`); use [`airy_ci_scaled`] there.
pub fn airy_ci(x: f64) -> Result<Complex64, SpecFunError> {
    let c = airy_ci_scaled(x)?;
    let v = c.value();
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(SpecFunError::Overflow { function: "Ci", x })
    }
}

pub fn airy_ci_scaled(x: f64) -> Result<ScaledComplex, SpecFunError> {
    check(x)?;
    let (ai, bi) = ai_bi(x);
    Ok(ScaledComplex::from_parts(bi, ai))
}

/// Unscaled `Ai(x)`. Only valid where the value is representable, which
/// holds for every `x < 100`; used on hot paths that stay in that range.
#[inline]
pub(crate) fn ai_unscaled(x: f64) -> f64 {
    ai_mantissa(x) * libm::exp(ai_log_scale(x))
}

/// Unscaled `Ci(x)` for `x < 100`.
#[inline]
pub(crate) fn ci_unscaled(x: f64) -> Complex64 {
    let (ai, bi) = ai_bi(x);
    Complex64::new(bi.value(), ai.value())
}

#[inline]
fn ai_log_scale(x: f64) -> f64 {
    if x > SERIES_SWITCH {
        -zeta(x)
    } else {
        0.0
    }
}

#[inline]
fn zeta(x: f64) -> f64 {
    let z = libm::fabs(x);
    2.0 / 3.0 * z * libm::sqrt(z)
}

/// Ai without its `e^{-ζ}` factor for `x > SERIES_SWITCH`.
fn ai_mantissa(x: f64) -> f64 {
    if x > SERIES_SWITCH {
        let z = zeta(x);
        let s = asym_sum(z, &U, true);
        s * INV_SQRT_PI / (2.0 * libm::sqrt(libm::sqrt(x)))
    } else if x < -SERIES_SWITCH {
        oscillatory(x, false).ai
    } else {
        taylor_ai(x)
    }
}

fn ai_bi(x: f64) -> (ScaledAiry, ScaledAiry) {
    if x > SERIES_SWITCH {
        let z = zeta(x);
        let q = libm::sqrt(libm::sqrt(x));
        let ai = asym_sum(z, &U, true) * INV_SQRT_PI / (2.0 * q);
        let bi = asym_sum(z, &U, false) * INV_SQRT_PI / q;
        (ScaledAiry::new(ai, -z), ScaledAiry::new(bi, z))
    } else {
        let r = if x < -SERIES_SWITCH {
            oscillatory(x, false)
        } else {
            taylor(x)
        };
        (ScaledAiry::from_f64(r.ai), ScaledAiry::from_f64(r.bi))
    }
}

fn eval_all(x: f64) -> AiryValues {
    if x > SERIES_SWITCH {
        let z = zeta(x);
        let q = libm::sqrt(libm::sqrt(x));
        let ai = asym_sum(z, &U, true) * INV_SQRT_PI / (2.0 * q);
        let aip = -q * asym_sum(z, &V, true) * INV_SQRT_PI / 2.0;
        let bi = asym_sum(z, &U, false) * INV_SQRT_PI / q;
        let bip = q * asym_sum(z, &V, false) * INV_SQRT_PI;
        AiryValues {
            ai: ScaledAiry::new(ai, -z),
            aip: ScaledAiry::new(aip, -z),
            bi: ScaledAiry::new(bi, z),
            bip: ScaledAiry::new(bip, z),
        }
    } else {
        let r = if x < -SERIES_SWITCH {
            oscillatory(x, true)
        } else {
            taylor(x)
        };
        AiryValues {
            ai: ScaledAiry::from_f64(r.ai),
            aip: ScaledAiry::from_f64(r.aip),
            bi: ScaledAiry::from_f64(r.bi),
            bip: ScaledAiry::from_f64(r.bip),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Raw {
    ai: f64,
    aip: f64,
    bi: f64,
    bip: f64,
}

// ---------------------------------------------------------------------------
// Maclaurin series (compile time) and Taylor stepping (run time)

const fn abs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

/// Maclaurin sums in double-double:
/// `f = 1 + x·Σ_{k≥1} t_k`, `f' = Σ 3k·t_k`, with `t_k = t_{k-1}·x³/((3k−1)·3k)`;
/// `g = x·Σ_{k≥0} s_k`, `g' = Σ (3k+1)·s_k`; then `Ai = c1·f − c2·g`,
/// `Bi = b1·f + b2·g`.
const fn maclaurin(x: f64) -> Raw {
    let xt = Dd::from_f64(x);
    let x3 = xt.mul_f64(x).mul_f64(x);

    let mut t = xt.mul_f64(x).div_f64(6.0); // t_1 = x²/6
    let mut s = Dd::ONE; // s_0
    let mut f1 = Dd::ZERO;
    let mut f2 = Dd::ZERO;
    let mut g1 = Dd::ZERO;
    let mut g2 = Dd::ZERO;

    let mut k = 0u32;
    loop {
        // s_k and t_{k+1}
        let kf = k as f64;
        let k1 = kf + 1.0;
        g1 = g1.add(s);
        g2 = g2.add(s.mul_f64(3.0 * kf + 1.0));
        f1 = f1.add(t);
        f2 = f2.add(t.mul_f64(3.0 * k1));

        let ts = abs(t.to_f64()) * (3.0 * k1 + 1.0);
        let ss = abs(s.to_f64()) * (3.0 * kf + 2.0);
        let scale = abs(g1.to_f64()) + abs(f1.to_f64()) + 1.0;
        if (k > 1 && ts + ss < 1e-33 * scale) || k > 200 {
            break;
        }

        // t_{k+2} = t_{k+1} · x³ / ((3(k+2)-1)·3(k+2))
        let kn = kf + 2.0;
        t = t.mul(x3).div_f64((3.0 * kn - 1.0) * (3.0 * kn));
        // s_{k+1} = s_k · x³ / (3(k+1)·(3(k+1)+1))
        s = s.mul(x3).div_f64((3.0 * k1) * (3.0 * k1 + 1.0));
        k += 1;
    }

    let f = Dd::ONE.add(xt.mul(f1));
    let g = xt.mul(g1);
    Raw {
        ai: AI0.mul(f).sub(MAIP0.mul(g)).to_f64(),
        aip: AI0.mul(f2).sub(MAIP0.mul(g2)).to_f64(),
        bi: BI0.mul(f).add(BIP0.mul(g)).to_f64(),
        bip: BI0.mul(f2).add(BIP0.mul(g2)).to_f64(),
    }
}

/// Anchor spacing of the Taylor table.
const ANCHOR_STEP: f64 = 0.125;
const N_ANCHORS: usize = 137; // −8.5 ..= 8.5

/// `(Ai, Ai', Bi, Bi')` at `x_j = −SERIES_SWITCH + j·ANCHOR_STEP`.
const ANCHOR_TABLE: [Raw; N_ANCHORS] = {
    let mut table = [Raw { ai: 0.0, aip: 0.0, bi: 0.0, bip: 0.0 }; N_ANCHORS];
    let mut j = 0;
    while j < N_ANCHORS {
        table[j] = maclaurin(-SERIES_SWITCH + j as f64 * ANCHOR_STEP);
        j += 1;
    }
    table
};

static ANCHORS: [Raw; N_ANCHORS] = ANCHOR_TABLE;

/// Highest Taylor order kept for Ai alone. With `|h| ≤ 1/16` and
/// `|x₀| ≤ 8.5` the first omitted term is below 1e-21 of the anchor scale.
const AI_ORDER: usize = 16;

/// Taylor coefficients of Ai about each anchor.
static AI_COEFFS: [[f64; AI_ORDER + 1]; N_ANCHORS] = {
    let mut table = [[0.0; AI_ORDER + 1]; N_ANCHORS];
    let mut j = 0;
    while j < N_ANCHORS {
        let x0 = -SERIES_SWITCH + j as f64 * ANCHOR_STEP;
        let c = &mut table[j];
        c[0] = ANCHOR_TABLE[j].ai;
        c[1] = ANCHOR_TABLE[j].aip;
        let mut n = 2;
        while n <= AI_ORDER {
            let prev2 = if n >= 3 { c[n - 3] } else { 0.0 };
            c[n] = (x0 * c[n - 2] + prev2) / ((n * (n - 1)) as f64);
            n += 1;
        }
        j += 1;
    }
    table
};

/// Taylor expansion about the nearest anchor. The coefficients follow from
/// `y'' = x·y`: `c_{n+2} = (x₀ c_n + c_{n−1}) / ((n+1)(n+2))`. With
/// `|h| ≤ 1/16` the terms fall below an ulp after about fifteen orders.
fn taylor(x: f64) -> Raw {
    let pos = (x + SERIES_SWITCH) / ANCHOR_STEP;
    let j = (libm::round(pos) as usize).min(N_ANCHORS - 1);
    let x0 = -SERIES_SWITCH + j as f64 * ANCHOR_STEP;
    let h = x - x0;
    let a = &ANCHORS[j];

    // Two solutions advanced together: (ai, aip) and (bi, bip).
    let (mut ca_prev, mut ca) = (a.ai, a.aip); // c_0, c_1
    let (mut cb_prev, mut cb) = (a.bi, a.bip);
    let (mut ca_prev2, mut cb_prev2) = (0.0, 0.0); // c_{-1}
    let mut hp = h; // h^n for n = 1
    let (mut ai, mut bi) = (a.ai + a.aip * h, a.bi + a.bip * h);
    let (mut aip, mut bip) = (a.aip, a.bip);
    let mut n = 1.0f64;
    let mut small_before = false;
    // c_{n+1} from c_{n−1} and c_{n−2}.
    loop {
        let na = (x0 * ca_prev + ca_prev2) / (n * (n + 1.0));
        let nb = (x0 * cb_prev + cb_prev2) / (n * (n + 1.0));
        // derivative term (n+1) c_{n+1} h^n uses the current power
        aip += (n + 1.0) * na * hp;
        bip += (n + 1.0) * nb * hp;
        hp *= h;
        let ta = na * hp;
        let tb = nb * hp;
        ai += ta;
        bi += tb;
        ca_prev2 = ca_prev;
        cb_prev2 = cb_prev;
        ca_prev = ca;
        cb_prev = cb;
        ca = na;
        cb = nb;
        n += 1.0;
        let done_a = libm::fabs(ta) <= 1e-17 * (libm::fabs(a.ai) + libm::fabs(a.aip));
        let done_b = libm::fabs(tb) <= 1e-17 * (libm::fabs(a.bi) + libm::fabs(a.bip));
        // Coefficients about x₀ = 0 vanish every third order, so require
        // two negligible terms in a row.
        let small = done_a && done_b;
        if n > 40.0 || (small && small_before) {
            break;
        }
        small_before = small;
    }
    Raw { ai, aip, bi, bip }
}

/// Ai alone from the same expansion, for the quadrature inner loops.
fn taylor_ai(x: f64) -> f64 {
    let pos = (x + SERIES_SWITCH) / ANCHOR_STEP;
    let j = ((pos + 0.5) as usize).min(N_ANCHORS - 1);
    let h = x - (-SERIES_SWITCH + j as f64 * ANCHOR_STEP);
    AI_COEFFS[j].iter().rev().fold(0.0, |acc, &c| acc * h + c)
}

// ---------------------------------------------------------------------------
// Asymptotic expansions

const N_COEF: usize = 64;

/// `u_k = (2k+1)(2k+3)…(6k−1) / (216^k k!)`.
const U: [f64; N_COEF] = {
    let mut u = [0.0; N_COEF];
    u[0] = 1.0;
    let mut k = 1;
    while k < N_COEF {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        k += 1;
    }
    u
};

/// `v_k = −(6k+1)/(6k−1) · u_k`, `v_0 = 1`.
const V: [f64; N_COEF] = {
    let mut v = [0.0; N_COEF];
    v[0] = 1.0;
    let mut k = 1;
    while k < N_COEF {
        let kf = k as f64;
        v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * U[k];
        k += 1;
    }
    v
};

/// `Σ (±1)^k c_k ζ^{-k}`, truncated at the smallest term.
fn asym_sum(z: f64, c: &[f64; N_COEF], alternating: bool) -> f64 {
    let inv = 1.0 / z;
    let mut sum = c[0];
    let mut p = 1.0;
    let mut prev = f64::INFINITY;
    for (k, &ck) in c.iter().enumerate().skip(1) {
        p *= inv;
        let term = ck * p;
        let mag = libm::fabs(term);
        if mag >= prev {
            break;
        }
        sum += if alternating && k % 2 == 1 { -term } else { term };
        if mag < 1e-17 * libm::fabs(sum) {
            break;
        }
        prev = mag;
    }
    sum
}

/// Even/odd split sums `Σ(−1)^k c_{2k} ζ^{−2k}` and `Σ(−1)^k c_{2k+1} ζ^{−2k−1}`.
fn split_sums(z: f64, c: &[f64; N_COEF]) -> (f64, f64) {
    let inv = 1.0 / z;
    let mut even = c[0];
    let mut odd = 0.0;
    let mut p = 1.0;
    let mut prev = f64::INFINITY;
    for (k, &ck) in c.iter().enumerate().skip(1) {
        p *= inv;
        let term = ck * p;
        let mag = libm::fabs(term);
        if mag >= prev {
            break;
        }
        // k = 2j or 2j+1 carries sign (−1)^j
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            even += sign * term;
        } else {
            odd += sign * term;
        }
        if mag < 1e-17 {
            break;
        }
        prev = mag;
    }
    (even, odd)
}

fn oscillatory(x: f64, derivs: bool) -> Raw {
    let z = -x;
    let zeta = zeta(z);
    let q = libm::sqrt(libm::sqrt(z));
    let theta = zeta - FRAC_PI_4;
    let (s, c) = libm::sincos(theta);
    let (p, qs) = split_sums(zeta, &U);
    let mut r = Raw {
        ai: (p * c + qs * s) * INV_SQRT_PI / q,
        bi: (-p * s + qs * c) * INV_SQRT_PI / q,
        aip: 0.0,
        bip: 0.0,
    };
    if derivs {
        let (pv, qv) = split_sums(zeta, &V);
        r.aip = q * (pv * s - qv * c) * INV_SQRT_PI;
        r.bip = q * (pv * c + qv * s) * INV_SQRT_PI;
    }
    r
}

/// `1/π`, the Wronskian `Ai·Bi' − Ai'·Bi`.
pub const WRONSKIAN: f64 = 1.0 / PI;
