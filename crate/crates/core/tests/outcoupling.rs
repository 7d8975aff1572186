use std::f64::consts::{FRAC_PI_2, PI};

use atomlaser_core::model::Condensate;
use atomlaser_core::outcoupling::{
    f_1d, f_intuitive, f_scattering, f_scattering_general, green_1d, overlap_cyl, source_integral,
    source_integral_nested, Condensate1d, DetectorRegion, OutcouplingError, ResonantShell, SourceTransform,
};
use atomlaser_core::quadrature::{Integrator, QuadSpec};
use atomlaser_core::specfun::{airy_ai, bessel_j0, sph_j1_over_arg};
use atomlaser_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn integ() -> Integrator {
    Integrator::new(QuadSpec::default()).unwrap()
}

fn ai(x: f64) -> f64 {
    airy_ai(x).unwrap().value()
}

#[test]
fn overlap_matches_monte_carlo_over_the_ellipsoid() {
    // Unreduced 3D product of the k⊥ = 0, Ē = 0 basis state with the
    // condensate, sampled uniformly in the bounding box. Transverse lengths
    // in units of ā, vertical in l0.
    let c = Condensate::new(20.0, 10.0).unwrap();
    let (a, b) = (c.a_bar(), c.b_bar());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let n = 10_000_000usize;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let x: f64 = rng.gen_range(-1.0..1.0);
        let z: f64 = rng.gen_range(-1.0..1.0);
        let y: f64 = rng.gen_range(-b..b);
        let v = c.value((x * x + z * z).sqrt(), y) * ai(y);
        s += v;
        s2 += v * v;
    }
    let vol = 8.0 * b * a * a;
    let mean = s / n as f64;
    let mc = vol * mean;
    let stderr = vol * ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    let q = overlap_cyl(&c, 0.0, 0.0, &integ()).unwrap();
    assert!(q.converged);
    let rel = (q.value - mc).abs() / q.value.abs();
    assert!(stderr / q.value.abs() < 2e-3, "sampling error too large: {stderr}");
    assert!(rel < 5e-3, "quadrature {} vs monte carlo {mc} ± {stderr}", q.value);
}

#[test]
fn closed_form_radial_integral_matches_nested_route() {
    let spec = QuadSpec { rel_tol: 1e-8, abs_tol: 1e-14, ..QuadSpec::default() };
    let it = Integrator::new(spec).unwrap();
    for (a, b, k, e) in [(20.0, 10.0, 0.0, 0.0), (10.0, 5.0, 3.5, -2.0), (5.0, 10.0, 12.0, 4.0), (10.0, 2.0, 1.0, -6.0)] {
        let c = Condensate::new(a, b).unwrap();
        let fast = source_integral(&c, k, e, &it).unwrap();
        let slow = source_integral_nested(&c, k, e, &it).unwrap();
        assert!(fast.converged && slow.converged);
        let scale = fast.value.abs().max(1e-3);
        assert!((fast.value - slow.value).abs() < 1e-7 * scale, "({a},{b},{k},{e}): {} vs {}", fast.value, slow.value);
    }
}

#[test]
fn overlap_vanishes_beyond_the_airy_tail() {
    let c = Condensate::new(10.0, 5.0).unwrap();
    let it = integ();
    let t = it.spec().tail_threshold;
    // Airy argument above the threshold everywhere on the support.
    let e = -c.b_bar() - t - 0.5;
    assert_eq!(overlap_cyl(&c, 0.0, e, &it).unwrap().value, 0.0);
    // The literal route sees only the exponentially small tail.
    let nested = source_integral_nested(&c, 0.0, e, &it).unwrap().value;
    assert!(nested.abs() < 1e-9, "{nested}");
}

#[test]
fn thin_disc_limit_is_continuous() {
    // Q/b̄ → Ai(−Ē) ∫cos⁴θ j₁(k cos θ)/(k cos θ) dθ as b̄ → 0. Richardson
    // extrapolation of the O(b̄²) approach lands on the limit.
    let it = Integrator::new(QuadSpec { rel_tol: 1e-10, abs_tol: 0.0, ..QuadSpec::default() }).unwrap();
    for (k, e) in [(0.0, 0.5), (3.0, -1.5)] {
        let disc = {
            // Midpoint rule, independent of the library rule.
            let n = 200_000;
            let h = PI / n as f64;
            (0..n)
                .map(|i| {
                    let t = -FRAC_PI_2 + (i as f64 + 0.5) * h;
                    t.cos().powi(4) * sph_j1_over_arg(k * t.cos()) * h
                })
                .sum::<f64>()
        };
        if k == 0.0 {
            assert!((disc - PI / 8.0).abs() < 1e-10);
        }
        let limit = ai(-e) * disc;
        let q: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&b| source_integral(&Condensate::new(10.0, b).unwrap(), k, e, &it).unwrap().value / b)
            .collect();
        let r1 = (4.0 * q[1] - q[0]) / 3.0;
        let r2 = (4.0 * q[2] - q[1]) / 3.0;
        assert!((q[2] - limit).abs() < (q[1] - limit).abs());
        assert!((r2 - limit).abs() < 1e-6 * limit.abs(), "k={k}: {r1} {r2} vs {limit}");
    }
}

/// Second derivative by the five-point stencil.
fn d2(f: impl Fn(f64) -> Complex64, x: f64, h: f64) -> Complex64 {
    (-f(x + 2.0 * h) + f(x + h) * 16.0 - f(x) * 30.0 + f(x - h) * 16.0 - f(x - 2.0 * h)) / (12.0 * h * h)
}

/// Forward one-sided first derivative, fourth order.
fn d1_side(f: impl Fn(f64) -> Complex64, x: f64, h: f64) -> Complex64 {
    (f(x) * -25.0 + f(x + h) * 48.0 - f(x + 2.0 * h) * 36.0 + f(x + 3.0 * h) * 16.0 - f(x + 4.0 * h) * 3.0) / (12.0 * h)
}

#[test]
fn green_function_solves_the_homogeneous_equation_off_the_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let e: f64 = rng.gen_range(-50.0..5.0);
        let ys: f64 = rng.gen_range(-40.0..10.0);
        let y: f64 = rng.gen_range(-60.0..15.0);
        if (y - ys).abs() <= 0.1 {
            continue;
        }
        let h = 1e-3;
        let g = |t: f64| green_1d(t, ys, e).unwrap();
        let lhs = d2(g, y, h);
        let rhs = g(y) * (y - e);
        let scale = lhs.norm().max(rhs.norm()).max(g(y).norm());
        if scale < 1e-280 {
            continue;
        }
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn green_function_is_continuous_with_unit_derivative_jump() {
    for e in [-50.0, -32.5, -10.0, -1.0, 0.0, 2.0, 5.0] {
        for ys in [-45.0, -10.0, -3.0, 0.0, 4.0] {
            let g = |t: f64| green_1d(t, ys, e).unwrap();
            let g0 = g(ys);
            let eps = 1e-12;
            assert!((g(ys + eps) - g(ys - eps)).norm() <= 1e-10 * g0.norm().max(1e-300) + 1e-14);
            let h = 1e-3;
            let up = d1_side(|t| g(ys + t), 0.0, h);
            let down = -d1_side(|t| g(ys - t), 0.0, h);
            let jump = up - down;
            // (∂² − ȳ + Ē) G = δ in frame units.
            assert!((jump - Complex64::new(1.0, 0.0)).norm() < 1e-6, "E={e} y'={ys}: {jump}");
        }
    }
}

#[test]
fn green_function_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let (y, ys, e) = (rng.gen_range(-60.0..10.0), rng.gen_range(-60.0..10.0), rng.gen_range(-50.0..5.0));
        assert_eq!(green_1d(y, ys, e).unwrap(), green_1d(ys, y, e).unwrap());
    }
}

#[test]
fn green_function_decays_above_and_radiates_below() {
    let (ys, e) = (0.0, 0.0);
    // Above: the modulus falls like Ai, log slope −√(ȳ − Ē).
    for y in [2.0, 5.0, 10.0, 20.0] {
        let l = |t: f64| green_1d(t, ys, e).unwrap().norm().ln();
        let slope = (l(y + 1e-3) - l(y - 1e-3)) / 2e-3;
        assert!((slope + (y - e).sqrt()).abs() < 0.1 * (y - e).sqrt(), "{y}: {slope}");
    }
    // Below: |G|·|ȳ − Ē|^{1/4} settles to π^{1/2}|Ai(ȳ′ − Ē)| and the phase
    // keeps advancing downward.
    let target = PI.sqrt() * ai(ys - e).abs();
    let mut prev_phase = None;
    let mut unwrapped = 0.0;
    for i in 0..400 {
        let y = -30.0 - i as f64 * 0.075;
        let g = green_1d(y, ys, e).unwrap();
        let m = g.norm() * (e - y).powf(0.25);
        assert!((m - target).abs() < 1e-2 * target, "{y}: {m} vs {target}");
        let ph = g.arg();
        if let Some(p) = prev_phase {
            let mut d: f64 = ph - p;
            while d < -PI {
                d += 2.0 * PI;
            }
            while d > PI {
                d -= 2.0 * PI;
            }
            assert!(d > 0.0);
            unwrapped += d;
        }
        prev_phase = Some(ph);
    }
    // Phase gain matches the WKB action (2/3)|ȳ − Ē|^{3/2}.
    let action = |y: f64| 2.0 / 3.0 * (e - y).powf(1.5);
    let want = action(-30.0 - 399.0 * 0.075) - action(-30.0);
    assert!((unwrapped - want).abs() < 1e-2 * want, "{unwrapped} vs {want}");
}

#[test]
fn intuitive_amplitude_is_real() {
    let it = integ();
    for (a, b, nu, r, y) in [(20.0, 10.0, 0.0, 0.0, -45.0), (5.0, 10.0, 3.0, 0.4, -45.25), (10.0, 2.0, -4.0, 1.2, -20.0)] {
        let c = Condensate::new(a, b).unwrap();
        let f = f_intuitive(&c, nu, r, y, &it).unwrap();
        assert!(f.value.im.abs() <= 1e-10 * f.value.norm());
        assert!(f.value.re.is_finite());
    }
}

#[test]
fn resonant_shell_energy_decreases_from_the_drive_frequency() {
    let c = Condensate::new(10.0, 5.0).unwrap();
    let s = ResonantShell::new(1.5, &c);
    assert_eq!(s.energy(0.0), 1.5);
    let mut prev = s.energy(0.0);
    for i in 1..100 {
        let e = s.energy(i as f64 * 0.3);
        assert!(e < prev);
        prev = e;
    }
}

#[test]
fn amplitude_vanishes_far_above_resonance() {
    // With ν below every state that reaches the source, nothing couples out.
    let c = Condensate::new(10.0, 5.0).unwrap();
    let it = integ();
    let nu = -c.b_bar() - it.spec().tail_threshold - 1.0;
    assert_eq!(f_intuitive(&c, nu, 0.0, -45.0, &it).unwrap().value.norm(), 0.0);
    assert_eq!(f_scattering(&c, nu, 0.0, -45.0, &it).unwrap().value.norm(), 0.0);
}

fn first_minimum(st: &SourceTransform, y: f64, r_max: f64, scale: f64) -> f64 {
    let n = 600;
    let d: Vec<f64> = (0..=n)
        .map(|i| st.intuitive(r_max * i as f64 / n as f64, y).unwrap().density())
        .collect();
    let i = (1..n).find(|&i| d[i] < d[i - 1] && d[i] <= d[i + 1]).expect("no radial minimum");
    scale * r_max * i as f64 / n as f64
}

#[test]
fn narrower_source_diffracts_more() {
    let it = integ();
    let y = -45.25;
    let mut nulls = Vec::new();
    for a in [5.0, 20.0] {
        let c = Condensate::new(a, 10.0).unwrap();
        let r_max = 1.5;
        let st = SourceTransform::build(&c, 0.0, &DetectorRegion { r_perp_max: r_max, y_min: y, y_max: y }, &it).unwrap();
        // In units of l0 and of the condensate radius.
        nulls.push((first_minimum(&st, y, r_max, a), first_minimum(&st, y, r_max, 1.0)));
    }
    assert!(nulls[0].0 > nulls[1].0, "{nulls:?}");
    assert!(nulls[0].1 > nulls[1].1, "{nulls:?}");
}

#[test]
fn one_dimensional_amplitude_matches_brute_force() {
    let c = Condensate1d::new(10.0).unwrap();
    let it = integ();
    for (nu, y) in [(0.0, -45.0), (2.5, -30.0), (-4.0, -12.0)] {
        let f = f_1d(&c, nu, y, &it).unwrap();
        let n = 400_000;
        let h = 2.0 * c.b_bar() / n as f64;
        let ov: f64 = (0..n)
            .map(|i| {
                let t = -c.b_bar() + (i as f64 + 0.5) * h;
                c.value(t) * ai(t - nu) * h
            })
            .sum();
        let want = ov * ai(y - nu);
        assert!((f.value.re - want).abs() < 1e-6 * want.abs(), "{nu}: {} vs {want}", f.value.re);
    }
    // High above the source the Airy tail has died out.
    assert!(f_1d(&c, 0.0, 40.0, &it).unwrap().value.norm() < 1e-50);
}

#[test]
fn one_dimensional_point_source_is_pure_airy() {
    // ⟨ψ|Φ¹ᴰ⟩ → √(3b̄/4)·(π/2)·Ai(−ν) as b̄ → 0.
    let b = 1e-4;
    let c = Condensate1d::new(b).unwrap();
    let it = integ();
    for nu in [-3.0, -0.5, 0.0, 1.7] {
        for y in [-45.0, -10.0] {
            let f = f_1d(&c, nu, y, &it).unwrap().value.re;
            let want = (0.75 * b).sqrt() * FRAC_PI_2 * ai(-nu) * ai(y - nu);
            assert!((f - want).abs() < 1e-6 * want.abs() + 1e-30, "{nu},{y}: {f} vs {want}");
        }
    }
}

#[test]
fn wide_condensate_approaches_one_dimensional_shape() {
    let it = integ();
    let (b, y) = (2.0, -45.0);
    let c3 = Condensate::new(40.0, b).unwrap();
    let c1 = Condensate1d::new(b).unwrap();
    let grid: Vec<f64> = (0..17).map(|i| -2.0 + 0.25 * i as f64).collect();
    let d3: Vec<f64> = grid.iter().map(|&nu| f_intuitive(&c3, nu, 0.0, y, &it).unwrap().density()).collect();
    let d1: Vec<f64> = grid.iter().map(|&nu| f_1d(&c1, nu, y, &it).unwrap().density()).collect();
    let p3 = d3.iter().cloned().fold(0.0, f64::max);
    let p1 = d1.iter().cloned().fold(0.0, f64::max);
    let worst = d3.iter().zip(&d1).map(|(a, b)| (a / p3 - b / p1).abs()).fold(0.0, f64::max);
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn general_scattering_matches_closed_form_below_source() {
    let it = integ();
    let c = Condensate::new(5.0, 2.0).unwrap();
    for (nu, r, y) in [(0.0, 0.0, -10.0), (1.5, 0.5, -6.0)] {
        let closed = f_scattering(&c, nu, r, y, &it).unwrap().value;
        let general = f_scattering_general(&c, nu, r, y, &it).unwrap().value;
        assert!((closed - general).norm() < 1e-5 * closed.norm(), "{closed} vs {general}");
    }
}

#[test]
fn closed_form_scattering_rejects_detectors_in_or_above_the_source() {
    let it = integ();
    let c = Condensate::new(5.0, 2.0).unwrap();
    for y in [-2.0, 0.0, 3.0] {
        assert!(matches!(f_scattering(&c, 0.0, 0.0, y, &it), Err(OutcouplingError::UnsupportedRegion { .. })));
        let g = f_scattering_general(&c, 0.0, 0.0, y, &it).unwrap();
        assert!(g.value.norm().is_finite() && g.value.norm() > 0.0);
    }
}

#[test]
fn transform_rejects_detectors_outside_its_region() {
    let c = Condensate::new(5.0, 2.0).unwrap();
    let st = SourceTransform::build(&c, 0.0, &DetectorRegion { r_perp_max: 0.5, y_min: -12.0, y_max: -8.0 }, &integ()).unwrap();
    assert!(st.intuitive(0.2, -10.0).is_ok());
    assert!(matches!(st.intuitive(0.6, -10.0), Err(OutcouplingError::OutsideRegion { .. })));
    assert!(matches!(st.scattering(0.0, -7.0), Err(OutcouplingError::OutsideRegion { .. })));
}

#[test]
fn transform_agrees_with_point_evaluation() {
    let it = integ();
    let c = Condensate::new(10.0, 5.0).unwrap();
    let st = SourceTransform::build(&c, 0.5, &DetectorRegion { r_perp_max: 0.3, y_min: -46.0, y_max: -44.0 }, &it).unwrap();
    for (r, y) in [(0.0, -45.0), (0.3, -44.0), (0.1, -45.7)] {
        let a = st.intuitive(r, y).unwrap();
        let b = f_intuitive(&c, 0.5, r, y, &it).unwrap();
        let tol = 1e-5 * b.value.norm().max(1e-3 * 0.03);
        assert!((a.value - b.value).norm() < tol, "{r},{y}: {} vs {}", a.value, b.value);
    }
}

#[test]
fn airy_states_are_delta_normalized() {
    // ∫dE′ w(E′)⟨ψ_E|ψ_E′⟩ over ȳ ∈ [−L, 20] tends to w(E) for a narrow
    // normalized Gaussian w.
    let spec = QuadSpec { rel_tol: 1e-9, abs_tol: 0.0, ..QuadSpec::default() };
    let outer = Integrator::new(spec).unwrap();
    let inner = outer.nested();
    let (e, sigma) = (1.0, 0.4);
    let w = |x: f64| (-(x - e).powi(2) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt());
    let smeared = |y: f64| inner.integrate(|ep| w(ep) * ai(y - ep), e - 9.0 * sigma, e + 9.0 * sigma, None).unwrap().value;
    let lam = |y: f64| 2.0 * PI / (e - y).max(1.0).sqrt();
    let mut errs = Vec::new();
    for l in [20.0, 60.0, 120.0] {
        let v = outer.integrate(|y| ai(y - e) * smeared(y), -l, 20.0, Some(&lam)).unwrap().value;
        errs.push((v - w(e)).abs() / w(e));
    }
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 1e-4, "{errs:?}");
}

#[test]
fn doubling_the_momentum_cutoff_leaves_the_amplitude_unchanged() {
    let base = QuadSpec::default();
    let c = Condensate::new(10.0, 5.0).unwrap();
    for nu in [-3.0, 0.0, 2.0] {
        let k_ratio_tail = 4.0 * (base.tail_threshold + c.b_bar() + nu) - c.b_bar() - nu;
        let wide = Integrator::new(QuadSpec { tail_threshold: k_ratio_tail, ..base }).unwrap();
        let narrow = Integrator::new(base).unwrap();
        let st_n = SourceTransform::build(&c, nu, &DetectorRegion::point(0.0, -45.0), &narrow).unwrap();
        let st_w = SourceTransform::build(&c, nu, &DetectorRegion::point(0.0, -45.0), &wide).unwrap();
        assert!((st_w.k_max() / st_n.k_max() - 2.0).abs() < 0.01);
        for f in [SourceTransform::intuitive, SourceTransform::scattering] {
            let a = f(&st_n, 0.0, -45.0).unwrap().value;
            let b = f(&st_w, 0.0, -45.0).unwrap().value;
            assert!((a - b).norm() < base.rel_tol * b.norm().max(1e-3), "{nu}: {a} vs {b}");
        }
    }
}

#[test]
fn j0_weight_is_rotation_invariant_by_construction() {
    // Amplitudes take r̄⊥ only; J₀ is even so the reflected point agrees.
    for x in [0.3, 2.0, 17.5] {
        assert_eq!(bessel_j0(x).unwrap(), bessel_j0(-x).unwrap());
    }
}
