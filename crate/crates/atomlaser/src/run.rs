//! The `profile`, `dfun` and `convolve` commands.

use std::path::PathBuf;

use atomlaser_core::model::ConstantsTable;
use atomlaser_core::outcoupling::{f_scattering_general, Amplitude, DetectorRegion, Method, SourceTransform};
use atomlaser_core::quadrature::Integrator;
use atomlaser_core::spectra::{
    convolve_noise, curve_diagnostics, sample_resolution, CurveMeta, DiagnosticsOptions, ResolutionCurve,
    SamplePair,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{MethodSel, ResolvedGeometry, RunConfig, Validated};
use crate::output::{self, fmt, fmt_opt};
use crate::CliError;

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub rel_tol: Option<f64>,
    pub method: Option<MethodSel>,
}

pub fn prepare(mut config: RunConfig, ov: &Overrides, table: &ConstantsTable) -> Result<Validated, CliError> {
    if let Some(dir) = &ov.out {
        config.output.dir = dir.clone();
    }
    if let Some(t) = ov.threads {
        config.threads = Some(t);
    }
    if let Some(tol) = ov.rel_tol {
        config.tolerances.rel_tol = tol;
    }
    if let Some(m) = ov.method {
        config.methods = m;
    }
    config.validate(table)
}

fn pool(run: &Validated) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(run.config.threads.unwrap_or(1))
        .build()
        .map_err(|e| CliError::Numerical(format!("cannot start worker pool: {e}")))
}

fn integrator(run: &Validated) -> Result<Integrator, CliError> {
    Integrator::new(run.config.tolerances.quad_spec()).map_err(|e| CliError::Validation(e.to_string()))
}

fn status(converged: bool) -> &'static str {
    if converged {
        "ok"
    } else {
        "nonconverged"
    }
}

fn finish(paths: Vec<PathBuf>, failures: usize) -> Result<Vec<PathBuf>, CliError> {
    if failures == 0 {
        Ok(paths)
    } else {
        Err(CliError::NonConvergence { count: failures })
    }
}

fn geometry_comment(g: &ResolvedGeometry) -> String {
    format!(
        "geometry: {} a_bar={} b_bar={}",
        g.name,
        fmt(g.condensate.a_bar()),
        fmt(g.condensate.b_bar())
    )
}

/// Pointwise densities `|f̄|²`, `|F̄|²` over every detector and `ν`.
///
/// Scattering densities inside or above the condensate use the general
/// Green-function route.
pub fn cmd_profile(run: &Validated) -> Result<Vec<PathBuf>, CliError> {
    let integ = integrator(run)?;
    let methods = run.config.methods.methods();
    output::ensure_dir(&run.config.output.dir)?;
    let dets = &run.detectors;
    let region = DetectorRegion {
        r_perp_max: dets.iter().map(|d| d.0).fold(0.0, f64::max),
        y_min: dets.iter().map(|d| d.1).fold(f64::INFINITY, f64::min),
        y_max: dets.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max),
    };
    let pool = pool(run)?;
    let mut paths = Vec::new();
    let mut failures = 0;
    for g in &run.geometries {
        let cond = &g.condensate;
        let rows: Vec<Vec<(Option<Amplitude>, Option<Amplitude>)>> = pool.install(|| {
            run.nu
                .par_iter()
                .map(|&nu| {
                    let st = SourceTransform::build(cond, nu, &region, &integ)?;
                    dets.par_iter()
                        .map(|&(r, y)| {
                            let mut pair = (None, None);
                            for &m in &methods {
                                match m {
                                    Method::Intuitive => pair.0 = Some(st.intuitive(r, y)?),
                                    Method::Scattering if y < -cond.b_bar() => pair.1 = Some(st.scattering(r, y)?),
                                    Method::Scattering => pair.1 = Some(f_scattering_general(cond, nu, r, y, &integ)?),
                                }
                            }
                            Ok(pair)
                        })
                        .collect::<Result<Vec<_>, CliError>>()
                })
                .collect::<Result<Vec<_>, CliError>>()
        })?;

        let mut out = Vec::with_capacity(run.nu.len() * dets.len());
        for (nu, block) in run.nu.iter().zip(&rows) {
            for (&(r, y), (ai, sc)) in dets.iter().zip(block) {
                let ok = ai.is_none_or(|a| a.converged) && sc.is_none_or(|a| a.converged);
                failures += usize::from(!ok);
                out.push(vec![
                    fmt(*nu),
                    fmt(r),
                    fmt(y),
                    fmt_opt(ai.map(|a| a.density())),
                    fmt_opt(sc.map(|a| a.density())),
                    status(ok).into(),
                ]);
            }
        }
        let mut comments = output::preamble("profile", run);
        comments[4] = "averaging: none (pointwise density)".into();
        comments.push(geometry_comment(g));
        let path = output::output_path(run, &format!("profile_{}", g.name), "csv");
        output::write_csv(
            &path,
            &comments,
            &["nu_bar", "r_perp_bar", "y_bar", "density_intuitive", "density_scattering", "status"],
            &out,
        )?;
        paths.push(path);
    }
    finish(paths, failures)
}

/// Resolution curves of one geometry, per detector, as
/// `(intuitive, scattering)`.
type CurvePair = (Option<ResolutionCurve>, Option<ResolutionCurve>);

fn compute_curves(
    run: &Validated,
    g: &ResolvedGeometry,
    integ: &Integrator,
    pool: &rayon::ThreadPool,
) -> Result<Vec<CurvePair>, CliError> {
    let methods = run.config.methods.methods();
    let averaging = run.config.averaging.to_core();
    let cond = &g.condensate;
    if methods.contains(&Method::Scattering) {
        for &(r, y) in &run.detectors {
            let (_, top) = averaging.extent(y, run.nu[0]);
            if !(top < -cond.b_bar()) {
                return Err(CliError::Validation(format!(
                    "detectors: ({r}, {y}) with its averaging window reaches y = {top}, not below the bottom \
                     of geometry `{}` at {}; resolution curves need detectors below the condensate",
                    g.name,
                    -cond.b_bar()
                )));
            }
        }
    }
    let tasks: Vec<(usize, f64)> = (0..run.detectors.len())
        .flat_map(|d| run.nu.iter().map(move |&nu| (d, nu)))
        .collect();
    let samples = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(d, nu)| {
                let (r, y) = run.detectors[d];
                sample_resolution(cond, nu, r, y, averaging, &methods, integ).map_err(CliError::from)
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let meta = CurveMeta {
        a_bar: cond.a_bar(),
        b_bar: cond.b_bar(),
        rel_tol: integ.spec().rel_tol,
        abs_tol: integ.spec().abs_tol,
        averaging,
    };
    let n = run.nu.len();
    Ok(run
        .detectors
        .iter()
        .enumerate()
        .map(|(d, &(r_perp, y_bar))| {
            let chunk = &samples[d * n..(d + 1) * n];
            let curve = |method: Method, pick: fn(&_) -> Option<_>| -> Option<ResolutionCurve> {
                let points: Option<Vec<_>> = chunk.iter().map(pick).collect();
                points.map(|points| ResolutionCurve { r_perp, y_bar, method, points, meta })
            };
            (
                curve(Method::Intuitive, |s: &SamplePair| s.intuitive),
                curve(Method::Scattering, |s: &SamplePair| s.scattering),
            )
        })
        .collect())
}

fn detector_comment(d: usize, (r, y): (f64, f64)) -> String {
    format!("detector {d}: r_perp_bar={} y_bar={}", fmt(r), fmt(y))
}

fn diagnostics_json(curve: &ResolutionCurve) -> Value {
    match curve_diagnostics(curve, &DiagnosticsOptions::default()) {
        Ok(d) => json!({
            "peak_position_bar": d.peak_position,
            "peak_value": d.peak_value,
            "fwhm_bar": d.fwhm,
            "left_half_width_bar": d.left_half_width,
            "right_half_width_bar": d.right_half_width,
            "asymmetry": d.asymmetry,
            "oscillation_period_bar": d.oscillation_period,
            "oscillation_amplitude": d.oscillation_amplitude,
            "detrended_sign_changes": d.sign_changes,
            "local_maxima": d.local_maxima,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Resolution curves `D(ν)` per geometry and detector, plus a diagnostics
/// JSON with FWHM, asymmetry and oscillation measures of every curve.
pub fn cmd_dfun(run: &Validated) -> Result<Vec<PathBuf>, CliError> {
    let integ = integrator(run)?;
    output::ensure_dir(&run.config.output.dir)?;
    let pool = pool(run)?;
    let mut paths = Vec::new();
    let mut failures = 0;
    let mut diag = Vec::new();
    for g in &run.geometries {
        let curves = compute_curves(run, g, &integ, &pool)?;
        for (d, (ci, cs)) in curves.iter().enumerate() {
            let mut rows = Vec::with_capacity(run.nu.len());
            for (i, &nu) in run.nu.iter().enumerate() {
                let pi = ci.as_ref().map(|c| c.points[i]);
                let ps = cs.as_ref().map(|c| c.points[i]);
                let ok = pi.is_none_or(|p| p.converged) && ps.is_none_or(|p| p.converged);
                failures += usize::from(!ok);
                rows.push(vec![
                    fmt(nu),
                    fmt_opt(pi.map(|p| p.d)),
                    fmt_opt(ps.map(|p| p.d)),
                    fmt_opt(pi.map(|p| p.error)),
                    fmt_opt(ps.map(|p| p.error)),
                    status(ok).into(),
                ]);
            }
            let mut comments = output::preamble("dfun", run);
            comments.push(geometry_comment(g));
            comments.push(detector_comment(d, run.detectors[d]));
            let path = output::output_path(run, &format!("dfun_{}_d{d}", g.name), "csv");
            output::write_csv(
                &path,
                &comments,
                &["nu_bar", "D_intuitive", "D_scattering", "error_intuitive", "error_scattering", "status"],
                &rows,
            )?;
            paths.push(path);
            for c in [ci, cs].into_iter().flatten() {
                diag.push(json!({
                    "geometry": g.name,
                    "a_bar": g.condensate.a_bar(),
                    "b_bar": g.condensate.b_bar(),
                    "detector": d,
                    "r_perp_bar": c.r_perp,
                    "y_bar": c.y_bar,
                    "method": c.method.name(),
                    "diagnostics": diagnostics_json(c),
                }));
            }
        }
    }
    let path = output::output_path(run, "dfun_diagnostics", "json");
    output::write_json(
        &path,
        &json!({
            "version": output::VERSION,
            "config_sha256": run.hash,
            "averaging": run.config.averaging.describe(),
            "curves": diag,
        }),
    )?;
    paths.push(path);
    finish(paths, failures)
}

/// Outcoupled rate `N(Δ)` for the configured noise spectrum, from
/// resolution curves computed on the `ν` grid.
pub fn cmd_convolve(run: &Validated) -> Result<Vec<PathBuf>, CliError> {
    let noise = run
        .config
        .noise
        .as_ref()
        .ok_or_else(|| CliError::Validation("noise: required by `convolve`".into()))?;
    let spectrum = noise.spectrum.to_core();
    let deltas = noise.delta_bar.points();
    for g in &run.geometries {
        if noise.coupling_bar.or(g.coupling_bar).is_none() {
            return Err(CliError::Validation(format!(
                "noise.coupling_bar: required for dimensionless geometry `{}`",
                g.name
            )));
        }
    }
    let integ = integrator(run)?;
    output::ensure_dir(&run.config.output.dir)?;
    let pool = pool(run)?;
    let rel_tol = run.config.tolerances.rel_tol;
    let mut paths = Vec::new();
    let mut failures = 0;
    for g in &run.geometries {
        let eta = noise.coupling_bar.or(g.coupling_bar).expect("checked above");
        let curves = compute_curves(run, g, &integ, &pool)?;
        for (d, (ci, cs)) in curves.iter().enumerate() {
            let conv = |c: &Option<ResolutionCurve>, delta: f64| {
                c.as_ref().map(|c| convolve_noise(c, &spectrum, delta, eta)).transpose()
            };
            let converged = ci.as_ref().is_none_or(|c| c.all_converged())
                && cs.as_ref().is_none_or(|c| c.all_converged());
            let mut rows = Vec::with_capacity(deltas.len());
            for &delta in &deltas {
                let ni = conv(ci, delta)?;
                let ns = conv(cs, delta)?;
                let truncated = [ni, ns]
                    .iter()
                    .flatten()
                    .any(|n| n.tail_bound > rel_tol * n.value.abs());
                failures += usize::from(!converged);
                let flag = match (converged, truncated) {
                    (false, _) => "nonconverged",
                    (true, true) => "truncated",
                    (true, false) => "ok",
                };
                rows.push(vec![
                    fmt(delta),
                    fmt_opt(ni.map(|n| n.value)),
                    fmt_opt(ns.map(|n| n.value)),
                    fmt_opt(ni.map(|n| n.tail_bound)),
                    fmt_opt(ns.map(|n| n.tail_bound)),
                    flag.into(),
                ]);
            }
            let mut comments = output::preamble("convolve", run);
            comments.push(geometry_comment(g));
            comments.push(detector_comment(d, run.detectors[d]));
            comments.push(format!(
                "curve grid: nu_bar in [{}, {}] with {} points; coupling_bar={}",
                fmt(run.nu[0]),
                fmt(run.nu[run.nu.len() - 1]),
                run.nu.len(),
                fmt(eta)
            ));
            comments.push("tail_*: trapezoid weight of the curve ends, a bound scale for the truncated tails".into());
            let path = output::output_path(run, &format!("convolve_{}_d{d}", g.name), "csv");
            output::write_csv(
                &path,
                &comments,
                &["delta_bar", "N_intuitive", "N_scattering", "tail_intuitive", "tail_scattering", "status"],
                &rows,
            )?;
            paths.push(path);
        }
    }
    finish(paths, failures)
}

