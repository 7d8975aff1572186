use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_atomlaser"))
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_config() -> Value {
    json!({
        "geometries": [{ "name": "g", "dimensionless": { "a_bar": 10.0, "b_bar": 2.0 } }],
        "detectors": [{ "point": { "r_perp_bar": 0.0, "y_bar": -45.0 } }],
        "nu_bar": { "linspace": { "start": -2.0, "stop": 2.0, "count": 5 } },
        "averaging": "point",
    })
}

/// Data rows of a CSV file: comment lines and the header dropped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn run_cmd(cmd: &str, cfg: &Value, extra: &[&str]) -> (TempDir, Output) {
    let dir = TempDir::new().unwrap();
    let c = write_config(dir.path(), "c.json", cfg);
    let out = dir.path().join("out");
    let mut args = vec![cmd, "--config", c.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    (dir, o)
}

#[test]
fn empty_detector_list_is_a_validation_error() {
    let mut cfg = small_config();
    cfg["detectors"] = json!([]);
    for cmd in ["profile", "dfun"] {
        let (_d, o) = run_cmd(cmd, &cfg, &[]);
        assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
        assert!(stderr(&o).contains("detectors"), "{}", stderr(&o));
    }
}

#[test]
fn unknown_fields_are_rejected_with_their_path() {
    let mut cfg = small_config();
    cfg["geometries"][0]["dimensionless"]["c_bar"] = json!(3.0);
    let (_d, o) = run_cmd("dfun", &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("geometries[0].dimensionless") && e.contains("c_bar"), "{e}");
}

#[test]
fn geometry_needs_exactly_one_form() {
    let mut cfg = small_config();
    cfg["geometries"][0]["trap"] = json!({
        "omega_x_rad_per_s": 600.0, "omega_y_rad_per_s": 2500.0, "omega_z_rad_per_s": 600.0,
        "offset_field_tesla": 1e-4, "atom_number": 1e4, "rf_amplitude_tesla": 1e-10
    });
    let (_d, o) = run_cmd("dfun", &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("geometries[0]"), "{}", stderr(&o));
}

#[test]
fn anisotropic_trap_is_a_validation_error() {
    let mut cfg = small_config();
    cfg["geometries"][0] = json!({ "name": "t", "trap": {
        "omega_x_rad_per_s": 600.0, "omega_y_rad_per_s": 2500.0, "omega_z_rad_per_s": 700.0,
        "offset_field_tesla": 1e-4, "atom_number": 1e4, "rf_amplitude_tesla": 1e-10
    }});
    let (_d, o) = run_cmd("dfun", &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("omega_x == omega_z"), "{}", stderr(&o));
}

#[test]
fn bad_tolerance_and_grid_are_validation_errors() {
    let (_d, o) = run_cmd("dfun", &small_config(), &["--tol", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tolerances"));

    let mut cfg = small_config();
    cfg["nu_bar"] = json!({ "values": [0.0, -1.0] });
    let (_d, o) = run_cmd("dfun", &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nu_bar"));
}

#[test]
fn detector_inside_the_condensate_is_rejected_for_curves() {
    let mut cfg = small_config();
    cfg["detectors"] = json!([{ "point": { "r_perp_bar": 0.0, "y_bar": -1.0 } }]);
    let (_d, o) = run_cmd("dfun", &cfg, &["--method", "scattering"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("below"), "{}", stderr(&o));
}

#[test]
fn missing_config_is_an_io_error() {
    let o = run(&["dfun", "--config", "/nonexistent/c.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let c = write_config(dir.path(), "c.json", &small_config());
    let o = run(&["dfun", "--config", c.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn single_nu_point_gives_one_row() {
    let mut cfg = small_config();
    cfg["nu_bar"] = json!({ "values": [0.5] });
    let (d, o) = run_cmd("dfun", &cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&d.path().join("out/run_dfun_g_d0.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0], "5.0000000000000000e-1");
    assert_eq!(r[0][5], "ok");
    let diag: Value = serde_json::from_str(&fs::read_to_string(d.path().join("out/run_dfun_diagnostics.json")).unwrap()).unwrap();
    assert!(diag["curves"][0]["diagnostics"]["error"].is_string());
}

#[test]
fn dfun_header_and_columns() {
    let (d, o) = run_cmd("dfun", &small_config(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(d.path().join("out/run_dfun_g_d0.csv")).unwrap();
    let comments: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(comments.iter().any(|l| l.starts_with(&format!("# atomlaser {}", env!("CARGO_PKG_VERSION")))));
    assert!(comments.iter().any(|l| l.starts_with("# config_sha256: ") && l.len() == "# config_sha256: ".len() + 64));
    assert!(comments.iter().any(|l| l.contains("rel_tol=1e-6")));
    assert!(comments.iter().any(|l| l.starts_with("# averaging: point")));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "nu_bar,D_intuitive,D_scattering,error_intuitive,error_scattering,status");
    let r = rows(&d.path().join("out/run_dfun_g_d0.csv"));
    assert_eq!(r.len(), 5);
    for row in &r {
        let di: f64 = row[1].parse().unwrap();
        let ds: f64 = row[2].parse().unwrap();
        assert!(di > 0.0 && ds > 0.0);
        // 17 significant digits
        assert_eq!(row[1].split('e').next().unwrap().len(), 18);
    }
}

#[test]
fn single_method_leaves_the_other_column_empty() {
    let mut cfg = small_config();
    cfg["nu_bar"] = json!({ "values": [0.0] });
    let (d, o) = run_cmd("dfun", &cfg, &["--method", "intuitive"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&d.path().join("out/run_dfun_g_d0.csv"));
    assert!(!r[0][1].is_empty());
    assert!(r[0][2].is_empty());
}

#[test]
fn config_hash_ignores_threads_and_output_location() {
    let (d1, o1) = run_cmd("dfun", &small_config(), &["--threads", "1"]);
    let (d2, o2) = run_cmd("dfun", &small_config(), &["--threads", "3"]);
    assert!(o1.status.success() && o2.status.success());
    let a = fs::read(d1.path().join("out/run_dfun_g_d0.csv")).unwrap();
    let b = fs::read(d2.path().join("out/run_dfun_g_d0.csv")).unwrap();
    assert_eq!(a, b);

    let (d3, _) = run_cmd("dfun", &small_config(), &["--tol", "1e-7"]);
    let c = fs::read_to_string(d3.path().join("out/run_dfun_g_d0.csv")).unwrap();
    let hash = |t: &str| t.lines().find(|l| l.starts_with("# config_sha256")).unwrap().to_owned();
    assert_ne!(hash(&c), hash(&String::from_utf8(a).unwrap()));
}

fn convolve_config(spectrum: Value) -> Value {
    let mut cfg = small_config();
    cfg["nu_bar"] = json!({ "linspace": { "start": -3.0, "stop": 3.0, "count": 13 } });
    cfg["noise"] = json!({
        "spectrum": spectrum,
        "delta_bar": { "values": [-1.0, 0.0, 0.5] },
        "coupling_bar": 0.25,
    });
    cfg
}

#[test]
fn zero_spectrum_gives_all_zero_rates() {
    let (d, o) = run_cmd("convolve", &convolve_config(json!({ "white": { "level": 0.0 } })), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&d.path().join("out/run_convolve_g_d0.csv"));
    assert_eq!(r.len(), 3);
    for row in r {
        assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn monochromatic_spectrum_reproduces_the_curve() {
    let (dc, o) = run_cmd(
        "convolve",
        &convolve_config(json!({ "monochromatic": { "omega0_bar": 0.5, "weight": 2.0 } })),
        &[],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (dd, o) = run_cmd("dfun", &convolve_config(json!({ "white": { "level": 0.0 } })), &[]);
    assert!(o.status.success());
    let n = rows(&dc.path().join("out/run_convolve_g_d0.csv"));
    let d = rows(&dd.path().join("out/run_dfun_g_d0.csv"));
    let d_at = |nu: f64| {
        let row = d.iter().find(|r| r[0].parse::<f64>().unwrap() == nu).unwrap();
        (row[1].parse::<f64>().unwrap(), row[2].parse::<f64>().unwrap())
    };
    for row in n {
        let delta: f64 = row[0].parse().unwrap();
        let (di, ds) = d_at(0.5 - delta);
        let pref = 0.25f64 * 0.25 * 2.0;
        assert_eq!(row[1].parse::<f64>().unwrap(), pref * di);
        assert_eq!(row[2].parse::<f64>().unwrap(), pref * ds);
    }
}

#[test]
fn spectrum_beyond_the_curve_is_a_coverage_error() {
    let cfg = convolve_config(json!({ "monochromatic": { "omega0_bar": 5.0, "weight": 1.0 } }));
    let (_d, o) = run_cmd("convolve", &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("does not cover"), "{}", stderr(&o));
}

#[test]
fn dimensionless_convolve_needs_a_coupling() {
    let mut cfg = convolve_config(json!({ "white": { "level": 1.0 } }));
    cfg["noise"].as_object_mut().unwrap().remove("coupling_bar");
    let (_d, o) = run_cmd("convolve", &cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("coupling_bar"));
}

#[test]
fn profile_covers_points_inside_and_below_the_source() {
    let mut cfg = small_config();
    cfg["nu_bar"] = json!({ "values": [0.0] });
    cfg["geometries"][0]["dimensionless"] = json!({ "a_bar": 5.0, "b_bar": 2.0 });
    cfg["detectors"] = json!([
        { "point": { "r_perp_bar": 0.0, "y_bar": -30.0 } },
        { "point": { "r_perp_bar": 0.3, "y_bar": 0.0 } }
    ]);
    let (d, o) = run_cmd("profile", &cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&d.path().join("out/run_profile_g.csv"));
    assert_eq!(r.len(), 2);
    for row in &r {
        assert_eq!(row.len(), 6);
        assert!(row[3].parse::<f64>().unwrap() >= 0.0);
        assert!(row[4].parse::<f64>().unwrap().is_finite());
    }
}

#[test]
fn selftest_passes_and_reports_every_check() {
    let o = run(&["selftest"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let lines: Vec<Value> = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let summary = lines.last().unwrap();
    assert_eq!(summary["failed"], 0);
    let names: Vec<&str> = lines[..lines.len() - 1].iter().map(|c| c["name"].as_str().unwrap()).collect();
    for n in ["wronskian.dense_grid", "green.jump", "green.continuity", "green.ode_residual", "averaging.method_agreement"] {
        assert!(names.contains(&n), "{n} missing");
    }
}

#[test]
fn tightened_selftest_tolerance_keeps_the_pass_set() {
    let pass_set = |args: &[&str]| -> Vec<(String, bool)> {
        let o = run(args);
        String::from_utf8(o.stdout)
            .unwrap()
            .lines()
            .filter_map(|l| {
                let v: Value = serde_json::from_str(l).unwrap();
                Some((v["name"].as_str()?.to_owned(), v["pass"].as_bool()?))
            })
            .collect()
    };
    let base = pass_set(&["selftest"]);
    let tight = pass_set(&["selftest", "--tol", "1e-9"]);
    assert_eq!(base, tight);
    assert!(base.iter().all(|(_, p)| *p));
}

#[test]
fn hidden_specfun_suite_runs() {
    let o = run(&["selftest", "specfun"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().contains("specfun.reference_table"));
    let help = run(&["selftest", "--help"]);
    assert!(!String::from_utf8(help.stdout).unwrap().contains("specfun"));
}

#[test]
fn corrupted_constants_fail_the_jump_suite() {
    let dir = TempDir::new().unwrap();
    let table = json!({
        "planck_j_s": 6.626_070_15e-34,
        "hbar_j_s": 1.06e-34,
        "bohr_magneton_j_per_t": 9.274_010_078_3e-24,
        "atomic_mass_unit_kg": 1.660_539_066_60e-27,
        "rb87_mass_kg": 1.443_160_648e-25,
        "rb87_scattering_length_m": 5.4e-9,
        "rb87_lande_g_f": -0.5,
        "standard_gravity_m_per_s2": 9.806_65
    });
    let p = write_config(dir.path(), "constants.json", &table);
    let o = run(&["selftest", "green", "--constants", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let out = String::from_utf8(o.stdout).unwrap();
    let jump: Value = out
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .find(|v| v["name"] == "green.jump")
        .unwrap();
    assert_eq!(jump["pass"], false);

    let mut good = table;
    good["hbar_j_s"] = json!(1.054_571_817e-34);
    let p = write_config(dir.path(), "constants.json", &good);
    let o = run(&["selftest", "green", "--constants", p.to_str().unwrap()]);
    assert!(o.status.success());
}

/// Every shipped example config parses, validates and runs end to end on a
/// thinned grid at loosened tolerance.
#[test]
fn example_configs_run_at_loose_tolerance() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut names: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    names.sort();
    assert!(names.len() >= 5);
    let tmp = TempDir::new().unwrap();
    for path in names {
        let mut cfg: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let thin = |axis: &mut Value, count: u64| {
            if let Some(l) = axis.get_mut("linspace") {
                l["count"] = json!(count.min(l["count"].as_u64().unwrap()));
            }
        };
        thin(&mut cfg["nu_bar"], 3);
        let mut geoms = cfg["geometries"].as_array().unwrap().clone();
        geoms.truncate(1);
        cfg["geometries"] = json!(geoms);
        for d in cfg["detectors"].as_array_mut().unwrap() {
            if let Some(g) = d.get_mut("grid") {
                thin(&mut g["r_perp_bar"], 3);
                thin(&mut g["y_bar"], 3);
            }
        }
        if let Some(n) = cfg.get_mut("noise") {
            thin(&mut n["delta_bar"], 3);
        }
        let cmd = if cfg.get("noise").is_some() {
            "convolve"
        } else if cfg["detectors"][0].get("grid").is_some() {
            "profile"
        } else {
            "dfun"
        };
        let stem = path.file_stem().unwrap().to_str().unwrap();
        let c = write_config(tmp.path(), &format!("{stem}.json"), &cfg);
        let out = tmp.path().join(stem);
        let o = run(&[cmd, "--config", c.to_str().unwrap(), "--out", out.to_str().unwrap(), "--tol", "1e-3"]);
        assert!(o.status.success(), "{stem}: {}", stderr(&o));
        assert!(fs::read_dir(&out).unwrap().count() >= 1);
    }
}
