//! JSON run configuration.
//!
//! Physical inputs carry their unit in the field name; frame quantities end
//! in `_bar`. Unknown fields are rejected everywhere.

use std::path::{Path, PathBuf};

use atomlaser_core::model::{
    derive_params, to_dimensionless, AtomSpecies, Condensate, ConstantsTable, TrapGeometry,
};
use atomlaser_core::outcoupling::Method;
use atomlaser_core::quadrature::QuadSpec;
use atomlaser_core::spectra::{Averaging, NoiseSpectrum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub species: Species,
    pub geometries: Vec<GeometrySpec>,
    #[serde(default)]
    pub detectors: Vec<DetectorSpec>,
    pub nu_bar: Axis,
    #[serde(default)]
    pub methods: MethodSel,
    #[serde(default)]
    pub averaging: AveragingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    #[default]
    Rb87,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensionless: Option<Dimensionless>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap: Option<Trap>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dimensionless {
    pub a_bar: f64,
    pub b_bar: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trap {
    pub omega_x_rad_per_s: f64,
    pub omega_y_rad_per_s: f64,
    pub omega_z_rad_per_s: f64,
    pub offset_field_tesla: f64,
    pub atom_number: f64,
    pub rf_amplitude_tesla: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity_m_per_s2: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum DetectorSpec {
    Point { r_perp_bar: f64, y_bar: f64 },
    Grid { r_perp_bar: Axis, y_bar: Axis },
}

/// A coordinate axis: evenly spaced or listed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum Axis {
    Linspace { start: f64, stop: f64, count: usize },
    Values(Vec<f64>),
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Axis::Values(v) => v.clone(),
            Axis::Linspace { start, stop, count } => match *count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..n)
                    .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                    .collect(),
            },
        }
    }

    fn validate(&self, path: &str, increasing: bool) -> Result<(), CliError> {
        if let Axis::Linspace { start, stop, count } = self {
            if !(start.is_finite() && stop.is_finite()) {
                return Err(invalid(path, "start and stop must be finite"));
            }
            if *count > 1 && !(stop > start) {
                return Err(invalid(path, "stop must exceed start"));
            }
        }
        let p = self.points();
        if p.is_empty() {
            return Err(invalid(path, "axis has no points"));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(invalid(path, "values must be finite"));
        }
        if increasing && p.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid(path, "values must be strictly increasing"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodSel {
    Intuitive,
    Scattering,
    #[default]
    Both,
}

impl MethodSel {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodSel::Intuitive => vec![Method::Intuitive],
            MethodSel::Scattering => vec![Method::Scattering],
            MethodSel::Both => vec![Method::Intuitive, Method::Scattering],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum AveragingSpec {
    Point,
    /// Window of this many local Airy wavelengths.
    Wavelengths(f64),
    /// Fixed window width in `l0`.
    TopHatBar(f64),
}

impl Default for AveragingSpec {
    fn default() -> Self {
        AveragingSpec::Wavelengths(1.0)
    }
}

impl AveragingSpec {
    pub fn to_core(self) -> Averaging {
        match self {
            AveragingSpec::Point => Averaging::Point,
            AveragingSpec::Wavelengths(count) => Averaging::Wavelengths { count },
            AveragingSpec::TopHatBar(width) => Averaging::TopHat { width },
        }
    }

    pub fn describe(self) -> String {
        match self {
            AveragingSpec::Point => "point".into(),
            AveragingSpec::Wavelengths(n) => format!("top-hat over {n} local wavelength(s) 2pi/sqrt(nu - y)"),
            AveragingSpec::TopHatBar(w) => format!("top-hat of width {w} l0"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub spectrum: SpectrumSpec,
    pub delta_bar: Axis,
    /// Drive coupling `η` in frame units; derived from the trap when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_bar: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SpectrumSpec {
    Monochromatic { omega0_bar: f64, weight: f64 },
    White { level: f64 },
    Tabulated { start_bar: f64, step_bar: f64, values: Vec<f64> },
    Sum(Vec<SpectrumSpec>),
}

impl SpectrumSpec {
    pub fn to_core(&self) -> NoiseSpectrum {
        match self {
            SpectrumSpec::Monochromatic { omega0_bar, weight } => {
                NoiseSpectrum::Monochromatic { omega0: *omega0_bar, weight: *weight }
            }
            SpectrumSpec::White { level } => NoiseSpectrum::White { level: *level },
            SpectrumSpec::Tabulated { start_bar, step_bar, values } => NoiseSpectrum::Tabulated {
                start: *start_bar,
                step: *step_bar,
                values: values.clone(),
            },
            SpectrumSpec::Sum(parts) => NoiseSpectrum::Sum(parts.iter().map(Self::to_core).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub panel_nodes: usize,
    pub tail_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let q = QuadSpec::default();
        Self {
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_panels: q.max_panels,
            panel_nodes: q.panel_nodes,
            tail_threshold: q.tail_threshold,
        }
    }
}

impl Tolerances {
    pub fn quad_spec(&self) -> QuadSpec {
        QuadSpec {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_panels: self.max_panels,
            panel_nodes: self.panel_nodes,
            tail_threshold: self.tail_threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub prefix: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), prefix: "run".into() }
    }
}

/// Constants table as read from JSON, SI units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsFile {
    pub planck_j_s: f64,
    pub hbar_j_s: f64,
    pub bohr_magneton_j_per_t: f64,
    pub atomic_mass_unit_kg: f64,
    pub rb87_mass_kg: f64,
    pub rb87_scattering_length_m: f64,
    pub rb87_lande_g_f: f64,
    pub standard_gravity_m_per_s2: f64,
}

impl From<ConstantsFile> for ConstantsTable {
    fn from(c: ConstantsFile) -> Self {
        ConstantsTable {
            planck: c.planck_j_s,
            hbar: c.hbar_j_s,
            bohr_magneton: c.bohr_magneton_j_per_t,
            atomic_mass_unit: c.atomic_mass_unit_kg,
            rb87_mass: c.rb87_mass_kg,
            rb87_scattering_length: c.rb87_scattering_length_m,
            rb87_lande_g_f: c.rb87_lande_g_f,
            standard_gravity: c.standard_gravity_m_per_s2,
        }
    }
}

pub fn load_constants(path: &Path) -> Result<ConstantsTable, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_json::<ConstantsFile>(&text).map(Into::into)
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Validation(format!("{path}: {}", e.into_inner()))
    })
}

fn invalid(path: &str, msg: &str) -> CliError {
    CliError::Validation(format!("{path}: {msg}"))
}

/// One condensate geometry resolved to the frame.
#[derive(Debug, Clone)]
pub struct ResolvedGeometry {
    pub name: String,
    pub condensate: Condensate,
    /// `η` in frame units when the trap fixes it.
    pub coupling_bar: Option<f64>,
}

/// A configuration that passed validation, with every geometry resolved.
#[derive(Debug, Clone)]
pub struct Validated {
    pub config: RunConfig,
    pub geometries: Vec<ResolvedGeometry>,
    pub detectors: Vec<(f64, f64)>,
    pub nu: Vec<f64>,
    pub hash: String,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        parse_json(text)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical JSON of everything that affects numbers.
    /// Output location and thread count are excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSpec::default();
        c.threads = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(self, table: &ConstantsTable) -> Result<Validated, CliError> {
        if self.geometries.is_empty() {
            return Err(invalid("geometries", "at least one geometry is required"));
        }
        let mut geometries = Vec::with_capacity(self.geometries.len());
        for (i, g) in self.geometries.iter().enumerate() {
            let path = format!("geometries[{i}]");
            if g.name.is_empty() || !g.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(invalid(&format!("{path}.name"), "use letters, digits, '-' or '_'"));
            }
            if geometries.iter().any(|r: &ResolvedGeometry| r.name == g.name) {
                return Err(invalid(&format!("{path}.name"), "duplicate name"));
            }
            geometries.push(resolve_geometry(g, &path, table)?);
        }

        let mut detectors = Vec::new();
        for (i, d) in self.detectors.iter().enumerate() {
            let path = format!("detectors[{i}]");
            match d {
                DetectorSpec::Point { r_perp_bar, y_bar } => detectors.push((*r_perp_bar, *y_bar)),
                DetectorSpec::Grid { r_perp_bar, y_bar } => {
                    r_perp_bar.validate(&format!("{path}.grid.r_perp_bar"), true)?;
                    y_bar.validate(&format!("{path}.grid.y_bar"), true)?;
                    for y in y_bar.points() {
                        for r in r_perp_bar.points() {
                            detectors.push((r, y));
                        }
                    }
                }
            }
        }
        if detectors.is_empty() {
            return Err(invalid("detectors", "detector list is empty"));
        }
        for &(r, y) in &detectors {
            if !(r >= 0.0 && r.is_finite() && y.is_finite()) {
                return Err(invalid("detectors", &format!("invalid detector ({r}, {y})")));
            }
        }

        self.nu_bar.validate("nu_bar", true)?;
        let nu = self.nu_bar.points();

        let avg = self.averaging.to_core();
        avg.validate().map_err(|e| invalid("averaging", &e.to_string()))?;

        if let Some(n) = &self.noise {
            n.spectrum.to_core().validate().map_err(|e| invalid("noise.spectrum", &e.to_string()))?;
            n.delta_bar.validate("noise.delta_bar", true)?;
            if let Some(c) = n.coupling_bar {
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(invalid("noise.coupling_bar", "must be non-negative and finite"));
                }
            }
        }

        self.tolerances
            .quad_spec()
            .validate()
            .map_err(|e| invalid("tolerances", &e.to_string()))?;
        if self.output.prefix.is_empty() {
            return Err(invalid("output.prefix", "must not be empty"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        let hash = self.hash();
        Ok(Validated { config: self, geometries, detectors, nu, hash })
    }
}

fn resolve_geometry(g: &GeometrySpec, path: &str, table: &ConstantsTable) -> Result<ResolvedGeometry, CliError> {
    match (&g.dimensionless, &g.trap) {
        (Some(d), None) => {
            let condensate = Condensate::new(d.a_bar, d.b_bar)
                .map_err(|e| invalid(&format!("{path}.dimensionless"), &e.to_string()))?;
            Ok(ResolvedGeometry { name: g.name.clone(), condensate, coupling_bar: None })
        }
        (None, Some(t)) => {
            let trap = TrapGeometry {
                omega_x: t.omega_x_rad_per_s,
                omega_y: t.omega_y_rad_per_s,
                omega_z: t.omega_z_rad_per_s,
                offset_field: t.offset_field_tesla,
                atom_number: t.atom_number,
                rf_amplitude: t.rf_amplitude_tesla,
                gravity: t.gravity_m_per_s2.unwrap_or(table.standard_gravity),
            };
            let p = derive_params(&AtomSpecies::rb87(table), &trap, table)
                .map_err(|e| invalid(&format!("{path}.trap"), &e.to_string()))?;
            let frame = to_dimensionless(&p).map_err(|e| invalid(&format!("{path}.trap"), &e.to_string()))?;
            Ok(ResolvedGeometry {
                name: g.name.clone(),
                condensate: frame.condensate,
                coupling_bar: Some(frame.frequency(p.coupling)),
            })
        }
        _ => Err(invalid(path, "give exactly one of `dimensionless` or `trap`")),
    }
}
