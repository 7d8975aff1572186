//! Physical configuration, the dimensionless unit frame, and the
//! Thomas-Fermi condensate.
//!
//! Numerics downstream run in the frame with length `l0 = (ħ²/2M²g)^{1/3}`,
//! energy `Mg·l0` and frequency `Mg·l0/ħ`. Horizontal coordinates are
//! further scaled by the condensate radius `a`.

mod constants;

pub use constants::ConstantsTable;

use core::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("{field} must be positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("atom number must be at least 1, got {0}")]
    AtomNumber(f64),
    #[error("cylindrical symmetry requires omega_x == omega_z (got {omega_x} and {omega_z})")]
    NotCylindrical { omega_x: f64, omega_z: f64 },
}

fn positive(field: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ModelError::NonPositive { field, value })
    }
}

/// Atomic constants of the working substance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpecies {
    /// Mass `M` [kg].
    pub mass: f64,
    /// s-wave scattering length `a_s` [m].
    pub scattering_length: f64,
    pub lande_g_f: f64,
    /// `μ_B` [J/T].
    pub bohr_magneton: f64,
}

impl AtomSpecies {
    pub fn rb87(table: &ConstantsTable) -> Self {
        Self {
            mass: table.rb87_mass,
            scattering_length: table.rb87_scattering_length,
            lande_g_f: table.rb87_lande_g_f,
            bohr_magneton: table.bohr_magneton,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        positive("mass", self.mass)?;
        positive("scattering_length", self.scattering_length)?;
        positive("bohr_magneton", self.bohr_magneton)?;
        if !self.lande_g_f.is_finite() {
            return Err(ModelError::NonPositive { field: "lande_g_f", value: self.lande_g_f });
        }
        Ok(())
    }
}

/// Harmonic magnetic trap with gravity along `−y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapGeometry {
    /// Trap frequencies [rad/s].
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    /// Homogeneous offset field along `z` [T].
    pub offset_field: f64,
    pub atom_number: f64,
    /// Amplitude `B` of the rf drive [T].
    pub rf_amplitude: f64,
    /// [m/s²]
    pub gravity: f64,
}

impl TrapGeometry {
    /// Gravitational sag `y₀ = −g/ω_y²` [m].
    pub fn sag(&self) -> f64 {
        -self.gravity / (self.omega_y * self.omega_y)
    }

    /// Trapping potential `V_T(r)` [J] for an atom of mass `mass`.
    pub fn potential(&self, mass: f64, r: [f64; 3]) -> f64 {
        0.5 * mass
            * (self.omega_x * self.omega_x * r[0] * r[0]
                + self.omega_y * self.omega_y * r[1] * r[1]
                + self.omega_z * self.omega_z * r[2] * r[2])
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        positive("omega_x", self.omega_x)?;
        positive("omega_y", self.omega_y)?;
        positive("omega_z", self.omega_z)?;
        positive("gravity", self.gravity)?;
        if !(self.offset_field.is_finite() && self.offset_field >= 0.0) {
            return Err(ModelError::NonPositive { field: "offset_field", value: self.offset_field });
        }
        if !(self.rf_amplitude.is_finite() && self.rf_amplitude >= 0.0) {
            return Err(ModelError::NonPositive { field: "rf_amplitude", value: self.rf_amplitude });
        }
        if !(self.atom_number.is_finite() && self.atom_number >= 1.0) {
            return Err(ModelError::AtomNumber(self.atom_number));
        }
        Ok(())
    }
}

/// Quantities derived from a species and a trap, all in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub species: AtomSpecies,
    pub trap: TrapGeometry,
    pub hbar: f64,
    /// `μ` [J].
    pub chemical_potential: f64,
    /// `g_s = 4πħ²a_s/M` [J m³].
    pub interaction: f64,
    /// Thomas-Fermi semi-axes along x, y, z [m].
    pub semi_axis_a: f64,
    pub semi_axis_b: f64,
    pub semi_axis_c: f64,
    /// Larmor frequency at the trap minimum [rad/s].
    pub larmor: f64,
    /// Coupling `η = μ_B B √N / (4√2 ħ)` [rad/s].
    pub coupling: f64,
    /// `l0` [m].
    pub natural_length: f64,
    /// `Mg·l0` [J].
    pub energy_unit: f64,
    /// `Mg·l0/ħ` [rad/s].
    pub freq_unit: f64,
}

pub fn derive_params(
    species: &AtomSpecies,
    trap: &TrapGeometry,
    table: &ConstantsTable,
) -> Result<DerivedParams, ModelError> {
    species.validate()?;
    trap.validate()?;
    let hbar = positive("hbar", table.hbar)?;
    let m = species.mass;
    let g = trap.gravity;
    let n = trap.atom_number;

    let interaction = 4.0 * PI * hbar * hbar * species.scattering_length / m;
    let mu = libm::pow(
        15.0 * n * interaction * trap.omega_x * trap.omega_x * trap.omega_y / (8.0 * PI),
        0.4,
    ) * libm::pow(0.5 * m, 0.6);
    let axis = |w: f64| libm::sqrt(2.0 * mu / (m * w * w));
    let l0 = libm::cbrt(hbar * hbar / (2.0 * m * m * g));
    let energy_unit = m * g * l0;
    let larmor = (libm::fabs(species.lande_g_f) * species.bohr_magneton * trap.offset_field
        + m * g * g / (2.0 * trap.omega_y * trap.omega_y))
        / hbar;
    let coupling = species.bohr_magneton * trap.rf_amplitude * libm::sqrt(n)
        / (4.0 * core::f64::consts::SQRT_2 * hbar);

    Ok(DerivedParams {
        species: *species,
        trap: *trap,
        hbar,
        chemical_potential: mu,
        interaction,
        semi_axis_a: axis(trap.omega_x),
        semi_axis_b: axis(trap.omega_y),
        semi_axis_c: axis(trap.omega_z),
        larmor,
        coupling,
        natural_length: l0,
        energy_unit,
        freq_unit: energy_unit / hbar,
    })
}

/// Natural length `l0` for a mass and gravity, independent of any trap.
pub fn natural_length(mass: f64, gravity: f64, hbar: f64) -> f64 {
    libm::cbrt(hbar * hbar / (2.0 * mass * mass * gravity))
}

/// Thomas-Fermi wavefunction on an ellipsoid, normalized to one.
///
/// Units are whatever length unit the semi-axes are given in; the amplitude
/// carries `length^{-3/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondensateTF {
    pub semi_axes: [f64; 3],
    pub amplitude: f64,
}

impl CondensateTF {
    pub fn from_params(p: &DerivedParams) -> Self {
        Self {
            semi_axes: [p.semi_axis_a, p.semi_axis_b, p.semi_axis_c],
            amplitude: libm::sqrt(
                p.chemical_potential / (p.trap.atom_number * p.interaction),
            ),
        }
    }

    /// Ellipsoid with the given semi-axes and the amplitude fixed by
    /// `∫|Φ|² = 1`, i.e. `A² = 15/(8π abc)`.
    pub fn normalized(semi_axes: [f64; 3]) -> Result<Self, ModelError> {
        positive("semi_axis_a", semi_axes[0])?;
        positive("semi_axis_b", semi_axes[1])?;
        positive("semi_axis_c", semi_axes[2])?;
        let vol = semi_axes[0] * semi_axes[1] * semi_axes[2];
        Ok(Self { semi_axes, amplitude: libm::sqrt(15.0 / (8.0 * PI * vol)) })
    }

    /// `1 − Σ (r_i/s_i)²`; positive inside the support.
    pub fn interior(&self, r: [f64; 3]) -> f64 {
        let [a, b, c] = self.semi_axes;
        1.0 - (r[0] / a) * (r[0] / a) - (r[1] / b) * (r[1] / b) - (r[2] / c) * (r[2] / c)
    }

    /// `Φ(r)`, exactly zero outside the ellipsoid.
    pub fn value(&self, r: [f64; 3]) -> f64 {
        let s = self.interior(r);
        if s > 0.0 {
            self.amplitude * libm::sqrt(s)
        } else {
            0.0
        }
    }

    /// Same condensate with lengths divided by `unit`.
    pub fn rescaled(&self, unit: f64) -> Self {
        Self {
            semi_axes: self.semi_axes.map(|s| s / unit),
            amplitude: self.amplitude * libm::pow(unit, 1.5),
        }
    }
}

/// Cylindrically symmetric condensate in frame units: `ā = a/l0`,
/// `b̄ = b/l0`, amplitude in `l0^{-3/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condensate {
    a_bar: f64,
    b_bar: f64,
    amplitude: f64,
}

impl Condensate {
    /// Normalized condensate with the given dimensionless semi-axes.
    pub fn new(a_bar: f64, b_bar: f64) -> Result<Self, ModelError> {
        positive("a_bar", a_bar)?;
        positive("b_bar", b_bar)?;
        Ok(Self { a_bar, b_bar, amplitude: libm::sqrt(15.0 / (8.0 * PI * a_bar * a_bar * b_bar)) })
    }

    pub fn a_bar(&self) -> f64 {
        self.a_bar
    }

    pub fn b_bar(&self) -> f64 {
        self.b_bar
    }

    /// `√(μ/Ng_s)·l0^{3/2}`.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `Φ` at horizontal radius `r⊥` (units of `a`) and height `ȳ` (units of `l0`).
    pub fn value(&self, r_perp: f64, y_bar: f64) -> f64 {
        let s = 1.0 - r_perp * r_perp - (y_bar / self.b_bar) * (y_bar / self.b_bar);
        if s > 0.0 {
            self.amplitude * libm::sqrt(s)
        } else {
            0.0
        }
    }

    pub fn as_ellipsoid(&self) -> CondensateTF {
        CondensateTF {
            semi_axes: [self.a_bar, self.b_bar, self.a_bar],
            amplitude: self.amplitude,
        }
    }
}

/// The `l0`, `Mg·l0`, `Mg·l0/ħ` unit system for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessFrame {
    /// [m]
    pub length_unit: f64,
    /// [J]
    pub energy_unit: f64,
    /// [rad/s]
    pub freq_unit: f64,
    /// Horizontal semi-axis `a` [m], the unit of `r̄⊥`.
    pub radial_unit: f64,
    pub condensate: Condensate,
}

impl DimensionlessFrame {
    pub fn length(&self, metres: f64) -> f64 {
        metres / self.length_unit
    }

    pub fn radial(&self, metres: f64) -> f64 {
        metres / self.radial_unit
    }

    pub fn energy(&self, joules: f64) -> f64 {
        joules / self.energy_unit
    }

    pub fn frequency(&self, rad_per_s: f64) -> f64 {
        rad_per_s / self.freq_unit
    }
}

pub fn to_dimensionless(p: &DerivedParams) -> Result<DimensionlessFrame, ModelError> {
    let (wx, wz) = (p.trap.omega_x, p.trap.omega_z);
    if wx != wz {
        return Err(ModelError::NotCylindrical { omega_x: wx, omega_z: wz });
    }
    let l0 = p.natural_length;
    Ok(DimensionlessFrame {
        length_unit: l0,
        energy_unit: p.energy_unit,
        freq_unit: p.freq_unit,
        radial_unit: p.semi_axis_a,
        condensate: Condensate::new(p.semi_axis_a / l0, p.semi_axis_b / l0)?,
    })
}
