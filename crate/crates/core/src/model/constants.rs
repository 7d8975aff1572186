/// Physical constants used to build a configuration, in SI units.
///
/// Values are CODATA 2018 (exact SI-defined ones where applicable) and the
/// AME2016 atomic mass of ⁸⁷Rb. Kept as a value rather than free constants so
/// a run can be pointed at an alternative table and self-tests can check
/// that the table is internally consistent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsTable {
    /// Planck constant `h` [J s].
    pub planck: f64,
    /// Reduced Planck constant `ħ` [J s].
    pub hbar: f64,
    /// Bohr magneton `μ_B` [J/T].
    pub bohr_magneton: f64,
    /// Atomic mass constant [kg].
    pub atomic_mass_unit: f64,
    /// Mass of ⁸⁷Rb [kg].
    pub rb87_mass: f64,
    /// s-wave scattering length of ⁸⁷Rb [m].
    pub rb87_scattering_length: f64,
    /// Landé factor of the F = 1 ground manifold of ⁸⁷Rb.
    pub rb87_lande_g_f: f64,
    /// Standard gravity [m/s²].
    pub standard_gravity: f64,
}

impl ConstantsTable {
    pub const CODATA_2018: Self = Self {
        planck: 6.626_070_15e-34,
        hbar: 1.054_571_817e-34,
        bohr_magneton: 9.274_010_078_3e-24,
        atomic_mass_unit: 1.660_539_066_60e-27,
        rb87_mass: 86.909_180_520 * 1.660_539_066_60e-27,
        rb87_scattering_length: 5.4e-9,
        rb87_lande_g_f: -0.5,
        standard_gravity: 9.806_65,
    };

    /// `ħ` implied by the tabulated Planck constant.
    pub fn hbar_from_planck(&self) -> f64 {
        self.planck / core::f64::consts::TAU
    }
}

impl Default for ConstantsTable {
    fn default() -> Self {
        Self::CODATA_2018
    }
}
