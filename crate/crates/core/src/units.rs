//! Physical constants (CODATA 2018) and unit conversions.
//!
//! `phonon` and `estimates` work in SI throughout. `two_level` and `chain`
//! work in natural units with ħ = 1, where energies are measured in a
//! reference energy `E_ref` and times in `ħ / E_ref`. [`UnitSystem`] converts
//! between the two.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result};

/// Reduced Planck constant (J·s)
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant (J/K)
pub const K_B: f64 = 1.380_649e-23;

/// Electron rest mass (kg)
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// Elementary charge (C)
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Unified atomic mass unit (kg)
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// One electron-volt in joules.
pub const ELECTRON_VOLT: f64 = ELEMENTARY_CHARGE;

pub const FEMTOSECOND: f64 = 1e-15;
pub const PICOSECOND: f64 = 1e-12;
pub const ANGSTROM: f64 = 1e-10;
pub const NANOMETER: f64 = 1e-9;

/// The fixed set of constants used by every module.
///
/// There is deliberately no constructor: the only instance is
/// [`PhysicalConstants::CODATA_2018`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub k_b: f64,
    pub electron_mass: f64,
    pub elementary_charge: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        k_b: K_B,
        electron_mass: ELECTRON_MASS,
        elementary_charge: ELEMENTARY_CHARGE,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitMode {
    Si,
    Natural,
}

/// Conversion between SI and ħ = 1 natural units.
///
/// In natural mode, an energy `E` (J) becomes `E / E_ref` and a time `t` (s)
/// becomes `t · E_ref / ħ`. In SI mode every conversion is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub mode: UnitMode,
    /// Reference energy in eV (ignored in SI mode).
    pub reference_energy_ev: f64,
}

impl UnitSystem {
    pub fn si() -> Self {
        UnitSystem {
            mode: UnitMode::Si,
            reference_energy_ev: 1.0,
        }
    }

    pub fn natural(reference_energy_ev: f64) -> Result<Self> {
        require_positive("reference_energy_ev", reference_energy_ev)?;
        Ok(UnitSystem {
            mode: UnitMode::Natural,
            reference_energy_ev,
        })
    }

    fn energy_scale(&self) -> f64 {
        match self.mode {
            UnitMode::Si => 1.0,
            UnitMode::Natural => self.reference_energy_ev * ELECTRON_VOLT,
        }
    }

    fn time_scale(&self) -> f64 {
        match self.mode {
            UnitMode::Si => 1.0,
            UnitMode::Natural => HBAR / (self.reference_energy_ev * ELECTRON_VOLT),
        }
    }

    pub fn energy_from_si(&self, joules: f64) -> f64 {
        joules / self.energy_scale()
    }

    pub fn energy_to_si(&self, value: f64) -> f64 {
        value * self.energy_scale()
    }

    pub fn time_from_si(&self, seconds: f64) -> f64 {
        seconds / self.time_scale()
    }

    pub fn time_to_si(&self, value: f64) -> f64 {
        value * self.time_scale()
    }

    pub fn rate_from_si(&self, per_second: f64) -> f64 {
        per_second * self.time_scale()
    }

    pub fn rate_to_si(&self, value: f64) -> f64 {
        value / self.time_scale()
    }
}
