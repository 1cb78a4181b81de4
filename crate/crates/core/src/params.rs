//! Species and plasma parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VpbError};

/// The Boltzmann constant in the units used throughout, fixed to 2/3.
pub const BOLTZMANN: f64 = 2.0 / 3.0;

/// Species tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    Ion,
    Electron,
}

impl Species {
    pub const BOTH: [Species; 2] = [Species::Ion, Species::Electron];

    pub fn other(self) -> Species {
        match self {
            Species::Ion => Species::Electron,
            Species::Electron => Species::Ion,
        }
    }
}

/// A value attached to each of the two species.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pair<T> {
    pub ion: T,
    pub electron: T,
}

impl<T> Pair<T> {
    pub fn new(ion: T, electron: T) -> Self {
        Self { ion, electron }
    }

    pub fn get(&self, s: Species) -> &T {
        match s {
            Species::Ion => &self.ion,
            Species::Electron => &self.electron,
        }
    }

    pub fn get_mut(&mut self, s: Species) -> &mut T {
        match s {
            Species::Ion => &mut self.ion,
            Species::Electron => &mut self.electron,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(Species, &T) -> U) -> Pair<U> {
        Pair { ion: f(Species::Ion, &self.ion), electron: f(Species::Electron, &self.electron) }
    }

    pub fn as_ref(&self) -> Pair<&T> {
        Pair { ion: &self.ion, electron: &self.electron }
    }
}

impl<T> std::ops::Index<Species> for Pair<T> {
    type Output = T;
    fn index(&self, s: Species) -> &T {
        self.get(s)
    }
}

impl<T> std::ops::IndexMut<Species> for Pair<T> {
    fn index_mut(&mut self, s: Species) -> &mut T {
        self.get_mut(s)
    }
}

/// Mass, charge and hard-sphere diameter of one species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciesParams {
    /// Particle mass, positive.
    pub mass: f64,
    /// Charge: positive for ions, negative for electrons.
    pub charge: f64,
    /// Hard-sphere diameter, positive.
    pub diameter: f64,
}

impl SpeciesParams {
    pub fn new(mass: f64, charge: f64, diameter: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(VpbError::Domain(format!("mass must be positive, got {mass}")));
        }
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(VpbError::Domain(format!("diameter must be positive, got {diameter}")));
        }
        if !charge.is_finite() {
            return Err(VpbError::Domain("charge must be finite".into()));
        }
        Ok(Self { mass, charge, diameter })
    }

    /// k_A = k_B / m_A.
    pub fn k(&self) -> f64 {
        BOLTZMANN / self.mass
    }
}

/// Ion and electron parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlasmaParams {
    pub ion: SpeciesParams,
    pub electron: SpeciesParams,
}

impl PlasmaParams {
    /// Validates the ordering m_i ≥ m_e, the charge signs and the common diameter.
    pub fn new(ion: SpeciesParams, electron: SpeciesParams) -> Result<Self> {
        if ion.mass < electron.mass {
            return Err(VpbError::Domain(format!(
                "ion mass {} must be at least the electron mass {}",
                ion.mass, electron.mass
            )));
        }
        if !(ion.charge > 0.0 && electron.charge < 0.0) {
            return Err(VpbError::Domain(format!(
                "need q_i > 0 > q_e, got q_i = {}, q_e = {}",
                ion.charge, electron.charge
            )));
        }
        if ion.diameter != electron.diameter {
            return Err(VpbError::Domain("both species must share one diameter".into()));
        }
        Ok(Self { ion, electron })
    }

    /// Convenience constructor with diameter σ shared by both species.
    pub fn from_values(m_i: f64, m_e: f64, q_i: f64, q_e: f64, sigma: f64) -> Result<Self> {
        Self::new(SpeciesParams::new(m_i, q_i, sigma)?, SpeciesParams::new(m_e, q_e, sigma)?)
    }

    pub fn boltzmann_const(&self) -> f64 {
        BOLTZMANN
    }

    pub fn species(&self, s: Species) -> &SpeciesParams {
        match s {
            Species::Ion => &self.ion,
            Species::Electron => &self.electron,
        }
    }

    pub fn mass(&self, s: Species) -> f64 {
        self.species(s).mass
    }

    pub fn charge(&self, s: Species) -> f64 {
        self.species(s).charge
    }

    /// k_A = k_B / m_A.
    pub fn k(&self, s: Species) -> f64 {
        self.species(s).k()
    }

    /// Hard-sphere prefactor (σ_A + σ_B)²/4.
    pub fn kernel_prefactor(&self, a: Species, b: Species) -> f64 {
        let s = self.species(a).diameter + self.species(b).diameter;
        0.25 * s * s
    }
}

impl Default for PlasmaParams {
    /// m_i = 4, m_e = 1, q_i = 1, q_e = −1, σ = 1.
    fn default() -> Self {
        Self::from_values(4.0, 1.0, 1.0, -1.0, 1.0).expect("default parameters are valid")
    }
}
