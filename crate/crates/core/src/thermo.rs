//! Ideal-gas mixture thermodynamics on mass fractions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::Scalar;
use crate::species::{RangeError, Species, SpeciesTable, N_SPECIES};

/// Molar gas constant, J/(mol·K).
pub const GAS_CONSTANT: f64 = 8.314462618;
/// Standard atmosphere, Pa. Also the standard-state pressure of the fits.
pub const P_ATM: f64 = 101_325.0;
/// Temperature of normal conditions, K.
pub const T_NORMAL: f64 = 273.15;
pub const KELVIN_OFFSET: f64 = 273.15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompositionError {
    #[error("mass fraction {name} = {value} is negative or not finite")]
    Negative { name: &'static str, value: f64 },
    #[error("mass fractions sum to {0} > 1")]
    Overfull(f64),
}

/// Mass fractions of CO2, H2, CH4. Y_H2O = 1 − ΣY is derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    y: [f64; 3],
}

impl Composition {
    pub fn new(y: [f64; 3]) -> Result<Self, CompositionError> {
        for (k, &v) in y.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CompositionError::Negative {
                    name: Species::ALL[k].name(),
                    value: v,
                });
            }
        }
        let s: f64 = y.iter().sum();
        if s > 1.0 + 1e-12 {
            return Err(CompositionError::Overfull(s));
        }
        Ok(Composition { y })
    }

    pub fn pure(sp: Species) -> Self {
        let mut y = [0.0; 3];
        if sp != Species::H2O {
            y[sp.index()] = 1.0;
        }
        Composition { y }
    }

    /// Mole fractions (X_CO2, X_H2, X_CH4, X_H2O) converted to mass fractions.
    pub fn from_mole_fractions(
        table: &SpeciesTable,
        x: [f64; N_SPECIES],
    ) -> Result<Self, CompositionError> {
        let m = table.molar_masses();
        let mbar: f64 = (0..N_SPECIES).map(|k| x[k] * m[k]).sum();
        Composition::new([x[0] * m[0] / mbar, x[1] * m[1] / mbar, x[2] * m[2] / mbar])
    }

    /// 1 CO2 : 4 H2 by moles.
    pub fn stoichiometric_feed(table: &SpeciesTable) -> Self {
        Composition::from_mole_fractions(table, [0.2, 0.8, 0.0, 0.0]).expect("valid feed")
    }

    pub fn independent(&self) -> [f64; 3] {
        self.y
    }

    pub fn full(&self) -> [f64; N_SPECIES] {
        full_mass_fractions(&self.y)
    }

    pub fn mole_fractions(&self, table: &SpeciesTable) -> [f64; N_SPECIES] {
        mole_fractions(table, &self.full())
    }
}

pub fn full_mass_fractions<S: Scalar>(y: &[S; 3]) -> [S; N_SPECIES] {
    [y[0], y[1], y[2], S::cst(1.0) - y[0] - y[1] - y[2]]
}

/// M = (Σ Y_k/M_k)^-1, kg/mol.
pub fn mean_molar_mass<S: Scalar>(table: &SpeciesTable, y: &[S; N_SPECIES]) -> S {
    let m = table.molar_masses();
    let mut s = y[0] / m[0];
    for k in 1..N_SPECIES {
        s += y[k] / m[k];
    }
    s.recip()
}

/// X_k = Y_k M / M_k.
pub fn mole_fractions<S: Scalar>(table: &SpeciesTable, y: &[S; N_SPECIES]) -> [S; N_SPECIES] {
    let mbar = mean_molar_mass(table, y);
    let m = table.molar_masses();
    std::array::from_fn(|k| y[k] * mbar / m[k])
}

/// ρ = p_ref M / (R T).
pub fn density<S: Scalar>(table: &SpeciesTable, y: &[S; N_SPECIES], t: S, p_ref: f64) -> S {
    mean_molar_mass(table, y) * p_ref / (t * GAS_CONSTANT)
}

/// c_p,k in J/(kg·K), using the nearest fitted interval.
pub fn cp_species<S: Scalar>(table: &SpeciesTable, k: Species, t: S) -> S {
    let rec = table.record(k);
    rec.nasa_at(t.re()).cp_r(t) * (GAS_CONSTANT / rec.molar_mass)
}

/// h_k in J/kg, using the nearest fitted interval.
pub fn h_species<S: Scalar>(table: &SpeciesTable, k: Species, t: S) -> S {
    let rec = table.record(k);
    rec.nasa_at(t.re()).h_r(t) * (GAS_CONSTANT / rec.molar_mass)
}

/// s_k in J/(kg·K) at the standard pressure, using the nearest fitted interval.
pub fn s_species<S: Scalar>(table: &SpeciesTable, k: Species, t: S) -> S {
    let rec = table.record(k);
    rec.nasa_at(t.re()).s_r(t) * (GAS_CONSTANT / rec.molar_mass)
}

pub fn cp_species_checked(table: &SpeciesTable, k: Species, t: f64) -> Result<f64, RangeError> {
    let rec = table.record(k);
    Ok(rec.nasa_checked(t)?.cp_r(t) * GAS_CONSTANT / rec.molar_mass)
}

pub fn h_species_checked(table: &SpeciesTable, k: Species, t: f64) -> Result<f64, RangeError> {
    let rec = table.record(k);
    Ok(rec.nasa_checked(t)?.h_r(t) * GAS_CONSTANT / rec.molar_mass)
}

pub fn s_species_checked(table: &SpeciesTable, k: Species, t: f64) -> Result<f64, RangeError> {
    let rec = table.record(k);
    Ok(rec.nasa_checked(t)?.s_r(t) * GAS_CONSTANT / rec.molar_mass)
}

fn mass_average(
    table: &SpeciesTable,
    y: &Composition,
    t: f64,
    f: fn(&SpeciesTable, Species, f64) -> Result<f64, RangeError>,
) -> Result<f64, RangeError> {
    let y = y.full();
    let mut acc = 0.0;
    for sp in Species::ALL {
        acc += y[sp.index()] * f(table, sp, t)?;
    }
    Ok(acc)
}

pub fn cp_mix(table: &SpeciesTable, y: &Composition, t: f64) -> Result<f64, RangeError> {
    mass_average(table, y, t, cp_species_checked)
}

pub fn h_mix(table: &SpeciesTable, y: &Composition, t: f64) -> Result<f64, RangeError> {
    mass_average(table, y, t, h_species_checked)
}

pub fn s_mix(table: &SpeciesTable, y: &Composition, t: f64) -> Result<f64, RangeError> {
    mass_average(table, y, t, s_species_checked)
}
