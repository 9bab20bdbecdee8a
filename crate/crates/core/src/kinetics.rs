//! Sabatier rate law, equilibrium constant and equilibrium conversion.
//!
//! `Q = k_f (([CO2][H2]^4)^n − ([CH4][H2O]^2 / k_eq)^n)`, `k_f = A exp(−E_a/(R T))`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::Scalar;
use crate::species::{Species, SpeciesTable, NU, N_SPECIES};
use crate::thermo::{h_species, s_species, GAS_CONSTANT, P_ATM};

/// Σ ν_k for CO2 + 4 H2 <=> CH4 + 2 H2O.
pub const DELTA_NU: i32 = -2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticsError {
    #[error("empirical exponent must be non-negative, got {0}")]
    NegativeExponent(f64),
    #[error("invalid equilibrium input: T = {t} K, p = {p} Pa")]
    InvalidInput { t: f64, p: f64 },
    #[error("equilibrium bracket [{lo}, {hi}] does not enclose a root (g = {g_lo}, {g_hi})")]
    Bracket {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticParams {
    /// E_a in J/mol.
    pub activation_energy: f64,
    /// ln A, with A in 1/s·(mol/m³)^(1−5n).
    pub log_pre_exponential: f64,
    pub exponent: f64,
}

impl KineticParams {
    pub fn new(
        activation_energy: f64,
        log_pre_exponential: f64,
        exponent: f64,
    ) -> Result<Self, KineticsError> {
        if !(exponent >= 0.0) {
            return Err(KineticsError::NegativeExponent(exponent));
        }
        Ok(KineticParams {
            activation_energy,
            log_pre_exponential,
            exponent,
        })
    }

    /// Identified values: E_a = 52.141 kJ/mol, A = 4.744e5, n = 0.0581.
    pub fn reference() -> Self {
        KineticParams {
            activation_energy: 52_141.0,
            log_pre_exponential: 4.744e5_f64.ln(),
            exponent: 0.0581,
        }
    }

    /// Initial guess used for identification runs: 65 kJ/mol, ln A = 12, n = 0.222.
    pub fn initial_guess() -> Self {
        KineticParams {
            activation_energy: 65_000.0,
            log_pre_exponential: 12.0,
            exponent: 0.222,
        }
    }

    /// A = 0: no reaction anywhere.
    pub fn inert() -> Self {
        KineticParams {
            activation_energy: 0.0,
            log_pre_exponential: f64::NEG_INFINITY,
            exponent: 1.0,
        }
    }

    pub fn pre_exponential(&self) -> f64 {
        self.log_pre_exponential.exp()
    }

    pub fn lift<S: Scalar>(&self) -> Kinetics<S> {
        Kinetics {
            activation_energy: S::cst(self.activation_energy),
            log_pre_exponential: S::cst(self.log_pre_exponential),
            exponent: S::cst(self.exponent),
        }
    }
}

/// Kinetic parameters over a generic scalar, for differentiation.
#[derive(Clone, Copy, Debug)]
pub struct Kinetics<S> {
    pub activation_energy: S,
    pub log_pre_exponential: S,
    pub exponent: S,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReactionState<S> {
    /// mol/(m³·s)
    pub q: S,
    /// kg/(m³·s)
    pub omega: [S; N_SPECIES],
    /// W/m³
    pub omega_t: S,
}

pub fn forward_rate<S: Scalar>(kin: &Kinetics<S>, t: S) -> S {
    (kin.log_pre_exponential - kin.activation_energy / (t * GAS_CONSTANT)).exp()
}

/// ΔH⁰ (J/mol) and ΔS⁰ (J/(mol·K)) of the reaction.
pub fn reaction_enthalpy_entropy<S: Scalar>(table: &SpeciesTable, t: S) -> (S, S) {
    let mut dh = S::zero();
    let mut ds = S::zero();
    for sp in Species::ALL {
        let w = NU[sp.index()] * table.molar_mass(sp);
        dh += h_species(table, sp, t) * w;
        ds += s_species(table, sp, t) * w;
    }
    (dh, ds)
}

/// Concentration-based k_eq in (mol/m³)^−2.
pub fn equilibrium_constant<S: Scalar>(table: &SpeciesTable, t: S) -> S {
    let (dh, ds) = reaction_enthalpy_entropy(table, t);
    let kp = (ds / GAS_CONSTANT - dh / (t * GAS_CONSTANT)).exp();
    let c_std = (t * GAS_CONSTANT).recip() * P_ATM;
    kp * c_std.powi(DELTA_NU)
}

/// Molar concentrations ρ Y_k / M_k clamped at zero.
pub fn concentrations<S: Scalar>(
    table: &SpeciesTable,
    y: &[S; N_SPECIES],
    rho: S,
) -> [S; N_SPECIES] {
    let m = table.molar_masses();
    std::array::from_fn(|k| (rho * y[k] / m[k]).pos_part())
}

/// Rate of progress with a precomputed k_eq.
pub fn rate_of_progress_with_keq<S: Scalar>(
    table: &SpeciesTable,
    y: &[S; N_SPECIES],
    t: S,
    rho: S,
    kin: &Kinetics<S>,
    keq: S,
) -> S {
    let c = concentrations(table, y, rho);
    let h2 = c[1] * c[1];
    let fwd = (c[0] * h2 * h2).pow(kin.exponent);
    let rev = (c[2] * c[3] * c[3] / keq).pow(kin.exponent);
    forward_rate(kin, t) * (fwd - rev)
}

pub fn rate_of_progress<S: Scalar>(
    table: &SpeciesTable,
    y: &[S; N_SPECIES],
    t: S,
    rho: S,
    kin: &Kinetics<S>,
) -> S {
    rate_of_progress_with_keq(table, y, t, rho, kin, equilibrium_constant(table, t))
}

/// ω_k = M_k ν_k Q and ω_T = −Σ h_k ω_k, or zeros outside the reaction zone.
pub fn species_sources<S: Scalar>(
    table: &SpeciesTable,
    y: &[S; N_SPECIES],
    t: S,
    rho: S,
    kin: &Kinetics<S>,
    in_reaction_zone: bool,
) -> ReactionState<S> {
    if !in_reaction_zone {
        return ReactionState {
            q: S::zero(),
            omega: [S::zero(); N_SPECIES],
            omega_t: S::zero(),
        };
    }
    let q = rate_of_progress(table, y, t, rho, kin);
    let omega: [S; N_SPECIES] = std::array::from_fn(|k| q * (table.molar_masses()[k] * NU[k]));
    let mut omega_t = S::zero();
    for sp in Species::ALL {
        omega_t -= h_species(table, sp, t) * omega[sp.index()];
    }
    ReactionState { q, omega, omega_t }
}

/// Mole fractions of a stoichiometric feed after extent ξ.
pub fn equilibrium_mole_fractions(xi: f64) -> [f64; N_SPECIES] {
    let total = 5.0 - 2.0 * xi;
    [
        (1.0 - xi) / total,
        (4.0 - 4.0 * xi) / total,
        xi / total,
        2.0 * xi / total,
    ]
}

/// ln of the extent equation; increasing in ξ with a single root on (0,1).
fn extent_residual(xi: f64, ln_kx: f64) -> (f64, f64) {
    let g = xi.ln() + 2.0 * (2.0 * xi).ln() + 2.0 * (5.0 - 2.0 * xi).ln()
        - (1.0 - xi).ln()
        - 4.0 * (4.0 - 4.0 * xi).ln()
        - ln_kx;
    let dg = 3.0 / xi - 4.0 / (5.0 - 2.0 * xi) + 5.0 / (1.0 - xi);
    (g, dg)
}

/// Equilibrium CO2 conversion of a stoichiometric feed at (T, p_total).
pub fn equilibrium_conversion(
    table: &SpeciesTable,
    t: f64,
    p_total: f64,
) -> Result<f64, KineticsError> {
    if !(t > 0.0 && p_total > 0.0 && t.is_finite() && p_total.is_finite()) {
        return Err(KineticsError::InvalidInput { t, p: p_total });
    }
    let c_tot = p_total / (GAS_CONSTANT * t);
    let ln_kx = equilibrium_constant(table, t).ln() + 2.0 * c_tot.ln();

    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    let (g_lo, _) = extent_residual(lo, ln_kx);
    let (g_hi, _) = extent_residual(hi, ln_kx);
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(KineticsError::Bracket { lo, hi, g_lo, g_hi });
    }
    let mut xi = 0.5;
    for _ in 0..200 {
        let (g, dg) = extent_residual(xi, ln_kx);
        if g == 0.0 {
            return Ok(xi);
        }
        if g < 0.0 {
            lo = xi;
        } else {
            hi = xi;
        }
        let newton = xi - g / dg;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - xi).abs() <= 4.0 * f64::EPSILON * xi || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        xi = next;
    }
    Ok(xi)
}
