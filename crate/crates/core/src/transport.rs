//! Mixture transport properties: Wilke viscosity, combination-averaged
//! conductivity and mixture-averaged diffusion coefficients.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dual::Scalar;
use crate::species::{RangeError, Species, SpeciesTable, N_SPECIES};
use crate::thermo::{mole_fractions, Composition};

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const AVOGADRO: f64 = 6.02214076e23;

/// Lower bound on 1 − Y_k in the mixture-averaged diffusion formula.
pub const PURE_SPECIES_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransportState {
    /// Pa·s
    pub mu: f64,
    /// W/(m·K)
    pub kappa: f64,
    /// m²/s, one per species
    pub d_mix: [f64; N_SPECIES],
}

/// Neufeld fit of the reduced collision integral Ω^(1,1)*.
pub fn collision_integral_11<S: Scalar>(t_star: S) -> S {
    const A: f64 = 1.06036;
    const B: f64 = 0.15610;
    const C: f64 = 0.19300;
    const D: f64 = 0.47635;
    const E: f64 = 1.03587;
    const F: f64 = 1.52996;
    const G: f64 = 1.76474;
    const H: f64 = 3.89411;
    t_star.powf(-B) * A
        + (t_star * -D).exp() * C
        + (t_star * -F).exp() * E
        + (t_star * -H).exp() * G
}

/// Chapman–Enskog binary diffusion coefficient D_kj in m²/s.
pub fn binary_diffusion<S: Scalar>(
    table: &SpeciesTable,
    k: Species,
    j: Species,
    t: S,
    p: f64,
) -> S {
    let (rk, rj) = (table.record(k), table.record(j));
    let sigma = 0.5 * (rk.lj_sigma + rj.lj_sigma);
    let eps = (rk.lj_eps_kb * rj.lj_eps_kb).sqrt();
    let mk = rk.molar_mass / AVOGADRO;
    let mj = rj.molar_mass / AVOGADRO;
    let m_red = mk * mj / (mk + mj);
    let omega = collision_integral_11(t / eps);
    let kt = t * BOLTZMANN;
    (kt * kt * kt * (2.0 * PI / m_red)).sqrt() * (3.0 / 16.0) / (omega * (p * PI * sigma * sigma))
}

/// Wilke mixing rule.
pub fn viscosity_mix_raw<S: Scalar>(table: &SpeciesTable, y: &[S; N_SPECIES], t: S) -> S {
    let m = table.molar_masses();
    let x = mole_fractions(table, y);
    let mu: [S; N_SPECIES] = std::array::from_fn(|k| table.records()[k].viscosity(t));
    let sq: [S; N_SPECIES] = std::array::from_fn(|k| mu[k].sqrt());
    let mut total = S::zero();
    for k in 0..N_SPECIES {
        let mut denom = S::zero();
        for j in 0..N_SPECIES {
            let phi = if j == k {
                S::cst(1.0)
            } else {
                let r = sq[k] / sq[j] * (m[j] / m[k]).powf(0.25) + 1.0;
                r * r / (8.0 * (1.0 + m[k] / m[j])).sqrt()
            };
            denom += x[j] * phi;
        }
        total += x[k] * mu[k] / denom;
    }
    total
}

/// κ = ½(Σ X_k λ_k + (Σ X_k/λ_k)^-1).
pub fn conductivity_mix_raw<S: Scalar>(table: &SpeciesTable, y: &[S; N_SPECIES], t: S) -> S {
    let x = mole_fractions(table, y);
    let mut arith = S::zero();
    let mut harm = S::zero();
    for k in 0..N_SPECIES {
        let lam = table.records()[k].conductivity(t);
        arith += x[k] * lam;
        harm += x[k] / lam;
    }
    (arith + harm.recip()) * 0.5
}

/// Binary coefficients for all pairs; the diagonal is unused.
pub fn binary_matrix<S: Scalar>(table: &SpeciesTable, t: S, p: f64) -> [[S; N_SPECIES]; N_SPECIES] {
    let mut d = [[S::zero(); N_SPECIES]; N_SPECIES];
    for k in 0..N_SPECIES {
        for j in (k + 1)..N_SPECIES {
            let v = binary_diffusion(table, Species::ALL[k], Species::ALL[j], t, p);
            d[k][j] = v;
            d[j][k] = v;
        }
    }
    d
}

/// Mixture-averaged coefficients from a precomputed binary matrix.
pub fn diffusion_mix_from_binary<S: Scalar>(
    table: &SpeciesTable,
    y: &[S; N_SPECIES],
    d: &[[S; N_SPECIES]; N_SPECIES],
) -> [S; N_SPECIES] {
    let x = mole_fractions(table, y);
    std::array::from_fn(|k| {
        let mut sx = S::zero();
        let mut sy = S::zero();
        for j in 0..N_SPECIES {
            if j != k {
                sx += x[j] / d[k][j];
                sy += y[j] / d[k][j];
            }
        }
        let one_minus = S::cst(1.0) - y[k];
        let one_minus = if one_minus.re() > PURE_SPECIES_GUARD {
            one_minus
        } else {
            S::cst(PURE_SPECIES_GUARD)
        };
        let inv = sx + x[k] / one_minus * sy;
        if inv.re() > 0.0 {
            inv.recip()
        } else {
            S::cst(f64::MAX)
        }
    })
}

pub fn diffusion_mix_raw<S: Scalar>(
    table: &SpeciesTable,
    y: &[S; N_SPECIES],
    t: S,
    p: f64,
) -> [S; N_SPECIES] {
    diffusion_mix_from_binary(table, y, &binary_matrix(table, t, p))
}

fn check_fits(table: &SpeciesTable, t: f64) -> Result<(), RangeError> {
    for r in table.records() {
        r.viscosity_checked(t)?;
        r.conductivity_checked(t)?;
    }
    Ok(())
}

pub fn viscosity_mix(table: &SpeciesTable, y: &Composition, t: f64) -> Result<f64, RangeError> {
    check_fits(table, t)?;
    Ok(viscosity_mix_raw(table, &y.full(), t))
}

pub fn conductivity_mix(table: &SpeciesTable, y: &Composition, t: f64) -> Result<f64, RangeError> {
    check_fits(table, t)?;
    Ok(conductivity_mix_raw(table, &y.full(), t))
}

pub fn diffusion_mix(table: &SpeciesTable, y: &Composition, t: f64, p: f64) -> [f64; N_SPECIES] {
    diffusion_mix_raw(table, &y.full(), t, p)
}

pub fn transport_state(
    table: &SpeciesTable,
    y: &Composition,
    t: f64,
    p: f64,
) -> Result<TransportState, RangeError> {
    Ok(TransportState {
        mu: viscosity_mix(table, y, t)?,
        kappa: conductivity_mix(table, y, t)?,
        d_mix: diffusion_mix(table, y, t, p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> &'static SpeciesTable {
        SpeciesTable::builtin()
    }

    #[test]
    fn pure_species_collapse() {
        let t = table();
        for sp in Species::ALL {
            let y = Composition::pure(sp);
            let mu = viscosity_mix(t, &y, 600.0).unwrap();
            let lam = conductivity_mix(t, &y, 600.0).unwrap();
            assert!((mu - t.record(sp).viscosity(600.0)).abs() / mu < 1e-14);
            assert!((lam - t.record(sp).conductivity(600.0)).abs() / lam < 1e-14);
        }
    }

    #[test]
    fn species_values_near_reference_data() {
        let t = table();
        let mu = t.record(Species::CO2).viscosity_checked(300.0).unwrap();
        assert!((mu - 1.50e-5).abs() / 1.50e-5 < 1e-2, "{mu}");
        let lam = t.record(Species::H2).conductivity_checked(300.0).unwrap();
        assert!((lam - 0.187).abs() / 0.187 < 2e-2, "{lam}");
    }

    #[test]
    fn binary_diffusion_matches_hand_formula() {
        let t = table();
        let (temp, p) = (573.15, 1e6);
        let (a, b) = (t.record(Species::CO2), t.record(Species::H2));
        // cm²/s form with M in g/mol, p in atm, sigma in angstrom
        let sigma = 0.5 * (a.lj_sigma + b.lj_sigma) * 1e10;
        let ts = temp / (a.lj_eps_kb * b.lj_eps_kb).sqrt();
        let omega = 1.06036 / ts.powf(0.15610)
            + 0.19300 / (0.47635 * ts).exp()
            + 1.03587 / (1.52996 * ts).exp()
            + 1.76474 / (3.89411 * ts).exp();
        let m1 = a.molar_mass * 1e3;
        let m2 = b.molar_mass * 1e3;
        let d_cm2 = 0.0018583 * (temp.powi(3) * (1.0 / m1 + 1.0 / m2)).sqrt()
            / (p / crate::thermo::P_ATM * sigma * sigma * omega);
        let oracle = d_cm2 * 1e-4;
        let got = binary_diffusion(t, Species::CO2, Species::H2, temp, p);
        assert!((got - oracle).abs() / oracle < 1e-3, "{got} vs {oracle}");
        let half = binary_diffusion(t, Species::CO2, Species::H2, temp, p / 2.0);
        assert!((half - 2.0 * got).abs() / got < 1e-14);
        let sym = binary_diffusion(t, Species::H2, Species::CO2, temp, p);
        assert_eq!(sym, got);
    }

    #[test]
    fn wilke_binary_mixture_matches_direct_sum() {
        let t = table();
        let feed = Composition::stoichiometric_feed(t);
        let temp = 573.15;
        let m = t.molar_masses();
        let x = [0.2, 0.8];
        let mu = [
            t.record(Species::CO2).viscosity(temp),
            t.record(Species::H2).viscosity(temp),
        ];
        let mm = [m[0], m[1]];
        let phi = |k: usize, j: usize| {
            (1.0 + (mu[k] / mu[j]).sqrt() * (mm[j] / mm[k]).powf(0.25)).powi(2)
                / (8.0 * (1.0 + mm[k] / mm[j])).sqrt()
        };
        let oracle: f64 = (0..2)
            .map(|k| x[k] * mu[k] / (0..2).map(|j| x[j] * phi(k, j)).sum::<f64>())
            .sum();
        let got = viscosity_mix(t, &feed, temp).unwrap();
        assert!((got - oracle).abs() / oracle < 1e-12);

        let lam = [
            t.record(Species::CO2).conductivity(temp),
            t.record(Species::H2).conductivity(temp),
        ];
        let oracle = 0.5 * (x[0] * lam[0] + x[1] * lam[1] + 1.0 / (x[0] / lam[0] + x[1] / lam[1]));
        let got = conductivity_mix(t, &feed, temp).unwrap();
        assert!((got - oracle).abs() / oracle < 1e-12);
    }

    #[test]
    fn diffusion_mix_limits() {
        let t = table();
        let temp = 600.0;
        let p = 1e6;
        let d = binary_matrix(t, temp, p);
        // trace CO2 in H2
        let y = [1e-10, 1.0 - 1e-10, 0.0, 0.0];
        let dm = diffusion_mix_from_binary(t, &y, &d);
        assert!((dm[0] - d[0][1]).abs() / d[0][1] < 1e-8);
        // equal binaries collapse
        let same = [[2e-6; N_SPECIES]; N_SPECIES];
        let y = [0.3, 0.1, 0.2, 0.4];
        for v in diffusion_mix_from_binary(t, &y, &same) {
            assert!((v - 2e-6).abs() / 2e-6 < 1e-12);
        }
        // pure species stays finite and positive
        for v in diffusion_mix_from_binary(t, &[1.0, 0.0, 0.0, 0.0], &d) {
            assert!(v > 0.0 && v.is_finite());
        }
    }

    #[test]
    fn diffusion_mix_feed_matches_direct_formula() {
        let t = table();
        let feed = Composition::stoichiometric_feed(t);
        let y = feed.full();
        let x = feed.mole_fractions(t);
        let (temp, p) = (573.15, 1e6);
        let got = diffusion_mix(t, &feed, temp, p);
        for k in 0..N_SPECIES {
            let mut sx = 0.0;
            let mut sy = 0.0;
            for j in 0..N_SPECIES {
                if j != k {
                    let dkj = binary_diffusion(t, Species::ALL[k], Species::ALL[j], temp, p);
                    sx += x[j] / dkj;
                    sy += y[j] / dkj;
                }
            }
            let oracle = 1.0 / (sx + x[k] / (1.0 - y[k]) * sy);
            assert!((got[k] - oracle).abs() / oracle < 1e-13);
        }
    }

    #[test]
    fn conductivity_between_harmonic_and_arithmetic() {
        let t = table();
        let y = Composition::new([0.3, 0.05, 0.25]).unwrap();
        let x = y.mole_fractions(t);
        let lam: Vec<f64> = t.records().iter().map(|r| r.conductivity(650.0)).collect();
        let arith: f64 = (0..4).map(|k| x[k] * lam[k]).sum();
        let harm = 1.0 / (0..4).map(|k| x[k] / lam[k]).sum::<f64>();
        let got = conductivity_mix(t, &y, 650.0).unwrap();
        assert!(got >= harm && got <= arith);
    }
}
