//! Species constants and coefficient fits for CO2, H2, CH4 and H2O.
//!
//! The coefficient file is line oriented:
//!
//! ```text
//! [species CO2]
//! molar_mass = 0.044009
//! nasa_range = 200 1000 a1 a2 a3 a4 a5 a6 a7 b1 b2
//! visc_range = 200 1000 A B C D
//! cond_range = 200 1000 A B C D
//! lj_sigma = 3.763e-10
//! lj_eps_kb = 244.0
//! source = ...
//! ```
//!
//! Viscosity fits give micropoise and conductivity fits give µW/(cm·K), as in
//! the NASA transport tables; `TransportFit::eval_si` converts to SI.

use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

use crate::dual::Scalar;

pub const N_SPECIES: usize = 4;

/// Stoichiometric coefficients ν'' − ν' of CO2 + 4 H2 <=> CH4 + 2 H2O.
pub const NU: [f64; N_SPECIES] = [-1.0, -4.0, 1.0, 2.0];
pub const NU_REACTANT: [f64; N_SPECIES] = [1.0, 4.0, 0.0, 0.0];
pub const NU_PRODUCT: [f64; N_SPECIES] = [0.0, 0.0, 1.0, 2.0];

/// Temperature window the reactor solver evaluates fits in.
pub const OPERATING_T_MIN: f64 = 400.0;
pub const OPERATING_T_MAX: f64 = 900.0;

const MICROPOISE_TO_PA_S: f64 = 1e-7;
const UW_PER_CM_K_TO_W_PER_M_K: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Species {
    CO2,
    H2,
    CH4,
    H2O,
}

impl Species {
    pub const ALL: [Species; N_SPECIES] = [Species::CO2, Species::H2, Species::CH4, Species::H2O];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Species::CO2 => "CO2",
            Species::H2 => "H2",
            Species::CH4 => "CH4",
            Species::H2O => "H2O",
        }
    }

    pub fn from_name(name: &str) -> Option<Species> {
        Species::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum SpeciesDataError {
    #[error("cannot read species file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("species {0} absent")]
    MissingSpecies(String),
    #[error("line {line}: malformed coefficient block: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("species {species}: {fit} range gap {lo}–{hi} K")]
    RangeGap {
        species: String,
        fit: &'static str,
        lo: f64,
        hi: f64,
    },
    #[error("species {species}: {fit} ranges overlap or are not ascending at {at} K")]
    RangeOrder {
        species: String,
        fit: &'static str,
        at: f64,
    },
    #[error("species {species}: {fit} ranges do not cover {lo}–{hi} K")]
    Coverage {
        species: String,
        fit: &'static str,
        lo: f64,
        hi: f64,
    },
    #[error("species {species}: invalid {field} = {value}")]
    InvalidValue {
        species: String,
        field: &'static str,
        value: f64,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("temperature {t} K outside the {fit} fit range of {species}")]
pub struct RangeError {
    pub species: Species,
    pub fit: &'static str,
    pub t: f64,
}

/// One NASA 9-coefficient interval.
#[derive(Clone, Debug, PartialEq)]
pub struct NasaRange {
    pub t_low: f64,
    pub t_high: f64,
    pub a: [f64; 7],
    pub b: [f64; 2],
}

impl NasaRange {
    /// c_p M / R
    pub fn cp_r<S: Scalar>(&self, t: S) -> S {
        let a = &self.a;
        let ti = t.recip();
        ti * ti * a[0] + ti * a[1] + a[2] + t * ((t * ((t * ((t * a[6]) + a[5])) + a[4])) + a[3])
    }

    /// h M / R, i.e. h/(R T) scaled by T.
    pub fn h_r<S: Scalar>(&self, t: S) -> S {
        let a = &self.a;
        let ti = t.recip();
        -(ti * a[0])
            + t.ln() * a[1]
            + t * a[2]
            + t * t * (a[3] / 2.0)
            + t.powi(3) * (a[4] / 3.0)
            + t.powi(4) * (a[5] / 4.0)
            + t.powi(5) * (a[6] / 5.0)
            + self.b[0]
    }

    /// s M / R at the standard pressure.
    pub fn s_r<S: Scalar>(&self, t: S) -> S {
        let a = &self.a;
        let ti = t.recip();
        -(ti * ti * (a[0] / 2.0)) - ti * a[1]
            + t.ln() * a[2]
            + t * a[3]
            + t * t * (a[4] / 2.0)
            + t.powi(3) * (a[5] / 3.0)
            + t.powi(4) * (a[6] / 4.0)
            + self.b[1]
    }
}

/// `ln(q) = A ln T + B/T + C/T² + D` on one interval.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportFit {
    pub t_low: f64,
    pub t_high: f64,
    pub coeffs: [f64; 4],
}

impl TransportFit {
    pub fn eval_raw<S: Scalar>(&self, t: S) -> S {
        let [a, b, c, d] = self.coeffs;
        let ti = t.recip();
        (t.ln() * a + ti * b + ti * ti * c + d).exp()
    }

    fn eval_si<S: Scalar>(&self, t: S, factor: f64) -> S {
        self.eval_raw(t) * factor
    }
}

trait Ranged {
    fn bounds(&self) -> (f64, f64);
}

impl Ranged for NasaRange {
    fn bounds(&self) -> (f64, f64) {
        (self.t_low, self.t_high)
    }
}

impl Ranged for TransportFit {
    fn bounds(&self) -> (f64, f64) {
        (self.t_low, self.t_high)
    }
}

/// Interval containing `t`, or the nearest one when `t` lies outside all of them.
fn nearest<R: Ranged>(ranges: &[R], t: f64) -> &R {
    ranges
        .iter()
        .find(|r| t <= r.bounds().1)
        .unwrap_or_else(|| ranges.last().expect("validated table has ranges"))
}

fn containing<R: Ranged>(ranges: &[R], t: f64) -> Option<&R> {
    ranges.iter().find(|r| {
        let (lo, hi) = r.bounds();
        t >= lo && t <= hi
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpeciesRecord {
    pub species: Species,
    pub molar_mass: f64,
    pub nasa: Vec<NasaRange>,
    pub viscosity: Vec<TransportFit>,
    pub conductivity: Vec<TransportFit>,
    pub lj_sigma: f64,
    pub lj_eps_kb: f64,
    pub dipole: Option<f64>,
    pub polarizability: Option<f64>,
    pub source: String,
}

impl SpeciesRecord {
    pub fn nasa_at(&self, t: f64) -> &NasaRange {
        nearest(&self.nasa, t)
    }

    /// Viscosity in Pa·s, using the nearest fitted interval.
    pub fn viscosity<S: Scalar>(&self, t: S) -> S {
        nearest(&self.viscosity, t.re()).eval_si(t, MICROPOISE_TO_PA_S)
    }

    /// Thermal conductivity in W/(m·K), using the nearest fitted interval.
    pub fn conductivity<S: Scalar>(&self, t: S) -> S {
        nearest(&self.conductivity, t.re()).eval_si(t, UW_PER_CM_K_TO_W_PER_M_K)
    }

    pub fn viscosity_checked(&self, t: f64) -> Result<f64, RangeError> {
        containing(&self.viscosity, t)
            .map(|f| f.eval_si(t, MICROPOISE_TO_PA_S))
            .ok_or(RangeError {
                species: self.species,
                fit: "viscosity",
                t,
            })
    }

    pub fn conductivity_checked(&self, t: f64) -> Result<f64, RangeError> {
        containing(&self.conductivity, t)
            .map(|f| f.eval_si(t, UW_PER_CM_K_TO_W_PER_M_K))
            .ok_or(RangeError {
                species: self.species,
                fit: "conductivity",
                t,
            })
    }

    pub fn nasa_checked(&self, t: f64) -> Result<&NasaRange, RangeError> {
        containing(&self.nasa, t).ok_or(RangeError {
            species: self.species,
            fit: "NASA",
            t,
        })
    }
}

/// The four species in fixed order CO2, H2, CH4, H2O.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeciesTable {
    records: [SpeciesRecord; N_SPECIES],
    molar_masses: [f64; N_SPECIES],
}

static BUILTIN: OnceLock<SpeciesTable> = OnceLock::new();

impl SpeciesTable {
    /// Table parsed from the coefficient file shipped with the crate.
    pub fn builtin() -> &'static SpeciesTable {
        BUILTIN.get_or_init(|| {
            SpeciesTable::parse(include_str!("../data/species.dat"))
                .expect("bundled species data is valid")
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SpeciesTable, SpeciesDataError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SpeciesDataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        SpeciesTable::parse(&text)
    }

    pub fn parse(text: &str) -> Result<SpeciesTable, SpeciesDataError> {
        let mut builders: [Option<Builder>; N_SPECIES] = Default::default();
        let mut current: Option<usize> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let malformed = |msg: String| SpeciesDataError::Malformed { line: line_no, msg };

            if let Some(header) = line.strip_prefix('[') {
                let inner = header
                    .strip_suffix(']')
                    .ok_or_else(|| malformed("unterminated section header".into()))?;
                let mut words = inner.split_whitespace();
                if words.next() != Some("species") {
                    return Err(malformed(format!("unknown section [{inner}]")));
                }
                let name = words
                    .next()
                    .ok_or_else(|| malformed("section without species name".into()))?;
                if words.next().is_some() {
                    return Err(malformed(format!("unexpected tokens in [{inner}]")));
                }
                let sp = Species::from_name(name)
                    .ok_or_else(|| malformed(format!("unknown species {name}")))?;
                let k = sp.index();
                if builders[k].is_some() {
                    return Err(malformed(format!("duplicate species {name}")));
                }
                builders[k] = Some(Builder::new(sp, line_no));
                current = Some(k);
                continue;
            }

            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| malformed(format!("expected key = value, found `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let k =
                current.ok_or_else(|| malformed(format!("key `{key}` outside a species block")))?;
            let b = builders[k].as_mut().expect("current block exists");

            let numbers = |expected: usize| -> Result<Vec<f64>, SpeciesDataError> {
                let nums = value
                    .split_whitespace()
                    .map(|w| w.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| malformed(format!("{key}: {e}")))?;
                if nums.len() != expected {
                    return Err(malformed(format!(
                        "{key}: expected {expected} numbers, found {}",
                        nums.len()
                    )));
                }
                Ok(nums)
            };

            match key {
                "molar_mass" => b.molar_mass = Some(numbers(1)?[0]),
                "lj_sigma" => b.lj_sigma = Some(numbers(1)?[0]),
                "lj_eps_kb" => b.lj_eps_kb = Some(numbers(1)?[0]),
                "dipole" => b.dipole = Some(numbers(1)?[0]),
                "polarizability" => b.polarizability = Some(numbers(1)?[0]),
                "source" => b.source = Some(value.to_string()),
                "nasa_range" => {
                    let n = numbers(11)?;
                    b.nasa.push(NasaRange {
                        t_low: n[0],
                        t_high: n[1],
                        a: n[2..9].try_into().expect("length checked"),
                        b: [n[9], n[10]],
                    });
                }
                "visc_range" | "cond_range" => {
                    let n = numbers(6)?;
                    let fit = TransportFit {
                        t_low: n[0],
                        t_high: n[1],
                        coeffs: n[2..6].try_into().expect("length checked"),
                    };
                    if key == "visc_range" {
                        b.viscosity.push(fit);
                    } else {
                        b.conductivity.push(fit);
                    }
                }
                other => return Err(malformed(format!("unknown key `{other}`"))),
            }
        }

        let mut records = Vec::with_capacity(N_SPECIES);
        for (k, b) in builders.into_iter().enumerate() {
            let b =
                b.ok_or_else(|| SpeciesDataError::MissingSpecies(Species::ALL[k].name().into()))?;
            records.push(b.finish()?);
        }
        let records: [SpeciesRecord; N_SPECIES] = records.try_into().expect("four records");
        let molar_masses = std::array::from_fn(|k| records[k].molar_mass);
        Ok(SpeciesTable {
            records,
            molar_masses,
        })
    }

    pub fn record(&self, k: Species) -> &SpeciesRecord {
        &self.records[k.index()]
    }

    pub fn records(&self) -> &[SpeciesRecord; N_SPECIES] {
        &self.records
    }

    pub fn molar_mass(&self, k: Species) -> f64 {
        self.molar_masses[k.index()]
    }

    pub fn molar_masses(&self) -> &[f64; N_SPECIES] {
        &self.molar_masses
    }
}

struct Builder {
    species: Species,
    line: usize,
    molar_mass: Option<f64>,
    nasa: Vec<NasaRange>,
    viscosity: Vec<TransportFit>,
    conductivity: Vec<TransportFit>,
    lj_sigma: Option<f64>,
    lj_eps_kb: Option<f64>,
    dipole: Option<f64>,
    polarizability: Option<f64>,
    source: Option<String>,
}

impl Builder {
    fn new(species: Species, line: usize) -> Self {
        Builder {
            species,
            line,
            molar_mass: None,
            nasa: Vec::new(),
            viscosity: Vec::new(),
            conductivity: Vec::new(),
            lj_sigma: None,
            lj_eps_kb: None,
            dipole: None,
            polarizability: None,
            source: None,
        }
    }

    fn finish(self) -> Result<SpeciesRecord, SpeciesDataError> {
        let name = self.species.name();
        let missing = |what: &str| SpeciesDataError::Malformed {
            line: self.line,
            msg: format!("species {name} has no {what}"),
        };
        let molar_mass = self.molar_mass.ok_or_else(|| missing("molar_mass"))?;
        let lj_sigma = self.lj_sigma.ok_or_else(|| missing("lj_sigma"))?;
        let lj_eps_kb = self.lj_eps_kb.ok_or_else(|| missing("lj_eps_kb"))?;
        let source = self.source.ok_or_else(|| missing("source"))?;
        for (field, value) in [
            ("molar_mass", molar_mass),
            ("lj_sigma", lj_sigma),
            ("lj_eps_kb", lj_eps_kb),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SpeciesDataError::InvalidValue {
                    species: name.into(),
                    field,
                    value,
                });
            }
        }
        if self.nasa.is_empty() {
            return Err(missing("nasa_range"));
        }
        if self.viscosity.is_empty() {
            return Err(missing("visc_range"));
        }
        if self.conductivity.is_empty() {
            return Err(missing("cond_range"));
        }
        check_ranges(name, "NASA", &self.nasa)?;
        check_ranges(name, "viscosity", &self.viscosity)?;
        check_ranges(name, "conductivity", &self.conductivity)?;
        Ok(SpeciesRecord {
            species: self.species,
            molar_mass,
            nasa: self.nasa,
            viscosity: self.viscosity,
            conductivity: self.conductivity,
            lj_sigma,
            lj_eps_kb,
            dipole: self.dipole,
            polarizability: self.polarizability,
            source,
        })
    }
}

fn check_ranges<R: Ranged>(
    species: &str,
    fit: &'static str,
    ranges: &[R],
) -> Result<(), SpeciesDataError> {
    for r in ranges {
        let (lo, hi) = r.bounds();
        if !(lo < hi) {
            return Err(SpeciesDataError::RangeOrder {
                species: species.into(),
                fit,
                at: lo,
            });
        }
    }
    for pair in ranges.windows(2) {
        let (_, hi) = pair[0].bounds();
        let (lo, _) = pair[1].bounds();
        if lo > hi {
            return Err(SpeciesDataError::RangeGap {
                species: species.into(),
                fit,
                lo: hi,
                hi: lo,
            });
        }
        if lo < hi {
            return Err(SpeciesDataError::RangeOrder {
                species: species.into(),
                fit,
                at: lo,
            });
        }
    }
    let lo = ranges[0].bounds().0;
    let hi = ranges[ranges.len() - 1].bounds().1;
    if lo > OPERATING_T_MIN || hi < OPERATING_T_MAX {
        return Err(SpeciesDataError::Coverage {
            species: species.into(),
            fit,
            lo: OPERATING_T_MIN,
            hi: OPERATING_T_MAX,
        });
    }
    Ok(())
}
