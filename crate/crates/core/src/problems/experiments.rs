//! Conversion measurements: CSV input/output and a synthetic generator.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinetics::KineticParams;
use crate::reactor::{NewtonOptions, OperatingPoint, Reactor, SolveError};

pub const HEADER: [&str; 4] = ["id", "T_wall_C", "flow_mln_min", "conversion"];

/// Wall temperatures (°C) and feeds (mL/min) of the standard 21-point grid.
pub const GRID_TEMPERATURES_C: [f64; 7] = [250.0, 275.0, 300.0, 325.0, 350.0, 375.0, 400.0];
pub const GRID_FLOWS: [f64; 3] = [50.0, 100.0, 150.0];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("cannot read experiments: {0}")]
    Io(#[from] std::io::Error),
    #[error("experiment file header must be `id,T_wall_C,flow_mln_min,conversion`, got `{0}`")]
    Header(String),
    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },
    #[error("experiment {id}: conversion {value} outside [0, 1]")]
    Conversion { id: u32, value: f64 },
    #[error("experiment {id}: {what} {value} must be positive and finite")]
    NonPositive {
        id: u32,
        what: &'static str,
        value: f64,
    },
    #[error("experiments {first} and {second} share T_wall = {t} °C and flow = {flow} mL/min")]
    Duplicate {
        first: u32,
        second: u32,
        t: f64,
        flow: f64,
    },
    #[error("experiment file is empty")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub id: u32,
    #[serde(rename = "T_wall_C")]
    pub t_wall_c: f64,
    #[serde(rename = "flow_mln_min")]
    pub flow: f64,
    pub conversion: f64,
}

impl ExperimentRecord {
    pub fn operating_point(&self, kinetics: KineticParams) -> OperatingPoint {
        OperatingPoint::isothermal(self.flow, self.t_wall_c, kinetics)
    }
}

/// Validated list of experiments.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    records: Vec<ExperimentRecord>,
}

impl Dataset {
    pub fn new(records: Vec<ExperimentRecord>) -> Result<Self, ExperimentError> {
        if records.is_empty() {
            return Err(ExperimentError::Empty);
        }
        let mut seen = HashMap::new();
        for r in &records {
            if !(0.0..=1.0).contains(&r.conversion) {
                return Err(ExperimentError::Conversion {
                    id: r.id,
                    value: r.conversion,
                });
            }
            if !(r.flow > 0.0 && r.flow.is_finite()) {
                return Err(ExperimentError::NonPositive {
                    id: r.id,
                    what: "flow",
                    value: r.flow,
                });
            }
            if !(r.t_wall_c + crate::thermo::KELVIN_OFFSET > 0.0 && r.t_wall_c.is_finite()) {
                return Err(ExperimentError::NonPositive {
                    id: r.id,
                    what: "absolute wall temperature",
                    value: r.t_wall_c,
                });
            }
            if let Some(&first) = seen.get(&(r.t_wall_c.to_bits(), r.flow.to_bits())) {
                return Err(ExperimentError::Duplicate {
                    first,
                    second: r.id,
                    t: r.t_wall_c,
                    flow: r.flow,
                });
            }
            seen.insert((r.t_wall_c.to_bits(), r.flow.to_bits()), r.id);
        }
        Ok(Dataset { records })
    }

    pub fn records(&self) -> &[ExperimentRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn read<R: Read>(reader: R) -> Result<Self, ExperimentError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let header = rdr.headers().map_err(|e| ExperimentError::Row {
            row: 1,
            msg: e.to_string(),
        })?;
        if header.iter().collect::<Vec<_>>() != HEADER {
            return Err(ExperimentError::Header(
                header.iter().collect::<Vec<_>>().join(","),
            ));
        }
        let mut records = Vec::new();
        for (i, row) in rdr.deserialize::<ExperimentRecord>().enumerate() {
            records.push(row.map_err(|e| ExperimentError::Row {
                row: i + 2,
                msg: e.to_string(),
            })?);
        }
        Dataset::new(records)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        Dataset::read(std::fs::File::open(path)?)
    }

    /// Writes the CSV with shortest round-trip float formatting.
    pub fn write<W: Write>(&self, writer: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(HEADER).map_err(csv_io)?;
        for r in &self.records {
            w.write_record([
                r.id.to_string(),
                r.t_wall_c.to_string(),
                r.flow.to_string(),
                r.conversion.to_string(),
            ])
            .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ExperimentError> {
        self.write(std::fs::File::create(path)?)
    }
}

fn csv_io(e: csv::Error) -> ExperimentError {
    ExperimentError::Io(std::io::Error::other(e))
}

/// The 21 (T_wall, flow) pairs with ids 1..=21, ordered by flow then temperature.
pub fn standard_grid() -> Vec<(u32, f64, f64)> {
    let mut out = Vec::with_capacity(21);
    for &q in &GRID_FLOWS {
        for &t in &GRID_TEMPERATURES_C {
            out.push((out.len() as u32 + 1, t, q));
        }
    }
    out
}

/// Simulated conversions at the given grid, each multiplied by 1 + ε with
/// ε uniform in [−noise, noise] and clipped to [0, 1].
pub fn synthetic_dataset(
    reactor: &Reactor,
    kinetics: KineticParams,
    grid: &[(u32, f64, f64)],
    noise: f64,
    seed: u64,
    newton: &NewtonOptions,
) -> Result<Dataset, SolveError> {
    let solve = |&(id, t, q): &(u32, f64, f64)| -> Result<ExperimentRecord, SolveError> {
        let op = OperatingPoint::isothermal(q, t, kinetics);
        let sol = reactor.solve(&op, None, newton)?;
        Ok(ExperimentRecord {
            id,
            t_wall_c: t,
            flow: q,
            conversion: reactor.conversion(&sol.state),
        })
    };
    #[cfg(feature = "parallel")]
    let clean: Result<Vec<_>, _> = {
        use rayon::prelude::*;
        grid.par_iter().map(solve).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let clean: Result<Vec<_>, _> = grid.iter().map(solve).collect();
    let mut records = clean?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in &mut records {
        let eps: f64 = if noise > 0.0 {
            rng.random_range(-noise..=noise)
        } else {
            0.0
        };
        r.conversion = (r.conversion * (1.0 + eps)).clamp(0.0, 1.0);
    }
    Ok(
        Dataset::new(records)
            .expect("simulated conversions lie in [0, 1] on a duplicate-free grid"),
    )
}
