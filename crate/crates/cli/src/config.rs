//! TOML run configuration with annotated defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sabatier_core::kinetics::KineticParams;
use sabatier_core::optim::{HomotopyOptions, LbfgsOptions};
use sabatier_core::problems::{FlowOptions, WALL_T_START};
use sabatier_core::reactor::{NewtonOptions, ReactorConfig, WallLayout, WallTemperature};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Identification,
    Tracking,
    Flow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub species: Option<PathBuf>,
    pub experiments: PathBuf,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            species: None,
            experiments: PathBuf::from("experiments.csv"),
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Kinetics {
    pub activation_energy: f64,
    pub log_pre_exponential: f64,
    pub exponent: f64,
}

impl Kinetics {
    fn from_params(p: KineticParams) -> Self {
        Kinetics {
            activation_energy: p.activation_energy,
            log_pre_exponential: p.log_pre_exponential,
            exponent: p.exponent,
        }
    }

    pub fn params(&self) -> Result<KineticParams, CliError> {
        KineticParams::new(
            self.activation_energy,
            self.log_pre_exponential,
            self.exponent,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

impl Default for Kinetics {
    fn default() -> Self {
        Kinetics::from_params(KineticParams::reference())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fit {
    pub activation_energy: f64,
    pub log_pre_exponential: f64,
    pub exponent: f64,
}

impl Default for Fit {
    fn default() -> Self {
        let p = KineticParams::initial_guess();
        Fit {
            activation_energy: p.activation_energy,
            log_pre_exponential: p.log_pre_exponential,
            exponent: p.exponent,
        }
    }
}

impl Fit {
    pub fn start(&self) -> Result<KineticParams, CliError> {
        Kinetics {
            activation_energy: self.activation_energy,
            log_pre_exponential: self.log_pre_exponential,
            exponent: self.exponent,
        }
        .params()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub problem: Problem,
    pub temperature_model: WallLayout,
    pub flow_rate: f64,
    pub wall_temperature: Vec<f64>,
    pub start_temperature: f64,
    pub chi_des: f64,
    pub gamma_schedule: Vec<f64>,
    pub noise: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            problem: Problem::Tracking,
            temperature_model: WallLayout::Constant,
            flow_rate: 50.0,
            wall_temperature: vec![WALL_T_START],
            start_temperature: WALL_T_START,
            chi_des: 0.85,
            gamma_schedule: Vec::new(),
            noise: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flow {
    pub flow_min: f64,
    pub flow_max_start: f64,
    pub flow_step: f64,
    pub flow_max_cap: f64,
    pub flow_start: f64,
    pub inner_tol_rel: f64,
    pub inner_tol_abs: f64,
}

impl Default for Flow {
    fn default() -> Self {
        let d = FlowOptions::for_layout(WallLayout::Constant);
        Flow {
            flow_min: d.flow_min,
            flow_max_start: d.flow_max_start,
            flow_step: d.flow_step,
            flow_max_cap: d.flow_max_cap,
            flow_start: d.flow_start,
            inner_tol_rel: d.homotopy.inner.tol_rel,
            inner_tol_abs: d.homotopy.inner.tol_abs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Equilibrium {
    pub t_min_c: f64,
    pub t_max_c: f64,
    pub points: usize,
    pub pressures_bar: Vec<f64>,
}

impl Default for Equilibrium {
    fn default() -> Self {
        Equilibrium {
            t_min_c: 150.0,
            t_max_c: 600.0,
            points: 46,
            pressures_bar: vec![1.0, 5.0, 10.0, 20.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub jobs: usize,
    pub paths: Paths,
    pub reactor: ReactorConfig,
    pub kinetics: Kinetics,
    pub scenario: Scenario,
    pub solver: NewtonOptions,
    pub optimizer: LbfgsOptions,
    pub fit: Fit,
    pub flow: Flow,
    pub equilibrium: Equilibrium,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub species: Option<PathBuf>,
    pub experiments: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.out {
            self.paths.out = p.clone();
        }
        if let Some(p) = &o.species {
            self.paths.species = Some(p.clone());
        }
        if let Some(p) = &o.experiments {
            self.paths.experiments = p.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.reactor
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.kinetics.params()?;
        self.fit.start()?;
        let s = &self.scenario;
        if !(s.flow_rate > 0.0 && s.flow_rate.is_finite()) {
            return bad(format!(
                "scenario.flow_rate must be positive, got {}",
                s.flow_rate
            ));
        }
        if !(s.chi_des > 0.0 && s.chi_des < 1.0) {
            return bad(format!(
                "scenario.chi_des must lie in (0, 1), got {}",
                s.chi_des
            ));
        }
        if !(0.0..1.0).contains(&s.noise) {
            return bad(format!(
                "scenario.noise must lie in [0, 1), got {}",
                s.noise
            ));
        }
        if s.gamma_schedule
            .iter()
            .any(|g| !(*g > 0.0 && g.is_finite()))
        {
            return bad("scenario.gamma_schedule entries must be positive".into());
        }
        if !(s.start_temperature > 0.0) {
            return bad(format!(
                "scenario.start_temperature must be positive, got {}",
                s.start_temperature
            ));
        }
        self.wall()?;
        let o = &self.optimizer;
        if o.memory == 0
            || !(o.tol_rel >= 0.0)
            || !(o.tol_abs >= 0.0)
            || !(o.armijo > 0.0 && o.armijo < 1.0)
        {
            return bad("optimizer: memory ≥ 1, tolerances ≥ 0 and 0 < armijo < 1 required".into());
        }
        let n = &self.solver;
        if !(n.tol > 0.0)
            || !(n.lambda_min > 0.0 && n.lambda_min <= n.lambda_start && n.lambda_start <= 1.0)
        {
            return bad("solver: tol > 0 and 0 < lambda_min ≤ lambda_start ≤ 1 required".into());
        }
        let f = &self.flow;
        if !(f.flow_min > 0.0
            && f.flow_min < f.flow_max_start
            && f.flow_max_start <= f.flow_max_cap
            && f.flow_step > 0.0)
        {
            return bad(
                "flow: 0 < flow_min < flow_max_start ≤ flow_max_cap and flow_step > 0 required"
                    .into(),
            );
        }
        let e = &self.equilibrium;
        if e.points < 2 || !(e.t_min_c < e.t_max_c) || e.pressures_bar.iter().any(|p| !(*p > 0.0)) {
            return bad(
                "equilibrium: points ≥ 2, t_min_c < t_max_c and positive pressures required".into(),
            );
        }
        Ok(())
    }

    /// Wall profile from `scenario.wall_temperature`; a single value fills
    /// every stage or node.
    pub fn wall(&self) -> Result<WallTemperature, CliError> {
        let layout = self.scenario.temperature_model;
        let dim = layout.dim(self.reactor.n_nodes);
        let v = &self.scenario.wall_temperature;
        let values = match v.len() {
            1 => vec![v[0]; dim],
            n if n == dim => v.clone(),
            n => {
                return Err(CliError::Config(format!(
                    "scenario.wall_temperature has {n} values, temperature model {layout} needs 1 or {dim}"
                )))
            }
        };
        if values.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(CliError::Config(
                "wall temperatures must be positive kelvin values".into(),
            ));
        }
        Ok(WallTemperature::new(layout, values))
    }

    pub fn flow_options(&self) -> FlowOptions {
        let layout = self.scenario.temperature_model;
        let mut o = FlowOptions::for_layout(layout);
        let f = &self.flow;
        o.homotopy.inner = LbfgsOptions {
            tol_rel: f.inner_tol_rel,
            tol_abs: f.inner_tol_abs,
            ..self.optimizer.clone()
        };
        if !self.scenario.gamma_schedule.is_empty() {
            o.homotopy = HomotopyOptions {
                gammas: self.scenario.gamma_schedule.clone(),
                inner: o.homotopy.inner,
            };
        }
        o.flow_min = f.flow_min;
        o.flow_max_start = f.flow_max_start;
        o.flow_step = f.flow_step;
        o.flow_max_cap = f.flow_max_cap;
        o.flow_start = f.flow_start;
        o.t_start = self.scenario.start_temperature;
        o
    }
}

const HEADER: &str = "\
# Sabatier reactor run configuration.
# Every key is optional; omitted keys take the values shown here.
";

fn comment(section: &str, key: &str) -> &'static str {
    match (section, key) {
        ("", "seed") => "seed of the synthetic measurement noise",
        ("", "jobs") => "worker threads for independent solves, 0 = one per core",
        ("paths", "experiments") => "measured conversions: id,T_wall_C,flow_mln_min,conversion",
        ("paths", "out") => "output directory",
        ("reactor", "length") => "m, catalyst-filled channel length",
        ("reactor", "width") => "m, channel width",
        ("reactor", "height") => "m, channel height",
        ("reactor", "n_channels") => "parallel channels sharing the feed",
        ("reactor", "permeability") => "m², packed-bed permeability",
        ("reactor", "heat_transfer") => "W/(K m³), volumetric wall heat transfer coefficient",
        ("reactor", "p_ref") => "Pa, operating pressure",
        ("reactor", "inlet_mole_fractions") => "CO2, H2, CH4, H2O (stoichiometric feed)",
        ("reactor", "n_nodes") => "mesh nodes on the whole channel",
        ("reactor", "inlet_section") => "inert inlet section, fraction of length",
        ("reactor", "normal_pressure") => "Pa, reference state of mL/min feeds",
        ("reactor", "normal_temperature") => "K, reference state of mL/min feeds",
        ("kinetics", "activation_energy") => "J/mol",
        ("kinetics", "log_pre_exponential") => "ln A",
        ("kinetics", "exponent") => "reaction order n",
        ("scenario", "problem") => "identification | tracking | flow",
        ("scenario", "temperature_model") => "constant | two_stage | three_stage | distributed",
        ("scenario", "flow_rate") => "mL/min at normal conditions, whole reactor",
        ("scenario", "wall_temperature") => "K, one value or one per stage / node",
        ("scenario", "start_temperature") => "K, initial wall temperature of the optimizers",
        ("scenario", "chi_des") => "required CO2 conversion for flow maximization",
        ("scenario", "gamma_schedule") => {
            "penalty parameters, empty = 10^0..10^6 (7^0..7^7 distributed)"
        }
        ("scenario", "noise") => "relative uniform noise of generate-data",
        ("solver", "tol") => "scaled residual max-norm at convergence",
        ("solver", "max_iter") => "Newton iterations",
        ("solver", "lambda_min") => "smallest damping factor before giving up",
        ("solver", "lambda_start") => "damping of the first Newton step",
        ("solver", "polish_steps") => "extra full steps after convergence",
        ("optimizer", "memory") => "L-BFGS history pairs",
        ("optimizer", "tol_rel") => "stationarity relative to the start",
        ("optimizer", "tol_abs") => "absolute stationarity",
        ("optimizer", "max_iter") => "iterations per run",
        ("optimizer", "armijo") => "sufficient decrease constant",
        ("optimizer", "max_halvings") => "step halvings before the line search fails",
        ("fit", "activation_energy") => "J/mol, start of the identification",
        ("fit", "log_pre_exponential") => "start of the identification",
        ("fit", "exponent") => "start of the identification",
        ("flow", "flow_min") => "mL/min, lower feed bound",
        ("flow", "flow_max_start") => "mL/min, first upper feed bound",
        ("flow", "flow_step") => "mL/min, raise of the upper bound while it is active",
        ("flow", "flow_max_cap") => "mL/min, largest upper bound tried",
        ("flow", "flow_start") => "mL/min, initial feed",
        ("flow", "inner_tol_rel") => "relative tolerance of each penalty stage",
        ("flow", "inner_tol_abs") => "absolute tolerance of each penalty stage",
        ("equilibrium", "t_min_c") => "°C",
        ("equilibrium", "t_max_c") => "°C",
        ("equilibrium", "points") => "temperatures per pressure",
        ("equilibrium", "pressures_bar") => "bar",
        _ => "",
    }
}

fn write_entries(out: &mut String, section: &str, table: &toml::Table) {
    let width = table.keys().map(String::len).max().unwrap_or(0);
    for (key, value) in table {
        let line = format!("{key:<width$} = {value}");
        match comment(section, key) {
            "" => writeln!(out, "{line}"),
            c => writeln!(out, "{line:<40} # {c}"),
        }
        .unwrap();
    }
}

/// Default configuration as commented TOML.
pub fn annotated_defaults() -> String {
    let value = toml::Table::try_from(RunConfig::default()).expect("defaults serialize");
    let mut out = String::from(HEADER);
    let top: toml::Table = value
        .iter()
        .filter(|(_, v)| !v.is_table())
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    out.push('\n');
    write_entries(&mut out, "", &top);
    let sections = [
        "paths",
        "reactor",
        "kinetics",
        "scenario",
        "solver",
        "optimizer",
        "fit",
        "flow",
        "equilibrium",
    ];
    for name in sections {
        let table = value[name].as_table().expect("section is a table");
        writeln!(out, "\n[{name}]").unwrap();
        if name == "paths" {
            writeln!(
                out,
                "{:<40} # coefficient file, bundled data when absent",
                "# species = \"species.dat\""
            )
            .unwrap();
        }
        write_entries(&mut out, name, table);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotated_defaults_parse_back_to_defaults() {
        let text = annotated_defaults();
        assert_eq!(RunConfig::parse(&text).unwrap(), RunConfig::default());
        for line in text
            .lines()
            .filter(|l| l.contains(" = ") && !l.starts_with('#'))
        {
            assert!(line.contains(" # "), "unannotated default: {line}");
        }
    }

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        c.validate().unwrap();
        assert_eq!(c.reactor.n_nodes, 1001);
        assert_eq!(c.reactor.p_ref, 1e6);
    }

    #[test]
    fn unknown_keys_and_bad_models_are_rejected() {
        assert!(RunConfig::parse("[reactor]\nlenght = 0.1\n").is_err());
        assert!(RunConfig::parse("[scenario]\ntemperature_model = \"four_stage\"\n").is_err());
        assert!(RunConfig::parse("[scenario]\nproblem = \"design\"\n").is_err());
    }

    #[test]
    fn invalid_values_fail_validation() {
        let c = RunConfig::parse("[scenario]\nflow_rate = -5.0\n").unwrap();
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let c = RunConfig::parse("[scenario]\ntemperature_model = \"two_stage\"\nwall_temperature = [600.0, 610.0, 620.0]\n")
            .unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::parse("[kinetics]\nexponent = -1.0\n").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c = RunConfig::parse("seed = 3\n[paths]\nout = \"a\"\n").unwrap();
        c.apply(&Overrides {
            out: Some("b".into()),
            seed: Some(9),
            ..Overrides::default()
        });
        assert_eq!(c.paths.out, PathBuf::from("b"));
        assert_eq!(c.seed, 9);
    }

    #[test]
    fn single_wall_value_fills_the_layout() {
        let c = RunConfig::parse(
            "[scenario]\ntemperature_model = \"three_stage\"\nwall_temperature = [600.0]\n",
        )
        .unwrap();
        assert_eq!(c.wall().unwrap().values, vec![600.0; 3]);
    }
}
