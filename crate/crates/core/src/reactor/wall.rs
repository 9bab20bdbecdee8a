//! Wall-temperature profiles T_wall(x).
//!
//! Staged layouts split the reaction zone (0, L) into equal parts; the first
//! stage also covers the inlet section. The distributed layout holds one P1
//! value per mesh node.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mesh::Mesh1D;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallLayout {
    Constant,
    TwoStage,
    ThreeStage,
    Distributed,
}

impl WallLayout {
    pub const ALL: [WallLayout; 4] = [
        WallLayout::Constant,
        WallLayout::TwoStage,
        WallLayout::ThreeStage,
        WallLayout::Distributed,
    ];

    /// Number of free values on a mesh with `n_nodes` nodes.
    pub fn dim(self, n_nodes: usize) -> usize {
        match self {
            WallLayout::Constant => 1,
            WallLayout::TwoStage => 2,
            WallLayout::ThreeStage => 3,
            WallLayout::Distributed => n_nodes,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WallLayout::Constant => "constant",
            WallLayout::TwoStage => "two_stage",
            WallLayout::ThreeStage => "three_stage",
            WallLayout::Distributed => "distributed",
        }
    }
}

impl fmt::Display for WallLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WallLayout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "constant" => Ok(WallLayout::Constant),
            "two_stage" => Ok(WallLayout::TwoStage),
            "three_stage" => Ok(WallLayout::ThreeStage),
            "distributed" => Ok(WallLayout::Distributed),
            _ => Err(format!(
                "unknown temperature model `{s}` (expected constant, two_stage, three_stage or distributed)"
            )),
        }
    }
}

/// Linear weights of the free values at one point: at most two nonzeros.
pub type Stencil = [(usize, f64); 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallTemperature {
    pub layout: WallLayout,
    pub values: Vec<f64>,
}

impl WallTemperature {
    pub fn constant(t: f64) -> Self {
        WallTemperature {
            layout: WallLayout::Constant,
            values: vec![t],
        }
    }

    pub fn new(layout: WallLayout, values: Vec<f64>) -> Self {
        WallTemperature { layout, values }
    }

    /// Every free value set to `t`.
    pub fn uniform(layout: WallLayout, n_nodes: usize, t: f64) -> Self {
        WallTemperature {
            layout,
            values: vec![t; layout.dim(n_nodes)],
        }
    }

    /// Temperature at the inlet boundary, which also fixes T_in.
    pub fn inlet(&self) -> f64 {
        self.values[0]
    }

    pub fn stencil(&self, mesh: &Mesh1D, x: f64) -> Stencil {
        let length = mesh.x_end();
        let stage = |parts: usize| -> usize {
            let mut s = 0;
            for b in 1..parts {
                if x > length * b as f64 / parts as f64 {
                    s = b;
                }
            }
            s
        };
        match self.layout {
            WallLayout::Constant => [(0, 1.0), (0, 0.0)],
            WallLayout::TwoStage => [(stage(2), 1.0), (0, 0.0)],
            WallLayout::ThreeStage => [(stage(3), 1.0), (0, 0.0)],
            WallLayout::Distributed => {
                let (e, s) = mesh.locate(x);
                [(e, 1.0 - s), (e + 1, s)]
            }
        }
    }

    pub fn eval(&self, mesh: &Mesh1D, x: f64) -> f64 {
        self.stencil(mesh, x)
            .iter()
            .map(|&(i, w)| w * self.values[i])
            .sum()
    }

    /// Sampled at every mesh node.
    pub fn nodal(&self, mesh: &Mesh1D) -> Vec<f64> {
        mesh.nodes().iter().map(|&x| self.eval(mesh, x)).collect()
    }
}
