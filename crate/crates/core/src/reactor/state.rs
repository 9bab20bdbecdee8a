//! Interleaved dof layout of the discrete state.
//!
//! Node `i` owns dofs `7i + [p, u, T, Y_CO2, Y_H2, Y_CH4]`; the quadratic
//! velocity bubble of element `e` sits at `7e + 6`. Element `e` therefore
//! touches the contiguous block `7e ..= 7e + 12`.

use serde::{Deserialize, Serialize};

use crate::species::N_SPECIES;

pub const STRIDE: usize = 7;
pub const P: usize = 0;
pub const U: usize = 1;
pub const T: usize = 2;
pub const Y: usize = 3;
pub const U_MID: usize = 6;
/// Dofs of one element block.
pub const LOCAL: usize = 13;

pub fn n_dofs(n_nodes: usize) -> usize {
    STRIDE * (n_nodes - 1) + 6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n_nodes: usize,
    data: Vec<f64>,
}

impl StateVector {
    pub fn zeros(n_nodes: usize) -> Self {
        StateVector {
            n_nodes,
            data: vec![0.0; n_dofs(n_nodes)],
        }
    }

    pub fn from_vec(n_nodes: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == n_dofs(n_nodes)).then_some(StateVector { n_nodes, data })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn p(&self, i: usize) -> f64 {
        self.data[STRIDE * i + P]
    }

    pub fn u(&self, i: usize) -> f64 {
        self.data[STRIDE * i + U]
    }

    pub fn u_mid(&self, e: usize) -> f64 {
        self.data[STRIDE * e + U_MID]
    }

    pub fn t(&self, i: usize) -> f64 {
        self.data[STRIDE * i + T]
    }

    /// Independent mass fraction `k < 3` at node `i`.
    pub fn y(&self, i: usize, k: usize) -> f64 {
        self.data[STRIDE * i + Y + k]
    }

    pub fn y_full(&self, i: usize) -> [f64; N_SPECIES] {
        let y = [self.y(i, 0), self.y(i, 1), self.y(i, 2)];
        [y[0], y[1], y[2], 1.0 - y[0] - y[1] - y[2]]
    }

    pub fn set_p(&mut self, i: usize, v: f64) {
        self.data[STRIDE * i + P] = v;
    }

    pub fn set_u(&mut self, i: usize, v: f64) {
        self.data[STRIDE * i + U] = v;
    }

    pub fn set_u_mid(&mut self, e: usize, v: f64) {
        self.data[STRIDE * e + U_MID] = v;
    }

    pub fn set_t(&mut self, i: usize, v: f64) {
        self.data[STRIDE * i + T] = v;
    }

    pub fn set_y(&mut self, i: usize, k: usize, v: f64) {
        self.data[STRIDE * i + Y + k] = v;
    }

    pub fn local(&self, e: usize) -> [f64; LOCAL] {
        self.data[STRIDE * e..STRIDE * e + LOCAL]
            .try_into()
            .expect("element block")
    }

    pub fn pressure(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.p(i)).collect()
    }

    pub fn velocity(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.u(i)).collect()
    }

    pub fn temperature(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.t(i)).collect()
    }

    pub fn mass_fraction(&self, k: usize) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.y_full(i)[k]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dof_count_and_element_blocks() {
        assert_eq!(n_dofs(1001), 7006);
        let mut s = StateVector::zeros(4);
        s.set_u_mid(1, 2.5);
        s.set_t(2, 600.0);
        let l = s.local(1);
        assert_eq!(l[U_MID], 2.5);
        assert_eq!(l[STRIDE + T], 600.0);
        assert_eq!(s.y_full(0)[3], 1.0);
    }
}
