//! Uniform 1D mesh on [x_start, x_end] and P1 mass-matrix helpers.

use serde::Serialize;

use crate::linalg::solve_tridiagonal;

/// Three-point Gauss rule on [-1, 1]: (abscissa, weight).
pub const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mesh1D {
    x_start: f64,
    x_end: f64,
    n_nodes: usize,
    h: f64,
}

impl Mesh1D {
    pub fn uniform(x_start: f64, x_end: f64, n_nodes: usize) -> Self {
        assert!(n_nodes >= 2 && x_end > x_start);
        Mesh1D {
            x_start,
            x_end,
            n_nodes,
            h: (x_end - x_start) / (n_nodes - 1) as f64,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_elements(&self) -> usize {
        self.n_nodes - 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x_start(&self) -> f64 {
        self.x_start
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n_nodes {
            self.x_end
        } else {
            self.x_start + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.node(i)).collect()
    }

    /// Physical quadrature points of element `e`.
    pub fn quad_points(&self, e: usize) -> [f64; 3] {
        let xa = self.node(e);
        GAUSS3.map(|(xi, _)| xa + 0.5 * self.h * (1.0 + xi))
    }

    /// Element index and local coordinate in [0, 1] of a point.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let s = (x - self.x_start) / self.h;
        let e = (s.floor().max(0.0) as usize).min(self.n_elements() - 1);
        (e, (s - e as f64).clamp(0.0, 1.0))
    }

    /// Diagonal and off-diagonal of the P1 mass matrix.
    pub fn mass_matrix(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.h;
        let mut diag = vec![2.0 * h / 3.0; self.n_nodes];
        diag[0] = h / 3.0;
        diag[self.n_nodes - 1] = h / 3.0;
        (diag, vec![h / 6.0; self.n_nodes - 1])
    }

    /// L² inner product of two P1 functions given by nodal values.
    pub fn l2_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let (diag, off) = self.mass_matrix();
        let mut s = 0.0;
        for i in 0..self.n_nodes {
            s += diag[i] * a[i] * b[i];
        }
        for i in 0..self.n_nodes - 1 {
            s += off[i] * (a[i] * b[i + 1] + a[i + 1] * b[i]);
        }
        s
    }

    /// Riesz representative in L²: solves M g = d.
    pub fn riesz(&self, d: &[f64]) -> Vec<f64> {
        let (diag, off) = self.mass_matrix();
        solve_tridiagonal(&diag, &off, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mesh_layout() {
        let m = Mesh1D::uniform(-0.005, 0.05, 1001);
        assert_eq!(m.n_elements(), 1000);
        assert_eq!(m.node(0), -0.005);
        assert_eq!(m.node(1000), 0.05);
        assert!((m.h() - 5.5e-5).abs() < 1e-18);
        for i in 1..1001 {
            assert!(((m.node(i) - m.node(i - 1)) - m.h()).abs() < 1e-15);
        }
    }

    #[test]
    fn l2_inner_integrates_linears_exactly() {
        let m = Mesh1D::uniform(0.0, 2.0, 21);
        let a: Vec<f64> = m.nodes().iter().map(|x| 1.0 + x).collect();
        let b: Vec<f64> = m.nodes().iter().map(|x| 3.0 - x).collect();
        // ∫_0^2 (1+x)(3-x) dx = 22/3
        assert!((m.l2_inner(&a, &b) - 22.0 / 3.0).abs() < 1e-12);
        let d: Vec<f64> = {
            let (diag, off) = m.mass_matrix();
            (0..21)
                .map(|i| {
                    let mut s = diag[i] * a[i];
                    if i > 0 {
                        s += off[i - 1] * a[i - 1];
                    }
                    if i < 20 {
                        s += off[i] * a[i + 1];
                    }
                    s
                })
                .collect()
        };
        let g = m.riesz(&d);
        for i in 0..21 {
            assert!((g[i] - a[i]).abs() < 1e-12);
        }
    }
}
