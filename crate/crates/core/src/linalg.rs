//! Banded LU with partial pivoting and tridiagonal helpers.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("matrix is singular at pivot {row}")]
pub struct SingularMatrix {
    pub row: usize,
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Each row stores columns `i - kl ..= i + kl + ku` so that the LU factors
/// (whose upper band grows to `kl + ku` under row interchanges) fit in place.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.kl
    }

    pub fn upper(&self) -> usize {
        self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(
            j + self.kl >= i && j <= i + self.kl + self.ku,
            "({i},{j}) outside band"
        );
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.kl + self.ku {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn clear_row(&mut self, i: usize) {
        let s = i * self.width;
        self.data[s..s + self.width].fill(0.0);
    }

    pub fn scale_row(&mut self, i: usize, s: f64) {
        let start = i * self.width;
        for v in &mut self.data[start..start + self.width] {
            *v *= s;
        }
    }

    /// Column range of row `i` inside the original band.
    pub fn row_cols(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i.saturating_sub(self.kl)..=(i + self.ku).min(self.n - 1)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row_cols(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            for j in self.row_cols(i) {
                out[j] += self.get(i, j) * x[i];
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// In-place LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandLu, SingularMatrix> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for i in (k + 1)..=last_row {
                let v = self.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(SingularMatrix { row: k });
            }
            piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let inv = 1.0 / self.get(k, k);
            for i in (k + 1)..=last_row {
                let l = self.get(i, k) * inv;
                if l == 0.0 {
                    continue;
                }
                self.set(i, k, l);
                for j in (k + 1)..=last_col {
                    let u = self.get(k, j);
                    if u != 0.0 {
                        self.add(i, j, -l * u);
                    }
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

#[derive(Clone, Debug)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn dim(&self) -> usize {
        self.m.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.m.n, self.m.kl, self.m.ku);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            if bk != 0.0 {
                for i in (k + 1)..=(k + kl).min(n - 1) {
                    b[i] -= self.m.get(i, k) * bk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..=(i + kl + ku).min(n - 1) {
                s -= self.m.get(i, j) * b[j];
            }
            b[i] = s / self.m.get(i, i);
        }
    }

    /// Solves Aᵀ x = b.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.m.n, self.m.kl, self.m.ku);
        for j in 0..n {
            let mut s = b[j];
            for i in j.saturating_sub(kl + ku)..j {
                s -= self.m.get(i, j) * b[i];
            }
            b[j] = s / self.m.get(j, j);
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for i in (k + 1)..=(k + kl).min(n - 1) {
                s -= self.m.get(i, k) * b[i];
            }
            b[k] = s;
            b.swap(k, self.piv[k]);
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_transpose_in_place(&mut x);
        x
    }
}

/// Solves a symmetric tridiagonal system by the Thomas algorithm.
pub fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if n > 1 {
        c[0] = off[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in (k + 1)..n {
                let l = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= l * a[k][j];
                }
                b[i] -= l * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    fn build(n: usize, kl: usize, ku: usize, vals: &[f64]) -> BandMatrix {
        let mut m = BandMatrix::zeros(n, kl, ku);
        let mut it = vals.iter().cycle();
        for i in 0..n {
            for j in m.row_cols(i) {
                // zero diagonal every third row forces pivoting
                let v = if i == j && i % 3 == 1 {
                    0.0
                } else {
                    *it.next().unwrap()
                };
                m.set(i, j, v);
            }
        }
        m
    }

    proptest! {
        #[test]
        fn band_lu_matches_dense_elimination(
            vals in prop::collection::vec(-1.0f64..1.0, 40),
            rhs in prop::collection::vec(-1.0f64..1.0, 17),
            kl in 1usize..4,
            ku in 1usize..4,
        ) {
            let n = rhs.len();
            let m = build(n, kl, ku, &vals);
            let dense = m.to_dense();
            let lu = match m.clone().factor() { Ok(lu) => lu, Err(_) => return Ok(()) };
            let x = lu.solve(&rhs);
            let r = m.matvec(&x);
            let scale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            for i in 0..n {
                prop_assert!((r[i] - rhs[i]).abs() < 1e-9 * scale);
            }
            let xd = dense_solve(dense.clone(), rhs.clone());
            for i in 0..n {
                prop_assert!((x[i] - xd[i]).abs() < 1e-8 * scale);
            }
            let xt = lu.solve_transpose(&rhs);
            let dt: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| dense[j][i]).collect()).collect();
            let xtd = dense_solve(dt, rhs.clone());
            let scale = xtd.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            for i in 0..n {
                prop_assert!((xt[i] - xtd[i]).abs() < 1e-8 * scale);
            }
        }
    }

    #[test]
    fn singular_matrix_is_detected() {
        let m = BandMatrix::zeros(4, 1, 1);
        assert_eq!(m.factor().unwrap_err().row, 0);
    }

    #[test]
    fn tridiagonal_solve() {
        let diag = [4.0, 4.0, 4.0, 4.0];
        let off = [1.0, 1.0, 1.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let b: Vec<f64> = (0..4)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += off[i - 1] * x[i - 1];
                }
                if i < 3 {
                    s += off[i] * x[i + 1];
                }
                s
            })
            .collect();
        let got = solve_tridiagonal(&diag, &off, &b);
        for i in 0..4 {
            assert!((got[i] - x[i]).abs() < 1e-14);
        }
    }
}
