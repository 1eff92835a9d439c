//! Minimal sparse linear algebra: COO assembly buffer, CSR storage, and a
//! Jacobi-preconditioned conjugate gradient solver.

use crate::error::{Error, Result};

/// Coordinate-format accumulation buffer. Duplicate entries are summed when
/// converting to CSR.
#[derive(Debug, Clone)]
pub struct Coo {
    n: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl Coo {
    pub fn new(n: usize) -> Self {
        assert!(n < u32::MAX as usize, "matrix dimension too large for u32 indices");
        Coo { n, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i as u32, j as u32, v));
    }

    pub fn to_csr(mut self) -> Csr {
        self.entries
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        // row_ptr holds per-row counts first, offsets after the prefix sum
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col = Vec::new();
        let mut val = Vec::new();
        let mut last: Option<(u32, u32)> = None;
        for &(i, j, v) in &self.entries {
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i as usize + 1] += 1;
                last = Some((i, j));
            }
        }
        for r in 0..self.n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Csr { row_ptr, col, val }
    }
}

/// Compressed sparse row matrix (square).
#[derive(Debug, Clone)]
pub struct Csr {
    pub row_ptr: Vec<usize>,
    pub col: Vec<u32>,
    pub val: Vec<f64>,
}

impl Csr {
    pub fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.col.len()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n());
        debug_assert_eq!(y.len(), self.n());
        for i in 0..self.n() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k] as usize];
            }
            y[i] = acc;
        }
    }

    /// Entry lookup by binary search within the row.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&(j as u32)) {
            Ok(k) => self.val[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[k] as usize;
                if j > i {
                    worst = worst.max((self.val[k] - self.get(j, i)).abs());
                }
            }
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solution statistics from [`jacobi_pcg`].
#[derive(Debug, Clone, Copy)]
pub struct CgStats {
    pub iterations: usize,
    /// `|r| / |b|` at exit.
    pub relative_residual: f64,
}

/// Conjugate gradient with diagonal preconditioning, zero initial guess.
/// Converges when the true-residual norm drops below `rel_tol * |b|`.
/// `b = 0` returns the zero vector immediately.
pub fn jacobi_pcg(
    a: &Csr,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    let n = a.n();
    assert_eq!(b.len(), n);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], CgStats { iterations: 0, relative_residual: 0.0 }));
    }
    let diag = a.diagonal();
    let mut inv_diag = Vec::with_capacity(n);
    for (i, &d) in diag.iter().enumerate() {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "matrix diagonal entry {i} is {d}; system is not positive definite"
            )));
        }
        inv_diag.push(1.0 / d);
    }

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap.is_finite() && pap > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "conjugate gradient curvature p'Ap = {pap}; system is not positive definite"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = norm(&r);
        if rn <= rel_tol * b_norm {
            return Ok((x, CgStats { iterations: it, relative_residual: rn / b_norm }));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverStalled {
        iterations: max_iter,
        residual: norm(&r) / b_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> Csr {
        let mut coo = Coo::new(n);
        for i in 0..n {
            coo.push(i, i, 2.0);
            if i > 0 {
                coo.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                coo.push(i, i + 1, -1.0);
            }
        }
        coo.to_csr()
    }

    #[test]
    fn coo_sums_duplicates_and_orders_columns() {
        let mut coo = Coo::new(3);
        coo.push(1, 2, 0.5);
        coo.push(0, 0, 1.0);
        coo.push(1, 2, 0.25);
        coo.push(1, 0, -1.0);
        coo.push(2, 2, 4.0);
        let m = coo.to_csr();
        assert_eq!(m.n(), 3);
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.get(1, 2), 0.75);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), 0.0);
        // row 1 columns are sorted
        assert_eq!(&m.col[m.row_ptr[1]..m.row_ptr[2]], &[0, 2]);
    }

    #[test]
    fn empty_rows_are_preserved() {
        let mut coo = Coo::new(4);
        coo.push(0, 0, 1.0);
        coo.push(3, 3, 1.0);
        let m = coo.to_csr();
        assert_eq!(m.row_ptr, vec![0, 1, 1, 1, 2]);
        let mut y = vec![0.0; 4];
        m.matvec(&[1.0, 2.0, 3.0, 4.0], &mut y);
        assert_eq!(y, vec![1.0, 0.0, 0.0, 4.0]);
    }

    #[test]
    fn pcg_matches_known_solution() {
        // 1D Laplacian with b = e_k has an explicit inverse:
        // (A^-1)_ik = min(i+1, k+1) * (n - max(i, k)) / (n + 1).
        let n = 50;
        let a = laplacian_1d(n);
        let mut b = vec![0.0; n];
        b[7] = 1.0;
        let (x, stats) = jacobi_pcg(&a, &b, 1e-12, 10 * n).unwrap();
        for i in 0..n {
            let exact = ((i.min(7) + 1) as f64) * ((n - i.max(7)) as f64) / (n as f64 + 1.0);
            assert!((x[i] - exact).abs() < 1e-8, "x[{i}] = {}, want {exact}", x[i]);
        }
        assert!(stats.relative_residual <= 1e-12);
        assert!(stats.iterations <= n);
    }

    #[test]
    fn pcg_zero_rhs_short_circuits() {
        let a = laplacian_1d(10);
        let (x, stats) = jacobi_pcg(&a, &vec![0.0; 10], 1e-10, 5).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn pcg_reports_stall() {
        let a = laplacian_1d(200);
        let b = vec![1.0; 200];
        match jacobi_pcg(&a, &b, 1e-14, 3) {
            Err(Error::SolverStalled { iterations: 3, residual }) => {
                assert!(residual > 0.0);
            }
            other => panic!("expected stall, got {other:?}"),
        }
    }

    #[test]
    fn pcg_rejects_indefinite_diagonal() {
        let mut coo = Coo::new(2);
        coo.push(0, 0, -1.0);
        coo.push(1, 1, 1.0);
        let a = coo.to_csr();
        assert!(jacobi_pcg(&a, &[1.0, 1.0], 1e-10, 10).is_err());
    }

    #[test]
    fn asymmetry_detection() {
        let mut coo = Coo::new(2);
        coo.push(0, 0, 2.0);
        coo.push(1, 1, 2.0);
        coo.push(0, 1, 1.0);
        coo.push(1, 0, 0.5);
        let a = coo.to_csr();
        assert!((a.max_asymmetry() - 0.5).abs() < 1e-15);
        assert_eq!(laplacian_1d(20).max_asymmetry(), 0.0);
    }
}
