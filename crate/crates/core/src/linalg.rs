// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for small Hermitian operators.
//!
//! Eigendecomposition uses cyclic complex Jacobi rotations. The output is
//! deterministic: eigenvalues ascend, each non-degenerate eigenvector has its
//! largest-magnitude entry made real and positive, and degenerate subspaces
//! are re-spanned by Gram-Schmidt over the projected canonical basis vectors
//! e_0, e_1, ... taken in ascending order.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance on `H - H^dagger`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative gap below which two eigenvalues are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Row-major dense complex square matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from real row vectors.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    fn set_column(&mut self, j: usize, v: &[Complex64]) {
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = *x;
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A dense Hermitian operator (a control Hamiltonian in units with hbar = 1).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Validates Hermiticity to [`HERMITIAN_TOL`] and symmetrizes away the
    /// residual so downstream code sees an exactly Hermitian matrix.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n = matrix.dim();
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        for i in 0..n {
            for j in i..n {
                let dev = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
                if !dev.is_finite() || dev > HERMITIAN_TOL {
                    return Err(Error::NonHermitianInput { row: i, col: j, deviation: dev });
                }
            }
        }
        let sym = CMatrix::from_fn(n, |i, j| (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5);
        Ok(Self { matrix: sym })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Malformed {
                field: format!("real[{i}]"),
                reason: format!("expected {n} columns, found {}", r.len()),
            });
        }
        Self::new(CMatrix::from_real_rows(rows))
    }

    /// Real diagonal operator.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::new(CMatrix::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// True when |0> couples to nothing outside span{|0>, |1>} and neither
    /// does |1>, i.e. the operator is a direct sum of a 2x2 qubit block and
    /// the remainder.
    pub fn is_block_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..2).all(|i| (2..n).all(|k| self.matrix[(i, k)].norm() <= tol))
    }
}

/// Spectral decomposition `H = A diag(lambda) A^dagger`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Squared overlaps |<a|0>|^2 of the initial state with each eigenvector.
    pub fn ground_weights(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.eigenvectors[(0, a)].norm_sqr()).collect()
    }

    /// Coefficients c_a of |0> in the eigenbasis.
    pub fn ground_coefficients(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|a| self.eigenvectors[(0, a)].conj()).collect()
    }

    /// `A diag(lambda) A^dagger`.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_diagonal(|l| Complex64::new(l, 0.0))
    }

    /// `U(t) = A exp(-i diag(lambda) t) A^dagger`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.apply_diagonal(|l| Complex64::from_polar(1.0, -l * t))
    }

    /// `<0|U(t)|0>` without forming the full propagator.
    pub fn return_amplitude(&self, t: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(a, &l)| Complex64::from_polar(self.eigenvectors[(0, a)].norm_sqr(), -l * t))
            .sum()
    }

    fn apply_diagonal(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.dim();
        let a = &self.eigenvectors;
        let d: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, |i, j| (0..n).map(|k| a[(i, k)] * d[k] * a[(j, k)].conj()).sum())
    }
}

/// Diagonalizes `h` by cyclic Jacobi rotations.
pub fn eigendecompose(h: &HermitianOperator) -> EigenSystem {
    let n = h.dim();
    let mut a = h.matrix().clone();
    let mut v = CMatrix::identity(n);

    let scale = a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vecs = CMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        vecs.set_column(col, &v.column(src));
    }

    canonicalize(&eigenvalues, &mut vecs);
    EigenSystem { eigenvalues, eigenvectors: vecs }
}

/// One complex Jacobi rotation zeroing `a[p][q]`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G restricted to (p, q) is [[c, s e^{i phi}], [-s e^{-i phi}, c]].
    let g_pq = phase * s;
    let g_qp = -phase.conj() * s;
    let n = a.dim();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * g_qp.conj();
        a[(q, k)] = apk * g_pq.conj() + aqk * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * c;
    }
}

fn canonicalize(eigenvalues: &[f64], vecs: &mut CMatrix) {
    let n = eigenvalues.len();
    let scale = eigenvalues.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] - eigenvalues[end - 1] <= DEGENERACY_TOL * scale {
            end += 1;
        }
        if end - start == 1 {
            fix_phase(vecs, start);
        } else {
            respan_degenerate(vecs, start, end);
        }
        start = end;
    }
}

fn fix_phase(vecs: &mut CMatrix, col: usize) {
    let v = vecs.column(col);
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        // first index wins unless a later one is clearly larger
        if z.norm() > v[best].norm() * (1.0 + 1e-9) {
            best = i;
        }
    }
    let pivot = v[best];
    if pivot.norm() == 0.0 {
        return;
    }
    let rot = pivot.conj() / pivot.norm();
    let fixed: Vec<Complex64> = v.iter().map(|z| z * rot).collect();
    vecs.set_column(col, &fixed);
}

fn respan_degenerate(vecs: &mut CMatrix, start: usize, end: usize) {
    let n = vecs.dim();
    let block: Vec<Vec<Complex64>> = (start..end).map(|c| vecs.column(c)).collect();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(end - start);
    for k in 0..n {
        if basis.len() == end - start {
            break;
        }
        // projection of e_k onto the degenerate subspace
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        for b in &block {
            let coeff = b[k].conj();
            for i in 0..n {
                u[i] += b[i] * coeff;
            }
        }
        for w in &basis {
            let ov: Complex64 = w.iter().zip(&u).map(|(x, y)| x.conj() * y).sum();
            for i in 0..n {
                u[i] -= w[i] * ov;
            }
        }
        let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(u.into_iter().map(|z| z / norm).collect());
        }
    }
    for (offset, b) in basis.iter().enumerate() {
        vecs.set_column(start + offset, b);
    }
}

/// `U(t) = exp(-i H t)`.
pub fn propagate(h: &HermitianOperator, t: f64) -> CMatrix {
    eigendecompose(h).propagator(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn check_eigensystem(h: &HermitianOperator, es: &EigenSystem) {
        let n = h.dim();
        let a = &es.eigenvectors;
        let ad = a.adjoint();
        assert!((&ad * a).max_abs_diff(&CMatrix::identity(n)) < 1e-10);
        let d = &(&ad * h.matrix()) * a;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { es.eigenvalues[i] } else { 0.0 };
                assert!((d[(i, j)] - c(want, 0.0)).norm() < 1e-10, "({i},{j}) = {}", d[(i, j)]);
            }
        }
        assert!(es.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn golden_ratio_pair() {
        let h = HermitianOperator::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let es = eigendecompose(&h);
        let s5 = 5f64.sqrt();
        assert!((es.eigenvalues[0] - (1.0 - s5) / 2.0).abs() < 1e-14);
        assert!((es.eigenvalues[1] - (1.0 + s5) / 2.0).abs() < 1e-14);
        check_eigensystem(&h, &es);
    }

    #[test]
    fn diagonal_input_is_identity() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0, 1.5]).unwrap();
        let es = eigendecompose(&h);
        assert_eq!(es.eigenvalues, vec![0.0, 1.0, 1.5]);
        assert!(es.eigenvectors.max_abs_diff(&CMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn complex_hermitian_round_trip() {
        let m = CMatrix::from_fn(4, |i, j| {
            let (i, j) = (i as f64, j as f64);
            if i == j {
                c(i * 0.7 - 1.0, 0.0)
            } else if i < j {
                c(0.3 * (i + 1.0), 0.2 * (j - i))
            } else {
                c(0.3 * (j + 1.0), -0.2 * (i - j))
            }
        });
        let h = HermitianOperator::new(m).unwrap();
        let es = eigendecompose(&h);
        check_eigensystem(&h, &es);
        assert!(es.reconstruct().max_abs_diff(h.matrix()) < 1e-10);
    }

    #[test]
    fn degenerate_basis_follows_canonical_order() {
        // eigenvalue 1 is doubly degenerate, spanned by e_1 and (e_0 - e_2)/sqrt2 ... mixed by a rotation
        let h = HermitianOperator::from_real_rows(&[
            vec![1.5, 0.0, 0.5],
            vec![0.0, 1.0, 0.0],
            vec![0.5, 0.0, 1.5],
        ])
        .unwrap();
        let es = eigendecompose(&h);
        check_eigensystem(&h, &es);
        assert!((es.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((es.eigenvalues[1] - 1.0).abs() < 1e-12);
        // first basis vector is the normalized projection of e_0
        let v0 = es.eigenvectors.column(0);
        let r = 0.5f64.sqrt();
        assert!((v0[0] - c(r, 0.0)).norm() < 1e-10);
        assert!((v0[2] - c(-r, 0.0)).norm() < 1e-10);
        let v1 = es.eigenvectors.column(1);
        assert!((v1[1] - c(1.0, 0.0)).norm() < 1e-10);
        // deterministic on repeat
        let again = eigendecompose(&h);
        assert_eq!(again.eigenvectors, es.eigenvectors);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.5, 1.0]]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NonHermitianInput { row: 0, col: 1, .. })));
        let mut m = CMatrix::identity(2);
        m[(0, 0)] = c(1.0, 1e-6);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NonHermitianInput { .. })));
        assert!(matches!(HermitianOperator::diagonal(&[1.0]), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn propagator_basics() {
        let h = HermitianOperator::diagonal(&[0.0, 2.0]).unwrap();
        let u = propagate(&h, 0.7);
        assert!((u[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, -1.4)).norm() < 1e-15);
        let hm = HermitianOperator::from_real_rows(&[
            vec![0.0, 1.0, 0.5],
            vec![1.0, 1.0, 0.0],
            vec![0.5, 0.0, 1.5],
        ])
        .unwrap();
        assert!(propagate(&hm, 0.0).max_abs_diff(&CMatrix::identity(3)) < 1e-12);
        let es = eigendecompose(&hm);
        let u = es.propagator(3.3);
        assert!((es.return_amplitude(3.3) - u[(0, 0)]).norm() < 1e-12);
    }
}
