//! Dense kernels for matrices of size at most 4x4: SPD solves, symmetric
//! eigenvalues (closed form for 2x2, cyclic Jacobi otherwise), condition
//! estimates and the largest eigenvalue of `Q^{-1} S` for a symmetric-definite
//! pencil.

use std::fmt;

use crate::error::{AoaError, Result};

pub const MAX_DIM: usize = 4;

/// Solves whose eigenvalue-ratio condition estimate exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Pencil eigenvalues below this fraction of the largest one count as zero.
const PENCIL_ZERO_REL: f64 = 1e-12;

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Row-major matrix with at most [`MAX_DIM`] rows and columns.
#[derive(Clone, Copy, PartialEq)]
pub struct SmallMatrix {
    rows: usize,
    cols: usize,
    data: [f64; MAX_DIM * MAX_DIM],
}

impl SmallMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows <= MAX_DIM && cols <= MAX_DIM, "SmallMatrix is limited to {MAX_DIM}x{MAX_DIM}");
        Self { rows, cols, data: [0.0; MAX_DIM * MAX_DIM] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Panics if the rows are ragged or larger than [`MAX_DIM`].
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| self[(i, j)].is_finite()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                out[(i, j)] = (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum();
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self[(i, k)] * v[k]).sum())
            .collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.data.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch");
        let mut out = *self;
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `self += w * u u^T`.
    pub fn add_outer(&mut self, u: &[f64], w: f64) {
        assert!(self.is_square() && u.len() == self.rows, "dimension mismatch");
        for i in 0..self.rows {
            for j in 0..self.cols {
                self[(i, j)] += w * u[i] * u[j];
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Symmetric to within `tol` relative to the largest entry.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.data.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * scale))
    }
}

impl std::ops::Index<(usize, usize)> for SmallMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * MAX_DIM + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SmallMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * MAX_DIM + j]
    }
}

impl fmt::Debug for SmallMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<f64>> =
            (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)]).collect()).collect();
        f.debug_tuple("SmallMatrix").field(&rows).finish()
    }
}

fn check_symmetric(a: &SmallMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(AoaError::Usage(format!("expected a square matrix, got {}x{}", a.rows, a.cols)));
    }
    if !a.is_finite() {
        return Err(AoaError::Usage("matrix has non-finite entries".into()));
    }
    if !a.is_symmetric(1e-10) {
        return Err(AoaError::Usage("matrix is not symmetric".into()));
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// Only the lower triangle is read.
pub fn symmetric_eigenvalues(a: &SmallMatrix) -> Vec<f64> {
    assert!(a.is_square(), "eigenvalues need a square matrix");
    let n = a.rows;
    let mut vals = match n {
        0 => Vec::new(),
        1 => vec![a[(0, 0)]],
        2 => {
            let (p, q, r) = (a[(0, 0)], a[(1, 0)], a[(1, 1)]);
            let mid = 0.5 * (p + r);
            let rad = (0.5 * (p - r)).hypot(q);
            // The eigenvalue nearer zero comes from the determinant to avoid
            // cancellation in `mid -/+ rad`.
            let big = if mid >= 0.0 { mid + rad } else { mid - rad };
            let det = p * r - q * q;
            let small = if big != 0.0 { det / big } else { 0.0 };
            vec![small, big]
        }
        _ => jacobi_eigenvalues(a),
    };
    vals.sort_by(|x, y| x.total_cmp(y));
    vals
}

fn jacobi_eigenvalues(a: &SmallMatrix) -> Vec<f64> {
    let n = a.rows;
    let mut m = [[0.0f64; MAX_DIM]; MAX_DIM];
    for i in 0..n {
        for j in 0..=i {
            m[i][j] = a[(i, j)];
            m[j][i] = a[(i, j)];
        }
    }
    let total: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                m[p][p] -= t * apq;
                m[q][q] += t * apq;
                m[p][q] = 0.0;
                m[q][p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = m[r][p];
                    let arq = m[r][q];
                    m[r][p] = c * arp - s * arq;
                    m[p][r] = m[r][p];
                    m[r][q] = c * arq + s * arp;
                    m[q][r] = m[r][q];
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).collect()
}

/// Ratio of the extreme eigenvalues of a symmetric matrix, or `inf` when the
/// matrix is singular or not positive definite.
pub fn condition_spd(a: &SmallMatrix) -> f64 {
    let ev = symmetric_eigenvalues(a);
    match (ev.first(), ev.last()) {
        (Some(&lo), Some(&hi)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Lower-triangular Cholesky factor, or `None` if `a` is not positive definite.
pub fn cholesky(a: &SmallMatrix) -> Option<SmallMatrix> {
    let n = a.rows;
    let mut l = SmallMatrix::zeros(n, n);
    for j in 0..n {
        let d = a[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let v = a[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = v / d;
        }
    }
    Some(l)
}

fn forward_sub(l: &SmallMatrix, b: &mut [f64]) {
    for i in 0..l.rows {
        let s: f64 = (0..i).map(|k| l[(i, k)] * b[k]).sum();
        b[i] = (b[i] - s) / l[(i, i)];
    }
}

fn backward_sub_transposed(l: &SmallMatrix, b: &mut [f64]) {
    for i in (0..l.rows).rev() {
        let s: f64 = (i + 1..l.rows).map(|k| l[(k, i)] * b[k]).sum();
        b[i] = (b[i] - s) / l[(i, i)];
    }
}

/// Solves `A x = b` for symmetric positive definite `A`.
///
/// Fails with [`AoaError::IllConditioned`] when `A` is singular, indefinite,
/// or has condition estimate above [`MAX_CONDITION`].
pub fn solve_spd(a: &SmallMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    if b.len() != a.rows {
        return Err(AoaError::Usage(format!("rhs has length {}, matrix is {}x{}", b.len(), a.rows, a.cols)));
    }
    let cond = condition_spd(a);
    if !(cond <= MAX_CONDITION) {
        return Err(AoaError::IllConditioned { cond });
    }
    let l = cholesky(a).ok_or(AoaError::IllConditioned { cond: f64::INFINITY })?;
    let mut x = b.to_vec();
    forward_sub(&l, &mut x);
    backward_sub_transposed(&l, &mut x);
    Ok(x)
}

/// Largest eigenvalue of `Q^{-1} S` for symmetric `Q` and positive definite `S`.
///
/// Works on the pencil `Q x = mu S x` reduced through the Cholesky factor of
/// `S`, so `Q` is never inverted: the answer is `1 / mu_min`, and `+inf` when
/// `Q` is singular to working precision.
pub fn max_gen_eigenvalue(q: &SmallMatrix, s: &SmallMatrix) -> Result<f64> {
    check_symmetric(q)?;
    check_symmetric(s)?;
    if q.rows != s.rows {
        return Err(AoaError::Usage("pencil matrices differ in size".into()));
    }
    let n = q.rows;
    let l = cholesky(s).ok_or(AoaError::InvalidScatter)?;

    // M = L^{-1} Q L^{-T}, built column by column.
    let mut z = SmallMatrix::zeros(n, n);
    let mut col = [0.0; MAX_DIM];
    for j in 0..n {
        for i in 0..n {
            col[i] = q[(i, j)];
        }
        forward_sub(&l, &mut col[..n]);
        for i in 0..n {
            z[(i, j)] = col[i];
        }
    }
    let mut m = SmallMatrix::zeros(n, n);
    for j in 0..n {
        // column j of L^{-1} Z^T is L^{-1} (row j of Z)
        for i in 0..n {
            col[i] = z[(j, i)];
        }
        forward_sub(&l, &mut col[..n]);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    let m = m.add(&m.transpose()).scale(0.5);

    let mu = symmetric_eigenvalues(&m);
    let (lo, hi) = (mu[0], mu[n - 1]);
    if !(hi > 0.0) || lo <= PENCIL_ZERO_REL * hi {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / lo)
}
