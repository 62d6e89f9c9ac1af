//! Dense complex matrices for the small systems this crate deals with.
//!
//! Everything here is sized for dimensions up to a few tens: the SVD is a
//! one-sided (Hestenes) Jacobi iteration and the Hermitian eigensolver is a
//! cyclic two-sided Jacobi iteration, both of which are accurate to a few ulps
//! at these sizes.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Hermiticity tolerance on the max-norm of `H - H^dagger`.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(
                format!("{} entries", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { C1 } else { C0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                C0
            }
        })
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn projector(v: &[Complex64]) -> Self {
        Self::outer(v, v)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Complex64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::shape(
                "square matrix",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        Ok((0..self.rows).map(|i| self[(i, i)]).sum())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::shape(
                format!("{} rows on the right factor", self.cols),
                format!("{}", rhs.rows),
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::shape(
                format!("vector of length {}", self.cols),
                format!("length {}", v.len()),
            ));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `<u|M|v>`.
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Result<Complex64> {
        if u.len() != self.rows {
            return Err(Error::shape(
                format!("bra of length {}", self.rows),
                format!("length {}", u.len()),
            ));
        }
        let mv = self.matvec(v)?;
        Ok(inner(u, &mv))
    }

    /// Kronecker product, first factor major.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        Self::from_fn(rows, cols, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        Ok(&self.matmul(rhs)? - &rhs.matmul(self)?)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of the entrywise difference. Shapes must agree.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-norm of `M - M^dagger`; infinite for non-square input.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Max-norm of `M^dagger M - I`.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.adjoint().matmul(self).expect("square");
        g.max_abs_diff(&Self::identity(self.cols))
    }

    /// `Tr[(C C^dagger)^2]`, computed as the squared Frobenius norm of the Gram
    /// matrix. Equals the sum of fourth powers of the singular values.
    pub fn gram_trace_sq(&self) -> f64 {
        let gram = self.matmul(&self.adjoint()).expect("conformable");
        gram.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn svd(&self) -> Result<Svd> {
        svd(self)
    }

    pub fn hermitian_eig(&self) -> Result<HermitianEigen> {
        hermitian_eig(self)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in add"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in sub"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

/// `<a|b>` (conjugate-linear in the first argument).
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Kronecker product of two vectors, first factor major.
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Full singular value decomposition `M = U diag(sigma) Vdag`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Unitary, `rows x rows`.
    pub u: ComplexMatrix,
    /// Descending, length `min(rows, cols)`.
    pub sigma: Vec<f64>,
    /// Unitary, `cols x cols`.
    pub vdag: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let m = self.u.rows();
        let n = self.vdag.rows();
        ComplexMatrix::from_fn(m, n, |i, j| {
            self.sigma
                .iter()
                .enumerate()
                .map(|(s, &sig)| self.u[(i, s)] * sig * self.vdag[(s, j)])
                .sum()
        })
    }
}

/// Full SVD by one-sided Jacobi.
///
/// Singular values come out sorted descending. The first entry of each `U`
/// column with magnitude above 1e-12 is made real and non-negative, with the
/// compensating phase moved onto the matching row of `Vdag`. Column order inside
/// a degenerate cluster is not specified.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let (mut u, sigma, mut vdag) = if m.rows() >= m.cols() {
        svd_tall(m)
    } else {
        // M^dagger = U' S V'^dagger  =>  M = V' S U'^dagger
        let (u2, sigma, vdag2) = svd_tall(&m.adjoint());
        (vdag2.adjoint(), sigma, u2.adjoint())
    };
    fix_column_phases(&mut u, Some((&mut vdag, sigma.len())));
    Ok(Svd { u, sigma, vdag })
}

fn svd_tall(m: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let rows = m.rows();
    let cols = m.cols();
    // Work column-major: w[j] is column j of M V.
    let mut w: Vec<Vec<Complex64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { C1 } else { C0 }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = norm_sqr(&w[p]);
                let beta = norm_sqr(&w[q]);
                let gamma = inner(&w[p], &w[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g; // e^{i phi}
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let pc = phase.conj();
                rotate_pair(&mut w, p, q, c, s, pc);
                rotate_pair(&mut v, p, q, c, s, pc);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = w.iter().map(|col| norm_sqr(col).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    sigma = order.iter().map(|&k| sigma[k]).collect();

    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = smax * (rows * cols) as f64 * f64::EPSILON;
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(rows);
    for (pos, &k) in order.iter().enumerate() {
        if sigma[pos] > cutoff && sigma[pos] > 0.0 {
            let mut col: Vec<Complex64> = w[k].iter().map(|z| z / sigma[pos]).collect();
            orthogonalize(&mut col, &basis);
            let n = norm_sqr(&col).sqrt();
            col.iter_mut().for_each(|z| *z /= n);
            basis.push(col);
        } else {
            break;
        }
    }
    complete_basis(&mut basis, rows);

    let u = ComplexMatrix::from_fn(rows, rows, |i, j| basis[j][i]);
    // Vdag row s = conj(column order[s] of V)
    let vdag = ComplexMatrix::from_fn(cols, cols, |s, j| v[order[s]][j].conj());
    (u, sigma, vdag)
}

/// Applies the unitary `[[c, s], [-s e^{-i phi}, c e^{-i phi}]]` to columns p, q.
fn rotate_pair(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, pc: Complex64) {
    let (left, right) = cols.split_at_mut(q);
    let a = &mut left[p];
    let b = &mut right[0];
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let yq = *y * pc;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let proj = inner(b, v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
        }
    }
}

/// Extends an orthonormal set to a full basis of C^dim with standard vectors.
fn complete_basis(basis: &mut Vec<Vec<Complex64>>, dim: usize) {
    let mut k = 0;
    while basis.len() < dim && k < dim {
        let mut e = vec![C0; dim];
        e[k] = C1;
        orthogonalize(&mut e, basis);
        let n = norm_sqr(&e).sqrt();
        if n > 1e-6 {
            e.iter_mut().for_each(|z| *z /= n);
            basis.push(e);
        }
        k += 1;
    }
}

/// Rotates each column of `u` so its first significant entry is real and
/// non-negative. For the first `paired` columns the inverse phase is applied to
/// the corresponding row of `vdag`.
fn fix_column_phases(u: &mut ComplexMatrix, mut vdag: Option<(&mut ComplexMatrix, usize)>) {
    for j in 0..u.cols() {
        let Some(i0) = (0..u.rows()).find(|&i| u[(i, j)].norm() > 1e-12) else {
            continue;
        };
        let z = u[(i0, j)];
        let phase = z.conj() / z.norm();
        for i in 0..u.rows() {
            u[(i, j)] *= phase;
        }
        u[(i0, j)] = Complex64::new(u[(i0, j)].re, 0.0);
        if let Some((vd, paired)) = vdag.as_mut() {
            if j < *paired {
                let inv = phase.conj();
                for k in 0..vd.cols() {
                    vd[(j, k)] *= inv;
                }
            }
        }
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column k is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }
}

/// Cyclic complex Jacobi eigensolver.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    if !h.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    if !h.is_square() {
        return Err(Error::shape(
            "square matrix",
            format!("{}x{}", h.rows(), h.cols()),
        ));
    }
    let residual = h.hermitian_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NonHermitian { residual });
    }
    let n = h.rows();
    // symmetrize away the sub-tolerance anti-Hermitian part
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    let negligible = f64::EPSILON * 1e-3 * scale;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let hpq = a[(p, q)];
                let g = hpq.norm();
                if g <= negligible {
                    continue;
                }
                rotated = true;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = hpq / g;
                let pc = phase.conj();
                let zeta = (aqq - app) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // A <- A G
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)] * pc;
                    a[(k, p)] = akp * c - akq * s;
                    a[(k, q)] = akp * s + akq * c;
                }
                // A <- G^dagger A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)] * phase;
                    a[(p, k)] = apk * c - aqk * s;
                    a[(q, k)] = apk * s + aqk * c;
                }
                a[(p, q)] = C0;
                a[(q, p)] = C0;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                // V <- V G
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)] * pc;
                    v[(k, p)] = vkp * c - vkq * s;
                    v[(k, q)] = vkp * s + vkq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]).then(x.cmp(&y)));
    let values = order.iter().map(|&k| diag[k]).collect();
    let mut vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    fix_column_phases(&mut vectors, None);
    Ok(HermitianEigen { values, vectors })
}

/// `exp(-i H t)` for Hermitian `H`, via its eigendecomposition.
pub fn unitary_evolution(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let n = h.rows();
    let phases: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&e| Complex64::from_polar(1.0, -e * t))
        .collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| eig.vectors[(i, k)] * phases[k] * eig.vectors[(j, k)].conj())
            .sum()
    }))
}
