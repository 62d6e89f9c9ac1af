//! Bipartite pure states and their Schmidt decompositions.
//!
//! Amplitudes are stored row-major: `c[i * dim_b + j]` is the coefficient of
//! `|i>_A (x) |j>_B`, so reshaping into the `dim_a x dim_b` coefficient matrix
//! is a no-op on the buffer.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

/// Accepted deviation of the squared norm from 1.
pub const NORM_TOL: f64 = 1e-10;

/// Default threshold below which a Schmidt coefficient counts as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Which factor of the tensor product an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: Vec<Complex64>,
}

impl BipartiteState {
    /// Validates dimensions, finiteness and normalization.
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::unchecked(dim_a, dim_b, amplitudes)?;
        check_normalized(&state.amplitudes, NORM_TOL)?;
        Ok(state)
    }

    /// Like [`BipartiteState::new`] but rescales any non-zero input to unit norm.
    pub fn new_normalized(
        dim_a: usize,
        dim_b: usize,
        mut amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let norm = linalg::norm_sqr(&amplitudes).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidInput(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::new(dim_a, dim_b, amplitudes)
    }

    /// Product state `|a> (x) |b>`.
    pub fn product(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        Self::new(a.len(), b.len(), linalg::kron_vec(a, b))
    }

    /// Computational basis state `|i>|j>`.
    pub fn basis(dim_a: usize, dim_b: usize, i: usize, j: usize) -> Result<Self> {
        if i >= dim_a || j >= dim_b {
            return Err(Error::InvalidInput(format!(
                "basis index ({i}, {j}) out of range for {dim_a}x{dim_b}"
            )));
        }
        let mut amps = vec![linalg::C0; dim_a * dim_b];
        amps[i * dim_b + j] = linalg::C1;
        Self::new(dim_a, dim_b, amps)
    }

    pub fn from_matrix(c: &ComplexMatrix) -> Result<Self> {
        Self::new(c.rows(), c.cols(), c.as_slice().to_vec())
    }

    fn unchecked(dim_a: usize, dim_b: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidInput(format!(
                "subsystem dimensions must be positive, got {dim_a}x{dim_b}"
            )));
        }
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::InvalidInput(format!(
                "expected {} amplitudes for {dim_a}x{dim_b}, found {}",
                dim_a * dim_b,
                amplitudes.len()
            )));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidInput("non-finite amplitude".into()));
        }
        Ok(Self {
            dim_a,
            dim_b,
            amplitudes,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Number of Schmidt coefficients, `min(dim_a, dim_b)`.
    pub fn schmidt_len(&self) -> usize {
        self.dim_a.min(self.dim_b)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes[i * self.dim_b + j]
    }

    pub fn reshape_to_matrix(&self) -> ComplexMatrix {
        reshape_to_matrix(self)
    }

    /// Applies `ua (x) ub`.
    pub fn apply_local(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Result<Self> {
        if ua.rows() != self.dim_a
            || ua.cols() != self.dim_a
            || ub.rows() != self.dim_b
            || ub.cols() != self.dim_b
        {
            return Err(Error::shape(
                format!(
                    "{}x{} and {}x{} local operators",
                    self.dim_a, self.dim_a, self.dim_b, self.dim_b
                ),
                format!(
                    "{}x{} and {}x{}",
                    ua.rows(),
                    ua.cols(),
                    ub.rows(),
                    ub.cols()
                ),
            ));
        }
        // C -> Ua C Ub^T
        let c = self.reshape_to_matrix();
        let ub_t = ComplexMatrix::from_fn(self.dim_b, self.dim_b, |i, j| ub[(j, i)]);
        let out = ua.matmul(&c)?.matmul(&ub_t)?;
        Self::new(self.dim_a, self.dim_b, out.into_vec())
    }
}

pub(crate) fn check_normalized(amplitudes: &[Complex64], tol: f64) -> Result<()> {
    let deficit = (linalg::norm_sqr(amplitudes) - 1.0).abs();
    if deficit > tol || deficit.is_nan() {
        return Err(Error::Normalization {
            deficit,
            tolerance: tol,
        });
    }
    Ok(())
}

/// Coefficient matrix `C = (c_ij)`.
pub fn reshape_to_matrix(state: &BipartiteState) -> ComplexMatrix {
    ComplexMatrix::new(state.dim_a, state.dim_b, state.amplitudes.clone())
        .expect("validated at construction")
}

/// Inverse of [`reshape_to_matrix`].
pub fn unreshape(c: &ComplexMatrix) -> Vec<Complex64> {
    c.as_slice().to_vec()
}

/// `|Psi> = sum_s lambda_s |u_s> (x) |v_s>` with `u_s` the columns of `u` and
/// `v_s` the rows of `vdag`.
#[derive(Debug, Clone, Serialize)]
pub struct SchmidtDecomposition {
    pub lambdas: Vec<f64>,
    #[serde(skip)]
    pub u: ComplexMatrix,
    #[serde(skip)]
    pub vdag: ComplexMatrix,
    pub n: usize,
}

impl SchmidtDecomposition {
    /// Local vector `|u_s>` on subsystem A.
    pub fn left_vector(&self, s: usize) -> Vec<Complex64> {
        self.u.column(s)
    }

    /// Local vector `|v_s>` on subsystem B.
    pub fn right_vector(&self, s: usize) -> Vec<Complex64> {
        self.vdag.row(s)
    }

    pub fn rank(&self, tol: f64) -> usize {
        schmidt_rank(&self.lambdas, tol)
    }

    /// Rebuilds the amplitude array from the Schmidt form.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let dim_a = self.u.rows();
        let dim_b = self.vdag.cols();
        let mut amps = vec![linalg::C0; dim_a * dim_b];
        for (s, &lambda) in self.lambdas.iter().enumerate() {
            let u = self.left_vector(s);
            let v = self.right_vector(s);
            for i in 0..dim_a {
                for j in 0..dim_b {
                    amps[i * dim_b + j] += u[i] * v[j] * lambda;
                }
            }
        }
        amps
    }
}

pub fn schmidt_decompose(state: &BipartiteState) -> Result<SchmidtDecomposition> {
    check_normalized(&state.amplitudes, NORM_TOL)?;
    let svd = state.reshape_to_matrix().svd()?;
    let n = state.schmidt_len();
    Ok(SchmidtDecomposition {
        lambdas: svd.sigma,
        u: svd.u,
        vdag: svd.vdag,
        n,
    })
}

/// Number of coefficients strictly above `tol`.
pub fn schmidt_rank(lambdas: &[f64], tol: f64) -> usize {
    lambdas.iter().filter(|&&l| l > tol).count()
}
