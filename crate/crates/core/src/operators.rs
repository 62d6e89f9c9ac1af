//! Named local operators: `sx`, `sy`, `sz`, `id` and computational projectors `p<k>`.
//!
//! Dimension 2 uses Pauli matrices. Dimension `d >= 3` uses spin-`j` matrices
//! with `j = (d - 1) / 2`, so a qutrit gets the spin-1 matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C0};

/// Diagonal of `sz` in the computational basis, highest weight first.
pub fn sz_diagonal(dim: usize) -> Vec<f64> {
    if dim == 2 {
        return vec![1.0, -1.0];
    }
    let j = (dim as f64 - 1.0) / 2.0;
    (0..dim).map(|k| j - k as f64).collect()
}

/// Ladder operator `s+` for spin `j = (dim - 1) / 2`.
fn raising(dim: usize) -> ComplexMatrix {
    let j = (dim as f64 - 1.0) / 2.0;
    ComplexMatrix::from_fn(dim, dim, |r, c| {
        if c == r + 1 {
            // <m+1|s+|m> with m = j - c
            let m = j - c as f64;
            Complex64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0)
        } else {
            C0
        }
    })
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::DegenerateDimension { n: dim });
    }
    Ok(())
}

pub fn sz(dim: usize) -> Result<ComplexMatrix> {
    check_dim(dim)?;
    Ok(ComplexMatrix::diag_real(&sz_diagonal(dim)))
}

pub fn sx(dim: usize) -> Result<ComplexMatrix> {
    check_dim(dim)?;
    let up = raising(dim);
    let scale = if dim == 2 { 1.0 } else { 0.5 };
    Ok((&up + &up.adjoint()).scale_real(scale))
}

pub fn sy(dim: usize) -> Result<ComplexMatrix> {
    check_dim(dim)?;
    let up = raising(dim);
    let scale = if dim == 2 { 1.0 } else { 0.5 };
    // (s+ - s-) / (2i)
    Ok((&up - &up.adjoint()).scale(Complex64::new(0.0, -scale)))
}

/// `|k><k|`.
pub fn projector(dim: usize, k: usize) -> Result<ComplexMatrix> {
    if k >= dim {
        return Err(Error::InvalidInput(format!(
            "projector index {k} out of range for dimension {dim}"
        )));
    }
    let mut diag = vec![0.0; dim];
    diag[k] = 1.0;
    Ok(ComplexMatrix::diag_real(&diag))
}

type Builder = fn(usize) -> Result<ComplexMatrix>;

/// Lookup of operators by name for a given local dimension.
pub struct OperatorRegistry {
    entries: Vec<(&'static str, Builder)>,
}

impl Default for OperatorRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl OperatorRegistry {
    pub fn builtin() -> Self {
        Self {
            entries: vec![
                ("sx", sx as Builder),
                ("sy", sy),
                ("sz", sz),
                ("id", |d| Ok(ComplexMatrix::identity(d))),
            ],
        }
    }

    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.entries.iter().map(|(n, _)| n.to_string()).collect();
        names.push("p<k>".to_string());
        names
    }

    pub fn build(&self, name: &str, dim: usize) -> Result<ComplexMatrix> {
        if let Some((_, f)) = self.entries.iter().find(|(n, _)| *n == name) {
            return f(dim);
        }
        if let Some(k) = name.strip_prefix('p').and_then(|k| k.parse::<usize>().ok()) {
            return projector(dim, k);
        }
        Err(Error::UnknownName {
            name: name.to_string(),
            known: self.names().join(", "),
        })
    }
}
