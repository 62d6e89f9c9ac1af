//! Two spin-1 particles coupled by the isotropic Heisenberg interaction.
//!
//! Units: hbar = 1, omega in rad/ps, time in ps. The product basis is ordered
//! first factor major, with single-qutrit states `|up>, |zero>, |down>` as
//! indices 0, 1, 2:
//!
//! ```text
//! 0 uu  1 u0  2 ud  3 0u  4 00  5 0d  6 du  7 d0  8 dd
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C0};
use crate::measures::{self, MeasureReport};
use crate::schmidt::{self, BipartiteState, NORM_TOL};

pub const UP: usize = 0;
pub const ZERO: usize = 1;
pub const DOWN: usize = 2;

/// Column labels for the nine product-basis projectors.
pub const PROJECTOR_LABELS: [&str; 9] = ["uu", "uo", "ud", "ou", "oo", "od", "du", "do", "dd"];

/// Index of `|a b>` in the product basis.
pub const fn product_index(a: usize, b: usize) -> usize {
    3 * a + b
}

#[derive(Debug, Clone)]
pub struct Spin1Operators {
    pub sx: ComplexMatrix,
    pub sy: ComplexMatrix,
    pub sz: ComplexMatrix,
}

pub fn spin1_matrices() -> Spin1Operators {
    let r = FRAC_1_SQRT_2;
    let sx = ComplexMatrix::from_real_rows(&[&[0.0, r, 0.0], &[r, 0.0, r], &[0.0, r, 0.0]]);
    let i = Complex64::new(0.0, r);
    let sy = ComplexMatrix::new(3, 3, vec![C0, -i, C0, i, C0, -i, C0, i, C0]).expect("3x3");
    let sz = ComplexMatrix::diag_real(&[1.0, 0.0, -1.0]);
    Spin1Operators { sx, sy, sz }
}

/// `omega (sx(x)sx + sy(x)sy + sz(x)sz)`.
pub fn heisenberg_hamiltonian(omega: f64) -> ComplexMatrix {
    let s = spin1_matrices();
    let sum = &(&s.sx.kron(&s.sx) + &s.sy.kron(&s.sy)) + &s.sz.kron(&s.sz);
    sum.scale_real(omega)
}

/// The nine hand-derived energy eigenstates and their energies in units of omega.
#[derive(Debug, Clone)]
pub struct EnergyEigenbasis {
    pub vectors: Vec<Vec<Complex64>>,
    pub energies: Vec<f64>,
}

impl EnergyEigenbasis {
    /// Amplitudes `<E_k|psi>`.
    pub fn project(&self, psi: &[Complex64]) -> Vec<Complex64> {
        self.vectors.iter().map(|e| linalg::inner(e, psi)).collect()
    }
}

pub fn analytic_eigenbasis() -> EnergyEigenbasis {
    let r2 = FRAC_1_SQRT_2;
    let r3 = 1.0 / 3f64.sqrt();
    let r6 = 1.0 / 6f64.sqrt();
    let p = product_index;
    let vec_of = |terms: &[(usize, f64)]| {
        let mut v = vec![C0; 9];
        for &(k, a) in terms {
            v[k] = Complex64::new(a, 0.0);
        }
        v
    };
    let vectors = vec![
        vec_of(&[(p(UP, UP), 1.0)]),
        vec_of(&[(p(UP, ZERO), r2), (p(ZERO, UP), r2)]),
        vec_of(&[
            (p(UP, DOWN), r6),
            (p(ZERO, ZERO), 2.0 * r6),
            (p(DOWN, UP), r6),
        ]),
        vec_of(&[(p(ZERO, DOWN), r2), (p(DOWN, ZERO), r2)]),
        vec_of(&[(p(DOWN, DOWN), 1.0)]),
        vec_of(&[(p(UP, ZERO), -r2), (p(ZERO, UP), r2)]),
        vec_of(&[(p(UP, DOWN), -r2), (p(DOWN, UP), r2)]),
        vec_of(&[(p(ZERO, DOWN), -r2), (p(DOWN, ZERO), r2)]),
        vec_of(&[(p(UP, DOWN), r3), (p(ZERO, ZERO), -r3), (p(DOWN, UP), r3)]),
    ];
    let energies = vec![1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -2.0];
    EnergyEigenbasis { vectors, energies }
}

fn check_qutrit_pair(psi: &[Complex64]) -> Result<()> {
    if psi.len() != 9 {
        return Err(Error::shape("9 amplitudes", format!("{}", psi.len())));
    }
    schmidt::check_normalized(psi, NORM_TOL)
}

/// `psi(t) = sum_n alpha_n exp(-i E_n omega t) |E_n>`.
pub fn evolve(psi0: &[Complex64], t: f64, omega: f64) -> Result<Vec<Complex64>> {
    check_qutrit_pair(psi0)?;
    Ok(evolve_in(&analytic_eigenbasis(), psi0, t, omega))
}

fn evolve_in(basis: &EnergyEigenbasis, psi0: &[Complex64], t: f64, omega: f64) -> Vec<Complex64> {
    let alphas = basis.project(psi0);
    let mut out = vec![C0; 9];
    for ((alpha, energy), e) in alphas.iter().zip(&basis.energies).zip(&basis.vectors) {
        let amp = alpha * Complex64::from_polar(1.0, -energy * omega * t);
        out.iter_mut().zip(e).for_each(|(o, x)| *o += amp * x);
    }
    out
}

/// Canonical initial states of the four dynamical cases, plus their separable
/// cycle lengths in units of 1/omega.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DynamicsCase {
    /// `|up up>`: an energy eigenstate.
    Stationary,
    /// `|up 0>`: confined to a two-dimensional subspace.
    TwoLevel,
    /// `|up down>`.
    Irregular,
    /// `|0 0>`: reaches maximal entanglement.
    Regular,
}

impl TryFrom<u8> for DynamicsCase {
    type Error = Error;

    fn try_from(k: u8) -> Result<Self> {
        match k {
            0 => Ok(Self::Stationary),
            1 => Ok(Self::TwoLevel),
            2 => Ok(Self::Irregular),
            3 => Ok(Self::Regular),
            _ => Err(Error::InvalidInput(format!(
                "unknown dynamics case {k}; expected 0..=3"
            ))),
        }
    }
}

impl DynamicsCase {
    pub const ALL: [DynamicsCase; 4] = [
        Self::Stationary,
        Self::TwoLevel,
        Self::Irregular,
        Self::Regular,
    ];

    pub fn index(self) -> u8 {
        match self {
            Self::Stationary => 0,
            Self::TwoLevel => 1,
            Self::Irregular => 2,
            Self::Regular => 3,
        }
    }

    pub fn initial_product(self) -> (usize, usize) {
        match self {
            Self::Stationary => (UP, UP),
            Self::TwoLevel => (UP, ZERO),
            Self::Irregular => (UP, DOWN),
            Self::Regular => (ZERO, ZERO),
        }
    }

    pub fn initial_state(self) -> Vec<Complex64> {
        let (a, b) = self.initial_product();
        basis_state(a, b)
    }

    /// Time between consecutive separable states at `omega = 1`; `None` when
    /// the state never becomes entangled.
    pub fn cycle(self) -> Option<f64> {
        match self {
            Self::Stationary => None,
            Self::TwoLevel => Some(PI / 2.0),
            Self::Irregular => Some(2.0 * PI),
            Self::Regular => Some(2.0 * PI / 3.0),
        }
    }
}

pub fn basis_state(a: usize, b: usize) -> Vec<Complex64> {
    let mut v = vec![C0; 9];
    v[product_index(a, b)] = linalg::C1;
    v
}

/// Closed-form Schmidt coefficients, sorted descending.
pub fn closed_form_lambdas(case: DynamicsCase, omega_t: f64) -> Result<[f64; 3]> {
    let wt = omega_t;
    let mut l = match case {
        DynamicsCase::Stationary => [1.0, 0.0, 0.0],
        DynamicsCase::TwoLevel => [wt.cos().abs(), wt.sin().abs(), 0.0],
        DynamicsCase::Irregular => {
            let arg = 3.5 + 3.0 * wt.cos() + 1.5 * (2.0 * wt).cos() + (3.0 * wt).cos();
            let arg = if (-1e-12..0.0).contains(&arg) {
                0.0
            } else if arg < 0.0 {
                return Err(Error::OutOfRange {
                    value: arg,
                    lo: 0.0,
                    hi: f64::INFINITY,
                });
            } else {
                arg
            };
            [
                arg.sqrt() / 3.0,
                2.0 / 3.0 * (5.0 + 4.0 * wt.cos()).sqrt() * (0.5 * wt).sin().powi(2),
                2.0 / 3.0 * (1.5 * wt).sin().abs(),
            ]
        }
        DynamicsCase::Regular => {
            let side = 2.0 / 3.0 * (1.5 * wt).sin().abs();
            [(5.0 + 4.0 * (3.0 * wt).cos()).sqrt() / 3.0, side, side]
        }
    };
    l.sort_by(|a, b| b.total_cmp(a));
    Ok(l)
}

/// `|<ab|psi>|^2` for the nine product states.
pub fn projector_expectations(psi: &[Complex64]) -> Result<[f64; 9]> {
    check_qutrit_pair(psi)?;
    let mut out = [0.0; 9];
    out.iter_mut().zip(psi).for_each(|(o, z)| *o = z.norm_sqr());
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct TracePoint {
    pub t: f64,
    pub lambdas: [f64; 3],
    pub measures: MeasureReport,
    pub projectors: [f64; 9],
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationTrace {
    pub omega: f64,
    pub points: Vec<TracePoint>,
}

impl SimulationTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.t)
    }
}

/// Evolves `psi0` over a strictly increasing time grid and evaluates the
/// Schmidt coefficients, all measures and the projector populations at every
/// point.
pub fn simulate(psi0: &[Complex64], t_grid: &[f64], omega: f64) -> Result<SimulationTrace> {
    check_qutrit_pair(psi0)?;
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "time grid must be finite and strictly increasing".into(),
        ));
    }
    if !omega.is_finite() {
        return Err(Error::InvalidInput("omega must be finite".into()));
    }
    let basis = analytic_eigenbasis();
    let points = t_grid
        .par_iter()
        .map(|&t| trace_point(&basis, psi0, t, omega))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationTrace { omega, points })
}

fn trace_point(
    basis: &EnergyEigenbasis,
    psi0: &[Complex64],
    t: f64,
    omega: f64,
) -> Result<TracePoint> {
    let psi = evolve_in(basis, psi0, t, omega);
    let state = BipartiteState::new(3, 3, psi.clone())?;
    let decomp = schmidt::schmidt_decompose(&state)?;
    let lambdas = [decomp.lambdas[0], decomp.lambdas[1], decomp.lambdas[2]];
    let measures = MeasureReport::from_lambdas(&decomp.lambdas, 3)?;
    Ok(TracePoint {
        t,
        lambdas,
        measures,
        projectors: projector_expectations(&psi)?,
    })
}

/// `n` evenly spaced points from 0 to `t_max` inclusive.
pub fn uniform_grid(t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 grid points, got {n}"
        )));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidInput(format!(
            "t_max must be positive and finite, got {t_max}"
        )));
    }
    Ok((0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect())
}

/// All measures of the evolved state at a single time.
pub fn measures_at(psi0: &[Complex64], t: f64, omega: f64) -> Result<MeasureReport> {
    let psi = evolve(psi0, t, omega)?;
    measures::all_measures(&BipartiteState::new(3, 3, psi)?)
}
