//! The four normalized entanglement measures and their raw forms.
//!
//! Every measure is a function of the Schmidt coefficients only. The
//! differences `1 - sum(lambda^4)` and `(sum lambda)^2 - 1` are evaluated as
//! pairwise sums over `i < j` rather than by subtracting from one, which keeps
//! them accurate to a few ulps near separable states where the subtraction
//! would cancel catastrophically.
//!
//! The measures are also exposed as [`EntanglementMeasure`] trait objects in a
//! [`MeasureRegistry`] so that sweeps and the CLI can select them by name.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::schmidt::{self, BipartiteState, Subsystem, NORM_TOL, RANK_TOL};

/// Results within this distance outside their range are clamped; anything
/// further out is reported as an error.
pub const RANGE_SLACK: f64 = 1e-12;

/// Power sums of the Schmidt coefficients after rescaling to unit norm.
#[derive(Debug, Clone, Copy)]
struct Moments {
    /// `sum p_i^2` with `p_i = lambda_i^2`.
    sum4: f64,
    /// `2 sum_{i<j} p_i p_j`, i.e. `1 - sum4`.
    mixed4: f64,
    /// `2 sum_{i<j} lambda_i lambda_j`, i.e. `(sum lambda)^2 - 1`.
    mixed1: f64,
}

fn moments(lambdas: &[f64]) -> Result<Moments> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("no Schmidt coefficients".into()));
    }
    if lambdas.iter().any(|l| !l.is_finite() || *l < -RANGE_SLACK) {
        return Err(Error::InvalidInput(format!(
            "Schmidt coefficients must be finite and non-negative: {lambdas:?}"
        )));
    }
    let s2: f64 = lambdas.iter().map(|l| l * l).sum();
    let deficit = (s2 - 1.0).abs();
    if deficit > NORM_TOL {
        return Err(Error::Normalization {
            deficit,
            tolerance: NORM_TOL,
        });
    }
    let scale = s2.sqrt();
    let mu: Vec<f64> = lambdas.iter().map(|l| l.max(0.0) / scale).collect();
    let p: Vec<f64> = mu.iter().map(|m| m * m).collect();
    let mut mixed4 = 0.0;
    let mut mixed1 = 0.0;
    for i in 0..mu.len() {
        for j in i + 1..mu.len() {
            mixed4 += p[i] * p[j];
            mixed1 += mu[i] * mu[j];
        }
    }
    Ok(Moments {
        sum4: p.iter().map(|x| x * x).sum(),
        mixed4: 2.0 * mixed4,
        mixed1: 2.0 * mixed1,
    })
}

fn check_dimension(lambdas: &[f64], n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::DegenerateDimension { n });
    }
    if lambdas.len() > n {
        return Err(Error::InvalidInput(format!(
            "{} Schmidt coefficients for n = {n}",
            lambdas.len()
        )));
    }
    Ok(())
}

pub(crate) fn clamp_range(value: f64, lo: f64, hi: f64) -> Result<f64> {
    if value >= lo && value <= hi {
        Ok(value)
    } else if value < lo && value >= lo - RANGE_SLACK {
        Ok(lo)
    } else if value > hi && value <= hi + RANGE_SLACK {
        Ok(hi)
    } else {
        Err(Error::OutOfRange { value, lo, hi })
    }
}

/// `e = sqrt(1 - sum lambda^4)`.
pub fn entanglement_number(lambdas: &[f64]) -> Result<f64> {
    Ok(moments(lambdas)?.mixed4.sqrt())
}

/// Entanglement number from `Tr[(C C^dagger)^2]`, with no SVD.
pub fn entanglement_number_fast(state: &BipartiteState) -> Result<f64> {
    schmidt::check_normalized(state.amplitudes(), NORM_TOL)?;
    let purity = state.reshape_to_matrix().gram_trace_sq();
    Ok(clamp_range(1.0 - purity, 0.0, 1.0)?.sqrt())
}

/// I-concurrence `sqrt(2 (1 - sum lambda^4))`.
pub fn concurrence_raw(lambdas: &[f64]) -> Result<f64> {
    Ok(std::f64::consts::SQRT_2 * entanglement_number(lambdas)?)
}

pub fn concurrence_norm(lambdas: &[f64], n: usize) -> Result<f64> {
    Ok(tangle_norm(lambdas, n)?.sqrt())
}

pub fn tangle_norm(lambdas: &[f64], n: usize) -> Result<f64> {
    check_dimension(lambdas, n)?;
    let m = moments(lambdas)?;
    let nf = n as f64;
    clamp_range(nf / (nf - 1.0) * m.mixed4, 0.0, 1.0)
}

/// `(sum lambda)^2 - 1`.
pub fn robustness_raw(lambdas: &[f64]) -> Result<f64> {
    Ok(moments(lambdas)?.mixed1)
}

pub fn robustness_norm(lambdas: &[f64], n: usize) -> Result<f64> {
    check_dimension(lambdas, n)?;
    let m = moments(lambdas)?;
    clamp_range(m.mixed1 / (n as f64 - 1.0), 0.0, 1.0)
}

/// Normalized robustness from `(Tr sqrt(rho_A))^2`.
pub fn robustness_from_reduced_density(state: &BipartiteState) -> Result<f64> {
    robustness_from_reduced_density_on(state, Subsystem::A)
}

/// Same as [`robustness_from_reduced_density`] using the chosen marginal.
pub fn robustness_from_reduced_density_on(state: &BipartiteState, side: Subsystem) -> Result<f64> {
    schmidt::check_normalized(state.amplitudes(), NORM_TOL)?;
    let n = state.schmidt_len();
    if n < 2 {
        return Err(Error::DegenerateDimension { n });
    }
    let rho = reduced_density(state, side);
    let eig = rho.hermitian_eig()?;
    let trace_sqrt: f64 = eig.values.iter().map(|&v| v.max(0.0).sqrt()).sum();
    clamp_range((trace_sqrt * trace_sqrt - 1.0) / (n as f64 - 1.0), 0.0, 1.0)
}

/// `rho_A = C C^dagger` or `rho_B = (C^dagger C)^T`.
pub fn reduced_density(state: &BipartiteState, side: Subsystem) -> ComplexMatrix {
    let c = state.reshape_to_matrix();
    match side {
        Subsystem::A => &c * &c.adjoint(),
        Subsystem::B => {
            let g = &c.adjoint() * &c;
            ComplexMatrix::from_fn(g.rows(), g.cols(), |i, j| g[(j, i)])
        }
    }
}

/// `K = 1 / sum lambda^4`, in `[1, n]`.
pub fn schmidt_number(lambdas: &[f64]) -> Result<f64> {
    let m = moments(lambdas)?;
    clamp_range(1.0 / m.sum4, 1.0, lambdas.len() as f64)
}

/// `(K - 1) / (n - 1)`.
pub fn schmidt_number_norm(lambdas: &[f64], n: usize) -> Result<f64> {
    check_dimension(lambdas, n)?;
    let m = moments(lambdas)?;
    clamp_range(m.mixed4 / (m.sum4 * (n as f64 - 1.0)), 0.0, 1.0)
}

/// All measures of one state, from a single Schmidt decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub entanglement_number: f64,
    pub concurrence_norm: f64,
    pub tangle_norm: f64,
    pub robustness_norm: f64,
    pub schmidt_number_raw: f64,
    pub schmidt_number_norm: f64,
    pub schmidt_rank: usize,
}

impl MeasureReport {
    /// Builds a report from descending coefficients for an `n`-level problem.
    pub fn from_lambdas(lambdas: &[f64], n: usize) -> Result<Self> {
        let mut padded = lambdas.to_vec();
        padded.resize(n.max(lambdas.len()), 0.0);
        Ok(Self {
            n,
            lambdas: padded.clone(),
            entanglement_number: entanglement_number(&padded)?,
            concurrence_norm: concurrence_norm(&padded, n)?,
            tangle_norm: tangle_norm(&padded, n)?,
            robustness_norm: robustness_norm(&padded, n)?,
            schmidt_number_raw: schmidt_number(&padded)?,
            schmidt_number_norm: schmidt_number_norm(&padded, n)?,
            schmidt_rank: schmidt::schmidt_rank(&padded, RANK_TOL),
        })
    }

    /// Normalized value of a built-in measure by registry name.
    pub fn normalized(&self, name: &str) -> Option<f64> {
        match name {
            Concurrence::NAME => Some(self.concurrence_norm),
            Tangle::NAME => Some(self.tangle_norm),
            Robustness::NAME => Some(self.robustness_norm),
            SchmidtNumber::NAME => Some(self.schmidt_number_norm),
            _ => None,
        }
    }
}

pub fn all_measures(state: &BipartiteState) -> Result<MeasureReport> {
    let decomp = schmidt::schmidt_decompose(state)?;
    MeasureReport::from_lambdas(&decomp.lambdas, decomp.n)
}

/// A normalized entanglement measure: a map from Schmidt coefficients to `[0, 1]`.
pub trait EntanglementMeasure: Send + Sync {
    fn name(&self) -> &'static str;

    fn normalized(&self, lambdas: &[f64], n: usize) -> Result<f64>;
}

impl fmt::Debug for dyn EntanglementMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EntanglementMeasure({})", self.name())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Concurrence;

#[derive(Debug, Clone, Copy, Default)]
pub struct Tangle;

#[derive(Debug, Clone, Copy, Default)]
pub struct Robustness;

#[derive(Debug, Clone, Copy, Default)]
pub struct SchmidtNumber;

impl Concurrence {
    pub const NAME: &'static str = "concurrence";
}
impl Tangle {
    pub const NAME: &'static str = "tangle";
}
impl Robustness {
    pub const NAME: &'static str = "robustness";
}
impl SchmidtNumber {
    pub const NAME: &'static str = "schmidt_number";
}

impl EntanglementMeasure for Concurrence {
    fn name(&self) -> &'static str {
        Self::NAME
    }
    fn normalized(&self, lambdas: &[f64], n: usize) -> Result<f64> {
        concurrence_norm(lambdas, n)
    }
}

impl EntanglementMeasure for Tangle {
    fn name(&self) -> &'static str {
        Self::NAME
    }
    fn normalized(&self, lambdas: &[f64], n: usize) -> Result<f64> {
        tangle_norm(lambdas, n)
    }
}

impl EntanglementMeasure for Robustness {
    fn name(&self) -> &'static str {
        Self::NAME
    }
    fn normalized(&self, lambdas: &[f64], n: usize) -> Result<f64> {
        robustness_norm(lambdas, n)
    }
}

impl EntanglementMeasure for SchmidtNumber {
    fn name(&self) -> &'static str {
        Self::NAME
    }
    fn normalized(&self, lambdas: &[f64], n: usize) -> Result<f64> {
        schmidt_number_norm(lambdas, n)
    }
}

/// Named collection of measures, looked up at runtime.
#[derive(Debug)]
pub struct MeasureRegistry {
    entries: Vec<Box<dyn EntanglementMeasure>>,
}

impl Default for MeasureRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl MeasureRegistry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// Concurrence, tangle, robustness and Schmidt number.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(Concurrence));
        reg.register(Box::new(Tangle));
        reg.register(Box::new(Robustness));
        reg.register(Box::new(SchmidtNumber));
        reg
    }

    /// Adds a measure, replacing any existing one with the same name.
    pub fn register(&mut self, measure: Box<dyn EntanglementMeasure>) {
        match self.entries.iter().position(|m| m.name() == measure.name()) {
            Some(i) => self.entries[i] = measure,
            None => self.entries.push(measure),
        }
    }

    pub fn get(&self, name: &str) -> Result<&dyn EntanglementMeasure> {
        self.entries
            .iter()
            .find(|m| m.name() == name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::UnknownName {
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|m| m.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn EntanglementMeasure> {
        self.entries.iter().map(|m| m.as_ref())
    }

    /// Evaluates every registered measure, in registration order.
    pub fn evaluate_all(&self, lambdas: &[f64], n: usize) -> Result<Vec<(&'static str, f64)>> {
        self.entries
            .iter()
            .map(|m| Ok((m.name(), m.normalized(lambdas, n)?)))
            .collect()
    }
}
