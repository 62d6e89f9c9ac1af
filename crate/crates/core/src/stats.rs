//! State-dependent statistics of observables, including the separability
//! test built on local correlations.
//!
//! Operators on a bipartite space use the same first-factor-major ordering as
//! [`BipartiteState`]. Where a quantity has both a direct form
//! (`<alpha| A (x) B |alpha>`) and a form in Schmidt data, both are exposed so
//! they can be checked against each other.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C0, HERMITIAN_TOL};
use crate::schmidt::{self, BipartiteState, SchmidtDecomposition, Subsystem, NORM_TOL, RANK_TOL};

/// Largest imaginary part tolerated (relative to the operator scale) when an
/// expectation is reported as a real number.
pub const IMAG_TOL: f64 = 1e-12;

/// Slack applied to variances, probabilities and the uncertainty inequality.
pub const STAT_SLACK: f64 = 1e-12;

/// Tolerance on effect sums and effect spectra.
pub const EFFECT_TOL: f64 = 1e-10;

/// A Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableOperator {
    matrix: ComplexMatrix,
}

impl ObservableOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let residual = matrix.hermitian_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NonHermitian { residual });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `A (x) I` or `I (x) A` on a space whose other factor has `other_dim`.
    pub fn lift(&self, side: Subsystem, other_dim: usize) -> Self {
        let id = ComplexMatrix::identity(other_dim);
        let matrix = match side {
            Subsystem::A => self.matrix.kron(&id),
            Subsystem::B => id.kron(&self.matrix),
        };
        Self { matrix }
    }

    /// `A (x) B`.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    fn apply(&self, phi: &[Complex64]) -> Result<Vec<Complex64>> {
        self.matrix.matvec(phi)
    }
}

/// Finite set of distinct real outcomes, one effect per outcome.
#[derive(Debug, Clone)]
pub struct RealValuedObservable {
    outcomes: Vec<f64>,
    effects: Vec<ComplexMatrix>,
}

impl RealValuedObservable {
    /// Validates that every effect satisfies `0 <= A_x <= I` and that they sum to `I`.
    pub fn new(outcomes: Vec<f64>, effects: Vec<ComplexMatrix>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() != effects.len() {
            return Err(Error::InvalidInput(format!(
                "{} outcomes for {} effects",
                outcomes.len(),
                effects.len()
            )));
        }
        for (i, x) in outcomes.iter().enumerate() {
            if !x.is_finite() || outcomes[..i].contains(x) {
                return Err(Error::InvalidInput(format!(
                    "outcomes must be finite and distinct, got {x}"
                )));
            }
        }
        let dim = effects[0].rows();
        let mut total = ComplexMatrix::zeros(dim, dim);
        for e in &effects {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::shape(
                    format!("{dim}x{dim} effect"),
                    format!("{}x{}", e.rows(), e.cols()),
                ));
            }
            let eig = e.hermitian_eig()?;
            let lo = eig.values[0];
            let hi = eig.values[dim - 1];
            if lo < -EFFECT_TOL || hi > 1.0 + EFFECT_TOL {
                return Err(Error::OutOfRange {
                    value: if lo < -EFFECT_TOL { lo } else { hi },
                    lo: 0.0,
                    hi: 1.0,
                });
            }
            total = &total + e;
        }
        let residual = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if residual > EFFECT_TOL {
            return Err(Error::InvalidInput(format!(
                "effects sum to identity only within {residual:e}"
            )));
        }
        Ok(Self { outcomes, effects })
    }

    /// Projective observable: outcome `outcomes[k]` on `|v_k><v_k|`.
    pub fn projective(outcomes: Vec<f64>, vectors: &[Vec<Complex64>]) -> Result<Self> {
        let effects = vectors
            .iter()
            .map(|v| ComplexMatrix::projector(v))
            .collect();
        Self::new(outcomes, effects)
    }

    /// Projectors onto the computational basis.
    pub fn computational(outcomes: Vec<f64>) -> Result<Self> {
        let dim = outcomes.len();
        let vectors: Vec<Vec<Complex64>> = (0..dim)
            .map(|k| {
                (0..dim)
                    .map(|i| if i == k { linalg::C1 } else { C0 })
                    .collect()
            })
            .collect();
        Self::projective(outcomes, &vectors)
    }

    /// Computational projectors with the eigenvalues of the named `sz` operator
    /// as outcomes: `+1, -1` for a qubit, `1, 0, -1` for a qutrit.
    pub fn spin_z(dim: usize) -> Result<Self> {
        let outcomes = crate::operators::sz_diagonal(dim);
        Self::computational(outcomes)
    }

    /// Rank-one projectors onto the eigenvectors of a Hermitian operator,
    /// labelled by eigenvector index.
    pub fn from_eigenbasis(op: &ObservableOperator) -> Result<Self> {
        let eig = op.matrix.hermitian_eig()?;
        let vectors: Vec<Vec<Complex64>> = (0..op.dim()).map(|k| eig.vector(k)).collect();
        let outcomes = (0..op.dim()).map(|k| k as f64).collect();
        Self::projective(outcomes, &vectors)
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    /// Outcome probabilities `<phi|A_x|phi>`.
    pub fn probabilities(&self, phi: &[Complex64]) -> Result<Vec<f64>> {
        self.effects
            .iter()
            .map(|e| {
                let p = real_expectation(e, phi)?;
                crate::measures::clamp_range(p, 0.0, 1.0)
            })
            .collect()
    }

    pub fn lift(&self, side: Subsystem, other_dim: usize) -> Self {
        let id = ComplexMatrix::identity(other_dim);
        let effects = self
            .effects
            .iter()
            .map(|e| match side {
                Subsystem::A => e.kron(&id),
                Subsystem::B => id.kron(e),
            })
            .collect();
        Self {
            outcomes: self.outcomes.clone(),
            effects,
        }
    }
}

fn check_state(phi: &[Complex64], dim: usize) -> Result<()> {
    if phi.len() != dim {
        return Err(Error::shape(
            format!("state of length {dim}"),
            format!("{}", phi.len()),
        ));
    }
    schmidt::check_normalized(phi, NORM_TOL)
}

fn real_expectation(m: &ComplexMatrix, phi: &[Complex64]) -> Result<f64> {
    check_state(phi, m.cols())?;
    let z = linalg::inner(phi, &m.matvec(phi)?);
    let scale = m.max_abs().max(1.0);
    if z.im.abs() > IMAG_TOL * scale {
        return Err(Error::InvalidInput(format!(
            "expectation has imaginary part {:e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `<phi|A|phi>`.
pub fn expectation(a: &ObservableOperator, phi: &[Complex64]) -> Result<f64> {
    real_expectation(&a.matrix, phi)
}

/// `A - <A> I`.
pub fn deviation(a: &ObservableOperator, phi: &[Complex64]) -> Result<ObservableOperator> {
    let mean = expectation(a, phi)?;
    let shifted = &a.matrix - &ComplexMatrix::identity(a.dim()).scale_real(mean);
    Ok(ObservableOperator { matrix: shifted })
}

fn check_pair(a: &ObservableOperator, b: &ObservableOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::shape(
            format!("{}x{} operator", a.dim(), a.dim()),
            format!("{}x{}", b.dim(), b.dim()),
        ));
    }
    Ok(())
}

/// `<AB> - <A><B>`.
pub fn correlation(
    a: &ObservableOperator,
    b: &ObservableOperator,
    phi: &[Complex64],
) -> Result<Complex64> {
    check_pair(a, b)?;
    check_state(phi, a.dim())?;
    let a_phi = a.apply(phi)?;
    let b_phi = b.apply(phi)?;
    let ab = linalg::inner(&a_phi, &b_phi);
    let ea = linalg::inner(phi, &a_phi).re;
    let eb = linalg::inner(phi, &b_phi).re;
    Ok(ab - ea * eb)
}

/// Real part of the correlation.
pub fn covariance(
    a: &ObservableOperator,
    b: &ObservableOperator,
    phi: &[Complex64],
) -> Result<f64> {
    Ok(correlation(a, b, phi)?.re)
}

/// `<A^2> - <A>^2`, clamped at zero within rounding slack.
pub fn variance(a: &ObservableOperator, phi: &[Complex64]) -> Result<f64> {
    check_state(phi, a.dim())?;
    let a_phi = a.apply(phi)?;
    let mean = linalg::inner(phi, &a_phi).re;
    let v = linalg::norm_sqr(&a_phi) - mean * mean;
    non_negative(v)
}

fn non_negative(v: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v >= -STAT_SLACK {
        Ok(0.0)
    } else {
        Err(Error::OutOfRange {
            value: v,
            lo: 0.0,
            hi: f64::INFINITY,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub correlation: Complex64,
    pub covariance: f64,
    pub variance_a: f64,
    pub variance_b: f64,
    pub commutator_expect: Complex64,
    /// `| |<[A,B]>|^2 / 4 + cov^2 - |cor|^2 |`.
    pub identity_residual: f64,
    /// `var_a var_b - |cor|^2`.
    pub inequality_slack: f64,
}

impl CorrelationReport {
    fn assemble(
        correlation: Complex64,
        variance_a: f64,
        variance_b: f64,
        commutator_expect: Complex64,
    ) -> Self {
        let covariance = correlation.re;
        let cor2 = correlation.norm_sqr();
        let identity_residual =
            (0.25 * commutator_expect.norm_sqr() + covariance * covariance - cor2).abs();
        Self {
            correlation,
            covariance,
            variance_a,
            variance_b,
            commutator_expect,
            identity_residual,
            inequality_slack: variance_a * variance_b - cor2,
        }
    }
}

/// Correlation, covariance, both variances and the commutator term, with the
/// residual of the uncertainty identity and the slack in its inequality.
pub fn uncertainty_check(
    a: &ObservableOperator,
    b: &ObservableOperator,
    phi: &[Complex64],
) -> Result<CorrelationReport> {
    let cor = correlation(a, b, phi)?;
    let comm = a.matrix.commutator(&b.matrix)?.sandwich(phi, phi)?;
    Ok(CorrelationReport::assemble(
        cor,
        variance(a, phi)?,
        variance(b, phi)?,
        comm,
    ))
}

/// `sum_x x A_x`.
pub fn stochastic_operator(obs: &RealValuedObservable) -> ObservableOperator {
    let dim = obs.dim();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (x, e) in obs.outcomes.iter().zip(&obs.effects) {
        m = &m + &e.scale_real(*x);
    }
    ObservableOperator { matrix: m }
}

/// Statistics of two observables evaluated from effect-level sums
/// `sum_{x,y} x y (<A_x B_y> - <A_x><B_y>)`.
pub fn observable_statistics(
    obs_a: &RealValuedObservable,
    obs_b: &RealValuedObservable,
    phi: &[Complex64],
) -> Result<CorrelationReport> {
    if obs_a.dim() != obs_b.dim() {
        return Err(Error::shape(
            format!("dimension {}", obs_a.dim()),
            format!("{}", obs_b.dim()),
        ));
    }
    check_state(phi, obs_a.dim())?;
    let a_phi: Vec<Vec<Complex64>> = obs_a
        .effects
        .iter()
        .map(|e| e.matvec(phi))
        .collect::<Result<_>>()?;
    let b_phi: Vec<Vec<Complex64>> = obs_b
        .effects
        .iter()
        .map(|e| e.matvec(phi))
        .collect::<Result<_>>()?;
    let mean = |v: &[Complex64]| linalg::inner(phi, v).re;

    let pair_sum = |xs: &[f64], xv: &[Vec<Complex64>], ys: &[f64], yv: &[Vec<Complex64>]| {
        let mut acc = C0;
        for (x, u) in xs.iter().zip(xv) {
            for (y, w) in ys.iter().zip(yv) {
                acc += (linalg::inner(u, w) - mean(u) * mean(w)) * (x * y);
            }
        }
        acc
    };
    let cor = pair_sum(&obs_a.outcomes, &a_phi, &obs_b.outcomes, &b_phi);
    let var_a = non_negative(pair_sum(&obs_a.outcomes, &a_phi, &obs_a.outcomes, &a_phi).re)?;
    let var_b = non_negative(pair_sum(&obs_b.outcomes, &b_phi, &obs_b.outcomes, &b_phi).re)?;
    let mut comm = C0;
    for (x, u) in obs_a.outcomes.iter().zip(&a_phi) {
        for (y, w) in obs_b.outcomes.iter().zip(&b_phi) {
            comm += (linalg::inner(u, w) - linalg::inner(w, u)) * (x * y);
        }
    }
    Ok(CorrelationReport::assemble(cor, var_a, var_b, comm))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceOutcome {
    pub passed: bool,
    pub max_deviation: f64,
    /// Outcome pair achieving the maximum.
    pub worst: (f64, f64),
}

/// `<A (x) B>_alpha` computed as `<C| A C B^T>` on the coefficient matrix.
pub fn local_product_expectation(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    alpha: &BipartiteState,
) -> Result<Complex64> {
    if a.rows() != alpha.dim_a()
        || a.cols() != alpha.dim_a()
        || b.rows() != alpha.dim_b()
        || b.cols() != alpha.dim_b()
    {
        return Err(Error::shape(
            format!(
                "{}x{} and {}x{} operators",
                alpha.dim_a(),
                alpha.dim_a(),
                alpha.dim_b(),
                alpha.dim_b()
            ),
            format!("{}x{} and {}x{}", a.rows(), a.cols(), b.rows(), b.cols()),
        ));
    }
    let c = alpha.reshape_to_matrix();
    let bt = ComplexMatrix::from_fn(b.cols(), b.rows(), |i, j| b[(j, i)]);
    let acb = a.matmul(&c)?.matmul(&bt)?;
    Ok(linalg::inner(c.as_slice(), acb.as_slice()))
}

/// Checks `<A_x (x) B_y> = <A_x (x) I><I (x) B_y>` for every outcome pair.
pub fn independence_test(
    obs_a: &RealValuedObservable,
    obs_b: &RealValuedObservable,
    alpha: &BipartiteState,
    tol: f64,
) -> Result<IndependenceOutcome> {
    if obs_a.dim() != alpha.dim_a() || obs_b.dim() != alpha.dim_b() {
        return Err(Error::shape(
            format!(
                "observables on {} and {} levels",
                alpha.dim_a(),
                alpha.dim_b()
            ),
            format!("{} and {}", obs_a.dim(), obs_b.dim()),
        ));
    }
    let id_a = ComplexMatrix::identity(alpha.dim_a());
    let id_b = ComplexMatrix::identity(alpha.dim_b());
    let pa: Vec<f64> = obs_a
        .effects
        .iter()
        .map(|e| local_product_expectation(e, &id_b, alpha).map(|z| z.re))
        .collect::<Result<_>>()?;
    let pb: Vec<f64> = obs_b
        .effects
        .iter()
        .map(|e| local_product_expectation(&id_a, e, alpha).map(|z| z.re))
        .collect::<Result<_>>()?;
    let mut max_deviation: f64 = 0.0;
    let mut worst = (obs_a.outcomes[0], obs_b.outcomes[0]);
    for (xi, ea) in obs_a.effects.iter().enumerate() {
        for (yi, eb) in obs_b.effects.iter().enumerate() {
            let joint = local_product_expectation(ea, eb, alpha)?;
            let dev = (joint - pa[xi] * pb[yi]).norm();
            if dev > max_deviation {
                max_deviation = dev;
                worst = (obs_a.outcomes[xi], obs_b.outcomes[yi]);
            }
        }
    }
    Ok(IndependenceOutcome {
        passed: max_deviation <= tol,
        max_deviation,
        worst,
    })
}

/// Joint observable of two commuting observables; outcomes are pairs.
#[derive(Debug, Clone)]
pub struct JointObservable {
    outcomes_a: Vec<f64>,
    outcomes_b: Vec<f64>,
    /// Row-major in `(x, y)`.
    effects: Vec<ComplexMatrix>,
}

impl JointObservable {
    pub fn effect(&self, x: usize, y: usize) -> &ComplexMatrix {
        &self.effects[x * self.outcomes_b.len() + y]
    }

    pub fn outcomes(&self) -> Vec<(f64, f64)> {
        self.outcomes_a
            .iter()
            .flat_map(|&x| self.outcomes_b.iter().map(move |&y| (x, y)))
            .collect()
    }

    /// `sum_y C_xy`.
    pub fn marginal_a(&self, x: usize) -> ComplexMatrix {
        let dim = self.effects[0].rows();
        (0..self.outcomes_b.len()).fold(ComplexMatrix::zeros(dim, dim), |acc, y| {
            &acc + self.effect(x, y)
        })
    }

    /// `sum_x C_xy`.
    pub fn marginal_b(&self, y: usize) -> ComplexMatrix {
        let dim = self.effects[0].rows();
        (0..self.outcomes_a.len()).fold(ComplexMatrix::zeros(dim, dim), |acc, x| {
            &acc + self.effect(x, y)
        })
    }

    pub fn total(&self) -> ComplexMatrix {
        let dim = self.effects[0].rows();
        self.effects
            .iter()
            .fold(ComplexMatrix::zeros(dim, dim), |acc, e| &acc + e)
    }

    /// `sum_{x,y} x y C_xy`.
    pub fn stochastic_operator(&self) -> ObservableOperator {
        let dim = self.effects[0].rows();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (k, (x, y)) in self.outcomes().into_iter().enumerate() {
            m = &m + &self.effects[k].scale_real(x * y);
        }
        ObservableOperator { matrix: m }
    }
}

/// `C_xy = A_x B_y` for observables on one space whose effects commute.
pub fn commuting_joint_observable(
    obs_a: &RealValuedObservable,
    obs_b: &RealValuedObservable,
) -> Result<JointObservable> {
    if obs_a.dim() != obs_b.dim() {
        return Err(Error::shape(
            format!("dimension {}", obs_a.dim()),
            format!("{}", obs_b.dim()),
        ));
    }
    let mut effects = Vec::with_capacity(obs_a.effects.len() * obs_b.effects.len());
    for ea in &obs_a.effects {
        for eb in &obs_b.effects {
            let comm = ea.commutator(eb)?.max_abs();
            if comm > EFFECT_TOL {
                return Err(Error::Unsupported(format!(
                    "joint observable of non-commuting effects (commutator {comm:e})"
                )));
            }
            effects.push(ea.matmul(eb)?);
        }
    }
    Ok(JointObservable {
        outcomes_a: obs_a.outcomes.clone(),
        outcomes_b: obs_b.outcomes.clone(),
        effects,
    })
}

/// `C_xy = A_x (x) B_y` on the product space.
pub fn joint_observable(
    obs_a: &RealValuedObservable,
    obs_b: &RealValuedObservable,
) -> Result<JointObservable> {
    let lifted_a = obs_a.lift(Subsystem::A, obs_b.dim());
    let lifted_b = obs_b.lift(Subsystem::B, obs_a.dim());
    commuting_joint_observable(&lifted_a, &lifted_b)
}

/// Matrix of `<u_i|M|u_j>` over the first `n` Schmidt vectors of one side.
fn schmidt_elements(
    m: &ComplexMatrix,
    decomp: &SchmidtDecomposition,
    side: Subsystem,
) -> Result<Vec<Complex64>> {
    let n = decomp.lambdas.len();
    let vecs: Vec<Vec<Complex64>> = (0..n)
        .map(|s| match side {
            Subsystem::A => decomp.left_vector(s),
            Subsystem::B => decomp.right_vector(s),
        })
        .collect();
    let dim = vecs[0].len();
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::shape(
            format!("{dim}x{dim} operator"),
            format!("{}x{}", m.rows(), m.cols()),
        ));
    }
    let mv: Vec<Vec<Complex64>> = vecs.iter().map(|v| m.matvec(v)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(n * n);
    for vi in &vecs {
        for mvj in &mv {
            out.push(linalg::inner(vi, mvj));
        }
    }
    Ok(out)
}

/// `sum_{i,j} l_i l_j <phi_i|A|phi_j> <psi_i|B|psi_j>`.
fn schmidt_sum(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    decomp: &SchmidtDecomposition,
) -> Result<Complex64> {
    let ea = schmidt_elements(a, decomp, Subsystem::A)?;
    let eb = schmidt_elements(b, decomp, Subsystem::B)?;
    let l = &decomp.lambdas;
    let n = l.len();
    let mut acc = C0;
    for i in 0..n {
        for j in 0..n {
            acc += ea[i * n + j] * eb[i * n + j] * (l[i] * l[j]);
        }
    }
    Ok(acc)
}

/// `<A (x) B>` from Schmidt data.
pub fn schmidt_form_expectation(
    a: &ObservableOperator,
    b: &ObservableOperator,
    decomp: &SchmidtDecomposition,
) -> Result<f64> {
    Ok(schmidt_sum(&a.matrix, &b.matrix, decomp)?.re)
}

/// `<A^2 (x) B^2> - <A (x) B>^2` from Schmidt data.
pub fn schmidt_form_variance(
    a: &ObservableOperator,
    b: &ObservableOperator,
    decomp: &SchmidtDecomposition,
) -> Result<f64> {
    let a2 = a.matrix.matmul(&a.matrix)?;
    let b2 = b.matrix.matmul(&b.matrix)?;
    let second = schmidt_sum(&a2, &b2, decomp)?.re;
    let first = schmidt_sum(&a.matrix, &b.matrix, decomp)?.re;
    non_negative(second - first * first)
}

/// `<A (x) I> = sum_i l_i^2 <A>_{phi_i}`.
pub fn schmidt_form_marginal_expectation(
    a: &ObservableOperator,
    decomp: &SchmidtDecomposition,
) -> Result<f64> {
    let ea = schmidt_elements(&a.matrix, decomp, Subsystem::A)?;
    let n = decomp.lambdas.len();
    Ok(decomp
        .lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| l * l * ea[i * n + i].re)
        .sum())
}

/// `Var(A (x) I) = sum_i l_i^2 <A^2>_{phi_i} - (sum_i l_i^2 <A>_{phi_i})^2`.
pub fn schmidt_form_marginal_variance(
    a: &ObservableOperator,
    decomp: &SchmidtDecomposition,
) -> Result<f64> {
    let a2 = ObservableOperator {
        matrix: a.matrix.matmul(&a.matrix)?,
    };
    let second = schmidt_form_marginal_expectation(&a2, decomp)?;
    let first = schmidt_form_marginal_expectation(a, decomp)?;
    non_negative(second - first * first)
}

/// `cor(A (x) B, C (x) D)` evaluated directly on the state vector.
pub fn interaction_correlation(
    a: &ObservableOperator,
    b: &ObservableOperator,
    c: &ObservableOperator,
    d: &ObservableOperator,
    alpha: &BipartiteState,
) -> Result<Complex64> {
    let ac = a.matrix.matmul(&c.matrix)?;
    let bd = b.matrix.matmul(&d.matrix)?;
    let joint = local_product_expectation(&ac, &bd, alpha)?;
    let ab = local_product_expectation(&a.matrix, &b.matrix, alpha)?;
    let cd = local_product_expectation(&c.matrix, &d.matrix, alpha)?;
    Ok(joint - ab * cd)
}

/// Same quantity as [`interaction_correlation`] from the double and quadruple
/// Schmidt sums.
pub fn interaction_correlation_schmidt(
    a: &ObservableOperator,
    b: &ObservableOperator,
    c: &ObservableOperator,
    d: &ObservableOperator,
    decomp: &SchmidtDecomposition,
) -> Result<Complex64> {
    let ac = a.matrix.matmul(&c.matrix)?;
    let bd = b.matrix.matmul(&d.matrix)?;
    let first = schmidt_sum(&ac, &bd, decomp)?;
    let ea = schmidt_elements(&a.matrix, decomp, Subsystem::A)?;
    let eb = schmidt_elements(&b.matrix, decomp, Subsystem::B)?;
    let ec = schmidt_elements(&c.matrix, decomp, Subsystem::A)?;
    let ed = schmidt_elements(&d.matrix, decomp, Subsystem::B)?;
    let l = &decomp.lambdas;
    let n = l.len();
    let mut quad = C0;
    for i in 0..n {
        for j in 0..n {
            let left = ea[i * n + j] * eb[i * n + j] * (l[i] * l[j]);
            for r in 0..n {
                for s in 0..n {
                    quad += left * ec[r * n + s] * ed[r * n + s] * (l[r] * l[s]);
                }
            }
        }
    }
    Ok(first - quad)
}

/// `cor(A (x) I, C (x) I) = sum_i l_i^2 <phi_i|AC|phi_i> - sum_{i,r} l_i^2 l_r^2 <A>_{phi_i} <C>_{phi_r}`.
pub fn schmidt_form_marginal_correlation(
    a: &ObservableOperator,
    c: &ObservableOperator,
    decomp: &SchmidtDecomposition,
) -> Result<Complex64> {
    let ac = a.matrix.matmul(&c.matrix)?;
    let e_ac = schmidt_elements(&ac, decomp, Subsystem::A)?;
    let ea = schmidt_elements(&a.matrix, decomp, Subsystem::A)?;
    let ec = schmidt_elements(&c.matrix, decomp, Subsystem::A)?;
    let n = decomp.lambdas.len();
    let w: Vec<f64> = decomp.lambdas.iter().map(|l| l * l).collect();
    let first: Complex64 = (0..n).map(|i| e_ac[i * n + i] * w[i]).sum();
    let mean_a: Complex64 = (0..n).map(|i| ea[i * n + i] * w[i]).sum();
    let mean_c: Complex64 = (0..n).map(|r| ec[r * n + r] * w[r]).sum();
    Ok(first - mean_a * mean_c)
}

/// Gaussian Hermitian matrix `(G + G^dagger) / 2` with standard complex normal `G`.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ObservableOperator {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    ObservableOperator {
        matrix: (&g + &g.adjoint()).scale_real(0.5),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityWitness {
    pub kind: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityVerdict {
    /// No tested pair showed correlation or dependence above `tol`. This is
    /// evidence, not proof: only finitely many observables were tried.
    pub separable_consistent: bool,
    pub trials: usize,
    pub hermitian_pairs_tested: usize,
    pub observable_pairs_tested: usize,
    pub max_abs_correlation: f64,
    pub max_independence_deviation: f64,
    pub witness: Option<SeparabilityWitness>,
    pub schmidt_rank: usize,
    pub agrees_with_schmidt_rank: bool,
}

/// Looks for local correlations or dependence in `alpha`.
///
/// Deterministic candidates come first: computational-basis (spin-z)
/// projective observables and the Schmidt-basis projectors of the state
/// itself. Then `trials` seeded Gaussian Hermitian pairs `(A (x) I, I (x) B)`
/// are tested for correlation and their spectral observables for independence.
pub fn separability_equivalence_check(
    alpha: &BipartiteState,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<SeparabilityVerdict> {
    let (da, db) = (alpha.dim_a(), alpha.dim_b());
    let decomp = schmidt::schmidt_decompose(alpha)?;
    let rank = decomp.rank(RANK_TOL);

    let mut max_cor: f64 = 0.0;
    let mut max_dep: f64 = 0.0;
    let mut witness: Option<SeparabilityWitness> = None;
    let mut herm_pairs = 0;
    let mut obs_pairs = 0;

    let note = |kind: &str, value: f64, witness: &mut Option<SeparabilityWitness>| {
        if value > tol && witness.as_ref().is_none_or(|w| value > w.value) {
            *witness = Some(SeparabilityWitness {
                kind: kind.to_string(),
                value,
            });
        }
    };

    let mut test_pair = |a: &ObservableOperator,
                         b: &ObservableOperator,
                         kind: &str,
                         witness: &mut Option<SeparabilityWitness>|
     -> Result<()> {
        let cor = local_product_expectation(&a.matrix, &b.matrix, alpha)?
            - local_product_expectation(&a.matrix, &ComplexMatrix::identity(db), alpha)?
                * local_product_expectation(&ComplexMatrix::identity(da), &b.matrix, alpha)?;
        herm_pairs += 1;
        max_cor = max_cor.max(cor.norm());
        note(kind, cor.norm(), witness);
        Ok(())
    };

    let schmidt_a: Vec<Vec<Complex64>> = (0..da).map(|k| decomp.u.column(k)).collect();
    let schmidt_b: Vec<Vec<Complex64>> = (0..db).map(|k| decomp.vdag.row(k)).collect();

    let fixed_obs = vec![
        (
            "spin-z projectors",
            RealValuedObservable::spin_z(da)?,
            RealValuedObservable::spin_z(db)?,
        ),
        (
            "Schmidt-basis projectors",
            RealValuedObservable::projective((0..da).map(|k| k as f64).collect(), &schmidt_a)?,
            RealValuedObservable::projective((0..db).map(|k| k as f64).collect(), &schmidt_b)?,
        ),
    ];
    for (kind, oa, ob) in &fixed_obs {
        test_pair(
            &stochastic_operator(oa),
            &stochastic_operator(ob),
            &format!("correlation of {kind}"),
            &mut witness,
        )?;
        let ind = independence_test(oa, ob, alpha, tol)?;
        obs_pairs += 1;
        max_dep = max_dep.max(ind.max_deviation);
        note(
            &format!("dependence of {kind}"),
            ind.max_deviation,
            &mut witness,
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let a = random_hermitian(da, &mut rng);
        let b = random_hermitian(db, &mut rng);
        test_pair(&a, &b, "correlation of random Hermitian pair", &mut witness)?;
        let oa = RealValuedObservable::from_eigenbasis(&a)?;
        let ob = RealValuedObservable::from_eigenbasis(&b)?;
        let ind = independence_test(&oa, &ob, alpha, tol)?;
        obs_pairs += 1;
        max_dep = max_dep.max(ind.max_deviation);
        note(
            "dependence of random spectral observables",
            ind.max_deviation,
            &mut witness,
        );
    }

    let separable_consistent = max_cor <= tol && max_dep <= tol;
    Ok(SeparabilityVerdict {
        separable_consistent,
        trials,
        hermitian_pairs_tested: herm_pairs,
        observable_pairs_tested: obs_pairs,
        max_abs_correlation: max_cor,
        max_independence_deviation: max_dep,
        witness,
        schmidt_rank: rank,
        agrees_with_schmidt_rank: separable_consistent == (rank == 1),
    })
}
