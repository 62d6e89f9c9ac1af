//! Numerical sweeps over the partial order of the normalized measures.
//!
//! For every state `K <= T <= C` and `K <= R <= C` hold, while `T` and `R` are
//! not ordered. [`run_order_sweep`] checks the two chains over Haar-random
//! states plus a few hand-picked boundary states, and records one state on each
//! side of the `T`/`R` comparison.
//!
//! Random states come from ChaCha8 seeded with `seed`; sample `k` of shape `s`
//! reads stream `(s << 40) | k`, so results do not depend on how the sweep is
//! scheduled across threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{
    self, Concurrence, MeasureRegistry, MeasureReport, Robustness, SchmidtNumber, Tangle,
};
use crate::qutrit::{closed_form_lambdas, DynamicsCase};
use crate::schmidt::{self, BipartiteState};

/// Additive slack for every inequality.
pub const DEFAULT_SLACK: f64 = 1e-12;

/// The two ordered chains, from least to most sensitive.
pub const CHAINS: [[&str; 3]; 2] = [
    [SchmidtNumber::NAME, Tangle::NAME, Concurrence::NAME],
    [SchmidtNumber::NAME, Robustness::NAME, Concurrence::NAME],
];

const MAX_RECORDED_VIOLATIONS: usize = 16;

/// Deterministic source of Haar-random pure states.
#[derive(Debug, Clone, Copy)]
pub struct HaarSampler {
    seed: u64,
}

impl HaarSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Complex Gaussian amplitudes, normalized.
    pub fn sample(&self, dim_a: usize, dim_b: usize, stream: u64) -> Result<BipartiteState> {
        if dim_a < 1 || dim_b < 1 {
            return Err(Error::InvalidInput(format!(
                "dimensions must be at least 1, got {dim_a}x{dim_b}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        let amps: Vec<Complex64> = (0..dim_a * dim_b)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        BipartiteState::new_normalized(dim_a, dim_b, amps)
    }
}

pub fn sample_haar_state(dim_a: usize, dim_b: usize, seed: u64) -> Result<BipartiteState> {
    HaarSampler::new(seed).sample(dim_a, dim_b, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainViolation {
    pub lower: &'static str,
    pub upper: &'static str,
    pub lower_value: f64,
    pub upper_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCheck {
    pub passed: bool,
    /// Per entry of [`CHAINS`]: whether that chain holds.
    pub chain_holds: [bool; 2],
    /// Largest `lower - upper` seen over all compared pairs, floored at 0.
    pub max_excess: f64,
    pub violations: Vec<ChainViolation>,
}

/// Checks `K <= T + slack`, `T <= C + slack`, `K <= R + slack`, `R <= C + slack`.
pub fn check_order_chain(report: &MeasureReport, slack: f64) -> ChainCheck {
    check_with(
        |name| Ok(report.normalized(name).expect("built-in measure")),
        slack,
    )
    .expect("infallible")
}

/// Same check with every measure evaluated through `registry` from raw lambdas.
pub fn check_order_chain_with(
    registry: &MeasureRegistry,
    lambdas: &[f64],
    n: usize,
    slack: f64,
) -> Result<ChainCheck> {
    check_with(|name| registry.get(name)?.normalized(lambdas, n), slack)
}

fn check_with(value: impl Fn(&'static str) -> Result<f64>, slack: f64) -> Result<ChainCheck> {
    let mut chain_holds = [true; 2];
    let mut violations = Vec::new();
    let mut max_excess: f64 = 0.0;
    for (c, chain) in CHAINS.iter().enumerate() {
        for pair in chain.windows(2) {
            let lo = value(pair[0])?;
            let hi = value(pair[1])?;
            max_excess = max_excess.max(lo - hi);
            if lo > hi + slack {
                chain_holds[c] = false;
                let v = ChainViolation {
                    lower: pair[0],
                    upper: pair[1],
                    lower_value: lo,
                    upper_value: hi,
                };
                if !violations.contains(&v) {
                    violations.push(v);
                }
            }
        }
    }
    Ok(ChainCheck {
        passed: chain_holds.iter().all(|&h| h),
        chain_holds,
        max_excess,
        violations,
    })
}

/// The side bounds behind the chains: `1/sum(l^4) <= n` and
/// `(sum l)^2 >= 1/sum(l^4)`.
pub fn check_auxiliary_bounds(lambdas: &[f64], n: usize, slack: f64) -> bool {
    let sum4: f64 = lambdas.iter().map(|l| l.powi(4)).sum();
    let sum1: f64 = lambdas.iter().sum();
    let k = 1.0 / sum4;
    k <= n as f64 + slack && sum1 * sum1 + slack >= k
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub omega_t: f64,
    pub lambdas: Vec<f64>,
    pub tangle: f64,
    pub robustness: f64,
}

fn case1_witness(omega_t: f64) -> Witness {
    let lambdas = closed_form_lambdas(DynamicsCase::TwoLevel, omega_t).expect("case 1 is total");
    let tangle = measures::tangle_norm(&lambdas, 3).expect("normalized");
    let robustness = measures::robustness_norm(&lambdas, 3).expect("normalized");
    Witness {
        omega_t,
        lambdas: lambdas.to_vec(),
        tangle,
        robustness,
    }
}

/// Case-1 states on either side of the tangle/robustness comparison:
/// `(R > T at omega t = pi/16, T > R at omega t = pi/4)`.
pub fn crossover_witnesses() -> (Witness, Witness) {
    (case1_witness(PI / 16.0), case1_witness(PI / 4.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub shapes: Vec<(usize, usize)>,
    pub samples_per_shape: usize,
    pub seed: u64,
    pub slack: f64,
    /// Add separable, maximally entangled and rank-deficient states per shape.
    pub include_boundary_states: bool,
    /// Points on the Case-1 grid scanned for tangle/robustness witnesses.
    pub case1_grid_points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            shapes: vec![(2, 2), (3, 3)],
            samples_per_shape: 1000,
            seed: 0,
            slack: DEFAULT_SLACK,
            include_boundary_states: true,
            case1_grid_points: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordedViolation {
    pub shape: (usize, usize),
    /// Sample index, or `None` for an injected boundary state.
    pub sample: Option<usize>,
    pub lambdas: Vec<f64>,
    pub violations: Vec<ChainViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    pub samples: usize,
    pub violations_k_t_c: usize,
    pub violations_k_r_c: usize,
    pub violations_auxiliary: usize,
    pub max_slack_used: f64,
    pub witness_t_gt_r: Option<Witness>,
    pub witness_r_gt_t: Option<Witness>,
    pub case1_grid_t_gt_r: usize,
    pub case1_grid_r_gt_t: usize,
    pub recorded_violations: Vec<RecordedViolation>,
}

impl OrderReport {
    pub fn total_violations(&self) -> usize {
        self.violations_k_t_c + self.violations_k_r_c + self.violations_auxiliary
    }

    /// Zero violations and both witnesses present.
    pub fn passed(&self) -> bool {
        self.total_violations() == 0
            && self.witness_t_gt_r.is_some()
            && self.witness_r_gt_t.is_some()
    }
}

#[derive(Debug, Clone, Default)]
struct Tally {
    samples: usize,
    k_t_c: usize,
    k_r_c: usize,
    aux: usize,
    max_excess: f64,
    recorded: Vec<(usize, usize, RecordedViolation)>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.samples += other.samples;
        self.k_t_c += other.k_t_c;
        self.k_r_c += other.k_r_c;
        self.aux += other.aux;
        self.max_excess = self.max_excess.max(other.max_excess);
        self.recorded.extend(other.recorded);
        self.recorded.sort_by_key(|(s, k, _)| (*s, *k));
        self.recorded.truncate(MAX_RECORDED_VIOLATIONS);
        self
    }

    fn single(
        shape_idx: usize,
        order_key: usize,
        shape: (usize, usize),
        sample: Option<usize>,
        report: &MeasureReport,
        slack: f64,
    ) -> Tally {
        let check = check_order_chain(report, slack);
        let aux_ok = check_auxiliary_bounds(&report.lambdas, report.n, slack);
        let mut t = Tally {
            samples: 1,
            k_t_c: usize::from(!check.chain_holds[0]),
            k_r_c: usize::from(!check.chain_holds[1]),
            aux: usize::from(!aux_ok),
            max_excess: check.max_excess,
            recorded: Vec::new(),
        };
        if !check.passed || !aux_ok {
            t.recorded.push((
                shape_idx,
                order_key,
                RecordedViolation {
                    shape,
                    sample,
                    lambdas: report.lambdas.clone(),
                    violations: check.violations,
                },
            ));
        }
        t
    }
}

/// Boundary states for one shape: separable, maximally entangled and an
/// equal-weight rank-2 state.
pub fn boundary_states(dim_a: usize, dim_b: usize) -> Result<Vec<BipartiteState>> {
    let n = dim_a.min(dim_b);
    let diag = |rank: usize| {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim_a * dim_b];
        for i in 0..rank {
            amps[i * dim_b + i] = Complex64::new(1.0, 0.0);
        }
        BipartiteState::new_normalized(dim_a, dim_b, amps)
    };
    let mut out = vec![diag(1)?, diag(n)?];
    if n > 2 {
        out.push(diag(2)?);
    }
    Ok(out)
}

pub fn run_order_sweep(config: &SweepConfig) -> Result<OrderReport> {
    if config.samples_per_shape < 1 {
        return Err(Error::InvalidInput(
            "samples per shape must be at least 1".into(),
        ));
    }
    let sampler = HaarSampler::new(config.seed);
    let mut tally = Tally::default();

    for (s_idx, &(da, db)) in config.shapes.iter().enumerate() {
        if da.min(db) < 2 {
            return Err(Error::DegenerateDimension { n: da.min(db) });
        }
        if config.include_boundary_states {
            for (b, state) in boundary_states(da, db)?.iter().enumerate() {
                let report = measures::all_measures(state)?;
                tally = tally.merge(Tally::single(
                    s_idx,
                    b,
                    (da, db),
                    None,
                    &report,
                    config.slack,
                ));
            }
        }
        let offset = 1usize << 20;
        let shape_tally = (0..config.samples_per_shape)
            .into_par_iter()
            .map(|k| -> Result<Tally> {
                let stream = ((s_idx as u64) << 40) | k as u64;
                let state = sampler.sample(da, db, stream)?;
                let decomp = schmidt::schmidt_decompose(&state)?;
                let report = MeasureReport::from_lambdas(&decomp.lambdas, decomp.n)?;
                Ok(Tally::single(
                    s_idx,
                    offset + k,
                    (da, db),
                    Some(k),
                    &report,
                    config.slack,
                ))
            })
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        tally = tally.merge(shape_tally);
    }

    let (r_gt_t, t_gt_r) = crossover_witnesses();
    let mut grid_t_gt_r = 0;
    let mut grid_r_gt_t = 0;
    for k in 0..config.case1_grid_points {
        let wt = (PI / 2.0) * k as f64 / config.case1_grid_points as f64;
        let w = case1_witness(wt);
        if w.tangle > w.robustness + config.slack {
            grid_t_gt_r += 1;
        } else if w.robustness > w.tangle + config.slack {
            grid_r_gt_t += 1;
        }
    }

    Ok(OrderReport {
        samples: tally.samples,
        violations_k_t_c: tally.k_t_c,
        violations_k_r_c: tally.k_r_c,
        violations_auxiliary: tally.aux,
        max_slack_used: tally.max_excess.max(0.0),
        witness_t_gt_r: (t_gt_r.tangle > t_gt_r.robustness).then_some(t_gt_r),
        witness_r_gt_t: (r_gt_t.robustness > r_gt_t.tangle).then_some(r_gt_t),
        case1_grid_t_gt_r: grid_t_gt_r,
        case1_grid_r_gt_t: grid_r_gt_t,
        recorded_violations: tally.recorded.into_iter().map(|(_, _, v)| v).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn sampler_is_normalized_and_deterministic() {
        let a = sample_haar_state(3, 4, 17).unwrap();
        let b = sample_haar_state(3, 4, 17).unwrap();
        assert_eq!(a, b);
        assert!((linalg::norm_sqr(a.amplitudes()) - 1.0).abs() < 1e-12);
        let c = HaarSampler::new(17).sample(3, 4, 1).unwrap();
        assert_ne!(a, c);
        assert!(sample_haar_state(0, 3, 1).is_err());
    }

    #[test]
    fn e3_chain_passes() {
        let k = 1.0 / 6f64.sqrt();
        let r = MeasureReport::from_lambdas(&[2.0 * k, k, k], 3).unwrap();
        let c = check_order_chain(&r, DEFAULT_SLACK);
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn extremes_pass() {
        let sep = MeasureReport::from_lambdas(&[1.0, 0.0, 0.0], 3).unwrap();
        assert!(check_order_chain(&sep, DEFAULT_SLACK).passed);
        let k = 1.0 / 3f64.sqrt();
        let max = MeasureReport::from_lambdas(&[k, k, k], 3).unwrap();
        assert!(check_order_chain(&max, DEFAULT_SLACK).passed);
    }

    #[test]
    fn detects_a_doctored_report() {
        let mut r = MeasureReport::from_lambdas(&[0.8, 0.6], 2).unwrap();
        r.tangle_norm = r.concurrence_norm + 0.1;
        let c = check_order_chain(&r, DEFAULT_SLACK);
        assert!(!c.passed);
        assert_eq!(c.chain_holds, [false, true]);
        assert_eq!(c.violations[0].lower, "tangle");
        assert_eq!(c.violations[0].upper, "concurrence");
        assert!((c.max_excess - 0.1).abs() < 1e-12);
    }

    #[test]
    fn witnesses() {
        let (r_gt_t, t_gt_r) = crossover_witnesses();
        assert!((r_gt_t.robustness - (PI / 8.0).sin() / 2.0).abs() < 1e-15);
        assert!((r_gt_t.robustness - 0.1913417).abs() < 1e-7);
        assert!((r_gt_t.tangle - 0.75 * (PI / 8.0).sin().powi(2)).abs() < 1e-15);
        assert!((r_gt_t.tangle - 0.1098350).abs() < 1e-7);
        assert!((t_gt_r.tangle - 0.75).abs() < 1e-15);
        assert!((t_gt_r.robustness - 0.5).abs() < 1e-15);
        let zero = case1_witness(0.0);
        assert_eq!((zero.tangle, zero.robustness), (0.0, 0.0));
    }

    #[test]
    fn small_sweep() {
        let cfg = SweepConfig::default();
        let rep = run_order_sweep(&cfg).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.samples, 2 * 1000 + 2 + 3);
        assert!(rep.case1_grid_r_gt_t > 0 && rep.case1_grid_t_gt_r > 0);
        let again = run_order_sweep(&cfg).unwrap();
        assert_eq!(again.max_slack_used, rep.max_slack_used);
    }

    #[test]
    fn single_sample_sweep() {
        let cfg = SweepConfig {
            shapes: vec![(2, 2)],
            samples_per_shape: 1,
            include_boundary_states: false,
            ..SweepConfig::default()
        };
        let rep = run_order_sweep(&cfg).unwrap();
        assert_eq!(rep.samples, 1);
        assert!(rep.passed());
        let bad = SweepConfig {
            samples_per_shape: 0,
            ..cfg
        };
        assert!(run_order_sweep(&bad).is_err());
    }
}
