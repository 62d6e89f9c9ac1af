//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use common::*;
use rand::Rng;
use schmidt_lab::measures;
use schmidt_lab::order::{self, HaarSampler, SweepConfig};
use schmidt_lab::qutrit::{self, DynamicsCase};
use schmidt_lab::schmidt::{self, BipartiteState, Subsystem};
use schmidt_lab::stats::{self, ObservableOperator};
use schmidt_lab::Complex64;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn order_chains() -> Outcome {
    let start = Instant::now();
    let square = SweepConfig {
        shapes: (2..=6).map(|n| (n, n)).collect(),
        samples_per_shape: 100_000,
        seed: 20_240_601,
        ..SweepConfig::default()
    };
    let rect = SweepConfig {
        shapes: vec![(2, 3), (3, 4)],
        samples_per_shape: 10_000,
        seed: 20_240_602,
        ..SweepConfig::default()
    };
    let a = order::run_order_sweep(&square).unwrap();
    let b = order::run_order_sweep(&rect).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let violations = a.total_violations() + b.total_violations();
    outcome(
        violations == 0 && a.passed() && b.passed() && secs < 60.0,
        format!(
            "{} states, {violations} violations, max excess {:.1e}, {secs:.1} s",
            a.samples + b.samples,
            a.max_slack_used.max(b.max_slack_used)
        ),
    )
}

fn witnesses() -> Outcome {
    let (r_gt_t, t_gt_r) = order::crossover_witnesses();
    // independent closed forms for lambdas (cos, sin, 0)
    let (c16, s16) = ((PI / 16.0).cos(), (PI / 16.0).sin());
    let r_oracle = (PI / 8.0).sin() / 2.0;
    let t_oracle = 1.5 * (1.0 - c16.powi(4) - s16.powi(4));
    let gap1 = r_gt_t.robustness - r_gt_t.tangle;
    let gap2 = t_gt_r.tangle - t_gt_r.robustness;
    let ok = (gap1 - 0.0815064).abs() <= 1e-6
        && (r_gt_t.robustness - r_oracle).abs() <= 1e-12
        && (r_gt_t.tangle - t_oracle).abs() <= 1e-12
        && (gap2 - 0.25).abs() <= 1e-12
        && (t_gt_r.tangle - 0.75).abs() <= 1e-12
        && (t_gt_r.robustness - 0.5).abs() <= 1e-12;
    outcome(
        ok,
        format!("R-T at pi/16 = {gap1:.7}, T-R at pi/4 = {gap2:.15}"),
    )
}

fn dynamics_oracle() -> Outcome {
    let mut max_err: f64 = 0.0;
    let mut max_boundary: f64 = 0.0;
    for case in [
        DynamicsCase::TwoLevel,
        DynamicsCase::Irregular,
        DynamicsCase::Regular,
    ] {
        let cycle = case.cycle().unwrap();
        let grid = qutrit::uniform_grid(cycle, 1000).unwrap();
        let trace = qutrit::simulate(&case.initial_state(), &grid, 1.0).unwrap();
        for p in &trace.points {
            let oracle = qutrit_closed_form(case.index(), p.t);
            for i in 0..3 {
                max_err = max_err.max((p.lambdas[i] - oracle[i]).abs());
            }
        }
        let end = qutrit::measures_at(&case.initial_state(), cycle, 1.0).unwrap();
        for m in [
            end.concurrence_norm,
            end.tangle_norm,
            end.robustness_norm,
            end.schmidt_number_norm,
        ] {
            max_boundary = max_boundary.max(m);
        }
    }
    let mut max_peak_gap: f64 = 0.0;
    for wt in [2.0 * PI / 9.0, 4.0 * PI / 9.0] {
        let r = qutrit::measures_at(&DynamicsCase::Regular.initial_state(), wt, 1.0).unwrap();
        for m in [
            r.concurrence_norm,
            r.tangle_norm,
            r.robustness_norm,
            r.schmidt_number_norm,
        ] {
            max_peak_gap = max_peak_gap.max((1.0 - m).abs());
        }
    }
    outcome(
        max_err <= 1e-10 && max_boundary <= 1e-10 && max_peak_gap <= 1e-10,
        format!("lambda error {max_err:.1e}, cycle-end measures {max_boundary:.1e}, case-3 peak gap {max_peak_gap:.1e}"),
    )
}

fn spectrum() -> Outcome {
    let h = qutrit::heisenberg_hamiltonian(1.0);
    let eig = h.hermitian_eig().unwrap();
    let mut counts = [0usize; 3];
    let mut max_err: f64 = 0.0;
    for v in &eig.values {
        let (slot, target) = if *v > 0.0 {
            (0, 1.0)
        } else if *v > -1.5 {
            (1, -1.0)
        } else {
            (2, -2.0)
        };
        counts[slot] += 1;
        max_err = max_err.max((v - target).abs());
    }
    let basis = qutrit::analytic_eigenbasis();
    let mut max_res: f64 = 0.0;
    for (v, e) in basis.vectors.iter().zip(&basis.energies) {
        let hv = h.matvec(v).unwrap();
        let ev: Vec<Complex64> = v.iter().map(|z| z * e).collect();
        max_res = max_res.max(max_abs_diff(&hv, &ev));
    }
    outcome(
        counts == [5, 3, 1] && max_err <= 1e-10 && max_res <= 1e-10,
        format!("multiplicities {counts:?}, eigenvalue error {max_err:.1e}, eigenbasis residual {max_res:.1e}"),
    )
}

fn fast_path() -> Outcome {
    let mut g = rng(505);
    let mut max_diff: f64 = 0.0;
    for (da, db) in [(3, 3), (3, 4)] {
        for _ in 0..10_000 {
            let s = random_state(da, db, &mut g);
            let fast = measures::entanglement_number_fast(&s).unwrap();
            let decomp = schmidt::schmidt_decompose(&s).unwrap();
            let slow = measures::entanglement_number(&decomp.lambdas).unwrap();
            max_diff = max_diff.max((fast - slow).abs());
        }
    }
    outcome(
        max_diff <= 1e-12,
        format!("20000 states, max difference {max_diff:.1e}"),
    )
}

fn herm(dim: usize, g: &mut rand::rngs::StdRng) -> ObservableOperator {
    ObservableOperator::new(random_hermitian(dim, g)).unwrap()
}

fn stats_identities() -> Outcome {
    let mut g = rng(606);
    let mut max_res: f64 = 0.0;
    let mut min_slack = f64::INFINITY;
    for k in 0..10_000 {
        let dim = 2 + k % 8;
        let (a, b) = (herm(dim, &mut g), herm(dim, &mut g));
        let phi = random_vector(dim, &mut g);
        let r = stats::uncertainty_check(&a, &b, &phi).unwrap();
        max_res = max_res.max(r.identity_residual);
        min_slack = min_slack.min(r.inequality_slack);
    }

    let mut max_path: f64 = 0.0;
    for _ in 0..1_000 {
        let (da, db) = (g.random_range(2..=4), g.random_range(2..=4));
        let s = random_state(da, db, &mut g);
        let psi = s.amplitudes();
        let d = schmidt::schmidt_decompose(&s).unwrap();
        let (a, c) = (herm(da, &mut g), herm(da, &mut g));
        let (b, dd) = (herm(db, &mut g), herm(db, &mut g));

        let ab = a.tensor(&b);
        let direct_e = ab.matrix().sandwich(psi, psi).unwrap().re;
        let ab2 = ab.matrix().matmul(ab.matrix()).unwrap();
        let direct_v = ab2.sandwich(psi, psi).unwrap().re - direct_e * direct_e;
        let cd = c.tensor(&dd);
        let acbd = ab.matrix().matmul(cd.matrix()).unwrap();
        let direct_i = acbd.sandwich(psi, psi).unwrap()
            - ab.matrix().sandwich(psi, psi).unwrap() * cd.matrix().sandwich(psi, psi).unwrap();

        let a_full = a.lift(Subsystem::A, db);
        let c_full = c.lift(Subsystem::A, db);
        let direct_me = stats::expectation(&a_full, psi).unwrap();
        let direct_mv = stats::variance(&a_full, psi).unwrap();
        let direct_mc = stats::correlation(&a_full, &c_full, psi).unwrap();

        let diffs = [
            (stats::schmidt_form_expectation(&a, &b, &d).unwrap() - direct_e).abs(),
            (stats::schmidt_form_variance(&a, &b, &d).unwrap() - direct_v).abs(),
            (stats::interaction_correlation_schmidt(&a, &b, &c, &dd, &d).unwrap() - direct_i)
                .norm(),
            (stats::interaction_correlation(&a, &b, &c, &dd, &s).unwrap() - direct_i).norm(),
            (stats::schmidt_form_marginal_expectation(&a, &d).unwrap() - direct_me).abs(),
            (stats::schmidt_form_marginal_variance(&a, &d).unwrap() - direct_mv).abs(),
            (stats::schmidt_form_marginal_correlation(&a, &c, &d).unwrap() - direct_mc).norm(),
        ];
        max_path = diffs.iter().fold(max_path, |m, x| m.max(*x));
    }
    outcome(
        max_res <= 1e-12 && min_slack >= -1e-12 && max_path <= 1e-10,
        format!("identity residual {max_res:.1e}, min inequality slack {min_slack:.1e}, two-path gap {max_path:.1e}"),
    )
}

/// `sum_s l_s u_s (x) v_s` with `rank` coefficients and random local bases.
fn entangled_state(
    da: usize,
    db: usize,
    rank: usize,
    g: &mut rand::rngs::StdRng,
) -> BipartiteState {
    let ua = random_unitary(da, g);
    let ub = random_unitary(db, g);
    let raw: Vec<f64> = (0..rank).map(|_| g.random_range(0.05..1.0)).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); da * db];
    for (s, l) in raw.iter().enumerate() {
        let (u, v) = (ua.column(s), ub.column(s));
        for i in 0..da {
            for j in 0..db {
                amps[i * db + j] += u[i] * v[j] * (l / norm);
            }
        }
    }
    BipartiteState::new_normalized(da, db, amps).unwrap()
}

fn separability_corpus() -> Outcome {
    let mut g = rng(707);
    let mut disagreements = 0;
    let mut entangled_flagged = 0;
    for k in 0..200 {
        let (da, db) = (g.random_range(2..=4), g.random_range(2..=4));
        let (state, rank_truth) = if k < 100 {
            let s = BipartiteState::product(&random_vector(da, &mut g), &random_vector(db, &mut g))
                .unwrap();
            (s, 1)
        } else {
            let rank = g.random_range(2..=da.min(db));
            (entangled_state(da, db, rank, &mut g), rank)
        };
        let v = stats::separability_equivalence_check(&state, 20, k as u64, 1e-10).unwrap();
        if v.separable_consistent != (rank_truth == 1)
            || !v.agrees_with_schmidt_rank
            || v.schmidt_rank != rank_truth
        {
            disagreements += 1;
        }
        if !v.separable_consistent {
            entangled_flagged += 1;
        }
    }
    let e3 = BipartiteState::new(3, 3, qutrit::analytic_eigenbasis().vectors[2].clone()).unwrap();
    let sz = ObservableOperator::new(qutrit::spin1_matrices().sz).unwrap();
    let cor = stats::correlation(
        &sz.lift(Subsystem::A, 3),
        &sz.lift(Subsystem::B, 3),
        e3.amplitudes(),
    )
    .unwrap();
    let e3_ok = (cor.re + 1.0 / 3.0).abs() <= 1e-12 && cor.im.abs() <= 1e-12;
    outcome(
        disagreements == 0 && entangled_flagged == 100 && e3_ok,
        format!(
            "{disagreements} disagreements over 200 states, E3 witness {:.15}",
            cor.re
        ),
    )
}

fn lubkin(m: usize, n: usize) -> f64 {
    (m + n) as f64 / (m * n + 1) as f64
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn haar_sanity() -> Outcome {
    // the oracle formula against an independent sampler and direct purity
    let mut g = rng(808);
    let mut oracle_ok = true;
    for (m, n) in [(2, 2), (2, 3), (3, 3)] {
        let xs: Vec<f64> = (0..20_000)
            .map(|_| purity(&random_vector(m * n, &mut g), m, n))
            .collect();
        let (mean, se) = mean_and_se(&xs);
        oracle_ok &= (mean - lubkin(m, n)).abs() <= 3.0 * se;
    }
    let sampler = HaarSampler::new(909);
    let xs: Vec<f64> = (0..100_000u64)
        .map(|k| {
            let s = sampler.sample(3, 3, k).unwrap();
            let d = schmidt::schmidt_decompose(&s).unwrap();
            d.lambdas.iter().map(|l| l.powi(4)).sum()
        })
        .collect();
    let (mean, se) = mean_and_se(&xs);
    let target = lubkin(3, 3);
    outcome(
        oracle_ok && (mean - target).abs() <= 3.0 * se,
        format!(
            "mean {mean:.6} vs {target} (3 SE = {:.1e}), oracle check {}",
            3.0 * se,
            if oracle_ok { "ok" } else { "off" }
        ),
    )
}

fn cli_reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_schmidt-lab");
    let dir = tempfile::TempDir::new().unwrap();
    let e3 = BipartiteState::new(3, 3, qutrit::analytic_eigenbasis().vectors[2].clone()).unwrap();
    let state_path = dir.path().join("e3.json");
    std::fs::write(
        &state_path,
        serde_json::to_string(&schmidt_lab::cli::StateFile::from_state(&e3)).unwrap(),
    )
    .unwrap();
    let state = state_path.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["measures", state],
        vec!["simulate", "--case", "2", "--steps", "500"],
        vec![
            "stats",
            state,
            "--observable-a",
            "sz@a",
            "--observable-b",
            "sx@b",
        ],
        vec![
            "verify",
            "--samples",
            "2000",
            "--dims",
            "2x2,3x3,2x3",
            "--seed",
            "3",
        ],
    ];
    let mut identical = 0;
    for args in &commands {
        let run = || {
            Command::new(bin)
                .args(args)
                .env_remove("SCHMIDT_LAB_SEED")
                .output()
                .unwrap()
        };
        let (first, second) = (run(), run());
        if first.status.success() && first.stdout == second.stdout && !first.stdout.is_empty() {
            identical += 1;
        }
    }
    let mut golden_ok = 0;
    for (case, t_max, file) in GOLDEN_CASES {
        let out = Command::new(bin)
            .args([
                "simulate",
                "--case",
                &case.to_string(),
                "--t-max",
                t_max,
                "--steps",
                GOLDEN_STEPS,
            ])
            .output()
            .unwrap();
        let golden = std::fs::read_to_string(golden_dir().join(file)).unwrap_or_default();
        if golden_mismatch(&golden, &String::from_utf8_lossy(&out.stdout)).is_none() {
            golden_ok += 1;
        }
    }
    outcome(
        identical == commands.len() && golden_ok == GOLDEN_CASES.len(),
        format!(
            "{identical}/{} subcommands byte-identical, {golden_ok}/3 golden traces match",
            commands.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("partial-order chains", order_chains),
        ("tangle/robustness witnesses", witnesses),
        ("dynamics oracle", dynamics_oracle),
        ("Hamiltonian spectrum", spectrum),
        ("fast path equivalence", fast_path),
        ("statistics identities", stats_identities),
        ("separability corpus", separability_corpus),
        ("Haar sampler sanity", haar_sanity),
        ("CLI reproducibility", cli_reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = check();
        if !r.passed {
            failed += 1;
        }
        println!(
            "{} [{}] {name}: {} ({:.2} s)",
            if r.passed { "PASS" } else { "FAIL" },
            k + 1,
            r.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
