//! Test-side oracles that avoid the library's decomposition code paths.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use schmidt_lab::linalg::ComplexMatrix;
use schmidt_lab::schmidt::BipartiteState;
use schmidt_lab::Complex64;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Standard normal by Box-Muller.
pub fn gauss(rng: &mut StdRng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

pub fn cgauss(rng: &mut StdRng) -> Complex64 {
    Complex64::new(gauss(rng), gauss(rng))
}

pub fn random_vector(dim: usize, rng: &mut StdRng) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim).map(|_| cgauss(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn random_state(da: usize, db: usize, rng: &mut StdRng) -> BipartiteState {
    BipartiteState::new(da, db, random_vector(da * db, rng)).unwrap()
}

pub fn random_hermitian(dim: usize, rng: &mut StdRng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| cgauss(rng));
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Unitary from modified Gram-Schmidt on Gaussian columns.
pub fn random_unitary(dim: usize, rng: &mut StdRng) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| cgauss(rng)).collect();
        for c in &cols {
            let p: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(c).for_each(|(x, y)| *x -= p * y);
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// `rho_A = Tr_B |psi><psi|` by explicit index sums.
pub fn reduced_density_a(psi: &[Complex64], da: usize, db: usize) -> Vec<Vec<Complex64>> {
    let mut rho = vec![vec![Complex64::new(0.0, 0.0); da]; da];
    for (i, row) in rho.iter_mut().enumerate() {
        for (k, entry) in row.iter_mut().enumerate() {
            *entry = (0..db)
                .map(|j| psi[i * db + j] * psi[k * db + j].conj())
                .sum();
        }
    }
    rho
}

/// `Tr rho_A^2`, which equals the sum of fourth powers of the Schmidt coefficients.
pub fn purity(psi: &[Complex64], da: usize, db: usize) -> f64 {
    let rho = reduced_density_a(psi, da, db);
    let mut acc = 0.0;
    for i in 0..da {
        for k in 0..da {
            acc += (rho[i][k] * rho[k][i]).re;
        }
    }
    acc
}

/// Normalized concurrence from purity.
pub fn concurrence_from_purity(p: f64, n: usize) -> f64 {
    (n as f64 / (n as f64 - 1.0) * (1.0 - p)).max(0.0).sqrt()
}

/// Closed-form qutrit Schmidt coefficients, descending, for cases 1-3.
pub fn qutrit_closed_form(case: u8, wt: f64) -> [f64; 3] {
    let mut l = match case {
        1 => [wt.cos().abs(), wt.sin().abs(), 0.0],
        2 => {
            let c = wt.cos();
            let arg = 3.5 + 3.0 * c + 1.5 * (2.0 * wt).cos() + (3.0 * wt).cos();
            [
                arg.max(0.0).sqrt() / 3.0,
                2.0 / 3.0 * (5.0 + 4.0 * c).sqrt() * (wt / 2.0).sin().powi(2),
                2.0 / 3.0 * (1.5 * wt).sin().abs(),
            ]
        }
        3 => {
            let s = 2.0 / 3.0 * (1.5 * wt).sin().abs();
            [(5.0 + 4.0 * (3.0 * wt).cos()).sqrt() / 3.0, s, s]
        }
        _ => [1.0, 0.0, 0.0],
    };
    l.sort_by(|a, b| b.partial_cmp(a).unwrap());
    l
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub const GOLDEN_CASES: [(u8, &str, &str); 3] = [
    (1, "1.5707963267948966", "case1.csv"),
    (2, "6.283185307179586", "case2.csv"),
    (3, "2.0943951023931953", "case3.csv"),
];
pub const GOLDEN_STEPS: &str = "65";

pub fn golden_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

/// First field where two traces differ by more than 1e-12; headers and shapes must match exactly.
pub fn golden_mismatch(golden: &str, fresh: &str) -> Option<String> {
    let g: Vec<&str> = golden.lines().collect();
    let f: Vec<&str> = fresh.lines().collect();
    if g.len() != f.len() || g.first() != f.first() {
        return Some("header or row count differs".into());
    }
    for (row, (a, b)) in g.iter().zip(&f).enumerate().skip(1) {
        let xs: Vec<&str> = a.split(',').collect();
        let ys: Vec<&str> = b.split(',').collect();
        if xs.len() != ys.len() {
            return Some(format!("row {row}: column count"));
        }
        for (col, (x, y)) in xs.iter().zip(&ys).enumerate() {
            let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
            if (x - y).abs() > 1e-12 {
                return Some(format!("row {row} col {col}: {x} vs {y}"));
            }
        }
    }
    None
}
