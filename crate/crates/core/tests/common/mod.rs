#![allow(dead_code)]

use davies_gap::linalg::CMatrix;
use davies_gap::{BathModel, Complex64, SystemSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_coupling(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let style = rng.gen_range(0..3);
    let mut s = CMatrix::zeros(d, d);
    for i in 0..d {
        s[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..d {
            let v = match style {
                0 => Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                1 => Complex64::new(rng.gen_range(-1.0..1.0), 0.0),
                _ if rng.gen_bool(0.4) => Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                _ => Complex64::new(0.0, 0.0),
            };
            s[(i, j)] = v;
            s[(j, i)] = v.conj();
        }
    }
    s
}

/// Random instance: continuous or integer-spaced spectrum, one or two couplings, β in [0, 3].
pub fn random_instance(rng: &mut ChaCha8Rng, max_d: usize) -> SystemSpec {
    let d = rng.gen_range(2..=max_d);
    let integer = rng.gen_bool(0.4);
    let mut energies = Vec::with_capacity(d);
    let mut e = rng.gen_range(-1.0..1.0);
    for _ in 0..d {
        energies.push(e);
        e += if integer { rng.gen_range(1..=2) as f64 } else { rng.gen_range(0.1..1.5) };
    }
    let beta = rng.gen_range(0.0..3.0);
    let n_alpha = rng.gen_range(1..=2);
    let mut couplings: Vec<CMatrix> = (0..n_alpha).map(|_| random_coupling(rng, d)).collect();
    // a random spanning tree of transitions keeps the classical chain irreducible
    for i in 1..d {
        let j = rng.gen_range(0..i);
        if couplings[0][(i, j)].norm() == 0.0 {
            let v = Complex64::new(rng.gen_range(0.2..1.0), rng.gen_range(-0.5..0.5));
            couplings[0][(i, j)] = v;
            couplings[0][(j, i)] = v.conj();
        }
    }
    SystemSpec::new(energies, couplings, beta, BathModel::glauber()).expect("random instance is valid")
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    cov / var
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
