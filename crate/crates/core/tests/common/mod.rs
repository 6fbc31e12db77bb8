//! Shared test oracles: a naive recursive robustness evaluator and a
//! brute-force boolean evaluator, both independent of the library's
//! sliding-window implementation, plus random formula/signal generators.

use rand::Rng;

use vf_core::signal::Signal;
use vf_core::stl::{AffineAtom, Cmp, Formula, Interval, EQ_MARGIN};
use vf_core::{GRID_EPS, GRID_STEP};

/// Naive robustness: direct recursion over the semantics with plain
/// per-window scans (no deques, no window reuse).
pub fn naive_robustness(f: &Formula, y: &Signal) -> f64 {
    naive_eval(f, y)[0]
}

pub fn naive_eval(f: &Formula, y: &Signal) -> Vec<f64> {
    let n = y.len();
    match f {
        Formula::Atom(a) => (0..n).map(|i| atom_rho(a, y, i)).collect(),
        Formula::Not(c) => naive_eval(c, y).into_iter().map(|v| -v).collect(),
        Formula::And(l, r) => {
            let (a, b) = (naive_eval(l, y), naive_eval(r, y));
            a.into_iter().zip(b).map(|(x, z)| if x < z { x } else { z }).collect()
        }
        Formula::Or(l, r) => {
            let (a, b) = (naive_eval(l, y), naive_eval(r, y));
            a.into_iter().zip(b).map(|(x, z)| if x > z { x } else { z }).collect()
        }
        Formula::Always(iv, c) => {
            let child = naive_eval(c, y);
            (0..n)
                .map(|i| {
                    let (lo, hi) = window(iv, i, n);
                    child[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min)
                })
                .collect()
        }
        Formula::Eventually(iv, c) => {
            let child = naive_eval(c, y);
            (0..n)
                .map(|i| {
                    let (lo, hi) = window(iv, i, n);
                    child[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        }
    }
}

/// Boolean satisfaction at time 0 under the same grid semantics; equality
/// atoms are true within the +-0.5 margin, consistent with their
/// quantitative reading.
pub fn bool_sat(f: &Formula, y: &Signal) -> bool {
    bool_eval(f, y)[0]
}

fn bool_eval(f: &Formula, y: &Signal) -> Vec<bool> {
    let n = y.len();
    match f {
        Formula::Atom(a) => (0..n).map(|i| atom_truth(a, y, i)).collect(),
        Formula::Not(c) => bool_eval(c, y).into_iter().map(|v| !v).collect(),
        Formula::And(l, r) => {
            let (a, b) = (bool_eval(l, y), bool_eval(r, y));
            a.into_iter().zip(b).map(|(x, z)| x && z).collect()
        }
        Formula::Or(l, r) => {
            let (a, b) = (bool_eval(l, y), bool_eval(r, y));
            a.into_iter().zip(b).map(|(x, z)| x || z).collect()
        }
        Formula::Always(iv, c) => {
            let child = bool_eval(c, y);
            (0..n)
                .map(|i| {
                    let (lo, hi) = window(iv, i, n);
                    child[lo..=hi].iter().all(|&v| v)
                })
                .collect()
        }
        Formula::Eventually(iv, c) => {
            let child = bool_eval(c, y);
            (0..n)
                .map(|i| {
                    let (lo, hi) = window(iv, i, n);
                    child[lo..=hi].iter().any(|&v| v)
                })
                .collect()
        }
    }
}

fn window(iv: &Interval, i: usize, n: usize) -> (usize, usize) {
    let lo = (iv.start / GRID_STEP + GRID_EPS).floor() as usize;
    let hi = (iv.end / GRID_STEP - GRID_EPS).ceil().max(0.0) as usize;
    let hi = hi.max(lo);
    ((i + lo).min(n - 1), (i + hi).min(n - 1))
}

fn affine(a: &AffineAtom, y: &Signal, i: usize) -> f64 {
    let mut e = a.offset;
    for (c, name) in &a.terms {
        e += c * y.value(i, y.dim_index(name).expect("dim"));
    }
    if a.abs {
        e.abs()
    } else {
        e
    }
}

fn atom_rho(a: &AffineAtom, y: &Signal, i: usize) -> f64 {
    let e = affine(a, y, i);
    match a.cmp {
        Cmp::Lt => a.constant - e,
        Cmp::Gt => e - a.constant,
        Cmp::Eq => EQ_MARGIN - (e - a.constant).abs(),
        Cmp::Ne => (e - a.constant).abs() - EQ_MARGIN,
    }
}

fn atom_truth(a: &AffineAtom, y: &Signal, i: usize) -> bool {
    let e = affine(a, y, i);
    match a.cmp {
        Cmp::Lt => e < a.constant,
        Cmp::Gt => e > a.constant,
        Cmp::Eq => (e - a.constant).abs() < EQ_MARGIN,
        Cmp::Ne => (e - a.constant).abs() > EQ_MARGIN,
    }
}

/// Random formula of at most `depth` operator levels over the given
/// dimension names; interval endpoints are multiples of 0.01.
pub fn random_formula<R: Rng>(rng: &mut R, dims: &[&str], depth: usize, max_interval: f64) -> Formula {
    if depth == 0 || rng.gen::<f64>() < 0.25 {
        return Formula::Atom(random_atom(rng, dims));
    }
    match rng.gen_range(0..5) {
        0 => Formula::Not(Box::new(random_formula(rng, dims, depth - 1, max_interval))),
        1 => Formula::And(
            Box::new(random_formula(rng, dims, depth - 1, max_interval)),
            Box::new(random_formula(rng, dims, depth - 1, max_interval)),
        ),
        2 => Formula::Or(
            Box::new(random_formula(rng, dims, depth - 1, max_interval)),
            Box::new(random_formula(rng, dims, depth - 1, max_interval)),
        ),
        3 => Formula::Always(
            random_interval(rng, max_interval),
            Box::new(random_formula(rng, dims, depth - 1, max_interval)),
        ),
        _ => Formula::Eventually(
            random_interval(rng, max_interval),
            Box::new(random_formula(rng, dims, depth - 1, max_interval)),
        ),
    }
}

fn random_interval<R: Rng>(rng: &mut R, max: f64) -> Interval {
    let ticks = (max / 0.01).round() as i64;
    let a = rng.gen_range(0..=ticks) as f64 * 0.01;
    let b = rng.gen_range((a / 0.01).round() as i64..=ticks) as f64 * 0.01;
    Interval { start: a, end: b }
}

fn random_atom<R: Rng>(rng: &mut R, dims: &[&str]) -> AffineAtom {
    let n_terms = rng.gen_range(1..=2.min(dims.len()));
    let mut picked: Vec<usize> = Vec::new();
    while picked.len() < n_terms {
        let d = rng.gen_range(0..dims.len());
        if !picked.contains(&d) {
            picked.push(d);
        }
    }
    AffineAtom {
        terms: picked
            .into_iter()
            .map(|d| (rng.gen_range(-2.0..2.0), dims[d].to_string()))
            .collect(),
        offset: rng.gen_range(-3.0..3.0),
        abs: rng.gen_bool(0.3),
        cmp: match rng.gen_range(0..4) {
            0 => Cmp::Lt,
            1 => Cmp::Gt,
            2 => Cmp::Eq,
            _ => Cmp::Ne,
        },
        constant: rng.gen_range(-5.0..5.0),
    }
}

/// Random walk signal with `samples` grid points.
pub fn random_signal<R: Rng>(rng: &mut R, dims: &[&str], samples: usize) -> Signal {
    let mut rows = Vec::with_capacity(samples);
    let mut state: Vec<f64> = (0..dims.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
    for _ in 0..samples {
        rows.push(state.clone());
        for v in &mut state {
            *v += rng.gen_range(-0.8..0.8);
        }
    }
    Signal::new(GRID_STEP, dims.iter().map(|s| s.to_string()).collect(), rows).unwrap()
}
