//! Discrete-time quantitative robustness on the fixed evaluation grid.
//!
//! Semantics at grid index `i` (time `i * step`):
//!
//! * atom `e < c`  -> `c - e(t)`;  `e > c` -> `e(t) - c`; abs atoms apply
//!   `|.|` to `e(t)` first; `e == c` -> `0.5 - |e - c|`; `e != c` ->
//!   `|e - c| - 0.5`;
//! * `not` -> negation, `and` -> min, `or` -> max (pointwise);
//! * `always[a,b]` -> min and `eventually[a,b]` -> max over grid points in
//!   `[t+a, t+b]`, with endpoints snapped outward to the grid (floor the
//!   start, ceil the end) and the window clamped to `[0, T]`.
//!
//! `robustness` returns the value at time 0.

use thiserror::Error;

use super::{Formula, Interval};
use crate::signal::Signal;
use crate::GRID_EPS;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("formula references unknown signal dimension `{0}`")]
    UnknownDimension(String),
}

/// Robustness of `f` on `y` evaluated at time 0.
pub fn robustness(f: &Formula, y: &Signal) -> Result<f64, EvalError> {
    Ok(robustness_signal(f, y)?[0])
}

/// Robustness of `f` at every grid point of `y`.
pub fn robustness_signal(f: &Formula, y: &Signal) -> Result<Vec<f64>, EvalError> {
    // resolve all names up front so evaluation itself is infallible
    for name in f.dim_names() {
        if y.dim_index(name).is_none() {
            return Err(EvalError::UnknownDimension(name.to_string()));
        }
    }
    Ok(eval(f, y))
}

fn eval(f: &Formula, y: &Signal) -> Vec<f64> {
    let n = y.len();
    match f {
        Formula::Atom(a) => {
            let dim_idx: Vec<usize> =
                a.terms.iter().map(|(_, name)| y.dim_index(name).unwrap()).collect();
            (0..n).map(|i| a.rho(a.expr(y.row(i), &dim_idx))).collect()
        }
        Formula::Not(c) => {
            let mut v = eval(c, y);
            for x in &mut v {
                *x = -*x;
            }
            v
        }
        Formula::And(a, b) => {
            let mut va = eval(a, y);
            let vb = eval(b, y);
            for (x, &z) in va.iter_mut().zip(&vb) {
                *x = x.min(z);
            }
            va
        }
        Formula::Or(a, b) => {
            let mut va = eval(a, y);
            let vb = eval(b, y);
            for (x, &z) in va.iter_mut().zip(&vb) {
                *x = x.max(z);
            }
            va
        }
        Formula::Always(iv, c) => {
            let v = eval(c, y);
            let (lo, hi) = window_offsets(iv, y.step());
            sliding_extremum(&v, lo, hi, true)
        }
        Formula::Eventually(iv, c) => {
            let v = eval(c, y);
            let (lo, hi) = window_offsets(iv, y.step());
            sliding_extremum(&v, lo, hi, false)
        }
    }
}

/// Grid-index offsets of the window `[t+a, t+b]` relative to index `i`:
/// start floors, end ceils (snap outward), both with a small tolerance so
/// endpoints within 1e-9 of a grid point land exactly on it.
pub(crate) fn window_offsets(iv: &Interval, step: f64) -> (usize, usize) {
    let lo = (iv.start / step + GRID_EPS).floor().max(0.0) as usize;
    let hi = (iv.end / step - GRID_EPS).ceil().max(0.0) as usize;
    (lo, hi.max(lo))
}

/// `out[i] = extremum(v[j] : j in [min(i+lo, n-1), min(i+hi, n-1)])` via a
/// monotonic deque; O(n) overall.
pub(crate) fn sliding_extremum(v: &[f64], lo: usize, hi: usize, is_min: bool) -> Vec<f64> {
    let n = v.len();
    let mut out = Vec::with_capacity(n);
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let better = |a: f64, b: f64| if is_min { a <= b } else { a >= b };
    let mut pushed = 0usize; // next index to append
    for i in 0..n {
        let left = (i + lo).min(n - 1);
        let right = (i + hi).min(n - 1);
        while pushed <= right {
            while let Some(&back) = deque.back() {
                if better(v[pushed], v[back]) {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(pushed);
            pushed += 1;
        }
        while let Some(&front) = deque.front() {
            if front < left {
                deque.pop_front();
            } else {
                break;
            }
        }
        out.push(v[*deque.front().expect("window never empty")]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Signal;
    use crate::stl::parse;
    use crate::GRID_STEP;

    fn constant_signal(names: &[&str], row: &[f64], horizon: f64) -> Signal {
        let n = (horizon / GRID_STEP).round() as usize + 1;
        let rows = vec![row.to_vec(); n];
        Signal::new(GRID_STEP, names.iter().map(|s| s.to_string()).collect(), rows).unwrap()
    }

    #[test]
    fn constant_signal_always() {
        let y = constant_signal(&["y"], &[0.0], 30.0);
        let f = parse("always[0,30] (y < 25)").unwrap();
        assert_eq!(robustness(&f, &y).unwrap(), 25.0);
    }

    #[test]
    fn abs_atom_eventually() {
        let y = constant_signal(&["y"], &[0.0], 30.0);
        let f = parse("eventually[0,30] (abs(y) > -1.3)").unwrap();
        assert_eq!(robustness(&f, &y).unwrap(), 1.3);
    }

    #[test]
    fn equality_margin() {
        let y = constant_signal(&["gear"], &[4.0], 30.0);
        let f = parse("always[0,30] (gear == 4)").unwrap();
        assert_eq!(robustness(&f, &y).unwrap(), 0.5);
    }

    #[test]
    fn negation_duality_exact() {
        let y = ramp();
        for text in ["always[0,10] (y < 3)", "eventually[2,8] (abs(y-1) > 0.5)", "y != 2"] {
            let f = parse(text).unwrap();
            let neg = parse(&format!("not ({text})")).unwrap();
            let r = robustness_signal(&f, &y).unwrap();
            let rn = robustness_signal(&neg, &y).unwrap();
            for (a, b) in r.iter().zip(&rn) {
                assert_eq!(*a, -*b);
            }
        }
    }

    #[test]
    fn de_morgan_exact() {
        let y = ramp();
        let lhs = parse("not (y < 3 and abs(y-2) > 1)").unwrap();
        let rhs = parse("not y < 3 or not abs(y-2) > 1").unwrap();
        assert_eq!(robustness_signal(&lhs, &y).unwrap(), robustness_signal(&rhs, &y).unwrap());
    }

    #[test]
    fn monotone_shift_of_lt_atom() {
        let y = ramp();
        let base = robustness_signal(&parse("y < 3").unwrap(), &y).unwrap();
        let shifted = robustness_signal(&parse("y < 5.5").unwrap(), &y).unwrap();
        for (b, s) in base.iter().zip(&shifted) {
            assert_eq!(s - b, 2.5);
        }
    }

    #[test]
    fn eq_ne_duality() {
        let y = ramp();
        let eq = robustness_signal(&parse("y == 2").unwrap(), &y).unwrap();
        let ne = robustness_signal(&parse("y != 2").unwrap(), &y).unwrap();
        for (a, b) in eq.iter().zip(&ne) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn window_snaps_outward() {
        // values 0, 1, 2, ... on the 0.1 grid; eventually[0.01,0.1] at i
        // covers indices [i, i+1] after outward snapping
        let y = ramp();
        let f = parse("eventually[0.01,0.1] (y > 0)").unwrap();
        let r = robustness_signal(&f, &y).unwrap();
        for i in 0..y.len() - 1 {
            assert_eq!(r[i], y.value(i + 1, 0));
        }
        assert_eq!(r[y.len() - 1], y.value(y.len() - 1, 0));
    }

    #[test]
    fn window_clamps_at_horizon() {
        let y = ramp(); // y(t) = 10t on [0,10]
        let f = parse("always[0,30] (y < 25)").unwrap();
        // horizon exceeds the signal; window clamps to the last sample
        let r = robustness(&f, &y).unwrap();
        let max_y = y.value(y.len() - 1, 0);
        assert_eq!(r, 25.0 - max_y);
    }

    #[test]
    fn unknown_dimension_is_an_error() {
        let y = ramp();
        let f = parse("speed < 1").unwrap();
        assert_eq!(robustness(&f, &y), Err(EvalError::UnknownDimension("speed".into())));
    }

    #[test]
    fn sliding_extremum_matches_naive_scan() {
        let v: Vec<f64> = (0..97).map(|i| ((i * 37) % 23) as f64 - 11.0).collect();
        for (lo, hi) in [(0usize, 0usize), (0, 5), (3, 10), (20, 96), (90, 120)] {
            for is_min in [true, false] {
                let fast = sliding_extremum(&v, lo, hi, is_min);
                for i in 0..v.len() {
                    let l = (i + lo).min(v.len() - 1);
                    let r = (i + hi).min(v.len() - 1);
                    let naive = v[l..=r]
                        .iter()
                        .copied()
                        .fold(if is_min { f64::INFINITY } else { f64::NEG_INFINITY }, |a, b| {
                            if is_min {
                                a.min(b)
                            } else {
                                a.max(b)
                            }
                        });
                    assert_eq!(fast[i], naive, "lo={lo} hi={hi} i={i} is_min={is_min}");
                }
            }
        }
    }

    fn ramp() -> Signal {
        let rows: Vec<Vec<f64>> = (0..101).map(|i| vec![i as f64 * 0.1 * 10.0]).collect();
        Signal::new(GRID_STEP, vec!["y".into()], rows).unwrap()
    }
}
