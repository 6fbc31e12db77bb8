//! Input and target sampling primitives shared by the exploration
//! algorithms and the hill climber.

use rand::Rng;

use super::{FeatureTarget, TraceLibrary};
use crate::models::ModelSpec;
use crate::signal::InputSignal;

/// One uniform-random input from a bare seed (CLI convenience).
pub fn seeded_input(spec: &ModelSpec, seed: u64) -> InputSignal {
    use rand::SeedableRng;
    ur_next(spec, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
}

/// Uniform random input: every segment value i.i.d. uniform in bounds.
pub fn ur_next<R: Rng>(spec: &ModelSpec, rng: &mut R) -> InputSignal {
    let bounds = spec.input_bounds();
    let n = spec.segments() * spec.n_inputs();
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let (lo, hi) = bounds[i % spec.n_inputs()];
            rng.gen_range(lo..=hi)
        })
        .collect();
    spec.input(values).expect("uniform draw is in bounds")
}

/// Inverse-CDF Cauchy draw with scale `gamma` from `v` uniform on [0, 1):
/// `gamma * tan(pi * (v - 0.5))`.
pub fn cauchy_from_uniform(v: f64, gamma: f64) -> f64 {
    gamma * (std::f64::consts::PI * (v - 0.5)).tan()
}

/// Cauchy input disturbance: each segment value is modified independently
/// with probability `cr` by adding a Cauchy(0, gamma) draw, then clipped to
/// bounds.
pub fn perturb<R: Rng>(u: &InputSignal, gamma: &[f64], cr: f64, rng: &mut R) -> InputSignal {
    let dims = u.dims();
    let bounds = u.bounds().to_vec();
    let mut values = u.flat_values().to_vec();
    for (i, v) in values.iter_mut().enumerate() {
        let d = i % dims;
        if rng.gen::<f64>() < cr {
            let delta = cauchy_from_uniform(rng.gen::<f64>(), gamma[d]);
            let (lo, hi) = bounds[d];
            *v = (*v + delta).clamp(lo, hi);
        }
    }
    InputSignal::new(values, dims, u.segment_duration(), u.horizon(), bounds)
        .expect("clipped values are in bounds")
}

/// Draws a feature level in 1..=3 with the given probabilities.
pub fn sample_level<R: Rng>(probs: &[f64; 3], rng: &mut R) -> usize {
    let v: f64 = rng.gen();
    if v < probs[0] {
        1
    } else if v < probs[0] + probs[1] {
        2
    } else {
        3
    }
}

/// Generates a level-`k` feature target from the library's running bounds:
/// each point's time is uniform over the 0.1 grid and each value dimension
/// is uniform on `[LB - margin*(UB-LB), UB + margin*(UB-LB)]`.
pub fn gen_target<R: Rng>(
    lib: &TraceLibrary,
    k: usize,
    dims: &[usize],
    margin: f64,
    step: f64,
    rng: &mut R,
) -> FeatureTarget {
    assert!(!lib.is_empty(), "target generation needs a seeded library");
    let n = lib.samples();
    let points = (0..k)
        .map(|_| {
            let idx = rng.gen_range(0..n);
            let t = idx as f64 * step;
            let values = dims
                .iter()
                .map(|&d| {
                    let (lb, ub) = (lib.lb(idx, d), lib.ub(idx, d));
                    let delta = ub - lb;
                    let r: f64 = rng.gen();
                    (1.0 + 2.0 * margin) * delta * r + lb - margin * delta
                })
                .collect();
            (values, t)
        })
        .collect();
    FeatureTarget { dims: dims.to_vec(), points }
}

/// Feature metric: the squared differences between the signal and the
/// target points, each normalized by the observed output range at that time
/// instant (guarded at 1e-9 against degenerate ranges).
pub fn feature_distance(y: &crate::signal::Signal, target: &FeatureTarget, lib: &TraceLibrary) -> f64 {
    let step = y.step();
    let mut sum = 0.0;
    for (values, t) in &target.points {
        let idx = (t / step).round() as usize;
        let row = y.row(idx);
        for (j, &d) in target.dims.iter().enumerate() {
            let denom = (lib.ub(idx, d) - lib.lb(idx, d)).max(1e-9);
            let z = (row[d] - values[j]) / denom;
            sum += z * z;
        }
    }
    sum
}

/// Dyadic value lattice for nonuniform random sampling.
///
/// A combination assigns every input dimension a level and a grid fraction:
/// level 0 offers {0, 1}, level l >= 1 offers {(2j+1)/2^l}. A combination of
/// total level `L` (sum across dimensions) is drawn with probability
/// `c * 2^-L` over all combinations with `L <= max_level`. The drawn
/// fractions define a per-dimension constant input whose segment count is
/// `node_counts[L]`.
#[derive(Debug, Clone)]
pub struct NrLattice {
    /// `(fraction per dimension, total level)` per combination.
    combos: Vec<(Vec<f64>, usize)>,
    /// Cumulative unnormalized weights (2^-L), for binary-search draws.
    cumulative: Vec<f64>,
}

/// Fractions available at one level.
pub(crate) fn level_fractions(level: usize) -> Vec<f64> {
    if level == 0 {
        vec![0.0, 1.0]
    } else {
        (0..(1usize << (level - 1)))
            .map(|j| (2 * j + 1) as f64 / (1usize << level) as f64)
            .collect()
    }
}

impl NrLattice {
    pub fn new(n_dims: usize, max_level: usize) -> Self {
        let per_level: Vec<Vec<f64>> = (0..=max_level).map(level_fractions).collect();
        let mut combos = Vec::new();
        let mut stack: Vec<(usize, f64)> = Vec::with_capacity(n_dims);
        build(&mut combos, &mut stack, n_dims, max_level, &per_level, 0);
        let mut cumulative = Vec::with_capacity(combos.len());
        let mut acc = 0.0;
        for (_, level) in &combos {
            acc += 0.5f64.powi(*level as i32);
            cumulative.push(acc);
        }
        return Self { combos, cumulative };

        fn build(
            combos: &mut Vec<(Vec<f64>, usize)>,
            stack: &mut Vec<(usize, f64)>,
            n_dims: usize,
            budget: usize,
            per_level: &[Vec<f64>],
            total: usize,
        ) {
            if stack.len() == n_dims {
                combos.push((stack.iter().map(|&(_, f)| f).collect(), total));
                return;
            }
            for (level, fracs) in per_level.iter().enumerate() {
                if total + level > budget {
                    break;
                }
                for &f in fracs {
                    stack.push((level, f));
                    build(combos, stack, n_dims, budget, per_level, total + level);
                    stack.pop();
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.combos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combos.is_empty()
    }

    /// Draws a combination index proportionally to 2^-L.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap();
        let x = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.combos.len() - 1)
    }

    pub fn combo(&self, idx: usize) -> (&[f64], usize) {
        let (fracs, level) = &self.combos[idx];
        (fracs, *level)
    }

    /// Probability of one combination.
    pub fn probability(&self, idx: usize) -> f64 {
        0.5f64.powi(self.combos[idx].1 as i32) / self.cumulative.last().unwrap()
    }
}

/// Nonuniform random input: draws a lattice combination (see [`NrLattice`])
/// and materializes it as a piecewise-constant input with
/// `node_counts[total level]` equal segments. Returns the combination index
/// so callers can discard duplicates.
pub fn nr_next<R: Rng>(
    spec: &ModelSpec,
    lattice: &NrLattice,
    node_counts: &[usize],
    rng: &mut R,
) -> (InputSignal, usize) {
    let idx = lattice.draw(rng);
    let (fracs, level) = lattice.combo(idx);
    let count = node_counts[level];
    let bounds = spec.input_bounds();
    let mut values = Vec::with_capacity(count * spec.n_inputs());
    for _ in 0..count {
        for (d, &f) in fracs.iter().enumerate() {
            let (lo, hi) = bounds[d];
            values.push(lo + f * (hi - lo));
        }
    }
    let h = spec.horizon / count as f64;
    let u = InputSignal::new(values, spec.n_inputs(), h, spec.horizon, bounds)
        .expect("lattice values are in bounds");
    (u, idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::by_name;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ur_is_seed_deterministic_and_in_bounds() {
        let model = by_name("at").unwrap();
        let spec = model.spec();
        let a = ur_next(spec, &mut ChaCha8Rng::seed_from_u64(9));
        let b = ur_next(spec, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10_000 {
            let u = ur_next(spec, &mut rng);
            for s in 0..u.segments() {
                let row = u.segment(s);
                assert!(row[0] >= 0.0 && row[0] <= 100.0);
                assert!(row[1] >= 0.0 && row[1] <= 325.0);
            }
        }
    }

    #[test]
    fn ur_segment_means_near_midpoint() {
        let model = by_name("integrator").unwrap();
        let spec = model.spec();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let mut sums = vec![0.0; spec.segments()];
        for _ in 0..n {
            let u = ur_next(spec, &mut rng);
            for s in 0..u.segments() {
                sums[s] += u.segment(s)[0];
            }
        }
        // uniform on [-1,1]: mean 0, sigma of the mean = (2/sqrt(12))/sqrt(n)
        let tol = 3.0 * (2.0 / 12f64.sqrt()) / (n as f64).sqrt();
        for (s, sum) in sums.iter().enumerate() {
            let mean = sum / n as f64;
            assert!(mean.abs() < tol, "segment {s} mean {mean} beyond {tol}");
        }
    }

    #[test]
    fn cauchy_zero_at_half() {
        assert_eq!(cauchy_from_uniform(0.5, 3.0), 0.0);
    }

    #[test]
    fn cauchy_quartiles() {
        // |delta| > gamma iff v is outside [1/4, 3/4]: exactly probability 1/2
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 100_000;
        let gamma = 2.5;
        let beyond = (0..n)
            .filter(|_| cauchy_from_uniform(rng.gen::<f64>(), gamma).abs() > gamma)
            .count();
        let frac = beyond as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.01, "fraction {frac}");
    }

    #[test]
    fn perturb_with_negligible_crossover_is_identity() {
        let model = by_name("integrator").unwrap();
        let spec = model.spec();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = ur_next(spec, &mut rng);
        let gamma = vec![0.5];
        let v = perturb(&u, &gamma, 1e-300, &mut rng);
        assert_eq!(u, v);
    }

    #[test]
    fn perturb_respects_bounds() {
        let model = by_name("integrator").unwrap();
        let spec = model.spec();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut u = ur_next(spec, &mut rng);
        let gamma = vec![0.5];
        for _ in 0..2000 {
            u = perturb(&u, &gamma, 0.5, &mut rng);
            assert!(u.flat_values().iter().all(|&v| (-1.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn level_fraction_sets() {
        assert_eq!(level_fractions(1), vec![0.5]);
        assert_eq!(level_fractions(2), vec![0.25, 0.75]);
        assert_eq!(level_fractions(3), vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn nr_level_zero_twice_as_likely_per_level() {
        // a total-level-0 combination carries 2^L times the probability of
        // any total-level-L combination
        let lattice = NrLattice::new(1, 10);
        let p0 = lattice.probability(0);
        for idx in 0..lattice.len() {
            let (_, level) = lattice.combo(idx);
            let ratio = p0 / lattice.probability(idx);
            assert!((ratio - (1u64 << level) as f64).abs() < 1e-9, "level {level} ratio {ratio}");
        }
    }

    #[test]
    fn nr_draw_frequencies_match_weights() {
        let lattice = NrLattice::new(1, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let n = 100_000;
        let mut counts = vec![0usize; lattice.len()];
        for _ in 0..n {
            counts[lattice.draw(&mut rng)] += 1;
        }
        for idx in 0..lattice.len() {
            let p = lattice.probability(idx);
            let got = counts[idx] as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((got - p).abs() < 4.0 * sigma + 1e-4, "combo {idx}: got {got}, want {p}");
        }
    }

    #[test]
    fn nr_inputs_respect_bounds_and_counts() {
        let model = by_name("cc").unwrap();
        let spec = model.spec();
        let lattice = NrLattice::new(spec.n_inputs(), spec.nr_node_counts.len() - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..500 {
            let (u, idx) = nr_next(spec, &lattice, &spec.nr_node_counts, &mut rng);
            let (_, level) = lattice.combo(idx);
            assert_eq!(u.segments(), spec.nr_node_counts[level]);
            for &v in u.flat_values() {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn target_values_inside_margin_range() {
        let model = by_name("integrator").unwrap();
        let spec = model.spec().clone();
        let mut lib = TraceLibrary::new();
        let m = by_name("integrator").unwrap();
        for v in [-1.0, 0.0, 1.0] {
            let u = spec.input(vec![v; spec.segments()]).unwrap();
            let y = m.simulate(&u).unwrap().output;
            lib.insert(u, y);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100_000 {
            let t = gen_target(&lib, 1, &[0], 0.2, crate::GRID_STEP, &mut rng);
            let (values, time) = &t.points[0];
            let idx = (time / crate::GRID_STEP).round() as usize;
            let (lb, ub) = (lib.lb(idx, 0), lib.ub(idx, 0));
            let delta = ub - lb;
            assert!(values[0] >= lb - 0.2 * delta - 1e-12);
            assert!(values[0] <= ub + 0.2 * delta + 1e-12);
        }
    }

    #[test]
    fn target_degenerate_range_collapses_to_bound() {
        let model = by_name("integrator").unwrap();
        let spec = model.spec().clone();
        let mut lib = TraceLibrary::new();
        let u = spec.input(vec![0.25; spec.segments()]).unwrap();
        let y = model.simulate(&u).unwrap().output;
        lib.insert(u, y.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..100 {
            let t = gen_target(&lib, 1, &[0], 0.2, crate::GRID_STEP, &mut rng);
            let (values, time) = &t.points[0];
            let idx = (time / crate::GRID_STEP).round() as usize;
            assert_eq!(values[0], y.value(idx, 0));
        }
    }

    #[test]
    fn feature_distance_examples() {
        // one point, one dimension: ((5-7)/4)^2 = 0.25
        let model = by_name("integrator").unwrap();
        let spec = model.spec().clone();
        let mut lib = TraceLibrary::new();
        for v in [-1.0, 1.0] {
            let u = spec.input(vec![v; spec.segments()]).unwrap();
            lib.insert(u.clone(), model.simulate(&u).unwrap().output);
        }
        // at t=2 the stored outputs are -2 and 2, so UB-LB = 4 there
        let t = 2.0;
        let y = model.simulate(&spec.input(vec![1.0; spec.segments()]).unwrap()).unwrap().output;
        // y(2) = 2 for the constant-1 input; target 4 gives ((2-4)/4)^2
        let target = FeatureTarget { dims: vec![0], points: vec![(vec![4.0], t)] };
        let d = feature_distance(&y, &target, &lib);
        assert!((d - 0.25).abs() < 1e-12, "d = {d}");

        // zero distance at the signal's own values
        let own = FeatureTarget { dims: vec![0], points: vec![(vec![y.value(20, 0)], t)] };
        assert_eq!(feature_distance(&y, &own, &lib), 0.0);

        // level-2 distance is the sum of the matching level-1 distances
        let p1 = (vec![4.0], 2.0);
        let p2 = (vec![-1.0], 10.0);
        let t2 = FeatureTarget { dims: vec![0], points: vec![p1.clone(), p2.clone()] };
        let d1 = feature_distance(&y, &FeatureTarget { dims: vec![0], points: vec![p1] }, &lib);
        let d2 = feature_distance(&y, &FeatureTarget { dims: vec![0], points: vec![p2] }, &lib);
        let d12 = feature_distance(&y, &t2, &lib);
        assert!((d12 - (d1 + d2)).abs() < 1e-12);
    }

    #[test]
    fn level_frequencies_match_probabilities() {
        let probs = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let n = 10_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[sample_level(&probs, &mut rng) - 1] += 1;
        }
        for k in 0..3 {
            let got = counts[k] as f64 / n as f64;
            let sigma = (probs[k] * (1.0 - probs[k]) / n as f64).sqrt();
            assert!((got - probs[k]).abs() < 3.0 * sigma, "level {}: {got} vs {}", k + 1, probs[k]);
        }
    }
}
