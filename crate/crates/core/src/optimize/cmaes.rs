//! Covariance matrix adaptation evolution strategy, (mu/mu_w, lambda) with
//! cumulative step-size control, rank-one and rank-mu covariance updates,
//! and automatic restarts from fresh uniform means.
//!
//! The search space is normalized to the unit cube; samples are clipped to
//! it before evaluation and the clipped points feed the updates.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Objective, OptResult, Tracker};
use crate::models::ModelError;

const INITIAL_SIGMA: f64 = 0.3;
const SIGMA_FLOOR: f64 = 1e-11;
const SIGMA_CEIL: f64 = 1e8;
const FLAT_TOL: f64 = 1e-12;

struct Weights {
    lambda: usize,
    mu: usize,
    w: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
    chi_n: f64,
}

impl Weights {
    fn standard(n: usize) -> Self {
        let nf = n as f64;
        let lambda = 4 + (3.0 * nf.ln()).floor() as usize;
        let mu = lambda / 2;
        let raw: Vec<f64> = (1..=mu).map(|i| ((mu as f64) + 0.5).ln() - (i as f64).ln()).collect();
        let sum: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / sum).collect();
        let mu_eff = 1.0 / w.iter().map(|v| v * v).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let c_1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1)
            .min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Self { lambda, mu, w, mu_eff, c_sigma, d_sigma, c_c, c_1, c_mu, chi_n }
    }
}

struct State {
    mean: DVector<f64>,
    sigma: f64,
    cov: DMatrix<f64>,
    p_sigma: DVector<f64>,
    p_c: DVector<f64>,
    eig_vectors: DMatrix<f64>,
    eig_values: DVector<f64>,
    generation: u64,
}

impl State {
    fn fresh<R: Rng>(n: usize, rng: &mut R) -> Self {
        let mean = DVector::from_fn(n, |_, _| rng.gen::<f64>());
        Self {
            mean,
            sigma: INITIAL_SIGMA,
            cov: DMatrix::identity(n, n),
            p_sigma: DVector::zeros(n),
            p_c: DVector::zeros(n),
            eig_vectors: DMatrix::identity(n, n),
            eig_values: DVector::from_element(n, 1.0),
            generation: 0,
        }
    }

    fn decompose(&mut self) -> bool {
        let n = self.cov.nrows();
        // keep the matrix symmetric against rounding drift
        let sym = (&self.cov + self.cov.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::new(sym.clone());
        self.cov = sym;
        self.eig_vectors = eig.eigenvectors;
        self.eig_values = eig.eigenvalues.map(|v| v.max(1e-30));
        (0..n).all(|i| self.eig_values[i].is_finite())
    }
}

/// CMA-ES run: `lambda = 4 + floor(3 ln n)` samples per generation, initial
/// step 0.3 in unit-cube units, restarts on flat fitness or degenerate step
/// size until the budget is spent. Stops early on the first negative value.
pub fn cmaes_run(obj: &mut dyn Objective, budget: u64, seed: u64) -> Result<OptResult, ModelError> {
    let n = obj.dims();
    assert!(n >= 1 && budget >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = obj.bounds().to_vec();
    let wts = Weights::standard(n);
    let mut tracker = Tracker::new(budget);
    let mut restarts = 0u64;

    let denorm = |z: &DVector<f64>| -> Vec<f64> {
        z.iter()
            .zip(&bounds)
            .map(|(v, (lo, hi))| lo + v.clamp(0.0, 1.0) * (hi - lo))
            .collect()
    };

    'restart: loop {
        let mut st = State::fresh(n, &mut rng);
        restarts += 1;
        if !st.decompose() {
            continue;
        }
        loop {
            st.generation += 1;
            // sample lambda candidates x = m + sigma * B D z
            let mut xs: Vec<DVector<f64>> = Vec::with_capacity(wts.lambda);
            let mut fit: Vec<f64> = Vec::with_capacity(wts.lambda);
            for _ in 0..wts.lambda {
                let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let y = &st.eig_vectors * DVector::from_fn(n, |i, _| st.eig_values[i].sqrt() * z[i]);
                let mut x = &st.mean + st.sigma * y;
                for v in x.iter_mut() {
                    *v = v.clamp(0.0, 1.0);
                }
                let value = obj.eval(&denorm(&x))?;
                let stop = tracker.record(&denorm(&x), value);
                xs.push(x);
                fit.push(value);
                if stop {
                    return Ok(tracker.finish_with_restarts(restarts - 1));
                }
            }
            // rank by fitness (stable: equal values keep sampling order)
            let mut order: Vec<usize> = (0..wts.lambda).collect();
            order.sort_by(|&a, &b| fit[a].partial_cmp(&fit[b]).unwrap().then(a.cmp(&b)));

            let old_mean = st.mean.clone();
            let mut new_mean = DVector::zeros(n);
            for (i, &idx) in order.iter().take(wts.mu).enumerate() {
                new_mean += wts.w[i] * &xs[idx];
            }
            let mean_shift = (&new_mean - &old_mean) / st.sigma;

            // C^(-1/2) * shift through the eigen decomposition
            let bt_shift = st.eig_vectors.transpose() * &mean_shift;
            let c_inv_sqrt_shift = &st.eig_vectors
                * DVector::from_fn(n, |i, _| bt_shift[i] / st.eig_values[i].sqrt());

            st.p_sigma = (1.0 - wts.c_sigma) * &st.p_sigma
                + (wts.c_sigma * (2.0 - wts.c_sigma) * wts.mu_eff).sqrt() * c_inv_sqrt_shift;
            let expected_decay =
                (1.0 - (1.0 - wts.c_sigma).powi(2 * st.generation as i32)).sqrt();
            let h_sigma = if st.p_sigma.norm() / expected_decay
                < (1.4 + 2.0 / (n as f64 + 1.0)) * wts.chi_n
            {
                1.0
            } else {
                0.0
            };
            st.p_c = (1.0 - wts.c_c) * &st.p_c
                + h_sigma * (wts.c_c * (2.0 - wts.c_c) * wts.mu_eff).sqrt() * &mean_shift;

            let mut rank_mu = DMatrix::zeros(n, n);
            for (i, &idx) in order.iter().take(wts.mu).enumerate() {
                let yi = (&xs[idx] - &old_mean) / st.sigma;
                rank_mu += wts.w[i] * (&yi * yi.transpose());
            }
            let delta_h = (1.0 - h_sigma) * wts.c_c * (2.0 - wts.c_c);
            st.cov = (1.0 - wts.c_1 - wts.c_mu) * &st.cov
                + wts.c_1 * (&st.p_c * st.p_c.transpose() + delta_h * &st.cov)
                + wts.c_mu * rank_mu;

            st.sigma *= ((wts.c_sigma / wts.d_sigma)
                * (st.p_sigma.norm() / wts.chi_n - 1.0))
                .exp();
            st.mean = new_mean;

            let healthy = st.decompose() && st.sigma.is_finite();
            let max_std = st.sigma * st.eig_values.max().sqrt();
            let flat = fit
                .iter()
                .all(|v| (v - fit[0]).abs() <= FLAT_TOL * (1.0 + fit[0].abs()));
            if !healthy || flat || max_std < SIGMA_FLOOR || max_std > SIGMA_CEIL {
                if tracker.exhausted() {
                    return Ok(tracker.finish_with_restarts(restarts - 1));
                }
                continue 'restart;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::by_name;
    use crate::optimize::testutil::FnObjective;
    use crate::optimize::RobustnessObjective;
    use crate::stl::parse;

    #[test]
    fn one_dim_quadratic_converges() {
        let mut obj = FnObjective {
            f: |x: &[f64]| (x[0] - 1.7) * (x[0] - 1.7),
            bounds: vec![(-5.0, 5.0)],
        };
        let res = cmaes_run(&mut obj, 500, 2).unwrap();
        assert!(
            (res.best_x[0] - 1.7).abs() < 1e-3,
            "best {} after {} evals",
            res.best_x[0],
            res.evaluations
        );
    }

    #[test]
    fn flat_objective_triggers_restart_before_budget() {
        let mut obj = FnObjective { f: |_: &[f64]| 7.0, bounds: vec![(-1.0, 1.0); 4] };
        let res = cmaes_run(&mut obj, 400, 3).unwrap();
        assert_eq!(res.evaluations, 400);
        assert!(!res.falsified);
        assert!(res.restarts >= 1, "flat fitness must trigger a restart");
    }

    #[test]
    fn sphere_multidim() {
        let mut obj = FnObjective {
            f: |x: &[f64]| x.iter().map(|v| v * v).sum(),
            bounds: vec![(-3.0, 3.0); 6],
        };
        let res = cmaes_run(&mut obj, 2000, 4).unwrap();
        assert!(res.best_value < 1e-4, "best {}", res.best_value);
    }

    #[test]
    fn band_hold_specs_mostly_fall() {
        // the two-phase band specs need reach-then-hold outputs
        let model = by_name("integrator").unwrap();
        let texts = [
            "(eventually[0,10] (abs(y) > 8) and eventually[20,30] (abs(y) > 8)) => (always[10,20] (abs(y) < 4))",
            "(always[10,20] (y > 6) and always[10,20] (y < 9)) => (always[20,30] (y < 14))",
            "(eventually[0,10] (y > 6)) => (eventually[25,30] (abs(y-5) > 1.3))",
            "(eventually[0,10] (y < -6)) => (eventually[25,30] (abs(y+5) > 1.3))",
        ];
        let mut successes = 0;
        for text in texts {
            let formula = parse(text).unwrap();
            for seed in 0..10 {
                let mut obj = RobustnessObjective::new(model.as_ref(), &formula);
                if cmaes_run(&mut obj, 2500, seed).unwrap().falsified {
                    successes += 1;
                }
            }
        }
        assert!(successes >= 37, "only {successes}/40 falsifications");
    }
}
