//! Linear constant-velocity Kalman filtering and Rauch-Tung-Striebel
//! smoothing, parameterized by the number of tracked position axes.
//!
//! The same machinery runs at two scales: 34 position axes for pixel-space
//! pose smoothing (17 keypoints x 2 coordinates) and 2 axes for world-space
//! person tracking. The state vector stacks positions then velocities, so a
//! model with `dim` axes carries a `2 * dim` state.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    /// An innovation or predicted covariance could not be inverted. With
    /// positive noise parameters this signals internal corruption, not a
    /// recoverable data condition.
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(&'static str),
}

/// Constant-velocity process with white-noise acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCVModel {
    /// Number of position axes; the state dimension is `2 * dim`.
    pub dim: usize,
    /// Time step in seconds.
    pub dt: f64,
    /// White-noise acceleration intensity, units/s^2.
    pub process_accel_sigma: f64,
    /// Measurement noise per axis, units.
    pub measurement_sigma: f64,
}

impl LinearCVModel {
    pub fn new(dim: usize, dt: f64, process_accel_sigma: f64, measurement_sigma: f64) -> Self {
        assert!(dim >= 1 && dt > 0.0 && process_accel_sigma > 0.0 && measurement_sigma > 0.0);
        Self {
            dim,
            dt,
            process_accel_sigma,
            measurement_sigma,
        }
    }

    /// State transition `[[I, dt I], [0, I]]`.
    pub fn transition(&self) -> DMatrix<f64> {
        let d = self.dim;
        let mut f = DMatrix::identity(2 * d, 2 * d);
        for i in 0..d {
            f[(i, d + i)] = self.dt;
        }
        f
    }

    /// Discrete white-noise-acceleration process covariance.
    pub fn process_noise(&self) -> DMatrix<f64> {
        let d = self.dim;
        let dt = self.dt;
        let s2 = self.process_accel_sigma * self.process_accel_sigma;
        let (q_pp, q_pv, q_vv) = (
            s2 * dt.powi(4) / 4.0,
            s2 * dt.powi(3) / 2.0,
            s2 * dt * dt,
        );
        let mut q = DMatrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            q[(i, i)] = q_pp;
            q[(i, d + i)] = q_pv;
            q[(d + i, i)] = q_pv;
            q[(d + i, d + i)] = q_vv;
        }
        q
    }
}

/// Gaussian belief over a constant-velocity state.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    /// Positions then velocities, length `2 * dim`.
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl BeliefState {
    /// Belief for a newly observed target: position from the measurement,
    /// zero velocity, diagonal covariance from the given variances.
    pub fn from_first_measurement(z: &[f64], pos_var: f64, vel_var: f64) -> Self {
        let d = z.len();
        let mut mean = DVector::zeros(2 * d);
        for (i, &zi) in z.iter().enumerate() {
            mean[i] = zi;
        }
        let mut cov = DMatrix::zeros(2 * d, 2 * d);
        for i in 0..d {
            cov[(i, i)] = pos_var;
            cov[(d + i, d + i)] = vel_var;
        }
        Self { mean, cov }
    }

    pub fn position(&self, axis: usize) -> f64 {
        self.mean[axis]
    }

    pub fn velocity(&self, axis: usize) -> f64 {
        self.mean[self.mean.len() / 2 + axis]
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Time update: advances the belief one step under the CV model.
pub fn predict(model: &LinearCVModel, b: &BeliefState) -> BeliefState {
    let f = model.transition();
    let mean = &f * &b.mean;
    let mut cov = &f * &b.cov * f.transpose() + model.process_noise();
    symmetrize(&mut cov);
    BeliefState { mean, cov }
}

/// Measurement update with `H = [I, 0]` and `R = measurement_sigma^2 I`.
///
/// Uses the Joseph-form covariance update to keep the posterior symmetric
/// positive-semidefinite.
pub fn update(
    model: &LinearCVModel,
    b: &BeliefState,
    z: &[f64],
) -> Result<BeliefState, FilterError> {
    let d = model.dim;
    assert_eq!(z.len(), d, "measurement dimension mismatch");
    let r_var = model.measurement_sigma * model.measurement_sigma;

    // S = P_pp + R
    let mut s = b.cov.view((0, 0), (d, d)).clone_owned();
    for i in 0..d {
        s[(i, i)] += r_var;
    }
    let chol = s
        .cholesky()
        .ok_or(FilterError::NumericalBreakdown("innovation covariance"))?;

    // K = P H^T S^-1, where P H^T is the left 2d x d block of P
    let p_ht = b.cov.view((0, 0), (2 * d, d)).clone_owned();
    let k = chol.solve(&p_ht.transpose()).transpose();

    let mut innovation = DVector::zeros(d);
    for i in 0..d {
        innovation[i] = z[i] - b.mean[i];
    }
    let mean = &b.mean + &k * innovation;

    // Joseph form: (I - K H) P (I - K H)^T + K R K^T
    let mut i_kh = DMatrix::identity(2 * d, 2 * d);
    for row in 0..2 * d {
        for col in 0..d {
            i_kh[(row, col)] -= k[(row, col)];
        }
    }
    let mut cov = &i_kh * &b.cov * i_kh.transpose() + &k * (r_var * k.transpose());
    symmetrize(&mut cov);
    Ok(BeliefState { mean, cov })
}

/// Backward Rauch-Tung-Striebel pass.
///
/// `filtered[k]` is the posterior at step k and `predicted[k]` the one-step
/// prediction from `filtered[k - 1]`; `predicted[0]` is ignored. The last
/// state is returned unchanged.
pub fn rts_smooth(
    model: &LinearCVModel,
    filtered: &[BeliefState],
    predicted: &[BeliefState],
) -> Result<Vec<BeliefState>, FilterError> {
    assert_eq!(filtered.len(), predicted.len(), "sequence length mismatch");
    let n = filtered.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let f = model.transition();
    let mut smoothed = Vec::with_capacity(n);
    smoothed.push(filtered[n - 1].clone());
    for k in (0..n - 1).rev() {
        let next_smoothed = smoothed.last().unwrap();
        let pred = &predicted[k + 1];
        let chol = pred
            .cov
            .clone()
            .cholesky()
            .ok_or(FilterError::NumericalBreakdown("predicted covariance"))?;
        // C_k = P_k F^T (P_{k+1|k})^-1
        let gain = chol.solve(&(&f * &filtered[k].cov)).transpose();
        let mean = &filtered[k].mean + &gain * (&next_smoothed.mean - &pred.mean);
        let mut cov =
            &filtered[k].cov + &gain * (&next_smoothed.cov - &pred.cov) * gain.transpose();
        symmetrize(&mut cov);
        smoothed.push(BeliefState { mean, cov });
    }
    smoothed.reverse();
    Ok(smoothed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::{vec, vec::Vec};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Normal};

    fn model_1d(sa: f64, sz: f64) -> LinearCVModel {
        LinearCVModel::new(1, 1.0, sa, sz)
    }

    fn belief(mean: &[f64], cov_diag: &[f64]) -> BeliefState {
        BeliefState {
            mean: DVector::from_row_slice(mean),
            cov: DMatrix::from_diagonal(&DVector::from_row_slice(cov_diag)),
        }
    }

    #[test]
    fn predict_constant_velocity() {
        let m = model_1d(0.1, 1.0);
        let b = belief(&[0.0, 1.0], &[1.0, 1.0]);
        let p = predict(&m, &b);
        assert_relative_eq!(p.mean[0], 1.0);
        assert_relative_eq!(p.mean[1], 1.0);
    }

    #[test]
    fn predict_stationary_position_unchanged() {
        let m = model_1d(0.1, 1.0);
        let b = belief(&[4.2, 0.0], &[1.0, 1.0]);
        assert_relative_eq!(predict(&m, &b).mean[0], 4.2);
    }

    #[test]
    fn predict_grows_cov_trace() {
        let m = model_1d(0.5, 1.0);
        let b = belief(&[0.0, 0.0], &[1.0, 1.0]);
        assert!(predict(&m, &b).cov.trace() > b.cov.trace());
    }

    #[test]
    fn update_hand_computed_gain() {
        // prior N([0,0], I), sigma_z = 1, z = 2: gain 0.5, posterior pos 1.0
        let m = model_1d(0.1, 1.0);
        let b = belief(&[0.0, 0.0], &[1.0, 1.0]);
        let u = update(&m, &b, &[2.0]).unwrap();
        assert_relative_eq!(u.mean[0], 1.0, epsilon = 1e-12);
        assert!(u.cov.trace() <= b.cov.trace() + 1e-12);
    }

    #[test]
    fn update_limits() {
        let b = belief(&[0.0, 0.0], &[1.0, 1.0]);
        // near-exact measurement pins the position
        let sharp = update(&model_1d(0.1, 1e-9), &b, &[2.0]).unwrap();
        assert_relative_eq!(sharp.mean[0], 2.0, epsilon = 1e-6);
        // uninformative measurement leaves the prior
        let vague = update(&model_1d(0.1, 1e9), &b, &[2.0]).unwrap();
        assert_relative_eq!(vague.mean[0], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn posterior_position_between_prior_and_measurement() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = model_1d(rng.random_range(0.01..2.0), rng.random_range(0.01..2.0));
            let prior_pos = rng.random_range(-5.0..5.0);
            let b = belief(
                &[prior_pos, rng.random_range(-1.0..1.0)],
                &[rng.random_range(0.01..4.0), rng.random_range(0.01..4.0)],
            );
            let z = rng.random_range(-5.0..5.0);
            let post = update(&m, &b, &[z]).unwrap().mean[0];
            let (lo, hi) = (prior_pos.min(z), prior_pos.max(z));
            assert!(post >= lo - 1e-12 && post <= hi + 1e-12);
        }
    }

    #[test]
    fn rts_single_state_is_identity() {
        let m = model_1d(0.3, 0.7);
        let b = belief(&[1.0, 2.0], &[1.0, 1.0]);
        let out = rts_smooth(&m, &[b.clone()], &[b.clone()]).unwrap();
        assert_eq!(out.len(), 1);
        assert_relative_eq!(out[0].mean, b.mean);
    }

    /// Runs the forward filter over measurements, returning (filtered,
    /// predicted) sequences aligned as `rts_smooth` expects.
    fn run_filter(
        m: &LinearCVModel,
        zs: &[Vec<f64>],
        init: BeliefState,
    ) -> (Vec<BeliefState>, Vec<BeliefState>) {
        let mut filtered = Vec::new();
        let mut predicted = Vec::new();
        let mut belief = init;
        for (k, z) in zs.iter().enumerate() {
            if k > 0 {
                belief = predict(m, &belief);
            }
            predicted.push(belief.clone());
            belief = update(m, &belief, z).unwrap();
            filtered.push(belief.clone());
        }
        (filtered, predicted)
    }

    #[test]
    fn noiseless_track_exact_after_burn_in() {
        // near-zero measurement noise: the filter pins each exact sample
        let m = model_1d(0.5, 1e-9);
        let zs: Vec<Vec<f64>> = (0..20).map(|k| vec![0.5 + 1.3 * k as f64]).collect();
        let init = BeliefState::from_first_measurement(&zs[0], 1e-18, 2.0);
        let (filtered, predicted) = run_filter(&m, &zs, init);
        for (k, f) in filtered.iter().enumerate().skip(2) {
            assert!((f.mean[0] - zs[k][0]).abs() < 1e-9);
        }
        let smoothed = rts_smooth(&m, &filtered, &predicted).unwrap();
        for (k, s) in smoothed.iter().enumerate().skip(2) {
            assert!((s.mean[0] - zs[k][0]).abs() < 1e-9);
        }
        // smoothed covariance trace never exceeds filtered
        for (s, f) in smoothed.iter().zip(filtered.iter()) {
            assert!(s.cov.trace() <= f.cov.trace() + 1e-9);
        }
    }

    #[test]
    fn resmoothing_dynamics_consistent_sequence_is_fixed_point() {
        // On measurements that exactly follow the CV dynamics the smoothed
        // means satisfy the transition, so smoothing again changes nothing.
        let m = model_1d(0.5, 1e-9);
        let zs: Vec<Vec<f64>> = (0..15).map(|k| vec![2.0 - 0.7 * k as f64]).collect();
        let init = BeliefState::from_first_measurement(&zs[0], 1e-18, 2.0);
        let (filtered, predicted) = run_filter(&m, &zs, init);
        let smoothed = rts_smooth(&m, &filtered, &predicted).unwrap();

        let mut re_predicted = vec![smoothed[0].clone()];
        for k in 1..smoothed.len() {
            re_predicted.push(predict(&m, &smoothed[k - 1]));
        }
        let twice = rts_smooth(&m, &smoothed, &re_predicted).unwrap();
        for (a, b) in twice.iter().zip(smoothed.iter()).skip(2) {
            assert!((&a.mean - &b.mean).norm() < 1e-9);
        }
    }

    #[test]
    fn smoothing_beats_filtering_on_noisy_tracks() {
        let mut wins = 0;
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, 0.5).unwrap();
            let m = model_1d(0.5, 0.5);
            let truth: Vec<f64> = (0..50).map(|k| 1.1 * k as f64).collect();
            let zs: Vec<Vec<f64>> = truth
                .iter()
                .map(|&x| vec![x + noise.sample(&mut rng)])
                .collect();
            let init = BeliefState::from_first_measurement(&zs[0], 0.25, 2.0);
            let (filtered, predicted) = run_filter(&m, &zs, init);
            let smoothed = rts_smooth(&m, &filtered, &predicted).unwrap();
            let rmse = |seq: &[BeliefState]| {
                let sse: f64 = seq
                    .iter()
                    .zip(truth.iter())
                    .map(|(b, &x)| (b.mean[0] - x).powi(2))
                    .sum();
                (sse / truth.len() as f64).sqrt()
            };
            if rmse(&smoothed) < rmse(&filtered) {
                wins += 1;
            }
        }
        assert!(wins >= 95, "smoothing beat filtering in only {wins}/100 seeds");
    }

    #[test]
    fn random_operations_preserve_psd() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let m = LinearCVModel::new(2, 1.0, 0.7, 0.4);
        let mut b = BeliefState::from_first_measurement(&[0.0, 0.0], 1.0, 1.0);
        for _ in 0..2000 {
            b = predict(&m, &b);
            if rng.random::<f64>() < 0.7 {
                let z = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
                b = update(&m, &b, &z).unwrap();
            }
            let sym_err = (&b.cov - b.cov.transpose()).abs().max();
            assert!(sym_err < 1e-9);
            let eig = b.cov.clone().symmetric_eigenvalues();
            assert!(eig.min() >= -1e-9, "eigenvalue {}", eig.min());
        }
    }

    #[test]
    fn multi_axis_state_layout() {
        let m = LinearCVModel::new(3, 1.0, 0.1, 0.1);
        let b = BeliefState::from_first_measurement(&[1.0, 2.0, 3.0], 0.5, 1.0);
        assert_eq!(b.mean.len(), 6);
        assert_relative_eq!(b.position(2), 3.0);
        assert_relative_eq!(b.velocity(0), 0.0);
        let p = predict(&m, &b);
        assert_relative_eq!(p.mean[0], 1.0);
    }
}
