//! Monte Carlo validation of the analytic channels: direct simulation of the
//! Ornstein-Uhlenbeck fields and of the averaged random displacements they
//! imprint on the probe.
//!
//! At resonance a field realization displaces the quadratures by
//! `(dx, dp) = √2 (∫C^(y) ds, -∫C^(x) ds)`; the covariance of these
//! displacements over realizations is twice the analytic noise matrix. The
//! local channel draws an independent field per mode, the common channel one
//! shared field.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{EnvironmentParams, NoiseKind};
use crate::gaussian::CovarianceMatrix;
use crate::{Error, Result};

/// One realization of a complex stochastic field sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct FieldTrajectory {
    /// Step actually used (the requested step rounded so the horizon is an
    /// integer number of steps).
    pub dt: f64,
    /// Samples of the real component C^(x).
    pub re: Vec<f64>,
    /// Samples of the imaginary component C^(y).
    pub im: Vec<f64>,
    pub seed: u64,
}

impl FieldTrajectory {
    /// Trapezoid integral of a component over the full horizon.
    fn integral(samples: &[f64], dt: f64) -> f64 {
        let n = samples.len();
        if n < 2 {
            return 0.0;
        }
        let mut acc = 0.5 * (samples[0] + samples[n - 1]);
        for v in &samples[1..n - 1] {
            acc += v;
        }
        acc * dt
    }

    /// Quadrature displacement `(dx, dp)` imprinted by this realization.
    pub fn displacement(&self) -> (f64, f64) {
        let ix = Self::integral(&self.re, self.dt);
        let iy = Self::integral(&self.im, self.dt);
        let sqrt2 = std::f64::consts::SQRT_2;
        (sqrt2 * iy, -sqrt2 * ix)
    }
}

/// Exact-discretization update factor and innovation variance for one step.
fn ou_step_coefficients(dt: f64, variance: f64) -> (f64, f64) {
    let decay = (-dt).exp();
    (decay, variance * (1.0 - decay * decay))
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; one value per call keeps the stream layout simple
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Sample one stationary OU field realization over `[start_time, time]`.
///
/// Both components are independent zero-mean OU processes with stationary
/// variance λ/2 and autocorrelation `(λ/2) e^{-|τ|}`, advanced with the
/// exact one-step law (mean reversion `e^{-dt}`, innovation variance
/// `(λ/2)(1 - e^{-2 dt})`), so there is no time-step bias. Deterministic
/// per seed.
pub fn ou_sample(env: &EnvironmentParams, dt: f64, seed: u64) -> FieldTrajectory {
    assert!(dt > 0.0 && dt <= 0.01, "step must lie in (0, 0.01]");
    let horizon = env.time - env.start_time;
    let steps = ((horizon / dt).round() as usize).max(1);
    let dt_eff = horizon / steps as f64;
    let variance = 0.5 * env.coupling;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (decay, innovation) = ou_step_coefficients(dt_eff, variance);
    let innovation_sd = innovation.sqrt();
    let stationary_sd = variance.sqrt();

    let mut re = Vec::with_capacity(steps + 1);
    let mut im = Vec::with_capacity(steps + 1);
    re.push(stationary_sd * standard_normal(&mut rng));
    im.push(stationary_sd * standard_normal(&mut rng));
    for k in 1..=steps {
        re.push(decay * re[k - 1] + innovation_sd * standard_normal(&mut rng));
        im.push(decay * im[k - 1] + innovation_sd * standard_normal(&mut rng));
    }
    FieldTrajectory {
        dt: dt_eff,
        re,
        im,
        seed,
    }
}

/// Default integration step for the trajectory oracle.
pub const DEFAULT_FIELD_DT: f64 = 1e-3;

/// Empirical channel estimate from averaged random displacements.
#[derive(Debug, Clone)]
pub struct EmpiricalChannel {
    /// `σ0 + Cov(displacements)`, the empirical analogue of `σ0 + 2 σ_noise`.
    pub covariance: CovarianceMatrix,
    /// Empirical noise matrix `Cov(displacements)/2`.
    pub noise: Array2<f64>,
    /// Per-entry standard errors of `noise`.
    pub standard_errors: Array2<f64>,
    pub trajectories: usize,
}

/// Estimate the channel output covariance from `n_traj` field realizations.
///
/// Restricted to resonance (the analytic closed form being validated);
/// trajectories use derived seeds `seed + index`, are evaluated in parallel,
/// and are reduced in fixed index order so the result is identical to a
/// serial run. `max_standard_error`, when given, rejects estimates whose
/// noise-entry standard errors exceed it.
pub fn empirical_channel(
    sigma0: &CovarianceMatrix,
    kind: NoiseKind,
    env: &EnvironmentParams,
    n_traj: usize,
    seed: u64,
    max_standard_error: Option<f64>,
) -> Result<EmpiricalChannel> {
    env.validate()?;
    if !env.is_resonant() {
        return Err(Error::InvalidParameter(
            "the trajectory oracle only covers the resonant case".into(),
        ));
    }
    if n_traj < 1_000 {
        return Err(Error::InvalidParameter(format!(
            "need at least 1000 trajectories, got {n_traj}"
        )));
    }

    let displacements: Vec<[f64; 4]> = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let traj_seed = seed.wrapping_add(i as u64);
            match kind {
                NoiseKind::Common => {
                    let field = ou_sample(env, DEFAULT_FIELD_DT, traj_seed);
                    let (dx, dp) = field.displacement();
                    [dx, dp, dx, dp]
                }
                NoiseKind::Local => {
                    // two independent fields from one per-trajectory stream:
                    // mode 2 continues the stream of mode 1
                    let field1 = ou_sample(env, DEFAULT_FIELD_DT, traj_seed);
                    let field2 =
                        ou_sample(env, DEFAULT_FIELD_DT, traj_seed.wrapping_add(0x9e3779b9));
                    let (dx1, dp1) = field1.displacement();
                    let (dx2, dp2) = field2.displacement();
                    [dx1, dp1, dx2, dp2]
                }
            }
        })
        .collect();

    let mean = pairwise_mean(&displacements);
    let cov = pairwise_covariance(&displacements, &mean);
    let n = n_traj as f64;
    let mut noise = Array2::<f64>::zeros((4, 4));
    let mut se = Array2::<f64>::zeros((4, 4));
    for i in 0..4 {
        for j in 0..4 {
            noise[(i, j)] = 0.5 * cov[(i, j)];
            // large-sample standard error of a Gaussian covariance entry
            se[(i, j)] =
                0.5 * ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)] * cov[(i, j)]) / (n - 1.0)).sqrt();
        }
    }
    if let Some(limit) = max_standard_error {
        let worst = se.iter().fold(0.0_f64, |a, b| a.max(*b));
        if worst > limit {
            return Err(Error::InsufficientTrajectories {
                se: worst,
                requested: limit,
            });
        }
    }
    let covariance =
        CovarianceMatrix::from_array(sigma0.as_array() + &(2.0 * &noise))?;
    Ok(EmpiricalChannel {
        covariance,
        noise,
        standard_errors: se,
        trajectories: n_traj,
    })
}

/// Order-independent (pairwise) mean over displacement vectors.
fn pairwise_mean(data: &[[f64; 4]]) -> [f64; 4] {
    fn sum(data: &[[f64; 4]]) -> [f64; 4] {
        if data.len() <= 8 {
            let mut acc = [0.0; 4];
            for d in data {
                for k in 0..4 {
                    acc[k] += d[k];
                }
            }
            return acc;
        }
        let (lo, hi) = data.split_at(data.len() / 2);
        let (a, b) = (sum(lo), sum(hi));
        [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
    }
    let s = sum(data);
    let n = data.len() as f64;
    [s[0] / n, s[1] / n, s[2] / n, s[3] / n]
}

/// Order-independent (pairwise) sample covariance with 1/(n-1) scaling.
fn pairwise_covariance(data: &[[f64; 4]], mean: &[f64; 4]) -> Array2<f64> {
    fn sum(data: &[[f64; 4]], mean: &[f64; 4]) -> [[f64; 4]; 4] {
        if data.len() <= 8 {
            let mut acc = [[0.0; 4]; 4];
            for d in data {
                let c = [
                    d[0] - mean[0],
                    d[1] - mean[1],
                    d[2] - mean[2],
                    d[3] - mean[3],
                ];
                for i in 0..4 {
                    for j in 0..4 {
                        acc[i][j] += c[i] * c[j];
                    }
                }
            }
            return acc;
        }
        let (lo, hi) = data.split_at(data.len() / 2);
        let (a, b) = (sum(lo, mean), sum(hi, mean));
        let mut acc = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                acc[i][j] = a[i][j] + b[i][j];
            }
        }
        acc
    }
    let s = sum(data, mean);
    let n = data.len() as f64;
    let mut out = Array2::<f64>::zeros((4, 4));
    for i in 0..4 {
        for j in 0..4 {
            out[(i, j)] = s[i][j] / (n - 1.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{beta_resonant, noise_integrals, noise_matrix};

    #[test]
    fn zero_coupling_gives_zero_trajectory() {
        let env = EnvironmentParams::resonant(0.0, 1.0);
        let traj = ou_sample(&env, 1e-3, 7);
        assert!(traj.re.iter().all(|v| *v == 0.0));
        assert!(traj.im.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn trajectories_are_deterministic_per_seed() {
        let env = EnvironmentParams::resonant(1.0, 1.0);
        let a = ou_sample(&env, 1e-3, 99);
        let b = ou_sample(&env, 1e-3, 99);
        assert_eq!(a.re, b.re);
        assert_eq!(a.im, b.im);
        let c = ou_sample(&env, 1e-3, 100);
        assert_ne!(a.re, c.re);
    }

    #[test]
    fn autocorrelation_matches_exponential_kernel() {
        // one long stationary trajectory; batch-means error bars
        let env = EnvironmentParams::resonant(1.0, 100.0);
        let traj = ou_sample(&env, 1e-2, 3);
        let lag = (1.0 / traj.dt).round() as usize;
        let samples = &traj.re;
        let n_batches = 20;
        let batch_len = (samples.len() - lag) / n_batches;
        let mut batch_means = Vec::with_capacity(n_batches);
        for b in 0..n_batches {
            let lo = b * batch_len;
            let mut acc = 0.0;
            for k in lo..lo + batch_len {
                acc += samples[k] * samples[k + lag];
            }
            batch_means.push(acc / batch_len as f64);
        }
        let mean: f64 = batch_means.iter().sum::<f64>() / n_batches as f64;
        let var: f64 = batch_means
            .iter()
            .map(|m| (m - mean) * (m - mean))
            .sum::<f64>()
            / (n_batches as f64 - 1.0);
        let se = (var / n_batches as f64).sqrt();
        let expected = 0.5 * (-1.0_f64).exp();
        assert!(
            (mean - expected).abs() < 3.0 * se.max(1e-3),
            "lag-1 autocorrelation {mean:.4} vs {expected:.4} (se {se:.4})"
        );
    }

    #[test]
    fn zero_time_returns_input_exactly() {
        let env = EnvironmentParams::resonant(1.0, 0.0);
        let vac = CovarianceMatrix::vacuum();
        let est =
            empirical_channel(&vac, NoiseKind::Common, &env, 1_000, 5, None).unwrap();
        assert_eq!(est.covariance.as_array(), vac.as_array());
    }

    #[test]
    fn common_channel_reproduces_cross_covariance() {
        let env = EnvironmentParams::resonant(1.0, 1.0);
        let vac = CovarianceMatrix::vacuum();
        let est =
            empirical_channel(&vac, NoiseKind::Common, &env, 10_000, 11, None).unwrap();
        let beta = beta_resonant(1.0, 1.0);
        for (i, j) in [(0, 0), (1, 1), (2, 2), (3, 3), (0, 2), (1, 3)] {
            let dev = (est.noise[(i, j)] - beta).abs();
            assert!(
                dev <= 3.0 * est.standard_errors[(i, j)],
                "entry ({i},{j}): {:.4} vs {beta:.4}",
                est.noise[(i, j)]
            );
        }
        // x-p cross entries vanish at resonance
        for (i, j) in [(0, 1), (0, 3), (1, 2), (2, 3)] {
            assert!(est.noise[(i, j)].abs() <= 3.0 * est.standard_errors[(i, j)]);
        }
    }

    #[test]
    fn local_channel_leaves_modes_uncorrelated() {
        let env = EnvironmentParams::resonant(1.0, 1.0);
        let sig = crate::states::sts_covariance(&crate::states::StsParams {
            mean_photons: 1.0,
            squeezing_fraction: 0.7,
        })
        .unwrap();
        let est =
            empirical_channel(&sig, NoiseKind::Local, &env, 10_000, 21, None).unwrap();
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            assert!(
                est.noise[(i, j)].abs() <= 3.0 * est.standard_errors[(i, j)],
                "cross entry ({i},{j}) = {:.4}",
                est.noise[(i, j)]
            );
        }
        let beta = beta_resonant(1.0, 1.0);
        for i in 0..4 {
            assert!((est.noise[(i, i)] - beta).abs() <= 3.0 * est.standard_errors[(i, i)]);
        }
    }

    #[test]
    fn common_difference_quadrature_is_noise_free_per_trajectory() {
        // the shared displacement cancels exactly in u = (x1 - x2)/√2
        let env = EnvironmentParams::resonant(1.0, 1.0);
        let field = ou_sample(&env, 1e-3, 17);
        let (dx, dp) = field.displacement();
        let d = [dx, dp, dx, dp];
        assert_eq!(d[0] - d[2], 0.0);
        assert_eq!(d[1] - d[3], 0.0);
    }

    #[test]
    fn insufficient_trajectories_flagged() {
        let env = EnvironmentParams::resonant(1.0, 1.0);
        let vac = CovarianceMatrix::vacuum();
        let res = empirical_channel(&vac, NoiseKind::Common, &env, 1_000, 5, Some(1e-6));
        assert!(matches!(res, Err(Error::InsufficientTrajectories { .. })));
        assert!(empirical_channel(&vac, NoiseKind::Common, &env, 100, 5, None).is_err());
    }

    #[test]
    fn analytic_noise_matches_within_three_sigma_multi_time() {
        let vac = CovarianceMatrix::vacuum();
        for t in [0.5, 2.0] {
            let env = EnvironmentParams::resonant(1.0, t);
            let ints = noise_integrals(&env).unwrap();
            for kind in [NoiseKind::Local, NoiseKind::Common] {
                let analytic = noise_matrix(kind, &ints).unwrap();
                let est = empirical_channel(&vac, kind, &env, 10_000, 31, None).unwrap();
                for i in 0..4 {
                    for j in 0..4 {
                        let dev = (est.noise[(i, j)] - analytic.as_array()[(i, j)]).abs();
                        assert!(
                            dev <= 3.5 * est.standard_errors[(i, j)].max(1e-9),
                            "t={t} {kind:?} ({i},{j}): dev {dev:.2e}"
                        );
                    }
                }
            }
        }
    }
}
