//! Noise functions and the two Gaussian dynamical maps.
//!
//! Both channels add classical Gaussian displacement noise to the probe at
//! covariance level, `σ(t) = σ0 + 2 σ_noise(t)`. Under local noise each mode
//! sees an independent field and the noise matrix is block diagonal; under
//! common noise both modes see the same field and the matrix gains an
//! identical cross block, which is what the strip measurement exploits.
//!
//! Field fluctuations are Ornstein-Uhlenbeck with autocorrelation
//! `K(t1, t2) = (λ/2) exp(-|t1 - t2|)` in units rescaled by the environment
//! correlation time (couplings and times entering this API are already
//! rescaled).

use ndarray::{s, Array2};

use crate::gaussian::CovarianceMatrix;
use crate::linalg;
use crate::{Error, Result};

/// Environment settings, all in rescaled (dimensionless) units.
#[derive(Debug, Clone, Copy)]
pub struct EnvironmentParams {
    /// Coupling λ ≥ 0.
    pub coupling: f64,
    /// Interaction time t ≥ start_time.
    pub time: f64,
    /// Detuning of mode 1 from the field carrier.
    pub detuning1: f64,
    /// Detuning of mode 2 from the field carrier.
    pub detuning2: f64,
    /// Start time (defaults to 0).
    pub start_time: f64,
}

impl EnvironmentParams {
    /// Resonant environment (both detunings zero) starting at t = 0.
    pub fn resonant(coupling: f64, time: f64) -> Self {
        Self {
            coupling,
            time,
            detuning1: 0.0,
            detuning2: 0.0,
            start_time: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coupling must be >= 0, got {}",
                self.coupling
            )));
        }
        if !(self.time >= self.start_time) {
            return Err(Error::InvalidParameter(format!(
                "time {} must be >= start time {}",
                self.time, self.start_time
            )));
        }
        Ok(())
    }

    pub fn is_resonant(&self) -> bool {
        self.detuning1 == 0.0 && self.detuning2 == 0.0
    }
}

/// Resonant noise variance `β(t) = λ (t - 1 + e^{-t})`, the closed form of
/// the double OU-kernel integral; non-negative and non-decreasing in t.
pub fn beta_resonant(coupling: f64, time: f64) -> f64 {
    coupling * (time - 1.0 + (-time).exp())
}

/// The four noise integrals over `[t0, t]²` of the OU kernel against
/// `cos[δ_j (s1 - s2)]`, `cos[δ1 s1 - δ2 s2]` and `sin[δ1 s1 - δ2 s2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseIntegrals {
    pub beta1: f64,
    pub beta2: f64,
    pub beta_c: f64,
    pub gamma_c: f64,
}

/// Relative tolerance of the adaptive quadrature.
pub const QUADRATURE_REL_TOL: f64 = 1e-8;

/// Adaptive Simpson on `[a, b]`; the tolerance is absolute and halved at
/// each bisection. Returns the estimate and an error bound.
fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> (f64, f64) {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        m: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = simpson(f, a, lm, m);
        let right = simpson(f, m, rm, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            (left + right + delta / 15.0, delta.abs() / 15.0)
        } else {
            let (lv, le) = recurse(f, a, lm, m, left, 0.5 * tol, depth - 1);
            let (rv, re) = recurse(f, m, rm, b, right, 0.5 * tol, depth - 1);
            (lv + rv, le + re)
        }
    }
    if a == b {
        return (0.0, 0.0);
    }
    let m = 0.5 * (a + b);
    recurse(f, a, m, b, simpson(f, a, m, b), tol, max_depth)
}

/// Double integral of `weight(s1, s2) * K(s1, s2)` over `[t0, t]²`, splitting
/// the inner integral at `s2 = s1` where the kernel has its cusp.
fn kernel_double_integral<W: Fn(f64, f64) -> f64>(
    env: &EnvironmentParams,
    weight: W,
) -> Result<f64> {
    let (t0, t1, lambda) = (env.start_time, env.time, env.coupling);
    if t1 == t0 || lambda == 0.0 {
        return Ok(0.0);
    }
    // scale the absolute tolerance by a cheap overestimate of the integral
    let span = t1 - t0;
    let scale = (0.5 * lambda * span * span).max(1e-12);
    let abs_tol = QUADRATURE_REL_TOL * scale;
    let kernel = |s1: f64, s2: f64| 0.5 * lambda * (-(s1 - s2).abs()).exp();
    let inner_tol = 0.1 * abs_tol / span;
    let mut achieved: f64 = 0.0;
    let outer = |s1: f64| {
        let f = |s2: f64| weight(s1, s2) * kernel(s1, s2);
        let (below, _) = adaptive_simpson(&f, t0, s1, 0.5 * inner_tol, 28);
        let (above, _) = adaptive_simpson(&f, s1, t1, 0.5 * inner_tol, 28);
        below + above
    };
    let (value, err) = adaptive_simpson(&outer, t0, t1, abs_tol, 28);
    achieved = achieved.max(err);
    if achieved > 20.0 * abs_tol {
        return Err(Error::QuadratureNonConvergence {
            requested: QUADRATURE_REL_TOL,
            achieved: achieved / scale,
        });
    }
    Ok(value)
}

/// Evaluate the noise integrals by adaptive 2-D quadrature, regardless of
/// detuning. Kept public as the independent numerical route against
/// [`beta_resonant`].
pub fn noise_integrals_numeric(env: &EnvironmentParams) -> Result<NoiseIntegrals> {
    env.validate()?;
    let (d1, d2) = (env.detuning1, env.detuning2);
    Ok(NoiseIntegrals {
        beta1: kernel_double_integral(env, |s1, s2| (d1 * (s1 - s2)).cos())?,
        beta2: kernel_double_integral(env, |s1, s2| (d2 * (s1 - s2)).cos())?,
        beta_c: kernel_double_integral(env, |s1, s2| (d1 * s1 - d2 * s2).cos())?,
        gamma_c: kernel_double_integral(env, |s1, s2| (d1 * s1 - d2 * s2).sin())?,
    })
}

/// Noise integrals for the environment; at exact resonance the closed form
/// applies, `(β, β, β, 0)` with `β = beta_resonant`, otherwise adaptive
/// quadrature to relative tolerance [`QUADRATURE_REL_TOL`].
pub fn noise_integrals(env: &EnvironmentParams) -> Result<NoiseIntegrals> {
    env.validate()?;
    if env.is_resonant() {
        let beta = beta_resonant(env.coupling, env.time - env.start_time);
        return Ok(NoiseIntegrals {
            beta1: beta,
            beta2: beta,
            beta_c: beta,
            gamma_c: 0.0,
        });
    }
    noise_integrals_numeric(env)
}

/// Which dynamical map the noise matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Independent field per mode: block-diagonal noise.
    Local,
    /// One shared field: identical cross-mode block.
    Common,
}

/// Assembled 4x4 noise covariance, positive semidefinite.
#[derive(Debug, Clone)]
pub struct NoiseMatrix {
    kind: NoiseKind,
    m: Array2<f64>,
}

impl NoiseMatrix {
    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.m
    }
}

/// Build the noise matrix for the requested channel from the integrals.
/// `Local` is `diag(β1, β1, β2, β2)`; `Common` adds the cross block
/// `[[β_c, γ_c], [γ_c, β_c]]` on both off-diagonal positions.
pub fn noise_matrix(kind: NoiseKind, integrals: &NoiseIntegrals) -> Result<NoiseMatrix> {
    let mut m = Array2::<f64>::zeros((4, 4));
    m[(0, 0)] = integrals.beta1;
    m[(1, 1)] = integrals.beta1;
    m[(2, 2)] = integrals.beta2;
    m[(3, 3)] = integrals.beta2;
    if kind == NoiseKind::Common {
        let r = ndarray::array![
            [integrals.beta_c, integrals.gamma_c],
            [integrals.gamma_c, integrals.beta_c]
        ];
        m.slice_mut(s![0..2, 2..4]).assign(&r);
        m.slice_mut(s![2..4, 0..2]).assign(&r);
    }
    let min_eig = linalg::min_sym_eigenvalue(&m)?;
    if min_eig < -1e-12 {
        return Err(Error::NoiseNotPsd(min_eig));
    }
    Ok(NoiseMatrix { kind, m })
}

/// Apply a noise matrix to a probe: `σ0 + 2 σ_noise`. Adding PSD noise
/// preserves physicality.
pub fn evolve(sigma0: &CovarianceMatrix, noise: &NoiseMatrix) -> CovarianceMatrix {
    CovarianceMatrix::from_array(sigma0.as_array() + &(2.0 * &noise.m))
        .expect("sum of symmetric matrices is symmetric")
}

/// Convenience: both channel outputs for a probe in one call.
pub fn channel_outputs(
    sigma0: &CovarianceMatrix,
    env: &EnvironmentParams,
) -> Result<(CovarianceMatrix, CovarianceMatrix)> {
    let integrals = noise_integrals(env)?;
    let local = evolve(sigma0, &noise_matrix(NoiseKind::Local, &integrals)?);
    let common = evolve(sigma0, &noise_matrix(NoiseKind::Common, &integrals)?);
    Ok((local, common))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{is_physical, CovarianceMatrix};
    use crate::states;

    const E_INV: f64 = 0.36787944117144233;

    #[test]
    fn beta_resonant_reference_values() {
        assert_eq!(beta_resonant(1.0, 0.0), 0.0);
        assert!((beta_resonant(1.0, 1.0) - E_INV).abs() < 1e-15);
        // linear in the coupling
        for t in [0.3, 1.7, 4.0] {
            assert!(
                (beta_resonant(2.0, t) - 2.0 * beta_resonant(1.0, t)).abs() < 1e-15
            );
        }
    }

    #[test]
    fn beta_resonant_monotone_and_asymptotic() {
        let mut prev = 0.0;
        for k in 1..=200 {
            let t = 0.1 * k as f64;
            let b = beta_resonant(1.0, t);
            assert!(b >= prev);
            prev = b;
            // long-time Markovian slope: beta/lambda -> t - 1 (the bound is
            // saturated exactly, so leave room for rounding at large t)
            assert!((b - (t - 1.0)).abs() <= (-t).exp() + 1e-12 * t.max(1.0));
        }
    }

    /// Independent fixed-grid trapezoid oracle for the double integral.
    fn trapezoid_oracle(env: &EnvironmentParams, weight: impl Fn(f64, f64) -> f64) -> f64 {
        let n = 2000;
        let (t0, t1) = (env.start_time, env.time);
        let h = (t1 - t0) / n as f64;
        let mut total = 0.0;
        for i in 0..=n {
            let s1 = t0 + i as f64 * h;
            let wi = if i == 0 || i == n { 0.5 } else { 1.0 };
            let mut inner = 0.0;
            for j in 0..=n {
                let s2 = t0 + j as f64 * h;
                let wj = if j == 0 || j == n { 0.5 } else { 1.0 };
                inner += wj
                    * weight(s1, s2)
                    * 0.5
                    * env.coupling
                    * (-(s1 - s2).abs()).exp();
            }
            total += wi * inner;
        }
        total * h * h
    }

    #[test]
    fn quadrature_matches_closed_form_at_resonance() {
        for t in [0.1, 1.0, 5.0] {
            let env = EnvironmentParams::resonant(1.0, t);
            let ints = noise_integrals_numeric(&env).unwrap();
            let beta = beta_resonant(1.0, t);
            assert!(
                (ints.beta1 - beta).abs() <= 1e-8 * beta.max(1e-3),
                "t={t}: {} vs {}",
                ints.beta1,
                beta
            );
            assert_eq!(ints.gamma_c, 0.0);
        }
    }

    #[test]
    fn quadrature_matches_trapezoid_oracle_detuned() {
        let env = EnvironmentParams {
            coupling: 1.0,
            time: 2.0,
            detuning1: 0.5,
            detuning2: 0.5,
            start_time: 0.0,
        };
        let ints = noise_integrals(&env).unwrap();
        let beta_oracle = trapezoid_oracle(&env, |s1, s2| (0.5 * (s1 - s2)).cos());
        assert!((ints.beta1 - beta_oracle).abs() / beta_oracle.abs() < 1e-6);
        assert!((ints.beta2 - ints.beta1).abs() < 1e-10);
        // equal detunings keep the cross integrals degenerate with beta
        assert!((ints.beta_c - ints.beta1).abs() < 1e-8);
        assert!(ints.gamma_c.abs() < 1e-8);

        let skew = EnvironmentParams {
            detuning2: 1.1,
            ..env
        };
        let ints = noise_integrals(&skew).unwrap();
        let bc_oracle = trapezoid_oracle(&skew, |s1, s2| (0.5 * s1 - 1.1 * s2).cos());
        let gc_oracle = trapezoid_oracle(&skew, |s1, s2| (0.5 * s1 - 1.1 * s2).sin());
        assert!((ints.beta_c - bc_oracle).abs() / bc_oracle.abs().max(0.1) < 1e-5);
        assert!((ints.gamma_c - gc_oracle).abs() / gc_oracle.abs().max(0.1) < 1e-5);
    }

    #[test]
    fn zero_time_gives_zero_integrals() {
        let env = EnvironmentParams::resonant(1.0, 0.0);
        let ints = noise_integrals(&env).unwrap();
        assert_eq!(
            (ints.beta1, ints.beta2, ints.beta_c, ints.gamma_c),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn noise_matrices_at_resonance() {
        let env = EnvironmentParams::resonant(1.0, 1.0);
        let ints = noise_integrals(&env).unwrap();
        let local = noise_matrix(NoiseKind::Local, &ints).unwrap();
        for i in 0..4 {
            assert!((local.as_array()[(i, i)] - E_INV).abs() < 1e-14);
        }
        assert_eq!(local.as_array()[(0, 2)], 0.0);
        let common = noise_matrix(NoiseKind::Common, &ints).unwrap();
        assert!((common.as_array()[(0, 2)] - E_INV).abs() < 1e-14);
        assert!((common.as_array()[(1, 3)] - E_INV).abs() < 1e-14);
        assert_eq!(common.as_array()[(0, 3)], 0.0);
        assert_eq!(common.as_array()[(1, 2)], 0.0);
    }

    #[test]
    fn evolve_vacuum_reference() {
        let env = EnvironmentParams::resonant(1.0, 1.0);
        let ints = noise_integrals(&env).unwrap();
        let vac = CovarianceMatrix::vacuum();
        let local = evolve(&vac, &noise_matrix(NoiseKind::Local, &ints).unwrap());
        for i in 0..4 {
            assert!((local.entry(i, i) - (0.5 + 2.0 * E_INV)).abs() < 1e-14);
        }
        let common = evolve(&vac, &noise_matrix(NoiseKind::Common, &ints).unwrap());
        assert!((common.entry(0, 2) - 2.0 * E_INV).abs() < 1e-14);
        assert!((common.entry(1, 3) - 2.0 * E_INV).abs() < 1e-14);
    }

    #[test]
    fn zero_noise_is_identity_map() {
        let ints = NoiseIntegrals {
            beta1: 0.0,
            beta2: 0.0,
            beta_c: 0.0,
            gamma_c: 0.0,
        };
        let sig = states::sts_covariance(&states::StsParams {
            mean_photons: 1.0,
            squeezing_fraction: 0.7,
        })
        .unwrap();
        for kind in [NoiseKind::Local, NoiseKind::Common] {
            let out = evolve(&sig, &noise_matrix(kind, &ints).unwrap());
            assert_eq!(out.as_array(), sig.as_array());
        }
    }

    #[test]
    fn evolve_preserves_physicality_randomized() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let sig = states::random_standard_form(
                rng.gen_range(0.25..1.0),
                states::DEFAULT_A_RANGE,
                rng.gen(),
            )
            .unwrap();
            let env = EnvironmentParams::resonant(
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.0..5.0),
            );
            let (local, common) = channel_outputs(&sig, &env).unwrap();
            assert!(is_physical(&local));
            assert!(is_physical(&common));
        }
    }

    #[test]
    fn local_channel_never_couples_modes() {
        let sig = states::sv_covariance(&states::SvParams {
            thermal_photons: 0.4,
            squeeze: 0.8,
        })
        .unwrap();
        let env = EnvironmentParams::resonant(1.3, 2.2);
        let ints = noise_integrals(&env).unwrap();
        let out = evolve(&sig, &noise_matrix(NoiseKind::Local, &ints).unwrap());
        assert_eq!(out.block_c(), sig.block_c());
    }

    #[test]
    fn common_channel_cancels_difference_quadratures_exactly() {
        let sig = states::sts_covariance(&states::StsParams {
            mean_photons: 1.0,
            squeezing_fraction: 0.7,
        })
        .unwrap();
        let env = EnvironmentParams::resonant(1.0, 1.0);
        let ints = noise_integrals(&env).unwrap();
        let out = evolve(&sig, &noise_matrix(NoiseKind::Common, &ints).unwrap());
        let var_in_x = 0.5 * (sig.entry(0, 0) + sig.entry(2, 2)) - sig.entry(0, 2);
        let var_out_x = 0.5 * (out.entry(0, 0) + out.entry(2, 2)) - out.entry(0, 2);
        let var_in_p = 0.5 * (sig.entry(1, 1) + sig.entry(3, 3)) - sig.entry(1, 3);
        let var_out_p = 0.5 * (out.entry(1, 1) + out.entry(3, 3)) - out.entry(1, 3);
        assert!((var_in_x - var_out_x).abs() <= 1e-12);
        assert!((var_in_p - var_out_p).abs() <= 1e-12);
    }
}
