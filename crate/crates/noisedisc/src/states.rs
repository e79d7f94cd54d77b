//! Probe-state constructors: squeezed thermal states, single-mode-squeezed
//! states mixed with vacuum on a balanced beamsplitter, their standard form,
//! and random standard-form states at fixed purity.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gaussian::{
    self, CovarianceMatrix, StandardFormCoefficients,
};
use crate::{Error, Result};

/// Symmetric squeezed-thermal family, parametrized by the mean photon number
/// per mode and a normalized squeezing fraction.
#[derive(Debug, Clone, Copy)]
pub struct StsParams {
    /// Mean photons per mode (energy is twice this).
    pub mean_photons: f64,
    /// Fraction of the photons carried by the two-mode squeezing, in [0, 1].
    pub squeezing_fraction: f64,
}

impl StsParams {
    /// Squeezed photons `n_s = γ ε`.
    pub fn squeezed_photons(&self) -> f64 {
        self.squeezing_fraction * self.mean_photons
    }

    /// Thermal photons per mode `n̄ = (1-γ) ε / (1 + 2 γ ε)`.
    pub fn thermal_photons(&self) -> f64 {
        (1.0 - self.squeezing_fraction) * self.mean_photons
            / (1.0 + 2.0 * self.squeezing_fraction * self.mean_photons)
    }

    /// Two-mode squeeze parameter, `sinh² r = n_s`.
    pub fn squeeze_parameter(&self) -> f64 {
        self.squeezed_photons().sqrt().asinh()
    }

    fn validate(&self) -> Result<()> {
        if !(self.mean_photons >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mean photon number must be >= 0, got {}",
                self.mean_photons
            )));
        }
        if !(0.0..=1.0).contains(&self.squeezing_fraction) {
            return Err(Error::InvalidParameter(format!(
                "squeezing fraction must lie in [0, 1], got {}",
                self.squeezing_fraction
            )));
        }
        Ok(())
    }
}

/// Single-mode squeezed thermal state mixed with vacuum at a balanced
/// beamsplitter.
#[derive(Debug, Clone, Copy)]
pub struct SvParams {
    pub thermal_photons: f64,
    /// Single-mode squeeze parameter (real).
    pub squeeze: f64,
}

impl SvParams {
    fn validate(&self) -> Result<()> {
        if !(self.thermal_photons >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "thermal photon number must be >= 0, got {}",
                self.thermal_photons
            )));
        }
        if !self.squeeze.is_finite() {
            return Err(Error::InvalidParameter("squeeze must be finite".into()));
        }
        Ok(())
    }
}

/// Two-mode squeezed thermal covariance for general squeeze and per-mode
/// thermal occupations:
/// `a = cosh 2r + 2 n̄₁ cosh² r + 2 n̄₂ sinh² r`,
/// `b = cosh 2r + 2 n̄₁ sinh² r + 2 n̄₂ cosh² r`,
/// `c = (1 + n̄₁ + n̄₂) sinh 2r`, assembled as (1/2)·standard-form pattern
/// with coupling `diag(c, -c)`.
pub fn sts_covariance_general(r: f64, n1: f64, n2: f64) -> Result<CovarianceMatrix> {
    if n1 < 0.0 || n2 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "thermal photon numbers must be >= 0, got ({n1}, {n2})"
        )));
    }
    let (ch, sh) = (r.cosh(), r.sinh());
    let a = (2.0 * r).cosh() + 2.0 * n1 * ch * ch + 2.0 * n2 * sh * sh;
    let b = (2.0 * r).cosh() + 2.0 * n1 * sh * sh + 2.0 * n2 * ch * ch;
    let c = (1.0 + n1 + n2) * (2.0 * r).sinh();
    Ok(StandardFormCoefficients {
        a: 0.5 * a,
        b: 0.5 * b,
        c: 0.5 * c,
        d: -0.5 * c,
    }
    .matrix())
}

/// Symmetric squeezed-thermal covariance from the (ε, γ) parametrization.
pub fn sts_covariance(params: &StsParams) -> Result<CovarianceMatrix> {
    params.validate()?;
    let nbar = params.thermal_photons();
    sts_covariance_general(params.squeeze_parameter(), nbar, nbar)
}

/// Covariance of a squeezed thermal single mode mixed with vacuum at a
/// balanced beamsplitter, in the quarter-prefactor parametrization
/// `m = e^{2r}(1+2n̄)+1`, `n = e^{-2r}(1+2n̄)+1`, `s± = m,n - 2`.
pub fn sv_covariance(params: &SvParams) -> Result<CovarianceMatrix> {
    params.validate()?;
    let w = 1.0 + 2.0 * params.thermal_photons;
    let m = (2.0 * params.squeeze).exp() * w + 1.0;
    let n = (-2.0 * params.squeeze).exp() * w + 1.0;
    let s_plus = m - 2.0;
    let s_minus = n - 2.0;
    CovarianceMatrix::from_rows([
        [0.25 * m, 0.0, 0.25 * s_plus, 0.0],
        [0.0, 0.25 * n, 0.0, 0.25 * s_minus],
        [0.25 * s_plus, 0.0, 0.25 * m, 0.0],
        [0.0, 0.25 * s_minus, 0.0, 0.25 * n],
    ])
}

/// Standard form of [`sv_covariance`]; same purity and partial-transpose
/// spectrum, generally different energy.
pub fn ssv_covariance(params: &SvParams) -> Result<CovarianceMatrix> {
    let (std, _) = gaussian::to_standard_form(&sv_covariance(params)?)?;
    Ok(std)
}

/// Retry budget for the rejection sampler.
const SAMPLER_RETRY_BUDGET: usize = 100_000;

/// Draw a random physical standard-form covariance matrix with purity pinned
/// to `purity_target` (determinant fixed analytically, so the purity is exact
/// up to rounding). Deterministic for a given seed.
///
/// Scheme: fix `det σ = 1/(16 μ²)`; draw the diagonal coefficients a, b
/// uniformly from `a_range`; draw c uniformly in the interval keeping the
/// remaining coupling real; solve `(ab - c²)(ab - d²) = det σ` for
/// `d = -√(ab - det/(ab - c²))`; reject anything unphysical and redraw.
pub fn random_standard_form(
    purity_target: f64,
    a_range: (f64, f64),
    seed: u64,
) -> Result<CovarianceMatrix> {
    if !(purity_target > 0.0 && purity_target <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "purity target must lie in (0, 1], got {purity_target}"
        )));
    }
    if !(a_range.0 > 0.0 && a_range.1 > a_range.0) {
        return Err(Error::InvalidParameter(format!(
            "invalid diagonal range ({}, {})",
            a_range.0, a_range.1
        )));
    }
    let det_target = 1.0 / (16.0 * purity_target * purity_target);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if purity_target == 1.0 {
        // the physical det-matching set is the pure two-mode squeezed family
        // (a = b, c = -d = sqrt(a² - 1/4)), so draw it directly
        let lo = a_range.0.max(0.5);
        if lo >= a_range.1 {
            return Err(Error::InvalidParameter(format!(
                "range ({}, {}) holds no pure states (diagonal must exceed 1/2)",
                a_range.0, a_range.1
            )));
        }
        let a = rng.gen_range(lo..a_range.1);
        let c = (a * a - 0.25).max(0.0).sqrt();
        return Ok(StandardFormCoefficients { a, b: a, c, d: -c }.matrix());
    }
    for _ in 0..SAMPLER_RETRY_BUDGET {
        let a = rng.gen_range(a_range.0..a_range.1);
        let b = rng.gen_range(a_range.0..a_range.1);
        let ab = a * b;
        let c_max_sq = ab - det_target / ab;
        if c_max_sq <= 0.0 {
            continue;
        }
        let c = rng.gen_range(0.0..c_max_sq.sqrt());
        let d_sq = ab - det_target / (ab - c * c);
        if d_sq < 0.0 {
            continue;
        }
        let coeffs = StandardFormCoefficients {
            a,
            b,
            c,
            d: -d_sq.sqrt(),
        };
        let sigma = coeffs.matrix();
        if gaussian::is_physical(&sigma) {
            return Ok(sigma);
        }
    }
    Err(Error::SamplingExhausted {
        attempts: SAMPLER_RETRY_BUDGET,
    })
}

/// Default diagonal-coefficient range for the random sampler.
pub const DEFAULT_A_RANGE: (f64, f64) = (0.5, 5.0);

/// Find the standard-form SV parameters at purity `mu` whose smallest
/// partial-transpose symplectic eigenvalue matches `d_target`, by bisection
/// on the squeeze parameter. The achievable range at fixed purity is
/// `(d(r_max), d(0)]`; targets outside it are clamped to the boundary.
pub fn ssv_params_matching_d_min(mu: f64, d_target: f64, r_max: f64) -> Result<SvParams> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "purity must lie in (0, 1) for the SV family, got {mu}"
        )));
    }
    let nbar = 0.5 * (1.0 / mu - 1.0);
    let d_of = |r: f64| -> Result<f64> {
        let sig = sv_covariance(&SvParams {
            thermal_photons: nbar,
            squeeze: r,
        })?;
        Ok(gaussian::entanglement(&sig)?.d_min)
    };
    // d_min decreases monotonically with squeeze
    let (mut lo, mut hi) = (0.0_f64, r_max);
    if d_target >= d_of(lo)? {
        return Ok(SvParams {
            thermal_photons: nbar,
            squeeze: lo,
        });
    }
    if d_target <= d_of(hi)? {
        return Ok(SvParams {
            thermal_photons: nbar,
            squeeze: hi,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d_of(mid)? > d_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(SvParams {
        thermal_photons: nbar,
        squeeze: 0.5 * (lo + hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{
        energy, entanglement, is_physical, purity, standard_form_coefficients,
    };
    use crate::linalg;

    #[test]
    fn sts_zero_energy_is_vacuum() {
        let sig = sts_covariance(&StsParams {
            mean_photons: 0.0,
            squeezing_fraction: 0.3,
        })
        .unwrap();
        let vac = CovarianceMatrix::vacuum();
        assert!(linalg::max_abs(&(sig.as_array() - vac.as_array())) < 1e-14);
    }

    #[test]
    fn sts_no_squeezing_is_thermal_product() {
        let sig = sts_covariance(&StsParams {
            mean_photons: 1.0,
            squeezing_fraction: 0.0,
        })
        .unwrap();
        let th = CovarianceMatrix::thermal_product(1.0, 1.0).unwrap();
        assert!(linalg::max_abs(&(sig.as_array() - th.as_array())) < 1e-12);
        assert!((sig.entry(0, 0) - 1.5).abs() < 1e-14);
        assert!(sig.entry(0, 2).abs() < 1e-14);
    }

    #[test]
    fn sts_reference_point() {
        let p = StsParams {
            mean_photons: 1.0,
            squeezing_fraction: 0.7,
        };
        assert!((p.squeezed_photons() - 0.7).abs() < 1e-14);
        assert!((p.thermal_photons() - 0.125).abs() < 1e-14);
        let sig = sts_covariance(&p).unwrap();
        // un-halved coefficients a = 3, c = 2.5 sqrt(0.7 * 1.7)
        assert!((2.0 * sig.entry(0, 0) - 3.0).abs() < 1e-12);
        let c_expected = 2.5 * (0.7_f64 * 1.7).sqrt();
        assert!((2.0 * sig.entry(0, 2) - c_expected).abs() < 1e-12);
        assert!((2.0 * sig.entry(1, 3) + c_expected).abs() < 1e-12);
        // energy equals twice the per-mode photon number
        assert!((energy(&sig) - 2.0 * p.mean_photons).abs() < 1e-12);
        assert!(is_physical(&sig));
    }

    #[test]
    fn sv_reference_points() {
        let vacuum_like = sv_covariance(&SvParams {
            thermal_photons: 0.0,
            squeeze: 0.0,
        })
        .unwrap();
        assert!(
            linalg::max_abs(
                &(vacuum_like.as_array() - CovarianceMatrix::vacuum().as_array())
            ) < 1e-14
        );

        let split_thermal = sv_covariance(&SvParams {
            thermal_photons: 1.0,
            squeeze: 0.0,
        })
        .unwrap();
        assert!((split_thermal.entry(0, 0) - 1.0).abs() < 1e-14);
        assert!((split_thermal.entry(0, 2) - 0.5).abs() < 1e-14);
        assert!(is_physical(&split_thermal));
        assert!((purity(&split_thermal).unwrap() - 1.0 / 3.0).abs() < 1e-12);

        let squeezed = sv_covariance(&SvParams {
            thermal_photons: 1.0,
            squeeze: 0.7,
        })
        .unwrap();
        let m = 3.0 * (1.4_f64).exp() + 1.0;
        let n = 3.0 * (-1.4_f64).exp() + 1.0;
        assert!((4.0 * squeezed.entry(0, 0) - m).abs() < 1e-12);
        assert!((4.0 * squeezed.entry(1, 1) - n).abs() < 1e-12);
        assert!((4.0 * squeezed.entry(0, 2) - (m - 2.0)).abs() < 1e-12);
        assert!((4.0 * squeezed.entry(1, 3) - (n - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn ssv_matches_sv_invariants() {
        for (nbar, r) in [(1.0, 0.7), (0.3333, 1.470), (0.0, 0.9)] {
            let p = SvParams {
                thermal_photons: nbar,
                squeeze: r,
            };
            let sv = sv_covariance(&p).unwrap();
            let ssv = ssv_covariance(&p).unwrap();
            assert!((purity(&ssv).unwrap() - purity(&sv).unwrap()).abs() < 1e-9);
            let (e1, e2) = (entanglement(&sv).unwrap(), entanglement(&ssv).unwrap());
            assert!((e1.d_min - e2.d_min).abs() < 1e-9);
            standard_form_coefficients(&ssv, 1e-9).unwrap();
        }
    }

    #[test]
    fn constructors_emit_physical_matrices() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let which: u8 = rng.gen_range(0..3);
            let sig = match which {
                0 => sts_covariance(&StsParams {
                    mean_photons: rng.gen_range(0.0..4.0),
                    squeezing_fraction: rng.gen_range(0.0..1.0),
                })
                .unwrap(),
                1 => sv_covariance(&SvParams {
                    thermal_photons: rng.gen_range(0.0..3.0),
                    squeeze: rng.gen_range(-1.5..1.5),
                })
                .unwrap(),
                _ => ssv_covariance(&SvParams {
                    thermal_photons: rng.gen_range(0.0..3.0),
                    squeeze: rng.gen_range(-1.5..1.5),
                })
                .unwrap(),
            };
            assert!(is_physical(&sig));
        }
    }

    #[test]
    fn random_standard_form_hits_purity_exactly() {
        for seed in 0..50 {
            let sig = random_standard_form(0.6, DEFAULT_A_RANGE, seed).unwrap();
            assert!(is_physical(&sig));
            assert!((purity(&sig).unwrap() - 0.6).abs() < 1e-9);
            let coeffs = standard_form_coefficients(&sig, 0.0).unwrap();
            // off-pattern entries are exactly zero by construction
            assert_eq!(sig.entry(0, 1), 0.0);
            assert_eq!(sig.entry(0, 3), 0.0);
            assert_eq!(sig.entry(1, 2), 0.0);
            assert!(coeffs.c >= 0.0 && coeffs.d <= 0.0);
        }
    }

    #[test]
    fn random_standard_form_is_deterministic() {
        let a = random_standard_form(0.6, DEFAULT_A_RANGE, 42).unwrap();
        let b = random_standard_form(0.6, DEFAULT_A_RANGE, 42).unwrap();
        assert_eq!(a.as_array(), b.as_array());
    }

    #[test]
    fn random_standard_form_rejects_bad_purity() {
        assert!(random_standard_form(1.5, DEFAULT_A_RANGE, 0).is_err());
        assert!(random_standard_form(0.0, DEFAULT_A_RANGE, 0).is_err());
    }

    #[test]
    fn pure_target_forces_minimum_uncertainty() {
        // at purity 1 both symplectic eigenvalues must sit at 1/2
        let sig = random_standard_form(1.0, (0.5, 2.0), 3).unwrap();
        let (n1, n2) = gaussian::symplectic_eigenvalues(&sig).unwrap();
        assert!((n1 - 0.5).abs() < 1e-8 && (n2 - 0.5).abs() < 1e-8);
    }

    #[test]
    fn ssv_d_min_bisection_matches_target() {
        let mu = 0.6;
        let params = ssv_params_matching_d_min(mu, 0.3, 6.0).unwrap();
        let sig = sv_covariance(&params).unwrap();
        assert!((entanglement(&sig).unwrap().d_min - 0.3).abs() < 1e-9);
        assert!((purity(&sig).unwrap() - mu).abs() < 1e-12);
    }
}
