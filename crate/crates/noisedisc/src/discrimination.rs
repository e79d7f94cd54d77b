//! Joint-homodyne strip discrimination and the Gaussian bound suite.
//!
//! The discrimination statistic is the difference coordinate
//! `u = (q1 - q2)/√2` of a jointly measured quadrature pair: a shared field
//! displaces both modes identically, so `u` is noise-free under the common
//! channel while local noise inflates it. Inferring "common" inside the
//! strip `|u| <= T` turns the channel pair into a one-dimensional
//! variance-discrimination problem solved in closed form by error functions.
//!
//! The bound suite (Uhlmann fidelity bounds and the Chernoff quantity) is
//! evaluated directly from the covariance matrices; the Fock-space module
//! provides the independent oracle these formulas are validated against.

use ndarray::{array, Array2};
use num_complex::Complex64;

use crate::gaussian::{self, CovarianceMatrix, SymplecticForm, Williamson};
use crate::linalg;
use crate::{Error, Result};

/// A jointly measured pair of single-mode quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadraturePair {
    X1X2,
    P1P2,
    X1P2,
    P1X2,
}

impl QuadraturePair {
    pub const ALL: [QuadraturePair; 4] = [
        QuadraturePair::X1X2,
        QuadraturePair::P1P2,
        QuadraturePair::X1P2,
        QuadraturePair::P1X2,
    ];

    /// Indices into the (x1, p1, x2, p2) ordering.
    pub fn indices(&self) -> (usize, usize) {
        match self {
            QuadraturePair::X1X2 => (0, 2),
            QuadraturePair::P1P2 => (1, 3),
            QuadraturePair::X1P2 => (0, 3),
            QuadraturePair::P1X2 => (1, 2),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            QuadraturePair::X1X2 => "x1x2",
            QuadraturePair::P1P2 => "p1p2",
            QuadraturePair::X1P2 => "x1p2",
            QuadraturePair::P1X2 => "p1x2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|p| p.label() == s)
    }
}

/// Strip decision rule: infer the common channel when the joint outcome lies
/// within perpendicular distance `half_width` of the 45-degree line.
#[derive(Debug, Clone, Copy)]
pub struct StripPovm {
    pub pair: QuadraturePair,
    pub half_width: f64,
}

/// 2x2 covariance of the selected quadrature pair; the joint homodyne
/// outcome density is the zero-mean bivariate normal with this covariance.
pub fn quadrature_marginal(sigma: &CovarianceMatrix, pair: QuadraturePair) -> Array2<f64> {
    let (i, j) = pair.indices();
    array![
        [sigma.entry(i, i), sigma.entry(i, j)],
        [sigma.entry(j, i), sigma.entry(j, j)]
    ]
}

/// Variance of the difference coordinate `(q1 - q2)/√2` for the pair.
pub fn difference_variance(sigma: &CovarianceMatrix, pair: QuadraturePair) -> f64 {
    let (i, j) = pair.indices();
    0.5 * (sigma.entry(i, i) + sigma.entry(j, j)) - sigma.entry(i, j)
}

/// Probability that a centered normal with variance `v` lands in `[-t, t]`.
/// Zero variance is the limiting point mass at the origin.
fn band_probability(t: f64, v: f64) -> f64 {
    if v <= 0.0 {
        1.0
    } else {
        libm::erf(t / (2.0 * v).sqrt())
    }
}

/// Error probability of the strip rule at equal priors:
/// `p = (1/2) (1 - P_common(|u| <= T) + P_local(|u| <= T))`.
pub fn strip_error_probability(
    sigma_local: &CovarianceMatrix,
    sigma_common: &CovarianceMatrix,
    povm: &StripPovm,
) -> f64 {
    let v_local = difference_variance(sigma_local, povm.pair);
    let v_common = difference_variance(sigma_common, povm.pair);
    0.5 * (1.0 - band_probability(povm.half_width, v_common)
        + band_probability(povm.half_width, v_local))
}

/// Result of the half-width optimization. `half_width` is `None` when the
/// two hypotheses give the strip no discriminating power.
#[derive(Debug, Clone, Copy)]
pub struct StripOptimum {
    pub half_width: Option<f64>,
    pub error_probability: f64,
}

/// Minimize the strip error probability over the half-width.
///
/// With `v_L > v_C` the optimum is the equal-density crossing of the two
/// centered normals of `u`, `T*² = v_C v_L ln(v_L/v_C) / (v_L - v_C)`.
/// Degenerate variances (or a common-channel variance that is not smaller)
/// leave the best achievable error at 1/2.
pub fn optimize_strip(
    sigma_local: &CovarianceMatrix,
    sigma_common: &CovarianceMatrix,
    pair: QuadraturePair,
) -> StripOptimum {
    let v_local = difference_variance(sigma_local, pair);
    let v_common = difference_variance(sigma_common, pair);
    if !(v_common < v_local) || v_common <= 0.0 && v_local <= 0.0 {
        return StripOptimum {
            half_width: None,
            error_probability: 0.5,
        };
    }
    if v_common <= 0.0 {
        // point mass inside any strip: p = erf(T/sqrt(2 v_L))/2, minimized as T -> 0
        return StripOptimum {
            half_width: Some(0.0),
            error_probability: 0.0,
        };
    }
    let t_star =
        (v_common * v_local * (v_local / v_common).ln() / (v_local - v_common)).sqrt();
    let p_star = 0.5
        * (1.0 - band_probability(t_star, v_common) + band_probability(t_star, v_local));
    StripOptimum {
        half_width: Some(t_star),
        error_probability: p_star,
    }
}

/// Lower and upper error bounds from the fidelity,
/// `((1 - √(1-F))/2, √F / 2)`.
pub fn fidelity_bounds(fidelity: f64) -> (f64, f64) {
    let f = fidelity.clamp(0.0, 1.0);
    (0.5 * (1.0 - (1.0 - f).sqrt()), 0.5 * f.sqrt())
}

/// Uhlmann fidelity between two zero-mean two-mode Gaussian states, in the
/// squared (transition-probability) convention: `F(ρ, ρ) = 1` and
/// `F = |<ψ|φ>|²` on pure states.
pub fn gaussian_fidelity(
    sigma_a: &CovarianceMatrix,
    sigma_b: &CovarianceMatrix,
) -> Result<f64> {
    let omega = SymplecticForm::matrix();
    let vsum = sigma_a.as_array() + sigma_b.as_array();
    let det_vsum = linalg::det(&vsum)?;
    if det_vsum <= 0.0 {
        return Err(Error::NonPositiveDeterminant(det_vsum));
    }
    let vsum_inv = linalg::inv(&vsum)?;
    let core = &(omega.map(|x| 0.25 * x))
        + &sigma_b.as_array().dot(&omega).dot(sigma_a.as_array());
    let v_aux = omega.t().dot(&vsum_inv).dot(&core);
    let j = v_aux.dot(&omega);
    let j2_inv = linalg::inv(&j.dot(&j))?;
    let arg = &Array2::eye(4) + &j2_inv.map(|x| 0.25 * x);
    // only the determinant of 2(sqrt(arg) + 1) V_aux is needed, so work with
    // the eigenvalues of arg directly
    let mu = linalg::eigvals(&arg)?;
    let mut prod = Complex64::new(1.0, 0.0);
    for m in mu.iter() {
        if m.re < -1e-10 || m.im.abs() > 1e-8 * (1.0 + m.norm()) {
            return Err(Error::Linalg(format!(
                "non-PSD intermediate in fidelity: eigenvalue {m}"
            )));
        }
        let clamped = Complex64::new(m.re.max(0.0), m.im);
        prod *= 2.0 * (clamped.sqrt() + 1.0);
    }
    if prod.im.abs() > 1e-8 * (1.0 + prod.norm()) {
        return Err(Error::Linalg(format!(
            "fidelity determinant unexpectedly complex: {prod}"
        )));
    }
    let ftot4 = prod.re * linalg::det(&v_aux)?;
    let f_squared = (ftot4 / det_vsum).max(0.0).sqrt();
    Ok(f_squared.min(1.0))
}

/// A thermal-spectrum factor entering the Chernoff quantity:
/// `Tr[ρ_th(ν)^s] = 1/((n+1)^s - n^s)` with `n = ν - 1/2`.
fn thermal_power_trace(nu: f64, s: f64) -> f64 {
    let n = (nu - 0.5).max(0.0);
    if n <= 0.0 {
        1.0
    } else {
        1.0 / ((n + 1.0).powf(s) - n.powf(s))
    }
}

/// Symplectic eigenvalue of the normalized s-th power of a thermal state.
fn powered_eigenvalue(nu: f64, s: f64) -> f64 {
    let n = (nu - 0.5).max(0.0);
    if n <= 1e-15 {
        return 0.5;
    }
    let x = (n / (n + 1.0)).powf(s);
    (1.0 + x) / (2.0 * (1.0 - x))
}

fn powered_covariance(wd: &Williamson, s: f64) -> (f64, Array2<f64>) {
    let (nu1, nu2) = wd.eigenvalues;
    let prefactor = thermal_power_trace(nu1, s) * thermal_power_trace(nu2, s);
    let d = Array2::from_diag(&array![
        powered_eigenvalue(nu1, s),
        powered_eigenvalue(nu1, s),
        powered_eigenvalue(nu2, s),
        powered_eigenvalue(nu2, s)
    ]);
    let cov = wd.transform.dot(&d).dot(&wd.transform.t());
    (prefactor, cov)
}

/// `Tr[ρ_A^s ρ_B^{1-s}]` for Gaussian states via Williamson decompositions.
pub fn chernoff_quantity(
    sigma_a: &CovarianceMatrix,
    sigma_b: &CovarianceMatrix,
    s: f64,
) -> Result<f64> {
    let wa = gaussian::williamson(sigma_a)?;
    let wb = gaussian::williamson(sigma_b)?;
    chernoff_quantity_decomposed(&wa, &wb, s)
}

fn chernoff_quantity_decomposed(wa: &Williamson, wb: &Williamson, s: f64) -> Result<f64> {
    let (pa, va) = powered_covariance(wa, s);
    let (pb, vb) = powered_covariance(wb, 1.0 - s);
    let det = linalg::det(&(&va + &vb))?;
    if det <= 0.0 {
        return Err(Error::NonPositiveDeterminant(det));
    }
    Ok(pa * pb / det.sqrt())
}

/// Chernoff quantity with its minimizing exponent.
#[derive(Debug, Clone, Copy)]
pub struct ChernoffBound {
    /// `inf_s Tr[ρ_A^s ρ_B^{1-s}]`, in (0, 1].
    pub value: f64,
    pub s_star: f64,
}

/// Quantum Chernoff quantity, minimized over `s ∈ [0, 1]` by golden-section
/// search (the map `s -> ln Q_s` is convex, so the interior minimum is
/// unique when it exists; the endpoints approach 1).
pub fn qcb(sigma_a: &CovarianceMatrix, sigma_b: &CovarianceMatrix) -> Result<ChernoffBound> {
    let wa = gaussian::williamson(sigma_a)?;
    let wb = gaussian::williamson(sigma_b)?;
    let eval = |s: f64| chernoff_quantity_decomposed(&wa, &wb, s);

    let (mut lo, mut hi) = (1e-7, 1.0 - 1e-7);
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut s1 = hi - phi * (hi - lo);
    let mut s2 = lo + phi * (hi - lo);
    let mut f1 = eval(s1)?;
    let mut f2 = eval(s2)?;
    while hi - lo > 1e-8 {
        if f1 <= f2 {
            hi = s2;
            s2 = s1;
            f2 = f1;
            s1 = hi - phi * (hi - lo);
            f1 = eval(s1)?;
        } else {
            lo = s1;
            s1 = s2;
            f1 = f2;
            s2 = lo + phi * (hi - lo);
            f2 = eval(s2)?;
        }
    }
    let s_star = 0.5 * (lo + hi);
    let value = eval(s_star)?.min(1.0);
    Ok(ChernoffBound { value, s_star })
}

/// The full bound suite for one pair of hypothesis outputs.
#[derive(Debug, Clone, Copy)]
pub struct BoundSet {
    pub fidelity: f64,
    /// Fidelity lower bound on the error probability.
    pub lower: f64,
    /// Fidelity upper bound on the error probability.
    pub upper: f64,
    /// Chernoff quantity; `chernoff/2` upper-bounds the error probability.
    pub chernoff: f64,
    pub s_star: f64,
}

pub fn bound_set(sigma_a: &CovarianceMatrix, sigma_b: &CovarianceMatrix) -> Result<BoundSet> {
    let fidelity = gaussian_fidelity(sigma_a, sigma_b)?;
    let (lower, upper) = fidelity_bounds(fidelity);
    let chernoff = qcb(sigma_a, sigma_b)?;
    Ok(BoundSet {
        fidelity,
        lower,
        upper,
        chernoff: chernoff.value,
        s_star: chernoff.s_star,
    })
}
