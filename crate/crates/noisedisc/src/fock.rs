//! Brute-force truncated Fock-space oracle.
//!
//! Synthesizes the two-mode density matrix of any physical covariance matrix
//! (Williamson thermal spectrum + Bloch-Messiah layers of local squeezers
//! between two passive stages) and evaluates the discrimination quantities
//! that are closed-form at covariance level by direct matrix algebra:
//! Helstrom error probability, Uhlmann fidelity, and the Chernoff quantity
//! on an exponent grid. This is the independent route the Gaussian formulas
//! are validated against.
//!
//! States are synthesized on a working space `cutoff + margin` per mode and
//! truncated back to `cutoff`, which keeps the kept block accurate; the
//! reported trace deficit is the honest tail mass. Passive layers conserve
//! total photon number, so their exponentials are assembled sector by
//! sector. Memory scales as the fourth power of the cutoff (cutoff 20 means
//! 400x400 output matrices and ~1.5M-entry working matrices).

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::gaussian::{self, CovarianceMatrix};
use crate::linalg;
use crate::{Error, Result};

/// Default bound on the admissible truncation deficit `1 - Tr ρ`.
pub const DEFAULT_MAX_TRACE_DEFICIT: f64 = 1e-4;

/// Default working-space margin used during synthesis.
pub const DEFAULT_SYNTHESIS_MARGIN: usize = 15;

/// Eigenvalues below this are treated as exact zeros of the density matrix;
/// truncation junk in (0, 1e-12) otherwise explodes under small fractional
/// powers in the Chernoff grid.
const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Eigenvalues below `-NEGATIVE_EIGENVALUE_TOL` reject the density matrix.
const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-10;

/// Truncated two-mode density matrix in the product Fock basis
/// `|m⟩⊗|n⟩ ↦ m·cutoff + n`.
#[derive(Debug, Clone)]
pub struct FockDensity {
    cutoff: usize,
    matrix: Array2<Complex64>,
    trace_deficit: f64,
}

impl FockDensity {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    /// `1 - Tr ρ`, the mass lost to truncation.
    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// Symmetrized quadrature second moments `Tr[ρ (R_i R_j + R_j R_i)/2]`
    /// extracted from the truncated matrix.
    pub fn second_moments(&self) -> Result<Array2<f64>> {
        let d = self.cutoff;
        let quads = quadrature_operators(d);
        let mut sigma = Array2::<f64>::zeros((4, 4));
        for i in 0..4 {
            for j in i..4 {
                let prod = quads[i].dot(&quads[j]);
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d * d {
                    for l in 0..d * d {
                        acc += self.matrix[(k, l)] * prod[(l, k)];
                    }
                }
                // the symmetrized moment is the real part of Tr[ρ R_i R_j]
                sigma[(i, j)] = acc.re;
                sigma[(j, i)] = acc.re;
            }
        }
        Ok(sigma)
    }

    /// Joint outcome density `⟨x1, x2| ρ |x1, x2⟩` of a position-pair
    /// measurement, from the harmonic eigenfunctions at the given point.
    pub fn joint_position_density(&self, x1: f64, x2: f64) -> f64 {
        let psi1 = hermite_functions(x1, self.cutoff);
        let psi2 = hermite_functions(x2, self.cutoff);
        let d = self.cutoff;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..d {
            for n in 0..d {
                let vi = psi1[m] * psi2[n];
                if vi == 0.0 {
                    continue;
                }
                for mp in 0..d {
                    for np in 0..d {
                        let vj = psi1[mp] * psi2[np];
                        if vj != 0.0 {
                            acc += vi * vj * self.matrix[(m * d + n, mp * d + np)];
                        }
                    }
                }
            }
        }
        acc.re
    }
}

/// Harmonic-oscillator eigenfunctions at `x` for the vacuum-variance-1/2
/// convention, `ψ_0 = π^{-1/4} e^{-x²/2}` with the usual recurrence.
fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut psi = vec![0.0; count];
    if count == 0 {
        return psi;
    }
    psi[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if count > 1 {
        psi[1] = 2.0_f64.sqrt() * x * psi[0];
    }
    for m in 2..count {
        let mf = m as f64;
        psi[m] = (2.0 / mf).sqrt() * x * psi[m - 1] - ((mf - 1.0) / mf).sqrt() * psi[m - 2];
    }
    psi
}

fn annihilation(d: usize) -> Array2<Complex64> {
    let mut a = Array2::zeros((d, d));
    for m in 1..d {
        a[(m - 1, m)] = Complex64::new((m as f64).sqrt(), 0.0);
    }
    a
}

fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ra, ca) = (a.nrows(), a.ncols());
    let (rb, cb) = (b.nrows(), b.ncols());
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Two-mode quadrature operators (x1, p1, x2, p2) at the given cutoff.
fn quadrature_operators(d: usize) -> [Array2<Complex64>; 4] {
    let a = annihilation(d);
    let adag = a.t().mapv(|z| z.conj());
    let eye = Array2::<Complex64>::eye(d);
    let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let x = (&a + &adag).mapv(|z| z * inv_sqrt2);
    let p = (&a - &adag).mapv(|z| z * inv_sqrt2 * Complex64::new(0.0, -1.0));
    [
        kron(&x, &eye),
        kron(&p, &eye),
        kron(&eye, &x),
        kron(&eye, &p),
    ]
}

/// `exp(i H)` of a Hermitian matrix via its eigendecomposition.
fn expi_hermitian(h: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let (evals, evecs) = linalg::eigh_complex(h)?;
    let d = h.nrows();
    let mut scaled = evecs.clone();
    for (k, col) in scaled.columns_mut().into_iter().enumerate() {
        let phase = Complex64::new(0.0, evals[k]).exp();
        let mut col = col;
        col.mapv_inplace(|z| z * phase);
    }
    let adj = evecs.t().mapv(|z| z.conj());
    let mut out = Array2::zeros((d, d));
    ndarray::linalg::general_mat_mul(
        Complex64::new(1.0, 0.0),
        &scaled,
        &adj,
        Complex64::new(0.0, 0.0),
        &mut out,
    );
    Ok(out)
}

/// Single-mode squeezer `exp[r (a†² - a²)/2]`, which maps x to e^r x in the
/// Heisenberg picture.
fn squeeze_unitary(r: f64, d: usize) -> Result<Array2<Complex64>> {
    let a = annihilation(d);
    let a2 = a.dot(&a);
    let adag2 = a2.t().mapv(|z| z.conj());
    // K = r(a†² - a²)/2 is anti-Hermitian; exp(K) = exp(i(-iK))
    let h = (&adag2 - &a2).mapv(|z| z * Complex64::new(0.0, -0.5 * r));
    expi_hermitian(&h)
}

/// Hermitian generator of a 2x2 passive unitary: `u = exp(i h)`.
fn passive_generator(u: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    // eigendecomposition of a 2x2 unitary, robust to degeneracy
    let tr = u[0][0] + u[1][1];
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    if (l1 - l2).norm() < 1e-12 {
        // u = e^{iθ} I within rounding
        let theta = l1.arg();
        return [
            [Complex64::new(0.0, 0.0) + theta, Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0) + theta],
        ];
    }
    // eigenvector for each eigenvalue from the singular rows of (u - l)
    let vec_for = |l: Complex64| -> (Complex64, Complex64) {
        let r1 = (u[0][0] - l, u[0][1]);
        let r2 = (u[1][0], u[1][1] - l);
        let (a, b) = if r1.0.norm() + r1.1.norm() > r2.0.norm() + r2.1.norm() {
            (r1.1, -r1.0)
        } else {
            (r2.1, -r2.0)
        };
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        (a / n, b / n)
    };
    let v1 = vec_for(l1);
    let v2 = vec_for(l2);
    let (t1, t2) = (l1.arg(), l2.arg());
    // h = t1 v1 v1† + t2 v2 v2†, then re-Hermitized
    let mut h = [[Complex64::new(0.0, 0.0); 2]; 2];
    let vs = [(t1, v1), (t2, v2)];
    for (t, v) in vs {
        let col = [v.0, v.1];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] += t * col[i] * col[j].conj();
            }
        }
    }
    for i in 0..2 {
        h[i][i] = Complex64::new(h[i][i].re, 0.0);
    }
    let avg01 = 0.5 * (h[0][1] + h[1][0].conj());
    h[0][1] = avg01;
    h[1][0] = avg01.conj();
    h
}

/// Read the 2x2 complex unitary off an orthogonal symplectic matrix: each
/// mode block must have the form [[α, -β], [β, α]] with `u_jk = α + iβ`.
fn passive_unitary_matrix(o: &Array2<f64>) -> Result<[[Complex64; 2]; 2]> {
    let mut u = [[Complex64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            let al = o[(2 * j, 2 * k)];
            let be = o[(2 * j + 1, 2 * k)];
            let resid = (o[(2 * j, 2 * k + 1)] + be)
                .abs()
                .max((o[(2 * j + 1, 2 * k + 1)] - al).abs());
            if resid > 1e-8 {
                return Err(Error::Decomposition(format!(
                    "matrix is not orthogonal symplectic: block ({j},{k}) residual {resid:.3e}"
                )));
            }
            u[j][k] = Complex64::new(al, be);
        }
    }
    Ok(u)
}

/// Fock representation of a two-mode passive transform `a_j -> Σ u_jk a_k`,
/// assembled sector by sector (the generator conserves total photon number).
fn passive_unitary_fock(o: &Array2<f64>, d: usize) -> Result<Array2<Complex64>> {
    let u = passive_unitary_matrix(o)?;
    let h = passive_generator(u);
    let dim = d * d;
    let mut out = Array2::<Complex64>::zeros((dim, dim));
    for total in 0..=(2 * (d - 1)) {
        // member states |m, total - m⟩ with both occupations below the cutoff
        let m_lo = total.saturating_sub(d - 1);
        let m_hi = total.min(d - 1);
        let members: Vec<usize> = (m_lo..=m_hi).collect();
        let k = members.len();
        let mut hs = Array2::<Complex64>::zeros((k, k));
        for (i, &m) in members.iter().enumerate() {
            let n = total - m;
            hs[(i, i)] = h[0][0] * m as f64 + h[1][1] * n as f64;
            // a1† a2 : |m, n⟩ -> sqrt((m+1) n) |m+1, n-1⟩
            if i + 1 < k {
                let amp = (((m + 1) * n) as f64).sqrt();
                hs[(i + 1, i)] = h[0][1] * amp;
                hs[(i, i + 1)] = h[1][0] * amp;
            }
        }
        let us = expi_hermitian(&hs)?;
        for (i, &mi) in members.iter().enumerate() {
            let row = mi * d + (total - mi);
            for (j, &mj) in members.iter().enumerate() {
                let col = mj * d + (total - mj);
                out[(row, col)] = us[(i, j)];
            }
        }
    }
    Ok(out)
}

fn thermal_weights(n: f64, d: usize) -> Vec<f64> {
    if n <= 0.0 {
        let mut w = vec![0.0; d];
        w[0] = 1.0;
        return w;
    }
    let x = n / (n + 1.0);
    (0..d).map(|m| x.powi(m as i32) / (n + 1.0)).collect()
}

/// Synthesize the Fock density of a physical covariance matrix with full
/// control over the trace-deficit bound and the synthesis margin.
pub fn gaussian_to_fock_with(
    sigma: &CovarianceMatrix,
    cutoff: usize,
    max_deficit: f64,
    margin: usize,
) -> Result<FockDensity> {
    if cutoff < 2 {
        return Err(Error::InvalidParameter(format!(
            "cutoff must be at least 2, got {cutoff}"
        )));
    }
    if !gaussian::is_physical(sigma) {
        let (nu_min, _) = gaussian::symplectic_eigenvalues(sigma)?;
        return Err(Error::Unphysical { nu_min });
    }
    let wd = gaussian::williamson(sigma)?;
    let bm = gaussian::bloch_messiah(&wd.transform)?;
    let (nu1, nu2) = wd.eigenvalues;
    let (n1, n2) = ((nu1 - 0.5).max(0.0), (nu2 - 0.5).max(0.0));

    let dw = cutoff + margin;
    let w1 = thermal_weights(n1, dw);
    let w2 = thermal_weights(n2, dw);

    let outer = passive_unitary_fock(&bm.outer, dw)?;
    let inner = passive_unitary_fock(&bm.inner, dw)?;
    let sq = kron(
        &squeeze_unitary(bm.squeezes.0.ln(), dw)?,
        &squeeze_unitary(bm.squeezes.1.ln(), dw)?,
    );
    let total = outer.dot(&sq).dot(&inner);

    // ρ = U ρ_th U† with diagonal ρ_th: scale columns, then one product
    let mut scaled = total.clone();
    for (idx, mut col) in scaled.columns_mut().into_iter().enumerate() {
        let wgt = Complex64::new(w1[idx / dw] * w2[idx % dw], 0.0);
        col.mapv_inplace(|z| z * wgt);
    }
    let total_adj = total.t().mapv(|z| z.conj());
    let rho_work = scaled.dot(&total_adj);

    // truncate the working space back to the reported cutoff
    let dim = cutoff * cutoff;
    let mut rho = Array2::<Complex64>::zeros((dim, dim));
    for m in 0..cutoff {
        for n in 0..cutoff {
            let r = m * cutoff + n;
            let rw = m * dw + n;
            for mp in 0..cutoff {
                for np in 0..cutoff {
                    rho[(r, mp * cutoff + np)] = rho_work[(rw, mp * dw + np)];
                }
            }
        }
    }
    // Hermitize exactly
    let adj = rho.t().mapv(|z| z.conj());
    let rho = (&rho + &adj).mapv(|z| 0.5 * z);

    let trace: f64 = (0..dim).map(|i| rho[(i, i)].re).sum();
    let deficit = 1.0 - trace;
    if deficit > max_deficit {
        let x = (n1 / (n1 + 1.0)).max(n2 / (n2 + 1.0));
        let suggested = if x > 0.0 && x < 1.0 {
            ((0.5 * max_deficit).ln() / x.ln()).ceil() as usize
        } else {
            cutoff + margin
        };
        return Err(Error::CutoffTooSmall {
            cutoff,
            deficit,
            max_deficit,
            suggested: suggested.max(cutoff + 1),
        });
    }
    Ok(FockDensity {
        cutoff,
        matrix: rho,
        trace_deficit: deficit,
    })
}

/// Synthesize with the default deficit bound and margin.
pub fn gaussian_to_fock(sigma: &CovarianceMatrix, cutoff: usize) -> Result<FockDensity> {
    gaussian_to_fock_with(
        sigma,
        cutoff,
        DEFAULT_MAX_TRACE_DEFICIT,
        DEFAULT_SYNTHESIS_MARGIN,
    )
}

/// Trace distance and Helstrom error probability.
#[derive(Debug, Clone, Copy)]
pub struct Helstrom {
    pub trace_distance: f64,
    pub error_probability: f64,
}

/// Minimum-error discrimination of two density matrices at equal priors:
/// `T = (1/2) Σ |eig(ρ_B - ρ_A)|`, `Pe = (1 - T)/2`.
pub fn helstrom(rho_a: &FockDensity, rho_b: &FockDensity) -> Result<Helstrom> {
    if rho_a.cutoff != rho_b.cutoff {
        return Err(Error::CutoffMismatch(rho_a.cutoff, rho_b.cutoff));
    }
    let diff = &rho_b.matrix - &rho_a.matrix;
    let (evals, _) = linalg::eigh_complex(&diff)?;
    let t = 0.5 * evals.iter().map(|e| e.abs()).sum::<f64>();
    let t = t.min(1.0);
    Ok(Helstrom {
        trace_distance: t,
        error_probability: 0.5 * (1.0 - t),
    })
}

/// Fidelity and Chernoff grid evaluated directly in Fock space.
#[derive(Debug, Clone)]
pub struct OracleBounds {
    /// Squared-convention Uhlmann fidelity.
    pub fidelity: f64,
    /// `(s, Tr[ρ_A^s ρ_B^{1-s}])` samples on the interior grid.
    pub chernoff_grid: Vec<(f64, f64)>,
    pub chernoff_min: f64,
    pub chernoff_s_star: f64,
    /// Number of eigenvalues clipped to zero across both inputs.
    pub clipped_eigenvalues: usize,
}

fn clipped_spectrum(rho: &FockDensity) -> Result<(Array1<f64>, Array2<Complex64>, usize)> {
    let (mut evals, evecs) = linalg::eigh_complex(&rho.matrix)?;
    let mut clipped = 0usize;
    for e in evals.iter_mut() {
        if *e < -NEGATIVE_EIGENVALUE_TOL {
            return Err(Error::NegativeEigenvalue(*e));
        }
        if *e < EIGENVALUE_FLOOR {
            if *e != 0.0 {
                clipped += 1;
            }
            *e = 0.0;
        }
    }
    Ok((evals, evecs, clipped))
}

/// Fidelity (squared convention) and the Chernoff quantity on the grid
/// `s ∈ {0.01, 0.02, …, 0.99}`.
pub fn oracle_bounds(rho_a: &FockDensity, rho_b: &FockDensity) -> Result<OracleBounds> {
    if rho_a.cutoff != rho_b.cutoff {
        return Err(Error::CutoffMismatch(rho_a.cutoff, rho_b.cutoff));
    }
    let (ea, ua, ca) = clipped_spectrum(rho_a)?;
    let (eb, ub, cb) = clipped_spectrum(rho_b)?;
    let dim = ea.len();

    // fidelity via Hermitian square roots
    let mut sqrt_a = ua.clone();
    for (k, mut col) in sqrt_a.columns_mut().into_iter().enumerate() {
        let r = Complex64::new(ea[k].sqrt(), 0.0);
        col.mapv_inplace(|z| z * r);
    }
    let ua_adj = ua.t().mapv(|z| z.conj());
    let sqrt_a = sqrt_a.dot(&ua_adj);
    let m = sqrt_a.dot(&rho_b.matrix).dot(&sqrt_a);
    let m = {
        let adj = m.t().mapv(|z| z.conj());
        (&m + &adj).mapv(|z| 0.5 * z)
    };
    let (em, _) = linalg::eigh_complex(&m)?;
    let f_amp: f64 = em.iter().map(|e| e.max(0.0).sqrt()).sum();
    let fidelity = (f_amp * f_amp).min(1.0);

    // Chernoff grid through the eigenbasis overlap weights
    let ub_adj_cols = ub;
    let overlap = ua_adj.dot(&ub_adj_cols);
    let mut weights = Array2::<f64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            weights[(i, j)] = overlap[(i, j)].norm_sqr();
        }
    }
    let mut grid = Vec::with_capacity(99);
    let mut best = (0.0_f64, f64::INFINITY);
    for k in 1..100 {
        let s = k as f64 / 100.0;
        let pa: Vec<f64> = ea.iter().map(|e| if *e > 0.0 { e.powf(s) } else { 0.0 }).collect();
        let pb: Vec<f64> = eb
            .iter()
            .map(|e| if *e > 0.0 { e.powf(1.0 - s) } else { 0.0 })
            .collect();
        let mut q = 0.0;
        for i in 0..dim {
            if pa[i] == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for j in 0..dim {
                row += weights[(i, j)] * pb[j];
            }
            q += pa[i] * row;
        }
        grid.push((s, q));
        if q < best.1 {
            best = (s, q);
        }
    }
    Ok(OracleBounds {
        fidelity,
        chernoff_grid: grid,
        chernoff_min: best.1,
        chernoff_s_star: best.0,
        clipped_eigenvalues: ca + cb,
    })
}
