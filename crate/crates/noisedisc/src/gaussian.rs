//! Two-mode Gaussian states in the covariance-matrix picture.
//!
//! A zero-mean two-mode Gaussian state is fully described by the 4x4 real
//! symmetric matrix of quadrature second moments, ordered `(x1, p1, x2, p2)`
//! with vacuum variance 1/2. This module holds the matrix type, its scalar
//! functionals (physicality, purity, energy, entanglement), the reduction to
//! standard form by local symplectic operations, and the Williamson and
//! Bloch-Messiah decompositions used by the bound suite and the Fock oracle.

use ndarray::{array, s, Array1, Array2};

use crate::linalg;
use crate::{Error, Result};

/// Matrix dimension of a two-mode covariance matrix.
pub const DIM: usize = 4;

/// Tolerance on the smallest symplectic eigenvalue when testing physicality.
pub const TOL_PHYSICAL: f64 = 1e-9;

/// Tolerance for standard-form reduction residuals and round trips.
pub const TOL_STANDARD_FORM: f64 = 1e-8;

/// The two-mode symplectic form in `(x1, p1, x2, p2)` ordering: the direct
/// sum of two single-mode blocks `[[0, 1], [-1, 0]]`.
pub struct SymplecticForm;

impl SymplecticForm {
    pub fn matrix() -> Array2<f64> {
        array![
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.0],
        ]
    }
}

/// 4x4 real symmetric covariance matrix of a zero-mean two-mode state.
///
/// Construction symmetrizes the input exactly after rejecting anything with
/// asymmetry above 1e-12, so `m[(i, j)] == m[(j, i)]` holds bitwise on every
/// instance. Physicality is *not* enforced at construction: partial
/// transposes and other intermediate matrices are legitimate values.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    m: Array2<f64>,
}

impl CovarianceMatrix {
    pub fn from_array(m: Array2<f64>) -> Result<Self> {
        if m.nrows() != DIM || m.ncols() != DIM {
            return Err(Error::BadShape {
                expected: DIM,
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let asym = (0..DIM)
            .flat_map(|i| (0..DIM).map(move |j| (i, j)))
            .fold(0.0_f64, |acc, (i, j)| {
                acc.max((m[(i, j)] - m[(j, i)]).abs())
            });
        if asym > 1e-12 {
            return Err(Error::NotSymmetric(asym));
        }
        let sym = 0.5 * (&m + &m.t());
        Ok(Self { m: sym })
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        let mut m = Array2::zeros((DIM, DIM));
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Self::from_array(m)
    }

    /// Vacuum state: (1/2) I.
    pub fn vacuum() -> Self {
        Self {
            m: Array2::eye(DIM) * 0.5,
        }
    }

    /// Product of two single-mode thermal states with the given mean photon
    /// numbers: diag(n1 + 1/2, n1 + 1/2, n2 + 1/2, n2 + 1/2).
    pub fn thermal_product(n1: f64, n2: f64) -> Result<Self> {
        if n1 < 0.0 || n2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "thermal photon numbers must be non-negative, got ({n1}, {n2})"
            )));
        }
        let mut m = Array2::zeros((DIM, DIM));
        m[(0, 0)] = n1 + 0.5;
        m[(1, 1)] = n1 + 0.5;
        m[(2, 2)] = n2 + 0.5;
        m[(3, 3)] = n2 + 0.5;
        Ok(Self { m })
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    /// Mode-1 diagonal block.
    pub fn block_a(&self) -> Array2<f64> {
        self.m.slice(s![0..2, 0..2]).to_owned()
    }

    /// Mode-2 diagonal block.
    pub fn block_b(&self) -> Array2<f64> {
        self.m.slice(s![2..4, 2..4]).to_owned()
    }

    /// Cross-mode coupling block (rows mode 1, columns mode 2).
    pub fn block_c(&self) -> Array2<f64> {
        self.m.slice(s![0..2, 2..4]).to_owned()
    }

    /// Congruence transform `M σ Mᵀ` for a 4x4 matrix M.
    pub fn congruence(&self, m: &Array2<f64>) -> Result<Self> {
        Self::from_array(m.dot(&self.m).dot(&m.t()))
    }
}

/// Scalar functionals of a physical state, bundled.
#[derive(Debug, Clone, Copy)]
pub struct StateScalars {
    pub purity: f64,
    pub energy: f64,
    /// Symplectic spectrum, ascending.
    pub symplectic: (f64, f64),
    /// Smallest symplectic eigenvalue of the partial transpose.
    pub d_min: f64,
    /// Logarithmic negativity, natural log.
    pub log_negativity: f64,
}

/// Entanglement summary from the partial-transpose symplectic spectrum.
#[derive(Debug, Clone, Copy)]
pub struct Entanglement {
    /// Smallest symplectic eigenvalue of the partially transposed matrix;
    /// the state is entangled iff this is below 1/2.
    pub d_min: f64,
    /// max{0, -ln(2 d_min)}.
    pub log_negativity: f64,
}

/// Symplectic eigenvalues of a symmetric 4x4 matrix, ascending.
///
/// Computed as the moduli of the eigenvalues of `Ω σ`, which come in
/// conjugate pairs `±iν`; each pair is deduplicated by averaging.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<(f64, f64)> {
    let prod = SymplecticForm::matrix().dot(sigma.as_array());
    let vals = linalg::eigvals(&prod)?;
    let mut mods: Vec<f64> = vals.iter().map(|z| z.norm()).collect();
    mods.sort_by(|a, b| a.partial_cmp(b).expect("finite moduli"));
    Ok((0.5 * (mods[0] + mods[1]), 0.5 * (mods[2] + mods[3])))
}

/// True iff `σ + (i/2) Ω ⪰ 0`, i.e. σ is PSD and its smallest symplectic
/// eigenvalue is at least `1/2 - TOL_PHYSICAL`.
pub fn is_physical(sigma: &CovarianceMatrix) -> bool {
    let min_eig = match linalg::min_sym_eigenvalue(sigma.as_array()) {
        Ok(e) => e,
        Err(_) => return false,
    };
    if min_eig < -TOL_PHYSICAL {
        return false;
    }
    match symplectic_eigenvalues(sigma) {
        Ok((nu1, _)) => nu1 >= 0.5 - TOL_PHYSICAL,
        Err(_) => false,
    }
}

/// Purity `1 / (4 √det σ)`.
pub fn purity(sigma: &CovarianceMatrix) -> Result<f64> {
    let d = linalg::det(sigma.as_array())?;
    if d <= 0.0 {
        return Err(Error::NonPositiveDeterminant(d));
    }
    Ok(1.0 / (4.0 * d.sqrt()))
}

/// Mean total photon number `Tr(σ)/2 - 1`.
pub fn energy(sigma: &CovarianceMatrix) -> f64 {
    let tr: f64 = (0..DIM).map(|i| sigma.entry(i, i)).sum();
    0.5 * tr - 1.0
}

/// Smallest partial-transpose symplectic eigenvalue and log-negativity.
///
/// The partial transpose acts on mode 2 as `Λ σ Λ` with `Λ = diag(1,1,1,-1)`.
pub fn entanglement(sigma: &CovarianceMatrix) -> Result<Entanglement> {
    let mut pt = sigma.as_array().clone();
    for i in 0..DIM {
        pt[(3, i)] = -pt[(3, i)];
        pt[(i, 3)] = -pt[(i, 3)];
    }
    let pt = CovarianceMatrix::from_array(pt)?;
    let (d_min, _) = symplectic_eigenvalues(&pt)?;
    Ok(Entanglement {
        d_min,
        log_negativity: (-(2.0 * d_min).ln()).max(0.0),
    })
}

/// All scalar functionals at once.
pub fn state_scalars(sigma: &CovarianceMatrix) -> Result<StateScalars> {
    let symplectic = symplectic_eigenvalues(sigma)?;
    let ent = entanglement(sigma)?;
    Ok(StateScalars {
        purity: purity(sigma)?,
        energy: energy(sigma),
        symplectic,
        d_min: ent.d_min,
        log_negativity: ent.log_negativity,
    })
}

/// Per-mode 2x2 symplectic operations recorded by the standard-form
/// reduction, with `σ_std = L σ Lᵀ` for `L = mode1 ⊕ mode2`.
#[derive(Debug, Clone)]
pub struct LocalSymplectics {
    pub mode1: Array2<f64>,
    pub mode2: Array2<f64>,
}

impl LocalSymplectics {
    /// The full 4x4 direct-sum matrix.
    pub fn as_four_mode(&self) -> Array2<f64> {
        let mut l = Array2::zeros((DIM, DIM));
        l.slice_mut(s![0..2, 0..2]).assign(&self.mode1);
        l.slice_mut(s![2..4, 2..4]).assign(&self.mode2);
        l
    }

    pub fn apply(&self, sigma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
        sigma.congruence(&self.as_four_mode())
    }
}

/// Diagonal entries of a standard-form matrix: diag blocks `a I`, `b I`,
/// coupling block `diag(c, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardFormCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl StandardFormCoefficients {
    pub fn matrix(&self) -> CovarianceMatrix {
        CovarianceMatrix::from_rows([
            [self.a, 0.0, self.c, 0.0],
            [0.0, self.a, 0.0, self.d],
            [self.c, 0.0, self.b, 0.0],
            [0.0, self.d, 0.0, self.b],
        ])
        .expect("standard-form pattern is symmetric")
    }
}

/// Read the `(a, b, c, d)` coefficients off a matrix already in standard
/// form; rejects matrices whose off-pattern entries exceed `tol` or whose
/// diagonal blocks are not multiples of the identity within `tol`.
pub fn standard_form_coefficients(
    sigma: &CovarianceMatrix,
    tol: f64,
) -> Result<StandardFormCoefficients> {
    let m = sigma.as_array();
    let pattern = [
        (0usize, 0usize),
        (1, 1),
        (2, 2),
        (3, 3),
        (0, 2),
        (2, 0),
        (1, 3),
        (3, 1),
    ];
    for i in 0..DIM {
        for j in 0..DIM {
            if !pattern.contains(&(i, j)) && m[(i, j)].abs() > tol {
                return Err(Error::InvalidParameter(format!(
                    "matrix is not in standard form: entry ({i},{j}) = {:.3e}",
                    m[(i, j)]
                )));
            }
        }
    }
    if (m[(0, 0)] - m[(1, 1)]).abs() > tol || (m[(2, 2)] - m[(3, 3)]).abs() > tol {
        return Err(Error::InvalidParameter(
            "matrix is not in standard form: unequal x/p variances".into(),
        ));
    }
    Ok(StandardFormCoefficients {
        a: m[(0, 0)],
        b: m[(2, 2)],
        c: m[(0, 2)],
        d: m[(1, 3)],
    })
}

/// 2x2 symplectic (det 1) taking a SPD block to `√det(blk) · I`.
fn local_isotropizer(blk: &Array2<f64>) -> Result<Array2<f64>> {
    let (e, v) = linalg::eigh(blk)?;
    if e[0] <= 1e-14 {
        return Err(Error::SingularLocalBlock);
    }
    // make the eigenvector basis a proper rotation
    let mut rot = v.clone();
    if linalg::det(&rot)? < 0.0 {
        rot[(0, 1)] = -rot[(0, 1)];
        rot[(1, 1)] = -rot[(1, 1)];
    }
    let gm = (e[0] * e[1]).sqrt();
    let t = array![[(gm / e[0]).sqrt(), 0.0], [0.0, (gm / e[1]).sqrt()]];
    Ok(t.dot(&rot.t()))
}

/// Signed SVD of a real 2x2 with proper rotations only:
/// `m = u · diag(s1, s2) · vᵀ`, `u, v ∈ SO(2)`, `s1 ≥ |s2|`, `s1 ≥ 0`,
/// and `sign(s2) = sign(det m)`.
fn rotation_svd_2x2(m: &Array2<f64>) -> (Array2<f64>, Array2<f64>, (f64, f64)) {
    let (w, x, y, z) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let e = 0.5 * (w + z);
    let f = 0.5 * (w - z);
    let g = 0.5 * (y + x);
    let h = 0.5 * (y - x);
    let q = (e * e + h * h).sqrt();
    let r = (f * f + g * g).sqrt();
    let s1 = q + r;
    let s2 = q - r;
    let angle_sum = g.atan2(f); // theta_u + theta_v
    let angle_diff = h.atan2(e); // theta_u - theta_v
    let theta_u = 0.5 * (angle_sum + angle_diff);
    let theta_v = 0.5 * (angle_sum - angle_diff);
    let rot = |t: f64| array![[t.cos(), -t.sin()], [t.sin(), t.cos()]];
    (rot(theta_u), rot(theta_v), (s1, s2))
}

/// Reduce a covariance matrix to standard form by local symplectic
/// operations, returning the reduced matrix and the operations applied.
///
/// The sign convention on the coupling is `c ≥ |d|`, `c ≥ 0`, with the sign
/// of `d` fixed by the local invariant `det C`. Local operations preserve
/// purity and the partial-transpose spectrum but generally not the energy.
pub fn to_standard_form(
    sigma: &CovarianceMatrix,
) -> Result<(CovarianceMatrix, LocalSymplectics)> {
    let s1 = local_isotropizer(&sigma.block_a())?;
    let s2 = local_isotropizer(&sigma.block_b())?;
    let a = linalg::det(&sigma.block_a())?.sqrt();
    let b = linalg::det(&sigma.block_b())?.sqrt();
    let c_rot = s1.dot(&sigma.block_c()).dot(&s2.t());
    let (u, v, (c, d)) = rotation_svd_2x2(&c_rot);
    let l1 = u.t().dot(&s1);
    let l2 = v.t().dot(&s2);
    let ops = LocalSymplectics { mode1: l1, mode2: l2 };
    let coeffs = StandardFormCoefficients { a, b, c, d };
    let std = coeffs.matrix();
    // the analytic pattern must agree with the explicit congruence
    let applied = ops.apply(sigma)?;
    let resid = linalg::max_abs(&(applied.as_array() - std.as_array()));
    if resid > TOL_STANDARD_FORM {
        return Err(Error::Decomposition(format!(
            "standard-form residual {resid:.3e} exceeds {TOL_STANDARD_FORM:.1e}"
        )));
    }
    Ok((std, ops))
}

/// Williamson decomposition `σ = S · diag(ν1, ν1, ν2, ν2) · Sᵀ`.
#[derive(Debug, Clone)]
pub struct Williamson {
    /// Symplectic transform S with `Sᵀ Ω S = Ω`.
    pub transform: Array2<f64>,
    /// Symplectic eigenvalues, ascending.
    pub eigenvalues: (f64, f64),
}

/// Decompose a symmetric positive-definite matrix into symplectic-thermal
/// form. Works through the skew-symmetric kernel `K = σ^{1/2} Ω σ^{1/2}`,
/// pairing each eigenplane of `-K²` via `b = -K a / κ`, which stays exact
/// under degenerate symplectic spectra.
pub fn williamson(sigma: &CovarianceMatrix) -> Result<Williamson> {
    let (evals, _) = linalg::eigh(sigma.as_array())?;
    if evals[0] <= 0.0 {
        return Err(Error::Decomposition(format!(
            "matrix not positive definite: min eigenvalue {:.3e}",
            evals[0]
        )));
    }
    let shalf = linalg::sym_sqrt(sigma.as_array(), 0.0)?;
    let omega = SymplecticForm::matrix();
    let k = shalf.dot(&omega).dot(&shalf);
    let m = k.dot(&k.t()); // = -K², SPD with doubly degenerate spectrum
    let (_, mv) = linalg::eigh(&m)?;

    let mut pair_basis: Vec<Array1<f64>> = Vec::with_capacity(4);
    let mut pairs: Vec<(f64, Array1<f64>, Array1<f64>)> = Vec::with_capacity(2);
    for j in 0..DIM {
        if pairs.len() == 2 {
            break;
        }
        let mut v = mv.column(j).to_owned();
        for basis_vec in &pair_basis {
            let overlap = v.dot(basis_vec);
            v = &v - &(basis_vec * overlap);
        }
        let nrm = linalg::norm2(&v);
        if nrm < 1e-8 {
            continue; // column lies in an already-built pair plane
        }
        let a = v / nrm;
        let ka = k.dot(&a);
        let kappa = linalg::norm2(&ka);
        if kappa < 1e-14 {
            return Err(Error::Decomposition(
                "vanishing symplectic eigenvalue".into(),
            ));
        }
        let b = -&ka / kappa;
        pair_basis.push(a.clone());
        pair_basis.push(b.clone());
        pairs.push((kappa, a, b));
    }
    if pairs.len() != 2 {
        return Err(Error::Decomposition(
            "failed to pair the symplectic eigenplanes".into(),
        ));
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite eigenvalues"));

    let mut ortho = Array2::<f64>::zeros((DIM, DIM));
    let mut dinv_half = Array2::<f64>::zeros((DIM, DIM));
    for (slot, (kappa, a, b)) in pairs.iter().enumerate() {
        ortho.column_mut(2 * slot).assign(a);
        ortho.column_mut(2 * slot + 1).assign(b);
        let inv_sqrt = 1.0 / kappa.sqrt();
        dinv_half[(2 * slot, 2 * slot)] = inv_sqrt;
        dinv_half[(2 * slot + 1, 2 * slot + 1)] = inv_sqrt;
    }
    let transform = shalf.dot(&ortho).dot(&dinv_half);
    let decomposition = Williamson {
        transform: transform.clone(),
        eigenvalues: (pairs[0].0, pairs[1].0),
    };

    // residual guards: S D Sᵀ = σ and Sᵀ Ω S = Ω
    let d_diag = Array2::from_diag(&array![
        pairs[0].0, pairs[0].0, pairs[1].0, pairs[1].0
    ]);
    let r1 = linalg::max_abs(&(&transform.dot(&d_diag).dot(&transform.t()) - sigma.as_array()));
    let r2 = linalg::max_abs(&(&transform.t().dot(&omega).dot(&transform) - &omega));
    if r1 > 1e-8 || r2 > 1e-8 {
        return Err(Error::Decomposition(format!(
            "Williamson residuals too large: state {r1:.3e}, symplectic {r2:.3e}"
        )));
    }
    Ok(decomposition)
}

/// Bloch-Messiah factorization of a symplectic matrix:
/// `S = outer · diag(z1, 1/z1, z2, 1/z2) · inner` with `outer`, `inner`
/// orthogonal symplectic (passive) and `z1, z2 ≥ 1` local squeeze factors.
#[derive(Debug, Clone)]
pub struct BlochMessiah {
    pub outer: Array2<f64>,
    pub squeezes: (f64, f64),
    pub inner: Array2<f64>,
}

pub fn bloch_messiah(s: &Array2<f64>) -> Result<BlochMessiah> {
    if s.nrows() != DIM || s.ncols() != DIM {
        return Err(Error::BadShape {
            expected: DIM,
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    let omega = SymplecticForm::matrix();
    // polar split: P = sqrt(S Sᵀ) is symmetric positive-definite symplectic,
    // W = P⁻¹ S is orthogonal symplectic
    let p = linalg::sym_sqrt(&s.dot(&s.t()), 0.0)?;
    let w = linalg::inv(&p)?.dot(s);

    // Eigenvalues of P come in (z, 1/z) pairs with Ω mapping one eigenspace
    // into the other; pick z ≥ 1 representatives and pair u with -Ω u.
    let (pe, pv) = linalg::eigh(&p)?;
    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(4);
    let mut planes: Vec<(f64, Array1<f64>, Array1<f64>)> = Vec::with_capacity(2);
    for j in (0..DIM).rev() {
        if planes.len() == 2 {
            break;
        }
        if pe[j] < 1.0 - 1e-9 {
            continue;
        }
        let mut u = pv.column(j).to_owned();
        for bvec in &basis {
            let overlap = u.dot(bvec);
            u = &u - &(bvec * overlap);
        }
        let nrm = linalg::norm2(&u);
        if nrm < 1e-8 {
            continue;
        }
        let u = u / nrm;
        let v = -omega.dot(&u);
        basis.push(u.clone());
        basis.push(v.clone());
        planes.push((pe[j].max(1.0), u, v));
    }
    if planes.len() != 2 {
        return Err(Error::Decomposition(
            "failed to pair the squeeze eigenplanes".into(),
        ));
    }
    let mut outer = Array2::<f64>::zeros((DIM, DIM));
    let mut z_diag = Array2::<f64>::zeros((DIM, DIM));
    for (slot, (z, u, v)) in planes.iter().enumerate() {
        outer.column_mut(2 * slot).assign(u);
        outer.column_mut(2 * slot + 1).assign(v);
        z_diag[(2 * slot, 2 * slot)] = *z;
        z_diag[(2 * slot + 1, 2 * slot + 1)] = 1.0 / z;
    }
    let inner = outer.t().dot(&w);
    let resid = linalg::max_abs(&(&outer.dot(&z_diag).dot(&inner) - s));
    if resid > 1e-8 {
        return Err(Error::Decomposition(format!(
            "Bloch-Messiah residual {resid:.3e}"
        )));
    }
    Ok(BlochMessiah {
        outer,
        squeezes: (z_diag[(0, 0)], z_diag[(2, 2)]),
        inner,
    })
}
