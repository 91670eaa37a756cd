//! Phase-space linear algebra for bosonic modes.
//!
//! Quadratures are ordered `q₁, p₁, …, qₙ, pₙ` and normalized so that the vacuum
//! covariance matrix is the identity (`[x_l, x_m] = 2iΩ_lm`).

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

use crate::dd::{self, DdMatrix};
use crate::error::{Result, TelesimError};
use crate::tolerance::Tolerances;

/// Pauli-Z in phase space, `diag(1, -1)`.
pub fn pauli_z() -> Matrix2<f64> {
    Matrix2::new(1.0, 0.0, 0.0, -1.0)
}

/// Single-mode symplectic form `[[0, 1], [-1, 0]]`.
pub fn omega2() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// Symplectic form on `n` modes.
pub fn symplectic_form(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(TelesimError::InvalidDimension("number of modes must be positive".into()));
    }
    let mut om = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    Ok(om)
}

fn modes_of(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(TelesimError::InvalidDimension(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(TelesimError::InvalidDimension(format!(
            "dimension {} is not a positive even number",
            m.nrows()
        )));
    }
    Ok(m.nrows() / 2)
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// True iff `max|MΩMᵀ − Ω| ≤ tol`.
pub fn is_symplectic(m: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let n = modes_of(m)?;
    let om = symplectic_form(n)?;
    Ok(max_abs(&(m * &om * m.transpose() - &om)) <= tol)
}

fn check_symmetric(cm: &DMatrix<f64>, tol: f64) -> Result<()> {
    if cm.iter().any(|x| !x.is_finite()) {
        return Err(TelesimError::Validation("matrix has non-finite entries".into()));
    }
    let asym = max_abs(&(cm - cm.transpose()));
    if asym > tol {
        return Err(TelesimError::Validation(format!(
            "matrix is not symmetric (max deviation {asym:e})"
        )));
    }
    Ok(())
}

/// Symplectic spectrum of a symmetric matrix, sorted in descending order.
///
/// The values are the moduli of the eigenvalues of `ΩV`. For one and two modes they
/// are obtained from the characteristic polynomial of `ΩV` in double-double
/// arithmetic, which keeps pure and strongly squeezed states accurate.
pub fn symplectic_eigenvalues(cm: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = modes_of(cm)?;
    check_symmetric(cm, Tolerances::default().symmetry)?;
    let mut nus = if n <= 2 {
        small_spectrum(cm)
    } else {
        let om = symplectic_form(n)?;
        let mut mods: Vec<f64> = (om * cm)
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect();
        mods.sort_by(|a, b| b.total_cmp(a));
        mods.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
    };
    nus.sort_by(|a, b| b.total_cmp(a));
    Ok(nus)
}

fn small_spectrum(cm: &DMatrix<f64>) -> Vec<f64> {
    let v = DdMatrix::from_f64(cm);
    if cm.nrows() == 2 {
        return vec![v.det().to_f64().abs().sqrt()];
    }
    let ov = DdMatrix::omega(4).mul(&v);
    let p = (ov.mul(&ov).trace() * -0.5).to_f64();
    let q = v.det().to_f64();
    let disc = p * p - 4.0 * q;
    if disc < 0.0 {
        // complex pair: both roots share the modulus √q
        let nu = q.abs().sqrt().sqrt();
        return vec![nu, nu];
    }
    let roots = dd::squared_symplectic_spectrum(&v);
    let big = roots[0].to_f64();
    let small = if big == 0.0 { 0.0 } else { q / big };
    vec![big.abs().sqrt(), small.abs().sqrt()]
}

/// Checks symmetry, positive definiteness and the uncertainty principle `ν_k ≥ 1 − tol`.
pub fn validate_cm(cm: &DMatrix<f64>, tol: &Tolerances) -> Result<()> {
    modes_of(cm)?;
    check_symmetric(cm, tol.symmetry)?;
    let sym = 0.5 * (cm + cm.transpose());
    if sym.clone().cholesky().is_none() {
        return Err(TelesimError::Validation("covariance matrix is not positive definite".into()));
    }
    let nus = symplectic_eigenvalues(&sym)?;
    let nu_min = nus.iter().cloned().fold(f64::INFINITY, f64::min);
    if nu_min < 1.0 - tol.uncertainty {
        return Err(TelesimError::Validation(format!(
            "uncertainty principle violated: smallest symplectic eigenvalue {nu_min}"
        )));
    }
    Ok(())
}

/// Gaussian state of `n` bosonic modes: first and second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cm: DMatrix<f64>,
}

impl GaussianState {
    /// Validated constructor using the default tolerances.
    pub fn new(mean: DVector<f64>, cm: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerances(mean, cm, &Tolerances::default())
    }

    pub fn with_tolerances(mean: DVector<f64>, cm: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let n = modes_of(&cm)?;
        if mean.len() != 2 * n {
            return Err(TelesimError::DimensionMismatch {
                expected: 2 * n,
                got: mean.len(),
            });
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(TelesimError::Validation("mean has non-finite entries".into()));
        }
        validate_cm(&cm, tol)?;
        Ok(Self { mean, cm })
    }

    /// Zero-mean state with the given CM.
    pub fn centered(cm: DMatrix<f64>) -> Result<Self> {
        let dim = cm.nrows();
        Self::new(DVector::zeros(dim), cm)
    }

    /// Skips validation; callers guarantee a physical CM.
    pub(crate) fn from_parts_unchecked(mean: DVector<f64>, cm: DMatrix<f64>) -> Self {
        Self { mean, cm }
    }

    pub fn vacuum(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(TelesimError::InvalidDimension("number of modes must be positive".into()));
        }
        Ok(Self {
            mean: DVector::zeros(2 * modes),
            cm: DMatrix::identity(2 * modes, 2 * modes),
        })
    }

    pub fn modes(&self) -> usize {
        self.cm.nrows() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cm(&self) -> &DMatrix<f64> {
        &self.cm
    }

    pub fn symplectic_spectrum(&self) -> Vec<f64> {
        symplectic_eigenvalues(&self.cm).unwrap_or_default()
    }

    /// True when every symplectic eigenvalue is within `tol` of one.
    pub fn is_pure(&self, tol: f64) -> bool {
        self.symplectic_spectrum().iter().all(|nu| (nu - 1.0).abs() <= tol)
    }

    /// Tensor product: the modes of `other` are appended after those of `self`.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (a, b) = (self.cm.nrows(), other.cm.nrows());
        let mut cm = DMatrix::zeros(a + b, a + b);
        cm.view_mut((0, 0), (a, a)).copy_from(&self.cm);
        cm.view_mut((a, a), (b, b)).copy_from(&other.cm);
        let mean = DVector::from_iterator(a + b, self.mean.iter().chain(other.mean.iter()).cloned());
        GaussianState { mean, cm }
    }
}

/// Matrix `S` with `SΩSᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix(DMatrix<f64>);

impl SymplecticMatrix {
    /// Validated constructor using the default symplectic tolerance.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::default().symplectic)
    }

    pub fn with_tolerance(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !is_symplectic(&m, tol)? {
            return Err(TelesimError::Validation("matrix is not symplectic".into()));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_unchecked(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn identity(modes: usize) -> Self {
        Self(DMatrix::identity(2 * modes, 2 * modes))
    }

    pub fn from_matrix2(m: &Matrix2<f64>) -> Result<Self> {
        Self::new(DMatrix::from_iterator(2, 2, m.iter().cloned()))
    }

    /// Phase rotation by `theta`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(DMatrix::from_row_slice(2, 2, &[c, s, -s, c]))
    }

    /// Single-mode squeezer `diag(r, 1/r)`.
    pub fn squeezer(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(TelesimError::domain("squeezing", r, "(0, ∞)"));
        }
        Ok(Self(DMatrix::from_row_slice(2, 2, &[r, 0.0, 0.0, 1.0 / r])))
    }

    /// Two-mode squeezer `[[cosh s·I, sinh s·Z], [sinh s·Z, cosh s·I]]`; maps the
    /// vacuum to a TMSV state with `μ = cosh 2s`.
    pub fn two_mode_squeezer(s: f64) -> Self {
        let (c, sh) = (s.cosh(), s.sinh());
        Self(DMatrix::from_row_slice(
            4,
            4,
            &[
                c, 0.0, sh, 0.0, //
                0.0, c, 0.0, -sh, //
                sh, 0.0, c, 0.0, //
                0.0, -sh, 0.0, c,
            ],
        ))
    }

    /// Beam splitter with transmissivity `tau ∈ [0, 1]`.
    pub fn beam_splitter(tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(TelesimError::domain("tau", tau, "[0, 1]"));
        }
        let (t, r) = (tau.sqrt(), (1.0 - tau).sqrt());
        Ok(Self(DMatrix::from_row_slice(
            4,
            4,
            &[
                t, 0.0, r, 0.0, //
                0.0, t, 0.0, r, //
                -r, 0.0, t, 0.0, //
                0.0, -r, 0.0, t,
            ],
        )))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.nrows() / 2
    }

    /// `S⁻¹ = -Ω Sᵀ Ω`.
    pub fn inverse(&self) -> Self {
        let om = symplectic_form(self.modes()).expect("symplectic matrices have at least one mode");
        Self(-(&om * self.0.transpose() * &om))
    }

    /// Matrix product `self · other`.
    pub fn then_after(&self, other: &SymplecticMatrix) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn direct_sum(&self, other: &SymplecticMatrix) -> Self {
        let (a, b) = (self.0.nrows(), other.0.nrows());
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.0);
        m.view_mut((a, a), (b, b)).copy_from(&other.0);
        Self(m)
    }
}

/// Thermal state with CM `ωI`, `ω = 2n̄ + 1`.
pub fn thermal_state(omega: f64) -> Result<GaussianState> {
    if !(omega >= 1.0 && omega.is_finite()) {
        return Err(TelesimError::domain("omega", omega, "[1, ∞)"));
    }
    Ok(GaussianState::from_parts_unchecked(
        DVector::zeros(2),
        DMatrix::identity(2, 2) * omega,
    ))
}

/// Covariance matrix of the two-mode squeezed vacuum with local variance `mu`.
pub fn tmsv_cm(mu: f64) -> Result<DMatrix<f64>> {
    if !(mu >= 1.0 && mu.is_finite()) {
        return Err(TelesimError::domain("mu", mu, "[1, ∞)"));
    }
    let c = ((mu - 1.0) * (mu + 1.0)).sqrt();
    Ok(DMatrix::from_row_slice(
        4,
        4,
        &[
            mu, 0.0, c, 0.0, //
            0.0, mu, 0.0, -c, //
            c, 0.0, mu, 0.0, //
            0.0, -c, 0.0, mu,
        ],
    ))
}

/// Two-mode squeezed vacuum state.
pub fn tmsv_state(mu: f64) -> Result<GaussianState> {
    Ok(GaussianState::from_parts_unchecked(DVector::zeros(4), tmsv_cm(mu)?))
}

/// `x ↦ Sx + d`, `V ↦ SVSᵀ`.
pub fn apply_affine(state: &GaussianState, s: &SymplecticMatrix, d: &DVector<f64>) -> Result<GaussianState> {
    let dim = state.cm.nrows();
    if s.0.nrows() != dim {
        return Err(TelesimError::DimensionMismatch {
            expected: dim,
            got: s.0.nrows(),
        });
    }
    if d.len() != dim {
        return Err(TelesimError::DimensionMismatch {
            expected: dim,
            got: d.len(),
        });
    }
    let cm = &s.0 * &state.cm * s.0.transpose();
    let cm = 0.5 * (&cm + cm.transpose());
    Ok(GaussianState::from_parts_unchecked(&s.0 * &state.mean + d, cm))
}

/// Reduced state of mode `keep` of a two-mode state.
pub fn partial_trace(state: &GaussianState, keep: usize) -> Result<GaussianState> {
    if state.modes() != 2 {
        return Err(TelesimError::InvalidDimension(format!(
            "partial trace expects a two-mode state, got {} modes",
            state.modes()
        )));
    }
    if keep > 1 {
        return Err(TelesimError::InvalidDimension(format!("mode index {keep} out of range")));
    }
    let o = 2 * keep;
    Ok(GaussianState::from_parts_unchecked(
        state.mean.rows(o, 2).into_owned(),
        state.cm.view((o, o), (2, 2)).into_owned(),
    ))
}

/// `S V Sᵀ = diag(ν₁, ν₁, …, νₙ, νₙ)` with `ν` in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonDecomposition {
    pub s: SymplecticMatrix,
    pub spectrum: Vec<f64>,
}

/// Williamson normal form of a positive-definite CM.
pub fn williamson(cm: &DMatrix<f64>) -> Result<WilliamsonDecomposition> {
    let n = modes_of(cm)?;
    check_symmetric(cm, Tolerances::default().symmetry)?;
    let sym = 0.5 * (cm + cm.transpose());
    let eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(TelesimError::Validation("covariance matrix is not positive definite".into()));
    }
    if n == 1 {
        return Ok(williamson_single(&eig));
    }

    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    let om = symplectic_form(n)?;
    let k = &inv_sqrt * &om * &inv_sqrt;
    let k = 0.5 * (&k - k.transpose());
    let k2 = &k * &k;
    let k2 = 0.5 * (&k2 + k2.transpose());
    let ke = SymmetricEigen::new(k2.clone());
    let mut order: Vec<usize> = (0..2 * n).collect();
    // -1/ν² closest to zero first gives descending ν
    order.sort_by(|&a, &b| ke.eigenvalues[b].total_cmp(&ke.eigenvalues[a]));

    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(2 * n);
    let mut spectrum = Vec::with_capacity(n);
    for idx in order {
        if rows.len() == 2 * n {
            break;
        }
        let mut u = ke.eigenvectors.column(idx).into_owned();
        orthogonalize(&mut u, &rows);
        let norm = u.norm();
        if norm < 0.5 {
            continue;
        }
        u /= norm;
        let rayleigh = -(u.transpose() * &k2 * &u)[(0, 0)];
        if rayleigh <= 0.0 {
            return Err(TelesimError::Numerical("degenerate symplectic spectrum".into()));
        }
        let nu = 1.0 / rayleigh.sqrt();
        let mut v = -nu * (&k * &u);
        rows.push(u);
        orthogonalize(&mut v, &rows);
        let vn = v.norm();
        v /= vn;
        rows.push(v);
        spectrum.push(nu);
    }
    if rows.len() != 2 * n {
        return Err(TelesimError::Numerical("Williamson basis construction failed".into()));
    }
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for (i, r) in rows.iter().enumerate() {
        o.set_row(i, &r.transpose());
    }
    let scale = DMatrix::from_diagonal(&DVector::from_iterator(
        2 * n,
        spectrum.iter().flat_map(|nu| [nu.sqrt(), nu.sqrt()]),
    ));
    let s = scale * o * inv_sqrt;
    Ok(WilliamsonDecomposition {
        s: SymplecticMatrix(s),
        spectrum,
    })
}

fn orthogonalize(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    // two passes of classical Gram-Schmidt are enough at this size
    for _ in 0..2 {
        for b in basis {
            let proj = b.dot(v);
            *v -= b * proj;
        }
    }
}

fn williamson_single(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> WilliamsonDecomposition {
    let (l0, l1) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let nu = (l0 * l1).sqrt();
    let mut rot = eig.eigenvectors.clone();
    if rot.determinant() < 0.0 {
        rot.column_mut(1).neg_mut();
    }
    // Rᵀ V R = diag(l0, l1); rescale each axis to ν
    let scale = DMatrix::from_row_slice(2, 2, &[(nu / l0).sqrt(), 0.0, 0.0, (nu / l1).sqrt()]);
    WilliamsonDecomposition {
        s: SymplecticMatrix(scale * rot.transpose()),
        spectrum: vec![nu],
    }
}

/// `S = O₁ · diag(r, 1/r) · O₂` with `O₁, O₂` rotations and `r ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochMessiah2x2 {
    pub o1: Matrix2<f64>,
    pub r: f64,
    pub o2: Matrix2<f64>,
}

impl BlochMessiah2x2 {
    pub fn squeezing(&self) -> Matrix2<f64> {
        Matrix2::new(self.r, 0.0, 0.0, 1.0 / self.r)
    }

    pub fn reconstruct(&self) -> Matrix2<f64> {
        self.o1 * self.squeezing() * self.o2
    }
}

/// Bloch-Messiah decomposition of a single-mode symplectic matrix.
///
/// Canonical gauge: `r ≥ 1` and `O₂[0,0] ≥ 0`; when `r = 1` the whole rotation sits in `O₁`.
pub fn bloch_messiah_2x2(s: &SymplecticMatrix) -> Result<BlochMessiah2x2> {
    if s.0.nrows() != 2 {
        return Err(TelesimError::InvalidDimension(
            "Bloch-Messiah decomposition is implemented for one mode".into(),
        ));
    }
    if !is_symplectic(&s.0, Tolerances::default().symplectic)? {
        return Err(TelesimError::Validation("matrix is not symplectic".into()));
    }
    let m = Matrix2::new(s.0[(0, 0)], s.0[(0, 1)], s.0[(1, 0)], s.0[(1, 1)]);
    let svd = m.svd(true, true);
    let (mut u, mut vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut sv = svd.singular_values;
    if sv[0] < sv[1] {
        sv.swap_rows(0, 1);
        u.swap_columns(0, 1);
        vt.swap_rows(0, 1);
    }
    let r = (sv[0] / sv[1]).sqrt();
    if r - 1.0 <= 1e-12 {
        return Ok(BlochMessiah2x2 {
            o1: m,
            r: 1.0,
            o2: Matrix2::identity(),
        });
    }
    if u.determinant() < 0.0 {
        let z = pauli_z();
        u *= z;
        vt = z * vt;
    }
    if vt[(0, 0)] < 0.0 {
        u = -u;
        vt = -vt;
    }
    Ok(BlochMessiah2x2 { o1: u, r, o2: vt })
}
