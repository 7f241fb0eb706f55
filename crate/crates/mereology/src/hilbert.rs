//! Dense complex linear-algebra substrate: operators, states, tensor
//! products, partial traces, spectral evolution, and entropy primitives.
//!
//! Conventions fixed here and relied on everywhere else:
//!
//! - Composite indices follow `(i_a, i_b) -> i_a * d_b + i_b`, i.e. the A
//!   factor is the slow index. Kronecker products and partial traces must
//!   agree on this or nothing downstream is consistent.
//! - All operator norms are Frobenius (Hilbert-Schmidt) norms.
//! - `hbar = 1`; evolution is by `exp(-i H t)`, computed spectrally.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Entrywise tolerance for predicate checks (Hermiticity, unitarity, ...).
pub const PREDICATE_TOL: f64 = 1e-10;
/// Tolerance for exact algebraic identities at double precision.
pub const EXACT_TOL: f64 = 1e-12;

/// A dense square operator on a finite-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amp: DVector<C64>,
}

/// A density matrix: Hermitian, unit trace, nonnegative spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
}

/// Dimensions of a bipartite split `d_a * d_b = D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BipartiteShape {
    pub d_a: usize,
    pub d_b: usize,
}

/// Which factor a partial trace keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

impl BipartiteShape {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidDimension(
                "bipartite factors must have positive dimension".into(),
            ));
        }
        Ok(Self { d_a, d_b })
    }

    pub fn total(&self) -> usize {
        self.d_a * self.d_b
    }

    /// Composite index of `(i_a, i_b)`.
    pub fn index(&self, i_a: usize, i_b: usize) -> usize {
        i_a * self.d_b + i_b
    }

    fn check_total(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(Error::DimensionMismatch(format!(
                "shape {}x{} does not match dimension {}",
                self.d_a, self.d_b, dim
            )));
        }
        Ok(())
    }
}

impl Operator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::InvalidDimension(format!(
                "operator must be square and nonempty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { mat })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        Self {
            mat: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self {
            mat: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.diagonal().sum()
    }

    /// Frobenius (Hilbert-Schmidt) norm. This is the operator norm used
    /// throughout the crate.
    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            mat: &self.mat * c,
        }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        Self {
            mat: self.mat.clone() * C64::new(c, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat * &other.mat,
        }
    }

    /// `self` with the trace part removed: `self - (Tr self / D) I`.
    pub fn traceless_part(&self) -> Self {
        let d = self.dim();
        let shift = self.trace() / C64::new(d as f64, 0.0);
        let mut mat = self.mat.clone();
        for i in 0..d {
            mat[(i, i)] -= shift;
        }
        Self { mat }
    }

    /// Nearest Hermitian operator, `(M + M^dag)/2`.
    pub fn hermitized(&self) -> Self {
        Self {
            mat: (&self.mat + self.mat.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max entrywise deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        let diff = &self.mat - self.mat.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Max entrywise deviation of `M^dag M` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let gram = self.mat.adjoint() * &self.mat;
        let eye = DMatrix::<C64>::identity(self.dim(), self.dim());
        (gram - eye).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }

    /// `U^dag self U`.
    pub fn conjugated_by(&self, u: &Operator) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "conjugation: operator dim {} vs unitary dim {}",
                self.dim(),
                u.dim()
            )));
        }
        Ok(Self {
            mat: u.mat.adjoint() * &self.mat * &u.mat,
        })
    }

    /// Integer matrix power by repeated multiplication.
    pub fn powi(&self, n: usize) -> Self {
        let mut out = Operator::identity(self.dim());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn apply(&self, psi: &PureState) -> Result<DVector<C64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "apply: operator dim {} vs state dim {}",
                self.dim(),
                psi.dim()
            )));
        }
        Ok(&self.mat * &psi.amp)
    }

    /// Spectral decomposition of a Hermitian operator.
    pub fn eigh(&self) -> Result<SpectralDecomp> {
        self.check_hermitian(PREDICATE_TOL)?;
        let se = self.hermitized().mat.symmetric_eigen();
        Ok(SpectralDecomp {
            values: se.eigenvalues,
            vectors: se.eigenvectors,
        })
    }

    /// Spectral decomposition with eigenvalues sorted ascending and a fixed
    /// phase convention (first component of significant magnitude made real
    /// positive), so downstream orderings are deterministic.
    pub fn eigh_sorted(&self) -> Result<SpectralDecomp> {
        let dec = self.eigh()?;
        Ok(dec.sorted())
    }
}

/// Eigenvalues and orthonormal eigenvectors of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    pub values: DVector<f64>,
    pub vectors: DMatrix<C64>,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Sort ascending by eigenvalue and apply the phase convention.
    pub fn sorted(&self) -> Self {
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| self.values[i].total_cmp(&self.values[j]));
        let mut values = DVector::zeros(n);
        let mut vectors = DMatrix::zeros(n, n);
        for (new, &old) in order.iter().enumerate() {
            values[new] = self.values[old];
            let mut col = self.vectors.column(old).clone_owned();
            fix_phase(&mut col);
            vectors.set_column(new, &col);
        }
        Self { values, vectors }
    }

    /// Apply `f` to the spectrum: `V f(diag) V^dag`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> Operator {
        let n = self.dim();
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(n, self.values.iter().map(|&v| f(v))));
        Operator {
            mat: &self.vectors * diag * self.vectors.adjoint(),
        }
    }

    /// The propagator `exp(-i H t)` for the decomposed Hamiltonian.
    pub fn propagator(&self, t: f64) -> Operator {
        self.map_spectrum(|e| C64::from_polar(1.0, -e * t))
    }

    pub fn eigenvector(&self, k: usize) -> PureState {
        PureState {
            amp: self.vectors.column(k).clone_owned(),
        }
    }
}

/// Rotate a vector's global phase so its first component of significant
/// magnitude is real positive.
pub(crate) fn fix_phase(v: &mut DVector<C64>) {
    let cutoff = 1e-9 * v.norm();
    if let Some(z) = v.iter().find(|z| z.norm() > cutoff).copied() {
        let phase = z / z.norm();
        for x in v.iter_mut() {
            *x /= phase;
        }
    }
}

impl PureState {
    /// Build from amplitudes, requiring unit norm within 1e-12 on the
    /// squared norm.
    pub fn new(amp: DVector<C64>) -> Result<Self> {
        let deviation = (amp.norm_squared() - 1.0).abs();
        if deviation > 1e-12 {
            return Err(Error::NotNormalized { deviation });
        }
        Ok(Self { amp })
    }

    /// Build from arbitrary nonzero amplitudes, normalizing.
    pub fn normalized(amp: DVector<C64>) -> Result<Self> {
        let n = amp.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized { deviation: 1.0 });
        }
        Ok(Self { amp: amp / C64::new(n, 0.0) })
    }

    /// Computational basis state `|k>`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut amp = DVector::zeros(dim);
        amp[k] = C64::new(1.0, 0.0);
        Self { amp }
    }

    /// Uniform superposition with all-positive real amplitudes.
    pub fn uniform(dim: usize) -> Self {
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            amp: DVector::from_element(dim, a),
        }
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amp
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amp.dotc(&other.amp)
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix {
            mat: &self.amp * self.amp.adjoint(),
        }
    }
}

impl DensityMatrix {
    /// Build from a matrix, checking Hermiticity (1e-10), unit trace (1e-10),
    /// and nonnegativity of the spectrum down to -1e-10.
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        let op = Operator::from_matrix(mat.clone())?;
        op.check_hermitian(PREDICATE_TOL)
            .map_err(|_| Error::InvalidDensityMatrix("not Hermitian".into()))?;
        let tr = op.trace();
        if (tr.re - 1.0).abs() > PREDICATE_TOL || tr.im.abs() > PREDICATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace is {tr}, expected 1"
            )));
        }
        let eig = op.eigh()?;
        if eig.values.iter().any(|&v| v < -PREDICATE_TOL) {
            return Err(Error::InvalidDensityMatrix(
                "negative eigenvalue beyond tolerance".into(),
            ));
        }
        Ok(Self { mat })
    }

    /// Build without the spectral check (for trusted intermediate results).
    pub(crate) fn from_matrix_unchecked(mat: DMatrix<C64>) -> Self {
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn as_operator(&self) -> Operator {
        Operator {
            mat: self.mat.clone(),
        }
    }

    pub fn purity(&self) -> f64 {
        // Tr rho^2 = ||rho||_F^2 for Hermitian rho.
        self.mat.norm_squared()
    }
}

/// Kronecker product of two operators; index `(i_a, i_b) -> i_a*d_b + i_b`.
pub fn tensor_product(x: &Operator, y: &Operator) -> Operator {
    Operator {
        mat: x.mat.kronecker(&y.mat),
    }
}

/// Kronecker product of two pure states.
pub fn tensor_product_states(x: &PureState, y: &PureState) -> PureState {
    PureState {
        amp: x.amp.kronecker(&y.amp),
    }
}

/// Partial trace over the discarded factor of a bipartite operator.
///
/// Preserves the trace exactly and Hermiticity entrywise.
pub fn partial_trace(rho: &Operator, shape: BipartiteShape, keep: Keep) -> Result<Operator> {
    shape.check_total(rho.dim())?;
    let (d_a, d_b) = (shape.d_a, shape.d_b);
    match keep {
        Keep::A => {
            let mut out = DMatrix::<C64>::zeros(d_a, d_a);
            for i in 0..d_a {
                for j in 0..d_a {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..d_b {
                        acc += rho.mat[(i * d_b + k, j * d_b + k)];
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(Operator { mat: out })
        }
        Keep::B => {
            let mut out = DMatrix::<C64>::zeros(d_b, d_b);
            for k in 0..d_b {
                for l in 0..d_b {
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..d_a {
                        acc += rho.mat[(i * d_b + k, i * d_b + l)];
                    }
                    out[(k, l)] = acc;
                }
            }
            Ok(Operator { mat: out })
        }
    }
}

/// Partial trace of a density matrix, returning a density matrix.
pub fn partial_trace_density(
    rho: &DensityMatrix,
    shape: BipartiteShape,
    keep: Keep,
) -> Result<DensityMatrix> {
    let reduced = partial_trace(&rho.as_operator(), shape, keep)?;
    Ok(DensityMatrix::from_matrix_unchecked(reduced.mat))
}

/// Reduced density matrix of a pure bipartite state.
pub fn reduced_state(psi: &PureState, shape: BipartiteShape, keep: Keep) -> Result<DensityMatrix> {
    shape.check_total(psi.dim())?;
    partial_trace_density(&psi.density_matrix(), shape, keep)
}

/// Evolve a pure state to time `t` under Hermitian `h`: `exp(-i h t) psi`.
pub fn evolve_state(h: &Operator, psi: &PureState, t: f64) -> Result<PureState> {
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "evolve: H dim {} vs state dim {}",
            h.dim(),
            psi.dim()
        )));
    }
    let u = h.eigh()?.propagator(t);
    Ok(PureState {
        amp: &u.mat * &psi.amp,
    })
}

/// Evolve a density matrix to time `t`: `U rho U^dag`.
pub fn evolve_density(h: &Operator, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "evolve: H dim {} vs rho dim {}",
            h.dim(),
            rho.dim()
        )));
    }
    let u = h.eigh()?.propagator(t);
    Ok(DensityMatrix::from_matrix_unchecked(
        &u.mat * &rho.mat * u.mat.adjoint(),
    ))
}

/// Linear entropy `1 - Tr rho^2`, in `[0, 1 - 1/D]`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - rho.purity()
}

/// Commutator `[X, Y]`.
pub fn commutator(x: &Operator, y: &Operator) -> Result<Operator> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "commutator: {} vs {}",
            x.dim(),
            y.dim()
        )));
    }
    Ok(Operator {
        mat: &x.mat * &y.mat - &y.mat * &x.mat,
    })
}

/// Anticommutator `{X, Y}`.
pub fn anticommutator(x: &Operator, y: &Operator) -> Result<Operator> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "anticommutator: {} vs {}",
            x.dim(),
            y.dim()
        )));
    }
    Ok(Operator {
        mat: &x.mat * &y.mat + &y.mat * &x.mat,
    })
}

/// Expectation `<psi| X |psi>`.
pub fn expectation(x: &Operator, psi: &PureState) -> Result<C64> {
    let xpsi = x.apply(psi)?;
    Ok(psi.amp.dotc(&xpsi))
}

/// Expectation in a density matrix, `Tr(rho X)`.
pub fn expectation_density(x: &Operator, rho: &DensityMatrix) -> Result<C64> {
    if x.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "expectation: operator dim {} vs rho dim {}",
            x.dim(),
            rho.dim()
        )));
    }
    Ok((&rho.mat * &x.mat).diagonal().sum())
}

/// Random operator with i.i.d. standard-complex-Gaussian entries, Hermitized
/// as `(G + G^dag)/2`.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> Operator {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    Operator {
        mat: (&g + g.adjoint()) * C64::new(0.5, 0.0),
    }
}

/// Random real-symmetric operator, `(G + G^T)/2` with i.i.d. standard
/// Gaussian real entries. Time-reversal symmetric in the computational
/// basis.
pub fn random_real_symmetric(dim: usize, rng: &mut impl Rng) -> Operator {
    let g = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.sample(StandardNormal), 0.0));
    Operator {
        mat: (&g + g.transpose()) * C64::new(0.5, 0.0),
    }
}

/// Random traceless Hermitian operator normalized to unit Frobenius norm.
pub fn random_traceless_hermitian_unit(dim: usize, rng: &mut impl Rng) -> Operator {
    let h = random_hermitian(dim, rng).traceless_part();
    let n = h.frobenius_norm();
    h.scale_re(1.0 / n)
}

/// Haar-ish random pure state (Gaussian amplitudes, normalized).
pub fn random_state(dim: usize, rng: &mut impl Rng) -> PureState {
    let amp = DVector::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    PureState::normalized(amp).expect("Gaussian vector is nonzero almost surely")
}
