//! Short-time dynamics of a bipartite split: the t^2 coefficient of the
//! linear entanglement entropy, variance rates of candidate pointer
//! observables, pointer-entropy derivatives, the unitary/decoherence
//! decomposition of the reduced dynamics, and decoherence rates.
//!
//! Two conventions worth stating once:
//!
//! - `s_lin_ddot` is the coefficient of `t^2` in `S_lin(rho_A(t))`, not half
//!   of it. The short-time expansion is `S_lin = s_lin_ddot * t^2 + O(t^3)`.
//! - All expectation values entering the closed forms are taken in the
//!   initial product state at `t = 0`.
//!
//! Every closed form here has an exact-evolution counterpart
//! ([`s_lin_oracle`], [`pointer_probabilities_exact`], finite differences in
//! the tests) that shares nothing with the algebraic path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::factorization::HamiltonianSplit;
use crate::hilbert::{
    commutator, evolve_density, evolve_state, expectation, expectation_density, linear_entropy,
    reduced_state, tensor_product_states, BipartiteShape, DensityMatrix, Keep, Operator,
    PureState,
};

const IM: C64 = C64::new(0.0, 1.0);

/// Default threshold on `||[O_A, A_alpha]||_F` relative to `||H_int||_F`
/// below which an observable counts as a consistent pointer observable.
pub const DEFAULT_QML_COMMUTATOR_TOL: f64 = 1e-8;

/// An unentangled initial state `psi_A x psi_B`.
#[derive(Clone, Debug)]
pub struct ProductState {
    pub psi_a: PureState,
    pub psi_b: PureState,
}

impl ProductState {
    pub fn new(psi_a: PureState, psi_b: PureState) -> Self {
        Self { psi_a, psi_b }
    }

    pub fn shape(&self) -> BipartiteShape {
        BipartiteShape {
            d_a: self.psi_a.dim(),
            d_b: self.psi_b.dim(),
        }
    }

    pub fn joint(&self) -> PureState {
        tensor_product_states(&self.psi_a, &self.psi_b)
    }

    pub fn rho_a(&self) -> DensityMatrix {
        self.psi_a.density_matrix()
    }

    pub fn rho_b(&self) -> DensityMatrix {
        self.psi_b.density_matrix()
    }

    fn check_shape(&self, shape: BipartiteShape) -> Result<()> {
        if self.shape() != shape {
            return Err(Error::DimensionMismatch(format!(
                "product state is {}x{}, split is {}x{}",
                self.psi_a.dim(),
                self.psi_b.dim(),
                shape.d_a,
                shape.d_b
            )));
        }
        Ok(())
    }
}

/// The t^2 coefficient of the linear entanglement entropy.
#[derive(Clone, Copy, Debug)]
pub struct EntropyGrowth {
    pub s_lin_ddot: f64,
}

/// Result of the exact-evolution entanglement-growth fit.
#[derive(Clone, Copy, Debug)]
pub struct SlinFit {
    /// Least-squares coefficient of `c t^2` through the origin.
    pub coefficient: f64,
    /// Largest deviation of a sample from the fit, relative to the fitted
    /// value at the window edge.
    pub max_rel_residual: f64,
    /// Set when `t_max ||H||_F` exceeds the perturbative window 0.05.
    pub window_exceeded: bool,
}

/// Mode of the variance-rate computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarianceMode {
    /// Self term plus the interaction terms weighted by `<B_alpha>_0`.
    General,
    /// Self term only, valid when `[O_A, A_alpha] ~ 0` for all terms.
    Qml,
}

/// An orthonormal basis of candidate pointer states on factor A.
#[derive(Clone, Debug)]
pub struct PointerBasis {
    vectors: Vec<PureState>,
}

impl PointerBasis {
    /// Checks pairwise orthonormality within 1e-8.
    pub fn new(vectors: Vec<PureState>) -> Result<Self> {
        let mut deviation = 0.0f64;
        for (i, vi) in vectors.iter().enumerate() {
            for (j, vj) in vectors.iter().enumerate() {
                let g = vi.inner(vj);
                let expected = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((g - C64::new(expected, 0.0)).norm());
            }
        }
        if deviation > 1e-8 {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self { vectors })
    }

    /// Eigenbasis of a Hermitian observable, ascending eigenvalue order with
    /// a fixed phase convention.
    pub fn from_observable(op: &Operator) -> Result<Self> {
        let dec = op.eigh_sorted()?;
        let vectors = (0..dec.dim()).map(|k| dec.eigenvector(k)).collect();
        Ok(Self { vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, j: usize) -> &PureState {
        &self.vectors[j]
    }

    pub fn vectors(&self) -> &[PureState] {
        &self.vectors
    }

    /// `<a_j| M |a_j>` down the basis.
    pub fn diagonal_expectations(&self, m: &Operator) -> Result<Vec<f64>> {
        self.vectors
            .iter()
            .map(|v| expectation(m, v).map(|z| z.re))
            .collect()
    }
}

/// Probabilities over a pointer basis with optional first and second time
/// derivatives at `t = 0`.
#[derive(Clone, Debug)]
pub struct PointerDistribution {
    pub p: Vec<f64>,
    pub p_dot: Option<Vec<f64>>,
    pub p_ddot: Option<Vec<f64>>,
}

impl PointerDistribution {
    pub fn order(&self) -> u8 {
        match (&self.p_dot, &self.p_ddot) {
            (Some(_), Some(_)) => 2,
            (Some(_), None) => 1,
            _ => 0,
        }
    }
}

/// Decoherence rates and timescales in a consistent pointer basis.
#[derive(Clone, Debug)]
pub struct DecoherenceModel {
    /// `H_A + sum_alpha lambda_alpha <B_alpha>_0 A_alpha`.
    pub h_eff_a: Operator,
    /// `Gamma[j,k] = sum_alpha lambda_alpha^2 Var_0(B_alpha) (a_j - a_k)^2`;
    /// symmetric with zero diagonal.
    pub gamma: DMatrix<f64>,
    /// `tau[j,k] = sqrt(2 / Gamma[j,k])`; infinite on the diagonal.
    pub tau: DMatrix<f64>,
    /// Pointer eigenvalues `a_j^alpha`, one row per interaction term.
    pub pointer_eigenvalues: Vec<Vec<f64>>,
    /// The joint eigenbasis the rates refer to.
    pub basis: PointerBasis,
}

/// Expectation values of the interaction environment factors in the initial
/// state, shared by the closed forms.
struct EnvironmentMoments {
    /// `<B_alpha>_0` (real by Hermiticity).
    mean: Vec<f64>,
    /// `<B_alpha B_beta>_0`.
    prod: DMatrix<C64>,
    /// `<[B_alpha, H_B]>_0` (purely imaginary).
    comm_hb: Vec<C64>,
}

fn environment_moments(split: &HamiltonianSplit, state: &ProductState) -> Result<EnvironmentMoments> {
    let n = split.n_int();
    let psi_b = &state.psi_b;
    // b_vecs[alpha] = B_alpha |psi_B>, so <B_a B_b> = (B_a psi)^dag (B_b psi).
    let b_vecs: Vec<DVector<C64>> = split
        .terms
        .iter()
        .map(|t| t.b_op.apply(psi_b))
        .collect::<Result<_>>()?;
    let mut mean = Vec::with_capacity(n);
    let mut comm_hb = Vec::with_capacity(n);
    for (t, bv) in split.terms.iter().zip(&b_vecs) {
        mean.push(psi_b.amplitudes().dotc(bv).re);
        let c = commutator(&t.b_op, &split.h_b)?;
        comm_hb.push(expectation(&c, psi_b)?);
    }
    let prod = DMatrix::from_fn(n, n, |a, b| b_vecs[a].dotc(&b_vecs[b]));
    Ok(EnvironmentMoments {
        mean,
        prod,
        comm_hb,
    })
}

/// The t^2 coefficient of the linear entanglement entropy of `rho_A(t)` for
/// an initially unentangled product state.
///
/// Only the interaction terms enter; self-Hamiltonians do not contribute at
/// this order. For a single term `lambda (A x B)` the double sum collapses
/// to `2 lambda^2 Var_0(A) Var_0(B)`.
pub fn s_lin_ddot(split: &HamiltonianSplit, state: &ProductState) -> Result<EntropyGrowth> {
    state.check_shape(split.shape)?;
    let n = split.n_int();
    let psi_a = &state.psi_a;

    let a_vecs: Vec<DVector<C64>> = split
        .terms
        .iter()
        .map(|t| t.a_op.apply(psi_a))
        .collect::<Result<_>>()?;
    let a_mean: Vec<f64> = a_vecs
        .iter()
        .map(|av| psi_a.amplitudes().dotc(av).re)
        .collect();
    let env = environment_moments(split, state)?;

    let mut total = C64::new(0.0, 0.0);
    for alpha in 0..n {
        for beta in 0..n {
            let ll = split.terms[alpha].lambda * split.terms[beta].lambda;
            let aa = a_vecs[alpha].dotc(&a_vecs[beta]);
            let bb = env.prod[(alpha, beta)];
            let ea = C64::new(a_mean[alpha] * a_mean[beta], 0.0);
            let eb = C64::new(env.mean[alpha] * env.mean[beta], 0.0);
            let anti_b = bb + bb.conj();
            let anti_a = aa + aa.conj();
            let term = aa * bb + aa.conj() * bb.conj() - ea * (anti_b - eb) - eb * (anti_a - ea);
            total += term * C64::new(ll, 0.0);
        }
    }
    debug_assert!(
        total.im.abs() < 1e-9 * (1.0 + total.re.abs()),
        "entanglement coefficient should be real, got {total}"
    );
    Ok(EntropyGrowth {
        s_lin_ddot: total.re,
    })
}

/// Independent entanglement-growth oracle: evolve exactly, trace out B,
/// and fit `c t^2` through the origin over `(0, t_max]`.
pub fn s_lin_oracle(
    h: &Operator,
    state: &ProductState,
    shape: BipartiteShape,
    t_max: f64,
    n_points: usize,
) -> Result<SlinFit> {
    state.check_shape(shape)?;
    if h.dim() != shape.total() {
        return Err(Error::DimensionMismatch(format!(
            "oracle: H dim {} vs shape {}x{}",
            h.dim(),
            shape.d_a,
            shape.d_b
        )));
    }
    if n_points < 5 {
        return Err(Error::InvalidParameter(
            "oracle fit needs at least 5 sample points".into(),
        ));
    }
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::InvalidParameter("t_max must be positive".into()));
    }
    let window_exceeded = t_max * h.frobenius_norm() > 0.05;

    let dec = h.eigh()?;
    let psi0 = state.joint();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut samples = Vec::with_capacity(n_points);
    for i in 1..=n_points {
        let t = t_max * i as f64 / n_points as f64;
        let u = dec.propagator(t);
        let amp = u.matrix() * psi0.amplitudes();
        let psi_t = PureState::new(amp).expect("unitary evolution preserves the norm");
        let rho_a = reduced_state(&psi_t, shape, Keep::A)?;
        let s = linear_entropy(&rho_a);
        num += s * t * t;
        den += t.powi(4);
        samples.push((t, s));
    }
    let coefficient = num / den;
    let scale = (coefficient.abs() * t_max * t_max).max(1e-300);
    let max_rel_residual = samples
        .iter()
        .map(|(t, s)| (s - coefficient * t * t).abs() / scale)
        .fold(0.0, f64::max);
    Ok(SlinFit {
        coefficient,
        max_rel_residual,
        window_exceeded,
    })
}

/// Leading-order time derivative of `Var(O_A)` at `t = 0`.
///
/// `General` includes the interaction contribution weighted by
/// `<B_alpha>_0`; `Qml` keeps only the self term. When `[O_A, A_alpha] = 0`
/// for every term the two agree identically.
pub fn variance_rate(
    split: &HamiltonianSplit,
    o_a: &Operator,
    state: &ProductState,
    mode: VarianceMode,
) -> Result<f64> {
    state.check_shape(split.shape)?;
    if o_a.dim() != split.shape.d_a {
        return Err(Error::DimensionMismatch(format!(
            "variance_rate: O_A dim {} vs d_A {}",
            o_a.dim(),
            split.shape.d_a
        )));
    }
    o_a.check_hermitian(1e-8)?;
    let psi_a = &state.psi_a;
    let o_sq = o_a.mul(o_a);
    let o_mean = expectation(o_a, psi_a)?.re;

    let rate_of = |gen: &Operator| -> Result<f64> {
        let c_sq = expectation(&commutator(gen, &o_sq)?, psi_a)?;
        let c_lin = expectation(&commutator(gen, o_a)?, psi_a)?;
        Ok((IM * c_sq).re - 2.0 * (IM * c_lin).re * o_mean)
    };

    let mut rate = rate_of(&split.h_a)?;
    if mode == VarianceMode::General {
        let env = environment_moments(split, state)?;
        let mut g = Operator::zeros(split.shape.d_a);
        for (t, &b) in split.terms.iter().zip(&env.mean) {
            g = g.add(&t.a_op.scale_re(t.lambda * b));
        }
        rate += rate_of(&g)?;
    }
    Ok(rate)
}

/// Largest `||[O_A, A_alpha]||_F` over the interaction terms; compare
/// against [`DEFAULT_QML_COMMUTATOR_TOL`] `* ||H_int||_F` to decide whether
/// `O_A` qualifies as a consistent pointer observable.
pub fn qml_commutator_norm(split: &HamiltonianSplit, o_a: &Operator) -> Result<f64> {
    let mut max = 0.0f64;
    for t in &split.terms {
        max = max.max(commutator(o_a, &t.a_op)?.frobenius_norm());
    }
    Ok(max)
}

/// Operator coefficients of the reduced state to second order:
/// `rho_A(t) = r0 + t r1 + t^2 r2 + O(t^3)`.
///
/// `r1 = -i [H_A^eff(0), rho_A(0)]` and `r2` collects the self-evolution
/// term, the first-order cross terms with the environment, and the
/// double-interaction term whose trace against a pointer projector feeds
/// the pointer-entropy second derivative.
#[derive(Clone, Debug)]
pub struct ReducedExpansion {
    pub r0: Operator,
    pub r1: Operator,
    pub r2: Operator,
}

pub fn reduced_expansion(split: &HamiltonianSplit, state: &ProductState) -> Result<ReducedExpansion> {
    state.check_shape(split.shape)?;
    let rho = state.rho_a().as_operator();
    let h_a = &split.h_a;
    let env = environment_moments(split, state)?;
    let n = split.n_int();

    // Effective self-Hamiltonian at t = 0.
    let mut h_eff = h_a.clone();
    for (t, &b) in split.terms.iter().zip(&env.mean) {
        h_eff = h_eff.add(&t.a_op.scale_re(t.lambda * b));
    }
    let r1 = commutator(&h_eff, &rho)?.scale(-IM);

    // Self-evolution at second order: -(1/2) [H_A, [H_A, rho]].
    let mut r2 = commutator(h_a, &commutator(h_a, &rho)?)?.scale_re(-0.5);

    for (alpha, t) in split.terms.iter().enumerate() {
        let lam = t.lambda;
        let a_rho = commutator(&t.a_op, &rho)?;
        let a_h_rho = commutator(&t.a_op, &commutator(h_a, &rho)?)?;
        let ah_rho = commutator(&commutator(&t.a_op, h_a)?, &rho)?;
        let bdot = env.comm_hb[alpha];
        // T1 at second order: -lam (<[B,H_B]>_0 [A, rho] + <B>_0 [A, [H_A, rho]]).
        r2 = r2.add(&a_rho.scale(bdot * (-lam)));
        r2 = r2.add(&a_h_rho.scale_re(-lam * env.mean[alpha]));
        // T2: +(lam/2) (<B>_0 [[A, H_A], rho] + <[B, H_B]>_0 [A, rho]).
        r2 = r2.add(&ah_rho.scale_re(0.5 * lam * env.mean[alpha]));
        r2 = r2.add(&a_rho.scale(bdot * (0.5 * lam)));
    }

    // T3: the double-interaction term.
    for alpha in 0..n {
        for beta in 0..n {
            let ll = split.terms[alpha].lambda * split.terms[beta].lambda;
            let a_al = &split.terms[alpha].a_op;
            let a_be = &split.terms[beta].a_op;
            let bb = env.prod[(alpha, beta)];
            let bb_swap = env.prod[(beta, alpha)];
            let first = a_al.mul(a_be).mul(&rho).sub(&a_be.mul(&rho).mul(a_al));
            let second = rho.mul(&a_be.mul(a_al)).sub(&a_al.mul(&rho).mul(a_be));
            r2 = r2.add(
                &first
                    .scale(bb)
                    .add(&second.scale(bb_swap))
                    .scale_re(-0.5 * ll),
            );
        }
    }

    debug_assert!(r1.hermiticity_deviation() < 1e-9 * (1.0 + r1.frobenius_norm()));
    debug_assert!(r2.hermiticity_deviation() < 1e-9 * (1.0 + r2.frobenius_norm()));
    Ok(ReducedExpansion { r0: rho, r1, r2 })
}

/// Pointer-basis probabilities and their first/second time derivatives at
/// `t = 0`, to the requested order.
pub fn pointer_distribution(
    split: &HamiltonianSplit,
    basis: &PointerBasis,
    state: &ProductState,
    order: u8,
) -> Result<PointerDistribution> {
    if basis.len() != split.shape.d_a {
        return Err(Error::DimensionMismatch(format!(
            "pointer basis has {} vectors, d_A = {}",
            basis.len(),
            split.shape.d_a
        )));
    }
    let rho0 = state.rho_a().as_operator();
    let p = basis.diagonal_expectations(&rho0)?;
    if order == 0 {
        return Ok(PointerDistribution {
            p,
            p_dot: None,
            p_ddot: None,
        });
    }
    let exp = reduced_expansion(split, state)?;
    let p_dot = basis.diagonal_expectations(&exp.r1)?;
    if order == 1 {
        return Ok(PointerDistribution {
            p,
            p_dot: Some(p_dot),
            p_ddot: None,
        });
    }
    let p_ddot: Vec<f64> = basis
        .diagonal_expectations(&exp.r2)?
        .into_iter()
        .map(|v| 2.0 * v)
        .collect();
    debug_assert!(p_dot.iter().sum::<f64>().abs() < 1e-10);
    debug_assert!(p_ddot.iter().sum::<f64>().abs() < 1e-8);
    Ok(PointerDistribution {
        p,
        p_dot: Some(p_dot),
        p_ddot: Some(p_ddot),
    })
}

/// Second time derivative of the pointer entropy at `t = 0`:
/// `-2 sum_j (p_dot_j^2 + p_j p_ddot_j)`.
pub fn s_pointer_ddot(dist: &PointerDistribution) -> Result<f64> {
    let (p_dot, p_ddot) = match (&dist.p_dot, &dist.p_ddot) {
        (Some(d), Some(dd)) => (d, dd),
        _ => {
            return Err(Error::MissingDerivatives {
                required: 2,
                available: dist.order(),
            })
        }
    };
    Ok(-2.0
        * dist
            .p
            .iter()
            .zip(p_dot.iter().zip(p_ddot))
            .map(|(p, (pd, pdd))| pd * pd + p * pdd)
            .sum::<f64>())
}

/// Pointer probabilities at time `t` from exact evolution under `h`.
pub fn pointer_probabilities_exact(
    h: &Operator,
    basis: &PointerBasis,
    state: &ProductState,
    t: f64,
) -> Result<Vec<f64>> {
    let shape = state.shape();
    let psi_t = evolve_state(h, &state.joint(), t)?;
    let rho_a = reduced_state(&psi_t, shape, Keep::A)?;
    basis.diagonal_expectations(&rho_a.as_operator())
}

/// The two pieces of `d rho_A / dt` at time `t`: a unitary commutator with
/// the effective self-Hamiltonian and the double-sum decoherence term.
/// Their sum tracks the exact derivative with `O(t^2)` error.
///
/// The decoherence model is returned when the interaction admits a
/// consistent pointer basis, otherwise `None`.
pub fn reduced_evolution_terms(
    split: &HamiltonianSplit,
    state: &ProductState,
    t: f64,
) -> Result<(Operator, Operator, Option<DecoherenceModel>)> {
    state.check_shape(split.shape)?;
    let env = environment_moments(split, state)?;

    // <B_alpha> under self-evolution of the environment to time t.
    let sigma_b = evolve_density(&split.h_b, &state.rho_b(), t)?;
    let mut h_eff = split.h_a.clone();
    for (term, _) in split.terms.iter().zip(&env.mean) {
        let b_self_t = expectation_density(&term.b_op, &sigma_b)?.re;
        h_eff = h_eff.add(&term.a_op.scale_re(term.lambda * b_self_t));
    }

    // Exact rho_A(t) from the reconstructed Hamiltonian.
    let h_full = split.reconstruct();
    let psi_t = evolve_state(&h_full, &state.joint(), t)?;
    let rho_a_t = reduced_state(&psi_t, split.shape, Keep::A)?.as_operator();
    let unitary = commutator(&h_eff, &rho_a_t)?.scale(-IM);

    let rho0 = state.rho_a().as_operator();
    let n = split.n_int();
    let mut decoherence = Operator::zeros(split.shape.d_a);
    for alpha in 0..n {
        for beta in 0..n {
            let ll = split.terms[alpha].lambda * split.terms[beta].lambda;
            let a_al = &split.terms[alpha].a_op;
            let a_be = &split.terms[beta].a_op;
            let cov = env.prod[(alpha, beta)]
                - C64::new(env.mean[alpha] * env.mean[beta], 0.0);
            let cov_swap = env.prod[(beta, alpha)]
                - C64::new(env.mean[alpha] * env.mean[beta], 0.0);
            let first = a_al.mul(a_be).mul(&rho0).sub(&a_be.mul(&rho0).mul(a_al));
            let second = rho0.mul(&a_be.mul(a_al)).sub(&a_al.mul(&rho0).mul(a_be));
            decoherence = decoherence.add(
                &first
                    .scale(cov)
                    .add(&second.scale(cov_swap))
                    .scale_re(-t * ll),
            );
        }
    }

    let model = decoherence_rates(split, state).ok();
    Ok((unitary, decoherence, model))
}

/// Largest pairwise commutator norm among the interaction factors on A.
pub fn interaction_commutator_norm(split: &HamiltonianSplit) -> Result<f64> {
    let mut max = 0.0f64;
    for (i, ti) in split.terms.iter().enumerate() {
        for tj in split.terms.iter().skip(i + 1) {
            max = max.max(commutator(&ti.a_op, &tj.a_op)?.frobenius_norm());
        }
    }
    Ok(max)
}

/// Decoherence rates and timescales when all interaction factors on A
/// commute (within 1e-8), so a consistent pointer basis exists.
pub fn decoherence_rates(split: &HamiltonianSplit, state: &ProductState) -> Result<DecoherenceModel> {
    state.check_shape(split.shape)?;
    if split.terms.is_empty() {
        return Err(Error::EmptyInteraction);
    }
    let commutator_norm = interaction_commutator_norm(split)?;
    if commutator_norm > 1e-8 {
        return Err(Error::NoPointerBasis { commutator_norm });
    }

    let a_ops: Vec<&Operator> = split.terms.iter().map(|t| &t.a_op).collect();
    let basis = joint_eigenbasis(&a_ops)?;
    let d_a = split.shape.d_a;
    let n = split.n_int();

    let pointer_eigenvalues: Vec<Vec<f64>> = a_ops
        .iter()
        .map(|a| basis.diagonal_expectations(a))
        .collect::<Result<_>>()?;

    let env = environment_moments(split, state)?;
    let var_b: Vec<f64> = (0..n)
        .map(|alpha| (env.prod[(alpha, alpha)].re - env.mean[alpha] * env.mean[alpha]).max(0.0))
        .collect();

    let mut gamma = DMatrix::<f64>::zeros(d_a, d_a);
    let mut tau = DMatrix::<f64>::from_element(d_a, d_a, f64::INFINITY);
    for j in 0..d_a {
        for k in 0..d_a {
            if j == k {
                continue;
            }
            let g: f64 = (0..n)
                .map(|alpha| {
                    let gap = pointer_eigenvalues[alpha][j] - pointer_eigenvalues[alpha][k];
                    split.terms[alpha].lambda.powi(2) * var_b[alpha] * gap * gap
                })
                .sum();
            gamma[(j, k)] = g;
            if g > 0.0 {
                tau[(j, k)] = (2.0 / g).sqrt();
            }
        }
    }

    let mut h_eff = split.h_a.clone();
    for (term, &b) in split.terms.iter().zip(&env.mean) {
        h_eff = h_eff.add(&term.a_op.scale_re(term.lambda * b));
    }

    Ok(DecoherenceModel {
        h_eff_a: h_eff,
        gamma,
        tau,
        pointer_eigenvalues,
        basis,
    })
}

/// Joint eigenbasis of a family of mutually commuting Hermitian operators,
/// built by sequential refinement of degenerate blocks, ordered by the
/// lexicographic eigenvalue tuple, phases fixed.
pub fn joint_eigenbasis(ops: &[&Operator]) -> Result<PointerBasis> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidParameter("joint eigenbasis of an empty family".into()))?;
    let d = first.dim();
    let dec = first.eigh_sorted()?;
    let mut vectors = dec.vectors;
    let mut tuples: Vec<Vec<f64>> = dec.values.iter().map(|&v| vec![v]).collect();

    let degeneracy_tol = 1e-8;
    for op in ops.iter().skip(1) {
        // Group columns by their eigenvalue tuple so far.
        let mut start = 0;
        while start < d {
            let mut end = start + 1;
            while end < d && tuples_close(&tuples[end], &tuples[start], degeneracy_tol) {
                end += 1;
            }
            let width = end - start;
            if width == 1 {
                let v = vectors.column(start).clone_owned();
                let val = (v.adjoint() * op.matrix() * &v)[(0, 0)].re;
                tuples[start].push(val);
            } else {
                let block = vectors.columns(start, width).clone_owned();
                let sub = (block.adjoint() * op.matrix() * &block)
                    .map(|z| z)
                    .clone_owned();
                let sub_op = Operator::from_matrix(sub)?;
                let sub_dec = sub_op.eigh_sorted()?;
                let rotated = &block * &sub_dec.vectors;
                for (offset, col) in (start..end).enumerate() {
                    vectors.set_column(col, &rotated.column(offset));
                    tuples[col].push(sub_dec.values[offset]);
                }
            }
            start = end;
        }
    }

    // Final deterministic order: lexicographic in the eigenvalue tuple.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        for (a, b) in tuples[i].iter().zip(&tuples[j]) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            }
        }
        std::cmp::Ordering::Equal
    });
    let states: Vec<PureState> = order
        .iter()
        .map(|&k| {
            let mut col = vectors.column(k).clone_owned();
            crate::hilbert::fix_phase(&mut col);
            PureState::new(col.clone()).or_else(|_| PureState::normalized(col))
        })
        .collect::<Result<_>>()?;
    PointerBasis::new(states)
}

fn tuples_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Exact reduced state at time `t` under the reconstructed Hamiltonian.
pub fn reduced_state_exact(
    split: &HamiltonianSplit,
    state: &ProductState,
    t: f64,
) -> Result<DensityMatrix> {
    let h = split.reconstruct();
    let psi_t = evolve_state(&h, &state.joint(), t)?;
    reduced_state(&psi_t, split.shape, Keep::A)
}

/// Exact reduced state evolved with a precomputed spectral decomposition.
pub fn reduced_state_at(
    dec: &crate::hilbert::SpectralDecomp,
    state: &ProductState,
    shape: BipartiteShape,
    t: f64,
) -> Result<DensityMatrix> {
    let u = dec.propagator(t);
    let amp = u.matrix() * state.joint().amplitudes();
    let psi_t = PureState::new(amp).expect("unitary evolution preserves the norm");
    reduced_state(&psi_t, shape, Keep::A)
}

/// `1 - sum_j p_j^2` of a probability vector.
pub fn pointer_entropy(p: &[f64]) -> f64 {
    1.0 - p.iter().map(|x| x * x).sum::<f64>()
}
