//! The candidate pointer observable: the traceless Hermitian product
//! operator `O_A x O_B` minimizing `||[H_int, O_A x O_B]||_F`, found by
//! alternating smallest-eigenvector steps, plus the peaked trial states
//! built from its eigenbasis.
//!
//! With one factor fixed, the squared commutator norm is a positive
//! semidefinite quadratic form on the coefficient space of the other factor
//! (traceless Hermitian operators with unit Frobenius norm), so each half
//! step is an exact global minimization: take the eigenvector of the
//! smallest eigenvalue. The residual is therefore non-increasing per half
//! step; restarts guard against landing in a poor alternating fixed point.
//! Both factors are constrained traceless, which removes the useless
//! `identity x identity` solution without affecting pointer states.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::factorization::{gell_mann_basis, GellMannBasis, HamiltonianSplit};
use crate::hilbert::{commutator, tensor_product, Operator, PureState};

/// The minimizing product observable and the achieved commutator norm.
#[derive(Clone, Debug)]
pub struct CandidatePointerObservable {
    /// Traceless Hermitian, unit Frobenius norm, on factor A.
    pub o_a: Operator,
    /// Traceless Hermitian, unit Frobenius norm, on factor B.
    pub o_b: Operator,
    /// `||[H_int, O_A x O_B]||_F`, evaluated directly on the final pair.
    pub residual: f64,
    /// Number of restarts actually executed.
    pub restarts_used: usize,
    /// False when the winning restart hit the iteration cap before its
    /// residual improvement dropped below tolerance.
    pub converged: bool,
}

/// Peaked trial states over the CPO eigenbasis: one state per pointer
/// eigenstate of `O_A`, each paired with the uniform "ready" superposition
/// of `O_B` eigenstates.
#[derive(Clone, Debug)]
pub struct PeakedStateSet {
    pub states: Vec<crate::entropy::ProductState>,
    pub width: f64,
}

/// Direct evaluation of the CPO objective.
pub fn cpo_residual(split: &HamiltonianSplit, o_a: &Operator, o_b: &Operator) -> Result<f64> {
    let h_int = split.interaction_operator();
    Ok(commutator(&h_int, &tensor_product(o_a, o_b))?.frobenius_norm())
}

/// One run of the alternating solver from a given start, recording the
/// residual after every half-step.
pub struct AlternatingRun {
    pub o_a: Operator,
    pub o_b: Operator,
    pub residual: f64,
    pub converged: bool,
    pub residual_history: Vec<f64>,
}

/// Normalized generators `L_a / sqrt(2)`, orthonormal under the
/// Hilbert-Schmidt inner product.
fn unit_generators(basis: &GellMannBasis) -> Vec<Operator> {
    let inv = 1.0 / 2f64.sqrt();
    basis.generators.iter().map(|g| g.scale_re(inv)).collect()
}

/// Minimize over one factor with the other fixed: build the quadratic form
/// of the objective on the unit generators and take the bottom eigenvector.
fn minimize_factor(
    h_int: &Operator,
    gens: &[Operator],
    fixed: &Operator,
    factor_is_a: bool,
) -> Operator {
    let n = gens.len();
    let mut commutators = Vec::with_capacity(n);
    for g in gens {
        let k = if factor_is_a {
            tensor_product(g, fixed)
        } else {
            tensor_product(fixed, g)
        };
        commutators.push(commutator(h_int, &k).expect("dimensions match"));
    }
    let mut form = DMatrix::<f64>::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            // Re Tr(C_a^dag C_b) as a flattened inner product.
            let re: f64 = commutators[a]
                .matrix()
                .iter()
                .zip(commutators[b].matrix().iter())
                .map(|(x, y)| (x.conj() * y).re)
                .sum();
            form[(a, b)] = re;
            form[(b, a)] = re;
        }
    }
    let dec = form.symmetric_eigen();
    let mut best = 0;
    for k in 1..n {
        if dec.eigenvalues[k] < dec.eigenvalues[best] {
            best = k;
        }
    }
    let coeffs = dec.eigenvectors.column(best);
    let mut out = Operator::zeros(gens[0].dim());
    for (c, g) in coeffs.iter().zip(gens) {
        out = out.add(&g.scale_re(*c));
    }
    // Unit coefficient vector on orthonormal generators: already unit norm;
    // renormalize to wash out rounding.
    let norm = out.frobenius_norm();
    out.scale_re(1.0 / norm)
}

/// Run the alternating minimization from `(start_a, start_b)`.
pub fn alternating_minimize(
    split: &HamiltonianSplit,
    start_a: Operator,
    start_b: Operator,
    max_iters: usize,
    tol: f64,
) -> Result<AlternatingRun> {
    let h_int = split.interaction_operator();
    let gens_a = unit_generators(&gell_mann_basis(split.shape.d_a)?);
    let gens_b = unit_generators(&gell_mann_basis(split.shape.d_b)?);

    let mut o_a = start_a;
    let mut o_b = start_b;
    let mut residual = commutator(&h_int, &tensor_product(&o_a, &o_b))?.frobenius_norm();
    let mut history = vec![residual];
    let mut converged = false;

    for _ in 0..max_iters {
        let prev = residual;
        o_a = minimize_factor(&h_int, &gens_a, &o_b, true);
        history.push(commutator(&h_int, &tensor_product(&o_a, &o_b))?.frobenius_norm());
        o_b = minimize_factor(&h_int, &gens_b, &o_a, false);
        residual = commutator(&h_int, &tensor_product(&o_a, &o_b))?.frobenius_norm();
        history.push(residual);
        if prev - residual < tol {
            converged = true;
            break;
        }
    }
    Ok(AlternatingRun {
        o_a,
        o_b,
        residual,
        converged,
        residual_history: history,
    })
}

/// Canonical sign: flip both factors so the first significant coefficient
/// of `O_A` in the Gell-Mann basis is positive.
fn canonicalize(o_a: &mut Operator, o_b: &mut Operator, basis_a: &GellMannBasis) {
    let coeffs = basis_a.project(o_a).expect("dimensions match");
    let lead = coeffs.iter().find(|c| c.abs() > 1e-9).copied().unwrap_or(1.0);
    if lead < 0.0 {
        *o_a = o_a.scale_re(-1.0);
        *o_b = o_b.scale_re(-1.0);
    }
}

/// Rounded coefficient key for the deterministic tie-break between
/// equal-residual minima.
fn tie_break_key(o_a: &Operator, o_b: &Operator, basis_a: &GellMannBasis, basis_b: &GellMannBasis) -> Vec<i64> {
    let mut key = Vec::new();
    for c in basis_a.project(o_a).expect("dims") {
        key.push((c * 1e9).round() as i64);
    }
    for c in basis_b.project(o_b).expect("dims") {
        key.push((c * 1e9).round() as i64);
    }
    key
}

/// Find the candidate pointer observable for a split with at least one
/// interaction term, keeping the best of `n_restarts` starts (the first
/// start is the leading interaction pair, the rest are seeded random unit
/// coefficient vectors).
pub fn find_cpo(
    split: &HamiltonianSplit,
    n_restarts: usize,
    max_iters: usize,
    tol: f64,
) -> Result<CandidatePointerObservable> {
    if split.terms.is_empty() {
        return Err(Error::EmptyInteraction);
    }
    if n_restarts < 1 {
        return Err(Error::InvalidParameter("need at least one restart".into()));
    }
    let basis_a = gell_mann_basis(split.shape.d_a)?;
    let basis_b = gell_mann_basis(split.shape.d_b)?;
    let h_int_norm = split.interaction_operator().frobenius_norm();

    let mut best: Option<(f64, Vec<i64>, AlternatingRun)> = None;
    let mut restarts_used = 0;
    for restart in 0..n_restarts {
        restarts_used += 1;
        let (start_a, start_b) = if restart == 0 {
            (split.terms[0].a_op.clone(), split.terms[0].b_op.clone())
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x9E37_79B9_7F4A_7C15 ^ restart as u64);
            (
                random_unit_combination(&basis_a, &mut rng),
                random_unit_combination(&basis_b, &mut rng),
            )
        };
        let mut run = alternating_minimize(split, start_a, start_b, max_iters, tol)?;
        canonicalize(&mut run.o_a, &mut run.o_b, &basis_a);
        let key = tie_break_key(&run.o_a, &run.o_b, &basis_a, &basis_b);
        let better = match &best {
            None => true,
            Some((best_res, best_key, _)) => {
                if run.residual < best_res - tol {
                    true
                } else if (run.residual - best_res).abs() <= tol {
                    key < *best_key
                } else {
                    false
                }
            }
        };
        if better {
            best = Some((run.residual, key, run));
        }
        if let Some((res, _, _)) = &best {
            if *res < 1e-14 * h_int_norm.max(1.0) {
                break;
            }
        }
    }
    let (_, _, run) = best.expect("at least one restart ran");
    Ok(CandidatePointerObservable {
        residual: run.residual,
        o_a: run.o_a,
        o_b: run.o_b,
        restarts_used,
        converged: run.converged,
    })
}

/// Random unit-norm real combination of the generators.
pub fn random_unit_combination(basis: &GellMannBasis, rng: &mut impl Rng) -> Operator {
    let n = basis.len();
    let mut coeffs: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    for c in &mut coeffs {
        *c /= norm * 2f64.sqrt();
    }
    // coefficients on L_a with |x| = 1/sqrt(2) give unit Frobenius norm
    basis.combine(&coeffs).expect("lengths match")
}

/// A peaked amplitude profile over an ordered eigenbasis: width 0 is the
/// exact eigenstate, width `w > 0` uses a discrete Gaussian
/// `exp(-(k - center)^2 / (4 w^2))` over the eigenvalue index, renormalized.
pub fn peaked_superposition(vectors: &[PureState], center: usize, width: f64) -> PureState {
    if width == 0.0 {
        return vectors[center].clone();
    }
    let dim = vectors[0].dim();
    let mut amp = nalgebra::DVector::zeros(dim);
    for (k, v) in vectors.iter().enumerate() {
        let delta = k as f64 - center as f64;
        let w = (-delta * delta / (4.0 * width * width)).exp();
        amp += v.amplitudes() * num_complex::Complex64::new(w, 0.0);
    }
    PureState::normalized(amp).expect("Gaussian weights are nonzero")
}

impl CandidatePointerObservable {
    /// Eigenbasis of `O_A`, ascending eigenvalues, deterministic phases.
    pub fn pointer_basis(&self) -> Result<crate::entropy::PointerBasis> {
        crate::entropy::PointerBasis::from_observable(&self.o_a)
    }

    /// The environment ready state: uniform superposition of `O_B`
    /// eigenstates with all-positive real coefficients.
    pub fn ready_state(&self) -> Result<PureState> {
        let dec = self.o_b.eigh_sorted()?;
        let d = dec.dim();
        let mut amp = nalgebra::DVector::zeros(d);
        for k in 0..d {
            amp += dec.eigenvector(k).amplitudes();
        }
        PureState::normalized(amp)
    }
}

/// Build the `d_A` peaked trial states of the five-step search: one per
/// `O_A` eigenstate, all sharing the uniform ready state on B.
pub fn peaked_states(cpo: &CandidatePointerObservable, width: f64) -> Result<PeakedStateSet> {
    if width < 0.0 {
        return Err(Error::InvalidParameter("width must be nonnegative".into()));
    }
    let basis = cpo.pointer_basis()?;
    let ready = cpo.ready_state()?;
    let states = (0..basis.len())
        .map(|j| {
            crate::entropy::ProductState::new(
                peaked_superposition(basis.vectors(), j, width),
                ready.clone(),
            )
        })
        .collect();
    Ok(PeakedStateSet { states, width })
}
