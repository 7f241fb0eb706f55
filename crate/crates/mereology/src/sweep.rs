//! The factorization sweep: score candidate bipartite splits of a fixed
//! Hamiltonian by their Schwinger entropy and search for the minimum.
//!
//! One evaluation runs the five-step procedure: rotate the Hamiltonian by
//! `U(theta)`, split it, find the candidate pointer observable, build the
//! `d_A` peaked trial states, and average the entanglement-growth and
//! pointer-entropy-growth coefficients over those states. The per-record
//! Schwinger entropy is the larger of the two averaged coefficients.
//!
//! The sweep itself is sampling-based: sample 0 is always `theta = 0`, and
//! subsequent samples are Gaussian perturbations, either independent or
//! accumulated into a random walk. Records are deterministic functions of
//! `(H, seed, index)` regardless of worker scheduling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cpo::{find_cpo, peaked_states};
use crate::entropy::{
    pointer_distribution, pointer_entropy, reduced_state_at, s_lin_ddot, s_pointer_ddot,
    PointerBasis, ProductState,
};
use crate::error::{Error, Result};
use crate::factorization::{
    factorization_unitary, gell_mann_basis, split_hamiltonian, transform_hamiltonian,
    FactorizationPoint,
};
use crate::gpo::{build_gpo, symmetric_alpha, GpoSystem};
use crate::hilbert::{linear_entropy, tensor_product, BipartiteShape, Operator};

/// How successive samples move through factorization space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkMode {
    /// Every sample is an independent perturbation of the reference split.
    Independent,
    /// Increments accumulate into a random walk away from the reference.
    Cumulative,
}

/// How the classicality score is extracted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeMode {
    /// Use the closed-form t^2 coefficients at t = 0.
    Coefficient,
    /// Evolve exactly to `t0 = 1 / ||H||_F` and use the entropy values
    /// there (pointer entropy with its t = 0 baseline subtracted).
    EvolvedT0,
}

/// Sweep controls; see field docs for defaults.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub seed: u64,
    /// Total number of records including the reference sample 0.
    pub n_samples: usize,
    /// Expected norm of one Gaussian increment in theta space.
    pub step_sigma: f64,
    pub walk_mode: WalkMode,
    /// Width of the peaked trial states (0 = exact eigenstates).
    pub state_width: f64,
    pub time_mode: TimeMode,
    /// Minimum `||H_int||_F / ||H_self||_F` for a record to count as inside
    /// the measurement-dominated regime.
    pub qml_guard: f64,
    /// Greedy mode: only keep walk increments that do not increase the
    /// Schwinger entropy. Off by default.
    pub descent: bool,
    pub cpo_restarts: usize,
    pub cpo_max_iters: usize,
    pub cpo_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_samples: 50,
            step_sigma: 0.05,
            walk_mode: WalkMode::Cumulative,
            state_width: 0.0,
            time_mode: TimeMode::Coefficient,
            qml_guard: 2.0,
            descent: false,
            cpo_restarts: 8,
            cpo_max_iters: 200,
            cpo_tol: 1e-12,
        }
    }
}

/// Scores and diagnostics of one factorization sample.
#[derive(Clone, Debug)]
pub struct SweepRecord {
    pub index: usize,
    pub theta_norm: f64,
    pub s_lin_ddot_avg: f64,
    pub s_pointer_ddot_avg: f64,
    /// `max(s_lin_ddot_avg, s_pointer_ddot_avg)`.
    pub s_schwinger: f64,
    pub cpo_residual: f64,
    pub qml_ratio: f64,
    pub qml_violated: bool,
    pub cpo_nonconverged: bool,
}

/// Sweep output: records ordered by index and the index of the minimal
/// Schwinger entropy among records inside the guard.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub argmin: Option<usize>,
}

/// Two identical-spec oscillators coupled through their lattice positions.
#[derive(Clone, Copy, Debug)]
pub struct OscillatorModel {
    /// Odd dimension of each factor.
    pub d: usize,
    pub mass: f64,
    pub omega: f64,
    /// Position-position coupling strength.
    pub coupling: f64,
    /// GPO scale; `None` uses the symmetric choice `sqrt(2 pi / d)`.
    pub alpha: Option<f64>,
}

impl OscillatorModel {
    pub fn new(d: usize, mass: f64, omega: f64, coupling: f64) -> Self {
        Self {
            d,
            mass,
            omega,
            coupling,
            alpha: None,
        }
    }

    pub fn gpo(&self) -> Result<GpoSystem> {
        build_gpo(self.d, self.alpha.unwrap_or_else(|| symmetric_alpha(self.d)))
    }

    /// Single-oscillator Hamiltonian `pi^2 / 2m + (m w^2 / 2) phi^2`.
    pub fn self_hamiltonian(&self, g: &GpoSystem) -> Operator {
        g.pi_pow(2)
            .scale_re(0.5 / self.mass)
            .add(&g.phi_pow(2).scale_re(0.5 * self.mass * self.omega * self.omega))
    }

    /// The coupling that lands the split at a requested interaction/self
    /// norm ratio.
    pub fn coupling_for_qml_ratio(d: usize, mass: f64, omega: f64, ratio: f64) -> Result<f64> {
        let mut model = Self::new(d, mass, omega, 1.0);
        model.coupling = 1.0;
        let g = model.gpo()?;
        let h_self_single = model.self_hamiltonian(&g).traceless_part();
        let eye = Operator::identity(d);
        let h_self = tensor_product(&h_self_single, &eye)
            .add(&tensor_product(&eye, &h_self_single));
        let phi_sq = g.phi.frobenius_norm().powi(2);
        Ok(ratio * h_self.frobenius_norm() / phi_sq)
    }
}

/// Assemble the coupled-oscillator Hamiltonian and its reference split.
pub fn build_coupled_oscillators(
    model: &OscillatorModel,
) -> Result<(Operator, crate::factorization::HamiltonianSplit)> {
    let g = model.gpo()?;
    let h_single = model.self_hamiltonian(&g);
    let eye = Operator::identity(model.d);
    let h = tensor_product(&h_single, &eye)
        .add(&tensor_product(&eye, &h_single))
        .add(&tensor_product(&g.phi, &g.phi).scale_re(model.coupling));
    let shape = BipartiteShape::new(model.d, model.d)?;
    let split = split_hamiltonian(&h, shape)?;
    Ok((h, split))
}

/// Evaluate one factorization point: rotate, split, find the CPO, and
/// average the two growth coefficients over the peaked trial states.
pub fn evaluate_factorization(
    h: &Operator,
    theta: &FactorizationPoint,
    shape: BipartiteShape,
    config: &SweepConfig,
) -> Result<SweepRecord> {
    if shape.total() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "evaluate: shape {}x{} vs H dim {}",
            shape.d_a,
            shape.d_b,
            h.dim()
        )));
    }
    let basis = gell_mann_basis(h.dim())?;
    evaluate_with_basis(h, theta, shape, config, &basis, 0)
}

fn evaluate_with_basis(
    h: &Operator,
    theta: &FactorizationPoint,
    shape: BipartiteShape,
    config: &SweepConfig,
    basis: &crate::factorization::GellMannBasis,
    index: usize,
) -> Result<SweepRecord> {
    let u = factorization_unitary(theta, basis)?;
    let h_rot = transform_hamiltonian(h, &u)?;
    let split = split_hamiltonian(&h_rot, shape)?;
    let qml_ratio = split.qml_ratio();
    let mut qml_violated = qml_ratio < config.qml_guard;

    let (cpo_residual, cpo_nonconverged, basis_a, trial_states) = match find_cpo(
        &split,
        config.cpo_restarts,
        config.cpo_max_iters,
        config.cpo_tol,
    ) {
        Ok(cpo) => {
            let basis_a = cpo.pointer_basis()?;
            let set = peaked_states(&cpo, config.state_width)?;
            (cpo.residual, !cpo.converged, basis_a, set.states)
        }
        Err(Error::EmptyInteraction) => {
            // Fully decoupled split: no monitoring at all. Flag and score
            // with the self-Hamiltonian eigenbasis as a stand-in pointer
            // basis.
            qml_violated = true;
            let basis_a = PointerBasis::from_observable(&split.h_a)?;
            let ready = crate::hilbert::PureState::uniform(shape.d_b);
            let states = (0..shape.d_a)
                .map(|j| {
                    ProductState::new(
                        crate::cpo::peaked_superposition(
                            basis_a.vectors(),
                            j,
                            config.state_width,
                        ),
                        ready.clone(),
                    )
                })
                .collect();
            (0.0, false, basis_a, states)
        }
        Err(e) => return Err(e),
    };

    let mut lin_sum = 0.0;
    let mut ptr_sum = 0.0;
    match config.time_mode {
        TimeMode::Coefficient => {
            for state in &trial_states {
                lin_sum += s_lin_ddot(&split, state)?.s_lin_ddot;
                let dist = pointer_distribution(&split, &basis_a, state, 2)?;
                ptr_sum += s_pointer_ddot(&dist)?;
            }
        }
        TimeMode::EvolvedT0 => {
            let t0 = 1.0 / h_rot.frobenius_norm();
            let dec = h_rot.eigh()?;
            for state in &trial_states {
                let rho_a = reduced_state_at(&dec, state, shape, t0)?;
                lin_sum += linear_entropy(&rho_a);
                let p_t = basis_a.diagonal_expectations(&rho_a.as_operator())?;
                let p_0 = basis_a.diagonal_expectations(&state.rho_a().as_operator())?;
                ptr_sum += pointer_entropy(&p_t) - pointer_entropy(&p_0);
            }
        }
    }
    let n = trial_states.len() as f64;
    let s_lin_ddot_avg = lin_sum / n;
    let s_pointer_ddot_avg = ptr_sum / n;

    Ok(SweepRecord {
        index,
        theta_norm: theta.norm(),
        s_lin_ddot_avg,
        s_pointer_ddot_avg,
        s_schwinger: s_lin_ddot_avg.max(s_pointer_ddot_avg),
        cpo_residual,
        qml_ratio,
        qml_violated,
        cpo_nonconverged,
    })
}

/// Gaussian increment for one sample index, drawn from its own stream of
/// the master seed so results do not depend on scheduling.
fn increment(seed: u64, index: usize, n_params: usize, step_sigma: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let per_component = step_sigma / (n_params as f64).sqrt();
    (0..n_params)
        .map(|_| per_component * rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect()
}

/// Run the sweep. Sample 0 is the reference factorization `theta = 0`;
/// the argmin is taken over records that stay inside the QML guard.
pub fn sweep(h: &Operator, shape: BipartiteShape, config: &SweepConfig) -> Result<SweepResult> {
    if config.n_samples < 1 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if shape.total() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "sweep: shape {}x{} vs H dim {}",
            shape.d_a,
            shape.d_b,
            h.dim()
        )));
    }
    let dim = h.dim();
    let n_params = dim * dim - 1;
    let basis = gell_mann_basis(dim)?;

    let records: Vec<SweepRecord> = if config.descent {
        // Greedy walk: sequential by construction.
        let mut records = Vec::with_capacity(config.n_samples);
        let mut current = FactorizationPoint::zero(dim);
        let mut current_score = f64::INFINITY;
        for index in 0..config.n_samples {
            let proposal = if index == 0 {
                current.clone()
            } else {
                let delta = increment(config.seed, index, n_params, config.step_sigma);
                let theta: Vec<f64> = match config.walk_mode {
                    WalkMode::Independent => delta,
                    WalkMode::Cumulative => current
                        .theta
                        .iter()
                        .zip(&delta)
                        .map(|(t, d)| t + d)
                        .collect(),
                };
                FactorizationPoint { theta }
            };
            let record = evaluate_with_basis(h, &proposal, shape, config, &basis, index)?;
            let accepted = index == 0 || record.s_schwinger <= current_score;
            if accepted {
                current = proposal;
                current_score = record.s_schwinger;
            }
            records.push(record);
        }
        records
    } else {
        let mut thetas: Vec<FactorizationPoint> = Vec::with_capacity(config.n_samples);
        thetas.push(FactorizationPoint::zero(dim));
        for index in 1..config.n_samples {
            let delta = increment(config.seed, index, n_params, config.step_sigma);
            let theta = match config.walk_mode {
                WalkMode::Independent => delta,
                WalkMode::Cumulative => thetas[index - 1]
                    .theta
                    .iter()
                    .zip(&delta)
                    .map(|(t, d)| t + d)
                    .collect(),
            };
            thetas.push(FactorizationPoint { theta });
        }
        thetas
            .par_iter()
            .enumerate()
            .map(|(index, theta)| evaluate_with_basis(h, theta, shape, config, &basis, index))
            .collect::<Result<Vec<_>>>()?
    };

    let argmin = records
        .iter()
        .filter(|r| !r.qml_violated && r.s_schwinger.is_finite())
        .min_by(|a, b| a.s_schwinger.total_cmp(&b.s_schwinger))
        .map(|r| r.index);
    Ok(SweepResult { records, argmin })
}
