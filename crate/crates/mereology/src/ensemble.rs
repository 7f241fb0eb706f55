//! Self-Hamiltonian ensembles correlating operator collimation with the
//! spreading of a fixed pointer observable.
//!
//! Each instance interpolates between a highly collimated oscillator
//! Hamiltonian (quadratic in the conjugate pair) and a random Hermitian
//! operator, keeping the pointer observable fixed at `phi` and the initial
//! state a fixed Gaussian peak in the `phi` eigenbasis. Per instance the
//! ensemble reports the phi-collimation of the self term, the magnitude of
//! the variance rate of `phi`, and the pointer-entropy growth coefficient.
//! Collimated self terms spread peaked states slowly, so collimation should
//! anti-correlate with the spreading measures.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cpo::peaked_superposition;
use crate::entropy::{
    pointer_distribution, s_lin_ddot, s_pointer_ddot, variance_rate, PointerBasis, ProductState,
    VarianceMode,
};
use crate::error::Result;
use crate::factorization::HamiltonianSplit;
use crate::gpo::{build_gpo, phi_collimation, symmetric_alpha};
use crate::hilbert::{random_real_symmetric, BipartiteShape, Operator, PureState};
use crate::stats::spearman;

/// Controls for the correlation ensemble.
#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    /// Odd dimension of the system factor carrying the conjugate pair.
    pub d_a: usize,
    /// Dimension of the passive environment factor (the ensemble has no
    /// interaction; the environment only completes the bipartite shape).
    pub d_env: usize,
    pub n_instances: usize,
    pub seed: u64,
    /// Width of the Gaussian peak over the `phi` eigenvalue index.
    pub state_width: f64,
    /// GPO scale; `None` uses the symmetric choice.
    pub alpha: Option<f64>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            d_a: 27,
            d_env: 3,
            n_instances: 30,
            seed: 0,
            state_width: 1.0,
            alpha: None,
        }
    }
}

/// One ensemble instance.
#[derive(Clone, Copy, Debug)]
pub struct EnsemblePoint {
    pub instance: usize,
    /// Mixing weight of the random part, `0 = pure oscillator`.
    pub mix: f64,
    pub collimation: f64,
    /// `|d Var(phi) / dt|` at `t = 0`.
    pub variance_rate: f64,
    pub s_pointer_ddot: f64,
    pub s_lin_ddot: f64,
}

/// Spearman correlations across the ensemble.
#[derive(Clone, Copy, Debug)]
pub struct EnsembleSummary {
    pub spearman_collimation_rate: f64,
    pub spearman_pointer_rate: f64,
}

/// Run the ensemble and compute its rank correlations.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<(Vec<EnsemblePoint>, EnsembleSummary)> {
    let d = config.d_a;
    let g = build_gpo(d, config.alpha.unwrap_or_else(|| symmetric_alpha(d)))?;
    let shape = BipartiteShape::new(d, config.d_env)?;

    // Anchor: unit mass and frequency oscillator, highly phi-collimated.
    let anchor = g.pi_pow(2).scale_re(0.5).add(&g.phi_pow(2).scale_re(0.5));
    let scale = anchor.traceless_part().frobenius_norm();

    // Uncollimated polynomial endpoint: the squeeze term (phi pi + pi phi)/2
    // actively stretches the phi variance of any peaked packet. The random
    // draws below are real symmetric and the packet has real amplitudes, so
    // by time-reversal symmetry the draws contribute nothing to the t = 0
    // variance rate; the squeeze is the channel that drives it.
    let squeeze = {
        let s = g.phi.mul(&g.pi).add(&g.pi.mul(&g.phi)).scale_re(0.5);
        s.scale_re(scale / s.traceless_part().frobenius_norm())
    };

    // Fixed peaked state in the phi eigenbasis (phi is diagonal, so its
    // eigenvectors are the computational basis states), environment ready.
    let phi_vectors: Vec<PureState> = (0..d).map(|k| PureState::basis_state(d, k)).collect();
    let psi_a = peaked_superposition(&phi_vectors, g.l, config.state_width);
    let state = ProductState::new(psi_a, PureState::uniform(config.d_env));
    let basis = PointerBasis::new(phi_vectors)?;

    let n = config.n_instances;
    let mut points = Vec::with_capacity(n);
    for instance in 0..n {
        let mix = if n > 1 {
            instance as f64 / (n - 1) as f64
        } else {
            0.0
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(instance as u64);
        let random = random_real_symmetric(d, &mut rng);
        let random = random.scale_re(scale / random.traceless_part().frobenius_norm());
        let target = squeeze.add(&random).scale_re(0.5);
        let target = target.scale_re(scale / target.traceless_part().frobenius_norm());
        let h_self = anchor.scale_re(1.0 - mix).add(&target.scale_re(mix));
        // Rescale so every instance carries the same dynamical norm.
        let traceless = h_self.traceless_part();
        let h_dyn = traceless.scale_re(scale / traceless.frobenius_norm());
        // Collimation sees the raw operator including its trace part; the
        // identity component spreads nothing and boosts collimation.
        let h_for_collimation = h_dyn.add(
            &Operator::identity(d).scale_re(h_self.trace().re / d as f64),
        );
        let collimation = phi_collimation(&h_for_collimation, &g)?;

        let split = HamiltonianSplit::from_parts(
            shape,
            h_dyn.clone(),
            Operator::zeros(config.d_env),
            h_self.trace().re,
            vec![],
        )?;
        let rate = variance_rate(&split, &g.phi, &state, VarianceMode::General)?;
        let dist = pointer_distribution(&split, &basis, &state, 2)?;
        let pointer = s_pointer_ddot(&dist)?;
        let lin = s_lin_ddot(&split, &state)?.s_lin_ddot;
        points.push(EnsemblePoint {
            instance,
            mix,
            collimation,
            variance_rate: rate.abs(),
            s_pointer_ddot: pointer,
            s_lin_ddot: lin,
        });
    }

    let coll: Vec<f64> = points.iter().map(|p| p.collimation).collect();
    let rate: Vec<f64> = points.iter().map(|p| p.variance_rate).collect();
    let ptr: Vec<f64> = points.iter().map(|p| p.s_pointer_ddot).collect();
    let summary = EnsembleSummary {
        spearman_collimation_rate: spearman(&coll, &rate),
        spearman_pointer_rate: spearman(&ptr, &rate),
    };
    Ok((points, summary))
}
