//! TOML experiment configuration with strict keys and documented defaults.
//!
//! Unknown keys are rejected; missing keys fall back to defaults. The fully
//! resolved configuration is echoed into the output directory so a run can
//! be reproduced from its artifacts alone.

use serde::{Deserialize, Serialize};

use mereology::sweep::{SweepConfig, TimeMode, WalkMode};

/// Ratio `||H_int|| / ||H_self||` used to pick the default coupling when
/// the config leaves `lambda` unset. Deep enough into the measurement
/// limit that entanglement growth dominates the walk's saturation plateau.
pub const DEFAULT_QML_RATIO: f64 = 20.0;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub sweep: SweepSection,
    pub cpo: CpoSection,
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    /// Odd dimension of the system factor.
    pub d_a: usize,
    /// Odd dimension of the environment factor; the coupled-oscillator
    /// model requires `d_a == d_b`.
    pub d_b: usize,
    pub mass: f64,
    pub omega: f64,
    /// Position-position coupling; when omitted it is chosen so the
    /// reference split sits at `DEFAULT_QML_RATIO`.
    pub lambda: Option<f64>,
    /// GPO scale; when omitted the symmetric choice `sqrt(2 pi / d)` is
    /// used.
    pub alpha: Option<f64>,
    /// When set, conjugate the assembled Hamiltonian by a seeded random
    /// factorization unitary before sweeping, so sample 0 is no longer the
    /// quasi-classical split. Useful with `--expect-qc` as a CI hook.
    pub scramble_seed: Option<u64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            d_a: 5,
            d_b: 5,
            mass: 1.0,
            omega: 1.0,
            lambda: None,
            alpha: None,
            scramble_seed: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub seed: u64,
    pub n_samples: usize,
    pub step_sigma: f64,
    /// "independent" or "cumulative".
    pub walk_mode: String,
    /// "coefficient" or "evolved_t0".
    pub time_mode: String,
    pub qml_guard: f64,
    pub state_width: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            seed: 0,
            n_samples: 50,
            step_sigma: 0.05,
            walk_mode: "cumulative".into(),
            time_mode: "coefficient".into(),
            qml_guard: 2.0,
            state_width: 0.0,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct CpoSection {
    pub n_restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for CpoSection {
    fn default() -> Self {
        Self {
            n_restarts: 8,
            max_iters: 200,
            tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: String,
    pub emit_plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            emit_plots: false,
        }
    }
}

impl ExperimentConfig {
    /// Parse strictly from TOML text; error messages carry line numbers.
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config error: {e}"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn walk_mode(&self) -> Result<WalkMode, String> {
        match self.sweep.walk_mode.as_str() {
            "independent" => Ok(WalkMode::Independent),
            "cumulative" => Ok(WalkMode::Cumulative),
            other => Err(format!(
                "config error: walk_mode must be \"independent\" or \"cumulative\", got \"{other}\""
            )),
        }
    }

    pub fn time_mode(&self) -> Result<TimeMode, String> {
        match self.sweep.time_mode.as_str() {
            "coefficient" => Ok(TimeMode::Coefficient),
            "evolved_t0" => Ok(TimeMode::EvolvedT0),
            other => Err(format!(
                "config error: time_mode must be \"coefficient\" or \"evolved_t0\", got \"{other}\""
            )),
        }
    }

    pub fn sweep_config(&self, descent: bool) -> Result<SweepConfig, String> {
        Ok(SweepConfig {
            seed: self.sweep.seed,
            n_samples: self.sweep.n_samples,
            step_sigma: self.sweep.step_sigma,
            walk_mode: self.walk_mode()?,
            state_width: self.sweep.state_width,
            time_mode: self.time_mode()?,
            qml_guard: self.sweep.qml_guard,
            descent,
            cpo_restarts: self.cpo.n_restarts,
            cpo_max_iters: self.cpo.max_iters,
            cpo_tol: self.cpo.tol,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_unknown_keys_are_rejected() {
        let c = ExperimentConfig::default();
        let text = c.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back.model.d_a, 5);
        assert_eq!(back.sweep.n_samples, 50);

        let bad = "[model]\nd_a = 5\nnot_a_key = 1\n";
        assert!(ExperimentConfig::from_toml(bad).is_err());
    }

    #[test]
    fn partial_config_fills_defaults() {
        let text = "[sweep]\nseed = 9\n";
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(c.sweep.seed, 9);
        assert_eq!(c.sweep.n_samples, 50);
        assert_eq!(c.model.d_a, 5);
        assert_eq!(c.cpo.n_restarts, 8);
    }

    #[test]
    fn mode_strings_are_validated() {
        let mut c = ExperimentConfig::default();
        c.sweep.walk_mode = "sideways".into();
        assert!(c.walk_mode().is_err());
        c.sweep.walk_mode = "independent".into();
        assert!(matches!(c.walk_mode(), Ok(WalkMode::Independent)));
    }
}
