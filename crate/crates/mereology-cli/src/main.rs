//! Command-line front end for the factorization experiments.
//!
//! Subcommands:
//! - `gpo`: shift profiles and collimation of operators on one GPO system.
//! - `correlate`: the self-Hamiltonian ensemble correlating collimation,
//!   variance rate, and pointer-entropy growth.
//! - `sweep`: the factorization sweep over the coupled-oscillator model.
//! - `decohere`: exact reduced-state trajectory of the coupled-oscillator
//!   model in its pointer basis.
//!
//! Exit codes: 0 success, 1 expectation failure (`--expect-qc`), 2 usage or
//! configuration error.

mod config;
mod opspec;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;

use config::{ExperimentConfig, DEFAULT_QML_RATIO};
use mereology::ensemble::{run_ensemble, EnsembleConfig};
use mereology::entropy::{decoherence_rates, reduced_state_at, PointerBasis, ProductState};
use mereology::gpo::{build_gpo, schwinger_expand, shift_profile, symmetric_alpha, Axis};
use mereology::hilbert::{linear_entropy, BipartiteShape, PureState};
use mereology::sweep::{build_coupled_oscillators, sweep, OscillatorModel};
use opspec::OperatorSpec;
use output::{fmt_f64, resolve_output_dir, write_manifest, Csv};

#[derive(Parser)]
#[command(
    name = "mereology",
    version,
    about = "Quasi-classicality scores for Hilbert-space factorizations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shift profile and collimation of an operator on a GPO system.
    Gpo(GpoArgs),
    /// Self-Hamiltonian ensemble: collimation vs spreading correlations.
    Correlate(CorrelateArgs),
    /// Factorization sweep over the coupled-oscillator model.
    Sweep(SweepArgs),
    /// Exact decoherence trajectory of the coupled-oscillator model.
    Decohere(DecohereArgs),
}

#[derive(Args)]
struct GpoArgs {
    /// Odd dimension of the GPO system.
    #[arg(long)]
    dim: usize,
    /// GPO scale; defaults to the symmetric choice sqrt(2 pi / d).
    #[arg(long)]
    alpha: Option<f64>,
    /// Operator spec: pi^N, phi^N, cos(pi), cos(phi), random(seed).
    #[arg(long)]
    operator: String,
    /// Profile axis: phi or pi.
    #[arg(long, default_value = "phi")]
    axis: String,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: String,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Odd dimension of the system factor.
    #[arg(long, default_value_t = 27)]
    dim: usize,
    /// Number of ensemble instances (at least 5).
    #[arg(long, default_value_t = 30)]
    ensemble: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dimension of the passive environment factor.
    #[arg(long, default_value_t = 3)]
    d_env: usize,
    /// Width of the peaked state over the phi eigenvalue index.
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value = "out")]
    out: String,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exit nonzero unless the reference factorization wins.
    #[arg(long)]
    expect_qc: bool,
    /// Greedy accept/reject walk instead of the plain sweep.
    #[arg(long)]
    descent: bool,
}

#[derive(Args)]
struct DecohereArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trajectory end time; defaults to the shortest predicted
    /// decoherence time.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 60)]
    n_steps: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gpo(args) => cmd_gpo(args),
        Command::Correlate(args) => cmd_correlate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Decohere(args) => cmd_decohere(args),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, String> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            ExperimentConfig::from_toml(&text)
        }
    }
}

fn oscillator_from_config(config: &ExperimentConfig) -> Result<OscillatorModel, String> {
    let m = &config.model;
    if m.d_a != m.d_b {
        return Err(format!(
            "the coupled-oscillator model uses one odd dimension per factor; got d_a = {} and d_b = {}",
            m.d_a, m.d_b
        ));
    }
    let coupling = match m.lambda {
        Some(l) => l,
        None => OscillatorModel::coupling_for_qml_ratio(m.d_a, m.mass, m.omega, DEFAULT_QML_RATIO)
            .map_err(|e| e.to_string())?,
    };
    Ok(OscillatorModel {
        d: m.d_a,
        mass: m.mass,
        omega: m.omega,
        coupling,
        alpha: m.alpha,
    })
}

fn cmd_gpo(args: GpoArgs) -> Result<ExitCode, String> {
    let start = Instant::now();
    let spec = OperatorSpec::parse(&args.operator)?;
    let axis = match args.axis.as_str() {
        "phi" => Axis::Phi,
        "pi" => Axis::Pi,
        other => return Err(format!("axis must be \"phi\" or \"pi\", got \"{other}\"")),
    };
    let alpha = args.alpha.unwrap_or_else(|| symmetric_alpha(args.dim));
    let g = build_gpo(args.dim, alpha).map_err(|e| e.to_string())?;
    let op = spec.build(&g);
    let expansion = schwinger_expand(&op, &g).map_err(|e| e.to_string())?;
    let profile = shift_profile(&expansion, axis);

    let dir = resolve_output_dir(&args.out).map_err(|e| e.to_string())?;
    let mut csv = Csv::new(&["a", "weight"]);
    for (k, w) in profile.weights.iter().enumerate() {
        csv.row(&[(k as i64 - g.l as i64).to_string(), fmt_f64(*w)]);
    }
    csv.write_to(&dir.join("profile.csv")).map_err(|e| e.to_string())?;

    let mut table = Csv::new(&["operator", "collimation"]);
    table.row(&[spec.label(), fmt_f64(profile.collimation)]);
    table
        .write_to(&dir.join("collimation.csv"))
        .map_err(|e| e.to_string())?;

    let resolved = format!(
        "dim = {}\nalpha = {}\noperator = \"{}\"\naxis = \"{}\"",
        args.dim,
        fmt_f64(alpha),
        spec.label(),
        args.axis
    );
    write_manifest(&dir, "gpo", start.elapsed(), &resolved, &[]).map_err(|e| e.to_string())?;
    println!(
        "collimation {} of {} at d = {}: {:.6}",
        args.axis,
        spec.label(),
        args.dim,
        profile.collimation
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_correlate(args: CorrelateArgs) -> Result<ExitCode, String> {
    let start = Instant::now();
    if args.ensemble < 5 {
        return Err(format!(
            "ensemble size must be at least 5, got {}",
            args.ensemble
        ));
    }
    let config = EnsembleConfig {
        d_a: args.dim,
        d_env: args.d_env,
        n_instances: args.ensemble,
        seed: args.seed,
        state_width: args.width,
        alpha: None,
    };
    let (points, summary) = run_ensemble(&config).map_err(|e| e.to_string())?;

    let dir = resolve_output_dir(&args.out).map_err(|e| e.to_string())?;
    let mut csv = Csv::new(&[
        "instance",
        "collimation",
        "variance_rate",
        "s_pointer_ddot",
        "s_lin_ddot",
    ]);
    for p in &points {
        csv.row(&[
            p.instance.to_string(),
            fmt_f64(p.collimation),
            fmt_f64(p.variance_rate),
            fmt_f64(p.s_pointer_ddot),
            fmt_f64(p.s_lin_ddot),
        ]);
    }
    csv.write_to(&dir.join("ensemble.csv")).map_err(|e| e.to_string())?;

    let resolved = format!(
        "dim = {}\nensemble = {}\nseed = {}\nd_env = {}\nwidth = {}",
        args.dim,
        args.ensemble,
        args.seed,
        args.d_env,
        fmt_f64(args.width)
    );
    write_manifest(
        &dir,
        "correlate",
        start.elapsed(),
        &resolved,
        &[
            (
                "spearman_collimation_rate",
                fmt_f64(summary.spearman_collimation_rate),
            ),
            (
                "spearman_pointer_rate",
                fmt_f64(summary.spearman_pointer_rate),
            ),
        ],
    )
    .map_err(|e| e.to_string())?;

    println!(
        "spearman(collimation, variance_rate) = {:+.4}",
        summary.spearman_collimation_rate
    );
    println!(
        "spearman(s_pointer_ddot, variance_rate) = {:+.4}",
        summary.spearman_pointer_rate
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, String> {
    let start = Instant::now();
    let config = load_config(&args.config)?;
    let model = oscillator_from_config(&config)?;
    let sweep_config = config.sweep_config(args.descent)?;
    let (h, reference_split) = build_coupled_oscillators(&model).map_err(|e| e.to_string())?;
    let h = match config.model.scramble_seed {
        None => h,
        Some(seed) => {
            // Push the reference factorization away from the quasi-classical
            // one with a seeded random rotation.
            let dim = h.dim();
            let basis =
                mereology::factorization::gell_mann_basis(dim).map_err(|e| e.to_string())?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let theta: Vec<f64> = (0..basis.len())
                .map(|_| rand::Rng::gen_range(&mut rng, -0.1..0.1))
                .collect();
            let u = mereology::factorization::factorization_unitary(
                &mereology::factorization::FactorizationPoint { theta },
                &basis,
            )
            .map_err(|e| e.to_string())?;
            mereology::factorization::transform_hamiltonian(&h, &u).map_err(|e| e.to_string())?
        }
    };
    let shape = BipartiteShape::new(model.d, model.d).map_err(|e| e.to_string())?;
    let result = sweep(&h, shape, &sweep_config).map_err(|e| e.to_string())?;

    let dir = resolve_output_dir(&config.output.directory).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("config_resolved.toml"), config.to_toml())
        .map_err(|e| e.to_string())?;

    let mut csv = Csv::new(&[
        "index",
        "theta_norm",
        "s_lin_ddot_avg",
        "s_pointer_ddot_avg",
        "s_schwinger",
        "cpo_residual",
        "qml_ratio",
        "flags",
    ]);
    for r in &result.records {
        let mut flags = Vec::new();
        if r.qml_violated {
            flags.push("qml_violated");
        }
        if r.cpo_nonconverged {
            flags.push("cpo_nonconverged");
        }
        csv.row(&[
            r.index.to_string(),
            fmt_f64(r.theta_norm),
            fmt_f64(r.s_lin_ddot_avg),
            fmt_f64(r.s_pointer_ddot_avg),
            fmt_f64(r.s_schwinger),
            fmt_f64(r.cpo_residual),
            fmt_f64(r.qml_ratio),
            flags.join(";"),
        ]);
    }
    csv.write_to(&dir.join("sweep.csv")).map_err(|e| e.to_string())?;

    if config.output.emit_plots {
        let mut plot = Csv::new(&["theta_norm", "s_schwinger"]);
        for r in &result.records {
            plot.row(&[fmt_f64(r.theta_norm), fmt_f64(r.s_schwinger)]);
        }
        plot.write_to(&dir.join("schwinger_vs_theta.csv"))
            .map_err(|e| e.to_string())?;
    }

    // Candidate pointer observable of the reference split, reported as
    // coefficient vectors over the Gell-Mann generators of each factor.
    if reference_split.n_int() > 0 {
        let cpo = mereology::cpo::find_cpo(
            &reference_split,
            sweep_config.cpo_restarts,
            sweep_config.cpo_max_iters,
            sweep_config.cpo_tol,
        )
        .map_err(|e| e.to_string())?;
        let basis_a = mereology::factorization::gell_mann_basis(shape.d_a)
            .map_err(|e| e.to_string())?;
        let basis_b = mereology::factorization::gell_mann_basis(shape.d_b)
            .map_err(|e| e.to_string())?;
        let mut table = Csv::new(&["factor", "index", "coefficient"]);
        for (factor, op, basis) in [("A", &cpo.o_a, &basis_a), ("B", &cpo.o_b, &basis_b)] {
            for (i, c) in basis.project(op).map_err(|e| e.to_string())?.iter().enumerate() {
                table.row(&[factor.into(), i.to_string(), fmt_f64(*c)]);
            }
        }
        table.write_to(&dir.join("cpo.csv")).map_err(|e| e.to_string())?;
        let mut res = Csv::new(&["residual", "restarts_used", "converged"]);
        res.row(&[
            fmt_f64(cpo.residual),
            cpo.restarts_used.to_string(),
            cpo.converged.to_string(),
        ]);
        res.write_to(&dir.join("cpo_residual.csv"))
            .map_err(|e| e.to_string())?;
    }

    if reference_split.qml_ratio() < sweep_config.qml_guard {
        eprintln!(
            "warning: reference split sits below the QML guard ({:.3} < {:.3})",
            reference_split.qml_ratio(),
            sweep_config.qml_guard
        );
    }

    let argmin_text = result
        .argmin
        .map(|i| i.to_string())
        .unwrap_or_else(|| "none (all samples violated the QML guard)".into());
    write_manifest(
        &dir,
        "sweep",
        start.elapsed(),
        &config.to_toml(),
        &[
            ("argmin", format!("\"{argmin_text}\"")),
            ("coupling", fmt_f64(model.coupling)),
            ("reference_qml_ratio", fmt_f64(reference_split.qml_ratio())),
        ],
    )
    .map_err(|e| e.to_string())?;

    println!(
        "swept {} factorizations; argmin = {argmin_text}",
        result.records.len()
    );
    if args.expect_qc {
        if result.argmin == Some(0) {
            println!("reference factorization wins");
        } else {
            eprintln!(
                "expectation failed: argmin is {argmin_text}, expected the reference sample 0"
            );
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_decohere(args: DecohereArgs) -> Result<ExitCode, String> {
    let start = Instant::now();
    let config = load_config(&args.config)?;
    let model = oscillator_from_config(&config)?;
    let (h, split) = build_coupled_oscillators(&model).map_err(|e| e.to_string())?;
    let shape = split.shape;
    let d_a = shape.d_a;

    // Uniform superposition over the pointer basis on A and the uniform
    // ready state on B: every off-diagonal starts at 1/d_A.
    let state = ProductState::new(PureState::uniform(d_a), PureState::uniform(shape.d_b));

    let model_rates = if split.n_int() > 0 {
        Some(decoherence_rates(&split, &state).map_err(|e| e.to_string())?)
    } else {
        None
    };

    let t_max = match args.t_max {
        Some(t) => t,
        None => model_rates
            .as_ref()
            .map(|m| {
                let mut tau_min = f64::INFINITY;
                for j in 0..d_a {
                    for k in 0..d_a {
                        if m.tau[(j, k)].is_finite() {
                            tau_min = tau_min.min(m.tau[(j, k)]);
                        }
                    }
                }
                tau_min
            })
            .unwrap_or(1.0 / h.frobenius_norm()),
    };
    if !t_max.is_finite() || t_max <= 0.0 || args.n_steps < 2 {
        return Err("decohere needs t_max > 0 and at least 2 steps".into());
    }

    // Pointer basis: joint eigenbasis of the interaction factors, or the
    // self-term eigenbasis when the model is uncoupled.
    let basis = match &model_rates {
        Some(m) => m.basis.clone(),
        None => PointerBasis::from_observable(&split.h_a).map_err(|e| e.to_string())?,
    };

    let mut header: Vec<String> = vec!["t".into(), "s_lin".into()];
    for j in 0..d_a {
        header.push(format!("p_{j}"));
    }
    for j in 0..d_a {
        for k in (j + 1)..d_a {
            header.push(format!("absrho_{j}_{k}"));
        }
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut csv = Csv::new(&header_refs);

    let dec = h.eigh().map_err(|e| e.to_string())?;
    for step in 0..=args.n_steps {
        let t = t_max * step as f64 / args.n_steps as f64;
        let rho = reduced_state_at(&dec, &state, shape, t).map_err(|e| e.to_string())?;
        let mut cells = vec![fmt_f64(t), fmt_f64(linear_entropy(&rho))];
        for j in 0..d_a {
            let vj = basis.vector(j).amplitudes().clone();
            let p = (vj.adjoint() * rho.matrix() * &vj)[(0, 0)].re;
            cells.push(fmt_f64(p));
        }
        for j in 0..d_a {
            for k in (j + 1)..d_a {
                let vj = basis.vector(j).amplitudes().clone();
                let vk = basis.vector(k).amplitudes().clone();
                let r = (vj.adjoint() * rho.matrix() * &vk)[(0, 0)].norm();
                cells.push(fmt_f64(r));
            }
        }
        csv.row(&cells);
    }

    let dir = resolve_output_dir(&config.output.directory).map_err(|e| e.to_string())?;
    std::fs::write(dir.join("config_resolved.toml"), config.to_toml())
        .map_err(|e| e.to_string())?;
    csv.write_to(&dir.join("trajectory.csv")).map_err(|e| e.to_string())?;

    if let Some(m) = &model_rates {
        let mut rates = Csv::new(&["j", "k", "gamma", "tau"]);
        for j in 0..d_a {
            for k in (j + 1)..d_a {
                rates.row(&[
                    j.to_string(),
                    k.to_string(),
                    fmt_f64(m.gamma[(j, k)]),
                    fmt_f64(m.tau[(j, k)]),
                ]);
            }
        }
        rates
            .write_to(&dir.join("decoherence_model.csv"))
            .map_err(|e| e.to_string())?;
    }

    write_manifest(
        &dir,
        "decohere",
        start.elapsed(),
        &config.to_toml(),
        &[
            ("t_max", fmt_f64(t_max)),
            ("n_steps", args.n_steps.to_string()),
            ("coupling", fmt_f64(model.coupling)),
        ],
    )
    .map_err(|e| e.to_string())?;
    println!(
        "trajectory with {} steps to t = {:.4} written",
        args.n_steps, t_max
    );
    Ok(ExitCode::SUCCESS)
}
