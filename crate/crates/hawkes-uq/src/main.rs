//! Command-line workflows: simulate sequences, fit influence matrices,
//! build confidence intervals, run coverage experiments, and recover the
//! influence network from a report.
//!
//! Worker-thread count comes from `HAWKES_UQ_THREADS` (default: all cores);
//! it affects speed only, never results.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hawkes_uq::analytic::StationarySummary;
use hawkes_uq::ci_asymptotic::asymptotic_report;
use hawkes_uq::ci_concentration::concentration_report;
use hawkes_uq::config::ExperimentConfig;
use hawkes_uq::coverage::{run_coverage, write_coverage_csv, CoverageOptions};
use hawkes_uq::fmt_g17;
use hawkes_uq::io::{read_events, write_events};
use hawkes_uq::mle::{fit_node, SolverOptions};
use hawkes_uq::report::{recover_edges, truth_view, ConfidenceReport};
use hawkes_uq::simulate::simulate;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hawkes-uq", version, about = "Hawkes influence-network inference with uncertainty quantification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CiMethod {
    Asymptotic,
    Concentration,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one event sequence and write the CSV + manifest.
    Simulate {
        /// Experiment config JSON (D, T, mu, A, kernels).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path; the manifest lands next to it.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the config horizon.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Fit the influence matrix by per-node maximum likelihood.
    Fit {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        /// Comma-separated node subset to fit (default: all).
        #[arg(long)]
        nodes: Option<String>,
    },
    /// Build confidence intervals on the influence matrix.
    Ci {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = CiMethod::Both)]
        method: CiMethod,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
    },
    /// Monte-Carlo coverage experiment at the config's parameters.
    Coverage {
        #[arg(long)]
        config: PathBuf,
        /// Override the config horizon.
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
    },
    /// Read a CI report and emit the recovered edge list.
    Recover {
        /// Report JSON produced by `ci`.
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Truth matrix for the non-covered-edge diagnostic view: either a
        /// raw JSON matrix or a config JSON whose `A` is used.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Print the stationary summary (spectral radius, expected intensity,
    /// and for shared exponential kernels the W matrix).
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("HAWKES_UQ_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("warning: ignoring invalid HAWKES_UQ_THREADS={threads}");
            }
        }
    }
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn solver_options(tol: f64, max_iters: usize) -> SolverOptions {
    SolverOptions { tol, max_iters, init: None }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out, seed, horizon } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let params = cfg.params()?;
            let t = horizon.unwrap_or(cfg.t);
            let seq = simulate(&params, t, seed)?;
            write_events(&seq, &out)?;
            println!("events: {}", seq.len());
            println!("branching_spectral_radius: {}", fmt_g17(params.branching_spectral_radius()));
            match StationarySummary::from_params(&params) {
                Ok(s) => {
                    let lam: Vec<String> = s.lambda.iter().map(|&x| fmt_g17(x)).collect();
                    println!("expected_intensity: [{}]", lam.join(", "));
                }
                Err(_) => println!("expected_intensity: unavailable (non-exponential kernels)"),
            }
            Ok(())
        }
        Command::Fit { events, config, out, tol, max_iters, nodes } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let seq = read_events(&events)?;
            check_dims(&cfg, seq.node_count())?;
            let opts = solver_options(tol, max_iters);
            let d = cfg.d;
            let selected: Vec<usize> = match nodes {
                Some(spec) => parse_nodes(&spec, d)?,
                None => (0..d).collect(),
            };
            let mut a_hat: Vec<Vec<Option<f64>>> = vec![vec![None; d]; d];
            let mut diags = Vec::new();
            for &i in &selected {
                let (alpha, diag) = fit_node(&seq, i, cfg.mu[i], cfg.kernels.row(i, d), &opts)
                    .with_context(|| format!("fitting node {i}"))?;
                for j in 0..d {
                    a_hat[i][j] = Some(alpha[j]);
                }
                diags.push(diag);
            }
            let total: f64 = diags.iter().map(|dg| dg.loglik).sum();
            let payload = json!({
                "A_hat": a_hat,
                "nodes": selected,
                "loglik_total": total,
                "diagnostics": diags.iter().map(diag_json).collect::<Vec<_>>(),
            });
            std::fs::write(&out, serde_json::to_string_pretty(&payload)? + "\n")?;
            println!("fitted {} node(s); total log-likelihood {}", selected.len(), fmt_g17(total));
            Ok(())
        }
        Command::Ci { events, config, method, epsilon, out, tol, max_iters } => {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                bail!("--epsilon must be in (0, 1), got {epsilon}");
            }
            let cfg = ExperimentConfig::from_path(&config)?;
            let seq = read_events(&events)?;
            check_dims(&cfg, seq.node_count())?;
            let opts = solver_options(tol, max_iters);
            let mu = cfg.mu_vector();
            let payload = match method {
                CiMethod::Asymptotic => {
                    let (report, _, _) = asymptotic_report(&seq, &mu, &cfg.kernels, epsilon, &opts)?;
                    serde_json::to_value(&report)?
                }
                CiMethod::Concentration => {
                    let (report, _, _) =
                        concentration_report(&seq, &mu, &cfg.kernels, epsilon, &opts, true)?;
                    serde_json::to_value(&report)?
                }
                CiMethod::Both => {
                    let (asym, _, _) = asymptotic_report(&seq, &mu, &cfg.kernels, epsilon, &opts)?;
                    let (conc, _, _) =
                        concentration_report(&seq, &mu, &cfg.kernels, epsilon, &opts, true)?;
                    let diff: Vec<_> = asym
                        .entries
                        .iter()
                        .map(|a| {
                            let c = conc.entry(a.i, a.j).expect("same entry grid");
                            let difference = c.width.is_finite().then(|| c.width - a.width);
                            json!({"i": a.i, "j": a.j, "difference": difference})
                        })
                        .collect();
                    json!({"asymptotic": asym, "concentration": conc, "width_difference": diff})
                }
            };
            std::fs::write(&out, serde_json::to_string_pretty(&payload)? + "\n")?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Coverage { config, horizon, reps, epsilon, seed, out, tol, max_iters } => {
            if reps < 50 {
                eprintln!("warning: {reps} replications is low for coverage estimation; 50+ recommended");
            }
            let cfg = ExperimentConfig::from_path(&config)?;
            let params = cfg.params()?;
            let t = horizon.unwrap_or(cfg.t);
            let opts = CoverageOptions {
                epsilon,
                n_reps: reps,
                seed,
                solver: solver_options(tol, max_iters),
            };
            let result = run_coverage(&params, t, &opts)?;
            write_coverage_csv(&result, &out)?;
            println!("asymptotic_coverage: {}", fmt_g17(result.overall_asymptotic_coverage));
            println!("concentration_coverage: {}", fmt_g17(result.overall_concentration_coverage));
            println!("membership_rate: {}", fmt_g17(result.overall_membership_rate));
            if result.failed_reps > 0 {
                eprintln!("warning: {} replication(s) failed and were excluded", result.failed_reps);
            }
            Ok(())
        }
        Command::Recover { report, out, truth } => {
            let text = std::fs::read_to_string(&report)
                .with_context(|| format!("reading {}", report.display()))?;
            let report: ConfidenceReport =
                serde_json::from_str(&text).with_context(|| "parsing confidence report JSON")?;
            let edges = recover_edges(&report);
            let mut payload = serde_json::to_value(&edges)?;
            if let Some(truth_path) = truth {
                let matrix = read_truth(&truth_path, report.node_count)?;
                let view = truth_view(&report, &matrix);
                payload["truth_view"] = serde_json::to_value(&view)?;
            }
            std::fs::write(&out, serde_json::to_string_pretty(&payload)? + "\n")?;
            println!("edges: {}", edges.edges.len());
            Ok(())
        }
        Command::Report { config, out } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let params = cfg.params()?;
            let summary = StationarySummary::from_params(&params)?;
            let text = serde_json::to_string_pretty(&summary)? + "\n";
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}

fn check_dims(cfg: &ExperimentConfig, seq_d: usize) -> Result<()> {
    if cfg.d != seq_d {
        bail!("config D = {} but event manifest D = {seq_d}", cfg.d);
    }
    Ok(())
}

fn parse_nodes(spec: &str, d: usize) -> Result<Vec<usize>> {
    let mut nodes = Vec::new();
    for part in spec.split(',') {
        let idx: usize = part
            .trim()
            .parse()
            .with_context(|| format!("bad node index `{part}` in --nodes"))?;
        if idx >= d {
            bail!("--nodes index {idx} out of range for D = {d}");
        }
        if !nodes.contains(&idx) {
            nodes.push(idx);
        }
    }
    if nodes.is_empty() {
        bail!("--nodes selected nothing");
    }
    Ok(nodes)
}

fn diag_json(d: &hawkes_uq::mle::FitDiagnostics) -> serde_json::Value {
    json!({
        "node": d.node,
        "iterations": d.iterations,
        "proj_grad_norm": d.proj_grad_norm,
        "converged": d.converged,
        "active_set": d.active_set,
        "loglik": d.loglik,
        "hessian_condition": d.hessian_condition,
    })
}

/// Truth matrix: a raw JSON matrix, or a config file whose `A` is taken.
fn read_truth(path: &PathBuf, d: usize) -> Result<Vec<Vec<f64>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let matrix: Vec<Vec<f64>> = match serde_json::from_str(&text) {
        Ok(m) => m,
        Err(_) => {
            let cfg: ExperimentConfig = serde_json::from_str(&text)
                .with_context(|| "truth file is neither a JSON matrix nor a config")?;
            cfg.a.ok_or_else(|| anyhow::anyhow!("config in --truth has no A matrix"))?
        }
    };
    if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
        bail!("truth matrix must be {d}x{d}");
    }
    Ok(matrix)
}
