//! `npc` — scenario driver for the harmonic-map laboratory.
//!
//! Scenario files are JSON (see `scenarios/` for examples). Exit code 0 iff
//! every hard (exact-gate) check passes; trend diagnostics are reported but
//! do not fail the run. `NPC_THREADS` caps the worker pool.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use npc_core::csvio;
use npc_core::graph::graph_to_json;
use npc_core::hopf_lax::{two_var_evolve, TwoVarFunction};
use npc_core::report::CheckReport;
use npc_core::verifier::{CheckSpec, RefinementStudy, Scenario};

#[derive(Parser)]
#[command(name = "npc", about = "harmonic maps into CAT(0) targets: solve and verify", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the scenario and run its full check list, writing reports and
    /// plot-ready tables to the output directory.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a single named check from the scenario.
    Check {
        name: String,
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Refinement study: re-run at halved spacings and track the measured
    /// constants.
    Refine {
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve, run the checks and print the consolidated report to stdout.
    Report {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn init_threads() {
    if let Ok(v) = std::env::var("NPC_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
}

fn load_scenario(path: &PathBuf) -> Result<Scenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario {}", path.display()))?;
    Ok(Scenario::from_json(&text)?)
}

fn print_summary(reports: &[CheckReport]) {
    for r in reports {
        let gate = if r.is_exact_gate() { "exact" } else { "trend" };
        println!(
            "[{}] {:<24} {}  (violation {:.3e}, tolerance {:.3e})",
            gate,
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.max_violation,
            r.tolerance
        );
    }
}

fn hard_gates_pass(reports: &[CheckReport]) -> bool {
    reports.iter().filter(|r| r.is_exact_gate()).all(|r| r.pass)
}

fn main() -> Result<()> {
    init_threads();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out } => {
            let sc = load_scenario(&scenario)?;
            let run = sc.run_level(0)?;
            fs::create_dir_all(&out)?;
            fs::write(out.join("scenario.json"), sc.to_json())?;
            fs::write(out.join("graph.json"), serde_json::to_string_pretty(&graph_to_json(&run.graph))?)?;
            fs::write(out.join("solution.json"), serde_json::to_string_pretty(&run.solve.map)?)?;
            fs::write(out.join("reports.json"), serde_json::to_string_pretty(&run.reports)?)?;
            fs::write(out.join("reports.csv"), csvio::reports_csv(&run.reports))?;
            // energy profile of the solved map when the scales fit the mesh
            let h = run.graph.mesh_scale();
            if let Ok(profile) = npc_core::energy::energy_density(
                &run.graph,
                &run.solve.map,
                &run.region,
                &[5.5 * h, 4.5 * h, 3.5 * h],
            ) {
                fs::write(out.join("energy_profile.csv"), csvio::energy_profile_csv(&profile))?;
            }
            // time sweep table when Hopf-Lax style checks are configured
            let wants_sweep = sc.checks.iter().any(|c| {
                matches!(c.name.as_str(), "slope_bound" | "integral_bound" | "duality" | "time_derivative")
            });
            if wants_sweep {
                let field = sc.scalar_field(0, &run.graph);
                let f2 = TwoVarFunction::from_scalar_difference(&field);
                let sweeps: Vec<_> = [0.25, 0.5, 1.0]
                    .iter()
                    .map(|&t| two_var_evolve(&run.graph, &f2, t))
                    .collect::<npc_core::Result<_>>()?;
                fs::write(out.join("time_sweep.csv"), csvio::time_sweep_csv(&sweeps))?;
            }
            print_summary(&run.reports);
            println!("wrote {}", out.display());
            if !hard_gates_pass(&run.reports) {
                bail!("hard gates failed");
            }
        }
        Command::Check { name, scenario } => {
            let mut sc = load_scenario(&scenario)?;
            let configured = sc.checks.iter().find(|c| c.name == name).cloned();
            sc.checks = vec![configured.unwrap_or_else(|| CheckSpec::named(&name))];
            let run = sc.run_level(0)?;
            println!("{}", serde_json::to_string_pretty(&run.reports[0])?);
            if !hard_gates_pass(&run.reports) {
                bail!("hard gates failed");
            }
        }
        Command::Refine { levels, scenario, out } => {
            let sc = load_scenario(&scenario)?;
            let study = RefinementStudy::run(&sc, levels)?;
            let verdict = study.verdict(2.0, 0.05);
            print!("{}", study.to_csv());
            print_summary(std::slice::from_ref(&verdict));
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("refine.csv"), study.to_csv())?;
                fs::write(dir.join("refine.json"), serde_json::to_string_pretty(&study)?)?;
            }
            if !verdict.pass {
                bail!("refinement trends failed");
            }
        }
        Command::Report { scenario, format } => {
            let sc = load_scenario(&scenario)?;
            let run = sc.run_level(0)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&run.reports)?),
                Format::Csv => print!("{}", csvio::reports_csv(&run.reports)),
            }
            if !hard_gates_pass(&run.reports) {
                bail!("hard gates failed");
            }
        }
    }
    Ok(())
}
