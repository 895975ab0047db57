use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use graphvar::exhaustion::run_exhaustion;
use graphvar::generate::{generate_graph, MeasureRule, WeightRule};
use graphvar::io::{format_float, write_function, write_graph};
use graphvar::problem::{load_problem, Resolved};
use graphvar::report;
use graphvar::spaces::{fuzz_embeddings, poincare_constant, FuzzSettings};
use graphvar::yamabe::{mp_geometry_check, solve_yamabe};
use graphvar::{Error, ExhaustionError, LocalProblem, ProblemSpec, WeightedGraph};

/// Elliptic variational equations on weighted graphs.
#[derive(Debug, Parser)]
#[command(name = "graphvar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve by exhaustion and write the solution and a run report.
    Solve {
        #[command(flatten)]
        input: Input,
        /// Solution file, tab separated "x value".
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Solve all levels independently in parallel.
        #[arg(long)]
        parallel_levels: bool,
    },
    /// Check the embedding inequalities on random functions.
    VerifyEmbeddings {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve the Yamabe problem on one ball and check the mountain-pass geometry.
    Geometry {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Smallest Dirichlet eigenvalue and Poincaré constant of a ball.
    Poincare {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a generated graph (path:n, grid:nxm, tree:b:d).
    Generate {
        kind: String,
        #[arg(long, default_value = "const:1")]
        weights: String,
        #[arg(long = "measures", default_value = "const:1")]
        measure_rule: String,
        /// Graph file to write.
        #[arg(long)]
        out: PathBuf,
        /// Measure file to write.
        #[arg(long)]
        measure: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Input {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    measure: Option<PathBuf>,
    #[arg(long)]
    config: PathBuf,
}

impl Input {
    fn load(&self) -> Result<(WeightedGraph, ProblemSpec, Resolved)> {
        Ok(load_problem(&self.graph, self.measure.as_deref(), &self.config)?)
    }
}

enum Outcome {
    Success,
    Failed,
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(input: &Input, out: Option<&Path>, report_path: Option<&Path>, parallel: bool) -> Result<Outcome> {
    let (graph, _, resolved) = input.load()?;
    let mut options = resolved.options.clone();
    options.parallel = parallel;
    let report = match run_exhaustion(&graph, &resolved.problem, &options) {
        Ok(r) => r,
        Err(e) => {
            emit(report_path, &report::exhaustion_report(&graph, &e.partial))?;
            return Err(e.into());
        }
    };
    if let Some(path) = out {
        write_function(&graph, &report.final_solution, path)?;
    }
    emit(report_path, &report::exhaustion_report(&graph, &report))?;
    Ok(if report.converged {
        Outcome::Success
    } else {
        Outcome::Failed
    })
}

fn verify_embeddings(input: &Input, report_path: Option<&Path>) -> Result<Outcome> {
    let (graph, spec, resolved) = input.load()?;
    let settings = FuzzSettings {
        samples: spec.samples,
        seed: spec.seed,
        radius: spec.radius,
        ..FuzzSettings::default()
    };
    let weight = match (&resolved.h, &resolved.g, resolved.constants.mu0) {
        (Some(h), Some(g), Some(_)) if g.values().iter().all(|&v| v >= 0.0) => Some((h, g)),
        _ => None,
    };
    let summary = fuzz_embeddings(&graph, &resolved.constants, resolved.origin, weight, &settings)?;
    emit(report_path, &report::fuzz_report(&summary))?;
    Ok(if summary.all_pass() {
        Outcome::Success
    } else {
        Outcome::Failed
    })
}

fn geometry(input: &Input, report_path: Option<&Path>) -> Result<Outcome> {
    let (graph, spec, resolved) = input.load()?;
    let LocalProblem::Yamabe { h, q } = &resolved.problem else {
        anyhow::bail!(Error::Input("geometry needs equation = yamabe".into()));
    };
    let ball = graph.ball(resolved.origin, spec.radius)?;
    let solution = solve_yamabe(&graph, &ball, h, *q, spec.tol)?;
    let (text, holds) = match spec.delta {
        Some(delta) => {
            let g = mp_geometry_check(&graph, &ball, h, *q, delta, spec.seed)?;
            let mut text = report::yamabe_report(&solution);
            text.push_str(&report::geometry_lines(&g));
            (text, g.holds())
        }
        None => {
            let mut text = report::yamabe_report(&solution);
            text.push_str(&report::geometry_lines(&solution.geometry));
            (text, solution.geometry.holds())
        }
    };
    emit(report_path, &(text + if holds { "GEOMETRY_OK\n" } else { "GEOMETRY_FAILED\n" }))?;
    Ok(if holds { Outcome::Success } else { Outcome::Failed })
}

fn poincare(input: &Input, report_path: Option<&Path>) -> Result<Outcome> {
    let (graph, spec, resolved) = input.load()?;
    let ball = graph.ball(resolved.origin, spec.radius)?;
    let c = poincare_constant(&graph, &ball)?;
    emit(
        report_path,
        &format!(
            "radius={}\ninterior={}\nlambda1={}\npoincare_constant={}\n",
            spec.radius,
            ball.interior().len(),
            format_float(1.0 / c),
            format_float(c)
        ),
    )?;
    Ok(Outcome::Success)
}

fn generate(kind: &str, weights: &str, measures: &str, out: &Path, measure: Option<&Path>) -> Result<Outcome> {
    let graph = generate_graph(kind.parse()?, weights.parse::<WeightRule>()?, measures.parse::<MeasureRule>()?)?;
    write_graph(&graph, out, measure)?;
    Ok(Outcome::Success)
}

fn run(cli: Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Solve {
            input,
            out,
            report,
            parallel_levels,
        } => solve(input, out.as_deref(), report.as_deref(), *parallel_levels),
        Command::VerifyEmbeddings { input, report } => verify_embeddings(input, report.as_deref()),
        Command::Geometry { input, report } => geometry(input, report.as_deref()),
        Command::Poincare { input, report } => poincare(input, report.as_deref()),
        Command::Generate {
            kind,
            weights,
            measure_rule,
            out,
            measure,
        } => generate(kind, weights, measure_rule, out, measure.as_deref()),
    }
}

/// 1 for bad input or violated hypotheses, 2 for numerical failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    let input = err
        .chain()
        .find_map(|e| {
            e.downcast_ref::<Error>()
                .map(Error::is_input_error)
                .or_else(|| e.downcast_ref::<ExhaustionError>().map(|x| x.source.is_input_error()))
        })
        .unwrap_or(true);
    if input {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(err) => {
            eprintln!("graphvar: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
