/*
Copyright 2026 The affine-l1 Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

//! Command-line front end.
//!
//! Exit codes: 0 when every solve converged, 2 when some solve stopped at
//! an iteration cap (results are still written), 1 on usage or data errors.

mod io;

pub use io::{
    format_f64, load_dataset, load_matrix, load_vector, write_report, write_results,
    InputFormat, OutputFormat, Record, Report, Scalar,
};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::oracles::{admm_baseline, AdmmOptions};
use crate::problems::{
    lambda_grid, log_contrast_preprocess, solve_path, ssc_solve, NormChoice, PathConfig,
    SscOptions,
};
use crate::prox::{prox_affine_l1, ConstraintSpec};
use crate::ssn::{kkt_residual, ppa_outer, Problem, SolveOptions};

/// Environment variable overriding the worker-thread count.
pub const THREADS_ENV: &str = "AFFL1_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "affine-l1",
    version,
    about = "Sparse estimation under an affine constraint: min f(Ax) + λ(‖x‖₁ + δ{μᵀx = c})"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem or a regularization path.
    Solve(RunConfig),
    /// Compare the Newton solver with the ADMM baseline on the same grid.
    Bench {
        #[command(flatten)]
        run: RunConfig,
        #[arg(long, default_value_t = 1e-8)]
        admm_tol: f64,
        #[arg(long, default_value_t = 20000)]
        admm_max_iter: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    /// least squares; CSV response in the first column
    Regress,
    /// logistic loss; responses must be ±1
    Classify,
    /// sparse subspace clustering; every row is a data point
    Ssc,
    /// prox of every input row
    Prox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Euclidean,
    Max,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub task: Task,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Csv)]
    pub format: InputFormat,
    /// `ones` or a file with the entries of μ
    #[arg(long, default_value = "ones")]
    pub mu: String,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub c: f64,
    /// single λ; without it a path λ = ρ‖Aᵀb‖ is solved
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 0.9)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 20)]
    pub npoints: usize,
    #[arg(long, value_enum, default_value_t = NormArg::Max)]
    pub norm: NormArg,
    /// solve every path point from zero
    #[arg(long)]
    pub cold_start: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_outer: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// apply pseudo-count, row normalization and log to the features
    #[arg(long)]
    pub log_contrast: bool,
    /// scale data columns to unit norm (ssc)
    #[arg(long)]
    pub normalize_columns: bool,
    /// defaults to standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output_format: OutputFormat,
}

impl RunConfig {
    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_outer: self.max_outer,
            seed: self.seed,
            ..Default::default()
        }
    }

    fn path_config(&self) -> PathConfig {
        PathConfig {
            rho_max: self.rho_max,
            rho_min: self.rho_min,
            npoints: self.npoints,
            norm: match self.norm {
                NormArg::Euclidean => NormChoice::Euclidean,
                NormArg::Max => NormChoice::Max,
            },
            warm_start: !self.cold_start,
        }
    }

    fn mu_for(&self, n: usize) -> Result<Vec<f64>> {
        if self.mu == "ones" {
            Ok(vec![1.0; n])
        } else {
            let mu = load_vector(self.mu.as_ref())?;
            if mu.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "mu file length vs number of features",
                    expected: n,
                    got: mu.len(),
                });
            }
            Ok(mu)
        }
    }

    fn need_lambda(&self) -> Result<f64> {
        self.lambda.ok_or_else(|| {
            Error::InvalidParameter(format!("--lambda is required for {:?}", self.task))
        })
    }

    fn echo(&self) -> Record {
        let mut r = Record::default();
        let name = |v: &dyn std::fmt::Debug| format!("{v:?}").to_lowercase();
        r.push("task", Scalar::Str(name(&self.task)));
        r.push("input", Scalar::Str(self.input.display().to_string()));
        r.push("format", Scalar::Str(name(&self.format)));
        r.push("mu", Scalar::Str(self.mu.clone()));
        r.push("c", Scalar::Num(self.c));
        match self.lambda {
            Some(l) => r.push("lambda", Scalar::Num(l)),
            None => {
                r.push("rho_max", Scalar::Num(self.rho_max));
                r.push("rho_min", Scalar::Num(self.rho_min));
                r.push("npoints", Scalar::Int(self.npoints));
                r.push("norm", Scalar::Str(name(&self.norm)));
                r.push("warm_start", Scalar::Bool(!self.cold_start));
            }
        }
        r.push("tol", Scalar::Num(self.tol));
        r.push("max_outer", Scalar::Int(self.max_outer));
        r.push("seed", Scalar::Int(self.seed as usize));
        r.push("log_contrast", Scalar::Bool(self.log_contrast));
        r
    }

    fn problem(&self) -> Result<Problem> {
        let mut data = load_dataset(&self.input, self.format)?;
        if self.log_contrast {
            data.features = log_contrast_preprocess(&data.features)?;
        }
        let mu = self.mu_for(data.ncols())?;
        match self.task {
            Task::Regress => data.regression(mu, self.c),
            Task::Classify => data.classification(mu, self.c),
            _ => unreachable!("problem() is only used for regress/classify"),
        }
    }

    fn grid(&self, problem: &Problem) -> Result<Vec<f64>> {
        match self.lambda {
            Some(l) => Ok(vec![l]),
            None => lambda_grid(problem, &self.path_config()),
        }
    }
}

/// Result of a command: what to write and whether everything converged.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub converged: bool,
}

fn run_model(cfg: &RunConfig) -> Result<Outcome> {
    let problem = cfg.problem()?;
    let grid = cfg.grid(&problem)?;
    let path = solve_path(&problem, &grid, &cfg.solve_options(), !cfg.cold_start)?;
    let records = path
        .records
        .iter()
        .map(|r| {
            Record(vec![
                ("lambda", Scalar::Num(r.lambda)),
                ("nnz", Scalar::Int(r.nnz)),
                ("objective", Scalar::Num(r.objective)),
                ("kkt_residual", Scalar::Num(r.kkt_residual)),
                ("feasibility", Scalar::Num(r.feasibility)),
                ("converged", Scalar::Bool(r.converged)),
                ("outer_iters", Scalar::Int(r.outer_iters)),
                ("newton_iters", Scalar::Int(r.newton_iters)),
                ("seconds", Scalar::Num(r.seconds)),
            ])
        })
        .collect();
    Ok(Outcome {
        converged: path.all_converged(),
        report: Report {
            config: cfg.echo(),
            records,
            solutions: path.solutions,
        },
    })
}

fn run_ssc(cfg: &RunConfig) -> Result<Outcome> {
    let lambda = cfg.need_lambda()?;
    let mut points = load_matrix(&cfg.input, cfg.format)?;
    if cfg.log_contrast {
        points = log_contrast_preprocess(&points)?;
    }
    // rows are points; the dictionary holds them as columns
    let a: DMatrix<f64> = points.transpose();
    let opts = SscOptions {
        solve: cfg.solve_options(),
        normalize_columns: cfg.normalize_columns,
    };
    let res = ssc_solve(&a, lambda, &opts)?;
    let kkt = res.kkt_residuals.iter().copied().fold(0.0, f64::max);
    let nnz = res.x.iter().filter(|v| **v != 0.0).count();
    let converged = res.all_converged();
    let mut config = cfg.echo();
    config.push("normalize_columns", Scalar::Bool(cfg.normalize_columns));
    let record = Record(vec![
        ("lambda", Scalar::Num(lambda)),
        ("nnz", Scalar::Int(nnz)),
        ("objective", Scalar::Num(res.total_objective)),
        ("kkt_residual", Scalar::Num(kkt)),
        ("feasibility", Scalar::Num(res.feasibility)),
        ("converged", Scalar::Bool(converged)),
        ("newton_iters", Scalar::Int(res.newton_iters.iter().sum())),
        ("seconds", Scalar::Num(res.seconds)),
    ]);
    Ok(Outcome {
        converged,
        report: Report {
            config,
            records: vec![record],
            solutions: res.x.column_iter().map(|c| c.iter().copied().collect()).collect(),
        },
    })
}

fn run_prox(cfg: &RunConfig) -> Result<Outcome> {
    let lambda = cfg.need_lambda()?;
    let points = load_matrix(&cfg.input, cfg.format)?;
    let spec = ConstraintSpec::new(cfg.mu_for(points.ncols())?, cfg.c, lambda)?;
    let mut records = Vec::new();
    let mut solutions = Vec::new();
    for row in points.row_iter() {
        let x: Vec<f64> = row.iter().copied().collect();
        let p = prox_affine_l1(&x, &spec);
        records.push(Record(vec![
            ("w", Scalar::Num(p.w)),
            ("nnz", Scalar::Int(p.nnz())),
            ("feasibility", Scalar::Num(spec.violation(&p.z))),
            ("degenerate_zero", Scalar::Bool(p.degenerate_zero)),
        ]));
        solutions.push(p.z);
    }
    Ok(Outcome {
        converged: true,
        report: Report {
            config: cfg.echo(),
            records,
            solutions,
        },
    })
}

fn run_bench(cfg: &RunConfig, admm_tol: f64, admm_max_iter: usize) -> Result<Outcome> {
    if !matches!(cfg.task, Task::Regress | Task::Classify) {
        return Err(Error::InvalidParameter(
            "bench supports the regress and classify tasks".into(),
        ));
    }
    let problem = cfg.problem()?;
    let grid = cfg.grid(&problem)?;
    let opts = cfg.solve_options();
    let admm_opts = AdmmOptions {
        tol: admm_tol,
        max_iter: admm_max_iter,
        ..Default::default()
    };
    let mut records = Vec::new();
    let mut converged = true;
    for &lambda in &grid {
        let ssn = ppa_outer(&problem, lambda, &opts)?;
        let admm = admm_baseline(&problem, lambda, &admm_opts)?;
        converged &= ssn.converged;
        let rel = (ssn.objective - admm.objective) / (1.0 + admm.objective.abs());
        records.push(Record(vec![
            ("lambda", Scalar::Num(lambda)),
            ("ssn_objective", Scalar::Num(ssn.objective)),
            ("ssn_kkt_residual", Scalar::Num(ssn.kkt_residual)),
            ("ssn_newton_iters", Scalar::Int(ssn.newton_iters_total)),
            ("ssn_seconds", Scalar::Num(ssn.seconds)),
            ("admm_objective", Scalar::Num(admm.objective)),
            ("admm_kkt_residual", Scalar::Num(kkt_residual(&problem, lambda, &admm.z))),
            ("admm_iters", Scalar::Int(admm.iterations)),
            ("admm_seconds", Scalar::Num(admm.seconds)),
            ("relative_difference", Scalar::Num(rel)),
        ]));
    }
    Ok(Outcome {
        converged,
        report: Report {
            config: cfg.echo(),
            records,
            solutions: Vec::new(),
        },
    })
}

/// Runs a parsed command.
pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Solve(cfg) => match cfg.task {
            Task::Regress | Task::Classify => run_model(cfg),
            Task::Ssc => run_ssc(cfg),
            Task::Prox => run_prox(cfg),
        },
        Command::Bench {
            run,
            admm_tol,
            admm_max_iter,
        } => run_bench(run, *admm_tol, *admm_max_iter),
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))
        })?;
        // the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_ERROR,
            };
        }
    };
    let result = configure_threads().and_then(|_| {
        let out = execute(&cli.command)?;
        let run = match &cli.command {
            Command::Solve(r) | Command::Bench { run: r, .. } => r,
        };
        write_results(&out.report, run.output.as_deref(), run.output_format)?;
        Ok(out.converged)
    });
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("warning: at least one solve did not reach the requested tolerance");
            EXIT_NOT_CONVERGED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
