use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use varqite_mkp::engines::{run_varqite, InitKind, QiteConfig};
use varqite_mkp::error::{Error, Result};
use varqite_mkp::harness::{
    audit, io as csvio, parse_methods, run_experiment, scaling_sweep, trial_seed,
    ExperimentOptions, ExperimentReport, Method, MethodSpec, ProblemContext, Scale, SolveConfig,
};
use varqite_mkp::instances::{generate_suite, load_instances, write_jsonl, MkpInstance, SUITE_SHAPES};

#[derive(Parser)]
#[command(name = "varqite-mkp", version, about = "Multiple knapsack instances solved by simulated VarQITE and VQE baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance suite.
    Generate {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (one JSON file per instance).
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated `MxN` shapes, cycled.
        #[arg(long, default_value = "3x3,3x4")]
        shapes: String,
        /// Also write all instances to `suite.jsonl` in the output directory.
        #[arg(long)]
        jsonl: bool,
    },
    /// Run methods x trials over a suite and write the results table.
    Solve {
        /// Directory of JSON files, a JSON file or a JSONL bundle.
        #[arg(long)]
        instances: PathBuf,
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write the aggregated report here as well.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write `runtime_ms` as 0 so reruns are byte-identical.
        #[arg(long)]
        deterministic: bool,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Best energy over a (d, N_tau) grid for one instance.
    Sweep {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
        d: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,500")]
        steps: Vec<usize>,
        #[arg(long, default_value_t = 10.0)]
        tau: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate a results table into the per-method report.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a results table (and optionally a report) for consistency.
    Audit {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write the VarQITE trace of one qite method run as CSV.
    Trace {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "qite-ihva")]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Print the ansatz circuit a method builds for an instance.
    Circuit {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "ihva")]
        method: Method,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Random,
    Zeros,
}

#[derive(Args)]
struct EngineArgs {
    /// Hamiltonian scale for qite-ihva-rescaled (default: spectral norm).
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    tau: f64,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    /// Sample this many shots instead of taking the exact argmax.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, value_enum, default_value = "random")]
    init: InitArg,
}

impl EngineArgs {
    fn solve_config(&self) -> SolveConfig {
        let init = match self.init {
            InitArg::Random => InitKind::RandomUniform,
            InitArg::Zeros => InitKind::Zeros,
        };
        let mut cfg = SolveConfig {
            shots: self.shots,
            ..SolveConfig::default()
        };
        cfg.qite.tau = self.tau;
        cfg.qite.n_steps = self.steps;
        cfg.qite.init = init;
        cfg.vqe.init = init;
        cfg
    }

    fn method_spec(&self, method: Method, trials: usize) -> MethodSpec {
        let mut spec = MethodSpec::new(method).with_trials(trials);
        if let (Method::QiteIhvaRescaled, Some(d)) = (method, self.d) {
            spec.d = Scale::Fixed(d);
        }
        spec
    }
}

fn parse_shapes(list: &str) -> Result<Vec<(usize, usize)>> {
    list.split(',')
        .map(|s| {
            let (m, n) = s
                .trim()
                .split_once('x')
                .ok_or_else(|| Error::InvalidArgument(format!("shape {s:?} is not MxN")))?;
            let parse = |v: &str| {
                v.parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("shape {s:?} is not MxN")))
            };
            Ok((parse(m)?, parse(n)?))
        })
        .collect()
}

fn single_instance(path: &PathBuf) -> Result<MkpInstance> {
    let mut all = load_instances(path)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        0 => Err(Error::Empty("instance file")),
        k => Err(Error::InvalidArgument(format!(
            "{} holds {k} instances, expected one",
            path.display()
        ))),
    }
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Generate {
            count,
            seed,
            out,
            shapes,
            jsonl,
        } => {
            let shapes = if shapes.is_empty() {
                SUITE_SHAPES.to_vec()
            } else {
                parse_shapes(&shapes)?
            };
            let suite = generate_suite(count, seed, &shapes)?;
            fs::create_dir_all(&out)?;
            for inst in &suite {
                inst.write_json_file(out.join(format!("{}.json", inst.id)))?;
            }
            if jsonl {
                write_jsonl(out.join("suite.jsonl"), &suite)?;
            }
            println!("wrote {} instances to {}", suite.len(), out.display());
        }
        Command::Solve {
            instances,
            methods,
            trials,
            seed,
            out,
            report,
            deterministic,
            engine,
        } => {
            let suite = load_instances(&instances)?;
            let specs: Vec<MethodSpec> = parse_methods(&methods)?
                .into_iter()
                .map(|m| engine.method_spec(m, trials))
                .collect();
            let opts = ExperimentOptions {
                record_runtime: !deterministic,
            };
            let output = run_experiment(&suite, &specs, &engine.solve_config(), seed, opts)?;
            csvio::write_results_file(&out, &output.results)?;
            if let Some(path) = report {
                csvio::write_report_file(path, &output.report)?;
            }
            csvio::write_report(io::stdout().lock(), &output.report)?;
        }
        Command::Sweep {
            instance,
            d,
            steps,
            tau,
            seed,
            out,
        } => {
            let inst = single_instance(&instance)?;
            let sweep = scaling_sweep(&inst, &d, &steps, tau, &SolveConfig::default(), seed)?;
            csvio::write_sweep_file(&out, &sweep)?;
            for dv in &d {
                match sweep.first_reaching(*dv) {
                    Some(n) => println!("d={dv}: minimum {} reached at N_tau={n}", sweep.min_energy),
                    None => println!("d={dv}: minimum {} not reached", sweep.min_energy),
                }
            }
        }
        Command::Report { results, out } => {
            let rows = csvio::read_results_file(&results)?;
            let report = ExperimentReport::from_results(&rows)?;
            csvio::write_report_file(&out, &report)?;
            csvio::write_report(io::stdout().lock(), &report)?;
        }
        Command::Audit { results, report } => {
            let rows = csvio::read_results_file(&results)?;
            let given = report.map(csvio::read_report_file).transpose()?;
            let outcome = audit(&rows, given.as_ref());
            for p in &outcome.problems {
                println!("FAIL {p}");
            }
            println!(
                "{} rows checked, {} problems",
                outcome.rows_checked,
                outcome.problems.len()
            );
            return Ok(outcome.is_clean());
        }
        Command::Trace {
            instance,
            method,
            seed,
            out,
            engine,
        } => {
            if !method.is_qite() {
                return Err(Error::InvalidArgument(format!("{method} does not use VarQITE")));
            }
            let inst = single_instance(&instance)?;
            let cfg = engine.solve_config();
            let ctx = ProblemContext::new(&inst, cfg.penalties)?;
            let spec = engine.method_spec(method, 1);
            let qcfg = QiteConfig {
                d: ctx.scale(&spec),
                seed: trial_seed(seed, &inst.id, method, 0),
                ..cfg.qite
            };
            let outcome = run_varqite(&ctx.ansatz(&spec)?, ctx.hamiltonian(method), &qcfg)?;
            outcome.trace.write_csv(BufWriter::new(File::create(&out)?))?;
            println!(
                "final energy {}, best energy {}, d = {}",
                outcome.final_energy, outcome.best_energy, qcfg.d
            );
        }
        Command::Circuit { instance, method } => {
            let inst = single_instance(&instance)?;
            let ctx = ProblemContext::new(&inst, Default::default())?;
            print!("{}", ctx.ansatz(&MethodSpec::new(method))?.circuit.dump());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
