use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gedqubo::bench::{self, BenchConfig};
use gedqubo::graph::exact_ged;
use gedqubo::ising::to_ising;
use gedqubo::qsim::{run_variational, Method, VariationalConfig, DEFAULT_MAX_QUBITS};
use gedqubo::qubo::{build_qubo_padded, decode};
use gedqubo::sa::{anneal, best, SaParams};
use gedqubo::{Error, Graph, QuboProblem, Result};

#[derive(Parser)]
#[command(
    name = "gedq",
    version,
    about = "Graph edit distance via QUBO: exact, annealing and variational solvers"
)]
struct Cli {
    /// Flat `key = value` benchmark config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (bench, sweep, gen, report) or file (qubo).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the random graph dataset.
    Gen(Overrides),
    /// Exact GED of two graph files.
    Ged { g1: PathBuf, g2: PathBuf },
    /// Build the QUBO for two graphs.
    Qubo {
        g1: PathBuf,
        g2: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        /// Use alpha = n^2 + 1, beta = 1.
        #[arg(long)]
        safe: bool,
        /// Also write the Ising form here.
        #[arg(long)]
        ising: Option<PathBuf>,
    },
    /// Simulated annealing on a QUBO file or a graph pair.
    Sa {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1000)]
        shots: usize,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        decay: Option<f64>,
        #[arg(long)]
        tmin: Option<f64>,
        /// Write every sample as CSV (default `<out>/samples.csv` when --out is set).
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Variational quantum eigensolver on a QUBO file or a graph pair.
    Vqe(VarArgs),
    /// QAOA on a QUBO file or a graph pair.
    Qaoa(VarArgs),
    /// Run the all-pairs benchmark.
    Bench(Overrides),
    /// Simulated annealing sweep over beta.
    Sweep(Overrides),
    /// Aggregate a records file.
    Report {
        /// Defaults to `<out>/records.csv`.
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// QUBO text file.
    #[arg(long)]
    qubo: Option<PathBuf>,
    /// Two graph files; the QUBO is built with --alpha/--beta.
    #[arg(long, num_args = 2, value_names = ["G1", "G2"])]
    graphs: Option<Vec<PathBuf>>,
}

#[derive(Args)]
struct Input {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
}

#[derive(Args)]
struct VarArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 2048)]
    restarts: usize,
    #[arg(long, default_value_t = 1024)]
    shots: usize,
    /// Evaluations per restart (default 500 per parameter).
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    final_rotation_layer: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
    max_qubits: usize,
    /// Write per-restart trace CSV (default `<out>/trace.csv` when --out is set).
    #[arg(long)]
    trace: Option<PathBuf>,
}

/// Every benchmark config key as a flag of the same name.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    n_range: Option<String>,
    #[arg(long)]
    edge_probs: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    sweep_betas: Option<String>,
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    sa_shots: Option<String>,
    #[arg(long)]
    sa_t0: Option<String>,
    #[arg(long)]
    sa_decay: Option<String>,
    #[arg(long)]
    sa_tmin: Option<String>,
    #[arg(long)]
    vqe_p: Option<String>,
    #[arg(long)]
    qaoa_p: Option<String>,
    #[arg(long)]
    restarts: Option<String>,
    #[arg(long)]
    var_shots: Option<String>,
    #[arg(long)]
    var_budget: Option<String>,
    #[arg(long)]
    final_rotation_layer: Option<String>,
    #[arg(long)]
    max_qubits: Option<String>,
    #[arg(long)]
    record_timing: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("n_range", &self.n_range),
            ("edge_probs", &self.edge_probs),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("sweep_betas", &self.sweep_betas),
            ("methods", &self.methods),
            ("sa_shots", &self.sa_shots),
            ("sa_t0", &self.sa_t0),
            ("sa_decay", &self.sa_decay),
            ("sa_tmin", &self.sa_tmin),
            ("vqe_p", &self.vqe_p),
            ("qaoa_p", &self.qaoa_p),
            ("restarts", &self.restarts),
            ("var_shots", &self.var_shots),
            ("var_budget", &self.var_budget),
            ("final_rotation_layer", &self.final_rotation_layer),
            ("max_qubits", &self.max_qubits),
            ("record_timing", &self.record_timing),
        ]
    }
}

fn bench_config(cli: &Cli, ov: &Overrides) -> Result<BenchConfig> {
    let mut cfg = match &cli.config {
        Some(p) => BenchConfig::read(p)?,
        None => BenchConfig::default(),
    };
    for (k, v) in ov.pairs() {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_problem(input: &Input) -> Result<QuboProblem> {
    match (&input.source.qubo, &input.source.graphs) {
        (Some(q), _) => QuboProblem::read(q),
        (None, Some(g)) => {
            let (g1, g2) = (Graph::read(&g[0])?, Graph::read(&g[1])?);
            let (g1, g2, k) = gedqubo::graph::pad_pair(&g1, &g2);
            build_qubo_padded(&g1, &g2, input.alpha, input.beta, k)
        }
        (None, None) => unreachable!("clap requires one source"),
    }
}

/// Explicit path, else `<out>/<name>` when an output directory was given.
fn side_file(
    explicit: &Option<PathBuf>,
    out: &Option<PathBuf>,
    name: &str,
) -> Result<Option<PathBuf>> {
    if let Some(p) = explicit {
        return Ok(Some(p.clone()));
    }
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.join(name)))
        }
        None => Ok(None),
    }
}

fn fmt_ged(g: Option<usize>) -> String {
    g.map_or_else(|| "invalid".to_string(), |g| g.to_string())
}

fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.cmd {
        Cmd::Gen(ov) => {
            let cfg = bench_config(cli, ov)?;
            for p in bench::gen_dataset(&cfg)? {
                println!("{}", p.display());
            }
        }
        Cmd::Ged { g1, g2 } => {
            let (d, pi) = exact_ged(&Graph::read(g1)?, &Graph::read(g2)?)?;
            println!("ged {d}");
            println!("bijection {:?}", pi.as_slice());
        }
        Cmd::Qubo {
            g1,
            g2,
            alpha,
            beta,
            safe,
            ising,
        } => {
            let (a, b, k) = gedqubo::graph::pad_pair(&Graph::read(g1)?, &Graph::read(g2)?);
            let (alpha, beta) = if *safe {
                ((a.n() * a.n() + 1) as f64, 1.0)
            } else {
                (*alpha, *beta)
            };
            let q = build_qubo_padded(&a, &b, alpha, beta, k)?;
            match &cli.out {
                Some(p) => q.write(p)?,
                None => print!("{}", q.to_text()),
            }
            if let Some(p) = ising {
                to_ising(&q).write(p)?;
            }
        }
        Cmd::Sa {
            input,
            shots,
            t0,
            decay,
            tmin,
            samples,
        } => {
            let q = load_problem(input)?;
            let mut p = SaParams::for_problem(&q, *shots, seed);
            if let Some(t) = tmin {
                p.t_min = *t;
            }
            if let Some(t) = t0 {
                p.t0 = *t;
            }
            if let Some(d) = decay {
                p.decay = *d;
            }
            let ss = anneal(&q, &p)?;
            let (x, e) = best(&ss).expect("at least one shot");
            println!("energy {e}");
            println!("bits {}", x.to_bit_string());
            if let Some(pi) = decode(x, q.n()) {
                println!("bijection {:?}", pi.as_slice());
            }
            println!("ged {}", fmt_ged(q.ged_from_solution(x)));
            if let Some(path) = side_file(samples, &cli.out, "samples.csv")? {
                fs::write(path, ss.to_csv())?;
            }
        }
        Cmd::Vqe(a) | Cmd::Qaoa(a) => {
            let method = if matches!(cli.cmd, Cmd::Vqe(_)) {
                Method::Vqe
            } else {
                Method::Qaoa
            };
            let q = load_problem(&a.input)?;
            let cfg = VariationalConfig {
                restarts: a.restarts,
                shots: a.shots,
                seed,
                final_rotation_layer: a.final_rotation_layer,
                max_qubits: a.max_qubits,
                budget: a.budget,
                ..VariationalConfig::new(method, a.p)
            };
            let out = run_variational(&q, &cfg)?;
            println!("energy {}", out.best_energy);
            println!("bits {}", out.best.to_bit_string());
            println!("ged {}", fmt_ged(out.ged));
            println!("params {}", out.num_params);
            println!("depth {}", out.depth);
            println!("size {}", out.size);
            if let Some(path) = side_file(&a.trace, &cli.out, "trace.csv")? {
                fs::write(path, out.trace_csv())?;
            }
        }
        Cmd::Bench(ov) => {
            let cfg = bench_config(cli, ov)?;
            let recs = bench::run_bench(&cfg)?;
            let skips = cfg.out.join(bench::SKIPS_FILE);
            if skips.exists() {
                let n = fs::read_to_string(&skips)?.lines().count();
                eprintln!("{n} runs skipped for capacity, see {}", skips.display());
            }
            println!(
                "{} records in {}",
                recs.len(),
                cfg.out.join(bench::RECORDS_FILE).display()
            );
        }
        Cmd::Sweep(ov) => {
            let cfg = bench_config(cli, ov)?;
            print!("{}", bench::run_sweep(&cfg)?.to_csv());
        }
        Cmd::Report { records } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let records = records
                .clone()
                .unwrap_or_else(|| out.join(bench::RECORDS_FILE));
            let (_, summary) = bench::report(&records, &out)?;
            print!("{summary}");
        }
    }
    Ok(())
}

fn report_error(e: &Error) {
    let msg = e.to_string().replace('\n', " ");
    eprintln!("error kind={} message={msg}", e.kind());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&e);
            ExitCode::from(match e {
                Error::Parameter(_) => 2,
                Error::Capacity(_) => 3,
                Error::Parse(_) => 4,
                Error::Io(_) => 5,
            })
        }
    }
}
