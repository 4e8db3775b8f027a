//! Benchmark protocol: random datasets, all-pairs runs per solver, beta
//! sweeps and aggregate reports.
//!
//! For every vertex count `n` one graph is drawn per edge probability; every
//! unordered pair of those graphs, self-pairs included, is solved exactly
//! and by each enabled method.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{exact_ged, pad_pair, random_graph, Graph};
use crate::metrics::{self, aggregate, AggregateStats, RunRecord, SolverKind};
use crate::qsim::{run_variational, Method, VariationalConfig, DEFAULT_MAX_QUBITS};
use crate::qubo::build_qubo_padded;
use crate::rng::derive_seed;
use crate::sa::{anneal, best, SaParams};

pub const DEFAULT_EDGE_PROBS: [f64; 4] = [0.1, 0.33, 0.66, 0.99];
pub const RECORDS_FILE: &str = "records.csv";
pub const SKIPS_FILE: &str = "skips.log";

/// A penalty weight together with the label it was written as (`1/3`, `0.05`).
#[derive(Clone, Debug, PartialEq)]
pub struct Beta {
    pub label: String,
    pub value: f64,
}

impl Beta {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let value = match s.split_once('/') {
            Some((a, b)) => {
                let a: f64 = num(a)?;
                let b: f64 = num(b)?;
                a / b
            }
            None => num(s)?,
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::param(format!("beta must be positive, got `{s}`")));
        }
        Ok(Beta {
            label: s.to_string(),
            value,
        })
    }
}

/// `1/1, ..., 1/10, 0.05, 0.01`.
pub fn default_sweep_betas() -> Vec<Beta> {
    (1..=10)
        .map(|i| format!("1/{i}"))
        .chain(["0.05".to_string(), "0.01".to_string()])
        .map(|s| Beta::parse(&s).expect("valid literal"))
        .collect()
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e| Error::parse(format!("`{}`: {e}", s.trim())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub n_range: Vec<usize>,
    pub edge_probs: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub sweep_betas: Vec<Beta>,
    pub methods: Vec<SolverKind>,
    pub sa_shots: usize,
    /// `None` selects the per-problem default schedule.
    pub sa_t0: Option<f64>,
    pub sa_decay: Option<f64>,
    pub sa_tmin: f64,
    pub vqe_p: usize,
    pub qaoa_p: usize,
    pub restarts: usize,
    pub var_shots: usize,
    pub var_budget: Option<usize>,
    pub final_rotation_layer: bool,
    pub max_qubits: usize,
    pub master_seed: u64,
    pub out: PathBuf,
    /// When false, wall-clock columns are written as zero so record files
    /// are byte-reproducible.
    pub record_timing: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_range: (3..=9).collect(),
            edge_probs: DEFAULT_EDGE_PROBS.to_vec(),
            alpha: 1.0,
            beta: 0.1,
            sweep_betas: default_sweep_betas(),
            methods: vec![SolverKind::Sa],
            sa_shots: 1000,
            sa_t0: None,
            sa_decay: None,
            sa_tmin: crate::sa::DEFAULT_T_MIN,
            vqe_p: 1,
            qaoa_p: 1,
            restarts: 64,
            var_shots: 1024,
            var_budget: None,
            final_rotation_layer: true,
            max_qubits: DEFAULT_MAX_QUBITS,
            master_seed: 0,
            out: PathBuf::from("out"),
            record_timing: true,
        }
    }
}

fn parse_list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(num)
        .collect()
}

/// `3..9` (inclusive) or a comma-separated list.
fn parse_range(v: &str) -> Result<Vec<usize>> {
    match v.split_once("..") {
        Some((a, b)) => {
            let b = b.trim_start_matches('=');
            Ok((num::<usize>(a)?..=num::<usize>(b)?).collect())
        }
        None => parse_list(v),
    }
}

fn parse_bool(v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::parse(format!("expected a boolean, got `{other}`"))),
    }
}

fn parse_opt<T: std::str::FromStr>(v: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match v.trim() {
        "" | "auto" | "default" => Ok(None),
        s => num(s).map(Some),
    }
}

impl BenchConfig {
    /// Config keys, in the spelling accepted by [`BenchConfig::set`].
    pub const KEYS: &'static [&'static str] = &[
        "n_range",
        "edge_probs",
        "alpha",
        "beta",
        "sweep_betas",
        "methods",
        "sa_shots",
        "sa_t0",
        "sa_decay",
        "sa_tmin",
        "vqe_p",
        "qaoa_p",
        "restarts",
        "var_shots",
        "var_budget",
        "final_rotation_layer",
        "max_qubits",
        "seed",
        "out",
        "record_timing",
    ];

    /// Applies one `key = value` setting. Dashes in keys are read as
    /// underscores, so CLI flag names work too.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "n_range" => self.n_range = parse_range(v)?,
            "edge_probs" => self.edge_probs = parse_list(v)?,
            "alpha" => self.alpha = num(v)?,
            "beta" => self.beta = Beta::parse(v)?.value,
            "sweep_betas" => {
                self.sweep_betas = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(Beta::parse)
                    .collect::<Result<_>>()?
            }
            "methods" => {
                self.methods = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "sa_shots" => self.sa_shots = num(v)?,
            "sa_t0" => self.sa_t0 = parse_opt(v)?,
            "sa_decay" => self.sa_decay = parse_opt(v)?,
            "sa_tmin" => self.sa_tmin = num(v)?,
            "vqe_p" => self.vqe_p = num(v)?,
            "qaoa_p" => self.qaoa_p = num(v)?,
            "restarts" => self.restarts = num(v)?,
            "var_shots" => self.var_shots = num(v)?,
            "var_budget" => self.var_budget = parse_opt(v)?,
            "final_rotation_layer" => self.final_rotation_layer = parse_bool(v)?,
            "max_qubits" => self.max_qubits = num(v)?,
            "seed" | "master_seed" => self.master_seed = num(v)?,
            "out" => self.out = PathBuf::from(v),
            "record_timing" => self.record_timing = parse_bool(v)?,
            other => return Err(Error::param(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parses flat `key = value` text; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = BenchConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::parse(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_range.is_empty() {
            return Err(Error::param("n_range must not be empty"));
        }
        if self.n_range.contains(&0) {
            return Err(Error::param("vertex counts must be at least 1"));
        }
        if self.edge_probs.is_empty() {
            return Err(Error::param("edge_probs must not be empty"));
        }
        if let Some(p) = self.edge_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::param(format!("edge probability {p} outside [0, 1]")));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::param("alpha and beta must be positive"));
        }
        if self.methods.contains(&SolverKind::Exact) {
            return Err(Error::param(
                "EXACT is computed for every pair; list only SA, VQE, QAOA",
            ));
        }
        if self.sa_shots == 0 || self.restarts == 0 || self.var_shots == 0 {
            return Err(Error::param("shot and restart counts must be at least 1"));
        }
        Ok(())
    }

    fn sa_params(&self, q: &crate::QuboProblem, shots: usize, seed: u64) -> SaParams {
        let mut p = SaParams::for_problem(q, shots, seed);
        p.t_min = self.sa_tmin;
        if let Some(t0) = self.sa_t0 {
            p.t0 = t0;
        }
        match self.sa_decay {
            Some(d) => p.decay = d,
            None if self.sa_t0.is_some() || self.sa_tmin != crate::sa::DEFAULT_T_MIN => {
                let steps = (10 * q.num_vars() * q.num_vars()).max(10) as f64;
                p.decay = (p.t_min / p.t0).powf(1.0 / steps);
            }
            None => {}
        }
        p
    }
}

/// Graph `idx` (1-based, one per edge probability) for vertex count `n`.
pub fn dataset_graph(cfg: &BenchConfig, n: usize, idx: usize) -> Result<Graph> {
    let p = cfg.edge_probs[idx - 1];
    random_graph(n, p, derive_seed(cfg.master_seed, &[n as u64, idx as u64]))
}

pub fn graph_filename(n: usize, idx: usize) -> String {
    format!("g_n{n}_p{idx}.json")
}

/// Writes one graph file per `(n, edge probability)` into `<out>/graphs`.
pub fn gen_dataset(cfg: &BenchConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let dir = cfg.out.join("graphs");
    fs::create_dir_all(&dir)?;
    let mut paths = Vec::new();
    for &n in &cfg.n_range {
        for idx in 1..=cfg.edge_probs.len() {
            let path = dir.join(graph_filename(n, idx));
            dataset_graph(cfg, n, idx)?.write(&path)?;
            paths.push(path);
        }
    }
    Ok(paths)
}

/// Unordered index pairs with repetition: `(i, j)` with `1 <= i <= j <= count`.
pub fn all_pairs(count: usize) -> Vec<(usize, usize)> {
    (1..=count)
        .flat_map(|i| (i..=count).map(move |j| (i, j)))
        .collect()
}

pub fn pair_id(i: usize, j: usize) -> String {
    format!("G{i}-G{j}")
}

/// Outcome of one pair: records produced plus capacity skips.
#[derive(Debug, Default)]
pub struct PairOutcome {
    pub records: Vec<RunRecord>,
    pub skipped: Vec<String>,
}

/// Runs every requested method on one graph pair.
pub fn run_pair(
    cfg: &BenchConfig,
    pair: &str,
    g1: &Graph,
    g2: &Graph,
    methods: &[SolverKind],
    seed: u64,
) -> Result<PairOutcome> {
    let (exact, _) = exact_ged(g1, g2)?;
    let (a, b, k) = pad_pair(g1, g2);
    let n = a.n();
    let q = build_qubo_padded(&a, &b, cfg.alpha, cfg.beta, k)?;
    let mut out = PairOutcome::default();
    let timing = |secs: f64| if cfg.record_timing { secs } else { 0.0 };

    for &method in methods {
        let method_seed = derive_seed(seed, &[method as u64]);
        let start = Instant::now();
        match method {
            SolverKind::Sa => {
                let params = cfg.sa_params(&q, cfg.sa_shots, method_seed);
                let ss = anneal(&q, &params)?;
                let (x, _) = best(&ss).expect("shots >= 1");
                let secs = start.elapsed().as_secs_f64();
                out.records.push(RunRecord::new(
                    method,
                    n,
                    pair,
                    exact,
                    q.ged_from_solution(x),
                    timing(secs),
                    cfg.sa_shots,
                    timing(secs / cfg.sa_shots as f64),
                    format!(
                        "alpha={};beta={};shots={};t0={:.6};decay={:.9};tmin={}",
                        cfg.alpha, cfg.beta, cfg.sa_shots, params.t0, params.decay, params.t_min
                    ),
                ));
            }
            SolverKind::Vqe | SolverKind::Qaoa => {
                let (m, p) = if method == SolverKind::Vqe {
                    (Method::Vqe, cfg.vqe_p)
                } else {
                    (Method::Qaoa, cfg.qaoa_p)
                };
                let vcfg = VariationalConfig {
                    method: m,
                    p,
                    restarts: cfg.restarts,
                    shots: cfg.var_shots,
                    seed: method_seed,
                    final_rotation_layer: cfg.final_rotation_layer,
                    max_qubits: cfg.max_qubits,
                    budget: cfg.var_budget,
                    tol: 1e-4,
                };
                match run_variational(&q, &vcfg) {
                    Ok(res) => out.records.push(RunRecord::new(
                        method,
                        n,
                        pair,
                        exact,
                        res.ged,
                        timing(start.elapsed().as_secs_f64()),
                        cfg.restarts,
                        0.0,
                        format!(
                            "alpha={};beta={};p={};restarts={};shots={};params={}",
                            cfg.alpha, cfg.beta, p, cfg.restarts, cfg.var_shots, res.num_params
                        ),
                    )),
                    Err(Error::Capacity(msg)) => {
                        out.skipped.push(format!("{method},{n},{pair}: {msg}"));
                    }
                    Err(e) => return Err(e),
                }
            }
            SolverKind::Exact => {}
        }
    }
    Ok(out)
}

/// Runs the all-pairs protocol and returns every record, canonically sorted.
///
/// Records are appended to `<out>/records.csv` as they complete. Keys already
/// present in that file are skipped, so an interrupted run resumes where it
/// stopped. At the end the file is rewritten sorted by `(method, n, pair_id)`.
/// Method runs refused for capacity are listed in `<out>/skips.log`.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(RECORDS_FILE);
    let existing = if path.exists() {
        metrics::read_records(&path)?
    } else {
        Vec::new()
    };
    let done: BTreeSet<(SolverKind, usize, String)> = existing.iter().map(RunRecord::key).collect();

    let mut tasks = Vec::new();
    for &n in &cfg.n_range {
        for (i, j) in all_pairs(cfg.edge_probs.len()) {
            let id = pair_id(i, j);
            let todo: Vec<SolverKind> = cfg
                .methods
                .iter()
                .copied()
                .filter(|&m| !done.contains(&(m, n, id.clone())))
                .collect();
            if !todo.is_empty() {
                tasks.push((n, i, j, todo));
            }
        }
    }

    let needs_header = !path.exists() || fs::metadata(&path)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(&path)?;
    let writer = Mutex::new(
        csv::WriterBuilder::new()
            .has_headers(needs_header)
            .from_writer(file),
    );

    let outcomes: Vec<Result<PairOutcome>> = tasks
        .par_iter()
        .map(|(n, i, j, todo)| {
            let g1 = dataset_graph(cfg, *n, *i)?;
            let g2 = dataset_graph(cfg, *n, *j)?;
            let seed = derive_seed(cfg.master_seed, &[*n as u64, *i as u64, *j as u64, 0xbe_c4]);
            let outcome = run_pair(cfg, &pair_id(*i, *j), &g1, &g2, todo, seed)?;
            let mut w = writer.lock().expect("writer lock");
            for r in &outcome.records {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(outcome)
        })
        .collect();
    drop(writer);

    let mut records = existing;
    let mut skipped = Vec::new();
    for o in outcomes {
        let o = o?;
        records.extend(o.records);
        skipped.extend(o.skipped);
    }
    records.sort_by_key(RunRecord::key);
    metrics::write_records(&path, &records)?;

    skipped.sort();
    let skip_path = cfg.out.join(SKIPS_FILE);
    if skipped.is_empty() {
        if skip_path.exists() {
            fs::remove_file(&skip_path)?;
        }
    } else {
        let mut f = fs::File::create(&skip_path)?;
        for s in &skipped {
            writeln!(f, "{s}")?;
        }
    }
    Ok(records)
}

/// Mean relative difference of SA per `(n, beta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub betas: Vec<Beta>,
    /// `(n, mean delta per beta)`
    pub rows: Vec<(usize, Vec<f64>)>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n");
        for b in &self.betas {
            let _ = write!(s, ",{}", b.label);
        }
        s.push('\n');
        for (n, row) in &self.rows {
            let _ = write!(s, "{n}");
            for v in row {
                let _ = write!(s, ",{v:.4}");
            }
            s.push('\n');
        }
        s
    }

    pub fn cell(&self, n: usize, beta_label: &str) -> Option<f64> {
        let col = self.betas.iter().position(|b| b.label == beta_label)?;
        self.rows.iter().find(|(m, _)| *m == n).map(|(_, r)| r[col])
    }
}

/// SA-only sweep over `cfg.sweep_betas` with `alpha = cfg.alpha`; writes
/// `<out>/sweep.csv` shaped as one row per `n` and one column per beta.
pub fn run_sweep(cfg: &BenchConfig) -> Result<SweepTable> {
    cfg.validate()?;
    if cfg.sweep_betas.is_empty() {
        return Err(Error::param("beta sweep list is empty"));
    }
    let mut rows = Vec::new();
    for &n in &cfg.n_range {
        let graphs: Vec<Graph> = (1..=cfg.edge_probs.len())
            .map(|idx| dataset_graph(cfg, n, idx))
            .collect::<Result<_>>()?;
        let pairs = all_pairs(graphs.len());
        let row = cfg
            .sweep_betas
            .par_iter()
            .enumerate()
            .map(|(bi, beta)| {
                let sub = BenchConfig {
                    beta: beta.value,
                    ..cfg.clone()
                };
                let mut total = 0.0;
                for &(i, j) in &pairs {
                    let seed = derive_seed(
                        cfg.master_seed,
                        &[n as u64, i as u64, j as u64, 0x5eed, bi as u64],
                    );
                    let o = run_pair(
                        &sub,
                        &pair_id(i, j),
                        &graphs[i - 1],
                        &graphs[j - 1],
                        &[SolverKind::Sa],
                        seed,
                    )?;
                    total += o.records[0].delta;
                }
                Ok(total / pairs.len() as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((n, row));
    }
    let table = SweepTable {
        betas: cfg.sweep_betas.clone(),
        rows,
    };
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("sweep.csv"), table.to_csv())?;
    Ok(table)
}

/// Aggregates a records file into `<out_dir>/aggregate.csv`, one wide data
/// file per metric (`plot_mean_delta.csv`, `plot_success_prob.csv`,
/// `plot_hq_prob.csv`) and returns a text summary.
pub fn report(
    records_path: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
) -> Result<(Vec<AggregateStats>, String)> {
    let records = metrics::read_records(records_path)?;
    if records.is_empty() {
        return Err(Error::param("records file is empty"));
    }
    if let Some(r) = records.iter().find(|r| !r.is_consistent()) {
        return Err(Error::parse(format!(
            "record {:?} has delta {} inconsistent with exact={} approx={:?}",
            r.key(),
            r.delta,
            r.exact,
            r.approx
        )));
    }
    let stats = aggregate(&records);
    let out = out_dir.as_ref();
    fs::create_dir_all(out)?;
    metrics::write_aggregate(out.join("aggregate.csv"), &stats)?;

    let methods: BTreeSet<SolverKind> = stats.iter().map(|s| s.method).collect();
    let ns: BTreeSet<usize> = stats.iter().map(|s| s.n).collect();
    let by_key: BTreeMap<(SolverKind, usize), &AggregateStats> =
        stats.iter().map(|s| ((s.method, s.n), s)).collect();
    type Column = fn(&AggregateStats) -> f64;
    let figures: [(&str, Column); 3] = [
        ("plot_mean_delta.csv", |s| s.mean_delta),
        ("plot_success_prob.csv", |s| s.success_prob),
        ("plot_hq_prob.csv", |s| s.hq_prob),
    ];
    for (name, get) in figures {
        let mut text = String::from("n");
        for m in &methods {
            let _ = write!(text, ",{m}");
        }
        text.push('\n');
        for n in &ns {
            let _ = write!(text, "{n}");
            for m in &methods {
                match by_key.get(&(*m, *n)) {
                    Some(s) => {
                        let _ = write!(text, ",{:.6}", get(s));
                    }
                    None => text.push(','),
                }
            }
            text.push('\n');
        }
        fs::write(out.join(name), text)?;
    }

    let mut summary = format!(
        "{:<6} {:>3} {:>10} {:>10} {:>10} {:>12}\n",
        "method", "n", "mean_delta", "success", "hq", "tts_s"
    );
    for s in &stats {
        let tts = s
            .tts_s
            .map_or_else(|| "undefined".to_string(), |t| format!("{t:.6}"));
        let _ = writeln!(
            summary,
            "{:<6} {:>3} {:>10.4} {:>10.4} {:>10.4} {:>12}",
            s.method.as_str(),
            s.n,
            s.mean_delta,
            s.success_prob,
            s.hq_prob,
            tts
        );
    }
    fs::write(out.join("summary.txt"), &summary)?;
    Ok((stats, summary))
}
