use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use plap::cheeger::{diagram_report, inequality_diagram, CheegerError};
use plap::complex::ComplexError;
use plap::graph::{catalog, parse_edge_list, Graph, GraphError, SetPair, VertexSet};
use plap::homological::{homological_spectrum, HomologyError};
use plap::one_lap::{enumerate_delta1_spectrum, OneLapError};
use plap::p_solver::{
    continue_branch, eigenpairs_p2, p2_seeds, set_pair_branch, write_branches_csv, EigenBranch,
    PSolverError,
};
use plap::verify::{run_suite, Suite, VERIFY_SEED};

#[derive(Parser)]
#[command(name = "plap", version, about = "Spectra of graph p-Laplacians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues at one p: exact at p = 1, dense at p = 2, continued otherwise.
    Spectrum {
        #[command(flatten)]
        graph: GraphSource,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Continuation steps from p = 2 when p is not 1 or 2.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Follows the p = 2 eigenpairs over [pmin, pmax] and writes CSV.
    Sweep {
        #[command(flatten)]
        graph: GraphSource,
        #[arg(long, default_value_t = 1.01)]
        pmin: f64,
        #[arg(long, default_value_t = 2.0)]
        pmax: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Extra branch started near 1_A − 1_B, written as "A/B" with comma-separated vertices.
        #[arg(long = "pair")]
        pairs: Vec<String>,
        /// Fail with exit code 4 when a branch is lost.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Homological eigenvalues of the 1-Laplacian with sublevel Betti numbers.
    Homology {
        #[command(flatten)]
        graph: GraphSource,
        #[command(flatten)]
        out: Output,
    },
    /// Cheeger constants and the inequality diagram at p = 1 or 2.
    Cheeger {
        #[command(flatten)]
        graph: GraphSource,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Runs a verification suite: exact, homology, numeric or all.
    Verify {
        #[arg(default_value = "all")]
        suite: Suite,
        /// Seed for the randomized checks, in hex.
        #[arg(long, value_parser = parse_hex)]
        seed: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GraphSource {
    /// Built-in graph such as g6, p6, five, fig5, c8, k5, path4, more8.
    #[arg(long)]
    catalog: Option<String>,
    /// Edge-list file.
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Args)]
struct Output {
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Write the JSON to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Numerical(String),
    #[error("verification failed")]
    Verify,
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verify => 1,
            CliError::Input(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ComplexError> for CliError {
    fn from(e: ComplexError) -> Self {
        match e {
            ComplexError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<OneLapError> for CliError {
    fn from(e: OneLapError) -> Self {
        match e {
            OneLapError::Graph(g) => g.into(),
            _ => CliError::Cap(e.to_string()),
        }
    }
}

impl From<HomologyError> for CliError {
    fn from(e: HomologyError) -> Self {
        match e {
            HomologyError::Graph(g) => g.into(),
            HomologyError::Complex(c) => c.into(),
            HomologyError::EmptySet => CliError::Input(e.to_string()),
        }
    }
}

impl From<PSolverError> for CliError {
    fn from(e: PSolverError) -> Self {
        match e {
            PSolverError::Graph(g) => g.into(),
            PSolverError::BadP(_) | PSolverError::BadGrid | PSolverError::BadIndex { .. } => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<CheegerError> for CliError {
    fn from(e: CheegerError) -> Self {
        match e {
            CheegerError::Graph(g) => g.into(),
            CheegerError::Complex(c) => c.into(),
            CheegerError::OneLap(o) => o.into(),
            CheegerError::PSolver(p) => p.into(),
            CheegerError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn parse_hex(s: &str) -> Result<u64, String> {
    u64::from_str_radix(s.trim_start_matches("0x"), 16).map_err(|e| e.to_string())
}

fn load(src: &GraphSource) -> Result<Graph, CliError> {
    match (&src.catalog, &src.edges) {
        (Some(name), _) => Ok(catalog::by_name(name)?),
        (None, Some(path)) => Ok(parse_edge_list(&fs::read_to_string(path)?)?),
        (None, None) => Err(CliError::Input("need --catalog or --edges".into())),
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(())
}

fn emit(out: &Output, value: &Value, table: impl FnOnce() -> String) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    if let Some(path) = &out.out {
        write_atomic(path, format!("{text}\n").as_bytes())?;
    }
    if out.json {
        println!("{text}");
    } else {
        print!("{}", table());
    }
    Ok(())
}

fn spectrum(g: &Graph, p: f64, steps: usize, out: &Output) -> Result<(), CliError> {
    if p == 1.0 {
        let spec = enumerate_delta1_spectrum(g)?;
        let value = json!({
            "p": 1,
            "certification": "exact",
            "eigenvalues": spec.iter().map(|e| json!({
                "lambda": e.lambda,
                "witness": e.witness.to_vector(g.n()),
            })).collect::<Vec<_>>(),
        });
        return emit(out, &value, || {
            spec.iter()
                .map(|e| format!("{:<8} exact  witness {:?}\n", e.lambda.to_string(), e.witness.to_vector(g.n())))
                .collect()
        });
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(CliError::Input(format!("p must be 1 or exceed 1, got {p}")));
    }
    let (label, values): (&str, Vec<(f64, f64)>) = if p == 2.0 {
        ("dense", eigenpairs_p2(g)?.into_iter().map(|(l, _)| (l, 0.0)).collect())
    } else {
        let mut v = Vec::new();
        for seed in p2_seeds(g)? {
            let b = continue_branch(g, &seed, p, steps)?;
            let last = b.samples.last().expect("branch has samples");
            v.push((last.lambda, last.residual));
        }
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        ("approximate", v)
    };
    let value = json!({
        "p": p,
        "certification": label,
        "eigenvalues": values.iter().map(|(l, r)| json!({"lambda": l, "residual": r})).collect::<Vec<_>>(),
    });
    emit(out, &value, || {
        values
            .iter()
            .map(|(l, r)| format!("{l:.17e}  {label}  residual {r:.2e}\n"))
            .collect()
    })
}

fn parse_pair(spec: &str, n: usize) -> Result<SetPair, CliError> {
    let bad = || CliError::Input(format!("pair {spec:?} is not of the form A/B"));
    let (a, b) = spec.split_once('/').ok_or_else(bad)?;
    let part = |s: &str| -> Result<VertexSet, CliError> {
        let vs = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(&v) = vs.iter().find(|&&v| v == 0 || v > n) {
            return Err(GraphError::VertexOutOfRange { v, n }.into());
        }
        Ok(VertexSet::from_vertices(vs))
    };
    Ok(SetPair::new(part(a)?, part(b)?)?)
}

struct SweepArgs<'a> {
    pmin: f64,
    pmax: f64,
    steps: usize,
    pairs: &'a [String],
    strict: bool,
    out: Option<&'a Path>,
}

fn sweep(g: &Graph, a: SweepArgs) -> Result<(), CliError> {
    if !(a.pmin > 1.0 && a.pmax >= a.pmin && a.pmax.is_finite()) || a.steps == 0 {
        return Err(CliError::Input("need 1 < pmin <= pmax and steps >= 1".into()));
    }
    let pairs = a.pairs.iter().map(|s| parse_pair(s, g.n())).collect::<Result<Vec<_>, _>>()?;
    let mut branches: Vec<EigenBranch> = Vec::new();
    let mut lost = Vec::new();
    let mut keep = |r: Result<EigenBranch, PSolverError>, lost: &mut Vec<String>| -> Result<(), CliError> {
        match r {
            Ok(b) => branches.push(b),
            Err(e) => match e.partial_branch() {
                Some(b) => {
                    lost.push(format!("{}: {e}", b.label));
                    branches.push(b.clone());
                }
                None => return Err(e.into()),
            },
        }
        Ok(())
    };
    for (k, seed) in p2_seeds(g)?.iter().enumerate() {
        for (target, dir) in [(a.pmin, "down"), (a.pmax, "up")] {
            if target == 2.0 || (dir == "up" && target < 2.0) || (dir == "down" && target > 2.0) {
                continue;
            }
            let r = continue_branch(g, seed, target, a.steps).map(|mut b| {
                b.label = format!("k{}-{dir}", k + 1);
                b
            });
            keep(r, &mut lost)?;
        }
    }
    for pair in pairs {
        let far = a.pmax.max(a.pmin * 1.0001);
        keep(set_pair_branch(g, pair, a.pmin, far, a.steps), &mut lost)?;
    }
    for l in &lost {
        eprintln!("warning: branch lost: {l}");
    }
    let mut csv = Vec::new();
    write_branches_csv(&branches, &mut csv)?;
    if !lost.is_empty() && a.strict {
        return Err(CliError::Numerical(format!("{} branch(es) lost", lost.len())));
    }
    match a.out {
        Some(path) => write_atomic(path, &csv),
        None => Ok(io::stdout().write_all(&csv)?),
    }
}

fn homology(g: &Graph, out: &Output) -> Result<(), CliError> {
    let rep = homological_spectrum(g)?;
    emit(out, &rep.to_json(), || {
        rep.thresholds
            .iter()
            .map(|t| {
                format!(
                    "{:<8} {:<14} strict {:?} closed {:?}\n",
                    t.lambda.to_string(),
                    if t.homological { "homological" } else { "-" },
                    t.strict_betti,
                    t.closed_betti
                )
            })
            .collect()
    })
}

fn cheeger(g: &Graph, p: f64, k: Option<usize>, out: &Output) -> Result<(), CliError> {
    if p != 1.0 && p != 2.0 {
        return Err(CliError::Input(format!("cheeger needs p = 1 or p = 2, got {p}")));
    }
    let mut rows = inequality_diagram(g, p)?;
    if let Some(k) = k {
        if k == 0 || k > rows.len() {
            return Err(CliError::Input(format!("k = {k} outside 1..={}", rows.len())));
        }
        rows.retain(|r| r.k == k);
    }
    emit(out, &diagram_report(&rows), || {
        rows.iter()
            .map(|r| {
                let failed = r.arrows.iter().filter(|a| a.status == plap::cheeger::ArrowStatus::Fail).count();
                format!(
                    "k={:<2} h_k={:<6} hhat_k={:<6} lambda_k={:.12} arrows {} failed {}\n",
                    r.k,
                    r.h_k.to_string(),
                    r.hhat_k.to_string(),
                    r.lambda_k,
                    r.arrows.len(),
                    failed
                )
            })
            .collect()
    })
}

fn verify(suite: Suite, seed: u64, out: &Output) -> Result<(), CliError> {
    let results = run_suite(suite, seed);
    let value = serde_json::to_value(&results).expect("results serialize");
    emit(out, &value, || results.iter().map(|r| format!("{r}\n")).collect())?;
    if results.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(CliError::Verify)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { graph, p, steps, out } => spectrum(&load(&graph)?, p, steps, &out),
        Command::Sweep {
            graph,
            pmin,
            pmax,
            steps,
            pairs,
            strict,
            out,
        } => sweep(
            &load(&graph)?,
            SweepArgs {
                pmin,
                pmax,
                steps,
                pairs: &pairs,
                strict,
                out: out.as_deref(),
            },
        ),
        Command::Homology { graph, out } => homology(&load(&graph)?, &out),
        Command::Cheeger { graph, p, k, out } => cheeger(&load(&graph)?, p, k, &out),
        Command::Verify { suite, seed, out } => verify(suite, seed.unwrap_or(VERIFY_SEED), &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
