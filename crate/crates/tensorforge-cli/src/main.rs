// SPDX-License-Identifier: Apache-2.0

//! `tensorforge` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verified property fails (the report is
//! still written), 2 on usage, input or budget errors.

mod report;

use clap::{Args, Parser, Subcommand};
use report::{Format, Report};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use tensorforge::constructions::{augment, clone_tensor, MatrixSubspace};
use tensorforge::mu_optimizer::{grid_subdivisions, minimize_mu, sampled_exact_discrepancy};
use tensorforge::param_search::{default_mu, find_min_m, verify_appendix};
use tensorforge::phi_family::{verify_family_structure, PhiParams};
use tensorforge::rank_bounds::{certified_rank, generic_rank, Effort};
use tensorforge::rational::{format_q, parse_q};
use tensorforge::secant_geometry::{secant_formula_in_stated_range, terracini_table};
use tensorforge::tensor_core::{
    flattening_ranks, matmul_tensor, tensor_from_value, tensor_to_value,
};
use tensorforge::{Mode, Q, Tensor3};

const EXACT_CHECK_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "tensorforge", version, about = "Exact tensor rank tools and parameter searches")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Worker threads.
    #[arg(long, global = true, env = "TENSORFORGE_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest Φ family to enumerate.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget: u64,
    /// Leave wall-clock seconds out of the report.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Grid search for μ = min max{μ₁, μ₂}.
    Mu {
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        refine: u32,
        /// Compare float and rational objectives on 1000 seeded grid points.
        #[arg(long)]
        exact_check: bool,
    },
    /// Smallest m with a nonempty feasibility window.
    Params {
        #[arg(long, default_value = "52733/100000")]
        mu: String,
        #[arg(long, default_value_t = 60000)]
        m_max: u64,
        #[arg(long)]
        k_max: Option<u64>,
        /// Same as --output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Checks the r lower bounds and the dimension inequality on sampled (k, m).
    VerifyAppendix {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 10_000)]
        m_max: u64,
        #[arg(long)]
        mu: Option<String>,
        /// Extra pairs as k:m, for example 328:48352.
        #[arg(long = "extra", value_parser = parse_pair)]
        extra: Vec<(u64, u64)>,
    },
    /// Structure of the Φ family and its unit set.
    Phi {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        theta: usize,
        #[arg(long)]
        sigma: usize,
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Certified lower and upper rank bounds.
    Rank {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        restarts: usize,
        #[arg(long, default_value_t = 600)]
        iterations: usize,
    },
    /// Kronecker product with the all-ones tensor of side v.
    Clone {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        v: usize,
    },
    /// T + T_{U_A} + T_{U_B} + T_{U_C}; missing subspaces are zero.
    Augment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        ua: Option<PathBuf>,
        #[arg(long)]
        ub: Option<PathBuf>,
        #[arg(long)]
        uc: Option<PathBuf>,
    },
    /// Sampled tangent-space ranks against min{r(3m−2), m³}.
    Secant {
        /// Comma-separated list of m.
        #[arg(long, default_value = "4,5", value_delimiter = ',')]
        m: Vec<usize>,
        /// Largest r per m; defaults to the generic rank.
        #[arg(long)]
        r_max: Option<usize>,
        #[arg(long, default_value_t = 3)]
        trials: usize,
    },
    /// Canonical form, generators and summaries of tensor files.
    Tensor {
        #[arg(long, conflicts_with_all = ["diag", "matmul"])]
        input: Option<PathBuf>,
        #[arg(long, conflicts_with = "matmul")]
        diag: Option<usize>,
        /// Matrix multiplication tensor as p,q,s.
        #[arg(long, value_delimiter = ',')]
        matmul: Option<Vec<usize>>,
        /// Print dims, nonzeros and flattening ranks instead of the tensor.
        #[arg(long)]
        info: bool,
    },
}

fn parse_pair(s: &str) -> Result<(u64, u64), String> {
    let (k, m) = s.split_once(':').ok_or_else(|| format!("expected k:m, got {s}"))?;
    let k = k.parse().map_err(|e| format!("bad k in {s}: {e}"))?;
    let m = m.parse().map_err(|e| format!("bad m in {s}: {e}"))?;
    Ok((k, m))
}

/// A finished command: its report and whether every verified property held.
struct Outcome {
    report: Report,
    passed: bool,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Self { report, passed: true }
    }
}

type CmdResult = Result<Outcome, String>;

fn lib_err(e: tensorforge::Error) -> String {
    e.to_string()
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("malformed JSON in {}: {e}", path.display()))
}

fn read_tensor(path: &Path) -> Result<Tensor3, String> {
    tensor_from_value(&read_json(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_subspace(path: Option<&PathBuf>, ambient: [usize; 2]) -> Result<MatrixSubspace, String> {
    match path {
        None => Ok(MatrixSubspace::zero(ambient)),
        Some(p) => MatrixSubspace::from_json_value(&read_json(p)?).map_err(|e| format!("{}: {e}", p.display())),
    }
}

fn parse_mu(s: &str) -> Result<Q, String> {
    parse_q(s).map_err(|e| format!("--mu: {e}"))
}

fn run_mu(step: f64, refine: u32, exact_check: bool, seed: u64) -> CmdResult {
    let rep = minimize_mu(step, refine).map_err(lib_err)?;
    let mut json = rep.to_json_value();
    let mut passed = true;
    if exact_check {
        let n = grid_subdivisions(step).map_err(lib_err)?;
        let gap = sampled_exact_discrepancy(n, 1000, seed).map_err(lib_err)?;
        passed = gap < EXACT_CHECK_TOL;
        json["exact_check"] = json!({"points": 1000, "max_gap": gap, "tolerance": EXACT_CHECK_TOL, "passed": passed});
    }
    Ok(Outcome { report: Report::new(json), passed })
}

fn run_params(mu: &str, m_max: u64, k_max: Option<u64>) -> CmdResult {
    let mu = parse_mu(mu)?;
    let rep = find_min_m(&mu, m_max, k_max).map_err(lib_err)?;
    let mut json = rep.to_json_value();
    json["mu"] = json!(format_q(&mu));
    json["feasible"] = json!(rep.params.is_some());
    Ok(Outcome::ok(Report::new(json)))
}

fn run_appendix(samples: usize, m_max: u64, mu: Option<&str>, extra: &[(u64, u64)], seed: u64) -> CmdResult {
    let mu = mu.map(parse_mu).transpose()?.unwrap_or_else(default_mu);
    let rep = verify_appendix(m_max, samples, seed, &mu, extra).map_err(lib_err)?;
    let mut json = rep.to_json_value();
    json["mu"] = json!(format_q(&mu));
    json["seed"] = json!(seed);
    Ok(Outcome { report: Report::new(json), passed: rep.passed() })
}

fn run_phi(r: usize, theta: usize, sigma: usize, verify: bool, samples: usize, g: &Global) -> CmdResult {
    let params = PhiParams::new(r, theta, sigma).map_err(lib_err)?;
    let mut json = json!({
        "r": r,
        "theta": theta,
        "sigma": sigma,
        "block": params.block(),
        "family_size": params.family_size().to_string(),
    });
    if !verify {
        return Ok(Outcome::ok(Report::new(json)));
    }
    let rep = verify_family_structure(&params, g.budget, samples, g.seed).map_err(lib_err)?;
    json["verification"] = rep.to_json_value();
    json["passed"] = json!(rep.all_passed());
    let rows = rep
        .assertions
        .iter()
        .map(|a| vec![a.name.clone(), a.passed.to_string(), a.detail.clone()])
        .collect();
    Ok(Outcome {
        report: Report { json, table: Some((vec!["check", "passed", "detail"], rows)), compact: false },
        passed: rep.all_passed(),
    })
}

fn run_rank(input: &Path, restarts: usize, iterations: usize, seed: u64) -> CmdResult {
    let t = read_tensor(input)?;
    let cert = certified_rank(&t, &Effort { restarts, iterations, seed }).map_err(lib_err)?;
    let mut json = cert.to_json_value();
    json["dims"] = json!(t.dims());
    Ok(Outcome::ok(Report::new(json)))
}

fn run_secant(ms: &[usize], r_max: Option<usize>, trials: usize, seed: u64) -> CmdResult {
    let mut cases = Vec::new();
    for &m in ms {
        if m == 0 {
            return Err("--m values must be positive".into());
        }
        let top = r_max.unwrap_or(generic_rank(m as u64) as usize);
        cases.extend((1..=top).map(|r| (m, r)));
    }
    let table = terracini_table(&cases, trials, seed).map_err(lib_err)?;
    let mut passed = true;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for (m, r, formula, sampled) in table {
        let matched = formula == sampled;
        let stated = secant_formula_in_stated_range(m as u64);
        passed &= matched || !stated;
        rows.push(vec![m.to_string(), r.to_string(), formula.to_string(), sampled.to_string(), matched.to_string()]);
        json_rows.push(json!({"m": m, "r": r, "formula": formula, "sampled": sampled, "match": matched, "stated_range": stated}));
    }
    let json = json!({"rows": json_rows, "trials": trials, "seed": seed, "passed": passed});
    Ok(Outcome {
        report: Report { json, table: Some((vec!["m", "r", "formula", "sampled", "match"], rows)), compact: false },
        passed,
    })
}

fn run_tensor(input: Option<&PathBuf>, diag: Option<usize>, matmul: Option<&[usize]>, info: bool) -> CmdResult {
    let t = match (input, diag, matmul) {
        (Some(p), _, _) => read_tensor(p)?,
        (None, Some(n), _) => Tensor3::diag(n),
        (None, None, Some(&[p, q, s])) => matmul_tensor(p, q, s).map_err(lib_err)?,
        (None, None, Some(other)) => return Err(format!("--matmul takes p,q,s, got {} values", other.len())),
        _ => return Err("tensor needs one of --input, --diag or --matmul p,q,s".into()),
    };
    if !info {
        return Ok(Outcome::ok(Report::tensor(tensor_to_value(&t))));
    }
    let ranks = flattening_ranks(&t);
    Ok(Outcome::ok(Report::new(json!({
        "dims": t.dims(),
        "nnz": t.nnz(),
        "flattening_ranks": ranks.ranks,
        "concise": ranks.is_concise(),
        "modes": Mode::ALL.map(|m| m.letter().to_string()),
    }))))
}

fn dispatch(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    match &cli.command {
        Command::Mu { step, refine, exact_check } => run_mu(*step, *refine, *exact_check, g.seed),
        Command::Params { mu, m_max, k_max, .. } => run_params(mu, *m_max, *k_max),
        Command::VerifyAppendix { samples, m_max, mu, extra } => {
            run_appendix(*samples, *m_max, mu.as_deref(), extra, g.seed)
        }
        Command::Phi { r, theta, sigma, verify, samples } => run_phi(*r, *theta, *sigma, *verify, *samples, g),
        Command::Rank { input, restarts, iterations } => run_rank(input, *restarts, *iterations, g.seed),
        Command::Clone { input, v } => {
            let t = clone_tensor(&read_tensor(input)?, *v).map_err(lib_err)?;
            Ok(Outcome::ok(Report::tensor(tensor_to_value(&t))))
        }
        Command::Augment { input, ua, ub, uc } => {
            let t = read_tensor(input)?;
            let [a, b, c] = t.dims();
            let ua = read_subspace(ua.as_ref(), [b, c])?;
            let ub = read_subspace(ub.as_ref(), [a, c])?;
            let uc = read_subspace(uc.as_ref(), [a, b])?;
            let out = augment(&t, &ua, &ub, &uc).map_err(lib_err)?;
            Ok(Outcome::ok(Report::tensor(tensor_to_value(&out))))
        }
        Command::Secant { m, r_max, trials } => run_secant(m, *r_max, *trials, g.seed),
        Command::Tensor { input, diag, matmul, info } => run_tensor(input.as_ref(), *diag, matmul.as_deref(), *info),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.global.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let started = Instant::now();
    let mut outcome = match dispatch(&cli) {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    if !cli.global.no_timing && !outcome.report.compact {
        if let Some(obj) = outcome.report.json.as_object_mut() {
            obj.insert("seconds".into(), json!(started.elapsed().as_secs_f64()));
        }
    }
    let text = outcome.report.render(cli.global.format);
    let target = match &cli.command {
        Command::Params { report: Some(p), .. } => Some(p),
        _ => cli.global.output.as_ref(),
    };
    match target {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed; see report");
        ExitCode::from(1)
    }
}
