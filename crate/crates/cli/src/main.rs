//! `mfkit`: verify matrix factorizations, compute quantum dimensions, check
//! the built-in catalog and search for graded rank-2 equivalences.
//!
//! Exit codes: 0 success, 1 failed check, 2 I/O or parse error, 3 ungraded input.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mfkit::catalog::{catalog_from_str, catalog_load, catalog_to_string, Catalog, CatalogReport};
use mfkit::exactalg::{poly_parse, rational_string, Polynomial};
use mfkit::groebner::GbConfig;
use mfkit::jacobi::JacobiData;
use mfkit::json::{certificate_from_str, certificate_to_string, mf_from_str, mf_to_string, search_request_from_str, SearchResponseJson};
use mfkit::mfcore::{diagonal_delta, knorrer_certificate, mf_verify, MatrixFactorization};
use mfkit::qdim::{certify_equivalence, session_convention, EquivalenceCertificate, QDimError};
use mfkit::search::search;

const OK: u8 = 0;
const FAILED: u8 = 1;
const INPUT: u8 = 2;
const UNGRADED: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Parser, Debug)]
#[command(name = "mfkit", version, about = "Exact matrix factorization toolkit")]
struct Cli {
    /// Cyclotomic order for coefficients in expressions given on the command line.
    #[arg(long, global = true, default_value_t = 1)]
    order: u32,
    /// Seed for randomized work; every command is currently deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, env = "MFKIT_JOBS", default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Gröbner step budget (per profile for `search`).
    #[arg(long, global = true)]
    budget_steps: Option<u64>,
    /// Print the calibrated sign convention and timings to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check both block identities and the grading of a factorization file.
    Verify { path: PathBuf },
    /// Quantum dimensions and equivalence certificate of a factorization file.
    Qdim {
        path: PathBuf,
        #[arg(long)]
        group_order: Option<u64>,
    },
    /// Milnor number of a quasi-homogeneous potential.
    Milnor {
        expr: String,
        /// Comma-separated variable order; defaults to the sorted identifiers of the expression.
        #[arg(long)]
        vars: Option<String>,
    },
    /// Built-in catalog of singularities and equivalence pairs.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
        /// Catalog file to use instead of the built-in one; re-verified on load.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Search for graded rank-2 factorizations described by a request file.
    Search { path: PathBuf },
    /// Certificate of W ~ W + uv.
    Knorrer {
        expr: String,
        #[arg(long)]
        vars: Option<String>,
    },
    /// Diagonal factorization of W(target) - W(source).
    Delta {
        expr: String,
        #[arg(long)]
        vars: Option<String>,
    },
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum CatalogAction {
    /// Check every entry, pair and chain; exits 1 if a counted row fails
    Verify,
    /// One line per entry with Milnor number, weights and status
    List,
    /// Catalog as JSON, including witnesses and certificates
    Export,
}

struct Failure(u8, String);

type Outcome = Result<(String, u8), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure(INPUT, e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(INPUT, format!("{}: {e}", path.display())))
}

/// Identifiers of `expr` other than `zetaK`, sorted.
fn identifiers(expr: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<String>| {
        let zeta = cur.strip_prefix("zeta").is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()));
        if !cur.is_empty() && !cur.starts_with(|c: char| c.is_ascii_digit()) && !zeta && !out.contains(cur) {
            out.push(cur.clone());
        }
        cur.clear();
    };
    for c in expr.chars() {
        if c.is_ascii_alphanumeric() || c == '_' {
            cur.push(c);
        } else {
            flush(&mut cur, &mut out);
        }
    }
    flush(&mut cur, &mut out);
    out.sort();
    out
}

fn parse_expr(expr: &str, vars: Option<&str>, order: u32) -> Result<Polynomial, Failure> {
    let names: Vec<String> = match vars {
        Some(v) => v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None => identifiers(expr),
    };
    let ring = mfkit::json::ring_of(&names).map_err(input)?;
    poly_parse(expr, &ring, order).map_err(input)
}

fn gb_config(cli: &Cli) -> GbConfig {
    GbConfig { max_steps: cli.budget_steps.unwrap_or(GbConfig::default().max_steps) }
}

fn certificate_table(c: &EquivalenceCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dim_left     {}", c.dims.left);
    let _ = writeln!(s, "dim_right    {}", c.dims.right);
    let _ = writeln!(s, "product      {}", c.dims.product);
    let _ = writeln!(s, "in Q>0       {}", c.product_in_positive_rationals());
    if let Some(k) = c.group_order_claim {
        let _ = writeln!(s, "group order  {k} ({})", if c.product_matches_group_order == Some(true) { "matches" } else { "differs" });
    }
    let _ = write!(s, "verdict      {}", if c.verdict { "invertible" } else { "not invertible" });
    s
}

fn certify(x: &MatrixFactorization, claim: Option<u64>) -> Result<EquivalenceCertificate, Failure> {
    certify_equivalence(x, claim).map_err(|e| match e {
        QDimError::Ungraded => Failure(UNGRADED, e.to_string()),
        _ => Failure(FAILED, e.to_string()),
    })
}

/// A factorization file, or the factorization inside a certificate file.
fn load_mf(path: &Path) -> Result<MatrixFactorization, Failure> {
    let text = read(path)?;
    mf_from_str(&text).or_else(|e| certificate_from_str(&text).map(|c| c.mf).map_err(|_| input(e)))
}

fn cmd_verify(cli: &Cli, path: &Path) -> Outcome {
    let x = load_mf(path)?;
    let rep = mf_verify(&x);
    let code = if rep.passed() { OK } else { FAILED };
    let out = match cli.format {
        Format::Table => rep.to_string().trim_end().to_string(),
        Format::Json => {
            let v: Vec<Value> = rep
                .violations
                .iter()
                .map(|v| json!({"check": format!("{:?}", v.check), "row": v.row, "col": v.col, "detail": v.detail}))
                .collect();
            serde_json::to_string_pretty(&json!({"passed": rep.passed(), "violations": v})).expect("json")
        }
    };
    Ok((out, code))
}

fn cmd_qdim(cli: &Cli, path: &Path, claim: Option<u64>) -> Outcome {
    let x = load_mf(path)?;
    let valid = mf_verify(&x).passed();
    let c = certify(&x, claim)?;
    let out = match cli.format {
        Format::Json => certificate_to_string(&c),
        Format::Table => certificate_table(&c),
    };
    if !valid {
        eprintln!("warning: the file does not satisfy the factorization identities");
    }
    Ok((out, if valid && c.accepted() { OK } else { FAILED }))
}

fn cmd_milnor(cli: &Cli, expr: &str, vars: Option<&str>) -> Outcome {
    let f = parse_expr(expr, vars, cli.order)?;
    let j = JacobiData::build_inferred(&f, &gb_config(cli)).map_err(|e| Failure(FAILED, e.to_string()))?;
    let weights: serde_json::Map<String, Value> =
        j.weights().iter().map(|(k, q)| (k.clone(), Value::String(rational_string(q)))).collect();
    let out = match cli.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "potential": f.to_string(),
            "milnor": j.milnor(),
            "weights": weights,
        }))
        .expect("json"),
        Format::Table => j.milnor().to_string(),
    };
    Ok((out, OK))
}

fn report_out(cli: &Cli, rep: &CatalogReport) -> String {
    match cli.format {
        Format::Json => serde_json::to_string_pretty(&json!({"passed": rep.passed(), "rows": rep.rows})).expect("json"),
        Format::Table => format!("{rep}{}", if rep.passed() { "all checks pass" } else { "some checks fail" }),
    }
}

fn catalog_list(cli: &Cli, c: &Catalog) -> String {
    let weights = |e: &mfkit::catalog::SingularityEntry| {
        e.potential.ring().vars().iter().map(|v| rational_string(e.weights.get(v).expect("every variable"))).collect::<Vec<_>>()
    };
    match cli.format {
        Format::Json => {
            let rows: Vec<Value> = c
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "name": e.name,
                        "milnor": e.expected_milnor,
                        "weights": weights(e),
                        "status": if e.enabled { "enabled" } else { "disabled" },
                        "potential": e.potential.to_string(),
                    })
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("json")
        }
        Format::Table => {
            let mut s = format!("{:<8} {:>4}  {:<24} {}\n", "name", "mu", "weights", "status");
            for e in &c.entries {
                let _ = writeln!(
                    s,
                    "{:<8} {:>4}  {:<24} {}",
                    e.name,
                    e.expected_milnor,
                    weights(e).join(", "),
                    if e.enabled { "enabled" } else { "disabled" }
                );
            }
            s.trim_end().to_string()
        }
    }
}

fn cmd_catalog(cli: &Cli, action: CatalogAction, file: Option<&Path>) -> Outcome {
    let (cat, loaded) = match file {
        None => (catalog_load(), None),
        Some(p) => {
            let (c, rep) = catalog_from_str(&read(p)?, true).map_err(input)?;
            (c, Some(rep))
        }
    };
    match action {
        CatalogAction::Verify => {
            let rep = loaded.unwrap_or_else(|| cat.verify(true));
            Ok((report_out(cli, &rep), if rep.passed() { OK } else { FAILED }))
        }
        CatalogAction::List => Ok((catalog_list(cli, &cat), OK)),
        CatalogAction::Export => Ok((catalog_to_string(&cat), OK)),
    }
}

fn cmd_search(cli: &Cli, path: &Path) -> Outcome {
    let (target, mut budget) = search_request_from_str(&read(path)?).map_err(input)?;
    if let Some(s) = cli.budget_steps {
        budget.max_steps = s;
    }
    let r = search(&target, &budget).map_err(|e| Failure(FAILED, e.to_string()))?;
    let accepted = r.accepted().count();
    let out = match cli.format {
        Format::Json => serde_json::to_string_pretty(&SearchResponseJson::from_result(&r)).expect("json"),
        Format::Table => {
            let mut s = format!(
                "profiles {}/{}, nodes {}, solutions {}, accepted {}, {} ms\n",
                r.stats.profiles_tried,
                r.stats.profiles_total,
                r.stats.nodes,
                r.solutions.len(),
                accepted,
                r.stats.elapsed_ms
            );
            for c in &r.certificates {
                let _ = writeln!(s, "---\n{}", certificate_table(c));
            }
            s.trim_end().to_string()
        }
    };
    Ok((out, if accepted > 0 { OK } else { FAILED }))
}

fn cmd_knorrer(cli: &Cli, expr: &str, vars: Option<&str>) -> Outcome {
    let w = parse_expr(expr, vars, cli.order)?;
    let c = certify(&knorrer_certificate(&w), None)?;
    let out = match cli.format {
        Format::Json => certificate_to_string(&c),
        Format::Table => certificate_table(&c),
    };
    Ok((out, if c.verdict { OK } else { FAILED }))
}

fn cmd_delta(cli: &Cli, expr: &str, vars: Option<&str>) -> Outcome {
    let w = parse_expr(expr, vars, cli.order)?;
    if w.ring().arity() == 0 {
        return Err(Failure(INPUT, "potential has no variables".into()));
    }
    let x = diagonal_delta(&w);
    let out = match cli.format {
        Format::Json => mf_to_string(&x),
        Format::Table => {
            let mut s = format!("{} -> {} : {}\n", x.source_vars().join(","), x.target_vars().join(","), x.potential());
            for (name, m) in [("d1", x.d1()), ("d0", x.d0())] {
                let _ = writeln!(s, "{name}:");
                for r in m.row_vecs() {
                    let _ = writeln!(s, "  [{}]", r.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "));
                }
            }
            s.trim_end().to_string()
        }
    };
    Ok((out, OK))
}

fn run(cli: &Cli) -> Outcome {
    if cli.order == 0 {
        return Err(Failure(INPUT, "--order must be positive".into()));
    }
    if cli.verbose {
        match session_convention() {
            Ok(c) => eprintln!("sign convention: {c:?}"),
            Err(e) => eprintln!("calibration failed: {e}"),
        }
    }
    match &cli.command {
        Command::Verify { path } => cmd_verify(cli, path),
        Command::Qdim { path, group_order } => cmd_qdim(cli, path, *group_order),
        Command::Milnor { expr, vars } => cmd_milnor(cli, expr, vars.as_deref()),
        Command::Catalog { action, file } => cmd_catalog(cli, *action, file.as_deref()),
        Command::Search { path } => cmd_search(cli, path),
        Command::Knorrer { expr, vars } => cmd_knorrer(cli, expr, vars.as_deref()),
        Command::Delta { expr, vars } => cmd_delta(cli, expr, vars.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT } else { OK });
        }
    };
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    let start = std::time::Instant::now();
    let code = match run(&cli) {
        Ok((out, code)) => {
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = writeln!(std::io::stdout().lock(), "{out}");
            code
        }
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    };
    if cli.verbose {
        eprintln!("elapsed: {} ms", start.elapsed().as_millis());
    }
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identifiers_skip_numbers_and_zeta() {
        assert_eq!(identifiers("x1^6*x2 + zeta3*y - 2*x1"), ["x1", "x2", "y"]);
        assert!(identifiers("3 + 1/2").is_empty());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
