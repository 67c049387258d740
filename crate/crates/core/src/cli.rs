//! Command-line front end: config parsing and the six commands.
//!
//! Exit codes: 0 success, 1 failed check or rejected input, 2 usage, 3 numeric failure.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Deserialize;
use serde_json::Value;

use crate::error::Error;
use crate::exterior::PolyvectorForm;
use crate::functional::{el_residual, mc_residual, phi, phi_powerseries, variation_report, Variant};
use crate::hodge::sample_ker_delta;
use crate::json;
use crate::report::{reports_to_json, Report};
use crate::search::{find_critical_point, SearchConfig};
use crate::torus_field::TorusSpec;
use crate::verify::{run_suite, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    Phi,
    Variation,
    ElScan,
    Search,
    Powerseries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Statement,
    Proof,
}

#[derive(Parser, Debug)]
#[command(name = "kstorus", about = "Polyvector DGLA and the extended functional on flat tori", version)]
struct Args {
    /// verify | phi | variation | el-scan | search | powerseries
    command: Option<Command>,
    #[arg(long = "n")]
    n: Option<usize>,
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// residual tolerance for search
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// defaults to stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// e.g. "1,1;0,2"
    #[arg(long = "degree-restriction")]
    degree_restriction: Option<String>,
    /// JSON file with any of the above; flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<Command>,
    n: Option<usize>,
    #[serde(rename = "K")]
    k: Option<usize>,
    seed: Option<u64>,
    tolerance: Option<f64>,
    variant: Option<String>,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    degree_restriction: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub variant: Variant,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub degree_restriction: Option<Vec<(usize, usize)>>,
    /// n and K came from the command line or config rather than the defaults
    pub spec_given: bool,
}

/// A usage error, or clap's help/version text (exit 0).
#[derive(Debug)]
pub struct UsageError {
    pub message: String,
    pub code: i32,
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError { message: msg.into(), code: EXIT_USAGE }
}

/// "p,q;p,q;..." into bidegree pairs.
pub fn parse_restriction(s: &str) -> Result<Vec<(usize, usize)>, String> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let parts: Vec<&str> = t.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [p, q] => Ok((p.parse().map_err(|_| format!("bad p in {t:?}"))?, q.parse().map_err(|_| format!("bad q in {t:?}"))?)),
                _ => Err(format!("bidegree {t:?} is not p,q")),
            }
        })
        .collect()
}

pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(std::iter::once("kstorus".into()).chain(argv.into_iter().map(Into::into)))
        .map_err(|e| UsageError { message: e.render().to_string(), code: if e.use_stderr() { EXIT_USAGE } else { EXIT_OK } })?;
    let file = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("config {}: {e}", p.display())))?;
            serde_json::from_str::<FileConfig>(&text).map_err(|e| usage(format!("config {}: {e}", p.display())))?
        }
        None => FileConfig::default(),
    };
    let command = args.command.or(file.command).ok_or_else(|| usage("no command given"))?;
    let spec_given = args.n.or(file.n).is_some() || args.k.or(file.k).is_some();
    let n = args.n.or(file.n).unwrap_or(2);
    let k = args.k.or(file.k).unwrap_or(1);
    if n < 1 {
        return Err(usage("n must be at least 1"));
    }
    let tolerance = args.tolerance.or(file.tolerance).unwrap_or(1e-8);
    if !(tolerance > 0.0) {
        return Err(usage("tolerance must be positive"));
    }
    let variant = match args.variant {
        Some(VariantArg::Statement) => Variant::Statement,
        Some(VariantArg::Proof) => Variant::Proof,
        None => match &file.variant {
            Some(v) => v.parse().map_err(|e: Error| usage(e.to_string()))?,
            None => Variant::Statement,
        },
    };
    let degree_restriction = match args.degree_restriction.or(file.degree_restriction) {
        Some(s) => {
            let r = parse_restriction(&s).map_err(usage)?;
            if let Some((p, q)) = r.iter().find(|(p, q)| *p > n || *q > n) {
                return Err(usage(format!("bidegree ({p},{q}) exceeds n = {n}")));
            }
            Some(r)
        }
        None => None,
    };
    Ok(RunConfig {
        command,
        n,
        k,
        seed: args.seed.or(file.seed).unwrap_or(0),
        tolerance,
        variant,
        input: args.input.or(file.input),
        output: args.output.or(file.output),
        degree_restriction,
        spec_given,
    })
}

/// What a command produced and the exit code it earns.
struct Outcome {
    value: Value,
    code: i32,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NumericFailure { .. } => EXIT_NUMERIC,
        _ => EXIT_CHECK,
    }
}

/// Module errors on an input become a single failed report entry.
fn error_report(cfg: &RunConfig, spec: TorusSpec, e: &Error) -> Outcome {
    let value = json::object(vec![("error", Value::from(e.to_string()))]);
    let r = Report::new(command_name(cfg.command), spec, cfg.seed, value, 0.0, false);
    Outcome { value: r.to_json(), code: exit_code(e) }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Verify => "verify",
        Command::Phi => "phi",
        Command::Variation => "variation",
        Command::ElScan => "el-scan",
        Command::Search => "search",
        Command::Powerseries => "powerseries",
    }
}

fn read_input(cfg: &RunConfig) -> Result<Value, UsageError> {
    let p = cfg.input.as_ref().ok_or_else(|| usage(format!("{} needs --input", command_name(cfg.command))))?;
    let text = fs::read_to_string(p).map_err(|e| usage(format!("input {}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("input {}: {e}", p.display())))
}

/// Members of an input object, rejecting unknown keys.
fn fields(v: Value, names: &[&str]) -> Result<Vec<Value>, UsageError> {
    let Value::Object(mut m) = v else { return Err(usage("input must be a JSON object")) };
    if let Some(k) = m.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(usage(format!("unknown input key {k:?}")));
    }
    names.iter().map(|n| m.remove(*n).ok_or_else(|| usage(format!("input lacks {n:?}")))).collect()
}

fn check_spec(cfg: &RunConfig, spec: TorusSpec) -> Result<(), UsageError> {
    if cfg.spec_given && (spec.n != cfg.n || spec.k != cfg.k) {
        return Err(usage(format!("input has n={}, K={} but n={}, K={} was requested", spec.n, spec.k, cfg.n, cfg.k)));
    }
    Ok(())
}

fn load_form(v: Value) -> Result<PolyvectorForm, UsageError> {
    json::form_from_value(v).map_err(|e| usage(format!("input form: {e}")))
}

fn run_command(cfg: &RunConfig) -> Result<Outcome, UsageError> {
    match cfg.command {
        Command::Verify => {
            let spec = TorusSpec::new(cfg.n, cfg.k).map_err(|e| usage(e.to_string()))?;
            let reports = run_suite(&VerifyConfig { spec, seed: cfg.seed });
            let ok = reports.iter().all(|r| r.pass);
            Ok(Outcome { value: reports_to_json(&reports), code: if ok { EXIT_OK } else { EXIT_CHECK } })
        }
        Command::Phi => {
            let g = load_form(read_input(cfg)?)?;
            check_spec(cfg, g.spec())?;
            Ok(match phi(&g) {
                Ok(v) => Outcome { value: json::object(vec![("value", json::complex(v))]), code: EXIT_OK },
                Err(e) => error_report(cfg, g.spec(), &e),
            })
        }
        Command::Variation => {
            let [g, b]: [Value; 2] = fields(read_input(cfg)?, &["gamma", "direction"])?.try_into().expect("two fields");
            let (g, b) = (load_form(g)?, load_form(b)?);
            check_spec(cfg, g.spec())?;
            if b.spec() != g.spec() {
                return Err(usage("gamma and direction have different specs"));
            }
            Ok(match variation_report(&g, &b) {
                Ok(r) => Outcome {
                    value: json::object(vec![
                        ("closed_form", json::complex(r.closed_form)),
                        ("oracle", json::complex(r.oracle)),
                        ("abs_err", json::num(r.abs_err)),
                        ("rel_err", json::num(r.rel_err)),
                        ("noise_floor", json::num(r.noise_floor)),
                        ("terms", Value::Array(r.terms.iter().map(|z| json::complex(*z)).collect())),
                    ]),
                    code: EXIT_OK,
                },
                Err(e) => error_report(cfg, g.spec(), &e),
            })
        }
        Command::ElScan => {
            let g = load_form(read_input(cfg)?)?;
            check_spec(cfg, g.spec())?;
            Ok(match el_scan(cfg, &g) {
                Ok(value) => Outcome { value, code: EXIT_OK },
                Err(e) => error_report(cfg, g.spec(), &e),
            })
        }
        Command::Search => {
            let (spec, start) = match &cfg.input {
                Some(_) => {
                    let g = load_form(read_input(cfg)?)?;
                    check_spec(cfg, g.spec())?;
                    (g.spec(), g)
                }
                None => {
                    let spec = TorusSpec::new(cfg.n, cfg.k).map_err(|e| usage(e.to_string()))?;
                    match sample_ker_delta(spec, cfg.seed, 0.05) {
                        Ok(g) => (spec, g),
                        Err(e) => return Ok(error_report(cfg, spec, &e)),
                    }
                }
            };
            let sc = SearchConfig {
                tol: cfg.tolerance,
                seed: cfg.seed,
                degree_restriction: cfg.degree_restriction.clone(),
                variant: cfg.variant,
                ..SearchConfig::default()
            };
            Ok(match find_critical_point(&sc, &start) {
                Ok(r) => Outcome { value: r.to_json(), code: EXIT_OK },
                Err(e) => error_report(cfg, spec, &e),
            })
        }
        Command::Powerseries => {
            let [gh, al]: [Value; 2] = fields(read_input(cfg)?, &["gamma_hat", "alpha"])?.try_into().expect("two fields");
            let gh = json::tpoly_from_value(gh).map_err(|e| usage(format!("gamma_hat: {e}")))?;
            let al = json::tpoly_from_value(al).map_err(|e| usage(format!("alpha: {e}")))?;
            check_spec(cfg, gh.spec)?;
            Ok(match phi_powerseries(&gh, &al) {
                Ok(c) => Outcome {
                    value: json::object(vec![
                        ("order", Value::from(c.len() - 1)),
                        ("coeffs", Value::Array(c.iter().map(|z| json::complex(*z)).collect())),
                    ]),
                    code: EXIT_OK,
                },
                Err(e) => error_report(cfg, gh.spec, &e),
            })
        }
    }
}

fn el_scan(cfg: &RunConfig, g: &PolyvectorForm) -> crate::error::Result<Value> {
    let comps = el_residual(g, cfg.variant)?;
    let keep = |pq: &(usize, usize)| cfg.degree_restriction.as_ref().map(|r| r.contains(pq)).unwrap_or(true);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for ((p, q), r) in comps.iter().filter(|(pq, _)| keep(pq)) {
        worst = worst.max(r.max_abs());
        rows.push(json::object(vec![
            ("p", Value::from(*p)),
            ("q", Value::from(*q)),
            ("max_abs", json::num(r.max_abs())),
            ("residual", json::form_to_json(r)),
        ]));
    }
    let mut pairs = vec![
        ("variant", Value::from(cfg.variant.name())),
        ("components", Value::Array(rows)),
        ("residual_norm", json::num(worst)),
    ];
    if g.homogeneous_degree() == Some(1) || g.is_zero() {
        pairs.push(("mc_residual", json::num(mc_residual(g)?.max_abs())));
    }
    Ok(json::object(pairs))
}

/// Run a parsed config, writing the result; returns the exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let out = match run_command(cfg) {
        Ok(o) => o,
        Err(u) => {
            eprintln!("kstorus: {}", u.message);
            return u.code;
        }
    };
    let text = json::to_string(&out.value);
    match &cfg.output {
        Some(p) => {
            if let Err(e) = fs::write(p, text) {
                eprintln!("kstorus: output {}: {e}", p.display());
                return EXIT_USAGE;
            }
        }
        None => print!("{text}"),
    }
    out.code
}

/// Parse and run; the binary's whole body.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match parse_config(argv) {
        Ok(cfg) => run(&cfg),
        Err(u) => {
            if u.code == EXIT_OK {
                print!("{}", u.message);
            } else {
                eprint!("{}", u.message);
                if !u.message.ends_with('\n') {
                    eprintln!();
                }
            }
            u.code
        }
    }
}
