//! The named check suite run by `verify`.
//!
//! Every check draws its randomness from its own stream, seeded from the run
//! seed and the check name, so checks are independent of each other and of
//! the order they run in. Reports come back sorted by name.

use std::collections::HashMap;
use std::panic::AssertUnwindSafe;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::error::Result;
use crate::exterior::{BasisLabel, PolyvectorForm};
use crate::functional::{
    el_residual_norm, first_variation, mc_residual, pairing, phi_extended, phi_powerseries, quadratic_reduction,
    variation_oracle, variation_oracle_any_direction, variation_report, TPolynomial, Variant,
};
use crate::hodge::{harmonic_projection, sample_ker_delta, Hodge};
use crate::json::{self, num};
use crate::omega::{contract_omega, dbar_j, dbar_j_conjugated, delta_j, expand_omega, tian_todorov_residual};
use crate::report::Report;
use crate::sample::{gaussian, in_band_supports, random_degree, random_element, random_homogeneous, random_scalar, Support};
use crate::search::{find_critical_point, find_critical_point_traced, gradient, mc_seed, project_feasible, SearchConfig};
use crate::torus_field::{DerivKind, FourierScalar, TorusSpec};

/// The degree-1 bidegree of the three-fold restriction.
const BCOV: [(usize, usize); 1] = [(1, 1)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub spec: TorusSpec,
    pub seed: u64,
}

struct Ctx {
    spec: TorusSpec,
    seed: u64,
}

impl Ctx {
    fn rng(&self, name: &str) -> ChaCha8Rng {
        // FNV-1a, so streams do not depend on the std hasher
        let mut h: u64 = 0xcbf29ce484222325;
        for b in name.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }

    fn report(&self, name: &str, value: Value, tol: f64, pass: bool) -> Report {
        Report::new(name, self.spec, self.seed, value, tol, pass)
    }
}

type Check = fn(&Ctx, &str) -> Result<Report>;

fn checks() -> Vec<(&'static str, Check)> {
    vec![
        ("adjoint.dbar", adjoint_dbar),
        ("adjoint.delta", adjoint_delta),
        ("adjoint.delta_inverse", adjoint_delta_inverse),
        ("bracket.graded_antisymmetry", bracket_antisymmetry),
        ("conjugation.anticommute", conjugation_anticommute),
        ("conjugation.dbar_j", conjugation_dbar_j),
        ("dgla.dbar_derivation_bracket", dbar_derivation_bracket),
        ("dgla.dbar_derivation_wedge", dbar_derivation_wedge),
        ("dgla.dbar_squared", dbar_squared),
        ("dgla.delta_squared", delta_squared),
        ("dgla.jacobi", jacobi),
        ("el.adjudication", el_adjudication),
        ("el.stationarity_equivalence", el_stationarity_equivalence),
        ("hodge.inverse_anticommutes", hodge_inverse_anticommutes),
        ("hodge.kernel_decomposition", hodge_kernel_decomposition),
        ("hodge.kernel_projection", hodge_kernel_projection),
        ("hodge.sample_ker_delta", hodge_sample),
        ("mc.bcov_consistency", mc_bcov),
        ("omega.roundtrip", omega_roundtrip),
        ("powerseries.oracle", powerseries_oracle),
        ("proof.quadratic_reduction", proof_quadratic_reduction),
        ("search.gradient_vs_oracle", search_gradient),
        ("search.iterates", search_iterates),
        ("tian_todorov.ker_consequence", tt_ker_consequence),
        ("tian_todorov.lemma", tt_lemma),
        ("torus.leibniz", torus_leibniz),
        ("torus.mixed_partials", torus_mixed_partials),
        ("torus.zero_mode_of_derivative", torus_zero_mode),
        ("variation.closed_form_vs_oracle", variation_closed_form),
        ("variation.gauge_dependence", variation_gauge),
        ("variation.off_kernel_scan", variation_off_kernel),
        ("wedge.associativity", wedge_associativity),
        ("wedge.graded_commutativity", wedge_commutativity),
    ]
}

/// Names of every check, in report order.
pub fn check_names() -> Vec<&'static str> {
    let mut v: Vec<&'static str> = checks().into_iter().map(|(n, _)| n).collect();
    v.sort();
    v
}

/// Run the whole suite. A check whose computation errors (or panics) becomes
/// a failed report carrying the message.
pub fn run_suite(cfg: &VerifyConfig) -> Vec<Report> {
    run_filtered(cfg, |_| true)
}

/// Run only the named checks (unknown names are ignored), in report order.
pub fn run_checks(cfg: &VerifyConfig, names: &[&str]) -> Vec<Report> {
    run_filtered(cfg, |n| names.contains(&n))
}

fn run_filtered(cfg: &VerifyConfig, keep: impl Fn(&str) -> bool) -> Vec<Report> {
    let ctx = Ctx { spec: cfg.spec, seed: cfg.seed };
    let mut all = checks();
    all.retain(|(n, _)| keep(n));
    all.sort_by_key(|(n, _)| *n);
    all.into_iter()
        .map(|(name, f)| {
            let failed = |msg: String| ctx.report(name, json::object(vec![("error", Value::from(msg))]), 0.0, false);
            match std::panic::catch_unwind(AssertUnwindSafe(|| f(&ctx, name))) {
                Ok(Ok(r)) => r,
                Ok(Err(e)) => failed(e.to_string()),
                Err(p) => failed(format!(
                    "panic: {}",
                    p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_default()
                )),
            }
        })
        .collect()
}

// ---- helpers

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn sign(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn max_value(name: &str, worst: f64, samples: usize) -> Value {
    json::object(vec![(name, num(worst)), ("samples", Value::from(samples))])
}

fn full(spec: TorusSpec) -> Support {
    Support::full(spec)
}

/// Random homogeneous element of a random degree.
fn rand_hom(spec: TorusSpec, rng: &mut ChaCha8Rng, support: &Support) -> PolyvectorForm {
    let d = random_degree(spec.n, rng);
    random_homogeneous(spec, rng, d, 3, support, 2)
}

/// Random element spread over several degrees.
fn rand_mixed(spec: TorusSpec, rng: &mut ChaCha8Rng, support: &Support) -> PolyvectorForm {
    let mut x = PolyvectorForm::zero(spec);
    for _ in 0..3 {
        x = x.add(&rand_hom(spec, rng, support)).expect("shared spec");
    }
    x
}

/// One random mode on every label.
fn rand_dense(spec: TorusSpec, rng: &mut ChaCha8Rng) -> PolyvectorForm {
    random_element(spec, rng, &BasisLabel::all(spec.n), &full(spec), 1)
}

/// Random element of shifted degree `degree` on every label of that degree,
/// carrying exactly the negatives of the frequencies present in `x`, so that
/// pairings against x (or its derivatives) do not vanish for want of matching modes.
fn mirrored(spec: TorusSpec, rng: &mut ChaCha8Rng, x: &PolyvectorForm, degree: i32) -> PolyvectorForm {
    let mut freqs: Vec<crate::torus_field::Freq> =
        x.terms().values().flat_map(|f| f.nonzero_modes().into_iter().map(|(k, _)| k.neg())).collect();
    freqs.sort();
    freqs.dedup();
    let mut out = PolyvectorForm::zero(spec);
    for l in BasisLabel::all(spec.n).into_iter().filter(|l| l.degree() == degree) {
        let mut f = FourierScalar::zero(spec);
        for k in &freqs {
            f.set(k, gaussian(rng)).expect("negated in-band frequency");
        }
        *out.entry(l) = f;
    }
    out
}

fn unit_magnitude_kernel_sample(spec: TorusSpec, rng: &mut ChaCha8Rng) -> Result<PolyvectorForm> {
    sample_ker_delta(spec, rng.random(), 1.0)
}

// ---- torus_field

fn torus_mixed_partials(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let kinds = [DerivKind::Holomorphic, DerivKind::Antiholomorphic];
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = random_scalar(spec, &mut rng, &full(spec), 4);
        for j in 1..=spec.n {
            for k in 1..=spec.n {
                for kj in kinds {
                    for kk in kinds {
                        let a = f.derivative(j, kj)?.derivative(k, kk)?;
                        let b = f.derivative(k, kk)?.derivative(j, kj)?;
                        worst = worst.max(a.max_abs_diff(&b)?);
                    }
                }
            }
        }
    }
    let tol = 1e-12;
    Ok(ctx.report(name, max_value("max_abs_diff", worst, 100), tol, worst <= tol))
}

fn torus_leibniz(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let sup = in_band_supports(spec, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = random_scalar(spec, &mut rng, &sup[0], 3);
        let g = random_scalar(spec, &mut rng, &sup[1], 3);
        let j = rng.random_range(1..=spec.n);
        let kind = if rng.random_bool(0.5) { DerivKind::Holomorphic } else { DerivKind::Antiholomorphic };
        let lhs = f.multiply(&g)?.derivative(j, kind)?;
        let rhs = f.derivative(j, kind)?.multiply(&g)?.add(&f.multiply(&g.derivative(j, kind)?)?)?;
        worst = worst.max(lhs.max_abs_diff(&rhs)?);
    }
    let tol = 1e-12;
    Ok(ctx.report(name, max_value("max_abs_diff", worst, 100), tol, worst <= tol))
}

fn torus_zero_mode(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f = random_scalar(spec, &mut rng, &full(spec), 4);
        for j in 1..=spec.n {
            for kind in [DerivKind::Holomorphic, DerivKind::Antiholomorphic] {
                worst = worst.max(f.derivative(j, kind)?.zero_mode().norm());
            }
        }
    }
    Ok(ctx.report(name, max_value("max_abs_zero_mode", worst, 100), 0.0, worst == 0.0))
}

// ---- exterior_core

fn wedge_commutativity(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rand_hom(spec, &mut rng, &full(spec));
        let y = rand_hom(spec, &mut rng, &full(spec));
        let (dx, dy) = (deg(&x), deg(&y));
        let s = sign((dx + 1) * (dy + 1));
        worst = worst.max(x.wedge(&y)?.max_abs_diff(&y.wedge(&x)?.scale_re(s))?);
    }
    let tol = 1e-12;
    Ok(ctx.report(name, max_value("max_abs_diff", worst, 100), tol, worst <= tol))
}

fn wedge_associativity(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let sup = in_band_supports(spec, 3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rand_mixed(spec, &mut rng, &sup[0]);
        let y = rand_mixed(spec, &mut rng, &sup[1]);
        let z = rand_mixed(spec, &mut rng, &sup[2]);
        let a = x.wedge(&y)?.wedge(&z)?;
        let b = x.wedge(&y.wedge(&z)?)?;
        worst = worst.max(a.max_abs_diff(&b)?);
    }
    let tol = 1e-12;
    Ok(ctx.report(name, max_value("max_abs_diff", worst, 100), tol, worst <= tol))
}

fn bracket_antisymmetry(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rand_hom(spec, &mut rng, &full(spec));
        let y = rand_hom(spec, &mut rng, &full(spec));
        let s = -sign(deg(&x) * deg(&y));
        worst = worst.max(x.bracket(&y)?.max_abs_diff(&y.bracket(&x)?.scale_re(s))?);
    }
    let tol = 1e-12;
    Ok(ctx.report(name, max_value("max_abs_diff", worst, 100), tol, worst <= tol))
}

fn jacobi(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let sup = in_band_supports(spec, 3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rand_hom(spec, &mut rng, &sup[0]);
        let y = rand_hom(spec, &mut rng, &sup[1]);
        let z = rand_hom(spec, &mut rng, &sup[2]);
        // [x,[y,z]] = [[x,y],z] + (−1)^{deg x·deg y}[y,[x,z]]
        let lhs = x.bracket(&y.bracket(&z)?)?;
        let mut rhs = x.bracket(&y)?.bracket(&z)?;
        rhs.axpy(c(sign(deg(&x) * deg(&y))), &y.bracket(&x.bracket(&z)?)?)?;
        worst = worst.max(lhs.max_abs_diff(&rhs)?);
    }
    let tol = 1e-10;
    Ok(ctx.report(name, max_value("max_abs_diff", worst, 100), tol, worst <= tol))
}

fn dbar_squared(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rand_mixed(spec, &mut rng, &full(spec));
        worst = worst.max(dbar_j(&dbar_j(&x)?)?.max_abs());
    }
    let tol = 1e-10;
    Ok(ctx.report(name, max_value("max_abs", worst, 100), tol, worst <= tol))
}

fn delta_squared(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rand_mixed(spec, &mut rng, &full(spec));
        worst = worst.max(delta_j(&delta_j(&x)?)?.max_abs());
    }
    let tol = 1e-10;
    Ok(ctx.report(name, max_value("max_abs", worst, 100), tol, worst <= tol))
}

fn dbar_derivation_wedge(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let sup = in_band_supports(spec, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rand_hom(spec, &mut rng, &sup[0]);
        let y = rand_hom(spec, &mut rng, &sup[1]);
        // ∂̄(x∧y) = ∂̄x∧y + (−1)^{deg x+1} x∧∂̄y
        let lhs = dbar_j(&x.wedge(&y)?)?;
        let mut rhs = dbar_j(&x)?.wedge(&y)?;
        rhs.axpy(c(sign(deg(&x) + 1)), &x.wedge(&dbar_j(&y)?)?)?;
        worst = worst.max(lhs.max_abs_diff(&rhs)?);
    }
    let tol = 1e-10;
    Ok(ctx.report(name, max_value("max_abs_diff", worst, 100), tol, worst <= tol))
}

fn dbar_derivation_bracket(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let sup = in_band_supports(spec, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rand_hom(spec, &mut rng, &sup[0]);
        let y = rand_hom(spec, &mut rng, &sup[1]);
        // ∂̄[x,y] = [∂̄x,y] + (−1)^{deg x}[x,∂̄y]
        let lhs = dbar_j(&x.bracket(&y)?)?;
        let mut rhs = dbar_j(&x)?.bracket(&y)?;
        rhs.axpy(c(sign(deg(&x))), &x.bracket(&dbar_j(&y)?)?)?;
        worst = worst.max(lhs.max_abs_diff(&rhs)?);
    }
    let tol = 1e-10;
    Ok(ctx.report(name, max_value("max_abs_diff", worst, 100), tol, worst <= tol))
}

fn deg(x: &PolyvectorForm) -> i32 {
    // zero elements are treated as degree −1; any sign works for them
    x.homogeneous_degree().unwrap_or(-1)
}

// ---- omega_calculus

fn omega_roundtrip(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut bad = 0usize;
    for _ in 0..100 {
        let x = rand_mixed(spec, &mut rng, &full(spec)).pruned();
        if expand_omega(&contract_omega(&x)).pruned() != x {
            bad += 1;
        }
    }
    let v = json::object(vec![("mismatches", Value::from(bad)), ("samples", Value::from(100))]);
    Ok(ctx.report(name, v, 0.0, bad == 0))
}

fn conjugation_dbar_j(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rand_mixed(spec, &mut rng, &full(spec));
        worst = worst.max(dbar_j(&x)?.max_abs_diff(&dbar_j_conjugated(&x)?)?);
    }
    let tol = 1e-12;
    Ok(ctx.report(name, max_value("max_abs_diff", worst, 100), tol, worst <= tol))
}

fn conjugation_anticommute(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rand_mixed(spec, &mut rng, &full(spec));
        let r = delta_j(&dbar_j(&x)?)?.add(&dbar_j(&delta_j(&x)?)?)?;
        worst = worst.max(r.max_abs());
    }
    let tol = 1e-12;
    Ok(ctx.report(name, max_value("max_abs", worst, 100), tol, worst <= tol))
}

fn tt_lemma(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let sup = in_band_supports(spec, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = rand_hom(spec, &mut rng, &sup[0]);
        let y = rand_mixed(spec, &mut rng, &sup[1]);
        worst = worst.max(tian_todorov_residual(&x, &y)?.max_abs());
    }
    let tol = 1e-10;
    Ok(ctx.report(name, max_value("max_abs", worst, 100), tol, worst <= tol))
}

fn tt_ker_consequence(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    let mut nontrivial = 0usize;
    for _ in 0..50 {
        let a = unit_magnitude_kernel_sample(spec, &mut rng)?;
        let y = unit_magnitude_kernel_sample(spec, &mut rng)?;
        let degrees: Vec<i32> = a.bidegrees().iter().map(|(p, q)| (p + q) as i32 - 1).collect();
        if degrees.is_empty() {
            continue;
        }
        let d = degrees[rng.random_range(0..degrees.len())];
        let x = a.project_degree(d);
        // Δ(x∧y) = (−1)^{deg x+1}[x,y] on ker Δ_J
        let lhs = delta_j(&x.wedge(&y)?)?;
        let rhs = x.bracket(&y)?.scale_re(sign(d + 1));
        if rhs.max_abs() > 1e-8 {
            nontrivial += 1;
        }
        worst = worst.max(lhs.max_abs_diff(&rhs)?);
    }
    let tol = 1e-10;
    let v = json::object(vec![
        ("max_abs_diff", num(worst)),
        ("samples", Value::from(50)),
        ("nonzero_brackets", Value::from(nontrivial)),
    ]);
    Ok(ctx.report(name, v, tol, worst <= tol))
}

// ---- hodge

fn hodge_kernel_decomposition(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let hodge = Hodge::for_spec(spec)?;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let g = unit_magnitude_kernel_sample(spec, &mut rng)?;
        let split = hodge.hodge_split(&g, 1e-10)?;
        let back = delta_j(&split.alpha)?.add(&split.harmonic)?;
        worst = worst.max(back.max_abs_diff(&g)?);
    }
    let tol = 1e-10;
    Ok(ctx.report(name, max_value("max_abs_diff", worst, 50), tol, worst <= tol))
}

fn hodge_kernel_projection(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let hodge = Hodge::for_spec(spec)?;
    let mut rng = ctx.rng(name);
    let (mut closed, mut idem, mut fixed): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..50 {
        let x = rand_mixed(spec, &mut rng, &full(spec));
        let p = hodge.project_ker(&x)?;
        closed = closed.max(delta_j(&p)?.max_abs());
        idem = idem.max(hodge.project_ker(&p)?.max_abs_diff(&p)?);
        let g = unit_magnitude_kernel_sample(spec, &mut rng)?;
        fixed = fixed.max(hodge.project_ker(&g)?.max_abs_diff(&g)?);
    }
    let v = json::object(vec![
        ("max_delta_of_projection", num(closed)),
        ("max_idempotence_diff", num(idem)),
        ("max_kernel_fixed_diff", num(fixed)),
        ("samples", Value::from(50)),
    ]);
    Ok(ctx.report(name, v, 1e-10, closed <= 1e-10 && idem <= 1e-12 && fixed <= 1e-10))
}

fn hodge_inverse_anticommutes(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let hodge = Hodge::for_spec(spec)?;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let g = delta_j(&rand_mixed(spec, &mut rng, &full(spec)))?;
        let r = hodge.delta_inverse(&dbar_j(&g)?)?.add(&dbar_j(&hodge.delta_inverse(&g)?)?)?;
        worst = worst.max(r.max_abs());
    }
    let tol = 1e-10;
    Ok(ctx.report(name, max_value("max_abs", worst, 50), tol, worst <= tol))
}

fn hodge_sample(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    let mut repeatable = true;
    for _ in 0..50 {
        let seed: u64 = rng.random();
        let g = sample_ker_delta(spec, seed, 1.0)?;
        worst = worst.max(delta_j(&g)?.max_abs());
        repeatable &= sample_ker_delta(spec, seed, 1.0)? == g;
    }
    let zero = sample_ker_delta(spec, ctx.seed, 0.0)?.is_zero();
    let tol = 1e-12;
    let v = json::object(vec![
        ("max_abs_delta", num(worst)),
        ("repeatable", Value::from(repeatable)),
        ("zero_magnitude_is_zero", Value::from(zero)),
        ("samples", Value::from(50)),
    ]);
    Ok(ctx.report(name, v, tol, worst <= tol && repeatable && zero))
}

// ---- functional: adjointness

/// Worst residuals of `lhs = s·rhs` under the stated sign and its negative,
/// each scaled by max(1, |lhs|, |rhs|), plus the number of pairs with a
/// nonzero pairing.
struct SignScan {
    stated: f64,
    opposite: f64,
    nonzero: usize,
}

impl SignScan {
    fn new() -> Self {
        SignScan { stated: 0.0, opposite: 0.0, nonzero: 0 }
    }

    fn add(&mut self, lhs: Complex64, rhs: Complex64, stated_sign: f64) {
        let scale = lhs.norm().max(rhs.norm()).max(1.0);
        self.stated = self.stated.max((lhs - rhs * stated_sign).norm() / scale);
        self.opposite = self.opposite.max((lhs + rhs * stated_sign).norm() / scale);
        if lhs.norm() > 1e-8 {
            self.nonzero += 1;
        }
    }

    fn report(&self, ctx: &Ctx, name: &str, law: &str) -> Report {
        let tol = 1e-10;
        // with K = 0 every field is constant and both sides vanish identically
        let vacuous = ctx.spec.k == 0;
        let v = json::object(vec![
            ("law", Value::from(law)),
            ("stated_sign_max_residual", num(self.stated)),
            ("opposite_sign_max_residual", num(self.opposite)),
            ("nonzero_pairs", Value::from(self.nonzero)),
            ("samples", Value::from(100)),
            ("vacuous", Value::from(vacuous)),
        ]);
        ctx.report(name, v, tol, self.stated <= tol && (self.nonzero > 0 || vacuous))
    }
}

/// α of a random degree d and β of the degree that makes the pairing reach the top,
/// given that the operator on α shifts degree by `shift`.
fn adjoint_pair(spec: TorusSpec, rng: &mut ChaCha8Rng, shift: i32) -> Option<(PolyvectorForm, PolyvectorForm, i32)> {
    let n = spec.n as i32;
    let d = random_degree(spec.n, rng);
    let e = 2 * n - 2 - (d + shift);
    if !(-1..=2 * n - 1).contains(&e) {
        return None;
    }
    let a = random_homogeneous(spec, rng, d, 4, &Support::full(spec), 3);
    let b = mirrored(spec, rng, &a, e);
    Some((a, b, d))
}

fn adjoint_dbar(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut scan = SignScan::new();
    let mut done = 0;
    while done < 100 {
        let Some((a, b, d)) = adjoint_pair(spec, &mut rng, 1) else { continue };
        done += 1;
        let lhs = pairing(&dbar_j(&a)?, &b)?;
        let rhs = pairing(&a, &dbar_j(&b)?)?;
        scan.add(lhs, rhs, sign(d + 1));
    }
    Ok(scan.report(ctx, name, "<dbar a, b> = (-1)^(deg a + 1) <a, dbar b>"))
}

fn adjoint_delta(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut scan = SignScan::new();
    let mut done = 0;
    while done < 100 {
        let Some((a, b, d)) = adjoint_pair(spec, &mut rng, -1) else { continue };
        done += 1;
        let lhs = pairing(&delta_j(&a)?, &b)?;
        let rhs = pairing(&a, &delta_j(&b)?)?;
        scan.add(lhs, rhs, sign(d));
    }
    Ok(scan.report(ctx, name, "<Delta a, b> = (-1)^(deg a) <a, Delta b>"))
}

fn adjoint_delta_inverse(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let hodge = Hodge::for_spec(spec)?;
    let mut rng = ctx.rng(name);
    let mut scan = SignScan::new();
    let mut done = 0;
    while done < 100 {
        let Some((a, b, d)) = adjoint_pair(spec, &mut rng, 1) else { continue };
        done += 1;
        // a ∈ t^{k−1}, so (−1)^k = (−1)^{deg a + 1}
        let lhs = pairing(&hodge.delta_inverse(&a)?, &b)?;
        let rhs = pairing(&a, &hodge.delta_inverse(&b)?)?;
        scan.add(lhs, rhs, sign(d + 1));
    }
    Ok(scan.report(ctx, name, "<Delta^-1 a, b> = (-1)^k <a, Delta^-1 b>, a in t^(k-1)"))
}

// ---- functional: proof reduction and first variation

fn proof_quadratic_reduction(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for _ in 0..25 {
        let g = unit_magnitude_kernel_sample(spec, &mut rng)?;
        let (lhs, rhs) = quadratic_reduction(&g)?;
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        largest = largest.max(lhs.norm());
    }
    let tol = 1e-10;
    let v = json::object(vec![
        ("max_scaled_diff", num(worst)),
        ("max_abs_lhs", num(largest)),
        ("samples", Value::from(25)),
    ]);
    Ok(ctx.report(name, v, tol, worst <= tol))
}

fn complex_list(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|z| json::complex(*z)).collect())
}

fn variation_closed_form(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let tol = 1e-8;
    let mut worst_rel: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    let mut failures = 0usize;
    let mut at_noise = 0usize;
    let mut worst_terms = Value::Null;
    // per displayed term: largest |term| seen, to show every term is exercised
    let mut term_peak = [0.0f64; 5];
    for _ in 0..50 {
        let g = unit_magnitude_kernel_sample(spec, &mut rng)?;
        let b = unit_magnitude_kernel_sample(spec, &mut rng)?;
        let r = variation_report(&g, &b)?;
        for (p, t) in term_peak.iter_mut().zip(&r.terms) {
            *p = p.max(t.norm());
        }
        worst_abs = worst_abs.max(r.abs_err);
        if r.rel_err >= worst_rel {
            worst_rel = r.rel_err;
            worst_terms = json::object(vec![
                ("closed_form_terms", complex_list(&r.terms)),
                ("closed_form_quadratic", json::complex(r.quadratic.0)),
                ("oracle_quadratic", json::complex(r.quadratic.1)),
                ("closed_form_cubic", json::complex(r.cubic.0)),
                ("oracle_cubic", json::complex(r.cubic.1)),
                ("noise_floor", num(r.noise_floor)),
            ]);
        }
        // an exactly vanishing variation only shows up as rounding noise in the oracle
        if r.rel_err > tol {
            if r.abs_err <= r.noise_floor {
                at_noise += 1;
            } else {
                failures += 1;
            }
        }
    }
    let v = json::object(vec![
        ("max_rel_err", num(worst_rel)),
        ("max_abs_err", num(worst_abs)),
        ("pairs_failing_only_below_noise_floor", Value::from(at_noise)),
        ("failures", Value::from(failures)),
        ("samples", Value::from(50)),
        ("term_peaks", Value::Array(term_peak.iter().map(|x| num(*x)).collect())),
        ("worst_pair", worst_terms),
    ]);
    Ok(ctx.report(name, v, tol, failures == 0))
}

/// Directions outside ker Δ_J: the closed form against the derivative of
/// Φ's formula along the line. Reported, not required to agree.
fn variation_off_kernel(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let mut worst_rel: f64 = 0.0;
    let mut agree = 0usize;
    let mut off = 0usize;
    for _ in 0..20 {
        let g = unit_magnitude_kernel_sample(spec, &mut rng)?;
        let b = rand_dense(spec, &mut rng);
        if delta_j(&b)?.max_abs() > 1e-9 {
            off += 1;
        }
        let cf = first_variation(&g, &b)?;
        let or = variation_oracle_any_direction(&g, &b)?;
        let rel = (cf - or).norm() / cf.norm().max(or.norm()).max(1e-300);
        if rel <= 1e-8 {
            agree += 1;
        }
        worst_rel = worst_rel.max(rel);
    }
    let v = json::object(vec![
        ("diagnostic", Value::from(true)),
        ("directions_off_kernel", Value::from(off)),
        ("agreeing_pairs", Value::from(agree)),
        ("max_rel_err", num(worst_rel)),
        ("samples", Value::from(20)),
    ]);
    Ok(ctx.report(name, v, 1e-8, true))
}

/// Change of the quadratic term when Δ⁻¹γ is shifted by an element of ker Δ_J.
fn variation_gauge(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let hodge = Hodge::for_spec(spec)?;
    let mut rng = ctx.rng(name);
    let mut worst: f64 = 0.0;
    let mut control: f64 = 0.0;
    for _ in 0..10 {
        let g = unit_magnitude_kernel_sample(spec, &mut rng)?;
        let k = unit_magnitude_kernel_sample(spec, &mut rng)?;
        let pre = hodge.delta_inverse(&g)?;
        let base = pairing(&dbar_j(&pre)?, &g)? * -0.5;
        let moved = pairing(&dbar_j(&pre.add(&k)?)?, &g)? * -0.5;
        worst = worst.max((moved - base).norm());
        // the same shift by a generic element, to show the measurement can move
        let other = rand_dense(spec, &mut rng);
        let shifted = pairing(&dbar_j(&pre.add(&other)?)?, &g)? * -0.5;
        control = control.max((shifted - base).norm());
    }
    let v = json::object(vec![
        ("diagnostic", Value::from(true)),
        ("max_abs_change", num(worst)),
        ("max_abs_change_generic_shift", num(control)),
        ("samples", Value::from(10)),
    ]);
    Ok(ctx.report(name, v, 0.0, true))
}

// ---- search

fn search_gradient(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let g = sample_ker_delta(spec, rng.random(), 0.5)?;
    let grad = gradient(&g, None)?;
    let tol = 1e-10;
    let mut worst: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..20 {
        let b = unit_magnitude_kernel_sample(spec, &mut rng)?;
        let mut riesz = Complex64::new(0.0, 0.0);
        for (l, f) in grad.terms() {
            if let Some(h) = b.get(l) {
                riesz += f.coeffs().iter().zip(h.coeffs()).map(|(x, y)| x.conj() * y).sum::<Complex64>();
            }
        }
        let r = variation_report(&g, &b)?;
        let err = (riesz - r.oracle).norm();
        // |Σ conj(g)·β| ≤ ‖g‖‖β‖; a vanishing variation leaves only oracle rounding
        let denom = grad.norm() * b.norm();
        let scaled = if denom > 0.0 { err / denom } else { err * f64::INFINITY };
        if denom > 0.0 {
            worst = worst.max(scaled);
        }
        worst_abs = worst_abs.max(err);
        if scaled > tol && err > r.noise_floor {
            failures += 1;
        }
    }
    let v = json::object(vec![
        ("max_err_over_norm_product", num(worst)),
        ("max_abs_err", num(worst_abs)),
        ("failures", Value::from(failures)),
        ("gradient_norm", num(grad.norm())),
        ("samples", Value::from(20)),
    ]);
    Ok(ctx.report(name, v, tol, failures == 0))
}

fn search_iterates(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let start = sample_ker_delta(spec, rng.random(), 0.05)?;
    let cfg = SearchConfig { max_iters: 14, tol: 1e-12, seed: ctx.seed, ..SearchConfig::default() };
    let mut feas: f64 = 0.0;
    let mut rises = 0usize;
    let mut last = f64::INFINITY;
    let mut steps = 0usize;
    let r = find_critical_point_traced(&cfg, &start, |x, gnorm| {
        feas = feas.max(delta_j(x).map(|d| d.max_abs()).unwrap_or(f64::INFINITY));
        if gnorm > last {
            rises += 1;
        }
        last = gnorm;
        steps += 1;
    })?;
    let again = find_critical_point(&cfg, &start)?;
    let same = json::to_string(&r.to_json()) == json::to_string(&again.to_json());
    let zero = find_critical_point(&cfg, &PolyvectorForm::zero(spec))?;
    let zero_ok = zero.converged && zero.iters == 0 && zero.residual_norm == 0.0;
    let v = json::object(vec![
        ("max_abs_delta_of_iterates", num(feas)),
        ("gradient_increases", Value::from(rises)),
        ("observed_iterates", Value::from(steps)),
        ("repeatable", Value::from(same)),
        ("zero_start_converges", Value::from(zero_ok)),
    ]);
    Ok(ctx.report(name, v, 1e-10, feas <= 1e-10 && rises == 0 && same && zero_ok))
}

// ---- three-fold checks: Euler-Lagrange adjudication and the BCOV restriction

/// The three-fold desk spec used by the checks that need n = 3.
fn threefold() -> Result<TorusSpec> {
    TorusSpec::new(3, 1)
}

/// Points analysed against the spanning-set oracle; the oracle is the slow part.
const ORACLE_POINTS: usize = 6;
const STATIONARY_TOL: f64 = 1e-6;

/// A search from one start of the family, with its EL residuals and, for the
/// first few converged points, the largest oracle variation over the spanning set.
#[derive(Clone)]
struct FamilyPoint {
    start: usize,
    gamma: PolyvectorForm,
    gradient_norm: f64,
    converged: bool,
    statement: f64,
    proof: f64,
    oracle: Option<f64>,
}

impl FamilyPoint {
    fn to_json(&self) -> Value {
        json::object(vec![
            ("start", Value::from(self.start)),
            ("converged", Value::from(self.converged)),
            ("gradient_norm", num(self.gradient_norm)),
            ("statement_residual", num(self.statement)),
            ("proof_residual", num(self.proof)),
            ("max_abs_oracle", self.oracle.map(num).unwrap_or(Value::Null)),
        ])
    }
}

const FAMILY_ROLES: [(usize, usize, usize); 6] = [(1, 2, 3), (2, 3, 1), (3, 1, 2), (1, 3, 2), (2, 1, 3), (3, 2, 1)];
const FAMILY_FREQS: [(i32, i32); 2] = [(1, 0), (0, 1)];

fn bcov_search_config(seed: u64) -> SearchConfig {
    SearchConfig {
        max_iters: 300,
        tol: 1e-8,
        seed,
        degree_restriction: Some(BCOV.to_vec()),
        ..SearchConfig::default()
    }
}

/// Searches from small nonconstant perturbations of exact Maurer-Cartan seeds.
/// Shared by the three checks below, computed once per seed.
fn family_points(seed: u64) -> Result<Arc<Vec<FamilyPoint>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<FamilyPoint>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&seed) {
        return Ok(v.clone());
    }
    let spec = threefold()?;
    let cfg = bcov_search_config(seed);
    let labels = BasisLabel::with_bidegree(3, 1, 1);
    let span = bcov_spanning_set(spec)?;
    let mut out = Vec::new();
    let mut idx = 0;
    let mut with_oracle = 0;
    for freq in FAMILY_FREQS {
        for roles in FAMILY_ROLES {
            let base = mc_seed(spec, roles, freq, c(0.3))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(idx as u64));
            let axis = roles.2 - 1;
            let sup = Support { coords: vec![axis, axis + 3], radius: 1 };
            let pert = project_feasible(&random_element(spec, &mut rng, &labels, &sup, 3), Some(&BCOV))?;
            let pert = pert.sub(&harmonic_projection(&pert))?;
            let start = if pert.norm() > 0.0 { base.add(&pert.scale_re(1e-3 / pert.norm()))? } else { base };
            let r = find_critical_point(&cfg, &start)?;
            let oracle = if r.converged && with_oracle < ORACLE_POINTS {
                with_oracle += 1;
                Some(max_oracle(&r.gamma, &span)?)
            } else {
                None
            };
            out.push(FamilyPoint {
                start: idx,
                statement: el_residual_norm(&r.gamma, Variant::Statement, Some(&BCOV))?,
                proof: el_residual_norm(&r.gamma, Variant::Proof, Some(&BCOV))?,
                gamma: r.gamma,
                gradient_norm: r.residual_norm,
                converged: r.converged,
                oracle,
            });
            idx += 1;
        }
    }
    let out = Arc::new(out);
    cache.lock().unwrap().insert(seed, out.clone());
    Ok(out)
}

/// Feasible directions spanning the (1,1) part of ker Δ_J: the kernel
/// projection of every (1,1) label at every frequency.
fn bcov_spanning_set(spec: TorusSpec) -> Result<Vec<PolyvectorForm>> {
    let hodge = Hodge::for_spec(spec)?;
    let labels = BasisLabel::with_bidegree(3, 1, 1);
    let mut out = Vec::new();
    for k in 0..spec.mode_count() {
        let freq = spec.freq_at(k);
        for l in &labels {
            let e = PolyvectorForm::monomial(*l, FourierScalar::mode(spec, &freq, c(1.0))?);
            let b = hodge.project_ker(&e)?.pruned();
            if b.norm() > 1e-12 {
                out.push(b);
            }
        }
    }
    Ok(out)
}

fn max_oracle(g: &PolyvectorForm, dirs: &[PolyvectorForm]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in dirs {
        worst = worst.max(variation_oracle(g, b)?.norm());
    }
    Ok(worst)
}

fn el_adjudication(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = threefold()?;
    let tol = STATIONARY_TOL;
    let points = family_points(ctx.seed)?;
    let checked: Vec<&FamilyPoint> = points.iter().filter(|p| p.oracle.is_some()).collect();
    let holds = |res: fn(&FamilyPoint) -> f64| {
        checked.iter().all(|p| p.oracle.unwrap() <= tol && res(p) <= tol)
    };
    let endorsed: Vec<&str> = [(holds(|p| p.statement), Variant::Statement), (holds(|p| p.proof), Variant::Proof)]
        .iter()
        .filter(|(ok, _)| *ok)
        .map(|(_, v)| v.name())
        .collect();
    let pass = checked.len() >= 5 && endorsed.len() == 1;
    let v = json::object(vec![
        ("endorsed", if endorsed.len() == 1 { Value::from(endorsed[0]) } else { Value::Null }),
        ("variants_vanishing_at_every_point", Value::Array(endorsed.iter().map(|s| Value::from(*s)).collect())),
        ("searches", Value::from(points.len())),
        ("oracle_checked_points", Value::from(checked.len())),
        ("points", Value::Array(points.iter().map(FamilyPoint::to_json).collect())),
    ]);
    Ok(Report::new(name, spec, ctx.seed, v, tol, pass))
}

/// Statement-variant residual against stationarity, both ways: on (1,1)
/// constants, where every bracket and ∂̄ term vanishes, and on the search points.
fn el_stationarity_equivalence(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = threefold()?;
    let mut rng = ctx.rng(name);
    let labels = BasisLabel::with_bidegree(3, 1, 1);
    // on constants δΦ only sees constant directions
    let constant_dirs: Vec<PolyvectorForm> = labels
        .iter()
        .map(|l| PolyvectorForm::monomial(*l, FourierScalar::constant(spec, c(1.0))))
        .collect();
    let mut rows = Vec::new();
    let mut forward = true;
    let mut backward = true;
    for _ in 0..5 {
        let g = random_element(spec, &mut rng, &labels, &Support::constant(), 1);
        let stmt = el_residual_norm(&g, Variant::Statement, Some(&BCOV))?;
        let oracle = max_oracle(&g, &constant_dirs)?;
        forward &= !(stmt <= 1e-8 && oracle > STATIONARY_TOL);
        backward &= !(oracle <= STATIONARY_TOL && stmt > 1e-8);
        rows.push(json::object(vec![
            ("statement_residual", num(stmt)),
            ("max_abs_oracle", num(oracle)),
        ]));
    }
    for p in family_points(ctx.seed)?.iter() {
        let Some(oracle) = p.oracle else { continue };
        forward &= !(p.statement <= 1e-8 && oracle > STATIONARY_TOL);
        backward &= !(oracle <= STATIONARY_TOL && p.statement > 1e-8);
    }
    let v = json::object(vec![
        ("variant", Value::from(Variant::Statement.name())),
        ("constants", Value::Array(rows)),
        ("residual_zero_implies_stationary", Value::from(forward)),
        ("stationary_implies_residual_zero", Value::from(backward)),
    ]);
    Ok(Report::new(name, spec, ctx.seed, v, STATIONARY_TOL, forward && backward))
}

fn mc_bcov(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = threefold()?;
    let tol = 1e-6;
    let mut rng = ctx.rng(name);
    let mut rows = Vec::new();
    let mut pass = true;
    let mut converged = 0usize;
    for p in family_points(ctx.seed)?.iter().filter(|p| p.converged) {
        let mc = mc_residual(&p.gamma)?.max_abs();
        pass &= mc <= tol;
        converged += 1;
        rows.push(json::object(vec![("start", Value::from(p.start)), ("mc_residual", num(mc))]));
    }
    let cfg = bcov_search_config(ctx.seed);
    let mut small = Vec::new();
    for _ in 0..3 {
        let start = project_feasible(&sample_ker_delta(spec, rng.random(), 1e-3)?, Some(&BCOV))?;
        let r = find_critical_point(&cfg, &start)?;
        let mc = mc_residual(&r.gamma)?.max_abs();
        if r.converged {
            pass &= mc <= tol;
            converged += 1;
        }
        small.push(json::object(vec![
            ("converged", Value::from(r.converged)),
            ("gradient_norm", num(r.residual_norm)),
            ("mc_residual", num(mc)),
        ]));
    }
    let labels = BasisLabel::with_bidegree(3, 1, 1);
    let mut constants_exact = true;
    for _ in 0..5 {
        let g = random_element(spec, &mut rng, &labels, &Support::constant(), 1);
        constants_exact &= mc_residual(&g)?.max_abs() == 0.0;
    }
    pass &= constants_exact && converged > 0;
    let v = json::object(vec![
        ("perturbed_seed_points", Value::Array(rows)),
        ("small_random_starts", Value::Array(small)),
        ("converged_points_checked", Value::from(converged)),
        ("constants_exact", Value::from(constants_exact)),
    ]);
    Ok(Report::new(name, spec, ctx.seed, v, tol, pass))
}

// ---- power series

/// 𝚽 coefficients 0..=m from the untruncated polynomial t ↦ 𝚽(t): sample it at
/// the N-th roots of unity, N above its degree 3m, and invert the DFT.
/// Also returns the largest sample, which bounds every coefficient.
fn powerseries_by_substitution(gh: &TPolynomial, al: &TPolynomial) -> Result<(Vec<Complex64>, f64)> {
    let m = gh.order();
    let nn = 3 * m + 1;
    let root = |k: usize| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k % nn) as f64 / nn as f64);
    let samples: Vec<Complex64> = (0..nn).map(|j| phi_extended(gh, al, root(j))).collect::<Result<_>>()?;
    let coeffs = (0..=m)
        .map(|a| samples.iter().enumerate().map(|(j, s)| s * root(a * j).conj()).sum::<Complex64>() / nn as f64)
        .collect();
    Ok((coeffs, samples.iter().map(|s| s.norm()).fold(0.0, f64::max)))
}

fn powerseries_oracle(ctx: &Ctx, name: &str) -> Result<Report> {
    let spec = ctx.spec;
    let mut rng = ctx.rng(name);
    let tol = 1e-8;
    let mut worst: f64 = 0.0;
    let mut nonzero = 0usize;
    for i in 0..10 {
        let m = 1 + i % 4;
        let mut gh = Vec::new();
        let mut al = Vec::new();
        for _ in 0..=m {
            gh.push(rand_dense(spec, &mut rng).scale_re(0.5));
            al.push(rand_dense(spec, &mut rng).scale_re(0.5));
        }
        let gh = TPolynomial::new(spec, gh)?;
        let al = TPolynomial::new(spec, al)?;
        let got = phi_powerseries(&gh, &al)?;
        let (want, peak) = powerseries_by_substitution(&gh, &al)?;
        // when 𝚽(t) vanishes identically its samples are pure rounding, so
        // measure against the size of the inputs as well
        let mut size = 0.0;
        for (g, a) in gh.coeffs.iter().zip(&al.coeffs) {
            size += g.norm() + a.norm() + dbar_j(a)?.norm() + delta_j(a)?.norm();
        }
        let scale = peak.max(size * size + size * size * size).max(f64::MIN_POSITIVE);
        nonzero += want.iter().filter(|z| z.norm() > 1e-8 * scale).count();
        let diff = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(diff / scale);
    }
    let v = json::object(vec![
        ("max_rel_err", num(worst)),
        ("nonzero_coefficients", Value::from(nonzero)),
        ("samples", Value::from(10)),
    ]);
    Ok(ctx.report(name, v, tol, worst <= tol && nonzero > 0))
}
