//! Critical points of Φ over ker Δ_J by descent on ‖gradient‖².

use num_complex::Complex64;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exterior::{wedge_label, BasisLabel, PolyvectorForm};
use crate::functional::{el_residual_norm, mc_residual, phi, top_factor, variation_density, Variant};
use crate::hodge::Hodge;
use crate::json;
use crate::torus_field::{FourierScalar, Freq, TorusSpec};

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;
const NEWTON_ITERS: usize = 150;
const NEWTON_RTOL: f64 = 1e-6;
const NEWTON_HALVINGS: usize = 8;
const STALL_WINDOW: usize = 10;
const STALL_FACTOR: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub max_iters: usize,
    pub step: f64,
    pub tol: f64,
    pub seed: u64,
    pub degree_restriction: Option<Vec<(usize, usize)>>,
    pub variant: Variant,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_iters: 500,
            step: 1.0,
            tol: 1e-9,
            seed: 0,
            degree_restriction: None,
            variant: Variant::Statement,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::Invalid("search needs step > 0, tol > 0, max_iters >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub gamma: PolyvectorForm,
    pub residual_norm: f64,
    pub iters: usize,
    pub converged: bool,
    pub phi_value: Complex64,
    /// max-abs EL residual of the configured variant, over the restricted bidegrees
    pub el_residual: f64,
}

impl SearchResult {
    pub fn to_json(&self) -> Value {
        json::object(vec![
            ("gamma", json::form_to_json(&self.gamma)),
            ("residual_norm", json::num(self.residual_norm)),
            ("iters", Value::from(self.iters)),
            ("converged", Value::from(self.converged)),
            ("phi_value", json::complex(self.phi_value)),
            ("el_residual", json::num(self.el_residual)),
        ])
    }
}

/// Project onto ker Δ_J and, if given, onto the listed bidegrees.
pub fn project_feasible(x: &PolyvectorForm, restriction: Option<&[(usize, usize)]>) -> Result<PolyvectorForm> {
    let x = match restriction {
        Some(r) => x.restrict(r),
        None => x.clone(),
    };
    Hodge::for_spec(x.spec())?.project_ker(&x)
}

/// Riesz representative g of β ↦ δΦ_γ[β] on the feasible set:
/// Σ conj(g)·β = δΦ_γ[β] for every feasible β.
pub fn gradient(g: &PolyvectorForm, restriction: Option<&[(usize, usize)]>) -> Result<PolyvectorForm> {
    let spec = g.spec();
    let n = spec.n;
    let v = variation_density(g)?;
    let tf = top_factor(n);
    let mut r = PolyvectorForm::zero(spec);
    for (l, f) in v.terms() {
        // δΦ[β] = tf · Σ_L s(L, Lᶜ) Σ_k β_L(k) V_{Lᶜ}(−k)
        let lc = BasisLabel::new(l.i.complement(n), l.j.complement(n));
        let (_, s) = wedge_label(lc, *l).expect("complementary labels are disjoint");
        *r.entry(lc) = f.conj().scale((tf * s).conj());
    }
    project_feasible(&r, restriction)
}

/// Exact degree-1 Maurer-Cartan element for n ≥ 3:
/// amp·e^{2πi(a x_k + b y_k)}·dz̄^i⊗∂_j + c·dz̄^k⊗∂_k, with the constant c
/// solved so that ∂̄_J γ + ½[γ,γ] = 0. i, j, k distinct; (a,b) ≠ 0 within the cutoff.
pub fn mc_seed(spec: TorusSpec, (i, j, k): (usize, usize, usize), (a, b): (i32, i32), amp: Complex64) -> Result<PolyvectorForm> {
    let n = spec.n;
    if i == j || j == k || i == k || [i, j, k].iter().any(|&x| x == 0 || x > n) {
        return Err(Error::Invalid(format!("roles ({i},{j},{k}) must be distinct axes in 1..={n}")));
    }
    if (a, b) == (0, 0) {
        return Err(Error::Invalid("the field needs a nonzero frequency".into()));
    }
    let mut fa = vec![0; n];
    let mut fb = vec![0; n];
    fa[k - 1] = a;
    fb[k - 1] = b;
    let f = FourierScalar::mode(spec, &Freq::new(fa, fb), amp)?;
    let x = PolyvectorForm::monomial(BasisLabel::from_indices(&[i], &[j], n)?, f);
    let y = PolyvectorForm::monomial(
        BasisLabel::from_indices(&[k], &[k], n)?,
        FourierScalar::constant(spec, Complex64::new(1.0, 0.0)),
    );
    // the residual is affine in c because y brackets trivially with itself
    let r0 = mc_residual(&x)?;
    let r1 = mc_residual(&x.add(&y)?)?.sub(&r0)?;
    let den = real_dot(&r1, &r1);
    if den == 0.0 {
        return Err(Error::Invalid("no constant balances this field".into()));
    }
    let num: Complex64 = r1
        .terms()
        .iter()
        .filter_map(|(l, f)| r0.get(l).map(|g| f.coeffs().iter().zip(g.coeffs()).map(|(p, q)| p.conj() * q).sum::<Complex64>()))
        .sum();
    x.add(&y.scale(-num / den))
}

/// Re Σ conj(a)·b over all labels and modes.
fn real_dot(a: &PolyvectorForm, b: &PolyvectorForm) -> f64 {
    let mut acc = 0.0;
    for (l, f) in a.terms() {
        if let Some(g) = b.get(l) {
            acc += f.coeffs().iter().zip(g.coeffs()).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
        }
    }
    acc
}

/// Descent with Armijo backtracking on F = ‖gradient‖².
pub fn find_critical_point(cfg: &SearchConfig, start: &PolyvectorForm) -> Result<SearchResult> {
    find_critical_point_traced(cfg, start, |_, _| {})
}

/// As [`find_critical_point`], calling `observe(iterate, ‖gradient‖)` on the
/// start and after every accepted step.
///
/// Steps go along −∇F/2 = −Hg (H the Hessian of Re Φ on the feasible space)
/// with a Barzilai-Borwein trial step. When ten such steps fail to cut F by
/// 4x, Newton directions H d = −g (MINRES, inside a trust radius) take over
/// for as long as each halves F; they are descent directions for F whenever
/// their slope is negative.
pub fn find_critical_point_traced<O>(cfg: &SearchConfig, start: &PolyvectorForm, mut observe: O) -> Result<SearchResult>
where
    O: FnMut(&PolyvectorForm, f64),
{
    cfg.validate()?;
    let restriction = cfg.degree_restriction.as_deref();
    let grad = |x: &PolyvectorForm| gradient(x, restriction);
    let mut x = project_feasible(start, restriction)?;
    let mut g = grad(&x)?;
    let mut f = g.norm().powi(2);
    let mut step = cfg.step;
    let mut iters = 0;
    let finite = |v: f64, iter: usize| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(Error::NumericFailure { iter, msg: "non-finite objective".into() })
        }
    };
    finite(f, 0)?;
    observe(&x, f.sqrt());
    // previous iterate and descent direction, for the Barzilai-Borwein trial step
    let mut prev: Option<(PolyvectorForm, PolyvectorForm)> = None;
    // trust radius for the Newton direction
    let mut radius = f64::INFINITY;
    let mut newton = false;
    // (iteration, F) at the start of the current run of gradient steps
    let mut window = (0, f);
    while f.sqrt() > cfg.tol && iters < cfg.max_iters {
        iters += 1;
        // g is quadratic in x, so the central difference is the exact Hessian product
        let hess = |x: &PolyvectorForm, v: &PolyvectorForm| -> Result<PolyvectorForm> {
            let mut up = x.clone();
            up.axpy(Complex64::new(1.0, 0.0), v)?;
            let mut dn = x.clone();
            dn.axpy(Complex64::new(-1.0, 0.0), v)?;
            Ok(grad(&up)?.sub(&grad(&dn)?)?.scale_re(0.5))
        };
        let q = hess(&x, &g)?;
        let slope = -2.0 * q.norm().powi(2);
        finite(slope, iters)?;
        if slope == 0.0 {
            break;
        }

        let mut accepted = false;
        if newton {
            let f0 = f;
            let d = minres(|v| hess(&x, &project_feasible(v, restriction)?), &g.scale_re(-1.0), NEWTON_ITERS, NEWTON_RTOL, radius)?;
            // Krylov sums drift off the feasible set by rounding
            let d = project_feasible(&d, restriction)?;
            let nslope = 2.0 * real_dot(&q, &d);
            if nslope < 0.0 && nslope.is_finite() {
                let mut t = 1.0;
                for _ in 0..NEWTON_HALVINGS {
                    let mut trial = x.clone();
                    trial.axpy(Complex64::new(t, 0.0), &d)?;
                    let tg = grad(&trial)?;
                    let tf = tg.norm().powi(2);
                    finite(tf, iters)?;
                    if tf <= f + ARMIJO * t * nslope {
                        radius = if t == 1.0 { 2.0 * radius } else { t * d.norm() };
                        prev = None;
                        x = trial;
                        g = tg;
                        f = tf;
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
            }
            if !accepted {
                radius = 0.25 * d.norm().min(radius);
            }
            // keep Newton only while it at least halves F
            if !accepted || f > 0.5 * f0 {
                newton = false;
                window = (iters, f);
            }
        }
        if !accepted {
            if let Some((px, pq)) = &prev {
                let s = x.sub(px)?;
                let y = q.sub(pq)?;
                let sy = real_dot(&s, &y);
                if sy > 0.0 {
                    step = s.norm().powi(2) / sy;
                }
            }
            while step >= MIN_STEP {
                let mut trial = x.clone();
                trial.axpy(Complex64::new(-step, 0.0), &q)?;
                let tg = grad(&trial)?;
                let tf = tg.norm().powi(2);
                finite(tf, iters)?;
                if tf <= f + ARMIJO * step * slope {
                    prev = Some((std::mem::replace(&mut x, trial), q));
                    g = tg;
                    f = tf;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            step *= 2.0;
            // switch to Newton when a window of gradient steps barely moved F
            if accepted && iters - window.0 >= STALL_WINDOW {
                newton = f > STALL_FACTOR * window.1;
                window = (iters, f);
            }
        }
        if !accepted {
            break;
        }
        observe(&x, f.sqrt());
    }
    let residual_norm = f.sqrt();
    let phi_value = phi(&x)?;
    if !phi_value.re.is_finite() || !phi_value.im.is_finite() {
        return Err(Error::NumericFailure { iter: iters, msg: "non-finite functional value".into() });
    }
    let el_residual = el_residual_norm(&x, cfg.variant, restriction)?;
    Ok(SearchResult { gamma: x, residual_norm, iters, converged: residual_norm <= cfg.tol, phi_value, el_residual })
}

/// MINRES for a real-symmetric operator under Re Σ conj(a)·b, started at 0.
/// Stops after `maxit` products, when the residual drops below `rtol`·‖b‖, or
/// before the iterate leaves the ball of radius `max_norm`.
fn minres<A>(op: A, b: &PolyvectorForm, maxit: usize, rtol: f64, max_norm: f64) -> Result<PolyvectorForm>
where
    A: Fn(&PolyvectorForm) -> Result<PolyvectorForm>,
{
    let spec = b.spec();
    let mut x = PolyvectorForm::zero(spec);
    let beta1 = b.norm();
    if beta1 == 0.0 {
        return Ok(x);
    }
    let (mut r1, mut r2, mut y) = (b.clone(), b.clone(), b.clone());
    let (mut oldb, mut beta, mut dbar, mut epsln, mut phibar) = (0.0, beta1, 0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0, 0.0);
    let (mut w, mut w2) = (PolyvectorForm::zero(spec), PolyvectorForm::zero(spec));
    for itn in 0..maxit {
        let v = y.scale_re(1.0 / beta);
        y = op(&v)?;
        if itn > 0 {
            y.axpy(Complex64::new(-beta / oldb, 0.0), &r1)?;
        }
        let alfa = real_dot(&v, &y);
        y.axpy(Complex64::new(-alfa / beta, 0.0), &r2)?;
        r1 = std::mem::replace(&mut r2, y.clone());
        oldb = beta;
        beta = y.norm();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w);
        let mut next = v;
        next.axpy(Complex64::new(-oldeps, 0.0), &w1)?;
        next.axpy(Complex64::new(-delta, 0.0), &w2)?;
        w = next.scale_re(1.0 / gamma);
        let mut next = x.clone();
        next.axpy(Complex64::new(phi, 0.0), &w)?;
        let norm = next.norm();
        if norm > max_norm {
            if itn == 0 {
                x = next.scale_re(max_norm / norm);
            }
            break;
        }
        x = next;
        if !phibar.is_finite() || phibar <= rtol * beta1 || beta == 0.0 {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_critical() {
        let spec = TorusSpec::new(2, 1).unwrap();
        let r = find_critical_point(&SearchConfig::default(), &PolyvectorForm::zero(spec)).unwrap();
        assert!(r.converged);
        assert_eq!(r.iters, 0);
        assert_eq!(r.residual_norm, 0.0);
        assert_eq!(r.phi_value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn bad_config_is_rejected() {
        let spec = TorusSpec::new(1, 0).unwrap();
        let cfg = SearchConfig { step: 0.0, ..SearchConfig::default() };
        assert!(find_critical_point(&cfg, &PolyvectorForm::zero(spec)).is_err());
    }

    #[test]
    fn n1_constant_gradient_vanishes() {
        let spec = TorusSpec::new(1, 1).unwrap();
        let x = PolyvectorForm::monomial(
            BasisLabel::from_indices(&[1], &[1], 1).unwrap(),
            FourierScalar::constant(spec, Complex64::new(0.3, 0.1)),
        );
        assert!(gradient(&x, None).unwrap().is_zero());
    }

    #[test]
    fn mc_seeds_solve_maurer_cartan() {
        let spec = TorusSpec::new(3, 1).unwrap();
        for (roles, freq) in [((1, 2, 3), (1, 0)), ((2, 3, 1), (0, 1)), ((3, 1, 2), (1, -1))] {
            let g = mc_seed(spec, roles, freq, Complex64::new(0.3, 0.1)).unwrap();
            assert!(mc_residual(&g).unwrap().max_abs() < 1e-14);
            assert!(gradient(&g, Some(&[(1, 1)])).unwrap().norm() < 1e-12);
        }
        assert!(mc_seed(spec, (1, 1, 2), (1, 0), Complex64::new(1.0, 0.0)).is_err());
    }
}
