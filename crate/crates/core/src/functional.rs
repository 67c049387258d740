//! Integration, the pairing, the functional Φ on ker Δ_J, its first variation,
//! Euler-Lagrange and Maurer-Cartan residuals, and the power-series extension.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exterior::{parity, wedge_label, BasisLabel, MultiIndex, PolyvectorForm};
use crate::hodge::{Hodge, HodgeSplit};
use crate::omega::{contract_label, dbar_j, delta_j};
use crate::torus_field::TorusSpec;

/// Tolerance on ‖Δ_J γ‖_max (relative to max(1, ‖γ‖_max)) for membership in ker Δ_J.
pub const DOMAIN_TOL: f64 = 1e-9;

/// Relative rounding level of a Φ evaluation, against (‖γ‖ + 2‖β‖)² + (‖γ‖ + 2‖β‖)³.
const NOISE: f64 = 64.0 * f64::EPSILON;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Constant relating the zero mode of the top label to ∫γ:
/// contraction sign, `dz̄^{1..n} ∧ dz^{1..n}` reordering, and dz∧dz̄ = −2i dx∧dy.
pub fn top_factor(n: usize) -> Complex64 {
    let top = BasisLabel::new(MultiIndex::full(n), MultiIndex::full(n));
    let (_, s) = contract_label(n, top);
    let s = s * parity(n * n) * parity(n * (n - 1) / 2);
    Complex64::new(0.0, -2.0).powu(n as u32) * s
}

/// ∫γ = ∫_X (γ ⊢ Ω) ∧ Ω; only the (n,n) label contributes.
pub fn integrate(x: &PolyvectorForm) -> Complex64 {
    let n = x.spec().n;
    let top = BasisLabel::new(MultiIndex::full(n), MultiIndex::full(n));
    match x.get(&top) {
        Some(f) => f.zero_mode() * top_factor(n),
        None => Complex64::new(0.0, 0.0),
    }
}

/// ⟨x, y⟩ = ∫ x∧y, summing only the label pairs and modes that reach the top.
pub fn pairing(x: &PolyvectorForm, y: &PolyvectorForm) -> Result<Complex64> {
    if x.spec() != y.spec() {
        return Err(Error::SpecMismatch(format!("{:?} vs {:?}", x.spec(), y.spec())));
    }
    let spec = x.spec();
    let n = spec.n;
    let full = MultiIndex::full(n);
    let m = spec.mode_count();
    let mut total = Complex64::new(0.0, 0.0);
    for (l, f) in x.terms() {
        let r = BasisLabel::new(l.i.complement(n), l.j.complement(n));
        let Some(g) = y.get(&r) else { continue };
        let (lab, s) = wedge_label(*l, r).expect("complementary labels are disjoint");
        debug_assert_eq!(lab, BasisLabel::new(full, full));
        let fc = f.coeffs();
        let gc = g.coeffs();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..m {
            acc += fc[k] * gc[m - 1 - k];
        }
        total += acc * s;
    }
    Ok(total * top_factor(n))
}

fn check_domain(g: &PolyvectorForm) -> Result<()> {
    let residual = delta_j(g)?.max_abs();
    if residual > DOMAIN_TOL * g.max_abs().max(1.0) {
        return Err(Error::Domain { residual });
    }
    Ok(())
}

/// Σ_a (−1)^a γ_a over shifted degrees a.
pub fn alternate(g: &PolyvectorForm) -> PolyvectorForm {
    let mut out = PolyvectorForm::zero(g.spec());
    for (l, f) in g.terms() {
        *out.entry(*l) = if l.degree().rem_euclid(2) == 0 { f.clone() } else { f.scale(c(-1.0)) };
    }
    out
}

/// Quadratic and cubic parts of Φ, without the domain check.
pub fn phi_parts(g: &PolyvectorForm) -> Result<(Complex64, Complex64)> {
    let hodge = Hodge::for_spec(g.spec())?;
    let quad = pairing(&dbar_j(&hodge.delta_inverse(g)?)?, g)? * -0.5;
    let cubic = pairing(&g.self_wedge_weighted(|_, _| 1.0), g)? / 6.0;
    Ok((quad, cubic))
}

/// Φ(γ) = ∫ −½ ∂̄_J Δ_J⁻¹ γ ∧ γ + (1/6) γ∧γ∧γ on ker Δ_J.
pub fn phi(g: &PolyvectorForm) -> Result<Complex64> {
    check_domain(g)?;
    let (q, k) = phi_parts(g)?;
    Ok(q + k)
}

/// Individual terms of the closed-form first variation, in display order.
pub fn first_variation_terms(g: &PolyvectorForm, dir: &PolyvectorForm) -> Result<[Complex64; 5]> {
    check_domain(g)?;
    let hodge = Hodge::for_spec(g.spec())?;
    let sg = alternate(g);
    let t1 = pairing(dir, &hodge.delta_inverse(&dbar_j(g)?)?)? * 0.5;
    let t2 = pairing(dir, &hodge.delta_inverse(&dbar_j(&sg)?)?)? * -0.5;
    let t3 = pairing(dir, &g.wedge(g)?)? / 6.0;
    // Σ_c (−1)^{c+1} γ_c = −σγ
    let t4 = pairing(dir, &g.wedge(&sg)?)? / -6.0;
    let t5 = pairing(dir, &sg.wedge(&sg)?)? / 6.0;
    Ok([t1, t2, t3, t4, t5])
}

/// The bracketed expression V of the first variation, so that δΦ[β] = ∫ β ∧ V.
pub fn variation_density(g: &PolyvectorForm) -> Result<PolyvectorForm> {
    check_domain(g)?;
    let hodge = Hodge::for_spec(g.spec())?;
    let sg = alternate(g);
    let mut v = hodge.delta_inverse(&dbar_j(&g.sub(&sg)?)?)?.scale_re(0.5);
    // γ∧γ − γ∧σγ + σγ∧σγ in one pass: weight 1 − (−1)^b + (−1)^{a+b} on γ_a∧γ_b
    let cubic = g.self_wedge_weighted(|l, r| {
        let (a, b) = (l.degree(), r.degree());
        1.0 - parity(b.rem_euclid(2) as usize) + parity((a + b).rem_euclid(2) as usize)
    });
    v.axpy(c(1.0 / 6.0), &cubic)?;
    Ok(v)
}

/// d/dt Φ(γ + tβ) at t = 0 by the closed form.
pub fn first_variation(g: &PolyvectorForm, dir: &PolyvectorForm) -> Result<Complex64> {
    pairing(dir, &variation_density(g)?)
}

/// Derivative at 0 of the cubic through p(−2), p(−1), p(1), p(2).
pub fn cubic_derivative(p: [Complex64; 4]) -> Complex64 {
    let [m2, m1, p1, p2] = p;
    (m2 - p2 + (p1 - m1) * 8.0) / 12.0
}

fn line_samples<F>(g: &PolyvectorForm, dir: &PolyvectorForm, f: F) -> Result<[Complex64; 4]>
where
    F: Fn(&PolyvectorForm) -> Result<Complex64>,
{
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (slot, t) in out.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
        let mut x = g.clone();
        x.axpy(c(t), dir)?;
        *slot = f(&x)?;
    }
    Ok(out)
}

/// Exact derivative of t ↦ Φ(γ + tβ) at 0 from four values of the cubic.
pub fn variation_oracle(g: &PolyvectorForm, dir: &PolyvectorForm) -> Result<Complex64> {
    check_domain(g)?;
    check_domain(dir)?;
    Ok(cubic_derivative(line_samples(g, dir, |x| phi_parts(x).map(|(a, b)| a + b))?))
}

/// As [`variation_oracle`] but with β unconstrained. Φ's formula is still
/// evaluated off ker Δ_J, so this is the derivative of that formula, not of Φ.
pub fn variation_oracle_any_direction(g: &PolyvectorForm, dir: &PolyvectorForm) -> Result<Complex64> {
    check_domain(g)?;
    Ok(cubic_derivative(line_samples(g, dir, |x| phi_parts(x).map(|(a, b)| a + b))?))
}

/// Oracle split into the quadratic and cubic parts of Φ.
pub fn variation_oracle_parts(g: &PolyvectorForm, dir: &PolyvectorForm) -> Result<(Complex64, Complex64)> {
    check_domain(g)?;
    check_domain(dir)?;
    let mut quad = [Complex64::new(0.0, 0.0); 4];
    let mut cube = quad;
    for (slot, t) in [-2.0, -1.0, 1.0, 2.0].into_iter().enumerate() {
        let mut x = g.clone();
        x.axpy(c(t), dir)?;
        (quad[slot], cube[slot]) = phi_parts(&x)?;
    }
    Ok((cubic_derivative(quad), cubic_derivative(cube)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariationReport {
    pub closed_form: Complex64,
    pub oracle: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// rounding level of Φ along the sampled line; an exact zero variation
    /// shows up in the oracle as noise of about this size
    pub noise_floor: f64,
    /// closed-form terms in display order
    pub terms: [Complex64; 5],
    /// (closed form, oracle) for the quadratic part of Φ
    pub quadratic: (Complex64, Complex64),
    /// (closed form, oracle) for the cubic part of Φ
    pub cubic: (Complex64, Complex64),
}

pub fn variation_report(g: &PolyvectorForm, dir: &PolyvectorForm) -> Result<VariationReport> {
    let terms = first_variation_terms(g, dir)?;
    let closed_form: Complex64 = terms.iter().sum();
    let (oq, oc) = variation_oracle_parts(g, dir)?;
    let oracle = oq + oc;
    let abs_err = (closed_form - oracle).norm();
    let m = g.norm() + 2.0 * dir.norm();
    let scale = closed_form.norm().max(oracle.norm());
    Ok(VariationReport {
        closed_form,
        oracle,
        abs_err,
        rel_err: if abs_err == 0.0 { 0.0 } else { abs_err / scale },
        noise_floor: NOISE * (m * m + m * m * m),
        terms,
        quadratic: (terms[0] + terms[1], oq),
        cubic: (terms[2] + terms[3] + terms[4], oc),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Statement,
    Proof,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Statement => "statement",
            Variant::Proof => "proof",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "statement" => Ok(Variant::Statement),
            "proof" => Ok(Variant::Proof),
            _ => Err(Error::Invalid(format!("unknown variant {s:?} (statement|proof)"))),
        }
    }
}

/// Euler-Lagrange expression for each (p,q), 0 ≤ p,q ≤ n.
pub fn el_residual(g: &PolyvectorForm, variant: Variant) -> Result<BTreeMap<(usize, usize), PolyvectorForm>> {
    check_domain(g)?;
    let spec = g.spec();
    let n = spec.n as i64;
    let hodge = Hodge::for_spec(spec)?;
    let comp = |p: i64, q: i64| -> Option<PolyvectorForm> {
        if p < 0 || q < 0 || p > n || q > n {
            return None;
        }
        let x = g.project_bidegree(p as usize, q as usize);
        if x.is_zero() {
            None
        } else {
            Some(x)
        }
    };
    let mut out = BTreeMap::new();
    for p in 0..=n {
        for q in 0..=n {
            let mut r = PolyvectorForm::zero(spec);
            let lin = (1.0 - parity((p + q - 1).rem_euclid(2) as usize)) / 2.0;
            let quad = match variant {
                Variant::Statement => (2.0 * parity((p + q) as usize) + 1.0) / 6.0,
                Variant::Proof => (2.0 + parity((p + q) as usize)) / 6.0,
            };
            if lin != 0.0 {
                if let Some(x) = comp(n - p - 1, n - q - 1) {
                    let d = dbar_j(&x)?;
                    let term = match variant {
                        Variant::Statement => d,
                        Variant::Proof => hodge.delta_inverse(&d)?,
                    };
                    r.axpy(c(lin), &term)?;
                }
            }
            for v in 0..=n {
                let (Some(a), Some(b)) = (comp(n - p - v, n - q - v), comp(v, v)) else { continue };
                let term = match variant {
                    Variant::Statement => a.bracket(&b)?,
                    Variant::Proof => a.wedge(&b)?,
                };
                r.axpy(c(quad), &term)?;
            }
            out.insert((p as usize, q as usize), r);
        }
    }
    Ok(out)
}

/// Max-abs of the EL components, over `only` if given.
pub fn el_residual_norm(g: &PolyvectorForm, variant: Variant, only: Option<&[(usize, usize)]>) -> Result<f64> {
    let r = el_residual(g, variant)?;
    Ok(r.iter()
        .filter(|(pq, _)| only.map(|o| o.contains(pq)).unwrap_or(true))
        .map(|(_, x)| x.max_abs())
        .fold(0.0, f64::max))
}

/// ∂̄_J γ + ½[γ, γ] for γ of shifted degree 1.
pub fn mc_residual(g: &PolyvectorForm) -> Result<PolyvectorForm> {
    match g.homogeneous_degree() {
        Some(1) => {}
        None if g.is_zero() => return Ok(PolyvectorForm::zero(g.spec())),
        d => return Err(Error::WrongDegree(format!("Maurer-Cartan residual needs degree 1, got {d:?}"))),
    }
    let mut r = dbar_j(g)?;
    r.axpy(c(0.5), &g.bracket(g)?)?;
    Ok(r)
}

/// Both sides of ∫∂̄Δ⁻¹γ∧γ = Σ_{p,q} ∫∂̄α_{p+1,q} ∧ Δ_J(preimage of γ_{n−p−1,n−q−1}).
pub fn quadratic_reduction(g: &PolyvectorForm) -> Result<(Complex64, Complex64)> {
    check_domain(g)?;
    let spec = g.spec();
    let n = spec.n;
    let hodge = Hodge::for_spec(spec)?;
    let lhs = pairing(&dbar_j(&hodge.delta_inverse(g)?)?, g)?;
    let mut rhs = Complex64::new(0.0, 0.0);
    for p in 0..n {
        for q in 0..n {
            let HodgeSplit { alpha, .. } = hodge.hodge_split(&g.project_bidegree(p, q), f64::INFINITY)?;
            let comp = g.project_bidegree(n - p - 1, n - q - 1);
            let HodgeSplit { alpha: pre, .. } = hodge.hodge_split(&comp, f64::INFINITY)?;
            rhs += pairing(&dbar_j(&alpha)?, &delta_j(&pre)?)?;
        }
    }
    Ok((lhs, rhs))
}

/// Polynomial in t with PolyvectorForm coefficients, truncated at `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct TPolynomial {
    pub spec: TorusSpec,
    pub coeffs: Vec<PolyvectorForm>,
}

impl TPolynomial {
    pub fn zero(spec: TorusSpec, order: usize) -> Self {
        TPolynomial { spec, coeffs: vec![PolyvectorForm::zero(spec); order + 1] }
    }

    pub fn new(spec: TorusSpec, coeffs: Vec<PolyvectorForm>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Invalid("a TPolynomial needs at least one coefficient".into()));
        }
        if let Some(x) = coeffs.iter().find(|x| x.spec() != spec) {
            return Err(Error::SpecMismatch(format!("{:?} vs {:?}", x.spec(), spec)));
        }
        Ok(TPolynomial { spec, coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn map(&self, f: impl Fn(&PolyvectorForm) -> Result<PolyvectorForm>) -> Result<TPolynomial> {
        Ok(TPolynomial { spec: self.spec, coeffs: self.coeffs.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn add(&self, other: &TPolynomial) -> Result<TPolynomial> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch(self.order(), other.order()));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(TPolynomial { spec: self.spec, coeffs })
    }

    /// Truncated product under ∧.
    pub fn wedge(&self, other: &TPolynomial) -> Result<TPolynomial> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch(self.order(), other.order()));
        }
        let m = self.order();
        let mut out = TPolynomial::zero(self.spec, m);
        for a in 0..=m {
            if self.coeffs[a].is_zero() {
                continue;
            }
            for b in 0..=(m - a) {
                if other.coeffs[b].is_zero() {
                    continue;
                }
                let w = self.coeffs[a].wedge(&other.coeffs[b])?;
                out.coeffs[a + b].axpy(c(1.0), &w)?;
            }
        }
        Ok(out)
    }

    /// Σ_a t^a x_a at a scalar t.
    pub fn eval(&self, t: Complex64) -> Result<PolyvectorForm> {
        let mut out = PolyvectorForm::zero(self.spec);
        let mut tp = c(1.0);
        for x in &self.coeffs {
            out.axpy(tp, x)?;
            tp *= t;
        }
        Ok(out)
    }
}

/// Coefficients of 𝚽 = ∫ −½ ∂̄_J α ∧ Δ_J α + (1/6) γ̂∧γ̂∧γ̂ up to the truncation order,
/// with γ̂ = Σ γ̂_a t^a + Δ_J α(t).
pub fn phi_powerseries(gamma_hat: &TPolynomial, alpha: &TPolynomial) -> Result<Vec<Complex64>> {
    if gamma_hat.spec != alpha.spec {
        return Err(Error::SpecMismatch(format!("{:?} vs {:?}", gamma_hat.spec, alpha.spec)));
    }
    if gamma_hat.order() != alpha.order() {
        return Err(Error::OrderMismatch(gamma_hat.order(), alpha.order()));
    }
    let d_alpha = alpha.map(delta_j)?;
    let g = gamma_hat.add(&d_alpha)?;
    let quad = alpha.map(dbar_j)?.wedge(&d_alpha)?;
    let cube = g.wedge(&g)?.wedge(&g)?;
    quad.coeffs
        .iter()
        .zip(&cube.coeffs)
        .map(|(q, k)| Ok(integrate(q) * -0.5 + integrate(k) / 6.0))
        .collect()
}

/// 𝚽 at a scalar t with no truncation in t.
pub fn phi_extended(gamma_hat: &TPolynomial, alpha: &TPolynomial, t: Complex64) -> Result<Complex64> {
    let a = alpha.eval(t)?;
    let da = delta_j(&a)?;
    let mut g = gamma_hat.eval(t)?;
    g.axpy(c(1.0), &da)?;
    Ok(pairing(&dbar_j(&a)?, &da)? * -0.5 + pairing(&g.wedge(&g)?, &g)? / 6.0)
}
