//! Contraction with Ω = dz¹∧…∧dzⁿ, Dolbeault operators on forms, and the
//! operators ∂̄_J and Δ_J they induce on polyvector-valued forms.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exterior::{parity, BasisLabel, MultiIndex, PolyvectorForm};
use crate::torus_field::{DerivKind, FourierScalar, TorusSpec};

/// `dz^H ∧ dz̄^A`, both ascending.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FormLabel {
    pub h: MultiIndex,
    pub a: MultiIndex,
}

impl FormLabel {
    pub fn new(h: MultiIndex, a: MultiIndex) -> Self {
        FormLabel { h, a }
    }

    pub fn from_indices(h: &[usize], a: &[usize], n: usize) -> Result<Self> {
        Ok(FormLabel { h: MultiIndex::from_indices(h, n)?, a: MultiIndex::from_indices(a, n)? })
    }
}

impl Ord for FormLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.h.len() + self.a.len())
            .cmp(&(other.h.len() + other.a.len()))
            .then_with(|| self.h.indices().cmp(&other.h.indices()))
            .then_with(|| self.a.indices().cmp(&other.a.indices()))
    }
}

impl PartialOrd for FormLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for FormLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(H={:?}, A={:?})", self.h, self.a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexForm {
    spec: TorusSpec,
    terms: BTreeMap<FormLabel, FourierScalar>,
}

impl ComplexForm {
    pub fn zero(spec: TorusSpec) -> Self {
        ComplexForm { spec, terms: BTreeMap::new() }
    }

    pub fn monomial(label: FormLabel, f: FourierScalar) -> Self {
        let mut w = Self::zero(f.spec());
        w.terms.insert(label, f);
        w
    }

    pub fn spec(&self) -> TorusSpec {
        self.spec
    }

    pub fn terms(&self) -> &BTreeMap<FormLabel, FourierScalar> {
        &self.terms
    }

    pub fn get(&self, label: &FormLabel) -> Option<&FourierScalar> {
        self.terms.get(label)
    }

    pub fn entry(&mut self, label: FormLabel) -> &mut FourierScalar {
        let spec = self.spec;
        self.terms.entry(label).or_insert_with(|| FourierScalar::zero(spec))
    }

    pub fn add_term(&mut self, label: FormLabel, f: &FourierScalar) -> Result<()> {
        let full = MultiIndex::full(self.spec.n).0;
        if (label.h.0 | label.a.0) & !full != 0 {
            return Err(Error::InvalidIndex(format!("{label:?} exceeds n = {}", self.spec.n)));
        }
        self.entry(label).axpy(Complex64::new(1.0, 0.0), f)
    }

    pub fn pruned(mut self) -> Self {
        self.terms.retain(|_, f| !f.is_zero());
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|f| f.is_zero())
    }

    pub fn sub(&self, other: &ComplexForm) -> Result<ComplexForm> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch(format!("{:?} vs {:?}", self.spec, other.spec)));
        }
        let mut out = self.clone();
        for (l, f) in &other.terms {
            out.entry(*l).axpy(Complex64::new(-1.0, 0.0), f)?;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|f| f.max_abs()).fold(0.0, f64::max)
    }
}

/// Image label and sign of `(dz̄^I ⊗ ∂_J) ⊢ Ω = dz̄^I ∧ ι_{∂_{j_p}}…ι_{∂_{j_1}} Ω`.
pub fn contract_label(n: usize, l: BasisLabel) -> (FormLabel, f64) {
    let mut s = 1.0;
    // ι_{j_1} acts first; earlier removals are all below the current index
    for (removed, j) in l.j.indices().into_iter().enumerate() {
        s *= parity(j - 1 - removed);
    }
    let h = l.j.complement(n);
    s *= parity(l.i.len() * h.len());
    (FormLabel { h, a: l.i }, s)
}

/// Inverse of [`contract_label`].
pub fn expand_label(n: usize, w: FormLabel) -> (BasisLabel, f64) {
    let l = BasisLabel::new(w.a, w.h.complement(n));
    let (_, s) = contract_label(n, l);
    (l, s)
}

pub fn contract_omega(x: &PolyvectorForm) -> ComplexForm {
    let spec = x.spec();
    let mut out = ComplexForm::zero(spec);
    for (l, f) in x.terms() {
        let (w, s) = contract_label(spec.n, *l);
        out.terms.insert(w, f.scale(Complex64::new(s, 0.0)));
    }
    out
}

pub fn expand_omega(w: &ComplexForm) -> PolyvectorForm {
    let spec = w.spec();
    let mut out = PolyvectorForm::zero(spec);
    for (l, f) in w.terms() {
        let (b, s) = expand_label(spec.n, *l);
        *out.entry(b) = f.scale(Complex64::new(s, 0.0));
    }
    out
}

fn d_form(w: &ComplexForm, kind: DerivKind) -> Result<ComplexForm> {
    let spec = w.spec();
    let mut out = ComplexForm::zero(spec);
    for (l, f) in w.terms() {
        for axis in 1..=spec.n {
            let (lab, s) = match kind {
                // dz̄^j moves past dz^H, then into A
                DerivKind::Antiholomorphic => {
                    if l.a.contains(axis) {
                        continue;
                    }
                    let s = parity(l.h.len()) * parity(l.a.count_below(axis));
                    (FormLabel::new(l.h, l.a.union(MultiIndex::single(axis))), s)
                }
                DerivKind::Holomorphic => {
                    if l.h.contains(axis) {
                        continue;
                    }
                    let s = parity(l.h.count_below(axis));
                    (FormLabel::new(l.h.union(MultiIndex::single(axis)), l.a), s)
                }
            };
            let d = f.derivative(axis, kind)?;
            out.entry(lab).axpy(Complex64::new(s, 0.0), &d)?;
        }
    }
    Ok(out)
}

pub fn dbar_form(w: &ComplexForm) -> Result<ComplexForm> {
    d_form(w, DerivKind::Antiholomorphic)
}

pub fn partial_form(w: &ComplexForm) -> Result<ComplexForm> {
    d_form(w, DerivKind::Holomorphic)
}

/// ∂̄ on the form factor: `∂̄(F dz̄^I ⊗ ∂_J) = Σ_j ∂F/∂z̄_j dz̄^j∧dz̄^I ⊗ ∂_J`.
pub fn dbar_j(x: &PolyvectorForm) -> Result<PolyvectorForm> {
    let spec = x.spec();
    let mut out = PolyvectorForm::zero(spec);
    for (l, f) in x.terms() {
        for axis in 1..=spec.n {
            if l.i.contains(axis) {
                continue;
            }
            let s = parity(l.i.count_below(axis));
            let d = f.derivative(axis, DerivKind::Antiholomorphic)?;
            let lab = BasisLabel::new(l.i.union(MultiIndex::single(axis)), l.j);
            out.entry(lab).axpy(Complex64::new(s, 0.0), &d)?;
        }
    }
    Ok(out)
}

/// Δ_J = f⁻¹ ∘ ∂ ∘ f with f = ⊢Ω.
pub fn delta_j(x: &PolyvectorForm) -> Result<PolyvectorForm> {
    Ok(expand_omega(&partial_form(&contract_omega(x))?))
}

/// f⁻¹ ∘ ∂̄ ∘ f, the conjugated form of ∂̄_J.
pub fn dbar_j_conjugated(x: &PolyvectorForm) -> Result<PolyvectorForm> {
    Ok(expand_omega(&dbar_form(&contract_omega(x))?))
}

/// `Δ(γ1∧γ2) − (−1)^{d+1}[γ1,γ2] − Δγ1∧γ2 − (−1)^{d+1} γ1∧Δγ2` with d = deg γ1.
pub fn tian_todorov_residual(g1: &PolyvectorForm, g2: &PolyvectorForm) -> Result<PolyvectorForm> {
    let d = match g1.homogeneous_degree() {
        Some(d) => d,
        None if g1.is_zero() => return Ok(PolyvectorForm::zero(g1.spec())),
        None => return Err(Error::WrongDegree("first argument must be homogeneous".into())),
    };
    let s = parity((d + 1) as usize);
    let mut r = delta_j(&g1.wedge(g2)?)?;
    r.axpy(Complex64::new(-s, 0.0), &g1.bracket(g2)?)?;
    r.axpy(Complex64::new(-1.0, 0.0), &delta_j(g1)?.wedge(g2)?)?;
    r.axpy(Complex64::new(-s, 0.0), &g1.wedge(&delta_j(g2)?)?)?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus_field::Freq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lab(i: &[usize], j: &[usize], n: usize) -> BasisLabel {
        BasisLabel::from_indices(i, j, n).unwrap()
    }

    #[test]
    fn contraction_table_n1() {
        assert_eq!(contract_label(1, lab(&[], &[1], 1)), (FormLabel::default(), 1.0));
        // form-first ordering: dz̄ ∧ dz = -dz ∧ dz̄
        let (w, s) = contract_label(1, lab(&[1], &[], 1));
        assert_eq!(w, FormLabel::from_indices(&[1], &[1], 1).unwrap());
        assert_eq!(s, -1.0);
        assert_eq!(expand_label(1, FormLabel::from_indices(&[1], &[], 1).unwrap()), (BasisLabel::default(), 1.0));
    }

    #[test]
    fn contraction_n2_top_polyvector() {
        // ι_{∂2} ι_{∂1} (dz¹∧dz²) = ι_{∂2} dz² = 1
        assert_eq!(contract_label(2, lab(&[], &[1, 2], 2)), (FormLabel::default(), 1.0));
        // ι_{∂2}(dz¹∧dz²) = -dz¹
        let (w, s) = contract_label(2, lab(&[], &[2], 2));
        assert_eq!(w, FormLabel::from_indices(&[1], &[], 2).unwrap());
        assert_eq!(s, -1.0);
    }

    #[test]
    fn contraction_is_a_bijection() {
        for n in 1..=4 {
            let mut seen = std::collections::HashSet::new();
            for l in BasisLabel::all(n) {
                let (w, s) = contract_label(n, l);
                assert_eq!(w.h.len(), n - l.p());
                assert_eq!(w.a.len(), l.q());
                assert!(seen.insert(w));
                let (back, s2) = expand_label(n, w);
                assert_eq!(back, l);
                assert_eq!(s * s2, 1.0);
            }
        }
    }

    #[test]
    fn dbar_form_example() {
        let spec = TorusSpec::new(1, 1).unwrap();
        let e = FourierScalar::mode(spec, &Freq::new(vec![1], vec![0]), c(1.0, 0.0)).unwrap();
        let w = ComplexForm::monomial(FormLabel::default(), e);
        let d = dbar_form(&w).unwrap().pruned();
        let want = FormLabel::from_indices(&[], &[1], 1).unwrap();
        assert_eq!(d.terms().len(), 1);
        assert!((d.get(&want).unwrap().get(&Freq::new(vec![1], vec![0])) - c(0.0, PI)).norm() < 1e-15);
    }

    #[test]
    fn dbar_j_and_delta_j_examples_n1() {
        let spec = TorusSpec::new(1, 1).unwrap();
        let k = Freq::new(vec![1], vec![0]);
        let e = FourierScalar::mode(spec, &k, c(1.0, 0.0)).unwrap();
        let x = PolyvectorForm::monomial(lab(&[], &[1], 1), e);
        let d = dbar_j(&x).unwrap().pruned();
        assert!((d.get(&lab(&[1], &[1], 1)).unwrap().get(&k) - c(0.0, PI)).norm() < 1e-15);
        let dl = delta_j(&x).unwrap().pruned();
        assert_eq!(dl.terms().len(), 1);
        assert!((dl.get(&BasisLabel::default()).unwrap().get(&k) - c(0.0, PI)).norm() < 1e-15);
    }

    #[test]
    fn constants_are_closed() {
        let spec = TorusSpec::new(2, 1).unwrap();
        let one = FourierScalar::constant(spec, c(1.0, 0.5));
        for l in BasisLabel::all(2) {
            let x = PolyvectorForm::monomial(l, one.clone());
            assert!(dbar_j(&x).unwrap().is_zero());
            assert!(delta_j(&x).unwrap().is_zero());
        }
    }

    #[test]
    fn tt_requires_homogeneous_first_argument() {
        let spec = TorusSpec::new(1, 0).unwrap();
        let one = FourierScalar::constant(spec, c(1.0, 0.0));
        let mut x = PolyvectorForm::monomial(lab(&[], &[], 1), one.clone());
        x.add_term(lab(&[1], &[], 1), &one).unwrap();
        assert!(matches!(tian_todorov_residual(&x, &x), Err(Error::WrongDegree(_))));
    }
}
