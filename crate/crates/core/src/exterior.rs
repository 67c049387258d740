//! The graded algebra of polyvector-valued (0,q)-forms.
//!
//! A monomial is stored as `dz̄^I ⊗ ∂_J` with `I` and `J` ascending. For sign
//! purposes every generator is odd and the two families anticommute with each
//! other; the wedge carries an extra `(-1)^{|J||J'|}` so that the product obeys
//! `x∧y = (-1)^{(deg x+1)(deg y+1)} y∧x` in the shifted grading.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::torus_field::{mul_acc, DerivKind, FourierScalar, TorusSpec};

/// Strictly increasing subset of {1..n}, stored as a bitmask (bit i-1 for index i).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(pub u16);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn from_indices(indices: &[usize], n: usize) -> Result<Self> {
        let mut bits = 0u16;
        let mut last = 0usize;
        for &i in indices {
            if i == 0 || i > n {
                return Err(Error::InvalidIndex(format!("index {i} not in 1..={n}")));
            }
            if i <= last {
                return Err(Error::InvalidIndex(format!("{indices:?} is not strictly increasing")));
            }
            last = i;
            bits |= 1 << (i - 1);
        }
        Ok(MultiIndex(bits))
    }

    pub fn full(n: usize) -> Self {
        MultiIndex(((1u32 << n) - 1) as u16)
    }

    pub fn single(i: usize) -> Self {
        MultiIndex(1 << (i - 1))
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0 & (1 << (i - 1)) != 0
    }

    /// 1-based indices in ascending order.
    pub fn indices(&self) -> Vec<usize> {
        (0..16).filter(|b| self.0 & (1 << b) != 0).map(|b| b + 1).collect()
    }

    pub fn complement(&self, n: usize) -> Self {
        MultiIndex(!self.0 & Self::full(n).0)
    }

    pub fn without(&self, i: usize) -> Self {
        MultiIndex(self.0 & !(1 << (i - 1)))
    }

    pub fn union(&self, other: MultiIndex) -> Self {
        MultiIndex(self.0 | other.0)
    }

    pub fn overlaps(&self, other: MultiIndex) -> bool {
        self.0 & other.0 != 0
    }

    /// Number of elements strictly below i.
    pub fn count_below(&self, i: usize) -> usize {
        (self.0 & ((1u16 << (i - 1)) - 1)).count_ones() as usize
    }

    /// Number of elements strictly above i.
    pub fn count_above(&self, i: usize) -> usize {
        ((self.0 as u32) >> i).count_ones() as usize
    }

    /// Every subset of {1..n}, by size then lexicographically.
    pub fn all(n: usize) -> Vec<MultiIndex> {
        let mut v: Vec<MultiIndex> = (0..(1u32 << n)).map(|b| MultiIndex(b as u16)).collect();
        v.sort();
        v
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.indices().cmp(&other.indices()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.indices())
    }
}

/// Sign of sorting the concatenation `a ++ b` of two ascending lists; 0 if they share an element.
pub fn merge_sign(a: MultiIndex, b: MultiIndex) -> i32 {
    if a.overlaps(b) {
        return 0;
    }
    let mut inv = 0;
    for j in b.indices() {
        inv += a.count_above(j);
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

pub(crate) fn parity(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `dz̄^I ⊗ ∂_J`: q = |I|, p = |J|.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub i: MultiIndex,
    pub j: MultiIndex,
}

impl BasisLabel {
    pub fn new(i: MultiIndex, j: MultiIndex) -> Self {
        BasisLabel { i, j }
    }

    pub fn from_indices(i: &[usize], j: &[usize], n: usize) -> Result<Self> {
        Ok(BasisLabel { i: MultiIndex::from_indices(i, n)?, j: MultiIndex::from_indices(j, n)? })
    }

    pub fn p(&self) -> usize {
        self.j.len()
    }

    pub fn q(&self) -> usize {
        self.i.len()
    }

    /// Shifted degree p + q - 1.
    pub fn degree(&self) -> i32 {
        (self.p() + self.q()) as i32 - 1
    }

    pub fn all(n: usize) -> Vec<BasisLabel> {
        let subs = MultiIndex::all(n);
        let mut v: Vec<BasisLabel> =
            subs.iter().flat_map(|&i| subs.iter().map(move |&j| BasisLabel { i, j })).collect();
        v.sort();
        v
    }

    pub fn with_bidegree(n: usize, p: usize, q: usize) -> Vec<BasisLabel> {
        Self::all(n).into_iter().filter(|l| l.p() == p && l.q() == q).collect()
    }
}

impl Ord for BasisLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.p() + self.q())
            .cmp(&(other.p() + other.q()))
            .then_with(|| self.i.indices().cmp(&other.i.indices()))
            .then_with(|| self.j.indices().cmp(&other.j.indices()))
    }
}

impl PartialOrd for BasisLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(I={:?}, J={:?})", self.i, self.j)
    }
}

/// Sign and label of the product of two basis monomials, None when it vanishes.
pub fn wedge_label(l: BasisLabel, r: BasisLabel) -> Option<(BasisLabel, f64)> {
    let si = merge_sign(l.i, r.i);
    let sj = merge_sign(l.j, r.j);
    if si == 0 || sj == 0 {
        return None;
    }
    let s = (si * sj) as f64 * parity(l.p() * r.q()) * parity(l.p() * r.p());
    Some((BasisLabel::new(l.i.union(r.i), l.j.union(r.j)), s))
}

/// Overall sign of the bracket of a p-vector term with a `(q', p')` term.
fn bracket_sign(p: usize, q2: usize, p2: usize) -> f64 {
    parity(p + (p + 1) * (p2 + q2))
}

/// Selector for [`PolyvectorForm::project`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grading {
    Degree(i32),
    Bidegree(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyvectorForm {
    spec: TorusSpec,
    terms: BTreeMap<BasisLabel, FourierScalar>,
}

impl PolyvectorForm {
    pub fn zero(spec: TorusSpec) -> Self {
        PolyvectorForm { spec, terms: BTreeMap::new() }
    }

    pub fn one(spec: TorusSpec) -> Self {
        Self::monomial(BasisLabel::default(), FourierScalar::constant(spec, Complex64::new(1.0, 0.0)))
    }

    pub fn monomial(label: BasisLabel, f: FourierScalar) -> Self {
        let mut x = Self::zero(f.spec());
        x.terms.insert(label, f);
        x
    }

    pub fn spec(&self) -> TorusSpec {
        self.spec
    }

    pub fn terms(&self) -> &BTreeMap<BasisLabel, FourierScalar> {
        &self.terms
    }

    pub fn get(&self, label: &BasisLabel) -> Option<&FourierScalar> {
        self.terms.get(label)
    }

    /// Mutable coefficient of a label, inserting zero when absent.
    pub fn entry(&mut self, label: BasisLabel) -> &mut FourierScalar {
        let spec = self.spec;
        self.terms.entry(label).or_insert_with(|| FourierScalar::zero(spec))
    }

    pub fn add_term(&mut self, label: BasisLabel, f: &FourierScalar) -> Result<()> {
        self.check_label(label)?;
        self.entry(label).axpy(Complex64::new(1.0, 0.0), f)
    }

    fn check_label(&self, label: BasisLabel) -> Result<()> {
        let full = MultiIndex::full(self.spec.n);
        if (label.i.0 | label.j.0) & !full.0 != 0 {
            return Err(Error::InvalidIndex(format!("{label:?} exceeds n = {}", self.spec.n)));
        }
        Ok(())
    }

    fn check(&self, other: &PolyvectorForm) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch(format!("{:?} vs {:?}", self.spec, other.spec)));
        }
        Ok(())
    }

    /// Drop labels whose coefficient vanishes identically.
    pub fn pruned(mut self) -> Self {
        self.terms.retain(|_, f| !f.is_zero());
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|f| f.is_zero())
    }

    /// Degree of a nonzero homogeneous element; None if zero or mixed.
    pub fn homogeneous_degree(&self) -> Option<i32> {
        let mut d = None;
        for (l, f) in &self.terms {
            if f.is_zero() {
                continue;
            }
            match d {
                None => d = Some(l.degree()),
                Some(e) if e != l.degree() => return None,
                _ => {}
            }
        }
        d
    }

    pub fn add(&self, other: &PolyvectorForm) -> Result<PolyvectorForm> {
        let mut out = self.clone();
        out.axpy(Complex64::new(1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &PolyvectorForm) -> Result<PolyvectorForm> {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> PolyvectorForm {
        PolyvectorForm {
            spec: self.spec,
            terms: self.terms.iter().map(|(l, f)| (*l, f.scale(s))).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> PolyvectorForm {
        self.scale(Complex64::new(s, 0.0))
    }

    /// self += s * other
    pub fn axpy(&mut self, s: Complex64, other: &PolyvectorForm) -> Result<()> {
        self.check(other)?;
        for (l, f) in &other.terms {
            self.entry(*l).axpy(s, f)?;
        }
        Ok(())
    }

    /// L² norm over all labels and modes.
    pub fn norm(&self) -> f64 {
        self.terms.values().map(|f| f.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|f| f.max_abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient-wise difference.
    pub fn max_abs_diff(&self, other: &PolyvectorForm) -> Result<f64> {
        self.sub(other).map(|d| d.max_abs())
    }

    pub fn approx_eq(&self, other: &PolyvectorForm, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    pub fn project(&self, sel: Grading) -> PolyvectorForm {
        let keep = |l: &BasisLabel| match sel {
            Grading::Degree(c) => l.degree() == c,
            Grading::Bidegree(p, q) => l.p() == p && l.q() == q,
        };
        PolyvectorForm {
            spec: self.spec,
            terms: self.terms.iter().filter(|(l, _)| keep(l)).map(|(l, f)| (*l, f.clone())).collect(),
        }
    }

    pub fn project_degree(&self, c: i32) -> PolyvectorForm {
        self.project(Grading::Degree(c))
    }

    pub fn project_bidegree(&self, p: usize, q: usize) -> PolyvectorForm {
        self.project(Grading::Bidegree(p, q))
    }

    /// Keep only labels whose (p,q) is in the list.
    pub fn restrict(&self, bidegrees: &[(usize, usize)]) -> PolyvectorForm {
        PolyvectorForm {
            spec: self.spec,
            terms: self
                .terms
                .iter()
                .filter(|(l, _)| bidegrees.contains(&(l.p(), l.q())))
                .map(|(l, f)| (*l, f.clone()))
                .collect(),
        }
    }

    pub fn restrict_labels(&self, labels: &[BasisLabel]) -> PolyvectorForm {
        PolyvectorForm {
            spec: self.spec,
            terms: self
                .terms
                .iter()
                .filter(|(l, _)| labels.contains(l))
                .map(|(l, f)| (*l, f.clone()))
                .collect(),
        }
    }

    /// Bidegrees carrying a nonzero coefficient, sorted.
    pub fn bidegrees(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> =
            self.terms.iter().filter(|(_, f)| !f.is_zero()).map(|(l, _)| (l.p(), l.q())).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Apply a per-coefficient map label by label.
    pub fn map_coeffs<F: Fn(&FourierScalar) -> FourierScalar>(&self, f: F) -> PolyvectorForm {
        PolyvectorForm {
            spec: self.spec,
            terms: self.terms.iter().map(|(l, c)| (*l, f(c))).collect(),
        }
    }

    pub fn wedge(&self, other: &PolyvectorForm) -> Result<PolyvectorForm> {
        self.check(other)?;
        let mut out = PolyvectorForm::zero(self.spec);
        for (l, f) in &self.terms {
            for (r, g) in &other.terms {
                if let Some((lab, s)) = wedge_label(*l, *r) {
                    let acc = out.entry(lab);
                    mul_acc(acc.coeffs_mut(), f.coeffs(), g.coeffs(), Complex64::new(s, 0.0), self.spec);
                }
            }
        }
        Ok(out)
    }

    /// Σ_{l,r} w(l,r)·(x_l ∧ x_r). Mirror pairs share one coefficient product.
    pub fn self_wedge_weighted<W: Fn(&BasisLabel, &BasisLabel) -> f64>(&self, w: W) -> PolyvectorForm {
        let mut out = PolyvectorForm::zero(self.spec);
        let terms: Vec<(&BasisLabel, &FourierScalar)> = self.terms.iter().collect();
        for (a, (l, f)) in terms.iter().enumerate() {
            for (r, g) in &terms[a..] {
                let Some((lab, s)) = wedge_label(**l, **r) else { continue };
                let mut s = w(l, r) * s;
                if l != r {
                    let (_, s2) = wedge_label(**r, **l).expect("disjoint labels commute up to sign");
                    s += w(r, l) * s2;
                }
                if s != 0.0 {
                    mul_acc(out.entry(lab).coeffs_mut(), f.coeffs(), g.coeffs(), Complex64::new(s, 0.0), self.spec);
                }
            }
        }
        out
    }

    /// Schouten-Nijenhuis bracket of two pure polyvector fields (empty I).
    pub fn sn_bracket(&self, other: &PolyvectorForm) -> Result<PolyvectorForm> {
        self.check(other)?;
        for x in [self, other] {
            if let Some((l, _)) = x.terms.iter().find(|(l, f)| !l.i.is_empty() && !f.is_zero()) {
                return Err(Error::NonEmptyAntiholomorphic(l.i.indices()));
            }
        }
        let mut out = PolyvectorForm::zero(self.spec);
        for (l, f) in &self.terms {
            for (r, g) in &other.terms {
                sn_terms(&mut out, MultiIndex::EMPTY, 1.0, l.j, f, r.j, g)?;
            }
        }
        Ok(out)
    }

    /// DGLA bracket: antiholomorphic parts wedge, polyvector parts by Schouten-Nijenhuis.
    pub fn bracket(&self, other: &PolyvectorForm) -> Result<PolyvectorForm> {
        self.check(other)?;
        let mut out = PolyvectorForm::zero(self.spec);
        for (l, f) in &self.terms {
            for (r, g) in &other.terms {
                let si = merge_sign(l.i, r.i);
                if si == 0 {
                    continue;
                }
                let s = si as f64 * bracket_sign(l.p(), r.q(), r.p());
                sn_terms(&mut out, l.i.union(r.i), s, l.j, f, r.j, g)?;
            }
        }
        Ok(out)
    }
}

/// Accumulate `s · dz̄^I ⊗ [F ∂_J, G ∂_K]^{SN}` into `out` (flat frame).
fn sn_terms(
    out: &mut PolyvectorForm,
    i: MultiIndex,
    s: f64,
    j: MultiIndex,
    f: &FourierScalar,
    k: MultiIndex,
    g: &FourierScalar,
) -> Result<()> {
    let spec = out.spec;
    for axis in 1..=spec.n {
        // (F ∂_J) ∂/∂θ_axis from the right, times ∂_{z_axis} G
        if j.contains(axis) {
            let jr = j.without(axis);
            let m = merge_sign(jr, k);
            if m != 0 {
                let dg = g.derivative(axis, DerivKind::Holomorphic)?;
                let sign = s * parity(j.count_above(axis)) * m as f64;
                let acc = out.entry(BasisLabel::new(i, jr.union(k)));
                mul_acc(acc.coeffs_mut(), f.coeffs(), dg.coeffs(), Complex64::new(sign, 0.0), spec);
            }
        }
        // minus (∂_{z_axis} F) times ∂/∂θ_axis (G ∂_K) from the left
        if k.contains(axis) {
            let kr = k.without(axis);
            let m = merge_sign(j, kr);
            if m != 0 {
                let df = f.derivative(axis, DerivKind::Holomorphic)?;
                let sign = -s * parity(k.count_below(axis)) * m as f64;
                let acc = out.entry(BasisLabel::new(i, j.union(kr)));
                mul_acc(acc.coeffs_mut(), df.coeffs(), g.coeffs(), Complex64::new(sign, 0.0), spec);
            }
        }
    }
    Ok(())
}

impl Default for BasisLabel {
    fn default() -> Self {
        BasisLabel { i: MultiIndex::EMPTY, j: MultiIndex::EMPTY }
    }
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

    fn konst(spec: TorusSpec, l: BasisLabel) -> PolyvectorForm {
        PolyvectorForm::monomial(l, FourierScalar::constant(spec, c(1.0, 0.0)))
    }

    #[test]
    fn multi_index_validation() {
        assert!(MultiIndex::from_indices(&[2, 1], 3).is_err());
        assert!(MultiIndex::from_indices(&[0], 3).is_err());
        assert!(MultiIndex::from_indices(&[4], 3).is_err());
        assert_eq!(MultiIndex::from_indices(&[1, 3], 3).unwrap().indices(), vec![1, 3]);
    }

    #[test]
    fn merge_sign_small_cases() {
        let m = |v: &[usize]| MultiIndex::from_indices(v, 4).unwrap();
        assert_eq!(merge_sign(m(&[1]), m(&[2])), 1);
        assert_eq!(merge_sign(m(&[2]), m(&[1])), -1);
        assert_eq!(merge_sign(m(&[2, 3]), m(&[1])), 1);
        assert_eq!(merge_sign(m(&[1, 3]), m(&[2, 4])), -1);
        assert_eq!(merge_sign(m(&[1, 3]), m(&[3])), 0);
    }

    #[test]
    fn label_order_matches_json_contract() {
        let labels = BasisLabel::all(2);
        assert_eq!(labels.len(), 16);
        assert_eq!(labels[0], BasisLabel::default());
        // degree -1, then 0 (|I|+|J| = 1) sorted by I then J
        assert_eq!(labels[1], lab(&[], &[1], 2));
        assert_eq!(labels[2], lab(&[], &[2], 2));
        assert_eq!(labels[3], lab(&[1], &[], 2));
        assert_eq!(labels[4], lab(&[2], &[], 2));
    }

    #[test]
    fn repeated_index_kills_wedge() {
        let spec = TorusSpec::new(1, 0).unwrap();
        let x = konst(spec, lab(&[1], &[1], 1));
        assert!(x.wedge(&x).unwrap().is_zero());
    }

    #[test]
    fn unit_is_unit() {
        let spec = TorusSpec::new(2, 1).unwrap();
        let f = FourierScalar::mode(spec, &Freq::new(vec![1, 0], vec![0, -1]), c(0.5, 1.0)).unwrap();
        let y = PolyvectorForm::monomial(lab(&[2], &[1], 2), f);
        let one = PolyvectorForm::one(spec);
        assert_eq!(one.wedge(&y).unwrap().pruned(), y);
        assert_eq!(y.wedge(&one).unwrap().pruned(), y);
    }

    #[test]
    fn self_wedge_matches_wedge() {
        use crate::sample::{random_element, Support};
        use rand::SeedableRng;
        let spec = TorusSpec::new(2, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = random_element(spec, &mut rng, &BasisLabel::all(2), &Support::full(spec), 2);
        let plain = x.wedge(&x).unwrap();
        assert!(x.self_wedge_weighted(|_, _| 1.0).approx_eq(&plain, 1e-12));
        // weight by the left degree only
        let odd_labels: Vec<BasisLabel> = BasisLabel::all(2).into_iter().filter(|l| l.degree().rem_euclid(2) == 1).collect();
        let odd = x.restrict_labels(&odd_labels);
        let want = odd.wedge(&x).unwrap();
        let got = x.self_wedge_weighted(|l, _| if l.degree().rem_euclid(2) == 1 { 1.0 } else { 0.0 });
        assert!(got.approx_eq(&want, 1e-12));
    }

    #[test]
    fn project_examples() {
        let spec = TorusSpec::new(2, 0).unwrap();
        let a = konst(spec, lab(&[1], &[2], 2));
        let b = konst(spec, lab(&[], &[1, 2], 2));
        let g = a.add(&b).unwrap();
        assert_eq!(g.project_degree(1), g);
        assert_eq!(g.project_bidegree(1, 1), a);
        assert!(g.project_degree(0).is_zero());
        assert_eq!(a.project_bidegree(1, 1), a);
    }

    #[test]
    fn sn_flat_frame_commutes() {
        let spec = TorusSpec::new(2, 0).unwrap();
        let d1 = konst(spec, lab(&[], &[1], 2));
        let d2 = konst(spec, lab(&[], &[2], 2));
        assert!(d1.sn_bracket(&d2).unwrap().is_zero());
    }

    #[test]
    fn sn_vector_fields_n1() {
        // [f∂, g∂] = (f g' - g f')∂ with f = e^{2πix}, g = e^{2πiy}
        let spec = TorusSpec::new(1, 2).unwrap();
        let f = FourierScalar::mode(spec, &Freq::new(vec![1], vec![0]), c(1.0, 0.0)).unwrap();
        let g = FourierScalar::mode(spec, &Freq::new(vec![0], vec![1]), c(1.0, 0.0)).unwrap();
        let d = lab(&[], &[1], 1);
        let u = PolyvectorForm::monomial(d, f.clone());
        let v = PolyvectorForm::monomial(d, g.clone());
        let got = u.sn_bracket(&v).unwrap();
        let gp = g.derivative(1, DerivKind::Holomorphic).unwrap();
        let fp = f.derivative(1, DerivKind::Holomorphic).unwrap();
        let want = f.multiply(&gp).unwrap().sub(&g.multiply(&fp).unwrap()).unwrap();
        assert_eq!(got.terms().len(), 1);
        assert!(got.get(&d).unwrap().approx_eq(&want, 1e-13));
        // (1,1) mode: π - πi
        let k = Freq::new(vec![1], vec![1]);
        assert!((want.get(&k) - c(PI, -PI)).norm() < 1e-13);
    }

    #[test]
    fn sn_derivation_n2() {
        let spec = TorusSpec::new(2, 1).unwrap();
        let f = FourierScalar::mode(spec, &Freq::new(vec![1, 0], vec![0, 1]), c(0.3, -0.2)).unwrap();
        let d1 = konst(spec, lab(&[], &[1], 2));
        let v = PolyvectorForm::monomial(lab(&[], &[2], 2), f.clone());
        let got = d1.sn_bracket(&v).unwrap().pruned();
        let want = PolyvectorForm::monomial(lab(&[], &[2], 2), f.derivative(1, DerivKind::Holomorphic).unwrap());
        assert!(got.approx_eq(&want, 1e-14));
    }

    #[test]
    fn sn_rejects_forms() {
        let spec = TorusSpec::new(1, 0).unwrap();
        let x = konst(spec, lab(&[1], &[1], 1));
        assert!(matches!(x.sn_bracket(&x), Err(Error::NonEmptyAntiholomorphic(_))));
    }

    #[test]
    fn constant_brackets_vanish() {
        let spec = TorusSpec::new(2, 1).unwrap();
        let x = konst(spec, lab(&[1], &[1, 2], 2));
        let y = konst(spec, lab(&[2], &[1], 2));
        assert!(x.bracket(&y).unwrap().is_zero());
    }

    #[test]
    fn bracket_n2_example_is_zero() {
        // ∂_2 does not see e^{2πi x_1} and ∂_1 is constant, so every SN term vanishes
        let spec = TorusSpec::new(2, 1).unwrap();
        let f = FourierScalar::mode(spec, &Freq::new(vec![1, 0], vec![0, 0]), c(1.0, 0.0)).unwrap();
        let x = PolyvectorForm::monomial(lab(&[1], &[1], 2), f);
        let y = konst(spec, lab(&[2], &[2], 2));
        assert!(x.bracket(&y).unwrap().is_zero());
        assert!(y.bracket(&x).unwrap().is_zero());
    }

    #[test]
    fn bracket_n1_self_vanishes() {
        let spec = TorusSpec::new(1, 1).unwrap();
        let f = FourierScalar::mode(spec, &Freq::new(vec![1], vec![0]), c(1.0, 0.0)).unwrap();
        let x = PolyvectorForm::monomial(lab(&[1], &[1], 1), f);
        assert!(x.bracket(&x).unwrap().is_zero());
    }
}
