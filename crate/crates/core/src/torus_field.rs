//! Truncated Fourier series on the real 2n-torus.
//!
//! Coefficients are stored densely, one slot per frequency in the cube
//! `[-K, K]^{2n}`. The slot index is mixed-radix over `(a_1..a_n, b_1..b_n)`
//! with `a_1` most significant, so slot order is lexicographic `(a, b)` order.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest mode count for which the pairwise sum table is cached.
const SUM_TABLE_MAX_MODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusSpec {
    pub n: usize,
    pub k: usize,
}

impl TorusSpec {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("n must be at least 1".into()));
        }
        if n > 8 {
            return Err(Error::Invalid(format!("n = {n} is beyond desk scale (max 8)")));
        }
        let spec = TorusSpec { n, k };
        // guard against absurd allocations
        let side = (2 * k + 1) as f64;
        if side.powi(2 * n as i32) > 5.0e7 {
            return Err(Error::Invalid(format!("n = {n}, K = {k} has too many modes")));
        }
        Ok(spec)
    }

    pub fn side(&self) -> usize {
        2 * self.k + 1
    }

    /// Number of stored frequencies, (2K+1)^{2n}.
    pub fn mode_count(&self) -> usize {
        self.side().pow(2 * self.n as u32)
    }

    fn check(&self, other: &TorusSpec) -> Result<()> {
        if self != other {
            return Err(Error::SpecMismatch(format!(
                "(n={}, K={}) vs (n={}, K={})",
                self.n, self.k, other.n, other.k
            )));
        }
        Ok(())
    }

    /// Slot index of a frequency, or None when it lies outside the cutoff.
    pub fn index_of(&self, f: &Freq) -> Option<usize> {
        if f.a.len() != self.n || f.b.len() != self.n {
            return None;
        }
        let k = self.k as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &c in f.a.iter().chain(f.b.iter()) {
            let c = c as i64;
            if c < -k || c > k {
                return None;
            }
            idx = idx * side + (c + k) as usize;
        }
        Some(idx)
    }

    pub fn freq_at(&self, idx: usize) -> Freq {
        let side = self.side();
        let k = self.k as i32;
        let mut digits = vec![0i32; 2 * self.n];
        let mut r = idx;
        for d in digits.iter_mut().rev() {
            *d = (r % side) as i32 - k;
            r /= side;
        }
        let b = digits.split_off(self.n);
        Freq { a: digits, b }
    }

    /// Slot of the negated frequency.
    pub fn neg_index(&self, idx: usize) -> usize {
        self.mode_count() - 1 - idx
    }

    pub fn zero_index(&self) -> usize {
        (self.mode_count() - 1) / 2
    }

    /// Offset digits (0..=2K) of a slot, most significant first.
    fn digits(&self, idx: usize) -> Vec<u16> {
        let side = self.side();
        let mut out = vec![0u16; 2 * self.n];
        let mut r = idx;
        for d in out.iter_mut().rev() {
            *d = (r % side) as u16;
            r /= side;
        }
        out
    }

    /// Per-slot multipliers of d/dz_j (holomorphic) or d/dzbar_j.
    pub fn multipliers(&self, axis: usize, kind: DerivKind) -> Result<Arc<Vec<Complex64>>> {
        if axis == 0 || axis > self.n {
            return Err(Error::AxisOutOfRange { axis, n: self.n });
        }
        static CACHE: OnceLock<Mutex<HashMap<(TorusSpec, usize, DerivKind), Arc<Vec<Complex64>>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(m) = cache.lock().unwrap().get(&(*self, axis, kind)) {
            return Ok(m.clone());
        }
        let m: Vec<Complex64> = (0..self.mode_count())
            .map(|idx| {
                let f = self.freq_at(idx);
                let a = f.a[axis - 1] as f64;
                let b = f.b[axis - 1] as f64;
                match kind {
                    DerivKind::Holomorphic => Complex64::new(PI * b, PI * a),
                    DerivKind::Antiholomorphic => Complex64::new(-PI * b, PI * a),
                }
            })
            .collect();
        let m = Arc::new(m);
        cache.lock().unwrap().insert((*self, axis, kind), m.clone());
        Ok(m)
    }

    /// Table of `idx(f + g)` for all slot pairs (u32::MAX when out of band).
    fn sum_table(&self) -> Option<Arc<Vec<u32>>> {
        let m = self.mode_count();
        if m > SUM_TABLE_MAX_MODES {
            return None;
        }
        static CACHE: OnceLock<Mutex<HashMap<TorusSpec, Arc<Vec<u32>>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().unwrap().get(self) {
            return Some(t.clone());
        }
        let digits: Vec<Vec<u16>> = (0..m).map(|i| self.digits(i)).collect();
        let mut table = vec![u32::MAX; m * m];
        for i in 0..m {
            for j in 0..m {
                if let Some(s) = self.add_digits(&digits[i], &digits[j]) {
                    table[i * m + j] = s as u32;
                }
            }
        }
        let t = Arc::new(table);
        cache.lock().unwrap().insert(*self, t.clone());
        Some(t)
    }

    fn add_digits(&self, x: &[u16], y: &[u16]) -> Option<usize> {
        let k = self.k as i32;
        let side = self.side();
        let mut idx = 0usize;
        for (&u, &v) in x.iter().zip(y) {
            let d = u as i32 + v as i32 - k;
            if d < 0 || d > 2 * k {
                return None;
            }
            idx = idx * side + d as usize;
        }
        Some(idx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Freq {
    pub a: Vec<i32>,
    pub b: Vec<i32>,
}

impl Freq {
    pub fn new(a: Vec<i32>, b: Vec<i32>) -> Self {
        Freq { a, b }
    }

    pub fn zero(n: usize) -> Self {
        Freq { a: vec![0; n], b: vec![0; n] }
    }

    pub fn neg(&self) -> Freq {
        Freq {
            a: self.a.iter().map(|x| -x).collect(),
            b: self.b.iter().map(|x| -x).collect(),
        }
    }

    pub fn sup_norm(&self) -> i32 {
        self.a.iter().chain(&self.b).map(|x| x.abs()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivKind {
    Holomorphic,
    Antiholomorphic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierScalar {
    spec: TorusSpec,
    coeffs: Vec<Complex64>,
}

impl FourierScalar {
    pub fn zero(spec: TorusSpec) -> Self {
        FourierScalar { spec, coeffs: vec![Complex64::new(0.0, 0.0); spec.mode_count()] }
    }

    pub fn constant(spec: TorusSpec, c: Complex64) -> Self {
        let mut f = Self::zero(spec);
        f.coeffs[spec.zero_index()] = c;
        f
    }

    /// c · e^{2πi(a·x + b·y)}.
    pub fn mode(spec: TorusSpec, freq: &Freq, c: Complex64) -> Result<Self> {
        let idx = spec.index_of(freq).ok_or_else(|| {
            Error::Invalid(format!("frequency {freq:?} outside cutoff K = {}", spec.k))
        })?;
        let mut f = Self::zero(spec);
        f.coeffs[idx] = c;
        Ok(f)
    }

    pub fn from_coeffs(spec: TorusSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != spec.mode_count() {
            return Err(Error::Invalid(format!(
                "expected {} coefficients, got {}",
                spec.mode_count(),
                coeffs.len()
            )));
        }
        Ok(FourierScalar { spec, coeffs })
    }

    pub fn spec(&self) -> TorusSpec {
        self.spec
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, freq: &Freq) -> Complex64 {
        self.spec.index_of(freq).map(|i| self.coeffs[i]).unwrap_or_default()
    }

    pub fn set(&mut self, freq: &Freq, c: Complex64) -> Result<()> {
        let idx = self.spec.index_of(freq).ok_or_else(|| {
            Error::Invalid(format!("frequency {freq:?} outside cutoff K = {}", self.spec.k))
        })?;
        self.coeffs[idx] = c;
        Ok(())
    }

    /// Nonzero modes in lexicographic (a, b) order.
    pub fn nonzero_modes(&self) -> Vec<(Freq, Complex64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(i, c)| (self.spec.freq_at(i), *c))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[self.spec.zero_index()]
    }

    pub fn multiply(&self, other: &FourierScalar) -> Result<FourierScalar> {
        self.spec.check(&other.spec)?;
        let mut out = Self::zero(self.spec);
        mul_acc(&mut out.coeffs, &self.coeffs, &other.coeffs, Complex64::new(1.0, 0.0), self.spec);
        Ok(out)
    }

    pub fn derivative(&self, axis: usize, kind: DerivKind) -> Result<FourierScalar> {
        let m = self.spec.multipliers(axis, kind)?;
        let coeffs = self.coeffs.iter().zip(m.iter()).map(|(c, w)| c * w).collect();
        Ok(FourierScalar { spec: self.spec, coeffs })
    }

    pub fn add(&self, other: &FourierScalar) -> Result<FourierScalar> {
        self.spec.check(&other.spec)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y).collect();
        Ok(FourierScalar { spec: self.spec, coeffs })
    }

    pub fn sub(&self, other: &FourierScalar) -> Result<FourierScalar> {
        self.spec.check(&other.spec)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x - y).collect();
        Ok(FourierScalar { spec: self.spec, coeffs })
    }

    pub fn scale(&self, s: Complex64) -> FourierScalar {
        FourierScalar { spec: self.spec, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// self += s * other
    pub fn axpy(&mut self, s: Complex64, other: &FourierScalar) -> Result<()> {
        self.spec.check(&other.spec)?;
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += s * y;
        }
        Ok(())
    }

    /// Complex conjugate of the function: coefficient at k becomes conj(c(-k)).
    pub fn conj(&self) -> FourierScalar {
        let m = self.coeffs.len();
        let coeffs = (0..m).map(|i| self.coeffs[m - 1 - i].conj()).collect();
        FourierScalar { spec: self.spec, coeffs }
    }

    /// Square root of the sum of squared coefficient moduli (the L² norm).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &FourierScalar) -> Result<f64> {
        self.spec.check(&other.spec)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &FourierScalar, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }
}

/// out += s * (f ⋆ g), dropping out-of-band frequencies.
pub(crate) fn mul_acc(
    out: &mut [Complex64],
    f: &[Complex64],
    g: &[Complex64],
    s: Complex64,
    spec: TorusSpec,
) {
    let zero = Complex64::new(0.0, 0.0);
    let fs: Vec<(usize, Complex64)> =
        f.iter().enumerate().filter(|(_, c)| **c != zero).map(|(i, c)| (i, s * c)).collect();
    if fs.is_empty() {
        return;
    }
    let gs: Vec<(usize, Complex64)> =
        g.iter().enumerate().filter(|(_, c)| **c != zero).map(|(i, c)| (i, *c)).collect();
    if gs.is_empty() {
        return;
    }
    let m = spec.mode_count();
    if let Some(table) = spec.sum_table() {
        for &(i, a) in &fs {
            let row = &table[i * m..(i + 1) * m];
            for &(j, b) in &gs {
                let t = row[j];
                if t != u32::MAX {
                    out[t as usize] += a * b;
                }
            }
        }
    } else {
        let gd: Vec<Vec<u16>> = gs.iter().map(|(j, _)| spec.digits(*j)).collect();
        for &(i, a) in &fs {
            let di = spec.digits(i);
            for (&(_, b), dj) in gs.iter().zip(&gd) {
                if let Some(t) = spec.add_digits(&di, dj) {
                    out[t] += a * b;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn index_roundtrip_and_order() {
        let spec = TorusSpec::new(2, 1).unwrap();
        let mut prev: Option<Freq> = None;
        for i in 0..spec.mode_count() {
            let f = spec.freq_at(i);
            assert_eq!(spec.index_of(&f), Some(i));
            if let Some(p) = prev {
                assert!(p < f);
            }
            prev = Some(f.clone());
            assert_eq!(spec.freq_at(spec.neg_index(i)), f.neg());
        }
        assert_eq!(spec.freq_at(spec.zero_index()), Freq::zero(2));
    }

    #[test]
    fn product_of_characters() {
        let spec = TorusSpec::new(2, 2).unwrap();
        let f = FourierScalar::mode(spec, &Freq::new(vec![1, 0], vec![0, -1]), c(2.0, 0.0)).unwrap();
        let g = FourierScalar::mode(spec, &Freq::new(vec![1, 1], vec![0, 0]), c(0.0, 1.0)).unwrap();
        let h = f.multiply(&g).unwrap();
        assert_eq!(h.nonzero_modes(), vec![(Freq::new(vec![2, 1], vec![0, -1]), c(0.0, 2.0))]);
    }

    #[test]
    fn product_drops_out_of_band() {
        let spec = TorusSpec::new(1, 1).unwrap();
        let f = FourierScalar::mode(spec, &Freq::new(vec![1], vec![0]), c(1.0, 0.0)).unwrap();
        assert!(f.multiply(&f).unwrap().is_zero());
    }

    #[test]
    fn unit_is_identity() {
        let spec = TorusSpec::new(1, 2).unwrap();
        let one = FourierScalar::constant(spec, c(1.0, 0.0));
        let f = FourierScalar::mode(spec, &Freq::new(vec![-2], vec![1]), c(0.3, -0.7)).unwrap();
        assert_eq!(one.multiply(&f).unwrap(), f);
    }

    #[test]
    fn large_spec_uses_digit_path() {
        // 5^6 modes exceeds the table limit
        let spec = TorusSpec::new(3, 2).unwrap();
        assert!(spec.sum_table().is_none());
        let f = FourierScalar::mode(spec, &Freq::new(vec![1, 0, -2], vec![0, 0, 1]), c(1.0, 1.0)).unwrap();
        let g = FourierScalar::mode(spec, &Freq::new(vec![1, 2, 0], vec![0, 0, 1]), c(2.0, 0.0)).unwrap();
        let h = f.multiply(&g).unwrap();
        assert_eq!(h.nonzero_modes(), vec![(Freq::new(vec![2, 2, -2], vec![0, 0, 2]), c(2.0, 2.0))]);
        let g2 = FourierScalar::mode(spec, &Freq::new(vec![2, 0, 0], vec![0, 0, 0]), c(1.0, 0.0)).unwrap();
        assert!(f.multiply(&g2).unwrap().is_zero());
    }

    #[test]
    fn derivative_examples() {
        let spec = TorusSpec::new(1, 1).unwrap();
        let ex = FourierScalar::mode(spec, &Freq::new(vec![1], vec![0]), c(1.0, 0.0)).unwrap();
        let d = ex.derivative(1, DerivKind::Holomorphic).unwrap();
        assert!((d.get(&Freq::new(vec![1], vec![0])) - c(0.0, PI)).norm() < 1e-15);
        let ey = FourierScalar::mode(spec, &Freq::new(vec![0], vec![1]), c(1.0, 0.0)).unwrap();
        let d = ey.derivative(1, DerivKind::Antiholomorphic).unwrap();
        assert!((d.get(&Freq::new(vec![0], vec![1])) - c(-PI, 0.0)).norm() < 1e-15);
        let one = FourierScalar::constant(spec, c(4.0, 0.0));
        assert!(one.derivative(1, DerivKind::Holomorphic).unwrap().is_zero());
        assert!(matches!(
            one.derivative(2, DerivKind::Holomorphic),
            Err(Error::AxisOutOfRange { axis: 2, n: 1 })
        ));
    }

    #[test]
    fn zero_mode_examples() {
        let spec = TorusSpec::new(1, 1).unwrap();
        let mut f = FourierScalar::constant(spec, c(3.0, 0.0));
        f.set(&Freq::new(vec![1], vec![0]), c(2.0, 0.0)).unwrap();
        assert_eq!(f.zero_mode(), c(3.0, 0.0));
    }

    #[test]
    fn spec_mismatch_is_an_error() {
        let f = FourierScalar::zero(TorusSpec::new(1, 1).unwrap());
        let g = FourierScalar::zero(TorusSpec::new(1, 2).unwrap());
        assert!(matches!(f.multiply(&g), Err(Error::SpecMismatch(_))));
    }

    #[test]
    fn conj_matches_pointwise_conjugate() {
        // conj(c e_k) = conj(c) e_{-k}
        let spec = TorusSpec::new(1, 1).unwrap();
        let f = FourierScalar::mode(spec, &Freq::new(vec![1], vec![-1]), c(1.0, 2.0)).unwrap();
        assert_eq!(f.conj().nonzero_modes(), vec![(Freq::new(vec![-1], vec![1]), c(1.0, -2.0))]);
    }
}
