//! Per-mode Hodge theory for Δ_J: harmonic projection, Moore-Penrose inverse,
//! and orthogonal projection onto ker Δ_J.
//!
//! Δ_J is diagonal in frequency, so each mode carries a 4ⁿ × 4ⁿ matrix over the
//! basis labels. Its pseudoinverse and kernel projector are computed once per
//! spec by SVD and kept as sparse triplets.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior::{BasisLabel, PolyvectorForm};
use crate::omega::delta_j;
use crate::sample::{gaussian, random_element, Support};
use crate::torus_field::{FourierScalar, TorusSpec};

/// Singular values at or below this are treated as zero.
pub const SV_CUTOFF: f64 = 1e-12;
const DROP: f64 = 1e-14;

type Triplets = Vec<(u16, u16, Complex64)>;

struct ModeOps {
    pinv: Triplets,
    kernel: Triplets,
    singular_values: Vec<f64>,
}

pub struct Hodge {
    spec: TorusSpec,
    labels: Vec<BasisLabel>,
    modes: Vec<ModeOps>,
}

/// `gamma = Δ_J alpha + harmonic` for gamma in ker Δ_J.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeSplit {
    pub alpha: PolyvectorForm,
    pub harmonic: PolyvectorForm,
}

impl Hodge {
    /// Shared solver for a spec, built on first use.
    pub fn for_spec(spec: TorusSpec) -> Result<Arc<Hodge>> {
        static CACHE: OnceLock<Mutex<HashMap<TorusSpec, Arc<Hodge>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(h) = cache.lock().unwrap().get(&spec) {
            return Ok(h.clone());
        }
        let h = Arc::new(Self::build(spec)?);
        cache.lock().unwrap().insert(spec, h.clone());
        Ok(h)
    }

    fn build(spec: TorusSpec) -> Result<Hodge> {
        let labels = BasisLabel::all(spec.n);
        let pos: HashMap<BasisLabel, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let m = spec.mode_count();
        let dim = labels.len();
        // Δ_J applied to each label carrying every frequency at once; mode k of
        // the result is column `label` of the mode-k matrix
        let probe = FourierScalar::from_coeffs(spec, vec![Complex64::new(1.0, 0.0); m])?;
        let mut columns: Vec<Vec<(usize, Vec<Complex64>)>> = Vec::with_capacity(dim);
        for l in &labels {
            let image = delta_j(&PolyvectorForm::monomial(*l, probe.clone()))?;
            columns.push(
                image
                    .terms()
                    .iter()
                    .filter(|(_, f)| !f.is_zero())
                    .map(|(r, f)| (pos[r], f.coeffs().to_vec()))
                    .collect(),
            );
        }

        let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(16);
        let chunk = m.div_ceil(threads);
        let columns = &columns;
        let modes: Vec<ModeOps> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..m)
                .step_by(chunk)
                .map(|start| {
                    s.spawn(move || {
                        (start..(start + chunk).min(m))
                            .map(|k| mode_ops(columns, dim, k))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
        });
        Ok(Hodge { spec, labels, modes })
    }

    pub fn spec(&self) -> TorusSpec {
        self.spec
    }

    /// Singular values of the mode-k matrix of Δ_J, descending.
    pub fn singular_values(&self, k: usize) -> &[f64] {
        &self.modes[k].singular_values
    }

    fn apply(&self, x: &PolyvectorForm, pick: impl Fn(&ModeOps) -> &Triplets) -> Result<PolyvectorForm> {
        if x.spec() != self.spec {
            return Err(Error::SpecMismatch(format!("{:?} vs {:?}", x.spec(), self.spec)));
        }
        let m = self.spec.mode_count();
        let input: Vec<Option<&[Complex64]>> =
            self.labels.iter().map(|l| x.get(l).map(|f| f.coeffs())).collect();
        let zero = Complex64::new(0.0, 0.0);
        let mut live = vec![false; m];
        for col in input.iter().flatten() {
            for (k, c) in col.iter().enumerate() {
                live[k] |= *c != zero;
            }
        }
        let mut out: Vec<Vec<Complex64>> = vec![vec![zero; m]; self.labels.len()];
        for (k, ops) in self.modes.iter().enumerate() {
            if !live[k] {
                continue;
            }
            for &(r, c, v) in pick(ops) {
                if let Some(col) = input[c as usize] {
                    out[r as usize][k] += v * col[k];
                }
            }
        }
        let mut y = PolyvectorForm::zero(self.spec);
        for (l, coeffs) in self.labels.iter().zip(out) {
            if coeffs.iter().any(|c| *c != zero) {
                *y.entry(*l) = FourierScalar::from_coeffs(self.spec, coeffs)?;
            }
        }
        Ok(y)
    }

    /// Minimal-norm solution of Δ_J x = γ mode by mode; the zero mode maps to 0.
    pub fn delta_inverse(&self, x: &PolyvectorForm) -> Result<PolyvectorForm> {
        self.apply(x, |o| &o.pinv)
    }

    /// Per-mode orthogonal projection onto ker Δ_J.
    pub fn project_ker(&self, x: &PolyvectorForm) -> Result<PolyvectorForm> {
        self.apply(x, |o| &o.kernel)
    }

    pub fn hodge_split(&self, x: &PolyvectorForm, tol: f64) -> Result<HodgeSplit> {
        let residual = delta_j(x)?.max_abs();
        if residual > tol {
            return Err(Error::Domain { residual });
        }
        Ok(HodgeSplit { alpha: self.delta_inverse(x)?, harmonic: harmonic_projection(x) })
    }
}

fn mode_ops(columns: &[Vec<(usize, Vec<Complex64>)>], dim: usize, k: usize) -> ModeOps {
    let mut d = DMatrix::<Complex64>::zeros(dim, dim);
    for (c, col) in columns.iter().enumerate() {
        for (r, coeffs) in col {
            d[(*r, c)] = coeffs[k];
        }
    }
    let svd = d.clone().svd(true, true);
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let pinv = svd.pseudo_inverse(SV_CUTOFF).expect("svd computed with u and v");
    let kernel = DMatrix::<Complex64>::identity(dim, dim) - &pinv * &d;
    ModeOps { pinv: triplets(&pinv), kernel: triplets(&kernel), singular_values }
}

fn triplets(a: &DMatrix<Complex64>) -> Triplets {
    let mut out = Vec::new();
    for c in 0..a.ncols() {
        for r in 0..a.nrows() {
            let v = a[(r, c)];
            if v.norm() > DROP {
                out.push((r as u16, c as u16, v));
            }
        }
    }
    out
}

/// Keep only the zero-frequency coefficients.
pub fn harmonic_projection(x: &PolyvectorForm) -> PolyvectorForm {
    let spec = x.spec();
    x.map_coeffs(|f| FourierScalar::constant(spec, f.zero_mode()))
}

pub fn delta_inverse(x: &PolyvectorForm) -> Result<PolyvectorForm> {
    Hodge::for_spec(x.spec())?.delta_inverse(x)
}

pub fn project_ker_delta(x: &PolyvectorForm) -> Result<PolyvectorForm> {
    Hodge::for_spec(x.spec())?.project_ker(x)
}

pub fn hodge_split(x: &PolyvectorForm, tol: f64) -> Result<HodgeSplit> {
    Hodge::for_spec(x.spec())?.hodge_split(x, tol)
}

/// Δ_J(random) + random constant, rescaled to L² norm `magnitude`.
///
/// The random preimage carries two modes per label anywhere in the band.
pub fn sample_ker_delta(spec: TorusSpec, seed: u64, magnitude: f64) -> Result<PolyvectorForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_ker_delta_with(spec, &mut rng, magnitude, &BasisLabel::all(spec.n), &Support::full(spec), 2)
}

/// As [`sample_ker_delta`], drawing the preimage on `labels` (plus the labels
/// one p-degree up, so that its image lands on `labels`) with the given support.
pub fn sample_ker_delta_with<R: Rng + ?Sized>(
    spec: TorusSpec,
    rng: &mut R,
    magnitude: f64,
    labels: &[BasisLabel],
    support: &Support,
    nmodes: usize,
) -> Result<PolyvectorForm> {
    if magnitude == 0.0 {
        return Ok(PolyvectorForm::zero(spec));
    }
    let pre: Vec<BasisLabel> = BasisLabel::all(spec.n)
        .into_iter()
        .filter(|l| labels.iter().any(|t| t.q() == l.q() && t.p() + 1 == l.p()))
        .collect();
    let x = random_element(spec, rng, &pre, support, nmodes);
    let mut c = PolyvectorForm::zero(spec);
    for l in labels {
        if rng.random_bool(0.5) {
            *c.entry(*l) = FourierScalar::constant(spec, gaussian(rng));
        }
    }
    let y = delta_j(&x)?.add(&c)?.restrict_labels(labels);
    let norm = y.norm();
    if norm == 0.0 {
        return Ok(y);
    }
    Ok(y.scale_re(magnitude / norm).pruned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus_field::Freq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn harmonic_projection_keeps_constants() {
        let spec = TorusSpec::new(2, 1).unwrap();
        let l = BasisLabel::from_indices(&[1], &[2], 2).unwrap();
        let mut f = FourierScalar::constant(spec, c(2.0, 1.0));
        f.set(&Freq::new(vec![1, 0], vec![0, 1]), c(5.0, 0.0)).unwrap();
        let x = PolyvectorForm::monomial(l, f);
        let h = harmonic_projection(&x);
        assert_eq!(h.get(&l).unwrap(), &FourierScalar::constant(spec, c(2.0, 1.0)));
        assert_eq!(harmonic_projection(&h), h);
    }

    #[test]
    fn inverse_recovers_single_mode_preimage() {
        // x = e_k ∂_1 at n=1 has no kernel component at k ≠ 0
        let spec = TorusSpec::new(1, 1).unwrap();
        let k = Freq::new(vec![1], vec![-1]);
        let x = PolyvectorForm::monomial(
            BasisLabel::from_indices(&[], &[1], 1).unwrap(),
            FourierScalar::mode(spec, &k, c(0.7, -0.2)).unwrap(),
        );
        let g = delta_j(&x).unwrap();
        let back = delta_inverse(&g).unwrap();
        assert!(back.approx_eq(&x, 1e-12));
        let split = hodge_split(&g, 1e-10).unwrap();
        assert!(split.harmonic.is_zero());
        assert!(delta_j(&split.alpha).unwrap().approx_eq(&g, 1e-12));
    }

    #[test]
    fn zero_and_harmonic_inputs() {
        let spec = TorusSpec::new(2, 1).unwrap();
        assert!(delta_inverse(&PolyvectorForm::zero(spec)).unwrap().is_zero());
        let h = PolyvectorForm::monomial(
            BasisLabel::from_indices(&[1, 2], &[1], 2).unwrap(),
            FourierScalar::constant(spec, c(1.0, 1.0)),
        );
        assert!(delta_inverse(&h).unwrap().is_zero());
        assert!(project_ker_delta(&h).unwrap().approx_eq(&h, 1e-14));
        let s = hodge_split(&h, 1e-10).unwrap();
        assert!(s.alpha.is_zero());
        assert_eq!(s.harmonic, h);
    }

    #[test]
    fn split_rejects_non_closed_input() {
        let spec = TorusSpec::new(1, 1).unwrap();
        let x = PolyvectorForm::monomial(
            BasisLabel::from_indices(&[], &[1], 1).unwrap(),
            FourierScalar::mode(spec, &Freq::new(vec![1], vec![0]), c(1.0, 0.0)).unwrap(),
        );
        assert!(matches!(hodge_split(&x, 1e-10), Err(Error::Domain { .. })));
    }

    #[test]
    fn samples_are_closed_and_deterministic() {
        let spec = TorusSpec::new(2, 1).unwrap();
        let a = sample_ker_delta(spec, 7, 1.5).unwrap();
        let b = sample_ker_delta(spec, 7, 1.5).unwrap();
        assert_eq!(a, b);
        assert!((a.norm() - 1.5).abs() < 1e-12);
        assert!(delta_j(&a).unwrap().max_abs() < 1e-12);
        assert!(sample_ker_delta(spec, 7, 0.0).unwrap().is_zero());
    }

    #[test]
    fn zero_mode_matrix_vanishes() {
        let spec = TorusSpec::new(2, 1).unwrap();
        let h = Hodge::for_spec(spec).unwrap();
        assert!(h.singular_values(spec.zero_index()).iter().all(|s| *s == 0.0));
        // nonzero modes: Koszul complex, rank 2^{2n-1}, smallest nonzero σ ≥ π
        let k = spec.index_of(&Freq::new(vec![1, 0], vec![0, 0])).unwrap();
        let sv = h.singular_values(k);
        let rank = sv.iter().filter(|s| **s > SV_CUTOFF).count();
        assert_eq!(rank, 8);
        assert!(sv[rank - 1] > 3.0);
    }
}
