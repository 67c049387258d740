//! Seeded random elements for property checks and search starts.

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::exterior::{BasisLabel, PolyvectorForm};
use crate::torus_field::{FourierScalar, Freq, TorusSpec};

/// Frequencies allowed in a random scalar: the listed coordinate slots
/// (0..n for a, n..2n for b) range over [-radius, radius], the rest are 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    pub coords: Vec<usize>,
    pub radius: i32,
}

impl Support {
    pub fn full(spec: TorusSpec) -> Self {
        Support { coords: (0..2 * spec.n).collect(), radius: spec.k as i32 }
    }

    pub fn constant() -> Self {
        Support { coords: Vec::new(), radius: 0 }
    }
}

/// Supports for `count` factors such that every partial sum of their
/// frequencies stays within the cutoff.
pub fn in_band_supports(spec: TorusSpec, count: usize) -> Vec<Support> {
    let k = spec.k as i32;
    if k == 0 {
        return vec![Support::constant(); count];
    }
    if k as usize >= count {
        let r = k / count as i32;
        return vec![Support { coords: (0..2 * spec.n).collect(), radius: r }; count];
    }
    let mut out = vec![Support { coords: Vec::new(), radius: k }; count];
    for c in 0..2 * spec.n {
        out[c % count].coords.push(c);
    }
    out
}

/// Complex normal with unit variance in each of re and im.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_freq<R: Rng + ?Sized>(spec: TorusSpec, rng: &mut R, support: &Support) -> Freq {
    let mut f = Freq::zero(spec.n);
    for &c in &support.coords {
        let v = rng.random_range(-support.radius..=support.radius);
        if c < spec.n {
            f.a[c] = v;
        } else {
            f.b[c - spec.n] = v;
        }
    }
    f
}

pub fn random_scalar<R: Rng + ?Sized>(
    spec: TorusSpec,
    rng: &mut R,
    support: &Support,
    nmodes: usize,
) -> FourierScalar {
    let mut f = FourierScalar::zero(spec);
    for _ in 0..nmodes {
        let k = random_freq(spec, rng, support);
        let c = f.get(&k) + gaussian(rng);
        f.set(&k, c).expect("support lies within the cutoff");
    }
    f
}

pub fn random_element<R: Rng + ?Sized>(
    spec: TorusSpec,
    rng: &mut R,
    labels: &[BasisLabel],
    support: &Support,
    nmodes: usize,
) -> PolyvectorForm {
    let mut x = PolyvectorForm::zero(spec);
    for l in labels {
        *x.entry(*l) = random_scalar(spec, rng, support, nmodes);
    }
    x
}

/// Up to `nlabels` distinct random labels of shifted degree `degree`.
pub fn random_labels<R: Rng + ?Sized>(n: usize, rng: &mut R, degree: i32, nlabels: usize) -> Vec<BasisLabel> {
    let pool: Vec<BasisLabel> = BasisLabel::all(n).into_iter().filter(|l| l.degree() == degree).collect();
    let mut picked: Vec<BasisLabel> = pool.choose_multiple(rng, nlabels.min(pool.len())).copied().collect();
    picked.sort();
    picked
}

pub fn random_homogeneous<R: Rng + ?Sized>(
    spec: TorusSpec,
    rng: &mut R,
    degree: i32,
    nlabels: usize,
    support: &Support,
    nmodes: usize,
) -> PolyvectorForm {
    let labels = random_labels(spec.n, rng, degree, nlabels);
    random_element(spec, rng, &labels, support, nmodes)
}

pub fn random_degree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> i32 {
    rng.random_range(-1..=(2 * n as i32 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn supports_keep_sums_in_band() {
        for (n, k) in [(1, 1), (2, 1), (3, 1), (1, 3), (2, 2)] {
            let spec = TorusSpec::new(n, k).unwrap();
            let sup = in_band_supports(spec, 3);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..50 {
                let fs: Vec<Freq> = sup.iter().map(|s| random_freq(spec, &mut rng, s)).collect();
                for c in 0..n {
                    let sa: i32 = fs.iter().map(|f| f.a[c].abs()).sum();
                    let sb: i32 = fs.iter().map(|f| f.b[c].abs()).sum();
                    assert!(sa <= k as i32 && sb <= k as i32);
                }
            }
        }
    }

    #[test]
    fn homogeneous_has_requested_degree() {
        let spec = TorusSpec::new(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in -1..=5 {
            let x = random_homogeneous(spec, &mut rng, d, 3, &Support::full(spec), 2);
            assert_eq!(x.homogeneous_degree(), Some(d));
        }
    }
}
