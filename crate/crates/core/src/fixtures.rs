//! Seeded random problem generators shared by tests, the CLI and benches.
//!
//! Generators have the form `g(λ, z) = s(λ) p(z, λ) u(λ)`: `p` a product of
//! Blaschke numerators `z - a λ^e` (`|a| ≤ 0.5`) and outer factors `1 - b z`
//! (`|b| ≤ 0.5`), `u(λ) = ε_σ + 0.3 λ w` with `‖w‖₁ ≤ 1`, and `s` either 1
//! or the even-fiber indicator `(1 + λ^{n/2})/2`. Distinct generators use
//! distinct `σ`, so their `u` stay independent on every fiber.

use std::collections::BTreeMap;

use faer::{c64, Mat};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{FiberVector, LaurentPolyField, LaurentTerm};
use crate::lattice::TruncationLattice;
use crate::subspace::{BaseRange, FiberSubspace};

pub type FixtureRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FixtureRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const BLASCHKE_RADIUS: f64 = 0.5;
const OUTER_RADIUS: f64 = 0.5;
const MIX: f64 = 0.3;

fn disc_point(rng: &mut FixtureRng, radius: f64) -> c64 {
    let r = radius * rng.random::<f64>().sqrt();
    let t = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    c64::new(r * t.cos(), r * t.sin())
}

pub fn random_complex(rng: &mut FixtureRng) -> c64 {
    c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Polynomial in `(λ, z)` as `(λ power, z power) ↦ coefficient`.
type Bivariate = BTreeMap<(i64, usize), c64>;

fn mul(a: &Bivariate, b: &Bivariate) -> Bivariate {
    let mut out = Bivariate::new();
    for (&(la, za), &ca) in a {
        for (&(lb, zb), &cb) in b {
            *out.entry((la + lb, za + zb)).or_insert(c64::new(0.0, 0.0)) += ca * cb;
        }
    }
    out
}

/// Knobs for [`random_generators`].
#[derive(Debug, Clone, Copy)]
pub struct GeneratorShape {
    pub max_generators: usize,
    pub max_blaschke: usize,
    pub max_outer: usize,
    /// Leading power of `z` (0 gives full-Hardy-compatible seeds).
    pub z_power: usize,
    /// Probability that a generator carries the even-fiber indicator.
    pub indicator_probability: f64,
}

impl Default for GeneratorShape {
    fn default() -> Self {
        GeneratorShape { max_generators: usize::MAX, max_blaschke: 2, max_outer: 2, z_power: 0, indicator_probability: 0.25 }
    }
}

/// Random unshifted generators (at most `k`, degrees at most `n_z / 4`).
pub fn random_generators(rng: &mut FixtureRng, lat: &TruncationLattice, shape: &GeneratorShape) -> Vec<LaurentPolyField> {
    let k = lat.k;
    let count = rng.random_range(1..=k.min(shape.max_generators).max(1));
    let mut coords: Vec<usize> = (0..k).collect();
    coords.shuffle(rng);
    let max_degree = (lat.n_z / 4).max(shape.z_power);
    let mut gens = Vec::with_capacity(count);
    for &sigma in coords.iter().take(count) {
        let mut p = Bivariate::from([((0, shape.z_power), c64::new(1.0, 0.0))]);
        let mut degree = shape.z_power;
        let blaschke = rng.random_range(0..=shape.max_blaschke);
        let outer = rng.random_range(0..=shape.max_outer);
        for _ in 0..blaschke {
            if degree >= max_degree {
                break;
            }
            let a = disc_point(rng, BLASCHKE_RADIUS);
            let e = rng.random_range(0..=1i64);
            p = mul(&p, &Bivariate::from([((0, 1), c64::new(1.0, 0.0)), ((e, 0), -a)]));
            degree += 1;
        }
        for _ in 0..outer {
            if degree >= max_degree {
                break;
            }
            let b = disc_point(rng, OUTER_RADIUS);
            p = mul(&p, &Bivariate::from([((0, 0), c64::new(1.0, 0.0)), ((0, 1), -b)]));
            degree += 1;
        }
        if lat.n_lambda.is_multiple_of(2) && lat.n_lambda > 1 && rng.random::<f64>() < shape.indicator_probability {
            let half = c64::new(0.5, 0.0);
            p = mul(&p, &Bivariate::from([((0, 0), half), ((lat.n_lambda as i64 / 2, 0), half)]));
        }
        let mut w: Vec<c64> = (0..k).map(|_| random_complex(rng)).collect();
        let l1: f64 = w.iter().map(|c| c.norm()).sum::<f64>().max(1.0);
        w.iter_mut().for_each(|c| *c /= l1);
        let mut terms = Vec::new();
        for (&(lp, zp), &c) in &p {
            terms.push(LaurentTerm { lambda_power: lp, z_power: zp, coord: sigma, coeff: c });
            for (i, wi) in w.iter().enumerate() {
                terms.push(LaurentTerm { lambda_power: lp + 1, z_power: zp, coord: i, coeff: c * wi * MIX });
            }
        }
        gens.push(LaurentPolyField::new(terms));
    }
    gens
}

/// Every band shift `z^j g` with `j ≤ n_z - 1 - deg g`.
pub fn band_closure(gens: &[LaurentPolyField], lat: &TruncationLattice) -> Vec<LaurentPolyField> {
    let mut out = Vec::new();
    for g in gens {
        let deg = g.z_degree().unwrap_or(0);
        for j in 0..lat.n_z.saturating_sub(deg) {
            out.push(g.shifted(j));
        }
    }
    out
}

/// A random `Ŝ`-invariant problem: band closure of [`random_generators`].
pub fn random_problem(seed: u64, lat: &TruncationLattice) -> Vec<LaurentPolyField> {
    let mut r = rng(seed);
    band_closure(&random_generators(&mut r, lat, &GeneratorShape::default()), lat)
}

/// An `Ŝ`-invariant problem whose seeds carry the factor `z^power`, so the
/// generated range is not full-Hardy.
pub fn non_full_hardy_problem(seed: u64, lat: &TruncationLattice, power: usize) -> Vec<LaurentPolyField> {
    let mut r = rng(seed);
    let shape = GeneratorShape { z_power: power.max(1), indicator_probability: 0.0, ..GeneratorShape::default() };
    band_closure(&random_generators(&mut r, lat, &shape), lat)
}

/// Unitary `k × k` matrix from the QR factor of a random matrix.
pub fn random_unitary(rng: &mut FixtureRng, k: usize) -> Mat<c64> {
    let a = Mat::from_fn(k, k, |_, _| random_complex(rng));
    a.qr().compute_Q()
}

/// Random base range: rank uniform in `0..=k` per fiber, random subspace.
pub fn random_base(rng: &mut FixtureRng, lat: &TruncationLattice) -> BaseRange {
    let fibers = (0..lat.n_lambda)
        .map(|_| {
            let n = rng.random_range(0..=lat.k);
            let q = random_unitary(rng, lat.k);
            FiberSubspace::new_unchecked(q.as_ref().subcols(0, n).to_owned())
        })
        .collect();
    BaseRange::from_fibers(*lat, fibers).expect("fixture base matches its lattice")
}

pub fn random_fiber_vector(rng: &mut FixtureRng, n_z: usize, k: usize) -> FiberVector {
    FiberVector::from_coeffs(n_z, k, (0..n_z * k).map(|_| random_complex(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::eval_field;
    use crate::range::range_from_generators;
    use crate::shift::is_s_invariant;

    #[test]
    fn problems_are_reproducible_and_invariant() {
        let lat = TruncationLattice::new(8, 16, 3).unwrap();
        for seed in 0..6 {
            let a = random_problem(seed, &lat);
            assert_eq!(a, random_problem(seed, &lat));
            let gens: Vec<_> = a.iter().map(|p| eval_field(p, &lat).unwrap()).collect();
            let j = range_from_generators(&gens, &lat).unwrap();
            assert!(is_s_invariant(&j).unwrap().0, "seed {seed}");
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut r = rng(7);
        let q = random_unitary(&mut r, 4);
        let g = q.adjoint() * &q;
        let id = Mat::<c64>::identity(4, 4);
        assert!((&g - &id).norm_l2() < 1e-13);
    }
}
