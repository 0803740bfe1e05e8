//! Dense brute-force projectors built with nalgebra from raw vector stacks.
//! Nothing here calls into the library's own linear algebra.

#![allow(dead_code)]

use hardyfiber::{c64, MatRef};
use nalgebra::{Complex, DMatrix};

pub type CMat = DMatrix<Complex<f64>>;

pub fn to_na(m: MatRef<'_, c64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| Complex::new(m[(i, j)].re, m[(i, j)].im))
}

pub fn from_columns(rows: usize, cols: &[Vec<c64>]) -> CMat {
    CMat::from_fn(rows, cols.len(), |i, j| Complex::new(cols[j][i].re, cols[j][i].im))
}

/// `G (Gᴴ G)⁺ Gᴴ`; Gram eigenvalues below `1e-10 · scale` count as zero,
/// where `scale` is the largest Gram diagonal of this stack or `floor`
/// (pass the field-wide value so numerically zero fibers get rank 0).
pub fn gram_projector_scaled(g: &CMat, floor: f64) -> CMat {
    let d = g.nrows();
    if g.ncols() == 0 {
        return CMat::zeros(d, d);
    }
    let gram = g.adjoint() * g;
    let scale = gram.diagonal().iter().map(|x| x.re).fold(floor, f64::max);
    if scale == 0.0 {
        return CMat::zeros(d, d);
    }
    let eig = gram.symmetric_eigen();
    let inv = eig.eigenvalues.map(|l| if l > 1e-10 * scale { 1.0 / l } else { 0.0 });
    let v = &eig.eigenvectors;
    let pinv = v * CMat::from_diagonal(&inv.map(|x| Complex::new(x, 0.0))) * v.adjoint();
    g * pinv * g.adjoint()
}

pub fn gram_projector(g: &CMat) -> CMat {
    gram_projector_scaled(g, 0.0)
}

/// Largest column norm squared over all stacks.
pub fn field_scale(stacks: &[CMat]) -> f64 {
    stacks.iter().flat_map(|s| s.column_iter().map(|c| c.norm_squared()).collect::<Vec<_>>()).fold(0.0, f64::max)
}

/// Projector onto the span of orthonormal columns.
pub fn frame_projector(frame: MatRef<'_, c64>) -> CMat {
    let q = to_na(frame);
    &q * q.adjoint()
}

/// Dense truncated shift on `C^(n_z k)`.
pub fn shift_matrix(n_z: usize, k: usize) -> CMat {
    let d = n_z * k;
    CMat::from_fn(d, d, |r, c| if r == c + k { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) })
}

/// Orthonormal basis of the null space of `a` (singular values below `tol`).
pub fn null_basis(a: &CMat, tol: f64) -> CMat {
    let n = a.ncols();
    // Pad to a square matrix so the SVD returns a full right basis.
    let mut sq = CMat::zeros(n.max(a.nrows()), n);
    sq.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors");
    let cols: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= tol).collect();
    CMat::from_fn(n, cols.len(), |r, c| vt[(cols[c], r)].conj())
}

/// Projector onto `J ⊖ S(J ∩ H_{n_z-1})` for the projector `p` onto `J`.
pub fn wandering_projector(p: &CMat, n_z: usize, k: usize) -> CMat {
    let d = n_z * k;
    let low = d - k;
    // x ∈ H_{n_z-1} with (I - P) x = 0.
    let leak = CMat::identity(d, d) - p;
    let restricted = leak.columns(0, low).into_owned();
    let nb = null_basis(&restricted, 1e-8);
    let mut embedded = CMat::zeros(d, nb.ncols());
    embedded.view_mut((0, 0), (low, nb.ncols())).copy_from(&nb);
    let shifted = shift_matrix(n_z, k) * embedded;
    p - gram_projector(&shifted)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

use hardyfiber::field::{eval_field, FiberVector, FiberedField};
use hardyfiber::fixtures;
use hardyfiber::full_hardy::project_pointwise;
use hardyfiber::lattice::TruncationLattice;
use hardyfiber::range::{complement_range, range_from_generators};
use hardyfiber::subspace::RangeFunction;
use hardyfiber::wandering::wandering_range;

/// Largest disagreement per computation family on one random tiny instance.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleErrors {
    pub range: f64,
    pub complement: f64,
    pub wandering: f64,
    pub projection: f64,
}

impl OracleErrors {
    pub fn max(&self) -> f64 {
        self.range.max(self.complement).max(self.wandering).max(self.projection)
    }
}

fn stack(gens: &[FiberedField], m: usize, d: usize) -> CMat {
    let cols: Vec<Vec<c64>> = gens.iter().map(|g| g.fiber(m).coeffs().to_vec()).collect();
    from_columns(d, &cols)
}

fn vec_na(v: &FiberVector) -> CMat {
    from_columns(v.coeffs().len(), &[v.coeffs().to_vec()])
}

/// Raw generators (with one exact linear dependency) and a band-closed
/// problem on the lattice `(8, 4, 2)`, compared against dense brute force.
pub fn brute_force_instance(seed: u64) -> OracleErrors {
    let lat = TruncationLattice::new(8, 4, 2).unwrap();
    let d = lat.ambient();
    let mut rng = fixtures::rng(seed);
    let count = 1 + (seed as usize % 4);
    let mut raw: Vec<FiberedField> = (0..count)
        .map(|_| {
            let fibers = (0..lat.n_lambda).map(|_| fixtures::random_fiber_vector(&mut rng, lat.n_z, lat.k)).collect();
            FiberedField::from_fibers(lat, fibers).unwrap()
        })
        .collect();
    if count >= 2 {
        let dep = raw[0].map(|m, v| {
            let w = raw[1].fiber(m);
            FiberVector::from_coeffs(v.n_z(), v.k(), v.coeffs().iter().zip(w.coeffs()).map(|(a, b)| a - *b * 0.5).collect())
        });
        raw.push(dep);
    }
    let closed: Vec<FiberedField> =
        fixtures::random_problem(seed, &lat).iter().map(|p| eval_field(p, &lat).unwrap()).collect();

    let mut err = OracleErrors::default();
    let id = CMat::identity(d, d);
    for gens in [&raw, &closed] {
        let j = range_from_generators(gens, &lat).unwrap();
        let jc = complement_range(&j).unwrap();
        let stacks: Vec<CMat> = (0..lat.n_lambda).map(|m| stack(gens, m, d)).collect();
        let scale = field_scale(&stacks);
        for m in 0..lat.n_lambda {
            let p = gram_projector_scaled(&stacks[m], scale);
            err.range = err.range.max(max_abs(&(frame_projector(j.fiber(m).frame()) - &p)));
            err.complement = err.complement.max(max_abs(&(frame_projector(jc.fiber(m).frame()) - (&id - &p))));
            let v = fixtures::random_fiber_vector(&mut rng, lat.n_z, lat.k);
            err.projection = err.projection.max(max_abs(&(vec_na(&j.project(m, &v)) - &p * vec_na(&v))));
        }
    }

    let j = range_from_generators(&closed, &lat).unwrap();
    let jr = wandering_range(&j).unwrap();
    let stacks: Vec<CMat> = (0..lat.n_lambda).map(|m| stack(&closed, m, d)).collect();
    let scale = field_scale(&stacks);
    for m in 0..lat.n_lambda {
        let p = gram_projector_scaled(&stacks[m], scale);
        let pr = wandering_projector(&p, lat.n_z, lat.k);
        err.wandering = err.wandering.max(max_abs(&(frame_projector(jr.fiber(m).frame()) - pr)));
    }

    let base = fixtures::random_base(&mut rng, &lat);
    for m in 0..lat.n_lambda {
        let pk = frame_projector(base.fiber(m).frame());
        let mut lifted = CMat::zeros(d, d);
        for b in 0..lat.n_z {
            lifted.view_mut((b * lat.k, b * lat.k), (lat.k, lat.k)).copy_from(&pk);
        }
        let v = fixtures::random_fiber_vector(&mut rng, lat.n_z, lat.k);
        let got = project_pointwise(&v, base.fiber(m)).unwrap();
        err.projection = err.projection.max(max_abs(&(vec_na(&got) - lifted * vec_na(&v))));
    }
    err
}

/// `RangeFunction` projector of fiber `m`, for tests that need it directly.
pub fn range_projector(j: &RangeFunction, m: usize) -> CMat {
    frame_projector(j.fiber(m).frame())
}
