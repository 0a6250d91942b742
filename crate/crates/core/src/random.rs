//! Seeded generators for algebra elements, modules, morphisms, complexes,
//! symbol samples and torus sections.
//!
//! Every instance draws from its own ChaCha stream keyed by
//! `(seed, suite, instance)`, so suites give the same instances in any
//! evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraElement, AlgebraSpec};
use crate::complex::ChainComplex;
use crate::error::Result;
use crate::hom::Morphism;
use crate::linalg::{self, c, CMat, C64};
use crate::module::{ModuleSpec, ModuleVector};
use crate::symbol::SymbolSample;
use crate::torus::{TorusGeometry, TorusSection};

/// Block structures drawn by the random suites.
pub const SUITE_ALGEBRAS: [&[usize]; 5] = [&[1], &[2], &[1, 2], &[2, 2], &[3]];

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Independent stream for one instance of one suite.
pub fn instance_rng(seed: u64, suite: &str, instance: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&fnv1a(suite).to_le_bytes());
    key[16..24].copy_from_slice(&instance.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary from the phase-corrected QR of a Gaussian matrix.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    let qr = gaussian_matrix(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|x| *x *= ph);
    }
    q
}

/// `U diag(s) V^*` with Haar `U, V`.
pub fn matrix_with_singular_values<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, s: &[f64]) -> CMat {
    assert!(s.len() <= rows.min(cols));
    let u = haar_unitary(rng, rows);
    let v = haar_unitary(rng, cols);
    let mut d = CMat::zeros(rows, cols);
    for (i, &x) in s.iter().enumerate() {
        d[(i, i)] = c(x, 0.0);
    }
    u * d * v.adjoint()
}

/// Complex number with modulus in `[0.5, 2]` and uniform phase.
pub fn nonzero_scalar<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..std::f64::consts::TAU))
}

pub fn suite_algebra<R: Rng + ?Sized>(rng: &mut R) -> AlgebraSpec {
    AlgebraSpec::new(SUITE_ALGEBRAS[rng.random_range(0..SUITE_ALGEBRAS.len())].to_vec()).expect("valid block list")
}

pub fn element<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec) -> AlgebraElement {
    let blocks = spec.block_sizes().iter().map(|&n| gaussian_matrix(rng, n, n)).collect();
    AlgebraElement::from_blocks(spec, blocks).expect("shapes follow the block sizes")
}

pub fn vector<R: Rng + ?Sized>(rng: &mut R, module: &ModuleSpec) -> ModuleVector {
    let blocks = (0..module.algebra().num_blocks())
        .map(|b| {
            let p = module.fiber_identity(b);
            let nb = module.algebra().block_sizes()[b];
            &p * gaussian_matrix(rng, p.nrows(), nb)
        })
        .collect();
    ModuleVector::from_fiber(module, blocks)
}

/// `p·A^rank` with a random projection whose block ranks are uniform in `0..=rank·n_b`.
pub fn projective_module<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec, rank: usize) -> ModuleSpec {
    let fiber = spec
        .block_sizes()
        .iter()
        .map(|&nb| {
            let dim = rank * nb;
            let k = rng.random_range(0..=dim);
            let u = haar_unitary(rng, dim);
            let q = u.columns(0, k).clone_owned();
            &q * q.adjoint()
        })
        .collect();
    ModuleSpec::projective_from_fiber(spec, rank, fiber).expect("orthogonal projections")
}

/// Free module of rank `0..=max_rank`, projective with probability 1/4.
pub fn module<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec, max_rank: usize) -> ModuleSpec {
    let rank = rng.random_range(0..=max_rank);
    if rank > 0 && rng.random_bool(0.25) {
        projective_module(rng, spec, rank)
    } else {
        ModuleSpec::free(spec, rank)
    }
}

fn range_frame(module: &ModuleSpec, b: usize) -> CMat {
    let p = module.fiber_identity(b);
    if module.is_free() {
        p
    } else {
        linalg::range_basis_above(&p, 0.5)
    }
}

fn singular_values<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(0.5..2.0)).collect()
}

/// Random morphism with per-block rank uniform in its admissible range and
/// nonzero singular values in `[0.5, 2]`.
pub fn morphism<R: Rng + ?Sized>(rng: &mut R, source: &ModuleSpec, target: &ModuleSpec) -> Morphism {
    let blocks = (0..source.algebra().num_blocks())
        .map(|b| {
            let (qs, qt) = (range_frame(source, b), range_frame(target, b));
            let r = rng.random_range(0..=qs.ncols().min(qt.ncols()));
            let s = singular_values(rng, r);
            let core = matrix_with_singular_values(rng, qt.ncols(), qs.ncols(), &s);
            qt * core * qs.adjoint()
        })
        .collect();
    Morphism::from_fiber(source, target, blocks).expect("compressed by the module projections")
}

/// Shape limits for [`complex`].
#[derive(Clone, Copy, Debug)]
pub struct ComplexShape {
    pub max_len: usize,
    pub max_rank: usize,
}

impl Default for ComplexShape {
    fn default() -> Self {
        Self { max_len: 5, max_rank: 4 }
    }
}

/// A complex together with the smallest nonzero singular value of each differential.
#[derive(Clone, Debug)]
pub struct GeneratedComplex {
    pub complex: ChainComplex,
    pub min_singular: Vec<f64>,
}

/// Builds differentials through a decomposition `B_i ⊕ H_i ⊕ C_i` of every
/// fiber block, with `D_i` an isomorphism `C_i → B_{i+1}` and zero elsewhere,
/// so `D_{i+1}D_i = 0` holds by orthogonality. `dims(b, i, max)` picks
/// `dim C_i` in block `b`.
pub fn complex_on_modules<R: Rng + ?Sized>(
    rng: &mut R,
    modules: Vec<ModuleSpec>,
    mut dims: impl FnMut(&mut R, usize, usize, usize) -> usize,
) -> Result<GeneratedComplex> {
    let spec = modules[0].algebra().clone();
    let len = modules.len();
    let mut fibers: Vec<Vec<CMat>> = vec![Vec::new(); len.saturating_sub(1)];
    let mut min_singular = vec![f64::INFINITY; len.saturating_sub(1)];
    for b in 0..spec.num_blocks() {
        let frames: Vec<CMat> = modules.iter().map(|m| range_frame(m, b)).collect();
        let k: Vec<usize> = frames.iter().map(|f| f.ncols()).collect();
        let frames: Vec<CMat> = frames
            .iter()
            .zip(&k)
            .map(|(f, &ki)| f * haar_unitary(rng, ki))
            .collect();
        let mut prev = 0;
        for i in 0..len - 1 {
            let max = (k[i] - prev).min(k[i + 1]);
            let ci = dims(rng, b, i, max).min(max);
            let s = singular_values(rng, ci);
            if let Some(&lo) = s.iter().min_by(|a, b| a.total_cmp(b)) {
                min_singular[i] = min_singular[i].min(lo);
            }
            let g = matrix_with_singular_values(rng, ci, ci, &s);
            let src = frames[i].columns(k[i] - ci, ci);
            let dst = frames[i + 1].columns(0, ci);
            fibers[i].push(dst * g * src.adjoint());
            prev = ci;
        }
    }
    let differentials = fibers
        .into_iter()
        .enumerate()
        .map(|(i, f)| Morphism::from_fiber(&modules[i], &modules[i + 1], f))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratedComplex {
        complex: ChainComplex::new(modules, differentials)?,
        min_singular,
    })
}

/// Random complex over `spec` with 1 to `max_len` modules of rank at most `max_rank`.
pub fn complex<R: Rng + ?Sized>(rng: &mut R, spec: &AlgebraSpec, shape: ComplexShape) -> ChainComplex {
    let len = rng.random_range(1..=shape.max_len);
    let modules = (0..len).map(|_| module(rng, spec, shape.max_rank)).collect();
    complex_on_modules(rng, modules, |rng, _, _, max| {
        if rng.random_bool(0.5) {
            max
        } else {
            rng.random_range(0..=max)
        }
    })
    .expect("generated differentials are compatible")
    .complex
}

/// Random complex over a randomly drawn suite algebra.
pub fn suite_complex<R: Rng + ?Sized>(rng: &mut R, shape: ComplexShape) -> ChainComplex {
    let spec = suite_algebra(rng);
    complex(rng, &spec, shape)
}

/// Vector in `Ker D_i`.
pub fn cocycle<R: Rng + ?Sized>(rng: &mut R, cx: &ChainComplex, i: usize, cutoff: f64) -> Result<ModuleVector> {
    let v = vector(rng, cx.module(i)?);
    let p = cx.outgoing(i).kernel_projection(cutoff);
    // an empty kernel yields exactly zero rather than rounding noise
    if p.op_norm() < 0.5 {
        return Ok(ModuleVector::zero(cx.module(i)?));
    }
    p.apply(&v)
}

/// An exact two-step sample `U → V → W` with its singular-value gap.
#[derive(Clone, Debug)]
pub struct ExactSample {
    pub sample: SymbolSample,
    /// Smallest nonzero singular value of each map.
    pub min_singular: Vec<f64>,
}

impl ExactSample {
    /// Oracle margin at degree `i`: the smaller gap of the adjacent maps.
    pub fn gap(&self, i: usize) -> f64 {
        let before = if i > 0 { self.min_singular[i - 1] } else { f64::INFINITY };
        let after = self.min_singular.get(i).copied().unwrap_or(f64::INFINITY);
        before.min(after)
    }
}

/// Exact sample over a suite algebra: fibers `A^{c_0}, A^{c_0+c_1}, A^{c_1}`.
pub fn exact_sample<R: Rng + ?Sized>(rng: &mut R, tag: &str) -> ExactSample {
    let spec = suite_algebra(rng);
    let c0 = rng.random_range(1..=2);
    let c1 = rng.random_range(1..=2);
    let ranks = [c0, c0 + c1, c1];
    let modules = ranks.iter().map(|&r| ModuleSpec::free(&spec, r)).collect();
    let sizes = spec.block_sizes().to_vec();
    let gen = complex_on_modules(rng, modules, |_, b, i, _| [c0, c1][i] * sizes[b]).expect("exact by construction");
    ExactSample {
        sample: SymbolSample::from_complex(tag, gen.complex),
        min_singular: gen.min_singular,
    }
}

/// Uniform point on the unit sphere in `ℝ^n`.
pub fn unit_covector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Section with independent Gaussian coefficients on every mode.
pub fn section<R: Rng + ?Sized>(rng: &mut R, geometry: &TorusGeometry, degree: usize) -> Result<TorusSection> {
    let m = geometry.local_module(degree);
    let coeffs = (0..geometry.mode_count()).map(|_| vector(rng, &m)).collect();
    TorusSection::from_coefficients(geometry, degree, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_keyed() {
        let a: u64 = instance_rng(7, "suite", 3).random();
        let b: u64 = instance_rng(7, "suite", 3).random();
        let c1: u64 = instance_rng(7, "suite", 4).random();
        let d: u64 = instance_rng(7, "other", 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c1);
        assert_ne!(a, d);
    }

    #[test]
    fn haar_is_unitary() {
        let mut rng = instance_rng(1, "haar", 0);
        for n in 0..5 {
            let u = haar_unitary(&mut rng, n);
            let err = &u.adjoint() * &u - CMat::identity(n, n);
            assert!(linalg::max_abs(&err) < 1e-12);
        }
    }

    #[test]
    fn prescribed_singular_values() {
        let mut rng = instance_rng(2, "svals", 0);
        let m = matrix_with_singular_values(&mut rng, 4, 3, &[1.5, 0.7]);
        let s = linalg::singular_values(&m);
        assert!((s[0] - 1.5).abs() < 1e-12 && (s[1] - 0.7).abs() < 1e-12 && s[2] < 1e-12);
    }

    #[test]
    fn exact_samples_are_exact() {
        for i in 0..20 {
            let mut rng = instance_rng(3, "exact", i);
            let ex = exact_sample(&mut rng, "t");
            let chk = ex.sample.exactness_check(1, 1e-10).unwrap();
            assert!(chk.exact);
            assert!((chk.margin - ex.gap(1)).abs() < 1e-9);
        }
    }
}
