//! Adjointable A-module homomorphisms.
//!
//! A morphism `T: A^m → A^n` is right multiplication by an `m × n` A-matrix,
//! `(Tu)_j = Σ_i u_i t_ij`. Since every A-linear map has this form,
//! `Hom_A(A^m, A^n) ≅ ⊕_b M_{n·n_b × m·n_b}(C)` and a morphism is stored as
//! one "fiber matrix" per block, `F_b[(j, c), (i, k)] = (t_ij)_b[k][c]`.
//! Composition is the fiber matrix product, the adjoint is the conjugate
//! transpose, and pseudoinverses are taken fiberwise. Fiberwise computation
//! keeps every derived map A-linear by construction.
//!
//! [`Morphism::embed_morphism`] builds the full complex matrix on the
//! `(m·d)`-dimensional concrete space directly from the A-matrix entries; the
//! tests compare the fiberwise results against it.

use serde::Serialize;

use crate::algebra::{AlgebraElement, AlgebraSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::module::{ModuleSpec, ModuleVector};

/// Default relative singular-value cutoff for pseudoinverses and ranks.
pub const DEFAULT_SVD_CUTOFF: f64 = 1e-10;

/// Residual allowed between a morphism and its compression by the source and
/// target projections.
const COMPATIBILITY_TOL: f64 = 1e-9;

pub(crate) fn fiber_from_entries(
    spec: &AlgebraSpec,
    m: usize,
    n: usize,
    entries: &[Vec<AlgebraElement>],
) -> Result<Vec<CMat>> {
    if entries.len() != m || entries.iter().any(|row| row.len() != n) {
        return Err(Error::DimensionMismatch(format!("expected a {m} × {n} A-matrix")));
    }
    let mut blocks: Vec<CMat> = spec
        .block_sizes()
        .iter()
        .map(|&nb| CMat::zeros(n * nb, m * nb))
        .collect();
    for (i, row) in entries.iter().enumerate() {
        for (j, t) in row.iter().enumerate() {
            spec.check_same(t.spec())?;
            for (b, &nb) in spec.block_sizes().iter().enumerate() {
                let tb = t.block(b);
                for k in 0..nb {
                    for cc in 0..nb {
                        blocks[b][(j * nb + cc, i * nb + k)] = tb[(k, cc)];
                    }
                }
            }
        }
    }
    Ok(blocks)
}

pub(crate) fn entries_from_fiber(spec: &AlgebraSpec, m: usize, n: usize, blocks: &[CMat]) -> Vec<Vec<AlgebraElement>> {
    (0..m)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let bl = spec
                        .block_sizes()
                        .iter()
                        .enumerate()
                        .map(|(b, &nb)| CMat::from_fn(nb, nb, |k, cc| blocks[b][(j * nb + cc, i * nb + k)]))
                        .collect();
                    AlgebraElement::from_blocks(spec, bl).expect("shapes conform")
                })
                .collect()
        })
        .collect()
}

/// An adjointable homomorphism between two modules over the same algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Morphism {
    source: ModuleSpec,
    target: ModuleSpec,
    blocks: Vec<CMat>,
}

/// Outcome of a numerical rank decision, with the margin by which it was made.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankDecision {
    /// Concrete (complex) rank.
    pub rank: usize,
    /// Rank of each fiber matrix.
    pub block_ranks: Vec<usize>,
    pub threshold: f64,
    /// Smallest singular value kept.
    pub smallest_kept: Option<f64>,
    /// Largest singular value discarded (nonzero part of the spectrum only).
    pub largest_dropped: Option<f64>,
}

impl RankDecision {
    /// Multiplicative distance of the closest singular value to the threshold;
    /// values near 1 flag a fragile decision.
    pub fn margin(&self) -> f64 {
        let above = self.smallest_kept.map(|s| s / self.threshold).unwrap_or(f64::INFINITY);
        let below = match self.largest_dropped {
            Some(s) if s > 0.0 => self.threshold / s,
            _ => f64::INFINITY,
        };
        above.min(below)
    }
}

impl Morphism {
    /// From an A-matrix `t` with `source.rank()` rows and `target.rank()` columns.
    pub fn from_entries(source: &ModuleSpec, target: &ModuleSpec, t: &[Vec<AlgebraElement>]) -> Result<Self> {
        source.algebra().check_same(target.algebra())?;
        let blocks = fiber_from_entries(source.algebra(), source.rank(), target.rank(), t)?;
        Self::from_fiber(source, target, blocks)
    }

    /// From fiber matrices; checks shapes and that the map respects the projections.
    pub fn from_fiber(source: &ModuleSpec, target: &ModuleSpec, blocks: Vec<CMat>) -> Result<Self> {
        source.algebra().check_same(target.algebra())?;
        if blocks.len() != source.algebra().num_blocks() {
            return Err(Error::DimensionMismatch("wrong number of fiber blocks".into()));
        }
        for (b, f) in blocks.iter().enumerate() {
            let want = (target.fiber_dim(b), source.fiber_dim(b));
            if f.shape() != want {
                return Err(Error::DimensionMismatch(format!(
                    "fiber block {b} has shape {:?}, expected {want:?}",
                    f.shape()
                )));
            }
        }
        let t = Self {
            source: source.clone(),
            target: target.clone(),
            blocks,
        };
        if !(source.is_free() && target.is_free()) {
            let scale = t.op_norm().max(1.0);
            let gap = t
                .blocks
                .iter()
                .enumerate()
                .map(|(b, f)| linalg::max_abs(&(f - target.fiber_identity(b) * f * source.fiber_identity(b))))
                .fold(0.0, f64::max);
            if gap > COMPATIBILITY_TOL * scale {
                return Err(Error::InvalidProjection(format!(
                    "morphism does not respect the module projections (residual {gap:e})"
                )));
            }
        }
        Ok(t)
    }

    pub(crate) fn from_fiber_unchecked(source: &ModuleSpec, target: &ModuleSpec, blocks: Vec<CMat>) -> Self {
        Self {
            source: source.clone(),
            target: target.clone(),
            blocks,
        }
    }

    /// Scalar-coefficient morphism `(Tu)_j = Σ_i w[j][i] u_i` between free modules.
    pub fn from_scalar_matrix(source: &ModuleSpec, target: &ModuleSpec, w: &CMat) -> Result<Self> {
        if w.shape() != (target.rank(), source.rank()) {
            return Err(Error::DimensionMismatch(format!(
                "scalar matrix has shape {:?}, expected ({}, {})",
                w.shape(),
                target.rank(),
                source.rank()
            )));
        }
        let blocks = source
            .algebra()
            .block_sizes()
            .iter()
            .map(|&nb| linalg::kron_identity(w, nb))
            .collect();
        Self::from_fiber(source, target, blocks)
    }

    /// The identity of `module` (its projection, for projective modules).
    pub fn identity(module: &ModuleSpec) -> Self {
        let blocks = (0..module.algebra().num_blocks()).map(|b| module.fiber_identity(b)).collect();
        Self::from_fiber_unchecked(module, module, blocks)
    }

    pub fn zero(source: &ModuleSpec, target: &ModuleSpec) -> Self {
        let blocks = (0..source.algebra().num_blocks())
            .map(|b| CMat::zeros(target.fiber_dim(b), source.fiber_dim(b)))
            .collect();
        Self::from_fiber_unchecked(source, target, blocks)
    }

    pub fn source(&self) -> &ModuleSpec {
        &self.source
    }

    pub fn target(&self) -> &ModuleSpec {
        &self.target
    }

    pub fn algebra(&self) -> &AlgebraSpec {
        self.source.algebra()
    }

    /// Fiber matrices, one per algebra block.
    pub fn fiber(&self) -> &[CMat] {
        &self.blocks
    }

    /// The A-matrix `t_ij`.
    pub fn entries(&self) -> Vec<Vec<AlgebraElement>> {
        entries_from_fiber(self.algebra(), self.source.rank(), self.target.rank(), &self.blocks)
    }

    pub fn apply(&self, u: &ModuleVector) -> Result<ModuleVector> {
        self.source.check_same(u.module())?;
        let blocks = self.blocks.iter().zip(u.fiber()).map(|(f, x)| f * x).collect();
        Ok(ModuleVector::from_fiber(&self.target, blocks))
    }

    /// `T*` with matrix `s_ji = t_ij*`.
    pub fn adjoint(&self) -> Morphism {
        Self::from_fiber_unchecked(
            &self.target,
            &self.source,
            self.blocks.iter().map(|f| f.adjoint()).collect(),
        )
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Morphism) -> Result<Morphism> {
        inner.target.check_same(&self.source)?;
        Ok(Self::from_fiber_unchecked(
            &inner.source,
            &self.target,
            self.blocks.iter().zip(&inner.blocks).map(|(s, t)| s * t).collect(),
        ))
    }

    fn zip_with(&self, other: &Morphism, f: impl Fn(&CMat, &CMat) -> CMat) -> Result<Morphism> {
        self.source.check_same(&other.source)?;
        self.target.check_same(&other.target)?;
        Ok(Self::from_fiber_unchecked(
            &self.source,
            &self.target,
            self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        ))
    }

    pub fn add(&self, other: &Morphism) -> Result<Morphism> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Morphism) -> Result<Morphism> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, lambda: C64) -> Morphism {
        Self::from_fiber_unchecked(&self.source, &self.target, self.blocks.iter().map(|f| f * lambda).collect())
    }

    /// Operator norm (the concrete operator norm, since the concrete matrix is
    /// a direct sum of copies of the fiber matrices).
    pub fn op_norm(&self) -> f64 {
        self.blocks.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    /// `|self - other|` in operator norm.
    pub fn distance(&self, other: &Morphism) -> Result<f64> {
        Ok(self.sub(other)?.op_norm())
    }

    /// The morphism as a complex `(n·d) × (m·d)` matrix acting on the concrete
    /// coordinates of [`ModuleVector::embed_concrete`].
    pub fn embed_morphism(&self) -> CMat {
        let spec = self.algebra();
        let d = spec.concrete_dim();
        let (m, n) = (self.source.rank(), self.target.rank());
        let mut out = CMat::zeros(n * d, m * d);
        let entries = self.entries();
        for (i, row) in entries.iter().enumerate() {
            for (j, t) in row.iter().enumerate() {
                let mut off = 0;
                for (b, &nb) in spec.block_sizes().iter().enumerate() {
                    let tb = t.block(b);
                    // (u t)[r][cc] = Σ_k u[r][k] t[k][cc]
                    for r in 0..nb {
                        for cc in 0..nb {
                            for k in 0..nb {
                                out[(j * d + off + r * nb + cc, i * d + off + r * nb + k)] += tb[(k, cc)];
                            }
                        }
                    }
                    off += nb * nb;
                }
            }
        }
        out
    }

    fn sigma_max(&self) -> f64 {
        self.op_norm()
    }

    /// Moore-Penrose pseudoinverse; singular values at or below
    /// `cutoff · σ_max` (σ_max over all blocks) are treated as zero.
    pub fn pseudoinverse(&self, cutoff: f64) -> Morphism {
        let thr = linalg::rank_threshold(self.sigma_max(), cutoff);
        Self::from_fiber_unchecked(
            &self.target,
            &self.source,
            self.blocks.iter().map(|f| linalg::pinv_above(f, thr)).collect(),
        )
    }

    /// Orthogonal projection of the source onto `Ker T`, computed as `1 - T⁺T`.
    pub fn kernel_projection(&self, cutoff: f64) -> Morphism {
        let tp = self.pseudoinverse(cutoff);
        let rng = tp.compose(self).expect("pseudoinverse composes");
        Morphism::identity(&self.source).sub(&rng).expect("same modules")
    }

    /// `(P_ker T, P_rng T*)`: complementary orthogonal projections on the source.
    pub fn range_decomposition(&self, cutoff: f64) -> (Morphism, Morphism) {
        let tp = self.pseudoinverse(cutoff);
        let rng = tp.compose(self).expect("pseudoinverse composes");
        let ker = Morphism::identity(&self.source).sub(&rng).expect("same modules");
        (ker, rng)
    }

    /// Concrete rank decision with relative cutoff and its margin diagnostic.
    pub fn rank_decision(&self, cutoff: f64) -> RankDecision {
        let sizes = self.algebra().block_sizes();
        let spectra: Vec<Vec<f64>> = self.blocks.iter().map(linalg::singular_values).collect();
        let top = spectra.iter().filter_map(|s| s.first().copied()).fold(0.0, f64::max);
        let thr = linalg::rank_threshold(top, cutoff);
        let mut smallest_kept: Option<f64> = None;
        let mut largest_dropped: Option<f64> = None;
        let mut block_ranks = Vec::with_capacity(spectra.len());
        for sv in &spectra {
            let mut r = 0;
            for &s in sv {
                if s > thr && s > 0.0 {
                    r += 1;
                    smallest_kept = Some(smallest_kept.map_or(s, |v| v.min(s)));
                } else if s > 0.0 {
                    largest_dropped = Some(largest_dropped.map_or(s, |v| v.max(s)));
                }
            }
            block_ranks.push(r);
        }
        let rank = block_ranks.iter().zip(sizes).map(|(r, n)| r * n).sum();
        RankDecision {
            rank,
            block_ranks,
            threshold: thr,
            smallest_kept,
            largest_dropped,
        }
    }

    /// Number of singular values of the concrete matrix above `cutoff · σ_max`.
    pub fn concrete_rank(&self, cutoff: f64) -> usize {
        self.rank_decision(cutoff).rank
    }

    /// Residual of A-linearity `|T(a·u) - a·T(u)|`.
    pub fn a_linearity_residual(&self, a: &AlgebraElement, u: &ModuleVector) -> Result<f64> {
        let lhs = self.apply(&u.act(a)?)?;
        let rhs = self.apply(u)?.act(a)?;
        Ok(lhs.sub(&rhs)?.norm())
    }
}

/// Apply `T` at the level of concrete coordinates (oracle helper).
pub fn concrete_apply(m: &CMat, x: &[C64]) -> Vec<C64> {
    let v = nalgebra::DVector::from_column_slice(x);
    (m * v).iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn scalars() -> AlgebraSpec {
        AlgebraSpec::scalars()
    }

    fn sc(spec: &AlgebraSpec, z: C64) -> AlgebraElement {
        AlgebraElement::scalar(spec, z)
    }

    #[test]
    fn identity_and_zero_apply() {
        let s = AlgebraSpec::new(vec![2, 1]).unwrap();
        let m = ModuleSpec::free(&s, 2);
        let u = ModuleVector::generator(&m, 0).scale(c(1.0, 2.0));
        assert_eq!(Morphism::identity(&m).apply(&u).unwrap(), u);
        let z = Morphism::zero(&m, &ModuleSpec::free(&s, 3));
        assert_eq!(z.apply(&u).unwrap().norm(), 0.0);
    }

    #[test]
    fn adjoint_conjugates_scalars() {
        let s = scalars();
        let m = ModuleSpec::free(&s, 1);
        let t = Morphism::from_entries(&m, &m, &[vec![sc(&s, c(0.0, 2.0))]]).unwrap();
        let ta = t.adjoint();
        assert_eq!(ta.entries()[0][0].block(0)[(0, 0)], c(0.0, -2.0));
        assert_eq!(Morphism::identity(&m).adjoint(), Morphism::identity(&m));
    }

    #[test]
    fn entries_roundtrip_through_fiber() {
        let s = AlgebraSpec::new(vec![2]).unwrap();
        let src = ModuleSpec::free(&s, 2);
        let tgt = ModuleSpec::free(&s, 1);
        let a = AlgebraElement::from_blocks(
            &s,
            vec![CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 1.0)])],
        )
        .unwrap();
        let b = a.star();
        let t = Morphism::from_entries(&src, &tgt, &[vec![a.clone()], vec![b.clone()]]).unwrap();
        let e = t.entries();
        assert_eq!(e[0][0], a);
        assert_eq!(e[1][0], b);
    }

    #[test]
    fn scalar_pseudoinverse() {
        let s = scalars();
        let m = ModuleSpec::free(&s, 2);
        let w = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let t = Morphism::from_scalar_matrix(&m, &m, &w).unwrap();
        let tp = t.pseudoinverse(DEFAULT_SVD_CUTOFF);
        let expect = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(linalg::max_abs(&(&tp.fiber()[0] - expect)) < 1e-15);
        assert_eq!(Morphism::zero(&m, &m).pseudoinverse(1e-10), Morphism::zero(&m, &m));
    }

    #[test]
    fn projections_of_identity_and_zero() {
        let s = AlgebraSpec::new(vec![1, 2]).unwrap();
        let m = ModuleSpec::free(&s, 2);
        let id = Morphism::identity(&m);
        let zero = Morphism::zero(&m, &m);
        let (k, r) = id.range_decomposition(1e-10);
        assert!(k.op_norm() < 1e-14);
        assert!(r.distance(&id).unwrap() < 1e-14);
        let (k, r) = zero.range_decomposition(1e-10);
        assert!(k.distance(&id).unwrap() < 1e-14);
        assert!(r.op_norm() < 1e-14);
        assert!(id.kernel_projection(1e-10).op_norm() < 1e-14);
    }

    #[test]
    fn concrete_rank_basics() {
        let s = scalars();
        let m = ModuleSpec::free(&s, 1);
        assert_eq!(Morphism::identity(&m).concrete_rank(1e-10), 1);
        assert_eq!(Morphism::zero(&m, &m).concrete_rank(1e-10), 0);
        let s2 = AlgebraSpec::new(vec![2, 1]).unwrap();
        let m2 = ModuleSpec::free(&s2, 3);
        assert_eq!(Morphism::identity(&m2).concrete_rank(1e-10), 15);
    }

    #[test]
    fn rank_uses_global_sigma_max() {
        // blocks of very different scale: the small block drops below the global cutoff
        let s = AlgebraSpec::new(vec![1, 1]).unwrap();
        let m = ModuleSpec::free(&s, 1);
        let a = AlgebraElement::from_blocks(
            &s,
            vec![CMat::from_element(1, 1, c(1.0, 0.0)), CMat::from_element(1, 1, c(1e-12, 0.0))],
        )
        .unwrap();
        let t = Morphism::from_entries(&m, &m, &[vec![a]]).unwrap();
        let d = t.rank_decision(1e-10);
        assert_eq!(d.rank, 1);
        assert_eq!(d.block_ranks, vec![1, 0]);
        assert!(d.margin() > 10.0);
        let tp = t.pseudoinverse(1e-10);
        assert_eq!(tp.fiber()[1][(0, 0)], c(0.0, 0.0));
    }

    #[test]
    fn zero_dimensional_modules_compose() {
        let s = scalars();
        let zero = ModuleSpec::free(&s, 0);
        let one = ModuleSpec::free(&s, 1);
        let a = Morphism::zero(&one, &zero);
        let b = Morphism::zero(&zero, &one);
        let ba = b.compose(&a).unwrap();
        assert_eq!(ba.fiber()[0].shape(), (1, 1));
        assert_eq!(a.pseudoinverse(1e-10).fiber()[0].shape(), (1, 0));
        assert_eq!(a.kernel_projection(1e-10), Morphism::identity(&one));
    }

    #[test]
    fn rejects_map_leaving_submodule() {
        let s = scalars();
        let half = sc(&s, c(0.5, 0.0));
        let p = vec![vec![half.clone(), half.clone()], vec![half.clone(), half]];
        let proj = ModuleSpec::projective(&s, 2, &p).unwrap();
        let free = ModuleSpec::free(&s, 2);
        // the identity of A^2 does not map into the projective summand
        let w = CMat::identity(2, 2);
        assert!(matches!(
            Morphism::from_scalar_matrix(&free, &proj, &w),
            Err(Error::InvalidProjection(_))
        ));
        assert!(Morphism::from_scalar_matrix(&proj, &proj, &proj.fiber_identity(0)).is_ok());
    }
}
