//! Finitely generated projective left Hilbert A-modules `p·A^m`.
//!
//! A vector `u = (u_1, ..., u_m)` is stored per algebra block `b` as a
//! `(m·n_b) × n_b` matrix `X_b` with `X_b[(i, k), r] = (u_i)_b[r][k]`, i.e.
//! column `r` collects row `r` of every component. In this layout a morphism
//! acts by left multiplication with its fiber matrix, the left action of `a`
//! is `X_b ↦ X_b a_bᵀ`, and the A-valued product is `(u, v)_b = (X_b^† Y_b)ᵀ`.
//!
//! Convention: `(u, v) = Σ_i v_i u_i^*`, conjugate-linear in `u`. Then
//! `(a·u, v) = (u, v) a^*` and `(u, a·v) = a (u, v)`.

use std::fmt;
use std::sync::Arc;

use crate::algebra::{AlgebraElement, AlgebraSpec};
use crate::error::{Error, Result};
use crate::hom::{entries_from_fiber, fiber_from_entries};
use crate::linalg::{self, c, CMat, C64};

/// Residual allowed when checking that a projection is self-adjoint and idempotent.
pub const PROJECTION_TOL: f64 = 1e-9;

#[derive(PartialEq)]
struct ModuleInner {
    algebra: AlgebraSpec,
    rank: usize,
    /// Fiber matrices of the projection, one `(m·n_b)²` matrix per block.
    projection: Option<Vec<CMat>>,
}

/// The module `A^m`, or its direct summand `p·A^m` when a projection is present.
#[derive(Clone)]
pub struct ModuleSpec(Arc<ModuleInner>);

impl PartialEq for ModuleSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for ModuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ModuleSpec {{ algebra: {}, rank: {}, projective: {} }}",
            self.0.algebra,
            self.0.rank,
            self.0.projection.is_some()
        )
    }
}

impl ModuleSpec {
    /// The free module `A^rank`.
    pub fn free(algebra: &AlgebraSpec, rank: usize) -> Self {
        Self(Arc::new(ModuleInner {
            algebra: algebra.clone(),
            rank,
            projection: None,
        }))
    }

    /// `p·A^rank` for a self-adjoint idempotent A-matrix `p` acting on the right.
    pub fn projective(algebra: &AlgebraSpec, rank: usize, p: &[Vec<AlgebraElement>]) -> Result<Self> {
        let fiber = fiber_from_entries(algebra, rank, rank, p)?;
        Self::projective_from_fiber(algebra, rank, fiber)
    }

    pub(crate) fn projective_from_fiber(algebra: &AlgebraSpec, rank: usize, fiber: Vec<CMat>) -> Result<Self> {
        for (b, (pm, &n)) in fiber.iter().zip(algebra.block_sizes()).enumerate() {
            let dim = rank * n;
            if pm.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!("projection block {b} has shape {:?}", pm.shape())));
            }
            let herm = linalg::max_abs(&(pm - pm.adjoint()));
            let idem = linalg::max_abs(&(pm * pm - pm));
            if herm > PROJECTION_TOL || idem > PROJECTION_TOL {
                return Err(Error::InvalidProjection(format!(
                    "block {b}: |p - p*| = {herm:e}, |p² - p| = {idem:e}"
                )));
            }
        }
        Ok(Self(Arc::new(ModuleInner {
            algebra: algebra.clone(),
            rank,
            projection: Some(fiber),
        })))
    }

    pub fn algebra(&self) -> &AlgebraSpec {
        &self.0.algebra
    }

    pub fn rank(&self) -> usize {
        self.0.rank
    }

    pub fn is_free(&self) -> bool {
        self.0.projection.is_none()
    }

    /// Ambient fiber dimension `m·n_b` of block `b`.
    pub fn fiber_dim(&self, b: usize) -> usize {
        self.0.rank * self.0.algebra.block_sizes()[b]
    }

    /// Projection fiber matrix of block `b` (identity for free modules).
    pub fn fiber_identity(&self, b: usize) -> CMat {
        match &self.0.projection {
            Some(p) => p[b].clone(),
            None => {
                let d = self.fiber_dim(b);
                CMat::identity(d, d)
            }
        }
    }

    pub(crate) fn projection_fiber(&self) -> Option<&[CMat]> {
        self.0.projection.as_deref()
    }

    /// The projection as an A-matrix, if this is not a free module.
    pub fn projection_entries(&self) -> Option<Vec<Vec<AlgebraElement>>> {
        self.0
            .projection
            .as_ref()
            .map(|p| entries_from_fiber(&self.0.algebra, self.0.rank, self.0.rank, p))
    }

    /// Per-block dimension of the submodule fiber (`m·n_b` for free modules).
    pub fn block_ranks(&self) -> Vec<usize> {
        (0..self.0.algebra.num_blocks())
            .map(|b| match &self.0.projection {
                Some(p) => linalg::rank(&p[b], 1e-10),
                None => self.fiber_dim(b),
            })
            .collect()
    }

    /// Complex dimension of the module.
    pub fn concrete_dim(&self) -> usize {
        self.block_ranks()
            .iter()
            .zip(self.0.algebra.block_sizes())
            .map(|(k, n)| k * n)
            .sum()
    }

    pub(crate) fn check_same(&self, other: &ModuleSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpecMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// A-rank of a projective module whose per-block fiber dimensions are `block_ranks`:
/// `Some(k)` exactly when the module is isomorphic to `A^k`.
pub fn free_rank(algebra: &AlgebraSpec, block_ranks: &[usize]) -> Option<usize> {
    let mut rank = None;
    for (&kb, &n) in block_ranks.iter().zip(algebra.block_sizes()) {
        if kb % n != 0 {
            return None;
        }
        let r = kb / n;
        match rank {
            None => rank = Some(r),
            Some(prev) if prev != r => return None,
            _ => {}
        }
    }
    rank
}

/// An element of a [`ModuleSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleVector {
    module: ModuleSpec,
    blocks: Vec<CMat>,
}

impl ModuleVector {
    pub fn zero(module: &ModuleSpec) -> Self {
        let blocks = module
            .algebra()
            .block_sizes()
            .iter()
            .enumerate()
            .map(|(b, &n)| CMat::zeros(module.fiber_dim(b), n))
            .collect();
        Self {
            module: module.clone(),
            blocks,
        }
    }

    /// Build from components `(u_1, ..., u_m)`; the vector must lie in the submodule.
    pub fn from_entries(module: &ModuleSpec, entries: &[AlgebraElement]) -> Result<Self> {
        if entries.len() != module.rank() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} components, got {}",
                module.rank(),
                entries.len()
            )));
        }
        let sizes = module.algebra().block_sizes();
        let mut blocks: Vec<CMat> = sizes
            .iter()
            .enumerate()
            .map(|(b, &n)| CMat::zeros(module.fiber_dim(b), n))
            .collect();
        for (i, u) in entries.iter().enumerate() {
            module.algebra().check_same(u.spec())?;
            for (b, &n) in sizes.iter().enumerate() {
                let ub = u.block(b);
                for r in 0..n {
                    for k in 0..n {
                        blocks[b][(i * n + k, r)] = ub[(r, k)];
                    }
                }
            }
        }
        let v = Self {
            module: module.clone(),
            blocks,
        };
        let gap = v.membership_residual();
        if gap > PROJECTION_TOL * v.norm().max(1.0) {
            return Err(Error::InvalidProjection(format!(
                "vector is not fixed by the projection (residual {gap:e})"
            )));
        }
        Ok(v)
    }

    pub(crate) fn from_fiber(module: &ModuleSpec, blocks: Vec<CMat>) -> Self {
        debug_assert_eq!(blocks.len(), module.algebra().num_blocks());
        Self {
            module: module.clone(),
            blocks,
        }
    }

    /// The generator `e_i` (component `i` equal to 1), projected into the submodule.
    pub fn generator(module: &ModuleSpec, i: usize) -> Self {
        let mut v = Self::zero(module);
        for (b, &n) in module.algebra().block_sizes().iter().enumerate() {
            for r in 0..n {
                v.blocks[b][(i * n + r, r)] = c(1.0, 0.0);
            }
        }
        v.project()
    }

    pub fn module(&self) -> &ModuleSpec {
        &self.module
    }

    pub(crate) fn fiber(&self) -> &[CMat] {
        &self.blocks
    }

    /// Components `(u_1, ..., u_m)`.
    pub fn entries(&self) -> Vec<AlgebraElement> {
        let spec = self.module.algebra();
        (0..self.module.rank())
            .map(|i| {
                let blocks = spec
                    .block_sizes()
                    .iter()
                    .enumerate()
                    .map(|(b, &n)| CMat::from_fn(n, n, |r, k| self.blocks[b][(i * n + k, r)]))
                    .collect();
                AlgebraElement::from_blocks(spec, blocks).expect("shapes conform")
            })
            .collect()
    }

    /// Apply the module's projection (identity on free modules).
    pub fn project(&self) -> Self {
        match self.module.projection_fiber() {
            None => self.clone(),
            Some(p) => Self {
                module: self.module.clone(),
                blocks: p.iter().zip(&self.blocks).map(|(pm, x)| pm * x).collect(),
            },
        }
    }

    /// Distance from the vector to its projection.
    pub fn membership_residual(&self) -> f64 {
        match self.module.projection_fiber() {
            None => 0.0,
            Some(_) => self.sub(&self.project()).map(|d| d.norm()).unwrap_or(f64::INFINITY),
        }
    }

    pub fn add(&self, other: &ModuleVector) -> Result<ModuleVector> {
        self.module.check_same(&other.module)?;
        Ok(Self {
            module: self.module.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &ModuleVector) -> Result<ModuleVector> {
        self.module.check_same(&other.module)?;
        Ok(Self {
            module: self.module.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, lambda: C64) -> ModuleVector {
        Self {
            module: self.module.clone(),
            blocks: self.blocks.iter().map(|m| m * lambda).collect(),
        }
    }

    /// Left action `(a·u)_i = a u_i`.
    pub fn act(&self, a: &AlgebraElement) -> Result<ModuleVector> {
        self.module.algebra().check_same(a.spec())?;
        Ok(Self {
            module: self.module.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(a.blocks())
                .map(|(x, ab)| x * ab.transpose())
                .collect(),
        })
    }

    /// A-valued product `(self, other) = Σ_i other_i self_i^*`.
    pub fn inner_product(&self, other: &ModuleVector) -> Result<AlgebraElement> {
        self.module.check_same(&other.module)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(x, y)| (x.adjoint() * y).transpose())
            .collect();
        AlgebraElement::from_blocks(self.module.algebra(), blocks)
    }

    /// `|u| = sqrt(|(u, u)|_A)`.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|x| linalg::op_norm(&(x.adjoint() * x)))
            .fold(0.0, f64::max)
            .sqrt()
    }

    /// `|(u, v)|_A ≤ tol`.
    pub fn orthogonal_check(&self, other: &ModuleVector, tol: f64) -> Result<bool> {
        Ok(self.inner_product(other)?.norm() <= tol)
    }

    /// Concrete coordinates: components in order, each flattened block by block.
    pub fn embed_concrete(&self) -> Vec<C64> {
        self.entries().iter().flat_map(|u| u.flatten()).collect()
    }

    /// Inverse of [`ModuleVector::embed_concrete`] (no membership check).
    pub fn from_concrete(module: &ModuleSpec, data: &[C64]) -> Result<Self> {
        let d = module.algebra().concrete_dim();
        if data.len() != module.rank() * d {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coordinates, got {}",
                module.rank() * d,
                data.len()
            )));
        }
        let entries = data
            .chunks(d.max(1))
            .take(module.rank())
            .map(|chunk| AlgebraElement::unflatten(module.algebra(), chunk))
            .collect::<Result<Vec<_>>>()?;
        let mut v = Self::zero(module);
        if !entries.is_empty() {
            let free = ModuleSpec::free(module.algebra(), module.rank());
            v.blocks = ModuleVector::from_entries(&free, &entries)?.blocks;
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec1() -> AlgebraSpec {
        AlgebraSpec::scalars()
    }

    #[test]
    fn unit_vector_products() {
        let m = ModuleSpec::free(&spec1(), 1);
        let u = ModuleVector::generator(&m, 0);
        assert_eq!(u.inner_product(&u).unwrap(), AlgebraElement::one(&spec1()));
        let m2 = ModuleSpec::free(&spec1(), 2);
        let e1 = ModuleVector::generator(&m2, 0);
        let e2 = ModuleVector::generator(&m2, 1);
        assert!((e1.norm() - 1.0).abs() < 1e-15);
        assert!(e1.orthogonal_check(&e2, 1e-12).unwrap());
        assert!(!e1.orthogonal_check(&e1, 1e-12).unwrap());
        assert_eq!(ModuleVector::zero(&m2).norm(), 0.0);
    }

    #[test]
    fn act_by_one_and_zero() {
        let s = AlgebraSpec::new(vec![2]).unwrap();
        let m = ModuleSpec::free(&s, 2);
        let u = ModuleVector::generator(&m, 1).scale(c(0.5, 2.0));
        assert_eq!(u.act(&AlgebraElement::one(&s)).unwrap(), u);
        assert_eq!(u.act(&AlgebraElement::zero(&s)).unwrap(), ModuleVector::zero(&m));
    }

    #[test]
    fn entries_roundtrip() {
        let s = AlgebraSpec::new(vec![2, 1]).unwrap();
        let m = ModuleSpec::free(&s, 2);
        let data: Vec<C64> = (0..10).map(|k| c(k as f64, -(k as f64) / 3.0)).collect();
        let v = ModuleVector::from_concrete(&m, &data).unwrap();
        assert_eq!(v.embed_concrete(), data);
        let w = ModuleVector::from_entries(&m, &v.entries()).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn projective_membership() {
        let s = spec1();
        let half = AlgebraElement::scalar(&s, c(0.5, 0.0));
        let p = vec![vec![half.clone(), half.clone()], vec![half.clone(), half]];
        let m = ModuleSpec::projective(&s, 2, &p).unwrap();
        assert_eq!(m.concrete_dim(), 1);
        assert_eq!(m.block_ranks(), vec![1]);
        let one = AlgebraElement::one(&s);
        assert!(ModuleVector::from_entries(&m, &[one.clone(), one.clone()]).is_ok());
        assert!(ModuleVector::from_entries(&m, &[one, AlgebraElement::zero(&s)]).is_err());
    }

    #[test]
    fn rejects_non_idempotent_projection() {
        let s = spec1();
        let two = AlgebraElement::scalar(&s, c(2.0, 0.0));
        assert!(matches!(
            ModuleSpec::projective(&s, 1, &[vec![two]]),
            Err(Error::InvalidProjection(_))
        ));
    }

    #[test]
    fn free_rank_detection() {
        let s = AlgebraSpec::new(vec![2, 1]).unwrap();
        assert_eq!(free_rank(&s, &[4, 2]), Some(2));
        assert_eq!(free_rank(&s, &[2, 2]), None);
        assert_eq!(free_rank(&s, &[1, 1]), None);
        assert_eq!(free_rank(&s, &[0, 0]), Some(0));
    }

    #[test]
    fn zero_rank_module() {
        let m = ModuleSpec::free(&spec1(), 0);
        let z = ModuleVector::zero(&m);
        assert_eq!(z.norm(), 0.0);
        assert_eq!(m.concrete_dim(), 0);
        assert!(z.embed_concrete().is_empty());
    }
}
