//! Finite-dimensional C*-algebras `A = M_{n_1}(C) ⊕ ... ⊕ M_{n_k}(C)`.
//!
//! Elements are stored block by block. [`AlgebraElement::embed_concrete`]
//! gives the faithful block-diagonal representation used as a numerical
//! oracle throughout the test suites.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64};

/// Default tolerance for self-adjointness and positivity tests.
pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-9;

/// Block sizes `(n_1, ..., n_k)` of the algebra.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct AlgebraSpec {
    blocks: Arc<[usize]>,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    blocks: Vec<usize>,
}

impl TryFrom<RawSpec> for AlgebraSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        AlgebraSpec::new(raw.blocks)
    }
}

impl From<AlgebraSpec> for RawSpec {
    fn from(spec: AlgebraSpec) -> Self {
        RawSpec {
            blocks: spec.blocks.to_vec(),
        }
    }
}

impl AlgebraSpec {
    pub fn new(blocks: impl Into<Vec<usize>>) -> Result<Self> {
        let blocks = blocks.into();
        if blocks.is_empty() {
            return Err(Error::InvalidSpec("at least one block is required".into()));
        }
        if let Some(pos) = blocks.iter().position(|&n| n == 0) {
            return Err(Error::InvalidSpec(format!("block {pos} has size 0")));
        }
        Ok(Self {
            blocks: blocks.into(),
        })
    }

    /// The algebra `C`.
    pub fn scalars() -> Self {
        Self::new(vec![1]).expect("valid")
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Concrete dimension `d = Σ n_b²`.
    pub fn concrete_dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    pub(crate) fn check_same(&self, other: &AlgebraSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpecMismatch(format!("{self} vs {other}")))
        }
    }
}

impl fmt::Debug for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraSpec{:?}", &*self.blocks)
    }
}

impl fmt::Display for AlgebraSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// An element of `A`, one square complex matrix per block.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    spec: AlgebraSpec,
    blocks: Vec<CMat>,
}

impl AlgebraElement {
    pub fn from_blocks(spec: &AlgebraSpec, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != spec.num_blocks() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} blocks, got {}",
                spec.num_blocks(),
                blocks.len()
            )));
        }
        for (b, (m, &n)) in blocks.iter().zip(spec.block_sizes()).enumerate() {
            if m.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "block {b} has shape {:?}, expected ({n}, {n})",
                    m.shape()
                )));
            }
        }
        Ok(Self {
            spec: spec.clone(),
            blocks,
        })
    }

    pub fn zero(spec: &AlgebraSpec) -> Self {
        let blocks = spec.block_sizes().iter().map(|&n| CMat::zeros(n, n)).collect();
        Self {
            spec: spec.clone(),
            blocks,
        }
    }

    /// The unit `1 = (I_{n_1}, ..., I_{n_k})`.
    pub fn one(spec: &AlgebraSpec) -> Self {
        Self::scalar(spec, c(1.0, 0.0))
    }

    /// `λ · 1`.
    pub fn scalar(spec: &AlgebraSpec, lambda: C64) -> Self {
        let blocks = spec
            .block_sizes()
            .iter()
            .map(|&n| CMat::identity(n, n) * lambda)
            .collect();
        Self {
            spec: spec.clone(),
            blocks,
        }
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &CMat {
        &self.blocks[b]
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.spec.check_same(&other.spec)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect();
        Ok(Self {
            spec: self.spec.clone(),
            blocks,
        })
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.spec.check_same(&other.spec)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect();
        Ok(Self {
            spec: self.spec.clone(),
            blocks,
        })
    }

    /// Blockwise matrix product `self · other`.
    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        self.spec.check_same(&other.spec)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect();
        Ok(Self {
            spec: self.spec.clone(),
            blocks,
        })
    }

    pub fn scale(&self, lambda: C64) -> AlgebraElement {
        Self {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().map(|m| m * lambda).collect(),
        }
    }

    /// The involution: blockwise conjugate transpose.
    pub fn star(&self) -> AlgebraElement {
        Self {
            spec: self.spec.clone(),
            blocks: self.blocks.iter().map(|m| m.adjoint()).collect(),
        }
    }

    /// C*-norm: the largest operator norm over the blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    /// Self-adjoint within `tol` and every block spectrum bounded below by `-tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        let scale = self.norm().max(1.0);
        self.blocks.iter().all(|m| {
            let skew = linalg::max_abs(&(m - m.adjoint()));
            skew <= tol * scale
                && linalg::hermitian_eigenvalues(m)
                    .first()
                    .is_none_or(|&lo| lo >= -tol * scale)
        })
    }

    /// Faithful block-diagonal `d × d` representation.
    pub fn embed_concrete(&self) -> CMat {
        let d: usize = self.spec.block_sizes().iter().sum();
        let mut out = CMat::zeros(d, d);
        let mut off = 0;
        for m in &self.blocks {
            let n = m.nrows();
            out.view_mut((off, off), (n, n)).copy_from(m);
            off += n;
        }
        out
    }

    /// Entries flattened block by block, row-major within a block. Length `d = Σ n_b²`.
    pub fn flatten(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.spec.concrete_dim());
        for m in &self.blocks {
            for r in 0..m.nrows() {
                for k in 0..m.ncols() {
                    out.push(m[(r, k)]);
                }
            }
        }
        out
    }

    /// Inverse of [`AlgebraElement::flatten`].
    pub fn unflatten(spec: &AlgebraSpec, data: &[C64]) -> Result<Self> {
        if data.len() != spec.concrete_dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries, got {}",
                spec.concrete_dim(),
                data.len()
            )));
        }
        let mut off = 0;
        let blocks = spec
            .block_sizes()
            .iter()
            .map(|&n| {
                let m = CMat::from_row_slice(n, n, &data[off..off + n * n]);
                off += n * n;
                m
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            blocks,
        })
    }

    /// C*-norm of `self - other`.
    pub fn distance(&self, other: &AlgebraElement) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(b: &[usize]) -> AlgebraSpec {
        AlgebraSpec::new(b.to_vec()).unwrap()
    }

    fn nilpotent() -> AlgebraElement {
        let m = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        AlgebraElement::from_blocks(&spec(&[2]), vec![m]).unwrap()
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(AlgebraSpec::new(vec![]).is_err());
        assert!(AlgebraSpec::new(vec![2, 0]).is_err());
        let parsed: std::result::Result<AlgebraSpec, _> = serde_json::from_str(r#"{"blocks":[0]}"#);
        assert!(parsed.is_err());
        let ok: AlgebraSpec = serde_json::from_str(r#"{"blocks":[1,2]}"#).unwrap();
        assert_eq!(ok.concrete_dim(), 5);
    }

    #[test]
    fn scalar_block_sum() {
        let s = spec(&[1]);
        let a = AlgebraElement::scalar(&s, c(2.0, 1.0));
        let b = AlgebraElement::scalar(&s, c(3.0, 0.0));
        assert_eq!(a.add(&b).unwrap().block(0)[(0, 0)], c(5.0, 1.0));
        assert_eq!(a.add(&AlgebraElement::zero(&s)).unwrap(), a);
    }

    #[test]
    fn nilpotent_squares_to_zero() {
        let n = nilpotent();
        assert_eq!(n.mul(&n).unwrap(), AlgebraElement::zero(n.spec()));
        assert_eq!(n.mul(&AlgebraElement::one(n.spec())).unwrap(), n);
    }

    #[test]
    fn star_of_nilpotent() {
        let n = nilpotent();
        let s = n.star();
        assert_eq!(s.block(0)[(1, 0)], c(1.0, 0.0));
        assert_eq!(s.block(0)[(0, 1)], c(0.0, 0.0));
        assert_eq!(s.star(), n);
        let one = AlgebraElement::one(n.spec());
        assert_eq!(one.star(), one);
    }

    #[test]
    fn norms() {
        let a = AlgebraElement::scalar(&spec(&[1]), c(3.0, 4.0));
        assert!((a.norm() - 5.0).abs() < 1e-14);
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)]));
        let a = AlgebraElement::from_blocks(&spec(&[2]), vec![d]).unwrap();
        assert!((a.norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn positivity() {
        let one = AlgebraElement::one(&spec(&[2, 1]));
        assert!(one.is_positive(DEFAULT_POSITIVITY_TOL));
        assert!(!nilpotent().is_positive(DEFAULT_POSITIVITY_TOL));
        assert!(!AlgebraElement::scalar(&spec(&[1]), c(-1.0, 0.0)).is_positive(1e-9));
    }

    #[test]
    fn embedding_basics() {
        let s = spec(&[1, 1]);
        let a = AlgebraElement::from_blocks(
            &s,
            vec![CMat::from_element(1, 1, c(2.0, 0.0)), CMat::from_element(1, 1, c(0.0, 3.0))],
        )
        .unwrap();
        let e = a.embed_concrete();
        assert_eq!(e[(0, 0)], c(2.0, 0.0));
        assert_eq!(e[(1, 1)], c(0.0, 3.0));
        assert_eq!(e[(0, 1)], c(0.0, 0.0));
        let id = AlgebraElement::one(&spec(&[2, 3])).embed_concrete();
        assert_eq!(id, CMat::identity(5, 5));
    }

    #[test]
    fn spec_mismatch() {
        let a = AlgebraElement::one(&spec(&[1]));
        let b = AlgebraElement::one(&spec(&[2]));
        assert!(matches!(a.mul(&b), Err(Error::SpecMismatch(_))));
        assert!(matches!(a.add(&b), Err(Error::SpecMismatch(_))));
    }
}
