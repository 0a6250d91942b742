//! Sampled symbol sequences and ellipticity certificates.
//!
//! A sample is a short complex of fiber morphisms attached to one covector.
//! Exactness at degree `i` is equivalent to invertibility of
//! `Σ_i = σ_{i-1}σ_{i-1}^* + σ_i^*σ_i`, whose spectrum is then the union of
//! the squared nonzero singular values of the two maps.

use serde::Serialize;

use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::hom::Morphism;
use crate::linalg::{self, CMat, C64};
use crate::module::ModuleSpec;
use crate::par::Execution;

#[derive(Clone, Debug)]
pub struct SymbolSample {
    tag: String,
    complex: ChainComplex,
}

/// Rank bookkeeping for `Rng σ_{i-1} = Ker σ_i`.
#[derive(Clone, Debug, Serialize)]
pub struct Exactness {
    pub degree: usize,
    pub exact: bool,
    /// `sqrt(λ_min(Σ_i))`: the smallest nonzero singular value of the two
    /// maps when exact, zero otherwise.
    pub margin: f64,
    pub fiber_dim: usize,
    pub rank_in: usize,
    pub rank_out: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AutomorphismCheck {
    pub degree: usize,
    pub invertible: bool,
    /// Smallest singular value of `λσ_i^*σ_i + μσ_{i-1}σ_{i-1}^*`.
    pub margin: f64,
    /// `margin / |Σ_i|`.
    pub relative_margin: f64,
}

/// Sub-claims behind invertibility of `Σ` on a two-step sequence `U → V → W`.
#[derive(Clone, Debug, Serialize)]
pub struct InjectivityDiagnostics {
    pub degree: usize,
    /// `|σ_{i-1}^* σ_i^*|`, the residual of `Rng σ_i^* ⊆ Ker σ_{i-1}^*`.
    pub containment_residual: f64,
    /// Smallest singular value of `σ_{i-1}σ_{i-1}^*` restricted to `Rng σ_{i-1}`.
    pub range_margin: f64,
    /// Smallest singular value of `σ_i^*σ_i` restricted to `Rng σ_i^*`.
    pub corange_margin: f64,
}

impl SymbolSample {
    pub fn new(tag: impl Into<String>, fibers: Vec<ModuleSpec>, maps: Vec<Morphism>) -> Result<Self> {
        Ok(Self {
            tag: tag.into(),
            complex: ChainComplex::new(fibers, maps)?,
        })
    }

    pub fn from_complex(tag: impl Into<String>, complex: ChainComplex) -> Self {
        Self {
            tag: tag.into(),
            complex,
        }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn fibers(&self) -> &[ModuleSpec] {
        self.complex.modules()
    }

    pub fn maps(&self) -> &[Morphism] {
        self.complex.differentials()
    }

    pub fn complex(&self) -> &ChainComplex {
        &self.complex
    }

    pub fn top_degree(&self) -> usize {
        self.complex.top_degree()
    }

    /// Same sample with `σ_i` replaced by `λσ_i`.
    pub fn scaled(&self, degree: usize, lambda: C64) -> Result<Self> {
        Ok(Self {
            tag: self.tag.clone(),
            complex: self.complex.scaled(degree, lambda)?,
        })
    }

    pub fn sigma_laplacian(&self, i: usize) -> Result<Morphism> {
        self.complex.laplacian(i)
    }

    pub fn exactness_check(&self, i: usize, cutoff: f64) -> Result<Exactness> {
        let sigma = self.sigma_laplacian(i)?;
        let fiber_dim = self.complex.modules()[i].concrete_dim();
        let rank_in = self.complex.incoming(i).concrete_rank(cutoff);
        let rank_out = self.complex.outgoing(i).concrete_rank(cutoff);
        Ok(Exactness {
            degree: i,
            exact: rank_in + rank_out == fiber_dim,
            margin: smallest_eigenvalue(&sigma).max(0.0).sqrt(),
            fiber_dim,
            rank_in,
            rank_out,
        })
    }

    /// Invertibility of `λσ_i^*σ_i + μσ_{i-1}σ_{i-1}^*` relative to `|Σ_i|`.
    pub fn automorphism_check(&self, i: usize, lambda: C64, mu: C64, cutoff: f64) -> Result<AutomorphismCheck> {
        if lambda == C64::new(0.0, 0.0) || mu == C64::new(0.0, 0.0) {
            return Err(Error::ZeroCoefficient);
        }
        let d_in = self.complex.incoming(i);
        let d_out = self.complex.outgoing(i);
        let op = d_out
            .adjoint()
            .compose(&d_out)?
            .scale(lambda)
            .add(&d_in.compose(&d_in.adjoint())?.scale(mu))?;
        let margin = op.fiber().iter().map(linalg::min_singular_value).fold(f64::INFINITY, f64::min);
        let scale = self.sigma_laplacian(i)?.op_norm();
        let relative_margin = if scale > 0.0 { margin / scale } else { 0.0 };
        Ok(AutomorphismCheck {
            degree: i,
            invertible: op.source().concrete_dim() == 0 || relative_margin > cutoff,
            margin,
            relative_margin,
        })
    }

    pub fn injectivity_diagnostics(&self, i: usize, cutoff: f64) -> Result<InjectivityDiagnostics> {
        self.complex.module(i)?;
        let d_in = self.complex.incoming(i);
        let d_out = self.complex.outgoing(i);
        let containment_residual = d_in.adjoint().compose(&d_out.adjoint())?.op_norm();
        let up = d_in.compose(&d_in.adjoint())?;
        let down = d_out.adjoint().compose(&d_out)?;
        Ok(InjectivityDiagnostics {
            degree: i,
            containment_residual,
            range_margin: restricted_margin(&up, &d_in, cutoff),
            corange_margin: restricted_margin(&down, &d_out.adjoint(), cutoff),
        })
    }
}

/// Smallest singular value of `op` on the range of `map`.
fn restricted_margin(op: &Morphism, map: &Morphism, cutoff: f64) -> f64 {
    let top = map.op_norm();
    let thr = linalg::rank_threshold(top, cutoff);
    let mut worst = f64::INFINITY;
    for (o, m) in op.fiber().iter().zip(map.fiber()) {
        if top == 0.0 {
            continue;
        }
        let basis = linalg::range_basis_above(m, thr);
        if basis.ncols() > 0 {
            let restricted: CMat = o * &basis;
            worst = worst.min(linalg::min_singular_value(&restricted));
        }
    }
    worst
}

fn smallest_eigenvalue(m: &Morphism) -> f64 {
    m.fiber()
        .iter()
        .filter(|b| b.nrows() > 0)
        .filter_map(|b| linalg::hermitian_eigenvalues(b).first().copied())
        .fold(f64::INFINITY, f64::min)
}

fn largest_eigenvalue(m: &Morphism) -> f64 {
    m.fiber()
        .iter()
        .filter(|b| b.nrows() > 0)
        .filter_map(|b| linalg::hermitian_eigenvalues(b).last().copied())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Elliptic,
    NotElliptic,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Elliptic => "elliptic",
            Verdict::NotElliptic => "not-elliptic",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeCertificate {
    pub degree: usize,
    pub exact: bool,
    pub exactness_margin: f64,
    /// `λ_min(Σ_i)`.
    pub sigma_margin: f64,
    /// `sqrt(λ_min(Σ_i) / λ_max(Σ_i))`, on the same scale as singular-value cutoffs.
    pub relative_margin: f64,
    /// Exactness at this degree implies `Σ_i` is invertible.
    pub exact_implies_invertible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleCertificate {
    pub tag: String,
    pub degrees: Vec<DegreeCertificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticityCertificate {
    pub samples: Vec<SampleCertificate>,
    pub min_exactness_margin: f64,
    pub min_sigma_margin: f64,
    pub min_relative_margin: f64,
    pub all_exact: bool,
    pub exact_implies_invertible: bool,
    pub cutoff: f64,
    pub verdict: Verdict,
}

/// Certifies ellipticity on the sampled covectors only.
///
/// A relative margin within a factor 10 of `cutoff` on either side yields
/// [`Verdict::Inconclusive`].
pub fn elliptic_scan(samples: &[SymbolSample], cutoff: f64, exec: Execution) -> Result<EllipticityCertificate> {
    if samples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let certs = exec
        .map_slice(samples, |s| certify_sample(s, cutoff))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let all = || certs.iter().flat_map(|c| c.degrees.iter());
    let min_exactness_margin = all().map(|d| d.exactness_margin).fold(f64::INFINITY, f64::min);
    let min_sigma_margin = all().map(|d| d.sigma_margin).fold(f64::INFINITY, f64::min);
    let min_relative_margin = all().map(|d| d.relative_margin).fold(f64::INFINITY, f64::min);
    let all_exact = all().all(|d| d.exact);
    let exact_implies_invertible = all().all(|d| d.exact_implies_invertible);
    let verdict = if min_relative_margin <= cutoff / 10.0 || (!all_exact && min_relative_margin <= cutoff) {
        Verdict::NotElliptic
    } else if min_relative_margin <= 10.0 * cutoff || !all_exact {
        Verdict::Inconclusive
    } else {
        Verdict::Elliptic
    };
    Ok(EllipticityCertificate {
        samples: certs,
        min_exactness_margin,
        min_sigma_margin,
        min_relative_margin,
        all_exact,
        exact_implies_invertible,
        cutoff,
        verdict,
    })
}

fn certify_sample(s: &SymbolSample, cutoff: f64) -> Result<SampleCertificate> {
    let mut degrees = Vec::with_capacity(s.top_degree() + 1);
    for i in 0..=s.top_degree() {
        if s.fibers()[i].concrete_dim() == 0 {
            continue;
        }
        let ex = s.exactness_check(i, cutoff)?;
        let sigma = s.sigma_laplacian(i)?;
        let lo = smallest_eigenvalue(&sigma).max(0.0);
        let hi = largest_eigenvalue(&sigma);
        let relative_margin = if hi > 0.0 { (lo / hi).sqrt() } else { 0.0 };
        degrees.push(DegreeCertificate {
            degree: i,
            exact: ex.exact,
            exactness_margin: ex.margin,
            sigma_margin: lo,
            relative_margin,
            exact_implies_invertible: !ex.exact || relative_margin > cutoff,
        });
    }
    Ok(SampleCertificate {
        tag: s.tag.clone(),
        degrees,
    })
}
