//! Band-limited A-valued differential forms on the flat torus `[0,1)^n`.
//!
//! A section of degree `k` stores one coefficient `ŝ(q) ∈ F ⊗ Λ^k` per mode
//! `q ∈ [-N, N]^n`, modes in lexicographic order. `F ⊗ Λ^k` is the free
//! module of rank `r·C(n,k)`, with component `I·r + j` pairing the `I`-th
//! sorted `k`-subset with fiber component `j`. Derivatives act as the
//! multipliers `2πi q`, so every operator here is exact on the band.

use std::f64::consts::PI;

use serde::Serialize;

use crate::algebra::{AlgebraElement, AlgebraSpec};
use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::hom::Morphism;
use crate::linalg::{self, c, CMat, C64};
use crate::module::{free_rank, ModuleSpec, ModuleVector};
use crate::par::Execution;
use crate::symbol::SymbolSample;

/// Upper limit on lattice points summed for an embedding constant.
pub const MAX_LATTICE_POINTS: f64 = 1e7;

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Sorted `k`-subsets of `{0, ..., n-1}` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(n, k));
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Matrix of `ω ↦ ξ ∧ ω` from `Λ^k` to `Λ^{k+1}` in the sorted-subset bases.
pub fn wedge_matrix(n: usize, k: usize, xi: &[C64]) -> CMat {
    assert_eq!(xi.len(), n);
    let src = subsets(n, k);
    let dst = subsets(n, k + 1);
    let mut w = CMat::zeros(dst.len(), src.len());
    for (col, set) in src.iter().enumerate() {
        for (j, &x) in xi.iter().enumerate() {
            if set.contains(&j) {
                continue;
            }
            let before = set.iter().filter(|&&s| s < j).count();
            let mut joined = set.clone();
            joined.insert(before, j);
            let row = dst.binary_search(&joined).expect("subset enumeration is lexicographic");
            let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
            w[(row, col)] += x * sign;
        }
    }
    w
}

/// `T^n` with modes `|q|_∞ ≤ band` and trivial bundle fiber `A^r`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusGeometry {
    dim: usize,
    band: usize,
    fiber: ModuleSpec,
}

impl TorusGeometry {
    pub fn new(dim: usize, band: usize, fiber: ModuleSpec) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("torus dimension must be at least 1".into()));
        }
        if !fiber.is_free() {
            return Err(Error::InvalidSpec("torus fibers must be free modules".into()));
        }
        Ok(Self { dim, band, fiber })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn fiber(&self) -> &ModuleSpec {
        &self.fiber
    }

    pub fn algebra(&self) -> &AlgebraSpec {
        self.fiber.algebra()
    }

    pub fn mode_count(&self) -> usize {
        (2 * self.band + 1).pow(self.dim as u32)
    }

    /// All modes in lexicographic order.
    pub fn modes(&self) -> Vec<Vec<i64>> {
        let side = 2 * self.band + 1;
        let n = self.band as i64;
        (0..self.mode_count())
            .map(|mut idx| {
                let mut q = vec![0i64; self.dim];
                for slot in q.iter_mut().rev() {
                    *slot = (idx % side) as i64 - n;
                    idx /= side;
                }
                q
            })
            .collect()
    }

    pub fn mode_index(&self, q: &[i64]) -> Option<usize> {
        if q.len() != self.dim || q.iter().any(|&x| x.unsigned_abs() as usize > self.band) {
            return None;
        }
        let side = 2 * self.band + 1;
        Some(q.iter().fold(0, |acc, &x| acc * side + (x + self.band as i64) as usize))
    }

    /// `F ⊗ Λ^k`.
    pub fn local_module(&self, degree: usize) -> ModuleSpec {
        ModuleSpec::free(self.algebra(), self.fiber.rank() * binomial(self.dim, degree))
    }

    fn check_degree(&self, degree: usize) -> Result<()> {
        if degree > self.dim {
            Err(Error::IndexOutOfRange {
                degree,
                max: self.dim,
            })
        } else {
            Ok(())
        }
    }

    fn check_same(&self, other: &TorusGeometry) -> Result<()> {
        if self != other {
            return Err(Error::GeometryMismatch(format!(
                "n={} N={} fiber={:?} vs n={} N={} fiber={:?}",
                self.dim, self.band, self.fiber, other.dim, other.band, other.fiber
            )));
        }
        Ok(())
    }

    /// Symbol of `d` on `Λ^k ⊗ F` at covector `ξ`: `2πi ξ∧ ⊗ 1_F`.
    pub fn de_rham_symbol(&self, degree: usize, xi: &[f64]) -> Result<Morphism> {
        let xi: Vec<C64> = xi.iter().map(|&x| c(0.0, 2.0 * PI * x)).collect();
        let w = linalg::kron_identity(&wedge_matrix(self.dim, degree, &xi), self.fiber.rank());
        Morphism::from_scalar_matrix(&self.local_module(degree), &self.local_module(degree + 1), &w)
    }

    /// `0 → Λ^0⊗F → ... → Λ^n⊗F → 0` with differentials `2πi ξ∧`.
    pub fn de_rham_symbol_complex(&self, xi: &[f64]) -> Result<ChainComplex> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "covector of length {} on a {}-torus",
                xi.len(),
                self.dim
            )));
        }
        let modules = (0..=self.dim).map(|k| self.local_module(k)).collect();
        let maps = (0..self.dim)
            .map(|k| self.de_rham_symbol(k, xi))
            .collect::<Result<Vec<_>>>()?;
        ChainComplex::new(modules, maps)
    }

    pub fn de_rham_symbol_sample(&self, xi: &[f64]) -> Result<SymbolSample> {
        Ok(SymbolSample::from_complex(format!("xi={xi:?}"), self.de_rham_symbol_complex(xi)?))
    }

    /// The de Rham complex on the band, block diagonal over modes.
    pub fn de_rham_complex(&self) -> Result<ChainComplex> {
        let modes = self.modes();
        let r = self.fiber.rank();
        let modules: Vec<ModuleSpec> = (0..=self.dim)
            .map(|k| ModuleSpec::free(self.algebra(), modes.len() * r * binomial(self.dim, k)))
            .collect();
        let mut maps = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let blocks: Vec<CMat> = modes
                .iter()
                .map(|q| {
                    let xi: Vec<C64> = q.iter().map(|&x| c(0.0, 2.0 * PI * x as f64)).collect();
                    linalg::kron_identity(&wedge_matrix(self.dim, k, &xi), r)
                })
                .collect();
            let w = linalg::block_diag(&blocks);
            maps.push(Morphism::from_scalar_matrix(&modules[k], &modules[k + 1], &w)?);
        }
        ChainComplex::new(modules, maps)
    }

    /// Harmonic forms of the de Rham complex, computed mode by mode with the
    /// Laplacians of the mode complexes.
    pub fn harmonic_rank_check(&self, cutoff: f64, tol: f64, exec: Execution) -> Result<DeRhamReport> {
        let modes = self.modes();
        let per_mode = exec
            .map_slice(&modes, |q| self.mode_harmonics(q, cutoff))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let mut degrees = Vec::with_capacity(self.dim + 1);
        for k in 0..=self.dim {
            let nb = self.algebra().num_blocks();
            let mut block_ranks = vec![0usize; nb];
            let mut harmonic_modes = Vec::new();
            for (q, mh) in modes.iter().zip(&per_mode) {
                let ranks = &mh.block_ranks[k];
                if ranks.iter().any(|&x| x > 0) {
                    harmonic_modes.push(q.clone());
                }
                for (acc, x) in block_ranks.iter_mut().zip(ranks) {
                    *acc += x;
                }
            }
            let harmonic_dim_concrete = block_ranks
                .iter()
                .zip(self.algebra().block_sizes())
                .map(|(k, n)| k * n)
                .sum();
            let harmonic_a_rank = free_rank(self.algebra(), &block_ranks);
            let expected_a_rank = binomial(self.dim, k) * self.fiber.rank();
            let only_zero_mode = harmonic_modes.iter().all(|q| q.iter().all(|&x| x == 0));
            degrees.push(DeRhamDegree {
                degree: k,
                harmonic_dim_concrete,
                harmonic_a_rank,
                expected_a_rank,
                harmonic_modes,
                matches: harmonic_a_rank == Some(expected_a_rank) && only_zero_mode,
            });
        }
        let max_d_squared = per_mode.iter().map(|m| m.d_squared).fold(0.0, f64::max);
        let max_multiplier = per_mode.iter().map(|m| m.multiplier_residual).fold(0.0, f64::max);
        let passed = degrees.iter().all(|d| d.matches) && max_d_squared <= tol && max_multiplier <= tol;
        Ok(DeRhamReport {
            dim: self.dim,
            band: self.band,
            fiber_rank: self.fiber.rank(),
            algebra: self.algebra().block_sizes().to_vec(),
            degrees,
            max_d_squared,
            max_laplacian_multiplier_residual: max_multiplier,
            passed,
        })
    }

    fn mode_harmonics(&self, q: &[i64], cutoff: f64) -> Result<ModeHarmonics> {
        let xi: Vec<f64> = q.iter().map(|&x| x as f64).collect();
        let cx = self.de_rham_symbol_complex(&xi)?;
        let q2: f64 = xi.iter().map(|x| x * x).sum();
        let mut d_squared: f64 = 0.0;
        for k in 0..cx.differentials().len().saturating_sub(1) {
            d_squared = d_squared.max(cx.differentials()[k + 1].compose(&cx.differentials()[k])?.op_norm());
        }
        let mut block_ranks = Vec::with_capacity(self.dim + 1);
        let mut multiplier_residual: f64 = 0.0;
        for k in 0..=self.dim {
            let lap = cx.laplacian(k)?;
            let expected = Morphism::identity(lap.source()).scale(c(FOUR_PI_SQ * q2, 0.0));
            multiplier_residual = multiplier_residual.max(lap.distance(&expected)?);
            let p = lap.kernel_projection(cutoff);
            block_ranks.push(p.fiber().iter().map(|m| linalg::rank(m, 1e-6)).collect());
        }
        Ok(ModeHarmonics {
            block_ranks,
            d_squared,
            multiplier_residual,
        })
    }
}

struct ModeHarmonics {
    block_ranks: Vec<Vec<usize>>,
    d_squared: f64,
    multiplier_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeRhamDegree {
    pub degree: usize,
    pub harmonic_dim_concrete: usize,
    pub harmonic_a_rank: Option<usize>,
    /// `C(n,k)·r`.
    pub expected_a_rank: usize,
    /// Modes carrying harmonic forms.
    pub harmonic_modes: Vec<Vec<i64>>,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeRhamReport {
    pub dim: usize,
    pub band: usize,
    pub fiber_rank: usize,
    pub algebra: Vec<usize>,
    pub degrees: Vec<DeRhamDegree>,
    pub max_d_squared: f64,
    /// Largest `|△_k(q) - 4π²|q|²|` over modes and degrees.
    pub max_laplacian_multiplier_residual: f64,
    pub passed: bool,
}

impl DeRhamReport {
    pub fn a_ranks(&self) -> Vec<Option<usize>> {
        self.degrees.iter().map(|d| d.harmonic_a_rank).collect()
    }
}

/// A band-limited section of `Λ^k ⊗ F`.
#[derive(Clone, Debug)]
pub struct TorusSection {
    geometry: TorusGeometry,
    degree: usize,
    coeffs: Vec<ModuleVector>,
}

fn mode_sq(q: &[i64]) -> f64 {
    q.iter().map(|&x| (x * x) as f64).sum()
}

fn phase(q: &[i64], x: &[f64]) -> C64 {
    let dot: f64 = q.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
    C64::from_polar(1.0, 2.0 * PI * dot)
}

fn module_norm_sq(v: &ModuleVector) -> f64 {
    v.inner_product(v).map(|a| a.norm()).unwrap_or(0.0)
}

impl TorusSection {
    pub fn zero(geometry: &TorusGeometry, degree: usize) -> Result<Self> {
        geometry.check_degree(degree)?;
        let m = geometry.local_module(degree);
        Ok(Self {
            geometry: geometry.clone(),
            degree,
            coeffs: vec![ModuleVector::zero(&m); geometry.mode_count()],
        })
    }

    /// Section from `(q, ŝ(q))` pairs; unlisted modes are zero.
    pub fn from_modes(geometry: &TorusGeometry, degree: usize, modes: Vec<(Vec<i64>, ModuleVector)>) -> Result<Self> {
        let mut s = Self::zero(geometry, degree)?;
        let m = geometry.local_module(degree);
        for (q, v) in modes {
            m.check_same(v.module())?;
            let idx = geometry
                .mode_index(&q)
                .ok_or_else(|| Error::GeometryMismatch(format!("mode {q:?} outside band {}", geometry.band)))?;
            s.coeffs[idx] = s.coeffs[idx].add(&v)?;
        }
        Ok(s)
    }

    /// Section with one coefficient per mode in lexicographic order.
    pub fn from_coefficients(geometry: &TorusGeometry, degree: usize, coeffs: Vec<ModuleVector>) -> Result<Self> {
        geometry.check_degree(degree)?;
        if coeffs.len() != geometry.mode_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} modes",
                coeffs.len(),
                geometry.mode_count()
            )));
        }
        let m = geometry.local_module(degree);
        for v in &coeffs {
            m.check_same(v.module())?;
        }
        Ok(Self {
            geometry: geometry.clone(),
            degree,
            coeffs,
        })
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &[ModuleVector] {
        &self.coeffs
    }

    pub fn coefficient(&self, q: &[i64]) -> Option<&ModuleVector> {
        self.geometry.mode_index(q).map(|i| &self.coeffs[i])
    }

    /// Modes with a nonzero coefficient.
    pub fn support(&self) -> Vec<Vec<i64>> {
        self.geometry
            .modes()
            .into_iter()
            .zip(&self.coeffs)
            .filter(|(_, v)| v.norm() > 0.0)
            .map(|(q, _)| q)
            .collect()
    }

    fn check_pair(&self, other: &TorusSection) -> Result<()> {
        self.geometry.check_same(&other.geometry)?;
        if self.degree != other.degree {
            return Err(Error::GeometryMismatch(format!(
                "form degrees {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    /// Multiplies `ŝ(q)` by `m(q)`.
    pub fn map_modes(&self, m: impl Fn(&[i64]) -> C64) -> Self {
        let coeffs = self
            .geometry
            .modes()
            .iter()
            .zip(&self.coeffs)
            .map(|(q, v)| v.scale(m(q)))
            .collect();
        Self {
            geometry: self.geometry.clone(),
            degree: self.degree,
            coeffs,
        }
    }

    pub fn add(&self, other: &TorusSection) -> Result<Self> {
        self.check_pair(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(Self {
            geometry: self.geometry.clone(),
            degree: self.degree,
            coeffs,
        })
    }

    pub fn sub(&self, other: &TorusSection) -> Result<Self> {
        self.add(&other.map_modes(|_| c(-1.0, 0.0)))
    }

    /// `s(x) = Σ_q ŝ(q) e^{2πi⟨q,x⟩}`.
    pub fn evaluate(&self, x: &[f64]) -> Result<ModuleVector> {
        if x.len() != self.geometry.dim {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} on a {}-torus",
                x.len(),
                self.geometry.dim
            )));
        }
        let module = self.geometry.local_module(self.degree);
        let mut acc = vec![c(0.0, 0.0); module.concrete_dim()];
        for (q, v) in self.geometry.modes().iter().zip(&self.coeffs) {
            let e = phase(q, x);
            for (a, b) in acc.iter_mut().zip(v.embed_concrete()) {
                *a += e * b;
            }
        }
        ModuleVector::from_concrete(&module, &acc)
    }

    /// `∂^α s`, the multiplier `Π_j (2πi q_j)^{α_j}`.
    pub fn derivative(&self, alpha: &[u32]) -> Result<Self> {
        if alpha.len() != self.geometry.dim {
            return Err(Error::DimensionMismatch(format!(
                "multi-index of length {} on a {}-torus",
                alpha.len(),
                self.geometry.dim
            )));
        }
        Ok(self.map_modes(|q| {
            q.iter()
                .zip(alpha)
                .map(|(&x, &a)| c(0.0, 2.0 * PI * x as f64).powu(a))
                .product()
        }))
    }

    /// `Σ_q (ŝ(q), ŝ′(q))`, the integral of the pointwise product.
    pub fn gamma_product(&self, other: &TorusSection) -> Result<AlgebraElement> {
        self.sobolev_product(other, 0)
    }

    /// `Σ_q (1 + 4π²|q|²)^t (ŝ(q), ŝ′(q))`.
    pub fn sobolev_product(&self, other: &TorusSection, t: i32) -> Result<AlgebraElement> {
        self.check_pair(other)?;
        let mut acc = AlgebraElement::zero(self.geometry.algebra());
        for ((q, a), b) in self.geometry.modes().iter().zip(&self.coeffs).zip(&other.coeffs) {
            let w = (1.0 + FOUR_PI_SQ * mode_sq(q)).powi(t);
            acc = acc.add(&a.inner_product(b)?.scale(c(w, 0.0)))?;
        }
        Ok(acc)
    }

    /// `|s|_t = sqrt(|(s, s)_t|_A)`.
    pub fn sobolev_norm(&self, t: i32) -> f64 {
        self.sobolev_product(self, t).map(|a| a.norm().sqrt()).unwrap_or(0.0)
    }

    /// `‖s‖_t = [Σ_q |ŝ(q)|² (1+|q|²)^t]^{1/2}`.
    pub fn fourier_norm(&self, t: i32) -> f64 {
        self.geometry
            .modes()
            .iter()
            .zip(&self.coeffs)
            .map(|(q, v)| module_norm_sq(v) * (1.0 + mode_sq(q)).powi(t))
            .sum::<f64>()
            .sqrt()
    }

    /// Compares `|s|_t` with `‖s‖_t` against band-exact constants.
    pub fn norm_equivalence(&self, t: i32) -> NormEquivalence {
        let (lo, hi) = band_ratio_extremes(&self.geometry, t);
        let support = self.coeffs.iter().filter(|v| v.norm() > 0.0).count();
        let f = self.fourier_norm(t);
        NormEquivalence {
            t,
            ratio: (f > 0.0).then(|| self.sobolev_norm(t) / f),
            band_lower: lo,
            band_upper: hi,
            support_modes: support,
            general_lower: lo / (support.max(1) as f64).sqrt(),
        }
    }
}

/// Extremes of `((1+4π²|q|²)/(1+|q|²))^{t/2}` over the band.
pub fn band_ratio_extremes(geometry: &TorusGeometry, t: i32) -> (f64, f64) {
    geometry
        .modes()
        .iter()
        .map(|q| {
            let q2 = mode_sq(q);
            ((1.0 + FOUR_PI_SQ * q2) / (1.0 + q2)).powi(t).sqrt()
        })
        .fold((f64::INFINITY, 0.0), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

/// `|s|_t / ‖s‖_t` with the constants it is compared against.
///
/// `|s|_t ≤ band_upper·‖s‖_t` holds for every algebra. The lower bound
/// `band_lower` needs the mode products to commute in norm, as for `A = ℂ`;
/// in general only `general_lower = band_lower / sqrt(#support)` is guaranteed.
#[derive(Clone, Debug, Serialize)]
pub struct NormEquivalence {
    pub t: i32,
    pub ratio: Option<f64>,
    pub band_lower: f64,
    pub band_upper: f64,
    pub support_modes: usize,
    pub general_lower: f64,
}

/// Which convergence condition gates the embedding constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingHypothesis {
    /// `2|α| + n - 2t < -1`.
    Strict,
    /// `2|α| + n - 2t < 0`, the exact convergence condition of the lattice sum.
    Convergent,
}

impl EmbeddingHypothesis {
    pub fn admits(self, n: usize, t: i32, order: u32) -> bool {
        let e = 2 * order as i64 + n as i64 - 2 * t as i64;
        match self {
            EmbeddingHypothesis::Strict => e < -1,
            EmbeddingHypothesis::Convergent => e < 0,
        }
    }
}

/// `C_{α,t,n}` with its finite part and rigorous tail bound.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeConstant {
    pub value: f64,
    pub lattice_sum: f64,
    pub tail_bound: f64,
    pub radius: usize,
}

fn lattice_term(q2: f64, order: u32, t: i32) -> f64 {
    if order == 0 {
        (1.0 + q2).powi(-t)
    } else {
        (FOUR_PI_SQ * q2).powi(order as i32) / (1.0 + q2).powi(t)
    }
}

/// `C² = Σ_{q ∈ ℤ^n} (2π)^{2|α|}|q|^{2|α|}/(1+|q|²)^t`, summed over
/// `|q|_∞ ≤ R` with `R = 64·max(band, 1)` (capped at
/// [`MAX_LATTICE_POINTS`]) plus an integral bound on the rest.
pub fn embedding_constant(
    n: usize,
    t: i32,
    alpha: &[u32],
    band: usize,
    hypothesis: EmbeddingHypothesis,
) -> Result<LatticeConstant> {
    if alpha.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "multi-index of length {} on a {n}-torus",
            alpha.len()
        )));
    }
    let order: u32 = alpha.iter().sum();
    if !hypothesis.admits(n, t, order) {
        return Err(Error::HypothesisViolated {
            order: order as usize,
            dim: n,
            t,
            exponent: 2 * order as i64 + n as i64 - 2 * t as i64,
        });
    }
    let cap = ((MAX_LATTICE_POINTS.powf(1.0 / n as f64) - 1.0) / 2.0).floor() as usize;
    let radius = (64 * band.max(1)).min(cap).max(band.max(1));
    let side = 2 * radius + 1;
    let total = side.pow(n as u32);
    let mut lattice_sum = 0.0;
    let mut q = vec![0i64; n];
    for mut idx in 0..total {
        for slot in q.iter_mut() {
            *slot = (idx % side) as i64 - radius as i64;
            idx /= side;
        }
        lattice_sum += lattice_term(mode_sq(&q), order, t);
    }
    // shells |q|_∞ = k hold at most 2n(3k)^{n-1} points with |q| ≥ k
    let e = n as f64 - 1.0 + 2.0 * order as f64 - 2.0 * t as f64;
    let tail_bound = (2.0 * PI).powi(2 * order as i32) * 2.0 * n as f64 * 3f64.powi(n as i32 - 1)
        * (radius as f64).powf(e + 1.0)
        / (-e - 1.0);
    Ok(LatticeConstant {
        value: (lattice_sum + tail_bound).sqrt(),
        lattice_sum,
        tail_bound,
        radius,
    })
}

/// The same sum restricted to the band; finite for every `(α, t, n)`.
pub fn band_embedding_constant(geometry: &TorusGeometry, t: i32, alpha: &[u32]) -> f64 {
    let order: u32 = alpha.iter().sum();
    geometry
        .modes()
        .iter()
        .map(|q| lattice_term(mode_sq(q), order, t))
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingCheck {
    /// `max_x |∂^α s(x)|` over the grid.
    pub lhs: f64,
    pub fourier_norm: f64,
    pub constant: f64,
    /// `‖s‖_t · C`.
    pub bound: f64,
    pub pass: bool,
}

/// Default sup-norm grid: 8 points per axis per band unit.
pub fn default_grid(geometry: &TorusGeometry) -> usize {
    8 * geometry.band.max(1)
}

/// `sup |∂^α s| ≤ ‖s‖_t · C` on a uniform grid with `grid` points per axis.
pub fn embedding_check_with(s: &TorusSection, t: i32, alpha: &[u32], constant: f64, grid: usize) -> Result<EmbeddingCheck> {
    let ds = s.derivative(alpha)?;
    let g = &s.geometry;
    let n = g.dim;
    let module = g.local_module(s.degree);
    let modes = g.modes();
    let data: Vec<Vec<C64>> = ds.coeffs.iter().map(ModuleVector::embed_concrete).collect();
    let mut x = vec![0.0; n];
    let mut acc = vec![c(0.0, 0.0); module.concrete_dim()];
    let mut lhs: f64 = 0.0;
    for mut idx in 0..grid.pow(n as u32) {
        for slot in x.iter_mut() {
            *slot = (idx % grid) as f64 / grid as f64;
            idx /= grid;
        }
        acc.iter_mut().for_each(|a| *a = c(0.0, 0.0));
        for (q, v) in modes.iter().zip(&data) {
            let e = phase(q, &x);
            for (a, b) in acc.iter_mut().zip(v) {
                *a += e * b;
            }
        }
        lhs = lhs.max(ModuleVector::from_concrete(&module, &acc)?.norm());
    }
    let fourier_norm = s.fourier_norm(t);
    let bound = fourier_norm * constant;
    Ok(EmbeddingCheck {
        lhs,
        fourier_norm,
        constant,
        bound,
        pass: lhs <= bound,
    })
}

pub fn embedding_check(
    s: &TorusSection,
    t: i32,
    alpha: &[u32],
    grid: Option<usize>,
    hypothesis: EmbeddingHypothesis,
) -> Result<EmbeddingCheck> {
    let g = &s.geometry;
    let k = embedding_constant(g.dim, t, alpha, g.band, hypothesis)?;
    embedding_check_with(s, t, alpha, k.value, grid.unwrap_or_else(|| default_grid(g)))
}

/// A diagonal operator `(Ms)ˆ(q) = m(q) ŝ(q)` on sections of one degree.
#[derive(Clone, Debug)]
pub struct MultiplierOperator {
    geometry: TorusGeometry,
    degree: usize,
    values: Vec<C64>,
}

impl MultiplierOperator {
    pub fn from_fn(geometry: &TorusGeometry, degree: usize, m: impl Fn(&[i64]) -> C64) -> Result<Self> {
        geometry.check_degree(degree)?;
        Ok(Self {
            geometry: geometry.clone(),
            degree,
            values: geometry.modes().iter().map(|q| m(q)).collect(),
        })
    }

    pub fn identity(geometry: &TorusGeometry, degree: usize) -> Result<Self> {
        Self::from_fn(geometry, degree, |_| c(1.0, 0.0))
    }

    /// `1 + △`, the multiplier `1 + 4π²|q|²`.
    pub fn one_plus_laplacian(geometry: &TorusGeometry, degree: usize) -> Result<Self> {
        Self::from_fn(geometry, degree, |q| c(1.0 + FOUR_PI_SQ * mode_sq(q), 0.0))
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn apply(&self, s: &TorusSection) -> Result<TorusSection> {
        self.geometry.check_same(&s.geometry)?;
        if s.degree != self.degree {
            return Err(Error::GeometryMismatch(format!(
                "operator on degree {} applied to degree {}",
                self.degree, s.degree
            )));
        }
        let coeffs = s.coeffs.iter().zip(&self.values).map(|(v, &m)| v.scale(m)).collect();
        Ok(TorusSection {
            geometry: s.geometry.clone(),
            degree: s.degree,
            coeffs,
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            geometry: self.geometry.clone(),
            degree: self.degree,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtensionKernel {
    pub t: i32,
    pub modes: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    /// `|△u - (f - Pf)|_0`.
    pub solve_residual: f64,
    /// `max_{q≠0} (1+|q|²)/(4π²|q|²)` over the band.
    pub gain_constant: f64,
    /// `‖u‖_{t+2}`.
    pub lhs: f64,
    /// `C·‖f‖_t`.
    pub rhs: f64,
    pub gain_holds: bool,
    /// Kernel of `△: W^s → W^{s-2}` on the band for `s = t-2, t, t+2`.
    pub extension_kernels: Vec<ExtensionKernel>,
    /// Every listed kernel is exactly the zero mode.
    pub kernels_agree: bool,
}

/// Kernel modes of the Laplacian as a map between weighted band spaces:
/// the multiplier `(1+|q|²)^{(s-2)/2} · 4π²|q|² · (1+|q|²)^{-s/2}` vanishes.
pub fn extension_kernel(geometry: &TorusGeometry, s: i32, cutoff: f64) -> ExtensionKernel {
    let modes = geometry.modes();
    let weights: Vec<f64> = modes
        .iter()
        .map(|q| {
            let q2 = mode_sq(q);
            FOUR_PI_SQ * q2 * (1.0 + q2).powf((s as f64 - 2.0) / 2.0 - s as f64 / 2.0)
        })
        .collect();
    let top = weights.iter().copied().fold(0.0, f64::max);
    let thr = linalg::rank_threshold(top, cutoff);
    ExtensionKernel {
        t: s,
        modes: modes
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| *w <= thr)
            .map(|(q, _)| q)
            .collect(),
    }
}

/// Solves `△u = f - Pf` on the band with `u` orthogonal to the zero mode.
pub fn regularity_demo(f: &TorusSection, t: i32, cutoff: f64) -> Result<(TorusSection, RegularityReport)> {
    let g = &f.geometry;
    let u = f.map_modes(|q| {
        let q2 = mode_sq(q);
        if q2 == 0.0 {
            c(0.0, 0.0)
        } else {
            c(1.0 / (FOUR_PI_SQ * q2), 0.0)
        }
    });
    let pf = f.map_modes(|q| if mode_sq(q) == 0.0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let lap_u = u.map_modes(|q| c(FOUR_PI_SQ * mode_sq(q), 0.0));
    let solve_residual = lap_u.sub(&f.sub(&pf)?)?.sobolev_norm(0);
    let gain_constant = g
        .modes()
        .iter()
        .map(|q| mode_sq(q))
        .filter(|&q2| q2 > 0.0)
        .map(|q2| (1.0 + q2) / (FOUR_PI_SQ * q2))
        .fold(0.0, f64::max);
    let lhs = u.fourier_norm(t + 2);
    let rhs = gain_constant * f.fourier_norm(t);
    let extension_kernels: Vec<ExtensionKernel> =
        [t - 2, t, t + 2].iter().map(|&s| extension_kernel(g, s, cutoff)).collect();
    let zero = vec![vec![0i64; g.dim]];
    let kernels_agree = extension_kernels.iter().all(|k| k.modes == zero);
    Ok((
        u,
        RegularityReport {
            solve_residual,
            gain_constant,
            lhs,
            rhs,
            gain_holds: lhs <= rhs * (1.0 + 1e-12),
            extension_kernels,
            kernels_agree,
        },
    ))
}
