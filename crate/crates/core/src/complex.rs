//! Chain complexes of Hilbert A-modules and their Hodge theory.
//!
//! Degrees outside `0..=L` carry the zero module and zero differentials, so
//! `△_0 = D_0^*D_0` and `△_L = D_{L-1}D_{L-1}^*` fall out of the general
//! formula `△_i = D_{i-1}D_{i-1}^* + D_i^*D_i`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::hom::Morphism;
use crate::linalg::{self, CMat, C64};
use crate::module::{free_rank, ModuleSpec, ModuleVector};

/// Relative residual allowed for `D_{i+1} D_i = 0` when validating a complex.
pub const NILPOTENCY_TOL: f64 = 1e-9;

/// Default residual tolerance for identity checks.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

/// `Γ^0 → Γ^1 → ... → Γ^L` with `D_{i+1} D_i = 0`.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    modules: Vec<ModuleSpec>,
    differentials: Vec<Morphism>,
}

impl ChainComplex {
    pub fn new(modules: Vec<ModuleSpec>, differentials: Vec<Morphism>) -> Result<Self> {
        let Some(first) = modules.first() else {
            return Err(Error::DimensionMismatch("a complex needs at least one module".into()));
        };
        if differentials.len() + 1 != modules.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} modules need {} differentials, got {}",
                modules.len(),
                modules.len() - 1,
                differentials.len()
            )));
        }
        let algebra = first.algebra().clone();
        for m in &modules {
            algebra.check_same(m.algebra())?;
        }
        for (i, d) in differentials.iter().enumerate() {
            d.source().check_same(&modules[i])?;
            d.target().check_same(&modules[i + 1])?;
        }
        for i in 0..differentials.len().saturating_sub(1) {
            let (inner, outer) = (&differentials[i], &differentials[i + 1]);
            let residual = outer.compose(inner)?.op_norm();
            let scale = (outer.op_norm() * inner.op_norm()).max(1.0);
            if residual > NILPOTENCY_TOL * scale {
                return Err(Error::NotAComplex { degree: i, residual });
            }
        }
        Ok(Self { modules, differentials })
    }

    /// The complex `Γ^0` with no differentials.
    pub fn single(module: ModuleSpec) -> Self {
        Self {
            modules: vec![module],
            differentials: Vec::new(),
        }
    }

    pub fn algebra(&self) -> &AlgebraSpec {
        self.modules[0].algebra()
    }

    /// Highest degree `L`.
    pub fn top_degree(&self) -> usize {
        self.modules.len() - 1
    }

    pub fn modules(&self) -> &[ModuleSpec] {
        &self.modules
    }

    pub fn differentials(&self) -> &[Morphism] {
        &self.differentials
    }

    pub fn module(&self, i: usize) -> Result<&ModuleSpec> {
        self.check_degree(i)?;
        Ok(&self.modules[i])
    }

    fn check_degree(&self, i: usize) -> Result<()> {
        if i > self.top_degree() {
            Err(Error::IndexOutOfRange {
                degree: i,
                max: self.top_degree(),
            })
        } else {
            Ok(())
        }
    }

    fn zero_module(&self) -> ModuleSpec {
        ModuleSpec::free(self.algebra(), 0)
    }

    /// `D_{i-1}: Γ^{i-1} → Γ^i`, the zero map from the zero module when `i = 0`.
    pub fn incoming(&self, i: usize) -> Morphism {
        if i == 0 {
            Morphism::zero(&self.zero_module(), &self.modules[0])
        } else {
            self.differentials[i - 1].clone()
        }
    }

    /// `D_i: Γ^i → Γ^{i+1}`, the zero map to the zero module when `i = L`.
    pub fn outgoing(&self, i: usize) -> Morphism {
        if i == self.top_degree() {
            Morphism::zero(&self.modules[i], &self.zero_module())
        } else {
            self.differentials[i].clone()
        }
    }

    /// `△_i = D_{i-1}D_{i-1}^* + D_i^*D_i`.
    pub fn laplacian(&self, i: usize) -> Result<Morphism> {
        self.check_degree(i)?;
        let d_in = self.incoming(i);
        let d_out = self.outgoing(i);
        let up = d_in.compose(&d_in.adjoint())?;
        let down = d_out.adjoint().compose(&d_out)?;
        up.add(&down)
    }

    /// Same complex with `D_i` replaced by `λ D_i`.
    pub fn scaled(&self, degree: usize, lambda: C64) -> Result<Self> {
        if degree >= self.differentials.len() {
            return Err(Error::IndexOutOfRange {
                degree,
                max: self.differentials.len().saturating_sub(1),
            });
        }
        let mut out = self.clone();
        out.differentials[degree] = out.differentials[degree].scale(lambda);
        Ok(out)
    }

    /// `Ker △_i` against `Ker D_i ∩ Ker D_{i-1}^*` in the concrete shadow.
    pub fn kernel_laplacian_check(&self, i: usize, cutoff: f64, tol: f64) -> Result<KernelCheck> {
        let lap = self.laplacian(i)?;
        let p = lap.kernel_projection(cutoff);
        let laplacian_nullity = self.modules[i].concrete_dim() - lap.concrete_rank(cutoff);

        let module = &self.modules[i];
        let d_out = self.outgoing(i);
        let d_in_adj = self.incoming(i).adjoint();
        let sizes = self.algebra().block_sizes();
        // Work inside an orthonormal frame of each fiber projection so the
        // threshold only sees the differentials.
        let frames: Vec<CMat> = (0..sizes.len())
            .map(|b| linalg::range_basis_above(&module.fiber_identity(b), 0.5))
            .collect();
        let stacked: Vec<CMat> = frames
            .iter()
            .enumerate()
            .map(|(b, f)| {
                let (o, a) = (&d_out.fiber()[b], &d_in_adj.fiber()[b]);
                let mut s = CMat::zeros(o.nrows() + a.nrows(), f.nrows());
                s.view_mut((0, 0), o.shape()).copy_from(o);
                s.view_mut((o.nrows(), 0), a.shape()).copy_from(a);
                s * f
            })
            .collect();
        let top = stacked.iter().map(linalg::op_norm).fold(0.0, f64::max);
        let thr = linalg::rank_threshold(top, cutoff);
        let mut intersection_dim = 0;
        let mut q_blocks = Vec::with_capacity(sizes.len());
        for ((s, f), &nb) in stacked.iter().zip(&frames).zip(sizes) {
            let n = if top == 0.0 {
                CMat::identity(s.ncols(), s.ncols())
            } else {
                linalg::null_space_below(s, thr)
            };
            intersection_dim += n.ncols() * nb;
            let fq = f * n;
            q_blocks.push(&fq * fq.adjoint());
        }
        let q = Morphism::from_fiber(module, module, q_blocks)?;
        let projection_gap = p.distance(&q)?;
        Ok(KernelCheck {
            degree: i,
            laplacian_nullity,
            intersection_dim,
            projection_gap,
            holds: laplacian_nullity == intersection_dim && projection_gap <= tol,
        })
    }

    /// Parametrix of `△_i` from the pseudoinverse and the kernel projection.
    pub fn build_parametrix(&self, i: usize, cutoff: f64) -> Result<Parametrix> {
        let lap = self.laplacian(i)?;
        Ok(Parametrix {
            degree: i,
            g: lap.pseudoinverse(cutoff),
            p: lap.kernel_projection(cutoff),
        })
    }

    pub fn build_all_parametrices(&self, cutoff: f64) -> Result<Vec<Parametrix>> {
        (0..=self.top_degree()).map(|i| self.build_parametrix(i, cutoff)).collect()
    }

    /// Residuals of `p_{i+1}D_i = 0`, `D_i g_i = g_{i+1} D_i`,
    /// `D_i △_i = △_{i+1} D_i` and `D_i p_i = 0` over all degrees.
    pub fn verify_chain_map(&self, parametrices: &[Parametrix], tol: f64) -> Result<ChainMapReport> {
        if parametrices.len() != self.modules.len() {
            return Err(Error::DegreeMismatch {
                expected: self.modules.len(),
                got: parametrices.len(),
            });
        }
        for (i, par) in parametrices.iter().enumerate() {
            if par.degree != i {
                return Err(Error::DegreeMismatch {
                    expected: i,
                    got: par.degree,
                });
            }
        }
        let laplacians = (0..=self.top_degree())
            .map(|i| self.laplacian(i))
            .collect::<Result<Vec<_>>>()?;
        let mut degrees = Vec::with_capacity(self.modules.len());
        for i in 0..=self.top_degree() {
            let d = self.outgoing(i);
            let d_p = d.compose(&parametrices[i].p)?.op_norm();
            let (p_next_d, d_g, d_lap) = if i < self.top_degree() {
                let (cur, next) = (&parametrices[i], &parametrices[i + 1]);
                let p_next_d = next.p.compose(&d)?.op_norm();
                let d_g = d.compose(&cur.g)?.distance(&next.g.compose(&d)?)?;
                let d_lap = d.compose(&laplacians[i])?.distance(&laplacians[i + 1].compose(&d)?)?;
                (p_next_d, d_g, d_lap)
            } else {
                (0.0, 0.0, 0.0)
            };
            degrees.push(ChainMapDegree {
                degree: i,
                p_next_d,
                d_g_commutator: d_g,
                d_laplacian_commutator: d_lap,
                d_p,
            });
        }
        let max = |f: fn(&ChainMapDegree) -> f64| degrees.iter().map(f).fold(0.0, f64::max);
        let max_p_next_d = max(|d| d.p_next_d);
        let max_d_g = max(|d| d.d_g_commutator);
        let max_d_lap = max(|d| d.d_laplacian_commutator);
        let max_d_p = max(|d| d.d_p);
        let passed = [max_p_next_d, max_d_g, max_d_lap, max_d_p].iter().all(|&r| r <= tol);
        Ok(ChainMapReport {
            degrees,
            max_p_next_d,
            max_d_g_commutator: max_d_g,
            max_d_laplacian_commutator: max_d_lap,
            max_d_p,
            tol,
            passed,
        })
    }

    /// Concrete orthonormal basis of `Ker △_i`, lifted to module vectors.
    pub fn harmonic_basis(&self, i: usize, cutoff: f64) -> Result<Vec<ModuleVector>> {
        let p = self.laplacian(i)?.kernel_projection(cutoff);
        let module = &self.modules[i];
        let sizes = module.algebra().block_sizes();
        let mut out = Vec::new();
        for (b, &nb) in sizes.iter().enumerate() {
            let basis = linalg::range_basis_above(&p.fiber()[b], 0.5);
            for col in 0..basis.ncols() {
                for r in 0..nb {
                    let mut v = ModuleVector::zero(module);
                    let mut blocks = v.fiber().to_vec();
                    blocks[b].set_column(r, &basis.column(col));
                    v = ModuleVector::from_fiber(module, blocks);
                    out.push(v);
                }
            }
        }
        Ok(out)
    }

    /// Evaluators for the maps between harmonic elements and cohomology classes.
    pub fn hodge_maps(&self, i: usize, cutoff: f64, tol: f64) -> Result<HodgeMaps> {
        self.check_degree(i)?;
        let p = self.build_parametrix(i, cutoff)?.p;
        let d_in = self.incoming(i);
        let g_prev = if i == 0 {
            Morphism::zero(d_in.source(), d_in.source())
        } else {
            self.build_parametrix(i - 1, cutoff)?.g
        };
        Ok(HodgeMaps {
            degree: i,
            p,
            g_prev,
            d_in,
            d_out: self.outgoing(i),
            tol,
        })
    }

    /// Orthogonal projections onto the harmonic, exact (`Rng D_{i-1}`) and
    /// coexact (`Rng D_i^*`) parts of `Γ^i`.
    pub fn hodge_projections(&self, i: usize, cutoff: f64) -> Result<HodgeProjections> {
        let harmonic = self.laplacian(i)?.kernel_projection(cutoff);
        let d_in = self.incoming(i);
        let d_out = self.outgoing(i);
        let exact = d_in.compose(&d_in.pseudoinverse(cutoff))?;
        let coexact = d_out.pseudoinverse(cutoff).compose(&d_out)?;
        Ok(HodgeProjections {
            harmonic,
            exact,
            coexact,
        })
    }

    /// `v = h + D_{i-1}a + D_i^*b` with the three parts mutually orthogonal.
    pub fn hodge_decompose(&self, i: usize, v: &ModuleVector, cutoff: f64) -> Result<HodgeSplit> {
        self.check_degree(i)?;
        self.modules[i].check_same(v.module())?;
        let proj = self.hodge_projections(i, cutoff)?;
        let d_in = self.incoming(i);
        let d_out_adj = self.outgoing(i).adjoint();
        let exact_potential = d_in.pseudoinverse(cutoff).apply(v)?;
        let coexact_potential = d_out_adj.pseudoinverse(cutoff).apply(v)?;
        Ok(HodgeSplit {
            harmonic: proj.harmonic.apply(v)?,
            exact: d_in.apply(&exact_potential)?,
            coexact: d_out_adj.apply(&coexact_potential)?,
            exact_potential,
            coexact_potential,
        })
    }

    /// Harmonic and cohomology dimensions with the identity residuals at degree `i`.
    pub fn cohomology_report(&self, i: usize, cutoff: f64, tol: f64) -> Result<HodgeReport> {
        self.check_degree(i)?;
        let module = &self.modules[i];
        let lap = self.laplacian(i)?;
        let lap_rank = lap.rank_decision(cutoff);
        let harmonic_dim = module.concrete_dim() - lap_rank.rank;
        let d_out = self.outgoing(i);
        let d_in = self.incoming(i);
        let nullity_out = module.concrete_dim() - d_out.concrete_rank(cutoff);
        let rank_in = d_in.concrete_rank(cutoff);
        let cohomology_dim = nullity_out as i64 - rank_in as i64;

        let par = self.build_parametrix(i, cutoff)?;
        let harmonic_block_ranks: Vec<usize> = par.p.fiber().iter().map(|m| linalg::rank(m, 1e-6)).collect();
        let harmonic_a_rank = free_rank(self.algebra(), &harmonic_block_ranks);

        let mut residuals = BTreeMap::new();
        let pr = par.residuals(&lap)?;
        residuals.insert("g△ + p = 1".to_string(), pr.left_inverse);
        residuals.insert("△g + p = 1".to_string(), pr.right_inverse);
        residuals.insert("△p = 0".to_string(), pr.laplacian_kills_p);
        residuals.insert("gp = 0".to_string(), pr.g_kills_p);
        residuals.insert("p² = p".to_string(), pr.idempotence);
        if i < self.top_degree() {
            let next = self.build_parametrix(i + 1, cutoff)?;
            residuals.insert("p_{i+1}D_i = 0".to_string(), next.p.compose(&d_out)?.op_norm());
            residuals.insert(
                "D_i g_i = g_{i+1} D_i".to_string(),
                d_out.compose(&par.g)?.distance(&next.g.compose(&d_out)?)?,
            );
        }
        residuals.insert("D_i p_i = 0".to_string(), d_out.compose(&par.p)?.op_norm());
        let kernel = self.kernel_laplacian_check(i, cutoff, tol)?;
        residuals.insert("Ker △ = Ker D ∩ Ker D*".to_string(), kernel.projection_gap);

        let dims_agree = harmonic_dim as i64 == cohomology_dim;
        let passed = dims_agree && kernel.holds && residuals.values().all(|&r| r <= tol);
        Ok(HodgeReport {
            degree: i,
            harmonic_dim_concrete: harmonic_dim,
            cohomology_dim_concrete: cohomology_dim,
            harmonic_block_ranks,
            harmonic_a_rank,
            dims_agree,
            rank_margin: lap_rank.margin(),
            residuals,
            passed,
        })
    }
}

/// Comparison of `Ker △_i` with `Ker D_i ∩ Ker D_{i-1}^*`.
#[derive(Clone, Debug, Serialize)]
pub struct KernelCheck {
    pub degree: usize,
    pub laplacian_nullity: usize,
    pub intersection_dim: usize,
    /// Distance between the two orthogonal projections.
    pub projection_gap: f64,
    pub holds: bool,
}

/// Maps `g_i, p_i: Γ^i → Γ^i` solving the parametrix equations for `△_i`.
#[derive(Clone, Debug)]
pub struct Parametrix {
    pub degree: usize,
    pub g: Morphism,
    pub p: Morphism,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ParametrixResiduals {
    /// `|g△ + p - 1|`
    pub left_inverse: f64,
    /// `|△g + p - 1|`
    pub right_inverse: f64,
    /// `|△p|`
    pub laplacian_kills_p: f64,
    /// `|gp|`
    pub g_kills_p: f64,
    /// `|p² - p|`
    pub idempotence: f64,
}

impl ParametrixResiduals {
    pub fn max(&self) -> f64 {
        [
            self.left_inverse,
            self.right_inverse,
            self.laplacian_kills_p,
            self.g_kills_p,
            self.idempotence,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl Parametrix {
    pub fn residuals(&self, laplacian: &Morphism) -> Result<ParametrixResiduals> {
        let id = Morphism::identity(laplacian.source());
        Ok(ParametrixResiduals {
            left_inverse: self.g.compose(laplacian)?.add(&self.p)?.distance(&id)?,
            right_inverse: laplacian.compose(&self.g)?.add(&self.p)?.distance(&id)?,
            laplacian_kills_p: laplacian.compose(&self.p)?.op_norm(),
            g_kills_p: self.g.compose(&self.p)?.op_norm(),
            idempotence: self.p.compose(&self.p)?.distance(&self.p)?,
        })
    }

    /// Whether `(g, p)` solves the three parametrix equations within `tol`.
    /// `gp = 0` is reported by [`Parametrix::residuals`] but not required.
    pub fn is_valid(&self, laplacian: &Morphism, tol: f64) -> Result<bool> {
        let r = self.residuals(laplacian)?;
        Ok(r.left_inverse <= tol && r.right_inverse <= tol && r.laplacian_kills_p <= tol)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainMapDegree {
    pub degree: usize,
    /// `|p_{i+1} D_i|`
    pub p_next_d: f64,
    /// `|D_i g_i - g_{i+1} D_i|`
    pub d_g_commutator: f64,
    /// `|D_i △_i - △_{i+1} D_i|`
    pub d_laplacian_commutator: f64,
    /// `|D_i p_i|`
    pub d_p: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainMapReport {
    pub degrees: Vec<ChainMapDegree>,
    pub max_p_next_d: f64,
    pub max_d_g_commutator: f64,
    pub max_d_laplacian_commutator: f64,
    pub max_d_p: f64,
    pub tol: f64,
    pub passed: bool,
}

/// `Φ_i` (harmonic element ↦ its class) and `Ψ_i` (cocycle ↦ `p_i b`).
#[derive(Clone, Debug)]
pub struct HodgeMaps {
    pub degree: usize,
    p: Morphism,
    g_prev: Morphism,
    d_in: Morphism,
    d_out: Morphism,
    tol: f64,
}

/// `w = g_{i-1} D_{i-1}^* b` with `|b - p_i b - D_{i-1} w|`.
#[derive(Clone, Debug)]
pub struct HomotopyWitness {
    pub witness: ModuleVector,
    pub residual: f64,
}

impl HodgeMaps {
    /// A harmonic element is its own cocycle representative.
    pub fn phi(&self, harmonic: &ModuleVector) -> Result<ModuleVector> {
        self.p.source().check_same(harmonic.module())?;
        Ok(harmonic.clone())
    }

    pub fn psi(&self, cocycle: &ModuleVector) -> Result<ModuleVector> {
        self.check_cocycle(cocycle)?;
        self.p.apply(cocycle)
    }

    fn check_cocycle(&self, b: &ModuleVector) -> Result<()> {
        let residual = self.d_out.apply(b)?.norm();
        let bound = self.tol * b.norm().max(f64::MIN_POSITIVE);
        if residual > bound && residual > 0.0 {
            return Err(Error::NotACocycle { residual, bound });
        }
        Ok(())
    }

    pub fn homotopy_witness(&self, cocycle: &ModuleVector) -> Result<HomotopyWitness> {
        self.check_cocycle(cocycle)?;
        let w = self.g_prev.apply(&self.d_in.adjoint().apply(cocycle)?)?;
        let rep = self.p.apply(cocycle)?;
        let residual = cocycle.sub(&rep)?.sub(&self.d_in.apply(&w)?)?.norm();
        Ok(HomotopyWitness { witness: w, residual })
    }
}

#[derive(Clone, Debug)]
pub struct HodgeProjections {
    pub harmonic: Morphism,
    pub exact: Morphism,
    pub coexact: Morphism,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ProjectionResiduals {
    pub sum_to_identity: f64,
    pub idempotence: f64,
    pub self_adjointness: f64,
    pub mutual_annihilation: f64,
}

impl HodgeProjections {
    pub fn residuals(&self) -> Result<ProjectionResiduals> {
        let all = [&self.harmonic, &self.exact, &self.coexact];
        let id = Morphism::identity(self.harmonic.source());
        let sum = self.harmonic.add(&self.exact)?.add(&self.coexact)?;
        let mut idem: f64 = 0.0;
        let mut sa: f64 = 0.0;
        let mut ann: f64 = 0.0;
        for (a, p) in all.iter().enumerate() {
            idem = idem.max(p.compose(p)?.distance(p)?);
            sa = sa.max(p.distance(&p.adjoint())?);
            for (b, q) in all.iter().enumerate() {
                if a != b {
                    ann = ann.max(p.compose(q)?.op_norm());
                }
            }
        }
        Ok(ProjectionResiduals {
            sum_to_identity: sum.distance(&id)?,
            idempotence: idem,
            self_adjointness: sa,
            mutual_annihilation: ann,
        })
    }
}

/// Result of [`ChainComplex::hodge_decompose`].
#[derive(Clone, Debug)]
pub struct HodgeSplit {
    pub harmonic: ModuleVector,
    pub exact: ModuleVector,
    pub coexact: ModuleVector,
    /// `a` with `exact = D_{i-1} a`.
    pub exact_potential: ModuleVector,
    /// `b` with `coexact = D_i^* b`.
    pub coexact_potential: ModuleVector,
}

impl HodgeSplit {
    /// `|v - h - e - c|`.
    pub fn reconstruction_residual(&self, v: &ModuleVector) -> Result<f64> {
        Ok(v.sub(&self.harmonic)?.sub(&self.exact)?.sub(&self.coexact)?.norm())
    }

    /// Largest `|(x, y)|_A` over distinct parts.
    pub fn orthogonality_residual(&self) -> Result<f64> {
        let parts = [&self.harmonic, &self.exact, &self.coexact];
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for b in (a + 1)..3 {
                worst = worst.max(parts[a].inner_product(parts[b])?.norm());
            }
        }
        Ok(worst)
    }
}

/// Per-degree summary tying harmonic elements to cohomology.
#[derive(Clone, Debug, Serialize)]
pub struct HodgeReport {
    pub degree: usize,
    pub harmonic_dim_concrete: usize,
    pub cohomology_dim_concrete: i64,
    /// Dimension of the harmonic subspace of each fiber block.
    pub harmonic_block_ranks: Vec<usize>,
    /// Rank over `A` when the harmonic module is free.
    pub harmonic_a_rank: Option<usize>,
    pub dims_agree: bool,
    /// Multiplicative distance of the Laplacian spectrum from the rank cutoff.
    pub rank_margin: f64,
    pub residuals: BTreeMap<String, f64>,
    pub passed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn two_term() -> ChainComplex {
        let s = AlgebraSpec::scalars();
        let m = ModuleSpec::free(&s, 1);
        ChainComplex::new(vec![m.clone(), m.clone()], vec![Morphism::identity(&m)]).unwrap()
    }

    fn zero_complex(rank: usize, len: usize) -> ChainComplex {
        let s = AlgebraSpec::new(vec![2]).unwrap();
        let m = ModuleSpec::free(&s, rank);
        let ds = (0..len - 1).map(|_| Morphism::zero(&m, &m)).collect();
        ChainComplex::new(vec![m; len], ds).unwrap()
    }

    #[test]
    fn laplacians_of_two_term_complex() {
        let cx = two_term();
        let id = Morphism::identity(cx.module(0).unwrap());
        assert!(cx.laplacian(0).unwrap().distance(&id).unwrap() < 1e-15);
        assert!(cx.laplacian(1).unwrap().distance(&id).unwrap() < 1e-15);
        assert!(matches!(cx.laplacian(2), Err(Error::IndexOutOfRange { degree: 2, max: 1 })));
    }

    #[test]
    fn zero_differentials_give_zero_laplacians() {
        let cx = zero_complex(2, 3);
        for i in 0..3 {
            assert_eq!(cx.laplacian(i).unwrap().op_norm(), 0.0);
        }
    }

    #[test]
    fn rejects_non_complex() {
        let s = AlgebraSpec::scalars();
        let m = ModuleSpec::free(&s, 1);
        let id = Morphism::identity(&m);
        let err = ChainComplex::new(vec![m.clone(), m.clone(), m.clone()], vec![id.clone(), id]).unwrap_err();
        assert!(matches!(err, Error::NotAComplex { degree: 0, .. }));
    }

    #[test]
    fn kernel_check_trivial_cases() {
        let cx = zero_complex(1, 2);
        let k = cx.kernel_laplacian_check(0, 1e-10, 1e-8).unwrap();
        assert!(k.holds);
        assert_eq!(k.laplacian_nullity, 4);
        let k = two_term().kernel_laplacian_check(0, 1e-10, 1e-8).unwrap();
        assert!(k.holds);
        assert_eq!(k.laplacian_nullity, 0);
    }

    #[test]
    fn parametrix_of_invertible_and_zero_laplacian() {
        let cx = two_term();
        let par = cx.build_parametrix(0, 1e-10).unwrap();
        let id = Morphism::identity(cx.module(0).unwrap());
        assert!(par.g.distance(&id).unwrap() < 1e-14);
        assert!(par.p.op_norm() < 1e-14);

        let cx = zero_complex(1, 2);
        let par = cx.build_parametrix(1, 1e-10).unwrap();
        let id = Morphism::identity(cx.module(1).unwrap());
        assert!(par.g.op_norm() < 1e-14);
        assert!(par.p.distance(&id).unwrap() < 1e-14);
    }

    #[test]
    fn chain_map_on_trivial_complexes() {
        let cx = zero_complex(1, 3);
        let pars = cx.build_all_parametrices(1e-10).unwrap();
        let rep = cx.verify_chain_map(&pars, 1e-8).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.max_p_next_d + rep.max_d_g_commutator + rep.max_d_laplacian_commutator, 0.0);

        let cx = two_term();
        let pars = cx.build_all_parametrices(1e-10).unwrap();
        let rep = cx.verify_chain_map(&pars, 1e-8).unwrap();
        assert!(rep.passed);
        assert!(matches!(
            cx.verify_chain_map(&pars[..1], 1e-8),
            Err(Error::DegreeMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn harmonic_bases() {
        let cx = two_term();
        assert!(cx.harmonic_basis(0, 1e-10).unwrap().is_empty());
        assert!(cx.harmonic_basis(1, 1e-10).unwrap().is_empty());
        let cx = zero_complex(1, 1);
        let basis = cx.harmonic_basis(0, 1e-10).unwrap();
        assert_eq!(basis.len(), 4);
        for (a, u) in basis.iter().enumerate() {
            for (b, v) in basis.iter().enumerate() {
                let ip: f64 = u
                    .embed_concrete()
                    .iter()
                    .zip(v.embed_concrete())
                    .map(|(x, y)| x.conj() * y)
                    .sum::<C64>()
                    .norm();
                assert!((ip - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cohomology_of_small_complexes() {
        let cx = two_term();
        for i in 0..2 {
            let r = cx.cohomology_report(i, 1e-10, 1e-8).unwrap();
            assert_eq!((r.harmonic_dim_concrete, r.cohomology_dim_concrete), (0, 0));
            assert!(r.passed);
        }
        let s = AlgebraSpec::scalars();
        let m = ModuleSpec::free(&s, 1);
        let cx = ChainComplex::new(vec![m.clone(), m.clone()], vec![Morphism::zero(&m, &m)]).unwrap();
        let r = cx.cohomology_report(0, 1e-10, 1e-8).unwrap();
        assert_eq!((r.harmonic_dim_concrete, r.cohomology_dim_concrete), (1, 1));
        assert_eq!(r.harmonic_a_rank, Some(1));
    }

    #[test]
    fn hodge_maps_on_exact_and_harmonic_vectors() {
        let s = AlgebraSpec::scalars();
        let m1 = ModuleSpec::free(&s, 1);
        let m2 = ModuleSpec::free(&s, 2);
        // A → A² → 0 via u ↦ (u, 0): degree 1 has one exact and one harmonic direction
        let w = CMat::from_row_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        let d = Morphism::from_scalar_matrix(&m1, &m2, &w).unwrap();
        let cx = ChainComplex::new(vec![m1.clone(), m2.clone()], vec![d.clone()]).unwrap();
        let maps = cx.hodge_maps(1, 1e-10, 1e-8).unwrap();
        let h = ModuleVector::generator(&m2, 1);
        let back = maps.psi(&maps.phi(&h).unwrap()).unwrap();
        assert!(back.sub(&h).unwrap().norm() < 1e-12);
        let exact = d.apply(&ModuleVector::generator(&m1, 0)).unwrap();
        assert!(maps.psi(&exact).unwrap().norm() < 1e-12);
        let wit = maps.homotopy_witness(&exact).unwrap();
        assert!(wit.residual < 1e-12);

        let split = cx.hodge_decompose(1, &exact, 1e-10).unwrap();
        assert!(split.harmonic.norm() < 1e-12);
        assert!(split.exact.sub(&exact).unwrap().norm() < 1e-12);
        let split = cx.hodge_decompose(1, &h, 1e-10).unwrap();
        assert!(split.harmonic.sub(&h).unwrap().norm() < 1e-12);
        assert!(split.exact.norm() + split.coexact.norm() < 1e-12);
    }

    #[test]
    fn psi_rejects_non_cocycle() {
        let cx = two_term();
        let maps = cx.hodge_maps(0, 1e-10, 1e-8).unwrap();
        let v = ModuleVector::generator(cx.module(0).unwrap(), 0);
        assert!(matches!(maps.psi(&v), Err(Error::NotACocycle { .. })));
    }
}
