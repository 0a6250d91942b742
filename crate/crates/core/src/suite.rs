//! Seeded verification suites over random complexes, symbol samples and
//! torus sections.
//!
//! Instance `k` of suite `s` is generated from `instance_rng(seed, s, k)`,
//! instances run under the configured [`Execution`], and results are
//! aggregated in instance order, so reports are identical for a fixed seed
//! regardless of thread count.

use std::f64::consts::PI;

use serde::Serialize;

use crate::algebra::AlgebraSpec;
use crate::complex::ChainComplex;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::module::ModuleSpec;
use crate::random::{self, instance_rng, ComplexShape};
use crate::report::{all_pass, Check, SCHEMA_VERSION};
use crate::symbol::{elliptic_scan, Verdict};
use crate::torus::{
    band_embedding_constant, binomial, embedding_check_with, embedding_constant, regularity_demo, EmbeddingHypothesis,
    TorusGeometry,
};

/// Residual allowed for `D_{i+1}D_i = 0` and for projection identities.
pub const STRICT_TOL: f64 = 1e-9;

/// Residual allowed for the de Rham Laplacian against its scalar multiplier.
pub const MULTIPLIER_TOL: f64 = 1e-10;

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn min_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::INFINITY, f64::min)
}

fn collect<T>(items: Vec<Result<T>>) -> Result<Vec<T>> {
    items.into_iter().collect()
}

fn nilpotency_residual(cx: &ChainComplex) -> Result<f64> {
    let ds = cx.differentials();
    let mut worst: f64 = 0.0;
    for i in 0..ds.len().saturating_sub(1) {
        worst = worst.max(ds[i + 1].compose(&ds[i])?.op_norm());
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexInstance {
    pub instance: u64,
    pub algebra: Vec<usize>,
    /// Concrete dimension of each module.
    pub dims: Vec<usize>,
    pub max_parametrix: f64,
    pub max_chain_map: f64,
}

/// Parametrix equations and chain-map identities on random complexes.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexSuiteReport {
    pub instances: Vec<ComplexInstance>,
    pub max_nilpotency: f64,
    pub max_left_inverse: f64,
    pub max_right_inverse: f64,
    pub max_laplacian_kills_p: f64,
    pub max_g_kills_p: f64,
    pub max_idempotence: f64,
    pub max_p_next_d: f64,
    pub max_d_g_commutator: f64,
    pub max_d_laplacian_commutator: f64,
    pub max_d_p: f64,
    pub parametrix_checks: Vec<Check>,
    pub chain_map_checks: Vec<Check>,
    pub parametrix_passed: bool,
    pub chain_map_passed: bool,
}

struct ComplexOutcome {
    row: ComplexInstance,
    nil: f64,
    par: [f64; 5],
    chain: [f64; 4],
}

pub fn complex_suite(cfg: &RunConfig) -> Result<ComplexSuiteReport> {
    let outcomes = collect(cfg.execution.map_range(cfg.counts.complexes, |k| {
        let mut rng = instance_rng(cfg.seed, "complexes", k as u64);
        let cx = random::suite_complex(&mut rng, ComplexShape::default());
        let pars = cx.build_all_parametrices(cfg.svd_cutoff)?;
        let mut par = [0.0f64; 5];
        for p in &pars {
            let r = p.residuals(&cx.laplacian(p.degree)?)?;
            let vals = [r.left_inverse, r.right_inverse, r.laplacian_kills_p, r.g_kills_p, r.idempotence];
            for (a, v) in par.iter_mut().zip(vals) {
                *a = a.max(v);
            }
        }
        let cm = cx.verify_chain_map(&pars, cfg.tolerance)?;
        let chain = [cm.max_p_next_d, cm.max_d_g_commutator, cm.max_d_laplacian_commutator, cm.max_d_p];
        Ok(ComplexOutcome {
            row: ComplexInstance {
                instance: k as u64,
                algebra: cx.algebra().block_sizes().to_vec(),
                dims: cx.modules().iter().map(ModuleSpec::concrete_dim).collect(),
                max_parametrix: max_of(par),
                max_chain_map: max_of(chain),
            },
            nil: nilpotency_residual(&cx)?,
            par,
            chain,
        })
    }))?;
    let col_par = |j: usize| max_of(outcomes.iter().map(|o| o.par[j]));
    let col_chain = |j: usize| max_of(outcomes.iter().map(|o| o.chain[j]));
    let tol = cfg.tolerance;
    let max_nilpotency = max_of(outcomes.iter().map(|o| o.nil));
    let parametrix_checks = vec![
        Check::at_most("generated complexes satisfy D_{i+1} D_i = 0", max_nilpotency, STRICT_TOL),
        Check::at_most("g△ + p = 1 in every degree", col_par(0), tol),
        Check::at_most("△g + p = 1 in every degree", col_par(1), tol),
        Check::at_most("△p = 0 in every degree", col_par(2), tol),
        Check::at_most("gp = 0 in every degree", col_par(3), tol),
        Check::at_most("p² = p in every degree", col_par(4), tol),
    ];
    let chain_map_checks = vec![
        Check::at_most("p_{i+1} D_i = 0", col_chain(0), tol),
        Check::at_most("D_i g_i = g_{i+1} D_i", col_chain(1), tol),
        Check::at_most("D_i △_i = △_{i+1} D_i", col_chain(2), tol),
        Check::at_most("D_i p_i = 0", col_chain(3), tol),
    ];
    Ok(ComplexSuiteReport {
        max_nilpotency,
        max_left_inverse: col_par(0),
        max_right_inverse: col_par(1),
        max_laplacian_kills_p: col_par(2),
        max_g_kills_p: col_par(3),
        max_idempotence: col_par(4),
        max_p_next_d: col_chain(0),
        max_d_g_commutator: col_chain(1),
        max_d_laplacian_commutator: col_chain(2),
        max_d_p: col_chain(3),
        parametrix_passed: all_pass(&parametrix_checks),
        chain_map_passed: all_pass(&chain_map_checks),
        parametrix_checks,
        chain_map_checks,
        instances: outcomes.into_iter().map(|o| o.row).collect(),
    })
}

/// Harmonic elements against cohomology on random complexes.
#[derive(Clone, Debug, Serialize)]
pub struct CohomologySuiteReport {
    pub complexes: usize,
    pub degrees_checked: usize,
    pub dimension_mismatches: usize,
    pub kernel_dimension_mismatches: usize,
    pub max_kernel_projection_gap: f64,
    pub max_round_trip: f64,
    pub max_exact_class: f64,
    pub max_homotopy_witness: f64,
    pub scaling_mismatches: usize,
    pub min_rank_margin: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Default)]
struct CohomologyOutcome {
    degrees: usize,
    dim_mismatch: usize,
    kernel_mismatch: usize,
    gap: f64,
    round_trip: f64,
    exact_class: f64,
    witness: f64,
    scaling: usize,
    rank_margin: f64,
}

pub fn cohomology_suite(cfg: &RunConfig) -> Result<CohomologySuiteReport> {
    let (cut, tol) = (cfg.svd_cutoff, cfg.tolerance);
    let outcomes = collect(cfg.execution.map_range(cfg.counts.cohomology, |k| {
        let mut rng = instance_rng(cfg.seed, "cohomology", k as u64);
        let cx = random::suite_complex(&mut rng, ComplexShape::default());
        let mut o = CohomologyOutcome {
            rank_margin: f64::INFINITY,
            ..Default::default()
        };
        let scaled = if cx.differentials().is_empty() {
            None
        } else {
            let j = rand::Rng::random_range(&mut rng, 0..cx.differentials().len());
            Some(cx.scaled(j, random::nonzero_scalar(&mut rng))?)
        };
        for i in 0..=cx.top_degree() {
            o.degrees += 1;
            let rep = cx.cohomology_report(i, cut, tol)?;
            o.rank_margin = o.rank_margin.min(rep.rank_margin);
            if !rep.dims_agree {
                o.dim_mismatch += 1;
            }
            let kc = cx.kernel_laplacian_check(i, cut, tol)?;
            if kc.laplacian_nullity != kc.intersection_dim {
                o.kernel_mismatch += 1;
            }
            o.gap = o.gap.max(kc.projection_gap);

            let maps = cx.hodge_maps(i, cut, tol)?;
            let p = cx.build_parametrix(i, cut)?.p;
            let v = random::vector(&mut rng, cx.module(i)?);
            let h = if p.op_norm() < 0.5 {
                crate::module::ModuleVector::zero(cx.module(i)?)
            } else {
                p.apply(&v)?
            };
            o.round_trip = o.round_trip.max(maps.psi(&maps.phi(&h)?)?.sub(&h)?.norm());
            let b = random::cocycle(&mut rng, &cx, i, cut)?;
            o.witness = o.witness.max(maps.homotopy_witness(&b)?.residual);
            if i > 0 {
                let a = random::vector(&mut rng, cx.module(i - 1)?);
                let exact = cx.incoming(i).apply(&a)?;
                o.exact_class = o.exact_class.max(maps.psi(&exact)?.norm());
            }
            if let Some(s) = &scaled {
                let r2 = s.cohomology_report(i, cut, tol)?;
                if (r2.harmonic_dim_concrete, r2.cohomology_dim_concrete)
                    != (rep.harmonic_dim_concrete, rep.cohomology_dim_concrete)
                {
                    o.scaling += 1;
                }
            }
        }
        Ok(o)
    }))?;
    let sum = |f: fn(&CohomologyOutcome) -> usize| outcomes.iter().map(f).sum::<usize>();
    let max = |f: fn(&CohomologyOutcome) -> f64| max_of(outcomes.iter().map(f));
    let dimension_mismatches = sum(|o| o.dim_mismatch);
    let kernel_dimension_mismatches = sum(|o| o.kernel_mismatch);
    let scaling_mismatches = sum(|o| o.scaling);
    let max_kernel_projection_gap = max(|o| o.gap);
    let max_round_trip = max(|o| o.round_trip);
    let max_exact_class = max(|o| o.exact_class);
    let max_homotopy_witness = max(|o| o.witness);
    let checks = vec![
        Check::equal(
            "dim Ker △_i = dim Ker D_i - dim Rng D_{i-1} (mismatching degrees)",
            dimension_mismatches as i64,
            0,
        ),
        Check::equal(
            "dim Ker △_i = dim (Ker D_i ∩ Ker D_{i-1}^*) (mismatching degrees)",
            kernel_dimension_mismatches as i64,
            0,
        ),
        Check::at_most("Ker △_i = Ker D_i ∩ Ker D_{i-1}^* as projections", max_kernel_projection_gap, tol),
        Check::at_most("Ψ(Φ(h)) = h on harmonic elements", max_round_trip, tol),
        Check::at_most("Ψ(D_{i-1} a) = 0 on exact elements", max_exact_class, tol),
        Check::at_most("b - p_i b = D_{i-1}(g_{i-1} D_{i-1}^* b) on cocycles", max_homotopy_witness, tol),
        Check::equal(
            "dimensions invariant under D_i ↦ λD_i (mismatching degrees)",
            scaling_mismatches as i64,
            0,
        ),
    ];
    Ok(CohomologySuiteReport {
        complexes: outcomes.len(),
        degrees_checked: sum(|o| o.degrees),
        dimension_mismatches,
        kernel_dimension_mismatches,
        max_kernel_projection_gap,
        max_round_trip,
        max_exact_class,
        max_homotopy_witness,
        scaling_mismatches,
        min_rank_margin: min_of(outcomes.iter().map(|o| o.rank_margin)),
        passed: all_pass(&checks),
        checks,
    })
}

/// Orthogonal decomposition `v = h + D_{i-1}a + D_i^*b` on random maps and complexes.
#[derive(Clone, Debug, Serialize)]
pub struct SplitSuiteReport {
    pub morphisms: usize,
    pub complexes: usize,
    pub max_reconstruction: f64,
    pub max_orthogonality: f64,
    pub max_idempotence: f64,
    pub max_self_adjointness: f64,
    pub max_sum_to_identity: f64,
    pub max_mutual_annihilation: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn split_residuals(cx: &ChainComplex, rng: &mut impl rand::Rng, cutoff: f64) -> Result<[f64; 6]> {
    let mut worst = [0.0f64; 6];
    for i in 0..=cx.top_degree() {
        let v = random::vector(rng, cx.module(i)?);
        let split = cx.hodge_decompose(i, &v, cutoff)?;
        let pr = cx.hodge_projections(i, cutoff)?.residuals()?;
        let vals = [
            split.reconstruction_residual(&v)?,
            split.orthogonality_residual()?,
            pr.idempotence,
            pr.self_adjointness,
            pr.sum_to_identity,
            pr.mutual_annihilation,
        ];
        for (a, x) in worst.iter_mut().zip(vals) {
            *a = a.max(x);
        }
    }
    Ok(worst)
}

pub fn split_suite(cfg: &RunConfig) -> Result<SplitSuiteReport> {
    let cut = cfg.svd_cutoff;
    let mut rows = collect(cfg.execution.map_range(cfg.counts.split_morphisms, |k| {
        let mut rng = instance_rng(cfg.seed, "split-morphisms", k as u64);
        let spec = random::suite_algebra(&mut rng);
        let src = random::module(&mut rng, &spec, 4);
        let tgt = random::module(&mut rng, &spec, 4);
        let map = random::morphism(&mut rng, &src, &tgt);
        let cx = ChainComplex::new(vec![src, tgt], vec![map])?;
        split_residuals(&cx, &mut rng, cut)
    }))?;
    rows.extend(collect(cfg.execution.map_range(cfg.counts.split_complexes, |k| {
        let mut rng = instance_rng(cfg.seed, "split-complexes", k as u64);
        let cx = random::suite_complex(&mut rng, ComplexShape::default());
        split_residuals(&cx, &mut rng, cut)
    }))?);
    let col = |j: usize| max_of(rows.iter().map(|r| r[j]));
    let tol = cfg.tolerance;
    let checks = vec![
        Check::at_most("v = h + D_{i-1}a + D_i^*b", col(0), tol),
        Check::at_most("harmonic, exact and coexact parts pairwise orthogonal", col(1), tol),
        Check::at_most("P² = P for the three projections", col(2), STRICT_TOL),
        Check::at_most("P^* = P for the three projections", col(3), STRICT_TOL),
        Check::at_most("P_harm + P_exact + P_coexact = 1", col(4), tol),
        Check::at_most("P_a P_b = 0 for distinct parts", col(5), tol),
    ];
    Ok(SplitSuiteReport {
        morphisms: cfg.counts.split_morphisms,
        complexes: cfg.counts.split_complexes,
        max_reconstruction: col(0),
        max_orthogonality: col(1),
        max_idempotence: col(2),
        max_self_adjointness: col(3),
        max_sum_to_identity: col(4),
        max_mutual_annihilation: col(5),
        passed: all_pass(&checks),
        checks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DeRhamScan {
    pub dim: usize,
    pub covectors: usize,
    pub verdict: Verdict,
    pub min_sigma_margin: f64,
    /// Largest `|λ_min(Σ) - 4π²|` over samples and degrees.
    pub max_margin_deviation: f64,
}

/// Exactness, invertibility of symbol Laplacians and de Rham ellipticity.
#[derive(Clone, Debug, Serialize)]
pub struct SymbolSuiteReport {
    pub samples: usize,
    pub non_exact: usize,
    pub max_gap_deviation: f64,
    pub min_sigma_relative: f64,
    pub min_combination_relative: f64,
    pub max_containment: f64,
    pub min_injectivity_relative: f64,
    pub scaling_flips: usize,
    pub de_rham: Vec<DeRhamScan>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Default)]
struct SymbolOutcome {
    non_exact: usize,
    gap_dev: f64,
    sigma_rel: f64,
    combo_rel: f64,
    containment: f64,
    injectivity_rel: f64,
    flips: usize,
}

/// Scalar fiber algebra used for the de Rham symbol scans.
fn scan_geometry(n: usize) -> Result<TorusGeometry> {
    let spec = AlgebraSpec::new(vec![2])?;
    TorusGeometry::new(n, 1, ModuleSpec::free(&spec, 1))
}

pub fn symbol_suite(cfg: &RunConfig) -> Result<SymbolSuiteReport> {
    let cut = cfg.svd_cutoff;
    let pairs = cfg.counts.coefficient_pairs;
    let outcomes = collect(cfg.execution.map_range(cfg.counts.symbol_samples, |k| {
        let mut rng = instance_rng(cfg.seed, "symbol", k as u64);
        let ex = random::exact_sample(&mut rng, &format!("exact-{k}"));
        let s = &ex.sample;
        let mut o = SymbolOutcome {
            sigma_rel: f64::INFINITY,
            combo_rel: f64::INFINITY,
            injectivity_rel: f64::INFINITY,
            ..Default::default()
        };
        let lambda = random::nonzero_scalar(&mut rng);
        let scaled = s.scaled(1, lambda)?;
        for i in 0..=s.top_degree() {
            let chk = s.exactness_check(i, cut)?;
            if !chk.exact {
                o.non_exact += 1;
            }
            o.gap_dev = o.gap_dev.max((chk.margin - ex.gap(i)).abs());
            if scaled.exactness_check(i, cut)?.exact != chk.exact {
                o.flips += 1;
            }
            let sigma = s.sigma_laplacian(i)?;
            let norm = sigma.op_norm();
            let smin = sigma
                .fiber()
                .iter()
                .map(crate::linalg::min_singular_value)
                .fold(f64::INFINITY, f64::min);
            o.sigma_rel = o.sigma_rel.min(smin / norm);
            for _ in 0..pairs {
                let (l, m) = (random::nonzero_scalar(&mut rng), random::nonzero_scalar(&mut rng));
                o.combo_rel = o.combo_rel.min(s.automorphism_check(i, l, m, cut)?.relative_margin);
            }
            let inj = s.injectivity_diagnostics(i, cut)?;
            o.containment = o.containment.max(inj.containment_residual);
            o.injectivity_rel = o.injectivity_rel.min(inj.range_margin.min(inj.corange_margin) / norm);
        }
        Ok(o)
    }))?;
    let mut de_rham = Vec::new();
    for n in [2usize, 3] {
        let g = scan_geometry(n)?;
        let samples = collect(cfg.execution.map_range(cfg.counts.covectors, |k| {
            let mut rng = instance_rng(cfg.seed, &format!("covectors-{n}"), k as u64);
            g.de_rham_symbol_sample(&random::unit_covector(&mut rng, n))
        }))?;
        let cert = elliptic_scan(&samples, cut, cfg.execution)?;
        let dev = max_of(
            cert.samples
                .iter()
                .flat_map(|s| s.degrees.iter())
                .map(|d| (d.sigma_margin - 4.0 * PI * PI).abs()),
        );
        de_rham.push(DeRhamScan {
            dim: n,
            covectors: samples.len(),
            verdict: cert.verdict,
            min_sigma_margin: cert.min_sigma_margin,
            max_margin_deviation: dev,
        });
    }
    let sum = |f: fn(&SymbolOutcome) -> usize| outcomes.iter().map(f).sum::<usize>();
    let non_exact = sum(|o| o.non_exact);
    let scaling_flips = sum(|o| o.flips);
    let max_gap_deviation = max_of(outcomes.iter().map(|o| o.gap_dev));
    let min_sigma_relative = min_of(outcomes.iter().map(|o| o.sigma_rel));
    let min_combination_relative = min_of(outcomes.iter().map(|o| o.combo_rel));
    let max_containment = max_of(outcomes.iter().map(|o| o.containment));
    let min_injectivity_relative = min_of(outcomes.iter().map(|o| o.injectivity_rel));
    let mut checks = vec![
        Check::equal("generated samples exact in every degree (failures)", non_exact as i64, 0),
        Check::at_most("exactness margin = smallest singular value of the maps", max_gap_deviation, STRICT_TOL),
        Check::above("σ_min(Σ) / |Σ| for Σ = σσ^* + σ'^*σ'", min_sigma_relative, 1e-8),
        Check::above("σ_min(λσ'^*σ' + μσσ^*) / |Σ| for random λ, μ ≠ 0", min_combination_relative, 1e-8),
        Check::at_most("Rng σ'^* ⊆ Ker σ^*", max_containment, STRICT_TOL),
        Check::above(
            "σσ^* injective on Rng σ and σ'^*σ' injective on Rng σ'^* (relative margin)",
            min_injectivity_relative,
            1e-8,
        ),
        Check::equal("exactness unchanged under σ' ↦ λσ' (flips)", scaling_flips as i64, 0),
    ];
    for scan in &de_rham {
        checks.push(Check::holds(
            format!("de Rham symbol on {}-torus elliptic over sampled unit covectors", scan.dim),
            scan.verdict == Verdict::Elliptic,
        ));
        checks.push(Check::at_most(
            format!("de Rham symbol Laplacian = (2π|ξ|)² on {}-torus", scan.dim),
            scan.max_margin_deviation,
            STRICT_TOL,
        ));
    }
    Ok(SymbolSuiteReport {
        samples: outcomes.len(),
        non_exact,
        max_gap_deviation,
        min_sigma_relative,
        min_combination_relative,
        max_containment,
        min_injectivity_relative,
        scaling_flips,
        de_rham,
        passed: all_pass(&checks),
        checks,
    })
}

/// Harmonic forms on tori for the listed `(n, r)` over M_2(ℂ) with band 2.
#[derive(Clone, Debug, Serialize)]
pub struct DeRhamSuiteReport {
    pub cases: Vec<crate::torus::DeRhamReport>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub const DE_RHAM_CASES: [(usize, usize); 4] = [(1, 1), (2, 1), (2, 2), (3, 1)];

pub fn de_rham_suite(cfg: &RunConfig, cases: &[(usize, usize)], band: usize) -> Result<DeRhamSuiteReport> {
    let spec = AlgebraSpec::new(vec![2])?;
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    for &(n, r) in cases {
        let g = TorusGeometry::new(n, band, ModuleSpec::free(&spec, r))?;
        let (rep, c) = de_rham_case(cfg, &g)?;
        checks.extend(c);
        reports.push(rep);
    }
    Ok(DeRhamSuiteReport {
        cases: reports,
        passed: all_pass(&checks),
        checks,
    })
}

/// Harmonic A-ranks of the de Rham complex on `g` against `C(n,k)·r`.
pub fn de_rham_case(cfg: &RunConfig, g: &TorusGeometry) -> Result<(crate::torus::DeRhamReport, Vec<Check>)> {
    let (n, r) = (g.dim(), g.fiber().rank());
    let rep = g.harmonic_rank_check(cfg.svd_cutoff, cfg.tolerance, cfg.execution)?;
    let expected: Vec<usize> = (0..=n).map(|k| binomial(n, k) * r).collect();
    let got = rep.a_ranks();
    let checks = vec![
        Check::holds(
            format!("harmonic A-ranks {got:?} = C({n},k)·{r} = {expected:?}, supported on q = 0"),
            rep.degrees.iter().all(|d| d.matches),
        ),
        Check::at_most(format!("d² = 0 on every mode (n={n}, r={r})"), rep.max_d_squared, 1e-12),
        Check::at_most(
            format!("△ = 4π²|q|² on every mode (n={n}, r={r})"),
            rep.max_laplacian_multiplier_residual,
            MULTIPLIER_TOL,
        ),
    ];
    Ok((rep, checks))
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingCase {
    pub label: String,
    pub dim: usize,
    pub band: usize,
    pub t: i32,
    pub alpha: Vec<u32>,
    /// Whether `2|α| + n - 2t < -1`.
    pub strict_hypothesis: bool,
    pub hypothesis_used: Option<EmbeddingHypothesis>,
    pub constant: f64,
    pub lattice_sum: f64,
    pub tail_bound: f64,
    pub sections: usize,
    pub passes: usize,
    /// Largest `sup|∂^α s| / (‖s‖_t C)`.
    pub worst_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GateProbe {
    pub dim: usize,
    pub t: i32,
    pub alpha: Vec<u32>,
    pub hypothesis: EmbeddingHypothesis,
    pub rejected: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingSuiteReport {
    pub cases: Vec<EmbeddingCase>,
    pub probes: Vec<GateProbe>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

struct CaseSpec {
    dim: usize,
    band: usize,
    t: i32,
    alpha: Vec<u32>,
    band_only: bool,
}

fn embedding_cases() -> Vec<CaseSpec> {
    let case = |dim, band, t, alpha: &[u32], band_only| CaseSpec {
        dim,
        band,
        t,
        alpha: alpha.to_vec(),
        band_only,
    };
    vec![
        case(1, 4, 2, &[0], false),
        case(1, 4, 2, &[1], false),
        case(2, 2, 3, &[0, 0], false),
        case(2, 2, 3, &[1, 0], false),
        case(2, 2, 3, &[0, 1], false),
        case(1, 1, 1, &[0], true),
    ]
}

/// Sup-norm embedding for one `(t, α)` on random degree-0 sections over `g`.
///
/// `band_only` uses the constant summed over the band; otherwise the lattice
/// constant under the strict hypothesis when it holds and the convergent one
/// when it does not (which errors if the lattice sum diverges).
pub fn embedding_case(
    cfg: &RunConfig,
    g: &TorusGeometry,
    t: i32,
    alpha: &[u32],
    band_only: bool,
) -> Result<(EmbeddingCase, Check)> {
    let (dim, band) = (g.dim(), g.band());
    let order: u32 = alpha.iter().sum();
    let strict = EmbeddingHypothesis::Strict.admits(dim, t, order);
    let (hypothesis_used, constant, lattice_sum, tail_bound) = if band_only {
        let k = band_embedding_constant(g, t, alpha);
        (None, k, k * k, 0.0)
    } else {
        let hyp = if strict {
            EmbeddingHypothesis::Strict
        } else {
            EmbeddingHypothesis::Convergent
        };
        let k = embedding_constant(dim, t, alpha, band, hyp)?;
        (Some(hyp), k.value, k.lattice_sum, k.tail_bound)
    };
    let label = format!(
        "n={dim} N={band} t={t} α={alpha:?}{}",
        if band_only { " (band constant)" } else { "" }
    );
    let grid = crate::torus::default_grid(g);
    let results = collect(cfg.execution.map_range(cfg.counts.sections, |k| {
        let mut rng = instance_rng(cfg.seed, &format!("embedding {label}"), k as u64);
        let s = random::section(&mut rng, g, 0)?;
        embedding_check_with(&s, t, alpha, constant, grid)
    }))?;
    let passes = results.iter().filter(|r| r.pass).count();
    let worst_ratio = max_of(results.iter().filter(|r| r.bound > 0.0).map(|r| r.lhs / r.bound));
    let check = Check::equal(
        format!("sup|∂^α s| ≤ ‖s‖_t·C for {label} (sections passing)"),
        passes as i64,
        results.len() as i64,
    );
    let case = EmbeddingCase {
        label,
        dim,
        band,
        t,
        alpha: alpha.to_vec(),
        strict_hypothesis: strict,
        hypothesis_used,
        constant,
        lattice_sum,
        tail_bound,
        sections: results.len(),
        passes,
        worst_ratio,
    };
    Ok((case, check))
}

/// Sup-norm embedding on random sections, using the lattice constant where
/// the lattice sum converges and the band constant for the band-only case.
pub fn embedding_suite(cfg: &RunConfig) -> Result<EmbeddingSuiteReport> {
    let spec = AlgebraSpec::new(vec![2])?;
    let mut cases = Vec::new();
    let mut checks = Vec::new();
    for cs in embedding_cases() {
        let g = TorusGeometry::new(cs.dim, cs.band, ModuleSpec::free(&spec, 1))?;
        let (case, check) = embedding_case(cfg, &g, cs.t, &cs.alpha, cs.band_only)?;
        checks.push(check);
        cases.push(case);
    }
    let probe_list: [(usize, i32, &[u32], EmbeddingHypothesis, bool); 5] = [
        (1, 1, &[0], EmbeddingHypothesis::Strict, true),
        (1, 2, &[1], EmbeddingHypothesis::Strict, true),
        (2, 2, &[1, 0], EmbeddingHypothesis::Strict, true),
        (2, 2, &[1, 0], EmbeddingHypothesis::Convergent, true),
        (1, 2, &[0], EmbeddingHypothesis::Strict, false),
    ];
    let mut probes = Vec::new();
    for (dim, t, alpha, hyp, expect_reject) in probe_list {
        let rejected = matches!(
            embedding_constant(dim, t, alpha, 1, hyp),
            Err(Error::HypothesisViolated { .. })
        );
        checks.push(Check::holds(
            format!(
                "{} for n={dim} t={t} α={alpha:?} under the {} condition",
                if expect_reject { "rejected" } else { "admitted" },
                match hyp {
                    EmbeddingHypothesis::Strict => "2|α|+n-2t < -1",
                    EmbeddingHypothesis::Convergent => "2|α|+n-2t < 0",
                }
            ),
            rejected == expect_reject,
        ));
        probes.push(GateProbe {
            dim,
            t,
            alpha: alpha.to_vec(),
            hypothesis: hyp,
            rejected,
        });
    }
    Ok(EmbeddingSuiteReport {
        cases,
        probes,
        passed: all_pass(&checks),
        checks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularitySuiteReport {
    pub dim: usize,
    pub band: usize,
    pub instances: usize,
    pub gain_constant: f64,
    pub max_solve_residual: f64,
    pub gain_failures: usize,
    /// Largest `‖u‖_{t+2} / (C‖f‖_t)` over instances and `t`.
    pub worst_gain_ratio: f64,
    pub kernel_disagreements: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub const REGULARITY_ORDERS: [i32; 3] = [-2, 0, 2];

pub fn regularity_suite(cfg: &RunConfig) -> Result<RegularitySuiteReport> {
    let spec = AlgebraSpec::new(vec![2])?;
    regularity_on(cfg, &TorusGeometry::new(2, 4, ModuleSpec::free(&spec, 1))?)
}

/// Solves `△u = f - Pf` for random right-hand sides of random form degree on `g`.
pub fn regularity_on(cfg: &RunConfig, g: &TorusGeometry) -> Result<RegularitySuiteReport> {
    let (dim, band) = (g.dim(), g.band());
    let g = g.clone();
    let rows = collect(cfg.execution.map_range(cfg.counts.regularity, |k| {
        let mut rng = instance_rng(cfg.seed, "regularity", k as u64);
        let degree = rand::Rng::random_range(&mut rng, 0..=dim);
        let f = random::section(&mut rng, &g, degree)?;
        let mut residual: f64 = 0.0;
        let mut failures = 0usize;
        let mut ratio: f64 = 0.0;
        let mut kernels_ok = true;
        let mut constant = 0.0;
        for t in REGULARITY_ORDERS {
            let (_, rep) = regularity_demo(&f, t, cfg.svd_cutoff)?;
            residual = residual.max(rep.solve_residual);
            if !rep.gain_holds {
                failures += 1;
            }
            if rep.rhs > 0.0 {
                ratio = ratio.max(rep.lhs / rep.rhs);
            }
            kernels_ok &= rep.kernels_agree;
            constant = rep.gain_constant;
        }
        Ok((residual, failures, ratio, kernels_ok, constant))
    }))?;
    let max_solve_residual = max_of(rows.iter().map(|r| r.0));
    let gain_failures: usize = rows.iter().map(|r| r.1).sum();
    let worst_gain_ratio = max_of(rows.iter().map(|r| r.2));
    let kernel_disagreements = rows.iter().filter(|r| !r.3).count();
    let gain_constant = rows.first().map(|r| r.4).unwrap_or(0.0);
    let checks = vec![
        Check::at_most("△u = f - Pf", max_solve_residual, STRICT_TOL),
        Check::equal(
            "‖u‖_{t+2} ≤ C‖f‖_t for t ∈ {-2, 0, 2} (failures)",
            gain_failures as i64,
            0,
        ),
        Check::equal(
            "kernel of △ on W^t is the zero mode for t ∈ {-2, 0, 2} (disagreements)",
            kernel_disagreements as i64,
            0,
        ),
    ];
    Ok(RegularitySuiteReport {
        dim,
        band,
        instances: rows.len(),
        gain_constant,
        max_solve_residual,
        gain_failures,
        worst_gain_ratio,
        kernel_disagreements,
        passed: all_pass(&checks),
        checks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionLine {
    pub number: usize,
    pub name: String,
    pub passed: bool,
}

/// Every suite under one configuration.
#[derive(Clone, Debug, Serialize)]
pub struct FullReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub complexes: ComplexSuiteReport,
    pub cohomology: CohomologySuiteReport,
    pub split: SplitSuiteReport,
    pub symbol: SymbolSuiteReport,
    pub de_rham: DeRhamSuiteReport,
    pub embedding: EmbeddingSuiteReport,
    pub regularity: RegularitySuiteReport,
    pub criteria: Vec<CriterionLine>,
    pub passed: bool,
}

pub fn run_all(cfg: &RunConfig) -> Result<FullReport> {
    cfg.validate()?;
    let complexes = complex_suite(cfg)?;
    let cohomology = cohomology_suite(cfg)?;
    let split = split_suite(cfg)?;
    let symbol = symbol_suite(cfg)?;
    let de_rham = de_rham_suite(cfg, &DE_RHAM_CASES, 2)?;
    let embedding = embedding_suite(cfg)?;
    let regularity = regularity_suite(cfg)?;
    let line = |number, name: &str, passed| CriterionLine {
        number,
        name: name.to_string(),
        passed,
    };
    let criteria = vec![
        line(1, "parametrix equations on random complexes", complexes.parametrix_passed),
        line(2, "parametrices commute with the differentials", complexes.chain_map_passed),
        line(3, "harmonic elements represent cohomology", cohomology.passed),
        line(4, "orthogonal Hodge split", split.passed),
        line(5, "symbol Laplacians of exact sequences are invertible", symbol.passed),
        line(6, "de Rham harmonic forms on tori", de_rham.passed),
        line(7, "Sobolev embedding into continuous sections", embedding.passed),
        line(8, "elliptic regularity gain on the torus", regularity.passed),
    ];
    let passed = criteria.iter().all(|c| c.passed);
    Ok(FullReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        complexes,
        cohomology,
        split,
        symbol,
        de_rham,
        embedding,
        regularity,
        criteria,
        passed,
    })
}
