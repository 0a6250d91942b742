//! One function per subcommand. Each returns its details and checks; errors
//! mean the input could not be used at all.

use std::path::Path;

use hodge_cstar::config::RunConfig;
use hodge_cstar::report::Check;
use hodge_cstar::suite::{self, EmbeddingCase, RegularitySuiteReport};
use hodge_cstar::symbol::{elliptic_scan, EllipticityCertificate, Verdict};
use hodge_cstar::torus::{DeRhamReport, EmbeddingHypothesis, TorusGeometry};
use hodge_cstar::{io, ChainComplex, ModuleSpec, Result};
use serde::Serialize;

pub struct Outcome<T> {
    pub details: T,
    pub summary: Vec<String>,
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
pub struct ModuleInfo {
    pub rank: usize,
    pub free: bool,
    pub concrete_dim: usize,
}

#[derive(Serialize)]
pub struct ComplexInfo {
    pub algebra: Vec<usize>,
    pub modules: Vec<ModuleInfo>,
    /// `|D_i|` for every differential.
    pub differential_norms: Vec<f64>,
    /// `|D_{i+1} D_i|` for every composable pair.
    pub composite_norms: Vec<f64>,
}

fn describe(cx: &ChainComplex) -> Result<ComplexInfo> {
    let modules = cx
        .modules()
        .iter()
        .map(|m: &ModuleSpec| ModuleInfo {
            rank: m.rank(),
            free: m.is_free(),
            concrete_dim: m.concrete_dim(),
        })
        .collect();
    let d = cx.differentials();
    let composite_norms = d
        .windows(2)
        .map(|w| Ok(w[1].compose(&w[0])?.op_norm()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexInfo {
        algebra: cx.algebra().block_sizes().to_vec(),
        modules,
        differential_norms: d.iter().map(|m| m.op_norm()).collect(),
        composite_norms,
    })
}

fn complex_summary(info: &ComplexInfo) -> String {
    let ranks: Vec<String> = info
        .modules
        .iter()
        .map(|m| format!("{}{}", m.rank, if m.free { "" } else { "p" }))
        .collect();
    let note = if info.modules.iter().any(|m| !m.free) {
        " (p = projective)"
    } else {
        ""
    };
    format!(
        "algebra {:?}, {} modules of rank [{}]{note}",
        info.algebra,
        info.modules.len(),
        ranks.join(", ")
    )
}

pub fn check_complex(path: &Path, cfg: &RunConfig) -> Result<Outcome<ComplexInfo>> {
    let cx = io::load_complex(path)?;
    let info = describe(&cx)?;
    let mut checks: Vec<Check> = info
        .composite_norms
        .iter()
        .enumerate()
        .map(|(i, &r)| Check::at_most(format!("D_{} D_{i} = 0", i + 1), r, cfg.tolerance))
        .collect();
    if checks.is_empty() {
        checks.push(Check::holds("no composable differentials: D² = 0 holds vacuously", true));
    }
    let summary = vec![complex_summary(&info)];
    Ok(Outcome {
        details: info,
        summary,
        checks,
    })
}

#[derive(Serialize)]
pub struct HodgeDetails {
    pub complex: ComplexInfo,
    pub degrees: Vec<hodge_cstar::complex::HodgeReport>,
}

fn degrees_of(cx: &ChainComplex, degree: Option<usize>) -> Vec<usize> {
    match degree {
        Some(i) => vec![i],
        None => (0..=cx.top_degree()).collect(),
    }
}

pub fn hodge(path: &Path, degree: Option<usize>, cfg: &RunConfig) -> Result<Outcome<HodgeDetails>> {
    let cx = io::load_complex(path)?;
    let info = describe(&cx)?;
    let mut summary = vec![complex_summary(&info)];
    let mut checks = Vec::new();
    let mut degrees = Vec::new();
    for i in degrees_of(&cx, degree) {
        let rep = cx.cohomology_report(i, cfg.svd_cutoff, cfg.tolerance)?;
        summary.push(format!(
            "degree {i}: dim harmonic {}, dim cohomology {}, A-rank {}, rank margin {:.3e}",
            rep.harmonic_dim_concrete,
            rep.cohomology_dim_concrete,
            rep.harmonic_a_rank.map_or_else(|| "-".to_string(), |r| r.to_string()),
            rep.rank_margin
        ));
        checks.push(Check::equal(
            format!("degree {i}: dim Ker △_i = dim Ker D_i - dim Im D_{{i-1}}"),
            rep.harmonic_dim_concrete as i64,
            rep.cohomology_dim_concrete,
        ));
        for (name, &value) in &rep.residuals {
            checks.push(Check::at_most(format!("degree {i}: {name}"), value, cfg.tolerance));
        }
        degrees.push(rep);
    }
    let dims: Vec<String> = degrees.iter().map(|r| r.harmonic_dim_concrete.to_string()).collect();
    summary.push(format!("harmonic dimensions: ({})", dims.join(",")));
    Ok(Outcome {
        details: HodgeDetails { complex: info, degrees },
        summary,
        checks,
    })
}

#[derive(Serialize)]
pub struct ParametrixDetails {
    pub degree: usize,
    pub residuals: hodge_cstar::complex::ParametrixResiduals,
    /// Chain-map residuals against degree `i + 1`, absent at the top degree.
    pub chain_map: Option<ChainMapDetails>,
}

#[derive(Serialize)]
pub struct ChainMapDetails {
    pub p_next_d: f64,
    pub d_g_commutator: f64,
    pub d_laplacian_commutator: f64,
}

pub fn parametrix(path: &Path, degree: usize, cfg: &RunConfig) -> Result<Outcome<ParametrixDetails>> {
    let cx = io::load_complex(path)?;
    let lap = cx.laplacian(degree)?;
    let par = cx.build_parametrix(degree, cfg.svd_cutoff)?;
    let r = par.residuals(&lap)?;
    let tol = cfg.tolerance;
    let i = degree;
    let mut checks = vec![
        Check::at_most(format!("g_{i}△_{i} + p_{i} = 1"), r.left_inverse, tol),
        Check::at_most(format!("△_{i}g_{i} + p_{i} = 1"), r.right_inverse, tol),
        Check::at_most(format!("△_{i}p_{i} = 0"), r.laplacian_kills_p, tol),
        Check::at_most(format!("g_{i}p_{i} = 0"), r.g_kills_p, tol),
        Check::at_most(format!("p_{i}² = p_{i}"), r.idempotence, tol),
    ];
    let chain_map = if i < cx.top_degree() {
        let next = cx.build_parametrix(i + 1, cfg.svd_cutoff)?;
        let d = &cx.differentials()[i];
        let lap_next = cx.laplacian(i + 1)?;
        let c = ChainMapDetails {
            p_next_d: next.p.compose(d)?.op_norm(),
            d_g_commutator: d.compose(&par.g)?.distance(&next.g.compose(d)?)?,
            d_laplacian_commutator: d.compose(&lap)?.distance(&lap_next.compose(d)?)?,
        };
        let j = i + 1;
        checks.push(Check::at_most(format!("p_{j} D_{i} = 0"), c.p_next_d, tol));
        checks.push(Check::at_most(format!("D_{i} g_{i} = g_{j} D_{i}"), c.d_g_commutator, tol));
        checks.push(Check::at_most(
            format!("D_{i} △_{i} = △_{j} D_{i}"),
            c.d_laplacian_commutator,
            tol,
        ));
        Some(c)
    } else {
        None
    };
    let summary = vec![format!(
        "parametrix of △_{i} on a module of concrete dimension {}",
        cx.module(i)?.concrete_dim()
    )];
    Ok(Outcome {
        details: ParametrixDetails {
            degree: i,
            residuals: r,
            chain_map,
        },
        summary,
        checks,
    })
}

pub fn ellipticity(path: &Path, cfg: &RunConfig) -> Result<Outcome<EllipticityCertificate>> {
    let samples = io::load_samples(path)?;
    let cert = elliptic_scan(&samples, cfg.svd_cutoff, cfg.execution)?;
    let summary = vec![
        format!("{} samples, verdict {}", cert.samples.len(), cert.verdict.as_str()),
        format!(
            "min exactness margin {:.6e}, min λ_min(Σ) {:.6e}, min relative margin {:.6e}",
            cert.min_exactness_margin, cert.min_sigma_margin, cert.min_relative_margin
        ),
    ];
    let checks = vec![
        Check::holds("σ_{i+1}σ_i = 0 and Ker σ_i = Im σ_{i-1} at every sample", cert.all_exact),
        Check::holds(
            "exact symbol sequence ⟹ Σ_i = σ_{i-1}σ_{i-1}* + σ_i*σ_i invertible",
            cert.exact_implies_invertible,
        ),
        Check::above(
            "σ_min(Σ)/|Σ| over all samples and degrees",
            cert.min_relative_margin,
            10.0 * cfg.svd_cutoff,
        ),
        Check::holds(
            format!("verdict elliptic on the sampled covectors (got {})", cert.verdict.as_str()),
            cert.verdict == Verdict::Elliptic,
        ),
    ];
    Ok(Outcome {
        details: cert,
        summary,
        checks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum TorusSuite {
    Derham,
    Embedding,
    Regularity,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TorusDetails {
    Derham(DeRhamReport),
    Embedding(Vec<EmbeddingCase>),
    Regularity(RegularitySuiteReport),
}

/// Smallest integer `t` with `2|α| + n - 2t < -1` for `|α| = 1`.
pub fn default_embedding_order(n: usize) -> i32 {
    (n as i32 + 3) / 2 + 1
}

pub fn torus_demo(
    n: usize,
    band: usize,
    fiber: ModuleSpec,
    which: TorusSuite,
    order: Option<i32>,
    cfg: &RunConfig,
) -> Result<Outcome<TorusDetails>> {
    let g = TorusGeometry::new(n, band, fiber)?;
    let head = format!(
        "torus T^{n}, band {band} ({} modes), fiber A^{} over {:?}",
        g.mode_count(),
        g.fiber().rank(),
        g.algebra().block_sizes()
    );
    let mut summary = vec![head];
    match which {
        TorusSuite::Derham => {
            let (rep, checks) = suite::de_rham_case(cfg, &g)?;
            let ranks: Vec<String> = rep
                .a_ranks()
                .iter()
                .map(|r| r.map_or_else(|| "-".to_string(), |r| r.to_string()))
                .collect();
            summary.push(format!("harmonic A-ranks: ({})", ranks.join(",")));
            Ok(Outcome {
                details: TorusDetails::Derham(rep),
                summary,
                checks,
            })
        }
        TorusSuite::Embedding => {
            let t = order.unwrap_or_else(|| default_embedding_order(n));
            let mut alphas = vec![vec![0u32; n]];
            for k in 0..n {
                let mut a = vec![0u32; n];
                a[k] = 1;
                alphas.push(a);
            }
            let mut cases = Vec::new();
            let mut checks = Vec::new();
            for alpha in alphas {
                let order: u32 = alpha.iter().sum();
                if !EmbeddingHypothesis::Convergent.admits(n, t, order) {
                    summary.push(format!("α={alpha:?}: lattice sum diverges at t={t}, skipped"));
                    continue;
                }
                let (case, check) = suite::embedding_case(cfg, &g, t, &alpha, false)?;
                summary.push(format!(
                    "{}: C = {:.6} ({} hypothesis), worst ratio {:.4}",
                    case.label,
                    case.constant,
                    if case.strict_hypothesis { "strict" } else { "convergent" },
                    case.worst_ratio
                ));
                checks.push(check);
                cases.push(case);
            }
            if checks.is_empty() {
                checks.push(Check::holds(format!("some derivative order is admissible at t={t}"), false));
            }
            Ok(Outcome {
                details: TorusDetails::Embedding(cases),
                summary,
                checks,
            })
        }
        TorusSuite::Regularity => {
            let rep = suite::regularity_on(cfg, &g)?;
            summary.push(format!(
                "{} right-hand sides, C = {:.6}, worst ‖u‖_(t+2)/(C‖f‖_t) {:.4}",
                rep.instances, rep.gain_constant, rep.worst_gain_ratio
            ));
            let checks = rep.checks.clone();
            Ok(Outcome {
                details: TorusDetails::Regularity(rep),
                summary,
                checks,
            })
        }
    }
}
