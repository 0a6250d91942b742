//! JSON file formats for complexes, symbol sample sets and torus sections.
//!
//! Complex numbers are `[re, im]`, an algebra element is its list of blocks
//! (each a list of rows), and an A-matrix is a list of rows of elements.
//! Files are written with 17 significant digits, so save/load round-trips
//! are exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraSpec};
use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::hom::Morphism;
use crate::linalg::{c, CMat};
use crate::module::{ModuleSpec, ModuleVector};
use crate::report::to_json;
use crate::symbol::SymbolSample;
use crate::torus::{TorusGeometry, TorusSection};

type ElementWire = Vec<Vec<Vec<[f64; 2]>>>;
type MatrixWire = Vec<Vec<ElementWire>>;

fn element_to_wire(a: &AlgebraElement) -> ElementWire {
    a.blocks()
        .iter()
        .map(|m| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|k| [m[(r, k)].re, m[(r, k)].im]).collect())
                .collect()
        })
        .collect()
}

fn element_from_wire(spec: &AlgebraSpec, w: &ElementWire) -> Result<AlgebraElement> {
    if w.len() != spec.num_blocks() {
        return Err(Error::SpecMismatch(format!(
            "element with {} blocks over algebra {spec}",
            w.len()
        )));
    }
    let mut blocks = Vec::with_capacity(w.len());
    for (rows, &n) in w.iter().zip(spec.block_sizes()) {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::SpecMismatch(format!("block is not {n}×{n}")));
        }
        blocks.push(CMat::from_fn(n, n, |r, k| c(rows[r][k][0], rows[r][k][1])));
    }
    AlgebraElement::from_blocks(spec, blocks)
}

fn matrix_to_wire(t: &[Vec<AlgebraElement>]) -> MatrixWire {
    t.iter().map(|row| row.iter().map(element_to_wire).collect()).collect()
}

fn matrix_from_wire(spec: &AlgebraSpec, w: &MatrixWire) -> Result<Vec<Vec<AlgebraElement>>> {
    w.iter()
        .map(|row| row.iter().map(|e| element_from_wire(spec, e)).collect())
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModuleWire {
    rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    projection: Option<MatrixWire>,
}

fn module_to_wire(m: &ModuleSpec) -> ModuleWire {
    ModuleWire {
        rank: m.rank(),
        projection: m.projection_entries().map(|p| matrix_to_wire(&p)),
    }
}

fn module_from_wire(spec: &AlgebraSpec, w: &ModuleWire) -> Result<ModuleSpec> {
    match &w.projection {
        None => Ok(ModuleSpec::free(spec, w.rank)),
        Some(p) => ModuleSpec::projective(spec, w.rank, &matrix_from_wire(spec, p)?),
    }
}

/// A map given either as a bare A-matrix or as `{source, target, matrix}`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MapWire {
    Full {
        source: ModuleWire,
        target: ModuleWire,
        matrix: MatrixWire,
    },
    Bare(MatrixWire),
}

fn map_from_wire(spec: &AlgebraSpec, w: &MapWire, source: &ModuleSpec, target: &ModuleSpec) -> Result<Morphism> {
    let matrix = match w {
        MapWire::Bare(m) => m,
        MapWire::Full {
            source: s,
            target: t,
            matrix,
        } => {
            module_from_wire(spec, s)?.check_same(source)?;
            module_from_wire(spec, t)?.check_same(target)?;
            matrix
        }
    };
    Morphism::from_entries(source, target, &matrix_from_wire(spec, matrix)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexFile {
    algebra: AlgebraSpec,
    modules: Vec<ModuleWire>,
    differentials: Vec<MapWire>,
}

pub fn complex_from_str(text: &str) -> Result<ChainComplex> {
    let f: ComplexFile = serde_json::from_str(text)?;
    let modules = f
        .modules
        .iter()
        .map(|m| module_from_wire(&f.algebra, m))
        .collect::<Result<Vec<_>>>()?;
    if modules.is_empty() || f.differentials.len() + 1 != modules.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} modules need {} differentials, got {}",
            modules.len(),
            modules.len().saturating_sub(1),
            f.differentials.len()
        )));
    }
    let differentials = f
        .differentials
        .iter()
        .enumerate()
        .map(|(i, d)| map_from_wire(&f.algebra, d, &modules[i], &modules[i + 1]))
        .collect::<Result<Vec<_>>>()?;
    ChainComplex::new(modules, differentials)
}

pub fn complex_to_string(cx: &ChainComplex) -> Result<String> {
    let f = ComplexFile {
        algebra: cx.algebra().clone(),
        modules: cx.modules().iter().map(module_to_wire).collect(),
        differentials: cx
            .differentials()
            .iter()
            .map(|d| MapWire::Bare(matrix_to_wire(&d.entries())))
            .collect(),
    };
    to_json(&f)
}

pub fn load_complex(path: impl AsRef<Path>) -> Result<ChainComplex> {
    complex_from_str(&fs::read_to_string(path)?)
}

pub fn save_complex(cx: &ChainComplex, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, complex_to_string(cx)? + "\n")?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleWire {
    tag: String,
    maps: Vec<MapWire>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleSetFile {
    algebra: AlgebraSpec,
    fibers: Vec<ModuleWire>,
    samples: Vec<SampleWire>,
}

pub fn samples_from_str(text: &str) -> Result<Vec<SymbolSample>> {
    let f: SampleSetFile = serde_json::from_str(text)?;
    let fibers = f
        .fibers
        .iter()
        .map(|m| module_from_wire(&f.algebra, m))
        .collect::<Result<Vec<_>>>()?;
    if fibers.is_empty() {
        return Err(Error::DimensionMismatch("a sample set needs at least one fiber".into()));
    }
    f.samples
        .iter()
        .map(|s| {
            if s.maps.len() + 1 != fibers.len() {
                return Err(Error::DimensionMismatch(format!(
                    "sample {:?} has {} maps for {} fibers",
                    s.tag,
                    s.maps.len(),
                    fibers.len()
                )));
            }
            let maps = s
                .maps
                .iter()
                .enumerate()
                .map(|(i, m)| map_from_wire(&f.algebra, m, &fibers[i], &fibers[i + 1]))
                .collect::<Result<Vec<_>>>()?;
            SymbolSample::new(s.tag.clone(), fibers.clone(), maps)
        })
        .collect()
}

/// Writes samples sharing one list of fibers.
pub fn samples_to_string(samples: &[SymbolSample]) -> Result<String> {
    let first = samples.first().ok_or(Error::EmptySampleSet)?;
    for s in samples {
        if s.fibers() != first.fibers() {
            return Err(Error::DimensionMismatch(format!(
                "sample {:?} uses different fibers",
                s.tag()
            )));
        }
    }
    let f = SampleSetFile {
        algebra: first.complex().algebra().clone(),
        fibers: first.fibers().iter().map(module_to_wire).collect(),
        samples: samples
            .iter()
            .map(|s| SampleWire {
                tag: s.tag().to_string(),
                maps: s
                    .maps()
                    .iter()
                    .map(|m| MapWire::Full {
                        source: module_to_wire(m.source()),
                        target: module_to_wire(m.target()),
                        matrix: matrix_to_wire(&m.entries()),
                    })
                    .collect(),
            })
            .collect(),
    };
    to_json(&f)
}

pub fn load_samples(path: impl AsRef<Path>) -> Result<Vec<SymbolSample>> {
    samples_from_str(&fs::read_to_string(path)?)
}

pub fn save_samples(samples: &[SymbolSample], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, samples_to_string(samples)? + "\n")?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryWire {
    n: usize,
    #[serde(rename = "N")]
    band: usize,
    algebra: AlgebraSpec,
    fiber: ModuleWire,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffWire {
    q: Vec<i64>,
    value: Vec<ElementWire>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SectionFile {
    geometry: GeometryWire,
    degree: usize,
    coeffs: Vec<CoeffWire>,
}

pub fn section_from_str(text: &str) -> Result<TorusSection> {
    let f: SectionFile = serde_json::from_str(text)?;
    let spec = &f.geometry.algebra;
    let fiber = module_from_wire(spec, &f.geometry.fiber)?;
    let geometry = TorusGeometry::new(f.geometry.n, f.geometry.band, fiber)?;
    if f.degree > geometry.dim() {
        return Err(Error::IndexOutOfRange {
            degree: f.degree,
            max: geometry.dim(),
        });
    }
    let local = geometry.local_module(f.degree);
    let modes = f
        .coeffs
        .iter()
        .map(|cw| {
            let entries = cw
                .value
                .iter()
                .map(|e| element_from_wire(spec, e))
                .collect::<Result<Vec<_>>>()?;
            Ok((cw.q.clone(), ModuleVector::from_entries(&local, &entries)?))
        })
        .collect::<Result<Vec<_>>>()?;
    TorusSection::from_modes(&geometry, f.degree, modes)
}

/// Writes the nonzero coefficients of a section.
pub fn section_to_string(s: &TorusSection) -> Result<String> {
    let g = s.geometry();
    let coeffs = g
        .modes()
        .into_iter()
        .zip(s.coefficients())
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(q, v)| CoeffWire {
            q,
            value: v.entries().iter().map(element_to_wire).collect(),
        })
        .collect();
    let f = SectionFile {
        geometry: GeometryWire {
            n: g.dim(),
            band: g.band(),
            algebra: g.algebra().clone(),
            fiber: module_to_wire(g.fiber()),
        },
        degree: s.degree(),
        coeffs,
    };
    to_json(&f)
}

pub fn load_section(path: impl AsRef<Path>) -> Result<TorusSection> {
    section_from_str(&fs::read_to_string(path)?)
}

pub fn save_section(s: &TorusSection, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, section_to_string(s)? + "\n")?;
    Ok(())
}
