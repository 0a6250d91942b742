//! Dense complex linear algebra shared by the module, morphism and symbol code.
//!
//! Everything here works on the per-block "fiber matrices" and tolerates
//! empty matrices, which appear whenever a zero module enters a complex.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

// nalgebra's complex SVD loses accuracy on small rank-deficient blocks
// (reconstruction errors up to 1e-5 were observed), its Hermitian eigensolver
// does not. Singular data therefore comes from eigendecompositions: directly
// for Hermitian input, otherwise from the Jordan-Wielandt matrix
// [[0, M], [M^*, 0]] whose eigenvalues are the ±σ of M.

fn is_hermitian(m: &CMat) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= 1e-14 * max_abs(m)
}

/// Eigenpairs of a Hermitian matrix ordered by descending `|λ|`.
fn hermitian_eig(h: &CMat) -> (Vec<f64>, CMat) {
    let h = (h + h.adjoint()) * c(0.5, 0.0);
    let e = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[b].abs().total_cmp(&e.eigenvalues[a].abs()));
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let mut vecs = CMat::zeros(e.eigenvectors.nrows(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &e.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Singular data sorted by descending singular value: `sigma` has
/// `min(rows, cols)` entries, `v` and `u` hold the right and left singular
/// vectors for every entry of `sigma` that is resolved (positive).
struct SortedSvd {
    u: CMat,
    v: CMat,
    sigma: Vec<f64>,
}

fn sorted_svd(m: &CMat) -> SortedSvd {
    let (r, cols) = m.shape();
    let k = r.min(cols);
    if k == 0 {
        return SortedSvd {
            u: CMat::zeros(r, 0),
            v: CMat::zeros(cols, 0),
            sigma: Vec::new(),
        };
    }
    if is_hermitian(m) {
        let (vals, vecs) = hermitian_eig(m);
        let sigma: Vec<f64> = vals.iter().map(|l| l.abs()).collect();
        let mut u = vecs.clone();
        for (j, l) in vals.iter().enumerate() {
            if *l < 0.0 {
                u.column_mut(j).neg_mut();
            }
        }
        return SortedSvd { u, v: vecs, sigma };
    }
    let mut aug = CMat::zeros(r + cols, r + cols);
    aug.view_mut((0, r), (r, cols)).copy_from(m);
    aug.view_mut((r, 0), (cols, r)).copy_from(&m.adjoint());
    let e = SymmetricEigen::new(aug);
    let mut order: Vec<usize> = (0..r + cols).collect();
    order.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let sigma: Vec<f64> = order[..k].iter().map(|&j| e.eigenvalues[j].max(0.0)).collect();
    let mut u = CMat::zeros(r, k);
    let mut v = CMat::zeros(cols, k);
    for (dst, &src) in order[..k].iter().enumerate() {
        let col = e.eigenvectors.column(src);
        let vj = col.rows(r, cols).into_owned();
        let nv = vj.norm();
        if nv == 0.0 {
            continue;
        }
        let vj = vj / c(nv, 0.0);
        // u = Mv/σ keeps the pairing exact even if ±σ eigenvectors mix.
        let mv = m * &vj;
        let nu = mv.norm();
        if nu > 0.0 {
            u.set_column(dst, &(mv / c(nu, 0.0)));
        }
        v.set_column(dst, &vj);
    }
    SortedSvd { u, v, sigma }
}

fn kept(sigma: &[f64], threshold: f64) -> usize {
    sigma.iter().filter(|&&s| s > threshold && s > 0.0).count()
}

/// Absolute threshold below which singular values count as zero.
pub fn rank_threshold(sigma_max: f64, cutoff: f64) -> f64 {
    cutoff * sigma_max
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    sorted_svd(m).sigma
}

/// Largest singular value; 0 for empty matrices.
pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a square matrix (the distance to singularity);
/// `f64::INFINITY` for the empty matrix.
pub fn min_singular_value(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(f64::INFINITY)
}

/// Numerical rank with relative cutoff `cutoff * sigma_max`.
pub fn rank(m: &CMat, cutoff: f64) -> usize {
    rank_above(m, rank_threshold(op_norm(m), cutoff))
}

/// Number of singular values strictly above `threshold` (zero matrices have rank 0).
pub fn rank_above(m: &CMat, threshold: f64) -> usize {
    kept(&singular_values(m), threshold)
}

/// Moore-Penrose pseudoinverse with relative singular-value cutoff.
pub fn pinv(m: &CMat, cutoff: f64) -> CMat {
    pinv_above(m, rank_threshold(op_norm(m), cutoff))
}

/// Pseudoinverse inverting only singular values strictly above `threshold`.
pub fn pinv_above(m: &CMat, threshold: f64) -> CMat {
    let (r, cols) = m.shape();
    let mut out = CMat::zeros(cols, r);
    let svd = sorted_svd(m);
    for j in 0..kept(&svd.sigma, threshold) {
        out += svd.v.column(j) * svd.u.column(j).adjoint() * c(1.0 / svd.sigma[j], 0.0);
    }
    out
}

/// Orthonormal basis (columns) of the null space of `m`.
pub fn null_space(m: &CMat, cutoff: f64) -> CMat {
    null_space_below(m, rank_threshold(op_norm(m), cutoff))
}

/// Null space where singular values `<= threshold` count as zero.
pub fn null_space_below(m: &CMat, threshold: f64) -> CMat {
    let cols = m.ncols();
    let svd = sorted_svd(m);
    let rk = kept(&svd.sigma, threshold);
    let vk = svd.v.columns(0, rk);
    complement(&vk, cols)
}

/// Orthonormal basis of the orthogonal complement of the columns of `frame`
/// (assumed orthonormal) in `C^dim`.
fn complement(frame: &nalgebra::DMatrixView<C64>, dim: usize) -> CMat {
    let want = dim - frame.ncols().min(dim);
    if want == 0 {
        return CMat::zeros(dim, 0);
    }
    let q = CMat::identity(dim, dim) - frame * frame.adjoint();
    let (_, vecs) = hermitian_eig(&q);
    vecs.columns(0, want).into_owned()
}

/// Orthonormal basis (columns) of the column space of `m`.
pub fn range_basis(m: &CMat, cutoff: f64) -> CMat {
    range_basis_above(m, rank_threshold(op_norm(m), cutoff))
}

/// Column space spanned by singular directions with singular value `> threshold`.
pub fn range_basis_above(m: &CMat, threshold: f64) -> CMat {
    let svd = sorted_svd(m);
    let rk = kept(&svd.sigma, threshold);
    svd.u.columns(0, rk).into_owned()
}

/// Eigenvalues (ascending) of the Hermitian part `(m + m^*)/2`.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Largest entry modulus; 0 for empty matrices.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product `m ⊗ I_n`.
pub fn kron_identity(m: &CMat, n: usize) -> CMat {
    let mut out = CMat::zeros(m.nrows() * n, m.ncols() * n);
    for ((i, j), z) in m.iter().enumerate().map(|(idx, z)| ((idx % m.nrows(), idx / m.nrows()), z)) {
        if *z != c(0.0, 0.0) {
            for k in 0..n {
                out[(i * n + k, j * n + k)] = *z;
            }
        }
    }
    out
}

/// Block-diagonal assembly of square or rectangular blocks.
pub fn block_diag(blocks: &[CMat]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), b.shape()).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}
