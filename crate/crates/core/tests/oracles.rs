//! Library results against independent computations written here from first
//! principles: block matrices assembled by hand, Gaussian elimination, power
//! iteration, the Moore-Penrose conditions, quadrature and finite differences.

use std::f64::consts::PI;

use hodge_cstar::random::{self, instance_rng, ComplexShape};
use hodge_cstar::torus::{subsets, wedge_matrix, TorusGeometry, TorusSection};
use hodge_cstar::{AlgebraElement, AlgebraSpec, CMat, ModuleSpec, ModuleVector, Morphism, C64};
use rand::Rng;

const SPECS: [&[usize]; 5] = [&[1], &[2], &[1, 2], &[2, 2], &[3]];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn block_diag_by_hand(a: &AlgebraElement) -> CMat {
    let d: usize = a.spec().block_sizes().iter().sum();
    let mut out = CMat::zeros(d, d);
    let mut off = 0;
    for b in a.blocks() {
        for r in 0..b.nrows() {
            for k in 0..b.ncols() {
                out[(off + r, off + k)] = b[(r, k)];
            }
        }
        off += b.nrows();
    }
    out
}

/// Largest eigenvalue of a positive semidefinite matrix by power iteration.
fn power_lambda_max(h: &CMat) -> f64 {
    let n = h.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut x = nalgebra::DVector::<C64>::from_fn(n, |i, _| c(1.0 + i as f64 * 0.37, 0.11 * i as f64));
    let mut lambda = 0.0;
    for _ in 0..3000 {
        let y = h * &x;
        let ny = y.norm();
        if ny == 0.0 {
            return 0.0;
        }
        lambda = (x.dotc(&y)).re / x.norm_squared();
        x = y / c(ny, 0.0);
    }
    lambda
}

fn spectral_norm_oracle(m: &CMat) -> f64 {
    power_lambda_max(&(m.adjoint() * m)).max(0.0).sqrt()
}

/// Rank by Gaussian elimination with complete pivoting; pivots below
/// `tol · max|m|` count as zero.
fn gauss_rank(m: &CMat, tol: f64) -> usize {
    gauss_rank_abs(m, tol * max_abs(m))
}

/// As [`gauss_rank`] with an absolute pivot threshold.
fn gauss_rank_abs(m: &CMat, threshold: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut rank = 0;
    for _ in 0..rows.min(cols) {
        let mut best = (0.0, 0, 0);
        for r in rank..rows {
            for k in rank..cols {
                let v = a[(r, k)].norm();
                if v > best.0 {
                    best = (v, r, k);
                }
            }
        }
        if best.0 <= threshold || best.0 == 0.0 {
            break;
        }
        a.swap_rows(rank, best.1);
        a.swap_columns(rank, best.2);
        let piv = a[(rank, rank)];
        for r in rank + 1..rows {
            let f = a[(r, rank)] / piv;
            for k in rank..cols {
                let v = a[(rank, k)];
                a[(r, k)] -= f * v;
            }
        }
        rank += 1;
    }
    rank
}

fn spec(i: usize) -> AlgebraSpec {
    AlgebraSpec::new(SPECS[i % SPECS.len()].to_vec()).unwrap()
}

#[test]
fn algebra_operations_match_block_diagonal_matrices() {
    for k in 0..40 {
        let mut rng = instance_rng(1, "oracle algebra", k);
        let s = spec(k as usize);
        let (a, b) = (random::element(&mut rng, &s), random::element(&mut rng, &s));
        let (ma, mb) = (block_diag_by_hand(&a), block_diag_by_hand(&b));
        assert!(max_abs(&(block_diag_by_hand(&a.mul(&b).unwrap()) - &ma * &mb)) < 1e-12);
        assert!(max_abs(&(block_diag_by_hand(&a.add(&b).unwrap()) - (&ma + &mb))) < 1e-12);
        assert!(max_abs(&(block_diag_by_hand(&a.star()) - ma.adjoint())) < 1e-12);
        let oracle = spectral_norm_oracle(&ma);
        assert!((a.norm() - oracle).abs() <= 1e-8 * oracle.max(1.0), "{} vs {oracle}", a.norm());
        assert!(max_abs(&(a.embed_concrete() - ma)) == 0.0);
    }
}

/// `(Tu)_j = Σ_i u_i t_ij`, computed with algebra products only.
fn apply_by_entries(t: &[Vec<AlgebraElement>], u: &[AlgebraElement], target_rank: usize) -> Vec<AlgebraElement> {
    let spec = u.first().map(|x| x.spec().clone()).unwrap_or_else(AlgebraSpec::scalars);
    (0..target_rank)
        .map(|j| {
            u.iter()
                .enumerate()
                .fold(AlgebraElement::zero(&spec), |acc, (i, ui)| acc.add(&ui.mul(&t[i][j]).unwrap()).unwrap())
        })
        .collect()
}

/// `(u, v) = Σ_i v_i u_i*`.
fn inner_by_entries(u: &[AlgebraElement], v: &[AlgebraElement], spec: &AlgebraSpec) -> AlgebraElement {
    u.iter()
        .zip(v)
        .fold(AlgebraElement::zero(spec), |acc, (ui, vi)| acc.add(&vi.mul(&ui.star()).unwrap()).unwrap())
}

fn elem_dist(a: &AlgebraElement, b: &AlgebraElement) -> f64 {
    a.blocks().iter().zip(b.blocks()).map(|(x, y)| max_abs(&(x - y))).fold(0.0, f64::max)
}

#[test]
fn module_and_morphism_operations_match_entrywise_formulas() {
    for k in 0..60 {
        let mut rng = instance_rng(2, "oracle hom", k);
        let s = spec(k as usize);
        let (m, n, p) = (rng.random_range(1..4), rng.random_range(1..4), rng.random_range(1..4));
        let (ms, ns, ps) = (ModuleSpec::free(&s, m), ModuleSpec::free(&s, n), ModuleSpec::free(&s, p));
        let t = random::morphism(&mut rng, &ms, &ns);
        let r = random::morphism(&mut rng, &ns, &ps);
        let u = random::vector(&mut rng, &ms);
        let v = random::vector(&mut rng, &ns);
        let te = t.entries();

        let got = t.apply(&u).unwrap().entries();
        let want = apply_by_entries(&te, &u.entries(), n);
        for (g, w) in got.iter().zip(&want) {
            assert!(elem_dist(g, w) < 1e-12);
        }

        // (R∘T)_ik = Σ_j t_ij r_jk
        let re = r.entries();
        let comp = r.compose(&t).unwrap().entries();
        for i in 0..m {
            for kk in 0..p {
                let mut acc = AlgebraElement::zero(&s);
                for j in 0..n {
                    acc = acc.add(&te[i][j].mul(&re[j][kk]).unwrap()).unwrap();
                }
                assert!(elem_dist(&comp[i][kk], &acc) < 1e-12);
            }
        }

        let adj = t.adjoint().entries();
        for i in 0..m {
            for j in 0..n {
                assert!(elem_dist(&adj[j][i], &te[i][j].star()) < 1e-14);
            }
        }

        let lhs = inner_by_entries(&t.apply(&u).unwrap().entries(), &v.entries(), &s);
        let rhs = inner_by_entries(&u.entries(), &t.adjoint().apply(&v).unwrap().entries(), &s);
        assert!(elem_dist(&lhs, &rhs) < 1e-11);
        let lib = t.apply(&u).unwrap().inner_product(&v).unwrap();
        assert!(elem_dist(&lib, &lhs) < 1e-12);

        // Concrete shadow: embedded morphism acts on embedded coordinates.
        let x = u.embed_concrete();
        let y = t.apply(&u).unwrap().embed_concrete();
        let e = t.embed_morphism();
        for (row, &want) in y.iter().enumerate() {
            let got: C64 = (0..x.len()).map(|col| e[(row, col)] * x[col]).sum();
            assert!((got - want).norm() < 1e-12);
        }
    }
}

#[test]
fn module_action_and_inner_product_match_entries() {
    for k in 0..30 {
        let mut rng = instance_rng(3, "oracle module", k);
        let s = spec(k as usize);
        let m = ModuleSpec::free(&s, rng.random_range(1..4));
        let (u, v) = (random::vector(&mut rng, &m), random::vector(&mut rng, &m));
        let a = random::element(&mut rng, &s);
        let au: Vec<_> = u.entries().iter().map(|x| a.mul(x).unwrap()).collect();
        for (g, w) in u.act(&a).unwrap().entries().iter().zip(&au) {
            assert!(elem_dist(g, w) < 1e-12);
        }
        let ip = u.inner_product(&v).unwrap();
        assert!(elem_dist(&ip, &inner_by_entries(&u.entries(), &v.entries(), &s)) < 1e-12);
        let round = ModuleVector::from_concrete(&m, &u.embed_concrete()).unwrap();
        assert_eq!(round, u);
    }
}

#[test]
fn ranks_match_gaussian_elimination() {
    for k in 0..80 {
        let mut rng = instance_rng(4, "oracle rank", k);
        let cx = random::suite_complex(&mut rng, ComplexShape::default());
        for d in cx.differentials() {
            let e = d.embed_morphism();
            assert_eq!(d.concrete_rank(1e-10), gauss_rank(&e, 1e-9), "instance {k}");
        }
        for i in 0..=cx.top_degree() {
            let lap = cx.laplacian(i).unwrap();
            let e = lap.embed_morphism();
            let p = lap.kernel_projection(1e-10).embed_morphism();
            // On projective modules the concrete shadow also contains the
            // complement of the projection, which is neither in Ker nor in Im.
            let module = cx.module(i).unwrap();
            assert_eq!(
                module.concrete_dim() - gauss_rank(&e, 1e-9),
                gauss_rank_abs(&p, 1e-9),
                "instance {k} degree {i}"
            );
            assert!(max_abs(&(&e * &p)) < 1e-9);
            assert!(max_abs(&(&p * &p - &p)) < 1e-9);
            assert!(max_abs(&(p.adjoint() - &p)) < 1e-12);
        }
    }
}

#[test]
fn laplacian_and_pseudoinverse_in_the_concrete_shadow() {
    for k in 0..60 {
        let mut rng = instance_rng(5, "oracle laplacian", k);
        let cx = random::suite_complex(&mut rng, ComplexShape::default());
        for i in 0..=cx.top_degree() {
            let lap = cx.laplacian(i).unwrap().embed_morphism();
            let dim = lap.nrows();
            let mut want = CMat::zeros(dim, dim);
            if i > 0 {
                let d = cx.differentials()[i - 1].embed_morphism();
                want += &d * d.adjoint();
            }
            if i < cx.top_degree() {
                let d = cx.differentials()[i].embed_morphism();
                want += d.adjoint() * &d;
            }
            assert!(max_abs(&(&lap - &want)) < 1e-12);

            // The four Moore-Penrose conditions characterise the pseudoinverse.
            let g = cx.laplacian(i).unwrap().pseudoinverse(1e-10).embed_morphism();
            let ag = &want * &g;
            let ga = &g * &want;
            assert!(max_abs(&(&ag * &want - &want)) < 1e-9, "instance {k}");
            assert!(max_abs(&(&ga * &g - &g)) < 1e-9);
            assert!(max_abs(&(ag.adjoint() - &ag)) < 1e-9);
            assert!(max_abs(&(ga.adjoint() - &ga)) < 1e-9);
        }
    }
}

#[test]
fn operator_norms_match_power_iteration() {
    for k in 0..40 {
        let mut rng = instance_rng(6, "oracle norm", k);
        let s = spec(k as usize);
        let (m, n) = (rng.random_range(1..4), rng.random_range(1..4));
        let t = random::morphism(&mut rng, &ModuleSpec::free(&s, m), &ModuleSpec::free(&s, n));
        let oracle = spectral_norm_oracle(&t.embed_morphism());
        assert!((t.op_norm() - oracle).abs() <= 1e-8 * oracle.max(1.0));
    }
}

fn sign_of_insertion(set: &[usize], j: usize) -> f64 {
    if set.iter().filter(|&&s| s < j).count() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// All sorted `k`-subsets by filtering bit masks, ordered lexicographically.
fn subsets_by_masks(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&j| m & (1 << j) != 0).collect())
        .collect();
    out.sort();
    out
}

#[test]
fn wedge_matrices_match_brute_force_exterior_algebra() {
    let mut rng = instance_rng(7, "oracle wedge", 0);
    for n in 1..=4 {
        let xi: Vec<C64> = (0..n).map(|_| random::complex_normal(&mut rng)).collect();
        let norm_sq: f64 = xi.iter().map(|z| z.norm_sqr()).sum();
        for k in 0..=n {
            assert_eq!(subsets(n, k), subsets_by_masks(n, k));
            if k == n {
                continue;
            }
            let src = subsets_by_masks(n, k);
            let dst = subsets_by_masks(n, k + 1);
            let mut oracle = CMat::zeros(dst.len(), src.len());
            for (col, set) in src.iter().enumerate() {
                for j in (0..n).filter(|j| !set.contains(j)) {
                    let mut joined = set.clone();
                    joined.push(j);
                    joined.sort();
                    let row = dst.iter().position(|d| *d == joined).unwrap();
                    oracle[(row, col)] += xi[j] * sign_of_insertion(set, j);
                }
            }
            let w = wedge_matrix(n, k, &xi);
            assert!(max_abs(&(&w - &oracle)) < 1e-15);

            // ξ∧ξ∧ = 0 and {ξ∧, ι_ξ} = |ξ|².
            if k + 1 < n {
                assert!(max_abs(&(wedge_matrix(n, k + 1, &xi) * &w)) < 1e-12);
            }
            let mut anti = w.adjoint() * &w;
            if k > 0 {
                let prev = wedge_matrix(n, k - 1, &xi);
                anti += &prev * prev.adjoint();
            }
            let id = CMat::identity(src.len(), src.len()) * c(norm_sq, 0.0);
            assert!(max_abs(&(anti - id)) < 1e-12, "n={n} k={k}");
        }
    }
}

fn grid_points(n: usize, m: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![Vec::new()];
    for _ in 0..n {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                (0..m).map(move |i| {
                    let mut q = p.clone();
                    q.push(i as f64 / m as f64);
                    q
                })
            })
            .collect();
    }
    pts
}

fn geometry(n: usize, band: usize, blocks: &[usize], r: usize) -> TorusGeometry {
    let s = AlgebraSpec::new(blocks.to_vec()).unwrap();
    TorusGeometry::new(n, band, ModuleSpec::free(&s, r)).unwrap()
}

#[test]
fn parseval_matches_grid_quadrature() {
    for (k, (n, band, blocks, r, degree)) in [
        (1usize, 3usize, &[1usize][..], 1usize, 0usize),
        (1, 2, &[2], 1, 1),
        (2, 2, &[1, 2], 1, 1),
        (2, 1, &[2], 2, 2),
    ]
    .into_iter()
    .enumerate()
    {
        let g = geometry(n, band, blocks, r);
        let mut rng = instance_rng(8, "oracle parseval", k as u64);
        let s = random::section(&mut rng, &g, degree).unwrap();
        let t = random::section(&mut rng, &g, degree).unwrap();
        // 4N points per axis integrate trigonometric polynomials of degree ≤ 2N exactly.
        let m = 4 * band.max(1);
        let pts = grid_points(n, m);
        let mut acc = AlgebraElement::zero(g.algebra());
        for x in &pts {
            let ip = s.evaluate(x).unwrap().inner_product(&t.evaluate(x).unwrap()).unwrap();
            acc = acc.add(&ip).unwrap();
        }
        let quad = acc.scale(c(1.0 / pts.len() as f64, 0.0));
        let spectral = s.gamma_product(&t).unwrap();
        assert!(elem_dist(&quad, &spectral) < 1e-11, "case {k}");
    }
}

#[test]
fn evaluation_matches_direct_summation() {
    let g = geometry(2, 2, &[1, 2], 1);
    let mut rng = instance_rng(9, "oracle evaluate", 0);
    let s = random::section(&mut rng, &g, 1).unwrap();
    let modes = g.modes();
    for _ in 0..10 {
        let x = [rng.random::<f64>(), rng.random::<f64>()];
        let mut want = vec![c(0.0, 0.0); s.coefficients()[0].embed_concrete().len()];
        for (q, v) in modes.iter().zip(s.coefficients()) {
            let theta = 2.0 * PI * (q[0] as f64 * x[0] + q[1] as f64 * x[1]);
            let e = c(theta.cos(), theta.sin());
            for (w, z) in want.iter_mut().zip(v.embed_concrete()) {
                *w += e * z;
            }
        }
        let got = s.evaluate(&x).unwrap().embed_concrete();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn derivatives_match_central_differences() {
    let g = geometry(2, 2, &[2], 1);
    let mut rng = instance_rng(10, "oracle derivative", 0);
    let s = random::section(&mut rng, &g, 0).unwrap();
    let h = 1e-5;
    for axis in 0..2 {
        let mut alpha = [0u32; 2];
        alpha[axis] = 1;
        let ds = s.derivative(&alpha).unwrap();
        for _ in 0..5 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            let (mut xp, mut xm) = (x, x);
            xp[axis] += h;
            xm[axis] -= h;
            let fp = s.evaluate(&xp).unwrap().embed_concrete();
            let fm = s.evaluate(&xm).unwrap().embed_concrete();
            let got = ds.evaluate(&x).unwrap().embed_concrete();
            let scale = got.iter().map(|z| z.norm()).fold(1.0, f64::max);
            for ((a, b), d) in fp.iter().zip(&fm).zip(&got) {
                let fd = (a - b) / c(2.0 * h, 0.0);
                assert!((fd - d).norm() < 1e-5 * scale);
            }
        }
    }
}

#[test]
fn de_rham_symbol_is_scaled_wedge_tensor_identity() {
    let g = geometry(3, 1, &[2], 2);
    let xi = [0.3, -0.5, 0.8];
    let xc: Vec<C64> = xi.iter().map(|&x| c(x, 0.0)).collect();
    for k in 0..3 {
        let sym = g.de_rham_symbol(k, &xi).unwrap();
        let w = wedge_matrix(3, k, &xc) * c(0.0, 2.0 * PI);
        let (rows, cols) = (subsets(3, k + 1).len(), subsets(3, k).len());
        // Entries t_{(I,a),(J,b)}: local index I·r + a, acting on the right.
        let e = sym.entries();
        for i in 0..cols {
            for a in 0..2 {
                for j in 0..rows {
                    for b in 0..2 {
                        let want = if a == b { w[(j, i)] } else { c(0.0, 0.0) };
                        let got = &e[i * 2 + a][j * 2 + b];
                        let one = AlgebraElement::one(g.algebra()).scale(want);
                        assert!(elem_dist(got, &one) < 1e-12, "k={k}");
                    }
                }
            }
        }
    }
}

#[test]
fn trivial_module_corner_cases() {
    let s = AlgebraSpec::new(vec![1, 2]).unwrap();
    let zero = ModuleSpec::free(&s, 0);
    let one = ModuleSpec::free(&s, 1);
    let t = Morphism::zero(&zero, &one);
    assert_eq!(t.op_norm(), 0.0);
    assert_eq!(t.concrete_rank(1e-10), 0);
    assert_eq!(t.kernel_projection(1e-10).embed_morphism().shape(), (0, 0));
    let v = ModuleVector::zero(&one);
    assert_eq!(v.norm(), 0.0);
    let _ = TorusSection::zero(&geometry(1, 1, &[1], 1), 0).unwrap();
}
