//! Library results checked against independent brute-force oracles.

mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subcover::asymptotics::{constrained_nearest, hessian_fd};
use subcover::floquet::{band_functions, floquet_matrix, hermitian_eigenvalues, FloquetMatrix};
use subcover::graph::{build_hexagonal, Edge, FundamentalGraph, Vertex};
use subcover::intlat::{is_primitive_set, saturation, smith_normal_form, ChiralMatrix, IntMatrix};

fn random_graph(rng: &mut ChaCha8Rng, dim: usize, order: usize, edges: usize) -> FundamentalGraph {
    let vertices = (0..order)
        .map(|i| Vertex { label: format!("v{i}"), potential: rng.gen_range(-2.0..2.0) })
        .collect();
    let edges = (0..edges)
        .map(|_| Edge {
            tail: rng.gen_range(0..order),
            head: rng.gen_range(0..order),
            offset: (0..dim).map(|_| rng.gen_range(-2..=2)).collect(),
        })
        .collect();
    FundamentalGraph::new(dim, vertices, edges).unwrap()
}

#[test]
fn eigenvalues_match_inertia_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let order = rng.gen_range(1..=6);
        let dim = rng.gen_range(1..=3);
        let n_edges = rng.gen_range(order..=3 * order);
        let g = random_graph(&mut rng, dim, order, n_edges);
        let k: Vec<f64> = (0..dim).map(|_| rng.gen_range(-PI..=PI)).collect();
        let h = floquet_matrix(&g, &k).unwrap();
        let ev = hermitian_eigenvalues(&h).unwrap();
        for (j, &e) in ev.iter().enumerate() {
            let b = common::bisect_eigenvalue(&h, j, 1e-12);
            assert!((b - e).abs() <= 1e-8, "band {j}: {e} vs {b}");
        }
    }
}

#[test]
fn dense_random_hermitian_against_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 1..=8 {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(rng.gen_range(-5.0..5.0), 0.0);
            for j in i + 1..n {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                data[i * n + j] = z;
                data[j * n + i] = z.conj();
            }
        }
        let m = FloquetMatrix::from_entries(n, data).unwrap();
        let ev = hermitian_eigenvalues(&m).unwrap();
        for (j, &e) in ev.iter().enumerate() {
            assert!((common::bisect_eigenvalue(&m, j, 1e-13) - e).abs() <= 1e-9);
        }
    }
}

/// Determinantal divisors: `s_1 ⋯ s_i = gcd of all i×i minors`.
fn determinantal_divisors(rows: &[Vec<i64>]) -> Vec<i128> {
    let m = rows.len();
    let n = rows[0].len();
    let mut out = Vec::new();
    for size in 1..=m.min(n) {
        let mut g = 0i128;
        for rsel in combos(m, size) {
            let sub: Vec<Vec<i64>> = rsel.iter().map(|&r| rows[r].clone()).collect();
            for minor in common::maximal_minors(&sub) {
                g = gcd(g, minor);
            }
        }
        out.push(g);
    }
    out
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn combos(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (k - 1..n)
        .flat_map(|last| {
            combos(last, k - 1).into_iter().map(move |mut c| {
                c.push(last);
                c
            })
        })
        .collect()
}

#[test]
fn smith_factors_match_determinantal_divisors() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let m = rng.gen_range(1..=3);
        let n = rng.gen_range(m..=4);
        let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-12..=12)).collect()).collect();
        let snf = smith_normal_form(&IntMatrix::from_rows(&rows).unwrap()).unwrap();
        let f = snf.invariant_factors();
        let dd = determinantal_divisors(&rows);
        let mut acc = 1i128;
        for (i, &d) in dd.iter().enumerate() {
            if d == 0 {
                assert_eq!(f[i], 0, "{rows:?}");
                continue;
            }
            acc *= f[i] as i128;
            assert_eq!(acc, d, "{rows:?} factors {f:?}");
        }
    }
}

#[test]
fn primitivity_matches_minor_gcd() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..300 {
        let k = rng.gen_range(1..=2);
        let d = rng.gen_range(k + 1..=4);
        let rows: Vec<Vec<i64>> = (0..k).map(|_| (0..d).map(|_| rng.gen_range(-6..=6)).collect()).collect();
        let g = common::minor_gcd(&rows);
        if g == 0 {
            continue;
        }
        let t = ChiralMatrix::from_rows(&rows).unwrap();
        assert_eq!(is_primitive_set(&t).unwrap(), g == 1, "{rows:?}");
        assert_eq!(saturation(&t).unwrap().index as i128, g);
    }
}

/// Counts `x ∈ Z³` with `x = a₁t₁ + a₂t₂`, `a ∈ [0, 1)²`: the cosets of the
/// chiral lattice in its saturation.
fn coset_count(t1: [i64; 3], t2: [i64; 3]) -> usize {
    let n = [
        t1[1] * t2[2] - t1[2] * t2[1],
        t1[2] * t2[0] - t1[0] * t2[2],
        t1[0] * t2[1] - t1[1] * t2[0],
    ];
    let g11 = t1.iter().map(|x| x * x).sum::<i64>();
    let g22 = t2.iter().map(|x| x * x).sum::<i64>();
    let g12 = t1.iter().zip(&t2).map(|(a, b)| a * b).sum::<i64>();
    let det = g11 * g22 - g12 * g12;
    let bound: Vec<i64> = (0..3).map(|i| t1[i].abs() + t2[i].abs()).collect();
    let mut count = 0;
    for x in -bound[0]..=bound[0] {
        for y in -bound[1]..=bound[1] {
            for z in -bound[2]..=bound[2] {
                let p = [x, y, z];
                if p.iter().zip(&n).map(|(a, b)| a * b).sum::<i64>() != 0 {
                    continue;
                }
                let b1 = p.iter().zip(&t1).map(|(a, b)| a * b).sum::<i64>();
                let b2 = p.iter().zip(&t2).map(|(a, b)| a * b).sum::<i64>();
                // a = G⁻¹ b, scaled by det
                let a1 = g22 * b1 - g12 * b2;
                let a2 = -g12 * b1 + g11 * b2;
                if (0..det).contains(&a1) && (0..det).contains(&a2) {
                    count += 1;
                }
            }
        }
    }
    count
}

#[test]
fn saturation_index_counts_lattice_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 60 {
        let t1 = [0; 3].map(|_: i32| rng.gen_range(-4..=4));
        let t2 = [0; 3].map(|_: i32| rng.gen_range(-4..=4));
        let t = ChiralMatrix::from_rows(&[t1, t2]).unwrap();
        let Ok(sat) = saturation(&t) else { continue };
        if common::minor_gcd(&[t1.to_vec(), t2.to_vec()]) == 0 {
            continue;
        }
        assert_eq!(sat.index as usize, coset_count(t1, t2), "{t1:?} {t2:?}");
        // the basis spans the same rational space and is itself primitive
        let rows = sat.basis.to_rows();
        assert_eq!(common::minor_gcd(&rows), 1);
        checked += 1;
    }
}

#[test]
fn constrained_nearest_beats_nullspace_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let t = common::random_primitive(&mut rng, 1, 2, 7);
        let row = t.row(0);
        let dir = [-(row[1] as f64), row[0] as f64];
        let k = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
        let p = constrained_nearest(&k, &t).unwrap();
        assert!(t.apply_f64(&p)[0].abs() < 1e-12);
        let dist = |q: [f64; 2]| ((q[0] - k[0]).powi(2) + (q[1] - k[1]).powi(2)).sqrt();
        let best = dist([p[0], p[1]]);
        let norm = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
        // arc-length spacing 1e-5 over |s·dir| ≤ 5
        let grid_best = (-500_000..=500_000)
            .map(|i| {
                let s = i as f64 * 1e-5 / norm;
                dist([s * dir[0], s * dir[1]])
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best <= grid_best + 1e-12, "{best} vs {grid_best}");
        assert!(grid_best - best < 1e-5);
    }
}

#[test]
fn hessian_converges_quadratically() {
    let q = 1.0;
    let g = build_hexagonal(q).unwrap();
    let k = [2.0 * PI / 3.0 + 0.3, -2.0 * PI / 3.0 + 0.1];
    let exact = {
        // fourth-order central differences with a small step as reference
        let f = |x: f64, y: f64| band_functions(&g, &[x, y]).unwrap()[0];
        let h = 1e-2;
        let d2 = |a: [f64; 2]| {
            let p = |s: f64| f(k[0] + s * a[0], k[1] + s * a[1]);
            (-p(2.0 * h) + 16.0 * p(h) - 30.0 * p(0.0) + 16.0 * p(-h) - p(-2.0 * h)) / (12.0 * h * h)
        };
        let xx = d2([1.0, 0.0]);
        let yy = d2([0.0, 1.0]);
        let diag = d2([1.0, 1.0]);
        [xx, yy, 0.5 * (diag - xx - yy)]
    };
    let err = |h: f64| {
        let m = hessian_fd(&g, 1, &k, h).unwrap();
        [(m.get(0, 0) - exact[0]).abs(), (m.get(1, 1) - exact[1]).abs(), (m.get(0, 1) - exact[2]).abs()]
            .into_iter()
            .fold(0.0, f64::max)
    };
    let ratio = err(0.1) / err(0.05);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}
