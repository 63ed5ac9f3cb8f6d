//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use subcover::floquet::FloquetMatrix;
use subcover::intlat::ChiralMatrix;

/// Number of eigenvalues of the Hermitian `m` strictly below `x`, by
/// Sylvester's law of inertia on an unpivoted `LDL*` of `m - x I`.
pub fn count_below(m: &FloquetMatrix, x: f64) -> usize {
    let n = m.size();
    let mut a: Vec<Complex64> = m.entries().to_vec();
    for i in 0..n {
        a[i * n + i] -= x;
    }
    let scale = a.iter().fold(1.0f64, |s, z| s.max(z.norm()));
    let mut neg = 0;
    for k in 0..n {
        let mut p = a[k * n + k].re;
        if p.abs() < 1e-300 {
            p = -f64::EPSILON * scale;
        }
        if p < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let l = a[i * n + k] / p;
            for j in k + 1..n {
                let upd = l * a[k * n + j];
                a[i * n + j] -= upd;
            }
        }
    }
    neg
}

/// `j`-th smallest eigenvalue (0-based) by bisection on the inertia count.
pub fn bisect_eigenvalue(m: &FloquetMatrix, j: usize, tol: f64) -> f64 {
    let n = m.size();
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r: f64 = (0..n).filter(|&c| c != i).map(|c| m.get(i, c).norm()).sum();
        lo = lo.min(m.get(i, i).re - r);
        hi = hi.max(m.get(i, i).re + r);
    }
    lo -= 1.0;
    hi += 1.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if count_below(m, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|c| {
            let minor: Vec<Vec<i128>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &v)| v).collect()).collect();
            let sign = if c % 2 == 0 { 1 } else { -1 };
            sign * m[0][c] * det_i128(&minor)
        })
        .sum()
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// All maximal minors of a `k × d` integer matrix by cofactor expansion.
pub fn maximal_minors(rows: &[Vec<i64>]) -> Vec<i128> {
    let k = rows.len();
    let d = rows[0].len();
    let mut out = Vec::new();
    let mut pick = (0..k).collect::<Vec<_>>();
    loop {
        let sub: Vec<Vec<i128>> = rows.iter().map(|r| pick.iter().map(|&c| r[c] as i128).collect()).collect();
        out.push(det_i128(&sub));
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pick[i] < d - k + i {
                pick[i] += 1;
                for j in i + 1..k {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn minor_gcd(rows: &[Vec<i64>]) -> i128 {
    maximal_minors(rows).into_iter().fold(0, gcd)
}

/// Random `k × d` chiral matrix with entries in `[-r, r]` whose rows form a
/// primitive set (gcd of maximal minors equal to one).
pub fn random_primitive<R: Rng>(rng: &mut R, k: usize, d: usize, r: i64) -> ChiralMatrix {
    loop {
        let rows: Vec<Vec<i64>> = (0..k).map(|_| (0..d).map(|_| rng.gen_range(-r..=r)).collect()).collect();
        if minor_gcd(&rows) == 1 {
            return ChiralMatrix::from_rows(&rows).unwrap();
        }
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
