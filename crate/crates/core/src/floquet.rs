//! Floquet matrices `H(k)`, band functions and dispersion sampling.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::FundamentalGraph;
use crate::linalg::jacobi_hermitian;

/// Entrywise Hermiticity tolerance, relative to `max(1, max |entry|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Default cap on the number of grid cells in one sampling call.
pub const DEFAULT_CELL_BUDGET: u128 = 10_000_000;

/// Dense `ν×ν` complex matrix, expected Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct FloquetMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl FloquetMatrix {
    pub fn from_entries(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::WrongShape(format!("{} entries for {n}x{n}", data.len())));
        }
        Ok(FloquetMatrix { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// `max |M - M†|` over entries.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.n;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).re).sum()
    }

    fn scale(&self) -> f64 {
        self.data.iter().fold(1.0f64, |m, z| m.max(z.norm()))
    }
}

/// Assembles `H(k) = Δ(k) + Q` for the fundamental graph `g`.
pub fn floquet_matrix(g: &FundamentalGraph, k: &[f64]) -> Result<FloquetMatrix> {
    if k.len() != g.dim() {
        return Err(Error::WrongShape(format!(
            "quasimomentum has {} components, graph dimension is {}",
            k.len(),
            g.dim()
        )));
    }
    if k.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("quasimomentum is not finite".into()));
    }
    let n = g.order();
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for (v, vert) in g.vertices().iter().enumerate() {
        data[v * n + v].re = g.degree(v) as f64 + vert.potential;
    }
    for e in g.edges() {
        let phase: f64 = e.offset.iter().zip(k).map(|(&b, &x)| b as f64 * x).sum();
        if e.is_loop() {
            data[e.tail * n + e.tail].re -= 2.0 * phase.cos();
        } else {
            let z = Complex64::new(phase.cos(), phase.sin());
            data[e.tail * n + e.head] -= z;
            data[e.head * n + e.tail] -= z.conj();
        }
    }
    Ok(FloquetMatrix { n, data })
}

/// Eigenvalues of a Hermitian matrix in non-decreasing order.
pub fn hermitian_eigenvalues(m: &FloquetMatrix) -> Result<Vec<f64>> {
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL * m.scale() {
        return Err(Error::NotHermitian { deviation });
    }
    let mut work = m.data.clone();
    Ok(jacobi_hermitian(m.n, &mut work))
}

/// Band functions `λ_1(k) ≤ … ≤ λ_ν(k)`.
pub fn band_functions(g: &FundamentalGraph, k: &[f64]) -> Result<Vec<f64>> {
    hermitian_eigenvalues(&floquet_matrix(g, k)?)
}

/// Uniform samples of `(-π, π]` with `n` points: `2πj/n` for `j ∈ (-n/2, n/2]`.
///
/// The origin is always a sample; `π` is one exactly when `n` is even.
pub fn grid_axis(n: usize) -> Vec<f64> {
    let n = n as i64;
    let hi = n / 2;
    (hi - n + 1..=hi).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

/// Row-major cartesian product of per-axis sample points.
pub fn grid_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(axes.len())];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

pub(crate) fn check_budget(counts: &[usize], budget: u128) -> Result<u128> {
    let cells = counts.iter().try_fold(1u128, |acc, &c| acc.checked_mul(c as u128));
    match cells {
        Some(c) if c <= budget => Ok(c),
        Some(c) => Err(Error::GridTooLarge { cells: c, budget }),
        None => Err(Error::GridTooLarge { cells: u128::MAX, budget }),
    }
}

/// Band functions sampled on a uniform grid of the Brillouin zone.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionSample {
    pub counts: Vec<usize>,
    pub grid: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

pub fn sample_dispersion(g: &FundamentalGraph, counts: &[usize]) -> Result<DispersionSample> {
    sample_dispersion_with_budget(g, counts, DEFAULT_CELL_BUDGET)
}

pub fn sample_dispersion_with_budget(
    g: &FundamentalGraph,
    counts: &[usize],
    budget: u128,
) -> Result<DispersionSample> {
    if counts.len() != g.dim() {
        return Err(Error::WrongShape(format!(
            "{} sample counts for a {}-dimensional graph",
            counts.len(),
            g.dim()
        )));
    }
    if counts.contains(&0) {
        return Err(Error::InvalidInput("sample counts must be at least 1".into()));
    }
    check_budget(counts, budget)?;
    let axes: Vec<Vec<f64>> = counts.iter().map(|&n| grid_axis(n)).collect();
    let grid = grid_points(&axes);
    let values = grid
        .par_iter()
        .map(|k| band_functions(g, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(DispersionSample { counts: counts.to_vec(), grid, values })
}
