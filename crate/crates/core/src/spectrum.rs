//! Band edges over the full and the restricted Brillouin zone, spectrum sets
//! and the inclusion check.
//!
//! Extrema are located without derivatives: a coarse grid scan selects the
//! best local extrema, and each is refined by a sequence of shrinking boxes.
//! Each level samples a box of half-width `w` with 9 points per axis around
//! the current best point, then halves `w`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::restricted_projection;
use crate::error::{Error, Result};
use crate::floquet::{band_functions, check_budget, grid_axis, grid_points, DEFAULT_CELL_BUDGET};
use crate::graph::{FundamentalGraph, SubcoveringView};

const BOX_POINTS: usize = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeConfig {
    /// Coarse samples per axis; a single entry is used for every axis.
    pub grid: Vec<usize>,
    /// Stop once a zoom level changes the value by less than this.
    pub refine: f64,
    pub max_levels: usize,
    /// Grid-level local extrema refined per band edge.
    pub candidates: usize,
    /// Radius in quasimomentum for merging arg points.
    pub tie_radius: f64,
    /// Refined values within this of the best count as ties.
    pub tie_value: f64,
    /// Beyond this many clusters the arg set is reported as non-isolated.
    pub max_clusters: usize,
    pub cell_budget: u128,
}

impl Default for EdgeConfig {
    fn default() -> Self {
        EdgeConfig {
            grid: vec![64],
            refine: 1e-10,
            max_levels: 40,
            candidates: 40,
            tie_radius: 1e-3,
            tie_value: 1e-8,
            max_clusters: 32,
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

impl EdgeConfig {
    pub fn with_grid(mut self, n: usize) -> Self {
        self.grid = vec![n];
        self
    }

    pub fn with_refine(mut self, refine: f64) -> Self {
        self.refine = refine;
        self
    }

    fn counts(&self, dim: usize) -> Result<Vec<usize>> {
        let counts = match self.grid.len() {
            1 => vec![self.grid[0]; dim],
            n if n == dim => self.grid.clone(),
            n => {
                return Err(Error::WrongShape(format!(
                    "{n} grid counts for a {dim}-dimensional zone"
                )))
            }
        };
        if counts.contains(&0) {
            return Err(Error::InvalidInput("grid counts must be positive".into()));
        }
        Ok(counts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    /// `+1` for minima, `-1` for maxima: minimising `sign · λ` finds the edge.
    fn sign(self) -> f64 {
        match self {
            Side::Lower => 1.0,
            Side::Upper => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower" => Ok(Side::Lower),
            "upper" => Ok(Side::Upper),
            _ => Err(Error::InvalidInput(format!("side must be lower or upper, got {s:?}"))),
        }
    }
}

/// One band edge with its extremal points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extremum {
    pub value: f64,
    /// Cluster representatives, wrapped into `(-π, π]^d`.
    pub points: Vec<Vec<f64>>,
    /// More clusters than the configured maximum were found.
    pub non_isolated: bool,
    /// Value change at the last zoom level of the winning candidate.
    pub residual: f64,
    /// Best value after each zoom level of the winning candidate.
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandEdge {
    /// 1-based band index.
    pub band: usize,
    pub lower: Extremum,
    pub upper: Extremum,
}

impl BandEdge {
    pub fn lo(&self) -> f64 {
        self.lower.value
    }

    pub fn hi(&self) -> f64 {
        self.upper.value
    }

    pub fn width(&self) -> f64 {
        self.hi() - self.lo()
    }

    pub fn residual(&self) -> f64 {
        self.lower.residual.max(self.upper.residual)
    }

    pub fn side(&self, side: Side) -> &Extremum {
        match side {
            Side::Lower => &self.lower,
            Side::Upper => &self.upper,
        }
    }
}

/// Wraps each component into `(-π, π]`.
pub fn wrap_to_zone(k: &[f64]) -> Vec<f64> {
    k.iter()
        .map(|&x| {
            let mut y = x - 2.0 * PI * (x / (2.0 * PI)).round();
            if y <= -PI {
                y += 2.0 * PI;
            }
            y
        })
        .collect()
}

fn periodic_distance(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    wrap_to_zone(&diff).iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Zoom refinement of `sign · f` starting at `start` with half-width `w0`.
/// Returns `(point, value, trace, residual)` with `value` in the original sign.
fn zoom<F>(f: &F, sign: f64, start: &[f64], start_value: f64, w0: f64, cfg: &EdgeConfig) -> Result<(Vec<f64>, f64, Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let dim = start.len();
    let mut center = start.to_vec();
    let mut best = sign * start_value;
    let mut w = w0;
    let mut trace = Vec::new();
    let mut residual = f64::INFINITY;
    let half = (BOX_POINTS / 2) as i64;
    let small = cfg.refine.sqrt();
    for _ in 0..cfg.max_levels {
        let step = w / half as f64;
        let mut level_best = best;
        let mut level_point = center.clone();
        let mut idx = vec![-half; dim];
        'outer: loop {
            if idx.iter().any(|&i| i != 0) {
                let p: Vec<f64> = center.iter().zip(&idx).map(|(c, &i)| c + step * i as f64).collect();
                let v = sign * f(&p)?;
                if v < level_best {
                    level_best = v;
                    level_point = p;
                }
            }
            for i in idx.iter_mut() {
                *i += 1;
                if *i <= half {
                    continue 'outer;
                }
                *i = -half;
            }
            break;
        }
        residual = best - level_best;
        best = level_best;
        center = level_point;
        trace.push(sign * best);
        w *= 0.5;
        if residual < cfg.refine && w < small {
            break;
        }
    }
    Ok((center, sign * best, trace, residual))
}

/// Indices of grid points that are local minima of `vals` (axis neighbours,
/// periodic), best first.
fn local_minima(vals: &[f64], counts: &[usize]) -> Vec<usize> {
    let dim = counts.len();
    let mut strides = vec![1usize; dim];
    for s in (0..dim.saturating_sub(1)).rev() {
        strides[s] = strides[s + 1] * counts[s + 1];
    }
    let mut out: Vec<usize> = (0..vals.len())
        .filter(|&i| {
            (0..dim).all(|s| {
                let n = counts[s];
                if n == 1 {
                    return true;
                }
                let c = (i / strides[s]) % n;
                let up = i - c * strides[s] + ((c + 1) % n) * strides[s];
                let down = i - c * strides[s] + ((c + n - 1) % n) * strides[s];
                vals[i] <= vals[up] && vals[i] <= vals[down]
            })
        })
        .collect();
    out.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    out
}

/// Band edges of an arbitrary band map `f` over the torus `(-π, π]^dim`.
///
/// `to_reported` maps a torus point to the quasimomentum reported in the
/// result. `seeds` are extra torus points refined alongside the grid
/// candidates.
fn edges_of<F, M>(
    dim: usize,
    nbands: usize,
    f: &F,
    to_reported: &M,
    seeds: &[Vec<f64>],
    cfg: &EdgeConfig,
) -> Result<Vec<BandEdge>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    M: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let counts = cfg.counts(dim)?;
    check_budget(&counts, cfg.cell_budget)?;
    let axes: Vec<Vec<f64>> = counts.iter().map(|&n| grid_axis(n)).collect();
    let grid = grid_points(&axes);
    let values = grid.par_iter().map(|k| f(k)).collect::<Result<Vec<_>>>()?;
    if values.iter().any(|v| v.len() != nbands) {
        return Err(Error::InvalidInput("band count changed across the zone".into()));
    }
    let seed_values = seeds.iter().map(|k| f(k)).collect::<Result<Vec<_>>>()?;
    let w0 = counts.iter().map(|&n| 2.0 * PI / n as f64).fold(0.0, f64::max);

    let tasks: Vec<(usize, Side)> =
        (0..nbands).flat_map(|j| [(j, Side::Lower), (j, Side::Upper)]).collect();
    let results = tasks
        .par_iter()
        .map(|&(j, side)| {
            let sign = side.sign();
            let band_vals: Vec<f64> = values.iter().map(|v| sign * v[j]).collect();
            let mut starts: Vec<(Vec<f64>, f64)> = local_minima(&band_vals, &counts)
                .into_iter()
                .take(cfg.candidates.max(1))
                .map(|i| (grid[i].clone(), values[i][j]))
                .collect();
            starts.extend(seeds.iter().zip(&seed_values).map(|(k, v)| (k.clone(), v[j])));
            let band = |k: &[f64]| -> Result<f64> { Ok(f(k)?[j]) };
            let refined = starts
                .par_iter()
                .map(|(k, v)| zoom(&band, sign, k, *v, w0, cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok(collect_extremum(refined, sign, to_reported, cfg))
        })
        .collect::<Result<Vec<Extremum>>>()?;

    let mut it = results.into_iter();
    let mut edges = Vec::with_capacity(nbands);
    for j in 0..nbands {
        let lower = it.next().unwrap();
        let upper = it.next().unwrap();
        edges.push(BandEdge { band: j + 1, lower, upper });
    }
    Ok(edges)
}

fn collect_extremum<M>(
    refined: Vec<(Vec<f64>, f64, Vec<f64>, f64)>,
    sign: f64,
    to_reported: &M,
    cfg: &EdgeConfig,
) -> Extremum
where
    M: Fn(&[f64]) -> Vec<f64>,
{
    let best_i = (0..refined.len())
        .min_by(|&a, &b| (sign * refined[a].1).total_cmp(&(sign * refined[b].1)))
        .expect("at least one candidate");
    let best = refined[best_i].1;
    let mut order: Vec<usize> = (0..refined.len())
        .filter(|&i| (refined[i].1 - best).abs() <= cfg.tie_value)
        .collect();
    order.sort_by(|&a, &b| (sign * refined[a].1).total_cmp(&(sign * refined[b].1)).then(a.cmp(&b)));
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for i in order {
        let k = wrap_to_zone(&to_reported(&refined[i].0));
        if clusters.iter().all(|c| periodic_distance(c, &k) > cfg.tie_radius) {
            clusters.push(k);
        }
    }
    let non_isolated = clusters.len() > cfg.max_clusters;
    clusters.truncate(cfg.max_clusters);
    let (_, value, trace, residual) = refined.into_iter().nth(best_i).unwrap();
    Extremum { value, points: clusters, non_isolated, residual, trace }
}

/// Band edges `λ_j^±` of the periodic operator.
pub fn band_edges(g: &FundamentalGraph, cfg: &EdgeConfig) -> Result<Vec<BandEdge>> {
    band_edges_seeded(g, cfg, &[])
}

/// As [`band_edges`], also refining from the given quasimomenta.
pub fn band_edges_seeded(
    g: &FundamentalGraph,
    cfg: &EdgeConfig,
    seeds: &[Vec<f64>],
) -> Result<Vec<BandEdge>> {
    let f = |k: &[f64]| band_functions(g, k);
    edges_of(g.dim(), g.order(), &f, &|k: &[f64]| k.to_vec(), seeds, cfg)
}

/// Band edges `λ_j^±(τ)` of the subcovering: extrema of `λ_j(T̃⁻¹(0, κ))`
/// over `κ ∈ (-π, π]^{d-d_o}`.
pub fn subcovering_band_edges(view: &SubcoveringView, cfg: &EdgeConfig) -> Result<Vec<BandEdge>> {
    subcovering_band_edges_seeded(view, cfg, &[])
}

/// As [`subcovering_band_edges`]; each seed `k_o` (a base-zone quasimomentum,
/// typically a known extremum of the base operator) is first moved to the
/// nearest point of the restricted zone.
pub fn subcovering_band_edges_seeded(
    view: &SubcoveringView,
    cfg: &EdgeConfig,
    seeds: &[Vec<f64>],
) -> Result<Vec<BandEdge>> {
    let g = &view.base;
    let f = |kappa: &[f64]| band_functions(g, &view.quasimomentum(kappa));
    let to_k = |kappa: &[f64]| view.quasimomentum(kappa);
    let kappa_seeds = seeds
        .iter()
        .map(|k| {
            let p = restricted_projection(k, &view.chiral)?;
            Ok(wrap_to_zone(&view.residual_coordinates(&p)))
        })
        .collect::<Result<Vec<_>>>()?;
    edges_of(view.residual_dimension(), g.order(), &f, &to_k, &kappa_seeds, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlatBand {
    pub value: f64,
    pub band: usize,
}

/// Union of closed intervals plus flat bands.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSet {
    pub intervals: Vec<(f64, f64)>,
    pub flat_bands: Vec<FlatBand>,
}

impl SpectrumSet {
    /// Gaps between consecutive intervals that contain no flat band.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.intervals
            .windows(2)
            .map(|w| (w[0].1, w[1].0))
            .filter(|&(a, b)| !self.flat_bands.iter().any(|f| f.value > a && f.value < b))
            .collect()
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| x >= a - tol && x <= b + tol)
            || self.flat_bands.iter().any(|f| (f.value - x).abs() <= tol)
    }
}

fn merge_intervals(mut iv: Vec<(f64, f64)>, touch: f64) -> Vec<(f64, f64)> {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 + touch => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Bands narrower than `flat_tol` become flat bands; the others are merged
/// into disjoint intervals (intervals closer than `flat_tol` are joined).
pub fn spectrum_set(edges: &[BandEdge], flat_tol: f64) -> SpectrumSet {
    spectrum_set_from_ranges(
        &edges.iter().map(|e| (e.band, e.lo(), e.hi())).collect::<Vec<_>>(),
        flat_tol,
    )
}

/// As [`spectrum_set`] from raw `(band, lo, hi)` triples.
pub fn spectrum_set_from_ranges(ranges: &[(usize, f64, f64)], flat_tol: f64) -> SpectrumSet {
    let mut flat_bands = Vec::new();
    let mut iv = Vec::new();
    for &(band, lo, hi) in ranges {
        if hi - lo < flat_tol {
            flat_bands.push(FlatBand { value: 0.5 * (lo + hi), band });
        } else {
            iv.push((lo, hi));
        }
    }
    SpectrumSet { intervals: merge_intervals(iv, flat_tol), flat_bands }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub holds: bool,
    /// A value of `sub` outside the inflated `full`, when the check fails.
    pub witness: Option<f64>,
}

/// Checks `sub ⊆ full` up to an inflation of `full` by `tol`.
pub fn inclusion_check(sub: &SpectrumSet, full: &SpectrumSet, tol: f64) -> InclusionReport {
    let mut pieces: Vec<(f64, f64)> = full.intervals.iter().map(|&(a, b)| (a - tol, b + tol)).collect();
    pieces.extend(full.flat_bands.iter().map(|f| (f.value - tol, f.value + tol)));
    let cover = merge_intervals(pieces, 0.0);
    let covering = |x: f64| cover.iter().position(|&(a, b)| x >= a && x <= b);

    let mut wanted: Vec<(f64, f64)> = sub.intervals.clone();
    wanted.extend(sub.flat_bands.iter().map(|f| (f.value, f.value)));
    for (a, b) in wanted {
        match (covering(a), covering(b)) {
            (None, _) => return InclusionReport { holds: false, witness: Some(a) },
            (_, None) => return InclusionReport { holds: false, witness: Some(b) },
            (Some(i), Some(j)) if i != j => {
                return InclusionReport { holds: false, witness: Some(0.5 * (cover[i].1 + cover[i + 1].0)) }
            }
            _ => {}
        }
    }
    InclusionReport { holds: true, witness: None }
}
