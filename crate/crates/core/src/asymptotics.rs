//! Band-edge asymptotics of subcoverings with long chiral vectors.
//!
//! For a non-degenerate extremum `k_o` of `λ_j` with `H = ∓Hess λ_j(k_o)`,
//! the subcovering edge is
//!
//! ```text
//! λ_j^±(τ) ≈ λ_j^± ∓ ½ |(T H⁻¹ Tᵀ)^{-1/2} x_o|²,   x_o = T k_o mod 2π ∈ (-π, π]^{d_o}
//! ```
//!
//! with a remainder of order `τ⁻³`, or `τ⁻⁴` when every component of `k_o`
//! is `0` or `π`. Here `τ` is the smallest eigenvalue of `(T Tᵀ)^{1/2}`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::band_functions;
use crate::graph::FundamentalGraph;
use crate::intlat::{is_primitive_set, saturation, ChiralMatrix};
use crate::iso::{Rational, RationalQuasimomentum};
use crate::linalg::{symmetric_eigen, symmetric_function, RealMatrix};
use crate::spectrum::Side;

/// Default finite-difference step (radians).
pub const DEFAULT_STEP: f64 = 1e-3;
/// Adjacent bands must be at least this far apart at `k_o`.
pub const GAP_TOL: f64 = 1e-6;

fn band_value(g: &FundamentalGraph, j: usize, k: &[f64]) -> Result<f64> {
    Ok(band_functions(g, k)?[j - 1])
}

fn check_band_index(g: &FundamentalGraph, j: usize) -> Result<()> {
    if j == 0 || j > g.order() {
        return Err(Error::InvalidInput(format!("band {j} out of range 1..={}", g.order())));
    }
    Ok(())
}

/// Fails with [`Error::BandTouching`] unless `λ_j(k_o)` is separated from its
/// neighbours by more than `GAP_TOL`.
pub fn check_isolated(g: &FundamentalGraph, j: usize, k_o: &[f64]) -> Result<()> {
    check_band_index(g, j)?;
    let ev = band_functions(g, k_o)?;
    let mut gap = f64::INFINITY;
    if j > 1 {
        gap = gap.min(ev[j - 1] - ev[j - 2]);
    }
    if j < ev.len() {
        gap = gap.min(ev[j] - ev[j - 1]);
    }
    if gap <= GAP_TOL {
        return Err(Error::BandTouching { band: j, gap });
    }
    Ok(())
}

/// Hessian of `λ_j` at `k_o` by central second differences with step `h`.
pub fn hessian_fd(g: &FundamentalGraph, j: usize, k_o: &[f64], h: f64) -> Result<RealMatrix> {
    check_isolated(g, j, k_o)?;
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidInput("finite-difference step must be positive".into()));
    }
    let d = k_o.len();
    let at = |shifts: &[(usize, f64)]| {
        let mut k = k_o.to_vec();
        for &(s, dx) in shifts {
            k[s] += dx;
        }
        band_value(g, j, &k)
    };
    let f0 = at(&[])?;
    let mut hess = RealMatrix::zeros(d, d);
    for a in 0..d {
        let v = (at(&[(a, h)])? - 2.0 * f0 + at(&[(a, -h)])?) / (h * h);
        hess.set(a, a, v);
        for b in a + 1..d {
            let v = (at(&[(a, h), (b, h)])? - at(&[(a, h), (b, -h)])? - at(&[(a, -h), (b, h)])?
                + at(&[(a, -h), (b, -h)])?)
                / (4.0 * h * h);
            hess.set(a, b, v);
            hess.set(b, a, v);
        }
    }
    Ok(hess.symmetrized())
}

/// Central-difference Hessian with one Richardson step: `(4 H(h/2) - H(h)) / 3`.
pub fn hessian_richardson(g: &FundamentalGraph, j: usize, k_o: &[f64], h: f64) -> Result<RealMatrix> {
    let coarse = hessian_fd(g, j, k_o, h)?;
    let fine = hessian_fd(g, j, k_o, 0.5 * h)?;
    Ok(fine.scale(4.0).sub(&coarse).scale(1.0 / 3.0).symmetrized())
}

/// Componentwise reduction into `(-π, π]`. Inputs within `1e-12` (relative)
/// of a multiple of `π/2` are snapped to it first.
pub fn reduce_mod_2pi(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let halves = 2.0 * x / PI;
            let m = halves.round();
            if (halves - m).abs() <= 1e-12 * m.abs().max(1.0) {
                // m·π/2 with m reduced into (-2, 2]
                let mut r = (m as i64).rem_euclid(4);
                if r > 2 {
                    r -= 4;
                }
                return r as f64 * PI / 2.0;
            }
            let mut y = x - 2.0 * PI * (x / (2.0 * PI)).round();
            if y <= -PI {
                y += 2.0 * PI;
            } else if y > PI {
                y -= 2.0 * PI;
            }
            y
        })
        .collect()
}

/// `x_o = T·k_o mod 2π` computed exactly for a rational `k_o`.
pub fn reduced_offset_exact(k_o: &RationalQuasimomentum, t: &ChiralMatrix) -> Result<Vec<f64>> {
    k_o.chiral_image(t)?
        .into_iter()
        .map(|r| r.reduce_mod_two().map(|r| r.to_f64() * PI))
        .collect()
}

/// `A^{-1/2}` for a symmetric positive definite `A`.
pub fn sym_inverse_sqrt(a: &RealMatrix) -> Result<RealMatrix> {
    let norm = a.max_abs();
    let (values, _) = symmetric_eigen(a);
    let smallest = values.first().copied().unwrap_or(0.0);
    if smallest.is_nan() || smallest <= 1e-12 * norm {
        return Err(Error::NotPositiveDefinite { smallest });
    }
    Ok(symmetric_function(a, |x| 1.0 / x.sqrt()).1)
}

/// `τ`: smallest eigenvalue of `(T Tᵀ)^{1/2}`.
pub fn tau(t: &ChiralMatrix) -> f64 {
    let tm = RealMatrix::from_int(t.matrix());
    let (values, _) = symmetric_eigen(&tm.mul(&tm.transpose()));
    values[0].max(0.0).sqrt()
}

/// `Tᵀ (T Tᵀ)⁻¹`.
pub fn pseudo_inverse(t: &ChiralMatrix) -> Result<RealMatrix> {
    let tm = RealMatrix::from_int(t.matrix());
    let gram = tm.mul(&tm.transpose());
    Ok(tm.transpose().mul(&gram.inverse()?))
}

/// Point of `{k : T k = 0}` nearest to `k_o`: `k_o - T⁺ T k_o`.
pub fn constrained_nearest(k_o: &[f64], t: &ChiralMatrix) -> Result<Vec<f64>> {
    check_len(k_o, t)?;
    let x = t.apply_f64(k_o);
    let shift = pseudo_inverse(t)?.apply(&x);
    Ok(k_o.iter().zip(shift).map(|(a, b)| a - b).collect())
}

/// Point of the restricted zone `{k : T k ∈ 2πZ^{d_o}}` nearest to `k_o`:
/// `k_o - T⁺ x_o` with `x_o = T k_o mod 2π`.
pub fn restricted_projection(k_o: &[f64], t: &ChiralMatrix) -> Result<Vec<f64>> {
    check_len(k_o, t)?;
    let x = reduce_mod_2pi(&t.apply_f64(k_o));
    let shift = pseudo_inverse(t)?.apply(&x);
    Ok(k_o.iter().zip(shift).map(|(a, b)| a - b).collect())
}

fn check_len(k: &[f64], t: &ChiralMatrix) -> Result<()> {
    if k.len() != t.dim() {
        return Err(Error::WrongShape(format!(
            "quasimomentum has {} components, chiral matrix {} columns",
            k.len(),
            t.dim()
        )));
    }
    Ok(())
}

/// Evaluated asymptotic formula for one band edge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticEstimate {
    pub band: usize,
    pub side: Side,
    pub k_o: Vec<f64>,
    /// `k_o / π` when it is known exactly.
    pub k_o_exact: Option<RationalQuasimomentum>,
    /// `∓Hess λ_j(k_o)`, row-major.
    pub hessian: Vec<Vec<f64>>,
    pub x_o: Vec<f64>,
    /// `λ_j(k_o)`, the edge of the periodic operator.
    pub edge: f64,
    pub correction: f64,
    /// The `d_o = 1` scalar route `½ x_o² / |H^{-1/2} t|²`.
    pub scalar_correction: Option<f64>,
    pub predicted: f64,
    pub tau: f64,
    /// 4 when every component of `k_o` is 0 or π, else 3.
    pub remainder_order: u8,
}

/// Options for [`band_edge_asymptotic`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticConfig {
    pub step: f64,
    pub richardson: bool,
}

impl Default for AsymptoticConfig {
    fn default() -> Self {
        AsymptoticConfig { step: DEFAULT_STEP, richardson: true }
    }
}

/// Asymptotic band edge of the subcovering at an exact extremum `k_o`.
pub fn band_edge_asymptotic(
    g: &FundamentalGraph,
    j: usize,
    side: Side,
    k_o: &RationalQuasimomentum,
    t: &ChiralMatrix,
    cfg: &AsymptoticConfig,
) -> Result<AsymptoticEstimate> {
    let x_o = reduced_offset_exact(k_o, t)?;
    estimate(g, j, side, &k_o.to_radians(), Some(k_o.clone()), x_o, t, cfg)
}

/// As [`band_edge_asymptotic`] for a floating-point `k_o`. The point is
/// snapped to a rational multiple of `π` with denominator at most 12 when
/// within `1e-6`; [`AsymptoticEstimate::k_o_exact`] reports the snap.
pub fn band_edge_asymptotic_at(
    g: &FundamentalGraph,
    j: usize,
    side: Side,
    k_o: &[f64],
    t: &ChiralMatrix,
    cfg: &AsymptoticConfig,
) -> Result<AsymptoticEstimate> {
    check_len(k_o, t)?;
    match RationalQuasimomentum::snap(k_o, 12, 1e-6) {
        Some(r) => band_edge_asymptotic(g, j, side, &r, t, cfg),
        None => {
            let x_o = reduce_mod_2pi(&t.apply_f64(k_o));
            estimate(g, j, side, k_o, None, x_o, t, cfg)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn estimate(
    g: &FundamentalGraph,
    j: usize,
    side: Side,
    k_o: &[f64],
    k_o_exact: Option<RationalQuasimomentum>,
    x_o: Vec<f64>,
    t: &ChiralMatrix,
    cfg: &AsymptoticConfig,
) -> Result<AsymptoticEstimate> {
    if t.dim() != g.dim() {
        return Err(Error::WrongShape("chiral matrix and graph dimensions differ".into()));
    }
    if !is_primitive_set(t)? {
        return Err(Error::NotPrimitive { index: saturation(t)?.index });
    }
    check_band_index(g, j)?;
    let hess = if cfg.richardson {
        hessian_richardson(g, j, k_o, cfg.step)?
    } else {
        hessian_fd(g, j, k_o, cfg.step)?
    };
    let h = match side {
        Side::Lower => hess,
        Side::Upper => hess.scale(-1.0),
    };
    let h_inv_sqrt = sym_inverse_sqrt(&h)?;
    let h_inv = h.inverse()?;

    let tm = RealMatrix::from_int(t.matrix());
    let m = tm.mul(&h_inv).mul(&tm.transpose());
    let y = sym_inverse_sqrt(&m)?.apply(&x_o);
    let correction = 0.5 * y.iter().map(|v| v * v).sum::<f64>();

    let scalar_correction = (t.count() == 1).then(|| {
        let row: Vec<f64> = t.row(0).iter().map(|&x| x as f64).collect();
        let w = h_inv_sqrt.apply(&row);
        0.5 * x_o[0] * x_o[0] / w.iter().map(|v| v * v).sum::<f64>()
    });

    let edge = band_value(g, j, k_o)?;
    let predicted = match side {
        Side::Lower => edge + correction,
        Side::Upper => edge - correction,
    };
    let half_period = match &k_o_exact {
        Some(r) => r.is_half_period_point(),
        None => k_o.iter().all(|&x| {
            let r = reduce_mod_2pi(&[x])[0];
            r == 0.0 || r == PI
        }),
    };
    Ok(AsymptoticEstimate {
        band: j,
        side,
        k_o: k_o.to_vec(),
        k_o_exact,
        hessian: (0..h.rows()).map(|i| (0..h.cols()).map(|c| h.get(i, c)).collect()).collect(),
        x_o,
        edge,
        correction,
        scalar_correction,
        predicted,
        tau: tau(t),
        remainder_order: if half_period { 4 } else { 3 },
    })
}

/// Extremal clusters of a band edge that are not `±k_o`; a non-empty result
/// means the extremum is not unique up to evenness.
pub fn competing_extrema(points: &[Vec<f64>], k_o: &[f64], radius: f64) -> Vec<Vec<f64>> {
    let near = |p: &[f64], q: &[f64]| {
        let diff: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
        reduce_mod_2pi(&diff).iter().map(|x| x * x).sum::<f64>().sqrt() <= radius
    };
    let neg: Vec<f64> = k_o.iter().map(|x| -x).collect();
    points
        .iter()
        .filter(|p| !near(p, k_o) && !near(p, &neg))
        .cloned()
        .collect()
}

/// Exact `k = r·π` for a list of rationals, convenience for callers.
pub fn rational_point(pairs: &[(i64, i64)]) -> Result<RationalQuasimomentum> {
    RationalQuasimomentum::new(
        pairs.iter().map(|&(p, q)| Rational::new(p, q)).collect::<Result<Vec<_>>>()?,
    )
}
