//! Exact isospectrality decisions.
//!
//! Quasimomenta are exact rational multiples of `π`, so the edge coincidence
//! condition `T·k_o ∈ 2πZ^{d_o}` becomes `T·r ∈ 2Z^{d_o}` and is decided in
//! integer arithmetic. Nothing in this module takes a tolerance.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::intlat::{gcd_i64, is_primitive_set, ChiralMatrix};
use crate::spectrum::Side;

/// Rational number in lowest terms with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let g = gcd_i64(num, den).max(1);
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = num.checked_neg().ok_or(Error::Overflow)?;
            den = den.checked_neg().ok_or(Error::Overflow)?;
        }
        Ok(Rational { num, den })
    }

    pub fn integer(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Representative of `self + 2Z` in `(-1, 1]`.
    pub fn reduce_mod_two(self) -> Result<Self> {
        let period = self.den.checked_mul(2).ok_or(Error::Overflow)?;
        let mut n = self.num.rem_euclid(period);
        if n > self.den {
            n -= period;
        }
        Rational::new(n, self.den)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("not a rational: {s:?}"));
        match s.split_once('/') {
            Some((p, q)) => Rational::new(
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ),
            None => Ok(Rational::integer(s.parse().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Quasimomentum `k = r·π` with exact components `r_i ∈ (-1, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RationalQuasimomentum {
    components: Vec<Rational>,
}

impl RationalQuasimomentum {
    /// Components are reduced modulo 2 into `(-1, 1]`.
    pub fn new(components: Vec<Rational>) -> Result<Self> {
        let components = components
            .into_iter()
            .map(Rational::reduce_mod_two)
            .collect::<Result<Vec<_>>>()?;
        Ok(RationalQuasimomentum { components })
    }

    /// From `(numerator, denominator)` pairs.
    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(p, q)| Rational::new(p, q)).collect::<Result<Vec<_>>>()?)
    }

    pub fn zero(d: usize) -> Self {
        RationalQuasimomentum { components: vec![Rational::integer(0); d] }
    }

    /// `π·(1, …, 1)`.
    pub fn pi_ones(d: usize) -> Self {
        RationalQuasimomentum { components: vec![Rational::integer(1); d] }
    }

    pub fn components(&self) -> &[Rational] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// The quasimomentum in radians.
    pub fn to_radians(&self) -> Vec<f64> {
        self.components.iter().map(|r| r.to_f64() * std::f64::consts::PI).collect()
    }

    /// Every component is `0` or `π`.
    pub fn is_half_period_point(&self) -> bool {
        self.components.iter().all(|r| r.den == 1)
    }

    /// Nearest rational point with denominators `<= max_den`, if every
    /// component of `k` (radians) is within `tol` of one.
    pub fn snap(k: &[f64], max_den: i64, tol: f64) -> Option<Self> {
        let mut out = Vec::with_capacity(k.len());
        for &x in k {
            let r = x / std::f64::consts::PI;
            let hit = (1..=max_den).find_map(|q| {
                let p = (r * q as f64).round();
                ((r - p / q as f64).abs() * std::f64::consts::PI <= tol).then_some((p as i64, q))
            })?;
            out.push(Rational::new(hit.0, hit.1).ok()?);
        }
        Self::new(out).ok()
    }

    /// Exact `T·r` as rationals (`T·k = (T·r)·π`).
    pub fn chiral_image(&self, t: &ChiralMatrix) -> Result<Vec<Rational>> {
        if t.dim() != self.dim() {
            return Err(Error::WrongShape(format!(
                "quasimomentum has {} components, chiral matrix {} columns",
                self.dim(),
                t.dim()
            )));
        }
        let lcm = self.components.iter().try_fold(1i128, |acc, r| {
            let d = r.den as i128;
            let g = gcd_i64(acc as i64, r.den) as i128;
            (acc / g).checked_mul(d).filter(|v| *v <= i64::MAX as i128).ok_or(Error::Overflow)
        })?;
        (0..t.count())
            .map(|s| {
                let mut acc: i128 = 0;
                for (i, r) in self.components.iter().enumerate() {
                    let scaled = (r.num as i128) * (lcm / r.den as i128);
                    let term = scaled.checked_mul(t.get(s, i) as i128).ok_or(Error::Overflow)?;
                    acc = acc.checked_add(term).ok_or(Error::Overflow)?;
                }
                let num = i64::try_from(acc).map_err(|_| Error::Overflow)?;
                Rational::new(num, lcm as i64)
            })
            .collect()
    }
}

impl fmt::Display for RationalQuasimomentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

impl FromStr for RationalQuasimomentum {
    type Err = Error;
    /// Comma-separated rationals, each a multiple of `π`.
    fn from_str(s: &str) -> Result<Self> {
        Self::new(s.split(',').map(str::parse).collect::<Result<Vec<_>>>()?)
    }
}

/// `T·k_o ∈ 2πZ^{d_o}`, decided exactly.
pub fn edge_coincidence(k_o: &RationalQuasimomentum, t: &ChiralMatrix) -> Result<bool> {
    Ok(k_o
        .chiral_image(t)?
        .iter()
        .all(|r| r.den == 1 && r.num.rem_euclid(2) == 0))
}

/// Quasimomenta where band `band` attains its lower or upper edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelSet {
    pub band: usize,
    pub side: Side,
    pub points: Vec<RationalQuasimomentum>,
}

/// Level sets for every band edge of one operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelSets {
    pub sets: Vec<LevelSet>,
    /// Whether the listed points suffice to decide coincidence for every
    /// chiral set (so that a negative verdict is conclusive).
    pub complete: bool,
}

impl LevelSets {
    pub fn get(&self, band: usize, side: Side) -> Vec<&RationalQuasimomentum> {
        self.sets
            .iter()
            .filter(|s| s.band == band && s.side == side)
            .flat_map(|s| s.points.iter())
            .collect()
    }

    pub fn bands(&self) -> Vec<usize> {
        let mut b: Vec<usize> = self.sets.iter().map(|s| s.band).collect();
        b.sort_unstable();
        b.dedup();
        b
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeDetail {
    pub band: usize,
    pub side: Side,
    pub coincides: bool,
    /// First level-set point satisfying the coincidence condition.
    pub witness: Option<RationalQuasimomentum>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsoVerdict {
    pub isospectral: bool,
    pub complete: bool,
    pub edges: Vec<EdgeDetail>,
}

impl IsoVerdict {
    pub fn failing(&self) -> Vec<(usize, Side)> {
        self.edges.iter().filter(|e| !e.coincides).map(|e| (e.band, e.side)).collect()
    }
}

/// Isospectrality of a periodic graph and its subcovering from the level sets
/// of the band edges: every band edge must be attained at a point `k_o` with
/// `T·k_o ∈ 2πZ^{d_o}`.
pub fn isospectral_verdict(level_sets: &LevelSets, t: &ChiralMatrix) -> Result<IsoVerdict> {
    if !is_primitive_set(t)? {
        let sat = crate::intlat::saturation(t)?;
        return Err(Error::NotPrimitive { index: sat.index });
    }
    let mut edges = Vec::new();
    for band in level_sets.bands() {
        for side in [Side::Lower, Side::Upper] {
            let points = level_sets.get(band, side);
            if points.is_empty() {
                return Err(Error::EmptyLevelSet { band, side: side.as_str() });
            }
            let mut witness = None;
            for p in points {
                if edge_coincidence(p, t)? {
                    witness = Some(p.clone());
                    break;
                }
            }
            edges.push(EdgeDetail { band, side, coincides: witness.is_some(), witness });
        }
    }
    if edges.is_empty() {
        return Err(Error::InvalidInput("no level sets given".into()));
    }
    Ok(IsoVerdict {
        isospectral: edges.iter().all(|e| e.coincides),
        complete: level_sets.complete,
        edges,
    })
}

/// Closed-form isospectrality rule for subcoverings of the diamond lattice:
/// always true for one chiral vector; for two, true iff some pair of columns
/// `i ≠ j` has `t_{si} + t_{sj}` even in both rows.
pub fn diamond_parity_rule(t: &ChiralMatrix) -> Result<bool> {
    if t.dim() != 3 || !(1..=2).contains(&t.count()) {
        return Err(Error::WrongShape(format!(
            "diamond rule needs a 1x3 or 2x3 chiral matrix, got {}x{}",
            t.count(),
            t.dim()
        )));
    }
    if t.count() == 1 {
        return Ok(true);
    }
    Ok([(0, 1), (0, 2), (1, 2)]
        .iter()
        .any(|&(i, j)| (0..2).all(|s| (t.get(s, i) + t.get(s, j)).rem_euclid(2) == 0)))
}

fn pts(list: &[&[(i64, i64)]]) -> Vec<RationalQuasimomentum> {
    list.iter().map(|p| RationalQuasimomentum::from_pairs(p).expect("valid constant")).collect()
}

fn two_band_sets(
    bottom: Vec<RationalQuasimomentum>,
    inner: Vec<RationalQuasimomentum>,
    complete: bool,
) -> LevelSets {
    LevelSets {
        sets: vec![
            LevelSet { band: 1, side: Side::Lower, points: bottom.clone() },
            LevelSet { band: 1, side: Side::Upper, points: inner.clone() },
            LevelSet { band: 2, side: Side::Lower, points: inner },
            LevelSet { band: 2, side: Side::Upper, points: bottom },
        ],
        complete,
    }
}

/// Hexagonal lattice with `q > 0`: outer edges at `0`, inner edges at
/// `±(2π/3, -2π/3)`.
pub fn hexagonal_level_sets() -> LevelSets {
    two_band_sets(
        pts(&[&[(0, 1), (0, 1)]]),
        pts(&[&[(2, 3), (-2, 3)], &[(-2, 3), (2, 3)]]),
        true,
    )
}

/// Diamond lattice with `q > 0`. The inner edges are attained on a curve; the
/// three points with components in `{0, π}` represent it, which suffices for
/// the coincidence condition.
pub fn diamond_level_sets() -> LevelSets {
    two_band_sets(
        pts(&[&[(0, 1), (0, 1), (0, 1)]]),
        pts(&[
            &[(1, 1), (1, 1), (0, 1)],
            &[(1, 1), (0, 1), (1, 1)],
            &[(0, 1), (1, 1), (1, 1)],
        ]),
        true,
    )
}

/// `Z^d` lattice Laplacian: minimum at `0`, maximum at `π·1`.
pub fn hypercubic_level_sets(d: usize) -> LevelSets {
    LevelSets {
        sets: vec![
            LevelSet { band: 1, side: Side::Lower, points: vec![RationalQuasimomentum::zero(d)] },
            LevelSet { band: 1, side: Side::Upper, points: vec![RationalQuasimomentum::pi_ones(d)] },
        ],
        complete: true,
    }
}
