//! Exact integer-lattice algebra.
//!
//! Everything here works on `i64` entries with checked arithmetic; an
//! intermediate value that does not fit is reported as [`Error::Overflow`]
//! instead of wrapping. Determinants are accumulated in `i128`.

use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

fn ck<T>(v: Option<T>) -> Result<T> {
    v.ok_or(Error::Overflow)
}

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|i| self.row(i))).finish()
    }
}

impl fmt::Display for IntMatrix {
    /// Rows separated by `;`, entries by `,` (the command-line syntax).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(";")?;
            }
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::WrongShape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::WrongShape("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Ok(IntMatrix { rows: rows.len(), cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Exact product; fails on overflow.
    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::WrongShape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc: i64 = 0;
                for l in 0..self.cols {
                    let p = ck(self.get(i, l).checked_mul(other.get(l, j)))?;
                    acc = ck(acc.checked_add(p))?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `M x` in floating point.
    pub fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a as f64 * b).sum())
            .collect()
    }

    /// Entries as a row-major `f64` vector.
    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&x| x as f64).collect()
    }

    /// Columns `cols` of `self`, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> IntMatrix {
        let mut m = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                m.set(i, jj, self.get(i, j));
            }
        }
        m
    }

    /// Rows `lo..hi`.
    pub fn row_range(&self, lo: usize, hi: usize) -> IntMatrix {
        IntMatrix {
            rows: hi - lo,
            cols: self.cols,
            data: self.data[lo * self.cols..hi * self.cols].to_vec(),
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<i128> {
        if self.rows != self.cols {
            return Err(Error::WrongShape("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(1);
        }
        let mut a: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k * n + k] == 0 {
                match (k + 1..n).find(|&i| a[i * n + k] != 0) {
                    Some(i) => {
                        for j in 0..n {
                            a.swap(k * n + j, i * n + j);
                        }
                        sign = -sign;
                    }
                    None => return Ok(0),
                }
            }
            let p = a[k * n + k];
            for i in k + 1..n {
                for j in k + 1..n {
                    let x = ck(a[i * n + j].checked_mul(p))?;
                    let y = ck(a[i * n + k].checked_mul(a[k * n + j]))?;
                    a[i * n + j] = ck(x.checked_sub(y))? / prev;
                }
            }
            prev = p;
        }
        Ok(sign * a[n * n - 1])
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += c * row[src]
    fn add_row(&mut self, dst: usize, src: usize, c: i64) -> Result<()> {
        if c == 0 {
            return Ok(());
        }
        for j in 0..self.cols {
            let v = ck(self.get(src, j).checked_mul(c))?;
            let w = ck(self.get(dst, j).checked_add(v))?;
            self.set(dst, j, w);
        }
        Ok(())
    }

    /// col[dst] += c * col[src]
    fn add_col(&mut self, dst: usize, src: usize, c: i64) -> Result<()> {
        if c == 0 {
            return Ok(());
        }
        for i in 0..self.rows {
            let v = ck(self.get(i, src).checked_mul(c))?;
            let w = ck(self.get(i, dst).checked_add(v))?;
            self.set(i, dst, w);
        }
        Ok(())
    }

    fn negate_row(&mut self, i: usize) -> Result<()> {
        for j in 0..self.cols {
            let v = ck(self.get(i, j).checked_neg())?;
            self.set(i, j, v);
        }
        Ok(())
    }

    fn negate_col(&mut self, j: usize) -> Result<()> {
        for i in 0..self.rows {
            let v = ck(self.get(i, j).checked_neg())?;
            self.set(i, j, v);
        }
        Ok(())
    }
}

/// Matrix of chiral indices: `d_o` rows in `Z^d`, `1 <= d_o < d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChiralMatrix(IntMatrix);

impl ChiralMatrix {
    pub fn new(m: IntMatrix) -> Result<Self> {
        if m.rows() == 0 || m.rows() >= m.cols() {
            return Err(Error::WrongShape(format!(
                "chiral matrix needs 1 <= rows < cols, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(ChiralMatrix(m))
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows)?)
    }

    /// Number of chiral vectors `d_o`.
    pub fn count(&self) -> usize {
        self.0.rows()
    }

    /// Lattice dimension `d`.
    pub fn dim(&self) -> usize {
        self.0.cols()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> IntMatrix {
        self.0
    }
}

impl Deref for ChiralMatrix {
    type Target = IntMatrix;
    fn deref(&self) -> &IntMatrix {
        &self.0
    }
}

impl fmt::Display for ChiralMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `M = U · S · V` with `U`, `V` unimodular and `S` diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    /// Diagonal of `S`, including trailing zeros.
    pub fn invariant_factors(&self) -> Vec<i64> {
        (0..self.s.rows().min(self.s.cols())).map(|i| self.s.get(i, i)).collect()
    }

    /// Number of nonzero invariant factors.
    pub fn rank(&self) -> usize {
        self.invariant_factors().iter().take_while(|&&s| s != 0).count()
    }
}

/// Smith form together with the inverses of both transforms.
struct SmithFull {
    u: IntMatrix,
    u_inv: IntMatrix,
    s: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

/// Smith normal form with the smallest-nonzero pivot strategy.
pub fn smith_normal_form(m: &IntMatrix) -> Result<SmithDecomposition> {
    if m.is_empty() {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let f = smith_full(m)?;
    Ok(SmithDecomposition { u: f.u, s: f.s, v: f.v })
}

fn smith_full(m: &IntMatrix) -> Result<SmithFull> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    // Invariant: m = u · a · v, u_inv · m · v_inv = a.
    let mut u = IntMatrix::identity(rows);
    let mut u_inv = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut v_inv = IntMatrix::identity(cols);

    // a ← E a  with E: row[dst] += c row[src]
    macro_rules! row_add {
        ($dst:expr, $src:expr, $c:expr) => {{
            let (d, s, c) = ($dst, $src, $c);
            a.add_row(d, s, c)?;
            u_inv.add_row(d, s, c)?;
            u.add_col(s, d, ck(c.checked_neg())?)?;
        }};
    }
    macro_rules! col_add {
        ($dst:expr, $src:expr, $c:expr) => {{
            let (d, s, c) = ($dst, $src, $c);
            a.add_col(d, s, c)?;
            v_inv.add_col(d, s, c)?;
            v.add_row(s, d, ck(c.checked_neg())?)?;
        }};
    }
    macro_rules! row_swap {
        ($x:expr, $y:expr) => {{
            a.swap_rows($x, $y);
            u_inv.swap_rows($x, $y);
            u.swap_cols($x, $y);
        }};
    }
    macro_rules! col_swap {
        ($x:expr, $y:expr) => {{
            a.swap_cols($x, $y);
            v_inv.swap_cols($x, $y);
            v.swap_rows($x, $y);
        }};
    }

    for t in 0..rows.min(cols) {
        loop {
            // Smallest nonzero entry of the trailing block.
            let mut best: Option<(usize, usize, i64)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = a.get(i, j);
                    if x != 0 && best.is_none_or(|(_, _, b)| x.unsigned_abs() < b.unsigned_abs()) {
                        best = Some((i, j, x));
                    }
                }
            }
            let Some((pi, pj, _)) = best else {
                break;
            };
            row_swap!(t, pi);
            col_swap!(t, pj);

            let mut clean = true;
            let p = a.get(t, t);
            for i in t + 1..rows {
                let q = a.get(i, t) / p;
                row_add!(i, t, ck(q.checked_neg())?);
                if a.get(i, t) != 0 {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = a.get(t, j) / p;
                col_add!(j, t, ck(q.checked_neg())?);
                if a.get(t, j) != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Pivot must divide the rest of the block.
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| a.get(i, j) % p != 0);
            match bad {
                Some((i, _)) => row_add!(t, i, 1),
                None => break,
            }
        }
        if a.get(t, t) < 0 {
            a.negate_row(t)?;
            u_inv.negate_row(t)?;
            u.negate_col(t)?;
        }
    }
    Ok(SmithFull { u, u_inv, s: a, v, v_inv })
}

/// gcd of all `k×k` minors by direct enumeration. Limited to `k <= 4`, `cols <= 8`.
pub fn gcd_of_maximal_minors(m: &IntMatrix) -> Result<u128> {
    let (k, n) = (m.rows(), m.cols());
    if k == 0 || k > n {
        return Err(Error::WrongShape(format!("{k}x{n} has no maximal minors")));
    }
    if k > 4 || n > 8 {
        return Err(Error::InvalidInput(format!(
            "minor enumeration limited to 4x8, got {k}x{n}"
        )));
    }
    let mut g: u128 = 0;
    for cols in combinations(n, k) {
        let d = m.select_cols(&cols).determinant()?;
        g = gcd_u128(g, d.unsigned_abs());
    }
    Ok(g)
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

pub(crate) fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn gcd_i64(a: i64, b: i64) -> i64 {
    gcd_u128(a.unsigned_abs() as u128, b.unsigned_abs() as u128) as i64
}

/// Product of the Smith invariant factors of a full-row-rank matrix.
fn sublattice_index(m: &IntMatrix) -> Result<(u128, SmithFull)> {
    let f = smith_full(m)?;
    let mut index: u128 = 1;
    for i in 0..m.rows() {
        let s = f.s.get(i, i);
        if s == 0 {
            return Err(Error::RankDeficient);
        }
        index = ck(index.checked_mul(s as u128))?;
    }
    Ok((index, f))
}

/// True iff the rows of `t` extend to a basis of `Z^d`.
///
/// Small shapes are decided by both the minor-gcd route and the Smith route,
/// and the two must agree.
pub fn is_primitive_set(t: &ChiralMatrix) -> Result<bool> {
    let (index, _) = sublattice_index(t)?;
    if t.count() <= 4 && t.dim() <= 8 {
        let g = gcd_of_maximal_minors(t)?;
        debug_assert_eq!(g, index, "minor gcd and Smith index disagree for {t}");
        if g != index {
            return Err(Error::InvalidInput(format!(
                "internal disagreement: minor gcd {g} vs Smith index {index}"
            )));
        }
    }
    Ok(index == 1)
}

/// A `d×d` unimodular matrix whose leading rows are the chiral matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnimodularCompletion {
    matrix: IntMatrix,
    inverse: IntMatrix,
    chiral_rows: usize,
}

impl UnimodularCompletion {
    /// Validates a caller-supplied completion of `t`.
    pub fn from_matrix(t: &ChiralMatrix, matrix: IntMatrix) -> Result<Self> {
        let d = t.dim();
        if matrix.rows() != d || matrix.cols() != d {
            return Err(Error::WrongShape(format!("completion must be {d}x{d}")));
        }
        if matrix.row_range(0, t.count()) != *t.matrix() {
            return Err(Error::InvalidInput(
                "leading rows of the completion differ from the chiral matrix".into(),
            ));
        }
        let det = matrix.determinant()?;
        if det.abs() != 1 {
            return Err(Error::InvalidInput(format!("completion has determinant {det}")));
        }
        let f = smith_full(&matrix)?;
        // matrix = u · I · v  =>  matrix⁻¹ = v_inv · u_inv
        let inverse = f.v_inv.mul(&f.u_inv)?;
        Ok(UnimodularCompletion { matrix, inverse, chiral_rows: t.count() })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn inverse(&self) -> &IntMatrix {
        &self.inverse
    }

    pub fn determinant(&self) -> i128 {
        // validated on construction
        self.matrix.determinant().unwrap_or(0)
    }

    /// Number of leading rows copied from the chiral matrix.
    pub fn chiral_rows(&self) -> usize {
        self.chiral_rows
    }

    /// Quasimomentum `k = T̃⁻¹ · (0, κ)` for residual coordinates `κ`.
    pub fn residual_to_quasimomentum(&self, kappa: &[f64]) -> Vec<f64> {
        let d = self.matrix.rows();
        let mut full = vec![0.0; d];
        full[self.chiral_rows..].copy_from_slice(kappa);
        self.inverse.apply_f64(&full)
    }
}

/// Completes a primitive set to a basis of `Z^d` by column Hermite reduction.
///
/// Column operations bring `T` to `[I | 0] = T·W` with `W` unimodular; the
/// completion is `W⁻¹`, whose leading rows are exactly `T`. The result is one
/// of infinitely many valid completions.
pub fn complete_to_basis(t: &ChiralMatrix) -> Result<UnimodularCompletion> {
    let (k, d) = (t.count(), t.dim());
    let mut a = t.matrix().clone();
    // t = a · winv throughout
    let mut w = IntMatrix::identity(d);
    let mut winv = IntMatrix::identity(d);

    macro_rules! col_add {
        ($dst:expr, $src:expr, $c:expr) => {{
            let (dst, src, c) = ($dst, $src, $c);
            a.add_col(dst, src, c)?;
            w.add_col(dst, src, c)?;
            winv.add_row(src, dst, ck(c.checked_neg())?)?;
        }};
    }
    macro_rules! col_swap {
        ($x:expr, $y:expr) => {{
            a.swap_cols($x, $y);
            w.swap_cols($x, $y);
            winv.swap_rows($x, $y);
        }};
    }

    for r in 0..k {
        // Euclid across columns r..d of row r.
        loop {
            let nz: Vec<usize> = (r..d).filter(|&j| a.get(r, j) != 0).collect();
            if nz.is_empty() {
                return Err(Error::RankDeficient);
            }
            let piv = *nz.iter().min_by_key(|&&j| a.get(r, j).unsigned_abs()).unwrap();
            col_swap!(r, piv);
            if nz.len() == 1 {
                break;
            }
            let p = a.get(r, r);
            for j in r + 1..d {
                let q = a.get(r, j) / p;
                col_add!(j, r, ck(q.checked_neg())?);
            }
        }
        let p = a.get(r, r);
        if p.unsigned_abs() != 1 {
            let (index, _) = sublattice_index(t)?;
            return Err(Error::NotPrimitive { index });
        }
        if p < 0 {
            a.negate_col(r)?;
            w.negate_col(r)?;
            winv.negate_row(r)?;
        }
        for j in 0..r {
            let c = a.get(r, j);
            col_add!(j, r, ck(c.checked_neg())?);
        }
    }
    debug_assert_eq!(winv.row_range(0, k), *t.matrix());
    Ok(UnimodularCompletion { matrix: winv, inverse: w, chiral_rows: k })
}

/// Row Hermite normal form of a full-row-rank matrix (upper echelon,
/// positive pivots, entries above each pivot reduced into `[0, pivot)`).
pub fn row_hermite_form(m: &IntMatrix) -> Result<IntMatrix> {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == rows {
            break;
        }
        loop {
            let nz: Vec<usize> = (r..rows).filter(|&i| a.get(i, c) != 0).collect();
            if nz.is_empty() {
                break;
            }
            let piv = *nz.iter().min_by_key(|&&i| a.get(i, c).unsigned_abs()).unwrap();
            a.swap_rows(r, piv);
            if nz.len() == 1 {
                break;
            }
            let p = a.get(r, c);
            for i in r + 1..rows {
                let q = a.get(i, c) / p;
                a.add_row(i, r, ck(q.checked_neg())?)?;
            }
        }
        if a.get(r, c) == 0 {
            continue;
        }
        if a.get(r, c) < 0 {
            a.negate_row(r)?;
        }
        let p = a.get(r, c);
        for i in 0..r {
            let q = a.get(i, c).div_euclid(p);
            a.add_row(i, r, ck(q.checked_neg())?)?;
        }
        pivots.push(c);
        r += 1;
    }
    if r < rows {
        return Err(Error::RankDeficient);
    }
    Ok(a)
}

/// Basis of `Z^d ∩ span(rows of T)` together with the index of the row
/// lattice of `T` inside it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Saturation {
    /// Row Hermite form of the saturated lattice.
    pub basis: IntMatrix,
    pub index: u128,
}

pub fn saturation(t: &ChiralMatrix) -> Result<Saturation> {
    let (index, f) = sublattice_index(t)?;
    // U⁻¹ T = S V: row i is s_i · V_i, so the first d_o rows of V span the saturation.
    let basis = row_hermite_form(&f.v.row_range(0, t.count()))?;
    Ok(Saturation { basis, index })
}

/// Unimodular inverse of `m` (`|det m| = 1`).
pub fn unimodular_inverse(m: &IntMatrix) -> Result<IntMatrix> {
    if m.rows() != m.cols() {
        return Err(Error::WrongShape("inverse of a non-square matrix".into()));
    }
    let det = m.determinant()?;
    if det.abs() != 1 {
        return Err(Error::InvalidInput(format!("matrix has determinant {det}")));
    }
    let f = smith_full(m)?;
    f.v_inv.mul(&f.u_inv)
}

/// Smith diagonal plus `V⁻¹`, for the quotient constructions.
pub(crate) struct SmithWithInverses {
    pub s: Vec<i64>,
    pub v_inv: IntMatrix,
}

pub(crate) fn smith_with_inverses(m: &IntMatrix) -> Result<SmithWithInverses> {
    let f = smith_full(m)?;
    let s = (0..m.rows().min(m.cols())).map(|i| f.s.get(i, i)).collect();
    Ok(SmithWithInverses { s, v_inv: f.v_inv })
}
