//! Integer design matrices, orthogonal-array and Latin-hypercube predicates,
//! and the level collapse/expansion maps between them.
//!
//! Levels are 0-based everywhere and all structural checks use exact integer
//! counting.

use std::fmt;

use itertools::Itertools;
use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Dense row-major matrix of nonnegative integer levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct IntegerMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<usize>,
}

impl IntegerMatrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<usize>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {n_rows}x{n_cols} matrix",
                data.len()
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0; n_rows * n_cols],
        }
    }

    pub fn from_rows<R: AsRef<[usize]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), n_cols, data)
    }

    pub fn from_columns<C: AsRef<[usize]>>(n_rows: usize, columns: &[C]) -> Result<Self> {
        let n_cols = columns.len();
        let mut m = Self::zeros(n_rows, n_cols);
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != n_rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has {} entries, expected {n_rows}",
                    c.len()
                )));
            }
            for (i, &x) in c.iter().enumerate() {
                m.data[i * n_cols + j] = x;
            }
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: usize) {
        self.data[i * self.n_cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> Vec<usize> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<usize>> {
        (0..self.n_cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<usize>> {
        self.rows().map(<[usize]>::to_vec).collect()
    }

    pub fn data(&self) -> &[usize] {
        &self.data
    }

    pub fn max_entry(&self) -> Option<usize> {
        self.data.iter().copied().max()
    }

    pub fn select_columns(&self, cols: &[usize]) -> IntegerMatrix {
        let columns: Vec<Vec<usize>> = cols.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(self.n_rows, &columns).expect("columns share the row count")
    }

    /// Matrix with rows taken in the given order.
    pub fn permute_rows(&self, order: &[usize]) -> IntegerMatrix {
        let rows: Vec<&[usize]> = order.iter().map(|&i| self.row(i)).collect();
        let mut data = Vec::with_capacity(self.data.len());
        for r in rows {
            data.extend_from_slice(r);
        }
        Self::new(order.len(), self.n_cols, data).expect("shape preserved")
    }

    pub fn vstack(blocks: &[IntegerMatrix]) -> Result<IntegerMatrix> {
        let n_cols = blocks.first().map_or(0, |b| b.n_cols);
        if blocks.iter().any(|b| b.n_cols != n_cols) {
            return Err(Error::DimensionMismatch(
                "vstack column counts differ".into(),
            ));
        }
        let data: Vec<usize> = blocks.iter().flat_map(|b| b.data.iter().copied()).collect();
        Self::new(blocks.iter().map(|b| b.n_rows).sum(), n_cols, data)
    }

    /// `factor * self + other`, entrywise.
    pub fn scaled_add(&self, factor: usize, other: &IntegerMatrix) -> Result<IntegerMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch("scaled_add shapes differ".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| factor * a + b)
            .collect();
        Self::new(self.n_rows, self.n_cols, data)
    }
}

impl TryFrom<Vec<Vec<usize>>> for IntegerMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<IntegerMatrix> for Vec<Vec<usize>> {
    fn from(m: IntegerMatrix) -> Self {
        m.to_rows()
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.rows() {
            writeln!(f, "{}", r.iter().join(" "))?;
        }
        Ok(())
    }
}

/// Checks every entry against its column's level count.
pub fn check_levels(m: &IntegerMatrix, levels: &[usize]) -> Result<()> {
    if levels.len() != m.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} level counts for {} columns",
            levels.len(),
            m.n_cols()
        )));
    }
    for i in 0..m.n_rows() {
        for (j, &s) in levels.iter().enumerate() {
            let value = m.get(i, j);
            if value >= s {
                return Err(Error::LevelOutOfRange {
                    row: i,
                    col: j,
                    value,
                    levels: s,
                });
            }
        }
    }
    Ok(())
}

/// Counts of each level tuple of the projection onto `cols`, in mixed-radix
/// order (first column most significant).
fn projection_counts(m: &IntegerMatrix, levels: &[usize], cols: &[usize]) -> Vec<usize> {
    let cells: usize = cols.iter().map(|&j| levels[j]).product();
    let mut counts = vec![0; cells];
    for r in m.rows() {
        let idx = cols.iter().fold(0, |acc, &j| acc * levels[j] + r[j]);
        counts[idx] += 1;
    }
    counts
}

/// True iff every `t`-column projection of `m` contains each level tuple
/// equally often.
pub fn is_orthogonal_array(m: &IntegerMatrix, levels: &[usize], t: usize) -> Result<bool> {
    check_levels(m, levels)?;
    if t > m.n_cols() {
        return Ok(false);
    }
    for cols in (0..m.n_cols()).combinations(t) {
        let cells: usize = cols.iter().map(|&j| levels[j]).product();
        if cells == 0 || !m.n_rows().is_multiple_of(cells) {
            return Ok(false);
        }
        let target = m.n_rows() / cells;
        if projection_counts(m, levels, &cols)
            .iter()
            .any(|&c| c != target)
        {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest `t` for which `m` is an orthogonal array of strength `t`.
pub fn strength(m: &IntegerMatrix, levels: &[usize]) -> Result<usize> {
    strength_up_to(m, levels, m.n_cols())
}

/// Like [`strength`] but stops looking beyond `cap`.
pub fn strength_up_to(m: &IntegerMatrix, levels: &[usize], cap: usize) -> Result<usize> {
    check_levels(m, levels)?;
    let mut t = 0;
    while t < m.n_cols().min(cap) && is_orthogonal_array(m, levels, t + 1)? {
        t += 1;
    }
    Ok(t)
}

/// An orthogonal array together with its level counts and a verified strength.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalArray {
    matrix: IntegerMatrix,
    levels: Vec<usize>,
    strength: usize,
}

impl OrthogonalArray {
    /// Builds an array claimed to have strength `t`; the claim is verified.
    pub fn new(matrix: IntegerMatrix, levels: Vec<usize>, t: usize) -> Result<Self> {
        if !is_orthogonal_array(&matrix, &levels, t)? {
            return Err(Error::StrengthMismatch {
                claimed: t,
                actual: strength(&matrix, &levels)?,
            });
        }
        Ok(Self {
            matrix,
            levels,
            strength: t,
        })
    }

    pub fn symmetric(matrix: IntegerMatrix, s: usize, t: usize) -> Result<Self> {
        let levels = vec![s; matrix.n_cols()];
        Self::new(matrix, levels, t)
    }

    /// Records the largest strength the matrix actually has, looking no
    /// further than `cap`.
    pub fn with_max_strength(
        matrix: IntegerMatrix,
        levels: Vec<usize>,
        cap: usize,
    ) -> Result<Self> {
        let t = strength_up_to(&matrix, &levels, cap)?;
        Ok(Self {
            matrix,
            levels,
            strength: t,
        })
    }

    pub fn matrix(&self) -> &IntegerMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> IntegerMatrix {
        self.matrix
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn strength(&self) -> usize {
        self.strength
    }

    pub fn runs(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn factors(&self) -> usize {
        self.matrix.n_cols()
    }

    /// The common level count, if all columns share one.
    pub fn symmetric_levels(&self) -> Option<usize> {
        let first = *self.levels.first()?;
        self.levels.iter().all(|&s| s == first).then_some(first)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<OrthogonalArray> {
        let matrix = self.matrix.select_columns(cols);
        let levels = cols.iter().map(|&j| self.levels[j]).collect();
        let t = self.strength.min(cols.len());
        Ok(Self {
            matrix,
            levels,
            strength: t,
        })
    }
}

/// True iff every column is a permutation of `0..n`.
pub fn is_latin_hypercube(m: &IntegerMatrix) -> bool {
    let n = m.n_rows();
    (0..m.n_cols()).all(|j| {
        let mut seen = vec![false; n];
        (0..n).all(|i| {
            let x = m.get(i, j);
            x < n && !std::mem::replace(&mut seen[x], true)
        })
    })
}

/// A matrix whose columns are all permutations of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinHypercube(IntegerMatrix);

impl LatinHypercube {
    pub fn new(matrix: IntegerMatrix) -> Result<Self> {
        if !is_latin_hypercube(&matrix) {
            return Err(Error::NotLatinHypercube(
                "some column is not a permutation of 0..n".into(),
            ));
        }
        Ok(Self(matrix))
    }

    /// Wraps without checking; criteria still evaluate such matrices.
    pub fn new_unchecked(matrix: IntegerMatrix) -> Self {
        Self(matrix)
    }

    pub fn matrix(&self) -> &IntegerMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> IntegerMatrix {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n_rows()
    }

    pub fn factors(&self) -> usize {
        self.0.n_cols()
    }
}

/// Entrywise `floor(x / s)`.
pub fn level_collapse(m: &IntegerMatrix, s: usize) -> IntegerMatrix {
    assert!(s >= 1, "collapse factor must be positive");
    let data = m.data().iter().map(|x| x / s).collect();
    IntegerMatrix::new(m.n_rows(), m.n_cols(), data).expect("shape preserved")
}

/// `(level count, replication)` of each column, requiring every level
/// `0..L` to appear exactly `n / L` times.
pub fn column_blocks(m: &IntegerMatrix) -> Result<Vec<(usize, usize)>> {
    let n = m.n_rows();
    (0..m.n_cols())
        .map(|j| {
            let col = m.column(j);
            let levels = col.iter().max().map_or(0, |x| x + 1);
            if levels == 0 || !n.is_multiple_of(levels) {
                return Err(Error::UnbalancedColumn { col: j });
            }
            let mut counts = vec![0; levels];
            for x in col {
                counts[x] += 1;
            }
            let block = n / levels;
            if counts.iter().any(|&c| c != block) {
                return Err(Error::UnbalancedColumn { col: j });
            }
            Ok((levels, block))
        })
        .collect()
}

/// Level expansion with explicit within-level orders: in column `j`, the
/// positions holding level `i` (taken top to bottom) receive
/// `i * block + orders[j][i].apply(0..block)`.
pub fn level_expand_with(m: &IntegerMatrix, orders: &[Vec<Permutation>]) -> Result<LatinHypercube> {
    let blocks = column_blocks(m)?;
    if orders.len() != m.n_cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} expansion orders for {} columns",
            orders.len(),
            m.n_cols()
        )));
    }
    let mut out = IntegerMatrix::zeros(m.n_rows(), m.n_cols());
    for (j, (&(levels, block), col_orders)) in blocks.iter().zip(orders).enumerate() {
        if col_orders.len() != levels || col_orders.iter().any(|p| p.len() != block) {
            return Err(Error::DimensionMismatch(format!(
                "column {j} needs {levels} orders of length {block}"
            )));
        }
        let mut seen = vec![0; levels];
        for i in 0..m.n_rows() {
            let level = m.get(i, j);
            out.set(i, j, level * block + col_orders[level].apply(seen[level]));
            seen[level] += 1;
        }
    }
    Ok(LatinHypercube(out))
}

/// Uniformly random within-level orders for [`level_expand_with`].
pub fn random_expansion_orders<R: Rng + ?Sized>(
    m: &IntegerMatrix,
    rng: &mut R,
) -> Result<Vec<Vec<Permutation>>> {
    Ok(column_blocks(m)?
        .into_iter()
        .map(|(levels, block)| {
            (0..levels)
                .map(|_| Permutation::random(block, rng))
                .collect()
        })
        .collect())
}

/// Randomized level expansion of a column-balanced matrix into a Latin
/// hypercube. The block size is inferred per column.
pub fn level_expand<R: Rng + ?Sized>(m: &IntegerMatrix, rng: &mut R) -> Result<LatinHypercube> {
    let orders = random_expansion_orders(m, rng)?;
    level_expand_with(m, &orders)
}

/// Real-valued design with entries in `[0, 1)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousDesign {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl ContinuousDesign {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }
}

/// `d = (l + u) / n` with `u` drawn from the open interval (0, 1).
pub fn to_continuous<R: Rng + ?Sized>(lh: &LatinHypercube, rng: &mut R) -> ContinuousDesign {
    let m = lh.matrix();
    let n = m.n_rows() as f64;
    let data = m
        .data()
        .iter()
        .map(|&l| (l as f64 + rng.sample::<f64, _>(Open01)) / n)
        .collect();
    ContinuousDesign {
        n_rows: m.n_rows(),
        n_cols: m.n_cols(),
        data,
    }
}

fn rows_form_oa1(m: &IntegerMatrix, rows: &[usize], s: usize) -> bool {
    (0..m.n_cols()).all(|j| {
        let mut seen = vec![false; s];
        rows.iter().all(|&i| {
            let x = m.get(i, j);
            x < s && !std::mem::replace(&mut seen[x], true)
        })
    })
}

/// True iff the columns jointly contain every level tuple exactly
/// `n / prod(levels)` times.
pub fn is_full_factorial(columns: &[&[usize]], levels: &[usize]) -> bool {
    let n = columns.first().map_or(0, |c| c.len());
    let cells: usize = levels.iter().product();
    if cells == 0 || !n.is_multiple_of(cells) {
        return false;
    }
    let mut counts = vec![0usize; cells];
    for i in 0..n {
        let mut idx = 0;
        for (c, &l) in columns.iter().zip(levels) {
            if c[i] >= l {
                return false;
            }
            idx = idx * l + c[i];
        }
        counts[idx] += 1;
    }
    let target = n / cells;
    counts.iter().all(|&c| c == target)
}

/// Completely resolvable OA check: `m` is an OA(n, m, s, 2) whose
/// consecutive blocks of `s` rows are each an OA(s, m, s, 1).
pub fn is_croa(m: &IntegerMatrix, s: usize) -> bool {
    let n = m.n_rows();
    if s == 0 || !n.is_multiple_of(s) || m.max_entry().is_some_and(|x| x >= s) {
        return false;
    }
    if !is_orthogonal_array(m, &vec![s; m.n_cols()], 2.min(m.n_cols())).unwrap_or(false) {
        return false;
    }
    (0..n / s).all(|b| {
        let rows: Vec<usize> = (b * s..(b + 1) * s).collect();
        rows_form_oa1(m, &rows, s)
    })
}

/// Largest run size accepted by [`croa_partition_search`].
pub const PARTITION_SEARCH_MAX_RUNS: usize = 16;

/// Exhaustive (slow) search for any partition of the rows into `n / s`
/// groups that are each an OA(s, m, s, 1). Only for `n <= 16`; returns
/// `None` when no partition exists or `n` is out of range.
pub fn croa_partition_search(m: &IntegerMatrix, s: usize) -> Option<Vec<Vec<usize>>> {
    let n = m.n_rows();
    if n > PARTITION_SEARCH_MAX_RUNS || s == 0 || !n.is_multiple_of(s) {
        return None;
    }
    if !is_orthogonal_array(m, &vec![s; m.n_cols()], 2.min(m.n_cols())).unwrap_or(false) {
        return None;
    }

    fn extend(
        m: &IntegerMatrix,
        s: usize,
        used: &mut Vec<bool>,
        groups: &mut Vec<Vec<usize>>,
    ) -> bool {
        let Some(first) = used.iter().position(|u| !u) else {
            return true;
        };
        let rest: Vec<usize> = (first + 1..used.len()).filter(|&i| !used[i]).collect();
        for combo in rest.into_iter().combinations(s - 1) {
            let mut group = vec![first];
            group.extend(combo);
            if !rows_form_oa1(m, &group, s) {
                continue;
            }
            for &i in &group {
                used[i] = true;
            }
            groups.push(group);
            if extend(m, s, used, groups) {
                return true;
            }
            let group = groups.pop().unwrap();
            for i in group {
                used[i] = false;
            }
        }
        false
    }

    let mut used = vec![false; n];
    let mut groups = Vec::new();
    extend(m, s, &mut used, &mut groups).then_some(groups)
}

/// Whether the pair `(x, y)`, collapsed onto a `gx x gy` grid, puts the same
/// number of points in every cell.
pub fn grid_stratification(
    x: &[usize],
    y: &[usize],
    lx: usize,
    ly: usize,
    gx: usize,
    gy: usize,
) -> Result<bool> {
    if gx == 0 || !lx.is_multiple_of(gx) {
        return Err(Error::NonDivisibleGrid {
            cells: gx,
            levels: lx,
        });
    }
    if gy == 0 || !ly.is_multiple_of(gy) {
        return Err(Error::NonDivisibleGrid {
            cells: gy,
            levels: ly,
        });
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch("columns differ in length".into()));
    }
    let n = x.len();
    if !n.is_multiple_of(gx * gy) {
        return Ok(false);
    }
    let (wx, wy) = (lx / gx, ly / gy);
    let mut counts = vec![0; gx * gy];
    for (&a, &b) in x.iter().zip(y) {
        if a >= lx || b >= ly {
            return Ok(false);
        }
        counts[(a / wx) * gy + b / wy] += 1;
    }
    let target = n / (gx * gy);
    Ok(counts.iter().all(|&c| c == target))
}
