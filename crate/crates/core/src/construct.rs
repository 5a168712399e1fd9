//! Doubly coupled design constructions.
//!
//! Every construction produces the witness pair `(B, C)`, forms
//! `D~2 = s B + C`, expands it to a Latin hypercube with the plan's expansion
//! orders, and refuses to return a design that fails the column conditions.
//!
//! * [`construction1`] stacks `lambda` arrays OA(s^2, q+1, s, 2).
//! * [`construction2`] stacks `lambda` copies of one such array, with `B`
//!   free inside each row class.
//! * [`construction3`] splits one array `A` into `D1` and a leftover column
//!   `a*` that feeds `C`; `B` is supplied. [`case1_inputs`] and
//!   [`case2_inputs`] generate suitable `(A, B)`.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::array::{
    column_blocks, is_full_factorial, is_orthogonal_array, level_expand_with, IntegerMatrix,
    OrthogonalArray,
};
use crate::design::{CoupledDesign, PermutationPlan, Witness};
use crate::error::{Error, Result};
use crate::gf::GaloisField;
use crate::oa::{
    bush_oa, full_factorial, is_block_form, linear_column, normalize_block_form, LinearColumnSpec,
};
use crate::perm::Permutation;
use crate::verify::{check_croa_partition, check_dcd_theorem1};

fn check_perms(what: &str, perms: &[Permutation], count: usize, len: usize) -> Result<()> {
    if perms.len() != count || perms.iter().any(|p| p.len() != len) {
        return Err(Error::DimensionMismatch(format!(
            "plan needs {count} {what} permutations of length {len}"
        )));
    }
    Ok(())
}

fn block_form(a: &OrthogonalArray, s: usize) -> Result<IntegerMatrix> {
    if is_block_form(a.matrix(), s) {
        return Ok(a.matrix().clone());
    }
    log::warn!("reordering rows so the last column is in block form");
    Ok(normalize_block_form(a)?.into_matrix())
}

/// `(s, q)` of an OA(s^2, q+1, s, 2).
fn square_array_params(a: &OrthogonalArray) -> Result<(usize, usize)> {
    let n = a.runs();
    let s = a
        .symmetric_levels()
        .ok_or_else(|| Error::NotBlockForm("array has mixed levels".into()))?;
    if s * s != n {
        return Err(Error::NotSquareRunSize(n));
    }
    if a.factors() < 2 || !is_orthogonal_array(a.matrix(), a.levels(), 2)? {
        return Err(Error::NotBlockForm(format!(
            "expected an OA({n}, q+1, {s}, 2) with q >= 1"
        )));
    }
    Ok((s, a.factors() - 1))
}

/// Forms `s B + C`, expands it and certifies the result.
fn finish(
    d1: IntegerMatrix,
    b: IntegerMatrix,
    c: IntegerMatrix,
    s: usize,
    plan: &PermutationPlan,
) -> Result<CoupledDesign> {
    let n = d1.n_rows();
    let p = b.n_cols();
    let tilde = b.scaled_add(s, &c)?;
    let blocks = column_blocks(&tilde)
        .map_err(|e| Error::VerificationFailed(format!("s B + C is unbalanced: {e}")))?;
    if let Some(k) = blocks.iter().position(|&bl| bl != (n / s, s)) {
        return Err(Error::VerificationFailed(format!(
            "column {k} of s B + C does not take {} levels {s} times each",
            n / s
        )));
    }
    let mut plan = plan.clone();
    if plan.expansion.is_empty() {
        plan.expansion = PermutationPlan::identity_expansion(n, s, p);
    }
    let d2 = level_expand_with(&tilde, &plan.expansion)?.into_matrix();
    let design = CoupledDesign::new(d1, d2, s)?.with_witness(Witness { b, c, plan })?;
    let report = check_dcd_theorem1(&design);
    if !report.pass() {
        return Err(Error::VerificationFailed(format!(
            "condition failures: {:?} / {:?}",
            report.condition_a, report.condition_b
        )));
    }
    Ok(design)
}

/// Stacks `lambda` OA(s^2, q+1, s, 2) and assigns `B` by block and `C` by the
/// last column of each block.
///
/// Plan: `v` holds `p` permutations of `0..lambda`, `w` holds `p x lambda`
/// permutations of `0..s`. An empty `expansion` means identity expansion.
pub fn construction1(
    arrays: &[OrthogonalArray],
    p: usize,
    plan: &PermutationPlan,
) -> Result<CoupledDesign> {
    let lambda = arrays.len();
    let first = arrays
        .first()
        .ok_or_else(|| Error::DimensionMismatch("at least one array is required".into()))?;
    let (s, q) = square_array_params(first)?;
    for a in &arrays[1..] {
        if square_array_params(a)? != (s, q) {
            return Err(Error::DimensionMismatch(
                "all stacked arrays must share s and q".into(),
            ));
        }
    }
    check_perms("v", &plan.v, p, lambda)?;
    if plan.w.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "plan needs {p} rows of w"
        )));
    }
    for row in &plan.w {
        check_perms("w", row, lambda, s)?;
    }

    let blocks: Vec<IntegerMatrix> = arrays.iter().map(|a| block_form(a, s)).try_collect()?;
    let d1 = IntegerMatrix::vstack(&blocks)?.select_columns(&(0..q).collect_vec());
    let n = lambda * s * s;
    let mut b = IntegerMatrix::zeros(n, p);
    let mut c = IntegerMatrix::zeros(n, p);
    for k in 0..p {
        for i in 0..n {
            let (block, r) = (i / (s * s), i % (s * s));
            b.set(i, k, plan.v[k].apply(block));
            c.set(i, k, plan.w[k][block].apply(r / s));
        }
    }
    finish(d1, b, c, s, plan)
}

/// Reads the cell permutations of `B` for [`construction2`]: entry
/// `[i][k]` lists `B[i + j s^2, k]` for `j = 0..lambda`.
pub fn b_cells_from_matrix(
    b: &IntegerMatrix,
    s: usize,
    lambda: usize,
) -> Result<Vec<Vec<Permutation>>> {
    let cells = s * s;
    if b.n_rows() != lambda * cells {
        return Err(Error::DimensionMismatch(format!(
            "B has {} rows, expected {}",
            b.n_rows(),
            lambda * cells
        )));
    }
    (0..cells)
        .map(|i| {
            (0..b.n_cols())
                .map(|k| {
                    let image = (0..lambda).map(|j| b.get(i + j * cells, k)).collect();
                    Permutation::new(image).map_err(|_| Error::CellNotPermutation {
                        row: i,
                        col: k,
                        lambda,
                    })
                })
                .collect()
        })
        .collect()
}

/// `lambda` copies of one OA(s^2, q+1, s, 2).
///
/// Plan: `b_cells` is `s^2 x p` permutations of `0..lambda`, `w` holds one
/// permutation of `0..s` per quantitative column (only the first entry of
/// each row is read).
pub fn construction2(
    a1: &OrthogonalArray,
    lambda: usize,
    p: usize,
    plan: &PermutationPlan,
) -> Result<CoupledDesign> {
    let (s, q) = square_array_params(a1)?;
    if lambda == 0 {
        return Err(Error::InfeasibleParameters(
            "lambda must be at least 1".into(),
        ));
    }
    let cells = s * s;
    if plan.b_cells.len() != cells {
        return Err(Error::DimensionMismatch(format!(
            "plan needs {cells} rows of b_cells"
        )));
    }
    for row in &plan.b_cells {
        check_perms("b_cells", row, p, lambda)?;
    }
    if plan.w.len() != p || plan.w.iter().any(|row| row.is_empty() || row[0].len() != s) {
        return Err(Error::DimensionMismatch(format!(
            "plan needs {p} w permutations of length {s}"
        )));
    }

    let block = block_form(a1, s)?;
    let d1 = IntegerMatrix::vstack(&vec![block; lambda])?.select_columns(&(0..q).collect_vec());
    let n = lambda * cells;
    let mut b = IntegerMatrix::zeros(n, p);
    let mut c = IntegerMatrix::zeros(n, p);
    for k in 0..p {
        for i in 0..n {
            let r = i % cells;
            b.set(i, k, plan.b_cells[r][k].apply(i / cells));
            c.set(i, k, plan.w[k][0].apply(r / s));
        }
    }
    finish(d1, b, c, s, plan)
}

/// Uses the columns `select` of `a` as `D1` and the one remaining column as
/// the source of `C`; `b` must be an OA(n, p, n/s^2, 1) such that every
/// `(a_i, a_j, b_k)` is a full factorial.
///
/// Plan: `c_perms` holds one level permutation of `0..s` per column of `b`.
pub fn construction3(
    a: &OrthogonalArray,
    b: &IntegerMatrix,
    select: &[usize],
    plan: &PermutationPlan,
) -> Result<CoupledDesign> {
    let n = a.runs();
    let s = a
        .symmetric_levels()
        .ok_or_else(|| Error::DimensionMismatch("A must have symmetric levels".into()))?;
    let cols = a.factors();
    if b.n_rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "A has {n} rows, B has {}",
            b.n_rows()
        )));
    }
    if select.len() + 1 != cols || !select.iter().all_unique() || select.iter().any(|&j| j >= cols)
    {
        return Err(Error::DimensionMismatch(format!(
            "select must name {} distinct columns of A",
            cols.saturating_sub(1)
        )));
    }
    if !n.is_multiple_of(s * s) {
        return Err(Error::RunSizeNotDivisible { n, divisor: s * s });
    }
    let p = b.n_cols();
    check_perms("c_perms", &plan.c_perms, p, s)?;

    let b_levels = n / (s * s);
    let a_cols = a.matrix().columns();
    let b_cols = b.columns();
    for (i, j) in (0..cols).tuple_combinations() {
        for (k, bk) in b_cols.iter().enumerate() {
            if !is_full_factorial(&[&a_cols[i], &a_cols[j], bk], &[s, s, b_levels]) {
                return Err(Error::PreconditionFailed { i, j, k });
            }
        }
    }

    let star = (0..cols)
        .find(|j| !select.contains(j))
        .expect("one column left over");
    let d1 = a.matrix().select_columns(select);
    let mut c = IntegerMatrix::zeros(n, p);
    for k in 0..p {
        for (i, &x) in a_cols[star].iter().enumerate() {
            c.set(i, k, plan.c_perms[k].apply(x));
        }
    }
    finish(d1, b.clone(), c, s, plan)
}

/// Splits the columns of a strength-3 OA(s^3, m, s, 3) into `A` (`q+1`
/// columns) and `B` (the rest). Without an rng the first `q+1` columns go
/// to `A`; with one the split is uniform.
pub fn case1_inputs<R: Rng + ?Sized>(
    g: &OrthogonalArray,
    q: usize,
    rng: Option<&mut R>,
) -> Result<(OrthogonalArray, IntegerMatrix)> {
    let s = g
        .symmetric_levels()
        .ok_or_else(|| Error::DimensionMismatch("G must have symmetric levels".into()))?;
    let m = g.factors();
    if g.runs() != s * s * s || m < 3 || !is_orthogonal_array(g.matrix(), g.levels(), 3)? {
        return Err(Error::NotStrength3);
    }
    if q == 0 || q + 1 >= m {
        return Err(Error::InfeasibleParameters(format!(
            "q = {q} needs 1 <= q and q + 1 < m = {m}"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    if let Some(rng) = rng {
        order.shuffle(rng);
    }
    let mut a_cols = order[..=q].to_vec();
    let mut b_cols = order[q + 1..].to_vec();
    a_cols.sort_unstable();
    b_cols.sort_unstable();
    let a = OrthogonalArray::symmetric(g.matrix().select_columns(&a_cols), s, 2.min(q + 1))?;
    Ok((a, g.matrix().select_columns(&b_cols)))
}

/// Digit position of the `j`-th generator (1-based) in the full factorial
/// rows. The first two generators take the two least significant digits so
/// that the smallest case comes out in the familiar 8-run row order.
fn generator_digit(j: usize, u: usize) -> usize {
    (j - 1 + u - 2) % u
}

fn generator_spec(u: usize, terms: &[(usize, usize)]) -> Result<LinearColumnSpec> {
    let terms: Vec<(usize, usize)> = terms
        .iter()
        .map(|&(j, mu)| (generator_digit(j, u), mu))
        .collect();
    LinearColumnSpec::from_terms(u, &terms)
}

/// The arrays `R_1, ..., R_{u-2}`, each as `s^2` columns: `R_v` holds
/// `xi_1 + mu2 xi_2 + mu xi_{v+2}` (`mu2` outer, `mu != 0` inner), then
/// `xi_2 + mu xi_{v+2}`, then `xi_{v+2}`.
pub fn case2_r_arrays(field: &GaloisField, u: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    if u < 3 {
        return Err(Error::UTooSmall(u));
    }
    let s = field.order();
    (1..=u - 2)
        .map(|v| {
            let mut specs = Vec::with_capacity(s * s);
            for mu2 in 0..s {
                for mu in 1..s {
                    specs.push(generator_spec(u, &[(1, 1), (2, mu2), (v + 2, mu)])?);
                }
            }
            for mu in 1..s {
                specs.push(generator_spec(u, &[(2, 1), (v + 2, mu)])?);
            }
            specs.push(generator_spec(u, &[(v + 2, 1)])?);
            specs
                .iter()
                .map(|spec| linear_column(field, u, spec))
                .collect()
        })
        .collect()
}

/// `A = {xi_1 + mu2 xi_2} U {xi_2}` with `s + 1` columns and `B` with
/// `(u-2) s^2` columns at `s^(u-2)` levels, for `s^u` runs.
///
/// Column `t` of the `f`-th group of `B` is `sum_v r_{v,f} s^((u-3-v+t) mod (u-2))`
/// in integer arithmetic, so the group's `u-2` columns are digit rotations
/// of the same base-`s` number.
pub fn case2_inputs(field: &GaloisField, u: usize) -> Result<(OrthogonalArray, IntegerMatrix)> {
    let r = case2_r_arrays(field, u)?;
    let s = field.order();
    let n = full_factorial(s, u)?.runs();

    let mut a_cols = Vec::with_capacity(s + 1);
    for mu2 in 0..s {
        a_cols.push(linear_column(
            field,
            u,
            &generator_spec(u, &[(1, 1), (2, mu2)])?,
        )?);
    }
    a_cols.push(linear_column(field, u, &generator_spec(u, &[(2, 1)])?)?);
    let a = OrthogonalArray::symmetric(IntegerMatrix::from_columns(n, &a_cols)?, s, 2)?;

    let w = u - 2;
    let weight = |v: usize, t: usize| s.pow(((w - 1 - v + t) % w) as u32);
    let mut b_cols = Vec::with_capacity(w * s * s);
    for f in 0..s * s {
        for t in 0..w {
            b_cols.push(
                (0..n)
                    .map(|i| {
                        r.iter()
                            .enumerate()
                            .map(|(v, rv)| rv[f][i] * weight(v, t))
                            .sum()
                    })
                    .collect::<Vec<usize>>(),
            );
        }
    }
    Ok((a, IntegerMatrix::from_columns(n, &b_cols)?))
}

/// A parameterized construction whose only free choice is its
/// [`PermutationPlan`].
#[derive(Debug, Clone)]
pub enum Family {
    Stacked {
        arrays: Vec<OrthogonalArray>,
        p: usize,
    },
    Copies {
        array: OrthogonalArray,
        lambda: usize,
        p: usize,
    },
    /// `croa_order` reorders the rows of each output so consecutive `s^2`
    /// blocks of `D1` are completely resolvable.
    General {
        a: OrthogonalArray,
        b: IntegerMatrix,
        select: Vec<usize>,
        croa_order: bool,
    },
}

fn bush_block(s: usize, q: usize) -> Result<OrthogonalArray> {
    if q == 0 || q > s {
        return Err(Error::InfeasibleParameters(format!(
            "q={q} exceeds the qualitative-factor bound s={s}"
        )));
    }
    let bush = bush_oa(&GaloisField::new(s)?, 2)?;
    let mut cols: Vec<usize> = (0..q).collect();
    cols.push(s);
    bush.select_columns(&cols)
}

impl Family {
    /// Construction 1 input: `lambda` copies of a Bush OA(s^2, q+1, s, 2).
    pub fn stacked_bush(s: usize, lambda: usize, q: usize, p: usize) -> Result<Self> {
        let block = bush_block(s, q)?;
        if lambda == 0 {
            return Err(Error::InfeasibleParameters(
                "lambda must be at least 1".into(),
            ));
        }
        Ok(Self::Stacked {
            arrays: vec![block; lambda],
            p,
        })
    }

    pub fn copies_bush(s: usize, lambda: usize, q: usize, p: usize) -> Result<Self> {
        if lambda == 0 {
            return Err(Error::InfeasibleParameters(
                "lambda must be at least 1".into(),
            ));
        }
        Ok(Self::Copies {
            array: bush_block(s, q)?,
            lambda,
            p,
        })
    }

    /// Case 1 on `g` with the first `q` columns of `A` as `D1`.
    pub fn case1<R: Rng + ?Sized>(
        g: &OrthogonalArray,
        q: usize,
        rng: Option<&mut R>,
    ) -> Result<Self> {
        let (a, b) = case1_inputs(g, q, rng)?;
        Ok(Self::General {
            a,
            b,
            select: (0..q).collect(),
            croa_order: true,
        })
    }

    /// Case 2 over GF(s) with `s^u` runs. `D1` takes columns `1..=q` of `A`
    /// (default `q = s`), leaving `xi_1` as the source of `C`; for `q < s`
    /// the unused columns of `A` are dropped.
    pub fn case2(s: usize, u: usize, q: Option<usize>) -> Result<Self> {
        let q = q.unwrap_or(s);
        if q == 0 || q > s {
            return Err(Error::InfeasibleParameters(format!(
                "q={q} exceeds the qualitative-factor bound s={s}"
            )));
        }
        let (a, b) = case2_inputs(&GaloisField::new(s)?, u)?;
        let a = a.select_columns(&(0..=q).collect_vec())?;
        Ok(Self::General {
            a,
            b,
            select: (1..=q).collect(),
            croa_order: true,
        })
    }

    pub fn s(&self) -> usize {
        match self {
            Self::Stacked { arrays, .. } => arrays[0].symmetric_levels().unwrap_or(0),
            Self::Copies { array, .. } => array.symmetric_levels().unwrap_or(0),
            Self::General { a, .. } => a.symmetric_levels().unwrap_or(0),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Stacked { arrays, .. } => arrays.len() * arrays[0].runs(),
            Self::Copies { array, lambda, .. } => lambda * array.runs(),
            Self::General { a, .. } => a.runs(),
        }
    }

    pub fn q(&self) -> usize {
        match self {
            Self::Stacked { arrays, .. } => arrays[0].factors() - 1,
            Self::Copies { array, .. } => array.factors() - 1,
            Self::General { select, .. } => select.len(),
        }
    }

    pub fn p(&self) -> usize {
        match self {
            Self::Stacked { p, .. } | Self::Copies { p, .. } => *p,
            Self::General { b, .. } => b.n_cols(),
        }
    }

    pub fn lambda(&self) -> Option<usize> {
        match self {
            Self::Stacked { arrays, .. } => Some(arrays.len()),
            Self::Copies { lambda, .. } => Some(*lambda),
            Self::General { .. } => None,
        }
    }

    pub fn sample_plan<R: Rng + ?Sized>(&self, rng: &mut R) -> PermutationPlan {
        let (s, p) = (self.s(), self.p());
        match self {
            Self::Stacked { arrays, .. } => {
                PermutationPlan::sample_construction1(s, arrays.len(), p, rng)
            }
            Self::Copies { lambda, .. } => {
                PermutationPlan::sample_construction2(s, *lambda, p, rng)
            }
            Self::General { .. } => PermutationPlan::sample_construction3(s, self.n(), p, rng),
        }
    }

    pub fn build(&self, plan: &PermutationPlan) -> Result<CoupledDesign> {
        match self {
            Self::Stacked { arrays, p } => construction1(arrays, *p, plan),
            Self::Copies { array, lambda, p } => construction2(array, *lambda, *p, plan),
            Self::General {
                a,
                b,
                select,
                croa_order,
            } => {
                let d = construction3(a, b, select, plan)?;
                if *croa_order && !check_croa_partition(d.d1().matrix(), d.s()) {
                    d.permute_rows(&d.croa_row_order())
                } else {
                    Ok(d)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{grid_stratification, level_collapse};
    use crate::design::seeded_rng;
    use crate::reference;
    use crate::verify::{check_omega_coupled, theorem3_witness, verify_design};
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn oa(m: IntegerMatrix, s: usize) -> OrthogonalArray {
        OrthogonalArray::symmetric(m, s, 2).unwrap()
    }

    pub(crate) fn stack_plan() -> PermutationPlan {
        PermutationPlan {
            v: reference::DCD27_STACK_V.iter().map(|v| perm(v)).collect(),
            w: reference::DCD27_STACK_W
                .iter()
                .map(|row| row.iter().map(|w| perm(w)).collect())
                .collect(),
            ..PermutationPlan::default()
        }
    }

    #[test]
    fn stacked_reference_design() {
        let arrays = reference::dcd27_stack_arrays().map(|m| oa(m, 3));
        let d = construction1(&arrays, 3, &stack_plan()).unwrap();
        let w = d.witness().unwrap();
        assert_eq!(w.b, reference::dcd27_stack_b());
        assert_eq!(w.c, reference::dcd27_stack_c());
        assert_eq!(
            d.d2_collapsed(),
            level_collapse(&reference::dcd27_stack_d2(), 3)
        );
        assert_eq!(d.d1().matrix(), &reference::dcd27_stack_d1());
        assert!(check_croa_partition(d.d1().matrix(), 3));
        assert!(verify_design(&d, 2).unwrap().pass());
    }

    #[test]
    fn copies_reference_design() {
        let a1 = oa(reference::dcd27_stack_arrays()[0].clone(), 3);
        let b_cells = b_cells_from_matrix(&reference::dcd27_copies_b(), 3, 3).unwrap();
        let plan = PermutationPlan {
            b_cells,
            w: reference::DCD27_COPIES_W
                .iter()
                .map(|w| vec![perm(w)])
                .collect(),
            ..PermutationPlan::default()
        };
        let d = construction2(&a1, 3, 3, &plan).unwrap();
        assert_eq!(d.witness().unwrap().b, reference::dcd27_copies_b());
        assert_eq!(
            d.d2_collapsed(),
            level_collapse(&reference::dcd27_copies_d2(), 3)
        );
        assert!(verify_design(&d, 2).unwrap().pass());
    }

    #[test]
    fn cell_permutation_errors_name_the_cell() {
        let mut b = reference::dcd27_copies_b();
        b.set(9 + 4, 1, b.get(4, 1));
        match b_cells_from_matrix(&b, 3, 3) {
            Err(Error::CellNotPermutation {
                row: 4,
                col: 1,
                lambda: 3,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_block_degenerates() {
        let block = bush_block(2, 2).unwrap();
        let plan = PermutationPlan {
            v: vec![perm(&[0])],
            w: vec![vec![perm(&[1, 0])]],
            ..Default::default()
        };
        let d = construction1(std::slice::from_ref(&block), 1, &plan).unwrap();
        assert_eq!(d.d2_collapsed().column(0), vec![1, 1, 0, 0]);

        let plan = PermutationPlan {
            b_cells: vec![vec![perm(&[0])]; 4],
            w: vec![vec![perm(&[0, 1])]],
            ..Default::default()
        };
        let d = construction2(&block, 1, 1, &plan).unwrap();
        assert_eq!(d.witness().unwrap().b.column(0), vec![0; 4]);
        assert_eq!(d.d2_collapsed().column(0), vec![0, 0, 1, 1]);
    }

    #[test]
    fn non_block_form_input_is_normalized() {
        let block = bush_block(3, 2).unwrap();
        let shuffled = block.matrix().permute_rows(&[8, 0, 4, 2, 6, 1, 3, 7, 5]);
        let arrays = [oa(shuffled, 3), block];
        let plan = PermutationPlan::sample_construction1(3, 2, 2, &mut seeded_rng(1, 0));
        assert!(verify_design(&construction1(&arrays, 2, &plan).unwrap(), 2)
            .unwrap()
            .pass());
    }

    #[test]
    fn case2_smallest_matches_reference_columns() {
        let (a, b) = case2_inputs(&GaloisField::new(2).unwrap(), 3).unwrap();
        let ra = reference::dcd8_general_a();
        let rb = reference::dcd8_general_b();
        assert_eq!(a.matrix(), &ra.select_columns(&[0, 2, 1]));
        assert_eq!(b, rb.select_columns(&[0, 2, 1, 3]));

        let plan = PermutationPlan {
            c_perms: vec![Permutation::identity(2); 4],
            ..Default::default()
        };
        let d = construction3(&a, &b, &[2, 1], &plan).unwrap();
        assert_eq!(d.d2_collapsed().column(0), vec![0, 0, 3, 3, 2, 2, 1, 1]);
        assert_eq!(d.d1().matrix(), &reference::dcd8_d1());
    }

    #[test]
    fn every_level_permutation_of_the_leftover_column() {
        let (a, b) = case2_inputs(&GaloisField::new(2).unwrap(), 3).unwrap();
        let perms = Permutation::all(2);
        for choice in (0..4).map(|_| perms.iter()).multi_cartesian_product() {
            let plan = PermutationPlan {
                c_perms: choice.into_iter().cloned().collect(),
                ..Default::default()
            };
            let d = construction3(&a, &b, &[1, 2], &plan).unwrap();
            assert!(check_omega_coupled(&d, 2).unwrap().pass());
        }
    }

    #[test]
    fn empty_quantitative_part() {
        let (a, _) = case2_inputs(&GaloisField::new(2).unwrap(), 3).unwrap();
        let d = construction3(
            &a,
            &IntegerMatrix::zeros(8, 0),
            &[1, 2],
            &PermutationPlan::default(),
        )
        .unwrap();
        assert_eq!(d.p(), 0);
        let r = verify_design(&d, 2).unwrap();
        assert!(r.pass(), "{r}");
    }

    #[test]
    fn precondition_failure_names_triple() {
        let (a, _) = case2_inputs(&GaloisField::new(2).unwrap(), 3).unwrap();
        // a column of A repeated as B cannot be independent of it
        let b = IntegerMatrix::from_columns(8, &[a.matrix().column(1)]).unwrap();
        let plan = PermutationPlan {
            c_perms: vec![Permutation::identity(2)],
            ..Default::default()
        };
        assert!(matches!(
            construction3(&a, &b, &[1, 2], &plan),
            Err(Error::PreconditionFailed { i: 0, j: 1, k: 0 })
        ));
    }

    #[test]
    fn case1_every_split() {
        let g = bush_oa(&GaloisField::new(3).unwrap(), 3).unwrap();
        for a_cols in (0..4).combinations(2) {
            let b_cols: Vec<usize> = (0..4).filter(|j| !a_cols.contains(j)).collect();
            let a = OrthogonalArray::symmetric(g.matrix().select_columns(&a_cols), 3, 2).unwrap();
            let b = g.matrix().select_columns(&b_cols);
            let plan = PermutationPlan::sample_construction3(3, 27, 2, &mut seeded_rng(5, 0));
            let d = construction3(&a, &b, &[0], &plan).unwrap();
            assert!(verify_design(&d, 1).unwrap().pass());
            // collapsing twice leaves a strength-2 pair of 3-level columns
            let tt = d.d2_collapsed_twice();
            assert!(is_orthogonal_array(&tt, &[3, 3], 2).unwrap());
            let tilde = d.d2_collapsed();
            for (gx, gy) in [(3, 9), (9, 3)] {
                assert!(
                    grid_stratification(&tilde.column(0), &tilde.column(1), 9, 9, gx, gy).unwrap()
                );
            }
        }
    }

    #[test]
    fn case1_rejects_weak_arrays() {
        let g = bush_oa(&GaloisField::new(3).unwrap(), 2).unwrap();
        assert!(matches!(
            case1_inputs::<rand_chacha::ChaCha8Rng>(&g, 1, None),
            Err(Error::NotStrength3)
        ));
        let g = bush_oa(&GaloisField::new(3).unwrap(), 3).unwrap();
        assert!(case1_inputs::<rand_chacha::ChaCha8Rng>(&g, 3, None).is_err());
        let (a, b) = case1_inputs::<rand_chacha::ChaCha8Rng>(&g, 2, None).unwrap();
        assert_eq!((a.factors(), b.n_cols()), (3, 1));
    }

    fn generators_full_factorial(cols: &[&Vec<usize>], s: usize) -> bool {
        let slices: Vec<&[usize]> = cols.iter().map(|c| c.as_slice()).collect();
        is_full_factorial(&slices, &vec![s; cols.len()])
    }

    #[test]
    fn case2_generator_factorials() {
        for (s, u) in [(2, 3), (2, 4), (3, 3), (3, 4)] {
            let field = GaloisField::new(s).unwrap();
            let r = case2_r_arrays(&field, u).unwrap();
            let (a, b) = case2_inputs(&field, u).unwrap();
            let a_cols = a.matrix().columns();
            assert_eq!(b.n_cols(), (u - 2) * s * s);
            assert!(is_orthogonal_array(&b, &vec![s.pow(u as u32 - 2); b.n_cols()], 1).unwrap());
            for f in 0..s * s {
                let group: Vec<&Vec<usize>> = (0..u - 2).map(|v| &r[v][f]).collect();
                for (i, j) in (0..=s).tuple_combinations() {
                    let mut cols = vec![&a_cols[i], &a_cols[j]];
                    cols.extend(group.iter().copied());
                    assert!(
                        generators_full_factorial(&cols, s),
                        "s={s} u={u} f={f} i={i} j={j}"
                    );
                }
                for l in (0..s * s).filter(|&l| l != f) {
                    for (v, rv) in r.iter().enumerate() {
                        let mut cols = group.clone();
                        cols.push(&rv[l]);
                        assert!(
                            generators_full_factorial(&cols, s),
                            "s={s} u={u} f={f} l={l} v={v}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn case2_reaches_the_factor_bound() {
        for s in [2, 3, 4, 5] {
            let family = Family::case2(s, 3, None).unwrap();
            let d = family
                .build(&family.sample_plan(&mut seeded_rng(s as u64, 0)))
                .unwrap();
            assert_eq!(d.q(), s);
            assert!(check_croa_partition(d.d1().matrix(), s));
            assert!(verify_design(&d, 2).unwrap().pass());
        }
        assert!(Family::case2(3, 3, Some(4)).is_err());
    }

    #[test]
    fn stacked_enumeration_counts() {
        let block = bush_block(2, 2).unwrap();
        let perms = Permutation::all(2);
        let mut tilde = HashSet::new();
        let mut expanded = HashSet::new();
        for v in Permutation::all(2) {
            for w in perms.iter().cartesian_product(perms.iter()) {
                let base = PermutationPlan {
                    v: vec![v.clone()],
                    w: vec![vec![w.0.clone(), w.1.clone()]],
                    ..Default::default()
                };
                for e in (0..4).map(|_| perms.iter()).multi_cartesian_product() {
                    let plan = PermutationPlan {
                        expansion: vec![e.into_iter().cloned().collect()],
                        ..base.clone()
                    };
                    let d = construction1(&[block.clone(), block.clone()], 1, &plan).unwrap();
                    tilde.insert(d.d2_collapsed().column(0));
                    expanded.insert(d.d2().matrix().column(0));
                }
            }
        }
        assert_eq!(tilde.len(), 8);
        assert_eq!(expanded.len(), 128);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn random_stacked_plans_verify(seed in any::<u64>()) {
            let family = Family::stacked_bush(2, 2, 2, 4).unwrap();
            let d = family.build(&family.sample_plan(&mut seeded_rng(seed, 0))).unwrap();
            prop_assert!(check_omega_coupled(&d, 2).unwrap().pass());
            prop_assert!(theorem3_witness(&d).pass());
            prop_assert_eq!(d.witness().unwrap().b.scaled_add(2, &d.witness().unwrap().c).unwrap(), d.d2_collapsed());
        }

        #[test]
        fn random_copies_plans_verify(seed in any::<u64>()) {
            let family = Family::copies_bush(3, 2, 3, 3).unwrap();
            let d = family.build(&family.sample_plan(&mut seeded_rng(seed, 0))).unwrap();
            prop_assert!(check_omega_coupled(&d, 2).unwrap().pass());
            prop_assert!(check_croa_partition(d.d1().matrix(), 3));
        }

        #[test]
        fn random_general_plans_verify(seed in any::<u64>(), u in 3usize..5) {
            let family = Family::case2(2, u, None).unwrap();
            let d = family.build(&family.sample_plan(&mut seeded_rng(seed, 0))).unwrap();
            prop_assert!(check_omega_coupled(&d, 2).unwrap().pass());
            prop_assert!(check_croa_partition(d.d1().matrix(), 2));
        }
    }
}
