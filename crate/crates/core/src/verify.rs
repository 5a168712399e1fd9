//! Independent checks of the coupling property.
//!
//! Three equivalent characterizations are implemented separately so they can
//! referee each other:
//!
//! * [`check_omega_coupled`] slices `D2` by every level combination of up to
//!   `omega` qualitative factors and checks each slice is a Latin hypercube
//!   after collapsing by `s^l`.
//! * [`check_dcd_theorem1`] tests the column conditions: every `(z_i, d~_k)`
//!   must be a full `s x (n/s)` factorial and every `(z_i, z_j, d~~_k)` a
//!   full `s x s x (n/s^2)` factorial.
//! * [`theorem3_witness`] recovers `B = floor(D2/s^2)` and
//!   `C = floor(D2/s) mod s` and checks the triple conditions on them.
//!
//! [`check_croa_partition`] checks the structural requirement on `D1` alone.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::array::{
    croa_partition_search, grid_stratification, is_croa, is_full_factorial, is_latin_hypercube,
    is_orthogonal_array, IntegerMatrix, PARTITION_SEARCH_MAX_RUNS,
};
use crate::design::CoupledDesign;
use crate::error::{Error, Result};

/// One slice of `D2` that fails to be a Latin hypercube: the qualitative
/// factors fixed, their levels, and the offending quantitative column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFailure {
    pub factors: Vec<usize>,
    pub levels: Vec<usize>,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaReport {
    pub omega: usize,
    pub d2_latin: bool,
    pub failures: Vec<CellFailure>,
}

impl OmegaReport {
    pub fn pass(&self) -> bool {
        self.d2_latin && self.failures.is_empty()
    }
}

/// Direct check of the `omega`-way coupling definition.
pub fn check_omega_coupled(d: &CoupledDesign, omega: usize) -> Result<OmegaReport> {
    let (n, s, q) = (d.n(), d.s(), d.q());
    if omega > q {
        return Err(Error::OmegaExceedsQ { omega, q });
    }
    let divisor = s.pow(omega as u32);
    if n % divisor != 0 {
        return Err(Error::RunSizeNotDivisible { n, divisor });
    }
    let d1 = d.d1().matrix();
    let d2 = d.d2().matrix();
    let mut failures = Vec::new();

    for l in 1..=omega {
        let width = s.pow(l as u32);
        let slice_len = n / width;
        for factors in (0..q).combinations(l) {
            let mut cells: Vec<Vec<usize>> = vec![Vec::new(); width];
            for i in 0..n {
                let idx = factors.iter().fold(0, |acc, &j| acc * s + d1.get(i, j));
                cells[idx].push(i);
            }
            for (idx, rows) in cells.iter().enumerate() {
                for k in 0..d.p() {
                    let mut seen = vec![false; slice_len];
                    let ok = rows.len() == slice_len
                        && rows.iter().all(|&i| {
                            let v = d2.get(i, k) / width;
                            v < slice_len && !std::mem::replace(&mut seen[v], true)
                        });
                    if !ok {
                        let levels = factors
                            .iter()
                            .enumerate()
                            .map(|(pos, _)| idx / s.pow((l - 1 - pos) as u32) % s)
                            .collect();
                        failures.push(CellFailure {
                            factors: factors.clone(),
                            levels,
                            column: k,
                        });
                    }
                }
            }
        }
    }
    Ok(OmegaReport {
        omega,
        d2_latin: is_latin_hypercube(d2),
        failures,
    })
}

/// Offending index tuples for the two column conditions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `(i, k)` with `(z_i, d~_k)` not a full factorial.
    pub condition_a: Vec<(usize, usize)>,
    /// `(i, j, k)` with `(z_i, z_j, d~~_k)` not a full factorial.
    pub condition_b: Vec<(usize, usize, usize)>,
}

impl ConditionReport {
    pub fn pass_a(&self) -> bool {
        self.condition_a.is_empty()
    }

    pub fn pass_b(&self) -> bool {
        self.condition_b.is_empty()
    }

    pub fn pass(&self) -> bool {
        self.pass_a() && self.pass_b()
    }
}

/// Column conditions (a) and (b) for a doubly coupled design.
pub fn check_dcd_theorem1(d: &CoupledDesign) -> ConditionReport {
    let (n, s) = (d.n(), d.s());
    let z = d.d1().matrix().columns();
    let tilde = d.d2_collapsed().columns();
    let tilde2 = d.d2_collapsed_twice().columns();
    let mut report = ConditionReport::default();

    for (i, zi) in z.iter().enumerate() {
        for (k, dk) in tilde.iter().enumerate() {
            if n % s != 0 || !is_full_factorial(&[zi, dk], &[s, n / s]) {
                report.condition_a.push((i, k));
            }
        }
    }
    for (i, j) in (0..z.len()).tuple_combinations() {
        for (k, dk) in tilde2.iter().enumerate() {
            if n % (s * s) != 0 || !is_full_factorial(&[&z[i], &z[j], dk], &[s, s, n / (s * s)]) {
                report.condition_b.push((i, j, k));
            }
        }
    }
    report
}

/// Whether consecutive `s^2`-row blocks of `d1` are each a CROA(s^2, q, s, 2).
pub fn check_croa_partition(d1: &IntegerMatrix, s: usize) -> bool {
    let n = d1.n_rows();
    let block = s * s;
    if block == 0 || !n.is_multiple_of(block) {
        return false;
    }
    let rows = d1.to_rows();
    rows.chunks(block)
        .all(|chunk| IntegerMatrix::from_rows(chunk).is_ok_and(|m| is_croa(&m, s)))
}

/// Partition check that does not depend on the stored row order: consecutive
/// blocks first, then the order induced by the first quantitative column,
/// then (for small `n`) exhaustive search over blocks.
pub fn has_croa_partition(d: &CoupledDesign) -> bool {
    let d1 = d.d1().matrix();
    let s = d.s();
    if check_croa_partition(d1, s) {
        return true;
    }
    if d.p() > 0 && check_croa_partition(&d1.permute_rows(&d.croa_row_order()), s) {
        return true;
    }
    let n = d1.n_rows();
    n <= PARTITION_SEARCH_MAX_RUNS && n.is_multiple_of(s * s) && search_croa_blocks(d1, s)
}

fn search_croa_blocks(d1: &IntegerMatrix, s: usize) -> bool {
    fn extend(d1: &IntegerMatrix, s: usize, used: &mut [bool]) -> bool {
        let Some(first) = used.iter().position(|u| !u) else {
            return true;
        };
        let rest: Vec<usize> = (first + 1..used.len()).filter(|&i| !used[i]).collect();
        for combo in rest.into_iter().combinations(s * s - 1) {
            let mut members = vec![first];
            members.extend(combo);
            let block = d1.permute_rows(&members);
            if croa_partition_search(&block, s).is_none() {
                continue;
            }
            members.iter().for_each(|&i| used[i] = true);
            if extend(d1, s, used) {
                return true;
            }
            members.iter().for_each(|&i| used[i] = false);
        }
        false
    }
    let mut used = vec![false; d1.n_rows()];
    extend(d1, s, &mut used)
}

/// Every column of `m` takes each of `levels` values equally often.
fn balanced(m: &IntegerMatrix, levels: usize) -> bool {
    m.n_cols() == 0 || is_orthogonal_array(m, &vec![levels; m.n_cols()], 1).unwrap_or(false)
}

/// Recovered `(B, C)` with the verdicts of the triple conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessReport {
    pub b: IntegerMatrix,
    pub c: IntegerMatrix,
    pub b_is_oa: bool,
    pub c_is_oa: bool,
    /// `(i, j, k)` with `(z_i, z_j, b_k)` not a full factorial.
    pub zzb_failures: Vec<(usize, usize, usize)>,
    /// `(i, k)` with `(z_i, c_k, b_k)` not a full factorial.
    pub zcb_failures: Vec<(usize, usize)>,
}

impl WitnessReport {
    pub fn pass(&self) -> bool {
        self.b_is_oa && self.c_is_oa && self.zzb_failures.is_empty() && self.zcb_failures.is_empty()
    }
}

/// Decomposes `floor(D2/s) = s B + C` and checks the witness conditions.
pub fn theorem3_witness(d: &CoupledDesign) -> WitnessReport {
    let (n, s, p) = (d.n(), d.s(), d.p());
    let tilde = d.d2_collapsed();
    let b_data = tilde.data().iter().map(|x| x / s).collect();
    let c_data = tilde.data().iter().map(|x| x % s).collect();
    let b = IntegerMatrix::new(n, p, b_data).expect("shape");
    let c = IntegerMatrix::new(n, p, c_data).expect("shape");

    let divisible = n % (s * s) == 0;
    let b_levels = n / (s * s);
    let b_is_oa = divisible && balanced(&b, b_levels);
    let c_is_oa = balanced(&c, s);

    let z = d.d1().matrix().columns();
    let bc = b.columns();
    let cc = c.columns();
    let mut zzb_failures = Vec::new();
    let mut zcb_failures = Vec::new();
    for (i, j) in (0..z.len()).tuple_combinations() {
        for (k, bk) in bc.iter().enumerate() {
            if !divisible || !is_full_factorial(&[&z[i], &z[j], bk], &[s, s, b_levels]) {
                zzb_failures.push((i, j, k));
            }
        }
    }
    for (i, zi) in z.iter().enumerate() {
        for k in 0..p {
            if !divisible || !is_full_factorial(&[zi, &cc[k], &bc[k]], &[s, s, b_levels]) {
                zcb_failures.push((i, k));
            }
        }
    }
    WitnessReport {
        b,
        c,
        b_is_oa,
        c_is_oa,
        zzb_failures,
        zcb_failures,
    }
}

/// No doubly coupled design has more than `s` qualitative factors.
pub fn max_qualitative_factors(s: usize) -> usize {
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratificationEntry {
    pub i: usize,
    pub j: usize,
    pub gx: usize,
    pub gy: usize,
    pub pass: bool,
}

/// Grids worth reporting for an `n`-run design with `s`-level qualitative
/// factors, skipping any that do not divide `n`.
pub fn candidate_grids(n: usize, s: usize) -> Vec<(usize, usize)> {
    let blocks = n / (s * s).max(1);
    [
        (blocks, blocks),
        (s * s, s),
        (s, s * s),
        (s, s),
        (blocks, s),
        (s, blocks),
    ]
    .into_iter()
    .filter(|&(gx, gy)| {
        gx >= 2
            && gy >= 2
            && n.is_multiple_of(gx)
            && n.is_multiple_of(gy)
            && n.is_multiple_of(gx * gy)
    })
    .unique()
    .collect()
}

/// Grid stratification of every quantitative pair on the candidate grids.
pub fn stratification_report(d: &CoupledDesign) -> Vec<StratificationEntry> {
    let n = d.n();
    let cols = d.d2().matrix().columns();
    let grids = candidate_grids(n, d.s());
    let mut out = Vec::new();
    for (i, j) in (0..cols.len()).tuple_combinations() {
        for &(gx, gy) in &grids {
            let pass = grid_stratification(&cols[i], &cols[j], n, n, gx, gy).unwrap_or(false);
            out.push(StratificationEntry { i, j, gx, gy, pass });
        }
    }
    out
}

/// Looks up one grid verdict in a stratification report.
pub fn stratification_verdict(
    entries: &[StratificationEntry],
    i: usize,
    j: usize,
    gx: usize,
    gy: usize,
) -> Option<bool> {
    entries
        .iter()
        .find(|e| e.i == i && e.j == j && e.gx == gx && e.gy == gy)
        .map(|e| e.pass)
}

/// Aggregated verdicts for one design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n: usize,
    pub s: usize,
    pub q: usize,
    pub p: usize,
    pub omega_checked: usize,
    /// Strength of `D1`, looked for up to 3.
    pub d1_strength: usize,
    pub d2_latin: bool,
    pub omega_failures: Vec<CellFailure>,
    pub condition_a: Vec<(usize, usize)>,
    pub condition_b: Vec<(usize, usize, usize)>,
    pub croa_partition: bool,
    /// Whether a stored witness satisfies `floor(D2/s) = s B + C` with
    /// `B`, `C` balanced; `None` without a witness.
    pub witness_check: Option<bool>,
    /// Informational; does not enter [`VerificationReport::pass`].
    pub stratification: Vec<StratificationEntry>,
}

impl VerificationReport {
    /// Pass at the checked `omega`: condition (a) is required from
    /// `omega >= 1`, condition (b) and the CROA partition from `omega >= 2`.
    pub fn pass(&self) -> bool {
        let w = self.omega_checked;
        self.d1_strength >= 2.min(self.q)
            && self.d2_latin
            && self.omega_failures.is_empty()
            && (w < 1 || self.condition_a.is_empty())
            && (w < 2 || (self.condition_b.is_empty() && self.croa_partition))
            && self.witness_check != Some(false)
    }
}

fn stored_witness_ok(d: &CoupledDesign) -> Option<bool> {
    let w = d.witness()?;
    let (n, s) = (d.n(), d.s());
    let identity =
        w.b.scaled_add(s, &w.c)
            .is_ok_and(|sum| sum == d.d2_collapsed());
    let ok = n % (s * s) == 0 && balanced(&w.b, n / (s * s)) && balanced(&w.c, s);
    Some(identity && ok)
}

/// Runs every check on `d` at coupling order `omega`.
pub fn verify_design(d: &CoupledDesign, omega: usize) -> Result<VerificationReport> {
    let omega_report = check_omega_coupled(d, omega)?;
    let conditions = check_dcd_theorem1(d);
    Ok(VerificationReport {
        n: d.n(),
        s: d.s(),
        q: d.q(),
        p: d.p(),
        omega_checked: omega,
        d1_strength: d.d1().strength(),
        d2_latin: omega_report.d2_latin,
        omega_failures: omega_report.failures,
        condition_a: conditions.condition_a,
        condition_b: conditions.condition_b,
        croa_partition: has_croa_partition(d),
        witness_check: stored_witness_ok(d),
        stratification: stratification_report(d),
    })
}

/// The coupling order a design of `q` qualitative factors is checked at.
pub fn default_omega(q: usize) -> usize {
    q.min(2)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "design: n={} s={} q={} p={} (omega={})",
            self.n, self.s, self.q, self.p, self.omega_checked
        )?;
        writeln!(f, "D1 strength: {}", self.d1_strength)?;
        writeln!(f, "D2 Latin hypercube: {}", verdict(self.d2_latin))?;
        writeln!(
            f,
            "{}-way coupling: {} ({} failing slices)",
            self.omega_checked,
            verdict(self.omega_failures.is_empty()),
            self.omega_failures.len()
        )?;
        for c in &self.omega_failures {
            let fixed = c
                .factors
                .iter()
                .zip(&c.levels)
                .map(|(z, l)| format!("z{}={}", z + 1, l))
                .join(",");
            writeln!(f, "  slice {fixed}: d{} not Latin", c.column + 1)?;
        }
        writeln!(f, "condition (a): {}", verdict(self.condition_a.is_empty()))?;
        for (i, k) in &self.condition_a {
            writeln!(f, "  (z{}, d~{}) not a full factorial", i + 1, k + 1)?;
        }
        writeln!(f, "condition (b): {}", verdict(self.condition_b.is_empty()))?;
        for (i, j, k) in &self.condition_b {
            writeln!(
                f,
                "  (z{}, z{}, d~~{}) not a full factorial",
                i + 1,
                j + 1,
                k + 1
            )?;
        }
        writeln!(f, "CROA partition of D1: {}", verdict(self.croa_partition))?;
        if let Some(w) = self.witness_check {
            writeln!(f, "stored witness: {}", verdict(w))?;
        }
        if !self.stratification.is_empty() {
            let grids: Vec<(usize, usize)> = self
                .stratification
                .iter()
                .map(|e| (e.gx, e.gy))
                .unique()
                .collect();
            for (gx, gy) in grids {
                let (ok, total) = self
                    .stratification
                    .iter()
                    .filter(|e| e.gx == gx && e.gy == gy)
                    .fold((0, 0), |(ok, total), e| (ok + e.pass as usize, total + 1));
                writeln!(f, "stratification {gx}x{gy}: {ok}/{total} pairs")?;
            }
        }
        write!(f, "overall: {}", verdict(self.pass()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_d1() -> IntegerMatrix {
        IntegerMatrix::from_columns(
            8,
            &[vec![0, 1, 0, 1, 0, 1, 0, 1], vec![0, 1, 1, 0, 0, 1, 1, 0]],
        )
        .unwrap()
    }

    fn design(d2_cols: &[Vec<usize>]) -> CoupledDesign {
        CoupledDesign::new(
            table1_d1(),
            IntegerMatrix::from_columns(8, d2_cols).unwrap(),
            2,
        )
        .unwrap()
    }

    fn table1() -> CoupledDesign {
        design(&[
            vec![1, 0, 6, 7, 4, 5, 3, 2],
            vec![0, 4, 2, 6, 5, 1, 7, 3],
            vec![0, 4, 6, 2, 5, 1, 3, 7],
            vec![1, 0, 2, 3, 4, 5, 6, 7],
        ])
    }

    #[test]
    fn table1_is_doubly_coupled() {
        let d = table1();
        assert!(check_omega_coupled(&d, 2).unwrap().pass());
        assert!(check_dcd_theorem1(&d).pass());
        assert!(check_croa_partition(d.d1().matrix(), 2));
        let w = theorem3_witness(&d);
        assert!(w.pass());
        assert_eq!(w.b.column(0), vec![0, 0, 1, 1, 1, 1, 0, 0]);
        for k in 0..4 {
            assert_eq!(w.c.column(k), vec![0, 0, 1, 1, 0, 0, 1, 1]);
        }
        let report = verify_design(&d, 2).unwrap();
        assert!(report.pass(), "{report}");
    }

    #[test]
    fn counterexamples_split_the_conditions() {
        let da = design(&[vec![1, 0, 6, 7, 3, 2, 4, 5], vec![0, 4, 2, 6, 5, 1, 7, 3]]);
        let r = check_dcd_theorem1(&da);
        assert!(r.pass_a() && !r.pass_b());
        let w = theorem3_witness(&da);
        assert!(!w.pass() && !w.zzb_failures.is_empty());

        let db = design(&[vec![6, 0, 1, 4, 3, 5, 7, 2], vec![2, 4, 0, 5, 7, 1, 6, 3]]);
        let r = check_dcd_theorem1(&db);
        assert!(!r.pass_a() && r.pass_b());
        assert!(!check_omega_coupled(&db, 2).unwrap().pass());
        assert!(!check_omega_coupled(&db, 1).unwrap().pass());
        assert!(check_omega_coupled(&da, 1).unwrap().pass());
    }

    #[test]
    fn omega_zero_only_needs_latin_d2() {
        let da = design(&[vec![1, 0, 6, 7, 3, 2, 4, 5]]);
        assert!(check_omega_coupled(&da, 0).unwrap().pass());
    }

    #[test]
    fn omega_argument_errors() {
        let d = table1();
        assert!(matches!(
            check_omega_coupled(&d, 3),
            Err(Error::OmegaExceedsQ { .. })
        ));
        let d1 = IntegerMatrix::from_columns(6, &[vec![0, 1, 0, 1, 0, 1], vec![0, 1, 1, 0, 0, 1]])
            .unwrap();
        let d2 = IntegerMatrix::from_columns(6, &[vec![0, 1, 2, 3, 4, 5]]).unwrap();
        let d = CoupledDesign::new(d1, d2, 2).unwrap();
        assert!(matches!(
            check_omega_coupled(&d, 2),
            Err(Error::RunSizeNotDivisible { .. })
        ));
    }

    #[test]
    fn swapped_rows_break_the_consecutive_partition() {
        let mut rows = table1_d1().to_rows();
        rows.swap(1, 4);
        let m = IntegerMatrix::from_rows(&rows).unwrap();
        // independent brute force: each 4-row block must have every column
        // pair once and every consecutive 2-row half balanced
        let brute = rows.chunks(4).all(|b| {
            let mut pairs: Vec<_> = b.iter().map(|r| (r[0], r[1])).collect();
            pairs.sort();
            pairs.dedup();
            pairs.len() == 4
                && b.chunks(2)
                    .all(|h| h[0][0] != h[1][0] && h[0][1] != h[1][1])
        });
        assert!(!brute);
        assert!(!check_croa_partition(&m, 2));
    }

    #[test]
    fn stratification_of_table1() {
        let entries = stratification_report(&table1());
        assert_eq!(entries.iter().filter(|e| e.gx == 2 && e.gy == 2).count(), 6);
        assert!(entries
            .iter()
            .filter(|e| e.gx == 2 && e.gy == 2)
            .all(|e| e.pass));
        let single = design(&[vec![1, 0, 6, 7, 4, 5, 3, 2]]);
        assert!(stratification_report(&single).is_empty());
    }

    #[test]
    fn bound_on_qualitative_factors() {
        assert_eq!(max_qualitative_factors(2), 2);
        assert_eq!(max_qualitative_factors(3), 3);
    }

    #[test]
    fn order_independent_partition_check() {
        let d = table1();
        let order = [0, 4, 1, 5, 2, 6, 3, 7];
        let shuffled = d.permute_rows(&order).unwrap();
        assert!(has_croa_partition(&shuffled));
        assert!(verify_design(&shuffled, 2).unwrap().pass());
    }
}
