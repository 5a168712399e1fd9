//! Orthogonal-array raw material: full factorials, Bush arrays, linear
//! columns over GF(s), block-form normalization and the OA text format.
//!
//! Text format: the first non-comment line is `n m s t`, or
//! `n m s1,s2,...,sm t` for mixed levels, followed by `n` rows of `m`
//! whitespace-separated integers. `#` starts a comment.

use std::fs;
use std::path::Path;

use itertools::Itertools;

use crate::array::{is_orthogonal_array, strength, IntegerMatrix, OrthogonalArray};
use crate::error::{Error, Result};
use crate::gf::GaloisField;

pub const MAX_RUNS: usize = 10_000_000;

fn checked_pow(s: usize, u: usize) -> Result<usize> {
    let mut n: usize = 1;
    for _ in 0..u {
        n = n
            .checked_mul(s)
            .filter(|&n| n <= MAX_RUNS)
            .ok_or_else(|| Error::TooLarge(format!("{s}^{u} runs exceeds {MAX_RUNS}")))?;
    }
    Ok(n)
}

/// Base-`s` digits of `r`, most significant first.
fn digits(mut r: usize, s: usize, u: usize) -> Vec<usize> {
    let mut out = vec![0; u];
    for d in out.iter_mut().rev() {
        *d = r % s;
        r /= s;
    }
    out
}

/// The `s^u x u` full factorial; row `r` lists the base-`s` digits of `r`.
pub fn full_factorial(s: usize, u: usize) -> Result<OrthogonalArray> {
    if s < 2 || u < 1 {
        return Err(Error::InfeasibleParameters(format!(
            "full factorial needs s >= 2 and u >= 1, got s = {s}, u = {u}"
        )));
    }
    let n = checked_pow(s, u)?;
    let data = (0..n).flat_map(|r| digits(r, s, u)).collect();
    OrthogonalArray::symmetric(IntegerMatrix::new(n, u, data)?, s, u)
}

/// Coefficients `(mu_1, ..., mu_u)` of the column `sum_j mu_j xi_j` over GF(s).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearColumnSpec(Vec<usize>);

impl LinearColumnSpec {
    pub fn new(coefficients: Vec<usize>) -> Result<Self> {
        if coefficients.iter().all(|&c| c == 0) {
            return Err(Error::AllZeroSpec);
        }
        Ok(Self(coefficients))
    }

    /// Spec with coefficient `mu` at each listed digit position.
    pub fn from_terms(u: usize, terms: &[(usize, usize)]) -> Result<Self> {
        let mut coefficients = vec![0; u];
        for &(pos, mu) in terms {
            coefficients[pos] = mu;
        }
        Self::new(coefficients)
    }

    pub fn coefficients(&self) -> &[usize] {
        &self.0
    }
}

/// Column of length `s^u` whose entry in row `r` is `sum_j mu_j xi_j(r)`,
/// where `xi_j(r)` is the `j`-th base-`s` digit of `r` (xi_1 most
/// significant) read as a field element.
pub fn linear_column(field: &GaloisField, u: usize, spec: &LinearColumnSpec) -> Result<Vec<usize>> {
    let s = field.order();
    if spec.0.len() != u {
        return Err(Error::DimensionMismatch(format!(
            "spec has {} coefficients, expected {u}",
            spec.0.len()
        )));
    }
    for &c in &spec.0 {
        field.check(c)?;
    }
    let n = checked_pow(s, u)?;
    Ok((0..n)
        .map(|r| {
            digits(r, s, u)
                .iter()
                .zip(&spec.0)
                .fold(0, |acc, (&x, &mu)| field.add(acc, field.mul(mu, x)))
        })
        .collect())
}

/// Bush construction of OA(s^t, s+1, s, t) for t in {2, 3}.
///
/// Row `r` encodes a polynomial of degree < t whose coefficients are the
/// base-s digits of `r`, leading coefficient first. Column `alpha` holds the
/// polynomial evaluated at field element `alpha`; the last column holds the
/// leading coefficient, so for t = 2 the last column is already in block
/// form.
pub fn bush_oa(field: &GaloisField, t: usize) -> Result<OrthogonalArray> {
    let s = field.order();
    if !(2..=3).contains(&t) || s < t {
        return Err(Error::StrengthUnsupported { strength: t, s });
    }
    let n = checked_pow(s, t)?;
    let mut data = Vec::with_capacity(n * (s + 1));
    for r in 0..n {
        let coeffs = digits(r, s, t);
        for alpha in 0..s {
            // Horner, leading coefficient first
            let value = coeffs
                .iter()
                .fold(0, |acc, &c| field.add(field.mul(acc, alpha), c));
            data.push(value);
        }
        data.push(coeffs[0]);
    }
    let oa = OrthogonalArray::symmetric(IntegerMatrix::new(n, s + 1, data)?, s, t)?;
    Ok(oa)
}

/// True iff the last column reads `(0,...,0, 1,...,1, ..., s-1,...,s-1)`
/// in runs of `s`.
pub fn is_block_form(a: &IntegerMatrix, s: usize) -> bool {
    let last = a.n_cols().wrapping_sub(1);
    a.n_cols() > 0 && a.n_rows() == s * s && (0..a.n_rows()).all(|i| a.get(i, last) == i / s)
}

/// Stably reorders the rows of an OA(s^2, q+1, s, 2) so its last column is
/// in block form. The row multiset is unchanged.
pub fn normalize_block_form(a: &OrthogonalArray) -> Result<OrthogonalArray> {
    let n = a.runs();
    let s = (1..=n).find(|s| s * s >= n).unwrap_or(0);
    if s * s != n || n == 0 {
        return Err(Error::NotSquareRunSize(n));
    }
    if a.factors() == 0 || a.symmetric_levels() != Some(s) {
        return Err(Error::NotBlockForm(format!(
            "expected {s}-level columns in a {n}-run array"
        )));
    }
    let last = a.factors() - 1;
    let m = a.matrix();
    let mut counts = vec![0; s];
    for i in 0..n {
        counts[m.get(i, last)] += 1;
    }
    if counts.iter().any(|&c| c != s) {
        return Err(Error::NotBlockForm(
            "last column levels are not replicated s times".into(),
        ));
    }
    let order: Vec<usize> = (0..n).sorted_by_key(|&i| m.get(i, last)).collect();
    let matrix = m.permute_rows(&order);
    OrthogonalArray::new(matrix, a.levels().to_vec(), a.strength())
}

/// Parses the OA text format and re-verifies the claimed strength.
pub fn parse_oa(text: &str) -> Result<OrthogonalArray> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(Error::Parse {
            line: hline,
            msg: "header must be `n m s t`".into(),
        });
    }
    let num = |tok: &str| -> Result<usize> {
        tok.parse().map_err(|_| Error::Parse {
            line: hline,
            msg: format!("expected an integer, found `{tok}`"),
        })
    };
    let n = num(fields[0])?;
    let m = num(fields[1])?;
    let levels: Vec<usize> = if fields[2].contains(',') {
        fields[2].split(',').map(num).collect::<Result<_>>()?
    } else {
        vec![num(fields[2])?; m]
    };
    if levels.len() != m {
        return Err(Error::Parse {
            line: hline,
            msg: format!("{} level counts for {m} columns", levels.len()),
        });
    }
    let t = num(fields[3])?;

    let mut data = Vec::with_capacity(n * m);
    let mut rows = 0;
    for (line, content) in lines {
        let row: Vec<usize> = content
            .split_whitespace()
            .map(|tok| {
                tok.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("expected an integer, found `{tok}`"),
                })
            })
            .collect::<Result<_>>()?;
        if row.len() != m {
            return Err(Error::Parse {
                line,
                msg: format!("expected {m} entries, found {}", row.len()),
            });
        }
        data.extend(row);
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header declares {n} rows but {rows} were given"),
        });
    }
    let matrix = IntegerMatrix::new(n, m, data)?;
    if !is_orthogonal_array(&matrix, &levels, t)? {
        return Err(Error::StrengthMismatch {
            claimed: t,
            actual: strength(&matrix, &levels)?,
        });
    }
    OrthogonalArray::new(matrix, levels, t)
}

pub fn load_oa(path: impl AsRef<Path>) -> Result<OrthogonalArray> {
    parse_oa(&fs::read_to_string(path)?)
}

pub fn format_oa(a: &OrthogonalArray) -> String {
    let levels = match a.symmetric_levels() {
        Some(s) => s.to_string(),
        None => a.levels().iter().join(","),
    };
    let mut out = format!("{} {} {} {}\n", a.runs(), a.factors(), levels, a.strength());
    out.push_str(&a.matrix().to_string());
    out
}

pub fn save_oa(a: &OrthogonalArray, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_oa(a))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;
    use proptest::prelude::*;

    #[test]
    fn full_factorial_counts_in_binary() {
        let ff = full_factorial(2, 3).unwrap();
        assert_eq!(ff.runs(), 8);
        assert_eq!(ff.matrix().row(0), &[0, 0, 0]);
        assert_eq!(ff.matrix().row(1), &[0, 0, 1]);
        assert_eq!(ff.matrix().row(6), &[1, 1, 0]);
        assert!(is_orthogonal_array(full_factorial(3, 2).unwrap().matrix(), &[3, 3], 2).unwrap());
        assert!(is_orthogonal_array(full_factorial(5, 3).unwrap().matrix(), &[5; 3], 3).unwrap());
        assert!(matches!(full_factorial(10, 8), Err(Error::TooLarge(_))));
    }

    #[test]
    fn linear_columns_over_gf2() {
        let f = GaloisField::new(2).unwrap();
        let xi1 = linear_column(&f, 3, &LinearColumnSpec::new(vec![1, 0, 0]).unwrap()).unwrap();
        assert_eq!(xi1, vec![0, 0, 0, 0, 1, 1, 1, 1]);
        let sum = linear_column(&f, 3, &LinearColumnSpec::new(vec![1, 1, 0]).unwrap()).unwrap();
        assert_eq!(sum, vec![0, 0, 1, 1, 1, 1, 0, 0]);
        assert!(matches!(
            LinearColumnSpec::new(vec![0, 0, 0]),
            Err(Error::AllZeroSpec)
        ));
    }

    fn proportional(f: &GaloisField, a: &[usize], b: &[usize]) -> bool {
        (1..f.order()).any(|c| a.iter().zip(b).all(|(&x, &y)| f.mul(c, x) == y))
    }

    #[test]
    fn independent_linear_columns_form_strength_two_pairs() {
        for s in [2, 3, 4, 5] {
            let f = GaloisField::new(s).unwrap();
            for u in 2..=4 {
                if s.pow(u as u32) > 625 {
                    continue;
                }
                let specs: Vec<Vec<usize>> =
                    (1..s.pow(u as u32)).map(|r| digits(r, s, u)).collect();
                let cols: Vec<Vec<usize>> = specs
                    .iter()
                    .map(|c| {
                        linear_column(&f, u, &LinearColumnSpec::new(c.clone()).unwrap()).unwrap()
                    })
                    .collect();
                for i in 0..specs.len() {
                    for j in i + 1..specs.len() {
                        let pair =
                            IntegerMatrix::from_columns(cols[i].len(), &[&cols[i], &cols[j]])
                                .unwrap();
                        let expected = !proportional(&f, &specs[i], &specs[j]);
                        assert_eq!(is_orthogonal_array(&pair, &[s, s], 2).unwrap(), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn bush_arrays() {
        let gf2 = GaloisField::new(2).unwrap();
        let a = bush_oa(&gf2, 2).unwrap();
        assert_eq!((a.runs(), a.factors(), a.strength()), (4, 3, 2));
        let gf3 = GaloisField::new(3).unwrap();
        let a = bush_oa(&gf3, 2).unwrap();
        assert_eq!((a.runs(), a.factors()), (9, 4));
        assert!(is_block_form(a.matrix(), 3));
        let g = bush_oa(&gf3, 3).unwrap();
        assert_eq!((g.runs(), g.factors()), (27, 4));
        assert!(is_orthogonal_array(g.matrix(), &[3; 4], 3).unwrap());
        assert!(matches!(
            bush_oa(&gf2, 3),
            Err(Error::StrengthUnsupported { .. })
        ));
        assert!(matches!(
            bush_oa(&gf3, 4),
            Err(Error::StrengthUnsupported { .. })
        ));
        for s in [4, 5, 7, 8, 9] {
            let f = GaloisField::new(s).unwrap();
            assert_eq!(bush_oa(&f, 2).unwrap().factors(), s + 1);
        }
    }

    fn example2_a1() -> OrthogonalArray {
        let rows = [
            [0, 0, 0, 0],
            [1, 1, 2, 0],
            [2, 2, 1, 0],
            [0, 2, 2, 1],
            [1, 0, 1, 1],
            [2, 1, 0, 1],
            [0, 1, 1, 2],
            [1, 2, 0, 2],
            [2, 0, 2, 2],
        ];
        OrthogonalArray::symmetric(IntegerMatrix::from_rows(&rows).unwrap(), 3, 2).unwrap()
    }

    #[test]
    fn normalize_keeps_block_form_arrays() {
        let a1 = example2_a1();
        assert_eq!(normalize_block_form(&a1).unwrap(), a1);

        let reversed: Vec<usize> = (0..9).rev().collect();
        let rev = OrthogonalArray::symmetric(a1.matrix().permute_rows(&reversed), 3, 2).unwrap();
        let fixed = normalize_block_form(&rev).unwrap();
        assert!(is_block_form(fixed.matrix(), 3));
        let mut x = fixed.matrix().to_rows();
        let mut y = a1.matrix().to_rows();
        x.sort();
        y.sort();
        assert_eq!(x, y);

        let eight = full_factorial(2, 3).unwrap();
        assert!(matches!(
            normalize_block_form(&eight),
            Err(Error::NotSquareRunSize(8))
        ));
    }

    proptest! {
        #[test]
        fn normalize_always_yields_block_form(seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = bush_oa(&GaloisField::new(3).unwrap(), 2).unwrap();
            let order = Permutation::random(9, &mut rng);
            let shuffled = OrthogonalArray::symmetric(a.matrix().permute_rows(order.as_slice()), 3, 2).unwrap();
            let fixed = normalize_block_form(&shuffled).unwrap();
            prop_assert!(is_block_form(fixed.matrix(), 3));
        }

        #[test]
        fn text_round_trip(s in prop::sample::select(vec![2usize, 3, 4, 5]), t in 2usize..=3) {
            let f = GaloisField::new(s).unwrap();
            if let Ok(a) = bush_oa(&f, t) {
                let back = parse_oa(&format_oa(&a)).unwrap();
                prop_assert_eq!(back, a);
            }
        }
    }

    #[test]
    fn parses_table1_d1_and_rejects_false_strength() {
        let text = "# qualitative part\n8 2 2 2\n0 0\n1 1\n0 1\n1 0\n0 0\n1 1\n0 1\n1 0\n";
        let a = parse_oa(text).unwrap();
        assert_eq!((a.runs(), a.factors(), a.strength()), (8, 2, 2));
        let claim3 = text.replace("8 2 2 2", "8 2 2 3");
        assert!(matches!(
            parse_oa(&claim3),
            Err(Error::StrengthMismatch {
                claimed: 3,
                actual: 2
            })
        ));
        assert!(matches!(parse_oa("8 2 2"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_oa("2 2 2 1\n0 1\n1 x\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_oa("3 2 2 1\n0 1\n1 0\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn mixed_level_header() {
        let text = "4 2 2,4 1\n0 0\n0 1\n1 2\n1 3\n";
        let a = parse_oa(text).unwrap();
        assert_eq!(a.levels(), &[2, 4]);
        assert_eq!(parse_oa(&format_oa(&a)).unwrap(), a);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.oa");
        let g = bush_oa(&GaloisField::new(4).unwrap(), 3).unwrap();
        save_oa(&g, &path).unwrap();
        assert_eq!(load_oa(&path).unwrap(), g);
    }
}
