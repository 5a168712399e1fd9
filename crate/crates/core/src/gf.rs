//! Table-driven arithmetic in GF(s) for prime powers s <= 32.
//!
//! Elements are indexed `0..s` by the base-p value of their coefficient
//! vector: index `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` stands for the
//! polynomial `c_0 + c_1 x + ... + c_{k-1} x^{k-1}`. Index 0 is the additive
//! identity and index 1 the multiplicative identity.

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 32;

/// Monic irreducible polynomials used for the non-prime orders, written as
/// coefficient lists from the constant term up (leading 1 included).
const IRREDUCIBLE: &[(usize, &[usize])] = &[
    (4, &[1, 1, 1]),           // x^2 + x + 1
    (8, &[1, 1, 0, 1]),        // x^3 + x + 1
    (9, &[1, 0, 1]),           // x^2 + 1
    (16, &[1, 1, 0, 0, 1]),    // x^4 + x + 1
    (25, &[2, 1, 1]),          // x^2 + x + 2
    (27, &[1, 2, 0, 1]),       // x^3 + 2x + 1
    (32, &[1, 0, 1, 0, 0, 1]), // x^5 + x^2 + 1
];

/// Returns `(p, k)` with `s = p^k`, or `None` when `s` is not a prime power.
pub fn prime_power(s: usize) -> Option<(usize, u32)> {
    if s < 2 {
        return None;
    }
    let p = (2..=s).find(|d| s.is_multiple_of(*d))?;
    let mut rest = s;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisField {
    order: usize,
    characteristic: usize,
    degree: u32,
    add: Vec<usize>,
    mul: Vec<usize>,
    neg: Vec<usize>,
    inv: Vec<usize>,
}

impl GaloisField {
    pub fn new(s: usize) -> Result<Self> {
        let (p, k) = prime_power(s).ok_or(Error::NotPrimePower(s))?;
        if s > MAX_ORDER {
            return Err(Error::FieldTooLarge(s));
        }
        let modulus: Vec<usize> = if k == 1 {
            vec![0, 1]
        } else {
            IRREDUCIBLE
                .iter()
                .find(|(order, _)| *order == s)
                .map(|(_, poly)| poly.to_vec())
                .expect("every prime power up to 32 has a tabulated modulus")
        };

        let digits = |x: usize| -> Vec<usize> {
            let mut out = vec![0; k as usize];
            let mut x = x;
            for d in out.iter_mut() {
                *d = x % p;
                x /= p;
            }
            out
        };
        let index =
            |coeffs: &[usize]| -> usize { coeffs.iter().rev().fold(0, |acc, &c| acc * p + c) };

        let mut add = vec![0; s * s];
        let mut mul = vec![0; s * s];
        for a in 0..s {
            let da = digits(a);
            for b in 0..s {
                let db = digits(b);
                let sum: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * s + b] = index(&sum);

                let mut prod = vec![0; 2 * k as usize - 1];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                reduce(&mut prod, &modulus, p);
                mul[a * s + b] = index(&prod[..k as usize]);
            }
        }

        let neg = (0..s)
            .map(|a| (0..s).find(|&b| add[a * s + b] == 0).unwrap())
            .collect();
        let inv = (0..s)
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    (1..s).find(|&b| mul[a * s + b] == 1).unwrap()
                }
            })
            .collect();

        Ok(Self {
            order: s,
            characteristic: p,
            degree: k,
            add,
            mul,
            neg,
            inv,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn characteristic(&self) -> usize {
        self.characteristic
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.order + b]
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: usize) -> Result<usize> {
        if a == 0 {
            return Err(Error::InverseOfZero);
        }
        self.check(a)?;
        Ok(self.inv[a])
    }

    /// Range-checked lookup for untrusted indices.
    pub fn check(&self, a: usize) -> Result<usize> {
        if a < self.order {
            Ok(a)
        } else {
            Err(Error::ElementOutOfRange {
                element: a,
                order: self.order,
            })
        }
    }

    pub fn add_table(&self) -> &[usize] {
        &self.add
    }

    pub fn mul_table(&self) -> &[usize] {
        &self.mul
    }
}

// Reduces `poly` in place modulo the monic `modulus` over Z_p.
fn reduce(poly: &mut [usize], modulus: &[usize], p: usize) {
    let deg = modulus.len() - 1;
    for top in (deg..poly.len()).rev() {
        let c = poly[top];
        if c == 0 {
            continue;
        }
        for (i, m) in modulus.iter().enumerate() {
            let idx = top - deg + i;
            poly[idx] = (poly[idx] + p * p - c * m % p) % p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_field_axioms(f: &GaloisField) {
        let s = f.order();
        for a in 0..s {
            assert_eq!(f.add(a, 0), a);
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
            for b in 0..s {
                assert!(f.add(a, b) < s && f.mul(a, b) < s);
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                if a != 0 && b != 0 {
                    assert_ne!(f.mul(a, b), 0, "zero divisor in GF({s})");
                }
                for c in 0..s {
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn mod3_tables() {
        let f = GaloisField::new(3).unwrap();
        assert_eq!(f.add(1, 2), 0);
        assert_eq!(f.mul(2, 2), 1);
    }

    #[test]
    fn gf4_has_characteristic_two() {
        let f = GaloisField::new(4).unwrap();
        assert_eq!(f.characteristic(), 2);
        for a in 0..4 {
            assert_eq!(f.add(a, a), 0);
        }
    }

    #[test]
    fn gf5_addition() {
        let f = GaloisField::new(5).unwrap();
        assert_eq!(f.add(3, 4), 2);
    }

    #[test]
    fn gf4_multiplicative_identity() {
        let f = GaloisField::new(4).unwrap();
        for a in 0..4 {
            assert_eq!(f.mul(a, 1), a);
        }
    }

    #[test]
    fn gf9_inverses_by_table_scan() {
        let f = GaloisField::new(9).unwrap();
        for a in 1..9 {
            let b = f.inv(a).unwrap();
            let scanned: Vec<usize> = (0..9).filter(|&x| f.mul_table()[a * 9 + x] == 1).collect();
            assert_eq!(scanned, vec![b]);
        }
    }

    #[test]
    fn rejects_non_prime_powers_and_large_orders() {
        assert!(matches!(GaloisField::new(6), Err(Error::NotPrimePower(6))));
        assert!(matches!(GaloisField::new(1), Err(Error::NotPrimePower(1))));
        assert!(matches!(
            GaloisField::new(37),
            Err(Error::FieldTooLarge(37))
        ));
        assert!(matches!(
            GaloisField::new(64),
            Err(Error::FieldTooLarge(64))
        ));
    }

    #[test]
    fn inverse_of_zero() {
        let f = GaloisField::new(7).unwrap();
        assert!(matches!(f.inv(0), Err(Error::InverseOfZero)));
    }

    #[test]
    fn every_supported_order_is_a_field() {
        for s in 2..=MAX_ORDER {
            if prime_power(s).is_some() {
                assert_field_axioms(&GaloisField::new(s).unwrap());
            }
        }
    }

    #[test]
    fn deterministic_construction() {
        assert_eq!(GaloisField::new(8).unwrap(), GaloisField::new(8).unwrap());
    }

    #[test]
    fn gf4_indexing_matches_polynomial_basis() {
        // 2 = x, 3 = x + 1, and x * x = x + 1 modulo x^2 + x + 1
        let f = GaloisField::new(4).unwrap();
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.add(2, 1), 3);
    }
}
