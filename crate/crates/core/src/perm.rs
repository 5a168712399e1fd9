use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection on `0..len`, stored as its image vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &x in &image {
            if x >= image.len() || seen[x] {
                return Err(Error::InvalidPermutation(format!("{image:?}")));
            }
            seen[x] = true;
        }
        Ok(Self(image))
    }

    pub fn identity(len: usize) -> Self {
        Self((0..len).collect())
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut image: Vec<usize> = (0..len).collect();
        image.shuffle(rng);
        Self(image)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Swapping two images keeps the map a bijection.
    pub fn swap(&mut self, i: usize, j: usize) {
        self.0.swap(i, j);
    }

    /// All permutations of `0..len` in lexicographic order.
    pub fn all(len: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut current: Vec<usize> = (0..len).collect();
        loop {
            out.push(Self(current.clone()));
            // next lexicographic permutation
            let Some(i) = (1..len).rev().find(|&i| current[i - 1] < current[i]) else {
                break;
            };
            let j = (i..len)
                .rev()
                .find(|&j| current[j] > current[i - 1])
                .unwrap();
            current.swap(i - 1, j);
            current[i..].reverse();
        }
        out
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(value: Vec<usize>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::new(vec![2, 0, 1]).is_ok());
        assert!(Permutation::new(vec![]).is_ok());
    }

    #[test]
    fn enumerates_factorial_many() {
        assert_eq!(Permutation::all(0).len(), 1);
        assert_eq!(Permutation::all(3).len(), 6);
        let all4 = Permutation::all(4);
        assert_eq!(all4.len(), 24);
        let distinct: std::collections::HashSet<_> = all4.iter().collect();
        assert_eq!(distinct.len(), 24);
    }

    #[test]
    fn serde_rejects_invalid() {
        assert!(serde_json::from_str::<Permutation>("[1,1]").is_err());
        let p: Permutation = serde_json::from_str("[1,0]").unwrap();
        assert_eq!(p.apply(0), 1);
    }
}
