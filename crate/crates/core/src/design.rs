use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::array::{level_collapse, IntegerMatrix, LatinHypercube, OrthogonalArray};
use crate::error::{Error, Result};
use crate::perm::Permutation;

/// The generator behind every sampled plan: ChaCha8 seeded from a `u64`,
/// with `stream` selecting an independent substream (restart index).
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Every random choice a construction makes. Unused fields stay empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationPlan {
    /// Construction 1: one permutation of `0..lambda` per quantitative column.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub v: Vec<Permutation>,
    /// Construction 1: `p x lambda` permutations of `0..s`;
    /// construction 2: `p x 1`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub w: Vec<Vec<Permutation>>,
    /// Construction 2: `s^2 x p` permutations of `0..lambda`; cell `(i, k)`
    /// lists `b[i + j s^2, k]` for `j = 0..lambda`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b_cells: Vec<Vec<Permutation>>,
    /// Construction 3: level permutation of the leftover column per
    /// quantitative column.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c_perms: Vec<Permutation>,
    /// Level expansion: for quantitative column `k` and collapsed level `l`,
    /// the order in which `l*s .. l*s+s` fill the rows holding `l`.
    #[serde(default)]
    pub expansion: Vec<Vec<Permutation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl PermutationPlan {
    fn random_expansion<R: Rng + ?Sized>(
        n: usize,
        s: usize,
        p: usize,
        rng: &mut R,
    ) -> Vec<Vec<Permutation>> {
        (0..p)
            .map(|_| (0..n / s).map(|_| Permutation::random(s, rng)).collect())
            .collect()
    }

    pub fn identity_expansion(n: usize, s: usize, p: usize) -> Vec<Vec<Permutation>> {
        vec![vec![Permutation::identity(s); n / s]; p]
    }

    pub fn sample_construction1<R: Rng + ?Sized>(
        s: usize,
        lambda: usize,
        p: usize,
        rng: &mut R,
    ) -> Self {
        let v = (0..p).map(|_| Permutation::random(lambda, rng)).collect();
        let w = (0..p)
            .map(|_| (0..lambda).map(|_| Permutation::random(s, rng)).collect())
            .collect();
        let expansion = Self::random_expansion(lambda * s * s, s, p, rng);
        Self {
            v,
            w,
            expansion,
            ..Self::default()
        }
    }

    pub fn sample_construction2<R: Rng + ?Sized>(
        s: usize,
        lambda: usize,
        p: usize,
        rng: &mut R,
    ) -> Self {
        let b_cells = (0..s * s)
            .map(|_| (0..p).map(|_| Permutation::random(lambda, rng)).collect())
            .collect();
        let w = (0..p).map(|_| vec![Permutation::random(s, rng)]).collect();
        let expansion = Self::random_expansion(lambda * s * s, s, p, rng);
        Self {
            w,
            b_cells,
            expansion,
            ..Self::default()
        }
    }

    pub fn sample_construction3<R: Rng + ?Sized>(
        s: usize,
        n: usize,
        p: usize,
        rng: &mut R,
    ) -> Self {
        let c_perms = (0..p).map(|_| Permutation::random(s, rng)).collect();
        let expansion = Self::random_expansion(n, s, p, rng);
        Self {
            c_perms,
            expansion,
            ..Self::default()
        }
    }

    /// Mutable access to every stored permutation; swapping entries inside
    /// any of them yields another valid plan.
    pub fn permutations_mut(&mut self) -> Vec<&mut Permutation> {
        let mut out: Vec<&mut Permutation> = Vec::new();
        out.extend(self.v.iter_mut());
        out.extend(self.w.iter_mut().flatten());
        out.extend(self.b_cells.iter_mut().flatten());
        out.extend(self.c_perms.iter_mut());
        out.extend(self.expansion.iter_mut().flatten());
        out
    }

    /// Hex SHA-256 of the plan's JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("plans always serialize");
        Sha256::digest(json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// The decomposition `floor(D2 / s) = s B + C` together with the plan that
/// produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub b: IntegerMatrix,
    pub c: IntegerMatrix,
    pub plan: PermutationPlan,
}

/// A design `(D1, D2)`: `q` qualitative `s`-level factors and `p`
/// quantitative factors on `n` runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoupledDesign {
    d1: OrthogonalArray,
    d2: LatinHypercube,
    s: usize,
    witness: Option<Witness>,
}

impl CoupledDesign {
    /// Checks shapes, level ranges and that `d2` is a Latin hypercube; the
    /// coupling itself is left to the verifier.
    pub fn new(d1: IntegerMatrix, d2: IntegerMatrix, s: usize) -> Result<Self> {
        if s < 2 {
            return Err(Error::InfeasibleParameters(format!(
                "s = {s} must be at least 2"
            )));
        }
        if d1.n_rows() != d2.n_rows() {
            return Err(Error::DimensionMismatch(format!(
                "D1 has {} rows, D2 has {}",
                d1.n_rows(),
                d2.n_rows()
            )));
        }
        let levels = vec![s; d1.n_cols()];
        let d1 = OrthogonalArray::with_max_strength(d1, levels, 3)?;
        let d2 = LatinHypercube::new(d2)?;
        Ok(Self {
            d1,
            d2,
            s,
            witness: None,
        })
    }

    pub fn with_witness(mut self, witness: Witness) -> Result<Self> {
        let n = self.n();
        let p = self.p();
        for (name, m) in [("B", &witness.b), ("C", &witness.c)] {
            if m.n_rows() != n || m.n_cols() != p {
                return Err(Error::DimensionMismatch(format!(
                    "witness {name} is {}x{}, expected {n}x{p}",
                    m.n_rows(),
                    m.n_cols()
                )));
            }
        }
        self.witness = Some(witness);
        Ok(self)
    }

    pub fn d1(&self) -> &OrthogonalArray {
        &self.d1
    }

    pub fn d2(&self) -> &LatinHypercube {
        &self.d2
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.d1.runs()
    }

    pub fn q(&self) -> usize {
        self.d1.factors()
    }

    pub fn p(&self) -> usize {
        self.d2.factors()
    }

    pub fn witness(&self) -> Option<&Witness> {
        self.witness.as_ref()
    }

    /// `floor(D2 / s)`.
    pub fn d2_collapsed(&self) -> IntegerMatrix {
        level_collapse(self.d2.matrix(), self.s)
    }

    /// `floor(D2 / s^2)`.
    pub fn d2_collapsed_twice(&self) -> IntegerMatrix {
        level_collapse(self.d2.matrix(), self.s * self.s)
    }

    /// The same design with rows in `order`; the witness follows along.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let mut out = Self::new(
            self.d1.matrix().permute_rows(order),
            self.d2.matrix().permute_rows(order),
            self.s,
        )?;
        if let Some(w) = &self.witness {
            out = out.with_witness(Witness {
                b: w.b.permute_rows(order),
                c: w.c.permute_rows(order),
                plan: w.plan.clone(),
            })?;
        }
        Ok(out)
    }

    /// Row order grouping runs by `floor(d_1 / s^2)` and then by
    /// `floor(d_1 / s)`. For a doubly coupled design with `p >= 1` the
    /// consecutive `s^2`-row blocks of `D1` under this order are completely
    /// resolvable.
    pub fn croa_row_order(&self) -> Vec<usize> {
        if self.p() == 0 {
            return (0..self.n()).collect();
        }
        let tilde = self.d2_collapsed();
        (0..self.n()).sorted_by_key(|&i| tilde.get(i, 0)).collect()
    }
}
