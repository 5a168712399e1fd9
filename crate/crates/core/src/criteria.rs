//! Space-filling criteria for `D2` and a random-restart search over the
//! permutation plans of a construction family.
//!
//! Both criteria work on midpoint-scaled points `(l + 0.5) / n`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::LatinHypercube;
use crate::construct::Family;
use crate::design::{seeded_rng, CoupledDesign, PermutationPlan};
use crate::error::{Error, Result};

/// Scores closer than this count as ties; the earlier candidate wins.
pub const TIE_TOLERANCE: f64 = 1e-12;

fn scaled_rows(lh: &LatinHypercube) -> Vec<Vec<f64>> {
    let m = lh.matrix();
    let n = m.n_rows() as f64;
    m.rows()
        .map(|r| r.iter().map(|&l| (l as f64 + 0.5) / n).collect())
        .collect()
}

/// Minimum Euclidean distance between two runs; infinite for fewer than two
/// runs.
pub fn maximin_distance(lh: &LatinHypercube) -> f64 {
    let x = scaled_rows(lh);
    let mut best = f64::INFINITY;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d2: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.min(d2);
        }
    }
    best.sqrt()
}

/// Squared centered L2 discrepancy, closed form.
pub fn centered_l2_discrepancy(lh: &LatinHypercube) -> f64 {
    let x = scaled_rows(lh);
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    let d = lh.factors() as i32;
    let nf = n as f64;
    let single: f64 = x
        .iter()
        .map(|row| {
            row.iter()
                .map(|&v| {
                    let z = (v - 0.5).abs();
                    1.0 + 0.5 * z - 0.5 * z * z
                })
                .product::<f64>()
        })
        .sum();
    let mut pair = 0.0;
    for a in &x {
        for b in &x {
            pair += a
                .iter()
                .zip(b)
                .map(|(&u, &v)| {
                    1.0 + 0.5 * (u - 0.5).abs() + 0.5 * (v - 0.5).abs() - 0.5 * (u - v).abs()
                })
                .product::<f64>();
        }
    }
    (13.0f64 / 12.0).powi(d) - 2.0 / nf * single + pair / (nf * nf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    Maximin,
    CenteredL2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Criterion {
    pub fn sense(self) -> Sense {
        match self {
            Self::Maximin => Sense::Maximize,
            Self::CenteredL2 => Sense::Minimize,
        }
    }

    pub fn score(self, lh: &LatinHypercube) -> f64 {
        match self {
            Self::Maximin => maximin_distance(lh),
            Self::CenteredL2 => centered_l2_discrepancy(lh),
        }
    }

    /// True iff `a` beats `b` by more than [`TIE_TOLERANCE`].
    pub fn better(self, a: f64, b: f64) -> bool {
        match self.sense() {
            Sense::Maximize => a > b + TIE_TOLERANCE,
            Sense::Minimize => a < b - TIE_TOLERANCE,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Maximin => "maximin",
            Self::CenteredL2 => "cl2",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maximin" => Ok(Self::Maximin),
            "cl2" | "centered-l2" => Ok(Self::CenteredL2),
            other => Err(Error::InfeasibleParameters(format!(
                "unknown criterion {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionScore {
    pub criterion: Criterion,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Pairwise-swap hill-climbing steps per restart; 0 disables climbing.
    pub climb_steps: usize,
    pub parallel: bool,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            restarts: 1,
            seed: 0,
            climb_steps: 0,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub design: CoupledDesign,
    pub plan: PermutationPlan,
    pub criterion: Criterion,
    /// Final score of every restart, in restart order.
    pub scores: Vec<f64>,
    pub best: usize,
}

impl OptimizeResult {
    pub fn best_score(&self) -> CriterionScore {
        CriterionScore {
            criterion: self.criterion,
            value: self.scores[self.best],
        }
    }
}

/// Swaps two entries of one random plan permutation, keeps the change only
/// if it improves the score.
fn climb<R: Rng + ?Sized>(
    family: &Family,
    criterion: Criterion,
    mut plan: PermutationPlan,
    mut design: CoupledDesign,
    steps: usize,
    rng: &mut R,
) -> Result<(PermutationPlan, CoupledDesign, f64)> {
    let mut score = criterion.score(design.d2());
    for _ in 0..steps {
        let (which, i, j) = {
            let perms = plan.permutations_mut();
            let movable: Vec<usize> = (0..perms.len()).filter(|&k| perms[k].len() >= 2).collect();
            if movable.is_empty() {
                break;
            }
            let which = movable[rng.gen_range(0..movable.len())];
            let len = perms[which].len();
            let i = rng.gen_range(0..len);
            let j = (i + rng.gen_range(1..len)) % len;
            (which, i, j)
        };
        plan.permutations_mut()[which].swap(i, j);
        let candidate = family.build(&plan)?;
        let value = criterion.score(candidate.d2());
        if criterion.better(value, score) {
            score = value;
            design = candidate;
        } else {
            plan.permutations_mut()[which].swap(i, j);
        }
    }
    Ok((plan, design, score))
}

fn restart(
    family: &Family,
    criterion: Criterion,
    opts: &OptimizeOptions,
    r: usize,
) -> Result<(PermutationPlan, CoupledDesign, f64)> {
    let mut rng = seeded_rng(opts.seed, r as u64);
    let mut plan = family.sample_plan(&mut rng);
    plan.seed = Some(opts.seed);
    let design = family.build(&plan)?;
    climb(family, criterion, plan, design, opts.climb_steps, &mut rng)
}

/// Best design over `restarts` sampled plans. Restart `r` draws from stream
/// `r` of the seed, so results do not depend on `parallel`.
pub fn optimize_d2(
    family: &Family,
    criterion: Criterion,
    opts: &OptimizeOptions,
) -> Result<OptimizeResult> {
    if opts.restarts == 0 {
        return Err(Error::InfeasibleParameters(
            "restarts must be at least 1".into(),
        ));
    }
    let runs: Vec<Result<(PermutationPlan, CoupledDesign, f64)>> = if opts.parallel {
        (0..opts.restarts)
            .into_par_iter()
            .map(|r| restart(family, criterion, opts, r))
            .collect()
    } else {
        (0..opts.restarts)
            .map(|r| restart(family, criterion, opts, r))
            .collect()
    };
    let runs: Vec<_> = runs.into_iter().collect::<Result<_>>()?;
    let scores: Vec<f64> = runs.iter().map(|r| r.2).collect();
    let best = (1..scores.len()).fold(0, |b, i| {
        if criterion.better(scores[i], scores[b]) {
            i
        } else {
            b
        }
    });
    let (plan, design, _) = runs.into_iter().nth(best).expect("best index in range");
    Ok(OptimizeResult {
        design,
        plan,
        criterion,
        scores,
        best,
    })
}
