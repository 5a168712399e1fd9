//! Design bundles (self-certifying JSON), CSV export/import and OA-text
//! export of `D1`.
//!
//! A bundle stores integers only; optimizer scores are kept as decimal
//! strings that round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array::{to_continuous, IntegerMatrix, OrthogonalArray};
use crate::design::{seeded_rng, CoupledDesign, PermutationPlan, Witness};
use crate::error::{Error, Result};
use crate::oa::format_oa;
use crate::verify::{verify_design, VerificationReport};

pub const FORMAT_TAG: &str = "dcd-bundle/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub s: usize,
    pub q: usize,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub method: String,
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_digest: Option<String>,
    pub tool_version: String,
    /// Coupling order the stored report was computed at.
    pub omega: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessMatrices {
    pub b: IntegerMatrix,
    pub c: IntegerMatrix,
}

/// Record of a criterion search: the best score of every restart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Optimization {
    pub criterion: String,
    pub restarts: usize,
    pub climb_steps: usize,
    pub best_restart: usize,
    pub scores: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignBundle {
    pub format: String,
    pub metadata: Metadata,
    pub d1: IntegerMatrix,
    pub d2: IntegerMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessMatrices>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PermutationPlan>,
    pub report: VerificationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimization: Option<Optimization>,
}

impl DesignBundle {
    /// Verifies `design` at `omega` and packs it with its report.
    pub fn new(
        design: &CoupledDesign,
        method: &str,
        lambda: Option<usize>,
        u: Option<usize>,
        seed: Option<u64>,
        omega: usize,
    ) -> Result<Self> {
        let report = verify_design(design, omega)?;
        let plan = design.witness().map(|w| w.plan.clone());
        Ok(Self {
            format: FORMAT_TAG.to_string(),
            metadata: Metadata {
                method: method.to_string(),
                params: Params {
                    n: design.n(),
                    s: design.s(),
                    q: design.q(),
                    p: design.p(),
                    lambda,
                    u,
                },
                seed,
                plan_digest: plan.as_ref().map(PermutationPlan::digest),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                omega,
            },
            d1: design.d1().matrix().clone(),
            d2: design.d2().matrix().clone(),
            witness: design.witness().map(|w| WitnessMatrices {
                b: w.b.clone(),
                c: w.c.clone(),
            }),
            plan,
            report,
            optimization: None,
        })
    }

    /// Rebuilds the design from the stored matrices.
    pub fn design(&self) -> Result<CoupledDesign> {
        let d = CoupledDesign::new(self.d1.clone(), self.d2.clone(), self.metadata.params.s)?;
        match &self.witness {
            Some(w) => d.with_witness(Witness {
                b: w.b.clone(),
                c: w.c.clone(),
                plan: self.plan.clone().unwrap_or_default(),
            }),
            None => Ok(d),
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("bundles always serialize");
        out.push('\n');
        out
    }

    /// Parses a bundle and checks it certifies itself: the format tag, the
    /// plan digest and the stored report must all match.
    pub fn from_json(text: &str) -> Result<(Self, CoupledDesign)> {
        let bundle: DesignBundle = serde_json::from_str(text)?;
        if bundle.format != FORMAT_TAG {
            return Err(Error::Bundle(format!(
                "unsupported format {:?}, expected {FORMAT_TAG:?}",
                bundle.format
            )));
        }
        if let (Some(plan), Some(digest)) = (&bundle.plan, &bundle.metadata.plan_digest) {
            if &plan.digest() != digest {
                return Err(Error::Bundle(
                    "plan digest does not match the stored plan".into(),
                ));
            }
        }
        let design = bundle.design()?;
        let fresh = verify_design(&design, bundle.metadata.omega)?;
        if fresh != bundle.report {
            return Err(Error::Bundle(
                "stored report does not match re-verification".into(),
            ));
        }
        Ok((bundle, design))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, CoupledDesign)> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn csv_header(q: usize, p: usize) -> String {
    (1..=q)
        .map(|i| format!("z{i}"))
        .chain((1..=p).map(|k| format!("x{k}")))
        .collect::<Vec<_>>()
        .join(",")
}

/// CSV with header `z1..zq,x1..xp`. With `continuous = Some(seed)` the
/// quantitative columns become points `(l + U) / n` drawn from the seed.
pub fn to_csv(design: &CoupledDesign, continuous: Option<u64>) -> String {
    let (n, q, p) = (design.n(), design.q(), design.p());
    let mut out = csv_header(q, p);
    out.push('\n');
    let points = continuous.map(|seed| to_continuous(design.d2(), &mut seeded_rng(seed, 0)));
    for i in 0..n {
        let mut fields: Vec<String> = design
            .d1()
            .matrix()
            .row(i)
            .iter()
            .map(usize::to_string)
            .collect();
        match &points {
            Some(x) => fields.extend(x.row(i).iter().map(|v| format!("{v}"))),
            None => fields.extend(design.d2().matrix().row(i).iter().map(usize::to_string)),
        }
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

/// Reads an integer CSV written by [`to_csv`] back into a design.
pub fn parse_csv(text: &str, s: usize) -> Result<CoupledDesign> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let q = names.iter().take_while(|h| h.starts_with('z')).count();
    let p = names.len() - q;
    if names[..q]
        .iter()
        .enumerate()
        .any(|(i, h)| *h != format!("z{}", i + 1))
        || names[q..]
            .iter()
            .enumerate()
            .any(|(k, h)| *h != format!("x{}", k + 1))
    {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header must be z1..zq,x1..xp, got {header:?}"),
        });
    }
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    for (idx, line) in lines {
        let values: Vec<usize> = line
            .split(',')
            .map(|f| {
                f.trim().parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("not a nonnegative integer: {f:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if values.len() != q + p {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected {} fields, found {}", q + p, values.len()),
            });
        }
        d1.push(values[..q].to_vec());
        d2.push(values[q..].to_vec());
    }
    let n = d1.len();
    let d1 = IntegerMatrix::new(n, q, d1.concat())?;
    let d2 = IntegerMatrix::new(n, p, d2.concat())?;
    CoupledDesign::new(d1, d2, s)
}

/// `D1` in the OA text format.
pub fn d1_oa_text(design: &CoupledDesign) -> String {
    format_oa(design.d1())
}

/// `D2` in the OA text format, as an OA(n, p, n, 1).
pub fn d2_oa_text(design: &CoupledDesign) -> Result<String> {
    let n = design.n();
    let lh = OrthogonalArray::new(
        design.d2().matrix().clone(),
        vec![n; design.p()],
        1.min(design.p()),
    )?;
    Ok(format_oa(&lh))
}
