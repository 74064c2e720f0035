//! JSON report schema. Rationals are strings (`"5/2"`), maps are sorted, so
//! identical inputs serialize to identical bytes.

use std::collections::BTreeMap;

use abtheme::classify::{
    Assignment, Distinguisher, LinForm, Obstruction, PointReport, RankCertificate, Relation, ScanReport,
};
use abtheme::series::{fmt_rational, parse_rational, Rational};
use abtheme::theme::FundamentalInvariants;
use abtheme::Result;
use serde::{Deserialize, Serialize};

use crate::doc::Document;

pub fn r(x: &Rational) -> String {
    fmt_rational(x)
}

pub fn rs(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(r).collect()
}

/// Everything needed to reproduce a result: the command, the resolved
/// precision and the input documents (grid included).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub command: String,
    pub prec: usize,
    pub inputs: Vec<Document>,
    pub result: serde_json::Value,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InvariantsJson {
    pub lambda1: String,
    pub p: Vec<usize>,
}

impl From<&FundamentalInvariants> for InvariantsJson {
    fn from(inv: &FundamentalInvariants) -> Self {
        InvariantsJson { lambda1: r(&inv.lambda1), p: inv.p.clone() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RankJson {
    /// Certified by a minor of valuation below precision.
    pub lower: usize,
    /// Holds to working precision only, unless it equals `lower` and no
    /// residual order is given.
    pub upper: usize,
    /// Order to which the next iterate is known to depend on the previous ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_precision: Option<usize>,
}

impl From<&RankCertificate> for RankJson {
    fn from(c: &RankCertificate) -> Self {
        RankJson { lower: c.lower, upper: c.upper, residual_precision: c.residual_precision }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointJson {
    pub point: BTreeMap<String, String>,
    pub rank: Option<RankJson>,
    pub bernstein: Option<Vec<String>>,
    pub invariants: Option<InvariantsJson>,
    pub flags: Vec<String>,
    pub error: Option<String>,
}

impl From<&PointReport> for PointJson {
    fn from(p: &PointReport) -> Self {
        PointJson {
            point: p.point.iter().map(|(k, v)| (k.clone(), r(v))).collect(),
            rank: p.rank.as_ref().map(RankJson::from),
            bernstein: p.bernstein.as_deref().map(rs),
            invariants: p.invariants.as_ref().map(InvariantsJson::from),
            flags: p.flags.clone(),
            error: p.error.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StratumJson {
    pub rank: Option<usize>,
    pub invariants: Option<InvariantsJson>,
    pub points: Vec<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ScanJson {
    pub points: Vec<PointJson>,
    pub strata: Vec<StratumJson>,
    pub bernstein_jump: bool,
    pub rank_jump: bool,
    pub inconclusive: bool,
}

impl From<&ScanReport> for ScanJson {
    fn from(s: &ScanReport) -> Self {
        ScanJson {
            points: s.points.iter().map(PointJson::from).collect(),
            strata: s
                .strata
                .iter()
                .map(|st| StratumJson {
                    rank: st.rank,
                    invariants: st.invariants.as_ref().map(InvariantsJson::from),
                    points: st.points.iter().map(|p| p.iter().map(|(k, v)| (k.clone(), r(v))).collect()).collect(),
                })
                .collect(),
            bernstein_jump: s.bernstein_jump,
            rank_jump: s.rank_jump,
            inconclusive: s.inconclusive,
        }
    }
}

/// A linear form keyed by unknown name.
pub type FormJson = BTreeMap<String, String>;

fn form_json(f: &LinForm, names: &[String]) -> FormJson {
    f.0.iter().map(|(i, c)| (names[*i].clone(), r(c))).collect()
}

fn form_from_json(f: &FormJson, names: &[String]) -> Result<LinForm> {
    let mut out = LinForm::default();
    for (name, c) in f {
        let i = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| abtheme::Error::Parse(format!("unknown {name:?} in a relation")))?;
        out.add_scaled(&parse_rational(c)?, &LinForm::var(i));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RelationJson {
    pub label: String,
    pub form: FormJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DefinitionJson {
    pub name: String,
    pub form: FormJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ObstructionJson {
    pub reason: String,
    pub names: Vec<String>,
    pub chain: Vec<RelationJson>,
    pub definitions: Vec<DefinitionJson>,
    pub normalization: Option<String>,
    /// Farkas weights on the rows of `chain`; row `chain.len()` is the
    /// normalization `x = 1`.
    pub certificate: Vec<WeightJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WeightJson {
    pub row: usize,
    pub weight: String,
}

impl From<&Obstruction> for ObstructionJson {
    fn from(o: &Obstruction) -> Self {
        ObstructionJson {
            reason: o.reason.clone(),
            names: o.names.clone(),
            chain: o
                .chain
                .iter()
                .map(|rel| RelationJson { label: rel.label.clone(), form: form_json(&rel.form, &o.names) })
                .collect(),
            definitions: o
                .definitions
                .iter()
                .map(|d| DefinitionJson { name: d.name.clone(), form: form_json(&d.form, &o.names) })
                .collect(),
            normalization: o.normalization.map(|i| o.names[i].clone()),
            certificate: o.certificate.iter().map(|(i, w)| WeightJson { row: *i, weight: r(w) }).collect(),
        }
    }
}

impl ObstructionJson {
    pub fn to_obstruction(&self) -> Result<Obstruction> {
        let names = &self.names;
        let chain = self
            .chain
            .iter()
            .map(|rel| Ok(Relation { label: rel.label.clone(), form: form_from_json(&rel.form, names)? }))
            .collect::<Result<Vec<_>>>()?;
        let definitions = self
            .definitions
            .iter()
            .map(|d| Ok(abtheme::classify::Definition { name: d.name.clone(), form: form_from_json(&d.form, names)? }))
            .collect::<Result<Vec<_>>>()?;
        let normalization = match &self.normalization {
            None => None,
            Some(n) => Some(
                names.iter().position(|x| x == n).ok_or_else(|| abtheme::Error::Parse(format!("unknown {n:?}")))?,
            ),
        };
        let certificate =
            self.certificate.iter().map(|w| Ok((w.row, parse_rational(&w.weight)?))).collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Obstruction {
            reason: self.reason.clone(),
            names: names.clone(),
            chain,
            definitions,
            normalization,
            certificate,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AssignmentJson {
    pub values: BTreeMap<String, String>,
    pub relations: Vec<RelationJson>,
}

impl From<&Assignment> for AssignmentJson {
    fn from(a: &Assignment) -> Self {
        AssignmentJson {
            values: a.names.iter().cloned().zip(a.values.iter().map(r)).collect(),
            relations: a
                .relations
                .iter()
                .map(|rel| RelationJson { label: rel.label.clone(), form: form_json(&rel.form, &a.names) })
                .collect(),
        }
    }
}

/// A presentation element, printed in the input syntax, with the order to
/// which its coefficients are known.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ElementJson {
    pub element: String,
    pub prec: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InvarianceJson {
    pub invariant: bool,
    pub witness: Option<ElementJson>,
    pub assignment: Option<AssignmentJson>,
    pub cross_checked: bool,
    pub obstruction: Option<ObstructionJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistinguisherJson {
    Invariants { left: InvariantsJson, right: InvariantsJson },
    Relations { obstruction: ObstructionJson },
}

impl From<&Distinguisher> for DistinguisherJson {
    fn from(d: &Distinguisher) -> Self {
        match d {
            Distinguisher::Invariants { left, right } => {
                DistinguisherJson::Invariants { left: left.into(), right: right.into() }
            }
            Distinguisher::Relations(o) => DistinguisherJson::Relations { obstruction: o.into() },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IsomorphismJson {
    pub isomorphic: bool,
    /// `eps_1 .. eps_k` written in the basis of the first presentation.
    pub basis: Option<Vec<ElementJson>>,
    /// Coefficient of `e_{k-1}` in `eps_k`.
    #[serde(rename = "U")]
    pub u: Option<String>,
    pub assignment: Option<AssignmentJson>,
    pub cross_checked: bool,
    pub distinguisher: Option<DistinguisherJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InvariantsReport {
    pub rank: RankJson,
    pub invariants: Option<InvariantsJson>,
    pub lambdas: Option<Vec<String>>,
    pub bernstein: Option<Vec<String>>,
    /// For a theme document: whether the recovered invariants match the
    /// declared ones.
    pub declared_match: Option<bool>,
    pub canonical_space: Option<String>,
    pub flags: Vec<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BernsteinJson {
    pub element: String,
    pub exponents: Vec<String>,
    /// `prod_j (x + mu_j)`.
    pub polynomial: String,
    /// `S_0 .. S_{k-1}` with `a^k phi = sum S_j a^j phi`.
    pub relations: Vec<String>,
    pub invariants: InvariantsJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FactorJson {
    pub j: usize,
    pub support: Vec<usize>,
    pub free: Vec<usize>,
    pub units: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Rank2Json {
    pub alpha: Option<String>,
    /// The canonical relation series `1 + alpha b^p`.
    pub relation: String,
    /// The canonical generator in the expansion syntax.
    pub generator: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CanonicalJson {
    pub invariants: InvariantsJson,
    pub shape: String,
    pub affine_dim: usize,
    pub torus_dim: usize,
    pub factors: Vec<FactorJson>,
    /// Whether the given relation series form a point of the space.
    pub canonical_point: Option<bool>,
    pub reason: Option<String>,
    pub rank2: Option<Rank2Json>,
}
