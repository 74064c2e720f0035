//! Input documents: theme presentations and generator families.

use std::collections::BTreeMap;
use std::path::Path;

use abtheme::parse::{eval_expansion, eval_series, Env};
use abtheme::series::{fmt_rational, parse_rational, Rational};
use abtheme::theme::{embed_into_xi, FundamentalInvariants, ThemePresentation};
use abtheme::xi::XiElement;
use abtheme::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_PREC: usize = 32;
pub const MIN_PREC: usize = 8;

/// `{ lambda1 = "5/2", p = [..], S = [..], prec = 32 }`, with optional
/// `[params]` used inside the relation series and an optional `grid`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ThemeDoc {
    pub lambda1: String,
    pub p: Vec<usize>,
    #[serde(rename = "S")]
    pub s: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prec: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<String>,
}

/// `{ generator = "s^(1/2)*log(s) + (z + b)*s^(-1/2)", rank = 2 }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDoc {
    pub generator: String,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prec: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Document {
    Theme(ThemeDoc),
    Generator(GeneratorDoc),
}

impl Document {
    pub fn from_toml(src: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(src).map_err(|e| Error::Parse(e.message().to_string()))?;
        let de = |e: toml::de::Error| Error::Parse(e.message().to_string());
        if table.contains_key("generator") {
            Ok(Document::Generator(table.try_into().map_err(de)?))
        } else if table.contains_key("lambda1") {
            Ok(Document::Theme(table.try_into().map_err(de)?))
        } else {
            Err(Error::Parse("document has neither `lambda1` (theme) nor `generator` (family)".into()))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&src).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn prec(&self) -> Option<usize> {
        match self {
            Document::Theme(t) => t.prec,
            Document::Generator(g) => g.prec,
        }
    }

    fn params(&self) -> &BTreeMap<String, String> {
        match self {
            Document::Theme(t) => &t.params,
            Document::Generator(g) => &g.params,
        }
    }

    pub fn grid(&self) -> &[String] {
        match self {
            Document::Theme(t) => &t.grid,
            Document::Generator(g) => &g.grid,
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Document::Theme(t) => t.p.len() + 1,
            Document::Generator(g) => g.rank,
        }
    }

    /// Pins the working precision so the document is self-describing.
    pub fn with_prec(mut self, prec: usize) -> Self {
        match &mut self {
            Document::Theme(t) => t.prec = Some(prec),
            Document::Generator(g) => g.prec = Some(prec),
        }
        self
    }

    /// Environment with the document's fixed parameters, overridden by `point`.
    pub fn env(&self, prec: usize, point: &[(String, Rational)]) -> Result<Env> {
        let mut env = Env::new(prec);
        for (k, v) in self.params() {
            env = env.with(k, parse_rational(v)?);
        }
        for (k, v) in point {
            env = env.with(k, v.clone());
        }
        Ok(env)
    }

    pub fn theme(&self, env: &Env) -> Result<ThemePresentation> {
        let Document::Theme(t) = self else {
            return Err(Error::InvalidInput("this command needs a theme document (lambda1, p, S)".into()));
        };
        theme_from(t, env)
    }

    /// The generator: the document's expansion, or the image of `e_k` under
    /// the embedding for a theme.
    pub fn generator(&self, env: &Env) -> Result<XiElement> {
        match self {
            Document::Theme(t) => Ok(embed_into_xi(&theme_from(t, env)?)?.phi().clone()),
            Document::Generator(g) => {
                if g.rank == 0 {
                    return Err(Error::InvalidInput("rank must be positive".into()));
                }
                eval_expansion(&g.generator, env, g.rank - 1)
            }
        }
    }
}

fn theme_from(t: &ThemeDoc, env: &Env) -> Result<ThemePresentation> {
    let inv = FundamentalInvariants::new(parse_rational(&t.lambda1)?, t.p.clone());
    if t.s.len() != t.p.len() {
        return Err(Error::InvalidInput(format!("{} relation series for {} gaps", t.s.len(), t.p.len())));
    }
    let s = t.s.iter().map(|src| eval_series(src, env)).collect::<Result<Vec<_>>>()?;
    ThemePresentation::new(inv, s, env.prec)
}

/// One grid axis: `z=-2..2 step 1/2`, `z=-2..2` (step 1), `z=0,1,5` or `z=3`.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<Rational>,
}

const MAX_AXIS: usize = 10_000;

pub fn parse_axis(src: &str) -> Result<Axis> {
    let bad = |m: &str| Error::Parse(format!("grid {src:?}: {m}"));
    let (name, range) = src.split_once('=').ok_or_else(|| bad("expected name=range"))?;
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(bad("invalid parameter name"));
    }
    let range = range.trim();
    let values = if let Some((lo, rest)) = range.split_once("..") {
        let (hi, step) = match rest.split_once("step") {
            Some((hi, step)) => (hi, parse_rational(step)?),
            None => (rest, Rational::from_integer(1.into())),
        };
        let (lo, hi) = (parse_rational(lo)?, parse_rational(hi)?);
        if step <= Rational::from_integer(0.into()) {
            return Err(bad("step must be positive"));
        }
        let mut out = Vec::new();
        let mut v = lo;
        while v <= hi {
            if out.len() == MAX_AXIS {
                return Err(bad("too many grid values"));
            }
            out.push(v.clone());
            v += &step;
        }
        out
    } else {
        range.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() {
        return Err(bad("empty range"));
    }
    Ok(Axis { name: name.to_string(), values })
}

/// Cartesian product of the axes; later axes with the same name replace
/// earlier ones.
pub fn grid_points(axes: &[String]) -> Result<Vec<Vec<(String, Rational)>>> {
    let mut merged: Vec<Axis> = Vec::new();
    for src in axes {
        let a = parse_axis(src)?;
        match merged.iter_mut().find(|m| m.name == a.name) {
            Some(m) => *m = a,
            None => merged.push(a),
        }
    }
    let mut points: Vec<Vec<(String, Rational)>> = vec![Vec::new()];
    for a in &merged {
        points = points
            .into_iter()
            .flat_map(|p| {
                a.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((a.name.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

pub fn fmt_point(p: &[(String, Rational)]) -> String {
    p.iter().map(|(k, v)| format!("{k}={}", fmt_rational(v))).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use abtheme::series::{int, rat};

    #[test]
    fn axis_forms() {
        let a = parse_axis("z=-2..2 step 1/2").unwrap();
        assert_eq!(a.values.len(), 9);
        assert_eq!(a.values[1], rat(-3, 2));
        assert_eq!(parse_axis("z = -1..1").unwrap().values, vec![int(-1), int(0), int(1)]);
        assert_eq!(parse_axis("g=0,1,5").unwrap().values, vec![int(0), int(1), int(5)]);
        assert!(parse_axis("z=1..0").is_err());
        assert!(parse_axis("z=0..1 step 0").is_err());
        assert!(parse_axis("=1").is_err());
    }

    #[test]
    fn grid_is_a_product() {
        let g = grid_points(&["a=1..2".into(), "b=0,5".into(), "a=7".into()]).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(fmt_point(&g[1]), "a=7, b=5");
    }

    #[test]
    fn documents_are_told_apart() {
        let t = Document::from_toml("lambda1 = \"3\"\np = [1]\nS = [\"1 + b\"]\n").unwrap();
        assert!(matches!(t, Document::Theme(_)));
        let g = Document::from_toml("generator = \"s^(1/2)\"\nrank = 1\n").unwrap();
        assert!(matches!(g, Document::Generator(_)));
        assert!(Document::from_toml("rank = 1").is_err());
        assert!(Document::from_toml("lambda1 = \"3\"\np = []\nS = []\nextra = 1\n").is_err());
    }

    #[test]
    fn params_reach_the_relations() {
        let d = Document::from_toml("lambda1 = \"3\"\np = [1]\nS = [\"1 + alpha*b\"]\n[params]\nalpha = \"2/3\"\n").unwrap();
        let env = d.env(16, &[]).unwrap();
        assert_eq!(d.theme(&env).unwrap().relations()[0].coeffs()[1], rat(2, 3));
        let env = d.env(16, &[("alpha".into(), int(4))]).unwrap();
        assert_eq!(d.theme(&env).unwrap().relations()[0].coeffs()[1], int(4));
    }
}
