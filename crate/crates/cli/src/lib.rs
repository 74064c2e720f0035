//! Front end for the abtheme engine: reads theme and family documents,
//! dispatches to the classifier and renders text or JSON reports.

pub mod doc;
pub mod report;
mod verify;

use std::fmt::Write as _;
use std::path::PathBuf;

use abtheme::ab_algebra::bernstein_polynomial;
use abtheme::classify::{
    invariance_test, isomorphism_test, rank2_reduce, scan_family, ClassifyOptions, Distinguisher, GridPoint,
    InvarianceOutcome, IsomorphismOutcome, PointReport,
};
use abtheme::series::{fmt_poly, int, Rational, TruncSeries};
use abtheme::theme::{
    bernstein_from_generator, canonical_space, invariants_from_bernstein, CanonicalPoint, FundamentalInvariants,
    ThemeElement,
};
use abtheme::{Error, Result};
use num_traits::{One, Zero};

use doc::{fmt_point, grid_points, Document, DEFAULT_PREC, MIN_PREC};
use report::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Rank, Bernstein exponents and fundamental invariants.
    Invariants,
    /// Bernstein element of the generator.
    Bernstein,
    /// Canonical space of the invariants; canonical form in rank 2.
    Canonical,
    /// Isomorphism test between two theme documents.
    Isom,
    /// Invariance test of a theme document.
    Invariance,
    /// Pointwise classification over a parameter grid.
    Scan,
    /// Re-checks a JSON report.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Invariants => "invariants",
            Command::Bernstein => "bernstein",
            Command::Canonical => "canonical",
            Command::Isom => "isom",
            Command::Invariance => "invariance",
            Command::Scan => "scan",
            Command::Verify => "verify",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [
            Command::Invariants,
            Command::Bernstein,
            Command::Canonical,
            Command::Isom,
            Command::Invariance,
            Command::Scan,
            Command::Verify,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct JobSpec {
    pub command: Command,
    pub inputs: Vec<PathBuf>,
    /// Overrides the documents' precision; at least 8.
    pub prec: Option<usize>,
    pub format: Format,
    /// Extra grid axes for `scan`, e.g. `z=-2..2 step 1/2`.
    pub grid: Vec<String>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

/// Exit status and rendered output of a job.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
        Error::PrecisionExhausted(_) | Error::PrecisionTooLow { .. } | Error::PrecisionExceeded { .. } => {
            EXIT_PRECISION
        }
        _ => EXIT_INPUT,
    }
}

/// A computed result before rendering.
pub(crate) struct Computed {
    pub result: serde_json::Value,
    pub text: String,
    pub inconclusive: bool,
}

fn to_value<T: serde::Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("report types serialize")
}

pub fn run(spec: &JobSpec) -> Outcome {
    match run_inner(spec) {
        Ok(o) => o,
        Err(e) => {
            let code = exit_code(&e);
            let stdout = if spec.format == Format::Json {
                let v = serde_json::json!({ "command": spec.command.name(), "error": e.to_string(), "exit": code });
                serde_json::to_string_pretty(&v).unwrap() + "\n"
            } else {
                String::new()
            };
            Outcome { code, stdout, stderr: format!("error: {e}\n") }
        }
    }
}

fn run_inner(spec: &JobSpec) -> Result<Outcome> {
    if let Some(p) = spec.prec {
        if p < MIN_PREC {
            return Err(Error::InvalidInput(format!("--prec must be at least {MIN_PREC}, got {p}")));
        }
    }
    let want = if spec.command == Command::Isom { 2 } else { 1 };
    if spec.inputs.len() != want {
        return Err(Error::InvalidInput(format!(
            "{} takes {want} input file(s), got {}",
            spec.command.name(),
            spec.inputs.len()
        )));
    }
    if spec.command == Command::Verify {
        let src = std::fs::read_to_string(&spec.inputs[0])
            .map_err(|e| Error::Parse(format!("{}: {e}", spec.inputs[0].display())))?;
        let text = verify::verify_report(&src)?;
        let stdout = match spec.format {
            Format::Text => text,
            Format::Json => serde_json::to_string_pretty(&serde_json::json!({ "verified": true, "checks": text.lines().collect::<Vec<_>>() })).unwrap() + "\n",
        };
        return Ok(Outcome { code: EXIT_OK, stdout, stderr: String::new() });
    }
    let mut docs = spec.inputs.iter().map(|p| Document::load(p)).collect::<Result<Vec<_>>>()?;
    let prec = spec.prec.or_else(|| docs[0].prec()).unwrap_or(DEFAULT_PREC);
    if prec < MIN_PREC {
        return Err(Error::InvalidInput(format!("precision must be at least {MIN_PREC}, got {prec}")));
    }
    if spec.command == Command::Scan {
        let d = &mut docs[0];
        let grid = match d {
            Document::Theme(t) => &mut t.grid,
            Document::Generator(g) => &mut g.grid,
        };
        grid.extend(spec.grid.iter().cloned());
    } else if !spec.grid.is_empty() {
        return Err(Error::InvalidInput("--grid only applies to scan".into()));
    }
    let docs: Vec<Document> = docs.into_iter().map(|d| d.with_prec(prec)).collect();
    let computed = compute(spec.command, &docs, prec)?;
    let report = Report { command: spec.command.name().into(), prec, inputs: docs, result: computed.result };
    let stdout = match spec.format {
        Format::Text => computed.text,
        Format::Json => serde_json::to_string_pretty(&report).unwrap() + "\n",
    };
    let code = if computed.inconclusive { EXIT_INCONCLUSIVE } else { EXIT_OK };
    Ok(Outcome { code, stdout, stderr: String::new() })
}

pub(crate) fn compute(command: Command, docs: &[Document], prec: usize) -> Result<Computed> {
    match command {
        Command::Invariants => invariants(&docs[0], prec),
        Command::Bernstein => bernstein(&docs[0], prec),
        Command::Canonical => canonical(&docs[0], prec),
        Command::Isom => isom(&docs[0], &docs[1], prec),
        Command::Invariance => invariance(&docs[0], prec),
        Command::Scan => scan(&docs[0], prec),
        Command::Verify => Err(Error::InvalidInput("verify cannot be nested".into())),
    }
}

/// Rank and invariants of the document's generator at one point.
fn classify_once(d: &Document, prec: usize) -> Result<PointReport> {
    let env = d.env(prec, &[])?;
    let x = d.generator(&env)?;
    let rep = scan_family(&[Vec::new()], d.rank(), |_| Ok(x.clone()));
    Ok(rep.points.into_iter().next().expect("one grid point"))
}

fn invariants(d: &Document, prec: usize) -> Result<Computed> {
    let pt = classify_once(d, prec)?;
    let declared = match d {
        Document::Theme(_) => Some(d.theme(&d.env(prec, &[])?)?.invariants().clone()),
        Document::Generator(_) => None,
    };
    let rank = pt.rank.as_ref().map(RankJson::from).unwrap_or(RankJson { lower: 0, upper: d.rank(), residual_precision: None });
    let space = pt.invariants.as_ref().and_then(|i| canonical_space(i).ok()).map(|s| s.shape());
    let out = InvariantsReport {
        rank,
        invariants: pt.invariants.as_ref().map(InvariantsJson::from),
        lambdas: pt.invariants.as_ref().map(|i| rs(&i.lambdas())),
        bernstein: pt.bernstein.as_deref().map(rs),
        declared_match: declared.as_ref().map(|dec| pt.invariants.as_ref() == Some(dec)),
        canonical_space: space,
        flags: pt.flags.clone(),
        error: pt.error.clone(),
    };
    let mut text = String::new();
    let r = &out.rank;
    if r.lower == d.rank() {
        writeln!(text, "thematic rank {} (certified)", r.lower).unwrap();
    } else if r.lower == r.upper {
        let order = r.residual_precision.map(|n| format!(" to order b^{n}")).unwrap_or_default();
        writeln!(text, "thematic rank {} (at least {} certified; the next iterate depends on the previous ones{order})", r.lower, r.lower)
            .unwrap();
    } else {
        writeln!(text, "thematic rank between {} and {} at this precision", r.lower, r.upper).unwrap();
    }
    match &pt.invariants {
        Some(inv) => {
            writeln!(text, "fundamental invariants: {inv}").unwrap();
            writeln!(text, "exponents: [{}]", rs(&inv.lambdas()).join(", ")).unwrap();
            if let Some(s) = &out.canonical_space {
                writeln!(text, "canonical space: {s}").unwrap();
            }
        }
        None => writeln!(text, "fundamental invariants: unavailable").unwrap(),
    }
    if let Some(m) = out.declared_match {
        writeln!(text, "declared invariants {}", if m { "confirmed" } else { "NOT confirmed" }).unwrap();
    }
    if let Some(e) = &pt.error {
        writeln!(text, "note: {e}").unwrap();
    }
    let inconclusive = pt.flags.iter().any(|f| f == "inconclusive");
    Ok(Computed { result: to_value(&out), text, inconclusive })
}

fn bernstein(d: &Document, prec: usize) -> Result<Computed> {
    let env = d.env(prec, &[])?;
    let x = d.generator(&env)?;
    let data = bernstein_from_generator(&x, d.rank())?;
    let inv = invariants_from_bernstein(&data.element, x.lambda())?;
    let mus = inv.lambdas();
    let out = BernsteinJson {
        element: data.element.to_string(),
        exponents: rs(&mus),
        polynomial: fmt_poly(&bernstein_polynomial(&mus), "x"),
        relations: data.s.iter().map(|s| s.to_string()).collect(),
        invariants: (&inv).into(),
    };
    let mut text = String::new();
    writeln!(text, "Bernstein element: {}", out.element).unwrap();
    writeln!(text, "factor exponents: [{}]", out.exponents.join(", ")).unwrap();
    writeln!(text, "Bernstein polynomial: {}", out.polynomial).unwrap();
    writeln!(text, "fundamental invariants: {inv}").unwrap();
    Ok(Computed { result: to_value(&out), text, inconclusive: false })
}

/// `c*s^e`, with `*log(s)` when `log`, in the expansion syntax.
fn s_term(c: &Rational, e: &Rational, log: bool) -> String {
    let s = if e.is_one() {
        "s".to_string()
    } else if e.is_integer() && *e >= Rational::zero() {
        format!("s^{}", r(e))
    } else {
        format!("s^({})", r(e))
    };
    let log = if log { "*log(s)" } else { "" };
    if c.is_one() {
        return format!("{s}{log}");
    }
    let coeff = if c.is_integer() { r(c) } else { format!("({})", r(c)) };
    format!("{coeff}*{s}{log}")
}

/// `alpha*s^(l2-1)*log(s) + c*s^(l1-2)`, readable by the expansion parser.
fn rank2_generator_text(l1: &Rational, p: usize, alpha: &Rational) -> Result<String> {
    let one = int(1);
    let low = l1 - &one;
    if p == 0 {
        return Ok(s_term(&low, &(&low - &one), true));
    }
    let l2 = l1 + int(p as i64 - 1);
    let c = abtheme::classify::c_rank2(l1, p)?;
    let log = s_term(alpha, &(&l2 - &one), true);
    // c = -gamma/p is always negative
    let constant = s_term(&-c, &(&low - &one), false);
    if alpha.is_zero() {
        return Ok(format!("-{constant}"));
    }
    Ok(format!("{log} - {constant}"))
}

fn canonical(d: &Document, prec: usize) -> Result<Computed> {
    let env = d.env(prec, &[])?;
    let (inv, given): (FundamentalInvariants, Option<Vec<TruncSeries>>) = match d {
        Document::Theme(_) => {
            let th = d.theme(&env)?;
            (th.invariants().clone(), Some(th.relations().to_vec()))
        }
        Document::Generator(_) => {
            let x = d.generator(&env)?;
            let data = bernstein_from_generator(&x, d.rank())?;
            (invariants_from_bernstein(&data.element, x.lambda())?, None)
        }
    };
    let space = canonical_space(&inv)?;
    let (canonical_point, reason) = match given {
        Some(s) => match CanonicalPoint::new(inv.clone(), s) {
            Ok(_) => (Some(true), None),
            Err(e) => (Some(false), Some(e.to_string())),
        },
        None => (None, None),
    };
    let rank2 = if inv.rank() == 2 {
        let x = d.generator(&env)?;
        let p = inv.p[0];
        let red = rank2_reduce(&x, &inv.lambda1, p)?;
        let alpha = red.alpha.clone().unwrap_or_else(Rational::zero);
        let mut rel = TruncSeries::one(p + 1);
        if p > 0 {
            rel.set_coefficient(p, alpha.clone())?;
        }
        Some(Rank2Json {
            alpha: red.alpha.as_ref().map(r),
            relation: rel.to_string(),
            generator: rank2_generator_text(&inv.lambda1, p, &alpha)?,
        })
    } else {
        None
    };
    let out = CanonicalJson {
        invariants: (&inv).into(),
        shape: space.shape(),
        affine_dim: space.affine_dim,
        torus_dim: space.torus_dim,
        factors: space
            .factors
            .iter()
            .map(|f| FactorJson { j: f.j, support: f.support.clone(), free: f.free.clone(), units: f.units.clone() })
            .collect(),
        canonical_point,
        reason,
        rank2,
    };
    let mut text = String::new();
    writeln!(text, "fundamental invariants: {inv}").unwrap();
    writeln!(text, "canonical space: {}", out.shape).unwrap();
    for f in &out.factors {
        let list = |v: &[usize]| v.iter().map(|e| format!("b^{e}")).collect::<Vec<_>>().join(", ");
        writeln!(text, "  S_{}: units [{}], free [{}]", f.j, list(&f.units), list(&f.free)).unwrap();
    }
    match (out.canonical_point, &out.reason) {
        (Some(true), _) => writeln!(text, "the relation series form a canonical point").unwrap(),
        (Some(false), Some(why)) => writeln!(text, "not a canonical point: {why}").unwrap(),
        _ => {}
    }
    if let Some(r2) = &out.rank2 {
        if let Some(a) = &r2.alpha {
            writeln!(text, "parameter alpha = {a}").unwrap();
        }
        writeln!(text, "canonical relation: {}", r2.relation).unwrap();
        writeln!(text, "canonical generator: {}", r2.generator).unwrap();
    }
    Ok(Computed { result: to_value(&out), text, inconclusive: false })
}

fn element_json(x: &ThemeElement) -> ElementJson {
    ElementJson { element: x.to_string(), prec: x.prec() }
}

fn isom(d1: &Document, d2: &Document, prec: usize) -> Result<Computed> {
    let e1 = d1.theme(&d1.env(prec, &[])?)?;
    let e2 = d2.theme(&d2.env(prec, &[])?)?;
    let out = isomorphism_test(&e1, &e2, &ClassifyOptions::default())?;
    let mut text = String::new();
    let json = match &out {
        IsomorphismOutcome::Isomorphic(w) => {
            let k = w.basis.len();
            let u = (k >= 2).then(|| w.basis[k - 1].comps[k - 2].to_string());
            writeln!(text, "isomorphic").unwrap();
            for (j, eps) in w.basis.iter().enumerate() {
                writeln!(text, "  eps{} = {eps}", j + 1).unwrap();
            }
            if let Some(u) = &u {
                writeln!(text, "witness U = {u}").unwrap();
            }
            IsomorphismJson {
                isomorphic: true,
                basis: Some(w.basis.iter().map(element_json).collect()),
                u,
                assignment: Some((&w.assignment).into()),
                cross_checked: w.cross_checked,
                distinguisher: None,
            }
        }
        IsomorphismOutcome::NotIsomorphic(dist) => {
            writeln!(text, "not isomorphic").unwrap();
            match dist {
                Distinguisher::Relations(o) => writeln!(text, "{o}").unwrap(),
                other => writeln!(text, "{other}").unwrap(),
            }
            IsomorphismJson {
                isomorphic: false,
                basis: None,
                u: None,
                assignment: None,
                cross_checked: false,
                distinguisher: Some(dist.into()),
            }
        }
    };
    Ok(Computed { result: to_value(&json), text, inconclusive: false })
}

fn invariance(d: &Document, prec: usize) -> Result<Computed> {
    let th = d.theme(&d.env(prec, &[])?)?;
    let out = invariance_test(&th, &ClassifyOptions::default())?;
    let mut text = String::new();
    let json = match &out {
        InvarianceOutcome::Invariant(w) => {
            writeln!(text, "invariant, witness x = {}", w.x).unwrap();
            InvarianceJson {
                invariant: true,
                witness: Some(element_json(&w.x)),
                assignment: Some((&w.assignment).into()),
                cross_checked: w.cross_checked,
                obstruction: None,
            }
        }
        InvarianceOutcome::NotInvariant(o) => {
            writeln!(text, "not invariant").unwrap();
            writeln!(text, "{o}").unwrap();
            InvarianceJson { invariant: false, witness: None, assignment: None, cross_checked: false, obstruction: Some(o.into()) }
        }
    };
    Ok(Computed { result: to_value(&json), text, inconclusive: false })
}

fn scan(d: &Document, prec: usize) -> Result<Computed> {
    let grid: Vec<GridPoint> = grid_points(d.grid())?;
    let eval = |p: &GridPoint| d.generator(&d.env(prec, p)?);
    let rep = scan_family(&grid, d.rank(), eval);
    // an expression that fails everywhere is an input error, not a result
    if rep.points.iter().all(|p| p.rank.is_none()) {
        eval(&rep.points[0].point)?;
    }
    let unclassified = rep.points.iter().any(|p| p.rank.is_none());
    let json = ScanJson::from(&rep);
    let mut text = String::new();
    writeln!(text, "{:<24} {:<8} {:<22} {:<28} flags", "point", "rank", "bernstein", "invariants").unwrap();
    for p in &rep.points {
        let rank = match &p.rank {
            Some(c) if c.is_exact() => c.lower.to_string(),
            Some(c) => format!("{}..{}", c.lower, c.upper),
            None => "-".into(),
        };
        let bern = p.bernstein.as_deref().map(|m| format!("[{}]", rs(m).join(", "))).unwrap_or_else(|| "-".into());
        let inv = p.invariants.as_ref().map(|i| i.to_string()).unwrap_or_else(|| "-".into());
        let mut flags = p.flags.join(",");
        if let Some(e) = &p.error {
            flags = if flags.is_empty() { format!("error: {e}") } else { format!("{flags}; error: {e}") };
        }
        writeln!(text, "{:<24} {:<8} {:<22} {:<28} {}", fmt_point(&p.point), rank, bern, inv, flags).unwrap();
    }
    writeln!(text, "strata:").unwrap();
    for (i, s) in rep.strata.iter().enumerate() {
        let rank = s.rank.map(|r| r.to_string()).unwrap_or_else(|| "?".into());
        let inv = s.invariants.as_ref().map(|i| i.to_string()).unwrap_or_else(|| "no invariants".into());
        let n = s.points.len();
        writeln!(text, "  {}: rank {rank}, {inv} ({n} point{})", i + 1, if n == 1 { "" } else { "s" }).unwrap();
    }
    if rep.bernstein_jump {
        let at: Vec<String> = rep
            .points
            .iter()
            .filter(|p| p.flags.iter().any(|f| f == "jump"))
            .map(|p| fmt_point(&p.point))
            .collect();
        writeln!(text, "Bernstein jump at {}", at.join("; ")).unwrap();
    }
    if rep.rank_jump {
        writeln!(text, "rank jump").unwrap();
    }
    if rep.inconclusive {
        writeln!(text, "some points are inconclusive").unwrap();
    }
    if unclassified {
        writeln!(text, "some points could not be evaluated").unwrap();
    }
    Ok(Computed { result: to_value(&json), text, inconclusive: rep.inconclusive || unclassified })
}
