//! Kernel cascade: solves `Z_{j-1} = T_{j-1}^{-1} (a - mu_j b) Z_j` level by
//! level inside a presentation, with scalar unknowns kept symbolic.
//!
//! Level `j` has the diagonal term `c_j b^{m_j} e_j` (`m_j = mu_j - lambda_j`)
//! and lower components solving
//! `b (b Y' - (mu_j - lambda_h) Y) = T_{j-1} Y^{(j-1)}_h - R_h Y^{(j)}_{h+1}`.
//! Every solvability condition becomes a linear relation between the
//! unknowns; free coefficients of the b-ODEs become new unknowns.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{check_certificate, SparseRow};
use crate::series::{fmt_rational, to_i64, Rational, TruncSeries};
use crate::theme::{ThemeElement, ThemePresentation};

const SCALAR_NAMES: [&str; 8] = ["ρ", "σ", "τ", "υ", "φ", "χ", "ψ", "ω"];
const SERIES_NAMES: [&str; 7] = ["T", "U", "V", "W", "X", "Y", "Z"];

/// A linear form in the cascade unknowns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinForm(pub BTreeMap<usize, Rational>);

impl LinForm {
    pub fn var(i: usize) -> Self {
        LinForm(BTreeMap::from([(i, Rational::one())]))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.0.get(&i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_scaled(&mut self, f: &Rational, other: &LinForm) {
        if f.is_zero() {
            return;
        }
        for (i, v) in &other.0 {
            let e = self.0.entry(*i).or_insert_with(Rational::zero);
            *e += f * v;
            if e.is_zero() {
                self.0.remove(i);
            }
        }
    }

    pub fn scaled(&self, f: &Rational) -> LinForm {
        let mut out = LinForm::default();
        out.add_scaled(f, self);
        out
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        self.0.iter().map(|(i, v)| v * &values[*i]).sum()
    }

    /// `3*ρ - 1/2*σ` style rendering.
    pub fn render(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (n, (i, v)) in self.0.iter().enumerate() {
            let neg = *v < Rational::zero();
            let mag = if neg { -v.clone() } else { v.clone() };
            if n == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !mag.is_one() {
                out.push_str(&fmt_rational(&mag));
                out.push('*');
            }
            out.push_str(&names[*i]);
        }
        out
    }
}

/// A scalar condition `form = 0` produced by the cascade.
#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    pub label: String,
    pub form: LinForm,
}

/// A derived constant term such as `T(0) = 1/3*σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Definition {
    pub name: String,
    pub form: LinForm,
}

#[derive(Clone, Debug)]
struct LinSeries(Vec<LinForm>);

impl LinSeries {
    fn zero(prec: usize) -> Self {
        LinSeries(vec![LinForm::default(); prec])
    }

    fn prec(&self) -> usize {
        self.0.len()
    }

    /// `s * self - t * other`, truncated to the common precision.
    fn combine(s: &TruncSeries, x: &LinSeries, t: &TruncSeries, y: &LinSeries) -> LinSeries {
        let prec = x.prec().min(y.prec()).min(s.prec()).min(t.prec());
        let mut out = LinSeries::zero(prec);
        for (n, slot) in out.0.iter_mut().enumerate() {
            for i in 0..=n {
                slot.add_scaled(&s.coeffs()[n - i], &x.0[i]);
                slot.add_scaled(&-t.coeffs()[n - i].clone(), &y.0[i]);
            }
        }
        out
    }

    fn eval(&self, values: &[Rational]) -> TruncSeries {
        TruncSeries::from_coeffs(self.0.iter().map(|f| f.eval(values)).collect(), self.prec())
    }
}

/// The solved cascade for a chain `(mu_1 .. mu_r; T_1 .. T_{r-1})`.
#[derive(Clone, Debug)]
pub struct Cascade {
    pub names: Vec<String>,
    /// Unknown of the diagonal term of each level, when admissible.
    pub diagonal: Vec<Option<usize>>,
    /// Relations in the order they arise.
    pub relations: Vec<Relation>,
    pub definitions: Vec<Definition>,
    /// Solvability conditions that fall beyond the working precision.
    pub unchecked: Vec<String>,
    rank: usize,
    comps: Vec<Vec<LinSeries>>,
}

fn series_label(n: usize, j: usize, h: usize) -> String {
    SERIES_NAMES.get(n).map(|s| s.to_string()).unwrap_or_else(|| format!("Y{}{}", j + 1, h + 1))
}

fn scaled_name(c: &Rational, name: &str) -> String {
    if c.is_one() {
        name.to_string()
    } else {
        format!("{}*{name}", fmt_rational(c))
    }
}

/// Runs the cascade for `mus`, `ts` inside `host` (levels use `e_1 .. e_r`).
pub fn run_cascade(host: &ThemePresentation, mus: &[Rational], ts: &[TruncSeries]) -> Result<Cascade> {
    let r = mus.len();
    if r == 0 || r > host.rank() || ts.len() + 1 != r {
        return Err(Error::InvalidInput(format!(
            "chain of length {r} with {} series does not fit a rank-{} presentation",
            ts.len(),
            host.rank()
        )));
    }
    let lambdas = host.invariants().lambdas();
    let prec = host.prec();
    let mut names: Vec<String> = Vec::new();
    let mut diagonal = Vec::with_capacity(r);
    let mut relations = Vec::new();
    let mut definitions = Vec::new();
    let mut unchecked = Vec::new();
    let mut comps: Vec<Vec<LinSeries>> = Vec::with_capacity(r);
    // how the constant term of each component is written in labels
    let mut labels: Vec<Vec<String>> = Vec::with_capacity(r);
    let mut series_count = 0;
    for j in 0..r {
        let mut level = vec![LinSeries::zero(prec); j + 1];
        let mut level_labels = vec![String::new(); j + 1];
        let m = to_i64(&(&mus[j] - &lambdas[j])).filter(|m| *m >= 0);
        let name = SCALAR_NAMES.get(j).map(|s| s.to_string()).unwrap_or_else(|| format!("c{}", j + 1));
        match m {
            Some(m) if (m as usize) < prec => {
                let v = names.len();
                names.push(name.clone());
                level[j].0[m as usize] = LinForm::var(v);
                level_labels[j] = if m == 0 { name } else { "0".into() };
                diagonal.push(Some(v));
            }
            Some(m) => {
                unchecked.push(format!("diagonal term b^{m} of level {} lies beyond precision {prec}", j + 1));
                level_labels[j] = "0".into();
                diagonal.push(None);
            }
            None => {
                level_labels[j] = "0".into();
                diagonal.push(None);
            }
        }
        for h in (0..j).rev() {
            let t = &ts[j - 1];
            let rel = &host.relations()[h];
            let rhs = LinSeries::combine(t, &comps[j - 1][h], rel, &level[h + 1]);
            let label = series_label(series_count, j, h);
            series_count += 1;
            if !rhs.0[0].is_zero() {
                let lhs = scaled_name(&t.coeffs()[0], &labels[j - 1][h]);
                let rhs_label = scaled_name(&rel.coeffs()[0], &level_labels[h + 1]);
                relations.push(Relation {
                    label: format!("{lhs} = {rhs_label} (constant term at e{}, level {})", h + 1, j + 1),
                    form: rhs.0[0].clone(),
                });
            }
            let g = &rhs.0[1..];
            let c = &mus[j] - &lambdas[h];
            let ci = to_i64(&c);
            let mut y = LinSeries::zero(g.len());
            for (n, gn) in g.iter().enumerate() {
                if ci == Some(n as i64) {
                    if !gn.is_zero() {
                        relations.push(Relation {
                            label: if n == 0 {
                                format!("coefficient of b^0 in b*{label}' must vanish")
                            } else {
                                format!("coefficient of b^{n} in b*{label}' - {n}*{label} must vanish")
                            },
                            form: gn.clone(),
                        });
                    }
                    let v = names.len();
                    names.push(format!("{label}_{n}"));
                    y.0[n] = LinForm::var(v);
                } else {
                    y.0[n] = gn.scaled(&(Rational::from_integer((n as i64).into()) - &c).recip());
                }
            }
            if let Some(ci) = ci {
                if ci >= g.len() as i64 {
                    unchecked.push(format!("coefficient of b^{ci} for {label} lies beyond precision {}", g.len()));
                }
            }
            if ci != Some(0) && y.prec() > 0 && !y.0[0].is_zero() {
                definitions.push(Definition { name: format!("{label}(0)"), form: y.0[0].clone() });
            }
            level[h] = y;
            level_labels[h] = format!("{label}(0)");
        }
        comps.push(level);
        labels.push(level_labels);
    }
    Ok(Cascade { names, diagonal, relations, definitions, unchecked, rank: host.rank(), comps })
}

impl Cascade {
    /// Relation rows followed by the normalization `var = 1`.
    pub fn rows(&self, normalize: usize) -> Vec<SparseRow> {
        let mut rows: Vec<SparseRow> = self.relations.iter().map(|r| form_row(&r.form, Rational::zero())).collect();
        rows.push(form_row(&LinForm::var(normalize), Rational::one()));
        rows
    }

    /// `Z_j` (0-based level) for the given values of the unknowns.
    pub fn element(&self, level: usize, values: &[Rational]) -> ThemeElement {
        let level_comps = &self.comps[level];
        let prec = level_comps.iter().map(|c| c.prec()).min().unwrap_or(1);
        let mut comps: Vec<TruncSeries> = level_comps.iter().map(|c| c.eval(values).truncate(prec)).collect();
        comps.resize(self.rank, TruncSeries::zero(prec));
        ThemeElement { comps }
    }

    /// Builds the obstruction from a Farkas certificate of [`Cascade::rows`].
    pub fn obstruction(&self, normalize: usize, certificate: &BTreeMap<usize, Rational>) -> Obstruction {
        let n = self.relations.len();
        let failing = certificate.keys().filter(|r| **r < n).max().copied();
        let chain_len = failing.map_or(0, |f| f + 1);
        let certificate = certificate
            .iter()
            .map(|(r, y)| (if *r == n { chain_len } else { *r }, y.clone()))
            .collect();
        Obstruction {
            reason: match failing {
                Some(f) => format!("relation {} cannot hold with {} = 1", self.relations[f].label, self.names[normalize]),
                None => format!("{} = 1 is incompatible with the relations", self.names[normalize]),
            },
            names: self.names.clone(),
            chain: self.relations[..chain_len].to_vec(),
            definitions: self.definitions.clone(),
            normalization: Some(normalize),
            certificate,
        }
    }
}

fn form_row(form: &LinForm, rhs: Rational) -> SparseRow {
    let mut row = SparseRow::new();
    for (i, v) in &form.0 {
        row.add_term(*i, v);
    }
    row.rhs = rhs;
    row
}

/// A failed search: the scalar relations that clash, with a checkable
/// Farkas combination.
#[derive(Clone, Debug, PartialEq)]
pub struct Obstruction {
    pub reason: String,
    pub names: Vec<String>,
    /// Cascade relations up to and including the failing one.
    pub chain: Vec<Relation>,
    pub definitions: Vec<Definition>,
    /// Unknown normalized to 1 (`None` when no unknown could be normalized).
    pub normalization: Option<usize>,
    /// Weights on `chain` (index `chain.len()` is the normalization row).
    pub certificate: BTreeMap<usize, Rational>,
}

impl Obstruction {
    /// The relation that fails last in the cascade.
    pub fn relation(&self) -> Option<&Relation> {
        self.chain.last()
    }

    /// Re-checks the certificate against the recorded relations.
    pub fn verify(&self) -> bool {
        let Some(norm) = self.normalization else {
            return self.certificate.is_empty();
        };
        let mut rows: Vec<SparseRow> = self.chain.iter().map(|r| form_row(&r.form, Rational::zero())).collect();
        rows.push(form_row(&LinForm::var(norm), Rational::one()));
        check_certificate(&rows, &self.certificate)
    }

    pub fn render_relation(&self, r: &Relation) -> String {
        format!("{} = 0   [{}]", r.form.render(&self.names), r.label)
    }
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.reason)?;
        for d in &self.definitions {
            writeln!(f, "  {} = {}", d.name, d.form.render(&self.names))?;
        }
        for r in &self.chain {
            writeln!(f, "  {}", self.render_relation(r))?;
        }
        if let Some(n) = self.normalization {
            write!(f, "  {} = 1", self.names[n])?;
        }
        Ok(())
    }
}
