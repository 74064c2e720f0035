//! Theme presentations, the canonical parameter space and the bridge to
//! the module of log-asymptotic expansions.
//!
//! A rank-`k` presentation has generators `e_1 .. e_k` and relations
//! `(a - lambda_1 b) e_1 = 0`, `(a - lambda_{j+1} b) e_{j+1} = R_j e_j`.

use std::fmt;

use num_traits::{One, Zero};

use crate::ab_algebra::{factor_homogeneous, ore_apply, ore_product, AbModule, HomogeneousOperator, OreOperator};
use crate::error::{Error, Result};
use crate::linalg::{SeriesElimination, SeriesSolveFailure};
use crate::series::{fmt_rational, int, to_i64, Rational, TruncSeries};
use crate::xi::{exponent_class, power_monomial, solve_shifted_inverse, Xi, XiElement};

/// `lambda_1` and the gaps `p_1 .. p_{k-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FundamentalInvariants {
    pub lambda1: Rational,
    pub p: Vec<usize>,
}

impl FundamentalInvariants {
    pub fn new(lambda1: Rational, p: Vec<usize>) -> Self {
        FundamentalInvariants { lambda1, p }
    }

    pub fn rank(&self) -> usize {
        self.p.len() + 1
    }

    /// `lambda_1 .. lambda_k` with `lambda_{j+1} = lambda_j + p_j - 1`.
    pub fn lambdas(&self) -> Vec<Rational> {
        let mut out = vec![self.lambda1.clone()];
        for p in &self.p {
            let next = out.last().unwrap() + int(*p as i64 - 1);
            out.push(next);
        }
        out
    }

    /// Representative of the exponent class in `(0, 1]`.
    pub fn class(&self) -> Rational {
        exponent_class(&self.lambda1)
    }

    /// The standing hypothesis `lambda_1 > k - 1` of the canonical family.
    pub fn check_canonical(&self) -> Result<()> {
        if self.lambda1 <= int(self.rank() as i64 - 1) {
            return Err(Error::InvalidCanonicalPoint(format!(
                "lambda_1 = {} must exceed k - 1 = {}",
                fmt_rational(&self.lambda1),
                self.rank() - 1
            )));
        }
        Ok(())
    }

    /// `q_j = p_j + ... + p_{j+h}` with `h` minimal so that `q_j >= k - j`
    /// (1-based `j`); `None` when the full tail sum stays below `k - j`.
    pub fn q(&self, j: usize) -> Option<usize> {
        let k = self.rank();
        let mut acc = 0;
        for p in &self.p[j - 1..] {
            acc += p;
            if acc >= k - j {
                return Some(acc);
            }
        }
        None
    }

    /// Bernstein exponents `[lambda_1, ..., lambda_k]`.
    pub fn bernstein_exponents(&self) -> Vec<Rational> {
        self.lambdas()
    }
}

impl fmt::Display for FundamentalInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.p.iter().map(|p| p.to_string()).collect();
        write!(f, "lambda1 = {}, p = [{}]", fmt_rational(&self.lambda1), ps.join(", "))
    }
}

/// Description of one factor `W_j` of the canonical space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorSpace {
    pub j: usize,
    /// Exponents of the monomials spanning `V_j`.
    pub support: Vec<usize>,
    pub q: Option<usize>,
    /// The exponent `p_j` whose coefficient must be non-zero.
    pub nonzero_exponent: usize,
    /// Exponents carrying a free coefficient in `C`.
    pub free: Vec<usize>,
    /// Exponents carrying a coefficient in `C*`.
    pub units: Vec<usize>,
}

/// `S(lambda_1, p)` as a product `C^m x (C*)^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalSpace {
    pub invariants: FundamentalInvariants,
    pub factors: Vec<FactorSpace>,
    pub affine_dim: usize,
    pub torus_dim: usize,
}

impl CanonicalSpace {
    pub fn is_point(&self) -> bool {
        self.affine_dim == 0 && self.torus_dim == 0
    }

    pub fn shape(&self) -> String {
        let mut parts = Vec::new();
        if self.torus_dim > 0 {
            parts.push(if self.torus_dim == 1 { "C*".to_string() } else { format!("(C*)^{}", self.torus_dim) });
        }
        if self.affine_dim > 0 {
            parts.push(if self.affine_dim == 1 { "C".to_string() } else { format!("C^{}", self.affine_dim) });
        }
        if parts.is_empty() {
            "point".to_string()
        } else {
            parts.join(" x ")
        }
    }
}

/// Computes the supports `V_j`, constraints `W_j` and the product shape.
pub fn canonical_space(inv: &FundamentalInvariants) -> Result<CanonicalSpace> {
    inv.check_canonical()?;
    let k = inv.rank();
    let mut factors = Vec::new();
    let (mut m, mut n) = (0, 0);
    for j in 1..k {
        let q = inv.q(j);
        let mut support: Vec<usize> = (0..k - j).collect();
        if let Some(q) = q {
            support.push(q);
        }
        let pj = inv.p[j - 1];
        let mut free = Vec::new();
        let mut units = Vec::new();
        for &e in &support[1..] {
            if e == pj {
                units.push(e);
            } else {
                free.push(e);
            }
        }
        m += free.len();
        n += units.len();
        factors.push(FactorSpace { j, support, q, nonzero_exponent: pj, free, units });
    }
    Ok(CanonicalSpace { invariants: inv.clone(), factors, affine_dim: m, torus_dim: n })
}

/// A point `(S_1, ..., S_{k-1})` of the canonical space.
#[derive(Clone, Debug)]
pub struct CanonicalPoint {
    pub invariants: FundamentalInvariants,
    pub s: Vec<TruncSeries>,
}

impl CanonicalPoint {
    /// Validates membership in `W_1 x ... x W_{k-1}`.
    pub fn new(invariants: FundamentalInvariants, s: Vec<TruncSeries>) -> Result<Self> {
        let space = canonical_space(&invariants)?;
        if s.len() != space.factors.len() {
            return Err(Error::InvalidCanonicalPoint(format!(
                "expected {} relation series, got {}",
                space.factors.len(),
                s.len()
            )));
        }
        for (f, sj) in space.factors.iter().zip(&s) {
            if sj.coeffs()[0] != Rational::one() {
                return Err(Error::InvalidCanonicalPoint(format!("S_{} has constant term {}, expected 1", f.j, sj.coeffs()[0])));
            }
            for (e, c) in sj.coeffs().iter().enumerate() {
                if !c.is_zero() && !f.support.contains(&e) {
                    return Err(Error::InvalidCanonicalPoint(format!("S_{} has a term b^{e} outside its support", f.j)));
                }
            }
            let lead = sj.coefficient(f.nonzero_exponent).map_err(|_| {
                Error::InvalidCanonicalPoint(format!("S_{} is too short to hold b^{}", f.j, f.nonzero_exponent))
            })?;
            if lead.is_zero() {
                return Err(Error::InvalidCanonicalPoint(format!(
                    "coefficient of b^{} in S_{} must be non-zero",
                    f.nonzero_exponent, f.j
                )));
            }
        }
        Ok(CanonicalPoint { invariants, s })
    }
}

/// Generators `e_1 .. e_k` with relation series `R_1 .. R_{k-1}`.
#[derive(Clone, Debug)]
pub struct ThemePresentation {
    invariants: FundamentalInvariants,
    relations: Vec<TruncSeries>,
    prec: usize,
}

/// `sum_j U_j(b) e_j` in a presentation; `comps[j-1]` is `U_j`.
#[derive(Clone, Debug)]
pub struct ThemeElement {
    pub comps: Vec<TruncSeries>,
}

impl ThemePresentation {
    /// Checks that every `R_j` is a unit and that there are `k - 1` of them.
    pub fn new(invariants: FundamentalInvariants, relations: Vec<TruncSeries>, prec: usize) -> Result<Self> {
        if relations.len() + 1 != invariants.rank() {
            return Err(Error::InvalidInput(format!(
                "rank {} needs {} relation series, got {}",
                invariants.rank(),
                invariants.rank() - 1,
                relations.len()
            )));
        }
        if prec < 2 {
            return Err(Error::PrecisionTooLow { needed: 2, prec });
        }
        for (j, r) in relations.iter().enumerate() {
            if r.coeffs()[0].is_zero() {
                return Err(Error::InvalidInput(format!("relation series R_{} is not a unit", j + 1)));
            }
        }
        let relations = relations.iter().map(|r| TruncSeries::from_coeffs(r.coeffs().to_vec(), prec)).collect();
        Ok(ThemePresentation { invariants, relations, prec })
    }

    pub fn invariants(&self) -> &FundamentalInvariants {
        &self.invariants
    }

    pub fn rank(&self) -> usize {
        self.invariants.rank()
    }

    pub fn relations(&self) -> &[TruncSeries] {
        &self.relations
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    /// Same presentation at another precision (relations re-padded or cut).
    pub fn with_prec(&self, prec: usize) -> Result<Self> {
        Self::new(self.invariants.clone(), self.relations.clone(), prec)
    }

    /// `(a - lambda_1 b) R_1^{-1} (a - lambda_2 b) ... R_{k-1}^{-1} (a - lambda_k b)`.
    pub fn defining_operator(&self) -> Result<OreOperator> {
        operator_chain(&self.invariants.lambdas(), &self.relations, self.prec)
    }

    pub fn zero(&self) -> ThemeElement {
        ThemeElement { comps: vec![TruncSeries::zero(self.prec); self.rank()] }
    }

    /// The generator `e_j` (1-based).
    pub fn basis(&self, j: usize) -> ThemeElement {
        let mut x = self.zero();
        x.comps[j - 1] = TruncSeries::one(self.prec);
        x
    }

    /// `a (U e_j) = lambda_j b U e_j + b^2 U' e_j + U R_{j-1} e_{j-1}`.
    pub fn a_apply(&self, x: &ThemeElement) -> Result<ThemeElement> {
        let k = self.rank();
        if x.comps.len() != k {
            return Err(Error::Mismatch(format!("element has {} components, theme has rank {k}", x.comps.len())));
        }
        let lambdas = self.invariants.lambdas();
        let mut comps = Vec::with_capacity(k);
        for j in 0..k {
            let u = &x.comps[j];
            let mut out = &u.shift(1).scale(&lambdas[j]) + &u.b2_derivative();
            if j + 1 < k {
                out = &out + &(&x.comps[j + 1] * &self.relations[j]);
            }
            comps.push(out);
        }
        Ok(ThemeElement { comps })
    }

    /// Lowest index `m` with the element in `F_m` (0 for the zero element).
    pub fn filtration_level(&self, x: &ThemeElement) -> usize {
        x.comps.iter().rposition(|c| !c.is_zero()).map_or(0, |j| j + 1)
    }
}

/// `(a - mu_1 b) T_1^{-1} (a - mu_2 b) ... T_{r-1}^{-1} (a - mu_r b)`.
pub fn operator_chain(mus: &[Rational], ts: &[TruncSeries], prec: usize) -> Result<OreOperator> {
    let mut factors = Vec::with_capacity(2 * mus.len());
    for (i, mu) in mus.iter().enumerate() {
        factors.push(OreOperator::linear(mu, prec));
        if i < ts.len() && i + 1 < mus.len() {
            factors.push(OreOperator::series(ts[i].truncate(prec).invert()?));
        }
    }
    Ok(ore_product(&factors))
}

impl AbModule for ThemePresentation {
    type Element = ThemeElement;

    fn a_act(&self, x: &ThemeElement) -> Result<ThemeElement> {
        self.a_apply(x)
    }

    fn series_mul(&self, s: &TruncSeries, x: &ThemeElement) -> ThemeElement {
        ThemeElement { comps: x.comps.iter().map(|u| s * u).collect() }
    }

    fn scale(&self, c: &Rational, x: &ThemeElement) -> ThemeElement {
        ThemeElement { comps: x.comps.iter().map(|u| u.scale(c)).collect() }
    }

    fn add(&self, x: &ThemeElement, y: &ThemeElement) -> Result<ThemeElement> {
        if x.comps.len() != y.comps.len() {
            return Err(Error::Mismatch("elements of different rank".into()));
        }
        Ok(ThemeElement { comps: x.comps.iter().zip(&y.comps).map(|(u, v)| u + v).collect() })
    }
}

impl ThemeElement {
    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn sub(&self, other: &ThemeElement) -> ThemeElement {
        ThemeElement { comps: self.comps.iter().zip(&other.comps).map(|(u, v)| u - v).collect() }
    }

    /// Smallest precision among components.
    pub fn prec(&self) -> usize {
        self.comps.iter().map(|c| c.prec()).min().unwrap_or(1)
    }
}

impl fmt::Display for ThemeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (j, u) in self.comps.iter().enumerate().rev() {
            let Some(v) = u.valuation() else { continue };
            let e = format!("e{}", j + 1);
            let single = u.coeffs().iter().skip(v + 1).all(|c| c.is_zero());
            let (neg, body) = if single {
                let c = &u.coeffs()[v];
                let neg = *c < Rational::zero();
                let mag = if neg { -c.clone() } else { c.clone() };
                let mut parts = Vec::new();
                if !mag.is_one() {
                    parts.push(fmt_rational(&mag));
                }
                match v {
                    0 => {}
                    1 => parts.push("b".into()),
                    _ => parts.push(format!("b^{v}")),
                }
                parts.push(e);
                (neg, parts.join("*"))
            } else {
                (false, format!("({u})*{e}"))
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        write!(f, "{out}")
    }
}

/// The presentation `E(sigma)` and its defining operator `P(sigma)`.
pub fn build_theme(sigma: &CanonicalPoint, prec: usize) -> Result<(ThemePresentation, OreOperator)> {
    let e = ThemePresentation::new(sigma.invariants.clone(), sigma.s.clone(), prec)?;
    let p = e.defining_operator()?;
    Ok((e, p))
}

/// `F_j`: generators `e_1 .. e_j`.
pub fn subtheme_f(j: usize, e: &ThemePresentation) -> Result<ThemePresentation> {
    let k = e.rank();
    if j == 0 || j > k {
        return Err(Error::InvalidInput(format!("sub-theme index {j} outside 1..={k}")));
    }
    let inv = FundamentalInvariants::new(e.invariants.lambda1.clone(), e.invariants.p[..j - 1].to_vec());
    ThemePresentation::new(inv, e.relations[..j - 1].to_vec(), e.prec)
}

/// `E / F_j`: classes of `e_{j+1} .. e_k`.
pub fn quotient_theme(j: usize, e: &ThemePresentation) -> Result<ThemePresentation> {
    let k = e.rank();
    if j >= k {
        return Err(Error::InvalidInput(format!("quotient index {j} outside 0..{k}")));
    }
    let lambdas = e.invariants.lambdas();
    let inv = FundamentalInvariants::new(lambdas[j].clone(), e.invariants.p[j..].to_vec());
    ThemePresentation::new(inv, e.relations[j..].to_vec(), e.prec)
}

/// Images of `e_1 .. e_k` in the expansion module; `phi` is the image of `e_k`.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub images: Vec<XiElement>,
}

impl Embedding {
    pub fn phi(&self) -> &XiElement {
        self.images.last().unwrap()
    }
}

/// Realizes a presentation inside the expansion module.
///
/// Seed `e_1 -> s^{lambda_1 - 1}`, then `e_{j+1} -> x` with
/// `(a - lambda_{j+1} b) x = R_j e_j`, solved by [`solve_shifted_inverse`].
/// The result has precision `prec - (k - 1)`; the defining operator is
/// checked to annihilate it and each new leading coefficient
/// `b^{q} e_{lambda,j}` is checked to be non-zero.
pub fn embed_into_xi(e: &ThemePresentation) -> Result<Embedding> {
    let inv = e.invariants();
    let k = inv.rank();
    let lambda = inv.class();
    let lambdas = inv.lambdas();
    let prec = e.prec();
    if prec < 2 * k + 2 {
        return Err(Error::PrecisionTooLow { needed: 2 * k + 2, prec });
    }
    let n = k - 1;
    let mut images = vec![power_monomial(&lambdas[0], 0, &lambda, n, prec)?];
    for j in 1..k {
        let q = to_i64(&(&lambdas[j] - &lambda)).ok_or_else(|| Error::InvalidInput("exponents leave the class".into()))?;
        if q < 0 {
            return Err(Error::InvalidCanonicalPoint(format!(
                "lambda_{} = {} lies below the class representative",
                j + 1,
                fmt_rational(&lambdas[j])
            )));
        }
        let y = images[j - 1].series_mul(&e.relations()[j - 1]);
        let x = solve_shifted_inverse(&y, q)?.widen(n);
        let q = q as usize;
        if q >= x.prec() {
            return Err(Error::PrecisionExhausted(format!("leading coefficient b^{q} of e_{} beyond precision", j + 1)));
        }
        if x.coefficient(j, q)?.is_zero() {
            return Err(Error::PrecisionExhausted(format!("leading coefficient of b^{q} e_(lambda,{j}) vanishes")));
        }
        images.push(x);
    }
    let emb = Embedding { images };
    let residual = ore_apply(&e.defining_operator()?, emb.phi(), &Xi)?;
    if !residual.is_zero() {
        return Err(Error::InvalidInput(format!("defining operator does not annihilate the embedding: {residual}")));
    }
    Ok(emb)
}

/// Relation series and Bernstein element of a `k`-thematic generator.
#[derive(Clone, Debug)]
pub struct BernsteinData {
    /// `S_0 .. S_{k-1}` with `a^k phi = sum_j S_j a^j phi`.
    pub s: Vec<TruncSeries>,
    pub element: HomogeneousOperator,
    pub pivot_valuations: Vec<usize>,
}

/// The matrix with columns `a^i phi` (rows = log components) and `a^k phi`.
pub fn iterate_matrix(phi: &XiElement, k: usize) -> Result<(Vec<Vec<TruncSeries>>, Vec<TruncSeries>)> {
    let mut iterates = vec![phi.clone()];
    for _ in 0..k {
        let next = iterates.last().unwrap().a_apply()?;
        iterates.push(next);
    }
    let rows = phi.log_bound() + 1;
    let matrix = (0..rows).map(|h| (0..k).map(|i| iterates[i].comps()[h].clone()).collect()).collect();
    let rhs = (0..rows).map(|h| iterates[k].comps()[h].clone()).collect();
    Ok((matrix, rhs))
}

/// Solves `a^k phi = sum_j S_j a^j phi` and reads off `sigma_j` = coefficient
/// of `b^{k-j}` in `S_j`.
pub fn bernstein_from_generator(phi: &XiElement, k: usize) -> Result<BernsteinData> {
    if k == 0 {
        return Err(Error::InvalidInput("rank must be positive".into()));
    }
    let (matrix, rhs) = iterate_matrix(phi, k)?;
    let elim = SeriesElimination::new(matrix, Some(rhs))?;
    if elim.rank() < k {
        return Err(Error::NotThematic(format!("the iterates have rank {} < {k} to precision", elim.rank())));
    }
    let s = match elim.solve() {
        Ok(s) => s,
        Err(SeriesSolveFailure::Precision(msg)) => return Err(Error::PrecisionExhausted(msg)),
        Err(f) => return Err(Error::NotThematic(format!("a^{k} phi is not in the span: {f:?}"))),
    };
    let mut coeffs = Vec::with_capacity(k + 1);
    for (j, sj) in s.iter().enumerate() {
        let sigma = sj.coefficient(k - j).map_err(|_| {
            Error::PrecisionExhausted(format!("S_{j} known to order {} but b^{} is needed", sj.prec(), k - j))
        })?;
        coeffs.push(-sigma.clone());
    }
    coeffs.push(Rational::one());
    Ok(BernsteinData { s, element: HomogeneousOperator::new(coeffs), pivot_valuations: elim.pivot_valuations })
}

/// `lambda_1 = mu_1`, `p_j = mu_{j+1} - mu_j + 1`.
pub fn invariants_from_exponents(mus: &[Rational]) -> Result<FundamentalInvariants> {
    let mut p = Vec::with_capacity(mus.len().saturating_sub(1));
    for w in mus.windows(2) {
        let d = to_i64(&(&w[1] - &w[0] + int(1)))
            .filter(|d| *d >= 0)
            .ok_or_else(|| Error::FactorizationFailed("consecutive exponents do not give a gap p_j >= 0".into()))?;
        p.push(d as usize);
    }
    Ok(FundamentalInvariants::new(mus[0].clone(), p))
}

/// Factors the Bernstein element and converts the exponents to invariants.
pub fn invariants_from_bernstein(pb: &HomogeneousOperator, class: &Rational) -> Result<FundamentalInvariants> {
    invariants_from_exponents(&factor_homogeneous(pb, class)?)
}
