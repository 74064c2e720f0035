//! The operator algebra generated by `a` and `b` with `a b - b a = b^2`.
//!
//! Operators are kept in normal form `sum_i c_i(b) a^i`, series to the left.
//! Homogeneous operators `sum_j c_j b^{k-j} a^j` get their own type because
//! right division by `a - mu b` and factorization reduce to scalar
//! recurrences on the `c_j`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::series::{fmt_rational, int, rising, Rational, TruncSeries};

/// A left module over the algebra: `b`-series act by multiplication and `a`
/// has its own action.
pub trait AbModule {
    type Element: Clone;

    fn a_act(&self, x: &Self::Element) -> Result<Self::Element>;
    fn series_mul(&self, s: &TruncSeries, x: &Self::Element) -> Self::Element;
    fn add(&self, x: &Self::Element, y: &Self::Element) -> Result<Self::Element>;
    /// Multiplication by a scalar, keeping the precision of `x`.
    fn scale(&self, c: &Rational, x: &Self::Element) -> Self::Element;
}

/// `sum_i c_i(b) a^i` in normal form.
#[derive(Clone, Debug)]
pub struct OreOperator {
    coeffs: Vec<TruncSeries>,
}

/// `delta(S) = b^2 S'`, the twist in `a S = S a + delta(S)`.
fn delta(s: &TruncSeries) -> TruncSeries {
    s.b2_derivative()
}

fn binomial(n: usize, k: usize) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc = acc * int((n - i) as i64) / int((i + 1) as i64);
    }
    acc
}

impl OreOperator {
    /// Builds an operator from the left coefficients of `a^0, a^1, ...`.
    pub fn new(coeffs: Vec<TruncSeries>) -> Self {
        let mut op = OreOperator { coeffs };
        op.trim();
        op
    }

    pub fn zero() -> Self {
        OreOperator { coeffs: Vec::new() }
    }

    /// The series `s` viewed as an operator of degree 0.
    pub fn series(s: TruncSeries) -> Self {
        Self::new(vec![s])
    }

    /// The operator `a`.
    pub fn a(prec: usize) -> Self {
        Self::new(vec![TruncSeries::zero(prec), TruncSeries::one(prec)])
    }

    /// The operator `b`.
    pub fn b(prec: usize) -> Self {
        Self::series(TruncSeries::monomial(Rational::one(), 1, prec))
    }

    /// `a - mu b`.
    pub fn linear(mu: &Rational, prec: usize) -> Self {
        Self::new(vec![TruncSeries::monomial(-mu.clone(), 1, prec), TruncSeries::one(prec)])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    /// Highest power of `a` with a non-zero coefficient; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[TruncSeries] {
        &self.coeffs
    }

    /// Coefficient of `a^i`, zero series (at `prec`) beyond the degree.
    pub fn coeff(&self, i: usize, prec: usize) -> TruncSeries {
        self.coeffs.get(i).cloned().unwrap_or_else(|| TruncSeries::zero(prec))
    }

    /// Smallest precision among the coefficients.
    pub fn prec(&self) -> Option<usize> {
        self.coeffs.iter().map(|c| c.prec()).min()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let p = self.prec().into_iter().chain(other.prec()).min().unwrap_or(1);
        Self::new((0..n).map(|i| &self.coeff(i, p) + &other.coeff(i, p)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let p = self.prec().into_iter().chain(other.prec()).min().unwrap_or(1);
        Self::new((0..n).map(|i| &self.coeff(i, p) - &other.coeff(i, p)).collect())
    }

    /// Left multiplication by a series.
    pub fn left_scale(&self, s: &TruncSeries) -> Self {
        Self::new(self.coeffs.iter().map(|c| s * c).collect())
    }

    /// Equality of every coefficient to the shared precision.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

/// Normal-form product, pushing `a` rightward with
/// `a^i d = sum_l C(i,l) delta^l(d) a^{i-l}`.
pub fn ore_mul(left: &OreOperator, right: &OreOperator) -> OreOperator {
    let (Some(dl), Some(dr)) = (left.degree(), right.degree()) else {
        return OreOperator::zero();
    };
    let p = left.prec().unwrap().min(right.prec().unwrap());
    let mut out = vec![TruncSeries::zero(p); dl + dr + 1];
    for (j, d) in right.coeffs.iter().enumerate() {
        // powers[l] = delta^l(d)
        let mut powers = vec![d.truncate(p)];
        for _ in 0..dl {
            let next = delta(powers.last().unwrap());
            powers.push(next);
        }
        for (i, c) in left.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (l, dl_d) in powers.iter().enumerate().take(i + 1) {
                if dl_d.is_zero() {
                    continue;
                }
                let term = (c * dl_d).scale(&binomial(i, l));
                let slot = &mut out[i - l + j];
                *slot = &*slot + &term;
            }
        }
    }
    OreOperator::new(out)
}

/// Product of a list of operators, left to right.
pub fn ore_product(factors: &[OreOperator]) -> OreOperator {
    let mut it = factors.iter();
    let first = it.next().cloned().unwrap_or_else(OreOperator::zero);
    it.fold(first, |acc, f| ore_mul(&acc, f))
}

/// `P x = sum_i c_i (a^i x)` in a host module.
pub fn ore_apply<M: AbModule>(p: &OreOperator, x: &M::Element, host: &M) -> Result<M::Element> {
    let Some(d) = p.degree() else {
        return Ok(host.scale(&Rational::zero(), x));
    };
    let mut power = x.clone();
    let mut acc = host.series_mul(&p.coeffs[0], x);
    for i in 1..=d {
        power = host.a_act(&power)?;
        if !p.coeffs[i].is_zero() {
            acc = host.add(&acc, &host.series_mul(&p.coeffs[i], &power))?;
        }
    }
    Ok(acc)
}

impl fmt::Display for OreOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let a = match i {
                0 => String::new(),
                1 => "a".to_string(),
                _ => format!("a^{i}"),
            };
            let cs = c.to_string();
            terms.push(match (i, c.is_constant() && c.coeffs()[0].is_one()) {
                (0, _) => cs,
                (_, true) => a,
                _ => format!("({cs})*{a}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// `sum_j c_j b^{k-j} a^j` with rational `c_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousOperator {
    coeffs: Vec<Rational>,
}

impl HomogeneousOperator {
    /// From `c_0 .. c_k`; the degree is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "homogeneous operator needs at least c_0");
        HomogeneousOperator { coeffs }
    }

    /// `a - mu b`.
    pub fn linear(mu: &Rational) -> Self {
        Self::new(vec![-mu.clone(), Rational::one()])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().unwrap().is_one()
    }

    /// Expands to a normal-form operator with series coefficients at `prec`.
    pub fn to_ore(&self, prec: usize) -> OreOperator {
        let k = self.degree();
        OreOperator::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| TruncSeries::monomial(c.clone(), k - j, prec))
                .collect(),
        )
    }

    /// Reads a normal-form operator back, if it is homogeneous of degree `k`.
    pub fn from_ore(op: &OreOperator) -> Option<Self> {
        let k = op.degree()?;
        let mut coeffs = Vec::with_capacity(k + 1);
        for (j, c) in op.coeffs().iter().enumerate() {
            let m = k - j;
            if m >= c.prec() {
                return None;
            }
            let cj = c.coeffs()[m].clone();
            if c.coeffs().iter().enumerate().any(|(i, x)| i != m && !x.is_zero()) {
                return None;
            }
            coeffs.push(cj);
        }
        Some(Self::new(coeffs))
    }

    /// Product of two homogeneous operators (degrees add).
    pub fn mul(&self, other: &Self) -> Self {
        let k = self.degree() + other.degree();
        let prod = ore_mul(&self.to_ore(k + 2), &other.to_ore(k + 2));
        Self::from_ore(&prod).expect("product of homogeneous operators is homogeneous")
    }

    /// `(a - mu_1 b) ... (a - mu_k b)`.
    pub fn from_factors(mus: &[Rational]) -> Self {
        mus.iter()
            .map(HomogeneousOperator::linear)
            .reduce(|acc, f| acc.mul(&f))
            .unwrap_or_else(|| Self::new(vec![Rational::one()]))
    }

    /// Value of the symbol `f_P(mu) = sum_j c_j mu (mu+1) ... (mu+j-1)`.
    ///
    /// `P u = f_P(mu) b^k u` for any `u` with `a u = mu b u`, which is why
    /// the remainder of right division by `a - mu b` equals `f_P(mu) b^k`.
    pub fn symbol_at(&self, mu: &Rational) -> Rational {
        self.coeffs.iter().enumerate().map(|(j, c)| c * rising(mu, j)).sum()
    }

    /// Coefficients (in `x`, ascending) of the symbol polynomial `f_P(x)`.
    pub fn symbol_polynomial(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.coeffs.len()];
        // rising(x, j) expanded incrementally: r_{j+1}(x) = r_j(x) (x + j)
        let mut r = vec![Rational::one()];
        for (j, c) in self.coeffs.iter().enumerate() {
            for (i, ri) in r.iter().enumerate() {
                out[i] += c * ri;
            }
            let mut next = vec![Rational::zero(); r.len() + 1];
            for (i, ri) in r.iter().enumerate() {
                next[i + 1] += ri;
                next[i] += ri * int(j as i64);
            }
            r = next;
        }
        out
    }
}

impl fmt::Display for HomogeneousOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.degree();
        let mut out = String::new();
        for j in (0..=k).rev() {
            let c = &self.coeffs[j];
            if c.is_zero() {
                continue;
            }
            let mut mono = Vec::new();
            match k - j {
                0 => {}
                1 => mono.push("b".to_string()),
                m => mono.push(format!("b^{m}")),
            }
            match j {
                0 => {}
                1 => mono.push("a".to_string()),
                i => mono.push(format!("a^{i}")),
            }
            let mag = c.abs();
            let body = if mono.is_empty() {
                fmt_rational(&mag)
            } else if mag.is_one() {
                mono.join("*")
            } else {
                format!("{}*{}", fmt_rational(&mag), mono.join("*"))
            };
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        write!(f, "{out}")
    }
}

/// Right division `P = Q (a - mu b) + r b^k`.
///
/// Uses `a^j b = sum_l j!/(j-l)! b^{l+1} a^{j-l}` (the iterated form of
/// `(a - nu b) b = b (a - (nu - 1) b)`), giving the synthetic division
/// `q_{i-1} = c_i + mu sum_{j >= i} q_j j!/i!` and
/// `r = c_0 + mu sum_j q_j j!`.
pub fn right_divide(p: &HomogeneousOperator, mu: &Rational) -> Result<(HomogeneousOperator, Rational)> {
    let k = p.degree();
    if k == 0 {
        return Err(Error::InvalidInput("right division needs degree at least 1".into()));
    }
    let c = p.coeffs();
    let mut q = vec![Rational::zero(); k];
    for i in (1..=k).rev() {
        // sum_{j=i}^{k-1} q_j j!/i!
        let mut acc = Rational::zero();
        let mut fall = Rational::one();
        for (j, qj) in q.iter().enumerate().skip(i) {
            if j > i {
                fall *= int(j as i64);
            }
            acc += qj * &fall;
        }
        q[i - 1] = &c[i] + mu * acc;
    }
    let mut acc = Rational::zero();
    let mut fact = Rational::one();
    for (j, qj) in q.iter().enumerate() {
        if j > 0 {
            fact *= int(j as i64);
        }
        acc += qj * &fact;
    }
    let r = &c[0] + mu * acc;
    Ok((HomogeneousOperator::new(q), r))
}

/// Rational roots of a polynomial (ascending coefficients) lying in `class + Z`.
fn roots_in_class(poly: &[Rational], class: &Rational) -> Vec<Rational> {
    let mut poly: Vec<Rational> = poly.to_vec();
    while poly.len() > 1 && poly.last().unwrap().is_zero() {
        poly.pop();
    }
    let deg = poly.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = poly[deg].abs();
    // Cauchy bound on |root|.
    let bound: Rational = Rational::one() + poly[..deg].iter().map(|c| c.abs() / &lead).fold(Rational::zero(), |m, x| if x > m { x } else { m });
    let eval = |x: &Rational| poly.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c);
    let frac = class - class.floor();
    let mut x = -bound.ceil() - Rational::one() + &frac;
    let hi = bound.ceil() + Rational::one();
    let mut roots = Vec::new();
    while x <= hi {
        if eval(&x).is_zero() {
            roots.push(x.clone());
        }
        x += Rational::one();
    }
    roots
}

/// Splits a monic homogeneous operator into `(a - mu_1 b) ... (a - mu_k b)`
/// with every `mu_j` in `class + Z`.
///
/// At each step the rightmost factor uses the largest admissible root of the
/// remainder polynomial, which yields `mu_j + j` non-decreasing.
pub fn factor_homogeneous(p: &HomogeneousOperator, class: &Rational) -> Result<Vec<Rational>> {
    if !p.is_monic() {
        return Err(Error::FactorizationFailed("operator is not monic".into()));
    }
    let mut rest = p.clone();
    let mut mus = Vec::new();
    while rest.degree() > 0 {
        let roots = roots_in_class(&rest.symbol_polynomial(), class);
        let Some(mu) = roots.into_iter().last() else {
            return Err(Error::FactorizationFailed(format!(
                "no root in the class {} + Z for the degree-{} operator {}",
                fmt_rational(class),
                rest.degree(),
                rest
            )));
        };
        let (q, r) = right_divide(&rest, &mu)?;
        debug_assert!(r.is_zero());
        mus.push(mu);
        rest = q;
    }
    mus.reverse();
    Ok(mus)
}

/// Coefficients (ascending in `x`) of the Bernstein polynomial `prod_j (x + mu_j)`.
pub fn bernstein_polynomial(mus: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::one()];
    for mu in mus {
        let mut next = vec![Rational::zero(); out.len() + 1];
        for (i, c) in out.iter().enumerate() {
            next[i + 1] += c;
            next[i] += c * mu;
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    fn s(c: &[i64], p: usize) -> TruncSeries {
        TruncSeries::from_ints(c, p)
    }

    #[test]
    fn commutation_rule() {
        let p = 8;
        let ab = ore_mul(&OreOperator::a(p), &OreOperator::b(p));
        let expect = OreOperator::new(vec![s(&[0, 0, 1], p), s(&[0, 1], p)]);
        assert!(ab.agrees_with(&expect));
    }

    #[test]
    fn a_times_series() {
        let p = 10;
        let sv = s(&[1, 0, 0, 1], p);
        let prod = ore_mul(&OreOperator::a(p), &OreOperator::series(sv.clone()));
        // b^2 (1 + b^3)' = 3 b^4
        let expect = OreOperator::new(vec![TruncSeries::monomial(int(3), 4, p), sv]);
        assert!(prod.agrees_with(&expect));
    }

    #[test]
    fn product_of_two_linear_factors() {
        let (m1, m2) = (rat(5, 2), rat(7, 3));
        let prod = HomogeneousOperator::linear(&m1).mul(&HomogeneousOperator::linear(&m2));
        let expect = HomogeneousOperator::new(vec![&m2 * (&m1 - int(1)), -(&m1 + &m2), int(1)]);
        assert_eq!(prod, expect);
    }

    #[test]
    fn right_division_examples() {
        let (m1, m2) = (rat(3, 2), rat(9, 4));
        let p = HomogeneousOperator::from_factors(&[m1.clone(), m2.clone()]);
        let (q, r) = right_divide(&p, &m2).unwrap();
        assert_eq!(q, HomogeneousOperator::linear(&m1));
        assert!(r.is_zero());

        let lam = rat(1, 3);
        let (q, r) = right_divide(&HomogeneousOperator::linear(&lam), &lam).unwrap();
        assert_eq!(q, HomogeneousOperator::new(vec![int(1)]));
        assert!(r.is_zero());
        let (_, r) = right_divide(&HomogeneousOperator::linear(&lam), &(&lam + int(1))).unwrap();
        assert_eq!(r, int(1));
    }

    #[test]
    fn symbol_polynomial_matches_pointwise_symbol() {
        let p = HomogeneousOperator::new(vec![rat(1, 2), int(-3), int(2), int(1)]);
        let poly = p.symbol_polynomial();
        for x in [-3i64, 0, 2, 7] {
            let xv = int(x);
            let v = poly.iter().rev().fold(Rational::zero(), |acc, c| acc * &xv + c);
            assert_eq!(v, p.symbol_at(&xv));
        }
    }

    #[test]
    fn factor_two_factors() {
        let (l1, p1) = (rat(7, 2), 3i64);
        let l2 = &l1 + int(p1 - 1);
        let op = HomogeneousOperator::new(vec![&l2 * (&l1 - int(1)), -(&l1 * int(2) + int(p1 - 1)), int(1)]);
        assert_eq!(factor_homogeneous(&op, &rat(1, 2)).unwrap(), vec![l1, l2]);
    }

    #[test]
    fn factor_failure_outside_class() {
        let op = HomogeneousOperator::linear(&rat(1, 3));
        assert!(matches!(factor_homogeneous(&op, &rat(1, 2)), Err(Error::FactorizationFailed(_))));
    }

    #[test]
    fn bernstein_polynomial_of_factors() {
        let b = bernstein_polynomial(&[int(1), int(2)]);
        assert_eq!(b, vec![int(2), int(3), int(1)]);
    }
}
