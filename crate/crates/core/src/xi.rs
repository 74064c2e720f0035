//! Formal log-asymptotic expansions `sum_j c_j(b) e_{lambda,j}` with
//! `e_{lambda,j} = s^{lambda-1} (Log s)^j / j!`.
//!
//! `a` is multiplication by `s` and `b` is the primitive vanishing at 0, so
//! `a (c e_j) = (lambda b c + b^2 c') e_j + b c e_{j-1}`.

use std::fmt;

use num_traits::{One, Zero};

use crate::ab_algebra::AbModule;
use crate::error::{Error, Result};
use crate::series::{fmt_rational, int, to_i64, Rational, TruncSeries};

/// An element of the module with a single exponent class `lambda in (0, 1]`.
#[derive(Clone, Debug)]
pub struct XiElement {
    lambda: Rational,
    comps: Vec<TruncSeries>,
}

/// The exponent class of `mu`, i.e. the representative in `(0, 1]`.
pub fn exponent_class(mu: &Rational) -> Rational {
    let c = mu - mu.floor();
    if c.is_zero() {
        Rational::one()
    } else {
        c
    }
}

fn check_lambda(lambda: &Rational) -> Result<()> {
    if *lambda <= Rational::zero() || *lambda > Rational::one() {
        return Err(Error::InvalidInput(format!("lambda = {} is not in (0, 1]", fmt_rational(lambda))));
    }
    Ok(())
}

impl XiElement {
    /// The zero element of log degree at most `n`.
    pub fn zero(lambda: &Rational, n: usize, prec: usize) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(XiElement { lambda: lambda.clone(), comps: vec![TruncSeries::zero(prec); n + 1] })
    }

    /// Basis element `e_{lambda,j}` inside log degree `n`.
    pub fn basis(lambda: &Rational, j: usize, n: usize, prec: usize) -> Result<Self> {
        if j > n {
            return Err(Error::InvalidInput(format!("log degree {j} exceeds bound {n}")));
        }
        let mut x = Self::zero(lambda, n, prec)?;
        x.comps[j] = TruncSeries::one(prec);
        Ok(x)
    }

    /// From components `c_0 .. c_N`; precisions are cut to the smallest.
    pub fn from_comps(lambda: &Rational, comps: Vec<TruncSeries>) -> Result<Self> {
        check_lambda(lambda)?;
        if comps.is_empty() {
            return Err(Error::InvalidInput("an element needs at least one component".into()));
        }
        let p = comps.iter().map(|c| c.prec()).min().unwrap();
        Ok(XiElement { lambda: lambda.clone(), comps: comps.iter().map(|c| c.truncate(p)).collect() })
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    /// Log-degree bound `N`.
    pub fn log_bound(&self) -> usize {
        self.comps.len() - 1
    }

    pub fn prec(&self) -> usize {
        self.comps[0].prec()
    }

    pub fn comps(&self) -> &[TruncSeries] {
        &self.comps
    }

    pub fn comp(&self, j: usize) -> Option<&TruncSeries> {
        self.comps.get(j)
    }

    /// Largest `j` with `c_j` non-zero to precision.
    pub fn log_degree(&self) -> Option<usize> {
        self.comps.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Minimal `b`-valuation over the components.
    pub fn valuation(&self) -> Option<usize> {
        self.comps.iter().filter_map(|c| c.valuation()).min()
    }

    pub fn truncate(&self, prec: usize) -> Self {
        XiElement { lambda: self.lambda.clone(), comps: self.comps.iter().map(|c| c.truncate(prec)).collect() }
    }

    /// Same element viewed inside a larger log-degree bound.
    pub fn widen(&self, n: usize) -> Self {
        let mut comps = self.comps.clone();
        let p = self.prec();
        while comps.len() < n + 1 {
            comps.push(TruncSeries::zero(p));
        }
        XiElement { lambda: self.lambda.clone(), comps }
    }

    fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        if self.lambda != other.lambda {
            return Err(Error::Mismatch(format!(
                "exponent classes {} and {} differ",
                fmt_rational(&self.lambda),
                fmt_rational(&other.lambda)
            )));
        }
        let n = self.log_bound().max(other.log_bound());
        let p = self.prec().min(other.prec());
        Ok((self.widen(n).truncate(p), other.widen(n).truncate(p)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (x, y) = self.aligned(other)?;
        let comps = x.comps.iter().zip(&y.comps).map(|(u, v)| u + v).collect();
        Ok(XiElement { lambda: x.lambda, comps })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let (x, y) = self.aligned(other)?;
        let comps = x.comps.iter().zip(&y.comps).map(|(u, v)| u - v).collect();
        Ok(XiElement { lambda: x.lambda, comps })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        XiElement { lambda: self.lambda.clone(), comps: self.comps.iter().map(|u| u.scale(c)).collect() }
    }

    /// Multiplication by a series, precision `min(prec, prec_S)`.
    pub fn series_mul(&self, s: &TruncSeries) -> Self {
        XiElement { lambda: self.lambda.clone(), comps: self.comps.iter().map(|u| s * u).collect() }
    }

    /// `b x`; precision preserved, the top coefficient of each component is dropped.
    pub fn b_mul(&self) -> Self {
        XiElement { lambda: self.lambda.clone(), comps: self.comps.iter().map(|u| u.shift(1)).collect() }
    }

    /// `a x`, precision `prec - 1`.
    pub fn a_apply(&self) -> Result<Self> {
        let p = self.prec();
        if p < 2 {
            return Err(Error::PrecisionTooLow { needed: 2, prec: p });
        }
        let n = self.comps.len();
        let mut comps = Vec::with_capacity(n);
        for j in 0..n {
            let c = &self.comps[j];
            let mut out = &c.shift(1).scale(&self.lambda) + &c.b2_derivative();
            if j + 1 < n {
                out = &out + &self.comps[j + 1].shift(1);
            }
            comps.push(out.truncate(p - 1));
        }
        Ok(XiElement { lambda: self.lambda.clone(), comps })
    }

    /// Coefficient of `b^m e_{lambda,j}`.
    pub fn coefficient(&self, j: usize, m: usize) -> Result<Rational> {
        match self.comps.get(j) {
            Some(c) => c.coefficient(m).cloned(),
            None => Ok(Rational::zero()),
        }
    }

    /// Equality on shared precision within the same class.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }
}

/// `s^{mu-1} (Log s)^j / j!` as `a^m e_{lambda,j}` with `m = mu - lambda`.
///
/// The iteration starts at precision `prec + m` so the result has precision
/// `prec` (each `a` costs one order).
pub fn power_monomial(mu: &Rational, j: usize, lambda: &Rational, n: usize, prec: usize) -> Result<XiElement> {
    let m = to_i64(&(mu - lambda))
        .filter(|m| *m >= 0)
        .ok_or_else(|| Error::InvalidInput(format!("{} - {} is not a non-negative integer", fmt_rational(mu), fmt_rational(lambda))))?
        as usize;
    let mut x = XiElement::basis(lambda, j, n, prec + m)?;
    for _ in 0..m {
        x = x.a_apply()?;
    }
    Ok(x)
}

/// `s^{mu-1} (Log s)^j` (without the `1/j!`).
pub fn log_power(mu: &Rational, j: usize, lambda: &Rational, n: usize, prec: usize) -> Result<XiElement> {
    let fact: Rational = (1..=j).map(|i| int(i as i64)).product();
    Ok(power_monomial(mu, j, lambda, n, prec)?.scale(&fact))
}

/// Solves `(a - (lambda + q) b) x = y` for `y` in `b Xi^{(j)}`.
///
/// Coefficientwise: `y_{h,m+1} = (m - q) x_{h,m} + x_{h+1,m}`. The kernel is
/// spanned by `b^q e_0`; its coordinate `x_{0,q}` is set to zero. Output
/// precision is `prec(y) - 1`, and `x` lies in `Xi^{(j+1)}` with
/// `x_{j+1,q} = y_{j,q+1}`.
pub fn solve_shifted_inverse(y: &XiElement, q: i64) -> Result<XiElement> {
    let p = y.prec();
    if p < 2 {
        return Err(Error::PrecisionTooLow { needed: 2, prec: p });
    }
    for (h, c) in y.comps.iter().enumerate() {
        if !c.coeffs()[0].is_zero() {
            return Err(Error::NotSolvable(format!("component e_{h} has a non-zero constant term")));
        }
    }
    let n_out = match y.log_degree() {
        Some(j) => (j + 1).max(y.log_bound()),
        None => y.log_bound(),
    };
    let y_at = |h: usize, m: usize| -> Rational {
        y.comps.get(h).map(|c| c.coeffs()[m].clone()).unwrap_or_else(Rational::zero)
    };
    let mut comps = vec![vec![Rational::zero(); p - 1]; n_out + 1];
    // Top-down in log degree: row h needs row h+1 except at m = q, where the
    // equation instead fixes x_{h+1,q} (the free coordinate of row h+1).
    for h in (0..=n_out).rev() {
        for m in 0..p - 1 {
            let ym = y_at(h, m + 1);
            let diff = m as i64 - q;
            if diff != 0 {
                let upper = if h < n_out { comps[h + 1][m].clone() } else { Rational::zero() };
                comps[h][m] = (ym - upper) / int(diff);
            } else if h < n_out {
                comps[h + 1][m] = ym;
            } else if !ym.is_zero() {
                return Err(Error::NotSolvable(format!(
                    "coefficient of b^{} e_{h} is {} but the log degree cannot grow",
                    m + 1,
                    fmt_rational(&ym)
                )));
            }
        }
    }
    Ok(XiElement {
        lambda: y.lambda.clone(),
        comps: comps.into_iter().map(|c| TruncSeries::from_coeffs(c, p - 1)).collect(),
    })
}

/// Drops the `e_0` component and re-indexes `e_j -> e_{j-1}`.
pub fn xi_quotient_drop_log0(x: &XiElement) -> Result<XiElement> {
    if x.log_bound() == 0 {
        return Err(Error::InvalidInput("quotient needs log-degree bound at least 1".into()));
    }
    Ok(XiElement { lambda: x.lambda.clone(), comps: x.comps[1..].to_vec() })
}

/// Marker type for the module structure of [`XiElement`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Xi;

impl AbModule for Xi {
    type Element = XiElement;

    fn a_act(&self, x: &XiElement) -> Result<XiElement> {
        x.a_apply()
    }

    fn series_mul(&self, s: &TruncSeries, x: &XiElement) -> XiElement {
        x.series_mul(s)
    }

    fn scale(&self, c: &Rational, x: &XiElement) -> XiElement {
        x.scale(c)
    }

    fn add(&self, x: &XiElement, y: &XiElement) -> Result<XiElement> {
        x.add(y)
    }
}

impl fmt::Display for XiElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (j, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            terms.push(format!("({c})*e{j}"));
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Coefficient of `b^m` in `s^{lambda+m-1} = c b^m s^{lambda-1}`, i.e. `1/(lambda)_m`.
pub fn b_power_in_s(lambda: &Rational, m: usize) -> Rational {
    crate::series::rising(lambda, m).recip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{rat, rising};

    fn half() -> Rational {
        rat(1, 2)
    }

    #[test]
    fn a_on_basis() {
        let l = half();
        let e0 = XiElement::basis(&l, 0, 2, 8).unwrap();
        let a0 = e0.a_apply().unwrap();
        assert_eq!(a0.prec(), 7);
        assert!(a0.agrees_with(&e0.b_mul().scale(&l)));
        let e1 = XiElement::basis(&l, 1, 2, 8).unwrap();
        let expect = e1.b_mul().scale(&l).add(&e0.b_mul()).unwrap();
        assert!(e1.a_apply().unwrap().agrees_with(&expect));
    }

    #[test]
    fn a_on_shifted_monomial() {
        let l = rat(2, 3);
        let (m, h) = (3usize, 1usize);
        let x = XiElement::from_comps(&l, vec![TruncSeries::zero(10), TruncSeries::monomial(int(1), m, 10)]).unwrap();
        let got = x.a_apply().unwrap();
        assert_eq!(got.coefficient(h, m + 1).unwrap(), &l + int(m as i64));
        assert_eq!(got.coefficient(h - 1, m + 1).unwrap(), int(1));
    }

    #[test]
    fn power_monomials() {
        let l = half();
        let p = 10;
        assert!(power_monomial(&l, 0, &l, 1, p).unwrap().agrees_with(&XiElement::basis(&l, 0, 1, p).unwrap()));
        let s = power_monomial(&(&l + int(1)), 0, &l, 1, p).unwrap();
        assert_eq!(s.prec(), p);
        assert!(s.agrees_with(&XiElement::basis(&l, 0, 1, p).unwrap().b_mul().scale(&l)));
        // b^m e_0 = s^{lambda+m-1} / (lambda)_m
        let m = 4;
        let lhs = power_monomial(&(&l + int(m)), 0, &l, 0, p).unwrap().scale(&b_power_in_s(&l, m as usize));
        let rhs = XiElement::from_comps(&l, vec![TruncSeries::monomial(int(1), m as usize, p)]).unwrap();
        assert!(lhs.agrees_with(&rhs));
        assert!(power_monomial(&rat(1, 3), 0, &l, 0, p).is_err());
    }

    #[test]
    fn gamma_identity() {
        // s^{l1+p-1}/(l1+p-1) = gamma b^p s^{l1-1}/(l1-1)
        let (l1, pp) = (int(3), 2usize);
        let lam = int(1);
        let prec = 12;
        let gamma = rising(&(&l1 - int(1)), pp);
        let lhs = power_monomial(&(&l1 + int(pp as i64)), 0, &lam, 0, prec).unwrap().scale(&(&l1 + int(pp as i64) - int(1)).recip());
        let base = power_monomial(&l1, 0, &lam, 0, prec).unwrap().scale(&(gamma / (&l1 - int(1))));
        let rhs = XiElement::from_comps(&lam, vec![base.comps()[0].shift(pp)]).unwrap();
        assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn shifted_inverse_examples() {
        let l = half();
        let p = 12;
        let (q, j) = (3i64, 1usize);
        let mut comps = vec![TruncSeries::zero(p); 3];
        comps[j] = TruncSeries::monomial(int(1), q as usize + 1, p);
        let y = XiElement::from_comps(&l, comps).unwrap();
        let x = solve_shifted_inverse(&y, q).unwrap();
        let mut expect = vec![TruncSeries::zero(p - 1); 3];
        expect[j + 1] = TruncSeries::monomial(int(1), q as usize, p - 1);
        assert!(x.agrees_with(&XiElement::from_comps(&l, expect).unwrap()));

        let m = 5usize;
        let y = XiElement::from_comps(&l, vec![TruncSeries::monomial(int(m as i64 - q), m + 1, p)]).unwrap();
        let x = solve_shifted_inverse(&y, q).unwrap();
        let expect = XiElement::from_comps(&l, vec![TruncSeries::monomial(int(1), m, p - 1), TruncSeries::zero(p - 1)]).unwrap();
        assert!(x.agrees_with(&expect));
    }

    #[test]
    fn shifted_inverse_rejects_constant_terms() {
        let l = half();
        let y = XiElement::basis(&l, 0, 1, 6).unwrap();
        assert!(matches!(solve_shifted_inverse(&y, 1), Err(Error::NotSolvable(_))));
    }

    #[test]
    fn quotient_drops_log0() {
        let l = half();
        let q = xi_quotient_drop_log0(&XiElement::basis(&l, 0, 1, 5).unwrap()).unwrap();
        assert!(q.is_zero());
        let q = xi_quotient_drop_log0(&XiElement::basis(&l, 1, 1, 5).unwrap()).unwrap();
        assert!(q.agrees_with(&XiElement::basis(&l, 0, 0, 5).unwrap()));
    }

    #[test]
    fn exponent_classes() {
        assert_eq!(exponent_class(&rat(7, 2)), rat(1, 2));
        assert_eq!(exponent_class(&int(3)), int(1));
        assert_eq!(exponent_class(&rat(-1, 3)), rat(2, 3));
    }
}
