//! Exact rationals and truncated power series in `b`.
//!
//! A [`TruncSeries`] stores the coefficients of `b^0 .. b^{prec-1}`; nothing
//! beyond `prec` is known. Binary operations keep the smaller precision, and
//! equality compares the coefficients both operands know.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Scalar field of the whole crate.
pub type Rational = BigRational;

/// Default working precision.
pub const DEFAULT_PREC: usize = 32;

/// `n / d` as a rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// The integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p"`, `"-p"` or `"p/q"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// Renders a rational as `p` or `p/q`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rational value as `i64` when it is an integer that fits.
pub fn to_i64(r: &Rational) -> Option<i64> {
    if !r.is_integer() {
        return None;
    }
    i64::try_from(r.numer()).ok()
}

/// Rising factorial `x (x+1) ... (x+n-1)`.
pub fn rising(x: &Rational, n: usize) -> Rational {
    let mut acc = Rational::one();
    let mut t = x.clone();
    for _ in 0..n {
        acc *= &t;
        t += Rational::one();
    }
    acc
}

/// Truncated power series `c_0 + c_1 b + ... + c_{prec-1} b^{prec-1} + O(b^prec)`.
#[derive(Clone, Debug)]
pub struct TruncSeries {
    coeffs: Vec<Rational>,
}

impl TruncSeries {
    /// The zero series known to `prec` terms.
    pub fn zero(prec: usize) -> Self {
        assert!(prec >= 1, "precision must be positive");
        TruncSeries { coeffs: vec![Rational::zero(); prec] }
    }

    pub fn one(prec: usize) -> Self {
        Self::constant(Rational::one(), prec)
    }

    pub fn constant(c: Rational, prec: usize) -> Self {
        let mut s = Self::zero(prec);
        s.coeffs[0] = c;
        s
    }

    /// `c b^m`; the zero series when `m >= prec`.
    pub fn monomial(c: Rational, m: usize, prec: usize) -> Self {
        let mut s = Self::zero(prec);
        if m < prec {
            s.coeffs[m] = c;
        }
        s
    }

    /// Builds a series from leading coefficients, zero-padded or cut to `prec`.
    pub fn from_coeffs(mut coeffs: Vec<Rational>, prec: usize) -> Self {
        assert!(prec >= 1, "precision must be positive");
        coeffs.resize(prec, Rational::zero());
        TruncSeries { coeffs }
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_ints(coeffs: &[i64], prec: usize) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| int(c)).collect(), prec)
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `b^m`.
    pub fn coefficient(&self, m: usize) -> Result<&Rational> {
        self.coeffs.get(m).ok_or(Error::PrecisionExceeded { index: m, prec: self.prec() })
    }

    /// Coefficient of `b^m`, zero when `m` is outside the stored range.
    ///
    /// Only for callers that have already checked `m < prec`, or that read
    /// known-zero tails of exact polynomials.
    pub fn coeff_or_zero(&self, m: usize) -> Rational {
        self.coeffs.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set_coefficient(&mut self, m: usize, c: Rational) -> Result<()> {
        let prec = self.prec();
        let slot = self.coeffs.get_mut(m).ok_or(Error::PrecisionExceeded { index: m, prec })?;
        *slot = c;
        Ok(())
    }

    /// Index of the first non-zero coefficient, `None` if zero to precision.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    /// Cuts the series to a smaller precision (no-op when `prec` is larger).
    pub fn truncate(&self, prec: usize) -> Self {
        let p = prec.min(self.prec()).max(1);
        TruncSeries { coeffs: self.coeffs[..p].to_vec() }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// `b^m S`, precision preserved: the top `m` coefficients are dropped.
    pub fn shift(&self, m: usize) -> Self {
        let p = self.prec();
        let mut coeffs = vec![Rational::zero(); p];
        coeffs[m..p].clone_from_slice(&self.coeffs[..p - m]);
        TruncSeries { coeffs }
    }

    /// `S / b^m`; needs the first `m` coefficients to vanish. Precision drops by `m`.
    pub fn unshift(&self, m: usize) -> Result<Self> {
        if m >= self.prec() {
            return Err(Error::PrecisionTooLow { needed: m + 1, prec: self.prec() });
        }
        if self.coeffs[..m].iter().any(|c| !c.is_zero()) {
            return Err(Error::InvalidInput(format!("series is not divisible by b^{m}")));
        }
        Ok(TruncSeries { coeffs: self.coeffs[m..].to_vec() })
    }

    /// `dS/db`, precision `prec - 1`.
    pub fn derivative(&self) -> Result<Self> {
        if self.prec() < 2 {
            return Err(Error::PrecisionTooLow { needed: 2, prec: self.prec() });
        }
        let coeffs = (1..self.prec()).map(|m| &self.coeffs[m] * int(m as i64)).collect();
        Ok(TruncSeries { coeffs })
    }

    /// `b^2 dS/db`, precision preserved (coefficient `m` is `(m-1) s_{m-1}`).
    pub fn b2_derivative(&self) -> Self {
        let p = self.prec();
        let mut coeffs = vec![Rational::zero(); p];
        for m in 2..p {
            coeffs[m] = &self.coeffs[m - 1] * int(m as i64 - 1);
        }
        TruncSeries { coeffs }
    }

    /// `b dS/db`, precision preserved.
    pub fn euler(&self) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().enumerate().map(|(m, c)| c * int(m as i64)).collect() }
    }

    /// Multiplicative inverse; fails when `S(0) = 0`.
    pub fn invert(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(Error::NotAUnit);
        }
        let inv0 = c0.recip();
        let p = self.prec();
        let mut out: Vec<Rational> = Vec::with_capacity(p);
        out.push(inv0.clone());
        for m in 1..p {
            let mut acc = Rational::zero();
            for i in 1..=m {
                if !self.coeffs[i].is_zero() {
                    acc += &self.coeffs[i] * &out[m - i];
                }
            }
            out.push(-acc * &inv0);
        }
        Ok(TruncSeries { coeffs: out })
    }

    /// Product with the valuation-aware precision
    /// `min(prec_S + val_T, prec_T + val_S)`.
    ///
    /// Every coefficient below that bound is determined by the known
    /// coefficients of both factors, so the result is exact to its precision.
    pub fn mul_sharp(&self, other: &Self) -> Self {
        let vs = self.valuation().unwrap_or(self.prec());
        let vt = other.valuation().unwrap_or(other.prec());
        let p = (self.prec() + vt).min(other.prec() + vs).max(1);
        mul_to(self, other, p)
    }

    /// True when both series agree on every coefficient they both know.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a == b)
    }

    /// True when every coefficient past `b^0` vanishes.
    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| c.is_zero())
    }
}

fn mul_to(s: &TruncSeries, t: &TruncSeries, p: usize) -> TruncSeries {
    let mut coeffs = vec![Rational::zero(); p];
    for (i, a) in s.coeffs.iter().enumerate().take(p) {
        if a.is_zero() {
            continue;
        }
        for (j, b) in t.coeffs.iter().enumerate().take(p - i) {
            if !b.is_zero() {
                coeffs[i + j] += a * b;
            }
        }
    }
    TruncSeries { coeffs }
}

impl PartialEq for TruncSeries {
    fn eq(&self, other: &Self) -> bool {
        self.agrees_with(other)
    }
}

impl Add for &TruncSeries {
    type Output = TruncSeries;
    fn add(self, rhs: &TruncSeries) -> TruncSeries {
        let p = self.prec().min(rhs.prec());
        TruncSeries { coeffs: (0..p).map(|i| &self.coeffs[i] + &rhs.coeffs[i]).collect() }
    }
}

impl Sub for &TruncSeries {
    type Output = TruncSeries;
    fn sub(self, rhs: &TruncSeries) -> TruncSeries {
        let p = self.prec().min(rhs.prec());
        TruncSeries { coeffs: (0..p).map(|i| &self.coeffs[i] - &rhs.coeffs[i]).collect() }
    }
}

impl Mul for &TruncSeries {
    type Output = TruncSeries;
    fn mul(self, rhs: &TruncSeries) -> TruncSeries {
        mul_to(self, rhs, self.prec().min(rhs.prec()))
    }
}

impl Neg for &TruncSeries {
    type Output = TruncSeries;
    fn neg(self) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for TruncSeries {
            type Output = TruncSeries;
            fn $m(self, rhs: TruncSeries) -> TruncSeries {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Writes a polynomial in `var` with rational coefficients, e.g. `1 + 2/3*b^2 - b^5`.
pub fn fmt_poly(coeffs: &[Rational], var: &str) -> String {
    let mut out = String::new();
    for (m, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        let mono = match m {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{m}"),
        };
        if m == 0 {
            out.push_str(&fmt_rational(&mag));
        } else if mag.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&format!("{}*{}", fmt_rational(&mag), mono));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_poly(&self.coeffs, "b"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_monomials() {
        let s = TruncSeries::from_ints(&[7], 8);
        assert!(s.derivative().unwrap().is_zero());
        let s = TruncSeries::monomial(int(1), 4, 8);
        assert_eq!(s.derivative().unwrap(), TruncSeries::monomial(int(4), 3, 7));
        assert_eq!(s.derivative().unwrap().prec(), 7);
    }

    #[test]
    fn invert_geometric() {
        let p = 10;
        let alpha = rat(3, 2);
        let s = TruncSeries::from_coeffs(vec![int(1), alpha.clone()], p);
        let inv = s.invert().unwrap();
        for m in 0..p {
            let expect = num_traits::pow::pow(-alpha.clone(), m);
            assert_eq!(inv.coefficient(m).unwrap(), &expect);
        }
        assert_eq!(&s * &inv, TruncSeries::one(p));
    }

    #[test]
    fn invert_quadratic_second_coefficient() {
        let (beta, gamma) = (int(2), int(5));
        let s = TruncSeries::from_coeffs(vec![int(1), beta.clone(), gamma.clone()], 12);
        let inv = s.invert().unwrap();
        assert_eq!(inv.coefficient(1).unwrap(), &-beta.clone());
        assert_eq!(inv.coefficient(2).unwrap(), &(&beta * &beta - &gamma));
        assert_eq!(&s * &inv, TruncSeries::one(12));
    }

    #[test]
    fn invert_rejects_non_units() {
        let s = TruncSeries::monomial(int(1), 1, 5);
        assert_eq!(s.invert().unwrap_err(), Error::NotAUnit);
    }

    #[test]
    fn coefficient_access() {
        let s = TruncSeries::from_ints(&[1, 0, 0, 5], 6);
        assert_eq!(s.coefficient(3).unwrap(), &int(5));
        assert_eq!(s.coefficient(1).unwrap(), &int(0));
        assert!(matches!(s.coefficient(6), Err(Error::PrecisionExceeded { index: 6, prec: 6 })));
    }

    #[test]
    fn precision_rules() {
        let s = TruncSeries::from_ints(&[1, 2, 3], 10);
        let t = TruncSeries::from_ints(&[4, 5], 6);
        assert_eq!((&s + &t).prec(), 6);
        assert_eq!((&s * &t).prec(), 6);
        assert_eq!(s.shift(3).prec(), 10);
        assert_eq!(s.b2_derivative().prec(), 10);
        assert_eq!(s.unshift(0).unwrap().prec(), 10);
    }

    #[test]
    fn b2_derivative_matches_definition() {
        let s = TruncSeries::from_ints(&[3, 1, 4, 1, 5], 9);
        let direct = s.derivative().unwrap().shift(2);
        let direct = TruncSeries::from_coeffs(direct.coeffs().to_vec(), 9);
        // shift keeps prec 8; compare on shared coefficients.
        assert_eq!(s.b2_derivative(), direct);
    }

    #[test]
    fn sharp_product_precision() {
        let s = TruncSeries::monomial(int(1), 3, 10);
        let t = TruncSeries::from_ints(&[1, 1], 5);
        let p = s.mul_sharp(&t);
        assert_eq!(p.prec(), 8);
        assert_eq!(p.coefficient(4).unwrap(), &int(1));
    }

    #[test]
    fn display_literal() {
        let s = TruncSeries::from_coeffs(vec![int(1), int(0), rat(2, 3), int(0), int(0), int(-1)], 8);
        assert_eq!(s.to_string(), "1 + 2/3*b^2 - b^5");
        assert_eq!(TruncSeries::zero(3).to_string(), "0");
    }

    #[test]
    fn rational_round_trip() {
        for s in ["7", "-3/4", "10/5"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&fmt_rational(&r)).unwrap(), r);
        }
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
