//! Rank-2 canonical reduction and the parameter of a rank-2 theme.

use num_traits::{One, Zero};

use super::ode::solve_b_ode;
use crate::error::{Error, Result};
use crate::series::{fmt_rational, int, rising, to_i64, Rational, TruncSeries};
use crate::theme::ThemePresentation;
use crate::xi::{exponent_class, log_power, power_monomial, XiElement};

/// `gamma = (lambda_1 - 1) lambda_1 ... (lambda_1 + p - 2)`.
pub fn gamma_rank2(lambda1: &Rational, p: usize) -> Rational {
    rising(&(lambda1 - int(1)), p)
}

/// `c(lambda_1, p) = -gamma / p`, the constant of the canonical generator.
pub fn c_rank2(lambda1: &Rational, p: usize) -> Result<Rational> {
    if p == 0 {
        return Err(Error::InvalidInput("the constant c(lambda_1, p) needs p >= 1".into()));
    }
    Ok(-gamma_rank2(lambda1, p) / int(p as i64))
}

/// `alpha s^{lambda_1+p-2} Log s + c(lambda_1,p) s^{lambda_1-2}`; for `p = 0`
/// the constant model `(lambda_1 - 1) s^{lambda_1-2} Log s`.
///
/// For `p >= 1` it satisfies
/// `(a - lambda_2 b) psi = kappa (1 + alpha b^p) s^{lambda_1-1}` with
/// `kappa = gamma / (lambda_1 - 1)`.
pub fn canonical_rank2_generator(lambda1: &Rational, p: usize, alpha: &Rational, prec: usize) -> Result<XiElement> {
    let lambda = exponent_class(lambda1);
    let low = lambda1 - int(1);
    if low <= Rational::zero() {
        return Err(Error::InvalidCanonicalPoint(format!("lambda_1 = {} must exceed 1", fmt_rational(lambda1))));
    }
    if p == 0 {
        return Ok(log_power(&low, 1, &lambda, 1, prec)?.scale(&low));
    }
    let lambda2 = lambda1 + int(p as i64 - 1);
    let log_term = log_power(&lambda2, 1, &lambda, 1, prec)?.scale(alpha);
    let c = c_rank2(lambda1, p)?;
    let const_term = power_monomial(&low, 0, &lambda, 1, prec)?.scale(&c);
    log_term.add(&const_term)
}

/// Output of [`rank2_reduce`].
#[derive(Clone, Debug)]
pub struct Rank2Reduction {
    /// `None` for `p = 0` (no parameter).
    pub alpha: Option<Rational>,
    /// `S` with `(a - lambda_2 b) phi = S s^{lambda_1 - 1}`.
    pub s: TruncSeries,
    /// `psi~` with `(a - lambda_2 b) psi~ = (1 + alpha b^p) s^{lambda_1-1}`.
    pub psi: XiElement,
    /// The generator of [`canonical_rank2_generator`] with the same `alpha`.
    pub canonical: XiElement,
}

/// `(a - mu b) x`.
fn shifted_a(x: &XiElement, mu: &Rational) -> Result<XiElement> {
    x.a_apply()?.sub(&x.b_mul().scale(mu))
}

/// Brings a rank-2 generator with invariants `(lambda_1, p)` to canonical form.
///
/// Computes `S` from `(a - lambda_2 b) phi = S s^{lambda_1-1}`, splits
/// `S = S_0 + S_p b^p + b S~`, solves `b T' - (p-1) T = S~` and returns
/// `psi~ = (phi - T s^{lambda_1-1}) / S_0` with `alpha = S_p / S_0`.
pub fn rank2_reduce(phi: &XiElement, lambda1: &Rational, p: usize) -> Result<Rank2Reduction> {
    let lambda = exponent_class(lambda1);
    if *phi.lambda() != lambda {
        return Err(Error::Mismatch(format!(
            "generator lives in class {}, invariants in class {}",
            fmt_rational(phi.lambda()),
            fmt_rational(&lambda)
        )));
    }
    let lambda2 = lambda1 + int(p as i64 - 1);
    let y = shifted_a(phi, &lambda2)?;
    for h in 1..=y.log_bound() {
        if !y.comps()[h].is_zero() {
            return Err(Error::WrongInvariants(format!(
                "(a - {} b) phi has a non-zero log component e_{h}",
                fmt_rational(&lambda2)
            )));
        }
    }
    let m = to_i64(&(lambda1 - &lambda)).unwrap() as usize;
    let y0 = &y.comps()[0];
    if let Some(v) = y0.valuation() {
        if v < m {
            return Err(Error::WrongInvariants(format!("(a - lambda_2 b) phi is not a multiple of s^(lambda_1-1) (valuation {v} < {m})")));
        }
    }
    if y0.prec() <= m + p + 1 {
        return Err(Error::PrecisionTooLow { needed: m + p + 2, prec: y0.prec() });
    }
    let s = y0.unshift(m)?.scale(&rising(&lambda, m).recip());
    let s0 = s.coeffs()[0].clone();
    if s0.is_zero() {
        return Err(Error::WrongInvariants("S(0) = 0: the generator does not have the stated invariants".into()));
    }
    let mut t = s.clone();
    t.set_coefficient(0, Rational::zero())?;
    let alpha = if p == 0 {
        None
    } else {
        let sp = s.coeff_or_zero(p);
        t.set_coefficient(p, Rational::zero())?;
        Some(&sp / &s0)
    };
    let tilde = t.unshift(1)?;
    let t = solve_b_ode(p as i64 - 1, &tilde)
        .map_err(|o| Error::WrongInvariants(format!("unexpected obstruction: {o}")))?
        .series;
    let base = power_monomial(lambda1, 0, &lambda, phi.log_bound(), t.prec())?;
    let psi = phi.sub(&base.series_mul(&t))?.scale(&s0.recip());
    let a = alpha.clone().unwrap_or_else(Rational::zero);
    let canonical = canonical_rank2_generator(lambda1, p, &a, psi.prec())?.widen(phi.log_bound());
    // (a - lambda_2 b) psi must be exactly (1 + alpha b^p) s^{lambda_1 - 1}
    let mut target = TruncSeries::one(psi.prec());
    if p > 0 {
        target = &target + &TruncSeries::monomial(a.clone(), p, psi.prec());
    }
    let lhs = shifted_a(&psi, &lambda2)?;
    let rhs = base.truncate(lhs.prec()).series_mul(&target);
    if !lhs.agrees_with(&rhs) {
        return Err(Error::WrongInvariants("reduced generator fails its relation".into()));
    }
    Ok(Rank2Reduction { alpha, s, psi, canonical })
}

/// Coefficient of `b^{p_1}` in the relation series of a rank-2 presentation.
pub fn parameter_of_rank2(e: &ThemePresentation) -> Result<Rational> {
    if e.rank() != 2 {
        return Err(Error::InvalidInput(format!("parameter needs rank 2, got {}", e.rank())));
    }
    let s = &e.relations()[0];
    let s0 = &s.coeffs()[0];
    if !s0.is_one() {
        return Err(Error::NotNormalized(s0.clone()));
    }
    let p = e.invariants().p[0];
    s.coefficient(p).cloned().map_err(|_| Error::PrecisionExceeded { index: p, prec: s.prec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;
    use crate::theme::{embed_into_xi, CanonicalPoint, FundamentalInvariants, ThemePresentation};

    #[test]
    fn c_values() {
        assert_eq!(c_rank2(&int(3), 2).unwrap(), int(-3));
        assert_eq!(c_rank2(&int(3), 1).unwrap(), int(-2));
        // gamma(5/2, 3) = 3/2 * 5/2 * 7/2
        assert_eq!(gamma_rank2(&rat(5, 2), 3), rat(105, 8));
    }

    #[test]
    fn canonical_generator_relation() {
        for (l, p, alpha) in [(int(3), 2usize, int(4)), (int(3), 1, rat(-1, 2)), (rat(5, 2), 3, int(2))] {
            let psi = canonical_rank2_generator(&l, p, &alpha, 24).unwrap();
            let lambda2 = &l + int(p as i64 - 1);
            let lhs = shifted_a(&psi, &lambda2).unwrap();
            let kappa = gamma_rank2(&l, p) / (&l - int(1));
            let mut target = TruncSeries::one(lhs.prec());
            target = &target + &TruncSeries::monomial(alpha.clone(), p, lhs.prec());
            let lambda = exponent_class(&l);
            let rhs = power_monomial(&l, 0, &lambda, 1, lhs.prec()).unwrap().series_mul(&target.scale(&kappa));
            assert!(lhs.agrees_with(&rhs), "({l}, {p})");
        }
    }

    #[test]
    fn reduce_is_idempotent() {
        let l = int(3);
        let psi = canonical_rank2_generator(&l, 2, &int(7), 24).unwrap();
        let r = rank2_reduce(&psi, &l, 2).unwrap();
        assert_eq!(r.alpha, Some(int(7)));
        let again = rank2_reduce(&r.canonical, &l, 2).unwrap();
        assert_eq!(again.alpha, Some(int(7)));
    }

    #[test]
    fn reduce_embedded_theme() {
        let inv = FundamentalInvariants::new(rat(7, 2), vec![3]);
        let s = TruncSeries::from_ints(&[2, 1, -1, 5, 4], 24);
        let e = ThemePresentation::new(inv, vec![s], 24).unwrap();
        let phi = embed_into_xi(&e).unwrap();
        let r = rank2_reduce(phi.phi(), &rat(7, 2), 3).unwrap();
        assert_eq!(r.alpha, Some(rat(5, 2)));
        assert_eq!(r.s.coeffs()[0], int(2));
    }

    #[test]
    fn p_zero_uses_constant_model() {
        let l = int(3);
        let psi = canonical_rank2_generator(&l, 0, &int(0), 20).unwrap();
        let r = rank2_reduce(&psi, &l, 0).unwrap();
        assert_eq!(r.alpha, None);
        // equal modulo the kernel line of (a - lambda_2 b)
        let diff = r.psi.sub(&r.canonical).unwrap();
        assert!(diff.comps()[1].is_zero());
    }

    #[test]
    fn zero_s0_is_wrong_invariants() {
        let l = int(3);
        let lambda = exponent_class(&l);
        // (a - 4 b) s^3 = 0, so S vanishes identically
        let x = power_monomial(&int(4), 0, &lambda, 1, 20).unwrap();
        assert!(matches!(rank2_reduce(&x, &l, 2), Err(Error::WrongInvariants(_))));
    }

    #[test]
    fn parameter_reads_b_p() {
        let inv = FundamentalInvariants::new(int(3), vec![2]);
        let e = ThemePresentation::new(inv.clone(), vec![TruncSeries::from_ints(&[1, 1, 9], 8)], 8).unwrap();
        assert_eq!(parameter_of_rank2(&e).unwrap(), int(9));
        let e = ThemePresentation::new(inv.clone(), vec![TruncSeries::from_ints(&[2, 1, 9], 8)], 8).unwrap();
        assert_eq!(parameter_of_rank2(&e).unwrap_err(), Error::NotNormalized(int(2)));
        let pt = CanonicalPoint::new(inv, vec![TruncSeries::from_ints(&[1, 0, 4], 8)]).unwrap();
        assert_eq!(pt.s[0].coeff_or_zero(2), int(4));
    }
}
