//! Thematic rank of an expansion and the k-thematic test.

use crate::error::{Error, Result};
use crate::linalg::SeriesElimination;
use crate::series::TruncSeries;
use crate::theme::{bernstein_from_generator, iterate_matrix};
use crate::xi::XiElement;

/// Rank of `x, a x, .., a^{k-1} x` over the series ring.
///
/// `lower` is certified by minors with valuation below precision; `upper`
/// only holds to working precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankCertificate {
    pub lower: usize,
    pub upper: usize,
    pub minor_valuations: Vec<usize>,
    /// Order to which the first dependent iterate is known to lie in the
    /// span of the previous ones (`None` when no such check was possible).
    pub residual_precision: Option<usize>,
}

impl RankCertificate {
    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

/// Eliminates growing prefixes of the iterate matrix.
pub fn thematic_rank(x: &XiElement, k: usize) -> RankCertificate {
    let rows = x.log_bound() + 1;
    let cap = k.min(rows);
    let unknown = RankCertificate { lower: 0, upper: cap, minor_valuations: Vec::new(), residual_precision: None };
    if k == 0 {
        return RankCertificate { upper: 0, ..unknown };
    }
    let Ok((mut matrix, last)) = iterate_matrix(x, k - 1) else {
        return unknown;
    };
    for (row, e) in matrix.iter_mut().zip(last) {
        row.push(e);
    }
    let mut best = unknown;
    for i in 1..=k {
        if i > rows {
            // more iterates than log components: dependence is structural
            best.upper = best.lower;
            best.residual_precision = None;
            return best;
        }
        let sub: Vec<Vec<TruncSeries>> = matrix.iter().map(|r| r[..i].to_vec()).collect();
        match SeriesElimination::new(sub, None) {
            Ok(e) if e.rank() == i => {
                best.lower = i;
                best.minor_valuations = e.pivot_valuations.clone();
            }
            Ok(e) => {
                best.upper = best.lower.max(e.rank());
                best.residual_precision = e.residual_precision;
                return best;
            }
            Err(_) => return best,
        }
    }
    best.upper = best.lower;
    best
}

/// `Some(S_0 .. S_{k-1})` with `a^k x = sum S_j a^j x` when `x` is
/// `k`-thematic, `None` when it is not.
pub fn is_k_thematic(x: &XiElement, k: usize) -> Result<Option<Vec<TruncSeries>>> {
    let cert = thematic_rank(x, k);
    if cert.lower < k {
        if cert.upper < k {
            return Ok(None);
        }
        return Err(Error::Inconclusive(format!(
            "rank is at least {} and at most {k} to working precision",
            cert.lower
        )));
    }
    match bernstein_from_generator(x, k) {
        Ok(data) => Ok(Some(data.s)),
        Err(Error::NotThematic(_)) => Ok(None),
        Err(Error::PrecisionExhausted(msg)) => Err(Error::Inconclusive(msg)),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{rat, Rational};
    use crate::xi::log_power;

    fn half() -> Rational {
        rat(1, 2)
    }

    #[test]
    fn basis_vectors() {
        let l = half();
        let e0 = XiElement::basis(&l, 0, 0, 16).unwrap();
        assert_eq!(thematic_rank(&e0, 1).lower, 1);
        assert_eq!(is_k_thematic(&e0, 2).unwrap(), None);
        let e0w = XiElement::basis(&l, 0, 2, 16).unwrap();
        let c = thematic_rank(&e0w, 3);
        assert_eq!((c.lower, c.upper), (1, 1));
        let e2 = XiElement::basis(&l, 2, 2, 16).unwrap();
        let c = thematic_rank(&e2, 3);
        assert_eq!((c.lower, c.upper), (3, 3));
        assert!(is_k_thematic(&e2, 3).unwrap().is_some());
    }

    #[test]
    fn jump_family_is_rank_two_everywhere() {
        let l = half();
        for z in [-1i64, 0, 1] {
            let t = log_power(&rat(3, 2), 1, &l, 1, 24).unwrap();
            let u = XiElement::basis(&l, 0, 1, 24).unwrap().series_mul(&TruncSeries::from_ints(&[z, 1], 24));
            let phi = t.add(&u).unwrap();
            let c = thematic_rank(&phi, 2);
            assert_eq!((c.lower, c.upper), (2, 2), "z = {z}");
        }
    }
}
