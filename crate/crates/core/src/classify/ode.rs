//! The first-order equation `b T' - c T = rhs` on truncated series.

use std::fmt;

use num_traits::Zero;

use crate::series::{fmt_rational, int, Rational, TruncSeries};

/// Solution of `b T' - c T = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct BOdeSolution {
    pub series: TruncSeries,
    /// Index of the free coefficient (`c` when `0 <= c < prec`).
    pub free_index: Option<usize>,
}

/// The coefficient of `b^c` of the right-hand side is non-zero.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeObstruction {
    pub index: usize,
    pub value: Rational,
}

impl fmt::Display for OdeObstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "coefficient of b^{} of the right-hand side must vanish; found {}",
            self.index,
            fmt_rational(&self.value)
        )
    }
}

/// Solves `b T' - c T = rhs` with the free coefficient set to zero.
pub fn solve_b_ode(c: i64, rhs: &TruncSeries) -> Result<BOdeSolution, OdeObstruction> {
    solve_b_ode_with(c, rhs, &Rational::zero())
}

/// Same as [`solve_b_ode`], with `free` as the coefficient of `b^c`.
///
/// Coefficient `m` of `T` is `rhs_m / (m - c)`; the equation at `m = c`
/// reads `0 = rhs_c`. The result has the precision of `rhs`.
pub fn solve_b_ode_with(c: i64, rhs: &TruncSeries, free: &Rational) -> Result<BOdeSolution, OdeObstruction> {
    let mut out = Vec::with_capacity(rhs.prec());
    let mut free_index = None;
    for (m, r) in rhs.coeffs().iter().enumerate() {
        let d = m as i64 - c;
        if d == 0 {
            if !r.is_zero() {
                return Err(OdeObstruction { index: m, value: r.clone() });
            }
            free_index = Some(m);
            out.push(free.clone());
        } else {
            out.push(r / int(d));
        }
    }
    Ok(BOdeSolution { series: TruncSeries::from_coeffs(out, rhs.prec()), free_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    #[test]
    fn resonant_case_with_free_coefficient() {
        let rhs = TruncSeries::from_ints(&[1, 0, 1], 6);
        let sol = solve_b_ode(1, &rhs).unwrap();
        assert_eq!(sol.series, TruncSeries::from_ints(&[-1, 0, 1], 6));
        assert_eq!(sol.free_index, Some(1));
        let z = solve_b_ode_with(1, &rhs, &rat(2, 3)).unwrap();
        assert_eq!(z.series.coeff_or_zero(1), rat(2, 3));
    }

    #[test]
    fn obstruction_reports_index_and_value() {
        let rhs = TruncSeries::from_ints(&[0, 1], 6);
        let err = solve_b_ode(1, &rhs).unwrap_err();
        assert_eq!(err, OdeObstruction { index: 1, value: int(1) });
        assert!(err.to_string().contains("b^1"));
    }

    #[test]
    fn negative_c_never_obstructs() {
        let rhs = TruncSeries::from_ints(&[1, 2, 3], 5);
        let sol = solve_b_ode(-1, &rhs).unwrap();
        assert_eq!(sol.free_index, None);
        // b T' + T = rhs gives t_m = rhs_m / (m + 1)
        assert_eq!(sol.series, TruncSeries::from_coeffs(vec![int(1), int(1), int(1)], 5));
    }

    #[test]
    fn solution_satisfies_the_equation() {
        let rhs = TruncSeries::from_ints(&[3, -1, 0, 2, 5, 7], 6);
        let sol = solve_b_ode(2, &rhs).unwrap().series;
        let lhs = &sol.euler() - &sol.scale(&int(2));
        assert_eq!(lhs, rhs);
    }
}
