//! Exact linear algebra: elimination over truncated series with valuation
//! pivoting, and sparse Gaussian elimination over the rationals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::series::{Rational, TruncSeries};

/// Result of eliminating a matrix of truncated series.
#[derive(Clone, Debug)]
pub struct SeriesElimination {
    /// Valuations of the pivots, in pivot order; each is certified (< entry precision).
    pub pivot_valuations: Vec<usize>,
    /// `(row, col)` of each pivot.
    pub pivots: Vec<(usize, usize)>,
    /// Smallest precision to which the unpivoted block is known to vanish
    /// (`None` when that block is empty).
    pub residual_precision: Option<usize>,
    rows: Vec<Vec<TruncSeries>>,
    rhs: Option<Vec<TruncSeries>>,
}

/// Why a series solve failed.
#[derive(Clone, Debug, PartialEq)]
pub enum SeriesSolveFailure {
    /// A remaining equation has a right-hand side that does not vanish.
    Inconsistent { row: usize, valuation: usize },
    /// A pivot division would leave the power series ring.
    NotIntegral { col: usize, valuation: usize, pivot_valuation: usize },
    /// Not enough known coefficients to decide.
    Precision(String),
}

impl SeriesElimination {
    /// Eliminates `matrix` (rows of entries) with full pivoting on minimal
    /// valuation. `rhs`, when given, receives the same row operations.
    pub fn new(matrix: Vec<Vec<TruncSeries>>, rhs: Option<Vec<TruncSeries>>) -> Result<Self> {
        let nrows = matrix.len();
        let ncols = matrix.first().map_or(0, |r| r.len());
        let mut rows = matrix;
        let mut rhs = rhs;
        let mut row_done = vec![false; nrows];
        let mut col_done = vec![false; ncols];
        let mut pivots = Vec::new();
        let mut pivot_valuations = Vec::new();
        loop {
            let mut best: Option<(usize, usize, usize)> = None;
            for (r, row) in rows.iter().enumerate() {
                if row_done[r] {
                    continue;
                }
                for (c, e) in row.iter().enumerate() {
                    if col_done[c] {
                        continue;
                    }
                    if let Some(v) = e.valuation() {
                        if best.is_none_or(|(_, _, bv)| v < bv) {
                            best = Some((r, c, v));
                        }
                    }
                }
            }
            let Some((r, c, v)) = best else { break };
            row_done[r] = true;
            col_done[c] = true;
            pivots.push((r, c));
            pivot_valuations.push(v);
            let unit_inv = rows[r][c].unshift(v)?.invert()?;
            for i in 0..nrows {
                if row_done[i] {
                    continue;
                }
                let e = &rows[i][c];
                if e.is_zero() {
                    if e.prec() <= v {
                        return Err(Error::PrecisionExhausted(format!(
                            "entry ({i},{c}) is known only to order {} below the pivot valuation {v}",
                            e.prec()
                        )));
                    }
                    continue;
                }
                if e.prec() <= v {
                    return Err(Error::PrecisionExhausted(format!("entry ({i},{c}) too short for pivot valuation {v}")));
                }
                // factor = e / pivot, in the power series ring since val(e) >= v.
                let factor = e.unshift(v)?.mul_sharp(&unit_inv);
                for cc in 0..ncols {
                    if col_done[cc] && cc != c {
                        continue;
                    }
                    let upd = factor.mul_sharp(&rows[r][cc]);
                    rows[i][cc] = &rows[i][cc] - &upd;
                }
                // the pivot column of row i is now exactly zero to its precision
                if let Some(rhs) = rhs.as_mut() {
                    let upd = factor.mul_sharp(&rhs[r]);
                    rhs[i] = &rhs[i] - &upd;
                }
            }
        }
        let mut residual_precision: Option<usize> = None;
        for (r, row) in rows.iter().enumerate() {
            if row_done[r] {
                continue;
            }
            for (c, e) in row.iter().enumerate() {
                if !col_done[c] {
                    residual_precision = Some(residual_precision.map_or(e.prec(), |p| p.min(e.prec())));
                }
            }
        }
        Ok(SeriesElimination { pivot_valuations, pivots, residual_precision, rows, rhs })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Solves for the column unknowns (non-pivot columns set to zero).
    pub fn solve(&self) -> std::result::Result<Vec<TruncSeries>, SeriesSolveFailure> {
        let rhs = self.rhs.as_ref().expect("solve needs a right-hand side");
        let ncols = self.rows.first().map_or(0, |r| r.len());
        let pivot_rows: Vec<usize> = self.pivots.iter().map(|p| p.0).collect();
        for (r, e) in rhs.iter().enumerate() {
            if pivot_rows.contains(&r) {
                continue;
            }
            if let Some(v) = e.valuation() {
                return Err(SeriesSolveFailure::Inconsistent { row: r, valuation: v });
            }
        }
        let big = rhs.iter().map(|s| s.prec()).max().unwrap_or(1);
        let mut sol: Vec<Option<TruncSeries>> = vec![None; ncols];
        for (idx, &(r, c)) in self.pivots.iter().enumerate().rev() {
            let v = self.pivot_valuations[idx];
            let mut num = rhs[r].clone();
            for &(_, cc) in &self.pivots[idx + 1..] {
                let s = sol[cc].as_ref().unwrap();
                num = &num - &self.rows[r][cc].mul_sharp(s);
            }
            if num.prec() <= v {
                return Err(SeriesSolveFailure::Precision(format!(
                    "numerator for unknown {c} known to order {} but pivot valuation is {v}",
                    num.prec()
                )));
            }
            if let Some(nv) = num.valuation() {
                if nv < v {
                    return Err(SeriesSolveFailure::NotIntegral { col: c, valuation: nv, pivot_valuation: v });
                }
            }
            let unit_inv = self.rows[r][c]
                .unshift(v)
                .and_then(|u| u.invert())
                .map_err(|e| SeriesSolveFailure::Precision(e.to_string()))?;
            let q = num.unshift(v).map_err(|e| SeriesSolveFailure::Precision(e.to_string()))?;
            sol[c] = Some(q.mul_sharp(&unit_inv));
        }
        Ok(sol.into_iter().map(|s| s.unwrap_or_else(|| TruncSeries::zero(big))).collect())
    }
}

/// One linear equation `sum_c a_c x_c = rhs`, stored sparsely.
#[derive(Clone, Debug, Default)]
pub struct SparseRow {
    pub coeffs: BTreeMap<usize, Rational>,
    pub rhs: Rational,
}

impl SparseRow {
    pub fn new() -> Self {
        SparseRow::default()
    }

    pub fn add_term(&mut self, col: usize, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(col).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&col);
        }
    }

    fn axpy(&mut self, f: &Rational, other: &SparseRow) {
        for (c, v) in &other.coeffs {
            self.add_term(*c, &(f * v));
        }
        self.rhs += f * &other.rhs;
    }
}

/// Outcome of an exact rational solve.
#[derive(Clone, Debug)]
pub enum LinearOutcome {
    Consistent {
        /// Solution with every free unknown set to zero.
        particular: Vec<Rational>,
        pivot_cols: Vec<usize>,
    },
    /// `sum_r y_r row_r` has zero coefficients and right-hand side `1`.
    Inconsistent { certificate: BTreeMap<usize, Rational> },
}

/// Gaussian elimination on a sparse system with `ncols` unknowns.
pub fn solve_sparse(ncols: usize, rows: &[SparseRow]) -> LinearOutcome {
    match eliminate(ncols, rows, false) {
        Ok(particular) => particular,
        Err(()) => match eliminate(ncols, rows, true) {
            Ok(o) => o,
            Err(()) => unreachable!("tracked elimination always returns an outcome"),
        },
    }
}

fn eliminate(ncols: usize, rows: &[SparseRow], track: bool) -> std::result::Result<LinearOutcome, ()> {
    // pivot column -> (normalized row, combination of input rows)
    let mut pivots: BTreeMap<usize, (SparseRow, BTreeMap<usize, Rational>)> = BTreeMap::new();
    for (idx, input) in rows.iter().enumerate() {
        let mut row = input.clone();
        let mut comb: BTreeMap<usize, Rational> = BTreeMap::new();
        if track {
            comb.insert(idx, Rational::one());
        }
        loop {
            let hit = row.coeffs.keys().find(|c| pivots.contains_key(c)).copied();
            let Some(c) = hit else { break };
            let f = -row.coeffs[&c].clone();
            let (prow, pcomb) = &pivots[&c];
            row.axpy(&f, prow);
            if track {
                for (r, v) in pcomb {
                    let e = comb.entry(*r).or_insert_with(Rational::zero);
                    *e += &f * v;
                    if e.is_zero() {
                        comb.remove(r);
                    }
                }
            }
        }
        match row.coeffs.keys().next().copied() {
            Some(lead) => {
                let inv = row.coeffs[&lead].recip();
                let mut normalized = SparseRow::new();
                normalized.axpy(&inv, &row);
                let comb = comb.into_iter().map(|(r, v)| (r, v * &inv)).collect();
                pivots.insert(lead, (normalized, comb));
            }
            None => {
                if !row.rhs.is_zero() {
                    if !track {
                        return Err(());
                    }
                    let inv = row.rhs.recip();
                    let certificate = comb.into_iter().map(|(r, v)| (r, v * &inv)).collect();
                    return Ok(LinearOutcome::Inconsistent { certificate });
                }
            }
        }
    }
    // Back substitution in decreasing pivot column order; each pivot row only
    // involves its own column and larger ones.
    let mut x = vec![Rational::zero(); ncols];
    for (c, (row, _)) in pivots.iter().rev() {
        let mut v = row.rhs.clone();
        for (cc, a) in row.coeffs.range(c + 1..) {
            v -= a * &x[*cc];
        }
        x[*c] = v;
    }
    Ok(LinearOutcome::Consistent { particular: x, pivot_cols: pivots.keys().copied().collect() })
}

/// Checks a Farkas certificate: the combination has zero coefficients and rhs 1.
pub fn check_certificate(rows: &[SparseRow], certificate: &BTreeMap<usize, Rational>) -> bool {
    let mut acc = SparseRow::new();
    for (r, y) in certificate {
        acc.axpy(y, &rows[*r]);
    }
    acc.coeffs.is_empty() && acc.rhs.is_one()
}

/// Checks that `x` satisfies every row exactly.
pub fn check_solution(rows: &[SparseRow], x: &[Rational]) -> bool {
    rows.iter().all(|r| {
        let lhs: Rational = r.coeffs.iter().map(|(c, a)| a * &x[*c]).sum();
        lhs == r.rhs
    })
}
