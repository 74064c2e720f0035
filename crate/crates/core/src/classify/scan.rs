//! Pointwise classification of a family of expansions over a grid.

use rayon::prelude::*;

use super::rank::{thematic_rank, RankCertificate};
use crate::ab_algebra::{factor_homogeneous, HomogeneousOperator};
use crate::error::{Error, Result};
use crate::series::Rational;
use crate::theme::{bernstein_from_generator, invariants_from_exponents, FundamentalInvariants};
use crate::xi::XiElement;

/// Parameter values, in the order the parameters were declared.
pub type GridPoint = Vec<(String, Rational)>;

#[derive(Clone, Debug)]
pub struct PointReport {
    pub point: GridPoint,
    pub rank: Option<RankCertificate>,
    /// Factor exponents `mu_1 .. mu_k` of the Bernstein element.
    pub bernstein: Option<Vec<Rational>>,
    pub element: Option<HomogeneousOperator>,
    pub invariants: Option<FundamentalInvariants>,
    pub flags: Vec<String>,
    pub error: Option<String>,
}

/// Grid points sharing rank and invariants.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub rank: Option<usize>,
    pub invariants: Option<FundamentalInvariants>,
    pub points: Vec<GridPoint>,
}

#[derive(Clone, Debug)]
pub struct ScanReport {
    pub points: Vec<PointReport>,
    pub strata: Vec<Stratum>,
    /// Thematic points with different invariants: the family is not
    /// thematic as a family across the jump.
    pub bernstein_jump: bool,
    pub rank_jump: bool,
    pub inconclusive: bool,
}

fn classify_point(point: GridPoint, k: usize, x: Result<XiElement>) -> PointReport {
    let mut rep =
        PointReport { point, rank: None, bernstein: None, element: None, invariants: None, flags: Vec::new(), error: None };
    let x = match x {
        Ok(x) => x,
        Err(e) => {
            rep.error = Some(e.to_string());
            return rep;
        }
    };
    let cert = thematic_rank(&x, k);
    if !cert.is_exact() {
        rep.flags.push("inconclusive".into());
    }
    let thematic = cert.lower == k;
    rep.rank = Some(cert);
    if !thematic {
        rep.flags.push("not-thematic".into());
        return rep;
    }
    let run = || -> Result<(HomogeneousOperator, Vec<Rational>, FundamentalInvariants)> {
        let data = bernstein_from_generator(&x, k)?;
        let mus = factor_homogeneous(&data.element, x.lambda())?;
        let inv = invariants_from_exponents(&mus)?;
        Ok((data.element, mus, inv))
    };
    match run() {
        Ok((el, mus, inv)) => {
            rep.element = Some(el);
            rep.bernstein = Some(mus);
            rep.invariants = Some(inv);
        }
        Err(e) => {
            if matches!(e, Error::Inconclusive(_) | Error::PrecisionExhausted(_)) {
                rep.flags.push("inconclusive".into());
            }
            rep.error = Some(e.to_string());
        }
    }
    rep
}

/// Classifies `eval(point)` at every grid point (in parallel) and groups the
/// results into strata. Points are reported in lexicographic order of their
/// coordinates; per-point errors are recorded, never fatal.
pub fn scan_family<F>(grid: &[GridPoint], k: usize, eval: F) -> ScanReport
where
    F: Fn(&GridPoint) -> Result<XiElement> + Sync,
{
    let mut grid = grid.to_vec();
    grid.sort_by(|p, q| p.iter().map(|c| &c.1).cmp(q.iter().map(|c| &c.1)));
    grid.dedup();
    let mut points: Vec<PointReport> = grid
        .into_par_iter()
        .map(|pt| {
            let x = eval(&pt);
            classify_point(pt, k, x)
        })
        .collect();
    let mut strata: Vec<Stratum> = Vec::new();
    for p in &points {
        let rank = p.rank.as_ref().filter(|c| c.is_exact()).map(|c| c.lower);
        match strata.iter_mut().find(|s| s.rank == rank && s.invariants == p.invariants) {
            Some(s) => s.points.push(p.point.clone()),
            None => strata.push(Stratum { rank, invariants: p.invariants.clone(), points: vec![p.point.clone()] }),
        }
    }
    let thematic: Vec<&Stratum> = strata.iter().filter(|s| s.rank == Some(k) && s.invariants.is_some()).collect();
    let bernstein_jump = thematic.len() > 1;
    let ranks: Vec<Option<usize>> = strata.iter().map(|s| s.rank).filter(|r| r.is_some()).collect();
    let rank_jump = ranks.windows(2).any(|w| w[0] != w[1]);
    if bernstein_jump || rank_jump {
        let main = strata.iter().enumerate().max_by_key(|(i, s)| (s.points.len(), usize::MAX - i)).map(|(i, _)| i).unwrap();
        for p in points.iter_mut() {
            let rank = p.rank.as_ref().filter(|c| c.is_exact()).map(|c| c.lower);
            let s = &strata[main];
            if s.rank != rank || s.invariants != p.invariants {
                p.flags.push("jump".into());
            }
        }
    }
    let inconclusive = points.iter().any(|p| p.flags.iter().any(|f| f == "inconclusive"));
    ScanReport { points, strata, bernstein_jump, rank_jump, inconclusive }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{int, rat, TruncSeries};
    use crate::xi::log_power;

    fn jump_family(z: &Rational) -> Result<XiElement> {
        let l = rat(1, 2);
        let t = log_power(&rat(3, 2), 1, &l, 1, 32)?;
        let u = XiElement::basis(&l, 0, 1, 32)?.series_mul(&TruncSeries::from_coeffs(vec![z.clone(), int(1)], 32));
        t.add(&u)
    }

    #[test]
    fn jump_is_flagged_at_zero() {
        let grid: Vec<GridPoint> = [1, -1, 0, 2].iter().map(|z| vec![("z".to_string(), int(*z))]).collect();
        let rep = scan_family(&grid, 2, |p| jump_family(&p[0].1));
        assert!(rep.bernstein_jump);
        assert_eq!(rep.points[0].point[0].1, int(-1));
        let flagged: Vec<Rational> =
            rep.points.iter().filter(|p| p.flags.contains(&"jump".to_string())).map(|p| p.point[0].1.clone()).collect();
        assert_eq!(flagged, vec![int(0)]);
        assert_eq!(rep.points[1].bernstein, Some(vec![rat(5, 2), rat(3, 2)]));
    }

    #[test]
    fn constant_family_single_stratum() {
        let grid: Vec<GridPoint> = (0..3).map(|z| vec![("z".to_string(), int(z))]).collect();
        let rep = scan_family(&grid, 1, |_| XiElement::basis(&rat(1, 2), 0, 0, 16));
        assert_eq!(rep.strata.len(), 1);
        assert_eq!(rep.strata[0].rank, Some(1));
        assert!(!rep.bernstein_jump && !rep.rank_jump);
    }
}
