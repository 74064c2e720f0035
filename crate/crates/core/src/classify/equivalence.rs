//! Isomorphism and invariance of presentations.
//!
//! Both questions are answered by the kernel cascade and then re-checked by
//! a direct coefficient system: unknown coefficients of `x` up to a fixed
//! order, the operator applied with the presentation's `a`, and exact
//! elimination. The two routes must agree, otherwise the answer is
//! `Inconclusive`.

use std::fmt;

use num_traits::{One, Zero};

use super::cascade::{run_cascade, Cascade, Definition, Obstruction, Relation};
use crate::ab_algebra::{ore_apply, OreOperator};
use crate::error::{Error, Result};
use crate::linalg::{solve_sparse, LinearOutcome, SparseRow};
use crate::series::{Rational, TruncSeries};
use crate::theme::{operator_chain, FundamentalInvariants, ThemeElement, ThemePresentation};

/// Tuning of the decision procedures.
#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    /// Run the direct coefficient system as a second opinion.
    pub cross_check: bool,
    /// Number of coefficients per component in the direct system.
    pub generic_order: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { cross_check: true, generic_order: 12 }
    }
}

/// Values of the cascade unknowns in a witness.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub names: Vec<String>,
    pub values: Vec<Rational>,
    pub relations: Vec<Relation>,
    pub definitions: Vec<Definition>,
}

/// `x in F_{k-1} \ F_{k-2}` with `P x = 0`.
#[derive(Clone, Debug)]
pub struct InvarianceWitness {
    pub x: ThemeElement,
    pub assignment: Assignment,
    pub cross_checked: bool,
}

#[derive(Clone, Debug)]
pub enum InvarianceOutcome {
    Invariant(InvarianceWitness),
    NotInvariant(Obstruction),
}

impl InvarianceOutcome {
    pub fn is_invariant(&self) -> bool {
        matches!(self, InvarianceOutcome::Invariant(_))
    }
}

/// Triangular basis `eps_1 .. eps_k` of `E` satisfying the relations of `E'`.
#[derive(Clone, Debug)]
pub struct IsomorphismWitness {
    pub basis: Vec<ThemeElement>,
    pub assignment: Assignment,
    pub cross_checked: bool,
}

/// Why two presentations are not isomorphic.
#[derive(Clone, Debug)]
pub enum Distinguisher {
    Invariants { left: FundamentalInvariants, right: FundamentalInvariants },
    Relations(Obstruction),
}

impl fmt::Display for Distinguisher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distinguisher::Invariants { left, right } => write!(f, "fundamental invariants differ: {left} vs {right}"),
            Distinguisher::Relations(o) => write!(f, "{o}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum IsomorphismOutcome {
    Isomorphic(IsomorphismWitness),
    NotIsomorphic(Distinguisher),
}

impl IsomorphismOutcome {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, IsomorphismOutcome::Isomorphic(_))
    }
}

fn assignment(c: &Cascade, values: Vec<Rational>) -> Assignment {
    Assignment {
        names: c.names.clone(),
        values,
        relations: c.relations.clone(),
        definitions: c.definitions.clone(),
    }
}

fn no_leading_term(c: &Cascade, what: &str) -> Obstruction {
    Obstruction {
        reason: format!("{what} admits no leading term"),
        names: c.names.clone(),
        chain: Vec::new(),
        definitions: c.definitions.clone(),
        normalization: None,
        certificate: Default::default(),
    }
}

/// Solves the cascade with `var = 1`; `Err` carries the obstruction.
fn solve_normalized(c: &Cascade, var: usize) -> Result<std::result::Result<Vec<Rational>, Obstruction>> {
    if !c.unchecked.is_empty() {
        return Err(Error::Inconclusive(c.unchecked.join("; ")));
    }
    match solve_sparse(c.names.len(), &c.rows(var)) {
        LinearOutcome::Consistent { particular, .. } => Ok(Ok(particular)),
        LinearOutcome::Inconsistent { certificate } => Ok(Err(c.obstruction(var, &certificate))),
    }
}

/// Searches `x in F_{k-1} \ F_{k-2}` with `P(sigma) x = 0`.
///
/// The cascade runs on the tail operator
/// `P_1 = (a - lambda_2 b) S_2^{-1} .. S_{k-1}^{-1} (a - lambda_k b)`, which
/// has the same kernel on `F_{k-1}` because `(a - lambda_2 b)` maps `F_1`
/// into `b F_1`.
pub fn invariance_test(e: &ThemePresentation, opts: &ClassifyOptions) -> Result<InvarianceOutcome> {
    let k = e.rank();
    if k < 2 {
        return Err(Error::InvalidInput("invariance needs rank at least 2".into()));
    }
    let lambdas = e.invariants().lambdas();
    let cascade = run_cascade(e, &lambdas[1..], &e.relations()[1..])?;
    let outcome = match cascade.diagonal[k - 2] {
        None => InvarianceOutcome::NotInvariant(no_leading_term(&cascade, "the e_(k-1) component")),
        Some(top) => match solve_normalized(&cascade, top)? {
            Err(o) => InvarianceOutcome::NotInvariant(o),
            Ok(values) => {
                let x = cascade.element(k - 2, &values);
                let residual = ore_apply(&e.defining_operator()?, &x, e)?;
                if !residual.is_zero() {
                    return Err(Error::Inconclusive(format!("cascade witness leaves the residual {residual}")));
                }
                InvarianceOutcome::Invariant(InvarianceWitness {
                    x,
                    assignment: assignment(&cascade, values),
                    cross_checked: false,
                })
            }
        },
    };
    if !opts.cross_check {
        return Ok(outcome);
    }
    let direct = generic_invariant(e, opts.generic_order)?;
    match (outcome, direct) {
        (InvarianceOutcome::Invariant(mut w), true) => {
            w.cross_checked = true;
            Ok(InvarianceOutcome::Invariant(w))
        }
        (o @ InvarianceOutcome::NotInvariant(_), false) => Ok(o),
        (o, _) => Err(Error::Inconclusive(format!(
            "cascade says {}, the direct coefficient system disagrees",
            if o.is_invariant() { "invariant" } else { "not invariant" }
        ))),
    }
}

/// Searches a triangular basis of `E` with unit diagonal satisfying the
/// relations of `E'`, i.e. `eps_k` with `P(sigma') eps_k = 0`.
pub fn isomorphism_test(e: &ThemePresentation, e2: &ThemePresentation, opts: &ClassifyOptions) -> Result<IsomorphismOutcome> {
    if e.invariants() != e2.invariants() {
        return Ok(IsomorphismOutcome::NotIsomorphic(Distinguisher::Invariants {
            left: e.invariants().clone(),
            right: e2.invariants().clone(),
        }));
    }
    let k = e.rank();
    let lambdas = e.invariants().lambdas();
    let cascade = run_cascade(e, &lambdas, e2.relations())?;
    let top = cascade.diagonal[k - 1].expect("diagonal exponents vanish for an isomorphism");
    let outcome = match solve_normalized(&cascade, top)? {
        Err(o) => IsomorphismOutcome::NotIsomorphic(Distinguisher::Relations(o)),
        Ok(values) => {
            let basis: Vec<ThemeElement> = (0..k).map(|j| cascade.element(j, &values)).collect();
            check_basis(e, e2, &basis)?;
            IsomorphismOutcome::Isomorphic(IsomorphismWitness {
                basis,
                assignment: assignment(&cascade, values),
                cross_checked: false,
            })
        }
    };
    if !opts.cross_check {
        return Ok(outcome);
    }
    let direct = generic_isomorphic(e, e2, opts.generic_order)?;
    match (outcome, direct) {
        (IsomorphismOutcome::Isomorphic(mut w), true) => {
            w.cross_checked = true;
            Ok(IsomorphismOutcome::Isomorphic(w))
        }
        (o @ IsomorphismOutcome::NotIsomorphic(_), false) => Ok(o),
        (o, _) => Err(Error::Inconclusive(format!(
            "cascade says {}, the direct coefficient system disagrees",
            if o.is_isomorphic() { "isomorphic" } else { "not isomorphic" }
        ))),
    }
}

/// Checks `(a - lambda_j b) eps_j = S'_{j-1} eps_{j-1}` and the unit diagonal.
pub fn check_basis(e: &ThemePresentation, e2: &ThemePresentation, basis: &[ThemeElement]) -> Result<()> {
    let lambdas = e.invariants().lambdas();
    for (j, eps) in basis.iter().enumerate() {
        if eps.comps[j].coeffs()[0].is_zero() || eps.comps[j + 1..].iter().any(|c| !c.is_zero()) {
            return Err(Error::Inconclusive(format!("basis vector {} is not triangular with unit diagonal", j + 1)));
        }
        let ae = e.a_apply(eps)?;
        let be = ThemeElement { comps: eps.comps.iter().map(|c| c.shift(1).scale(&lambdas[j])).collect() };
        let mut lhs = ae.sub(&be);
        if j > 0 {
            let s = &e2.relations()[j - 1];
            let rhs = ThemeElement { comps: basis[j - 1].comps.iter().map(|c| c * s).collect() };
            lhs = lhs.sub(&rhs);
        }
        if !lhs.is_zero() {
            return Err(Error::Inconclusive(format!("basis vector {} violates its relation: {lhs}", j + 1)));
        }
    }
    Ok(())
}

/// Images of `b^i e_h` (`h < comps`, `i < order`) under `op`.
fn columns(e: &ThemePresentation, op: &OreOperator, comps: usize, order: usize) -> Result<Vec<ThemeElement>> {
    let prec = e.prec();
    let mut out = Vec::with_capacity(comps * order);
    for h in 0..comps {
        for i in 0..order {
            let mut x = e.zero();
            x.comps[h] = TruncSeries::monomial(Rational::one(), i, prec);
            let y = ore_apply(op, &x, e)?;
            if y.prec() < order {
                return Err(Error::PrecisionExhausted(format!(
                    "operator image known to order {} but {order} coefficients are needed",
                    y.prec()
                )));
            }
            out.push(y);
        }
    }
    Ok(out)
}

/// Coefficients `b^d` (`d < order`) of `sum_col x_col image_col = 0`;
/// coefficient `d` only involves unknowns of order `<= d`, so the
/// truncated system is exact.
fn equations(rank: usize, images: &[ThemeElement], order: usize) -> Vec<SparseRow> {
    let mut rows = Vec::with_capacity(rank * order);
    for g in 0..rank {
        for d in 0..order {
            let mut row = SparseRow::new();
            for (col, img) in images.iter().enumerate() {
                row.add_term(col, &img.comps[g].coeff_or_zero(d));
            }
            rows.push(row);
        }
    }
    rows
}

fn pin(col: usize, value: Rational) -> SparseRow {
    let mut row = SparseRow::new();
    row.add_term(col, &Rational::one());
    row.rhs = value;
    row
}

fn order_for(e: &ThemePresentation, requested: usize) -> usize {
    requested.min(e.prec().saturating_sub(e.rank() + 1)).max(1)
}

/// Direct system for `P(sigma') x = 0`, `x = e_k + ...` in `E`.
pub fn generic_isomorphic(e: &ThemePresentation, e2: &ThemePresentation, order: usize) -> Result<bool> {
    let k = e.rank();
    let order = order_for(e, order);
    let op = operator_chain(&e.invariants().lambdas(), e2.relations(), e.prec())?;
    let images = columns(e, &op, k, order)?;
    let mut rows = equations(k, &images, order);
    rows.push(pin((k - 1) * order, Rational::one()));
    Ok(matches!(solve_sparse(images.len(), &rows), LinearOutcome::Consistent { .. }))
}

/// Direct system for `P(sigma) x = 0` with `x in F_{k-1}` of exact
/// valuation `n0` on `e_{k-1}`, for every `n0 < order / 2`.
pub fn generic_invariant(e: &ThemePresentation, order: usize) -> Result<bool> {
    let k = e.rank();
    let order = order_for(e, order);
    let op = e.defining_operator()?;
    let images = columns(e, &op, k - 1, order)?;
    let base = equations(k, &images, order);
    let top = (k - 2) * order;
    for n0 in 0..order.div_ceil(2) {
        let mut rows = base.clone();
        for i in 0..n0 {
            rows.push(pin(top + i, Rational::zero()));
        }
        rows.push(pin(top + n0, Rational::one()));
        if matches!(solve_sparse(images.len(), &rows), LinearOutcome::Consistent { .. }) {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{int, rat};

    /// `E(alpha, beta, gamma)`: `(a - lambda b) e_3 = (1 + alpha b) e_2`,
    /// `(a - lambda b) e_2 = (1 + beta b + gamma b^2) e_1`.
    fn e3(alpha: i64, beta: i64, gamma: i64) -> ThemePresentation {
        let inv = FundamentalInvariants::new(int(3), vec![1, 1]);
        let s1 = TruncSeries::from_ints(&[1, beta, gamma], 24);
        let s2 = TruncSeries::from_ints(&[1, alpha], 24);
        ThemePresentation::new(inv, vec![s1, s2], 24).unwrap()
    }

    fn value(a: &Assignment, name: &str) -> Rational {
        let i = a.names.iter().position(|n| n == name).unwrap();
        a.values[i].clone()
    }

    #[test]
    fn rank3_isomorphism_value_of_u() {
        let opts = ClassifyOptions::default();
        let out = isomorphism_test(&e3(1, 2, 7), &e3(1, 2, 0), &opts).unwrap();
        let IsomorphismOutcome::Isomorphic(w) = out else { panic!("expected a witness") };
        assert!(w.cross_checked);
        // eps_3 = e_3 + U e_2 + V e_1 with U = (gamma - gamma') / (alpha - beta)
        assert_eq!(w.basis[2].comps[1], TruncSeries::constant(int(-7), w.basis[2].comps[1].prec()));
        assert_eq!(value(&w.assignment, "τ"), int(1));
    }

    #[test]
    fn rank3_equal_alpha_beta_distinguishes_gamma() {
        let opts = ClassifyOptions::default();
        let out = isomorphism_test(&e3(2, 2, 5), &e3(2, 2, 1), &opts).unwrap();
        let IsomorphismOutcome::NotIsomorphic(Distinguisher::Relations(o)) = out else { panic!("expected a distinguisher") };
        assert!(o.verify());
        assert!(isomorphism_test(&e3(2, 2, 5), &e3(2, 2, 5), &opts).unwrap().is_isomorphic());
    }

    #[test]
    fn rank3_invariance_witness() {
        let opts = ClassifyOptions::default();
        let out = invariance_test(&e3(2, 2, 5), &opts).unwrap();
        let InvarianceOutcome::Invariant(w) = out else { panic!("expected invariant") };
        assert_eq!(w.x.to_string(), "e2 - 5*b*e1");
        assert!(!invariance_test(&e3(1, 2, 5), &opts).unwrap().is_invariant());
    }

    #[test]
    fn rank4_obstruction_chain() {
        // lambda_1 = 7/2, p = (3, 2, 2); S_1 = 1 + delta b + eps b^2 + theta b^3,
        // S_2 = 1 + beta b + gamma b^2, S_3 = 1 + alpha b^2
        let inv = FundamentalInvariants::new(rat(7, 2), vec![3, 2, 2]);
        let build = |alpha: i64, gamma: i64| {
            let s1 = TruncSeries::from_ints(&[1, 1, 2, 3], 24);
            let s2 = TruncSeries::from_ints(&[1, 4, gamma], 24);
            let s3 = TruncSeries::from_ints(&[1, 0, alpha], 24);
            ThemePresentation::new(inv.clone(), vec![s1, s2, s3], 24).unwrap()
        };
        let opts = ClassifyOptions::default();
        assert!(invariance_test(&build(5, 3), &opts).unwrap().is_invariant());
        let InvarianceOutcome::NotInvariant(o) = invariance_test(&build(10, 3), &opts).unwrap() else {
            panic!("expected an obstruction")
        };
        assert!(o.verify());
        let rho = o.names.iter().position(|n| n == "ρ").unwrap();
        let sigma = o.names.iter().position(|n| n == "σ").unwrap();
        // rho * gamma = sigma * theta with gamma = 3, theta = 3
        assert!(o.chain.iter().any(|r| r.form.coeff(rho) == int(3) && r.form.coeff(sigma) == int(-3)));
        let t0 = o.definitions.iter().find(|d| d.name == "T(0)").unwrap();
        assert_eq!(t0.form.coeff(sigma), rat(1, 3));
        assert!(o.relation().unwrap().label.starts_with("T(0) = U(0)"));
    }
}
