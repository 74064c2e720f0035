//! Property tests over randomly generated series, operators and themes.

use abtheme::ab_algebra::{factor_homogeneous, ore_apply, ore_mul, HomogeneousOperator, OreOperator};
use abtheme::classify::{
    canonical_rank2_generator, isomorphism_test, rank2_reduce, solve_b_ode, ClassifyOptions,
};
use abtheme::linalg::{solve_sparse, LinearOutcome, SparseRow};
use abtheme::series::{int, rat, Rational, TruncSeries};
use abtheme::theme::{bernstein_from_generator, embed_into_xi, FundamentalInvariants, ThemePresentation};
use abtheme::xi::{solve_shifted_inverse, xi_quotient_drop_log0, Xi, XiElement};
use num_traits::{One, Zero};
use proptest::prelude::*;

const PREC: usize = 12;

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn series() -> impl Strategy<Value = TruncSeries> {
    prop::collection::vec(rational(), 1..6).prop_map(|c| TruncSeries::from_coeffs(c, PREC))
}

fn unit() -> impl Strategy<Value = TruncSeries> {
    (series(), (1i64..=5).prop_map(int)).prop_map(|(s, c)| {
        let mut s = s;
        s.set_coefficient(0, c).unwrap();
        s
    })
}

fn operator() -> impl Strategy<Value = OreOperator> {
    prop::collection::vec(series(), 1..4).prop_map(OreOperator::new)
}

fn element() -> impl Strategy<Value = XiElement> {
    prop::collection::vec(series(), 1..4).prop_map(|c| XiElement::from_comps(&rat(1, 2), c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(f in series(), g in series(), h in series()) {
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        prop_assert_eq!(&(&f - &g) + &g, f.clone());
    }

    #[test]
    fn inverse_of_units(u in unit()) {
        let inv = u.invert().unwrap();
        prop_assert_eq!(&u * &inv, TruncSeries::one(PREC));
    }

    #[test]
    fn leibniz_rule(f in series(), g in series()) {
        let lhs = (&f * &g).derivative().unwrap();
        let rhs = &(&f.derivative().unwrap() * &g) + &(&f * &g.derivative().unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn ore_product_is_associative(p in operator(), q in operator(), r in operator()) {
        let lhs = ore_mul(&ore_mul(&p, &q), &r);
        let rhs = ore_mul(&p, &ore_mul(&q, &r));
        prop_assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn ore_action_is_a_module_action(p in operator(), q in operator(), x in element()) {
        let lhs = ore_apply(&ore_mul(&p, &q), &x, &Xi).unwrap();
        let rhs = ore_apply(&p, &ore_apply(&q, &x, &Xi).unwrap(), &Xi).unwrap();
        prop_assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn commutation_on_elements(x in element()) {
        let ab = x.b_mul().a_apply().unwrap();
        let ba = x.a_apply().unwrap().b_mul();
        let r = ab.sub(&ba).unwrap().sub(&x.b_mul().b_mul()).unwrap();
        prop_assert!(r.is_zero());
    }

    #[test]
    fn shifted_inverse_round_trip(x in element(), q in 0i64..4) {
        // y = (a - (lambda + q) b) x always lies in the image
        let mu = rat(1, 2) + int(q);
        let y = x.a_apply().unwrap().sub(&x.b_mul().scale(&mu)).unwrap();
        let z = solve_shifted_inverse(&y, q).unwrap();
        let back = z.a_apply().unwrap().sub(&z.b_mul().scale(&mu)).unwrap();
        prop_assert!(back.agrees_with(&y));
    }

    #[test]
    fn quotient_intertwines_a(x in element()) {
        prop_assume!(x.log_bound() >= 1);
        let lhs = xi_quotient_drop_log0(&x.a_apply().unwrap()).unwrap();
        let rhs = xi_quotient_drop_log0(&x).unwrap().a_apply().unwrap();
        prop_assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn factorization_round_trip(num in 5i64..12, p in prop::collection::vec(0usize..4, 0..4)) {
        let inv = FundamentalInvariants::new(rat(num, 2), p);
        let mus = inv.lambdas();
        let op = HomogeneousOperator::from_factors(&mus);
        prop_assert_eq!(factor_homogeneous(&op, &inv.class()).unwrap(), mus);
    }

    #[test]
    fn b_ode_matches_brute_force(c in -2i64..5, rhs in series()) {
        // unknowns t_0 .. t_{n-1}; row m: (m - c) t_m = rhs_m
        let n = rhs.prec();
        let rows: Vec<SparseRow> = (0..n)
            .map(|m| {
                let mut r = SparseRow::new();
                r.add_term(m, &int(m as i64 - c));
                r.rhs = rhs.coeff_or_zero(m);
                r
            })
            .collect();
        let brute = solve_sparse(n, &rows);
        match (solve_b_ode(c, &rhs), brute) {
            (Ok(sol), LinearOutcome::Consistent { particular, .. }) => {
                prop_assert_eq!(sol.series, TruncSeries::from_coeffs(particular, n));
            }
            (Err(o), LinearOutcome::Inconsistent { .. }) => {
                prop_assert_eq!(o.index as i64, c);
                prop_assert!(!o.value.is_zero());
            }
            (a, _) => prop_assert!(false, "solvability disagrees: {:?}", a),
        }
    }

    #[test]
    fn rank2_reduction_is_idempotent(alpha in rational(), p in 1usize..4, twice in 5i64..9) {
        let l1 = rat(twice, 2);
        let psi = canonical_rank2_generator(&l1, p, &alpha, 20).unwrap();
        let r = rank2_reduce(&psi, &l1, p).unwrap();
        prop_assert_eq!(r.alpha.clone(), Some(alpha.clone()));
        let again = rank2_reduce(&r.canonical, &l1, p).unwrap();
        prop_assert_eq!(again.alpha, Some(alpha));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bernstein_element_ignores_unit_multiples(s in unit(), u in unit(), p in 1usize..4, sp in 1i64..5) {
        // a theme needs a non-zero coefficient of b^p in S
        let mut s = s;
        s.set_coefficient(p, int(sp)).unwrap();
        let inv = FundamentalInvariants::new(rat(7, 2), vec![p]);
        let th = ThemePresentation::new(inv, vec![s], 28).unwrap();
        let phi = embed_into_xi(&th).unwrap();
        let x = phi.phi();
        let b1 = bernstein_from_generator(x, 2).unwrap().element;
        let b2 = bernstein_from_generator(&x.series_mul(&u.truncate(x.prec())), 2).unwrap().element;
        prop_assert_eq!(b1, b2);
    }

    #[test]
    fn isomorphism_is_reflexive_and_symmetric(
        a in 1i64..4, b in 1i64..4, g in -3i64..4, g2 in -3i64..4
    ) {
        let inv = FundamentalInvariants::new(int(3), vec![1, 1]);
        let mk = |g: i64| ThemePresentation::new(
            inv.clone(),
            vec![TruncSeries::from_ints(&[1, b, g], 24), TruncSeries::from_ints(&[1, a], 24)],
            24,
        ).unwrap();
        let opts = ClassifyOptions::default();
        prop_assert!(isomorphism_test(&mk(g), &mk(g), &opts).unwrap().is_isomorphic());
        let fwd = isomorphism_test(&mk(g), &mk(g2), &opts).unwrap().is_isomorphic();
        let bwd = isomorphism_test(&mk(g2), &mk(g), &opts).unwrap().is_isomorphic();
        prop_assert_eq!(fwd, bwd);
        prop_assert_eq!(fwd, a != b || g == g2);
    }
}

#[test]
fn one_is_the_product_identity() {
    let s = TruncSeries::from_ints(&[2, 3, 5], 6);
    assert_eq!(&s * &TruncSeries::one(6), s);
    assert!(Rational::one() > Rational::zero());
}
