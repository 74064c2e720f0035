//! End-to-end classification: embeddings, ranks, scans and parsed families.

use abtheme::ab_algebra::ore_apply;
use abtheme::classify::{
    invariance_test, is_k_thematic, isomorphism_test, parameter_of_rank2, rank2_reduce, scan_family, thematic_rank,
    ClassifyOptions, Distinguisher, GridPoint, InvarianceOutcome, IsomorphismOutcome,
};
use abtheme::parse::{eval_expansion, eval_series, eval_theme_element, Env};
use abtheme::series::{int, rat, Rational, TruncSeries};
use abtheme::theme::{
    bernstein_from_generator, embed_into_xi, invariants_from_bernstein, FundamentalInvariants, ThemePresentation,
};
use abtheme::xi::{log_power, power_monomial, XiElement};
use abtheme::Error;

fn e3(alpha: &Rational, beta: &Rational, gamma: &Rational, prec: usize) -> ThemePresentation {
    let inv = FundamentalInvariants::new(int(3), vec![1, 1]);
    let s1 = TruncSeries::from_coeffs(vec![int(1), beta.clone(), gamma.clone()], prec);
    let s2 = TruncSeries::from_coeffs(vec![int(1), alpha.clone()], prec);
    ThemePresentation::new(inv, vec![s1, s2], prec).unwrap()
}

#[test]
fn embedded_generator_is_thematic_of_its_rank() {
    let th = e3(&int(2), &int(2), &int(5), 32);
    let emb = embed_into_xi(&th).unwrap();
    let cert = thematic_rank(emb.phi(), 3);
    assert!(cert.is_exact());
    assert_eq!(cert.lower, 3);
    let coeffs = is_k_thematic(emb.phi(), 3).unwrap().expect("rank 3");
    assert_eq!(coeffs.len(), 3);
}

#[test]
fn pure_power_is_not_two_thematic() {
    // a s^{lambda-1} = lambda b s^{lambda-1}: rank one
    let x = power_monomial(&rat(5, 2), 0, &rat(1, 2), 0, 24).unwrap();
    let cert = thematic_rank(&x, 2);
    assert_eq!((cert.lower, cert.upper), (1, 1));
    assert_eq!(is_k_thematic(&x, 2).unwrap(), None);
}

#[test]
fn invariants_survive_embedding_for_rank_three() {
    let th = e3(&int(1), &int(2), &int(7), 32);
    let emb = embed_into_xi(&th).unwrap();
    let data = bernstein_from_generator(emb.phi(), 3).unwrap();
    let got = invariants_from_bernstein(&data.element, &th.invariants().class()).unwrap();
    assert_eq!(&got, th.invariants());
}

#[test]
fn rank3_family_scan_has_one_stratum() {
    let grid: Vec<GridPoint> = (1..=3)
        .flat_map(|a| [0i64, 1, 5].map(move |g| vec![("alpha".to_string(), int(a)), ("gamma".to_string(), int(g))]))
        .collect();
    let rep = scan_family(&grid, 3, |p| {
        let th = e3(&p[0].1, &int(2), &p[1].1, 32);
        Ok(embed_into_xi(&th)?.phi().clone())
    });
    assert_eq!(rep.points.len(), 9);
    assert_eq!(rep.strata.len(), 1, "{:?}", rep.strata);
    assert!(!rep.bernstein_jump && !rep.rank_jump && !rep.inconclusive);
    let inv = rep.points[0].invariants.clone().unwrap();
    assert_eq!(inv, FundamentalInvariants::new(int(3), vec![1, 1]));
    // sorted lexicographically
    assert_eq!(rep.points[0].point, vec![("alpha".to_string(), int(1)), ("gamma".to_string(), int(0))]);
}

#[test]
fn invariance_locus_of_rank3_family() {
    let opts = ClassifyOptions::default();
    for a in 1..=3 {
        let th = e3(&int(a), &int(2), &int(5), 32);
        let out = invariance_test(&th, &opts).unwrap();
        assert_eq!(out.is_invariant(), a == 2);
        match out {
            InvarianceOutcome::Invariant(w) => {
                assert_eq!(w.x.to_string(), "e2 - 5*b*e1");
                assert!(w.cross_checked);
            }
            InvarianceOutcome::NotInvariant(o) => assert!(o.verify(), "{o}"),
        }
    }
}

#[test]
fn parsed_witness_is_annihilated() {
    let th = e3(&int(2), &int(2), &int(5), 32);
    let x = eval_theme_element("e2 - 5*b*e1", &Env::new(32), 3).unwrap();
    let p = th.defining_operator().unwrap();
    assert!(ore_apply(&p, &x, &th).unwrap().is_zero());
}

#[test]
fn parsed_family_matches_hand_built_family() {
    let src = "s^(1/2)*log(s) + (z + b)*s^(-1/2)";
    let l = rat(1, 2);
    for z in [-1i64, 0, 3] {
        let env = Env::new(32).with("z", int(z));
        let parsed = eval_expansion(src, &env, 1).unwrap();
        let hand = log_power(&rat(3, 2), 1, &l, 1, 32)
            .unwrap()
            .add(&XiElement::basis(&l, 0, 1, 32).unwrap().series_mul(&TruncSeries::from_ints(&[z, 1], 32)))
            .unwrap();
        assert!(parsed.agrees_with(&hand));
    }
}

#[test]
fn parsed_family_scan_flags_the_jump() {
    let src = "s^(1/2)*log(s) + (z + b)*s^(-1/2)";
    let grid: Vec<GridPoint> = (-4..=4).map(|n| vec![("z".to_string(), rat(n, 2))]).collect();
    let rep = scan_family(&grid, 2, |p| eval_expansion(src, &Env::new(32).with("z", p[0].1.clone()), 1));
    assert!(rep.bernstein_jump);
    let flagged: Vec<&Rational> =
        rep.points.iter().filter(|p| p.flags.iter().any(|f| f == "jump")).map(|p| &p.point[0].1).collect();
    assert_eq!(flagged, vec![&int(0)]);
    let at_zero = rep.points.iter().find(|p| p.point[0].1 == int(0)).unwrap();
    assert_eq!(at_zero.bernstein.as_ref().unwrap(), &vec![rat(5, 2), rat(3, 2)]);
}

#[test]
fn scan_records_evaluation_errors() {
    let grid: Vec<GridPoint> = vec![vec![("z".to_string(), int(1))]];
    let rep = scan_family(&grid, 2, |_| eval_expansion("s^(-3/2)", &Env::new(16), 1));
    assert!(rep.points[0].error.is_some());
    assert!(rep.points[0].invariants.is_none());
}

#[test]
fn rank2_reduction_recovers_the_parameter() {
    let prec = 32;
    for (l1, p, alpha) in [(int(3), 1usize, int(4)), (rat(7, 2), 2, rat(-1, 3))] {
        let inv = FundamentalInvariants::new(l1.clone(), vec![p]);
        // a non-canonical relation: the reduction has to remove the b and b^5 terms
        let s = eval_series(&format!("1 + 2*b + ({alpha})*b^{p} + b^5"), &Env::new(prec)).unwrap();
        let th = ThemePresentation::new(inv, vec![s], prec).unwrap();
        let emb = embed_into_xi(&th).unwrap();
        let red = rank2_reduce(emb.phi(), &l1, p).unwrap();
        let param = parameter_of_rank2(&th).unwrap();
        assert_eq!(red.alpha.as_ref(), Some(&param));
        let again = rank2_reduce(&red.canonical, &l1, p).unwrap();
        assert_eq!(again.alpha, Some(param));
    }
}

#[test]
fn rank2_reduction_rejects_wrong_invariants() {
    let th = ThemePresentation::new(
        FundamentalInvariants::new(int(3), vec![1]),
        vec![TruncSeries::from_ints(&[1, 2], 24)],
        24,
    )
    .unwrap();
    let phi = embed_into_xi(&th).unwrap().phi().clone();
    assert!(matches!(rank2_reduce(&phi, &int(3), 2), Err(Error::WrongInvariants(_))));
}

#[test]
fn different_invariants_are_distinguished_up_front() {
    let a = e3(&int(1), &int(2), &int(0), 24);
    let b = ThemePresentation::new(
        FundamentalInvariants::new(int(3), vec![1, 2]),
        vec![TruncSeries::from_ints(&[1, 2], 24), TruncSeries::from_ints(&[1, 0, 1], 24)],
        24,
    )
    .unwrap();
    match isomorphism_test(&a, &b, &ClassifyOptions::default()).unwrap() {
        IsomorphismOutcome::NotIsomorphic(Distinguisher::Invariants { .. }) => {}
        other => panic!("expected an invariants distinguisher, got {other:?}"),
    }
}

#[test]
fn witness_basis_maps_relations() {
    let (a, b) = (e3(&int(1), &int(2), &int(7), 32), e3(&int(1), &int(2), &int(0), 32));
    let IsomorphismOutcome::Isomorphic(w) = isomorphism_test(&a, &b, &ClassifyOptions::default()).unwrap() else {
        panic!("expected isomorphic");
    };
    abtheme::classify::check_basis(&a, &b, &w.basis).unwrap();
    // U = (gamma - gamma') / (alpha - beta) = -7
    assert_eq!(w.basis[2].comps[1], TruncSeries::constant(int(-7), w.basis[2].comps[1].prec()));
}
