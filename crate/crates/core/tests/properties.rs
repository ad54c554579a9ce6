use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use vext::extremality::SequenceSpec;
use vext::geometry::{distance, intersection_empty, project, Emptiness, Method, Radius, SearchBudget};
use vext::norms::{verify_compatibility, BaseNorm, DualConvention, NormSpec, ProductNorm};
use vext::optimization::{local_inf_detail, OptBudget, Problem, ScalarFunction};
use vext::{Point, SetExpr};

fn coord() -> impl Strategy<Value = f64> {
    -5.0..5.0f64
}

fn point2() -> impl Strategy<Value = Point> {
    (coord(), coord()).prop_map(|(x, y)| Point::from([x, y]))
}

fn base_norm() -> impl Strategy<Value = BaseNorm> {
    prop_oneof![Just(BaseNorm::L1), Just(BaseNorm::L2), Just(BaseNorm::LInf)]
}

fn convex_set() -> impl Strategy<Value = SetExpr> {
    prop_oneof![
        ((0.0..std::f64::consts::TAU), -2.0..2.0f64).prop_map(|(t, b)| SetExpr::halfspace(vec![t.cos(), t.sin()], b)),
        (point2(), 0.1..3.0f64).prop_map(|(c, r)| SetExpr::ball(c, r)),
    ]
}

fn scalar_problem() -> impl Strategy<Value = Problem> {
    prop_oneof![
        Just(Problem::unconstrained(ScalarFunction::PiecewiseParabolic, None)),
        Just(Problem::unconstrained(ScalarFunction::OscillatorySine, None)),
        Just(Problem::unconstrained(ScalarFunction::Exp { scale: 1.0, rate: -1.0 }, None)),
        prop::collection::vec(-2.0..2.0f64, 1..4).prop_map(|c| Problem::unconstrained(ScalarFunction::Polynomial { coeffs: c }, None)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn local_inf_shrinks_with_the_radius(prob in scalar_problem(), center in 1.0..50.0f64, r1 in 1e-3..1.0f64, grow in 1.0..3.0f64) {
        let b = OptBudget::default();
        let small = local_inf_detail(&prob, center, r1, &b).unwrap();
        let large = local_inf_detail(&prob, center, r1 * grow, &b).unwrap();
        let slack = small.error_bound + large.error_bound + 1e-12;
        prop_assert!(large.value <= small.value + slack, "{} > {}", large.value, small.value);
        prop_assert!(small.value <= prob.f.eval(center) + 1e-12);
    }

    #[test]
    fn projection_lands_in_the_set_and_is_nearest(set in convex_set(), p in point2(), q in point2()) {
        let pr = project(&set, &p, 1e-12).unwrap();
        prop_assert!(set.contains(&pr, 1e-9).unwrap());
        assert_abs_diff_eq!(distance(&set, &p, 1e-12).unwrap(), pr.dist2(&p), epsilon = 1e-9);
        // any member of the set is at least as far away
        let member = project(&set, &q, 1e-12).unwrap();
        prop_assert!(pr.dist2(&p) <= member.dist2(&p) + 1e-9);
        let again = project(&set, &pr, 1e-12).unwrap();
        prop_assert!(again.dist2(&pr) <= 1e-9);
    }

    #[test]
    fn dual_norm_bounds_the_pairing(n in base_norm(), x in point2(), y in point2()) {
        let ns = NormSpec::new(n, ProductNorm::MaxProduct, DualConvention::CanonicalDual);
        prop_assert!(x.dot(&y).abs() <= ns.dual_norm(&x) * ns.base_norm(&y) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn declared_product_constants_hold(n in base_norm(), p in 1.0..4.0f64, w in prop::collection::vec(0.2..3.0f64, 2..4), seed in any::<u64>()) {
        for product in [ProductNorm::MaxProduct, ProductNorm::WeightedP { p, weights: w.clone() }] {
            let ns = NormSpec::new(n, product, DualConvention::CanonicalDual);
            let rep = verify_compatibility(&ns, 64, seed);
            prop_assert!(rep.pass, "{:?}", rep);
        }
    }

    #[test]
    fn nonempty_verdicts_carry_a_member_witness(a in convex_set(), b in convex_set(), s in point2()) {
        let sets = [a, b];
        let shifts = [s.scale(0.1), Point::zeros(2)];
        let v = intersection_empty(&sets, &shifts, Radius::Finite(6.0), Method::AlternatingProjections, &SearchBudget::default()).unwrap();
        if v.outcome == Emptiness::Nonempty {
            let w = v.witness.expect("nonempty verdicts carry a witness");
            prop_assert!(w.coords().iter().all(|c| c.abs() <= 6.0 + 1e-6));
            for (set, sh) in sets.iter().zip(&shifts) {
                prop_assert!(set.contains(&(&w + sh), 1e-6).unwrap());
            }
        }
    }

    #[test]
    fn affine_combination_is_pointwise(k in 1u64..1000, t in 0.0..1.0f64) {
        let seq = SequenceSpec::closed_form(&[&["k", "1/k"], &["k", "0"]]).unwrap();
        let mid = seq.affine_combination(&[t, 1.0 - t]).unwrap();
        let p = mid.eval(k).unwrap().remove(0);
        assert_abs_diff_eq!(p[0], k as f64, epsilon = 1e-9);
        assert_abs_diff_eq!(p[1], t / k as f64, epsilon = 1e-12);
    }
}
