use dosom::metrics::oracle::d_w_oracle;
use dosom::metrics::{
    d_inf, d_krw, d_w, d_w_lower, d_w_parametric, d_w_simplex, hausdorff, lower_bound_family, meet_join,
    sandwich_check, DiscreteMeasure,
};
use proptest::prelude::*;

fn measure(points: &[f64], raw_weights: &[f64]) -> DiscreteMeasure {
    DiscreteMeasure::from_unnormalized(points.to_vec(), raw_weights.to_vec()).unwrap()
}

fn arb_measure(max_atoms: usize, c: f64) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-c..c, 0.05f64..1.0), 1..=max_atoms)
        .prop_map(|v| {
            let (p, w): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            measure(&p, &w)
        })
}

#[test]
fn large_support_routes_agree() {
    // grid points shared between measures exercise cancellation in w
    let pts: Vec<f64> = (0..120).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
    let w1: Vec<f64> = (0..120).map(|i| 1.0 + (i % 7) as f64).collect();
    let w2: Vec<f64> = (0..120).map(|i| 1.0 + (i % 5) as f64).collect();
    let a = measure(&pts, &w1);
    let b = measure(&pts.iter().map(|x| x + 0.05).collect::<Vec<_>>(), &w2);
    let s = d_w_simplex(&a, &b).unwrap();
    let p = d_w_parametric(&a, &b).unwrap();
    assert!((s.value - p.value).abs() < 1e-9, "{} vs {}", s.value, p.value);
    assert!(p.certificate.as_ref().unwrap().violation() < 1e-12);
}

#[test]
fn translation_of_a_point_mass() {
    // d_w(delta_0, delta_t) = 2t / (2 + t) for t <= ... (s = l t / 2)
    for t in [0.1, 0.5, 1.0, 3.0] {
        let v = d_w(&DiscreteMeasure::point_mass(0.0), &DiscreteMeasure::point_mass(t)).unwrap().value;
        assert!((v - 2.0 * t / (2.0 + t)).abs() < 1e-12);
    }
}

#[test]
fn meet_join_of_overlapping_measures() {
    let a = measure(&[0.0, 2.0], &[1.0, 1.0]);
    let b = measure(&[1.0], &[1.0]);
    let (meet, join) = meet_join(&a, &b).unwrap();
    assert_eq!(meet.atoms(), &[0.0, 1.0]);
    assert_eq!(join.atoms(), &[1.0, 2.0]);
    assert!((d_krw(&meet, &join).value - d_krw(&a, &b).value).abs() < 1e-15);
}

#[test]
fn hausdorff_is_symmetric_and_exact() {
    let a = [0.0, 1.0, 5.0];
    let b = [0.5, 4.0];
    assert_eq!(hausdorff(&a, &b).unwrap(), hausdorff(&b, &a).unwrap());
    assert_eq!(hausdorff(&a, &b).unwrap(), 1.0);
}

#[test]
fn lower_family_is_admissible_and_nearly_tight() {
    for f in lower_bound_family((-3.0, 3.0), 7).unwrap() {
        assert!(f.sup_norm() + f.lipschitz() <= 1.0 + 1e-12);
    }
    let a = DiscreteMeasure::point_mass(0.0);
    let b = DiscreteMeasure::point_mass(1.0);
    let lower = d_w_lower(&a, &b, 64);
    assert!((0.6..=2.0 / 3.0 + 1e-12).contains(&lower), "{lower}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplex_matches_oracle(a in arb_measure(3, 2.0), b in arb_measure(3, 2.0)) {
        let o = d_w_oracle(&a, &b).unwrap();
        let s = d_w_simplex(&a, &b).unwrap();
        let p = d_w_parametric(&a, &b).unwrap();
        prop_assert!((s.value - o).abs() < 1e-10, "simplex {} oracle {}", s.value, o);
        prop_assert!((p.value - o).abs() < 1e-10, "parametric {} oracle {}", p.value, o);
        prop_assert!(s.certificate.unwrap().violation() < 1e-10);
    }

    #[test]
    fn routes_agree_on_medium_supports(a in arb_measure(25, 4.0), b in arb_measure(25, 4.0)) {
        let s = d_w_simplex(&a, &b).unwrap();
        let p = d_w_parametric(&a, &b).unwrap();
        prop_assert!((s.value - p.value).abs() < 1e-9, "{} vs {}", s.value, p.value);
    }

    #[test]
    fn lower_family_bounds_d_w(a in arb_measure(8, 3.0), b in arb_measure(8, 3.0)) {
        let w = d_w(&a, &b).unwrap().value;
        prop_assert!(d_w_lower(&a, &b, 48) <= w + 1e-10);
    }

    #[test]
    fn krw_formulas_agree(a in arb_measure(12, 5.0), b in arb_measure(12, 5.0)) {
        let r = d_krw(&a, &b);
        prop_assert!((r.value - r.cross_check.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn metric_chain_and_sandwich(a in arb_measure(10, 1.5), b in arb_measure(10, 1.5)) {
        let w = d_w(&a, &b).unwrap().value;
        let k = d_krw(&a, &b).value;
        let i = d_inf(&a, &b).value;
        prop_assert!(w <= k + 1e-10 && k <= i + 1e-10);
        prop_assert!(sandwich_check(&a, &b, 1.5).unwrap().holds);
    }

    #[test]
    fn triangle_inequality(a in arb_measure(6, 2.0), b in arb_measure(6, 2.0), c in arb_measure(6, 2.0)) {
        let ab = d_w(&a, &b).unwrap().value;
        let bc = d_w(&b, &c).unwrap().value;
        let ac = d_w(&a, &c).unwrap().value;
        prop_assert!(ac <= ab + bc + 1e-10);
        prop_assert!((ab - d_w(&b, &a).unwrap().value).abs() < 1e-10);
        prop_assert!(d_krw(&a, &c).value <= d_krw(&a, &b).value + d_krw(&b, &c).value + 1e-10);
    }

    #[test]
    fn meet_join_preserve_krw(a in arb_measure(8, 3.0), b in arb_measure(8, 3.0)) {
        let (meet, join) = meet_join(&a, &b).unwrap();
        prop_assert!((d_krw(&meet, &join).value - d_krw(&a, &b).value).abs() < 1e-10);
        for t in [-3.0, -1.0, 0.0, 0.5, 2.0] {
            prop_assert!((meet.cdf(t) - a.cdf(t).max(b.cdf(t))).abs() < 1e-12);
            prop_assert!((join.cdf(t) - a.cdf(t).min(b.cdf(t))).abs() < 1e-12);
        }
    }
}

