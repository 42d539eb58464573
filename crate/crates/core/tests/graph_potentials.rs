use std::collections::HashSet;

use dosom::graph::{ball_cardinality, build_ball, graph_distance, growth_ratio, GraphFamily, GrowthFunction};
use dosom::potentials::bethe::{
    addresses_at_level, apply_word, apply_word_inv, transitive_coordinates, transitive_word, BetheAddress,
};
use dosom::potentials::{evaluate_potential, modify_potential, PotentialSpec, SingleSiteMeasure};
use proptest::prelude::*;

/// Points of Z^d with 1-norm at most `l`, by direct enumeration.
fn l1_ball_count(d: usize, l: i64) -> u64 {
    fn rec(d: usize, budget: i64) -> u64 {
        if d == 0 {
            return 1;
        }
        (-budget..=budget).map(|x| rec(d - 1, budget - x.abs())).sum()
    }
    rec(d, l)
}

#[test]
fn lattice_cardinalities_match_enumeration() {
    for d in 1..=4u32 {
        for l in 0..=6u32 {
            let expect = l1_ball_count(d as usize, l as i64);
            assert_eq!(ball_cardinality(GraphFamily::LatticeZd { d }, l).unwrap(), expect);
            if expect < 20_000 {
                assert_eq!(build_ball(GraphFamily::LatticeZd { d }, l).unwrap().len() as u64, expect);
            }
        }
    }
}

#[test]
fn planar_coordination_sequences() {
    // 3n and 6n vertices at distance n
    for l in 0..=12u32 {
        let l64 = l as u64;
        assert_eq!(ball_cardinality(GraphFamily::Hexagonal, l).unwrap(), 1 + 3 * l64 * (l64 + 1) / 2);
        assert_eq!(ball_cardinality(GraphFamily::Triangular, l).unwrap(), 1 + 3 * l64 * (l64 + 1));
    }
}

#[test]
fn interior_degrees_and_distances() {
    for family in [
        GraphFamily::LatticeZd { d: 3 },
        GraphFamily::Hexagonal,
        GraphFamily::Triangular,
        GraphFamily::Bethe { k: 4 },
    ] {
        let g = build_ball(family, 6).unwrap();
        let from_root = g.distances_from(0);
        for v in 0..g.len() {
            assert_eq!(from_root[v], g.dist_to_root(v));
            if g.dist_to_root(v) < 6 {
                assert_eq!(g.degree(v) as u32, family.degree(), "{family} vertex {v}");
            }
            for &u in g.neighbors(v) {
                assert!(g.neighbors(u as usize).contains(&(v as u32)));
            }
        }
    }
}

#[test]
fn z2_distance_is_l1() {
    let g = build_ball(GraphFamily::LatticeZd { d: 2 }, 5).unwrap();
    for x in (0..g.len()).step_by(7) {
        for y in (0..g.len()).step_by(5) {
            let (a, b) = (g.coords(x).unwrap(), g.coords(y).unwrap());
            let l1 = ((a[0] - b[0]).abs() + (a[1] - b[1]).abs()) as u32;
            assert_eq!(graph_distance(&g, x, y).unwrap(), l1);
        }
    }
}

#[test]
fn growth_and_overflow() {
    let r = growth_ratio(GraphFamily::Bethe { k: 3 }, 2).unwrap();
    assert_eq!((*r.numer(), *r.denom()), (11, 5));
    assert!(ball_cardinality(GraphFamily::Bethe { k: 1000 }, 40).is_err());
    let b = GrowthFunction::natural(GraphFamily::Bethe { k: 3 });
    assert!((b.inverse(b.eval(7.5)) - 7.5).abs() < 1e-12);
    let p = GrowthFunction::new_polynomial(2.0, 2.0).unwrap();
    assert!((p.inverse(p.eval(3.0)) - 3.0).abs() < 1e-12);
    assert!(GrowthFunction::new_polynomial(0.0, 1.0).is_err());
}

#[test]
fn sub_ball_is_prefix() {
    let g = build_ball(GraphFamily::Hexagonal, 7).unwrap();
    let s = g.sub_ball(4).unwrap();
    assert_eq!(s.len(), g.ball_size(4).unwrap());
    let direct = build_ball(GraphFamily::Hexagonal, 4).unwrap();
    for v in 0..s.len() {
        assert_eq!(s.neighbors(v), direct.neighbors(v));
        assert_eq!(s.coords(v), direct.coords(v));
    }
}

#[test]
fn edge_list_header() {
    let g = build_ball(GraphFamily::LatticeZd { d: 1 }, 2).unwrap();
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("# family=Z1 radius=2 vertices=5 edges=4"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn tau_maps_are_bijective_on_levels() {
    let k = 3;
    let all: Vec<BetheAddress> = (0..=6).flat_map(|l| addresses_at_level(k, l)).collect();
    let images: HashSet<BetheAddress> = all.iter().map(|a| a.tau1(k).unwrap()).collect();
    assert_eq!(images.len(), all.len());
    let rot: HashSet<BetheAddress> = all.iter().map(|a| a.tau2(k).unwrap()).collect();
    assert_eq!(rot.len(), all.len());
    for a in &all {
        assert_eq!(&a.tau1(k).unwrap().tau1_inv(k).unwrap(), a);
        assert_eq!(&a.tau2(k).unwrap().tau2_inv(k).unwrap(), a);
        assert_eq!(&a.tau2_pow(k, 6).unwrap(), a);
    }
}

#[test]
fn single_word_exists_up_to_level_two() {
    for k in 3..=6 {
        for l in 0..=2 {
            for a in addresses_at_level(k, l) {
                let (d1, d2) = transitive_coordinates(&a, k, 4).unwrap();
                let mut y = BetheAddress::root();
                for _ in 0..d1 {
                    y = y.tau1(k).unwrap();
                }
                assert_eq!(y.tau2_pow(k, d2 as i64).unwrap(), a);
            }
        }
    }
}

fn arb_address(k: u32, max_level: usize) -> impl Strategy<Value = BetheAddress> {
    (0..=max_level).prop_flat_map(move |l| {
        prop::collection::vec(1..k, l).prop_flat_map(move |rest| {
            (1..=k).prop_map(move |first| {
                let mut d = rest.clone();
                if !d.is_empty() {
                    d[0] = first;
                }
                BetheAddress::new(d)
            })
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tau_preserves_adjacency(k in 3u32..7, a in arb_address(6, 5)) {
        prop_assume!(a.validate(k).is_ok());
        for b in a.neighbors(k) {
            prop_assert!(a.tau1(k).unwrap().is_adjacent(&b.tau1(k).unwrap()));
            prop_assert!(a.tau2(k).unwrap().is_adjacent(&b.tau2(k).unwrap()));
        }
    }

    #[test]
    fn word_round_trip(k in 3u32..7, a in arb_address(6, 8)) {
        prop_assume!(a.validate(k).is_ok());
        let w = transitive_word(&a, k).unwrap();
        prop_assert_eq!(apply_word(&w, &BetheAddress::root(), k).unwrap(), a.clone());
        prop_assert!(apply_word_inv(&w, &a, k).unwrap().is_root());
    }

    #[test]
    fn rank_is_vertex_index(a in arb_address(3, 6)) {
        let g = build_ball(GraphFamily::Bethe { k: 3 }, 6).unwrap();
        let r = a.rank(3).unwrap() as usize;
        prop_assert_eq!(g.address(r).unwrap(), a);
    }

    #[test]
    fn iid_values_lie_in_support(seed in any::<u64>()) {
        let g = build_ball(GraphFamily::LatticeZd { d: 2 }, 4).unwrap();
        let mu = SingleSiteMeasure::atoms(vec![0.0, 100.0], vec![0.75, 0.25]).unwrap();
        let v = evaluate_potential(&PotentialSpec::RandomIid { measure: mu, seed }, &g).unwrap();
        prop_assert!(v.iter().all(|&x| x == 0.0 || x == 100.0));
    }

    #[test]
    fn modified_potential_splits_at_radius(r in 0u32..5) {
        let g = build_ball(GraphFamily::Triangular, 5).unwrap();
        let v = vec![1.0; g.len()];
        let w = vec![2.0; g.len()];
        let m = modify_potential(&v, &w, &g, r).unwrap();
        for i in 0..g.len() {
            prop_assert_eq!(m[i], if g.dist_to_root(i) <= r { 1.0 } else { 2.0 });
        }
    }
}

#[test]
fn iid_empirical_frequencies() {
    let g = build_ball(GraphFamily::LatticeZd { d: 2 }, 40).unwrap();
    let mu = SingleSiteMeasure::atoms(vec![0.0, 100.0], vec![0.75, 0.25]).unwrap();
    let v = evaluate_potential(&PotentialSpec::RandomIid { measure: mu, seed: 3 }, &g).unwrap();
    let frac = v.iter().filter(|&&x| x == 100.0).count() as f64 / v.len() as f64;
    // 3281 sites, standard deviation of the fraction is about 0.0076
    assert!((frac - 0.25).abs() < 0.04, "{frac}");
}
