use std::sync::Arc;

use dosom::graph::{build_ball, GraphFamily};
use dosom::operators::{
    assemble_hamiltonian, chebyshev_moments, finite_range_check, power_moments, EigenOptions, Hamiltonian,
    VectorRows,
};
use dosom::potentials::{evaluate_potential, PotentialSpec};
use proptest::prelude::*;

/// Cyclic Jacobi rotations on a dense symmetric matrix; eigenvalues ascending.
fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * n + j].powi(2)).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    d.sort_by(f64::total_cmp);
    d
}

fn random_h(family: GraphFamily, m: u32, seed: u64) -> Hamiltonian {
    let g = Arc::new(build_ball(family, m).unwrap());
    assemble_hamiltonian(g, &PotentialSpec::uniform_iid(1.0, seed).unwrap()).unwrap()
}

#[test]
fn eigenvalues_match_jacobi() {
    for (family, m) in [
        (GraphFamily::LatticeZd { d: 2 }, 4),
        (GraphFamily::Hexagonal, 4),
        (GraphFamily::Triangular, 3),
        (GraphFamily::Bethe { k: 3 }, 3),
        (GraphFamily::LatticeZd { d: 1 }, 20),
    ] {
        let h = random_h(family, m, 5);
        assert!(h.len() <= 60);
        let ours = h.eigenvalues().unwrap();
        let reference = jacobi_eigenvalues(h.to_dense(), h.len());
        for (a, b) in ours.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-10, "{family}: {a} vs {b}");
        }
    }
}

#[test]
fn eigenvectors_have_small_residual() {
    for family in [GraphFamily::LatticeZd { d: 2 }, GraphFamily::LatticeZd { d: 1 }, GraphFamily::Bethe { k: 4 }] {
        let h = random_h(family, 5, 9);
        let n = h.len();
        let dec = h.eig(&EigenOptions::with_vectors(VectorRows::All)).unwrap();
        for j in 0..n {
            let v = dec.vector(j);
            let hv = h.matvec(v).unwrap();
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>();
            let res: f64 = hv.iter().zip(v).map(|(a, b)| (a - dec.values[j] * b).powi(2)).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-10);
            assert!(res < 1e-9, "{family} residual {res}");
        }
        // row subsets agree with the full vectors
        let rows = vec![0, 3, n - 1];
        let sub = h.eig(&EigenOptions::with_vectors(VectorRows::Rows(rows.clone()))).unwrap();
        for j in 0..n {
            for (s, &r) in rows.iter().enumerate() {
                assert!((sub.component(j, s).abs() - dec.component(j, r).abs()).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn chebyshev_moments_match_spectral_sums() {
    let h = random_h(GraphFamily::LatticeZd { d: 2 }, 5, 2);
    let dec = h.eig(&EigenOptions::with_vectors(VectorRows::All)).unwrap();
    let (a, b) = (-5.5, 5.5);
    let sites = [0usize, 7, 30, h.len() - 1];
    let table = chebyshev_moments(&h, &sites, 17, (a, b)).unwrap();
    for (i, &y) in sites.iter().enumerate() {
        for n in 0..=17 {
            let expect: f64 = (0..h.len())
                .map(|j| {
                    let t = (2.0 * dec.values[j] - (a + b)) / (b - a);
                    dec.component(j, y).powi(2) * (n as f64 * t.acos()).cos()
                })
                .sum();
            assert!((table.site(i)[n] - expect).abs() < 1e-10, "site {y} n {n}");
        }
    }
    assert!(chebyshev_moments(&h, &sites, 4, (-1.0, 1.0)).is_err());
}

#[test]
fn power_moments_count_walks() {
    // closed walks of length 2 at the origin of Z^2 = degree, length 4 = 36
    let g = Arc::new(build_ball(GraphFamily::LatticeZd { d: 2 }, 6).unwrap());
    let h = Hamiltonian::free(g);
    let m = power_moments(&h, &[0], 6).unwrap();
    assert_eq!(m[0][2], 4.0);
    assert_eq!(m[0][4], 36.0);
    assert_eq!(m[0][6], 400.0);
    assert_eq!(m[0][3], 0.0);
    assert!(power_moments(&h, &[0], 31).is_err());
}

#[test]
fn finite_range_reduction() {
    for family in [GraphFamily::LatticeZd { d: 2 }, GraphFamily::Bethe { k: 3 }] {
        let g = Arc::new(build_ball(family, 9).unwrap());
        let v = evaluate_potential(&PotentialSpec::uniform_iid(1.0, 1).unwrap(), &g).unwrap();
        let w = evaluate_potential(&PotentialSpec::uniform_iid(3.0, 2).unwrap(), &g).unwrap();
        let h = Hamiltonian::new(g, v).unwrap();
        for j in [1, 4, 7, 10] {
            let r = finite_range_check(&h, &w, 3, j).unwrap();
            assert!(r.pass, "{family} j={j}: {} vs {}", r.original, r.modified);
        }
    }
}

#[test]
fn ambient_row_weights_sum_to_one() {
    let h = random_h(GraphFamily::LatticeZd { d: 1 }, 30, 4);
    let dec = h.eig(&EigenOptions::with_vectors(VectorRows::Rows((0..21).collect()))).unwrap();
    let total: f64 = dec.row_weights().iter().sum();
    assert!((total - 21.0).abs() < 1e-10);
}

#[test]
fn dense_cap_is_enforced() {
    let h = random_h(GraphFamily::LatticeZd { d: 2 }, 3, 1);
    let opts = EigenOptions { dense_cap: 10, ..Default::default() };
    assert!(h.eig(&opts).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_is_symmetric(seed in 0u64..1000, m in 1u32..4) {
        let h = random_h(GraphFamily::Triangular, m, seed);
        let a = h.to_dense();
        let n = h.len();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(a[i * n + j], a[j * n + i]);
            }
        }
    }

    #[test]
    fn restriction_is_compression(seed in 0u64..1000, l in 0u32..4) {
        let h = random_h(GraphFamily::Bethe { k: 3 }, 4, seed);
        let r = h.restrict(l).unwrap();
        let n = r.len();
        let big = h.to_dense();
        let small = r.to_dense();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(small[i * n + j], big[i * h.len() + j]);
            }
        }
    }

    #[test]
    fn spectrum_in_gershgorin(seed in 0u64..1000) {
        let h = random_h(GraphFamily::LatticeZd { d: 2 }, 4, seed);
        let (lo, hi) = h.gershgorin();
        let ev = h.eigenvalues().unwrap();
        prop_assert!(ev[0] >= lo - 1e-12 && ev[ev.len() - 1] <= hi + 1e-12);
    }
}
