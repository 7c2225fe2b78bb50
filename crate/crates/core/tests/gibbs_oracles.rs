mod common;

use proptest::prelude::*;
use std::f64::consts::{E, LN_2};
use twostar::gibbs::{ergm_energy, ErgmParams, ExactSystem, GeneralizedParams};
use twostar::graph::{Config, WedgeList};
use twostar::Error;

fn cfg(n: usize, mask: u64) -> Config {
    Config::from_mask(n * (n - 1) / 2, mask)
}

#[test]
fn hamiltonian_matches_brute_force() {
    for n in 3..=5 {
        for (a, h) in [(3.0, 0.0), (-1.5, 0.7), (0.0, 1.0)] {
            let sys = ExactSystem::scalar(n, a, h).unwrap();
            for mask in 0..1u64 << sys.m() {
                let want = common::hamiltonian(n, a, h, mask);
                assert!((sys.hamiltonian(&cfg(n, mask)).unwrap() - want).abs() < 1e-12);
                assert!((sys.energy(mask) - want).abs() < 1e-12);
            }
        }
    }
    let k3 = ExactSystem::scalar(3, 3.0, 0.0).unwrap();
    assert_eq!(k3.hamiltonian(&Config::full(3)).unwrap(), 3.0);
    assert_eq!(k3.hamiltonian(&Config::empty(3)).unwrap(), 0.0);
    let field = ExactSystem::scalar(3, 0.0, 1.0).unwrap();
    assert_eq!(field.hamiltonian(&Config::full(3)).unwrap(), 3.0);
}

#[test]
fn partition_function_examples() {
    let k3 = ExactSystem::scalar(3, 3.0, 0.0).unwrap();
    let z = E.powi(3) + 3.0 * E + 4.0;
    assert!((k3.log_partition() - z.ln()).abs() < 1e-13);
    assert!((z - 32.2404).abs() < 1e-4);
    assert!((k3.free_energy() - z.ln() / 9.0).abs() < 1e-14);
    let flat = ExactSystem::scalar(4, 0.0, 0.0).unwrap();
    assert!((flat.log_partition() - 6.0 * LN_2).abs() < 1e-13);
    assert!((ExactSystem::scalar(3, 0.0, 0.0).unwrap().free_energy() - 3.0 * LN_2 / 9.0).abs() < 1e-15);
    for h in [-2.0, 0.3, 5.0] {
        let s = ExactSystem::scalar(3, 0.0, h).unwrap();
        assert!((s.log_partition() - 3.0 * (1.0 + f64::exp(h)).ln()).abs() < 1e-12);
    }
}

#[test]
fn extreme_parameters_stay_finite() {
    for (a, h) in [(800.0, 0.0), (-800.0, 900.0), (0.0, -2000.0)] {
        let sys = ExactSystem::scalar(4, a, h).unwrap();
        assert!(sys.log_partition().is_finite());
        let total: f64 = sys.probabilities().unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
    // dominated by the full graph: ln Z → H(full) = 800/4 · 12
    let big = ExactSystem::scalar(4, 800.0, 0.0).unwrap();
    assert!((big.log_partition() - 2400.0).abs() < 1e-9);
}

#[test]
fn expectation_examples() {
    let k3 = ExactSystem::scalar(3, 3.0, 0.0).unwrap();
    let z = E.powi(3) + 3.0 * E + 4.0;
    let p = (E.powi(3) + 2.0 * E + 1.0) / z;
    assert!((k3.expect_monomial(&[0]).unwrap() - p).abs() < 1e-13);
    assert!((p - 0.8226).abs() < 1e-4);
    assert_eq!(k3.expect_monomial(&[]).unwrap(), 1.0);
    let free = ExactSystem::scalar(4, 0.0, 0.8).unwrap();
    assert!((free.expect_monomial(&[3]).unwrap() - common::sigmoid(0.8)).abs() < 1e-13);
    assert!(matches!(
        k3.expect_monomial(&[7]),
        Err(Error::EdgeOutOfRange { .. })
    ));
}

#[test]
fn probabilities_are_normalised() {
    for n in 3..=5 {
        for (a, h) in [(0.0, 0.0), (2.0, -1.0), (-3.0, 2.0), (10.0, -6.0)] {
            let sys = ExactSystem::scalar(n, a, h).unwrap();
            let total: f64 = (0..sys.num_configs()).map(|x| sys.log_prob(x).exp()).sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n} a={a} h={h}: {total}");
        }
    }
}

/// Each edge probability equals the average of its logistic conditional,
/// is the same for every edge, and is at least ½ when α, h ≥ 0.
#[test]
fn edge_occurrence_and_symmetry() {
    for n in 3..=5 {
        for a in [-2.0, 0.0, 0.5, 1.0, 3.0] {
            for h in [-1.0, 0.0, 0.5, 2.0] {
                let sys = ExactSystem::scalar(n, a, h).unwrap();
                let p0 = sys.expect_monomial(&[0]).unwrap();
                for i in 0..sys.m() {
                    let p = sys.expect_monomial(&[i]).unwrap();
                    assert!((p - p0).abs() < 1e-12);
                    assert!((sys.edge_occurrence_rhs(i).unwrap() - p).abs() < 1e-12);
                }
                let mean_edges = sys.expect_mask(|x| f64::from(x.count_ones()));
                assert!((mean_edges - sys.m() as f64 * p0).abs() < 1e-11);
                if a >= 0.0 && h >= 0.0 {
                    assert!(p0 >= 0.5 - 1e-12);
                }
            }
        }
    }
    let free = ExactSystem::scalar(3, 0.0, 1.3).unwrap();
    assert!((free.edge_occurrence_rhs(1).unwrap() - common::sigmoid(1.3)).abs() < 1e-14);
    let saturated = ExactSystem::scalar(3, 1.0, 60.0).unwrap();
    assert!((saturated.edge_occurrence_rhs(0).unwrap() - 1.0).abs() < 1e-15);
}

/// `∂_h f = E[E_n]/n²` and `∂_α f = E[W_n]/n³` by central differences.
#[test]
fn free_energy_derivatives() {
    let d = 1e-4;
    for n in 3..=5 {
        for (a, h) in [(1.0, 0.0), (3.0, 1.0), (0.5, -0.5)] {
            let f = |a: f64, h: f64| ExactSystem::scalar(n, a, h).unwrap().free_energy();
            let sys = ExactSystem::scalar(n, a, h).unwrap();
            let nf = n as f64;
            let wl = WedgeList::new(sys.index());
            let edges = sys.expect_mask(|x| f64::from(x.count_ones())) / (nf * nf);
            let wedges = sys.expect(|c| twostar::graph::wedge_value(c, &wl) as f64) / nf.powi(3);
            let dh = (f(a, h + d) - f(a, h - d)) / (2.0 * d);
            let da = (f(a + d, h) - f(a - d, h)) / (2.0 * d);
            assert!((dh - edges).abs() < 1e-8, "n={n}: {dh} vs {edges}");
            assert!((da - wedges).abs() < 1e-8, "n={n}: {da} vs {wedges}");
        }
    }
}

#[test]
fn restrictions() {
    let k3 = ExactSystem::scalar(3, 3.0, 0.0).unwrap();
    assert_eq!(
        k3.restrict(&[0, 1, 2]).unwrap().log_partition(),
        k3.log_partition()
    );
    assert!((k3.restrict(&[0, 1]).unwrap().log_partition() - (E + 3.0).ln()).abs() < 1e-14);
    assert_eq!(k3.restrict(&[]).unwrap().log_partition(), 0.0);
    let s = ExactSystem::scalar(4, 2.0, 0.4).unwrap();
    assert!((s.restrict(&[2]).unwrap().log_partition() - (1.0 + 0.4f64.exp()).ln()).abs() < 1e-14);
    // {0,1} and {2,3} in K4 are disjoint edges (0-1, 2-3): no wedge joins them
    let idx = s.index();
    let (e01, e23, e02) = (idx.id_of(0, 1), idx.id_of(2, 3), idx.id_of(0, 2));
    let both = s.restrict(&[e01, e23]).unwrap().log_partition();
    let one = s.restrict(&[e01]).unwrap().log_partition();
    assert!((both - 2.0 * one).abs() < 1e-14);
    assert!(matches!(
        s.restrict(&[e01]).unwrap().restrict(&[e02]),
        Err(Error::InactiveEdge { .. })
    ));
    assert!(matches!(
        s.restrict(&[e01]).unwrap().hamiltonian(&Config::full(6)),
        Err(Error::UnsupportedConfig { .. })
    ));
}

#[test]
fn enumeration_cap_points_to_mcmc() {
    let err = ExactSystem::scalar(8, 1.0, 0.0).unwrap_err();
    assert!(matches!(err, Error::EnumerationCap { active: 28, cap: 24 }));
    assert!(err.to_string().contains("mcmc"));
}

#[test]
fn ergm_two_star_reduces_to_scalar() {
    for n in 3..=5 {
        for (b1, b2) in [(0.2, 0.5), (-1.0, 1.5), (0.0, 0.0)] {
            let ergm = ExactSystem::new(n, ErgmParams::two_star(b1, b2)).unwrap();
            let nf = n as f64;
            let scalar = ExactSystem::scalar(n, 2.0 * b2, 2.0 * b1 + 2.0 * b2 / nf).unwrap();
            for mask in 0..1u64 << scalar.m() {
                let c = cfg(n, mask);
                assert!((ergm.hamiltonian(&c).unwrap() - scalar.hamiltonian(&c).unwrap()).abs() < 1e-12);
            }
            assert!((ergm.log_partition() - scalar.log_partition()).abs() < 1e-12);
        }
    }
}

#[test]
fn ergm_triangle_energy() {
    let n = 4;
    let p = ErgmParams::edge_triangle(0.3, 0.8);
    let sys = ExactSystem::new(n, p.clone()).unwrap();
    for mask in 0..1u64 << 6 {
        // n² (β₁ · 2E/n² + β₂ · 6T/n³)
        let want =
            0.3 * 2.0 * common::edges(n, mask) as f64 + 0.8 * 6.0 * common::triangles(n, mask) as f64 / 4.0;
        let got = ergm_energy(&p, sys.index(), &cfg(n, mask));
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn constant_generalized_params_are_scalar() {
    for n in 3..=4 {
        let g = ExactSystem::new(n, GeneralizedParams::constant(n, 1.7, -0.3)).unwrap();
        let s = ExactSystem::scalar(n, 1.7, -0.3).unwrap();
        assert_eq!(g.log_partition(), s.log_partition());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn log_partition_matches_brute_force(n in 3usize..=4, a in -4.0f64..4.0, h in -3.0f64..3.0) {
        let sys = ExactSystem::scalar(n, a, h).unwrap();
        let want = common::log_z(n, a, h);
        prop_assert!((sys.log_partition() - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn monomials_match_brute_force(a in -3.0f64..3.0, h in -2.0f64..2.0, set in proptest::collection::btree_set(0usize..6, 0..4)) {
        let sys = ExactSystem::scalar(4, a, h).unwrap();
        let set: Vec<usize> = set.into_iter().collect();
        let want = common::moment(4, a, h, &set);
        prop_assert!((sys.expect_monomial(&set).unwrap() - want).abs() < 1e-12);
        let table = sys.moments().unwrap();
        let mask: usize = set.iter().map(|&i| 1usize << i).sum();
        prop_assert!((table[mask] - want).abs() < 1e-12);
    }

    #[test]
    fn generalized_hamiltonian_is_weighted_sum(seed in any::<u64>(), mask in 0u64..64) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = 4;
        let wl = WedgeList::new(&twostar::EdgeIndex::new(n));
        let alpha: Vec<f64> = (0..wl.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let h: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let sys = ExactSystem::new(n, GeneralizedParams::new(n, alpha.clone(), h.clone()).unwrap()).unwrap();
        let bit = |i: usize| (mask >> i & 1) as f64;
        let mut want = 0.0;
        for (k, &(i, j)) in wl.pairs().iter().enumerate() {
            want += alpha[k] / n as f64 * bit(i) * bit(j);
        }
        for (i, hi) in h.iter().enumerate() {
            want += hi * bit(i);
        }
        prop_assert!((sys.energy(mask) - want).abs() < 1e-12);
    }
}
