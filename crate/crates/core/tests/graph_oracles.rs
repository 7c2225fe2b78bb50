mod common;

use proptest::prelude::*;
use twostar::graph::{self, hom_count, hom_density, Config, EdgeIndex, SubgraphPattern, WedgeList};

fn cfg(n: usize, mask: u64) -> Config {
    Config::from_mask(n * (n - 1) / 2, mask)
}

#[test]
fn indexing_is_lexicographic() {
    for n in 1..8 {
        let idx = EdgeIndex::new(n);
        assert_eq!(idx.pairs(), common::pairs(n).as_slice());
        for e in 0..idx.m() {
            let (u, v) = idx.pair_of(e);
            assert_eq!(idx.id_of(u, v), e);
        }
    }
    assert_eq!(EdgeIndex::new(5).m(), 10);
}

#[test]
fn wedge_list_sizes() {
    for n in 2..8 {
        let w = WedgeList::new(&EdgeIndex::new(n));
        assert_eq!(w.len(), n * (n - 1) * n.saturating_sub(2) / 2);
        let idx = EdgeIndex::new(n);
        for &(i, j) in w.pairs() {
            assert!(i < j);
            let (a, b) = idx.pair_of(i);
            let (c, d) = idx.pair_of(j);
            let shared = [a == c, a == d, b == c, b == d].iter().filter(|&&s| s).count();
            assert_eq!(shared, 1);
        }
    }
    assert_eq!(WedgeList::new(&EdgeIndex::new(4)).len(), 12);
    assert!(WedgeList::new(&EdgeIndex::new(2)).is_empty());
}

#[test]
fn counts_match_brute_force() {
    for n in 3..=5 {
        let idx = EdgeIndex::new(n);
        let wl = WedgeList::new(&idx);
        for mask in 0..1u64 << idx.m() {
            let c = cfg(n, mask);
            assert_eq!(graph::edge_count(&c), common::edges(n, mask));
            assert_eq!(graph::wedge_value(&c, &wl), common::wedges(n, mask));
            assert_eq!(graph::triangle_count(&idx, &c), common::triangles(n, mask));
        }
    }
}

#[test]
fn star_in_k4() {
    let idx = EdgeIndex::new(4);
    let star = Config::from_edges(6, &[idx.id_of(0, 1), idx.id_of(0, 2), idx.id_of(0, 3)]);
    assert_eq!(graph::edge_count(&star), 3);
    assert_eq!(graph::wedge_value(&star, &WedgeList::new(&idx)), 3);
}

/// Homomorphism densities against exhaustive vertex-map counting, plus the
/// edge and wedge density identities in terms of edge and wedge counts.
#[test]
fn homomorphism_identities() {
    for n in 3..=5 {
        let idx = EdgeIndex::new(n);
        let nf = n as f64;
        for mask in 0..1u64 << idx.m() {
            let c = cfg(n, mask);
            for p in [
                SubgraphPattern::edge(),
                SubgraphPattern::wedge(),
                SubgraphPattern::triangle(),
            ] {
                let brute = common::homs(n, mask, p.vertex_count(), p.edges());
                assert_eq!(hom_count(&p, &idx, &c).unwrap(), brute);
            }
            let (e, w) = (common::edges(n, mask) as f64, common::wedges(n, mask) as f64);
            let te = hom_density(&SubgraphPattern::edge(), &c, &idx).unwrap();
            let tw = hom_density(&SubgraphPattern::wedge(), &c, &idx).unwrap();
            assert!((te - 2.0 * e / (nf * nf)).abs() < 1e-15);
            assert!((tw - (2.0 * w + 2.0 * e) / (nf * nf * nf)).abs() < 1e-15);
            let tri = hom_count(&SubgraphPattern::triangle(), &idx, &c).unwrap();
            assert_eq!(tri % 6, 0);
            assert_eq!(tri as usize, 6 * common::triangles(n, mask));
        }
    }
}

#[test]
fn density_examples() {
    let idx = EdgeIndex::new(3);
    let full = Config::full(3);
    let d = |p: &SubgraphPattern, c: &Config| hom_density(p, c, &idx).unwrap();
    assert_eq!(d(&SubgraphPattern::edge(), &Config::empty(3)), 0.0);
    assert!((d(&SubgraphPattern::edge(), &full) - 2.0 / 3.0).abs() < 1e-15);
    assert!((d(&SubgraphPattern::wedge(), &full) - 4.0 / 9.0).abs() < 1e-15);
}

#[test]
fn unsupported_patterns_are_named() {
    let path3 = SubgraphPattern::custom("path3", 4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
    let err = hom_density(&path3, &Config::full(6), &EdgeIndex::new(4)).unwrap_err();
    assert!(err.to_string().contains("path3"));
}

fn relabel(n: usize, mask: u64, perm: &[usize]) -> u64 {
    let idx = EdgeIndex::new(n);
    let mut out = 0u64;
    for e in 0..idx.m() {
        if mask >> e & 1 == 1 {
            let (u, v) = idx.pair_of(e);
            out |= 1 << idx.id_of(perm[u], perm[v]);
        }
    }
    out
}

proptest! {
    #[test]
    fn wedge_value_is_relabelling_invariant(
        n in 3usize..=7,
        mask in any::<u64>(),
        perm in Just((0..7).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let idx = EdgeIndex::new(n);
        let mask = mask & ((1u64 << idx.m()) - 1);
        let perm: Vec<usize> = perm.into_iter().filter(|&p| p < n).collect();
        let wl = WedgeList::new(&idx);
        let a = graph::wedge_value(&cfg(n, mask), &wl);
        let b = graph::wedge_value(&cfg(n, relabel(n, mask, &perm)), &wl);
        prop_assert_eq!(a, b);
        let t = |m| graph::triangle_count(&idx, &cfg(n, m));
        prop_assert_eq!(t(mask), t(relabel(n, mask, &perm)));
    }

    #[test]
    fn lattice_operations_are_bitwise(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (Config::from_mask(64, a), Config::from_mask(64, b));
        prop_assert_eq!(x.join(&y), Config::from_mask(64, a | b));
        prop_assert_eq!(x.meet(&y), Config::from_mask(64, a & b));
        prop_assert_eq!(x.le(&y), a & !b == 0);
    }
}
