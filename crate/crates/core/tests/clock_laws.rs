use proptest::prelude::*;
use stirring::stats::{chi_square_gof, chi_square_poisson};
use stirring::walk::{simulate_cyclic_walk, WalkOptions};
use stirring::{ClockStore, CyclicTime, Edge, Site, Topology};

fn edge(x: i64, y: i64, axis: u32) -> Edge {
    Edge::Lattice {
        base: Site::new(&[x, y]),
        axis,
    }
}

fn edges(n: i64) -> impl Iterator<Item = Edge> {
    (0..n).flat_map(move |x| (0..n).map(move |y| edge(x, y, 0)))
}

#[test]
fn ring_counts_are_poisson_beta() {
    let mut store = ClockStore::new(2.0, 17).unwrap();
    let counts: Vec<u64> = edges(320).map(|e| store.ring_count(&e) as u64).collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    assert!((mean - 2.0).abs() < 0.02, "mean {mean}");
    let chi = chi_square_poisson(&counts, 2.0);
    assert!(chi.p_value > 1e-3, "{chi:?}");
}

#[test]
fn ring_times_are_uniform_on_the_period() {
    let beta = 3.0;
    let mut store = ClockStore::new(beta, 5).unwrap();
    let mut bins = vec![0u64; 20];
    for e in edges(150) {
        for &t in store.schedule(&e).times() {
            assert!(t > 0.0 && t < beta);
            bins[(t / beta * 20.0) as usize] += 1;
        }
    }
    let chi = chi_square_gof(&bins, &[0.05; 20]);
    assert!(chi.p_value > 1e-3, "{chi:?}");
}

#[test]
fn neighboring_edges_are_uncorrelated() {
    let mut store = ClockStore::new(1.5, 8).unwrap();
    let pairs: Vec<(f64, f64)> = (0..40_000i64)
        .map(|x| {
            let a = store.ring_count(&edge(x, 0, 0)) as f64;
            let b = store.ring_count(&edge(x, 0, 1)) as f64;
            (a, b)
        })
        .collect();
    let n = pairs.len() as f64;
    let (ma, mb) = (
        pairs.iter().map(|p| p.0).sum::<f64>() / n,
        pairs.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let cov = pairs.iter().map(|p| (p.0 - ma) * (p.1 - mb)).sum::<f64>() / n;
    let va = pairs.iter().map(|p| (p.0 - ma).powi(2)).sum::<f64>() / n;
    let vb = pairs.iter().map(|p| (p.1 - mb).powi(2)).sum::<f64>() / n;
    let rho = cov / (va * vb).sqrt();
    assert!(rho.abs() < 4.0 / n.sqrt(), "correlation {rho}");
}

#[test]
fn clock_dump_reproduces_the_walk() {
    let topo = Topology::lattice(2).unwrap();
    let mut store = ClockStore::new(2.0, 99).unwrap();
    let h = CyclicTime::periods(6);
    let a = simulate_cyclic_walk(&topo, &topo.origin(), h, &mut store, WalkOptions::default()).unwrap();
    let mut buf = Vec::new();
    store.dump_jsonl(&mut buf).unwrap();
    let mut loaded = ClockStore::load_jsonl(2.0, &buf[..]).unwrap();
    let b = simulate_cyclic_walk(&topo, &topo.origin(), h, &mut loaded, WalkOptions::default()).unwrap();
    assert_eq!(a.trajectory, b.trajectory);
    for line in String::from_utf8(buf).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("edge").is_some() && v["times"].is_array());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schedules_are_sorted_and_query_order_free(seed in any::<u64>(), beta in 0.1f64..6.0, xs in prop::collection::vec(-20i64..20, 1..30)) {
        let mut a = ClockStore::new(beta, seed).unwrap();
        let mut b = ClockStore::new(beta, seed).unwrap();
        let es: Vec<Edge> = xs.iter().map(|&x| edge(x, x / 3, x.rem_euclid(2) as u32)).collect();
        for e in &es {
            let s = a.schedule(e);
            prop_assert!(s.times().windows(2).all(|w| w[0] < w[1]));
            prop_assert!(s.times().iter().all(|&t| t > 0.0 && t < beta));
        }
        for e in es.iter().rev() {
            prop_assert_eq!(a.schedule(e), b.schedule(e));
        }
    }

    #[test]
    fn resampling_keeps_exposed_edges(seed in any::<u64>(), xs in prop::collection::vec(0i64..50, 1..10)) {
        let mut store = ClockStore::new(2.0, seed).unwrap();
        for &x in &xs {
            store.schedule(&edge(x, 0, 0));
        }
        let mut child = store.resample_undiscovered();
        for &x in &xs {
            prop_assert_eq!(child.schedule(&edge(x, 0, 0)), store.schedule(&edge(x, 0, 0)));
        }
        let mut other = store.resample_undiscovered();
        let differs = (100..140).any(|x| child.schedule(&edge(x, 1, 1)) != other.schedule(&edge(x, 1, 1)));
        prop_assert!(differs);
    }
}
