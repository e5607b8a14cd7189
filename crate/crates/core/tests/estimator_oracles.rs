mod common;

use common::kernel::Kernel1d;
use stirring::estimators::{
    closure_probability, escape_probability, percolation_cluster_in, Construction, Continuation, Ensemble,
};
use stirring::stats::{chi_square_gof, chi_square_poisson, tv_distance};
use stirring::walk::{simulate_cyclic_walk, WalkOptions};
use stirring::{ClockStore, CyclicTime, Site, Topology};

#[test]
fn kernel_matches_the_bessel_series() {
    // e^{-2t} I_x(2t) summed directly; a wide box keeps the boundary loss negligible
    let t = 1.5f64;
    let k = Kernel1d::new(t, 30);
    let fact = |n: i64| (1..=n).map(|i| i as f64).product::<f64>();
    for x in 0..5i64 {
        let s: f64 = (0..40)
            .map(|m| t.powi((2 * m + x) as i32) / (fact(m) * fact(m + x)))
            .sum();
        let exact = (-2.0 * t).exp() * s;
        assert!((k.at(x) - exact).abs() < 1e-12, "{x}: {} vs {exact}", k.at(x));
        assert_eq!(k.at(x), k.at(-x));
    }
    assert!(k.truncation < 1e-9);
    assert!(Kernel1d::new(t, Kernel1d::default_radius(t)).truncation < 1e-4);
}

#[test]
fn first_period_endpoints_follow_the_exact_kernel() {
    let (d, t) = (2, 3.0);
    let ens = Ensemble::lattice(d, 10.0, t, 50_000, 21).unwrap();
    let hist = ens.histogram().unwrap();
    let k = Kernel1d::new(t, Kernel1d::default_radius(t));
    let r = 6i64;
    let mut cells: Vec<(f64, u64)> = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            let p = k.product(&[x, y]);
            cells.push((p, hist.get(&Site::new(&[x, y])).copied().unwrap_or(0)));
        }
    }
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let inside: u64 = cells.iter().map(|c| c.1).sum();
    let p_inside: f64 = cells.iter().map(|c| c.0).sum();
    let mut obs: Vec<u64> = cells.iter().map(|c| c.1).collect();
    let mut probs: Vec<f64> = cells.iter().map(|c| c.0).collect();
    obs.push(50_000 - inside);
    probs.push(1.0 - p_inside);
    let chi = chi_square_gof(&obs, &probs);
    assert!(chi.p_value > 1e-3, "{chi:?}");
}

#[test]
fn first_period_jump_counts_are_poisson() {
    let (d, t) = (3, 1.5);
    let ens = Ensemble::lattice(d, 4.0, t, 20_000, 2).unwrap();
    let counts = ens.map(|_, traj| traj.jumps().len() as u64).unwrap();
    let chi = chi_square_poisson(&counts, 2.0 * d as f64 * t);
    assert!(chi.p_value > 1e-3, "{chi:?}");
}

#[test]
fn constructions_agree_in_law_on_a_small_torus() {
    let law = |construction| {
        Ensemble {
            topology: Topology::torus(2, 3).unwrap(),
            beta: 0.7,
            horizon: CyclicTime::from_real(2.3, 0.7),
            samples: 30_000,
            seed: 77,
            construction,
            continuation: Continuation::Periodic,
        }
        .endpoint_law()
        .unwrap()
    };
    let a = law(Construction::Exposure);
    let b = law(Construction::Driven);
    let tv = tv_distance(&a, &b);
    assert!(tv < 0.025, "TV {tv}: {a:?} vs {b:?}");
}

#[test]
fn escape_from_an_empty_prefix_is_the_unconditional_probability() {
    let topo = Topology::lattice(2).unwrap();
    let beta = 4.0;
    let n = 3000;
    let mut store = ClockStore::new(beta, 6).unwrap();
    let prefix = simulate_cyclic_walk(
        &topo,
        &topo.origin(),
        CyclicTime::ZERO,
        &mut store,
        WalkOptions::default(),
    )
    .unwrap()
    .trajectory;
    let esc = escape_probability(&topo, &prefix, &mut store, 1, n, 6).unwrap();
    // plain ensemble of regenerated exposure walks at time k³4^k = 4
    let ens = Ensemble {
        topology: topo.clone(),
        beta,
        horizon: CyclicTime::from_real(4.0, beta),
        samples: n,
        seed: 1234,
        construction: Construction::Exposure,
        continuation: Continuation::Regenerate,
    };
    let far = ens
        .endpoints()
        .unwrap()
        .iter()
        .filter(|s| s.dist2(&topo.origin()) >= 4)
        .count();
    let p = far as f64 / n as f64;
    let se = (esc.estimate.stderr.powi(2) + p * (1.0 - p) / n as f64).sqrt();
    assert!(
        (esc.estimate.value - p).abs() < 4.0 * se,
        "{} vs {p}",
        esc.estimate.value
    );
}

#[test]
fn escape_from_a_self_woven_prefix_is_positive() {
    let topo = Topology::lattice(5).unwrap();
    let beta = 16.0;
    let mut store = ClockStore::new(beta, 3).unwrap();
    let out = simulate_cyclic_walk(
        &topo,
        &topo.origin(),
        CyclicTime::new(3, 5.0),
        &mut store,
        WalkOptions::default(),
    )
    .unwrap();
    let esc = escape_probability(&topo, &out.trajectory, &mut store, 1, 200, 3).unwrap();
    assert!(esc.estimate.value > 0.0);
    assert!(esc.warning.is_none());
}

#[test]
fn walks_stay_inside_their_percolation_cluster() {
    let topo = Topology::lattice(2).unwrap();
    for seed in 0..200 {
        let mut store = ClockStore::new(0.3, seed).unwrap();
        let cluster = percolation_cluster_in(&topo, &mut store, &topo.origin(), 100_000);
        assert!(!cluster.cap_exceeded);
        let out = simulate_cyclic_walk(
            &topo,
            &topo.origin(),
            CyclicTime::periods(5_000),
            &mut store,
            WalkOptions::default(),
        )
        .unwrap();
        assert!(out.closed, "seed {seed}");
        for j in out.trajectory.jumps() {
            assert!(cluster.contains(&j.site), "seed {seed}: {:?}", j.site);
        }
    }
}

#[test]
fn closure_estimates_are_monotone_in_k_max() {
    let mut prev = 0.0;
    for k in [1, 2, 4, 8, 16, 32] {
        let e = closure_probability(3, 2.0, k, 400, 8).unwrap();
        assert!(e.value >= prev);
        prev = e.value;
    }
}
