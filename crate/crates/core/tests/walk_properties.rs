use proptest::prelude::*;
use stirring::interchange::build_permutation;
use stirring::rng;
use stirring::walk::{
    simulate_cyclic_walk, simulate_driven_live, simulate_regenerated_driven, simulate_regenerated_walk, WalkOptions,
};
use stirring::{ClockStore, CyclicTime, Site, Topology, Trajectory};

/// Jump times plus midpoints between them.
fn probe_times(traj: &Trajectory) -> Vec<CyclicTime> {
    let beta = traj.beta();
    let mut out = vec![traj.origin()];
    let mut prev = traj.origin();
    for j in traj.jumps() {
        out.push(prev.add_real(j.time.since(prev, beta) / 2.0, beta));
        out.push(j.time);
        prev = j.time;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn walks_follow_the_interchange_permutation(seed in any::<u64>(), d in 1usize..3, side in 3i64..6, beta in 0.1f64..3.0) {
        let topo = Topology::torus(d, side).unwrap();
        let mut store = ClockStore::new(beta, seed).unwrap();
        let perm = build_permutation(&topo, &mut store).unwrap().permutation;
        for v in 0..topo.vertex_count().unwrap() {
            let start = topo.vertex(v).unwrap();
            let out = simulate_cyclic_walk(&topo, &start, CyclicTime::periods(1), &mut store, WalkOptions::periodic()).unwrap();
            let end = out.trajectory.position_at(CyclicTime::periods(1));
            prop_assert_eq!(topo.index_of(end), Some(perm.apply(v)));
        }
    }

    #[test]
    fn exposure_walks_step_along_edges_and_close_at_their_start(seed in any::<u64>(), d in 1usize..4, beta in 0.2f64..4.0) {
        let topo = Topology::lattice(d).unwrap();
        let mut store = ClockStore::new(beta, seed).unwrap();
        let out = simulate_cyclic_walk(&topo, &topo.origin(), CyclicTime::periods(12), &mut store, WalkOptions::default()).unwrap();
        out.trajectory.validate_steps(&topo).unwrap();
        if let Some(tau) = out.tau_reg {
            prop_assert_eq!(tau.offset, 0.0);
            prop_assert_eq!(out.trajectory.position_at(tau), &topo.origin());
            for k in 1..tau.period {
                prop_assert_ne!(out.trajectory.position_at(CyclicTime::periods(k)), &topo.origin());
            }
        }
    }

    #[test]
    fn closed_walks_repeat_with_period_tau(seed in any::<u64>(), beta in 0.2f64..2.0) {
        let topo = Topology::lattice(1).unwrap();
        let mut store = ClockStore::new(beta, seed).unwrap();
        let h = CyclicTime::periods(60);
        let out = simulate_cyclic_walk(&topo, &topo.origin(), h, &mut store, WalkOptions::periodic()).unwrap();
        if let Some(tau) = out.tau_reg {
            let traj = &out.trajectory;
            for s in probe_times(traj) {
                let later = s.plus_periods(tau.period);
                if later <= h {
                    prop_assert_eq!(traj.position_at(s), traj.position_at(later));
                }
            }
        }
    }

    #[test]
    fn walks_never_meet_their_history_before_closing(seed in any::<u64>(), d in 1usize..4, beta in 0.3f64..3.0, driven in any::<bool>()) {
        let topo = Topology::lattice(d).unwrap();
        let h = CyclicTime::periods(10);
        let out = if driven {
            let mut r = rng::stream(seed, [0]);
            simulate_driven_live(&topo, &topo.origin(), beta, h, &mut r, WalkOptions::default()).unwrap()
        } else {
            let mut store = ClockStore::new(beta, seed).unwrap();
            simulate_cyclic_walk(&topo, &topo.origin(), h, &mut store, WalkOptions::default()).unwrap()
        };
        let traj = &out.trajectory;
        for s in probe_times(traj) {
            if out.tau_reg.is_some_and(|tau| s >= tau) {
                continue;
            }
            for k in 1..=s.period {
                let past = s.minus_periods(k).unwrap();
                prop_assert_ne!(traj.position_at(s), traj.position_at(past), "at {} and {}", s, past);
            }
        }
    }

    #[test]
    fn regenerated_walks_restart_at_the_origin(seed in any::<u64>(), beta in 0.2f64..2.0, driven in any::<bool>()) {
        let topo = Topology::lattice(1).unwrap();
        let h = CyclicTime::periods(30);
        let traj = if driven {
            simulate_regenerated_driven(&topo, beta, &topo.origin(), h, &mut rng::stream(seed, [1])).unwrap()
        } else {
            simulate_regenerated_walk(&topo, beta, &topo.origin(), h, seed).unwrap()
        };
        prop_assert_eq!(traj.horizon(), h);
        for &m in traj.regen_marks() {
            prop_assert_eq!(m.offset, 0.0);
            prop_assert_eq!(traj.position_at(m), &topo.origin());
        }
        traj.validate_steps(&topo).unwrap();
    }

    #[test]
    fn trajectories_round_trip_through_json(seed in any::<u64>(), d in 1usize..4, beta in 0.2f64..4.0) {
        let topo = Topology::lattice(d).unwrap();
        let traj = simulate_regenerated_walk(&topo, beta, &topo.origin(), CyclicTime::new(8, beta / 3.0), seed).unwrap();
        let line = traj.to_json_line();
        prop_assert!(!line.contains('\n'));
        prop_assert_eq!(Trajectory::from_json_line(&line).unwrap(), traj);
    }
}

#[test]
fn trajectory_json_has_the_documented_fields() {
    let topo = Topology::lattice(2).unwrap();
    let traj = simulate_regenerated_walk(&topo, 1.0, &topo.origin(), CyclicTime::periods(20), 3).unwrap();
    let v: serde_json::Value = serde_json::from_str(&traj.to_json_line()).unwrap();
    assert_eq!(v["start"], serde_json::json!([0, 0]));
    assert_eq!(v["beta"], 1.0);
    let jump = &v["jumps"][0];
    assert_eq!(jump.as_array().unwrap().len(), 3);
    assert!(v["regen"].is_array());
    let _: Vec<Site> =
        serde_json::from_value(v["jumps"].as_array().unwrap().iter().map(|j| j[2].clone()).collect()).unwrap();
}
