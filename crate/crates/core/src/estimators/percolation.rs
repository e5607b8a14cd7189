use std::collections::VecDeque;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::EstimatorError;
use crate::clocks::ClockStore;
use crate::graph::{Site, Topology};
use crate::rng::{self, tag};
use crate::walk::{simulate_cyclic_walk, CyclicTime, WalkOptions};

/// The cluster of a site under "edges that ring at least once per period".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    /// Explored sites in increasing order (all of the cluster unless the cap was hit).
    pub sites: Vec<Site>,
    /// The exploration stopped after finding more than `cap` sites.
    pub cap_exceeded: bool,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: &Site) -> bool {
        self.sites.binary_search(site).is_ok()
    }
}

/// Breadth-first exploration of the ring-percolation cluster of `origin`,
/// sampling ring counts lazily from `store`.
pub fn percolation_cluster_in(topology: &Topology, store: &mut ClockStore, origin: &Site, cap: usize) -> Cluster {
    let mut seen: FxHashSet<Site> = FxHashSet::default();
    let mut queue = VecDeque::new();
    seen.insert(origin.clone());
    queue.push_back(origin.clone());
    let mut cap_exceeded = false;
    'bfs: while let Some(u) = queue.pop_front() {
        for dir in 0..topology.degree() {
            let edge = topology.edge_at(&u, dir);
            if store.ring_count(&edge) == 0 {
                continue;
            }
            let v = topology.across(&edge, &u);
            if seen.insert(v.clone()) {
                if seen.len() > cap {
                    cap_exceeded = true;
                    break 'bfs;
                }
                queue.push_back(v);
            }
        }
    }
    let mut sites: Vec<Site> = seen.into_iter().collect();
    sites.sort();
    Cluster { sites, cap_exceeded }
}

/// One percolation replica: the origin's cluster and the cyclic walk in the same clocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercolationRow {
    pub replica: usize,
    pub cluster_size: usize,
    pub cap_exceeded: bool,
    /// Closure period of the origin's walk within `k_max` periods.
    pub closure: Option<u64>,
    /// Sites visited by the walk that lie outside the cluster; `None` when the cap was hit.
    pub violations: Option<usize>,
}

pub fn percolation_replica(
    topology: &Topology,
    beta: f64,
    seed: u64,
    i: usize,
    cap: usize,
    k_max: u64,
) -> Result<PercolationRow, EstimatorError> {
    let mut store = ClockStore::new(beta, rng::derive_seed(seed, [tag::REPLICA, i as u64]))?;
    let origin = topology.origin();
    let cluster = percolation_cluster_in(topology, &mut store, &origin, cap);
    let out = simulate_cyclic_walk(
        topology,
        &origin,
        CyclicTime::periods(k_max),
        &mut store,
        WalkOptions::default(),
    )?;
    let violations = (!cluster.cap_exceeded).then(|| {
        out.trajectory
            .jumps()
            .iter()
            .filter(|j| !cluster.contains(&j.site))
            .count()
    });
    Ok(PercolationRow {
        replica: i,
        cluster_size: cluster.len(),
        cap_exceeded: cluster.cap_exceeded,
        closure: out.tau_reg.map(|t| t.period),
        violations,
    })
}

/// The cluster of the origin of `Z^d` for the clocks of `seed`.
pub fn percolation_cluster(d: usize, beta: f64, seed: u64, cap: usize) -> Result<Cluster, EstimatorError> {
    let topo = Topology::lattice(d)?;
    let mut store = ClockStore::new(beta, seed)?;
    Ok(percolation_cluster_in(&topo, &mut store, &topo.origin(), cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    #[test]
    fn zero_beta_isolates_the_origin() {
        let c = percolation_cluster(3, 0.0, 1, 100).unwrap();
        assert_eq!(c.sites, vec![Site::origin(3)]);
        assert!(!c.cap_exceeded);
    }

    #[test]
    fn scripted_edges_form_the_cluster() {
        let topo = Topology::lattice(1).unwrap();
        let e = |x: i64| Edge::Lattice {
            base: Site::new(&[x]),
            axis: 0,
        };
        let mut store =
            ClockStore::scripted(1.0, [(e(0), vec![0.5]), (e(-2), vec![0.1]), (e(1), vec![0.2, 0.7])]).unwrap();
        let c = percolation_cluster_in(&topo, &mut store, &Site::new(&[0]), 10);
        let xs: Vec<i64> = c.sites.iter().map(|s| s[0]).collect();
        assert_eq!(xs, vec![0, 1, 2]);
        assert!(c.contains(&Site::new(&[2])) && !c.contains(&Site::new(&[-1])));
    }

    #[test]
    fn subcritical_walks_close_inside_their_cluster() {
        let topo = Topology::lattice(2).unwrap();
        for i in 0..50 {
            let row = percolation_replica(&topo, 0.2, 3, i, 10_000, 10_000).unwrap();
            assert_eq!(row.violations, Some(0));
            assert!(row.closure.is_some());
        }
    }

    #[test]
    fn supercritical_clusters_hit_the_cap() {
        let c = percolation_cluster(2, 3.0, 7, 500).unwrap();
        assert!(c.cap_exceeded);
        assert_eq!(c.len(), 501);
    }
}
