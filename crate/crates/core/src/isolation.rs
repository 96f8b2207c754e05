//! Cluster subsampling: turns a low-degree clustering into an s-separated
//! one by derandomized selection of whole clusters followed by pruning to
//! the nodes whose s-hop degree in the selection is 1.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::cluster::{Cluster, Clustering};
use crate::delay::LowDegreeClustering;
use crate::error::{Error, Result};
use crate::exact::{rat_uint, Rat};
use crate::graph::Graph;
use crate::pairwise::{fix_bits, PairwiseSpace, VarTracker};

/// s-separated clustering with provenance: which input clusters survived
/// the selection.
#[derive(Debug, Clone)]
pub struct SeparatedClustering {
    pub clustering: Clustering,
    pub separation: u64,
    /// indices of input clusters kept in the selection C'
    pub kept: Vec<u32>,
    /// exact selection quality u(y) - c(y)
    pub selection_value: BigInt,
    /// unconditioned expectation of u - c at the effective bias
    pub expected_value: Rat,
}

#[derive(Debug, Clone)]
pub struct SeparationWitness {
    pub cluster_a: u32,
    pub cluster_b: u32,
    pub distance: u64,
    pub path: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct SeparationCheck {
    pub ok: bool,
    pub witness: Option<SeparationWitness>,
}

/// Checks that all inter-cluster distances are >= s; on failure returns a
/// violating pair and a connecting path.
pub fn verify_separation(g: &Graph, clustering: &Clustering, s: u64) -> SeparationCheck {
    for (ci, c) in clustering.clusters().iter().enumerate() {
        // BFS with parents from the whole cluster
        let n = g.node_count();
        let mut dist: Vec<Option<u64>> = vec![None; n];
        let mut parent: Vec<Option<u32>> = vec![None; n];
        let mut queue = std::collections::VecDeque::new();
        for &v in &c.nodes {
            dist[v as usize] = Some(0);
            queue.push_back(v);
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize].unwrap();
            for &(v, _) in g.neighbors(u) {
                if dist[v as usize].is_none() {
                    dist[v as usize] = Some(du + 1);
                    parent[v as usize] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        for v in 0..n as u32 {
            if let (Some(d), Some(cj)) = (dist[v as usize], clustering.cluster_of(v)) {
                if cj as usize != ci && d < s {
                    let mut path = vec![v];
                    let mut cur = v;
                    while let Some(p) = parent[cur as usize] {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    return SeparationCheck {
                        ok: false,
                        witness: Some(SeparationWitness {
                            cluster_a: ci as u32,
                            cluster_b: cj,
                            distance: d,
                            path,
                        }),
                    };
                }
            }
        }
    }
    SeparationCheck { ok: true, witness: None }
}

/// All nearby clusters S_u per clustered node.
pub fn compute_su(g: &Graph, clustering: &Clustering, s: u64) -> Vec<Option<Vec<u32>>> {
    clustering.nearby_clusters(g, s)
}

/// Derandomized subsampling. Selects clusters with bias the power of two
/// in [1/(2k), 1/k) maximizing the exact conditional expectation of
/// utility - cost, keeps whole clusters, then prunes to nodes with s-hop
/// degree 1 in the selection. Output separation is at least s and the
/// clustered count is at least |V(input)| / (8k).
pub fn subsample(
    g: &Graph,
    input: &LowDegreeClustering,
    s: u64,
    k: usize,
) -> Result<SeparatedClustering> {
    let clustering = &input.clustering;
    let n_clusters = clustering.clusters().len();
    let v_in = clustering.clustered_count();
    if n_clusters == 0 {
        return Ok(SeparatedClustering {
            clustering: Clustering::empty(g.node_count()),
            separation: s,
            kept: Vec::new(),
            selection_value: BigInt::zero(),
            expected_value: Rat::zero(),
        });
    }
    let su = compute_su(g, clustering, s);
    let max_deg = su.iter().flatten().map(|l| l.len()).max().unwrap_or(0);
    if max_deg > k {
        return Err(Error::validation(format!(
            "input s-hop degree {max_deg} exceeds the bound k = {k}"
        )));
    }

    // variable c+1 selects cluster c; cost pairs (own cluster, nearby)
    let q_req = Rat::new(BigInt::from(1), BigInt::from(2 * k as u64));
    let space = PairwiseSpace::build(n_clusters, &q_req)?;
    let two_ell = 2 * space.ell();
    let sizes: Vec<u64> = clustering.clusters().iter().map(|c| c.nodes.len() as u64).collect();
    let mut pair_lists: Vec<(u32, Vec<u32>)> = Vec::new(); // (own var, other vars)
    for v in 0..g.node_count() as u32 {
        if let Some(list) = &su[v as usize] {
            let own = clustering.cluster_of(v).unwrap();
            let others: Vec<u32> =
                list.iter().filter(|&&c| c != own).map(|&c| c + 1).collect();
            if !others.is_empty() {
                pair_lists.push((own + 1, others));
            }
        }
    }

    let mut tracker = VarTracker::new(&space);
    let objective = |prefix: &[u8]| -> BigInt {
        let beta = if prefix.is_empty() {
            None
        } else {
            while tracker.committed_len() < prefix.len() - 1 {
                let bit = prefix[tracker.committed_len()];
                tracker.commit(bit);
            }
            Some(*prefix.last().unwrap())
        };
        // minimize E[cost - utility]
        let mut acc: i128 = 0;
        for (own, others) in &pair_lists {
            for &other in others {
                acc += tracker.pair_m2_scaled(*own, other, beta) as i128;
            }
        }
        for (c, &size) in sizes.iter().enumerate() {
            acc -= size as i128 * tracker.var_m1_scaled(c as u32 + 1, beta) as i128;
        }
        BigInt::from(acc)
    };
    let seed = fix_bits(&space, objective)?;
    let mut kept: Vec<u32> = Vec::new();
    for c in 0..n_clusters {
        if space.eval_variable(&seed, c + 1)? == 1 {
            kept.push(c as u32);
        }
    }

    // exact selection value u(y) - c(y)
    let kept_set: std::collections::BTreeSet<u32> = kept.iter().copied().collect();
    let mut value = BigInt::zero();
    for &c in &kept {
        value += BigInt::from(sizes[c as usize]);
    }
    for (own, others) in &pair_lists {
        if kept_set.contains(&(own - 1)) {
            for &other in others {
                if kept_set.contains(&(other - 1)) {
                    value -= BigInt::from(1u32);
                }
            }
        }
    }
    // unconditioned expectation at the effective bias
    let q = space.bias();
    let mut expected = Rat::zero();
    for &size in &sizes {
        expected += rat_uint(size) * q.clone();
    }
    for (_, others) in &pair_lists {
        expected -= rat_uint(others.len() as u64) * q.clone() * q.clone();
    }
    if Rat::from_integer(value.clone()) < expected {
        return Err(Error::internal(
            "selection value fell below its unconditioned expectation".to_string(),
        ));
    }

    // keep whole clusters in C', then prune to s-hop degree 1
    let sub_clusters: Vec<Cluster> =
        kept.iter().map(|&c| clustering.clusters()[c as usize].clone()).collect();
    let selection = Clustering::new(g.node_count(), sub_clusters)?;
    let (deg, _) = selection.s_hop_degree(g, s);
    let mut pruned = Vec::new();
    for c in selection.clusters() {
        let keep_nodes: Vec<u32> =
            c.nodes.iter().copied().filter(|&v| deg[v as usize] == Some(1)).collect();
        if keep_nodes.is_empty() {
            continue;
        }
        // degree is monotone along root paths, so the kept set is
        // root-closed and the original tree restricts cleanly
        let keep_sorted = keep_nodes;
        let parent: Vec<u32> = keep_sorted
            .iter()
            .map(|&v| c.parent_of(v).expect("member of cluster"))
            .collect();
        for &p in &parent {
            if keep_sorted.binary_search(&p).is_err() {
                return Err(Error::internal(
                    "pruned cluster is not closed under tree parents".to_string(),
                ));
            }
        }
        pruned.push(Cluster { center: c.center, nodes: keep_sorted, parent });
    }
    let out = Clustering::new(g.node_count(), pruned)?;

    let count = out.clustered_count();
    if count * 8 * k < v_in {
        return Err(Error::internal(format!(
            "subsample kept {count} nodes, below |V|/(8k) = {v_in}/{}",
            8 * k
        )));
    }
    let check = verify_separation(g, &out, s);
    if !check.ok {
        return Err(Error::internal("subsample output is not s-separated".to_string()));
    }
    // cluster diameters stay within the pipeline bound: pruned sets are
    // root-closed, so tree paths bound every pairwise distance
    let diam = out.max_strong_diameter(g)?;
    if diam > input.diameter_bound {
        return Err(Error::internal(format!(
            "pruned diameter {diam} exceeds the input bound {}",
            input.diameter_bound
        )));
    }
    Ok(SeparatedClustering {
        clustering: out,
        separation: s,
        kept,
        selection_value: value,
        expected_value: expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::{compute_delays, extract_clustering, DelayConfig};

    fn low_degree_from(
        g: &Graph,
        clusters: Vec<(u32, Vec<u32>)>,
        s: u64,
        k: usize,
    ) -> LowDegreeClustering {
        let cl: Vec<Cluster> = clusters
            .into_iter()
            .map(|(center, nodes)| Cluster::with_bfs_tree(g, center, nodes).unwrap())
            .collect();
        LowDegreeClustering {
            clustering: Clustering::new(g.node_count(), cl).unwrap(),
            s,
            k_bound: k,
            diameter_bound: 10 * s * 16,
        }
    }

    #[test]
    fn verify_separation_cases() {
        let g = Graph::parse("4 3\n0 1\n1 2\n2 3\n").unwrap();
        let single = low_degree_from(&g, vec![(0, vec![0, 1])], 2, 2);
        assert!(verify_separation(&g, &single.clustering, 2).ok);
        let two = low_degree_from(&g, vec![(0, vec![0]), (1, vec![1])], 2, 2);
        let check = verify_separation(&g, &two.clustering, 2);
        assert!(!check.ok);
        let w = check.witness.unwrap();
        assert_eq!(w.distance, 1);
        assert_eq!(w.path.len(), 2);
        // distance exactly s passes
        let spaced = low_degree_from(&g, vec![(0, vec![0]), (2, vec![2])], 2, 2);
        assert!(verify_separation(&g, &spaced.clustering, 2).ok);
    }

    #[test]
    fn compute_su_path_of_singletons() {
        let g = Graph::parse("3 2\n0 1\n1 2\n").unwrap();
        let c = low_degree_from(&g, vec![(0, vec![0]), (1, vec![1]), (2, vec![2])], 1, 3);
        let su = compute_su(&g, &c.clustering, 1);
        assert_eq!(su[1].as_ref().unwrap().len(), 3);
        assert_eq!(su[0].as_ref().unwrap().len(), 2);
    }

    #[test]
    fn compute_su_matches_definition() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let g = crate::gen::random_graph(32, 60, 5, None).unwrap();
        let d = compute_delays(&g, 2, DelayConfig::fast()).unwrap();
        let c = extract_clustering(&g, &d).unwrap();
        let s = rng.gen_range(1..=3u64);
        let su = compute_su(&g, &c.clustering, s);
        // definition: S_u = {C : d(P_u, C) <= s}, via per-cluster BFS
        for v in 0..32u32 {
            let Some(ci) = c.clustering.cluster_of(v) else { continue };
            let cluster = &c.clustering.clusters()[ci as usize];
            let path = cluster.root_path(v);
            let mut want: Vec<u32> = Vec::new();
            for (cj, other) in c.clustering.clusters().iter().enumerate() {
                let sources: Vec<(u32, u64)> = other.nodes.iter().map(|&x| (x, 0)).collect();
                let dist = g.hop_bfs_offsets(&sources);
                if path.iter().any(|&w| dist[w as usize].map_or(false, |d| d <= s)) {
                    want.push(cj as u32);
                }
            }
            assert_eq!(su[v as usize].as_ref().unwrap(), &want);
        }
    }

    #[test]
    fn subsample_two_adjacent_singletons() {
        // k=1: at most one cluster survives and separation holds
        let g = Graph::parse("2 1\n0 1\n").unwrap();
        let input = low_degree_from(&g, vec![(0, vec![0]), (1, vec![1])], 2, 1);
        // s-hop degree at s=2 is 2 > k=1, so the precondition must fail
        assert!(subsample(&g, &input, 2, 1).is_err());
        // with k = 2 the precondition holds
        let out = subsample(&g, &input, 2, 2).unwrap();
        assert!(out.clustering.clusters().len() <= 1);
        assert!(verify_separation(&g, &out.clustering, 2).ok);
    }

    #[test]
    fn subsample_already_separated() {
        let g = Graph::parse("7 2\n0 1\n5 6\n").unwrap();
        let input = low_degree_from(&g, vec![(0, vec![0, 1]), (5, vec![5, 6]), (3, vec![3])], 3, 1);
        assert!(verify_separation(&g, &input.clustering, 3).ok);
        let out = subsample(&g, &input, 3, 1).unwrap();
        let v_in = input.clustering.clustered_count();
        assert!(out.clustering.clustered_count() * 8 >= v_in);
        assert!(verify_separation(&g, &out.clustering, 3).ok);
        // kept clusters are verbatim input clusters
        for &ci in &out.kept {
            let orig = &input.clustering.clusters()[ci as usize];
            let found = out
                .clustering
                .clusters()
                .iter()
                .find(|c| c.center == orig.center)
                .expect("kept cluster present");
            assert_eq!(found.nodes, orig.nodes);
        }
    }

    #[test]
    fn subsample_pipeline_random() {
        let g = crate::gen::random_graph(64, 150, 3, None).unwrap();
        let s = 2u64;
        let d = compute_delays(&g, s, DelayConfig::fast()).unwrap();
        let c = extract_clustering(&g, &d).unwrap();
        let k = c.k_bound;
        let out = subsample(&g, &c, s, k).unwrap();
        assert!(verify_separation(&g, &out.clustering, s).ok);
        let v_in = c.clustering.clustered_count();
        assert!(out.clustering.clustered_count() * 8 * k >= v_in);
        // every output node's s-hop degree in the output is 1
        let (deg, maxdeg) = out.clustering.s_hop_degree(&g, s);
        assert!(maxdeg <= 1);
        for v in 0..64u32 {
            if out.clustering.is_clustered(v) {
                assert_eq!(deg[v as usize], Some(1));
            }
        }
    }
}
