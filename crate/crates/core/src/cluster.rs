//! Shared clustering representation: disjoint node sets, each with a
//! designated center and a rooted spanning (BFS) tree.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone)]
pub struct Cluster {
    pub center: u32,
    /// sorted member list
    pub nodes: Vec<u32>,
    /// parent in the rooted tree, aligned with `nodes`; the center is its
    /// own parent
    pub parent: Vec<u32>,
}

impl Cluster {
    pub fn contains(&self, v: u32) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }

    pub fn parent_of(&self, v: u32) -> Option<u32> {
        self.nodes.binary_search(&v).ok().map(|i| self.parent[i])
    }

    /// Path from `v` up to the center, inclusive.
    pub fn root_path(&self, v: u32) -> Vec<u32> {
        let mut path = vec![v];
        let mut cur = v;
        while cur != self.center {
            cur = self.parent_of(cur).expect("tree parent missing");
            path.push(cur);
            assert!(path.len() <= self.nodes.len() + 1, "cycle in cluster tree");
        }
        path
    }

    /// Builds the BFS tree of G[nodes] rooted at the center.
    pub fn with_bfs_tree(g: &Graph, center: u32, mut nodes: Vec<u32>) -> Result<Cluster> {
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.binary_search(&center).is_err() {
            return Err(Error::validation(format!("center {center} not in cluster")));
        }
        let pos = |v: u32| nodes.binary_search(&v).ok();
        let mut parent: Vec<Option<u32>> = vec![None; nodes.len()];
        parent[pos(center).unwrap()] = Some(center);
        let mut queue = VecDeque::from([center]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in g.neighbors(u) {
                if let Some(i) = pos(v) {
                    if parent[i].is_none() {
                        parent[i] = Some(u);
                        queue.push_back(v);
                    }
                }
            }
        }
        let parent: Option<Vec<u32>> = parent.into_iter().collect();
        let parent = parent.ok_or_else(|| {
            Error::validation(format!("cluster with center {center} is not connected"))
        })?;
        Ok(Cluster { center, nodes, parent })
    }
}

/// Disjoint clusters over the nodes of one graph.
#[derive(Debug, Clone)]
pub struct Clustering {
    n: usize,
    clusters: Vec<Cluster>,
    /// per node: index into `clusters`, if clustered
    assignment: Vec<Option<u32>>,
}

impl Clustering {
    pub fn new(n: usize, clusters: Vec<Cluster>) -> Result<Clustering> {
        let mut assignment: Vec<Option<u32>> = vec![None; n];
        for (ci, c) in clusters.iter().enumerate() {
            for &v in &c.nodes {
                if v as usize >= n {
                    return Err(Error::validation(format!("cluster node {v} out of range")));
                }
                if assignment[v as usize].is_some() {
                    return Err(Error::validation(format!("node {v} in two clusters")));
                }
                assignment[v as usize] = Some(ci as u32);
            }
        }
        Ok(Clustering { n, clusters, assignment })
    }

    pub fn empty(n: usize) -> Clustering {
        Clustering { n, clusters: Vec::new(), assignment: vec![None; n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster_of(&self, v: u32) -> Option<u32> {
        self.assignment[v as usize]
    }

    pub fn clustered_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }

    pub fn is_clustered(&self, v: u32) -> bool {
        self.assignment[v as usize].is_some()
    }

    /// Maximum strong diameter over clusters (hop metric); error if some
    /// induced cluster subgraph is disconnected.
    pub fn max_strong_diameter(&self, g: &Graph) -> Result<u64> {
        let mut best = 0;
        for c in &self.clusters {
            match g.component_strong_diameter(&c.nodes)? {
                Some(d) => best = best.max(d),
                None => {
                    return Err(Error::validation(format!(
                        "cluster centered at {} induces a disconnected subgraph",
                        c.center
                    )))
                }
            }
        }
        Ok(best)
    }

    /// Checks structural sanity: tree edges exist in G and parents lie in
    /// the cluster; root paths terminate at the center.
    pub fn validate_trees(&self, g: &Graph) -> Result<()> {
        for c in &self.clusters {
            for (i, &v) in c.nodes.iter().enumerate() {
                let p = c.parent[i];
                if v == c.center {
                    if p != v {
                        return Err(Error::validation("center parent must be itself".to_string()));
                    }
                    continue;
                }
                if !c.contains(p) {
                    return Err(Error::validation(format!("parent {p} of {v} outside cluster")));
                }
                if !g.neighbors(v).iter().any(|&(w, _)| w == p) {
                    return Err(Error::validation(format!("tree edge {v}-{p} not in graph")));
                }
                c.root_path(v);
            }
        }
        Ok(())
    }

    /// For each clustered node u, the sorted list of cluster indices C'
    /// with d(P_u, C') <= s, where P_u is u's tree path to the root.
    /// The node's own cluster is included. Hop metric.
    pub fn nearby_clusters(&self, g: &Graph, s: u64) -> Vec<Option<Vec<u32>>> {
        // distance-to-cluster maps, one multi-source BFS per cluster
        let mut near_by_node: Vec<Vec<u32>> = vec![Vec::new(); self.n];
        for (ci, c) in self.clusters.iter().enumerate() {
            let sources: Vec<(u32, u64)> = c.nodes.iter().map(|&v| (v, 0)).collect();
            let dist = g.hop_bfs_offsets(&sources);
            for v in 0..self.n {
                if let Some(d) = dist[v] {
                    if d <= s {
                        near_by_node[v].push(ci as u32);
                    }
                }
            }
        }
        // accumulate along tree paths: S_u = S_parent(u) union near(u)
        let mut out: Vec<Option<Vec<u32>>> = vec![None; self.n];
        for c in &self.clusters {
            // process nodes by increasing tree depth
            let mut order: Vec<u32> = c.nodes.clone();
            let depth: std::collections::BTreeMap<u32, usize> = c
                .nodes
                .iter()
                .map(|&v| (v, c.root_path(v).len()))
                .collect();
            order.sort_by_key(|v| (depth[v], *v));
            for v in order {
                let mut acc: Vec<u32> = if v == c.center {
                    Vec::new()
                } else {
                    out[c.parent_of(v).unwrap() as usize].clone().unwrap_or_default()
                };
                acc.extend_from_slice(&near_by_node[v as usize]);
                acc.sort_unstable();
                acc.dedup();
                out[v as usize] = Some(acc);
            }
        }
        out
    }

    /// Per-node s-hop degree (None for unclustered nodes) and the maximum.
    pub fn s_hop_degree(&self, g: &Graph, s: u64) -> (Vec<Option<usize>>, usize) {
        let near = self.nearby_clusters(g, s);
        let per: Vec<Option<usize>> = near.iter().map(|o| o.as_ref().map(|v| v.len())).collect();
        let max = per.iter().flatten().copied().max().unwrap_or(0);
        (per, max)
    }
}
