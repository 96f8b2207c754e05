//! Densification and the top-level decomposition pipeline: expanding a
//! well-separated clustering until its boundary is small, iterating until
//! half the nodes are clustered at separation 2, and coloring the graph
//! by repeating that on the residual.

use crate::cluster::{Cluster, Clustering};
use crate::delay::{compute_delays, extract_clustering, DelayConfig};
use crate::error::{Error, Result};
use crate::graph::{Graph, Remap};
use crate::isolation::{subsample, verify_separation};

/// Expanded clustering with the per-cluster cut radii.
#[derive(Debug, Clone)]
pub struct ExpandedClustering {
    pub clustering: Clustering,
    /// cut radius per kept cluster
    pub cuts: Vec<u64>,
    /// nodes lost to bad (dropped) clusters
    pub dropped_nodes: usize,
}

/// Ball C^{<=d} of a node set, by hop BFS.
fn ball(g: &Graph, nodes: &[u32], d: u64) -> Vec<u32> {
    let sources: Vec<(u32, u64)> = nodes.iter().map(|&v| (v, 0)).collect();
    let dist = g.hop_bfs_offsets(&sources);
    (0..g.node_count() as u32)
        .filter(|&v| dist[v as usize].map_or(false, |x| x <= d))
        .collect()
}

/// Grows each cluster to the smallest radius cut(C) <= 3x at which one
/// more hop adds at most a 1.5 factor; clusters without such a radius are
/// dropped. Requires input separation >= 10x so the 3x-balls of distinct
/// clusters stay disjoint.
pub fn expand(g: &Graph, input: &Clustering, x: u64) -> Result<ExpandedClustering> {
    let check = verify_separation(g, input, 10 * x);
    if let Some(w) = check.witness {
        return Err(Error::validation(format!(
            "expand requires separation >= {}: clusters {} and {} are at distance {}",
            10 * x,
            w.cluster_a,
            w.cluster_b,
            w.distance
        )));
    }
    let mut clusters = Vec::new();
    let mut cuts = Vec::new();
    let mut dropped_nodes = 0usize;
    for c in input.clusters() {
        let sources: Vec<(u32, u64)> = c.nodes.iter().map(|&v| (v, 0)).collect();
        let dist = g.hop_bfs_offsets(&sources);
        let mut sizes = vec![0u64; (3 * x + 2) as usize];
        for v in 0..g.node_count() {
            if let Some(d) = dist[v] {
                if d <= 3 * x + 1 {
                    sizes[d as usize] += 1;
                }
            }
        }
        for i in 1..sizes.len() {
            sizes[i] += sizes[i - 1];
        }
        let cut = (0..=3 * x).find(|&i| 2 * sizes[i as usize + 1] <= 3 * sizes[i as usize]);
        match cut {
            None => dropped_nodes += c.nodes.len(),
            Some(cut) => {
                let nodes: Vec<u32> = (0..g.node_count() as u32)
                    .filter(|&v| dist[v as usize].map_or(false, |d| d <= cut))
                    .collect();
                clusters.push(Cluster::with_bfs_tree(g, c.center, nodes)?);
                cuts.push(cut);
            }
        }
    }
    let clustering = Clustering::new(g.node_count(), clusters)?;

    // Lemma guarantees, asserted: bad clusters hold at most n / 2^(x+1)
    // nodes; kept clusters are pairwise >= 4x apart; the 1-boundary is
    // at most half the clustered count
    let n = g.node_count();
    if (dropped_nodes as u128) << (x + 1) > n as u128 {
        return Err(Error::internal(format!(
            "bad clusters hold {dropped_nodes} nodes, more than n/2^(x+1)"
        )));
    }
    let sep = verify_separation(g, &clustering, 4 * x);
    if !sep.ok {
        return Err(Error::internal("expanded clusters closer than 4x".to_string()));
    }
    let clustered: Vec<u32> =
        (0..n as u32).filter(|&v| clustering.is_clustered(v)).collect();
    if !clustered.is_empty() {
        let boundary = ball(g, &clustered, 1).len();
        if 2 * boundary > 3 * clustered.len() {
            return Err(Error::internal(format!(
                "expanded boundary {boundary} exceeds 1.5 x clustered {}",
                clustered.len()
            )));
        }
    }
    Ok(ExpandedClustering { clustering, cuts, dropped_nodes })
}

/// Per-iteration record of the densification loop.
#[derive(Debug, Clone)]
pub struct HalfIteration {
    pub residual_nodes: usize,
    pub inner_clustered: usize,
    pub expanded_clustered: usize,
    pub total_clustered: usize,
    pub boundary: usize,
}

#[derive(Debug, Clone)]
pub struct HalfOutcome {
    pub clustering: Clustering,
    pub iterations: Vec<HalfIteration>,
}

/// Iterates an inner clustering algorithm (separation >= 10x on induced
/// subgraphs) on the residual graph, expanding each round, until at
/// least half the nodes are clustered at separation 2. The three loop
/// invariants are asserted after every iteration.
pub fn cluster_half(
    g: &Graph,
    x: u64,
    inner: &mut dyn FnMut(&Graph) -> Result<Clustering>,
) -> Result<HalfOutcome> {
    let n = g.node_count();
    let rounds = 4usize << x;
    let mut total = Clustering::empty(n);
    let mut iterations = Vec::new();
    for i in 1..=rounds {
        if 2 * total.clustered_count() >= n {
            break;
        }
        let clustered: Vec<u32> = (0..n as u32).filter(|&v| total.is_clustered(v)).collect();
        let blocked = ball(g, &clustered, 1);
        let blocked_set: std::collections::BTreeSet<u32> = blocked.into_iter().collect();
        let keep: Vec<u32> = (0..n as u32).filter(|v| !blocked_set.contains(v)).collect();
        if keep.is_empty() {
            break;
        }
        let (sub, remap) = g.induced_subgraph(&keep)?;
        let inner_clustering = inner(&sub)?;
        let sep = verify_separation(&sub, &inner_clustering, 10 * x);
        if !sep.ok {
            return Err(Error::validation(format!(
                "inner clustering is not {}-separated at iteration {i}",
                10 * x
            )));
        }
        let expanded = expand(&sub, &inner_clustering, x)?;
        let mut clusters: Vec<Cluster> = total.clusters().to_vec();
        for c in expanded.clustering.clusters() {
            clusters.push(remap_cluster(c, &remap));
        }
        let inner_count = inner_clustering.clustered_count();
        let expanded_count = expanded.clustering.clustered_count();
        total = Clustering::new(n, clusters)?;

        // invariant 1: union stays 2-separated
        let sep = verify_separation(g, &total, 2);
        if !sep.ok {
            return Err(Error::internal(format!(
                "densified clustering lost 2-separation at iteration {i}"
            )));
        }
        // invariant 2: clustered count follows the schedule
        let count = total.clustered_count();
        let on_schedule = 2 * count >= n || count * (8 << x) >= n * i;
        if !on_schedule {
            return Err(Error::internal(format!(
                "clustered only {count} of {n} nodes by iteration {i}"
            )));
        }
        // invariant 3: boundary at most 1.5 x clustered
        let clustered_now: Vec<u32> = (0..n as u32).filter(|&v| total.is_clustered(v)).collect();
        let boundary = ball(g, &clustered_now, 1).len();
        if 2 * boundary > 3 * count {
            return Err(Error::internal(format!(
                "boundary {boundary} exceeds 1.5 x clustered {count} at iteration {i}"
            )));
        }
        iterations.push(HalfIteration {
            residual_nodes: keep.len(),
            inner_clustered: inner_count,
            expanded_clustered: expanded_count,
            total_clustered: count,
            boundary,
        });
    }
    if 2 * total.clustered_count() < n {
        return Err(Error::internal(format!(
            "densification clustered {} of {n} nodes after {rounds} iterations",
            total.clustered_count()
        )));
    }
    Ok(HalfOutcome { clustering: total, iterations })
}

fn remap_cluster(c: &Cluster, remap: &Remap) -> Cluster {
    let mut pairs: Vec<(u32, u32)> = c
        .nodes
        .iter()
        .zip(&c.parent)
        .map(|(&v, &p)| (remap.to_old(v), remap.to_old(p)))
        .collect();
    pairs.sort_unstable();
    Cluster {
        center: remap.to_old(c.center),
        nodes: pairs.iter().map(|&(v, _)| v).collect(),
        parent: pairs.iter().map(|&(_, p)| p).collect(),
    }
}

/// Which algorithm feeds the densification loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerKind {
    /// delay clustering -> isolation, per the main pipeline
    #[default]
    Pipeline,
    /// deterministic greedy ball carving (clusters >= half on its own)
    Greedy,
}

#[derive(Debug, Clone, Copy)]
pub struct DecomposeConfig {
    /// expansion parameter; None picks 2 at small scale and the
    /// asymptotic formula above 10^4 nodes
    pub x: Option<u64>,
    /// delay-clustering constant c_k (see DelayConfig)
    pub c_k: u64,
    pub inner: InnerKind,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig { x: None, c_k: 4, inner: InnerKind::Pipeline }
    }
}

pub fn default_x(n: usize) -> u64 {
    if n <= 10_000 {
        2
    } else {
        let loglog = crate::delay::iteration_count(1, n) as f64;
        (2000.0 * loglog).log2().ceil() as u64
    }
}

/// Greedy ball carving: repeatedly grow a ball around an unprocessed node
/// in radius steps of 10x until one more step would less than double it,
/// keep the inner ball, and discard the annulus. Clusters at least half
/// of the nodes with separation > 10x and radius <= 10x log2 n.
pub fn greedy_carving(g: &Graph, x: u64) -> Result<Clustering> {
    let n = g.node_count();
    let step = 10 * x;
    let mut removed = vec![false; n];
    let mut clusters = Vec::new();
    for v in 0..n as u32 {
        if removed[v as usize] {
            continue;
        }
        // distances within the unprocessed subgraph
        let alive: Vec<u32> = (0..n as u32).filter(|&u| !removed[u as usize]).collect();
        let (sub, remap) = g.induced_subgraph(&alive)?;
        let local_v = remap.to_new(v).unwrap();
        let dist = sub.hop_bfs(local_v);
        let count_within = |r: u64| -> usize {
            dist.iter().filter(|d| d.map_or(false, |x| x <= r)).count()
        };
        let mut r = 0u64;
        while count_within(r + step) > 2 * count_within(r) {
            r += step;
        }
        let keep: Vec<u32> = (0..sub.node_count() as u32)
            .filter(|&u| dist[u as usize].map_or(false, |d| d <= r))
            .map(|u| remap.to_old(u))
            .collect();
        for u in 0..sub.node_count() as u32 {
            if dist[u as usize].map_or(false, |d| d <= r + step) {
                removed[remap.to_old(u) as usize] = true;
            }
        }
        clusters.push(Cluster::with_bfs_tree(g, v, keep)?);
    }
    Clustering::new(n, clusters)
}

/// One color layer of a network decomposition.
#[derive(Debug, Clone)]
pub struct ColorLayer {
    pub clustering: Clustering,
    pub residual_nodes: usize,
    /// configured strong-diameter bound for this layer
    pub diameter_bound: u64,
}

/// Full decomposition: per-node color, per-color clusterings.
#[derive(Debug, Clone)]
pub struct NetworkDecomposition {
    pub n: usize,
    pub x: u64,
    pub layers: Vec<ColorLayer>,
}

impl NetworkDecomposition {
    pub fn colors(&self) -> usize {
        self.layers.len()
    }

    /// (color, cluster index within color) per node.
    pub fn assignment(&self) -> Vec<Option<(u32, u32)>> {
        let mut out = vec![None; self.n];
        for (ci, layer) in self.layers.iter().enumerate() {
            for v in 0..self.n as u32 {
                if let Some(cl) = layer.clustering.cluster_of(v) {
                    out[v as usize] = Some((ci as u32 + 1, cl));
                }
            }
        }
        out
    }

    /// Text format: one line per node "node_id color cluster_id center_id"
    /// with cluster ids numbered sequentially across colors.
    pub fn render(&self) -> String {
        let mut cluster_base = vec![0u32; self.layers.len() + 1];
        for (i, layer) in self.layers.iter().enumerate() {
            cluster_base[i + 1] = cluster_base[i] + layer.clustering.clusters().len() as u32;
        }
        let mut out = String::new();
        for v in 0..self.n as u32 {
            let (color, cluster) = self
                .assignment()[v as usize]
                .expect("every node is colored");
            let layer = &self.layers[color as usize - 1];
            let center = layer.clustering.clusters()[cluster as usize].center;
            let gid = cluster_base[color as usize - 1] + cluster;
            out.push_str(&format!("{v} {color} {gid} {center}\n"));
        }
        out
    }
}

/// Colors the graph by repeatedly clustering at least half of the
/// remaining nodes with separation 2.
pub fn decompose(g: &Graph, cfg: DecomposeConfig) -> Result<NetworkDecomposition> {
    let n = g.node_count();
    let x = cfg.x.unwrap_or_else(|| default_x(n));
    if x < 2 {
        return Err(Error::validation("x must be >= 2"));
    }
    let s_eff = 10 * x;
    let color_budget = (n.max(2) as u64).ilog2() as usize + 2;
    let mut layers: Vec<ColorLayer> = Vec::new();
    let mut remaining: Vec<u32> = (0..n as u32).collect();
    while !remaining.is_empty() {
        if layers.len() >= color_budget {
            return Err(Error::internal(format!(
                "color budget {color_budget} exhausted with {} nodes left",
                remaining.len()
            )));
        }
        let (sub, remap) = g.induced_subgraph(&remaining)?;
        let mut inner = |gr: &Graph| -> Result<Clustering> {
            match cfg.inner {
                InnerKind::Greedy => greedy_carving(gr, x),
                InnerKind::Pipeline => {
                    let delays = compute_delays(gr, s_eff, DelayConfig { c_k: cfg.c_k })?;
                    let low = extract_clustering(gr, &delays)?;
                    let sep = subsample(gr, &low, s_eff, low.k_bound)?;
                    Ok(sep.clustering)
                }
            }
        };
        let half = cluster_half(&sub, x, &mut inner)?;
        let clusters: Vec<Cluster> =
            half.clustering.clusters().iter().map(|c| remap_cluster(c, &remap)).collect();
        let layer_clustering = Clustering::new(n, clusters)?;
        let r_bound = crate::delay::phase_count(sub.node_count()) as u64;
        layers.push(ColorLayer {
            clustering: layer_clustering,
            residual_nodes: sub.node_count(),
            diameter_bound: 10 * x * r_bound * s_eff,
        });
        let layer = layers.last().unwrap();
        let next: Vec<u32> = remaining
            .iter()
            .copied()
            .filter(|&v| !layer.clustering.is_clustered(v))
            .collect();
        // residual halves every round
        if 2 * next.len() > remaining.len() {
            return Err(Error::internal("residual did not halve".to_string()));
        }
        remaining = next;
    }
    Ok(NetworkDecomposition { n, x, layers })
}

/// Recomputed pass/fail report for a decomposition.
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub colors: usize,
    pub all_colored: bool,
    pub adjacency_violations: usize,
    /// per color: (max strong diameter observed, configured bound)
    pub diameters: Vec<(u64, u64)>,
    pub pass: bool,
}

pub fn verify_decomposition(g: &Graph, d: &NetworkDecomposition) -> Result<DecompositionReport> {
    let assignment = d.assignment();
    let all_colored = assignment.iter().all(|a| a.is_some());
    let mut adjacency_violations = 0usize;
    for (u, v, _) in g.edges() {
        if let (Some((cu, ku)), Some((cv, kv))) =
            (assignment[u as usize], assignment[v as usize])
        {
            if cu == cv && ku != kv {
                adjacency_violations += 1;
            }
        }
    }
    let mut diameters = Vec::new();
    let mut diam_ok = true;
    for layer in &d.layers {
        let mut max_diam = 0u64;
        for c in layer.clustering.clusters() {
            match g.component_strong_diameter(&c.nodes)? {
                Some(dm) => max_diam = max_diam.max(dm),
                None => {
                    diam_ok = false;
                }
            }
        }
        if max_diam > layer.diameter_bound {
            diam_ok = false;
        }
        diameters.push((max_diam, layer.diameter_bound));
    }
    let pass = all_colored && adjacency_violations == 0 && diam_ok;
    Ok(DecompositionReport {
        colors: d.colors(),
        all_colored,
        adjacency_violations,
        diameters,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_isolated_singleton() {
        let g = Graph::new(3, &[(1, 2, 1)]).unwrap();
        let input = Clustering::new(
            3,
            vec![Cluster::with_bfs_tree(&g, 0, vec![0]).unwrap()],
        )
        .unwrap();
        let e = expand(&g, &input, 2).unwrap();
        assert_eq!(e.cuts, vec![0]);
        assert_eq!(e.clustering.clusters()[0].nodes, vec![0]);
    }

    #[test]
    fn expand_star_center() {
        // star with 8 leaves: |C^{<=0}| = 1, |C^{<=1}| = 9 > 1.5, then
        // |C^{<=2}| = |C^{<=1}| so cut = 1
        let mut edges = Vec::new();
        for v in 1..9u32 {
            edges.push((0, v, 1));
        }
        let g = Graph::new(9, &edges).unwrap();
        let input =
            Clustering::new(9, vec![Cluster::with_bfs_tree(&g, 0, vec![0]).unwrap()]).unwrap();
        let e = expand(&g, &input, 2).unwrap();
        assert_eq!(e.cuts, vec![1]);
        assert_eq!(e.clustering.clusters()[0].nodes.len(), 9);
    }

    #[test]
    fn expand_geometric_growth_drops_cluster() {
        // binary tree of depth 3x+1 = 7 grows by 2 every hop from the root
        let x = 2u64;
        let depth = (3 * x + 1) as u32;
        let n = (1usize << (depth + 1)) - 1;
        let g = crate::gen::tree_graph(n).unwrap();
        let input =
            Clustering::new(n, vec![Cluster::with_bfs_tree(&g, 0, vec![0]).unwrap()]).unwrap();
        let e = expand(&g, &input, x).unwrap();
        assert!(e.clustering.clusters().is_empty());
        assert_eq!(e.dropped_nodes, 1);
    }

    #[test]
    fn expand_rejects_close_clusters() {
        let g = crate::gen::path_graph(6).unwrap();
        let input = Clustering::new(
            6,
            vec![
                Cluster::with_bfs_tree(&g, 0, vec![0]).unwrap(),
                Cluster::with_bfs_tree(&g, 5, vec![5]).unwrap(),
            ],
        )
        .unwrap();
        assert!(expand(&g, &input, 2).is_err()); // distance 5 < 10x
    }

    #[test]
    fn greedy_carving_meets_preconditions() {
        for seed in 0..3u64 {
            let g = crate::gen::random_graph(60, 140, seed, None).unwrap();
            let x = 2;
            let c = greedy_carving(&g, x).unwrap();
            assert!(2 * c.clustered_count() >= 60);
            assert!(verify_separation(&g, &c, 10 * x).ok);
        }
    }

    #[test]
    fn cluster_half_trivial_inner_one_shot() {
        // an inner that clusters everything in one separated cluster
        let g = crate::gen::path_graph(8).unwrap();
        let mut inner = |gr: &Graph| -> Result<Clustering> {
            let nodes: Vec<u32> = (0..gr.node_count() as u32).collect();
            Ok(Clustering::new(
                gr.node_count(),
                vec![Cluster::with_bfs_tree(gr, 0, nodes)?],
            )?)
        };
        let out = cluster_half(&g, 2, &mut inner).unwrap();
        assert_eq!(out.iterations.len(), 1);
        assert!(2 * out.clustering.clustered_count() >= 8);
    }

    #[test]
    fn cluster_half_edgeless() {
        let g = Graph::new(10, &[]).unwrap();
        let mut inner = |gr: &Graph| greedy_carving(gr, 2);
        let out = cluster_half(&g, 2, &mut inner).unwrap();
        assert_eq!(out.clustering.clustered_count(), 10);
        assert!(verify_separation(&g, &out.clustering, 2).ok);
    }

    #[test]
    fn cluster_half_greedy_random() {
        for seed in [1u64, 9] {
            let g = crate::gen::random_graph(48, 100, seed, None).unwrap();
            let mut inner = |gr: &Graph| greedy_carving(gr, 2);
            let out = cluster_half(&g, 2, &mut inner).unwrap();
            assert!(2 * out.clustering.clustered_count() >= 48);
            assert!(verify_separation(&g, &out.clustering, 2).ok);
        }
    }

    #[test]
    fn decompose_single_node_and_clique() {
        let g = Graph::new(1, &[]).unwrap();
        let d = decompose(&g, DecomposeConfig::default()).unwrap();
        assert_eq!(d.colors(), 1);
        let mut edges = Vec::new();
        for u in 0..4u32 {
            for v in u + 1..4 {
                edges.push((u, v, 1));
            }
        }
        let g = Graph::new(4, &edges).unwrap();
        let d = decompose(&g, DecomposeConfig::default()).unwrap();
        let report = verify_decomposition(&g, &d).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn decompose_random_pipeline() {
        let g = crate::gen::random_graph(64, 160, 5, None).unwrap();
        let d = decompose(&g, DecomposeConfig::default()).unwrap();
        assert!(d.colors() <= 8); // ceil(log2 64) + 1 = 7, +1 slack in budget
        let report = verify_decomposition(&g, &d).unwrap();
        assert!(report.pass, "{report:?}");
        // every node colored exactly once across layers
        let mut seen = vec![0u32; 64];
        for layer in &d.layers {
            for v in 0..64u32 {
                if layer.clustering.is_clustered(v) {
                    seen[v as usize] += 1;
                }
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn decompose_greedy_inner() {
        let g = crate::gen::random_graph(96, 240, 2, None).unwrap();
        let cfg = DecomposeConfig { inner: InnerKind::Greedy, ..Default::default() };
        let d = decompose(&g, cfg).unwrap();
        let report = verify_decomposition(&g, &d).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn render_format() {
        let g = crate::gen::path_graph(3).unwrap();
        let d = decompose(&g, DecomposeConfig::default()).unwrap();
        let text = d.render();
        for (i, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            assert_eq!(fields.len(), 4);
            assert_eq!(fields[0], i.to_string());
        }
    }
}
