//! Immutable undirected graphs and the search primitives everything else
//! builds on: plain/multi-source/delayed BFS, Dijkstra, induced subgraphs
//! and strong diameters.

use std::collections::BinaryHeap;
use std::cmp::Reverse;
use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub const DEFAULT_VERIFY_CAP: usize = 2048;

/// Undirected graph with positive integer edge weights (1 = unweighted).
/// Adjacency is symmetric and sorted; duplicate edges collapse to the
/// minimum weight at construction.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<(u32, u64)>>,
}

/// Per-node distance; `None` means unreached.
pub type DistanceMap = Vec<Option<u64>>;

impl Graph {
    pub fn new(n: usize, edges: &[(u32, u32, u64)]) -> Result<Graph> {
        let mut best: BTreeMap<(u32, u32), u64> = BTreeMap::new();
        for &(u, v, w) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::validation(format!(
                    "edge ({u},{v}) out of range for n={n}"
                )));
            }
            if u == v {
                return Err(Error::validation(format!("self-loop at node {u}")));
            }
            if w < 1 {
                return Err(Error::validation(format!("edge ({u},{v}) has weight 0")));
            }
            let key = (u.min(v), u.max(v));
            let e = best.entry(key).or_insert(w);
            if w < *e {
                *e = w;
            }
        }
        let mut adj = vec![Vec::new(); n];
        for (&(u, v), &w) in &best {
            adj[u as usize].push((v, w));
            adj[v as usize].push((u, w));
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        Ok(Graph { n, adj })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, u: u32) -> &[(u32, u64)] {
        &self.adj[u as usize]
    }

    pub fn edges(&self) -> Vec<(u32, u32, u64)> {
        let mut out = Vec::new();
        for u in 0..self.n as u32 {
            for &(v, w) in &self.adj[u as usize] {
                if u < v {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    pub fn is_unweighted(&self) -> bool {
        self.adj.iter().all(|l| l.iter().all(|&(_, w)| w == 1))
    }

    /// Parses the edge-list text format: header "n m", then m lines
    /// "u v" or "u v w"; '#'-prefixed lines are comments.
    pub fn parse(text: &str) -> Result<Graph> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges: Vec<(u32, u32, u64)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if header.is_none() {
                if fields.len() != 2 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "expected header \"n m\"".into(),
                    });
                }
                let n = parse_num(fields[0], lineno)? as usize;
                let m = parse_num(fields[1], lineno)? as usize;
                header = Some((n, m));
                continue;
            }
            let (n, _) = header.unwrap();
            if fields.len() != 2 && fields.len() != 3 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected \"u v\" or \"u v w\", got {} fields", fields.len()),
                });
            }
            let u = parse_num(fields[0], lineno)?;
            let v = parse_num(fields[1], lineno)?;
            let w = if fields.len() == 3 { parse_num(fields[2], lineno)? } else { 1 };
            if u as usize >= n || v as usize >= n {
                return Err(Error::validation(format!(
                    "line {lineno}: node id out of range (n={n})"
                )));
            }
            if u == v {
                return Err(Error::validation(format!("line {lineno}: self-loop at {u}")));
            }
            if w < 1 {
                return Err(Error::validation(format!("line {lineno}: weight must be >= 1")));
            }
            edges.push((u as u32, v as u32, w));
        }
        let (n, m) = header.ok_or(Error::Parse { line: 0, msg: "empty document".into() })?;
        if edges.len() != m {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header declared m={m} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, &edges)
    }

    /// Renders the edge-list text format; inverse of `parse` up to
    /// duplicate collapsing.
    pub fn render(&self) -> String {
        let edges = self.edges();
        let mut out = format!("{} {}\n", self.n, edges.len());
        let unweighted = self.is_unweighted();
        for (u, v, w) in edges {
            if unweighted {
                out.push_str(&format!("{u} {v}\n"));
            } else {
                out.push_str(&format!("{u} {v} {w}\n"));
            }
        }
        out
    }

    /// Hop-distance BFS from multiple sources with per-source start
    /// offsets; ignores edge weights. min over sources of offset + hops.
    pub fn hop_bfs_offsets(&self, sources: &[(u32, u64)]) -> DistanceMap {
        // offsets act like delays: bucket queue over time steps
        let mut dist: Vec<Option<u64>> = vec![None; self.n];
        if sources.is_empty() {
            return dist;
        }
        let max_off = sources.iter().map(|&(_, o)| o).max().unwrap();
        let horizon = max_off as usize + self.n + 1;
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); horizon];
        for &(s, off) in sources {
            buckets[off as usize].push(s);
        }
        for t in 0..horizon {
            let frontier = std::mem::take(&mut buckets[t]);
            for u in frontier {
                if dist[u as usize].is_some() {
                    continue;
                }
                dist[u as usize] = Some(t as u64);
                for &(v, _) in self.neighbors(u) {
                    if dist[v as usize].is_none() && t + 1 < horizon {
                        buckets[t + 1].push(v);
                    }
                }
            }
        }
        dist
    }

    /// Multi-source BFS with offsets on an unweighted graph.
    pub fn multi_source_bfs(&self, sources: &[(u32, u64)]) -> Result<DistanceMap> {
        if !self.is_unweighted() {
            return Err(Error::validation(
                "multi_source_bfs requires unit edge weights",
            ));
        }
        for &(s, _) in sources {
            if s as usize >= self.n {
                return Err(Error::validation(format!("source {s} out of range")));
            }
        }
        Ok(self.hop_bfs_offsets(sources))
    }

    /// Single-source hop BFS (weights ignored).
    pub fn hop_bfs(&self, source: u32) -> DistanceMap {
        self.hop_bfs_offsets(&[(source, 0)])
    }

    /// Weighted single-source shortest paths.
    pub fn dijkstra(&self, source: u32) -> DistanceMap {
        let mut dist: Vec<Option<u64>> = vec![None; self.n];
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u64, source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if let Some(old) = dist[u as usize] {
                if old <= d {
                    continue;
                }
            }
            dist[u as usize] = Some(d);
            for &(v, w) in self.neighbors(u) {
                let nd = d + w;
                if dist[v as usize].map_or(true, |old| nd < old) {
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        dist
    }

    /// Exact weighted all-pairs distances, refused above the node cap.
    pub fn all_pairs_distances(&self, cap: usize) -> Result<Vec<DistanceMap>> {
        if self.n > cap {
            return Err(Error::Refused(format!(
                "all-pairs distances on n={} exceeds cap {cap}; lower n or raise the cap",
                self.n
            )));
        }
        Ok((0..self.n as u32).map(|s| self.dijkstra(s)).collect())
    }

    /// Induced subgraph on `keep` plus the id remap table
    /// (new -> old, and old -> new for kept nodes).
    pub fn induced_subgraph(&self, keep: &[u32]) -> Result<(Graph, Remap)> {
        let mut sorted: Vec<u32> = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&last) = sorted.last() {
            if last as usize >= self.n {
                return Err(Error::validation(format!("keep node {last} out of range")));
            }
        }
        let mut old_to_new: Vec<Option<u32>> = vec![None; self.n];
        for (new, &old) in sorted.iter().enumerate() {
            old_to_new[old as usize] = Some(new as u32);
        }
        let mut edges = Vec::new();
        for &old_u in &sorted {
            let nu = old_to_new[old_u as usize].unwrap();
            for &(old_v, w) in self.neighbors(old_u) {
                if old_u < old_v {
                    if let Some(nv) = old_to_new[old_v as usize] {
                        edges.push((nu, nv, w));
                    }
                }
            }
        }
        let g = Graph::new(sorted.len(), &edges)?;
        Ok((g, Remap { new_to_old: sorted, old_to_new }))
    }

    /// Exact strong diameter of G[cluster] in hops; `None` when the
    /// induced subgraph is disconnected.
    pub fn component_strong_diameter(&self, cluster: &[u32]) -> Result<Option<u64>> {
        if cluster.is_empty() {
            return Err(Error::validation("strong diameter of an empty cluster"));
        }
        let (sub, _) = self.induced_subgraph(cluster)?;
        let mut best = 0u64;
        for s in 0..sub.node_count() as u32 {
            let dist = sub.hop_bfs(s);
            for d in &dist {
                match d {
                    None => return Ok(None),
                    Some(v) => best = best.max(*v),
                }
            }
        }
        Ok(Some(best))
    }

    /// Connected components as sorted node lists, ordered by minimum node.
    pub fn components(&self) -> Vec<Vec<u32>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n as u32 {
            if seen[s as usize] {
                continue;
            }
            let mut comp = vec![s];
            seen[s as usize] = true;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in self.neighbors(u) {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Bijection between kept original ids and compact subgraph ids.
#[derive(Debug, Clone)]
pub struct Remap {
    pub new_to_old: Vec<u32>,
    pub old_to_new: Vec<Option<u32>>,
}

impl Remap {
    pub fn to_old(&self, new: u32) -> u32 {
        self.new_to_old[new as usize]
    }

    pub fn to_new(&self, old: u32) -> Option<u32> {
        self.old_to_new[old as usize]
    }
}

fn parse_num(s: &str, line: usize) -> Result<u64> {
    s.parse::<u64>().map_err(|_| Error::Parse {
        line,
        msg: format!("expected a nonnegative integer, got {s:?}"),
    })
}

/// Reads the verification cap from the environment, falling back to the
/// default. Set DECOMP_VERIFY_CAP to raise or lower it.
pub fn verify_cap() -> usize {
    std::env::var("DECOMP_VERIFY_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_VERIFY_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::parse("3 2\n0 1\n1 2\n").unwrap()
    }

    #[test]
    fn parse_path() {
        let g = path3();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[(0, 1), (2, 1)]);
    }

    #[test]
    fn parse_rejects_self_loop() {
        let err = Graph::parse("2 1\n0 0\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn duplicate_edges_keep_min_weight() {
        let g = Graph::parse("2 2\n0 1 5\n1 0 3\n").unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbors(0), &[(1, 3)]);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = Graph::parse("2 1\n# comment\n0 x\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bfs_single_source() {
        let g = path3();
        let d = g.multi_source_bfs(&[(0, 0)]).unwrap();
        assert_eq!(d, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn bfs_offsets_take_min_over_sources() {
        let g = path3();
        let d = g.multi_source_bfs(&[(0, 2), (2, 0)]).unwrap();
        assert_eq!(d, vec![Some(2), Some(1), Some(0)]);
    }

    #[test]
    fn bfs_all_zero_offsets_everywhere() {
        let g = path3();
        let sources: Vec<(u32, u64)> = (0..3).map(|v| (v, 0)).collect();
        let d = g.multi_source_bfs(&sources).unwrap();
        assert!(d.iter().all(|&x| x == Some(0)));
    }

    #[test]
    fn bfs_empty_sources_unreached() {
        let g = path3();
        let d = g.multi_source_bfs(&[]).unwrap();
        assert!(d.iter().all(|x| x.is_none()));
    }

    #[test]
    fn induced_triangle_edge() {
        let g = Graph::parse("3 3\n0 1\n1 2\n0 2\n").unwrap();
        let (sub, remap) = g.induced_subgraph(&[0, 1]).unwrap();
        assert_eq!(sub.node_count(), 2);
        assert_eq!(sub.edge_count(), 1);
        assert_eq!(remap.to_old(0), 0);
        assert_eq!(remap.to_new(2), None);
    }

    #[test]
    fn induced_identity() {
        let g = path3();
        let keep: Vec<u32> = (0..3).collect();
        let (sub, remap) = g.induced_subgraph(&keep).unwrap();
        assert_eq!(sub.edges(), g.edges());
        assert!((0..3).all(|v| remap.to_new(v) == Some(v)));
    }

    #[test]
    fn induced_five_cycle_alternate() {
        // restricting the 5-cycle 0-1-2-3-4-0 to {0,2,4} keeps edge {4,0}
        let g = Graph::parse("5 5\n0 1\n1 2\n2 3\n3 4\n4 0\n").unwrap();
        let (sub, remap) = g.induced_subgraph(&[0, 2, 4]).unwrap();
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edge_count(), 1);
        let (u, v, _) = sub.edges()[0];
        let pair = (remap.to_old(u).min(remap.to_old(v)), remap.to_old(u).max(remap.to_old(v)));
        assert_eq!(pair, (0, 4));
    }

    #[test]
    fn strong_diameter_cases() {
        let g = path3();
        assert_eq!(g.component_strong_diameter(&[0, 1, 2]).unwrap(), Some(2));
        assert_eq!(g.component_strong_diameter(&[0, 2]).unwrap(), None);
        let c4 = Graph::parse("4 4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
        assert_eq!(c4.component_strong_diameter(&[0, 1, 2, 3]).unwrap(), Some(2));
        assert!(g.component_strong_diameter(&[]).is_err());
    }

    #[test]
    fn weighted_distances() {
        let g = Graph::parse("2 1\n0 1 7\n").unwrap();
        let d = g.all_pairs_distances(16).unwrap();
        assert_eq!(d[0][1], Some(7));
        let g = Graph::parse("3 2\n0 1 2\n1 2 3\n").unwrap();
        let d = g.all_pairs_distances(16).unwrap();
        assert_eq!(d[0][2], Some(5));
    }

    #[test]
    fn all_pairs_cap_refusal() {
        let g = path3();
        assert!(matches!(g.all_pairs_distances(2), Err(Error::Refused(_))));
    }

    #[test]
    fn weak_diameter_lower_bounds_strong() {
        // 4-cycle with chord removed from cluster: weak < strong possible
        let g = Graph::parse("4 4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
        let cluster = [0u32, 1, 2];
        let strong = g.component_strong_diameter(&cluster).unwrap().unwrap();
        let mut weak = 0;
        for &u in &cluster {
            let d = g.hop_bfs(u);
            for &v in &cluster {
                weak = weak.max(d[v as usize].unwrap());
            }
        }
        assert!(strong >= weak);
    }
}
