//! Deterministic input generators. Seeds affect only the generated
//! instances, never the algorithms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::Rat;
use crate::graph::Graph;
use crate::hitting::HittingInstance;

/// Uniform random graph with exactly m distinct edges; optional uniform
/// weights in 1..=wmax.
pub fn random_graph(n: usize, m: usize, seed: u64, wmax: Option<u64>) -> Result<Graph> {
    if n < 1 {
        return Err(Error::validation("random graph needs n >= 1"));
    }
    let max_edges = n * n.saturating_sub(1) / 2;
    if m > max_edges {
        return Err(Error::validation(format!(
            "m = {m} exceeds the {max_edges} possible edges on {n} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();
    while chosen.len() < m {
        let u = rng.gen_range(0..n as u32);
        let v = rng.gen_range(0..n as u32);
        if u != v {
            chosen.insert((u.min(v), u.max(v)));
        }
    }
    let edges: Vec<(u32, u32, u64)> = chosen
        .into_iter()
        .map(|(u, v)| {
            let w = match wmax {
                Some(wm) => rng.gen_range(1..=wm),
                None => 1,
            };
            (u, v, w)
        })
        .collect();
    Graph::new(n, &edges)
}

/// a x b grid graph, nodes row-major.
pub fn grid_graph(a: usize, b: usize) -> Result<Graph> {
    if a < 1 || b < 1 {
        return Err(Error::validation("grid dimensions must be positive"));
    }
    let mut edges = Vec::new();
    let id = |r: usize, c: usize| (r * b + c) as u32;
    for r in 0..a {
        for c in 0..b {
            if c + 1 < b {
                edges.push((id(r, c), id(r, c + 1), 1));
            }
            if r + 1 < a {
                edges.push((id(r, c), id(r + 1, c), 1));
            }
        }
    }
    Graph::new(a * b, &edges)
}

/// Complete-binary-shaped tree: node i > 0 hangs off (i-1)/2.
pub fn tree_graph(n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(Error::validation("tree needs n >= 1"));
    }
    let edges: Vec<(u32, u32, u64)> =
        (1..n as u32).map(|i| ((i - 1) / 2, i, 1)).collect();
    Graph::new(n, &edges)
}

/// Path on n nodes.
pub fn path_graph(n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(Error::validation("path needs n >= 1"));
    }
    let edges: Vec<(u32, u32, u64)> = (1..n as u32).map(|i| (i - 1, i, 1)).collect();
    Graph::new(n, &edges)
}

/// Random hitting-set instance: n_sets sets of sizes 1..=max_size over
/// [n] with weights 0..=19.
pub fn random_hitting_instance(
    seed: u64,
    n: usize,
    n_sets: usize,
    max_size: usize,
    p: Rat,
) -> Result<HittingInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets = Vec::with_capacity(n_sets);
    let mut weights = Vec::with_capacity(n_sets);
    for _ in 0..n_sets {
        let k = rng.gen_range(1..=max_size.min(n));
        let mut s: Vec<u32> = Vec::new();
        while s.len() < k {
            let e = rng.gen_range(1..=n as u32);
            if !s.contains(&e) {
                s.push(e);
            }
        }
        sets.push(s);
        weights.push(rng.gen_range(0..20u64));
    }
    HittingInstance::new(n, sets, weights, p)
}

/// Parses a generator spec: "random n m seed" | "grid a b" | "tree n" |
/// "path n". Weighted variants take wmax from the caller.
pub fn from_spec(spec: &str, wmax: Option<u64>) -> Result<Graph> {
    let fields: Vec<&str> = spec.split_whitespace().collect();
    let num = |i: usize| -> Result<usize> {
        fields
            .get(i)
            .and_then(|f| f.parse::<usize>().ok())
            .ok_or_else(|| Error::validation(format!("bad generator spec {spec:?}")))
    };
    match fields.first().copied() {
        Some("random") if fields.len() == 4 => {
            random_graph(num(1)?, num(2)?, num(3)? as u64, wmax)
        }
        Some("grid") if fields.len() == 3 => grid_graph(num(1)?, num(2)?),
        Some("tree") if fields.len() == 2 => tree_graph(num(1)?),
        Some("path") if fields.len() == 2 => path_graph(num(1)?),
        _ => Err(Error::validation(format!(
            "unknown generator spec {spec:?}; expected random n m seed | grid a b | tree n | path n"
        ))),
    }
}
