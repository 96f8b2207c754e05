//! Delay-based low-degree clustering: computes per-node BFS start delays
//! over R phases of k derandomized sampling iterations each, so that at
//! least half the nodes end up with a small frontier, then extracts the
//! clustering induced by the delays.
//!
//! Each iteration selects a "good set" of active nodes by fixing the seed
//! of a pairwise space with bias ~1/(4k) against the inner-potential
//! objective; the inner and outer potentials are tracked exactly and
//! their monotonicity is asserted at runtime.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::cluster::{Cluster, Clustering};
use crate::error::{Error, Result};
use crate::exact::{exp_tenth_table, pow2, rat_uint, Rat, EXP_FRAC_BITS};
use crate::graph::Graph;
use crate::pairwise::{fix_bits, PairwiseSpace, VarTracker};

/// Algorithm constants. `c_k` scales k = ceil(c_k * log2 log2 n); the
/// paper's constant is 100, the fast profile uses 4 for larger
/// experiments.
#[derive(Debug, Clone, Copy)]
pub struct DelayConfig {
    pub c_k: u64,
}

impl Default for DelayConfig {
    fn default() -> Self {
        DelayConfig { c_k: 100 }
    }
}

impl DelayConfig {
    pub fn fast() -> Self {
        DelayConfig { c_k: 4 }
    }
}

/// floor(2 log2 n), clamped to >= 1.
pub fn phase_count(n: usize) -> u32 {
    if n <= 1 {
        return 1;
    }
    let sq = (n as u128) * (n as u128);
    (127 - sq.leading_zeros()).max(1)
}

/// ceil(c * log2 log2 max(n, 4)), clamped to >= 1. Deterministic: decided
/// by exact integer-power comparisons on a dyadic bracket of log2 n; when
/// the bracket straddles an integer boundary the larger value is taken
/// (a larger k only loosens the frontier budget).
pub fn iteration_count(c: u64, n: usize) -> usize {
    let n = n.max(4) as u64;
    // t = ceil(2^16 * log2 n): smallest t with n^(2^16) <= 2^t
    let shift = 16u32;
    let big = BigInt::from(n).pow(1u32 << shift);
    let mut lo = 1u64;
    let mut hi = 64u64 << shift;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if big <= (BigInt::one() << mid as usize) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let t = lo; // log2 n in ((t-1)/2^16, t/2^16]
    let ceil_c_log2 = |num: u64| -> u64 {
        // smallest k with (num / 2^16)^c <= 2^k
        let base = BigInt::from(num).pow(c as u32);
        let sub = (shift as u64) * c;
        let mut lo = 0u64;
        let mut hi = 128 * c;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if base <= (BigInt::one() << (mid + sub) as usize) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    };
    let k_hi = ceil_c_log2(t);
    (k_hi.max(1)) as usize
}

/// Inner-potential trace row for one (phase, iteration) step.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub component: usize,
    pub phase: u32,
    pub iteration: usize,
    pub phi: Rat,
    pub set_size: usize,
    pub active: usize,
}

#[derive(Debug, Clone)]
pub struct ComponentRun {
    /// sorted original node ids
    pub nodes: Vec<u32>,
    pub r_phases: u32,
    pub k: usize,
    /// nodes with |frontier^{2s}| <= k under the final delays
    pub clustered: usize,
    pub phi_final: Rat,
}

/// Per-node delays plus the per-component parameters and potential trace.
#[derive(Debug, Clone)]
pub struct DelayFunction {
    pub del: Vec<u64>,
    pub s: u64,
    pub components: Vec<ComponentRun>,
    pub trace: Vec<TraceRow>,
    /// total bit-fixing steps performed, for bookkeeping
    pub bit_fixes: u64,
}

impl DelayFunction {
    pub fn clustered_total(&self) -> usize {
        self.components.iter().map(|c| c.clustered).sum()
    }

    pub fn max_k(&self) -> usize {
        self.components.iter().map(|c| c.k).max().unwrap_or(1)
    }

    pub fn max_phases(&self) -> u32 {
        self.components.iter().map(|c| c.r_phases).max().unwrap_or(1)
    }

    /// Strong-diameter bound 2 * 5 s R of the extracted clustering.
    pub fn diameter_bound(&self) -> u64 {
        10 * self.s * self.max_phases() as u64
    }
}

/// Per-node frontier summary with respect to a delay function.
#[derive(Debug, Clone)]
pub struct FrontierInfo {
    pub wait: u64,
    /// minimizer of del(v) + d(v, u), smallest id on ties
    pub center: u32,
    /// up to k members (node, arrival time), dead tokens first, then by
    /// (arrival, id); the full frontier when it has at most k members
    pub members: Vec<(u32, u64)>,
    pub overflow: bool,
    pub size: usize,
}

/// Local frontier data inside one component (local ids), split into the
/// dead/alive selections of the stated sizes; entries carry arrival
/// times del(v) + d(v, u).
struct LocalFrontier {
    wait: u64,
    center: u32,
    dead: Vec<(u32, u64)>,
    alive: Vec<(u32, u64)>,
    size: usize,
}

/// Definitional frontier computation on a (sub)graph: arrival(v, u) =
/// del(v) + hops(v, u); exact for every node.
fn local_frontiers(
    sub: &Graph,
    del: &[u64],
    s: u64,
    k: usize,
    active: &[bool],
) -> Vec<LocalFrontier> {
    let n = sub.node_count();
    let mut arrivals: Vec<Vec<(u64, u32)>> = vec![Vec::new(); n];
    for v in 0..n as u32 {
        let dist = sub.hop_bfs(v);
        for u in 0..n {
            if let Some(d) = dist[u] {
                arrivals[u].push((del[v as usize] + d, v));
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for u in 0..n {
        let arr = &mut arrivals[u];
        arr.sort_unstable();
        let wait = arr[0].0;
        let center = arr.iter().take_while(|&&(a, _)| a == wait).map(|&(_, v)| v).min().unwrap();
        let horizon = wait + 2 * s;
        let frontier: Vec<(u64, u32)> =
            arr.iter().take_while(|&&(a, _)| a <= horizon).copied().collect();
        let size = frontier.len();
        let dead: Vec<(u32, u64)> = frontier
            .iter()
            .filter(|&&(_, v)| !active[v as usize])
            .take(k)
            .map(|&(a, v)| (v, a))
            .collect();
        let alive: Vec<(u32, u64)> = frontier
            .iter()
            .filter(|&&(_, v)| active[v as usize])
            .take(k - dead.len())
            .map(|&(a, v)| (v, a))
            .collect();
        out.push(LocalFrontier { wait, center, dead, alive, size });
    }
    out
}

/// Public frontier summary for the whole graph. `active` marks nodes
/// whose tokens have low (alive) priority; pass None to treat every node
/// as dead (e.g. after the delay computation has finished).
pub fn frontier_info(
    g: &Graph,
    del: &[u64],
    s: u64,
    k: usize,
    active: Option<&[bool]>,
) -> Result<Vec<FrontierInfo>> {
    if del.len() != g.node_count() {
        return Err(Error::validation("delay vector length mismatch"));
    }
    let default_active = vec![false; g.node_count()];
    let active = active.unwrap_or(&default_active);
    let mut out: Vec<Option<FrontierInfo>> = vec![None; g.node_count()];
    for comp in g.components() {
        let (sub, remap) = g.induced_subgraph(&comp)?;
        let local_del: Vec<u64> = comp.iter().map(|&v| del[v as usize]).collect();
        let local_active: Vec<bool> = comp.iter().map(|&v| active[v as usize]).collect();
        let fr = local_frontiers(&sub, &local_del, s, k, &local_active);
        for (lu, f) in fr.into_iter().enumerate() {
            let to_old = |l: u32| remap.to_old(l);
            let members: Vec<(u32, u64)> = f
                .dead
                .iter()
                .chain(f.alive.iter())
                .map(|&(v, a)| (to_old(v), a))
                .collect();
            out[to_old(lu as u32) as usize] = Some(FrontierInfo {
                wait: f.wait,
                center: to_old(f.center),
                members,
                overflow: f.size > k,
                size: f.size,
            });
        }
    }
    Ok(out.into_iter().map(|o| o.expect("all nodes covered by components")).collect())
}

/// Exact rational power helper.
fn rat_pow(base: &Rat, e: u32) -> Rat {
    Rat::new(base.numer().pow(e), base.denom().pow(e))
}

struct PhaseState {
    /// per node: |dead_{i-1}(u)|, |alive_{i-1}(u)|
    dead_size: Vec<usize>,
    alive_size: Vec<usize>,
    /// alive members as universe indices (1-based) into the active list
    alive_univ: Vec<Vec<u32>>,
    /// active nodes (local ids), sorted; universe index = position + 1
    active_nodes: Vec<u32>,
    /// reverse index: universe var v -> nodes u with v in alive(u)
    watchers: Vec<Vec<u32>>,
}

fn build_phase_state(frontiers: &[LocalFrontier], active: &[bool]) -> PhaseState {
    let n = frontiers.len();
    let active_nodes: Vec<u32> =
        (0..n as u32).filter(|&v| active[v as usize]).collect();
    let mut univ_of: Vec<Option<u32>> = vec![None; n];
    for (idx, &v) in active_nodes.iter().enumerate() {
        univ_of[v as usize] = Some(idx as u32 + 1);
    }
    let mut dead_size = Vec::with_capacity(n);
    let mut alive_size = Vec::with_capacity(n);
    let mut alive_univ = Vec::with_capacity(n);
    let mut watchers: Vec<Vec<u32>> = vec![Vec::new(); active_nodes.len() + 1];
    for (u, f) in frontiers.iter().enumerate() {
        dead_size.push(f.dead.len());
        alive_size.push(f.alive.len());
        let univ: Vec<u32> = f
            .alive
            .iter()
            .map(|&(v, _)| univ_of[v as usize].expect("alive member must be active"))
            .collect();
        for &var in &univ {
            watchers[var as usize].push(u as u32);
        }
        alive_univ.push(univ);
    }
    PhaseState { dead_size, alive_size, alive_univ, active_nodes, watchers }
}

/// Inner potential phi_{i,j} = sum_u p_{i,j}(u) e^((dead+alive)/10)
/// + |W| 2^i + ((k-j)/k) 2^(i-1) |active|; returns (node part, total).
#[allow(clippy::too_many_arguments)]
fn inner_potential(
    state: &PhaseState,
    hit: &[bool],
    exp10: &[Rat],
    k: usize,
    i: u32,
    j: usize,
    w_size: usize,
) -> (Rat, Rat) {
    let tenk = rat_uint(10 * k as u64);
    let mut node_sum = Rat::zero();
    for u in 0..state.dead_size.len() {
        if hit[u] {
            continue;
        }
        let a = state.alive_size[u];
        let base = (tenk.clone() - rat_uint(a as u64)) / tenk.clone();
        let p = rat_pow(&base, (k - j) as u32);
        node_sum += p * exp10[state.dead_size[u] + a].clone();
    }
    let total = node_sum.clone()
        + rat_uint(w_size as u64) * pow2(i as i64)
        + rat_uint((k - j) as u64) / rat_uint(k as u64)
            * pow2(i as i64 - 1)
            * rat_uint(state.active_nodes.len() as u64);
    (node_sum, total)
}

/// Outer potential Phi_i = sum_u e^(|dead_i(u)|/10) + 2^i |active_i|.
fn outer_potential(frontiers: &[LocalFrontier], exp10: &[Rat], i: u32, active_count: usize) -> Rat {
    let mut acc = Rat::zero();
    for f in frontiers {
        acc += exp10[f.dead.len()].clone();
    }
    acc + pow2(i as i64) * rat_uint(active_count as u64)
}

/// Selects a good set S_{i,j} among the active nodes by bit fixing, and
/// verifies the good-set inequality exactly.
#[allow(clippy::too_many_arguments)]
fn good_set(
    state: &PhaseState,
    hit: &[bool],
    exp10: &[Rat],
    k: usize,
    i: u32,
    j: usize,
    space: &PairwiseSpace,
    bit_fixes: &mut u64,
) -> Result<Vec<u32>> {
    let n_univ = state.active_nodes.len();
    debug_assert!(n_univ >= 1);
    let two_ell = 2 * space.ell();
    let tenk = BigInt::from(10 * k as u64);
    let grid = BigInt::one() << EXP_FRAC_BITS as usize;

    // contribution scale: D = (10k)^k * 2^EXP_FRAC * 2^(2 ell)
    // A_u = c_u * D / 2^(2 ell) = (10k - a)^(k-j) (10k)^j e_num(d+a)
    let mut konst = BigInt::zero();
    let mut contributors: Vec<(usize, BigInt)> = Vec::new(); // (node, A_u)
    for u in 0..state.dead_size.len() {
        if hit[u] {
            continue;
        }
        let a = state.alive_size[u];
        let e_num = (exp10[state.dead_size[u] + a].clone()
            * Rat::from_integer(grid.clone()))
        .to_integer();
        let a_u = (&tenk - BigInt::from(a as u64)).pow((k - j) as u32)
            * tenk.pow(j as u32)
            * e_num;
        if a == 0 {
            konst += &a_u << two_ell as usize; // Y == 1 constantly
        } else {
            contributors.push((u, a_u));
        }
    }
    // |S| 2^i term: B = 2^i (10k)^k 2^EXP_FRAC
    let b: BigInt = (BigInt::one() << i as usize) * tenk.pow(k as u32) * &grid;

    let mut tracker = VarTracker::new(space);
    let mut scratch: Vec<(u32, u8)> = Vec::new();
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
        let mut acc = konst.clone();
        for (u, a_u) in &contributors {
            let (m1, m2) =
                tracker.set_moments_scaled(&state.alive_univ[*u], beta, &mut scratch);
            let y = (1i128 << two_ell) + m2 as i128 - m1 as i128;
            debug_assert!(y >= 0);
            if y != 0 {
                acc += a_u * BigInt::from(y);
            }
        }
        let mut m1_total: u64 = 0;
        for v in 1..=n_univ as u32 {
            m1_total += tracker.var_m1_scaled(v, beta);
        }
        acc += &b * BigInt::from(m1_total);
        acc
    };
    let seed = fix_bits(space, objective)?;
    *bit_fixes += space.seed_len() as u64;
    let mut selected = Vec::new();
    for v in 1..=n_univ {
        if space.eval_variable(&seed, v)? == 1 {
            selected.push(state.active_nodes[v - 1]);
        }
    }

    // exact good-set inequality check
    let sel_univ: std::collections::BTreeSet<u32> = selected
        .iter()
        .map(|&node| state.active_nodes.binary_search(&node).unwrap() as u32 + 1)
        .collect();
    let tenk_r = rat_uint(10 * k as u64);
    let mut lhs = Rat::zero();
    let mut rhs = Rat::zero();
    for u in 0..state.dead_size.len() {
        if hit[u] {
            continue;
        }
        let a = state.alive_size[u];
        let base = (tenk_r.clone() - rat_uint(a as u64)) / tenk_r.clone();
        let phi_u =
            rat_pow(&base, (k - (j - 1)) as u32) * exp10[state.dead_size[u] + a].clone();
        rhs += phi_u.clone();
        let hits = state.alive_univ[u].iter().filter(|v| sel_univ.contains(v)).count() as i64;
        let y = hits - hits * (hits - 1) / 2;
        let c_u = phi_u / (Rat::one() - rat_uint(a as u64) / tenk_r.clone());
        lhs += Rat::from_integer(BigInt::from(1 - y)) * c_u;
    }
    lhs += rat_uint(selected.len() as u64) * pow2(i as i64);
    rhs += pow2(i as i64 - 1) / rat_uint(k as u64) * rat_uint(n_univ as u64);
    if lhs > rhs {
        return Err(Error::internal(format!(
            "good-set inequality violated at phase {i}, iteration {j}"
        )));
    }
    Ok(selected)
}

/// Runs the full delay computation. Works per connected component with
/// component-local R and k.
pub fn compute_delays(g: &Graph, s: u64, config: DelayConfig) -> Result<DelayFunction> {
    if s < 2 {
        return Err(Error::validation("separation parameter s must be >= 2"));
    }
    let mut del_global = vec![0u64; g.node_count()];
    let mut components = Vec::new();
    let mut trace = Vec::new();
    let mut bit_fixes = 0u64;
    for (comp_idx, comp) in g.components().into_iter().enumerate() {
        let (sub, remap) = g.induced_subgraph(&comp)?;
        let n = sub.node_count();
        let r_phases = phase_count(n);
        let k = iteration_count(config.c_k, n);
        let exp10 = exp_tenth_table(k);
        let del_init = 5 * s * r_phases as u64;

        let mut del = vec![del_init; n];
        let mut active = vec![true; n];
        let mut frontiers = local_frontiers(&sub, &del, s, k, &active);
        let mut phi_outer = outer_potential(&frontiers, &exp10, 0, n);
        if phi_outer != rat_uint(2 * n as u64) {
            return Err(Error::internal("initial outer potential is not 2n".to_string()));
        }

        for i in 1..=r_phases {
            let state = build_phase_state(&frontiers, &active);
            let mut hit = vec![false; n];
            let mut w: Vec<bool> = vec![false; n];
            let mut w_count = 0usize;
            let (_, mut phi_prev) = inner_potential(&state, &hit, &exp10, k, i, 0, 0);
            if phi_prev > phi_outer {
                return Err(Error::internal(format!(
                    "inner potential exceeds outer at phase {i} start"
                )));
            }
            let space = if state.active_nodes.is_empty() {
                None
            } else {
                let q_req = Rat::new(BigInt::one(), BigInt::from(4 * k as u64));
                Some(PairwiseSpace::build(state.active_nodes.len(), &q_req)?)
            };
            for j in 1..=k {
                let selected = match &space {
                    None => Vec::new(),
                    Some(space) => {
                        good_set(&state, &hit, &exp10, k, i, j, space, &mut bit_fixes)?
                    }
                };
                for &node in &selected {
                    if !w[node as usize] {
                        w[node as usize] = true;
                        w_count += 1;
                    }
                    let univ =
                        state.active_nodes.binary_search(&node).unwrap() as u32 + 1;
                    for &u in &state.watchers[univ as usize] {
                        hit[u as usize] = true;
                    }
                }
                let (_, phi) = inner_potential(&state, &hit, &exp10, k, i, j, w_count);
                if phi > phi_prev {
                    return Err(Error::internal(format!(
                        "inner potential increased at phase {i}, iteration {j}"
                    )));
                }
                trace.push(TraceRow {
                    component: comp_idx,
                    phase: i,
                    iteration: j,
                    phi: phi.clone(),
                    set_size: selected.len(),
                    active: state.active_nodes.len(),
                });
                phi_prev = phi;
            }
            for v in 0..n {
                active[v] = w[v];
                if w[v] {
                    del[v] -= 5 * s;
                }
            }
            frontiers = local_frontiers(&sub, &del, s, k, &active);
            let new_outer = outer_potential(&frontiers, &exp10, i, w_count);
            if new_outer > phi_outer.clone() + rat_uint(n as u64) {
                return Err(Error::internal(format!(
                    "outer potential grew by more than n after phase {i}"
                )));
            }
            phi_outer = new_outer;
        }
        let telescoped = rat_uint((2 + r_phases as u64) * n as u64);
        if phi_outer > telescoped {
            return Err(Error::internal("final outer potential exceeds (2+R) n".to_string()));
        }
        let clustered = frontiers.iter().filter(|f| f.size <= k).count();
        if 2 * clustered < n {
            return Err(Error::internal(format!(
                "only {clustered} of {n} nodes have small frontiers"
            )));
        }
        for (local, &old) in remap.new_to_old.iter().enumerate() {
            del_global[old as usize] = del[local];
        }
        components.push(ComponentRun {
            nodes: comp,
            r_phases,
            k,
            clustered,
            phi_final: phi_outer,
        });
    }
    Ok(DelayFunction { del: del_global, s, components, trace, bit_fixes })
}

/// Low-degree clustering extracted from a delay function: every node with
/// |frontier^{2s}| <= k joins the cluster of the minimum-identifier
/// member of its frontier^0.
#[derive(Debug, Clone)]
pub struct LowDegreeClustering {
    pub clustering: Clustering,
    pub s: u64,
    /// claimed s-hop degree bound (max component k)
    pub k_bound: usize,
    /// claimed strong diameter bound 10 s R
    pub diameter_bound: u64,
}

pub fn extract_clustering(g: &Graph, delays: &DelayFunction) -> Result<LowDegreeClustering> {
    let s = delays.s;
    let mut clusters_by_center: std::collections::BTreeMap<u32, Vec<u32>> =
        std::collections::BTreeMap::new();
    for run in &delays.components {
        let (sub, remap) = g.induced_subgraph(&run.nodes)?;
        let local_del: Vec<u64> = run.nodes.iter().map(|&v| del_at(delays, v)).collect();
        let active = vec![false; sub.node_count()];
        let fr = local_frontiers(&sub, &local_del, s, run.k, &active);
        for (lu, f) in fr.iter().enumerate() {
            if f.size <= run.k {
                let center = remap.to_old(f.center);
                clusters_by_center.entry(center).or_default().push(remap.to_old(lu as u32));
            }
        }
    }
    let mut clusters = Vec::new();
    for (center, nodes) in clusters_by_center {
        clusters.push(Cluster::with_bfs_tree(g, center, nodes)?);
    }
    let clustering = Clustering::new(g.node_count(), clusters)?;
    Ok(LowDegreeClustering {
        clustering,
        s,
        k_bound: delays.max_k(),
        diameter_bound: delays.diameter_bound(),
    })
}

fn del_at(delays: &DelayFunction, v: u32) -> u64 {
    delays.del[v as usize]
}
