//! Weighted hitting sets via iterative pairwise sampling and greedy bit
//! fixing.
//!
//! An instance is a family of sets over the universe [n] with integer
//! weights and a sampling parameter p. The solver runs T = ceil(8 p Delta)
//! iterations; each iteration derandomizes one pairwise-independent
//! sampling round by fixing the seed bits of the sample space against the
//! pessimistic-estimator objective f^t, so the certificate values
//! f^1 >= f^2 >= ... are exact rationals. The sampling bias is rounded up
//! to a power of two, which costs at most a factor two in the potential.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{fixed_exp, pow2, rat_uint, Rat, EXP_FRAC_BITS};
use crate::pairwise::{fix_bits, PairwiseSpace, VarTracker};

/// Which logarithm the coverage threshold 10 log(N) / p uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

/// Hitting-set instance: sets over the universe 1..=n with nonnegative
/// integer weights and sampling parameter p in (0, 1/2].
#[derive(Debug, Clone)]
pub struct HittingInstance {
    n: usize,
    sets: Vec<Vec<u32>>,
    weights: Vec<u64>,
    p: Rat,
}

/// Ordered instance: per-set element order pi_i; hitting at position k
/// costs k-1, missing costs |S_i|.
#[derive(Debug, Clone)]
pub struct OrderedInstance {
    n: usize,
    sets: Vec<Vec<u32>>,
    p: Rat,
}

/// Eq.-style potential value; infinite when unhit positive weight remains
/// but tau is zero (impossible for positive weights).
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Finite(Rat),
    Infinite,
}

impl Potential {
    pub fn at_most(&self, bound: u64) -> bool {
        match self {
            Potential::Finite(v) => v <= &rat_uint(bound),
            Potential::Infinite => false,
        }
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Potential::Finite(v) => Some(v),
            Potential::Infinite => None,
        }
    }
}

impl std::fmt::Display for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Potential::Finite(v) => write!(f, "{}", crate::exact::decimal(v, 6)),
            Potential::Infinite => write!(f, "inf"),
        }
    }
}

impl HittingInstance {
    pub fn new(n: usize, sets: Vec<Vec<u32>>, weights: Vec<u64>, p: Rat) -> Result<Self> {
        if sets.len() != weights.len() {
            return Err(Error::validation("one weight per set required"));
        }
        if !(p > Rat::zero() && p <= Rat::new(1.into(), 2.into())) {
            return Err(Error::validation(format!("p = {p} outside (0, 1/2]")));
        }
        let mut canon = Vec::with_capacity(sets.len());
        for (idx, s) in sets.into_iter().enumerate() {
            let mut s = s;
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(Error::validation(format!("set {idx} is empty")));
            }
            if s[0] < 1 || *s.last().unwrap() as usize > n {
                return Err(Error::validation(format!(
                    "set {idx} has elements outside 1..={n}"
                )));
            }
            canon.push(s);
        }
        Ok(HittingInstance { n, sets: canon, weights, p })
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[Vec<u32>] {
        &self.sets
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn p(&self) -> &Rat {
        &self.p
    }

    /// Number of sets including the zero-weight dummy padding up to n.
    pub fn n_padded(&self) -> usize {
        self.sets.len().max(self.n)
    }

    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    /// tau = sum of w_i e^(-|S_i| p), with e^x evaluated once per exponent
    /// on the fixed dyadic grid.
    pub fn tau(&self) -> Rat {
        tau_at(&self.sets, &self.weights, &self.p)
    }

    /// Potential of Eq.-(1) form: unhit weight / tau + |H| / (n p).
    pub fn potential(&self, h: &[u32]) -> Potential {
        let hset: BTreeSet<u32> = h.iter().copied().collect();
        let mut unhit = BigInt::zero();
        for (s, &w) in self.sets.iter().zip(&self.weights) {
            if w > 0 && !s.iter().any(|e| hset.contains(e)) {
                unhit += BigInt::from(w);
            }
        }
        let tau = self.tau();
        let size_term = if self.n == 0 {
            Rat::zero()
        } else {
            rat_uint(hset.len() as u64) / (rat_uint(self.n as u64) * self.p.clone())
        };
        if tau.is_zero() {
            if unhit.is_zero() {
                return Potential::Finite(size_term);
            }
            return Potential::Infinite;
        }
        Potential::Finite(Rat::from_integer(unhit) / tau + size_term)
    }

    /// Parses "n N p_num p_den" followed by N lines "w k e_1 .. e_k"
    /// (1-based elements).
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = numbered_lines(text);
        let (lineno, header) = lines
            .next()
            .ok_or(Error::Parse { line: 0, msg: "empty document".into() })?;
        let h: Vec<u64> = parse_fields(&header, lineno)?;
        if h.len() != 4 {
            return Err(Error::Parse { line: lineno, msg: "expected \"n N p_num p_den\"".into() });
        }
        let (n, n_sets, p_num, p_den) = (h[0] as usize, h[1] as usize, h[2], h[3]);
        if p_den == 0 {
            return Err(Error::Parse { line: lineno, msg: "p denominator is zero".into() });
        }
        let p = Rat::new(BigInt::from(p_num), BigInt::from(p_den));
        let mut sets = Vec::with_capacity(n_sets);
        let mut weights = Vec::with_capacity(n_sets);
        for _ in 0..n_sets {
            let (lineno, line) = lines
                .next()
                .ok_or(Error::Parse { line: 0, msg: "fewer set lines than declared".into() })?;
            let f: Vec<u64> = parse_fields(&line, lineno)?;
            if f.len() < 2 || f.len() != 2 + f[1] as usize {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "expected \"w k e_1 .. e_k\"".into(),
                });
            }
            weights.push(f[0]);
            sets.push(f[2..].iter().map(|&e| e as u32).collect());
        }
        if lines.next().is_some() {
            return Err(Error::Parse { line: 0, msg: "more set lines than declared".into() });
        }
        HittingInstance::new(n, sets, weights, p)
    }
}

fn tau_at(sets: &[Vec<u32>], weights: &[u64], p: &Rat) -> Rat {
    let mut by_size: std::collections::BTreeMap<usize, u128> = std::collections::BTreeMap::new();
    for (s, &w) in sets.iter().zip(weights) {
        *by_size.entry(s.len()).or_insert(0) += w as u128;
    }
    let mut acc = Rat::zero();
    for (size, wsum) in by_size {
        if wsum == 0 {
            continue;
        }
        let e = fixed_exp(&(-(rat_uint(size as u64) * p)));
        acc += Rat::from_integer(BigInt::from(wsum)) * e;
    }
    acc
}

impl OrderedInstance {
    pub fn new(n: usize, sets: Vec<Vec<u32>>, p: Rat) -> Result<Self> {
        if !(p > Rat::zero() && p <= Rat::new(1.into(), 2.into())) {
            return Err(Error::validation(format!("p = {p} outside (0, 1/2]")));
        }
        for (idx, s) in sets.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::validation(format!("ordered set {idx} is empty")));
            }
            let mut seen = BTreeSet::new();
            for &e in s {
                if e < 1 || e as usize > n {
                    return Err(Error::validation(format!(
                        "ordered set {idx} has elements outside 1..={n}"
                    )));
                }
                if !seen.insert(e) {
                    return Err(Error::validation(format!(
                        "ordered set {idx} repeats element {e}"
                    )));
                }
            }
        }
        Ok(OrderedInstance { n, sets, p })
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[Vec<u32>] {
        &self.sets
    }

    pub fn p(&self) -> &Rat {
        &self.p
    }

    /// Parses "n N p_num p_den" followed by N lines "k e_1 .. e_k" with
    /// elements listed in pi order.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = numbered_lines(text);
        let (lineno, header) = lines
            .next()
            .ok_or(Error::Parse { line: 0, msg: "empty document".into() })?;
        let h: Vec<u64> = parse_fields(&header, lineno)?;
        if h.len() != 4 {
            return Err(Error::Parse { line: lineno, msg: "expected \"n N p_num p_den\"".into() });
        }
        let (n, n_sets, p_num, p_den) = (h[0] as usize, h[1] as usize, h[2], h[3]);
        if p_den == 0 {
            return Err(Error::Parse { line: lineno, msg: "p denominator is zero".into() });
        }
        let p = Rat::new(BigInt::from(p_num), BigInt::from(p_den));
        let mut sets = Vec::with_capacity(n_sets);
        for _ in 0..n_sets {
            let (lineno, line) = lines
                .next()
                .ok_or(Error::Parse { line: 0, msg: "fewer set lines than declared".into() })?;
            let f: Vec<u64> = parse_fields(&line, lineno)?;
            if f.len() < 2 || f.len() != 1 + f[0] as usize {
                return Err(Error::Parse { line: lineno, msg: "expected \"k e_1 .. e_k\"".into() });
            }
            sets.push(f[1..].iter().map(|&e| e as u32).collect());
        }
        OrderedInstance::new(n, sets, p)
    }

    /// Cost of H: for each set, (first hit position - 1), or |S_i| when
    /// unhit.
    pub fn cost(&self, h: &[u32]) -> u128 {
        let hset: BTreeSet<u32> = h.iter().copied().collect();
        let mut total: u128 = 0;
        for s in &self.sets {
            match s.iter().position(|e| hset.contains(e)) {
                Some(pos) => total += pos as u128,
                None => total += s.len() as u128,
            }
        }
        total
    }

    /// Reduction to a plain weighted instance: per set, prefixes of sizes
    /// 1, 2, 4, .., 2^l plus the full set, each weighted by its size.
    /// For every H the costs satisfy c1 <= c2 <= 3 c1.
    pub fn reduce(&self) -> (HittingInstance, ReductionMap) {
        let mut sets = Vec::new();
        let mut weights = Vec::new();
        let mut source = Vec::new();
        for (idx, s) in self.sets.iter().enumerate() {
            let mut size = 1usize;
            while size < s.len() {
                sets.push(s[..size].to_vec());
                weights.push(size as u64);
                source.push(idx);
                size *= 2;
            }
            sets.push(s.clone());
            weights.push(s.len() as u64);
            source.push(idx);
        }
        let inst = HittingInstance::new(self.n, sets, weights, self.p.clone())
            .expect("reduction of a valid ordered instance is valid");
        (inst, ReductionMap { source })
    }
}

/// Maps reduced-set indices back to the ordered set they came from.
#[derive(Debug, Clone)]
pub struct ReductionMap {
    pub source: Vec<usize>,
}

/// Pessimistic estimator Y = a - C(a, 2) for a hit elements; 1 - Y bounds
/// the unhit indicator from above.
pub fn pessimistic_y(hits: u64) -> i64 {
    let a = hits as i64;
    a - a * (a - 1) / 2
}

/// Y for a concrete set and binary assignment.
pub fn pessimistic_y_of(set: &[u32], assignment: &BTreeSet<u32>) -> i64 {
    pessimistic_y(set.iter().filter(|e| assignment.contains(e)).count() as u64)
}

/// One sampling iteration: owns the sample space, the alive-set list and
/// the exact per-set coefficients of f^t.
pub struct Iteration<'a> {
    instance: &'a HittingInstance,
    pub t: usize,
    pub t_total: usize,
    pub space: PairwiseSpace,
    /// indices of sets with positive weight not hit before iteration t
    pub alive: Vec<usize>,
    h_prev: usize,
    /// effective per-iteration parameter p' = q' T / 4
    p_eff: Rat,
    /// tau at p' as an unreduced fraction tau_num / 2^EXP_FRAC_BITS
    tau_num: BigInt,
    /// per alive set: w_i * e^(-|S_i| (T-t) p'/T) numerator on the grid
    coeff_num: Vec<BigInt>,
}

impl<'a> Iteration<'a> {
    pub fn new(
        instance: &'a HittingInstance,
        t: usize,
        t_total: usize,
        space: PairwiseSpace,
        prior: &BTreeSet<u32>,
        h_prev: usize,
    ) -> Iteration<'a> {
        let q = space.bias();
        let p_eff = q.clone() * rat_uint(t_total as u64) / rat_uint(4);
        let alive: Vec<usize> = instance
            .sets
            .iter()
            .enumerate()
            .filter(|(i, s)| instance.weights[*i] > 0 && !s.iter().any(|e| prior.contains(e)))
            .map(|(i, _)| i)
            .collect();
        // tau at p', kept as an explicit numerator over the exp grid
        let grid = pow2(EXP_FRAC_BITS as i64);
        let mut tau_num = BigInt::zero();
        let mut exp_cache: std::collections::BTreeMap<(usize, usize), BigInt> =
            std::collections::BTreeMap::new();
        let mut grid_num = |size: usize, steps: usize| -> BigInt {
            exp_cache
                .entry((size, steps))
                .or_insert_with(|| {
                    let x = -(rat_uint(size as u64) * rat_uint(steps as u64) * p_eff.clone()
                        / rat_uint(t_total as u64));
                    let v = fixed_exp(&x) * grid.clone();
                    debug_assert!(v.is_integer());
                    v.to_integer()
                })
                .clone()
        };
        for (s, &w) in instance.sets.iter().zip(&instance.weights) {
            if w > 0 {
                tau_num += BigInt::from(w) * grid_num(s.len(), t_total);
            }
        }
        let coeff_num: Vec<BigInt> = alive
            .iter()
            .map(|&i| {
                BigInt::from(instance.weights[i]) * grid_num(instance.sets[i].len(), t_total - t)
            })
            .collect();
        Iteration { instance, t, t_total, space, alive, h_prev, p_eff, tau_num, coeff_num }
    }

    pub fn effective_p(&self) -> &Rat {
        &self.p_eff
    }

    fn tau_eff(&self) -> Rat {
        Rat::new(self.tau_num.clone(), BigInt::one() << EXP_FRAC_BITS as usize)
    }

    /// Deterministic f^t of a concrete selection G (given as the set of
    /// selected elements).
    pub fn f_of_selection(&self, g: &BTreeSet<u32>) -> Rat {
        let n = self.instance.n;
        let grid = pow2(EXP_FRAC_BITS as i64);
        let mut cost = Rat::zero();
        for (k, &i) in self.alive.iter().enumerate() {
            let y = pessimistic_y_of(&self.instance.sets[i], g);
            let coeff = Rat::from_integer(self.coeff_num[k].clone()) / grid.clone();
            cost += coeff * (Rat::one() - Rat::from_integer(BigInt::from(y)));
        }
        let tau = self.tau_eff();
        let cost_term = if tau.is_zero() { Rat::zero() } else { cost / tau };
        let budget = rat_uint(n as u64)
            * rat_uint((self.t_total - self.t) as u64)
            * self.space.bias();
        let size = rat_uint(g.len() as u64) + rat_uint(self.h_prev as u64) + budget;
        let denom = rat_uint(4) * rat_uint(n as u64) * self.p_eff.clone();
        cost_term + size / denom
    }

    /// Exact E[f^t | prefix] via the conditional-moment queries. Slow
    /// path, exercised by tests and the brute-force oracle.
    pub fn f_conditional(&self, prefix: &[u8]) -> Result<Rat> {
        let n = self.instance.n;
        let grid = pow2(EXP_FRAC_BITS as i64);
        let tau = self.tau_eff();
        let mut cost = Rat::zero();
        for (k, &i) in self.alive.iter().enumerate() {
            let set = &self.instance.sets[i];
            let terms: Vec<(usize, Rat)> =
                set.iter().map(|&e| (e as usize, Rat::one())).collect();
            let idx: Vec<usize> = set.iter().map(|&e| e as usize).collect();
            let m1 = self.space.cond_first_moment(prefix, &terms)?;
            let m2 = self.space.cond_second_moment(prefix, &idx, &Rat::one())?;
            let coeff = Rat::from_integer(self.coeff_num[k].clone()) / grid.clone();
            cost += coeff * (Rat::one() - m1 + m2);
        }
        let cost_term = if tau.is_zero() { Rat::zero() } else { cost / tau };
        let all: Vec<(usize, Rat)> = (1..=n).map(|i| (i, Rat::one())).collect();
        let m1_total = self.space.cond_first_moment(prefix, &all)?;
        let budget = rat_uint(n as u64)
            * rat_uint((self.t_total - self.t) as u64)
            * self.space.bias();
        let size = m1_total + rat_uint(self.h_prev as u64) + budget;
        let denom = rat_uint(4) * rat_uint(n as u64) * self.p_eff.clone();
        Ok(cost_term + size / denom)
    }

    /// Runs the bit fixing for this iteration and returns the selected
    /// elements H^t. The objective is the scaled integer numerator of
    /// E[f^t | prefix] over the fixed common denominator
    /// tau_num * n * T * 2^(2 ell).
    pub fn fix(&self) -> Result<Vec<u32>> {
        let n = self.instance.n;
        let ell = self.space.ell();
        let two_ell = 2 * ell;
        // A_i = w_i c_num_i * n * T ; B = tau_num * 2^ell ;
        // const = tau_num * 2^(2 ell) * (h_prev * 2^ell + n (T - t))
        let nt = BigInt::from(n as u64) * BigInt::from(self.t_total as u64);
        let a: Vec<BigInt> = self.coeff_num.iter().map(|c| c * &nt).collect();
        let b = &self.tau_num << ell as usize;
        let konst: BigInt = (&self.tau_num << two_ell as usize)
            * ((BigInt::from(self.h_prev as u64) << ell as usize)
                + BigInt::from((n * (self.t_total - self.t)) as u64));

        let mut tracker = VarTracker::new(&self.space);
        let mut scratch: Vec<(u32, u8)> = Vec::new();
        let members: Vec<&[u32]> =
            self.alive.iter().map(|&i| self.instance.sets[i].as_slice()).collect();

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
            for (k, set) in members.iter().enumerate() {
                let (m1, m2) = tracker.set_moments_scaled(set, beta, &mut scratch);
                let y = (1i128 << two_ell) + m2 as i128 - m1 as i128;
                debug_assert!(y >= 0);
                if y != 0 {
                    acc += &a[k] * BigInt::from(y);
                }
            }
            let mut m1_total: u64 = 0;
            for v in 1..=n as u32 {
                m1_total += tracker.var_m1_scaled(v, beta);
            }
            acc += &b * BigInt::from(m1_total);
            acc
        };
        let seed = fix_bits(&self.space, objective)?;
        let mut h = Vec::new();
        for v in 1..=n {
            if self.space.eval_variable(&seed, v)? == 1 {
                h.push(v as u32);
            }
        }
        Ok(h)
    }
}

/// Per-solve certificate: exact f^t(H^t) values and the final potential.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub t_total: usize,
    pub iterations_run: usize,
    pub bias: Rat,
    pub effective_p: Rat,
    pub f_values: Vec<Rat>,
    pub h_sizes: Vec<usize>,
    pub bit_fixes: u64,
    pub potential: Potential,
    /// elements force-added to guarantee coverage (degenerate corners)
    pub forced: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub h: Vec<u32>,
    pub certificate: Certificate,
}

/// Finds H with potential <= 4 by T = ceil(8 p Delta) derandomized
/// sampling iterations. The per-iteration certificate f^t(H^t) is
/// non-increasing, exactly.
pub fn solve(instance: &HittingInstance) -> Result<SolveOutcome> {
    let n = instance.n;
    let p = instance.p.clone();
    let delta = instance.max_set_size();
    let t_total = {
        let t = (rat_uint(8) * p.clone() * rat_uint(delta as u64)).ceil().to_integer();
        let t: u64 = (&t).try_into().unwrap_or(1);
        t.max(1) as usize
    };
    let q_req = {
        let q = rat_uint(4) * p.clone() / rat_uint(t_total as u64);
        let half = Rat::new(1.into(), 2.into());
        if q > half {
            half
        } else {
            q
        }
    };
    let space_template = PairwiseSpace::build(n.max(1), &q_req)?;
    let bias = space_template.bias();
    let p_eff = bias.clone() * rat_uint(t_total as u64) / rat_uint(4);

    let mut h_all: BTreeSet<u32> = BTreeSet::new();
    let mut f_values: Vec<Rat> = Vec::new();
    let mut h_sizes = Vec::new();
    let mut bit_fixes = 0u64;
    let mut iterations_run = 0usize;
    for t in 1..=t_total {
        let iter =
            Iteration::new(instance, t, t_total, space_template.clone(), &h_all, h_all.len());
        if iter.alive.is_empty() {
            break; // remaining iterations would select nothing
        }
        let h_t = iter.fix()?;
        bit_fixes += iter.space.seed_len() as u64;
        iterations_run += 1;
        let g: BTreeSet<u32> = h_t.iter().copied().collect();
        let f_t = iter.f_of_selection(&g);
        if t == 1 && f_t > rat_uint(2) {
            return Err(Error::internal(format!(
                "first-iteration certificate f^1 = {} exceeds 2",
                crate::exact::decimal(&f_t, 6)
            )));
        }
        if let Some(prev) = f_values.last() {
            if &f_t > prev {
                return Err(Error::internal(format!(
                    "certificate increased at iteration {t}: {} > {}",
                    crate::exact::decimal(&f_t, 6),
                    crate::exact::decimal(prev, 6)
                )));
            }
        }
        f_values.push(f_t);
        h_sizes.push(h_t.len());
        h_all.extend(h_t);
    }
    let h: Vec<u32> = h_all.iter().copied().collect();
    let potential = instance.potential(&h);
    if !potential.at_most(4) {
        return Err(Error::internal(format!(
            "final potential {potential} exceeds 4"
        )));
    }
    Ok(SolveOutcome {
        h,
        certificate: Certificate {
            t_total,
            iterations_run,
            bias,
            effective_p: p_eff,
            f_values,
            h_sizes,
            bit_fixes,
            potential,
            forced: 0,
        },
    })
}

#[derive(Debug, Clone)]
pub struct CoverageOutcome {
    pub h: Vec<u32>,
    pub threshold: u64,
    pub cert_large: Option<Certificate>,
    pub cert_small: Option<Certificate>,
    pub potential: Potential,
    pub forced: usize,
}

/// Large-set coverage variant: splits off prefixes of length
/// L = ceil(10 log N / p) of every set of size >= L, weighted N^2, and
/// solves the two instances separately. The union H has potential <= 8
/// and hits every set of size >= L.
pub fn solve_with_coverage(
    instance: &HittingInstance,
    log_base: LogBase,
) -> Result<CoverageOutcome> {
    let n_padded = instance.n_padded() as u64;
    let threshold = match log_base {
        LogBase::Natural => crate::exact::coverage_threshold_nat(n_padded, &instance.p),
        LogBase::Two => crate::exact::coverage_threshold_log2(n_padded, &instance.p),
    };
    let big_weight = n_padded.saturating_mul(n_padded);

    let mut large_sets = Vec::new();
    let mut large_weights = Vec::new();
    let mut small_sets = Vec::new();
    let mut small_weights = Vec::new();
    for (s, &w) in instance.sets.iter().zip(&instance.weights) {
        if s.len() as u64 >= threshold {
            large_sets.push(s[..threshold as usize].to_vec());
            large_weights.push(big_weight);
        } else {
            small_sets.push(s.clone());
            small_weights.push(w);
        }
    }

    let mut h: BTreeSet<u32> = BTreeSet::new();
    let cert_large = if large_sets.is_empty() {
        None
    } else {
        let inst =
            HittingInstance::new(instance.n, large_sets.clone(), large_weights, instance.p.clone())?;
        let out = solve(&inst)?;
        h.extend(out.h);
        Some(out.certificate)
    };
    let cert_small = if small_sets.is_empty() {
        None
    } else {
        let inst = HittingInstance::new(instance.n, small_sets, small_weights, instance.p.clone())?;
        let out = solve(&inst)?;
        h.extend(out.h);
        Some(out.certificate)
    };

    // Degenerate corners (N = 1) can leave a large set unhit; force-hit
    // deterministically with its first element.
    let mut forced = 0usize;
    for s in &large_sets {
        if !s.iter().any(|e| h.contains(e)) {
            h.insert(s[0]);
            forced += 1;
        }
    }

    let h: Vec<u32> = h.iter().copied().collect();
    let potential = instance.potential(&h);
    if !potential.at_most(8) {
        return Err(Error::internal(format!(
            "coverage potential {potential} exceeds 8"
        )));
    }
    let hset: BTreeSet<u32> = h.iter().copied().collect();
    for (s, _) in instance.sets.iter().zip(&instance.weights) {
        if s.len() as u64 >= threshold && !s.iter().any(|e| hset.contains(e)) {
            return Err(Error::internal(format!(
                "large set of size {} left unhit",
                s.len()
            )));
        }
    }
    Ok(CoverageOutcome { h, threshold, cert_large, cert_small, potential, forced })
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, String)> + '_ {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_fields(line: &str, lineno: usize) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|f| {
            f.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("expected a nonnegative integer, got {f:?}"),
            })
        })
        .collect()
}
