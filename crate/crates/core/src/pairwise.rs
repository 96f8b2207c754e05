//! Pairwise-independent Bernoulli(q) sample space over an ell*m-bit seed,
//! with exact conditional expectations under a fixed seed prefix and a
//! greedy bit-fixing driver.
//!
//! Construction: the seed splits into ell groups of m bits. Variable
//! X_i (1 <= i <= 2^m - 1) has an ell-bit label whose j-th bit is the
//! GF(2) inner product of the binary representation of i with group j.
//! X_i = 1 iff all label bits are 1, so Pr[X_i = 1] = 2^-ell exactly and
//! distinct variables are pairwise independent.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{pow2, Rat};

/// A seed prefix is the first B bits of the seed, each 0 or 1.
pub type SeedPrefix = [u8];

#[derive(Debug, Clone)]
pub struct PairwiseSpace {
    n_raw: usize,
    m: u32,
    ell: u32,
}

impl PairwiseSpace {
    /// Builds the space for `n` variables with effective bias the unique
    /// power of two in [q_request, 2 q_request).
    pub fn build(n: usize, q_request: &Rat) -> Result<PairwiseSpace> {
        if n < 1 {
            return Err(Error::validation("need at least one variable"));
        }
        if !(q_request > &Rat::zero() && q_request <= &Rat::new(1.into(), 2.into())) {
            return Err(Error::validation(format!(
                "bias request {q_request} outside (0, 1/2]"
            )));
        }
        let mut ell = 1u32;
        loop {
            let q = pow2(-(ell as i64));
            if &q >= q_request {
                let next = pow2(-(ell as i64 + 1));
                if &next < q_request {
                    break;
                }
            }
            ell += 1;
            if ell > 256 {
                return Err(Error::validation("bias request too small"));
            }
        }
        let mut m = 1u32;
        while ((1u128 << m) - 1) < n as u128 {
            m += 1;
        }
        Ok(PairwiseSpace { n_raw: n, m, ell })
    }

    pub fn n(&self) -> usize {
        self.n_raw
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn seed_len(&self) -> usize {
        (self.ell * self.m) as usize
    }

    /// Effective bias 2^-ell.
    pub fn bias(&self) -> Rat {
        pow2(-(self.ell as i64))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < 1 || i > self.n_raw {
            return Err(Error::validation(format!(
                "variable index {i} outside 1..={}",
                self.n_raw
            )));
        }
        Ok(())
    }

    /// Evaluates X_i under a fully fixed seed.
    pub fn eval_variable(&self, seed: &SeedPrefix, i: usize) -> Result<u8> {
        if seed.len() != self.seed_len() {
            return Err(Error::validation(format!(
                "seed length {} != {}",
                seed.len(),
                self.seed_len()
            )));
        }
        self.check_index(i)?;
        let mask = i as u32;
        for g in 0..self.ell {
            let mut bit = 0u8;
            for b in 0..self.m {
                if mask >> b & 1 == 1 {
                    bit ^= seed[(g * self.m + b) as usize];
                }
            }
            if bit == 0 {
                return Ok(0);
            }
        }
        Ok(1)
    }

    /// Per-group label-bit state of variable `i` given a prefix:
    /// `None` when the bit still depends on free seed bits (with the free
    /// selector mask), `Some(d)` when fully determined.
    fn group_state(&self, prefix: &SeedPrefix, i: usize, g: u32) -> GroupState {
        let mask = i as u32;
        let start = (g * self.m) as usize;
        let fixed = prefix.len().saturating_sub(start).min(self.m as usize) as u32;
        let mut d = 0u8;
        for b in 0..fixed {
            if mask >> b & 1 == 1 {
                d ^= prefix[start + b as usize];
            }
        }
        let free = mask >> fixed << fixed & ((1u32 << self.m) - 1);
        if free != 0 {
            GroupState::Free { selector: free, parity: d }
        } else {
            GroupState::Det(d)
        }
    }

    /// Exact E[X_i | prefix] as a rational (0 or a power of two).
    pub fn cond_prob(&self, prefix: &SeedPrefix, i: usize) -> Result<Rat> {
        self.check_prefix(prefix)?;
        self.check_index(i)?;
        let mut free_groups = 0i64;
        for g in 0..self.ell {
            match self.group_state(prefix, i, g) {
                GroupState::Det(0) => return Ok(Rat::zero()),
                GroupState::Det(_) => {}
                GroupState::Free { .. } => free_groups += 1,
            }
        }
        Ok(pow2(-free_groups))
    }

    /// Exact E[X_i X_j | prefix] for i != j.
    pub fn cond_pair_prob(&self, prefix: &SeedPrefix, i: usize, j: usize) -> Result<Rat> {
        self.check_prefix(prefix)?;
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return self.cond_prob(prefix, i);
        }
        let mut log2 = 0i64;
        for g in 0..self.ell {
            let si = self.group_state(prefix, i, g);
            let sj = self.group_state(prefix, j, g);
            match (si, sj) {
                (GroupState::Det(a), GroupState::Det(b)) => {
                    if a == 0 || b == 0 {
                        return Ok(Rat::zero());
                    }
                }
                (GroupState::Det(a), GroupState::Free { .. })
                | (GroupState::Free { .. }, GroupState::Det(a)) => {
                    if a == 0 {
                        return Ok(Rat::zero());
                    }
                    log2 -= 1;
                }
                (
                    GroupState::Free { selector: f1, parity: d1 },
                    GroupState::Free { selector: f2, parity: d2 },
                ) => {
                    if f1 == f2 {
                        // same free linear form: labels move together
                        if d1 != d2 {
                            return Ok(Rat::zero());
                        }
                        log2 -= 1;
                    } else {
                        // distinct nonzero linear forms are independent
                        log2 -= 2;
                    }
                }
            }
        }
        Ok(pow2(log2))
    }

    /// Sum of c_i * E[X_i | prefix] over the given (index, coefficient)
    /// terms; exact.
    pub fn cond_first_moment(&self, prefix: &SeedPrefix, terms: &[(usize, Rat)]) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (i, c) in terms {
            acc += c * self.cond_prob(prefix, *i)?;
        }
        Ok(acc)
    }

    /// c * sum over unordered pairs {i, j} of A of E[X_i X_j | prefix].
    pub fn cond_second_moment(&self, prefix: &SeedPrefix, a: &[usize], c: &Rat) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (k, &i) in a.iter().enumerate() {
            for &j in &a[k + 1..] {
                acc += self.cond_pair_prob(prefix, i, j)?;
            }
        }
        Ok(acc * c)
    }

    fn check_prefix(&self, prefix: &SeedPrefix) -> Result<()> {
        if prefix.len() > self.seed_len() {
            return Err(Error::validation(format!(
                "prefix length {} exceeds seed length {}",
                prefix.len(),
                self.seed_len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GroupState {
    /// Label bit fully determined by the prefix.
    Det(u8),
    /// Label bit = parity ^ <free seed bits, selector>.
    Free { selector: u32, parity: u8 },
}

/// Greedy conditional-expectation bit fixing. `objective` must return the
/// exact conditional expectation of some seed-measurable quantity given
/// the prefix, all in one consistent scaling. Returns a full seed whose
/// objective is at most the unconditioned value; ties pick bit 0.
pub fn fix_bits<V, F>(space: &PairwiseSpace, mut objective: F) -> Result<Vec<u8>>
where
    V: PartialOrd,
    F: FnMut(&SeedPrefix) -> V,
{
    let mut seed: Vec<u8> = Vec::with_capacity(space.seed_len());
    let mut prev = objective(&seed);
    for pos in 0..space.seed_len() {
        seed.push(0);
        let e0 = objective(&seed);
        seed[pos] = 1;
        let e1 = objective(&seed);
        let chosen = if e0 <= e1 {
            seed[pos] = 0;
            e0
        } else {
            e1
        };
        if chosen > prev {
            return Err(Error::internal(format!(
                "objective increased while fixing bit {pos}; caller did not supply \
                 a conditional expectation"
            )));
        }
        prev = chosen;
    }
    Ok(seed)
}

/// Incremental per-variable state under a growing prefix, for hot
/// bit-fixing objectives. Tracks variables 1..=n of a space; bits must be
/// committed in seed order. Candidate queries evaluate the next bit
/// without committing.
///
/// Scaled values: all moments are returned multiplied by 2^(2 ell) so
/// they are integers.
pub struct VarTracker<'a> {
    space: &'a PairwiseSpace,
    cur_group: u32,
    cur_bit: u32,
    killed: Vec<bool>,
    cur_parity: Vec<u8>,
}

/// Candidate factor class of one variable at the next bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarClass {
    Dead,
    Det1,
    Free { selector: u32, parity: u8 },
}

impl<'a> VarTracker<'a> {
    pub fn new(space: &'a PairwiseSpace) -> Self {
        VarTracker {
            space,
            cur_group: 0,
            cur_bit: 0,
            killed: vec![false; space.n_raw],
            cur_parity: vec![0; space.n_raw],
        }
    }

    pub fn scale_log2(&self) -> u32 {
        2 * self.space.ell
    }

    pub fn committed_len(&self) -> usize {
        (self.cur_group * self.space.m + self.cur_bit) as usize
    }

    /// Commits the next seed bit.
    pub fn commit(&mut self, bit: u8) {
        let m = self.space.m;
        debug_assert!(self.cur_group < self.space.ell);
        if bit == 1 {
            for v in 1..=self.space.n_raw {
                if v as u32 >> self.cur_bit & 1 == 1 {
                    self.cur_parity[v - 1] ^= 1;
                }
            }
        }
        self.cur_bit += 1;
        if self.cur_bit == m {
            for v in 1..=self.space.n_raw {
                if self.cur_parity[v - 1] == 0 {
                    self.killed[v - 1] = true;
                }
                self.cur_parity[v - 1] = 0;
            }
            self.cur_bit = 0;
            self.cur_group += 1;
        }
    }

    /// Number of fully free groups after the current one (the current
    /// partially fixed group is accounted per variable).
    fn free_groups_after(&self) -> u32 {
        if self.cur_group >= self.space.ell {
            0
        } else {
            self.space.ell - 1 - self.cur_group
        }
    }

    /// Class of variable v under the committed prefix, optionally with
    /// the next seed bit proposed as `beta` (None evaluates the bare
    /// committed prefix).
    pub fn class(&self, v: u32, beta: Option<u8>) -> VarClass {
        let idx = v as usize - 1;
        if self.killed[idx] {
            return VarClass::Dead;
        }
        if self.cur_group >= self.space.ell {
            return VarClass::Det1; // full seed committed, variable survived
        }
        let m = self.space.m;
        let group_mask = (1u32 << m) - 1;
        let (parity, free) = match beta {
            Some(b) => {
                let has = (v >> self.cur_bit & 1) as u8;
                let parity = self.cur_parity[idx] ^ (has & b);
                (parity, v >> (self.cur_bit + 1) << (self.cur_bit + 1) & group_mask)
            }
            None => (self.cur_parity[idx], v >> self.cur_bit << self.cur_bit & group_mask),
        };
        if free != 0 {
            VarClass::Free { selector: free, parity }
        } else if parity == 1 {
            VarClass::Det1
        } else {
            VarClass::Dead
        }
    }

    /// 2^(2 ell) * E[X_v | prefix (+ proposed next bit)].
    pub fn var_m1_scaled(&self, v: u32, beta: Option<u8>) -> u64 {
        let g = self.free_groups_after();
        let two_ell = self.scale_log2();
        match self.class(v, beta) {
            VarClass::Dead => 0,
            VarClass::Det1 => 1u64 << (two_ell - g),
            VarClass::Free { .. } => 1u64 << (two_ell - g - 1),
        }
    }

    /// Scaled first and second moments of the indicator sum over
    /// `members`: (2^(2 ell) * E[sum X_v], 2^(2 ell) * E[sum_{v<w} X_v X_w]).
    /// `scratch` avoids reallocation across calls.
    pub fn set_moments_scaled(
        &self,
        members: &[u32],
        beta: Option<u8>,
        scratch: &mut Vec<(u32, u8)>,
    ) -> (u64, u64) {
        let g = self.free_groups_after();
        let two_ell = self.scale_log2();
        let mut det1: u64 = 0;
        scratch.clear();
        for &v in members {
            match self.class(v, beta) {
                VarClass::Dead => {}
                VarClass::Det1 => det1 += 1,
                VarClass::Free { selector, parity } => scratch.push((selector, parity)),
            }
        }
        let free = scratch.len() as u64;
        let m1 = det1 * (1u64 << (two_ell - g)) + free * (1u64 << (two_ell - g - 1).min(two_ell));
        // pair contributions at scale 2^(2 ell - 2g - 2) quanta:
        // det1/det1 -> 4, det1/free -> 2, free/free distinct form -> 1,
        // free/free same form same parity -> 2, same form diff parity -> 0
        scratch.sort_unstable();
        let mut same_pairs_weighted: u64 = 0;
        let mut run_start = 0;
        while run_start < scratch.len() {
            let mut run_end = run_start + 1;
            while run_end < scratch.len() && scratch[run_end].0 == scratch[run_start].0 {
                run_end += 1;
            }
            let mut p0: u64 = 0;
            let mut p1: u64 = 0;
            for &(_, parity) in &scratch[run_start..run_end] {
                if parity == 0 {
                    p0 += 1;
                } else {
                    p1 += 1;
                }
            }
            let same = p0 * p0.saturating_sub(1) / 2 + p1 * p1.saturating_sub(1) / 2;
            // same-form same-parity pairs weigh 2 quanta, distinct-form 1
            same_pairs_weighted += same * 2 + pairs_between(run_start, run_end, scratch.len());
            run_start = run_end;
        }
        let quanta = det1 * det1.saturating_sub(1) / 2 * 4 + det1 * free * 2 + same_pairs_weighted;
        let m2 = quanta * (1u64 << (two_ell - 2 * g - 2).min(two_ell));
        (m1, m2)
    }

    /// 2^(2 ell) * E[X_a X_b | prefix (+ proposed next bit)] for a != b.
    pub fn pair_m2_scaled(&self, a: u32, b: u32, beta: Option<u8>) -> u64 {
        debug_assert_ne!(a, b);
        let g = self.free_groups_after();
        let two_ell = self.scale_log2();
        let unit = two_ell - 2 * g;
        match (self.class(a, beta), self.class(b, beta)) {
            (VarClass::Dead, _) | (_, VarClass::Dead) => 0,
            (VarClass::Det1, VarClass::Det1) => 1u64 << unit,
            (VarClass::Det1, VarClass::Free { .. }) | (VarClass::Free { .. }, VarClass::Det1) => {
                1u64 << (unit - 1)
            }
            (
                VarClass::Free { selector: f1, parity: p1 },
                VarClass::Free { selector: f2, parity: p2 },
            ) => {
                if f1 != f2 {
                    1u64 << (unit - 2)
                } else if p1 == p2 {
                    1u64 << (unit - 1)
                } else {
                    0
                }
            }
        }
    }

    /// Whether X_v = 1 under the fully committed seed.
    pub fn realized(&self, v: u32) -> bool {
        debug_assert_eq!(self.committed_len(), self.space.seed_len());
        !self.killed[v as usize - 1]
    }
}

/// Cross-run pairs between a sorted run [start, end) and later entries:
/// each counts 1 quantum (distinct free forms).
fn pairs_between(start: usize, end: usize, len: usize) -> u64 {
    ((end - start) as u64) * ((len - end) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ratio, rat_uint};
    use num_traits::{One, ToPrimitive};

    fn enumerate_completions(space: &PairwiseSpace, prefix: &[u8]) -> Vec<Vec<u8>> {
        let free = space.seed_len() - prefix.len();
        let mut out = Vec::with_capacity(1 << free);
        for bits in 0..1u64 << free {
            let mut seed = prefix.to_vec();
            for b in 0..free {
                seed.push((bits >> b & 1) as u8);
            }
            out.push(seed);
        }
        out
    }

    #[test]
    fn build_examples() {
        let s = PairwiseSpace::build(7, &ratio(1, 4)).unwrap();
        assert_eq!((s.ell(), s.m(), s.seed_len()), (2, 3, 6));
        let s = PairwiseSpace::build(7, &ratio(3, 16)).unwrap();
        assert_eq!(s.ell(), 2);
        assert_eq!(s.bias(), ratio(1, 4));
        let s = PairwiseSpace::build(1, &ratio(1, 2)).unwrap();
        assert_eq!((s.ell(), s.m(), s.seed_len()), (1, 1, 1));
        assert!(PairwiseSpace::build(4, &ratio(3, 4)).is_err());
        assert!(PairwiseSpace::build(4, &ratio(0, 1)).is_err());
    }

    #[test]
    fn eval_all_zero_and_all_one_seeds() {
        let space = PairwiseSpace::build(7, &ratio(1, 4)).unwrap();
        let zeros = vec![0u8; space.seed_len()];
        let ones = vec![1u8; space.seed_len()];
        for i in 1..=7usize {
            assert_eq!(space.eval_variable(&zeros, i).unwrap(), 0);
            // all-ones: label bit = popcount(i) mod 2
            let expect = (i.count_ones() % 2) as u8;
            assert_eq!(space.eval_variable(&ones, i).unwrap(), expect);
        }
    }

    #[test]
    fn eval_hand_example() {
        // ell=1, m=2, seed "10": X_1 = r0 = 1, X_2 = r1 = 0
        let space = PairwiseSpace::build(3, &ratio(1, 2)).unwrap();
        assert_eq!((space.ell(), space.m()), (1, 2));
        let seed = vec![1u8, 0];
        assert_eq!(space.eval_variable(&seed, 1).unwrap(), 1);
        assert_eq!(space.eval_variable(&seed, 2).unwrap(), 0);
        assert!(space.eval_variable(&[1], 1).is_err());
    }

    #[test]
    fn exact_marginals_by_enumeration() {
        for (n, ell) in [(3usize, 1u32), (7, 2), (5, 3)] {
            let q = pow2(-(ell as i64));
            let space = PairwiseSpace::build(n, &q).unwrap();
            let seeds = enumerate_completions(&space, &[]);
            let total = rat_uint(seeds.len() as u64);
            for i in 1..=n {
                let mut count = 0u64;
                for s in &seeds {
                    count += space.eval_variable(s, i).unwrap() as u64;
                }
                assert_eq!(rat_uint(count) / total.clone(), space.bias(), "i={i}");
                for j in i + 1..=n {
                    let mut both = 0u64;
                    for s in &seeds {
                        both += (space.eval_variable(s, i).unwrap()
                            & space.eval_variable(s, j).unwrap()) as u64;
                    }
                    let expect = space.bias() * space.bias();
                    assert_eq!(rat_uint(both) / total.clone(), expect, "i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn conditional_moments_match_bruteforce() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(1..=12usize);
            let ell = rng.gen_range(1..=3u32);
            let space = PairwiseSpace::build(n, &pow2(-(ell as i64))).unwrap();
            if space.seed_len() > 12 {
                continue;
            }
            let plen = rng.gen_range(0..=space.seed_len());
            let prefix: Vec<u8> = (0..plen).map(|_| rng.gen_range(0..2u8)).collect();
            let a: Vec<usize> = (1..=n).filter(|_| rng.gen_bool(0.6)).collect();
            let terms: Vec<(usize, Rat)> = a
                .iter()
                .map(|&i| (i, rat_uint(rng.gen_range(1..5u64))))
                .collect();

            let seeds = enumerate_completions(&space, &prefix);
            let total = rat_uint(seeds.len() as u64);
            let mut brute1 = Rat::zero();
            let mut brute2 = Rat::zero();
            for s in &seeds {
                for (i, c) in &terms {
                    brute1 += c * rat_uint(space.eval_variable(s, *i).unwrap() as u64);
                }
                for (k, &i) in a.iter().enumerate() {
                    for &j in &a[k + 1..] {
                        brute2 += rat_uint(
                            (space.eval_variable(s, i).unwrap()
                                & space.eval_variable(s, j).unwrap()) as u64,
                        );
                    }
                }
            }
            brute1 /= total.clone();
            brute2 /= total.clone();
            let got1 = space.cond_first_moment(&prefix, &terms).unwrap();
            let got2 = space.cond_second_moment(&prefix, &a, &Rat::one()).unwrap();
            assert_eq!(got1, brute1);
            assert_eq!(got2, brute2);
        }
    }

    #[test]
    fn moment_edge_cases() {
        let space = PairwiseSpace::build(7, &ratio(1, 4)).unwrap();
        // unconditioned marginal = q
        let v = space.cond_first_moment(&[], &[(3, Rat::one())]).unwrap();
        assert_eq!(v, space.bias());
        // pair of two = q^2, singleton has no pairs
        let v = space.cond_second_moment(&[], &[2, 5], &Rat::one()).unwrap();
        assert_eq!(v, space.bias() * space.bias());
        let v = space.cond_second_moment(&[], &[2], &Rat::one()).unwrap();
        assert_eq!(v, Rat::zero());
        // fully fixed seed degenerates to evaluation
        let seed = vec![1u8; space.seed_len()];
        for i in 1..=7 {
            let ev = space.cond_prob(&seed, i).unwrap();
            let direct = rat_uint(space.eval_variable(&seed, i).unwrap() as u64);
            assert_eq!(ev, direct);
        }
    }

    #[test]
    fn martingale_split() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let space = PairwiseSpace::build(6, &ratio(1, 4)).unwrap();
        for _ in 0..30 {
            let plen = rng.gen_range(0..space.seed_len());
            let prefix: Vec<u8> = (0..plen).map(|_| rng.gen_range(0..2u8)).collect();
            let a: Vec<usize> = vec![1, 3, 6];
            let terms: Vec<(usize, Rat)> = a.iter().map(|&i| (i, Rat::one())).collect();
            let base = space.cond_first_moment(&prefix, &terms).unwrap()
                + space.cond_second_moment(&prefix, &a, &Rat::one()).unwrap();
            let mut p0 = prefix.clone();
            p0.push(0);
            let mut p1 = prefix.clone();
            p1.push(1);
            let v0 = space.cond_first_moment(&p0, &terms).unwrap()
                + space.cond_second_moment(&p0, &a, &Rat::one()).unwrap();
            let v1 = space.cond_first_moment(&p1, &terms).unwrap()
                + space.cond_second_moment(&p1, &a, &Rat::one()).unwrap();
            assert_eq!((v0 + v1) / rat_uint(2), base);
        }
    }

    #[test]
    fn fix_bits_constant_objective_gives_zero_seed() {
        let space = PairwiseSpace::build(7, &ratio(1, 4)).unwrap();
        let seed = fix_bits(&space, |_| 1i64).unwrap();
        assert_eq!(seed, vec![0u8; space.seed_len()]);
    }

    #[test]
    fn fix_bits_minimizes_linear_objective_to_zero() {
        let space = PairwiseSpace::build(7, &ratio(1, 4)).unwrap();
        let terms: Vec<(usize, Rat)> = (1..=7).map(|i| (i, Rat::one())).collect();
        let seed = fix_bits(&space, |prefix| {
            space.cond_first_moment(prefix, &terms).unwrap()
        })
        .unwrap();
        for i in 1..=7 {
            assert_eq!(space.eval_variable(&seed, i).unwrap(), 0);
        }
    }

    #[test]
    fn fix_bits_beats_every_seed_on_average() {
        // final objective <= unconditioned expectation, by enumeration
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let space = PairwiseSpace::build(7, &ratio(1, 4)).unwrap();
        let terms: Vec<(usize, Rat)> = (1..=7)
            .map(|i| (i, rat_uint(rng.gen_range(1..6u64))))
            .collect();
        let objective = |prefix: &SeedPrefix| space.cond_first_moment(prefix, &terms).unwrap();
        let seed = fix_bits(&space, objective).unwrap();
        let fixed_val = space.cond_first_moment(&seed, &terms).unwrap();
        let expect = space.cond_first_moment(&[], &terms).unwrap();
        assert!(fixed_val <= expect);
    }

    #[test]
    fn fix_bits_rejects_non_martingale() {
        let space = PairwiseSpace::build(3, &ratio(1, 2)).unwrap();
        // objective that increases with prefix length is not a cond. exp.
        let res = fix_bits(&space, |p: &SeedPrefix| p.len() as i64);
        assert!(res.is_err());
    }

    #[test]
    fn tracker_matches_cond_moments() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(2..=15usize);
            let ell = rng.gen_range(1..=3u32);
            let space = PairwiseSpace::build(n, &pow2(-(ell as i64))).unwrap();
            let members: Vec<u32> = (1..=n as u32).filter(|_| rng.gen_bool(0.7)).collect();
            if members.is_empty() {
                continue;
            }
            let mut tracker = VarTracker::new(&space);
            let mut prefix: Vec<u8> = Vec::new();
            let mut scratch = Vec::new();
            for _pos in 0..space.seed_len() {
                // bare-prefix evaluation (no candidate bit)
                {
                    let (m1s, m2s) = tracker.set_moments_scaled(&members, None, &mut scratch);
                    let scale = pow2(tracker.scale_log2() as i64);
                    let terms: Vec<(usize, Rat)> =
                        members.iter().map(|&v| (v as usize, Rat::one())).collect();
                    let idx: Vec<usize> = members.iter().map(|&v| v as usize).collect();
                    let want1 =
                        space.cond_first_moment(&prefix, &terms).unwrap() * scale.clone();
                    let want2 =
                        space.cond_second_moment(&prefix, &idx, &Rat::one()).unwrap() * scale;
                    assert_eq!(rat_uint(m1s), want1);
                    assert_eq!(rat_uint(m2s), want2);
                }
                for beta in 0..2u8 {
                    let (m1s, m2s) =
                        tracker.set_moments_scaled(&members, Some(beta), &mut scratch);
                    let mut p = prefix.clone();
                    p.push(beta);
                    let scale = pow2(tracker.scale_log2() as i64);
                    let terms: Vec<(usize, Rat)> =
                        members.iter().map(|&v| (v as usize, Rat::one())).collect();
                    let idx: Vec<usize> = members.iter().map(|&v| v as usize).collect();
                    let want1 = space.cond_first_moment(&p, &terms).unwrap() * scale.clone();
                    let want2 = space.cond_second_moment(&p, &idx, &Rat::one()).unwrap() * scale;
                    assert_eq!(rat_uint(m1s), want1);
                    assert_eq!(rat_uint(m2s), want2);
                    // single-variable helper agrees
                    let direct: u64 =
                        members.iter().map(|&v| tracker.var_m1_scaled(v, Some(beta))).sum();
                    assert_eq!(direct, m1s);
                }
                let bit = rng.gen_range(0..2u8);
                prefix.push(bit);
                tracker.commit(bit);
            }
            for &v in &members {
                let want = space.eval_variable(&prefix, v as usize).unwrap() == 1;
                assert_eq!(tracker.realized(v), want);
            }
        }
    }

    #[test]
    fn pairwise_probability_is_exact_float_check() {
        let space = PairwiseSpace::build(100, &ratio(1, 8)).unwrap();
        let p = space.cond_prob(&[], 73).unwrap();
        assert!((p.to_f64().unwrap() - 0.125).abs() < 1e-15);
    }
}
