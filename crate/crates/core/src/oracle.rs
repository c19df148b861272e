//! Brute-force ground truth.
//!
//! [`solve_exhaustive`] does not assume any structural property of optimal
//! schedules beyond ASAP timing on the non-final machines: every machine
//! gets its own independently enumerated order and each complete candidate
//! is accepted only by [`verify_schedule`]. Branches are cut only when a
//! partial order already makes some job miss its due date, which is implied
//! by route precedence alone.
//!
//! Candidate sets are visited in increasing bitmask order. Dropping a job
//! from a feasible schedule leaves a feasible schedule, so a set is searched
//! only when every subset one job smaller was found feasible.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    edd_order_of, verify_schedule, Instance, Schedule, SolveResult, SolveStats, Time,
};

pub const DEFAULT_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationSpace {
    /// Independent orders on every machine.
    Unrestricted,
    /// `M_1` and `M_2` share an order and the last machine is in EDD order.
    SharedFirstEddLast,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOptions {
    pub cap: usize,
    pub space: PermutationSpace,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            cap: DEFAULT_CAP,
            space: PermutationSpace::Unrestricted,
        }
    }
}

pub fn solve_exhaustive(inst: &Instance) -> Result<SolveResult> {
    solve_exhaustive_with(inst, &OracleOptions::default())
}

pub fn solve_exhaustive_with(inst: &Instance, opts: &OracleOptions) -> Result<SolveResult> {
    let started = Instant::now();
    inst.validate()?;
    let n = inst.jobs.len();
    if n > opts.cap || n >= 32 {
        return Err(Error::InstanceTooLarge {
            jobs: n,
            cap: opts.cap.min(31),
        });
    }
    let mut stats = SolveStats::default();
    let mut feasible = vec![false; 1 << n];
    feasible[0] = true;
    let mut best: (i64, Option<(Vec<usize>, Schedule)>) = (0, None);

    for mask in 1u32..(1 << n) {
        stats.subsets_enumerated += 1;
        let set: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) != 0).collect();
        let subsets_ok = set
            .iter()
            .all(|&j| feasible[(mask & !(1 << j)) as usize]);
        if !subsets_ok || !distinct_dues(inst, &set) {
            continue;
        }
        stats.subsets_evaluated += 1;
        if let Some(sched) = search_orders(inst, &set, opts.space, &mut stats)? {
            feasible[mask as usize] = true;
            let value = inst.total_weight(&set);
            if value > best.0 {
                best = (value, Some((set, sched)));
            }
        }
    }
    stats.subsets_enumerated += 1;
    stats.elapsed = started.elapsed();
    Ok(match best.1 {
        Some((set, sched)) => SolveResult::from_witness(inst, &set, sched, stats),
        None => SolveResult {
            value: 0,
            jit_set: Vec::new(),
            witness: Schedule::empty(inst),
            stats,
        },
    })
}

fn distinct_dues(inst: &Instance, set: &[usize]) -> bool {
    let mut dues: Vec<Time> = set.iter().map(|&j| inst.jobs[j].due).collect();
    dues.sort_unstable();
    dues.windows(2).all(|w| w[0] != w[1])
}

/// A verified schedule in which exactly `set` is JIT, if one exists within
/// `space`.
pub fn feasible_schedule(
    inst: &Instance,
    set: &[usize],
    space: PermutationSpace,
) -> Result<Option<Schedule>> {
    let mut stats = SolveStats::default();
    search_orders(inst, set, space, &mut stats)
}

fn search_orders(
    inst: &Instance,
    set: &[usize],
    space: PermutationSpace,
    stats: &mut SolveStats,
) -> Result<Option<Schedule>> {
    for &j in set {
        if j >= inst.jobs.len() {
            return Err(Error::InvalidJobIndex(j));
        }
    }
    let m = inst.machines;
    let s = set.len();
    let edd: Vec<usize> = {
        let order = edd_order_of(inst, set);
        order
            .iter()
            .map(|j| set.iter().position(|x| x == j).unwrap())
            .collect()
    };
    let mut forced: Vec<Option<Vec<usize>>> = vec![None; m];
    if space == PermutationSpace::SharedFirstEddLast {
        forced[m - 1] = Some(edd.clone());
        if m == 2 {
            forced[0] = Some(edd);
        }
    }
    let tails: Vec<Vec<Time>> = set
        .iter()
        .map(|&j| {
            let p = &inst.jobs[j].proc;
            (0..m).map(|i| p[i + 1..].iter().sum()).collect()
        })
        .collect();
    let mut dfs = Dfs {
        inst,
        set,
        space,
        forced,
        tails,
        orders: vec![Vec::with_capacity(s); m],
        starts: vec![vec![0; m]; s],
        ends: vec![vec![0; m]; s],
        used: vec![false; s],
        stats,
    };
    dfs.machine(0)
}

struct Dfs<'a, 's> {
    inst: &'a Instance,
    set: &'a [usize],
    space: PermutationSpace,
    forced: Vec<Option<Vec<usize>>>,
    /// `tails[x][i]`: processing still needed after machine `i`.
    tails: Vec<Vec<Time>>,
    /// Positions into `set` per machine.
    orders: Vec<Vec<usize>>,
    starts: Vec<Vec<Time>>,
    ends: Vec<Vec<Time>>,
    used: Vec<bool>,
    stats: &'s mut SolveStats,
}

impl Dfs<'_, '_> {
    fn machine(&mut self, i: usize) -> Result<Option<Schedule>> {
        if i == self.inst.machines {
            return self.leaf();
        }
        self.used.iter_mut().for_each(|u| *u = false);
        self.orders[i].clear();
        self.place(i, 0)
    }

    fn leaf(&mut self) -> Result<Option<Schedule>> {
        self.stats.permutations_tried += 1;
        let orders: Vec<Vec<usize>> = self
            .orders
            .iter()
            .map(|o| o.iter().map(|&x| self.set[x]).collect())
            .collect();
        let starts: BTreeMap<usize, Vec<Time>> = self
            .set
            .iter()
            .enumerate()
            .map(|(x, &j)| (j, self.starts[x].clone()))
            .collect();
        let sched = Schedule::from_parts(self.inst, self.set, &orders, &starts);
        Ok(verify_schedule(self.inst, &sched)?
            .is_feasible()
            .then_some(sched))
    }

    /// Candidates for the next slot on machine `i`.
    fn candidates(&self, i: usize, depth: usize) -> Vec<usize> {
        if let Some(order) = &self.forced[i] {
            return vec![order[depth]];
        }
        if self.space == PermutationSpace::SharedFirstEddLast && i == 1 && self.inst.machines > 2 {
            return vec![self.orders[0][depth]];
        }
        (0..self.set.len()).filter(|&x| !self.used[x]).collect()
    }

    fn place(&mut self, i: usize, depth: usize) -> Result<Option<Schedule>> {
        let s = self.set.len();
        if depth == s {
            let saved_used = std::mem::replace(&mut self.used, vec![false; s]);
            let found = self.machine(i + 1)?;
            self.used = saved_used;
            return Ok(found);
        }
        let m = self.inst.machines;
        let last_end = match self.orders[i].last() {
            Some(&x) => self.ends[x][i],
            None => 0,
        };
        for x in self.candidates(i, depth) {
            if self.used[x] {
                continue;
            }
            let job = &self.inst.jobs[self.set[x]];
            let ready = if i == 0 { 0 } else { self.ends[x][i - 1] };
            let start = if i == m - 1 {
                job.due - job.proc[i]
            } else {
                last_end.max(ready)
            };
            let end = start + job.proc[i];
            if start < last_end || start < ready || end + self.tails[x][i] > job.due {
                continue;
            }
            // Jobs still to come on this machine start no earlier than `end`.
            let stuck = (0..s).any(|y| {
                y != x && !self.used[y] && {
                    let other = &self.inst.jobs[self.set[y]];
                    end + other.proc[i] + self.tails[y][i] > other.due
                }
            });
            if stuck {
                continue;
            }
            self.starts[x][i] = start;
            self.ends[x][i] = end;
            self.used[x] = true;
            self.orders[i].push(x);
            let found = self.place(i, depth + 1)?;
            self.orders[i].pop();
            self.used[x] = false;
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

/// `(X, k, B)`: pick `k` values from `X`, repetition allowed, summing to `B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KSumInstance {
    pub values: Vec<i64>,
    pub k: usize,
    pub target: i64,
}

impl KSumInstance {
    pub fn new(values: Vec<i64>, k: usize, target: i64) -> Result<Self> {
        let ks = KSumInstance { values, k, target };
        ks.validate()?;
        Ok(ks)
    }

    /// Checks `h >= 2`, `1 <= k < h` and positivity.
    pub fn validate(&self) -> Result<()> {
        let h = self.values.len();
        if h < 2 {
            return Err(Error::InvalidKSum(format!("need at least 2 values, got {h}")));
        }
        if self.k >= h {
            return Err(Error::InvalidKSum(format!(
                "k must satisfy 1 <= k < h = {h}, got {}",
                self.k
            )));
        }
        self.validate_positive()
    }

    /// Checks only that `k`, the target and every value are positive.
    pub fn validate_positive(&self) -> Result<()> {
        if self.values.is_empty() || self.k < 1 {
            return Err(Error::InvalidKSum(format!(
                "need at least one value and k >= 1, got h = {}, k = {}",
                self.values.len(),
                self.k
            )));
        }
        if let Some(v) = self.values.iter().find(|&&v| v < 1) {
            return Err(Error::InvalidKSum(format!("values must be positive, got {v}")));
        }
        if self.target < 1 {
            return Err(Error::InvalidKSum(format!(
                "target must be positive, got {}",
                self.target
            )));
        }
        Ok(())
    }

    /// `T`, the sum of all values.
    pub fn total(&self) -> Result<i64> {
        self.values.iter().try_fold(0i64, |acc, &v| {
            acc.checked_add(v)
                .ok_or_else(|| Error::Overflow("sum of kSUM values".into()))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSumSemantics {
    /// The same value may be used several times.
    Multiset,
    /// Every value index is used at most once.
    Set,
}

/// Indices into `values` of a witness, nondecreasing, or `None`.
pub fn solve_ksum(ks: &KSumInstance) -> Result<Option<Vec<usize>>> {
    solve_ksum_with(ks, KSumSemantics::Multiset)
}

/// Enumerates index combinations (with repetition for multisets) in
/// lexicographic order and returns the first one hitting the target.
///
/// Only positivity is required of `ks`; `k >= h` is answered as well.
pub fn solve_ksum_with(ks: &KSumInstance, semantics: KSumSemantics) -> Result<Option<Vec<usize>>> {
    ks.validate_positive()?;
    let h = ks.values.len();
    let k = ks.k;
    let step = usize::from(semantics == KSumSemantics::Set);
    let mut idx: Vec<usize> = (0..k).map(|i| i * step).collect();
    if idx.last().is_some_and(|&l| l >= h) {
        return Ok(None);
    }
    loop {
        let sum = idx
            .iter()
            .try_fold(0i64, |acc, &i| acc.checked_add(ks.values[i]))
            .ok_or_else(|| Error::Overflow("kSUM candidate sum".into()))?;
        if sum == ks.target {
            return Ok(Some(idx));
        }
        // Rightmost position that can still grow.
        let Some(p) = (0..k).rev().find(|&p| idx[p] < h - 1 - (k - 1 - p) * step) else {
            return Ok(None);
        };
        idx[p] += 1;
        for q in p + 1..k {
            idx[q] = idx[q - 1] + step;
        }
    }
}
