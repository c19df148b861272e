//! Fixed-parameter solvers for two machines.
//!
//! Jobs are grouped into *types*: equal due date and equal `M_1` time
//! ([`TypeMode::DueP1`]), or equal due date and equal weight
//! ([`TypeMode::DueWeight`]). At most one job per type can be JIT. The
//! solvers enumerate all `2^k` subsets of the `k` types, skip subsets where
//! two types share a due date, and fill each remaining subset greedily in
//! EDD order. With both machines in EDD order the partial schedule over the
//! first types is summarized by its `M_1` load and the last due date, and a
//! partial schedule with no less weight and no more `M_1` load dominates.
//! That makes the greedy choice per type exact:
//!
//! * `DueP1`: every member adds the same `M_1` load, so take the heaviest
//!   member that still fits.
//! * `DueWeight`: every member adds the same weight, so take the fitting
//!   member with the least `M_1` time.
//!
//! Running time is `O(n 2^k)`.

use std::thread;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{build_witness, Instance, Schedule, SolveResult, SolveStats, Time, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeMode {
    /// Types share due date and processing time on `M_1`.
    DueP1,
    /// Types share due date and weight.
    DueWeight,
}

impl TypeMode {
    fn secondary(self, inst: &Instance, j: usize) -> i64 {
        match self {
            TypeMode::DueP1 => inst.jobs[j].proc[0],
            TypeMode::DueWeight => inst.jobs[j].weight,
        }
    }

    fn name(self) -> &'static str {
        match self {
            TypeMode::DueP1 => "fpt-dp1",
            TypeMode::DueWeight => "fpt-dw",
        }
    }
}

/// Jobs of one type. `secondary` is `p1` or the weight depending on the mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeClass {
    pub due: Time,
    pub secondary: i64,
    pub members: Vec<usize>,
}

fn require_two_machines(inst: &Instance, mode: TypeMode) -> Result<()> {
    if inst.machines != 2 {
        return Err(Error::UnsupportedMachineCount {
            solver: mode.name(),
            supported: "exactly 2",
            found: inst.machines,
        });
    }
    Ok(())
}

/// Partitions jobs into types sorted by `(due, secondary)`, members in
/// instance order.
pub fn classify(inst: &Instance, mode: TypeMode) -> Result<Vec<TypeClass>> {
    require_two_machines(inst, mode)?;
    let mut order: Vec<usize> = (0..inst.jobs.len()).collect();
    order.sort_by_key(|&j| (inst.jobs[j].due, mode.secondary(inst, j), j));
    let mut classes: Vec<TypeClass> = Vec::new();
    for j in order {
        let key = (inst.jobs[j].due, mode.secondary(inst, j));
        match classes.last_mut() {
            Some(c) if (c.due, c.secondary) == key => c.members.push(j),
            _ => classes.push(TypeClass {
                due: key.0,
                secondary: key.1,
                members: vec![j],
            }),
        }
    }
    Ok(classes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FptOptions {
    /// Skip subsets whose optimistic weight cannot beat the incumbent.
    pub prune: bool,
    pub workers: usize,
}

impl Default for FptOptions {
    fn default() -> Self {
        FptOptions {
            prune: false,
            workers: 1,
        }
    }
}

pub fn solve_fpt_dp1(inst: &Instance) -> Result<SolveResult> {
    solve_fpt(inst, TypeMode::DueP1, &FptOptions::default())
}

pub fn solve_fpt_dw(inst: &Instance) -> Result<SolveResult> {
    solve_fpt(inst, TypeMode::DueWeight, &FptOptions::default())
}

pub fn solve_fpt(inst: &Instance, mode: TypeMode, opts: &FptOptions) -> Result<SolveResult> {
    let started = Instant::now();
    let search = FptSearch::new(inst, mode)?;
    let mut result = search.solve(opts)?;
    result.stats.elapsed = started.elapsed();
    Ok(result)
}

/// The greedy fill of one type subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub value: Weight,
    /// Chosen jobs in ascending due-date order.
    pub jobs: Vec<usize>,
}

/// Per-type lookup used by the greedy step.
#[derive(Debug)]
enum Lookup {
    /// Members sorted by `p2`, with the best (heaviest, then lowest index)
    /// member among each prefix.
    ByP2 { p2: Vec<Time>, best: Vec<usize> },
    /// Members sorted by `(p1, index)`.
    ByP1(Vec<usize>),
}

/// A classified two-machine instance ready for subset enumeration.
#[derive(Debug)]
pub struct FptSearch<'a> {
    inst: &'a Instance,
    mode: TypeMode,
    classes: Vec<TypeClass>,
    /// Other types sharing each type's due date.
    conflicts: Vec<u64>,
    lookups: Vec<Lookup>,
    max_weight: Vec<Weight>,
}

impl<'a> FptSearch<'a> {
    pub fn new(inst: &'a Instance, mode: TypeMode) -> Result<Self> {
        inst.validate()?;
        let classes = classify(inst, mode)?;
        let k = classes.len();
        if k >= 64 {
            return Err(Error::Overflow(format!("2^{k} type subsets exceed u64")));
        }
        let conflicts = (0..k)
            .map(|a| {
                (0..k)
                    .filter(|&b| b != a && classes[b].due == classes[a].due)
                    .fold(0u64, |acc, b| acc | (1 << b))
            })
            .collect();
        let jobs = &inst.jobs;
        let lookups = classes
            .iter()
            .map(|c| match mode {
                TypeMode::DueP1 => {
                    let mut by_p2 = c.members.clone();
                    by_p2.sort_by_key(|&j| (jobs[j].proc[1], j));
                    let mut best = Vec::with_capacity(by_p2.len());
                    let mut cur: Option<usize> = None;
                    for &j in &by_p2 {
                        cur = Some(match cur {
                            Some(b) if (jobs[b].weight, std::cmp::Reverse(b))
                                >= (jobs[j].weight, std::cmp::Reverse(j)) =>
                            {
                                b
                            }
                            _ => j,
                        });
                        best.push(cur.unwrap());
                    }
                    Lookup::ByP2 {
                        p2: by_p2.iter().map(|&j| jobs[j].proc[1]).collect(),
                        best,
                    }
                }
                TypeMode::DueWeight => {
                    let mut by_p1 = c.members.clone();
                    by_p1.sort_by_key(|&j| (jobs[j].proc[0], j));
                    Lookup::ByP1(by_p1)
                }
            })
            .collect();
        let max_weight = classes
            .iter()
            .map(|c| c.members.iter().map(|&j| jobs[j].weight).max().unwrap_or(0))
            .collect();
        Ok(FptSearch {
            inst,
            mode,
            classes,
            conflicts,
            lookups,
            max_weight,
        })
    }

    pub fn classes(&self) -> &[TypeClass] {
        &self.classes
    }

    /// The parameter `k`, the number of types.
    pub fn k(&self) -> usize {
        self.classes.len()
    }

    fn has_conflict(&self, mask: u64) -> bool {
        let mut rest = mask;
        while rest != 0 {
            let c = rest.trailing_zeros() as usize;
            if mask & self.conflicts[c] != 0 {
                return true;
            }
            rest &= rest - 1;
        }
        false
    }

    /// Greedy fill of the types in `mask` (bit `c` selects class `c`).
    /// `None` when two selected types share a due date or some type has no
    /// member that fits.
    pub fn evaluate(&self, mask: u64) -> Option<Selection> {
        if self.has_conflict(mask) {
            return None;
        }
        let jobs = &self.inst.jobs;
        let mut load: Time = 0;
        let mut prev_due: Time = 0;
        let mut value: Weight = 0;
        let mut chosen = Vec::with_capacity(mask.count_ones() as usize);
        let mut rest = mask;
        while rest != 0 {
            let c = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let due = self.classes[c].due;
            let pick = match &self.lookups[c] {
                Lookup::ByP2 { p2, best } => {
                    load += self.classes[c].secondary;
                    let slack = due - load.max(prev_due);
                    let fitting = p2.partition_point(|&p| p <= slack);
                    if fitting == 0 {
                        return None;
                    }
                    best[fitting - 1]
                }
                Lookup::ByP1(by_p1) => {
                    let j = *by_p1.iter().find(|&&j| {
                        let p = &jobs[j].proc;
                        (load + p[0]).max(prev_due) + p[1] <= due
                    })?;
                    load += jobs[j].proc[0];
                    j
                }
            };
            value += jobs[pick].weight;
            prev_due = due;
            chosen.push(pick);
        }
        Some(Selection {
            value,
            jobs: chosen,
        })
    }

    fn upper_bound(&self, mask: u64) -> Weight {
        let mut rest = mask;
        let mut total = 0;
        while rest != 0 {
            let c = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            total += self.max_weight[c];
        }
        total
    }

    fn scan(&self, lo: u64, hi: u64, prune: bool) -> (Option<(u64, Selection)>, SolveStats) {
        let mut stats = SolveStats::default();
        let mut best: Option<(u64, Selection)> = None;
        let mut opt: Weight = 0;
        for mask in lo..hi {
            stats.subsets_enumerated += 1;
            if prune && self.upper_bound(mask) <= opt {
                continue;
            }
            stats.subsets_evaluated += 1;
            if let Some(sel) = self.evaluate(mask) {
                if sel.value > opt {
                    opt = sel.value;
                    best = Some((mask, sel));
                }
            }
        }
        (best, stats)
    }

    pub fn solve(&self, opts: &FptOptions) -> Result<SolveResult> {
        let total: u64 = 1 << self.k();
        let workers = (opts.workers.max(1) as u64).min(total);
        let chunk = total.div_ceil(workers);
        let parts = if workers == 1 {
            vec![self.scan(0, total, opts.prune)]
        } else {
            thread::scope(|s| {
                let handles: Vec<_> = (0..workers)
                    .map(|w| {
                        let lo = w * chunk;
                        let hi = ((w + 1) * chunk).min(total);
                        s.spawn(move || self.scan(lo, hi, opts.prune))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("fpt worker panicked"))
                    .collect()
            })
        };

        let mut stats = SolveStats::default();
        let mut best: Option<(u64, Selection)> = None;
        for (part, part_stats) in parts {
            stats.absorb(&part_stats);
            if let Some((mask, sel)) = part {
                let better = match &best {
                    None => true,
                    Some((bm, bs)) => sel.value > bs.value || (sel.value == bs.value && mask < *bm),
                };
                if better {
                    best = Some((mask, sel));
                }
            }
        }

        match best {
            None => Ok(SolveResult {
                value: 0,
                jit_set: Vec::new(),
                witness: Schedule::empty(self.inst),
                stats,
            }),
            Some((_, sel)) => {
                // M_1 packed without idle time in EDD order, M_2 at (d - p2, d].
                let witness = build_witness(self.inst, &sel.jobs, std::slice::from_ref(&sel.jobs))?
                    .ok_or_else(|| {
                        Error::Internal(format!("{} witness failed verification", self.mode.name()))
                    })?;
                Ok(SolveResult::from_witness(self.inst, &sel.jobs, witness, stats))
            }
        }
    }
}
