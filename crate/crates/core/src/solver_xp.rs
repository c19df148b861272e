//! Exact solver parameterized by the number of distinct due dates `#d`.
//!
//! Jobs sharing a due date compete for the same slot on the last machine, so
//! a JIT set holds at most one job per due date. The solver walks every such
//! candidate set (`Π (|class| + 1)` of them) and, for each, searches the
//! processing orders on `M_1 .. M_{m-1}` with `M_1` and `M_2` sharing one
//! order and the last machine in EDD order. For two machines only the EDD
//! order is tried. Running time is `O(n^{#d+1} (#d!)^{m-2})`.

use std::thread;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{
    asap_row, build_witness, Instance, Schedule, SolveResult, SolveStats, Time, Weight,
};

/// Jobs sharing one due date, as indices into the instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DueClass {
    pub due: Time,
    pub members: Vec<usize>,
}

/// Partition of the jobs by due date, ascending; members in instance order.
pub fn due_classes(inst: &Instance) -> Vec<DueClass> {
    let mut classes: Vec<DueClass> = Vec::new();
    for j in crate::model::edd_order(&inst.jobs) {
        let due = inst.jobs[j].due;
        match classes.last_mut() {
            Some(c) if c.due == due => c.members.push(j),
            _ => classes.push(DueClass {
                due,
                members: vec![j],
            }),
        }
    }
    classes
}

/// Number of candidate JIT sets, `Π (|class| + 1)`.
pub fn candidate_count(classes: &[DueClass]) -> Result<u64> {
    classes.iter().try_fold(1u64, |acc, c| {
        acc.checked_mul(c.members.len() as u64 + 1).ok_or_else(|| {
            Error::Overflow("number of candidate JIT sets exceeds u64".into())
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XpOptions {
    /// Skip candidates whose total weight cannot beat the incumbent.
    pub prune: bool,
    /// Number of threads sharing the candidate space.
    pub workers: usize,
}

impl Default for XpOptions {
    fn default() -> Self {
        XpOptions {
            prune: true,
            workers: 1,
        }
    }
}

pub fn solve_xp(inst: &Instance) -> Result<SolveResult> {
    solve_xp_with(inst, &XpOptions::default())
}

pub fn solve_xp_with(inst: &Instance, opts: &XpOptions) -> Result<SolveResult> {
    let started = Instant::now();
    inst.validate()?;
    if inst.machines < 2 {
        return Err(Error::UnsupportedMachineCount {
            solver: "xp",
            supported: ">= 2",
            found: inst.machines,
        });
    }
    let search = Search::new(inst, opts.prune);
    let total = candidate_count(&search.classes)?;
    let workers = (opts.workers.max(1) as u64).min(total).max(1);
    let chunk = total.div_ceil(workers);

    let parts: Vec<(Option<Incumbent>, SolveStats)> = if workers == 1 {
        vec![search.scan(0, total)]
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let lo = w * chunk;
                    let hi = ((w + 1) * chunk).min(total);
                    let search = &search;
                    s.spawn(move || search.scan(lo, hi))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("xp worker panicked"))
                .collect()
        })
    };

    let mut stats = SolveStats::default();
    let mut best: Option<Incumbent> = None;
    for (part, part_stats) in parts {
        stats.absorb(&part_stats);
        if let Some(p) = part {
            let better = match &best {
                None => true,
                Some(b) => p.value > b.value || (p.value == b.value && p.index < b.index),
            };
            if better {
                best = Some(p);
            }
        }
    }
    stats.elapsed = started.elapsed();

    match best {
        None => Ok(SolveResult {
            value: 0,
            jit_set: Vec::new(),
            witness: Schedule::empty(inst),
            stats,
        }),
        Some(b) => {
            let witness = build_witness(inst, &b.chosen, &b.perms)?.ok_or_else(|| {
                Error::Internal("xp witness failed verification".into())
            })?;
            Ok(SolveResult::from_witness(inst, &b.chosen, witness, stats))
        }
    }
}

#[derive(Debug)]
struct Incumbent {
    index: u64,
    value: Weight,
    chosen: Vec<usize>,
    /// Orders for `M_1 .. M_{m-1}`.
    perms: Vec<Vec<usize>>,
}

struct Search<'a> {
    inst: &'a Instance,
    classes: Vec<DueClass>,
    prune: bool,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, prune: bool) -> Self {
        Search {
            inst,
            classes: due_classes(inst),
            prune,
        }
    }

    /// Mixed-radix digits of candidate `index`; class 0 is most significant
    /// and digit `|class|` means "no job from this class".
    fn decode(&self, mut index: u64) -> Vec<usize> {
        let mut digits = vec![0; self.classes.len()];
        for (c, class) in self.classes.iter().enumerate().rev() {
            let radix = class.members.len() as u64 + 1;
            digits[c] = (index % radix) as usize;
            index /= radix;
        }
        digits
    }

    fn advance(&self, digits: &mut [usize]) {
        for (c, class) in self.classes.iter().enumerate().rev() {
            digits[c] += 1;
            if digits[c] <= class.members.len() {
                return;
            }
            digits[c] = 0;
        }
    }

    fn scan(&self, lo: u64, hi: u64) -> (Option<Incumbent>, SolveStats) {
        let jobs = &self.inst.jobs;
        let m = self.inst.machines;
        let mut stats = SolveStats::default();
        let mut best: Option<Incumbent> = None;
        let mut opt: Weight = 0;
        let mut table = vec![vec![0 as Time; jobs.len()]; m - 1];
        let mut digits = self.decode(lo);
        let mut chosen = Vec::with_capacity(self.classes.len());

        for index in lo..hi {
            stats.subsets_enumerated += 1;
            chosen.clear();
            for (class, &d) in self.classes.iter().zip(&digits) {
                if let Some(&j) = class.members.get(d) {
                    chosen.push(j);
                }
            }
            self.advance(&mut digits);

            let value: Weight = chosen.iter().map(|&j| jobs[j].weight).sum();
            if self.prune && value <= opt {
                continue;
            }
            // Last machine: consecutive JIT jobs must not overlap, d_0 = 0.
            let mut prev_due: Time = 0;
            let packs = chosen.iter().all(|&j| {
                let fits = prev_due + jobs[j].proc[m - 1] <= jobs[j].due;
                prev_due = jobs[j].due;
                fits
            });
            if !packs {
                continue;
            }
            stats.subsets_evaluated += 1;
            if let Some(perms) = self.feasible_orders(&chosen, &mut table, &mut stats) {
                if value > opt {
                    opt = value;
                    best = Some(Incumbent {
                        index,
                        value,
                        chosen: chosen.clone(),
                        perms,
                    });
                }
            }
        }
        (best, stats)
    }

    /// Returns the first order tuple on `M_1 .. M_{m-1}` under which every
    /// job of `chosen` (EDD order) is ready for its last-machine slot.
    fn feasible_orders(
        &self,
        chosen: &[usize],
        table: &mut [Vec<Time>],
        stats: &mut SolveStats,
    ) -> Option<Vec<Vec<usize>>> {
        let m = self.inst.machines;
        if m == 2 {
            asap_row(&self.inst.jobs, 0, chosen, None, &mut table[0]);
            stats.permutations_tried += 1;
            return self.ready_for_last(chosen, &table[0]).then(|| vec![chosen.to_vec()]);
        }
        let slots = m - 2;
        let mut orders = vec![chosen.to_vec(); slots];
        if self.search_slot(0, chosen, &mut orders, table, stats) {
            let mut perms = Vec::with_capacity(m - 1);
            perms.push(orders[0].clone());
            perms.extend(orders);
            Some(perms)
        } else {
            None
        }
    }

    /// Slot 0 drives `M_1` and `M_2` with one shared order; slot `s > 0`
    /// drives `M_{s+2}`.
    fn search_slot(
        &self,
        slot: usize,
        chosen: &[usize],
        orders: &mut [Vec<usize>],
        table: &mut [Vec<Time>],
        stats: &mut SolveStats,
    ) -> bool {
        let jobs = &self.inst.jobs;
        let last_slot = orders.len() - 1;
        let mut pos: Vec<usize> = (0..chosen.len()).collect();
        loop {
            for (o, &p) in orders[slot].iter_mut().zip(&pos) {
                *o = chosen[p];
            }
            if slot == 0 {
                asap_row(jobs, 0, &orders[0], None, &mut table[0]);
                let (head, tail) = table.split_at_mut(1);
                asap_row(jobs, 1, &orders[0], Some(&head[0]), &mut tail[0]);
            } else {
                let machine = slot + 1;
                let (head, tail) = table.split_at_mut(machine);
                asap_row(jobs, machine, &orders[slot], Some(&head[machine - 1]), &mut tail[0]);
            }
            if slot == last_slot {
                stats.permutations_tried += 1;
                if self.ready_for_last(chosen, &table[slot + 1]) {
                    return true;
                }
            } else if self.search_slot(slot + 1, chosen, orders, table, stats) {
                return true;
            }
            if !next_permutation(&mut pos) {
                return false;
            }
        }
    }

    /// `C_j <= d_j - p_j` on the last machine for every chosen job, where
    /// `row` holds completions on `M_{m-1}`.
    fn ready_for_last(&self, chosen: &[usize], row: &[Time]) -> bool {
        let m = self.inst.machines;
        chosen.iter().all(|&j| {
            let job = &self.inst.jobs[j];
            row[j] <= job.due - job.proc[m - 1]
        })
    }
}

/// Advances `v` to its next lexicographic permutation; false after the last.
pub(crate) fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{verify_schedule, JobId};

    fn f3_three_jobs() -> Instance {
        Instance::from_rows(
            3,
            &[(&[1, 1, 1], 3, 5), (&[1, 1, 1], 3, 4), (&[1, 1, 1], 5, 3)],
        )
        .unwrap()
    }

    #[test]
    fn classes_group_by_due() {
        let inst = Instance::from_rows(2, &[(&[1, 1], 3, 1), (&[1, 1], 3, 1), (&[1, 1], 5, 1)])
            .unwrap();
        let classes = due_classes(&inst);
        assert_eq!(
            classes,
            vec![
                DueClass {
                    due: 3,
                    members: vec![0, 1]
                },
                DueClass {
                    due: 5,
                    members: vec![2]
                }
            ]
        );
        assert_eq!(candidate_count(&classes).unwrap(), 6);
    }

    #[test]
    fn classes_distinct_and_empty() {
        let inst = Instance::from_rows(
            1,
            &[(&[1], 4, 1), (&[1], 2, 1), (&[1], 3, 1), (&[1], 1, 1)],
        )
        .unwrap();
        let classes = due_classes(&inst);
        assert_eq!(classes.len(), 4);
        assert!(classes.windows(2).all(|w| w[0].due < w[1].due));
        assert!(due_classes(&Instance::new(2, vec![]).unwrap()).is_empty());
    }

    #[test]
    fn f3_three_job_example() {
        let inst = f3_three_jobs();
        let r = solve_xp(&inst).unwrap();
        assert_eq!(r.value, 8);
        assert_eq!(r.jit_set, vec![JobId::from("J1"), JobId::from("J3")]);
        assert!(verify_schedule(&inst, &r.witness).unwrap().is_feasible());
    }

    #[test]
    fn empty_instance_is_zero() {
        let r = solve_xp(&Instance::new(3, vec![]).unwrap()).unwrap();
        assert_eq!(r.value, 0);
        assert!(r.jit_set.is_empty());
        assert_eq!(r.stats.subsets_enumerated, 1);
    }

    #[test]
    fn single_machine_is_unsupported() {
        let inst = Instance::from_rows(1, &[(&[1], 1, 1)]).unwrap();
        assert!(matches!(
            solve_xp(&inst).unwrap_err(),
            Error::UnsupportedMachineCount { found: 1, .. }
        ));
    }

    #[test]
    fn enumerates_every_candidate() {
        let inst = f3_three_jobs();
        let r = solve_xp_with(
            &inst,
            &XpOptions {
                prune: false,
                workers: 1,
            },
        )
        .unwrap();
        assert_eq!(r.stats.subsets_enumerated, 3 * 2);
        assert_eq!(r.value, 8);
    }

    #[test]
    fn next_permutation_visits_all() {
        let mut v = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(v, vec![3, 2, 1, 0]);
        assert!(!next_permutation(&mut []));
    }

    #[test]
    fn workers_agree_with_sequential() {
        let inst = Instance::from_rows(
            3,
            &[
                (&[2, 1, 1], 6, 3),
                (&[1, 3, 1], 6, 4),
                (&[1, 1, 2], 9, 2),
                (&[2, 2, 1], 9, 5),
                (&[1, 1, 1], 4, 1),
            ],
        )
        .unwrap();
        let seq = solve_xp(&inst).unwrap();
        for workers in 2..6 {
            let par = solve_xp_with(
                &inst,
                &XpOptions {
                    prune: true,
                    workers,
                },
            )
            .unwrap();
            assert_eq!(par.value, seq.value);
            assert_eq!(par.jit_set, seq.jit_set);
            assert_eq!(par.stats.subsets_enumerated, seq.stats.subsets_enumerated);
        }
    }
}
