//! Instances, schedules and the exact feasibility semantics of JIT flow-shop
//! scheduling.
//!
//! Every job visits machines `M_1 .. M_m` in order. A job is *just in time*
//! when its operation on the last machine completes exactly at its due date;
//! all other jobs are rejected. Operations occupy half-open integer intervals
//! `(start, start + p]`, so two operations on one machine are compatible iff
//! those intervals are disjoint.
//!
//! Machines are indexed from zero in the API and printed as `M1 .. Mm`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{checked_add, Error, Result};

/// Time points and processing times.
pub type Time = i64;
/// Job gains and objective values.
pub type Weight = i64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub String);

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for JobId {
    fn from(s: &str) -> Self {
        JobId(s.to_owned())
    }
}

impl From<String> for JobId {
    fn from(s: String) -> Self {
        JobId(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: JobId,
    /// Processing time on each machine, `proc[i]` for `M_{i+1}`.
    #[serde(rename = "p")]
    pub proc: Vec<Time>,
    #[serde(rename = "d")]
    pub due: Time,
    #[serde(rename = "w")]
    pub weight: Weight,
}

impl Job {
    pub fn new(id: impl Into<JobId>, proc: Vec<Time>, due: Time, weight: Weight) -> Self {
        Job {
            id: id.into(),
            proc,
            due,
            weight,
        }
    }

    /// Total processing time over all machines.
    pub fn route_length(&self) -> Time {
        self.proc.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub machines: usize,
    pub jobs: Vec<Job>,
}

impl Instance {
    /// Builds an instance and validates it.
    pub fn new(machines: usize, jobs: Vec<Job>) -> Result<Self> {
        let inst = Instance { machines, jobs };
        validate_instance(&inst)?;
        Ok(inst)
    }

    /// Builds an instance with ids `J1 .. Jn` from `(proc, due, weight)` rows.
    pub fn from_rows(machines: usize, rows: &[(&[Time], Time, Weight)]) -> Result<Self> {
        let jobs = rows
            .iter()
            .enumerate()
            .map(|(i, (p, d, w))| Job::new(format!("J{}", i + 1), p.to_vec(), *d, *w))
            .collect();
        Instance::new(machines, jobs)
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        validate_instance(self)
    }

    /// Map from job id to position in `jobs`.
    pub fn id_index(&self) -> HashMap<&JobId, usize> {
        self.jobs.iter().enumerate().map(|(i, j)| (&j.id, i)).collect()
    }

    pub fn total_weight(&self, jobs: &[usize]) -> Weight {
        jobs.iter().map(|&j| self.jobs[j].weight).sum()
    }

    pub fn ids(&self, jobs: &[usize]) -> Vec<JobId> {
        jobs.iter().map(|&j| self.jobs[j].id.clone()).collect()
    }

    /// Number of distinct due dates, the parameter `#d`.
    pub fn distinct_dues(&self) -> usize {
        self.jobs.iter().map(|j| j.due).collect::<HashSet<_>>().len()
    }
}

/// Checks every instance invariant: at least one machine, `m` positive
/// processing times per job, positive due dates and weights, unique ids.
///
/// Also rejects instances whose grand total of all numeric fields does not
/// fit in [`Time`]; every sum a solver forms is bounded by that total, so
/// downstream arithmetic on a validated instance cannot overflow.
pub fn validate_instance(inst: &Instance) -> Result<()> {
    if inst.machines == 0 {
        return Err(Error::NonPositiveValue {
            what: "machine count".into(),
            value: 0,
        });
    }
    let mut seen = HashSet::with_capacity(inst.jobs.len());
    let mut total: i64 = 0;
    for job in &inst.jobs {
        if job.proc.len() != inst.machines {
            return Err(Error::ProcLengthMismatch {
                job: job.id.clone(),
                expected: inst.machines,
                found: job.proc.len(),
            });
        }
        for (i, &p) in job.proc.iter().enumerate() {
            if p < 1 {
                return Err(Error::NonPositiveValue {
                    what: format!("job {} processing time on M{}", job.id, i + 1),
                    value: p,
                });
            }
            total = checked_add(total, p, "instance total")?;
        }
        if job.due < 1 {
            return Err(Error::NonPositiveValue {
                what: format!("job {} due date", job.id),
                value: job.due,
            });
        }
        if job.weight < 1 {
            return Err(Error::NonPositiveValue {
                what: format!("job {} weight", job.id),
                value: job.weight,
            });
        }
        total = checked_add(total, job.due, "instance total")?;
        total = checked_add(total, job.weight, "instance total")?;
        if !seen.insert(&job.id) {
            return Err(Error::DuplicateJobId(job.id.clone()));
        }
    }
    Ok(())
}

/// Positions of `jobs` sorted by nondecreasing due date, ties by position.
pub fn edd_order(jobs: &[Job]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by_key(|&j| jobs[j].due);
    order
}

/// EDD order of a subset of job indices, ties by job index.
pub fn edd_order_of(inst: &Instance, set: &[usize]) -> Vec<usize> {
    let mut order = set.to_vec();
    order.sort_by_key(|&j| (inst.jobs[j].due, j));
    order
}

/// ASAP completion times on machines `M_1 .. M_{m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsapTimes {
    /// Job index to completion times, one entry per timed machine.
    pub completions: BTreeMap<usize, Vec<Time>>,
}

impl AsapTimes {
    pub fn completion(&self, job: usize, machine: usize) -> Option<Time> {
        self.completions.get(&job).and_then(|c| c.get(machine).copied())
    }
}

fn check_jit_set(inst: &Instance, jit_set: &[usize]) -> Result<()> {
    let mut seen = HashSet::with_capacity(jit_set.len());
    for &j in jit_set {
        if j >= inst.jobs.len() || !seen.insert(j) {
            return Err(Error::InvalidJobIndex(j));
        }
    }
    Ok(())
}

fn check_perm(jit_set: &[usize], perm: &[usize], machine: usize) -> Result<()> {
    let mut a = jit_set.to_vec();
    let mut b = perm.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(Error::PermSetMismatch { machine: machine + 1 });
    }
    Ok(())
}

/// ASAP completions of one machine: `row[j]` for every `j` in `order`, given
/// the previous machine's completions (`None` for the first machine).
pub(crate) fn asap_row(
    jobs: &[Job],
    machine: usize,
    order: &[usize],
    prev: Option<&[Time]>,
    row: &mut [Time],
) {
    let mut t: Time = 0;
    for &j in order {
        let ready = prev.map_or(0, |p| p[j]);
        t = t.max(ready) + jobs[j].proc[machine];
        row[j] = t;
    }
}

/// Fills `table[i]` with ASAP completions for each machine `i` that has an
/// order in `orders`.
pub(crate) fn asap_fill(jobs: &[Job], orders: &[&[usize]], table: &mut [Vec<Time>]) {
    for (i, order) in orders.iter().enumerate() {
        let (before, rest) = table.split_at_mut(i);
        let prev = before.last().map(|r| r.as_slice());
        asap_row(jobs, i, order, prev, &mut rest[0]);
    }
}

/// Simulates machines `M_1 .. M_{m-1}` as soon as possible: each operation
/// starts at the later of its machine predecessor's completion and its own
/// completion on the previous machine. The last machine is not timed here.
pub fn asap_times(inst: &Instance, jit_set: &[usize], perms: &[Vec<usize>]) -> Result<AsapTimes> {
    check_jit_set(inst, jit_set)?;
    let timed = inst.machines - 1;
    if perms.len() != timed {
        return Err(Error::PermSetMismatch {
            machine: perms.len().min(timed) + 1,
        });
    }
    for (i, perm) in perms.iter().enumerate() {
        check_perm(jit_set, perm, i)?;
    }
    let orders: Vec<&[usize]> = perms.iter().map(|p| p.as_slice()).collect();
    let mut table = vec![vec![0; inst.jobs.len()]; timed];
    asap_fill(&inst.jobs, &orders, &mut table);
    let completions = jit_set
        .iter()
        .map(|&j| (j, table.iter().map(|row| row[j]).collect()))
        .collect();
    Ok(AsapTimes { completions })
}

/// A selected JIT set with per-machine processing orders and start times.
///
/// `permutations[i]` is the order of the JIT jobs on machine `i`, and
/// `starts[id][i]` the start of that job's operation on machine `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub jit_set: Vec<JobId>,
    pub rejected: Vec<JobId>,
    pub permutations: Vec<Vec<JobId>>,
    pub starts: BTreeMap<JobId, Vec<Time>>,
}

/// One operation of a schedule, `(start, end]` on some machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub job: JobId,
    pub start: Time,
    pub end: Time,
}

impl Schedule {
    /// The schedule that rejects every job.
    pub fn empty(inst: &Instance) -> Self {
        Schedule {
            jit_set: Vec::new(),
            rejected: inst.jobs.iter().map(|j| j.id.clone()).collect(),
            permutations: vec![Vec::new(); inst.machines],
            starts: BTreeMap::new(),
        }
    }

    /// Assembles a schedule from job indices. `orders` holds one order per
    /// machine and `starts[j]` the per-machine start times of job `j`.
    pub fn from_parts(
        inst: &Instance,
        jit_set: &[usize],
        orders: &[Vec<usize>],
        starts: &BTreeMap<usize, Vec<Time>>,
    ) -> Self {
        let mut jit: Vec<usize> = jit_set.to_vec();
        jit.sort_unstable();
        let chosen: HashSet<usize> = jit.iter().copied().collect();
        Schedule {
            jit_set: inst.ids(&jit),
            rejected: (0..inst.jobs.len())
                .filter(|j| !chosen.contains(j))
                .map(|j| inst.jobs[j].id.clone())
                .collect(),
            permutations: orders.iter().map(|o| inst.ids(o)).collect(),
            starts: starts
                .iter()
                .map(|(&j, s)| (inst.jobs[j].id.clone(), s.clone()))
                .collect(),
        }
    }

    /// Sum of weights over the JIT set. Unknown ids are an error.
    pub fn value(&self, inst: &Instance) -> Result<Weight> {
        let index = inst.id_index();
        self.jit_set.iter().try_fold(0, |acc, id| {
            let j = index
                .get(id)
                .ok_or_else(|| Error::UnknownJobId(id.clone()))?;
            checked_add(acc, inst.jobs[*j].weight, "schedule value")
        })
    }

    /// Operations per machine in permutation order.
    pub fn operations(&self, inst: &Instance) -> Result<Vec<Vec<Operation>>> {
        let index = inst.id_index();
        self.permutations
            .iter()
            .enumerate()
            .map(|(i, perm)| {
                perm.iter()
                    .map(|id| {
                        let j = *index
                            .get(id)
                            .ok_or_else(|| Error::UnknownJobId(id.clone()))?;
                        let start = self
                            .starts
                            .get(id)
                            .and_then(|s| s.get(i))
                            .copied()
                            .ok_or_else(|| {
                                Error::PreconditionViolated(format!(
                                    "job {id} has no start time on M{}",
                                    i + 1
                                ))
                            })?;
                        let p = inst.jobs[j].proc.get(i).copied().unwrap_or(0);
                        Ok(Operation {
                            job: id.clone(),
                            start,
                            end: start + p,
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// The first constraint a schedule violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateJob(JobId),
    RejectedSetMismatch,
    MachineCountMismatch { expected: usize, found: usize },
    PermutationNotBijection { machine: usize },
    MissingStarts(JobId),
    StartsForRejectedJob(JobId),
    NegativeStart { job: JobId, machine: usize },
    NotJustInTime { job: JobId, completion: Time, due: Time },
    RouteViolation { job: JobId, machine: usize },
    MachineOverlap { machine: usize, first: JobId, second: JobId },
    PermutationOrderMismatch { machine: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateJob(id) => write!(f, "job {id} appears twice in the JIT set"),
            Violation::RejectedSetMismatch => {
                write!(f, "rejected set is not the complement of the JIT set")
            }
            Violation::MachineCountMismatch { expected, found } => {
                write!(f, "expected {expected} machine orders, found {found}")
            }
            Violation::PermutationNotBijection { machine } => {
                write!(f, "order on M{machine} is not a permutation of the JIT set")
            }
            Violation::MissingStarts(id) => write!(f, "job {id} lacks start times"),
            Violation::StartsForRejectedJob(id) => {
                write!(f, "rejected job {id} has start times")
            }
            Violation::NegativeStart { job, machine } => {
                write!(f, "job {job} starts before time 0 on M{machine}")
            }
            Violation::NotJustInTime {
                job,
                completion,
                due,
            } => write!(f, "job {job} completes at {completion}, due {due}"),
            Violation::RouteViolation { job, machine } => {
                write!(f, "job {job} starts on M{machine} before finishing the previous machine")
            }
            Violation::MachineOverlap {
                machine,
                first,
                second,
            } => write!(f, "jobs {first} and {second} overlap on M{machine}"),
            Violation::PermutationOrderMismatch { machine } => {
                write!(f, "start times on M{machine} disagree with its order")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verification {
    Feasible,
    Infeasible(Violation),
}

impl Verification {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Verification::Feasible)
    }
}

/// Checks a schedule against the exact JIT semantics.
///
/// Constraints are checked in a fixed order (structure, nonnegative starts,
/// due-date exactness, route precedence, machine disjointness, order
/// consistency) and the first failure is reported.
pub fn verify_schedule(inst: &Instance, sched: &Schedule) -> Result<Verification> {
    use Verification::Infeasible as Bad;

    let index = inst.id_index();
    let lookup = |id: &JobId| -> Result<usize> {
        index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownJobId(id.clone()))
    };
    let all_ids = sched
        .jit_set
        .iter()
        .chain(&sched.rejected)
        .chain(sched.permutations.iter().flatten())
        .chain(sched.starts.keys());
    for id in all_ids {
        lookup(id)?;
    }

    let mut jit = HashSet::with_capacity(sched.jit_set.len());
    for id in &sched.jit_set {
        if !jit.insert(id) {
            return Ok(Bad(Violation::DuplicateJob(id.clone())));
        }
    }
    let rejected: HashSet<&JobId> = sched.rejected.iter().collect();
    let complement_ok = rejected.len() == sched.rejected.len()
        && rejected.len() + jit.len() == inst.jobs.len()
        && rejected.iter().all(|id| !jit.contains(id));
    if !complement_ok {
        return Ok(Bad(Violation::RejectedSetMismatch));
    }
    let m = inst.machines;
    if sched.permutations.len() != m {
        return Ok(Bad(Violation::MachineCountMismatch {
            expected: m,
            found: sched.permutations.len(),
        }));
    }
    for (i, perm) in sched.permutations.iter().enumerate() {
        let set: HashSet<&JobId> = perm.iter().collect();
        if perm.len() != jit.len() || set != jit {
            return Ok(Bad(Violation::PermutationNotBijection { machine: i + 1 }));
        }
    }
    if let Some(id) = sched.starts.keys().find(|id| !jit.contains(id)) {
        return Ok(Bad(Violation::StartsForRejectedJob(id.clone())));
    }
    for id in &sched.jit_set {
        match sched.starts.get(id) {
            Some(s) if s.len() == m => {}
            _ => return Ok(Bad(Violation::MissingStarts(id.clone()))),
        }
    }

    for id in &sched.jit_set {
        for (i, &s) in sched.starts[id].iter().enumerate() {
            if s < 0 {
                return Ok(Bad(Violation::NegativeStart {
                    job: id.clone(),
                    machine: i + 1,
                }));
            }
        }
    }
    for id in &sched.jit_set {
        let job = &inst.jobs[lookup(id)?];
        let completion = sched.starts[id][m - 1] + job.proc[m - 1];
        if completion != job.due {
            return Ok(Bad(Violation::NotJustInTime {
                job: id.clone(),
                completion,
                due: job.due,
            }));
        }
    }
    for id in &sched.jit_set {
        let job = &inst.jobs[lookup(id)?];
        let s = &sched.starts[id];
        for i in 1..m {
            if s[i] < s[i - 1] + job.proc[i - 1] {
                return Ok(Bad(Violation::RouteViolation {
                    job: id.clone(),
                    machine: i + 1,
                }));
            }
        }
    }
    let mut by_time: Vec<Vec<(Time, Time, &JobId)>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut ops: Vec<(Time, Time, &JobId)> = sched
            .jit_set
            .iter()
            .map(|id| {
                let s = sched.starts[id][i];
                Ok((s, s + inst.jobs[lookup(id)?].proc[i], id))
            })
            .collect::<Result<_>>()?;
        ops.sort();
        for w in ops.windows(2) {
            if w[1].0 < w[0].1 {
                return Ok(Bad(Violation::MachineOverlap {
                    machine: i + 1,
                    first: w[0].2.clone(),
                    second: w[1].2.clone(),
                }));
            }
        }
        by_time.push(ops);
    }
    for (i, ops) in by_time.iter().enumerate() {
        let in_time: Vec<&JobId> = ops.iter().map(|op| op.2).collect();
        let in_perm: Vec<&JobId> = sched.permutations[i].iter().collect();
        if in_time != in_perm {
            return Ok(Bad(Violation::PermutationOrderMismatch { machine: i + 1 }));
        }
    }
    Ok(Verification::Feasible)
}

/// Builds the schedule induced by `perms` on `M_1 .. M_{m-1}` (ASAP timing)
/// and EDD on the last machine, where each job occupies `(d - p, d]`.
///
/// Returns `Ok(None)` when the resulting schedule is not feasible.
pub fn build_witness(
    inst: &Instance,
    jit_set: &[usize],
    perms: &[Vec<usize>],
) -> Result<Option<Schedule>> {
    let asap = asap_times(inst, jit_set, perms)?;
    let m = inst.machines;
    let mut starts = BTreeMap::new();
    for &j in jit_set {
        let job = &inst.jobs[j];
        let mut s: Vec<Time> = (0..m - 1)
            .map(|i| asap.completions[&j][i] - job.proc[i])
            .collect();
        s.push(job.due - job.proc[m - 1]);
        starts.insert(j, s);
    }
    let mut orders = perms.to_vec();
    orders.push(edd_order_of(inst, jit_set));
    let sched = Schedule::from_parts(inst, jit_set, &orders, &starts);
    Ok(match verify_schedule(inst, &sched)? {
        Verification::Feasible => Some(sched),
        Verification::Infeasible(_) => None,
    })
}

/// Search counters reported by every solver.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Candidate JIT sets (or type subsets) visited, including pruned ones.
    pub subsets_enumerated: u64,
    /// Candidates that survived pruning and were checked for feasibility.
    pub subsets_evaluated: u64,
    /// Complete permutation tuples timed.
    pub permutations_tried: u64,
    pub elapsed: std::time::Duration,
}

impl SolveStats {
    pub(crate) fn absorb(&mut self, other: &SolveStats) {
        self.subsets_enumerated += other.subsets_enumerated;
        self.subsets_evaluated += other.subsets_evaluated;
        self.permutations_tried += other.permutations_tried;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub value: Weight,
    /// JIT job ids in instance order.
    pub jit_set: Vec<JobId>,
    pub witness: Schedule,
    pub stats: SolveStats,
}

impl SolveResult {
    pub(crate) fn from_witness(
        inst: &Instance,
        jit: &[usize],
        witness: Schedule,
        stats: SolveStats,
    ) -> Self {
        let mut jit = jit.to_vec();
        jit.sort_unstable();
        SolveResult {
            value: inst.total_weight(&jit),
            jit_set: inst.ids(&jit),
            witness,
            stats,
        }
    }
}
