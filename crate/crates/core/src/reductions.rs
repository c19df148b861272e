//! kSUM to JIT flow-shop constructions.
//!
//! Both kSUM constructions build `k` groups of `h` jobs, one job per value
//! `x_j` in every group, with one due date per group, plus one or two heavy
//! "anchor" jobs that any schedule reaching the threshold must contain. The
//! anchors leave room for exactly `B` units of group work, so the threshold
//! is reachable iff `k` values (repetition allowed) sum to `B`.
//!
//! Note on the two-machine threshold: the anchor weight is `k²(T+1)²` and
//! the threshold is `kT + B + k²(T+1)²` throughout this module. One form of
//! the original argument writes the anchor term as `T²(k+1)²` for the no
//! direction; that form is not used here.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{checked_add, checked_mul, checked_sub, Error, Result};
use crate::model::{Instance, Job, Schedule, Time};
use crate::oracle::{solve_ksum, KSumInstance};
use crate::solver_xp::solve_xp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    KsumF2,
    KsumF3,
    F2F3,
}

/// Where a generated instance came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub construction: Construction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<KSumInstance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_t: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedInstance {
    pub instance: Instance,
    /// Decision bound on the total JIT weight.
    pub threshold: i64,
    /// `T`, the sum of the source values.
    pub big_t: i64,
    pub provenance: Provenance,
}

/// Which preconditions [`reduce_ksum_to_f3_with`] enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum F3Checks {
    /// `T > B` and `T > k`, the bounds under which the construction is
    /// known to be an equivalence.
    Strict,
    /// Only what keeps every generated number positive: `B < kT` and each
    /// value below `T`. The source may also have `k >= h`.
    Construction,
}

/// Index of job `J_ij` (`group` and `value` zero based) in the generated list.
pub fn group_job(h: usize, group: usize, value: usize) -> usize {
    group * h + value
}

fn anchor_weight(k: i64, big_t: i64) -> Result<i64> {
    let t1 = checked_add(big_t, 1, "T + 1")?;
    let kt = checked_mul(k, t1, "k(T + 1)")?;
    checked_mul(kt, kt, "k²(T + 1)²")
}

fn to_i64(k: usize) -> Result<i64> {
    i64::try_from(k).map_err(|_| Error::Overflow(format!("k = {k}")))
}

/// Two-machine construction with unit `M_2` times and `k + 1` due dates.
///
/// Group `i` (1-based) jobs: `p = (x_j, 1)`, `w = T + x_j`, `d = iT`.
/// Anchor: `p = ((k+1)T - B, 1)`, `w = k²(T+1)²`, `d = (k+1)T + 1`.
/// Threshold `kT + B + k²(T+1)²`. Requires `B < T`.
pub fn reduce_ksum_to_f2(ks: &KSumInstance) -> Result<ReducedInstance> {
    ks.validate()?;
    let big_t = ks.total()?;
    let b = ks.target;
    if b >= big_t {
        return Err(Error::PreconditionViolated(format!(
            "B < T required, got B = {b}, T = {big_t}"
        )));
    }
    let k = to_i64(ks.k)?;
    let heavy = anchor_weight(k, big_t)?;
    let mut jobs = Vec::with_capacity(ks.k * ks.values.len() + 1);
    for i in 1..=k {
        let due = checked_mul(i, big_t, "iT")?;
        for (j, &x) in ks.values.iter().enumerate() {
            jobs.push(Job::new(
                format!("J{i}_{}", j + 1),
                vec![x, 1],
                due,
                checked_add(big_t, x, "T + x")?,
            ));
        }
    }
    let k1t = checked_mul(k + 1, big_t, "(k+1)T")?;
    jobs.push(Job::new(
        format!("J{}", jobs.len() + 1),
        vec![checked_sub(k1t, b, "(k+1)T - B")?, 1],
        checked_add(k1t, 1, "(k+1)T + 1")?,
        heavy,
    ));
    let kt = checked_mul(k, big_t, "kT")?;
    let threshold = checked_add(checked_add(kt, b, "kT + B")?, heavy, "threshold")?;
    Ok(ReducedInstance {
        instance: Instance::new(2, jobs)?,
        threshold,
        big_t,
        provenance: Provenance {
            construction: Construction::KsumF2,
            source: Some(ks.clone()),
            threshold: Some(threshold),
            big_t: Some(big_t),
        },
    })
}

/// Lifts a two-machine instance to three machines with unit `M_1` times:
/// `p = (1, p1, p2)`, same weight, due date `d + 1`. JIT-feasible sets are
/// preserved exactly.
pub fn reduce_f2_to_f3(inst: &Instance) -> Result<Instance> {
    inst.validate()?;
    if inst.machines != 2 {
        return Err(Error::UnsupportedMachineCount {
            solver: "f2-f3",
            supported: "exactly 2",
            found: inst.machines,
        });
    }
    let jobs = inst
        .jobs
        .iter()
        .map(|j| {
            Ok(Job::new(
                j.id.clone(),
                vec![1, j.proc[0], j.proc[1]],
                checked_add(j.due, 1, "d + 1")?,
                j.weight,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(3, jobs)
}

/// [`reduce_f2_to_f3`] on a reduced instance, keeping threshold and source.
pub fn lift_reduced(red: &ReducedInstance) -> Result<ReducedInstance> {
    Ok(ReducedInstance {
        instance: reduce_f2_to_f3(&red.instance)?,
        threshold: red.threshold,
        big_t: red.big_t,
        provenance: Provenance {
            construction: Construction::F2F3,
            ..red.provenance.clone()
        },
    })
}

pub fn reduce_ksum_to_f3(ks: &KSumInstance) -> Result<ReducedInstance> {
    reduce_ksum_to_f3_with(ks, F3Checks::Strict)
}

/// Three-machine construction with `k + 2` due dates and three weights.
///
/// Group `i` (1-based) jobs: `p = (x_j, T - x_j, 1)`, `w = T`,
/// `d = kT + i + 1`. First anchor: `p = (1, B, 1)`, `d = B + 2`. Second
/// anchor: `p = (kT - B, kT, 1)`, `d = 2kT + 2`. Both anchors weigh
/// `k²(T+1)²`; threshold `kT + 2k²(T+1)²`.
pub fn reduce_ksum_to_f3_with(ks: &KSumInstance, checks: F3Checks) -> Result<ReducedInstance> {
    match checks {
        F3Checks::Strict => ks.validate()?,
        F3Checks::Construction => ks.validate_positive()?,
    }
    let big_t = ks.total()?;
    let b = ks.target;
    let k = to_i64(ks.k)?;
    let kt = checked_mul(k, big_t, "kT")?;
    if checks == F3Checks::Strict {
        if big_t <= b {
            return Err(Error::PreconditionViolated(format!(
                "T > B required, got T = {big_t}, B = {b}"
            )));
        }
        if big_t <= k {
            return Err(Error::PreconditionViolated(format!(
                "T > k required, got T = {big_t}, k = {k}"
            )));
        }
    }
    if b >= kt {
        return Err(Error::PreconditionViolated(format!(
            "B < kT required, got B = {b}, kT = {kt}"
        )));
    }
    if let Some(x) = ks.values.iter().find(|&&x| x >= big_t) {
        return Err(Error::PreconditionViolated(format!(
            "every value must be below T = {big_t}, got {x}"
        )));
    }
    let heavy = anchor_weight(k, big_t)?;
    let mut jobs = Vec::with_capacity(ks.k * ks.values.len() + 2);
    for i in 1..=k {
        let due = checked_add(kt, i + 1, "kT + i + 1")?;
        for (j, &x) in ks.values.iter().enumerate() {
            jobs.push(Job::new(
                format!("J{i}_{}", j + 1),
                vec![x, big_t - x, 1],
                due,
                big_t,
            ));
        }
    }
    jobs.push(Job::new(
        format!("J{}", jobs.len() + 1),
        vec![1, b, 1],
        checked_add(b, 2, "B + 2")?,
        heavy,
    ));
    let two_kt = checked_mul(2, kt, "2kT")?;
    jobs.push(Job::new(
        format!("J{}", jobs.len() + 1),
        vec![kt - b, kt, 1],
        checked_add(two_kt, 2, "2kT + 2")?,
        heavy,
    ));
    let threshold = checked_add(kt, checked_mul(2, heavy, "2k²(T+1)²")?, "threshold")?;
    Ok(ReducedInstance {
        instance: Instance::new(3, jobs)?,
        threshold,
        big_t,
        provenance: Provenance {
            construction: Construction::KsumF3,
            source: Some(ks.clone()),
            threshold: Some(threshold),
            big_t: Some(big_t),
        },
    })
}

fn check_picks(ks: &KSumInstance, picks: &[usize]) -> Result<()> {
    if picks.len() != ks.k || picks.iter().any(|&p| p >= ks.values.len()) {
        return Err(Error::PreconditionViolated(format!(
            "expected {} value indices below {}",
            ks.k,
            ks.values.len()
        )));
    }
    Ok(())
}

/// The schedule a kSUM solution induces on the two-machine construction:
/// group job `i` runs on `M_1` right after group job `i - 1` and on `M_2`
/// at `(iT - 1, iT]`; the anchor follows on `M_1` from `B` and sits at
/// `((k+1)T, (k+1)T + 1]` on `M_2`.
///
/// `picks[i]` is the value index chosen for group `i`. The schedule is
/// returned unverified.
pub fn ksum_f2_witness(red: &ReducedInstance, ks: &KSumInstance, picks: &[usize]) -> Result<Schedule> {
    check_picks(ks, picks)?;
    let h = ks.values.len();
    let big_t = red.big_t;
    let anchor = ks.k * h;
    let mut starts = BTreeMap::new();
    let mut order = Vec::with_capacity(ks.k + 1);
    let mut load: Time = 0;
    for (i, &v) in picks.iter().enumerate() {
        let j = group_job(h, i, v);
        let due = (i as i64 + 1) * big_t;
        starts.insert(j, vec![load, due - 1]);
        load += ks.values[v];
        order.push(j);
    }
    let k1t = (ks.k as i64 + 1) * big_t;
    starts.insert(anchor, vec![ks.target, k1t]);
    order.push(anchor);
    let orders = vec![order.clone(); 2];
    Ok(Schedule::from_parts(&red.instance, &order, &orders, &starts))
}

/// The schedule a kSUM solution induces on the three-machine construction.
/// All machines share the order: first anchor, group jobs `1..k`, second
/// anchor. With `S_i` the prefix sum of the picked values:
///
/// * first anchor: `(0,1]`, `(1,B+1]`, `(B+1,B+2]`;
/// * group job `i`: `(1+S_{i-1}, 1+S_i]`, `(B+1+(i-1)T-S_{i-1}, B+1+iT-S_i]`,
///   `(kT+i, kT+i+1]`;
/// * second anchor: `(B+1, kT+1]`, `(kT+1, 2kT+1]`, `(2kT+1, 2kT+2]`.
pub fn ksum_f3_witness(red: &ReducedInstance, ks: &KSumInstance, picks: &[usize]) -> Result<Schedule> {
    check_picks(ks, picks)?;
    let h = ks.values.len();
    let big_t = red.big_t;
    let b = ks.target;
    let k = ks.k as i64;
    let first = ks.k * h;
    let second = first + 1;
    let mut starts = BTreeMap::new();
    let mut order = vec![first];
    starts.insert(first, vec![0, 1, b + 1]);
    let mut prefix: Time = 0;
    for (i, &v) in picks.iter().enumerate() {
        let j = group_job(h, i, v);
        let i1 = i as i64 + 1;
        starts.insert(
            j,
            vec![1 + prefix, b + 1 + (i1 - 1) * big_t - prefix, k * big_t + i1],
        );
        prefix += ks.values[v];
        order.push(j);
    }
    starts.insert(second, vec![b + 1, k * big_t + 1, 2 * k * big_t + 1]);
    order.push(second);
    let orders = vec![order.clone(); 3];
    Ok(Schedule::from_parts(&red.instance, &order, &orders, &starts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    F2,
    F3,
}

/// Outcome of checking one construction end to end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub target: Target,
    pub ksum_answer: bool,
    /// Witness values when `ksum_answer` holds.
    pub ksum_witness: Option<Vec<i64>>,
    pub threshold: i64,
    pub sched_value: i64,
    /// Size of the optimal JIT set found.
    pub jit_size: usize,
    /// `ksum_answer` iff `sched_value >= threshold`.
    pub pass: bool,
}

/// Decides `ks` by brute force, solves the generated instance exactly with
/// the XP solver and compares the two answers.
pub fn check_reduction_equivalence(ks: &KSumInstance, target: Target) -> Result<EquivalenceReport> {
    let red = match target {
        Target::F2 => reduce_ksum_to_f2(ks)?,
        Target::F3 => reduce_ksum_to_f3(ks)?,
    };
    equivalence_report(ks, &red, target)
}

/// As [`check_reduction_equivalence`] for an already generated instance.
pub fn equivalence_report(
    ks: &KSumInstance,
    red: &ReducedInstance,
    target: Target,
) -> Result<EquivalenceReport> {
    let witness = solve_ksum(ks)?;
    let solved = solve_xp(&red.instance)?;
    let ksum_answer = witness.is_some();
    Ok(EquivalenceReport {
        target,
        ksum_answer,
        ksum_witness: witness.map(|w| w.iter().map(|&i| ks.values[i]).collect()),
        threshold: red.threshold,
        sched_value: solved.value,
        jit_size: solved.jit_set.len(),
        pass: ksum_answer == (solved.value >= red.threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::verify_schedule;

    fn ks(values: &[i64], k: usize, b: i64) -> KSumInstance {
        KSumInstance::new(values.to_vec(), k, b).unwrap()
    }

    #[test]
    fn f2_rejects_b_at_t() {
        assert!(matches!(
            reduce_ksum_to_f2(&ks(&[1, 2], 1, 3)).unwrap_err(),
            Error::PreconditionViolated(_)
        ));
    }

    #[test]
    fn f2_small_layout() {
        let red = reduce_ksum_to_f2(&ks(&[1, 2, 4], 2, 3)).unwrap();
        let jobs = &red.instance.jobs;
        assert_eq!(jobs.len(), 7);
        assert_eq!(red.big_t, 7);
        assert_eq!((jobs[0].proc.clone(), jobs[0].weight, jobs[0].due), (vec![1, 1], 8, 7));
        let anchor = &jobs[6];
        assert_eq!((anchor.proc.clone(), anchor.weight, anchor.due), (vec![18, 1], 256, 22));
        assert_eq!(red.threshold, 273);
    }

    #[test]
    fn f2_five_values() {
        let red = reduce_ksum_to_f2(&ks(&[2, 3, 5, 7, 8], 3, 12)).unwrap();
        let anchor = red.instance.jobs.last().unwrap();
        assert_eq!(red.instance.jobs.len(), 16);
        assert_eq!((anchor.proc[0], anchor.due, anchor.weight), (88, 101, 6084));
        assert_eq!(red.threshold, 6171);
    }

    #[test]
    fn f3_lifting_maps_fields() {
        let inst = Instance::from_rows(2, &[(&[2, 1], 3, 5)]).unwrap();
        let lifted = reduce_f2_to_f3(&inst).unwrap();
        assert_eq!(lifted.machines, 3);
        assert_eq!(lifted.jobs[0].proc, vec![1, 2, 1]);
        assert_eq!((lifted.jobs[0].due, lifted.jobs[0].weight), (4, 5));
        assert!(reduce_f2_to_f3(&Instance::new(2, vec![]).unwrap())
            .unwrap()
            .is_empty());
        assert!(reduce_f2_to_f3(&lifted).is_err());
    }

    #[test]
    fn f3_rejects_t_equal_b() {
        let err = reduce_ksum_to_f3(&ks(&[1, 2], 1, 3)).unwrap_err();
        assert!(matches!(err, Error::PreconditionViolated(ref s) if s.contains("T > B")));
    }

    #[test]
    fn f3_small_layout() {
        let red = reduce_ksum_to_f3(&ks(&[1, 2, 4], 2, 3)).unwrap();
        let jobs = &red.instance.jobs;
        assert_eq!(jobs.len(), 8);
        assert_eq!((jobs[0].proc.clone(), jobs[0].weight, jobs[0].due), (vec![1, 6, 1], 7, 16));
        assert_eq!((jobs[6].proc.clone(), jobs[6].weight, jobs[6].due), (vec![1, 3, 1], 256, 5));
        assert_eq!((jobs[7].proc.clone(), jobs[7].weight, jobs[7].due), (vec![11, 14, 1], 256, 30));
        assert_eq!(red.threshold, 526);
    }

    #[test]
    fn construction_checks_allow_b_equal_t() {
        let source = ks(&[1, 2], 1, 3);
        assert!(reduce_ksum_to_f3_with(&source, F3Checks::Construction).is_err());
        let source = KSumInstance {
            values: vec![1, 2],
            k: 2,
            target: 3,
        };
        assert!(reduce_ksum_to_f3(&source).is_err());
        let red = reduce_ksum_to_f3_with(&source, F3Checks::Construction).unwrap();
        assert_eq!(red.threshold, 134);
    }

    #[test]
    fn witnesses_verify_and_hit_threshold() {
        let source = ks(&[1, 2, 4], 2, 3);
        let red = reduce_ksum_to_f2(&source).unwrap();
        let w = ksum_f2_witness(&red, &source, &[0, 1]).unwrap();
        assert!(verify_schedule(&red.instance, &w).unwrap().is_feasible());
        assert_eq!(w.value(&red.instance).unwrap(), red.threshold);

        let red = reduce_ksum_to_f3(&source).unwrap();
        let w = ksum_f3_witness(&red, &source, &[1, 0]).unwrap();
        assert!(verify_schedule(&red.instance, &w).unwrap().is_feasible());
        assert_eq!(w.value(&red.instance).unwrap(), red.threshold);
    }

    #[test]
    fn equivalence_examples() {
        let r = check_reduction_equivalence(&ks(&[1, 2, 4], 2, 3), Target::F2).unwrap();
        assert!(r.pass && r.ksum_answer);
        assert!(r.sched_value >= 273);

        let r = check_reduction_equivalence(&ks(&[1, 4, 9], 2, 6), Target::F2).unwrap();
        assert!(r.pass && !r.ksum_answer);
        assert!(r.sched_value < r.threshold);

        assert!(check_reduction_equivalence(&ks(&[1, 2], 1, 3), Target::F2).is_err());
    }

    #[test]
    fn regeneration_is_identical() {
        let source = ks(&[2, 3, 5, 7, 8], 3, 12);
        assert_eq!(reduce_ksum_to_f2(&source).unwrap(), reduce_ksum_to_f2(&source).unwrap());
        assert_eq!(reduce_ksum_to_f3(&source).unwrap(), reduce_ksum_to_f3(&source).unwrap());
    }
}
