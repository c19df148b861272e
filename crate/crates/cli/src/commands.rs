//! The work behind each subcommand, kept free of argument parsing and I/O so
//! tests can call it directly.

use std::fmt::Write;
use std::time::Instant;

use clap::ValueEnum;
use jitshop_core::oracle::{solve_exhaustive_with, OracleOptions, PermutationSpace};
use jitshop_core::reductions::{
    ksum_f2_witness, ksum_f3_witness, lift_reduced, reduce_f2_to_f3, reduce_ksum_to_f2,
    reduce_ksum_to_f3_with, Construction, F3Checks, Provenance, ReducedInstance,
};
use jitshop_core::solver_fpt::{classify, solve_fpt, FptOptions, TypeMode};
use jitshop_core::solver_xp::{candidate_count, due_classes, solve_xp_with, XpOptions};
use jitshop_core::{
    solve_ksum, verify_schedule, Error, Instance, Job, KSumInstance, Result, SolveResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::format::InstanceDoc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Xp,
    FptDp1,
    FptDw,
    Oracle,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Xp => "xp",
            Algorithm::FptDp1 => "fpt-dp1",
            Algorithm::FptDw => "fpt-dw",
            Algorithm::Oracle => "oracle",
        }
    }
}

pub fn solve(inst: &Instance, algorithm: Algorithm, workers: usize) -> Result<SolveResult> {
    let workers = workers.max(1);
    match algorithm {
        Algorithm::Xp => solve_xp_with(
            inst,
            &XpOptions {
                workers,
                ..XpOptions::default()
            },
        ),
        Algorithm::FptDp1 | Algorithm::FptDw => {
            let mode = if algorithm == Algorithm::FptDp1 {
                TypeMode::DueP1
            } else {
                TypeMode::DueWeight
            };
            solve_fpt(
                inst,
                mode,
                &FptOptions {
                    workers,
                    ..FptOptions::default()
                },
            )
        }
        Algorithm::Oracle => solve_exhaustive_with(inst, &OracleOptions::default()),
    }
}

/// Human-readable summary: value, JIT set, and the `(start, end]` interval
/// of every operation per machine.
pub fn render_result(inst: &Instance, algorithm: Algorithm, res: &SolveResult) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "algorithm: {}", algorithm.name());
    let _ = writeln!(out, "value: {}", res.value);
    let ids: Vec<&str> = res.jit_set.iter().map(|id| id.0.as_str()).collect();
    let _ = writeln!(out, "jit set ({}): {}", ids.len(), ids.join(" "));
    for (m, ops) in res.witness.operations(inst)?.iter().enumerate() {
        let cells: Vec<String> = ops
            .iter()
            .map(|op| format!("{} ({}, {}]", op.job, op.start, op.end))
            .collect();
        let _ = writeln!(out, "M{}: {}", m + 1, cells.join("  "));
    }
    let s = &res.stats;
    let _ = writeln!(
        out,
        "subsets enumerated: {}, evaluated: {}, permutations tried: {}, elapsed: {:.3} ms",
        s.subsets_enumerated,
        s.subsets_evaluated,
        s.permutations_tried,
        s.elapsed.as_secs_f64() * 1e3
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// Reductions

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceKind {
    KsumF2,
    KsumF3,
    #[value(name = "f2-f3")]
    F2F3,
}

/// Builds the scheduling instance for a kSUM source.
///
/// `relaxed` only applies to the three-machine construction and skips the
/// `T > B`, `T > k` and `k < h` checks.
pub fn reduce_ksum(kind: ReduceKind, ks: &KSumInstance, relaxed: bool) -> Result<ReducedInstance> {
    match kind {
        ReduceKind::KsumF2 => reduce_ksum_to_f2(ks),
        ReduceKind::KsumF3 => reduce_ksum_to_f3_with(
            ks,
            if relaxed {
                F3Checks::Construction
            } else {
                F3Checks::Strict
            },
        ),
        ReduceKind::F2F3 => Err(Error::PreconditionViolated(
            "f2-f3 takes a two-machine instance, not a kSUM instance".into(),
        )),
    }
}

/// Lifts a two-machine document to three machines, carrying any recorded
/// threshold and source along.
pub fn lift_doc(doc: &InstanceDoc) -> Result<InstanceDoc> {
    match &doc.provenance {
        Some(p) if p.threshold.is_some() && p.big_t.is_some() => {
            let red = ReducedInstance {
                instance: doc.instance.clone(),
                threshold: p.threshold.unwrap_or_default(),
                big_t: p.big_t.unwrap_or_default(),
                provenance: p.clone(),
            };
            let lifted = lift_reduced(&red)?;
            Ok(InstanceDoc {
                instance: lifted.instance,
                provenance: Some(lifted.provenance),
            })
        }
        _ => Ok(InstanceDoc {
            instance: reduce_f2_to_f3(&doc.instance)?,
            provenance: Some(Provenance {
                construction: Construction::F2F3,
                source: None,
                threshold: None,
                big_t: None,
            }),
        }),
    }
}

// ---------------------------------------------------------------------------
// Cross-checking

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosscheckSpec {
    /// Number of random instances; instance `i` uses seed `first_seed + i`.
    pub seeds: u64,
    pub first_seed: u64,
    pub max_jobs: usize,
    pub machines: Vec<usize>,
    /// Upper bound for processing times.
    pub max_proc: i64,
    /// Upper bound for due dates and weights.
    pub max_value: i64,
    /// Largest `h` in the kSUM sweep; 0 skips the reduction checks.
    pub ksum_max_h: usize,
    pub ksum_max_value: i64,
    pub workers: usize,
}

impl Default for CrosscheckSpec {
    fn default() -> Self {
        CrosscheckSpec {
            seeds: 200,
            first_seed: 0,
            max_jobs: 8,
            machines: vec![2, 3],
            max_proc: 4,
            max_value: 12,
            ksum_max_h: 3,
            ksum_max_value: 4,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub seed: u64,
    pub machines: usize,
    pub jobs: usize,
    pub xp: i64,
    pub fpt_dp1: Option<i64>,
    pub fpt_dw: Option<i64>,
    pub oracle: i64,
    pub oracle_restricted: i64,
    /// Size of the oracle's optimal JIT set.
    pub jit_size: usize,
    /// Every returned witness passed verification and matched its value.
    pub witnesses_valid: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionCase {
    pub construction: Construction,
    pub source: KSumInstance,
    pub ksum_answer: bool,
    pub threshold: i64,
    pub value: i64,
    /// Largest JIT set among the schedules that were checked.
    pub max_jit_size: usize,
    /// `k + 1` for two machines, `k + 2` for three.
    pub jit_bound: usize,
    /// Value found by the exhaustive oracle, for instances small enough.
    pub oracle: Option<i64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub cases: Vec<CaseReport>,
    pub reductions: Vec<ReductionCase>,
    pub passed: usize,
    pub failed: usize,
}

impl CrosscheckReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

/// A random instance with `1 <= n <= max_jobs` jobs and `m` machines, all
/// values drawn uniformly.
pub fn random_instance(seed: u64, machines: &[usize], max_jobs: usize, max_proc: i64, max_value: i64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = machines[rng.gen_range(0..machines.len())];
    let n = rng.gen_range(1..=max_jobs.max(1));
    let jobs = (0..n)
        .map(|j| {
            let proc = (0..m).map(|_| rng.gen_range(1..=max_proc)).collect();
            let due = rng.gen_range(1..=max_value);
            let weight = rng.gen_range(1..=max_value);
            Job::new(format!("J{}", j + 1), proc, due, weight)
        })
        .collect();
    Instance::new(m, jobs).expect("random instance is valid")
}

fn witness_ok(inst: &Instance, res: &SolveResult) -> Result<bool> {
    Ok(verify_schedule(inst, &res.witness)?.is_feasible()
        && res.witness.value(inst)? == res.value
        && res.witness.jit_set == res.jit_set)
}

/// Runs every applicable solver on one instance and compares the optima.
pub fn crosscheck_instance(seed: u64, inst: &Instance, workers: usize) -> Result<CaseReport> {
    let mut results = vec![solve(inst, Algorithm::Xp, workers)?];
    let (fpt_dp1, fpt_dw) = if inst.machines == 2 {
        let a = solve(inst, Algorithm::FptDp1, workers)?;
        let b = solve(inst, Algorithm::FptDw, workers)?;
        let values = (Some(a.value), Some(b.value));
        results.push(a);
        results.push(b);
        values
    } else {
        (None, None)
    };
    let oracle = solve(inst, Algorithm::Oracle, 1)?;
    let restricted = solve_exhaustive_with(
        inst,
        &OracleOptions {
            space: PermutationSpace::SharedFirstEddLast,
            ..OracleOptions::default()
        },
    )?;
    results.push(oracle.clone());
    results.push(restricted.clone());

    let mut witnesses_valid = true;
    for r in &results {
        witnesses_valid &= witness_ok(inst, r)?;
    }
    let pass = witnesses_valid && results.iter().all(|r| r.value == oracle.value);
    Ok(CaseReport {
        seed,
        machines: inst.machines,
        jobs: inst.len(),
        xp: results[0].value,
        fpt_dp1,
        fpt_dw,
        oracle: oracle.value,
        oracle_restricted: restricted.value,
        jit_size: oracle.jit_set.len(),
        witnesses_valid,
        pass,
    })
}

/// Every kSUM instance with `2 <= h <= max_h` distinct values from
/// `1..=max_value`, every `1 <= k < h` and every target `1 <= B < T`.
pub fn ksum_corpus(max_h: usize, max_value: i64) -> Vec<KSumInstance> {
    let mut out = Vec::new();
    let universe: Vec<i64> = (1..=max_value).collect();
    for h in 2..=max_h {
        let mut idx: Vec<usize> = (0..h).collect();
        if h > universe.len() {
            break;
        }
        loop {
            let values: Vec<i64> = idx.iter().map(|&i| universe[i]).collect();
            let total: i64 = values.iter().sum();
            for k in 1..h {
                for target in 1..total {
                    out.push(KSumInstance {
                        values: values.clone(),
                        k,
                        target,
                    });
                }
            }
            // next h-combination of the universe
            let mut i = h;
            while i > 0 && idx[i - 1] == universe.len() - h + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..h {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

/// Checks one construction end to end on `ks`: kSUM answer against the
/// threshold test, the JIT-set size bound on every returned schedule, the
/// explicit witness when the answer is yes, and the oracle when
/// `oracle_cap` admits the instance.
pub fn crosscheck_reduction(
    construction: Construction,
    ks: &KSumInstance,
    oracle_cap: usize,
) -> Result<ReductionCase> {
    let (red, bound) = match construction {
        Construction::KsumF2 => (reduce_ksum_to_f2(ks)?, ks.k + 1),
        Construction::KsumF3 => (reduce_ksum_to_f3_with(ks, F3Checks::Strict)?, ks.k + 2),
        Construction::F2F3 => (lift_reduced(&reduce_ksum_to_f2(ks)?)?, ks.k + 1),
    };
    let inst = &red.instance;
    let picks = solve_ksum(ks)?;
    let mut results = vec![solve(inst, Algorithm::Xp, 1)?];
    if inst.machines == 2 {
        results.push(solve(inst, Algorithm::FptDp1, 1)?);
        results.push(solve(inst, Algorithm::FptDw, 1)?);
    }
    let oracle = if inst.len() <= oracle_cap {
        let r = solve_exhaustive_with(
            inst,
            &OracleOptions {
                cap: oracle_cap,
                ..OracleOptions::default()
            },
        )?;
        let v = r.value;
        results.push(r);
        Some(v)
    } else {
        None
    };
    let value = results[0].value;
    let mut pass = picks.is_some() == (value >= red.threshold);
    let mut max_jit_size = 0;
    for r in &results {
        max_jit_size = max_jit_size.max(r.jit_set.len());
        pass &= r.value == value && witness_ok(inst, r)?;
    }
    pass &= max_jit_size <= bound;
    if let Some(picks) = &picks {
        let witness = match construction {
            Construction::KsumF2 => Some(ksum_f2_witness(&red, ks, picks)?),
            Construction::KsumF3 => Some(ksum_f3_witness(&red, ks, picks)?),
            Construction::F2F3 => None,
        };
        if let Some(w) = witness {
            pass &= verify_schedule(inst, &w)?.is_feasible();
            pass &= w.value(inst)? >= red.threshold;
            pass &= w.jit_set.len() <= bound;
        }
    }
    Ok(ReductionCase {
        construction,
        source: ks.clone(),
        ksum_answer: picks.is_some(),
        threshold: red.threshold,
        value,
        max_jit_size,
        jit_bound: bound,
        oracle,
        pass,
    })
}

/// Whether the strict three-machine construction accepts `ks`.
pub fn f3_admissible(ks: &KSumInstance) -> bool {
    let t: i64 = ks.values.iter().sum();
    t > ks.target && t > ks.k as i64
}

pub fn crosscheck(spec: &CrosscheckSpec) -> Result<CrosscheckReport> {
    if spec.machines.is_empty() || spec.max_proc < 1 || spec.max_value < 1 {
        return Err(Error::PreconditionViolated(
            "crosscheck needs machine counts and positive value bounds".into(),
        ));
    }
    if spec.max_jobs > jitshop_core::oracle::DEFAULT_CAP {
        return Err(Error::InstanceTooLarge {
            jobs: spec.max_jobs,
            cap: jitshop_core::oracle::DEFAULT_CAP,
        });
    }
    let mut cases = Vec::with_capacity(spec.seeds as usize);
    for i in 0..spec.seeds {
        let seed = spec.first_seed + i;
        let inst = random_instance(seed, &spec.machines, spec.max_jobs, spec.max_proc, spec.max_value);
        cases.push(crosscheck_instance(seed, &inst, spec.workers)?);
    }
    let mut reductions = Vec::new();
    if spec.ksum_max_h >= 2 {
        for ks in ksum_corpus(spec.ksum_max_h, spec.ksum_max_value) {
            reductions.push(crosscheck_reduction(Construction::KsumF2, &ks, 8)?);
            if f3_admissible(&ks) {
                reductions.push(crosscheck_reduction(Construction::KsumF3, &ks, 8)?);
            }
        }
    }
    let passed = cases.iter().filter(|c| c.pass).count()
        + reductions.iter().filter(|c| c.pass).count();
    let failed = cases.len() + reductions.len() - passed;
    Ok(CrosscheckReport {
        cases,
        reductions,
        passed,
        failed,
    })
}

// ---------------------------------------------------------------------------
// Benchmarks

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub algorithm: Algorithm,
    pub ns: Vec<usize>,
    /// `#d` for the XP solver and the oracle, `k` for the FPT solvers.
    pub param: usize,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub param: usize,
    pub wall_ms: f64,
    pub subsets_enumerated: u64,
    /// `Π(|class| + 1)` for XP, `2^k` for FPT, `2^n` for the oracle.
    pub expected_subsets: u64,
    pub value: i64,
}

/// Two-machine instance with `n` jobs spread round robin over `distinct_dues`
/// due dates, so class sizes differ by at most one.
pub fn xp_bench_instance(n: usize, distinct_dues: usize, seed: u64) -> Result<Instance> {
    if distinct_dues == 0 || distinct_dues > n {
        return Err(Error::PreconditionViolated(format!(
            "need 1 <= #d <= n, got #d = {distinct_dues}, n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs = (0..n)
        .map(|j| {
            let class = (j % distinct_dues) as i64;
            let proc = vec![rng.gen_range(1..=5), rng.gen_range(1..=5)];
            Job::new(format!("J{}", j + 1), proc, (class + 1) * 20, rng.gen_range(1..=10))
        })
        .collect();
    Instance::new(2, jobs)
}

/// Two-machine instance with exactly `k` job types for `mode`. Type `t` has
/// due date index `t / 2` and second attribute `1 + t % 2`, and jobs are
/// assigned to types round robin.
pub fn fpt_bench_instance(n: usize, k: usize, mode: TypeMode, seed: u64) -> Result<Instance> {
    if k == 0 || k > n {
        return Err(Error::PreconditionViolated(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs = (0..n)
        .map(|j| {
            let t = j % k;
            let due = (t as i64 / 2 + 1) * 50;
            let second = 1 + (t % 2) as i64;
            let (p1, w) = match mode {
                TypeMode::DueP1 => (second, rng.gen_range(1..=100)),
                TypeMode::DueWeight => (rng.gen_range(1..=10), second),
            };
            Job::new(format!("J{}", j + 1), vec![p1, rng.gen_range(1..=10)], due, w)
        })
        .collect();
    Instance::new(2, jobs)
}

pub fn bench(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(spec.ns.len());
    for &n in &spec.ns {
        let inst = match spec.algorithm {
            Algorithm::Xp | Algorithm::Oracle => xp_bench_instance(n, spec.param, spec.seed)?,
            Algorithm::FptDp1 => fpt_bench_instance(n, spec.param, TypeMode::DueP1, spec.seed)?,
            Algorithm::FptDw => fpt_bench_instance(n, spec.param, TypeMode::DueWeight, spec.seed)?,
        };
        let expected_subsets = match spec.algorithm {
            Algorithm::Xp => candidate_count(&due_classes(&inst))?,
            Algorithm::FptDp1 => 1u64 << classify(&inst, TypeMode::DueP1)?.len(),
            Algorithm::FptDw => 1u64 << classify(&inst, TypeMode::DueWeight)?.len(),
            Algorithm::Oracle => 1u64.checked_shl(n as u32).unwrap_or(u64::MAX),
        };
        let started = Instant::now();
        let res = solve(&inst, spec.algorithm, spec.workers)?;
        let wall_ms = started.elapsed().as_secs_f64() * 1e3;
        rows.push(BenchRow {
            algorithm: spec.algorithm,
            n,
            param: spec.param,
            wall_ms,
            subsets_enumerated: res.stats.subsets_enumerated,
            expected_subsets,
            value: res.value,
        });
    }
    Ok(rows)
}

/// Tab-separated table with a header line.
pub fn render_bench(rows: &[BenchRow]) -> String {
    let mut out = String::from("algorithm\tn\tparam\twall_ms\tsubsets\texpected\tvalue\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.3}\t{}\t{}\t{}",
            r.algorithm.name(),
            r.n,
            r.param,
            r.wall_ms,
            r.subsets_enumerated,
            r.expected_subsets,
            r.value
        );
    }
    out
}
