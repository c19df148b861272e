use jitshop_core::oracle::{feasible_schedule, solve_exhaustive_with, OracleOptions, PermutationSpace};
use jitshop_core::reductions::reduce_f2_to_f3;
use jitshop_core::solver_fpt::{solve_fpt, FptOptions, FptSearch, TypeMode};
use jitshop_core::solver_xp::{solve_xp_with, XpOptions};
use jitshop_core::{
    asap_times, build_witness, edd_order, solve_exhaustive, solve_fpt_dp1, solve_fpt_dw, solve_xp,
    verify_schedule, Instance, Job,
};
use proptest::prelude::*;

fn instance(machines: impl Strategy<Value = usize>, max_jobs: usize) -> impl Strategy<Value = Instance> {
    machines
        .prop_flat_map(move |m| {
            let job = (prop::collection::vec(1i64..=4, m), 1i64..=12, 1i64..=12);
            (Just(m), prop::collection::vec(job, 0..=max_jobs))
        })
        .prop_map(|(m, rows)| {
            let jobs = rows
                .into_iter()
                .enumerate()
                .map(|(i, (p, d, w))| Job::new(format!("J{}", i + 1), p, d, w))
                .collect();
            Instance::new(m, jobs).unwrap()
        })
}

/// Two-machine instances with few distinct values, so job types repeat.
fn typed_f2(max_jobs: usize) -> impl Strategy<Value = Instance> {
    let job = (1i64..=2, 1i64..=4, prop::sample::select(vec![3i64, 6, 9]), 1i64..=3);
    prop::collection::vec(job, 1..=max_jobs).prop_map(|rows| {
        let jobs = rows
            .into_iter()
            .enumerate()
            .map(|(i, (p1, p2, d, w))| Job::new(format!("J{}", i + 1), vec![p1, p2], d, w))
            .collect();
        Instance::new(2, jobs).unwrap()
    })
}

fn verified(inst: &Instance, res: &jitshop_core::SolveResult) -> bool {
    verify_schedule(inst, &res.witness).unwrap().is_feasible()
        && res.witness.value(inst).unwrap() == res.value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn solvers_agree_with_oracle(inst in instance(2usize..=4, 7)) {
        let oracle = solve_exhaustive(&inst).unwrap();
        let xp = solve_xp(&inst).unwrap();
        prop_assert!(verified(&inst, &oracle));
        prop_assert!(verified(&inst, &xp));
        prop_assert_eq!(xp.value, oracle.value);
        if inst.machines == 2 {
            let a = solve_fpt_dp1(&inst).unwrap();
            let b = solve_fpt_dw(&inst).unwrap();
            prop_assert!(verified(&inst, &a));
            prop_assert!(verified(&inst, &b));
            prop_assert_eq!(a.value, oracle.value);
            prop_assert_eq!(b.value, oracle.value);
        }
    }

    #[test]
    fn restricted_orders_suffice(inst in instance(2usize..=4, 6)) {
        let free = solve_exhaustive(&inst).unwrap();
        let restricted = solve_exhaustive_with(&inst, &OracleOptions {
            space: PermutationSpace::SharedFirstEddLast,
            ..OracleOptions::default()
        }).unwrap();
        prop_assert_eq!(free.value, restricted.value);
    }

    #[test]
    fn witness_rebuilds_from_its_orders(inst in instance(2usize..=4, 8)) {
        let res = solve_xp(&inst).unwrap();
        let index = inst.id_index();
        let jit: Vec<usize> = res.jit_set.iter().map(|id| index[id]).collect();
        let perms: Vec<Vec<usize>> = res.witness.permutations[..inst.machines - 1]
            .iter()
            .map(|p| p.iter().map(|id| index[id]).collect())
            .collect();
        let rebuilt = build_witness(&inst, &jit, &perms).unwrap();
        prop_assert_eq!(rebuilt, Some(res.witness.clone()));
    }

    #[test]
    fn asap_completions_shrink_when_a_job_leaves(inst in instance(2usize..=4, 7), drop in any::<prop::sample::Index>()) {
        prop_assume!(!inst.is_empty());
        let all: Vec<usize> = (0..inst.len()).collect();
        let order = edd_order(&inst.jobs);
        let perms = vec![order.clone(); inst.machines - 1];
        let full = asap_times(&inst, &all, &perms).unwrap();
        let gone = drop.index(inst.len());
        let rest: Vec<usize> = all.iter().copied().filter(|&j| j != gone).collect();
        let order: Vec<usize> = order.into_iter().filter(|&j| j != gone).collect();
        let fewer = asap_times(&inst, &rest, &vec![order; inst.machines - 1]).unwrap();
        for &j in &rest {
            for m in 0..inst.machines - 1 {
                prop_assert!(fewer.completion(j, m).unwrap() <= full.completion(j, m).unwrap());
            }
        }
    }

    #[test]
    fn optimum_ignores_job_order(inst in instance(2usize..=3, 8), seed in any::<u64>()) {
        let mut jobs = inst.jobs.clone();
        let n = jobs.len();
        // deterministic Fisher-Yates driven by the seed
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            jobs.swap(i, (s >> 33) as usize % (i + 1));
        }
        let shuffled = Instance::new(inst.machines, jobs).unwrap();
        prop_assert_eq!(solve_xp(&inst).unwrap().value, solve_xp(&shuffled).unwrap().value);
    }

    #[test]
    fn optimum_is_monotone(inst in instance(2usize..=3, 7), extra in (prop::collection::vec(1i64..=4, 3), 1i64..=12, 1i64..=12), bump in 1i64..=5) {
        let base = solve_xp(&inst).unwrap();
        let mut jobs = inst.jobs.clone();
        let (p, d, w) = extra;
        jobs.push(Job::new("extra", p[..inst.machines].to_vec(), d, w));
        let grown = Instance::new(inst.machines, jobs).unwrap();
        prop_assert!(solve_xp(&grown).unwrap().value >= base.value);

        if !inst.is_empty() {
            let mut jobs = inst.jobs.clone();
            jobs[0].weight += bump;
            let heavier = Instance::new(inst.machines, jobs).unwrap();
            prop_assert!(solve_xp(&heavier).unwrap().value >= base.value);
        }
    }

    #[test]
    fn pruning_and_workers_do_not_change_results(inst in instance(2usize..=4, 9), workers in 2usize..=4) {
        let plain = solve_xp_with(&inst, &XpOptions { prune: false, workers: 1 }).unwrap();
        let pruned = solve_xp_with(&inst, &XpOptions { prune: true, workers: 1 }).unwrap();
        let parallel = solve_xp_with(&inst, &XpOptions { prune: true, workers }).unwrap();
        prop_assert_eq!(plain.value, pruned.value);
        prop_assert_eq!(&pruned.jit_set, &parallel.jit_set);
        prop_assert_eq!(&pruned.witness, &parallel.witness);
        prop_assert_eq!(plain.stats.subsets_enumerated, pruned.stats.subsets_enumerated);
    }

    #[test]
    fn fpt_pruning_and_workers_agree(inst in typed_f2(10), workers in 2usize..=4) {
        for mode in [TypeMode::DueP1, TypeMode::DueWeight] {
            let plain = solve_fpt(&inst, mode, &FptOptions { prune: false, workers: 1 }).unwrap();
            let pruned = solve_fpt(&inst, mode, &FptOptions { prune: true, workers: 1 }).unwrap();
            let parallel = solve_fpt(&inst, mode, &FptOptions { prune: false, workers }).unwrap();
            prop_assert_eq!(plain.value, pruned.value);
            prop_assert_eq!(&plain.jit_set, &parallel.jit_set);
            prop_assert_eq!(parallel.stats.subsets_enumerated, plain.stats.subsets_enumerated);
        }
    }

    /// For every type subset, the greedy fill is as good as the best choice
    /// of one member per type found by trying them all.
    #[test]
    fn greedy_fill_matches_brute_force(inst in typed_f2(7)) {
        for mode in [TypeMode::DueP1, TypeMode::DueWeight] {
            let search = FptSearch::new(&inst, mode).unwrap();
            let classes = search.classes().to_vec();
            for mask in 0..(1u64 << search.k()) {
                let types: Vec<usize> = (0..classes.len()).filter(|c| mask >> c & 1 == 1).collect();
                let mut best: Option<i64> = None;
                let mut pick = vec![0usize; types.len()];
                loop {
                    let set: Vec<usize> = types.iter().zip(&pick).map(|(&c, &i)| classes[c].members[i]).collect();
                    if feasible_schedule(&inst, &set, PermutationSpace::Unrestricted).unwrap().is_some() {
                        let v = inst.total_weight(&set);
                        best = Some(best.map_or(v, |b: i64| b.max(v)));
                    }
                    let mut i = 0;
                    while i < pick.len() {
                        pick[i] += 1;
                        if pick[i] < classes[types[i]].members.len() {
                            break;
                        }
                        pick[i] = 0;
                        i += 1;
                    }
                    if i == pick.len() {
                        break;
                    }
                }
                prop_assert_eq!(search.evaluate(mask).map(|s| s.value), best, "mode {:?} mask {:#b}", mode, mask);
            }
        }
    }

    #[test]
    fn lifting_to_three_machines_keeps_jit_sets(inst in instance(Just(2usize), 6)) {
        let lifted = reduce_f2_to_f3(&inst).unwrap();
        let two = solve_exhaustive(&inst).unwrap();
        let three = solve_exhaustive(&lifted).unwrap();
        prop_assert_eq!(two.value, three.value);
        prop_assert_eq!(solve_xp(&lifted).unwrap().value, two.value);
        let index = lifted.id_index();
        let set: Vec<usize> = two.jit_set.iter().map(|id| index[id]).collect();
        prop_assert!(feasible_schedule(&lifted, &set, PermutationSpace::Unrestricted).unwrap().is_some());
    }
}
