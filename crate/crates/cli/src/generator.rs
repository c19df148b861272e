//! Seeded random instances with controlled numbers of distinct due dates,
//! first-machine processing times and weights.

use std::ops::RangeInclusive;

use jitshop_core::{Instance, Job, Time, Weight};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("unsatisfiable generator spec: {0}")]
    UnsatisfiableSpec(String),

    #[error(transparent)]
    Invalid(#[from] jitshop_core::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub machines: usize,
    pub jobs: usize,
    pub distinct_dues: usize,
    pub distinct_p1: Option<usize>,
    pub distinct_weights: Option<usize>,
    /// Inclusive bounds for every processing time.
    pub p_range: (Time, Time),
    pub d_range: (Time, Time),
    pub w_range: (Weight, Weight),
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(machines: usize, jobs: usize, distinct_dues: usize, seed: u64) -> Self {
        GeneratorSpec {
            machines,
            jobs,
            distinct_dues,
            distinct_p1: None,
            distinct_weights: None,
            p_range: (1, 10),
            d_range: (1, 100),
            w_range: (1, 10),
            seed,
        }
    }

    pub fn check(&self) -> Result<(), GeneratorError> {
        let bad = |msg: String| Err(GeneratorError::UnsatisfiableSpec(msg));
        if self.machines == 0 {
            return bad("need at least one machine".into());
        }
        for (name, (lo, hi)) in [("p", self.p_range), ("d", self.d_range), ("w", self.w_range)] {
            if lo < 1 || lo > hi {
                return bad(format!("{name} range [{lo}, {hi}] must be nonempty and positive"));
            }
        }
        let counts = [
            ("due dates", Some(self.distinct_dues), self.d_range),
            ("first-machine times", self.distinct_p1, self.p_range),
            ("weights", self.distinct_weights, self.w_range),
        ];
        for (name, count, (lo, hi)) in counts {
            let Some(count) = count else { continue };
            if count > self.jobs {
                return bad(format!("{count} distinct {name} requested for {} jobs", self.jobs));
            }
            if count == 0 && self.jobs > 0 {
                return bad(format!("0 distinct {name} requested for {} jobs", self.jobs));
            }
            let width = (hi - lo) as u128 + 1;
            if count as u128 > width {
                return bad(format!("{count} distinct {name} do not fit in [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (i64, i64)) -> i64 {
    rng.gen_range(RangeInclusive::new(lo, hi))
}

/// `n` draws taking exactly `count` distinct values from `range`.
fn exact_distinct(rng: &mut ChaCha8Rng, n: usize, count: usize, (lo, hi): (i64, i64)) -> Vec<i64> {
    let width = usize::try_from(hi - lo + 1).unwrap_or(usize::MAX);
    let pool: Vec<i64> = if width <= 1 << 20 {
        index::sample(rng, width, count)
            .into_iter()
            .map(|i| lo + i as i64)
            .collect()
    } else {
        let mut pool = Vec::with_capacity(count);
        while pool.len() < count {
            let v = uniform(rng, (lo, hi));
            if !pool.contains(&v) {
                pool.push(v);
            }
        }
        pool
    };
    let mut out: Vec<i64> = pool.clone();
    while out.len() < n {
        out.push(pool[rng.gen_range(0..count)]);
    }
    out.shuffle(rng);
    out
}

pub fn generate(spec: &GeneratorSpec) -> Result<Instance, GeneratorError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.jobs;
    let dues = exact_distinct(&mut rng, n, spec.distinct_dues, spec.d_range);
    let p1 = match spec.distinct_p1 {
        Some(c) => exact_distinct(&mut rng, n, c, spec.p_range),
        None => (0..n).map(|_| uniform(&mut rng, spec.p_range)).collect(),
    };
    let weights = match spec.distinct_weights {
        Some(c) => exact_distinct(&mut rng, n, c, spec.w_range),
        None => (0..n).map(|_| uniform(&mut rng, spec.w_range)).collect(),
    };
    let jobs = (0..n)
        .map(|j| {
            let mut proc = Vec::with_capacity(spec.machines);
            proc.push(p1[j]);
            for _ in 1..spec.machines {
                proc.push(uniform(&mut rng, spec.p_range));
            }
            Job::new(format!("J{}", j + 1), proc, dues[j], weights[j])
        })
        .collect();
    Ok(Instance::new(spec.machines, jobs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use jitshop_core::due_classes;
    use std::collections::BTreeSet;

    #[test]
    fn exact_due_count() {
        let inst = generate(&GeneratorSpec::new(2, 20, 3, 7)).unwrap();
        assert_eq!(inst.len(), 20);
        assert_eq!(due_classes(&inst).len(), 3);
    }

    #[test]
    fn too_many_dues() {
        assert!(matches!(
            generate(&GeneratorSpec::new(2, 5, 7, 1)),
            Err(GeneratorError::UnsatisfiableSpec(_))
        ));
    }

    #[test]
    fn range_too_narrow() {
        let mut spec = GeneratorSpec::new(2, 10, 4, 1);
        spec.d_range = (5, 7);
        assert!(matches!(generate(&spec), Err(GeneratorError::UnsatisfiableSpec(_))));
    }

    #[test]
    fn deterministic_in_seed() {
        let spec = GeneratorSpec::new(3, 15, 4, 42);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = GeneratorSpec { seed: 43, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn optional_counts_are_exact() {
        let spec = GeneratorSpec {
            distinct_p1: Some(2),
            distinct_weights: Some(5),
            ..GeneratorSpec::new(2, 12, 3, 9)
        };
        let inst = generate(&spec).unwrap();
        let p1: BTreeSet<_> = inst.jobs.iter().map(|j| j.proc[0]).collect();
        let w: BTreeSet<_> = inst.jobs.iter().map(|j| j.weight).collect();
        assert_eq!(p1.len(), 2);
        assert_eq!(w.len(), 5);
    }

    #[test]
    fn empty_instance() {
        let inst = generate(&GeneratorSpec::new(2, 0, 0, 0)).unwrap();
        assert!(inst.is_empty());
    }
}
