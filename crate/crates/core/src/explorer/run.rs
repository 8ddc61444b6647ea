use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Bounds, Trace};
use crate::machine::{classify, Class, Configuration};
use crate::semantics::{step, Options};

/// How [`run_single`] resolves a choice point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Always the first successor.
    FirstChoice,
    /// Uniform pick with ChaCha8 seeded via `seed_from_u64(seed)`.
    Seeded(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunEnd {
    Final,
    Stuck,
    Cutoff,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub trace: Trace,
    pub end: RunEnd,
}

/// Follows one path from `c0` until a normal form or `limits.max_steps`.
pub fn run_single(c0: &Configuration, policy: Policy, limits: &Bounds, opts: &Options) -> Run {
    let mut rng = match policy {
        Policy::FirstChoice => None,
        Policy::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut trace = Trace::new(c0.clone());
    loop {
        let current = trace.last();
        let mut succs = step(current, limits, opts);
        if succs.is_empty() {
            let end = match classify(current) {
                Class::Final => RunEnd::Final,
                Class::NonFinal => RunEnd::Stuck,
            };
            return Run { trace, end };
        }
        if trace.len() >= limits.max_steps {
            return Run {
                trace,
                end: RunEnd::Cutoff,
            };
        }
        let pick = match rng.as_mut() {
            Some(rng) => rng.gen_range(0..succs.len()),
            None => 0,
        };
        trace.steps.push(succs.swap_remove(pick));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fs_spec::FsSpec;
    use crate::machine::initial_config;
    use crate::syntax::{parse_program, Mode};

    fn whilef(src: &str) -> Configuration {
        let p = parse_program(src, Mode::WhileF).unwrap();
        let fs = FsSpec::from_json(r#"{"f": {"contents": [1, 2, 3]}}"#)
            .unwrap()
            .with_defaults_for(&p);
        initial_config(&p, &fs.store, &fs.status).unwrap()
    }

    #[test]
    fn skip_runs_in_one_step() {
        let run = run_single(
            &whilef("skip"),
            Policy::FirstChoice,
            &Bounds::default(),
            &Options::default(),
        );
        assert_eq!((run.trace.len(), run.end), (1, RunEnd::Final));
    }

    #[test]
    fn double_open_ends_stuck() {
        let run = run_single(
            &whilef("open(f); open(f)"),
            Policy::Seeded(3),
            &Bounds::default(),
            &Options::default(),
        );
        assert_eq!(run.end, RunEnd::Stuck);
    }

    #[test]
    fn cutoff_at_max_steps() {
        let limits = Bounds {
            max_steps: 25,
            ..Bounds::default()
        };
        let run = run_single(
            &whilef("while 1 do skip"),
            Policy::FirstChoice,
            &limits,
            &Options::default(),
        );
        assert_eq!((run.trace.len(), run.end), (25, RunEnd::Cutoff));
    }

    #[test]
    fn seeded_runs_repeat() {
        let c = whilef("open(f); forkfor{(x, p) = read(f); y = p}; close(f)");
        let limits = Bounds::default().with_forkfor_max(3);
        let runs: Vec<Run> = (0..2)
            .map(|_| run_single(&c, Policy::Seeded(7), &limits, &Options::default()))
            .collect();
        assert_eq!(runs[0], runs[1]);
        runs[0]
            .trace
            .validate(&limits, &Options::default())
            .unwrap();
    }
}
