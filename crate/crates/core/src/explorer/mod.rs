//! Bounded-exhaustive search for stuck normal forms.
//!
//! [`explore`] walks the successor graph breadth-first with state
//! deduplication and either proves every reachable normal form final, returns
//! a shortest witness to a stuck configuration, or reports which bound ran
//! out. [`oracle_explore`] is a naive tree walk used to cross-check it.

mod oracle;
mod relax;
mod run;

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::machine::{canonical_key, classify, Class, Configuration};
use crate::semantics::{step, Options, Rule, RuleInstance, Successor};

pub use oracle::oracle_explore;
pub use relax::{embed_trace, relax_program};
pub use run::{run_single, Policy, Run, RunEnd};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    /// Largest number of copies a `forkfor` may spawn.
    pub forkfor_max: usize,
    pub max_steps: usize,
    pub max_states: usize,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds {
            forkfor_max: 2,
            max_steps: 10_000,
            max_states: 1_000_000,
        }
    }
}

impl Bounds {
    pub fn with_forkfor_max(self, forkfor_max: usize) -> Bounds {
        Bounds {
            forkfor_max,
            ..self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExploreError {
    #[error("program is already in whilef mode")]
    AlreadyRelaxed,
    #[error("invalid trace at step {step}: {reason}")]
    InvalidTrace { step: usize, reason: String },
}

/// A start configuration and the labelled steps taken from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub start: Configuration,
    pub steps: Vec<Successor>,
}

impl Trace {
    pub fn new(start: Configuration) -> Trace {
        Trace {
            start,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &Configuration {
        self.steps.last().map_or(&self.start, |(_, c)| c)
    }

    /// Configurations in order, starting with `start`.
    pub fn configs(&self) -> impl Iterator<Item = &Configuration> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|(_, c)| c))
    }

    /// Replays the trace: every step must be one of the successors the
    /// semantics produces for the previous configuration.
    pub fn validate(&self, limits: &Bounds, opts: &Options) -> Result<(), ExploreError> {
        let mut prev = &self.start;
        for (i, (inst, next)) in self.steps.iter().enumerate() {
            let found = step(prev, limits, opts)
                .into_iter()
                .any(|(ri, c)| ri == *inst && c == *next);
            if !found {
                return Err(ExploreError::InvalidTrace {
                    step: i,
                    reason: format!("`{inst}` does not lead to the recorded configuration"),
                });
            }
            prev = next;
        }
        Ok(())
    }

    pub fn rules(&self) -> impl Iterator<Item = Rule> + '_ {
        self.steps.iter().map(|(ri, _)| ri.rule)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exhausted {
    Steps,
    States,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Safe,
    Unsafe,
    Unknown,
}

// built once per exploration, so the size gap between variants is harmless
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Every reachable normal form is final. `forkfor_bounded` records that
    /// some `forkfor` was expanded, so the result holds for copy counts up
    /// to `forkfor_max`.
    Safe {
        normal_forms: usize,
        states_visited: usize,
        forkfor_bounded: bool,
    },
    Unsafe {
        witness: Trace,
        stuck: Configuration,
    },
    Unknown {
        exhausted: Exhausted,
        frontier: usize,
    },
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Safe { .. } => VerdictKind::Safe,
            Verdict::Unsafe { .. } => VerdictKind::Unsafe,
            Verdict::Unknown { .. } => VerdictKind::Unknown,
        }
    }
}

/// Whether `c` is a normal form that is not final.
pub fn is_stuck(c: &Configuration, limits: &Bounds, opts: &Options) -> bool {
    classify(c) == Class::NonFinal && step(c, limits, opts).is_empty()
}

#[derive(Clone, Debug)]
struct Node {
    config: Configuration,
    parent: Option<(usize, RuleInstance)>,
    depth: usize,
}

/// The explored graph together with the verdict.
#[derive(Clone, Debug)]
pub struct Exploration {
    nodes: Vec<Node>,
    pub verdict: Verdict,
    /// Node ids of the final normal forms found.
    pub final_nodes: Vec<usize>,
    /// How often each rule fired on an expanded state.
    pub rule_counts: BTreeMap<Rule, usize>,
}

impl Exploration {
    pub fn states_visited(&self) -> usize {
        self.nodes.len()
    }

    pub fn config(&self, node: usize) -> &Configuration {
        &self.nodes[node].config
    }

    pub fn normal_forms(&self) -> impl Iterator<Item = &Configuration> {
        self.final_nodes.iter().map(|&i| &self.nodes[i].config)
    }

    /// The BFS-tree path from the start to `node`.
    pub fn trace_to(&self, node: usize) -> Trace {
        let mut steps = Vec::new();
        let mut cur = node;
        while let Some((parent, inst)) = &self.nodes[cur].parent {
            steps.push((inst.clone(), self.nodes[cur].config.clone()));
            cur = *parent;
        }
        steps.reverse();
        Trace {
            start: self.nodes[cur].config.clone(),
            steps,
        }
    }
}

/// Decides file safety of `c0` within `limits`.
pub fn explore(c0: &Configuration, limits: &Bounds, opts: &Options) -> Verdict {
    explore_graph(c0, limits, opts).verdict
}

/// Like [`explore`], but keeps the graph for trace extraction and coverage.
pub fn explore_graph(c0: &Configuration, limits: &Bounds, opts: &Options) -> Exploration {
    let mut nodes = vec![Node {
        config: c0.clone(),
        parent: None,
        depth: 0,
    }];
    let mut seen = HashSet::from([canonical_key(c0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut final_nodes = Vec::new();
    let mut rule_counts = BTreeMap::new();
    let mut forkfor_bounded = false;
    let mut cut_by_steps = 0usize;

    let finish = |nodes: Vec<Node>, verdict, final_nodes, rule_counts| Exploration {
        nodes,
        verdict,
        final_nodes,
        rule_counts,
    };

    while let Some(id) = queue.pop_front() {
        let succs = step(&nodes[id].config, limits, opts);
        if succs.is_empty() {
            if classify(&nodes[id].config) == Class::Final {
                final_nodes.push(id);
                continue;
            }
            let mut ex = finish(
                nodes,
                Verdict::Safe {
                    normal_forms: 0,
                    states_visited: 0,
                    forkfor_bounded,
                },
                final_nodes,
                rule_counts,
            );
            let witness = ex.trace_to(id);
            let stuck = witness.last().clone();
            ex.verdict = Verdict::Unsafe { witness, stuck };
            return ex;
        }
        if nodes[id].depth >= limits.max_steps {
            cut_by_steps += 1;
            continue;
        }
        let depth = nodes[id].depth + 1;
        for (inst, next) in succs {
            *rule_counts.entry(inst.rule).or_insert(0) += 1;
            forkfor_bounded |= inst.rule == Rule::Forkfor;
            if !seen.insert(canonical_key(&next)) {
                continue;
            }
            if nodes.len() >= limits.max_states {
                let frontier = queue.len() + 1;
                return finish(
                    nodes,
                    Verdict::Unknown {
                        exhausted: Exhausted::States,
                        frontier,
                    },
                    final_nodes,
                    rule_counts,
                );
            }
            nodes.push(Node {
                config: next,
                parent: Some((id, inst)),
                depth,
            });
            queue.push_back(nodes.len() - 1);
        }
    }

    let verdict = if cut_by_steps > 0 {
        Verdict::Unknown {
            exhausted: Exhausted::Steps,
            frontier: cut_by_steps,
        }
    } else {
        Verdict::Safe {
            normal_forms: final_nodes.len(),
            states_visited: nodes.len(),
            forkfor_bounded,
        }
    };
    finish(nodes, verdict, final_nodes, rule_counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::by_name;
    use crate::fs_spec::FsSpec;
    use crate::machine::initial_config;
    use crate::syntax::{parse_program, Mode};

    fn whilef(src: &str, fs: &str) -> Configuration {
        let p = parse_program(src, Mode::WhileF).unwrap();
        let fs = FsSpec::from_json(fs).unwrap().with_defaults_for(&p);
        initial_config(&p, &fs.store, &fs.status).unwrap()
    }

    fn witness_rules(v: &Verdict) -> Vec<Rule> {
        match v {
            Verdict::Unsafe { witness, .. } => witness.rules().collect(),
            other => panic!("expected Unsafe, got {other:?}"),
        }
    }

    #[test]
    fn lone_close_is_stuck_immediately() {
        let v = explore(
            &whilef("close(f)", "{}"),
            &Bounds::default(),
            &Options::default(),
        );
        assert!(witness_rules(&v).is_empty());
    }

    #[test]
    fn double_open_witness() {
        let v = explore(
            &whilef("open(f); open(f)", "{}"),
            &Bounds::default(),
            &Options::default(),
        );
        assert_eq!(witness_rules(&v), vec![Rule::Seq, Rule::Open]);
        let Verdict::Unsafe { stuck, .. } = v else {
            unreachable!()
        };
        assert_eq!(stuck.status["f"], crate::machine::FileStatus::Open);
    }

    #[test]
    fn single_read_is_safe() {
        let c = whilef(
            "open(f); (x, p) = read(f); close(f)",
            r#"{"f": {"contents": [7]}}"#,
        );
        let ex = explore_graph(&c, &Bounds::default(), &Options::default());
        assert!(matches!(
            ex.verdict,
            Verdict::Safe {
                normal_forms: 1,
                forkfor_bounded: false,
                ..
            }
        ));
        let nf: Vec<&Configuration> = ex.normal_forms().collect();
        assert_eq!((nf[0].env["x"], nf[0].env["p"]), (7, 0));
    }

    #[test]
    fn motivating_example_has_several_outcomes() {
        let entry = by_name("motivating").unwrap();
        let ex = explore_graph(&entry.initial(), &entry.bounds(), &entry.options());
        assert!(matches!(
            ex.verdict,
            Verdict::Safe {
                forkfor_bounded: true,
                ..
            }
        ));
        let ys: HashSet<i64> = ex
            .normal_forms()
            .filter_map(|c| c.env.get("y").copied())
            .collect();
        assert!(ys.len() >= 2, "{ys:?}");
    }

    #[test]
    fn witnesses_are_shortest() {
        let c = whilef(
            "fork{open(f); skip; skip; close(f), {open(g); close(g)}; close(g)}",
            "{}",
        );
        let bounds = Bounds::default();
        let fast = explore(&c, &bounds, &Options::default());
        let slow = oracle_explore(&c, &bounds, &Options::default());
        let (Verdict::Unsafe { witness: a, .. }, Verdict::Unsafe { witness: b, .. }) =
            (&fast, &slow)
        else {
            panic!("{fast:?} / {slow:?}");
        };
        assert_eq!(a.len(), b.len());
        a.validate(&bounds, &Options::default()).unwrap();
    }

    #[test]
    fn step_bound_gives_unknown() {
        let c = whilef("i = 0; while 1 do i = i + 1", "{}");
        let v = explore(
            &c,
            &Bounds {
                max_steps: 50,
                ..Bounds::default()
            },
            &Options::default(),
        );
        assert!(
            matches!(
                v,
                Verdict::Unknown {
                    exhausted: Exhausted::Steps,
                    frontier: 1
                }
            ),
            "{v:?}"
        );
    }

    #[test]
    fn state_bound_gives_unknown() {
        let c = whilef("i = 0; while 1 do i = i + 1", "{}");
        let v = explore(
            &c,
            &Bounds {
                max_states: 20,
                ..Bounds::default()
            },
            &Options::default(),
        );
        assert!(
            matches!(
                v,
                Verdict::Unknown {
                    exhausted: Exhausted::States,
                    ..
                }
            ),
            "{v:?}"
        );
    }

    #[test]
    fn cyclic_programs_are_safe_after_dedup() {
        let c = whilef("while 1 do skip", "{}");
        let v = explore(&c, &Bounds::default(), &Options::default());
        assert!(
            matches!(
                v,
                Verdict::Safe {
                    normal_forms: 0,
                    ..
                }
            ),
            "{v:?}"
        );
        let tree = oracle_explore(
            &c,
            &Bounds {
                max_steps: 100,
                ..Bounds::default()
            },
            &Options::default(),
        );
        assert_eq!(tree.kind(), VerdictKind::Unknown);
    }

    #[test]
    fn oracle_trivial_cases() {
        let d = Bounds::default();
        let o = Options::default();
        assert_eq!(
            oracle_explore(&whilef("close(f)", "{}"), &d, &o).kind(),
            VerdictKind::Unsafe
        );
        assert!(matches!(
            oracle_explore(&whilef("skip", "{}"), &d, &o),
            Verdict::Safe {
                normal_forms: 1,
                ..
            }
        ));
    }

    #[test]
    fn rule_counts_cover_fired_rules() {
        let c = whilef("x = 1 + 2", "{}");
        let ex = explore_graph(&c, &Bounds::default(), &Options::default());
        assert_eq!(ex.rule_counts.get(&Rule::OpApply), Some(&1));
        assert_eq!(ex.rule_counts.get(&Rule::AssignFreeze), Some(&1));
        assert_eq!(ex.rule_counts.get(&Rule::AssignApply), Some(&1));
    }

    #[test]
    fn explore_is_deterministic() {
        let entry = by_name("fork_race").unwrap();
        let a = explore(&entry.initial(), &entry.bounds(), &entry.options());
        let b = explore(&entry.initial(), &entry.bounds(), &entry.options());
        assert_eq!(a, b);
    }
}
