use std::collections::HashSet;

use super::{Bounds, Exhausted, Trace, Verdict};
use crate::machine::{classify, Class, Configuration};
use crate::semantics::{step, Options, Rule, Successor};

struct Level {
    succs: Vec<Successor>,
    next: usize,
}

/// Reference explorer: walks the full execution tree depth-first with no
/// state deduplication. Returns the shortest stuck path it sees (first in
/// depth-first order among equals). `limits.max_states` caps the number of
/// tree nodes visited.
pub fn oracle_explore(c0: &Configuration, limits: &Bounds, opts: &Options) -> Verdict {
    let mut finals: HashSet<Configuration> = HashSet::new();
    let mut best: Option<Trace> = None;
    let mut visited = 0usize;
    let mut cut_by_steps = 0usize;
    let mut forkfor_bounded = false;

    // `path` holds the configurations on the current root-to-node path.
    let mut path: Vec<Configuration> = vec![c0.clone()];
    let mut stack: Vec<Level> = Vec::new();

    loop {
        // visit the node at the end of `path`
        let node = path.last().expect("path is never empty here");
        visited += 1;
        if visited > limits.max_states {
            return Verdict::Unknown {
                exhausted: Exhausted::States,
                frontier: stack.iter().map(|l| l.succs.len() - l.next).sum(),
            };
        }
        let depth = stack.len();
        let succs = step(node, limits, opts);
        let mut descend = false;
        if succs.is_empty() {
            if classify(node) == Class::Final {
                finals.insert(node.clone());
            } else if best.as_ref().is_none_or(|b| depth < b.len()) {
                best = Some(path_trace(c0, &stack));
            }
        } else if best.as_ref().is_some_and(|b| depth >= b.len()) {
            // nothing below can beat the current witness
        } else if depth >= limits.max_steps {
            cut_by_steps += 1;
        } else {
            forkfor_bounded |= succs.iter().any(|(ri, _)| ri.rule == Rule::Forkfor);
            stack.push(Level { succs, next: 0 });
            descend = true;
        }
        if !descend {
            path.pop();
        }

        // advance to the next unvisited child
        loop {
            let Some(level) = stack.last_mut() else {
                return conclude(best, finals.len(), visited, cut_by_steps, forkfor_bounded);
            };
            if level.next < level.succs.len() {
                let child = level.succs[level.next].1.clone();
                level.next += 1;
                path.truncate(stack.len());
                path.push(child);
                break;
            }
            stack.pop();
        }
    }
}

fn path_trace(c0: &Configuration, stack: &[Level]) -> Trace {
    Trace {
        start: c0.clone(),
        steps: stack.iter().map(|l| l.succs[l.next - 1].clone()).collect(),
    }
}

fn conclude(
    best: Option<Trace>,
    normal_forms: usize,
    states_visited: usize,
    cut_by_steps: usize,
    forkfor_bounded: bool,
) -> Verdict {
    match best {
        Some(witness) => {
            let stuck = witness.last().clone();
            Verdict::Unsafe { witness, stuck }
        }
        None if cut_by_steps > 0 => Verdict::Unknown {
            exhausted: Exhausted::Steps,
            frontier: cut_by_steps,
        },
        None => Verdict::Safe {
            normal_forms,
            states_visited,
            forkfor_bounded,
        },
    }
}
