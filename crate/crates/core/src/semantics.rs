//! The one-step successor relation.
//!
//! Every nondeterministic choice point (fork schedule, forkfor copy count,
//! oracle read position) is reified as a [`Choice`], so `step` returns the
//! complete, ordered list of successors. A non-final configuration with no
//! successors is stuck.

use std::fmt::{self, Display, Formatter};

use serde::{Deserialize, Serialize};

use crate::explorer::Bounds;
use crate::machine::{Configuration, FileStatus, FileStore, Frame, MachineError};
use crate::syntax::{atoms_of, Atom, Mode, Stmt};

/// How `(x, p) = read(f)` picks its position in whilef mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadMode {
    /// The per-file cursor, advanced by one after each read.
    #[default]
    Cursor,
    /// Any position in `0..=len(f)`, one successor each.
    Oracle,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Options {
    pub read_mode: ReadMode,
    /// Treat every nonzero guard as true instead of requiring exactly 1.
    pub truthy_guards: bool,
}

impl Options {
    pub fn oracle() -> Options {
        Options {
            read_mode: ReadMode::Oracle,
            ..Options::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Lookup,
    OpFreezeLeft,
    OpFreezeRight,
    OpApply,
    AndDesugar,
    OrDesugar,
    AssignFreeze,
    AssignApply,
    IfFreeze,
    IfTrue,
    IfFalse,
    WhileUnroll,
    Open,
    Close,
    ReadNd,
    ReadAt,
    ReadAtFreeze,
    Seq,
    Fork,
    Forkfor,
    Forkif,
    Skip,
}

impl Rule {
    pub const ALL: [Rule; 22] = [
        Rule::Lookup,
        Rule::OpFreezeLeft,
        Rule::OpFreezeRight,
        Rule::OpApply,
        Rule::AndDesugar,
        Rule::OrDesugar,
        Rule::AssignFreeze,
        Rule::AssignApply,
        Rule::IfFreeze,
        Rule::IfTrue,
        Rule::IfFalse,
        Rule::WhileUnroll,
        Rule::Open,
        Rule::Close,
        Rule::ReadNd,
        Rule::ReadAt,
        Rule::ReadAtFreeze,
        Rule::Seq,
        Rule::Fork,
        Rule::Forkfor,
        Rule::Forkif,
        Rule::Skip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Lookup => "lookup",
            Rule::OpFreezeLeft => "op-freeze-left",
            Rule::OpFreezeRight => "op-freeze-right",
            Rule::OpApply => "op-apply",
            Rule::AndDesugar => "and-desugar",
            Rule::OrDesugar => "or-desugar",
            Rule::AssignFreeze => "assign-freeze",
            Rule::AssignApply => "assign-apply",
            Rule::IfFreeze => "if-freeze",
            Rule::IfTrue => "if-true",
            Rule::IfFalse => "if-false",
            Rule::WhileUnroll => "while-unroll",
            Rule::Open => "open",
            Rule::Close => "close",
            Rule::ReadNd => "read-nd",
            Rule::ReadAt => "read-at",
            Rule::ReadAtFreeze => "read-at-freeze",
            Rule::Seq => "seq",
            Rule::Fork => "fork",
            Rule::Forkfor => "forkfor",
            Rule::Forkif => "forkif",
            Rule::Skip => "skip",
        }
    }
}

impl Display for Rule {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One resolved nondeterministic decision.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    /// Fork schedule as `(branch, atom)` pairs in execution order.
    Interleave(Vec<(usize, usize)>),
    ForkCount(usize),
    OraclePos(usize),
    Unique,
}

impl Display for Choice {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Interleave(order) => {
                f.write_str("θ=")?;
                for (b, a) in order {
                    write!(f, "({b},{a})")?;
                }
                Ok(())
            }
            Choice::ForkCount(k) => write!(f, "k={k}"),
            Choice::OraclePos(n) => write!(f, "n={n}"),
            Choice::Unique => f.write_str("-"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleInstance {
    pub rule: Rule,
    pub choice: Choice,
}

impl RuleInstance {
    pub fn unique(rule: Rule) -> RuleInstance {
        RuleInstance {
            rule,
            choice: Choice::Unique,
        }
    }
}

impl Display for RuleInstance {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]", self.rule, self.choice)
    }
}

pub type Successor = (RuleInstance, Configuration);

/// File contents at position `n`; positions past the end read as `0`.
pub fn eval_phi(store: &FileStore, f: &str, n: usize) -> Result<i64, MachineError> {
    let data = store
        .get(f)
        .ok_or_else(|| MachineError::UnknownFile(f.to_string()))?;
    Ok(data.contents.get(n).copied().unwrap_or(0))
}

/// Every order-preserving interleaving of branches with the given atom
/// counts, in lexicographic order of the branch-index sequence. Empty
/// branches contribute nothing.
pub fn enumerate_interleavings(sizes: &[usize]) -> Vec<Vec<(usize, usize)>> {
    fn go(
        sizes: &[usize],
        taken: &mut [usize],
        prefix: &mut Vec<(usize, usize)>,
        total: usize,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if prefix.len() == total {
            out.push(prefix.clone());
            return;
        }
        for b in 0..sizes.len() {
            if taken[b] < sizes[b] {
                prefix.push((b, taken[b]));
                taken[b] += 1;
                go(sizes, taken, prefix, total, out);
                taken[b] -= 1;
                prefix.pop();
            }
        }
    }
    let total = sizes.iter().sum();
    let mut out = Vec::new();
    let mut taken = vec![0; sizes.len()];
    go(
        sizes,
        &mut taken,
        &mut Vec::with_capacity(total),
        total,
        &mut out,
    );
    out
}

/// Interleavings of concrete atom lists, as [`Choice::Interleave`] values.
pub fn interleavings_of(branches: &[Vec<Atom>]) -> Vec<Choice> {
    let sizes: Vec<usize> = branches.iter().map(Vec::len).collect();
    enumerate_interleavings(&sizes)
        .into_iter()
        .map(Choice::Interleave)
        .collect()
}

/// Clones `c`, removes its head, lets `edit` rewrite the copy, then settles.
fn successor(
    c: &Configuration,
    rule: Rule,
    choice: Choice,
    edit: impl FnOnce(&mut Configuration),
) -> Successor {
    let mut next = c.clone();
    next.control.pop();
    edit(&mut next);
    next.settle();
    (RuleInstance { rule, choice }, next)
}

fn unique(c: &Configuration, rule: Rule, edit: impl FnOnce(&mut Configuration)) -> Vec<Successor> {
    vec![successor(c, rule, Choice::Unique, edit)]
}

fn push_atoms(c: &mut Configuration, atoms_head_first: impl DoubleEndedIterator<Item = Atom>) {
    for a in atoms_head_first.rev() {
        c.control.push(Frame::atom(a));
    }
}

/// All successors of `c`, in a fixed order.
pub fn step(c: &Configuration, limits: &Bounds, opts: &Options) -> Vec<Successor> {
    let Some(Frame::Ctrl(head)) = c.control.head() else {
        return Vec::new();
    };
    match head {
        Stmt::Atom(a) => step_atom(c, a, opts),
        Stmt::Seq(first, second) => unique(c, Rule::Seq, |n| {
            n.control.push(Frame::Ctrl((**second).clone()));
            n.control.push(Frame::Ctrl((**first).clone()));
        }),
        Stmt::Fork(branches) => {
            let Ok(atoms) = branches.iter().map(atoms_of).collect::<Result<Vec<_>, _>>() else {
                return Vec::new();
            };
            interleavings_of(&atoms)
                .into_iter()
                .map(|choice| {
                    let Choice::Interleave(order) = &choice else {
                        unreachable!()
                    };
                    let scheduled: Vec<Atom> =
                        order.iter().map(|&(b, i)| atoms[b][i].clone()).collect();
                    successor(c, Rule::Fork, choice.clone(), |n| {
                        push_atoms(n, scheduled.into_iter())
                    })
                })
                .collect()
        }
        Stmt::ForkFor(body) => (0..=limits.forkfor_max)
            .map(|k| {
                successor(c, Rule::Forkfor, Choice::ForkCount(k), |n| {
                    if k == 0 {
                        n.control.push(Frame::atom(Atom::Skip));
                    } else {
                        n.control
                            .push(Frame::Ctrl(Stmt::Fork(vec![(**body).clone(); k])));
                    }
                })
            })
            .collect(),
        Stmt::ForkIf(arms) => {
            let Some(branches) = arms
                .iter()
                .map(|(guard, body)| {
                    let body = body.to_atom()?;
                    Some(Stmt::Atom(Atom::if_(guard.clone(), body, Atom::Skip)))
                })
                .collect::<Option<Vec<_>>>()
            else {
                return Vec::new();
            };
            unique(c, Rule::Forkif, |n| {
                n.control.push(Frame::Ctrl(Stmt::Fork(branches)))
            })
        }
    }
}

fn step_atom(c: &Configuration, head: &Atom, opts: &Options) -> Vec<Successor> {
    match head {
        // settled configurations never carry a literal at the head
        Atom::Int(_) => Vec::new(),
        Atom::Var(x) => match c.env.get(x) {
            Some(&n) => unique(c, Rule::Lookup, |s| s.control.push(Frame::Value(n))),
            None => Vec::new(),
        },
        Atom::Bin(op, lhs, rhs) => match (&**lhs, &**rhs) {
            (Atom::Int(a), Atom::Int(b)) => match op.apply(*a, *b) {
                Some(n) => unique(c, Rule::OpApply, |s| s.control.push(Frame::Value(n))),
                None => Vec::new(),
            },
            (Atom::Int(a), _) => unique(c, Rule::OpFreezeRight, |s| {
                s.control.push(Frame::HoleOpLeft { lhs: *a, op: *op });
                s.control.push(Frame::atom((**rhs).clone()));
            }),
            _ => unique(c, Rule::OpFreezeLeft, |s| {
                s.control.push(Frame::HoleOpRight {
                    op: *op,
                    rhs: (**rhs).clone(),
                });
                s.control.push(Frame::atom((**lhs).clone()));
            }),
        },
        Atom::And(a1, a2) => unique(c, Rule::AndDesugar, |s| {
            let desugared = Atom::if_((**a1).clone(), (**a2).clone(), Atom::Int(0));
            s.control.push(Frame::atom(desugared));
        }),
        Atom::Or(a1, a2) => unique(c, Rule::OrDesugar, |s| {
            let desugared = Atom::if_((**a1).clone(), Atom::Int(1), (**a2).clone());
            s.control.push(Frame::atom(desugared));
        }),
        Atom::Assign(x, value) => match **value {
            Atom::Int(n) => unique(c, Rule::AssignApply, |s| {
                s.env.insert(x.clone(), n);
                s.control.push(Frame::Value(n));
            }),
            _ => unique(c, Rule::AssignFreeze, |s| {
                s.control.push(Frame::HoleAssign(x.clone()));
                s.control.push(Frame::atom((**value).clone()));
            }),
        },
        Atom::If(cond, then, otherwise) => match **cond {
            Atom::Int(1) => unique(c, Rule::IfTrue, |s| {
                s.control.push(Frame::atom((**then).clone()))
            }),
            Atom::Int(0) => unique(c, Rule::IfFalse, |s| {
                s.control.push(Frame::atom((**otherwise).clone()))
            }),
            Atom::Int(_) if opts.truthy_guards => unique(c, Rule::IfTrue, |s| {
                s.control.push(Frame::atom((**then).clone()))
            }),
            Atom::Int(_) => Vec::new(),
            _ => unique(c, Rule::IfFreeze, |s| {
                s.control.push(Frame::HoleIf {
                    then: (**then).clone(),
                    otherwise: (**otherwise).clone(),
                });
                s.control.push(Frame::atom((**cond).clone()));
            }),
        },
        Atom::While(cond, body) => unique(c, Rule::WhileUnroll, |s| {
            let again = Atom::seq((**body).clone(), head.clone());
            s.control
                .push(Frame::atom(Atom::if_((**cond).clone(), again, Atom::Skip)));
        }),
        Atom::Seq(first, second) => unique(c, Rule::Seq, |s| {
            s.control.push(Frame::atom((**second).clone()));
            s.control.push(Frame::atom((**first).clone()));
        }),
        Atom::Open(f) => match c.status.get(f) {
            Some(FileStatus::Closed) => unique(c, Rule::Open, |s| {
                s.status.insert(f.clone(), FileStatus::Open);
                if let Some(data) = s.store.get_mut(f) {
                    data.cursor = 0;
                }
            }),
            _ => Vec::new(),
        },
        Atom::Close(f) => match c.status.get(f) {
            Some(FileStatus::Open) => unique(c, Rule::Close, |s| {
                s.status.insert(f.clone(), FileStatus::Closed);
            }),
            _ => Vec::new(),
        },
        Atom::ReadNd {
            value,
            pointer,
            file,
        } => {
            if c.mode != Mode::WhileF || c.status.get(file) != Some(&FileStatus::Open) {
                return Vec::new();
            }
            let Some(data) = c.store.get(file) else {
                return Vec::new();
            };
            let read = |s: &mut Configuration, n: usize| {
                let v = eval_phi(&s.store, file, n).expect("file present in store");
                s.env.insert(pointer.clone(), n as i64);
                s.env.insert(value.clone(), v);
            };
            match opts.read_mode {
                ReadMode::Cursor => {
                    let n = data.cursor;
                    unique(c, Rule::ReadNd, |s| {
                        read(s, n);
                        s.store.get_mut(file).expect("file present").cursor = n + 1;
                    })
                }
                ReadMode::Oracle => (0..=data.contents.len())
                    .map(|n| successor(c, Rule::ReadNd, Choice::OraclePos(n), |s| read(s, n)))
                    .collect(),
            }
        }
        Atom::ReadAt { value, file, pos } => {
            if c.mode != Mode::SafeWhileF {
                return Vec::new();
            }
            match **pos {
                Atom::Int(n) => {
                    if n < 0 || c.status.get(file) != Some(&FileStatus::Open) {
                        return Vec::new();
                    }
                    let Ok(v) = eval_phi(&c.store, file, n as usize) else {
                        return Vec::new();
                    };
                    unique(c, Rule::ReadAt, |s| {
                        s.env.insert(value.clone(), v);
                    })
                }
                _ => unique(c, Rule::ReadAtFreeze, |s| {
                    s.control.push(Frame::HoleReadAt {
                        value: value.clone(),
                        file: file.clone(),
                    });
                    s.control.push(Frame::atom((**pos).clone()));
                }),
            }
        }
        Atom::Skip => unique(c, Rule::Skip, |_| {}),
    }
}

/// The rule the head of `c` calls for, ignoring side conditions. Used to
/// name the rule a stuck configuration is blocked on.
pub fn head_rule(c: &Configuration) -> Option<Rule> {
    let Some(Frame::Ctrl(head)) = c.control.head() else {
        return None;
    };
    let atom = match head {
        Stmt::Seq(..) => return Some(Rule::Seq),
        Stmt::Fork(_) => return Some(Rule::Fork),
        Stmt::ForkFor(_) => return Some(Rule::Forkfor),
        Stmt::ForkIf(_) => return Some(Rule::Forkif),
        Stmt::Atom(a) => a,
    };
    Some(match atom {
        Atom::Int(_) => return None,
        Atom::Var(_) => Rule::Lookup,
        Atom::Bin(_, l, r) => match (&**l, &**r) {
            (Atom::Int(_), Atom::Int(_)) => Rule::OpApply,
            (Atom::Int(_), _) => Rule::OpFreezeRight,
            _ => Rule::OpFreezeLeft,
        },
        Atom::And(..) => Rule::AndDesugar,
        Atom::Or(..) => Rule::OrDesugar,
        Atom::Assign(_, v) if matches!(**v, Atom::Int(_)) => Rule::AssignApply,
        Atom::Assign(..) => Rule::AssignFreeze,
        Atom::If(cond, ..) => match **cond {
            Atom::Int(0) => Rule::IfFalse,
            Atom::Int(_) => Rule::IfTrue,
            _ => Rule::IfFreeze,
        },
        Atom::While(..) => Rule::WhileUnroll,
        Atom::Seq(..) => Rule::Seq,
        Atom::Open(_) => Rule::Open,
        Atom::Close(_) => Rule::Close,
        Atom::ReadNd { .. } => Rule::ReadNd,
        Atom::ReadAt { pos, .. } if matches!(**pos, Atom::Int(_)) => Rule::ReadAt,
        Atom::ReadAt { .. } => Rule::ReadAtFreeze,
        Atom::Skip => Rule::Skip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fs_spec::FsSpec;
    use crate::machine::{classify, initial_config, Class, Control};
    use crate::syntax::parse_program;

    fn config(src: &str, mode: Mode, fs: &str) -> Configuration {
        let p = parse_program(src, mode).unwrap();
        let fs = FsSpec::from_json(fs).unwrap().with_defaults_for(&p);
        initial_config(&p, &fs.store, &fs.status).unwrap()
    }

    fn whilef(src: &str, fs: &str) -> Configuration {
        config(src, Mode::WhileF, fs)
    }

    fn run_to_normal_form(mut c: Configuration, opts: &Options) -> Configuration {
        let limits = Bounds::default();
        for _ in 0..1000 {
            let mut succ = step(&c, &limits, opts);
            if succ.is_empty() {
                return c;
            }
            c = succ.swap_remove(0).1;
        }
        panic!("no normal form within 1000 steps");
    }

    #[test]
    fn open_needs_a_closed_file() {
        let d = Bounds::default();
        let opts = Options::default();
        let succ = step(&whilef("open(f)", "{}"), &d, &opts);
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].0, RuleInstance::unique(Rule::Open));
        assert_eq!(succ[0].1.status["f"], FileStatus::Open);
        assert!(step(&whilef("open(f)", r#"{"f": {"status": "o"}}"#), &d, &opts).is_empty());
    }

    #[test]
    fn close_needs_an_open_file() {
        let d = Bounds::default();
        let opts = Options::default();
        assert!(step(&whilef("close(f)", "{}"), &d, &opts).is_empty());
        let succ = step(&whilef("close(f)", r#"{"f": {"status": "o"}}"#), &d, &opts);
        assert_eq!(succ[0].1.status["f"], FileStatus::Closed);
    }

    #[test]
    fn oracle_read_offers_every_position_and_eof() {
        let c = whilef(
            "(x, p) = read(f)",
            r#"{"f": {"status": "o", "contents": [10, 20, 30]}}"#,
        );
        let succ = step(&c, &Bounds::default(), &Options::oracle());
        let got: Vec<(i64, i64)> = succ.iter().map(|(_, s)| (s.env["p"], s.env["x"])).collect();
        assert_eq!(got, vec![(0, 10), (1, 20), (2, 30), (3, 0)]);
        for (n, (ri, _)) in succ.iter().enumerate() {
            assert_eq!(ri.choice, Choice::OraclePos(n));
        }
    }

    #[test]
    fn cursor_read_advances() {
        let c = whilef(
            "(x, p) = read(f); (y, q) = read(f); (z, r) = read(f)",
            r#"{"f": {"status": "o", "contents": [4, 5]}}"#,
        );
        let end = run_to_normal_form(c, &Options::default());
        assert_eq!(classify(&end), Class::Final);
        let env: Vec<i64> = ["x", "p", "y", "q", "z", "r"]
            .iter()
            .map(|v| end.env[*v])
            .collect();
        assert_eq!(env, vec![4, 0, 5, 1, 0, 2]);
        assert_eq!(end.store["f"].cursor, 3);
    }

    #[test]
    fn reopening_resets_the_cursor() {
        let c = whilef(
            "open(f); (x, p) = read(f); close(f); open(f); (y, q) = read(f)",
            r#"{"f": {"contents": [8, 9]}}"#,
        );
        let end = run_to_normal_form(c, &Options::default());
        assert_eq!((end.env["x"], end.env["y"], end.env["q"]), (8, 8, 0));
    }

    #[test]
    fn positioned_read() {
        let c = config(
            "x = read(f, 1)",
            Mode::SafeWhileF,
            r#"{"f": {"status": "o", "contents": [10, 20, 30]}}"#,
        );
        let succ = step(&c, &Bounds::default(), &Options::default());
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].0.rule, Rule::ReadAt);
        assert_eq!(succ[0].1.env["x"], 20);
    }

    #[test]
    fn positioned_read_evaluates_its_position_first() {
        let c = config(
            "i = 1; x = read(f, i + 1); y = read(f, 7)",
            Mode::SafeWhileF,
            r#"{"f": {"status": "o", "contents": [10, 20, 30]}}"#,
        );
        let end = run_to_normal_form(c, &Options::default());
        assert_eq!(classify(&end), Class::Final);
        assert_eq!((end.env["x"], end.env["y"]), (30, 0));
    }

    #[test]
    fn positioned_read_rejects_negative_positions() {
        let c = config(
            "x = read(f, 0 - 1)",
            Mode::SafeWhileF,
            r#"{"f": {"status": "o"}}"#,
        );
        let end = run_to_normal_form(c, &Options::default());
        assert_eq!(classify(&end), Class::NonFinal);
        assert_eq!(head_rule(&end), Some(Rule::ReadAt));
    }

    #[test]
    fn arithmetic_reaches_a_value() {
        let end = run_to_normal_form(whilef("2 + 3", "{}"), &Options::default());
        assert_eq!(end.control, Control::new(vec![Frame::Value(5)]));
        assert_eq!(classify(&end), Class::Final);
    }

    #[test]
    fn operators_evaluate_left_then_right() {
        let c = whilef("x = 7; y = 2; z = x - y * 3", "{}");
        let mut rules = Vec::new();
        let mut c = c;
        while let Some((ri, next)) = step(&c, &Bounds::default(), &Options::default())
            .into_iter()
            .next()
        {
            rules.push(ri.rule);
            c = next;
        }
        assert_eq!(c.env["z"], 1);
        let tail: Vec<Rule> = rules
            .iter()
            .copied()
            .skip_while(|r| *r != Rule::AssignFreeze)
            .collect();
        assert!(tail.contains(&Rule::OpFreezeLeft));
        assert!(tail.contains(&Rule::OpFreezeRight));
    }

    #[test]
    fn overflow_and_division_by_zero_are_stuck() {
        for src in ["1 / 0", "9223372036854775807 + 1", "x = 5 / (2 - 2)"] {
            let end = run_to_normal_form(whilef(src, "{}"), &Options::default());
            assert_eq!(classify(&end), Class::NonFinal, "{src}");
            assert_eq!(head_rule(&end), Some(Rule::OpApply), "{src}");
        }
    }

    #[test]
    fn fork_enumerates_order_preserving_schedules() {
        let c = whilef("fork{a = 1; b = 2, c = 3}", "{}");
        let succ = step(&c, &Bounds::default(), &Options::default());
        assert_eq!(succ.len(), 3);
        let orders: Vec<Choice> = succ.iter().map(|(ri, _)| ri.choice.clone()).collect();
        assert_eq!(
            orders,
            vec![
                Choice::Interleave(vec![(0, 0), (0, 1), (1, 0)]),
                Choice::Interleave(vec![(0, 0), (1, 0), (0, 1)]),
                Choice::Interleave(vec![(1, 0), (0, 0), (0, 1)]),
            ]
        );
        assert_eq!(succ[2].1.control.len(), 3);
    }

    #[test]
    fn braced_blocks_are_scheduled_whole() {
        let c = whilef("fork{{a = 1; b = 2}, c = 3}", "{}");
        assert_eq!(step(&c, &Bounds::default(), &Options::default()).len(), 2);
    }

    #[test]
    fn forkfor_offers_zero_to_k_copies() {
        let c = whilef("forkfor{skip}", "{}");
        let succ = step(
            &c,
            &Bounds::default().with_forkfor_max(3),
            &Options::default(),
        );
        let ks: Vec<Choice> = succ.iter().map(|(ri, _)| ri.choice.clone()).collect();
        assert_eq!(ks, (0..=3).map(Choice::ForkCount).collect::<Vec<_>>());
        assert_eq!(
            succ[2].1.control.head(),
            Some(&Frame::Ctrl(Stmt::Fork(vec![Stmt::Atom(Atom::Skip); 2])))
        );
    }

    #[test]
    fn forkif_guards_each_branch() {
        let c = whilef("x = 1; forkif{(x == 1, y = 1), (x == 2, z = 1)}", "{}");
        let end = run_to_normal_form(c, &Options::default());
        assert_eq!(classify(&end), Class::Final);
        assert_eq!(end.env.get("y"), Some(&1));
        assert_eq!(end.env.get("z"), None);
    }

    #[test]
    fn eval_phi_reads_zero_past_the_end() {
        let fs = FsSpec::from_json(r#"{"f": {"contents": [10, 20, 30]}}"#).unwrap();
        assert_eq!(eval_phi(&fs.store, "f", 0), Ok(10));
        assert_eq!(eval_phi(&fs.store, "f", 2), Ok(30));
        assert_eq!(eval_phi(&fs.store, "f", 3), Ok(0));
        assert_eq!(eval_phi(&fs.store, "f", 1000), Ok(0));
        assert_eq!(
            eval_phi(&fs.store, "g", 0),
            Err(MachineError::UnknownFile("g".into()))
        );
    }

    #[test]
    fn interleaving_counts() {
        assert_eq!(enumerate_interleavings(&[2, 1]).len(), 3);
        assert_eq!(enumerate_interleavings(&[1]).len(), 1);
        assert_eq!(enumerate_interleavings(&[2, 2]).len(), 6);
        assert_eq!(enumerate_interleavings(&[1, 1, 1]).len(), 6);
        assert_eq!(
            enumerate_interleavings(&[0, 0]),
            vec![Vec::<(usize, usize)>::new()]
        );
    }

    #[test]
    fn guards_must_be_zero_or_one() {
        let c = whilef("if 2 then skip else skip", "{}");
        assert!(step(&c, &Bounds::default(), &Options::default()).is_empty());
        assert_eq!(head_rule(&c), Some(Rule::IfTrue));
        let truthy = Options {
            truthy_guards: true,
            ..Options::default()
        };
        assert_eq!(
            step(&c, &Bounds::default(), &truthy)[0].0.rule,
            Rule::IfTrue
        );
    }

    #[test]
    fn and_or_match_boolean_tables() {
        for a in 0..=1 {
            for b in 0..=1 {
                let and = run_to_normal_form(
                    whilef(&format!("x = {a} && {b}"), "{}"),
                    &Options::default(),
                );
                let or = run_to_normal_form(
                    whilef(&format!("x = {a} || {b}"), "{}"),
                    &Options::default(),
                );
                assert_eq!(and.env["x"], a & b, "{a} && {b}");
                assert_eq!(or.env["x"], a | b, "{a} || {b}");
            }
        }
    }

    #[test]
    fn while_loops_unroll() {
        let c = whilef("i = 0; while i < 3 do i = i + 1", "{}");
        let end = run_to_normal_form(c, &Options::default());
        assert_eq!(end.env["i"], 3);
        assert_eq!(classify(&end), Class::Final);
    }

    #[test]
    fn stores_are_never_written() {
        let c = whilef(
            "open(f); (x, p) = read(f); (y, q) = read(f); close(f)",
            r#"{"f": {"contents": [1, 2, 3]}}"#,
        );
        let original = c.store["f"].contents.clone();
        let limits = Bounds::default();
        let mut frontier = vec![c];
        while let Some(c) = frontier.pop() {
            assert_eq!(c.store["f"].contents, original);
            frontier.extend(
                step(&c, &limits, &Options::oracle())
                    .into_iter()
                    .map(|(_, s)| s),
            );
        }
    }

    #[test]
    fn reads_are_mode_specific() {
        let fs = r#"{"f": {"status": "o", "contents": [1]}}"#;
        let mut c = config("x = read(f, 0)", Mode::SafeWhileF, fs);
        c.mode = Mode::WhileF;
        assert!(step(&c, &Bounds::default(), &Options::default()).is_empty());
        let mut c = whilef("(x, p) = read(f)", fs);
        c.mode = Mode::SafeWhileF;
        assert!(step(&c, &Bounds::default(), &Options::default()).is_empty());
    }

    #[test]
    fn rule_names_are_distinct() {
        let names: std::collections::BTreeSet<&str> = Rule::ALL.iter().map(|r| r.name()).collect();
        assert_eq!(names.len(), Rule::ALL.len());
    }
}
