//! Moving between the two read disciplines: relaxing positioned reads into
//! machine-chosen reads, and mapping safe-mode traces onto whilef oracle
//! traces of the relaxed program.

use super::{Bounds, ExploreError, Trace};
use crate::machine::{classify, Configuration, Control, Frame};
use crate::semantics::{step, Choice, Options, ReadMode, Rule, RuleInstance};
use crate::syntax::{Atom, Mode, Program, Stmt, RESERVED_PREFIX};

/// Rewrites every read node with `f(value, file, pos)`, where `pos` is
/// `None` for machine-chosen reads. Nodes are visited in preorder.
fn map_reads_atom(a: &Atom, f: &mut impl FnMut(&str, &str, Option<&Atom>) -> Atom) -> Atom {
    let mut go = |x: &Atom| Box::new(map_reads_atom(x, f));
    match a {
        Atom::ReadAt { value, file, pos } => f(value, file, Some(pos)),
        Atom::ReadNd { value, file, .. } => f(value, file, None),
        Atom::Int(_) | Atom::Var(_) | Atom::Open(_) | Atom::Close(_) | Atom::Skip => a.clone(),
        Atom::Bin(op, l, r) => {
            let l = go(l);
            Atom::Bin(*op, l, go(r))
        }
        Atom::And(l, r) => {
            let l = go(l);
            Atom::And(l, go(r))
        }
        Atom::Or(l, r) => {
            let l = go(l);
            Atom::Or(l, go(r))
        }
        Atom::Assign(x, v) => Atom::Assign(x.clone(), go(v)),
        Atom::If(c, t, e) => {
            let c = go(c);
            let t = go(t);
            Atom::If(c, t, go(e))
        }
        Atom::While(c, b) => {
            let c = go(c);
            Atom::While(c, go(b))
        }
        Atom::Seq(l, r) => {
            let l = go(l);
            Atom::Seq(l, go(r))
        }
    }
}

fn map_reads_stmt(s: &Stmt, f: &mut impl FnMut(&str, &str, Option<&Atom>) -> Atom) -> Stmt {
    match s {
        Stmt::Atom(a) => Stmt::Atom(map_reads_atom(a, f)),
        Stmt::Seq(a, b) => {
            let a = map_reads_stmt(a, f);
            Stmt::seq(a, map_reads_stmt(b, f))
        }
        Stmt::Fork(branches) => Stmt::Fork(branches.iter().map(|b| map_reads_stmt(b, f)).collect()),
        Stmt::ForkFor(body) => Stmt::ForkFor(Box::new(map_reads_stmt(body, f))),
        Stmt::ForkIf(arms) => Stmt::ForkIf(
            arms.iter()
                .map(|(g, b)| {
                    let g = map_reads_atom(g, f);
                    (g, map_reads_stmt(b, f))
                })
                .collect(),
        ),
    }
}

fn relax_body(body: &Stmt) -> Stmt {
    let mut counter = 0usize;
    map_reads_stmt(body, &mut |value, file, _| {
        let pointer = format!("{RESERVED_PREFIX}{counter}");
        counter += 1;
        Atom::read_nd(value, pointer, file)
    })
}

/// Turns every `x = read(f, pos)` into `(x, p__i) = read(f)` with fresh
/// pointer variables numbered in preorder. The result is a whilef program.
pub fn relax_program(p: &Program) -> Result<Program, ExploreError> {
    if p.mode != Mode::SafeWhileF {
        return Err(ExploreError::AlreadyRelaxed);
    }
    Ok(Program {
        mode: Mode::WhileF,
        body: relax_body(&p.body),
        files: p.files.clone(),
    })
}

/// Control with every read reduced to `(value, file)`, so controls of the
/// two modes can be compared.
fn read_shape(control: &Control) -> Vec<Frame> {
    let mut erase = |value: &str, file: &str, _: Option<&Atom>| Atom::read_nd(value, "", file);
    control
        .iter()
        .map(|frame| match frame {
            Frame::Ctrl(s) => Frame::Ctrl(map_reads_stmt(s, &mut erase)),
            Frame::HoleOpRight { op, rhs } => Frame::HoleOpRight {
                op: *op,
                rhs: map_reads_atom(rhs, &mut erase),
            },
            Frame::HoleIf { then, otherwise } => Frame::HoleIf {
                then: map_reads_atom(then, &mut erase),
                otherwise: map_reads_atom(otherwise, &mut erase),
            },
            other => other.clone(),
        })
        .collect()
}

fn corresponds(relaxed: &Configuration, safe: &Configuration) -> Result<(), String> {
    if relaxed.status != safe.status {
        return Err("file status tables differ".into());
    }
    if relaxed.store != safe.store {
        return Err("file stores differ".into());
    }
    let visible = relaxed
        .env
        .iter()
        .filter(|(k, _)| !k.starts_with(RESERVED_PREFIX))
        .map(|(k, v)| (k.clone(), *v))
        .collect::<crate::machine::Env>();
    if visible != safe.env {
        return Err("environments differ outside the fresh pointer variables".into());
    }
    if read_shape(&relaxed.control) != read_shape(&safe.control) {
        return Err("control sequences differ".into());
    }
    Ok(())
}

/// Maps a safe-mode trace of `p` onto a whilef oracle-mode trace of
/// `relaxed = relax_program(p)`.
///
/// Each `read-at` at position `n` becomes a `read-nd` choosing `n` (past the
/// end of the file, the single past-the-end oracle position is chosen; both
/// read the end-of-file value). Steps that evaluate a read position have no
/// counterpart and are dropped. The result is replay-validated.
pub fn embed_trace(
    t: &Trace,
    relaxed: &Program,
    limits: &Bounds,
    opts: &Options,
) -> Result<Trace, ExploreError> {
    let invalid = |step: usize, reason: String| ExploreError::InvalidTrace { step, reason };
    if t.start.mode != Mode::SafeWhileF || relaxed.mode != Mode::WhileF {
        return Err(invalid(
            0,
            "expected a safe-mode trace and a whilef program".into(),
        ));
    }
    t.validate(limits, opts)?;
    let start_body = match t.start.control.iter().collect::<Vec<_>>().as_slice() {
        [Frame::Ctrl(body)] => body.clone(),
        _ => {
            return Err(invalid(
                0,
                "trace does not start from an initial configuration".into(),
            ))
        }
    };
    if relax_body(&start_body) != relaxed.body {
        return Err(invalid(
            0,
            "relaxed program does not match the trace".into(),
        ));
    }

    let oracle_opts = Options {
        read_mode: ReadMode::Oracle,
        ..*opts
    };
    let mut start = t.start.clone();
    start.mode = Mode::WhileF;
    start.control = Control::new(vec![Frame::Ctrl(relaxed.body.clone())]);
    let mut embedded = Trace::new(start);

    let configs: Vec<&Configuration> = t.configs().collect();
    for (i, (inst, _)) in t.steps.iter().enumerate() {
        let prev = configs[i];
        let next = configs[i + 1];
        if inst.rule == Rule::ReadAtFreeze || prev.evaluating_read_position() {
            continue;
        }
        let wanted = if inst.rule == Rule::ReadAt {
            let Some(Frame::Ctrl(Stmt::Atom(Atom::ReadAt { file, pos, .. }))) = prev.control.head()
            else {
                return Err(invalid(i, "read-at step without a read at the head".into()));
            };
            let Atom::Int(n) = **pos else {
                return Err(invalid(i, "read-at position is not evaluated".into()));
            };
            let len = prev.store.get(file).map_or(0, |d| d.contents.len());
            RuleInstance {
                rule: Rule::ReadNd,
                choice: Choice::OraclePos((n as usize).min(len)),
            }
        } else {
            inst.clone()
        };
        let (ri, succ) = step(embedded.last(), limits, &oracle_opts)
            .into_iter()
            .find(|(ri, _)| *ri == wanted)
            .ok_or_else(|| invalid(i, format!("no whilef step matches `{wanted}`")))?;
        corresponds(&succ, next).map_err(|reason| invalid(i, reason))?;
        embedded.steps.push((ri, succ));
    }

    embedded.validate(limits, &oracle_opts)?;
    if classify(embedded.last()) != classify(t.last()) {
        return Err(invalid(
            t.len(),
            "embedded trace and original trace end in different classes".into(),
        ));
    }
    Ok(embedded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::explore_graph;
    use crate::fs_spec::FsSpec;
    use crate::machine::initial_config;
    use crate::syntax::{parse_program, pretty_print};

    #[test]
    fn pointers_are_numbered_in_preorder() {
        let p = parse_program(
            "x = read(f, 0); if x == 1 then y = read(g, 2) else skip",
            Mode::SafeWhileF,
        )
        .unwrap();
        let r = relax_program(&p).unwrap();
        assert_eq!(r.mode, Mode::WhileF);
        let text = pretty_print(&r);
        assert!(text.contains("(x, p__0) = read(f)"), "{text}");
        assert!(text.contains("(y, p__1) = read(g)"), "{text}");
        assert_eq!(parse_program(&text, Mode::WhileF).unwrap(), r);
    }

    #[test]
    fn whilef_input_is_rejected() {
        let p = parse_program("skip", Mode::WhileF).unwrap();
        assert_eq!(relax_program(&p), Err(ExploreError::AlreadyRelaxed));
    }

    fn only_trace(src: &str, fs: &str) -> (Program, Trace) {
        let p = parse_program(src, Mode::SafeWhileF).unwrap();
        let fs = FsSpec::from_json(fs).unwrap().with_defaults_for(&p);
        let c = initial_config(&p, &fs.store, &fs.status).unwrap();
        let ex = explore_graph(&c, &Bounds::default(), &Options::default());
        assert_eq!(ex.final_nodes.len(), 1);
        (p, ex.trace_to(ex.final_nodes[0]))
    }

    #[test]
    fn positioned_read_becomes_an_oracle_choice() {
        let (p, t) = only_trace(
            "open(f); x = read(f, 1); close(f)",
            r#"{"f": {"contents": [10, 20]}}"#,
        );
        let relaxed = relax_program(&p).unwrap();
        let e = embed_trace(&t, &relaxed, &Bounds::default(), &Options::default()).unwrap();
        let read = e
            .steps
            .iter()
            .find(|(ri, _)| ri.rule == Rule::ReadNd)
            .unwrap();
        assert_eq!(read.0.choice, Choice::OraclePos(1));
        assert_eq!((read.1.env["x"], read.1.env["p__0"]), (20, 1));
        assert_eq!(classify(e.last()), crate::machine::Class::Final);
    }

    #[test]
    fn position_evaluation_steps_are_dropped() {
        let (p, t) = only_trace(
            "open(f); i = 0; x = read(f, i + 5); close(f)",
            r#"{"f": {"contents": [10]}}"#,
        );
        let relaxed = relax_program(&p).unwrap();
        let e = embed_trace(&t, &relaxed, &Bounds::default(), &Options::default()).unwrap();
        assert!(e.len() < t.len());
        let read = e
            .steps
            .iter()
            .find(|(ri, _)| ri.rule == Rule::ReadNd)
            .unwrap();
        assert_eq!(read.0.choice, Choice::OraclePos(1));
        assert_eq!(e.last().env["x"], 0);
    }

    #[test]
    fn mismatched_program_is_rejected() {
        let (_, t) = only_trace("open(f); x = read(f, 0); close(f)", "{}");
        let other = relax_program(&parse_program("skip", Mode::SafeWhileF).unwrap()).unwrap();
        assert!(matches!(
            embed_trace(&t, &other, &Bounds::default(), &Options::default()),
            Err(ExploreError::InvalidTrace { step: 0, .. })
        ));
    }
}
