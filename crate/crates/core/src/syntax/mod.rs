//! Abstract syntax, parser and pretty-printer for while_f / SafeWhile_f
//! programs.

mod ast;
mod parser;
mod pretty;

pub use ast::{Atom, BinOp, Mode, Program, ProgramError, Stmt};
pub use parser::{parse_program, ParseError, RESERVED_PREFIX};
pub use pretty::pretty_print;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("fork, forkfor and forkif cannot be split into atoms")]
pub struct NestedForkError;

/// Splits a fork-free statement into its grammar-A units in program order.
///
/// Statement sequencing is flattened. Every atom, including `if`, `while`
/// and braced blocks, stays a single unit.
pub fn atoms_of(s: &Stmt) -> Result<Vec<Atom>, NestedForkError> {
    fn go(s: &Stmt, out: &mut Vec<Atom>) -> Result<(), NestedForkError> {
        match s {
            Stmt::Atom(a) => {
                out.push(a.clone());
                Ok(())
            }
            Stmt::Seq(a, b) => {
                go(a, out)?;
                go(b, out)
            }
            Stmt::Fork(_) | Stmt::ForkFor(_) | Stmt::ForkIf(_) => Err(NestedForkError),
        }
    }
    let mut out = Vec::new();
    go(s, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_sequence() {
        let s = Stmt::seq(
            Atom::assign("x", Atom::Int(1)).into(),
            Atom::assign("y", Atom::Int(2)).into(),
        );
        assert_eq!(
            atoms_of(&s).unwrap(),
            vec![
                Atom::assign("x", Atom::Int(1)),
                Atom::assign("y", Atom::Int(2))
            ]
        );
    }

    #[test]
    fn while_is_one_unit() {
        let w = Atom::while_(Atom::var("c"), Atom::var("b"));
        assert_eq!(atoms_of(&w.clone().into()).unwrap(), vec![w]);
    }

    #[test]
    fn forkfor_body_of_motivating_example() {
        let body = Stmt::seq(
            Atom::read_nd("x", "p", "f").into(),
            Atom::assign("y", Atom::var("p")).into(),
        );
        assert_eq!(
            atoms_of(&body).unwrap(),
            vec![
                Atom::read_nd("x", "p", "f"),
                Atom::assign("y", Atom::var("p"))
            ]
        );
    }

    #[test]
    fn fork_nodes_are_not_atoms() {
        let s = Stmt::seq(
            Atom::Skip.into(),
            Stmt::ForkFor(Box::new(Atom::Skip.into())),
        );
        assert_eq!(atoms_of(&s), Err(NestedForkError));
    }
}
