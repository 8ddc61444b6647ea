use std::fmt::{self, Display, Formatter, Write};

use super::ast::{Atom, Program, Stmt};

/// Renders a program in concrete syntax. The output reparses (in the
/// program's mode) to the same tree, with statement sequences in their
/// canonical right-nested form.
pub fn pretty_print(program: &Program) -> String {
    program.body.to_string()
}

// Precedence levels used to decide where parentheses are needed.
const LEVEL_COMMAND: u8 = 0;
const LEVEL_OR: u8 = 1;
const LEVEL_AND: u8 = 2;
const LEVEL_PRIMARY: u8 = 6;

fn level(a: &Atom) -> u8 {
    match a {
        Atom::Int(_)
        | Atom::Var(_)
        | Atom::Open(_)
        | Atom::Close(_)
        | Atom::Skip
        | Atom::Seq(..) => LEVEL_PRIMARY,
        Atom::Bin(op, ..) => op.precedence(),
        Atom::And(..) => LEVEL_AND,
        Atom::Or(..) => LEVEL_OR,
        Atom::Assign(..)
        | Atom::If(..)
        | Atom::While(..)
        | Atom::ReadNd { .. }
        | Atom::ReadAt { .. } => LEVEL_COMMAND,
    }
}

fn operand(f: &mut Formatter<'_>, a: &Atom, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({a})")
    } else {
        write!(f, "{a}")
    }
}

fn infix(f: &mut Formatter<'_>, this: u8, sym: &str, lhs: &Atom, rhs: &Atom) -> fmt::Result {
    operand(f, lhs, level(lhs) < this)?;
    write!(f, " {sym} ")?;
    // left-associative: an equal-precedence right operand needs parentheses
    operand(f, rhs, level(rhs) <= this)
}

impl Display for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Int(n) => write!(f, "{n}"),
            Atom::Var(x) => f.write_str(x),
            Atom::Bin(op, a, b) => infix(f, op.precedence(), op.symbol(), a, b),
            Atom::And(a, b) => infix(f, LEVEL_AND, "&&", a, b),
            Atom::Or(a, b) => infix(f, LEVEL_OR, "||", a, b),
            Atom::Assign(x, a) => write!(f, "{x} = {a}"),
            Atom::If(c, t, e) => write!(f, "if {c} then {t} else {e}"),
            Atom::While(c, b) => write!(f, "while {c} do {b}"),
            Atom::Seq(first, rest) => {
                write!(f, "{{{first}")?;
                let mut rest: &Atom = rest;
                while let Atom::Seq(next, tail) = rest {
                    write!(f, "; {next}")?;
                    rest = tail;
                }
                write!(f, "; {rest}}}")
            }
            Atom::Open(file) => write!(f, "open({file})"),
            Atom::Close(file) => write!(f, "close({file})"),
            Atom::ReadNd {
                value,
                pointer,
                file,
            } => write!(f, "({value}, {pointer}) = read({file})"),
            Atom::ReadAt { value, file, pos } => write!(f, "{value} = read({file}, {pos})"),
            Atom::Skip => f.write_str("skip"),
        }
    }
}

impl Display for Stmt {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Atom(a) => write!(f, "{a}"),
            Stmt::Seq(a, b) => write!(f, "{a}; {b}"),
            Stmt::Fork(branches) => {
                f.write_str("fork{")?;
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{b}")?;
                }
                f.write_char('}')
            }
            Stmt::ForkFor(body) => write!(f, "forkfor{{{body}}}"),
            Stmt::ForkIf(arms) => {
                f.write_str("forkif{")?;
                for (i, (guard, body)) in arms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "({guard}, {body})")?;
                }
                f.write_char('}')
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ast::{BinOp, Mode};
    use crate::syntax::parse_program;

    #[test]
    fn simple_forms() {
        assert_eq!(Stmt::Atom(Atom::Skip).to_string(), "skip");
        let s = Stmt::seq(Atom::open("f").into(), Atom::close("f").into());
        assert_eq!(s.to_string(), "open(f); close(f)");
    }

    #[test]
    fn parenthesizes_only_when_needed() {
        let a = Atom::bin(
            BinOp::Mul,
            Atom::bin(BinOp::Add, Atom::Int(1), Atom::Int(2)),
            Atom::bin(BinOp::Sub, Atom::Int(3), Atom::Int(4)),
        );
        assert_eq!(a.to_string(), "(1 + 2) * (3 - 4)");
        let b = Atom::bin(
            BinOp::Sub,
            Atom::Int(1),
            Atom::bin(BinOp::Sub, Atom::Int(2), Atom::Int(3)),
        );
        assert_eq!(b.to_string(), "1 - (2 - 3)");
        let c = Atom::bin(
            BinOp::Add,
            Atom::if_(Atom::var("c"), Atom::Int(1), Atom::Int(2)),
            Atom::Int(3),
        );
        assert_eq!(c.to_string(), "(if c then 1 else 2) + 3");
    }

    #[test]
    fn blocks_flatten_right_spine() {
        let a = Atom::seq(Atom::Skip, Atom::seq(Atom::open("f"), Atom::close("f")));
        assert_eq!(a.to_string(), "{skip; open(f); close(f)}");
        let b = Atom::seq(Atom::seq(Atom::Skip, Atom::Skip), Atom::Skip);
        assert_eq!(b.to_string(), "{{skip; skip}; skip}");
    }

    #[test]
    fn corpus_style_round_trip() {
        let text = "open(f); forkfor{(x, p) = read(f); y = p}; close(f)";
        let p = parse_program(text, Mode::WhileF).unwrap();
        assert_eq!(pretty_print(&p), text);
    }
}
