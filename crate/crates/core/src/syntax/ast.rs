use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Binary operators. Comparisons evaluate to `1` or `0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Le,
    Ge,
    Lt,
    Gt,
    Eq,
    Ne,
}

impl BinOp {
    pub const ALL: [BinOp; 10] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Le,
        BinOp::Ge,
        BinOp::Lt,
        BinOp::Gt,
        BinOp::Eq,
        BinOp::Ne,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
        }
    }

    /// Binding strength; higher binds tighter. `||` is 1 and `&&` is 2.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Le | BinOp::Ge | BinOp::Lt | BinOp::Gt | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }

    /// Applies the operator. `None` means the operation is undefined
    /// (division by zero or overflow) and the configuration is stuck.
    pub fn apply(self, lhs: i64, rhs: i64) -> Option<i64> {
        let truth = |b: bool| Some(i64::from(b));
        match self {
            BinOp::Add => lhs.checked_add(rhs),
            BinOp::Sub => lhs.checked_sub(rhs),
            BinOp::Mul => lhs.checked_mul(rhs),
            // checked_div truncates toward zero and rejects rhs == 0
            BinOp::Div => lhs.checked_div(rhs),
            BinOp::Le => truth(lhs <= rhs),
            BinOp::Ge => truth(lhs >= rhs),
            BinOp::Lt => truth(lhs < rhs),
            BinOp::Gt => truth(lhs > rhs),
            BinOp::Eq => truth(lhs == rhs),
            BinOp::Ne => truth(lhs != rhs),
        }
    }
}

/// Grammar-A units: expressions and atomic commands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    Int(i64),
    Var(String),
    Bin(BinOp, Box<Atom>, Box<Atom>),
    And(Box<Atom>, Box<Atom>),
    Or(Box<Atom>, Box<Atom>),
    Assign(String, Box<Atom>),
    If(Box<Atom>, Box<Atom>, Box<Atom>),
    While(Box<Atom>, Box<Atom>),
    /// `{a1; a2}`: sequencing inside an atom (if/while bodies). Runs as one
    /// unit when scheduled by a fork.
    Seq(Box<Atom>, Box<Atom>),
    Open(String),
    Close(String),
    /// `(x, p) = read(f)`
    ReadNd {
        value: String,
        pointer: String,
        file: String,
    },
    /// `x = read(f, pos)`
    ReadAt {
        value: String,
        file: String,
        pos: Box<Atom>,
    },
    Skip,
}

impl Atom {
    pub fn int(n: i64) -> Atom {
        Atom::Int(n)
    }

    pub fn var(x: impl Into<String>) -> Atom {
        Atom::Var(x.into())
    }

    pub fn bin(op: BinOp, lhs: Atom, rhs: Atom) -> Atom {
        Atom::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn and(lhs: Atom, rhs: Atom) -> Atom {
        Atom::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Atom, rhs: Atom) -> Atom {
        Atom::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn assign(x: impl Into<String>, value: Atom) -> Atom {
        Atom::Assign(x.into(), Box::new(value))
    }

    pub fn if_(cond: Atom, then: Atom, otherwise: Atom) -> Atom {
        Atom::If(Box::new(cond), Box::new(then), Box::new(otherwise))
    }

    pub fn while_(cond: Atom, body: Atom) -> Atom {
        Atom::While(Box::new(cond), Box::new(body))
    }

    pub fn seq(first: Atom, second: Atom) -> Atom {
        Atom::Seq(Box::new(first), Box::new(second))
    }

    pub fn open(f: impl Into<String>) -> Atom {
        Atom::Open(f.into())
    }

    pub fn close(f: impl Into<String>) -> Atom {
        Atom::Close(f.into())
    }

    pub fn read_nd(
        value: impl Into<String>,
        pointer: impl Into<String>,
        file: impl Into<String>,
    ) -> Atom {
        Atom::ReadNd {
            value: value.into(),
            pointer: pointer.into(),
            file: file.into(),
        }
    }

    pub fn read_at(value: impl Into<String>, file: impl Into<String>, pos: Atom) -> Atom {
        Atom::ReadAt {
            value: value.into(),
            file: file.into(),
            pos: Box::new(pos),
        }
    }

    /// Direct sub-atoms, left to right.
    pub fn children(&self) -> Vec<&Atom> {
        match self {
            Atom::Int(_)
            | Atom::Var(_)
            | Atom::Open(_)
            | Atom::Close(_)
            | Atom::ReadNd { .. }
            | Atom::Skip => Vec::new(),
            Atom::Bin(_, a, b) | Atom::And(a, b) | Atom::Or(a, b) | Atom::While(a, b) => {
                vec![a, b]
            }
            Atom::Seq(a, b) => vec![a, b],
            Atom::Assign(_, a) => vec![a],
            Atom::ReadAt { pos, .. } => vec![pos],
            Atom::If(c, t, e) => vec![c, t, e],
        }
    }

    pub(crate) fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        f(self);
        for child in self.children() {
            child.visit(f);
        }
    }
}

/// Statements: atoms plus sequencing and the fork family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stmt {
    Atom(Atom),
    Seq(Box<Stmt>, Box<Stmt>),
    Fork(Vec<Stmt>),
    ForkFor(Box<Stmt>),
    ForkIf(Vec<(Atom, Stmt)>),
}

impl Stmt {
    pub fn seq(first: Stmt, second: Stmt) -> Stmt {
        Stmt::Seq(Box::new(first), Box::new(second))
    }

    /// Right-nested sequence of the given statements. Panics on an empty list.
    pub fn seq_all(stmts: impl IntoIterator<Item = Stmt>) -> Stmt {
        let mut items: Vec<Stmt> = stmts.into_iter().collect();
        let mut acc = items.pop().expect("seq_all needs at least one statement");
        while let Some(prev) = items.pop() {
            acc = Stmt::seq(prev, acc);
        }
        acc
    }

    pub fn is_fork_family(&self) -> bool {
        matches!(self, Stmt::Fork(_) | Stmt::ForkFor(_) | Stmt::ForkIf(_))
    }

    /// Whether a fork-family node occurs anywhere in this statement.
    pub fn contains_fork(&self) -> bool {
        match self {
            Stmt::Atom(_) => false,
            Stmt::Seq(a, b) => a.contains_fork() || b.contains_fork(),
            Stmt::Fork(_) | Stmt::ForkFor(_) | Stmt::ForkIf(_) => true,
        }
    }

    /// Visits every atom node in preorder (including atoms nested in atoms
    /// and forkif guards).
    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Stmt::Atom(a) => a.visit(f),
            Stmt::Seq(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            Stmt::Fork(branches) => branches.iter().for_each(|b| b.visit_atoms(f)),
            Stmt::ForkFor(body) => body.visit_atoms(f),
            Stmt::ForkIf(arms) => {
                for (guard, body) in arms {
                    guard.visit(f);
                    body.visit_atoms(f);
                }
            }
        }
    }

    /// Converts a fork-free statement into a single atom, turning statement
    /// sequencing into atom sequencing. `None` if a fork-family node occurs.
    pub fn to_atom(&self) -> Option<Atom> {
        match self {
            Stmt::Atom(a) => Some(a.clone()),
            Stmt::Seq(a, b) => Some(Atom::seq(a.to_atom()?, b.to_atom()?)),
            _ => None,
        }
    }
}

impl From<Atom> for Stmt {
    fn from(a: Atom) -> Stmt {
        Stmt::Atom(a)
    }
}

/// Which read rule the program is written for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    /// `(x, p) = read(f)`: the position is chosen by the machine.
    #[serde(rename = "whilef")]
    WhileF,
    /// `x = read(f, n)`: the position is supplied by the program.
    #[serde(rename = "safe")]
    SafeWhileF,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::WhileF => "whilef",
            Mode::SafeWhileF => "safe",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error("`(x, p) = read(f)` is not available in safe mode")]
    NondeterministicReadInSafeMode,
    #[error("`x = read(f, n)` is not available in whilef mode")]
    PositionedReadInWhileF,
    #[error("fork, forkfor and forkif may not be nested inside a fork body")]
    NestedFork,
    #[error("fork and forkif need at least one branch")]
    EmptyFork,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub mode: Mode,
    pub body: Stmt,
    pub files: BTreeSet<String>,
}

impl Program {
    /// Validates `body` against `mode` and collects the file names it uses.
    pub fn new(mode: Mode, body: Stmt) -> Result<Program, ProgramError> {
        check_fork_nesting(&body)?;
        let mut files = BTreeSet::new();
        let mut error = None;
        body.visit_atoms(&mut |a| match a {
            Atom::Open(f) | Atom::Close(f) => {
                files.insert(f.clone());
            }
            Atom::ReadNd { file, .. } => {
                files.insert(file.clone());
                if mode == Mode::SafeWhileF {
                    error.get_or_insert(ProgramError::NondeterministicReadInSafeMode);
                }
            }
            Atom::ReadAt { file, .. } => {
                files.insert(file.clone());
                if mode == Mode::WhileF {
                    error.get_or_insert(ProgramError::PositionedReadInWhileF);
                }
            }
            _ => {}
        });
        match error {
            Some(e) => Err(e),
            None => Ok(Program { mode, body, files }),
        }
    }
}

fn check_fork_nesting(s: &Stmt) -> Result<(), ProgramError> {
    match s {
        Stmt::Atom(_) => Ok(()),
        Stmt::Seq(a, b) => {
            check_fork_nesting(a)?;
            check_fork_nesting(b)
        }
        Stmt::Fork(branches) => {
            if branches.is_empty() {
                Err(ProgramError::EmptyFork)
            } else if branches.iter().any(Stmt::contains_fork) {
                Err(ProgramError::NestedFork)
            } else {
                Ok(())
            }
        }
        Stmt::ForkFor(body) => {
            if body.contains_fork() {
                Err(ProgramError::NestedFork)
            } else {
                Ok(())
            }
        }
        Stmt::ForkIf(arms) => {
            if arms.is_empty() {
                Err(ProgramError::EmptyFork)
            } else if arms.iter().any(|(_, b)| b.contains_fork()) {
                Err(ProgramError::NestedFork)
            } else {
                Ok(())
            }
        }
    }
}
