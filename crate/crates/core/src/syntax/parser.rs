//! Recursive-descent parser for the concrete program syntax.
//!
//! ```text
//! program  ::= stmt
//! stmt     ::= unit (";" unit)* ";"?
//! unit     ::= "fork" "{" stmt ("," stmt)* "}"
//!            | "forkfor" "{" stmt "}"
//!            | "forkif" "{" "(" atom "," stmt ")" ("," "(" atom "," stmt ")")* "}"
//!            | atom
//! atom     ::= "if" atom "then" atom "else" atom
//!            | "while" atom "do" atom
//!            | "(" IDENT "," IDENT ")" "=" "read" "(" IDENT ")"
//!            | IDENT "=" "read" "(" IDENT "," atom ")"
//!            | IDENT "=" atom
//!            | or
//! or       ::= and ("||" and)*
//! and      ::= cmp ("&&" cmp)*
//! cmp      ::= sum (("<=" | ">=" | "<" | ">" | "==" | "!=") sum)*
//! sum      ::= term (("+" | "-") term)*
//! term     ::= unary (("*" | "/") unary)*
//! unary    ::= "-" INT | primary
//! primary  ::= INT | IDENT | "skip" | "open" "(" IDENT ")" | "close" "(" IDENT ")"
//!            | "{" atom (";" atom)* ";"? "}" | "(" atom ")"
//! ```

use std::fmt;

use super::ast::{Atom, BinOp, Mode, Program, ProgramError, Stmt};

/// Identifier prefix reserved for the fresh pointer variables introduced by
/// program relaxation.
pub const RESERVED_PREFIX: &str = "p__";

const KEYWORDS: &[&str] = &[
    "if", "then", "else", "while", "do", "open", "close", "read", "skip", "fork", "forkfor",
    "forkif",
];

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{column}: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },
    #[error("{line}:{column}: {source}")]
    Mode {
        line: usize,
        column: usize,
        source: ProgramError,
    },
    #[error("{line}:{column}: fork, forkfor and forkif may not appear inside a fork body")]
    NestedFork { line: usize, column: usize },
    #[error("{line}:{column}: identifier `{name}` uses the reserved prefix `{RESERVED_PREFIX}`")]
    Reserved {
        line: usize,
        column: usize,
        name: String,
    },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. }
            | ParseError::Mode { line, column, .. }
            | ParseError::NestedFork { line, column }
            | ParseError::Reserved { line, column, .. } => (*line, *column),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "integer `{n}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Kw(k) => write!(f, "`{k}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: &[&str] = &[
    "<=", ">=", "==", "!=", "&&", "||", "<", ">", "=", "+", "-", "*", "/", "(", ")", "{", "}", ",",
    ";",
];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = (line, column);
        if c.is_ascii_digit() {
            let begin = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[begin..i].iter().collect();
            column += i - begin;
            let n = digits.parse::<i64>().map_err(|_| ParseError::Syntax {
                line: start.0,
                column: start.1,
                expected: "an integer that fits in 64 bits".into(),
                found: format!("`{digits}`"),
            })?;
            tokens.push(Token {
                tok: Tok::Int(n),
                line: start.0,
                column: start.1,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[begin..i].iter().collect();
            column += i - begin;
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word),
            };
            tokens.push(Token {
                tok,
                line: start.0,
                column: start.1,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                column += sym.len();
                tokens.push(Token {
                    tok: Tok::Sym(sym),
                    line: start.0,
                    column: start.1,
                });
            }
            None => {
                return Err(ParseError::Syntax {
                    line,
                    column,
                    expected: "a token".into(),
                    found: format!("character `{c}`"),
                })
            }
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    mode: Mode,
}

/// Parses a whole program in the given mode.
pub fn parse_program(text: &str, mode: Mode) -> Result<Program, ParseError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
        mode,
    };
    let body = parser.stmt(false)?;
    parser.expect_eof()?;
    Program::new(mode, body).map_err(|source| ParseError::Mode {
        line: 1,
        column: 1,
        source,
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.tokens[self.pos];
        (t.line, t.column)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        let (line, column) = self.here();
        Err(ParseError::Syntax {
            line,
            column,
            expected: expected.to_string(),
            found: self.peek().to_string(),
        })
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Tok::Sym(s) if *s == sym)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Kw(k) if *k == kw)
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if self.is_sym(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            self.error(&format!("`{sym}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.error("`;` or end of input")
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let (line, column) = self.here();
                if self.mode == Mode::SafeWhileF && name.starts_with(RESERVED_PREFIX) {
                    return Err(ParseError::Reserved { line, column, name });
                }
                self.bump();
                Ok(name)
            }
            _ => self.error(what),
        }
    }

    fn mode_error<T>(&self, at: (usize, usize), source: ProgramError) -> Result<T, ParseError> {
        Err(ParseError::Mode {
            line: at.0,
            column: at.1,
            source,
        })
    }

    /// `in_fork` is set while parsing a fork body, where the fork family is
    /// rejected.
    fn stmt(&mut self, in_fork: bool) -> Result<Stmt, ParseError> {
        let mut units = vec![self.unit(in_fork)?];
        while self.eat_sym(";") {
            if self.starts_unit() {
                units.push(self.unit(in_fork)?);
            } else {
                break;
            }
        }
        Ok(Stmt::seq_all(units))
    }

    fn starts_unit(&self) -> bool {
        !matches!(
            self.peek(),
            Tok::Eof | Tok::Sym("}") | Tok::Sym(",") | Tok::Sym(")") | Tok::Sym(";")
        )
    }

    fn unit(&mut self, in_fork: bool) -> Result<Stmt, ParseError> {
        let at = self.here();
        let is_fork = self.is_kw("fork") || self.is_kw("forkfor") || self.is_kw("forkif");
        if is_fork && in_fork {
            return Err(ParseError::NestedFork {
                line: at.0,
                column: at.1,
            });
        }
        if self.is_kw("fork") {
            self.bump();
            self.expect_sym("{")?;
            let mut branches = vec![self.stmt(true)?];
            while self.eat_sym(",") {
                branches.push(self.stmt(true)?);
            }
            self.expect_sym("}")?;
            return Ok(Stmt::Fork(branches));
        }
        if self.is_kw("forkfor") {
            self.bump();
            self.expect_sym("{")?;
            let body = self.stmt(true)?;
            self.expect_sym("}")?;
            return Ok(Stmt::ForkFor(Box::new(body)));
        }
        if self.is_kw("forkif") {
            self.bump();
            self.expect_sym("{")?;
            let mut arms = vec![self.guarded_arm()?];
            while self.eat_sym(",") {
                arms.push(self.guarded_arm()?);
            }
            self.expect_sym("}")?;
            return Ok(Stmt::ForkIf(arms));
        }
        Ok(Stmt::Atom(self.atom()?))
    }

    fn guarded_arm(&mut self) -> Result<(Atom, Stmt), ParseError> {
        self.expect_sym("(")?;
        let guard = self.atom()?;
        self.expect_sym(",")?;
        let body = self.stmt(true)?;
        self.expect_sym(")")?;
        Ok((guard, body))
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let at = self.here();
        if self.is_kw("if") {
            self.bump();
            let cond = self.atom()?;
            self.expect_kw("then")?;
            let then = self.atom()?;
            self.expect_kw("else")?;
            let otherwise = self.atom()?;
            return Ok(Atom::if_(cond, then, otherwise));
        }
        if self.is_kw("while") {
            self.bump();
            let cond = self.atom()?;
            self.expect_kw("do")?;
            let body = self.atom()?;
            return Ok(Atom::while_(cond, body));
        }
        // (x, p) = read(f)
        if self.is_sym("(")
            && matches!(self.peek_at(1), Tok::Ident(_))
            && matches!(self.peek_at(2), Tok::Sym(","))
        {
            self.bump();
            let value = self.ident("a variable")?;
            self.expect_sym(",")?;
            let pointer = self.ident("a pointer variable")?;
            self.expect_sym(")")?;
            self.expect_sym("=")?;
            self.expect_kw("read")?;
            self.expect_sym("(")?;
            let file = self.ident("a file name")?;
            self.expect_sym(")")?;
            if self.mode == Mode::SafeWhileF {
                return self.mode_error(at, ProgramError::NondeterministicReadInSafeMode);
            }
            return Ok(Atom::read_nd(value, pointer, file));
        }
        if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Sym("=")) {
            let target = self.ident("a variable")?;
            self.bump();
            if self.is_kw("read") {
                let read_at = self.here();
                self.bump();
                self.expect_sym("(")?;
                let file = self.ident("a file name")?;
                if !self.is_sym(",") {
                    return self.error("`,` and a read position");
                }
                self.bump();
                let pos = self.atom()?;
                self.expect_sym(")")?;
                if self.mode == Mode::WhileF {
                    return self.mode_error(read_at, ProgramError::PositionedReadInWhileF);
                }
                return Ok(Atom::read_at(target, file, pos));
            }
            let value = self.atom()?;
            return Ok(Atom::assign(target, value));
        }
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Atom, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.eat_sym("||") {
            let rhs = self.and_expr()?;
            lhs = Atom::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Atom, ParseError> {
        let mut lhs = self.binary(3)?;
        while self.eat_sym("&&") {
            let rhs = self.binary(3)?;
            lhs = Atom::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn binop_here(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Sym(s) => BinOp::ALL.into_iter().find(|op| op.symbol() == *s),
            _ => None,
        }
    }

    /// Left-associative binary operators with precedence at least `min`.
    fn binary(&mut self, min: u8) -> Result<Atom, ParseError> {
        if min > 5 {
            return self.unary();
        }
        let mut lhs = self.binary(min + 1)?;
        while let Some(op) = self.binop_here().filter(|op| op.precedence() == min) {
            self.bump();
            let rhs = self.binary(min + 1)?;
            lhs = Atom::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Atom, ParseError> {
        if self.is_sym("-") {
            if let Tok::Int(n) = *self.peek_at(1) {
                self.bump();
                self.bump();
                return Ok(Atom::Int(-n));
            }
            self.bump();
            return self.error("an integer literal after unary `-`");
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Atom, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Atom::Int(n))
            }
            Tok::Ident(_) => Ok(Atom::Var(self.ident("a variable")?)),
            Tok::Kw("skip") => {
                self.bump();
                Ok(Atom::Skip)
            }
            Tok::Kw(kw @ ("open" | "close")) => {
                self.bump();
                self.expect_sym("(")?;
                let file = self.ident("a file name")?;
                self.expect_sym(")")?;
                Ok(if kw == "open" {
                    Atom::Open(file)
                } else {
                    Atom::Close(file)
                })
            }
            Tok::Sym("{") => {
                self.bump();
                let mut items = vec![self.atom()?];
                while self.eat_sym(";") {
                    if self.is_sym("}") {
                        break;
                    }
                    items.push(self.atom()?);
                }
                self.expect_sym("}")?;
                let mut acc = items.pop().expect("block has an item");
                while let Some(prev) = items.pop() {
                    acc = Atom::seq(prev, acc);
                }
                Ok(acc)
            }
            Tok::Sym("(") => {
                self.bump();
                let inner = self.atom()?;
                self.expect_sym(")")?;
                Ok(inner)
            }
            _ => self.error("an expression or command"),
        }
    }
}
