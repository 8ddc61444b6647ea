//! Bundled example programs with their filesystems and expected verdicts.

use crate::explorer::{Bounds, VerdictKind};
use crate::fs_spec::FsSpec;
use crate::machine::{initial_config, Configuration};
use crate::semantics::{Options, ReadMode};
use crate::syntax::{parse_program, Mode, Program};

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub mode: Mode,
    pub read_mode: ReadMode,
    pub source: &'static str,
    pub fs: &'static str,
    pub forkfor_max: usize,
    pub expected: VerdictKind,
}

impl CorpusEntry {
    pub fn program(&self) -> Program {
        parse_program(self.source, self.mode)
            .unwrap_or_else(|e| panic!("corpus program {} does not parse: {e}", self.name))
    }

    pub fn fs_spec(&self) -> FsSpec {
        FsSpec::from_json(self.fs)
            .unwrap_or_else(|e| panic!("corpus fs spec {} is invalid: {e}", self.name))
            .with_defaults_for(&self.program())
    }

    pub fn initial(&self) -> Configuration {
        let fs = self.fs_spec();
        initial_config(&self.program(), &fs.store, &fs.status).expect("fs spec covers the program")
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::default().with_forkfor_max(self.forkfor_max)
    }

    pub fn options(&self) -> Options {
        Options {
            read_mode: self.read_mode,
            truthy_guards: false,
        }
    }
}

macro_rules! entry {
    ($name:literal, $file:literal, $mode:ident, $read:ident, $fs:literal, $k:literal, $expected:ident) => {
        CorpusEntry {
            name: $name,
            mode: Mode::$mode,
            read_mode: ReadMode::$read,
            source: include_str!(concat!("../corpus/", $file)),
            fs: $fs,
            forkfor_max: $k,
            expected: VerdictKind::$expected,
        }
    };
}

#[rustfmt::skip]
pub fn corpus() -> Vec<CorpusEntry> {
    vec![
        entry!("motivating", "motivating.wf", WhileF, Cursor, r#"{"f": {"contents": [5, 6, 7]}}"#, 3, Safe),
        entry!("open_twice", "open_twice.wf", WhileF, Cursor, "{}", 2, Unsafe),
        entry!("close_twice", "close_twice.wf", WhileF, Cursor, "{}", 2, Unsafe),
        entry!("close_unopened", "close_unopened.wf", WhileF, Cursor, "{}", 2, Unsafe),
        entry!("read_closed", "read_closed.wf", WhileF, Cursor, r#"{"f": {"contents": [4]}}"#, 2, Unsafe),
        entry!("skip", "skip.wf", WhileF, Cursor, "{}", 2, Safe),
        entry!("arith", "arith.wf", WhileF, Cursor, "{}", 2, Safe),
        entry!("logic", "logic.wf", WhileF, Cursor, "{}", 2, Safe),
        entry!("while_count", "while_count.wf", WhileF, Cursor, "{}", 2, Safe),
        entry!("read_loop", "read_loop.wf", WhileF, Cursor, r#"{"f": {"contents": [1, 2, 3]}}"#, 2, Safe),
        entry!("fork_files", "fork_files.wf", WhileF, Cursor, "{}", 2, Safe),
        entry!("fork_race", "fork_race.wf", WhileF, Cursor, "{}", 2, Unsafe),
        entry!("forkif", "forkif.wf", WhileF, Cursor, "{}", 2, Safe),
        entry!("forkfor_close", "forkfor_close.wf", WhileF, Cursor, "{}", 2, Unsafe),
        entry!("gadget", "gadget.wf", WhileF, Oracle, r#"{"f": {"contents": [1, 2, 3]}}"#, 1, Unsafe),
        entry!("guard_two", "guard_two.wf", WhileF, Cursor, "{}", 2, Unsafe),
        entry!("div_zero", "div_zero.wf", WhileF, Cursor, "{}", 2, Unsafe),
        entry!("unbound", "unbound.wf", WhileF, Cursor, "{}", 2, Unsafe),
        entry!("value_result", "value_result.wf", WhileF, Cursor, "{}", 2, Safe),
        entry!("safe_read", "safe_read.swf", SafeWhileF, Cursor, r#"{"f": {"contents": [10, 20]}}"#, 2, Safe),
        entry!("safe_read_loop", "safe_read_loop.swf", SafeWhileF, Cursor, r#"{"f": {"contents": [1, 2, 3]}}"#, 2, Safe),
        entry!("safe_fork", "safe_fork.swf", SafeWhileF, Cursor, r#"{"f": {"contents": [3, 4]}}"#, 2, Safe),
        entry!("safe_fork_race", "safe_fork_race.swf", SafeWhileF, Cursor, r#"{"f": {"contents": [3, 4]}}"#, 2, Unsafe),
        entry!("safe_forkfor", "safe_forkfor.swf", SafeWhileF, Cursor, r#"{"f": {"contents": [1, 2, 3]}}"#, 3, Safe),
        entry!("safe_eof", "safe_eof.swf", SafeWhileF, Cursor, r#"{"f": {"contents": [1, 2, 3]}}"#, 2, Safe),
        entry!("safe_guard", "safe_guard.swf", SafeWhileF, Cursor, r#"{"f": {"contents": [5]}}"#, 2, Safe),
        entry!("safe_guard_mismatch", "safe_guard.swf", SafeWhileF, Cursor, r#"{"f": {"contents": [4]}}"#, 2, Unsafe),
        entry!("safe_read_closed", "safe_read_closed.swf", SafeWhileF, Cursor, "{}", 2, Unsafe),
        entry!("safe_double_close", "safe_double_close.swf", SafeWhileF, Cursor, r#"{"f": {"contents": [1, 2, 3]}}"#, 2, Unsafe),
    ]
}

pub fn by_name(name: &str) -> Option<CorpusEntry> {
    corpus().into_iter().find(|e| e.name == name)
}
