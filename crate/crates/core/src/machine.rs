//! Machine configurations: the control sequence, the environment, the file
//! status table and the virtual file store.

use std::collections::BTreeMap;
use std::fmt::{self, Display, Formatter};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::syntax::{Atom, BinOp, Mode, Program, Stmt};

/// One entry of the control sequence. The hole variants are frozen contexts
/// waiting for the value of the sub-expression evaluated in front of them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Ctrl(Stmt),
    /// `□ op a2`
    HoleOpRight {
        op: BinOp,
        rhs: Atom,
    },
    /// `n op □`
    HoleOpLeft {
        lhs: i64,
        op: BinOp,
    },
    /// `x = □`
    HoleAssign(String),
    /// `if □ then a1 else a2`
    HoleIf {
        then: Atom,
        otherwise: Atom,
    },
    /// `x = read(f, □)`
    HoleReadAt {
        value: String,
        file: String,
    },
    Unit,
    Value(i64),
}

impl Frame {
    pub fn atom(a: Atom) -> Frame {
        Frame::Ctrl(Stmt::Atom(a))
    }

    pub fn is_hole(&self) -> bool {
        matches!(
            self,
            Frame::HoleOpRight { .. }
                | Frame::HoleOpLeft { .. }
                | Frame::HoleAssign(_)
                | Frame::HoleIf { .. }
                | Frame::HoleReadAt { .. }
        )
    }
}

impl Display for Frame {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Ctrl(s) => write!(f, "{s}"),
            Frame::HoleOpRight { op, rhs } => write!(f, "□ {} {rhs}", op.symbol()),
            Frame::HoleOpLeft { lhs, op } => write!(f, "{lhs} {} □", op.symbol()),
            Frame::HoleAssign(x) => write!(f, "{x} = □"),
            Frame::HoleIf { then, otherwise } => write!(f, "if □ then {then} else {otherwise}"),
            Frame::HoleReadAt { value, file } => write!(f, "{value} = read({file}, □)"),
            Frame::Unit => f.write_str("·"),
            Frame::Value(n) => write!(f, "{n}"),
        }
    }
}

/// The control sequence. Stored as a stack with the head last; iteration and
/// serialization use program order (head first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Control(Vec<Frame>);

impl Control {
    pub fn new(frames_head_first: Vec<Frame>) -> Control {
        let mut frames = frames_head_first;
        frames.reverse();
        Control(frames)
    }

    pub fn head(&self) -> Option<&Frame> {
        self.0.last()
    }

    /// The frame directly after the head.
    pub fn second(&self) -> Option<&Frame> {
        self.0.len().checked_sub(2).map(|i| &self.0[i])
    }

    pub fn pop(&mut self) -> Option<Frame> {
        self.0.pop()
    }

    pub fn push(&mut self, frame: Frame) {
        self.0.push(frame);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Frames in program order, head first.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Frame> + ExactSizeIterator {
        self.0.iter().rev()
    }

    /// The first `n` frames joined with `↦`, with `…` when more remain.
    pub fn summary(&self, n: usize) -> String {
        let mut parts: Vec<String> = self.iter().take(n).map(Frame::to_string).collect();
        if self.len() > n {
            parts.push("…".to_string());
        }
        parts.join(" ↦ ")
    }
}

impl Serialize for Control {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for Control {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Vec::<Frame>::deserialize(deserializer).map(Control::new)
    }
}

/// Variable environment. An unbound variable has no entry.
pub type Env = BTreeMap<String, i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FileStatus {
    #[serde(rename = "o")]
    Open,
    #[serde(rename = "c")]
    Closed,
}

impl Display for FileStatus {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FileStatus::Open => "o",
            FileStatus::Closed => "c",
        })
    }
}

pub type FileStatusTable = BTreeMap<String, FileStatus>;

/// Contents of one virtual file plus its read cursor. Contents never change
/// during a run.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FileData {
    pub contents: Arc<Vec<i64>>,
    pub cursor: usize,
}

impl FileData {
    pub fn new(contents: Vec<i64>) -> FileData {
        FileData {
            contents: Arc::new(contents),
            cursor: 0,
        }
    }
}

pub type FileStore = BTreeMap<String, FileData>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("file `{0}` is used by the program but has no store entry")]
    MissingFile(String),
    #[error("file `{0}` is not in the store")]
    UnknownFile(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub control: Control,
    pub env: Env,
    pub status: FileStatusTable,
    pub store: FileStore,
    pub mode: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Class {
    Final,
    NonFinal,
}

/// Builds `[S]` for a program: the whole body as the only control entry, an
/// empty environment and all cursors at zero.
///
/// The store and status table are restricted to the files the program uses.
pub fn initial_config(
    program: &Program,
    store: &FileStore,
    status: &FileStatusTable,
) -> Result<Configuration, MachineError> {
    let mut own_store = FileStore::new();
    let mut own_status = FileStatusTable::new();
    for f in &program.files {
        let data = store
            .get(f)
            .ok_or_else(|| MachineError::MissingFile(f.clone()))?;
        let st = status
            .get(f)
            .ok_or_else(|| MachineError::MissingFile(f.clone()))?;
        own_store.insert(
            f.clone(),
            FileData {
                contents: Arc::clone(&data.contents),
                cursor: 0,
            },
        );
        own_status.insert(f.clone(), *st);
    }
    let mut c = Configuration {
        control: Control::new(vec![Frame::Ctrl(program.body.clone())]),
        env: Env::new(),
        status: own_status,
        store: own_store,
        mode: program.mode,
    };
    c.settle();
    Ok(c)
}

/// Final exactly when the control is the unit or a single integer.
pub fn classify(c: &Configuration) -> Class {
    match c.control.0.as_slice() {
        [Frame::Unit] | [Frame::Value(_)] => Class::Final,
        _ => Class::NonFinal,
    }
}

/// 128-bit state fingerprint (truncated SHA-256 over the structural hash
/// stream of all five configuration fields).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub u128);

struct DigestHasher(Sha256);

impl Hasher for DigestHasher {
    fn finish(&self) -> u64 {
        let digest = self.0.clone().finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }

    fn write(&mut self, bytes: &[u8]) {
        self.0.update(bytes);
    }
}

pub fn canonical_key(c: &Configuration) -> CanonicalKey {
    let mut h = DigestHasher(Sha256::new());
    c.hash(&mut h);
    let digest = h.0.finalize();
    let mut bytes = [0u8; 16];
    bytes.copy_from_slice(&digest[..16]);
    CanonicalKey(u128::from_le_bytes(bytes))
}

impl Configuration {
    /// Applies the structural equations until none matches:
    ///
    /// - an integer literal at the head is a value,
    /// - a value in front of a hole is plugged into it,
    /// - a value in front of anything else is discarded,
    /// - an empty control is the unit.
    pub fn settle(&mut self) {
        loop {
            match self.control.head() {
                None => {
                    self.control.push(Frame::Unit);
                    return;
                }
                Some(Frame::Ctrl(Stmt::Atom(Atom::Int(n)))) => {
                    let n = *n;
                    self.control.pop();
                    self.control.push(Frame::Value(n));
                }
                Some(Frame::Value(n)) if self.control.len() > 1 => {
                    let n = *n;
                    self.control.pop();
                    if self.control.head().is_some_and(Frame::is_hole) {
                        let hole = self.control.pop().expect("hole present");
                        self.control.push(Frame::atom(plug(hole, n)));
                    }
                }
                Some(Frame::Unit) if self.control.len() > 1 => {
                    self.control.pop();
                }
                _ => return,
            }
        }
    }

    /// Whether any frozen `read(f, □)` frame is waiting in the control.
    pub fn evaluating_read_position(&self) -> bool {
        self.control
            .iter()
            .any(|f| matches!(f, Frame::HoleReadAt { .. }))
    }
}

fn plug(hole: Frame, n: i64) -> Atom {
    match hole {
        Frame::HoleOpRight { op, rhs } => Atom::Bin(op, Box::new(Atom::Int(n)), Box::new(rhs)),
        Frame::HoleOpLeft { lhs, op } => Atom::bin(op, Atom::Int(lhs), Atom::Int(n)),
        Frame::HoleAssign(x) => Atom::assign(x, Atom::Int(n)),
        Frame::HoleIf { then, otherwise } => Atom::if_(Atom::Int(n), then, otherwise),
        Frame::HoleReadAt { value, file } => Atom::read_at(value, file, Atom::Int(n)),
        Frame::Ctrl(_) | Frame::Unit | Frame::Value(_) => unreachable!("plug called on a non-hole"),
    }
}

pub fn format_env(env: &Env) -> String {
    let items: Vec<String> = env.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn format_status(status: &FileStatusTable) -> String {
    let items: Vec<String> = status.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    format!("{{{}}}", items.join(", "))
}
