//! Inputs shared by the benchmarks.

use filesafe_core::corpus::by_name;
use filesafe_core::{Bounds, Configuration, Options};

/// The forkfor read example with `k` copies allowed.
pub fn motivating(k: usize) -> (Configuration, Bounds, Options) {
    let e = by_name("motivating").expect("bundled example");
    (e.initial(), e.bounds().with_forkfor_max(k), e.options())
}

/// A program with `n` sequential reads inside a loop, used for parser
/// throughput.
pub fn long_program(n: usize) -> String {
    let mut src = String::from("i = 0; open(f);\n");
    for j in 0..n {
        src.push_str(&format!(
            "while i < {j} do {{(x, p) = read(f); y = y + x * {j}; i = i + 1}};\n"
        ));
    }
    src.push_str("close(f)\n");
    src
}
