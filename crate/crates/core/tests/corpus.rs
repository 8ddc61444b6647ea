use filesafe_core::corpus::corpus;
use filesafe_core::syntax::{parse_program, pretty_print};
use filesafe_core::{explore, is_stuck, oracle_explore, Verdict, VerdictKind};

#[test]
fn corpus_verdicts_match_expectations() {
    for entry in corpus() {
        let verdict = explore(&entry.initial(), &entry.bounds(), &entry.options());
        assert_eq!(
            verdict.kind(),
            entry.expected,
            "{}: got {:?}",
            entry.name,
            verdict
        );
    }
}

#[test]
fn corpus_round_trips_through_pretty_printer() {
    for entry in corpus() {
        let p = entry.program();
        let printed = pretty_print(&p);
        let back = parse_program(&printed, p.mode).unwrap();
        assert_eq!(back, p, "{}: {printed}", entry.name);
    }
}

#[test]
fn unsafe_witnesses_replay_and_end_stuck() {
    for entry in corpus() {
        let (bounds, opts) = (entry.bounds(), entry.options());
        if let Verdict::Unsafe { witness, stuck } = explore(&entry.initial(), &bounds, &opts) {
            witness.validate(&bounds, &opts).unwrap();
            assert_eq!(witness.last(), &stuck);
            assert!(is_stuck(witness.last(), &bounds, &opts), "{}", entry.name);
        }
    }
}

#[test]
fn oracle_agrees_on_corpus() {
    for entry in corpus() {
        let (c0, bounds, opts) = (entry.initial(), entry.bounds(), entry.options());
        let fast = explore(&c0, &bounds, &opts);
        let slow = oracle_explore(&c0, &bounds, &opts);
        if fast.kind() != VerdictKind::Unknown && slow.kind() != VerdictKind::Unknown {
            assert_eq!(fast.kind(), slow.kind(), "{}", entry.name);
        }
    }
}
