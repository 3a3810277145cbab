//! Shortest plan lengths of the generated benchmark families. The values
//! were computed once by exhaustive enumeration of action sequences and are
//! frozen here; the planner must reproduce them under both semantics.

use delphic::domains::{build, Domain, DomainParams};
use delphic::equivalence::exhaustive_min_length;
use delphic::planner::{solve, validate_plan, PlanningTask, Semantics, SolveOptions, SolveOutcome};

fn params(domain: Domain, n: usize, k: usize, m: usize, d: usize) -> DomainParams {
    DomainParams::new(domain)
        .agents(n)
        .rooms(k)
        .boxes(m)
        .depth(d)
}

/// `(family, plan length per goal)`; `None` means no plan within the bound.
fn frozen() -> Vec<(DomainParams, Vec<Option<usize>>)> {
    use Domain::*;
    let s = |xs: &[usize]| xs.iter().map(|&x| Some(x)).collect::<Vec<_>>();
    vec![
        (params(Al, 2, 0, 0, 2), s(&[5])),
        (params(Al, 2, 0, 0, 3), s(&[5])),
        (params(Al, 2, 0, 0, 4), s(&[5])),
        (params(Al, 2, 0, 0, 10), s(&[5])),
        (params(Cb, 3, 0, 0, 0), s(&[2, 3, 5, 6, 7])),
        (params(Cc, 2, 2, 2, 0), s(&[3, 4, 5, 6])),
        (params(Cc, 3, 2, 2, 0), s(&[3, 4, 4, 5])),
        (params(Cc, 3, 2, 3, 0), s(&[3, 4, 4, 5])),
        (
            params(Cc, 2, 3, 2, 0),
            vec![Some(4), Some(7), Some(7), None],
        ),
        (params(Gr, 3, 2, 0, 0), s(&[2, 3, 4, 5])),
        (params(Gr, 4, 2, 0, 0), s(&[2, 3, 4, 5])),
        (params(Gr, 5, 2, 0, 0), s(&[2, 3, 4, 5])),
        (params(Sc, 3, 4, 0, 0), s(&[3, 4, 5, 6])),
        (params(Sc, 7, 4, 0, 0), s(&[3, 4, 5, 6])),
    ]
}

const BOUND: usize = 7;

fn check(task: &PlanningTask, semantics: Semantics, expected: Option<usize>, label: &str) {
    let options = SolveOptions {
        max_bound: BOUND,
        ..Default::default()
    };
    match (solve(task, semantics, &options).outcome, expected) {
        (SolveOutcome::Plan(p), Some(l)) => {
            assert_eq!(p.len(), l, "{label} {semantics}: {p}");
            let other = semantics.other();
            assert_eq!(
                validate_plan(task, &p.names(), other),
                Ok(true),
                "{label} under {other}"
            );
        }
        (SolveOutcome::NoPlanUpTo(b), None) => assert_eq!(b, BOUND),
        (got, _) => panic!("{label} {semantics}: expected {expected:?}, got {got:?}"),
    }
}

#[test]
fn delphic_reproduces_frozen_lengths() {
    for (p, lengths) in frozen() {
        for (g, &l) in lengths.iter().enumerate() {
            let p = p.goal(g);
            check(
                &build(&p).unwrap(),
                Semantics::Delphic,
                l,
                &format!("{} {}", p.domain, p.label()),
            );
        }
    }
}

/// Kripke search blows up on the longest instances, so it is checked where
/// the product states stay small.
#[test]
fn kripke_reproduces_frozen_lengths() {
    for (p, lengths) in frozen() {
        for (g, &l) in lengths.iter().enumerate() {
            let p = p.goal(g);
            if l.is_none_or(|l| l > 5) || (p.domain == Domain::Gr && p.agents > 3 && l == Some(5)) {
                continue;
            }
            check(
                &build(&p).unwrap(),
                Semantics::Kripke,
                l,
                &format!("{} {}", p.domain, p.label()),
            );
        }
    }
}

#[test]
fn exhaustive_enumeration_on_short_instances() {
    for (p, lengths) in frozen() {
        for (g, &l) in lengths.iter().enumerate() {
            if l.is_none_or(|l| l > 4) {
                continue;
            }
            let p = p.goal(g);
            assert_eq!(
                exhaustive_min_length(&build(&p).unwrap(), 5),
                l,
                "{} {}",
                p.domain,
                p.label()
            );
        }
    }
}
