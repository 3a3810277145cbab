//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so the
//! lines come out in order and undisturbed by the test harness.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use delphic::domains::{build, Domain, DomainParams};
use delphic::equivalence::{
    check_plan_equiv, check_solution_identity, check_truth_equiv, check_update_equiv,
    exhaustive_min_length, random_task, Verdict,
};
use delphic::fixtures;
use delphic::formula::parse_formula;
use delphic::planner::{replay, solve, PlanningTask, Semantics, SolveOptions, SolveOutcome};
use delphic::possibility::{decorate_state, EventualityStore, PossId, UpdateOptions};

const SEED: u64 = 20_240_917;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

fn coin_product() -> Outcome {
    let fx = fixtures::coin();
    let next = match fx.state.product_update(&fx.peek) {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    let knows = parse_formula("box(a,h)", &fx.vocab).unwrap();
    let b_knows = parse_formula("box(b,or(box(a,h),box(a,neg(h))))", &fx.vocab).unwrap();
    let worlds = next.model().num_worlds();
    let (k, b) = (next.eval(&knows), next.eval(&b_knows));
    let detail = format!("{worlds} worlds, box(a,h)={k}, b knows whether a knows={b}");
    if worlds == 3 && k && !b {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn coin_union() -> Outcome {
    let fx = fixtures::coin();
    let (mut store, w) = decorate_state(&fx.state);
    let originals = [PossId(0), PossId(1)];
    let mut evs = EventualityStore::new(2);
    let f = evs.decorate_action(&fx.peek);
    let next = match store.union_update(&evs, &w, &f, 1, UpdateOptions::default()) {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    if next.designated().len() != 1 {
        return fail(format!("spectrum {:?}", next.designated()));
    }
    let v3 = next.designated()[0];
    let b_info = store.info(v3, fx.b).to_vec();
    let a_info = store.info(v3, fx.a).to_vec();
    let detail = format!("spectrum {{v{}}}, v(a)={a_info:?}, v(b)={b_info:?}", v3.0);
    if b_info == originals && a_info == [v3] && !originals.contains(&v3) {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn report(r: delphic::equivalence::Report) -> Outcome {
    let detail = format!("{} trials, {} disagreements", r.trials, r.failures.len());
    match r.failures.first() {
        None => pass(detail),
        Some(f) => fail(format!("{detail}; first at seed {}: {}", f.seed, f.detail)),
    }
}

fn small_benchmarks() -> Outcome {
    use Domain::*;
    let p = |d, n, k, m| DomainParams::new(d).agents(n).rooms(k).boxes(m);
    // Every frozen length at most 4 in these families.
    let instances = [
        (p(Cb, 3, 0, 0).goal(0), 2),
        (p(Cb, 3, 0, 0).goal(1), 3),
        (p(Cc, 2, 2, 2).goal(0), 3),
        (p(Cc, 2, 2, 2).goal(1), 4),
        (p(Cc, 2, 3, 2).goal(0), 4),
        (p(Gr, 3, 2, 0).goal(0), 2),
        (p(Gr, 3, 2, 0).goal(1), 3),
        (p(Gr, 3, 2, 0).goal(2), 4),
        (p(Sc, 3, 4, 0).goal(0), 3),
        (p(Sc, 3, 4, 0).goal(1), 4),
    ];
    for (params, expected) in instances {
        let task = build(&params).unwrap();
        let r = check_plan_equiv(&task, 6, None);
        let label = format!("{} {}", params.domain, params.label());
        if r.verdict != Verdict::Agree {
            return fail(format!("{label}: {}", r.detail));
        }
        match r.delphic.plan() {
            Some(plan) if plan.len() == expected => {}
            _ => return fail(format!("{label}: expected length {expected}, {}", r.detail)),
        }
    }
    pass(format!("{} instances agree", instances.len()))
}

fn bfs_optimality() -> Outcome {
    let mut checked = 0;
    let mut seed = SEED;
    let options = SolveOptions {
        max_bound: 3,
        ..Default::default()
    };
    let mut tried = 0;
    let mut by_length = [0usize; 4];
    while checked < 50 {
        tried += 1;
        if tried > 5000 {
            return fail(format!("only {checked} solvable tasks in {tried} samples"));
        }
        let task = random_task(seed);
        seed += 1;
        let Some(min) = exhaustive_min_length(&task, 3) else {
            continue;
        };
        for sem in Semantics::ALL {
            match solve(&task, sem, &options).outcome {
                SolveOutcome::Plan(p) if p.len() == min => {}
                other => {
                    return fail(format!(
                        "seed {}: minimum {min}, {sem} gave {other:?}",
                        seed - 1
                    ))
                }
            }
        }
        by_length[min] += 1;
        checked += 1;
    }
    pass(format!(
        "{checked} tasks ({tried} sampled, lengths 0..=3: {by_length:?}) match the exhaustive minimum"
    ))
}

fn compactness() -> Outcome {
    let task = build(&DomainParams::new(Domain::Cb).goal(4)).unwrap();
    let plan = ["distract_a_b", "signal_a_c", "open_a", "peek_a", "peek_c"];
    let (k, d) = match (
        replay(&task, &plan, Semantics::Kripke),
        replay(&task, &plan, Semantics::Delphic),
    ) {
        (Ok(k), Ok(d)) => (k, d),
        (k, d) => return fail(format!("replay failed: {:?} {:?}", k.err(), d.err())),
    };
    let ratio = d.total_nodes as f64 / k.total_nodes as f64;
    let detail = format!(
        "{} possibilities vs {} worlds, ratio {:.3} (limit 0.25)",
        d.total_nodes, k.total_nodes, ratio
    );
    if ratio <= 0.25 {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn median_time(task: &PlanningTask, sem: Semantics, runs: usize) -> Duration {
    let options = SolveOptions::default();
    let mut times: Vec<Duration> = (0..runs)
        .map(|_| {
            let t = Instant::now();
            let r = solve(task, sem, &options);
            let elapsed = t.elapsed();
            assert!(r.outcome.plan().is_some());
            elapsed
        })
        .collect();
    times.sort_unstable();
    times[runs / 2]
}

fn performance_direction() -> Outcome {
    let gr = DomainParams::new(Domain::Gr).agents(3);
    let sc = DomainParams::new(Domain::Sc).agents(3).rooms(4);
    let instances = [gr.goal(2), gr.goal(3), sc.goal(1), sc.goal(2), sc.goal(3)];
    let mut parts = Vec::new();
    let mut ok = true;
    for p in instances {
        let task = build(&p).unwrap();
        // Calibrate the number of repetitions on one Kripke run.
        let t = Instant::now();
        solve(&task, Semantics::Kripke, &SolveOptions::default());
        let once = t.elapsed().as_secs_f64().max(1e-6);
        let runs = ((0.5 / once) as usize).clamp(5, 2001) | 1;
        let k = median_time(&task, Semantics::Kripke, runs);
        let d = median_time(&task, Semantics::Delphic, runs);
        ok &= d <= k;
        parts.push(format!(
            "{} {}: delphic {:.3}ms vs kripke {:.3}ms",
            p.domain,
            p.label(),
            d.as_secs_f64() * 1e3,
            k.as_secs_f64() * 1e3
        ));
    }
    Outcome {
        ok,
        detail: parts.join("; "),
    }
}

fn grapevine_worlds() -> Outcome {
    let counts: Vec<usize> = (3..=5)
        .map(|n| {
            build(&DomainParams::new(Domain::Gr).agents(n))
                .unwrap()
                .initial
                .model()
                .num_worlds()
        })
        .collect();
    let detail = format!("|W| = {counts:?} for n = 3, 4, 5");
    if counts == [8, 16, 32] {
        pass(detail)
    } else {
        fail(detail)
    }
}

/// Name, time limit, check.
type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let secs = |s: u64| Some(Duration::from_secs(s));
    let criteria: [Criterion; 10] = [
        ("coin product update", secs(1), coin_product),
        (
            "coin union update reuses original nodes",
            secs(1),
            coin_union,
        ),
        ("truth oracle", secs(10), || {
            report(check_truth_equiv(SEED, 500))
        }),
        ("update oracle", secs(30), || {
            report(check_update_equiv(SEED, 200))
        }),
        ("bisimulation key oracle", secs(30), || {
            report(check_solution_identity(SEED, 200))
        }),
        ("short benchmark plans agree", secs(300), small_benchmarks),
        ("breadth-first optimality", secs(120), bfs_optimality),
        ("possibility compactness", secs(60), compactness),
        ("delphic no slower than kripke", None, performance_direction),
        ("grapevine initial worlds", None, grapevine_worlds),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut out = run();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > *limit {
                out.ok = false;
                out.detail += &format!("; over the {}s limit", limit.as_secs());
            }
        }
        if !out.ok {
            failed += 1;
        }
        println!(
            "criterion {:>2}: {} {name} [{:.2}s] {}",
            i + 1,
            if out.ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            out.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
