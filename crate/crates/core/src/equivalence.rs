//! Randomised checks that the two semantics agree, plus the independent
//! oracles they rest on: a naive bisimulation fixpoint and an exhaustive
//! plan-length enumerator.

use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::events::{
    ActionDescription, EventId, EventSpec, GroundAction, GroundEvent, Group, GroupId,
};
use crate::fixtures;
use crate::formula::{Agent, Atom, Formula, Vocabulary};
use crate::kripke::{bisimilar_k, EpistemicStateK, KripkeModel, WorldId};
use crate::planner::{solve, validate_plan, PlanningTask, Semantics, SolveOptions, SolveOutcome};
use crate::possibility::{decorate_state, EventualityStore, UpdateOptions};
use crate::valuation::Valuation;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomInstanceParams {
    pub seed: u64,
    pub max_worlds: usize,
    pub max_events: usize,
    pub agents: usize,
    pub atoms: usize,
    pub depth: usize,
    /// Probability of each possible edge.
    pub density: f64,
}

impl Default for RandomInstanceParams {
    fn default() -> Self {
        RandomInstanceParams {
            seed: 0,
            max_worlds: 5,
            max_events: 3,
            agents: 3,
            atoms: 4,
            depth: 2,
            density: 0.4,
        }
    }
}

impl RandomInstanceParams {
    pub fn clamped(self) -> Self {
        RandomInstanceParams {
            max_worlds: self.max_worlds.clamp(1, 5),
            max_events: self.max_events.clamp(1, 3),
            agents: self.agents.clamp(1, 3),
            atoms: self.atoms.clamp(1, 4),
            depth: self.depth.min(2),
            density: self.density.clamp(0.0, 1.0),
            ..self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub seed: u64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub trials: usize,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Instance sampler. Each trial gets its own generator seeded with
/// `seed + trial`, so a failure can be replayed from its seed alone.
pub struct Sampler {
    rng: ChaCha8Rng,
    p: RandomInstanceParams,
}

impl Sampler {
    pub fn new(params: RandomInstanceParams, seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            p: params.clamped(),
        }
    }

    /// `(atoms, agents)` for one instance.
    pub fn shape(&mut self) -> (usize, usize) {
        (
            self.rng.gen_range(1..=self.p.atoms),
            self.rng.gen_range(1..=self.p.agents),
        )
    }

    pub fn state(&mut self, atoms: usize, agents: usize) -> EpistemicStateK {
        let n = self.rng.gen_range(1..=self.p.max_worlds);
        let valuations = (0..n)
            .map(|_| Valuation::from_bits(self.rng.gen_range(0..1u128 << atoms)))
            .collect();
        let mut edges = Vec::new();
        for i in 0..agents {
            for w in 0..n {
                for v in 0..n {
                    if self.rng.gen_bool(self.p.density) {
                        edges.push((Agent::new(i as u16), WorldId(w as u32), WorldId(v as u32)));
                    }
                }
            }
        }
        let model = KripkeModel::new(atoms, agents, valuations, edges).expect("valid sample");
        let mut designated: Vec<WorldId> = (0..n as u32)
            .filter(|_| self.rng.gen_bool(0.4))
            .map(WorldId)
            .collect();
        if designated.is_empty() {
            designated.push(WorldId(self.rng.gen_range(0..n as u32)));
        }
        EpistemicStateK::new(model, designated).expect("nonempty designated")
    }

    /// Diamonds and negations are drawn more often than the other nodes.
    pub fn formula(&mut self, atoms: usize, agents: usize, depth: usize) -> Formula {
        let leaf = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.15) {
                Formula::Top
            } else {
                Formula::atom(Atom::new(rng.gen_range(0..atoms as u16)))
            }
        };
        self.formula_sized(agents, depth, 4, &leaf)
    }

    fn formula_sized(
        &mut self,
        agents: usize,
        depth: usize,
        fuel: usize,
        leaf: &dyn Fn(&mut ChaCha8Rng) -> Formula,
    ) -> Formula {
        if fuel == 0 {
            return leaf(&mut self.rng);
        }
        let agent = Agent::new(self.rng.gen_range(0..agents as u16));
        let roll = self.rng.gen_range(0..100);
        match roll {
            0..=14 => leaf(&mut self.rng),
            15..=39 => Formula::not(self.formula_sized(agents, depth, fuel - 1, leaf)),
            40..=54 => Formula::and(
                self.formula_sized(agents, depth, fuel / 2, leaf),
                self.formula_sized(agents, depth, fuel / 2, leaf),
            ),
            55..=84 if depth > 0 => Formula::Dia(
                agent,
                Box::new(self.formula_sized(agents, depth - 1, fuel - 1, leaf)),
            ),
            85..=99 if depth > 0 => Formula::Box(
                agent,
                Box::new(self.formula_sized(agents, depth - 1, fuel - 1, leaf)),
            ),
            _ => leaf(&mut self.rng),
        }
    }

    pub fn action(&mut self, atoms: usize, agents: usize) -> GroundAction {
        let n = self.rng.gen_range(1..=self.p.max_events);
        let mut events = Vec::new();
        let mut idle = Vec::new();
        for _ in 0..n {
            if self.rng.gen_bool(0.3) {
                events.push(GroundEvent::new(Formula::Top, Vec::new()));
                idle.push(true);
                continue;
            }
            let pre = self.formula(atoms, agents, self.p.depth);
            let mut post = Vec::new();
            for p in 0..atoms as u16 {
                if self.rng.gen_bool(0.3) {
                    post.push((Atom::new(p), self.formula(atoms, agents, 1)));
                }
            }
            idle.push(pre.is_top() && post.is_empty());
            events.push(GroundEvent::new(pre, post));
        }
        let relations = (0..agents)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        (0..n as u32)
                            .filter(|_| self.rng.gen_bool(self.p.density.max(0.3)))
                            .map(EventId)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut designated: Vec<EventId> = (0..n as u32)
            .filter(|_| self.rng.gen_bool(0.5))
            .map(EventId)
            .collect();
        if designated.is_empty() {
            designated.push(EventId(0));
        }
        GroundAction::new(events, idle, relations, designated)
    }

    /// Rejection-samples an action applicable in `s`; after a few misses the
    /// first designated event's precondition is replaced by `top`.
    pub fn applicable_action(&mut self, s: &EpistemicStateK) -> GroundAction {
        let (atoms, agents) = (s.model().num_atoms(), s.model().num_agents());
        for _ in 0..20 {
            let a = self.action(atoms, agents);
            if s.applicable(&a) {
                return a;
            }
        }
        let a = self.action(atoms, agents);
        let forced = a.designated()[0];
        let events = a
            .events()
            .map(|e| {
                let ev = a.event(e);
                if e == forced {
                    GroundEvent::new(Formula::Top, ev.post.clone())
                } else {
                    ev.clone()
                }
            })
            .collect();
        let idle = a
            .events()
            .map(|e| {
                if e == forced {
                    a.assignments(e).is_empty()
                } else {
                    a.is_idle(e)
                }
            })
            .collect();
        let relations = (0..agents)
            .map(|i| {
                a.events()
                    .map(|e| a.successors(Agent::new(i as u16), e).to_vec())
                    .collect()
            })
            .collect();
        GroundAction::new(events, idle, relations, a.designated().to_vec())
    }
}

fn sampler(seed: u64) -> Sampler {
    Sampler::new(
        RandomInstanceParams {
            seed,
            ..Default::default()
        },
        seed,
    )
}

/// Plain-text dump of a state, for failure reports.
pub fn describe_state(s: &EpistemicStateK) -> String {
    let m = s.model();
    let worlds: Vec<String> = m
        .worlds()
        .map(|w| format!("{}:{:b}", w.0, m.valuation_of(w).bits()))
        .collect();
    let edges: Vec<String> = m
        .edges()
        .map(|(i, w, v)| format!("{}:{}->{}", i.index(), w.0, v.0))
        .collect();
    let designated: Vec<String> = s.designated().iter().map(|w| w.0.to_string()).collect();
    format!(
        "worlds [{}] edges [{}] designated [{}]",
        worlds.join(" "),
        edges.join(" "),
        designated.join(" ")
    )
}

fn describe_action(a: &GroundAction) -> String {
    let events: Vec<String> = a
        .events()
        .map(|e| format!("{}:{:?}/{:?}", e.0, a.pre(e), a.assignments(e)))
        .collect();
    let edges: Vec<String> = (0..a.num_agents())
        .flat_map(|i| {
            a.events().flat_map(move |e| {
                a.successors(Agent::new(i as u16), e)
                    .iter()
                    .map(move |f| format!("{i}:{}->{}", e.0, f.0))
                    .collect::<Vec<_>>()
            })
        })
        .collect();
    format!(
        "events [{}] edges [{}] designated {:?}",
        events.join(" "),
        edges.join(" "),
        a.designated()
    )
}

/// Truth agrees on a state and its decoration.
pub fn check_truth_equiv(seed: u64, trials: usize) -> Report {
    let mut report = Report {
        trials,
        failures: Vec::new(),
    };
    for t in 0..trials {
        let trial_seed = seed.wrapping_add(t as u64);
        let mut smp = sampler(trial_seed);
        let (atoms, agents) = smp.shape();
        let s = smp.state(atoms, agents);
        let f = smp.formula(atoms, agents, 3);
        let (store, spectrum) = decorate_state(&s);
        let k = s.eval(&f);
        let d = store.eval_spectrum(&spectrum, &f);
        let n = s.eval(&f.normalize());
        if k != d || k != n {
            report.failures.push(Failure {
                seed: trial_seed,
                detail: format!(
                    "kripke {k}, delphic {d}, normalized {n}; {f:?}; {}",
                    describe_state(&s)
                ),
            });
        }
    }
    report
}

/// Product update then decoration has the same canonical key as decoration
/// then union update, with and without memoization. The union result never
/// has more reachable possibilities than the product has worlds.
pub fn check_update_equiv(seed: u64, trials: usize) -> Report {
    let mut report = Report {
        trials,
        failures: Vec::new(),
    };
    for t in 0..trials {
        let trial_seed = seed.wrapping_add(t as u64);
        let mut smp = sampler(trial_seed);
        let (atoms, agents) = smp.shape();
        let s = smp.state(atoms, agents);
        let a = smp.applicable_action(&s);
        let fail = |why: &str| Failure {
            seed: trial_seed,
            detail: format!("{why}; {}; {}", describe_state(&s), describe_action(&a)),
        };
        let product = match s.product_update(&a) {
            Ok(p) => p,
            Err(e) => {
                report
                    .failures
                    .push(fail(&format!("product update failed: {e}")));
                continue;
            }
        };
        let (pstore, pspec) = decorate_state(&product);
        let expected = pstore.canonical_key(&pspec);

        let (mut store, spectrum) = decorate_state(&s);
        let mut evs = EventualityStore::new(agents);
        let e = evs.decorate_action(&a);
        if !store.applicable(&evs, &spectrum, &e) {
            report.failures.push(fail("applicability disagrees"));
            continue;
        }
        let updated = store
            .union_update(&evs, &spectrum, &e, 1, UpdateOptions::default())
            .expect("applicable");
        if store.canonical_key(&updated) != expected {
            report.failures.push(fail("keys differ"));
            continue;
        }
        if store.count_nodes(&updated).0 > product.model().num_worlds() {
            report
                .failures
                .push(fail("union update larger than product"));
            continue;
        }
        let plain = UpdateOptions {
            memoize: false,
            reuse_idle: false,
        };
        let fresh = store
            .union_update(&evs, &spectrum, &e, 2, plain)
            .expect("applicable");
        if store.canonical_key(&fresh) != expected {
            report.failures.push(fail("keys differ without reuse"));
        }
    }
    report
}

/// Largest bisimulation by brute-force deletion of pairs violating the
/// atoms, forth and back clauses, then the designated clause.
pub fn naive_bisimilar(s1: &EpistemicStateK, s2: &EpistemicStateK) -> bool {
    let (m1, m2) = (s1.model(), s2.model());
    if m1.num_agents() != m2.num_agents() || m1.num_atoms() != m2.num_atoms() {
        return false;
    }
    let (n1, n2) = (m1.num_worlds(), m2.num_worlds());
    let mut rel = vec![vec![false; n2]; n1];
    for w in m1.worlds() {
        for v in m2.worlds() {
            rel[w.index()][v.index()] = m1.valuation_of(w) == m2.valuation_of(v);
        }
    }
    use crate::formula::Frame;
    loop {
        let mut changed = false;
        for w in m1.worlds() {
            for v in m2.worlds() {
                if !rel[w.index()][v.index()] {
                    continue;
                }
                let ok = (0..m1.num_agents()).all(|i| {
                    let i = Agent::new(i as u16);
                    let forth = m1.successors(i, w).iter().all(|w2| {
                        m2.successors(i, v)
                            .iter()
                            .any(|v2| rel[w2.index()][v2.index()])
                    });
                    let back = m2.successors(i, v).iter().all(|v2| {
                        m1.successors(i, w)
                            .iter()
                            .any(|w2| rel[w2.index()][v2.index()])
                    });
                    forth && back
                });
                if !ok {
                    rel[w.index()][v.index()] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    s1.designated()
        .iter()
        .all(|w| s2.designated().iter().any(|v| rel[w.index()][v.index()]))
        && s2
            .designated()
            .iter()
            .all(|v| s1.designated().iter().any(|w| rel[w.index()][v.index()]))
}

/// Canonical keys are equal exactly when the states are bisimilar, and the
/// refinement-based check agrees with the naive fixpoint.
pub fn check_solution_identity(seed: u64, trials: usize) -> Report {
    let mut report = Report {
        trials,
        failures: Vec::new(),
    };
    for t in 0..trials {
        let trial_seed = seed.wrapping_add(t as u64);
        let mut smp = sampler(trial_seed);
        let (atoms, agents) = smp.shape();
        let s1 = smp.state(atoms, agents);
        let s2 = match t % 6 {
            0 => fixtures::doubled(&s1),
            1 => {
                let n = s1.model().num_worlds() as u32;
                let perm: Vec<u32> = (0..n).map(|w| (w + 1) % n).collect();
                fixtures::permuted(&s1, &perm)
            }
            2 => s1.contract(),
            3 => {
                let w = s1.designated()[0];
                fixtures::flip_atom(&s1, w, Atom::new(smp.rng.gen_range(0..atoms as u16)))
            }
            4 => fixtures::permuted(
                &fixtures::doubled(&s1.contract()),
                &reverse(2 * s1.contract().model().num_worlds()),
            ),
            _ => smp.state(atoms, agents),
        };
        let witness = match bisimilar_k(&s1, &s2) {
            Ok(w) => w,
            Err(e) => {
                report.failures.push(Failure {
                    seed: trial_seed,
                    detail: e.to_string(),
                });
                continue;
            }
        };
        let naive = naive_bisimilar(&s1, &s2);
        let key_eq = {
            let (st1, sp1) = decorate_state(&s1);
            let (st2, sp2) = decorate_state(&s2);
            st1.canonical_key(&sp1) == st2.canonical_key(&sp2)
        };
        let refined = witness.is_some();
        let witness_ok = witness.as_ref().is_none_or(|w| w.is_bisimulation(&s1, &s2));
        let direct_key = s1.canonical_key() == s2.canonical_key();
        if refined != naive || refined != key_eq || key_eq != direct_key || !witness_ok {
            report.failures.push(Failure {
                seed: trial_seed,
                detail: format!(
                    "refinement {refined}, naive {naive}, possibility keys {key_eq}, kripke keys {direct_key}, witness valid {witness_ok}; {} vs {}",
                    describe_state(&s1),
                    describe_state(&s2)
                ),
            });
        }
    }
    report
}

fn reverse(n: usize) -> Vec<u32> {
    (0..n as u32).rev().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Agree,
    Disagree,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanReport {
    pub verdict: Verdict,
    pub kripke: SolveOutcome,
    pub delphic: SolveOutcome,
    pub detail: String,
}

/// Solves under both semantics and cross-validates the plans. A timeout on
/// either side makes the check inconclusive rather than failed.
pub fn check_plan_equiv(
    task: &PlanningTask,
    max_bound: usize,
    timeout: Option<Duration>,
) -> PlanReport {
    let options = SolveOptions {
        max_bound,
        timeout,
        ..Default::default()
    };
    let kripke = solve(task, Semantics::Kripke, &options).outcome;
    let delphic = solve(task, Semantics::Delphic, &options).outcome;
    let (verdict, detail) = match (&kripke, &delphic) {
        (SolveOutcome::Timeout { .. }, _) | (_, SolveOutcome::Timeout { .. }) => {
            (Verdict::Inconclusive, "timeout".to_string())
        }
        (SolveOutcome::Plan(pk), SolveOutcome::Plan(pd)) => {
            let cross_k = validate_plan(task, &pk.names(), Semantics::Delphic) == Ok(true);
            let cross_d = validate_plan(task, &pd.names(), Semantics::Kripke) == Ok(true);
            if pk.len() == pd.len() && cross_k && cross_d {
                (Verdict::Agree, format!("plan length {}", pk.len()))
            } else {
                (
                    Verdict::Disagree,
                    format!("kripke [{pk}] delphic [{pd}], cross-validation {cross_k}/{cross_d}"),
                )
            }
        }
        (SolveOutcome::NoPlanUpTo(a), SolveOutcome::NoPlanUpTo(b)) if a == b => {
            (Verdict::Agree, format!("no plan up to {a}"))
        }
        _ => (Verdict::Disagree, "different outcomes".to_string()),
    };
    PlanReport {
        verdict,
        kripke,
        delphic,
        detail,
    }
}

/// Length of a shortest plan within `max_bound`, by depth-first enumeration
/// of every action sequence on Kripke states. Shares no code with the
/// breadth-first planner beyond the semantics themselves.
pub fn exhaustive_min_length(task: &PlanningTask, max_bound: usize) -> Option<usize> {
    fn successor(desc: &ActionDescription, s: &EpistemicStateK) -> Option<EpistemicStateK> {
        if !s.eval(&desc.global_pre) {
            return None;
        }
        let groups = desc.assign_groups(|f| s.eval(f)).ok()?;
        s.product_update(&desc.ground(&groups)).ok()
    }
    fn go(
        task: &PlanningTask,
        goal: &Formula,
        s: &EpistemicStateK,
        depth: usize,
        best: &mut usize,
    ) {
        if s.eval(goal) {
            *best = (*best).min(depth);
            return;
        }
        if depth + 1 >= *best {
            return;
        }
        for desc in &task.actions {
            if let Some(next) = successor(desc, s) {
                go(task, goal, &next, depth + 1, best);
            }
        }
    }
    let goal = task.goal();
    let mut best = max_bound + 1;
    go(task, &goal, &task.initial, 0, &mut best);
    (best <= max_bound).then_some(best)
}

/// A small random task: up to 3 atoms, 2 agents, 2 to 4 actions with one or
/// two observability groups, and usually a goal false in the initial state.
pub fn random_task(seed: u64) -> PlanningTask {
    let params = RandomInstanceParams {
        max_worlds: 3,
        max_events: 2,
        agents: 2,
        atoms: 3,
        ..Default::default()
    };
    let mut smp = Sampler::new(params, seed);
    let atoms = smp.rng.gen_range(1..=3);
    let agents = 2;
    let mut vocab = Vocabulary::new();
    for p in 0..atoms {
        vocab.add_atom(&format!("p{p}")).expect("fresh");
    }
    for i in 0..agents {
        vocab.add_agent(&format!("ag{i}")).expect("fresh");
    }
    let initial = smp.state(atoms, agents);
    let world_names = (0..initial.model().num_worlds())
        .map(|w| format!("w{w}"))
        .collect();
    let n_actions = smp.rng.gen_range(2..=4);
    let actions = (0..n_actions)
        .map(|k| {
            let n_events = smp.rng.gen_range(1..=2);
            let events: Vec<EventSpec> = (0..n_events)
                .map(|e| {
                    let pre = if smp.rng.gen_bool(0.4) {
                        Formula::Top
                    } else {
                        smp.formula(atoms, agents, 1)
                    };
                    let mut post = Vec::new();
                    for p in 0..atoms as u16 {
                        if smp.rng.gen_bool(0.3) {
                            post.push((Atom::new(p), smp.formula(atoms, agents, 0)));
                        }
                    }
                    EventSpec {
                        name: format!("e{e}"),
                        pre,
                        post,
                        designated: e == 0 || smp.rng.gen_bool(0.3),
                    }
                })
                .collect();
            let n_groups = smp.rng.gen_range(1..=2);
            let groups: Vec<Group> = (0..n_groups)
                .map(|g| Group {
                    name: format!("g{g}"),
                    relation: (0..n_events as u32)
                        .flat_map(|x| (0..n_events as u32).map(move |y| (EventId(x), EventId(y))))
                        .filter(|(x, y)| x == y || smp.rng.gen_bool(0.4))
                        .collect(),
                })
                .collect();
            let observability = (0..agents)
                .map(|_| {
                    let mut conds = Vec::new();
                    if n_groups > 1 && smp.rng.gen_bool(0.5) {
                        conds.push((GroupId(1), smp.formula(atoms, agents, 1)));
                    }
                    conds.push((GroupId(smp.rng.gen_range(0..n_groups as u16)), Formula::Top));
                    conds
                })
                .collect();
            let global_pre = if smp.rng.gen_bool(0.3) {
                smp.formula(atoms, agents, 1)
            } else {
                Formula::Top
            };
            ActionDescription {
                name: format!("act{k}"),
                events,
                groups,
                observability,
                global_pre,
            }
        })
        .collect();
    // Goals already true initially make trivial tasks; redraw a few times.
    let mut goal = smp.formula(atoms, agents, 2);
    for _ in 0..20 {
        if !initial.eval(&goal) {
            break;
        }
        goal = smp.formula(atoms, agents, 2);
    }
    PlanningTask {
        vocab,
        world_names,
        initial,
        actions,
        goals: vec![goal],
    }
}
