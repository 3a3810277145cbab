//! Planning tasks and breadth-first search over action sequences under
//! either semantics.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{ActionDescription, ActionError, GroundAction, GroupId};
use crate::formula::{Formula, Vocabulary};
use crate::kripke::EpistemicStateK;
use crate::possibility::{
    EventualitySpectrum, EventualityStore, PossibilitySpectrum, PossibilityStore, UpdateOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    Kripke,
    Delphic,
}

impl Semantics {
    pub const ALL: [Semantics; 2] = [Semantics::Kripke, Semantics::Delphic];

    pub fn other(self) -> Semantics {
        match self {
            Semantics::Kripke => Semantics::Delphic,
            Semantics::Delphic => Semantics::Kripke,
        }
    }
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Kripke => "kripke",
            Semantics::Delphic => "delphic",
        })
    }
}

impl FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kripke" => Ok(Semantics::Kripke),
            "delphic" => Ok(Semantics::Delphic),
            other => Err(format!(
                "unknown semantics `{other}` (expected kripke or delphic)"
            )),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("task has no goal")]
    NoGoal,
    #[error("vocabulary has no agents")]
    NoAgents,
    #[error("initial state does not match the vocabulary")]
    VocabularyMismatch,
    #[error("two actions are named `{0}`")]
    DuplicateAction(String),
    #[error(transparent)]
    Action(#[from] ActionError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanningTask {
    pub vocab: Vocabulary,
    /// One name per initial world, in world order.
    pub world_names: Vec<String>,
    pub initial: EpistemicStateK,
    /// In declaration order, which is also the search order.
    pub actions: Vec<ActionDescription>,
    /// Conjoined.
    pub goals: Vec<Formula>,
}

impl PlanningTask {
    pub fn validate(&self) -> Result<(), TaskError> {
        if self.goals.is_empty() {
            return Err(TaskError::NoGoal);
        }
        if self.vocab.num_agents() == 0 {
            return Err(TaskError::NoAgents);
        }
        let m = self.initial.model();
        if m.num_agents() != self.vocab.num_agents()
            || m.num_atoms() != self.vocab.num_atoms()
            || self.world_names.len() != m.num_worlds()
        {
            return Err(TaskError::VocabularyMismatch);
        }
        let mut names = HashSet::default();
        for a in &self.actions {
            if !names.insert(a.name.as_str()) {
                return Err(TaskError::DuplicateAction(a.name.clone()));
            }
            a.validate(self.vocab.num_agents())?;
        }
        Ok(())
    }

    pub fn goal(&self) -> Formula {
        Formula::conjunction(self.goals.iter().cloned())
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub action: String,
    /// Group name each agent observed the action through.
    pub groups: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.action.as_str()).collect()
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return f.write_str("(empty)");
        }
        f.write_str(&self.names().join(", "))
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_bound: usize,
    pub timeout: Option<Duration>,
    /// Prune states whose canonical key was already generated.
    pub dedup: bool,
    /// Contract every generated state.
    pub contract: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_bound: 10,
            timeout: None,
            dedup: false,
            contract: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveOutcome {
    Plan(Plan),
    NoPlanUpTo(usize),
    Timeout { bound: usize },
}

impl SolveOutcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            SolveOutcome::Plan(p) => Some(p),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            SolveOutcome::Plan(_) => "plan",
            SolveOutcome::NoPlanUpTo(_) => "no_plan",
            SolveOutcome::Timeout { .. } => "timeout",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    /// States whose successors were generated.
    pub expanded: u64,
    pub generated: u64,
    /// Largest single state, in worlds or reachable possibilities.
    pub max_state_nodes: usize,
    pub max_state_edges: usize,
    /// Kripke: worlds summed over all generated states. Delphic: size of the
    /// shared possibility store.
    pub total_nodes: usize,
    pub total_edges: usize,
    /// Deepest bound fully or partially explored.
    pub bound_reached: usize,
    /// Elapsed time at the end of each bound, cumulative.
    pub time_per_bound_ms: Vec<f64>,
    pub time_ms: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub outcome: SolveOutcome,
    pub stats: SearchStats,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("precondition of `{0}` does not hold")]
    GlobalPre(String),
    #[error(transparent)]
    Observability(#[from] ActionError),
    #[error("`{0}` is not applicable: some designated element has no applicable event")]
    NotApplicable(String),
}

/// One semantics viewed as an abstract state space.
trait Engine {
    type State: Clone;

    fn initial(&mut self) -> Self::State;
    fn holds(&self, s: &Self::State, f: &Formula) -> bool;
    /// `None` when not applicable.
    fn apply(
        &mut self,
        s: &Self::State,
        key: &ActionKey,
        a: &GroundAction,
        step: u32,
    ) -> Option<Self::State>;
    fn contract(&mut self, s: &Self::State, step: u32) -> Self::State;
    fn key(&self, s: &Self::State) -> Vec<u8>;
    fn size(&self, s: &Self::State) -> (usize, usize);
    fn footprint(&self) -> (usize, usize);
}

type ActionKey = (usize, Vec<GroupId>);

struct KripkeEngine<'t> {
    task: &'t PlanningTask,
    worlds: usize,
    edges: usize,
}

impl Engine for KripkeEngine<'_> {
    type State = EpistemicStateK;

    fn initial(&mut self) -> EpistemicStateK {
        let s = self.task.initial.clone();
        self.worlds += s.model().num_worlds();
        self.edges += s.model().num_edges();
        s
    }

    fn holds(&self, s: &EpistemicStateK, f: &Formula) -> bool {
        s.eval(f)
    }

    fn apply(
        &mut self,
        s: &EpistemicStateK,
        _: &ActionKey,
        a: &GroundAction,
        _: u32,
    ) -> Option<EpistemicStateK> {
        let next = s.product_update(a).ok()?;
        self.worlds += next.model().num_worlds();
        self.edges += next.model().num_edges();
        Some(next)
    }

    fn contract(&mut self, s: &EpistemicStateK, _: u32) -> EpistemicStateK {
        s.contract()
    }

    fn key(&self, s: &EpistemicStateK) -> Vec<u8> {
        s.canonical_key()
    }

    fn size(&self, s: &EpistemicStateK) -> (usize, usize) {
        (s.model().num_worlds(), s.model().num_edges())
    }

    fn footprint(&self) -> (usize, usize) {
        (self.worlds, self.edges)
    }
}

struct DelphicEngine<'t> {
    task: &'t PlanningTask,
    store: PossibilityStore,
    events: EventualityStore,
    decorated: HashMap<ActionKey, EventualitySpectrum>,
}

impl<'t> DelphicEngine<'t> {
    fn new(task: &'t PlanningTask) -> Self {
        DelphicEngine {
            task,
            store: PossibilityStore::new(task.vocab.num_atoms(), task.vocab.num_agents()),
            events: EventualityStore::new(task.vocab.num_agents()),
            decorated: HashMap::default(),
        }
    }
}

impl Engine for DelphicEngine<'_> {
    type State = PossibilitySpectrum;

    fn initial(&mut self) -> PossibilitySpectrum {
        self.store.decorate(&self.task.initial)
    }

    fn holds(&self, s: &PossibilitySpectrum, f: &Formula) -> bool {
        self.store.eval_spectrum(s, f)
    }

    fn apply(
        &mut self,
        s: &PossibilitySpectrum,
        key: &ActionKey,
        a: &GroundAction,
        step: u32,
    ) -> Option<PossibilitySpectrum> {
        let spectrum = match self.decorated.get(key) {
            Some(e) => e.clone(),
            None => {
                let e = self.events.decorate_action(a);
                self.decorated.insert(key.clone(), e.clone());
                e
            }
        };
        self.store
            .union_update(&self.events, s, &spectrum, step, UpdateOptions::default())
            .ok()
    }

    fn contract(&mut self, s: &PossibilitySpectrum, step: u32) -> PossibilitySpectrum {
        self.store.contract(s, step)
    }

    fn key(&self, s: &PossibilitySpectrum) -> Vec<u8> {
        self.store.canonical_key(s)
    }

    fn size(&self, s: &PossibilitySpectrum) -> (usize, usize) {
        self.store.count_nodes(s)
    }

    fn footprint(&self) -> (usize, usize) {
        (self.store.len(), self.store.num_edges())
    }
}

/// Ground actions keyed by `(action index, group assignment)`.
struct Grounder<'t> {
    task: &'t PlanningTask,
    cache: HashMap<ActionKey, GroundAction>,
}

impl<'t> Grounder<'t> {
    fn new(task: &'t PlanningTask) -> Self {
        Grounder {
            task,
            cache: HashMap::default(),
        }
    }

    /// Checks the global precondition, then resolves observability.
    fn ground<E: Engine>(
        &mut self,
        engine: &E,
        s: &E::State,
        index: usize,
    ) -> Result<(ActionKey, &GroundAction), StepError> {
        let desc = &self.task.actions[index];
        if !desc.global_pre.is_top() && !engine.holds(s, &desc.global_pre) {
            return Err(StepError::GlobalPre(desc.name.clone()));
        }
        let groups = desc.assign_groups(|f| engine.holds(s, f))?;
        let key = (index, groups);
        let action = self
            .cache
            .entry(key.clone())
            .or_insert_with(|| desc.ground(&key.1));
        Ok((key, action))
    }

    fn step<E: Engine>(
        &mut self,
        engine: &mut E,
        s: &E::State,
        index: usize,
        step: u32,
    ) -> Result<(E::State, Vec<GroupId>), StepError> {
        let task = self.task;
        let (key, action) = self.ground(engine, s, index)?;
        match engine.apply(s, &key, action, step) {
            Some(next) => Ok((next, key.1)),
            None => Err(StepError::NotApplicable(task.actions[index].name.clone())),
        }
    }
}

struct Trail {
    parent: u32,
    action: u32,
    groups: Vec<GroupId>,
}

fn plan_from(task: &PlanningTask, trail: &[Trail], mut at: u32) -> Plan {
    let mut steps = Vec::new();
    while at != u32::MAX {
        let t = &trail[at as usize];
        let desc = &task.actions[t.action as usize];
        steps.push(PlanStep {
            action: desc.name.clone(),
            groups: t
                .groups
                .iter()
                .map(|g| desc.groups[g.index()].name.clone())
                .collect(),
        });
        at = t.parent;
    }
    steps.reverse();
    Plan { steps }
}

fn search<E: Engine>(task: &PlanningTask, engine: &mut E, options: &SolveOptions) -> SolveResult {
    let start = Instant::now();
    let goal = task.goal();
    let mut grounder = Grounder::new(task);
    let mut stats = SearchStats::default();
    let mut seen: HashSet<Vec<u8>> = HashSet::default();

    let finish = |engine: &E, mut stats: SearchStats, outcome: SolveOutcome| {
        let (nodes, edges) = engine.footprint();
        stats.total_nodes = nodes;
        stats.total_edges = edges;
        stats.time_ms = start.elapsed().as_secs_f64() * 1e3;
        SolveResult { outcome, stats }
    };

    let mut initial = engine.initial();
    if options.contract {
        initial = engine.contract(&initial, 0);
    }
    stats.generated = 1;
    let (n, e) = engine.size(&initial);
    stats.max_state_nodes = n;
    stats.max_state_edges = e;
    if engine.holds(&initial, &goal) {
        stats
            .time_per_bound_ms
            .push(start.elapsed().as_secs_f64() * 1e3);
        return finish(engine, stats, SolveOutcome::Plan(Plan::default()));
    }
    if options.dedup {
        seen.insert(engine.key(&initial));
    }
    stats
        .time_per_bound_ms
        .push(start.elapsed().as_secs_f64() * 1e3);

    let mut trail: Vec<Trail> = Vec::new();
    let mut frontier: Vec<(E::State, u32)> = vec![(initial, u32::MAX)];
    for bound in 1..=options.max_bound {
        stats.bound_reached = bound;
        let keep = bound < options.max_bound;
        let mut next = Vec::new();
        for (state, at) in &frontier {
            if let Some(limit) = options.timeout {
                if start.elapsed() >= limit {
                    return finish(engine, stats, SolveOutcome::Timeout { bound });
                }
            }
            stats.expanded += 1;
            for index in 0..task.actions.len() {
                let Ok((mut child, groups)) = grounder.step(engine, state, index, bound as u32)
                else {
                    continue;
                };
                if options.contract {
                    child = engine.contract(&child, bound as u32);
                }
                stats.generated += 1;
                let (n, e) = engine.size(&child);
                stats.max_state_nodes = stats.max_state_nodes.max(n);
                stats.max_state_edges = stats.max_state_edges.max(e);
                if options.dedup && !seen.insert(engine.key(&child)) {
                    continue;
                }
                let id = trail.len() as u32;
                trail.push(Trail {
                    parent: *at,
                    action: index as u32,
                    groups,
                });
                if engine.holds(&child, &goal) {
                    stats
                        .time_per_bound_ms
                        .push(start.elapsed().as_secs_f64() * 1e3);
                    let plan = plan_from(task, &trail, id);
                    return finish(engine, stats, SolveOutcome::Plan(plan));
                }
                if keep {
                    next.push((child, id));
                }
            }
        }
        stats
            .time_per_bound_ms
            .push(start.elapsed().as_secs_f64() * 1e3);
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    finish(engine, stats, SolveOutcome::NoPlanUpTo(options.max_bound))
}

/// Shortest plan by breadth-first search. Actions are tried in declaration
/// order and the first plan found at the minimal bound is returned.
pub fn solve(task: &PlanningTask, semantics: Semantics, options: &SolveOptions) -> SolveResult {
    match semantics {
        Semantics::Kripke => search(
            task,
            &mut KripkeEngine {
                task,
                worlds: 0,
                edges: 0,
            },
            options,
        ),
        Semantics::Delphic => search(task, &mut DelphicEngine::new(task), options),
    }
}

/// Sizes of every state visited while replaying a plan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replay {
    /// `(nodes, edges)` of each state, starting with the initial one.
    pub states: Vec<(usize, usize)>,
    /// Kripke: worlds summed over all states. Delphic: distinct possibilities
    /// reachable from any visited state.
    pub total_nodes: usize,
    pub goal_reached: bool,
}

fn replay_with<E: Engine>(
    task: &PlanningTask,
    engine: &mut E,
    plan: &[&str],
) -> Result<(Vec<E::State>, bool), StepError> {
    let mut grounder = Grounder::new(task);
    let mut states = vec![engine.initial()];
    for (t, name) in plan.iter().enumerate() {
        let index = task
            .action_index(name)
            .ok_or_else(|| StepError::UnknownAction(name.to_string()))?;
        let current = states.last().expect("at least the initial state");
        let (next, _) = grounder.step(engine, current, index, t as u32 + 1)?;
        states.push(next);
    }
    let goal = engine.holds(states.last().expect("nonempty"), &task.goal());
    Ok((states, goal))
}

/// Replays `plan`, checking applicability at each step. `Ok(false)` means
/// every step applied but the goal does not hold at the end.
pub fn validate_plan(
    task: &PlanningTask,
    plan: &[&str],
    semantics: Semantics,
) -> Result<bool, StepError> {
    replay(task, plan, semantics).map(|r| r.goal_reached)
}

pub fn replay(
    task: &PlanningTask,
    plan: &[&str],
    semantics: Semantics,
) -> Result<Replay, StepError> {
    match semantics {
        Semantics::Kripke => {
            let (states, goal_reached) = trace_kripke(task, plan)?;
            let sizes: Vec<(usize, usize)> = states
                .iter()
                .map(|s| (s.model().num_worlds(), s.model().num_edges()))
                .collect();
            let total_nodes = sizes.iter().map(|s| s.0).sum();
            Ok(Replay {
                states: sizes,
                total_nodes,
                goal_reached,
            })
        }
        Semantics::Delphic => {
            let trace = trace_delphic(task, plan)?;
            let sizes = trace
                .states
                .iter()
                .map(|s| trace.store.count_nodes(s))
                .collect();
            let mut all: Vec<_> = trace
                .states
                .iter()
                .flat_map(|s| trace.store.reachable(s))
                .collect();
            all.sort_unstable();
            all.dedup();
            Ok(Replay {
                states: sizes,
                total_nodes: all.len(),
                goal_reached: trace.goal_reached,
            })
        }
    }
}

pub fn trace_kripke(
    task: &PlanningTask,
    plan: &[&str],
) -> Result<(Vec<EpistemicStateK>, bool), StepError> {
    replay_with(
        task,
        &mut KripkeEngine {
            task,
            worlds: 0,
            edges: 0,
        },
        plan,
    )
}

/// Every spectrum visited by a Delphic replay, sharing one store.
pub struct DelphicTrace {
    pub store: PossibilityStore,
    pub events: EventualityStore,
    pub states: Vec<PossibilitySpectrum>,
    pub goal_reached: bool,
}

pub fn trace_delphic(task: &PlanningTask, plan: &[&str]) -> Result<DelphicTrace, StepError> {
    let mut engine = DelphicEngine::new(task);
    let (states, goal_reached) = replay_with(task, &mut engine, plan)?;
    Ok(DelphicTrace {
        store: engine.store,
        events: engine.events,
        states,
        goal_reached,
    })
}

/// Applies one action to a Kripke state.
pub fn step_kripke(
    task: &PlanningTask,
    s: &EpistemicStateK,
    action: &str,
) -> Result<EpistemicStateK, StepError> {
    let index = task
        .action_index(action)
        .ok_or_else(|| StepError::UnknownAction(action.to_string()))?;
    let mut engine = KripkeEngine {
        task,
        worlds: 0,
        edges: 0,
    };
    Grounder::new(task)
        .step(&mut engine, s, index, 1)
        .map(|(s, _)| s)
}

/// Applies one action to a spectrum of `store`, at time `step`.
pub fn step_delphic(
    task: &PlanningTask,
    store: &mut PossibilityStore,
    events: &mut EventualityStore,
    s: &PossibilitySpectrum,
    action: &str,
    step: u32,
) -> Result<PossibilitySpectrum, StepError> {
    let index = task
        .action_index(action)
        .ok_or_else(|| StepError::UnknownAction(action.to_string()))?;
    let desc = &task.actions[index];
    if !desc.global_pre.is_top() && !store.eval_spectrum(s, &desc.global_pre) {
        return Err(StepError::GlobalPre(desc.name.clone()));
    }
    let groups = desc.assign_groups(|f| store.eval_spectrum(s, f))?;
    let e = events.decorate_action(&desc.ground(&groups));
    store
        .union_update(events, s, &e, step, UpdateOptions::default())
        .map_err(|_| StepError::NotApplicable(desc.name.clone()))
}
