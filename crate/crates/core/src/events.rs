//! Action descriptions with observability groups, and the ground event
//! models they instantiate to in a given state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Agent, Atom, Formula};
use crate::refine::{coarsest_partition, LabeledGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventId(pub u32);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupId(pub u16);

impl GroupId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("action `{0}` has no events")]
    NoEvents(String),
    #[error("action `{0}` has no designated event")]
    NoDesignatedEvent(String),
    #[error("action `{action}`: agent {agent} has no observability condition")]
    MissingObservability { action: String, agent: usize },
    #[error("action `{action}`: last observability condition of agent {agent} must be `top`")]
    MissingDefault { action: String, agent: usize },
    #[error("action `{action}`: no observability group matches agent {agent}")]
    NoGroupMatches { action: String, agent: usize },
    #[error("action `{action}`: reference to unknown event or group")]
    DanglingReference { action: String },
    #[error("action `{action}`: event {event} assigns atom {atom} twice")]
    DuplicatePost {
        action: String,
        event: usize,
        atom: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventSpec {
    pub name: String,
    pub pre: Formula,
    /// Explicit postconditions; atoms not listed are inertial.
    pub post: Vec<(Atom, Formula)>,
    pub designated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub name: String,
    pub relation: Vec<(EventId, EventId)>,
}

/// An action schema: events plus per-group relations, with agents assigned to
/// groups by conditions that are evaluated against the current state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionDescription {
    pub name: String,
    pub events: Vec<EventSpec>,
    pub groups: Vec<Group>,
    /// Per agent, ordered `(group, condition)` pairs; first match wins.
    pub observability: Vec<Vec<(GroupId, Formula)>>,
    pub global_pre: Formula,
}

/// Statically computed properties of an action description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionAnalysis {
    pub idle: Vec<bool>,
    pub inertia: Vec<Vec<Atom>>,
}

impl ActionAnalysis {
    pub fn is_idle(&self, e: EventId) -> bool {
        self.idle[e.index()]
    }

    pub fn idle_events(&self) -> impl Iterator<Item = EventId> + '_ {
        self.idle
            .iter()
            .enumerate()
            .filter(|(_, &i)| i)
            .map(|(e, _)| EventId(e as u32))
    }
}

impl ActionDescription {
    pub fn validate(&self, num_agents: usize) -> Result<(), ActionError> {
        let action = || self.name.clone();
        if self.events.is_empty() {
            return Err(ActionError::NoEvents(action()));
        }
        if !self.events.iter().any(|e| e.designated) {
            return Err(ActionError::NoDesignatedEvent(action()));
        }
        let events = self.events.len();
        let dangling = self.groups.iter().any(|g| {
            g.relation
                .iter()
                .any(|(e, f)| e.index() >= events || f.index() >= events)
        }) || self
            .observability
            .iter()
            .flatten()
            .any(|(g, _)| g.index() >= self.groups.len());
        if dangling {
            return Err(ActionError::DanglingReference { action: action() });
        }
        for (i, e) in self.events.iter().enumerate() {
            let mut atoms: Vec<Atom> = e.post.iter().map(|(p, _)| *p).collect();
            atoms.sort_unstable();
            if let Some(w) = atoms.windows(2).find(|w| w[0] == w[1]) {
                return Err(ActionError::DuplicatePost {
                    action: action(),
                    event: i,
                    atom: w[0].index(),
                });
            }
        }
        for agent in 0..num_agents {
            match self.observability.get(agent).and_then(|c| c.last()) {
                None => {
                    return Err(ActionError::MissingObservability {
                        action: action(),
                        agent,
                    })
                }
                Some((_, cond)) if !cond.is_top() => {
                    return Err(ActionError::MissingDefault {
                        action: action(),
                        agent,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// Idle events have precondition `top` and no postconditions; inertia
    /// lists the atoms an event leaves untouched.
    pub fn analyze(&self, num_atoms: usize) -> ActionAnalysis {
        let idle = self
            .events
            .iter()
            .map(|e| e.pre.is_top() && e.post.is_empty())
            .collect();
        let inertia = self
            .events
            .iter()
            .map(|e| {
                (0..num_atoms as u16)
                    .map(Atom::new)
                    .filter(|p| !e.post.iter().any(|(q, _)| q == p))
                    .collect()
            })
            .collect();
        ActionAnalysis { idle, inertia }
    }

    /// Picks, per agent, the first group whose condition holds.
    pub fn assign_groups(
        &self,
        mut holds: impl FnMut(&Formula) -> bool,
    ) -> Result<Vec<GroupId>, ActionError> {
        self.observability
            .iter()
            .enumerate()
            .map(|(agent, conds)| {
                conds
                    .iter()
                    .find(|(_, c)| c.is_top() || holds(c))
                    .map(|(g, _)| *g)
                    .ok_or_else(|| ActionError::NoGroupMatches {
                        action: self.name.clone(),
                        agent,
                    })
            })
            .collect()
    }

    /// The event model obtained when each agent sees the action through the
    /// given group.
    pub fn ground(&self, assignment: &[GroupId]) -> GroundAction {
        let idle = self
            .events
            .iter()
            .map(|e| e.pre.is_top() && e.post.is_empty())
            .collect();
        let events = self
            .events
            .iter()
            .map(|e| GroundEvent::new(e.pre.clone(), e.post.clone()))
            .collect();
        let n = self.events.len();
        let relations = assignment
            .iter()
            .map(|g| {
                let mut rel = vec![Vec::new(); n];
                for &(e, f) in &self.groups[g.index()].relation {
                    rel[e.index()].push(f);
                }
                for succ in &mut rel {
                    succ.sort_unstable();
                    succ.dedup();
                }
                rel
            })
            .collect();
        let designated = self
            .events
            .iter()
            .enumerate()
            .filter(|(_, e)| e.designated)
            .map(|(i, _)| EventId(i as u32))
            .collect();
        GroundAction {
            events,
            idle,
            relations,
            designated,
        }
    }
}

/// Grounds `desc` against the current state, with `holds` deciding the
/// observability conditions.
pub fn instantiate_action(
    desc: &ActionDescription,
    holds: impl FnMut(&Formula) -> bool,
) -> Result<GroundAction, ActionError> {
    let assignment = desc.assign_groups(holds)?;
    Ok(desc.ground(&assignment))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundEvent {
    pub pre: Formula,
    /// Sorted by atom; identity assignments `p := p` are dropped so that
    /// equal total postcondition maps have equal representations.
    pub post: Vec<(Atom, Formula)>,
}

impl GroundEvent {
    pub fn new(pre: Formula, post: Vec<(Atom, Formula)>) -> Self {
        let mut post: Vec<(Atom, Formula)> = post
            .into_iter()
            .filter(|(p, f)| *f != Formula::Atom(*p))
            .collect();
        post.sort_by_key(|(p, _)| *p);
        GroundEvent { pre, post }
    }
}

/// A multi-pointed event model.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundAction {
    events: Vec<GroundEvent>,
    idle: Vec<bool>,
    /// `relations[agent][event]`, sorted.
    relations: Vec<Vec<Vec<EventId>>>,
    designated: Vec<EventId>,
}

impl GroundAction {
    pub fn new(
        events: Vec<GroundEvent>,
        idle: Vec<bool>,
        relations: Vec<Vec<Vec<EventId>>>,
        mut designated: Vec<EventId>,
    ) -> Self {
        debug_assert_eq!(events.len(), idle.len());
        let relations = relations
            .into_iter()
            .map(|rel| {
                rel.into_iter()
                    .map(|mut s| {
                        s.sort_unstable();
                        s.dedup();
                        s
                    })
                    .collect()
            })
            .collect();
        designated.sort_unstable();
        designated.dedup();
        GroundAction {
            events,
            idle,
            relations,
            designated,
        }
    }

    /// One designated idle event that every agent maps to itself.
    pub fn skip(_num_atoms: usize, num_agents: usize) -> Self {
        GroundAction {
            events: vec![GroundEvent::new(Formula::Top, Vec::new())],
            idle: vec![true],
            relations: vec![vec![vec![EventId(0)]]; num_agents],
            designated: vec![EventId(0)],
        }
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn num_agents(&self) -> usize {
        self.relations.len()
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> {
        (0..self.events.len() as u32).map(EventId)
    }

    pub fn event(&self, e: EventId) -> &GroundEvent {
        &self.events[e.index()]
    }

    pub fn pre(&self, e: EventId) -> &Formula {
        &self.events[e.index()].pre
    }

    /// Non-inertial postconditions of `e`.
    pub fn assignments(&self, e: EventId) -> &[(Atom, Formula)] {
        &self.events[e.index()].post
    }

    /// Total postcondition: `p` itself for inertial atoms.
    pub fn post(&self, e: EventId, p: Atom) -> Formula {
        self.events[e.index()]
            .post
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, f)| f.clone())
            .unwrap_or(Formula::Atom(p))
    }

    pub fn is_idle(&self, e: EventId) -> bool {
        self.idle[e.index()]
    }

    pub fn successors(&self, agent: Agent, e: EventId) -> &[EventId] {
        &self.relations[agent.index()][e.index()]
    }

    pub fn designated(&self) -> &[EventId] {
        &self.designated
    }

    pub fn num_edges(&self) -> usize {
        self.relations.iter().flatten().map(Vec::len).sum()
    }

    pub(crate) fn graph(&self) -> LabeledGraph<&GroundEvent> {
        let mut g = LabeledGraph::new(self.num_agents());
        for e in self.events() {
            let succ = self
                .relations
                .iter()
                .map(|rel| rel[e.index()].iter().map(|f| f.0).collect())
                .collect();
            g.push(&self.events[e.index()], succ);
        }
        g
    }
}

/// Bisimilarity of event models, comparing preconditions and total
/// postcondition maps syntactically.
pub fn bisimilar_actions(a1: &GroundAction, a2: &GroundAction) -> bool {
    if a1.num_agents() != a2.num_agents() {
        return false;
    }
    let offset = a1.num_events() as u32;
    let mut g = a1.graph();
    for e in a2.events() {
        let succ = a2
            .relations
            .iter()
            .map(|rel| rel[e.index()].iter().map(|f| f.0 + offset).collect())
            .collect();
        g.push(a2.event(e), succ);
    }
    let p = coarsest_partition(&g);
    a1.designated().iter().all(|e| {
        a2.designated()
            .iter()
            .any(|f| p.same_block(e.0, f.0 + offset))
    }) && a2.designated().iter().all(|f| {
        a1.designated()
            .iter()
            .any(|e| p.same_block(e.0, f.0 + offset))
    })
}
