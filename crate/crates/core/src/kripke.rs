//! Multi-pointed Kripke models and the product update.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{EventId, GroundAction};
use crate::formula::{holds, Agent, Atom, Formula, Frame};
use crate::refine::{canonical_encoding, coarsest_partition, LabeledGraph};
use crate::valuation::Valuation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WorldId(pub u32);

impl WorldId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KripkeError {
    #[error("a model needs at least one world")]
    NoWorlds,
    #[error("world {0} does not exist")]
    InvalidWorld(u32),
    #[error("no designated world")]
    NoDesignated,
    #[error("models disagree on vocabulary ({0} vs {1} agents, {2} vs {3} atoms)")]
    VocabularyMismatch(usize, usize, usize, usize),
    #[error("action not applicable: designated world {0} satisfies no designated precondition")]
    NotApplicable(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    num_atoms: usize,
    valuations: Vec<Valuation>,
    /// `relations[agent][world]`: sorted successor lists.
    relations: Vec<Vec<Vec<WorldId>>>,
}

impl KripkeModel {
    /// Builds a model from per-world valuations and `(agent, from, to)` edges.
    pub fn new(
        num_atoms: usize,
        num_agents: usize,
        valuations: Vec<Valuation>,
        edges: impl IntoIterator<Item = (Agent, WorldId, WorldId)>,
    ) -> Result<Self, KripkeError> {
        if valuations.is_empty() {
            return Err(KripkeError::NoWorlds);
        }
        let n = valuations.len();
        let mut relations = vec![vec![Vec::new(); n]; num_agents];
        for (agent, from, to) in edges {
            for w in [from, to] {
                if w.index() >= n {
                    return Err(KripkeError::InvalidWorld(w.0));
                }
            }
            relations[agent.index()][from.index()].push(to);
        }
        for rel in &mut relations {
            for succ in rel.iter_mut() {
                succ.sort_unstable();
                succ.dedup();
            }
        }
        Ok(KripkeModel {
            num_atoms,
            valuations,
            relations,
        })
    }

    pub fn num_worlds(&self) -> usize {
        self.valuations.len()
    }

    pub fn num_agents(&self) -> usize {
        self.relations.len()
    }

    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    pub fn num_edges(&self) -> usize {
        self.relations.iter().flatten().map(Vec::len).sum()
    }

    pub fn worlds(&self) -> impl Iterator<Item = WorldId> {
        (0..self.valuations.len() as u32).map(WorldId)
    }

    pub fn valuation_of(&self, w: WorldId) -> Valuation {
        self.valuations[w.index()]
    }

    pub fn edges(&self) -> impl Iterator<Item = (Agent, WorldId, WorldId)> + '_ {
        self.relations.iter().enumerate().flat_map(|(i, rel)| {
            rel.iter().enumerate().flat_map(move |(w, succ)| {
                succ.iter()
                    .map(move |&v| (Agent::new(i as u16), WorldId(w as u32), v))
            })
        })
    }

    pub fn eval_world(&self, w: WorldId, f: &Formula) -> bool {
        holds(self, w, f)
    }

    fn graph(&self) -> LabeledGraph<Valuation> {
        let mut g = LabeledGraph::new(self.num_agents());
        for w in self.worlds() {
            let succ = self
                .relations
                .iter()
                .map(|rel| rel[w.index()].iter().map(|v| v.0).collect())
                .collect();
            g.push(self.valuations[w.index()], succ);
        }
        g
    }
}

impl Frame for KripkeModel {
    type Point = WorldId;

    #[inline]
    fn valuation(&self, point: WorldId) -> Valuation {
        self.valuations[point.index()]
    }

    #[inline]
    fn successors(&self, agent: Agent, point: WorldId) -> &[WorldId] {
        &self.relations[agent.index()][point.index()]
    }
}

/// A Kripke model together with its designated worlds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpistemicStateK {
    model: KripkeModel,
    designated: Vec<WorldId>,
}

impl EpistemicStateK {
    pub fn new(model: KripkeModel, mut designated: Vec<WorldId>) -> Result<Self, KripkeError> {
        designated.sort_unstable();
        designated.dedup();
        if designated.is_empty() {
            return Err(KripkeError::NoDesignated);
        }
        if let Some(w) = designated.iter().find(|w| w.index() >= model.num_worlds()) {
            return Err(KripkeError::InvalidWorld(w.0));
        }
        Ok(EpistemicStateK { model, designated })
    }

    pub fn model(&self) -> &KripkeModel {
        &self.model
    }

    pub fn designated(&self) -> &[WorldId] {
        &self.designated
    }

    pub fn eval(&self, f: &Formula) -> bool {
        self.designated.iter().all(|&w| self.model.eval_world(w, f))
    }

    pub fn applicable(&self, action: &GroundAction) -> bool {
        self.first_inapplicable(action).is_none()
    }

    fn first_inapplicable(&self, action: &GroundAction) -> Option<WorldId> {
        self.designated.iter().copied().find(|&w| {
            !action
                .designated()
                .iter()
                .any(|&e| self.model.eval_world(w, action.pre(e)))
        })
    }

    /// Product update. Postconditions read the pre-update valuation; worlds
    /// unreachable from the new designated set are kept.
    pub fn product_update(&self, action: &GroundAction) -> Result<EpistemicStateK, KripkeError> {
        if let Some(w) = self.first_inapplicable(action) {
            return Err(KripkeError::NotApplicable(w.0));
        }
        let m = &self.model;
        let events = action.num_events();
        let mut index = vec![u32::MAX; m.num_worlds() * events];
        let mut pairs: Vec<(WorldId, EventId)> = Vec::new();
        let mut valuations = Vec::new();
        for w in m.worlds() {
            for e in action.events() {
                if m.eval_world(w, action.pre(e)) {
                    index[w.index() * events + e.index()] = pairs.len() as u32;
                    pairs.push((w, e));
                    valuations.push(apply_post(m, w, action, e));
                }
            }
        }
        let mut relations = Vec::with_capacity(m.num_agents());
        for agent in 0..m.num_agents() {
            let a = Agent::new(agent as u16);
            let rel: Vec<Vec<WorldId>> = pairs
                .iter()
                .map(|&(w, e)| {
                    let mut succ = Vec::new();
                    for &v in m.successors(a, w) {
                        for &f in action.successors(a, e) {
                            let id = index[v.index() * events + f.index()];
                            if id != u32::MAX {
                                succ.push(WorldId(id));
                            }
                        }
                    }
                    succ
                })
                .collect();
            relations.push(rel);
        }
        let mut designated = Vec::new();
        for &w in &self.designated {
            for &e in action.designated() {
                let id = index[w.index() * events + e.index()];
                if id != u32::MAX {
                    designated.push(WorldId(id));
                }
            }
        }
        designated.sort_unstable();
        let model = KripkeModel {
            num_atoms: m.num_atoms,
            valuations,
            relations,
        };
        Ok(EpistemicStateK { model, designated })
    }

    /// Worlds reachable from the designated ones, ascending.
    pub fn reachable(&self) -> Vec<WorldId> {
        let roots: Vec<u32> = self.designated.iter().map(|w| w.0).collect();
        self.model
            .graph()
            .reachable(&roots)
            .into_iter()
            .map(WorldId)
            .collect()
    }

    /// Smallest bisimilar state: only reachable worlds, no two bisimilar.
    pub fn contract(&self) -> EpistemicStateK {
        let reach = self.reachable();
        let mut local = vec![u32::MAX; self.model.num_worlds()];
        for (i, w) in reach.iter().enumerate() {
            local[w.index()] = i as u32;
        }
        let mut g = LabeledGraph::new(self.model.num_agents());
        for &w in &reach {
            let succ = self
                .model
                .relations
                .iter()
                .map(|rel| rel[w.index()].iter().map(|v| local[v.index()]).collect())
                .collect();
            g.push(self.model.valuation_of(w), succ);
        }
        let p = coarsest_partition(&g);
        // Renumber blocks by first occurrence so the result is deterministic.
        let mut renumber = vec![u32::MAX; p.count];
        let mut next = 0u32;
        let mut reps = Vec::new();
        for v in 0..g.len() {
            let b = p.block[v] as usize;
            if renumber[b] == u32::MAX {
                renumber[b] = next;
                next += 1;
                reps.push(v);
            }
        }
        let valuations = reps.iter().map(|&r| g.labels[r]).collect();
        let relations = g
            .succ
            .iter()
            .map(|succ| {
                reps.iter()
                    .map(|&r| {
                        let mut s: Vec<WorldId> = succ[r]
                            .iter()
                            .map(|&w| WorldId(renumber[p.block[w as usize] as usize]))
                            .collect();
                        s.sort_unstable();
                        s.dedup();
                        s
                    })
                    .collect()
            })
            .collect();
        let mut designated: Vec<WorldId> = self
            .designated
            .iter()
            .map(|w| WorldId(renumber[p.block[local[w.index()] as usize] as usize]))
            .collect();
        designated.sort_unstable();
        designated.dedup();
        let model = KripkeModel {
            num_atoms: self.model.num_atoms,
            valuations,
            relations,
        };
        EpistemicStateK { model, designated }
    }

    /// Bisimulation-invariant byte key; equal keys exactly for bisimilar states.
    pub fn canonical_key(&self) -> Vec<u8> {
        let roots: Vec<u32> = self.designated.iter().map(|w| w.0).collect();
        canonical_encoding(&self.model.graph(), &roots, |v, out| {
            out.extend_from_slice(&v.bits().to_le_bytes())
        })
    }
}

fn apply_post(m: &KripkeModel, w: WorldId, action: &GroundAction, e: EventId) -> Valuation {
    let mut v = m.valuation_of(w);
    for (p, f) in action.assignments(e) {
        v.set(*p, m.eval_world(w, f));
    }
    v
}

/// Pairs of bisimilar worlds, across two states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisimWitness {
    pub pairs: Vec<(WorldId, WorldId)>,
}

impl BisimWitness {
    pub fn contains(&self, w: WorldId, v: WorldId) -> bool {
        self.pairs.binary_search(&(w, v)).is_ok()
    }

    /// Checks the Atoms, Forth, Back and Designated clauses directly.
    pub fn is_bisimulation(&self, s1: &EpistemicStateK, s2: &EpistemicStateK) -> bool {
        let (m1, m2) = (s1.model(), s2.model());
        let atoms = self
            .pairs
            .iter()
            .all(|&(w, v)| m1.valuation_of(w) == m2.valuation_of(v));
        let zig = self.pairs.iter().all(|&(w, v)| {
            (0..m1.num_agents()).all(|i| {
                let a = Agent::new(i as u16);
                m1.successors(a, w)
                    .iter()
                    .all(|&w2| m2.successors(a, v).iter().any(|&v2| self.contains(w2, v2)))
                    && m2
                        .successors(a, v)
                        .iter()
                        .all(|&v2| m1.successors(a, w).iter().any(|&w2| self.contains(w2, v2)))
            })
        });
        let designated = s1
            .designated()
            .iter()
            .all(|&w| s2.designated().iter().any(|&v| self.contains(w, v)))
            && s2
                .designated()
                .iter()
                .all(|&v| s1.designated().iter().any(|&w| self.contains(w, v)));
        atoms && zig && designated
    }
}

/// Largest bisimulation between the reachable parts of `s1` and `s2`, if it
/// satisfies the Designated clause.
pub fn bisimilar_k(
    s1: &EpistemicStateK,
    s2: &EpistemicStateK,
) -> Result<Option<BisimWitness>, KripkeError> {
    let (m1, m2) = (s1.model(), s2.model());
    if m1.num_agents() != m2.num_agents() || m1.num_atoms() != m2.num_atoms() {
        return Err(KripkeError::VocabularyMismatch(
            m1.num_agents(),
            m2.num_agents(),
            m1.num_atoms(),
            m2.num_atoms(),
        ));
    }
    let offset = m1.num_worlds() as u32;
    let mut g = m1.graph();
    for w in m2.worlds() {
        let succ = m2
            .relations
            .iter()
            .map(|rel| rel[w.index()].iter().map(|v| v.0 + offset).collect())
            .collect();
        g.push(m2.valuation_of(w), succ);
    }
    let p = coarsest_partition(&g);
    let designated_ok = s1.designated().iter().all(|w| {
        s2.designated()
            .iter()
            .any(|v| p.same_block(w.0, v.0 + offset))
    }) && s2.designated().iter().all(|v| {
        s1.designated()
            .iter()
            .any(|w| p.same_block(w.0, v.0 + offset))
    });
    if !designated_ok {
        return Ok(None);
    }
    let (r1, r2) = (s1.reachable(), s2.reachable());
    let mut pairs = Vec::new();
    for &w in &r1 {
        for &v in &r2 {
            if p.same_block(w.0, v.0 + offset) {
                pairs.push((w, v));
            }
        }
    }
    Ok(Some(BisimWitness { pairs }))
}

/// Convenience for tests and fixtures: the atom set of a valuation as a list.
pub fn valuation_from(atoms: &[Atom]) -> Valuation {
    atoms.iter().fold(Valuation::EMPTY, |v, &p| v.with(p, true))
}
