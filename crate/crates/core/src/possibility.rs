//! Possibilities and eventualities stored as arenas of possibly cyclic nodes,
//! the bridges to and from Kripke/event models, and the union update.
//!
//! A node's identity is its arena id, keyed by an [`OriginKey`] recording
//! the step, parent possibility and eventuality that produced it. Two
//! possibilities *mean* the same thing when their canonical keys agree,
//! which happens exactly when their pictures are bisimilar.

use std::cell::{Cell, RefCell};

use rustc_hash::FxHashMap as HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{EventId, GroundAction, GroundEvent};
use crate::formula::{holds, Agent, Atom, Formula, Frame};
use crate::kripke::{EpistemicStateK, KripkeModel, WorldId};
use crate::refine::{canonical_encoding, coarsest_partition, LabeledGraph};
use crate::valuation::Valuation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PossId(pub u32);

impl PossId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EvId(pub u32);

impl EvId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Where a possibility came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OriginKey {
    /// Decoration of world `world` of the `batch`-th decorated state.
    Initial { batch: u32, world: u32 },
    /// `parent` updated by eventuality `event` at step `time`.
    Update {
        time: u32,
        parent: PossId,
        event: EvId,
    },
    /// Representative of a bisimulation class built by contraction at `time`.
    Contracted { time: u32, rep: PossId },
}

impl OriginKey {
    pub fn time(&self) -> u32 {
        match *self {
            OriginKey::Initial { .. } => 0,
            OriginKey::Update { time, .. } | OriginKey::Contracted { time, .. } => time,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PossNode {
    pub valuation: Valuation,
    pub origin: OriginKey,
    /// Offset of this node's per-agent ranges in the store.
    info_at: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PossError {
    #[error(
        "eventuality spectrum not applicable: possibility {0} satisfies no designated precondition"
    )]
    NotApplicable(u32),
}

/// Designated possibilities of a store.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PossibilitySpectrum {
    designated: Vec<PossId>,
}

impl PossibilitySpectrum {
    /// Panics on an empty set: spectrums are nonempty.
    pub fn new(mut designated: Vec<PossId>) -> Self {
        designated.sort_unstable();
        designated.dedup();
        assert!(
            !designated.is_empty(),
            "a possibility spectrum needs a designated possibility"
        );
        PossibilitySpectrum { designated }
    }

    pub fn designated(&self) -> &[PossId] {
        &self.designated
    }
}

/// Designated eventualities of an [`EventualityStore`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventualitySpectrum {
    designated: Vec<EvId>,
}

impl EventualitySpectrum {
    pub fn designated(&self) -> &[EvId] {
        &self.designated
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpdateOptions {
    /// Return `v` itself for `v ⊎ f` when `f` is reusable.
    pub reuse_idle: bool,
    /// Share nodes built for the same `(step, parent, eventuality)` across
    /// updates. Within one update, sharing is always on.
    pub memoize: bool,
}

impl Default for UpdateOptions {
    fn default() -> Self {
        UpdateOptions {
            reuse_idle: true,
            memoize: true,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PossibilityStore {
    num_agents: usize,
    num_atoms: usize,
    nodes: Vec<PossNode>,
    by_origin: HashMap<OriginKey, PossId>,
    batches: u32,
    // Information states of all nodes, flattened: the ids for node `u` and
    // agent `i` are `info_ids[ranges[at + i]..ranges[at + i + 1]]` with
    // `at = u.info_at`. Offset 0 is an all-empty placeholder.
    ranges: Vec<u32>,
    info_ids: Vec<PossId>,
    scratch: UpdateScratch,
    // Visit stamps for reachability walks.
    marks: RefCell<Vec<u32>>,
    epoch: Cell<u32>,
}

/// Buffers reused across union updates.
#[derive(Clone, Debug, Default)]
struct UpdateScratch {
    local: HashMap<(PossId, EvId), PossId>,
    pending: Vec<(PossId, PossId, EvId)>,
    pairs: Vec<(PossId, EvId)>,
}

impl Frame for PossibilityStore {
    type Point = PossId;

    #[inline]
    fn valuation(&self, point: PossId) -> Valuation {
        self.nodes[point.index()].valuation
    }

    #[inline]
    fn successors(&self, agent: Agent, point: PossId) -> &[PossId] {
        self.info(point, agent)
    }
}

/// Solution of a Kripke state: a fresh store holding the decoration of every
/// world reachable from the designated ones.
pub fn decorate_state(s: &EpistemicStateK) -> (PossibilityStore, PossibilitySpectrum) {
    let m = s.model();
    let mut store = PossibilityStore::new(m.num_atoms(), m.num_agents());
    let spectrum = store.decorate(s);
    (store, spectrum)
}

impl PossibilityStore {
    pub fn new(num_atoms: usize, num_agents: usize) -> Self {
        PossibilityStore {
            num_agents,
            num_atoms,
            ranges: vec![0; num_agents + 1],
            ..Default::default()
        }
    }

    /// Information state of `u` for `agent`, sorted.
    #[inline]
    pub fn info(&self, u: PossId, agent: Agent) -> &[PossId] {
        let at = self.nodes[u.index()].info_at as usize + agent.index();
        &self.info_ids[self.ranges[at] as usize..self.ranges[at + 1] as usize]
    }

    fn all_info(&self, u: PossId) -> &[PossId] {
        let at = self.nodes[u.index()].info_at as usize;
        &self.info_ids[self.ranges[at] as usize..self.ranges[at + self.num_agents] as usize]
    }

    /// Starts the information state of `u`; follow with one
    /// [`Self::close_agent`] per agent, in agent order.
    fn open_info(&mut self, u: PossId) {
        self.nodes[u.index()].info_at = self.ranges.len() as u32;
        self.ranges.push(self.info_ids.len() as u32);
    }

    /// Sorts and dedups the ids pushed since the previous range boundary.
    fn close_agent(&mut self) {
        let from = *self.ranges.last().expect("open_info first") as usize;
        let v = &mut self.info_ids;
        v[from..].sort_unstable();
        let mut w = from;
        for r in from..v.len() {
            if w == from || v[r] != v[w - 1] {
                v[w] = v[r];
                w += 1;
            }
        }
        v.truncate(w);
        self.ranges.push(w as u32);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    pub fn node(&self, id: PossId) -> &PossNode {
        &self.nodes[id.index()]
    }

    pub fn lookup(&self, origin: &OriginKey) -> Option<PossId> {
        self.by_origin.get(origin).copied()
    }

    /// Total number of information-state edges across all stored nodes.
    pub fn num_edges(&self) -> usize {
        self.info_ids.len()
    }

    pub fn eval(&self, u: PossId, f: &Formula) -> bool {
        holds(self, u, f)
    }

    pub fn eval_spectrum(&self, spectrum: &PossibilitySpectrum, f: &Formula) -> bool {
        spectrum.designated.iter().all(|&u| self.eval(u, f))
    }

    fn push(&mut self, node: PossNode) -> PossId {
        let id = PossId(self.nodes.len() as u32);
        self.by_origin.entry(node.origin).or_insert(id);
        self.nodes.push(node);
        id
    }

    /// Adds the decoration of `s` to this store and returns its solution.
    pub fn decorate(&mut self, s: &EpistemicStateK) -> PossibilitySpectrum {
        let m = s.model();
        let batch = self.batches;
        self.batches += 1;
        let reach = s.reachable();
        let base = self.nodes.len() as u32;
        let mut local = vec![u32::MAX; m.num_worlds()];
        for (i, w) in reach.iter().enumerate() {
            local[w.index()] = base + i as u32;
        }
        for &w in &reach {
            let id = self.push(PossNode {
                valuation: m.valuation_of(w),
                origin: OriginKey::Initial { batch, world: w.0 },
                info_at: 0,
            });
            self.open_info(id);
            for i in 0..m.num_agents() {
                let succ = m.successors(Agent::new(i as u16), w);
                self.info_ids
                    .extend(succ.iter().map(|v| PossId(local[v.index()])));
                self.close_agent();
            }
        }
        PossibilitySpectrum::new(
            s.designated()
                .iter()
                .map(|w| PossId(local[w.index()]))
                .collect(),
        )
    }

    /// Possibilities reachable from the spectrum, ascending.
    pub fn reachable(&self, spectrum: &PossibilitySpectrum) -> Vec<PossId> {
        let mut out = self.visit(spectrum, |_| ());
        out.sort_unstable();
        out
    }

    /// Depth-first walk over the reachable possibilities, in visit order.
    fn visit(&self, spectrum: &PossibilitySpectrum, mut each: impl FnMut(PossId)) -> Vec<PossId> {
        let mut marks = self.marks.borrow_mut();
        marks.resize(self.nodes.len(), 0);
        let epoch = self.epoch.get().wrapping_add(1);
        if epoch == 0 {
            marks.iter_mut().for_each(|m| *m = 0);
            self.epoch.set(1);
        } else {
            self.epoch.set(epoch);
        }
        let epoch = self.epoch.get();
        let mut out = Vec::new();
        for &u in &spectrum.designated {
            if marks[u.index()] != epoch {
                marks[u.index()] = epoch;
                out.push(u);
            }
        }
        let mut next = 0;
        while next < out.len() {
            each(out[next]);
            next += 1;
            for &v in self.all_info(out[next - 1]) {
                if marks[v.index()] != epoch {
                    marks[v.index()] = epoch;
                    out.push(v);
                }
            }
        }
        out
    }

    /// `(possibilities, information-state edges)` reachable from the spectrum.
    pub fn count_nodes(&self, spectrum: &PossibilitySpectrum) -> (usize, usize) {
        let mut edges = 0;
        let reach = self.visit(spectrum, |u| edges += self.all_info(u).len());
        (reach.len(), edges)
    }

    fn subgraph(&self, spectrum: &PossibilitySpectrum) -> (Vec<PossId>, LabeledGraph<Valuation>) {
        let reach = self.reachable(spectrum);
        let local: HashMap<PossId, u32> = reach
            .iter()
            .enumerate()
            .map(|(i, &u)| (u, i as u32))
            .collect();
        let mut g = LabeledGraph::new(self.num_agents);
        for &u in &reach {
            let succ = (0..self.num_agents)
                .map(|i| {
                    self.info(u, Agent::new(i as u16))
                        .iter()
                        .map(|v| local[v])
                        .collect()
                })
                .collect();
            g.push(self.nodes[u.index()].valuation, succ);
        }
        (reach, g)
    }

    /// Picture: one world per reachable possibility, in ascending id order.
    pub fn picture(&self, spectrum: &PossibilitySpectrum) -> EpistemicStateK {
        let (reach, g) = self.subgraph(spectrum);
        let edges = g.succ.iter().enumerate().flat_map(|(i, rel)| {
            rel.iter().enumerate().flat_map(move |(w, s)| {
                s.iter()
                    .map(move |&v| (Agent::new(i as u16), WorldId(w as u32), WorldId(v)))
            })
        });
        let model = KripkeModel::new(self.num_atoms, self.num_agents, g.labels.clone(), edges)
            .expect("nonempty reachable set");
        let designated = spectrum
            .designated
            .iter()
            .map(|u| WorldId(reach.binary_search(u).expect("designated is reachable") as u32))
            .collect();
        EpistemicStateK::new(model, designated).expect("nonempty designated set")
    }

    /// Equal for two spectrums exactly when their pictures are bisimilar.
    pub fn canonical_key(&self, spectrum: &PossibilitySpectrum) -> Vec<u8> {
        let (reach, g) = self.subgraph(spectrum);
        let roots: Vec<u32> = spectrum
            .designated
            .iter()
            .map(|u| reach.binary_search(u).expect("designated is reachable") as u32)
            .collect();
        canonical_encoding(&g, &roots, |v, out| {
            out.extend_from_slice(&v.bits().to_le_bytes())
        })
    }

    pub fn applicable(
        &self,
        events: &EventualityStore,
        spectrum: &PossibilitySpectrum,
        action: &EventualitySpectrum,
    ) -> bool {
        self.first_inapplicable(events, spectrum, action).is_none()
    }

    fn first_inapplicable(
        &self,
        events: &EventualityStore,
        spectrum: &PossibilitySpectrum,
        action: &EventualitySpectrum,
    ) -> Option<PossId> {
        spectrum.designated.iter().copied().find(|&u| {
            !action
                .designated
                .iter()
                .any(|&e| self.eval(u, &events.node(e).pre))
        })
    }

    /// Union update of `spectrum` by `action` at `step`. New possibilities
    /// are allocated with empty information states first; their edges are
    /// filled in once every node of the step exists, so cycles are built
    /// without recursion.
    pub fn union_update(
        &mut self,
        events: &EventualityStore,
        spectrum: &PossibilitySpectrum,
        action: &EventualitySpectrum,
        step: u32,
        options: UpdateOptions,
    ) -> Result<PossibilitySpectrum, PossError> {
        if let Some(u) = self.first_inapplicable(events, spectrum, action) {
            return Err(PossError::NotApplicable(u.0));
        }
        let mut sc = std::mem::take(&mut self.scratch);
        sc.local.clear();
        let mut designated = Vec::new();
        for &u in &spectrum.designated {
            for &e in &action.designated {
                if self.eval(u, &events.node(e).pre) {
                    designated.push(self.resolve(events, u, e, step, options, &mut sc));
                }
            }
        }
        while let Some((id, u, e)) = sc.pending.pop() {
            // Only nodes older than this update are read here, so the new
            // node's ranges can be written while its successors resolve.
            self.open_info(id);
            let ev = events.node(e);
            for i in 0..self.num_agents {
                sc.pairs.clear();
                for &v in self.info(u, Agent::new(i as u16)) {
                    for &f in &ev.info[i] {
                        if self.eval(v, &events.node(f).pre) {
                            sc.pairs.push((v, f));
                        }
                    }
                }
                for k in 0..sc.pairs.len() {
                    let (v, f) = sc.pairs[k];
                    let w = self.resolve(events, v, f, step, options, &mut sc);
                    self.info_ids.push(w);
                }
                self.close_agent();
            }
        }
        self.scratch = sc;
        Ok(PossibilitySpectrum::new(designated))
    }

    fn resolve(
        &mut self,
        events: &EventualityStore,
        u: PossId,
        e: EvId,
        step: u32,
        options: UpdateOptions,
        sc: &mut UpdateScratch,
    ) -> PossId {
        let ev = events.node(e);
        if options.reuse_idle && ev.reusable {
            return u;
        }
        if let Some(&id) = sc.local.get(&(u, e)) {
            return id;
        }
        let origin = OriginKey::Update {
            time: step,
            parent: u,
            event: e,
        };
        if options.memoize {
            if let Some(&id) = self.by_origin.get(&origin) {
                return id;
            }
        }
        let mut valuation = self.nodes[u.index()].valuation;
        for (p, f) in &ev.post {
            valuation.set(*p, holds(self, u, f));
        }
        let id = PossId(self.nodes.len() as u32);
        self.nodes.push(PossNode {
            valuation,
            origin,
            info_at: 0,
        });
        if options.memoize {
            self.by_origin.insert(origin, id);
        }
        sc.local.insert((u, e), id);
        sc.pending.push((id, u, e));
        id
    }

    /// Replaces bisimilar duplicates among the reachable possibilities by one
    /// representative each. Representatives whose successors are already
    /// representatives are reused; the rest are rebuilt under
    /// [`OriginKey::Contracted`].
    pub fn contract(&mut self, spectrum: &PossibilitySpectrum, step: u32) -> PossibilitySpectrum {
        let (reach, g) = self.subgraph(spectrum);
        let p = coarsest_partition(&g);
        let mut rep = vec![u32::MAX; p.count];
        for (v, &b) in p.block.iter().enumerate() {
            if rep[b as usize] == u32::MAX {
                rep[b as usize] = v as u32;
            }
        }
        // Blocks whose representative's edges only hit representatives of
        // kept blocks can stay as they are (greatest fixpoint).
        let mut keep = vec![true; p.count];
        loop {
            let mut changed = false;
            for b in 0..p.count {
                if !keep[b] {
                    continue;
                }
                let r = rep[b] as usize;
                let ok = g.succ.iter().all(|s| {
                    s[r].iter().all(|&w| {
                        let wb = p.block[w as usize] as usize;
                        rep[wb] == w && keep[wb]
                    })
                });
                if !ok {
                    keep[b] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut target = vec![PossId(u32::MAX); p.count];
        let mut rebuilt = Vec::new();
        for b in 0..p.count {
            let r = reach[rep[b] as usize];
            if keep[b] {
                target[b] = r;
                continue;
            }
            let origin = OriginKey::Contracted { time: step, rep: r };
            if let Some(&id) = self.by_origin.get(&origin) {
                target[b] = id;
                continue;
            }
            let valuation = self.nodes[r.index()].valuation;
            let id = self.push(PossNode {
                valuation,
                origin,
                info_at: 0,
            });
            target[b] = id;
            rebuilt.push(b);
        }
        for b in rebuilt {
            let r = rep[b] as usize;
            self.open_info(target[b]);
            for s in &g.succ {
                self.info_ids
                    .extend(s[r].iter().map(|&w| target[p.block[w as usize] as usize]));
                self.close_agent();
            }
        }
        PossibilitySpectrum::new(
            spectrum
                .designated
                .iter()
                .map(|u| {
                    let v = reach.binary_search(u).expect("designated is reachable");
                    target[p.block[v] as usize]
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eventuality {
    pub pre: Formula,
    /// Non-inertial postconditions; other atoms map to themselves.
    pub post: Vec<(Atom, Formula)>,
    pub info: Vec<Vec<EvId>>,
    /// Precondition `top` and identity postconditions.
    pub idle: bool,
    /// Idle, every information state nonempty, and every eventuality it
    /// reaches reusable too: updating by it leaves a possibility unchanged.
    pub reusable: bool,
}

/// Arena of eventualities; decorated event models are interned so that the
/// same ground action always yields the same eventuality ids.
#[derive(Clone, Debug, Default)]
pub struct EventualityStore {
    num_agents: usize,
    nodes: Vec<Eventuality>,
    interned: HashMap<GroundAction, EventualitySpectrum>,
}

impl EventualityStore {
    pub fn new(num_agents: usize) -> Self {
        EventualityStore {
            num_agents,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: EvId) -> &Eventuality {
        &self.nodes[id.index()]
    }

    /// Solution of an event model, restricted to events reachable from the
    /// designated ones.
    pub fn decorate_action(&mut self, action: &GroundAction) -> EventualitySpectrum {
        if let Some(s) = self.interned.get(action) {
            return s.clone();
        }
        let g = action.graph();
        let roots: Vec<u32> = action.designated().iter().map(|e| e.0).collect();
        let reach = g.reachable(&roots);
        let base = self.nodes.len() as u32;
        let mut local = vec![u32::MAX; action.num_events()];
        for (i, &e) in reach.iter().enumerate() {
            local[e as usize] = base + i as u32;
        }
        for &e in &reach {
            let event = EventId(e);
            let GroundEvent { pre, post } = action.event(event).clone();
            let info = (0..self.num_agents)
                .map(|i| {
                    action
                        .successors(Agent::new(i as u16), event)
                        .iter()
                        .map(|f| EvId(local[f.index()]))
                        .collect()
                })
                .collect();
            self.nodes.push(Eventuality {
                pre,
                post,
                info,
                idle: action.is_idle(event),
                reusable: false,
            });
        }
        self.mark_reusable(base as usize);
        let mut designated: Vec<EvId> = action
            .designated()
            .iter()
            .map(|e| EvId(local[e.index()]))
            .collect();
        designated.sort_unstable();
        designated.dedup();
        let spectrum = EventualitySpectrum { designated };
        self.interned.insert(action.clone(), spectrum.clone());
        spectrum
    }

    fn mark_reusable(&mut self, from: usize) {
        for n in &mut self.nodes[from..] {
            n.reusable = n.idle && n.info.iter().all(|s| !s.is_empty());
        }
        loop {
            let mut changed = false;
            for i in from..self.nodes.len() {
                if self.nodes[i].reusable {
                    let ok = self.nodes[i]
                        .info
                        .iter()
                        .flatten()
                        .all(|f| self.nodes[f.index()].reusable);
                    if !ok {
                        self.nodes[i].reusable = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    /// Picture: one event per eventuality reachable from the spectrum.
    pub fn picture(&self, spectrum: &EventualitySpectrum) -> GroundAction {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<EvId> = spectrum.designated.clone();
        for e in &stack {
            seen[e.index()] = true;
        }
        while let Some(e) = stack.pop() {
            for &f in self.nodes[e.index()].info.iter().flatten() {
                if !seen[f.index()] {
                    seen[f.index()] = true;
                    stack.push(f);
                }
            }
        }
        let reach: Vec<usize> = (0..self.nodes.len()).filter(|&i| seen[i]).collect();
        let local = |e: EvId| EventId(reach.binary_search(&e.index()).expect("reachable") as u32);
        let events = reach
            .iter()
            .map(|&i| GroundEvent::new(self.nodes[i].pre.clone(), self.nodes[i].post.clone()))
            .collect();
        let idle = reach.iter().map(|&i| self.nodes[i].idle).collect();
        let relations = (0..self.num_agents)
            .map(|a| {
                reach
                    .iter()
                    .map(|&i| self.nodes[i].info[a].iter().map(|&f| local(f)).collect())
                    .collect()
            })
            .collect();
        let designated = spectrum.designated.iter().map(|&e| local(e)).collect();
        GroundAction::new(events, idle, relations, designated)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::bisimilar_actions;
    use crate::fixtures;
    use crate::kripke::bisimilar_k;

    #[test]
    fn decoration_of_example_state() {
        let fx = fixtures::coin();
        let (store, spectrum) = decorate_state(&fx.state);
        assert_eq!(store.len(), 2);
        assert_eq!(spectrum.designated(), &[PossId(0)]);
        let w1 = store.node(PossId(0));
        assert!(w1.valuation.get(fx.h_atom));
        assert_eq!(store.info(PossId(0), Agent::new(0)), [PossId(0), PossId(1)]);
        assert_eq!(store.info(PossId(0), Agent::new(1)), [PossId(0), PossId(1)]);
        assert!(store.eval(PossId(0), &fx.h()));
        assert!(store.eval(PossId(0), &Formula::considers(fx.a, Formula::not(fx.h()))));
        assert!(store.eval_spectrum(&spectrum, &Formula::not(Formula::knows(fx.a, fx.h()))));
        assert!(store.eval_spectrum(&spectrum, &Formula::Top));
        assert_eq!(store.count_nodes(&spectrum), (2, 8));
    }

    #[test]
    fn single_isolated_world() {
        let model =
            KripkeModel::new(1, 2, vec![Valuation::EMPTY.with(Atom::new(0), true)], []).unwrap();
        let s = EpistemicStateK::new(model, vec![WorldId(0)]).unwrap();
        let (store, spectrum) = decorate_state(&s);
        assert_eq!(store.count_nodes(&spectrum), (1, 0));
        let pic = store.picture(&spectrum);
        assert_eq!(pic.model().num_worlds(), 1);
        assert_eq!(pic.model().num_edges(), 0);
    }

    #[test]
    fn picture_is_bisimilar_to_source() {
        let fx = fixtures::coin();
        let (store, spectrum) = decorate_state(&fx.state);
        let pic = store.picture(&spectrum);
        assert!(bisimilar_k(&pic, &fx.state).unwrap().is_some());
    }

    #[test]
    fn decoration_of_peek() {
        let fx = fixtures::coin();
        let mut evs = EventualityStore::new(2);
        let spectrum = evs.decorate_action(&fx.peek);
        assert_eq!(spectrum.designated(), &[EvId(0)]);
        let e1 = evs.node(EvId(0));
        let e2 = evs.node(EvId(1));
        assert_eq!(e1.pre, fx.h());
        assert_eq!(e1.info, vec![vec![EvId(0)], vec![EvId(1)]]);
        assert!(e2.pre.is_top());
        assert!(e2.idle && e2.reusable);
        assert!(!e1.reusable);
        // Interning returns the same ids.
        assert_eq!(evs.decorate_action(&fx.peek), spectrum);
        assert_eq!(evs.len(), 2);
        assert!(bisimilar_actions(&evs.picture(&spectrum), &fx.peek));
    }

    #[test]
    fn union_update_reuses_original_nodes() {
        let fx = fixtures::coin();
        let (mut store, w) = decorate_state(&fx.state);
        let mut evs = EventualityStore::new(2);
        let e = evs.decorate_action(&fx.peek);
        assert!(store.applicable(&evs, &w, &e));
        let next = store
            .union_update(&evs, &w, &e, 1, UpdateOptions::default())
            .unwrap();
        let v3 = next.designated()[0];
        assert_eq!(next.designated().len(), 1);
        assert_eq!(store.info(v3, fx.a), [v3]);
        assert_eq!(store.info(v3, fx.b), [PossId(0), PossId(1)]);
        assert!(store.node(v3).valuation.get(fx.h_atom));
        assert_eq!(store.count_nodes(&next), (3, 11));
        assert_eq!(
            store.node(v3).origin,
            OriginKey::Update {
                time: 1,
                parent: PossId(0),
                event: EvId(0)
            }
        );
        let product = fx.state.product_update(&fx.peek).unwrap();
        assert!(bisimilar_k(&store.picture(&next), &product)
            .unwrap()
            .is_some());
        let (pstore, pspec) = decorate_state(&product);
        assert_eq!(store.canonical_key(&next), pstore.canonical_key(&pspec));
    }

    #[test]
    fn skip_update_is_identity() {
        let fx = fixtures::coin();
        let (mut store, w) = decorate_state(&fx.state);
        let mut evs = EventualityStore::new(2);
        let skip = evs.decorate_action(&GroundAction::skip(1, 2));
        let next = store
            .union_update(&evs, &w, &skip, 1, UpdateOptions::default())
            .unwrap();
        assert_eq!(next, w);
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn inapplicable_spectrum() {
        let fx = fixtures::coin();
        let (mut store, _) = decorate_state(&fx.state);
        let tails = PossibilitySpectrum::new(vec![PossId(1)]);
        let mut evs = EventualityStore::new(2);
        let e = evs.decorate_action(&fx.peek);
        assert!(!store.applicable(&evs, &tails, &e));
        assert_eq!(
            store.union_update(&evs, &tails, &e, 1, UpdateOptions::default()),
            Err(PossError::NotApplicable(1))
        );
    }

    #[test]
    fn memoization_shares_nodes_across_updates() {
        let fx = fixtures::coin();
        let (mut store, w) = decorate_state(&fx.state);
        let mut evs = EventualityStore::new(2);
        let e = evs.decorate_action(&fx.peek);
        let first = store
            .union_update(&evs, &w, &e, 1, UpdateOptions::default())
            .unwrap();
        let len = store.len();
        let again = store
            .union_update(&evs, &w, &e, 1, UpdateOptions::default())
            .unwrap();
        assert_eq!(first, again);
        assert_eq!(store.len(), len);
        let fresh = UpdateOptions {
            memoize: false,
            ..Default::default()
        };
        let copy = store.union_update(&evs, &w, &e, 1, fresh).unwrap();
        assert_ne!(copy, first);
        assert_eq!(store.canonical_key(&copy), store.canonical_key(&first));
    }

    #[test]
    fn canonical_keys_follow_bisimilarity() {
        let fx = fixtures::coin();
        let key = |s: &EpistemicStateK| {
            let (store, spec) = decorate_state(s);
            store.canonical_key(&spec)
        };
        assert_eq!(key(&fx.state), key(&fx.state.contract()));
        assert_eq!(key(&fx.state), key(&fixtures::doubled(&fx.state)));
        assert_ne!(
            key(&fx.state),
            key(&fixtures::flip_atom(&fx.state, WorldId(0), fx.h_atom))
        );
        assert_eq!(key(&fx.state), fx.state.canonical_key());
    }

    #[test]
    fn contraction_merges_duplicates() {
        let fx = fixtures::coin();
        let doubled = fixtures::doubled(&fx.state);
        let (mut store, spec) = decorate_state(&doubled);
        assert_eq!(store.count_nodes(&spec).0, 4);
        let c = store.contract(&spec, 1);
        assert_eq!(store.count_nodes(&c).0, 2);
        assert_eq!(store.canonical_key(&c), store.canonical_key(&spec));
    }
}
