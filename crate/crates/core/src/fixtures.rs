//! The coin-in-the-box running example and small model transformations used
//! by tests, the oracles and the CLI.

use crate::events::{ActionDescription, EventId, EventSpec, GroundAction, Group, GroupId};
use crate::formula::{Agent, Atom, Formula, Vocabulary};
use crate::kripke::{EpistemicStateK, KripkeModel, WorldId};
use crate::valuation::Valuation;

/// Two agents, one atom `h`; the coin lies heads up but nobody knows it.
pub struct Coin {
    pub vocab: Vocabulary,
    pub h_atom: Atom,
    pub a: Agent,
    pub b: Agent,
    /// `w1` (h) designated, `w2` (not h); both agents see both worlds.
    pub state: EpistemicStateK,
    /// Agent `a` privately peeks while `b` is oblivious.
    pub peek_desc: ActionDescription,
    pub peek: GroundAction,
}

impl Coin {
    pub fn h(&self) -> Formula {
        Formula::atom(self.h_atom)
    }
}

pub fn coin() -> Coin {
    let mut vocab = Vocabulary::new();
    let h_atom = vocab.add_atom("h").expect("fresh vocabulary");
    let a = vocab.add_agent("a").expect("fresh vocabulary");
    let b = vocab.add_agent("b").expect("fresh vocabulary");
    let w1 = WorldId(0);
    let w2 = WorldId(1);
    let mut edges = Vec::new();
    for agent in [a, b] {
        for x in [w1, w2] {
            for y in [w1, w2] {
                edges.push((agent, x, y));
            }
        }
    }
    let model = KripkeModel::new(
        1,
        2,
        vec![Valuation::EMPTY.with(h_atom, true), Valuation::EMPTY],
        edges,
    )
    .expect("valid model");
    let state = EpistemicStateK::new(model, vec![w1]).expect("valid state");

    let (e1, e2) = (EventId(0), EventId(1));
    let peek_desc = ActionDescription {
        name: "peek_a".to_string(),
        events: vec![
            EventSpec {
                name: "e1".into(),
                pre: Formula::atom(h_atom),
                post: Vec::new(),
                designated: true,
            },
            EventSpec {
                name: "e2".into(),
                pre: Formula::Top,
                post: Vec::new(),
                designated: false,
            },
        ],
        groups: vec![
            Group {
                name: "full".into(),
                relation: vec![(e1, e1), (e2, e2)],
            },
            Group {
                name: "oblivious".into(),
                relation: vec![(e1, e2), (e2, e2)],
            },
        ],
        observability: vec![
            vec![(GroupId(0), Formula::Top)],
            vec![(GroupId(1), Formula::Top)],
        ],
        global_pre: Formula::Top,
    };
    let peek = peek_desc.ground(&[GroupId(0), GroupId(1)]);
    Coin {
        vocab,
        h_atom,
        a,
        b,
        state,
        peek_desc,
        peek,
    }
}

/// Every world gets a twin; each edge `w -> v` is lifted to all four
/// combinations of copies. Twins of designated worlds are designated.
pub fn doubled(s: &EpistemicStateK) -> EpistemicStateK {
    let m = s.model();
    let n = m.num_worlds() as u32;
    let valuations = m
        .worlds()
        .chain(m.worlds())
        .map(|w| m.valuation_of(w))
        .collect();
    let mut edges = Vec::new();
    for (agent, w, v) in m.edges() {
        for dw in [0, n] {
            for dv in [0, n] {
                edges.push((agent, WorldId(w.0 + dw), WorldId(v.0 + dv)));
            }
        }
    }
    let model = KripkeModel::new(m.num_atoms(), m.num_agents(), valuations, edges)
        .expect("lifted edges stay in range");
    let designated = s
        .designated()
        .iter()
        .flat_map(|w| [*w, WorldId(w.0 + n)])
        .collect();
    EpistemicStateK::new(model, designated).expect("designated twins exist")
}

/// Same state with the truth value of `atom` flipped at `world`.
pub fn flip_atom(s: &EpistemicStateK, world: WorldId, atom: Atom) -> EpistemicStateK {
    let m = s.model();
    let valuations = m
        .worlds()
        .map(|w| {
            let v = m.valuation_of(w);
            if w == world {
                v.with(atom, !v.get(atom))
            } else {
                v
            }
        })
        .collect();
    let model =
        KripkeModel::new(m.num_atoms(), m.num_agents(), valuations, m.edges()).expect("same shape");
    EpistemicStateK::new(model, s.designated().to_vec()).expect("same designated")
}

/// Relabels worlds by `perm` (new index of each old world).
pub fn permuted(s: &EpistemicStateK, perm: &[u32]) -> EpistemicStateK {
    let m = s.model();
    let mut valuations = vec![Valuation::EMPTY; m.num_worlds()];
    for w in m.worlds() {
        valuations[perm[w.index()] as usize] = m.valuation_of(w);
    }
    let edges = m
        .edges()
        .map(|(i, w, v)| (i, WorldId(perm[w.index()]), WorldId(perm[v.index()])));
    let model = KripkeModel::new(m.num_atoms(), m.num_agents(), valuations, edges)
        .expect("permutation keeps range");
    let designated = s
        .designated()
        .iter()
        .map(|w| WorldId(perm[w.index()]))
        .collect();
    EpistemicStateK::new(model, designated).expect("permutation keeps designated")
}

/// Copy of the last event added as a fresh event: every edge into it is
/// duplicated to the copy, and the copy has the same outgoing edges.
pub fn peek_with_duplicated_idle(a: &GroundAction) -> GroundAction {
    let last = EventId(a.num_events() as u32 - 1);
    let copy = EventId(a.num_events() as u32);
    let mut events: Vec<_> = a.events().map(|e| a.event(e).clone()).collect();
    events.push(a.event(last).clone());
    let mut idle: Vec<bool> = a.events().map(|e| a.is_idle(e)).collect();
    idle.push(a.is_idle(last));
    let relations = (0..a.num_agents())
        .map(|i| {
            let agent = Agent::new(i as u16);
            let mut rel: Vec<Vec<EventId>> = a
                .events()
                .map(|e| {
                    let mut s = a.successors(agent, e).to_vec();
                    if s.contains(&last) {
                        s.push(copy);
                    }
                    s
                })
                .collect();
            rel.push(rel[last.index()].clone());
            rel
        })
        .collect();
    GroundAction::new(events, idle, relations, a.designated().to_vec())
}
