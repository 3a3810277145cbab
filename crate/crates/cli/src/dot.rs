//! Graphviz export of replayed states.

use std::fmt::Write;

use delphic::kripke::EpistemicStateK;
use delphic::possibility::{OriginKey, PossId, PossibilitySpectrum, PossibilityStore};
use delphic::{Agent, Valuation, Vocabulary};

/// Stable node name derived from where a possibility came from, so the same
/// possibility gets the same name in every graph of a trace.
pub fn origin_name(origin: &OriginKey) -> String {
    match *origin {
        OriginKey::Initial { batch, world } => format!("i{batch}_{world}"),
        OriginKey::Update {
            time,
            parent,
            event,
        } => format!("u{time}_{}_{}", parent.0, event.0),
        OriginKey::Contracted { time, rep } => format!("c{time}_{}", rep.0),
    }
}

fn label(vocab: &Vocabulary, v: Valuation) -> String {
    let atoms: Vec<&str> = vocab
        .atoms()
        .filter(|&p| v.get(p))
        .map(|p| vocab.atom_name(p))
        .collect();
    if atoms.is_empty() {
        "{}".to_string()
    } else {
        atoms.join(",")
    }
}

fn agent_label(vocab: &Vocabulary, i: usize) -> &str {
    vocab.agent_name(Agent::new(i as u16))
}

/// One digraph for a Kripke state; worlds are named `s{step}_w{world}`.
pub fn kripke_state(vocab: &Vocabulary, s: &EpistemicStateK, step: usize) -> String {
    let m = s.model();
    let mut out = format!("digraph \"state_{step}\" {{\n  node [shape=ellipse];\n");
    for w in m.worlds() {
        let shape = if s.designated().contains(&w) {
            ", peripheries=2"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "  \"s{step}_w{}\" [label=\"w{}: {}\"{shape}];",
            w.0,
            w.0,
            label(vocab, m.valuation_of(w))
        );
    }
    for (i, w, v) in m.edges() {
        let _ = writeln!(
            out,
            "  \"s{step}_w{}\" -> \"s{step}_w{}\" [label=\"{}\"];",
            w.0,
            v.0,
            agent_label(vocab, i.index())
        );
    }
    out.push_str("}\n");
    out
}

fn node_line(vocab: &Vocabulary, store: &PossibilityStore, u: PossId, designated: bool) -> String {
    let node = store.node(u);
    let shape = if designated { ", peripheries=2" } else { "" };
    format!(
        "  \"{}\" [label=\"v{}: {}\"{shape}];\n",
        origin_name(&node.origin),
        u.0,
        label(vocab, node.valuation)
    )
}

fn edge_lines(vocab: &Vocabulary, store: &PossibilityStore, u: PossId, out: &mut String) {
    let from = origin_name(&store.node(u).origin);
    for i in 0..store.num_agents() {
        for &v in store.info(u, Agent::new(i as u16)) {
            let _ = writeln!(
                out,
                "  \"{from}\" -> \"{}\" [label=\"{}\"];",
                origin_name(&store.node(v).origin),
                agent_label(vocab, i)
            );
        }
    }
}

/// One digraph for a spectrum: exactly the possibilities reachable from it.
pub fn possibility_state(
    vocab: &Vocabulary,
    store: &PossibilityStore,
    s: &PossibilitySpectrum,
    step: usize,
) -> String {
    let mut out = format!("digraph \"state_{step}\" {{\n  node [shape=box];\n");
    let reach = store.reachable(s);
    for &u in &reach {
        out.push_str(&node_line(vocab, store, u, s.designated().contains(&u)));
    }
    for &u in &reach {
        edge_lines(vocab, store, u, &mut out);
    }
    out.push_str("}\n");
    out
}

/// Every possibility of a trace drawn once. Dashed edges lead from a
/// possibility to the ones updated from it, so reuse across states is
/// visible as nodes without an incoming dashed edge at later steps.
pub fn possibility_trace(
    vocab: &Vocabulary,
    store: &PossibilityStore,
    states: &[PossibilitySpectrum],
) -> String {
    let mut all: Vec<PossId> = states.iter().flat_map(|s| store.reachable(s)).collect();
    all.sort_unstable();
    all.dedup();
    let mut out = String::from("digraph \"trace\" {\n  node [shape=box];\n");
    for &u in &all {
        let designated = states.iter().any(|s| s.designated().contains(&u));
        out.push_str(&node_line(vocab, store, u, designated));
    }
    for &u in &all {
        edge_lines(vocab, store, u, &mut out);
    }
    for &u in &all {
        if let OriginKey::Update { parent, .. } = store.node(u).origin {
            if all.binary_search(&parent).is_ok() {
                let _ = writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [style=dashed, arrowhead=empty];",
                    origin_name(&store.node(parent).origin),
                    origin_name(&store.node(u).origin)
                );
            }
        }
    }
    for (t, s) in states.iter().enumerate() {
        for &u in s.designated() {
            let _ = writeln!(
                out,
                "  \"t{t}\" [shape=plaintext, label=\"t={t}\"];\n  \"t{t}\" -> \"{}\" [style=dotted];",
                origin_name(&store.node(u).origin)
            );
        }
    }
    out.push_str("}\n");
    out
}
