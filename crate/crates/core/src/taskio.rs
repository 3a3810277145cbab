//! The task-file format: one `name(arg,...)` fact per line, `.` optional,
//! `%` starts a comment. Declarations (`agent`, `atom`, `w_init`, `action`,
//! `e`, `group`) may appear anywhere; every other fact is linked after all
//! declarations are known.
//!
//! ```text
//! agent(a). atom(h). w_init(w1). r_init(w1,w2,a). v_init(w1,h). dw_init(w1).
//! action(peek). e(peek,e1). group(peek,full). q(peek,e1,e1,full).
//! obs(peek,a,full,top). pre(peek,e1,h). post(peek,e1,h,top). de(peek,e1).
//! action_pre(peek,top). goal(box(a,h)).
//! ```

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{ActionDescription, EventId, EventSpec, Group, GroupId};
use crate::formula::{parse_formula, Formula, Vocabulary};
use crate::kripke::{EpistemicStateK, KripkeModel, WorldId};
use crate::planner::{PlanningTask, TaskError};
use crate::valuation::Valuation;

/// Stable diagnostic codes, one per kind of problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagCode {
    Syntax,
    UnknownFact,
    Arity,
    Duplicate,
    UnknownId,
    BadFormula,
    BadName,
    NoAgents,
    NoWorlds,
    NoDesignatedWorld,
    NoDesignatedEvent,
    NoEvents,
    MissingObservability,
    MissingDefault,
    NoGoal,
}

impl DiagCode {
    pub fn code(self) -> &'static str {
        match self {
            DiagCode::Syntax => "E001",
            DiagCode::UnknownFact => "E002",
            DiagCode::Arity => "E003",
            DiagCode::Duplicate => "E004",
            DiagCode::UnknownId => "E005",
            DiagCode::BadFormula => "E006",
            DiagCode::BadName => "E007",
            DiagCode::NoAgents => "E008",
            DiagCode::NoWorlds => "E009",
            DiagCode::NoDesignatedWorld => "E010",
            DiagCode::NoDesignatedEvent => "E011",
            DiagCode::NoEvents => "E012",
            DiagCode::MissingObservability => "E013",
            DiagCode::MissingDefault => "E014",
            DiagCode::NoGoal => "E015",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: DiagCode,
    /// 1-based; 0 for whole-file problems.
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "error[{}]: {}", self.code.code(), self.message)
        } else {
            write!(
                f,
                "{}:{}: error[{}]: {}",
                self.line,
                self.col,
                self.code.code(),
                self.message
            )
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseError {
    pub fn has(&self, code: DiagCode) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

struct Arg<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

struct Fact<'a> {
    name: &'a str,
    args: Vec<Arg<'a>>,
    line: usize,
    col: usize,
}

fn split_facts<'a>(text: &'a str, diags: &mut Vec<Diagnostic>) -> Vec<Fact<'a>> {
    let mut facts = Vec::new();
    for (l, raw) in text.lines().enumerate() {
        let line = l + 1;
        let body = raw.split('%').next().unwrap_or_default();
        let bytes = body.as_bytes();
        let mut pos = 0;
        loop {
            while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'.') {
                pos += 1;
            }
            if pos >= bytes.len() {
                break;
            }
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            let name = &body[start..pos];
            if name.is_empty() || bytes.get(pos) != Some(&b'(') {
                diags.push(Diagnostic {
                    code: DiagCode::Syntax,
                    line,
                    col: pos + 1,
                    message: "expected `name(arguments)`".into(),
                });
                break;
            }
            pos += 1;
            let mut depth = 0usize;
            let mut args = Vec::new();
            let mut arg_start = pos;
            let mut closed = false;
            while pos < bytes.len() {
                match bytes[pos] {
                    b'(' => depth += 1,
                    b')' if depth == 0 => {
                        args.push((arg_start, pos));
                        closed = true;
                        pos += 1;
                        break;
                    }
                    b')' => depth -= 1,
                    b',' if depth == 0 => {
                        args.push((arg_start, pos));
                        arg_start = pos + 1;
                    }
                    _ => {}
                }
                pos += 1;
            }
            if !closed {
                diags.push(Diagnostic {
                    code: DiagCode::Syntax,
                    line,
                    col: start + 1,
                    message: format!("unterminated fact `{name}`"),
                });
                break;
            }
            let args = args
                .into_iter()
                .map(|(s, e)| {
                    let slice = &body[s..e];
                    let lead = slice.len() - slice.trim_start().len();
                    Arg {
                        text: slice.trim(),
                        line,
                        col: s + lead + 1,
                    }
                })
                .collect();
            facts.push(Fact {
                name,
                args,
                line,
                col: start + 1,
            });
        }
    }
    facts
}

const ARITIES: &[(&str, usize)] = &[
    ("agent", 1),
    ("atom", 1),
    ("w_init", 1),
    ("r_init", 3),
    ("v_init", 2),
    ("dw_init", 1),
    ("action", 1),
    ("e", 2),
    ("group", 2),
    ("q", 4),
    ("obs", 4),
    ("pre", 3),
    ("post", 4),
    ("de", 2),
    ("action_pre", 2),
    ("goal", 1),
];

struct ActionBuilder {
    events: IndexMap<String, EventSpec>,
    groups: IndexMap<String, Group>,
    observability: Vec<Vec<(GroupId, Formula)>>,
    global_pre: Option<Formula>,
    seen_pre: Vec<bool>,
    line: usize,
    col: usize,
}

struct Linker<'a> {
    diags: Vec<Diagnostic>,
    fact: Option<(&'a str, usize, usize)>,
}

impl<'a> Linker<'a> {
    fn error(&mut self, code: DiagCode, line: usize, col: usize, message: String) {
        self.diags.push(Diagnostic {
            code,
            line,
            col,
            message,
        });
    }

    fn at(&mut self, code: DiagCode, arg: &Arg, message: String) {
        self.error(code, arg.line, arg.col, message);
    }

    fn formula(&mut self, arg: &Arg, vocab: &Vocabulary) -> Option<Formula> {
        match parse_formula(arg.text, vocab) {
            Ok(f) => Some(f),
            Err(e) => {
                let col = arg.col + e.offset().saturating_sub(1);
                self.error(DiagCode::BadFormula, arg.line, col, e.to_string());
                None
            }
        }
    }

    fn lookup<V>(&mut self, map: &IndexMap<String, V>, arg: &Arg, what: &str) -> Option<usize> {
        let found = map.get_index_of(arg.text);
        if found.is_none() {
            let context = self.fact.map(|(n, _, _)| n).unwrap_or_default();
            self.at(
                DiagCode::UnknownId,
                arg,
                format!("unknown {what} `{}` in `{context}`", arg.text),
            );
        }
        found
    }
}

/// Parses a task file into a fully linked task. All problems found are
/// reported together, each with its position and code.
pub fn parse_task(text: &str) -> Result<PlanningTask, ParseError> {
    let mut diags = Vec::new();
    let facts = split_facts(text, &mut diags);
    let mut lk = Linker { diags, fact: None };

    let mut facts_ok = Vec::new();
    for f in facts {
        match ARITIES.iter().find(|(n, _)| *n == f.name) {
            None => lk.error(
                DiagCode::UnknownFact,
                f.line,
                f.col,
                format!("unknown fact `{}`", f.name),
            ),
            Some((_, n)) if *n != f.args.len() => lk.error(
                DiagCode::Arity,
                f.line,
                f.col,
                format!(
                    "`{}` takes {} argument(s), found {}",
                    f.name,
                    n,
                    f.args.len()
                ),
            ),
            Some(_) => facts_ok.push(f),
        }
    }

    // Declarations.
    let mut vocab = Vocabulary::new();
    let mut worlds: IndexMap<String, (usize, usize)> = IndexMap::new();
    let mut actions: IndexMap<String, ActionBuilder> = IndexMap::new();
    let mut agent_count = 0;
    for f in &facts_ok {
        lk.fact = Some((f.name, f.line, f.col));
        let a0 = &f.args[0];
        match f.name {
            "agent" => match vocab.add_agent(a0.text) {
                Ok(_) => agent_count += 1,
                Err(e) => lk.at(name_code(&e), a0, e.to_string()),
            },
            "atom" => {
                if let Err(e) = vocab.add_atom(a0.text) {
                    lk.at(name_code(&e), a0, e.to_string());
                }
            }
            "w_init" => declare(&mut lk, &mut worlds, a0, "world", (f.line, f.col)),
            "action" => {
                if !crate::formula::is_identifier(a0.text) {
                    lk.at(
                        DiagCode::BadName,
                        a0,
                        format!("invalid action name `{}`", a0.text),
                    );
                } else if actions.contains_key(a0.text) {
                    lk.at(
                        DiagCode::Duplicate,
                        a0,
                        format!("action `{}` declared twice", a0.text),
                    );
                } else {
                    actions.insert(
                        a0.text.to_string(),
                        ActionBuilder {
                            events: IndexMap::new(),
                            groups: IndexMap::new(),
                            observability: Vec::new(),
                            global_pre: None,
                            seen_pre: Vec::new(),
                            line: f.line,
                            col: f.col,
                        },
                    );
                }
            }
            _ => {}
        }
    }
    for f in &facts_ok {
        lk.fact = Some((f.name, f.line, f.col));
        if f.name != "e" && f.name != "group" {
            continue;
        }
        let Some(ai) = lk.lookup(&actions, &f.args[0], "action") else {
            continue;
        };
        let (_, b) = actions.get_index_mut(ai).expect("index from lookup");
        let arg = &f.args[1];
        if !crate::formula::is_identifier(arg.text) {
            lk.at(
                DiagCode::BadName,
                arg,
                format!("invalid name `{}`", arg.text),
            );
            continue;
        }
        let name = arg.text.to_string();
        let dup = if f.name == "e" {
            b.events.contains_key(&name)
        } else {
            b.groups.contains_key(&name)
        };
        if dup {
            lk.at(DiagCode::Duplicate, arg, format!("`{name}` declared twice"));
        } else if f.name == "e" {
            b.events.insert(
                name.clone(),
                EventSpec {
                    name,
                    pre: Formula::Top,
                    post: Vec::new(),
                    designated: false,
                },
            );
            b.seen_pre.push(false);
        } else {
            b.groups.insert(
                name.clone(),
                Group {
                    name,
                    relation: Vec::new(),
                },
            );
        }
    }
    let num_agents = vocab.num_agents();
    for b in actions.values_mut() {
        b.observability = vec![Vec::new(); num_agents];
    }
    let agents: IndexMap<String, ()> = vocab
        .agents()
        .map(|a| (vocab.agent_name(a).to_string(), ()))
        .collect();
    let atoms: IndexMap<String, ()> = vocab
        .atoms()
        .map(|p| (vocab.atom_name(p).to_string(), ()))
        .collect();

    // Everything else.
    let mut valuations = vec![Valuation::EMPTY; worlds.len()];
    let mut edges = Vec::new();
    let mut designated = Vec::new();
    let mut goals = Vec::new();
    for f in &facts_ok {
        lk.fact = Some((f.name, f.line, f.col));
        let a = &f.args;
        match f.name {
            "r_init" => {
                let w = lk.lookup(&worlds, &a[0], "world");
                let v = lk.lookup(&worlds, &a[1], "world");
                let i = lk.lookup(&agents, &a[2], "agent");
                if let (Some(w), Some(v), Some(i)) = (w, v, i) {
                    edges.push((
                        crate::formula::Agent::new(i as u16),
                        WorldId(w as u32),
                        WorldId(v as u32),
                    ));
                }
            }
            "v_init" => {
                let w = lk.lookup(&worlds, &a[0], "world");
                let p = lk.lookup(&atoms, &a[1], "atom");
                if let (Some(w), Some(p)) = (w, p) {
                    valuations[w].set(crate::formula::Atom::new(p as u16), true);
                }
            }
            "dw_init" => {
                if let Some(w) = lk.lookup(&worlds, &a[0], "world") {
                    designated.push(WorldId(w as u32));
                }
            }
            "goal" => {
                if let Some(g) = lk.formula(&a[0], &vocab) {
                    goals.push(g);
                }
            }
            "q" | "obs" | "pre" | "post" | "de" | "action_pre" => {
                let Some(ai) = lk.lookup(&actions, &a[0], "action") else {
                    continue;
                };
                let (_, b) = actions.get_index_mut(ai).expect("index from lookup");
                link_action_fact(&mut lk, f, b, &vocab, &agents, &atoms);
            }
            _ => {}
        }
    }

    if agent_count == 0 {
        lk.error(DiagCode::NoAgents, 0, 0, "no agents declared".into());
    }
    if worlds.is_empty() {
        lk.error(
            DiagCode::NoWorlds,
            0,
            0,
            "no initial worlds declared".into(),
        );
    }
    if designated.is_empty() {
        lk.error(
            DiagCode::NoDesignatedWorld,
            0,
            0,
            "no designated initial world".into(),
        );
    }
    if goals.is_empty() {
        lk.error(DiagCode::NoGoal, 0, 0, "no goal".into());
    }
    let mut descs = Vec::new();
    for (name, b) in actions {
        let (line, col) = (b.line, b.col);
        if b.events.is_empty() {
            lk.error(
                DiagCode::NoEvents,
                line,
                col,
                format!("action `{name}` has no events"),
            );
        } else if !b.events.values().any(|e| e.designated) {
            lk.error(
                DiagCode::NoDesignatedEvent,
                line,
                col,
                format!("action `{name}` has no designated event"),
            );
        }
        for (i, conds) in b.observability.iter().enumerate() {
            let agent = vocab.agent_name(crate::formula::Agent::new(i as u16));
            match conds.last() {
                None => lk.error(
                    DiagCode::MissingObservability,
                    line,
                    col,
                    format!("action `{name}` gives agent `{agent}` no observability group"),
                ),
                Some((_, c)) if !c.is_top() => lk.error(
                    DiagCode::MissingDefault,
                    line,
                    col,
                    format!("action `{name}`: last observability condition of agent `{agent}` must be `top`"),
                ),
                _ => {}
            }
        }
        descs.push(ActionDescription {
            name,
            events: b.events.into_values().collect(),
            groups: b.groups.into_values().collect(),
            observability: b.observability,
            global_pre: b.global_pre.unwrap_or(Formula::Top),
        });
    }

    if !lk.diags.is_empty() {
        return Err(ParseError {
            diagnostics: lk.diags,
        });
    }
    let model = KripkeModel::new(vocab.num_atoms(), vocab.num_agents(), valuations, edges)
        .map_err(|e| whole_file(DiagCode::NoWorlds, e.to_string()))?;
    let initial = EpistemicStateK::new(model, designated)
        .map_err(|e| whole_file(DiagCode::NoDesignatedWorld, e.to_string()))?;
    let task = PlanningTask {
        vocab,
        world_names: worlds.into_keys().collect(),
        initial,
        actions: descs,
        goals,
    };
    task.validate()
        .map_err(|e| whole_file(DiagCode::Syntax, e.to_string()))?;
    Ok(task)
}

fn whole_file(code: DiagCode, message: String) -> ParseError {
    ParseError {
        diagnostics: vec![Diagnostic {
            code,
            line: 0,
            col: 0,
            message,
        }],
    }
}

fn name_code(e: &crate::formula::VocabError) -> DiagCode {
    match e {
        crate::formula::VocabError::Duplicate(_) => DiagCode::Duplicate,
        _ => DiagCode::BadName,
    }
}

fn declare(
    lk: &mut Linker,
    map: &mut IndexMap<String, (usize, usize)>,
    arg: &Arg,
    what: &str,
    pos: (usize, usize),
) {
    if !crate::formula::is_identifier(arg.text) {
        lk.at(
            DiagCode::BadName,
            arg,
            format!("invalid {what} name `{}`", arg.text),
        );
    } else if map.contains_key(arg.text) {
        lk.at(
            DiagCode::Duplicate,
            arg,
            format!("{what} `{}` declared twice", arg.text),
        );
    } else {
        map.insert(arg.text.to_string(), pos);
    }
}

fn link_action_fact(
    lk: &mut Linker,
    f: &Fact,
    b: &mut ActionBuilder,
    vocab: &Vocabulary,
    agents: &IndexMap<String, ()>,
    atoms: &IndexMap<String, ()>,
) {
    let a = &f.args;
    match f.name {
        "q" => {
            let e1 = lk.lookup(&b.events, &a[1], "event");
            let e2 = lk.lookup(&b.events, &a[2], "event");
            let g = lk.lookup(&b.groups, &a[3], "group");
            if let (Some(e1), Some(e2), Some(g)) = (e1, e2, g) {
                let rel = &mut b.groups[g].relation;
                let pair = (EventId(e1 as u32), EventId(e2 as u32));
                if !rel.contains(&pair) {
                    rel.push(pair);
                }
            }
        }
        "obs" => {
            let i = lk.lookup(agents, &a[1], "agent");
            let g = lk.lookup(&b.groups, &a[2], "group");
            let c = lk.formula(&a[3], vocab);
            if let (Some(i), Some(g), Some(c)) = (i, g, c) {
                b.observability[i].push((GroupId(g as u16), c));
            }
        }
        "pre" => {
            let e = lk.lookup(&b.events, &a[1], "event");
            let p = lk.formula(&a[2], vocab);
            if let (Some(e), Some(p)) = (e, p) {
                if b.seen_pre[e] {
                    lk.at(
                        DiagCode::Duplicate,
                        &a[1],
                        format!("second precondition for `{}`", a[1].text),
                    );
                } else {
                    b.seen_pre[e] = true;
                    b.events[e].pre = p;
                }
            }
        }
        "post" => {
            let e = lk.lookup(&b.events, &a[1], "event");
            let p = lk.lookup(atoms, &a[2], "atom");
            let v = lk.formula(&a[3], vocab);
            if let (Some(e), Some(p), Some(v)) = (e, p, v) {
                let atom = crate::formula::Atom::new(p as u16);
                let post = &mut b.events[e].post;
                if post.iter().any(|(q, _)| *q == atom) {
                    lk.at(
                        DiagCode::Duplicate,
                        &a[2],
                        format!("second postcondition for `{}`", a[2].text),
                    );
                } else {
                    post.push((atom, v));
                }
            }
        }
        "de" => {
            if let Some(e) = lk.lookup(&b.events, &a[1], "event") {
                b.events[e].designated = true;
            }
        }
        "action_pre" => {
            if let Some(p) = lk.formula(&a[1], vocab) {
                if b.global_pre.is_some() {
                    lk.at(
                        DiagCode::Duplicate,
                        &a[1],
                        "second action precondition".into(),
                    );
                } else {
                    b.global_pre = Some(p);
                }
            }
        }
        _ => unreachable!("only action facts are linked here"),
    }
}

/// Inverse of [`parse_task`]: `parse_task(&write_task(t)?)` equals `t`.
pub fn write_task(task: &PlanningTask) -> Result<String, TaskError> {
    task.validate()?;
    use std::fmt::Write;
    let v = &task.vocab;
    let m = task.initial.model();
    let mut out = String::new();
    let w = |id: WorldId| task.world_names[id.index()].as_str();
    for a in v.agents() {
        let _ = writeln!(out, "agent({}).", v.agent_name(a));
    }
    for p in v.atoms() {
        let _ = writeln!(out, "atom({}).", v.atom_name(p));
    }
    out.push('\n');
    for id in m.worlds() {
        let _ = writeln!(out, "w_init({}).", w(id));
    }
    for id in m.worlds() {
        for p in m.valuation_of(id).true_atoms() {
            let _ = writeln!(out, "v_init({},{}).", w(id), v.atom_name(p));
        }
    }
    for (a, x, y) in m.edges() {
        let _ = writeln!(out, "r_init({},{},{}).", w(x), w(y), v.agent_name(a));
    }
    for &d in task.initial.designated() {
        let _ = writeln!(out, "dw_init({}).", w(d));
    }
    for act in &task.actions {
        out.push('\n');
        let n = &act.name;
        let _ = writeln!(out, "action({n}).");
        for e in &act.events {
            let _ = writeln!(out, "e({n},{}).", e.name);
        }
        for g in &act.groups {
            let _ = writeln!(out, "group({n},{}).", g.name);
        }
        if !act.global_pre.is_top() {
            let _ = writeln!(out, "action_pre({n},{}).", act.global_pre.render(v));
        }
        for e in &act.events {
            if !e.pre.is_top() {
                let _ = writeln!(out, "pre({n},{},{}).", e.name, e.pre.render(v));
            }
            for (p, f) in &e.post {
                let _ = writeln!(
                    out,
                    "post({n},{},{},{}).",
                    e.name,
                    v.atom_name(*p),
                    f.render(v)
                );
            }
            if e.designated {
                let _ = writeln!(out, "de({n},{}).", e.name);
            }
        }
        for g in &act.groups {
            for (x, y) in &g.relation {
                let _ = writeln!(
                    out,
                    "q({n},{},{},{}).",
                    act.events[x.index()].name,
                    act.events[y.index()].name,
                    g.name
                );
            }
        }
        for (i, conds) in act.observability.iter().enumerate() {
            let agent = v.agent_name(crate::formula::Agent::new(i as u16));
            for (g, c) in conds {
                let _ = writeln!(
                    out,
                    "obs({n},{agent},{},{}).",
                    act.groups[g.index()].name,
                    c.render(v)
                );
            }
        }
    }
    out.push('\n');
    for g in &task.goals {
        let _ = writeln!(out, "goal({}).", g.render(v));
    }
    Ok(out)
}

/// One benchmark run. `None` counts are written as `-`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub domain: String,
    pub params: String,
    pub semantics: String,
    pub plan_length: Option<usize>,
    pub bound: usize,
    pub time_ms: Option<f64>,
    pub nodes: Option<usize>,
    pub edges: Option<usize>,
    pub expanded: Option<u64>,
    pub status: String,
}

pub const CSV_HEADER: [&str; 10] = [
    "domain",
    "params",
    "semantics",
    "plan_length",
    "bound",
    "time_ms",
    "nodes",
    "edges",
    "expanded",
    "status",
];

pub fn write_stats_csv(rows: &[StatsRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let dash = |x: Option<String>| x.unwrap_or_else(|| "-".to_string());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        let time = if r.status == "timeout" {
            "t.o.".to_string()
        } else {
            dash(r.time_ms.map(|t| format!("{t:.3}")))
        };
        w.write_record([
            r.domain.clone(),
            r.params.clone(),
            r.semantics.clone(),
            dash(r.plan_length.map(|x| x.to_string())),
            r.bound.to_string(),
            time,
            dash(r.nodes.map(|x| x.to_string())),
            dash(r.edges.map(|x| x.to_string())),
            dash(r.expanded.map(|x| x.to_string())),
            r.status.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn write_stats_json(rows: &[StatsRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

pub fn read_stats_json(text: &str) -> serde_json::Result<Vec<StatsRow>> {
    serde_json::from_str(text)
}

/// Aligned plain-text table of the same columns.
pub fn write_stats_table(rows: &[StatsRow]) -> String {
    let csv = write_stats_csv(rows);
    let cells: Vec<Vec<String>> = csv::Reader::from_reader(csv.as_bytes())
        .records()
        .filter_map(Result::ok)
        .map(|r| r.iter().map(str::to_string).collect())
        .collect();
    let mut widths: Vec<usize> = CSV_HEADER.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |cols: Vec<&str>, out: &mut String| {
        let parts: Vec<String> = cols
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(CSV_HEADER.to_vec(), &mut out);
    for row in &cells {
        line(row.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TOY: &str = "\
% two agents, a coin
agent(a). agent(b).
atom(h).
w_init(w1). w_init(w2).
v_init(w1,h).
r_init(w1,w1,a). r_init(w1,w2,a). r_init(w2,w1,a). r_init(w2,w2,a)
r_init(w1,w1,b). r_init(w1,w2,b). r_init(w2,w1,b). r_init(w2,w2,b)
dw_init(w1).
action(peek_a).
e(peek_a,e1). e(peek_a,e2).
group(peek_a,full). group(peek_a,oblivious).
pre(peek_a,e1,h).
de(peek_a,e1).
q(peek_a,e1,e1,full). q(peek_a,e2,e2,full).
q(peek_a,e1,e2,oblivious). q(peek_a,e2,e2,oblivious).
obs(peek_a,a,full,top).
obs(peek_a,b,oblivious,top).
goal(box(a, h)).
";

    #[test]
    fn parses_toy_file() {
        let t = parse_task(TOY).unwrap();
        assert_eq!(t.initial.model().num_worlds(), 2);
        assert_eq!(t.actions.len(), 1);
        assert_eq!(t.actions[0], crate::fixtures::coin().peek_desc);
        assert_eq!(t.initial, crate::fixtures::coin().state);
    }

    #[test]
    fn round_trip() {
        let t = parse_task(TOY).unwrap();
        let text = write_task(&t).unwrap();
        assert_eq!(parse_task(&text).unwrap(), t);
        assert_eq!(write_task(&parse_task(&text).unwrap()).unwrap(), text);
    }

    #[test]
    fn missing_designated_world() {
        let text = TOY.replace("dw_init(w1).", "");
        let e = parse_task(&text).unwrap_err();
        assert!(e.has(DiagCode::NoDesignatedWorld));
        assert!(e.to_string().contains("no designated initial world"));
    }

    #[test]
    fn diagnostics_carry_positions() {
        let text = TOY.replace("pre(peek_a,e1,h).", "pre(peek_a,e3,and(h,)).");
        let e = parse_task(&text).unwrap_err();
        let d = &e.diagnostics;
        assert!(d
            .iter()
            .any(|d| d.code == DiagCode::UnknownId && d.line == 12 && d.col == 12));
        assert!(d
            .iter()
            .any(|d| d.code == DiagCode::BadFormula && d.line == 12));
    }

    #[test]
    fn missing_default_observability() {
        let text = TOY.replace("obs(peek_a,b,oblivious,top).", "obs(peek_a,b,oblivious,h).");
        assert!(parse_task(&text).unwrap_err().has(DiagCode::MissingDefault));
        let text = TOY.replace("obs(peek_a,b,oblivious,top).", "");
        assert!(parse_task(&text)
            .unwrap_err()
            .has(DiagCode::MissingObservability));
        let text = TOY.replace("de(peek_a,e1).", "");
        assert!(parse_task(&text)
            .unwrap_err()
            .has(DiagCode::NoDesignatedEvent));
    }

    #[test]
    fn rejects_reserved_and_unknown() {
        let e = parse_task(&format!("{TOY}atom(pre).")).unwrap_err();
        assert!(e.has(DiagCode::BadName));
        let e = parse_task(&format!("{TOY}goal(box(c,h)).")).unwrap_err();
        assert!(e.has(DiagCode::BadFormula));
        let e = parse_task(&format!("{TOY}foo(x).")).unwrap_err();
        assert!(e.has(DiagCode::UnknownFact));
        let e = parse_task(&format!("{TOY}agent(a,b).")).unwrap_err();
        assert!(e.has(DiagCode::Arity));
    }

    #[test]
    fn empty_goal_rejected_on_write() {
        let mut t = parse_task(TOY).unwrap();
        t.goals.clear();
        assert_eq!(write_task(&t), Err(TaskError::NoGoal));
    }

    fn row(status: &str) -> StatsRow {
        StatsRow {
            domain: "cb".into(),
            params: "n=3 g=0".into(),
            semantics: "delphic".into(),
            plan_length: (status == "plan").then_some(2),
            bound: 2,
            time_ms: Some(1.5),
            nodes: (status != "timeout").then_some(10),
            edges: (status != "timeout").then_some(20),
            expanded: (status != "timeout").then_some(3),
            status: status.into(),
        }
    }

    #[test]
    fn stats_csv_and_json() {
        let rows = vec![row("plan"), row("timeout")];
        let csv = write_stats_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0].split(',').count(), 10);
        assert_eq!(lines[1], "cb,n=3 g=0,delphic,2,2,1.500,10,20,3,plan");
        assert_eq!(lines[2], "cb,n=3 g=0,delphic,-,2,t.o.,-,-,-,timeout");
        assert_eq!(read_stats_json(&write_stats_json(&rows)).unwrap(), rows);
        assert_eq!(write_stats_table(&rows).lines().count(), 3);
    }
}
