//! Generators for the five benchmark domains. Each emits a task file; goals
//! come in an indexed family of increasing difficulty.

use std::fmt::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::PlanningTask;
use crate::taskio::parse_task;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    /// Assemble line.
    Al,
    /// Coin in the box.
    Cb,
    /// Collaboration and communication.
    Cc,
    /// Grapevine.
    Gr,
    /// Selective communication.
    Sc,
}

impl Domain {
    pub const ALL: [Domain; 5] = [Domain::Al, Domain::Cb, Domain::Cc, Domain::Gr, Domain::Sc];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Al => "al",
            Domain::Cb => "cb",
            Domain::Cc => "cc",
            Domain::Gr => "gr",
            Domain::Sc => "sc",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Domain::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown domain `{s}` (expected al, cb, cc, gr or sc)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DomainParams {
    pub domain: Domain,
    pub agents: usize,
    pub rooms: usize,
    pub boxes: usize,
    pub depth: usize,
    pub goal: usize,
}

impl DomainParams {
    /// Smallest valid parameters of a domain, goal 0.
    pub fn new(domain: Domain) -> Self {
        let (agents, rooms, boxes, depth) = match domain {
            Domain::Al => (2, 0, 0, 2),
            Domain::Cb => (3, 0, 0, 0),
            Domain::Cc => (2, 2, 2, 0),
            Domain::Gr => (3, 2, 0, 0),
            Domain::Sc => (3, 4, 0, 0),
        };
        DomainParams {
            domain,
            agents,
            rooms,
            boxes,
            depth,
            goal: 0,
        }
    }

    pub fn agents(self, n: usize) -> Self {
        DomainParams { agents: n, ..self }
    }

    pub fn rooms(self, k: usize) -> Self {
        DomainParams { rooms: k, ..self }
    }

    pub fn boxes(self, m: usize) -> Self {
        DomainParams { boxes: m, ..self }
    }

    pub fn depth(self, d: usize) -> Self {
        DomainParams { depth: d, ..self }
    }

    pub fn goal(self, g: usize) -> Self {
        DomainParams { goal: g, ..self }
    }

    /// Compact description used in stats rows, e.g. `n=3 k=2 g=1`.
    pub fn label(&self) -> String {
        let mut s = format!("n={}", self.agents);
        match self.domain {
            Domain::Al => {
                let _ = write!(s, " d={}", self.depth);
            }
            Domain::Cc => {
                let _ = write!(s, " k={} m={}", self.rooms, self.boxes);
            }
            Domain::Sc => {
                let _ = write!(s, " k={}", self.rooms);
            }
            Domain::Cb | Domain::Gr => {}
        }
        let _ = write!(s, " g={}", self.goal);
        s
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("{domain}: {message}")]
    OutOfRange { domain: Domain, message: String },
}

/// Number of goals in the domain's family.
pub fn goal_count(domain: Domain) -> usize {
    match domain {
        Domain::Al => 1,
        Domain::Cb => 5,
        Domain::Cc => 4,
        Domain::Gr => 4,
        Domain::Sc => 4,
    }
}

fn check(p: &DomainParams) -> Result<(), DomainError> {
    let bad = |message: &str| {
        Err(DomainError::OutOfRange {
            domain: p.domain,
            message: message.to_string(),
        })
    };
    let ok = match p.domain {
        Domain::Al => p.agents == 2 && p.depth >= 2,
        Domain::Cb => p.agents == 3,
        Domain::Cc => p.agents >= 2 && p.rooms >= 2 && p.boxes >= 1,
        Domain::Gr => p.agents >= 2 && p.rooms == 2,
        Domain::Sc => p.agents >= 2 && p.rooms >= 2,
    };
    if !ok {
        return bad(match p.domain {
            Domain::Al => "requires n = 2 and d >= 2",
            Domain::Cb => "requires n = 3",
            Domain::Cc => "requires n >= 2, k >= 2, m >= 1",
            Domain::Gr => "requires n >= 2 and k = 2",
            Domain::Sc => "requires n >= 2 and k >= 2",
        });
    }
    if p.goal >= goal_count(p.domain) {
        return bad(&format!(
            "goal index must be below {}",
            goal_count(p.domain)
        ));
    }
    if p.domain == Domain::Gr && p.goal >= 2 && p.agents < 3 {
        return bad("goals 2 and up need n >= 3");
    }
    if p.domain == Domain::Cc && p.goal >= 1 && p.boxes < 2 {
        return bad("goals 1 and up need m >= 2");
    }
    Ok(())
}

/// Task file text for `p`. Identical parameters give identical bytes.
pub fn generate(p: &DomainParams) -> Result<String, DomainError> {
    check(p)?;
    let mut doc = Doc::default();
    let _ = writeln!(doc.out, "% {} {}", p.domain, p.label());
    match p.domain {
        Domain::Al => assemble_line(p, &mut doc),
        Domain::Cb => coin_in_the_box(p, &mut doc),
        Domain::Cc => collaboration(p, &mut doc),
        Domain::Gr => grapevine(p, &mut doc),
        Domain::Sc => selective(p, &mut doc),
    }
    Ok(doc.out)
}

/// Generates and parses.
pub fn build(p: &DomainParams) -> Result<PlanningTask, DomainError> {
    let text = generate(p)?;
    Ok(parse_task(&text).expect("generated tasks are well formed"))
}

// Formula text helpers.

fn neg(f: &str) -> String {
    format!("neg({f})")
}

fn and(a: &str, b: &str) -> String {
    format!("and({a},{b})")
}

fn or(a: &str, b: &str) -> String {
    format!("or({a},{b})")
}

fn kb(i: &str, f: &str) -> String {
    format!("box({i},{f})")
}

/// Knows whether.
fn kw(i: &str, f: &str) -> String {
    or(&kb(i, f), &kb(i, &neg(f)))
}

fn conj(parts: &[String]) -> String {
    match parts {
        [] => "top".to_string(),
        [one] => one.clone(),
        [first, rest @ ..] => and(first, &conj(rest)),
    }
}

fn disj(parts: &[String]) -> String {
    match parts {
        [] => "neg(top)".to_string(),
        [one] => one.clone(),
        [first, rest @ ..] => or(first, &disj(rest)),
    }
}

const BOTTOM: &str = "neg(top)";

fn agent_names(n: usize) -> Vec<String> {
    const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    (0..n)
        .map(|i| {
            if i < LETTERS.len() {
                (LETTERS[i] as char).to_string()
            } else {
                format!("ag{i}")
            }
        })
        .collect()
}

#[derive(Default)]
struct Doc {
    out: String,
}

impl Doc {
    fn fact(&mut self, name: &str, args: &[&str]) {
        let _ = writeln!(self.out, "{name}({}).", args.join(","));
    }

    fn blank(&mut self) {
        self.out.push('\n');
    }

    /// Worlds with the given true atoms; relations from `same(agent, w, v)`.
    fn initial(
        &mut self,
        agents: &[String],
        atoms: &[String],
        worlds: &[(String, Vec<String>)],
        designated: &[usize],
        same: impl Fn(usize, usize, usize) -> bool,
    ) {
        for a in agents {
            self.fact("agent", &[a]);
        }
        for p in atoms {
            self.fact("atom", &[p]);
        }
        self.blank();
        for (w, _) in worlds {
            self.fact("w_init", &[w]);
        }
        for (w, true_atoms) in worlds {
            for p in true_atoms {
                self.fact("v_init", &[w, p]);
            }
        }
        for (i, a) in agents.iter().enumerate() {
            for (x, (wx, _)) in worlds.iter().enumerate() {
                for (y, (wy, _)) in worlds.iter().enumerate() {
                    if same(i, x, y) {
                        self.fact("r_init", &[wx, wy, a]);
                    }
                }
            }
        }
        for &d in designated {
            self.fact("dw_init", &[&worlds[d].0]);
        }
    }

    fn goal(&mut self, goal: &str) {
        self.blank();
        self.fact("goal", &[goal]);
    }
}

struct Ev {
    name: &'static str,
    pre: String,
    post: Vec<(String, String)>,
    designated: bool,
}

impl Ev {
    fn new(name: &'static str, pre: impl Into<String>) -> Self {
        Ev {
            name,
            pre: pre.into(),
            post: Vec::new(),
            designated: true,
        }
    }

    fn skip() -> Self {
        Ev {
            name: "skip",
            pre: "top".into(),
            post: Vec::new(),
            designated: false,
        }
    }

    fn post(mut self, atom: &str, value: impl Into<String>) -> Self {
        self.post.push((atom.to_string(), value.into()));
        self
    }
}

struct Act {
    name: String,
    pre: String,
    events: Vec<Ev>,
    groups: Vec<(&'static str, Vec<(usize, usize)>)>,
    /// Per agent, `(group, condition)` in priority order.
    obs: Vec<Vec<(&'static str, String)>>,
}

impl Act {
    fn emit(&self, doc: &mut Doc, agents: &[String]) {
        doc.blank();
        let n = self.name.as_str();
        doc.fact("action", &[n]);
        for e in &self.events {
            doc.fact("e", &[n, e.name]);
        }
        for (g, _) in &self.groups {
            doc.fact("group", &[n, g]);
        }
        if self.pre != "top" {
            doc.fact("action_pre", &[n, &self.pre]);
        }
        for e in &self.events {
            if e.pre != "top" {
                doc.fact("pre", &[n, e.name, &e.pre]);
            }
            for (p, f) in &e.post {
                doc.fact("post", &[n, e.name, p, f]);
            }
            if e.designated {
                doc.fact("de", &[n, e.name]);
            }
        }
        for (g, rel) in &self.groups {
            for &(x, y) in rel {
                doc.fact("q", &[n, self.events[x].name, self.events[y].name, g]);
            }
        }
        for (a, conds) in agents.iter().zip(&self.obs) {
            for (g, c) in conds {
                doc.fact("obs", &[n, a, g, c]);
            }
        }
    }
}

/// Relations for an action whose events are `events` plus a trailing skip:
/// observers tell the informative events apart, watchers only know one of
/// them happened, the oblivious believe nothing happened.
fn observer(k: usize) -> Vec<(usize, usize)> {
    (0..=k).map(|e| (e, e)).collect()
}

fn watcher(k: usize) -> Vec<(usize, usize)> {
    let mut r: Vec<(usize, usize)> = (0..k).flat_map(|x| (0..k).map(move |y| (x, y))).collect();
    r.push((k, k));
    r
}

fn oblivious(k: usize) -> Vec<(usize, usize)> {
    (0..=k).map(|e| (e, k)).collect()
}

fn everyone(agents: &[String], group: &'static str) -> Vec<Vec<(&'static str, String)>> {
    agents
        .iter()
        .map(|_| vec![(group, "top".to_string())])
        .collect()
}

/// A fully observed single-event action.
fn public(name: String, pre: String, post: Vec<(String, String)>, agents: &[String]) -> Act {
    let mut ev = Ev::new("ev", "top");
    ev.post = post;
    Act {
        name,
        pre,
        events: vec![ev],
        groups: vec![("all", vec![(0, 0)])],
        obs: everyone(agents, "all"),
    }
}

fn assemble_line(p: &DomainParams, doc: &mut Doc) {
    let agents = agent_names(2);
    let (a, b) = (agents[0].as_str(), agents[1].as_str());
    let fail = |i: &str| format!("fail_{i}");
    let atoms = vec![fail(a), fail(b), "assembled".into(), "restarted".into()];
    let worlds: Vec<(String, Vec<String>)> = (0..4)
        .map(|w| {
            let mut t = Vec::new();
            if w & 1 != 0 {
                t.push(fail(a));
            }
            if w & 2 != 0 {
                t.push(fail(b));
            }
            (format!("w{w}"), t)
        })
        .collect();
    doc.initial(&agents, &atoms, &worlds, &[0], |_, _, _| true);

    let mut acts = Vec::new();
    for i in [a, b] {
        acts.push(Act {
            name: format!("check_{i}"),
            pre: "top".into(),
            events: vec![Ev::new("ok", neg(&fail(i))), Ev::new("bad", fail(i))],
            groups: vec![
                ("self", vec![(0, 0), (1, 1)]),
                ("other", watcher(2)[..4].to_vec()),
            ],
            obs: agents
                .iter()
                .map(|x| vec![(if x == i { "self" } else { "other" }, "top".to_string())])
                .collect(),
        });
    }
    for i in [a, b] {
        acts.push(Act {
            name: format!("inform_{i}"),
            pre: kw(i, &fail(i)),
            events: vec![
                Ev::new("ok", kb(i, &neg(&fail(i)))),
                Ev::new("bad", kb(i, &fail(i))),
            ],
            groups: vec![("all", vec![(0, 0), (1, 1)])],
            obs: everyone(&agents, "all"),
        });
    }
    // Mutual knowledge of the product status, nested to depth d.
    let ok = and(&neg(&fail(a)), &neg(&fail(b)));
    let chain = |first: usize| {
        let mut f = ok.clone();
        for level in (0..p.depth).rev() {
            f = kb(&agents[(first + level) % 2], &f);
        }
        f
    };
    acts.push(public(
        "assemble".into(),
        and(&chain(0), &chain(1)),
        vec![("assembled".into(), "top".into())],
        &agents,
    ));
    let some_failure = or(&fail(a), &fail(b));
    acts.push(public(
        "restart".into(),
        or(&kb(a, &some_failure), &kb(b, &some_failure)),
        vec![
            (fail(a), BOTTOM.into()),
            (fail(b), BOTTOM.into()),
            ("restarted".into(), "top".into()),
        ],
        &agents,
    ));
    for act in &acts {
        act.emit(doc, &agents);
    }
    doc.goal("assembled");
}

fn coin_in_the_box(p: &DomainParams, doc: &mut Doc) {
    let agents = agent_names(3);
    let att = |i: &str| format!("att_{i}");
    let mut atoms = vec!["opened".to_string(), "heads".to_string()];
    atoms.extend(agents.iter().map(|i| att(i)));
    let attentive = vec![att(&agents[0]), att(&agents[1])];
    let mut heads = vec!["heads".to_string()];
    heads.extend(attentive.iter().cloned());
    let worlds = vec![("wh".to_string(), heads), ("wt".to_string(), attentive)];
    doc.initial(&agents, &atoms, &worlds, &[0], |_, _, _| true);

    let attentive_full = |k: &String| vec![("full", att(k)), ("oblivious", "top".to_string())];
    let mut acts = Vec::new();
    for i in &agents {
        acts.push(Act {
            name: format!("open_{i}"),
            pre: and(&att(i), &neg("opened")),
            events: vec![Ev::new("ev", "top").post("opened", "top"), Ev::skip()],
            groups: vec![("full", observer(1)), ("oblivious", oblivious(1))],
            obs: agents.iter().map(attentive_full).collect(),
        });
    }
    for i in &agents {
        acts.push(Act {
            name: format!("peek_{i}"),
            pre: and(&att(i), "opened"),
            events: vec![
                Ev::new("see_h", "heads"),
                Ev::new("see_t", neg("heads")),
                Ev::skip(),
            ],
            groups: vec![
                ("seer", observer(2)),
                ("watcher", watcher(2)),
                ("oblivious", oblivious(2)),
            ],
            obs: agents
                .iter()
                .map(|k| {
                    if k == i {
                        vec![("seer", "top".to_string())]
                    } else {
                        vec![("watcher", att(k)), ("oblivious", "top".to_string())]
                    }
                })
                .collect(),
        });
    }
    for i in &agents {
        for j in agents.iter().filter(|j| *j != i) {
            acts.push(Act {
                name: format!("signal_{i}_{j}"),
                pre: and(&att(i), &neg(&att(j))),
                events: vec![Ev::new("ev", "top").post(&att(j), "top"), Ev::skip()],
                groups: vec![("full", observer(1)), ("oblivious", oblivious(1))],
                obs: agents
                    .iter()
                    .map(|k| {
                        if k == j {
                            vec![("full", "top".to_string())]
                        } else {
                            attentive_full(k)
                        }
                    })
                    .collect(),
            });
        }
    }
    for i in &agents {
        for j in agents.iter().filter(|j| *j != i) {
            acts.push(Act {
                name: format!("distract_{i}_{j}"),
                pre: and(&att(i), &att(j)),
                events: vec![Ev::new("ev", "top").post(&att(j), BOTTOM), Ev::skip()],
                groups: vec![("full", observer(1)), ("oblivious", oblivious(1))],
                obs: agents.iter().map(attentive_full).collect(),
            });
        }
    }
    for i in &agents {
        acts.push(Act {
            name: format!("announce_{i}"),
            pre: and(&att(i), &kw(i, "heads")),
            events: vec![
                Ev::new("say_h", kb(i, "heads")),
                Ev::new("say_t", kb(i, &neg("heads"))),
                Ev::skip(),
            ],
            groups: vec![("full", observer(2)), ("oblivious", oblivious(2))],
            obs: agents.iter().map(attentive_full).collect(),
        });
    }
    for act in &acts {
        act.emit(doc, &agents);
    }

    let (a, b, c) = (agents[0].as_str(), agents[1].as_str(), agents[2].as_str());
    // From goal 2 on, b must miss a's peek, so b has to be distracted and,
    // for the later goals, brought back.
    let secret = conj(&[kb(a, "heads"), kb(c, "heads"), neg(&kb(b, &kw(a, "heads")))]);
    let goal = match p.goal {
        0 => kb(a, "heads"),
        1 => kb(c, "heads"),
        2 => secret,
        3 => conj(&[secret, att(b)]),
        _ => conj(&[secret, att(b), kb(b, "heads")]),
    };
    doc.goal(&goal);
}

fn collaboration(p: &DomainParams, doc: &mut Doc) {
    let agents = agent_names(p.agents);
    let (k, m) = (p.rooms, p.boxes);
    let at = |i: &str, r: usize| format!("at_{i}_{r}");
    let inside = |b: usize, r: usize| format!("in_{b}_{r}");
    let told = |i: &str| format!("told_{i}");
    let mut atoms = Vec::new();
    for i in &agents {
        atoms.extend((1..=k).map(|r| at(i, r)));
        atoms.push(told(i));
    }
    for b in 0..m {
        atoms.extend((1..=k).map(|r| inside(b, r)));
    }
    // One world per placement of the boxes; agents start in room 1.
    let placements: Vec<Vec<usize>> = (0..k.pow(m as u32))
        .map(|mut code| {
            (0..m)
                .map(|_| {
                    let r = code % k + 1;
                    code /= k;
                    r
                })
                .collect()
        })
        .collect();
    let actual: Vec<usize> = (0..m).map(|b| (b + 1) % k + 1).collect();
    let worlds: Vec<(String, Vec<String>)> = placements
        .iter()
        .map(|pl| {
            let mut t: Vec<String> = agents.iter().map(|i| at(i, 1)).collect();
            t.extend(pl.iter().enumerate().map(|(b, &r)| inside(b, r)));
            (
                format!("w{}", pl.iter().map(|r| r.to_string()).collect::<String>()),
                t,
            )
        })
        .collect();
    let designated = placements
        .iter()
        .position(|pl| *pl == actual)
        .expect("actual placement");
    doc.initial(&agents, &atoms, &worlds, &[designated], |_, _, _| true);

    let mut acts = Vec::new();
    for i in &agents {
        acts.push(public(
            format!("left_{i}"),
            neg(&at(i, 1)),
            (1..=k)
                .map(|r| {
                    (
                        at(i, r),
                        if r < k {
                            at(i, r + 1)
                        } else {
                            BOTTOM.to_string()
                        },
                    )
                })
                .collect(),
            &agents,
        ));
        acts.push(public(
            format!("right_{i}"),
            neg(&at(i, k)),
            (1..=k)
                .map(|r| {
                    (
                        at(i, r),
                        if r > 1 {
                            at(i, r - 1)
                        } else {
                            BOTTOM.to_string()
                        },
                    )
                })
                .collect(),
            &agents,
        ));
        for b in 0..m {
            for r in 1..=k {
                acts.push(Act {
                    name: format!("check_{i}_{b}_{r}"),
                    pre: at(i, r),
                    events: vec![
                        Ev::new("yes", inside(b, r)),
                        Ev::new("no", neg(&inside(b, r))),
                        Ev::skip(),
                    ],
                    groups: vec![
                        ("checker", observer(2)),
                        ("watcher", watcher(2)),
                        ("oblivious", oblivious(2)),
                    ],
                    obs: agents
                        .iter()
                        .map(|j| {
                            if j == i {
                                vec![("checker", "top".to_string())]
                            } else {
                                vec![("watcher", at(j, r)), ("oblivious", "top".to_string())]
                            }
                        })
                        .collect(),
                });
                let same_room = |j: &str| {
                    disj(
                        &(1..=k)
                            .map(|x| and(&at(i, x), &at(j, x)))
                            .collect::<Vec<_>>(),
                    )
                };
                acts.push(Act {
                    name: format!("tell_{i}_{b}_{r}"),
                    pre: kb(i, &inside(b, r)),
                    events: vec![
                        Ev::new("say", kb(i, &inside(b, r))).post(&told(i), "top"),
                        Ev::skip(),
                    ],
                    groups: vec![("hearer", observer(1)), ("oblivious", oblivious(1))],
                    obs: agents
                        .iter()
                        .map(|j| {
                            if j == i {
                                vec![("hearer", "top".to_string())]
                            } else {
                                vec![("hearer", same_room(j)), ("oblivious", "top".to_string())]
                            }
                        })
                        .collect(),
                });
            }
        }
    }
    for act in &acts {
        act.emit(doc, &agents);
    }

    let (a, b) = (agents[0].as_str(), agents[1].as_str());
    let fact = |bx: usize| inside(bx, actual[bx]);
    let knows_box = |i: &str, bx: usize| kb(i, &fact(bx));
    // b learns what a knows without a noticing that b knows.
    let unnoticed = |bx: usize| neg(&kb(a, &kw(b, &fact(bx))));
    let shared = conj(&[
        kb(b, &knows_box(a, 0)),
        kb(b, &knows_box(a, 1)),
        unnoticed(0),
    ]);
    let goal = match p.goal {
        0 => conj(&[knows_box(a, 0), knows_box(b, 0), unnoticed(0)]),
        1 => conj(&[knows_box(a, 0), kb(b, &knows_box(a, 1)), unnoticed(1)]),
        2 => shared,
        _ => conj(&[shared, at(a, 1), at(b, 1)]),
    };
    doc.goal(&goal);
}

fn grapevine(p: &DomainParams, doc: &mut Doc) {
    let n = p.agents;
    let agents = agent_names(n);
    let secret = |i: &str| format!("s_{i}");
    let at = |i: &str, r: usize| format!("at_{i}_{r}");
    let mut atoms = Vec::new();
    for i in &agents {
        atoms.push(secret(i));
        atoms.push(at(i, 1));
        atoms.push(at(i, 2));
    }
    // World `w{bits}`: agent i's secret is true unless bit i is set.
    let worlds: Vec<(String, Vec<String>)> = (0..1usize << n)
        .map(|w| {
            let mut t = Vec::new();
            for (i, a) in agents.iter().enumerate() {
                if w >> i & 1 == 0 {
                    t.push(secret(a));
                }
                t.push(at(a, 1));
            }
            (format!("w{w}"), t)
        })
        .collect();
    doc.initial(&agents, &atoms, &worlds, &[0], |i, x, y| {
        (x ^ y) >> i & 1 == 0
    });

    let mut acts = Vec::new();
    for i in &agents {
        acts.push(public(
            format!("left_{i}"),
            at(i, 2),
            vec![(at(i, 1), "top".into()), (at(i, 2), BOTTOM.into())],
            &agents,
        ));
        acts.push(public(
            format!("right_{i}"),
            at(i, 1),
            vec![(at(i, 1), BOTTOM.into()), (at(i, 2), "top".into())],
            &agents,
        ));
    }
    for i in &agents {
        for s in &agents {
            for r in 1..=2 {
                acts.push(Act {
                    name: format!("share_{i}_{s}_{r}"),
                    pre: and(&at(i, r), &kw(i, &secret(s))),
                    events: vec![
                        Ev::new("say_t", kb(i, &secret(s))),
                        Ev::new("say_f", kb(i, &neg(&secret(s)))),
                        Ev::skip(),
                    ],
                    groups: vec![("listener", observer(2)), ("oblivious", oblivious(2))],
                    obs: agents
                        .iter()
                        .map(|j| vec![("listener", at(j, r)), ("oblivious", "top".to_string())])
                        .collect(),
                });
            }
        }
    }
    for act in &acts {
        act.emit(doc, &agents);
    }

    let ign = |i: &str, s: &str| neg(&kw(i, &secret(s)));
    let (a, b) = (agents[0].as_str(), agents[1].as_str());
    let goal = match p.goal {
        0 => and(&kb(b, &secret(a)), &kb(a, &secret(b))),
        1 if n >= 3 => conj(&[
            kb(b, &secret(a)),
            ign(agents[2].as_str(), a),
            at(agents[2].as_str(), 1),
        ]),
        1 => conj(&[kb(b, &secret(a)), ign(a, b), at(b, 1)]),
        2 => {
            let c = agents[2].as_str();
            conj(&[kb(b, &secret(a)), ign(c, a), kb(c, &secret(b)), ign(a, b)])
        }
        _ => {
            let c = agents[2].as_str();
            conj(&[
                kb(b, &secret(a)),
                ign(c, a),
                kb(c, &secret(b)),
                ign(a, b),
                kb(a, &secret(c)),
            ])
        }
    };
    doc.goal(&goal);
}

/// Listener `j >= 1` hears in room `r` when bit `(j - 1) mod b` of `r - 1`
/// is set, with `b` the number of bits needed to number the rooms.
fn listens(j: usize, r: usize, rooms: usize) -> bool {
    let bits = (usize::BITS - (rooms - 1).leading_zeros()).max(1) as usize;
    (r - 1) >> ((j - 1) % bits) & 1 == 1
}

fn selective(p: &DomainParams, doc: &mut Doc) {
    let agents = agent_names(p.agents);
    let k = p.rooms;
    let speaker = agents[0].as_str();
    let at = |r: usize| format!("at_{r}");
    let mut atoms = vec!["q".to_string()];
    atoms.extend((1..=k).map(at));
    let worlds = vec![
        ("wq".to_string(), vec!["q".to_string(), at(1)]),
        ("wn".to_string(), vec![at(1)]),
    ];
    doc.initial(&agents, &atoms, &worlds, &[0], |i, x, y| i != 0 || x == y);

    let mut acts = vec![
        public(
            "left".into(),
            neg(&at(1)),
            (1..=k)
                .map(|r| (at(r), if r < k { at(r + 1) } else { BOTTOM.into() }))
                .collect(),
            &agents,
        ),
        public(
            "right".into(),
            neg(&at(k)),
            (1..=k)
                .map(|r| (at(r), if r > 1 { at(r - 1) } else { BOTTOM.into() }))
                .collect(),
            &agents,
        ),
    ];
    for r in 1..=k {
        acts.push(Act {
            name: format!("share_{r}"),
            pre: and(&at(r), &kb(speaker, "q")),
            events: vec![Ev::new("say", kb(speaker, "q")), Ev::skip()],
            groups: vec![("listener", observer(1)), ("oblivious", oblivious(1))],
            obs: agents
                .iter()
                .enumerate()
                .map(|(j, _)| {
                    let g = if j == 0 || listens(j, r, k) {
                        "listener"
                    } else {
                        "oblivious"
                    };
                    vec![(g, "top".to_string())]
                })
                .collect(),
        });
    }
    let mut shout = public("shout".into(), kb(speaker, "q"), Vec::new(), &agents);
    shout.events[0].pre = kb(speaker, "q");
    acts.push(shout);
    for act in &acts {
        act.emit(doc, &agents);
    }

    // Listener sets are fixed, so goals are phrased over the first two
    // listeners and whoever hears in the rooms they need.
    let b = agents[1].as_str();
    let c = agents.get(2).map(String::as_str).unwrap_or(b);
    let ign = |i: &str| neg(&kw(i, "q"));
    let goal = match p.goal {
        0 => and(&kb(c, "q"), &ign(b)),
        1 => conj(&[kb(b, "q"), ign(c), at(k)]),
        2 => conj(&[kb(b, "q"), kb(c, "q"), neg(&kb(b, &kb(c, "q"))), at(k)]),
        _ => conj(&[
            kb(b, "q"),
            kb(c, "q"),
            neg(&kb(b, &kb(c, "q"))),
            neg(&kb(c, &kb(b, "q"))),
            at(1),
        ]),
    };
    doc.goal(&goal);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(p: DomainParams) -> (usize, usize, usize, usize) {
        let t = build(&p).unwrap();
        (
            t.vocab.num_agents(),
            t.vocab.num_atoms(),
            t.initial.model().num_worlds(),
            t.actions.len(),
        )
    }

    #[test]
    fn structural_counts() {
        assert_eq!(sizes(DomainParams::new(Domain::Al)), (2, 4, 4, 6));
        assert_eq!(sizes(DomainParams::new(Domain::Cb)), (3, 5, 2, 21));
        let cc = DomainParams::new(Domain::Cc);
        assert_eq!(sizes(cc), (2, 10, 4, 20));
        assert_eq!(sizes(cc.agents(3)), (3, 13, 4, 30));
        assert_eq!(sizes(cc.agents(3).boxes(3)), (3, 15, 8, 42));
        assert_eq!(sizes(cc.rooms(3)), (2, 14, 9, 28));
        let gr = DomainParams::new(Domain::Gr);
        assert_eq!(sizes(gr), (3, 9, 8, 24));
        assert_eq!(sizes(gr.agents(4)), (4, 12, 16, 40));
        assert_eq!(sizes(gr.agents(5)), (5, 15, 32, 60));
        let sc = DomainParams::new(Domain::Sc);
        assert_eq!(sizes(sc), (3, 5, 2, 7));
        assert_eq!(sizes(sc.agents(7)), (7, 5, 2, 7));
        assert_eq!(sizes(sc.agents(8).rooms(10)), (8, 11, 2, 13));
        assert_eq!(sizes(sc.agents(9).rooms(11)), (9, 12, 2, 14));
    }

    #[test]
    fn generation_is_deterministic() {
        for d in Domain::ALL {
            let p = DomainParams::new(d);
            assert_eq!(generate(&p).unwrap(), generate(&p).unwrap());
        }
    }

    #[test]
    fn every_goal_generates() {
        for d in Domain::ALL {
            for g in 0..goal_count(d) {
                build(&DomainParams::new(d).goal(g)).unwrap();
            }
        }
    }

    #[test]
    fn out_of_range() {
        assert!(generate(&DomainParams::new(Domain::Cb).agents(2)).is_err());
        assert!(generate(&DomainParams::new(Domain::Gr).rooms(3)).is_err());
        assert!(generate(&DomainParams::new(Domain::Al).depth(1)).is_err());
        assert!(generate(&DomainParams::new(Domain::Sc).goal(9)).is_err());
    }

    #[test]
    fn depth_parameter_reaches_conditions() {
        let t = build(&DomainParams::new(Domain::Al).depth(5)).unwrap();
        let assemble = &t.actions[t.action_index("assemble").unwrap()];
        assert_eq!(assemble.global_pre.modal_depth(), 5);
    }
}
