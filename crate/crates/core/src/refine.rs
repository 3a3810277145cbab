//! Coarsest bisimulation partitions over finite multi-agent graphs, and the
//! canonical encodings built on top of them.

use std::collections::BTreeMap;

/// Finite graph with one successor relation per agent and an ordered node label.
#[derive(Clone, Debug)]
pub struct LabeledGraph<L> {
    pub labels: Vec<L>,
    /// `succ[agent][node]`, sorted and deduplicated.
    pub succ: Vec<Vec<Vec<u32>>>,
}

impl<L: Ord + Clone> LabeledGraph<L> {
    pub fn new(num_agents: usize) -> Self {
        LabeledGraph {
            labels: Vec::new(),
            succ: vec![Vec::new(); num_agents],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_agents(&self) -> usize {
        self.succ.len()
    }

    pub fn push(&mut self, label: L, successors: Vec<Vec<u32>>) -> u32 {
        debug_assert_eq!(successors.len(), self.num_agents());
        let id = self.labels.len() as u32;
        self.labels.push(label);
        for (agent, mut s) in successors.into_iter().enumerate() {
            s.sort_unstable();
            s.dedup();
            self.succ[agent].push(s);
        }
        id
    }

    /// Nodes reachable from `roots` (inclusive), in ascending order.
    pub fn reachable(&self, roots: &[u32]) -> Vec<u32> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<u32> = Vec::new();
        for &r in roots {
            if !seen[r as usize] {
                seen[r as usize] = true;
                stack.push(r);
            }
        }
        while let Some(n) = stack.pop() {
            for agent in &self.succ {
                for &m in &agent[n as usize] {
                    if !seen[m as usize] {
                        seen[m as usize] = true;
                        stack.push(m);
                    }
                }
            }
        }
        (0..self.len() as u32)
            .filter(|&n| seen[n as usize])
            .collect()
    }
}

/// Result of partition refinement: `block[node]` and the number of blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub block: Vec<u32>,
    pub count: usize,
}

impl Partition {
    pub fn same_block(&self, a: u32, b: u32) -> bool {
        self.block[a as usize] == self.block[b as usize]
    }
}

/// Kanellakis–Smolka refinement. Blocks start out grouped by label in
/// ascending label order; splitters are visited in ascending block index and
/// passes repeat until the partition is stable.
pub fn coarsest_partition<L: Ord + Clone>(graph: &LabeledGraph<L>) -> Partition {
    let n = graph.len();
    let mut ranks: Vec<&L> = graph.labels.iter().collect();
    ranks.sort();
    ranks.dedup();
    let mut block: Vec<u32> = graph
        .labels
        .iter()
        .map(|l| ranks.binary_search(&l).unwrap_or_default() as u32)
        .collect();
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); ranks.len()];
    for v in 0..n {
        members[block[v] as usize].push(v as u32);
    }

    let pred: Vec<Vec<Vec<u32>>> = graph
        .succ
        .iter()
        .map(|succ| {
            let mut p = vec![Vec::new(); n];
            for (v, out) in succ.iter().enumerate() {
                for &w in out {
                    p[w as usize].push(v as u32);
                }
            }
            p
        })
        .collect();

    let mut mark = vec![0u32; n];
    let mut stamp = 0u32;
    loop {
        let mut changed = false;
        let mut splitter = 0;
        while splitter < members.len() {
            for agent_pred in &pred {
                stamp += 1;
                let mut touched: Vec<u32> = Vec::new();
                for &w in &members[splitter] {
                    for &v in &agent_pred[w as usize] {
                        if mark[v as usize] != stamp {
                            mark[v as usize] = stamp;
                            let b = block[v as usize];
                            touched.push(b);
                        }
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                for b in touched {
                    let (inside, outside): (Vec<u32>, Vec<u32>) = members[b as usize]
                        .iter()
                        .partition(|&&v| mark[v as usize] == stamp);
                    if outside.is_empty() {
                        continue;
                    }
                    let fresh = members.len() as u32;
                    for &v in &outside {
                        block[v as usize] = fresh;
                    }
                    members[b as usize] = inside;
                    members.push(outside);
                    changed = true;
                }
            }
            splitter += 1;
        }
        if !changed {
            break;
        }
    }
    Partition {
        block,
        count: members.len(),
    }
}

/// Bisimulation quotient: one node per block, labelled by the block's label.
pub fn quotient<L: Ord + Clone>(graph: &LabeledGraph<L>, partition: &Partition) -> LabeledGraph<L> {
    let mut rep: Vec<Option<usize>> = vec![None; partition.count];
    for v in 0..graph.len() {
        let b = partition.block[v] as usize;
        if rep[b].is_none() {
            rep[b] = Some(v);
        }
    }
    let mut out = LabeledGraph::new(graph.num_agents());
    for r in rep.into_iter().flatten() {
        let succ = graph
            .succ
            .iter()
            .map(|s| s[r].iter().map(|&w| partition.block[w as usize]).collect())
            .collect();
        out.push(graph.labels[r].clone(), succ);
    }
    out
}

/// Isomorphism-invariant colouring: ranks of iterated signatures
/// `(colour, successor colours per agent)`, seeded by ascending label order.
/// On a bisimulation-minimal graph every node ends with a distinct colour.
pub fn canonical_colours<L: Ord + Clone>(graph: &LabeledGraph<L>) -> Vec<u32> {
    let mut ranks: Vec<&L> = graph.labels.iter().collect();
    ranks.sort();
    ranks.dedup();
    let mut colour: Vec<u32> = graph
        .labels
        .iter()
        .map(|l| ranks.binary_search(&l).unwrap_or_default() as u32)
        .collect();
    let mut classes = ranks.len();
    loop {
        let signatures: Vec<(u32, Vec<Vec<u32>>)> = (0..graph.len())
            .map(|v| {
                let succ = graph
                    .succ
                    .iter()
                    .map(|s| {
                        let mut c: Vec<u32> = s[v].iter().map(|&w| colour[w as usize]).collect();
                        c.sort_unstable();
                        c.dedup();
                        c
                    })
                    .collect();
                (colour[v], succ)
            })
            .collect();
        let mut table: BTreeMap<&(u32, Vec<Vec<u32>>), u32> = BTreeMap::new();
        for s in &signatures {
            table.insert(s, 0);
        }
        for (i, slot) in table.values_mut().enumerate() {
            *slot = i as u32;
        }
        let next: Vec<u32> = signatures.iter().map(|s| table[s]).collect();
        let next_classes = table.len();
        colour = next;
        if next_classes == classes {
            break;
        }
        classes = next_classes;
    }
    colour
}

/// Canonical byte encoding of the pointed graph `(graph, roots)` up to
/// bisimilarity: equal encodings exactly when the pointed graphs are
/// bisimilar (restricted to nodes reachable from the roots).
pub fn canonical_encoding<L: Ord + Clone>(
    graph: &LabeledGraph<L>,
    roots: &[u32],
    mut encode_label: impl FnMut(&L, &mut Vec<u8>),
) -> Vec<u8> {
    let reach = graph.reachable(roots);
    let mut local = vec![u32::MAX; graph.len()];
    for (i, &v) in reach.iter().enumerate() {
        local[v as usize] = i as u32;
    }
    let mut sub = LabeledGraph::new(graph.num_agents());
    for &v in &reach {
        let succ = graph
            .succ
            .iter()
            .map(|s| s[v as usize].iter().map(|&w| local[w as usize]).collect())
            .collect();
        sub.push(graph.labels[v as usize].clone(), succ);
    }
    let partition = coarsest_partition(&sub);
    let q = quotient(&sub, &partition);
    let colour = canonical_colours(&q);

    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by_key(|&b| colour[b]);
    let mut out = Vec::new();
    out.extend_from_slice(&(q.len() as u32).to_le_bytes());
    out.extend_from_slice(&(q.num_agents() as u32).to_le_bytes());
    for &b in &order {
        encode_label(&q.labels[b], &mut out);
        for s in &q.succ {
            let mut c: Vec<u32> = s[b].iter().map(|&w| colour[w as usize]).collect();
            c.sort_unstable();
            out.extend_from_slice(&(c.len() as u32).to_le_bytes());
            for x in c {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    let mut designated: Vec<u32> = roots
        .iter()
        .map(|&r| colour[partition.block[local[r as usize] as usize] as usize])
        .collect();
    designated.sort_unstable();
    designated.dedup();
    out.extend_from_slice(&(designated.len() as u32).to_le_bytes());
    for d in designated {
        out.extend_from_slice(&d.to_le_bytes());
    }
    out
}
