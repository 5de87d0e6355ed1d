use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use super::{Arc, Label, StateId, Wfst, EPSILON, PHI};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One accepting path.
#[derive(Clone, Debug, PartialEq)]
pub struct Path<F> {
    /// Visited states, start first.
    pub states: Vec<StateId>,
    /// Arcs taken, in order.
    pub arcs: Vec<Arc<F>>,
    /// Non-epsilon input labels.
    pub input: Vec<Label>,
    /// Non-epsilon output labels.
    pub output: Vec<Label>,
    /// Sum of arc weights plus the final weight.
    pub weight: F,
}

struct Entry<F>(F, StateId);

impl<F: Scalar> PartialEq for Entry<F> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<F: Scalar> Eq for Entry<F> {}
impl<F: Scalar> PartialOrd for Entry<F> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<F: Scalar> Ord for Entry<F> {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on weight
        o.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then(o.1.cmp(&self.1))
    }
}

/// Cost of the cheapest completion from every state (infinity if none).
fn distances_to_final<F: Scalar>(m: &Wfst<F>) -> Vec<F> {
    let n = m.num_states();
    let mut rev: Vec<Vec<(StateId, F)>> = vec![Vec::new(); n];
    for s in m.states() {
        for a in m.arcs(s) {
            rev[a.next as usize].push((s, a.weight));
        }
    }
    let mut dist: Vec<F> = m.states().map(|s| m.final_weight(s)).collect();
    let mut heap: BinaryHeap<Entry<F>> =
        m.states().filter(|&s| m.is_final(s)).map(|s| Entry(dist[s as usize], s)).collect();
    let mut done = vec![false; n];
    while let Some(Entry(d, s)) = heap.pop() {
        if done[s as usize] || d > dist[s as usize] {
            continue;
        }
        done[s as usize] = true;
        for &(p, w) in &rev[s as usize] {
            let cand = w + d;
            if cand < dist[p as usize] {
                dist[p as usize] = cand;
                heap.push(Entry(cand, p));
            }
        }
    }
    dist
}

/// The cheapest accepting path. Among paths whose cost ties the optimum (up
/// to rounding), the one with the lexicographically smallest output label
/// sequence wins, so results do not depend on arc order.
///
/// Weights must be non-negative. `PHI` arcs are treated as epsilon arcs.
pub fn shortest_path<F: Scalar>(m: &Wfst<F>) -> Result<Path<F>> {
    let start = m.start().ok_or(Error::NoPath)?;
    if m.states().any(|s| m.arcs(s).iter().any(|a| a.weight < F::zero() || a.weight.is_nan())) {
        return Err(Error::InvalidArgument("shortest path needs non-negative arc weights".into()));
    }
    let dist = distances_to_final(m);
    if dist[start as usize] >= F::infinity() {
        return Err(Error::NoPath);
    }
    let tol = |d: F| F::epsilon() * F::of(64.0) * d.abs().max(F::one());
    let optimal = |s: StateId, a: &Arc<F>| {
        let via = a.weight + dist[a.next as usize];
        via < F::infinity() && via <= dist[s as usize] + tol(dist[s as usize])
    };
    let stops = |s: StateId| m.is_final(s) && m.final_weight(s) <= dist[s as usize] + tol(dist[s as usize]);

    // Walk the optimal subgraph one output symbol at a time, keeping every
    // state reachable with the smallest output prefix so far.
    let mut parent: HashMap<StateId, (StateId, usize)> = HashMap::new();
    let mut seen: BTreeSet<StateId> = BTreeSet::from([start]);
    let mut frontier: Vec<StateId> = vec![start];
    let end = loop {
        let mut closure = frontier.clone();
        let mut i = 0;
        while i < closure.len() {
            let s = closure[i];
            for (k, a) in m.arcs(s).iter().enumerate() {
                let silent = a.olabel == EPSILON || a.olabel == PHI;
                if silent && optimal(s, a) && seen.insert(a.next) {
                    parent.insert(a.next, (s, k));
                    closure.push(a.next);
                }
            }
            i += 1;
        }
        if let Some(&s) = closure.iter().filter(|&&s| stops(s)).min() {
            break s;
        }
        let mut best: Option<Label> = None;
        for &s in &closure {
            for a in m.arcs(s) {
                if a.olabel != EPSILON && a.olabel != PHI && optimal(s, a) && best.is_none_or(|b| a.olabel < b) {
                    best = Some(a.olabel);
                }
            }
        }
        let Some(label) = best else {
            // only reachable through zero-cost output cycles already visited
            return Err(Error::NoPath);
        };
        let mut next = Vec::new();
        for &s in &closure {
            for (k, a) in m.arcs(s).iter().enumerate() {
                if a.olabel == label && optimal(s, a) && seen.insert(a.next) {
                    parent.insert(a.next, (s, k));
                    next.push(a.next);
                }
            }
        }
        if next.is_empty() {
            return Err(Error::NoPath);
        }
        frontier = next;
    };

    let mut states = vec![end];
    let mut arcs = Vec::new();
    let mut cur = end;
    while let Some(&(p, k)) = parent.get(&cur) {
        arcs.push(m.arcs(p)[k]);
        states.push(p);
        cur = p;
    }
    states.reverse();
    arcs.reverse();
    let weight = arcs.iter().fold(F::zero(), |acc, a| acc + a.weight) + m.final_weight(end);
    let visible = |l: Label| l != EPSILON && l != PHI;
    Ok(Path {
        input: arcs.iter().map(|a| a.ilabel).filter(|&l| visible(l)).collect(),
        output: arcs.iter().map(|a| a.olabel).filter(|&l| visible(l)).collect(),
        states,
        arcs,
        weight,
    })
}
