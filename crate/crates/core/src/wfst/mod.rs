//! A small weighted finite-state transducer engine over the tropical
//! semiring: weights are costs (negative log-probabilities), path weight is
//! the sum of arc weights plus the final weight, and the best path is the
//! cheapest one.

mod compose;
mod lattice;
mod shortest_path;

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

pub(crate) use compose::{compose_from, match_with_failure};
pub use compose::{compose, compose_with_origins};
pub use lattice::{build_key_fst, build_segmentation_fst, SegmentationLattice};
pub use shortest_path::{shortest_path, Path};

use crate::scalar::Scalar;

pub type Label = u32;
pub type StateId = u32;

/// The empty label.
pub const EPSILON: Label = 0;
/// Failure label: on the right-hand side of a composition, a `PHI` arc is
/// followed only when the state has no arc for the requested label. Outside
/// composition it behaves like an epsilon arc.
pub const PHI: Label = Label::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc<F> {
    pub ilabel: Label,
    pub olabel: Label,
    pub weight: F,
    pub next: StateId,
}

impl<F> Arc<F> {
    pub fn new(ilabel: Label, olabel: Label, weight: F, next: StateId) -> Self {
        Self { ilabel, olabel, weight, next }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct StateData<F> {
    arcs: Vec<Arc<F>>,
    final_weight: F,
}

/// Mutable-while-building, then shared read-only.
#[derive(Clone, Debug, PartialEq)]
pub struct Wfst<F> {
    states: Vec<StateData<F>>,
    start: Option<StateId>,
    ilabel_sorted: bool,
}

impl<F: Scalar> Default for Wfst<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> Wfst<F> {
    pub fn new() -> Self {
        Self { states: Vec::new(), start: None, ilabel_sorted: true }
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(StateData { arcs: Vec::new(), final_weight: F::infinity() });
        (self.states.len() - 1) as StateId
    }

    pub fn set_start(&mut self, s: StateId) {
        assert!((s as usize) < self.states.len(), "start state out of range");
        self.start = Some(s);
    }

    pub fn set_final(&mut self, s: StateId, weight: F) {
        self.states[s as usize].final_weight = weight;
    }

    pub fn add_arc(&mut self, from: StateId, arc: Arc<F>) {
        assert!((arc.next as usize) < self.states.len(), "arc target out of range");
        let arcs = &mut self.states[from as usize].arcs;
        if let Some(last) = arcs.last() {
            if last.ilabel > arc.ilabel {
                self.ilabel_sorted = false;
            }
        }
        arcs.push(arc);
    }

    pub fn start(&self) -> Option<StateId> {
        self.start
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn arcs(&self, s: StateId) -> &[Arc<F>] {
        &self.states[s as usize].arcs
    }

    pub fn final_weight(&self, s: StateId) -> F {
        self.states[s as usize].final_weight
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.final_weight(s) < F::infinity()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.states.len() as StateId
    }

    /// Sort every state's arcs by input label (stable), enabling binary-search matching.
    pub fn arc_sort_input(&mut self) {
        for s in &mut self.states {
            s.arcs.sort_by_key(|a| a.ilabel);
        }
        self.ilabel_sorted = true;
    }

    pub fn is_ilabel_sorted(&self) -> bool {
        self.ilabel_sorted
    }

    /// Arcs of `s` with input label `label`. Requires an input-sorted machine.
    pub fn arcs_with_ilabel(&self, s: StateId, label: Label) -> &[Arc<F>] {
        assert!(self.ilabel_sorted, "arcs_with_ilabel needs arc_sort_input first");
        let arcs = self.arcs(s);
        let lo = arcs.partition_point(|a| a.ilabel < label);
        let hi = lo + arcs[lo..].partition_point(|a| a.ilabel == label);
        &arcs[lo..hi]
    }

    /// A machine accepting exactly `labels` (identity transducer), weight 0.
    pub fn linear_acceptor(labels: &[Label]) -> Self {
        let mut m = Self::new();
        let mut s = m.add_state();
        m.set_start(s);
        for &l in labels {
            let n = m.add_state();
            m.add_arc(s, Arc::new(l, l, F::zero(), n));
            s = n;
        }
        m.set_final(s, F::zero());
        m
    }

    /// Keep only states that lie on some path from the start to a final state.
    pub fn connect(&self) -> Self {
        let Some(start) = self.start else { return Self::new() };
        let n = self.states.len();
        let mut access = vec![false; n];
        let mut queue = VecDeque::from([start]);
        access[start as usize] = true;
        while let Some(s) = queue.pop_front() {
            for a in self.arcs(s) {
                if !access[a.next as usize] {
                    access[a.next as usize] = true;
                    queue.push_back(a.next);
                }
            }
        }
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for s in self.states() {
            for a in self.arcs(s) {
                rev[a.next as usize].push(s);
            }
        }
        let mut coaccess = vec![false; n];
        let mut queue: VecDeque<StateId> = self.states().filter(|&s| self.is_final(s)).collect();
        for &s in &queue {
            coaccess[s as usize] = true;
        }
        while let Some(s) = queue.pop_front() {
            for &p in &rev[s as usize] {
                if !coaccess[p as usize] {
                    coaccess[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }
        let keep: Vec<bool> = (0..n).map(|i| access[i] && coaccess[i]).collect();
        if !keep[start as usize] {
            return Self::new();
        }
        let mut map: HashMap<StateId, StateId> = HashMap::new();
        let mut out = Self::new();
        for s in self.states() {
            if keep[s as usize] {
                map.insert(s, out.add_state());
            }
        }
        for s in self.states() {
            if !keep[s as usize] {
                continue;
            }
            let ns = map[&s];
            out.set_final(ns, self.final_weight(s));
            for a in self.arcs(s) {
                if let Some(&t) = map.get(&a.next) {
                    out.add_arc(ns, Arc::new(a.ilabel, a.olabel, a.weight, t));
                }
            }
        }
        out.set_start(map[&start]);
        out.ilabel_sorted = self.ilabel_sorted;
        out
    }

    /// States in topological order, or `None` when the machine has a cycle.
    pub fn topological_order(&self) -> Option<Vec<StateId>> {
        let n = self.states.len();
        let mut indegree = vec![0usize; n];
        for s in self.states() {
            for a in self.arcs(s) {
                indegree[a.next as usize] += 1;
            }
        }
        let mut queue: VecDeque<StateId> = self.states().filter(|&s| indegree[s as usize] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for a in self.arcs(s) {
                indegree[a.next as usize] -= 1;
                if indegree[a.next as usize] == 0 {
                    queue.push_back(a.next);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Number of distinct accepting paths of an acyclic machine.
    pub fn count_paths(&self) -> Option<u128> {
        let order = self.topological_order()?;
        let Some(start) = self.start else { return Some(0) };
        let mut ways = vec![0u128; self.states.len()];
        ways[start as usize] = 1;
        let mut total = 0u128;
        for s in order {
            let w = ways[s as usize];
            if w == 0 {
                continue;
            }
            if self.is_final(s) {
                total = total.saturating_add(w);
            }
            for a in self.arcs(s) {
                ways[a.next as usize] = ways[a.next as usize].saturating_add(w);
            }
        }
        Some(total)
    }

    /// Text dump: one `src dst in out weight` line per arc, then one
    /// `state weight` line per final state.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let order: Vec<StateId> = match self.start {
            Some(s) => std::iter::once(s).chain(self.states().filter(|&t| t != s)).collect(),
            None => self.states().collect(),
        };
        for &s in &order {
            for a in self.arcs(s) {
                let _ = writeln!(out, "{s}\t{}\t{}\t{}\t{}", a.next, a.ilabel, a.olabel, a.weight);
            }
        }
        for &s in &order {
            if self.is_final(s) {
                let _ = writeln!(out, "{s}\t{}", self.final_weight(s));
            }
        }
        out
    }
}

/// Map from plaintext characters to labels, in character order, with one
/// extra label for characters outside the table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharLabels {
    chars: Vec<char>,
    index: HashMap<char, Label>,
}

impl CharLabels {
    pub fn new(chars: impl IntoIterator<Item = char>) -> Self {
        let mut chars: Vec<char> = chars.into_iter().collect();
        chars.sort_unstable();
        chars.dedup();
        let index = chars.iter().enumerate().map(|(i, &c)| (c, i as Label + 1)).collect();
        Self { chars, index }
    }

    /// Label for `c`; characters outside the table share [`CharLabels::unknown`].
    pub fn label(&self, c: char) -> Label {
        self.index.get(&c).copied().unwrap_or_else(|| self.unknown())
    }

    pub fn contains(&self, c: char) -> bool {
        self.index.contains_key(&c)
    }

    pub fn unknown(&self) -> Label {
        self.chars.len() as Label + 1
    }

    pub fn char_of(&self, label: Label) -> Option<char> {
        (label as usize).checked_sub(1).and_then(|i| self.chars.get(i).copied())
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }
}
