use std::borrow::Cow;
use std::collections::{HashMap, VecDeque};

use super::{Arc, Label, StateId, Wfst, EPSILON, PHI};
use crate::scalar::Scalar;

/// Composition `a ∘ b`: maps x to z with weight w1+w2 whenever `a` maps x to
/// y with w1 and `b` maps y to z with w2.
///
/// Epsilon moves are interleaved under a three-state filter so that each
/// alignment of epsilons is produced once. `PHI` arcs of `b` are failure
/// transitions. The result holds accessible states only.
pub fn compose<F: Scalar>(a: &Wfst<F>, b: &Wfst<F>) -> Wfst<F> {
    compose_with_origins(a, b).0
}

/// Like [`compose`], also returning the `(a state, b state)` pair behind each
/// result state.
pub fn compose_with_origins<F: Scalar>(a: &Wfst<F>, b: &Wfst<F>) -> (Wfst<F>, Vec<(StateId, StateId)>) {
    compose_from(a, b, b.start())
}

/// Composition that enters `b` at `b_start` instead of its start state.
pub(crate) fn compose_from<F: Scalar>(
    a: &Wfst<F>,
    b: &Wfst<F>,
    b_start: Option<StateId>,
) -> (Wfst<F>, Vec<(StateId, StateId)>) {
    let b: Cow<Wfst<F>> = if b.is_ilabel_sorted() {
        Cow::Borrowed(b)
    } else {
        let mut sorted = b.clone();
        sorted.arc_sort_input();
        Cow::Owned(sorted)
    };
    let b = b.as_ref();
    let out = Wfst::new();
    let origins = Vec::new();
    let (Some(sa), Some(sb)) = (a.start(), b_start) else {
        return (out, origins);
    };

    let mut st = Builder { ids: HashMap::new(), queue: VecDeque::new(), out, origins };
    let start = st.intern((sa, sb, 0));
    st.out.set_start(start);

    let b_eps_limit = b.num_states();
    while let Some(key @ (qa, qb, filter)) = st.queue.pop_front() {
        let s = st.ids[&key];
        let (fa, fb) = (a.final_weight(qa), b.final_weight(qb));
        if fa < F::infinity() && fb < F::infinity() {
            st.out.set_final(s, fa + fb);
        }
        let b_eps = b.arcs_with_ilabel(qb, EPSILON);
        for ea in a.arcs(qa) {
            if ea.olabel == EPSILON {
                // a moves alone
                if filter != 2 {
                    let t = st.intern((ea.next, qb, 1));
                    st.out.add_arc(s, Arc::new(ea.ilabel, EPSILON, ea.weight, t));
                }
                // both take an epsilon together
                if filter == 0 {
                    for eb in b_eps {
                        let t = st.intern((ea.next, eb.next, 0));
                        st.out.add_arc(s, Arc::new(ea.ilabel, eb.olabel, ea.weight + eb.weight, t));
                    }
                }
                continue;
            }
            let (matches, backoff) = match_with_failure(b, qb, ea.olabel, b_eps_limit);
            for eb in matches {
                let t = st.intern((ea.next, eb.next, 0));
                st.out.add_arc(s, Arc::new(ea.ilabel, eb.olabel, ea.weight + backoff + eb.weight, t));
            }
        }
        // b moves alone
        if filter != 1 {
            for eb in b_eps {
                let t = st.intern((qa, eb.next, 2));
                st.out.add_arc(s, Arc::new(EPSILON, eb.olabel, eb.weight, t));
            }
        }
    }
    (st.out, st.origins)
}

struct Builder<F> {
    ids: HashMap<(StateId, StateId, u8), StateId>,
    queue: VecDeque<(StateId, StateId, u8)>,
    out: Wfst<F>,
    origins: Vec<(StateId, StateId)>,
}

impl<F: Scalar> Builder<F> {
    fn intern(&mut self, key: (StateId, StateId, u8)) -> StateId {
        if let Some(&s) = self.ids.get(&key) {
            return s;
        }
        let s = self.out.add_state();
        self.origins.push((key.0, key.1));
        self.queue.push_back(key);
        self.ids.insert(key, s);
        s
    }
}

/// Arcs of `b` reading `label` from `q`, following failure arcs while none
/// exist. Returns the matching arcs and the accumulated failure weight.
pub(crate) fn match_with_failure<F: Scalar>(b: &Wfst<F>, mut q: StateId, label: Label, limit: usize) -> (&[Arc<F>], F) {
    let mut backoff = F::zero();
    for _ in 0..=limit {
        let m = b.arcs_with_ilabel(q, label);
        if !m.is_empty() {
            return (m, backoff);
        }
        match b.arcs_with_ilabel(q, PHI).first() {
            Some(phi) => {
                backoff = backoff + phi.weight;
                q = phi.next;
            }
            None => break,
        }
    }
    (&[], backoff)
}
