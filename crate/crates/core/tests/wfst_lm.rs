use numseg_core::charlm::{lm_to_acceptor, lm_train, read_arpa, write_arpa, CharNgramLm};
use numseg_core::ciphergen::{generate_key, KeySpec};
use numseg_core::wfst::{build_segmentation_fst, compose, shortest_path, Arc, Label, Wfst, EPSILON};
use numseg_core::{CipherKey, Error};
use proptest::prelude::*;

/// Random acyclic transducer: arcs only go to higher-numbered states.
fn machine() -> impl Strategy<Value = Wfst<f64>> {
    (2u32..6, prop::collection::vec((0u32..6, 0u32..6, 0u32..3, 0u32..3, 0u32..8), 0..12), prop::collection::vec(0u32..6, 1..3))
        .prop_map(|(n, arcs, finals)| {
            let mut m = Wfst::new();
            for _ in 0..n {
                m.add_state();
            }
            m.set_start(0);
            for (a, b, i, o, w) in arcs {
                let (a, b) = (a % n, b % n);
                if a < b {
                    m.add_arc(a, Arc::new(i, o, w as f64 * 0.5, b));
                }
            }
            for f in finals {
                m.set_final(f % n, f as f64 * 0.25);
            }
            m
        })
}

/// (input without epsilons, output without epsilons, weight) of every accepting path.
fn paths(m: &Wfst<f64>) -> Vec<(Vec<Label>, Vec<Label>, f64)> {
    fn go(m: &Wfst<f64>, s: u32, i: Vec<Label>, o: Vec<Label>, w: f64, out: &mut Vec<(Vec<Label>, Vec<Label>, f64)>) {
        if m.is_final(s) {
            out.push((i.clone(), o.clone(), w + m.final_weight(s)));
        }
        for a in m.arcs(s) {
            let mut i2 = i.clone();
            let mut o2 = o.clone();
            if a.ilabel != EPSILON {
                i2.push(a.ilabel);
            }
            if a.olabel != EPSILON {
                o2.push(a.olabel);
            }
            go(m, a.next, i2, o2, w + a.weight, out);
        }
    }
    let mut out = Vec::new();
    if let Some(s) = m.start() {
        go(m, s, Vec::new(), Vec::new(), 0.0, &mut out);
    }
    out
}

/// Number of ways to split `flat` into key elements.
fn readings(flat: &str, key: &CipherKey) -> u128 {
    let mut ways = vec![0u128; flat.len() + 1];
    ways[0] = 1;
    for end in 1..=flat.len() {
        for e in key.entries() {
            let l = e.element.len();
            if l <= end && flat[end - l..end] == e.element {
                ways[end] += ways[end - l];
            }
        }
    }
    ways[flat.len()]
}

fn small_lm(lines: &[String], order: usize) -> CharNgramLm<f64> {
    lm_train(lines, order).unwrap()
}

fn acceptor_weight(lm: &CharNgramLm<f64>, text: &str) -> f64 {
    let acc = lm_to_acceptor(lm);
    let labels: Vec<Label> = text.chars().map(|c| acc.labels.label(c)).collect();
    shortest_path(&compose(&Wfst::linear_acceptor(&labels), &acc.fst)).unwrap().weight
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn composition_matches_path_pairs(a in machine(), b in machine()) {
        let pa = paths(&a);
        let pb = paths(&b);
        let mut pairs = 0u128;
        let mut best: Option<f64> = None;
        for (_, ao, aw) in &pa {
            for (bi, _, bw) in &pb {
                if ao == bi {
                    pairs += 1;
                    let w = aw + bw;
                    if best.is_none_or(|x| w < x) {
                        best = Some(w);
                    }
                }
            }
        }
        let c = compose(&a, &b);
        prop_assert_eq!(c.count_paths(), Some(pairs));
        match (best, shortest_path(&c)) {
            (None, Err(Error::NoPath)) => {}
            (Some(w), Ok(p)) => {
                prop_assert!((p.weight - w).abs() < 1e-9);
                let inp: Vec<Label> = p.input.iter().copied().filter(|&l| l != EPSILON).collect();
                let out: Vec<Label> = p.output.iter().copied().filter(|&l| l != EPSILON).collect();
                let achievable = pa.iter().any(|(ai, ao, aw)| {
                    *ai == inp && pb.iter().any(|(bi, bo, bw)| bi == ao && *bo == out && (aw + bw - w).abs() < 1e-9)
                });
                prop_assert!(achievable);
            }
            (x, y) => prop_assert!(false, "{:?} vs {:?}", x, y.map(|p| p.weight)),
        }
    }

    #[test]
    fn lattice_has_one_path_per_reading(seed in any::<u64>(), text in "[0-9]{1,24}") {
        let key = generate_key(&KeySpec::monoalphabetic(seed)).unwrap();
        let n = readings(&text, &key);
        match build_segmentation_fst::<f64>(&text, &key) {
            Ok(l) => {
                prop_assert!(n > 0);
                prop_assert_eq!(l.fst.count_paths(), Some(n));
            }
            Err(Error::UnsegmentablePosition { position, .. }) => {
                prop_assert_eq!(n, 0);
                prop_assert!(position < text.len());
            }
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn lm_normalizes_and_agrees_with_acceptor(
        lines in prop::collection::vec("[abc ]{1,20}", 1..6),
        order in 1usize..6,
        probes in prop::collection::vec("[abcdz ]{0,12}", 1..8),
    ) {
        prop_assume!(lines.iter().any(|l| !l.is_empty()));
        let lm = small_lm(&lines, order);
        for (_, mass) in lm.history_masses() {
            prop_assert!((mass - 1.0).abs() < 1e-6);
        }
        for p in &probes {
            let s = lm.score(p);
            prop_assert!(s.is_finite() && s <= 0.0);
            prop_assert!((acceptor_weight(&lm, p) + s).abs() < 1e-6);
        }
        let back: CharNgramLm<f64> = read_arpa(&write_arpa(&lm)).unwrap();
        for p in &probes {
            prop_assert!((back.score(p) - lm.score(p)).abs() < 1e-6);
        }
    }
}

#[test]
fn unseen_history_backs_off() {
    let lines = vec!["abab".to_string(), "bba".to_string()];
    let tri = small_lm(&lines, 3);
    let bi = small_lm(&lines, 2);
    // "aa" never occurs, so the trigram falls back to the bigram estimate
    assert!((tri.log_prob("baa", 'b') - bi.log_prob("a", 'b')).abs() < 1e-12);
    let lm = small_lm(&["aaaa".to_string()], 2);
    assert!(lm.log_prob("a", 'a').exp() > 0.5);
}

#[test]
fn acceptor_size_is_bounded_by_histories() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/alice29.txt")).unwrap();
    let lines: Vec<String> = numseg_core::corpus::clean_lines(&text).into_iter().take(300).collect();
    for order in 1..=5 {
        let lm = small_lm(&lines, order);
        assert!(lm_to_acceptor(&lm).fst.num_states() <= lm.num_histories() + 1);
    }
    assert_eq!(lm_to_acceptor(&small_lm(&lines, 1)).fst.num_states(), 1);
}

#[test]
fn held_out_text_has_finite_perplexity() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/alice29.txt")).unwrap();
    let lines: Vec<String> = numseg_core::corpus::clean_lines(&text).iter().map(|l| l.replace(' ', "")).collect();
    let (train, test) = lines.split_at(lines.len() * 9 / 10);
    let lm = small_lm(train, 5);
    let mut total = 0.0;
    let mut chars = 0;
    for l in test {
        total += lm.score(l);
        chars += l.chars().count();
    }
    let perplexity = (-total / chars as f64).exp();
    assert!(perplexity.is_finite() && perplexity < 10.0, "{perplexity}");
    assert!(lm.score("and") > lm.score("aad"));
    assert!(lm.score("and") > lm.score("nad"));
}
