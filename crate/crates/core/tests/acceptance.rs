//! Acceptance criteria, run end to end on the bundled corpus.
//!
//! Runs as a plain binary so the per-criterion report is always printed.
//! Exits non-zero when any criterion fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use numseg_core::charlm::{lm_to_acceptor, lm_train};
use numseg_core::ciphergen::{derive_seed, generate_ambiguous_key, sample_cipher, EncipherOptions, KeySpec};
use numseg_core::corpus::clean_lines;
use numseg_core::decipher::decipher_with_key;
use numseg_core::harness::{run_length_study, run_mono_experiment, ExperimentConfig, ResultTable};
use numseg_core::metrics::{edit_distance, seg_er, ter};
use numseg_core::model::parse_key;
use numseg_core::segmenters::{unigram_train, ModelKind, UnigramConfig, UnigramModel};
use numseg_core::wfst::{build_segmentation_fst, compose, shortest_path, Arc, Wfst, EPSILON};
use numseg_core::{CipherText, PlainText, Segmentation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPACES: &str = "spaces";
const NO_SPACES: &str = "no-spaces";

struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn check(&mut self, ok: bool, name: &str, detail: String) {
        let line = format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((ok, line));
    }
}

fn corpus_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/alice29.txt")
}

fn corpus_text() -> String {
    std::fs::read_to_string(corpus_path()).expect("bundled corpus")
}

fn base_config() -> ExperimentConfig {
    ExperimentConfig { corpus: Some(corpus_path()), ..ExperimentConfig::default() }
}

fn pct(x: f64) -> f64 {
    100.0 * x
}

fn seg(table: &ResultTable, cond: &str, m: ModelKind) -> f64 {
    table.row(cond, 2048, m).expect("row present").mean_seg_er
}

fn mono(report: &mut Report) -> (String, String) {
    let cfg = base_config();
    let corpus = numseg_core::harness::load_corpus(&cfg).unwrap();
    let t0 = Instant::now();
    let run = run_mono_experiment(&cfg, &corpus).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let table = run.table;
    println!("{}", table.render());

    let u2 = seg(&table, SPACES, ModelKind::Unigram2);
    let f1 = table.row(SPACES, 2048, ModelKind::Unigram2).unwrap().mean_f1;
    let b2 = seg(&table, SPACES, ModelKind::Bpe2);
    let d2 = seg(&table, SPACES, ModelKind::TwoDigit);
    report.check(
        u2 <= 0.06 && f1 >= 0.72 && b2 < d2 && secs < 600.0,
        "1 mono with spaces",
        format!(
            "Unigram LM 2 SegER {:.2}% (<= 6), F1 {:.2}% (>= 72); BPE 2 {:.2}% < 2-dig {:.2}%; {secs:.1}s (< 600)",
            pct(u2),
            pct(f1),
            pct(b2),
            pct(d2)
        ),
    );

    let u2n = seg(&table, NO_SPACES, ModelKind::Unigram2);
    report.check(
        u2n <= 0.07 && (u2n - u2) <= 0.03,
        "2 mono without spaces",
        format!("Unigram LM 2 SegER {:.2}% (<= 7), degradation {:.2} points (<= 3)", pct(u2n), pct(u2n - u2)),
    );

    let mut ok = true;
    let mut detail = Vec::new();
    for cond in [SPACES, NO_SPACES] {
        let order = [ModelKind::Unigram2, ModelKind::Bpe2, ModelKind::TwoDigit, ModelKind::OneDigit];
        let v: Vec<f64> = order.iter().map(|&m| seg(&table, cond, m)).collect();
        ok &= v.windows(2).all(|w| w[0] < w[1]) && v[3] > 1.0;
        detail.push(format!(
            "{cond}: {:.2} < {:.2} < {:.2} < {:.2}",
            pct(v[0]),
            pct(v[1]),
            pct(v[2]),
            pct(v[3])
        ));
    }
    report.check(ok, "3 model ordering", detail.join("; "));
    (table.to_csv(), table.to_json().unwrap())
}

fn length_curve(report: &mut Report) -> (String, String) {
    let cfg = ExperimentConfig {
        models: vec![ModelKind::Unigram2],
        length_ciphers: 10,
        spaces: numseg_core::harness::SpaceMode::On,
        ..base_config()
    };
    let corpus = numseg_core::harness::load_corpus(&cfg).unwrap();
    let table = run_length_study(&cfg, &corpus).unwrap().table;
    let at = |l: usize| table.row(SPACES, l, ModelKind::Unigram2).expect("length row").mean_seg_er;
    let (s128, s256, s2048, s16384) = (at(128), at(256), at(2048), at(16384));
    report.check(
        s2048 <= s256 && s256 <= s128 && (s16384 - s2048).abs() <= 0.03,
        "4 length curve",
        format!(
            "SegER 128 {:.2}% >= 256 {:.2}% >= 2048 {:.2}%; |16384 {:.2}% - 2048| = {:.2} (<= 3)",
            pct(s128),
            pct(s256),
            pct(s2048),
            pct(s16384),
            pct((s16384 - s2048).abs())
        ),
    );
    (table.to_csv(), table.to_json().unwrap())
}

fn known_key(report: &mut Report) {
    let lines = clean_lines(&corpus_text());
    let half = lines.len() / 2;
    let train: Vec<String> = lines[..half].iter().map(|l| l.replace(' ', "")).collect();
    let lm = lm_train::<f64>(&train, 5).unwrap();
    let held_out = PlainText::new(lines[half..].join(" "));

    let key = generate_ambiguous_key(&KeySpec::monoalphabetic(7), 5).unwrap();
    let g = sample_cipher(&held_out, &key, 2048, &EncipherOptions::spaces(false), derive_seed(7, 1)).unwrap();
    let t0 = Instant::now();
    let (plain, segmentation) = decipher_with_key(&g.ciphertext, &key, &lm).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let t = ter(&plain, &g.plaintext).unwrap();
    let s = seg_er(&segmentation, &g.gold).unwrap();
    let readings = log10_readings(g.ciphertext.flat(), &key);

    let full: Vec<String> = lines.iter().map(|l| l.replace(' ', "")).collect();
    let english = lm_train::<f64>(&full, 5).unwrap();
    let micro = parse_key("2\ta\n22\tn\n8\td\n", None).unwrap();
    let (p, sg) = decipher_with_key(&CipherText::from_flat("2228").unwrap(), &micro, &english).unwrap();
    let micro_ok = p.as_str() == "and" && sg.segments() == ["2", "22", "8"];

    report.check(
        t <= 0.05 && micro_ok,
        "5 known-key decipherment",
        format!(
            "{} symbols, key with {} prefix collisions, 10^{readings:.0} readings: TER {:.2}% (<= 5), SegER {:.2}%, {secs:.2}s; \"2228\" -> {:?} {:?}",
            g.ciphertext.len(),
            key.prefix_collisions(),
            pct(t),
            pct(s),
            p.as_str(),
            sg.segments()
        ),
    );
}

/// log10 of the number of ways to split `flat` into key elements.
fn log10_readings(flat: &str, key: &numseg_core::CipherKey) -> f64 {
    let n = flat.len();
    let mut ways = vec![0.0f64; n + 1];
    ways[0] = 1.0;
    let mut scale = 0.0;
    for end in 1..=n {
        for e in key.entries() {
            let l = e.element.len();
            if l <= end && flat[end - l..end] == e.element {
                ways[end] += ways[end - l];
            }
        }
        if ways[end] > 1e100 {
            for w in ways.iter_mut() {
                *w /= 1e100;
            }
            scale += 100.0;
        }
    }
    ways[n].log10() + scale
}

/// Every segmentation of `chars` into model pieces, scored.
fn best_by_enumeration(model: &UnigramModel<f64>, chars: &[char]) -> Option<f64> {
    let n = chars.len();
    let mut best: Option<f64> = None;
    // bit i set: a cut after position i + 1
    for mask in 0u32..(1 << (n - 1)) {
        let mut score = 0.0;
        let mut start = 0;
        let mut ok = true;
        for end in 1..=n {
            if end == n || mask & (1 << (end - 1)) != 0 {
                let piece: String = chars[start..end].iter().collect();
                match model.log_prob(&piece) {
                    Some(lp) => score += lp,
                    None => {
                        ok = false;
                        break;
                    }
                }
                start = end;
            }
        }
        if ok && best.is_none_or(|b| score > b) {
            best = Some(score);
        }
    }
    best
}

fn viterbi_oracle(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for trial in 0..1000 {
        let alphabet: Vec<char> = "0123".chars().collect();
        let mut pieces: BTreeSet<String> = BTreeSet::new();
        for _ in 0..rng.gen_range(1..20) {
            let len = rng.gen_range(1..=4);
            pieces.insert((0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect());
        }
        let model = UnigramModel::from_pieces(pieces.into_iter().map(|p| (p, -rng.gen_range(0.1..6.0))), None);
        let n = rng.gen_range(1..=14);
        let chars: Vec<char> = (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
        let span: String = chars.iter().collect();
        let expect = best_by_enumeration(&model, &chars);
        let got = model.viterbi(&span);
        match (expect, got) {
            (None, None) => {}
            (Some(e), Some((segs, s))) => {
                let rescored: f64 = segs.iter().map(|p| model.log_prob(p).unwrap()).sum();
                if (e - s).abs() > 1e-9 || (rescored - s).abs() > 1e-9 || segs.concat() != span {
                    return Err(format!("trial {trial}: {span} viterbi {s} vs enumeration {e}"));
                }
            }
            (e, g) => return Err(format!("trial {trial}: {span} coverage mismatch {e:?} vs {g:?}")),
        }
    }
    Ok(())
}

/// Minimum weight over all accepting paths, by depth-first enumeration.
fn min_path_weight(m: &Wfst<f64>) -> Option<f64> {
    fn go(m: &Wfst<f64>, s: u32, acc: f64, best: &mut Option<f64>) {
        if m.is_final(s) {
            let w = acc + m.final_weight(s);
            if best.is_none_or(|b| w < b) {
                *best = Some(w);
            }
        }
        for a in m.arcs(s) {
            go(m, a.next, acc + a.weight, best);
        }
    }
    let mut best = None;
    go(m, m.start()?, 0.0, &mut best);
    best
}

fn shortest_path_oracle(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for trial in 0..1000 {
        let n = rng.gen_range(1..=12u32);
        let mut m: Wfst<f64> = Wfst::new();
        for _ in 0..n {
            m.add_state();
        }
        m.set_start(0);
        // arcs only go forward, so the machine is acyclic
        for s in 0..n {
            for _ in 0..rng.gen_range(0..4) {
                let next = rng.gen_range(s..n);
                if next == s {
                    continue;
                }
                let il = if rng.gen_bool(0.2) { EPSILON } else { rng.gen_range(1..4) };
                m.add_arc(s, Arc::new(il, rng.gen_range(0..4), (rng.gen_range(0..40) as f64) / 4.0, next));
            }
            if rng.gen_bool(0.3) {
                m.set_final(s, (rng.gen_range(0..8) as f64) / 4.0);
            }
        }
        let expect = min_path_weight(&m);
        match (expect, shortest_path(&m)) {
            (None, Err(_)) => {}
            (Some(e), Ok(p)) => {
                let mut w = 0.0;
                let mut s = 0;
                for a in &p.arcs {
                    if !m.arcs(s).contains(a) {
                        return Err(format!("trial {trial}: returned arc not in machine"));
                    }
                    w += a.weight;
                    s = a.next;
                }
                w += m.final_weight(s);
                if (w - e).abs() > 1e-9 || (p.weight - e).abs() > 1e-9 {
                    return Err(format!("trial {trial}: shortest path {} (walk {w}) vs enumeration {e}", p.weight));
                }
            }
            (e, p) => return Err(format!("trial {trial}: {e:?} vs {:?}", p.map(|p| p.weight))),
        }
    }
    Ok(())
}

/// Whether `h` can be turned into `r` with at most `k` segment edits.
fn within(h: &[u8], r: &[u8], k: usize) -> bool {
    if h.is_empty() || r.is_empty() {
        return h.len().max(r.len()) <= k;
    }
    if h[0] == r[0] && within(&h[1..], &r[1..], k) {
        return true;
    }
    k > 0 && (within(&h[1..], &r[1..], k - 1) || within(&h[1..], r, k - 1) || within(h, &r[1..], k - 1))
}

fn seg_er_oracle(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for trial in 0..1000 {
        let h: Vec<u8> = (0..rng.gen_range(0..=8)).map(|_| rng.gen_range(0..4)).collect();
        let r: Vec<u8> = (0..rng.gen_range(1..=8)).map(|_| rng.gen_range(0..4)).collect();
        let brute = (0..).find(|&k| within(&h, &r, k)).unwrap();
        let as_seg = |v: &[u8]| Segmentation::new(v.iter().map(|x| format!("{}", x + 1)).collect()).unwrap();
        let got = seg_er(&as_seg(&h), &as_seg(&r)).unwrap();
        let want = brute as f64 / r.len() as f64;
        if (got - want).abs() > 1e-12 || edit_distance(&h, &r) != brute {
            return Err(format!("trial {trial}: {h:?} vs {r:?}: DP {got} brute {want}"));
        }
    }
    Ok(())
}

fn oracles(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e6);
    let results = [
        ("Viterbi vs enumeration, 1000 models", viterbi_oracle(&mut rng)),
        ("shortest path vs enumeration, 1000 machines", shortest_path_oracle(&mut rng)),
        ("SegER DP vs brute force, 1000 pairs", seg_er_oracle(&mut rng)),
    ];
    let key = parse_key("0\te\n2\to\n4\ta\n5\ts\n22\tp\n24\tr\n25\tt\n", None).unwrap();
    let lattice = build_segmentation_fst::<f64>("25422024", &key).unwrap();
    let paths = lattice.fst.count_paths();
    let mut ok = paths == Some(8);
    let mut detail = vec![format!("lattice paths for 25422024: {paths:?} (== 8)")];
    for (name, r) in results {
        ok &= r.is_ok();
        detail.push(match r {
            Ok(()) => format!("{name} ok"),
            Err(e) => format!("{name} FAILED {e}"),
        });
    }
    report.check(ok, "6 oracle equivalence", detail.join("; "));
}

fn numerics(report: &mut Report) {
    let cfg = base_config();
    let corpus = numseg_core::harness::load_corpus(&cfg).unwrap();
    let g = numseg_core::harness::generate_cipher(&cfg, &corpus, 0, 2048).unwrap();
    let config = UnigramConfig { max_piece_len: Some(2), ..UnigramConfig::default() };
    let (_, diag) = unigram_train::<f64>(&g.ciphertext, &config);
    let em_drop = diag.max_decrease();

    let lines: Vec<String> = clean_lines(&corpus_text()).iter().map(|l| l.replace(' ', "")).collect();
    let lm = lm_train::<f64>(&lines, 5).unwrap();
    let worst_mass = lm.history_masses().iter().map(|(_, m)| (m - 1.0).abs()).fold(0.0, f64::max);

    let acceptor = lm_to_acceptor(&lm);
    let vocab = lm.vocab().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_gap: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(0..12);
        let s: String = (0..n).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect();
        let labels: Vec<u32> = s.chars().map(|c| acceptor.labels.label(c)).collect();
        let w = shortest_path(&compose(&Wfst::linear_acceptor(&labels), &acceptor.fst)).unwrap().weight;
        worst_gap = worst_gap.max((w + lm.score(&s)).abs());
    }
    report.check(
        em_drop <= 1e-9 && worst_mass <= 1e-6 && worst_gap <= 1e-6,
        "7 numerical checks",
        format!(
            "EM likelihood largest drop {em_drop:.2e} over {} updates; LM mass error {worst_mass:.2e} over {} histories; acceptor vs score gap {worst_gap:.2e} on 1000 strings",
            diag.em_iterations(),
            lm.num_histories()
        ),
    );
}

fn determinism(report: &mut Report, mono: (String, String), length: (String, String)) {
    let cfg = ExperimentConfig { threads: Some(2), ..base_config() };
    let corpus = numseg_core::harness::load_corpus(&cfg).unwrap();
    let again = run_mono_experiment(&cfg, &corpus).unwrap().table;
    let lcfg = ExperimentConfig {
        models: vec![ModelKind::Unigram2],
        length_ciphers: 10,
        spaces: numseg_core::harness::SpaceMode::On,
        threads: Some(3),
        ..base_config()
    };
    let lagain = run_length_study(&lcfg, &corpus).unwrap().table;
    let mono_same = again.to_csv() == mono.0 && again.to_json().unwrap() == mono.1;
    let length_same = lagain.to_csv() == length.0 && lagain.to_json().unwrap() == length.1;
    report.check(
        mono_same && length_same,
        "8 determinism",
        format!("mono rerun identical: {mono_same}; length rerun identical: {length_same}"),
    );
}

fn main() {
    let mut report = Report { lines: Vec::new() };
    let (csv, json) = mono(&mut report);
    let length = length_curve(&mut report);
    known_key(&mut report);
    oracles(&mut report);
    numerics(&mut report);
    determinism(&mut report, (csv, json), length);

    println!("\nacceptance summary");
    for (_, line) in &report.lines {
        println!("{line}");
    }
    let failed = report.lines.iter().filter(|(ok, _)| !ok).count();
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all {} criteria passed", report.lines.len());
}
