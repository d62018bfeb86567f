//! Acceptance suite: the ten load-bearing guarantees of this workspace,
//! one test (and one pass/fail line) each.
//!
//! The arithmetic is checked against independent oracles — direct
//! transcriptions of the fusion formulas in raw probability space, exact
//! rational evaluation of the retrieval score, a brute-force metric
//! implementation — and the CLI against byte-level determinism. Fixtures
//! are synthetic and documented inline; absolute metric values on them are
//! properties of the fixtures, not of any external dataset.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, One};

use threadrank_core::corpus::{Corpus, MessageRecord, QrelRecord, QrelSet, QueryRecord};
use threadrank_core::eval::metrics::{query_metrics, MetricMeans, MetricOptions, MetricReport};
use threadrank_core::eval::significance::{exact_p, monte_carlo_p, paired_randomization_test};
use threadrank_core::eval::sweep::{cross_validated_sweep, sweep_curve, GridPoint, SweepConfig};
use threadrank_core::fusion::{fuse, group_by_thread, retrieve_threads, FusionMethod, RankMethod};
use threadrank_core::index::{DocumentStats, IndexKind, InvertedIndex};
use threadrank_core::math;
use threadrank_core::rng::SplitMix64;
use threadrank_core::score::{rank_messages, RankedMessageList, ScoredMessage};
use threadrank_core::text::Analyzer;

use common::{build_index, noise_records, threadrank, threadrank_in, write_noise_fixture};

fn assert_close_rel(got: f64, expected: f64, tol: f64, context: &str) {
    let scale = got.abs().max(expected.abs()).max(f64::MIN_POSITIVE);
    assert!(
        (got - expected).abs() <= tol * scale,
        "{context}: got {got}, expected {expected} (relative tolerance {tol})"
    );
}

/// A member of one thread's evidence: raw probability and 1-based pool
/// rank.
type RawMember = (f64, u32);

/// Computes a fusion method the straightforward way, in raw probability
/// space, from one thread's members. This is the oracle the library's
/// log-domain implementation is compared against.
fn direct_formula(method: FusionMethod, members: &[RawMember], realized_pool: usize) -> f64 {
    let n = members.len() as f64;
    let probs: Vec<f64> = members.iter().map(|&(p, _)| p).collect();
    let sum: f64 = probs.iter().sum();
    let exp_sum: f64 = probs.iter().map(|&p| p.exp()).sum();
    match method {
        FusionMethod::Votes => n,
        FusionMethod::ReciprocalRank => {
            members.iter().map(|&(_, r)| 1.0 / f64::from(r)).sum()
        }
        FusionMethod::BordaFuse => {
            members.iter().map(|&(_, r)| realized_pool as f64 - f64::from(r)).sum()
        }
        FusionMethod::CombMin => probs.iter().copied().fold(f64::INFINITY, f64::min),
        FusionMethod::CombMax => probs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        FusionMethod::CombMed => {
            let mut sorted = probs.clone();
            sorted.sort_unstable_by(f64::total_cmp);
            let mid = sorted.len() / 2;
            if sorted.len() % 2 == 1 {
                sorted[mid]
            } else {
                (sorted[mid - 1] + sorted[mid]) / 2.0
            }
        }
        FusionMethod::CombSum => sum,
        FusionMethod::CombAnz => sum / n,
        FusionMethod::CombGnz => probs.iter().product::<f64>().powf(1.0 / n),
        FusionMethod::CombMnz => n * sum,
        FusionMethod::ExpCombSum => exp_sum,
        FusionMethod::ExpCombAnz => exp_sum / n,
        FusionMethod::ExpCombMnz => n * exp_sum,
    }
}

#[test]
fn c01_fusion_methods_match_direct_formula_transcriptions() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0xACCE01);
    for instance in 0..1000 {
        let n_messages = 1 + rng.next_below(50) as usize;
        let n_threads = 1 + rng.next_below(10);
        // Probabilities in [0.01, 1): realistic, and safe from underflow in
        // the oracle's raw-space product for CombGNZ.
        let mut probs: Vec<f64> =
            (0..n_messages).map(|_| 0.01 + 0.99 * rng.next_f64()).collect();
        probs.sort_unstable_by(|a, b| b.total_cmp(a));
        let threads: Vec<String> =
            (0..n_messages).map(|_| format!("t{:02}", rng.next_below(n_threads))).collect();

        let ranked = RankedMessageList {
            query_id: "q".into(),
            mu: 1000.0,
            pool_size: n_messages,
            dropped_terms: Vec::new(),
            entries: probs
                .iter()
                .zip(&threads)
                .enumerate()
                .map(|(i, (&p, thread))| ScoredMessage {
                    message_id: format!("m{i:02}"),
                    thread_id: thread.clone(),
                    log_score: p.ln(),
                    rank: i as u32 + 1,
                })
                .collect(),
        };
        let thread_of: BTreeMap<&str, &str> = ranked
            .entries
            .iter()
            .map(|e| (e.message_id.as_str(), e.thread_id.as_str()))
            .collect();
        let evidence =
            group_by_thread(&ranked, |id| thread_of.get(id).map(|t| t.to_string())).unwrap();

        // Independent grouping straight from the generated triples.
        let mut groups: BTreeMap<&str, Vec<RawMember>> = BTreeMap::new();
        for (i, (&p, thread)) in probs.iter().zip(&threads).enumerate() {
            groups.entry(thread).or_default().push((p, i as u32 + 1));
        }

        for method in FusionMethod::ALL {
            let fused = fuse(method, &ranked, &evidence);
            let scores: BTreeMap<&str, f64> =
                fused.entries.iter().map(|e| (e.thread_id.as_str(), e.score)).collect();
            assert_eq!(
                scores.keys().copied().collect::<Vec<_>>(),
                groups.keys().copied().collect::<Vec<_>>(),
                "instance {instance}: fused threads differ from grouped threads"
            );
            for (thread, members) in &groups {
                let expected = direct_formula(method, members, n_messages);
                let got = scores[thread];
                let context = format!("instance {instance}, {method}, thread {thread}");
                match method {
                    // Rank-based methods: identical arithmetic, no tolerance.
                    FusionMethod::Votes
                    | FusionMethod::ReciprocalRank
                    | FusionMethod::BordaFuse => {
                        assert_eq!(got, expected, "{context}");
                    }
                    // Exponentiated scores are already raw-domain.
                    FusionMethod::ExpCombSum
                    | FusionMethod::ExpCombAnz
                    | FusionMethod::ExpCombMnz => {
                        assert_close_rel(got, expected, 1e-9, &context);
                    }
                    // The rest are natural-log probabilities.
                    _ => assert_close_rel(got.exp(), expected, 1e-9, &context),
                }
            }
        }
    }
    assert!(
        start.elapsed() < Duration::from_secs(10),
        "1000 randomized instances took {:?}",
        start.elapsed()
    );
}

#[test]
fn c02_six_message_worked_example_matches_hand_computed_values() {
    // Six messages ranked 1..=6 with probabilities 0.06 down to 0.01;
    // thread ta holds the top message, tb the next two, tc the bottom
    // three.
    let probs: [f64; 6] = [0.06, 0.05, 0.04, 0.03, 0.02, 0.01];
    let threads = ["ta", "tb", "tb", "tc", "tc", "tc"];
    let ranked = RankedMessageList {
        query_id: "q".into(),
        mu: 1000.0,
        pool_size: 6,
        dropped_terms: Vec::new(),
        entries: probs
            .iter()
            .zip(threads)
            .enumerate()
            .map(|(i, (&p, thread))| ScoredMessage {
                message_id: format!("m{}", i + 1),
                thread_id: thread.into(),
                log_score: p.ln(),
                rank: i as u32 + 1,
            })
            .collect(),
    };
    let thread_of: BTreeMap<&str, &str> =
        ranked.entries.iter().map(|e| (e.message_id.as_str(), e.thread_id.as_str())).collect();
    let evidence =
        group_by_thread(&ranked, |id| thread_of.get(id).map(|t| t.to_string())).unwrap();

    // Grouping realizes member counts {1, 2, 3}.
    let counts: Vec<usize> = evidence.iter().map(|e| e.members.len()).collect();
    assert_eq!(counts, [1, 2, 3]);

    let score_of = |method: FusionMethod, thread: &str| -> f64 {
        fuse(method, &ranked, &evidence)
            .entries
            .iter()
            .find(|e| e.thread_id == thread)
            .expect("thread is ranked")
            .score
    };

    // Hand-computed values: tc's vote count and Borda sum are exact
    // integers; its CombSUM is 0.03 + 0.02 + 0.01 = 0.06; tb's reciprocal
    // rank sum is 1/2 + 1/3 = 5/6.
    assert_eq!(score_of(FusionMethod::Votes, "tc"), 3.0);
    assert_eq!(score_of(FusionMethod::BordaFuse, "tc"), (6.0 - 4.0) + (6.0 - 5.0) + (6.0 - 6.0));
    assert_close_rel(score_of(FusionMethod::CombSum, "tc").exp(), 0.06, 1e-12, "CombSUM(tc)");
    let rr_tb = score_of(FusionMethod::ReciprocalRank, "tb");
    assert_eq!(rr_tb, 1.0 / 2.0 + 1.0 / 3.0);
    assert!((rr_tb - 5.0 / 6.0).abs() < 1e-15, "RR(tb) = {rr_tb}, want 5/6");
}

#[test]
fn c03_log_domain_ranking_matches_exact_rational_arithmetic() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0xACCE03);
    let vocab: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();

    for instance in 0..100 {
        // Up to eight documents with small integer term counts.
        let n_docs = 2 + rng.next_below(7) as usize;
        let mut docs = Vec::new();
        for j in 0..n_docs {
            let mut term_freqs: BTreeMap<String, u32> = BTreeMap::new();
            for term in &vocab {
                let tf = rng.next_below(4) as u32;
                if tf > 0 {
                    term_freqs.insert(term.clone(), tf);
                }
            }
            if term_freqs.is_empty() {
                term_freqs.insert(vocab[j % vocab.len()].clone(), 1);
            }
            let length = term_freqs.values().map(|&tf| u64::from(tf)).sum();
            docs.push(DocumentStats { doc_id: format!("d{j}"), length, term_freqs });
        }
        let doc_to_thread: BTreeMap<String, String> =
            docs.iter().map(|d| (d.doc_id.clone(), d.doc_id.clone())).collect();
        let index = InvertedIndex::from_parts(
            IndexKind::MessageLevel,
            Analyzer::index_time(false, BTreeSet::new()),
            docs,
            doc_to_thread,
        )
        .unwrap();

        // 1–3 query terms drawn from the collection vocabulary (repeats
        // raise the term's weight), μ from {500, 1000, …, 4000}.
        let present: Vec<&String> =
            vocab.iter().filter(|t| index.collection().term_frequency(t) > 0).collect();
        let n_terms = 1 + rng.next_below(3) as usize;
        let terms: Vec<&str> = (0..n_terms)
            .map(|_| present[rng.next_below(present.len() as u64) as usize].as_str())
            .collect();
        let mu_int = 500 * (1 + rng.next_below(8));
        let query = QueryRecord { query_id: "q".into(), text: terms.join(" ") };

        let ranked = rank_messages(&query, &index, mu_int as f64, 8).unwrap();
        let got: Vec<&str> = ranked.entries.iter().map(|e| e.message_id.as_str()).collect();

        // Exact evaluation: the score of document M is
        //   Π_q ((tf(q,M)·total + μ·cf(q)) / ((|M| + μ)·total))^n(q,Q)
        // computed in arbitrary-precision rationals.
        let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
        for term in &terms {
            *counts.entry(term).or_insert(0) += 1;
        }
        let total = BigInt::from(index.collection().total_tokens);
        let mu_big = BigInt::from(mu_int);
        let mut exact: Vec<(BigRational, &str)> = Vec::new();
        for doc in index.docs() {
            if !counts.keys().any(|term| doc.term_frequency(term) > 0) {
                continue;
            }
            let mut score = BigRational::one();
            for (term, &count) in &counts {
                let tf = BigInt::from(doc.term_frequency(term));
                let cf = BigInt::from(index.collection().term_frequency(term));
                let numer = tf * &total + &mu_big * cf;
                let denom = (BigInt::from(doc.length) + &mu_big) * &total;
                let ratio = BigRational::new(numer, denom);
                for _ in 0..count {
                    score *= ratio.clone();
                }
            }
            exact.push((score, doc.doc_id.as_str()));
        }
        exact.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        let expected: Vec<&str> = exact.iter().map(|&(_, id)| id).collect();
        assert_eq!(got, expected, "instance {instance} (mu = {mu_int})");
    }
    assert!(
        start.elapsed() < Duration::from_secs(5),
        "100 rational-oracle instances took {:?}",
        start.elapsed()
    );
}

#[test]
fn c04_saturated_pools_keep_combmax_map_constant_and_rr_order_stable() {
    // Twenty threads of thirty messages. Message t of thread b repeats the
    // query term 601 − (b + 20t) times, padded to 1000 tokens, so term
    // frequencies are all distinct and the twenty thread-best messages
    // (t = 0) occupy ranks 1..=20 — inside the smallest pool. Every thread
    // is therefore represented at every pool size: nothing can join later,
    // and the checks below demand bitwise-stable behavior as the pool
    // grows from 50 to 500.
    let mut records = Vec::new();
    for b in 0..20usize {
        for t in 0..30usize {
            let tf = 601 - (b + 20 * t);
            let text =
                ("zzz ".repeat(tf) + &"pad ".repeat(1000 - tf)).trim_end().to_string();
            records.push(MessageRecord {
                message_id: format!("m{b:02}_{t:02}"),
                thread_id: format!("t{b:02}"),
                seq: t as u32,
                text,
            });
        }
    }
    let corpus = Corpus::from_records(records).unwrap();
    let index =
        InvertedIndex::build_message_level(&corpus, &Analyzer::index_time(true, BTreeSet::new()))
            .unwrap();
    let query = QueryRecord { query_id: "q1".into(), text: "zzz".into() };
    let mut qrels = QrelSet::new();
    for thread in ["t02", "t05", "t09"] {
        qrels
            .insert(QrelRecord {
                query_id: "q1".into(),
                thread_id: thread.into(),
                level: 1,
            })
            .unwrap();
    }

    let pools: Vec<usize> = (1..=10).map(|k| k * 50).collect();
    let mut combmax: Vec<(Vec<String>, Vec<f64>, f64)> = Vec::new();
    let mut rr_orders: Vec<Vec<String>> = Vec::new();
    for &pool in &pools {
        let cm = retrieve_threads(
            &query,
            &index,
            RankMethod::Fusion(FusionMethod::CombMax),
            1000.0,
            pool,
            1000,
        )
        .unwrap();
        assert_eq!(cm.entries.len(), 20, "all twenty threads reach the pool of {pool}");
        let ids: Vec<String> = cm.entries.iter().map(|e| e.thread_id.clone()).collect();
        let scores: Vec<f64> = cm.entries.iter().map(|e| e.score).collect();
        let ap = query_metrics("q1", &ids, &qrels, MetricOptions::default()).unwrap().ap;
        combmax.push((ids, scores, ap));

        let rr = retrieve_threads(
            &query,
            &index,
            RankMethod::Fusion(FusionMethod::ReciprocalRank),
            1000.0,
            pool,
            1000,
        )
        .unwrap();
        rr_orders.push(rr.entries.iter().map(|e| e.thread_id.clone()).collect());
    }

    for (i, &pool) in pools.iter().enumerate() {
        // Each thread's maximum-score message is fixed, so its CombMAX
        // score — and with it the whole ranking and its average precision —
        // must be bitwise identical at every pool size. No tolerance.
        assert_eq!(combmax[i].0, combmax[0].0, "CombMAX order changed at pool {pool}");
        assert_eq!(combmax[i].1, combmax[0].1, "CombMAX scores changed at pool {pool}");
        assert_eq!(combmax[i].2, combmax[0].2, "CombMAX AP changed at pool {pool}");
        // With every thread present from the smallest pool on, "orderings
        // change only by addition of new threads" leaves no room for any
        // change at all.
        assert_eq!(rr_orders[i], rr_orders[0], "RR order changed at pool {pool}");
    }
}

#[test]
fn c05_count_and_sum_fusion_map_strictly_drops_at_oversized_pools() {
    let corpus = Corpus::from_records(noise_records(5)).unwrap();
    let index =
        InvertedIndex::build_message_level(&corpus, &Analyzer::index_time(true, BTreeSet::new()))
            .unwrap();
    let queries: Vec<QueryRecord> = (0..5)
        .map(|i| QueryRecord { query_id: format!("q{i}"), text: format!("topic{i}") })
        .collect();
    let mut qrels = QrelSet::new();
    for i in 0..5 {
        qrels
            .insert(QrelRecord {
                query_id: format!("q{i}"),
                thread_id: format!("rel{i}"),
                level: 1,
            })
            .unwrap();
    }

    // A pool of five holds exactly the relevant thread's strong messages;
    // a pool of five hundred admits all forty noise messages per topic,
    // which outvote and outsum them.
    for method in [FusionMethod::CombSum, FusionMethod::Votes, FusionMethod::CombMnz] {
        let points = sweep_curve(
            &queries,
            &qrels,
            &index,
            RankMethod::Fusion(method),
            2000.0,
            &[5, 500],
            1000,
            MetricOptions::default(),
        )
        .unwrap();
        assert_eq!(points[0].map, 1.0, "{method}: knee pool should be perfect");
        assert!(
            points[1].map < points[0].map,
            "{method}: MAP at pool 500 ({}) should be strictly below pool 5 ({})",
            points[1].map,
            points[0].map
        );
    }
}

/// Brute-force metric computation, written as directly as possible: each
/// precision is recomputed by scanning the prefix, no running state.
fn oracle_metrics(
    ranked: &[String],
    judged: &BTreeMap<String, u8>,
    graded: bool,
) -> (f64, f64, f64, f64) {
    let gain = |thread: &String| -> f64 {
        match judged.get(thread) {
            Some(&level) if graded => f64::from(level),
            Some(&level) if level >= 1 => 1.0,
            _ => 0.0,
        }
    };
    let relevant: BTreeSet<&String> =
        judged.iter().filter(|&(_, &level)| level >= 1).map(|(t, _)| t).collect();

    let mut ap = 0.0;
    for k in 1..=ranked.len() {
        if relevant.contains(&ranked[k - 1]) {
            let hits = ranked[..k].iter().filter(|t| relevant.contains(t)).count();
            ap += hits as f64 / k as f64;
        }
    }
    ap /= relevant.len() as f64;

    let rr = ranked
        .iter()
        .position(|t| relevant.contains(t))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64);
    let p10 = ranked.iter().take(10).filter(|t| relevant.contains(t)).count() as f64 / 10.0;

    let dcg: f64 = ranked
        .iter()
        .take(10)
        .enumerate()
        .map(|(i, t)| gain(t) / ((i + 2) as f64).log2())
        .sum();
    let mut ideal: Vec<f64> = judged.keys().map(gain).collect();
    ideal.sort_unstable_by(|a, b| b.total_cmp(a));
    let idcg: f64 =
        ideal.iter().take(10).enumerate().map(|(i, g)| g / ((i + 2) as f64).log2()).sum();
    (ap, rr, p10, dcg / idcg)
}

#[test]
fn c06_metrics_match_a_brute_force_oracle() {
    // Three hand-computed examples, exact. First: relevant at ranks 1 and
    // 4, one judged-irrelevant and one unjudged thread between them.
    let mut qrels = QrelSet::new();
    for (thread, level) in [("a", 1), ("b", 0), ("d", 1)] {
        qrels
            .insert(QrelRecord { query_id: "q".into(), thread_id: thread.into(), level })
            .unwrap();
    }
    let ranked: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
    let m = query_metrics("q", &ranked, &qrels, MetricOptions::default()).unwrap();
    assert_eq!(m.ap, 0.75);
    assert_eq!(m.rr, 1.0);
    assert_eq!(m.p_at_10, 0.2);
    assert_eq!(m.ndcg_at_10, (1.0 + 1.0 / math::log2(5.0)) / (1.0 + 1.0 / math::log2(3.0)));

    // Second: the only relevant thread at rank 3.
    let mut qrels = QrelSet::new();
    qrels
        .insert(QrelRecord { query_id: "q".into(), thread_id: "z".into(), level: 1 })
        .unwrap();
    let ranked: Vec<String> = ["x", "y", "z"].map(String::from).to_vec();
    let m = query_metrics("q", &ranked, &qrels, MetricOptions::default()).unwrap();
    assert_eq!(m.ap, 1.0 / 3.0);
    assert_eq!(m.rr, 1.0 / 3.0);
    assert_eq!(m.p_at_10, 0.1);
    assert_eq!(m.ndcg_at_10, 0.5);

    // Third: a perfect run over twelve relevant threads.
    let mut qrels = QrelSet::new();
    let ranked: Vec<String> = (0..12).map(|i| format!("t{i:02}")).collect();
    for thread in &ranked {
        qrels
            .insert(QrelRecord { query_id: "q".into(), thread_id: thread.clone(), level: 1 })
            .unwrap();
    }
    let m = query_metrics("q", &ranked, &qrels, MetricOptions::default()).unwrap();
    assert_eq!(m.ap, 1.0);
    assert_eq!(m.rr, 1.0);
    assert_eq!(m.p_at_10, 1.0);
    assert_eq!(m.ndcg_at_10, 1.0);

    // Two hundred random runs against the brute-force oracle, binary and
    // graded gains alike, to 1e-12.
    let mut rng = SplitMix64::new(0xACCE06);
    for run in 0..200 {
        let judged_count = 3 + rng.next_below(28) as usize;
        let universe: Vec<String> =
            (0..judged_count + 5).map(|i| format!("t{i:02}")).collect();
        let mut judged: BTreeMap<String, u8> = BTreeMap::new();
        for thread in &universe[..judged_count] {
            judged.insert(thread.clone(), rng.next_below(3) as u8);
        }
        if judged.values().all(|&level| level == 0) {
            judged.insert(universe[0].clone(), 1 + rng.next_below(2) as u8);
        }
        let mut qrels = QrelSet::new();
        for (thread, &level) in &judged {
            qrels
                .insert(QrelRecord {
                    query_id: "q".into(),
                    thread_id: thread.clone(),
                    level,
                })
                .unwrap();
        }

        let mut ranked = universe.clone();
        rng.shuffle(&mut ranked);
        ranked.truncate(1 + rng.next_below(universe.len() as u64) as usize);
        let graded = rng.next_bool();
        let options = MetricOptions { graded_ndcg: graded };

        let got = query_metrics("q", &ranked, &qrels, options).unwrap();
        let (ap, rr, p10, ndcg) = oracle_metrics(&ranked, &judged, graded);
        for (name, got, want) in [
            ("ap", got.ap, ap),
            ("rr", got.rr, rr),
            ("p10", got.p_at_10, p10),
            ("ndcg10", got.ndcg_at_10, ndcg),
        ] {
            assert!(
                (got - want).abs() <= 1e-12,
                "run {run}, {name}: got {got}, oracle {want}"
            );
        }
    }
}

#[test]
fn c07_randomization_test_matches_exact_enumeration() {
    // Identical systems: every sign assignment reaches the observed (zero)
    // difference, so p is exactly 1.
    let a: BTreeMap<String, f64> =
        (0..7).map(|i| (format!("q{i}"), 0.3 + 0.05 * i as f64)).collect();
    assert_eq!(paired_randomization_test(&a, &a, 1000, 1).unwrap(), 1.0);

    // Two queries, a constant shift: of the four sign assignments exactly
    // two (++ and −−) reach the observed |sum|, so p is exactly 0.5.
    let first: BTreeMap<String, f64> =
        [("q0", 0.9), ("q1", 0.8)].map(|(q, v)| (q.to_string(), v)).into();
    let second: BTreeMap<String, f64> =
        [("q0", 0.4), ("q1", 0.3)].map(|(q, v)| (q.to_string(), v)).into();
    assert_eq!(paired_randomization_test(&first, &second, 1000, 1).unwrap(), 0.5);

    // Monte Carlo sampling with 10^5 draws tracks exact enumeration within
    // 0.01 across small query counts.
    let mut rng = SplitMix64::new(0xACCE07);
    for n in [2usize, 3, 5, 8, 10, 12] {
        let diffs: Vec<f64> = (0..n).map(|_| rng.next_f64() * 2.0 - 0.7).collect();
        let exact = exact_p(&diffs);
        let sampled = monte_carlo_p(&diffs, 100_000, 42);
        assert!(
            (sampled - exact).abs() < 0.01,
            "n = {n}: Monte Carlo {sampled} vs exact {exact}"
        );
    }
}

#[test]
fn c08_cross_validated_sweep_selects_planted_optimum_and_reproduces() {
    let corpus = Corpus::from_records(noise_records(5)).unwrap();
    let index =
        InvertedIndex::build_message_level(&corpus, &Analyzer::index_time(true, BTreeSet::new()))
            .unwrap();
    let queries: Vec<QueryRecord> = (0..5)
        .map(|i| QueryRecord { query_id: format!("q{i}"), text: format!("topic{i}") })
        .collect();
    let mut qrels = QrelSet::new();
    for i in 0..5 {
        qrels
            .insert(QrelRecord {
                query_id: format!("q{i}"),
                thread_id: format!("rel{i}"),
                level: 1,
            })
            .unwrap();
    }
    let config = SweepConfig { folds: 5, seed: 42, cutoff: 1000, options: MetricOptions::default() };

    // A single-point grid leaves nothing to choose: the report must equal
    // plain evaluation at that point.
    let single = [GridPoint { mu: 2000.0, pool_size: 5 }];
    let report = cross_validated_sweep(
        &queries,
        &qrels,
        &index,
        RankMethod::Fusion(FusionMethod::CombSum),
        &single,
        &config,
    )
    .unwrap();
    let mut per_query = BTreeMap::new();
    for query in &queries {
        let list = retrieve_threads(
            query,
            &index,
            RankMethod::Fusion(FusionMethod::CombSum),
            2000.0,
            5,
            1000,
        )
        .unwrap();
        let ids: Vec<String> = list.entries.into_iter().map(|e| e.thread_id).collect();
        if let Some(m) = query_metrics(&query.query_id, &ids, &qrels, MetricOptions::default()) {
            per_query.insert(query.query_id.clone(), m);
        }
    }
    let n = per_query.len() as f64;
    let (mut map, mut mrr, mut p10, mut ndcg) = (0.0, 0.0, 0.0, 0.0);
    for m in per_query.values() {
        map += m.ap;
        mrr += m.rr;
        p10 += m.p_at_10;
        ndcg += m.ndcg_at_10;
    }
    let expected = MetricReport {
        per_query,
        means: MetricMeans {
            map: map / n,
            mrr: mrr / n,
            p_at_10: p10 / n,
            ndcg_at_10: ndcg / n,
        },
    };
    assert_eq!(report.pooled, expected);
    for fold in &report.folds {
        assert_eq!(fold.chosen, single[0]);
        assert_eq!(fold.train_map, 1.0);
    }

    // A 2×2 grid with a planted optimum: a pool of five is strictly better
    // than five hundred on every training query, and vote counts are
    // unaffected by μ, so the μ tie resolves to the smaller value — every
    // fold must pick (500, 5).
    let grid = [
        GridPoint { mu: 500.0, pool_size: 5 },
        GridPoint { mu: 500.0, pool_size: 500 },
        GridPoint { mu: 2000.0, pool_size: 5 },
        GridPoint { mu: 2000.0, pool_size: 500 },
    ];
    let planted = cross_validated_sweep(
        &queries,
        &qrels,
        &index,
        RankMethod::Fusion(FusionMethod::Votes),
        &grid,
        &config,
    )
    .unwrap();
    assert_eq!(planted.folds.len(), 5);
    for fold in &planted.folds {
        assert_eq!(fold.chosen, GridPoint { mu: 500.0, pool_size: 5 }, "fold {}", fold.fold);
        assert_eq!(fold.train_map, 1.0, "fold {}", fold.fold);
    }

    // The same seed reproduces the report — as a value and as rendered
    // bytes — regardless of grid order.
    let again = cross_validated_sweep(
        &queries,
        &qrels,
        &index,
        RankMethod::Fusion(FusionMethod::Votes),
        &grid,
        &config,
    )
    .unwrap();
    assert_eq!(planted, again);
    let mut reversed = grid;
    reversed.reverse();
    let reordered = cross_validated_sweep(
        &queries,
        &qrels,
        &index,
        RankMethod::Fusion(FusionMethod::Votes),
        &reversed,
        &config,
    )
    .unwrap();
    assert_eq!(planted, reordered);
    let render = |report: &MetricReport| {
        let mut buf = Vec::new();
        threadrank_cli::formats::write_metric_tsv(&mut buf, report).unwrap();
        buf
    };
    assert_eq!(render(&planted.pooled), render(&again.pooled));
}

#[test]
fn c09_cli_emits_full_method_comparison_with_significance_markers() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = write_noise_fixture(dir.path(), 8);
    let idx = build_index(&fixture, dir.path());
    let args = [
        "report",
        "--index-dir",
        idx.to_str().unwrap(),
        "--queries",
        fixture.queries.to_str().unwrap(),
        "--qrels",
        fixture.qrels.to_str().unwrap(),
        "--mu",
        "2000",
        "--pool-size",
        "500",
    ];
    let out = threadrank(&args);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);

    let lines: Vec<&str> = out.stdout.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "method\tmap\tmrr\tp10\tndcg10");
    assert_eq!(lines.len(), 15, "one row per method:\n{}", out.stdout);
    let methods: Vec<&str> =
        lines[1..].iter().map(|l| l.split('\t').next().unwrap()).collect();
    let expected: Vec<&str> = RankMethod::ALL.iter().map(|m| m.name()).collect();
    assert_eq!(methods, expected);
    assert!(out.stdout.contains("# queries\t8"), "meta lines:\n{}", out.stdout);

    // Every cell is a four-decimal value with an optional marker.
    for line in &lines[1..] {
        for cell in line.split('\t').skip(1) {
            let value = cell.trim_end_matches(['▲', '△', '▽', '▼']);
            let parsed: f64 = value.parse().unwrap_or_else(|_| panic!("bad cell {cell:?}"));
            assert!((0.0..=1.0).contains(&parsed), "metric out of range: {cell}");
            assert_eq!(value.len(), 6, "not four decimals: {cell:?}");
        }
    }

    // On this corpus the baseline is perfect, and with eight queries the
    // count- and sum-style methods rank the noisy thread first on every
    // one — far enough for the strongest marker (the exact two-sided
    // p-value of a constant shift over eight queries is 2/256 < 0.01).
    // P@10 ties the baseline, so it carries no marker.
    assert_eq!(lines[1], "vd\t1.0000\t1.0000\t0.1000\t1.0000");
    assert_eq!(lines[2], "votes\t0.5000▼\t0.5000▼\t0.1000\t0.6309▼");

    // Absolute values are properties of this synthetic corpus; what the
    // command promises for arbitrary corpora is the table's shape and
    // byte-level determinism.
    let again = threadrank(&args);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn c10_index_search_eval_pipeline_is_byte_identical_across_invocations() {
    let run_pipeline = |dir: &std::path::Path| -> (String, Vec<u8>, Vec<u8>, Vec<u8>, String, Vec<u8>) {
        write_noise_fixture(dir, 4);
        // Relative paths throughout so printed output is directory-free.
        let index_out = threadrank_in(dir, &["index", "--corpus", "corpus.jsonl", "--out-dir", "idx"]);
        assert_eq!(index_out.code, 0, "stderr: {}", index_out.stderr);
        let search_out = threadrank_in(
            dir,
            &[
                "search",
                "--index-dir",
                "idx",
                "--queries",
                "queries.tsv",
                "--method",
                "combsum",
                "--mu",
                "2000",
                "--pool-size",
                "500",
                "--output",
                "run.txt",
            ],
        );
        assert_eq!(search_out.code, 0, "stderr: {}", search_out.stderr);
        let eval_out = threadrank_in(
            dir,
            &[
                "eval",
                "--run",
                "run.txt",
                "--qrels",
                "qrels.txt",
                "--json",
                "eval.json",
            ],
        );
        assert_eq!(eval_out.code, 0, "stderr: {}", eval_out.stderr);
        (
            index_out.stdout,
            std::fs::read(dir.join("idx/message.idx")).unwrap(),
            std::fs::read(dir.join("idx/vd.idx")).unwrap(),
            std::fs::read(dir.join("run.txt")).unwrap(),
            eval_out.stdout,
            std::fs::read(dir.join("eval.json")).unwrap(),
        )
    };

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let first = run_pipeline(dir_a.path());
    let second = run_pipeline(dir_b.path());
    assert_eq!(first.0, second.0, "index summaries differ");
    assert_eq!(first.1, second.1, "message index bytes differ");
    assert_eq!(first.2, second.2, "virtual-document index bytes differ");
    assert_eq!(first.3, second.3, "run files differ");
    assert_eq!(first.4, second.4, "metric tables differ");
    assert_eq!(first.5, second.5, "JSON reports differ");
}
