mod common;

use std::collections::BTreeSet;

use common::*;
use rand::Rng;
use trivia_miner::corpus::{ArticleRecord, Corpus};
use trivia_miner::{EngineConfig, TriviaEngine};

/// Random corpus with overlapping categories and random pair similarities.
fn random_world(seed: u64) -> (Corpus, StubSimilarity) {
    let mut rng = rng(seed);
    let n = rng.random_range(5..25);
    let cats: Vec<String> = (0..rng.random_range(1..6))
        .map(|c| format!("C{c}"))
        .collect();
    let records: Vec<ArticleRecord> = (0..n)
        .map(|i| {
            let mine: Vec<&str> = cats
                .iter()
                .filter(|_| rng.random_bool(0.5))
                .map(String::as_str)
                .collect();
            ArticleRecord::new(&format!("a{i:02}"), "", "", &mine)
        })
        .collect();
    let mut stub = StubSimilarity::new(0.0);
    for i in 0..n {
        for j in i + 1..n {
            stub.set(&records[i].id, &records[j].id, rng.random_range(-0.2..1.0));
        }
    }
    (Corpus::from_records(records).unwrap(), stub)
}

#[test]
fn engine_matches_brute_force_when_unsampled() {
    for seed in 0..40 {
        let (corpus, stub) = random_world(seed);
        let engine = TriviaEngine::new(&corpus, &stub, EngineConfig::default()).unwrap();
        for article in corpus.articles() {
            let ranking = engine.top_trivia(&article.id).unwrap();
            let mut expected = Vec::new();
            for name in &article.categories {
                let members = &corpus.category(name).unwrap().members;
                if members.len() < 2 {
                    assert!(ranking.excluded.contains(name));
                    continue;
                }
                let mut pair_sum = 0.0;
                let mut pairs = 0.0;
                for (i, a) in members.iter().enumerate() {
                    for b in &members[i + 1..] {
                        pair_sum += stub.get(a, b);
                        pairs += 1.0;
                    }
                }
                let coh = pair_sum / pairs;
                let sigma = members
                    .iter()
                    .filter(|m| **m != article.id)
                    .map(|m| stub.get(&article.id, m))
                    .sum::<f64>()
                    / (members.len() - 1) as f64;
                let trivia = if sigma > 0.0 {
                    coh / sigma
                } else {
                    f64::INFINITY
                };
                expected.push((name.clone(), coh, trivia));
            }
            assert_eq!(ranking.scores.len(), expected.len());
            for score in &ranking.scores {
                let (_, coh, trivia) = expected.iter().find(|e| e.0 == score.category).unwrap();
                assert!((score.cohesiveness - coh).abs() < 1e-12);
                assert!(
                    score.trivia == *trivia || (score.trivia - trivia).abs() < 1e-9 * trivia.abs()
                );
            }
            // Finite scores descending, then degenerate ones.
            let keys: Vec<(bool, f64)> = ranking
                .scores
                .iter()
                .map(|s| (s.is_degenerate(), -s.trivia))
                .collect();
            assert!(
                keys.windows(2)
                    .all(|w| (!w[0].0 && w[1].0)
                        || (w[0].0 == w[1].0 && (w[0].0 || w[0].1 <= w[1].1)))
            );
        }
    }
}

#[test]
fn results_do_not_depend_on_the_thread_pool() {
    for seed in 0..10 {
        let (corpus, stub) = random_world(100 + seed);
        let cfg = EngineConfig {
            sample_cap: 3,
            rng_seed: seed,
            ..EngineConfig::default()
        };
        let engine = TriviaEngine::new(&corpus, &stub, cfg).unwrap();
        let runs: Vec<_> = [1, 3, 8]
            .iter()
            .map(|&threads| {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .unwrap();
                pool.install(|| {
                    corpus
                        .articles()
                        .iter()
                        .map(|a| engine.top_trivia(&a.id).unwrap())
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for r in &runs[1..] {
            for (x, y) in r.iter().zip(&runs[0]) {
                assert_eq!(x.scores.len(), y.scores.len());
                for (s, t) in x.scores.iter().zip(&y.scores) {
                    assert_eq!(s.category, t.category);
                    assert_eq!(s.trivia.to_bits(), t.trivia.to_bits());
                    assert_eq!(s.cohesiveness.to_bits(), t.cohesiveness.to_bits());
                }
            }
        }
    }
}

#[test]
fn seed_selects_the_sample() {
    let fx = planted_outlier();
    let corpus = trivia_miner::load_corpus(&fx.corpus).unwrap();
    let stub = StubSimilarity::new(0.5);
    let samples: BTreeSet<Vec<String>> = (0..20)
        .map(|seed| {
            let cfg = EngineConfig {
                sample_cap: 4,
                rng_seed: seed,
                ..EngineConfig::default()
            };
            let engine = TriviaEngine::new(&corpus, &stub, cfg).unwrap();
            let sample = engine.sample(PLANTED, TARGET).unwrap();
            assert_eq!(sample.len(), 4);
            assert!(sample.contains(&TARGET));
            let again = engine.sample(PLANTED, TARGET).unwrap();
            assert_eq!(sample, again);
            sample.into_iter().map(String::from).collect()
        })
        .collect();
    assert!(
        samples.len() > 10,
        "only {} distinct samples from 20 seeds",
        samples.len()
    );
}
