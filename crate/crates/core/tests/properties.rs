use std::collections::BTreeMap;

use proptest::prelude::*;
use silverbench::align::{symmetrize, SymmetrizationMethod};
use silverbench::corpus::{AlignmentLink, AlignmentSet, Sentence};
use silverbench::eval::{partial_filter, pearson_r, prf1};
use silverbench::inference::{create_silver_dataset, InferenceConfig};
use silverbench::providers::SyntheticProvider;
use silverbench::synth::{generate, SynthParams};
use silverbench::tokenize::{project_to_words, train, TokenizedSentence, VocabKind};

fn directional() -> impl Strategy<Value = (AlignmentSet, AlignmentSet)> {
    (1usize..10, 1usize..10).prop_flat_map(|(n, m)| {
        let forward = prop::collection::vec(prop::option::of(0..n), m).prop_map(|v| {
            AlignmentSet::from_pairs(
                v.into_iter()
                    .enumerate()
                    .filter_map(|(j, i)| i.map(|i| (i, j))),
            )
        });
        let backward = prop::collection::vec(prop::option::of(0..m), n).prop_map(|v| {
            AlignmentSet::from_pairs(
                v.into_iter()
                    .enumerate()
                    .filter_map(|(i, j)| j.map(|j| (i, j))),
            )
        });
        (forward, backward)
    })
}

fn links(max: usize) -> impl Strategy<Value = AlignmentSet> {
    prop::collection::vec((0..max, 0..max, any::<bool>()), 0..20).prop_map(|v| {
        v.into_iter()
            .map(|(s, t, sure)| {
                if sure {
                    AlignmentLink::sure(s, t)
                } else {
                    AlignmentLink::possible(s, t)
                }
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn symmetrization_chain((f, b) in directional()) {
        use SymmetrizationMethod::*;
        let get = |m| symmetrize(&f, &b, m);
        let (int, gd, gdf, gdfa, uni) = (get(Intersection), get(GrowDiag), get(GrowDiagFinal), get(GrowDiagFinalAnd), get(Union));
        prop_assert!(int.pairs_subset_of(&gd));
        prop_assert!(gd.pairs_subset_of(&gdf));
        prop_assert!(gd.pairs_subset_of(&gdfa));
        prop_assert!(gdf.pairs_subset_of(&uni));
        prop_assert!(gdfa.pairs_subset_of(&uni));
    }

    #[test]
    fn scores_ignore_link_order(pred in links(5), gold in links(5), seed in any::<u64>()) {
        let mut v: Vec<AlignmentLink> = pred.iter().collect();
        v.extend(v.clone());
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(v.as_mut_slice(), &mut rng);
        let shuffled: AlignmentSet = v.into_iter().collect();
        prop_assert_eq!(prf1(&pred, &gold), prf1(&shuffled, &gold));
    }

    #[test]
    fn scores_stay_finite(pred in links(4), gold in links(4)) {
        let r = prf1(&pred, &gold);
        for v in [r.precision, r.recall, r.f1, r.aer] {
            prop_assert!(v.is_finite() && (0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn partial_filter_is_a_subset(pred in links(6), silver in links(6)) {
        let kept = partial_filter(&pred, &silver);
        prop_assert!(kept.pairs_subset_of(&pred));
        for (s, _) in kept.pairs() {
            prop_assert!(silver.pairs().any(|(i, _)| i == s));
        }
    }

    #[test]
    fn pearson_of_affine_map(x in prop::collection::vec(-100.0f64..100.0, 2..12), a in 0.1f64..10.0, b in -50.0f64..50.0) {
        prop_assume!(x.iter().any(|v| (v - x[0]).abs() > 1e-3));
        let up: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let down: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
        prop_assert!((pearson_r(&x, &up).unwrap() - 1.0).abs() < 1e-9);
        prop_assert!((pearson_r(&x, &down).unwrap() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn projection_is_monotone(extra in links(8), base in links(8), words in prop::collection::vec("[a-e]{1,5}", 8)) {
        let vocab = train(VocabKind::Bpe, words.iter().map(String::as_str), 12).unwrap();
        let s = vocab.tokenize(&Sentence::new(words.clone(), "x"));
        let n = s.tokens.len();
        let clip = |a: &AlignmentSet| -> AlignmentSet {
            a.iter().filter(|l| l.src < n && l.tgt < n).collect()
        };
        let base = clip(&base);
        let mut more = base.clone();
        more.extend_from(&clip(&extra));
        let p = project_to_words(&base, &s, &s).unwrap();
        let q = project_to_words(&more, &s, &s).unwrap();
        prop_assert!(p.pairs_subset_of(&q));
    }
}

fn silver_run(
    params: &SynthParams,
    cfg: InferenceConfig,
) -> (Vec<AlignmentSet>, Vec<AlignmentSet>) {
    let corpus = generate(params).unwrap();
    let provider = SyntheticProvider::new(corpus.spec.clone()).unwrap();
    let mono: Vec<(String, Sentence)> = corpus
        .sources
        .iter()
        .enumerate()
        .map(|(i, s)| (format!("{:06}", i + 1), s.clone()))
        .collect();
    let (records, stats) = create_silver_dataset(&mono, &provider, &provider, &cfg, "tgt").unwrap();
    assert!(stats.skipped.is_empty());
    (records.into_iter().map(|r| r.links).collect(), corpus.truth)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn silver_links_are_sound(seed in any::<u64>(), reverse in any::<bool>(), fusion in 0.0f64..0.4, class_size in 2usize..7) {
        let params = SynthParams { seed, reverse, fusion, class_size, words: 40, sentences: 30, ..Default::default() };
        let (silver, truth) = silver_run(&params, InferenceConfig { k: 5, min_valid: 1 });
        for (s, t) in silver.iter().zip(&truth) {
            prop_assert!(s.pairs_subset_of(t));
            // At most one link per source position.
            let mut seen = BTreeMap::new();
            for (i, _) in s.pairs() {
                *seen.entry(i).or_insert(0) += 1;
            }
            prop_assert!(seen.values().all(|&c| c == 1));
        }
    }

    #[test]
    fn stricter_min_valid_never_adds_links(seed in any::<u64>(), m in 1usize..5) {
        let params = SynthParams { seed, class_size: 4, words: 40, sentences: 30, ..Default::default() };
        let (loose, _) = silver_run(&params, InferenceConfig { k: 5, min_valid: m });
        let (strict, _) = silver_run(&params, InferenceConfig { k: 5, min_valid: m + 1 });
        for (a, b) in strict.iter().zip(&loose) {
            prop_assert!(a.pairs_subset_of(b));
        }
    }

    #[test]
    fn class_substitution_changes_one_target_word(seed in any::<u64>(), reverse in any::<bool>()) {
        let params = SynthParams { seed, reverse, fusion: 0.2, words: 30, sentences: 10, ..Default::default() };
        let corpus = generate(&params).unwrap();
        let provider = SyntheticProvider::new(corpus.spec.clone()).unwrap();
        for s in &corpus.sources {
            let base = provider.translate_words(&s.words);
            for (p, w) in s.words.iter().enumerate() {
                for alt in provider.alternatives(w) {
                    let mut words = s.words.clone();
                    words[p] = alt;
                    let out = provider.translate_words(&words);
                    prop_assert_eq!(out.len(), base.len());
                    prop_assert_eq!(out.iter().zip(&base).filter(|(a, b)| a != b).count(), 1);
                }
            }
        }
    }
}

#[test]
fn silver_output_ignores_thread_count() {
    let params = SynthParams {
        seed: 5,
        reverse: true,
        ..Default::default()
    };
    let corpus = generate(&params).unwrap();
    let provider = SyntheticProvider::new(corpus.spec.clone()).unwrap();
    let mono: Vec<(String, Sentence)> = corpus
        .sources
        .iter()
        .enumerate()
        .map(|(i, s)| (i.to_string(), s.clone()))
        .collect();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let (records, stats) = create_silver_dataset(
                &mono,
                &provider,
                &provider,
                &InferenceConfig::default(),
                "tgt",
            )
            .unwrap();
            let lines: Vec<String> = records.iter().map(|r| r.to_json_line()).collect();
            (lines, serde_json::to_string(&stats).unwrap())
        })
    };
    assert_eq!(run(1), run(6));
}

#[test]
fn identity_tokenization_projects_to_itself() {
    let s = Sentence::from_text("a b c", "x");
    let t = TokenizedSentence::identity(&s);
    let a = AlignmentSet::from_pairs([(0, 2), (2, 0), (1, 1)]);
    assert_eq!(project_to_words(&a, &t, &t).unwrap(), a);
}
