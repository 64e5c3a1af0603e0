use clozer_core::bank::{parse_bank, to_jsonl, Question, QuestionSource};
use clozer_core::gap::{gini, reweight, ConfidenceVector};
use clozer_core::grading::grade;
use clozer_core::text::{
    extract_target_sentences, filter_sentences, mask_sentence, ExtractionConfig, SentenceRecord,
    SourceRef, WordList,
};
use clozer_core::BLANK_MARKER;
use proptest::prelude::*;

const WORDS: &[&str] = &[
    "the", "cat", "sat", "on", "mat", "peace", "war", "and", "a", "dog", "ran", "far", "away",
    "in", "quiet", "town", "we", "hope", "for", "rain",
];

fn sentence() -> impl Strategy<Value = SentenceRecord> {
    (prop::collection::vec(0..WORDS.len() + 2, 1..40), 0usize..1000).prop_map(|(idx, n)| {
        let words: Vec<&str> = idx
            .iter()
            .map(|&i| match i {
                i if i < WORDS.len() => WORDS[i],
                i if i == WORDS.len() => "Paris",
                _ => "zebra",
            })
            .collect();
        let mut text = words.join(" ");
        text.push('.');
        SentenceRecord::new(format!("d#{n}"), text, SourceRef { doc: "d".into(), offset: 0 }).unwrap()
    })
}

fn config() -> ExtractionConfig {
    ExtractionConfig::new(WordList::new(WORDS.iter().copied()).unwrap())
}

fn positive() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-6f64..1.0, 1..80)
}

proptest! {
    #[test]
    fn filter_is_idempotent(corpus in prop::collection::vec(sentence(), 0..30)) {
        let cfg = config();
        let once = filter_sentences(&corpus, "peace", &cfg);
        let twice = filter_sentences(&once, "peace", &cfg);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn extraction_is_a_subset(corpus in prop::collection::vec(sentence(), 0..30)) {
        let got = extract_target_sentences(&corpus, "peace");
        for r in &got {
            prop_assert!(corpus.contains(r));
            prop_assert!(r.tokens.iter().any(|t| t.eq_ignore_ascii_case("peace")));
        }
        let expected = corpus.iter().filter(|r| r.tokens.iter().any(|t| t == "peace")).count();
        prop_assert_eq!(got.len(), expected);
    }

    #[test]
    fn mask_round_trip(r in sentence()) {
        if let Ok(m) = mask_sentence(&r, "peace", 0, "[MASK]") {
            prop_assert_eq!(m.unmask(), r.text.clone());
            prop_assert_eq!(m.masked_text.matches("[MASK]").count(), 1);
        } else {
            prop_assert!(!r.tokens.iter().any(|t| t == "peace"));
        }
    }

    #[test]
    fn gini_in_range(v in positive()) {
        let g = gini(&v).unwrap();
        let n = v.len() as f64;
        prop_assert!(g >= 0.0);
        prop_assert!(g <= 1.0 - 1.0 / n + 1e-12);
    }

    #[test]
    fn gini_scale_invariant(v in positive(), s in 1e-3f64..1e3) {
        let scaled: Vec<f64> = v.iter().map(|x| x * s).collect();
        prop_assert!((gini(&v).unwrap() - gini(&scaled).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn gini_permutation_invariant(v in positive(), seed in any::<u64>()) {
        let mut p = v.clone();
        let n = p.len();
        let mut state = seed;
        for i in (1..n).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            p.swap(i, (state >> 33) as usize % (i + 1));
        }
        prop_assert!((gini(&v).unwrap() - gini(&p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn reweight_bounds(mut v in prop::collection::vec(1e-6f64..1.0, 2..60), k in 2usize..5, j in 0usize..60) {
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        prop_assume!(k <= v.len());
        let j = j % v.len() + 1;
        let c = ConfidenceVector::new(v).unwrap();
        let rw = reweight(&c, j, k).unwrap();
        prop_assert!(rw > 0.0 && rw < 1.0);
    }

    #[test]
    fn exact_implies_stem(a in "[A-Za-z]{0,12}", b in "[a-z]{1,12}", same in any::<bool>()) {
        let answer = if same { b.to_uppercase() } else { a };
        let g = grade(&answer, &b).unwrap();
        prop_assert!(!g.exact || g.stem);
    }

    #[test]
    fn bank_round_trip(phis in prop::collection::vec(0.0f64..0.999_999, 0..20)) {
        let qs: Vec<Question> = phis
            .iter()
            .enumerate()
            .map(|(i, &phi)| Question {
                question_id: format!("q{i}"),
                masked_text: format!("Word {BLANK_MARKER} \"quoted\" \\ here."),
                target_word: "peace".into(),
                phi,
                gini: phi,
                rw: 1.0 / 3.0,
                target_rank: 1,
                top_candidates: vec![("peace".into(), 0.1 + phi / 2.0)],
                source: QuestionSource { doc: "d".into(), sentence_id: format!("d#{i}"), offset: i },
                model_name: "m".into(),
                created_at: "2024-01-01T00:00:00Z".into(),
                extra: Default::default(),
            })
            .collect();
        let back = parse_bank(&to_jsonl(&qs), std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back.questions, qs);
    }
}
