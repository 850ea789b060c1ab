use crowdreview::defect::{
    estimate, estimate_post, label, narrative_score, score_fragments, score_statistics,
    DefectLabel, DefectScore, DefectThresholds,
};
use crowdreview::ingest::{CodeFragment, PostType, SoPost};
use crowdreview::sentiment::{analyze, decide, Sentiment, SentimentLexicon, SentimentScore};
use crowdreview::{Error, Language};
use proptest::prelude::*;

const POSITIVE_TEXT: &str = "Thanks, works great, excellent and helpful!";
const NEGATIVE_TEXT: &str = "Crashes: wrong output, broken error.";
const NEUTRAL_TEXT: &str = "Here is the method that reads the buffer.";

fn narrative_for(s: Sentiment) -> &'static str {
    match s {
        Sentiment::Positive => POSITIVE_TEXT,
        Sentiment::Negative => NEGATIVE_TEXT,
        Sentiment::Neutral => NEUTRAL_TEXT,
    }
}

fn post(post_type: PostType, score: i64) -> SoPost {
    SoPost {
        post_id: 1,
        post_type,
        parent_id: None,
        score,
        tags: vec!["java".into()],
        title: String::new(),
        body: String::new(),
    }
}

/// Hand-derived with thresholds ⟨1, 1.9⟩: rows are (type, score) and the
/// columns are the narrative decided Positive, Negative, Neutral.
const TABLE: [(PostType, i64, [i32; 3]); 10] = [
    (PostType::Question, -3, [1, -1, 300]),
    (PostType::Question, 0, [1, -1, 300]),
    (PostType::Question, 1, [1, -1, 300]),
    (PostType::Question, 2, [-1, -1, -1]),
    (PostType::Question, 5, [-1, -1, -1]),
    (PostType::Answer, -3, [-1, -1, -1]),
    (PostType::Answer, 0, [-1, -1, -1]),
    (PostType::Answer, 1, [-1, -1, -1]),
    (PostType::Answer, 2, [1, -1, 1]),
    (PostType::Answer, 5, [1, -1, 1]),
];

const SENTIMENTS: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];

#[test]
fn fixture_narratives_decide_as_intended() {
    let lex = SentimentLexicon::embedded();
    for s in SENTIMENTS {
        assert_eq!(
            decide(&analyze(narrative_for(s), &lex)),
            s,
            "{}",
            narrative_for(s)
        );
    }
}

#[test]
fn decision_table_is_complete() {
    let lex = SentimentLexicon::embedded();
    let t = DefectThresholds::default();
    let mut cases = 0;
    for (post_type, score, expected) in TABLE {
        for (s, want) in SENTIMENTS.into_iter().zip(expected) {
            let p = post(post_type, score);
            assert_eq!(
                estimate(post_type, score as f64, s, &t).value(),
                want,
                "{post_type:?} {score} {s:?}"
            );
            assert_eq!(estimate_post(&p, narrative_for(s), &t, &lex).value(), want);
            cases += 1;
        }
    }
    assert_eq!(cases, 30);
}

#[test]
fn score_and_label_mappings() {
    assert_eq!(narrative_score(Sentiment::Negative).value(), -1);
    assert_eq!(narrative_score(Sentiment::Positive).value(), 1);
    assert_eq!(narrative_score(Sentiment::Neutral).value(), 300);
    assert_eq!(label(-1).unwrap(), DefectLabel::LikelyDefective);
    assert_eq!(label(1).unwrap(), DefectLabel::UnlikelyDefective);
    assert_eq!(label(300).unwrap(), DefectLabel::Unpredictable);
    assert!(matches!(label(0), Err(Error::InvalidScore(0))));
    assert!(serde_json::from_str::<DefectScore>("2").is_err());
    assert_eq!(
        serde_json::to_string(&DefectScore::UNPREDICTABLE).unwrap(),
        "300"
    );
}

proptest! {
    #[test]
    fn estimate_properties(score in -1000.0f64..1000.0, q in -5.0f64..5.0, a in -5.0f64..5.0) {
        let t = DefectThresholds { question_score: q, answer_score: a };
        for pt in [PostType::Question, PostType::Answer] {
            for s in SENTIMENTS {
                prop_assert!(DefectScore::ALL.contains(&estimate(pt, score, s, &t)));
            }
        }
        // Answers: a negative narrative never scores above a positive one.
        let pos = estimate(PostType::Answer, score, Sentiment::Positive, &t);
        let neg = estimate(PostType::Answer, score, Sentiment::Negative, &t);
        prop_assert!(neg <= pos);
        if score > q {
            for s in SENTIMENTS {
                prop_assert_eq!(estimate(PostType::Question, score, s, &t), DefectScore::LIKELY_DEFECTIVE);
            }
        }
    }
}

#[test]
fn decide_examples() {
    assert_eq!(
        decide(&SentimentScore::new(0.6, 0.1, 0.3)),
        Sentiment::Positive
    );
    assert_eq!(
        decide(&SentimentScore::new(0.1, 0.2, 0.7)),
        Sentiment::Neutral
    );
    assert_eq!(
        decide(&SentimentScore::new(0.45, 0.45, 0.10)),
        Sentiment::Neutral
    );
    assert_eq!(
        decide(&SentimentScore::new(0.1, 0.6, 0.3)),
        Sentiment::Negative
    );
}

/// Every point of the 0.01 simplex grid matches at most one clause, and
/// decide returns that clause or the fallback.
#[test]
fn decide_grid() {
    let mut counts = [0usize; 3];
    for i in 0..=100u32 {
        for j in 0..=(100 - i) {
            let k = 100 - i - j;
            let (pos, neg, neu) = (i as f64 / 100.0, j as f64 / 100.0, k as f64 / 100.0);
            let clauses = [
                (2 * i >= 100 && i > j, Sentiment::Positive),
                (2 * j >= 100 && j > i, Sentiment::Negative),
                (
                    2 * k >= 100 && 2 * i < 100 && 2 * j < 100,
                    Sentiment::Neutral,
                ),
            ];
            let matched: Vec<Sentiment> = clauses.iter().filter(|c| c.0).map(|c| c.1).collect();
            assert!(matched.len() <= 1);
            let want = matched.first().copied().unwrap_or(Sentiment::Neutral);
            let got = decide(&SentimentScore::new(pos, neg, neu));
            assert_eq!(got, want, "({i}, {j}, {k})");
            counts[got as usize] += 1;
        }
    }
    assert_eq!(counts.iter().sum::<usize>(), 5151);
}

fn lexicon_words() -> Vec<String> {
    let lex = SentimentLexicon::embedded();
    include_str!("../src/data/lexicon.tsv")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split('\t').next())
        .filter(|w| lex.valence(w) != 0.0)
        .map(str::to_string)
        .chain(["not", "never", "very", "really", "the", "code", "loop", "x"].map(String::from))
        .collect()
}

proptest! {
    #[test]
    fn analyze_is_on_the_simplex_and_antisymmetric(picks in proptest::collection::vec(0usize..10_000, 0..40)) {
        let words = lexicon_words();
        let text: Vec<&str> = picks.iter().map(|&i| words[i % words.len()].as_str()).collect();
        let text = text.join(" ");
        let lex = SentimentLexicon::embedded();
        let s = analyze(&text, &lex);
        prop_assert!(s.is_valid());
        prop_assert!((s.pos + s.neg + s.neu - 1.0).abs() < 1e-9);
        let flipped = analyze(&text, &lex.negated());
        prop_assert!((flipped.pos - s.neg).abs() < 1e-12 && (flipped.neg - s.pos).abs() < 1e-12);
        let swap = |x: Sentiment| match x {
            Sentiment::Positive => Sentiment::Negative,
            Sentiment::Negative => Sentiment::Positive,
            Sentiment::Neutral => Sentiment::Neutral,
        };
        prop_assert_eq!(decide(&flipped), swap(decide(&s)));
    }
}

#[test]
fn analyze_examples() {
    let lex = SentimentLexicon::embedded();
    let s = analyze("", &lex);
    assert_eq!((s.pos, s.neg, s.neu), (0.0, 0.0, 1.0));
    let s = analyze("great excellent helpful", &lex);
    assert!(s.pos > s.neg && s.pos > 0.5);
    let good = SentimentLexicon::from_tsv("good\t1.9\n").unwrap();
    let s = analyze("not good", &good);
    assert!(s.neg > s.pos);
    assert!(SentimentLexicon::from_tsv("bad\t-4.5\n").is_err());
}

#[test]
fn fragments_are_scored_from_their_own_narrative() {
    let mut q = post(PostType::Question, 0);
    q.post_id = 4;
    q.title = "Loop issue".into();
    let frag = |frag_id, text: &str| CodeFragment {
        post_id: 4,
        frag_id,
        language: Language::Java,
        preceding_text: text.into(),
        code: "x".into(),
    };
    let posts = [(4, q)].into_iter().collect();
    let orphan = CodeFragment {
        post_id: 99,
        ..frag(0, "")
    };
    let out = score_fragments(
        &[frag(0, NEGATIVE_TEXT), frag(1, POSITIVE_TEXT), orphan],
        &posts,
        &DefectThresholds::default(),
        &SentimentLexicon::embedded(),
    );
    assert_eq!(out.len(), 2);
    assert_eq!(out[0].delta.value(), -1);
    assert_eq!(out[1].delta.value(), 1);
    assert_eq!(out[1].title, "Loop issue");
}

#[test]
fn statistics_per_language_and_type() {
    let posts: Vec<SoPost> = [
        (PostType::Question, 1),
        (PostType::Question, 3),
        (PostType::Answer, 5),
    ]
    .into_iter()
    .map(|(t, s)| post(t, s))
    .collect();
    let stats = score_statistics(&posts);
    let q = stats[&(Language::Java, "Question".to_string())];
    assert_eq!((q.count, q.min, q.max), (2, 1, 3));
    assert_eq!(q.avg, 2.0);
    assert_eq!(q.stddev, 1.0);
    assert_eq!(stats[&(Language::Java, "Answer".to_string())].count, 1);
}
