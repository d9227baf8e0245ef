mod support;

use lexalign::corpus::{tokenize, TokenRules};
use lexalign::embeddings::{read_text, write_text, EmbeddingError};
use lexalign::{load_embeddings, save_embeddings, train_sgns, EmbeddingTable, SgnsConfig};
use proptest::prelude::*;

fn table_strategy() -> impl Strategy<Value = EmbeddingTable> {
    (1usize..12, 1usize..20).prop_flat_map(|(dim, n)| {
        (
            prop::collection::btree_set("[a-zà-ÿ]{1,10}", n),
            prop::collection::vec(-10.0f64..10.0, n * dim),
        )
            .prop_map(move |(words, data)| {
                let words: Vec<String> = words.into_iter().collect();
                let data = data[..words.len() * dim].to_vec();
                EmbeddingTable::new(words, dim, data).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn round_trip_within_tolerance(table in table_strategy()) {
        let mut buf = Vec::new();
        write_text(&table, &mut buf).unwrap();
        let back = read_text(&buf[..]).unwrap();
        prop_assert_eq!(back.words(), table.words());
        for (a, b) in back.data().iter().zip(table.data()) {
            prop_assert!((a - b).abs() <= 1e-6);
        }
    }
}

#[test]
fn file_helpers_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.vec");
    let t = EmbeddingTable::from_rows([("ünï", vec![0.25, -1.5]), ("b", vec![3.0, 0.0])]).unwrap();
    save_embeddings(&t, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "2 2\nünï 0.25 -1.5\nb 3 0\n");
    assert_eq!(load_embeddings(&path).unwrap(), t);
    assert!(matches!(load_embeddings(dir.path().join("missing")), Err(EmbeddingError::Io(_))));
}

#[test]
fn training_on_tokenized_text_stays_finite() {
    let text = "The committee adopted the report. The council rejected the report!\n\
                Members of the committee voted; the council abstained.\n";
    let rules = TokenRules::default();
    let sentences: Vec<Vec<String>> = text.lines().cycle().take(40).map(|l| tokenize(l, &rules)).collect();
    let cfg = SgnsConfig {
        dimension: 20,
        min_count: 5,
        ..SgnsConfig::default()
    };
    let t = train_sgns(&sentences, &cfg).unwrap();
    assert!(t.data().iter().all(|x| x.is_finite()));
    let vocab = lexalign::build_vocab(sentences.iter().flatten(), 5);
    assert_eq!(t.words(), vocab.words().collect::<Vec<_>>());
}
