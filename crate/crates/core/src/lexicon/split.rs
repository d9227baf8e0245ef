use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BilingualDictionary, LexiconError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            seed: 1,
        }
    }
}

/// Number of training pairs for a dictionary of `n` pairs: `fraction · n`
/// rounded to the nearest integer.
pub fn train_count(n: usize, fraction: f64) -> usize {
    (fraction * n as f64).round() as usize
}

/// Shuffles the pairs with a seeded permutation and cuts them into a
/// training prefix and a test remainder.
pub fn split_dictionary(
    dict: &BilingualDictionary,
    spec: &SplitSpec,
) -> Result<(BilingualDictionary, BilingualDictionary), LexiconError> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(LexiconError::InvalidFraction(spec.train_fraction));
    }
    if dict.is_empty() {
        return Err(LexiconError::EmptyDictionary);
    }
    let mut pairs = dict.pairs().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    pairs.shuffle(&mut rng);
    let test = pairs.split_off(train_count(pairs.len(), spec.train_fraction));
    Ok((
        BilingualDictionary::from_pairs(pairs)?,
        BilingualDictionary::from_pairs(test)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn numbered(n: usize) -> BilingualDictionary {
        BilingualDictionary::from_pairs((0..n).map(|i| (format!("s{i}"), format!("t{i}")))).unwrap()
    }

    #[test]
    fn seventy_thirty_rounds_to_nearest() {
        for (n, train, test) in [(6096, 4267, 1829), (8329, 5830, 2499), (3984, 2789, 1195), (8460, 5922, 2538)] {
            let (a, b) = split_dictionary(&numbered(n), &SplitSpec::default()).unwrap();
            assert_eq!((a.len(), b.len()), (train, test), "n = {n}");
        }
        // floor would give 2788
        assert_eq!((0.7 * 3984f64).floor() as usize, 2788);
    }

    #[test]
    fn invalid_inputs() {
        let spec = SplitSpec {
            train_fraction: 1.0,
            seed: 0,
        };
        assert!(matches!(split_dictionary(&numbered(3), &spec), Err(LexiconError::InvalidFraction(_))));
        assert!(matches!(
            split_dictionary(&BilingualDictionary::new(), &SplitSpec::default()),
            Err(LexiconError::EmptyDictionary)
        ));
    }

    proptest! {
        #[test]
        fn split_partitions_input(n in 1usize..300, seed in any::<u64>(), other in any::<u64>()) {
            let dict = numbered(n);
            let spec = SplitSpec { train_fraction: 0.7, seed };
            let (train, test) = split_dictionary(&dict, &spec).unwrap();
            let (train2, test2) = split_dictionary(&dict, &spec).unwrap();
            prop_assert_eq!(&train, &train2);
            prop_assert_eq!(&test, &test2);

            let mut all: Vec<_> = train.pairs().iter().chain(test.pairs()).cloned().collect();
            all.sort();
            let mut expected = dict.pairs().to_vec();
            expected.sort();
            prop_assert_eq!(&all, &expected);

            let (t3, s3) = split_dictionary(&dict, &SplitSpec { train_fraction: 0.7, seed: other }).unwrap();
            let mut all3: Vec<_> = t3.pairs().iter().chain(s3.pairs()).cloned().collect();
            all3.sort();
            prop_assert_eq!(all3, expected);
        }
    }
}
