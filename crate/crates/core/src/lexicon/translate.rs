use std::collections::HashSet;

use super::{BilingualDictionary, CharBudget, LexiconError, TranslationBackend};
use crate::corpus::{tokenize, TokenRules};

/// Result of a dictionary-building run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TranslationOutcome {
    pub dictionary: BilingualDictionary,
    /// Words whose translation was a phrase.
    pub skipped_multiword: usize,
    /// Words the backend could not translate, or whose translation was
    /// empty after token cleaning.
    pub skipped_unavailable: usize,
    /// Characters charged against the budget.
    pub charged_chars: u64,
}

/// Translates `words` one at a time and keeps single-token answers.
///
/// Sources and translations both go through `rules`, so dictionary words
/// line up with embedding vocabularies. Repeated source words are sent
/// once. Before each billable request the budget is charged with the
/// source word's character count; when it would run out the call fails
/// with [`LexiconError::BudgetExceeded`], carrying the index of the first
/// untranslated word and everything gathered up to that point.
pub fn translate_batch<S: AsRef<str>>(
    words: &[S],
    backend: &mut dyn TranslationBackend,
    budget: &mut CharBudget,
    rules: &TokenRules,
) -> Result<TranslationOutcome, LexiconError> {
    let mut out = TranslationOutcome::default();
    let mut submitted = HashSet::new();

    for (index, raw) in words.iter().enumerate() {
        let raw = raw.as_ref();
        let source = match tokenize(raw, rules).as_slice() {
            [one] => one.clone(),
            _ => return Err(LexiconError::NotSingleToken(raw.to_owned())),
        };
        if !submitted.insert(source.clone()) {
            continue;
        }

        if !backend.is_cached(&source) {
            let chars = source.chars().count() as u64;
            if let Err(which) = budget.try_consume(chars) {
                return Err(LexiconError::BudgetExceeded {
                    index,
                    which,
                    partial: Box::new(out),
                });
            }
            budget.persist()?;
            out.charged_chars += chars;
        }

        let translation = match backend.translate(&source) {
            Ok(Some(t)) => t,
            Ok(None) | Err(_) => {
                out.skipped_unavailable += 1;
                continue;
            }
        };
        match tokenize(&translation, rules).as_slice() {
            [target] => {
                out.dictionary.insert(source, target.clone())?;
            }
            [] => out.skipped_unavailable += 1,
            _ => out.skipped_multiword += 1,
        }
    }
    Ok(out)
}
