use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BudgetLimit, LexiconError};

/// Character quota for a paid translation service.
///
/// Counters only grow within a period and never exceed their limits. The
/// daily counter resets when [`CharBudget::advance_to`] sees a new day and
/// the monthly counter when it sees a new month. If a store path is set,
/// the state is written back after every charge so it survives restarts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharBudget {
    pub daily_limit: u64,
    pub monthly_limit: u64,
    consumed_today: u64,
    consumed_month: u64,
    /// `YYYY-MM-DD` of the current period, if known.
    day: Option<String>,
    #[serde(skip)]
    store: Option<PathBuf>,
}

impl Default for CharBudget {
    fn default() -> Self {
        CharBudget::new(1_000_000, 10_000_000)
    }
}

impl CharBudget {
    pub fn new(daily_limit: u64, monthly_limit: u64) -> Self {
        CharBudget {
            daily_limit,
            monthly_limit,
            consumed_today: 0,
            consumed_month: 0,
            day: None,
            store: None,
        }
    }

    /// Budget with counters already advanced, e.g. restored from elsewhere.
    /// Counters are clamped to the limits.
    pub fn with_consumed(mut self, today: u64, month: u64) -> Self {
        self.consumed_today = today.min(self.daily_limit);
        self.consumed_month = month.min(self.monthly_limit).max(self.consumed_today.min(self.monthly_limit));
        self
    }

    pub fn consumed_today(&self) -> u64 {
        self.consumed_today
    }

    pub fn consumed_month(&self) -> u64 {
        self.consumed_month
    }

    pub fn remaining(&self) -> u64 {
        (self.daily_limit - self.consumed_today).min(self.monthly_limit - self.consumed_month)
    }

    /// Moves to the period containing `day` (`YYYY-MM-DD`), resetting
    /// counters whose period has ended.
    pub fn advance_to(&mut self, day: &str) {
        let month = |d: &str| d.get(..7).map(str::to_owned);
        match &self.day {
            Some(current) if current == day => {}
            Some(current) => {
                if month(current) != month(day) {
                    self.consumed_month = 0;
                }
                self.consumed_today = 0;
                self.day = Some(day.to_owned());
            }
            None => self.day = Some(day.to_owned()),
        }
    }

    /// Reserves `chars` characters, or reports which limit would be
    /// crossed. Nothing is consumed on failure.
    pub fn try_consume(&mut self, chars: u64) -> Result<(), BudgetLimit> {
        if self.consumed_today + chars > self.daily_limit {
            return Err(BudgetLimit::Daily);
        }
        if self.consumed_month + chars > self.monthly_limit {
            return Err(BudgetLimit::Monthly);
        }
        self.consumed_today += chars;
        self.consumed_month += chars;
        Ok(())
    }

    /// Loads persisted counters from `path` (fresh counters if the file does
    /// not exist) and keeps `path` as the store. Limits are taken from the
    /// arguments, not the file.
    pub fn open(path: impl Into<PathBuf>, daily_limit: u64, monthly_limit: u64) -> Result<Self, LexiconError> {
        let path = path.into();
        let mut budget = match fs::read_to_string(&path) {
            Ok(text) => {
                let saved: CharBudget =
                    serde_json::from_str(&text).map_err(|e| LexiconError::BudgetState(e.to_string()))?;
                let mut b = CharBudget::new(daily_limit, monthly_limit)
                    .with_consumed(saved.consumed_today, saved.consumed_month);
                b.day = saved.day;
                b
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => CharBudget::new(daily_limit, monthly_limit),
            Err(e) => return Err(e.into()),
        };
        budget.store = Some(path);
        Ok(budget)
    }

    /// Writes the state to the store path, if any.
    pub fn persist(&self) -> Result<(), LexiconError> {
        match &self.store {
            Some(path) => self.save(path),
            None => Ok(()),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), LexiconError> {
        let json = serde_json::to_string_pretty(self).map_err(|e| LexiconError::BudgetState(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, json)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_are_never_crossed() {
        let mut b = CharBudget::new(10, 15);
        assert!(b.try_consume(6).is_ok());
        assert_eq!(b.try_consume(5), Err(BudgetLimit::Daily));
        assert!(b.try_consume(4).is_ok());
        assert_eq!(b.consumed_today(), 10);
        b.advance_to("2026-01-02");
        b.advance_to("2026-01-03");
        assert_eq!(b.consumed_today(), 0);
        assert_eq!(b.try_consume(6), Err(BudgetLimit::Monthly));
        assert!(b.try_consume(5).is_ok());
        b.advance_to("2026-02-01");
        assert_eq!((b.consumed_today(), b.consumed_month()), (0, 0));
    }

    #[test]
    fn counters_survive_restart() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("budget.json");
        let mut b = CharBudget::open(&path, 100, 1000).unwrap();
        b.advance_to("2026-03-04");
        b.try_consume(42).unwrap();
        b.persist().unwrap();

        let mut again = CharBudget::open(&path, 100, 1000).unwrap();
        assert_eq!(again.consumed_today(), 42);
        again.advance_to("2026-03-04");
        assert_eq!(again.remaining(), 58);
        again.advance_to("2026-03-05");
        assert_eq!(again.consumed_month(), 42);
        assert_eq!(again.consumed_today(), 0);
    }

    #[test]
    fn corrupt_state_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("budget.json");
        fs::write(&path, "{not json").unwrap();
        assert!(matches!(CharBudget::open(&path, 1, 1), Err(LexiconError::BudgetState(_))));
    }
}
