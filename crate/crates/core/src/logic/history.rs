use serde::Serialize;

use super::formula::{normalize, Formula};
use super::pvalue::PValueRecord;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HistoryEntry {
    pub test_name: String,
    #[serde(serialize_with = "crate::logic::serialize_display")]
    pub hypothesis: Formula,
    pub pvalue: PValueRecord,
}

impl HistoryEntry {
    /// Builds an entry; the hypothesis is stored normalized.
    pub fn new(test_name: impl Into<String>, hypothesis: &Formula, pvalue: PValueRecord) -> Self {
        HistoryEntry {
            test_name: test_name.into(),
            hypothesis: normalize(hypothesis),
            pvalue,
        }
    }
}

/// What precedes the recorded entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum HistoryBase {
    /// Nothing: the history started out empty (`is_empty (!st)`).
    #[default]
    Empty,
    /// Whatever tests ran before the current function; not inspectable.
    Opaque,
}

/// Tests executed so far, newest first.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TestHistory {
    pub entries: Vec<HistoryEntry>,
    pub base: HistoryBase,
}

impl TestHistory {
    pub fn empty() -> Self {
        TestHistory::default()
    }

    pub fn opaque() -> Self {
        TestHistory {
            entries: Vec::new(),
            base: HistoryBase::Opaque,
        }
    }

    pub fn from_entries(entries: Vec<HistoryEntry>) -> Self {
        TestHistory {
            entries,
            base: HistoryBase::Empty,
        }
    }

    pub fn push(&mut self, entry: HistoryEntry) {
        self.entries.insert(0, entry);
    }

    pub fn cons(&self, entry: HistoryEntry) -> Self {
        let mut next = self.clone();
        next.push(entry);
        next
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.base == HistoryBase::Empty
    }

    pub fn iter(&self) -> impl Iterator<Item = &HistoryEntry> {
        self.entries.iter()
    }
}
