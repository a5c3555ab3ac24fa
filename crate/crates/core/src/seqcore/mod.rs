//! Alphabets, sequences and dataset preparation.
//!
//! A [`Sequence`] stores state indices into an [`Alphabet`]; every sequence in
//! a [`SequenceSet`] shares the alphabet and the sequence length `l`.

mod ingest;
mod io;
mod prep;

use std::collections::HashMap;

use chrono::NaiveDate;

use crate::{Error, Result};

pub use ingest::{episodes_to_sequence, ingest_episodes, DaySpan, Episode};
pub use io::{read_episodes_csv, read_sequences_csv, write_sequences_csv};
pub use prep::{concat_weeks, filter_dataset, hwto_mapping, map_states, FilterRules, WeekConcat};

/// Largest supported alphabet. State indices are stored as bytes.
pub const MAX_STATES: usize = 255;

/// Ordered set of distinct state labels. The order fixes the row and column
/// order of every adjacency matrix built over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, u8>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(Error::Alphabet(format!(
                "need at least 2 states, got {}",
                symbols.len()
            )));
        }
        if symbols.len() > MAX_STATES {
            return Err(Error::Alphabet(format!(
                "at most {MAX_STATES} states are supported, got {}",
                symbols.len()
            )));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::Alphabet("empty state label".into()));
            }
            if index.insert(s.clone(), i as u8).is_some() {
                return Err(Error::Alphabet(format!("duplicate state label `{s}`")));
            }
        }
        Ok(Self { symbols, index })
    }

    /// Alphabet of the distinct labels, sorted lexicographically.
    pub fn infer<'a>(labels: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut distinct: Vec<&str> = labels.into_iter().collect();
        distinct.sort_unstable();
        distinct.dedup();
        Self::new(distinct)
    }

    /// Parses either a comma separated list (`Home,Work`) or, when no comma is
    /// present, one state per character (`HWTO`).
    pub fn parse(spec: &str) -> Result<Self> {
        if spec.contains(',') {
            Self::new(spec.split(',').map(str::trim))
        } else {
            Self::new(spec.chars().map(String::from))
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: u8) -> &str {
        &self.symbols[index as usize]
    }

    pub fn index_of(&self, label: &str) -> Option<u8> {
        self.index.get(label).copied()
    }

    /// True when every label is a single character, so sequences can be
    /// written in compact string form.
    pub fn is_single_char(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }

    /// Encodes a compact string (`"HHWWH"`) into state indices.
    pub fn encode(&self, compact: &str) -> Result<Vec<u8>> {
        compact
            .chars()
            .map(|c| {
                let mut buf = [0u8; 4];
                self.index_of(c.encode_utf8(&mut buf))
                    .ok_or_else(|| Error::Parse(format!("state `{c}` is not in the alphabet")))
            })
            .collect()
    }
}

/// One categorical sequence. Each position represents `quantum_minutes` of
/// time.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub id: String,
    pub group_id: String,
    states: Vec<u8>,
    pub quantum_minutes: u32,
    /// Calendar date of the first position, when the sequence came from
    /// episode data.
    pub date: Option<NaiveDate>,
    /// Set when some interval had no episode coverage; such positions carry
    /// the nearest observed state.
    pub missing: bool,
}

impl Sequence {
    pub fn new(
        id: impl Into<String>,
        group_id: impl Into<String>,
        states: Vec<u8>,
    ) -> Result<Self> {
        let id = id.into();
        if states.len() < 2 {
            return Err(Error::Sequence {
                id,
                reason: format!("length must be at least 2, got {}", states.len()),
            });
        }
        Ok(Self {
            id,
            group_id: group_id.into(),
            states,
            quantum_minutes: 5,
            date: None,
            missing: false,
        })
    }

    pub fn with_quantum(mut self, minutes: u32) -> Self {
        self.quantum_minutes = minutes;
        self
    }

    pub fn with_date(mut self, date: NaiveDate) -> Self {
        self.date = Some(date);
        self
    }

    pub fn states(&self) -> &[u8] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Renders the sequence with the alphabet's labels, concatenated.
    pub fn to_compact(&self, alphabet: &Alphabet) -> String {
        self.states.iter().map(|&s| alphabet.symbol(s)).collect()
    }
}

/// A nonempty collection of sequences sharing one alphabet and one length.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    alphabet: Alphabet,
    sequences: Vec<Sequence>,
    len: usize,
}

impl SequenceSet {
    pub fn new(alphabet: Alphabet, sequences: Vec<Sequence>) -> Result<Self> {
        let first = sequences
            .first()
            .ok_or_else(|| Error::EmptyDataset(String::new()))?;
        let len = first.len();
        let m = alphabet.len();
        for seq in &sequences {
            if seq.len() != len {
                return Err(Error::Sequence {
                    id: seq.id.clone(),
                    reason: format!("length {} differs from common length {len}", seq.len()),
                });
            }
            if let Some(&bad) = seq.states.iter().find(|&&s| s as usize >= m) {
                return Err(Error::Sequence {
                    id: seq.id.clone(),
                    reason: format!("state index {bad} outside alphabet of size {m}"),
                });
            }
        }
        Ok(Self {
            alphabet,
            sequences,
            len,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.sequences
    }

    pub fn into_sequences(self) -> Vec<Sequence> {
        self.sequences
    }

    /// Number of sequences `n`.
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Common sequence length `l`.
    pub fn seq_len(&self) -> usize {
        self.len
    }

    /// Alphabet size `m`.
    pub fn n_states(&self) -> usize {
        self.alphabet.len()
    }

    /// New set holding the sequences at `indices`, in that order. Indices may
    /// repeat.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.sequences.len()) {
            return Err(Error::InvalidParameter(format!(
                "sequence index {bad} is out of range for {} sequences",
                self.sequences.len()
            )));
        }
        let sequences = indices.iter().map(|&i| self.sequences[i].clone()).collect();
        Self::new(self.alphabet.clone(), sequences)
    }

    /// Distinct group ids in order of first appearance.
    pub fn groups(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.sequences
            .iter()
            .map(|s| s.group_id.as_str())
            .filter(|g| seen.insert(*g))
            .collect()
    }

    /// Indices of each group's sequences, groups in order of first
    /// appearance.
    pub fn group_members(&self) -> Vec<(&str, Vec<usize>)> {
        let mut index = std::collections::HashMap::new();
        let mut out: Vec<(&str, Vec<usize>)> = Vec::new();
        for (i, s) in self.sequences.iter().enumerate() {
            let slot = *index.entry(s.group_id.as_str()).or_insert_with(|| {
                out.push((s.group_id.as_str(), Vec::new()));
                out.len() - 1
            });
            out[slot].1.push(i);
        }
        out
    }
}
