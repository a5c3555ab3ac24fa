use std::collections::{BTreeMap, HashMap};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Alphabet, Sequence, SequenceSet};
use crate::{Error, Result};

/// Relabels every state through `mapping`. The target alphabet is taken from
/// `target` when given, otherwise inferred (sorted) from the mapped labels.
pub fn map_states(
    set: &SequenceSet,
    mapping: &BTreeMap<String, String>,
    target: Option<&Alphabet>,
) -> Result<SequenceSet> {
    let source = set.alphabet();
    let target = match target {
        Some(a) => a.clone(),
        None => {
            let mut labels = Vec::with_capacity(source.len());
            for s in source.symbols() {
                labels.push(
                    mapping
                        .get(s)
                        .ok_or_else(|| Error::UnmappedState(s.clone()))?
                        .as_str(),
                );
            }
            Alphabet::infer(labels)?
        }
    };
    let table = source
        .symbols()
        .iter()
        .map(|s| {
            let to = mapping
                .get(s)
                .ok_or_else(|| Error::UnmappedState(s.clone()))?;
            target
                .index_of(to)
                .ok_or_else(|| Error::UnmappedState(to.clone()))
        })
        .collect::<Result<Vec<u8>>>()?;
    let sequences = set
        .sequences()
        .iter()
        .map(|seq| Sequence {
            states: seq.states.iter().map(|&s| table[s as usize]).collect(),
            ..seq.clone()
        })
        .collect();
    SequenceSet::new(target, sequences)
}

/// Collapses activity labels to Home / Work / Transport / Out. Labels that
/// start with `travel` map to `T`; `home` and `work` map to themselves; every
/// other activity is `O`.
pub fn hwto_mapping<'a>(labels: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, String> {
    labels
        .into_iter()
        .map(|label| {
            let lower = label.trim().to_ascii_lowercase();
            let to = if lower.starts_with("travel") {
                "T"
            } else if lower == "home" {
                "H"
            } else if lower == "work" {
                "W"
            } else {
                "O"
            };
            (label.to_string(), to.to_string())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterRules {
    pub drop_missing: bool,
    /// Sequences with a strictly larger share of positions in
    /// `nonhome_states` are dropped.
    pub max_nonhome_fraction: Option<f64>,
    pub nonhome_states: Vec<String>,
    /// At most this many sequences are kept per group, sampled uniformly.
    pub max_per_group: Option<usize>,
    pub seed: u64,
}

impl Default for FilterRules {
    fn default() -> Self {
        Self {
            drop_missing: true,
            max_nonhome_fraction: None,
            nonhome_states: Vec::new(),
            max_per_group: None,
            seed: 0,
        }
    }
}

impl FilterRules {
    fn validate(&self) -> Result<()> {
        if let Some(f) = self.max_nonhome_fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidParameter(format!(
                    "max_nonhome_fraction must lie in [0, 1], got {f}"
                )));
            }
        }
        if self.max_per_group == Some(0) {
            return Err(Error::InvalidParameter(
                "max_per_group must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

pub fn filter_dataset(set: &SequenceSet, rules: &FilterRules) -> Result<SequenceSet> {
    rules.validate()?;
    let alphabet = set.alphabet();
    let mut nonhome = vec![false; alphabet.len()];
    for label in &rules.nonhome_states {
        let idx = alphabet
            .index_of(label)
            .ok_or_else(|| Error::UnmappedState(label.clone()))?;
        nonhome[idx as usize] = true;
    }

    let kept: Vec<&Sequence> = set
        .sequences()
        .iter()
        .filter(|s| !(rules.drop_missing && s.missing))
        .filter(|s| match rules.max_nonhome_fraction {
            Some(limit) => {
                let away = s.states().iter().filter(|&&x| nonhome[x as usize]).count();
                away as f64 / s.len() as f64 <= limit
            }
            None => true,
        })
        .collect();

    let kept = match rules.max_per_group {
        Some(cap) => cap_per_group(kept, cap, rules.seed),
        None => kept,
    };
    if kept.is_empty() {
        return Err(Error::EmptyDataset(" after filtering".into()));
    }
    SequenceSet::new(alphabet.clone(), kept.into_iter().cloned().collect())
}

fn cap_per_group(seqs: Vec<&Sequence>, cap: usize, seed: u64) -> Vec<&Sequence> {
    let mut by_group: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in seqs.iter().enumerate() {
        by_group.entry(s.group_id.as_str()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; seqs.len()];
    for members in by_group.values() {
        if members.len() <= cap {
            members.iter().for_each(|&i| keep[i] = true);
        } else {
            for j in sample(&mut rng, members.len(), cap) {
                keep[members[j]] = true;
            }
        }
    }
    seqs.into_iter()
        .zip(keep)
        .filter_map(|(s, k)| k.then_some(s))
        .collect()
}

/// Result of [`concat_weeks`].
#[derive(Debug, Clone)]
pub struct WeekConcat {
    pub set: SequenceSet,
    /// Groups that had no complete consecutive run of the requested days.
    pub omitted_groups: usize,
}

/// Joins consecutive day sequences of one group into longer sequences, one
/// per complete run of `days` (e.g. Monday through Friday). Sequences without
/// a date never take part.
pub fn concat_weeks(set: &SequenceSet, days: &[Weekday]) -> Result<WeekConcat> {
    if days.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one weekday is required".into(),
        ));
    }
    for pair in days.windows(2) {
        if pair[0].succ() != pair[1] {
            return Err(Error::InvalidParameter(format!(
                "weekdays must be consecutive, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }

    let mut by_group: BTreeMap<&str, HashMap<NaiveDate, &Sequence>> = BTreeMap::new();
    for seq in set.sequences() {
        let entry = by_group.entry(seq.group_id.as_str()).or_default();
        if let Some(date) = seq.date {
            entry.insert(date, seq);
        }
    }

    let mut out = Vec::new();
    let mut omitted = 0;
    for (group, dated) in &by_group {
        let mut starts: Vec<NaiveDate> = dated
            .keys()
            .copied()
            .filter(|d| d.weekday() == days[0])
            .collect();
        starts.sort_unstable();
        let before = out.len();
        for start in starts {
            let run: Option<Vec<&Sequence>> = (0..days.len())
                .map(|k| dated.get(&(start + Duration::days(k as i64))).copied())
                .collect();
            let Some(run) = run else { continue };
            let states: Vec<u8> = run
                .iter()
                .flat_map(|s| s.states().iter().copied())
                .collect();
            let mut week = Sequence::new(format!("{group}_{start}"), *group, states)?
                .with_quantum(run[0].quantum_minutes)
                .with_date(start);
            week.missing = run.iter().any(|s| s.missing);
            out.push(week);
        }
        if out.len() == before {
            omitted += 1;
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyDataset(" after week concatenation".into()));
    }
    Ok(WeekConcat {
        set: SequenceSet::new(set.alphabet().clone(), out)?,
        omitted_groups: omitted,
    })
}
