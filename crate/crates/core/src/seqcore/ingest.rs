use std::collections::BTreeMap;

use chrono::{NaiveDate, NaiveDateTime};
use rayon::prelude::*;

use super::{Alphabet, Sequence, SequenceSet};
use crate::{Error, Result};

/// A contiguous interval spent in one activity state.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub group_id: String,
    pub date: NaiveDate,
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub state: String,
}

impl Episode {
    pub fn new(
        group_id: impl Into<String>,
        date: NaiveDate,
        start: NaiveDateTime,
        end: NaiveDateTime,
        state: impl Into<String>,
    ) -> Result<Self> {
        let group_id = group_id.into();
        if start >= end {
            return Err(Error::InvalidParameter(format!(
                "episode for `{group_id}` starts at {start} but ends at {end}"
            )));
        }
        Ok(Self {
            group_id,
            date,
            start,
            end,
            state: state.into(),
        })
    }
}

/// Clock window of the day that is discretised, in minutes after midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DaySpan {
    pub start_minute: u32,
    pub end_minute: u32,
}

impl Default for DaySpan {
    fn default() -> Self {
        Self {
            start_minute: 0,
            end_minute: 24 * 60,
        }
    }
}

impl DaySpan {
    fn positions(&self, quantum_minutes: u32) -> Result<usize> {
        if quantum_minutes == 0 || self.end_minute <= self.start_minute {
            return Err(Error::InvalidParameter(format!(
                "invalid day span {}..{} with quantum {quantum_minutes}",
                self.start_minute, self.end_minute
            )));
        }
        let width = self.end_minute - self.start_minute;
        if !width.is_multiple_of(quantum_minutes) {
            return Err(Error::InvalidParameter(format!(
                "quantum of {quantum_minutes} min does not divide the {width} min day span"
            )));
        }
        Ok((width / quantum_minutes) as usize)
    }
}

/// Discretises one group-day of episodes into a sequence.
///
/// Each position takes the state covering most of its interval; ties go to
/// the state that covers the earliest instant of the interval. Intervals
/// with no coverage mark the sequence as missing and carry the nearest
/// observed state.
pub fn episodes_to_sequence(
    episodes: &[Episode],
    alphabet: &Alphabet,
    quantum_minutes: u32,
    span: DaySpan,
) -> Result<Sequence> {
    let first = episodes
        .first()
        .ok_or_else(|| Error::EmptyDataset(": no episodes for this day".into()))?;
    let (group, date) = (first.group_id.clone(), first.date);
    let positions = span.positions(quantum_minutes)?;
    let midnight = date.and_hms_opt(0, 0, 0).expect("midnight exists");

    // Episode bounds in seconds relative to the span start, sorted by start.
    let span_start = i64::from(span.start_minute) * 60;
    let mut bounds = Vec::with_capacity(episodes.len());
    for ep in episodes {
        if ep.group_id != group || ep.date != date {
            return Err(Error::InvalidParameter(format!(
                "episodes from several days passed together ({group} {date} and {} {})",
                ep.group_id, ep.date
            )));
        }
        let state = alphabet
            .index_of(&ep.state)
            .ok_or_else(|| Error::UnmappedState(ep.state.clone()))?;
        let s = (ep.start - midnight).num_seconds() - span_start;
        let e = (ep.end - midnight).num_seconds() - span_start;
        bounds.push((s, e, state));
    }
    bounds.sort_unstable();
    for pair in bounds.windows(2) {
        if pair[1].0 < pair[0].1 {
            return Err(Error::OverlappingEpisodes {
                group,
                date: date.to_string(),
            });
        }
    }

    let step = i64::from(quantum_minutes) * 60;
    let m = alphabet.len();
    let mut cells: Vec<Option<u8>> = Vec::with_capacity(positions);
    let mut coverage = vec![0i64; m];
    let mut earliest = vec![i64::MAX; m];
    let mut cursor = 0usize;
    for pos in 0..positions {
        let (t0, t1) = (pos as i64 * step, (pos as i64 + 1) * step);
        coverage.iter_mut().for_each(|c| *c = 0);
        earliest.iter_mut().for_each(|c| *c = i64::MAX);
        while cursor < bounds.len() && bounds[cursor].1 <= t0 {
            cursor += 1;
        }
        for &(s, e, state) in bounds[cursor..].iter().take_while(|b| b.0 < t1) {
            let (lo, hi) = (s.max(t0), e.min(t1));
            if hi > lo {
                coverage[state as usize] += hi - lo;
                earliest[state as usize] = earliest[state as usize].min(lo);
            }
        }
        let best = (0..m)
            .filter(|&k| coverage[k] > 0)
            .max_by(|&a, &b| {
                coverage[a]
                    .cmp(&coverage[b])
                    .then(earliest[b].cmp(&earliest[a]))
            })
            .map(|k| k as u8);
        cells.push(best);
    }

    let missing = cells.iter().any(Option::is_none);
    let states = fill_gaps(&cells).ok_or_else(|| Error::Sequence {
        id: format!("{group}_{date}"),
        reason: "no episode covers the day span".into(),
    })?;
    let mut seq = Sequence::new(format!("{group}_{date}"), group, states)?
        .with_quantum(quantum_minutes)
        .with_date(date);
    seq.missing = missing;
    Ok(seq)
}

fn fill_gaps(cells: &[Option<u8>]) -> Option<Vec<u8>> {
    let first = cells.iter().flatten().copied().next()?;
    let mut last = first;
    Some(
        cells
            .iter()
            .map(|c| {
                if let Some(s) = c {
                    last = *s;
                }
                last
            })
            .collect(),
    )
}

/// Groups episodes by (group, date) and discretises every day. Days are
/// returned ordered by group id, then date.
pub fn ingest_episodes(
    episodes: &[Episode],
    alphabet: Option<Alphabet>,
    quantum_minutes: u32,
    span: DaySpan,
) -> Result<SequenceSet> {
    let alphabet = match alphabet {
        Some(a) => a,
        None => Alphabet::infer(episodes.iter().map(|e| e.state.as_str()))?,
    };
    let mut days: BTreeMap<(&str, NaiveDate), Vec<Episode>> = BTreeMap::new();
    for ep in episodes {
        days.entry((ep.group_id.as_str(), ep.date))
            .or_default()
            .push(ep.clone());
    }
    let days: Vec<Vec<Episode>> = days.into_values().collect();
    let sequences = days
        .par_iter()
        .map(|eps| episodes_to_sequence(eps, &alphabet, quantum_minutes, span))
        .collect::<Result<Vec<_>>>()?;
    SequenceSet::new(alphabet, sequences)
}
