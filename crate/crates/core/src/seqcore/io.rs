//! CSV interchange for episodes and sequences.
//!
//! * episodes: `group_id,date,start_iso8601,end_iso8601,state`
//! * sequences, compact: `id,group_id,states` with one character per state
//! * sequences, wide: `id,group_id,s1,...,sl`
//!
//! The sequence layout is detected from the header.

use std::io::{Read, Write};

use chrono::{NaiveDate, NaiveDateTime};

use super::{Alphabet, Episode, Sequence, SequenceSet};
use crate::{Error, Result};

const DATETIME_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%d %H:%M",
];

fn parse_datetime(s: &str) -> Result<NaiveDateTime> {
    let s = s.trim();
    DATETIME_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .ok_or_else(|| Error::Parse(format!("cannot parse timestamp `{s}`")))
}

pub fn read_episodes_csv<R: Read>(reader: R) -> Result<Vec<Episode>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let expected = ["group_id", "date", "start_iso8601", "end_iso8601", "state"];
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse(format!(
            "episode header must be `{}`",
            expected.join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let date = NaiveDate::parse_from_str(&record[1], "%Y-%m-%d").map_err(|e| {
            Error::Parse(format!("row {}: bad date `{}`: {e}", line + 2, &record[1]))
        })?;
        out.push(Episode::new(
            &record[0],
            date,
            parse_datetime(&record[2])?,
            parse_datetime(&record[3])?,
            &record[4],
        )?);
    }
    Ok(out)
}

/// Reads a sequence table. Without an explicit alphabet the states are
/// inferred from the data and sorted lexicographically.
pub fn read_sequences_csv<R: Read>(reader: R, alphabet: Option<Alphabet>) -> Result<SequenceSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "id" || &header[1] != "group_id" {
        return Err(Error::Parse(
            "sequence header must start with `id,group_id`".into(),
        ));
    }
    let compact = header.len() == 3 && &header[2] == "states";

    let mut rows: Vec<(String, String, Vec<String>)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let labels = if compact {
            record[2].chars().map(String::from).collect()
        } else {
            record.iter().skip(2).map(str::to_string).collect()
        };
        rows.push((record[0].to_string(), record[1].to_string(), labels));
    }

    let alphabet = match alphabet {
        Some(a) => a,
        None => Alphabet::infer(rows.iter().flat_map(|r| r.2.iter().map(String::as_str)))?,
    };
    let sequences = rows
        .into_iter()
        .map(|(id, group, labels)| {
            let states = labels
                .iter()
                .map(|l| {
                    alphabet.index_of(l).ok_or_else(|| Error::Sequence {
                        id: id.clone(),
                        reason: format!("state `{l}` is not in the alphabet"),
                    })
                })
                .collect::<Result<Vec<u8>>>()?;
            Sequence::new(id.clone(), group, states)
        })
        .collect::<Result<Vec<_>>>()?;
    SequenceSet::new(alphabet, sequences)
}

/// Writes the compact layout when every label is one character, otherwise
/// the wide layout.
pub fn write_sequences_csv<W: Write>(set: &SequenceSet, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let alphabet = set.alphabet();
    if alphabet.is_single_char() {
        wtr.write_record(["id", "group_id", "states"])?;
        for s in set.sequences() {
            wtr.write_record([s.id.as_str(), s.group_id.as_str(), &s.to_compact(alphabet)])?;
        }
    } else {
        let mut header = vec!["id".to_string(), "group_id".to_string()];
        header.extend((1..=set.seq_len()).map(|j| format!("s{j}")));
        wtr.write_record(&header)?;
        for s in set.sequences() {
            let mut row = vec![s.id.as_str(), s.group_id.as_str()];
            row.extend(s.states().iter().map(|&x| alphabet.symbol(x)));
            wtr.write_record(&row)?;
        }
    }
    wtr.flush()?;
    Ok(())
}
