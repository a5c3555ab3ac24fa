use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::markov::{simulate, MarkovSpec};
use crate::seqcore::{Alphabet, Sequence, SequenceSet};
use crate::{Error, Result};

/// Bumped whenever the generated chains change.
pub const CATALOG_VERSION: &str = "1";

/// Self-transition probability of every state that does not vary.
pub const BASE_SELF_PROB: f64 = 0.97;

/// Dirichlet concentration used when lifting chains to higher orders.
pub const LIFT_CONCENTRATION: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Clusters differ in which states occur.
    State,
    /// Clusters share states but differ in how long they last.
    Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Overlap {
    Low,
    Medium,
    High,
}

impl Overlap {
    pub const ALL: [Overlap; 3] = [Overlap::Low, Overlap::Medium, Overlap::High];

    /// Self-transition probabilities of the varying states, one per cluster.
    pub fn duration_levels(self) -> [f64; 3] {
        match self {
            Overlap::Low => [0.90, 0.97, 0.99],
            Overlap::Medium => [0.93, 0.97, 0.99],
            Overlap::High => [0.95, 0.97, 0.985],
        }
    }
}

impl fmt::Display for Overlap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Overlap::Low => "low",
            Overlap::Medium => "medium",
            Overlap::High => "high",
        })
    }
}

impl FromStr for Overlap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Overlap::Low),
            "medium" => Ok(Overlap::Medium),
            "high" => Ok(Overlap::High),
            other => Err(Error::Parse(format!("unknown overlap level `{other}`"))),
        }
    }
}

/// Identifies one row of the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ScenarioKey {
    pub family: Family,
    pub overlap: Overlap,
    /// Number of states whose duration varies; 0 for the state family.
    pub varying_states: usize,
}

impl ScenarioKey {
    pub fn state(overlap: Overlap) -> Self {
        Self {
            family: Family::State,
            overlap,
            varying_states: 0,
        }
    }

    pub fn duration(overlap: Overlap, varying_states: usize) -> Self {
        Self {
            family: Family::Duration,
            overlap,
            varying_states,
        }
    }

    /// All twelve scenarios: state overlap first, then duration with one,
    /// two and three varying states.
    pub fn catalog() -> Vec<Self> {
        let mut out: Vec<Self> = Overlap::ALL.iter().map(|&o| Self::state(o)).collect();
        for v in 1..=3 {
            out.extend(Overlap::ALL.iter().map(|&o| Self::duration(o, v)));
        }
        out
    }

    /// Short type label, e.g. `state` or `dur2`.
    pub fn kind(&self) -> String {
        match self.family {
            Family::State => "state".into(),
            Family::Duration => format!("dur{}", self.varying_states),
        }
    }
}

impl fmt::Display for ScenarioKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.kind(), self.overlap)
    }
}

impl FromStr for ScenarioKey {
    type Err = Error;

    /// Parses labels such as `state-low` or `dur2-medium`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, overlap) = s.split_once('-').ok_or_else(|| {
            Error::Parse(format!(
                "scenario `{s}` is not of the form <type>-<overlap>"
            ))
        })?;
        let overlap = overlap.parse()?;
        if kind == "state" {
            return Ok(Self::state(overlap));
        }
        match kind.strip_prefix("dur").map(str::parse::<usize>) {
            Some(Ok(v @ 1..=3)) => Ok(Self::duration(overlap, v)),
            _ => Err(Error::Parse(format!("unknown scenario type `{kind}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub key: ScenarioKey,
    pub alphabet: Alphabet,
    /// One generating chain per true cluster.
    pub clusters: Vec<MarkovSpec>,
    pub n_sequences: usize,
    pub seq_len: usize,
}

/// First-order chain over `m` states in which `self_prob[s]` is kept on the
/// diagonal for active states and the rest is spread evenly over the other
/// active states. The chain starts uniformly on an active state.
fn chain(m: usize, active: &[usize], self_prob: &[f64]) -> Result<MarkovSpec> {
    let mut matrix = vec![0.0; m * m];
    let mut initial = vec![0.0; m];
    for (i, &s) in active.iter().enumerate() {
        initial[s] = 1.0 / active.len() as f64;
        let q = self_prob[i];
        let off = (1.0 - q) / (active.len() - 1) as f64;
        for &t in active {
            matrix[s * m + t] = if t == s { q } else { off };
        }
    }
    // Inactive states are unreachable; give them a valid absorbing row.
    for s in (0..m).filter(|s| !active.contains(s)) {
        matrix[s * m + s] = 1.0;
    }
    MarkovSpec::first_order(matrix, initial)
}

/// Concrete first-order chains for a catalog entry, with 100 sequences of
/// length 200 (rounded down to a multiple of the cluster count).
pub fn build_scenario(key: ScenarioKey) -> Result<ScenarioSpec> {
    let (alphabet, clusters) = match key.family {
        Family::State => {
            let sets: Vec<Vec<usize>> = match key.overlap {
                Overlap::Low => vec![vec![0, 1], vec![2, 3]],
                Overlap::Medium => vec![vec![0, 1], vec![0, 2], vec![0, 3]],
                Overlap::High => vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
            };
            let clusters = sets
                .iter()
                .map(|s| chain(4, s, &vec![BASE_SELF_PROB; s.len()]))
                .collect::<Result<_>>()?;
            (Alphabet::new(["A", "B", "C", "D"])?, clusters)
        }
        Family::Duration => {
            let v = key.varying_states;
            if !(1..=3).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "between one and three states can vary, got {v}"
                )));
            }
            let clusters = key
                .overlap
                .duration_levels()
                .iter()
                .map(|&q| {
                    let probs: Vec<f64> = (0..3)
                        .map(|s| if s < v { q } else { BASE_SELF_PROB })
                        .collect();
                    chain(3, &[0, 1, 2], &probs)
                })
                .collect::<Result<_>>()?;
            (Alphabet::new(["A", "B", "C"])?, clusters)
        }
    };
    ScenarioSpec {
        key,
        alphabet,
        clusters,
        n_sequences: 0,
        seq_len: 0,
    }
    .with_size(100, 200)
}

impl ScenarioSpec {
    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn order(&self) -> usize {
        self.clusters[0].order()
    }

    /// Sets the dataset size. The sequence count is rounded down to a
    /// multiple of the cluster count so every cluster gets the same number.
    pub fn with_size(mut self, n_sequences: usize, seq_len: usize) -> Result<Self> {
        let p = self.clusters.len();
        if n_sequences < p {
            return Err(Error::InvalidParameter(format!(
                "{n_sequences} sequences cannot cover {p} clusters"
            )));
        }
        if seq_len < 2 {
            return Err(Error::InvalidParameter(
                "sequences need at least two positions".into(),
            ));
        }
        self.n_sequences = n_sequences - n_sequences % p;
        self.seq_len = seq_len;
        Ok(self)
    }

    /// Lifts every cluster chain to order `k`; order 1 is returned as is.
    /// Every cluster lifts from the same random stream, so clusters over the
    /// same active states share their off-diagonal splits and still differ
    /// only where their first-order chains differ.
    pub fn with_order(mut self, k: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("order must be at least 1".into()));
        }
        if k == 1 {
            return Ok(self);
        }
        let rng = ChaCha8Rng::seed_from_u64(seed);
        self.clusters = self
            .clusters
            .iter()
            .map(|c| c.lift(k, LIFT_CONCENTRATION, &mut rng.clone()))
            .collect::<Result<_>>()?;
        Ok(self)
    }

    /// Draws one dataset: equal numbers of sequences per cluster, in cluster
    /// order, with their true labels.
    pub fn generate<R: Rng>(&self, rng: &mut R) -> Result<(SequenceSet, Vec<usize>)> {
        let per = self.n_sequences / self.clusters.len();
        let mut seqs = Vec::with_capacity(self.n_sequences);
        let mut labels = Vec::with_capacity(self.n_sequences);
        for (k, spec) in self.clusters.iter().enumerate() {
            for _ in 0..per {
                let i = seqs.len();
                let states = simulate(spec, self.seq_len, rng);
                seqs.push(Sequence::new(
                    format!("seq{i:04}"),
                    format!("c{k}"),
                    states,
                )?);
                labels.push(k);
            }
        }
        Ok((SequenceSet::new(self.alphabet.clone(), seqs)?, labels))
    }
}
