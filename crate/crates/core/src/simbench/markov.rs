use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use rand_distr::Gamma;

use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// An order-`k` Markov chain over `m` states.
///
/// Contexts are the last `k` states, oldest first, encoded in base `m`.
/// `transition` holds one probability row of length `m` per context.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSpec {
    order: usize,
    m: usize,
    transition: Vec<f64>,
    initial: Vec<f64>,
}

impl MarkovSpec {
    pub fn new(order: usize, m: usize, transition: Vec<f64>, initial: Vec<f64>) -> Result<Self> {
        if order == 0 || m < 2 {
            return Err(Error::InvalidParameter(format!(
                "need order >= 1 and at least two states, got order {order} with {m} states"
            )));
        }
        let contexts = m
            .checked_pow(order as u32)
            .filter(|c| c.checked_mul(m).is_some())
            .ok_or_else(|| Error::InvalidParameter(format!("order {order} is too large")))?;
        if transition.len() != contexts * m {
            return Err(Error::DimensionMismatch {
                expected: contexts * m,
                got: transition.len(),
            });
        }
        if initial.len() != contexts {
            return Err(Error::DimensionMismatch {
                expected: contexts,
                got: initial.len(),
            });
        }
        for (c, row) in transition.chunks_exact(m).enumerate() {
            check_distribution(row)
                .map_err(|e| Error::InvalidParameter(format!("context {c}: {e}")))?;
        }
        check_distribution(&initial)
            .map_err(|e| Error::InvalidParameter(format!("initial: {e}")))?;
        Ok(Self {
            order,
            m,
            transition,
            initial,
        })
    }

    /// First-order chain from a row-stochastic `m x m` matrix and an initial
    /// state distribution.
    pub fn first_order(matrix: Vec<f64>, initial: Vec<f64>) -> Result<Self> {
        let m = initial.len();
        Self::new(1, m, matrix, initial)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_states(&self) -> usize {
        self.m
    }

    pub fn n_contexts(&self) -> usize {
        self.initial.len()
    }

    /// Next-state probabilities after `context`.
    pub fn row(&self, context: usize) -> &[f64] {
        &self.transition[context * self.m..(context + 1) * self.m]
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Decodes a context index into its states, oldest first.
    pub fn context_states(&self, mut context: usize) -> Vec<u8> {
        let mut out = vec![0u8; self.order];
        for slot in out.iter_mut().rev() {
            *slot = (context % self.m) as u8;
            context /= self.m;
        }
        out
    }

    /// Raises the order to `k` by giving every context its own row. The row
    /// for a context ending in state `s` keeps `s`'s self-transition
    /// probability and redistributes the remaining mass over the other
    /// states with positive probability using a Dirichlet draw
    /// (concentration `alpha` per state). Contexts never produced by the
    /// chain keep the first-order row.
    pub fn lift<R: Rng>(&self, k: usize, alpha: f64, rng: &mut R) -> Result<Self> {
        if self.order != 1 {
            return Err(Error::InvalidParameter(
                "only first-order chains can be lifted".into(),
            ));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "concentration must be positive, got {alpha}"
            )));
        }
        let m = self.m;
        let contexts = m
            .checked_pow(k as u32)
            .ok_or_else(|| Error::InvalidParameter(format!("order {k} is too large")))?;
        let active = self.reachable();
        let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;

        let mut transition = Vec::with_capacity(contexts * m);
        let mut initial = vec![0.0; contexts];
        let mut states = vec![0usize; k];
        for (c, init) in initial.iter_mut().enumerate() {
            let mut rest = c;
            for slot in states.iter_mut().rev() {
                *slot = rest % m;
                rest /= m;
            }
            let last = states[k - 1];
            let base = self.row(last);
            let reachable = states.iter().all(|&s| active[s]);
            let targets: Vec<usize> = (0..m).filter(|&t| t != last && base[t] > 0.0).collect();
            if !reachable || targets.len() < 2 {
                transition.extend_from_slice(base);
            } else {
                let shares = dirichlet(&gamma, targets.len(), rng);
                let off_mass = 1.0 - base[last];
                let mut row = vec![0.0; m];
                row[last] = base[last];
                for (&t, share) in targets.iter().zip(&shares) {
                    row[t] = off_mass * share;
                }
                transition.extend_from_slice(&row);
            }
            if states.iter().all(|&s| s == last) {
                *init = self.initial[last];
            }
        }
        Self::new(k, m, transition, initial)
    }

    /// States reachable from the initial distribution (first order only).
    fn reachable(&self) -> Vec<bool> {
        let mut seen: Vec<bool> = self.initial.iter().map(|&p| p > 0.0).collect();
        let mut stack: Vec<usize> = (0..self.m).filter(|&s| seen[s]).collect();
        while let Some(s) = stack.pop() {
            for (t, &p) in self.row(s).iter().enumerate() {
                if p > 0.0 && !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }
}

/// Symmetric Dirichlet draw as normalised Gamma variates.
fn dirichlet<R: Rng>(gamma: &Gamma<f64>, k: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.iter().map(|x| x / total).collect()
}

fn check_distribution(p: &[f64]) -> std::result::Result<(), String> {
    if let Some(bad) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(format!("probability {bad} is negative or non-finite"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(format!("probabilities sum to {sum}"));
    }
    Ok(())
}

/// Draws a length-`l` state sequence. The first `min(k, l)` positions are
/// the states of a context drawn from the initial distribution; every later
/// position is drawn from the row of the preceding `k` states.
pub fn simulate<R: Rng>(spec: &MarkovSpec, l: usize, rng: &mut R) -> Vec<u8> {
    let m = spec.m;
    let k = spec.order;
    let initial = WeightedIndex::new(&spec.initial).expect("validated distribution");
    let mut context = initial.sample(rng);
    let mut out = spec.context_states(context);
    out.truncate(l);
    let modulus = spec.n_contexts() / m;
    while out.len() < l {
        let row = spec.row(context);
        let next = sample_row(row, rng);
        out.push(next as u8);
        context = if k == 1 {
            next
        } else {
            (context % modulus) * m + next
        };
    }
    out
}

fn sample_row<R: Rng>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (s, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = s;
            if u < acc {
                return s;
            }
        }
    }
    last_positive
}
