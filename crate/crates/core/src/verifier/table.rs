use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;

/// Exact probability: an integer count over an integer total.
pub type Probability = Ratio<u64>;

/// A conditional distribution over small integer outcomes, stored exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionTable {
    event: String,
    outcome_labels: Vec<&'static str>,
    entries: BTreeMap<Vec<u64>, Probability>,
}

impl DistributionTable {
    /// Normalizes raw counts. Zero counts are dropped; an all-zero table is
    /// rejected since it conditions on an impossible event.
    pub fn from_counts(
        event: impl Into<String>,
        outcome_labels: Vec<&'static str>,
        counts: impl IntoIterator<Item = (Vec<u64>, u64)>,
    ) -> Option<Self> {
        let counts: Vec<_> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        let total: u64 = counts.iter().map(|(_, c)| c).sum();
        if total == 0 {
            return None;
        }
        let mut entries = BTreeMap::new();
        for (outcome, c) in counts {
            debug_assert_eq!(outcome.len(), outcome_labels.len());
            *entries.entry(outcome).or_insert(0) += c;
        }
        let entries = entries.into_iter().map(|(k, c)| (k, Probability::new(c, total))).collect();
        Some(Self { event: event.into(), outcome_labels, entries })
    }

    pub fn event(&self) -> &str {
        &self.event
    }

    pub fn outcome_labels(&self) -> &[&'static str] {
        &self.outcome_labels
    }

    pub fn entries(&self) -> &BTreeMap<Vec<u64>, Probability> {
        &self.entries
    }

    pub fn probability(&self, outcome: &[u64]) -> Probability {
        self.entries.get(outcome).copied().unwrap_or_else(|| Probability::from_integer(0))
    }

    pub fn total(&self) -> Probability {
        self.entries.values().fold(Probability::from_integer(0), |a, b| a + b)
    }
}

impl fmt::Display for DistributionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "  Pr[{} | {}]", self.outcome_labels.join(", "), self.event)?;
        for (outcome, pr) in &self.entries {
            let cells: Vec<String> = outcome.iter().map(u64::to_string).collect();
            writeln!(f, "    ({}) -> {}", cells.join(", "), pr)?;
        }
        Ok(())
    }
}
