//! Coverage / Quality / Freshness scoring and the unigram overlap metric.
//!
//! All components are normalized to [0, 1] and the total is the weighted sum
//! `w_C * C + w_Q * Q + w_F * F`. Quality itself mixes accuracy, consistency
//! and proactive success. Freshness decays exponentially with the age of the
//! agent's data index.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::DomainId;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Component weights and decay rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreWeights {
    pub w_coverage: f64,
    pub w_quality: f64,
    pub w_freshness: f64,
    /// Quality mix: accuracy.
    pub alpha: f64,
    /// Quality mix: consistency.
    pub beta: f64,
    /// Quality mix: proactive success.
    pub gamma: f64,
    /// Freshness decay per second of index age.
    pub lambda: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            w_coverage: 0.3,
            w_quality: 0.5,
            w_freshness: 0.2,
            alpha: 0.5,
            beta: 0.3,
            gamma: 0.2,
            lambda: 1.0 / (7.0 * 86_400.0),
        }
    }
}

impl ScoreWeights {
    pub fn validate(&self) -> Result<(), ScoreError> {
        for (name, v) in [
            ("w_coverage", self.w_coverage),
            ("w_quality", self.w_quality),
            ("w_freshness", self.w_freshness),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ScoreError::OutOfRange { name, value: v });
            }
        }
        if self.lambda < 0.0 {
            return Err(ScoreError::OutOfRange { name: "lambda", value: self.lambda });
        }
        let w = self.w_coverage + self.w_quality + self.w_freshness;
        if (w - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(ScoreError::UnnormalizedWeights { which: "w_C + w_Q + w_F", sum: w });
        }
        let q = self.alpha + self.beta + self.gamma;
        if (q - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(ScoreError::UnnormalizedWeights { which: "alpha + beta + gamma", sum: q });
        }
        Ok(())
    }
}

/// Fully resolved score for one agent in one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub coverage: f64,
    pub accuracy: f64,
    pub consistency: f64,
    pub proactive_rate: f64,
    pub quality: f64,
    pub freshness: f64,
    pub total: f64,
    pub utilized_domains: usize,
    pub available_domains: usize,
    /// Seconds between the world clock and the agent's index.
    pub index_age: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("available domain set is empty")]
    EmptyAvailable,
    #[error("utilized domains are not a subset of available domains")]
    UtilizedNotSubset,
    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("{which} must sum to 1, got {sum}")]
    UnnormalizedWeights { which: &'static str, sum: f64 },
    #[error("reference token sequence is empty")]
    EmptyReference,
}

fn check_unit(name: &'static str, value: f64) -> Result<f64, ScoreError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(ScoreError::OutOfRange { name, value });
    }
    Ok(value)
}

/// Fraction of available data domains the agent effectively utilized.
pub fn coverage(
    utilized: &BTreeSet<DomainId>,
    available: &BTreeSet<DomainId>,
) -> Result<f64, ScoreError> {
    if available.is_empty() {
        return Err(ScoreError::EmptyAvailable);
    }
    if !utilized.is_subset(available) {
        return Err(ScoreError::UtilizedNotSubset);
    }
    Ok(utilized.len() as f64 / available.len() as f64)
}

/// Weighted mix of accuracy, consistency and proactive success.
pub fn quality(
    accuracy: f64,
    consistency: f64,
    proactive_rate: f64,
    weights: &ScoreWeights,
) -> Result<f64, ScoreError> {
    weights.validate()?;
    check_unit("accuracy", accuracy)?;
    check_unit("consistency", consistency)?;
    check_unit("proactive_rate", proactive_rate)?;
    Ok(weights.alpha * accuracy + weights.beta * consistency + weights.gamma * proactive_rate)
}

/// Exponential time decay of the agent's data index age.
pub fn freshness(index_age_secs: f64, lambda: f64) -> Result<f64, ScoreError> {
    if index_age_secs < 0.0 {
        return Err(ScoreError::OutOfRange { name: "index_age", value: index_age_secs });
    }
    if lambda < 0.0 {
        return Err(ScoreError::OutOfRange { name: "lambda", value: lambda });
    }
    Ok((-lambda * index_age_secs).exp())
}

/// Raw per-epoch observations that feed the total score.
#[derive(Debug, Clone)]
pub struct ScoreInputs {
    pub utilized: BTreeSet<DomainId>,
    pub available: BTreeSet<DomainId>,
    pub accuracy: f64,
    pub consistency: f64,
    pub proactive_rate: f64,
    pub index_age: u64,
}

/// Combines all components into the weighted total.
pub fn total_score(inputs: &ScoreInputs, weights: &ScoreWeights) -> Result<ScoreBreakdown, ScoreError> {
    weights.validate()?;
    let coverage = coverage(&inputs.utilized, &inputs.available)?;
    let quality = quality(inputs.accuracy, inputs.consistency, inputs.proactive_rate, weights)?;
    let freshness = freshness(inputs.index_age as f64, weights.lambda)?;
    let total =
        weights.w_coverage * coverage + weights.w_quality * quality + weights.w_freshness * freshness;
    Ok(ScoreBreakdown {
        coverage,
        accuracy: inputs.accuracy,
        consistency: inputs.consistency,
        proactive_rate: inputs.proactive_rate,
        quality,
        freshness,
        total,
        utilized_domains: inputs.utilized.len(),
        available_domains: inputs.available.len(),
        index_age: inputs.index_age,
    })
}

/// Unigram multiset recall of `reference` tokens in `candidate`.
pub fn text_overlap(candidate: &[String], reference: &[String]) -> Result<f64, ScoreError> {
    if reference.is_empty() {
        return Err(ScoreError::EmptyReference);
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for token in candidate {
        *counts.entry(token.as_str()).or_insert(0) += 1;
    }
    let mut hits = 0usize;
    for token in reference {
        if let Some(n) = counts.get_mut(token.as_str()) {
            if *n > 0 {
                *n -= 1;
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / reference.len() as f64)
}

/// Lowercased alphanumeric tokens of a free-text answer.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn domains(list: &[DomainId]) -> BTreeSet<DomainId> {
        list.iter().copied().collect()
    }

    #[test]
    fn coverage_edges_and_ratio() {
        let all = domains(&DomainId::ALL);
        assert_eq!(coverage(&BTreeSet::new(), &all).unwrap(), 0.0);
        assert_eq!(coverage(&all, &all).unwrap(), 1.0);
        // 3 of 6 available domains utilized = 0.5.
        let six = domains(&DomainId::ALL[..6]);
        let three = domains(&DomainId::ALL[..3]);
        assert_eq!(coverage(&three, &six).unwrap(), 0.5);

        assert_eq!(coverage(&all, &BTreeSet::new()), Err(ScoreError::EmptyAvailable));
        let outside = domains(&[DomainId::AiChat]);
        let available = domains(&[DomainId::Social]);
        assert_eq!(coverage(&outside, &available), Err(ScoreError::UtilizedNotSubset));
    }

    #[test]
    fn quality_matches_hand_arithmetic() {
        let w = ScoreWeights::default();
        assert_eq!(quality(1.0, 1.0, 1.0, &w).unwrap(), 1.0);
        assert_eq!(quality(0.0, 0.0, 0.0, &w).unwrap(), 0.0);
        // 0.5*0.8 + 0.3*0.6 + 0.2*0.4 = 0.40 + 0.18 + 0.08 = 0.66.
        let q = quality(0.8, 0.6, 0.4, &w).unwrap();
        assert!((q - 0.66).abs() < 1e-12);

        assert!(quality(1.2, 0.0, 0.0, &w).is_err());
        let mut bad = ScoreWeights::default();
        bad.alpha = 0.9;
        assert!(quality(0.5, 0.5, 0.5, &bad).is_err());
    }

    #[test]
    fn freshness_analytic_points() {
        assert_eq!(freshness(0.0, 0.25).unwrap(), 1.0);
        assert_eq!(freshness(1e9, 0.0).unwrap(), 1.0);
        // Half-life: e^(-lambda * ln2/lambda) = 0.5.
        let lambda = 1.0 / (7.0 * 86_400.0);
        let half_life = std::f64::consts::LN_2 / lambda;
        assert!((freshness(half_life, lambda).unwrap() - 0.5).abs() < 1e-12);
        assert!(freshness(-1.0, 0.1).is_err());
    }

    #[test]
    fn total_equals_weighted_sum() {
        let w = ScoreWeights::default();
        let inputs = ScoreInputs {
            utilized: domains(&[DomainId::Social, DomainId::Web3]),
            available: domains(&[DomainId::Social, DomainId::Web3, DomainId::Finance]),
            accuracy: 0.8,
            consistency: 0.6,
            proactive_rate: 0.4,
            index_age: 0,
        };
        let b = total_score(&inputs, &w).unwrap();
        // C = 2/3, Q = 0.66, F = 1.
        assert!((b.total - (0.3 * 2.0 / 3.0 + 0.5 * 0.66 + 0.2)).abs() < 1e-12);
        assert_eq!(b.utilized_domains, 2);
        assert_eq!(b.available_domains, 3);
    }

    #[test]
    fn default_weight_reproduction() {
        // 0.3*0.5 + 0.5*0.66 + 0.2*0.5 = 0.58 with the default weights.
        let w = ScoreWeights::default();
        let got = w.w_coverage * 0.5 + w.w_quality * 0.66 + w.w_freshness * 0.5;
        assert!((got - 0.58).abs() < 1e-12);
    }

    #[test]
    fn overlap_counts_unigram_recall() {
        let t = |s: &str| tokenize(s);
        assert_eq!(text_overlap(&t("a b c"), &t("a b c")).unwrap(), 1.0);
        assert_eq!(text_overlap(&t("x y"), &t("a b")).unwrap(), 0.0);
        // candidate "a b" against reference "a b c d": 2 of 4 tokens recalled.
        assert_eq!(text_overlap(&t("a b"), &t("a b c d")).unwrap(), 0.5);
        // Multiset semantics: one candidate "a" covers only one reference "a".
        assert_eq!(text_overlap(&t("a"), &t("a a")).unwrap(), 0.5);
        assert_eq!(text_overlap(&t("a"), &[]), Err(ScoreError::EmptyReference));
    }

    #[test]
    fn weight_sensitivity_quality_only() {
        let mut w = ScoreWeights::default();
        w.w_coverage = 0.0;
        w.w_quality = 1.0;
        w.w_freshness = 0.0;
        let inputs = ScoreInputs {
            utilized: BTreeSet::new(),
            available: domains(&DomainId::ALL),
            accuracy: 0.7,
            consistency: 0.2,
            proactive_rate: 0.9,
            index_age: 123_456,
        };
        let b = total_score(&inputs, &w).unwrap();
        assert_eq!(b.total, b.quality);
    }

    proptest! {
        #[test]
        fn components_stay_in_unit_range(
            acc in 0.0..=1.0f64,
            cons in 0.0..=1.0f64,
            pro in 0.0..=1.0f64,
            age in 0u64..10_000_000,
            n_util in 0usize..=7,
        ) {
            let w = ScoreWeights::default();
            let inputs = ScoreInputs {
                utilized: domains(&DomainId::ALL[..n_util]),
                available: domains(&DomainId::ALL),
                accuracy: acc,
                consistency: cons,
                proactive_rate: pro,
                index_age: age,
            };
            let b = total_score(&inputs, &w).unwrap();
            for v in [b.coverage, b.quality, b.freshness, b.total] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn total_monotone_in_each_component(
            acc in 0.0..0.9f64,
            bump in 0.01..0.1f64,
            age in 0u64..5_000_000,
        ) {
            let w = ScoreWeights::default();
            let base = ScoreInputs {
                utilized: domains(&DomainId::ALL[..3]),
                available: domains(&DomainId::ALL),
                accuracy: acc,
                consistency: 0.5,
                proactive_rate: 0.5,
                index_age: age,
            };
            let mut better = base.clone();
            better.accuracy = acc + bump;
            prop_assert!(total_score(&better, &w).unwrap().total >= total_score(&base, &w).unwrap().total);

            let mut fresher = base.clone();
            fresher.index_age = age / 2;
            prop_assert!(total_score(&fresher, &w).unwrap().total >= total_score(&base, &w).unwrap().total);
        }

        #[test]
        fn freshness_strictly_decreasing(age in 1u64..5_000_000) {
            let lambda = 1.0 / 86_400.0;
            prop_assert!(freshness((age + 1) as f64, lambda).unwrap() < freshness(age as f64, lambda).unwrap());
        }

        #[test]
        fn quality_is_linear_in_scale(k in 0.0..=1.0f64, x in 0.0..=1.0f64, y in 0.0..=1.0f64, z in 0.0..=1.0f64) {
            let w = ScoreWeights::default();
            let scaled = quality(k * x, k * y, k * z, &w).unwrap();
            let direct = k * quality(x, y, z, &w).unwrap();
            prop_assert!((scaled - direct).abs() < 1e-12);
        }
    }
}
