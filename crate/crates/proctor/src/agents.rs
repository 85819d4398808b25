//! Simulated personal-AI policies.
//!
//! Policies never touch the world directly: they answer from an
//! [`AgentWorldView`] projected by the harness, which is how the on-device
//! boundary is modeled. Honest policies only claim facts their memory table
//! can back; adversarial ones fabricate, accept planted decoys, or share
//! provider receipts.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exam::{
    build_memory_table, template_by_name, ExamTask, MemoryEntry, MemoryValue, QueryKind,
};
use crate::seed::SeedStream;
use crate::world::{DomainId, NeedKind, Record, UserWorld, DAY_SECS, VENUES};

/// Fallback answer used whenever a policy has no data to ground a task.
/// Shared verbatim by every policy so that a no-data personalized run and a
/// baseline run are indistinguishable.
pub const GENERIC_ANSWER: &str =
    "No personal data available for this request; offering a general suggestion instead.";

/// Agent behavior kinds and their parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentPolicy {
    /// Full, fresh view; answers truthfully.
    Oracle,
    /// Honest, but only the listed domains are connected.
    Partial { domains: BTreeSet<DomainId> },
    /// Honest, but the local index lags the world clock.
    Stale { lag: u64 },
    /// No personal data at all (control).
    Baseline,
    /// Claims invented values for every fact it is asked about.
    Fabricator,
    /// Honest data, but also asserts any promo fact planted in prompt
    /// side channels.
    DecoyAccepter,
    /// Shares provider receipts with its ring and asserts planted promos;
    /// otherwise answers like Oracle.
    Colluder { ring: u32 },
}

impl AgentPolicy {
    /// Policies whose claims are always backed by their own view.
    pub fn is_honest(&self) -> bool {
        matches!(
            self,
            AgentPolicy::Oracle
                | AgentPolicy::Partial { .. }
                | AgentPolicy::Stale { .. }
                | AgentPolicy::Baseline
        )
    }

    /// Accepts side-channel promos as true facts.
    fn trusts_side_channel(&self) -> bool {
        matches!(self, AgentPolicy::DecoyAccepter | AgentPolicy::Colluder { .. })
    }
}

/// What one agent can see of the world: a domain- and time-filtered record
/// projection plus pipeline failure flags.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentWorldView {
    pub accessible_domains: BTreeSet<DomainId>,
    /// Freshness of the agent's local index.
    pub index_time: u64,
    pub records: BTreeMap<DomainId, Vec<Record>>,
    pub extraction_failures: BTreeSet<DomainId>,
}

impl AgentWorldView {
    pub fn latest(&self, domain: DomainId, key: &str) -> Option<&Record> {
        self.records.get(&domain).and_then(|list| list.iter().rev().find(|r| r.key == key))
    }

    pub fn domain_records(&self, domain: DomainId) -> &[Record] {
        self.records.get(&domain).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn record_count(&self) -> usize {
        self.records.values().map(Vec::len).sum()
    }
}

/// Projects the world into what the policy is allowed to see.
pub fn project_view(world: &UserWorld, policy: &AgentPolicy) -> AgentWorldView {
    let accessible: BTreeSet<DomainId> = match policy {
        AgentPolicy::Baseline => BTreeSet::new(),
        AgentPolicy::Partial { domains } => domains.clone(),
        _ => DomainId::ALL.into_iter().collect(),
    };
    let index_time = match policy {
        AgentPolicy::Stale { lag } => world.current_time.saturating_sub(*lag),
        _ => world.current_time,
    };
    let mut records = BTreeMap::new();
    for domain in &accessible {
        let list: Vec<Record> = world
            .domain_records(*domain)
            .iter()
            .filter(|r| r.timestamp <= index_time)
            .cloned()
            .collect();
        records.insert(*domain, list);
    }
    AgentWorldView {
        accessible_domains: accessible.clone(),
        index_time,
        records,
        extraction_failures: world.failed_domains.intersection(&accessible).copied().collect(),
    }
}

/// A promo planted in the prompt side channel during delivery. Honest
/// policies ignore these; decoy-accepting ones assert them as facts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideNote {
    pub domain: DomainId,
    pub key: String,
    pub value: String,
}

/// One unprompted suggestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suggestion {
    pub kind: NeedKind,
    pub proposed_time: u64,
}

/// A (domain, key, value) assertion the grader can check via the connector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimedFact {
    pub domain: DomainId,
    pub key: String,
    pub value: String,
}

/// An agent's graded answer to one task.
#[derive(Debug, Clone, PartialEq)]
pub struct AnswerSubmission {
    pub task_ref: String,
    pub answer_text: String,
    pub claimed_facts: Vec<ClaimedFact>,
    pub proactive: Option<Suggestion>,
    pub agent_id: String,
    pub epoch: u64,
}

/// Delivery context for one answer.
#[derive(Debug, Clone)]
pub struct AnswerContext<'a> {
    pub task_ref: String,
    pub side_notes: &'a [SideNote],
    pub agent_id: &'a str,
    pub epoch: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum AgentError {
    #[error("proactive horizon must be positive")]
    NonPositiveHorizon,
}

fn table_value<'t>(table: &'t [MemoryEntry], domain: DomainId, key: &str) -> Option<&'t str> {
    table.iter().find(|e| e.category == domain && e.key == key).and_then(|e| match &e.value {
        MemoryValue::Value(v) => Some(v.as_str()),
        _ => None,
    })
}

/// Renders a grounded answer from resolved fact values. The grader builds
/// reference answers with the same renderer, so a fully-informed agent's
/// text matches the reference exactly.
pub fn render_answer(task: &ExamTask, values: &[String]) -> String {
    if values.is_empty() {
        return GENERIC_ANSWER.to_string();
    }
    format!("{}: {}", task.task_name, values.join("; "))
}

/// Renders a level-3 plan in the `key=value` form the grader parses.
pub fn render_plan(venue: &str, cost: f64, diet: &str, coupon_key: &str) -> String {
    format!("plan venue={venue}; cost={cost:.2}; diet={diet}; coupon={coupon_key}")
}

/// Picks the cheapest venue compatible with the dietary tag and budget after
/// the flat 10% coupon discount.
pub fn pick_venue(diet: &str, budget: f64) -> Option<(&'static str, f64)> {
    VENUES
        .iter()
        .filter(|(_, tag, price)| *tag == diet && price * 0.9 <= budget)
        .min_by(|a, b| a.2.partial_cmp(&b.2).expect("venue prices are finite"))
        .map(|(name, _, price)| (*name, price * 0.9))
}

/// Answers one exam task. Deterministic given (policy, view, task, stream).
pub fn answer_task(
    policy: &AgentPolicy,
    view: &AgentWorldView,
    task: &ExamTask,
    ctx: &AnswerContext<'_>,
    rng: &mut SeedStream,
) -> AnswerSubmission {
    let mut submission = AnswerSubmission {
        task_ref: ctx.task_ref.clone(),
        answer_text: GENERIC_ANSWER.to_string(),
        claimed_facts: Vec::new(),
        proactive: None,
        agent_id: ctx.agent_id.to_string(),
        epoch: ctx.epoch,
    };
    if *policy == AgentPolicy::Baseline {
        return submission;
    }
    let Some(template) = template_by_name(&task.task_name) else {
        return submission;
    };

    let table = build_memory_table(view);
    let mut values = Vec::new();
    for (domain, key) in template.facts {
        let claimed = match policy {
            AgentPolicy::Fabricator => {
                let invented: u64 = rng.gen();
                Some(format!("fab-{invented:016x}"))
            }
            _ => table_value(&table, *domain, key).map(str::to_string),
        };
        if let Some(value) = claimed {
            values.push(value.clone());
            submission.claimed_facts.push(ClaimedFact {
                domain: *domain,
                key: (*key).to_string(),
                value,
            });
        }
    }

    if policy.trusts_side_channel() {
        for note in ctx.side_notes {
            submission.claimed_facts.push(ClaimedFact {
                domain: note.domain,
                key: note.key.clone(),
                value: note.value.clone(),
            });
        }
    }

    match template.kind {
        QueryKind::Recall | QueryKind::Link => {
            submission.answer_text = render_answer(task, &values);
        }
        QueryKind::Plan => {
            let budget = table_value(&table, DomainId::Finance, "budget_limit")
                .and_then(|v| v.parse::<f64>().ok());
            let diet = table_value(&table, DomainId::DailyLife, "dietary_restriction");
            let coupon_key = ctx
                .side_notes
                .first()
                .filter(|_| policy.trusts_side_channel())
                .map(|n| n.key.as_str())
                .unwrap_or("coupon_code");
            match (budget, diet) {
                (Some(budget), Some(diet)) => match pick_venue(diet, budget) {
                    Some((venue, cost)) => {
                        submission.answer_text = render_plan(venue, cost, diet, coupon_key);
                    }
                    None => submission.answer_text = GENERIC_ANSWER.to_string(),
                },
                _ => {
                    // A fabricator plans over its invented values; honest
                    // agents without the facts fall back to the generic line.
                    if *policy == AgentPolicy::Fabricator {
                        submission.answer_text =
                            render_plan("Cedar Grill", 49.99, "omnivore", coupon_key);
                    }
                }
            }
        }
        QueryKind::Proactive => {
            if let Some(deadline) = table_value(&table, DomainId::Productivity, "project_deadline")
                .and_then(|v| v.parse::<u64>().ok())
            {
                let proposed_time = deadline.saturating_sub(2 * DAY_SECS).max(view.index_time + 1);
                submission.proactive =
                    Some(Suggestion { kind: NeedKind::DeadlineBlock, proposed_time });
                submission.answer_text = render_answer(task, &values);
            }
        }
    }
    submission
}

/// Detects a fixed-period recurrence (±1 day tolerance, ≥ 3 occurrences) in
/// the timestamps and returns (period, last occurrence).
fn detect_recurrence(timestamps: &[u64]) -> Option<(u64, u64)> {
    if timestamps.len() < 3 {
        return None;
    }
    let diffs: Vec<u64> = timestamps.windows(2).map(|w| w[1] - w[0]).collect();
    let period = diffs[0];
    if period == 0 {
        return None;
    }
    if diffs.iter().all(|d| d.abs_diff(period) <= DAY_SECS) {
        Some((period, *timestamps.last().expect("non-empty")))
    } else {
        None
    }
}

/// Emits unprompted suggestions for needs the policy can anticipate within
/// the horizon, capped at `budget` suggestions.
pub fn propose_proactive(
    policy: &AgentPolicy,
    view: &AgentWorldView,
    horizon: u64,
    budget: u32,
) -> Result<Vec<Suggestion>, AgentError> {
    if horizon == 0 {
        return Err(AgentError::NonPositiveHorizon);
    }
    if *policy == AgentPolicy::Baseline {
        return Ok(Vec::new());
    }
    let now = view.index_time;
    let mut suggestions = Vec::new();

    let dinner_ts: Vec<u64> = view
        .domain_records(DomainId::DailyLife)
        .iter()
        .filter(|r| r.key == "friday_dinner_venue")
        .map(|r| r.timestamp)
        .collect();
    if let Some((period, last)) = detect_recurrence(&dinner_ts) {
        let mut next = last + period;
        while next <= now {
            next += period;
        }
        while next <= now + horizon {
            suggestions.push(Suggestion {
                kind: NeedKind::DinnerReservation,
                proposed_time: next - 3_600,
            });
            next += period;
        }
    }

    if let Some(deadline) = view
        .latest(DomainId::Productivity, "project_deadline")
        .and_then(|r| r.value.parse::<u64>().ok())
    {
        if deadline > now && deadline <= now + horizon {
            suggestions.push(Suggestion {
                kind: NeedKind::DeadlineBlock,
                proposed_time: deadline.saturating_sub(2 * DAY_SECS).max(now + 1),
            });
        }
    }

    suggestions.sort_by_key(|s| (s.proposed_time, s.kind));
    suggestions.truncate(budget as usize);
    Ok(suggestions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exam::{design_exam, CurriculumConfig, LevelCounts};
    use crate::seed::stream;
    use crate::world::{connector_query, generate_world, MinimalSignal, WorldConfig};

    fn world(seed: u64) -> UserWorld {
        generate_world(seed, &WorldConfig::default())
    }

    fn ctx<'a>(task_ref: &str, notes: &'a [SideNote]) -> AnswerContext<'a> {
        AnswerContext { task_ref: task_ref.to_string(), side_notes: notes, agent_id: "a-1", epoch: 1 }
    }

    fn first_task(world: &UserWorld, counts: LevelCounts) -> ExamTask {
        let mut rng = stream(world.seed, &["exam"]);
        design_exam(world, &CurriculumConfig { counts }, &mut rng).unwrap().tasks[0].clone()
    }

    #[test]
    fn oracle_view_is_identity_projection() {
        let w = world(7);
        let view = project_view(&w, &AgentPolicy::Oracle);
        assert_eq!(view.records, w.records);
        assert_eq!(view.index_time, w.current_time);
    }

    #[test]
    fn full_lag_stale_sees_only_epoch_start() {
        let w = world(7);
        let view = project_view(&w, &AgentPolicy::Stale { lag: w.current_time });
        assert!(view.records.values().flatten().all(|r| r.timestamp == 0));
    }

    #[test]
    fn partial_view_filters_domains() {
        let w = world(9);
        let only = BTreeSet::from([DomainId::Productivity]);
        let view = project_view(&w, &AgentPolicy::Partial { domains: only });
        assert!(view.domain_records(DomainId::Shopping).is_empty());
        assert!(!view.domain_records(DomainId::Productivity).is_empty());
        assert!(view.record_count() <= w.all_records().count());
    }

    #[test]
    fn oracle_claim_verifies_against_connector() {
        let w = world(11);
        let task = first_task(&w, LevelCounts { level1: 1, level2: 0, level3: 0 });
        let view = project_view(&w, &AgentPolicy::Oracle);
        let sub =
            answer_task(&AgentPolicy::Oracle, &view, &task, &ctx("p/0", &[]), &mut stream(11, &["a"]));
        assert_eq!(sub.claimed_facts.len(), 1);
        let claim = &sub.claimed_facts[0];
        assert_eq!(
            connector_query(&w, claim.domain, &claim.key, &claim.value),
            MinimalSignal::Verified
        );
        assert!(sub.answer_text.contains(&claim.value));
    }

    #[test]
    fn baseline_claims_nothing() {
        let w = world(13);
        let task = first_task(&w, LevelCounts { level1: 1, level2: 0, level3: 0 });
        let view = project_view(&w, &AgentPolicy::Baseline);
        let sub = answer_task(
            &AgentPolicy::Baseline,
            &view,
            &task,
            &ctx("p/0", &[]),
            &mut stream(13, &["a"]),
        );
        assert!(sub.claimed_facts.is_empty());
        assert_eq!(sub.answer_text, GENERIC_ANSWER);
    }

    #[test]
    fn fabricator_claims_never_verify() {
        let w = world(17);
        let task = first_task(&w, LevelCounts { level1: 1, level2: 0, level3: 0 });
        let view = project_view(&w, &AgentPolicy::Fabricator);
        let sub = answer_task(
            &AgentPolicy::Fabricator,
            &view,
            &task,
            &ctx("p/0", &[]),
            &mut stream(17, &["a"]),
        );
        for claim in &sub.claimed_facts {
            let signal = connector_query(&w, claim.domain, &claim.key, &claim.value);
            assert!(matches!(signal, MinimalSignal::Incorrect | MinimalSignal::NonExist));
        }
    }

    #[test]
    fn only_side_channel_trusting_policies_assert_decoys() {
        let w = world(19);
        let task = first_task(&w, LevelCounts { level1: 1, level2: 0, level3: 0 });
        let notes = vec![SideNote {
            domain: DomainId::Shopping,
            key: "coupon_promo_deadbeef".to_string(),
            value: "FLASH50".to_string(),
        }];
        for policy in [
            AgentPolicy::Oracle,
            AgentPolicy::Stale { lag: DAY_SECS },
            AgentPolicy::Baseline,
            AgentPolicy::Fabricator,
        ] {
            let view = project_view(&w, &policy);
            let sub = answer_task(&policy, &view, &task, &ctx("p/0", &notes), &mut stream(1, &["a"]));
            assert!(
                sub.claimed_facts.iter().all(|c| c.key != "coupon_promo_deadbeef"),
                "{policy:?} asserted a decoy"
            );
        }
        for policy in [AgentPolicy::DecoyAccepter, AgentPolicy::Colluder { ring: 0 }] {
            let view = project_view(&w, &policy);
            let sub = answer_task(&policy, &view, &task, &ctx("p/0", &notes), &mut stream(1, &["a"]));
            assert!(sub.claimed_facts.iter().any(|c| c.key == "coupon_promo_deadbeef"));
        }
    }

    #[test]
    fn plan_respects_budget_and_diet() {
        let w = world(23);
        let task = first_task(&w, LevelCounts { level1: 0, level2: 0, level3: 1 });
        let view = project_view(&w, &AgentPolicy::Oracle);
        let sub =
            answer_task(&AgentPolicy::Oracle, &view, &task, &ctx("p/0", &[]), &mut stream(2, &["a"]));
        assert!(sub.answer_text.starts_with("plan venue="));
        assert!(sub.answer_text.contains(&format!("diet={}", w.preference_profile.dietary_restriction)));
        assert!(sub.answer_text.contains("coupon=coupon_code"));
        assert_eq!(sub.claimed_facts.len(), 3);
    }

    #[test]
    fn oracle_suggests_one_dinner_per_week() {
        let w = world(29);
        let view = project_view(&w, &AgentPolicy::Oracle);
        let suggestions =
            propose_proactive(&AgentPolicy::Oracle, &view, 7 * DAY_SECS, 3).unwrap();
        let dinners: Vec<_> =
            suggestions.iter().filter(|s| s.kind == NeedKind::DinnerReservation).collect();
        assert_eq!(dinners.len(), 1);
        let need = w
            .latent_needs
            .iter()
            .find(|n| n.kind == NeedKind::DinnerReservation)
            .expect("default world has dinner needs");
        assert!(dinners[0].proposed_time <= need.target_time);
        assert!(dinners[0].proposed_time > w.current_time);
    }

    #[test]
    fn proactive_edges() {
        let w = world(31);
        let view = project_view(&w, &AgentPolicy::Baseline);
        assert_eq!(propose_proactive(&AgentPolicy::Baseline, &view, DAY_SECS, 3).unwrap(), vec![]);
        let oracle_view = project_view(&w, &AgentPolicy::Oracle);
        assert_eq!(
            propose_proactive(&AgentPolicy::Oracle, &oracle_view, 7 * DAY_SECS, 0).unwrap(),
            vec![]
        );
        assert_eq!(
            propose_proactive(&AgentPolicy::Oracle, &oracle_view, 0, 3),
            Err(AgentError::NonPositiveHorizon)
        );
    }

    #[test]
    fn stale_agent_misses_fresh_records() {
        let w = world(37);
        let (advanced, new_records) =
            crate::world::advance_time(&w, 7 * DAY_SECS).unwrap();
        assert!(!new_records.is_empty());
        let stale_view =
            project_view(&advanced, &AgentPolicy::Stale { lag: 7 * DAY_SECS });
        for record in &new_records {
            assert!(stale_view.latest(record.domain, &record.key).map(|r| r.timestamp)
                != Some(record.timestamp));
        }
    }
}
