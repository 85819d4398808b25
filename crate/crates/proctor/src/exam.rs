//! Curriculum task schema, the rule-based exam designer, and bit-exact
//! paper serialization.
//!
//! An exam paper is agent-facing text holding exactly six fields: per-level
//! `level`, `difficulty` and `tasks`, and per-task `task_name`, `prompt`,
//! `skills_tested`, `evaluation`. Grading specs bind tasks to opaque fact
//! keys and stay on the grader side; they are never serialized.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agents::AgentWorldView;
use crate::world::{DomainId, UserWorld};

const PAPER_DOMAIN: &[u8] = b"proctor.paper.v1";

/// Curriculum difficulty tier. The level fixes the difficulty label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    One,
    Two,
    Three,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::One, Level::Two, Level::Three];

    pub fn number(self) -> u8 {
        match self {
            Level::One => 1,
            Level::Two => 2,
            Level::Three => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Level> {
        match n {
            1 => Some(Level::One),
            2 => Some(Level::Two),
            3 => Some(Level::Three),
            _ => None,
        }
    }

    pub fn difficulty(self) -> &'static str {
        match self {
            Level::One => "Easy",
            Level::Two => "Medium",
            Level::Three => "Hard",
        }
    }
}

/// How the grader resolves a task against the world.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    /// Every spec fact must verify.
    Recall,
    /// Cross-source variant of Recall; same verification rule.
    Link,
    /// Facts must verify and the submitted plan must satisfy budget,
    /// dietary and coupon constraints.
    Plan,
    /// Facts must verify and a timely suggestion must be attached.
    Proactive,
}

/// Reference to one world fact by opaque key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactRef {
    pub domain: DomainId,
    pub key: String,
}

impl FactRef {
    fn new(domain: DomainId, key: &str) -> FactRef {
        FactRef { domain, key: key.to_string() }
    }
}

/// Constraint bindings for planning tasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanCheck {
    pub budget: FactRef,
    pub dietary: FactRef,
    pub coupon: FactRef,
}

/// Grader-only resolution data for one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradingSpec {
    pub kind: QueryKind,
    pub facts: Vec<FactRef>,
    pub plan: Option<PlanCheck>,
}

/// One curriculum task. `difficulty` is derived from the level, so the
/// level/difficulty pairing cannot drift.
#[derive(Debug, Clone, PartialEq)]
pub struct ExamTask {
    pub level: Level,
    pub task_name: String,
    pub prompt: String,
    pub skills_tested: String,
    pub evaluation: String,
    /// Present on designed papers; absent after parsing unknown tasks.
    pub grading_spec: Option<GradingSpec>,
}

impl ExamTask {
    pub fn difficulty(&self) -> &'static str {
        self.level.difficulty()
    }
}

/// Task count per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LevelCounts {
    pub level1: usize,
    pub level2: usize,
    pub level3: usize,
}

impl Default for LevelCounts {
    fn default() -> Self {
        LevelCounts { level1: 4, level2: 2, level3: 2 }
    }
}

impl LevelCounts {
    pub fn get(&self, level: Level) -> usize {
        match level {
            Level::One => self.level1,
            Level::Two => self.level2,
            Level::Three => self.level3,
        }
    }

    pub fn total(&self) -> usize {
        self.level1 + self.level2 + self.level3
    }
}

/// Exam design parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CurriculumConfig {
    pub counts: LevelCounts,
}

/// A designed exam: tasks plus identity metadata. The serialized agent-facing
/// form carries only the task content.
#[derive(Debug, Clone, PartialEq)]
pub struct ExamPaper {
    pub paper_id: String,
    pub epoch: u64,
    pub tasks: Vec<ExamTask>,
    pub level_counts: LevelCounts,
}

impl ExamPaper {
    /// Builds a paper from tasks, deriving level counts and the content id.
    pub fn from_tasks(epoch: u64, tasks: Vec<ExamTask>) -> Result<ExamPaper, ExamError> {
        if tasks.is_empty() {
            return Err(ExamError::EmptyPaper);
        }
        let mut level_counts = LevelCounts { level1: 0, level2: 0, level3: 0 };
        for task in &tasks {
            match task.level {
                Level::One => level_counts.level1 += 1,
                Level::Two => level_counts.level2 += 1,
                Level::Three => level_counts.level3 += 1,
            }
        }
        let mut paper = ExamPaper { paper_id: String::new(), epoch, tasks, level_counts };
        paper.paper_id = paper.compute_id();
        Ok(paper)
    }

    /// Re-stamps the paper for an epoch, refreshing the id.
    pub fn with_epoch(mut self, epoch: u64) -> ExamPaper {
        self.epoch = epoch;
        self.paper_id = self.compute_id();
        self
    }

    fn compute_id(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(PAPER_DOMAIN);
        hasher.update(self.epoch.to_le_bytes());
        hasher.update(serialize_exam(self).as_bytes());
        hex::encode(&hasher.finalize()[..16])
    }

    /// Stable reference for the task at `index`.
    pub fn task_ref(&self, index: usize) -> String {
        format!("{}/{}", self.paper_id, index)
    }

    /// Resolves a task reference produced by [`ExamPaper::task_ref`].
    pub fn resolve_ref(&self, task_ref: &str) -> Option<(usize, &ExamTask)> {
        let (paper_id, index) = task_ref.rsplit_once('/')?;
        if paper_id != self.paper_id {
            return None;
        }
        let index: usize = index.parse().ok()?;
        self.tasks.get(index).map(|t| (index, t))
    }
}

#[derive(Debug, Error)]
pub enum ExamError {
    #[error("curriculum requests no tasks at any level")]
    EmptyCurriculum,
    #[error("no instantiable template for level {level}")]
    UnsatisfiableLevel { level: u8 },
    #[error("exam paper has no tasks")]
    EmptyPaper,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error: {message}")]
    Schema { message: String },
}

// --- template library ----------------------------------------------------------

/// A versioned, parameterized exam task blueprint.
#[derive(Debug, Clone)]
pub struct TaskTemplate {
    pub level: Level,
    pub task_name: &'static str,
    pub prompt: &'static str,
    pub skills_tested: &'static str,
    pub evaluation: &'static str,
    pub kind: QueryKind,
    /// (domain, fact key) bindings the grader resolves.
    pub facts: &'static [(DomainId, &'static str)],
}

impl TaskTemplate {
    fn spec(&self) -> GradingSpec {
        let facts: Vec<FactRef> =
            self.facts.iter().map(|(d, k)| FactRef::new(*d, k)).collect();
        let plan = if self.kind == QueryKind::Plan {
            Some(PlanCheck {
                budget: facts[0].clone(),
                dietary: facts[1].clone(),
                coupon: facts[2].clone(),
            })
        } else {
            None
        };
        GradingSpec { kind: self.kind, facts, plan }
    }

    pub fn instantiate(&self) -> ExamTask {
        ExamTask {
            level: self.level,
            task_name: self.task_name.to_string(),
            prompt: self.prompt.to_string(),
            skills_tested: self.skills_tested.to_string(),
            evaluation: self.evaluation.to_string(),
            grading_spec: Some(self.spec()),
        }
    }

    /// Instantiable when every bound fact key has at least one record.
    fn eligible(&self, world: &UserWorld) -> bool {
        self.facts.iter().all(|(domain, key)| world.latest(*domain, key).is_some())
    }
}

/// The fixed template library, two canonical templates per level plus the
/// level-1 consistency probes.
pub fn templates(level: Level) -> &'static [TaskTemplate] {
    match level {
        Level::One => &[
            TaskTemplate {
                level: Level::One,
                task_name: "Single-Source Recall",
                prompt: "What was the subject of the most recent email in the user’s inbox?",
                skills_tested:
                    "Simple lookup or keyword search within a single data domain (e.g., email).",
                evaluation:
                    "GOD model confirms correctness by matching the hashed or reference-verified email subject.",
                kind: QueryKind::Recall,
                facts: &[(DomainId::Productivity, "latest_email_subject")],
            },
            TaskTemplate {
                level: Level::One,
                task_name: "Simple Personal Fact",
                prompt: "What is the user’s next calendar event?",
                skills_tested: "Direct retrieval from the user’s calendar data.",
                evaluation: "Verified by checking minimal metadata (e.g., hashed event ID).",
                kind: QueryKind::Recall,
                facts: &[(DomainId::Productivity, "next_calendar_event")],
            },
            TaskTemplate {
                level: Level::One,
                task_name: "Inbox Recall Check",
                prompt: "Recall the subject line of the newest message in the user’s mailbox.",
                skills_tested: "Repeat lookup of a single email field across phrasings.",
                evaluation: "Answer is matched against the same reference-verified email subject.",
                kind: QueryKind::Recall,
                facts: &[(DomainId::Productivity, "latest_email_subject")],
            },
            TaskTemplate {
                level: Level::One,
                task_name: "Calendar Recall Check",
                prompt: "Name the next event on the user’s calendar.",
                skills_tested: "Repeat retrieval of a single calendar field across phrasings.",
                evaluation: "Answer is matched against the same hashed event reference.",
                kind: QueryKind::Recall,
                facts: &[(DomainId::Productivity, "next_calendar_event")],
            },
        ],
        Level::Two => &[
            TaskTemplate {
                level: Level::Two,
                task_name: "Cross-Domain Linking",
                prompt:
                    "Suggest the best time to schedule a doctor’s appointment, considering both the user’s calendar and their travel plans found in email.",
                skills_tested:
                    "Merging multiple data sources (calendar events + email travel confirmations).",
                evaluation:
                    "GOD model checks whether the AI accounts for any travel conflicts and provides a valid time window.",
                kind: QueryKind::Link,
                facts: &[
                    (DomainId::Productivity, "travel_window"),
                    (DomainId::Productivity, "next_event_time"),
                ],
            },
            TaskTemplate {
                level: Level::Two,
                task_name: "Preference Integration",
                prompt:
                    "Recommend a movie for tonight, based on the user’s favorite genres, recent streaming history, and free time available.",
                skills_tested:
                    "Inference of user preferences from watch logs or ratings, alignment with schedule from calendar or location data.",
                evaluation:
                    "GOD compares the AI’s recommendation against known user preferences, measuring potential acceptance or engagement.",
                kind: QueryKind::Link,
                facts: &[
                    (DomainId::AiChat, "favorite_genre"),
                    (DomainId::Productivity, "next_event_time"),
                ],
            },
        ],
        Level::Three => &[
            TaskTemplate {
                level: Level::Three,
                task_name: "Complex Task Coordination",
                prompt:
                    "Plan a surprise birthday outing for a friend, factoring in the user’s budget, the friend’s dietary restrictions, restaurant availability, and any relevant coupons in the user’s email.",
                skills_tested:
                    "Multi-step reasoning, personal preference inference, real-time availability checks, creative event planning.",
                evaluation:
                    "GOD model verifies consistency (venue meets dietary constraints), timeliness (booked in advance), and user satisfaction signals (simulated acceptance or rating).",
                kind: QueryKind::Plan,
                facts: &[
                    (DomainId::Finance, "budget_limit"),
                    (DomainId::DailyLife, "dietary_restriction"),
                    (DomainId::Shopping, "coupon_code"),
                ],
            },
            TaskTemplate {
                level: Level::Three,
                task_name: "Proactive Alerts",
                prompt:
                    "Without a direct user request, the AI suggests blocking time for finalizing a project due next week, referencing email deadlines and calendar tasks.",
                skills_tested:
                    "Predictive modeling of user needs, balancing helpfulness with non-intrusiveness.",
                evaluation:
                    "System rates suggestions on timeliness, relevance, and effectiveness in preventing scheduling conflicts.",
                kind: QueryKind::Proactive,
                facts: &[(DomainId::Productivity, "project_deadline")],
            },
        ],
    }
}

/// Looks a task up in the template library by its public name. Rule-based
/// agents use this to map prompts back to fact keys.
pub fn template_by_name(task_name: &str) -> Option<&'static TaskTemplate> {
    Level::ALL.iter().flat_map(|l| templates(*l)).find(|t| t.task_name == task_name)
}

// --- design ---------------------------------------------------------------------

/// Designs an exam over the world. Templates whose facts are missing from the
/// world are skipped; the slot is refilled with a stream-chosen eligible
/// template. A level with a positive count and no eligible template at all is
/// an error.
pub fn design_exam(
    world: &UserWorld,
    curriculum: &CurriculumConfig,
    rng: &mut crate::seed::SeedStream,
) -> Result<ExamPaper, ExamError> {
    use rand::Rng;

    if curriculum.counts.total() == 0 {
        return Err(ExamError::EmptyCurriculum);
    }
    let mut tasks = Vec::new();
    for level in Level::ALL {
        let want = curriculum.counts.get(level);
        if want == 0 {
            continue;
        }
        let library = templates(level);
        let eligible: Vec<&TaskTemplate> =
            library.iter().filter(|t| t.eligible(world)).collect();
        if eligible.is_empty() {
            return Err(ExamError::UnsatisfiableLevel { level: level.number() });
        }
        for slot in 0..want {
            let candidate = &library[slot % library.len()];
            if candidate.eligible(world) {
                tasks.push(candidate.instantiate());
            } else {
                let replacement = eligible[rng.gen_range(0..eligible.len())];
                tasks.push(replacement.instantiate());
            }
        }
    }
    ExamPaper::from_tasks(0, tasks)
}

// --- serialization ----------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    level: u8,
    difficulty: String,
    tasks: Vec<TaskDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskDoc {
    task_name: String,
    prompt: String,
    skills_tested: String,
    evaluation: String,
}

/// Emits the agent-facing paper text: one JSON object per level in ascending
/// order, two-space indentation, keys in schema order. Grader-only fields and
/// paper metadata never appear.
pub fn serialize_exam(paper: &ExamPaper) -> String {
    let mut by_level: BTreeMap<Level, Vec<&ExamTask>> = BTreeMap::new();
    for task in &paper.tasks {
        by_level.entry(task.level).or_default().push(task);
    }
    let mut out = String::new();
    for (level, tasks) in by_level {
        let doc = LevelDoc {
            level: level.number(),
            difficulty: level.difficulty().to_string(),
            tasks: tasks
                .iter()
                .map(|t| TaskDoc {
                    task_name: t.task_name.clone(),
                    prompt: t.prompt.clone(),
                    skills_tested: t.skills_tested.clone(),
                    evaluation: t.evaluation.clone(),
                })
                .collect(),
        };
        let json = serde_json::to_string_pretty(&doc).expect("paper serializes");
        let _ = writeln!(out, "{json}");
    }
    out
}

/// Parses agent-facing paper text. Inverse of [`serialize_exam`] on its
/// image: unknown fields are rejected, the level/difficulty pairing is
/// enforced, and grading specs are rebound from the template library for
/// known task names. The returned paper carries epoch 0 and a content id.
pub fn parse_exam(text: &str) -> Result<ExamPaper, ExamError> {
    let mut tasks = Vec::new();
    let mut saw_doc = false;
    for doc in serde_json::Deserializer::from_str(text).into_iter::<LevelDoc>() {
        let doc = doc.map_err(classify_json_error)?;
        saw_doc = true;
        let level = Level::from_number(doc.level).ok_or_else(|| ExamError::Schema {
            message: format!("level {} is outside the curriculum (1-3)", doc.level),
        })?;
        if doc.difficulty != level.difficulty() {
            return Err(ExamError::Schema {
                message: format!(
                    "difficulty \"{}\" does not match level {} (expected \"{}\")",
                    doc.difficulty,
                    doc.level,
                    level.difficulty()
                ),
            });
        }
        if doc.tasks.is_empty() {
            return Err(ExamError::Schema {
                message: format!("level {} object has no tasks", doc.level),
            });
        }
        for task_doc in doc.tasks {
            let grading_spec = template_by_name(&task_doc.task_name)
                .filter(|t| t.level == level)
                .map(TaskTemplate::spec);
            tasks.push(ExamTask {
                level,
                task_name: task_doc.task_name,
                prompt: task_doc.prompt,
                skills_tested: task_doc.skills_tested,
                evaluation: task_doc.evaluation,
                grading_spec,
            });
        }
    }
    if !saw_doc {
        return Err(ExamError::Parse {
            line: 1,
            column: 1,
            message: "empty exam text".to_string(),
        });
    }
    ExamPaper::from_tasks(0, tasks)
}

fn classify_json_error(err: serde_json::Error) -> ExamError {
    if err.is_data() {
        ExamError::Schema { message: err.to_string() }
    } else {
        ExamError::Parse { line: err.line(), column: err.column(), message: err.to_string() }
    }
}

/// Collapses whitespace outside JSON string literals; used to compare paper
/// text against golden transcriptions that differ only in layout.
pub fn normalize_ws(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    for c in text.chars() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
        } else if c == '"' {
            in_string = true;
            out.push(c);
        } else if !c.is_whitespace() {
            out.push(c);
        }
    }
    out
}

// --- memory table -----------------------------------------------------------------

/// NE: verified non-existent. NA: extraction pipeline failure. Neither
/// carries a reference source and neither contributes to scores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemoryValue {
    Value(String),
    NonExist,
    NotAvailable,
}

impl MemoryValue {
    pub fn as_csv_field(&self) -> &str {
        match self {
            MemoryValue::Value(v) => v,
            MemoryValue::NonExist => "NE",
            MemoryValue::NotAvailable => "NA",
        }
    }
}

/// One key-value row of an agent's personal memory table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryEntry {
    pub category: DomainId,
    pub key: String,
    pub value: MemoryValue,
    pub ref_source: Option<String>,
}

impl MemoryEntry {
    fn special(category: DomainId, key: &str, value: MemoryValue) -> MemoryEntry {
        MemoryEntry { category, key: key.to_string(), value, ref_source: None }
    }
}

/// Builds the full taxonomy-ordered memory table for a world view: one entry
/// per (category, fact key). Keys the view cannot answer become NE; keys in
/// failed-pipeline domains become NA.
pub fn build_memory_table(view: &AgentWorldView) -> Vec<MemoryEntry> {
    let mut table = Vec::new();
    for domain in DomainId::ALL {
        for (key, _) in crate::world::fact_keys(domain) {
            if view.extraction_failures.contains(&domain) {
                table.push(MemoryEntry::special(domain, key, MemoryValue::NotAvailable));
                continue;
            }
            match view.latest(domain, key) {
                Some(record) => table.push(MemoryEntry {
                    category: domain,
                    key: (*key).to_string(),
                    value: MemoryValue::Value(record.value.clone()),
                    ref_source: Some(record.ref_source.clone()),
                }),
                None => table.push(MemoryEntry::special(domain, key, MemoryValue::NonExist)),
            }
        }
    }
    table
}

fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// Exports a memory table as CSV with an empty ref_source for NE/NA rows.
pub fn memory_table_csv(entries: &[MemoryEntry]) -> String {
    let mut out = String::from("category,key,value,ref_source\n");
    for entry in entries {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            entry.category.name(),
            csv_field(&entry.key),
            csv_field(entry.value.as_csv_field()),
            csv_field(entry.ref_source.as_deref().unwrap_or("")),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{project_view, AgentPolicy};
    use crate::seed::stream;
    use crate::world::{generate_world, WorldConfig};

    fn default_world(seed: u64) -> UserWorld {
        generate_world(seed, &WorldConfig::default())
    }

    fn curriculum(l1: usize, l2: usize, l3: usize) -> CurriculumConfig {
        CurriculumConfig { counts: LevelCounts { level1: l1, level2: l2, level3: l3 } }
    }

    #[test]
    fn level_one_paper_uses_canonical_templates() {
        let world = default_world(7);
        let mut rng = stream(7, &["exam"]);
        let paper = design_exam(&world, &curriculum(2, 0, 0), &mut rng).unwrap();
        let names: Vec<&str> = paper.tasks.iter().map(|t| t.task_name.as_str()).collect();
        assert_eq!(names, ["Single-Source Recall", "Simple Personal Fact"]);
        assert_eq!(
            paper.tasks[0].prompt,
            "What was the subject of the most recent email in the user’s inbox?"
        );
    }

    #[test]
    fn empty_curriculum_is_rejected() {
        let world = default_world(1);
        let mut rng = stream(1, &["exam"]);
        assert!(matches!(
            design_exam(&world, &curriculum(0, 0, 0), &mut rng),
            Err(ExamError::EmptyCurriculum)
        ));
    }

    #[test]
    fn design_is_deterministic() {
        let world = default_world(11);
        let c = CurriculumConfig::default();
        let a = design_exam(&world, &c, &mut stream(11, &["exam"])).unwrap();
        let b = design_exam(&world, &c, &mut stream(11, &["exam"])).unwrap();
        assert_eq!(serialize_exam(&a), serialize_exam(&b));
        assert_eq!(a, b);
    }

    #[test]
    fn unsatisfiable_level_names_the_level() {
        let mut config = WorldConfig::default();
        config.record_counts.productivity = 0;
        let world = generate_world(3, &config);
        let mut rng = stream(3, &["exam"]);
        let err = design_exam(&world, &curriculum(1, 0, 0), &mut rng).unwrap_err();
        assert!(matches!(err, ExamError::UnsatisfiableLevel { level: 1 }));
    }

    #[test]
    fn every_designed_spec_resolves_against_world() {
        let world = default_world(13);
        let mut rng = stream(13, &["exam"]);
        let paper = design_exam(&world, &CurriculumConfig::default(), &mut rng).unwrap();
        for task in &paper.tasks {
            let spec = task.grading_spec.as_ref().expect("designed tasks carry specs");
            for fact in &spec.facts {
                assert!(world.latest(fact.domain, &fact.key).is_some());
            }
        }
    }

    #[test]
    fn serialized_form_has_exactly_six_fields() {
        let world = default_world(17);
        let mut rng = stream(17, &["exam"]);
        let paper = design_exam(&world, &CurriculumConfig::default(), &mut rng).unwrap();
        let text = serialize_exam(&paper);
        for doc in serde_json::Deserializer::from_str(&text).into_iter::<serde_json::Value>() {
            let doc = doc.unwrap();
            let obj = doc.as_object().unwrap();
            let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
            assert_eq!(keys, ["level", "difficulty", "tasks"]);
            for task in obj["tasks"].as_array().unwrap() {
                let task_keys: Vec<&str> =
                    task.as_object().unwrap().keys().map(String::as_str).collect();
                assert_eq!(task_keys, ["task_name", "prompt", "skills_tested", "evaluation"]);
            }
        }
        // Grader-side fact keys never leak into the agent-facing text.
        assert!(!text.contains("latest_email_subject"));
        assert!(!text.contains("grading"));
    }

    #[test]
    fn parse_inverts_serialize() {
        let world = default_world(19);
        let mut rng = stream(19, &["exam"]);
        let paper = design_exam(&world, &CurriculumConfig::default(), &mut rng).unwrap();
        let text = serialize_exam(&paper);
        let parsed = parse_exam(&text).unwrap();
        // Specs rebind from the template library, so designed epoch-0 papers
        // round-trip exactly.
        assert_eq!(parsed, paper);
        assert_eq!(serialize_exam(&parsed), text);
    }

    #[test]
    fn level_three_paper_says_hard() {
        let world = default_world(23);
        let mut rng = stream(23, &["exam"]);
        let paper = design_exam(&world, &curriculum(0, 0, 1), &mut rng).unwrap();
        let text = serialize_exam(&paper);
        assert!(text.contains("\"difficulty\": \"Hard\""));
    }

    #[test]
    fn parse_rejects_empty_and_malformed_input() {
        assert!(matches!(parse_exam(""), Err(ExamError::Parse { .. })));
        assert!(matches!(parse_exam("{ not json"), Err(ExamError::Parse { .. })));
    }

    #[test]
    fn parse_rejects_unknown_field_by_name() {
        let world = default_world(29);
        let mut rng = stream(29, &["exam"]);
        let paper = design_exam(&world, &curriculum(0, 2, 0), &mut rng).unwrap();
        let text = serialize_exam(&paper).replacen("\"prompt\"", "\"promt\"", 1);
        match parse_exam(&text) {
            Err(ExamError::Schema { message }) => assert!(message.contains("promt")),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_mismatched_difficulty() {
        let text = concat!(
            "{\n  \"level\": 1,\n  \"difficulty\": \"Hard\",\n  \"tasks\": [\n",
            "    {\n      \"task_name\": \"t\",\n      \"prompt\": \"p\",\n",
            "      \"skills_tested\": \"s\",\n      \"evaluation\": \"e\"\n    }\n  ]\n}\n"
        );
        match parse_exam(text) {
            Err(ExamError::Schema { message }) => assert!(message.contains("level 1")),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn normalize_ws_preserves_string_interiors() {
        let a = "{ \"k\":  \"a  b\" }";
        let b = "{\"k\":\"a  b\"}";
        assert_eq!(normalize_ws(a), normalize_ws(b));
        assert!(normalize_ws(a).contains("a  b"));
    }

    #[test]
    fn memory_table_covers_taxonomy_with_ne_and_na() {
        let mut config = WorldConfig::default();
        config.record_counts.shopping = 0;
        config.failed_domains.push(DomainId::Web3);
        let world = generate_world(31, &config);
        let view = project_view(&world, &AgentPolicy::Oracle);
        let table = build_memory_table(&view);
        assert_eq!(table.len(), 56);
        for entry in &table {
            match (&entry.value, &entry.ref_source) {
                (MemoryValue::Value(_), Some(_)) => {}
                (MemoryValue::NonExist | MemoryValue::NotAvailable, None) => {}
                other => panic!("invariant violated: {other:?}"),
            }
            if entry.category == DomainId::Shopping {
                assert_eq!(entry.value, MemoryValue::NonExist);
            }
            if entry.category == DomainId::Web3 {
                assert_eq!(entry.value, MemoryValue::NotAvailable);
            }
        }
    }

    #[test]
    fn empty_view_is_all_ne() {
        let world = default_world(37);
        let view = project_view(&world, &AgentPolicy::Baseline);
        let table = build_memory_table(&view);
        assert!(table.iter().all(|e| e.value == MemoryValue::NonExist));
    }

    #[test]
    fn memory_csv_blank_ref_for_specials() {
        let world = default_world(41);
        let view = project_view(&world, &AgentPolicy::Baseline);
        let csv = memory_table_csv(&build_memory_table(&view));
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("category,key,value,ref_source"));
        for line in lines {
            assert!(line.ends_with(",NE,"), "unexpected row: {line}");
        }
    }
}
