//! Synthetic user worlds and the minimal-disclosure data connector.
//!
//! A world is the ground truth for one simulated user: records across the
//! seven data-source categories, a preference profile, a schedule of latent
//! needs for proactive evaluation, and any live decoy facts. Worlds are
//! immutable snapshots; [`advance_time`] and [`inject_decoy`] return new
//! snapshots. The connector answers claims with a four-valued signal and
//! never reveals stored values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::seed::{hash64, stream, SeedStream};

/// Seconds per simulated day. Day 0 is a Monday.
pub const DAY_SECS: u64 = 86_400;
/// Weekday index of Friday (day 0 = Monday).
pub const FRIDAY: u64 = 4;

const SNAPSHOT_DOMAIN: &[u8] = b"proctor.snapshot.v1";
const RECORD_DOMAIN: &[u8] = b"proctor.record.v1";
const WORLD_FILE_VERSION: u32 = 1;

/// The seven data-source categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainId {
    Social,
    Productivity,
    DailyLife,
    Shopping,
    Web3,
    Finance,
    AiChat,
}

impl DomainId {
    pub const ALL: [DomainId; 7] = [
        DomainId::Social,
        DomainId::Productivity,
        DomainId::DailyLife,
        DomainId::Shopping,
        DomainId::Web3,
        DomainId::Finance,
        DomainId::AiChat,
    ];

    /// Stable integer code used in record ids and digests.
    pub fn code(self) -> u8 {
        match self {
            DomainId::Social => 0,
            DomainId::Productivity => 1,
            DomainId::DailyLife => 2,
            DomainId::Shopping => 3,
            DomainId::Web3 => 4,
            DomainId::Finance => 5,
            DomainId::AiChat => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DomainId::Social => "social",
            DomainId::Productivity => "productivity",
            DomainId::DailyLife => "daily_life",
            DomainId::Shopping => "shopping",
            DomainId::Web3 => "web3",
            DomainId::Finance => "finance",
            DomainId::AiChat => "ai_chat",
        }
    }

    pub fn from_name(name: &str) -> Option<DomainId> {
        DomainId::ALL.into_iter().find(|d| d.name() == name)
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How a record entered the world: committed history or live event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Dumped,
    RealTime,
}

/// One ground-truth fact occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub record_id: String,
    pub domain: DomainId,
    pub key: String,
    pub value: String,
    /// Seconds since the world epoch.
    pub timestamp: u64,
    /// Provider the fact was extracted from.
    pub ref_source: String,
    /// Hex SHA-256 over (record_id, key, value, timestamp).
    pub digest: String,
    pub provenance: Provenance,
}

impl Record {
    fn new(
        record_id: String,
        domain: DomainId,
        key: &str,
        value: String,
        timestamp: u64,
        ref_source: &str,
        provenance: Provenance,
    ) -> Record {
        let digest = record_digest(&record_id, key, &value, timestamp);
        Record {
            record_id,
            domain,
            key: key.to_string(),
            value,
            timestamp,
            ref_source: ref_source.to_string(),
            digest,
            provenance,
        }
    }

    /// True when the stored digest matches a recomputation from the fields.
    pub fn digest_ok(&self) -> bool {
        self.digest == record_digest(&self.record_id, &self.key, &self.value, self.timestamp)
    }
}

/// Hex SHA-256 commitment for a record, with length-prefixed fields.
pub fn record_digest(record_id: &str, key: &str, value: &str, timestamp: u64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(RECORD_DOMAIN);
    for part in [record_id, key, value] {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    hasher.update(timestamp.to_le_bytes());
    hex::encode(hasher.finalize())
}

/// Connector verdict on a claimed fact. Carries no payload: the connector
/// never discloses what the true value is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimalSignal {
    Verified,
    Incorrect,
    NonExist,
    NotAvailable,
}

/// Stable user preferences, mirrored into records so the connector can
/// verify preference claims like any other fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceProfile {
    pub favorite_genre: String,
    pub dietary_restriction: String,
    pub favorite_cuisine: String,
    pub budget_limit: f64,
}

/// What a proactive suggestion is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeedKind {
    DinnerReservation,
    DeadlineBlock,
}

/// A ground-truth upcoming need, used to grade proactive suggestions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentNeed {
    pub kind: NeedKind,
    /// Latest time a useful suggestion can arrive.
    pub due_time: u64,
    /// When the need itself occurs.
    pub target_time: u64,
}

/// A deliberately non-existent fact injected to catch agents that accept
/// unverified data. Decoy keys never collide with the genuine vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoyFact {
    pub key: String,
    pub advertised_value: String,
    pub injected_at: u64,
}

/// Per-domain record counts for world generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecordCounts {
    pub social: u32,
    pub productivity: u32,
    pub daily_life: u32,
    pub shopping: u32,
    pub web3: u32,
    pub finance: u32,
    pub ai_chat: u32,
}

impl Default for RecordCounts {
    fn default() -> Self {
        RecordCounts::uniform(12)
    }
}

impl RecordCounts {
    pub fn get(&self, domain: DomainId) -> u32 {
        match domain {
            DomainId::Social => self.social,
            DomainId::Productivity => self.productivity,
            DomainId::DailyLife => self.daily_life,
            DomainId::Shopping => self.shopping,
            DomainId::Web3 => self.web3,
            DomainId::Finance => self.finance,
            DomainId::AiChat => self.ai_chat,
        }
    }

    pub fn set(&mut self, domain: DomainId, count: u32) {
        match domain {
            DomainId::Social => self.social = count,
            DomainId::Productivity => self.productivity = count,
            DomainId::DailyLife => self.daily_life = count,
            DomainId::Shopping => self.shopping = count,
            DomainId::Web3 => self.web3 = count,
            DomainId::Finance => self.finance = count,
            DomainId::AiChat => self.ai_chat = count,
        }
    }

    pub fn uniform(count: u32) -> RecordCounts {
        RecordCounts {
            social: count,
            productivity: count,
            daily_life: count,
            shopping: count,
            web3: count,
            finance: count,
            ai_chat: count,
        }
    }

    pub fn total(&self) -> u32 {
        DomainId::ALL.iter().map(|d| self.get(*d)).sum()
    }
}

/// World generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub user_id: String,
    pub record_counts: RecordCounts,
    /// Seed ≥ 3 past Friday dinner receipts and schedule future dinner needs.
    pub friday_dinner: bool,
    /// Committed history before campaign start, in days.
    pub history_days: u32,
    /// How far ahead latent needs are scheduled, in days.
    pub horizon_days: u32,
    /// Domains whose data pipeline is failed: connector answers NotAvailable.
    pub failed_domains: Vec<DomainId>,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            user_id: "user-1".to_string(),
            record_counts: RecordCounts::default(),
            friday_dinner: true,
            history_days: 21,
            horizon_days: 35,
            failed_domains: Vec::new(),
        }
    }
}

/// Ground truth for one simulated user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserWorld {
    pub user_id: String,
    pub seed: u64,
    pub current_time: u64,
    /// Campaign start: records before it are Dumped, after it RealTime.
    pub start_time: u64,
    /// Per-domain records ordered by timestamp.
    pub records: BTreeMap<DomainId, Vec<Record>>,
    pub preference_profile: PreferenceProfile,
    pub latent_needs: Vec<LatentNeed>,
    /// Live decoys keyed by decoy fact key.
    pub decoys: BTreeMap<String, DecoyFact>,
    pub failed_domains: BTreeSet<DomainId>,
    friday_dinner: bool,
    dinner_venue: String,
    active_domains: BTreeSet<DomainId>,
    next_record_seq: u64,
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("advance_time requires a positive delta")]
    NonPositiveDelta,
    #[error("world file import failed: {0}")]
    Import(String),
    #[error("record {record_id} fails digest recomputation")]
    DigestMismatch { record_id: String },
}

// --- fact-key vocabulary -----------------------------------------------------

/// (fact key, provider) vocabulary per domain: eight gradeable keys each.
pub fn fact_keys(domain: DomainId) -> &'static [(&'static str, &'static str)] {
    match domain {
        DomainId::Social => &[
            ("twitter_username", "twitter"),
            ("discord_username", "discord"),
            ("discord_group_count", "discord"),
            ("telegram_username", "telegram"),
            ("telegram_auth_date", "telegram"),
            ("instagram_handle", "gmail-receipts"),
            ("facebook_linked_email", "gmail-receipts"),
            ("latest_social_login", "discord"),
        ],
        DomainId::Productivity => &[
            ("latest_email_subject", "gmail"),
            ("latest_email_sender", "gmail"),
            ("unread_email_count", "gmail"),
            ("next_calendar_event", "gcal"),
            ("next_event_time", "gcal"),
            ("travel_window", "gmail"),
            ("project_deadline", "gmail"),
            ("weekly_meeting_day", "gcal"),
        ],
        DomainId::DailyLife => &[
            ("last_ride_service", "uber"),
            ("last_ride_amount", "uber"),
            ("last_food_order", "doordash"),
            ("grocery_service", "instacart"),
            ("dinner_receipt_count", "gmail-receipts"),
            ("dietary_restriction", "doordash"),
            ("favorite_cuisine", "doordash"),
            ("friday_dinner_venue", "gmail-receipts"),
        ],
        DomainId::Shopping => &[
            ("last_purchase_item", "amazon"),
            ("last_purchase_amount", "amazon"),
            ("favorite_shop", "shopify"),
            ("pending_delivery", "amazon"),
            ("wishlist_item", "amazon"),
            ("coupon_code", "shopify"),
            ("last_order_date", "amazon"),
            ("monthly_spend", "gmail-receipts"),
        ],
        DomainId::Web3 => &[
            ("wallet_provider", "metamask"),
            ("wallet_address", "metamask"),
            ("last_tx_hash", "chain-explorer"),
            ("token_balance", "chain-explorer"),
            ("nft_count", "chain-explorer"),
            ("last_chain_activity", "chain-explorer"),
            ("gas_spent", "chain-explorer"),
            ("staked_amount", "chain-explorer"),
        ],
        DomainId::Finance => &[
            ("broker_name", "robinhood"),
            ("last_stock_trade", "robinhood"),
            ("portfolio_value", "robinhood"),
            ("crypto_exchange", "coinbase"),
            ("last_crypto_trade", "coinbase"),
            ("dividend_received", "robinhood"),
            ("budget_limit", "gmail-receipts"),
            ("account_currency", "robinhood"),
        ],
        DomainId::AiChat => &[
            ("favorite_assistant", "chatgpt"),
            ("last_chat_topic", "chatgpt"),
            ("chat_count_week", "chatgpt"),
            ("preferred_model", "chatgpt"),
            ("favorite_genre", "chatgpt"),
            ("last_prompt_category", "perplexity"),
            ("saved_conversation_title", "chatgpt"),
            ("assistant_usage_days", "gemini"),
        ],
    }
}

/// Keys that keep producing new occurrences as time advances.
fn stream_keys(domain: DomainId) -> &'static [&'static str] {
    match domain {
        DomainId::Social => &["latest_social_login"],
        DomainId::Productivity => {
            &["latest_email_subject", "latest_email_sender", "next_calendar_event"]
        }
        DomainId::DailyLife => &["last_ride_service", "last_food_order"],
        DomainId::Shopping => &["last_purchase_item", "last_order_date"],
        DomainId::Web3 => &["last_tx_hash", "last_chain_activity"],
        DomainId::Finance => &["last_stock_trade", "last_crypto_trade"],
        DomainId::AiChat => &["last_chat_topic", "chat_count_week"],
    }
}

fn provider_for(domain: DomainId, key: &str) -> &'static str {
    fact_keys(domain)
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, p)| *p)
        .unwrap_or("unknown")
}

/// Per-domain daily event probability, in permille.
fn event_rate_permille(domain: DomainId) -> u64 {
    match domain {
        DomainId::Productivity => 900,
        DomainId::Social | DomainId::AiChat => 600,
        _ => 450,
    }
}

// --- value generation ----------------------------------------------------------

const EMAIL_SUBJECTS: &[&str] = &[
    "Quarterly budget review",
    "Trip itinerary update",
    "Lunch on Thursday?",
    "Project kickoff notes",
    "Invoice 4821 attached",
    "Weekend plans",
    "Security alert for your account",
    "Team offsite agenda",
];
const SENDERS: &[&str] =
    &["amara.lin", "victor.osei", "june.park", "dana.reyes", "theo.brandt", "mira.holt"];
const EVENTS: &[&str] = &[
    "Dentist appointment",
    "Design review",
    "Parent-teacher meeting",
    "Gym session",
    "Flight check-in",
    "Book club",
];
const WEEKDAY_NAMES: &[&str] =
    &["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"];
const GENRES: &[&str] = &["sci-fi", "comedy", "drama", "thriller", "documentary"];
const DIETS: &[&str] = &["vegetarian", "vegan", "halal", "gluten-free"];
const CUISINES: &[&str] = &["italian", "japanese", "mexican", "levantine", "thai"];
const DISHES: &[&str] = &[
    "pad thai bowl",
    "margherita pizza",
    "falafel wrap",
    "miso ramen",
    "garden salad",
    "burrito box",
];
const ITEMS: &[&str] = &[
    "running shoes",
    "desk lamp",
    "noise-cancelling headphones",
    "water bottle",
    "mechanical keyboard",
    "yoga mat",
];
const RIDE_SERVICES: &[&str] = &["uber", "lyft", "waymo", "grab"];
const TOPICS: &[&str] = &[
    "rust borrow checker",
    "sourdough starters",
    "tax brackets",
    "marathon training",
    "garden irrigation",
];

/// Dining venues: (name, dietary tag, price). Every dietary tag in the
/// profile vocabulary has a venue priced below the minimum generated budget.
pub const VENUES: &[(&str, &str, f64)] = &[
    ("Green Table", "vegetarian", 38.0),
    ("Harvest Moon", "vegan", 44.0),
    ("Cedar Grill", "halal", 52.0),
    ("Rice & Shine", "gluten-free", 35.0),
    ("Blue Fig", "vegetarian", 61.0),
    ("Olive Yard", "vegan", 58.0),
];

struct GenCtx<'a> {
    profile: &'a PreferenceProfile,
    dinner_venue: &'a str,
    current_day: u64,
    deadline_ts: u64,
}

fn pick<'a>(rng: &mut SeedStream, list: &[&'a str]) -> &'a str {
    list[rng.gen_range(0..list.len())]
}

fn hex_tag(rng: &mut SeedStream, nibbles: usize) -> String {
    let v: u64 = rng.gen();
    let mut s = format!("{v:016x}");
    s.truncate(nibbles);
    s
}

fn value_for(key: &str, rng: &mut SeedStream, ctx: &GenCtx<'_>) -> String {
    match key {
        "latest_email_subject" => format!("{} [{}]", pick(rng, EMAIL_SUBJECTS), hex_tag(rng, 4)),
        "latest_email_sender" => format!("{}@example.com", pick(rng, SENDERS)),
        "unread_email_count" => rng.gen_range(0..40u32).to_string(),
        "next_calendar_event" => format!("{} [{}]", pick(rng, EVENTS), hex_tag(rng, 4)),
        "next_event_time" => format!(
            "day {} {:02}:{:02}",
            ctx.current_day + 1 + rng.gen_range(0..3u64),
            rng.gen_range(8..18u32),
            rng.gen_range(0..60u32),
        ),
        "travel_window" => {
            let a = ctx.current_day + 2 + rng.gen_range(0..4u64);
            let b = a + 1 + rng.gen_range(0..2u64);
            format!("day {a} to day {b}")
        }
        "project_deadline" => ctx.deadline_ts.to_string(),
        "weekly_meeting_day" => pick(rng, WEEKDAY_NAMES).to_string(),
        "friday_dinner_venue" => ctx.dinner_venue.to_string(),
        "dietary_restriction" => ctx.profile.dietary_restriction.clone(),
        "favorite_cuisine" => ctx.profile.favorite_cuisine.clone(),
        "favorite_genre" => ctx.profile.favorite_genre.clone(),
        "budget_limit" => format!("{:.2}", ctx.profile.budget_limit),
        "coupon_code" => format!("SAVE{}-{}", 5 * rng.gen_range(2..5u32), hex_tag(rng, 4)),
        "last_ride_service" => pick(rng, RIDE_SERVICES).to_string(),
        "last_food_order" => pick(rng, DISHES).to_string(),
        "grocery_service" => pick(rng, &["instacart", "amazon-fresh", "costco"]).to_string(),
        "last_purchase_item" | "wishlist_item" | "pending_delivery" => pick(rng, ITEMS).to_string(),
        "favorite_shop" => pick(rng, &["amazon", "shein", "lululemon", "macys"]).to_string(),
        "last_order_date" => {
            format!("day {}", ctx.current_day.saturating_sub(rng.gen_range(0..6u64)))
        }
        "wallet_provider" => pick(rng, &["metamask", "phantom", "walletconnect"]).to_string(),
        "wallet_address" | "last_tx_hash" => format!("0x{}", hex_tag(rng, 16)),
        "broker_name" => pick(rng, &["robinhood", "schwab", "futu", "tiger"]).to_string(),
        "crypto_exchange" => pick(rng, &["coinbase", "kraken", "binance", "okx"]).to_string(),
        "favorite_assistant" | "preferred_model" => {
            pick(rng, &["chatgpt", "gemini", "perplexity", "deepseek"]).to_string()
        }
        "last_chat_topic" | "saved_conversation_title" | "last_prompt_category" => {
            pick(rng, TOPICS).to_string()
        }
        "monthly_spend" | "last_ride_amount" | "last_purchase_amount" | "portfolio_value"
        | "dividend_received" | "gas_spent" | "staked_amount" | "token_balance"
        | "last_stock_trade" | "last_crypto_trade" => {
            format!("{:.2}", rng.gen_range(4.0..900.0f64))
        }
        "account_currency" => pick(rng, &["USD", "EUR", "SGD"]).to_string(),
        "twitter_username" | "discord_username" | "telegram_username" | "instagram_handle" => {
            format!("@{}_{}", pick(rng, &["nova", "echo", "lumen", "pixel"]), hex_tag(rng, 4))
        }
        "facebook_linked_email" => format!("{}@example.com", pick(rng, SENDERS)),
        "discord_group_count" | "nft_count" | "chat_count_week" | "assistant_usage_days"
        | "dinner_receipt_count" => rng.gen_range(1..30u32).to_string(),
        "telegram_auth_date" | "latest_social_login" | "last_chain_activity" => {
            format!("day {}", ctx.current_day.saturating_sub(rng.gen_range(0..10u64)))
        }
        _ => format!("val-{}", hex_tag(rng, 6)),
    }
}

// --- generation ------------------------------------------------------------------

/// Builds a deterministic world from a seed and config.
pub fn generate_world(seed: u64, config: &WorldConfig) -> UserWorld {
    let start_time = u64::from(config.history_days) * DAY_SECS;
    let current_day = start_time / DAY_SECS;

    let mut profile_rng = stream(seed, &["world", "profile"]);
    let dietary = pick(&mut profile_rng, DIETS).to_string();
    let profile = PreferenceProfile {
        favorite_genre: pick(&mut profile_rng, GENRES).to_string(),
        dietary_restriction: dietary.clone(),
        favorite_cuisine: pick(&mut profile_rng, CUISINES).to_string(),
        budget_limit: f64::from(profile_rng.gen_range(160..400u32)) * 0.5,
    };
    let dinner_venue = VENUES
        .iter()
        .find(|(_, tag, _)| *tag == dietary)
        .map(|(name, _, _)| name.to_string())
        .expect("every dietary tag has a venue");

    let mut deadline_rng = stream(seed, &["world", "deadline"]);
    let deadline_ts = start_time + 9 * DAY_SECS + deadline_rng.gen_range(0..12u64) * 3_600;

    let ctx = GenCtx { profile: &profile, dinner_venue: &dinner_venue, current_day, deadline_ts };

    let mut next_record_seq = 0u64;
    let mut records: BTreeMap<DomainId, Vec<Record>> = BTreeMap::new();
    let mut active_domains = BTreeSet::new();

    for domain in DomainId::ALL {
        let count = config.record_counts.get(domain);
        let mut rng = stream(seed, &["world", "records", domain.name()]);
        let mut list = Vec::new();
        let vocab = fact_keys(domain);
        let streams = stream_keys(domain);
        for i in 0..count {
            let key = if (i as usize) < vocab.len() {
                vocab[i as usize].0
            } else {
                streams[(i as usize - vocab.len()) % streams.len()]
            };
            // The dinner pattern owns this key; a random-time occurrence
            // would destroy the fixed-period recurrence.
            if key == "friday_dinner_venue" && config.friday_dinner {
                continue;
            }
            let timestamp = (u64::from(i) + 1) * start_time / (u64::from(count) + 1);
            let value = value_for(key, &mut rng, &ctx);
            let record_id = format!("rec-{}-{:05}", domain.code(), next_record_seq);
            next_record_seq += 1;
            list.push(Record::new(
                record_id,
                domain,
                key,
                value,
                timestamp,
                provider_for(domain, key),
                Provenance::Dumped,
            ));
        }
        if count > 0 {
            active_domains.insert(domain);
        }
        records.insert(domain, list);
    }

    if config.friday_dinner {
        let list = records.get_mut(&DomainId::DailyLife).expect("all domains present");
        for day in 0..u64::from(config.history_days) {
            if day % 7 == FRIDAY {
                let timestamp = day * DAY_SECS + 19 * 3_600;
                let record_id =
                    format!("rec-{}-{:05}", DomainId::DailyLife.code(), next_record_seq);
                next_record_seq += 1;
                list.push(Record::new(
                    record_id,
                    DomainId::DailyLife,
                    "friday_dinner_venue",
                    dinner_venue.clone(),
                    timestamp,
                    provider_for(DomainId::DailyLife, "friday_dinner_venue"),
                    Provenance::Dumped,
                ));
            }
        }
        list.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then(a.record_id.cmp(&b.record_id)));
        active_domains.insert(DomainId::DailyLife);
    }

    let mut latent_needs = Vec::new();
    if config.friday_dinner {
        let horizon_end = start_time + u64::from(config.horizon_days) * DAY_SECS;
        let mut day = current_day + 1;
        while day * DAY_SECS <= horizon_end {
            if day % 7 == FRIDAY {
                latent_needs.push(LatentNeed {
                    kind: NeedKind::DinnerReservation,
                    due_time: day * DAY_SECS + 18 * 3_600,
                    target_time: day * DAY_SECS + 19 * 3_600,
                });
            }
            day += 1;
        }
    }
    if config.record_counts.get(DomainId::Productivity) > 0 {
        latent_needs.push(LatentNeed {
            kind: NeedKind::DeadlineBlock,
            due_time: deadline_ts - DAY_SECS,
            target_time: deadline_ts,
        });
    }
    latent_needs.sort_by_key(|n| (n.due_time, n.kind));

    UserWorld {
        user_id: config.user_id.clone(),
        seed,
        current_time: start_time,
        start_time,
        records,
        preference_profile: profile,
        latent_needs,
        decoys: BTreeMap::new(),
        failed_domains: config.failed_domains.iter().copied().collect(),
        friday_dinner: config.friday_dinner,
        dinner_venue,
        active_domains,
        next_record_seq,
    }
}

/// Advances the world clock, emitting the real-time events scheduled inside
/// the elapsed window. Returns the new snapshot plus the records it gained.
///
/// The event schedule is a pure function of (seed, domain, absolute day), so
/// advancing by `d` then `d2` yields the same records as advancing by `d+d2`.
pub fn advance_time(world: &UserWorld, delta: u64) -> Result<(UserWorld, Vec<Record>), WorldError> {
    if delta == 0 {
        return Err(WorldError::NonPositiveDelta);
    }
    let mut next = world.clone();
    let from = world.current_time;
    let to = from + delta;
    let mut new_records = Vec::new();

    for day in from / DAY_SECS..=to / DAY_SECS {
        for domain in DomainId::ALL {
            if !next.active_domains.contains(&domain) {
                continue;
            }
            let h = hash64(world.seed, &["evt", domain.name(), &day.to_string()]);
            if h % 1000 >= event_rate_permille(domain) {
                continue;
            }
            let ts = day * DAY_SECS + (8 + (h >> 10) % 10) * 3_600 + ((h >> 20) % 60) * 60;
            if ts <= from || ts > to {
                continue;
            }
            let keys = stream_keys(domain);
            let key = keys[((h >> 32) as usize) % keys.len()];
            let mut rng = stream(world.seed, &["evtval", domain.name(), &day.to_string()]);
            let ctx = GenCtx {
                profile: &next.preference_profile,
                dinner_venue: &next.dinner_venue,
                current_day: day,
                deadline_ts: 0,
            };
            let value = value_for(key, &mut rng, &ctx);
            let record_id = format!("rec-{}-{:05}", domain.code(), next.next_record_seq);
            next.next_record_seq += 1;
            new_records.push(Record::new(
                record_id,
                domain,
                key,
                value,
                ts,
                provider_for(domain, key),
                Provenance::RealTime,
            ));
        }
        if next.friday_dinner && day % 7 == FRIDAY {
            let ts = day * DAY_SECS + 19 * 3_600;
            if ts > from && ts <= to {
                let record_id =
                    format!("rec-{}-{:05}", DomainId::DailyLife.code(), next.next_record_seq);
                next.next_record_seq += 1;
                new_records.push(Record::new(
                    record_id,
                    DomainId::DailyLife,
                    "friday_dinner_venue",
                    next.dinner_venue.clone(),
                    ts,
                    provider_for(DomainId::DailyLife, "friday_dinner_venue"),
                    Provenance::RealTime,
                ));
            }
        }
    }

    new_records.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then(a.record_id.cmp(&b.record_id)));
    for record in &new_records {
        next.records.get_mut(&record.domain).expect("all domains present").push(record.clone());
    }
    next.current_time = to;
    Ok((next, new_records))
}

impl UserWorld {
    /// Latest record for `(domain, key)`, if any.
    pub fn latest(&self, domain: DomainId, key: &str) -> Option<&Record> {
        self.records.get(&domain).and_then(|list| list.iter().rev().find(|r| r.key == key))
    }

    /// All records of one domain in timestamp order.
    pub fn domain_records(&self, domain: DomainId) -> &[Record] {
        self.records.get(&domain).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all_records(&self) -> impl Iterator<Item = &Record> {
        DomainId::ALL.into_iter().flat_map(move |d| self.domain_records(d).iter())
    }

    /// The venue the recurring Friday pattern books, when enabled.
    pub fn dinner_venue(&self) -> &str {
        &self.dinner_venue
    }

    /// Returns a copy with one record's value replaced (digest recomputed).
    /// Simulates an after-the-fact edit of committed data; `None` when the
    /// record id does not exist.
    pub fn with_tampered_record(&self, record_id: &str, new_value: &str) -> Option<UserWorld> {
        let mut next = self.clone();
        for list in next.records.values_mut() {
            if let Some(record) = list.iter_mut().find(|r| r.record_id == record_id) {
                record.value = new_value.to_string();
                record.digest =
                    record_digest(&record.record_id, &record.key, &record.value, record.timestamp);
                return Some(next);
            }
        }
        None
    }
}

/// Answers a claimed fact with a minimal signal. The true value never leaves
/// the connector.
pub fn connector_query(
    world: &UserWorld,
    domain: DomainId,
    key: &str,
    claimed_value: &str,
) -> MinimalSignal {
    if world.failed_domains.contains(&domain) {
        return MinimalSignal::NotAvailable;
    }
    match world.latest(domain, key) {
        Some(record) => {
            if record.value.trim() == claimed_value.trim() {
                MinimalSignal::Verified
            } else {
                MinimalSignal::Incorrect
            }
        }
        None => MinimalSignal::NonExist,
    }
}

/// Order-sensitive commitment over the Dumped records of one domain.
pub fn snapshot_digest(world: &UserWorld, domain: DomainId) -> String {
    let mut hasher = Sha256::new();
    hasher.update(SNAPSHOT_DOMAIN);
    for record in world.domain_records(domain) {
        if record.provenance == Provenance::Dumped {
            hasher.update(record.digest.as_bytes());
        }
    }
    hex::encode(hasher.finalize())
}

/// The snapshot digest of a domain with no Dumped records.
pub fn empty_snapshot_digest() -> String {
    let mut hasher = Sha256::new();
    hasher.update(SNAPSHOT_DOMAIN);
    hex::encode(hasher.finalize())
}

/// Registers a fresh decoy fact. The key is drawn from a namespace disjoint
/// from the genuine vocabulary, so it can never verify.
pub fn inject_decoy(world: &UserWorld, rng: &mut SeedStream) -> (UserWorld, DecoyFact) {
    let mut next = world.clone();
    let key = loop {
        let candidate = format!("coupon_promo_{}", hex_tag(rng, 8));
        if !next.decoys.contains_key(&candidate) {
            break candidate;
        }
    };
    let decoy = DecoyFact {
        key: key.clone(),
        advertised_value: format!("FLASH{}-{}", 10 * rng.gen_range(2..6u32), hex_tag(rng, 4)),
        injected_at: next.current_time,
    };
    next.decoys.insert(key, decoy.clone());
    (next, decoy)
}

// --- export / import ----------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct WorldFile {
    version: u32,
    hash_algo: String,
    user_id: String,
    seed: u64,
    current_time: u64,
    start_time: u64,
    friday_dinner: bool,
    dinner_venue: String,
    next_record_seq: u64,
    active_domains: Vec<DomainId>,
    failed_domains: Vec<DomainId>,
    preference_profile: PreferenceProfile,
    latent_needs: Vec<LatentNeed>,
    decoys: Vec<DecoyFact>,
    records: Vec<Record>,
}

/// Serializes the world to its versioned text format.
pub fn export_world(world: &UserWorld) -> String {
    let file = WorldFile {
        version: WORLD_FILE_VERSION,
        hash_algo: "sha256".to_string(),
        user_id: world.user_id.clone(),
        seed: world.seed,
        current_time: world.current_time,
        start_time: world.start_time,
        friday_dinner: world.friday_dinner,
        dinner_venue: world.dinner_venue.clone(),
        next_record_seq: world.next_record_seq,
        active_domains: world.active_domains.iter().copied().collect(),
        failed_domains: world.failed_domains.iter().copied().collect(),
        preference_profile: world.preference_profile.clone(),
        latent_needs: world.latent_needs.clone(),
        decoys: world.decoys.values().cloned().collect(),
        records: world.all_records().cloned().collect(),
    };
    toml::to_string(&file).expect("world serializes")
}

/// Parses a world file, verifying version and record digests.
pub fn import_world(text: &str) -> Result<UserWorld, WorldError> {
    let file: WorldFile = toml::from_str(text).map_err(|e| WorldError::Import(e.to_string()))?;
    if file.version != WORLD_FILE_VERSION {
        return Err(WorldError::Import(format!(
            "unsupported world file version {}",
            file.version
        )));
    }
    let mut records: BTreeMap<DomainId, Vec<Record>> = BTreeMap::new();
    for domain in DomainId::ALL {
        records.insert(domain, Vec::new());
    }
    for record in file.records {
        if !record.digest_ok() {
            return Err(WorldError::DigestMismatch { record_id: record.record_id });
        }
        records.get_mut(&record.domain).expect("all domains present").push(record);
    }
    for list in records.values_mut() {
        list.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then(a.record_id.cmp(&b.record_id)));
    }
    Ok(UserWorld {
        user_id: file.user_id,
        seed: file.seed,
        current_time: file.current_time,
        start_time: file.start_time,
        records,
        preference_profile: file.preference_profile,
        latent_needs: file.latent_needs,
        decoys: file.decoys.into_iter().map(|d| (d.key.clone(), d)).collect(),
        failed_domains: file.failed_domains.into_iter().collect(),
        friday_dinner: file.friday_dinner,
        dinner_venue: file.dinner_venue,
        active_domains: file.active_domains.into_iter().collect(),
        next_record_seq: file.next_record_seq,
    })
}
