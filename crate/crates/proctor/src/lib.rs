//! Deterministic evaluation protocol for personal AI agents.
//!
//! The crate simulates an examiner node that generates curriculum exam
//! papers over a synthetic user world, grades agent answers through a
//! minimal-disclosure connector interface, scores agents on coverage,
//! quality and freshness, enforces anti-gaming rules (decoy facts, dumped
//! data rechecks, duplicate provider claims, trust tiers, reward freezes),
//! and trains a small personalized preference-optimization policy.
//!
//! Everything is a pure function of the configured seed: campaigns replay
//! byte-identically regardless of worker count.

pub mod agents;
pub mod exam;
pub mod harness;
pub mod integrity;
pub mod network;
pub mod pdpo;
pub mod report;
pub mod scoring;
pub mod seed;
pub mod world;
