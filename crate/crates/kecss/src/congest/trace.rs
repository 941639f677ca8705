use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Round and bandwidth accounting for a simulated execution.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub rounds: u64,
    pub words_sent: u64,
    pub messages: u64,
    /// Largest single message seen, in words.
    pub max_message_words: u64,
    /// Budget in force for the largest message, 0 when unbounded.
    pub budget_words: u64,
    pub phases: BTreeMap<String, u64>,
    pub oracle_calls: u64,
    pub oracle_log: BTreeMap<String, u64>,
}

impl RoundTrace {
    pub fn record_oracle(&mut self, what: &str) {
        self.oracle_calls += 1;
        *self.oracle_log.entry(what.to_string()).or_default() += 1;
    }

    pub fn add_phase(&mut self, phase: &str, rounds: u64) {
        *self.phases.entry(phase.to_string()).or_default() += rounds;
    }

    /// Adds another trace's counters into this one.
    pub fn absorb(&mut self, other: &RoundTrace) {
        self.rounds += other.rounds;
        self.words_sent += other.words_sent;
        self.messages += other.messages;
        self.max_message_words = self.max_message_words.max(other.max_message_words);
        if other.budget_words != 0 {
            self.budget_words = if self.budget_words == 0 {
                other.budget_words
            } else {
                self.budget_words.min(other.budget_words)
            };
        }
        for (k, v) in &other.phases {
            *self.phases.entry(k.clone()).or_default() += v;
        }
        self.oracle_calls += other.oracle_calls;
        for (k, v) in &other.oracle_log {
            *self.oracle_log.entry(k.clone()).or_default() += v;
        }
    }

    /// Post-hoc bandwidth check: no recorded message exceeded the budget.
    pub fn bandwidth_ok(&self) -> bool {
        self.budget_words == 0 || self.max_message_words <= self.budget_words
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trace serializes")
    }
}
