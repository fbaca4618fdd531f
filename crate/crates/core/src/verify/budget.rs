//! Node-count and wall-clock caps for exhaustive searches.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
    #[serde(serialize_with = "ser_duration")]
    pub max_time: Option<Duration>,
}

fn ser_duration<S: serde::Serializer>(d: &Option<Duration>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(d) => s.serialize_f64(d.as_secs_f64()),
        None => s.serialize_none(),
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_nodes: Some(50_000_000),
            max_time: Some(Duration::from_secs(60)),
        }
    }
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        Self { max_nodes: None, max_time: None }
    }

    pub fn nodes(n: u64) -> Self {
        Self { max_nodes: Some(n), max_time: None }
    }

    pub fn with_time(mut self, t: Duration) -> Self {
        self.max_time = Some(t);
        self
    }

    pub fn meter(&self, what: &str) -> Meter {
        Meter {
            budget: *self,
            what: what.to_string(),
            nodes: 0,
            start: Instant::now(),
        }
    }

    /// Fails unless `work` units fit in the node cap.
    pub fn admit(&self, what: &str, work: u128) -> Result<()> {
        match self.max_nodes {
            Some(cap) if work > cap as u128 => Err(Error::budget(what, cap)),
            _ => Ok(()),
        }
    }
}

/// Counts search nodes against a budget.
pub struct Meter {
    budget: SearchBudget,
    what: String,
    nodes: u64,
    start: Instant,
}

impl Meter {
    pub fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if let Some(cap) = self.budget.max_nodes {
            if self.nodes > cap {
                return Err(Error::budget(format!("{} search nodes", self.what), cap));
            }
        }
        if self.nodes % 4096 == 0 {
            if let Some(t) = self.budget.max_time {
                if self.start.elapsed() > t {
                    return Err(Error::budget(format!("{} wall-clock ms", self.what), t.as_millis()));
                }
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }
}
