//! Time keeping for anytime algorithms.
//!
//! Wall-clock deadlines make results depend on machine load. The work clock
//! instead advances by explicit units (roughly one per evaluated move or
//! search node), so a seeded run with a work deadline is reproducible bit for
//! bit.

use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    #[default]
    Wall,
    /// Simulated seconds: `units_per_second` work units make one second.
    Work { units_per_second: f64 },
}

impl ClockMode {
    /// Work clock at a rate that roughly matches wall time on a laptop.
    pub fn deterministic() -> Self {
        ClockMode::Work { units_per_second: 200_000.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Clock {
    mode: ClockMode,
    start: Instant,
    units: u64,
}

impl Clock {
    pub fn new(mode: ClockMode) -> Self {
        Self { mode, start: Instant::now(), units: 0 }
    }

    pub fn wall() -> Self {
        Self::new(ClockMode::Wall)
    }

    pub fn mode(&self) -> ClockMode {
        self.mode
    }

    pub fn tick(&mut self, units: u64) {
        self.units += units;
    }

    pub fn units(&self) -> u64 {
        self.units
    }

    /// Seconds since creation, in the clock's own notion of time.
    pub fn elapsed(&self) -> f64 {
        match self.mode {
            ClockMode::Wall => self.start.elapsed().as_secs_f64(),
            ClockMode::Work { units_per_second } => self.units as f64 / units_per_second,
        }
    }

    pub fn expired(&self, deadline: Option<f64>) -> bool {
        deadline.is_some_and(|d| self.elapsed() >= d)
    }
}
