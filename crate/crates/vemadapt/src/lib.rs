//! Command-line driver, file formats and reports for adaptive virtual
//! element runs built on `vemadapt-core`.

pub mod config;
pub mod meshio;
pub mod report;
pub mod svg;
pub mod sweep;

pub use vemadapt_core;

use std::time::Instant;

use vemadapt_core::adapt::Clock;

/// Wall clock measured from construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock(Instant);

impl StdClock {
    pub fn new() -> Self {
        StdClock(Instant::now())
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
