//! Built-in parameter sets for the six reproduction targets.
//!
//! Each preset fixes one curve of its figure (the first value of `sweep`);
//! the other curves are reached by overriding the swept flag.

use crate::Command;

/// Inclusive SNR range in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridRange {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step).round() as usize;
        (0..=n).map(|i| self.start + self.step * i as f64).collect()
    }
}

/// The parameter a figure varies across its curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub parameter: &'static str,
    pub values: &'static [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub command: Command,
    pub kappa: f64,
    pub mu: f64,
    pub m: f64,
    pub rho: f64,
    pub branches: usize,
    pub constellation: Option<&'static str>,
    /// Chosen here; the figures do not state their grids.
    pub snr_db: GridRange,
    pub sweep: Sweep,
}

const SER_GRID: GridRange = GridRange { start: 0.0, stop: 40.0, step: 2.0 };

pub const PRESETS: [Preset; 6] = [
    Preset {
        name: "fig1",
        command: Command::Pdf,
        kappa: 2.0,
        mu: 2.0,
        m: 2.0,
        rho: 0.7,
        branches: 2,
        constellation: None,
        snr_db: GridRange { start: 0.0, stop: 0.0, step: 1.0 },
        sweep: Sweep { parameter: "m", values: &[2.0, 4.0, 6.0] },
    },
    Preset {
        name: "fig2",
        command: Command::Ser,
        kappa: 5.0,
        mu: 2.0,
        m: 2.0,
        rho: 0.5,
        branches: 2,
        constellation: Some("qpsk"),
        snr_db: SER_GRID,
        sweep: Sweep { parameter: "L", values: &[2.0, 3.0, 4.0, 5.0] },
    },
    Preset {
        name: "fig3",
        command: Command::Ser,
        kappa: 10.0,
        mu: 1.0,
        m: 3.0,
        rho: 0.1,
        branches: 2,
        constellation: Some("qpsk"),
        snr_db: SER_GRID,
        sweep: Sweep { parameter: "L", values: &[2.0, 3.0, 4.0] },
    },
    Preset {
        name: "fig4",
        command: Command::Ber,
        kappa: 2.0,
        mu: 2.0,
        m: 2.1,
        rho: 0.2,
        branches: 2,
        constellation: Some("16qam"),
        snr_db: SER_GRID,
        sweep: Sweep { parameter: "L", values: &[2.0, 3.0, 4.0, 5.0, 6.0] },
    },
    Preset {
        name: "fig5",
        command: Command::Ser,
        kappa: 5.0,
        mu: 2.0,
        m: 2.5,
        rho: 0.1,
        branches: 3,
        constellation: Some("qpsk"),
        snr_db: SER_GRID,
        sweep: Sweep { parameter: "rho", values: &[0.1, 0.5, 0.7, 0.8, 0.9] },
    },
    Preset {
        name: "fig6",
        command: Command::Capacity,
        kappa: 2.0,
        mu: 2.0,
        m: 1.2,
        rho: 0.5,
        branches: 2,
        constellation: None,
        snr_db: GridRange { start: -5.0, stop: 25.0, step: 1.0 },
        sweep: Sweep { parameter: "L", values: &[2.0, 3.0] },
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name.eq_ignore_ascii_case(name))
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}
