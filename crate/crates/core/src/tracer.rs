//! Toffoli and space accounting, standing in for a quantum trace simulator.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Coarse phase of a metered multiplication, used for the cost breakdown.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    #[default]
    Other,
    Split,
    Compute,
    Fold,
    Uncompute,
    Unsplit,
}

impl Phase {
    const ALL: [Phase; 6] = [
        Phase::Other,
        Phase::Split,
        Phase::Compute,
        Phase::Fold,
        Phase::Uncompute,
        Phase::Unsplit,
    ];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Other => "other",
            Phase::Split => "split",
            Phase::Compute => "compute",
            Phase::Fold => "fold",
            Phase::Uncompute => "uncompute",
            Phase::Unsplit => "unsplit",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResourceLog {
    toffoli: u64,
    allocated_bits: u64,
    high_water_bits: u64,
    phase: Phase,
    by_phase: [u64; Phase::ALL.len()],
}

/// Snapshot returned by [`ResourceLog::report`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Summary {
    pub toffoli: u64,
    pub allocated_bits: u64,
    pub high_water_bits: u64,
    pub breakdown: BTreeMap<Phase, u64>,
}

impl ResourceLog {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn record_toffoli(&mut self, count: u64) {
        self.toffoli += count;
        self.by_phase[self.phase.slot()] += count;
    }

    #[inline]
    pub fn track_alloc(&mut self, bits: u64) {
        self.allocated_bits += bits;
        self.high_water_bits = self.high_water_bits.max(self.allocated_bits);
    }

    #[inline]
    pub fn track_free(&mut self, bits: u64) -> Result<()> {
        if bits > self.allocated_bits {
            return Err(Error::Accounting {
                requested: bits,
                allocated: self.allocated_bits,
            });
        }
        self.allocated_bits -= bits;
        Ok(())
    }

    /// Switches the phase that subsequent Toffoli charges are attributed to,
    /// returning the previous one.
    pub fn enter_phase(&mut self, phase: Phase) -> Phase {
        std::mem::replace(&mut self.phase, phase)
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn toffoli(&self) -> u64 {
        self.toffoli
    }

    pub fn allocated_bits(&self) -> u64 {
        self.allocated_bits
    }

    pub fn high_water_bits(&self) -> u64 {
        self.high_water_bits
    }

    pub fn report(&self) -> Summary {
        let breakdown = Phase::ALL
            .iter()
            .filter(|p| self.by_phase[p.slot()] > 0)
            .map(|&p| (p, self.by_phase[p.slot()]))
            .collect();
        Summary {
            toffoli: self.toffoli,
            allocated_bits: self.allocated_bits,
            high_water_bits: self.high_water_bits,
            breakdown,
        }
    }
}
