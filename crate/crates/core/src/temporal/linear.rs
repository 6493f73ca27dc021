use crate::error::Result;
use crate::model::{IntervalRecord, ScaleConfig, Tick, TickInterval};

use super::{check_len, discretize_records, IntervalIndex};

/// Plain array of intervals searched sequentially.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearScan {
    intervals: Vec<TickInterval>,
    scale: ScaleConfig,
}

impl LinearScan {
    pub fn build(records: &[IntervalRecord], scale: ScaleConfig) -> Result<Self> {
        Self::from_ticks(discretize_records(records, scale)?, scale)
    }

    pub fn from_ticks(intervals: Vec<TickInterval>, scale: ScaleConfig) -> Result<Self> {
        check_len(intervals.len())?;
        Ok(LinearScan { intervals, scale })
    }

    pub fn intervals(&self) -> &[TickInterval] {
        &self.intervals
    }
}

impl IntervalIndex for LinearScan {
    fn len(&self) -> usize {
        self.intervals.len()
    }

    fn scale(&self) -> ScaleConfig {
        self.scale
    }

    fn visit(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32)) {
        for (i, iv) in self.intervals.iter().enumerate() {
            if iv.intersects(l, r) {
                f(i as u32);
            }
        }
    }

    fn visit_hits(&self, l: Tick, r: Tick, f: &mut dyn FnMut(u32, TickInterval)) {
        for (i, iv) in self.intervals.iter().enumerate() {
            if iv.intersects(l, r) {
                f(i as u32, *iv);
            }
        }
    }

    fn space_bytes(&self) -> usize {
        self.intervals.len() * 16
    }
}
