use serde::Serialize;
use thiserror::Error;

use super::memory::{PartitionUsage, PortViolation};

/// Version of the JSON layout produced by [`CycleReport::to_json`].
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// On-chip storage, in cells (grid and blurred cells) or pixels (line
/// buffer).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiveMemory {
    pub grid_cells: usize,
    pub blurred_cells: usize,
    pub line_buffer_peak: usize,
    pub line_buffer_capacity: usize,
    pub total: usize,
}

/// Arithmetic issued per cycle by each unit; independent of the radius.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitOps {
    pub blur_taps_per_cycle: u32,
    pub slice_corners_per_cycle: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FpsEstimate {
    pub f_clk_hz: f64,
    pub fps: f64,
}

/// Cycle-level account of one streaming run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub schema_version: u32,
    pub width: usize,
    pub height: usize,
    pub radius: usize,
    pub lag_rows: usize,
    pub total_cycles: u64,
    pub stall_cycles: u64,
    pub lb_peak: usize,
    pub partitions: Vec<PartitionUsage>,
    pub lb_max_enqueues: u32,
    pub lb_max_dequeues: u32,
    pub violation_count: u64,
    pub violations: Vec<PortViolation>,
    pub live_memory: LiveMemory,
    pub ops: UnitOps,
    /// The image was too narrow for the pipeline and was processed by the
    /// three-pass engine instead; cycle fields are zero.
    pub fallback: bool,
    /// Pixels emitted by the slicing unit in each non-stall iteration.
    #[serde(skip)]
    pub emitted_per_iteration: Vec<u8>,
}

impl CycleReport {
    pub fn predicted_fps(&self, f_clk_hz: f64) -> f64 {
        if self.total_cycles == 0 {
            return f64::INFINITY;
        }
        f_clk_hz / self.total_cycles as f64
    }

    /// Report plus an fps prediction for each clock frequency.
    pub fn to_json(&self, f_clks_hz: &[f64]) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report is serializable");
        let fps: Vec<FpsEstimate> = f_clks_hz
            .iter()
            .map(|&f| FpsEstimate {
                f_clk_hz: f,
                fps: self.predicted_fps(f),
            })
            .collect();
        v["predicted_fps"] = serde_json::to_value(fps).expect("fps list is serializable");
        v
    }
}

/// Successful audit outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditVerdict {
    pub max_partition_accesses: u32,
}

impl std::fmt::Display for AuditVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "II=1 feasible (max {} accesses per partition per cycle)",
            self.max_partition_accesses
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{count} port conflicts, first at cycle {}", .violations.first().map_or(0, |v| v.cycle))]
pub struct AuditFailure {
    pub count: u64,
    pub violations: Vec<PortViolation>,
}

/// Checks that no memory partition served more than two accesses and the
/// line buffer no more than one enqueue and one dequeue in any cycle.
pub fn audit_memory_accesses(report: &CycleReport) -> Result<AuditVerdict, AuditFailure> {
    if report.violation_count > 0 {
        return Err(AuditFailure {
            count: report.violation_count,
            violations: report.violations.clone(),
        });
    }
    Ok(AuditVerdict {
        max_partition_accesses: report
            .partitions
            .iter()
            .map(|p| p.max_accesses)
            .max()
            .unwrap_or(0),
    })
}
