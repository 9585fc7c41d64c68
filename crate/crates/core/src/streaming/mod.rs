//! Cycle-level model of the single-pass pipeline.
//!
//! Three units run concurrently on a raster-order pixel stream:
//! construction (GC) accumulates a row of grid cells and writes finished
//! columns into a three-plane window; blur (GF) sweeps that window one
//! lattice element per cycle into a two-plane blurred window; slicing (TI)
//! reads the blurred window for pixels delayed through a line buffer.
//! Every non-stall cycle consumes one input pixel and, once the lag has
//! elapsed, emits one output pixel.

mod counters;
mod luts;
mod memory;
mod report;

use std::collections::VecDeque;

pub use counters::{advance_counters, block_phase_init, BlockCounters};
pub use luts::{build_luts, AxisCoord, Luts};
pub use memory::{
    PackedColumn, PartitionLayout, PartitionUsage, PortViolation, PORTS_PER_PARTITION,
};
pub use report::{
    audit_memory_accesses, AuditFailure, AuditVerdict, CycleReport, FpsEstimate, LiveMemory,
    UnitOps, REPORT_SCHEMA_VERSION,
};

use memory::{BlurredPlaneWindow, GridPlaneWindow, PortLedger, GRID_PLANES};

use crate::bilateral::DenoiseParams;
use crate::error::{ParamError, ScheduleError};
use crate::grid::{
    bg_denoise, cell_bit_widths, coefficients, grid_dimensions, interpolate, needed_offsets,
    BgConfig, BlurKernel, BlurredCell, GridCell, GridDims, Neighborhood, TiWeights,
};
use crate::image::Image;
use crate::round_half_up;

/// Rows between construction of a pixel and its slicing.
pub fn lag_rows(radius: usize, weights: TiWeights) -> usize {
    let base = 2 * radius + radius / 2;
    match weights {
        TiWeights::Standard => base,
        // the far-corner convention always reads one plane further ahead
        TiWeights::FarCorner => base + 1,
    }
}

/// Narrowest image the pipeline accepts; narrower ones use the three-pass
/// engine.
pub fn min_stream_width(radius: usize) -> usize {
    2 * radius
}

/// Closed-form predictor for whether the blur unit keeps up with the pixel
/// stream: it does when one blurred plane (`gy * gz` cycles) fits in the
/// slack between construction and slicing.
pub fn stall_condition_holds(params: &DenoiseParams, width: usize) -> bool {
    let r = params.radius();
    let dims = grid_dimensions(params, width, 1);
    let lhs = (dims.gy * dims.gz) as i64;
    let rhs =
        2 * width as i64 - round_half_up(r as f64 / 2.0) as i64 - r as i64 - (width % r) as i64;
    lhs < rhs
}

/// Knobs that affect only the audit, never the schedule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StreamOptions {
    pub partitions: PartitionLayout,
}

impl StreamOptions {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(1..=GRID_PLANES).contains(&self.partitions.grid) {
            return Err(ParamError::new("grid_partitions", "must be in 1..=3"));
        }
        if !(1..=2).contains(&self.partitions.blurred) {
            return Err(ParamError::new("blurred_partitions", "must be in 1..=2"));
        }
        Ok(())
    }
}

/// Streams `image` through the pipeline with the default partitioning.
pub fn run_streaming(
    image: &Image,
    params: &DenoiseParams,
    config: &BgConfig,
) -> Result<(Image, CycleReport), ScheduleError> {
    run_streaming_with(image, params, config, &StreamOptions::default())
}

pub fn run_streaming_with(
    image: &Image,
    params: &DenoiseParams,
    config: &BgConfig,
    options: &StreamOptions,
) -> Result<(Image, CycleReport), ScheduleError> {
    options.validate().map_err(|e| ScheduleError {
        cycle: 0,
        resource: "options".into(),
        detail: e.to_string(),
    })?;
    if image.width() < min_stream_width(params.radius()) {
        return Ok((
            bg_denoise(image, params, config),
            fallback_report(image, params, config),
        ));
    }
    Pipeline::new(image, params, config, options).run()
}

fn ops() -> UnitOps {
    UnitOps {
        blur_taps_per_cycle: 27,
        slice_corners_per_cycle: 8,
    }
}

fn fallback_report(image: &Image, params: &DenoiseParams, config: &BgConfig) -> CycleReport {
    CycleReport {
        schema_version: REPORT_SCHEMA_VERSION,
        width: image.width(),
        height: image.height(),
        radius: params.radius(),
        lag_rows: lag_rows(params.radius(), config.weights),
        total_cycles: 0,
        stall_cycles: 0,
        lb_peak: 0,
        partitions: Vec::new(),
        lb_max_enqueues: 0,
        lb_max_dequeues: 0,
        violation_count: 0,
        violations: Vec::new(),
        live_memory: LiveMemory {
            grid_cells: 0,
            blurred_cells: 0,
            line_buffer_peak: 0,
            line_buffer_capacity: 0,
            total: 0,
        },
        ops: ops(),
        fallback: true,
        emitted_per_iteration: Vec::new(),
    }
}

/// Blur unit state.
struct BlurUnit {
    plane: usize,
    last_plane: usize,
    fetched: usize,
    col: usize,
    z: usize,
    finished: bool,
    /// Three planes by three ring columns by `gz`.
    reg: Vec<GridCell>,
    column: Vec<BlurredCell>,
}

/// One entry of the slicing unit's blurred-column cache.
#[derive(Clone)]
struct TiEntry {
    key: Option<(usize, usize)>,
    data: Vec<BlurredCell>,
}

struct Pipeline<'a> {
    image: &'a Image,
    w: usize,
    h: usize,
    r: usize,
    lag: usize,
    dims: GridDims,
    weights: TiWeights,
    luts: Luts,
    kernel: BlurKernel,
    counters: BlockCounters,
    grid_row: Vec<GridCell>,
    grid_mem: GridPlaneWindow,
    completed_planes: usize,
    gf: BlurUnit,
    gf_mem: BlurredPlaneWindow,
    ti_cache: Vec<TiEntry>,
    lb: VecDeque<u8>,
    lb_peak: usize,
    out: Vec<u8>,
    ti_next: usize,
    ports: PortLedger,
    cycle: u64,
}

/// Outcome of a readiness check: `Err` names the blocking resource.
type Ready = Result<(), &'static str>;

impl<'a> Pipeline<'a> {
    fn new(
        image: &'a Image,
        params: &DenoiseParams,
        config: &BgConfig,
        options: &StreamOptions,
    ) -> Self {
        let (w, h, r) = (image.width(), image.height(), params.radius());
        let dims = grid_dimensions(params, w, h);
        let lag = lag_rows(r, config.weights);
        let (count_bits, sum_bits) = cell_bit_widths(r);
        let gz = dims.gz;
        Self {
            image,
            w,
            h,
            r,
            lag,
            dims,
            weights: config.weights,
            luts: build_luts(params, lag),
            kernel: BlurKernel::new(params, &config.mode),
            counters: BlockCounters::new(r),
            grid_row: vec![GridCell::EMPTY; gz],
            grid_mem: GridPlaneWindow::new(dims.gy, gz, count_bits, sum_bits),
            completed_planes: 0,
            gf: BlurUnit {
                plane: 0,
                last_plane: (dims.gx - 1).min((h - 1) / r + 1),
                fetched: 0,
                col: 0,
                z: 0,
                finished: false,
                reg: vec![GridCell::EMPTY; 9 * gz],
                column: vec![BlurredCell::default(); gz],
            },
            gf_mem: BlurredPlaneWindow::new(dims.gy, gz),
            ti_cache: vec![
                TiEntry {
                    key: None,
                    data: vec![BlurredCell::default(); gz],
                };
                4
            ],
            lb: VecDeque::with_capacity((lag + 1) * w),
            lb_peak: 0,
            out: vec![0; w * h],
            ti_next: 0,
            ports: PortLedger::new(options.partitions),
            cycle: 0,
        }
    }

    fn run(mut self) -> Result<(Image, CycleReport), ScheduleError> {
        let (w, h, lag) = (self.w, self.h, self.lag);
        let mut emitted = Vec::with_capacity(w * (h + lag));
        let mut stalls = 0u64;
        let (mut x, mut y) = (0usize, 0usize);
        while x < h + lag {
            let gc_ready = if x < h { self.gc_ready(x, y) } else { Ok(()) };
            let ti_ready = if x >= lag {
                self.ti_ready(x, y).map(Some)
            } else {
                Ok(None)
            };
            let go = gc_ready.is_ok() && ti_ready.is_ok();
            let gc_planned = if go && x < h {
                self.gc_plan(x, y)
            } else {
                [0; GRID_PLANES]
            };
            let ti_planned = match &ti_ready {
                Ok(Some(plan)) if go => plan.per_slot,
                _ => [0; 2],
            };
            let progressed = self.gf_step(gc_planned, ti_planned);
            if go {
                if x < h {
                    self.gc_step(x, y);
                }
                let before = self.ti_next;
                if let Ok(Some(plan)) = &ti_ready {
                    self.ti_step(x, y, plan);
                }
                emitted.push((self.ti_next - before) as u8);
                self.counters.advance(y, w, self.r);
                y += 1;
                if y == w {
                    y = 0;
                    x += 1;
                }
            } else {
                stalls += 1;
                if !progressed {
                    let resource = gc_ready.err().or(ti_ready.err()).unwrap_or("pipeline");
                    return Err(ScheduleError {
                        cycle: self.cycle,
                        resource: resource.into(),
                        detail: format!(
                            "no unit can advance (row {x}, column {y}, blur plane {}, column {})",
                            self.gf.plane, self.gf.col
                        ),
                    });
                }
            }
            self.ports.end_cycle(self.cycle);
            self.cycle += 1;
        }
        if self.ti_next != w * h {
            return Err(ScheduleError {
                cycle: self.cycle,
                resource: "slice".into(),
                detail: format!("emitted {} of {} pixels", self.ti_next, w * h),
            });
        }
        let grid_cells = self.grid_mem.cells();
        let blurred_cells = self.gf_mem.cells();
        let report = CycleReport {
            schema_version: REPORT_SCHEMA_VERSION,
            width: w,
            height: h,
            radius: self.r,
            lag_rows: lag,
            total_cycles: self.cycle,
            stall_cycles: stalls,
            lb_peak: self.lb_peak,
            partitions: self.ports.usage(),
            lb_max_enqueues: self.ports.enq_max,
            lb_max_dequeues: self.ports.deq_max,
            violation_count: self.ports.violation_count,
            violations: std::mem::take(&mut self.ports.violations),
            live_memory: LiveMemory {
                grid_cells,
                blurred_cells,
                line_buffer_peak: self.lb_peak,
                line_buffer_capacity: (lag + 1) * w,
                total: grid_cells + blurred_cells + self.lb_peak,
            },
            ops: ops(),
            fallback: false,
            emitted_per_iteration: emitted,
        };
        let out = Image::new(w, h, self.out).expect("dimensions unchanged");
        Ok((out, report))
    }

    /// A grid word holding plane `q` is dead once the blur unit has
    /// fetched it for plane `q + 1`, the last plane that reads it.
    fn grid_word_dead(&self, q: usize, col: usize) -> bool {
        let gf = &self.gf;
        gf.finished || q + 1 < gf.plane || (q + 1 == gf.plane && gf.fetched > col)
    }

    fn gc_ready(&self, x: usize, y: usize) -> Ready {
        let c = &self.counters;
        if c.block_right(y, self.w, self.r) {
            match self.grid_mem.tag(c.plane, c.py).plane {
                Some(q) if q != c.plane && !self.grid_word_dead(q, c.py) => {
                    return Err("grid window")
                }
                _ => {}
            }
        }
        let _ = x;
        Ok(())
    }

    fn gc_plan(&self, x: usize, y: usize) -> [u32; GRID_PLANES] {
        let c = &self.counters;
        let mut n = [0; GRID_PLANES];
        let slot = GridPlaneWindow::slot(c.plane);
        if c.block_left(y) && !c.block_top(x) {
            n[slot] += 1;
        }
        if c.block_right(y, self.w, self.r) {
            n[slot] += 1;
        }
        n
    }

    fn gc_step(&mut self, x: usize, y: usize) {
        let c = self.counters;
        let (w, h, r) = (self.w, self.h, self.r);
        if c.block_left(y) {
            if c.block_top(x) {
                self.grid_row.iter_mut().for_each(|g| *g = GridCell::EMPTY);
            } else {
                self.grid_mem.load(c.plane, c.py, &mut self.grid_row);
                self.ports.grid(c.plane);
            }
        }
        let l = self.image.get(x, y);
        self.grid_row[self.luts.l1[l as usize]].add_pixel(l);
        let bottom = c.block_bottom(x, h, r);
        if c.block_right(y, w, r) {
            self.grid_mem.store(c.plane, c.py, &self.grid_row, bottom);
            self.ports.grid(c.plane);
        }
        if y == w - 1 && bottom {
            self.completed_planes = if x == h - 1 {
                self.dims.gx
            } else {
                c.plane + 1
            };
        }
        self.lb.push_back(l);
        self.ports.enqueue();
        self.lb_peak = self.lb_peak.max(self.lb.len());
    }

    fn grid_column_ready(&self, plane: usize, col: usize) -> bool {
        if plane < self.completed_planes {
            return true;
        }
        let tag = self.grid_mem.tag(plane, col);
        tag.plane == Some(plane) && tag.complete
    }

    /// Last raster index of a pixel that may read blurred column
    /// `(plane, col)`.
    fn last_reader(&self, plane: usize, col: usize) -> usize {
        let r = self.r;
        let row = (self.h - 1).min(r * (plane + 1) - 1);
        let c = (self.w - 1).min(r * (col + 1) - 1);
        row * self.w + c
    }

    fn blurred_word_free(&self, plane: usize, col: usize) -> bool {
        match self.gf_mem.holds(plane, col) {
            Some(q) if q != plane => {
                self.ti_next >= self.out.len() || self.ti_next > self.last_reader(q, col)
            }
            _ => true,
        }
    }

    fn gf_step(&mut self, gc_planned: [u32; GRID_PLANES], ti_planned: [u32; 2]) -> bool {
        if self.gf.finished {
            return false;
        }
        let (gx, gy, gz) = (self.dims.gx, self.dims.gy, self.dims.gz);
        let mut progressed = false;

        let j = self.gf.col;
        if self.gf.fetched >= (j + 2).min(gy) {
            let z = self.gf.z;
            let plane = self.gf.plane;
            let store_ok = ti_planned[BlurredPlaneWindow::slot(plane)] < PORTS_PER_PARTITION
                && self.blurred_word_free(plane, j);
            if z + 1 < gz || store_ok {
                let mut n: Neighborhood = Default::default();
                for (a, na) in n.iter_mut().enumerate() {
                    for (b, nb) in na.iter_mut().enumerate() {
                        let col = j + b;
                        if col == 0 || col > gy {
                            continue;
                        }
                        let base = (a * 3 + (col - 1) % 3) * gz;
                        for (cz, cell) in nb.iter_mut().enumerate() {
                            let zz = z + cz;
                            if zz == 0 || zz > gz {
                                continue;
                            }
                            *cell = self.gf.reg[base + zz - 1];
                        }
                    }
                }
                self.gf.column[z] = self.kernel.blur_cell(&n);
                progressed = true;
                if z + 1 == gz {
                    self.gf_mem.store(plane, j, &self.gf.column);
                    self.ports.blurred(plane);
                    self.gf.z = 0;
                    self.gf.col += 1;
                    if self.gf.col == gy {
                        self.gf.col = 0;
                        self.gf.fetched = 0;
                        self.gf.plane += 1;
                        if self.gf.plane > self.gf.last_plane {
                            self.gf.finished = true;
                            return true;
                        }
                    }
                } else {
                    self.gf.z += 1;
                }
            }
        }

        let c = self.gf.fetched;
        if c < gy && c <= self.gf.col + 1 {
            let x = self.gf.plane;
            let planes = (x.saturating_sub(1)..=x + 1).filter(|&p| p + 1 >= x && p < gx);
            let ready = planes.clone().all(|p| self.grid_column_ready(p, c));
            let ports_free = planes
                .clone()
                .all(|p| gc_planned[GridPlaneWindow::slot(p)] < PORTS_PER_PARTITION);
            if ready && ports_free {
                for a in 0..3 {
                    let base = (a * 3 + c % 3) * gz;
                    let dst = &mut self.gf.reg[base..base + gz];
                    let p = (x + a).checked_sub(1).filter(|&p| p < gx);
                    match p {
                        Some(p) if self.grid_mem.tag(p, c).plane == Some(p) => {
                            self.grid_mem.load(p, c, dst);
                            self.ports.grid(p);
                        }
                        Some(p) => {
                            dst.iter_mut().for_each(|g| *g = GridCell::EMPTY);
                            self.ports.grid(p);
                        }
                        None => dst.iter_mut().for_each(|g| *g = GridCell::EMPTY),
                    }
                }
                self.gf.fetched += 1;
                progressed = true;
            }
        }
        progressed
    }

    #[inline]
    fn cache_slot(plane: usize, col: usize) -> usize {
        (plane % 2) * 2 + col % 2
    }

    /// Where the head of the line buffer lands in the blurred lattice and
    /// which columns it must pull in; `Err` if one is not yet blurred.
    fn ti_ready(&self, x: usize, y: usize) -> Result<TiPlan, &'static str> {
        let l = *self.lb.front().ok_or("line buffer")?;
        let c = &self.counters;
        let ax = self.luts.l2[c.cx];
        let ay = self.luts.l3[c.cy];
        let az = self.luts.lz[l as usize];
        let base = [(x - self.lag) / self.r, y / self.r, az.floor];
        let coefs = coefficients([ax.frac, ay.frac, az.frac], self.weights);
        let round = [ax.round_offset, ay.round_offset, az.round_offset];
        let need = needed_offsets(&coefs, round);
        let mut loads = [[false; 2]; 2];
        let mut per_slot = [0u32; 2];
        for i in 0..2 {
            for j in 0..2 {
                if !(need[0][i] && need[1][j]) {
                    continue;
                }
                let (p, c) = (base[0] + i, base[1] + j);
                if self.ti_cache[Self::cache_slot(p, c)].key != Some((p, c)) {
                    if self.gf_mem.holds(p, c) != Some(p) {
                        return Err("blurred window");
                    }
                    loads[i][j] = true;
                    per_slot[BlurredPlaneWindow::slot(p)] += 1;
                }
            }
        }
        Ok(TiPlan {
            base,
            coefs,
            round,
            loads,
            per_slot,
        })
    }

    fn ti_step(&mut self, x: usize, y: usize, plan: &TiPlan) {
        self.lb.pop_front().expect("checked by ti_ready");
        self.ports.dequeue();
        debug_assert_eq!(self.ti_next, (x - self.lag) * self.w + y);
        let base = plan.base;
        for i in 0..2 {
            for j in 0..2 {
                if plan.loads[i][j] {
                    let (p, c) = (base[0] + i, base[1] + j);
                    let entry = &mut self.ti_cache[Self::cache_slot(p, c)];
                    self.gf_mem.load(p, c, &mut entry.data);
                    entry.key = Some((p, c));
                    self.ports.blurred(p);
                }
            }
        }
        let cache = &self.ti_cache;
        let v = interpolate(&plan.coefs, plan.round, |i, j, k| {
            let (p, c) = (base[0] + i, base[1] + j);
            let entry = &cache[Self::cache_slot(p, c)];
            debug_assert_eq!(entry.key, Some((p, c)));
            entry.data[base[2] + k].value
        });
        self.out[self.ti_next] = v;
        self.ti_next += 1;
    }
}

/// Slicing work for the current pixel.
struct TiPlan {
    base: [usize; 3],
    coefs: [[f64; 2]; 3],
    round: [usize; 3],
    loads: [[bool; 2]; 2],
    per_slot: [u32; 2],
}

#[cfg(test)]
mod tests;
