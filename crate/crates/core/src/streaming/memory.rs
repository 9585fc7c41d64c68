//! On-chip memories of the pipeline: packed grid plane windows, blurred
//! plane windows and per-cycle port accounting.

use serde::Serialize;

use crate::grid::{BlurredCell, GridCell};

/// One grid column `grid(x, y, *)` packed into a single wide word.
///
/// Fields are laid out most-significant first as
/// `count[gz-1], sum[gz-1], ..., count[0], sum[0]`; limbs are little-endian.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedColumn {
    limbs: Vec<u64>,
}

impl PackedColumn {
    pub fn zeroed(gz: usize, count_bits: u32, sum_bits: u32) -> Self {
        let bits = gz * (count_bits + sum_bits) as usize;
        Self {
            limbs: vec![0; bits.div_ceil(64).max(1)],
        }
    }

    pub fn pack(cells: &[GridCell], count_bits: u32, sum_bits: u32) -> Self {
        let mut word = Self::zeroed(cells.len(), count_bits, sum_bits);
        word.store(cells, count_bits, sum_bits);
        word
    }

    /// Overwrites this word with `cells`.
    pub fn store(&mut self, cells: &[GridCell], count_bits: u32, sum_bits: u32) {
        self.limbs.iter_mut().for_each(|l| *l = 0);
        let pair = (count_bits + sum_bits) as usize;
        for (z, cell) in cells.iter().enumerate() {
            debug_assert!(
                (cell.count as u64) < 1u64 << count_bits,
                "count overflows field"
            );
            debug_assert!((cell.sum as u64) < 1u64 << sum_bits, "sum overflows field");
            self.set_bits(z * pair, sum_bits, cell.sum as u64);
            self.set_bits(z * pair + sum_bits as usize, count_bits, cell.count as u64);
        }
    }

    pub fn unpack_into(&self, out: &mut [GridCell], count_bits: u32, sum_bits: u32) {
        let pair = (count_bits + sum_bits) as usize;
        for (z, cell) in out.iter_mut().enumerate() {
            cell.sum = self.get_bits(z * pair, sum_bits) as u32;
            cell.count = self.get_bits(z * pair + sum_bits as usize, count_bits) as u32;
        }
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    /// Bit image, most significant bit first, `len` bits long.
    pub fn to_bit_string(&self, len: usize) -> String {
        (0..len)
            .rev()
            .map(|i| {
                if self.limbs[i / 64] >> (i % 64) & 1 == 1 {
                    '1'
                } else {
                    '0'
                }
            })
            .collect()
    }

    /// `width <= 32`, so a field spans at most two limbs.
    #[inline]
    fn set_bits(&mut self, offset: usize, width: u32, value: u64) {
        let (limb, shift) = (offset / 64, offset % 64);
        self.limbs[limb] |= value << shift;
        if shift + width as usize > 64 {
            self.limbs[limb + 1] |= value >> (64 - shift);
        }
    }

    #[inline]
    fn get_bits(&self, offset: usize, width: u32) -> u64 {
        let (limb, shift) = (offset / 64, offset % 64);
        let mut v = self.limbs[limb] >> shift;
        if shift + width as usize > 64 {
            v |= self.limbs[limb + 1] << (64 - shift);
        }
        v & ((1u64 << width) - 1)
    }
}

/// Word metadata: which plane a word currently holds and whether that plane
/// has finished writing it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct WordTag {
    pub plane: Option<usize>,
    pub complete: bool,
}

/// Three grid planes (`grid^2D`), one partition per plane, addressed by
/// `plane mod 3`.
#[derive(Debug, Clone)]
pub(crate) struct GridPlaneWindow {
    pub gy: usize,
    pub gz: usize,
    pub count_bits: u32,
    pub sum_bits: u32,
    words: Vec<PackedColumn>,
    tags: Vec<WordTag>,
}

pub(crate) const GRID_PLANES: usize = 3;
pub(crate) const BLURRED_PLANES: usize = 2;

impl GridPlaneWindow {
    pub fn new(gy: usize, gz: usize, count_bits: u32, sum_bits: u32) -> Self {
        Self {
            gy,
            gz,
            count_bits,
            sum_bits,
            words: vec![PackedColumn::zeroed(gz, count_bits, sum_bits); GRID_PLANES * gy],
            tags: vec![WordTag::default(); GRID_PLANES * gy],
        }
    }

    #[inline]
    pub fn slot(plane: usize) -> usize {
        plane % GRID_PLANES
    }

    #[inline]
    fn addr(&self, plane: usize, col: usize) -> usize {
        Self::slot(plane) * self.gy + col
    }

    #[inline]
    pub fn tag(&self, plane: usize, col: usize) -> WordTag {
        self.tags[self.addr(plane, col)]
    }

    pub fn load(&self, plane: usize, col: usize, out: &mut [GridCell]) {
        let a = self.addr(plane, col);
        debug_assert_eq!(self.tags[a].plane, Some(plane));
        self.words[a].unpack_into(out, self.count_bits, self.sum_bits);
    }

    pub fn store(&mut self, plane: usize, col: usize, cells: &[GridCell], complete: bool) {
        let a = self.addr(plane, col);
        self.words[a].store(cells, self.count_bits, self.sum_bits);
        self.tags[a] = WordTag {
            plane: Some(plane),
            complete,
        };
    }

    pub fn cells(&self) -> usize {
        GRID_PLANES * self.gy * self.gz
    }
}

/// Two blurred planes (`gf^2D`), one partition per plane.
#[derive(Debug, Clone)]
pub(crate) struct BlurredPlaneWindow {
    pub gy: usize,
    pub gz: usize,
    words: Vec<BlurredCell>,
    tags: Vec<Option<usize>>,
}

impl BlurredPlaneWindow {
    pub fn new(gy: usize, gz: usize) -> Self {
        Self {
            gy,
            gz,
            words: vec![BlurredCell::default(); BLURRED_PLANES * gy * gz],
            tags: vec![None; BLURRED_PLANES * gy],
        }
    }

    #[inline]
    pub fn slot(plane: usize) -> usize {
        plane % BLURRED_PLANES
    }

    #[inline]
    fn addr(&self, plane: usize, col: usize) -> usize {
        Self::slot(plane) * self.gy + col
    }

    #[inline]
    pub fn holds(&self, plane: usize, col: usize) -> Option<usize> {
        self.tags[self.addr(plane, col)]
    }

    pub fn load(&self, plane: usize, col: usize, out: &mut [BlurredCell]) {
        let a = self.addr(plane, col);
        debug_assert_eq!(self.tags[a], Some(plane));
        out.copy_from_slice(&self.words[a * self.gz..(a + 1) * self.gz]);
    }

    pub fn store(&mut self, plane: usize, col: usize, column: &[BlurredCell]) {
        let a = self.addr(plane, col);
        self.words[a * self.gz..(a + 1) * self.gz].copy_from_slice(column);
        self.tags[a] = Some(plane);
    }

    pub fn cells(&self) -> usize {
        BLURRED_PLANES * self.gy * self.gz
    }
}

/// How physical plane slots map onto dual-port memory partitions for the
/// audit. The pipeline is designed for `grid = 3`, `blurred = 2`; smaller
/// counts merge slots into shared partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PartitionLayout {
    pub grid: usize,
    pub blurred: usize,
}

impl Default for PartitionLayout {
    fn default() -> Self {
        Self {
            grid: GRID_PLANES,
            blurred: BLURRED_PLANES,
        }
    }
}

/// Loads plus stores a single partition may serve in one cycle.
pub const PORTS_PER_PARTITION: u32 = 2;

/// A cycle in which a partition exceeded its port budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PortViolation {
    pub cycle: u64,
    pub partition: String,
    pub accesses: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionUsage {
    pub name: String,
    pub max_accesses: u32,
}

/// Retained violations; the total count is always exact.
const VIOLATION_SAMPLE: usize = 64;

/// Per-cycle access counters folded into running maxima.
#[derive(Debug, Clone)]
pub(crate) struct PortLedger {
    layout: PartitionLayout,
    grid_now: [u32; GRID_PLANES],
    blurred_now: [u32; BLURRED_PLANES],
    enq_now: u32,
    deq_now: u32,
    pub grid_max: Vec<u32>,
    pub blurred_max: Vec<u32>,
    pub enq_max: u32,
    pub deq_max: u32,
    pub violations: Vec<PortViolation>,
    pub violation_count: u64,
}

impl PortLedger {
    pub fn new(layout: PartitionLayout) -> Self {
        Self {
            layout,
            grid_now: [0; GRID_PLANES],
            blurred_now: [0; BLURRED_PLANES],
            enq_now: 0,
            deq_now: 0,
            grid_max: vec![0; layout.grid],
            blurred_max: vec![0; layout.blurred],
            enq_max: 0,
            deq_max: 0,
            violations: Vec::new(),
            violation_count: 0,
        }
    }

    #[inline]
    pub fn grid(&mut self, plane: usize) {
        self.grid_now[GridPlaneWindow::slot(plane)] += 1;
    }

    #[inline]
    pub fn blurred(&mut self, plane: usize) {
        self.blurred_now[BlurredPlaneWindow::slot(plane)] += 1;
    }

    #[inline]
    pub fn enqueue(&mut self) {
        self.enq_now += 1;
    }

    #[inline]
    pub fn dequeue(&mut self) {
        self.deq_now += 1;
    }

    fn flag(&mut self, cycle: u64, partition: String, accesses: u32) {
        self.violation_count += 1;
        if self.violations.len() < VIOLATION_SAMPLE {
            self.violations.push(PortViolation {
                cycle,
                partition,
                accesses,
            });
        }
    }

    pub fn end_cycle(&mut self, cycle: u64) {
        let mut grid = [0u32; GRID_PLANES];
        for (slot, n) in self.grid_now.iter().enumerate() {
            grid[slot % self.layout.grid] += n;
        }
        let mut blurred = [0u32; BLURRED_PLANES];
        for (slot, n) in self.blurred_now.iter().enumerate() {
            blurred[slot % self.layout.blurred] += n;
        }
        for (p, &n) in grid[..self.layout.grid].iter().enumerate() {
            self.grid_max[p] = self.grid_max[p].max(n);
            if n > PORTS_PER_PARTITION {
                self.flag(cycle, format!("grid[{p}]"), n);
            }
        }
        for (p, &n) in blurred[..self.layout.blurred].iter().enumerate() {
            self.blurred_max[p] = self.blurred_max[p].max(n);
            if n > PORTS_PER_PARTITION {
                self.flag(cycle, format!("grid_f[{p}]"), n);
            }
        }
        self.enq_max = self.enq_max.max(self.enq_now);
        self.deq_max = self.deq_max.max(self.deq_now);
        if self.enq_now > 1 {
            self.flag(cycle, "lb.enqueue".into(), self.enq_now);
        }
        if self.deq_now > 1 {
            self.flag(cycle, "lb.dequeue".into(), self.deq_now);
        }
        self.grid_now = [0; GRID_PLANES];
        self.blurred_now = [0; BLURRED_PLANES];
        self.enq_now = 0;
        self.deq_now = 0;
    }

    pub fn usage(&self) -> Vec<PartitionUsage> {
        let grid = self
            .grid_max
            .iter()
            .enumerate()
            .map(|(p, &m)| PartitionUsage {
                name: format!("grid[{p}]"),
                max_accesses: m,
            });
        let blurred = self
            .blurred_max
            .iter()
            .enumerate()
            .map(|(p, &m)| PartitionUsage {
                name: format!("grid_f[{p}]"),
                max_accesses: m,
            });
        grid.chain(blurred).collect()
    }
}
