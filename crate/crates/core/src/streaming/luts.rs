use crate::bilateral::DenoiseParams;
use crate::grid::{axis_cell, intensity_cell, intensity_floor_frac};

use super::counters::block_phase_init;

/// Interpolation coordinate along one axis: lower cell, fraction and the
/// offset of the construction cell from the lower one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisCoord {
    pub floor: usize,
    pub frac: f64,
    pub round_offset: usize,
}

/// Lookup tables driving the pipeline.
///
/// * `l1`: intensity -> construction plane along z.
/// * `lz`: intensity -> interpolation coordinate along z.
/// * `l2`: row counter `cx` -> row fraction of the pixel being sliced
///   (which trails the construction row by the pipeline lag).
/// * `l3`: column counter `cy` -> column fraction.
#[derive(Debug, Clone)]
pub struct Luts {
    pub l1: [usize; 256],
    pub lz: [AxisCoord; 256],
    pub l2: Vec<AxisCoord>,
    pub l3: Vec<AxisCoord>,
}

fn phase_coord(phase: usize, radius: usize) -> AxisCoord {
    AxisCoord {
        floor: 0,
        frac: phase as f64 / radius as f64,
        round_offset: axis_cell(phase, radius),
    }
}

/// Builds all tables for a given pipeline lag (rows between construction
/// and slicing).
pub fn build_luts(params: &DenoiseParams, lag_rows: usize) -> Luts {
    let r = params.radius();
    let init = block_phase_init(r);
    let mut l1 = [0usize; 256];
    let mut lz = [AxisCoord {
        floor: 0,
        frac: 0.0,
        round_offset: 0,
    }; 256];
    for l in 0..=255u8 {
        l1[l as usize] = intensity_cell(l, params);
        let (floor, frac) = intensity_floor_frac(l, params);
        lz[l as usize] = AxisCoord {
            floor,
            frac,
            round_offset: l1[l as usize] - floor,
        };
    }
    let back = (init + lag_rows) % r;
    let l2 = (0..r)
        .map(|cx| phase_coord((cx + r - back) % r, r))
        .collect();
    let l3 = (0..r)
        .map(|cy| phase_coord((cy + r - init) % r, r))
        .collect();
    Luts { l1, lz, l2, l3 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_values() {
        for (r, s, t) in [(7, 4.0, 50.0), (2, 1.0, 10.0), (15, 16.0, 100.0)] {
            let p = DenoiseParams::new(r, s, t).unwrap();
            let luts = build_luts(&p, 2 * r + r / 2);
            assert_eq!(luts.l1[0], 0);
            assert!(luts.l1.windows(2).all(|w| w[0] <= w[1]));
        }
        let p = DenoiseParams::new(7, 4.0, 50.0).unwrap();
        assert_eq!(build_luts(&p, 17).l1[175], 2);
    }

    #[test]
    fn l2_l3_match_pixel_phase() {
        use super::super::counters::BlockCounters;
        for r in 1..=8 {
            let p = DenoiseParams::new(r, 2.0, 30.0).unwrap();
            let lag = 2 * r + r / 2;
            let luts = build_luts(&p, lag);
            let (w, h) = (3 * r + 2, 4 * r + 3);
            let mut c = BlockCounters::new(r);
            for x in 0..h + lag {
                for y in 0..w {
                    assert_eq!(luts.l3[c.cy].frac, (y % r) as f64 / r as f64);
                    if x >= lag {
                        let xo = x - lag;
                        assert_eq!(luts.l2[c.cx].frac, (xo % r) as f64 / r as f64);
                        assert_eq!(luts.l2[c.cx].round_offset, axis_cell(xo, r) - xo / r);
                    }
                    c.advance(y, w, r);
                }
            }
        }
    }
}
