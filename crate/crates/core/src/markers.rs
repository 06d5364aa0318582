//! Lagrangian carriers for the gradient unknowns.
//!
//! Each family keeps a sorted list of markers that ride its
//! characteristics and carry `r_x` (minus family) or `s_x` (plus family).
//! Upwinded gradient fields lose their peaks once those drop below the
//! grid scale, which hides the Riccati blow-up; markers do not.

use crate::grid::{Boundary, Grid};

#[derive(Debug, Clone)]
pub(crate) struct MarkerFamily {
    /// Strictly increasing positions; unwrapped on periodic grids.
    pub pos: Vec<f64>,
    pub val: Vec<f64>,
    /// `-1` for the minus family, `+1` for the plus family.
    pub dir: f64,
    pub pos0: Vec<f64>,
    pub val0: Vec<f64>,
    pub dpos: Vec<f64>,
    pub dval: Vec<f64>,
}

impl MarkerFamily {
    /// One marker per cell centre carrying `values`.
    pub fn seed(grid: &Grid, values: &[f64], dir: f64) -> Self {
        MarkerFamily {
            pos: grid.centers(),
            val: values.to_vec(),
            dir,
            pos0: Vec::new(),
            val0: Vec::new(),
            dpos: Vec::new(),
            dval: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn max_abs(&self) -> f64 {
        self.val.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Same-family characteristics have not crossed.
    pub fn ordered(&self, grid: &Grid) -> bool {
        if self.pos.windows(2).any(|w| !(w[1] > w[0])) {
            return false;
        }
        match (grid.boundary, self.pos.first(), self.pos.last()) {
            (Boundary::Periodic, Some(a), Some(b)) => b - a < grid.length(),
            _ => true,
        }
    }

    /// Linear interpolation of the marker values onto the cell centres.
    pub fn deposit(&self, grid: &Grid, out: &mut [f64]) {
        let m = self.len();
        if m == 0 {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        let (pos, val) = (&self.pos, &self.val);
        match grid.boundary {
            Boundary::Periodic => {
                // Walk the centres in increasing order of their image in
                // [p0, p0 + L), advancing the bracketing marker alongside.
                let n = out.len();
                let l = grid.length();
                let p0 = pos[0];
                let dx = grid.dx();
                let first = ((p0 - grid.x_min) / dx - 0.5).ceil();
                let start = (first as i64).rem_euclid(n as i64) as usize;
                let mut j = 0;
                let mut prev = f64::NEG_INFINITY;
                for k in 0..n {
                    let i = (start + k) % n;
                    let x = p0 + (grid.center(i) - p0).rem_euclid(l);
                    if x < prev {
                        // rounding put the first centre at the far end
                        j = 0;
                    }
                    prev = x;
                    while j + 1 < m && pos[j + 1] <= x {
                        j += 1;
                    }
                    let (xb, vb) = if j + 1 == m {
                        (p0 + l, val[0])
                    } else {
                        (pos[j + 1], val[j + 1])
                    };
                    out[i] = lerp(pos[j], val[j], xb, vb, x);
                }
            }
            Boundary::Extrapolate => {
                for (i, o) in out.iter_mut().enumerate() {
                    let x = grid.center(i);
                    let j = pos.partition_point(|&p| p <= x);
                    *o = if j == 0 {
                        val[0]
                    } else if j == m {
                        val[m - 1]
                    } else {
                        lerp(pos[j - 1], val[j - 1], pos[j], val[j], x)
                    };
                }
            }
        }
    }

    /// Refill gaps wider than two cells, feed the inflow boundary and drop
    /// markers that have left the domain.
    pub fn maintain(&mut self, grid: &Grid) {
        let dx = grid.dx();
        if let Boundary::Extrapolate = grid.boundary {
            let (lo, hi) = (grid.x_min - 2.0 * dx, grid.x_max + 2.0 * dx);
            let keep: Vec<bool> = self.pos.iter().map(|&p| p >= lo && p <= hi).collect();
            if keep.iter().any(|k| !k) {
                let mut it = keep.iter();
                self.pos.retain(|_| *it.next().unwrap());
                let mut it = keep.iter();
                self.val.retain(|_| *it.next().unwrap());
            }
            // The ghost states are copies of the edge cells, so incoming
            // characteristics carry the edge marker's value.
            if self.dir < 0.0 {
                while let Some(&last) = self.pos.last() {
                    if grid.x_max - last < dx {
                        break;
                    }
                    let v = *self.val.last().unwrap();
                    self.pos.push(last + dx);
                    self.val.push(v);
                }
            } else {
                while let Some(&first) = self.pos.first() {
                    if first - grid.x_min < dx {
                        break;
                    }
                    let v = self.val[0];
                    self.pos.insert(0, first - dx);
                    self.val.insert(0, v);
                }
            }
        }
        let wide = 2.0 * dx;
        if self.pos.windows(2).any(|w| w[1] - w[0] > wide) {
            let mut pos = Vec::with_capacity(self.pos.len() + 8);
            let mut val = Vec::with_capacity(self.pos.len() + 8);
            for j in 0..self.pos.len() {
                pos.push(self.pos[j]);
                val.push(self.val[j]);
                if let (Some(&pn), Some(&vn)) = (self.pos.get(j + 1), self.val.get(j + 1)) {
                    let gap = pn - self.pos[j];
                    if gap > wide {
                        let parts = (gap / dx).ceil() as usize;
                        for k in 1..parts {
                            let w = k as f64 / parts as f64;
                            pos.push(self.pos[j] + w * gap);
                            val.push(self.val[j] + w * (vn - self.val[j]));
                        }
                    }
                }
            }
            self.pos = pos;
            self.val = val;
        }
        if let Boundary::Periodic = grid.boundary {
            let (first, last) = (self.pos[0], *self.pos.last().unwrap());
            let gap = first + grid.length() - last;
            if gap > wide {
                let (v0, vl) = (self.val[0], *self.val.last().unwrap());
                let parts = (gap / dx).ceil() as usize;
                for k in 1..parts {
                    let w = k as f64 / parts as f64;
                    self.pos.push(last + w * gap);
                    self.val.push(vl + w * (v0 - vl));
                }
            }
        }
    }
}

#[inline]
fn lerp(xa: f64, va: f64, xb: f64, vb: f64, x: f64) -> f64 {
    let w = (x - xa) / (xb - xa);
    va + w * (vb - va)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_markers_deposit_back_exactly() {
        let g = Grid::periodic(0.0, 1.0, 32).unwrap();
        let v: Vec<f64> = (0..32).map(|i| (i as f64 * 0.3).sin()).collect();
        let fam = MarkerFamily::seed(&g, &v, -1.0);
        let mut out = vec![0.0; 32];
        fam.deposit(&g, &mut out);
        assert_eq!(out, v);
    }

    #[test]
    fn shifted_periodic_markers_interpolate_across_the_seam() {
        let g = Grid::periodic(0.0, 1.0, 16).unwrap();
        let mut fam = MarkerFamily::seed(&g, &[1.0; 16], 1.0);
        fam.val[15] = 3.0;
        // Drift by one and a half periods less half a cell, so the seam
        // between the last and first marker straddles centre 7.
        fam.pos.iter_mut().for_each(|p| *p += 1.5 - 0.5 / 16.0);
        let mut out = vec![0.0; 16];
        fam.deposit(&g, &mut out);
        assert!((out[7] - 2.0).abs() < 1e-12, "{out:?}");
        assert!(fam.ordered(&g));
    }

    #[test]
    fn maintenance_fills_gaps_and_feeds_inflow() {
        let g = Grid::new(0.0, 16.0, 16, Boundary::Extrapolate).unwrap();
        let mut fam = MarkerFamily::seed(&g, &[2.0; 16], -1.0);
        fam.pos.iter_mut().enumerate().for_each(|(j, p)| {
            *p += if j > 8 { -1.0 } else { -3.0 };
        });
        fam.maintain(&g);
        assert!(fam.ordered(&g));
        assert!(fam.pos.windows(2).all(|w| w[1] - w[0] <= 2.0 + 1e-12));
        assert!(g.x_max - fam.pos.last().unwrap() < 1.0);
        assert!(fam.pos[0] >= g.x_min - 2.0);
        assert!(fam.val.iter().all(|&v| v == 2.0));
    }

    #[test]
    fn crossing_is_detected() {
        let g = Grid::periodic(0.0, 1.0, 16).unwrap();
        let mut fam = MarkerFamily::seed(&g, &[0.0; 16], 1.0);
        fam.pos[4] = fam.pos[6];
        assert!(!fam.ordered(&g));
    }
}
