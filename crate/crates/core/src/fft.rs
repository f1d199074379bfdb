//! Two-dimensional transforms between stored modes and the padded
//! tangential grid.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::space::ChannelSpace;
use crate::C64;

/// Planned transforms for one `my × mx` plane stored row-major (`y` outer).
pub struct PlaneFft {
    mx: usize,
    my: usize,
    fx: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

impl PlaneFft {
    pub fn new(mx: usize, my: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            mx,
            my,
            fx: planner.plan_fft_forward(mx),
            ix: planner.plan_fft_inverse(mx),
            fy: planner.plan_fft_forward(my),
            iy: planner.plan_fft_inverse(my),
        }
    }

    pub fn len(&self) -> usize {
        self.mx * self.my
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn apply(&self, buf: &mut [C64], fx: &Arc<dyn Fft<f64>>, fy: &Arc<dyn Fft<f64>>) {
        fx.process(buf);
        let mut col = vec![C64::new(0.0, 0.0); self.my];
        for x in 0..self.mx {
            for y in 0..self.my {
                col[y] = buf[y * self.mx + x];
            }
            fy.process(&mut col);
            for y in 0..self.my {
                buf[y * self.mx + x] = col[y];
            }
        }
    }

    /// Spectral coefficients to grid values: `u(x) = Σ û(k) e^{ik·x}`.
    pub fn inverse(&self, buf: &mut [C64]) {
        self.apply(buf, &self.ix, &self.iy);
    }

    /// Grid values to spectral coefficients (normalized).
    pub fn forward(&self, buf: &mut [C64]) {
        self.apply(buf, &self.fx, &self.fy);
        let s = 1.0 / self.len() as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }
}

fn wrap(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Scatter per-mode samples `values[mode][pt]` onto padded planes and return
/// real grid values indexed `(pt, y, x)` together with the largest imaginary
/// part encountered.
pub fn modes_to_grid(space: &ChannelSpace, plan: &PlaneFft, values: &[Vec<C64>]) -> (Vec<f64>, f64) {
    let (mx, my) = (space.resolution.mx, space.resolution.my);
    let npts = values.first().map_or(0, |v| v.len());
    let mut out = vec![0.0; npts * mx * my];
    let mut max_imag = 0.0f64;
    let mut plane = vec![C64::new(0.0, 0.0); mx * my];
    for pt in 0..npts {
        plane.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (mode, vals) in space.modes.iter().zip(values) {
            let v = vals[pt];
            plane[wrap(mode.k2, my) * mx + wrap(mode.k1, mx)] += v;
            if !mode.is_mean() {
                plane[wrap(-mode.k2, my) * mx + wrap(-mode.k1, mx)] += v.conj();
            }
        }
        plan.inverse(&mut plane);
        for (o, v) in out[pt * mx * my..(pt + 1) * mx * my].iter_mut().zip(&plane) {
            *o = v.re;
            max_imag = max_imag.max(v.im.abs());
        }
    }
    (out, max_imag)
}

/// Inverse of [`modes_to_grid`] restricted to the stored modes.
pub fn grid_to_modes(space: &ChannelSpace, plan: &PlaneFft, grid: &[f64], npts: usize) -> Vec<Vec<C64>> {
    let (mx, my) = (space.resolution.mx, space.resolution.my);
    let mut out = vec![vec![C64::new(0.0, 0.0); npts]; space.modes.len()];
    let mut plane = vec![C64::new(0.0, 0.0); mx * my];
    for pt in 0..npts {
        for (p, g) in plane.iter_mut().zip(&grid[pt * mx * my..(pt + 1) * mx * my]) {
            *p = C64::new(*g, 0.0);
        }
        plan.forward(&mut plane);
        for (mode, o) in space.modes.iter().zip(out.iter_mut()) {
            o[pt] = plane[wrap(mode.k2, my) * mx + wrap(mode.k1, mx)];
        }
    }
    out
}
