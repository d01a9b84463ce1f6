use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{TimeGrid, Wavepacket};
use crate::error::{Error, Result};

/// Above this many multiply-adds the FFT path is used.
const DIRECT_LIMIT: usize = 1 << 16;

impl Wavepacket {
    /// Linear (zero-padded) convolution scaled by `dt`, approximating
    /// `∫ a(s)·k(t−s) ds`. The output grid starts at the sum of both starts
    /// and has `n_a + n_k − 1` points.
    pub fn convolve(&self, kernel: &Wavepacket) -> Result<Wavepacket> {
        if self.len() * kernel.len() <= DIRECT_LIMIT {
            self.convolve_direct(kernel)
        } else {
            self.convolve_fft(kernel)
        }
    }

    pub fn convolve_direct(&self, kernel: &Wavepacket) -> Result<Wavepacket> {
        let grid = output_grid(self.grid(), kernel.grid())?;
        let (a, k) = (self.samples(), kernel.samples());
        let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (i, &x) in a.iter().enumerate() {
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &y) in k.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        let dt = grid.dt();
        out.iter_mut().for_each(|v| *v *= dt);
        Wavepacket::new(grid, out)
    }

    pub fn convolve_fft(&self, kernel: &Wavepacket) -> Result<Wavepacket> {
        let grid = output_grid(self.grid(), kernel.grid())?;
        let m = grid.len().next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);

        let mut fa = padded(self.samples(), m);
        let mut fk = padded(kernel.samples(), m);
        fwd.process(&mut fa);
        fwd.process(&mut fk);
        for (x, y) in fa.iter_mut().zip(&fk) {
            *x *= y;
        }
        inv.process(&mut fa);
        let scale = grid.dt() / m as f64;
        fa.truncate(grid.len());
        fa.iter_mut().for_each(|v| *v *= scale);
        Wavepacket::new(grid, fa)
    }
}

fn padded(x: &[Complex64], m: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(m);
    v.extend_from_slice(x);
    v.resize(m, Complex64::new(0.0, 0.0));
    v
}

fn output_grid(a: &TimeGrid, k: &TimeGrid) -> Result<TimeGrid> {
    if !a.same_spacing(k) {
        return Err(Error::GridMismatch(format!(
            "convolution needs equal spacing, got {:e} and {:e}",
            a.dt(),
            k.dt()
        )));
    }
    TimeGrid::new(a.t_start() + k.t_start(), a.dt(), a.len() + k.len() - 1)
}
