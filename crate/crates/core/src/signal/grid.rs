use crate::error::{Error, Result};

/// Uniform time axis: points `t_start + k·dt` for `k` in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("grid spacing must be positive, got {dt}")));
        }
        if n < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points, got {n}")));
        }
        if !t_start.is_finite() {
            return Err(Error::invalid("grid start must be finite"));
        }
        Ok(Self { t_start, dt, n })
    }

    /// Grid symmetric about zero covering at least `[-half_width, half_width]`.
    pub fn centered(half_width: f64, dt: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::invalid("half width must be positive"));
        }
        let m = (half_width / dt).ceil() as usize;
        Self::new(-(m as f64) * dt, dt, 2 * m + 1)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `n·dt`.
    pub fn duration(&self) -> f64 {
        self.n as f64 * self.dt
    }

    /// Time of the last grid point.
    pub fn t_last(&self) -> f64 {
        self.time(self.n - 1)
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.time(k))
    }

    /// Position of `t` in units of samples from the first point.
    pub fn fractional_index(&self, t: f64) -> f64 {
        (t - self.t_start) / self.dt
    }

    pub fn contains(&self, t: f64) -> bool {
        let eps = 1e-9 * self.dt;
        t >= self.t_start - eps && t <= self.t_last() + eps
    }

    /// Identical start, spacing and length, up to rounding noise.
    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.n == other.n
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t_start - other.t_start).abs() <= 1e-9 * self.dt
    }

    pub fn same_spacing(&self, other: &TimeGrid) -> bool {
        (self.dt - other.dt).abs() <= 1e-12 * self.dt
    }

    pub(crate) fn ensure_same(&self, other: &TimeGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(start {:e}, dt {:e}, n {}) vs (start {:e}, dt {:e}, n {})",
                self.t_start, self.dt, self.n, other.t_start, other.dt, other.n
            )))
        }
    }

    /// `dt ≤ min_width / 20`. Logs a warning and returns `false` when the
    /// grid is too coarse for envelopes or responses of that width.
    pub fn check_resolution(&self, min_width: f64) -> bool {
        let ok = self.dt <= min_width / 20.0;
        if !ok {
            log::warn!(
                "grid spacing {:e} s exceeds 1/20 of the narrowest feature ({:e} s)",
                self.dt,
                min_width
            );
        }
        ok
    }
}
