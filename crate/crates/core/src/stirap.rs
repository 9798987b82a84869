//! Analytic Gaussian STIRAP pulse pairs in counterintuitive order.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::system::{Channel, ControlField, TimeGrid};

/// Gaussian pump/Stokes pair. The Stokes pulse is centred at
/// `T/2 - delay/2` and the pump at `T/2 + delay/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StirapParams {
    /// Common peak Rabi frequency (rad/fs).
    pub peak_amplitude: f64,
    /// Gaussian standard deviation of each envelope (fs).
    pub width: f64,
    /// Pump centre minus Stokes centre (fs).
    pub delay: f64,
    pub total_time: f64,
}

impl StirapParams {
    pub fn new(peak_amplitude: f64, width: f64, delay: f64, total_time: f64) -> Result<Self> {
        let p = Self {
            peak_amplitude,
            width,
            delay,
            total_time,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.peak_amplitude) {
            return Err(Error::InvalidParams(format!(
                "peak amplitude must be > 0, got {}",
                self.peak_amplitude
            )));
        }
        if !ok(self.width) {
            return Err(Error::InvalidParams(format!(
                "width must be > 0, got {}",
                self.width
            )));
        }
        if !ok(self.total_time) {
            return Err(Error::InvalidParams(format!(
                "total time must be > 0, got {}",
                self.total_time
            )));
        }
        if !(self.delay.is_finite() && self.delay >= 0.0 && self.delay < self.total_time) {
            return Err(Error::InvalidParams(format!(
                "delay must lie in [0, T), got {}",
                self.delay
            )));
        }
        Ok(())
    }

    pub fn stokes_center(&self) -> f64 {
        0.5 * (self.total_time - self.delay)
    }

    pub fn pump_center(&self) -> f64 {
        0.5 * (self.total_time + self.delay)
    }

    pub fn with_peak_amplitude(&self, peak_amplitude: f64) -> Result<Self> {
        Self::new(peak_amplitude, self.width, self.delay, self.total_time)
    }

    /// Overlap time of the two envelopes,
    /// `int Omega_p Omega_s dt / Omega_max^2` over the real line.
    pub fn overlap_time(&self) -> f64 {
        let s = self.width;
        (PI.sqrt() * s) * (-self.delay * self.delay / (4.0 * s * s)).exp()
    }

    /// Peak amplitude that gives the requested adiabaticity `Omega_max * tau`.
    pub fn with_adiabaticity(&self, omega_tau: f64) -> Result<Self> {
        self.with_peak_amplitude(omega_tau / self.overlap_time())
    }
}

/// Samples the pump and Stokes envelopes on `grid`, which must span
/// `[0, total_time]`.
pub fn make_stirap_fields(
    params: &StirapParams,
    grid: TimeGrid,
) -> Result<(ControlField, ControlField)> {
    params.validate()?;
    if (grid.t_end() - params.total_time).abs() > 1e-9 * params.total_time {
        return Err(Error::GridMismatch(format!(
            "grid ends at {} fs, pulses defined on [0, {}] fs",
            grid.t_end(),
            params.total_time
        )));
    }
    let (a, w) = (params.peak_amplitude, params.width);
    let (tp, ts) = (params.pump_center(), params.stokes_center());
    let pump = ControlField::gaussian(grid, Channel::Pump, a, tp, w)?;
    let stokes = ControlField::gaussian(grid, Channel::Stokes, a, ts, w)?;
    Ok((pump, stokes))
}

/// Adiabaticity figure of merit `Omega_max * tau` with `tau` the overlap time.
pub fn adiabaticity(params: &StirapParams) -> f64 {
    params.peak_amplitude * params.overlap_time()
}
