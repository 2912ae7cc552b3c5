//! Memristor device models.
//!
//! Two families share this module:
//!
//! - [`DeviceParams`] describes an HP-style linear ion drift device with a single
//!   internal variable (doped film width). Node and read-pulse behaviour is built
//!   on it.
//! - [`MemristorState`] is a multi-variable device whose variables are addressed
//!   through disjoint current windows `(I_i, I_i + a)`. A bias current shifts an
//!   update signal into the window of the variable being written.
//!
//! Internal-variable dynamics are piecewise constant in time for a constant input
//! current, so pulses are integrated in closed form.

use crate::error::{Error, Result};

/// Duration of one write pulse. With unit duration an increment equals its rate.
pub const UPDATE_PULSE: f64 = 1.0;

/// Physical constants of an HP linear ion drift memristor, in dimensionless units
/// (`r_off` sets the resistance scale).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DeviceParams {
    /// Fully doped resistance.
    pub r_on: f64,
    /// Undoped resistance.
    pub r_off: f64,
    /// Film thickness.
    pub d: f64,
    /// Average ion mobility.
    pub mu_v: f64,
    /// Drift threshold current.
    pub i_gamma: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            r_on: 0.01,
            r_off: 1.0,
            d: 1.0,
            mu_v: 17.0,
            i_gamma: 0.0,
        }
    }
}

/// Outcome of a constant-current read pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseResult {
    pub final_gamma: f64,
    pub output_voltage: f64,
    pub duration: f64,
}

impl DeviceParams {
    pub fn new(r_on: f64, r_off: f64, d: f64, mu_v: f64, i_gamma: f64) -> Result<Self> {
        let params = Self {
            r_on,
            r_off,
            d,
            mu_v,
            i_gamma,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_on > 0.0 && self.r_on < self.r_off && self.r_off.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "require 0 < r_on < r_off, got r_on={} r_off={}",
                self.r_on, self.r_off
            )));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "film thickness must be > 0, got {}",
                self.d
            )));
        }
        if !(self.mu_v >= 0.0 && self.mu_v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ion mobility must be >= 0, got {}",
                self.mu_v
            )));
        }
        if !(self.i_gamma >= 0.0 && self.i_gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "drift threshold must be >= 0, got {}",
                self.i_gamma
            )));
        }
        Ok(())
    }

    /// Memristance for a doped width `gamma` over an effective thickness `d_eff`.
    pub fn memristance_over(&self, gamma: f64, d_eff: f64) -> Result<f64> {
        if !(0.0..=d_eff).contains(&gamma) {
            return Err(Error::Domain {
                value: gamma,
                lo: 0.0,
                hi: d_eff,
            });
        }
        let doped = gamma / d_eff;
        Ok(self.r_on * doped + self.r_off * (1.0 - doped))
    }

    pub fn memristance(&self, gamma: f64) -> Result<f64> {
        self.memristance_over(gamma, self.d)
    }

    /// Ohm's law, `V = R(gamma) I`.
    pub fn ohmic_output(&self, gamma: f64, current: f64) -> Result<f64> {
        Ok(self.memristance(gamma)? * current)
    }

    /// `mu_v * r_on / d`, the drift speed per unit current.
    pub fn drift_coefficient(&self) -> f64 {
        self.mu_v * self.r_on / self.d
    }

    /// `r_off * mu_v * r_on / d^2`, the coefficient of the `-I^2 t` read response.
    pub fn curvature(&self) -> f64 {
        self.r_off * self.mu_v * self.r_on / (self.d * self.d)
    }

    /// Thresholded drift speed of the doped width. Never negative.
    pub fn drift_rate(&self, current: f64) -> f64 {
        let drive = self.drift_coefficient() * current;
        if drive > self.i_gamma {
            drive - self.i_gamma
        } else {
            0.0
        }
    }

    /// Applies a constant current for `duration` starting from `gamma0`.
    ///
    /// The width drifts linearly and saturates at the film edges. The voltage at
    /// the end of the pulse uses the `r_off` dominated form `r_off (1 - gamma/d) I`.
    pub fn apply_read_pulse(&self, gamma0: f64, current: f64, duration: f64) -> Result<PulseResult> {
        if !(duration >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pulse duration must be >= 0, got {duration}"
            )));
        }
        if !(0.0..=self.d).contains(&gamma0) {
            return Err(Error::Domain {
                value: gamma0,
                lo: 0.0,
                hi: self.d,
            });
        }
        let final_gamma = (gamma0 + self.drift_rate(current) * duration).clamp(0.0, self.d);
        Ok(PulseResult {
            final_gamma,
            output_voltage: self.r_off * (1.0 - final_gamma / self.d) * current,
            duration,
        })
    }
}

/// Addressing windows of a multi-variable memristor.
///
/// Variable `i` drifts only while `|I|` lies in the open interval
/// `(thresholds[i], thresholds[i] + width)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WindowSpec {
    thresholds: Vec<f64>,
    width: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            thresholds: vec![10.0, 20.0, 30.0, 40.0],
            width: 3.0,
        }
    }
}

impl WindowSpec {
    pub fn new(thresholds: Vec<f64>, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "window width must be > 0, got {width}"
            )));
        }
        if thresholds.is_empty() {
            return Err(Error::InvalidParameter("at least one threshold is required".into()));
        }
        if !(thresholds[0] > width) {
            return Err(Error::InvalidParameter(format!(
                "smallest threshold {} must exceed the window width {width}",
                thresholds[0]
            )));
        }
        for pair in thresholds.windows(2) {
            if !(pair[1] - pair[0] > 2.0 * width) {
                return Err(Error::InvalidParameter(format!(
                    "thresholds {} and {} are not separated by more than twice the window width",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { thresholds, width })
    }

    /// Thresholds `first, first + spacing, ...` for `n` variables.
    pub fn evenly_spaced(n: usize, first: f64, spacing: f64, width: f64) -> Result<Self> {
        Self::new((0..n).map(|i| first + spacing * i as f64).collect(), width)
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    fn contains(&self, index: usize, magnitude: f64) -> bool {
        let thr = self.thresholds[index];
        magnitude > thr && magnitude < thr + self.width
    }
}

/// Write current split into its bias and signal sources.
///
/// Window membership depends on the superposed current. The drift rate inside a
/// window, `I - |I_b| sign(I)`, is the signal itself whenever both sources share a
/// sign, so it is taken from the signal without re-deriving it from a rounded sum.
#[derive(Debug, Clone, Copy)]
struct Drive {
    bias: f64,
    signal: f64,
}

impl Drive {
    fn addresses(&self, window: &WindowSpec, index: usize) -> bool {
        if self.same_sign() {
            let offset = window.thresholds[index] - self.bias.abs();
            let s = self.signal.abs();
            s > offset && s < offset + window.width
        } else {
            window.contains(index, (self.bias + self.signal).abs())
        }
    }

    fn rate(&self) -> f64 {
        if self.same_sign() {
            self.signal
        } else {
            let total = self.bias + self.signal;
            total - self.bias.abs() * total.signum()
        }
    }

    fn same_sign(&self) -> bool {
        self.signal == 0.0 || self.bias == 0.0 || (self.signal > 0.0) == (self.bias > 0.0)
    }
}

/// A memristor with several window-addressed internal variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MemristorState {
    gamma: Vec<f64>,
    window: WindowSpec,
    i_b: f64,
    bounds: Vec<(f64, f64)>,
}

impl MemristorState {
    pub fn new(gamma: Vec<f64>, window: WindowSpec, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if window.len() != gamma.len() {
            return Err(Error::DimensionMismatch {
                expected: gamma.len(),
                actual: window.len(),
            });
        }
        if bounds.len() != gamma.len() {
            return Err(Error::DimensionMismatch {
                expected: gamma.len(),
                actual: bounds.len(),
            });
        }
        for (&g, &(lo, hi)) in gamma.iter().zip(&bounds) {
            if !(lo <= hi) {
                return Err(Error::InvalidParameter(format!("empty bound interval [{lo}, {hi}]")));
            }
            if !(lo..=hi).contains(&g) {
                return Err(Error::Domain { value: g, lo, hi });
            }
        }
        Ok(Self {
            gamma,
            window,
            i_b: 0.0,
            bounds,
        })
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn window(&self) -> &WindowSpec {
        &self.window
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn bias_current(&self) -> f64 {
        self.i_b
    }

    pub fn set_bias_current(&mut self, i_b: f64) {
        self.i_b = i_b;
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index < self.gamma.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                len: self.gamma.len(),
            })
        }
    }

    /// Drift rate of variable `index` under total input `current` and the
    /// currently set bias. Only the bias magnitude enters the rate, so that the
    /// positive and negative branches both return `I - I_b sign(I)`.
    pub fn window_update_rate(&self, index: usize, current: f64) -> Result<f64> {
        self.check_index(index)?;
        if !self.window.contains(index, current.abs()) {
            return Ok(0.0);
        }
        Ok(current - self.i_b.abs() * current.signum())
    }

    /// Holds a constant total current for `duration` with the current bias setting.
    pub fn apply_current(&mut self, current: f64, duration: f64) -> Result<()> {
        if !(duration >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pulse duration must be >= 0, got {duration}"
            )));
        }
        for index in 0..self.gamma.len() {
            let rate = self.window_update_rate(index, current)?;
            if rate != 0.0 {
                self.advance(index, rate * duration);
            }
        }
        Ok(())
    }

    fn advance(&mut self, index: usize, increment: f64) {
        let (lo, hi) = self.bounds[index];
        self.gamma[index] = (self.gamma[index] + increment).clamp(lo, hi);
    }

    /// Writes `delta` into variable `index` by biasing a unit pulse into its window.
    ///
    /// The bias is `+I_i` for non-negative updates and `-I_i` otherwise, and is
    /// cleared afterwards. Other variables are untouched because the windows are
    /// disjoint. The result saturates at the variable's bounds.
    pub fn select_and_update(&mut self, index: usize, delta: f64) -> Result<()> {
        self.check_index(index)?;
        if !(delta.abs() < self.window.width) {
            return Err(Error::WindowViolation {
                index,
                delta,
                width: self.window.width,
            });
        }
        let threshold = self.window.thresholds[index];
        self.i_b = if delta >= 0.0 { threshold } else { -threshold };
        let drive = Drive {
            bias: self.i_b,
            signal: delta,
        };
        for j in 0..self.gamma.len() {
            if drive.addresses(&self.window, j) {
                self.advance(j, drive.rate() * UPDATE_PULSE);
            }
        }
        self.i_b = 0.0;
        Ok(())
    }
}
