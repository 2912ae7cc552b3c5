//! Single-layer perceptron held in one window-addressed memristor.
//!
//! For `n` inputs the device carries `n + 2` internal variables: the input
//! weights, the bias weight, and the learning rate (last). Training writes each
//! weight through its own addressing window so the others stay frozen.

use rand::Rng;

use crate::data::shuffle_epoch;
use crate::device::{MemristorState, WindowSpec};
use crate::error::{Error, Result};
use crate::metrics::sample_cost;

/// One labelled example. Inputs double as input currents.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub t: f64,
}

impl Sample {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        Self { x, t }
    }
}

/// Device layout for an [`SlpMachine`].
#[derive(Debug, Clone, PartialEq)]
pub struct SlpConfig {
    pub window: WindowSpec,
    /// Weights saturate at `[-weight_bound, weight_bound]`.
    pub weight_bound: f64,
}

impl Default for SlpConfig {
    fn default() -> Self {
        Self {
            window: WindowSpec::default(),
            weight_bound: 20.0,
        }
    }
}

/// Logistic activation of `v + w_b`, with its derivative in `v`.
pub fn activation_g(v: f64, w_b: f64) -> (f64, f64) {
    let out = 1.0 / (1.0 + (-(v + w_b)).exp());
    (out, out * (1.0 - out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlpMachine {
    device: MemristorState,
    input_dim: usize,
}

impl SlpMachine {
    pub fn new(weights: &[f64], bias: f64, learning_rate: f64, config: &SlpConfig) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be > 0, got {learning_rate}"
            )));
        }
        if !(config.weight_bound > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "weight bound must be > 0, got {}",
                config.weight_bound
            )));
        }
        let input_dim = weights.len();
        let mut gamma = weights.to_vec();
        gamma.push(bias);
        gamma.push(learning_rate);
        let b = config.weight_bound;
        let mut bounds = vec![(-b, b); input_dim + 1];
        bounds.push((0.0, learning_rate.max(b)));
        let device = MemristorState::new(gamma, config.window.clone(), bounds)?;
        Ok(Self { device, input_dim })
    }

    /// Glorot-uniform weights and bias, `U(-L, L)` with `L = sqrt(6 / (n + 1))`.
    pub fn glorot<R: Rng + ?Sized>(
        input_dim: usize,
        learning_rate: f64,
        config: &SlpConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let limit = (6.0 / (input_dim as f64 + 1.0)).sqrt();
        let weights: Vec<f64> = (0..input_dim).map(|_| rng.gen_range(-limit..=limit)).collect();
        let bias = rng.gen_range(-limit..=limit);
        Self::new(&weights, bias, learning_rate, config)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn device(&self) -> &MemristorState {
        &self.device
    }

    pub fn weights(&self) -> &[f64] {
        &self.device.gamma()[..self.input_dim]
    }

    pub fn bias_weight(&self) -> f64 {
        self.device.gamma()[self.input_dim]
    }

    pub fn learning_rate(&self) -> f64 {
        self.device.gamma()[self.input_dim + 1]
    }

    /// `sum_i w_i x_i`; the bias enters through [`activation_g`].
    pub fn net_input(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        Ok(self.weights().iter().zip(x).map(|(w, xi)| w * xi).sum())
    }

    pub fn output(&self, x: &[f64]) -> Result<f64> {
        Ok(activation_g(self.net_input(x)?, self.bias_weight()).0)
    }

    /// One forward/backward pass. Returns the error of the pre-update output.
    pub fn delta_rule_step(&mut self, sample: &Sample) -> Result<f64> {
        if self.device.bias_current() != 0.0 {
            return Err(Error::InvalidParameter("bias current must be 0 between steps".into()));
        }
        let v = self.net_input(&sample.x)?;
        let (out, slope) = activation_g(v, self.bias_weight());
        let diff = sample.t - out;
        let eta = self.learning_rate();
        for (i, &xi) in sample.x.iter().enumerate() {
            self.device.select_and_update(i, eta * diff * xi * slope)?;
        }
        self.device.select_and_update(self.input_dim, eta * diff * slope)?;
        Ok(sample_cost(sample.t, out))
    }

    /// Online training with a fresh shuffle per epoch. Returns the per-epoch
    /// total of pre-update sample errors.
    pub fn train<R: Rng + ?Sized>(&mut self, dataset: &[Sample], epochs: usize, rng: &mut R) -> Result<Vec<f64>> {
        if epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be >= 1".into()));
        }
        if dataset.is_empty() {
            return Err(Error::InvalidParameter("dataset must not be empty".into()));
        }
        let mut history = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            let order = shuffle_epoch(dataset, rng);
            let mut e_total = 0.0;
            for idx in order {
                e_total += self.delta_rule_step(&dataset[idx])?;
            }
            history.push(e_total);
        }
        Ok(history)
    }
}

/// Free-function form of [`SlpMachine::train`].
pub fn train_slp<R: Rng + ?Sized>(
    slp: &mut SlpMachine,
    dataset: &[Sample],
    epochs: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    slp.train(dataset, epochs, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use proptest::prelude::*;

    fn machine(w: [f64; 2], b: f64, eta: f64) -> SlpMachine {
        SlpMachine::new(&w, b, eta, &SlpConfig::default()).unwrap()
    }

    #[test]
    fn layout_has_two_extra_variables() {
        let m = machine([0.1, 0.2], 0.3, 0.1);
        assert_eq!(m.device().gamma(), &[0.1, 0.2, 0.3, 0.1]);
        assert_eq!(m.learning_rate(), 0.1);
        assert_eq!(m.bias_weight(), 0.3);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(SlpMachine::new(&[0.0, 0.0], 0.0, 0.0, &SlpConfig::default()).is_err());
        // three variables needed for one input plus bias plus rate, default has four
        assert!(SlpMachine::new(&[0.0], 0.0, 0.1, &SlpConfig::default()).is_err());
    }

    #[test]
    fn net_input_examples() {
        assert_eq!(machine([0.0, 0.0], 0.0, 0.1).net_input(&[1.0, 1.0]).unwrap(), 0.0);
        let m = machine([0.5, -0.25], 0.0, 0.1);
        assert_eq!(m.net_input(&[1.0, 1.0]).unwrap(), 0.25);
        assert_eq!(m.net_input(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(m.net_input(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn activation_examples() {
        assert_eq!(activation_g(0.0, 0.0), (0.5, 0.25));
        assert_eq!(activation_g(1.0, -1.0), (0.5, 0.25));
        let (out, d) = activation_g(50.0, 0.0);
        assert!(out > 1.0 - 1e-12 && d < 1e-12);
    }

    #[test]
    fn perfect_prediction_changes_nothing() {
        // saturated output equal to the target leaves zero error
        let mut m = machine([0.0, 0.0], -20.0, 0.1);
        let before = m.clone();
        let e = m.delta_rule_step(&Sample::new(vec![0.0, 0.0], 0.0)).unwrap();
        assert!(e < 1e-17);
        for (a, b) in m.weights().iter().zip(before.weights()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn hand_evaluated_step() {
        let mut m = machine([0.0, 0.0], 0.0, 0.1);
        let e = m.delta_rule_step(&Sample::new(vec![1.0, 0.0], 1.0)).unwrap();
        assert_eq!(e, 0.125);
        assert!((m.weights()[0] - 0.0125).abs() < 1e-15);
        assert_eq!(m.weights()[1], 0.0);
        assert!((m.bias_weight() - 0.0125).abs() < 1e-15);
        assert_eq!(m.learning_rate(), 0.1);
        assert_eq!(m.device().bias_current(), 0.0);
    }

    #[test]
    fn zero_input_only_moves_bias() {
        let mut m = machine([0.3, -0.7], 0.0, 0.1);
        m.delta_rule_step(&Sample::new(vec![0.0, 0.0], 0.0)).unwrap();
        assert_eq!(m.weights(), &[0.3, -0.7]);
        assert!(m.bias_weight() < 0.0);
    }

    #[test]
    fn single_perfect_sample_history() {
        let mut m = machine([0.0, 0.0], -19.9, 0.1);
        let data = vec![Sample::new(vec![0.0, 0.0], 0.0)];
        let hist = m.train(&data, 1, &mut seeded_rng(0)).unwrap();
        assert_eq!(hist.len(), 1);
        assert!(hist[0] < 1e-16);
    }

    #[test]
    fn train_rejects_empty_inputs() {
        let mut m = machine([0.0, 0.0], 0.0, 0.1);
        assert!(m.train(&[], 1, &mut seeded_rng(0)).is_err());
        let data = vec![Sample::new(vec![0.0, 0.0], 0.0)];
        assert!(m.train(&data, 0, &mut seeded_rng(0)).is_err());
    }

    #[test]
    fn glorot_draws_within_limit() {
        let mut rng = seeded_rng(3);
        let limit = 2.0f64.sqrt();
        for _ in 0..1000 {
            let m = SlpMachine::glorot(2, 0.1, &SlpConfig::default(), &mut rng).unwrap();
            assert!(m.weights().iter().all(|w| w.abs() <= limit));
            assert!(m.bias_weight().abs() <= limit);
        }
    }

    proptest! {
        #[test]
        fn update_direction_follows_error_and_input(
            w1 in -2.0f64..2.0, w2 in -2.0f64..2.0, b in -2.0f64..2.0,
            x1 in 0u8..2, x2 in 0u8..2, t in 0u8..2,
        ) {
            let mut m = machine([w1, w2], b, 0.1);
            let x = vec![x1 as f64, x2 as f64];
            let diff = t as f64 - m.output(&x).unwrap();
            let before = m.weights().to_vec();
            m.delta_rule_step(&Sample::new(x.clone(), t as f64)).unwrap();
            for i in 0..2 {
                let change = m.weights()[i] - before[i];
                let expected = diff * x[i];
                prop_assert!(change == 0.0 && expected == 0.0 || change.signum() == expected.signum());
            }
            prop_assert_eq!(m.learning_rate(), 0.1);
        }

        #[test]
        fn equal_seeds_give_identical_histories(seed in 0u64..1000) {
            let data: Vec<Sample> = (0..8)
                .map(|i| Sample::new(vec![(i & 1) as f64, ((i >> 1) & 1) as f64], ((i & 1) | ((i >> 1) & 1)) as f64))
                .collect();
            let run = || {
                let mut rng = seeded_rng(seed);
                let mut m = SlpMachine::glorot(2, 0.1, &SlpConfig::default(), &mut rng).unwrap();
                m.train(&data, 5, &mut rng).unwrap()
            };
            prop_assert_eq!(run(), run());
        }
    }
}
