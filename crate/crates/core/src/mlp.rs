//! Multilayer perceptron built from synaptic and node memristors.
//!
//! Synaptic memristors run in their linear regime and multiply the incoming
//! signal by a weight stored in their internal variable. Node memristors run in
//! the nonlinear regime: the node output is the voltage at the end of a read
//! pulse of duration `tau`, during which the doped width drifts with the input
//! current. Integrating that drift gives
//!
//! ```text
//! V(s) = m(g) s - kappa tau s^2,   m(g) = r_off (1 - g/D) + r_on g/D
//! ```
//!
//! where `g` is the node's stored bias variable (restored after the read) and
//! `kappa = r_off mu_v r_on / D^2`. Every weight change is written through the
//! device's addressing window, so an update whose magnitude reaches the window
//! width is rejected.

use rand::Rng;

use crate::data::shuffle_epoch;
use crate::device::{DeviceParams, MemristorState, WindowSpec};
use crate::error::{Error, Result};
use crate::metrics::sample_cost;
use crate::slp::Sample;

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Topology {
    layer_sizes: Vec<usize>,
}

impl Topology {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "topology needs input, at least one hidden and an output layer, got {layer_sizes:?}"
            )));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "layer sizes must be >= 1, got {layer_sizes:?}"
            )));
        }
        Ok(Self { layer_sizes })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Number of synapse layers (and of node layers).
    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// Glorot limit `sqrt(6 / (n_in + n_out))` of synapse layer `layer`.
    pub fn glorot_limit(&self, layer: usize) -> f64 {
        (6.0 / (self.layer_sizes[layer] + self.layer_sizes[layer + 1]) as f64).sqrt()
    }
}

impl Default for Topology {
    fn default() -> Self {
        Self {
            layer_sizes: vec![2, 2, 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasInit {
    Zero,
    Glorot,
}

/// Device parameters shared by every memristor of a network.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpDeviceConfig {
    pub params: DeviceParams,
    /// Node read-pulse duration.
    pub pulse_tau: f64,
    /// Internal variables live in `[-d_prime/2, d_prime/2]`.
    pub d_prime: f64,
    /// Synaptic weight per unit internal variable.
    pub scale_b: f64,
    pub synapse_threshold: f64,
    pub node_threshold: f64,
    pub window_width: f64,
    pub bias_init: BiasInit,
}

impl Default for MlpDeviceConfig {
    fn default() -> Self {
        Self {
            params: DeviceParams::default(),
            pulse_tau: 1.0,
            d_prime: 4.0,
            scale_b: 1.0,
            synapse_threshold: 10.0,
            node_threshold: 20.0,
            window_width: 3.0,
            bias_init: BiasInit::Zero,
        }
    }
}

impl MlpDeviceConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.pulse_tau > 0.0 && self.pulse_tau.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pulse_tau must be > 0, got {}",
                self.pulse_tau
            )));
        }
        if !(self.d_prime > 0.0 && self.d_prime.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "d_prime must be > 0, got {}",
                self.d_prime
            )));
        }
        if !(self.scale_b > 0.0 && self.scale_b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale_b must be > 0, got {}",
                self.scale_b
            )));
        }
        self.synapse_window()?;
        self.node_window()?;
        Ok(())
    }

    fn synapse_window(&self) -> Result<WindowSpec> {
        WindowSpec::new(vec![self.synapse_threshold], self.window_width)
    }

    fn node_window(&self) -> Result<WindowSpec> {
        WindowSpec::new(vec![self.node_threshold], self.window_width)
    }

    fn half_range(&self) -> f64 {
        self.d_prime / 2.0
    }
}

/// Linear-regime memristor holding one connection weight, `w = B gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynapseMemristor {
    state: MemristorState,
    scale: f64,
}

impl SynapseMemristor {
    pub fn new(weight: f64, config: &MlpDeviceConfig) -> Result<Self> {
        let h = config.half_range();
        let state = MemristorState::new(vec![weight / config.scale_b], config.synapse_window()?, vec![(-h, h)])?;
        Ok(Self {
            state,
            scale: config.scale_b,
        })
    }

    pub fn weight(&self) -> f64 {
        self.scale * self.state.gamma()[0]
    }

    pub fn state(&self) -> &MemristorState {
        &self.state
    }

    pub fn output(&self, current: f64) -> f64 {
        synapse_output(self.weight(), current)
    }

    fn write(&mut self, delta_w: f64) -> Result<()> {
        self.state.select_and_update(0, delta_w / self.scale)
    }
}

/// `V = w I` with the internal variable frozen during the forward pass.
pub fn synapse_output(weight: f64, current: f64) -> f64 {
    weight * current
}

/// Nonlinear-regime memristor; its internal variable stores the node's bias.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMemristor {
    params: DeviceParams,
    state: MemristorState,
    pulse_tau: f64,
}

impl NodeMemristor {
    pub fn new(bias: f64, config: &MlpDeviceConfig) -> Result<Self> {
        let h = config.half_range();
        let state = MemristorState::new(vec![bias], config.node_window()?, vec![(-h, h)])?;
        Ok(Self {
            params: config.params,
            state,
            pulse_tau: config.pulse_tau,
        })
    }

    pub fn bias_weight(&self) -> f64 {
        self.state.gamma()[0]
    }

    pub fn state(&self) -> &MemristorState {
        &self.state
    }

    /// Linear slope `m(g)` of the node response.
    pub fn slope(&self) -> f64 {
        let doped = self.bias_weight() / self.params.d;
        self.params.r_off * (1.0 - doped) + self.params.r_on * doped
    }

    /// Output voltage and its derivative with respect to the net input.
    pub fn activation(&self, s: f64) -> (f64, f64) {
        let curvature = self.params.curvature() * self.pulse_tau;
        let m = self.slope();
        (m * s - curvature * s * s, m - 2.0 * curvature * s)
    }

    /// Derivative of the output with respect to the stored bias variable.
    pub fn bias_sensitivity(&self, s: f64) -> f64 {
        (self.params.r_on - self.params.r_off) / self.params.d * s
    }

    fn write(&mut self, delta: f64) -> Result<()> {
        self.state.select_and_update(0, delta)
    }
}

pub fn node_activation(node: &NodeMemristor, s: f64) -> (f64, f64) {
    node.activation(s)
}

/// `(T - V) phi'`
pub fn output_gradient(target: f64, output: f64, phi_prime: f64) -> f64 {
    (target - output) * phi_prime
}

/// `sum_l delta_l w_kl`, the error reaching a hidden node's output.
pub fn downstream_error(downstream: &[(f64, f64)]) -> f64 {
    downstream.iter().map(|(delta, w)| delta * w).sum()
}

/// `phi' sum_l delta_l w_kl`
pub fn hidden_gradient(phi_prime: f64, downstream: &[(f64, f64)]) -> f64 {
    phi_prime * downstream_error(downstream)
}

/// Per-layer values recorded by a forward pass. Index 0 of `outputs` is the
/// input vector; the other vectors are indexed by node layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub net_inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
}

/// Initial weights drawn for a topology.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialWeights {
    /// `weights[l][i][j]` connects node `i` of layer `l` to node `j` of layer `l + 1`.
    pub weights: Vec<Vec<Vec<f64>>>,
    /// `biases[l][k]` belongs to node `k` of layer `l + 1`.
    pub biases: Vec<Vec<f64>>,
}

/// Glorot-uniform draw for every synapse layer. Bias variables are zero or
/// drawn with the limit of the synapse layer feeding the node.
pub fn glorot_init<R: Rng + ?Sized>(topology: &Topology, bias_init: BiasInit, rng: &mut R) -> InitialWeights {
    let sizes = topology.layer_sizes();
    let mut weights = Vec::with_capacity(topology.depth());
    let mut biases = Vec::with_capacity(topology.depth());
    for l in 0..topology.depth() {
        let limit = topology.glorot_limit(l);
        weights.push(
            (0..sizes[l])
                .map(|_| (0..sizes[l + 1]).map(|_| rng.gen_range(-limit..=limit)).collect())
                .collect(),
        );
        biases.push(match bias_init {
            BiasInit::Zero => vec![0.0; sizes[l + 1]],
            BiasInit::Glorot => (0..sizes[l + 1]).map(|_| rng.gen_range(-limit..=limit)).collect(),
        });
    }
    InitialWeights { weights, biases }
}

/// What training does with a step whose increments do not fit their windows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RejectedUpdates {
    /// Stop with [`Error::WindowViolation`].
    #[default]
    Abort,
    /// Leave the network unchanged for that sample and carry on.
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub history: Vec<f64>,
    /// Samples whose update set was rejected under [`RejectedUpdates::Skip`].
    pub rejected_steps: usize,
}

/// Weight and bias-variable increments for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Updates {
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

impl Updates {
    fn largest(&self) -> f64 {
        self.weights
            .iter()
            .flatten()
            .flatten()
            .chain(self.biases.iter().flatten())
            .fold(0.0f64, |acc, d| acc.max(d.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    topology: Topology,
    synapses: Vec<Vec<Vec<SynapseMemristor>>>,
    nodes: Vec<Vec<NodeMemristor>>,
    eta: f64,
    window_width: f64,
}

impl MlpNetwork {
    pub fn from_weights(topology: Topology, init: &InitialWeights, eta: f64, config: &MlpDeviceConfig) -> Result<Self> {
        config.validate()?;
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("learning rate must be > 0, got {eta}")));
        }
        let sizes = topology.layer_sizes();
        if init.weights.len() != topology.depth() || init.biases.len() != topology.depth() {
            return Err(Error::DimensionMismatch {
                expected: topology.depth(),
                actual: init.weights.len().min(init.biases.len()),
            });
        }
        let mut synapses = Vec::with_capacity(topology.depth());
        let mut nodes = Vec::with_capacity(topology.depth());
        for l in 0..topology.depth() {
            let layer = &init.weights[l];
            if layer.len() != sizes[l] {
                return Err(Error::DimensionMismatch {
                    expected: sizes[l],
                    actual: layer.len(),
                });
            }
            let mut rows = Vec::with_capacity(sizes[l]);
            for row in layer {
                if row.len() != sizes[l + 1] {
                    return Err(Error::DimensionMismatch {
                        expected: sizes[l + 1],
                        actual: row.len(),
                    });
                }
                rows.push(
                    row.iter()
                        .map(|&w| SynapseMemristor::new(w, config))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            synapses.push(rows);
            if init.biases[l].len() != sizes[l + 1] {
                return Err(Error::DimensionMismatch {
                    expected: sizes[l + 1],
                    actual: init.biases[l].len(),
                });
            }
            nodes.push(
                init.biases[l]
                    .iter()
                    .map(|&b| NodeMemristor::new(b, config))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self {
            topology,
            synapses,
            nodes,
            eta,
            window_width: config.window_width,
        })
    }

    pub fn glorot<R: Rng + ?Sized>(
        topology: Topology,
        eta: f64,
        config: &MlpDeviceConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let init = glorot_init(&topology, config.bias_init, rng);
        Self::from_weights(topology, &init, eta, config)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn learning_rate(&self) -> f64 {
        self.eta
    }

    pub fn synapse(&self, layer: usize, from: usize, to: usize) -> &SynapseMemristor {
        &self.synapses[layer][from][to]
    }

    pub fn node(&self, layer: usize, k: usize) -> &NodeMemristor {
        &self.nodes[layer][k]
    }

    /// Current weights and bias variables in [`InitialWeights`] layout.
    pub fn snapshot(&self) -> InitialWeights {
        InitialWeights {
            weights: self
                .synapses
                .iter()
                .map(|layer| {
                    layer
                        .iter()
                        .map(|row| row.iter().map(|s| s.weight()).collect())
                        .collect()
                })
                .collect(),
            biases: self
                .nodes
                .iter()
                .map(|layer| layer.iter().map(|n| n.bias_weight()).collect())
                .collect(),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardTrace)> {
        if x.len() != self.topology.inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.topology.inputs(),
                actual: x.len(),
            });
        }
        let depth = self.topology.depth();
        let mut trace = ForwardTrace {
            net_inputs: Vec::with_capacity(depth),
            outputs: Vec::with_capacity(depth + 1),
            derivatives: Vec::with_capacity(depth),
        };
        trace.outputs.push(x.to_vec());
        for l in 0..depth {
            let upstream = &trace.outputs[l];
            let width = self.nodes[l].len();
            let mut net = vec![0.0; width];
            for (i, &v) in upstream.iter().enumerate() {
                for (j, syn) in self.synapses[l][i].iter().enumerate() {
                    net[j] += syn.output(v);
                }
            }
            let (out, deriv): (Vec<f64>, Vec<f64>) = self.nodes[l]
                .iter()
                .zip(&net)
                .map(|(node, &s)| node.activation(s))
                .unzip();
            trace.net_inputs.push(net);
            trace.outputs.push(out);
            trace.derivatives.push(deriv);
        }
        Ok((trace.outputs[depth].clone(), trace))
    }

    /// Backpropagated increments for one example, with its error.
    ///
    /// Connection updates are `eta delta_j V_i`. The bias variable of node `k`
    /// moves by `eta e_k dV_k/dg_k`, where `e_k` is the error reaching the node's
    /// output, so it descends the cost through the node's slope.
    pub fn compute_updates(&self, x: &[f64], targets: &[f64]) -> Result<(Updates, f64)> {
        if targets.len() != self.topology.outputs() {
            return Err(Error::DimensionMismatch {
                expected: self.topology.outputs(),
                actual: targets.len(),
            });
        }
        let (outputs, trace) = self.forward(x)?;
        let depth = self.topology.depth();
        let error: f64 = targets.iter().zip(&outputs).map(|(&t, &o)| sample_cost(t, o)).sum();

        let mut node_errors: Vec<Vec<f64>> = vec![Vec::new(); depth];
        let mut deltas: Vec<Vec<f64>> = vec![Vec::new(); depth];
        node_errors[depth - 1] = targets.iter().zip(&outputs).map(|(t, o)| t - o).collect();
        deltas[depth - 1] = targets
            .iter()
            .zip(&outputs)
            .zip(&trace.derivatives[depth - 1])
            .map(|((&t, &o), &d)| output_gradient(t, o, d))
            .collect();
        for l in (0..depth - 1).rev() {
            let mut errs = Vec::with_capacity(self.nodes[l].len());
            let mut ds = Vec::with_capacity(self.nodes[l].len());
            for k in 0..self.nodes[l].len() {
                let downstream: Vec<(f64, f64)> = deltas[l + 1]
                    .iter()
                    .zip(&self.synapses[l + 1][k])
                    .map(|(&d, syn)| (d, syn.weight()))
                    .collect();
                errs.push(downstream_error(&downstream));
                ds.push(hidden_gradient(trace.derivatives[l][k], &downstream));
            }
            node_errors[l] = errs;
            deltas[l] = ds;
        }

        let eta = self.eta;
        let weights = (0..depth)
            .map(|l| {
                trace.outputs[l]
                    .iter()
                    .map(|&v| deltas[l].iter().map(|&d| eta * d * v).collect())
                    .collect()
            })
            .collect();
        let biases = (0..depth)
            .map(|l| {
                self.nodes[l]
                    .iter()
                    .enumerate()
                    .map(|(k, node)| eta * node_errors[l][k] * node.bias_sensitivity(trace.net_inputs[l][k]))
                    .collect()
            })
            .collect();
        Ok((Updates { weights, biases }, error))
    }

    /// Writes a full set of increments through the device windows. Nothing is
    /// written if any increment would miss its window.
    pub fn apply_updates(&mut self, updates: &Updates) -> Result<()> {
        let largest = updates.largest();
        if !(largest < self.window_width) {
            let (index, delta) = first_violation(updates, self.window_width);
            return Err(Error::WindowViolation {
                index,
                delta,
                width: self.window_width,
            });
        }
        for (layer, deltas) in self.synapses.iter_mut().zip(&updates.weights) {
            for (row, drow) in layer.iter_mut().zip(deltas) {
                for (syn, &d) in row.iter_mut().zip(drow) {
                    syn.write(d)?;
                }
            }
        }
        for (layer, deltas) in self.nodes.iter_mut().zip(&updates.biases) {
            for (node, &d) in layer.iter_mut().zip(deltas) {
                node.write(d)?;
            }
        }
        Ok(())
    }

    pub fn backprop_step_targets(&mut self, x: &[f64], targets: &[f64]) -> Result<f64> {
        let (updates, error) = self.compute_updates(x, targets)?;
        self.apply_updates(&updates)?;
        Ok(error)
    }

    /// One online backpropagation step. Returns the pre-update error.
    pub fn backprop_step(&mut self, sample: &Sample) -> Result<f64> {
        self.backprop_step_targets(&sample.x, std::slice::from_ref(&sample.t))
    }

    pub fn train<R: Rng + ?Sized>(&mut self, dataset: &[Sample], epochs: usize, rng: &mut R) -> Result<Vec<f64>> {
        Ok(self.train_with(dataset, epochs, rng, RejectedUpdates::Abort)?.history)
    }

    /// Online training with a fresh shuffle per epoch. Under
    /// [`RejectedUpdates::Skip`] a sample whose increments miss a window leaves
    /// the network unchanged and training continues; other errors still propagate.
    pub fn train_with<R: Rng + ?Sized>(
        &mut self,
        dataset: &[Sample],
        epochs: usize,
        rng: &mut R,
        policy: RejectedUpdates,
    ) -> Result<TrainOutcome> {
        if epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be >= 1".into()));
        }
        if dataset.is_empty() {
            return Err(Error::InvalidParameter("dataset must not be empty".into()));
        }
        let mut outcome = TrainOutcome {
            history: Vec::with_capacity(epochs),
            rejected_steps: 0,
        };
        for _ in 0..epochs {
            let order = shuffle_epoch(dataset, rng);
            let mut e_total = 0.0;
            for idx in order {
                let sample = &dataset[idx];
                let (updates, error) = self.compute_updates(&sample.x, std::slice::from_ref(&sample.t))?;
                e_total += error;
                match self.apply_updates(&updates) {
                    Err(Error::WindowViolation { .. }) if policy == RejectedUpdates::Skip => {
                        outcome.rejected_steps += 1;
                    }
                    other => other?,
                }
            }
            outcome.history.push(e_total);
        }
        Ok(outcome)
    }

    /// Scalar output for single-output networks.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.forward(x)?.0[0])
    }
}

fn first_violation(updates: &Updates, width: f64) -> (usize, f64) {
    updates
        .weights
        .iter()
        .flatten()
        .flatten()
        .chain(updates.biases.iter().flatten())
        .copied()
        .enumerate()
        .find(|(_, d)| !(d.abs() < width))
        .unwrap_or((0, f64::NAN))
}

pub fn mlp_forward(net: &MlpNetwork, x: &[f64]) -> Result<(Vec<f64>, ForwardTrace)> {
    net.forward(x)
}

pub fn backprop_step(net: &mut MlpNetwork, sample: &Sample) -> Result<f64> {
    net.backprop_step(sample)
}

pub fn train_mlp<R: Rng + ?Sized>(
    net: &mut MlpNetwork,
    dataset: &[Sample],
    epochs: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    net.train(dataset, epochs, rng)
}
