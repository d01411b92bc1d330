//! Network parameters, activations, and deterministic initialization.
//!
//! The model is a fully connected multilayer perceptron with scalar input
//! and scalar output. Hidden layers share one activation (tanh by default);
//! the output layer is always the identity. Parameters are stored as plain
//! nested `Vec<f64>` in row-major order: `weights[i][j]` connects input
//! neuron `j` to output neuron `i` of the layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

/// Supported activation functions for hidden layers.
///
/// The output layer never applies an activation; it is the identity by
/// construction. `Identity` is still useful as a *hidden* activation in
/// tests: a network of purely affine layers must itself be affine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivationKind {
    /// Hyperbolic tangent, the default hidden nonlinearity.
    Tanh,
    /// Identity map (no nonlinearity).
    Identity,
}

impl ActivationKind {
    /// Stable lowercase name used in checkpoint files.
    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Tanh => "tanh",
            ActivationKind::Identity => "identity",
        }
    }

    /// Inverse of [`ActivationKind::name`].
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "tanh" => Ok(ActivationKind::Tanh),
            "identity" => Ok(ActivationKind::Identity),
            other => Err(Error::InvalidArgument(format!(
                "unknown activation {other:?} (expected \"tanh\" or \"identity\")"
            ))),
        }
    }

    /// First and second derivatives evaluated from the activation *value*
    /// `phi` rather than the pre-activation.
    ///
    /// For tanh both derivatives are algebraic in the value itself:
    /// φ′ = 1 − φ² and φ″ = −2·φ·(1 − φ²) = −2·φ·φ′. Computing them from the
    /// stored activation keeps every consumer (forward pass, both gradient
    /// engines) on bit-identical numbers without re-evaluating tanh.
    pub fn derivatives_from_phi(self, phi: f64) -> (f64, f64) {
        match self {
            ActivationKind::Tanh => {
                let phi1 = 1.0 - phi * phi;
                (phi1, -2.0 * phi * phi1)
            }
            ActivationKind::Identity => (1.0, 0.0),
        }
    }
}

/// Value of an activation together with its first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationValue {
    /// φ(z)
    pub phi: f64,
    /// φ′(z)
    pub phi1: f64,
    /// φ″(z)
    pub phi2: f64,
}

/// Evaluates an activation and its first two derivatives at `z`.
///
/// One call serves every consumer that needs the triple; the derivatives are
/// derived from the shared φ value (see
/// [`ActivationKind::derivatives_from_phi`]) so no transcendental function is
/// evaluated more than once.
pub fn activation_eval(kind: ActivationKind, z: f64) -> ActivationValue {
    let phi = match kind {
        ActivationKind::Tanh => z.tanh(),
        ActivationKind::Identity => z,
    };
    let (phi1, phi2) = kind.derivatives_from_phi(phi);
    ActivationValue { phi, phi1, phi2 }
}

// ---------------------------------------------------------------------------
// Parameter containers
// ---------------------------------------------------------------------------

/// Weights and biases of one fully connected layer.
///
/// `weights` has one row per output neuron; `biases` has one entry per
/// output neuron. The layer maps an input vector `x` of length
/// [`LayerParams::n_in`] to `W·x + b` of length [`LayerParams::n_out`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    /// Row-major weight matrix, `weights[i][j]` = weight from input `j` to
    /// output neuron `i`.
    pub weights: Vec<Vec<f64>>,
    /// One bias per output neuron.
    pub biases: Vec<f64>,
}

impl LayerParams {
    /// All-zero layer of the given dimensions.
    pub fn zeros(n_out: usize, n_in: usize) -> Self {
        LayerParams {
            weights: vec![vec![0.0; n_in]; n_out],
            biases: vec![0.0; n_out],
        }
    }

    /// Number of output neurons.
    pub fn n_out(&self) -> usize {
        self.biases.len()
    }

    /// Number of input neurons.
    pub fn n_in(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    /// Checks internal consistency, reporting against layer index `layer`.
    fn validate(&self, layer: usize) -> Result<()> {
        if self.weights.is_empty() || self.biases.is_empty() {
            return Err(Error::Shape {
                layer,
                detail: "layer has no neurons".into(),
            });
        }
        if self.weights.len() != self.biases.len() {
            return Err(Error::Shape {
                layer,
                detail: format!(
                    "{} weight rows but {} biases",
                    self.weights.len(),
                    self.biases.len()
                ),
            });
        }
        let n_in = self.weights[0].len();
        if n_in == 0 {
            return Err(Error::Shape {
                layer,
                detail: "weight rows are empty".into(),
            });
        }
        for (i, row) in self.weights.iter().enumerate() {
            if row.len() != n_in {
                return Err(Error::Shape {
                    layer,
                    detail: format!(
                        "weight row {i} has length {}, expected {n_in}",
                        row.len()
                    ),
                });
            }
        }
        let finite = self
            .weights
            .iter()
            .flatten()
            .chain(self.biases.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite {
                context: format!("parameters of layer {layer}"),
            });
        }
        Ok(())
    }
}

/// Identifies a single scalar parameter within one layer.
///
/// Indices are zero-based. The canonical flat ordering of all parameters is
/// layer-major: for each layer, every weight in row-major order, then every
/// bias. Initialization, finite differencing, and test comparisons all use
/// this one ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    /// `weights[row][col]` of the layer.
    Weight { row: usize, col: usize },
    /// `biases[row]` of the layer.
    Bias { row: usize },
}

/// Full parameter set of the multilayer perceptron.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    /// Hidden-layer activation. The output layer is always the identity.
    pub activation: ActivationKind,
    /// Layers from input to output.
    pub layers: Vec<LayerParams>,
}

impl MlpParams {
    /// Builds a validated parameter set.
    ///
    /// Enforces: at least one layer, scalar input (first `n_in` = 1), scalar
    /// output (last `n_out` = 1), consecutive layers dimension-chained, and
    /// every value finite.
    pub fn new(activation: ActivationKind, layers: Vec<LayerParams>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument(
                "network needs at least one layer".into(),
            ));
        }
        for (l, layer) in layers.iter().enumerate() {
            layer.validate(l)?;
        }
        if layers[0].n_in() != 1 {
            return Err(Error::Shape {
                layer: 0,
                detail: format!("input width {} (the model is scalar-in)", layers[0].n_in()),
            });
        }
        if layers[layers.len() - 1].n_out() != 1 {
            return Err(Error::Shape {
                layer: layers.len() - 1,
                detail: format!(
                    "output width {} (the model is scalar-out)",
                    layers[layers.len() - 1].n_out()
                ),
            });
        }
        for l in 1..layers.len() {
            if layers[l].n_in() != layers[l - 1].n_out() {
                return Err(Error::Shape {
                    layer: l,
                    detail: format!(
                        "expects {} inputs but layer {} produces {}",
                        layers[l].n_in(),
                        l - 1,
                        layers[l - 1].n_out()
                    ),
                });
            }
        }
        Ok(MlpParams { activation, layers })
    }

    /// Layer widths from input to output, e.g. `[1, 3, 3, 1]`.
    pub fn arch(&self) -> Vec<usize> {
        let mut widths = Vec::with_capacity(self.layers.len() + 1);
        widths.push(self.layers[0].n_in());
        widths.extend(self.layers.iter().map(LayerParams::n_out));
        widths
    }

    /// Number of layers (weight matrices).
    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Total number of trainable scalars.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.n_out() * l.n_in() + l.n_out())
            .sum()
    }

    /// Every parameter's address in the canonical flat order (layer-major,
    /// weights row-major, then biases).
    pub fn param_ids(&self) -> Vec<(usize, ParamKind)> {
        let mut ids = Vec::with_capacity(self.param_count());
        for (l, layer) in self.layers.iter().enumerate() {
            for row in 0..layer.n_out() {
                for col in 0..layer.n_in() {
                    ids.push((l, ParamKind::Weight { row, col }));
                }
            }
            for row in 0..layer.n_out() {
                ids.push((l, ParamKind::Bias { row }));
            }
        }
        ids
    }

    /// Reads one scalar parameter.
    pub fn get(&self, layer: usize, kind: ParamKind) -> f64 {
        match kind {
            ParamKind::Weight { row, col } => self.layers[layer].weights[row][col],
            ParamKind::Bias { row } => self.layers[layer].biases[row],
        }
    }

    /// Writes one scalar parameter.
    pub fn set(&mut self, layer: usize, kind: ParamKind, value: f64) {
        match kind {
            ParamKind::Weight { row, col } => self.layers[layer].weights[row][col] = value,
            ParamKind::Bias { row } => self.layers[layer].biases[row] = value,
        }
    }
}

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

/// Gradient of the loss with respect to one layer's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GradLayer {
    /// ∂L/∂W, same shape as the layer's `weights`.
    pub d_weights: Vec<Vec<f64>>,
    /// ∂L/∂b, same shape as the layer's `biases`.
    pub d_biases: Vec<f64>,
}

/// Gradient of the loss with respect to every parameter, shape-congruent
/// with [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// One entry per layer, in network order.
    pub layers: Vec<GradLayer>,
}

impl Gradients {
    /// All-zero gradient matching the shape of `params`.
    pub fn zeros(params: &MlpParams) -> Self {
        Gradients {
            layers: params
                .layers
                .iter()
                .map(|l| GradLayer {
                    d_weights: vec![vec![0.0; l.n_in()]; l.n_out()],
                    d_biases: vec![0.0; l.n_out()],
                })
                .collect(),
        }
    }

    /// Reads one gradient entry.
    pub fn get(&self, layer: usize, kind: ParamKind) -> f64 {
        match kind {
            ParamKind::Weight { row, col } => self.layers[layer].d_weights[row][col],
            ParamKind::Bias { row } => self.layers[layer].d_biases[row],
        }
    }

    /// Writes one gradient entry.
    pub fn set(&mut self, layer: usize, kind: ParamKind, value: f64) {
        match kind {
            ParamKind::Weight { row, col } => self.layers[layer].d_weights[row][col] = value,
            ParamKind::Bias { row } => self.layers[layer].d_biases[row] = value,
        }
    }

    /// Largest entry-wise absolute difference to another gradient of the
    /// same shape. Panics on shape mismatch (test/diagnostic helper).
    pub fn max_abs_diff(&self, other: &Gradients) -> f64 {
        assert_eq!(
            self.layers.len(),
            other.layers.len(),
            "gradient layer counts differ"
        );
        let mut worst = 0.0f64;
        for (a, b) in self.layers.iter().zip(&other.layers) {
            for (ra, rb) in a.d_weights.iter().zip(&b.d_weights) {
                for (x, y) in ra.iter().zip(rb) {
                    worst = worst.max((x - y).abs());
                }
            }
            for (x, y) in a.d_biases.iter().zip(&b.d_biases) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }

    /// True when every entry is finite.
    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.d_weights
                .iter()
                .flatten()
                .chain(l.d_biases.iter())
                .all(|v| v.is_finite())
        })
    }
}

// ---------------------------------------------------------------------------
// Deterministic PRNG
// ---------------------------------------------------------------------------

/// SplitMix64 pseudo-random generator.
///
/// The full recurrence, so the stream can be reproduced in any language:
///
/// ```text
/// state  = state + 0x9E3779B97F4A7C15           (mod 2^64)
/// z      = state
/// z      = (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2^64)
/// z      = (z XOR (z >> 27)) * 0x94D049BB133111EB  (mod 2^64)
/// output = z XOR (z >> 31)
/// ```
///
/// [`SplitMix64::next_f64`] maps an output word to [0, 1) by taking its top
/// 53 bits: `u = (output >> 11) / 2^53`. Both steps are exact in double
/// precision, so the stream of floats is identical on every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Creates a generator whose first outputs are determined by `seed`.
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next 64-bit word of the stream.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        // 2^53 = 9007199254740992; the division is an exact power-of-two
        // scaling, so no rounding occurs.
        (self.next_u64() >> 11) as f64 / 9_007_199_254_740_992.0
    }

    /// Uniform draw from [-bound, bound), computed as `bound * (2u - 1)`.
    pub fn next_uniform(&mut self, bound: f64) -> f64 {
        bound * (2.0 * self.next_f64() - 1.0)
    }
}

// ---------------------------------------------------------------------------
// Initializers
// ---------------------------------------------------------------------------

/// The fixed 1-3-3-1 tanh network used throughout the built-in worked
/// example (22 parameters).
///
/// Every intermediate quantity of the demonstration — forward tables,
/// losses, gradients, update step — is derived from exactly these values;
/// see the `verify` module for the full cross-check.
pub fn reference_params() -> MlpParams {
    MlpParams::new(
        ActivationKind::Tanh,
        vec![
            LayerParams {
                weights: vec![vec![0.2], vec![-0.5], vec![0.8]],
                biases: vec![-0.1, 0.3, -0.2],
            },
            LayerParams {
                weights: vec![
                    vec![0.1, -0.3, 0.5],
                    vec![0.6, 0.2, -0.4],
                    vec![-0.2, 0.7, 0.1],
                ],
                biases: vec![0.2, -0.1, 0.4],
            },
            LayerParams {
                weights: vec![vec![0.9, -0.6, 0.3]],
                biases: vec![-0.3],
            },
        ],
    )
    .expect("reference parameters are well-formed by construction")
}

/// Seeded random initialization.
///
/// Every weight and bias of a layer with fan-in `n` is drawn independently
/// and uniformly from [−1/√n, +1/√n) — the conventional default for linear
/// layers with uniform init. Sampling order is fixed and documented:
/// layer-major; within a layer all weights in row-major order, then all
/// biases. The generator is [`SplitMix64`] seeded with `seed`, so identical
/// `(arch, seed)` yields bit-identical parameters on every platform.
///
/// `arch` lists layer widths from input to output, e.g. `[1, 3, 3, 1]`;
/// the first and last width must be 1.
pub fn init_random(arch: &[usize], seed: u64) -> Result<MlpParams> {
    if arch.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "architecture needs at least two widths, got {arch:?}"
        )));
    }
    if arch.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "architecture contains a zero width: {arch:?}"
        )));
    }
    if arch[0] != 1 || arch[arch.len() - 1] != 1 {
        return Err(Error::InvalidArgument(format!(
            "architecture must be scalar-in/scalar-out (first and last width 1), got {arch:?}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut layers = Vec::with_capacity(arch.len() - 1);
    for pair in arch.windows(2) {
        let (n_in, n_out) = (pair[0], pair[1]);
        let bound = 1.0 / (n_in as f64).sqrt();
        let weights = (0..n_out)
            .map(|_| (0..n_in).map(|_| rng.next_uniform(bound)).collect())
            .collect();
        let biases = (0..n_out).map(|_| rng.next_uniform(bound)).collect();
        layers.push(LayerParams { weights, biases });
    }
    MlpParams::new(ActivationKind::Tanh, layers)
}
