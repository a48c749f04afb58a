//! Random hidden layer and the hidden / enhanced feature spaces.
//!
//! The hidden map is `Z = act(X W + bias)` with `W` (`m x h`) and `bias`
//! (`h`) drawn once, i.i.d. uniform on `[-1, 1]`, from a seed. The enhanced
//! space is the concatenation `[Z | X]`, hidden block first.

use alloc::string::String;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::granular_ball::hex_prefix;

const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
const SELU_ALPHA: f64 = 1.673_263_242_354_377_2;
const LEAKY_SLOPE: f64 = 0.01;

/// Activation catalog, indexed 1 through 9 in the order used for tuning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Activation {
    Selu = 1,
    Relu = 2,
    Sigmoid = 3,
    Sine = 4,
    Hardlim = 5,
    Tribas = 6,
    Radbas = 7,
    Sign = 8,
    LeakyRelu = 9,
}

impl Activation {
    pub const ALL: [Activation; 9] = [
        Activation::Selu,
        Activation::Relu,
        Activation::Sigmoid,
        Activation::Sine,
        Activation::Hardlim,
        Activation::Tribas,
        Activation::Radbas,
        Activation::Sign,
        Activation::LeakyRelu,
    ];

    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            1..=9 => Ok(Self::ALL[usize::from(index - 1)]),
            _ => Err(invalid("activation", alloc::format!("index must be 1..=9, got {index}"))),
        }
    }

    pub const fn index(self) -> u8 {
        self as u8
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Selu => {
                if x > 0.0 {
                    SELU_LAMBDA * x
                } else {
                    SELU_LAMBDA * SELU_ALPHA * libm::expm1(x)
                }
            }
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + libm::exp(-x)),
            Activation::Sine => libm::sin(x),
            Activation::Hardlim => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tribas => (1.0 - libm::fabs(x)).max(0.0),
            Activation::Radbas => libm::exp(-x * x),
            Activation::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu => {
                if x > 0.0 {
                    x
                } else {
                    LEAKY_SLOPE * x
                }
            }
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Activation::Selu => "selu",
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Sine => "sine",
            Activation::Hardlim => "hardlim",
            Activation::Tribas => "tribas",
            Activation::Radbas => "radbas",
            Activation::Sign => "sign",
            Activation::LeakyRelu => "leaky-relu",
        }
    }
}

impl From<Activation> for u8 {
    fn from(a: Activation) -> u8 {
        a.index()
    }
}

impl TryFrom<u8> for Activation {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Activation::from_index(v)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scalar activation by catalog index.
pub fn activate(kind: u8, x: f64) -> Result<f64> {
    Activation::from_index(kind).map(|a| a.apply(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSpace {
    Original,
    Hidden,
    Enhanced,
}

impl FeatureSpace {
    pub const fn needs_layer(self) -> bool {
        !matches!(self, FeatureSpace::Original)
    }

    /// Column count of the mapped features.
    pub const fn width(self, m: usize, h: usize) -> usize {
        match self {
            FeatureSpace::Original => m,
            FeatureSpace::Hidden => h,
            FeatureSpace::Enhanced => m + h,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub values: DMatrix<f64>,
    pub space: FeatureSpace,
}

/// Frozen input-to-hidden map. Weights are a pure function of
/// `(m, h, seed)`, so persisting the metadata plus [`RandomLayer::checksum`]
/// is enough to restore it.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomLayer {
    weights: DMatrix<f64>,
    bias: DVector<f64>,
    activation: Activation,
    seed: u64,
}

impl RandomLayer {
    /// Draws `W` row by row, then the bias, from one ChaCha8 stream.
    pub fn new(m: usize, h: usize, activation: Activation, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m", "input width must be >= 1"));
        }
        if h == 0 {
            return Err(invalid("hidden", "hidden node count must be >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = Uniform::new_inclusive(-1.0, 1.0).expect("finite bounds");
        let mut weights = DMatrix::zeros(m, h);
        for i in 0..m {
            for j in 0..h {
                weights[(i, j)] = unit.sample(&mut rng);
            }
        }
        let bias = DVector::from_fn(h, |_, _| unit.sample(&mut rng));
        Ok(RandomLayer { weights, bias, activation, seed })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.weights.ncols()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &DVector<f64> {
        &self.bias
    }

    /// Hex SHA-256 over the bit patterns of `W` (row-major) and the bias.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for i in 0..self.weights.nrows() {
            for j in 0..self.weights.ncols() {
                h.update(self.weights[(i, j)].to_bits().to_le_bytes());
            }
        }
        for b in self.bias.iter() {
            h.update(b.to_bits().to_le_bytes());
        }
        hex_prefix(&h.finalize(), 32)
    }

    fn check_width(&self, x: &DMatrix<f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: x.ncols(),
                context: "random layer input",
            });
        }
        Ok(())
    }

    /// `act(X W + bias)`, one row per input row.
    pub fn hidden_features(&self, x: &DMatrix<f64>) -> Result<FeatureMatrix> {
        self.check_width(x)?;
        let mut z = x * &self.weights;
        for mut row in z.row_iter_mut() {
            for (v, b) in row.iter_mut().zip(self.bias.iter()) {
                *v = self.activation.apply(*v + b);
            }
        }
        Ok(FeatureMatrix { values: z, space: FeatureSpace::Hidden })
    }

    /// `[Z | X]`; the trailing `m` columns are `x` unchanged.
    pub fn enhanced_features(&self, x: &DMatrix<f64>) -> Result<FeatureMatrix> {
        let z = self.hidden_features(x)?.values;
        let h = z.ncols();
        let mut out = DMatrix::zeros(x.nrows(), h + x.ncols());
        out.columns_mut(0, h).copy_from(&z);
        out.columns_mut(h, x.ncols()).copy_from(x);
        Ok(FeatureMatrix { values: out, space: FeatureSpace::Enhanced })
    }

    pub fn map(&self, x: &DMatrix<f64>, space: FeatureSpace) -> Result<FeatureMatrix> {
        match space {
            FeatureSpace::Original => {
                self.check_width(x)?;
                Ok(FeatureMatrix { values: x.clone(), space })
            }
            FeatureSpace::Hidden => self.hidden_features(x),
            FeatureSpace::Enhanced => self.enhanced_features(x),
        }
    }
}

/// Maps `x` into `space`; `layer` is required for the hidden and enhanced spaces.
pub fn map_features(layer: Option<&RandomLayer>, x: &DMatrix<f64>, space: FeatureSpace) -> Result<FeatureMatrix> {
    match (space, layer) {
        (FeatureSpace::Original, _) => Ok(FeatureMatrix { values: x.clone(), space }),
        (_, Some(layer)) => layer.map(x, space),
        (_, None) => Err(invalid("layer", "hidden and enhanced feature spaces need a random layer")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn activation_examples() {
        let relu = Activation::Relu;
        assert_eq!(relu.apply(-1.0), 0.0);
        assert_eq!(relu.apply(2.0), 2.0);
        assert_eq!(Activation::Sigmoid.apply(0.0), 0.5);
        assert_eq!(Activation::Tribas.apply(0.25), 0.75);
        assert_eq!(Activation::Radbas.apply(0.0), 1.0);
        assert_eq!(Activation::Sign.apply(0.0), 0.0);
        assert_eq!(Activation::Sign.apply(-3.0), -1.0);
        assert_eq!(Activation::Hardlim.apply(0.0), 1.0);
        assert_eq!(Activation::LeakyRelu.apply(-2.0), -0.02);
        assert_eq!(Activation::Selu.apply(1.0), SELU_LAMBDA);
        assert!((Activation::Selu.apply(-1.0) - SELU_LAMBDA * SELU_ALPHA * (libm::exp(-1.0) - 1.0)).abs() < 1e-15);
        assert!(activate(10, 0.0).is_err());
        assert!(activate(0, 0.0).is_err());
    }

    #[test]
    fn activations_stay_finite() {
        for a in Activation::ALL {
            for x in [-1e6, -30.0, -1.0, 0.0, 1e-300, 1.0, 30.0, 1e6] {
                assert!(a.apply(x).is_finite(), "{a} at {x}");
            }
        }
    }

    #[test]
    fn layer_shape_and_determinism() {
        let l = RandomLayer::new(3, 5, Activation::Relu, 7).unwrap();
        assert_eq!(l.weights().shape(), (3, 5));
        assert_eq!(l.bias().len(), 5);
        assert_eq!(l, RandomLayer::new(3, 5, Activation::Relu, 7).unwrap());
        assert!(l.weights().iter().chain(l.bias().iter()).all(|v| (-1.0..=1.0).contains(v)));
        assert!(RandomLayer::new(0, 5, Activation::Relu, 7).is_err());
        assert!(RandomLayer::new(3, 0, Activation::Relu, 7).is_err());
    }

    #[test]
    fn hidden_and_enhanced_shapes() {
        let mut l = RandomLayer::new(3, 5, Activation::Sigmoid, 1).unwrap();
        l.bias.fill(0.0);
        let z = l.hidden_features(&DMatrix::zeros(4, 3)).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.5));

        let x = DMatrix::from_fn(2, 3, |i, j| (i * 3 + j) as f64);
        let e = l.enhanced_features(&x).unwrap();
        assert_eq!(e.values.shape(), (2, 8));
        assert_eq!(e.values.columns(5, 3), x);

        let wide = RandomLayer::new(3, 203, Activation::Relu, 2).unwrap();
        assert_eq!(wide.enhanced_features(&x).unwrap().values.shape(), (2, 206));
        assert!(l.hidden_features(&DMatrix::zeros(1, 4)).is_err());
    }
}
