use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One differentiable layer. Activations are flat `f64` vectors; image
/// tensors use channel-major (CHW) layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Layer {
    /// `y = W x + b` with `W` stored row-major as `outputs x inputs`.
    Dense {
        inputs: usize,
        outputs: usize,
    },
    Relu,
    /// Stride-1 convolution with zero "same" padding and an odd square kernel.
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        height: usize,
        width: usize,
        kernel: usize,
    },
    /// Non-overlapping 2x2 average pooling.
    AvgPool2 {
        channels: usize,
        height: usize,
        width: usize,
    },
}

impl Layer {
    pub fn param_count(&self) -> usize {
        match *self {
            Layer::Dense { inputs, outputs } => outputs * inputs + outputs,
            Layer::Conv2d {
                in_channels,
                out_channels,
                kernel,
                ..
            } => out_channels * in_channels * kernel * kernel + out_channels,
            Layer::Relu | Layer::AvgPool2 { .. } => 0,
        }
    }

    /// Input width, or `None` for shape-preserving layers.
    pub fn input_dim(&self) -> Option<usize> {
        match *self {
            Layer::Dense { inputs, .. } => Some(inputs),
            Layer::Conv2d {
                in_channels,
                height,
                width,
                ..
            } => Some(in_channels * height * width),
            Layer::AvgPool2 {
                channels,
                height,
                width,
            } => Some(channels * height * width),
            Layer::Relu => None,
        }
    }

    pub fn output_dim(&self, input: usize) -> usize {
        match *self {
            Layer::Dense { outputs, .. } => outputs,
            Layer::Conv2d {
                out_channels,
                height,
                width,
                ..
            } => out_channels * height * width,
            Layer::AvgPool2 {
                channels,
                height,
                width,
            } => channels * (height / 2) * (width / 2),
            Layer::Relu => input,
        }
    }

    /// Fan-in used for weight initialization.
    pub(crate) fn fan_in(&self) -> usize {
        match *self {
            Layer::Dense { inputs, .. } => inputs,
            Layer::Conv2d {
                in_channels,
                kernel,
                ..
            } => in_channels * kernel * kernel,
            Layer::Relu | Layer::AvgPool2 { .. } => 0,
        }
    }

    /// Number of weights preceding the biases in this layer's parameters.
    pub(crate) fn weight_count(&self) -> usize {
        match *self {
            Layer::Dense { outputs, .. } => self.param_count() - outputs,
            Layer::Conv2d { out_channels, .. } => self.param_count() - out_channels,
            Layer::Relu | Layer::AvgPool2 { .. } => 0,
        }
    }
}

/// A named group of layers. Blocks are the unit of freezing for CF-k and EU-k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub layers: Vec<Layer>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub num_classes: usize,
    pub blocks: Vec<Block>,
}

impl Architecture {
    /// Fully connected ReLU network: one block per hidden layer plus a `head`.
    pub fn mlp(input_dim: usize, hidden: &[usize], num_classes: usize) -> Result<Self> {
        let mut blocks = Vec::with_capacity(hidden.len() + 1);
        let mut width = input_dim;
        for (i, &h) in hidden.iter().enumerate() {
            blocks.push(Block {
                name: format!("hidden{i}"),
                layers: vec![
                    Layer::Dense {
                        inputs: width,
                        outputs: h,
                    },
                    Layer::Relu,
                ],
            });
            width = h;
        }
        blocks.push(Block {
            name: "head".into(),
            layers: vec![Layer::Dense {
                inputs: width,
                outputs: num_classes,
            }],
        });
        let arch = Self {
            input_dim,
            num_classes,
            blocks,
        };
        arch.validate()?;
        Ok(arch)
    }

    /// Small CNN: each entry of `conv_channels` adds a block of
    /// 3x3 convolution, ReLU and 2x2 average pooling; a dense `head` follows.
    pub fn cnn(
        channels: usize,
        height: usize,
        width: usize,
        conv_channels: &[usize],
        num_classes: usize,
    ) -> Result<Self> {
        let mut blocks = Vec::with_capacity(conv_channels.len() + 1);
        let (mut c, mut h, mut w) = (channels, height, width);
        for (i, &out) in conv_channels.iter().enumerate() {
            if h % 2 != 0 || w % 2 != 0 {
                return Err(Error::InvalidArchitecture(format!(
                    "conv block {i} input {h}x{w} cannot be pooled by 2"
                )));
            }
            blocks.push(Block {
                name: format!("conv{i}"),
                layers: vec![
                    Layer::Conv2d {
                        in_channels: c,
                        out_channels: out,
                        height: h,
                        width: w,
                        kernel: 3,
                    },
                    Layer::Relu,
                    Layer::AvgPool2 {
                        channels: out,
                        height: h,
                        width: w,
                    },
                ],
            });
            c = out;
            h /= 2;
            w /= 2;
        }
        blocks.push(Block {
            name: "head".into(),
            layers: vec![Layer::Dense {
                inputs: c * h * w,
                outputs: num_classes,
            }],
        });
        let arch = Self {
            input_dim: channels * height * width,
            num_classes,
            blocks,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArchitecture(msg));
        if self.num_classes < 2 {
            return bad(format!("{} output classes", self.num_classes));
        }
        if self.input_dim == 0 {
            return bad("zero input dimension".into());
        }
        if self.blocks.is_empty() {
            return bad("no blocks".into());
        }
        let mut width = self.input_dim;
        for block in &self.blocks {
            if block.layers.is_empty() {
                return bad(format!("block `{}` has no layers", block.name));
            }
            for layer in &block.layers {
                if let Some(expected) = layer.input_dim() {
                    if expected != width {
                        return bad(format!(
                            "block `{}`: layer expects {expected} inputs, previous layer gives {width}",
                            block.name
                        ));
                    }
                }
                match *layer {
                    Layer::Dense { inputs, outputs } if inputs == 0 || outputs == 0 => {
                        return bad(format!("block `{}`: empty dense layer", block.name));
                    }
                    Layer::Conv2d {
                        in_channels,
                        out_channels,
                        height,
                        width,
                        kernel,
                    } if kernel % 2 == 0
                        || kernel == 0
                        || in_channels * out_channels * height * width == 0 =>
                    {
                        return bad(format!("block `{}`: invalid convolution", block.name));
                    }
                    Layer::AvgPool2 { height, width, .. } if height % 2 != 0 || width % 2 != 0 => {
                        return bad(format!("block `{}`: odd pooling input", block.name));
                    }
                    _ => {}
                }
                width = layer.output_dim(width);
            }
        }
        if width != self.num_classes {
            return bad(format!(
                "network outputs {width} values for {} classes",
                self.num_classes
            ));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.layers().map(Layer::param_count).sum()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn layers(&self) -> impl Iterator<Item = &Layer> {
        self.blocks.iter().flat_map(|b| b.layers.iter())
    }

    /// Parameter range of every block, in order.
    pub fn block_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let n: usize = b.layers.iter().map(Layer::param_count).sum();
                let r = start..start + n;
                start += n;
                r
            })
            .collect()
    }

    /// Layers paired with the offset of their first parameter.
    pub(crate) fn layer_offsets(&self) -> Vec<(&Layer, usize)> {
        let mut offset = 0;
        self.layers()
            .map(|l| {
                let o = offset;
                offset += l.param_count();
                (l, o)
            })
            .collect()
    }
}
