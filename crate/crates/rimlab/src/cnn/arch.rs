//! Network architecture description and exact parameter counting.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RimError};

/// Input channels: real and imaginary part of the RD map.
pub const INPUT_CHANNELS: usize = 2;

/// Convolution kernel edge length; every layer uses 3 x 3 kernels.
pub const KERNEL_SIZE: usize = 3;

/// Stack description as output-channel counts per layer, ending in the
/// two-kernel linear output layer.
///
/// Counts are powers of two and non-increasing; the first layer reads the
/// two-channel complex view, the last maps back to it. Batch normalization
/// sits on every layer except the first and the last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ArchitectureSpec {
    kernel_counts: Vec<usize>,
}

impl ArchitectureSpec {
    pub fn new(kernel_counts: Vec<usize>) -> Result<Self> {
        if kernel_counts.len() < 2 {
            return Err(RimError::config("architecture needs at least two layers"));
        }
        if *kernel_counts.last().unwrap() != INPUT_CHANNELS {
            return Err(RimError::config(
                "last layer must have exactly two kernels (real/imag output)",
            ));
        }
        for &k in &kernel_counts {
            if k == 0 || !k.is_power_of_two() {
                return Err(RimError::Config(format!(
                    "kernel count {k} is not a positive power of two"
                )));
            }
        }
        if kernel_counts.windows(2).any(|w| w[1] > w[0]) {
            return Err(RimError::config("kernel counts must be non-increasing"));
        }
        Ok(ArchitectureSpec { kernel_counts })
    }

    /// Parse a comma-separated kernel-count list such as `"512,32,16,2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let counts = s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| RimError::Config(format!("bad kernel count '{tok}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        ArchitectureSpec::new(counts)
    }

    pub fn kernel_counts(&self) -> &[usize] {
        &self.kernel_counts
    }

    pub fn num_layers(&self) -> usize {
        self.kernel_counts.len()
    }

    /// (input-channel, output-channel) pairs per layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.num_layers());
        let mut inputs = INPUT_CHANNELS;
        for &out in &self.kernel_counts {
            dims.push((inputs, out));
            inputs = out;
        }
        dims
    }

    /// Batch normalization is present on all layers but the first and last.
    pub fn has_batch_norm(&self, layer_idx: usize) -> bool {
        layer_idx > 0 && layer_idx + 1 < self.num_layers()
    }

    /// ReLU on every layer except the linear output layer.
    pub fn has_relu(&self, layer_idx: usize) -> bool {
        layer_idx + 1 < self.num_layers()
    }

    /// Exact learnable-parameter count: per layer `in*out*9 + out`, plus
    /// `2*out` for each batch-normalized layer.
    pub fn param_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .enumerate()
            .map(|(idx, &(inp, out))| {
                let conv = inp * out * KERNEL_SIZE * KERNEL_SIZE + out;
                let bn = if self.has_batch_norm(idx) { 2 * out } else { 0 };
                conv + bn
            })
            .sum()
    }
}

impl TryFrom<Vec<usize>> for ArchitectureSpec {
    type Error = RimError;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        ArchitectureSpec::new(v)
    }
}

impl From<ArchitectureSpec> for Vec<usize> {
    fn from(a: ArchitectureSpec) -> Vec<usize> {
        a.kernel_counts
    }
}

impl std::fmt::Display for ArchitectureSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.kernel_counts.iter().map(|k| k.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch(counts: &[usize]) -> ArchitectureSpec {
        ArchitectureSpec::new(counts.to_vec()).unwrap()
    }

    #[test]
    fn reference_parameter_counts() {
        assert_eq!(arch(&[16, 2]).param_count(), 594);
        assert_eq!(arch(&[8, 8, 2]).param_count(), 898);
        assert_eq!(arch(&[64, 2]).param_count(), 2370);
        assert_eq!(arch(&[512, 256, 128, 64, 32, 16, 2]).param_count(), 1_582_834);
    }

    #[test]
    fn default_experiment_architecture_count() {
        assert_eq!(arch(&[512, 32, 16, 2]).param_count(), 162_226);
    }

    #[test]
    fn batch_norm_skips_first_and_last_layers() {
        let a = arch(&[8, 8, 8, 2]);
        assert!(!a.has_batch_norm(0));
        assert!(a.has_batch_norm(1));
        assert!(a.has_batch_norm(2));
        assert!(!a.has_batch_norm(3));
    }

    #[test]
    fn rejects_invalid_shapes() {
        assert!(ArchitectureSpec::new(vec![2]).is_err());
        assert!(ArchitectureSpec::new(vec![16, 4]).is_err());
        assert!(ArchitectureSpec::new(vec![12, 2]).is_err());
        assert!(ArchitectureSpec::new(vec![8, 16, 2]).is_err());
    }

    #[test]
    fn parses_and_formats() {
        let a = ArchitectureSpec::parse("512, 32,16,2").unwrap();
        assert_eq!(a.kernel_counts(), &[512, 32, 16, 2]);
        assert_eq!(a.to_string(), "512,32,16,2");
        assert!(ArchitectureSpec::parse("16,x").is_err());
    }
}
