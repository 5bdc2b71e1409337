//! The trainable range-Doppler denoising network: architecture and exact
//! parameter counting, forward/backward passes, Adam, the training loop and
//! binary checkpoints.

pub mod adam;
pub mod arch;
pub mod checkpoint;
pub mod layers;
pub mod loss;
pub mod model;
pub mod train;

pub use adam::{Adam, AdamParams};
pub use arch::{ArchitectureSpec, INPUT_CHANNELS, KERNEL_SIZE};
pub use layers::{BatchNorm, Scalar};
pub use loss::mse_loss;
pub use model::{ForwardCache, Grads, Layer, LayerGrads, Model};
pub use train::{
    denoise_rd_map, normalize_pair, train, EpochStats, TrainConfig, TrainReport, TrainSample,
    ValSample,
};
