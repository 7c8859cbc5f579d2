//! Warning classifier: per-branch convolution and stacked bidirectional GRU
//! over embedded token sequences, global max pooling, and a dense softmax
//! head, trained with Adamax. Backpropagation is written out by hand.

pub mod adamax;
pub mod gradcheck;
pub mod layers;
pub mod model;
pub mod tensor;
pub mod train;

pub use adamax::{AdamaxConfig, AdamaxState};
pub use gradcheck::{gradcheck, relative_error, TensorCheck};
pub use model::{Gradients, Mode, ModelConfig, RankModel, Sample};
pub use tensor::{NeuralError, Tensor, TensorF};
pub use train::{mix_seed, predict, train, EpochStats, TrainConfig};
