//! Surrogate viseme classifier: a linear softmax over frame features trained
//! by mini-batch SGD, and the monolingual, bilingual and sequential training
//! protocols that produce per-epoch accuracy traces.

mod model;
mod protocol;
mod trace;
mod train;

pub use model::{
    init_model, init_model_scaled, loss_and_gradient, softmax_in_place, FrameSet, ModelParams,
    DEFAULT_INIT_SCALE,
};
pub use protocol::{
    equalize_samples, run_protocol, test_features, training_features, Corpora, Protocol,
    ProtocolKind, SwitchPoint,
};
pub use trace::{detect_convergence_online, EpochRecord, TrainingTrace, TRACE_MAGIC};
pub use train::{evaluate, evaluate_frames, train_epoch, PerVisemeAccuracy, SgdState, TrainingConfig};
