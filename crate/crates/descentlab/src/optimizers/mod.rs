//! Update rules, stop rules, and the training driver.

pub mod config;
pub mod stepper;
pub mod stop;
pub mod train;

pub use config::{OptimizerConfig, OptimizerKind};
pub use stepper::{OptimizerState, StepOutcome, Stepper};
pub use stop::{check_stop, StopContext, StopMode, StopRule};
pub use train::{
    read_trace_csv, trace_table, train, train_from, write_trace_csv, TraceRecord, TrainConfig,
    TRACE_HEADERS,
};
