//! Linear propagation through a prepared comb and the echo it produces.

mod analytic;
mod echo;
mod ensemble;
mod forward;
mod interference;
mod model;
mod transfer;

pub use analytic::{
    analytic_efficiency, golden_max, optimal_finesse, optimal_finesse_with, FinesseOptimum,
    FINESSE_RANGE,
};
pub use echo::{
    echo_efficiency, window_half_width, EchoResult, ECHO_DETECTION_FLOOR, WINDOW_CONTAINMENT,
};
pub use ensemble::{
    ensemble_echo, ensemble_efficiency, first_echo, EnsembleEcho, Ion, IonEnsemble,
};
pub use forward::{max_forward_efficiency, refine_scan, ForwardMaximum};
pub use interference::{beat_period, interference_trace};
pub use model::{EchoModel, EchoRun};
pub use transfer::{
    make_transfer_function, make_transfer_function_with, propagate, Dispersion, TransferFunction,
    CAUSALITY_TOLERANCE,
};
