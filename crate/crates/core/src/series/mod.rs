//! Weight sequences, their generating function `φ`, the derived offspring
//! law and the simply generated partition function `Z = z φ(Z)`.

mod classify;
mod excool;
mod partition;
mod presets;
mod source;

pub use classify::{classify, eval_phi, eval_phi_derivative, psi, Kind, SeriesProfile};
pub use excool::{ExcoolDissection, ExcoolOuterplanar};
pub use partition::{
    exact_to_f64, partition_function, partition_function_exact, ratio_diagnostics, CoefficientTable,
    PowerTable, RatioDiagnostics,
};
pub use presets::{parse_weights_file, preset, preset_names};
pub use source::{CoefficientSource, WeightSequence};
