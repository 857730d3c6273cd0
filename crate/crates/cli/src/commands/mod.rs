pub mod ablate;
pub mod attribute;
pub mod eval;
pub mod fit;
pub mod report;
pub mod synth;

pub use ablate::{ablate, cmd_ablate, AblationRow};
pub use attribute::{attribute_all, cmd_attribute, RallyScoreRow};
pub use eval::{cmd_eval, EvalRow};
pub use fit::{cmd_fit, fit_model, with_tau};
pub use report::{cmd_report, local_rows, LocalRow};
pub use synth::cmd_synth;
