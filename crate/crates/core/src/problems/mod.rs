//! Concrete problem instances.

mod bilinear;
pub mod co;
pub mod mfg;
pub mod morse;
pub mod twolevel;

pub use bilinear::{BilinearQuantum, Terminal};
pub use co::{build_co, CoOrientation, CoParams};
pub use mfg::{build_mfg, MeanFieldGame, MfgParams};
pub use morse::{build_morse, MorseParams};
pub use twolevel::{build_twolevel, TwoLevelParams};
