pub mod amalg;
pub mod check;
pub mod error;
pub mod extend;
pub mod formulas;
pub mod gallery;
pub mod hahn;
pub mod orders;
pub mod scalars;
pub mod sigmapoly;
pub mod solve;
pub mod testkit;

pub use error::{Error, Result};
pub use hahn::{HahnModel, HahnVector, Scaling};
pub use orders::{Cut, CutSide, Index, IndexOrder, OrderAuto, Side};
pub use scalars::{Rational, UniPoly};
pub use sigmapoly::{sp_eval, MonotoneClass, Ovsa, SigmaPoly};
pub use extend::{Element, ExtModel, Model, ModelCut};
pub use amalg::{AmalgamationProblem, OrderWithAction};
pub use solve::SolveOutcome;
