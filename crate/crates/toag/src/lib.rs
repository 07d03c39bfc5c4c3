//! Truncated ordered abelian groups: structures [0, tau] with saturating
//! addition, the axioms that characterise them, their extension back to
//! ordered abelian groups, and the Presburger-style classification of the
//! discrete ones.

pub mod axiom;
pub mod cli;
pub mod extension;
pub mod group;
pub mod presburger;
pub mod search;
pub mod trunc;
pub mod valuation;

pub use axiom::{AxiomReport, CheckId, Verdict};
pub use group::{GroupElement, GroupError, GroupInstance};
pub use trunc::{AdditionCase, FiniteTable, ToagError, TruncElement, TruncStructure};
