//! Epistemic planning under two equivalent semantics: Kripke models with
//! product update, and possibilities with union update.

pub mod domains;
pub mod equivalence;
pub mod events;
pub mod fixtures;
pub mod formula;
pub mod kripke;
pub mod planner;
pub mod possibility;
pub mod refine;
pub mod taskio;
pub mod valuation;

pub use events::{ActionDescription, GroundAction};
pub use formula::{parse_formula, Agent, Atom, Formula, Vocabulary};
pub use kripke::{EpistemicStateK, KripkeModel, WorldId};
pub use possibility::{PossibilitySpectrum, PossibilityStore};
pub use valuation::Valuation;
