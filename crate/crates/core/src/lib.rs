//! Knowledge-driven synthesis of interpretable cooking policies.
//!
//! Pipeline: the [`sim`] kitchen produces trajectories, the [`extractor`]
//! mines transition rules from them, the [`reasoner`] turns those rules into
//! preconditions for each action primitive, and the [`synth`] genetic search
//! assembles [`dsl`] programs that respect the preconditions. [`nav`] lowers
//! action primitives to grid moves, [`harness`] wires the pipeline into
//! experiments and [`server`] lets a human play alongside a program.

pub mod dsl;
pub mod extractor;
pub mod harness;
pub mod nav;
pub mod reasoner;
pub mod rollout;
pub mod server;
pub mod sim;
pub mod synth;

pub use dsl::{ActionPrimitive, Condition, ConditionBase, ItModule, PointClass, Program};
pub use sim::{EnvAction, GridLayout, Item, WorldState};
