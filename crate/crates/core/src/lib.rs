//! Open-world temporal reasoning over a microworld of blocks, open containers,
//! lids, lidded containers and closed containers.
//!
//! A problem specification states a partial initial state, a partial record of
//! events and explicit non-occurrence assertions over a chain of named time
//! points. The [`engine`] proves `holds(t, q)` goals by backward chaining over
//! given facts, conditional effects and persistence, and emits proof trees that
//! [`engine::check_proof`] validates without searching. The [`oracle`] is a
//! closed-world simulator plus a bounded enumerator of every completion of a
//! specification; it is the ground truth the engine is tested against.
//!
//! ```
//! use openworld::engine::{infer, Verdict};
//! use openworld::specdsl::{parse_fluent, parse_spec, ValidSpec};
//!
//! let spec = ValidSpec::new(parse_spec(openworld::corpus::B1).unwrap()).unwrap();
//! let goal = parse_fluent("contained(oa,ow)").unwrap();
//! assert!(matches!(infer(&spec, &"t3".into(), &goal), Ok(Verdict::Proved(_))));
//! ```

pub mod corpus;
pub mod domain;
pub mod engine;
pub mod error;
pub mod fuzz;
pub mod oracle;
pub mod specdsl;
pub mod worldmodel;

pub use error::Error;
