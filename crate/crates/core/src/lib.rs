//! Exact arithmetic for locally analytic vectors in mixed characteristic.
//!
//! The crate provides truncated p-adic integers ([`padic`]), perfectoid
//! Laurent series over `F_p` ([`series`]), truncated Witt vectors over them
//! ([`witt`]), Mahler expansions over valued modules ([`mahler`]) and the
//! orbit, witness and Tate–Sen machinery built on top ([`analytic`]).

pub mod analytic;
pub mod error;
pub mod mahler;
pub mod module;
pub mod padic;
pub mod rational;
pub mod realpow;
pub mod series;
pub mod witt;

pub use error::{Error, Result};
pub use padic::{MultiIndex, PadicInt, Prime};
pub use rational::{ExtVal, Valuation, Q};
pub use series::{FracExp, PerfLaurent};
pub use witt::WittElem;
