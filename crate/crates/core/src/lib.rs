//! Computable sparse dyadic operators and the weighted weak-type estimates
//! around them.
//!
//! The crate works on the unit cube `[0,1)^d` (d = 1 or 2) with a uniform
//! dyadic lattice of configurable depth. Functions are piecewise constant on
//! the lattice cells, weights are either cell-constant or closed-form power
//! weights `x^beta`, and every integral over a dyadic cube is exact.
//!
//! Module map:
//!
//! * [`dyadic`] – cubes, sparse families, exponent tuples
//! * [`grid`] – cell-constant functions and per-level integral pyramids
//! * [`weights`] – weights and their characteristics
//! * [`operators`] – sparse operator, maximal functions, fractional integral,
//!   level-set decomposition
//! * [`norms`] – weighted Lebesgue, weak and Lorentz norms, operator-norm
//!   lower bounds
//! * [`testing`] – testing constant and closed-form bound formulas
//! * [`experiments`] – extremal constructions and exponent-recovery sweeps
//! * [`cli`] – the `sparseweak` command line front end

pub mod cli;
pub mod defaults;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod grid;
pub mod norms;
pub mod operators;
pub mod random;
pub mod testing;
pub mod weights;

pub use dyadic::{DyadicCube, ExponentParams, SparseFamily};
pub use error::{Error, Result};
pub use grid::{GridFunction, Pyramid};
pub use weights::Weight;
