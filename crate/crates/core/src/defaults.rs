//! Single table of defaults shared by the library, the CLI and the
//! acceptance suite.

/// Lattice depth K used when a config does not specify one.
pub const DEPTH: u32 = 14;

/// Sparseness parameter for generated families.
pub const GAMMA: f64 = 0.5;

/// Averages below `2^-(M_MAX+1)` are dropped from level-set decompositions.
pub const M_MAX: u32 = 40;

/// Default seed for random instances.
pub const SEED: u64 = 0x5eed;

/// Exponents of the default theta grid: theta = 2^-2, ..., 2^-7.
pub const THETA_EXPONENTS: [i32; 6] = [2, 3, 4, 5, 6, 7];

/// Relative truncation error allowed for the tail of the extremal sequence.
pub const TRUNCATION_TOLERANCE: f64 = 0.01;

/// Relative tolerance for quantities that are exact up to rounding.
pub const EXACT_RTOL: f64 = 1e-12;

/// Constant c in r(w) = 1 + 1/(c [w]_{A_inf}). Smallest passing value on the
/// power weights x^(theta-1), theta = 0.1, ..., 1.0, at depth 14 is 3.047
/// (bound by theta = 0.1); see [`crate::weights::calibrate_reverse_holder`].
pub const REVERSE_HOLDER_C: f64 = 3.05;

/// Theta grid as values, strictly decreasing.
pub fn theta_grid() -> Vec<f64> {
    THETA_EXPONENTS.iter().map(|&k| 2f64.powi(-k)).collect()
}

/// Lattice depth for the `testing` command (families, weights, tests).
pub const TESTING_DEPTH: u32 = 6;

/// Random masks and random positive functions added to the indicator tests.
pub const RANDOM_TESTS: usize = 4;

/// Allowed distance between a fitted slope and its target.
pub const SLOPE_TOLERANCE: f64 = 0.1;

/// Seeded instances per randomized check in `verify`.
pub const VERIFY_INSTANCES: usize = 10;
