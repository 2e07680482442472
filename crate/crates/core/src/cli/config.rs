//! JSON run configuration. Every field has a default from
//! [`crate::defaults`]; the resolved form (defaults and flag overrides
//! applied, `p` filled in) is embedded in every report and can be fed back
//! through `--config`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::dyadic::{DyadicCube, ExponentParams, SparseFamily};
use crate::error::{Error, Result};
use crate::experiments::{extremal_weight, TestGenerator};
use crate::grid::GridFunction;
use crate::random::{self, InstanceRng};
use crate::weights::Weight;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSpec {
    pub d: u8,
    /// Omitted: taken from the Sobolev line `1/p = 1/q + alpha/d`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub q: f64,
    pub alpha: f64,
    pub nu: f64,
}

impl Default for ParamsSpec {
    fn default() -> Self {
        ParamsSpec {
            d: 1,
            p: None,
            q: 2.0,
            alpha: 0.0,
            nu: 1.0,
        }
    }
}

impl ParamsSpec {
    pub fn resolve(&self) -> Result<ExponentParams> {
        match self.p {
            Some(p) => ExponentParams::new(self.d, p, self.q, self.alpha, self.nu),
            None => ExponentParams::sobolev(self.d, self.q, self.alpha, self.nu),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightSpec {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    Power {
        beta: f64,
    },
    /// `x^((theta - 1)/q)` with `q` from the parameters.
    Extremal {
        theta: f64,
    },
    Grid {
        depth: u32,
        values: Vec<f64>,
    },
    /// Log-uniform cell values in `[e^-3, e^3]` from the run seed.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth: Option<u32>,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Constant { value: 1.0 }
    }
}

impl WeightSpec {
    pub fn build(&self, prm: &ExponentParams, depth: u32, rng: &mut InstanceRng) -> Result<Weight> {
        let d = prm.d();
        match self {
            WeightSpec::Constant { value } => Weight::constant(d, *value),
            WeightSpec::Power { beta } => Weight::power(*beta),
            WeightSpec::Extremal { theta } => extremal_weight(*theta, prm.q()),
            WeightSpec::Grid { depth, values } => Weight::grid(GridFunction::new(d, *depth, values.clone())?),
            WeightSpec::Random { depth: k } => Ok(random::grid_weight(rng, d, k.unwrap_or(depth))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    #[default]
    Unit,
    Tower {
        depth: u32,
    },
    Cubes {
        cubes: Vec<DyadicCube>,
    },
    /// Seeded sparse family with levels up to `depth` (default: run depth).
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth: Option<u32>,
    },
    /// Seeded family with the strengthened sparseness for the run's alpha.
    ExtraSparse {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth: Option<u32>,
    },
}

impl FamilySpec {
    pub fn build(&self, prm: &ExponentParams, depth: u32, gamma: f64, rng: &mut InstanceRng) -> Result<SparseFamily> {
        let d = prm.d();
        match self {
            FamilySpec::Unit => SparseFamily::verify([DyadicCube::unit(d)], gamma),
            FamilySpec::Tower { depth } => {
                if d != 1 {
                    return Err(Error::param("the tower family is one-dimensional"));
                }
                SparseFamily::tower(*depth)
            }
            FamilySpec::Cubes { cubes } => SparseFamily::verify(cubes.iter().copied(), gamma),
            FamilySpec::Random { depth: k } => Ok(random::sparse_family(rng, d, k.unwrap_or(depth), gamma)),
            FamilySpec::ExtraSparse { depth: k } => {
                Ok(random::extra_sparse_family(rng, d, k.unwrap_or(depth), prm.alpha()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    Indicator {
        cube: DyadicCube,
        #[serde(default = "one")]
        value: f64,
    },
    Grid {
        depth: u32,
        values: Vec<f64>,
    },
    /// Uniform cell values in `[0.05, 2)` from the run seed.
    Random,
}

impl Default for FunctionSpec {
    fn default() -> Self {
        FunctionSpec::Constant { value: 1.0 }
    }
}

impl FunctionSpec {
    pub fn build(&self, d: u8, depth: u32, rng: &mut InstanceRng) -> Result<GridFunction> {
        match self {
            FunctionSpec::Constant { value } => GridFunction::constant(d, depth, *value),
            FunctionSpec::Indicator { cube, value } => GridFunction::indicator(d, depth, cube, *value),
            FunctionSpec::Grid { depth, values } => GridFunction::new(d, *depth, values.clone()),
            FunctionSpec::Random => Ok(random::positive_grid(rng, d, depth)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApplyOptions {
    /// Apply to `f sigma` instead of `f`.
    pub weighted: bool,
    /// Add the fractional maximal function column.
    pub maximal: bool,
    /// Add the fractional integral column and the node table (d = 1, alpha > 0).
    pub riesz: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestingOptions {
    /// Lattice depth for families, weights and tests (the `--depth` flag
    /// overrides it for this command).
    pub depth: u32,
    /// `None`: the single configured instance. `Some(n)`: `n` random
    /// instances (family, `w`, `sigma`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<usize>,
    /// Random masks and random positive tests added to the indicators.
    pub random_tests: usize,
}

impl Default for TestingOptions {
    fn default() -> Self {
        TestingOptions {
            depth: defaults::TESTING_DEPTH,
            suite: None,
            random_tests: defaults::RANDOM_TESTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Indicator,
    Duality,
    Case2,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpnessOptions {
    pub experiment: Experiment,
    pub theta_grid: Vec<f64>,
    pub generators: Vec<TestGenerator>,
    /// Allowed distance between fitted and target slopes.
    pub tolerance: f64,
}

impl Default for SharpnessOptions {
    fn default() -> Self {
        SharpnessOptions {
            experiment: Experiment::Full,
            theta_grid: defaults::theta_grid(),
            generators: vec![TestGenerator::Indicator, TestGenerator::Extremal],
            tolerance: defaults::SLOPE_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyCheck {
    pub cubes: Vec<DyadicCube>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub verbose: bool,
    /// Seeded random instances per randomized check.
    pub instances: usize,
    /// Extra families to run through the sparseness check.
    pub families: Vec<FamilyCheck>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            verbose: false,
            instances: defaults::VERIFY_INSTANCES,
            families: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub params: ParamsSpec,
    pub depth: u32,
    pub seed: u64,
    pub gamma: f64,
    pub weight: WeightSpec,
    pub sigma: WeightSpec,
    /// Powers `s` of `w` whose `A_inf` characteristic `char` reports.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub powers: Option<Vec<f64>>,
    pub family: FamilySpec,
    pub function: FunctionSpec,
    pub apply: ApplyOptions,
    pub testing: TestingOptions,
    pub sharpness: SharpnessOptions,
    pub verify: VerifyOptions,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            params: ParamsSpec::default(),
            depth: defaults::DEPTH,
            seed: defaults::SEED,
            gamma: defaults::GAMMA,
            weight: WeightSpec::default(),
            sigma: WeightSpec::default(),
            powers: None,
            family: FamilySpec::default(),
            function: FunctionSpec::default(),
            apply: ApplyOptions::default(),
            testing: TestingOptions::default(),
            sharpness: SharpnessOptions::default(),
            verify: VerifyOptions::default(),
        }
    }
}

impl Config {
    /// Parses a config file. A report written by this tool is accepted too:
    /// its embedded `config` is used.
    pub fn load(path: &Path) -> std::result::Result<Config, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> std::result::Result<Config, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
        let value = match value.get("config") {
            Some(inner) if value.get("command").is_some() => inner.clone(),
            _ => value,
        };
        serde_json::from_value(value).map_err(|e| format!("invalid config: {e}"))
    }

    /// Validates and fills in derived values (currently `p`).
    pub fn resolve(mut self) -> Result<(Config, ExponentParams)> {
        let prm = self.params.resolve()?;
        self.params.p = Some(prm.p());
        if self.depth > crate::dyadic::MAX_LEVEL {
            return Err(Error::param(format!("depth {} exceeds {}", self.depth, crate::dyadic::MAX_LEVEL)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::param(format!("gamma = {} must lie in (0,1)", self.gamma)));
        }
        Ok((self, prm))
    }
}
