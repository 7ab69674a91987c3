//! Run configuration: one TOML file, every section optional.
//!
//! ```toml
//! seed = 7
//! output = "runs/sine"
//!
//! [ambient]            # name = "flat" | "neutral" | "product"
//! name = "flat"
//! n = 2
//! m = 1
//!
//! [grid]               # topology = "periodic" | "bounded"
//! topology = "periodic"
//! nodes = 32
//! period = 6.283185307179586
//!
//! [init]               # family = "sine" | "affine" | "boosted_plane" | "radial"
//! family = "sine"
//! amplitude = [0.001]
//!
//! [flow]               # any FlowConfig field
//! max_steps = 200
//! ```
//!
//! See `configs/` for complete examples of every subcommand.

use std::f64::consts::{PI, SQRT_2};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use mcf_core::ambient::{Ambient, AmbientSpec, Factor, Region};
use mcf_core::flow::FlowConfig;
use mcf_core::radial::{RadialFunction, RadialProfile};
use mcf_core::submanifold::{init, Grid, ImmersedPatch};
use mcf_core::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Environment variable naming the root under which relative output
/// directories are created.
pub const OUTPUT_ROOT_ENV: &str = "MCF_OUTPUT_ROOT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// `nodes` per axis on a torus of side `period`; the dimension is that
    /// of the ambient's spacelike part.
    Periodic { nodes: usize, period: f64 },
    Bounded {
        lower: Vec<f64>,
        upper: Vec<f64>,
        nodes: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// `y = offset + slope x`, slope given as `m` rows of `n` entries.
    Affine {
        slope: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    /// `y_a = slope_a . x + amplitude_a prod_i sin(wave x_i + a pi/4)`,
    /// around the chart point `base` (zeros when omitted).
    Sine {
        amplitude: Vec<f64>,
        #[serde(default = "one")]
        wave: f64,
        #[serde(default)]
        slope: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        base: Option<Vec<f64>>,
    },
    BoostedPlane { rapidities: Vec<f64> },
    /// Section `x -> (x, H(|x|) x/|x|)` of the neutral tangent bundle.
    Radial { profile: RadialFunction },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialSection {
    pub profile: RadialFunction,
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub steps: usize,
    /// Fixed step; the CFL limit when omitted.
    pub dt: Option<f64>,
    pub c_cfl: f64,
    /// Profile the deviation monitor compares against; `H = a R` for a
    /// linear profile, `H = R` otherwise.
    pub reference: Option<RadialFunction>,
}

impl Default for RadialSection {
    fn default() -> Self {
        Self {
            profile: RadialFunction::Linear { a: 1.0 },
            r_min: 0.5,
            r_max: 2.0,
            nodes: 41,
            steps: 100,
            dt: None,
            c_cfl: 0.2,
            reference: None,
        }
    }
}

impl RadialSection {
    pub fn reference(&self) -> RadialFunction {
        self.reference.unwrap_or(match self.profile {
            RadialFunction::Linear { a } => RadialFunction::Linear { a },
            _ => RadialFunction::Linear { a: 1.0 },
        })
    }

    pub fn initial_profile(&self) -> Result<RadialProfile> {
        RadialProfile::sample(&self.profile, self.r_min, self.r_max, self.nodes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TccSection {
    pub samples: usize,
    pub max_rapidity: f64,
    /// Sampling box in chart coordinates; a box around a generic point of
    /// the ambient when omitted.
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

impl Default for TccSection {
    fn default() -> Self {
        Self {
            samples: 100_000,
            max_rapidity: mcf_core::ambient::DEFAULT_MAX_RAPIDITY,
            lower: None,
            upper: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub ambient: AmbientSpec,
    pub grid: Option<GridSpec>,
    pub init: InitSpec,
    pub flow: FlowConfig,
    pub radial: RadialSection,
    pub tcc: TccSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output: None,
            ambient: AmbientSpec::Flat { n: 2, m: 1 },
            grid: None,
            init: InitSpec::Sine {
                amplitude: vec![1e-3],
                wave: 1.0,
                slope: None,
                base: None,
            },
            flow: FlowConfig::default(),
            radial: RadialSection::default(),
            tcc: TccSection::default(),
        }
    }
}

/// The product ambient used when only its name is given.
pub fn default_product() -> AmbientSpec {
    AmbientSpec::Product {
        first: Factor::Sphere { radius: 1.0 },
        second: Factor::Sphere { radius: SQRT_2 },
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn build_ambient(&self) -> Result<Arc<dyn Ambient>> {
        Ok(Arc::from(self.ambient.build()?))
    }

    /// The configured grid, or a default suited to the ambient and family.
    pub fn grid_spec(&self) -> GridSpec {
        if let Some(g) = &self.grid {
            return g.clone();
        }
        match (&self.init, self.ambient) {
            (InitSpec::Radial { .. }, _) => GridSpec::Bounded {
                lower: vec![0.5, 0.4, 0.3],
                upper: vec![1.0, 0.9, 0.8],
                nodes: vec![9, 9, 9],
            },
            (_, AmbientSpec::Product { .. }) => GridSpec::Bounded {
                lower: vec![1.0, -0.6],
                upper: vec![2.2, 0.6],
                nodes: vec![25, 25],
            },
            _ => GridSpec::Periodic {
                nodes: 32,
                period: 2.0 * PI,
            },
        }
    }

    pub fn build_grid(&self, n: usize) -> Result<Grid> {
        match self.grid_spec() {
            GridSpec::Periodic { nodes, period } => Grid::periodic(n, nodes, period),
            GridSpec::Bounded { lower, upper, nodes } => Grid::bounded(&lower, &upper, &nodes),
        }
    }

    pub fn build_patch(&self) -> Result<ImmersedPatch> {
        let ambient = self.build_ambient()?;
        let sig = ambient.signature();
        let grid = self.build_grid(sig.n)?;
        let matrix = |rows: &[Vec<f64>]| -> Result<DMatrix<f64>> {
            if rows.len() != sig.m || rows.iter().any(|r| r.len() != sig.n) {
                return Err(Error::Config(format!("slope must be {} rows of {} entries", sig.m, sig.n)));
            }
            Ok(DMatrix::from_fn(sig.m, sig.n, |a, i| rows[a][i]))
        };
        match &self.init {
            InitSpec::Affine { slope, offset } => init::affine_graph(ambient, grid, &matrix(slope)?, offset),
            InitSpec::Sine {
                amplitude,
                wave,
                slope,
                base,
            } => {
                let slope = match slope {
                    Some(rows) => matrix(rows)?,
                    None => DMatrix::zeros(sig.m, sig.n),
                };
                let base = base.clone().unwrap_or_else(|| self.default_base(sig.n + sig.m));
                init::sine_graph(ambient, grid, &base, amplitude, *wave, &slope)
            }
            InitSpec::BoostedPlane { rapidities } => init::boosted_plane(ambient, grid, rapidities),
            InitSpec::Radial { profile } => init::radial_cube(ambient, grid, profile),
        }
    }

    /// Chart base point for graphs: the origin, except on sphere factors
    /// where the second-factor part sits on the equator.
    fn default_base(&self, d: usize) -> Vec<f64> {
        let mut base = vec![0.0; d];
        if let AmbientSpec::Product {
            first,
            second: Factor::Sphere { .. },
        } = self.ambient
        {
            base[first.dim()] = PI / 2.0;
        }
        base
    }

    pub fn tcc_region(&self) -> Result<Region> {
        if let (Some(lo), Some(hi)) = (&self.tcc.lower, &self.tcc.upper) {
            return Region::new(lo.clone(), hi.clone());
        }
        let (lo, hi) = match self.ambient {
            AmbientSpec::Flat { n, m } => (vec![-1.0; n + m], vec![1.0; n + m]),
            AmbientSpec::Neutral { n } => (vec![-1.0; 2 * n], vec![1.0; 2 * n]),
            AmbientSpec::Product { first, second } => {
                let span = |f: Factor| match f {
                    Factor::Sphere { .. } => (vec![0.5, -1.0], vec![PI - 0.5, 1.0]),
                    Factor::Flat { dim } => (vec![-1.0; dim], vec![1.0; dim]),
                };
                let (mut lo, mut hi) = span(first);
                let (lo2, hi2) = span(second);
                lo.extend(lo2);
                hi.extend(hi2);
                (lo, hi)
            }
        };
        Region::new(lo, hi)
    }

    /// Output directory: the configured one (default `out`), resolved
    /// against `$MCF_OUTPUT_ROOT` when relative.
    pub fn output_dir(&self) -> PathBuf {
        let dir = self.output.clone().unwrap_or_else(|| PathBuf::from("out"));
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) if dir.is_relative() => PathBuf::from(root).join(dir),
            _ => dir,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        if self.radial.nodes < 3 || !(self.radial.c_cfl > 0.0 && self.radial.c_cfl <= 1.0) {
            return Err(Error::Config("radial section needs >= 3 nodes and c_cfl in (0, 1]".into()));
        }
        if let Some(dt) = self.radial.dt {
            if !(dt > 0.0) {
                return Err(Error::Config(format!("radial dt must be positive, got {dt}")));
            }
        }
        if self.tcc.samples == 0 || !(self.tcc.max_rapidity >= 0.0) {
            return Err(Error::Config("tcc needs >= 1 sample and a non-negative max_rapidity".into()));
        }
        if self.tcc.lower.is_some() != self.tcc.upper.is_some() {
            return Err(Error::Config("tcc region needs both lower and upper".into()));
        }
        Ok(())
    }
}
