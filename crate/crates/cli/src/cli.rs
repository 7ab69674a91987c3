use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use mcf_core::ambient::AmbientSpec;
use mcf_core::flow::DtPolicy;
use mcf_core::radial::RadialFunction;
use mcf_core::{Error, Result};

use crate::checks;
use crate::commands::{self, exit_code, write_manifest, Outcome};
use crate::config::{default_product, GridSpec, InitSpec, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "mcf", version, about = "Mean curvature flow of spacelike submanifolds")]
pub struct Cli {
    /// Worker threads (default: all cores; 1 gives bit-reproducible runs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AmbientName {
    Flat,
    Neutral,
    Product,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitName {
    Sine,
    Affine,
    Boosted,
    Radial,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProfileName {
    Linear,
    Cubic,
    Bump,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Run configuration (TOML); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, relative to $MCF_OUTPUT_ROOT when that is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical form of a pseudo-orthogonal matrix given as CSV.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        /// Number of spacelike directions (inferred when omitted).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
    },
    /// Mean curvature flow of a grid patch.
    Flow {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        ambient: Option<AmbientName>,
        /// Spacelike dimension of the ambient.
        #[arg(long)]
        n: Option<usize>,
        /// Timelike dimension of a flat ambient.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum)]
        init: Option<InitName>,
        /// Sine amplitude, boost rapidity, or cubic coefficient of a radial profile.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Fixed time step (switches off the CFL policy).
        #[arg(long)]
        dt: Option<f64>,
        /// Nodes per axis.
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        snapshot_every: Option<usize>,
    },
    /// One-dimensional flow of a radial profile H(R).
    Radial {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        profile: Option<ProfileName>,
        /// Slope of the linear profile.
        #[arg(long)]
        a: Option<f64>,
        /// Cubic coefficient of H = R + c R^3.
        #[arg(long)]
        c: Option<f64>,
        /// Height of the bump on H = R.
        #[arg(long)]
        amp: Option<f64>,
        #[arg(long)]
        r_min: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Sampled timelike curvature constant of an ambient space.
    Tcc {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        ambient: Option<AmbientName>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        max_rapidity: Option<f64>,
    },
    /// Runs the property and identity suite and prints a pass/fail table.
    Check {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn base_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn ambient_spec(name: AmbientName, n: Option<usize>, m: Option<usize>) -> AmbientSpec {
    match name {
        AmbientName::Flat => AmbientSpec::Flat {
            n: n.unwrap_or(2),
            m: m.unwrap_or(1),
        },
        AmbientName::Neutral => AmbientSpec::Neutral { n: n.unwrap_or(3) },
        AmbientName::Product => default_product(),
    }
}

fn signature_of(spec: &AmbientSpec) -> (usize, usize) {
    match *spec {
        AmbientSpec::Flat { n, m } => (n, m),
        AmbientSpec::Neutral { n } => (n, n),
        AmbientSpec::Product { first, second } => (first.dim(), second.dim()),
    }
}

#[allow(clippy::too_many_arguments)]
fn flow_config(
    common: &Common,
    ambient: Option<AmbientName>,
    n: Option<usize>,
    m: Option<usize>,
    init: Option<InitName>,
    eps: Option<f64>,
    steps: Option<usize>,
    dt: Option<f64>,
    nodes: Option<usize>,
    snapshot_every: Option<usize>,
) -> Result<RunConfig> {
    let mut cfg = base_config(common)?;
    if let Some(a) = ambient {
        cfg.ambient = ambient_spec(a, n, m);
        if cfg.grid.as_ref().is_some_and(|g| matches!(g, GridSpec::Bounded { .. })) || ambient.is_some() {
            cfg.grid = if common.config.is_some() { cfg.grid } else { None };
        }
    }
    let (sn, sm) = signature_of(&cfg.ambient);
    match init {
        Some(InitName::Sine) => {
            cfg.init = InitSpec::Sine {
                amplitude: vec![eps.unwrap_or(1e-3); sm],
                wave: 1.0,
                slope: None,
                base: None,
            }
        }
        Some(InitName::Affine) => {
            cfg.init = InitSpec::Affine {
                slope: vec![vec![0.0; sn]; sm],
                offset: vec![0.0; sm],
            }
        }
        Some(InitName::Boosted) => {
            cfg.init = InitSpec::BoostedPlane {
                rapidities: vec![eps.unwrap_or(0.5); sn.min(sm)],
            }
        }
        Some(InitName::Radial) => {
            cfg.init = InitSpec::Radial {
                profile: RadialFunction::PlusCubic { c: eps.unwrap_or(0.1) },
            }
        }
        None => {
            if let Some(e) = eps {
                match &mut cfg.init {
                    InitSpec::Sine { amplitude, .. } => amplitude.iter_mut().for_each(|a| *a = e),
                    _ => return Err(Error::Config("--eps without --init needs a sine initial graph".into())),
                }
            }
        }
    }
    if let Some(s) = steps {
        cfg.flow.max_steps = s;
    }
    if let Some(dt) = dt {
        cfg.flow.dt_policy = DtPolicy::Fixed;
        cfg.flow.dt = dt;
    }
    if let Some(k) = snapshot_every {
        cfg.flow.snapshot_every = k;
    }
    if let Some(k) = nodes {
        cfg.grid = Some(match cfg.grid_spec() {
            GridSpec::Periodic { period, .. } => GridSpec::Periodic { nodes: k, period },
            GridSpec::Bounded { lower, upper, nodes } => GridSpec::Bounded {
                nodes: vec![k; nodes.len()],
                lower,
                upper,
            },
        });
    }
    Ok(cfg)
}

fn execute(cli: Cli, args: &[String]) -> Result<i32> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot set up {t} threads: {e}")))?;
    }
    let started = Instant::now();
    let (name, cfg, mut outcome): (&str, RunConfig, Outcome) = match cli.command {
        Command::Decompose { input, n, m } => {
            commands::decompose(&input, n, m, &mut std::io::stdout().lock())?;
            return Ok(0);
        }
        Command::Check { seed } => {
            let results = checks::run_all(seed);
            print!("{}", checks::format_table(&results));
            return Ok(if results.iter().all(|r| r.passed) { 0 } else { 4 });
        }
        Command::Flow {
            common,
            ambient,
            n,
            m,
            init,
            eps,
            steps,
            dt,
            nodes,
            snapshot_every,
        } => {
            let cfg = flow_config(&common, ambient, n, m, init, eps, steps, dt, nodes, snapshot_every)?;
            let out = commands::flow(&cfg)?;
            ("flow", cfg, out)
        }
        Command::Radial {
            common,
            profile,
            a,
            c,
            amp,
            r_min,
            r_max,
            nodes,
            steps,
            dt,
        } => {
            let mut cfg = base_config(&common)?;
            let rc = &mut cfg.radial;
            if let Some(x) = r_min {
                rc.r_min = x;
            }
            if let Some(x) = r_max {
                rc.r_max = x;
            }
            match profile {
                Some(ProfileName::Linear) => rc.profile = RadialFunction::Linear { a: a.unwrap_or(1.0) },
                Some(ProfileName::Cubic) => rc.profile = RadialFunction::PlusCubic { c: c.unwrap_or(0.1) },
                Some(ProfileName::Bump) => {
                    rc.profile = RadialFunction::SineBump {
                        amp: amp.unwrap_or(0.1),
                        r_min: rc.r_min,
                        r_max: rc.r_max,
                    }
                }
                None if a.is_some() || c.is_some() || amp.is_some() => {
                    return Err(Error::Config("profile parameters need --profile".into()))
                }
                None => {}
            }
            if let Some(k) = nodes {
                rc.nodes = k;
            }
            if let Some(s) = steps {
                rc.steps = s;
            }
            if dt.is_some() {
                rc.dt = dt;
            }
            let out = commands::radial(&cfg)?;
            ("radial", cfg, out)
        }
        Command::Tcc {
            common,
            ambient,
            n,
            m,
            samples,
            max_rapidity,
        } => {
            let mut cfg = base_config(&common)?;
            if let Some(a) = ambient {
                cfg.ambient = ambient_spec(a, n, m);
                cfg.tcc.lower = None;
                cfg.tcc.upper = None;
            }
            if let Some(s) = samples {
                cfg.tcc.samples = s;
            }
            if let Some(r) = max_rapidity {
                cfg.tcc.max_rapidity = r;
            }
            let out = commands::tcc(&cfg)?;
            ("tcc", cfg, out)
        }
    };
    write_manifest(name, args, &cfg, &mut outcome, started)?;
    if let Some(h) = &outcome.halt {
        eprintln!("mcf: {h}");
        return Ok(3);
    }
    if let Some(dir) = &outcome.out_dir {
        eprintln!("mcf: wrote {} files to {}", outcome.files.len() + 1, dir.display());
    }
    Ok(0)
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, &args[1..]) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mcf: {e}");
            exit_code(&e)
        }
    }
}
