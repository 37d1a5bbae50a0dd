//! Settings resolution: command-line flags override a `key=value` config
//! file, which overrides built-in defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use lci_snr::rng::DEFAULT_SEED;
use lci_snr::{AdditiveKind, Architecture, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Verify,
    SweepResolution,
    RatioCurve,
    PixelMap,
    PercentileCurve,
    RunOnce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Synthetic {
    Uniform,
    Point,
}

fn parse_enum<T: ValueEnum>(s: &str) -> Result<T, String> {
    T::from_str(s, true)
}

#[derive(Debug, Parser)]
#[command(name = "lci-snr", version, about = "SNR experiments for lensless compressive imaging")]
pub struct Args {
    #[arg(long, value_enum)]
    pub cmd: Option<Command>,
    /// Image file (PGM or CSV). Repeat for percentile-curve.
    #[arg(long)]
    pub scene: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub synthetic: Option<Synthetic>,
    /// Comma-separated resolutions, e.g. `256,1024` or `2^8,2^10`.
    #[arg(long)]
    pub n_list: Option<String>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Largest N that gets a Monte Carlo run in sweep-resolution.
    #[arg(long)]
    pub mc_cap: Option<usize>,
    #[arg(long, value_parser = AdditiveKind::from_str)]
    pub additive_kind: Option<AdditiveKind>,
    /// Poisson means above this use a normal approximation.
    #[arg(long)]
    pub poisson_approx_threshold: Option<f64>,
    /// Mean photons per image pixel for file scenes (default: scale to X0).
    #[arg(long)]
    pub avg_photons: Option<f64>,
    #[arg(long, value_parser = Architecture::from_str)]
    pub arch: Option<Architecture>,
    /// Give PAI/LAI reserved pixels read noise and count them in totals.
    #[arg(long)]
    pub noise_on_reserved: bool,
    /// Noise-balance grid for ratio-curve, comma-separated.
    #[arg(long)]
    pub balance_list: Option<String>,
    /// Add a Monte Carlo column to ratio-curve.
    #[arg(long)]
    pub ratio_mc: bool,
    /// Flip one matrix entry before verify (negative control).
    #[arg(long)]
    pub corrupt: bool,
    /// Run trials on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
    /// `key=value` file; keys are the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "cmd",
    "scene",
    "synthetic",
    "n-list",
    "x0",
    "sigma",
    "rho",
    "gain",
    "trials",
    "seed",
    "out-dir",
    "mc-cap",
    "additive-kind",
    "poisson-approx-threshold",
    "avg-photons",
    "arch",
    "noise-on-reserved",
    "balance-list",
    "ratio-mc",
    "corrupt",
    "sequential",
];

#[derive(Debug, Default)]
pub struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key=value", no + 1))?;
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("config line {}: unknown key '{key}'", no + 1));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }

    fn get<T, E>(&self, key: &str, parse: impl Fn(&str) -> Result<T, E>) -> Result<Option<T>, String>
    where
        E: Display,
    {
        self.0
            .get(key)
            .map(|v| parse(v).map_err(|e| format!("config key '{key}': {e}")))
            .transpose()
    }

    fn num<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: Display,
    {
        self.get(key, str::parse::<T>)
    }

    fn flag(&self, key: &str) -> Result<bool, String> {
        Ok(self.num::<bool>(key)?.unwrap_or(false))
    }
}

pub fn parse_list<T: Copy>(text: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items: Vec<T> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

/// `1024` or `2^10`.
pub fn parse_order(s: &str) -> Result<usize, String> {
    let n = match s.split_once('^') {
        Some(("2", k)) => {
            let k: u32 = k.parse().map_err(|_| format!("bad exponent in '{s}'"))?;
            1usize.checked_shl(k).filter(|_| k < 40).ok_or_else(|| format!("'{s}' is too large"))?
        }
        Some(_) => return Err(format!("'{s}': only powers of 2 are allowed")),
        None => s.parse().map_err(|_| format!("'{s}' is not an integer"))?,
    };
    if n < 2 || !n.is_power_of_two() {
        return Err(format!("N must be a power of two >= 2, got {n}"));
    }
    Ok(n)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse().map_err(|_| format!("'{s}' is not a number"))
}

#[derive(Clone, Debug)]
pub enum SceneSource {
    Files(Vec<PathBuf>),
    Synthetic(Synthetic),
}

/// Fully resolved and validated settings.
#[derive(Clone, Debug)]
pub struct Settings {
    pub command: Command,
    pub scene: SceneSource,
    pub n_list: Vec<usize>,
    /// Whether `n_list` came from a flag or the config file.
    pub n_list_explicit: bool,
    pub x0: f64,
    pub sigma: f64,
    pub rho: f64,
    pub gain: f64,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub mc_cap: usize,
    pub additive_kind: AdditiveKind,
    pub poisson_approx_threshold: Option<f64>,
    pub avg_photons: Option<f64>,
    pub arch: Architecture,
    pub noise_on_reserved: bool,
    pub balance_list: Vec<f64>,
    pub ratio_mc: bool,
    pub corrupt: bool,
    pub execution: Execution,
}

pub const DEFAULT_X0: f64 = 1e7;
pub const DEFAULT_SIGMA: f64 = 5.0;
pub const DEFAULT_RHO: f64 = 5.0;
pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_MC_CAP: usize = 1 << 14;

fn default_n_list(command: Command) -> Vec<usize> {
    match command {
        Command::SweepResolution => (8..=20).map(|k| 1usize << k).collect(),
        _ => vec![1024],
    }
}

fn default_balance_list() -> Vec<f64> {
    (0..=12).map(|i| 0.25 * i as f64).collect()
}

impl Settings {
    pub fn resolve(args: Args) -> Result<Self, String> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };

        let command = args
            .cmd
            .or(file.get("cmd", parse_enum::<Command>)?)
            .ok_or("no command given; use --cmd")?;

        let scenes = if args.scene.is_empty() {
            file.get("scene", |s| Ok::<_, String>(s.split(',').map(|p| PathBuf::from(p.trim())).collect::<Vec<_>>()))?
                .unwrap_or_default()
        } else {
            args.scene
        };
        let synthetic = args.synthetic.or(file.get("synthetic", parse_enum::<Synthetic>)?);
        let scene = match (scenes.is_empty(), synthetic) {
            (false, Some(_)) => return Err("--scene and --synthetic are mutually exclusive".into()),
            (false, None) => SceneSource::Files(scenes),
            (true, s) => SceneSource::Synthetic(s.unwrap_or(Synthetic::Uniform)),
        };

        let n_text = args.n_list.or(file.get("n-list", |s| Ok::<_, String>(s.to_string()))?);
        let n_list_explicit = n_text.is_some();
        let n_list = match n_text {
            Some(text) => parse_list(&text, parse_order).map_err(|e| format!("--n-list: {e}"))?,
            None => default_n_list(command),
        };
        let balance_list = match args.balance_list.or(file.get("balance-list", |s| Ok::<_, String>(s.to_string()))?) {
            Some(text) => parse_list(&text, parse_f64).map_err(|e| format!("--balance-list: {e}"))?,
            None => default_balance_list(),
        };

        let settings = Settings {
            command,
            scene,
            n_list,
            n_list_explicit,
            x0: args.x0.or(file.num("x0")?).unwrap_or(DEFAULT_X0),
            sigma: args.sigma.or(file.num("sigma")?).unwrap_or(DEFAULT_SIGMA),
            rho: args.rho.or(file.num("rho")?).unwrap_or(DEFAULT_RHO),
            gain: args.gain.or(file.num("gain")?).unwrap_or(1.0),
            trials: args.trials.or(file.num("trials")?).unwrap_or(DEFAULT_TRIALS),
            seed: args.seed.or(file.num("seed")?).unwrap_or(DEFAULT_SEED),
            out_dir: args.out_dir.or(file.num("out-dir")?).unwrap_or_else(|| PathBuf::from("out")),
            mc_cap: args.mc_cap.or(file.num("mc-cap")?).unwrap_or(DEFAULT_MC_CAP),
            additive_kind: args
                .additive_kind
                .or(file.get("additive-kind", AdditiveKind::from_str)?)
                .unwrap_or_default(),
            poisson_approx_threshold: args.poisson_approx_threshold.or(file.num("poisson-approx-threshold")?),
            avg_photons: args.avg_photons.or(file.num("avg-photons")?),
            arch: args
                .arch
                .or(file.get("arch", Architecture::from_str)?)
                .unwrap_or(Architecture::Lci),
            noise_on_reserved: args.noise_on_reserved || file.flag("noise-on-reserved")?,
            balance_list,
            ratio_mc: args.ratio_mc || file.flag("ratio-mc")?,
            corrupt: args.corrupt || file.flag("corrupt")?,
            execution: if args.sequential || file.flag("sequential")? {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
        };
        settings.validate()?;
        Ok(settings)
    }

    fn validate(&self) -> Result<(), String> {
        let finite_nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be finite and >= 0, got {v}"))
            }
        };
        if !(self.x0.is_finite() && self.x0 > 0.0) {
            return Err(format!("--x0 must be > 0, got {}", self.x0));
        }
        finite_nonneg("--sigma", self.sigma)?;
        finite_nonneg("--rho", self.rho)?;
        if !(self.gain.is_finite() && self.gain >= 1.0) {
            return Err(format!("--gain must be >= 1, got {}", self.gain));
        }
        if self.trials < 2 {
            return Err(format!("--trials must be >= 2, got {}", self.trials));
        }
        if let Some(t) = self.poisson_approx_threshold {
            if !(t.is_finite() && t > 0.0) {
                return Err(format!("--poisson-approx-threshold must be > 0, got {t}"));
            }
        }
        if let Some(a) = self.avg_photons {
            if !(a.is_finite() && a > 0.0) {
                return Err(format!("--avg-photons must be > 0, got {a}"));
            }
        }
        for &b in &self.balance_list {
            finite_nonneg("noise balance", b)?;
        }
        if self.command == Command::SweepResolution {
            if let Some(&n) = self.n_list.iter().find(|&&n| n < 4) {
                return Err(format!("sweep-resolution needs N >= 4, got {n}"));
            }
        }
        if matches!(self.command, Command::PixelMap | Command::PercentileCurve | Command::RunOnce) {
            if let SceneSource::Files(files) = &self.scene {
                if self.command != Command::PercentileCurve && files.len() > 1 {
                    return Err("this command takes a single --scene".into());
                }
            }
        }
        Ok(())
    }
}
