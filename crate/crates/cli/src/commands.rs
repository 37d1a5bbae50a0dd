use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lci_snr::hadamard::CheckStatus;
use lci_snr::pgm::write_p5_16;
use lci_snr::scene::{load_image, synth_point_source, synth_uniform_random};
use lci_snr::snr::{
    analytic_lci, analytic_pai, crossing_percent, pixel_db_map, ratio_from_noise_balance, ratio_lci_pai,
    sensor_time_budget, sorted_ratio_curve, to_db, AnalyticParams,
};
use lci_snr::verify::{run_verification, VerifyOptions};
use lci_snr::{monte_carlo_snr, Architecture, MonteCarloConfig, NoiseParams, Scene, SnrReport, SnrValue};

use crate::config::{Command, SceneSource, Settings, Synthetic};

/// Why a command did not succeed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or input files (exit 2).
    Usage(String),
    /// A verification identity failed (exit 1).
    Check(String),
    /// Anything else that went wrong while running (exit 1).
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Check(_) | Failure::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Check(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<lci_snr::Error> for Failure {
    fn from(e: lci_snr::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

pub fn run(settings: &Settings) -> Outcome {
    match settings.command {
        Command::Verify => verify(settings),
        Command::SweepResolution => sweep_resolution(settings),
        Command::RatioCurve => ratio_curve(settings),
        Command::PixelMap => pixel_map(settings),
        Command::PercentileCurve => percentile_curve(settings),
        Command::RunOnce => run_once(settings),
    }
}

fn db(v: f64) -> String {
    format!("{v:.4}")
}

fn snr_db(v: SnrValue) -> String {
    v.db().map_or_else(|| "inf".to_string(), db)
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn noise_params(s: &Settings) -> NoiseParams {
    NoiseParams {
        sigma: s.sigma,
        rho: s.rho,
        additive_kind: s.additive_kind,
        gain: s.gain,
        poisson_approx_threshold: s.poisson_approx_threshold,
        noise_on_reserved: s.noise_on_reserved,
        ..NoiseParams::default()
    }
}

fn mc_config(s: &Settings) -> MonteCarloConfig {
    MonteCarloConfig::new(s.trials, s.seed).with_execution(s.execution)
}

fn synthetic_scene(kind: Synthetic, n: usize, x0: f64, seed: u64) -> Result<Scene, Failure> {
    Ok(match kind {
        Synthetic::Uniform => synth_uniform_random(n, x0, seed)?,
        // half the photons in one pixel, the rest spread evenly
        Synthetic::Point => synth_point_source(n, 0.5 * x0 / (n - 1) as f64, 0.5 * x0)?,
    })
}

/// Named scenes for the map, percentile and single-run commands. File
/// scenes are scaled to `avg_photons` per pixel or else to a total of X0.
fn scenes(s: &Settings) -> Result<Vec<(String, Scene)>, Failure> {
    match &s.scene {
        SceneSource::Synthetic(kind) => {
            let name = match kind {
                Synthetic::Uniform => "uniform",
                Synthetic::Point => "point",
            };
            Ok(vec![(name.to_string(), synthetic_scene(*kind, s.n_list[0], s.x0, s.seed)?)])
        }
        SceneSource::Files(paths) => paths
            .iter()
            .map(|path| {
                let usage = |e: lci_snr::Error| Failure::Usage(e.to_string());
                let mut scene = load_image(path, s.avg_photons.unwrap_or(1.0)).map_err(usage)?;
                if s.avg_photons.is_none() && scene.brightness() > 0.0 {
                    scene = scene.scaled(s.x0 / scene.brightness()).map_err(usage)?;
                }
                let stem = path.file_stem().map_or("scene".into(), |s| s.to_string_lossy().into_owned());
                Ok((stem, scene))
            })
            .collect(),
    }
}

fn verify(s: &Settings) -> Outcome {
    let mut opts = VerifyOptions {
        corrupt: s.corrupt,
        seed: s.seed,
        ..VerifyOptions::default()
    };
    if s.n_list_explicit {
        let lo = s.n_list.iter().min().unwrap().trailing_zeros().max(1);
        let hi = s.n_list.iter().max().unwrap().trailing_zeros();
        if hi > lci_snr::hadamard::DENSE_MAX_LOG2 {
            return Err(Failure::Usage(format!(
                "verify builds dense matrices; N must be <= {}",
                lci_snr::hadamard::DENSE_MAX_ORDER
            )));
        }
        opts.min_log2 = lo;
        opts.max_log2 = hi;
    }
    let report = run_verification(&opts)?;
    println!("{:<20} {:>6}  {:<6} detail", "check", "N", "status");
    for c in &report.checks {
        let status = match c.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::NotApplicable => "n/a",
        };
        println!("{:<20} {:>6}  {:<6} {}", c.name, c.order, status, c.detail);
    }
    let failed = report.checks.iter().filter(|c| c.status == CheckStatus::Fail).count();
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} identity checks failed")));
    }
    println!("all identities hold");
    Ok(())
}

/// Standard error of a linear SNR estimate, expressed in dB.
fn se_db(report: &SnrReport) -> String {
    match report.total_snr_linear() {
        Some(snr) => db(20.0 / std::f64::consts::LN_10 * report.mc_standard_error / snr),
        None => String::new(),
    }
}

fn sweep_resolution(s: &Settings) -> Outcome {
    let params = noise_params(s);
    let mut rows = Vec::new();
    for &n in &s.n_list {
        let p = AnalyticParams::new(n, s.x0, s.sigma, s.rho)?;
        let lci = analytic_lci(&p)?;
        let pai = analytic_pai(&p)?;
        let mut row = vec![n.to_string()];
        if n <= s.mc_cap {
            let scene = synth_uniform_random(n, s.x0, s.seed ^ n as u64)?;
            let l = monte_carlo_snr(Architecture::Lci, &scene, &params, &mc_config(s))?;
            let q = monte_carlo_snr(Architecture::Pai, &scene, &params, &mc_config(s))?;
            row.extend([snr_db(l.total_snr), se_db(&l)]);
            row.extend([db(to_db(lci.total_exact)), db(to_db(lci.total_lower_bound))]);
            row.extend([snr_db(q.total_snr), se_db(&q)]);
        } else {
            row.extend([String::new(), String::new()]);
            row.extend([db(to_db(lci.total_exact)), db(to_db(lci.total_lower_bound))]);
            row.extend([String::new(), String::new()]);
        }
        row.push(db(to_db(pai.total)));
        rows.push(row);
    }
    let header = [
        "N",
        "snr_lci_mc_db",
        "snr_lci_mc_se",
        "snr_lci_exact_db",
        "snr_lci_bound_db",
        "snr_pai_mc_db",
        "snr_pai_mc_se",
        "snr_pai_analytic_db",
    ];
    write_output(&s.out_dir, "sweep_resolution.csv", csv(&header, &rows).as_bytes())?;
    Ok(())
}

fn ratio_curve(s: &Settings) -> Outcome {
    let n = s.n_list[0];
    let scene = if s.ratio_mc {
        Some(synth_uniform_random(n, s.x0, s.seed)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &b in &s.balance_list {
        let rho = b * (s.x0 / n as f64).sqrt();
        let exact = ratio_lci_pai(&AnalyticParams::new(n, s.x0, rho, rho)?)?.exact_bound;
        let mc = match &scene {
            Some(scene) => {
                let params = NoiseParams {
                    sigma: rho,
                    rho,
                    ..noise_params(s)
                };
                let l = monte_carlo_snr(Architecture::Lci, scene, &params, &mc_config(s))?;
                let q = monte_carlo_snr(Architecture::Pai, scene, &params, &mc_config(s))?;
                match (l.total_snr_linear(), q.total_snr_linear()) {
                    (Some(l), Some(q)) => format!("{:.6}", l / q),
                    _ => String::new(),
                }
            }
            None => String::new(),
        };
        rows.push(vec![
            format!("{b:.4}"),
            format!("{:.6}", ratio_from_noise_balance(b)),
            format!("{exact:.6}"),
            mc,
        ]);
    }
    let header = ["noise_balance", "ratio_approx", "ratio_exact", "ratio_mc"];
    write_output(&s.out_dir, "ratio_curve.csv", csv(&header, &rows).as_bytes())?;
    Ok(())
}

fn pixel_map(s: &Settings) -> Outcome {
    for (name, scene) in scenes(s)? {
        let map = pixel_db_map(&scene)?;
        let rows: Vec<Vec<String>> = map.values.chunks(map.width).map(|r| r.iter().copied().map(db).collect()).collect();
        let mut text = String::new();
        for row in &rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        write_output(&s.out_dir, &format!("{name}_pixel_db.csv"), text.as_bytes())?;

        let mut pgm = Vec::new();
        write_p5_16(&mut pgm, map.width, map.height, &map.to_gray16()).map_err(|e| Failure::Runtime(e.to_string()))?;
        write_output(&s.out_dir, &format!("{name}_pixel_db.pgm"), &pgm)?;

        let max = map.max_db();
        let white = if max > 0.0 { db(max) } else { "none".to_string() };
        let summary = format!(
            "scene={name}\nwidth={}\nheight={}\nmax_db={}\npercent_above_0db={:.4}\nblack_db=0.0000\nwhite_db={white}\n",
            map.width,
            map.height,
            db(max),
            map.percent_above_zero(),
        );
        write_output(&s.out_dir, &format!("{name}_pixel_summary.txt"), summary.as_bytes())?;
        print!("{summary}");
    }
    Ok(())
}

fn percentile_curve(s: &Settings) -> Outcome {
    let mut crossings = Vec::new();
    for (name, scene) in scenes(s)? {
        let curve = sorted_ratio_curve(&scene)?;
        let rows: Vec<Vec<String>> = curve.iter().map(|p| vec![format!("{:.6}", p.percent), db(p.db)]).collect();
        write_output(&s.out_dir, &format!("{name}_percentile.csv"), csv(&["percent", "db"], &rows).as_bytes())?;
        let cross = crossing_percent(&curve);
        println!("{name}: LCI ahead of PAI on {cross:.4}% of pixels");
        crossings.push(vec![name, format!("{cross:.6}")]);
    }
    write_output(
        &s.out_dir,
        "percentile_crossings.csv",
        csv(&["scene", "crossing_percent"], &crossings).as_bytes(),
    )?;
    Ok(())
}

fn run_once(s: &Settings) -> Outcome {
    let (name, scene) = scenes(s)?.remove(0);
    let params = noise_params(s);
    let r = monte_carlo_snr(s.arch, &scene, &params, &mc_config(s))?;
    let n = scene.order();

    let rows: Vec<Vec<String>> = r
        .accounted
        .clone()
        .map(|i| {
            vec![
                i.to_string(),
                format!("{:.6}", scene.values()[i]),
                format!("{:.6}", r.per_pixel_noise_power[i]),
                format!("{:.6}", r.per_pixel_mean_error[i]),
                snr_db(r.per_pixel_snr[i]),
            ]
        })
        .collect();
    let arch = s.arch.label().to_ascii_lowercase();
    let header = ["pixel", "x", "noise_power", "mean_error", "snr_db"];
    write_output(&s.out_dir, &format!("run_once_{arch}.csv"), csv(&header, &rows).as_bytes())?;

    let budget = sensor_time_budget(n, 1.0)?;
    let mut report = String::new();
    let _ = writeln!(report, "architecture: {}", r.architecture);
    let _ = writeln!(report, "scene: {name} (N={n}, X0={:.4})", scene.brightness());
    let _ = writeln!(report, "noise: sigma={} rho={} additive={} gain={}", s.sigma, s.rho, s.additive_kind, s.gain);
    let _ = writeln!(report, "trials: {} seed: {}", r.trials, s.seed);
    let _ = writeln!(report, "pixels counted: {}..{}", r.accounted.start, r.accounted.end);
    let _ = writeln!(report, "signal: {:.4}", r.signal);
    let _ = writeln!(report, "total noise power: {:.4}", r.total_noise_power);
    let _ = writeln!(report, "total snr: {} dB (bootstrap se {} dB)", snr_db(r.total_snr), se_db(&r));
    match (r.analytic_total, r.relative_error()) {
        (Some(a), Some(rel)) => {
            let _ = writeln!(report, "analytic: {} dB, monte carlo: {} dB, relative error {:+.4}%", db(to_db(a)), snr_db(r.total_snr), 100.0 * rel);
        }
        (Some(a), None) => {
            let _ = writeln!(report, "analytic: {} dB, monte carlo: saturated", db(to_db(a)));
        }
        _ => {
            let _ = writeln!(report, "analytic: not defined for this scene");
        }
    }
    if let Some(b) = r.analytic_lower_bound {
        let _ = writeln!(report, "lci lower bound: {} dB", db(to_db(b)));
    }
    let _ = writeln!(
        report,
        "sensor-time budget (unit interval): lci {} sensor x {} = {}, direct {} sensors x {} = {}",
        budget.lci.0,
        budget.lci.1,
        budget.lci_product(),
        budget.pai.0,
        budget.pai.1,
        budget.pai_product()
    );
    write_output(&s.out_dir, &format!("run_once_{arch}.txt"), report.as_bytes())?;
    print!("{report}");
    Ok(())
}
