use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ofbm::estim::estimate_all;
use ofbm::experiment::{log_scale_diagram, run_montecarlo, ExperimentConfig, Preset};
use ofbm::io::{read_path, write_coeffs_csv, write_json, write_path, WaveletVarianceRecord};
use ofbm::model::{ParamsFile, WaveletSpectrum};
use ofbm::synth::{ofgn_to_ofbm, OfgnGenerator, PathKind, SamplePath};
use ofbm::wavelet::{cascade_psi, daubechies_filters, default_octave_range, pyramid, wavelet_variance, Variant};
use ofbm::{asymvar, Error, Result};
use serde_json::json;

mod figures;

#[derive(Parser)]
#[command(name = "ofbm", version, about = "Operator fractional Brownian motion: synthesis, wavelet analysis and estimation")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Source {
    /// Experiment file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in parameter set: fig1..fig5 or n4.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (default: the config's `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
}

#[derive(Args, Clone)]
struct Analysis {
    /// Experiment file supplying the wavelet and octave range.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Vanishing moments of the Daubechies wavelet.
    #[arg(long, default_value_t = 2)]
    n_psi: usize,
    #[arg(long)]
    j_min: Option<u32>,
    #[arg(long)]
    j_max: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one sample path by circulant embedding.
    Synth {
        #[command(flatten)]
        src: Source,
        /// Write raw little-endian f64 instead of CSV.
        #[arg(long)]
        binary: bool,
        /// Write the increments (OFGN) instead of the levels path.
        #[arg(long)]
        increments: bool,
    },
    /// Wavelet variance and the entrywise log2 W baseline of a path file.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        an: Analysis,
        /// Also dump the detail coefficients.
        #[arg(long)]
        coeffs: bool,
    },
    /// Eigenvalue-based estimates of the Hurst eigenvalues at every octave.
    Estimate {
        path: PathBuf,
        #[command(flatten)]
        an: Analysis,
    },
    /// Asymptotic covariances of the wavelet variance and the estimators.
    Asymvar {
        #[command(flatten)]
        src: Source,
        /// Comma-separated octaves (default: the config's octave range).
        #[arg(long, value_delimiter = ',')]
        octaves: Option<Vec<u32>>,
    },
    /// Seeded Monte Carlo study with tables and SVG panels.
    Montecarlo {
        #[command(flatten)]
        src: Source,
    },
    /// Regenerate the tables and panels of one figure preset.
    Reproduce {
        #[command(flatten)]
        src: Source,
    },
    /// Print the experiment file of a preset.
    Config {
        #[arg(long, default_value = "fig2")]
        preset: String,
    },
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_toml(&text)
}

impl Source {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match (&self.config, &self.preset) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParams("--config and --preset are mutually exclusive".into()));
            }
            (Some(path), None) => load_config(path)?,
            (None, Some(name)) => name.parse::<Preset>()?.config(),
            (None, None) => Preset::Fig2.config(),
        };
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(r) = self.replicates {
            c.replicates = r;
        }
        c.validate()?;
        Ok(c)
    }

    fn out_dir(&self, c: &ExperimentConfig) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from(&c.out_dir));
        fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }
}

impl Analysis {
    fn settings(&self) -> Result<(usize, Variant, Option<u32>, Option<u32>)> {
        match &self.config {
            Some(p) => {
                let c = load_config(p)?;
                Ok((c.n_psi, c.variant, self.j_min.or(Some(c.j_min)), self.j_max.or(c.j_max)))
            }
            None => Ok((self.n_psi, Variant::LeastAsymmetric, self.j_min, self.j_max)),
        }
    }

    fn out_dir(&self, input: &Path) -> Result<PathBuf> {
        let dir = self
            .out
            .clone()
            .unwrap_or_else(|| input.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf));
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

fn levels(path: SamplePath) -> Result<SamplePath> {
    match path.kind {
        PathKind::Levels => Ok(path),
        PathKind::Increments => ofgn_to_ofbm(&path),
    }
}

struct Analyzed {
    wv: ofbm::wavelet::WaveletVariance,
    params: Option<ParamsFile>,
    variant: Variant,
    n_psi: usize,
}

fn analyze_file(file: &Path, an: &Analysis, coeffs_out: Option<&Path>) -> Result<Analyzed> {
    let (path, meta) = read_path(file)?;
    let path = levels(path)?;
    let (n_psi, variant, j_min, j_max) = an.settings()?;
    let filters = daubechies_filters(n_psi, variant)?;
    let achievable = ofbm::wavelet::max_octave(path.len, n_psi);
    let c = pyramid(&path, &filters, j_max.unwrap_or(achievable).min(achievable))?;
    if let Some(out) = coeffs_out {
        write_coeffs_csv(out, &c)?;
    }
    let (lo, hi) = match (j_min, j_max) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            let (dlo, dhi) = default_octave_range(&c).ok_or_else(|| Error::InsufficientData {
                reason: "no octave in [3, J] has 8 coefficients".into(),
                j_max_achievable: achievable,
            })?;
            (j_min.unwrap_or(dlo), j_max.unwrap_or(dhi))
        }
    };
    let wv = wavelet_variance(&c, lo, hi)?;
    Ok(Analyzed {
        wv,
        params: meta.and_then(|m| m.params),
        variant,
        n_psi,
    })
}

fn cmd_synth(src: &Source, binary: bool, increments: bool) -> Result<serde_json::Value> {
    let c = src.resolve()?;
    let dir = src.out_dir(&c)?;
    let params = c.params()?;
    let gen = OfgnGenerator::new(&params, c.len)?;
    let path = if increments {
        gen.generate(c.seed)
    } else {
        gen.generate_levels(c.seed)
    };
    let file = dir.join(if binary { "path.bin" } else { "path.csv" });
    write_path(&file, &path, Some(&c.params_file()))?;
    Ok(json!({
        "file": file,
        "rows": path.len,
        "n": path.n,
        "seed": c.seed,
        "kind": path.kind,
        "embedding_size": gen.embedding_size(),
        "min_embedding_eigenvalue": gen.min_eigenvalue,
    }))
}

fn cmd_analyze(file: &Path, an: &Analysis, coeffs: bool) -> Result<serde_json::Value> {
    let dir = an.out_dir(file)?;
    let coeff_file = dir.join("coeffs.csv");
    let a = analyze_file(file, an, coeffs.then_some(coeff_file.as_path()))?;
    let d = log_scale_diagram(&a.wv)?;
    write_json(&dir.join("wavelet_variance.json"), &WaveletVarianceRecord::from(&a.wv))?;
    figures::write_log_scale_csv(&dir.join("logscale.csv"), &a.wv, &d)?;
    Ok(json!({
        "octaves": d.octaves,
        "counts": a.wv.octaves.iter().map(|o| o.count).collect::<Vec<_>>(),
        "entry_slopes": d.entry_slopes,
        "entry_slope_over_2": d.entry_slopes.iter().map(|s| s / 2.0).collect::<Vec<_>>(),
        "eigen_slopes": d.eigen_slopes,
        "wavelet_variance": dir.join("wavelet_variance.json"),
    }))
}

fn cmd_estimate(file: &Path, an: &Analysis) -> Result<serde_json::Value> {
    let dir = an.out_dir(file)?;
    let a = analyze_file(file, an, None)?;
    let spectrum = match &a.params {
        Some(p) => {
            let table = cascade_psi(&daubechies_filters(a.n_psi, a.variant)?, ofbm::model::DEFAULT_RESOLUTION)?;
            Some(WaveletSpectrum::new(&p.to_params()?, &table)?)
        }
        None => None,
    };
    let est = estimate_all(&a.wv, spectrum.as_ref());
    write_json(&dir.join("estimates.json"), &est)?;
    emit(&figures::estimate_table(&est));
    Ok(serde_json::Value::Null)
}

fn cmd_asymvar(src: &Source, octaves: Option<&[u32]>) -> Result<serde_json::Value> {
    let c = src.resolve()?;
    let dir = src.out_dir(&c)?;
    let js: Vec<u32> = match octaves {
        Some(o) if !o.is_empty() => o.to_vec(),
        _ => {
            let (lo, hi) = c.octave_range()?;
            (lo..=hi).collect()
        }
    };
    let table = cascade_psi(&c.filters()?, c.resolution)?;
    let spec = WaveletSpectrum::new(&c.params()?, &table)?;
    let cov = asymvar::asym_cov(&spec, &js)?;
    write_json(&dir.join("asymvar.json"), &cov)?;
    let diag: Vec<serde_json::Value> = js
        .iter()
        .enumerate()
        .map(|(a, &j)| {
            json!({
                "octave": j,
                "var_h": cov.sigma_h_diag(a),
                "var_theta": cov.sigma_theta[a],
            })
        })
        .collect();
    Ok(json!({ "report": dir.join("asymvar.json"), "octaves": diag }))
}

fn cmd_montecarlo(src: &Source) -> Result<serde_json::Value> {
    let c = src.resolve()?;
    let dir = src.out_dir(&c)?;
    let report = run_montecarlo(&c)?;
    figures::write_montecarlo(&dir, &report)
}

fn cmd_reproduce(src: &Source) -> Result<serde_json::Value> {
    let name = src
        .preset
        .as_deref()
        .ok_or_else(|| Error::InvalidParams("reproduce needs --preset".into()))?;
    let preset: Preset = name.parse()?;
    let c = src.resolve()?;
    let dir = src.out_dir(&c)?;
    figures::reproduce(preset, &c, &dir)
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Synth { src, binary, increments } => cmd_synth(src, *binary, *increments),
        Command::Analyze { path, an, coeffs } => cmd_analyze(path, an, *coeffs),
        Command::Estimate { path, an } => cmd_estimate(path, an),
        Command::Asymvar { src, octaves } => cmd_asymvar(src, octaves.as_deref()),
        Command::Montecarlo { src } => cmd_montecarlo(src),
        Command::Reproduce { src } => cmd_reproduce(src),
        Command::Config { preset } => {
            emit(&preset.parse::<Preset>()?.config().to_toml());
            Ok(serde_json::Value::Null)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(serde_json::Value::Null) => ExitCode::SUCCESS,
        Ok(v) => {
            emit(&(serde_json::to_string_pretty(&v).expect("summary serializes") + "\n"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = json!({ "kind": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
