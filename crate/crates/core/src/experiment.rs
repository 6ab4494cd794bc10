//! Experiment presets, configuration files and the seeded Monte Carlo
//! harness behind the `montecarlo` and `reproduce` commands.

use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymvar;
use crate::error::{Error, Result};
use crate::estim::{self, ScaleEstimate};
use crate::matfun::{Matrix, SymMatrix};
use crate::model::{HurstSpec, OfbmParams, ParamsFile, WaveletSpectrum, DEFAULT_RESOLUTION};
use crate::stats;
use crate::synth::{replicate_seed, OfgnGenerator};
use crate::wavelet::{
    cascade_psi, daubechies_filters, max_octave, octave_counts, pyramid, wavelet_variance, FilterPair, Variant,
    WaveletVariance,
};

/// Correlation of the source covariance `M = P^{-1} Σ P^{-T}` in the bivariate presets.
pub const PRESET_RHO: f64 = 0.5;

/// Source covariance whose octave-0 wavelet spectrum `B(1)` has unit diagonal
/// under the default analysis wavelet, so `log2 λ_p(2^j) / 2j` carries no
/// constant offset. `rho` is the correlation of the returned source matrix.
pub fn unit_source(h: &[f64], rho: f64) -> SymMatrix {
    static TABLE: OnceLock<crate::wavelet::PsiTable> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let f = daubechies_filters(2, Variant::LeastAsymmetric).expect("default filters");
        cascade_psi(&f, DEFAULT_RESOLUTION).expect("default cascade")
    });
    let n = h.len();
    let hs = HurstSpec::new(Matrix::identity(n), h.to_vec()).expect("diagonal exponents");
    let unit = OfbmParams::from_source(hs, SymMatrix::identity(n)).expect("identity source");
    let b1 = WaveletSpectrum::new(&unit, table).expect("default spectrum").b(0);
    let d: Vec<f64> = (0..n).map(|a| 1.0 / b1.get(a, a).sqrt()).collect();
    let mut m = SymMatrix::identity(n);
    for a in 0..n {
        for b in a..n {
            let c = if a == b { 1.0 } else { rho };
            m.set(a, b, c * d[a] * d[b]);
        }
    }
    m
}

/// Mixing matrix `[[1/√(1+γ²), β/√(1+β²)], [γ/√(1+γ²), 1/√(1+β²)]]`.
pub fn mixing(gamma: f64, beta: f64) -> Matrix {
    let g = (1.0 + gamma * gamma).sqrt();
    let b = (1.0 + beta * beta).sqrt();
    Matrix::from_rows([[1.0 / g, beta / b], [gamma / g, 1.0 / b]])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    N4,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            "n4" => Ok(Preset::N4),
            other => Err(Error::InvalidParams(format!(
                "unknown preset {other:?} (expected fig1..fig5 or n4)"
            ))),
        }
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::N4 => "n4",
        };
        f.write_str(s)
    }
}

impl Preset {
    pub const ALL: [Preset; 6] = [Preset::Fig1, Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::N4];

    pub fn params(self) -> OfbmParams {
        let beta30 = 1.0 / 3f64.sqrt();
        let (p, h) = match self {
            Preset::Fig1 => (Matrix::from_rows([[0.98, 0.57], [0.20, 0.82]]), vec![0.25, 0.85]),
            Preset::Fig2 => (mixing(0.2, 0.7), vec![0.25, 0.85]),
            Preset::Fig3 | Preset::Fig5 => (mixing(-beta30, beta30), vec![0.25, 0.85]),
            Preset::Fig4 => (mixing(0.0, 0.2), vec![0.25, 0.85]),
            Preset::N4 => (
                Matrix::from_rows([
                    [0.90, -0.22, -0.30, -0.22],
                    [0.43, 0.45, 0.63, 0.46],
                    [0.0, -0.85, 0.40, 0.30],
                    [0.0, 0.0, -0.59, 0.81],
                ]),
                vec![0.2, 0.4, 0.7, 0.9],
            ),
        };
        let rho = if h.len() == 2 { PRESET_RHO } else { 0.0 };
        let m = unit_source(&h, rho);
        let hs = HurstSpec::with_normalized_columns(p, h).expect("preset mixing matrices are valid");
        OfbmParams::from_source(hs, m).expect("preset covariances are positive definite")
    }

    pub fn config(self) -> ExperimentConfig {
        let params = ParamsFile::from_params(&self.params());
        let (len, replicates, j_max) = match self {
            Preset::Fig1 => (1 << 16, 1, Some(12)),
            Preset::N4 => (1 << 15, 200, None),
            _ => (1 << 14, 500, None),
        };
        ExperimentConfig {
            preset: Some(self.to_string()),
            n: params.n,
            p: params.p,
            h: params.h,
            sigma: params.sigma,
            len,
            replicates,
            seed: 1,
            n_psi: 2,
            variant: Variant::LeastAsymmetric,
            j_min: 3,
            j_max,
            qq_octave: None,
            resolution: DEFAULT_RESOLUTION,
            out_dir: format!("out/{self}"),
        }
    }
}

/// One experiment, stored as flat `key = value` TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub n: usize,
    /// Mixing matrix, row-major.
    pub p: Vec<f64>,
    pub h: Vec<f64>,
    /// Upper triangle of `Σ = E B(1) B(1)^T`.
    pub sigma: Vec<f64>,
    /// Number of increments `N`; the levels path has `N + 1` samples.
    pub len: usize,
    pub replicates: usize,
    pub seed: u64,
    pub n_psi: usize,
    pub variant: Variant,
    pub j_min: u32,
    /// Defaults to the largest octave with at least 8 coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_max: Option<u32>,
    /// Defaults to the coarsest octave with at least 32 coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qq_octave: Option<u32>,
    pub resolution: u32,
    pub out_dir: String,
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    pub fn params_file(&self) -> ParamsFile {
        ParamsFile {
            n: self.n,
            p: self.p.clone(),
            h: self.h.clone(),
            sigma: self.sigma.clone(),
        }
    }

    pub fn params(&self) -> Result<OfbmParams> {
        self.params_file().to_params()
    }

    pub fn filters(&self) -> Result<FilterPair> {
        daubechies_filters(self.n_psi, self.variant)
    }

    /// Number of samples in the analyzed levels path.
    pub fn samples(&self) -> usize {
        self.len + 1
    }

    pub fn octave_range(&self) -> Result<(u32, u32)> {
        let taps = 2 * self.n_psi;
        let achievable = max_octave(self.samples(), self.n_psi);
        let counts = octave_counts(self.samples(), taps, achievable);
        let auto = counts.iter().rposition(|&k| k >= 8).map_or(0, |i| i as u32 + 1);
        let j_max = self.j_max.unwrap_or(auto);
        if self.j_min == 0 || j_max < self.j_min || j_max > achievable {
            return Err(Error::InvalidParams(format!(
                "octave range [{}, {j_max}] is not available with {} samples (largest octave {achievable})",
                self.j_min,
                self.samples()
            )));
        }
        Ok((self.j_min, j_max))
    }

    pub fn counts(&self, j_max: u32) -> Vec<usize> {
        octave_counts(self.samples(), 2 * self.n_psi, j_max)
    }

    pub fn default_qq_octave(&self) -> Result<u32> {
        if let Some(j) = self.qq_octave {
            return Ok(j);
        }
        let (lo, hi) = self.octave_range()?;
        let counts = self.counts(hi);
        (lo..=hi)
            .rev()
            .find(|&j| counts[j as usize - 1] >= 32)
            .ok_or_else(|| Error::InvalidParams("no octave has 32 coefficients".into()))
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.filters()?;
        self.octave_range()?;
        if self.replicates == 0 {
            return Err(Error::InvalidParams("replicates must be positive".into()));
        }
        Ok(())
    }
}

/// Wavelet variance of one synthesized levels path.
pub fn analyze_replicate(gen: &OfgnGenerator, filters: &FilterPair, seed: u64, range: (u32, u32)) -> Result<WaveletVariance> {
    let path = gen.generate_levels(seed);
    let c = pyramid(&path, filters, range.1)?;
    wavelet_variance(&c, range.0, range.1)
}

/// Estimates of one replicate at one octave.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowEstimate {
    pub octave: u32,
    pub h: Option<Vec<f64>>,
    pub theta: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub seed: u64,
    pub estimates: Vec<RowEstimate>,
    pub error: Option<String>,
}

/// Analytic centers and predicted variances at one octave.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OctaveTheory {
    pub octave: u32,
    pub count: usize,
    pub center_h: Vec<f64>,
    pub center_theta: Option<f64>,
    /// Diagonal of `Σ_{h1,h2}` (bivariate).
    pub var_h: Option<Vec<f64>>,
    pub var_theta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OctaveAggregate {
    pub octave: u32,
    pub count: usize,
    /// Replicates with a valid estimate at this octave.
    pub ok: usize,
    pub mean_h: Vec<f64>,
    pub sd_h: Vec<f64>,
    pub mean_theta: Option<f64>,
    pub sd_theta: Option<f64>,
    /// Sample variance of `2 log(2^j) √K (ĥ_p - h_p^E)`.
    pub var_std_h: Vec<f64>,
    /// Sample variance of `√K (θ̂ - θ(2^j))`.
    pub var_std_theta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QqSeries {
    pub label: String,
    pub scores: Vec<f64>,
    pub sorted: Vec<f64>,
    pub correlation: f64,
    pub jarque_bera: f64,
    pub jb_pvalue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QqData {
    pub octave: u32,
    pub series: Vec<QqSeries>,
}

/// Runtime metadata, excluded from determinism checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub runtime_secs: f64,
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub replicates: Vec<ReplicateRow>,
    pub theory: Vec<OctaveTheory>,
    pub aggregates: Vec<OctaveAggregate>,
    pub qq: Option<QqData>,
    pub failures: usize,
    pub meta: RunMeta,
}

impl RunReport {
    pub fn aggregate(&self, octave: u32) -> Option<&OctaveAggregate> {
        self.aggregates.iter().find(|a| a.octave == octave)
    }

    pub fn theory(&self, octave: u32) -> Option<&OctaveTheory> {
        self.theory.iter().find(|a| a.octave == octave)
    }

    /// JSON without the runtime metadata.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("meta");
        serde_json::to_string(&v).expect("value serializes")
    }
}

/// Centers and, for `n = 2`, predicted variances at every octave.
pub fn theory(spectrum: &WaveletSpectrum, octaves: &[u32], counts: &[usize]) -> Result<Vec<OctaveTheory>> {
    let bivariate = spectrum.params().n() == 2;
    octaves
        .par_iter()
        .map(|&j| {
            let center_h = spectrum.eigen_h_at((j as f64).exp2())?;
            let (center_theta, var_h, var_theta) = if bivariate {
                let c = asymvar::asym_cov(spectrum, &[j])?;
                let (v1, v2) = c.sigma_h_diag(0).expect("bivariate");
                let th = spectrum.theoretical_eigen_h(j, 1).ok().map(|e| e.theta);
                (th, Some(vec![v1, v2]), c.sigma_theta[0])
            } else {
                (None, None, None)
            };
            Ok(OctaveTheory {
                octave: j,
                count: counts[j as usize - 1],
                center_h,
                center_theta,
                var_h,
                var_theta,
            })
        })
        .collect()
}

fn row_from(rep: usize, seed: u64, wv: Result<WaveletVariance>) -> ReplicateRow {
    match wv {
        Ok(wv) => {
            let est = estim::estimate_all(&wv, None);
            let estimates = est
                .scales
                .into_iter()
                .map(|s| RowEstimate {
                    octave: s.octave,
                    h: s.estimate.as_ref().map(|e: &ScaleEstimate| e.h.clone()),
                    theta: s.estimate.as_ref().and_then(|e| e.theta),
                    error: s.error,
                })
                .collect();
            ReplicateRow {
                replicate: rep,
                seed,
                estimates,
                error: None,
            }
        }
        Err(e) => ReplicateRow {
            replicate: rep,
            seed,
            estimates: Vec::new(),
            error: Some(format!("{}: {e}", e.kind())),
        },
    }
}

/// Aggregates recomputed from per-replicate rows, in replicate order.
pub fn aggregate(rows: &[ReplicateRow], theory: &[OctaveTheory], n: usize) -> Vec<OctaveAggregate> {
    theory
        .iter()
        .map(|t| {
            let j = t.octave;
            let hs: Vec<&Vec<f64>> = rows
                .iter()
                .filter_map(|r| r.estimates.iter().find(|e| e.octave == j)?.h.as_ref())
                .collect();
            let thetas: Vec<f64> = rows
                .iter()
                .filter_map(|r| r.estimates.iter().find(|e| e.octave == j)?.theta)
                .collect();
            let comp = |p: usize| hs.iter().map(|h| h[p]).collect::<Vec<f64>>();
            let rate = 2.0 * (j as f64).exp2().ln() * (t.count as f64).sqrt();
            let var_std_h = (0..n)
                .map(|p| {
                    let x: Vec<f64> = comp(p).iter().map(|h| rate * (h - t.center_h[p])).collect();
                    stats::variance(&x)
                })
                .collect();
            let var_std_theta = t.center_theta.filter(|_| !thetas.is_empty()).map(|c| {
                let x: Vec<f64> = thetas.iter().map(|th| (t.count as f64).sqrt() * (th - c)).collect();
                stats::variance(&x)
            });
            OctaveAggregate {
                octave: j,
                count: t.count,
                ok: hs.len(),
                mean_h: (0..n).map(|p| stats::mean(&comp(p))).collect(),
                sd_h: (0..n).map(|p| stats::variance(&comp(p)).sqrt()).collect(),
                mean_theta: (!thetas.is_empty()).then(|| stats::mean(&thetas)),
                sd_theta: (!thetas.is_empty()).then(|| stats::variance(&thetas).sqrt()),
                var_std_h,
                var_std_theta,
            }
        })
        .collect()
}

fn qq_series(label: &str, x: &[f64]) -> QqSeries {
    let (scores, sorted, r) = stats::qq(x);
    let (jb, p) = stats::jarque_bera(x);
    QqSeries {
        label: label.to_string(),
        scores,
        sorted,
        correlation: r,
        jarque_bera: jb,
        jb_pvalue: p,
    }
}

/// Standardized `ĥ_n` and `θ̂` at one octave; by the predicted standard
/// deviation when available, by the sample one otherwise.
pub fn qq_data(rows: &[ReplicateRow], t: &OctaveTheory, n: usize) -> Option<QqData> {
    let j = t.octave;
    let last: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.estimates.iter().find(|e| e.octave == j)?.h.as_ref().map(|h| h[n - 1]))
        .collect();
    if last.len() < 3 {
        return None;
    }
    let k = t.count as f64;
    let rate = 2.0 * (j as f64).exp2().ln() * k.sqrt();
    let standardize = |x: &[f64], center: f64, scale: f64, pred: Option<f64>| -> Vec<f64> {
        match pred {
            Some(v) if v > 0.0 => x.iter().map(|a| scale * (a - center) / v.sqrt()).collect(),
            _ => {
                let (m, s) = (stats::mean(x), stats::variance(x).sqrt());
                x.iter().map(|a| (a - m) / s).collect()
            }
        }
    };
    let pred_h = t.var_h.as_ref().map(|v| v[n - 1]);
    let mut series = vec![qq_series(&format!("h{n}"), &standardize(&last, t.center_h[n - 1], rate, pred_h))];
    let thetas: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.estimates.iter().find(|e| e.octave == j)?.theta)
        .collect();
    if let (Some(c), true) = (t.center_theta, thetas.len() >= 3) {
        series.push(qq_series("theta", &standardize(&thetas, c, k.sqrt(), t.var_theta)));
    }
    Some(QqData { octave: j, series })
}

/// Runs `config.replicates` independent replicates in parallel; replicate `r`
/// uses seed `seed ^ r` and results are assembled in replicate order.
pub fn run_montecarlo(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    config.validate()?;
    let params = config.params()?;
    let filters = config.filters()?;
    let (j_min, j_max) = config.octave_range()?;
    let generator = OfgnGenerator::new(&params, config.len)?;
    let rows: Vec<ReplicateRow> = (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(config.seed, r as u64);
            row_from(r, seed, analyze_replicate(&generator, &filters, seed, (j_min, j_max)))
        })
        .collect();
    let table = cascade_psi(&filters, config.resolution)?;
    let spectrum = WaveletSpectrum::new(&params, &table)?;
    let octaves: Vec<u32> = (j_min..=j_max).collect();
    let theory = theory(&spectrum, &octaves, &config.counts(j_max))?;
    let aggregates = aggregate(&rows, &theory, params.n());
    let qq = match config.default_qq_octave() {
        Ok(j) => theory.iter().find(|t| t.octave == j).and_then(|t| qq_data(&rows, t, params.n())),
        Err(_) => None,
    };
    let failures = rows
        .iter()
        .map(|r| usize::from(r.error.is_some()) + r.estimates.iter().filter(|e| e.error.is_some()).count())
        .sum();
    Ok(RunReport {
        config: config.clone(),
        replicates: rows,
        theory,
        aggregates,
        qq,
        failures,
        meta: RunMeta {
            runtime_secs: start.elapsed().as_secs_f64(),
            threads: rayon::current_num_threads(),
        },
    })
}

/// Log-scale diagram of one path: eigenvalue and entrywise curves with
/// their least-squares slopes over the analyzed octaves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogScaleDiagram {
    pub octaves: Vec<u32>,
    /// `log2 λ_p(2^j)`, one vector per `p`.
    pub log2_eigen: Vec<Vec<f64>>,
    /// `log2 |W_ab(2^j)|` in `vec_sym` order.
    pub log2_entries: Vec<Vec<f64>>,
    pub eigen_slopes: Vec<f64>,
    pub entry_slopes: Vec<f64>,
}

pub fn log_scale_diagram(wv: &WaveletVariance) -> Result<LogScaleDiagram> {
    let n = wv.n;
    let octaves: Vec<u32> = wv.octaves.iter().map(|o| o.j).collect();
    let mut log2_eigen = vec![Vec::new(); n];
    let d = n * (n + 1) / 2;
    let mut log2_entries = vec![Vec::new(); d];
    for o in &wv.octaves {
        let e = crate::matfun::sym_eig_n(&o.w);
        for (p, &l) in e.values.iter().enumerate() {
            if !(l > 0.0) {
                return Err(Error::NonPositiveEigenvalue { octave: o.j, value: l });
            }
            log2_eigen[p].push(l.log2());
        }
        for (s, v) in o.w.upper().iter().enumerate() {
            log2_entries[s].push(v.abs().log2());
        }
    }
    let x: Vec<f64> = octaves.iter().map(|&j| j as f64).collect();
    let eigen_slopes = log2_eigen.iter().map(|y| stats::slope(&x, y)).collect();
    let entry_slopes = log2_entries.iter().map(|y| stats::slope(&x, y)).collect();
    Ok(LogScaleDiagram {
        octaves,
        log2_eigen,
        log2_entries,
        eigen_slopes,
        entry_slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_expand_to_the_stated_parameters() {
        let p = Preset::Fig4.params();
        let m = p.hurst().p();
        assert_eq!(m.get(1, 0), 0.0);
        assert!((m.get(0, 1) - 0.2 / 1.04f64.sqrt()).abs() < 1e-15);
        let p3 = Preset::Fig3.params();
        // β/√(1+β²) = sin(π/6)
        assert!((p3.hurst().p().get(0, 1) - 0.5).abs() < 1e-15);
        assert!((p3.hurst().p().get(1, 0) + 0.5).abs() < 1e-15);
        assert_eq!(Preset::N4.params().hurst().h(), &[0.2, 0.4, 0.7, 0.9]);
        for pr in Preset::ALL {
            let s = pr.to_string();
            assert_eq!(s.parse::<Preset>().unwrap(), pr);
            pr.config().validate().unwrap();
        }
    }

    #[test]
    fn config_round_trips_through_toml() {
        for pr in Preset::ALL {
            let c = pr.config();
            let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
            assert_eq!(back, c);
        }
        let text = Preset::Fig2.config().to_toml();
        assert!(text.contains("variant = \"least-asymmetric\""));
        assert!(matches!(ExperimentConfig::from_toml("len = \"x\""), Err(Error::Parse(_))));
    }

    #[test]
    fn octave_range_defaults() {
        let c = Preset::Fig2.config();
        let (lo, hi) = c.octave_range().unwrap();
        assert_eq!(lo, 3);
        let counts = c.counts(hi);
        assert!(counts[hi as usize - 1] >= 8);
        assert_eq!(c.default_qq_octave().unwrap(), 8);
    }

    fn small(replicates: usize) -> ExperimentConfig {
        let mut c = Preset::Fig2.config();
        c.len = 1 << 10;
        c.replicates = replicates;
        c.j_min = 2;
        c
    }

    #[test]
    fn report_is_deterministic_and_self_consistent() {
        let c = small(6);
        let a = run_montecarlo(&c).unwrap();
        let b = run_montecarlo(&c).unwrap();
        assert_eq!(a.deterministic_json(), b.deterministic_json());
        assert_eq!(a.replicates.len(), 6);
        let again = aggregate(&a.replicates, &a.theory, 2);
        for (x, y) in again.iter().zip(&a.aggregates) {
            for p in 0..2 {
                assert!((x.mean_h[p] - y.mean_h[p]).abs() <= 1e-12);
                assert!((x.sd_h[p] - y.sd_h[p]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn single_replicate_matches_direct_estimation() {
        let c = small(1);
        let rep = run_montecarlo(&c).unwrap();
        let params = c.params().unwrap();
        let gen = OfgnGenerator::new(&params, c.len).unwrap();
        let range = c.octave_range().unwrap();
        let wv = analyze_replicate(&gen, &c.filters().unwrap(), replicate_seed(c.seed, 0), range).unwrap();
        let direct = estim::estimate_all(&wv, None);
        for e in &rep.replicates[0].estimates {
            assert_eq!(e.h.as_ref(), direct.at(e.octave).map(|d| &d.h));
        }
    }

    #[test]
    fn log_scale_diagram_slopes_of_a_power_law() {
        let octaves = (3..=8)
            .map(|j| {
                let s = (j as f64).exp2();
                crate::wavelet::OctaveVariance {
                    j,
                    count: 10,
                    w: SymMatrix::from_upper(2, vec![s.powf(0.5), 0.0, s.powf(1.7)]).unwrap(),
                }
            })
            .collect();
        let d = log_scale_diagram(&WaveletVariance { n: 2, octaves }).unwrap();
        assert!((d.eigen_slopes[0] - 0.5).abs() < 1e-12 && (d.eigen_slopes[1] - 1.7).abs() < 1e-12);
    }
}
