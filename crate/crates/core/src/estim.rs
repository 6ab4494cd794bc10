//! Eigenvalue-based estimators of the Hurst eigenvalues and of the
//! eigenvector angle, plus the scale-selection rule.
//!
//! All estimators act on one scale `a 2^j` at a time. Since `a` is dyadic,
//! `W(a 2^j)` is the sample wavelet variance at octave `j + log2 a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{self, Matrix, SymMatrix};
use crate::model::WaveletSpectrum;
use crate::wavelet::{OctaveVariance, WaveletVariance};

/// Smallest `ν / (a 2^j)` accepted by [`choose_scale`].
pub const MIN_RATIO: usize = 8;

/// Analysis scale `a 2^j` for a path of `ν` samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalePlan {
    pub nu: usize,
    pub j: u32,
    pub a: u64,
}

impl ScalePlan {
    pub fn new(nu: usize, j: u32, a: u64) -> Result<Self> {
        if a == 0 || !a.is_power_of_two() {
            return Err(Error::InvalidParams(format!("scale factor a = {a} is not a power of two")));
        }
        Ok(ScalePlan { nu, j, a })
    }

    /// Octave holding `W(a 2^j)`.
    pub fn octave(&self) -> u32 {
        self.j + self.a.trailing_zeros()
    }

    pub fn scale(&self) -> f64 {
        self.a as f64 * (self.j as f64).exp2()
    }

    /// Nominal `K_{a,j} = ν / (a 2^j)`.
    pub fn k(&self) -> f64 {
        self.nu as f64 / self.scale()
    }
}

/// Largest dyadic `a` with `ν / (a 2^j) >= 8`, or `a = 1` if none exists.
pub fn choose_scale(nu: usize, j_base: u32) -> ScalePlan {
    let mut a: u64 = 1;
    while (nu as u128) >= (2 * a as u128) << j_base << 3 {
        a *= 2;
    }
    ScalePlan { nu, j: j_base, a }
}

/// Estimates at one scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    pub octave: u32,
    pub scale: f64,
    /// Number of coefficients averaged in `W`.
    pub count: usize,
    /// Ascending eigenvalues of `W`.
    pub eigenvalues: Vec<f64>,
    /// `ĥ_p = log λ_p / (2 log scale)`.
    pub h: Vec<f64>,
    /// Angle estimate (bivariate only, absent when `W_12 = 0`).
    pub theta: Option<f64>,
    /// Unit eigenvectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
}

fn octave_of<'a>(wv: &'a WaveletVariance, octave: u32) -> Result<&'a OctaveVariance> {
    let o = wv.at(octave).ok_or_else(|| Error::InsufficientData {
        reason: format!("the wavelet variance has no octave {octave}"),
        j_max_achievable: wv.j_range().map_or(0, |r| r.1),
    })?;
    if o.count < 2 {
        return Err(Error::InsufficientData {
            reason: format!("octave {octave} has {} coefficients", o.count),
            j_max_achievable: octave.saturating_sub(1),
        });
    }
    Ok(o)
}

/// Eigen-analysis of one sample wavelet variance matrix.
pub fn estimate_from_w(w: &SymMatrix, octave: u32, count: usize) -> Result<ScaleEstimate> {
    if octave == 0 {
        return Err(Error::InvalidParams("the log-scale is zero at octave 0".into()));
    }
    let scale = (octave as f64).exp2();
    let e = matfun::sym_eig_n(w);
    if let Some(&l) = e.values.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::NonPositiveEigenvalue { octave, value: l });
    }
    let log_s = 2.0 * scale.ln();
    let h = e.values.iter().map(|l| l.ln() / log_s).collect();
    let eigenvectors = (0..w.n()).map(|c| e.vectors.col(c)).collect();
    let theta = (w.n() == 2).then(|| theta_from_w(w).ok()).flatten();
    Ok(ScaleEstimate {
        octave,
        scale,
        count,
        eigenvalues: e.values,
        h,
        theta,
        eigenvectors,
    })
}

/// `ĥ_p(a 2^j)` for every `p`.
pub fn estimate_h(wv: &WaveletVariance, plan: &ScalePlan) -> Result<ScaleEstimate> {
    let o = octave_of(wv, plan.octave())?;
    estimate_from_w(&o.w, o.j, o.count)
}

/// `θ̂ = (λ_1 - W_11) / W_12` for a 2x2 matrix.
pub fn theta_from_w(w: &SymMatrix) -> Result<f64> {
    let e = matfun::sym_eig2(w)?;
    let b = w.get(0, 1);
    if b == 0.0 {
        return Err(Error::DegenerateOffDiagonal);
    }
    Ok((e.lambda1 - w.get(0, 0)) / b)
}

/// Angle estimator at scale `a 2^j`.
pub fn estimate_theta(wv: &WaveletVariance, plan: &ScalePlan) -> Result<f64> {
    theta_from_w(&octave_of(wv, plan.octave())?.w)
}

/// `P̂ = [v_1 v_2]` from the eigenvectors of `W(a 2^j)`, valid when `P` is
/// orthogonal. Columns follow the "first nonzero entry positive" convention.
pub fn p_from_w(w: &SymMatrix) -> Result<Matrix> {
    let e = matfun::sym_eig2(w)?;
    Ok(Matrix::from_rows([[e.v1[0], e.v2[0]], [e.v1[1], e.v2[1]]]))
}

pub fn estimate_p_orthogonal(wv: &WaveletVariance, plan: &ScalePlan) -> Result<Matrix> {
    p_from_w(&octave_of(wv, plan.octave())?.w)
}

/// Weighted average of `ĥ` across scales with weights `K log² scale`, the
/// inverse of the leading variance factor. This is a post-processor, not
/// an estimator with known asymptotics.
pub fn weighted_average(estimates: &[ScaleEstimate]) -> Option<Vec<f64>> {
    let n = estimates.first()?.h.len();
    let mut acc = vec![0.0; n];
    let mut total = 0.0;
    for e in estimates {
        let w = e.count as f64 * e.scale.ln().powi(2);
        total += w;
        for (a, h) in acc.iter_mut().zip(&e.h) {
            *a += w * h;
        }
    }
    (total > 0.0).then(|| acc.into_iter().map(|a| a / total).collect())
}

/// `ĥ_p - h_p^E(scale)` using the analytic spectrum.
pub fn centered(est: &ScaleEstimate, spectrum: &WaveletSpectrum) -> Result<Vec<f64>> {
    let centers = spectrum.eigen_h_at(est.scale)?;
    Ok(est.h.iter().zip(&centers).map(|(h, c)| h - c).collect())
}

/// Per-octave outcome of [`estimate_all`]; exactly one of the two fields is set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleOutcome {
    pub octave: u32,
    pub estimate: Option<ScaleEstimate>,
    pub error: Option<String>,
    /// `ĥ_p - h_p^E`, when a model was supplied.
    pub centered: Option<Vec<f64>>,
}

/// Estimates at every octave of `wv`; failures are recorded, not propagated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimates {
    pub n: usize,
    pub scales: Vec<ScaleOutcome>,
}

impl EigenEstimates {
    pub fn at(&self, octave: u32) -> Option<&ScaleEstimate> {
        self.scales.iter().find(|s| s.octave == octave)?.estimate.as_ref()
    }

    pub fn successes(&self) -> Vec<ScaleEstimate> {
        self.scales.iter().filter_map(|s| s.estimate.clone()).collect()
    }
}

pub fn estimate_all(wv: &WaveletVariance, spectrum: Option<&WaveletSpectrum>) -> EigenEstimates {
    let scales = wv
        .octaves
        .iter()
        .map(|o| match estimate_from_w(&o.w, o.j, o.count) {
            Ok(e) => {
                let c = spectrum.and_then(|s| centered(&e, s).ok());
                ScaleOutcome {
                    octave: o.j,
                    estimate: Some(e),
                    error: None,
                    centered: c,
                }
            }
            Err(err) => ScaleOutcome {
                octave: o.j,
                estimate: None,
                error: Some(format!("{}: {err}", err.kind())),
                centered: None,
            },
        })
        .collect();
    EigenEstimates { n: wv.n, scales }
}
