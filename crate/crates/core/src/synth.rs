//! Exact synthesis of operator fractional Gaussian noise by multivariate
//! circulant embedding, and its cumulative sum.
//!
//! Random numbers come from `ChaCha8Rng` seeded with `seed_from_u64`.
//! Replicate `r` of a study seeded with `s` uses seed `s ^ r`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{self, SymMatrix};
use crate::model::OfbmParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Increments,
    Levels,
}

/// `len x n` samples stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath {
    pub n: usize,
    pub len: usize,
    pub values: Vec<f64>,
    pub seed: u64,
    pub kind: PathKind,
}

impl SamplePath {
    pub fn new(n: usize, values: Vec<f64>, seed: u64, kind: PathKind) -> Result<Self> {
        if n == 0 || values.len() % n != 0 {
            return Err(Error::Shape(format!(
                "{} values do not form rows of dimension {n}",
                values.len()
            )));
        }
        Ok(SamplePath {
            n,
            len: values.len() / n,
            values,
            seed,
            kind,
        })
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        (0..self.len).map(|k| self.values[k * self.n + c]).collect()
    }
}

/// Cumulative sum with a leading zero row: `B(0) = 0`, `B(k) = Σ_{t<k} W_t`.
/// The output has one more row than the input.
pub fn ofgn_to_ofbm(inc: &SamplePath) -> Result<SamplePath> {
    if inc.kind != PathKind::Increments {
        return Err(Error::Kind {
            expected: "increments",
        });
    }
    let n = inc.n;
    let mut out = vec![0.0; (inc.len + 1) * n];
    for k in 0..inc.len {
        for c in 0..n {
            out[(k + 1) * n + c] = out[k * n + c] + inc.values[k * n + c];
        }
    }
    SamplePath::new(n, out, inc.seed, PathKind::Levels)
}

/// Inverse of [`ofgn_to_ofbm`].
pub fn ofbm_to_ofgn(levels: &SamplePath) -> Result<SamplePath> {
    if levels.kind != PathKind::Levels {
        return Err(Error::Kind { expected: "levels" });
    }
    let n = levels.n;
    let vals = (1..levels.len)
        .flat_map(|k| (0..n).map(move |c| (k, c)))
        .map(|(k, c)| levels.values[k * n + c] - levels.values[(k - 1) * n + c])
        .collect();
    SamplePath::new(n, vals, levels.seed, PathKind::Increments)
}

/// Reusable sampler for a fixed model and length: the per-frequency square
/// roots of the embedding are computed once.
pub struct OfgnGenerator {
    n: usize,
    len: usize,
    embed: usize,
    /// Row-major `n x n` square root per frequency.
    roots: Vec<f64>,
    ifft: Arc<dyn Fft<f64>>,
    /// Smallest spectral eigenvalue before clipping.
    pub min_eigenvalue: f64,
}

impl std::fmt::Debug for OfgnGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OfgnGenerator")
            .field("n", &self.n)
            .field("len", &self.len)
            .field("embed", &self.embed)
            .field("min_eigenvalue", &self.min_eigenvalue)
            .finish()
    }
}

const CLIP_TOL: f64 = 1e-9;

impl OfgnGenerator {
    pub fn new(params: &OfbmParams, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidParams("synthesis needs at least 2 samples".into()));
        }
        let n = params.n();
        let lags: Vec<SymMatrix> = (0..=(8 * len) as i64).map(|k| params.increment_cov(k)).collect();
        let mut planner = FftPlanner::<f64>::new();
        let mut embed = 2 * len;
        let mut last_err = None;
        while embed <= 16 * len {
            match Self::spectral_roots(&lags, n, embed, &mut planner) {
                Ok((roots, min_eigenvalue)) => {
                    return Ok(OfgnGenerator {
                        n,
                        len,
                        embed,
                        roots,
                        ifft: planner.plan_fft_inverse(embed),
                        min_eigenvalue,
                    });
                }
                Err(e) => last_err = Some(e),
            }
            embed *= 2;
        }
        Err(last_err.expect("at least one embedding size was tried"))
    }

    fn spectral_roots(
        lags: &[SymMatrix],
        n: usize,
        embed: usize,
        planner: &mut FftPlanner<f64>,
    ) -> Result<(Vec<f64>, f64)> {
        let fft = planner.plan_fft_forward(embed);
        let slots = matfun::vec_sym_slots(n);
        // Spectra of each upper-triangle entry; real because c_k = c_{L-k}.
        let mut spectra: Vec<Vec<f64>> = Vec::with_capacity(slots.len());
        for &(a, b) in &slots {
            let mut buf: Vec<Complex64> = (0..embed)
                .map(|k| Complex64::new(lags[k.min(embed - k)].get(a, b), 0.0))
                .collect();
            fft.process(&mut buf);
            spectra.push(buf.iter().map(|z| z.re).collect());
        }
        let mut roots = vec![0.0; embed * n * n];
        let mut min_ev = f64::INFINITY;
        let mut max_ev = 0.0_f64;
        let mut decomps = Vec::with_capacity(embed);
        for l in 0..embed {
            let s = SymMatrix::from_upper(n, spectra.iter().map(|sp| sp[l]).collect())?;
            let e = matfun::sym_eig_n(&s);
            min_ev = min_ev.min(e.values[0]);
            max_ev = max_ev.max(e.values[n - 1]);
            decomps.push(e);
        }
        if min_ev < -CLIP_TOL * max_ev {
            return Err(Error::Embedding {
                min_eigenvalue: min_ev,
                relative: min_ev / max_ev,
                size: embed,
            });
        }
        for (l, e) in decomps.iter().enumerate() {
            let r: Vec<f64> = e.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
            let m = &e.vectors.mul_diag_right(&r) * &e.vectors.transpose();
            roots[l * n * n..(l + 1) * n * n].copy_from_slice(m.data());
        }
        Ok((roots, min_ev))
    }

    pub fn embedding_size(&self) -> usize {
        self.embed
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// One increment path; bit-identical for equal seeds.
    pub fn generate(&self, seed: u64) -> SamplePath {
        let (n, l) = (self.n, self.embed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cols: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); l]; n];
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        for f in 0..l {
            for zd in z.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *zd = Complex64::new(re, im);
            }
            let r = &self.roots[f * n * n..(f + 1) * n * n];
            for c in 0..n {
                cols[c][f] = (0..n).map(|d| z[d] * r[c * n + d]).sum();
            }
        }
        let scale = 1.0 / (l as f64).sqrt();
        for col in cols.iter_mut() {
            self.ifft.process(col);
        }
        let mut values = vec![0.0; self.len * n];
        for k in 0..self.len {
            for c in 0..n {
                values[k * n + c] = cols[c][k].re * scale;
            }
        }
        SamplePath {
            n,
            len: self.len,
            values,
            seed,
            kind: PathKind::Increments,
        }
    }

    /// Levels path of `len + 1` samples starting at zero.
    pub fn generate_levels(&self, seed: u64) -> SamplePath {
        ofgn_to_ofbm(&self.generate(seed)).expect("generator output is an increment path")
    }
}

/// One-shot synthesis of `len` increments.
pub fn synth_ofgn(params: &OfbmParams, len: usize, seed: u64) -> Result<SamplePath> {
    Ok(OfgnGenerator::new(params, len)?.generate(seed))
}

/// Seed used by replicate `r` of a study seeded with `seed`.
pub fn replicate_seed(seed: u64, r: u64) -> u64 {
    seed ^ r
}
