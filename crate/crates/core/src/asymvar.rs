//! Limiting covariances of the sample wavelet variance and of the
//! eigenvalue-based estimators.
//!
//! For octaves `j <= j'` with `s = 2^{j'-j}` the cross-covariance function of
//! the wavelet coefficients is
//! `Ω_{jj'}(z) = P 2^{jJ_h} [-½ M_ab J_s(h_a + h_b, z)] 2^{jJ_h} P^T`, where
//! `J_s(α, z) = ∬ψ(t)ψ(t')|t - s t' + z|^α` comes from [`PairKernel`]. The
//! blocks of `F` follow by Isserlis pairing:
//!
//! `G_{jj'}[(i1,i2),(k1,k2)] = 2^{-|j-j'|/2} Σ_z (Ω_{i1k1}Ω_{i2k2} + Ω_{i1k2}Ω_{i2k1})(z)`
//!
//! with rows and columns indexed by the `vec_sym` slots `i1 <= i2`,
//! `k1 <= k2`. `Ω` is a symmetric matrix at every lag, so `G_{jj'}` is
//! symmetric and `G_{j'j} = G_{jj'}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{congruence_vec_matrix, vec_sym_slots, Matrix, SymMatrix};
use crate::model::WaveletSpectrum;
use crate::quad::PairKernel;
use crate::wavelet::{cascade_psi, PsiTable};

/// Truncation stops once `||Ω(±Z)||_F^2` falls below this fraction of the
/// partial sum.
pub const TAIL_TOL: f64 = 1e-8;
pub const MIN_Z_MAX: i64 = 64;
const Z_CAP: i64 = 1 << 16;

/// Resolution used for a pair of octaves `q` apart. Cross-octave kernels
/// cost `O(4^q)` at full resolution, so far-apart pairs use a coarser table.
pub fn pair_resolution(resolution: u32, q: u32) -> u32 {
    resolution.min(6.max(15u32.saturating_sub(q)))
}

/// Kernel for octaves `q` apart, at [`pair_resolution`].
fn kernel_for(table: &PsiTable, q: u32) -> Result<PairKernel> {
    let r = pair_resolution(table.resolution, q);
    if r == table.resolution {
        Ok(PairKernel::new(table, q))
    } else {
        Ok(PairKernel::new(&cascade_psi(&table.filters, r)?, q))
    }
}

fn omega_with(spec: &WaveletSpectrum, kernel: &PairKernel, lo: u32, z: i64) -> SymMatrix {
    let params = spec.params();
    let h = params.hurst().h();
    let n = h.len();
    let m = params.source();
    let mut inner = SymMatrix::zeros(n);
    for a in 0..n {
        for b in a..n {
            let alpha = h[a] + h[b];
            let v = -0.5 * m.get(a, b) * (lo as f64 * alpha).exp2() * kernel.integral(alpha, z);
            inner.set(a, b, v);
        }
    }
    inner.congruence(params.hurst().p())
}

/// Orders an octave pair so that the kernel always dilates the second argument.
fn orient(j: u32, jp: u32, z: i64) -> (u32, u32, i64) {
    if j <= jp {
        (j, jp - j, z)
    } else {
        (jp, j - jp, -z)
    }
}

/// `Ω_{j,j'}(z) = E D(2^j, k) D(2^{j'}, k')^T` with `2^j k - 2^{j'} k' = z·2^{min(j,j')}`.
pub fn omega(spec: &WaveletSpectrum, j: u32, jp: u32, z: i64) -> Result<SymMatrix> {
    let (lo, q, zz) = orient(j, jp, z);
    let kernel = kernel_for(spec.table(), q)?;
    Ok(omega_with(spec, &kernel, lo, zz))
}

/// Truncation diagnostics of one `Σ_z` series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub j: u32,
    pub jp: u32,
    pub z_max: i64,
    /// `max ||Ω(±z_max)||_F^2 / Σ_{|z| <= z_max} ||Ω(z)||_F^2`.
    pub tail_ratio: f64,
    pub resolution: u32,
}

/// Lagged cross-covariances `Ω_{j,j'}(z)` for `|z| <= z_max`.
#[derive(Clone, Debug)]
pub struct OmegaSeries {
    pub j: u32,
    pub jp: u32,
    pub z_max: i64,
    /// Index `z + z_max`.
    pub terms: Vec<SymMatrix>,
    pub tail_ratio: f64,
}

impl OmegaSeries {
    pub fn at(&self, z: i64) -> Option<&SymMatrix> {
        (z.abs() <= self.z_max).then(|| &self.terms[(z + self.z_max) as usize])
    }
}

fn frob2(s: &SymMatrix) -> f64 {
    let m = s.to_matrix();
    m.frobenius().powi(2)
}

fn series_with(spec: &WaveletSpectrum, kernel: &PairKernel, j: u32, jp: u32) -> Result<OmegaSeries> {
    let (lo, q, sign) = {
        let (lo, q, _) = orient(j, jp, 0);
        (lo, q, if j <= jp { 1 } else { -1 })
    };
    let eval = |z: i64| omega_with(spec, kernel, lo, sign * z);
    let mut z_max = MIN_Z_MAX.max(4 << q);
    let mut terms: Vec<SymMatrix> = (-z_max..=z_max).into_par_iter().map(eval).collect();
    loop {
        let total: f64 = terms.iter().map(frob2).sum();
        let edge = frob2(&terms[0]).max(frob2(terms.last().expect("nonempty")));
        let ratio = if total > 0.0 { edge / total } else { 0.0 };
        if ratio < TAIL_TOL {
            return Ok(OmegaSeries {
                j,
                jp,
                z_max,
                terms,
                tail_ratio: ratio,
            });
        }
        if z_max >= Z_CAP {
            return Err(Error::TailNotConverged { z_max, ratio });
        }
        let new_max = 2 * z_max;
        let left: Vec<SymMatrix> = (-new_max..-z_max).into_par_iter().map(eval).collect();
        let right: Vec<SymMatrix> = (z_max + 1..=new_max).into_par_iter().map(eval).collect();
        terms = left.into_iter().chain(terms).chain(right).collect();
        z_max = new_max;
    }
}

/// `Ω_{j,j'}(z)` over a window wide enough for the tail criterion.
pub fn omega_series(spec: &WaveletSpectrum, j: u32, jp: u32) -> Result<OmegaSeries> {
    let (_, q, _) = orient(j, jp, 0);
    series_with(spec, &kernel_for(spec.table(), q)?, j, jp)
}

/// Isserlis pairing of a lag series into a `vec_sym` block, without the
/// octave factor.
pub fn isserlis_sum(n: usize, terms: &[SymMatrix]) -> Matrix {
    let slots = vec_sym_slots(n);
    let d = slots.len();
    let mut g = Matrix::zeros(d);
    for (r, &(i1, i2)) in slots.iter().enumerate() {
        for (c, &(k1, k2)) in slots.iter().enumerate() {
            let v: f64 = terms
                .iter()
                .map(|o| o.get(i1, k1) * o.get(i2, k2) + o.get(i1, k2) * o.get(i2, k1))
                .sum();
            g.set(r, c, v);
        }
    }
    g
}

fn block_from_series(n: usize, s: &OmegaSeries) -> Matrix {
    let f = (-(s.j.abs_diff(s.jp) as f64) / 2.0).exp2();
    isserlis_sum(n, &s.terms).scale(f)
}

/// `G_{jj'}`, the limit of `√(K_j K_{j'}) Cov(vec_sym W(2^j), vec_sym W(2^{j'}))`.
pub fn g_block(spec: &WaveletSpectrum, j: u32, jp: u32) -> Result<Matrix> {
    Ok(block_from_series(spec.params().n(), &omega_series(spec, j, jp)?))
}

/// `F = (G_{jj'})` over `octaves`, with per-pair diagnostics.
pub fn f_matrix(spec: &WaveletSpectrum, octaves: &[u32]) -> Result<(Matrix, Vec<Truncation>)> {
    let n = spec.params().n();
    let d = n * (n + 1) / 2;
    let m = octaves.len();
    let max_q = match (octaves.iter().min(), octaves.iter().max()) {
        (Some(a), Some(b)) => b - a,
        _ => return Err(Error::InvalidParams("empty octave list".into())),
    };
    let kernels: Vec<PairKernel> = (0..=max_q)
        .into_par_iter()
        .map(|q| kernel_for(spec.table(), q))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).collect();
    let blocks: Vec<(Matrix, Truncation)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (j, jp) = (octaves[a], octaves[b]);
            let q = j.abs_diff(jp);
            let s = series_with(spec, &kernels[q as usize], j, jp)?;
            let t = Truncation {
                j,
                jp,
                z_max: s.z_max,
                tail_ratio: s.tail_ratio,
                resolution: pair_resolution(spec.table().resolution, q),
            };
            Ok((block_from_series(n, &s), t))
        })
        .collect::<Result<_>>()?;
    let mut f = Matrix::zeros(d * m);
    let mut diag = Vec::with_capacity(blocks.len());
    for (&(a, b), (g, t)) in pairs.iter().zip(blocks) {
        for r in 0..d {
            for c in 0..d {
                f.set(a * d + r, b * d + c, g.get(r, c));
                f.set(b * d + c, a * d + r, g.get(r, c));
            }
        }
        diag.push(t);
    }
    Ok((f, diag))
}

/// `Σ_B = diag_m(𝒫) F diag_m(𝒫)^T` for a given `Π = P^{-1}`.
pub fn sigma_b_from(f: &Matrix, pi: &Matrix) -> Matrix {
    let cp = congruence_vec_matrix(pi);
    let d = cp.n();
    let m = f.n() / d;
    let mut big = Matrix::zeros(f.n());
    for b in 0..m {
        for r in 0..d {
            for c in 0..d {
                big.set(b * d + r, b * d + c, cp.get(r, c));
            }
        }
    }
    &(&big * f) * &big.transpose()
}

pub fn sigma_b(spec: &WaveletSpectrum, f: &Matrix) -> Matrix {
    sigma_b_from(f, spec.params().hurst().p_inv())
}

/// Diagonal block `𝒬_jj` (2x3) built from `B(2^j)`.
pub fn q_block(b: &SymMatrix, octave: u32) -> Result<[[f64; 3]; 2]> {
    let (b11, b12, b22) = (b.get(0, 0), b.get(0, 1), b.get(1, 1));
    let det = b11 * b22 - b12 * b12;
    if !(det > 0.0 && b22 > 0.0) {
        return Err(Error::SingularB { octave, det, b22 });
    }
    Ok([
        [b22 / det, -2.0 * b12 / det, (b11 * b22 / det - 1.0) / b22],
        [0.0, 0.0, 1.0 / b22],
    ])
}

/// `Σ_{h1,h2} = 𝒬 Σ_B 𝒬^T` (bivariate), a `2m x 2m` matrix ordered
/// `(h1, h2)` per octave.
pub fn sigma_h(spec: &WaveletSpectrum, sigma_b: &Matrix, octaves: &[u32]) -> Result<Matrix> {
    if spec.params().n() != 2 {
        return Err(Error::Shape("Σ_h is defined for n = 2 only".into()));
    }
    let qs: Vec<[[f64; 3]; 2]> = octaves
        .iter()
        .map(|&j| q_block(&spec.b(j), j))
        .collect::<Result<_>>()?;
    let m = octaves.len();
    let mut out = Matrix::zeros(2 * m);
    for a in 0..m {
        for b in 0..m {
            for r in 0..2 {
                for c in 0..2 {
                    let mut v = 0.0;
                    for x in 0..3 {
                        for y in 0..3 {
                            v += qs[a][r][x] * sigma_b.get(3 * a + x, 3 * b + y) * qs[b][c][y];
                        }
                    }
                    out.set(2 * a + r, 2 * b + c, v);
                }
            }
        }
    }
    Ok(out)
}

/// `ℛ = det P / (b22 p22²) (0, -1, b12 / b22)`.
pub fn r_vector(p: &Matrix, b: &SymMatrix) -> Result<[f64; 3]> {
    let (p12, p22) = (p.get(0, 1), p.get(1, 1));
    let scale = p.max_abs();
    if p22.abs() <= 1e-14 * scale {
        return Err(Error::PreconditionViolated("p22 = 0".into()));
    }
    if p12.abs() <= 1e-14 * scale {
        return Err(Error::PreconditionViolated("p12 = 0".into()));
    }
    let (b12, b22) = (b.get(0, 1), b.get(1, 1));
    if b12.abs() <= 1e-14 * b.get(0, 0).abs().max(b22.abs()) {
        return Err(Error::PreconditionViolated("b12 = 0".into()));
    }
    let k = p.det() / (b22 * p22 * p22);
    Ok([0.0, -k, k * b12 / b22])
}

/// `σ²_θ = ℛ^T Σ_B(2^j) ℛ` from the 3x3 diagonal block of `Σ_B` at `j`.
pub fn sigma_theta(spec: &WaveletSpectrum, sigma_b_block: &Matrix, j: u32) -> Result<f64> {
    if spec.params().n() != 2 {
        return Err(Error::Shape("σ²_θ is defined for n = 2 only".into()));
    }
    let r = r_vector(spec.params().hurst().p(), &spec.b(j))?;
    let sr = sigma_b_block.mul_vec(&r);
    Ok(r.iter().zip(&sr).map(|(a, b)| a * b).sum())
}

/// Square sub-block `[r0, r0 + size)` of a square matrix.
pub fn sub_block(m: &Matrix, r0: usize, size: usize) -> Matrix {
    let mut out = Matrix::zeros(size);
    for r in 0..size {
        for c in 0..size {
            out.set(r, c, m.get(r0 + r, r0 + c));
        }
    }
    out
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.n()).map(|i| m.row(i).to_vec()).collect()
}

/// All limiting covariances over one octave list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymCov {
    pub n: usize,
    pub octaves: Vec<u32>,
    /// `F`, blocks `G_{jj'}` of size `n(n+1)/2`.
    pub f: Vec<Vec<f64>>,
    pub sigma_b: Vec<Vec<f64>>,
    /// Bivariate only.
    pub sigma_h: Option<Vec<Vec<f64>>>,
    /// Per octave; `None` where the preconditions fail or `n != 2`.
    pub sigma_theta: Vec<Option<f64>>,
    pub truncation: Vec<Truncation>,
    pub resolution: u32,
    pub quadrature_rel_change: f64,
}

impl AsymCov {
    pub fn g(&self, a: usize, b: usize) -> Matrix {
        let d = self.n * (self.n + 1) / 2;
        let mut g = Matrix::zeros(d);
        for r in 0..d {
            for c in 0..d {
                g.set(r, c, self.f[a * d + r][b * d + c]);
            }
        }
        g
    }

    /// `Σ_{h1,h2}` diagonal `(var h1, var h2)` at octave index `a`.
    pub fn sigma_h_diag(&self, a: usize) -> Option<(f64, f64)> {
        let s = self.sigma_h.as_ref()?;
        Some((s[2 * a][2 * a], s[2 * a + 1][2 * a + 1]))
    }
}

pub fn asym_cov(spec: &WaveletSpectrum, octaves: &[u32]) -> Result<AsymCov> {
    let n = spec.params().n();
    let (f, truncation) = f_matrix(spec, octaves)?;
    let sb = sigma_b(spec, &f);
    let (sigma_h, sigma_theta) = if n == 2 {
        let sh = sigma_h(spec, &sb, octaves)?;
        let st = octaves
            .iter()
            .enumerate()
            .map(|(a, &j)| sigma_theta(spec, &sub_block(&sb, 3 * a, 3), j).ok())
            .collect();
        (Some(rows(&sh)), st)
    } else {
        (None, vec![None; octaves.len()])
    };
    Ok(AsymCov {
        n,
        octaves: octaves.to_vec(),
        f: rows(&f),
        sigma_b: rows(&sb),
        sigma_h,
        sigma_theta,
        truncation,
        resolution: spec.table().resolution,
        quadrature_rel_change: spec.rel_change,
    })
}
