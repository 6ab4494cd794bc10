//! OFBM parametrization `(P, h, Σ)` and its exact second-order structure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{self, sym_eig2_abc, Matrix, RealEigen, SymMatrix};
use crate::quad::PairKernel;
use crate::wavelet::{cascade_psi, PsiTable};

/// Hurst matrix `H = P diag(h) P^{-1}` with unit-norm columns in `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct HurstSpec {
    eig: RealEigen,
}

impl HurstSpec {
    pub fn new(p: Matrix, h: Vec<f64>) -> Result<Self> {
        let n = p.n();
        if h.len() != n {
            return Err(Error::InvalidParams(format!(
                "P is {n}x{n} but {} Hurst eigenvalues were given",
                h.len()
            )));
        }
        if p.det().abs() <= 1e-12 {
            return Err(Error::InvalidParams("P is singular (|det P| <= 1e-12)".into()));
        }
        for j in 0..n {
            let norm = p.col(j).iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParams(format!(
                    "column {} of P has norm {norm}, expected 1",
                    j + 1
                )));
            }
        }
        for (i, &v) in h.iter().enumerate() {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParams(format!("h[{}] = {v} is outside (0, 1)", i + 1)));
            }
        }
        if h.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParams("Hurst eigenvalues must be ascending".into()));
        }
        if n == 2 && h[0] == h[1] {
            return Err(Error::InvalidParams("bivariate model needs h1 < h2".into()));
        }
        Ok(HurstSpec {
            eig: RealEigen::new(p, h)?,
        })
    }

    /// Scales the columns of `p` to unit norm before validating.
    pub fn with_normalized_columns(p: Matrix, h: Vec<f64>) -> Result<Self> {
        let n = p.n();
        let norms: Vec<f64> = (0..n)
            .map(|j| p.col(j).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        if norms.iter().any(|&v| v == 0.0) {
            return Err(Error::InvalidParams("P has a zero column".into()));
        }
        let inv: Vec<f64> = norms.iter().map(|v| 1.0 / v).collect();
        Self::new(p.mul_diag_right(&inv), h)
    }

    /// Diagonalizes a supplied Hurst matrix.
    pub fn from_matrix(h: &Matrix) -> Result<Self> {
        let e = RealEigen::from_matrix(h)?;
        Self::new(e.p, e.values)
    }

    pub fn n(&self) -> usize {
        self.eig.dim()
    }
    pub fn p(&self) -> &Matrix {
        &self.eig.p
    }
    pub fn p_inv(&self) -> &Matrix {
        &self.eig.p_inv
    }
    pub fn h(&self) -> &[f64] {
        &self.eig.values
    }
    pub fn eigen(&self) -> &RealEigen {
        &self.eig
    }
    pub fn matrix(&self) -> Matrix {
        self.eig.matrix()
    }
    pub fn power(&self, c: f64) -> Result<Matrix> {
        self.eig.power(c)
    }
}

/// Law of a time-reversible OFBM: Hurst structure plus `Σ = E B(1)B(1)^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct OfbmParams {
    hurst: HurstSpec,
    sigma: SymMatrix,
    /// `P^{-1} Σ P^{-T}`, the covariance in the eigen-coordinates.
    source: SymMatrix,
}

impl OfbmParams {
    pub fn new(hurst: HurstSpec, sigma: SymMatrix) -> Result<Self> {
        if sigma.n() != hurst.n() {
            return Err(Error::InvalidParams("Σ and P differ in dimension".into()));
        }
        let e = matfun::sym_eig_n(&sigma);
        if e.values[0] <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "Σ must be positive definite (smallest eigenvalue {:.3e})",
                e.values[0]
            )));
        }
        let source = sigma.congruence(hurst.p_inv());
        Ok(OfbmParams {
            hurst,
            sigma,
            source,
        })
    }

    /// Builds `Σ = P M P^T` from the eigen-coordinate covariance `M`.
    pub fn from_source(hurst: HurstSpec, m: SymMatrix) -> Result<Self> {
        let sigma = m.congruence(hurst.p());
        Self::new(hurst, sigma)
    }

    pub fn n(&self) -> usize {
        self.hurst.n()
    }
    pub fn hurst(&self) -> &HurstSpec {
        &self.hurst
    }
    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }
    pub fn source(&self) -> &SymMatrix {
        &self.source
    }

    /// `|x|^H Σ |x|^{H*}`, zero at `x = 0`.
    pub fn structure(&self, x: f64) -> SymMatrix {
        let n = self.n();
        if x == 0.0 {
            return SymMatrix::zeros(n);
        }
        let ax = x.abs();
        let d: Vec<f64> = self.hurst.h().iter().map(|&h| ax.powf(h)).collect();
        let mut inner = SymMatrix::zeros(n);
        for a in 0..n {
            for b in a..n {
                inner.set(a, b, self.source.get(a, b) * d[a] * d[b]);
            }
        }
        inner.congruence(self.hurst.p())
    }

    /// `E B(s) B(t)^T`.
    pub fn cov(&self, s: f64, t: f64) -> SymMatrix {
        let ft = self.structure(t);
        let fs = self.structure(s);
        let fd = self.structure(t - s);
        ft.add(&fs).add(&fd.scale(-1.0)).scale(0.5)
    }

    /// `E W_s W_{s+k}^T` for the unit-lag increments `W_t = B(t) - B(t-1)`.
    pub fn increment_cov(&self, k: i64) -> SymMatrix {
        let k = k as f64;
        let a = self.structure(k + 1.0);
        let b = self.structure(k - 1.0);
        let c = self.structure(k);
        a.add(&b).add(&c.scale(-2.0)).scale(0.5)
    }
}

/// Default cascade resolution for the quadrature.
pub const DEFAULT_RESOLUTION: u32 = 11;
/// Relative tolerance of the resolution-refinement check.
pub const QUADRATURE_TOL: f64 = 1e-6;

/// Analytic wavelet spectrum of a model, `EW(c) = c^H EW(1) c^{H*}`.
///
/// Internally `B(1) = P^{-1} EW(1) P^{-T}` has entries
/// `-½ M_ab ∬ψψ|t - t'|^{h_a + h_b}` so every scale is a rescaling of it.
#[derive(Clone, Debug)]
pub struct WaveletSpectrum {
    params: OfbmParams,
    table: PsiTable,
    b1: SymMatrix,
    /// Largest relative change of the scalar integrals between `R` and `R + 1`.
    pub rel_change: f64,
}

impl WaveletSpectrum {
    pub fn new(params: &OfbmParams, table: &PsiTable) -> Result<Self> {
        let finer = cascade_psi(&table.filters, table.resolution + 1)?;
        let coarse = PairKernel::new(table, 0);
        let fine = PairKernel::new(&finer, 0);
        let n = params.n();
        let h = params.hurst().h();
        let mut b1 = SymMatrix::zeros(n);
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in a..n {
                let alpha = h[a] + h[b];
                let jc = coarse.integral(alpha, 0);
                let jf = fine.integral(alpha, 0);
                let rel = (jc - jf).abs() / jf.abs();
                worst = worst.max(rel);
                b1.set(a, b, -0.5 * params.source().get(a, b) * jc);
            }
        }
        if !(worst <= QUADRATURE_TOL) {
            return Err(Error::Quadrature {
                resolution: table.resolution,
                rel_change: worst,
            });
        }
        Ok(WaveletSpectrum {
            params: params.clone(),
            table: table.clone(),
            b1,
            rel_change: worst,
        })
    }

    pub fn params(&self) -> &OfbmParams {
        &self.params
    }
    pub fn table(&self) -> &PsiTable {
        &self.table
    }

    /// `B(c) = P^{-1} EW(c) P^{-T}` at a (real) scale `c > 0`.
    pub fn b_at(&self, c: f64) -> SymMatrix {
        let h = self.params.hurst().h();
        let n = h.len();
        let mut b = SymMatrix::zeros(n);
        for i in 0..n {
            for k in i..n {
                b.set(i, k, self.b1.get(i, k) * c.powf(h[i] + h[k]));
            }
        }
        b
    }

    /// `EW(c)`.
    pub fn ew_at(&self, c: f64) -> SymMatrix {
        self.b_at(c).congruence(self.params.hurst().p())
    }

    /// `EW(2^j)`.
    pub fn ew(&self, j: u32) -> SymMatrix {
        self.ew_at((j as f64).exp2())
    }

    /// `B(2^j)`.
    pub fn b(&self, j: u32) -> SymMatrix {
        self.b_at((j as f64).exp2())
    }

    /// Normalized log-eigenvalues `h_p^E(c) = log λ_p(EW(c)) / (2 log c)`
    /// for any dimension.
    pub fn eigen_h_at(&self, c: f64) -> Result<Vec<f64>> {
        let ew = self.ew_at(c);
        let e = matfun::sym_eig_n(&ew);
        let lc = c.ln();
        e.values
            .iter()
            .map(|&l| {
                if l <= 0.0 {
                    Err(Error::NonPositiveEigenvalue {
                        octave: c.log2().round() as u32,
                        value: l,
                    })
                } else {
                    Ok(l.ln() / (2.0 * lc))
                }
            })
            .collect()
    }

    /// Bivariate analytic centers at scale `a 2^j`: `(h_1^E, h_2^E, θ)`.
    pub fn theoretical_eigen_h(&self, j: u32, a: u32) -> Result<EigenCenters> {
        if self.params.n() != 2 {
            return Err(Error::Shape("theoretical_eigen_h is bivariate only".into()));
        }
        let c = (a as f64) * (j as f64).exp2();
        let ew = self.ew_at(c);
        let (aa, bb, cc) = (ew.get(0, 0), ew.get(0, 1), ew.get(1, 1));
        let e = sym_eig2_abc(aa, bb, cc);
        let lc = c.ln();
        for &l in &[e.lambda1, e.lambda2] {
            if l <= 0.0 {
                return Err(Error::NonPositiveEigenvalue {
                    octave: j,
                    value: l,
                });
            }
        }
        if bb == 0.0 {
            return Err(Error::DegenerateOffDiagonal);
        }
        Ok(EigenCenters {
            scale: c,
            h1: e.lambda1.ln() / (2.0 * lc),
            h2: e.lambda2.ln() / (2.0 * lc),
            theta: (e.lambda1 - aa) / bb,
        })
    }
}

/// Analytic centers of the bivariate estimators at one scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCenters {
    pub scale: f64,
    pub h1: f64,
    pub h2: f64,
    pub theta: f64,
}

/// Convenience wrapper: `EW(2^j)`.
pub fn wavelet_spectrum(params: &OfbmParams, table: &PsiTable, j: u32) -> Result<SymMatrix> {
    Ok(WaveletSpectrum::new(params, table)?.ew(j))
}

/// Convenience wrapper: `B(2^j)`.
pub fn b_matrix(params: &OfbmParams, table: &PsiTable, j: u32) -> Result<SymMatrix> {
    Ok(WaveletSpectrum::new(params, table)?.b(j))
}

/// On-disk form of [`OfbmParams`]: `P` row-major, `h`, and the upper
/// triangle of `Σ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub n: usize,
    pub p: Vec<f64>,
    pub h: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl ParamsFile {
    pub fn from_params(p: &OfbmParams) -> Self {
        ParamsFile {
            n: p.n(),
            p: p.hurst().p().data().to_vec(),
            h: p.hurst().h().to_vec(),
            sigma: p.sigma().upper().to_vec(),
        }
    }

    pub fn to_params(&self) -> Result<OfbmParams> {
        let p = Matrix::from_row_major(self.n, self.p.clone())
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        let sigma = SymMatrix::from_upper(self.n, self.sigma.clone())
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        OfbmParams::new(HurstSpec::new(p, self.h.clone())?, sigma)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plain numeric struct serializes")
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::{daubechies_filters, Variant};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scalar(h: f64) -> OfbmParams {
        OfbmParams::new(
            HurstSpec::new(Matrix::identity(1), vec![h]).unwrap(),
            SymMatrix::identity(1),
        )
        .unwrap()
    }

    fn fig1() -> OfbmParams {
        let p = Matrix::from_rows([[0.98, 0.57], [0.20, 0.82]]);
        let hs = HurstSpec::with_normalized_columns(p, vec![0.25, 0.85]).unwrap();
        let m = SymMatrix::from_upper(2, vec![1.0, 0.5, 1.0]).unwrap();
        OfbmParams::from_source(hs, m).unwrap()
    }

    fn table() -> PsiTable {
        cascade_psi(&daubechies_filters(2, Variant::LeastAsymmetric).unwrap(), DEFAULT_RESOLUTION).unwrap()
    }

    #[test]
    fn validation_errors() {
        let bad_norm = HurstSpec::new(Matrix::from_rows([[0.98, 0.57], [0.20, 0.82]]), vec![0.25, 0.85]);
        assert!(matches!(bad_norm, Err(Error::InvalidParams(_))));
        let id = Matrix::identity(2);
        assert!(HurstSpec::new(id.clone(), vec![0.5, 0.5]).is_err());
        assert!(HurstSpec::new(id.clone(), vec![0.7, 0.3]).is_err());
        assert!(HurstSpec::new(id.clone(), vec![0.0, 0.3]).is_err());
        assert!(HurstSpec::new(id.clone(), vec![0.3, 1.0]).is_err());
        let singular = Matrix::from_rows([[1.0, 1.0], [0.0, 0.0]]);
        assert!(HurstSpec::new(singular, vec![0.3, 0.6]).is_err());
        let hs = HurstSpec::new(id, vec![0.3, 0.6]).unwrap();
        let not_pd = SymMatrix::from_upper(2, vec![1.0, 2.0, 1.0]).unwrap();
        assert!(OfbmParams::new(hs, not_pd).is_err());
    }

    #[test]
    fn scalar_covariances() {
        let bm = scalar(0.5);
        assert_relative_eq!(bm.cov(0.7, 2.5).get(0, 0), 0.7, epsilon = 1e-14);
        assert_relative_eq!(bm.increment_cov(3).get(0, 0), 0.0, epsilon = 1e-14);
        let f = scalar(0.7);
        assert_relative_eq!(f.cov(1.0, 2.0).get(0, 0), 0.5 * 2f64.powf(1.4), epsilon = 1e-14);
        assert_relative_eq!(f.increment_cov(1).get(0, 0), 0.5 * (2f64.powf(1.4) - 2.0), epsilon = 1e-14);
        assert_relative_eq!(f.increment_cov(1).get(0, 0), 0.319507910772894, epsilon = 1e-12);
    }

    #[test]
    fn cov_at_one_is_sigma() {
        let p = fig1();
        let c = p.cov(1.0, 1.0);
        for (a, b) in c.upper().iter().zip(p.sigma().upper()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-14);
        }
        let k0 = p.increment_cov(0);
        for (a, b) in k0.upper().iter().zip(p.sigma().upper()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-14);
        }
    }

    #[test]
    fn structure_matches_matrix_power_form() {
        let p = fig1();
        let x = 3.7;
        let xh = p.hurst().power(x).unwrap();
        let direct = &(&xh * &p.sigma().to_matrix()) * &xh.transpose();
        let s = p.structure(x).to_matrix();
        assert!((&direct - &s).max_abs() < 1e-12);
    }

    #[test]
    fn increments_decay_for_scalar_h_below_three_quarters() {
        let f = scalar(0.7);
        let mut prev = f.increment_cov(2).get(0, 0).abs();
        for k in 3..=1024 {
            let cur = f.increment_cov(k).get(0, 0).abs();
            assert!(cur <= prev * (1.0 + 1e-9), "k={k}");
            prev = cur;
        }
    }

    #[test]
    fn gram_matrix_is_psd() {
        let p = fig1();
        let times: Vec<f64> = (1..=12).map(|i| 0.37 * i as f64 + 0.01 * (i * i) as f64).collect();
        let m = times.len();
        let mut g = Matrix::zeros(2 * m);
        for (i, &s) in times.iter().enumerate() {
            for (k, &t) in times.iter().enumerate() {
                let c = p.cov(s, t);
                for a in 0..2 {
                    for b in 0..2 {
                        g.set(2 * i + a, 2 * k + b, c.get(a, b));
                    }
                }
            }
        }
        let e = matfun::sym_eig_n(&SymMatrix::symmetrize(&g));
        assert!(e.values[0] >= -1e-8 * g.trace());
    }

    #[test]
    fn scalar_spectrum_scales_with_two_h() {
        let ws = WaveletSpectrum::new(&scalar(0.7), &table()).unwrap();
        let r = ws.ew(5).get(0, 0) / ws.ew(0).get(0, 0);
        assert_relative_eq!(r, 2f64.powf(2.0 * 0.7 * 5.0), max_relative = 1e-12);
        assert!(ws.rel_change < QUADRATURE_TOL);
    }

    #[test]
    fn scalar_spectrum_stabilizes_at_resolution_ten() {
        let f = daubechies_filters(2, Variant::LeastAsymmetric).unwrap();
        let t10 = cascade_psi(&f, 10).unwrap();
        assert!(WaveletSpectrum::new(&scalar(0.7), &t10).unwrap().rel_change < 1e-6);
    }

    #[test]
    fn quadrature_error_is_reported() {
        let f = daubechies_filters(2, Variant::LeastAsymmetric).unwrap();
        let coarse = cascade_psi(&f, 6).unwrap();
        assert!(matches!(
            WaveletSpectrum::new(&scalar(0.3), &coarse),
            Err(Error::Quadrature { resolution: 6, .. })
        ));
    }

    #[test]
    fn operator_scaling_between_octaves() {
        let p = fig1();
        let ws = WaveletSpectrum::new(&p, &table()).unwrap();
        let two_h = p.hurst().power(2.0).unwrap();
        for j in 0..8 {
            let lhs = ws.ew(j + 1).to_matrix();
            let rhs = &(&two_h * &ws.ew(j).to_matrix()) * &two_h.transpose();
            assert!((&lhs - &rhs).max_abs() < 1e-10 * lhs.max_abs());
        }
    }

    #[test]
    fn spectrum_is_spd_and_b_reconstructs() {
        let p = fig1();
        let ws = WaveletSpectrum::new(&p, &table()).unwrap();
        for j in 0..12 {
            let ew = ws.ew(j);
            assert!(matfun::sym_eig_n(&ew).values[0] > 0.0);
            let back = ws.b(j).congruence(p.hurst().p());
            for (a, b) in back.upper().iter().zip(ew.upper()) {
                assert!((a - b).abs() < 1e-12 * ew.trace());
            }
        }
        assert!(ws.b(4).get(1, 1) > 0.0);
    }

    #[test]
    fn decoupled_centers() {
        let hs = HurstSpec::new(Matrix::identity(2), vec![0.3, 0.8]).unwrap();
        let m = SymMatrix::from_upper(2, vec![1.0, 0.2, 1.5]).unwrap();
        let p = OfbmParams::from_source(hs, m).unwrap();
        let ws = WaveletSpectrum::new(&p, &table()).unwrap();
        let diag = OfbmParams::new(
            HurstSpec::new(Matrix::identity(2), vec![0.3, 0.8]).unwrap(),
            SymMatrix::from_upper(2, vec![1.0, 0.0, 1.5]).unwrap(),
        )
        .unwrap();
        let wd = WaveletSpectrum::new(&diag, &table()).unwrap();
        let ew1 = wd.ew(0).get(0, 0);
        let h = wd.eigen_h_at(256.0).unwrap();
        assert_relative_eq!(h[0], 0.3 + ew1.ln() / (2.0 * 256f64.ln()), epsilon = 1e-12);
        assert!(matches!(wd.theoretical_eigen_h(4, 16), Err(Error::DegenerateOffDiagonal)));
        assert!(ws.theoretical_eigen_h(4, 16).is_ok());
    }

    #[test]
    fn centers_approach_hurst_eigenvalues() {
        let ws = WaveletSpectrum::new(&fig1(), &table()).unwrap();
        let mut prev: Option<EigenCenters> = None;
        for q in 4..=20 {
            let c = ws.theoretical_eigen_h(0, 1 << q).unwrap();
            if let Some(p) = prev {
                assert!((c.h1 - 0.25).abs() < (p.h1 - 0.25).abs());
                assert!((c.h2 - 0.85).abs() < (p.h2 - 0.85).abs());
            }
            prev = Some(c);
        }
    }

    #[test]
    fn params_file_roundtrip_is_exact() {
        let p = fig1();
        let f = ParamsFile::from_params(&p);
        let text = f.to_toml();
        let back = ParamsFile::from_toml(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_params().unwrap(), p);
        assert!(matches!(ParamsFile::from_toml("n = "), Err(Error::Parse(_))));
    }

    proptest! {
        #[test]
        fn operator_self_similarity(s in 0.05..20.0f64, t in 0.05..20.0f64, c in 0.1..10.0f64) {
            let p = fig1();
            let lhs = p.cov(c * s, c * t).to_matrix();
            let ch = p.hurst().power(c).unwrap();
            let rhs = &(&ch * &p.cov(s, t).to_matrix()) * &ch.transpose();
            prop_assert!((&lhs - &rhs).max_abs() <= 1e-10 * rhs.max_abs().max(1.0));
        }

        #[test]
        fn cov_is_symmetric_in_arguments(s in -20.0..20.0f64, t in -20.0..20.0f64) {
            let p = fig1();
            prop_assert_eq!(p.cov(s, t), p.cov(t, s));
        }
    }
}
