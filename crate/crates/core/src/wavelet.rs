//! Daubechies filters, cascade evaluation of the scaling function and wavelet,
//! the pyramidal transform and the sample wavelet variance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::SymMatrix;
use crate::poly;
use crate::synth::{PathKind, SamplePath};

/// Root-selection rule for the spectral factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    ExtremalPhase,
    LeastAsymmetric,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extremal-phase" | "daublet" | "db" => Ok(Variant::ExtremalPhase),
            "least-asymmetric" | "symmlet" | "sym" => Ok(Variant::LeastAsymmetric),
            other => Err(Error::UnsupportedFilter(format!("unknown variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::ExtremalPhase => "extremal-phase",
            Variant::LeastAsymmetric => "least-asymmetric",
        })
    }
}

/// Orthonormal two-channel filter pair with `2 n_psi` taps.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterPair {
    pub n_psi: usize,
    pub variant: Variant,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
}

impl FilterPair {
    pub fn taps(&self) -> usize {
        self.h.len()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Candidate roots of the minimum-degree factor, grouped so that a
/// complex-conjugate pair is always chosen together.
struct RootGroup {
    inside: Vec<Complex64>,
    outside: Vec<Complex64>,
}

fn root_groups(n_psi: usize) -> Vec<RootGroup> {
    // P(y) = sum_{k<N} C(N-1+k, k) y^k with y = sin^2(w/2); on z = e^{iw},
    // z + 1/z = 2 - 4y.
    let coeffs: Vec<f64> = (0..n_psi).map(|k| binomial(n_psi - 1 + k, k)).collect();
    let mut ys = poly::roots(&coeffs);
    ys.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    let mut groups = Vec::new();
    let mut used = vec![false; ys.len()];
    for i in 0..ys.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let y = ys[i];
        let pick = |y: Complex64| -> (Complex64, Complex64) {
            // z^2 - (2 - 4y) z + 1 = 0
            let b = Complex64::new(2.0, 0.0) - 4.0 * y;
            let disc = (b * b - 4.0).sqrt();
            let z1 = 0.5 * (b + disc);
            let z2 = 0.5 * (b - disc);
            if z1.norm() < z2.norm() {
                (z1, z2)
            } else {
                (z2, z1)
            }
        };
        if y.im.abs() < 1e-10 * (1.0 + y.norm()) {
            let (zi, zo) = pick(Complex64::new(y.re, 0.0));
            groups.push(RootGroup {
                inside: vec![Complex64::new(zi.re, 0.0)],
                outside: vec![Complex64::new(zo.re, 0.0)],
            });
        } else {
            // find the conjugate partner
            let partner = (i + 1..ys.len())
                .filter(|&k| !used[k])
                .min_by(|&a, &b| {
                    (ys[a] - y.conj())
                        .norm()
                        .partial_cmp(&(ys[b] - y.conj()).norm())
                        .unwrap()
                })
                .expect("complex roots of a real polynomial come in pairs");
            used[partner] = true;
            let (zi, zo) = pick(y);
            groups.push(RootGroup {
                inside: vec![zi, zi.conj()],
                outside: vec![zo, zo.conj()],
            });
        }
    }
    groups
}

fn build_filter(n_psi: usize, roots: &[Complex64]) -> Vec<f64> {
    // ((1 + z)/2)^N times prod (z - r), real coefficients, normalized to sum sqrt 2.
    let mut c: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..n_psi {
        c = poly_mul_c(&c, &[Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)]);
    }
    for &r in roots {
        c = poly_mul_c(&c, &[-r, Complex64::new(1.0, 0.0)]);
    }
    let h: Vec<f64> = c.iter().map(|x| x.re).collect();
    let s: f64 = h.iter().sum();
    h.iter().map(|x| x * std::f64::consts::SQRT_2 / s).collect()
}

fn poly_mul_c(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Residual of the least-squares linear fit to the unwrapped phase of the
/// frequency response of the root-only factor.
fn phase_nonlinearity(roots: &[Complex64]) -> f64 {
    const M: usize = 256;
    let mut phases = Vec::with_capacity(M);
    let mut prev: Option<f64> = None;
    let mut offset = 0.0;
    let two_pi = 2.0 * std::f64::consts::PI;
    for m in 0..M {
        let w = std::f64::consts::PI * (m as f64 + 0.5) / M as f64;
        let z = Complex64::from_polar(1.0, -w);
        let v: Complex64 = roots.iter().map(|&r| z - r).product();
        let mut ph = v.arg() + offset;
        if let Some(p) = prev {
            while ph - p > std::f64::consts::PI {
                ph -= two_pi;
                offset -= two_pi;
            }
            while ph - p < -std::f64::consts::PI {
                ph += two_pi;
                offset += two_pi;
            }
        }
        prev = Some(ph);
        phases.push((w, ph));
    }
    let n = M as f64;
    let mx = phases.iter().map(|p| p.0).sum::<f64>() / n;
    let my = phases.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = phases.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = phases.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let b = sxy / sxx;
    phases
        .iter()
        .map(|p| (p.1 - my - b * (p.0 - mx)).powi(2))
        .sum::<f64>()
        / n
}

/// Daubechies orthonormal filters with `n_psi` vanishing moments.
///
/// The low-pass taps come from the spectral factorization of the
/// Daubechies polynomial. `ExtremalPhase` keeps the roots giving the usual
/// `db` filters (`h_0 = (1+√3)/(4√2)` for `n_psi = 2`); `LeastAsymmetric`
/// searches all admissible root choices for the smallest deviation from
/// linear phase and breaks ties toward the extremal-phase choice.
pub fn daubechies_filters(n_psi: usize, variant: Variant) -> Result<FilterPair> {
    if !(2..=10).contains(&n_psi) {
        return Err(Error::UnsupportedFilter(format!(
            "n_psi must lie in [2, 10], got {n_psi}"
        )));
    }
    let groups = root_groups(n_psi);
    let choose = |mask: u32| -> Vec<Complex64> {
        groups
            .iter()
            .enumerate()
            .flat_map(|(i, g)| {
                if mask & (1 << i) == 0 {
                    g.outside.clone()
                } else {
                    g.inside.clone()
                }
            })
            .collect()
    };
    let mask = match variant {
        Variant::ExtremalPhase => 0,
        Variant::LeastAsymmetric => {
            let mut best = (0u32, phase_nonlinearity(&choose(0)));
            for mask in 1..(1u32 << groups.len()) {
                let score = phase_nonlinearity(&choose(mask));
                if score < best.1 * (1.0 - 1e-9) {
                    best = (mask, score);
                }
            }
            best.0
        }
    };
    let h = build_filter(n_psi, &choose(mask));
    let l = h.len();
    let g = (0..l)
        .map(|k| if k % 2 == 0 { h[l - 1 - k] } else { -h[l - 1 - k] })
        .collect();
    Ok(FilterPair {
        n_psi,
        variant,
        h,
        g,
    })
}

/// Scaling function and wavelet on a dyadic grid, piecewise constant on
/// cells `[m 2^-R, (m+1) 2^-R)`.
#[derive(Clone, Debug)]
pub struct PsiTable {
    pub filters: FilterPair,
    pub resolution: u32,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub a_phi: f64,
}

impl PsiTable {
    pub fn delta(&self) -> f64 {
        (-(self.resolution as f64)).exp2()
    }

    /// Cell midpoints, useful for plotting.
    pub fn grid(&self) -> Vec<f64> {
        let d = self.delta();
        (0..self.psi.len()).map(|m| (m as f64 + 0.5) * d).collect()
    }

    /// `∫ t^q ψ(t) dt` computed exactly for the piecewise-constant table.
    pub fn psi_moment(&self, q: u32) -> f64 {
        let d = self.delta();
        let qp = q as i32 + 1;
        self.psi
            .iter()
            .enumerate()
            .map(|(m, &v)| {
                let a = m as f64 * d;
                v * (((a + d).powi(qp) - a.powi(qp)) / qp as f64)
            })
            .sum()
    }

    pub fn psi_energy(&self) -> f64 {
        self.psi.iter().map(|v| v * v).sum::<f64>() * self.delta()
    }
}

fn refine(v: &[f64], taps: &[f64], r: u32) -> Vec<f64> {
    let stride = 1usize << r;
    let len = v.len() + (taps.len() - 1) * stride;
    let mut out = vec![0.0; len];
    for (k, &t) in taps.iter().enumerate() {
        let c = std::f64::consts::SQRT_2 * t;
        let off = k * stride;
        for (m, &x) in v.iter().enumerate() {
            out[m + off] += c * x;
        }
    }
    out
}

/// Evaluates φ and ψ by `resolution` refinement steps from the box function.
pub fn cascade_psi(filters: &FilterPair, resolution: u32) -> Result<PsiTable> {
    if !(1..=16).contains(&resolution) {
        return Err(Error::InvalidParams(format!(
            "cascade resolution must lie in [1, 16], got {resolution}"
        )));
    }
    let mut v = vec![1.0];
    for r in 0..(resolution - 1) {
        v = refine(&v, &filters.h, r);
    }
    let psi = refine(&v, &filters.g, resolution - 1);
    let phi = refine(&v, &filters.h, resolution - 1);
    let delta = (-(resolution as f64)).exp2();
    let a_phi = phi.iter().sum::<f64>() * delta;
    Ok(PsiTable {
        filters: filters.clone(),
        resolution,
        phi,
        psi,
        a_phi,
    })
}

/// Detail coefficients of one octave, stored `K x n` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct OctaveCoeffs {
    pub j: u32,
    pub count: usize,
    pub values: Vec<f64>,
}

impl OctaveCoeffs {
    pub fn row(&self, k: usize, n: usize) -> &[f64] {
        &self.values[k * n..(k + 1) * n]
    }
}

/// Output of the pyramid: raw detail coefficients `d̃_{j,k}` for `j = 1..=j_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub n: usize,
    pub octaves: Vec<OctaveCoeffs>,
    /// True once divided by `2^{j/2}`.
    pub normalized: bool,
}

impl Coefficients {
    pub fn octave(&self, j: u32) -> Option<&OctaveCoeffs> {
        self.octaves.iter().find(|o| o.j == j)
    }
}

/// Largest octave the pyramid can reach on `len` samples under the
/// requirement `len >= 2^j (2 n_psi)`.
pub fn max_octave(len: usize, n_psi: usize) -> u32 {
    let mut j = 0;
    while len >= (1usize << (j + 1)) * 2 * n_psi {
        j += 1;
    }
    j
}

/// Coefficient counts `K_1, ..., K_{j_max}` produced by [`pyramid`] on
/// `len` samples with `taps`-tap filters.
pub fn octave_counts(len: usize, taps: usize, j_max: u32) -> Vec<usize> {
    let mut a = len;
    (0..j_max)
        .map(|_| {
            let k = if a >= taps { (a - taps) / 2 + 1 } else { 0 };
            a = k;
            k
        })
        .collect()
}

/// One filter-bank step keeping only coefficients whose filter support lies
/// inside the input.
fn analysis_step(a: &[f64], taps: &[f64]) -> Vec<f64> {
    let l = taps.len();
    if a.len() < l {
        return Vec::new();
    }
    let count = (a.len() - l) / 2 + 1;
    (0..count)
        .map(|k| taps.iter().zip(&a[2 * k..2 * k + l]).map(|(t, x)| t * x).sum())
        .collect()
}

/// Pyramidal discrete wavelet transform of a levels path, initialized with
/// `ã_{0,k} = a_φ B(k)`.
pub fn pyramid(path: &SamplePath, filters: &FilterPair, j_max: u32) -> Result<Coefficients> {
    if path.kind != PathKind::Levels {
        return Err(Error::Kind { expected: "levels" });
    }
    pyramid_raw(&path.values, path.n, filters, j_max)
}

/// Pyramid on raw `len x n` row-major data.
pub fn pyramid_raw(values: &[f64], n: usize, filters: &FilterPair, j_max: u32) -> Result<Coefficients> {
    if n == 0 || values.len() % n != 0 {
        return Err(Error::Shape("data length is not a multiple of the dimension".into()));
    }
    let len = values.len() / n;
    let achievable = max_octave(len, filters.n_psi);
    if j_max == 0 || j_max > achievable {
        return Err(Error::InsufficientData {
            reason: format!(
                "{len} samples cannot support octave {j_max} with {} taps",
                filters.taps()
            ),
            j_max_achievable: achievable,
        });
    }
    let a_phi = 1.0;
    let mut approx: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..len).map(|k| a_phi * values[k * n + c]).collect())
        .collect();
    let mut octaves = Vec::with_capacity(j_max as usize);
    for j in 1..=j_max {
        let details: Vec<Vec<f64>> = approx.iter().map(|a| analysis_step(a, &filters.g)).collect();
        approx = approx.iter().map(|a| analysis_step(a, &filters.h)).collect();
        let count = details[0].len();
        let mut vals = Vec::with_capacity(count * n);
        for k in 0..count {
            for d in &details {
                vals.push(d[k]);
            }
        }
        octaves.push(OctaveCoeffs {
            j,
            count,
            values: vals,
        });
    }
    Ok(Coefficients {
        n,
        octaves,
        normalized: false,
    })
}

/// `D̃(2^j, k) = 2^{-j/2} d̃_{j,k}`.
pub fn normalize_coeffs(mut c: Coefficients) -> Coefficients {
    if c.normalized {
        return c;
    }
    for o in c.octaves.iter_mut() {
        let f = (-(o.j as f64) / 2.0).exp2();
        o.values.iter_mut().for_each(|v| *v *= f);
    }
    c.normalized = true;
    c
}

/// `W(2^j)` with its coefficient count.
#[derive(Clone, Debug, PartialEq)]
pub struct OctaveVariance {
    pub j: u32,
    pub count: usize,
    pub w: SymMatrix,
}

/// Sample wavelet variance over a range of octaves.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletVariance {
    pub n: usize,
    pub octaves: Vec<OctaveVariance>,
}

impl WaveletVariance {
    pub fn at(&self, j: u32) -> Option<&OctaveVariance> {
        self.octaves.iter().find(|o| o.j == j)
    }

    pub fn j_range(&self) -> Option<(u32, u32)> {
        Some((self.octaves.first()?.j, self.octaves.last()?.j))
    }
}

/// Mean outer product of the coefficient rows of one octave.
pub fn octave_variance(o: &OctaveCoeffs, n: usize, min_count: usize) -> Result<OctaveVariance> {
    if o.count < min_count {
        return Err(Error::InsufficientData {
            reason: format!("octave {} has {} coefficients, need {min_count}", o.j, o.count),
            j_max_achievable: o.j.saturating_sub(1),
        });
    }
    let mut w = SymMatrix::zeros(n);
    for k in 0..o.count {
        let r = o.row(k, n);
        for a in 0..n {
            for b in a..n {
                w.set(a, b, w.get(a, b) + r[a] * r[b]);
            }
        }
    }
    Ok(OctaveVariance {
        j: o.j,
        count: o.count,
        w: w.scale(1.0 / o.count as f64),
    })
}

/// `W(2^j) = K_j^{-1} Σ_k D(2^j,k) D(2^j,k)^T` for every octave in
/// `[j_min, j_max]`. Coefficients are normalized first if needed.
pub fn wavelet_variance(c: &Coefficients, j_min: u32, j_max: u32) -> Result<WaveletVariance> {
    let c = if c.normalized {
        std::borrow::Cow::Borrowed(c)
    } else {
        std::borrow::Cow::Owned(normalize_coeffs(c.clone()))
    };
    let mut octaves = Vec::new();
    for j in j_min..=j_max {
        let o = c.octave(j).ok_or_else(|| Error::InsufficientData {
            reason: format!("octave {j} was not computed"),
            j_max_achievable: c.octaves.last().map_or(0, |o| o.j),
        })?;
        octaves.push(octave_variance(o, c.n, 2)?);
    }
    Ok(WaveletVariance { n: c.n, octaves })
}

/// Default analysis range `[3, j_max]` where `j_max` is the largest octave
/// with at least 8 coefficients.
pub fn default_octave_range(c: &Coefficients) -> Option<(u32, u32)> {
    let j_max = c.octaves.iter().filter(|o| o.count >= 8).map(|o| o.j).max()?;
    (j_max >= 3).then_some((3, j_max))
}

/// Weights `f_j[i]` such that `Σ_i f_j[i] B(2^j k + i)` equals
/// `∫ B_lin(2^j (u + k)) ψ(u) du`, where `B_lin` linearly interpolates the
/// samples and ψ is taken from the table. Requires `resolution >= j`.
pub fn continuous_filter(table: &PsiTable, j: u32) -> Result<Vec<f64>> {
    if table.resolution < j {
        return Err(Error::InvalidParams(format!(
            "continuous coefficients at octave {j} need resolution >= {j}"
        )));
    }
    // A cell of ψ has width 2^{j-R} <= 1 in sample units.
    let w = (j as f64 - table.resolution as f64).exp2();
    let support = table.psi.len() as f64 * w;
    let width = support.ceil() as usize + 2;
    let mut f = vec![0.0; width];
    // Antiderivative of the hat function Λ(x) = max(0, 1 - |x|).
    let hat_cdf = |x: f64| -> f64 {
        if x <= -1.0 {
            0.0
        } else if x <= 0.0 {
            0.5 * (x + 1.0) * (x + 1.0)
        } else if x <= 1.0 {
            1.0 - 0.5 * (1.0 - x) * (1.0 - x)
        } else {
            1.0
        }
    };
    // B_lin(t) = Σ_i B(i) Λ(t - i); dt = 2^j du.
    let du_per_dt = (-(j as f64)).exp2();
    for (m, &v) in table.psi.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let a = m as f64 * w;
        let b = a + w;
        let i_lo = (a.floor() as i64 - 1).max(0) as usize;
        let i_hi = (b.ceil() as usize + 1).min(width - 1);
        for i in i_lo..=i_hi {
            let x = i as f64;
            let mass = hat_cdf(b - x) - hat_cdf(a - x);
            f[i] += v * mass * du_per_dt;
        }
    }
    while f.last() == Some(&0.0) {
        f.pop();
    }
    Ok(f)
}

/// Normalized coefficients `D(2^j, k)` from quadrature of the continuous
/// transform of the linearly interpolated path, for `j` in `js`. Only shifts
/// whose support lies inside the sample are kept.
pub fn quadrature_transform(path: &SamplePath, table: &PsiTable, js: &[u32]) -> Result<Coefficients> {
    if path.kind != PathKind::Levels {
        return Err(Error::Kind { expected: "levels" });
    }
    let n = path.n;
    let len = path.len;
    let mut octaves = Vec::with_capacity(js.len());
    for &j in js {
        let f = continuous_filter(table, j)?;
        let step = 1usize << j;
        if len < f.len() {
            return Err(Error::InsufficientData {
                reason: format!("path too short for octave {j}"),
                j_max_achievable: j.saturating_sub(1),
            });
        }
        let count = (len - f.len()) / step + 1;
        let mut vals = vec![0.0; count * n];
        for k in 0..count {
            let base = k * step;
            for (i, &fi) in f.iter().enumerate() {
                let row = &path.values[(base + i) * n..(base + i + 1) * n];
                for c in 0..n {
                    vals[k * n + c] += fi * row[c];
                }
            }
        }
        octaves.push(OctaveCoeffs {
            j,
            count,
            values: vals,
        });
    }
    Ok(Coefficients {
        n,
        octaves,
        normalized: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn levels(values: Vec<f64>, n: usize) -> SamplePath {
        SamplePath::new(n, values, 0, PathKind::Levels).unwrap()
    }

    #[test]
    fn db2_matches_closed_form() {
        let f = daubechies_filters(2, Variant::ExtremalPhase).unwrap();
        let s3 = 3f64.sqrt();
        let d = 4.0 * 2f64.sqrt();
        let expected = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
        for (a, b) in f.h.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        let la = daubechies_filters(2, Variant::LeastAsymmetric).unwrap();
        assert_eq!(la.h, f.h);
    }

    #[test]
    fn filter_invariants_all_orders() {
        for n_psi in 2..=10 {
            for variant in [Variant::ExtremalPhase, Variant::LeastAsymmetric] {
                let f = daubechies_filters(n_psi, variant).unwrap();
                assert_eq!(f.taps(), 2 * n_psi);
                assert_abs_diff_eq!(f.h.iter().sum::<f64>(), 2f64.sqrt(), epsilon = 1e-12);
                assert_abs_diff_eq!(f.g.iter().sum::<f64>(), 0.0, epsilon = 1e-12);
                for m in 0..n_psi {
                    let s: f64 = (0..f.taps() - 2 * m).map(|k| f.h[k] * f.h[k + 2 * m]).sum();
                    let expected = if m == 0 { 1.0 } else { 0.0 };
                    assert!((s - expected).abs() < 1e-12, "n_psi={n_psi} m={m} {s}");
                }
                for q in 0..n_psi as i32 {
                    let s: f64 = f.g.iter().enumerate().map(|(k, g)| (k as f64).powi(q) * g).sum();
                    let scale: f64 = f.g.iter().enumerate().map(|(k, g)| ((k as f64).powi(q) * g).abs()).sum();
                    assert!(s.abs() < 1e-10 * scale.max(1.0), "n_psi={n_psi} q={q} {s}");
                }
            }
        }
    }

    #[test]
    fn unsupported_orders() {
        assert!(matches!(daubechies_filters(1, Variant::ExtremalPhase), Err(Error::UnsupportedFilter(_))));
        assert!(matches!(daubechies_filters(11, Variant::LeastAsymmetric), Err(Error::UnsupportedFilter(_))));
    }

    #[test]
    fn counts_match_pyramid_output() {
        let f = daubechies_filters(2, Variant::ExtremalPhase).unwrap();
        let c = pyramid_raw(&vec![0.0; 1024], 1, &f, 6).unwrap();
        let got: Vec<usize> = c.octaves.iter().map(|o| o.count).collect();
        assert_eq!(got, octave_counts(1024, 4, 6));
    }

    #[test]
    fn constant_and_quadratic_are_annihilated() {
        let f = daubechies_filters(2, Variant::LeastAsymmetric).unwrap();
        assert_eq!(f.g.iter().map(|g| 7.0 * g).sum::<f64>().abs() < 1e-14, true);
        let f3 = daubechies_filters(3, Variant::ExtremalPhase).unwrap();
        for shift in 0..5 {
            let s: f64 = f3.g.iter().enumerate().map(|(k, g)| ((k + shift) as f64).powi(2) * g).sum();
            assert!(s.abs() < 1e-10);
        }
    }

    #[test]
    fn cascade_normalization() {
        let f = daubechies_filters(2, Variant::LeastAsymmetric).unwrap();
        let t = cascade_psi(&f, 10).unwrap();
        assert_abs_diff_eq!(t.a_phi, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.psi_moment(0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.psi_energy(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(t.psi_moment(1), 0.0, epsilon = 1e-4);
        let t11 = cascade_psi(&f, 11).unwrap();
        assert!((t.psi_energy() - t11.psi_energy()).abs() < 1e-5);
        // support [0, 2N-1]
        assert!((t.psi.len() as f64 * t.delta() - 3.0).abs() < 3.0 * t.delta());
    }

    #[test]
    fn cascade_rejects_bad_resolution() {
        let f = daubechies_filters(2, Variant::ExtremalPhase).unwrap();
        assert!(cascade_psi(&f, 0).is_err());
        assert!(cascade_psi(&f, 17).is_err());
    }

    #[test]
    fn pyramid_constant_and_linear() {
        let f = daubechies_filters(2, Variant::LeastAsymmetric).unwrap();
        let c = pyramid(&levels(vec![3.5; 256], 1), &f, 4).unwrap();
        for o in &c.octaves {
            assert!(o.values.iter().all(|v| v.abs() < 1e-12));
        }
        let lin: Vec<f64> = (0..512).map(|k| k as f64).collect();
        let c = pyramid(&levels(lin, 1), &f, 5).unwrap();
        for o in &c.octaves {
            assert!(o.values.iter().all(|v| v.abs() < 1e-10), "octave {}", o.j);
        }
    }

    #[test]
    fn pyramid_counts_and_errors() {
        let f = daubechies_filters(2, Variant::LeastAsymmetric).unwrap();
        let c = pyramid(&levels(vec![0.0; 1024], 1), &f, 6).unwrap();
        let counts: Vec<usize> = c.octaves.iter().map(|o| o.count).collect();
        assert_eq!(counts, vec![511, 254, 126, 62, 30, 14]);
        let err = pyramid(&levels(vec![0.0; 64], 1), &f, 5).unwrap_err();
        assert_eq!(
            err,
            Error::InsufficientData {
                reason: "64 samples cannot support octave 5 with 4 taps".into(),
                j_max_achievable: 4
            }
        );
        let inc = SamplePath::new(1, vec![0.0; 64], 0, PathKind::Increments).unwrap();
        assert!(matches!(pyramid(&inc, &f, 2), Err(Error::Kind { .. })));
    }

    #[test]
    fn energy_is_conserved_per_step() {
        let f = daubechies_filters(3, Variant::ExtremalPhase).unwrap();
        // A compactly supported bump: every coefficient touching it is interior.
        let mut x = vec![0.0; 200];
        for (k, v) in x.iter_mut().enumerate().skip(60).take(50) {
            *v = ((k as f64) * 0.37).sin() + 0.1 * k as f64;
        }
        let a = analysis_step(&x, &f.h);
        let d = analysis_step(&x, &f.g);
        let before: f64 = x.iter().map(|v| v * v).sum();
        let after: f64 = a.iter().chain(&d).map(|v| v * v).sum();
        assert!((before - after).abs() < 1e-10 * before);
    }

    #[test]
    fn normalization_factors() {
        let c = Coefficients {
            n: 1,
            octaves: vec![
                OctaveCoeffs { j: 0, count: 1, values: vec![3.0] },
                OctaveCoeffs { j: 2, count: 1, values: vec![3.0] },
            ],
            normalized: false,
        };
        let c = normalize_coeffs(c);
        assert_eq!(c.octaves[0].values[0], 3.0);
        assert_eq!(c.octaves[1].values[0], 1.5);
    }

    #[test]
    fn variance_of_basis_vectors() {
        let o = OctaveCoeffs { j: 1, count: 2, values: vec![1.0, 0.0, 0.0, 1.0] };
        let w = octave_variance(&o, 2, 2).unwrap();
        assert_eq!(w.w, SymMatrix::identity(2).scale(0.5));
        let single = OctaveCoeffs { j: 1, count: 1, values: vec![2.0, 3.0] };
        let w = octave_variance(&single, 2, 1).unwrap();
        assert_eq!(w.w.upper(), &[4.0, 6.0, 9.0]);
        assert!(matches!(octave_variance(&single, 2, 2), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn continuous_filter_annihilates_polynomials() {
        let f = daubechies_filters(2, Variant::LeastAsymmetric).unwrap();
        let t = cascade_psi(&f, 10).unwrap();
        for j in [1, 3, 5] {
            let w = continuous_filter(&t, j).unwrap();
            let s0: f64 = w.iter().sum();
            let s1: f64 = w.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
            assert!(s0.abs() < 1e-10, "j={j} {s0}");
            assert!(s1.abs() < 1e-6 * (1u64 << j) as f64, "j={j} {s1}");
        }
    }
}
