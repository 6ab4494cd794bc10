//! Double integrals `∬ ψ(t) ψ(t') |t - s t' + z|^α dt dt'` for the
//! piecewise-constant wavelet table.
//!
//! Writing `t = Δ(m + U)` and `t' = Δ(m' + U')` turns the integral into
//! `Σ_d c_d Δ^{2+α} E|d + z/Δ + U - sU'|^α` with the correlation
//! `c_d = Σ_{m - s m' = d} ψ_m ψ_{m'}` and `U, U'` uniform on `[0, 1)`. The
//! expectation has a closed form, so the only discretization error is the
//! one already present in the cascade table.
//!
//! Far from the support the sum over `d` is replaced by a multipole
//! expansion around the centre of the correlation, whose first `2 N_ψ`
//! moments vanish exactly.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::wavelet::PsiTable;

/// Series is used beyond this multiple of `1 + s`.
const SERIES_RATIO: f64 = 4.0;
const SERIES_TERMS: usize = 30;
/// Multipole expansion is used once `|X| >= FAR_RATIO * radius`.
const FAR_RATIO: f64 = 2.0;
const FAR_TERMS: usize = 64;

/// Precomputed correlation for a fixed dilation ratio `s = 2^q`.
#[derive(Clone, Debug)]
pub struct PairKernel {
    s: f64,
    resolution: u32,
    d_min: i64,
    corr: Arc<Vec<f64>>,
    /// `E[(U - sU')^k]` for `k < SERIES_TERMS`.
    moments: Vec<f64>,
    /// Expansion centre and radius of `d + U - sU'`, in grid units.
    center: f64,
    radius: f64,
    /// `Σ_d c_d E[((d - center + U - sU') / radius)^k]`.
    far: Vec<f64>,
}

impl PairKernel {
    pub fn new(table: &PsiTable, q: u32) -> Self {
        let s_int = 1usize << q;
        let psi = &table.psi;
        let l = psi.len();
        let up_len = s_int * (l - 1) + 1;
        let size = (l + up_len - 1).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let mut a: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); size];
        let mut b = a.clone();
        for (m, &v) in psi.iter().enumerate() {
            a[m].re = v;
            b[m * s_int].re = v;
        }
        fwd.process(&mut a);
        fwd.process(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y.conj();
        }
        inv.process(&mut a);
        // c_d = Σ_n ψ[n + d] u[n], d in [-(up_len - 1), l - 1]
        let d_min = -(up_len as i64 - 1);
        let d_max = l as i64 - 1;
        let norm = 1.0 / size as f64;
        let corr: Vec<f64> = (d_min..=d_max)
            .map(|d| {
                let idx = if d >= 0 { d as usize } else { (size as i64 + d) as usize };
                a[idx].re * norm
            })
            .collect();
        let s = s_int as f64;
        let moments = difference_moments(s);
        let center = 0.5 * (d_min + d_max) as f64 + 0.5 * (1.0 - s);
        let radius = 0.5 * (d_max - d_min) as f64 + 0.5 * (1.0 + s);
        let far = far_moments(&corr, d_min, center, radius, s, 2 * table.filters.n_psi);
        PairKernel {
            s,
            resolution: table.resolution,
            d_min,
            corr: Arc::new(corr),
            moments,
            center,
            radius,
            far,
        }
    }

    /// Smallest `|z|` at which [`PairKernel::integral`] switches to the
    /// multipole expansion.
    pub fn far_threshold(&self) -> i64 {
        let grid = (self.resolution as f64).exp2();
        ((FAR_RATIO * self.radius + self.center.abs()) / grid).ceil() as i64
    }

    pub fn ratio(&self) -> f64 {
        self.s
    }

    /// `∬ ψ(t) ψ(t') |t - s t' + z|^α dt dt'` for integer `z`.
    pub fn integral(&self, alpha: f64, z: i64) -> f64 {
        let shift = z * (1i64 << self.resolution);
        let delta = (-(self.resolution as f64)).exp2();
        let big_x = shift as f64 + self.center;
        if big_x.abs() >= FAR_RATIO * self.radius {
            return self.far_field(alpha, big_x) * delta.powf(2.0 + alpha);
        }
        let mut acc = 0.0;
        // Terms in the series regime share the pattern |x|^α Σ b_k m_k x^{-k}.
        let coefs = series_coefs(alpha, &self.moments);
        let threshold = SERIES_RATIO * (1.0 + self.s);
        for (i, &c) in self.corr.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let x = (self.d_min + i as i64 + shift) as f64;
            let t = if x.abs() >= threshold {
                series_mean(x, alpha, &coefs)
            } else {
                closed_mean(x, alpha, self.s)
            };
            acc += c * t;
        }
        acc * delta.powf(2.0 + alpha)
    }

    /// `Σ_d c_d E|X + y_d|^α = |X|^α Σ_k binom(α, k) (radius / X)^k far_k`.
    fn far_field(&self, alpha: f64, big_x: f64) -> f64 {
        let r = self.radius / big_x;
        let mut b = 1.0;
        let mut pow = 1.0;
        let mut sum = 0.0;
        for (k, &m) in self.far.iter().enumerate() {
            if k > 0 {
                b *= (alpha - (k as f64 - 1.0)) / k as f64;
                pow *= r;
            }
            sum += b * pow * m;
        }
        big_x.abs().powf(alpha) * sum
    }
}

/// Scaled moments of the correlation, `Σ_d c_d E[((d - center + S)/radius)^k]`,
/// with the first `vanishing` set to their exact value zero.
fn far_moments(corr: &[f64], d_min: i64, center: f64, radius: f64, s: f64, vanishing: usize) -> Vec<f64> {
    // Discrete moments of the centred lags.
    let mut disc = vec![0.0; FAR_TERMS];
    for (i, &c) in corr.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let y = (d_min as f64 + i as f64 - center) / radius;
        let mut p = c;
        for m in disc.iter_mut() {
            *m += p;
            p *= y;
        }
    }
    // Moments of S / radius with S = U - sU'.
    let sm: Vec<f64> = (0..FAR_TERMS)
        .map(|k| {
            (0..=k)
                .map(|i| {
                    binom_int(k, i) / (i as f64 + 1.0) * (-s).powi((k - i) as i32) / ((k - i) as f64 + 1.0)
                })
                .sum::<f64>()
                / radius.powi(k as i32)
        })
        .collect();
    (0..FAR_TERMS)
        .map(|k| {
            if k < vanishing {
                return 0.0;
            }
            (0..=k).map(|i| binom_int(k, i) * sm[i] * disc[k - i]).sum()
        })
        .collect()
}

fn binom_int(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `E[(U - sU')^k]` for `k < SERIES_TERMS`.
fn difference_moments(s: f64) -> Vec<f64> {
    (0..SERIES_TERMS)
        .map(|k| {
            (0..=k)
                .map(|i| {
                    binom_int(k, i) / (i as f64 + 1.0) * (-s).powi((k - i) as i32)
                        / ((k - i) as f64 + 1.0)
                })
                .sum()
        })
        .collect()
}

/// `binom(α, k) E[S^k]`, the coefficients of `E|x + S|^α = |x|^α Σ_k c_k x^{-k}`.
fn series_coefs(alpha: f64, moments: &[f64]) -> Vec<f64> {
    let mut b = 1.0;
    moments
        .iter()
        .enumerate()
        .map(|(k, m)| {
            if k > 0 {
                b *= (alpha - (k as f64 - 1.0)) / k as f64;
            }
            b * m
        })
        .collect()
}

/// `E|x + U - sU'|^α` from the second antiderivative `|y|^{α+2}/((α+1)(α+2))`.
fn closed_mean(x: f64, alpha: f64, s: f64) -> f64 {
    let p = alpha + 2.0;
    let phi2 = |y: f64| y.abs().powf(p);
    (phi2(x + 1.0) - phi2(x + 1.0 - s) - phi2(x) + phi2(x - s)) / (s * (alpha + 1.0) * (alpha + 2.0))
}

fn series_mean(x: f64, alpha: f64, coefs: &[f64]) -> f64 {
    let inv = 1.0 / x;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for &c in coefs {
        sum += c * pow;
        pow *= inv;
    }
    x.abs().powf(alpha) * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::{cascade_psi, daubechies_filters, Variant};

    #[test]
    fn closed_form_matches_series_in_overlap() {
        for s in [1.0, 2.0, 8.0] {
            let moments = difference_moments(s);
            for alpha in [0.4, 1.1, 1.7] {
                let coefs = series_coefs(alpha, &moments);
                for &x in &[5.0 * (1.0 + s), -6.0 * (1.0 + s)] {
                    let a = closed_mean(x, alpha, s);
                    let b = series_mean(x, alpha, &coefs);
                    assert!((a - b).abs() < 1e-11 * a.abs(), "s={s} alpha={alpha} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn closed_form_against_brute_force() {
        // midpoint rule on a fine grid
        let (x, alpha, s): (f64, f64, f64) = (0.3, 0.7, 2.0);
        let m = 2000;
        let mut acc = 0.0;
        for i in 0..m {
            for k in 0..m {
                let u = (i as f64 + 0.5) / m as f64;
                let v = (k as f64 + 0.5) / m as f64;
                acc += (x + u - s * v).abs().powf(alpha);
            }
        }
        acc /= (m * m) as f64;
        assert!((acc - closed_mean(x, alpha, s)).abs() < 1e-5);
    }

    #[test]
    fn alpha_two_gives_minus_twice_first_moment_squared() {
        // ∬ψψ (t - t')^2 = -2 (∫ t ψ)^2 = 0 for vanishing first moment.
        let f = daubechies_filters(2, Variant::LeastAsymmetric).unwrap();
        let t = cascade_psi(&f, 8).unwrap();
        let k = PairKernel::new(&t, 0);
        assert!(k.integral(2.0, 0).abs() < 1e-9);
        assert!(k.integral(2.0, 5).abs() < 1e-9);
    }

    #[test]
    fn far_field_continues_near_field() {
        let f = daubechies_filters(2, Variant::LeastAsymmetric).unwrap();
        let t = cascade_psi(&f, 7).unwrap();
        for q in [0, 2] {
            let k = PairKernel::new(&t, q);
            let z0 = k.far_threshold();
            for alpha in [0.5, 1.7] {
                // Direct evaluation just past the threshold.
                let direct = |z: i64| {
                    let shift = z * (1i64 << k.resolution);
                    let coefs = series_coefs(alpha, &k.moments);
                    let mut acc = 0.0;
                    for (i, &c) in k.corr.iter().enumerate() {
                        let x = (k.d_min + i as i64 + shift) as f64;
                        acc += c * if x.abs() >= SERIES_RATIO * (1.0 + k.s) {
                            series_mean(x, alpha, &coefs)
                        } else {
                            closed_mean(x, alpha, k.s)
                        };
                    }
                    acc * (-(k.resolution as f64)).exp2().powf(2.0 + alpha)
                };
                for z in [z0, z0 + 3, -z0 - 1] {
                    let a = direct(z);
                    let b = k.integral(alpha, z);
                    assert!((a - b).abs() <= 1e-7 * a.abs() + 1e-15, "q={q} alpha={alpha} z={z}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn correlation_matches_direct_sum() {
        let f = daubechies_filters(2, Variant::ExtremalPhase).unwrap();
        let t = cascade_psi(&f, 5).unwrap();
        let k = PairKernel::new(&t, 1);
        let psi = &t.psi;
        for (i, &c) in k.corr.iter().enumerate() {
            let d = k.d_min + i as i64;
            let direct: f64 = (0..psi.len())
                .filter_map(|mp| {
                    let m = d + 2 * mp as i64;
                    (0..psi.len() as i64).contains(&m).then(|| psi[m as usize] * psi[mp])
                })
                .sum();
            assert!((direct - c).abs() < 1e-10);
        }
    }
}
