//! Polynomial helpers: evaluation and simultaneous root finding.

use num_complex::Complex64;

/// Evaluates a polynomial with coefficients in ascending order at `z`.
pub fn eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn eval_complex(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    // Horner with derivative.
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of a real polynomial (ascending coefficients) via the
/// Aberth-Ehrlich iteration followed by Newton polishing.
///
/// Trailing zero leading coefficients are stripped. Returns an empty vector
/// for constant polynomials.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.len() > 1 && c.last().map_or(false, |&x| x == 0.0) {
        c.pop();
    }
    let degree = c.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    let lead = c[degree];
    let monic: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x / lead, 0.0)).collect();

    // Cauchy bound for the initial circle.
    let radius = 1.0
        + monic[..degree]
            .iter()
            .map(|x| x.norm())
            .fold(0.0_f64, f64::max);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / degree as f64 + 0.4;
            Complex64::from_polar(radius * 0.5 + 0.1, angle)
        })
        .collect();

    for _ in 0..500 {
        let mut max_step = 0.0_f64;
        for i in 0..degree {
            let (p, dp) = eval_complex(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&k| k != i)
                .map(|k| {
                    let d = z[i] - z[k];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-15 {
            break;
        }
    }
    // Newton polishing on the original (non-deflated) polynomial.
    for zi in z.iter_mut() {
        for _ in 0..4 {
            let (p, dp) = eval_complex(&monic, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *zi -= step;
            if step.norm() <= 1e-17 * (1.0 + zi.norm()) {
                break;
            }
        }
    }
    z
}

/// Multiplies two real polynomials with ascending coefficients.
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_quadratic() {
        // (x - 1)(x - 3) = x^2 - 4x + 3
        let mut r = roots(&[3.0, -4.0, 1.0]);
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        assert!((r[1] - Complex64::new(3.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn complex_pair() {
        // x^2 + 1
        let r = roots(&[1.0, 0.0, 1.0]);
        assert_eq!(r.len(), 2);
        for z in r {
            assert!((z.re).abs() < 1e-13);
            assert!((z.im.abs() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn roots_reproduce_polynomial() {
        let c = [2.0, -3.5, 0.25, 1.75, -0.5, 1.0];
        for z in roots(&c) {
            assert!(eval(&c, z).norm() < 1e-10, "residual at {z}");
        }
    }

    #[test]
    fn polynomial_product() {
        assert_eq!(mul(&[1.0, 1.0], &[1.0, 1.0]), vec![1.0, 2.0, 1.0]);
    }
}
