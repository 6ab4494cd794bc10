//! Simulation oracles for the asymptotic covariance of the wavelet variance,
//! and end-to-end determinism of the Monte Carlo harness.

use ofbm::asymvar::asym_cov;
use ofbm::experiment::{run_montecarlo, Preset, RunReport};
use ofbm::matfun::vec_sym;
use ofbm::model::{WaveletSpectrum, DEFAULT_RESOLUTION};
use ofbm::synth::OfgnGenerator;
use ofbm::wavelet::{cascade_psi, daubechies_filters, pyramid, wavelet_variance, Variant};
use rayon::prelude::*;

#[test]
fn isserlis_blocks_match_simulated_covariance() {
    let params = Preset::Fig2.params();
    let filters = daubechies_filters(2, Variant::LeastAsymmetric).unwrap();
    let table = cascade_psi(&filters, DEFAULT_RESOLUTION).unwrap();
    let spec = WaveletSpectrum::new(&params, &table).unwrap();
    let octaves = [5u32, 6];
    let cov = asym_cov(&spec, &octaves).unwrap();

    let len = 1 << 14;
    let gen = OfgnGenerator::new(&params, len).unwrap();
    let reps = 800;
    // Rows: sqrt(K_j) vec_sym(W(2^j)) stacked over both octaves.
    let samples: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let path = gen.generate_levels(50_000 + r as u64);
            let wv = wavelet_variance(&pyramid(&path, &filters, 6).unwrap(), 5, 6).unwrap();
            wv.octaves
                .iter()
                .flat_map(|o| {
                    let k = (o.count as f64).sqrt();
                    vec_sym(&o.w).into_iter().map(move |v| k * v)
                })
                .collect()
        })
        .collect();
    let d = samples[0].len();
    let mean: Vec<f64> = (0..d).map(|i| samples.iter().map(|s| s[i]).sum::<f64>() / reps as f64).collect();
    let emp = |a: usize, b: usize| {
        samples.iter().map(|s| (s[a] - mean[a]) * (s[b] - mean[b])).sum::<f64>() / (reps - 1) as f64
    };
    let max = cov.f.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut checked = 0;
    for a in 0..d {
        for b in 0..d {
            let g = cov.f[a][b];
            if g.abs() > 0.05 * max {
                let e = emp(a, b);
                assert!((e - g).abs() <= 0.2 * g.abs(), "entry ({a},{b}): simulated {e:.4e}, predicted {g:.4e}");
                checked += 1;
            }
        }
    }
    assert!(checked >= d * d / 2, "only {checked} entries were large enough to compare");
}

fn small_run(threads: usize) -> RunReport {
    let mut c = Preset::Fig3.config();
    c.len = 1 << 12;
    c.replicates = 12;
    c.seed = 77;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| run_montecarlo(&c).unwrap())
}

#[test]
fn reports_are_byte_identical_across_thread_counts() {
    let a = small_run(1);
    let b = small_run(3);
    assert_eq!(a.deterministic_json(), b.deterministic_json());
    assert_eq!(a.replicates.len(), 12);
}

#[test]
fn report_survives_json_round_trip() {
    let r = small_run(2);
    let s = serde_json::to_string(&r).unwrap();
    let back: RunReport = serde_json::from_str(&s).unwrap();
    assert_eq!(back.deterministic_json(), r.deterministic_json());
}
