//! Tables and SVG panels written by `montecarlo` and `reproduce`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ofbm::estim::{p_from_w, EigenEstimates};
use ofbm::experiment::{analyze_replicate, log_scale_diagram, run_montecarlo, ExperimentConfig, LogScaleDiagram, Preset, RunReport};
use ofbm::io::write_json;
use ofbm::plot::{Panel, Series};
use ofbm::stats;
use ofbm::synth::{replicate_seed, OfgnGenerator};
use ofbm::wavelet::{pyramid, wavelet_variance, WaveletVariance};
use ofbm::Result;
use rayon::prelude::*;
use serde_json::json;

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

fn write_text(file: &Path, text: &str) -> Result<()> {
    fs::write(file, text)?;
    Ok(())
}

pub fn write_log_scale_csv(file: &Path, wv: &WaveletVariance, d: &LogScaleDiagram) -> Result<()> {
    let n = wv.n;
    let mut s = String::from("j,count");
    for p in 1..=n {
        let _ = write!(s, ",log2_lambda{p}");
    }
    for (a, b) in ofbm::matfun::vec_sym_slots(n) {
        let _ = write!(s, ",log2_w{}{}", a + 1, b + 1);
    }
    s.push('\n');
    for (i, o) in wv.octaves.iter().enumerate() {
        let _ = write!(s, "{},{}", o.j, o.count);
        for p in 0..n {
            let _ = write!(s, ",{:e}", d.log2_eigen[p][i]);
        }
        for e in &d.log2_entries {
            let _ = write!(s, ",{:e}", e[i]);
        }
        s.push('\n');
    }
    write_text(file, &s)
}

pub fn estimate_table(est: &EigenEstimates) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:>3} {:>8}", "j", "K");
    for p in 1..=est.n {
        let _ = write!(s, " {:>10}", format!("h{p}"));
    }
    let _ = writeln!(s, " {:>10}", "theta");
    for o in &est.scales {
        match &o.estimate {
            Some(e) => {
                let _ = write!(s, "{:>3} {:>8}", o.octave, e.count);
                for h in &e.h {
                    let _ = write!(s, " {h:>10.5}");
                }
                let th = e.theta.map_or_else(|| "-".to_string(), |t| format!("{t:.5}"));
                let _ = writeln!(s, " {th:>10}");
            }
            None => {
                let _ = writeln!(s, "{:>3} error: {}", o.octave, o.error.as_deref().unwrap_or(""));
            }
        }
    }
    s
}

fn means_csv(r: &RunReport) -> String {
    let n = r.config.n;
    let mut s = String::from("octave,count,ok");
    for p in 1..=n {
        let _ = write!(s, ",mean_h{p},sd_h{p},center_h{p},var_std_h{p},var_pred_h{p}");
    }
    s.push_str(",mean_theta,sd_theta,center_theta,var_std_theta,var_pred_theta\n");
    for (a, t) in r.aggregates.iter().zip(&r.theory) {
        let _ = write!(s, "{},{},{}", a.octave, a.count, a.ok);
        for p in 0..n {
            let pred = t.var_h.as_ref().map(|v| v[p]);
            let _ = write!(
                s,
                ",{:e},{:e},{:e},{:e},{}",
                a.mean_h[p],
                a.sd_h[p],
                t.center_h[p],
                a.var_std_h[p],
                fmt_opt(pred)
            );
        }
        let _ = writeln!(
            s,
            ",{},{},{},{},{}",
            fmt_opt(a.mean_theta),
            fmt_opt(a.sd_theta),
            fmt_opt(t.center_theta),
            fmt_opt(a.var_std_theta),
            fmt_opt(t.var_theta)
        );
    }
    s
}

fn estimate_panel(title: &str, y_label: &str, x: &[f64], mean: Vec<f64>, band: Vec<f64>, center: Vec<f64>) -> Panel {
    Panel {
        title: title.into(),
        x_label: "octave j".into(),
        y_label: y_label.into(),
        series: vec![
            Series {
                label: "mean ± sd/√R".into(),
                x: x.to_vec(),
                y: mean,
                band: Some(band),
                ..Default::default()
            },
            Series {
                label: "analytic center".into(),
                x: x.to_vec(),
                y: center,
                dashed: true,
                ..Default::default()
            },
        ],
    }
}

/// Writes the report, tables and panels of a Monte Carlo run; returns a summary.
pub fn write_montecarlo(dir: &Path, r: &RunReport) -> Result<serde_json::Value> {
    let n = r.config.n;
    let mut files: Vec<PathBuf> = Vec::new();
    let mut emit = |name: &str, text: String| -> Result<()> {
        let f = dir.join(name);
        write_text(&f, &text)?;
        files.push(f);
        Ok(())
    };
    emit("means.csv", means_csv(r))?;
    let x: Vec<f64> = r.aggregates.iter().map(|a| a.octave as f64).collect();
    let root = |a: &ofbm::experiment::OctaveAggregate| (a.ok.max(1) as f64).sqrt();
    for p in 0..n {
        let panel = estimate_panel(
            &format!("ĥ{} (R = {})", p + 1, r.config.replicates),
            &format!("log2 λ{}(2^j) / 2j", p + 1),
            &x,
            r.aggregates.iter().map(|a| a.mean_h[p]).collect(),
            r.aggregates.iter().map(|a| a.sd_h[p] / root(a)).collect(),
            r.theory.iter().map(|t| t.center_h[p]).collect(),
        );
        emit(&format!("h{}.svg", p + 1), panel.to_svg())?;
    }
    if n == 2 {
        let panel = estimate_panel(
            "θ̂ = -p̂12/p̂22",
            "θ",
            &x,
            r.aggregates.iter().map(|a| a.mean_theta.unwrap_or(f64::NAN)).collect(),
            r.aggregates.iter().map(|a| a.sd_theta.unwrap_or(0.0) / root(a)).collect(),
            r.theory.iter().map(|t| t.center_theta.unwrap_or(f64::NAN)).collect(),
        );
        emit("theta.svg", panel.to_svg())?;
    }
    let mut qq_summary = Vec::new();
    if let Some(qq) = &r.qq {
        let mut csv = String::from("label,score,value\n");
        for s in &qq.series {
            for (a, b) in s.scores.iter().zip(&s.sorted) {
                let _ = writeln!(csv, "{},{a:e},{b:e}", s.label);
            }
            let lim = s.scores.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let panel = Panel {
                title: format!("qq {} at j = {} (r = {:.4})", s.label, qq.octave, s.correlation),
                x_label: "N(0,1) quantile".into(),
                y_label: "standardized estimate".into(),
                series: vec![
                    Series {
                        label: s.label.clone(),
                        x: s.scores.clone(),
                        y: s.sorted.clone(),
                        points: true,
                        ..Default::default()
                    },
                    Series {
                        label: "y = x".into(),
                        x: vec![-lim, lim],
                        y: vec![-lim, lim],
                        dashed: true,
                        ..Default::default()
                    },
                ],
            };
            emit(&format!("qq_{}.svg", s.label), panel.to_svg())?;
            qq_summary.push(json!({
                "label": s.label,
                "correlation": s.correlation,
                "jarque_bera_pvalue": s.jb_pvalue,
            }));
        }
        emit("qq.csv", csv)?;
    }
    let report = dir.join("report.json");
    write_json(&report, r)?;
    files.push(report);
    Ok(json!({
        "replicates": r.replicates.len(),
        "failures": r.failures,
        "runtime_secs": r.meta.runtime_secs,
        "threads": r.meta.threads,
        "qq_octave": r.qq.as_ref().map(|q| q.octave),
        "qq": qq_summary,
        "files": files,
    }))
}

/// Log-scale diagram of one realization with slope-2h asymptotes.
fn figure1(c: &ExperimentConfig, dir: &Path) -> Result<serde_json::Value> {
    let params = c.params()?;
    let (lo, hi) = c.octave_range()?;
    let path = OfgnGenerator::new(&params, c.len)?.generate_levels(c.seed);
    let wv = wavelet_variance(&pyramid(&path, &c.filters()?, hi)?, lo, hi)?;
    let d = log_scale_diagram(&wv)?;
    write_log_scale_csv(&dir.join("logscale.csv"), &wv, &d)?;
    let x: Vec<f64> = d.octaves.iter().map(|&j| j as f64).collect();
    let mut eig = Vec::new();
    for (p, y) in d.log2_eigen.iter().enumerate() {
        let h = c.h[p];
        let icpt = stats::mean(&x.iter().zip(y).map(|(j, v)| v - 2.0 * h * j).collect::<Vec<_>>());
        eig.push(Series {
            label: format!("log2 λ{}", p + 1),
            x: x.clone(),
            y: y.clone(),
            ..Default::default()
        });
        eig.push(Series {
            label: format!("slope 2h{} = {:.2}", p + 1, 2.0 * h),
            x: x.clone(),
            y: x.iter().map(|j| icpt + 2.0 * h * j).collect(),
            dashed: true,
            ..Default::default()
        });
    }
    let entries = ofbm::matfun::vec_sym_slots(c.n)
        .into_iter()
        .zip(&d.log2_entries)
        .map(|((a, b), y)| Series {
            label: format!("log2 |W{}{}|", a + 1, b + 1),
            x: x.clone(),
            y: y.clone(),
            ..Default::default()
        })
        .collect();
    let panels = [
        ("eigen.svg", "Eigenvalues of W(2^j)", eig),
        ("entries.svg", "Entries of W(2^j)", entries),
    ];
    let mut files = vec![dir.join("logscale.csv")];
    for (name, title, series) in panels {
        let panel = Panel {
            title: title.into(),
            x_label: "octave j".into(),
            y_label: "log2".into(),
            series,
        };
        write_text(&dir.join(name), &panel.to_svg())?;
        files.push(dir.join(name));
    }
    let slopes = json!({
        "octaves": [lo, hi],
        "eigen_slopes": d.eigen_slopes,
        "entry_slopes": d.entry_slopes,
        "h_from_eigen": d.eigen_slopes.iter().map(|s| s / 2.0).collect::<Vec<_>>(),
        "h_from_entries": d.entry_slopes.iter().map(|s| s / 2.0).collect::<Vec<_>>(),
    });
    write_json(&dir.join("slopes.json"), &slopes)?;
    files.push(dir.join("slopes.json"));
    Ok(json!({ "slopes": slopes, "files": files }))
}

/// Recovery of an orthogonal `P` from eigenvectors, averaged over replicates.
fn p_hat_table(c: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let params = c.params()?;
    let filters = c.filters()?;
    let range = c.octave_range()?;
    let gen = OfgnGenerator::new(&params, c.len)?;
    let per_rep: Vec<Option<Vec<[f64; 4]>>> = (0..c.replicates)
        .into_par_iter()
        .map(|r| {
            let wv = analyze_replicate(&gen, &filters, replicate_seed(c.seed, r as u64), range).ok()?;
            wv.octaves
                .iter()
                .map(|o| p_from_w(&o.w).ok().map(|p| [p.get(0, 0), p.get(0, 1), p.get(1, 0), p.get(1, 1)]))
                .collect()
        })
        .collect();
    let ok: Vec<&Vec<[f64; 4]>> = per_rep.iter().flatten().collect();
    let truth = params.hurst().p();
    let truth = [truth.get(0, 0), truth.get(0, 1), truth.get(1, 0), truth.get(1, 1)];
    let names = ["p11", "p12", "p21", "p22"];
    let mut csv = String::from("octave");
    for nm in names {
        let _ = write!(csv, ",mean_{nm},sd_{nm},true_{nm}");
    }
    csv.push('\n');
    let octaves: Vec<f64> = (range.0..=range.1).map(f64::from).collect();
    let mut means = vec![Vec::new(); 4];
    let mut bands = vec![Vec::new(); 4];
    for (i, j) in (range.0..=range.1).enumerate() {
        let _ = write!(csv, "{j}");
        for e in 0..4 {
            let x: Vec<f64> = ok.iter().map(|r| r[i][e]).collect();
            let (m, sd) = (stats::mean(&x), stats::variance(&x).sqrt());
            let _ = write!(csv, ",{m:e},{sd:e},{:e}", truth[e]);
            means[e].push(m);
            bands[e].push(sd / (x.len().max(1) as f64).sqrt());
        }
        csv.push('\n');
    }
    let csv_file = dir.join("p_hat.csv");
    write_text(&csv_file, &csv)?;
    let mut series = Vec::new();
    for e in 0..4 {
        series.push(Series {
            label: format!("{} (true {:.3})", names[e], truth[e]),
            x: octaves.clone(),
            y: means[e].clone(),
            band: Some(bands[e].clone()),
            ..Default::default()
        });
    }
    let panel = Panel {
        title: "P̂ from eigenvectors of W(2^j)".into(),
        x_label: "octave j".into(),
        y_label: "entry".into(),
        series,
    };
    let svg = dir.join("p_hat.svg");
    write_text(&svg, &panel.to_svg())?;
    Ok(vec![csv_file, svg])
}

pub fn reproduce(preset: Preset, c: &ExperimentConfig, dir: &Path) -> Result<serde_json::Value> {
    write_text(&dir.join("config.toml"), &c.to_toml())?;
    match preset {
        Preset::Fig1 => figure1(c, dir),
        Preset::Fig5 => {
            let mut summary = write_montecarlo(dir, &run_montecarlo(c)?)?;
            let extra = p_hat_table(c, dir)?;
            if let Some(files) = summary.get_mut("files").and_then(|f| f.as_array_mut()) {
                files.extend(extra.into_iter().map(|p| json!(p)));
            }
            Ok(summary)
        }
        _ => write_montecarlo(dir, &run_montecarlo(c)?),
    }
}
