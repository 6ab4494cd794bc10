use ofbm::experiment::{ExperimentConfig, Preset};
use ofbm::io::{read_json, read_path, write_json, write_path, WaveletVarianceRecord};
use ofbm::model::ParamsFile;
use ofbm::synth::{ofgn_to_ofbm, synth_ofgn, PathKind};
use ofbm::wavelet::{daubechies_filters, pyramid, wavelet_variance, Variant};

#[test]
fn synthesized_paths_round_trip_in_both_formats() {
    let params = Preset::Fig4.params();
    let pf = ParamsFile::from_params(&params);
    let inc = synth_ofgn(&params, 1000, 4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for name in ["p.csv", "p.bin"] {
        let f = dir.path().join(name);
        write_path(&f, &inc, Some(&pf)).unwrap();
        let (back, meta) = read_path(&f).unwrap();
        assert_eq!(back, inc);
        let meta = meta.unwrap();
        assert_eq!(meta.kind, PathKind::Increments);
        assert_eq!(meta.params.unwrap().to_params().unwrap(), params);
    }
}

#[test]
fn wavelet_variance_report_round_trips() {
    let params = Preset::Fig2.params();
    let path = ofgn_to_ofbm(&synth_ofgn(&params, 4096, 1).unwrap()).unwrap();
    let c = pyramid(&path, &daubechies_filters(2, Variant::LeastAsymmetric).unwrap(), 8).unwrap();
    let wv = wavelet_variance(&c, 3, 8).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("wv.json");
    write_json(&f, &WaveletVarianceRecord::from(&wv)).unwrap();
    let back: WaveletVarianceRecord = read_json(&f).unwrap();
    assert_eq!(back.to_variance().unwrap(), wv);
}

#[test]
fn experiment_files_round_trip_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    for pr in Preset::ALL {
        let mut c = pr.config();
        c.qq_octave = Some(7);
        let f = dir.path().join(format!("{pr}.toml"));
        std::fs::write(&f, c.to_toml()).unwrap();
        let back = ExperimentConfig::from_toml(&std::fs::read_to_string(&f).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.params().unwrap(), pr.params());
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    let mut text = Preset::Fig2.config().to_toml();
    text.push_str("replicatez = 3\n");
    assert!(ExperimentConfig::from_toml(&text).is_err());
}
