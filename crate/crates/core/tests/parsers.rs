use proptest::prelude::*;
use scc_core::experiment::{parse_config, parse_override, read_sweep_csv, ExperimentConfig};
use std::path::PathBuf;

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    files.sort();
    assert!(!files.is_empty(), "{}", dir.display());
    files
}

fn config_round_trip(text: &str) {
    if let Ok(pairs) = parse_config(text) {
        let rendered: String = pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(parse_config(&rendered).unwrap(), pairs);
        let _ = ExperimentConfig::from_pairs(&pairs);
    }
}

fn override_round_trip(text: &str) {
    if let Ok((key, value)) = parse_override(text) {
        let again = parse_override(&format!("{key}={value}")).unwrap();
        assert_eq!(again, (key, value));
    }
}

fn csv_fixed_point(text: &str) {
    if let Ok(table) = read_sweep_csv(text) {
        let written = table.to_csv().unwrap();
        let again = read_sweep_csv(&written).unwrap();
        assert_eq!(again.to_csv().unwrap(), written);
    }
}

#[test]
fn corpus_seeds_satisfy_fuzz_properties() {
    let mut accepted = 0;
    for (_, text) in corpus("parse_config") {
        config_round_trip(&text);
        accepted += usize::from(parse_config(&text).is_ok());
    }
    assert!(accepted >= 3);
    for (_, text) in corpus("parse_override") {
        override_round_trip(&text);
    }
    for (path, text) in corpus("read_sweep_csv") {
        assert!(read_sweep_csv(&text).is_ok(), "{}", path.display());
        csv_fixed_point(&text);
    }
}

#[test]
fn config_rejections() {
    assert!(parse_config("a = 1\na = 2\n").is_err());
    assert!(parse_config("just words\n").is_err());
    assert!(parse_config("Key = 1\n").is_err());
    assert!(parse_config("k =\n").is_err());
    assert_eq!(parse_config("# only\n\n  \n").unwrap(), vec![]);
    let cfg = ExperimentConfig::load("q = 4/3 # exact\n", &[]).unwrap();
    assert_eq!(cfg.q, 4.0 / 3.0);
    assert!(ExperimentConfig::load("", &[("bogus".into(), "1".into())]).is_err());
    assert!(ExperimentConfig::load("n_bosons = 3\n", &[]).is_err());
}

#[test]
fn overrides_replace_file_values() {
    let o = parse_override("t=0.03").unwrap();
    let cfg = ExperimentConfig::load("t = 0.006\nomega = 500\n", &[o]).unwrap();
    assert_eq!((cfg.t, cfg.omega), (0.03, 500.0));
}

proptest! {
    #[test]
    fn arbitrary_config_text(text in "[ -~\n]{0,200}") {
        config_round_trip(&text);
    }

    #[test]
    fn structured_config_text(
        lines in prop::collection::vec(("[a-z_]{1,8}", "[ -~&&[^#]]{0,12}", "( #[ -~]{0,6})?"), 0..8)
    ) {
        let text: String = lines.iter().map(|(k, v, c)| format!("{k} = {v}{c}\n")).collect();
        config_round_trip(&text);
    }

    #[test]
    fn arbitrary_overrides(text in "[ -~]{0,40}") {
        override_round_trip(&text);
    }

    #[test]
    fn arbitrary_csv(text in "([-#a-z0-9.,;=\" e]{0,30}\n){0,8}") {
        csv_fixed_point(&text);
    }
}
