// Replays the checked-in fuzz corpus through the same round-trip checks as
// the fuzz targets, so the seeds stay meaningful on stable toolchains.

use std::fs;
use std::path::PathBuf;

use sepcert::io::{matrix_to_string, parse_matrix};
use sepcert::multiparty::{Cut, SeparabilityClass};
use sepcert::polytope::parse_polytope;
use sepcert::states::StateSpec;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn matrix_doc_seeds() {
    let mut ok = 0;
    for (name, text) in seeds("matrix_doc") {
        if let Ok(op) = parse_matrix(&text) {
            let again = parse_matrix(&matrix_to_string(&op)).expect(&name);
            assert_eq!(again.max_abs_diff(&op), 0.0, "{name}");
            ok += 1;
        }
    }
    assert!(ok >= 3);
}

#[test]
fn state_spec_seeds() {
    let mut ok = 0;
    for (name, text) in seeds("state_spec") {
        if let Ok(spec) = text.parse::<StateSpec>() {
            let _ = spec.validate();
            let canon = spec.to_string();
            let back: StateSpec = canon.parse().expect(&name);
            assert_eq!(back.to_string(), canon, "{name}");
            ok += 1;
        }
    }
    assert!(ok >= 10);
}

#[test]
fn polytope_doc_seeds() {
    let mut ok = 0;
    for (name, text) in seeds("polytope_doc") {
        if let Ok(p) = parse_polytope(&text) {
            let q = parse_polytope(&serde_json::to_string(&p.to_doc()).unwrap()).expect(&name);
            assert_eq!((p.len(), p.dims()), (q.len(), q.dims()), "{name}");
            ok += 1;
        }
    }
    assert!(ok >= 2);
}

#[test]
fn class_cut_seeds() {
    let mut ok = 0;
    for (name, text) in seeds("class_cut") {
        if let Ok(class) = text.parse::<SeparabilityClass>() {
            for n in 2..6 {
                let _ = class.validate(n);
            }
            assert_eq!(class.to_string().parse::<SeparabilityClass>().expect(&name), class);
            ok += 1;
        }
        if let Ok(cut) = text.parse::<Cut>() {
            assert_eq!(cut.to_string().parse::<Cut>().expect(&name), cut);
            ok += 1;
        }
    }
    assert!(ok >= 8);
}
