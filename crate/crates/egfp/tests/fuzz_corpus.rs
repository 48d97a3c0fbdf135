//! Replays the fuzz seed corpora through the fuzz checks, plus a fixed number
//! of deterministic byte-level mutations of every seed.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[path = "../../../fuzz/src/lib.rs"]
mod checks;

const MUTATIONS_PER_SEED: usize = 256;

type Check = fn(&[u8]);

const TARGETS: [(&str, Check); 7] = [
    ("spec_json", checks::spec_json),
    ("realization_json", checks::realization_json),
    ("matrix_market", checks::matrix_market),
    ("pencil_import", checks::pencil_import),
    ("golden_text", checks::golden_text),
    ("block_expr", checks::block_expr),
    ("tolerances", checks::tolerances),
];

fn corpus(target: &str) -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<PathBuf> =
        std::fs::read_dir(&dir).unwrap_or_else(|e| panic!("{}: {e}", dir.display())).map(|entry| entry.unwrap().path()).collect();
    files.sort();
    files
}

/// Flip, insert, delete or duplicate a few bytes, keeping the input near valid.
fn mutate(seed: &[u8], rng: &mut ChaCha8Rng) -> Vec<u8> {
    const TOKENS: [&[u8]; 8] = [b"-", b"0", b"9999999999", b"\"", b",", b"]", b"^-1", b"\0"];
    let mut v = seed.to_vec();
    for _ in 0..rng.gen_range(1..4) {
        let at = if v.is_empty() { 0 } else { rng.gen_range(0..v.len()) };
        match rng.gen_range(0..4) {
            0 if !v.is_empty() => v[at] ^= 1 << rng.gen_range(0..8),
            1 => {
                let t = TOKENS[rng.gen_range(0..TOKENS.len())];
                v.splice(at..at, t.iter().copied());
            }
            2 if !v.is_empty() => {
                let end = (at + rng.gen_range(1..8)).min(v.len());
                v.drain(at..end);
            }
            _ => {
                let end = (at + rng.gen_range(1..16)).min(v.len());
                let chunk = v[at..end].to_vec();
                v.splice(at..at, chunk);
            }
        }
    }
    v
}

#[test]
fn every_target_has_seeds() {
    for (target, _) in TARGETS {
        assert!(!corpus(target).is_empty(), "{target}");
    }
}

#[test]
fn seeds_and_mutations_pass_the_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for (target, check) in TARGETS {
        for path in corpus(target) {
            let seed = std::fs::read(&path).unwrap();
            check(&seed);
            for _ in 0..MUTATIONS_PER_SEED {
                let input = mutate(&seed, &mut rng);
                check(&input);
            }
        }
    }
}

#[test]
fn valid_seeds_parse() {
    let spec = std::fs::read_to_string(corpus("spec_json").into_iter().find(|p| p.ends_with("fixed_and_named.json")).unwrap()).unwrap();
    assert!(egfp::io::spec_from_json(&spec).unwrap().validate().is_valid());
    for path in corpus("pencil_import") {
        let text = std::fs::read_to_string(&path).unwrap();
        let parts: Vec<&str> = text.splitn(3, '\0').collect();
        assert!(egfp::io::PencilExport::from_texts(parts[0], parts[1], parts[2]).is_ok(), "{}", path.display());
    }
}
