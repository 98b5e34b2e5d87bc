//! Writes the 64x8 input fixture and its float64 reference output used by
//! the command-line tests.
//!
//! cargo run -p seqsqueeze-core --example oracle_fixture -- crates/cli/tests/fixtures

use std::path::PathBuf;

use seqsqueeze::io::{write_array, write_atomic};
use seqsqueeze::testkit::{generate, oracle_compress, SynthSpec};
use seqsqueeze::{CompressionConfig, KeepRatio, Method, Window};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "crates/cli/tests/fixtures".into()),
    );
    std::fs::create_dir_all(&dir)?;

    let seq = generate(&SynthSpec::gaussian(64, 8, 20240))?;
    write_array(&seq.to_matrix(), dir.join("seq64x8.npy"))?;

    let config = CompressionConfig::new(Method::Ltbm, KeepRatio::new(0.25)?).with_window(Window::Bounded(8));
    let oracle = oracle_compress(&seq, &config)?;
    let passes: Vec<Vec<serde_json::Value>> = oracle
        .passes
        .iter()
        .map(|pass| {
            pass.iter()
                .map(|&(i, j, score)| serde_json::json!({ "i": i, "j": j, "score": score }))
                .collect()
        })
        .collect();
    let fixture = serde_json::json!({
        "config": config,
        "rows": oracle.rows,
        "groups": oracle.groups,
        "passes": passes,
    });
    let path = dir.join("seq64x8.ltbm-r0.25-w8.oracle.json");
    write_atomic(&path, serde_json::to_string_pretty(&fixture)?.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}
