// SPDX-License-Identifier: Apache-2.0

// Drives the command line pipeline from a scenario file: the same as
// `dce run examples/configs/rigid_translation.toml --out-dir <dir>`.
//
// ```bash
// cargo run --example run_scenario -- examples/configs/static.toml
// ```

use std::path::PathBuf;

use dce_core::cli::{run, GlobalOptions};

pub fn run_example(config: PathBuf, out_dir: PathBuf) -> dce_core::Result<Vec<PathBuf>> {
    let options = GlobalOptions { workers: 2, out_dir: Some(out_dir), tolerance: None };
    let report = run(&config, &options)?;
    print!("{}", report.stdout);
    Ok(report.files)
}

#[allow(dead_code)]
fn main() -> dce_core::Result<()> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let config = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| root.join("examples/configs/rigid_translation.toml"));
    let out = std::env::temp_dir().join("dce-example-run");
    for f in run_example(config, out)? {
        println!("  {}", f.display());
    }
    Ok(())
}
