//! Drive the command-line front end in-process: write a config, run the
//! `master` and `steady` subcommands into a temporary directory and show the
//! manifest.
//!
//! ```text
//! cargo run --release --example cli_run
//! ```

fn main() -> nmqsd::Result<()> {
    let dir = std::env::temp_dir().join(format!("nmqsd-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("run.json");
    std::fs::write(
        &config,
        r#"{
  "params": {"omega_s": 1.0, "lambda": 1.0, "gamma": 1.0, "Omega": 0.0},
  "initial_state": "10",
  "model": "zeroth",
  "dt": 0.01,
  "T": 30.0,
  "output_stride": 100
}"#,
    )?;
    let cfg = config.to_str().expect("utf-8 path");
    for (cmd, out) in [("master", "master.csv"), ("steady", "steady.json")] {
        let out = dir.join(out);
        let code = nmqsd::cli::main_with_args(["nmqsd", cmd, "--config", cfg, "--output", out.to_str().unwrap()]);
        println!("nmqsd {cmd} -> exit {code}");
    }
    let bad = nmqsd::cli::main_with_args(["nmqsd", "master", "--config", cfg, "--override", "model=weak2"]);
    println!("nmqsd master --override model=weak2 -> exit {bad}");

    println!("\n{}", std::fs::read_to_string(dir.join("steady.json"))?);
    println!("{}", std::fs::read_to_string(dir.join("master.manifest.json"))?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
