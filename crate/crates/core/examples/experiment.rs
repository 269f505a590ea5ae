//! Runs a configured suite through the library runner (what the `ncindex` binary
//! does) and prints the CSV report.

use ncindex::runner::{run, ExperimentConfig};

fn main() -> ncindex::Result<()> {
    let config = ExperimentConfig::from_json(
        r#"{
            "name": "heat-demo",
            "model": {"manifold": "S1", "N": 24, "pad": 6},
            "suite": "heat",
            "params": {"t": [1, 3], "shifts": [1]},
            "seed": 3
        }"#,
    )?;
    let report = run(&config, Some(2))?;
    print!("{}", report.to_csv_string()?);
    println!("passed: {}", report.passed);
    Ok(())
}
