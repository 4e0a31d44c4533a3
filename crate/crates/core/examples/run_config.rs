//! Running an experiment from a config, as `ghlab run` does, and checking
//! that the report is reproducible byte for byte.

use ghlab::cli::{parse_params, run_experiment, ExperimentConfig, Outputs};

fn main() -> ghlab::Result<()> {
    let cfg = ExperimentConfig { experiment: "sandwich".into(), params: parse_params("eps=1;0.5")?, seed: 0, outputs: Outputs::default() };
    let first = run_experiment(&cfg)?;
    let again = run_experiment(&cfg)?;
    println!("{}", first.table.to_csv()?);
    println!("pass: {}, reproducible: {}", first.report.pass, first.report.to_json()? == again.report.to_json()?);
    println!("config as JSON: {}", serde_json::to_string(&cfg)?);
    Ok(())
}
