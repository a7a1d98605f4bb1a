//! Run a small scenario and write its record and CSV tables.
//!
//! `cargo run --example run_scenario -- <scenario-id> <out-dir>`

use std::path::PathBuf;

use strongconv::experiments::{emit, run_scenario, EmitFormat, ScenarioId, ScenarioSpec};

fn main() -> strongconv::Result<()> {
    let mut args = std::env::args().skip(1);
    let id: ScenarioId = args.next().as_deref().unwrap_or("nonamen-gap").parse()?;
    let out = PathBuf::from(args.next().unwrap_or_else(|| "scenario-out".into()));
    let mut spec = ScenarioSpec::new(id, 1);
    spec.params.ks = vec![8, 16, 32];
    spec.params.reps = 4;
    let record = run_scenario(&spec)?;
    for (name, table) in &record.tables {
        println!("{name}: {} rows × {} columns", table.rows.len(), table.columns.len());
    }
    for note in &record.notes {
        println!("note: {note}");
    }
    emit(&record, EmitFormat::Json, &out)?;
    for f in emit(&record, EmitFormat::Csv, &out)? {
        println!("wrote {}", f.display());
    }
    println!("{:.2}s", record.wall_clock_seconds);
    Ok(())
}
