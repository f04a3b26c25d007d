//! Drives the workbench in-process: a bound sweep over five `n*` columns
//! written as CSV, then read back to recover the configuration.

use longtail_lab::cli::{config_from_table, format_table, run, Mode, RunConfig};

fn main() -> longtail_lab::Result<()> {
    let mut cfg = RunConfig::for_mode(Mode::Bound);
    cfg.n_star = (1..=5).collect();
    let out = run(&cfg)?;
    for line in &out.lines {
        println!("{line}");
    }
    let csv = format_table(&out.rows, &cfg);
    print!("{csv}");
    assert_eq!(config_from_table(&csv)?, cfg);
    Ok(())
}
