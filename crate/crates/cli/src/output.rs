//! Output files: traces as JSON lines, summaries and tables as CSV with the
//! config snapshot embedded in a leading comment line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use lse_core::runner::{
    summarize, write_trace, ExperimentConfig, ExperimentTrace, SuiteOutcome, SummaryRow,
};

fn config_comment(config: &ExperimentConfig) -> Result<String> {
    Ok(format!(
        "# config: {}",
        serde_json::to_string(config).context("config snapshot serialization")?
    ))
}

pub fn write_traces(dir: &Path, outcome: &SuiteOutcome) -> Result<Vec<std::path::PathBuf>> {
    let mut paths = Vec::new();
    for trace in &outcome.traces {
        let path = dir.join(format!("trace_seed{}.jsonl", trace.seed));
        let file = File::create(&path).with_context(|| format!("create {}", path.display()))?;
        write_trace(trace, BufWriter::new(file))
            .with_context(|| format!("write {}", path.display()))?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn write_summary(path: &Path, config: &ExperimentConfig, rows: &[SummaryRow]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", config_comment(config)?)?;
    writeln!(
        w,
        "iteration,n_active,f_mean,f_std,bound_mean,stopped_proposed,stopped_fc,stopped_fs"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.iteration,
            r.n_active,
            r.f_mean,
            r.f_std,
            r.bound_mean,
            r.stopped_proposed,
            r.stopped_fc,
            r.stopped_fs
        )?;
    }
    Ok(())
}

pub fn summarize_and_write(dir: &Path, config: &ExperimentConfig, outcome: &SuiteOutcome) -> Result<()> {
    let rows = summarize(&outcome.traces);
    write_summary(&dir.join("summary.csv"), config, &rows)
}

/// Stop-time table across sweep values: one row per (value, seed).
pub fn write_stop_times(
    path: &Path,
    axis_name: &str,
    base: &ExperimentConfig,
    sweeps: &[(f64, SuiteOutcome)],
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", config_comment(base)?)?;
    writeln!(
        w,
        "{axis_name},seed,iterations,stop_reason,first_proposed,first_fc,first_fs,f_final"
    )?;
    let opt = |v: Option<usize>| v.map_or(String::new(), |t| t.to_string());
    for (value, outcome) in sweeps {
        for trace in &outcome.traces {
            let f_final = trace.records.last().map_or(f64::NAN, |r| r.f_score);
            writeln!(
                w,
                "{},{},{},{:?},{},{},{},{}",
                value,
                trace.seed,
                trace.records.len(),
                trace.stop_reason,
                opt(trace.first_triggers.proposed),
                opt(trace.first_triggers.fc),
                opt(trace.first_triggers.fs),
                f_final
            )?;
        }
    }
    Ok(())
}

/// Per-iteration bound-vs-estimate table for one verified trace.
pub fn write_verify_table(
    path: &Path,
    config: &ExperimentConfig,
    trace: &ExperimentTrace,
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", config_comment(config)?)?;
    writeln!(w, "iteration,bound,estimate,stderr")?;
    for r in &trace.records {
        if let Some(v) = r.verify {
            writeln!(w, "{},{},{},{}", r.iteration, r.stopping.proposed_bound, v.estimate, v.stderr)?;
        }
    }
    Ok(())
}
