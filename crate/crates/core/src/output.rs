//! CSV documents. Each one opens with the config's comment header so a file
//! can be traced back to the exact configuration and seed that produced it.

use crate::config::ExperimentConfig;
use crate::lower_bound::{LowerBoundReport, LOWER_BOUND_CSV_COLUMNS};
use crate::market_sim::{SimulationTrace, TRACE_CSV_COLUMNS};
use crate::regret::{RegretReport, REGRET_CSV_COLUMNS, SLOPE_CSV_COLUMNS};

fn document(cfg: &ExperimentConfig, columns: &str, body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> String {
    let mut buf = cfg.csv_header().into_bytes();
    buf.extend_from_slice(columns.as_bytes());
    buf.push(b'\n');
    body(&mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// `n,policy,replications,mean_regret,std_error`.
pub fn regret_csv(cfg: &ExperimentConfig, reports: &[RegretReport]) -> String {
    document(cfg, REGRET_CSV_COLUMNS, |out| {
        reports.iter().try_for_each(|r| r.write_regret_rows(out))
    })
}

/// `policy,slope,intercept,r_squared`.
pub fn slope_csv(cfg: &ExperimentConfig, reports: &[RegretReport]) -> String {
    document(cfg, SLOPE_CSV_COLUMNS, |out| {
        reports.iter().try_for_each(|r| r.write_slope_row(out))
    })
}

/// Per-segment traces, replication ids starting at 0.
pub fn trace_csv(cfg: &ExperimentConfig, traces: &[SimulationTrace]) -> String {
    document(cfg, TRACE_CSV_COLUMNS, |out| {
        traces
            .iter()
            .enumerate()
            .try_for_each(|(rep, t)| t.write_csv_rows(out, rep as u64))
    })
}

pub fn lower_bound_csv(cfg: &ExperimentConfig, reports: &[LowerBoundReport]) -> String {
    document(cfg, LOWER_BOUND_CSV_COLUMNS, |out| {
        reports.iter().try_for_each(|r| r.write_row(out))
    })
}
