//! Trace and sweep serialization. Numbers use the shortest decimal
//! representation that round-trips, so byte-identical files certify
//! bit-identical runs.

use std::fmt::Write as _;

use predictorlab::{ConditionReport, MonitorReport, SimTrace, SweepResult};

/// Renders the trace as CSV with the fixed column layout
/// `t,x1..xn,z1..zn,w,u,y,d,xi,m24,m214,m223,m224`. Monitor columns are NaN
/// when the monitors were disabled.
pub fn trace_csv(trace: &SimTrace, monitors: Option<&MonitorReport>) -> String {
    let n = trace.n;
    let mut out = String::with_capacity(trace.rows.len() * 128);
    out.push('t');
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",z{i}");
    }
    out.push_str(",w,u,y,d,xi,m24,m214,m223,m224\n");

    for (idx, row) in trace.rows.iter().enumerate() {
        let _ = write!(out, "{}", row.t);
        for i in 0..n {
            let _ = write!(out, ",{}", row.x[i]);
        }
        for i in 0..n {
            let _ = write!(out, ",{}", row.z[i]);
        }
        let _ = write!(out, ",{},{},{},{},{}", row.w, row.u, row.y, row.d, row.xi);
        match monitors {
            Some(report) => {
                let m = report.per_row[idx];
                let _ = write!(out, ",{},{},{},{}", m[0], m[1], m[2], m[3]);
            }
            None => out.push_str(",NaN,NaN,NaN,NaN"),
        }
        out.push('\n');
    }
    out
}

/// Sweep results as CSV: one row per grid point, axis columns first.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    for axis in &result.axes {
        let _ = write!(out, "{},", axis.label());
    }
    out.push_str("success,decay_rate,r_squared,sup_state,c17,c18,c19,c20,c21\n");
    for point in &result.points {
        for v in &point.coords {
            let _ = write!(out, "{v},");
        }
        let _ = write!(
            out,
            "{},{},{},{}",
            point.success, point.decay_rate, point.r_squared, point.sup_state
        );
        for m in &point.condition_margins {
            let _ = write!(out, ",{m}");
        }
        out.push('\n');
    }
    out
}

/// Human-readable condition table.
pub fn condition_table(report: &ConditionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<26} {:>14} {:>14} {:>14}  pass",
        "condition", "lhs", "rhs", "margin"
    );
    for entry in &report.entries {
        let _ = writeln!(
            out,
            "{:<26} {:>14.6e} {:>14.6e} {:>14.6e}  {}",
            entry.id.label(),
            entry.lhs,
            entry.rhs,
            entry.margin,
            if entry.pass { "yes" } else { "NO" }
        );
    }
    out
}
