//! CSV and aligned-markdown renderings of sweep results.
//!
//! CSV files start with one `# config: {...}` comment line holding the
//! resolved run configuration as JSON, followed by a header row.

use std::io::Write;

use crate::error::Result;
use crate::experiments::bench::BenchTable;
use crate::experiments::convergence::ConvergenceTable;

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(String::new, |x| format!("{x:.digits$}"))
}

/// Pipe table with every column padded to its widest cell.
pub fn markdown_table(headers: &[String], rows: &[Vec<String>]) -> String {
    let ncol = headers.len();
    let mut width: Vec<usize> = headers.iter().map(|h| h.chars().count().max(3)).collect();
    for r in rows {
        for (j, c) in r.iter().enumerate().take(ncol) {
            width[j] = width[j].max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = (0..ncol)
            .map(|j| {
                let c = cells.get(j).map_or("", String::as_str);
                format!("{c:>w$}", w = width[j])
            })
            .collect();
        format!("| {} |\n", padded.join(" | "))
    };
    let mut s = line(headers);
    let sep: Vec<String> = width.iter().map(|&w| format!("{}:", "-".repeat(w - 1))).collect();
    s.push_str(&format!("| {} |\n", sep.join(" | ")));
    for r in rows {
        s.push_str(&line(r));
    }
    s
}

fn write_config_line<W: Write>(w: &mut W, config: &serde_json::Value) -> Result<()> {
    writeln!(w, "# config: {config}")?;
    Ok(())
}

pub fn convergence_csv<W: Write>(t: &ConvergenceTable, config: &serde_json::Value, mut w: W) -> Result<()> {
    write_config_line(&mut w, config)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scheme", "K", "N", "energy_error", "pressure_error", "energy_rate", "pressure_rate", "failure"])?;
    for c in &t.cells {
        out.write_record([
            t.scheme.to_string(),
            format!("{:e}", c.permeability),
            c.n.to_string(),
            fmt_opt(c.errors.map(|e| e.energy), 8),
            fmt_opt(c.errors.map(|e| e.pressure), 8),
            fmt_opt(c.energy_rate, 4),
            fmt_opt(c.pressure_rate, 4),
            c.failure.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One row per permeability; error and rate columns per mesh size.
pub fn convergence_markdown(t: &ConvergenceTable) -> String {
    let mut s = format!("Scheme: {}\n\n", t.scheme);
    for (label, pick) in [("energy", 0usize), ("pressure", 1)] {
        let mut headers = vec![format!("K \\ N ({label})")];
        for (j, n) in t.sizes.iter().enumerate() {
            headers.push(n.to_string());
            if j > 0 {
                headers.push("rate".into());
            }
        }
        let rows: Vec<Vec<String>> = t
            .permeabilities
            .iter()
            .enumerate()
            .map(|(i, k)| {
                let mut r = vec![format!("{k:e}")];
                for j in 0..t.sizes.len() {
                    let c = t.cell(i, j);
                    let (e, rate) = if pick == 0 {
                        (c.errors.map(|e| e.energy), c.energy_rate)
                    } else {
                        (c.errors.map(|e| e.pressure), c.pressure_rate)
                    };
                    r.push(if c.failure.is_some() { "failed".into() } else { fmt_opt(e, 4) });
                    if j > 0 {
                        r.push(fmt_opt(rate, 2));
                    }
                }
                r
            })
            .collect();
        s.push_str(&markdown_table(&headers, &rows));
        s.push('\n');
    }
    s
}

pub fn bench_csv<W: Write>(t: &BenchTable, config: &serde_json::Value, mut w: W) -> Result<()> {
    write_config_line(&mut w, config)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "case", "row", "column", "N", "lambda", "mu", "alpha", "M", "K", "tau", "preconditioner", "mean_iterations",
        "iterations", "converged", "inner_iterations", "inner_cap_hits", "failure",
    ])?;
    for c in &t.cells {
        let p = &t.points[c.point];
        let its: Vec<String> = c.iterations.iter().map(usize::to_string).collect();
        out.write_record([
            serde_json::to_value(p.case)?.as_str().unwrap_or_default().to_string(),
            p.row.clone(),
            p.column.clone(),
            p.n.to_string(),
            format!("{:e}", p.params.lambda),
            format!("{:e}", p.params.mu),
            p.params.alpha.to_string(),
            format!("{:e}", p.params.biot_modulus),
            format!("{:e}", p.params.permeability),
            p.params.tau.to_string(),
            c.variant.clone(),
            c.mean.map_or_else(String::new, |m| m.to_string()),
            its.join(" "),
            c.converged.to_string(),
            c.inner.map_or_else(String::new, |s| s.iterations.to_string()),
            c.inner.map_or_else(String::new, |s| s.cap_hits.to_string()),
            c.failure.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Groups points by row header; one line per preconditioner, one column per
/// point. Cells that did not converge are marked `nc`.
pub fn bench_markdown(t: &BenchTable) -> String {
    let mut s = String::new();
    if let Some(id) = t.table {
        s.push_str(&format!("Table {id}\n\n"));
    }
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, p) in t.points.iter().enumerate() {
        match groups.iter_mut().find(|(r, _)| *r == p.row) {
            Some((_, v)) => v.push(i),
            None => groups.push((p.row.clone(), vec![i])),
        }
    }
    for (row, idx) in groups {
        let mut headers = vec![row];
        headers.extend(idx.iter().map(|&i| t.points[i].column.clone()));
        let rows: Vec<Vec<String>> = t
            .variants
            .iter()
            .map(|v| {
                let mut r = vec![v.clone()];
                for &i in &idx {
                    r.push(match t.cell(i, v) {
                        Some(c) => c.mean.map_or_else(|| "nc".to_string(), |m| m.to_string()),
                        None => String::new(),
                    });
                }
                r
            })
            .collect();
        s.push_str(&markdown_table(&headers, &rows));
        s.push('\n');
    }
    s
}
