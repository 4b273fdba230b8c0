use std::io::Write;
use std::path::Path;

use super::network_file::{load_network, save_network, Metadata};
use super::IoError;
use crate::diagnostics::{AreaLawAudit, BlowupFit, LengthLawSample};
use crate::flow::{DiagnosticSeries, Snapshot, StopReason, Termination, Trajectory};
use crate::geometry::find_loops;
use crate::monotonicity::MonotonicitySample;
use crate::Vec2;

pub const TERMINATION_FILE: &str = "termination.txt";
const DIAGNOSTICS_FILE: &str = "diagnostics.csv";

fn write_file(path: &Path, body: &str) -> Result<(), IoError> {
    std::fs::write(path, body).map_err(|e| IoError::io(path, e))
}

/// diagnostics.csv: one row per step,
/// t,total_length,curvature_sq,curvature_deriv_sq,min_curve_length,max_curvature[,loop_area_i...]
pub fn write_diagnostics_csv(
    series: &DiagnosticSeries,
    out: &mut impl Write,
) -> std::io::Result<()> {
    write!(
        out,
        "t,total_length,curvature_sq,curvature_deriv_sq,min_curve_length,max_curvature"
    )?;
    for i in 0..series.loop_areas.len() {
        write!(out, ",loop_area_{i}")?;
    }
    writeln!(out)?;
    for row in 0..series.len() {
        write!(
            out,
            "{},{},{},{},{},{}",
            series.time[row],
            series.total_length[row],
            series.curvature_sq[row],
            series.curvature_deriv_sq[row],
            series.min_curve_length[row],
            series.max_curvature[row]
        )?;
        for areas in &series.loop_areas {
            write!(out, ",{}", areas[row])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn parse_f64(field: &str, path: &str) -> Result<f64, IoError> {
    field.parse::<f64>().map_err(|e| IoError::Parse {
        path: path.to_string(),
        detail: format!("bad float `{field}`: {e}"),
    })
}

/// Parse any of the emitted numeric CSVs back into header + rows. Every
/// audit file is strictly schema'd: a single header row, comma separation,
/// one f64 (or NaN) per field.
pub fn read_numeric_csv(text: &str, path: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| IoError::Parse {
            path: path.to_string(),
            detail: "empty csv".into(),
        })?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(IoError::Parse {
                path: path.to_string(),
                detail: format!("row has {} fields, expected {}", fields.len(), header.len()),
            });
        }
        rows.push(
            fields
                .iter()
                .map(|f| parse_f64(f, path))
                .collect::<Result<Vec<f64>, IoError>>()?,
        );
    }
    Ok((header, rows))
}

pub fn read_diagnostics_csv(text: &str, path: &str) -> Result<DiagnosticSeries, IoError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| IoError::Parse {
        path: path.to_string(),
        detail: "empty diagnostics csv".into(),
    })?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 6 || columns[0] != "t" {
        return Err(IoError::Parse {
            path: path.to_string(),
            detail: format!("unexpected header `{header}`"),
        });
    }
    let n_loops = columns.len() - 6;
    let mut series = DiagnosticSeries {
        loop_areas: vec![Vec::new(); n_loops],
        ..Default::default()
    };
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(IoError::Parse {
                path: path.to_string(),
                detail: format!(
                    "row has {} fields, expected {}",
                    fields.len(),
                    columns.len()
                ),
            });
        }
        series.time.push(parse_f64(fields[0], path)?);
        series.total_length.push(parse_f64(fields[1], path)?);
        series.curvature_sq.push(parse_f64(fields[2], path)?);
        series.curvature_deriv_sq.push(parse_f64(fields[3], path)?);
        series.min_curve_length.push(parse_f64(fields[4], path)?);
        series.max_curvature.push(parse_f64(fields[5], path)?);
        for (i, areas) in series.loop_areas.iter_mut().enumerate() {
            areas.push(parse_f64(fields[6 + i], path)?);
        }
    }
    Ok(series)
}

fn reason_to_str(r: StopReason) -> &'static str {
    match r {
        StopReason::TimeLimit => "time-limit",
        StopReason::LengthCollapse => "length-collapse",
        StopReason::CurvatureBlowup => "curvature-blow-up",
        StopReason::LengthCollapseAndCurvatureBlowup => "length-collapse-and-curvature-blow-up",
    }
}

fn reason_from_str(s: &str, path: &str) -> Result<StopReason, IoError> {
    Ok(match s {
        "time-limit" => StopReason::TimeLimit,
        "length-collapse" => StopReason::LengthCollapse,
        "curvature-blow-up" => StopReason::CurvatureBlowup,
        "length-collapse-and-curvature-blow-up" => StopReason::LengthCollapseAndCurvatureBlowup,
        other => {
            return Err(IoError::Parse {
                path: path.to_string(),
                detail: format!("unknown stop reason `{other}`"),
            })
        }
    })
}

fn classification_to_str(k: crate::diagnostics::SingularityKind) -> &'static str {
    match k {
        crate::diagnostics::SingularityKind::None => "none",
        crate::diagnostics::SingularityKind::LengthCollapse => "length-collapse",
        crate::diagnostics::SingularityKind::CurvatureBlowup => "curvature-blow-up",
        crate::diagnostics::SingularityKind::Both => "length-collapse-and-curvature-blow-up",
    }
}

fn termination_text(
    t: &Termination,
    classification: Option<crate::diagnostics::SingularityKind>,
) -> String {
    let mut body = String::new();
    body.push_str(&format!("reason: {}\n", reason_to_str(t.reason)));
    if let Some(k) = classification {
        body.push_str(&format!("classification: {}\n", classification_to_str(k)));
    }
    body.push_str(&format!("time: {}\n", t.time));
    if let Some(ts) = t.estimated_singular_time {
        body.push_str(&format!("estimated_singular_time: {ts}\n"));
    }
    if let Some(c) = t.shortest_curve {
        body.push_str(&format!("shortest_curve: {c}\n"));
    }
    if let Some(c) = t.most_curved {
        body.push_str(&format!("most_curved: {c}\n"));
    }
    body
}

fn termination_from_text(text: &str, path: &str) -> Result<Termination, IoError> {
    let mut reason = None;
    let mut time = None;
    let mut estimated = None;
    let mut shortest = None;
    let mut most = None;
    for line in text.lines() {
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "reason" => reason = Some(reason_from_str(value, path)?),
            "time" => time = Some(parse_f64(value, path)?),
            "estimated_singular_time" => estimated = Some(parse_f64(value, path)?),
            "shortest_curve" => shortest = value.parse::<usize>().ok(),
            "most_curved" => most = value.parse::<usize>().ok(),
            _ => {}
        }
    }
    Ok(Termination {
        reason: reason.ok_or_else(|| IoError::Parse {
            path: path.to_string(),
            detail: "termination record lacks a reason".into(),
        })?,
        time: time.ok_or_else(|| IoError::Parse {
            path: path.to_string(),
            detail: "termination record lacks a time".into(),
        })?,
        estimated_singular_time: estimated,
        shortest_curve: shortest,
        most_curved: most,
    })
}

/// Persist a trajectory as `snapshots/NNNN.network`, `diagnostics.csv` and
/// `termination.txt` under `dir`.
pub fn save_trajectory(trajectory: &Trajectory, dir: &Path) -> Result<(), IoError> {
    let snaps = dir.join("snapshots");
    std::fs::create_dir_all(&snaps).map_err(|e| IoError::io(&snaps, e))?;
    for (i, snap) in trajectory.snapshots.iter().enumerate() {
        let mut metadata = Metadata::new();
        metadata.insert("time".to_string(), serde_json::json!(snap.time));
        let path = snaps.join(format!("{i:06}.network"));
        save_network(&snap.network, metadata, &path)?;
    }
    let mut csv = Vec::new();
    write_diagnostics_csv(&trajectory.series, &mut csv)
        .map_err(|e| IoError::io(&dir.join(DIAGNOSTICS_FILE), e))?;
    write_file(&dir.join(DIAGNOSTICS_FILE), &String::from_utf8_lossy(&csv))?;
    let classification = crate::diagnostics::singularity_classify(trajectory).kind;
    write_file(
        &dir.join(TERMINATION_FILE),
        &termination_text(&trajectory.termination, Some(classification)),
    )
}

/// Load a trajectory directory written by [`save_trajectory`]. Loops are
/// re-identified from the first snapshot's topology.
pub fn load_trajectory(dir: &Path) -> Result<Trajectory, IoError> {
    let snaps_dir = dir.join("snapshots");
    let mut entries: Vec<_> = std::fs::read_dir(&snaps_dir)
        .map_err(|e| IoError::io(&snaps_dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "network").unwrap_or(false))
        .collect();
    entries.sort();
    if entries.is_empty() {
        return Err(IoError::Parse {
            path: snaps_dir.display().to_string(),
            detail: "no snapshots found".into(),
        });
    }
    let mut snapshots = Vec::with_capacity(entries.len());
    for path in &entries {
        let (network, metadata) = load_network(path)?;
        let time = metadata
            .get("time")
            .and_then(|v| v.as_f64())
            .ok_or_else(|| IoError::Parse {
                path: path.display().to_string(),
                detail: "snapshot lacks a numeric `time` metadata entry".into(),
            })?;
        snapshots.push(Snapshot { time, network });
    }
    let diag_path = dir.join(DIAGNOSTICS_FILE);
    let text = std::fs::read_to_string(&diag_path).map_err(|e| IoError::io(&diag_path, e))?;
    let series = read_diagnostics_csv(&text, &diag_path.display().to_string())?;
    let term_path = dir.join(TERMINATION_FILE);
    let text = std::fs::read_to_string(&term_path).map_err(|e| IoError::io(&term_path, e))?;
    let termination = termination_from_text(&text, &term_path.display().to_string())?;
    let loops = find_loops(&snapshots[0].network);
    Ok(Trajectory {
        snapshots,
        series,
        loops,
        termination,
    })
}

/// length_law.csv: t,total_length,length_rate,curvature_sq,relative_residual
pub fn write_length_law_csv(
    samples: &[LengthLawSample],
    out: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(
        out,
        "t,total_length,length_rate,curvature_sq,relative_residual"
    )?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.time, s.total_length, s.length_rate, s.curvature_sq, s.relative_residual
        )?;
    }
    Ok(())
}

/// area_law.csv: t,area,rate,expected_rate,residual
pub fn write_area_law_csv(audit: &AreaLawAudit, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "t,area,rate,expected_rate,residual")?;
    for s in &audit.samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.time, s.area, s.rate, s.expected_rate, s.residual
        )?;
    }
    Ok(())
}

/// monotonicity.csv: t,density,density_rate,dissipation,boundary_term,identity_residual
pub fn write_monotonicity_csv(
    samples: &[MonotonicitySample],
    out: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(
        out,
        "t,density,density_rate,dissipation,boundary_term,identity_residual"
    )?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.time,
            s.density,
            s.density_rate.unwrap_or(f64::NAN),
            s.dissipation,
            s.boundary_term,
            s.identity_residual.unwrap_or(f64::NAN)
        )?;
    }
    Ok(())
}

/// density_map.csv: x,y,density
pub fn write_density_map_csv(rows: &[(Vec2, f64)], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "x,y,density")?;
    for (p, v) in rows {
        writeln!(out, "{},{},{}", p.x, p.y, v)?;
    }
    Ok(())
}

/// blowup_fit.csv: one data row.
pub fn write_blowup_fit_csv(fit: &BlowupFit, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "integral_exponent,integral_log_constant,sup_exponent,sup_log_constant,singular_time,window_lo,window_hi,samples"
    )?;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        fit.integral_exponent,
        fit.integral_log_constant,
        fit.sup_exponent,
        fit.sup_log_constant,
        fit.singular_time,
        fit.window.0,
        fit.window.1,
        fit.sample_count
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagnostics_csv_round_trips() {
        let series = DiagnosticSeries {
            time: vec![0.0, 0.1, 0.2],
            total_length: vec![3.0, 2.9, 2.8],
            curvature_sq: vec![1.0, 1.1, 1.25],
            curvature_deriv_sq: vec![0.1, 0.2, 0.25],
            min_curve_length: vec![1.0, 0.9, 0.8],
            max_curvature: vec![2.0, 2.5, 3.0],
            loop_areas: vec![vec![0.5, 0.4, 0.3]],
        };
        let mut buf = Vec::new();
        write_diagnostics_csv(&series, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = read_diagnostics_csv(&text, "mem").unwrap();
        assert_eq!(back.time, series.time);
        assert_eq!(back.loop_areas, series.loop_areas);
        assert_eq!(back.max_curvature, series.max_curvature);
    }

    #[test]
    fn termination_text_round_trips() {
        let t = Termination {
            reason: StopReason::LengthCollapseAndCurvatureBlowup,
            time: 0.4998,
            estimated_singular_time: Some(0.5),
            shortest_curve: Some(0),
            most_curved: Some(0),
        };
        let text = termination_text(&t, Some(crate::diagnostics::SingularityKind::Both));
        assert!(text.contains("classification: length-collapse-and-curvature-blow-up"));
        let back = termination_from_text(&text, "mem").unwrap();
        assert_eq!(back.reason, t.reason);
        assert_eq!(back.time, t.time);
        assert_eq!(back.estimated_singular_time, t.estimated_singular_time);
    }
}
