//! Dataset and report files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crcop_core::estimation::StudyReport;
use crcop_core::{Dataset, Observation, Risk};

use crate::error::CliError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn dataset_to_csv(data: &Dataset) -> String {
    let mut s = String::from("t,delta");
    for k in 1..=data.dim() {
        let _ = write!(s, ",z{k}");
    }
    s.push('\n');
    for o in data.iter() {
        let _ = write!(s, "{},{}", o.time, o.delta());
        for z in &o.covariates {
            let _ = write!(s, ",{z}");
        }
        s.push('\n');
    }
    s
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<(), CliError> {
    write_text(path, &dataset_to_csv(data))
}

/// Reads a `t,delta,z1[,z2,...]` file. Errors carry the 1-based line.
pub fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    parse_dataset(file, path)
}

pub fn parse_dataset<R: std::io::Read>(reader: R, path: &Path) -> Result<Dataset, CliError> {
    let perr = |line: u64, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(perr(
            1,
            "empty file: expected a `t,delta,z1,...` header".into(),
        ));
    }
    if headers.len() < 3 || &headers[0] != "t" || &headers[1] != "delta" {
        return Err(perr(
            1,
            format!(
                "expected header `t,delta,z1,...`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    for (k, h) in headers.iter().skip(2).enumerate() {
        if h != format!("z{}", k + 1) {
            return Err(perr(
                1,
                format!(
                    "covariate column {} should be named z{}, found `{h}`",
                    k + 3,
                    k + 1
                ),
            ));
        }
    }
    let dim = headers.len() - 2;
    let mut data = Dataset::new(dim);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            perr(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize, what: &str| -> Result<f64, CliError> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| perr(line, format!("{what} `{}`: {e}", &rec[i])))
        };
        let time = num(0, "t")?;
        let cause = match &rec[1] {
            "0" => None,
            "1" => Some(Risk::First),
            "2" => Some(Risk::Second),
            other => {
                return Err(perr(
                    line,
                    format!("delta must be 0, 1 or 2, found `{other}`"),
                ))
            }
        };
        let z = (0..dim)
            .map(|k| num(k + 2, "covariate"))
            .collect::<Result<Vec<_>, _>>()?;
        data.push(Observation::new(time, cause, z))
            .map_err(|e| perr(line, e.to_string()))?;
    }
    if data.is_empty() {
        return Err(perr(2, "no data rows".into()));
    }
    Ok(data)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:e}"))
}

pub fn report_csv(report: &StudyReport) -> String {
    let mut s = String::from("parameter,truth,sb,var,mse,cp,n_converged\n");
    for p in &report.parameters {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            p.name,
            p.truth,
            opt(p.sb),
            opt(p.var),
            opt(p.mse),
            p.cp.map_or_else(|| "NA".to_string(), |c| format!("{c:.4}")),
            p.n_converged
        );
    }
    s
}

/// A finished study cell.
#[derive(Debug, Clone)]
pub struct Cell {
    pub tau: f64,
    pub n: usize,
    pub report: StudyReport,
}

pub const TABLE_PARAMETERS: [&str; 4] = ["tau", "gamma", "beta11", "beta12"];
const TABLE_STATS: [&str; 4] = ["SB", "VAR", "MSE", "CP"];

fn stat(report: &StudyReport, param: &str, which: &str) -> Option<f64> {
    let p = report.get(param)?;
    match which {
        "SB" => p.sb,
        "VAR" => p.var,
        "MSE" => p.mse,
        _ => p.cp,
    }
}

/// Combined table for one τ: rows `{SB, VAR, MSE, CP} × parameters`,
/// one column per sample size.
pub fn combined_csv(cells: &[&Cell]) -> String {
    let mut s = String::from("statistic,parameter");
    for c in cells {
        let _ = write!(s, ",n={}", c.n);
    }
    s.push('\n');
    for st in TABLE_STATS {
        for param in TABLE_PARAMETERS {
            let _ = write!(s, "{st},{param}");
            for c in cells {
                let v = stat(&c.report, param, st);
                let _ = write!(
                    s,
                    ",{}",
                    if st == "CP" {
                        v.map_or("NA".into(), |x| format!("{x:.2}"))
                    } else {
                        opt(v)
                    }
                );
            }
            s.push('\n');
        }
    }
    s
}

pub fn combined_text(tau: f64, cells: &[&Cell]) -> String {
    let mut s = format!("tau = {tau}\n{:<5}{:<8}", "", "");
    for c in cells {
        let _ = write!(s, "{:>11}", format!("n={}", c.n));
    }
    s.push('\n');
    for st in TABLE_STATS {
        for (i, param) in TABLE_PARAMETERS.iter().enumerate() {
            let _ = write!(s, "{:<5}{:<8}", if i == 0 { st } else { "" }, param);
            for c in cells {
                let v = stat(&c.report, param, st);
                let cell = match v {
                    None => "NA".to_string(),
                    Some(x) if st == "CP" => format!("{x:.2}"),
                    Some(x) => format!("{x:.1e}"),
                };
                let _ = write!(s, "{cell:>11}");
            }
            s.push('\n');
        }
    }
    let _ = writeln!(
        s,
        "converged: {}",
        cells
            .iter()
            .map(|c| format!("{}/{}", c.report.n_converged, c.report.reps))
            .collect::<Vec<_>>()
            .join(" ")
    );
    s
}

pub fn cell_file(dir: &Path, tau: f64, n: usize) -> PathBuf {
    dir.join(format!("study_tau{tau}_n{n}.csv"))
}
