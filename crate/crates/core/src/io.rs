//! CSV and JSON serialization of Lorenz curves and densities.
//!
//! CSV files have a header row (`f,l` for curves, `w,p` for densities).
//! JSON documents are `{grid, values, terminal, params}`, with optional
//! extras for densities and solver diagnostics. Numbers are written in their
//! shortest round-trip decimal form, so text round trips are exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::density::CanonicalDensity;
use crate::error::{Error, Result};
use crate::lorenz::LorenzCurve;
use crate::params::ParameterVector;
use crate::solver::SolveDiagnostics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default)]
    pub terminal: Option<f64>,
    #[serde(default)]
    pub params: Option<ParameterVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<SolveDiagnostics>,
}

impl CurveDocument {
    pub fn from_lorenz(curve: &LorenzCurve, params: Option<ParameterVector>) -> Self {
        CurveDocument {
            grid: curve.f().to_vec(),
            values: curve.l().to_vec(),
            terminal: Some(curve.terminal()),
            params,
            n_total: None,
            w_total: None,
            diagnostics: None,
        }
    }

    pub fn from_density(p: &CanonicalDensity, params: Option<ParameterVector>) -> Self {
        CurveDocument {
            grid: p.grid().to_vec(),
            values: p.values().to_vec(),
            terminal: None,
            params,
            n_total: Some(p.n_total()),
            w_total: Some(p.w_total()),
            diagnostics: None,
        }
    }

    pub fn with_diagnostics(mut self, diagnostics: SolveDiagnostics) -> Self {
        self.diagnostics = Some(diagnostics);
        self
    }

    pub fn to_lorenz(&self) -> Result<LorenzCurve> {
        match self.terminal {
            Some(t) => LorenzCurve::new(self.grid.clone(), self.values.clone(), (t - 1.0).abs() > 1e-9),
            None => LorenzCurve::from_points(self.grid.clone(), self.values.clone()),
        }
    }

    pub fn to_density(&self) -> Result<CanonicalDensity> {
        let p = CanonicalDensity::canonical(self.grid.clone(), self.values.clone())?;
        let n = self.n_total.unwrap_or_else(|| p.quadrature_mass());
        let w = self.w_total.unwrap_or_else(|| p.quadrature_wealth());
        CanonicalDensity::new(self.grid.clone(), self.values.clone(), n, w)
    }
}

fn write_columns<W: Write>(out: W, header: [&str; 2], xs: &[f64], ys: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for (x, y) in xs.iter().zip(ys) {
        w.write_record([x.to_string(), y.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn read_columns<R: Read>(source: R, header: [&str; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let found = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if found.len() < 2 || found[0] != *header[0] || found[1] != *header[1] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header '{},{}'", header[0], header[1]),
        });
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let parse = |i: usize| -> Result<f64> {
            row.get(i).and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse {
                line,
                message: format!("column {} is not a number", header[i]),
            })
        };
        xs.push(parse(0)?);
        ys.push(parse(1)?);
    }
    Ok((xs, ys))
}

pub fn write_lorenz_csv<W: Write>(curve: &LorenzCurve, out: W) -> Result<()> {
    write_columns(out, ["f", "l"], curve.f(), curve.l())
}

/// Reads an `f,l` file; the regime is inferred from the final value.
pub fn read_lorenz_csv<R: Read>(source: R) -> Result<LorenzCurve> {
    let (f, l) = read_columns(source, ["f", "l"])?;
    LorenzCurve::from_points(f, l)
}

pub fn write_density_csv<W: Write>(p: &CanonicalDensity, out: W) -> Result<()> {
    write_columns(out, ["w", "p"], p.grid(), p.values())
}

/// Reads a `w,p` file; the totals are taken from quadrature of the data.
pub fn read_density_csv<R: Read>(source: R) -> Result<CanonicalDensity> {
    let (w, p) = read_columns(source, ["w", "p"])?;
    CurveDocument {
        grid: w,
        values: p,
        terminal: None,
        params: None,
        n_total: None,
        w_total: None,
        diagnostics: None,
    }
    .to_density()
}

pub fn write_json<T: Serialize, W: Write>(value: &T, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn read_document<R: Read>(source: R) -> Result<CurveDocument> {
    Ok(serde_json::from_reader(BufReader::new(source))?)
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Loads a Lorenz curve from a `.json` document or an `f,l` CSV file.
pub fn load_curve(path: impl AsRef<Path>) -> Result<LorenzCurve> {
    let path = path.as_ref();
    let file = File::open(path)?;
    if is_json(path) {
        read_document(file)?.to_lorenz()
    } else {
        read_lorenz_csv(BufReader::new(file))
    }
}

/// Writes a curve as JSON when the path ends in `.json`, CSV otherwise.
pub fn save_curve(path: impl AsRef<Path>, curve: &LorenzCurve, params: Option<ParameterVector>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path)?;
    if is_json(path) {
        write_json(&CurveDocument::from_lorenz(curve, params), file)
    } else {
        write_lorenz_csv(curve, BufWriter::new(file))
    }
}
