//! Text formats: JSON and CSV with every float printed to 17 significant
//! digits, fields as `(t, phi, value)` CSV with a JSON sidecar, and boundary
//! curves as CSV tables.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::boundary::BoundaryCurve;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, SphereKind};
use crate::params::CylParams;

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// JSON formatter that prints floats with [`fmt_f64`]; pretty when asked.
pub struct FloatFormatter {
    inner: Option<PrettyFormatter<'static>>,
}

impl FloatFormatter {
    pub fn compact() -> Self {
        FloatFormatter { inner: None }
    }

    pub fn pretty() -> Self {
        FloatFormatter { inner: Some(PrettyFormatter::with_indent(b"  ")) }
    }
}

macro_rules! forward {
    ($($name:ident),*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            match &mut self.inner {
                Some(p) => p.$name(w),
                None => serde_json::ser::CompactFormatter.$name(w),
            }
        })*
    };
}

macro_rules! forward_first {
    ($($name:ident),*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
            match &mut self.inner {
                Some(p) => p.$name(w, first),
                None => serde_json::ser::CompactFormatter.$name(w, first),
            }
        })*
    };
}

impl Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    forward!(begin_array, end_array, end_array_value, begin_object, end_object, begin_object_value, end_object_value);
    forward_first!(begin_array_value, begin_object_key);
}

pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    to_json_with(value, FloatFormatter::pretty())
}

pub fn to_json_compact<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    to_json_with(value, FloatFormatter::compact())
}

fn to_json_with<T: Serialize + ?Sized>(value: &T, fmt: FloatFormatter) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

/// A CSV table: `#`-prefixed comment lines, a header and preformatted rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { comments: Vec::new(), header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_floats(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| fmt_f64(x)).collect());
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for c in &self.comments {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.header)?;
        for r in &self.rows {
            csv.write_record(r)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Columns of the boundary table.
pub const CURVE_COLUMNS: [&str; 10] = [
    "p",
    "lambda_star_num",
    "bracket_width",
    "lambda_fs",
    "a_star_num",
    "a_fs",
    "margin",
    "converged",
    "relative_gap",
    "status",
];

pub fn curve_table(curve: &BoundaryCurve) -> Table {
    let mut t = Table::new(&CURVE_COLUMNS);
    for pt in &curve.points {
        let mut row: Vec<String> = [pt.p, pt.lambda_star_num, pt.bracket_width, pt.lambda_fs, pt.a_star_num, pt.a_fs, pt.margin]
            .iter()
            .map(|&x| fmt_f64(x))
            .collect();
        row.push(pt.converged.to_string());
        row.push(fmt_f64(pt.relative_gap()));
        row.push(serde_json::to_value(pt.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default());
        t.rows.push(row);
    }
    t
}

/// Grid and parameter metadata stored next to a field CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub format_version: u32,
    #[serde(rename = "N")]
    pub n_dim: u32,
    pub lambda: f64,
    pub p: f64,
    pub half_length: f64,
    pub nt: usize,
    pub nphi: usize,
    pub sphere: SphereKind,
    pub values_file: String,
}

pub const FIELD_FORMAT_VERSION: u32 = 1;

/// `field.csv` → `field.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn write_field(path: &Path, field: &Field) -> Result<()> {
    let g = &field.grid;
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "t,phi,value")?;
    for i in 0..g.nt {
        let t = fmt_f64(g.t(i));
        for (j, v) in field.row(i).iter().enumerate() {
            writeln!(out, "{t},{},{}", fmt_f64(g.sphere.angles[j]), fmt_f64(*v))?;
        }
    }
    out.flush()?;
    let meta = FieldSidecar {
        format_version: FIELD_FORMAT_VERSION,
        n_dim: g.n_dim(),
        lambda: field.cyl.lambda,
        p: field.cyl.p,
        half_length: g.half_length,
        nt: g.nt,
        nphi: g.nphi(),
        sphere: g.sphere.kind,
        values_file: path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    };
    let side = sidecar_path(path);
    if side == path {
        return Err(Error::Format("field CSV must not use the .json extension".into()));
    }
    std::fs::write(side, to_json_pretty(&meta)? + "\n")?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<Field> {
    let mut text = String::new();
    File::open(sidecar_path(path))?.read_to_string(&mut text)?;
    let meta: FieldSidecar = serde_json::from_str(&text)?;
    if meta.format_version != FIELD_FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported field format version {}", meta.format_version)));
    }
    let grid = Arc::new(Grid::new(meta.n_dim, meta.half_length, meta.nt, meta.nphi)?);
    if grid.sphere.kind != meta.sphere {
        return Err(Error::Format("sphere rule in sidecar does not match N".into()));
    }
    let cyl = CylParams::new(meta.n_dim, meta.lambda, meta.p)?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["t", "phi", "value"] {
        return Err(Error::Format(format!("unexpected field header {header:?}")));
    }
    let n = grid.nphi();
    let mut values = Vec::with_capacity(grid.len());
    let coord_tol = 1e-12 * meta.half_length.max(1.0);
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::Format(format!("row {idx}: missing column {k}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("row {idx}: {e}")))
        };
        if idx >= grid.len() {
            return Err(Error::Format(format!("more than {} rows in {}", grid.len(), path.display())));
        }
        let (i, j) = (idx / n, idx % n);
        if (num(0)? - grid.t(i)).abs() > coord_tol || (num(1)? - grid.sphere.angles[j]).abs() > 1e-12 {
            return Err(Error::Format(format!("row {idx}: coordinates do not match the grid")));
        }
        values.push(num(2)?);
    }
    if values.len() != grid.len() {
        return Err(Error::Format(format!("{} rows for a grid of {} nodes", values.len(), grid.len())));
    }
    Field::new(grid, cyl, values)
}
