//! One-sample-per-row CSV datasets.
//!
//! Columns are `phase, pd1..pd7, fx, fy, fz, depth_mm, radius_mm`. The
//! phase and the seven channels are required; ground-truth cells may be
//! empty, but a force triple or an indentation pair is either complete or
//! absent. Floats are written in shortest round-trip form, so a save/load
//! cycle reproduces every value bit for bit.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use fibercal_core::{ForceVector, IndentationState, IntensityFrame, Phase, Sample};

use crate::error::{Error, Result};

pub const COLUMNS: [&str; 13] = [
    "phase",
    "pd1",
    "pd2",
    "pd3",
    "pd4",
    "pd5",
    "pd6",
    "pd7",
    "fx",
    "fy",
    "fz",
    "depth_mm",
    "radius_mm",
];

/// Number of leading columns that must be present in the header.
const REQUIRED: usize = 8;

pub fn parse_phase(token: &str) -> Option<Phase> {
    match token {
        "indentation_only" => Some(Phase::IndentationOnly),
        "with_shear" => Some(Phase::WithShear),
        _ => None,
    }
}

/// Maps each known column to its position in the file header.
struct Layout {
    index: [Option<usize>; COLUMNS.len()],
}

impl Layout {
    fn from_header(header: &csv::StringRecord, path: &Path) -> Result<Self> {
        let mut index = [None; COLUMNS.len()];
        for (pos, name) in header.iter().enumerate() {
            let Some(col) = COLUMNS.iter().position(|c| *c == name) else {
                return Err(Error::schema(path, format!("unknown column `{name}`")));
            };
            if index[col].replace(pos).is_some() {
                return Err(Error::schema(path, format!("duplicate column `{name}`")));
            }
        }
        let missing: Vec<&str> = (0..REQUIRED)
            .filter(|&c| index[c].is_none())
            .map(|c| COLUMNS[c])
            .collect();
        if !missing.is_empty() {
            return Err(Error::schema(
                path,
                format!("missing required column(s): {}", missing.join(", ")),
            ));
        }
        Ok(Self { index })
    }

    fn cell<'r>(&self, record: &'r csv::StringRecord, col: usize) -> &'r str {
        self.index[col].and_then(|i| record.get(i)).unwrap_or("")
    }
}

fn number(cell: &str, column: &str, line: u64, path: &Path) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(
            path,
            line,
            format!("column {column}: `{cell}` is not a finite number"),
        )),
    }
}

/// All-or-nothing group of optional numeric cells.
fn group<const N: usize>(
    layout: &Layout,
    record: &csv::StringRecord,
    cols: [usize; N],
    what: &str,
    line: u64,
    path: &Path,
) -> Result<Option<[f64; N]>> {
    let cells = cols.map(|c| layout.cell(record, c));
    let filled = cells.iter().filter(|c| !c.is_empty()).count();
    if filled == 0 {
        return Ok(None);
    }
    if filled < N {
        return Err(Error::parse(
            path,
            line,
            format!("incomplete {what}: fill all of its cells or none"),
        ));
    }
    let mut out = [0.0; N];
    for (o, (cell, col)) in out.iter_mut().zip(cells.iter().zip(cols)) {
        *o = number(cell, COLUMNS[col], line, path)?;
    }
    Ok(Some(out))
}

fn parse_row(layout: &Layout, record: &csv::StringRecord, path: &Path) -> Result<Sample> {
    let line = record.position().map_or(0, |p| p.line());
    let phase_cell = layout.cell(record, 0);
    let phase = parse_phase(phase_cell).ok_or_else(|| {
        Error::parse(
            path,
            line,
            format!("unknown phase `{phase_cell}` (expected indentation_only or with_shear)"),
        )
    })?;
    let mut pd = [0.0; 7];
    for (i, v) in pd.iter_mut().enumerate() {
        *v = number(layout.cell(record, i + 1), COLUMNS[i + 1], line, path)?;
    }
    let frame = IntensityFrame::new(pd)?;
    let force = group(layout, record, [8, 9, 10], "force (fx, fy, fz)", line, path)?
        .map(|[fx, fy, fz]| ForceVector::new(fx, fy, fz));
    let indentation = group(
        layout,
        record,
        [11, 12],
        "indentation (depth_mm, radius_mm)",
        line,
        path,
    )?
    .map(|[d, r]| IndentationState::new(d, r));
    Sample::new(phase, frame, force, indentation)
        .map_err(|e| Error::parse(path, line, e.to_string()))
}

fn csv_error(e: csv::Error, path: &Path) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::parse(
            path,
            line,
            format!("row has {len} fields, header has {expected_len}"),
        ),
        other => Error::parse(path, line, format!("{other:?}")),
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// Parses a dataset. `origin` only labels error messages.
pub fn read_dataset<R: Read>(input: R, origin: &Path) -> Result<Vec<Sample>> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| csv_error(e, origin))?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::schema(origin, "missing header row"));
    }
    let layout = Layout::from_header(&header, origin)?;
    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(e, origin))?;
        samples.push(parse_row(&layout, &record, origin)?);
    }
    Ok(samples)
}

pub fn load_dataset(path: &Path) -> Result<Vec<Sample>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, path)
}

fn optional<const N: usize>(values: Option<[f64; N]>) -> [String; N] {
    match values {
        Some(v) => v.map(|x| x.to_string()),
        None => core::array::from_fn(|_| String::new()),
    }
}

/// The 13 dataset cells of one sample.
pub fn sample_cells(sample: &Sample) -> Vec<String> {
    let mut cells = Vec::with_capacity(COLUMNS.len());
    cells.push(sample.phase.name().to_string());
    cells.extend(sample.frame.pd.iter().map(f64::to_string));
    cells.extend(optional(sample.force.map(|f| f.as_array())));
    cells.extend(optional(sample.indentation.map(|u| u.as_array())));
    cells
}

/// Unwraps the IO error inside a csv error so its kind survives.
pub(crate) fn into_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

/// Writes the dataset columns followed by `extra_columns`, whose cells come
/// from `extra` for each sample.
pub fn write_dataset_with<W, F>(
    samples: &[Sample],
    extra_columns: &[&str],
    mut extra: F,
    output: W,
) -> io::Result<()>
where
    W: Write,
    F: FnMut(&Sample) -> Vec<String>,
{
    let mut wtr = csv::WriterBuilder::new().from_writer(output);
    let header = COLUMNS.iter().chain(extra_columns);
    wtr.write_record(header).map_err(into_io)?;
    for sample in samples {
        let mut cells = sample_cells(sample);
        cells.extend(extra(sample));
        wtr.write_record(&cells).map_err(into_io)?;
    }
    wtr.flush()
}

pub fn write_dataset<W: Write>(samples: &[Sample], output: W) -> io::Result<()> {
    write_dataset_with(samples, &[], |_| Vec::new(), output)
}

pub fn save_dataset(samples: &[Sample], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(samples, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}
