//! CSV serialization.
//!
//! Every table is UTF-8, comma separated, LF terminated, with a header row.
//! Reals are written with 17 significant digits so they re-read bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, Writer, WriterBuilder};

use crate::experiments::{ClosedFormReport, SweepResult};
use crate::markov::{StationaryDistribution, TransitionMatrix};
use crate::verhulst::{MortalityTable, MutationKernel, SimulationTrace};

use super::CliError;

/// Renders a real with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

/// A result that serializes to one of the CSV schemas.
pub trait CsvTable {
    fn write_records<W: Write>(&self, out: &mut Writer<W>) -> csv::Result<()>;
}

fn writer<W: Write>(sink: W) -> Writer<W> {
    WriterBuilder::new()
        .flexible(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink)
}

pub fn write_table<T: CsvTable + ?Sized, W: Write>(table: &T, sink: W) -> Result<(), CliError> {
    let mut out = writer(sink);
    table.write_records(&mut out).map_err(CliError::Write)?;
    out.flush().map_err(CliError::Io)?;
    Ok(())
}

/// Writes `table` to `path`, creating or truncating the file.
pub fn write_csv<T: CsvTable + ?Sized>(table: &T, path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(CliError::Io)?;
    write_table(table, std::io::BufWriter::new(file))
}

pub fn to_csv_string<T: CsvTable + ?Sized>(table: &T) -> String {
    let mut buf = Vec::new();
    write_table(table, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// `generation,total,E_n,P_1..P_vmax`. An empty population has an empty `E_n`.
impl CsvTable for SimulationTrace {
    fn write_records<W: Write>(&self, out: &mut Writer<W>) -> csv::Result<()> {
        let v_max = self.generations.first().map_or(0, |p| p.v_max());
        let mut header = vec!["generation".to_string(), "total".into(), "E_n".into()];
        header.extend((1..=v_max).map(|v| format!("P_{v}")));
        out.write_record(&header)?;
        for (g, p) in self.generations.iter().enumerate() {
            let mut row = vec![
                g.to_string(),
                format_real(self.totals[g]),
                format_opt(self.expected_velocities[g]),
            ];
            row.extend(p.counts().iter().map(|&c| format_real(c)));
            out.write_record(&row)?;
        }
        Ok(())
    }
}

/// `state,pi` with 1-based states.
impl CsvTable for StationaryDistribution {
    fn write_records<W: Write>(&self, out: &mut Writer<W>) -> csv::Result<()> {
        out.write_record(["state", "pi"])?;
        for (k, p) in self.pi.iter().enumerate() {
            out.write_record([(k + 1).to_string(), format_real(*p)])?;
        }
        Ok(())
    }
}

/// `delta,seed,expected_state,residual`; failed runs leave the last two empty.
impl CsvTable for [SweepResult] {
    fn write_records<W: Write>(&self, out: &mut Writer<W>) -> csv::Result<()> {
        out.write_record(["delta", "seed", "expected_state", "residual"])?;
        for r in self {
            let (e, res) = match &r.outcome {
                Ok(run) => (format_real(run.expected_state), format_real(run.residual)),
                Err(_) => (String::new(), String::new()),
            };
            out.write_record([format_real(r.delta), r.seed.to_string(), e, res])?;
        }
        Ok(())
    }
}

/// `n` on the first line, then `n` rows of `n` entries.
impl CsvTable for TransitionMatrix {
    fn write_records<W: Write>(&self, out: &mut Writer<W>) -> csv::Result<()> {
        out.write_record([self.n().to_string()])?;
        for row in self.rows() {
            out.write_record(row.iter().map(|&p| format_real(p)))?;
        }
        Ok(())
    }
}

/// `n,delta,distribution_deviation,expected_state_deviation`.
impl CsvTable for ClosedFormReport {
    fn write_records<W: Write>(&self, out: &mut Writer<W>) -> csv::Result<()> {
        out.write_record(["n", "delta", "distribution_deviation", "expected_state_deviation"])?;
        for c in &self.checks {
            out.write_record([
                c.n.to_string(),
                format_real(c.delta),
                format_real(c.distribution_deviation),
                format_real(c.expected_state_deviation),
            ])?;
        }
        Ok(())
    }
}

fn parse_real(field: &str, what: &str) -> Result<f64, CliError> {
    field
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("{what}: `{field}` is not a number")))
}

fn records<R: Read>(source: R, headers: bool) -> Result<Vec<csv::StringRecord>, CliError> {
    ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .from_reader(source)
        .records()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Input(e.to_string()))
}

fn open(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_matrix<R: Read>(source: R) -> Result<TransitionMatrix, CliError> {
    let recs = records(source, false)?;
    let (first, rest) = recs
        .split_first()
        .ok_or_else(|| CliError::Input("matrix file is empty".into()))?;
    let n: usize = first
        .get(0)
        .and_then(|f| f.trim().parse().ok())
        .ok_or_else(|| CliError::Input("first line must hold the state count".into()))?;
    if rest.len() != n {
        return Err(CliError::Input(format!("expected {n} matrix rows, found {}", rest.len())));
    }
    let rows = rest
        .iter()
        .map(|r| r.iter().map(|f| parse_real(f, "matrix entry")).collect())
        .collect::<Result<Vec<Vec<f64>>, _>>()?;
    Ok(TransitionMatrix::from_rows(rows)?)
}

pub fn read_matrix_file(path: &Path) -> Result<TransitionMatrix, CliError> {
    read_matrix(open(path)?)
}

/// Kernel table with header `u,mass`; unlisted offsets have zero mass.
pub fn read_kernel<R: Read>(source: R, v_max: usize) -> Result<MutationKernel, CliError> {
    let mut mass = vec![0.0; 2 * v_max + 1];
    for rec in records(source, true)? {
        let u: isize = rec
            .get(0)
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| CliError::Input("kernel offset must be an integer".into()))?;
        if u.unsigned_abs() > v_max {
            return Err(CliError::Input(format!("kernel offset {u} exceeds v_max = {v_max}")));
        }
        let value = parse_real(rec.get(1).unwrap_or(""), "kernel mass")?;
        mass[(u + v_max as isize) as usize] = value;
    }
    Ok(MutationKernel::new(v_max, mass)?)
}

pub fn read_kernel_file(path: &Path, v_max: usize) -> Result<MutationKernel, CliError> {
    read_kernel(open(path)?, v_max)
}

/// Mortality table with header `v,f_mort`; every trait `1..=v_max` must appear.
pub fn read_mortality<R: Read>(source: R, v_max: usize) -> Result<MortalityTable, CliError> {
    let mut values = vec![None; v_max];
    for rec in records(source, true)? {
        let v: usize = rec
            .get(0)
            .and_then(|f| f.trim().parse().ok())
            .filter(|v| (1..=v_max).contains(v))
            .ok_or_else(|| CliError::Input(format!("trait must be an integer in 1..={v_max}")))?;
        values[v - 1] = Some(parse_real(rec.get(1).unwrap_or(""), "mortality")?);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, m)| m.ok_or_else(|| CliError::Input(format!("no mortality for trait {}", i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MortalityTable::new(values)?)
}

pub fn read_mortality_file(path: &Path, v_max: usize) -> Result<MortalityTable, CliError> {
    read_mortality(open(path)?, v_max)
}
