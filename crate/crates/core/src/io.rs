//! CSV readers and writers. Floats are written with Rust's shortest
//! round-trip formatting, so every written file re-parses exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fitkit::{OrientationMap, SpectrumData, SweepData};
use crate::pipeline::{LinewidthTable, PleMap};

struct Table {
    columns: Vec<Vec<f64>>,
}

/// Reads the named columns (plus optional ones, `None` if absent). Every
/// cell must parse as a finite number.
fn read_columns<R: Read>(reader: R, required: &[&str], optional: &[&str]) -> Result<(Table, Vec<Option<Vec<f64>>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = Vec::new();
    for name in required {
        idx.push(find(name).ok_or_else(|| Error::Parse { line: 1, message: format!("missing column '{name}'") })?);
    }
    let opt_idx: Vec<Option<usize>> = optional.iter().map(|n| find(n)).collect();

    let mut columns = vec![Vec::new(); required.len()];
    let mut opt_columns: Vec<Option<Vec<f64>>> = opt_idx.iter().map(|i| i.map(|_| Vec::new())).collect();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let cell = |i: usize, name: &str| -> Result<f64> {
            let raw = record.get(i).ok_or_else(|| Error::Parse { line, message: format!("missing value for '{name}'") })?;
            let v: f64 = raw
                .parse()
                .map_err(|_| Error::Parse { line, message: format!("'{raw}' in column '{name}' is not a number") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: format!("non-finite value '{raw}' in column '{name}'") });
            }
            Ok(v)
        };
        for (k, name) in required.iter().enumerate() {
            columns[k].push(cell(idx[k], name)?);
        }
        for (k, name) in optional.iter().enumerate() {
            if let (Some(i), Some(col)) = (opt_idx[k], opt_columns[k].as_mut()) {
                col.push(cell(i, name)?);
            }
        }
    }
    Ok((Table { columns }, opt_columns))
}

/// Sorts every column by the first one.
fn sort_by_axis(cols: &mut [&mut Vec<f64>]) {
    let mut order: Vec<usize> = (0..cols[0].len()).collect();
    order.sort_by(|&a, &b| cols[0][a].total_cmp(&cols[0][b]));
    for c in cols.iter_mut() {
        **c = order.iter().map(|&i| c[i]).collect();
    }
}

/// Axis, values and optional sigma column.
type XyColumns = (Vec<f64>, Vec<f64>, Option<Vec<f64>>);

fn read_xy<R: Read>(reader: R, x: &str, y: &str) -> Result<XyColumns> {
    let (table, mut opt) = read_columns(reader, &[x, y], &["sigma"])?;
    let mut it = table.columns.into_iter();
    let (mut xs, mut ys) = (it.next().unwrap(), it.next().unwrap());
    let mut sigma = opt.pop().unwrap();
    match sigma.as_mut() {
        Some(s) => sort_by_axis(&mut [&mut xs, &mut ys, s]),
        None => sort_by_axis(&mut [&mut xs, &mut ys]),
    }
    Ok((xs, ys, sigma))
}

pub fn read_sweep<R: Read>(reader: R) -> Result<SweepData> {
    let (b, a, s) = read_xy(reader, "b_gauss", "amplitude")?;
    SweepData::new(b, a, s)
}

pub fn read_spectrum<R: Read>(reader: R) -> Result<SpectrumData> {
    let (d, c, s) = read_xy(reader, "delta_mhz", "counts")?;
    SpectrumData::new(d, c, s)
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<SweepData> {
    read_sweep(File::open(path)?)
}

pub fn read_spectrum_csv(path: impl AsRef<Path>) -> Result<SpectrumData> {
    read_spectrum(File::open(path)?)
}

/// Long format `b_gauss,delta_mhz,amplitude`, one row per cell of a full
/// rectangular grid, in any order.
pub fn read_map<R: Read>(reader: R) -> Result<PleMap> {
    let (table, _) = read_columns(reader, &["b_gauss", "delta_mhz", "amplitude"], &[])?;
    let [b, d, a] = <[Vec<f64>; 3]>::try_from(table.columns).unwrap();
    let axis = |v: &[f64]| {
        let mut u = v.to_vec();
        u.sort_by(f64::total_cmp);
        u.dedup();
        u
    };
    let (bs, ds) = (axis(&b), axis(&d));
    if bs.len() * ds.len() != a.len() {
        return Err(Error::validation("map cells do not form a complete rectangular grid"));
    }
    let mut grid = vec![vec![f64::NAN; ds.len()]; bs.len()];
    for ((bv, dv), av) in b.iter().zip(&d).zip(&a) {
        let i = bs.binary_search_by(|x| x.total_cmp(bv)).unwrap();
        let j = ds.binary_search_by(|x| x.total_cmp(dv)).unwrap();
        if !grid[i][j].is_nan() {
            return Err(Error::validation(format!("duplicate map cell at b = {bv}, delta = {dv}")));
        }
        grid[i][j] = *av;
    }
    PleMap::new(bs, ds, grid)
}

pub fn read_map_csv(path: impl AsRef<Path>) -> Result<PleMap> {
    read_map(File::open(path)?)
}

/// Hole g-factor table `g_h,sigma`, in file order.
pub fn read_g_table<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let (table, _) = read_columns(reader, &["g_h", "sigma"], &[])?;
    Ok(table.columns[0].iter().copied().zip(table.columns[1].iter().copied()).collect())
}

pub fn read_g_table_csv(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    read_g_table(File::open(path)?)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(header)?;
    for r in rows {
        wtr.write_record(&r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(w: W, data: &SweepData) -> Result<()> {
    write_rows(
        w,
        &["b_gauss", "amplitude", "sigma"],
        (0..data.len()).map(|i| vec![data.b_gauss[i].to_string(), data.amplitude[i].to_string(), data.sigma[i].to_string()]),
    )
}

pub fn write_spectrum<W: Write>(w: W, data: &SpectrumData) -> Result<()> {
    write_rows(
        w,
        &["delta_mhz", "counts", "sigma"],
        (0..data.len()).map(|i| vec![data.delta_mhz[i].to_string(), data.counts[i].to_string(), data.sigma[i].to_string()]),
    )
}

pub fn write_map<W: Write>(w: W, map: &PleMap) -> Result<()> {
    let rows = map.b_gauss.iter().zip(&map.amplitude).flat_map(|(b, row)| {
        map.delta_mhz.iter().zip(row).map(move |(d, a)| vec![b.to_string(), d.to_string(), a.to_string()])
    });
    write_rows(w, &["b_gauss", "delta_mhz", "amplitude"], rows)
}

pub fn write_linewidths<W: Write>(w: W, table: &LinewidthTable) -> Result<()> {
    write_rows(
        w,
        &["b_gauss", "fwhm_mhz", "sigma_mhz"],
        table.rows.iter().map(|r| vec![r.b_gauss.to_string(), r.fwhm_mhz.to_string(), r.sigma_mhz.to_string()]),
    )
}

/// `theta_rad,phi_rad,gamma_sd_mhz,converged`; masked cells carry `NaN`.
pub fn write_orientation_map<W: Write>(w: W, map: &OrientationMap) -> Result<()> {
    let rows = map.theta.iter().enumerate().flat_map(|(i, t)| {
        map.phi.iter().enumerate().map(move |(j, p)| {
            vec![t.to_string(), p.to_string(), map.gamma_sd_mhz[i][j].to_string(), map.converged[i][j].to_string()]
        })
    });
    write_rows(w, &["theta_rad", "phi_rad", "gamma_sd_mhz", "converged"], rows)
}

/// Writes to `path` through `f`.
pub fn write_file(path: impl AsRef<Path>, f: impl FnOnce(&mut File) -> Result<()>) -> Result<()> {
    let mut file = File::create(path)?;
    f(&mut file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_row_sweep() {
        let s = read_sweep("b_gauss,amplitude\n0,1\n1,0.9\n2,0.8\n3,0.7\n".as_bytes()).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.sigma, vec![1.0; 4]);
    }

    #[test]
    fn descending_rows_are_sorted() {
        let s = read_sweep("b_gauss,amplitude,sigma\n3,0.7,0.1\n2,0.8,0.2\n1,0.9,0.3\n0,1,0.4\n".as_bytes()).unwrap();
        assert_eq!(s.b_gauss, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(s.amplitude, vec![1.0, 0.9, 0.8, 0.7]);
        assert_eq!(s.sigma, vec![0.4, 0.3, 0.2, 0.1]);
    }

    #[test]
    fn nan_names_the_line() {
        let e = read_sweep("b_gauss,amplitude\n0,1\n1,NaN\n2,0.8\n3,0.7\n".as_bytes()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn missing_column_and_short_file() {
        assert!(matches!(read_sweep("b,amplitude\n0,1\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_sweep("b_gauss,amplitude\n0,1\n1,2\n".as_bytes()), Err(Error::Validation(_))));
    }

    #[test]
    fn round_trips_full_precision() {
        let b = vec![0.0, 0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300];
        let mut b_sorted = b.clone();
        b_sorted.sort_by(f64::total_cmp);
        let a: Vec<f64> = b_sorted.iter().map(|x| (x * 7.0).sin() / 3.0).collect();
        let s = SweepData::new(b_sorted, a, None).unwrap();
        let mut buf = Vec::new();
        write_sweep(&mut buf, &s).unwrap();
        assert_eq!(read_sweep(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn map_round_trip() {
        let map = PleMap::new(vec![0.0, 5.0], vec![-1.0, 0.0, 1.5], vec![vec![0.1, 1.0, 0.2], vec![0.3, 0.7, 1.0 / 3.0]]).unwrap();
        let mut buf = Vec::new();
        write_map(&mut buf, &map).unwrap();
        assert_eq!(read_map(buf.as_slice()).unwrap(), map);
        assert!(read_map("b_gauss,delta_mhz,amplitude\n0,0,1\n0,1,1\n1,0,1\n".as_bytes()).is_err());
    }
}
