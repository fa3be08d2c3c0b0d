//! Binary tensor fixtures, floor-plan export and CSV helpers.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use dmimo_core::channel::ChannelTensor;
use dmimo_core::geometry::FloorPlan;
use dmimo_core::linalg::C64;

use crate::error::{Result, SimError};

/// Writes `K M F\n` followed by little-endian `(re, im)` f64 pairs in
/// `[k][m][f]` order.
pub fn dump_tensor(path: &Path, h: &ChannelTensor) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| SimError::io(path, e);
    writeln!(w, "{} {} {}", h.num_ues(), h.num_antennas(), h.num_subcarriers()).map_err(io)?;
    for z in h.to_kmf() {
        w.write_all(&z.re.to_le_bytes()).map_err(io)?;
        w.write_all(&z.im.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a tensor dump. Subcarrier frequencies and the BS antenna partition
/// are not part of the format and have to be supplied.
pub fn load_tensor(path: &Path, subcarrier_freqs: Vec<f64>, site_ranges: Vec<std::ops::Range<usize>>) -> Result<ChannelTensor> {
    let file = fs::File::open(path).map_err(|e| SimError::io(path, e))?;
    let mut r = BufReader::new(file);
    let bad = |message: String| SimError::Format { path: path.to_path_buf(), message };
    let mut header = String::new();
    r.read_line(&mut header).map_err(|e| SimError::io(path, e))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| bad(format!("header: {e}")))?;
    let [k, m, f] = dims[..] else {
        return Err(bad(format!("header '{}' is not 'K M F'", header.trim_end())));
    };
    if f != subcarrier_freqs.len() {
        return Err(bad(format!("file has {f} subcarriers, {} frequencies given", subcarrier_freqs.len())));
    }
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| SimError::io(path, e))?;
    if bytes.len() != k * m * f * 16 {
        return Err(bad(format!("expected {} payload bytes, found {}", k * m * f * 16, bytes.len())));
    }
    let coeffs: Vec<C64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect();
    ChannelTensor::from_kmf(k, m, subcarrier_freqs, site_ranges, &coeffs).map_err(|e| bad(e.to_string()))
}

pub const WALLS_HEADER: [&str; 5] = ["x0", "y0", "x1", "y1", "kind"];

/// Wall segments (interior and outer) for map overlays.
pub fn write_walls(path: &Path, plan: &FloorPlan, comment: Option<&str>) -> Result<()> {
    let mut w = CsvOut::create(path, comment)?;
    w.row(WALLS_HEADER)?;
    let fp = plan.footprint();
    let outer = [
        (fp.x0, fp.y0, fp.x1, fp.y0),
        (fp.x1, fp.y0, fp.x1, fp.y1),
        (fp.x1, fp.y1, fp.x0, fp.y1),
        (fp.x0, fp.y1, fp.x0, fp.y0),
    ];
    for s in plan.interior_walls() {
        w.row([s.a.x.to_string(), s.a.y.to_string(), s.b.x.to_string(), s.b.y.to_string(), "interior".into()])?;
    }
    for (x0, y0, x1, y1) in outer {
        w.row([x0.to_string(), y0.to_string(), x1.to_string(), y1.to_string(), "outer".into()])?;
    }
    w.finish()
}

/// CSV file with an optional leading `# ...` comment line.
pub struct CsvOut {
    path: std::path::PathBuf,
    inner: csv::Writer<BufWriter<fs::File>>,
}

impl CsvOut {
    pub fn create(path: &Path, comment: Option<&str>) -> Result<Self> {
        let file = fs::File::create(path).map_err(|e| SimError::io(path, e))?;
        let mut buf = BufWriter::new(file);
        if let Some(c) = comment {
            writeln!(buf, "# {c}").map_err(|e| SimError::io(path, e))?;
        }
        Ok(Self { path: path.to_path_buf(), inner: csv::Writer::from_writer(buf) })
    }

    pub fn row<I, T>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(|e| self.csv_err(e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| SimError::io(&self.path, e))
    }

    fn csv_err(&self, e: csv::Error) -> SimError {
        SimError::Format { path: self.path.clone(), message: e.to_string() }
    }
}

/// Reads a CSV written by [`CsvOut`], skipping `#` comment lines.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let bad = |e: csv::Error| SimError::Format { path: path.to_path_buf(), message: e.to_string() };
    let header = r.headers().map_err(bad)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(bad)?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}
