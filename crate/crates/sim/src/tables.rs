//! MI/MMSE table construction and its CSV cache.

use std::fs;
use std::io::Write;
use std::path::Path;

use dmimo_core::modulation::{Alphabet, Constellation, GaussianInput, InfoTable, Modulation};

use crate::config::SimConfig;
use crate::error::{Result, SimError};

pub const TABLE_HEADER: &str = "snr_db,mi_bits,mmse";

pub fn write_table(path: &Path, t: &InfoTable) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# qam order={} quadrature_nodes={}\n", t.order(), t.quadrature_nodes()));
    out.push_str(TABLE_HEADER);
    out.push('\n');
    for ((s, mi), mm) in t.snr_db().iter().zip(t.mi_table()).zip(t.mmse_table()) {
        out.push_str(&format!("{s},{mi},{mm}\n"));
    }
    let mut f = fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| SimError::io(path, e))
}

pub fn read_table(path: &Path) -> Result<InfoTable> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    let bad = |message: String| SimError::Format { path: path.to_path_buf(), message };
    let mut lines = text.lines();
    let comment = lines.next().ok_or_else(|| bad("empty table file".into()))?;
    let field = |key: &str| -> Result<usize> {
        comment
            .split_whitespace()
            .find_map(|w| w.strip_prefix(key))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(format!("header comment lacks {key}")))
    };
    let order = field("order=")?;
    let nodes = field("quadrature_nodes=")?;
    if lines.next() != Some(TABLE_HEADER) {
        return Err(bad(format!("expected column header '{TABLE_HEADER}'")));
    }
    let (mut snr, mut mi, mut mm) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
        if cols.len() != 3 {
            return Err(bad(format!("row {} has {} columns", i + 1, cols.len())));
        }
        snr.push(cols[0]);
        mi.push(cols[1]);
        mm.push(cols[2]);
    }
    InfoTable::from_samples(order, nodes, snr, mi, mm).map_err(|e| bad(e.to_string()))
}

/// 256-QAM table for `cfg`: read from the cache when it matches, otherwise
/// computed (and written to the cache path, if one is configured).
pub fn qam_table(cfg: &SimConfig) -> Result<InfoTable> {
    if let Some(path) = &cfg.table_cache {
        if path.exists() {
            let t = read_table(path)?;
            if t.order() == 256 && t.quadrature_nodes() == cfg.quadrature_nodes {
                return Ok(t);
            }
        }
    }
    let t = InfoTable::build(&Constellation::qam256(), cfg.quadrature_nodes);
    if let Some(path) = &cfg.table_cache {
        write_table(path, &t)?;
    }
    Ok(t)
}

pub fn alphabet(cfg: &SimConfig) -> Result<Box<dyn Alphabet + Send>> {
    Ok(match cfg.modulation {
        Modulation::Qam256 => Box::new(qam_table(cfg)?),
        Modulation::Gaussian => Box::new(GaussianInput),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = InfoTable::build(&Constellation::square_qam(16).unwrap(), 16);
        write_table(&path, &t).unwrap();
        assert_eq!(read_table(&path).unwrap(), t);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# qam order=16 quadrature_nodes=16\nsnr_db,mi_bits,mmse\n-30,"));
        fs::write(&path, "garbage\n").unwrap();
        assert!(matches!(read_table(&path), Err(SimError::Format { .. })));
    }
}
