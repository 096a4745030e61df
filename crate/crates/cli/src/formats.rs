//! File formats: coefficient JSON, MT rows as CSV, dense matrices in binary
//! and CSV, Wold data JSON.

use std::io::{self, Read, Write};

use blaschke_core::blaschke::MtBasis;
use blaschke_core::wold::{Part, WoldData};
use blaschke_core::{CMatrix, C64};
use serde::{Deserialize, Serialize};

use crate::config::{to_c64, to_pair, Pair};
use crate::error::{CliError, Result};

/// Leading bytes of the binary matrix layout.
pub const MATRIX_MAGIC: &[u8; 8] = b"BLSKMAT1";

/// Coefficients lowest order first, as `[[re, im], ...]`.
pub fn coefficients_to_json(c: &[C64]) -> String {
    let pairs: Vec<Pair> = c.iter().copied().map(to_pair).collect();
    serde_json::to_string(&pairs).expect("pairs serialize")
}

pub fn coefficients_from_json(text: &str) -> Result<Vec<C64>> {
    let pairs: Vec<Pair> =
        serde_json::from_str(text).map_err(|e| CliError::Format(e.to_string()))?;
    Ok(pairs.into_iter().map(to_c64).collect())
}

/// One row per `E_j`: `j, re_0, im_0, re_1, im_1, ...`.
pub fn write_mt_csv<W: Write>(basis: &MtBasis, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let order = basis.order();
    let mut header = vec!["j".to_string()];
    for k in 0..=order {
        header.push(format!("re_{k}"));
        header.push(format!("im_{k}"));
    }
    out.write_record(&header).map_err(csv_err)?;
    for (j, row) in basis.taylor.iter().enumerate() {
        let mut rec = vec![(j + 1).to_string()];
        for z in row.coeffs() {
            rec.push(z.re.to_string());
            rec.push(z.im.to_string());
        }
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush().map_err(|e| CliError::Format(e.to_string()))
}

/// Reads the rows written by [`write_mt_csv`].
pub fn read_mt_csv<R: Read>(r: R) -> Result<Vec<Vec<C64>>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let vals: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| CliError::Format(e.to_string()))
            })
            .collect::<Result<_>>()?;
        if !vals.len().is_multiple_of(2) {
            return Err(CliError::Format("odd number of coefficient columns".into()));
        }
        rows.push(vals.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
    }
    Ok(rows)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Format(e.to_string())
}

/// 8-byte magic, `N` as little-endian `u64`, then `N * N` entries row-major
/// as little-endian `f64` pairs `re, im`.
pub fn write_matrix_binary<W: Write>(m: &CMatrix, mut w: W) -> io::Result<()> {
    assert!(m.is_square(), "matrix must be square");
    let n = m.nrows();
    w.write_all(MATRIX_MAGIC)?;
    w.write_all(&(n as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * n * n);
    for i in 0..n {
        for j in 0..n {
            buf.extend_from_slice(&m[(i, j)].re.to_le_bytes());
            buf.extend_from_slice(&m[(i, j)].im.to_le_bytes());
        }
    }
    w.write_all(&buf)
}

pub fn read_matrix_binary<R: Read>(mut r: R) -> Result<CMatrix> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|e| CliError::Format(format!("matrix header: {e}")))?;
    if &header[..8] != MATRIX_MAGIC {
        return Err(CliError::Format("bad matrix magic".into()));
    }
    let n = u64::from_le_bytes(header[8..].try_into().expect("8 bytes")) as usize;
    let len = n
        .checked_mul(n)
        .and_then(|x| x.checked_mul(16))
        .ok_or_else(|| CliError::Format(format!("matrix size {n} overflows")))?;
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)
        .map_err(|e| CliError::Format(format!("matrix body: {e}")))?;
    let f = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        C64::new(f(k), f(k + 1))
    }))
}

/// Row-major CSV, two columns `re, im` per entry.
pub fn write_matrix_csv<W: Write>(m: &CMatrix, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..m.nrows() {
        let rec: Vec<String> = (0..m.ncols())
            .flat_map(|j| [m[(i, j)].re.to_string(), m[(i, j)].im.to_string()])
            .collect();
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush().map_err(|e| CliError::Format(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WoldJson {
    pub part: Vec<String>,
    pub lambda_indices: Vec<usize>,
    pub depth: Vec<Option<usize>>,
    pub generator: Vec<Option<usize>>,
}

pub fn part_name(p: Part) -> &'static str {
    match p {
        Part::Unitary => "unitary",
        Part::Shift => "shift",
    }
}

impl From<&WoldData> for WoldJson {
    fn from(w: &WoldData) -> Self {
        Self {
            part: w.part.iter().map(|&p| part_name(p).to_string()).collect(),
            lambda_indices: w.lambda_indices.clone(),
            depth: w.depth.clone(),
            generator: w.generator.clone(),
        }
    }
}

impl TryFrom<WoldJson> for WoldData {
    type Error = CliError;

    fn try_from(w: WoldJson) -> Result<Self> {
        let part = w
            .part
            .iter()
            .map(|s| match s.as_str() {
                "unitary" => Ok(Part::Unitary),
                "shift" => Ok(Part::Shift),
                other => Err(CliError::Format(format!("unknown part `{other}`"))),
            })
            .collect::<Result<_>>()?;
        Ok(WoldData {
            part,
            lambda_indices: w.lambda_indices,
            depth: w.depth,
            generator: w.generator,
        })
    }
}
