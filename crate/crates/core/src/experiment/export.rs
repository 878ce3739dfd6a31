use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::quadrature::QuadratureSpec;
use crate::toeplitz::OperatorMatrix;

/// Provenance written next to an exported matrix.
#[derive(Debug, Clone)]
pub struct MatrixMetadata {
    pub symbol: String,
    pub spec: QuadratureSpec,
}

/// `row_index,col_index,re,im`, one line per entry in row-major order.
pub fn matrix_csv(m: &OperatorMatrix) -> String {
    let mut s = String::from("row_index,col_index,re,im\n");
    for r in 0..m.len() {
        for c in 0..m.len() {
            let v = m.entries[(r, c)];
            let _ = writeln!(s, "{r},{c},{:e},{:e}", v.re, v.im);
        }
    }
    s
}

/// Sidecar text: dimension, cutoff, weight, symbol, quadrature, seed and the basis order.
pub fn matrix_metadata(m: &OperatorMatrix, meta: &MatrixMetadata) -> String {
    let b = &m.basis;
    let mut s = String::new();
    let _ = writeln!(s, "d = {}", b.dim());
    let _ = writeln!(s, "D = {}", b.cutoff());
    let _ = writeln!(s, "lambda = {}", b.lambda());
    let _ = writeln!(s, "symbol = {}", meta.symbol);
    let _ = writeln!(s, "quadrature = {}", meta.spec);
    let _ = writeln!(s, "seed = {}", meta.spec.seed);
    let _ = writeln!(s, "size = {}", m.len());
    s.push_str("basis =");
    for (i, a) in b.indices().iter().enumerate() {
        let e: Vec<String> = a.entries().iter().map(|x| x.to_string()).collect();
        let _ = write!(s, "{}{}", if i == 0 { " " } else { "; " }, e.join(" "));
    }
    s.push('\n');
    s
}

/// Write `<stem>.csv` and `<stem>.meta` into `dir`.
pub fn write_matrix(dir: &Path, stem: &str, m: &OperatorMatrix, meta: &MatrixMetadata) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{stem}.csv")), matrix_csv(m))?;
    fs::write(dir.join(format!("{stem}.meta")), matrix_metadata(m, meta))?;
    Ok(())
}
