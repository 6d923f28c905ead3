use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::block::BlockMatrix;
use super::partition::Partition;
use crate::error::{Error, Result};

/// One stored entry: group pair, position inside the block, value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub m_group: usize,
    pub n_group: usize,
    pub row: usize,
    pub col: usize,
    pub re: f64,
    pub im: f64,
}

/// Nonzero entries grouped by block, blocks in row-major group order.
pub fn to_rows(x: &BlockMatrix) -> Vec<BlockRow> {
    let groups = x.partition().groups();
    let mut out = Vec::new();
    for (m, n) in x.nonzero_blocks() {
        for (row, &i) in groups[m].basis.iter().enumerate() {
            for (col, &j) in groups[n].basis.iter().enumerate() {
                let v = x.entry(i, j);
                if v != Complex64::new(0.0, 0.0) {
                    out.push(BlockRow { m_group: m, n_group: n, row, col, re: v.re, im: v.im });
                }
            }
        }
    }
    out
}

pub fn from_rows(partition: &Arc<Partition>, rows: &[BlockRow]) -> Result<BlockMatrix> {
    let mut x = BlockMatrix::zeros(partition);
    let groups = partition.groups();
    for (k, r) in rows.iter().enumerate() {
        let (gm, gn) = match (groups.get(r.m_group), groups.get(r.n_group)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Parse { line: k + 2, message: "group index outside partition".into() }),
        };
        let (i, j) = match (gm.basis.get(r.row), gn.basis.get(r.col)) {
            (Some(&i), Some(&j)) => (i, j),
            _ => return Err(Error::Parse { line: k + 2, message: "entry outside block".into() }),
        };
        x.dense_mut()[(i, j)] = Complex64::new(r.re, r.im);
    }
    Ok(x)
}

pub fn write_csv<W: Write>(x: &BlockMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let rows = to_rows(x);
    for r in &rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    if rows.is_empty() {
        w.write_record(["m_group", "n_group", "row", "col", "re", "im"])
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R, partition: &Arc<Partition>) -> Result<BlockMatrix> {
    let mut rd = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for (k, rec) in rd.deserialize::<BlockRow>().enumerate() {
        let row = rec.map_err(|e| Error::Parse { line: k + 2, message: e.to_string() })?;
        rows.push(row);
    }
    from_rows(partition, &rows)
}
