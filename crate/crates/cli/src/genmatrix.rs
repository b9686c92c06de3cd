use std::path::Path;

use anyhow::Result;
use stcs_core::{MeasurementOperator, OperatorDescriptor};

use crate::run::{json_pretty, write_file, CSV_SCHEMA};

/// Dense rows, one record per matrix row, after a schema comment.
pub fn dense_csv(op: &MeasurementOperator) -> Result<String> {
    let d = op.to_dense();
    let mut out = format!("# {CSV_SCHEMA}: dense {}x{} {}\n", d.rows(), d.cols(), op.kind()).into_bytes();
    {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
        for i in 0..d.rows() {
            w.write_record(d.row(i).iter().map(|v| format!("{v:?}")))?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out)?)
}

/// Writes `descriptor.json` and `matrix.csv`.
pub fn gen_matrix(desc: &OperatorDescriptor, dir: &Path) -> Result<MeasurementOperator> {
    let op = MeasurementOperator::from_descriptor(desc)?;
    std::fs::create_dir_all(dir)?;
    write_file(dir, "descriptor.json", json_pretty(&op.descriptor())?)?;
    write_file(dir, "matrix.csv", dense_csv(&op)?)?;
    Ok(op)
}
