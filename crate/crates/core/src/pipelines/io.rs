use std::io::{Read, Write};

use crate::error::{Error, Result};

/// One value per record under a `value` header.
pub fn write_vector_csv<W: Write>(w: W, v: &[f64]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(["value"]).map_err(io)?;
    for x in v {
        wr.write_record([format!("{x:?}")]).map_err(io)?;
    }
    wr.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn read_vector_csv<R: Read>(r: R) -> Result<Vec<f64>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let field = rec.get(0).unwrap_or("");
        let v: f64 = field
            .parse()
            .map_err(|_| Error::Io(format!("record {}: not a number: {field:?}", line + 1)))?;
        if !v.is_finite() {
            return Err(Error::NonFinite("csv value"));
        }
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let v = vec![0.1, -2.5e-17, 3.0, f64::MIN_POSITIVE];
        let mut buf = Vec::new();
        write_vector_csv(&mut buf, &v).unwrap();
        assert_eq!(read_vector_csv(buf.as_slice()).unwrap(), v);
        assert!(read_vector_csv("value\nabc\n".as_bytes()).is_err());
    }
}
