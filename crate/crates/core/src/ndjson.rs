//! Line-delimited JSON output helpers.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

pub fn write_line<W: Write, T: Serialize>(mut w: W, record: &T) -> Result<()> {
    serde_json::to_writer(&mut w, record)?;
    writeln!(w)?;
    Ok(())
}

pub fn write_all<W: Write, T: Serialize>(mut w: W, records: &[T]) -> Result<()> {
    for r in records {
        write_line(&mut w, r)?;
    }
    Ok(())
}
