//! On-disk formats: the report CSV and JSON performance models.
//!
//! Report CSV header, one row per (instance, level):
//!
//! ```text
//! depth,instance_id,seed,level,chosen,path_length,time_units,space_units,solved,utility
//! ```
//!
//! `chosen` repeats the level selected for the row's instance; `utility`
//! is printed with the shortest representation that parses back to the
//! same `f64`.
//!
//! Models are JSON objects tagged by `kind`:
//!
//! ```text
//! {"kind":"markov","params":{"levels":[{"level":1,"accuracy":..,"branching":..,"sample_size":..},..],
//!   "max_len":100,"exact_within_horizon":true},"samples":4000,"seed":..}
//! {"kind":"empirical","cells":[{"depth":4,"level":1,"outcomes":[..]},..],"seeds":[[4,[..]],..],"extrapolate":false}
//! ```

use std::io::{Read, Write};
use std::path::Path;

use utilsearch_core::PerfModel;

use crate::experiment::ReportRow;
use crate::Error;

pub const REPORT_HEADER: &str = "depth,instance_id,seed,level,chosen,path_length,time_units,space_units,solved,utility";

pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))?;
    Ok(())
}

pub fn report_to_string(rows: &[ReportRow]) -> Result<String, Error> {
    let mut buf = Vec::new();
    if rows.is_empty() {
        buf.extend_from_slice(REPORT_HEADER.as_bytes());
        buf.push(b'\n');
    } else {
        write_report(rows, &mut buf)?;
    }
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

pub fn read_report<R: Read>(input: R) -> Result<Vec<ReportRow>, Error> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != REPORT_HEADER {
        return Err(Error::Config(format!("unexpected report header '{}'", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn save_model(model: &PerfModel, path: &Path) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(model)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<PerfModel, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
