//! Output sink: one `#` header line echoing the effective configuration,
//! then records or plain text lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Result;
use bippr_core::record::RunRecord;
use serde_json::{Map, Value};

pub struct Output {
    w: Box<dyn Write>,
}

impl Output {
    pub fn open(path: Option<&Path>) -> Result<Self> {
        let w: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Output { w })
    }

    pub fn header(&mut self, command: &str, config: &Map<String, Value>) -> Result<()> {
        writeln!(
            self.w,
            "# bippr {command} {}",
            Value::Object(config.clone())
        )?;
        Ok(())
    }

    pub fn record(&mut self, record: &RunRecord) -> Result<()> {
        record.write_to(&mut self.w)?;
        Ok(())
    }

    pub fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.w, "{text}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}
