//! Little-endian binary encoding helpers for snapshot files.

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_header(magic: &[u8; 4], version: u32) -> Self {
        let mut w = Self::new();
        w.buf.extend_from_slice(magic);
        w.put_u32(version);
        w
    }

    pub fn put_u8(&mut self, x: u8) {
        self.buf.push(x);
    }

    pub fn put_u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    pub fn put_u64(&mut self, x: u64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    pub fn put_usize(&mut self, x: usize) {
        self.put_u64(x as u64);
    }

    pub fn put_f64(&mut self, x: f64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    pub fn put_str(&mut self, s: &str) {
        self.put_usize(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }

    pub fn put_usizes(&mut self, xs: &[usize]) {
        self.put_usize(xs.len());
        for &x in xs {
            self.put_usize(x);
        }
    }

    pub fn put_f64s(&mut self, xs: &[f64]) {
        self.put_usize(xs.len());
        for &x in xs {
            self.put_f64(x);
        }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

pub struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    /// Checks the magic bytes and returns the stored version.
    pub fn read_header(data: &'a [u8], magic: &[u8; 4]) -> Result<(Self, u32)> {
        let mut r = Self::new(data);
        let found = r.take(4)?;
        if found != magic {
            return Err(Error::Format(format!(
                "expected magic {:?}, found {:?}",
                String::from_utf8_lossy(magic),
                String::from_utf8_lossy(found)
            )));
        }
        let version = r.get_u32()?;
        Ok((r, version))
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn get_u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn get_u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    pub fn get_u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    pub fn get_usize(&mut self) -> Result<usize> {
        let x = self.get_u64()?;
        usize::try_from(x).map_err(|_| Error::Format(format!("length {x} does not fit in usize")))
    }

    pub fn get_f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    pub fn get_str(&mut self) -> Result<String> {
        let len = self.get_usize()?;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|e| Error::Format(e.to_string()))
    }

    /// Reads a length prefix, rejecting lengths that cannot fit in the
    /// remaining input at `elem_size` bytes per element.
    fn get_len(&mut self, elem_size: usize) -> Result<usize> {
        let len = self.get_usize()?;
        if len.saturating_mul(elem_size) > self.data.len() - self.pos {
            return Err(Error::Format(format!(
                "length {len} exceeds remaining input"
            )));
        }
        Ok(len)
    }

    pub fn get_usizes(&mut self) -> Result<Vec<usize>> {
        let len = self.get_len(8)?;
        (0..len).map(|_| self.get_usize()).collect()
    }

    pub fn get_f64s(&mut self) -> Result<Vec<f64>> {
        let len = self.get_len(8)?;
        (0..len).map(|_| self.get_f64()).collect()
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes",
                self.data.len() - self.pos
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_truncation() {
        let mut w = ByteWriter::with_header(b"TEST", 3);
        w.put_str("héllo");
        w.put_f64s(&[1.5, -0.0, f64::MIN_POSITIVE]);
        w.put_usizes(&[7, 0]);
        let bytes = w.into_bytes();

        let (mut r, version) = ByteReader::read_header(&bytes, b"TEST").unwrap();
        assert_eq!(version, 3);
        assert_eq!(r.get_str().unwrap(), "héllo");
        let fs = r.get_f64s().unwrap();
        assert_eq!(fs[1].to_bits(), (-0.0f64).to_bits());
        assert_eq!(r.get_usizes().unwrap(), vec![7, 0]);
        r.finish().unwrap();

        assert!(ByteReader::read_header(&bytes, b"NOPE").is_err());
        let (mut r, _) = ByteReader::read_header(&bytes[..12], b"TEST").unwrap();
        assert!(r.get_str().is_err());
    }
}
