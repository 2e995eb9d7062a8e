//! Little-endian record reading with byte-offset error reporting.

use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};

pub(crate) struct OffsetReader<R> {
    inner: R,
    offset: u64,
    what: &'static str,
}

impl<R: BufRead> OffsetReader<R> {
    pub fn new(inner: R, what: &'static str) -> Self {
        OffsetReader {
            inner,
            offset: 0,
            what,
        }
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    fn io_error(&self, source: io::Error) -> Error {
        Error::Malformed {
            what: self.what,
            offset: self.offset,
            message: source.to_string(),
        }
    }

    pub fn malformed(&self, message: impl Into<String>) -> Error {
        Error::Malformed {
            what: self.what,
            offset: self.offset,
            message: message.into(),
        }
    }

    pub fn read_exact(&mut self, buf: &mut [u8]) -> Result<()> {
        let mut filled = 0;
        while filled < buf.len() {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => {
                    return Err(Error::Truncated {
                        what: self.what,
                        offset: self.offset,
                    })
                }
                Ok(n) => {
                    filled += n;
                    self.offset += n as u64;
                }
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(self.io_error(e)),
            }
        }
        Ok(())
    }

    pub fn expect_magic(&mut self, magic: &[u8]) -> Result<()> {
        let mut buf = vec![0u8; magic.len()];
        self.read_exact(&mut buf)?;
        if buf != magic {
            self.offset -= magic.len() as u64;
            return Err(self.malformed(format!(
                "bad header, expected {:?}",
                String::from_utf8_lossy(magic)
            )));
        }
        Ok(())
    }

    pub fn read_u16(&mut self) -> Result<u16> {
        let mut b = [0u8; 2];
        self.read_exact(&mut b)?;
        Ok(u16::from_le_bytes(b))
    }

    pub fn read_u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    pub fn read_f32(&mut self) -> Result<f32> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b)?;
        Ok(f32::from_le_bytes(b))
    }

    pub fn read_f64(&mut self) -> Result<f64> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }

    /// u16 length prefix followed by UTF-8 bytes.
    pub fn read_short_string(&mut self) -> Result<String> {
        let start = self.offset;
        let len = self.read_u16()? as usize;
        let mut buf = vec![0u8; len];
        self.read_exact(&mut buf)?;
        String::from_utf8(buf).map_err(|_| Error::Malformed {
            what: self.what,
            offset: start,
            message: "string is not valid UTF-8".into(),
        })
    }

    /// Bytes up to (not including) `delim`; the delimiter is consumed.
    pub fn read_until(&mut self, delim: u8) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        loop {
            let available = match self.inner.fill_buf() {
                Ok(buf) => buf,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(self.io_error(e)),
            };
            if available.is_empty() {
                return Err(Error::Truncated {
                    what: self.what,
                    offset: self.offset,
                });
            }
            if let Some(pos) = available.iter().position(|&b| b == delim) {
                out.extend_from_slice(&available[..pos]);
                self.inner.consume(pos + 1);
                self.offset += pos as u64 + 1;
                return Ok(out);
            }
            let n = available.len();
            out.extend_from_slice(available);
            self.inner.consume(n);
            self.offset += n as u64;
        }
    }

    pub fn peek(&mut self) -> Result<Option<u8>> {
        loop {
            match self.inner.fill_buf() {
                Ok(buf) => return Ok(buf.first().copied()),
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(self.io_error(e)),
            }
        }
    }

    pub fn skip_byte(&mut self) {
        self.inner.consume(1);
        self.offset += 1;
    }

    pub fn at_eof(&mut self) -> Result<bool> {
        Ok(self.peek()?.is_none())
    }
}

pub(crate) fn write_short_string<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
    let len = u16::try_from(s.len()).map_err(|_| {
        io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("string of {} bytes exceeds the u16 length prefix", s.len()),
        )
    })?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(s.as_bytes())
}
