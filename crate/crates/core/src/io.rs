//! Raw field dumps: a short text header followed by little-endian `f64`
//! blocks.
//!
//! ```text
//! cohesive-phase-field 1
//! shape 65 65
//! h 0.25
//! meta eps 1
//! field u 8450
//! field v 4225
//! end
//! <8450 + 4225 little-endian f64>
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &str = "cohesive-phase-field 1";

#[derive(Clone, Debug, PartialEq)]
pub struct FieldDump {
    pub shape: Vec<usize>,
    pub h: f64,
    /// Free-form `key value` pairs; keys and values must not contain
    /// newlines, keys no spaces.
    pub meta: Vec<(String, String)>,
    pub fields: Vec<(String, Vec<f64>)>,
}

impl FieldDump {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_slice())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        for (k, v) in &self.meta {
            if k.contains(char::is_whitespace) || v.contains('\n') {
                return Err(Error::Input(format!("bad meta entry {k:?}")));
            }
        }
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{MAGIC}")?;
        let shape: Vec<String> = self.shape.iter().map(|s| s.to_string()).collect();
        writeln!(w, "shape {}", shape.join(" "))?;
        writeln!(w, "h {:e}", self.h)?;
        for (k, v) in &self.meta {
            writeln!(w, "meta {k} {v}")?;
        }
        for (name, data) in &self.fields {
            writeln!(w, "field {name} {}", data.len())?;
        }
        writeln!(w, "end")?;
        for (_, data) in &self.fields {
            for x in data {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let bad = |msg: &str| Error::Input(format!("{}: {msg}", path.display()));
        let mut line = String::new();
        r.read_line(&mut line)?;
        if line.trim_end() != MAGIC {
            return Err(bad("not a field dump"));
        }
        let mut dump = FieldDump {
            shape: Vec::new(),
            h: f64::NAN,
            meta: Vec::new(),
            fields: Vec::new(),
        };
        let mut lens = Vec::new();
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(bad("header ended without 'end'"));
            }
            let l = line.trim_end();
            if l == "end" {
                break;
            }
            let (key, rest) = l.split_once(' ').ok_or_else(|| bad("malformed header line"))?;
            match key {
                "shape" => {
                    dump.shape = rest
                        .split_whitespace()
                        .map(|s| s.parse().map_err(|_| bad("bad shape")))
                        .collect::<Result<_>>()?
                }
                "h" => dump.h = rest.parse().map_err(|_| bad("bad spacing"))?,
                "meta" => {
                    let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                    dump.meta.push((k.to_string(), v.to_string()));
                }
                "field" => {
                    let (name, len) = rest.rsplit_once(' ').ok_or_else(|| bad("bad field line"))?;
                    lens.push((name.to_string(), len.parse::<usize>().map_err(|_| bad("bad field length"))?));
                }
                _ => return Err(bad("unknown header key")),
            }
        }
        let mut buf = [0u8; 8];
        for (name, len) in lens {
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                r.read_exact(&mut buf)?;
                data.push(f64::from_le_bytes(buf));
            }
            dump.fields.push((name, data));
        }
        Ok(dump)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let d = FieldDump {
            shape: vec![3, 2],
            h: 0.125,
            meta: vec![("eps".into(), "0.5".into()), ("tags".into(), "DJD".into())],
            fields: vec![("u".into(), vec![1.0, -2.5, 3.0, 0.0, 1e-300, 7.0]), ("v".into(), vec![0.5; 6])],
        };
        d.write(&path).unwrap();
        let e = FieldDump::read(&path).unwrap();
        assert_eq!(d, e);
        assert_eq!(e.meta("tags"), Some("DJD"));
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        std::fs::write(&path, "hello\n").unwrap();
        assert!(FieldDump::read(&path).is_err());
    }
}
