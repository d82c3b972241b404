//! Artifact emission: JSON with every float at 17 significant digits
//! (round-trip exact) and CSV helpers with the same convention. Identical
//! config + seed must yield byte-identical artifacts.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

/// serde_json formatter printing every f64 with 17 significant digits.
struct P17Formatter;

impl serde_json::ser::Formatter for P17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        debug_assert!(value.is_finite());
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.8e}")
    }
}

pub fn to_p17_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, P17Formatter);
    value
        .serialize(&mut ser)
        .expect("serialization cannot fail");
    String::from_utf8(out).expect("serde_json emits utf-8")
}

pub fn write_p17_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = to_p17_json(value);
    text.push('\n');
    std::fs::write(path, text)
}

/// One float, 17 significant digits.
pub fn f17(value: f64) -> String {
    format!("{value:.16e}")
}

/// A CSV artifact carrying its config hash in a leading comment line.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(config_hash: &str, header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(&format!("# config_hash={config_hash}\n"));
        buf.push_str(header);
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, &self.buf)
    }
}
