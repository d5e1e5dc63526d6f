//! Canonical `key=value` text.
//!
//! Values are escaped so a field never spans a line or a tab: `\` becomes
//! `\\`, and newline, carriage return and tab become `\n`, `\r`, `\t`.
//! Keys are plain identifiers and are never escaped. A log record is one
//! line of tab-separated fields; a request body is one field per line.

use alloc::string::String;
use alloc::vec::Vec;

use crate::WireError;

pub fn escape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape(raw: &str) -> Result<String, WireError> {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            _ => return Err(WireError::BadEscape(raw.into())),
        }
    }
    Ok(out)
}

/// Builds one record line of tab-separated fields (without the newline).
#[derive(Debug, Default, Clone)]
pub struct LineWriter {
    buf: String,
}

impl LineWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(mut self, key: &str, value: &str) -> Self {
        if !self.buf.is_empty() {
            self.buf.push('\t');
        }
        self.buf.push_str(key);
        self.buf.push('=');
        self.buf.push_str(&escape(value));
        self
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Splits a line (or a sequence of lines) into unescaped `(key, value)` pairs.
pub fn split_fields<'a, I>(parts: I) -> Result<Vec<(String, String)>, WireError>
where
    I: IntoIterator<Item = &'a str>,
{
    parts
        .into_iter()
        .map(|part| {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| WireError::InvalidValue { field: "field", value: part.into() })?;
            Ok((k.into(), unescape(v)?))
        })
        .collect()
}

pub fn split_line(line: &str) -> Result<Vec<(String, String)>, WireError> {
    if line.is_empty() {
        return Ok(Vec::new());
    }
    split_fields(line.split('\t'))
}

/// Reads fields in a fixed order.
#[derive(Debug)]
pub struct FieldReader {
    fields: Vec<(String, String)>,
    pos: usize,
}

impl FieldReader {
    pub fn new(fields: Vec<(String, String)>) -> Self {
        Self { fields, pos: 0 }
    }

    pub fn from_line(line: &str) -> Result<Self, WireError> {
        Ok(Self::new(split_line(line)?))
    }

    pub fn peek_key(&self) -> Option<&str> {
        self.fields.get(self.pos).map(|(k, _)| k.as_str())
    }

    pub fn take(&mut self, key: &'static str) -> Result<String, WireError> {
        match self.fields.get_mut(self.pos) {
            Some((k, v)) if k == key => {
                self.pos += 1;
                Ok(core::mem::take(v))
            }
            Some((k, _)) => Err(WireError::UnexpectedField { expected: key, found: k.clone() }),
            None => Err(WireError::MissingField(key)),
        }
    }

    /// Takes the field if it is next, otherwise leaves the reader untouched.
    pub fn take_opt(&mut self, key: &'static str) -> Result<Option<String>, WireError> {
        if self.peek_key() == Some(key) {
            self.take(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn take_parsed<T: core::str::FromStr>(&mut self, key: &'static str) -> Result<T, WireError> {
        let raw = self.take(key)?;
        raw.parse().map_err(|_| WireError::InvalidValue { field: key, value: raw })
    }

    pub fn finish(self, what: &'static str) -> Result<(), WireError> {
        if self.pos == self.fields.len() {
            Ok(())
        } else {
            Err(WireError::Trailing(what))
        }
    }
}
