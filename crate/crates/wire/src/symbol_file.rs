//! The `QRSYM v1` module-matrix file and its PBM rendering.
//!
//! ```text
//! QRSYM 1 <side> <version> <ec> <mask>
//! <side lines of '0'/'1', '1' = dark>
//! ```
//!
//! Every line, including the last, ends in a single `0x0A`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::WireError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EcLevel {
    L,
    M,
    Q,
    H,
}

impl EcLevel {
    pub const ALL: [EcLevel; 4] = [EcLevel::L, EcLevel::M, EcLevel::Q, EcLevel::H];

    pub fn as_char(self) -> char {
        match self {
            EcLevel::L => 'L',
            EcLevel::M => 'M',
            EcLevel::Q => 'Q',
            EcLevel::H => 'H',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'L' => Some(EcLevel::L),
            'M' => Some(EcLevel::M),
            'Q' => Some(EcLevel::Q),
            'H' => Some(EcLevel::H),
            _ => None,
        }
    }
}

impl fmt::Display for EcLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl core::str::FromStr for EcLevel {
    type Err = WireError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => EcLevel::from_char(c),
            _ => None,
        }
        .ok_or_else(|| WireError::InvalidValue { field: "ec", value: s.into() })
    }
}

/// A symbol as stored on disk. `modules` is row-major, `true` = dark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolFile {
    pub version: u8,
    pub ec: EcLevel,
    pub mask: u8,
    pub side: usize,
    pub modules: Vec<bool>,
}

impl SymbolFile {
    pub fn to_text(&self) -> String {
        let mut out = format!("QRSYM 1 {} {} {} {}\n", self.side, self.version, self.ec, self.mask);
        out.reserve(self.side * (self.side + 1));
        for row in self.modules.chunks(self.side) {
            for &m in row {
                out.push(if m { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, WireError> {
        let mut lines = text.split_inclusive('\n');
        let header = lines.next().ok_or(WireError::Symbol("empty file"))?;
        let header = header.strip_suffix('\n').ok_or(WireError::Symbol("header not newline-terminated"))?;
        let mut words = header.split(' ');
        if words.next() != Some("QRSYM") || words.next() != Some("1") {
            return Err(WireError::Symbol("missing `QRSYM 1` magic"));
        }
        let mut num = |what: &'static str| -> Result<usize, WireError> {
            let w = words.next().ok_or(WireError::Symbol(what))?;
            if w.is_empty() || !w.bytes().all(|b| b.is_ascii_digit()) {
                return Err(WireError::Symbol(what));
            }
            w.parse().map_err(|_| WireError::Symbol(what))
        };
        let side = num("bad side")?;
        let version = num("bad version")?;
        let ec =
            words.next().and_then(|w| w.parse::<EcLevel>().ok()).ok_or(WireError::Symbol("bad ec level"))?;
        let mask = words
            .next()
            .filter(|w| w.len() == 1)
            .and_then(|w| w.parse::<u8>().ok())
            .filter(|m| *m < 8)
            .ok_or(WireError::Symbol("bad mask"))?;
        if words.next().is_some() {
            return Err(WireError::Symbol("extra header fields"));
        }
        if version == 0 || version > 40 || side != 4 * version + 17 {
            return Err(WireError::Symbol("side does not match version"));
        }

        let mut modules = Vec::with_capacity(side * side);
        for _ in 0..side {
            let line = lines.next().ok_or(WireError::Symbol("too few rows"))?;
            let row = line.strip_suffix('\n').ok_or(WireError::Symbol("row not newline-terminated"))?;
            if row.len() != side {
                return Err(WireError::Symbol("row length mismatch"));
            }
            for b in row.bytes() {
                match b {
                    b'0' => modules.push(false),
                    b'1' => modules.push(true),
                    _ => return Err(WireError::Symbol("row contains a non-binary character")),
                }
            }
        }
        if lines.next().is_some() {
            return Err(WireError::Symbol("content after last row"));
        }
        Ok(Self { version: version as u8, ec, mask, side, modules })
    }

    /// Plain PBM (P1) with a four-module quiet zone.
    pub fn to_pbm(&self) -> String {
        const QUIET: usize = 4;
        let full = self.side + 2 * QUIET;
        let mut out = format!("P1\n{full} {full}\n");
        for y in 0..full {
            let mut row = Vec::with_capacity(full);
            for x in 0..full {
                let dark = y >= QUIET
                    && y < QUIET + self.side
                    && x >= QUIET
                    && x < QUIET + self.side
                    && self.modules[(y - QUIET) * self.side + (x - QUIET)];
                row.push(if dark { "1" } else { "0" });
            }
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn sample() -> SymbolFile {
        let side = 21;
        SymbolFile {
            version: 1,
            ec: EcLevel::Q,
            mask: 3,
            side,
            modules: (0..side * side).map(|i| i % 3 == 0).collect(),
        }
    }

    #[test]
    fn text_layout_is_exact() {
        let text = sample().to_text();
        assert!(text.starts_with("QRSYM 1 21 1 Q 3\n100100100100100100100\n"));
        assert_eq!(text.lines().count(), 22);
        assert!(text.ends_with('\n'));
        assert!(!text.contains('\r'));
        assert_eq!(text.len(), "QRSYM 1 21 1 Q 3\n".len() + 21 * 22);
    }

    #[test]
    fn parses_what_it_writes() {
        let s = sample();
        assert_eq!(SymbolFile::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn rejects_malformed_files() {
        let good = sample().to_text();
        let cases = vec![
            String::new(),
            good.replacen("QRSYM", "QRSIM", 1),
            good.replacen("21 1", "25 1", 1),
            good.replacen(" Q ", " X ", 1),
            good.replacen(" 3\n", " 9\n", 1),
            good.trim_end().to_string(),
            good.clone() + "0\n",
            good.replacen("1001", "1021", 1),
            good.replacen("\n", "\r\n", 2),
        ];
        for c in cases {
            assert!(SymbolFile::parse(&c).is_err(), "{c:?}");
        }
    }

    #[test]
    fn pbm_has_quiet_zone() {
        let pbm = sample().to_pbm();
        let mut lines = pbm.lines();
        assert_eq!(lines.next(), Some("P1"));
        assert_eq!(lines.next(), Some("29 29"));
        let first = lines.next().unwrap();
        assert!(first.split(' ').all(|c| c == "0"));
        assert_eq!(pbm.lines().count(), 2 + 29);
    }
}
