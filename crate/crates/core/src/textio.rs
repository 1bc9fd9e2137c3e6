//! Plain and gzip-compressed text files shared by the dataset and results
//! stores.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::{Compression, GzBuilder};

/// Fixed compression level so identical payloads give identical bytes.
const GZIP_LEVEL: u32 = 6;

#[derive(Debug)]
pub(crate) enum ReadTextError {
    Io(io::Error),
    /// The bytes could not be decompressed or were not UTF-8.
    Decode(String),
}

/// Reads a whole text file, transparently inflating it when the name ends in
/// `.gz`.
pub(crate) fn read_text(path: &Path) -> Result<String, ReadTextError> {
    let raw = fs::read(path).map_err(ReadTextError::Io)?;
    let bytes = if is_gzip_path(path) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| ReadTextError::Decode(format!("gzip: {e}")))?;
        out
    } else {
        raw
    };
    String::from_utf8(bytes).map_err(|e| ReadTextError::Decode(format!("utf-8: {e}")))
}

/// Writes `text` to `path`, gzip-compressed when the name ends in `.gz`.
/// The gzip header carries no file name and a zero timestamp.
pub(crate) fn write_text(path: &Path, text: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let bytes = if is_gzip_path(path) {
        gzip(text.as_bytes())?
    } else {
        text.as_bytes().to_vec()
    };
    fs::write(path, bytes)
}

pub(crate) fn gzip(payload: &[u8]) -> io::Result<Vec<u8>> {
    let mut encoder = GzBuilder::new()
        .mtime(0)
        .operating_system(255)
        .write(Vec::new(), Compression::new(GZIP_LEVEL));
    encoder.write_all(payload)?;
    encoder.finish()
}

fn is_gzip_path(path: &Path) -> bool {
    path.extension().is_some_and(|ext| ext == "gz")
}

/// Iterates over the meaningful lines of a text file together with their
/// 1-based line numbers. Trailing `\r` is stripped and blank lines are
/// skipped; comment lines (leading `%` or `#`) are skipped when
/// `allow_comments` is set.
pub(crate) fn content_lines(
    text: &str,
    allow_comments: bool,
) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n').enumerate().filter_map(move |(i, line)| {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            return None;
        }
        if allow_comments && (trimmed.starts_with('%') || trimmed.starts_with('#')) {
            return None;
        }
        Some((i + 1, line))
    })
}

/// Shortest decimal text that parses back to exactly `value`.
pub(crate) fn format_coordinate(value: f64) -> String {
    let magnitude = value.abs();
    if value == 0.0 || (1e-5..1e16).contains(&magnitude) {
        format!("{value}")
    } else {
        format!("{value:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_round_trip_exactly() {
        for v in [
            0.0,
            -0.0,
            1.0,
            -2.5,
            0.1,
            1.0 / 3.0,
            1e-300,
            6.02214076e23,
            f64::MAX,
            f64::MIN_POSITIVE,
            5e-324,
            123456789.12345679,
        ] {
            let text = format_coordinate(v);
            let back: f64 = text.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {text}");
        }
    }

    #[test]
    fn content_lines_skip_comments_and_crlf() {
        let text = "# header\r\n1 2\r\n\n% other\n3 4";
        let lines: Vec<_> = content_lines(text, true).collect();
        assert_eq!(lines, vec![(2, "1 2"), (5, "3 4")]);
        let lines: Vec<_> = content_lines(text, false).collect();
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn gzip_is_deterministic() {
        let a = gzip(b"1\n2\n3\n").unwrap();
        let b = gzip(b"1\n2\n3\n").unwrap();
        assert_eq!(a, b);
        // mtime field is zero
        assert_eq!(&a[4..8], &[0, 0, 0, 0]);
    }
}
