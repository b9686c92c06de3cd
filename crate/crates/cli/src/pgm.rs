//! Grayscale PGM (P2 ASCII and P5 binary), maxval up to 255.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("truncated payload: expected {expected} pixels, data ends at byte {offset}")]
    Truncated { offset: usize, expected: usize },
    #[error("invalid image: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageGray {
    pub width: usize,
    pub height: usize,
    /// Row-major, each in `[0, 1]`.
    pub pixels: Vec<f64>,
}

impl ImageGray {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, PgmError> {
        if width == 0 || height == 0 || width * height != pixels.len() {
            return Err(PgmError::Invalid(format!(
                "{width}x{height} image with {} pixels",
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(PgmError::Invalid("pixels must lie in [0, 1]".into()));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn nonzero_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p != 0.0).count()
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            let msg = if start == self.data.len() {
                format!("unexpected end of data, expected {what}")
            } else {
                format!("expected {what}, found {:?}", self.data[start] as char)
            };
            return Err(PgmError::Parse { offset: start, msg });
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| PgmError::Parse { offset: start, msg: format!("{what} out of range") })
    }
}

pub fn parse_pgm(data: &[u8]) -> Result<ImageGray, PgmError> {
    let binary = match data.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(PgmError::Parse { offset: 0, msg: "missing P2/P5 magic number".into() }),
    };
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    cur.skip_space_and_comments();
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(PgmError::Parse { offset: maxval_at, msg: format!("maxval {maxval} not in 1..=255") });
    }
    if width == 0 || height == 0 {
        return Err(PgmError::Invalid(format!("{width}x{height} image")));
    }
    let count = width * height;
    let scale = maxval as f64;
    let mut raw = Vec::with_capacity(count);
    if binary {
        match data.get(cur.pos) {
            Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
            Some(_) => {
                return Err(PgmError::Parse { offset: cur.pos, msg: "expected whitespace after maxval".into() })
            }
            None => return Err(PgmError::Truncated { offset: cur.pos, expected: count }),
        }
        let payload = &data[cur.pos..];
        if payload.len() < count {
            return Err(PgmError::Truncated { offset: data.len(), expected: count });
        }
        raw.extend(payload[..count].iter().map(|&b| b as usize));
    } else {
        for _ in 0..count {
            cur.skip_space_and_comments();
            if cur.pos >= data.len() {
                return Err(PgmError::Truncated { offset: data.len(), expected: count });
            }
            raw.push(cur.number("pixel value")?);
        }
    }
    if let Some(i) = raw.iter().position(|&v| v > maxval) {
        return Err(PgmError::Invalid(format!("pixel {i} exceeds maxval {maxval}")));
    }
    ImageGray::new(width, height, raw.into_iter().map(|v| v as f64 / scale).collect())
}

pub fn read_pgm(path: &Path) -> Result<ImageGray, PgmError> {
    parse_pgm(&std::fs::read(path)?)
}

fn quantize(p: f64) -> u8 {
    (p.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn encode_pgm(img: &ImageGray, binary: bool) -> Vec<u8> {
    let mut out = format!("{}\n{} {}\n255\n", if binary { "P5" } else { "P2" }, img.width, img.height).into_bytes();
    if binary {
        out.extend(img.pixels.iter().map(|&p| quantize(p)));
    } else {
        for row in img.pixels.chunks(img.width) {
            let line: Vec<String> = row.iter().map(|&p| quantize(p).to_string()).collect();
            out.extend(line.join(" ").bytes());
            out.push(b'\n');
        }
    }
    out
}

/// Binary P5; values are clamped to `[0, 1]` and rounded to the nearest
/// level.
pub fn write_pgm(img: &ImageGray, path: &Path) -> Result<(), PgmError> {
    std::fs::write(path, encode_pgm(img, true))?;
    Ok(())
}
