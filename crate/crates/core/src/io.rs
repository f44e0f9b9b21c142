//! PGM images, raw `.f64` field dumps and diagnostics CSV.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::inpaint::RunDiagnostics;

/// Decoded PGM raster, samples in `0..=maxval`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
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

    fn number(&mut self, what: &str) -> std::result::Result<u64, String> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.data.len() {
                format!("truncated data while reading {what}")
            } else {
                format!("expected {what}, found byte {:#04x}", self.data[self.pos])
            });
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| format!("{what} is too large"))
    }
}

pub fn decode_pgm(data: &[u8], path: &Path) -> Result<Pgm> {
    let err = |m: String| Error::format(path, m);
    let binary = match data.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        Some(m) => {
            return Err(err(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(m)
            )))
        }
        None => return Err(err("file too short for a PGM header".into())),
    };
    let mut h = Header { data, pos: 2 };
    let width = h.number("width").map_err(err)? as usize;
    let height = h.number("height").map_err(err)? as usize;
    let maxval = h.number("maxval").map_err(err)?;
    if width == 0 || height == 0 {
        return Err(err(format!("empty image {width}x{height}")));
    }
    if !(1..=65535).contains(&maxval) {
        return Err(err(format!("maxval {maxval} outside 1..=65535")));
    }
    let maxval = maxval as u16;
    let count = width
        .checked_mul(height)
        .ok_or_else(|| err("image dimensions overflow".into()))?;

    let mut pixels = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        if h.pos >= data.len() || !data[h.pos].is_ascii_whitespace() {
            return Err(err("truncated data after header".into()));
        }
        let raster = &data[h.pos + 1..];
        let bytes = if maxval > 255 { 2 } else { 1 };
        if raster.len() < count * bytes {
            return Err(err(format!(
                "truncated data: {} of {} raster bytes",
                raster.len(),
                count * bytes
            )));
        }
        if bytes == 1 {
            pixels.extend(raster[..count].iter().map(|&b| b as u16));
        } else {
            pixels.extend(
                raster[..2 * count]
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]])),
            );
        }
    } else {
        for i in 0..count {
            let v = h
                .number("pixel value")
                .map_err(|m| err(format!("pixel {i}: {m}")))?;
            pixels.push(v.min(u16::MAX as u64) as u16);
        }
    }
    if let Some(i) = pixels.iter().position(|&p| p > maxval) {
        return Err(err(format!(
            "pixel {i} value {} exceeds maxval {maxval}",
            pixels[i]
        )));
    }
    Ok(Pgm {
        width,
        height,
        maxval,
        pixels,
    })
}

/// Binary (P5) encoding; 16-bit samples are big-endian.
pub fn encode_pgm(pgm: &Pgm) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", pgm.width, pgm.height, pgm.maxval).into_bytes();
    if pgm.maxval > 255 {
        for &p in &pgm.pixels {
            out.extend_from_slice(&p.to_be_bytes());
        }
    } else {
        out.extend(pgm.pixels.iter().map(|&p| p as u8));
    }
    out
}

pub fn read_pgm(path: &Path) -> Result<Pgm> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&data, path)
}

fn to_field(pgm: &Pgm, path: &Path) -> Result<ScalarField> {
    let m = pgm.maxval as f64;
    ScalarField::new(
        pgm.width,
        pgm.height,
        pgm.pixels.iter().map(|&p| p as f64 / m).collect(),
    )
    .map_err(|e| Error::format(path, e.to_string()))
}

/// Grayscale image mapped linearly to `[0, 1]`.
pub fn load_image(path: &Path) -> Result<ScalarField> {
    to_field(&read_pgm(path)?, path)
}

/// Inpainting mask: pixel `0` is unknown (`0.0`), anything else known (`1.0`).
pub fn load_mask(path: &Path, dims: (usize, usize)) -> Result<ScalarField> {
    let pgm = read_pgm(path)?;
    if (pgm.width, pgm.height) != dims {
        return Err(Error::format(
            path,
            format!(
                "mask is {}x{} but the image is {}x{}",
                pgm.width, pgm.height, dims.0, dims.1
            ),
        ));
    }
    let values = pgm
        .pixels
        .iter()
        .map(|&p| if p > 0 { 1.0 } else { 0.0 })
        .collect();
    ScalarField::new(pgm.width, pgm.height, values).map_err(|e| Error::format(path, e.to_string()))
}

/// Clamps to `[0, 1]` and quantises to `maxval`.
pub fn field_to_pgm(u: &ScalarField, maxval: u16) -> Pgm {
    let m = maxval as f64;
    Pgm {
        width: u.width(),
        height: u.height(),
        maxval,
        pixels: u
            .values()
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * m).round() as u16)
            .collect(),
    }
}

pub fn write_image(path: &Path, u: &ScalarField, sixteen_bit: bool) -> Result<()> {
    let pgm = field_to_pgm(u, if sixteen_bit { 65535 } else { 255 });
    fs::write(path, encode_pgm(&pgm)).map_err(|e| Error::io(path, e))
}

pub const DUMP_MAGIC: &[u8; 4] = b"CHUQ";
pub const DUMP_HEADER: usize = 16;

/// `CHUQ`, u32 LE width, u32 LE height, four zero bytes, then row-major
/// f64 LE values.
pub fn encode_dump(u: &ScalarField) -> Vec<u8> {
    let mut out = Vec::with_capacity(DUMP_HEADER + 8 * u.len());
    out.extend_from_slice(DUMP_MAGIC);
    out.extend_from_slice(&(u.width() as u32).to_le_bytes());
    out.extend_from_slice(&(u.height() as u32).to_le_bytes());
    out.extend_from_slice(&[0; 4]);
    for v in u.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_dump(data: &[u8], path: &Path) -> Result<ScalarField> {
    if data.len() < DUMP_HEADER {
        return Err(Error::format(path, "truncated dump header"));
    }
    if &data[..4] != DUMP_MAGIC {
        return Err(Error::format(path, "not a CHUQ dump"));
    }
    let width = u32::from_le_bytes(data[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(data[8..12].try_into().unwrap()) as usize;
    let body = &data[DUMP_HEADER..];
    if body.len() != 8 * width * height {
        return Err(Error::format(
            path,
            format!(
                "expected {} bytes of values, found {}",
                8 * width * height,
                body.len()
            ),
        ));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ScalarField::new(width, height, values).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_dump(path: &Path, u: &ScalarField) -> Result<()> {
    fs::write(path, encode_dump(u)).map_err(|e| Error::io(path, e))
}

pub fn read_dump(path: &Path) -> Result<ScalarField> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dump(&data, path)
}

pub fn write_diagnostics(path: &Path, diag: &RunDiagnostics) -> Result<()> {
    let mut out = String::from("step,time,E1,E2,residual,mass\n");
    for r in &diag.records {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.step, r.time, r.e1, r.e2, r.residual, r.mass
        ));
    }
    write_text(path, &out)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
