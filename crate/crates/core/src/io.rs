//! File formats: Radiance RGBE and PFM for HDR input, PNG and binary PPM for
//! LDR output.
//!
//! The HDR readers sniff the magic bytes rather than trusting the extension.
//! RGBE mantissas decode with the Radiance convention
//! `(m + 0.5) / 256 * 2^(e - 128)`, and an exponent byte of zero means black.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{HdrImage, LdrImage};

/// Largest raster accepted from a file header.
const MAX_PIXELS: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdrFormat {
    Rgbe,
    Pfm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdrFormat {
    Png,
    Ppm,
}

impl LdrFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "png" => Some(Self::Png),
            "ppm" => Some(Self::Ppm),
            _ => None,
        }
    }
}

pub fn sniff_hdr_format(bytes: &[u8]) -> Option<HdrFormat> {
    if bytes.starts_with(b"#?") {
        Some(HdrFormat::Rgbe)
    } else if bytes.starts_with(b"PF") || bytes.starts_with(b"Pf") {
        Some(HdrFormat::Pfm)
    } else {
        None
    }
}

pub fn load_hdr(path: impl AsRef<Path>) -> Result<HdrImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    decode_hdr(&bytes)
}

pub fn decode_hdr(bytes: &[u8]) -> Result<HdrImage> {
    match sniff_hdr_format(bytes) {
        Some(HdrFormat::Rgbe) => decode_rgbe(bytes),
        Some(HdrFormat::Pfm) => decode_pfm(bytes),
        None if bytes.len() < 2 => Err(Error::CorruptHeader(
            "file too short for a magic number".into(),
        )),
        None => Err(Error::UnsupportedFormat(
            "expected Radiance RGBE (#?) or PFM (PF/Pf) magic".into(),
        )),
    }
}

fn checked_dims(width: u64, height: u64) -> Result<(usize, usize)> {
    if width == 0 || height == 0 {
        return Err(Error::CorruptHeader(format!(
            "zero-sized raster {width}x{height}"
        )));
    }
    match width.checked_mul(height) {
        Some(n) if n <= MAX_PIXELS => Ok((width as usize, height as usize)),
        _ => Err(Error::DimensionOverflow { width, height }),
    }
}

// ---------------------------------------------------------------------------
// Radiance RGBE
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&mut self) -> Option<&'a [u8]> {
        if self.pos >= self.bytes.len() {
            return None;
        }
        let rest = &self.bytes[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n')?;
        self.pos += end + 1;
        Some(&rest[..end])
    }

    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let out = self.bytes.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(out)
    }

    fn byte(&mut self) -> Option<u8> {
        let b = *self.bytes.get(self.pos)?;
        self.pos += 1;
        Some(b)
    }
}

#[inline]
pub fn rgbe_to_rgb(rgbe: [u8; 4]) -> [f64; 3] {
    if rgbe[3] == 0 {
        return [0.0; 3];
    }
    let scale = 2f64.powi(rgbe[3] as i32 - 136);
    [
        (rgbe[0] as f64 + 0.5) * scale,
        (rgbe[1] as f64 + 0.5) * scale,
        (rgbe[2] as f64 + 0.5) * scale,
    ]
}

#[inline]
pub fn rgb_to_rgbe(rgb: [f64; 3]) -> [u8; 4] {
    let max = rgb[0].max(rgb[1]).max(rgb[2]);
    if max.is_nan() || max < 1e-32 {
        return [0; 4];
    }
    // max = mantissa * 2^exp with mantissa in [0.5, 1)
    let exp = max.log2().floor() as i32 + 1;
    let scale = 256.0 / 2f64.powi(exp);
    let enc = |c: f64| ((c.max(0.0) * scale) as u32).min(255) as u8;
    let e = (exp + 128).clamp(0, 255) as u8;
    [enc(rgb[0]), enc(rgb[1]), enc(rgb[2]), e]
}

fn decode_rgbe(bytes: &[u8]) -> Result<HdrImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur
        .line()
        .ok_or_else(|| Error::CorruptHeader("missing RGBE magic line".into()))?;
    if !magic.starts_with(b"#?") {
        return Err(Error::CorruptHeader("missing #? magic".into()));
    }
    loop {
        let line = cur
            .line()
            .ok_or_else(|| Error::CorruptHeader("header not terminated by a blank line".into()))?;
        let line = trim(line);
        if line.is_empty() {
            break;
        }
        if let Some(fmt) = line.strip_prefix(b"FORMAT=") {
            if trim(fmt) != b"32-bit_rle_rgbe" {
                return Err(Error::UnsupportedFormat(format!(
                    "RGBE pixel format {}",
                    String::from_utf8_lossy(fmt)
                )));
            }
        }
    }
    let res = cur
        .line()
        .ok_or_else(|| Error::CorruptHeader("missing resolution line".into()))?;
    let res = std::str::from_utf8(res)
        .map_err(|_| Error::CorruptHeader("non-ASCII resolution line".into()))?;
    let tokens: Vec<&str> = res.split_whitespace().collect();
    let (flip_y, height, width) = match tokens.as_slice() {
        ["-Y", h, "+X", w] => (false, *h, *w),
        ["+Y", h, "+X", w] => (true, *h, *w),
        [a, _, b, _] if a.len() == 2 && b.len() == 2 => {
            return Err(Error::UnsupportedFormat(format!(
                "RGBE orientation '{res}'"
            )))
        }
        _ => return Err(Error::CorruptHeader(format!("bad resolution line '{res}'"))),
    };
    let parse = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| Error::CorruptHeader(format!("bad dimension '{s}'")))
    };
    let (width, height) = checked_dims(parse(width)?, parse(height)?)?;

    let mut pixels = vec![[0.0; 3]; width * height];
    let mut scan = vec![[0u8; 4]; width];
    for row in 0..height {
        read_rgbe_scanline(&mut cur, &mut scan)
            .ok_or_else(|| Error::CorruptData(format!("truncated or malformed scanline {row}")))?;
        let y = if flip_y { height - 1 - row } else { row };
        for (dst, src) in pixels[y * width..(y + 1) * width].iter_mut().zip(&scan) {
            *dst = rgbe_to_rgb(*src);
        }
    }
    HdrImage::new(width, height, pixels)
}

fn read_rgbe_scanline(cur: &mut Cursor<'_>, scan: &mut [[u8; 4]]) -> Option<()> {
    let width = scan.len();
    let head = cur.take(4)?;
    let is_new_rle = (8..=0x7fff).contains(&width)
        && head[0] == 2
        && head[1] == 2
        && head[2] & 0x80 == 0
        && ((head[2] as usize) << 8 | head[3] as usize) == width;
    if is_new_rle {
        for channel in 0..4 {
            let mut x = 0;
            while x < width {
                let count = cur.byte()? as usize;
                if count > 128 {
                    let run = count - 128;
                    let value = cur.byte()?;
                    if x + run > width {
                        return None;
                    }
                    scan[x..x + run].iter_mut().for_each(|p| p[channel] = value);
                    x += run;
                } else {
                    if count == 0 || x + count > width {
                        return None;
                    }
                    let literal = cur.take(count)?;
                    for (p, &v) in scan[x..x + count].iter_mut().zip(literal) {
                        p[channel] = v;
                    }
                    x += count;
                }
            }
        }
        return Some(());
    }

    // Flat pixels, possibly with old-style (1,1,1,n) repeat runs.
    let mut x = 0;
    let mut shift = 0;
    let mut px = [head[0], head[1], head[2], head[3]];
    loop {
        if px[0] == 1 && px[1] == 1 && px[2] == 1 {
            if x == 0 {
                return None;
            }
            let run = (px[3] as usize) << shift;
            let prev = scan[x - 1];
            if x + run > width {
                return None;
            }
            scan[x..x + run].iter_mut().for_each(|p| *p = prev);
            x += run;
            shift += 8;
        } else {
            scan[x] = px;
            x += 1;
            shift = 0;
        }
        if x >= width {
            return Some(());
        }
        let b = cur.take(4)?;
        px = [b[0], b[1], b[2], b[3]];
    }
}

fn trim(s: &[u8]) -> &[u8] {
    let start = s
        .iter()
        .position(|b| !b.is_ascii_whitespace())
        .unwrap_or(s.len());
    let end = s
        .iter()
        .rposition(|b| !b.is_ascii_whitespace())
        .map_or(start, |e| e + 1);
    &s[start..end]
}

/// Encodes an HDR raster as Radiance RGBE with new-style run-length scanlines.
pub fn encode_rgbe(img: &HdrImage) -> Vec<u8> {
    let (w, h) = img.dims();
    let mut out = Vec::new();
    out.extend_from_slice(b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n");
    out.extend_from_slice(format!("-Y {h} +X {w}\n").as_bytes());
    let rle = (8..=0x7fff).contains(&w);
    for y in 0..h {
        let scan: Vec<[u8; 4]> = img.pixels()[y * w..(y + 1) * w]
            .iter()
            .map(|&p| rgb_to_rgbe(p))
            .collect();
        if !rle {
            scan.iter().for_each(|p| out.extend_from_slice(p));
            continue;
        }
        out.extend_from_slice(&[2, 2, (w >> 8) as u8, (w & 0xff) as u8]);
        for channel in 0..4 {
            let values: Vec<u8> = scan.iter().map(|p| p[channel]).collect();
            encode_rle_channel(&values, &mut out);
        }
    }
    out
}

fn encode_rle_channel(values: &[u8], out: &mut Vec<u8>) {
    const MIN_RUN: usize = 4;
    let n = values.len();
    let mut x = 0;
    while x < n {
        // Find the next run of at least MIN_RUN identical bytes.
        let mut run_start = x;
        let mut run_len = 0;
        while run_start < n {
            run_len = 1;
            while run_start + run_len < n
                && run_len < 127
                && values[run_start + run_len] == values[run_start]
            {
                run_len += 1;
            }
            if run_len >= MIN_RUN {
                break;
            }
            run_start += run_len;
        }
        if run_len < MIN_RUN {
            run_start = n;
        }
        while x < run_start {
            let count = (run_start - x).min(128);
            out.push(count as u8);
            out.extend_from_slice(&values[x..x + count]);
            x += count;
        }
        if run_start < n {
            out.push(128 + run_len as u8);
            out.push(values[run_start]);
            x = run_start + run_len;
        }
    }
}

pub fn write_hdr(img: &HdrImage, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_rgbe(img))
}

// ---------------------------------------------------------------------------
// PFM
// ---------------------------------------------------------------------------

fn decode_pfm(bytes: &[u8]) -> Result<HdrImage> {
    let color = match &bytes[..2] {
        b"PF" => true,
        b"Pf" => false,
        _ => return Err(Error::CorruptHeader("bad PFM magic".into())),
    };
    // Magic, width, height and scale are whitespace-separated tokens; exactly
    // one whitespace byte follows the scale.
    let mut pos = 2;
    let mut tokens = Vec::with_capacity(3);
    while tokens.len() < 3 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos || pos >= bytes.len() {
            return Err(Error::CorruptHeader("truncated PFM header".into()));
        }
        tokens.push(
            std::str::from_utf8(&bytes[start..pos])
                .map_err(|_| Error::CorruptHeader("non-ASCII PFM header".into()))?,
        );
    }
    pos += 1;
    let dim = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| Error::CorruptHeader(format!("bad PFM dimension '{s}'")))
    };
    let (width, height) = checked_dims(dim(tokens[0])?, dim(tokens[1])?)?;
    let scale: f64 = tokens[2]
        .parse()
        .map_err(|_| Error::CorruptHeader(format!("bad PFM scale '{}'", tokens[2])))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::CorruptHeader(format!(
            "bad PFM scale '{}'",
            tokens[2]
        )));
    }
    let little_endian = scale < 0.0;
    let factor = scale.abs();
    let channels = if color { 3 } else { 1 };
    let need = width * height * channels * 4;
    let data = bytes
        .get(pos..pos + need)
        .ok_or_else(|| Error::CorruptData(format!("PFM payload needs {need} bytes")))?;

    let mut pixels = vec![[0.0; 3]; width * height];
    for (i, chunk) in data.chunks_exact(4 * channels).enumerate() {
        // rows are stored bottom-to-top
        let row = i / width;
        let x = i % width;
        let y = height - 1 - row;
        let mut px = [0.0; 3];
        for c in 0..channels {
            let b: [u8; 4] = chunk[4 * c..4 * c + 4].try_into().unwrap();
            let v = if little_endian {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            } as f64;
            if !v.is_finite() {
                return Err(Error::CorruptData(format!(
                    "non-finite PFM sample at ({x}, {y})"
                )));
            }
            px[c] = v.max(0.0) * factor;
        }
        if !color {
            px = [px[0]; 3];
        }
        pixels[y * width + x] = px;
    }
    HdrImage::new(width, height, pixels)
}

/// Encodes a little-endian colour PFM (scale -1).
pub fn encode_pfm(img: &HdrImage) -> Vec<u8> {
    let (w, h) = img.dims();
    let mut out = format!("PF\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 12);
    for y in (0..h).rev() {
        for p in &img.pixels()[y * w..(y + 1) * w] {
            for &c in p {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
    }
    out
}

pub fn write_pfm(img: &HdrImage, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_pfm(img))
}

// ---------------------------------------------------------------------------
// LDR
// ---------------------------------------------------------------------------

/// Writes an 8-bit image. Channel bytes are `round(clamp(v, 0, 1) * 255)`
/// with exact halves rounded up.
pub fn write_ldr(img: &LdrImage, path: impl AsRef<Path>, format: LdrFormat) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = img.dims();
    let rgb = img.to_rgb8();
    match format {
        LdrFormat::Ppm => {
            let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(&rgb);
            write_bytes(path, &out)
        }
        LdrFormat::Png => {
            let buf = image::RgbImage::from_raw(w as u32, h as u32, rgb)
                .ok_or_else(|| Error::InvalidImage("RGB buffer size mismatch".into()))?;
            let mut encoded = Vec::new();
            buf.write_to(
                &mut std::io::Cursor::new(&mut encoded),
                image::ImageFormat::Png,
            )?;
            write_bytes(path, &encoded)
        }
    }
}

/// Reads an 8-bit PNG or PPM back into `[0, 1]` display values.
pub fn read_ldr(path: impl AsRef<Path>) -> Result<LdrImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let decoded = image::load_from_memory(&bytes)?.to_rgb8();
    let (w, h) = decoded.dimensions();
    LdrImage::from_rgb8(w as usize, h as usize, decoded.as_raw())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let wrap = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(wrap)?;
    f.write_all(bytes).map_err(wrap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pfm_bytes(w: usize, h: usize, scale: &str, samples: &[f32], little: bool) -> Vec<u8> {
        let mut out = format!("PF\n{w} {h}\n{scale}\n").into_bytes();
        for s in samples {
            if little {
                out.extend_from_slice(&s.to_le_bytes());
            } else {
                out.extend_from_slice(&s.to_be_bytes());
            }
        }
        out
    }

    #[test]
    fn pfm_constant_decodes() {
        let img = decode_hdr(&pfm_bytes(2, 2, "-1.0", &[1.0; 12], true)).unwrap();
        assert_eq!(img.dims(), (2, 2));
        assert!(img.pixels().iter().all(|p| *p == [1.0, 1.0, 1.0]));
    }

    #[test]
    fn pfm_big_endian_and_row_order() {
        // bottom row first: bottom = 1, top = 2
        let samples = [1.0f32, 1.0, 1.0, 2.0, 2.0, 2.0];
        let img = decode_hdr(&pfm_bytes(1, 2, "1.0", &samples, false)).unwrap();
        assert_eq!(img.get(0, 0), [2.0; 3]);
        assert_eq!(img.get(0, 1), [1.0; 3]);
    }

    #[test]
    fn pfm_grayscale_and_scale() {
        let mut bytes = b"Pf\n2 1\n-2.0\n".to_vec();
        for s in [0.25f32, 0.5] {
            bytes.extend_from_slice(&s.to_le_bytes());
        }
        let img = decode_hdr(&bytes).unwrap();
        assert_eq!(img.get(0, 0), [0.5; 3]);
        assert_eq!(img.get(1, 0), [1.0; 3]);
    }

    #[test]
    fn pfm_truncated_payload() {
        let mut bytes = pfm_bytes(2, 2, "-1.0", &[1.0; 12], true);
        bytes.truncate(bytes.len() - 3);
        assert!(matches!(decode_hdr(&bytes), Err(Error::CorruptData(_))));
    }

    #[test]
    fn rgbe_mantissa_convention() {
        let v = rgbe_to_rgb([128, 128, 128, 129]);
        // (128 + 0.5) / 256 * 2^(129 - 128)
        assert_eq!(v, [1.00390625; 3]);
        assert_eq!(rgbe_to_rgb([200, 10, 3, 0]), [0.0; 3]);
    }

    #[test]
    fn rgbe_flat_file() {
        let mut bytes = b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 1 +X 2\n".to_vec();
        bytes.extend_from_slice(&[128, 128, 128, 129, 64, 0, 0, 130]);
        let img = decode_hdr(&bytes).unwrap();
        assert_eq!(img.get(0, 0), [1.00390625; 3]);
        assert_eq!(
            img.get(1, 0),
            [(64.5 / 256.0) * 4.0, 0.5 / 256.0 * 4.0, 0.5 / 256.0 * 4.0]
        );
    }

    #[test]
    fn rgbe_old_style_run() {
        let mut bytes = b"#?RADIANCE\n\n-Y 1 +X 4\n".to_vec();
        bytes.extend_from_slice(&[10, 20, 30, 128, 1, 1, 1, 3]);
        let img = decode_hdr(&bytes).unwrap();
        let first = img.get(0, 0);
        assert!(img.pixels().iter().all(|p| *p == first));
    }

    #[test]
    fn rgbe_new_rle_scanline() {
        // width 8: run of 8 for every channel
        let mut bytes = b"#?RGBE\nFORMAT=32-bit_rle_rgbe\n\n-Y 1 +X 8\n".to_vec();
        bytes.extend_from_slice(&[2, 2, 0, 8]);
        for v in [128u8, 64, 32, 129] {
            bytes.extend_from_slice(&[128 + 8, v]);
        }
        let img = decode_hdr(&bytes).unwrap();
        let expect = rgbe_to_rgb([128, 64, 32, 129]);
        assert!(img.pixels().iter().all(|p| *p == expect));
    }

    #[test]
    fn rgbe_bottom_up_orientation() {
        let mut bytes = b"#?RADIANCE\n\n+Y 2 +X 1\n".to_vec();
        bytes.extend_from_slice(&[128, 128, 128, 129, 128, 128, 128, 130]);
        let img = decode_hdr(&bytes).unwrap();
        assert_eq!(img.get(0, 1), [1.00390625; 3]);
    }

    #[test]
    fn truncated_header_is_corrupt() {
        let bytes = b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n";
        let err = decode_hdr(bytes).unwrap_err();
        assert!(matches!(err, Error::CorruptHeader(_)));
        assert!(err.to_string().contains("corrupt header"));
        assert!(matches!(decode_hdr(b"P"), Err(Error::CorruptHeader(_))));
        assert!(matches!(
            decode_hdr(b"PF\n3 "),
            Err(Error::CorruptHeader(_))
        ));
    }

    #[test]
    fn truncated_pixels_are_corrupt_data() {
        let mut bytes = b"#?RADIANCE\n\n-Y 2 +X 2\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 128]);
        assert!(matches!(decode_hdr(&bytes), Err(Error::CorruptData(_))));
    }

    #[test]
    fn rejects_unsupported_inputs() {
        assert!(matches!(
            decode_hdr(b"\x89PNG...."),
            Err(Error::UnsupportedFormat(_))
        ));
        let xyze = b"#?RADIANCE\nFORMAT=32-bit_rle_xyze\n\n-Y 1 +X 1\n\0\0\0\0";
        assert!(matches!(decode_hdr(xyze), Err(Error::UnsupportedFormat(_))));
        let huge = b"#?RADIANCE\n\n-Y 4000000000 +X 4000000000\n";
        assert!(matches!(
            decode_hdr(huge),
            Err(Error::DimensionOverflow { .. })
        ));
        let huge_pfm = b"PF\n99999999999 99999999999\n-1\n";
        assert!(matches!(
            decode_hdr(huge_pfm),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn missing_file_is_read_error() {
        assert!(matches!(
            load_hdr("/nonexistent/file.hdr"),
            Err(Error::Read { .. })
        ));
    }

    #[test]
    fn rgbe_roundtrip_rle_and_flat_widths() {
        for w in [3usize, 40] {
            let img = HdrImage::from_fn(w, 3, |x, y| {
                let v = if x % 7 < 4 {
                    2.0
                } else {
                    0.01 * (x + 1) as f64 * (y + 1) as f64
                };
                [v, v * 0.5, v * 3.0]
            })
            .unwrap();
            let back = decode_hdr(&encode_rgbe(&img)).unwrap();
            assert_eq!(back.dims(), img.dims());
            for (a, b) in img.pixels().iter().zip(back.pixels()) {
                for c in 0..3 {
                    assert!((a[c] - b[c]).abs() <= a[0].max(a[1]).max(a[2]) / 128.0);
                }
            }
        }
    }

    #[test]
    fn ldr_writers_quantize() {
        let dir = tempfile::tempdir().unwrap();
        let img = LdrImage::new(3, 1, vec![[0.0; 3], [1.0; 3], [0.5, 0.25, 0.75]]).unwrap();
        let ppm = dir.path().join("a.ppm");
        write_ldr(&img, &ppm, LdrFormat::Ppm).unwrap();
        let bytes = std::fs::read(&ppm).unwrap();
        let header = b"P6\n3 1\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(
            &bytes[header.len()..],
            &[0, 0, 0, 255, 255, 255, 128, 64, 191]
        );

        let png = dir.path().join("a.png");
        write_ldr(&img, &png, LdrFormat::Png).unwrap();
        let back = read_ldr(&png).unwrap();
        assert_eq!(back.to_rgb8(), img.to_rgb8());
        assert_eq!(read_ldr(&ppm).unwrap().to_rgb8(), img.to_rgb8());
    }

    #[test]
    fn unwritable_path() {
        let img = LdrImage::new(1, 1, vec![[0.0; 3]]).unwrap();
        let err = write_ldr(&img, "/nonexistent-dir/x.png", LdrFormat::Png).unwrap_err();
        assert!(matches!(err, Error::Write { .. }));
    }

    proptest! {
        #[test]
        fn constant_pfm_roundtrips_bit_exactly(v in 0.0f32..1e6, w in 1usize..6, h in 1usize..6) {
            let bytes = pfm_bytes(w, h, "-1.0", &vec![v; w * h * 3], true);
            let img = decode_hdr(&bytes).unwrap();
            prop_assert_eq!(encode_pfm(&img), bytes);
        }

        #[test]
        fn rgbe_encode_decode_relative_error(r in 1e-6f64..1e6, g in 0.0f64..1.0, b in 0.0f64..1.0) {
            let px = [r, r * g, r * b];
            let back = rgbe_to_rgb(rgb_to_rgbe(px));
            let max = r;
            for c in 0..3 {
                prop_assert!((back[c] - px[c]).abs() <= max / 256.0 + 1e-300);
            }
        }
    }
}
