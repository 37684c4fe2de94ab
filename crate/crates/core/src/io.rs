//! Spike and record containers, raw camera dumps, and 8-bit image export.
//!
//! SPK1 layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SPK1"
//! 4       2     width
//! 6       2     height
//! 8       4     fps (sampling rate, e.g. 20000)
//! 12      4     frame_count
//! 16      ...   frame_count frames of ceil(width*height/8) bytes
//! ```
//!
//! Pixel `p = y * width + x` of a frame lives in byte `p / 8`, bit `p % 8`
//! (least-significant bit first); pad bits are zero. Raw dumps are headerless
//! sequences of such frames.
//!
//! SPKR stores encoded reconstruction records: the same 16-byte header with
//! magic "SPKR", then for each pixel in row-major order a u32 record count
//! followed by that many u16 words (duration high byte, intensity low byte).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::types::{IntensityImage, SpikeVolume};

pub const SPK_MAGIC: &[u8; 4] = b"SPK1";
pub const SPKR_MAGIC: &[u8; 4] = b"SPKR";
pub const HEADER_LEN: usize = 16;
pub const DEFAULT_FPS: u32 = 20_000;
pub const DEFAULT_RAW_WIDTH: usize = 400;
pub const DEFAULT_RAW_HEIGHT: usize = 250;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpkHeader {
    pub width: u16,
    pub height: u16,
    pub fps: u32,
    pub frame_count: u32,
}

impl SpkHeader {
    fn to_bytes(self, magic: &[u8; 4]) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[..4].copy_from_slice(magic);
        b[4..6].copy_from_slice(&self.width.to_le_bytes());
        b[6..8].copy_from_slice(&self.height.to_le_bytes());
        b[8..12].copy_from_slice(&self.fps.to_le_bytes());
        b[12..16].copy_from_slice(&self.frame_count.to_le_bytes());
        b
    }

    fn parse(bytes: &[u8], magic: &[u8; 4], path: &Path) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Length {
                path: path.to_path_buf(),
                expected: HEADER_LEN as u64,
                actual: bytes.len() as u64,
            });
        }
        if &bytes[..4] != magic {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: format!(
                    "magic {:?}, expected {:?}",
                    String::from_utf8_lossy(&bytes[..4]),
                    String::from_utf8_lossy(magic)
                ),
            });
        }
        let header = Self {
            width: u16::from_le_bytes([bytes[4], bytes[5]]),
            height: u16::from_le_bytes([bytes[6], bytes[7]]),
            fps: u32::from_le_bytes(bytes[8..12].try_into().unwrap()),
            frame_count: u32::from_le_bytes(bytes[12..16].try_into().unwrap()),
        };
        if header.width == 0 || header.height == 0 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                reason: format!("geometry {}x{} is empty", header.width, header.height),
            });
        }
        Ok(header)
    }

    fn for_volume(volume: &SpikeVolume, fps: u32) -> Result<Self> {
        let narrow = |v: usize, what: &str| {
            u16::try_from(v).map_err(|_| Error::param(format!("{what} {v} does not fit in 16 bits")))
        };
        Ok(Self {
            width: narrow(volume.width(), "width")?,
            height: narrow(volume.height(), "height")?,
            fps,
            frame_count: u32::try_from(volume.frames())
                .map_err(|_| Error::param("frame count does not fit in 32 bits"))?,
        })
    }
}

pub fn frame_bytes(width: usize, height: usize) -> usize {
    (width * height).div_ceil(8)
}

/// Bit order within each payload byte.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BitOrder {
    #[default]
    LsbFirst,
    MsbFirst,
}

impl BitOrder {
    #[inline]
    fn shift(self, p: usize) -> usize {
        match self {
            BitOrder::LsbFirst => p % 8,
            BitOrder::MsbFirst => 7 - p % 8,
        }
    }
}

/// Frame-major packed payload of a volume.
pub fn pack_frames(volume: &SpikeVolume, order: BitOrder) -> Vec<u8> {
    let (pixels, frames) = (volume.pixel_count(), volume.frames());
    let fb = frame_bytes(volume.width(), volume.height());
    let mut out = vec![0u8; fb * frames];
    for p in 0..pixels {
        let (byte, shift) = (p / 8, order.shift(p));
        for (n, &bit) in volume.pixel_bits(p).iter().enumerate() {
            out[n * fb + byte] |= bit << shift;
        }
    }
    out
}

/// Inverse of [`pack_frames`]; `payload` must hold exactly `frames` frames.
pub fn unpack_frames(
    payload: &[u8],
    width: usize,
    height: usize,
    frames: usize,
    order: BitOrder,
) -> Result<SpikeVolume> {
    let fb = frame_bytes(width, height);
    debug_assert_eq!(payload.len(), fb * frames);
    let pixels = width * height;
    let mut bits = vec![0u8; pixels * frames];
    for (n, frame) in payload.chunks_exact(fb).enumerate() {
        for p in 0..pixels {
            bits[p * frames + n] = (frame[p / 8] >> order.shift(p)) & 1;
        }
    }
    SpikeVolume::from_pixel_major(width, height, frames, bits)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Serializes a volume to SPK1 bytes.
pub fn encode_spk(volume: &SpikeVolume, fps: u32) -> Result<Vec<u8>> {
    let header = SpkHeader::for_volume(volume, fps)?;
    let mut bytes = header.to_bytes(SPK_MAGIC).to_vec();
    bytes.extend(pack_frames(volume, BitOrder::LsbFirst));
    Ok(bytes)
}

pub fn decode_spk(bytes: &[u8], path: &Path) -> Result<(SpikeVolume, u32)> {
    let header = SpkHeader::parse(bytes, SPK_MAGIC, path)?;
    let (w, h) = (header.width as usize, header.height as usize);
    let expected = HEADER_LEN as u64 + header.frame_count as u64 * frame_bytes(w, h) as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::Length {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
        });
    }
    let volume = unpack_frames(
        &bytes[HEADER_LEN..],
        w,
        h,
        header.frame_count as usize,
        BitOrder::LsbFirst,
    )?;
    Ok((volume, header.fps))
}

pub fn write_spk(volume: &SpikeVolume, fps: u32, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_spk(volume, fps)?)
}

/// Reads an SPK1 file, returning the volume and its sampling rate.
pub fn read_spk(path: impl AsRef<Path>) -> Result<(SpikeVolume, u32)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_spk(&bytes, path)
}

/// Reads a headerless camera dump; the frame count follows from the file size.
pub fn read_raw(path: impl AsRef<Path>, width: usize, height: usize, order: BitOrder) -> Result<SpikeVolume> {
    let path = path.as_ref();
    if width == 0 || height == 0 {
        return Err(Error::param(format!("raw geometry {width}x{height} is empty")));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let fb = frame_bytes(width, height);
    if bytes.len() % fb != 0 {
        return Err(Error::Geometry {
            path: path.to_path_buf(),
            size: bytes.len() as u64,
            width,
            height,
            frame_bytes: fb,
            hint: geometry_hint(bytes.len()),
        });
    }
    unpack_frames(&bytes, width, height, bytes.len() / fb, order)
}

fn geometry_hint(size: usize) -> String {
    const KNOWN: [(usize, usize); 4] = [(400, 250), (250, 400), (256, 256), (128, 128)];
    let fits: Vec<String> = KNOWN
        .iter()
        .filter(|&&(w, h)| size > 0 && size.is_multiple_of(frame_bytes(w, h)))
        .map(|&(w, h)| format!("{w}x{h} ({} frames)", size / frame_bytes(w, h)))
        .collect();
    if fits.is_empty() {
        "; choose --width/--height so that ceil(width*height/8) divides the file size".to_string()
    } else {
        format!("; sizes that fit: {}", fits.join(", "))
    }
}

/// Encoded records of a whole volume, one word list per pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordFile {
    pub header: SpkHeader,
    pub records: Vec<Vec<u16>>,
}

pub fn encode_spkr(file: &RecordFile) -> Result<Vec<u8>> {
    let pixels = file.header.width as usize * file.header.height as usize;
    if file.records.len() != pixels {
        return Err(Error::DimensionMismatch {
            expected: format!("{pixels} pixel record lists"),
            actual: format!("{}", file.records.len()),
        });
    }
    let words: usize = file.records.iter().map(Vec::len).sum();
    let mut bytes = Vec::with_capacity(HEADER_LEN + 4 * pixels + 2 * words);
    bytes.extend(file.header.to_bytes(SPKR_MAGIC));
    for pixel in &file.records {
        bytes.extend((pixel.len() as u32).to_le_bytes());
        for w in pixel {
            bytes.extend(w.to_le_bytes());
        }
    }
    Ok(bytes)
}

pub fn decode_spkr(bytes: &[u8], path: &Path) -> Result<RecordFile> {
    let header = SpkHeader::parse(bytes, SPKR_MAGIC, path)?;
    let pixels = header.width as usize * header.height as usize;
    let mut records = Vec::with_capacity(pixels);
    let mut at = HEADER_LEN;
    let short = |needed: usize| Error::Length {
        path: path.to_path_buf(),
        expected: needed as u64,
        actual: bytes.len() as u64,
    };
    for _ in 0..pixels {
        let count = bytes
            .get(at..at + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize)
            .ok_or_else(|| short(at + 4))?;
        at += 4;
        let body = bytes.get(at..at + 2 * count).ok_or_else(|| short(at + 2 * count))?;
        records.push(body.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect());
        at += 2 * count;
    }
    if at != bytes.len() {
        return Err(Error::Length {
            path: path.to_path_buf(),
            expected: at as u64,
            actual: bytes.len() as u64,
        });
    }
    Ok(RecordFile { header, records })
}

pub fn write_spkr(file: &RecordFile, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &encode_spkr(file)?)
}

pub fn read_spkr(path: impl AsRef<Path>) -> Result<RecordFile> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_spkr(&bytes, path)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ImageFormat {
    #[default]
    Pgm,
    Png,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Pgm => "pgm",
            ImageFormat::Png => "png",
        }
    }

    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "pgm" => Some(ImageFormat::Pgm),
            "png" => Some(ImageFormat::Png),
            _ => None,
        }
    }
}

/// Writes an 8-bit grayscale image (binary PGM `P5` or PNG).
pub fn write_image(image: &IntensityImage, path: impl AsRef<Path>, format: ImageFormat) -> Result<()> {
    let path = path.as_ref();
    let pixels = image.quantized();
    match format {
        ImageFormat::Pgm => {
            let mut bytes = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
            bytes.extend(pixels);
            write_file(path, &bytes)
        }
        ImageFormat::Png => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            image::save_buffer(
                path,
                &pixels,
                image.width() as u32,
                image.height() as u32,
                image::ExtendedColorType::L8,
            )
            .map_err(|e| Error::Image {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })
        }
    }
}

/// Reads an 8-bit grayscale PGM or PNG back into an image.
pub fn read_image(path: impl AsRef<Path>) -> Result<IntensityImage> {
    let path = path.as_ref();
    match ImageFormat::from_path(path) {
        Some(ImageFormat::Png) => {
            let img = image::open(path).map_err(|e| Error::Image {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
            let gray = img.into_luma8();
            let (w, h) = gray.dimensions();
            IntensityImage::new(
                w as usize,
                h as usize,
                gray.into_raw().into_iter().map(f32::from).collect(),
            )
        }
        _ => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            let (w, h, data) = parse_pgm(&bytes, path)?;
            IntensityImage::new(w, h, data.iter().map(|&v| f32::from(v)).collect())
        }
    }
}

fn parse_pgm<'a>(bytes: &'a [u8], path: &Path) -> Result<(usize, usize, &'a [u8])> {
    let bad = |reason: &str| Error::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut fields = Vec::with_capacity(4);
    let mut at = 0;
    while fields.len() < 4 {
        while at < bytes.len() && bytes[at].is_ascii_whitespace() {
            at += 1;
        }
        if bytes.get(at) == Some(&b'#') {
            while at < bytes.len() && bytes[at] != b'\n' {
                at += 1;
            }
            continue;
        }
        let start = at;
        while at < bytes.len() && !bytes[at].is_ascii_whitespace() {
            at += 1;
        }
        if start == at {
            return Err(bad("truncated PGM header"));
        }
        fields.push(&bytes[start..at]);
    }
    // exactly one whitespace byte separates the header from the raster
    at += 1;
    if fields[0] != b"P5" {
        return Err(bad("not a binary PGM (P5)"));
    }
    let num = |f: &[u8]| -> Result<usize> {
        std::str::from_utf8(f)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad PGM header number"))
    };
    let (w, h, max) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if max != 255 {
        return Err(bad("only 8-bit PGM is supported"));
    }
    let data = bytes
        .get(at..)
        .filter(|d| d.len() == w * h)
        .ok_or_else(|| Error::Length {
            path: path.to_path_buf(),
            expected: (at + w * h) as u64,
            actual: bytes.len() as u64,
        })?;
    Ok((w, h, data))
}

/// `frame_00042.pgm` style name for frame `n`.
pub fn frame_file_name(n: usize, format: ImageFormat) -> String {
    format!("frame_{n:05}.{}", format.extension())
}

pub fn frame_path(dir: &Path, n: usize, format: ImageFormat) -> PathBuf {
    dir.join(frame_file_name(n, format))
}
