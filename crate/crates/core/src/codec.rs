//! Segment ⇄ 32×32 image conversion.
//!
//! Forward: min-max normalize a segment to `[0, 1]` and reshape row-major
//! (sample `i` ↦ row `i / 32`, column `i % 32`). Inverse: renormalize the
//! image by its own pixel extrema, then map affinely onto `[y_min, y_max]`.
//! Constant inputs encode to a flat 0.5 image and flat images decode to the
//! midpoint of the target range.

use crate::error::{Error, Result};
use crate::signal::{Segment, SegmentKind, SEGMENT_LEN};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

pub const IMAGE_SIDE: usize = 32;
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;

const _: () = assert!(IMAGE_PIXELS == SEGMENT_LEN);

/// 32×32 grid of pixel intensities in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentImage {
    pixels: Vec<f64>,
}

impl SegmentImage {
    pub fn new(pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != IMAGE_PIXELS {
            return Err(Error::InvalidData(format!(
                "image has {} pixels, expected {IMAGE_PIXELS}",
                pixels.len()
            )));
        }
        if let Some(i) = pixels
            .iter()
            .position(|p| !(p.is_finite() && (0.0..=1.0).contains(p)))
        {
            return Err(Error::InvalidData(format!(
                "pixel {i} = {} is outside [0, 1]",
                pixels[i]
            )));
        }
        Ok(SegmentImage { pixels })
    }

    pub fn uniform(value: f64) -> Result<Self> {
        SegmentImage::new(vec![value; IMAGE_PIXELS])
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * IMAGE_SIDE + col]
    }

    fn extrema(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
                (lo.min(p), hi.max(p))
            })
    }
}

/// Amplitude range a decoded image is mapped back onto.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleInfo {
    pub y_min: f64,
    pub y_max: f64,
}

impl ScaleInfo {
    pub fn new(y_min: f64, y_max: f64) -> Result<Self> {
        if !(y_min.is_finite() && y_max.is_finite() && y_max >= y_min) {
            return Err(Error::InvalidArgument(format!(
                "invalid scale range [{y_min}, {y_max}]"
            )));
        }
        Ok(ScaleInfo { y_min, y_max })
    }

    pub fn of(seg: &Segment) -> Self {
        let (y_min, y_max) = seg.min_max();
        ScaleInfo { y_min, y_max }
    }

    pub fn range(&self) -> f64 {
        self.y_max - self.y_min
    }
}

pub fn encode(seg: &Segment) -> (SegmentImage, ScaleInfo) {
    let scale = ScaleInfo::of(seg);
    (encode_on(seg, scale), scale)
}

/// Pixels of `seg` on a given amplitude range, clamped to `[0, 1]`.
pub fn encode_on(seg: &Segment, scale: ScaleInfo) -> SegmentImage {
    let range = scale.range();
    let pixels = if range > 0.0 {
        seg.samples()
            .iter()
            .map(|v| ((v - scale.y_min) / range).clamp(0.0, 1.0))
            .collect()
    } else {
        vec![0.5; IMAGE_PIXELS]
    };
    SegmentImage { pixels }
}

/// Inverse mapping; the result is tagged [`SegmentKind::Denoised`].
pub fn decode(img: &SegmentImage, scale: ScaleInfo) -> Segment {
    decode_as(img, scale, SegmentKind::Denoised)
}

pub fn decode_as(img: &SegmentImage, scale: ScaleInfo, kind: SegmentKind) -> Segment {
    let (x_min, x_max) = img.extrema();
    let samples = if x_max > x_min {
        let span = x_max - x_min;
        img.pixels
            .iter()
            .map(|p| (p - x_min) / span * scale.range() + scale.y_min)
            .collect()
    } else {
        vec![0.5 * (scale.y_min + scale.y_max); SEGMENT_LEN]
    };
    Segment::new(samples, kind).expect("decoded samples are finite")
}

/// Exact inverse of [`encode_on`]: `p·(y_max − y_min) + y_min`, with no
/// renormalization by the image's own extrema.
pub fn decode_on(img: &SegmentImage, scale: ScaleInfo, kind: SegmentKind) -> Segment {
    let samples = img.pixels.iter().map(|p| p * scale.range() + scale.y_min).collect();
    Segment::new(samples, kind).expect("decoded samples are finite")
}

/// `u ↦ 2u − 1`, the generator's Tanh range.
pub fn to_network_range(img: &SegmentImage) -> Vec<f64> {
    img.pixels.iter().map(|u| 2.0 * u - 1.0).collect()
}

/// Clamp network output into `[−1, 1]` and map back to `[0, 1]`.
pub fn from_network_range(grid: &[f64]) -> Result<SegmentImage> {
    if grid.len() != IMAGE_PIXELS {
        return Err(Error::InvalidData(format!(
            "network grid has {} values, expected {IMAGE_PIXELS}",
            grid.len()
        )));
    }
    let pixels = grid
        .iter()
        .map(|&v| {
            let v = if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) };
            (v + 1.0) / 2.0
        })
        .collect();
    SegmentImage::new(pixels)
}

/// 8-bit quantization, round half up.
pub fn quantize(p: f64) -> u8 {
    (p * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

pub fn export_png(img: &SegmentImage, path: &Path) -> Result<()> {
    let png_err = |e: png::EncodingError| Error::Png {
        path: path.to_owned(),
        reason: e.to_string(),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), IMAGE_SIDE as u32, IMAGE_SIDE as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let bytes: Vec<u8> = img.pixels.iter().map(|&p| quantize(p)).collect();
    let mut writer = encoder.write_header().map_err(png_err)?;
    writer.write_image_data(&bytes).map_err(png_err)?;
    writer.finish().map_err(png_err)
}

/// Reads a 32×32 PNG. Colour images are reduced to the mean of R, G and B.
pub fn import_png(path: &Path) -> Result<SegmentImage> {
    let png_err = |reason: String| Error::Png {
        path: path.to_owned(),
        reason,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder.read_info().map_err(|e| png_err(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| png_err("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| png_err(e.to_string()))?;
    if info.width as usize != IMAGE_SIDE || info.height as usize != IMAGE_SIDE {
        return Err(png_err(format!(
            "expected {IMAGE_SIDE}x{IMAGE_SIDE}, got {}x{}",
            info.width, info.height
        )));
    }
    let channels = info.color_type.samples();
    let data = &buf[..info.buffer_size()];
    let pixels = data
        .chunks_exact(channels)
        .map(|px| {
            let v = match channels {
                1 | 2 => px[0] as f64,
                _ => (px[0] as f64 + px[1] as f64 + px[2] as f64) / 3.0,
            };
            v / 255.0
        })
        .collect();
    SegmentImage::new(pixels)
}
