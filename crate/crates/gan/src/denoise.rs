//! Segment-level inference: encode → `[−1, 1]` → generator → back onto the
//! contaminated input's amplitude range.

use crate::checkpoint::Checkpoint;
use crate::model::{Generator, GeneratorConfig};
use crate::tensor::Tensor;
use crate::train::{segment_grid, TargetScale};
use crate::{GanError, Result};
use emgscrub_core::codec::{decode_as, decode_on, from_network_range, ScaleInfo, IMAGE_PIXELS, IMAGE_SIDE};
use emgscrub_core::metrics::Denoiser;
use emgscrub_core::{Segment, SegmentKind};

const INFER_BATCH: usize = 64;

#[derive(Clone, Debug)]
pub struct GanDenoiser {
    generator: Generator<f32>,
    scale: TargetScale,
}

impl GanDenoiser {
    /// `scale` must match the one the generator was trained with.
    pub fn new(generator: Generator<f32>, scale: TargetScale) -> Self {
        GanDenoiser { generator, scale }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        Ok(GanDenoiser::new(ckpt.generator_model()?, ckpt.train.target_scale))
    }

    /// Like [`GanDenoiser::from_checkpoint`], but also insist on a specific
    /// architecture (dropout rate aside).
    pub fn from_checkpoint_expecting(ckpt: &Checkpoint, expected: &GeneratorConfig) -> Result<Self> {
        let stored = GeneratorConfig {
            dropout: expected.dropout,
            ..ckpt.generator.clone()
        };
        if &stored != expected {
            return Err(GanError::Incompatible(format!(
                "checkpoint generator {:?} differs from configured {:?}",
                ckpt.generator, expected
            )));
        }
        Self::from_checkpoint(ckpt)
    }

    pub fn generator(&self) -> &Generator<f32> {
        &self.generator
    }

    pub fn denoise_segments(&self, inputs: &[Segment]) -> Result<Vec<Segment>> {
        if self.generator.config.image_side != IMAGE_SIDE || self.generator.config.in_channels != 1 {
            return Err(GanError::Incompatible(format!(
                "generator works on {0}x{0}x{1} images, segments need {IMAGE_SIDE}x{IMAGE_SIDE}x1",
                self.generator.config.image_side, self.generator.config.in_channels
            )));
        }
        let mut out = Vec::with_capacity(inputs.len());
        for chunk in inputs.chunks(INFER_BATCH) {
            let mut data = Vec::with_capacity(chunk.len() * IMAGE_PIXELS);
            for seg in chunk {
                data.extend(segment_grid(seg));
            }
            let x = Tensor::from_vec(data, [1, chunk.len(), IMAGE_SIDE, IMAGE_SIDE]);
            let y = self.generator.infer(&x)?;
            for (seg, grid) in chunk.iter().zip(y.data.chunks(IMAGE_PIXELS)) {
                let grid: Vec<f64> = grid.iter().map(|&v| v as f64).collect();
                let img = from_network_range(&grid)?;
                let scale = ScaleInfo::of(seg);
                out.push(match self.scale {
                    TargetScale::Contaminated => decode_on(&img, scale, SegmentKind::Denoised),
                    TargetScale::Own => decode_as(&img, scale, SegmentKind::Denoised),
                });
            }
        }
        Ok(out)
    }
}

impl Denoiser for GanDenoiser {
    fn name(&self) -> &str {
        "pix2pix"
    }

    fn denoise(&self, contaminated: &Segment) -> emgscrub_core::Result<Segment> {
        Ok(self.denoise_batch(std::slice::from_ref(contaminated))?.remove(0))
    }

    fn denoise_batch(&self, batch: &[Segment]) -> emgscrub_core::Result<Vec<Segment>> {
        self.denoise_segments(batch)
            .map_err(|e| emgscrub_core::Error::InvalidData(e.to_string()))
    }
}

/// One-shot convenience wrapper.
pub fn denoise(ckpt: &Checkpoint, contaminated: &Segment) -> Result<Segment> {
    let d = GanDenoiser::from_checkpoint(ckpt)?;
    Ok(d.denoise_segments(std::slice::from_ref(contaminated))?.remove(0))
}
