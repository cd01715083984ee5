//! Gaussian-blob videos.
//!
//! A single isotropic Gaussian blob moves with constant speed and elastic
//! boundary reflection inside a safety box; an optional camera path (bounded
//! sinusoidal pan/tilt, exponential zoom about the frame center) maps the
//! world position into image space. Frames are rendered analytically by
//! evaluating the Gaussian at the camera-transformed position, so the
//! recorded trajectory is exact image-space ground truth.
//!
//! The safety box keeps the blob at least two (zoomed) standard deviations
//! away from every frame edge; with that margin the truncated-mass centroid
//! shift stays far below the 0.5 px contract.

use crate::datagen::{CameraClass, MotionClass};
use crate::error::{Error, Result};
use crate::numerics::rng::Rng;
use crate::numerics::tensor::Tensor;

/// Cumulative zoom factors are clamped to this range so long videos cannot
/// zoom the blob out of the safety margins.
const ZOOM_CLAMP: (f64, f64) = (0.8, 1.25);

/// Pan amplitude as a fraction of min(H, W).
const PAN_AMP_FRAC: (f64, f64) = (0.03, 0.09);

/// Per-frame zoom factor magnitude range; sign is drawn separately, so the
/// factor lies in [1/1.005, 1.005].
const ZOOM_FACTOR: (f64, f64) = (1.001, 1.005);

#[derive(Debug, Clone, PartialEq)]
pub struct CameraPath {
    /// Sinusoidal pan amplitude in pixels, (row, col).
    pub pan_amp: (f64, f64),
    /// Pan period in frames; 0 disables pan.
    pub pan_period: f64,
    pub pan_phase: f64,
    /// Per-frame log zoom factor; 0 disables zoom.
    pub zoom_rate: f64,
}

impl CameraPath {
    pub fn fixed() -> Self {
        Self {
            pan_amp: (0.0, 0.0),
            pan_period: 0.0,
            pan_phase: 0.0,
            zoom_rate: 0.0,
        }
    }

    pub fn offset_at(&self, frame: usize) -> (f64, f64) {
        if self.pan_period <= 0.0 {
            return (0.0, 0.0);
        }
        let s = (std::f64::consts::TAU * frame as f64 / self.pan_period + self.pan_phase).sin();
        (self.pan_amp.0 * s, self.pan_amp.1 * s)
    }

    pub fn zoom_at(&self, frame: usize) -> f64 {
        (self.zoom_rate * frame as f64)
            .exp()
            .clamp(ZOOM_CLAMP.0, ZOOM_CLAMP.1)
    }

    fn max_zoom(&self) -> f64 {
        if self.zoom_rate > 0.0 {
            ZOOM_CLAMP.1
        } else {
            1.0
        }
    }
}

/// Everything needed to render one video deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    /// World-space start position (row, col).
    pub start: (f64, f64),
    /// World-space velocity in pixels per frame (row, col).
    pub velocity: (f64, f64),
    /// Blob standard deviation in world pixels.
    pub sigma: f64,
    /// Reflection box per axis: (row_lo, row_hi), (col_lo, col_hi).
    pub bounds_row: (f64, f64),
    pub bounds_col: (f64, f64),
    pub camera: CameraPath,
}

#[derive(Debug, Clone)]
pub struct SyntheticVideo {
    /// [F, H, W], values in [0, 1].
    pub frames: Tensor,
    pub motion: MotionClass,
    pub camera: CameraClass,
    pub seed: u64,
    /// Image-space blob center per frame, (row, col).
    pub trajectory: Vec<(f64, f64)>,
}

fn reflect_axis(pos: &mut f64, vel: &mut f64, lo: f64, hi: f64) {
    debug_assert!(hi > lo);
    loop {
        if *pos < lo {
            *pos = 2.0 * lo - *pos;
            *vel = -*vel;
        } else if *pos > hi {
            *pos = 2.0 * hi - *pos;
            *vel = -*vel;
        } else {
            break;
        }
    }
}

/// Render a fully specified blob video. Exposed separately from
/// [`gen_blob_video`] so tests can pin exact trajectories (zero velocity,
/// reflection-free runs, hand-built camera paths).
pub fn render_blob_video(
    spec: &BlobSpec,
    frames: usize,
    h: usize,
    w: usize,
) -> Result<(Tensor, Vec<(f64, f64)>)> {
    if frames == 0 || h == 0 || w == 0 {
        return Err(Error::Config("video extents must be positive".into()));
    }
    if !(spec.sigma > 0.0) {
        return Err(Error::Config(format!("blob sigma must be positive, got {}", spec.sigma)));
    }
    if spec.bounds_row.1 <= spec.bounds_row.0 || spec.bounds_col.1 <= spec.bounds_col.0 {
        return Err(Error::Config("reflection box is empty".into()));
    }
    let center = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let (mut pr, mut pc) = spec.start;
    let (mut vr, mut vc) = spec.velocity;
    let mut data = vec![0.0f64; frames * h * w];
    let mut trajectory = Vec::with_capacity(frames);
    for k in 0..frames {
        if k > 0 {
            pr += vr;
            pc += vc;
            reflect_axis(&mut pr, &mut vr, spec.bounds_row.0, spec.bounds_row.1);
            reflect_axis(&mut pc, &mut vc, spec.bounds_col.0, spec.bounds_col.1);
        }
        let z = spec.camera.zoom_at(k);
        let (or, oc) = spec.camera.offset_at(k);
        let qr = center.0 + z * (pr - center.0) + or;
        let qc = center.1 + z * (pc - center.1) + oc;
        let sigma_k = spec.sigma * z;
        let inv = 1.0 / (2.0 * sigma_k * sigma_k);
        let frame = &mut data[k * h * w..(k + 1) * h * w];
        for r in 0..h {
            let dr = r as f64 - qr;
            for c in 0..w {
                let dc = c as f64 - qc;
                frame[r * w + c] = (-(dr * dr + dc * dc) * inv).exp().clamp(0.0, 1.0);
            }
        }
        trajectory.push((qr, qc));
    }
    Ok((Tensor::from_parts(vec![frames, h, w], data), trajectory))
}

/// Draw a [`BlobSpec`] for the given classes and render it. Deterministic in
/// all arguments; the same seed always yields the same video bit for bit.
pub fn gen_blob_video(
    seed: u64,
    frames: usize,
    h: usize,
    w: usize,
    motion: MotionClass,
    camera: CameraClass,
) -> Result<SyntheticVideo> {
    gen_blob_video_sigma(seed, frames, h, w, motion, camera, 0.08 * h.min(w) as f64)
}

/// As [`gen_blob_video`] with an explicit blob standard deviation.
pub fn gen_blob_video_sigma(
    seed: u64,
    frames: usize,
    h: usize,
    w: usize,
    motion: MotionClass,
    camera: CameraClass,
    sigma: f64,
) -> Result<SyntheticVideo> {
    if frames < 4 {
        return Err(Error::Config(format!("need at least 4 frames, got {frames}")));
    }
    if h < 8 || w < 8 {
        return Err(Error::Config(format!("frames must be at least 8x8, got {h}x{w}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Config(format!("blob sigma must be positive, got {sigma}")));
    }
    let mut rng = Rng::new(seed);
    let min_side = h.min(w) as f64;

    let (pan, zoom) = match camera {
        CameraClass::Static => (false, false),
        CameraClass::PanTilt => (true, false),
        CameraClass::Zoom => (false, true),
        CameraClass::Complex => (true, true),
    };
    let mut cam = CameraPath::fixed();
    if pan {
        let amp = rng.range(PAN_AMP_FRAC.0 * min_side, PAN_AMP_FRAC.1 * min_side);
        let angle = rng.range(0.0, std::f64::consts::TAU);
        cam.pan_amp = (amp * angle.sin(), amp * angle.cos());
        cam.pan_period = rng.range(frames as f64, 2.0 * frames as f64);
        cam.pan_phase = rng.range(0.0, std::f64::consts::TAU);
    }
    if zoom {
        let factor = rng.range(ZOOM_FACTOR.0, ZOOM_FACTOR.1);
        let sign = if rng.coin() { 1.0 } else { -1.0 };
        cam.zoom_rate = sign * factor.ln();
    }

    // Safety box: after zoom and pan the blob center must stay at least
    // two zoomed standard deviations plus half a pixel inside the frame.
    let z_max = cam.max_zoom();
    let margin = 2.0 * sigma * z_max + 0.5;
    let half = |side: usize, amp: f64| -> Result<f64> {
        let hw = ((side as f64 - 1.0) / 2.0 - margin - amp.abs()) / z_max;
        if hw < 0.25 {
            return Err(Error::Config(format!(
                "frame side {side} too small for sigma {sigma} with this camera"
            )));
        }
        Ok(hw)
    };
    let hw_r = half(h, cam.pan_amp.0)?;
    let hw_c = half(w, cam.pan_amp.1)?;
    let center = ((h as f64 - 1.0) / 2.0, (w as f64 - 1.0) / 2.0);
    let bounds_row = (center.0 - hw_r, center.0 + hw_r);
    let bounds_col = (center.1 - hw_c, center.1 + hw_c);

    let (lo, hi) = motion.speed_range();
    let speed = rng.range(lo, hi);
    let dir = rng.range(0.0, std::f64::consts::TAU);
    let spec = BlobSpec {
        start: (
            rng.range(bounds_row.0, bounds_row.1),
            rng.range(bounds_col.0, bounds_col.1),
        ),
        velocity: (speed * dir.sin(), speed * dir.cos()),
        sigma,
        bounds_row,
        bounds_col,
        camera: cam,
    };
    let (frames_t, trajectory) = render_blob_video(&spec, frames, h, w)?;
    Ok(SyntheticVideo {
        frames: frames_t,
        motion,
        camera,
        seed,
        trajectory,
    })
}

/// Intensity-weighted centroid (row, col) of a rank-2 frame.
/// An all-zero frame is degenerate.
pub fn blob_centroid(frame: &Tensor) -> Result<(f64, f64)> {
    if frame.rank() != 2 {
        return Err(Error::Shape(format!(
            "centroid needs a rank-2 frame, got rank {}",
            frame.rank()
        )));
    }
    let (h, w) = (frame.shape()[0], frame.shape()[1]);
    let mut mass = 0.0;
    let mut mr = 0.0;
    let mut mc = 0.0;
    for r in 0..h {
        for c in 0..w {
            let v = frame.data()[r * w + c];
            mass += v;
            mr += v * r as f64;
            mc += v * c as f64;
        }
    }
    if mass <= 0.0 {
        return Err(Error::Degenerate("all-zero frame has no centroid".into()));
    }
    Ok((mr / mass, mc / mass))
}
