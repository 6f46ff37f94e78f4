//! RGB8 rasters and the deterministic transform set applied to test images.
//!
//! Flips, right-angle rotations and the BGR channel swap are pure index or
//! channel permutations and therefore bit-exact. Arbitrary-angle rotation
//! expands the canvas to the rotated bounding box, inverse-maps each output
//! pixel center, and bilinearly interpolates in floating point with a final
//! round-half-away-from-zero per channel; pixels mapping outside the source
//! are filled with black.
//!
//! Conventions (echoed into every report): rotations are counter-clockwise,
//! the canvas expands to the bounding box, the fill color is (0,0,0).

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ExtendedColorType, ImageEncoder};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One-line description of the transform conventions, embedded in reports.
pub const TRANSFORM_CONVENTIONS: &str = "rotation: counter-clockwise, canvas expanded to the \
     rotated bounding box, black fill, bilinear interpolation with round-half-away-from-zero; \
     right-angle rotations and flips are exact index permutations; bgr swaps the R and B planes";

#[derive(Debug, Error)]
pub enum ImageOpsError {
    #[error("raster dimensions must be nonzero, got {width}x{height}")]
    ZeroDimension { width: u32, height: u32 },
    #[error("pixel buffer holds {actual} bytes, expected {width}x{height}x3 = {expected}")]
    BufferSize { width: u32, height: u32, expected: usize, actual: usize },
    #[error("failed to decode {format} image: {source}")]
    Decode { format: &'static str, source: image::ImageError },
    #[error("failed to encode PNG: {0}")]
    Encode(#[source] image::ImageError),
    #[error("unknown transform id {0:?}")]
    UnknownTransformId(String),
    #[error("rotation angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("transform set must be non-empty with the identity transform first")]
    MissingIdentity,
    #[error("duplicate transform id {0:?} in transform set")]
    DuplicateTransformId(String),
}

/// A decoded image: row-major RGB8 pixels, channel order R,G,B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ImageOpsError> {
        if width == 0 || height == 0 {
            return Err(ImageOpsError::ZeroDimension { width, height });
        }
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(ImageOpsError::BufferSize { width, height, expected, actual: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    /// Build a raster by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be nonzero");
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        debug_assert!(x < self.width && y < self.height);
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }
}

/// A member of the transform set applied to test images.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Identity,
    FlipH,
    FlipV,
    /// Counter-clockwise rotation; the angle is normalized to [0, 360).
    Rotate(f64),
    BgrSwap,
}

impl Transform {
    pub fn rotate(angle_degrees: f64) -> Result<Self, ImageOpsError> {
        if !angle_degrees.is_finite() {
            return Err(ImageOpsError::NonFiniteAngle(angle_degrees));
        }
        Ok(Transform::Rotate(angle_degrees.rem_euclid(360.0)))
    }

    /// Canonical id string: "id", "fliph", "flipv", "bgr", or "rotN".
    pub fn id(&self) -> String {
        match self {
            Transform::Identity => "id".to_string(),
            Transform::FlipH => "fliph".to_string(),
            Transform::FlipV => "flipv".to_string(),
            Transform::Rotate(angle) => format!("rot{angle}"),
            Transform::BgrSwap => "bgr".to_string(),
        }
    }

    pub fn parse(id: &str) -> Result<Self, ImageOpsError> {
        match id {
            "id" => Ok(Transform::Identity),
            "fliph" => Ok(Transform::FlipH),
            "flipv" => Ok(Transform::FlipV),
            "bgr" => Ok(Transform::BgrSwap),
            _ => {
                let angle = id
                    .strip_prefix("rot")
                    .and_then(|rest| rest.parse::<f64>().ok())
                    .ok_or_else(|| ImageOpsError::UnknownTransformId(id.to_string()))?;
                Transform::rotate(angle)
                    .map_err(|_| ImageOpsError::UnknownTransformId(id.to_string()))
            }
        }
    }
}

/// Ordered transform set; the identity transform is always at position 0 and
/// serves as the unaugmented baseline column.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSet {
    transforms: Vec<Transform>,
}

impl TransformSet {
    pub fn new(transforms: Vec<Transform>) -> Result<Self, ImageOpsError> {
        if transforms.first() != Some(&Transform::Identity) {
            return Err(ImageOpsError::MissingIdentity);
        }
        let mut seen = std::collections::HashSet::new();
        for t in &transforms {
            if !seen.insert(t.id()) {
                return Err(ImageOpsError::DuplicateTransformId(t.id()));
            }
        }
        Ok(Self { transforms })
    }

    pub fn from_ids<S: AsRef<str>>(ids: &[S]) -> Result<Self, ImageOpsError> {
        let transforms = ids
            .iter()
            .map(|id| Transform::parse(id.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(transforms)
    }

    /// The full standard set: identity, both flips, rotations in 30-degree
    /// steps up to 180, and the BGR swap.
    pub fn standard() -> Self {
        Self::from_ids(&[
            "id", "fliph", "flipv", "rot30", "rot60", "rot90", "rot120", "rot150", "rot180",
            "bgr",
        ])
        .expect("standard transform set is well-formed")
    }

    pub fn transforms(&self) -> &[Transform] {
        &self.transforms
    }

    pub fn ids(&self) -> Vec<String> {
        self.transforms.iter().map(Transform::id).collect()
    }

    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }
}

/// Apply a transform to a raster. Pure and total on valid rasters.
pub fn apply(raster: &Raster, transform: &Transform) -> Raster {
    match transform {
        Transform::Identity => raster.clone(),
        Transform::FlipH => {
            let (w, h) = (raster.width, raster.height);
            Raster::from_fn(w, h, |x, y| raster.pixel(w - 1 - x, y))
        }
        Transform::FlipV => {
            let (w, h) = (raster.width, raster.height);
            Raster::from_fn(w, h, |x, y| raster.pixel(x, h - 1 - y))
        }
        Transform::BgrSwap => {
            let mut pixels = raster.pixels.clone();
            for px in pixels.chunks_exact_mut(3) {
                px.swap(0, 2);
            }
            Raster { width: raster.width, height: raster.height, pixels }
        }
        Transform::Rotate(angle) => rotate(raster, *angle),
    }
}

fn rotate(raster: &Raster, angle: f64) -> Raster {
    let (w, h) = (raster.width, raster.height);
    if angle == 0.0 {
        return raster.clone();
    }
    if angle == 90.0 {
        // (x, y) -> (y, w-1-x), so out(x', y') = in(w-1-y', x').
        return Raster::from_fn(h, w, |x, y| raster.pixel(w - 1 - y, x));
    }
    if angle == 180.0 {
        return Raster::from_fn(w, h, |x, y| raster.pixel(w - 1 - x, h - 1 - y));
    }
    if angle == 270.0 {
        return Raster::from_fn(h, w, |x, y| raster.pixel(y, h - 1 - x));
    }
    rotate_bilinear(raster, angle)
}

fn rotate_bilinear(raster: &Raster, angle: f64) -> Raster {
    let (w, h) = (raster.width as f64, raster.height as f64);
    let theta = angle.to_radians();
    let (sin, cos) = theta.sin_cos();
    let out_w = (w * cos.abs() + h * sin.abs()).ceil() as u32;
    let out_h = (w * sin.abs() + h * cos.abs()).ceil() as u32;
    let (out_w, out_h) = (out_w.max(1), out_h.max(1));

    let sample = |x: i64, y: i64| -> [f64; 3] {
        if x < 0 || y < 0 || x >= i64::from(raster.width) || y >= i64::from(raster.height) {
            return [0.0; 3];
        }
        let p = raster.pixel(x as u32, y as u32);
        [f64::from(p[0]), f64::from(p[1]), f64::from(p[2])]
    };

    Raster::from_fn(out_w, out_h, |px, py| {
        // Rotate the output pixel center back into source coordinates around
        // the respective canvas centers.
        let u = f64::from(px) + 0.5 - f64::from(out_w) / 2.0;
        let v = f64::from(py) + 0.5 - f64::from(out_h) / 2.0;
        let sx = u * cos - v * sin + w / 2.0;
        let sy = u * sin + v * cos + h / 2.0;
        let fx = sx - 0.5;
        let fy = sy - 0.5;
        let x0 = fx.floor();
        let y0 = fy.floor();
        let dx = fx - x0;
        let dy = fy - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);

        let p00 = sample(x0, y0);
        let p10 = sample(x0 + 1, y0);
        let p01 = sample(x0, y0 + 1);
        let p11 = sample(x0 + 1, y0 + 1);

        let mut out = [0u8; 3];
        for c in 0..3 {
            let acc = p00[c] * (1.0 - dx) * (1.0 - dy)
                + p10[c] * dx * (1.0 - dy)
                + p01[c] * (1.0 - dx) * dy
                + p11[c] * dx * dy;
            out[c] = (acc + 0.5).floor().clamp(0.0, 255.0) as u8;
        }
        out
    })
}

/// Input image formats accepted on ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Png,
    Jpeg,
}

impl InputFormat {
    /// Guess from a file name extension.
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "png" => Some(InputFormat::Png),
            "jpg" | "jpeg" => Some(InputFormat::Jpeg),
            _ => None,
        }
    }
}

/// Decode PNG or JPEG bytes to an RGB8 raster. Grayscale inputs are expanded
/// to RGB and alpha is composited over opaque black.
pub fn decode(bytes: &[u8], format: InputFormat) -> Result<Raster, ImageOpsError> {
    let (img_format, name) = match format {
        InputFormat::Png => (image::ImageFormat::Png, "png"),
        InputFormat::Jpeg => (image::ImageFormat::Jpeg, "jpeg"),
    };
    let dynamic = image::load_from_memory_with_format(bytes, img_format)
        .map_err(|source| ImageOpsError::Decode { format: name, source })?;
    let rgba = dynamic.to_rgba8();
    let (w, h) = rgba.dimensions();
    let mut pixels = Vec::with_capacity(w as usize * h as usize * 3);
    for px in rgba.pixels() {
        let a = f64::from(px.0[3]);
        for c in 0..3 {
            let composited = f64::from(px.0[c]) * a / 255.0;
            pixels.push((composited + 0.5).floor() as u8);
        }
    }
    Raster::new(w, h, pixels)
}

/// Encode a raster as PNG with pinned encoder settings, so identical rasters
/// always produce identical bytes.
pub fn encode_png(raster: &Raster) -> Result<Vec<u8>, ImageOpsError> {
    let mut out = Vec::new();
    let encoder =
        PngEncoder::new_with_quality(&mut out, CompressionType::Default, FilterType::Adaptive);
    encoder
        .write_image(
            &raster.pixels,
            raster.width,
            raster.height,
            ExtendedColorType::Rgb8,
        )
        .map_err(ImageOpsError::Encode)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn px(r: u8, g: u8, b: u8) -> [u8; 3] {
        [r, g, b]
    }

    #[test]
    fn bgr_swaps_red_and_blue() {
        let r = Raster::new(1, 1, vec![10, 20, 30]).unwrap();
        assert_eq!(apply(&r, &Transform::BgrSwap).pixels(), &[30, 20, 10]);
    }

    #[test]
    fn fliph_mirrors_columns() {
        let a = px(1, 2, 3);
        let b = px(4, 5, 6);
        let r = Raster::new(2, 1, [a, b].concat()).unwrap();
        let flipped = apply(&r, &Transform::FlipH);
        assert_eq!(flipped.pixel(0, 0), b);
        assert_eq!(flipped.pixel(1, 0), a);
    }

    #[test]
    fn rot90_quarter_turn_map() {
        // rows [[A,B],[C,D]] -> [[B,D],[A,C]]; brute-force check of the
        // coordinate map (x,y)->(y, w-1-x) on all four pixels.
        let (a, b, c, d) = (px(1, 0, 0), px(2, 0, 0), px(3, 0, 0), px(4, 0, 0));
        let r = Raster::new(2, 2, [a, b, c, d].concat()).unwrap();
        let rotated = apply(&r, &Transform::rotate(90.0).unwrap());
        assert_eq!(rotated.pixel(0, 0), b);
        assert_eq!(rotated.pixel(1, 0), d);
        assert_eq!(rotated.pixel(0, 1), a);
        assert_eq!(rotated.pixel(1, 1), c);

        for (x, y, v) in [(0u32, 0u32, a), (1, 0, b), (0, 1, c), (1, 1, d)] {
            assert_eq!(rotated.pixel(y, 2 - 1 - x), v);
        }
    }

    #[test]
    fn rot90_swaps_dimensions() {
        let r = Raster::from_fn(5, 3, |x, y| px(x as u8, y as u8, 0));
        let rotated = apply(&r, &Transform::rotate(90.0).unwrap());
        assert_eq!((rotated.width(), rotated.height()), (3, 5));
    }

    #[test]
    fn rot180_equals_fliph_of_flipv() {
        let r = Raster::from_fn(7, 4, |x, y| px(x as u8, y as u8, (x * y) as u8));
        let rotated = apply(&r, &Transform::rotate(180.0).unwrap());
        let composed = apply(&apply(&r, &Transform::FlipV), &Transform::FlipH);
        assert_eq!(rotated, composed);
    }

    #[test]
    fn rotation_normalizes_angle() {
        assert_eq!(Transform::rotate(450.0).unwrap(), Transform::Rotate(90.0));
        assert_eq!(Transform::rotate(-30.0).unwrap(), Transform::Rotate(330.0));
        assert!(Transform::rotate(f64::NAN).is_err());
    }

    #[test]
    fn transform_ids_round_trip() {
        for id in ["id", "fliph", "flipv", "rot30", "rot90", "rot180", "rot33.5", "bgr"] {
            let t = Transform::parse(id).unwrap();
            assert_eq!(t.id(), id);
        }
        assert!(Transform::parse("rotx").is_err());
        assert!(Transform::parse("sepia").is_err());
    }

    #[test]
    fn transform_set_requires_identity_first_and_unique_ids() {
        assert!(TransformSet::from_ids(&["fliph", "id"]).is_err());
        assert!(TransformSet::from_ids(&["id", "fliph", "fliph"]).is_err());
        let set = TransformSet::standard();
        assert_eq!(set.ids()[0], "id");
        assert_eq!(set.len(), 10);
    }

    #[test]
    fn arbitrary_rotation_expands_canvas() {
        let r = Raster::from_fn(10, 6, |_, _| px(200, 100, 50));
        let rotated = apply(&r, &Transform::rotate(30.0).unwrap());
        let theta = 30.0f64.to_radians();
        let expect_w = (10.0 * theta.cos() + 6.0 * theta.sin()).ceil() as u32;
        let expect_h = (10.0 * theta.sin() + 6.0 * theta.cos()).ceil() as u32;
        assert_eq!((rotated.width(), rotated.height()), (expect_w, expect_h));
    }

    #[test]
    fn arbitrary_rotation_is_deterministic() {
        let r = Raster::from_fn(9, 9, |x, y| px((x * 7) as u8, (y * 11) as u8, 99));
        let t = Transform::rotate(33.0).unwrap();
        assert_eq!(apply(&r, &t), apply(&r, &t));
    }

    #[test]
    fn decode_white_pixel_png() {
        let r = Raster::new(1, 1, vec![255, 255, 255]).unwrap();
        let bytes = encode_png(&r).unwrap();
        let decoded = decode(&bytes, InputFormat::Png).unwrap();
        assert_eq!(decoded, r);
    }

    #[test]
    fn decode_composites_alpha_over_black() {
        // 1x1 fully transparent red pixel.
        let mut bytes = Vec::new();
        let encoder = PngEncoder::new_with_quality(
            &mut bytes,
            CompressionType::Default,
            FilterType::Adaptive,
        );
        encoder
            .write_image(&[255, 0, 0, 0], 1, 1, ExtendedColorType::Rgba8)
            .unwrap();
        let decoded = decode(&bytes, InputFormat::Png).unwrap();
        assert_eq!(decoded.pixels(), &[0, 0, 0]);
    }

    #[test]
    fn decode_expands_grayscale_to_rgb() {
        let mut bytes = Vec::new();
        let encoder = PngEncoder::new_with_quality(
            &mut bytes,
            CompressionType::Default,
            FilterType::Adaptive,
        );
        encoder
            .write_image(&[0, 128, 255, 7], 2, 2, ExtendedColorType::L8)
            .unwrap();
        let decoded = decode(&bytes, InputFormat::Png).unwrap();
        assert_eq!(decoded.pixel(0, 0), [0, 0, 0]);
        assert_eq!(decoded.pixel(1, 0), [128, 128, 128]);
        assert_eq!(decoded.pixel(0, 1), [255, 255, 255]);
        assert_eq!(decoded.pixel(1, 1), [7, 7, 7]);
    }

    #[test]
    fn decode_truncated_png_errors() {
        let r = Raster::new(4, 4, vec![7; 48]).unwrap();
        let bytes = encode_png(&r).unwrap();
        let err = decode(&bytes[..bytes.len() / 2], InputFormat::Png);
        assert!(matches!(err, Err(ImageOpsError::Decode { .. })));
    }

    #[test]
    fn encode_is_lossless_and_deterministic() {
        let r = Raster::from_fn(5, 4, |x, y| px((x * 50) as u8, (y * 60) as u8, 123));
        let once = encode_png(&r).unwrap();
        let twice = encode_png(&r).unwrap();
        assert_eq!(once, twice);
        assert_eq!(decode(&once, InputFormat::Png).unwrap(), r);
    }

    #[test]
    fn raster_buffer_validation() {
        assert!(Raster::new(2, 2, vec![0; 11]).is_err());
        assert!(Raster::new(0, 2, vec![]).is_err());
    }
}
