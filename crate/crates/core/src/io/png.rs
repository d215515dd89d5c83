//! Azimuth previews with a cyclic hue scale.

use std::f64::consts::PI;
use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};

use crate::image::{AzimuthMap, Mask};
use crate::io::FormatError;

/// Full-saturation color whose hue angle is `2φ`, so `φ` and `φ + π` agree.
pub fn azimuth_color(phi: f64) -> [u8; 3] {
    let h = (phi / PI).rem_euclid(1.0) * 6.0;
    let sector = h.floor();
    let f = h - sector;
    let (r, g, b) = match sector as u8 % 6 {
        0 => (1.0, f, 0.0),
        1 => (1.0 - f, 1.0, 0.0),
        2 => (0.0, 1.0, f),
        3 => (0.0, 1.0 - f, 1.0),
        4 => (f, 0.0, 1.0),
        _ => (1.0, 0.0, 1.0 - f),
    };
    let q = |v: f64| (v * 255.0).round() as u8;
    [q(r), q(g), q(b)]
}

/// Writes a `W × H` RGB8 PNG; NaN and masked-out pixels are black.
pub fn render_azimuth_png(map: &AzimuthMap, mask: Option<&Mask>, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let (h, w) = map.dims();
    if let Some(m) = mask {
        if m.dims() != (h, w) {
            return Err(FormatError::ShapeMismatch(format!("mask is {:?}, map is {:?}", m.dims(), (h, w))));
        }
    }
    let width = u32::try_from(w).map_err(|_| FormatError::Invalid("image too wide".into()))?;
    let height = u32::try_from(h).map_err(|_| FormatError::Invalid("image too tall".into()))?;
    let img = RgbImage::from_fn(width, height, |x, y| {
        let i = y as usize * w + x as usize;
        let phi = map.values()[i];
        let visible = mask.is_none_or(|m| m.values()[i]);
        if visible && phi.is_finite() {
            Rgb(azimuth_color(phi))
        } else {
            Rgb([0, 0, 0])
        }
    });
    img.save_with_format(path, ImageFormat::Png).map_err(|e| match e {
        image::ImageError::IoError(io) => FormatError::Io(io),
        other => FormatError::Encode(other.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::ScalarMap;

    #[test]
    fn colormap_is_cyclic() {
        let a = azimuth_color(0.0);
        let b = azimuth_color(PI - 1e-6);
        assert!(a.iter().zip(&b).all(|(x, y)| x.abs_diff(*y) <= 1));
        assert_eq!(azimuth_color(0.0), azimuth_color(PI));
        assert_eq!(azimuth_color(0.0), [255, 0, 0]);
        assert_eq!(azimuth_color(PI / 3.0), [0, 255, 0]);
        assert_eq!(azimuth_color(2.0 * PI / 3.0), [0, 0, 255]);
    }

    #[test]
    fn renders_dimensions_and_black_pixels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("az.png");
        let map = ScalarMap::new(2, 3, vec![0.0, f64::NAN, 1.0, 2.0, 0.5, 0.1]).unwrap();
        let mask = Mask::new(2, 3, vec![true, true, true, false, true, true]).unwrap();
        render_azimuth_png(&map, Some(&mask), &path).unwrap();
        let back = image::open(&path).unwrap().to_rgb8();
        assert_eq!(back.dimensions(), (3, 2));
        assert_eq!(back.get_pixel(0, 0).0, [255, 0, 0]);
        assert_eq!(back.get_pixel(1, 0).0, [0, 0, 0]);
        assert_eq!(back.get_pixel(0, 1).0, [0, 0, 0]);
        assert_eq!(back.get_pixel(2, 0).0, azimuth_color(1.0));
        let bad = Mask::all(3, 2);
        assert!(render_azimuth_png(&map, Some(&bad), &path).is_err());
    }
}
