//! PGM/PPM rendering of scalar fields.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::vxf::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colormap {
    /// 8-bit grayscale PGM, min → 0, max → 255.
    Gray,
    /// Diverging PPM: −max|s| → blue, 0 → white, +max|s| → red.
    Signed,
}

/// Encoded image bytes and the `(min, max)` used for scaling.
pub fn render(s: &ScalarField, colormap: Colormap) -> Result<(Vec<u8>, (f64, f64))> {
    let (lo, hi) = s.range().ok_or(Error::EmptyField)?;
    let (nx, ny) = (s.grid.nx, s.grid.ny);
    let magic = match colormap {
        Colormap::Gray => "P5",
        Colormap::Signed => "P6",
    };
    let mut out = format!("{magic}\n{nx} {ny}\n255\n").into_bytes();
    let m = lo.abs().max(hi.abs());
    // Image rows run top to bottom; field rows run along +y.
    for j in (0..ny).rev() {
        for i in 0..nx {
            let v = s.values[[j, i]];
            let masked = s.is_masked(j, i);
            match colormap {
                Colormap::Gray => {
                    let byte = if masked {
                        0
                    } else if hi > lo {
                        quantize((v - lo) / (hi - lo))
                    } else {
                        128
                    };
                    out.push(byte);
                }
                Colormap::Signed => {
                    let rgb = if masked {
                        [128, 128, 128]
                    } else if m == 0.0 {
                        [255, 255, 255]
                    } else {
                        let t = v / m;
                        if t >= 0.0 {
                            let c = quantize(1.0 - t);
                            [255, c, c]
                        } else {
                            let c = quantize(1.0 + t);
                            [c, c, 255]
                        }
                    };
                    out.extend_from_slice(&rgb);
                }
            }
        }
    }
    let range = match colormap {
        Colormap::Gray => (lo, hi),
        Colormap::Signed => (-m, m),
    };
    Ok((out, range))
}

fn quantize(t: f64) -> u8 {
    (t.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Sidecar path `<path>.range.txt`.
pub fn range_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".range.txt");
    PathBuf::from(name)
}

/// Writes the image and its `<path>.range.txt` sidecar.
pub fn export_heatmap(s: &ScalarField, path: impl AsRef<Path>, colormap: Colormap) -> Result<()> {
    let path = path.as_ref();
    let (bytes, (lo, hi)) = render(s, colormap)?;
    write_atomic(path, &bytes)?;
    write_atomic(range_path(path), format!("{lo} {hi}\n").as_bytes())?;
    Ok(())
}
