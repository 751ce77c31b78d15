//! VXF field files: a short ASCII header followed by a little-endian binary64 payload.
//!
//! ```text
//! VXF 1
//! nx <int> ny <int>
//! dx <float> dy <float>
//! x0 <float> y0 <float>
//! z <float>
//! lambda0 <float>
//! END
//! ```
//!
//! Spinor files carry four values per sample (Re Ψ₊, Im Ψ₊, Re Ψ₋, Im Ψ₋),
//! scalar files one. Samples are row-major with y outer.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpinorField};
use crate::grid::TransverseGrid;

const MAGIC: &str = "VXF 1";

pub fn encode_header(grid: &TransverseGrid) -> String {
    format!(
        "{MAGIC}\nnx {} ny {}\ndx {} dy {}\nx0 {} y0 {}\nz {}\nlambda0 {}\nEND\n",
        grid.nx, grid.ny, grid.dx, grid.dy, grid.x0, grid.y0, grid.z, grid.lambda0
    )
}

pub fn encode_spinor(f: &SpinorField) -> Vec<u8> {
    let mut out = encode_header(&f.grid).into_bytes();
    out.reserve(f.grid.len() * 32);
    for (p, m) in f.psi_plus.iter().zip(f.psi_minus.iter()) {
        for v in [p.re, p.im, m.re, m.im] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn encode_scalar(s: &ScalarField) -> Vec<u8> {
    let mut out = encode_header(&s.grid).into_bytes();
    out.reserve(s.grid.len() * 8);
    for v in s.values.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses the header and returns the grid plus the payload offset.
pub fn decode_header(bytes: &[u8]) -> Result<(TransverseGrid, usize)> {
    let mut cursor = Cursor { bytes, pos: 0 };

    let (start, magic) = cursor.line()?;
    if magic != MAGIC {
        return Err(format_err(start, format!("bad magic {magic:?}")));
    }
    let (start, line) = cursor.line()?;
    let [nx, ny] = pairs(start, line, ["nx", "ny"])?;
    let nx = count(start, nx, "nx")?;
    let ny = count(start, ny, "ny")?;
    let (start, line) = cursor.line()?;
    let [dx, dy] = floats(start, pairs(start, line, ["dx", "dy"])?)?;
    let (start, line) = cursor.line()?;
    let [x0, y0] = floats(start, pairs(start, line, ["x0", "y0"])?)?;
    let (start, line) = cursor.line()?;
    let [z] = floats(start, pairs(start, line, ["z"])?)?;
    let (start, line) = cursor.line()?;
    let [lambda0] = floats(start, pairs(start, line, ["lambda0"])?)?;
    let (start, end) = cursor.line()?;
    if end != "END" {
        return Err(format_err(start, format!("expected END, found {end:?}")));
    }

    let grid = TransverseGrid { nx, ny, dx, dy, x0, y0, z, lambda0 };
    grid.validate()
        .map_err(|e| format_err(0, format!("header describes an invalid grid: {e}")))?;
    Ok((grid, cursor.pos))
}

pub fn decode_spinor(bytes: &[u8]) -> Result<SpinorField> {
    let (grid, offset) = decode_header(bytes)?;
    let values = payload(bytes, offset, grid.len() * 4)?;
    let plus = Array2::from_shape_fn(grid.shape(), |(j, i)| {
        let k = 4 * (j * grid.nx + i);
        Complex64::new(values[k], values[k + 1])
    });
    let minus = Array2::from_shape_fn(grid.shape(), |(j, i)| {
        let k = 4 * (j * grid.nx + i);
        Complex64::new(values[k + 2], values[k + 3])
    });
    Ok(SpinorField { grid, psi_plus: plus, psi_minus: minus })
}

pub fn decode_scalar(bytes: &[u8]) -> Result<ScalarField> {
    let (grid, offset) = decode_header(bytes)?;
    let values = payload(bytes, offset, grid.len())?;
    let values = Array2::from_shape_vec(grid.shape(), values)
        .map_err(|e| Error::Numerical(e.to_string()))?;
    let mask = values.mapv(f64::is_nan);
    let s = ScalarField::new(grid, values);
    Ok(if mask.iter().any(|&m| m) { s.with_mask(mask) } else { s })
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let mut name = path.file_name().unwrap_or_default().to_owned();
    name.push(".tmp");
    let tmp = path.with_file_name(name);
    let mut file = fs::File::create(&tmp)?;
    file.write_all(bytes)?;
    file.sync_all()?;
    drop(file);
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_vxf(f: &SpinorField, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, &encode_spinor(f))
}

pub fn read_vxf(path: impl AsRef<Path>) -> Result<SpinorField> {
    decode_spinor(&fs::read(path)?)
}

pub fn write_vxf_scalar(s: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, &encode_scalar(s))
}

pub fn read_vxf_scalar(path: impl AsRef<Path>) -> Result<ScalarField> {
    decode_scalar(&fs::read(path)?)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&mut self) -> Result<(usize, &'a str)> {
        let start = self.pos;
        let rest = &self.bytes[start..];
        let len = rest
            .iter()
            .take(256)
            .position(|&b| b == b'\n')
            .ok_or_else(|| format_err(start, "unterminated header line".into()))?;
        let text = std::str::from_utf8(&rest[..len])
            .map_err(|_| format_err(start, "header is not ASCII".into()))?;
        self.pos = start + len + 1;
        Ok((start, text))
    }
}

fn pairs<'a, const N: usize>(
    offset: usize,
    line: &'a str,
    keys: [&str; N],
) -> Result<[&'a str; N]> {
    let tokens: Vec<&str> = line.split(' ').collect();
    if tokens.len() != 2 * N {
        return Err(format_err(offset, format!("expected `{}`", keys.join(" <v> "))));
    }
    let mut out = [""; N];
    for (k, key) in keys.iter().enumerate() {
        if tokens[2 * k] != *key {
            return Err(format_err(
                offset,
                format!("expected key {key:?}, found {:?}", tokens[2 * k]),
            ));
        }
        out[k] = tokens[2 * k + 1];
    }
    Ok(out)
}

fn count(offset: usize, s: &str, what: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| format_err(offset, format!("{what} is not a non-negative integer: {s:?}")))
}

fn floats<const N: usize>(offset: usize, tokens: [&str; N]) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    for (slot, t) in out.iter_mut().zip(tokens) {
        *slot = t
            .parse::<f64>()
            .map_err(|_| format_err(offset, format!("not a number: {t:?}")))?;
    }
    Ok(out)
}

fn payload(bytes: &[u8], offset: usize, count: usize) -> Result<Vec<f64>> {
    let expected = count * 8;
    let found = bytes.len() - offset;
    if found < expected {
        return Err(Error::Truncated { expected, found });
    }
    if found > expected {
        return Err(format_err(
            offset + expected,
            format!("{} trailing bytes after payload", found - expected),
        ));
    }
    Ok(bytes[offset..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

fn format_err(offset: usize, message: String) -> Error {
    Error::Format { offset, message }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(nx: usize, ny: usize, seed: f64) -> SpinorField {
        let g = TransverseGrid::new(nx, ny, 0.1 + seed.abs(), 0.3, -1.5, 2.25e-7, 1.0, -3.5)
            .unwrap();
        let p = Array2::from_shape_fn(g.shape(), |(j, i)| {
            Complex64::new((i as f64 + seed).sin(), -(j as f64 * seed).cos())
        });
        let m = Array2::from_shape_fn(g.shape(), |(j, i)| {
            Complex64::new(1e-300 * i as f64, seed / (1.0 + j as f64))
        });
        SpinorField::new(g, p, m).unwrap()
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.vxf");
        let f = sample(7, 5, 0.37);
        write_vxf(&f, &path).unwrap();
        let back = read_vxf(&path).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn header_layout_is_stable() {
        let g = TransverseGrid::new(4, 5, 0.5, 0.25, -1.0, -1.25, 1.0, 0.0).unwrap();
        assert_eq!(
            encode_header(&g),
            "VXF 1\nnx 4 ny 5\ndx 0.5 dy 0.25\nx0 -1 y0 -1.25\nz 0\nlambda0 1\nEND\n"
        );
    }

    #[test]
    fn corrupted_magic_is_a_format_error() {
        let mut bytes = encode_spinor(&sample(4, 4, 0.1));
        bytes[1] = b'Y';
        assert!(matches!(decode_spinor(&bytes), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn bad_key_reports_line_offset() {
        let bytes = encode_spinor(&sample(4, 4, 0.1));
        let text = String::from_utf8_lossy(&bytes[..40]).to_string();
        let at = text.find("dx").unwrap();
        let mut broken = bytes.clone();
        broken[at] = b'q';
        match decode_spinor(&broken) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, at),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_payload_is_truncated() {
        let bytes = encode_spinor(&sample(4, 4, 0.1));
        let cut = &bytes[..bytes.len() - 9];
        assert!(matches!(decode_spinor(cut), Err(Error::Truncated { .. })));
    }

    #[test]
    fn scalar_round_trip_keeps_mask() {
        let g = TransverseGrid::centered(4, 4.0).unwrap();
        let mut mask = Array2::from_elem(g.shape(), false);
        mask[[1, 2]] = true;
        let s = ScalarField::new(g, Array2::from_shape_fn(g.shape(), |(j, i)| (i * j) as f64))
            .with_mask(mask.clone());
        let back = decode_scalar(&encode_scalar(&s)).unwrap();
        assert_eq!(back.mask, Some(mask));
        assert_eq!(back.values[[0, 3]], 0.0);
        assert_eq!(back.values[[3, 3]], 9.0);
    }

    proptest! {
        #[test]
        fn encode_decode_is_identity(
            nx in 4usize..9, ny in 4usize..9,
            dx in 1e-3f64..10.0, x0 in -100.0f64..100.0, z in -1e3f64..1e3,
            seed in -5.0f64..5.0,
        ) {
            let g = TransverseGrid::new(nx, ny, dx, dx * 0.5, x0, -x0, 1.0, z).unwrap();
            let p = Array2::from_shape_fn(g.shape(), |(j, i)| Complex64::new(seed * i as f64, (j as f64).exp()));
            let m = Array2::from_shape_fn(g.shape(), |(j, i)| Complex64::new(-seed / (1.0 + i as f64), seed * j as f64));
            let f = SpinorField::new(g, p, m).unwrap();
            let back = decode_spinor(&encode_spinor(&f)).unwrap();
            prop_assert_eq!(back.grid, f.grid);
            for (a, b) in f.psi_plus.iter().chain(f.psi_minus.iter()).zip(back.psi_plus.iter().chain(back.psi_minus.iter())) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }
}
