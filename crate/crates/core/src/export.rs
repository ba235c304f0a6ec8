//! CSV and PGM writers for [`FieldMap`].

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::fields::FieldMap;

pub const CSV_HEADER: &str = "r,phi,re,im,intensity";

/// One row per node, row-major over `(r_j, φ_m)`, 17 significant digits.
pub fn write_csv<W: Write>(field: &FieldMap, mut out: W) -> io::Result<()> {
    let g = field.grid();
    writeln!(out, "{CSV_HEADER}")?;
    for j in 0..g.n_r() {
        for m in 0..g.n_phi() {
            let a = field.get(j, m);
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                g.r(j),
                g.phi(m),
                a.re,
                a.im,
                a.norm_sqr()
            )?;
        }
    }
    Ok(())
}

/// Intensity resampled onto a `side × side` square covering the grid disc,
/// nearest node, normalized to a unit peak. Pixels outside `r_max` are 0.
pub fn cartesian_intensity(field: &FieldMap, side: usize) -> Vec<f64> {
    let g = field.grid();
    let peak = field.peak().powi(2);
    let scale = if peak > 0.0 { peak.recip() } else { 0.0 };
    let step = 2.0 * g.r_max() / side as f64;
    let mut out = Vec::with_capacity(side * side);
    for row in 0..side {
        // image rows run top to bottom
        let y = g.r_max() - (row as f64 + 0.5) * step;
        for col in 0..side {
            let x = -g.r_max() + (col as f64 + 0.5) * step;
            let r = x.hypot(y);
            if r >= g.r_max() {
                out.push(0.0);
                continue;
            }
            let j = ((r / g.dr()) as usize).min(g.n_r() - 1);
            let phi = y.atan2(x).rem_euclid(2.0 * PI);
            let m = (phi / g.dphi()).round() as usize % g.n_phi();
            out.push(field.get(j, m).norm_sqr() * scale);
        }
    }
    out
}

/// Binary 16-bit PGM (`P5`, maxval 65535, big-endian samples).
pub fn write_pgm<W: Write>(field: &FieldMap, side: usize, mut out: W) -> io::Result<()> {
    if side == 0 {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "image side must be positive"));
    }
    write!(out, "P5\n{side} {side}\n65535\n")?;
    let pixels = cartesian_intensity(field, side);
    let mut buf = Vec::with_capacity(2 * pixels.len());
    for v in pixels {
        let level = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        buf.extend_from_slice(&level.to_be_bytes());
    }
    out.write_all(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{eval_lg, PolarGrid};

    fn field() -> FieldMap {
        eval_lg(1, 2, &PolarGrid::new(4.0, 64, 8, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&field(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 64 * 8);
        let first: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(first[0], 0.03125);
        assert_eq!(first[1], 0.0);
        assert!(lines[1].split(',').all(|s| s.contains('e')));
        let second: Vec<f64> = lines[2].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(second[0], 0.03125);
        assert!(second[1] > 0.0);
    }

    #[test]
    fn csv_round_trips_values() {
        let f = field();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row: Vec<f64> = text.lines().nth(1 + 8 * 17 + 3).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        let a = f.get(17, 3);
        assert_eq!((row[2], row[3]), (a.re, a.im));
    }

    #[test]
    fn pgm_header_and_peak() {
        let mut buf = Vec::new();
        write_pgm(&field(), 32, &mut buf).unwrap();
        let header = b"P5\n32 32\n65535\n";
        assert_eq!(&buf[..header.len()], header);
        let body = &buf[header.len()..];
        assert_eq!(body.len(), 2 * 32 * 32);
        let levels: Vec<u16> = body.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
        let max = *levels.iter().max().unwrap();
        assert!(max > 60000);
        // corners lie outside the disc
        assert_eq!(levels[0], 0);
        assert!(write_pgm(&field(), 0, Vec::new()).is_err());
    }
}
