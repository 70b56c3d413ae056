//! File formats: CSV, raw field dumps and PGM images. All writers build byte
//! buffers so a run's outputs can be compared or written in one place.

use std::fmt::Write as _;

use qlab_core::{ComplexField, Grid, RealField};

/// Floats with 17 significant digits, '.' decimal point, no locale.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub enum Cell {
    F(f64),
    I(i64),
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { text: header.join(",") + "\n" }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        for (k, c) in cells.iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => self.text.push_str(&float(*x)),
                Cell::I(n) => write!(self.text, "{n}").unwrap(),
            }
        }
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Magic bytes opening a field dump.
pub const DUMP_MAGIC: &[u8; 8] = b"QLABFLD1";

/// Header (little endian): magic, u32 dims, u32 components (1 real, 2 complex),
/// u64 nx, u64 ny, f64 x_min, x_max, y_min, y_max; then row-major values,
/// complex as interleaved (re, im).
fn dump(grid: &Grid, components: u32, values: impl Iterator<Item = f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 8 * components as usize * grid.len());
    out.extend_from_slice(DUMP_MAGIC);
    out.extend_from_slice(&(grid.dims() as u32).to_le_bytes());
    out.extend_from_slice(&components.to_le_bytes());
    out.extend_from_slice(&(grid.nx() as u64).to_le_bytes());
    out.extend_from_slice(&(grid.ny() as u64).to_le_bytes());
    let (ymin, ymax) = if grid.dims() == 2 { (grid.y().min, grid.y().max()) } else { (0.0, 0.0) };
    for v in [grid.x().min, grid.x().max(), ymin, ymax] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn dump_real(field: &RealField) -> Vec<u8> {
    dump(field.grid(), 1, field.values().iter().copied())
}

pub fn dump_complex(field: &ComplexField) -> Vec<u8> {
    dump(field.grid(), 2, field.values().iter().flat_map(|z| [z.re, z.im]))
}

/// A parsed field dump.
#[derive(Debug, Clone, PartialEq)]
pub struct Dump {
    pub grid: Grid,
    pub components: u32,
    pub values: Vec<f64>,
}

pub fn read_dump(bytes: &[u8]) -> Option<Dump> {
    const HEADER: usize = 64;
    if bytes.len() < HEADER || &bytes[..8] != DUMP_MAGIC {
        return None;
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (dims, components) = (u32_at(8), u32_at(12));
    let (nx, ny) = (u64_at(16) as usize, u64_at(24) as usize);
    let grid = match dims {
        1 => Grid::line(f64_at(32), f64_at(40), nx).ok()?,
        2 => Grid::plane((f64_at(32), f64_at(40), nx), (f64_at(48), f64_at(56), ny)).ok()?,
        _ => return None,
    };
    if bytes.len() != HEADER + 8 * components as usize * grid.len() {
        return None;
    }
    let values = bytes[HEADER..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Some(Dump { grid, components, values })
}

/// Binary greyscale image, 255 at `max`, top row at the largest y.
pub fn pgm(field: &RealField, max: f64) -> Vec<u8> {
    let g = field.grid();
    let (nx, ny) = (g.nx(), g.ny().max(1));
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    for j in (0..ny).rev() {
        for i in 0..nx {
            let v = (field.values()[j * nx + i] * scale).round().clamp(0.0, 255.0);
            out.push(v as u8);
        }
    }
    out
}
