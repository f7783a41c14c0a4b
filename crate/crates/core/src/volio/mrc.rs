//! MRC2014 reader and writer.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian, WriteBytesExt};

use crate::basis::Volume;
use crate::error::Result;

pub const HEADER_LEN: usize = 1024;
pub const MAP_STAMP: &[u8; 4] = b"MAP ";

#[derive(Debug, thiserror::Error)]
pub enum MrcError {
    #[error("missing \"MAP \" stamp at byte 208")]
    BadMagic,

    #[error("unsupported MRC mode {0}")]
    UnsupportedMode(i32),

    #[error("short read: expected {expected} bytes, found {found}")]
    ShortRead { expected: usize, found: usize },

    #[error("volume is not cubic: {0}x{1}x{2}")]
    NotCubic(usize, usize, usize),

    #[error("bad header: {0}")]
    BadHeader(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endian {
    Little,
    Big,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MrcHeader {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub mode: i32,
    pub sampling: [usize; 3],
    pub cell: [f32; 3],
    pub cell_angles: [f32; 3],
    /// 1-based axis of columns, rows and sections.
    pub axis_map: [usize; 3],
    pub dmin: f32,
    pub dmax: f32,
    pub dmean: f32,
    pub rms: f32,
    pub ext_len: usize,
    pub machine_stamp: [u8; 4],
    pub endian: Endian,
}

impl MrcHeader {
    fn bytes_per_voxel(&self) -> usize {
        match self.mode {
            0 => 1,
            1 | 6 => 2,
            _ => 4,
        }
    }

    /// Voxel spacing along x, 1.0 when the cell is unset.
    pub fn voxel_size(&self) -> f64 {
        let (cell, m) = (self.cell[0] as f64, self.sampling[0] as f64);
        if cell > 0.0 && m > 0.0 {
            cell / m
        } else {
            1.0
        }
    }

    fn parse(buf: &[u8]) -> std::result::Result<Self, MrcError> {
        if &buf[208..212] != MAP_STAMP {
            return Err(MrcError::BadMagic);
        }
        let stamp = [buf[212], buf[213], buf[214], buf[215]];
        let endian = match stamp[0] {
            0x44 => Endian::Little,
            0x11 => Endian::Big,
            _ => {
                // Unknown stamp: pick the byte order that gives a sane mode.
                if (0..=16).contains(&LittleEndian::read_i32(&buf[12..16])) {
                    Endian::Little
                } else {
                    Endian::Big
                }
            }
        };
        match endian {
            Endian::Little => Self::parse_with::<LittleEndian>(buf, stamp, endian),
            Endian::Big => Self::parse_with::<BigEndian>(buf, stamp, endian),
        }
    }

    fn parse_with<B: ByteOrder>(buf: &[u8], stamp: [u8; 4], endian: Endian) -> std::result::Result<Self, MrcError> {
        let i = |off: usize| B::read_i32(&buf[off..off + 4]);
        let f = |off: usize| B::read_f32(&buf[off..off + 4]);
        let dim = |off: usize| -> std::result::Result<usize, MrcError> {
            usize::try_from(i(off)).map_err(|_| MrcError::BadHeader(format!("negative field at byte {off}")))
        };
        let mode = i(12);
        if !matches!(mode, 0 | 1 | 2 | 6) {
            return Err(MrcError::UnsupportedMode(mode));
        }
        let axis_map = [dim(64)?, dim(68)?, dim(72)?];
        let mut sorted = axis_map;
        sorted.sort_unstable();
        let axis_map = if axis_map == [0, 0, 0] { [1, 2, 3] } else { axis_map };
        if sorted != [1, 2, 3] && sorted != [0, 0, 0] {
            return Err(MrcError::BadHeader(format!("axis map {axis_map:?} is not a permutation")));
        }
        Ok(Self {
            nx: dim(0)?,
            ny: dim(4)?,
            nz: dim(8)?,
            mode,
            sampling: [dim(28)?, dim(32)?, dim(36)?],
            cell: [f(40), f(44), f(48)],
            cell_angles: [f(52), f(56), f(60)],
            axis_map,
            dmin: f(76),
            dmax: f(80),
            dmean: f(84),
            rms: f(216),
            ext_len: dim(92)?,
            machine_stamp: stamp,
            endian,
        })
    }
}

fn read_fully(r: &mut impl Read, buf: &mut [u8]) -> std::result::Result<(), MrcError> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) => return Err(MrcError::ShortRead { expected: buf.len(), found: got }),
            Ok(k) => got += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

pub fn read_mrc_header(path: impl AsRef<Path>) -> Result<MrcHeader> {
    let mut r = BufReader::new(File::open(path).map_err(MrcError::from)?);
    let mut buf = [0u8; HEADER_LEN];
    read_fully(&mut r, &mut buf)?;
    Ok(MrcHeader::parse(&buf)?)
}

fn decode<B: ByteOrder>(mode: i32, raw: &[u8]) -> Vec<f64> {
    match mode {
        0 => raw.iter().map(|&b| b as i8 as f64).collect(),
        1 => raw.chunks_exact(2).map(|c| B::read_i16(c) as f64).collect(),
        6 => raw.chunks_exact(2).map(|c| B::read_u16(c) as f64).collect(),
        _ => raw.chunks_exact(4).map(|c| B::read_f32(c) as f64).collect(),
    }
}

/// Reads a cubic MRC volume, normalizing the axis order to x fastest.
pub fn read_mrc(path: impl AsRef<Path>) -> Result<Volume> {
    let mut r = BufReader::new(File::open(path).map_err(MrcError::from)?);
    let mut buf = [0u8; HEADER_LEN];
    read_fully(&mut r, &mut buf)?;
    let h = MrcHeader::parse(&buf)?;
    if h.nx != h.ny || h.ny != h.nz || h.nx == 0 {
        return Err(MrcError::NotCubic(h.nx, h.ny, h.nz).into());
    }
    let n = h.nx;
    let mut ext = vec![0u8; h.ext_len];
    read_fully(&mut r, &mut ext)?;
    let mut raw = vec![0u8; n * n * n * h.bytes_per_voxel()];
    read_fully(&mut r, &mut raw)?;
    let stored = match h.endian {
        Endian::Little => decode::<LittleEndian>(h.mode, &raw),
        Endian::Big => decode::<BigEndian>(h.mode, &raw),
    };

    let data = if h.axis_map == [1, 2, 3] {
        stored
    } else {
        let mut out = vec![0.0; stored.len()];
        let stride = [1, n, n * n];
        for s in 0..n {
            for row in 0..n {
                for c in 0..n {
                    let dst = c * stride[h.axis_map[0] - 1] + row * stride[h.axis_map[1] - 1] + s * stride[h.axis_map[2] - 1];
                    out[dst] = stored[c + n * (row + n * s)];
                }
            }
        }
        out
    };
    Volume::new(n, data, h.voxel_size())
}

/// Writes `v` as a little-endian mode-2 MRC2014 file.
pub fn write_mrc(v: &Volume, path: impl AsRef<Path>) -> Result<()> {
    write_mrc_inner(v, path.as_ref()).map_err(|e| MrcError::from(e).into())
}

fn write_mrc_inner(v: &Volume, path: &Path) -> std::io::Result<()> {
    let n = v.n();
    let data: Vec<f32> = v.data().iter().map(|&x| x as f32).collect();
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for &x in &data {
        let x = x as f64;
        lo = lo.min(x);
        hi = hi.max(x);
        sum += x;
    }
    let mean = sum / data.len() as f64;
    let rms = (data.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / data.len() as f64).sqrt();

    let mut h = Vec::with_capacity(HEADER_LEN);
    for _ in 0..3 {
        h.write_i32::<LittleEndian>(n as i32)?;
    }
    h.write_i32::<LittleEndian>(2)?;
    for _ in 0..3 {
        h.write_i32::<LittleEndian>(0)?;
    }
    for _ in 0..3 {
        h.write_i32::<LittleEndian>(n as i32)?;
    }
    let cell = (n as f64 * v.voxel_size()) as f32;
    for _ in 0..3 {
        h.write_f32::<LittleEndian>(cell)?;
    }
    for _ in 0..3 {
        h.write_f32::<LittleEndian>(90.0)?;
    }
    for axis in 1..=3 {
        h.write_i32::<LittleEndian>(axis)?;
    }
    h.write_f32::<LittleEndian>(lo as f32)?;
    h.write_f32::<LittleEndian>(hi as f32)?;
    h.write_f32::<LittleEndian>(mean as f32)?;
    h.write_i32::<LittleEndian>(1)?; // ispg
    h.write_i32::<LittleEndian>(0)?; // nsymbt
    h.resize(104, 0);
    h.extend_from_slice(b"\0\0\0\0"); // exttyp
    h.write_i32::<LittleEndian>(20140)?;
    h.resize(196, 0);
    for _ in 0..3 {
        h.write_f32::<LittleEndian>(0.0)?;
    }
    h.extend_from_slice(MAP_STAMP);
    h.extend_from_slice(&[0x44, 0x44, 0, 0]);
    h.write_f32::<LittleEndian>(rms as f32)?;
    h.write_i32::<LittleEndian>(0)?;
    h.resize(HEADER_LEN, 0);

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&h)?;
    let mut body = vec![0u8; data.len() * 4];
    LittleEndian::write_f32_into(&data, &mut body);
    w.write_all(&body)?;
    w.flush()
}
