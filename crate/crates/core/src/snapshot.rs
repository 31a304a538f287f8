//! Particle snapshots and the `HSNP` binary container.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic     b"HSNP"
//! version   u32
//! timestep  u32
//! count     u64
//! records   count x 44 bytes:
//!           id u64, position 3 x f32, velocity 3 x f32, mass f32, dispersion f32, density f32
//! ```

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::geom::Vec3;

pub const HSNP_MAGIC: &[u8; 4] = b"HSNP";
pub const HSNP_VERSION: u32 = 1;
pub const HSNP_HEADER_LEN: usize = 4 + 4 + 4 + 8;
pub const HSNP_RECORD_LEN: usize = 44;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub id: u64,
    pub position: [f32; 3],
    pub velocity: [f32; 3],
    pub mass: f32,
    pub dispersion: f32,
    pub density: f32,
}

impl Particle {
    pub fn at(id: u64, position: [f32; 3]) -> Particle {
        Particle {
            id,
            position,
            velocity: [0.0; 3],
            mass: 1.0,
            dispersion: 0.0,
            density: 0.0,
        }
    }

    pub fn pos(&self) -> Vec3 {
        Vec3::new(
            self.position[0] as f64,
            self.position[1] as f64,
            self.position[2] as f64,
        )
    }
}

/// One timestep's worth of particles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParticleSnapshot {
    pub timestep: u32,
    pub particles: Vec<Particle>,
}

impl ParticleSnapshot {
    pub fn new(timestep: u32, particles: Vec<Particle>) -> Self {
        ParticleSnapshot {
            timestep,
            particles,
        }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.particles.iter().map(Particle::pos).collect()
    }

    /// Checks id uniqueness and finiteness of positions.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.particles.len());
        for (i, p) in self.particles.iter().enumerate() {
            if !seen.insert(p.id) {
                return Err(Error::Format(format!("duplicate particle id {}", p.id)));
            }
            if !p.position.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidPoint(i));
            }
        }
        Ok(())
    }

    pub fn encoded_len(&self) -> usize {
        HSNP_HEADER_LEN + HSNP_RECORD_LEN * self.particles.len()
    }

    pub fn write_hsnp<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(HSNP_MAGIC)?;
        w.write_u32::<LittleEndian>(HSNP_VERSION)?;
        w.write_u32::<LittleEndian>(self.timestep)?;
        w.write_u64::<LittleEndian>(self.particles.len() as u64)?;
        for p in &self.particles {
            write_record(&mut w, p)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_hsnp_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.encoded_len());
        self.write_hsnp(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_hsnp<R: Read>(mut r: R) -> Result<ParticleSnapshot> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != HSNP_MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let version = r.read_u32::<LittleEndian>().map_err(truncated)?;
        if version != HSNP_VERSION {
            return Err(Error::Format(format!("unsupported HSNP version {version}")));
        }
        let timestep = r.read_u32::<LittleEndian>().map_err(truncated)?;
        let count = r.read_u64::<LittleEndian>().map_err(truncated)?;
        let count = usize::try_from(count)
            .map_err(|_| Error::Format(format!("particle count {count} too large")))?;
        // Cap the pre-allocation so a corrupt header cannot request terabytes.
        let mut particles = Vec::with_capacity(count.min(1 << 24));
        for _ in 0..count {
            particles.push(read_record(&mut r).map_err(truncated)?);
        }
        Ok(ParticleSnapshot {
            timestep,
            particles,
        })
    }

    pub fn from_hsnp_bytes(bytes: &[u8]) -> Result<ParticleSnapshot> {
        let snap = Self::read_hsnp(bytes)?;
        if bytes.len() != snap.encoded_len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after HSNP records",
                bytes.len() - snap.encoded_len()
            )));
        }
        Ok(snap)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = File::create(path)?;
        self.write_hsnp(BufWriter::new(f))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<ParticleSnapshot> {
        let f = File::open(path)?;
        Self::read_hsnp(BufReader::new(f))
    }
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("truncated HSNP stream".into())
    } else {
        Error::Io(e)
    }
}

fn write_record<W: Write>(w: &mut W, p: &Particle) -> std::io::Result<()> {
    w.write_u64::<LittleEndian>(p.id)?;
    for c in p.position.iter().chain(&p.velocity) {
        w.write_f32::<LittleEndian>(*c)?;
    }
    w.write_f32::<LittleEndian>(p.mass)?;
    w.write_f32::<LittleEndian>(p.dispersion)?;
    w.write_f32::<LittleEndian>(p.density)
}

fn read_record<R: Read>(r: &mut R) -> std::io::Result<Particle> {
    let mut buf = [0u8; HSNP_RECORD_LEN];
    r.read_exact(&mut buf)?;
    let mut c = &buf[..];
    let id = c.read_u64::<LittleEndian>()?;
    let mut f = [0f32; 9];
    c.read_f32_into::<LittleEndian>(&mut f)?;
    Ok(Particle {
        id,
        position: [f[0], f[1], f[2]],
        velocity: [f[3], f[4], f[5]],
        mass: f[6],
        dispersion: f[7],
        density: f[8],
    })
}
