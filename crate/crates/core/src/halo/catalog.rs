//! Halo catalog CSV: one record per line, header required, LF endings.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::forest::HaloRecord;
use crate::error::{Error, Result};

pub const CATALOG_HEADER: [&str; 12] = [
    "halo_id",
    "timestep",
    "descendant_id",
    "fof_group_id",
    "is_master",
    "x",
    "y",
    "z",
    "radius",
    "mass",
    "dispersion",
    "density",
];

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.trim().parse().map_err(|_| {
        Error::Format(format!("line {line}: bad {} value {raw:?}", CATALOG_HEADER[i]))
    })
}

/// Parses a catalog. Checks the header and per-field value ranges; forest
/// invariants are left to [`super::MergerForest::load`].
pub fn read_catalog<R: Read>(input: R) -> Result<Vec<HaloRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(CATALOG_HEADER.iter().copied()) {
        return Err(Error::Format(format!("unexpected catalog header: {header:?}")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let descendant_id = match rec.get(2).map(str::trim) {
            None | Some("") => None,
            Some(_) => Some(field(&rec, 2, line)?),
        };
        let is_master = match rec.get(4).map(str::trim) {
            Some("0") => false,
            Some("1") => true,
            other => return Err(Error::Format(format!("line {line}: is_master must be 0 or 1, got {other:?}"))),
        };
        let h = HaloRecord {
            halo_id: field(&rec, 0, line)?,
            timestep: field(&rec, 1, line)?,
            descendant_id,
            fof_group_id: field(&rec, 3, line)?,
            is_master,
            center: [field(&rec, 5, line)?, field(&rec, 6, line)?, field(&rec, 7, line)?],
            radius: field(&rec, 8, line)?,
            mass: field(&rec, 9, line)?,
            dispersion: field(&rec, 10, line)?,
            density: field(&rec, 11, line)?,
        };
        if !(h.radius > 0.0 && h.mass > 0.0 && h.dispersion >= 0.0 && h.density >= 0.0)
            || !h.center.iter().all(|c| c.is_finite())
        {
            return Err(Error::Format(format!("line {line}: halo {} has out-of-range values", h.halo_id)));
        }
        out.push(h);
    }
    Ok(out)
}

pub fn read_catalog_file(path: &Path) -> Result<Vec<HaloRecord>> {
    read_catalog(BufReader::new(File::open(path)?))
}

/// Writes records with shortest round-trip float formatting, so
/// write → read reproduces every field exactly.
pub fn write_catalog<W: Write>(out: W, halos: &[HaloRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CATALOG_HEADER)?;
    for h in halos {
        w.write_record([
            h.halo_id.to_string(),
            h.timestep.to_string(),
            h.descendant_id.map(|d| d.to_string()).unwrap_or_default(),
            h.fof_group_id.to_string(),
            (h.is_master as u8).to_string(),
            h.center[0].to_string(),
            h.center[1].to_string(),
            h.center[2].to_string(),
            h.radius.to_string(),
            h.mass.to_string(),
            h.dispersion.to_string(),
            h.density.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_catalog_file(path: &Path, halos: &[HaloRecord]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    write_catalog(&mut f, halos)?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ErrorKind;
    use proptest::prelude::*;

    fn sample() -> HaloRecord {
        HaloRecord {
            halo_id: 7,
            timestep: 3,
            descendant_id: Some(11),
            fof_group_id: 2,
            is_master: true,
            center: [0.1, -2.5e-8, 1e300],
            radius: 0.3,
            mass: 1.0 / 3.0,
            dispersion: 0.0,
            density: 12.5,
        }
    }

    #[test]
    fn layout_of_a_line() {
        let mut buf = Vec::new();
        let mut h = sample();
        h.descendant_id = None;
        h.center = [1.0, 2.0, 3.5];
        h.mass = 4.0;
        write_catalog(&mut buf, &[h]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "halo_id,timestep,descendant_id,fof_group_id,is_master,x,y,z,radius,mass,dispersion,density\n\
             7,3,,2,1,1,2,3.5,0.3,4,0,12.5\n"
        );
    }

    #[test]
    fn rejects_bad_input() {
        let bad_header = "id,timestep\n1,2\n";
        assert_eq!(read_catalog(bad_header.as_bytes()).unwrap_err().kind(), ErrorKind::Format);
        let head = CATALOG_HEADER.join(",");
        let bad_master = format!("{head}\n1,0,,1,2,0,0,0,1,1,0,0\n");
        assert_eq!(read_catalog(bad_master.as_bytes()).unwrap_err().kind(), ErrorKind::Format);
        let bad_mass = format!("{head}\n1,0,,1,1,0,0,0,1,0,0,0\n");
        assert_eq!(read_catalog(bad_mass.as_bytes()).unwrap_err().kind(), ErrorKind::Format);
        let short = format!("{head}\n1,0,,1,1,0,0\n");
        assert_eq!(read_catalog(short.as_bytes()).unwrap_err().kind(), ErrorKind::Format);
    }

    proptest! {
        #[test]
        fn round_trip_is_field_exact(
            id in any::<u64>(), t in 0u32..1000, desc in proptest::option::of(any::<u64>()),
            fof in any::<u64>(), master in any::<bool>(),
            c in proptest::array::uniform3(-1e12f64..1e12),
            r in 1e-9f64..1e9, m in 1e-9f64..1e15, s in 0f64..1e6, d in 0f64..1e9,
        ) {
            let h = HaloRecord { halo_id: id, timestep: t, descendant_id: desc, fof_group_id: fof,
                is_master: master, center: c, radius: r, mass: m, dispersion: s, density: d };
            let mut buf = Vec::new();
            write_catalog(&mut buf, &[h.clone(), sample()]).unwrap();
            let back = read_catalog(buf.as_slice()).unwrap();
            prop_assert_eq!(back.len(), 2);
            prop_assert_eq!(&back[0], &h);
            for (a, b) in back[0].center.iter().zip(h.center.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back[0].mass.to_bits(), h.mass.to_bits());
            prop_assert_eq!(&back[1], &sample());
        }
    }
}
