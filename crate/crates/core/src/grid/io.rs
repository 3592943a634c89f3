//! `WFGRID1` snapshot format: magic, `Δx: f64`, `nx, ny: u32`, `origin: 2×f64`,
//! run count `u64`, then `u32` run lengths alternating false/true starting with false.
//! Everything little-endian.

use std::io::{Read, Write};

use super::{GridSet, GridSpec};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub const MAGIC: &[u8; 7] = b"WFGRID1";

pub fn write_snapshot(set: &GridSet, mut out: impl Write) -> Result<()> {
    let spec = set.spec();
    out.write_all(MAGIC)?;
    out.write_all(&spec.dx.to_le_bytes())?;
    out.write_all(&(spec.nx as u32).to_le_bytes())?;
    out.write_all(&(spec.ny as u32).to_le_bytes())?;
    out.write_all(&spec.origin.x.to_le_bytes())?;
    out.write_all(&spec.origin.y.to_le_bytes())?;
    let mut runs: Vec<u32> = Vec::new();
    let mut cur = false;
    let mut len = 0u32;
    for &b in set.mask() {
        if b == cur {
            len += 1;
        } else {
            runs.push(len);
            cur = b;
            len = 1;
        }
    }
    runs.push(len);
    out.write_all(&(runs.len() as u64).to_le_bytes())?;
    for r in runs {
        out.write_all(&r.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot(mut input: impl Read) -> Result<GridSet> {
    let mut magic = [0u8; 7];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, expected WFGRID1".into()));
    }
    let mut b8 = [0u8; 8];
    let mut b4 = [0u8; 4];
    let mut f64_ = |input: &mut dyn Read| -> Result<f64> {
        input.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let dx = f64_(&mut input)?;
    input.read_exact(&mut b4)?;
    let nx = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b4)?;
    let ny = u32::from_le_bytes(b4) as usize;
    let ox = f64_(&mut input)?;
    let oy = f64_(&mut input)?;
    input.read_exact(&mut b8)?;
    let nruns = u64::from_le_bytes(b8) as usize;
    let spec = GridSpec::new(Vec2::new(ox, oy), dx, nx, ny)?;
    let mut mask = Vec::with_capacity(spec.len());
    let mut cur = false;
    for _ in 0..nruns {
        input.read_exact(&mut b4)?;
        let r = u32::from_le_bytes(b4) as usize;
        if mask.len() + r > spec.len() {
            return Err(Error::Format("runs overflow the grid".into()));
        }
        mask.extend(std::iter::repeat(cur).take(r));
        cur = !cur;
    }
    if mask.len() != spec.len() {
        return Err(Error::Format(format!("runs cover {} of {} cells", mask.len(), spec.len())));
    }
    GridSet::from_mask(spec, mask)
}
