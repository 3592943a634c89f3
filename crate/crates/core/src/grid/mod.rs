//! Rasterized sets on a uniform lattice: the state evolved by the flow.
//!
//! Cell `(i, j)` covers `origin + [iΔx, (i+1)Δx] × [jΔx, (j+1)Δx]` and is stored at
//! index `j·nx + i`. The outer two-cell rim is a margin that no set may occupy.

mod distance;
mod io;
mod stencil;

pub use distance::{hausdorff_sup_distance, signed_distance_band, signed_distance_field, BoundaryIndex, DistanceMode};
pub use io::{read_snapshot, write_snapshot, MAGIC};
pub use stencil::{anisotropic_perimeter, half_offsets, perimeter_weights, perimeter_weights_with_bound, CroftonStencil};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Polygon, Vec2};

/// Width of the forbidden outer rim, in cells.
pub const MARGIN: usize = 2;

/// Default cap on `nx·ny`.
pub const DEFAULT_CELL_BUDGET: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec2,
    pub dx: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(origin: Vec2, dx: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::with_budget(origin, dx, nx, ny, DEFAULT_CELL_BUDGET)
    }

    pub fn with_budget(origin: Vec2, dx: f64, nx: usize, ny: usize, budget: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {dx}")));
        }
        if nx <= 2 * MARGIN || ny <= 2 * MARGIN {
            return Err(Error::InvalidArgument(format!("grid {nx}x{ny} leaves no room inside the margin")));
        }
        if nx.saturating_mul(ny) > budget {
            return Err(Error::InvalidArgument(format!("grid {nx}x{ny} exceeds the cell budget {budget}")));
        }
        Ok(GridSpec { origin, dx, nx, ny })
    }

    /// Square grid covering `[-half_width, half_width]²` with an even cell count,
    /// so both coordinate axes run along cell edges.
    pub fn centered(half_width: f64, dx: f64) -> Result<Self> {
        let half = (half_width / dx).ceil() as usize;
        let n = 2 * half;
        let o = -(half as f64) * dx;
        Self::new(Vec2::new(o, o), dx, n, n)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.origin.x + (i as f64 + 0.5) * self.dx, self.origin.y + (j as f64 + 0.5) * self.dx)
    }

    #[inline]
    pub fn center_of(&self, idx: usize) -> Vec2 {
        let (i, j) = self.coords(idx);
        self.center(i, j)
    }

    /// Cell containing `p`, if inside the grid.
    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let fi = ((p.x - self.origin.x) / self.dx).floor();
        let fj = ((p.y - self.origin.y) / self.dx).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    #[inline]
    pub fn in_margin(&self, i: usize, j: usize) -> bool {
        i < MARGIN || j < MARGIN || i >= self.nx - MARGIN || j >= self.ny - MARGIN
    }

    /// Lower-left and upper-right corners of the region allowed to hold a set.
    pub fn inner_bounds(&self) -> (Vec2, Vec2) {
        let m = MARGIN as f64 * self.dx;
        (
            Vec2::new(self.origin.x + m, self.origin.y + m),
            Vec2::new(self.origin.x + self.nx as f64 * self.dx - m, self.origin.y + self.ny as f64 * self.dx - m),
        )
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dx
    }

    fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::SpecMismatch(format!(
                "{}x{} @ {} vs {}x{} @ {}",
                self.nx, self.ny, self.dx, other.nx, other.ny, other.dx
            )));
        }
        Ok(())
    }
}

/// A set as a boolean mask over the lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSet {
    spec: GridSpec,
    mask: Vec<bool>,
}

impl GridSet {
    pub fn empty(spec: GridSpec) -> Self {
        GridSet { spec, mask: vec![false; spec.len()] }
    }

    /// Builds a set from a raw mask; the margin must be clear.
    pub fn from_mask(spec: GridSpec, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != spec.len() {
            return Err(Error::SpecMismatch(format!("mask has {} cells, grid has {}", mask.len(), spec.len())));
        }
        let s = GridSet { spec, mask };
        s.check_margin()?;
        Ok(s)
    }

    /// Cells whose center satisfies `inside`.
    pub fn from_predicate(spec: GridSpec, inside: impl Fn(Vec2) -> bool) -> Result<Self> {
        let mask = (0..spec.len()).map(|k| inside(spec.center_of(k))).collect();
        Self::from_mask(spec, mask)
    }

    fn check_margin(&self) -> Result<()> {
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                if self.spec.in_margin(i, j) && self.mask[self.spec.index(i, j)] {
                    return Err(Error::DomainTooSmall(format!("cell ({i}, {j}) lies in the grid margin")));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.mask[self.spec.index(i, j)]
    }

    /// Membership with everything outside the grid treated as exterior.
    #[inline]
    pub fn get_signed(&self, i: isize, j: isize) -> bool {
        if i < 0 || j < 0 || i as usize >= self.spec.nx || j as usize >= self.spec.ny {
            return false;
        }
        self.mask[self.spec.index(i as usize, j as usize)]
    }

    #[inline]
    pub fn contains_idx(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|&b| b)
    }

    /// `|E| = #cells·Δx²`.
    pub fn area(&self) -> f64 {
        self.count() as f64 * self.spec.cell_area()
    }

    pub fn sym_diff_count(&self, other: &GridSet) -> Result<usize> {
        self.spec.check_same(&other.spec)?;
        Ok(self.mask.iter().zip(&other.mask).filter(|(a, b)| a != b).count())
    }

    /// `|A Δ B|`.
    pub fn sym_diff_area(&self, other: &GridSet) -> Result<f64> {
        Ok(self.sym_diff_count(other)? as f64 * self.spec.cell_area())
    }

    fn zip_with(&self, other: &GridSet, f: impl Fn(bool, bool) -> bool) -> Result<GridSet> {
        self.spec.check_same(&other.spec)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| f(a, b)).collect();
        Ok(GridSet { spec: self.spec, mask })
    }

    pub fn union(&self, other: &GridSet) -> Result<GridSet> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &GridSet) -> Result<GridSet> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &GridSet) -> Result<GridSet> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn sym_difference(&self, other: &GridSet) -> Result<GridSet> {
        self.zip_with(other, |a, b| a != b)
    }

    /// Indices of set cells with a 4-neighbor outside the set.
    pub fn boundary_cells(&self) -> Vec<usize> {
        let (nx, ny) = (self.spec.nx as isize, self.spec.ny as isize);
        let mut out = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if !self.get_signed(i, j) {
                    continue;
                }
                if !self.get_signed(i + 1, j) || !self.get_signed(i - 1, j) || !self.get_signed(i, j + 1) || !self.get_signed(i, j - 1) {
                    out.push(self.spec.index(i as usize, j as usize));
                }
            }
        }
        out
    }

    /// Centroid of the set cells.
    pub fn centroid(&self) -> Option<Vec2> {
        let mut s = Vec2::ZERO;
        let mut n = 0usize;
        for (k, &b) in self.mask.iter().enumerate() {
            if b {
                s += self.spec.center_of(k);
                n += 1;
            }
        }
        (n > 0).then(|| s * (1.0 / n as f64))
    }

    /// 8-connected components, each as a list of cell indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.mask.len()];
        let mut comps = Vec::new();
        let (nx, ny) = (self.spec.nx as isize, self.spec.ny as isize);
        for start in 0..self.mask.len() {
            if !self.mask[start] || label[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut cells = vec![start];
            label[start] = id;
            let mut head = 0;
            while head < cells.len() {
                let (i, j) = self.spec.coords(cells[head]);
                head += 1;
                for dj in -1..=1isize {
                    for di in -1..=1isize {
                        let (a, b) = (i as isize + di, j as isize + dj);
                        if a < 0 || b < 0 || a >= nx || b >= ny {
                            continue;
                        }
                        let k = self.spec.index(a as usize, b as usize);
                        if self.mask[k] && label[k] == usize::MAX {
                            label[k] = id;
                            cells.push(k);
                        }
                    }
                }
            }
            comps.push(cells);
        }
        comps
    }
}

/// One scalar per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }
}

/// Even–odd rasterization by cell centers. Holes are simply polygons nested inside others.
pub fn rasterize(polygons: &[Polygon], spec: GridSpec) -> Result<GridSet> {
    let (lo, hi) = spec.inner_bounds();
    for poly in polygons {
        for p in poly {
            if p.x < lo.x || p.y < lo.y || p.x > hi.x || p.y > hi.y {
                return Err(Error::DomainTooSmall(format!("polygon vertex ({:.4}, {:.4}) outside the usable domain", p.x, p.y)));
            }
        }
    }
    let mut set = GridSet::empty(spec);
    let mut xs: Vec<f64> = Vec::new();
    for j in 0..spec.ny {
        let y = spec.center(0, j).y;
        xs.clear();
        for poly in polygons {
            let n = poly.len();
            for k in 0..n {
                let (a, b) = (poly[k], poly[(k + 1) % n]);
                if (a.y > y) != (b.y > y) {
                    xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            // cells whose center x lies in [pair[0], pair[1])
            let i0 = ((pair[0] - spec.origin.x) / spec.dx - 0.5).ceil().max(0.0) as usize;
            let i1f = ((pair[1] - spec.origin.x) / spec.dx - 0.5).ceil();
            let i1 = (i1f.max(0.0) as usize).min(spec.nx);
            for i in i0..i1 {
                let k = spec.index(i, j);
                set.mask[k] = !set.mask[k];
            }
        }
    }
    set.check_margin()?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rectangle, regular_polygon};
    use std::f64::consts::PI;

    #[test]
    fn disk_area() {
        let spec = GridSpec::centered(1.5, 0.01).unwrap();
        // a lattice-symmetric center gives the worst case (1.2e-3 here); use a generic one
        let disk = rasterize(&[regular_polygon(Vec2::new(0.0031, 0.0047), 1.0, 4096, 0.0)], spec).unwrap();
        assert!((disk.area() - PI).abs() < 1e-3, "{}", disk.area() - PI);
        let centered = rasterize(&[regular_polygon(Vec2::ZERO, 1.0, 4096, 0.0)], spec).unwrap();
        assert!((centered.area() - PI).abs() < 0.01 * 2.0 * PI * 0.1);
    }

    #[test]
    fn empty_and_full_block() {
        let spec = GridSpec::centered(1.5, 0.01).unwrap();
        assert_eq!(rasterize(&[], spec).unwrap().area(), 0.0);
        let spec = GridSpec::new(Vec2::ZERO, 0.1, 14, 14).unwrap();
        let block = rasterize(&[rectangle(Vec2::new(0.2, 0.2), Vec2::new(1.2, 1.2))], spec).unwrap();
        assert!((block.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_with_hole() {
        let spec = GridSpec::new(Vec2::new(-0.1, -0.1), 0.01, 120, 120).unwrap();
        let outer = rectangle(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
        let mut hole = rectangle(Vec2::new(0.25, 0.25), Vec2::new(0.75, 0.75));
        hole.reverse();
        let s = rasterize(&[outer, hole], spec).unwrap();
        assert!((s.area() - 0.75).abs() <= 2.0 * 0.01 * 6.0);
    }

    #[test]
    fn margin_violation() {
        let spec = GridSpec::centered(1.0, 0.05).unwrap();
        let big = regular_polygon(Vec2::ZERO, 0.99, 64, 0.0);
        assert!(matches!(rasterize(&[big], spec), Err(Error::DomainTooSmall(_))));
    }

    #[test]
    fn sym_diff_basics() {
        let spec = GridSpec::centered(1.0, 0.05).unwrap();
        let a = rasterize(&[regular_polygon(Vec2::ZERO, 0.5, 64, 0.0)], spec).unwrap();
        assert_eq!(a.sym_diff_area(&a).unwrap(), 0.0);
        let other = GridSpec::centered(1.0, 0.04).unwrap();
        assert!(matches!(a.sym_diff_area(&GridSet::empty(other)), Err(Error::SpecMismatch(_))));
        assert_eq!(a.components().len(), 1);
    }
}
