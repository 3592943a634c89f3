//! Anisotropic signed distance to the boundary of a lattice set.
//!
//! The boundary is represented by the midpoints of cell edges separating set from
//! non-set cells. Exact queries scan bucketed midpoints ring by ring and stop once
//! the lower bound `ψ(v) ≥ γ_min |v|` rules out the remaining rings.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{half_offsets, GridSet, GridSpec, ScalarField};
use crate::anisotropy::AnisoNorm;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

const BUCKET: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceMode {
    /// Minimum of `ψ(x − y)` over boundary midpoints.
    Exact,
    /// Shortest paths over the 32-neighborhood with edge length `ψ(e Δx)`.
    Fast,
}

/// Bucketed boundary midpoints of a set, for repeated distance queries.
pub struct BoundaryIndex {
    spec: GridSpec,
    nbx: usize,
    nby: usize,
    start: Vec<u32>,
    points: Vec<Vec2>,
}

impl BoundaryIndex {
    pub fn new(set: &GridSet) -> Result<Self> {
        let spec = *set.spec();
        let (nx, ny) = (spec.nx as isize, spec.ny as isize);
        let mut raw: Vec<(usize, Vec2)> = Vec::new();
        let nbx = spec.nx.div_ceil(BUCKET);
        let nby = spec.ny.div_ceil(BUCKET);
        let bucket_of = |i: usize, j: usize| (j.min(spec.ny - 1) / BUCKET) * nbx + i.min(spec.nx - 1) / BUCKET;
        let h = 0.5 * spec.dx;
        for j in -1..ny {
            for i in -1..nx {
                let a = set.get_signed(i, j);
                if a != set.get_signed(i + 1, j) {
                    let c = spec.center(0, 0) + Vec2::new(i as f64 * spec.dx + h, j as f64 * spec.dx);
                    raw.push((bucket_of((i + 1).max(0) as usize, j.max(0) as usize), c));
                }
                if a != set.get_signed(i, j + 1) {
                    let c = spec.center(0, 0) + Vec2::new(i as f64 * spec.dx, j as f64 * spec.dx + h);
                    raw.push((bucket_of(i.max(0) as usize, (j + 1).max(0) as usize), c));
                }
            }
        }
        if raw.is_empty() {
            return Err(Error::UndefinedDistance);
        }
        raw.sort_by_key(|&(b, _)| b);
        let mut start = vec![0u32; nbx * nby + 1];
        for &(b, _) in &raw {
            start[b + 1] += 1;
        }
        for b in 0..nbx * nby {
            start[b + 1] += start[b];
        }
        let points = raw.into_iter().map(|(_, p)| p).collect();
        Ok(BoundaryIndex { spec, nbx, nby, start, points })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    fn bucket_points(&self, bx: usize, by: usize) -> &[Vec2] {
        let b = by * self.nbx + bx;
        &self.points[self.start[b] as usize..self.start[b + 1] as usize]
    }

    fn bucket_coords(&self, x: Vec2) -> (isize, isize) {
        let fx = ((x.x - self.spec.origin.x) / self.spec.dx).floor() as isize;
        let fy = ((x.y - self.spec.origin.y) / self.spec.dx).floor() as isize;
        let cx = fx.clamp(0, self.spec.nx as isize - 1) as usize / BUCKET;
        let cy = fy.clamp(0, self.spec.ny as isize - 1) as usize / BUCKET;
        (cx as isize, cy as isize)
    }

    /// `min_y ψ(x − y)` over boundary midpoints, saturated at `cap`.
    pub fn distance(&self, psi: &AnisoNorm, x: Vec2, cap: f64) -> f64 {
        let gmin = psi.data().gamma_min;
        let (bx, by) = self.bucket_coords(x);
        // extra slack for queries outside the grid, whose bucket was clamped
        let (lo, hi) = (self.spec.origin, self.spec.center(self.spec.nx - 1, self.spec.ny - 1));
        let outside = (lo.x - x.x).max(x.x - hi.x).max(lo.y - x.y).max(x.y - hi.y).max(0.0);
        let ring_width = BUCKET as f64 * self.spec.dx;
        let max_r = self.nbx.max(self.nby) as isize;
        let mut best = f64::INFINITY;
        let mut r = 0isize;
        while r <= max_r {
            let lower = ((r - 1).max(0) as f64 * ring_width - outside).max(0.0) * gmin;
            if lower > best.min(cap) {
                break;
            }
            let mut visit = |cx: isize, cy: isize| {
                if cx < 0 || cy < 0 || cx >= self.nbx as isize || cy >= self.nby as isize {
                    return;
                }
                for &p in self.bucket_points(cx as usize, cy as usize) {
                    let d = psi.eval(x - p);
                    if d < best {
                        best = d;
                    }
                }
            };
            if r == 0 {
                visit(bx, by);
            } else {
                for cx in (bx - r)..=(bx + r) {
                    visit(cx, by - r);
                    visit(cx, by + r);
                }
                for cy in (by - r + 1)..(by + r) {
                    visit(bx - r, cy);
                    visit(bx + r, cy);
                }
            }
            r += 1;
        }
        best.min(cap)
    }
}

/// Signed `ψ`-distance to `∂F`, negative inside.
pub fn signed_distance_field(set: &GridSet, psi: &AnisoNorm, mode: DistanceMode) -> Result<ScalarField> {
    match mode {
        DistanceMode::Exact => signed_distance_band(set, psi, f64::INFINITY),
        DistanceMode::Fast => chamfer_field(set, psi),
    }
}

/// Exact signed distance on cells with `|sd| < cap`; cells farther away get `±cap`.
pub fn signed_distance_band(set: &GridSet, psi: &AnisoNorm, cap: f64) -> Result<ScalarField> {
    let index = BoundaryIndex::new(set)?;
    let spec = *set.spec();
    let mut values = vec![0.0; spec.len()];
    if cap.is_finite() {
        // only buckets within reach of a boundary bucket can hold cells below the cap
        let reach = (cap / (psi.data().gamma_min * BUCKET as f64 * spec.dx)).ceil() as isize + 1;
        let mut near = vec![false; index.nbx * index.nby];
        for by in 0..index.nby {
            for bx in 0..index.nbx {
                if index.bucket_points(bx, by).is_empty() {
                    continue;
                }
                let y0 = (by as isize - reach).max(0) as usize;
                let y1 = ((by as isize + reach) as usize).min(index.nby - 1);
                let x0 = (bx as isize - reach).max(0) as usize;
                let x1 = ((bx as isize + reach) as usize).min(index.nbx - 1);
                for yy in y0..=y1 {
                    for xx in x0..=x1 {
                        near[yy * index.nbx + xx] = true;
                    }
                }
            }
        }
        for k in 0..spec.len() {
            let (i, j) = spec.coords(k);
            let sign = if set.contains_idx(k) { -1.0 } else { 1.0 };
            values[k] = if near[(j / BUCKET) * index.nbx + i / BUCKET] {
                sign * index.distance(psi, spec.center(i, j), cap)
            } else {
                sign * cap
            };
        }
    } else {
        for (k, v) in values.iter_mut().enumerate() {
            let sign = if set.contains_idx(k) { -1.0 } else { 1.0 };
            *v = sign * index.distance(psi, spec.center_of(k), f64::INFINITY);
        }
    }
    Ok(ScalarField { spec, values })
}

#[derive(PartialEq)]
struct Item(f64, usize);
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

/// Dijkstra over the 32-neighborhood, seeded with exact distances on cells touching the boundary.
fn chamfer_field(set: &GridSet, psi: &AnisoNorm) -> Result<ScalarField> {
    if set.is_empty() || set.is_full() {
        return Err(Error::UndefinedDistance);
    }
    let spec = *set.spec();
    let (nx, ny) = (spec.nx as isize, spec.ny as isize);
    let mut dist = vec![f64::INFINITY; spec.len()];
    let mut heap = BinaryHeap::new();
    let h = 0.5 * spec.dx;
    for j in 0..ny {
        for i in 0..nx {
            let a = set.get_signed(i, j);
            let k = spec.index(i as usize, j as usize);
            for (di, dj) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                if set.get_signed(i + di, j + dj) != a {
                    let d = psi.eval(Vec2::new(di as f64 * h, dj as f64 * h));
                    if d < dist[k] {
                        dist[k] = d;
                    }
                }
            }
            if dist[k].is_finite() {
                heap.push(Item(dist[k], k));
            }
        }
    }
    let mut steps: Vec<(isize, isize, f64)> = Vec::new();
    for (a, b) in half_offsets(32)? {
        let l = psi.eval(Vec2::new(a as f64 * spec.dx, b as f64 * spec.dx));
        steps.push((a as isize, b as isize, l));
        steps.push((-a as isize, -b as isize, l));
    }
    while let Some(Item(d, k)) = heap.pop() {
        if d > dist[k] {
            continue;
        }
        let (i, j) = spec.coords(k);
        let inside = set.contains_idx(k);
        for &(a, b, l) in &steps {
            let (p, q) = (i as isize + a, j as isize + b);
            if p < 0 || q < 0 || p >= nx || q >= ny {
                continue;
            }
            let m = spec.index(p as usize, q as usize);
            // paths stay on one side of the boundary
            if set.contains_idx(m) != inside {
                continue;
            }
            let nd = d + l;
            if nd < dist[m] {
                dist[m] = nd;
                heap.push(Item(nd, m));
            }
        }
    }
    let values = dist.iter().enumerate().map(|(k, &d)| if set.contains_idx(k) { -d } else { d }).collect();
    Ok(ScalarField { spec, values })
}

/// `sup_{A Δ F} d^ψ_F`, evaluated at cell centers with exact distances; 0 when the masks agree.
pub fn hausdorff_sup_distance(a: &GridSet, f: &GridSet, psi: &AnisoNorm) -> Result<f64> {
    let diff = a.sym_difference(f)?;
    if diff.is_empty() {
        return Ok(0.0);
    }
    let index = BoundaryIndex::new(f)?;
    let spec = *f.spec();
    let mut best = 0.0f64;
    for (k, &b) in diff.mask().iter().enumerate() {
        if b {
            best = best.max(index.distance(psi, spec.center_of(k), f64::INFINITY));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anisotropy::NormSpec;
    use crate::geometry::regular_polygon;
    use crate::grid::rasterize;

    fn disk(spec: GridSpec, c: Vec2, r: f64) -> GridSet {
        rasterize(&[regular_polygon(c, r, 1024, 0.0)], spec).unwrap()
    }

    #[test]
    fn euclidean_disk_distances() {
        let spec = GridSpec::centered(2.6, 0.02).unwrap();
        let d = disk(spec, Vec2::ZERO, 1.0);
        let e = AnisoNorm::euclidean();
        let sd = signed_distance_field(&d, &e, DistanceMode::Exact).unwrap();
        // values live at cell centers, so compare with the radial distance of the center
        for p in [Vec2::new(2.0 + 1e-9, 1e-9), Vec2::new(1e-9, 1e-9), Vec2::new(-0.5, 1.3)] {
            let (i, j) = spec.cell_of(p).unwrap();
            let c = spec.center(i, j);
            assert!((sd.get(i, j) - (c.norm() - 1.0)).abs() <= spec.dx, "{p:?}");
        }
    }

    #[test]
    fn band_agrees_with_full_inside_cap() {
        let spec = GridSpec::centered(1.5, 0.03).unwrap();
        let d = disk(spec, Vec2::new(0.1, -0.05), 0.7);
        let e = AnisoNorm::from_spec(&NormSpec::ellipse(1.5, 1.0).rotated(0.3)).unwrap();
        let full = signed_distance_field(&d, &e, DistanceMode::Exact).unwrap();
        let band = signed_distance_band(&d, &e, 0.2).unwrap();
        for (a, b) in full.values.iter().zip(&band.values) {
            if a.abs() < 0.2 {
                assert_eq!(a, b);
            } else {
                assert_eq!(b.abs(), 0.2);
                assert_eq!(a.signum(), b.signum());
            }
        }
    }

    #[test]
    fn exact_matches_brute_force() {
        let spec = GridSpec::centered(1.0, 0.05).unwrap();
        let d = disk(spec, Vec2::new(0.1, 0.0), 0.5);
        let e = AnisoNorm::from_spec(&NormSpec::fourier(&[1.0, 0.15]).rotated(0.2)).unwrap();
        let idx = BoundaryIndex::new(&d).unwrap();
        let sd = signed_distance_field(&d, &e, DistanceMode::Exact).unwrap();
        for k in (0..spec.len()).step_by(7) {
            let x = spec.center_of(k);
            let brute = idx.points().iter().map(|&p| e.eval(x - p)).fold(f64::INFINITY, f64::min);
            assert!((sd.values[k].abs() - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn fast_overestimates_mildly() {
        let spec = GridSpec::centered(1.5, 0.025).unwrap();
        let d = disk(spec, Vec2::ZERO, 0.8);
        let e = AnisoNorm::euclidean();
        let ex = signed_distance_field(&d, &e, DistanceMode::Exact).unwrap();
        let fa = signed_distance_field(&d, &e, DistanceMode::Fast).unwrap();
        for (a, b) in ex.values.iter().zip(&fa.values) {
            assert_eq!(a.signum(), b.signum());
            assert!(b.abs() >= a.abs() - 1e-12);
            assert!(b.abs() <= 1.03 * a.abs() + 2.0 * spec.dx);
        }
    }

    #[test]
    fn empty_set_is_undefined() {
        let spec = GridSpec::centered(1.0, 0.1).unwrap();
        let e = AnisoNorm::euclidean();
        assert!(matches!(
            signed_distance_field(&GridSet::empty(spec), &e, DistanceMode::Exact),
            Err(Error::UndefinedDistance)
        ));
    }

    #[test]
    fn hausdorff_annulus() {
        let spec = GridSpec::centered(1.5, 0.01).unwrap();
        let a = disk(spec, Vec2::ZERO, 1.1);
        let f = disk(spec, Vec2::ZERO, 1.0);
        let e = AnisoNorm::euclidean();
        assert_eq!(hausdorff_sup_distance(&f, &f, &e).unwrap(), 0.0);
        let h = hausdorff_sup_distance(&a, &f, &e).unwrap();
        assert!((h - 0.1).abs() <= 0.02, "{h}");
    }
}
