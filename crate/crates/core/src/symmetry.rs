//! Reflection comparison of sets across half-planes, root-system direction families and
//! the geometric criteria derived from them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisoNorm;
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, is_convex, signed_area, Polygon, Vec2};
use crate::grid::{GridSet, GridSpec};

/// `H = {x : x·ν ≤ s}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub nu: Vec2,
    pub s: f64,
}

impl HalfSpace {
    pub fn new(nu: Vec2, s: f64) -> Result<Self> {
        let n = nu.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidArgument("half-space normal must be nonzero".into()));
        }
        Ok(HalfSpace { nu: nu * (1.0 / n), s: s / n })
    }

    pub fn contains(&self, x: Vec2) -> bool {
        x.dot(self.nu) <= self.s
    }

    /// Signed distance to `∂H`, negative inside.
    pub fn offset(&self, x: Vec2) -> f64 {
        x.dot(self.nu) - self.s
    }

    /// `Ψ(x) = x + 2(s − x·ν)ν`.
    pub fn reflect_point(&self, x: Vec2) -> Vec2 {
        x + self.nu * (2.0 * (self.s - x.dot(self.nu)))
    }

    /// Whether `Ψ` permutes the cell centers of `spec` exactly.
    pub fn is_aligned(&self, spec: &GridSpec) -> bool {
        let probe = [spec.center(0, 0), spec.center(1, 0), spec.center(0, 1), spec.center(3, 5)];
        probe.iter().all(|&c| {
            let r = self.reflect_point(c);
            let fi = (r.x - spec.origin.x) / spec.dx - 0.5;
            let fj = (r.y - spec.origin.y) / spec.dx - 0.5;
            (fi - fi.round()).abs() < 1e-9 && (fj - fj.round()).abs() < 1e-9
        })
    }
}

/// Reflected set `Ψ(E)`, pulled back cell by cell with nearest-cell snapping.
pub fn reflect(e: &GridSet, h: &HalfSpace) -> Result<GridSet> {
    reflect_where(e, h, |_| true)
}

/// `Ψ(E) ∩ H`, the only part the comparison looks at. Cells of `E ∩ H` may reflect off
/// the grid without harm.
pub fn reflect_into(e: &GridSet, h: &HalfSpace) -> Result<GridSet> {
    reflect_where(e, h, |x| h.contains(x))
}

fn reflect_where(e: &GridSet, h: &HalfSpace, target: impl Fn(Vec2) -> bool) -> Result<GridSet> {
    let spec = *e.spec();
    let (lo, hi) = spec.inner_bounds();
    for (k, &b) in e.mask().iter().enumerate() {
        if b {
            let r = h.reflect_point(spec.center_of(k));
            if target(r) && (r.x < lo.x || r.y < lo.y || r.x > hi.x || r.y > hi.y) {
                return Err(Error::DomainTooSmall(format!(
                    "reflection of ({:.4}, {:.4}) across the half-plane leaves the grid",
                    r.x, r.y
                )));
            }
        }
    }
    let mask = (0..spec.len())
        .map(|k| {
            let c = spec.center_of(k);
            if !target(c) {
                return false;
            }
            let r = h.reflect_point(c);
            let fi = ((r.x - spec.origin.x) / spec.dx - 0.5).round();
            let fj = ((r.y - spec.origin.y) / spec.dx - 0.5).round();
            fi >= 0.0 && fj >= 0.0 && e.get_signed(fi as isize, fj as isize)
        })
        .collect();
    GridSet::from_mask(spec, mask)
}

/// Euclidean boundary length estimated from the count of 4-neighbor boundary edges;
/// the factor `π/4` makes the count unbiased over orientations.
pub fn lattice_length(e: &GridSet) -> f64 {
    let spec = e.spec();
    let mut edges = 0usize;
    for j in 0..spec.ny as isize {
        for i in 0..spec.nx as isize {
            let a = e.get_signed(i, j);
            if a != e.get_signed(i + 1, j) {
                edges += 1;
            }
            if a != e.get_signed(i, j + 1) {
                edges += 1;
            }
            if i == 0 && a {
                edges += 1;
            }
            if j == 0 && a {
                edges += 1;
            }
        }
    }
    edges as f64 * spec.dx * PI / 4.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionCheck {
    pub nu: Vec2,
    pub s: f64,
    /// `|(Ψ(E) ∩ H) ∖ E|`.
    pub violation: f64,
    pub tolerance: f64,
    pub holds: bool,
    /// Smallest distance between boundary cells of `E` and of `Ψ(E)` inside `H`, away from `∂H`.
    pub contact: Option<f64>,
    pub strict: Option<bool>,
}

/// Default tolerance factor: violations up to `4Δx·P(E)` count as snapping noise.
pub const VIOLATION_FACTOR: f64 = 4.0;

pub fn check_star_h(e: &GridSet, h: &HalfSpace) -> Result<ReflectionCheck> {
    let r = reflect_into(e, h)?;
    let spec = *e.spec();
    let count = (0..spec.len())
        .filter(|&k| r.contains_idx(k) && !e.contains_idx(k) && h.contains(spec.center_of(k)))
        .count();
    let violation = count as f64 * spec.cell_area();
    let tolerance = VIOLATION_FACTOR * spec.dx * lattice_length(e);
    Ok(ReflectionCheck { nu: h.nu, s: h.s, violation, tolerance, holds: violation <= tolerance, contact: None, strict: None })
}

/// The stricter comparison: no boundary cell of `E` inside `H` and farther than `band`
/// from `∂H` is also a boundary cell of `Ψ(E)`.
pub fn check_star_h_strict(e: &GridSet, h: &HalfSpace, band: f64) -> Result<ReflectionCheck> {
    let mut check = check_star_h(e, h)?;
    let r = reflect_into(e, h)?;
    let spec = *e.spec();
    let away = |k: usize| {
        let c = spec.center_of(k);
        h.contains(c) && -h.offset(c) > band
    };
    let be: Vec<usize> = e.boundary_cells().into_iter().filter(|&k| away(k)).collect();
    let br: Vec<usize> = r.boundary_cells().into_iter().filter(|&k| away(k)).collect();
    let mut contact = f64::INFINITY;
    for &a in &be {
        let ca = spec.center_of(a);
        for &b in &br {
            contact = contact.min((spec.center_of(b) - ca).norm());
        }
    }
    let strict = contact > 0.5 * spec.dx;
    check.contact = contact.is_finite().then_some(contact);
    check.strict = Some(check.holds && strict);
    Ok(check)
}

/// Default exclusion band of the strict check, in cells.
pub const STRICT_BAND_CELLS: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub dirs: Vec<Vec2>,
}

impl DirectionSet {
    pub fn new(dirs: Vec<Vec2>) -> Result<Self> {
        if dirs.iter().any(|d| !(d.norm() > 0.0)) {
            return Err(Error::InvalidArgument("directions must be nonzero".into()));
        }
        Ok(DirectionSet { dirs: dirs.into_iter().map(|d| d.normalized()).collect() })
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    fn contains(&self, v: Vec2, tol: f64) -> bool {
        self.dirs.iter().any(|d| (*d - v).norm() <= tol)
    }

    /// Closed under `ν ↦ −ν` and under the reflections `Ψ_ν(w) = w − 2(w·ν)ν`.
    pub fn is_root_system(&self, tol: f64) -> bool {
        self.dirs.iter().all(|&v| {
            self.contains(v * -1.0, tol) && self.dirs.iter().all(|&w| self.contains(w - v * (2.0 * w.dot(v)), tol))
        })
    }
}

/// `Q_{2m}`: the `2m` directions at angles `πi/m`.
pub fn root_system(m: usize) -> Result<DirectionSet> {
    if m == 0 {
        return Err(Error::InvalidArgument("root system needs m >= 1".into()));
    }
    Ok(DirectionSet { dirs: (0..2 * m).map(|i| Vec2::from_angle(PI * i as f64 / m as f64)).collect() })
}

fn check_convex(d: &[Vec2]) -> Result<()> {
    if d.is_empty() {
        return Err(Error::InvalidArgument("convex set needs at least one point".into()));
    }
    if d.len() >= 3 && !is_convex(d) {
        return Err(Error::InvalidArgument("polygon is not convex".into()));
    }
    Ok(())
}

/// Tight half-planes `{x·ν ≤ max_{d∈D} d·ν}` for `ν ∈ 𝒫`. Growing `s` only shrinks the
/// violation, so these are the binding members of the family.
pub fn halfspace_family(d: &[Vec2], dirs: &DirectionSet) -> Result<Vec<HalfSpace>> {
    check_convex(d)?;
    Ok(dirs
        .dirs
        .iter()
        .map(|&nu| HalfSpace { nu, s: d.iter().map(|p| p.dot(nu)).fold(f64::NEG_INFINITY, f64::max) })
        .collect())
}

/// `D ⊕ r W_φ` with `r = (m/|W_φ|)^{1/2}`, as a convex polygon.
pub fn containment_bound(d: &[Vec2], m: f64, phi: &AnisoNorm) -> Result<Polygon> {
    check_convex(d)?;
    let r = (m / phi.wulff_area()).sqrt();
    let w = phi.wulff_polygon(Vec2::ZERO, r, 512)?;
    let sums: Vec<Vec2> = d.iter().flat_map(|&p| w.iter().map(move |&q| p + q)).collect();
    Ok(convex_hull(&sums))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleWulff {
    pub holds: bool,
    pub alpha: f64,
    pub threshold: f64,
    /// `|D| = 0`: the criterion holds trivially and `α = ∞`.
    pub degenerate: bool,
}

/// `α = P_φ(D) / (2|W_φ|^{1/2}|D|^{1/2})`; holds iff `m > 2(√(α²+1)+α)²|D|`.
pub fn single_wulff_criterion(d: &[Vec2], phi: &AnisoNorm, m: f64) -> Result<SingleWulff> {
    check_convex(d)?;
    let area = if d.len() >= 3 { signed_area(d).abs() } else { 0.0 };
    if area <= 0.0 {
        return Ok(SingleWulff { holds: true, alpha: f64::INFINITY, threshold: 0.0, degenerate: true });
    }
    let ccw = signed_area(d) > 0.0;
    let n = d.len();
    let per: f64 = (0..n)
        .map(|i| {
            let e = d[(i + 1) % n] - d[i];
            let outer = if ccw { Vec2::new(e.y, -e.x) } else { Vec2::new(-e.y, e.x) };
            phi.eval(outer)
        })
        .sum();
    let alpha = per / (2.0 * phi.wulff_area().sqrt() * area.sqrt());
    let threshold = 2.0 * ((alpha * alpha + 1.0).sqrt() + alpha).powi(2) * area;
    Ok(SingleWulff { holds: m > threshold, alpha, threshold, degenerate: false })
}

/// Per-set checks across a family of half-planes.
pub fn check_family(e: &GridSet, family: &[HalfSpace], band: f64) -> Result<Vec<ReflectionCheck>> {
    family.iter().map(|h| check_star_h_strict(e, h, band)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionReport {
    pub step: usize,
    pub family: Vec<ReflectionCheck>,
}

impl ReflectionReport {
    pub fn max_violation(&self) -> f64 {
        self.family.iter().map(|c| c.violation).fold(0.0, f64::max)
    }

    pub fn holds(&self) -> bool {
        self.family.iter().all(|c| c.holds)
    }
}

/// Violations for each snapshot of a trace.
pub fn monitor_reflection(snapshots: &[(usize, GridSet)], family: &[HalfSpace]) -> Result<Vec<ReflectionReport>> {
    snapshots
        .iter()
        .map(|(step, set)| {
            let band = STRICT_BAND_CELLS * set.spec().dx;
            Ok(ReflectionReport { step: *step, family: check_family(set, family, band)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rectangle, regular_polygon};
    use crate::grid::rasterize;

    fn spec() -> GridSpec {
        GridSpec::centered(1.0, 1.0 / 64.0).unwrap()
    }

    fn disk(c: Vec2, r: f64) -> GridSet {
        rasterize(&[regular_polygon(c, r, 256, 0.0)], spec()).unwrap()
    }

    #[test]
    fn aligned_reflection_is_exact_mirror() {
        let e = disk(Vec2::new(0.3, 0.1), 0.25);
        let h = HalfSpace::new(Vec2::new(1.0, 0.0), 0.0).unwrap();
        assert!(h.is_aligned(e.spec()));
        let r = reflect(&e, &h).unwrap();
        let s = e.spec();
        for j in 0..s.ny {
            for i in 0..s.nx {
                assert_eq!(r.get(i, j), e.get(s.nx - 1 - i, j));
            }
        }
        assert_eq!(reflect(&r, &h).unwrap(), e);
    }

    #[test]
    fn diagonal_reflection_swaps_axes() {
        let e = rasterize(&[rectangle(Vec2::new(0.1, -0.3), Vec2::new(0.5, 0.2))], spec()).unwrap();
        let h = HalfSpace::new(Vec2::new(1.0, -1.0), 0.0).unwrap();
        assert!(h.is_aligned(e.spec()));
        let r = reflect(&e, &h).unwrap();
        assert_eq!(r.count(), e.count());
        assert_eq!(reflect(&r, &h).unwrap(), e);
    }

    #[test]
    fn disk_on_the_boundary_is_symmetric() {
        let e = disk(Vec2::ZERO, 0.4);
        let h = HalfSpace::new(Vec2::new(0.0, 1.0), 0.0).unwrap();
        assert!(reflect(&e, &h).unwrap().sym_diff_count(&e).unwrap() <= 2 * (0.4 * 2.0 * 64.0) as usize);
        let c = check_star_h(&e, &h).unwrap();
        assert_eq!(c.violation, 0.0);
    }

    #[test]
    fn violation_areas() {
        let h = HalfSpace::new(Vec2::new(1.0, 0.0), 0.0).unwrap();
        let inside = disk(Vec2::new(-0.5, 0.0), 0.2);
        assert_eq!(check_star_h(&inside, &h).unwrap().violation, 0.0);
        let far = disk(Vec2::new(0.5, 0.0), 0.2);
        let c = check_star_h(&far, &h).unwrap();
        assert_eq!(c.violation, far.area());
        assert!(!c.holds);
    }

    #[test]
    fn strict_property() {
        let h = HalfSpace::new(Vec2::new(1.0, 0.0), 0.0).unwrap();
        // bigger disk on the H side, smaller mirror image sits strictly inside it
        let e = disk(Vec2::new(-0.3, 0.0), 0.4).union(&disk(Vec2::new(0.3, 0.0), 0.2)).unwrap();
        let c = check_star_h_strict(&e, &h, 3.0 / 64.0).unwrap();
        assert!(c.holds && c.strict == Some(true), "{c:?}");
        // two disjoint mirror disks share their boundaries after reflection
        let lens = disk(Vec2::new(-0.4, 0.0), 0.25).union(&disk(Vec2::new(0.4, 0.0), 0.25)).unwrap();
        let c = check_star_h_strict(&lens, &h, 3.0 / 64.0).unwrap();
        assert!(c.holds && c.strict == Some(false), "{c:?}");
        let away = disk(Vec2::new(-0.5, 0.0), 0.2);
        assert_eq!(check_star_h_strict(&away, &h, 3.0 / 64.0).unwrap().strict, Some(true));
    }

    #[test]
    fn root_systems() {
        let q4 = root_system(2).unwrap();
        assert_eq!(q4.len(), 4);
        assert!((q4.dirs[1] - Vec2::new(0.0, 1.0)).norm() < 1e-12);
        for m in 1..=6 {
            assert!(root_system(m).unwrap().is_root_system(1e-12));
        }
        let broken = DirectionSet::new(vec![Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0), Vec2::new(1.0, 1.0)]).unwrap();
        assert!(!broken.is_root_system(1e-9));
    }

    #[test]
    fn tight_families() {
        let sq = rectangle(Vec2::new(-0.5, -0.5), Vec2::new(0.5, 0.5));
        for hs in halfspace_family(&sq, &root_system(2).unwrap()).unwrap() {
            assert!((hs.s - 0.5).abs() < 1e-12);
        }
        for hs in halfspace_family(&[Vec2::ZERO], &root_system(3).unwrap()).unwrap() {
            assert_eq!(hs.s, 0.0);
        }
        let hex = regular_polygon(Vec2::ZERO, 1.0, 6, 0.0);
        let apothem = (PI / 6.0).cos();
        let dirs = DirectionSet::new((0..6).map(|i| Vec2::from_angle(PI / 6.0 + PI * i as f64 / 3.0)).collect()).unwrap();
        for hs in halfspace_family(&hex, &dirs).unwrap() {
            assert!((hs.s - apothem).abs() < 1e-12);
        }
    }

    #[test]
    fn minkowski_sum_areas() {
        let e = AnisoNorm::euclidean();
        let p = containment_bound(&[Vec2::ZERO], PI, &e).unwrap();
        assert!((signed_area(&p) - PI).abs() < 1e-3);
        let sq = rectangle(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
        let p = containment_bound(&sq, PI, &e).unwrap();
        assert!((signed_area(&p) - (1.0 + 4.0 + PI)).abs() < 1e-3);
    }

    #[test]
    fn single_wulff_square_example() {
        let e = AnisoNorm::euclidean();
        let sq = rectangle(Vec2::new(0.0, 0.0), Vec2::new(0.5, 0.5));
        let c = single_wulff_criterion(&sq, &e, 4.0).unwrap();
        let alpha = 2.0 / PI.sqrt();
        assert!((c.alpha - alpha).abs() < 1e-12);
        let t = 2.0 * ((alpha * alpha + 1.0).sqrt() + alpha).powi(2) * 0.25;
        assert!((c.threshold - t).abs() < 1e-12);
        assert!(c.holds);
        assert!(!single_wulff_criterion(&sq, &e, c.threshold / 2.0).unwrap().holds);
        let big: Polygon = sq.iter().map(|&p| p * 3.0).collect();
        let c9 = single_wulff_criterion(&big, &e, 36.0).unwrap();
        assert!((c9.threshold / c.threshold - 9.0).abs() < 1e-9);
        assert!(c9.holds);
        let pt = single_wulff_criterion(&[Vec2::ZERO], &e, 1.0).unwrap();
        assert!(pt.degenerate && pt.holds && pt.alpha.is_infinite());
    }
}
