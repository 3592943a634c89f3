//! Named initial-shape generators.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::anisotropy::{AnisoNorm, NormSpec};
use crate::contour::normal_graph;
use crate::error::{Error, Result};
use crate::geometry::{rectangle, regular_polygon, Polygon, Vec2};
use crate::grid::{rasterize, GridSet, GridSpec};

const CURVE_SAMPLES: usize = 1024;

/// Random-phase normal perturbation `f(θ) = Σ_k amplitude·cos(kθ + φ_k)` of a Wulff shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub amplitude: f64,
    pub modes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeConfig {
    /// Wulff shape of the given area; `norm` defaults to the flow's `φ`.
    Wulff {
        #[serde(default)]
        center: [f64; 2],
        area: f64,
        #[serde(default)]
        norm: Option<NormSpec>,
        #[serde(default)]
        perturbation: Option<Perturbation>,
    },
    Ellipse {
        #[serde(default)]
        center: [f64; 2],
        a: f64,
        b: f64,
        #[serde(default)]
        rotation: f64,
    },
    /// Two lobes centered at `(±separation/2, 0) + center` joined by a horizontal bar
    /// of width `neck`. Lobes are disks of radius `size`, or squares of side `size`.
    Dumbbell {
        #[serde(default)]
        center: [f64; 2],
        size: f64,
        separation: f64,
        neck: f64,
        #[serde(default)]
        square: bool,
        /// Scales the right lobe, for asymmetric variants.
        #[serde(default = "one")]
        right_scale: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Union {
        shapes: Vec<ShapeConfig>,
    },
}

fn one() -> f64 {
    1.0
}

fn v(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

impl ShapeConfig {
    /// Rasterizes onto `spec`; `phi` is the flow's surface-tension norm.
    pub fn build(&self, spec: GridSpec, phi: &AnisoNorm, seed: u64) -> Result<GridSet> {
        match self {
            ShapeConfig::Union { shapes } => {
                if shapes.is_empty() {
                    return Err(Error::InvalidArgument("union of no shapes".into()));
                }
                let mut acc = GridSet::empty(spec);
                for (k, s) in shapes.iter().enumerate() {
                    acc = acc.union(&s.build(spec, phi, seed.wrapping_add(k as u64))?)?;
                }
                Ok(acc)
            }
            ShapeConfig::Dumbbell { center, size, separation, neck, square, right_scale } => {
                if !(*size > 0.0 && *separation > 0.0 && *neck >= 0.0 && *right_scale > 0.0) {
                    return Err(Error::InvalidArgument("dumbbell sizes must be positive".into()));
                }
                let c = v(*center);
                let (l, r) = (c - Vec2::new(separation / 2.0, 0.0), c + Vec2::new(separation / 2.0, 0.0));
                let lobe = |at: Vec2, s: f64| {
                    if *square {
                        rectangle(at - Vec2::new(s / 2.0, s / 2.0), at + Vec2::new(s / 2.0, s / 2.0))
                    } else {
                        regular_polygon(at, s, CURVE_SAMPLES, 0.0)
                    }
                };
                let mut set = rasterize(&[lobe(l, *size)], spec)?.union(&rasterize(&[lobe(r, size * right_scale)], spec)?)?;
                if *neck > 0.0 {
                    let bar = rectangle(l - Vec2::new(0.0, neck / 2.0), r + Vec2::new(0.0, neck / 2.0));
                    set = set.union(&rasterize(&[bar], spec)?)?;
                }
                Ok(set)
            }
            other => rasterize(&[other.polygon(phi, seed)?], spec),
        }
    }

    /// Outline of a single-polygon shape.
    pub fn polygon(&self, phi: &AnisoNorm, seed: u64) -> Result<Polygon> {
        match self {
            ShapeConfig::Wulff { center, area, norm, perturbation } => {
                if !(*area > 0.0) {
                    return Err(Error::InvalidArgument("Wulff area must be positive".into()));
                }
                let own;
                let phi = match norm {
                    Some(spec) => {
                        own = AnisoNorm::from_spec(spec)?;
                        &own
                    }
                    None => phi,
                };
                let r = (area / phi.wulff_area()).sqrt();
                let mut f = vec![0.0; CURVE_SAMPLES];
                if let Some(p) = perturbation {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    for &k in &p.modes {
                        let phase = rng.gen_range(0.0..2.0 * PI);
                        for (i, fi) in f.iter_mut().enumerate() {
                            let th = 2.0 * PI * i as f64 / CURVE_SAMPLES as f64;
                            *fi += p.amplitude * (k as f64 * th + phase).cos();
                        }
                    }
                }
                Ok(normal_graph(&f, phi, v(*center), r))
            }
            ShapeConfig::Ellipse { center, a, b, rotation } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return Err(Error::InvalidArgument("ellipse semi-axes must be positive".into()));
                }
                Ok((0..CURVE_SAMPLES)
                    .map(|i| {
                        let t = 2.0 * PI * i as f64 / CURVE_SAMPLES as f64;
                        v(*center) + Vec2::new(a * t.cos(), b * t.sin()).rotate(*rotation)
                    })
                    .collect())
            }
            ShapeConfig::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidArgument("polygon needs at least 3 vertices".into()));
                }
                Ok(vertices.iter().map(|&p| v(p)).collect())
            }
            _ => Err(Error::InvalidArgument("shape is not a single polygon".into())),
        }
    }
}
