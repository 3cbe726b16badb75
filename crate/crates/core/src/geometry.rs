//! Stochastic UAV deployment and CoMP-set geometry.
//!
//! UAVs are dropped by a marked Poisson point process on a disk (planar
//! position plus a height mark), the CoMP set of a user is the four
//! horizontally-nearest UAVs, and the Delaunay triangulation of the planar
//! projections supplies formation targets.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

// in test builds std's inherent float methods shadow this trait
#[cfg_attr(test, allow(unused_imports))]
use crate::math::{FloatExt, PI};
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryError {
    /// Fewer UAVs than an operation needs.
    InsufficientDeployment { needed: usize, got: usize },
    /// Degenerate point set (too few points, collinear, empty triangulation).
    DegenerateInput(String),
    /// Invalid configuration values.
    Config(String),
}

impl core::fmt::Display for GeometryError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GeometryError::InsufficientDeployment { needed, got } => {
                write!(f, "insufficient deployment: need {needed} UAVs, have {got}")
            }
            GeometryError::DegenerateInput(m) => write!(f, "degenerate input: {m}"),
            GeometryError::Config(m) => write!(f, "config error: {m}"),
        }
    }
}

impl core::error::Error for GeometryError {}

/// Height mark distribution of the deployment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HeightLaw {
    Uniform { min: f64, max: f64 },
    Fixed(f64),
}

impl HeightLaw {
    /// 3GPP-style default envelope, 50 m to 300 m.
    pub const DEFAULT: HeightLaw = HeightLaw::Uniform { min: 50.0, max: 300.0 };

    pub fn validate(&self) -> Result<(), GeometryError> {
        match *self {
            HeightLaw::Uniform { min, max } => {
                if !(min > 0.0 && max >= min) {
                    Err(GeometryError::Config(format!(
                        "height law wants 0 < H_min <= H_max, got [{min}, {max}]"
                    )))
                } else {
                    Ok(())
                }
            }
            HeightLaw::Fixed(h) => {
                if h > 0.0 {
                    Ok(())
                } else {
                    Err(GeometryError::Config(format!("fixed height must be positive, got {h}")))
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            HeightLaw::Uniform { min, max } => rng.uniform_in(min, max),
            HeightLaw::Fixed(h) => h,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            HeightLaw::Uniform { min, max } => (min, max),
            HeightLaw::Fixed(h) => (h, h),
        }
    }
}

/// One realization of the marked PPP: planar positions plus heights.
#[derive(Clone, Debug)]
pub struct Deployment {
    pub planar: Vec<(f64, f64)>,
    pub heights: Vec<f64>,
    pub region_radius: f64,
    pub density: f64,
    pub height_law: HeightLaw,
    pub seed: u64,
}

impl Deployment {
    /// Samples a deployment: Poisson count, i.i.d. uniform positions on the
    /// disk, independent height marks. Deterministic per seed.
    pub fn sample(
        density: f64,
        region_radius: f64,
        height_law: HeightLaw,
        seed: u64,
    ) -> Result<Self, GeometryError> {
        if density < 0.0 || region_radius <= 0.0 {
            return Err(GeometryError::Config(format!(
                "density {density} must be non-negative and radius {region_radius} positive"
            )));
        }
        height_law.validate()?;
        let mut rng = Rng::from_seed(seed);
        let planar = sample_ppp(density, region_radius, &mut rng);
        let heights = sample_heights(planar.len(), height_law, &mut rng);
        Ok(Self { planar, heights, region_radius, density, height_law, seed })
    }

    pub fn len(&self) -> usize {
        self.planar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planar.is_empty()
    }

    /// 3D position of UAV `i`.
    pub fn position(&self, i: usize) -> (f64, f64, f64) {
        let (x, y) = self.planar[i];
        (x, y, self.heights[i])
    }

    /// 3D distance from UAV `i` to the ground location `(x, y, 0)`.
    pub fn distance_3d(&self, i: usize, ue: (f64, f64)) -> f64 {
        let (x, y) = self.planar[i];
        let dx = x - ue.0;
        let dy = y - ue.1;
        (dx * dx + dy * dy + self.heights[i] * self.heights[i]).sqrt()
    }
}

/// Poisson point process on the disk of `region_radius` about the origin.
pub fn sample_ppp(density: f64, region_radius: f64, rng: &mut Rng) -> Vec<(f64, f64)> {
    let mean = density * PI * region_radius * region_radius;
    let n = rng.poisson(mean);
    let mut pts = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let r = region_radius * rng.uniform().sqrt();
        let theta = 2.0 * PI * rng.uniform();
        pts.push((r * theta.cos(), r * theta.sin()));
    }
    pts
}

/// `n` height marks from the given law.
pub fn sample_heights(n: usize, law: HeightLaw, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| law.sample(rng)).collect()
}

/// Distance sense used for serving-set selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceMetric {
    /// Planar projection distance (the model's default).
    Horizontal,
    /// Full 3D distance, for sensitivity checks.
    ThreeD,
}

/// The four serving UAVs of a UE, with their horizontal distances sorted
/// ascending; `horiz_distances[3]` bounds the distance of every non-member.
#[derive(Clone, Debug, PartialEq)]
pub struct CompSet {
    pub uav_indices: [usize; 4],
    pub horiz_distances: [f64; 4],
}

/// Selects the CoMP set by horizontal distance; ties broken by lower index.
pub fn select_comp_set(dep: &Deployment, ue: (f64, f64)) -> Result<CompSet, GeometryError> {
    select_comp_set_with(dep, ue, DistanceMetric::Horizontal)
}

pub fn select_comp_set_with(
    dep: &Deployment,
    ue: (f64, f64),
    metric: DistanceMetric,
) -> Result<CompSet, GeometryError> {
    if dep.len() < 4 {
        return Err(GeometryError::InsufficientDeployment { needed: 4, got: dep.len() });
    }
    // top-4 scan on (distance, index); the lexicographic order makes the
    // lower index win ties deterministically
    let mut best: [(f64, usize); 4] = [(f64::INFINITY, usize::MAX); 4];
    for i in 0..dep.len() {
        let d = match metric {
            DistanceMetric::Horizontal => {
                let (x, y) = dep.planar[i];
                (x - ue.0).hypot(y - ue.1)
            }
            DistanceMetric::ThreeD => dep.distance_3d(i, ue),
        };
        let cand = (d, i);
        if cand < best[3] {
            best[3] = cand;
            let mut k = 3;
            while k > 0 && best[k] < best[k - 1] {
                best.swap(k, k - 1);
                k -= 1;
            }
        }
    }
    let mut pairs: [(f64, usize); 4] = [(0.0, 0); 4];
    for (k, &(_, i)) in best.iter().enumerate() {
        let (x, y) = dep.planar[i];
        pairs[k] = ((x - ue.0).hypot(y - ue.1), i);
    }
    if metric == DistanceMetric::ThreeD {
        // re-sort by horizontal distance to keep the type invariant
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    Ok(CompSet {
        uav_indices: [pairs[0].1, pairs[1].1, pairs[2].1, pairs[3].1],
        horiz_distances: [pairs[0].0, pairs[1].0, pairs[2].0, pairs[3].0],
    })
}

/// Planar Delaunay triangulation; `triangles` index into `vertices`.
#[derive(Clone, Debug)]
pub struct Triangulation {
    pub vertices: Vec<(f64, f64)>,
    pub triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    /// Number of hull edges (edges bounding exactly one triangle).
    pub fn hull_size(&self) -> usize {
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(self.triangles.len() * 3);
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        let mut hull = 0;
        let mut i = 0;
        while i < edges.len() {
            let mut j = i + 1;
            while j < edges.len() && edges[j] == edges[i] {
                j += 1;
            }
            if j - i == 1 {
                hull += 1;
            }
            i = j;
        }
        hull
    }
}

// ---- in-circle predicate with a double-double fallback --------------------

/// Unevaluated double-double sum.
#[derive(Clone, Copy)]
struct Dd(f64, f64);

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd(s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd(p, libm::fma(a, b, -p))
}

impl Dd {
    #[inline]
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.0, o.0);
        let lo = s.1 + self.1 + o.1;
        let t = two_sum(s.0, lo);
        Dd(t.0, t.1)
    }

    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self.add(Dd(-o.0, -o.1))
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.0, o.0);
        let lo = p.1 + self.0 * o.1 + self.1 * o.0;
        let t = two_sum(p.0, lo);
        Dd(t.0, t.1)
    }

    #[inline]
    fn value(self) -> f64 {
        self.0 + self.1
    }
}

/// In-circle determinant: positive when `d` lies strictly inside the
/// circumcircle of counterclockwise (a, b, c). Falls back to double-double
/// arithmetic when the fast value sits inside its rounding envelope.
fn incircle_det(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> f64 {
    let adx = a.0 - d.0;
    let ady = a.1 - d.1;
    let bdx = b.0 - d.0;
    let bdy = b.1 - d.1;
    let cdx = c.0 - d.0;
    let cdy = c.1 - d.1;

    let ad2 = adx * adx + ady * ady;
    let bd2 = bdx * bdx + bdy * bdy;
    let cd2 = cdx * cdx + cdy * cdy;

    let det = adx * (bdy * cd2 - bd2 * cdy) - ady * (bdx * cd2 - bd2 * cdx)
        + ad2 * (bdx * cdy - bdy * cdx);

    let mag = adx.abs().max(ady.abs()).max(bdx.abs()).max(bdy.abs()).max(cdx.abs()).max(cdy.abs());
    let bound = 1e-11 * mag * mag * mag * mag;
    if det.abs() > bound {
        return det;
    }
    incircle_det_dd(adx, ady, bdx, bdy, cdx, cdy)
}

fn incircle_det_dd(adx: f64, ady: f64, bdx: f64, bdy: f64, cdx: f64, cdy: f64) -> f64 {
    let sq = |x: f64, y: f64| two_prod(x, x).add(two_prod(y, y));
    let (ad2, bd2, cd2) = (sq(adx, ady), sq(bdx, bdy), sq(cdx, cdy));
    let (adx, ady) = (Dd(adx, 0.0), Dd(ady, 0.0));
    let (bdx, bdy) = (Dd(bdx, 0.0), Dd(bdy, 0.0));
    let (cdx, cdy) = (Dd(cdx, 0.0), Dd(cdy, 0.0));

    let minor_a = bdy.mul(cd2).sub(bd2.mul(cdy));
    let minor_b = bdx.mul(cd2).sub(bd2.mul(cdx));
    let minor_c = bdx.mul(cdy).sub(bdy.mul(cdx));

    adx.mul(minor_a).sub(ady.mul(minor_b)).add(ad2.mul(minor_c)).value()
}

fn orient2d(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let det = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let mag =
        (b.0 - a.0).abs().max((b.1 - a.1).abs()).max((c.0 - a.0).abs()).max((c.1 - a.1).abs());
    let bound = 1e-12 * mag * mag;
    if det.abs() > bound {
        return det;
    }
    two_prod(b.0 - a.0, c.1 - a.1).sub(two_prod(b.1 - a.1, c.0 - a.0)).value()
}

/// Incremental Bowyer-Watson triangulation seeded with a super-triangle.
pub fn delaunay(points: &[(f64, f64)]) -> Result<Triangulation, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::DegenerateInput(format!(
            "triangulation needs >= 3 points, got {}",
            points.len()
        )));
    }
    let (mut min_x, mut min_y, mut max_x, mut max_y) =
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        if !(x.is_finite() && y.is_finite()) {
            return Err(GeometryError::DegenerateInput(String::from("non-finite coordinate")));
        }
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    let span = (max_x - min_x).max(max_y - min_y).max(1.0);
    let cx = 0.5 * (min_x + max_x);
    let cy = 0.5 * (min_y + max_y);

    let n = points.len();
    let mut verts: Vec<(f64, f64)> = points.to_vec();
    verts.push((cx - 40.0 * span, cy - 20.0 * span));
    verts.push((cx + 40.0 * span, cy - 20.0 * span));
    verts.push((cx, cy + 40.0 * span));

    let mut tris: Vec<[usize; 3]> = Vec::with_capacity(2 * n);
    tris.push([n, n + 1, n + 2]);

    let mut bad: Vec<usize> = Vec::new();
    let mut cavity: Vec<(usize, usize)> = Vec::new();
    for p in 0..n {
        let pt = verts[p];
        bad.clear();
        for (ti, t) in tris.iter().enumerate() {
            let (a, b, c) = (verts[t[0]], verts[t[1]], verts[t[2]]);
            let inside = if orient2d(a, b, c) > 0.0 {
                incircle_det(a, b, c, pt) > 0.0
            } else {
                incircle_det(a, c, b, pt) > 0.0
            };
            if inside {
                bad.push(ti);
            }
        }
        cavity.clear();
        for &ti in &bad {
            let t = tris[ti];
            for k in 0..3 {
                let e = (t[k], t[(k + 1) % 3]);
                let key = (e.0.min(e.1), e.0.max(e.1));
                // an edge seen twice is interior to the cavity and drops out
                if let Some(pos) = cavity.iter().position(|&(x, y)| (x.min(y), x.max(y)) == key) {
                    cavity.swap_remove(pos);
                } else {
                    cavity.push(e);
                }
            }
        }
        // remove in descending index order so swap_remove stays valid
        for &ti in bad.iter().rev() {
            tris.swap_remove(ti);
        }
        for &(a, b) in &cavity {
            if orient2d(verts[a], verts[b], pt) > 0.0 {
                tris.push([a, b, p]);
            } else {
                tris.push([b, a, p]);
            }
        }
    }

    tris.retain(|t| t.iter().all(|&v| v < n));
    if tris.is_empty() {
        return Err(GeometryError::DegenerateInput(String::from(
            "all points collinear, no triangulation exists",
        )));
    }
    Ok(Triangulation { vertices: points.to_vec(), triangles: tris })
}

/// Picks one Delaunay cell uniformly at random and lifts it to four target
/// positions: the three vertices keep their deployment heights and the cell
/// centroid gets an independently sampled height. This is the rule used to
/// turn a planar cell into a tetrahedral formation.
pub fn formation_target(
    dep: &Deployment,
    tri: &Triangulation,
    rng: &mut Rng,
) -> Result<[(f64, f64, f64); 4], GeometryError> {
    if tri.triangles.is_empty() {
        return Err(GeometryError::DegenerateInput(String::from("empty triangulation")));
    }
    let pick = ((rng.uniform() * tri.triangles.len() as f64) as usize).min(tri.triangles.len() - 1);
    let t = tri.triangles[pick];
    let mut out = [(0.0, 0.0, 0.0); 4];
    for k in 0..3 {
        let (x, y) = tri.vertices[t[k]];
        let h = dep.heights.get(t[k]).copied().unwrap_or_else(|| dep.height_law.bounds().0);
        out[k] = (x, y, h);
    }
    let cx = (out[0].0 + out[1].0 + out[2].0) / 3.0;
    let cy = (out[0].1 + out[1].1 + out[2].1) / 3.0;
    out[3] = (cx, cy, dep.height_law.sample(rng));
    Ok(out)
}

/// Brute-force O(T·N) empty-circumcircle audit. Returns the worst in-circle
/// determinant violation normalized by the squared bounding-box diagonal.
pub fn circumcircle_violation(tri: &Triangulation) -> f64 {
    let (mut min_x, mut min_y, mut max_x, mut max_y) =
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &tri.vertices {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    let dx = max_x - min_x;
    let dy = max_y - min_y;
    let diag2 = (dx * dx + dy * dy).max(f64::MIN_POSITIVE);

    let mut worst = 0.0f64;
    for t in &tri.triangles {
        let (a, b, c) = (tri.vertices[t[0]], tri.vertices[t[1]], tri.vertices[t[2]]);
        let ccw = orient2d(a, b, c) > 0.0;
        for (v, &q) in tri.vertices.iter().enumerate() {
            if t.contains(&v) {
                continue;
            }
            let det = if ccw { incircle_det(a, b, c, q) } else { incircle_det(a, c, b, q) };
            if det > 0.0 {
                worst = worst.max(det / diag2);
            }
        }
    }
    worst
}
