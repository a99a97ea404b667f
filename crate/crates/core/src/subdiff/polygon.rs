//! Convex polygons in V₁ built by half-plane clipping.

use serde::Serialize;

use crate::hgroup::HVector;

/// Vertices closer than this collapse into one.
pub const VERTEX_MERGE_TOL: f64 = 1e-9;
/// Polygons with smaller area are reported as a segment or a point.
pub const AREA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Point,
    Segment,
    Polygon,
}

/// Closed half-plane `{p : ⟨normal, p⟩ ≤ offset}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: HVector,
    pub offset: f64,
}

/// A convex subset of V₁: a counterclockwise polygon, a segment (two
/// vertices) or a point (one vertex).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexSet {
    pub shape: Shape,
    pub vertices: Vec<HVector>,
    pub area: f64,
    pub diameter: f64,
}

/// Sutherland–Hodgman step: keeps the part of `poly` inside `h` (with
/// `slack` added to the offset).
fn clip(poly: &[HVector], h: HalfPlane, slack: f64) -> Vec<HVector> {
    let side = |p: HVector| h.normal.dot(p) - h.offset - slack;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (sa, sb) = (side(a), side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let s = sa / (sa - sb);
            out.push(a + (b - a).scale(s));
        }
    }
    out
}

/// Intersects `planes` with the square `[-half, half]²`. Returns `None` when
/// the intersection is empty. Sets thinner than `max(4·slack,`
/// [`VERTEX_MERGE_TOL`]`)` are classified as segments or points.
pub fn intersect_half_planes(planes: &[HalfPlane], half: f64, slack: f64) -> Option<ConvexSet> {
    let mut c = Clipper::new(half, slack);
    planes.iter().all(|&h| c.add(h)).then(|| c.set())
}

/// Incremental clipping of the square `[-half, half]²`.
#[derive(Debug, Clone)]
pub struct Clipper {
    poly: Vec<HVector>,
    slack: f64,
}

impl Clipper {
    pub fn new(half: f64, slack: f64) -> Clipper {
        let poly = vec![
            HVector::new(-half, -half),
            HVector::new(half, -half),
            HVector::new(half, half),
            HVector::new(-half, half),
        ];
        Clipper { poly, slack }
    }

    /// Clips by one more half-plane; false once the intersection is empty.
    pub fn add(&mut self, h: HalfPlane) -> bool {
        if !self.poly.is_empty() {
            self.poly = clip(&self.poly, h, self.slack);
        }
        !self.poly.is_empty()
    }

    /// Current intersection, classified with tolerance `max(4·slack, 1e-9)`.
    pub fn set(&self) -> ConvexSet {
        ConvexSet::classify(self.poly.clone(), (4.0 * self.slack).max(VERTEX_MERGE_TOL))
    }
}

fn signed_area(poly: &[HVector]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>()
}

fn farthest_pair(pts: &[HVector]) -> (usize, usize, f64) {
    let n = pts.len();
    let mut best = (0, 0, 0.0);
    let mut consider = |i: usize, j: usize| {
        let d = (pts[i] - pts[j]).norm();
        if d > best.2 {
            best = (i.min(j), i.max(j), d);
        }
    };
    if n <= 64 {
        for i in 0..n {
            for j in i + 1..n {
                consider(i, j);
            }
        }
        return best;
    }
    // rotating calipers; pts is a convex ccw loop
    let area = |i: usize, j: usize, k: usize| (pts[j] - pts[i]).cross(pts[k] - pts[i]).abs();
    let mut j = 1;
    for i in 0..n {
        let i1 = (i + 1) % n;
        while area(i, i1, (j + 1) % n) > area(i, i1, j) {
            j = (j + 1) % n;
        }
        consider(i, j);
        consider(i1, j);
    }
    best
}

impl ConvexSet {
    /// Classifies a counterclockwise vertex loop, merging near-duplicate
    /// vertices. Thin polygons (area below [`AREA_TOL`] or width below
    /// [`VERTEX_MERGE_TOL`]) become segments; tiny ones become points.
    pub fn from_ccw(poly: Vec<HVector>) -> ConvexSet {
        Self::classify(poly, VERTEX_MERGE_TOL)
    }

    /// [`ConvexSet::from_ccw`] with merge and width tolerance `tol`.
    pub fn classify(poly: Vec<HVector>, tol: f64) -> ConvexSet {
        let mut verts: Vec<HVector> = Vec::with_capacity(poly.len());
        for p in poly {
            if verts.last().is_none_or(|&q| (p - q).norm() > tol) {
                verts.push(p);
            }
        }
        while verts.len() > 1 && (verts[0] - *verts.last().unwrap()).norm() <= tol {
            verts.pop();
        }
        let area = signed_area(&verts).abs();
        let (i, j, diameter) = farthest_pair(&verts);
        if diameter <= tol {
            let n = verts.len().max(1) as f64;
            let c = verts.iter().fold(HVector::ZERO, |acc, &v| acc + v).scale(1.0 / n);
            return ConvexSet {
                shape: Shape::Point,
                vertices: vec![c],
                area: 0.0,
                diameter,
            };
        }
        if area < AREA_TOL || area / diameter < tol {
            return ConvexSet {
                shape: Shape::Segment,
                vertices: vec![verts[i], verts[j]],
                area,
                diameter,
            };
        }
        ConvexSet {
            shape: Shape::Polygon,
            vertices: verts,
            area,
            diameter,
        }
    }

    /// Support function `max_{p ∈ set} ⟨p, dir⟩`.
    pub fn support(&self, dir: HVector) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(dir))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn centroid(&self) -> HVector {
        let n = self.vertices.len() as f64;
        self.vertices
            .iter()
            .fold(HVector::ZERO, |acc, &v| acc + v)
            .scale(1.0 / n)
    }

    pub fn max_norm(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Convexity of the vertex loop (all turns left, within tolerance).
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return true;
        }
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) >= -1e-12 * (1.0 + self.diameter * self.diameter)
        })
    }

    /// Vertices sorted by polar angle around the centroid.
    pub fn theta_sorted(&self) -> Vec<(f64, HVector)> {
        let c = self.centroid();
        let mut out: Vec<(f64, HVector)> = self
            .vertices
            .iter()
            .map(|&v| {
                let d = v - c;
                (d.b.atan2(d.a), v)
            })
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}
