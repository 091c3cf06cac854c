use std::f64::consts::PI;

use super::Vec3;
use crate::error::{Result, UbvpError};

/// Closed triangle mesh, oriented so that vertex order is counter-clockwise
/// seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    centroid: Vec3,
}

impl TriangleMesh {
    /// Validates indices, fixes the global orientation from the signed
    /// volume and rejects meshes that are not star-shaped with respect to
    /// their volume centroid.
    pub fn new(vertices: Vec<Vec3>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.len() < 4 {
            return Err(UbvpError::invalid("a closed mesh needs at least 4 triangles"));
        }
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(UbvpError::invalid(format!("triangle {k} references a missing vertex")));
            }
            let [a, b, c] = t.map(|i| vertices[i]);
            if (b - a).cross(&(c - a)).norm() <= 1e-14 * (b - a).norm_squared().max(1e-300) {
                return Err(UbvpError::invalid(format!("triangle {k} is degenerate")));
            }
        }
        let mut volume = 0.0;
        let mut moment = Vec3::zeros();
        for t in &triangles {
            let [a, b, c] = t.map(|i| vertices[i]);
            let v = a.dot(&b.cross(&c)) / 6.0;
            volume += v;
            moment += v * (a + b + c) / 4.0;
        }
        if volume.abs() < 1e-300 {
            return Err(UbvpError::invalid("mesh encloses no volume"));
        }
        if volume < 0.0 {
            for t in &mut triangles {
                t.swap(1, 2);
            }
        }
        let centroid = moment / volume;
        for (k, t) in triangles.iter().enumerate() {
            let [a, b, c] = t.map(|i| vertices[i]);
            let n = (b - a).cross(&(c - a));
            if ((a + b + c) / 3.0 - centroid).dot(&n) <= 0.0 {
                return Err(UbvpError::invalid(format!(
                    "mesh is not star-shaped with respect to its centroid (triangle {k})"
                )));
            }
        }
        Ok(TriangleMesh { vertices, triangles, centroid })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, k: usize) -> [Vec3; 3] {
        self.triangles[k].map(|i| self.vertices[i])
    }

    pub fn centroid(&self) -> Vec3 {
        self.centroid
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    /// One node per triangle: centroid, area weight, unit normal.
    pub(crate) fn centroid_rule(&self) -> Result<(Vec<Vec3>, Vec<f64>, Vec<Vec3>)> {
        let mut nodes = Vec::with_capacity(self.triangles.len());
        let mut weights = Vec::with_capacity(self.triangles.len());
        let mut normals = Vec::with_capacity(self.triangles.len());
        for k in 0..self.triangles.len() {
            let [a, b, c] = self.triangle(k);
            let n = (b - a).cross(&(c - a));
            let area = 0.5 * n.norm();
            nodes.push((a + b + c) / 3.0);
            weights.push(area);
            normals.push(n / (2.0 * area));
        }
        Ok((nodes, weights, normals))
    }

    /// Generalized winding number: 1 inside, 0 outside.
    pub fn winding_number(&self, p: &Vec3) -> f64 {
        let mut omega = 0.0;
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i] - p);
            let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
            let num = a.dot(&b.cross(&c));
            let den = la * lb * lc + a.dot(&b) * lc + a.dot(&c) * lb + b.dot(&c) * la;
            omega += 2.0 * num.atan2(den);
        }
        omega / (4.0 * PI)
    }

    pub fn distance_to(&self, p: &Vec3) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                (p - closest_point_on_triangle(p, &a, &b, &c)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Closest point of triangle `abc` to `p` (Voronoi-region walk).
fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// `∫_T dA_y / |p - y|` for a point `p` in the plane of the flat
/// triangle `T` (vertices counter-clockwise about the normal).
pub fn flat_triangle_inverse_distance(p: &Vec3, tri: &[Vec3; 3]) -> f64 {
    flat_polygon_inverse_distance(p, tri)
}

/// Same integral over a flat convex polygon, summed edge by edge in polar
/// coordinates about `p`: each edge contributes
/// `h (asinh(s_b/|h|) - asinh(s_a/|h|))` with `h` the signed distance from
/// `p` to the edge line and `s_a, s_b` the tangential endpoint offsets.
pub fn flat_polygon_inverse_distance(p: &Vec3, poly: &[Vec3]) -> f64 {
    let m = poly.len();
    let n = (poly[1] - poly[0]).cross(&(poly[2] - poly[0])).normalize();
    let mut total = 0.0;
    for k in 0..m {
        let a = poly[k];
        let b = poly[(k + 1) % m];
        let t = (b - a).normalize();
        let h = (a - p).dot(&t.cross(&n));
        if h.abs() < 1e-300 {
            continue;
        }
        let sa = (a - p).dot(&t);
        let sb = (b - p).dot(&t);
        total += h * ((sb / h.abs()).asinh() - (sa / h.abs()).asinh());
    }
    total
}

/// Parses an OFF file: `OFF` header, `nv nf ne` counts, vertex lines,
/// then `3 i j k` triangle lines. `#` starts a comment.
pub fn parse_off(text: &str) -> Result<TriangleMesh> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| UbvpError::Parse("empty OFF file".into()))?;
    let mut counts_line = header;
    if header.starts_with("OFF") {
        let rest = header.trim_start_matches("OFF").trim();
        counts_line = if rest.is_empty() {
            lines.next().ok_or_else(|| UbvpError::Parse("OFF file missing counts".into()))?
        } else {
            rest
        };
    }
    let counts: Vec<usize> = counts_line
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| UbvpError::Parse(format!("bad OFF count '{s}'"))))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(UbvpError::Parse("OFF counts line needs vertex and face counts".into()));
    }
    let (nv, nf) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    for k in 0..nv {
        let line = lines
            .next()
            .ok_or_else(|| UbvpError::Parse(format!("OFF file ends before vertex {k}")))?;
        let xs: Vec<f64> = line
            .split_whitespace()
            .take(3)
            .map(|s| s.parse().map_err(|_| UbvpError::Parse(format!("bad coordinate '{s}'"))))
            .collect::<Result<_>>()?;
        if xs.len() != 3 {
            return Err(UbvpError::Parse(format!("vertex {k} needs three coordinates")));
        }
        vertices.push(Vec3::new(xs[0], xs[1], xs[2]));
    }
    let mut triangles = Vec::with_capacity(nf);
    for k in 0..nf {
        let line = lines
            .next()
            .ok_or_else(|| UbvpError::Parse(format!("OFF file ends before face {k}")))?;
        let idx: Vec<usize> = line
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| UbvpError::Parse(format!("bad index '{s}'"))))
            .collect::<Result<_>>()?;
        if idx.len() < 4 || idx[0] != 3 {
            return Err(UbvpError::Parse(format!("face {k} is not a triangle")));
        }
        triangles.push([idx[1], idx[2], idx[3]]);
    }
    TriangleMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    const OCTAHEDRON: &str = "OFF\n# unit octahedron\n6 8 12\n1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n\
3 0 2 4\n3 2 1 4\n3 1 3 4\n3 3 0 4\n3 2 0 5\n3 1 2 5\n3 3 1 5\n3 0 3 5\n";

    #[test]
    fn parses_and_orients_octahedron() {
        let mesh = parse_off(OCTAHEDRON).unwrap();
        assert_eq!(mesh.triangles().len(), 8);
        let (nodes, weights, normals) = mesh.centroid_rule().unwrap();
        let area: f64 = weights.iter().sum();
        assert!((area - 4.0 * 3f64.sqrt()).abs() < 1e-12);
        for (x, n) in nodes.iter().zip(&normals) {
            assert!(x.dot(n) > 0.0);
        }
    }

    #[test]
    fn winding_number_classifies_points() {
        let mesh = parse_off(OCTAHEDRON).unwrap();
        assert!((mesh.winding_number(&Vec3::new(0.1, 0.1, 0.1)) - 1.0).abs() < 1e-12);
        assert!(mesh.winding_number(&Vec3::new(2.0, 0.0, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_triangles_and_open_input() {
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n").is_err());
        assert!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n").is_err());
    }

    #[test]
    fn flat_triangle_integral_matches_duffy_quadrature() {
        let tri = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.2, 0.8, 0.0)];
        for p in [(tri[0] + tri[1] + tri[2]) / 3.0, Vec3::new(0.5, 0.1, 0.0)] {
            // Oracle: split at p; on each sub-triangle (p, a, b) the Duffy map
            // y = p + s (a - p + u (b - a)) cancels the 1/r singularity, leaving
            // |(a - p) x (b - a)| / |a - p + u (b - a)|, integrated in u by a
            // composite midpoint rule.
            let m = 20000;
            let mut oracle = 0.0;
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let jac = (a - p).cross(&(b - a)).norm();
                for i in 0..m {
                    let u = (i as f64 + 0.5) / m as f64;
                    oracle += jac / (a - p + (b - a) * u).norm() / m as f64;
                }
            }
            let exact = flat_triangle_inverse_distance(&p, &tri);
            assert!((exact - oracle).abs() < 1e-8, "{exact} vs {oracle}");
        }
    }

    #[test]
    fn closest_point_distance() {
        let mesh = parse_off(OCTAHEDRON).unwrap();
        let d = mesh.distance_to(&Vec3::new(2.0, 0.0, 0.0));
        assert!((d - 1.0).abs() < 1e-12);
        let d = mesh.distance_to(&Vec3::new(1.0, 1.0, 1.0));
        assert!((d - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }
}
