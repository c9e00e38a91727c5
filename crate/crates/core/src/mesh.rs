//! Uniform right-triangle mesh of the unit square with oriented edge topology.
//!
//! Every square cell of an `N x N` grid is split along its lower-left to
//! upper-right diagonal. Triangles are stored counter-clockwise and local edge
//! `k` of a triangle is the edge opposite its local vertex `k`.
//!
//! Each edge carries a fixed unit normal `n_e`. For an interior edge the two
//! incident triangles are ordered so that `T+` has the smaller index and
//! `n_e` is the outward normal of `T+` (so it points into `T-`). For a
//! boundary edge `n_e` is the outward normal of the domain.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Interior,
    Bottom,
    Right,
    Top,
    Left,
}

impl BoundaryTag {
    pub const SIDES: [BoundaryTag; 4] = [
        BoundaryTag::Bottom,
        BoundaryTag::Right,
        BoundaryTag::Top,
        BoundaryTag::Left,
    ];

    pub fn is_boundary(self) -> bool {
        self != BoundaryTag::Interior
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    /// Cells per side.
    pub n: usize,
    pub h: f64,
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Vertex pairs, smaller index first.
    pub edges: Vec<[usize; 2]>,
    /// `(T+, Some(T-))` for interior edges, `(T, None)` on the boundary.
    pub edge_to_tri: Vec<(usize, Option<usize>)>,
    pub edge_normal: Vec<Point>,
    pub boundary_tag: Vec<BoundaryTag>,
    /// Global edge of local edge `k` (opposite local vertex `k`).
    pub tri_edges: Vec<[usize; 3]>,
}

impl Mesh {
    /// Builds the `N x N` structured triangulation of the unit square.
    pub fn uniform(n: usize) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::InvalidMeshSize(n));
        }
        let h = 1.0 / n as f64;
        let vid = |i: usize, j: usize| j * (n + 1) + i;

        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 * h, j as f64 * h]);
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(n * (3 * n + 2));
        let mut edges = Vec::with_capacity(n * (3 * n + 2));
        let mut edge_to_tri: Vec<(usize, Option<usize>)> = Vec::with_capacity(n * (3 * n + 2));
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let key = (a.min(b), a.max(b));
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_to_tri.push((t, None));
                    edges.len() - 1
                });
                if edge_to_tri[e].0 != t {
                    edge_to_tri[e].1 = Some(t);
                }
                *slot = e;
            }
            tri_edges.push(local);
        }

        let mut edge_normal = vec![[0.0; 2]; edges.len()];
        for (e, &(tp, _)) in edge_to_tri.iter().enumerate() {
            let k = tri_edges[tp].iter().position(|&x| x == e).expect("edge incident to T+");
            let tri = triangles[tp];
            let a = vertices[tri[(k + 1) % 3]];
            let b = vertices[tri[(k + 2) % 3]];
            edge_normal[e] = outward_normal(a, b);
        }

        let eps = 1e-12;
        let boundary_tag = edges
            .iter()
            .zip(&edge_to_tri)
            .map(|(&[a, b], &(_, minus))| {
                if minus.is_some() {
                    return BoundaryTag::Interior;
                }
                let (pa, pb) = (vertices[a], vertices[b]);
                let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                if mid[1] < eps {
                    BoundaryTag::Bottom
                } else if mid[0] > 1.0 - eps {
                    BoundaryTag::Right
                } else if mid[1] > 1.0 - eps {
                    BoundaryTag::Top
                } else {
                    BoundaryTag::Left
                }
            })
            .collect();

        Ok(Mesh {
            n,
            h,
            vertices,
            triangles,
            edges,
            edge_to_tri,
            edge_normal,
            boundary_tag,
            tri_edges,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_to_tri[e].1.is_none()
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_edges()).filter(move |&e| !self.is_boundary_edge(e))
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_edges()).filter(move |&e| self.is_boundary_edge(e))
    }

    pub fn vertex_coords(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn centroid(&self, t: usize) -> Point {
        let v = self.vertex_coords(t);
        [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0]
    }

    /// Geometry of triangle `t`, including the sign relating each local
    /// outward normal to the global edge normal.
    pub fn element_geometry(&self, t: usize) -> Result<ElementGeometry> {
        if t >= self.num_triangles() {
            return Err(Error::DimensionMismatch(format!(
                "triangle index {t} out of range ({} triangles)",
                self.num_triangles()
            )));
        }
        let mut g = ElementGeometry::from_vertices(self.vertex_coords(t)).map_err(|err| match err {
            Error::DegenerateElement(_, area) => Error::DegenerateElement(t, area),
            other => other,
        })?;
        g.edges = self.tri_edges[t];
        for k in 0..3 {
            let ne = self.edge_normal[g.edges[k]];
            let dot = ne[0] * g.normals[k][0] + ne[1] * g.normals[k][1];
            g.signs[k] = if dot > 0.0 { 1.0 } else { -1.0 };
        }
        Ok(g)
    }

    /// Plain-text dump: `v x y` lines followed by `t i j k` lines.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {}", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "t {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

/// Outward unit normal of the edge `a -> b` traversed counter-clockwise.
fn outward_normal(a: Point, b: Point) -> Point {
    let t = [b[0] - a[0], b[1] - a[1]];
    let len = t[0].hypot(t[1]);
    [t[1] / len, -t[0] / len]
}

#[derive(Clone, Debug)]
pub struct ElementGeometry {
    pub vertices: [Point; 3],
    pub area: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grads: [Point; 3],
    /// Length of local edge `k` (opposite vertex `k`).
    pub edge_len: [f64; 3],
    /// Outward unit normal of local edge `k`.
    pub normals: [Point; 3],
    /// `n_e . n_{e,T}` for each local edge.
    pub signs: [f64; 3],
    /// Global edge ids, `usize::MAX` for a standalone triangle.
    pub edges: [usize; 3],
}

impl ElementGeometry {
    /// Geometry of a standalone counter-clockwise triangle. Global normals are
    /// taken to coincide with the outward normals (all signs `+1`).
    pub fn from_vertices(v: [Point; 3]) -> Result<ElementGeometry> {
        let d1 = [v[1][0] - v[0][0], v[1][1] - v[0][1]];
        let d2 = [v[2][0] - v[0][0], v[2][1] - v[0][1]];
        let area = 0.5 * (d1[0] * d2[1] - d1[1] * d2[0]);
        let scale = (d1[0] * d1[0] + d1[1] * d1[1]).max(d2[0] * d2[0] + d2[1] * d2[1]);
        if !(area > 1e-14 * scale) {
            return Err(Error::DegenerateElement(usize::MAX, area));
        }
        let mut edge_len = [0.0; 3];
        let mut normals = [[0.0; 2]; 3];
        let mut grads = [[0.0; 2]; 3];
        for k in 0..3 {
            let a = v[(k + 1) % 3];
            let b = v[(k + 2) % 3];
            edge_len[k] = (b[0] - a[0]).hypot(b[1] - a[1]);
            normals[k] = outward_normal(a, b);
            // |grad lambda_k| = 1 / height_k, pointing inward across edge k.
            let s = -edge_len[k] / (2.0 * area);
            grads[k] = [s * normals[k][0], s * normals[k][1]];
        }
        Ok(ElementGeometry {
            vertices: v,
            area,
            grads,
            edge_len,
            normals,
            signs: [1.0; 3],
            edges: [usize::MAX; 3],
        })
    }

    /// Endpoints (local vertex indices) of local edge `k`.
    pub fn edge_vertices(k: usize) -> (usize, usize) {
        ((k + 1) % 3, (k + 2) % 3)
    }

    /// Global normal `n_e` of local edge `k`.
    pub fn global_normal(&self, k: usize) -> Point {
        [self.signs[k] * self.normals[k][0], self.signs[k] * self.normals[k][1]]
    }

    /// Maps reference coordinates on `(0,0),(1,0),(0,1)` to the element.
    pub fn map_reference(&self, xi: f64, eta: f64) -> Point {
        let v = &self.vertices;
        [
            v[0][0] + xi * (v[1][0] - v[0][0]) + eta * (v[2][0] - v[0][0]),
            v[0][1] + xi * (v[1][1] - v[0][1]) + eta * (v[2][1] - v[0][1]),
        ]
    }

    /// Barycentric coordinates of a point given in reference coordinates.
    pub fn barycentric_reference(xi: f64, eta: f64) -> [f64; 3] {
        [1.0 - xi - eta, xi, eta]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_grid() {
        let m = Mesh::uniform(1).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert_eq!(m.num_edges(), 5);
    }

    #[test]
    fn zero_size_rejected() {
        assert!(matches!(Mesh::uniform(0), Err(Error::InvalidMeshSize(0))));
    }

    #[test]
    fn counts_n4_match_enumeration() {
        // Enumeration oracle: N(N+1) horizontal + N(N+1) vertical + N^2 diagonal edges,
        // boundary edges 4N.
        let n = 4;
        let m = Mesh::uniform(n).unwrap();
        let expected_edges = 2 * n * (n + 1) + n * n;
        assert_eq!(expected_edges, 56);
        assert_eq!(m.num_vertices(), 25);
        assert_eq!(m.num_triangles(), 32);
        assert_eq!(m.num_edges(), expected_edges);
        assert_eq!(m.boundary_edges().count(), 16);
        assert_eq!(m.interior_edges().count(), 40);
        let euler = m.num_vertices() as i64 - m.num_edges() as i64 + m.num_triangles() as i64;
        assert_eq!(euler, 1);
        assert_eq!(m.h, 0.25);
    }

    #[test]
    fn incidence_and_orientation() {
        let m = Mesh::uniform(5).unwrap();
        let mut count = vec![0usize; m.num_edges()];
        for te in &m.tri_edges {
            for &e in te {
                count[e] += 1;
            }
        }
        for e in 0..m.num_edges() {
            let expected = if m.is_boundary_edge(e) { 1 } else { 2 };
            assert_eq!(count[e], expected);
            let (tp, tm) = m.edge_to_tri[e];
            if let Some(tm) = tm {
                assert!(tp < tm);
                let gp = m.element_geometry(tp).unwrap();
                let gm = m.element_geometry(tm).unwrap();
                let kp = gp.edges.iter().position(|&x| x == e).unwrap();
                let km = gm.edges.iter().position(|&x| x == e).unwrap();
                assert_eq!(gp.signs[kp], 1.0);
                assert_eq!(gm.signs[km], -1.0);
            } else {
                let g = m.element_geometry(tp).unwrap();
                let k = g.edges.iter().position(|&x| x == e).unwrap();
                assert_eq!(g.signs[k], 1.0);
                assert!(m.boundary_tag[e].is_boundary());
            }
        }
    }

    #[test]
    fn boundary_tags_cover_sides() {
        let n = 3;
        let m = Mesh::uniform(n).unwrap();
        for side in BoundaryTag::SIDES {
            assert_eq!(m.boundary_tag.iter().filter(|&&t| t == side).count(), n);
        }
        for e in m.boundary_edges() {
            let nrm = m.edge_normal[e];
            let expected = match m.boundary_tag[e] {
                BoundaryTag::Bottom => [0.0, -1.0],
                BoundaryTag::Right => [1.0, 0.0],
                BoundaryTag::Top => [0.0, 1.0],
                BoundaryTag::Left => [-1.0, 0.0],
                BoundaryTag::Interior => unreachable!(),
            };
            assert!((nrm[0] - expected[0]).abs() < 1e-15 && (nrm[1] - expected[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_right_triangle_geometry() {
        let g = ElementGeometry::from_vertices([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((g.area - 0.5).abs() < 1e-15);
        assert!((g.grads[0][0] + 1.0).abs() < 1e-15 && (g.grads[0][1] + 1.0).abs() < 1e-15);
        assert!((g.grads[1][0] - 1.0).abs() < 1e-15 && g.grads[1][1].abs() < 1e-15);
        assert!((g.edge_len[0] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_triangle_reported() {
        let r = ElementGeometry::from_vertices([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]);
        assert!(matches!(r, Err(Error::DegenerateElement(..))));
    }

    #[test]
    fn uniform_areas_gradients_and_rotated_edges() {
        let m = Mesh::uniform(4).unwrap();
        for t in 0..m.num_triangles() {
            let g = m.element_geometry(t).unwrap();
            assert!((g.area - m.h * m.h / 2.0).abs() < 1e-15);
            let sx: f64 = g.grads.iter().map(|d| d[0]).sum();
            let sy: f64 = g.grads.iter().map(|d| d[1]).sum();
            assert!(sx.abs() < 1e-13 && sy.abs() < 1e-13);
            for k in 0..3 {
                let (a, b) = ElementGeometry::edge_vertices(k);
                let tv = [g.vertices[b][0] - g.vertices[a][0], g.vertices[b][1] - g.vertices[a][1]];
                // |e| n_{e,T} is the edge vector rotated by -90 degrees.
                let ln = [g.edge_len[k] * g.normals[k][0], g.edge_len[k] * g.normals[k][1]];
                assert!((ln[0] - tv[1]).abs() < 1e-15 && (ln[1] + tv[0]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dump_format() {
        let m = Mesh::uniform(1).unwrap();
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert!(text.contains("t 0 1 3"));
    }
}
