//! Boundary specification and degree-of-freedom numbering for the five unknown
//! families: bubble, linear displacement, pressure, multiplier and broken RT0
//! velocity (in the block order of the full system).

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};

/// Set of boundary sides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct TagSet(u8);

impl TagSet {
    pub const EMPTY: TagSet = TagSet(0);
    pub const ALL: TagSet = TagSet(0b1111);

    fn bit(tag: BoundaryTag) -> u8 {
        match tag {
            BoundaryTag::Bottom => 1,
            BoundaryTag::Right => 2,
            BoundaryTag::Top => 4,
            BoundaryTag::Left => 8,
            BoundaryTag::Interior => 0,
        }
    }

    pub fn of(tags: &[BoundaryTag]) -> TagSet {
        TagSet(tags.iter().fold(0, |acc, &t| acc | Self::bit(t)))
    }

    pub fn contains(self, tag: BoundaryTag) -> bool {
        let b = Self::bit(tag);
        b != 0 && self.0 & b != 0
    }

    pub fn union(self, other: TagSet) -> TagSet {
        TagSet(self.0 | other.0)
    }

    pub fn intersects(self, other: TagSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn tags(self) -> impl Iterator<Item = BoundaryTag> {
        BoundaryTag::SIDES.into_iter().filter(move |&t| self.contains(t))
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BoundarySpec {
    /// Sides where `u = 0`.
    pub displacement_dirichlet: TagSet,
    /// Sides with a prescribed traction.
    pub traction: TagSet,
    /// Sides where `w . n = 0`.
    pub no_flow: TagSet,
    /// Sides where `p = 0`.
    pub pressure_dirichlet: TagSet,
    /// Traction vector per side, indexed bottom, right, top, left.
    pub traction_values: [[f64; 2]; 4],
}

impl BoundarySpec {
    /// Clamped displacement and no-flow on the whole boundary.
    pub fn clamped_no_flow() -> BoundarySpec {
        BoundarySpec {
            displacement_dirichlet: TagSet::ALL,
            traction: TagSet::EMPTY,
            no_flow: TagSet::ALL,
            pressure_dirichlet: TagSet::EMPTY,
            traction_values: [[0.0; 2]; 4],
        }
    }

    /// Left side clamped, traction `top_traction` on top, traction-free right and
    /// bottom, no-flow everywhere.
    pub fn cantilever(top_traction: [f64; 2]) -> BoundarySpec {
        let mut traction_values = [[0.0; 2]; 4];
        traction_values[2] = top_traction;
        BoundarySpec {
            displacement_dirichlet: TagSet::of(&[BoundaryTag::Left]),
            traction: TagSet::of(&[BoundaryTag::Bottom, BoundaryTag::Right, BoundaryTag::Top]),
            no_flow: TagSet::ALL,
            pressure_dirichlet: TagSet::EMPTY,
            traction_values,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pairs = [
            ("displacement", self.displacement_dirichlet, self.traction),
            ("flow", self.no_flow, self.pressure_dirichlet),
        ];
        for (name, a, b) in pairs {
            if a.union(b) != TagSet::ALL {
                return Err(Error::InconsistentBoundary(format!(
                    "{name} conditions leave a side unassigned"
                )));
            }
            if a.intersects(b) {
                return Err(Error::InconsistentBoundary(format!(
                    "{name} conditions assign two conditions to one side"
                )));
            }
        }
        Ok(())
    }

    pub fn traction_on(&self, tag: BoundaryTag) -> Option<[f64; 2]> {
        if !self.traction.contains(tag) {
            return None;
        }
        let idx = BoundaryTag::SIDES.iter().position(|&t| t == tag)?;
        Some(self.traction_values[idx])
    }
}

/// Edges that carry a bubble: interior edges and edges off the clamped boundary.
pub fn bubble_edge_set(mesh: &Mesh, bc: &BoundarySpec) -> Vec<usize> {
    (0..mesh.num_edges())
        .filter(|&e| {
            let tag = mesh.boundary_tag[e];
            !tag.is_boundary() || !bc.displacement_dirichlet.contains(tag)
        })
        .collect()
}

/// Global numbering of every unknown family. Each family is numbered from zero;
/// [`DofMap::offsets`] gives the placement in the full block vector.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub n_ulin: usize,
    pub n_bub: usize,
    pub n_p: usize,
    pub n_beta: usize,
    pub n_w: usize,
    /// Per vertex, the x and y displacement dofs.
    pub ulin: Vec<[Option<usize>; 2]>,
    /// Per edge.
    pub bubble: Vec<Option<usize>>,
    /// Per edge.
    pub beta: Vec<Option<usize>>,
    /// Per triangle and local edge.
    pub velocity: Vec<[Option<usize>; 3]>,
}

impl DofMap {
    /// Numbering for the bubble-enriched displacement space.
    pub fn new(mesh: &Mesh, bc: &BoundarySpec) -> Result<DofMap> {
        Self::build(mesh, bc, true)
    }

    /// Numbering with or without the bubble enrichment (the latter is the
    /// classical P1-RT0-P0 hybrid discretization).
    pub fn build(mesh: &Mesh, bc: &BoundarySpec, with_bubbles: bool) -> Result<DofMap> {
        bc.validate()?;

        let mut clamped = vec![false; mesh.num_vertices()];
        for e in mesh.boundary_edges() {
            if bc.displacement_dirichlet.contains(mesh.boundary_tag[e]) {
                let [a, b] = mesh.edges[e];
                clamped[a] = true;
                clamped[b] = true;
            }
        }
        let mut n_ulin = 0;
        let ulin = clamped
            .iter()
            .map(|&c| {
                if c {
                    [None, None]
                } else {
                    n_ulin += 2;
                    [Some(n_ulin - 2), Some(n_ulin - 1)]
                }
            })
            .collect();

        let mut bubble = vec![None; mesh.num_edges()];
        let mut n_bub = 0;
        if with_bubbles {
            for e in bubble_edge_set(mesh, bc) {
                bubble[e] = Some(n_bub);
                n_bub += 1;
            }
        }

        // Multipliers live on interior edges only: on pressure-Dirichlet edges
        // the trace is the known value zero, on no-flow edges the flux is zero.
        let mut beta = vec![None; mesh.num_edges()];
        let mut n_beta = 0;
        for e in mesh.interior_edges() {
            beta[e] = Some(n_beta);
            n_beta += 1;
        }

        let mut n_w = 0;
        let velocity = mesh
            .tri_edges
            .iter()
            .map(|te| {
                let mut local = [None; 3];
                for (k, &e) in te.iter().enumerate() {
                    let tag = mesh.boundary_tag[e];
                    if tag.is_boundary() && bc.no_flow.contains(tag) {
                        continue;
                    }
                    local[k] = Some(n_w);
                    n_w += 1;
                }
                local
            })
            .collect();

        Ok(DofMap {
            n_ulin,
            n_bub,
            n_p: mesh.num_triangles(),
            n_beta,
            n_w,
            ulin,
            bubble,
            beta,
            velocity,
        })
    }

    /// Block offsets in the order bubble, linear, pressure, multiplier,
    /// velocity; the last entry is the total size.
    pub fn offsets(&self) -> [usize; 6] {
        let sizes = [self.n_bub, self.n_ulin, self.n_p, self.n_beta, self.n_w];
        let mut off = [0; 6];
        for i in 0..5 {
            off[i + 1] = off[i] + sizes[i];
        }
        off
    }

    pub fn full_size(&self) -> usize {
        self.offsets()[5]
    }

    /// Size of the condensed system (linear, pressure, multiplier).
    pub fn condensed_size(&self) -> usize {
        self.n_ulin + self.n_p + self.n_beta
    }

    /// The six linear-displacement dofs of a triangle, ordered
    /// `(vertex 0, x), (vertex 0, y), (vertex 1, x), ...`.
    pub fn element_ulin(&self, mesh: &Mesh, t: usize) -> [Option<usize>; 6] {
        let tri = mesh.triangles[t];
        let mut out = [None; 6];
        for (l, &v) in tri.iter().enumerate() {
            out[2 * l] = self.ulin[v][0];
            out[2 * l + 1] = self.ulin[v][1];
        }
        out
    }

    pub fn element_bubbles(&self, mesh: &Mesh, t: usize) -> [Option<usize>; 3] {
        let te = mesh.tri_edges[t];
        [self.bubble[te[0]], self.bubble[te[1]], self.bubble[te[2]]]
    }

    pub fn element_betas(&self, mesh: &Mesh, t: usize) -> [Option<usize>; 3] {
        let te = mesh.tri_edges[t];
        [self.beta[te[0]], self.beta[te[1]], self.beta[te[2]]]
    }
}
