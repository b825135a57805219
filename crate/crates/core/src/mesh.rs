//! Structured triangulations of the square (-1,1)^2 and piecewise linear
//! nodal fields on them.
//!
//! A mesh of level `l` splits each axis into `l` segments, giving
//! `(l+1)^2` nodes and `2*l^2` triangles; every grid cell is cut along the
//! diagonal from its bottom-left to its top-right corner. Nodes are ordered
//! lexicographically by (y, x), so node `iy*(l+1) + ix` sits at
//! `(-1 + 2*ix/l, -1 + 2*iy/l)`. Both triangles of a cell are oriented
//! counterclockwise. The mesh size `h` is the triangle diameter, i.e. the
//! hypotenuse length `sqrt(8)/l`.

use crate::error::{Error, Result};

/// Side of the square boundary. The variants follow the counterclockwise
/// traversal order used for boundary nodes and edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    /// Outward unit normal of the side.
    pub fn normal(self) -> [f64; 2] {
        match self {
            Side::Bottom => [0.0, -1.0],
            Side::Right => [1.0, 0.0],
            Side::Top => [0.0, 1.0],
            Side::Left => [-1.0, 0.0],
        }
    }
}

/// Boundary edge between two consecutive boundary nodes.
///
/// `nodes[0] -> nodes[1]` runs counterclockwise around the square, so the
/// domain lies to the left of the edge.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub side: Side,
}

/// Gradients of the three vertex basis functions on a triangle, together
/// with the triangle area. The gradients are constant on the triangle.
#[derive(Clone, Copy, Debug)]
pub struct TriangleGeometry {
    pub grads: [[f64; 2]; 3],
    pub area: f64,
}

/// Conforming triangulation of (-1,1)^2 at a fixed refinement level.
#[derive(Clone, Debug)]
pub struct Mesh {
    level: u32,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    boundary_nodes: Vec<usize>,
    /// Position of each node in `boundary_nodes`, or `None` for interior nodes.
    boundary_position: Vec<Option<u32>>,
}

impl Mesh {
    /// Builds the structured triangulation with `level` segments per axis.
    pub fn structured(level: u32) -> Result<Self> {
        if level == 0 {
            return Err(Error::invalid("mesh level must be at least 1"));
        }
        let l = level as usize;
        let step = 2.0 / level as f64;
        let stride = l + 1;

        let mut nodes = Vec::with_capacity(stride * stride);
        for iy in 0..=l {
            for ix in 0..=l {
                nodes.push([-1.0 + step * ix as f64, -1.0 + step * iy as f64]);
            }
        }

        let idx = |ix: usize, iy: usize| iy * stride + ix;
        let mut triangles = Vec::with_capacity(2 * l * l);
        for cy in 0..l {
            for cx in 0..l {
                let bl = idx(cx, cy);
                let br = idx(cx + 1, cy);
                let tr = idx(cx + 1, cy + 1);
                let tl = idx(cx, cy + 1);
                triangles.push([bl, br, tr]);
                triangles.push([bl, tr, tl]);
            }
        }

        // Boundary nodes counterclockwise starting at the bottom-left corner.
        // Each corner appears exactly once, on the side it starts.
        let mut boundary_nodes = Vec::with_capacity(4 * l);
        for ix in 0..l {
            boundary_nodes.push(idx(ix, 0));
        }
        for iy in 0..l {
            boundary_nodes.push(idx(l, iy));
        }
        for ix in 0..l {
            boundary_nodes.push(idx(l - ix, l));
        }
        for iy in 0..l {
            boundary_nodes.push(idx(0, l - iy));
        }

        let mut boundary_edges = Vec::with_capacity(4 * l);
        for k in 0..4 * l {
            let side = match k / l {
                0 => Side::Bottom,
                1 => Side::Right,
                2 => Side::Top,
                _ => Side::Left,
            };
            boundary_edges.push(BoundaryEdge {
                nodes: [boundary_nodes[k], boundary_nodes[(k + 1) % (4 * l)]],
                side,
            });
        }

        let mut boundary_position = vec![None; nodes.len()];
        for (pos, &node) in boundary_nodes.iter().enumerate() {
            boundary_position[node] = Some(pos as u32);
        }

        Ok(Mesh { level, nodes, triangles, boundary_edges, boundary_nodes, boundary_position })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Triangle diameter `sqrt(8)/level` (the hypotenuse of each triangle).
    pub fn mesh_size(&self) -> f64 {
        8.0_f64.sqrt() / self.level as f64
    }

    /// Grid spacing along each axis, `2/level`.
    pub fn grid_step(&self) -> f64 {
        2.0 / self.level as f64
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        self.nodes[i]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Boundary edges in counterclockwise order, aligned with `boundary_nodes`:
    /// edge `k` runs from boundary node `k` to boundary node `k+1` (mod 4l).
    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Boundary node indices in counterclockwise order starting at (-1,-1).
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    /// Position of `node` in the counterclockwise boundary ordering.
    pub fn boundary_position(&self, node: usize) -> Option<usize> {
        self.boundary_position.get(node).copied().flatten().map(|p| p as usize)
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.boundary_position[node].is_some()
    }

    pub fn edge_length(&self, edge: &BoundaryEdge) -> f64 {
        let [a, b] = edge.nodes;
        let (pa, pb) = (self.nodes[a], self.nodes[b]);
        ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt()
    }

    /// Basis gradients and area of triangle `t`.
    pub fn triangle_geometry(&self, t: usize) -> TriangleGeometry {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        let area = 0.5
            * ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]));
        let inv = 1.0 / (2.0 * area);
        TriangleGeometry {
            grads: [
                [(pb[1] - pc[1]) * inv, (pc[0] - pb[0]) * inv],
                [(pc[1] - pa[1]) * inv, (pa[0] - pc[0]) * inv],
                [(pa[1] - pb[1]) * inv, (pb[0] - pa[0]) * inv],
            ],
            area,
        }
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        [(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0]
    }

    /// Lumped (trapezoidal) boundary quadrature weights per node: half the
    /// total length of the adjacent boundary edges, zero for interior nodes.
    /// The weights sum to the perimeter of the square.
    pub fn boundary_lumped_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.num_nodes()];
        for edge in &self.boundary_edges {
            let half = 0.5 * self.edge_length(edge);
            w[edge.nodes[0]] += half;
            w[edge.nodes[1]] += half;
        }
        w
    }
}

/// Piecewise linear function given by its values at the mesh nodes.
///
/// The field records the level of the mesh it lives on; meshes of equal
/// level are identical by construction, so the level check in
/// [`NodalField::check_mesh`] is sufficient to pair fields with meshes.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField {
    level: u32,
    values: Vec<f64>,
}

impl NodalField {
    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        NodalField { level: mesh.level(), values: vec![value; mesh.num_nodes()] }
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = mesh.nodes().iter().map(|p| f(p[0], p[1])).collect();
        NodalField { level: mesh.level(), values }
    }

    pub fn from_values(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::invalid(format!(
                "field has {} values but the mesh has {} nodes",
                values.len(),
                mesh.num_nodes()
            )));
        }
        Ok(NodalField { level: mesh.level(), values })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Verifies that the field lives on `mesh`.
    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.level != mesh.level() || self.values.len() != mesh.num_nodes() {
            return Err(Error::invalid(format!(
                "field on level {} does not match mesh of level {}",
                self.level,
                mesh.level()
            )));
        }
        Ok(())
    }

    /// Mean of the three vertex values on triangle `t`, the exact triangle
    /// average of a piecewise linear function.
    pub fn triangle_mean(&self, mesh: &Mesh, t: usize) -> f64 {
        let [a, b, c] = mesh.triangles()[t];
        (self.values[a] + self.values[b] + self.values[c]) / 3.0
    }

    /// Constant gradient of the field on triangle `t`.
    pub fn triangle_gradient(&self, mesh: &Mesh, t: usize) -> [f64; 2] {
        let [a, b, c] = mesh.triangles()[t];
        let geo = mesh.triangle_geometry(t);
        let mut g = [0.0, 0.0];
        for (node, grad) in [a, b, c].into_iter().zip(geo.grads) {
            g[0] += self.values[node] * grad[0];
            g[1] += self.values[node] * grad[1];
        }
        g
    }
}

/// Transfers a nodal field from a coarse mesh to a nested finer mesh by
/// piecewise linear interpolation.
///
/// The fine level must be a multiple of the coarse level. Fine nodes are
/// located inside coarse cells by integer arithmetic, so nodal values on
/// shared grid points are copied exactly.
pub fn interpolate_nodal(coarse: &Mesh, field: &NodalField, fine: &Mesh) -> Result<NodalField> {
    field.check_mesh(coarse)?;
    if fine.level() % coarse.level() != 0 {
        return Err(Error::invalid(format!(
            "fine level {} is not a multiple of coarse level {}",
            fine.level(),
            coarse.level()
        )));
    }
    let ratio = (fine.level() / coarse.level()) as usize;
    let lc = coarse.level() as usize;
    let lf = fine.level() as usize;
    let coarse_vals = field.values();
    let coarse_idx = |ix: usize, iy: usize| iy * (lc + 1) + ix;

    let mut values = Vec::with_capacity(fine.num_nodes());
    for fy in 0..=lf {
        for fx in 0..=lf {
            // Fine nodes that coincide with coarse nodes copy the value
            // exactly; the barycentric formula below would round.
            if fx % ratio == 0 && fy % ratio == 0 {
                values.push(coarse_vals[coarse_idx(fx / ratio, fy / ratio)]);
                continue;
            }
            // Coarse cell containing the fine node, clamped so nodes on the
            // top/right boundary use the last cell.
            let cx = (fx / ratio).min(lc - 1);
            let cy = (fy / ratio).min(lc - 1);
            // Local coordinates in [0,1]^2 within the cell.
            let x = (fx - cx * ratio) as f64 / ratio as f64;
            let y = (fy - cy * ratio) as f64 / ratio as f64;
            let v00 = coarse_vals[coarse_idx(cx, cy)];
            let v10 = coarse_vals[coarse_idx(cx + 1, cy)];
            let v11 = coarse_vals[coarse_idx(cx + 1, cy + 1)];
            let v01 = coarse_vals[coarse_idx(cx, cy + 1)];
            // The cell is split along the diagonal y = x.
            let v = if y <= x {
                v00 + (v10 - v00) * x + (v11 - v10) * y
            } else {
                v00 + (v11 - v01) * x + (v01 - v00) * y
            };
            values.push(v);
        }
    }
    NodalField::from_values(fine, values)
}

/// Restriction of a nodal field to the boundary, as (node, value) pairs in
/// counterclockwise boundary order.
pub fn boundary_trace(mesh: &Mesh, field: &NodalField) -> Result<Vec<(usize, f64)>> {
    field.check_mesh(mesh)?;
    Ok(mesh
        .boundary_nodes()
        .iter()
        .map(|&n| (n, field.values()[n]))
        .collect())
}
