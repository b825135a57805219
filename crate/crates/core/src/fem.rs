//! Piecewise linear finite element assembly on structured meshes.
//!
//! All quadratures here are exact for the data they are applied to within
//! the solver pipeline: the conductivity weight in the stiffness matrix is
//! the triangle mean of a piecewise linear field, the mass matrix uses the
//! exact formula for products of linear basis functions, boundary currents
//! are constant per boundary edge, and volumetric sources are evaluated at
//! triangle centroids (exact for sources that are constant on every
//! triangle, which holds for the piecewise constant sources used here when
//! their region boundaries follow mesh lines).

use crate::error::{Error, Result};
use crate::mesh::{Mesh, NodalField, TriangleGeometry};
use crate::sparse::CsrMatrix;

/// Entries of the local stiffness matrix `area * (grad phi_a . grad phi_b)`.
pub(crate) fn local_stiffness(geo: &TriangleGeometry) -> [[f64; 3]; 3] {
    let mut local = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            local[a][b] = geo.area
                * (geo.grads[a][0] * geo.grads[b][0] + geo.grads[a][1] * geo.grads[b][1]);
        }
    }
    local
}

/// Reusable stiffness assembler for a fixed mesh.
///
/// The sparsity pattern, the geometric local matrices and the scatter map
/// from local to global entries only depend on the mesh, so they are
/// computed once. [`StiffnessAssembler::assemble`] then fills values for a
/// given conductivity field; this is the hot path of the optimizer, which
/// reassembles the matrix at every trial conductivity.
pub struct StiffnessAssembler {
    level: u32,
    pattern: CsrMatrix,
    /// Per triangle: the local geometric stiffness, row-major.
    local: Vec<[f64; 9]>,
    /// Per triangle: value-array slot of each local entry, row-major.
    slots: Vec<[usize; 9]>,
}

impl StiffnessAssembler {
    pub fn new(mesh: &Mesh) -> Self {
        let n = mesh.num_nodes();
        let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());
        let mut local = Vec::with_capacity(mesh.num_triangles());
        for t in 0..mesh.num_triangles() {
            let geo = mesh.triangle_geometry(t);
            local.push(local_stiffness(&geo));
            let tri = mesh.triangles()[t];
            for &a in &tri {
                for &b in &tri {
                    triplets.push((a, b, 0.0));
                }
            }
        }
        let pattern =
            CsrMatrix::from_triplets(n, &triplets).expect("mesh indices are in range");

        let locate = |i: usize, j: usize| -> usize {
            let range = pattern.row_ptr()[i]..pattern.row_ptr()[i + 1];
            range.start
                + pattern.col_idx()[range.clone()]
                    .binary_search(&j)
                    .expect("entry present in pattern")
        };
        let mut slots = Vec::with_capacity(mesh.num_triangles());
        let mut local_flat = Vec::with_capacity(mesh.num_triangles());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let mut slot = [0usize; 9];
            let mut vals = [0.0f64; 9];
            for a in 0..3 {
                for b in 0..3 {
                    slot[3 * a + b] = locate(tri[a], tri[b]);
                    vals[3 * a + b] = local[t][a][b];
                }
            }
            slots.push(slot);
            local_flat.push(vals);
        }
        StiffnessAssembler { level: mesh.level(), pattern, local: local_flat, slots }
    }

    /// Assembles the stiffness matrix weighted by the conductivity `q`,
    /// where `q` enters through its exact mean over each triangle.
    pub fn assemble(&self, mesh: &Mesh, q: &NodalField) -> Result<CsrMatrix> {
        q.check_mesh(mesh)?;
        if mesh.level() != self.level {
            return Err(Error::invalid("assembler was built for a different mesh"));
        }
        let mut matrix = self.pattern.clone();
        let values = matrix.values_mut();
        for v in values.iter_mut() {
            *v = 0.0;
        }
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let qv = q.values();
            let mean = (qv[tri[0]] + qv[tri[1]] + qv[tri[2]]) / 3.0;
            let local = &self.local[t];
            let slots = &self.slots[t];
            for k in 0..9 {
                values[slots[k]] += mean * local[k];
            }
        }
        Ok(matrix)
    }
}

/// Assembles the conductivity-weighted stiffness matrix on `mesh`.
pub fn assemble_stiffness(mesh: &Mesh, q: &NodalField) -> Result<CsrMatrix> {
    StiffnessAssembler::new(mesh).assemble(mesh, q)
}

/// Assembles the consistent mass matrix with the exact local rule
/// `area/12 * [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    let n = mesh.num_nodes();
    let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles()[t];
        let scale = mesh.triangle_geometry(t).area / 12.0;
        for a in 0..3 {
            for b in 0..3 {
                let w = if a == b { 2.0 } else { 1.0 };
                triplets.push((tri[a], tri[b], scale * w));
            }
        }
    }
    CsrMatrix::from_triplets(n, &triplets).expect("mesh indices are in range")
}

/// Assembles the load vector for a source term evaluated at triangle
/// centroids: `b_i = sum_T f(centroid_T) * area_T / 3` over triangles
/// containing node `i`.
pub fn assemble_load_with(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.num_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let c = mesh.centroid(t);
        let contrib = f(c[0], c[1]) * mesh.triangle_geometry(t).area / 3.0;
        for &node in tri {
            b[node] += contrib;
        }
    }
    b
}

/// Assembles the load vector of a piecewise constant source.
pub fn assemble_load(mesh: &Mesh, source: &PiecewiseConstantSource) -> Result<Vec<f64>> {
    let mut b = vec![0.0; mesh.num_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let c = mesh.centroid(t);
        let value = source.eval(c[0], c[1]).ok_or_else(|| {
            Error::invalid(format!("source regions do not cover centroid ({}, {})", c[0], c[1]))
        })?;
        let contrib = value * mesh.triangle_geometry(t).area / 3.0;
        for &node in tri {
            b[node] += contrib;
        }
    }
    Ok(b)
}

/// Assembles the boundary functional of an edgewise constant current:
/// each boundary edge adds `j_e * |e| / 2` to both endpoint entries.
/// Exact for currents that are constant per boundary edge.
pub fn assemble_neumann_rhs(mesh: &Mesh, current: &[f64]) -> Result<Vec<f64>> {
    if current.len() != mesh.boundary_edges().len() {
        return Err(Error::invalid(format!(
            "current has {} values but the mesh has {} boundary edges",
            current.len(),
            mesh.boundary_edges().len()
        )));
    }
    let mut rhs = vec![0.0; mesh.num_nodes()];
    for (edge, &j) in mesh.boundary_edges().iter().zip(current) {
        let half = 0.5 * j * mesh.edge_length(edge);
        rhs[edge.nodes[0]] += half;
        rhs[edge.nodes[1]] += half;
    }
    Ok(rhs)
}

/// Source term that takes a constant value on each of a list of regions.
///
/// Regions are given as membership predicates and are expected to partition
/// the domain; [`PiecewiseConstantSource::validate_partition`] checks that
/// every triangle centroid of a mesh is matched by exactly one region.
pub struct PiecewiseConstantSource {
    regions: Vec<(Box<dyn Fn(f64, f64) -> bool + Send + Sync>, f64)>,
}

impl PiecewiseConstantSource {
    pub fn new() -> Self {
        PiecewiseConstantSource { regions: Vec::new() }
    }

    pub fn with_region(
        mut self,
        contains: impl Fn(f64, f64) -> bool + Send + Sync + 'static,
        value: f64,
    ) -> Self {
        self.regions.push((Box::new(contains), value));
        self
    }

    /// Value of the first region containing the point, if any.
    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        self.regions
            .iter()
            .find(|(contains, _)| contains(x, y))
            .map(|&(_, value)| value)
    }

    /// Checks that every triangle centroid of `mesh` lies in exactly one region.
    pub fn validate_partition(&self, mesh: &Mesh) -> Result<()> {
        for t in 0..mesh.num_triangles() {
            let c = mesh.centroid(t);
            let hits = self.regions.iter().filter(|(contains, _)| contains(c[0], c[1])).count();
            if hits != 1 {
                return Err(Error::invalid(format!(
                    "centroid ({}, {}) is covered by {hits} regions instead of 1",
                    c[0], c[1]
                )));
            }
        }
        Ok(())
    }
}

impl Default for PiecewiseConstantSource {
    fn default() -> Self {
        Self::new()
    }
}
