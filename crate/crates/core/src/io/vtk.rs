//! Legacy ASCII VTK export of meshes and nodal fields, readable by
//! ParaView and VisIt.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, NodalField};

/// Renders the mesh as an unstructured grid of triangles (VTK cell type 5)
/// with the given nodal fields attached as point scalars.
pub fn vtk_unstructured(mesh: &Mesh, fields: &[(&str, &NodalField)]) -> Result<String> {
    for (name, field) in fields {
        field.check_mesh(mesh)?;
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::invalid(format!("invalid field name '{name}'")));
        }
    }
    let n = mesh.num_nodes();
    let m = mesh.num_triangles();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("conductivity reconstruction fields\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {n} double\n"));
    for p in mesh.nodes() {
        out.push_str(&format!("{:e} {:e} 0\n", p[0], p[1]));
    }
    out.push_str(&format!("CELLS {m} {}\n", 4 * m));
    for tri in mesh.triangles() {
        out.push_str(&format!("3 {} {} {}\n", tri[0], tri[1], tri[2]));
    }
    out.push_str(&format!("CELL_TYPES {m}\n"));
    for _ in 0..m {
        out.push_str("5\n");
    }
    if !fields.is_empty() {
        out.push_str(&format!("POINT_DATA {n}\n"));
        for (name, field) in fields {
            out.push_str(&format!("SCALARS {name} double 1\n"));
            out.push_str("LOOKUP_TABLE default\n");
            for v in field.values() {
                out.push_str(&format!("{v:e}\n"));
            }
        }
    }
    Ok(out)
}
