//! Ground truth of the synthetic experiments: a piecewise constant
//! conductivity with two inclusions, a mean-free piecewise constant source,
//! and the four-parameter family of applied boundary currents.

use crate::error::{Error, Result};
use crate::fem::PiecewiseConstantSource;
use crate::mesh::{Mesh, NodalField, Side};

/// Two-inclusion conductivity phantom on (-1,1)^2: an elliptic inclusion of
/// value 3 in the upper left, a circular inclusion of value 2 in the lower
/// right, background 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct Phantom;

impl Phantom {
    pub fn new() -> Self {
        Phantom
    }

    /// Pointwise conductivity value; inclusion boundaries count as inside.
    pub fn conductivity(&self, x: f64, y: f64) -> f64 {
        if 9.0 * (x + 0.5).powi(2) + 16.0 * (y - 0.5).powi(2) <= 1.0 {
            3.0
        } else if (x - 0.5).powi(2) + (y + 0.5).powi(2) <= 1.0 / 16.0 {
            2.0
        } else {
            1.0
        }
    }

    /// Nodal interpolant of the phantom on `mesh`.
    pub fn interpolate(&self, mesh: &Mesh) -> NodalField {
        NodalField::from_fn(mesh, |x, y| self.conductivity(x, y))
    }

    /// The mean-free source: 3/2 on the centered square of side 1 (closed),
    /// -1/2 on the rest of the domain.
    pub fn source(&self) -> PiecewiseConstantSource {
        let inner = |x: f64, y: f64| x.abs() <= 0.5 && y.abs() <= 0.5;
        PiecewiseConstantSource::new()
            .with_region(inner, 1.5)
            .with_region(move |x, y| !inner(x, y), -0.5)
    }
}

/// Edgewise constant boundary current from the four-parameter pattern
/// `(a, b, c, d)`: on the bottom side `+a` where x > 0 and `-b` where
/// x < 0; on the top `+b` where x > 0 and `-a` where x < 0; on the left
/// `+c` where y < 0 and `-d` where y > 0; on the right `+d` where y < 0
/// and `-c` where y > 0. The pattern integrates to zero over the boundary.
/// Signs are decided at edge midpoints, so for even mesh levels no edge
/// straddles a sign change.
pub fn boundary_current(mesh: &Mesh, pattern: [f64; 4]) -> Vec<f64> {
    let [a, b, c, d] = pattern;
    mesh.boundary_edges()
        .iter()
        .map(|edge| {
            let p0 = mesh.node(edge.nodes[0]);
            let p1 = mesh.node(edge.nodes[1]);
            let mid = [(p0[0] + p1[0]) / 2.0, (p0[1] + p1[1]) / 2.0];
            match edge.side {
                Side::Bottom => {
                    if mid[0] > 0.0 {
                        a
                    } else {
                        -b
                    }
                }
                Side::Top => {
                    if mid[0] > 0.0 {
                        b
                    } else {
                        -a
                    }
                }
                Side::Left => {
                    if mid[1] < 0.0 {
                        c
                    } else {
                        -d
                    }
                }
                Side::Right => {
                    if mid[1] < 0.0 {
                        d
                    } else {
                        -c
                    }
                }
            }
        })
        .collect()
}

/// Current patterns for a multi-measurement run.
///
/// Supported counts: 1 (the base pattern `(1,2,3,4)`), 6 (all permutations
/// of `{1,2,3}` as the first three parameters, with the fourth fixed at 4)
/// and 16 (the first 16 permutations of `{1,2,3,4}` in lexicographic
/// order). The six-pattern set is a subset of the sixteen-pattern set.
pub fn measurement_patterns(count: usize) -> Result<Vec<[f64; 4]>> {
    match count {
        1 => Ok(vec![[1.0, 2.0, 3.0, 4.0]]),
        6 => Ok(permutations(&[1.0, 2.0, 3.0])
            .into_iter()
            .map(|p| [p[0], p[1], p[2], 4.0])
            .collect()),
        16 => Ok(permutations(&[1.0, 2.0, 3.0, 4.0])
            .into_iter()
            .take(16)
            .map(|p| [p[0], p[1], p[2], p[3]])
            .collect()),
        other => Err(Error::invalid(format!(
            "unsupported measurement count {other}; expected 1, 6 or 16"
        ))),
    }
}

/// All permutations of `items` in lexicographic order.
fn permutations(items: &[f64]) -> Vec<Vec<f64>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut result = Vec::new();
    for (i, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            result.push(tail);
        }
    }
    result
}
