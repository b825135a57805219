//! CSV renderings of error tables, iteration histories and measurements.
//!
//! Floating point columns carry 17 significant digits so values survive a
//! round trip through the file; columns with a `_display` suffix repeat
//! the headline figures rounded for reading.

use crate::experiments::ExperimentCell;
use crate::forward::Measurement;
use crate::mesh::Mesh;
use crate::optimizer::IterationRecord;

fn full(x: f64) -> String {
    format!("{x:.16e}")
}

fn display(x: f64) -> String {
    format!("{x:.4e}")
}

/// Error table of one experiment cell: a row per level, the pairwise
/// convergence orders against the previous level, and a final `mean` row
/// with the averaged orders.
pub fn error_table_csv(cell: &ExperimentCell) -> String {
    let mut out = String::from(
        "level,h,rho,theta,delta,iterations,tolerance,error_q,eoc_q,error_neumann,eoc_neumann,\
         error_dirichlet,eoc_dirichlet,h_display,delta_display,error_q_display,\
         error_neumann_display,error_dirichlet_display\n",
    );
    let rate = |series: &Option<crate::experiments::EocSeries>, row: usize| -> String {
        if row == 0 {
            return String::new();
        }
        series.as_ref().map_or(String::new(), |s| full(s.rates[row - 1]))
    };
    for (row, level) in cell.levels.iter().enumerate() {
        let r = &level.report;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.level,
            full(r.h),
            full(r.rho),
            full(r.theta),
            full(r.delta),
            r.iterations,
            full(r.tolerance),
            full(r.error_q),
            rate(&cell.eoc_q, row),
            full(r.error_neumann),
            rate(&cell.eoc_neumann, row),
            full(r.error_dirichlet),
            rate(&cell.eoc_dirichlet, row),
            display(r.h),
            display(r.delta),
            display(r.error_q),
            display(r.error_neumann),
            display(r.error_dirichlet),
        ));
    }
    if let (Some(q), Some(n), Some(d)) = (&cell.eoc_q, &cell.eoc_neumann, &cell.eoc_dirichlet) {
        out.push_str(&format!(
            "mean,,,,,,,,{},,{},,{},,,,,\n",
            full(q.mean),
            full(n.mean),
            full(d.mean)
        ));
    }
    out
}

/// Iteration history of one optimizer run.
pub fn history_csv(records: &[IterationRecord]) -> String {
    let mut out =
        String::from("iteration,objective,misfit,tv,gradient_norm,tolerance,step_size,accepted\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.iteration,
            full(r.objective),
            full(r.misfit),
            full(r.tv),
            full(r.gradient_norm),
            full(r.tolerance),
            full(r.step_size),
            r.accepted,
        ));
    }
    out
}

/// Boundary measurement as rows of `kind,index,x,y,value`; current rows
/// locate each edge by its midpoint, voltage rows by the node.
pub fn measurement_csv(mesh: &Mesh, measurement: &Measurement) -> String {
    let mut out = String::from("kind,index,x,y,value\n");
    for (k, (edge, &j)) in
        mesh.boundary_edges().iter().zip(measurement.current()).enumerate()
    {
        let p0 = mesh.node(edge.nodes[0]);
        let p1 = mesh.node(edge.nodes[1]);
        out.push_str(&format!(
            "current,{},{},{},{}\n",
            k,
            full(0.5 * (p0[0] + p1[0])),
            full(0.5 * (p0[1] + p1[1])),
            full(j)
        ));
    }
    for (k, (&node, &g)) in
        mesh.boundary_nodes().iter().zip(measurement.voltage()).enumerate()
    {
        let p = mesh.node(node);
        out.push_str(&format!("voltage,{},{},{},{}\n", k, full(p[0]), full(p[1]), full(g)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::IterationRecord;

    #[test]
    fn history_csv_has_one_row_per_record_plus_header() {
        let records = vec![
            IterationRecord {
                iteration: 0,
                objective: 1.0,
                misfit: 0.9,
                tv: 0.1,
                gradient_norm: 2.0,
                tolerance: 1.9,
                step_size: 0.75,
                accepted: false,
            },
            IterationRecord {
                iteration: 1,
                objective: 0.5,
                misfit: 0.45,
                tv: 0.05,
                gradient_norm: 1.0,
                tolerance: 0.9,
                step_size: 0.375,
                accepted: true,
            },
        ];
        let csv = history_csv(&records);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("iteration,objective"));
        assert!(lines[1].starts_with("0,"));
        assert!(lines[2].ends_with(",true"));
        // Full precision round-trips.
        let objective: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(objective, 0.5);
    }

    #[test]
    fn measurement_csv_covers_all_boundary_items() {
        let mesh = Mesh::structured(2).unwrap();
        let m = Measurement::new(&mesh, vec![1.0; 8], (0..8).map(|k| k as f64).collect())
            .unwrap();
        let csv = measurement_csv(&mesh, &m);
        assert_eq!(csv.lines().count(), 1 + 8 + 8);
        assert_eq!(csv.lines().filter(|l| l.starts_with("current,")).count(), 8);
        assert_eq!(csv.lines().filter(|l| l.starts_with("voltage,")).count(), 8);
    }
}
