use std::io::Write;

use super::patch::{Geometry, ImmersedPatch};
use crate::error::Result;

/// Writes one snapshot: `#`-prefixed header lines followed by a CSV table
/// with node index, chart coordinates, induced-metric eigenvalues, tilt and
/// the positive curvature norms.
pub fn write_snapshot<W: Write>(mut out: W, patch: &ImmersedPatch, geom: &Geometry, s: f64) -> Result<()> {
    let grid = &patch.grid;
    writeln!(out, "# ambient={}", patch.ambient.name())?;
    writeln!(out, "# topology={:?}", grid.topology)?;
    writeln!(out, "# shape={:?}", grid.shape)?;
    writeln!(out, "# spacing={:?}", grid.spacing)?;
    writeln!(out, "# s={s:e}")?;
    let d = patch.ambient.dim();
    let n = grid.dim();
    let mut header: Vec<String> = vec!["node".into()];
    header.extend((0..d).map(|k| format!("x{k}")));
    header.extend((0..n).map(|k| format!("g_eig{k}")));
    header.extend(["v", "H2", "A2"].map(String::from));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for p in 0..patch.len() {
        let fr = &geom.frames[p];
        let mut eig: Vec<f64> = fr.metric.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut row = vec![p.to_string()];
        row.extend(patch.f[p].iter().map(|x| format!("{x:e}")));
        row.extend(eig.iter().map(|x| format!("{x:e}")));
        row.push(format!("{:e}", fr.tilt));
        row.push(format!("{:e}", geom.curvature[p].h2));
        row.push(format!("{:e}", geom.curvature[p].a2));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
