//! Mesh quality and edge-length statistics: how well the actual edge lengths
//! track the target size field, plus the derived quantities used to predict
//! solver convergence (size-deviation exponent, bad-edge classification,
//! opposite-edge differences across interior edges).

use crate::error::{Error, Result};
use crate::sizing::SizeField;
use crate::triangulate::TriMesh;

/// Scale-invariant triangle shape quality from side lengths:
/// `(b+c-a)(c+a-b)(a+b-c) / (abc)`, which equals twice the inradius over the
/// circumradius. 1 for equilateral, 0 for degenerate (triangle inequality
/// tight or violated).
pub fn shape_quality(a: f64, b: f64, c: f64) -> Result<f64> {
    for s in [a, b, c] {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "side lengths must be positive and finite, got ({a}, {b}, {c})"
            )));
        }
    }
    let f1 = b + c - a;
    let f2 = c + a - b;
    let f3 = a + b - c;
    if f1 <= 0.0 || f2 <= 0.0 || f3 <= 0.0 {
        return Ok(0.0);
    }
    Ok((f1 * f2 * f3) / (a * b * c))
}

/// Edges whose length deviates from target worse than the size-deviation law
/// allows, with the aggregate measures that say whether they are sparse
/// enough not to spoil convergence.
#[derive(Debug, Clone)]
pub struct BadEdgeReport {
    /// Edge indices with `|l_e - target_e| > threshold_factor * target_e^(1+alpha)`.
    pub edges: Vec<usize>,
    /// Total area of triangles incident to flagged edges.
    pub area_sum: f64,
    /// Exponent implied by the incident-area measure: `ln(area_sum) / (2 ln h)`
    /// with `h` the mean edge target. 0 when nothing is flagged.
    pub sigma_area: f64,
    /// Exponent implied by the count measure: `ln(#flagged) / ln(#edges)`.
    /// 0 when nothing is flagged.
    pub sigma_count: f64,
    pub threshold_factor: f64,
    pub alpha: f64,
}

/// Per-mesh statistics against a size field.
#[derive(Debug, Clone)]
pub struct MeshReport {
    pub n_nodes: usize,
    pub n_tris: usize,
    pub n_edges: usize,
    /// Mean / minimum shape quality over triangles.
    pub q_avg: f64,
    pub q_min: f64,
    /// Edge-length statistics over unique edges: mean, population variance.
    pub edge_mean: f64,
    pub edge_var: f64,
    /// Mean absolute deviation from the per-edge target.
    pub h_err: f64,
    pub max_edge_err: f64,
    /// Mean of the per-edge targets (the local "h" that sigma estimates use).
    pub target_mean: f64,
    /// Mean absolute difference between opposite edges of the quadrilateral
    /// around each interior edge (small when triangle pairs form near
    /// parallelograms).
    pub opposite_edge_diff_mean: f64,
    pub bad_edges: BadEdgeReport,
}

/// Default flagging threshold factor for [`classify_bad_edges`].
pub const DEFAULT_BAD_EDGE_FACTOR: f64 = 3.0;
/// Default deviation exponent: edges are compared against an `h^2` law.
pub const DEFAULT_BAD_EDGE_ALPHA: f64 = 1.0;

/// Computes all mesh statistics for `mesh` against `size`.
pub fn mesh_report(mesh: &TriMesh, size: &SizeField) -> Result<MeshReport> {
    if mesh.n_tris() == 0 || mesh.edges.is_empty() {
        return Err(Error::EmptyMesh("mesh report needs a non-empty mesh".into()));
    }
    let mut q_sum = 0.0;
    let mut q_min = f64::INFINITY;
    for t in 0..mesh.n_tris() {
        let [p, q, r] = mesh.tri_points(t);
        let quality = shape_quality(p.dist(q), q.dist(r), r.dist(p))?;
        q_sum += quality;
        q_min = q_min.min(quality);
    }

    let ne = mesh.edges.len();
    let mut mean = 0.0;
    let mut h_err = 0.0;
    let mut max_err: f64 = 0.0;
    let mut target_sum = 0.0;
    let mut lengths = Vec::with_capacity(ne);
    for (e, edge) in mesh.edges.iter().enumerate() {
        let l = mesh.edge_length(e);
        let target = size.pair_target(mesh.nodes[edge.nodes[0]], mesh.nodes[edge.nodes[1]]);
        lengths.push(l);
        mean += l;
        target_sum += target;
        let err = (l - target).abs();
        h_err += err;
        max_err = max_err.max(err);
    }
    mean /= ne as f64;
    h_err /= ne as f64;
    let var = lengths.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / ne as f64;

    let mut opp_sum = 0.0;
    let mut opp_count = 0usize;
    for e in 0..ne {
        if let Some((c1, c2)) = mesh.opposite_vertices(e) {
            let [a, b] = mesh.edges[e].nodes;
            let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
            let (pc1, pc2) = (mesh.nodes[c1], mesh.nodes[c2]);
            // Quadrilateral a -> c1 -> b -> c2; opposite sides pair up as
            // (a,c1)/(b,c2) and (c1,b)/(c2,a).
            opp_sum += (pa.dist(pc1) - pb.dist(pc2)).abs();
            opp_sum += (pc1.dist(pb) - pc2.dist(pa)).abs();
            opp_count += 2;
        }
    }
    let opposite_edge_diff_mean = if opp_count > 0 {
        opp_sum / opp_count as f64
    } else {
        0.0
    };

    let bad_edges = classify_bad_edges(
        mesh,
        size,
        DEFAULT_BAD_EDGE_FACTOR,
        DEFAULT_BAD_EDGE_ALPHA,
    )?;

    Ok(MeshReport {
        n_nodes: mesh.n_nodes(),
        n_tris: mesh.n_tris(),
        n_edges: ne,
        q_avg: q_sum / mesh.n_tris() as f64,
        q_min,
        edge_mean: mean,
        edge_var: var,
        h_err,
        max_edge_err: max_err,
        target_mean: target_sum / ne as f64,
        opposite_edge_diff_mean,
        bad_edges,
    })
}

/// Flags edges deviating from target worse than
/// `threshold_factor * target^(1 + alpha)` and summarizes how much of the
/// mesh they touch. `alpha` is the size-deviation exponent the rest of the
/// mesh is believed to satisfy (estimate it from a refinement series with
/// [`estimate_alpha`], or use [`DEFAULT_BAD_EDGE_ALPHA`]).
pub fn classify_bad_edges(
    mesh: &TriMesh,
    size: &SizeField,
    threshold_factor: f64,
    alpha: f64,
) -> Result<BadEdgeReport> {
    if !(threshold_factor.is_finite() && threshold_factor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold factor must be positive, got {threshold_factor}"
        )));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "alpha must be finite, got {alpha}"
        )));
    }
    let mut flagged = Vec::new();
    let mut area_sum = 0.0;
    let mut target_sum = 0.0;
    for (e, edge) in mesh.edges.iter().enumerate() {
        let l = mesh.edge_length(e);
        let target = size.pair_target(mesh.nodes[edge.nodes[0]], mesh.nodes[edge.nodes[1]]);
        target_sum += target;
        if (l - target).abs() > threshold_factor * target.powf(1.0 + alpha) {
            flagged.push(e);
            for t in mesh.edges[e].tris.iter().flatten() {
                area_sum += mesh.tri_area(*t);
            }
        }
    }
    let h_mean = target_sum / mesh.edges.len() as f64;
    let (sigma_area, sigma_count) = if flagged.is_empty() {
        (0.0, 0.0)
    } else {
        let sa = if area_sum > 0.0 && h_mean > 0.0 && h_mean != 1.0 {
            area_sum.ln() / (2.0 * h_mean.ln())
        } else {
            0.0
        };
        let sc = if mesh.edges.len() > 1 {
            (flagged.len() as f64).ln() / (mesh.edges.len() as f64).ln()
        } else {
            0.0
        };
        (sa, sc)
    };
    Ok(BadEdgeReport {
        edges: flagged,
        area_sum,
        sigma_area,
        sigma_count,
        threshold_factor,
        alpha,
    })
}

/// Per-edge weights proportional to the local target length, normalized to
/// sum to 1 (the weighting that turns edge deviations into a mesh-level
/// average consistent with `h_err`).
pub fn lambda_weights(mesh: &TriMesh, size: &SizeField) -> Vec<f64> {
    let mut w: Vec<f64> = mesh
        .edges
        .iter()
        .map(|e| size.pair_target(mesh.nodes[e.nodes[0]], mesh.nodes[e.nodes[1]]))
        .collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        for x in &mut w {
            *x /= total;
        }
    }
    w
}

/// Fits `h_err = C * h^(1 + alpha)` over a refinement series by least squares
/// in log-log space and returns the estimated `alpha` (slope minus one).
/// Needs at least 3 levels. If any level has `h_err == 0` the deviation law
/// is satisfied to machine precision and `+inf` is returned as the sentinel.
pub fn estimate_alpha(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "alpha estimation needs at least 3 size levels, got {}",
            series.len()
        )));
    }
    for &(h, err) in series {
        if !(h.is_finite() && h > 0.0) || !err.is_finite() || err < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "bad series entry (h = {h}, h_err = {err})"
            )));
        }
    }
    if series.iter().any(|&(_, e)| e == 0.0) {
        return Ok(f64::INFINITY);
    }
    let n = series.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(h, err) in series {
        let x = h.ln();
        let y = err.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() <= 1e-12 * (n * sxx).abs().max(1e-300) {
        return Err(Error::InvalidArgument(
            "size levels are all equal; cannot fit a slope".into(),
        ));
    }
    let slope = (n * sxy - sx * sy) / denom;
    Ok(slope - 1.0)
}

/// Formats a value with 12 significant digits for CSV output; infinities and
/// NaNs become `inf` / `-inf` / `nan`.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.11e}")
    }
}

/// Header for the per-mesh statistics CSV.
pub const METRICS_CSV_HEADER: &str =
    "domain,h,N_nodes,N_tris,q_avg,q_min,edge_mean,edge_var,h_err,max_edge_err,n_bad_edges,alpha_hat";

/// One CSV row matching [`METRICS_CSV_HEADER`]. `alpha_hat` is the
/// series-level estimate (repeat it on each row of a series).
pub fn metrics_csv_row(domain: &str, h: f64, report: &MeshReport, alpha_hat: f64) -> String {
    format!(
        "{domain},{},{},{},{},{},{},{},{},{},{},{}",
        fmt_sig(h),
        report.n_nodes,
        report.n_tris,
        fmt_sig(report.q_avg),
        fmt_sig(report.q_min),
        fmt_sig(report.edge_mean),
        fmt_sig(report.edge_var),
        fmt_sig(report.h_err),
        fmt_sig(report.max_edge_err),
        report.bad_edges.edges.len(),
        fmt_sig(alpha_hat),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec2::Vec2;
    use proptest::prelude::*;

    #[test]
    fn quality_reference_values() {
        assert_eq!(shape_quality(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(shape_quality(1.0, 1.0, 2.0).unwrap(), 0.0);
        assert!((shape_quality(3.0, 4.0, 5.0).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(shape_quality(1.0, 1.0, 3.0).unwrap(), 0.0);
        assert!(shape_quality(-1.0, 1.0, 1.0).is_err());
        assert!(shape_quality(0.0, 1.0, 1.0).is_err());
        assert!(shape_quality(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn single_equilateral_triangle_report() {
        let h = 0.1;
        let nodes = vec![
            Vec2::ZERO,
            Vec2::new(h, 0.0),
            Vec2::new(0.5 * h, 0.5 * 3.0_f64.sqrt() * h),
        ];
        let mesh = TriMesh::new(nodes, vec![[0, 1, 2]]).unwrap();
        let size = SizeField::constant(h).unwrap();
        let r = mesh_report(&mesh, &size).unwrap();
        assert!((r.q_avg - 1.0).abs() < 1e-12);
        assert!(r.h_err < 1e-15);
        assert!(r.max_edge_err < 1e-15);
        assert!((r.edge_mean - h).abs() < 1e-15);
        assert!(r.edge_var < 1e-30);
        assert!(r.bad_edges.edges.is_empty());
        assert_eq!(r.bad_edges.sigma_area, 0.0);
        assert_eq!(r.bad_edges.sigma_count, 0.0);
    }

    #[test]
    fn structured_mesh_opposite_edges_cancel() {
        let mesh = TriMesh::structured_unit_square(8).unwrap();
        let size = SizeField::constant(0.125).unwrap();
        let r = mesh_report(&mesh, &size).unwrap();
        // Uniform structured mesh: opposite quad edges are congruent.
        assert!(r.opposite_edge_diff_mean < 1e-14);
        // Right triangles: q = (2r_in)/r_out for the 1:1:sqrt(2) triangle.
        let q = shape_quality(1.0, 1.0, 2.0_f64.sqrt()).unwrap();
        assert!((r.q_avg - q).abs() < 1e-12);
        assert!((r.q_min - q).abs() < 1e-12);
    }

    #[test]
    fn bad_edge_flagging() {
        // A 2-triangle strip where one edge is stretched far off target.
        let nodes = vec![
            Vec2::ZERO,
            Vec2::new(0.1, 0.0),
            Vec2::new(0.05, 0.0866),
            Vec2::new(0.15, 0.30), // pulls two edges long
        ];
        let mesh = TriMesh::new(nodes, vec![[0, 1, 2], [1, 3, 2]]).unwrap();
        let size = SizeField::constant(0.1).unwrap();
        let report = classify_bad_edges(&mesh, &size, 3.0, 1.0).unwrap();
        assert!(!report.edges.is_empty());
        assert!(report.area_sum > 0.0);
        assert!(report.sigma_area > 0.0);
        assert!(report.sigma_count > 0.0);
        // Thresholds must be sane.
        assert!(classify_bad_edges(&mesh, &size, 0.0, 1.0).is_err());
        assert!(classify_bad_edges(&mesh, &size, 3.0, f64::NAN).is_err());
    }

    #[test]
    fn lambda_weights_normalized() {
        let mesh = TriMesh::structured_unit_square(4).unwrap();
        let size = SizeField::constant(0.25).unwrap();
        let w = lambda_weights(&mesh, &size);
        assert_eq!(w.len(), mesh.edges.len());
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn alpha_estimation() {
        // h_err = h^2 exactly: slope 2, alpha 1.
        let series: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.025]
            .iter()
            .map(|&h| (h, h * h))
            .collect();
        assert!((estimate_alpha(&series).unwrap() - 1.0).abs() < 1e-12);
        // h_err = 0.5 h: slope 1, alpha 0.
        let flat: Vec<(f64, f64)> = [0.2, 0.1, 0.05].iter().map(|&h| (h, 0.5 * h)).collect();
        assert!(estimate_alpha(&flat).unwrap().abs() < 1e-12);
        // Perfect meshes: sentinel.
        let perfect = vec![(0.2, 0.0), (0.1, 0.0), (0.05, 0.0)];
        assert_eq!(estimate_alpha(&perfect).unwrap(), f64::INFINITY);
        assert!(estimate_alpha(&[(0.2, 0.1), (0.1, 0.05)]).is_err());
        assert!(estimate_alpha(&[(0.1, 0.1), (0.1, 0.1), (0.1, 0.1)]).is_err());
    }

    #[test]
    fn csv_row_formatting() {
        let mesh = TriMesh::structured_unit_square(2).unwrap();
        let size = SizeField::constant(0.5).unwrap();
        let r = mesh_report(&mesh, &size).unwrap();
        let row = metrics_csv_row("unit_square", 0.5, &r, 1.0);
        assert_eq!(row.split(',').count(), METRICS_CSV_HEADER.split(',').count());
        assert!(row.starts_with("unit_square,5.00000000000e-1,9,8,"));
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }

    proptest! {
        #[test]
        fn quality_permutation_and_scale_invariant(
            a in 0.1..10.0f64, b in 0.1..10.0f64, c in 0.1..10.0f64, s in 0.1..100.0f64
        ) {
            let q0 = shape_quality(a, b, c).unwrap();
            for (x, y, z) in [(a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                let q = shape_quality(x, y, z).unwrap();
                prop_assert!((q - q0).abs() < 1e-12);
            }
            let qs = shape_quality(s * a, s * b, s * c).unwrap();
            prop_assert!((qs - q0).abs() < 1e-9 * q0.max(1.0));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&q0));
        }
    }
}
