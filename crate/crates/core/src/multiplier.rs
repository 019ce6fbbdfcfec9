//! Discrete Lagrange-multiplier space: per-edge trace pairs (mu_t, mu_n)
//! subject to boundary-condition zeroing, free-component compatibility
//! integrals and corner coupling equations. The admissible space is realized
//! as the nullspace of the assembled constraint matrix.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{BcTag, GeometryPatch};
use crate::quadrature::GaussRule;
use crate::spline::{edge_trace_space, SplineSpace, TraceSpace};

/// Raw multiplier layout: for every edge k a tangential component mu_t^k and
/// a normal component mu_n^k, both coefficient vectors in the edge trace
/// space. Raw dofs are ordered edge by edge, mu_t block then mu_n block.
#[derive(Debug, Clone)]
pub struct MultiplierSpace {
    pub traces: Vec<Arc<TraceSpace>>,
    offsets_t: Vec<usize>,
    offsets_n: Vec<usize>,
    pub raw_dim: usize,
    pub geo: Arc<GeometryPatch>,
}

impl MultiplierSpace {
    pub fn new(space: &SplineSpace) -> Result<MultiplierSpace> {
        let mut traces = Vec::new();
        let mut offsets_t = Vec::new();
        let mut offsets_n = Vec::new();
        let mut off = 0;
        for e in space.geo.edges() {
            let t = edge_trace_space(space, e.index)?;
            offsets_t.push(off);
            offsets_n.push(off + t.n);
            off += 2 * t.n;
            traces.push(Arc::new(t));
        }
        Ok(MultiplierSpace {
            traces,
            offsets_t,
            offsets_n,
            raw_dim: off,
            geo: Arc::clone(&space.geo),
        })
    }

    pub fn num_edges(&self) -> usize {
        self.traces.len()
    }

    /// Raw index of coefficient d of mu_t on edge k.
    pub fn t_dof(&self, k: usize, d: usize) -> usize {
        debug_assert!(d < self.traces[k].n);
        self.offsets_t[k] + d
    }

    /// Raw index of coefficient d of mu_n on edge k.
    pub fn n_dof(&self, k: usize, d: usize) -> usize {
        debug_assert!(d < self.traces[k].n);
        self.offsets_n[k] + d
    }
}

/// A multiplier candidate in per-edge component form.
#[derive(Debug, Clone)]
pub struct MultiplierPrototype {
    pub mu_t: Vec<Vec<f64>>,
    pub mu_n: Vec<Vec<f64>>,
}

impl MultiplierPrototype {
    pub fn zero(space: &MultiplierSpace) -> MultiplierPrototype {
        MultiplierPrototype {
            mu_t: space.traces.iter().map(|t| vec![0.0; t.n]).collect(),
            mu_n: space.traces.iter().map(|t| vec![0.0; t.n]).collect(),
        }
    }

    pub fn pack(&self, space: &MultiplierSpace) -> Vec<f64> {
        let mut raw = vec![0.0; space.raw_dim];
        for k in 0..space.num_edges() {
            for (d, &v) in self.mu_t[k].iter().enumerate() {
                raw[space.t_dof(k, d)] = v;
            }
            for (d, &v) in self.mu_n[k].iter().enumerate() {
                raw[space.n_dof(k, d)] = v;
            }
        }
        raw
    }

    pub fn unpack(space: &MultiplierSpace, raw: &[f64]) -> MultiplierPrototype {
        let mut out = MultiplierPrototype::zero(space);
        for k in 0..space.num_edges() {
            for d in 0..space.traces[k].n {
                out.mu_t[k][d] = raw[space.t_dof(k, d)];
                out.mu_n[k][d] = raw[space.n_dof(k, d)];
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Condition 1: components zeroed by the boundary-condition tags.
    BcZero,
    /// Condition 2: integral of mu_t over a connected free component.
    Compatibility,
    /// Condition 3: endpoint coupling at a corner.
    Corner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintLocation {
    Edge(usize),
    Component(usize),
    Corner(usize),
}

/// One scalar linear constraint on the raw multiplier dofs.
#[derive(Debug, Clone)]
pub struct ConstraintRow {
    pub kind: ConstraintKind,
    pub location: ConstraintLocation,
    pub entries: Vec<(usize, f64)>,
}

impl ConstraintRow {
    pub fn apply(&self, raw: &[f64]) -> f64 {
        self.entries.iter().map(|&(j, c)| c * raw[j]).sum()
    }
}

/// All constraint rows defining the admissible multiplier space.
#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    pub ncols: usize,
    pub rows: Vec<ConstraintRow>,
}

/// Condition 1: mu_t = 0 on simply supported and clamped edges, mu_n = 0 on
/// clamped edges; one unit row per constrained coefficient.
pub fn bc_zero_constraints(space: &MultiplierSpace) -> Vec<ConstraintRow> {
    let mut rows = Vec::new();
    for (k, e) in space.geo.edges().iter().enumerate() {
        let n = space.traces[k].n;
        if matches!(e.tag, BcTag::SimplySupported | BcTag::Clamped) {
            for d in 0..n {
                rows.push(ConstraintRow {
                    kind: ConstraintKind::BcZero,
                    location: ConstraintLocation::Edge(k),
                    entries: vec![(space.t_dof(k, d), 1.0)],
                });
            }
        }
        if e.tag == BcTag::Clamped {
            for d in 0..n {
                rows.push(ConstraintRow {
                    kind: ConstraintKind::BcZero,
                    location: ConstraintLocation::Edge(k),
                    entries: vec![(space.n_dof(k, d), 1.0)],
                });
            }
        }
    }
    rows
}

/// Connected components of the free boundary: maximal cyclic runs of
/// consecutive free edges.
pub fn free_components(geo: &GeometryPatch) -> Vec<Vec<usize>> {
    let edges = geo.edges();
    let k = edges.len();
    let free: Vec<bool> = edges.iter().map(|e| e.tag == BcTag::Free).collect();
    if free.iter().all(|&f| f) {
        return vec![(0..k).collect()];
    }
    let mut comps = Vec::new();
    for start in 0..k {
        let prev = (start + k - 1) % k;
        if free[start] && !free[prev] {
            let mut comp = vec![start];
            let mut cur = (start + 1) % k;
            while free[cur] {
                comp.push(cur);
                cur = (cur + 1) % k;
            }
            comps.push(comp);
        }
    }
    comps
}

/// Condition 2: one row per free component C, sum over its edges of the
/// integral of mu_t; coefficients are edge-quadrature integrals of the trace
/// basis functions against arc length.
pub fn compatibility_constraints(space: &MultiplierSpace) -> Result<Vec<ConstraintRow>> {
    let mut rows = Vec::new();
    for (ci, comp) in free_components(&space.geo).into_iter().enumerate() {
        let mut entries = Vec::new();
        for &k in &comp {
            let trace = &space.traces[k];
            let rule = GaussRule::legendre(trace.knots.degree + 1);
            let mut coeffs = vec![0.0; trace.n];
            for (a, b, _) in trace.knots.spans() {
                for (sigma, w) in rule.mapped(a, b) {
                    let frame = space.geo.edge_frame(k, sigma)?;
                    let (first, vals, _) = trace.eval(sigma);
                    for (r, &v) in vals.iter().enumerate() {
                        coeffs[first + r] += w * frame.jacobian * v;
                    }
                }
            }
            for (d, &c) in coeffs.iter().enumerate() {
                entries.push((space.t_dof(k, d), c));
            }
        }
        rows.push(ConstraintRow {
            kind: ConstraintKind::Compatibility,
            location: ConstraintLocation::Component(ci),
            entries,
        });
    }
    Ok(rows)
}

/// Condition 3: two rows per corner coupling the four endpoint values.
///
/// For an interior angle different from pi the rows are
///   mu_t^{k-1}(a) + cos(w) mu_t^k(a) - sin(w) mu_n^k(a) = 0,
///   cos(w) mu_t^{k-1}(a) + sin(w) mu_n^{k-1}(a) + mu_t^k(a) = 0.
/// Smooth same-tag junctions (angle pi, as on the disk) impose continuity of
/// both components instead; smooth junctions with a tag change are rejected.
pub fn corner_constraints(space: &MultiplierSpace) -> Result<Vec<ConstraintRow>> {
    let mut rows = Vec::new();
    for corner in space.geo.corners() {
        let (kp, kn) = (corner.prev_edge, corner.next_edge);
        let tp = &space.traces[kp];
        let tn = &space.traces[kn];
        let prev_t_end = space.t_dof(kp, tp.ccw_end_local());
        let prev_n_end = space.n_dof(kp, tp.ccw_end_local());
        let next_t_start = space.t_dof(kn, tn.ccw_start_local());
        let next_n_start = space.n_dof(kn, tn.ccw_start_local());

        if corner.smooth {
            let tag_p = space.geo.edges()[kp].tag;
            let tag_n = space.geo.edges()[kn].tag;
            if tag_p != tag_n {
                return Err(Error::Unsupported(format!(
                    "corner {}: boundary-condition change at a smooth junction (angle pi)",
                    corner.index
                )));
            }
            rows.push(ConstraintRow {
                kind: ConstraintKind::Corner,
                location: ConstraintLocation::Corner(corner.index),
                entries: vec![(prev_t_end, 1.0), (next_t_start, -1.0)],
            });
            rows.push(ConstraintRow {
                kind: ConstraintKind::Corner,
                location: ConstraintLocation::Corner(corner.index),
                entries: vec![(prev_n_end, 1.0), (next_n_start, -1.0)],
            });
        } else {
            let (c, s) = (corner.angle.cos(), corner.angle.sin());
            rows.push(ConstraintRow {
                kind: ConstraintKind::Corner,
                location: ConstraintLocation::Corner(corner.index),
                entries: vec![(prev_t_end, 1.0), (next_t_start, c), (next_n_start, -s)],
            });
            rows.push(ConstraintRow {
                kind: ConstraintKind::Corner,
                location: ConstraintLocation::Corner(corner.index),
                entries: vec![(prev_t_end, c), (prev_n_end, s), (next_t_start, 1.0)],
            });
        }
    }
    Ok(rows)
}

/// Assembles all three constraint families.
pub fn constraint_matrix(space: &MultiplierSpace) -> Result<ConstraintMatrix> {
    let mut rows = bc_zero_constraints(space);
    rows.extend(compatibility_constraints(space)?);
    rows.extend(corner_constraints(space)?);
    Ok(ConstraintMatrix {
        ncols: space.raw_dim,
        rows,
    })
}

/// Nullspace basis of the constraint matrix: the admissible multiplier space.
#[derive(Debug, Clone)]
pub struct MultiplierBasis {
    pub space: MultiplierSpace,
    pub constraints: ConstraintMatrix,
    /// Sparse columns over raw dofs, in increasing free-dof order.
    pub columns: Vec<Vec<(usize, f64)>>,
    /// Rank of the constraint matrix.
    pub rank: usize,
}

impl MultiplierBasis {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn column_dense(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.space.raw_dim];
        for &(j, v) in &self.columns[m] {
            out[j] = v;
        }
        out
    }
}

/// Row-echelon elimination with partial pivoting; free columns generate the
/// basis in dof-index order. Rank tolerance is 1e-10 relative to the largest
/// pivot encountered.
pub fn nullspace_basis(space: MultiplierSpace, constraints: ConstraintMatrix) -> MultiplierBasis {
    let ncols = constraints.ncols;
    let nrows = constraints.rows.len();
    let mut a: Vec<Vec<f64>> = vec![vec![0.0; ncols]; nrows];
    for (r, row) in constraints.rows.iter().enumerate() {
        for &(j, c) in &row.entries {
            a[r][j] += c;
        }
    }

    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    let mut max_pivot = 0.0_f64;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        // Partial pivoting within the remaining rows.
        let (mut best_row, mut best_val) = (rank, 0.0);
        for r in rank..nrows {
            if a[r][col].abs() > best_val {
                best_val = a[r][col].abs();
                best_row = r;
            }
        }
        max_pivot = max_pivot.max(best_val);
        if best_val <= 1e-10 * max_pivot.max(1e-300) {
            continue;
        }
        a.swap(rank, best_row);
        let inv = 1.0 / a[rank][col];
        for c in col..ncols {
            a[rank][c] *= inv;
        }
        for r in 0..nrows {
            if r != rank && a[r][col] != 0.0 {
                let f = a[r][col];
                for c in col..ncols {
                    a[r][c] -= f * a[rank][c];
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }

    let is_pivot = {
        let mut v = vec![false; ncols];
        for &c in &pivot_cols {
            v[c] = true;
        }
        v
    };
    let mut columns = Vec::with_capacity(ncols - rank);
    for j in 0..ncols {
        if is_pivot[j] {
            continue;
        }
        let mut col = vec![(j, 1.0)];
        for (r, &pc) in pivot_cols.iter().enumerate() {
            let v = a[r][j];
            if v.abs() > 1e-14 {
                col.push((pc, -v));
            }
        }
        col.sort_by_key(|&(idx, _)| idx);
        columns.push(col);
    }

    MultiplierBasis {
        space,
        constraints,
        columns,
        rank,
    }
}

/// Convenience: full construction from a field space.
pub fn multiplier_basis(space: &SplineSpace) -> Result<MultiplierBasis> {
    let ms = MultiplierSpace::new(space)?;
    let cm = constraint_matrix(&ms)?;
    Ok(nullspace_basis(ms, cm))
}

/// One violated constraint in an admissibility check.
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ConstraintKind,
    pub location: ConstraintLocation,
    pub residual: f64,
}

/// Result of the admissibility oracle.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub max_residual: f64,
    pub violations: Vec<Violation>,
}

impl std::fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.admissible {
            return writeln!(f, "admissible (max residual {:.3e})", self.max_residual);
        }
        writeln!(
            f,
            "inadmissible: {} violated constraint(s), max residual {:.3e}",
            self.violations.len(),
            self.max_residual
        )?;
        for v in &self.violations {
            let kind = match v.kind {
                ConstraintKind::BcZero => "bc_zero",
                ConstraintKind::Compatibility => "compatibility",
                ConstraintKind::Corner => "corner",
            };
            let loc = match v.location {
                ConstraintLocation::Edge(k) => format!("edge {k}"),
                ConstraintLocation::Component(c) => format!("free component {c}"),
                ConstraintLocation::Corner(c) => format!("corner {c}"),
            };
            writeln!(f, "  {kind} at {loc}: residual {:.3e}", v.residual)?;
        }
        Ok(())
    }
}

/// Checks a prototype against all three condition families within `tol`.
pub fn is_admissible(
    space: &MultiplierSpace,
    constraints: &ConstraintMatrix,
    prototype: &MultiplierPrototype,
    tol: f64,
) -> AdmissibilityReport {
    let raw = prototype.pack(space);
    let mut violations = Vec::new();
    let mut max_residual = 0.0_f64;
    for row in &constraints.rows {
        let r = row.apply(&raw).abs();
        max_residual = max_residual.max(r);
        if r > tol {
            violations.push(Violation {
                kind: row.kind,
                location: row.location,
                residual: r,
            });
        }
    }
    AdmissibilityReport {
        admissible: violations.is_empty(),
        max_residual,
        violations,
    }
}
