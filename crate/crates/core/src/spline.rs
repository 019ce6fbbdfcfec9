//! Scalar B-spline/NURBS discretization spaces on a geometry patch:
//! maximum-smoothness spaces of degree p at dyadic refinement level L,
//! Dirichlet-constrained subspaces, and edge trace spaces.

use std::sync::Arc;

use crate::bspline::{refine_to, KnotVector};
use crate::error::{Error, Result};
use crate::geometry::{BcTag, GeometryPatch, Side};
use crate::linalg::solve_dense;
use crate::quadrature::GaussRule;

/// Tensor-product field space of degree p, level L on a geometry patch.
///
/// On a rational geometry with p >= geometry degree the basis is rational
/// with the geometry's weight function (weights carried over by exact degree
/// elevation and knot insertion). Otherwise the basis is plain polynomial
/// B-splines composed with the exact geometry map.
#[derive(Debug, Clone)]
pub struct SplineSpace {
    pub degree: usize,
    pub level: usize,
    pub knots: KnotVector,
    /// Dofs per direction (2^L + p).
    pub n1: usize,
    weights: Option<Vec<f64>>,
    pub geo: Arc<GeometryPatch>,
}

/// Active basis data at one parameter point: values and physical gradients.
#[derive(Debug, Clone)]
pub struct BasisEval {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
    pub point: [f64; 2],
    pub det_j: f64,
    pub jac: [[f64; 2]; 2],
}

/// Builds the field space of degree p >= 1 at level L >= 0.
pub fn build_space(geo: &Arc<GeometryPatch>, p: usize, level: usize) -> Result<Arc<SplineSpace>> {
    if p < 1 {
        return Err(Error::InvalidArgument("degree must be >= 1".into()));
    }
    let knots = KnotVector::open_uniform(p, level);
    let n1 = knots.num_basis();
    let weights = if geo.is_rational() {
        let gdeg = geo.degrees();
        if p >= gdeg[0].max(gdeg[1]) {
            Some(refine_weight_grid(geo, p, level)?)
        } else {
            // No rational basis of lower degree carries the geometry weight
            // function; fall back to polynomial splines on the exact map.
            None
        }
    } else {
        None
    };
    Ok(Arc::new(SplineSpace {
        degree: p,
        level,
        knots,
        n1,
        weights,
        geo: Arc::clone(geo),
    }))
}

/// Expresses the biquadratic (or lower) geometry weight function in the
/// refined tensor basis; exact by elevation + insertion.
fn refine_weight_grid(geo: &GeometryPatch, p: usize, level: usize) -> Result<Vec<f64>> {
    let (ku, kv) = geo.knots();
    let (_, w) = geo.control_net();
    let single = |k: &KnotVector| k.knots.iter().all(|&x| x == 0.0 || x == 1.0);
    if !single(ku) || !single(kv) {
        return Err(Error::Unsupported(
            "rational field spaces require a single-span geometry patch".into(),
        ));
    }
    Ok(refine_surface(ku, kv, w, p, level))
}

/// Tensor refinement of a coefficient grid (j-major) from single-span
/// directions to the open uniform (p, level) space in both directions.
fn refine_surface(
    ku: &KnotVector,
    kv: &KnotVector,
    grid: &[f64],
    p: usize,
    level: usize,
) -> Vec<f64> {
    let nu = ku.num_basis();
    let nv = kv.num_basis();
    let n1 = KnotVector::open_uniform(p, level).num_basis();
    // Refine rows (u direction).
    let mut mid = vec![0.0; n1 * nv];
    for j in 0..nv {
        let row: Vec<f64> = (0..nu).map(|i| grid[j * nu + i]).collect();
        let fine = refine_to(ku, &row, p, level);
        for i in 0..n1 {
            mid[j * n1 + i] = fine[i];
        }
    }
    // Refine columns (v direction).
    let mut out = vec![0.0; n1 * n1];
    for i in 0..n1 {
        let col: Vec<f64> = (0..nv).map(|j| mid[j * n1 + i]).collect();
        let fine = refine_to(kv, &col, p, level);
        for j in 0..n1 {
            out[j * n1 + i] = fine[j];
        }
    }
    out
}

impl SplineSpace {
    pub fn dim(&self) -> usize {
        self.n1 * self.n1
    }

    pub fn dof(&self, i: usize, j: usize) -> usize {
        j * self.n1 + i
    }

    pub fn is_rational(&self) -> bool {
        self.weights.is_some()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Values and physical gradients of the active basis functions at a
    /// parameter point, pushed through the geometry Jacobian.
    pub fn eval_basis(&self, u: f64, v: f64) -> Result<BasisEval> {
        let bu = self.knots.eval(u);
        let bv = self.knots.eval(v);
        self.combine(
            u,
            v,
            bu.first,
            &bu.values,
            &bu.derivs,
            bv.first,
            &bv.values,
            &bv.derivs,
        )
    }

    /// Same as [`eval_basis`] but from precomputed univariate tables.
    #[allow(clippy::too_many_arguments)]
    pub fn combine(
        &self,
        u: f64,
        v: f64,
        first_u: usize,
        vals_u: &[f64],
        ders_u: &[f64],
        first_v: usize,
        vals_v: &[f64],
        ders_v: &[f64],
    ) -> Result<BasisEval> {
        let m = vals_u.len() * vals_v.len();
        let mut dofs = Vec::with_capacity(m);
        let mut values = Vec::with_capacity(m);
        let mut grads_param = Vec::with_capacity(m);
        for (b, &nv) in vals_v.iter().enumerate() {
            let j = first_v + b;
            for (a, &nu) in vals_u.iter().enumerate() {
                let i = first_u + a;
                dofs.push(self.dof(i, j));
                values.push(nu * nv);
                grads_param.push([ders_u[a] * nv, nu * ders_v[b]]);
            }
        }

        if let Some(w) = &self.weights {
            // Rational correction: R = N w / W with W summed over the active
            // functions (all others vanish here).
            let mut wsum = 0.0;
            let mut wgrad = [0.0, 0.0];
            for k in 0..m {
                let wk = w[dofs[k]];
                wsum += values[k] * wk;
                wgrad[0] += grads_param[k][0] * wk;
                wgrad[1] += grads_param[k][1] * wk;
            }
            let inv = 1.0 / wsum;
            for k in 0..m {
                let wk = w[dofs[k]];
                let r = values[k] * wk * inv;
                grads_param[k] = [
                    (wk * grads_param[k][0] - r * wgrad[0]) * inv,
                    (wk * grads_param[k][1] - r * wgrad[1]) * inv,
                ];
                values[k] = r;
            }
        }

        let (point, jac) = self.geo.eval_with_jacobian(u, v);
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let scale = jac[0][0] * jac[0][0]
            + jac[0][1] * jac[0][1]
            + jac[1][0] * jac[1][0]
            + jac[1][1] * jac[1][1];
        if !(det.abs() > 1e-14 * scale) {
            return Err(Error::SingularJacobian(u, v));
        }
        let inv_det = 1.0 / det;
        let grads = grads_param
            .iter()
            .map(|g| {
                [
                    (jac[1][1] * g[0] - jac[1][0] * g[1]) * inv_det,
                    (-jac[0][1] * g[0] + jac[0][0] * g[1]) * inv_det,
                ]
            })
            .collect();
        Ok(BasisEval {
            dofs,
            values,
            grads,
            point,
            det_j: det,
            jac,
        })
    }

    /// Values only (no geometry pushforward); well-defined even where the
    /// geometry map degenerates. Returns active dofs and basis values.
    pub fn eval_values(&self, u: f64, v: f64) -> (Vec<usize>, Vec<f64>) {
        let bu = self.knots.eval(u);
        let bv = self.knots.eval(v);
        let m = bu.values.len() * bv.values.len();
        let mut dofs = Vec::with_capacity(m);
        let mut values = Vec::with_capacity(m);
        for (b, &nv) in bv.values.iter().enumerate() {
            for (a, &nu) in bu.values.iter().enumerate() {
                dofs.push(self.dof(bu.first + a, bv.first + b));
                values.push(nu * nv);
            }
        }
        if let Some(w) = &self.weights {
            let wsum: f64 = dofs.iter().zip(&values).map(|(&d, &v)| v * w[d]).sum();
            for (k, &d) in dofs.iter().enumerate() {
                values[k] *= w[d] / wsum;
            }
        }
        (dofs, values)
    }

    /// Field value of a coefficient vector (no gradient, no Jacobian needed).
    pub fn eval_value(&self, coeffs: &[f64], u: f64, v: f64) -> f64 {
        let (dofs, values) = self.eval_values(u, v);
        dofs.iter().zip(&values).map(|(&d, &v)| coeffs[d] * v).sum()
    }

    /// Value and physical gradient of a coefficient vector at a parameter point.
    pub fn eval_field(&self, coeffs: &[f64], u: f64, v: f64) -> Result<(f64, [f64; 2])> {
        let b = self.eval_basis(u, v)?;
        let mut val = 0.0;
        let mut grad = [0.0, 0.0];
        for (k, &dof) in b.dofs.iter().enumerate() {
            let c = coeffs[dof];
            val += c * b.values[k];
            grad[0] += c * b.grads[k][0];
            grad[1] += c * b.grads[k][1];
        }
        Ok((val, grad))
    }

    /// Coefficients of the constant 1 and, when representable, of the
    /// physical coordinate functions x and y.
    pub fn linear_coeffs(&self) -> (Vec<f64>, Option<(Vec<f64>, Vec<f64>)>) {
        let ones = vec![1.0; self.dim()];
        let gdeg = self.geo.degrees();
        let (ku, kv) = self.geo.knots();
        let single = |k: &KnotVector| k.knots.iter().all(|&x| x == 0.0 || x == 1.0);
        if self.degree < gdeg[0].max(gdeg[1]) || !single(ku) || !single(kv) {
            return (ones, None);
        }
        if self.geo.is_rational() && !self.is_rational() {
            return (ones, None);
        }
        let (ctrl, w) = self.geo.control_net();
        let wx: Vec<f64> = ctrl.iter().zip(w).map(|(p, &w)| p[0] * w).collect();
        let wy: Vec<f64> = ctrl.iter().zip(w).map(|(p, &w)| p[1] * w).collect();
        let fx = refine_surface(ku, kv, &wx, self.degree, self.level);
        let fy = refine_surface(ku, kv, &wy, self.degree, self.level);
        match &self.weights {
            Some(fw) => {
                let x = fx.iter().zip(fw).map(|(a, b)| a / b).collect();
                let y = fy.iter().zip(fw).map(|(a, b)| a / b).collect();
                (ones, Some((x, y)))
            }
            None => (ones, Some((fx, fy))),
        }
    }

    /// Greville interpolant of a function given in physical coordinates.
    /// Collocation solve; tensor sweeps for polynomial bases, a full dense
    /// solve for rational ones (test/diagnostic scale).
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
        let g = self.knots.greville();
        let n = self.n1;
        let data: Vec<f64> = {
            let mut d = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    let p = self.geo.eval_map(g[i], g[j]);
                    d.push(f(p[0], p[1]));
                }
            }
            d
        };
        if self.weights.is_none() {
            // Tensor-product sweeps with the univariate collocation matrix.
            let coll: Vec<Vec<f64>> = g
                .iter()
                .map(|&x| {
                    let b = self.knots.eval(x);
                    let mut row = vec![0.0; n];
                    for (r, &v) in b.values.iter().enumerate() {
                        row[b.first + r] = v;
                    }
                    row
                })
                .collect();
            let mut mid = vec![0.0; n * n];
            for j in 0..n {
                let rhs: Vec<f64> = (0..n).map(|i| data[j * n + i]).collect();
                let sol = solve_dense(coll.clone(), rhs)?;
                for i in 0..n {
                    mid[j * n + i] = sol[i];
                }
            }
            let mut out = vec![0.0; n * n];
            for i in 0..n {
                let rhs: Vec<f64> = (0..n).map(|j| mid[j * n + i]).collect();
                let sol = solve_dense(coll.clone(), rhs)?;
                for j in 0..n {
                    out[j * n + i] = sol[j];
                }
            }
            Ok(out)
        } else {
            let dim = self.dim();
            let mut a = vec![vec![0.0; dim]; dim];
            for j in 0..n {
                for i in 0..n {
                    let (dofs, values) = self.eval_values(g[i], g[j]);
                    let row = j * n + i;
                    for (k, &dof) in dofs.iter().enumerate() {
                        a[row][dof] = values[k];
                    }
                }
            }
            solve_dense(a, data)
        }
    }
}

/// Dirichlet-constrained subspace: dofs on edges tagged clamped or simply
/// supported are removed (open knot ends make boundary dofs identifiable).
#[derive(Debug, Clone)]
pub struct ConstrainedSpace {
    pub space: Arc<SplineSpace>,
    pub free_dofs: Vec<usize>,
    pub global_to_free: Vec<Option<usize>>,
}

/// Global dof indices whose basis functions are nonzero on the closed side.
pub fn side_dofs(space: &SplineSpace, side: Side) -> Vec<usize> {
    let n = space.n1;
    match side {
        Side::South => (0..n).map(|i| space.dof(i, 0)).collect(),
        Side::East => (0..n).map(|j| space.dof(n - 1, j)).collect(),
        Side::North => (0..n).map(|i| space.dof(i, n - 1)).collect(),
        Side::West => (0..n).map(|j| space.dof(0, j)).collect(),
    }
}

/// Builds the subspace of functions vanishing on all clamped and simply
/// supported edges.
pub fn constrain_dirichlet(space: &Arc<SplineSpace>) -> Result<ConstrainedSpace> {
    let mut constrained = vec![false; space.dim()];
    for e in space.geo.edges() {
        if e.tag == BcTag::Free {
            continue;
        }
        if !e.covers_full_side() {
            return Err(Error::Unsupported(
                "Dirichlet constraints on partial-side edges are not supported".into(),
            ));
        }
        for d in side_dofs(space, e.side) {
            constrained[d] = true;
        }
    }
    let mut free_dofs = Vec::new();
    let mut global_to_free = vec![None; space.dim()];
    for d in 0..space.dim() {
        if !constrained[d] {
            global_to_free[d] = Some(free_dofs.len());
            free_dofs.push(d);
        }
    }
    Ok(ConstrainedSpace {
        space: Arc::clone(space),
        free_dofs,
        global_to_free,
    })
}

impl ConstrainedSpace {
    pub fn n_free(&self) -> usize {
        self.free_dofs.len()
    }

    /// Scatters free coefficients into a full coefficient vector (zeros on
    /// constrained dofs).
    pub fn inject(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.space.dim()];
        for (k, &d) in self.free_dofs.iter().enumerate() {
            full[d] = free[k];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free_dofs.iter().map(|&d| full[d]).collect()
    }
}

/// Univariate restriction of the field space to one boundary edge,
/// S_h(E_k) = { v|_{E_k} : v in S_h }; dofs ordered by increasing side
/// coordinate, with the volume dof carrying each trace dof recorded.
#[derive(Debug, Clone)]
pub struct TraceSpace {
    pub edge: usize,
    pub side: Side,
    pub knots: KnotVector,
    pub n: usize,
    weights: Option<Vec<f64>>,
    pub volume_dofs: Vec<usize>,
    pub ccw_sign: f64,
}

pub fn edge_trace_space(space: &SplineSpace, edge: usize) -> Result<TraceSpace> {
    let e = &space.geo.edges()[edge];
    if !e.covers_full_side() {
        return Err(Error::Unsupported(
            "trace spaces on partial-side edges are not supported".into(),
        ));
    }
    let volume_dofs = side_dofs(space, e.side);
    let weights = space
        .weights
        .as_ref()
        .map(|w| volume_dofs.iter().map(|&d| w[d]).collect());
    Ok(TraceSpace {
        edge,
        side: e.side,
        knots: space.knots.clone(),
        n: space.n1,
        weights,
        volume_dofs,
        ccw_sign: e.side.ccw_sign(),
    })
}

impl TraceSpace {
    /// Values and side-coordinate derivatives of the active trace basis
    /// functions at sigma.
    pub fn eval(&self, sigma: f64) -> (usize, Vec<f64>, Vec<f64>) {
        let b = self.knots.eval(sigma);
        match &self.weights {
            None => (b.first, b.values, b.derivs),
            Some(w) => {
                let m = b.values.len();
                let mut wsum = 0.0;
                let mut wder = 0.0;
                for k in 0..m {
                    let wk = w[b.first + k];
                    wsum += b.values[k] * wk;
                    wder += b.derivs[k] * wk;
                }
                let inv = 1.0 / wsum;
                let mut vals = Vec::with_capacity(m);
                let mut ders = Vec::with_capacity(m);
                for k in 0..m {
                    let wk = w[b.first + k];
                    let r = b.values[k] * wk * inv;
                    ders.push((wk * b.derivs[k] - r * wder) * inv);
                    vals.push(r);
                }
                (b.first, vals, ders)
            }
        }
    }

    /// Trace value and side-coordinate derivative of a coefficient vector.
    pub fn eval_coeffs(&self, coeffs: &[f64], sigma: f64) -> (f64, f64) {
        let (first, vals, ders) = self.eval(sigma);
        let mut v = 0.0;
        let mut d = 0.0;
        for k in 0..vals.len() {
            v += coeffs[first + k] * vals[k];
            d += coeffs[first + k] * ders[k];
        }
        (v, d)
    }

    /// Local index of the dof interpolatory at the ccw start corner.
    pub fn ccw_start_local(&self) -> usize {
        if self.ccw_sign > 0.0 {
            0
        } else {
            self.n - 1
        }
    }

    pub fn ccw_end_local(&self) -> usize {
        if self.ccw_sign > 0.0 {
            self.n - 1
        } else {
            0
        }
    }

    /// Greville interpolant of a function of the side coordinate.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let g = self.knots.greville();
        let n = self.n;
        let mut a = vec![vec![0.0; n]; n];
        let mut b = vec![0.0; n];
        for (r, &x) in g.iter().enumerate() {
            let (first, vals, _) = self.eval(x);
            for (k, &v) in vals.iter().enumerate() {
                a[r][first + k] = v;
            }
            b[r] = f(x);
        }
        solve_dense(a, b)
    }
}

/// Arc-length derivative d/dt (t the ccw unit tangent) of the trace of basis
/// function `local_dof` of the edge's trace space at side coordinate sigma.
pub fn edge_tangential_derivative(
    space: &SplineSpace,
    edge: usize,
    local_dof: usize,
    sigma: f64,
) -> Result<f64> {
    let trace = edge_trace_space(space, edge)?;
    let frame = space.geo.edge_frame(edge, sigma)?;
    let (first, _, ders) = trace.eval(sigma);
    let d = if local_dof >= first && local_dof < first + ders.len() {
        ders[local_dof - first]
    } else {
        0.0
    };
    Ok(trace.ccw_sign * d / frame.jacobian)
}

/// Per-span univariate quadrature tables: Gauss points with basis values and
/// derivatives, reused across all assembly loops.
#[derive(Debug, Clone)]
pub struct SpanTables {
    pub spans: Vec<SpanTable>,
}

#[derive(Debug, Clone)]
pub struct SpanTable {
    pub a: f64,
    pub b: f64,
    pub points: Vec<TablePoint>,
}

#[derive(Debug, Clone)]
pub struct TablePoint {
    pub x: f64,
    pub weight: f64,
    pub first: usize,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

pub fn tabulate(knots: &KnotVector, rule: &GaussRule) -> SpanTables {
    let spans = knots
        .spans()
        .into_iter()
        .map(|(a, b, _)| {
            let points = rule
                .mapped(a, b)
                .map(|(x, w)| {
                    let bv = knots.eval(x);
                    TablePoint {
                        x,
                        weight: w,
                        first: bv.first,
                        values: bv.values,
                        derivs: bv.derivs,
                    }
                })
                .collect();
            SpanTable { a, b, points }
        })
        .collect();
    SpanTables { spans }
}
