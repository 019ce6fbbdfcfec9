//! Assembly of all sparse forms: the Poisson stiffness on the constrained
//! space, the symCurl form in the C^-1 inner product on vector splines, the
//! pressure/symCurl coupling, the boundary pairings with the multiplier
//! basis, kernel orthogonality rows and load vectors.
//!
//! Vector-spline dofs interleave components: dof (j, c) -> 2 j + c.
//! Quadrature is p+1 Gauss points per knot span and direction; cells are
//! processed in parallel with per-cell buffers concatenated in cell order,
//! so results do not depend on the thread count.

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::BcTag;
use crate::material::{IsotropicMaterial, Mat2};
use crate::multiplier::MultiplierBasis;
use crate::quadrature::GaussRule;
use crate::sparse::{CsrMatrix, Triplets};
use crate::spline::{tabulate, BasisEval, ConstrainedSpace, SplineSpace};

/// All matrices and vectors of the three stages for one discretization.
#[derive(Debug, Clone)]
pub struct AssembledForms {
    /// Poisson stiffness on the free dofs of the constrained space.
    pub k_pp: CsrMatrix,
    /// (symCurl phi_i, symCurl phi_j)_{C^-1} on vector splines (2N x 2N).
    pub a_phiphi: CsrMatrix,
    /// (B_i I, symCurl Phi_j)_{C^-1} over full scalar dofs (N x 2N).
    pub b_pphi: CsrMatrix,
    /// (B_i I, B_j I)_{C^-1} = 2/(D(1+nu)) mass matrix (N x N).
    pub t_pp: CsrMatrix,
    /// l_phi(Phi_j, lambda_m) over the multiplier basis (m x 2N).
    pub l_phi: CsrMatrix,
    /// l_p(B_i, lambda_m) over full scalar dofs (m x N).
    pub l_p: CsrMatrix,
    /// Orthogonality rows fixing the symCurl kernel (dense over 2N).
    pub rt0_rows: Vec<Vec<f64>>,
    /// Load functional on the free dofs.
    pub f_vec: Vec<f64>,
}

/// Runs `kernel` over every volume quadrature point, merging per-cell-row
/// triplet buffers deterministically.
fn assemble_volume<K>(
    space: &SplineSpace,
    nq: usize,
    nrows: usize,
    ncols: usize,
    kernel: K,
) -> Result<CsrMatrix>
where
    K: Fn(&BasisEval, f64, &mut Triplets) + Sync,
{
    let rule = GaussRule::legendre(nq);
    let tables = tabulate(&space.knots, &rule);
    let spans = &tables.spans;
    let buffers: Result<Vec<Triplets>> = spans
        .par_iter()
        .map(|span_v| {
            let mut t = Triplets::new(nrows, ncols);
            for span_u in spans.iter() {
                for qv in &span_v.points {
                    for qu in &span_u.points {
                        let be = space.combine(
                            qu.x, qv.x, qu.first, &qu.values, &qu.derivs, qv.first, &qv.values,
                            &qv.derivs,
                        )?;
                        let w = qu.weight * qv.weight * be.det_j;
                        kernel(&be, w, &mut t);
                    }
                }
            }
            Ok(t)
        })
        .collect();
    let mut all = Triplets::new(nrows, ncols);
    for b in buffers? {
        all.append(b);
    }
    Ok(all.into_csr())
}

/// Stiffness matrix (grad B_i, grad B_j) on the free dofs.
pub fn assemble_poisson(cs: &ConstrainedSpace, nq: usize) -> Result<CsrMatrix> {
    let space = &cs.space;
    let nf = cs.n_free();
    assemble_volume(space, nq, nf, nf, |be, w, t| {
        for (a, &da) in be.dofs.iter().enumerate() {
            let Some(fa) = cs.global_to_free[da] else {
                continue;
            };
            let ga = be.grads[a];
            for (b, &db) in be.dofs.iter().enumerate() {
                if let Some(fb) = cs.global_to_free[db] {
                    let gb = be.grads[b];
                    t.push(fa, fb, w * (ga[0] * gb[0] + ga[1] * gb[1]));
                }
            }
        }
    })
}

/// Load vector (f, B_i) on the free dofs; f takes physical coordinates.
pub fn assemble_load(
    cs: &ConstrainedSpace,
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    nq: usize,
) -> Result<Vec<f64>> {
    let space = &cs.space;
    let m = assemble_volume(space, nq, cs.n_free(), 1, |be, w, t| {
        let fx = f(be.point[0], be.point[1]);
        if fx != 0.0 {
            for (a, &da) in be.dofs.iter().enumerate() {
                if let Some(fa) = cs.global_to_free[da] {
                    t.push(fa, 0, w * fx * be.values[a]);
                }
            }
        }
    })?;
    let mut out = vec![0.0; cs.n_free()];
    for i in 0..cs.n_free() {
        let (_, vals) = m.row(i);
        if let Some(&v) = vals.first() {
            out[i] = v;
        }
    }
    Ok(out)
}

/// symCurl of the vector basis function (B e_c) given the scalar gradient.
fn sym_curl_of_component(grad: [f64; 2], c: usize) -> Mat2 {
    // Curl of (B, 0) is [[gy, -gx], [0, 0]]; of (0, B) it is [[0,0],[gy,-gx]].
    if c == 0 {
        Mat2([[grad[1], -0.5 * grad[0]], [-0.5 * grad[0], 0.0]])
    } else {
        Mat2([[0.0, 0.5 * grad[1]], [0.5 * grad[1], -grad[0]]])
    }
}

/// tr(symCurl (B e_c)).
fn sym_curl_trace_of_component(grad: [f64; 2], c: usize) -> f64 {
    if c == 0 {
        grad[1]
    } else {
        -grad[0]
    }
}

/// (symCurl Phi_i, symCurl Phi_j)_{C^-1} on the full vector space.
pub fn assemble_symcurl_form(
    space: &SplineSpace,
    material: &IsotropicMaterial,
    nq: usize,
) -> Result<CsrMatrix> {
    let nv = 2 * space.dim();
    assemble_volume(space, nq, nv, nv, |be, w, t| {
        let na = be.dofs.len();
        let mut curls = Vec::with_capacity(2 * na);
        let mut cinv = Vec::with_capacity(2 * na);
        for a in 0..na {
            for c in 0..2 {
                let s = sym_curl_of_component(be.grads[a], c);
                curls.push(s);
                cinv.push(material.apply_c_inverse(&s));
            }
        }
        for a in 0..2 * na {
            let row = 2 * be.dofs[a / 2] + (a % 2);
            for b in 0..2 * na {
                let col = 2 * be.dofs[b / 2] + (b % 2);
                t.push(row, col, w * cinv[a].dot(&curls[b]));
            }
        }
    })
}

/// (B_i I, symCurl Phi_j)_{C^-1} with the isotropic identity
/// C^-1(q I) = q/(D(1+nu)) I; rows over full scalar dofs.
pub fn assemble_coupling(
    space: &SplineSpace,
    material: &IsotropicMaterial,
    nq: usize,
) -> Result<CsrMatrix> {
    let n = space.dim();
    let scale = material.c_inverse_identity_scale();
    assemble_volume(space, nq, n, 2 * n, |be, w, t| {
        for (a, &da) in be.dofs.iter().enumerate() {
            let va = w * scale * be.values[a];
            for (b, &db) in be.dofs.iter().enumerate() {
                for c in 0..2 {
                    let tr = sym_curl_trace_of_component(be.grads[b], c);
                    t.push(da, 2 * db + c, va * tr);
                }
            }
        }
    })
}

/// (B_i I, B_j I)_{C^-1} = 2/(D(1+nu)) (B_i, B_j); rows over full scalar dofs.
pub fn assemble_tr_mass(
    space: &SplineSpace,
    material: &IsotropicMaterial,
    nq: usize,
) -> Result<CsrMatrix> {
    let n = space.dim();
    let scale = 2.0 * material.c_inverse_identity_scale();
    assemble_volume(space, nq, n, n, |be, w, t| {
        for (a, &da) in be.dofs.iter().enumerate() {
            for (b, &db) in be.dofs.iter().enumerate() {
                t.push(da, db, w * scale * be.values[a] * be.values[b]);
            }
        }
    })
}

/// Orthogonality rows spanning the representable part of the symCurl kernel:
/// integral of phi against (1,0) and (0,1), plus (x1, x2) when the linear
/// field lies in the space (three rows), otherwise two.
pub fn assemble_rt0_rows(space: &SplineSpace, nq: usize) -> Result<Vec<Vec<f64>>> {
    let nv = 2 * space.dim();
    let (_, linear) = space.linear_coeffs();
    let nrows = if linear.is_some() { 3 } else { 2 };
    let m = assemble_volume(space, nq, nrows, nv, |be, w, t| {
        for (a, &da) in be.dofs.iter().enumerate() {
            let v = w * be.values[a];
            t.push(0, 2 * da, v);
            t.push(1, 2 * da + 1, v);
            if nrows == 3 {
                t.push(2, 2 * da, v * be.point[0]);
                t.push(2, 2 * da + 1, v * be.point[1]);
            }
        }
    })?;
    let mut rows = Vec::with_capacity(nrows);
    for r in 0..nrows {
        let mut dense = vec![0.0; nv];
        let (cols, vals) = m.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            dense[c as usize] = v;
        }
        rows.push(dense);
    }
    Ok(rows)
}

/// Boundary forms against the multiplier basis:
/// l_phi(phi, lambda) pairs the tangential derivative of phi with mu_n over
/// simply supported and free edges and with mu_t over free edges;
/// l_p(p, lambda) pairs p with mu_n over free edges.
pub fn assemble_boundary_forms(
    space: &SplineSpace,
    basis: &MultiplierBasis,
    nq: usize,
) -> Result<(CsrMatrix, CsrMatrix)> {
    let n = space.dim();
    let nv = 2 * n;
    let ms = &basis.space;
    let rule = GaussRule::legendre(nq);

    // Raw pairings against single trace basis functions.
    let mut raw_phi = Triplets::new(ms.raw_dim, nv);
    let mut raw_p = Triplets::new(ms.raw_dim, n);
    for (k, e) in space.geo.edges().iter().enumerate() {
        if e.tag == BcTag::Clamped {
            continue;
        }
        let trace = &ms.traces[k];
        let free = e.tag == BcTag::Free;
        for (a, b, _) in trace.knots.spans() {
            for (sigma, w) in rule.mapped(a, b) {
                let frame = space.geo.edge_frame(k, sigma)?;
                let ws = w * frame.jacobian;
                let (u, v) = e.side.param(sigma);
                let be = space.eval_basis(u, v)?;
                let (tfirst, tvals, _) = trace.eval(sigma);
                for (r, &tv) in tvals.iter().enumerate() {
                    let row_n = ms.n_dof(k, tfirst + r);
                    let row_t = ms.t_dof(k, tfirst + r);
                    let wt = ws * tv;
                    for (bidx, &db) in be.dofs.iter().enumerate() {
                        let g = be.grads[bidx];
                        // d(B)/dt along the ccw tangent.
                        let dbdt = g[0] * frame.tangent[0] + g[1] * frame.tangent[1];
                        for c in 0..2 {
                            let col = 2 * db + c;
                            raw_phi.push(row_n, col, wt * dbdt * frame.normal[c]);
                            if free {
                                raw_phi.push(row_t, col, wt * dbdt * frame.tangent[c]);
                            }
                        }
                        if free {
                            raw_p.push(row_n, db, wt * be.values[bidx]);
                        }
                    }
                }
            }
        }
    }
    let raw_phi = raw_phi.into_csr();
    let raw_p = raw_p.into_csr();

    // Contract with the nullspace basis columns.
    let contract = |raw: &CsrMatrix, ncols: usize| -> CsrMatrix {
        let mut t = Triplets::new(basis.dim(), ncols);
        for (m, col) in basis.columns.iter().enumerate() {
            for &(rawdof, coef) in col {
                let (cols, vals) = raw.row(rawdof);
                for (&c, &v) in cols.iter().zip(vals) {
                    t.push(m, c as usize, coef * v);
                }
            }
        }
        t.into_csr()
    };
    Ok((contract(&raw_phi, nv), contract(&raw_p, n)))
}

/// Assembles every form the pipeline needs.
pub fn assemble_forms(
    cs: &ConstrainedSpace,
    basis: &MultiplierBasis,
    material: &IsotropicMaterial,
    load: &(dyn Fn(f64, f64) -> f64 + Sync),
) -> Result<AssembledForms> {
    let space = &cs.space;
    let nq = space.degree + 1;
    let (l_phi, l_p) = assemble_boundary_forms(space, basis, nq)?;
    Ok(AssembledForms {
        k_pp: assemble_poisson(cs, nq)?,
        a_phiphi: assemble_symcurl_form(space, material, nq)?,
        b_pphi: assemble_coupling(space, material, nq)?,
        t_pp: assemble_tr_mass(space, material, nq)?,
        l_phi,
        l_p,
        rt0_rows: assemble_rt0_rows(space, nq)?,
        f_vec: assemble_load(cs, load, nq)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{unit_disk_patch, unit_square_patch, GeometryPatch};
    use crate::material::sym_curl;
    use crate::multiplier::multiplier_basis;
    use crate::spline::{build_space, constrain_dirichlet};
    use std::sync::Arc;

    fn tagged_square(tags: [BcTag; 4]) -> Arc<GeometryPatch> {
        Arc::new(
            unit_square_patch(2.0, [0.0, 0.0])
                .unwrap()
                .as_ref()
                .clone()
                .with_tags(&tags)
                .unwrap(),
        )
    }

    fn benchmark_square() -> Arc<GeometryPatch> {
        tagged_square([
            BcTag::SimplySupported,
            BcTag::Free,
            BcTag::SimplySupported,
            BcTag::Clamped,
        ])
    }

    #[test]
    fn poisson_single_interior_dof_is_eight_thirds() {
        // Unit square, p=1, L=1, full Dirichlet: one free dof, the classic
        // bilinear stencil diagonal 8/3.
        let geo = Arc::new(
            unit_square_patch(1.0, [0.5, 0.5])
                .unwrap()
                .as_ref()
                .clone()
                .with_tags(&[BcTag::SimplySupported; 4])
                .unwrap(),
        );
        let space = build_space(&geo, 1, 1).unwrap();
        let cs = constrain_dirichlet(&space).unwrap();
        assert_eq!(cs.n_free(), 1);
        let k = assemble_poisson(&cs, 2).unwrap();
        let d = k.to_dense();
        assert!((d[0] - 8.0 / 3.0).abs() < 1e-13, "diag {}", d[0]);
    }

    #[test]
    fn stiffness_annihilates_constants() {
        let geo = tagged_square([BcTag::Free; 4]); // unconstrained
        let space = build_space(&geo, 2, 2).unwrap();
        let cs = constrain_dirichlet(&space).unwrap();
        assert_eq!(cs.n_free(), space.dim());
        let k = assemble_poisson(&cs, 3).unwrap();
        let ones = vec![1.0; space.dim()];
        let mut y = vec![0.0; space.dim()];
        k.matvec(&ones, &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        assert!(k.max_asymmetry() < 1e-12);
    }

    #[test]
    fn load_of_one_sums_to_area() {
        let geo = Arc::new(
            unit_square_patch(1.0, [0.5, 0.5])
                .unwrap()
                .as_ref()
                .clone()
                .with_tags(&[BcTag::Free; 4])
                .unwrap(),
        );
        let space = build_space(&geo, 1, 2).unwrap();
        let cs = constrain_dirichlet(&space).unwrap();
        let zero = assemble_load(&cs, &|_, _| 0.0, 2).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let f = assemble_load(&cs, &|_, _| 1.0, 2).unwrap();
        let s: f64 = f.iter().sum();
        assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn symcurl_form_kernel_contains_affine_fields() {
        for geo in [benchmark_square(), unit_disk_patch().unwrap()] {
            let space = build_space(&geo, 2, 2).unwrap();
            let mat = IsotropicMaterial::new(1.0, 0.3).unwrap();
            let a = assemble_symcurl_form(&space, &mat, 3).unwrap();
            assert!(a.max_asymmetry() < 1e-12);
            let (ones, xy) = space.linear_coeffs();
            let (x, y) = xy.unwrap();
            // psi = a x + b with a = 0.7, b = (1.3, -0.4).
            let mut phi = vec![0.0; 2 * space.dim()];
            for k in 0..space.dim() {
                phi[2 * k] = 0.7 * x[k] + 1.3 * ones[k];
                phi[2 * k + 1] = 0.7 * y[k] - 0.4 * ones[k];
            }
            let mut out = vec![0.0; 2 * space.dim()];
            a.matvec(&phi, &mut out);
            let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm < 1e-11, "{}: residual {norm}", geo.name());
        }
    }

    #[test]
    fn symcurl_energy_hand_integral() {
        // psi = (x2, 0) on the unit square: symCurl = [[1,0],[0,0]] and the
        // energy is 1/(D(1-nu^2)) * area.
        let geo = Arc::new(
            unit_square_patch(1.0, [0.5, 0.5])
                .unwrap()
                .as_ref()
                .clone()
                .with_tags(&[BcTag::Free; 4])
                .unwrap(),
        );
        let space = build_space(&geo, 1, 0).unwrap();
        let (_, xy) = space.linear_coeffs();
        let (_, y) = xy.unwrap();
        for (d, nu) in [(1.0, 0.0), (1.0, 0.3), (2.5, 0.2)] {
            let mat = IsotropicMaterial::new(d, nu).unwrap();
            let a = assemble_symcurl_form(&space, &mat, 2).unwrap();
            let mut phi = vec![0.0; 2 * space.dim()];
            for k in 0..space.dim() {
                phi[2 * k] = y[k];
            }
            let mut out = vec![0.0; phi.len()];
            a.matvec(&phi, &mut out);
            let energy: f64 = phi.iter().zip(&out).map(|(a, b)| a * b).sum();
            let exact = 1.0 / (d * (1.0 - nu * nu));
            assert!((energy - exact).abs() < 1e-13, "D={d} nu={nu}: {energy}");
        }
    }

    #[test]
    fn coupling_matches_generic_c_inverse_path() {
        // The simplified identity C^-1(qI) = q/(D(1+nu)) I against the
        // generic apply_c_inverse route, via quadrature on a finer rule.
        for geo in [benchmark_square(), unit_disk_patch().unwrap()] {
            let space = build_space(&geo, 2, 1).unwrap();
            let mat = IsotropicMaterial::new(1.7, 0.23).unwrap();
            let b = assemble_coupling(&space, &mat, 3).unwrap();
            let n = space.dim();
            let q: Vec<f64> = (0..n).map(|k| ((k * 7 + 3) % 5) as f64 * 0.3 - 0.6).collect();
            let psi: Vec<f64> = (0..2 * n)
                .map(|k| ((k * 11 + 1) % 9) as f64 * 0.2 - 0.8)
                .collect();
            let mut bpsi = vec![0.0; n];
            b.matvec(&psi, &mut bpsi);
            let form: f64 = q.iter().zip(&bpsi).map(|(a, b)| a * b).sum();
            // Independent route: apply_c_inverse and the full Frobenius
            // product, on the same rule so quadrature error cancels.
            let rule = GaussRule::legendre(3);
            let tables = tabulate(&space.knots, &rule);
            let mut exact = 0.0;
            for sv in &tables.spans {
                for su in &tables.spans {
                    for qv in &sv.points {
                        for qu in &su.points {
                            let be = space
                                .combine(
                                    qu.x, qv.x, qu.first, &qu.values, &qu.derivs, qv.first,
                                    &qv.values, &qv.derivs,
                                )
                                .unwrap();
                            let w = qu.weight * qv.weight * be.det_j;
                            let mut qh = 0.0;
                            let mut grad = Mat2::ZERO;
                            for (idx, &dof) in be.dofs.iter().enumerate() {
                                qh += q[dof] * be.values[idx];
                                for c in 0..2 {
                                    grad.0[c][0] += psi[2 * dof + c] * be.grads[idx][0];
                                    grad.0[c][1] += psi[2 * dof + c] * be.grads[idx][1];
                                }
                            }
                            let qi = Mat2::IDENTITY.scale(qh);
                            exact += w * mat.apply_c_inverse(&qi).dot(&sym_curl(&grad));
                        }
                    }
                }
            }
            assert!(
                (form - exact).abs() < 1e-12 * (1.0 + exact.abs()),
                "{}: {form} vs {exact}",
                geo.name()
            );
        }
    }

    #[test]
    fn coupling_of_constant_with_trace_free_field() {
        // q = 1 and psi = (y^2, 0) on the symmetric square: the integral of
        // tr(symCurl psi) = 2y vanishes.
        let geo = benchmark_square();
        let space = build_space(&geo, 2, 2).unwrap();
        let mat = IsotropicMaterial::new(1.0, 0.0).unwrap();
        let b = assemble_coupling(&space, &mat, 3).unwrap();
        let psi_y2 = space.interpolate(|_, y| y * y).unwrap();
        let mut psi = vec![0.0; 2 * space.dim()];
        for k in 0..space.dim() {
            psi[2 * k] = psi_y2[k];
        }
        let ones = vec![1.0; space.dim()];
        let mut bpsi = vec![0.0; space.dim()];
        b.matvec(&psi, &mut bpsi);
        let val: f64 = ones.iter().zip(&bpsi).map(|(a, b)| a * b).sum();
        assert!(val.abs() < 1e-12, "{val}");
    }

    #[test]
    fn rt0_rows_values_and_gram() {
        let geo = benchmark_square();
        let space = build_space(&geo, 2, 2).unwrap();
        let rows = assemble_rt0_rows(&space, 3).unwrap();
        assert_eq!(rows.len(), 3);
        let (ones, xy) = space.linear_coeffs();
        let (x, y) = xy.unwrap();
        let n = space.dim();
        let fields: [Vec<f64>; 3] = [
            // (1, 0), (0, 1), (x1, x2) as coefficient vectors.
            {
                let mut v = vec![0.0; 2 * n];
                for k in 0..n {
                    v[2 * k] = ones[k];
                }
                v
            },
            {
                let mut v = vec![0.0; 2 * n];
                for k in 0..n {
                    v[2 * k + 1] = ones[k];
                }
                v
            },
            {
                let mut v = vec![0.0; 2 * n];
                for k in 0..n {
                    v[2 * k] = x[k];
                    v[2 * k + 1] = y[k];
                }
                v
            },
        ];
        // phi = (1,0): first row gives the domain area.
        let r0: f64 = rows[0].iter().zip(&fields[0]).map(|(a, b)| a * b).sum();
        assert!((r0 - 4.0).abs() < 1e-12);
        // Gram matrix of the three generators is nonsingular.
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = rows[i].iter().zip(&fields[j]).map(|(a, b)| a * b).sum();
            }
        }
        let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
            - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
        assert!(det.abs() > 1.0);

        // Non-representable linear field on the disk with p=1: two rows.
        let disk = unit_disk_patch().unwrap();
        let space = build_space(&disk, 1, 2).unwrap();
        assert_eq!(assemble_rt0_rows(&space, 2).unwrap().len(), 2);
    }

    #[test]
    fn boundary_forms_structure() {
        let geo = benchmark_square();
        let space = build_space(&geo, 2, 2).unwrap();
        let basis = multiplier_basis(&space).unwrap();
        let (l_phi, l_p) = assemble_boundary_forms(&space, &basis, 3).unwrap();
        assert_eq!(l_phi.nrows, basis.dim());
        assert_eq!(l_phi.ncols, 2 * space.dim());
        // Constant vector fields have zero tangential derivative.
        let mut c0 = vec![0.0; 2 * space.dim()];
        for k in 0..space.dim() {
            c0[2 * k] = 1.0;
            c0[2 * k + 1] = -2.0;
        }
        let mut y = vec![0.0; basis.dim()];
        l_phi.matvec(&c0, &mut y);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
        // l_p pairs only the free east edge: columns for dofs away from the
        // east boundary are empty.
        let n1 = space.n1;
        let east: std::collections::HashSet<usize> =
            (0..n1).map(|j| space.dof(n1 - 1, j)).collect();
        for m in 0..l_p.nrows {
            let (cols, vals) = l_p.row(m);
            for (&c, &v) in cols.iter().zip(vals) {
                if v.abs() > 1e-14 {
                    // Support of east-edge trace functions reaches p cells in.
                    let i = (c as usize) % n1;
                    assert!(i + 3 >= n1 || east.contains(&(c as usize)));
                }
            }
        }
    }

    #[test]
    fn forms_symmetry_flags() {
        let geo = benchmark_square();
        let space = build_space(&geo, 2, 1).unwrap();
        let cs = constrain_dirichlet(&space).unwrap();
        let mat = IsotropicMaterial::new(1.0, 0.0).unwrap();
        let k = assemble_poisson(&cs, 3).unwrap();
        let a = assemble_symcurl_form(&space, &mat, 3).unwrap();
        let t = assemble_tr_mass(&space, &mat, 3).unwrap();
        assert!(k.max_asymmetry() < 1e-12);
        assert!(a.max_asymmetry() < 1e-12);
        assert!(t.max_asymmetry() < 1e-12);
    }
}
