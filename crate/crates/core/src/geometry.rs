//! Single-patch NURBS geometry: exact maps from the unit square onto the
//! computational domain, the decomposition of the boundary into tagged edges
//! traversed counterclockwise, and corner data (interior angles from
//! one-sided tangents).

use std::f64::consts::PI;
use std::sync::Arc;

use crate::bspline::KnotVector;
use crate::error::{Error, Result};

/// Boundary-condition tag of one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcTag {
    Clamped,
    SimplySupported,
    Free,
}

impl BcTag {
    pub fn parse(s: &str) -> Result<BcTag> {
        match s {
            "clamped" => Ok(BcTag::Clamped),
            "simply_supported" => Ok(BcTag::SimplySupported),
            "free" => Ok(BcTag::Free),
            _ => Err(Error::InvalidArgument(format!("unknown bc tag {s:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BcTag::Clamped => "clamped",
            BcTag::SimplySupported => "simply_supported",
            BcTag::Free => "free",
        }
    }
}

/// One of the four sides of the parameter square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    South,
    East,
    North,
    West,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::South, Side::East, Side::North, Side::West];

    /// Parameter point for side coordinate sigma.
    pub fn param(&self, sigma: f64) -> (f64, f64) {
        match self {
            Side::South => (sigma, 0.0),
            Side::East => (1.0, sigma),
            Side::North => (sigma, 1.0),
            Side::West => (0.0, sigma),
        }
    }

    /// +1 when counterclockwise boundary traversal runs with increasing
    /// sigma on this side, -1 otherwise (positively oriented patch).
    pub fn ccw_sign(&self) -> f64 {
        match self {
            Side::South | Side::East => 1.0,
            Side::North | Side::West => -1.0,
        }
    }

    /// Index of the parameter direction that varies along the side.
    pub fn running_dir(&self) -> usize {
        match self {
            Side::South | Side::North => 0,
            Side::East | Side::West => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Side::South => "south",
            Side::East => "east",
            Side::North => "north",
            Side::West => "west",
        }
    }

    pub fn parse(s: &str) -> Result<Side> {
        match s {
            "south" => Ok(Side::South),
            "east" => Ok(Side::East),
            "north" => Ok(Side::North),
            "west" => Ok(Side::West),
            _ => Err(Error::InvalidArgument(format!("unknown side {s:?}"))),
        }
    }
}

/// A maximal smooth piece of the boundary, one bc tag each, numbered
/// counterclockwise.
#[derive(Debug, Clone)]
pub struct BoundaryEdge {
    pub index: usize,
    pub side: Side,
    /// Side-coordinate interval [a, b] occupied by this edge.
    pub interval: [f64; 2],
    pub tag: BcTag,
}

impl BoundaryEdge {
    /// Side coordinate of the corner where counterclockwise traversal of
    /// this edge begins.
    pub fn ccw_start_sigma(&self) -> f64 {
        if self.side.ccw_sign() > 0.0 {
            self.interval[0]
        } else {
            self.interval[1]
        }
    }

    pub fn ccw_end_sigma(&self) -> f64 {
        if self.side.ccw_sign() > 0.0 {
            self.interval[1]
        } else {
            self.interval[0]
        }
    }

    pub fn covers_full_side(&self) -> bool {
        self.interval == [0.0, 1.0]
    }
}

/// Corner k: junction of edges k-1 and k (index 0 identified with K), at the
/// counterclockwise start point of edge k.
#[derive(Debug, Clone)]
pub struct CornerData {
    pub index: usize,
    pub location: [f64; 2],
    /// Interior angle in radians, in (0, 2*pi).
    pub angle: f64,
    pub prev_edge: usize,
    pub next_edge: usize,
    /// |angle - pi| below the smoothness threshold.
    pub smooth: bool,
}

/// Threshold below which a junction counts as smooth (angle pi); exact
/// angles are not available on rational geometry.
pub const SMOOTH_ANGLE_TOL: f64 = 1e-8;

/// Local frame of a boundary edge at one side coordinate.
#[derive(Debug, Clone, Copy)]
pub struct EdgeFrame {
    pub point: [f64; 2],
    /// Unit outer normal.
    pub normal: [f64; 2],
    /// Unit counterclockwise tangent, t = (-n2, n1).
    pub tangent: [f64; 2],
    /// Arc length per unit side coordinate, |dG/dsigma|.
    pub jacobian: f64,
}

/// Tensor-product NURBS map from the unit parameter square onto the domain,
/// with boundary-edge topology. Immutable after construction.
#[derive(Debug, Clone)]
pub struct GeometryPatch {
    name: String,
    knots_u: KnotVector,
    knots_v: KnotVector,
    /// Control points, index j * nu + i.
    ctrl: Vec<[f64; 2]>,
    weights: Vec<f64>,
    rational: bool,
    edges: Vec<BoundaryEdge>,
    corners: Vec<CornerData>,
    /// Parameter locations where the map's Jacobian (numerically) vanishes.
    degenerate_params: Vec<[f64; 2]>,
}

impl GeometryPatch {
    pub fn new(
        name: &str,
        knots_u: KnotVector,
        knots_v: KnotVector,
        ctrl: Vec<[f64; 2]>,
        weights: Vec<f64>,
        edge_spec: &[(Side, [f64; 2], BcTag)],
    ) -> Result<GeometryPatch> {
        let nu = knots_u.num_basis();
        let nv = knots_v.num_basis();
        if ctrl.len() != nu * nv || weights.len() != nu * nv {
            return Err(Error::Geometry(format!(
                "control net size mismatch: expected {}x{}, got {} points / {} weights",
                nu,
                nv,
                ctrl.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::Geometry("weights must be positive".into()));
        }
        let rational = weights.iter().any(|&w| (w - 1.0).abs() > 1e-14);

        let mut patch = GeometryPatch {
            name: name.to_string(),
            knots_u,
            knots_v,
            ctrl,
            weights,
            rational,
            edges: Vec::new(),
            corners: Vec::new(),
            degenerate_params: Vec::new(),
        };
        patch.validate_jacobian()?;
        patch.catalogue_degeneracies();
        patch.edges = build_edges(&patch, edge_spec)?;
        patch.corners = compute_corners(&patch)?;
        Ok(patch)
    }

    /// Interior positivity check of det J on a sample grid (9 points per
    /// nonempty knot span and direction, strictly inside).
    fn validate_jacobian(&self) -> Result<()> {
        let probe = [0.08, 0.2, 0.31, 0.45, 0.5, 0.62, 0.74, 0.87, 0.93];
        for (au, bu, _) in self.knots_u.spans() {
            for (av, bv, _) in self.knots_v.spans() {
                for &su in &probe {
                    for &sv in &probe {
                        let u = au + su * (bu - au);
                        let v = av + sv * (bv - av);
                        let (_, det) = self.jacobian(u, v);
                        if det <= 0.0 {
                            return Err(Error::Geometry(format!(
                                "non-positive jacobian {det:.3e} at ({u:.4}, {v:.4})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Records parameter corners where the map degenerates (for the
    /// single-patch disk these are the four corners of the square).
    fn catalogue_degeneracies(&mut self) {
        let scale = {
            let (_, d) = self.jacobian(0.5, 0.5);
            d.abs().max(1e-30)
        };
        for &(u, v) in &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
            let (_, det) = self.jacobian(u, v);
            if det.abs() < 1e-8 * scale {
                self.degenerate_params.push([u, v]);
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degrees(&self) -> [usize; 2] {
        [self.knots_u.degree, self.knots_v.degree]
    }

    pub fn is_rational(&self) -> bool {
        self.rational
    }

    pub fn knots(&self) -> (&KnotVector, &KnotVector) {
        (&self.knots_u, &self.knots_v)
    }

    pub fn control_net(&self) -> (&[[f64; 2]], &[f64]) {
        (&self.ctrl, &self.weights)
    }

    pub fn edges(&self) -> &[BoundaryEdge] {
        &self.edges
    }

    pub fn corners(&self) -> &[CornerData] {
        &self.corners
    }

    pub fn degenerate_params(&self) -> &[[f64; 2]] {
        &self.degenerate_params
    }

    /// Replaces the boundary-condition tags, in edge order.
    pub fn with_tags(mut self, tags: &[BcTag]) -> Result<GeometryPatch> {
        if tags.len() != self.edges.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} tags, got {}",
                self.edges.len(),
                tags.len()
            )));
        }
        for (e, &t) in self.edges.iter_mut().zip(tags) {
            e.tag = t;
        }
        Ok(self)
    }

    /// Map evaluation; weighted sums with rational division.
    pub fn eval_map(&self, u: f64, v: f64) -> [f64; 2] {
        let (p, _) = self.eval_with_jacobian(u, v);
        p
    }

    /// Jacobian d(x,y)/d(u,v) (columns dG/du, dG/dv) and its determinant.
    pub fn jacobian(&self, u: f64, v: f64) -> ([[f64; 2]; 2], f64) {
        let (_, j) = self.eval_with_jacobian(u, v);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        (j, det)
    }

    /// Point and Jacobian in one pass. j[r][c] = d x_r / d u_c.
    pub fn eval_with_jacobian(&self, u: f64, v: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        self.eval_with_jacobian_sided(u, v, false, false)
    }

    /// One-sided variant: `left_u`/`left_v` select left derivative limits at
    /// interior knots (needed for one-sided tangents at boundary kinks).
    pub fn eval_with_jacobian_sided(
        &self,
        u: f64,
        v: f64,
        left_u: bool,
        left_v: bool,
    ) -> ([f64; 2], [[f64; 2]; 2]) {
        let bu = self.knots_u.eval_sided(u, left_u);
        let bv = self.knots_v.eval_sided(v, left_v);
        let nu = self.knots_u.num_basis();

        // Weighted sums: s = sum N w P, sw = sum N w, plus u/v derivatives.
        let mut s = [0.0; 2];
        let mut su = [0.0; 2];
        let mut sv = [0.0; 2];
        let (mut sw, mut swu, mut swv) = (0.0, 0.0, 0.0);
        for (b, &nvv) in bv.values.iter().enumerate() {
            let j = bv.first + b;
            let dnv = bv.derivs[b];
            for (a, &nuu) in bu.values.iter().enumerate() {
                let i = bu.first + a;
                let dnu = bu.derivs[a];
                let idx = j * nu + i;
                let w = self.weights[idx];
                let p = self.ctrl[idx];
                let nw = nuu * nvv * w;
                let nwu = dnu * nvv * w;
                let nwv = nuu * dnv * w;
                s[0] += nw * p[0];
                s[1] += nw * p[1];
                su[0] += nwu * p[0];
                su[1] += nwu * p[1];
                sv[0] += nwv * p[0];
                sv[1] += nwv * p[1];
                sw += nw;
                swu += nwu;
                swv += nwv;
            }
        }
        let inv = 1.0 / sw;
        let point = [s[0] * inv, s[1] * inv];
        let j = [
            [
                (su[0] - point[0] * swu) * inv,
                (sv[0] - point[0] * swv) * inv,
            ],
            [
                (su[1] - point[1] * swu) * inv,
                (sv[1] - point[1] * swv) * inv,
            ],
        ];
        (point, j)
    }

    /// Point, outer normal, ccw tangent and arc-length jacobian on an edge.
    pub fn edge_frame(&self, edge: usize, sigma: f64) -> Result<EdgeFrame> {
        self.edge_frame_sided(edge, sigma, false)
    }

    /// One-sided variant along the running coordinate (left limit when
    /// `from_left`); used for one-sided tangents at corners.
    pub fn edge_frame_sided(&self, edge: usize, sigma: f64, from_left: bool) -> Result<EdgeFrame> {
        let e = &self.edges[edge];
        let (u, v) = e.side.param(sigma);
        let (left_u, left_v) = match e.side.running_dir() {
            0 => (from_left, false),
            _ => (false, from_left),
        };
        let (point, jac) = self.eval_with_jacobian_sided(u, v, left_u, left_v);
        let col = e.side.running_dir();
        let d = [jac[0][col], jac[1][col]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if len < 1e-13 {
            return Err(Error::Geometry(format!(
                "degenerate tangent on edge {edge} at sigma={sigma})"
            )));
        }
        let s = e.side.ccw_sign() / len;
        let tangent = [d[0] * s, d[1] * s];
        let normal = [tangent[1], -tangent[0]];
        Ok(EdgeFrame {
            point,
            normal,
            tangent,
            jacobian: len,
        })
    }

    /// Serializes the patch to the plain-text format documented in the
    /// repository README.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("name {}\n", self.name));
        out.push_str(&format!(
            "degree {} {}\n",
            self.knots_u.degree, self.knots_v.degree
        ));
        let fmt_knots = |kv: &KnotVector| {
            kv.knots
                .iter()
                .map(|k| format!("{k}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.push_str(&format!("knots_u {}\n", fmt_knots(&self.knots_u)));
        out.push_str(&format!("knots_v {}\n", fmt_knots(&self.knots_v)));
        out.push_str(&format!(
            "dims {} {}\n",
            self.knots_u.num_basis(),
            self.knots_v.num_basis()
        ));
        for (p, w) in self.ctrl.iter().zip(&self.weights) {
            out.push_str(&format!("ctrl {} {} {}\n", p[0], p[1], w));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} {} {} {}\n",
                e.side.name(),
                e.interval[0],
                e.interval[1],
                e.tag.name()
            ));
        }
        out
    }

    /// Parses the plain-text patch format produced by [`to_text`].
    pub fn from_text(text: &str) -> Result<GeometryPatch> {
        let mut name = String::from("patch");
        let mut degree = None;
        let mut knots_u = None;
        let mut knots_v = None;
        let mut ctrl = Vec::new();
        let mut weights = Vec::new();
        let mut edge_spec = Vec::new();
        let bad = |line: &str| Error::InvalidArgument(format!("malformed patch line: {line:?}"));

        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let key = it.next().ok_or_else(|| bad(line))?;
            let rest: Vec<&str> = it.collect();
            match key {
                "name" => name = rest.join(" "),
                "degree" => {
                    if rest.len() != 2 {
                        return Err(bad(line));
                    }
                    degree = Some((
                        rest[0].parse::<usize>().map_err(|_| bad(line))?,
                        rest[1].parse::<usize>().map_err(|_| bad(line))?,
                    ));
                }
                "knots_u" | "knots_v" => {
                    let ks = rest
                        .iter()
                        .map(|s| s.parse::<f64>().map_err(|_| bad(line)))
                        .collect::<Result<Vec<f64>>>()?;
                    if key == "knots_u" {
                        knots_u = Some(ks);
                    } else {
                        knots_v = Some(ks);
                    }
                }
                "dims" => {} // implied by knots; ignored on input
                "ctrl" => {
                    if rest.len() != 3 {
                        return Err(bad(line));
                    }
                    let x = rest[0].parse::<f64>().map_err(|_| bad(line))?;
                    let y = rest[1].parse::<f64>().map_err(|_| bad(line))?;
                    let w = rest[2].parse::<f64>().map_err(|_| bad(line))?;
                    ctrl.push([x, y]);
                    weights.push(w);
                }
                "edge" => {
                    if rest.len() != 4 {
                        return Err(bad(line));
                    }
                    let side = Side::parse(rest[0])?;
                    let a = rest[1].parse::<f64>().map_err(|_| bad(line))?;
                    let b = rest[2].parse::<f64>().map_err(|_| bad(line))?;
                    let tag = BcTag::parse(rest[3])?;
                    edge_spec.push((side, [a, b], tag));
                }
                _ => return Err(bad(line)),
            }
        }
        let (pu, pv) = degree.ok_or_else(|| Error::InvalidArgument("missing degree".into()))?;
        let ku = KnotVector {
            degree: pu,
            knots: knots_u.ok_or_else(|| Error::InvalidArgument("missing knots_u".into()))?,
        };
        let kv = KnotVector {
            degree: pv,
            knots: knots_v.ok_or_else(|| Error::InvalidArgument("missing knots_v".into()))?,
        };
        GeometryPatch::new(&name, ku, kv, ctrl, weights, &edge_spec)
    }
}

fn build_edges(
    patch: &GeometryPatch,
    spec: &[(Side, [f64; 2], BcTag)],
) -> Result<Vec<BoundaryEdge>> {
    if spec.len() < 3 {
        return Err(Error::Geometry("a closed boundary needs >= 3 edges".into()));
    }
    let edges: Vec<BoundaryEdge> = spec
        .iter()
        .enumerate()
        .map(|(index, &(side, interval, tag))| BoundaryEdge {
            index,
            side,
            interval,
            tag,
        })
        .collect();
    for e in &edges {
        if !(e.interval[0] >= 0.0 && e.interval[1] <= 1.0 && e.interval[0] < e.interval[1]) {
            return Err(Error::Geometry(format!(
                "edge {} has invalid interval {:?}",
                e.index, e.interval
            )));
        }
    }
    // Consecutive edges must chain counterclockwise: ccw end of k coincides
    // with ccw start of k+1 in physical space.
    let k = edges.len();
    for i in 0..k {
        let next = (i + 1) % k;
        let (ue, ve) = edges[i].side.param(edges[i].ccw_end_sigma());
        let (us, vs) = edges[next].side.param(edges[next].ccw_start_sigma());
        let pe = patch.eval_map(ue, ve);
        let ps = patch.eval_map(us, vs);
        let d = ((pe[0] - ps[0]).powi(2) + (pe[1] - ps[1]).powi(2)).sqrt();
        if d > 1e-10 {
            return Err(Error::Geometry(format!(
                "edges {} and {} do not share a vertex (gap {d:.3e})",
                i, next
            )));
        }
    }
    Ok(edges)
}

fn compute_corners(patch: &GeometryPatch) -> Result<Vec<CornerData>> {
    let k = patch.edges.len();
    let mut out = Vec::with_capacity(k);
    for index in 0..k {
        let prev = (index + k - 1) % k;
        let next = index;
        // One-sided tangents: the incoming edge approached from inside its
        // interval, likewise the outgoing edge.
        let pe = &patch.edges[prev];
        let ne = &patch.edges[next];
        let fe = patch.edge_frame_sided(prev, pe.ccw_end_sigma(), pe.side.ccw_sign() > 0.0)?;
        let fs = patch.edge_frame_sided(next, ne.ccw_start_sigma(), ne.side.ccw_sign() < 0.0)?;
        let (t0, t1) = (fe.tangent, fs.tangent);
        let cross = t0[0] * t1[1] - t0[1] * t1[0];
        let dot = t0[0] * t1[0] + t0[1] * t1[1];
        let turning = cross.atan2(dot);
        let angle = PI - turning;
        if !(angle > 0.0 && angle < 2.0 * PI) {
            return Err(Error::Geometry(format!(
                "corner {index} has invalid interior angle {angle}"
            )));
        }
        out.push(CornerData {
            index,
            location: fs.point,
            angle,
            prev_edge: prev,
            next_edge: next,
            smooth: (angle - PI).abs() < SMOOTH_ANGLE_TOL,
        });
    }
    Ok(out)
}

/// Bilinear patch for the axis-aligned square of the given side length and
/// center; four edges, four right-angle corners.
pub fn unit_square_patch(side_length: f64, center: [f64; 2]) -> Result<Arc<GeometryPatch>> {
    if !(side_length > 0.0) {
        return Err(Error::InvalidArgument("side_length must be positive".into()));
    }
    let h = 0.5 * side_length;
    let (cx, cy) = (center[0], center[1]);
    let ctrl = vec![
        [cx - h, cy - h],
        [cx + h, cy - h],
        [cx - h, cy + h],
        [cx + h, cy + h],
    ];
    let patch = GeometryPatch::new(
        "square",
        KnotVector::single_span(1),
        KnotVector::single_span(1),
        ctrl,
        vec![1.0; 4],
        &full_side_edges(),
    )?;
    Ok(Arc::new(patch))
}

/// Exact rational parameterization of the closed unit disk as one biquadratic
/// patch. The boundary consists of four exact quarter arcs (middle weight
/// 1/sqrt(2)) meeting at angle pi; the map degenerates at the four parameter
/// corners, which the constructor catalogues.
pub fn unit_disk_patch() -> Result<Arc<GeometryPatch>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r2 = std::f64::consts::SQRT_2;
    let ctrl = vec![
        [-s, -s],
        [0.0, -r2],
        [s, -s],
        [-r2, 0.0],
        [0.0, 0.0],
        [r2, 0.0],
        [-s, s],
        [0.0, r2],
        [s, s],
    ];
    let weights = vec![1.0, s, 1.0, s, 1.0, s, 1.0, s, 1.0];
    let patch = GeometryPatch::new(
        "disk",
        KnotVector::single_span(2),
        KnotVector::single_span(2),
        ctrl,
        weights,
        &full_side_edges(),
    )?;
    Ok(Arc::new(patch))
}

fn full_side_edges() -> Vec<(Side, [f64; 2], BcTag)> {
    Side::ALL
        .iter()
        .map(|&s| (s, [0.0, 1.0], BcTag::Free))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussRule;

    pub(crate) fn l_shaped_patch() -> Arc<GeometryPatch> {
        // Degree-1 patch with an interior u-knot: boundary is the L-shaped
        // hexagon (0,0)(2,0)(2,3)(1,3)(1,1)(0,1), reflex corner at (1,1).
        let knots_u = KnotVector {
            degree: 1,
            knots: vec![0.0, 0.0, 0.5, 1.0, 1.0],
        };
        let knots_v = KnotVector::single_span(1);
        let ctrl = vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 3.0],
            [0.0, 1.0],
            [1.0, 1.0],
            [1.0, 3.0],
        ];
        let edges = vec![
            (Side::South, [0.0, 0.5], BcTag::Free),
            (Side::South, [0.5, 1.0], BcTag::Free),
            (Side::East, [0.0, 1.0], BcTag::Free),
            (Side::North, [0.5, 1.0], BcTag::Free),
            (Side::North, [0.0, 0.5], BcTag::Free),
            (Side::West, [0.0, 1.0], BcTag::Free),
        ];
        Arc::new(
            GeometryPatch::new("lshape", knots_u, knots_v, ctrl, vec![1.0; 6], &edges).unwrap(),
        )
    }

    #[test]
    fn square_corners_and_angles() {
        let sq = unit_square_patch(2.0, [0.0, 0.0]).unwrap();
        let mut corners: Vec<[f64; 2]> = sq.corners().iter().map(|c| c.location).collect();
        corners.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            corners,
            vec![[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]]
        );
        for c in sq.corners() {
            assert!((c.angle - PI / 2.0).abs() < 1e-12);
            assert!(!c.smooth);
        }
    }

    #[test]
    fn shifted_unit_square_has_unit_jacobian() {
        let sq = unit_square_patch(1.0, [0.5, 0.5]).unwrap();
        for &(u, v) in &[(0.1, 0.2), (0.7, 0.3), (0.5, 0.9)] {
            let (_, det) = sq.jacobian(u, v);
            assert!((det - 1.0).abs() < 1e-14);
            let p = sq.eval_map(u, v);
            assert!((p[0] - u).abs() < 1e-14 && (p[1] - v).abs() < 1e-14);
        }
    }

    #[test]
    fn square_edge_arc_lengths_equal_side() {
        let sq = unit_square_patch(2.0, [0.3, -0.4]).unwrap();
        let rule = GaussRule::legendre(4);
        for e in 0..4 {
            let len: f64 = rule
                .mapped(0.0, 1.0)
                .map(|(s, w)| w * sq.edge_frame(e, s).unwrap().jacobian)
                .sum();
            assert!((len - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn square_east_edge_frame() {
        let sq = unit_square_patch(2.0, [0.0, 0.0]).unwrap();
        for &s in &[0.1, 0.5, 0.9] {
            let f = sq.edge_frame(1, s).unwrap();
            assert!((f.normal[0] - 1.0).abs() < 1e-14 && f.normal[1].abs() < 1e-14);
            assert!((f.tangent[1] - 1.0).abs() < 1e-14 && f.tangent[0].abs() < 1e-14);
        }
    }

    #[test]
    fn disk_boundary_is_exact_circle() {
        let disk = unit_disk_patch().unwrap();
        for e in 0..4 {
            for i in 0..16 {
                let s = (i as f64 + 0.5) / 16.0;
                let f = disk.edge_frame(e, s).unwrap();
                let r = (f.point[0] * f.point[0] + f.point[1] * f.point[1]).sqrt();
                assert!((r - 1.0).abs() < 1e-14, "edge {e} s={s}: r={r}");
                // Outer normal of the unit circle is the position vector.
                assert!((f.normal[0] - f.point[0]).abs() < 1e-13);
                assert!((f.normal[1] - f.point[1]).abs() < 1e-13);
                // n.t = 0 by construction.
                let nt = f.normal[0] * f.tangent[0] + f.normal[1] * f.tangent[1];
                assert_eq!(nt, 0.0);
            }
        }
    }

    #[test]
    fn disk_area_and_boundary_length_by_quadrature() {
        let disk = unit_disk_patch().unwrap();
        let rule = GaussRule::legendre(24);
        let mut area = 0.0;
        for (u, wu) in rule.mapped(0.0, 1.0) {
            for (v, wv) in rule.mapped(0.0, 1.0) {
                let (_, det) = disk.jacobian(u, v);
                area += wu * wv * det;
            }
        }
        assert!((area - PI).abs() < 1e-10, "area {area}");
        let mut length = 0.0;
        for e in 0..4 {
            for (s, w) in rule.mapped(0.0, 1.0) {
                length += w * disk.edge_frame(e, s).unwrap().jacobian;
            }
        }
        assert!((length - 2.0 * PI).abs() < 1e-10, "length {length}");
    }

    #[test]
    fn disk_corners_are_smooth_and_degeneracies_catalogued() {
        let disk = unit_disk_patch().unwrap();
        for c in disk.corners() {
            assert!((c.angle - PI).abs() < 1e-12);
            assert!(c.smooth);
        }
        assert_eq!(disk.degenerate_params().len(), 4);
        // Interior jacobian positive even close to the degenerate corners.
        for &(u, v) in &[(0.005, 0.005), (0.995, 0.005), (0.995, 0.995), (0.005, 0.995)] {
            let (_, det) = disk.jacobian(u, v);
            assert!(det > 0.0, "det {det} at ({u},{v})");
        }
    }

    #[test]
    fn l_shape_has_one_reflex_corner() {
        let l = l_shaped_patch();
        let mut reflex = 0;
        for c in l.corners() {
            if (c.angle - 1.5 * PI).abs() < 1e-12 {
                reflex += 1;
                assert!((c.location[0] - 1.0).abs() < 1e-12);
                assert!((c.location[1] - 1.0).abs() < 1e-12);
            } else {
                assert!((c.angle - 0.5 * PI).abs() < 1e-12);
            }
        }
        assert_eq!(reflex, 1);
    }

    #[test]
    fn outward_normal_points_outside() {
        let sq = unit_square_patch(2.0, [0.0, 0.0]).unwrap();
        let disk = unit_disk_patch().unwrap();
        let eps = 1e-6;
        for e in 0..4 {
            for &s in &[0.25, 0.6] {
                let f = sq.edge_frame(e, s).unwrap();
                let q = [f.point[0] + eps * f.normal[0], f.point[1] + eps * f.normal[1]];
                assert!(q[0].abs() > 1.0 || q[1].abs() > 1.0);
                let f = disk.edge_frame(e, s).unwrap();
                let q = [f.point[0] + eps * f.normal[0], f.point[1] + eps * f.normal[1]];
                assert!(q[0] * q[0] + q[1] * q[1] > 1.0);
            }
        }
    }

    #[test]
    fn total_turning_around_boundary_is_two_pi() {
        // Tangent turning along edges plus exterior corner angles.
        for patch in [
            unit_square_patch(2.0, [0.0, 0.0]).unwrap(),
            unit_disk_patch().unwrap(),
            l_shaped_patch(),
        ] {
            let mut total = 0.0;
            let n_samples = 200;
            for e in patch.edges() {
                let mut prev: Option<[f64; 2]> = None;
                for i in 0..=n_samples {
                    let x = i as f64 / n_samples as f64;
                    let sigma = if e.side.ccw_sign() > 0.0 {
                        e.interval[0] + x * (e.interval[1] - e.interval[0])
                    } else {
                        e.interval[1] - x * (e.interval[1] - e.interval[0])
                    };
                    let t = patch.edge_frame(e.index, sigma).unwrap().tangent;
                    if let Some(t0) = prev {
                        total += (t0[0] * t[1] - t0[1] * t[0]).atan2(t0[0] * t[0] + t0[1] * t[1]);
                    }
                    prev = Some(t);
                }
            }
            for c in patch.corners() {
                total += PI - c.angle;
            }
            assert!(
                (total - 2.0 * PI).abs() < 1e-8,
                "{}: total turning {total}",
                patch.name()
            );
        }
    }

    #[test]
    fn text_round_trip() {
        let disk = unit_disk_patch().unwrap();
        let text = disk.to_text();
        let back = GeometryPatch::from_text(&text).unwrap();
        assert_eq!(back.degrees(), [2, 2]);
        assert_eq!(back.edges().len(), 4);
        for &(u, v) in &[(0.3, 0.3), (0.8, 0.65)] {
            let a = disk.eval_map(u, v);
            let b = back.eval_map(u, v);
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(unit_square_patch(0.0, [0.0, 0.0]).is_err());
        // Flipped control net -> negative jacobian.
        let ctrl = vec![[1.0, -1.0], [-1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
        let r = GeometryPatch::new(
            "flipped",
            KnotVector::single_span(1),
            KnotVector::single_span(1),
            ctrl,
            vec![1.0; 4],
            &full_side_edges(),
        );
        assert!(r.is_err());
    }
}
