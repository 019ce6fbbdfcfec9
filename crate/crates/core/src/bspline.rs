//! Univariate B-spline machinery: open knot vectors, basis evaluation with
//! first derivatives, Greville abscissae, Bezier degree elevation and knot
//! insertion (used to push coarse NURBS weight/control data into refined
//! spaces).

/// An open (clamped) knot vector with its polynomial degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    pub degree: usize,
    pub knots: Vec<f64>,
}

/// Active basis values (and first derivatives) at one parameter value.
#[derive(Debug, Clone)]
pub struct BasisValues {
    /// Index of the first active basis function; `values[r]` belongs to
    /// function `first + r`.
    pub first: usize,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl KnotVector {
    /// Open knot vector on [0,1] with 2^level uniform interior spans and
    /// maximum smoothness (interior multiplicity one).
    pub fn open_uniform(degree: usize, level: usize) -> KnotVector {
        assert!(degree >= 1);
        let spans = 1usize << level;
        let mut knots = Vec::with_capacity(2 * (degree + 1) + spans - 1);
        knots.extend(std::iter::repeat(0.0).take(degree + 1));
        for i in 1..spans {
            knots.push(i as f64 / spans as f64);
        }
        knots.extend(std::iter::repeat(1.0).take(degree + 1));
        KnotVector { degree, knots }
    }

    /// Single-span (Bezier) knot vector on [0,1].
    pub fn single_span(degree: usize) -> KnotVector {
        KnotVector::open_uniform(degree, 0)
    }

    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Nonempty spans as (a, b, first active dof).
    pub fn spans(&self) -> Vec<(f64, f64, usize)> {
        let p = self.degree;
        let mut out = Vec::new();
        for k in p..(self.knots.len() - p - 1) {
            let (a, b) = (self.knots[k], self.knots[k + 1]);
            if b > a {
                out.push((a, b, k - p));
            }
        }
        out
    }

    /// Knot span index k with knots[k] <= u < knots[k+1] (u = end maps to the
    /// last nonempty span).
    pub fn find_span(&self, u: f64) -> usize {
        let p = self.degree;
        let n = self.num_basis();
        if u >= self.knots[n] {
            // Last nonempty span.
            let mut k = n - 1;
            while self.knots[k + 1] <= self.knots[k] {
                k -= 1;
            }
            return k;
        }
        let mut lo = p;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Values and first derivatives of the degree-p basis functions active
    /// at u (the standard triangular recurrence). Right-continuous at
    /// interior knots.
    pub fn eval(&self, u: f64) -> BasisValues {
        self.eval_sided(u, false)
    }

    /// Like [`eval`] but `from_left` selects the span ending at u when u is
    /// an interior knot, giving left-sided derivative limits.
    pub fn eval_sided(&self, u: f64, from_left: bool) -> BasisValues {
        let p = self.degree;
        let mut span = self.find_span(u);
        if from_left && u > self.knots[p] && self.knots[span] == u {
            span -= 1;
            while span > p && self.knots[span] >= self.knots[span + 1] {
                span -= 1;
            }
        }
        let mut values = vec![0.0; p + 1];
        let mut lower = vec![0.0; p + 1]; // degree p-1 row
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];

        values[0] = 1.0;
        for j in 1..=p {
            left[j] = u - self.knots[span + 1 - j];
            right[j] = self.knots[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = values[r] / (right[r + 1] + left[j - r]);
                values[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            values[j] = saved;
            if j == p - 1 {
                lower.copy_from_slice(&values);
            }
        }
        if p == 1 {
            lower[0] = 1.0;
        }

        // N'_{i,p} = p (N_{i,p-1}/(U_{i+p}-U_i) - N_{i+1,p-1}/(U_{i+p+1}-U_{i+1})),
        // with the degree-(p-1) functions active on span being span-p+1..span.
        let mut derivs = vec![0.0; p + 1];
        let first = span - p;
        for r in 0..=p {
            let i = first + r;
            let mut d = 0.0;
            if r >= 1 {
                let den = self.knots[i + p] - self.knots[i];
                if den > 0.0 {
                    d += lower[r - 1] / den;
                }
            }
            if r <= p - 1 {
                let den = self.knots[i + p + 1] - self.knots[i + 1];
                if den > 0.0 {
                    d -= lower[r] / den;
                }
            }
            derivs[r] = p as f64 * d;
        }

        BasisValues { first, values, derivs }
    }

    /// Greville abscissae: averages of p consecutive interior knots.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.num_basis())
            .map(|i| self.knots[i + 1..i + 1 + p].iter().sum::<f64>() / p as f64)
            .collect()
    }

    fn is_single_span(&self) -> bool {
        self.knots.iter().all(|&k| k == 0.0 || k == 1.0)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Degree elevation of Bezier coefficients from degree `from` to `to`.
pub fn elevate_bezier(coeffs: &[f64], from: usize, to: usize) -> Vec<f64> {
    assert_eq!(coeffs.len(), from + 1);
    assert!(to >= from);
    let r = to - from;
    (0..=to)
        .map(|i| {
            let mut s = 0.0;
            let j_lo = i.saturating_sub(r);
            let j_hi = from.min(i);
            for j in j_lo..=j_hi {
                s += binomial(from, j) * binomial(r, i - j) * coeffs[j];
            }
            s / binomial(to, i)
        })
        .collect()
}

/// Boehm single-knot insertion; returns the refined coefficients and extends
/// the knot vector in place.
pub fn insert_knot(kv: &mut KnotVector, coeffs: &[f64], t: f64) -> Vec<f64> {
    let p = kv.degree;
    let k = kv.find_span(t);
    let n = coeffs.len();
    let mut out = vec![0.0; n + 1];
    for i in 0..=k.saturating_sub(p) {
        out[i] = coeffs[i];
    }
    for i in (k + 1 - p).max(1)..=k {
        let den = kv.knots[i + p] - kv.knots[i];
        let alpha = if den > 0.0 { (t - kv.knots[i]) / den } else { 0.0 };
        out[i] = alpha * coeffs[i] + (1.0 - alpha) * coeffs[i - 1];
    }
    for i in (k + 1)..=n {
        out[i] = coeffs[i - 1];
    }
    kv.knots.insert(k + 1, t);
    out
}

/// Expresses a single-span (Bezier) spline of degree `coarse.degree` in the
/// open uniform space of degree `degree` at refinement `level`. Exact: degree
/// elevation followed by knot insertion.
pub fn refine_to(coarse: &KnotVector, coeffs: &[f64], degree: usize, level: usize) -> Vec<f64> {
    assert!(coarse.is_single_span(), "refine_to starts from a Bezier patch");
    assert!(degree >= coarse.degree);
    let mut kv = KnotVector::single_span(degree);
    let mut c = elevate_bezier(coeffs, coarse.degree, degree);
    let spans = 1usize << level;
    for i in 1..spans {
        c = insert_knot(&mut kv, &c, i as f64 / spans as f64);
    }
    debug_assert_eq!(kv, KnotVector::open_uniform(degree, level));
    c
}
