//! Planar geometry on the complex plane: similitudes, convex polygon
//! predicates, and validation of basic figures.

use std::fmt::{self, Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst};
use thiserror::Error;

use crate::dio::Tau;

/// Scalar type for the generic geometry core.
pub trait Real: Float + FloatConst + Debug + Display + Send + Sync + 'static {}
impl<T: Float + FloatConst + Debug + Display + Send + Sync + 'static> Real for T {}

/// Converts an f64 constant into `F`.
#[inline]
pub fn c<F: Real>(v: f64) -> F {
    F::from(v).expect("constant not representable")
}

pub type Point<F> = Complex<F>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("source points coincide")]
    DegenerateSource,
}

/// Orientation-preserving similitude z ↦ a·z + b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similitude<F: Real> {
    pub a: Complex<F>,
    pub b: Complex<F>,
}

impl<F: Real> Similitude<F> {
    pub fn new(a: Complex<F>, b: Complex<F>) -> Self {
        Self { a, b }
    }

    pub fn identity() -> Self {
        Self {
            a: Complex::new(F::one(), F::zero()),
            b: Complex::new(F::zero(), F::zero()),
        }
    }

    pub fn ratio(&self) -> F {
        self.a.norm()
    }

    #[inline]
    pub fn apply(&self, z: Point<F>) -> Point<F> {
        self.a * z + self.b
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a,
            b: self.a * other.b + self.b,
        }
    }

    pub fn inverse(&self) -> Self {
        let ai = self.a.inv();
        Self {
            a: ai,
            b: -(ai * self.b),
        }
    }
}

/// The unique similitude sending `src0 ↦ dst0` and `src1 ↦ dst1`.
pub fn similitude_between<F: Real>(
    src0: Point<F>,
    src1: Point<F>,
    dst0: Point<F>,
    dst1: Point<F>,
) -> Result<Similitude<F>, GeomError> {
    let d = src1 - src0;
    if d.re == F::zero() && d.im == F::zero() {
        return Err(GeomError::DegenerateSource);
    }
    let a = (dst1 - dst0) / d;
    Ok(Similitude {
        a,
        b: dst0 - a * src0,
    })
}

pub fn apply<F: Real>(s: &Similitude<F>, z: Point<F>) -> Point<F> {
    s.apply(z)
}

pub fn compose<F: Real>(s: &Similitude<F>, t: &Similitude<F>) -> Similitude<F> {
    s.compose(t)
}

// ---------------------------------------------------------------------------
// convex polygons

#[inline]
fn cross<F: Real>(a: Point<F>, b: Point<F>) -> F {
    a.re * b.im - a.im * b.re
}

#[inline]
fn dot<F: Real>(a: Point<F>, b: Point<F>) -> F {
    a.re * b.re + a.im * b.im
}

pub fn point_segment_distance<F: Real>(p: Point<F>, a: Point<F>, b: Point<F>) -> F {
    let d = b - a;
    let len2 = dot(d, d);
    if len2 == F::zero() {
        return (p - a).norm();
    }
    let t = (dot(p - a, d) / len2).max(F::zero()).min(F::one());
    (p - (a + d * t)).norm()
}

fn axes<F: Real>(poly: &[Point<F>], out: &mut Vec<Point<F>>) {
    let n = poly.len();
    if n < 2 {
        return;
    }
    let m = if n == 2 { 1 } else { n };
    for i in 0..m {
        let e = poly[(i + 1) % n] - poly[i];
        let len = e.norm();
        if len > F::zero() {
            out.push(Complex::new(-e.im / len, e.re / len));
        }
    }
}

fn project<F: Real>(poly: &[Point<F>], axis: Point<F>) -> (F, F) {
    let mut lo = F::infinity();
    let mut hi = F::neg_infinity();
    for &p in poly {
        let v = dot(p, axis);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Largest separating gap over the edge-normal axes of two convex
/// polygons. Positive means disjoint closed sets; negative is the minimal
/// penetration depth along those axes.
pub fn sat_gap<F: Real>(p: &[Point<F>], q: &[Point<F>]) -> F {
    let mut ax = Vec::with_capacity(p.len() + q.len() + 1);
    axes(p, &mut ax);
    axes(q, &mut ax);
    if ax.is_empty() {
        let d = q[0] - p[0];
        let n = d.norm();
        if n == F::zero() {
            return F::zero();
        }
        ax.push(d / n);
    }
    let mut best = F::neg_infinity();
    for a in ax {
        let (l1, h1) = project(p, a);
        let (l2, h2) = project(q, a);
        let gap = (l2 - h1).max(l1 - h2);
        best = best.max(gap);
    }
    best
}

fn edges<F: Real>(poly: &[Point<F>]) -> Vec<(Point<F>, Point<F>)> {
    let n = poly.len();
    match n {
        0 => vec![],
        1 => vec![(poly[0], poly[0])],
        2 => vec![(poly[0], poly[1])],
        _ => (0..n).map(|i| (poly[i], poly[(i + 1) % n])).collect(),
    }
}

/// Euclidean distance between two convex polygons (0 when they meet).
pub fn convex_distance<F: Real>(p: &[Point<F>], q: &[Point<F>]) -> F {
    if sat_gap(p, q) <= F::zero() {
        return F::zero();
    }
    let mut best = F::infinity();
    for &v in p {
        for (a, b) in edges(q) {
            best = best.min(point_segment_distance(v, a, b));
        }
    }
    for &v in q {
        for (a, b) in edges(p) {
            best = best.min(point_segment_distance(v, a, b));
        }
    }
    best
}

/// Signed distance of `p` to the boundary of a triangle: positive inside.
pub fn triangle_margin<F: Real>(p: Point<F>, t: &[Point<F>; 3]) -> F {
    let orient = cross(t[1] - t[0], t[2] - t[0]).signum();
    let mut m = F::infinity();
    for i in 0..3 {
        let a = t[i];
        let b = t[(i + 1) % 3];
        let e = b - a;
        let len = e.norm();
        m = m.min(orient * cross(e, p - a) / len);
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disjointness<F: Real> {
    pub disjoint: bool,
    /// Separation distance when disjoint, otherwise minus the overlap depth.
    pub margin: F,
}

/// Whether the open triangles are disjoint. Boundary contact counts as
/// disjoint; `margin` is 0 in that case.
pub fn triangles_disjoint<F: Real>(t1: &[Point<F>; 3], t2: &[Point<F>; 3]) -> Disjointness<F> {
    let gap = sat_gap(t1, t2);
    let scale = t1
        .iter()
        .chain(t2.iter())
        .fold(F::one(), |m, z| m.max(z.norm()));
    let slack = c::<F>(64.0) * F::epsilon() * scale;
    if gap > slack {
        Disjointness {
            disjoint: true,
            margin: convex_distance(t1, t2),
        }
    } else if gap >= -slack {
        Disjointness {
            disjoint: true,
            margin: F::zero(),
        }
    } else {
        Disjointness {
            disjoint: false,
            margin: gap,
        }
    }
}

// ---------------------------------------------------------------------------
// basic figures

/// Marks a basic figure as the family member Ω_τ.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyTag {
    pub tau: Tau,
}

/// Exact structure declared alongside floating-point coordinates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Annotations {
    /// Corners p with θ_p = 0 known exactly.
    pub zero_corners: Vec<usize>,
    /// Whether x/y = log r_ℓ / log r_1 is rational, when known.
    pub xy_rational: Option<bool>,
    pub family: Option<FamilyTag>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Clause {
    Degenerate,
    ApexNotAbove,
    NotOnBaseline,
    VertexOutsidePi,
    NotContractive,
    TriangleOverlap,
    ApexImageOutside,
    SideTouchViolation,
    AnnotationMismatch,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub clause: Clause,
    pub indices: Vec<usize>,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ValidationReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn push(&mut self, clause: Clause, indices: Vec<usize>, margin: f64) {
        self.violations.push(Violation {
            clause,
            indices,
            margin,
        });
    }
}

impl Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass {
            return write!(f, "valid");
        }
        for v in &self.violations {
            writeln!(
                f,
                "{:?} at {:?} (margin {:e})",
                v.clause, v.indices, v.margin
            )?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// A validated basic figure normalized to z₀ = 0, z_ℓ = 1.
#[derive(Clone, Debug, PartialEq)]
pub struct BasicFigure<F: Real> {
    pub vertices: Vec<Point<F>>,
    pub q: usize,
    pub maps: Vec<Similitude<F>>,
    pub ratios: Vec<F>,
    pub annotations: Annotations,
}

pub const DEFAULT_TOL: f64 = 1e-9;

fn tol<F: Real>() -> F {
    c::<F>(DEFAULT_TOL).max(c::<F>(1024.0) * F::epsilon())
}

impl<F: Real> BasicFigure<F> {
    /// Number of maps ℓ.
    pub fn ell(&self) -> usize {
        self.maps.len()
    }

    pub fn apex(&self) -> Point<F> {
        self.vertices[self.q]
    }

    /// The closed basic triangle z₀ z_ℓ z_q.
    pub fn triangle(&self) -> [Point<F>; 3] {
        [self.vertices[0], self.vertices[self.ell()], self.apex()]
    }

    /// S_j (1-based).
    pub fn map(&self, j: usize) -> &Similitude<F> {
        &self.maps[j - 1]
    }

    pub fn ratio(&self, j: usize) -> F {
        self.ratios[j - 1]
    }

    pub fn image_triangle(&self, j: usize) -> [Point<F>; 3] {
        let t = self.triangle();
        let s = self.map(j);
        [s.apply(t[0]), s.apply(t[1]), s.apply(t[2])]
    }

    /// Same figure in f64.
    pub fn to_f64(&self) -> BasicFigure<f64> {
        let cv = |z: &Point<F>| Complex::new(z.re.to_f64().unwrap(), z.im.to_f64().unwrap());
        BasicFigure {
            vertices: self.vertices.iter().map(cv).collect(),
            q: self.q,
            maps: self
                .maps
                .iter()
                .map(|s| Similitude {
                    a: cv(&s.a),
                    b: cv(&s.b),
                })
                .collect(),
            ratios: self.ratios.iter().map(|r| r.to_f64().unwrap()).collect(),
            annotations: self.annotations.clone(),
        }
    }
}

/// Affine normalization sending z₀ ↦ 0 and z_ℓ ↦ 1.
pub fn normalize<F: Real>(vertices: &[Point<F>]) -> Result<Vec<Point<F>>, GeomError> {
    let n = vertices.len();
    let s = similitude_between(
        vertices[0],
        vertices[n - 1],
        Complex::new(F::zero(), F::zero()),
        Complex::new(F::one(), F::zero()),
    )?;
    let mut out: Vec<Point<F>> = vertices.iter().map(|&z| s.apply(z)).collect();
    out[0] = Complex::new(F::zero(), F::zero());
    out[n - 1] = Complex::new(F::one(), F::zero());
    Ok(out)
}

pub fn build_basic_figure<F: Real>(
    vertices: &[Point<F>],
    q: usize,
) -> Result<BasicFigure<F>, ValidationReport> {
    build_basic_figure_annotated(vertices, q, Annotations::default())
}

pub fn build_basic_figure_annotated<F: Real>(
    vertices: &[Point<F>],
    q: usize,
    annotations: Annotations,
) -> Result<BasicFigure<F>, ValidationReport> {
    let mut rep = ValidationReport::default();
    let n = vertices.len();
    let tol = tol::<F>();
    let f = |v: F| v.to_f64().unwrap_or(f64::NAN);

    if n < 3
        || q == 0
        || q >= n - 1
        || vertices
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        rep.push(Clause::Degenerate, vec![q], 0.0);
        return Err(rep);
    }
    let Ok(z) = normalize(vertices) else {
        rep.push(Clause::Degenerate, vec![0, n - 1], 0.0);
        return Err(rep);
    };
    let ell = n - 1;
    for j in 1..=ell {
        if (z[j] - z[j - 1]).norm() == F::zero() {
            rep.push(Clause::Degenerate, vec![j - 1, j], 0.0);
        }
    }
    if !rep.violations.is_empty() {
        return Err(rep);
    }

    let zq = z[q];
    if zq.im <= tol {
        rep.push(Clause::ApexNotAbove, vec![q], f(zq.im));
        return Err(rep);
    }
    let on_base = |w: Point<F>| w.im.abs() <= tol && w.re >= -tol && w.re <= F::one() + tol;
    for &j in &[1, ell - 1] {
        if !on_base(z[j]) {
            rep.push(Clause::NotOnBaseline, vec![j], f(z[j].im.abs()));
        }
    }
    if z[1].re > z[ell - 1].re + tol {
        rep.push(
            Clause::NotOnBaseline,
            vec![1, ell - 1],
            f(z[1].re - z[ell - 1].re),
        );
    }
    let tri = [z[0], z[ell], zq];
    for j in 1..ell {
        if j == q || on_base(z[j]) {
            continue;
        }
        let m = triangle_margin(z[j], &tri);
        if m <= tol {
            rep.push(Clause::VertexOutsidePi, vec![j], f(m));
        }
    }

    let maps: Vec<Similitude<F>> = (1..=ell)
        .map(|j| similitude_between(z[0], z[ell], z[j - 1], z[j]).unwrap())
        .collect();
    let ratios: Vec<F> = maps.iter().map(|s| s.ratio()).collect();
    for (j, &r) in ratios.iter().enumerate() {
        if !(r < F::one()) {
            rep.push(Clause::NotContractive, vec![j + 1], f(F::one() - r));
        }
    }
    let imgs: Vec<[Point<F>; 3]> = maps
        .iter()
        .map(|s| [s.apply(tri[0]), s.apply(tri[1]), s.apply(tri[2])])
        .collect();
    for i in 0..ell {
        for j in i + 1..ell {
            let d = triangles_disjoint(&imgs[i], &imgs[j]);
            if !d.disjoint && -d.margin > tol {
                rep.push(Clause::TriangleOverlap, vec![i + 1, j + 1], f(d.margin));
            }
        }
    }
    for (j, s) in maps.iter().enumerate() {
        let m = triangle_margin(s.apply(zq), &tri);
        if m < -tol {
            rep.push(Clause::ApexImageOutside, vec![j + 1], f(m));
        }
    }
    let side_a = [zq, z[0]];
    let side_b = [zq, z[ell]];
    for j in 1..=ell {
        if j == 1 || j == ell || j == q || j == q + 1 {
            continue;
        }
        let d = convex_distance(&imgs[j - 1], &side_a).min(convex_distance(&imgs[j - 1], &side_b));
        if d <= tol {
            rep.push(Clause::SideTouchViolation, vec![j], f(d));
        }
    }

    let fig = BasicFigure {
        vertices: z,
        q,
        maps,
        ratios,
        annotations,
    };
    for &p in &fig.annotations.zero_corners {
        let ok = p >= 1 && p < ell && {
            let a = corner_angle(&fig, p);
            a.value.min(c::<F>(std::f64::consts::TAU) - a.value) <= tol + a.radius
        };
        if !ok {
            rep.push(Clause::AnnotationMismatch, vec![p], 0.0);
        }
    }

    if rep.violations.is_empty() {
        rep.pass = true;
        Ok(fig)
    } else {
        Err(rep)
    }
}

// ---------------------------------------------------------------------------
// angles

/// An angle in [0, 2π) with a rounding-error radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertAngle<F: Real> {
    pub value: F,
    pub radius: F,
}

impl<F: Real> CertAngle<F> {
    /// Certainly strictly positive.
    pub fn is_positive(&self) -> bool {
        self.value > self.radius
    }
}

/// Principal arg(n/d) in (−π, π] for n = a − z, d = b − z, with an error
/// radius derived from the cancellation in both differences.
pub fn certified_arg_principal<F: Real>(a: Point<F>, b: Point<F>, z: Point<F>) -> CertAngle<F> {
    let n = a - z;
    let d = b - z;
    let ratio = n / d;
    let e = F::epsilon();
    let rel = (a.norm() + z.norm()) / n.norm() + (b.norm() + z.norm()) / d.norm();
    CertAngle {
        value: ratio.im.atan2(ratio.re),
        radius: c::<F>(16.0) * e * rel + c::<F>(8.0) * e,
    }
}

/// As [`certified_arg_principal`] but in [0, 2π); values within the radius
/// of 2π snap to 0.
pub fn certified_arg<F: Real>(a: Point<F>, b: Point<F>, z: Point<F>) -> CertAngle<F> {
    let mut r = certified_arg_principal(a, b, z);
    let two_pi = c::<F>(std::f64::consts::TAU);
    if r.value < F::zero() {
        r.value = r.value + two_pi;
    }
    if two_pi - r.value <= r.radius {
        r.value = F::zero();
    }
    r
}

/// θ_p = arg((S_p(z_q) − z_p)/(S_{p+1}(z_q) − z_p)).
pub fn corner_angle<F: Real>(fig: &BasicFigure<F>, p: usize) -> CertAngle<F> {
    let zq = fig.apex();
    certified_arg(
        fig.map(p).apply(zq),
        fig.map(p + 1).apply(zq),
        fig.vertices[p],
    )
}

/// η₁ = arg((S_q(z_q) − z_q)/(z₀ − z_q)).
pub fn eta1<F: Real>(fig: &BasicFigure<F>) -> CertAngle<F> {
    let zq = fig.apex();
    certified_arg_principal(fig.map(fig.q).apply(zq), fig.vertices[0], zq)
}

/// η₂ = arg((z_ℓ − z_q)/(S_{q+1}(z_q) − z_q)).
pub fn eta2<F: Real>(fig: &BasicFigure<F>) -> CertAngle<F> {
    let zq = fig.apex();
    certified_arg_principal(fig.vertices[fig.ell()], fig.map(fig.q + 1).apply(zq), zq)
}

/// ϱ_p = arg((z_{p+1} − z_p)/(z_{p−1} − z_p)) in [0, 2π).
pub fn vertex_angle<F: Real>(fig: &BasicFigure<F>, p: usize) -> CertAngle<F> {
    let v = &fig.vertices;
    certified_arg(v[p + 1], v[p - 1], v[p])
}

/// Certified class of a corner angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleClass {
    Zero,
    Positive,
    Unresolved,
}

/// θ_p = 0 only from annotations; positive only when the interval excludes 0.
pub fn classify_corner<F: Real>(fig: &BasicFigure<F>, p: usize) -> (CertAngle<F>, AngleClass) {
    let a = corner_angle(fig, p);
    let class = if fig.annotations.zero_corners.contains(&p) {
        AngleClass::Zero
    } else if a.is_positive() {
        AngleClass::Positive
    } else {
        AngleClass::Unresolved
    };
    (a, class)
}

/// Parameters of the Diophantine arc test at a zero corner p.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogParams<F: Real> {
    pub alpha: F,
    pub beta: F,
    pub lambda: F,
    pub mu: F,
    pub x: F,
    pub y: F,
    pub u: F,
    pub iota: Point<F>,
}

/// α = |r_p(1 − z_q)|, β = |r_{p+1} z_q|, λ = r_ℓ, μ = r₁ and their logs.
pub fn log_params<F: Real>(fig: &BasicFigure<F>, p: usize) -> LogParams<F> {
    let zq = fig.apex();
    let one = Complex::new(F::one(), F::zero());
    let alpha = fig.ratio(p) * (one - zq).norm();
    let beta = fig.ratio(p + 1) * zq.norm();
    let lambda = fig.ratio(fig.ell());
    let mu = fig.ratio(1);
    let z0 = fig.map(p).apply(fig.map(fig.ell()).apply(zq));
    let d = z0 - fig.vertices[p];
    LogParams {
        alpha,
        beta,
        lambda,
        mu,
        x: -lambda.ln(),
        y: -mu.ln(),
        u: (alpha / beta).ln(),
        iota: d / d.norm(),
    }
}

/// Koch basic figure {0, 1/3, 1/2 + i√3/6, 2/3, 1} with apex 2.
pub fn koch_vertices<F: Real>() -> Vec<Point<F>> {
    let h = c::<F>(3.0).sqrt() / c(6.0);
    vec![
        Complex::new(F::zero(), F::zero()),
        Complex::new(F::one() / c(3.0), F::zero()),
        Complex::new(c(0.5), h),
        Complex::new(c::<F>(2.0) / c(3.0), F::zero()),
        Complex::new(F::one(), F::zero()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn koch() -> Vec<Point<f64>> {
        let h = 3f64.sqrt() / 6.0;
        vec![
            Complex::new(0.0, 0.0),
            Complex::new(1.0 / 3.0, 0.0),
            Complex::new(0.5, h),
            Complex::new(2.0 / 3.0, 0.0),
            Complex::new(1.0, 0.0),
        ]
    }

    #[test]
    fn koch_maps() {
        let f = build_basic_figure(&koch(), 2).unwrap();
        let s2 = f.map(2);
        assert!((s2.a - Complex::new(1.0 / 6.0, 3f64.sqrt() / 6.0)).norm() < 1e-15);
        assert!((s2.b - Complex::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        let th = corner_angle(&f, 1);
        assert!((th.value - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
    }

    #[test]
    fn collinear_rejected() {
        let v: Vec<Point<f64>> = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]
            .iter()
            .map(|&x| Complex::new(x, 0.0))
            .collect();
        let r = build_basic_figure(&v, 1).unwrap_err();
        assert!(r
            .violations
            .iter()
            .any(|v| v.clause == Clause::ApexNotAbove));
    }

    #[test]
    fn koch_in_f32() {
        let v: Vec<Point<f32>> = koch()
            .iter()
            .map(|z| Complex::new(z.re as f32, z.im as f32))
            .collect();
        assert!(build_basic_figure(&v, 2).is_ok());
    }
}
