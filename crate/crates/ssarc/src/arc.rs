//! Cylinder addressing in arc order, vertex grids, the parametrization g,
//! the arc test at zero corners, and rigorous subarc diameters.

use std::fmt;

use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

use crate::geom::{
    c, classify_corner, convex_distance, log_params, AngleClass, BasicFigure, Point, Real,
    Similitude,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArcError {
    #[error("corner angle θ_{0} cannot be certified zero or positive")]
    UnresolvedAngle(usize),
    #[error("no pair of non-adjacent first-level cells (ℓ < 3)")]
    NoDisjointPairs,
    #[error("refinement too coarse: bound is not positive")]
    NonpositiveBound,
    #[error("vertex index range invalid")]
    BadRange,
}

/// A finite address j₁…j_k over digits 1..=ℓ.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<u16>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn push(&self, d: u16) -> Self {
        let mut v = self.0.clone();
        v.push(d);
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// Contractive similitudes with arc-order signs, the arc's endpoints, and a
/// convex polygon containing the attractor.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcSystem<F: Real> {
    pub maps: Vec<Similitude<F>>,
    /// τ(j) = +1 if S_j preserves arc order, −1 if it reverses it.
    pub signs: Vec<i8>,
    pub start: Point<F>,
    pub end: Point<F>,
    pub container: Vec<Point<F>>,
}

impl<F: Real> ArcSystem<F> {
    pub fn from_figure(fig: &BasicFigure<F>) -> Self {
        Self {
            maps: fig.maps.clone(),
            signs: vec![1; fig.ell()],
            start: fig.vertices[0],
            end: fig.vertices[fig.ell()],
            container: fig.triangle().to_vec(),
        }
    }

    /// {z/2, z/2 + 1/2}, whose attractor is the unit segment.
    pub fn segment() -> Self {
        let h = c::<F>(0.5);
        let z = F::zero();
        Self {
            maps: vec![
                Similitude::new(Complex::new(h, z), Complex::new(z, z)),
                Similitude::new(Complex::new(h, z), Complex::new(h, z)),
            ],
            signs: vec![1, 1],
            start: Complex::new(z, z),
            end: Complex::new(F::one(), z),
            container: vec![Complex::new(z, z), Complex::new(F::one(), z)],
        }
    }

    /// General system; the container circumscribes an invariant disc.
    pub fn new(maps: Vec<Similitude<F>>, signs: Vec<i8>, start: Point<F>, end: Point<F>) -> Self {
        let mid = (start + end) * c::<F>(0.5);
        let mut rho = F::zero();
        for s in &maps {
            let r = s.ratio();
            rho = rho.max((s.apply(mid) - mid).norm() / (F::one() - r));
        }
        let n = 8;
        let scale = rho / (F::PI() / c::<F>(n as f64)).cos();
        let container = (0..n)
            .map(|i| {
                let a = c::<F>(std::f64::consts::TAU * i as f64 / n as f64);
                mid + Complex::new(a.cos(), a.sin()) * scale
            })
            .collect();
        Self {
            maps,
            signs,
            start,
            end,
            container,
        }
    }

    pub fn ell(&self) -> usize {
        self.maps.len()
    }

    /// R = max r_j.
    pub fn max_ratio(&self) -> F {
        self.maps.iter().fold(F::zero(), |m, s| m.max(s.ratio()))
    }

    /// Upper bound L on diam Λ.
    pub fn diam_bound(&self) -> F {
        diameter(&self.container)
    }

    /// Depth-1 interior vertices z_1 … z_{ℓ−1}.
    fn interior(&self) -> Vec<Point<F>> {
        (0..self.ell() - 1)
            .map(|i| {
                if self.signs[i] > 0 {
                    self.maps[i].apply(self.end)
                } else {
                    self.maps[i].apply(self.start)
                }
            })
            .collect()
    }
}

/// Product of the digit signs.
pub fn orientation_sign<F: Real>(sys: &ArcSystem<F>, word: &Word) -> i8 {
    word.0
        .iter()
        .fold(1i8, |s, &d| s * sys.signs[d as usize - 1])
}

/// Words naming S₁^{(k)} … S_{ℓ^k}^{(k)} in arc order.
pub fn ordered_maps<F: Real>(sys: &ArcSystem<F>, k: usize) -> Vec<Word> {
    let ell = sys.ell() as u16;
    let mut cur = vec![(Word::empty(), 1i8)];
    for _ in 0..k {
        let mut next = Vec::with_capacity(cur.len() * ell as usize);
        for (w, s) in &cur {
            let digits: Vec<u16> = if *s > 0 {
                (1..=ell).collect()
            } else {
                (1..=ell).rev().collect()
            };
            for d in digits {
                next.push((w.push(d), s * sys.signs[d as usize - 1]));
            }
        }
        cur = next;
    }
    cur.into_iter().map(|(w, _)| w).collect()
}

/// Composed similitude of a word.
pub fn word_map<F: Real>(sys: &ArcSystem<F>, w: &Word) -> Similitude<F> {
    w.0.iter().fold(Similitude::identity(), |m, &d| {
        m.compose(&sys.maps[d as usize - 1])
    })
}

/// Depth-k vertices z_0^{(k)} … z_{ℓ^k}^{(k)} with the cells between them.
#[derive(Clone, Debug)]
pub struct VertexGrid<F: Real> {
    pub depth: usize,
    pub points: Vec<Point<F>>,
    pub cell_maps: Vec<Similitude<F>>,
    pub cell_signs: Vec<i8>,
}

impl<F: Real> VertexGrid<F> {
    pub fn cells(&self) -> usize {
        self.cell_maps.len()
    }

    /// One level finer. Endpoints are copied so that vertices of coarser
    /// grids reappear bit-for-bit.
    pub fn refine(&self, sys: &ArcSystem<F>) -> Self {
        let ell = sys.ell();
        let inner = sys.interior();
        let n = self.cells();
        let chunks: Vec<(Vec<Point<F>>, Vec<Similitude<F>>, Vec<i8>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let m = self.cell_maps[i];
                let s = self.cell_signs[i];
                let mut pts = Vec::with_capacity(ell);
                let mut maps = Vec::with_capacity(ell);
                let mut signs = Vec::with_capacity(ell);
                pts.push(self.points[i]);
                if s > 0 {
                    pts.extend(inner.iter().map(|&z| m.apply(z)));
                } else {
                    pts.extend(inner.iter().rev().map(|&z| m.apply(z)));
                }
                for t in 0..ell {
                    let d = if s > 0 { t } else { ell - 1 - t };
                    maps.push(m.compose(&sys.maps[d]));
                    signs.push(s * sys.signs[d]);
                }
                (pts, maps, signs)
            })
            .collect();
        let mut points = Vec::with_capacity(n * ell + 1);
        let mut cell_maps = Vec::with_capacity(n * ell);
        let mut cell_signs = Vec::with_capacity(n * ell);
        for (p, m, s) in chunks {
            points.extend(p);
            cell_maps.extend(m);
            cell_signs.extend(s);
        }
        points.push(*self.points.last().unwrap());
        Self {
            depth: self.depth + 1,
            points,
            cell_maps,
            cell_signs,
        }
    }

    /// Image of the container under each cell map, in arc order.
    pub fn cell_container(&self, sys: &ArcSystem<F>, i: usize) -> Vec<Point<F>> {
        sys.container
            .iter()
            .map(|&z| self.cell_maps[i].apply(z))
            .collect()
    }
}

pub fn root_grid<F: Real>(sys: &ArcSystem<F>) -> VertexGrid<F> {
    VertexGrid {
        depth: 0,
        points: vec![sys.start, sys.end],
        cell_maps: vec![Similitude::identity()],
        cell_signs: vec![1],
    }
}

pub fn vertices<F: Real>(sys: &ArcSystem<F>, k: usize) -> VertexGrid<F> {
    let mut g = root_grid(sys);
    for _ in 0..k {
        g = g.refine(sys);
    }
    g
}

/// Grids at depths 0..=k.
pub fn vertex_tower<F: Real>(sys: &ArcSystem<F>, k: usize) -> Vec<VertexGrid<F>> {
    let mut out = vec![root_grid(sys)];
    for _ in 0..k {
        let next = out.last().unwrap().refine(sys);
        out.push(next);
    }
    out
}

/// g(x) through depth m, with the error radius R^m·L.
pub fn g_eval<F: Real>(sys: &ArcSystem<F>, x: F, m: usize) -> (Point<F>, F) {
    let zero = F::zero();
    if x <= zero {
        return (sys.start, zero);
    }
    if x >= F::one() {
        return (sys.end, zero);
    }
    let ell = sys.ell();
    let lf = c::<F>(ell as f64);
    let mut y = x;
    let mut map = Similitude::identity();
    let mut sign = 1i8;
    for _ in 0..m {
        y = y * lf;
        let mut idx = y.floor().to_usize().unwrap_or(0).min(ell - 1);
        if y < c::<F>(idx as f64) {
            idx = idx.saturating_sub(1);
        }
        y = y - c::<F>(idx as f64);
        let d = if sign > 0 { idx } else { ell - 1 - idx };
        map = map.compose(&sys.maps[d]);
        sign *= sys.signs[d];
    }
    let p = if sign > 0 {
        map.apply(sys.start)
    } else {
        map.apply(sys.end)
    };
    (p, sys.max_ratio().powi(m as i32) * sys.diam_bound())
}

// ---------------------------------------------------------------------------
// hulls and diameters

fn cross3<F: Real>(o: Point<F>, a: Point<F>, b: Point<F>) -> F {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Convex hull (monotone chain), counter-clockwise.
pub fn convex_hull<F: Real>(pts: &[Point<F>]) -> Vec<Point<F>> {
    let mut p: Vec<Point<F>> = pts.to_vec();
    p.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<Point<F>> = Vec::new();
    for &z in &p {
        while lower.len() >= 2
            && cross3(lower[lower.len() - 2], lower[lower.len() - 1], z) <= F::zero()
        {
            lower.pop();
        }
        lower.push(z);
    }
    let mut upper: Vec<Point<F>> = Vec::new();
    for &z in p.iter().rev() {
        while upper.len() >= 2
            && cross3(upper[upper.len() - 2], upper[upper.len() - 1], z) <= F::zero()
        {
            upper.pop();
        }
        upper.push(z);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Diameter of a point set (exact over the hull vertices).
pub fn diameter<F: Real>(pts: &[Point<F>]) -> F {
    let h = if pts.len() > 16 {
        convex_hull(pts)
    } else {
        pts.to_vec()
    };
    let mut d = F::zero();
    for i in 0..h.len() {
        for j in i + 1..h.len() {
            d = d.max((h[i] - h[j]).norm());
        }
    }
    d
}

/// Bounds on the diameter of the subarc between z_i^{(k)} and z_j^{(k)}
/// from a single refinement level.
pub fn subarc_bounds_at<F: Real>(
    sys: &ArcSystem<F>,
    fine: &VertexGrid<F>,
    i: usize,
    j: usize,
    k: usize,
) -> (F, F) {
    let m = fine.depth - k;
    let scale = sys.ell().pow(m as u32);
    let (a, b) = (i * scale, j * scale);
    let lower = diameter(&fine.points[a..=b]);
    let inflate = c::<F>(2.0) * sys.max_ratio().powi(fine.depth as i32) * sys.diam_bound();
    let mut hull_pts = Vec::with_capacity((b - a) * sys.container.len());
    for cell in a..b {
        hull_pts.extend(fine.cell_container(sys, cell));
    }
    let upper = (lower + inflate).min(diameter(&hull_pts)).max(lower);
    (lower, upper)
}

/// (lower, upper) on |Λ(z_i^{(k)}, z_j^{(k)})| using refinements up to m;
/// the upper bound is the running minimum over refinements.
pub fn subarc_diameter<F: Real>(
    sys: &ArcSystem<F>,
    i: usize,
    j: usize,
    k: usize,
    m: usize,
) -> Result<(F, F), ArcError> {
    let n = sys.ell().pow(k as u32);
    if !(i < j && j <= n) {
        return Err(ArcError::BadRange);
    }
    let tower = vertex_tower(sys, k + m);
    let mut upper = F::infinity();
    let mut lower = F::zero();
    for g in &tower[k..] {
        let (lo, up) = subarc_bounds_at(sys, g, i, j, k);
        lower = lower.max(lo);
        upper = upper.min(up);
    }
    Ok((lower, upper))
}

/// Answers many subarc-diameter queries: hulls H_n of the depth-n vertex
/// sets are built once (H_{n+1} = hull ∪ S_j(H_n)), and a query maps them
/// through the canonical cover of the index range.
pub struct SubarcOracle<F: Real> {
    pub sys: ArcSystem<F>,
    /// Refinement m below the query depth.
    pub refine: usize,
    hulls: Vec<Vec<Point<F>>>,
    r_pow: Vec<F>,
}

impl<F: Real> SubarcOracle<F> {
    pub fn new(sys: ArcSystem<F>, max_depth: usize, refine: usize) -> Self {
        let mut hulls = vec![convex_hull(&[sys.start, sys.end])];
        for _ in 0..max_depth + refine {
            let prev = hulls.last().unwrap();
            let pts: Vec<Point<F>> = sys
                .maps
                .iter()
                .flat_map(|s| prev.iter().map(move |&z| s.apply(z)))
                .collect();
            hulls.push(convex_hull(&pts));
        }
        let r = sys.max_ratio();
        let r_pow = (0..=max_depth + refine).map(|n| r.powi(n as i32)).collect();
        Self {
            sys,
            refine,
            hulls,
            r_pow,
        }
    }

    pub fn max_depth(&self) -> usize {
        self.hulls.len() - 1 - self.refine
    }

    /// (lower, upper) on the diameter of the subarc between depth-k
    /// vertices i < j.
    pub fn bounds(&self, i: usize, j: usize, k: usize) -> (F, F) {
        let cover = canonical_cover(&self.sys, k, i, j);
        let mut lo_pts = Vec::new();
        let mut up_pts = Vec::new();
        for (m, d) in &cover {
            let h = &self.hulls[k + self.refine - d];
            lo_pts.extend(h.iter().map(|&z| m.apply(z)));
            up_pts.extend(self.sys.container.iter().map(|&z| m.apply(z)));
        }
        let lower = diameter(&lo_pts);
        let inflate = c::<F>(2.0) * self.r_pow[k + self.refine] * self.sys.diam_bound();
        let upper = diameter(&up_pts).min(lower + inflate).max(lower);
        (lower, upper)
    }
}

// ---------------------------------------------------------------------------
// δ₀

/// Lower bound on min_{|i−j|>1} dist(S_i(Λ), S_j(Λ)) from depth-m vertices.
pub fn delta0<F: Real>(sys: &ArcSystem<F>, m: usize) -> Result<F, ArcError> {
    let ell = sys.ell();
    if ell < 3 {
        return Err(ArcError::NoDisjointPairs);
    }
    let m = m.max(1);
    let g = vertices(sys, m);
    let per = ell.pow(m as u32 - 1);
    let pairs: Vec<(usize, usize)> = (0..ell)
        .flat_map(|i| (i + 2..ell).map(move |j| (i, j)))
        .collect();
    let best = pairs
        .par_iter()
        .map(|&(i, j)| {
            let a = &g.points[i * per..=(i + 1) * per];
            let b = &g.points[j * per..=(j + 1) * per];
            let mut d = F::infinity();
            for &p in a {
                for &q in b {
                    d = d.min((p - q).norm());
                }
            }
            d
        })
        .reduce(|| F::infinity(), |x, y| x.min(y));
    let bound = best - c::<F>(2.0) * sys.max_ratio().powi(m as i32) * sys.diam_bound();
    if bound > F::zero() {
        Ok(bound)
    } else {
        Err(ArcError::NonpositiveBound)
    }
}

/// Map and sign of the depth-d cell at arc-order position i.
pub fn cell_map<F: Real>(sys: &ArcSystem<F>, d: usize, i: usize) -> (Similitude<F>, i8) {
    let ell = sys.ell();
    let mut digits = Vec::with_capacity(d);
    let mut x = i;
    for _ in 0..d {
        digits.push(x % ell);
        x /= ell;
    }
    let mut m = Similitude::identity();
    let mut sign = 1i8;
    for &pos in digits.iter().rev() {
        let dg = if sign > 0 { pos } else { ell - 1 - pos };
        m = m.compose(&sys.maps[dg]);
        sign *= sys.signs[dg];
    }
    (m, sign)
}

/// Minimal set of aligned cells (map, depth) whose union is the subarc
/// between depth-`depth` vertices `lo < hi`.
pub fn canonical_cover<F: Real>(
    sys: &ArcSystem<F>,
    depth: usize,
    lo: usize,
    hi: usize,
) -> Vec<(Similitude<F>, usize)> {
    fn rec<F: Real>(
        sys: &ArcSystem<F>,
        depth: usize,
        d: usize,
        m: Similitude<F>,
        sign: i8,
        start: usize,
        lo: usize,
        hi: usize,
        out: &mut Vec<(Similitude<F>, usize)>,
    ) {
        let ell = sys.ell();
        let width = ell.pow((depth - d) as u32);
        let end = start + width;
        if end <= lo || start >= hi {
            return;
        }
        if lo <= start && end <= hi {
            out.push((m, d));
            return;
        }
        let w = width / ell;
        for t in 0..ell {
            let dg = if sign > 0 { t } else { ell - 1 - t };
            rec(
                sys,
                depth,
                d + 1,
                m.compose(&sys.maps[dg]),
                sign * sys.signs[dg],
                start + t * w,
                lo,
                hi,
                out,
            );
        }
    }
    let mut out = Vec::new();
    rec(
        sys,
        depth,
        0,
        Similitude::identity(),
        1,
        0,
        lo,
        hi,
        &mut out,
    );
    out
}

#[derive(Clone, Copy)]
struct Node<F: Real> {
    bound: F,
    a: Similitude<F>,
    da: usize,
    b: Similitude<F>,
    db: usize,
}

impl<F: Real> PartialEq for Node<F> {
    fn eq(&self, o: &Self) -> bool {
        self.bound == o.bound
    }
}
impl<F: Real> Eq for Node<F> {}
impl<F: Real> PartialOrd for Node<F> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<F: Real> Ord for Node<F> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        o.bound
            .partial_cmp(&self.bound)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

const BNB_NODE_CAP: usize = 4_000_000;

/// Bounds (lower, upper) on the distance between the subarcs spanned by
/// two depth-`depth` vertex ranges, by best-first branch and bound over
/// cell containers refined at most `extra` levels below `depth`.
pub fn range_distance<F: Real>(
    sys: &ArcSystem<F>,
    depth: usize,
    r1: (usize, usize),
    r2: (usize, usize),
    extra: usize,
) -> (F, F) {
    let poly = |m: &Similitude<F>| {
        sys.container
            .iter()
            .map(|&z| m.apply(z))
            .collect::<Vec<_>>()
    };
    let a = canonical_cover(sys, depth, r1.0, r1.1);
    let b = canonical_cover(sys, depth, r2.0, r2.1);
    let mut upper = F::infinity();
    let mut heap = std::collections::BinaryHeap::new();
    for (ma, da) in &a {
        for (mb, db) in &b {
            upper = upper.min((ma.apply(sys.start) - mb.apply(sys.start)).norm());
            let bound = convex_distance(&poly(ma), &poly(mb));
            heap.push(Node {
                bound,
                a: *ma,
                da: *da,
                b: *mb,
                db: *db,
            });
        }
    }
    let cap = depth + extra;
    let mut processed = 0usize;
    while let Some(node) = heap.pop() {
        if node.bound >= upper {
            return (upper, upper);
        }
        if (node.da >= cap && node.db >= cap) || processed > BNB_NODE_CAP {
            return (node.bound, upper);
        }
        processed += 1;
        // split the larger piece
        let split_a = node.db >= cap || (node.da < cap && node.a.ratio() >= node.b.ratio());
        let (base, d) = if split_a {
            (node.a, node.da)
        } else {
            (node.b, node.db)
        };
        for s in &sys.maps {
            let child = base.compose(s);
            let (ca, cda, cb, cdb) = if split_a {
                (child, d + 1, node.b, node.db)
            } else {
                (node.a, node.da, child, d + 1)
            };
            upper = upper.min((ca.apply(sys.start) - cb.apply(sys.start)).norm());
            let bound = convex_distance(&poly(&ca), &poly(&cb)).max(node.bound);
            heap.push(Node {
                bound,
                a: ca,
                da: cda,
                b: cb,
                db: cdb,
            });
        }
    }
    (upper, upper)
}

// ---------------------------------------------------------------------------
// arc test

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    AnglePositive,
    FamilyAnalytic,
    /// u − jx + ky ≠ 0 verified for 0 ≤ j, k ≤ n with the smallest |·| seen.
    BoundedDiophantine {
        n: u64,
        min_margin: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcStatus {
    Arc,
    NotArc,
    ArcUpToBound,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArcVerdict {
    pub status: ArcStatus,
    /// (p, certificate) for every corner 1 ≤ p ≤ ℓ−1 that received one.
    pub certificates: Vec<(usize, Certificate)>,
    /// (p, j, k) where |u − jx + ky| could not be separated from 0.
    pub witness: Option<(usize, u64, u64)>,
}

pub const DEFAULT_ARC_BOUND: u64 = 10_000;

/// Scans u − jx + ky for 0 ≤ j, k ≤ n. Returns the smallest certified |·|
/// or the first (j, k) whose value is within rounding of zero.
pub fn diophantine_scan(u: f64, x: f64, y: f64, n: u64) -> Result<f64, (u64, u64)> {
    let chunk = 4096u64;
    let blocks: Vec<u64> = (0..=n / chunk).collect();
    let res: Vec<Result<f64, (u64, u64)>> = blocks
        .par_iter()
        .map(|&b| {
            let mut best = f64::INFINITY;
            for j in b * chunk..((b + 1) * chunk).min(n + 1) {
                let jf = j as f64;
                let kstar = ((jf * x - u) / y).round();
                for dk in -1i64..=1 {
                    let k = kstar as i64 + dk;
                    if k < 0 || k as u64 > n {
                        continue;
                    }
                    let kf = k as f64;
                    let v = u - jf * x + kf * y;
                    let err = 8.0 * f64::EPSILON * (u.abs() + jf * x.abs() + kf * y.abs()) + 1e-15;
                    if v.abs() <= err {
                        return Err((j, k as u64));
                    }
                    best = best.min(v.abs());
                }
            }
            Ok(best)
        })
        .collect();
    let mut best = f64::INFINITY;
    for r in res {
        best = best.min(r?);
    }
    if n == 0 {
        best = best.min(u.abs());
    }
    Ok(best)
}

/// Arc test at each corner: positive angles certify directly; zero corners
/// use the family certificate or a bounded scan of u − jx + ky.
pub fn arc_check<F: Real>(fig: &BasicFigure<F>, n: u64) -> Result<ArcVerdict, ArcError> {
    let mut certs = Vec::new();
    let mut status = ArcStatus::Arc;
    let mut witness = None;
    for p in 1..fig.ell() {
        let (_, class) = classify_corner(fig, p);
        match class {
            AngleClass::Positive => certs.push((p, Certificate::AnglePositive)),
            AngleClass::Unresolved => return Err(ArcError::UnresolvedAngle(p)),
            AngleClass::Zero => {
                if fig.annotations.family.is_some() {
                    certs.push((p, Certificate::FamilyAnalytic));
                    continue;
                }
                let lp = log_params(fig, p);
                let f = |v: F| v.to_f64().unwrap();
                match diophantine_scan(f(lp.u), f(lp.x), f(lp.y), n) {
                    Ok(m) => {
                        certs.push((p, Certificate::BoundedDiophantine { n, min_margin: m }));
                        if status == ArcStatus::Arc {
                            status = ArcStatus::ArcUpToBound;
                        }
                    }
                    Err((j, k)) => {
                        status = ArcStatus::Unknown;
                        witness.get_or_insert((p, j, k));
                    }
                }
            }
        }
    }
    Ok(ArcVerdict {
        status,
        certificates: certs,
        witness,
    })
}
