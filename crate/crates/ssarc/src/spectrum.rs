//! Dimension, the normalized self-similar measure and its distribution
//! function f along the arc, and the level-dependent weights that turn f
//! into a Whitney function.
//!
//! The measure of a cylinder S_{j₁}⋯S_{j_k}(Λ) is r_{j₁}^s⋯r_{j_k}^s. This
//! is the normalized s-dimensional Hausdorff measure under the open set
//! condition; the true normalizing constant plays no role.

use rayon::prelude::*;
use thiserror::Error;

use crate::arc::{canonical_cover, ordered_maps, range_distance, word_map, ArcSystem, Word};
use crate::geom::{c, Real};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectrumError {
    #[error("hypothesis r_1^s̃ + r_ℓ^s̃ < Σ r_j^s̃ − 1 fails")]
    PreconditionForget,
    #[error("at least three maps are required")]
    InsufficientMiddleMaps,
    #[error("word depth {depth} exceeds the {levels} computed weight levels")]
    DepthExceedsWeights { depth: usize, levels: usize },
    #[error("distance bound not positive; raise the refinement")]
    NonpositiveBound,
    #[error("dimension must exceed 1")]
    NotAboveOne,
    #[error("invalid ε sequence")]
    InvalidEpsilon,
}

/// Neumaier-compensated sum in iteration order.
pub fn ksum<F: Real, I: IntoIterator<Item = F>>(it: I) -> F {
    let mut s = F::zero();
    let mut comp = F::zero();
    for x in it {
        let t = s + x;
        if s.abs() >= x.abs() {
            comp = comp + ((s - t) + x);
        } else {
            comp = comp + ((x - t) + s);
        }
        s = t;
    }
    s + comp
}

fn power_sum<F: Real>(ratios: &[F], s: F) -> F {
    ksum(ratios.iter().map(|r| r.powf(s)))
}

/// Root of the strictly decreasing map s ↦ Σ r^s − target by bisection.
fn solve_power_sum<F: Real>(ratios: &[F], target: F, mut lo: F, mut hi: F) -> F {
    let tol = c::<F>(1e-12).max(c::<F>(8.0) * F::epsilon());
    for _ in 0..400 {
        let mid = (lo + hi) * c::<F>(0.5);
        let v = power_sum(ratios, mid) - target;
        if v.abs() <= tol * c::<F>(0.01) || hi - lo <= F::epsilon() * mid.abs().max(F::one()) {
            return mid;
        }
        if v > F::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * c::<F>(0.5)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionResult<F: Real> {
    pub s: F,
    /// Σ r_j^s − 1.
    pub residual: F,
}

pub fn hausdorff_dimension<F: Real>(ratios: &[F]) -> DimensionResult<F> {
    assert!(ratios.len() >= 2 && ratios.iter().all(|&r| r > F::zero() && r < F::one()));
    let rmax = ratios.iter().fold(F::zero(), |m, &r| m.max(r));
    let hi = c::<F>(ratios.len() as f64).ln() / (F::one() / rmax).ln() + F::one();
    let s = solve_power_sum(ratios, F::one(), F::zero(), hi);
    DimensionResult {
        s,
        residual: power_sum(ratios, s) - F::one(),
    }
}

/// Π r_{digit}^s; 1 for the empty word.
pub fn cylinder_measure<F: Real>(ratios: &[F], word: &Word, s: F) -> F {
    word.0
        .iter()
        .fold(F::one(), |m, &d| m * ratios[d as usize - 1].powf(s))
}

/// Distribution-function values at every depth-k vertex given per-level
/// digit weights `w(level, digit)` (1-based). The end value is copied from
/// the parent so it stays exactly 1.
pub fn cumulative_values<F: Real>(
    sys: &ArcSystem<F>,
    k: usize,
    w: impl Fn(usize, usize) -> F + Sync,
) -> Vec<F> {
    let ell = sys.ell();
    let mut vals = vec![F::zero(), F::one()];
    let mut signs = vec![1i8];
    for level in 1..=k {
        let n = signs.len();
        let parts: Vec<(Vec<F>, Vec<i8>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let start = vals[i];
                let width = vals[i + 1] - vals[i];
                let sg = signs[i];
                let mut pts = Vec::with_capacity(ell);
                let mut sgs = Vec::with_capacity(ell);
                pts.push(start);
                let mut acc = Vec::with_capacity(ell);
                for t in 0..ell {
                    let d = if sg > 0 { t } else { ell - 1 - t };
                    acc.push(w(level, d + 1));
                    sgs.push(sg * sys.signs[d]);
                }
                let total = ksum(acc.iter().copied());
                let mut run = Vec::with_capacity(ell);
                for t in 0..ell - 1 {
                    run.push(acc[t]);
                    pts.push(start + width * ksum(run.iter().copied()) / total);
                }
                (pts, sgs)
            })
            .collect();
        let mut nv = Vec::with_capacity(n * ell + 1);
        let mut ns = Vec::with_capacity(n * ell);
        for (p, s) in parts {
            nv.extend(p);
            ns.extend(s);
        }
        nv.push(F::one());
        vals = nv;
        signs = ns;
    }
    vals
}

/// f at all depth-k vertices for the measure with weights r_j^s.
pub fn f_values<F: Real>(sys: &ArcSystem<F>, s: F, k: usize) -> Vec<F> {
    let w: Vec<F> = sys.maps.iter().map(|m| m.ratio().powf(s)).collect();
    cumulative_values(sys, k, |_, d| w[d - 1])
}

/// f(z_j^{(k)}) = H^s of the subarc from z₀ to z_j^{(k)}, normalized.
pub fn f_vertex<F: Real>(sys: &ArcSystem<F>, s: F, j: usize, k: usize) -> F {
    f_values(sys, s, k)[j]
}

/// The ℓ^k maps S_j^{(k)} in arc order, their words, and their ratios.
pub struct IteratedSystem<F: Real> {
    pub words: Vec<Word>,
    pub ratios: Vec<F>,
    pub system: ArcSystem<F>,
}

pub fn iterate_system<F: Real>(sys: &ArcSystem<F>, k: usize) -> IteratedSystem<F> {
    let words = ordered_maps(sys, k);
    let maps: Vec<_> = words.iter().map(|w| word_map(sys, w)).collect();
    let signs: Vec<i8> = words
        .iter()
        .map(|w| crate::arc::orientation_sign(sys, w))
        .collect();
    let ratios = maps.iter().map(|m| m.ratio()).collect();
    let system = ArcSystem {
        maps,
        signs,
        start: sys.start,
        end: sys.end,
        container: sys.container.clone(),
    };
    IteratedSystem {
        words,
        ratios,
        system,
    }
}

/// (holds, RHS − LHS) for r₁^s̃ + r_ℓ^s̃ < Σ r_j^s̃ − 1.
pub fn check_forget<F: Real>(ratios: &[F], s_tilde: F) -> (bool, F) {
    let l = ratios.len();
    let lhs = ratios[0].powf(s_tilde) + ratios[l - 1].powf(s_tilde);
    let rhs = power_sum(ratios, s_tilde) - F::one();
    let m = rhs - lhs;
    (m > F::zero(), m)
}

/// ε₁ ≥ … ≥ ε_K: rigorous lower bounds on the separations around each
/// first-level vertex z_j, capped at 1.
pub fn epsilon_sequence<F: Real>(
    sys: &ArcSystem<F>,
    big_k: usize,
    m: usize,
) -> Result<Vec<F>, SpectrumError> {
    let ratios: Vec<F> = sys.maps.iter().map(|s| s.ratio()).collect();
    if ratios.iter().copied().fold(F::zero(), |a, b| a + b) <= F::one() {
        return Err(SpectrumError::NotAboveOne);
    }
    let ell = sys.ell();
    let mut out: Vec<F> = Vec::with_capacity(big_k);
    for k in 1..=big_k {
        let d = k + 1;
        let lk = ell.pow(k as u32);
        let vals: Vec<F> = (1..ell)
            .into_par_iter()
            .map(|j| {
                let (d1, _) = range_distance(
                    sys,
                    d,
                    ((j - 1) * lk, j * lk - 1),
                    (j * lk, (j + 1) * lk),
                    m,
                );
                let (d2, _) = range_distance(
                    sys,
                    d,
                    ((j - 1) * lk, j * lk),
                    (j * lk + 1, (j + 1) * lk),
                    m,
                );
                d1.min(d2)
            })
            .collect();
        let mut e = vals.into_iter().fold(F::one(), |a, b| a.min(b));
        if let Some(&prev) = out.last() {
            e = e.min(prev);
        }
        if !(e > F::zero()) {
            return Err(SpectrumError::NonpositiveBound);
        }
        out.push(e);
    }
    Ok(out)
}

/// Level weights r_{j,k} of the Whitney measure and the quantities that
/// define them.
#[derive(Clone, Debug, PartialEq)]
pub struct WhitneyWeights<F: Real> {
    pub s: F,
    pub s_tilde: F,
    pub s_prime: F,
    pub gamma: F,
    pub eps: Vec<F>,
    pub tau_prime: Vec<F>,
    pub tau: Vec<F>,
    pub s_k: Vec<F>,
    /// `table[k-1][j-1]` = r_{j,k}.
    pub table: Vec<Vec<F>>,
    pub ratios: Vec<F>,
}

impl<F: Real> WhitneyWeights<F> {
    pub fn levels(&self) -> usize {
        self.table.len()
    }

    pub fn weight(&self, j: usize, k: usize) -> F {
        self.table[k - 1][j - 1]
    }
}

pub fn whitney_weights<F: Real>(
    ratios: &[F],
    s_tilde: F,
    eps: &[F],
    big_k: usize,
) -> Result<WhitneyWeights<F>, SpectrumError> {
    let ell = ratios.len();
    if ell < 3 {
        return Err(SpectrumError::InsufficientMiddleMaps);
    }
    if eps.len() < big_k
        || eps.is_empty()
        || eps[0] > F::one()
        || eps.iter().any(|&e| !(e > F::zero()))
    {
        return Err(SpectrumError::InvalidEpsilon);
    }
    if !check_forget(ratios, s_tilde).0 {
        return Err(SpectrumError::PreconditionForget);
    }
    let s = hausdorff_dimension(ratios).s;
    let mid = &ratios[1..ell - 1];
    let s_prime = solve_power_sum(mid, F::one(), F::zero(), s);
    let rmin = mid.iter().fold(F::one(), |m, &r| m.min(r));
    let half = c::<F>(0.5);
    let six_over_pi2 = c::<F>(6.0 / (std::f64::consts::PI * std::f64::consts::PI));
    let gamma =
        half * (s - s_prime).min(six_over_pi2 * (F::one() + eps[0]).ln() / (F::one() / rmin).ln());
    let (r1s, rls) = (ratios[0].powf(s), ratios[ell - 1].powf(s));
    let mut w = WhitneyWeights {
        s,
        s_tilde,
        s_prime,
        gamma,
        eps: eps[..big_k].to_vec(),
        tau_prime: vec![],
        tau: vec![],
        s_k: vec![],
        table: vec![],
        ratios: ratios.to_vec(),
    };
    for k in 1..=big_k {
        let kk = c::<F>((k * k) as f64);
        let top = s_prime + gamma / kk;
        let tp = (F::one() - power_sum(mid, top)) * half;
        let tk = r1s.min(rls).min(eps[k - 1].powf(s_tilde)).min(tp);
        let sk = solve_power_sum(mid, F::one() - c::<F>(2.0) * tk, s_prime, top);
        let mut row = Vec::with_capacity(ell);
        row.push(tk);
        row.extend(mid.iter().map(|r| r.powf(sk)));
        row.push(tk);
        w.tau_prime.push(tp);
        w.tau.push(tk);
        w.s_k.push(sk);
        w.table.push(row);
    }
    Ok(w)
}

/// μ(S_{j₁}⋯S_{j_k}(Λ)) = r_{j₁,1}⋯r_{j_k,k}.
pub fn whitney_measure_cylinder<F: Real>(
    word: &Word,
    w: &WhitneyWeights<F>,
) -> Result<F, SpectrumError> {
    if word.depth() > w.levels() {
        return Err(SpectrumError::DepthExceedsWeights {
            depth: word.depth(),
            levels: w.levels(),
        });
    }
    Ok(word
        .0
        .iter()
        .enumerate()
        .fold(F::one(), |m, (i, &d)| m * w.weight(d as usize, i + 1)))
}

/// μ of the subarc from z₀ to z_j^{(k)}.
pub fn whitney_f_values<F: Real>(
    sys: &ArcSystem<F>,
    w: &WhitneyWeights<F>,
    k: usize,
) -> Result<Vec<F>, SpectrumError> {
    if k > w.levels() {
        return Err(SpectrumError::DepthExceedsWeights {
            depth: k,
            levels: w.levels(),
        });
    }
    Ok(cumulative_values(sys, k, |lvl, d| w.weight(d, lvl)))
}

pub fn whitney_f_vertex<F: Real>(
    sys: &ArcSystem<F>,
    w: &WhitneyWeights<F>,
    j: usize,
    k: usize,
) -> Result<F, SpectrumError> {
    Ok(whitney_f_values(sys, w, k)?[j])
}

/// All words of the given depth over ℓ digits, lexicographic.
pub fn all_words(ell: usize, depth: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..depth {
        out = out
            .iter()
            .flat_map(|w| (1..=ell as u16).map(move |d| w.push(d)))
            .collect();
    }
    out
}

/// Outcome of checking μ(S_w(E)) ≤ (1+ε₁) r_w^{s′} μ(E) on cylinders E.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderInequality<F: Real> {
    pub pairs: u64,
    pub violations: u64,
    /// max of μ(S_w(E)) / (r_w^{s′} μ(E)).
    pub max_ratio: F,
    /// min of (1+ε₁) − ratio; negative means a violation.
    pub worst_slack: F,
}

/// Exhaustive check over prefixes w of depth ≤ `prefix_depth` and
/// cylinder sets E of depth ≤ `e_depth`.
pub fn check_cylinder_inequality<F: Real>(
    w: &WhitneyWeights<F>,
    prefix_depth: usize,
    e_depth: usize,
) -> Result<CylinderInequality<F>, SpectrumError> {
    if prefix_depth + e_depth > w.levels() {
        return Err(SpectrumError::DepthExceedsWeights {
            depth: prefix_depth + e_depth,
            levels: w.levels(),
        });
    }
    let ell = w.ratios.len();
    let bound = F::one() + w.eps[0];
    // per-level factors: prefix digit at level i contributes r_{j,i}/r_j^{s′};
    // an E digit at position i below a depth-p prefix contributes r_{j,p+i}/r_{j,i}
    let mut best = (0u64, 0u64, F::zero());
    for p in 0..=prefix_depth {
        let prefixes = all_words(ell, p);
        let pf: Vec<F> = prefixes
            .iter()
            .map(|pw| {
                pw.0.iter().enumerate().fold(F::one(), |m, (i, &d)| {
                    m * w.weight(d as usize, i + 1) / w.ratios[d as usize - 1].powf(w.s_prime)
                })
            })
            .collect();
        for e in 0..=e_depth {
            let es = all_words(ell, e);
            let ef: Vec<F> = es
                .iter()
                .map(|ew| {
                    ew.0.iter().enumerate().fold(F::one(), |m, (i, &d)| {
                        m * w.weight(d as usize, p + i + 1) / w.weight(d as usize, i + 1)
                    })
                })
                .collect();
            let (viol, mx) = pf
                .par_iter()
                .map(|&a| {
                    let mut v = 0u64;
                    let mut mx = F::zero();
                    for &b in &ef {
                        let r = a * b;
                        if r > bound {
                            v += 1;
                        }
                        mx = mx.max(r);
                    }
                    (v, mx)
                })
                .reduce(|| (0, F::zero()), |x, y| (x.0 + y.0, x.1.max(y.1)));
            best.0 += (pf.len() * ef.len()) as u64;
            best.1 += viol;
            best.2 = best.2.max(mx);
        }
    }
    Ok(CylinderInequality {
        pairs: best.0,
        violations: best.1,
        max_ratio: best.2,
        worst_slack: bound - best.2,
    })
}

/// Sum of cylinder measures over the canonical cover of a vertex range;
/// equals f(hi) − f(lo) for the s-measure.
pub fn range_measure<F: Real>(sys: &ArcSystem<F>, s: F, depth: usize, lo: usize, hi: usize) -> F {
    ksum(
        canonical_cover(sys, depth, lo, hi)
            .iter()
            .map(|(m, _)| m.ratio().powf(s)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let r = hausdorff_dimension(&[0.5f64, 0.5]);
        assert!((r.s - 1.0).abs() < 1e-12);
        let k = hausdorff_dimension(&[1.0f64 / 3.0; 4]);
        assert!((k.s - 4f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!(k.residual.abs() <= 1e-12);
    }

    #[test]
    fn forget_examples() {
        assert!(!check_forget(&[1.0f64 / 3.0; 4], 1.2).0);
        assert!(check_forget(&[1.0f64 / 9.0; 16], 1.1).0);
    }
}
