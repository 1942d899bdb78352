//! Real Laurent polynomials `f(z) = Σ t_m z^m` describing `H_A = Σ t_m A_m`,
//! square factorizations `f = ±z^p g(z)²`, the layer coefficients `b_k`,
//! the couplings `r_α`, winding numbers and square-root truncation.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::policy::NumericPolicy;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaurentPoly {
    min_deg: i64,
    coeffs: Vec<f64>,
}

impl LaurentPoly {
    /// Builds `Σ_i coeffs[i] z^{min_deg+i}`, trimming zero coefficients at both ends.
    pub fn new(min_deg: i64, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::contract("Laurent coefficients must be finite"));
        }
        let first = coeffs.iter().position(|&c| c != 0.0);
        let last = coeffs.iter().rposition(|&c| c != 0.0);
        match (first, last) {
            (Some(a), Some(b)) => Ok(LaurentPoly { min_deg: min_deg + a as i64, coeffs: coeffs[a..=b].to_vec() }),
            _ => Err(Error::contract("Laurent polynomial must have a nonzero coefficient")),
        }
    }

    /// Builds a polynomial from `(m, t_m)` pairs; repeated degrees add up.
    pub fn from_terms(terms: &[(i64, f64)]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::contract("Laurent polynomial must have a nonzero coefficient"));
        }
        let lo = terms.iter().map(|t| t.0).min().unwrap();
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![0.0; (hi - lo + 1) as usize];
        for &(m, t) in terms {
            coeffs[(m - lo) as usize] += t;
        }
        LaurentPoly::new(lo, coeffs)
    }

    pub fn min_deg(&self) -> i64 {
        self.min_deg
    }

    pub fn max_deg(&self) -> i64 {
        self.min_deg + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `t_m` (zero outside the support).
    pub fn coeff(&self, m: i64) -> f64 {
        let i = m - self.min_deg;
        if i < 0 || i >= self.coeffs.len() as i64 {
            0.0
        } else {
            self.coeffs[i as usize]
        }
    }

    /// `(m, t_m)` over the support, zero entries included.
    pub fn terms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, &t)| (self.min_deg + i as i64, t))
    }

    pub fn eval(&self, z: C64) -> Result<C64> {
        if z == ZERO {
            if self.min_deg < 0 {
                return Err(Error::domain("Laurent polynomial with negative powers evaluated at z = 0"));
            }
            return Ok(if self.min_deg == 0 { C64::new(self.coeffs[0], 0.0) } else { ZERO });
        }
        let horner = self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c);
        Ok(horner * z.powi(self.min_deg as i32))
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        LaurentPoly::new(self.min_deg + other.min_deg, out).expect("product of nonzero polynomials")
    }

    pub fn scale(&self, c: f64) -> Result<LaurentPoly> {
        LaurentPoly::new(self.min_deg, self.coeffs.iter().map(|t| t * c).collect())
    }
}

/// `f = sign · z^p · (Σ_k s_k z^k)²`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquareFactorization {
    pub sign: i8,
    pub p: i64,
    pub s: Vec<f64>,
}

impl SquareFactorization {
    pub fn reconstruct(&self) -> Result<LaurentPoly> {
        let g = LaurentPoly::new(0, self.s.clone())?;
        g.mul(&g).scale(self.sign as f64).map(|f| LaurentPoly { min_deg: f.min_deg + self.p, ..f })
    }
}

/// Detects `f = ±z^p g(z)²` with `g` a real polynomial, `g(0) > 0`.
pub fn factor_square(f: &LaurentPoly) -> Option<SquareFactorization> {
    let span = f.coeffs.len() - 1;
    if span % 2 == 1 {
        return None;
    }
    let d = span / 2;
    let sign: i8 = if f.coeffs[0] > 0.0 { 1 } else { -1 };
    let big: Vec<f64> = f.coeffs.iter().map(|t| t * sign as f64).collect();
    let g0 = big[0].sqrt();
    let mut s = vec![g0];
    for k in 1..=d {
        let conv: f64 = (1..k).map(|i| s[i] * s[k - i]).sum();
        s.push((big[k] - conv) / (2.0 * g0));
    }
    let cand = SquareFactorization { sign, p: f.min_deg, s };
    let rec = cand.reconstruct().ok()?;
    let scale = f.coeffs.iter().fold(0f64, |m, c| m.max(c.abs()));
    let ok = (f.min_deg..=f.max_deg()).all(|m| (rec.coeff(m) - f.coeff(m)).abs() <= 1e-10 * scale)
        && rec.min_deg >= f.min_deg
        && rec.max_deg() <= f.max_deg();
    ok.then_some(cand)
}

/// Layer coefficients `b_1..b_d`, keyed by `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BkList {
    /// `b[k-1] = b_k`; `None` when the recursion stopped before reaching `k`.
    pub b: Vec<Option<f64>>,
    /// Smallest-index-first list of `k` with `|b_k|` within the singular band of 1.
    pub singular: Vec<usize>,
}

impl BkList {
    pub fn d(&self) -> usize {
        self.b.len()
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.b.get(k.checked_sub(1)?).copied().flatten()
    }

    pub fn is_singular(&self) -> bool {
        !self.singular.is_empty()
    }

    /// All `b_k` when none is singular.
    pub fn values(&self) -> Result<Vec<f64>> {
        if let Some(&k) = self.singular.iter().max() {
            return Err(Error::Singular { k, value: self.get(k).unwrap_or(f64::NAN) });
        }
        Ok(self.b.iter().map(|b| b.expect("complete list")).collect())
    }
}

/// Schur–Cohn style recursion: for `k = d..1`, `b_k = s_k/s_0`, then
/// `s_i ← s_i − b_k s_{k−i}` for `i = 0..k`.
pub fn schur_cohn_bk(s: &[f64]) -> Result<BkList> {
    schur_cohn_bk_with(s, NumericPolicy::default().singular_band)
}

pub fn schur_cohn_bk_with(s: &[f64], band: f64) -> Result<BkList> {
    if s.is_empty() || s[0] == 0.0 || s.iter().any(|x| !x.is_finite()) {
        return Err(Error::contract("coefficient vector needs a finite nonzero s_0"));
    }
    let d = s.len() - 1;
    let scale = s.iter().fold(0f64, |m, x| m.max(x.abs()));
    let mut w = s.to_vec();
    let mut b = vec![None; d];
    let mut singular = Vec::new();
    for k in (1..=d).rev() {
        if w[0].abs() <= 1e-12 * scale {
            break;
        }
        let bk = w[k] / w[0];
        b[k - 1] = Some(bk);
        if (bk.abs() - 1.0).abs() <= band {
            singular.push(k);
        }
        let old = w.clone();
        for i in 0..=k {
            w[i] = old[i] - bk * old[k - i];
        }
    }
    singular.sort_unstable();
    Ok(BkList { b, singular })
}

/// Couplings `r_α` for `α = lo..=d`, with `lo = min(0, 1−d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RAlphaList {
    pub d: usize,
    pub r: Vec<f64>,
}

impl RAlphaList {
    pub fn lo(&self) -> i64 {
        (1 - self.d as i64).min(0)
    }

    pub fn hi(&self) -> i64 {
        self.d as i64
    }

    pub fn get(&self, alpha: i64) -> f64 {
        if alpha < self.lo() || alpha > self.hi() {
            0.0
        } else {
            self.r[(alpha - self.lo()) as usize]
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let lo = self.lo();
        self.r.iter().enumerate().map(move |(i, &r)| (lo + i as i64, r))
    }
}

/// Layered updates `u_i = r_i + b_k r_{k−i}` for `k = d..1`, then rescaled so
/// that `r_0 = |s|²`.
pub fn r_alpha(s: &[f64]) -> Result<RAlphaList> {
    let b = schur_cohn_bk(s)?.values()?;
    let d = s.len() - 1;
    let lo = (1 - d as i64).min(0);
    let at = |a: i64| (a - lo) as usize;
    let mut r = vec![0.0; (d as i64 - lo + 1) as usize];
    for (a, &sa) in s.iter().enumerate() {
        r[at(a as i64)] = sa;
    }
    for k in (1..=d).rev() {
        let bk = b[k - 1];
        let i_max = if k == d { d } else { d - 1 } as i64;
        let mut u = r.clone();
        for i in (k as i64 - d as i64)..=i_max {
            u[at(i)] = r[at(i)] + bk * r[at(k as i64 - i)];
        }
        r = u;
    }
    let norm2: f64 = s.iter().map(|x| x * x).sum();
    let r0 = r[at(0)];
    if r0.abs() <= f64::EPSILON * norm2 {
        return Err(Error::numeric("r_0 vanished before normalization"));
    }
    let c = norm2 / r0;
    Ok(RAlphaList { d, r: r.into_iter().map(|x| x * c).collect() })
}

fn circle_samples(f: &LaurentPoly, n: usize) -> Vec<C64> {
    (0..n).map(|i| f.eval(C64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64)).expect("z on circle")).collect()
}

/// Winding number of `f` around the origin along `|z| = 1`, counted by
/// accumulating the argument with local refinement where it turns quickly.
pub fn winding_number(f: &LaurentPoly) -> Result<i64> {
    const GRID: usize = 4096;
    let vals = circle_samples(f, GRID);
    let max = vals.iter().fold(0f64, |m, v| m.max(v.norm()));
    let min = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.norm()));
    if !(min > 1e-8 * max) {
        return Err(Error::Gapless(format!("|f| reaches {min:.3e} on the unit circle (max {max:.3e})")));
    }
    fn arc(f: &LaurentPoly, t0: f64, t1: f64, v0: C64, v1: C64, depth: u32) -> f64 {
        let step = (v1 / v0).arg();
        if step.abs() < PI / 4.0 || depth == 0 {
            return step;
        }
        let tm = 0.5 * (t0 + t1);
        let vm = f.eval(C64::from_polar(1.0, tm)).expect("z on circle");
        arc(f, t0, tm, v0, vm, depth - 1) + arc(f, tm, t1, vm, v1, depth - 1)
    }
    let h = 2.0 * PI / GRID as f64;
    let total: f64 = (0..GRID).map(|i| arc(f, i as f64 * h, (i + 1) as f64 * h, vals[i], vals[(i + 1) % GRID], 30)).sum();
    Ok((total / (2.0 * PI)).round() as i64)
}

/// Roots of `Σ c_i z^i` (ascending coefficients, nonzero leading term).
pub fn poly_roots(c: &[f64]) -> Result<Vec<C64>> {
    let n = c.len().checked_sub(1).ok_or_else(|| Error::contract("empty polynomial"))?;
    let lead = c[n];
    if lead == 0.0 {
        return Err(Error::contract("leading coefficient must be nonzero"));
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![C64::new(-c[0] / c[1], 0.0)]),
        _ => {}
    }
    // companion matrix of the monic polynomial
    let comp = Mat::<f64>::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = comp.eigenvalues().map_err(|e| Error::numeric(format!("companion eigenvalues failed: {e:?}")))?;
    let eval = |z: C64| c.iter().rev().fold(ZERO, |acc, &x| acc * z + x);
    let deriv = |z: C64| (1..=n).rev().fold(ZERO, |acc, i| acc * z + c[i] * i as f64);
    let mut roots: Vec<C64> = eig
        .into_iter()
        .map(|z| {
            let dz = deriv(z);
            if dz.norm() > 0.0 {
                let step = eval(z) / dz;
                if step.is_finite() && step.norm() < 1e-3 * z.norm().max(1.0) {
                    return z - step;
                }
            }
            z
        })
        .collect();
    if roots.iter().any(|z| !z.is_finite()) {
        return Err(Error::numeric("root finder produced non-finite roots"));
    }
    // enforce conjugate symmetry of a real polynomial
    let tol = 1e-9;
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let z = roots[i];
        if z.im.abs() <= tol * z.norm().max(1.0) {
            roots[i] = C64::new(z.re, 0.0);
            used[i] = true;
            continue;
        }
        let partner = (0..n)
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| (roots[a] - z.conj()).norm().total_cmp(&(roots[b] - z.conj()).norm()));
        if let Some(j) = partner {
            let avg = 0.5 * (z + roots[j].conj());
            roots[i] = avg;
            roots[j] = avg.conj();
            used[j] = true;
        }
        used[i] = true;
    }
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
    Ok(roots)
}

/// Result of approximating a gapped `f` by a skeleton polynomial `f_D`.
#[derive(Debug, Clone, Serialize)]
pub struct TruncationReport {
    pub d: usize,
    /// Power of `z` in `f = sign · z^q · g²`.
    pub q: i64,
    pub sign: i8,
    /// `s_{−D}..s_D`
    pub g: Vec<f64>,
    pub inner_roots: Vec<(f64, f64)>,
    pub outer_roots: Vec<(f64, f64)>,
    /// Leading scale `σ` of `z^{−min_deg} f`.
    pub sigma: f64,
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub m_rho_minus: f64,
    pub m_rho_plus: f64,
    /// `ρ_+/(ρ_+−1) + ρ_−/(1−ρ_−)`
    pub sigma_sum: f64,
    source: LaurentPoly,
}

impl TruncationReport {
    /// `f_D = sign · z^q · g_D²`
    pub fn f_d(&self) -> Result<LaurentPoly> {
        let g = LaurentPoly::new(-(self.d as i64), self.g.clone())?;
        let sq = g.mul(&g).scale(self.sign as f64)?;
        Ok(LaurentPoly { min_deg: sq.min_deg + self.q, ..sq })
    }

    /// The skeleton point `f_D = sign · z^p · (Σ s_k z^k)²` with `s_0 ≠ 0`.
    /// End coefficients below `1e−13` of the largest are dropped as roundoff.
    pub fn skeleton(&self) -> Result<SquareFactorization> {
        let big = self.g.iter().fold(0f64, |m, x| m.max(x.abs()));
        let keep = |x: &f64| x.abs() > 1e-13 * big;
        let first = self.g.iter().position(keep).ok_or_else(|| Error::numeric("truncated g vanished"))?;
        let last = self.g.iter().rposition(keep).unwrap();
        let mut s = self.g[first..=last].to_vec();
        if s[0] < 0.0 {
            s.iter_mut().for_each(|x| *x = -*x);
        }
        Ok(SquareFactorization { sign: self.sign, p: self.q - 2 * self.d as i64 + 2 * first as i64, s })
    }

    pub fn source(&self) -> &LaurentPoly {
        &self.source
    }
}

fn sqrt_series(order: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for k in 1..=order {
        let prev = c[k - 1];
        c.push(prev * (2.0 * k as f64 - 3.0) / (2.0 * k as f64));
    }
    c
}

/// Truncated Laurent series of `g = √|K| ∏ √(1 − z_j/z) ∏ √(1 − z/Z_k)` on `−D..D`.
pub fn sqrt_truncate(f: &LaurentPoly, d: usize) -> Result<TruncationReport> {
    let policy = NumericPolicy::default();
    let roots = poly_roots(&f.coeffs)?;
    let rmax = roots.iter().fold(1f64, |m, z| m.max(z.norm()));
    if let Some(z) = roots.iter().find(|z| (z.norm() - 1.0).abs() <= policy.circle_proximity * rmax) {
        return Err(Error::Gapless(format!("root {z} lies on the unit circle")));
    }
    let (inner, outer): (Vec<C64>, Vec<C64>) = roots.iter().partition(|z| z.norm() < 1.0);
    let sigma = *f.coeffs.last().unwrap();
    let k = outer.iter().fold(C64::new(sigma, 0.0), |acc, z| acc * -z);
    if k.im.abs() > 1e-8 * k.norm() {
        return Err(Error::numeric("leading constant is not real"));
    }
    let sign: i8 = if k.re > 0.0 { 1 } else { -1 };
    let q = f.min_deg + inner.len() as i64;

    let order = 2 * d;
    let c = sqrt_series(order);
    // coefficients of z^{−order..order}
    let width = 2 * order + 1;
    let mut acc = vec![ZERO; width];
    acc[order] = ONE;
    let factor = |root_pow: C64, negative: bool| -> Vec<C64> {
        let mut out = vec![ZERO; width];
        let mut w = ONE;
        for (kk, &ck) in c.iter().enumerate() {
            let idx = if negative { order - kk } else { order + kk };
            out[idx] = w * ck;
            w *= root_pow;
        }
        out
    };
    let conv = |a: &[C64], b: &[C64]| -> Vec<C64> {
        let mut out = vec![ZERO; width];
        for (i, &x) in a.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                let e = i as i64 + j as i64 - order as i64;
                if (0..width as i64).contains(&e) {
                    out[e as usize] += x * y;
                }
            }
        }
        out
    };
    for z in &inner {
        acc = conv(&acc, &factor(*z, true));
    }
    for z in &outer {
        acc = conv(&acc, &factor(ONE / z, false));
    }
    let root_k = k.re.abs().sqrt();
    let cut = &acc[order - d..=order + d];
    let big = cut.iter().fold(0f64, |m, x| m.max(x.norm()));
    if cut.iter().any(|x| x.im.abs() > 1e-10 * big.max(1.0)) {
        return Err(Error::numeric("truncated square root has complex coefficients"));
    }
    let g: Vec<f64> = cut.iter().map(|x| x.re * root_k).collect();

    let rho_minus = inner.iter().map(|z| z.norm()).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    let rho_minus = rho_minus.map_or(0.5, f64::sqrt);
    let rho_plus = outer.iter().map(|z| z.norm()).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))));
    let rho_plus = rho_plus.map_or(2.0, f64::sqrt);

    let mut report = TruncationReport {
        d,
        q,
        sign,
        g,
        inner_roots: inner.iter().map(|z| (z.re, z.im)).collect(),
        outer_roots: outer.iter().map(|z| (z.re, z.im)).collect(),
        sigma,
        rho_minus,
        rho_plus,
        m_rho_minus: 0.0,
        m_rho_plus: 0.0,
        sigma_sum: rho_plus / (rho_plus - 1.0) + rho_minus / (1.0 - rho_minus),
        source: f.clone(),
    };
    let fd = report.f_d()?;
    let sup = |rho: f64| -> Result<f64> {
        let mut m = 0f64;
        for i in 0..2048 {
            let z = C64::from_polar(rho, 2.0 * PI * i as f64 / 2048.0);
            m = m.max((fd.eval(z)? - f.eval(z)?).norm());
        }
        Ok(m)
    };
    report.m_rho_minus = sup(rho_minus)?;
    report.m_rho_plus = sup(rho_plus)?;
    Ok(report)
}

/// Bound on the energy-density error of the truncated skeleton state:
/// `2 · max(M_{ρ+}, M_{ρ−}) · Σ · (N−1)/(2N)`.
pub fn truncation_error_bound(report: &TruncationReport, n: usize) -> Result<f64> {
    let inner_max = report.inner_roots.iter().map(|&(re, im)| C64::new(re, im).norm()).fold(0f64, f64::max);
    let outer_min = report.outer_roots.iter().map(|&(re, im)| C64::new(re, im).norm()).fold(f64::INFINITY, f64::min);
    let (rm, rp) = (report.rho_minus, report.rho_plus);
    if !(inner_max < rm && rm < 1.0 && 1.0 < rp && rp < outer_min) {
        return Err(Error::domain("no annulus separates the roots from the unit circle"));
    }
    let e_max = (n as f64 - 1.0) / (2.0 * n as f64);
    Ok(2.0 * report.m_rho_plus.max(report.m_rho_minus) * report.sigma_sum * e_max)
}

/// Outcome of running the Schur transform on `g`.
#[derive(Debug, Clone, Serialize)]
pub struct CircleScan {
    pub bk: BkList,
    /// Some `|b_k| = 1` or a vanishing constant term arose.
    pub flagged: bool,
    /// Numerically found roots of `g` on the unit circle.
    pub circle_roots: usize,
    /// `circle_roots > 0 ⇒ flagged`
    pub consistent: bool,
}

pub fn unit_circle_zero_scan(s: &[f64]) -> Result<CircleScan> {
    if s.is_empty() || s[0] == 0.0 || *s.last().unwrap() == 0.0 {
        return Err(Error::contract("scan needs s_0 ≠ 0 and s_d ≠ 0"));
    }
    let bk = schur_cohn_bk(s)?;
    let flagged = bk.is_singular() || bk.b.iter().any(|b| b.is_none());
    let roots = poly_roots(s)?;
    let circle_roots = roots.iter().filter(|z| (z.norm() - 1.0).abs() <= 1e-6).count();
    Ok(CircleScan { bk, flagged, circle_roots, consistent: circle_roots == 0 || flagged })
}
