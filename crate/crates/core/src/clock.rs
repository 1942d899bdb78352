//! Clock and shift operators, the Onsager generators `A_k`, `G_k`, pivots and
//! the chain symmetries.
//!
//! `A_0` is a sum of single-site terms and `A_1` is diagonal in the clock basis.
//! Every other generator follows from the pivots `U_m = e^{-iπA_m}`, which map
//! `A_l` to `A_{2m-l}`. With `W = U_1 U_0` one has `A_{2j+b} = W^j A_b W^{-j}`,
//! so all generators (and their exponentials) act on states through products
//! of cheap single-site and diagonal factors. Dense matrices are assembled
//! column by column from those actions.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::linalg::{
    apply_local_gate, commutator, matexp_hermitian, DenseOperator, SiteLayout, StateVector, C64, I, ONE, ZERO,
};
use crate::policy::NumericPolicy;

/// An `N`-state clock chain on `L` periodic sites.
#[derive(Debug, Clone)]
pub struct ClockChain {
    n: usize,
    l: usize,
    omega: C64,
    site_x: DenseOperator,
    site_z: DenseOperator,
    policy: NumericPolicy,
    a0_site: DenseOperator,
    a1_diag: OnceLock<Arc<Vec<f64>>>,
}

/// `ω = e^{2πi/N}`
pub fn omega(n: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI / n as f64)
}

/// `ω^k` reduced mod `N` before evaluation, so exact powers stay accurate.
pub fn omega_pow(n: usize, k: i64) -> C64 {
    let r = k.rem_euclid(n as i64);
    match (r, n as i64) {
        (0, _) => return ONE,
        (r, n) if 2 * r == n => return -ONE,
        (r, n) if 4 * r == n => return I,
        (r, n) if 4 * r == 3 * n => return -I,
        _ => {}
    }
    C64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64)
}

/// Coupling `α_m = 1/(1 − ω^m)` for `m ≢ 0 mod N`.
pub fn alpha(n: usize, m: i64) -> C64 {
    assert!(m.rem_euclid(n as i64) != 0, "alpha_m undefined for m = 0 mod N");
    ONE / (ONE - omega_pow(n, m))
}

/// Bond energy of `A_1` between neighbours with clock values `x` (left) and `y`:
/// `−(1/N) Σ_m α_m ω^{−m(x−y)}`, evaluated as the complex sum.
pub fn bond_energy(n: usize, x: usize, y: usize) -> f64 {
    let d = x as i64 - y as i64;
    let s: C64 = (1..n as i64).map(|m| alpha(n, m) * omega_pow(n, -m * d)).sum();
    -s.re / n as f64
}

pub fn build_chain(n: usize, l: usize) -> Result<ClockChain> {
    ClockChain::new(n, l)
}

impl ClockChain {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        Self::with_policy(n, l, NumericPolicy::default())
    }

    pub fn with_policy(n: usize, l: usize, policy: NumericPolicy) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("N must be at least 2, got {n}")));
        }
        if l < n {
            return Err(Error::domain(format!("L must be at least N, got L={l}, N={n}")));
        }
        if !l.is_multiple_of(n) {
            return Err(Error::domain(format!(
                "L={l} is not a multiple of N={n}; such chains have frustrated ground states"
            )));
        }
        let w = omega(n);
        let site_x = DenseOperator::from_fn(n, |r, c| if r == (c + n - 1) % n { ONE } else { ZERO });
        let site_z = DenseOperator::from_diagonal(&(0..n).map(|a| omega_pow(n, a as i64)).collect::<Vec<_>>());
        // a0 = −(1/N) Σ_m α_m X^m; X^m sends |c⟩ to |c−m⟩
        let a0_site = DenseOperator::from_fn(n, |r, c| {
            let m = (c as i64 - r as i64).rem_euclid(n as i64);
            if m == 0 {
                ZERO
            } else {
                -alpha(n, m) / n as f64
            }
        });
        Ok(ClockChain { n, l, omega: w, site_x, site_z, policy, a0_site, a1_diag: OnceLock::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn omega(&self) -> C64 {
        self.omega
    }

    pub fn site_x(&self) -> &DenseOperator {
        &self.site_x
    }

    pub fn site_z(&self) -> &DenseOperator {
        &self.site_z
    }

    /// Single-site term of `A_0`.
    pub fn a0_site(&self) -> &DenseOperator {
        &self.a0_site
    }

    pub fn policy(&self) -> &NumericPolicy {
        &self.policy
    }

    pub fn layout(&self) -> SiteLayout {
        SiteLayout { local_dim: self.n, sites: self.l }
    }

    /// Hilbert dimension `N^L`, saturating on overflow.
    pub fn dim(&self) -> usize {
        (self.n as u128).pow(self.l as u32).min(usize::MAX as u128) as usize
    }

    /// Ground energy of every generator, `−L(N−1)/(2N)`.
    pub fn e0(&self) -> f64 {
        -(self.l as f64) * (self.n as f64 - 1.0) / (2.0 * self.n as f64)
    }

    pub(crate) fn check_state_capacity(&self, what: &'static str) -> Result<()> {
        let dim = self.dim();
        if dim > self.policy.max_state_dim {
            return Err(Error::Capacity { what, requested: dim, limit: self.policy.max_state_dim });
        }
        Ok(())
    }

    pub(crate) fn check_matrix_capacity(&self, what: &'static str) -> Result<()> {
        let dim = self.dim();
        if dim > self.policy.max_matrix_dim {
            return Err(Error::Capacity { what, requested: dim, limit: self.policy.max_matrix_dim });
        }
        Ok(())
    }

    fn check_state(&self, v: &StateVector) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::contract(format!("state has dimension {}, chain needs {}", v.dim(), self.dim())));
        }
        Ok(())
    }

    /// Diagonal of `A_1` in the clock basis.
    pub fn a1_diagonal(&self) -> Result<Arc<Vec<f64>>> {
        self.check_state_capacity("A_1 diagonal")?;
        Ok(self
            .a1_diag
            .get_or_init(|| {
                let n = self.n;
                let bonds: Vec<f64> = (0..n * n).map(|i| bond_energy(n, i / n, i % n)).collect();
                let layout = self.layout();
                let diag = (0..self.dim())
                    .map(|idx| {
                        let d = layout.digits(idx);
                        (0..self.l).map(|j| bonds[d[(j + self.l - 1) % self.l] * n + d[j]]).sum()
                    })
                    .collect();
                Arc::new(diag)
            })
            .clone())
    }

    fn apply_site_product(&self, gate: &DenseOperator, v: &StateVector) -> Result<StateVector> {
        let layout = self.layout();
        let mut out = v.clone();
        for j in 1..=self.l {
            out = apply_local_gate(&out, gate, j, 1, layout)?;
        }
        Ok(out)
    }

    fn apply_diag_fn(&self, v: &StateVector, f: impl Fn(f64) -> C64) -> Result<StateVector> {
        let diag = self.a1_diagonal()?;
        let mut out = v.clone();
        for (a, &d) in out.amplitudes_mut().iter_mut().zip(diag.iter()) {
            *a *= f(d);
        }
        Ok(out)
    }

    fn apply_a0(&self, v: &StateVector) -> Result<StateVector> {
        let layout = self.layout();
        let mut out = StateVector::zeros(v.dim());
        for j in 1..=self.l {
            out.axpy(ONE, &apply_local_gate(v, &self.a0_site, j, 1, layout)?);
        }
        Ok(out)
    }

    /// `U_0 = e^{−iπA_0}` (or its inverse) as a product of single-site gates.
    fn apply_u0(&self, v: &StateVector, inverse: bool) -> Result<StateVector> {
        let s = if inverse { I * PI } else { -I * PI };
        self.apply_site_product(&matexp_hermitian(&self.a0_site, s)?, v)
    }

    fn apply_u1(&self, v: &StateVector, inverse: bool) -> Result<StateVector> {
        let s = if inverse { PI } else { -PI };
        self.apply_diag_fn(v, |d| C64::from_polar(1.0, s * d))
    }

    /// `W^j v` with `W = U_1 U_0`; negative `j` applies `W^{-1} = U_0† U_1†`.
    pub fn apply_w_power(&self, j: i64, v: &StateVector) -> Result<StateVector> {
        self.check_state(v)?;
        let mut out = v.clone();
        if j >= 0 {
            for _ in 0..j {
                out = self.apply_u0(&out, false)?;
                out = self.apply_u1(&out, false)?;
            }
        } else {
            for _ in 0..(-j) {
                out = self.apply_u1(&out, true)?;
                out = self.apply_u0(&out, true)?;
            }
        }
        Ok(out)
    }

    /// `U_m v` (or `U_m† v`) for any integer `m`, with `U_m = e^{−iπA_m}`.
    pub fn apply_pivot(&self, m: i64, v: &StateVector, inverse: bool) -> Result<StateVector> {
        let s = if inverse { I * PI } else { -I * PI };
        self.apply_exp_a(m, s, v)
    }

    /// `A_k v`
    pub fn apply_a(&self, k: i64, v: &StateVector) -> Result<StateVector> {
        self.check_state(v)?;
        let (j, b) = (k.div_euclid(2), k.rem_euclid(2));
        let w = self.apply_w_power(-j, v)?;
        let w = if b == 0 { self.apply_a0(&w)? } else { self.apply_diag_fn(&w, |d| C64::new(d, 0.0))? };
        self.apply_w_power(j, &w)
    }

    /// `e^{s·A_k} v` for complex `s`.
    pub fn apply_exp_a(&self, k: i64, s: C64, v: &StateVector) -> Result<StateVector> {
        self.check_state(v)?;
        let (j, b) = (k.div_euclid(2), k.rem_euclid(2));
        let w = self.apply_w_power(-j, v)?;
        let w = if b == 0 {
            self.apply_site_product(&matexp_hermitian(&self.a0_site, s)?, &w)?
        } else {
            self.apply_diag_fn(&w, |d| (s * d).exp())?
        };
        let out = self.apply_w_power(j, &w)?;
        if !out.is_finite() {
            return Err(Error::numeric("exponential of a generator overflowed"));
        }
        Ok(out)
    }

    /// `G_k v = [A_k, A_0] v`
    pub fn apply_g(&self, k: i64, v: &StateVector) -> Result<StateVector> {
        let x = self.apply_a(0, v)?;
        let x = self.apply_a(k, &x)?;
        let y = self.apply_a(k, v)?;
        let y = self.apply_a(0, &y)?;
        Ok(&x - &y)
    }

    /// `H_A v = Σ t_m A_m v`
    pub fn apply_ha(&self, f: &LaurentPoly, v: &StateVector) -> Result<StateVector> {
        let mut out = StateVector::zeros(v.dim());
        for (m, t) in f.terms() {
            if t != 0.0 {
                out.axpy(C64::new(t, 0.0), &self.apply_a(m, v)?);
            }
        }
        Ok(out)
    }

    /// `⟨v|A_k|v⟩` (real part) for a normalized `v`.
    pub fn expect_a(&self, k: i64, v: &StateVector) -> Result<f64> {
        Ok(v.inner(&self.apply_a(k, v)?).re)
    }

    /// `T^s v`, with `T|a_1 … a_L⟩ = |a_L a_1 … a_{L−1}⟩` so that `T O_j T† = O_{j+1}`.
    pub fn apply_translation(&self, shift: i64, v: &StateVector) -> Result<StateVector> {
        self.check_state(v)?;
        let s = shift.rem_euclid(self.l as i64) as usize;
        if s == 0 {
            return Ok(v.clone());
        }
        let layout = self.layout();
        let mut out = StateVector::zeros(v.dim());
        for (idx, &a) in v.amplitudes().iter().enumerate() {
            let d = layout.digits(idx);
            let moved: Vec<usize> = (0..self.l).map(|t| d[(t + self.l - s) % self.l]).collect();
            out.amplitudes_mut()[layout.index_of(&moved)] = a;
        }
        Ok(out)
    }

    /// `r^s v` with `r = ∏_j X_j`.
    pub fn apply_charge(&self, power: i64, v: &StateVector) -> Result<StateVector> {
        self.check_state(v)?;
        let n = self.n;
        let s = power.rem_euclid(n as i64) as usize;
        let layout = self.layout();
        let mut out = StateVector::zeros(v.dim());
        for (idx, &a) in v.amplitudes().iter().enumerate() {
            let moved: Vec<usize> = layout.digits(idx).iter().map(|&x| (x + n - s) % n).collect();
            out.amplitudes_mut()[layout.index_of(&moved)] = a;
        }
        Ok(out)
    }

    /// `Z_j^power v` for site `j` (1-based, wrapped periodically).
    pub fn apply_site_z(&self, site: i64, power: i64, v: &StateVector) -> Result<StateVector> {
        self.check_state(v)?;
        let layout = self.layout();
        let j = layout.wrap(site);
        let mut out = v.clone();
        for (idx, a) in out.amplitudes_mut().iter_mut().enumerate() {
            *a *= omega_pow(self.n, power * layout.digit(idx, j) as i64);
        }
        Ok(out)
    }

    /// Dense matrix of a linear action on states.
    pub fn densify(&self, what: &'static str, f: impl Fn(&StateVector) -> Result<StateVector>) -> Result<DenseOperator> {
        self.check_matrix_capacity(what)?;
        let dim = self.dim();
        let mut cols = Vec::with_capacity(dim);
        for j in 0..dim {
            cols.push(f(&StateVector::basis(dim, j))?);
        }
        DenseOperator::from_columns(&cols)
    }

    /// Embeds a single-site operator at site `j`.
    pub fn embed_site(&self, op: &DenseOperator, site: usize) -> Result<DenseOperator> {
        let layout = self.layout();
        self.densify("site operator", |v| apply_local_gate(v, op, site, 1, layout))
    }
}

/// `A_0 = −(1/N) Σ_j Σ_m α_m X_j^m`
pub fn build_a0(chain: &ClockChain) -> Result<DenseOperator> {
    chain.densify("A_0", |v| chain.apply_a0(v))
}

/// `A_1 = −(1/N) Σ_j Σ_m α_m (Z_{j−1}† Z_j)^m`, diagonal in the clock basis.
pub fn build_a1(chain: &ClockChain) -> Result<DenseOperator> {
    chain.check_matrix_capacity("A_1")?;
    let diag = chain.a1_diagonal()?;
    Ok(DenseOperator::from_diagonal(&diag.iter().map(|&d| C64::new(d, 0.0)).collect::<Vec<_>>()))
}

/// Translation `T` and charge `r = ∏ X_j` as dense permutations.
pub fn symmetry_ops(chain: &ClockChain) -> Result<(DenseOperator, DenseOperator)> {
    let t = chain.densify("translation", |v| chain.apply_translation(1, v))?;
    let r = chain.densify("charge", |v| chain.apply_charge(1, v))?;
    Ok((t, r))
}

type OpMap = RwLock<HashMap<i64, Arc<DenseOperator>>>;

/// Lazily built dense generators of one chain. Entries are inserted once and
/// never modified, so concurrent readers always see the same matrices.
#[derive(Debug)]
pub struct GeneratorCache {
    chain: ClockChain,
    a: OpMap,
    g: OpMap,
    pivots: OnceLock<(Arc<DenseOperator>, Arc<DenseOperator>)>,
}

fn get_or_build(map: &OpMap, k: i64, build: impl FnOnce() -> Result<DenseOperator>) -> Result<Arc<DenseOperator>> {
    if let Some(op) = map.read().expect("generator cache poisoned").get(&k) {
        return Ok(op.clone());
    }
    let op = Arc::new(build()?);
    let mut w = map.write().expect("generator cache poisoned");
    Ok(w.entry(k).or_insert(op).clone())
}

impl GeneratorCache {
    pub fn new(chain: ClockChain) -> Self {
        GeneratorCache { chain, a: RwLock::default(), g: RwLock::default(), pivots: OnceLock::new() }
    }

    pub fn chain(&self) -> &ClockChain {
        &self.chain
    }

    /// `A_k`, built on first use.
    pub fn a(&self, k: i64) -> Result<Arc<DenseOperator>> {
        get_or_build(&self.a, k, || match k {
            0 => build_a0(&self.chain),
            1 => build_a1(&self.chain),
            _ => self.chain.densify("A_k", |v| self.chain.apply_a(k, v)),
        })
    }

    /// `G_k = [A_k, A_0]`, built on first use.
    pub fn g(&self, k: i64) -> Result<Arc<DenseOperator>> {
        get_or_build(&self.g, k, || {
            let ak = self.a(k)?;
            let a0 = self.a(0)?;
            Ok(commutator(&ak, &a0))
        })
    }

    /// Pivot unitaries `(U_0, U_1)`.
    pub fn pivots(&self) -> Result<(Arc<DenseOperator>, Arc<DenseOperator>)> {
        if let Some(p) = self.pivots.get() {
            return Ok(p.clone());
        }
        let u0 = matexp_hermitian(&*self.a(0)?, -I * PI)?;
        let u1 = matexp_hermitian(&*self.a(1)?, -I * PI)?;
        Ok(self.pivots.get_or_init(|| (Arc::new(u0), Arc::new(u1))).clone())
    }
}

pub fn build_ak(cache: &GeneratorCache, k: i64) -> Result<Arc<DenseOperator>> {
    cache.a(k)
}

pub fn build_g(cache: &GeneratorCache, k: i64) -> Result<Arc<DenseOperator>> {
    cache.g(k)
}

/// `R_{m,l} = ¼A_m + ½G_{m−l} − ¼A_{2l−m}`, which lowers `A_l` by one.
pub fn ladder_r(cache: &GeneratorCache, m: i64, l: i64) -> Result<DenseOperator> {
    let mut r = cache.a(m)?.scale(C64::new(0.25, 0.0));
    r.axpy(C64::new(0.5, 0.0), &*cache.g(m - l)?);
    r.axpy(C64::new(-0.25, 0.0), &*cache.a(2 * l - m)?);
    Ok(r)
}

/// `H_A = Σ_m t_m A_m`
pub fn build_ha(cache: &GeneratorCache, f: &LaurentPoly) -> Result<DenseOperator> {
    let mut h = DenseOperator::zeros(cache.chain().dim());
    for (m, t) in f.terms() {
        if t != 0.0 {
            h.axpy(C64::new(t, 0.0), &*cache.a(m)?);
        }
    }
    Ok(h)
}

/// Largest relative residuals of the algebra relations.
#[derive(Debug, Clone, Serialize)]
pub struct OnsagerReport {
    pub n: usize,
    pub l: usize,
    pub k_max: i64,
    /// `[A_l, A_m] = G_{l−m}`
    pub aa: f64,
    /// `[G_l, A_m] = (A_{m+l} − A_{m−l})/2`
    pub ga: f64,
    /// `[G_l, G_m] = 0`
    pub gg: f64,
    /// `G_{−k} = −G_k`
    pub g_antisymmetry: f64,
    /// `[[[A_1, A_0], A_0], A_0] = [A_1, A_0]`
    pub dolan_grady_0: f64,
    /// `[[[A_0, A_1], A_1], A_1] = [A_0, A_1]`
    pub dolan_grady_1: f64,
}

impl OnsagerReport {
    pub fn max(&self) -> f64 {
        [self.aa, self.ga, self.gg, self.g_antisymmetry, self.dolan_grady_0, self.dolan_grady_1]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// `‖lhs − rhs‖_F / (‖lhs‖_F + ‖rhs‖_F + ‖A_0‖_F)`
fn residual(lhs: &DenseOperator, rhs: &DenseOperator, scale: f64) -> f64 {
    (lhs - rhs).frobenius_norm() / (lhs.frobenius_norm() + rhs.frobenius_norm() + scale)
}

pub fn verify_onsager(cache: &GeneratorCache, k_max: i64) -> Result<OnsagerReport> {
    if k_max < 1 {
        return Err(Error::contract("k_max must be at least 1"));
    }
    let scale = cache.a(0)?.frobenius_norm();
    let dim = cache.chain().dim();
    let zero = DenseOperator::zeros(dim);
    let (mut aa, mut ga, mut gg, mut anti) = (0f64, 0f64, 0f64, 0f64);
    for l in -k_max..=k_max {
        anti = anti.max(residual(&*cache.g(-l)?, &cache.g(l)?.scale(-ONE), scale));
        for m in -k_max..=k_max {
            let (al, am) = (cache.a(l)?, cache.a(m)?);
            if l < m {
                aa = aa.max(residual(&commutator(&al, &am), &*cache.g(l - m)?, scale));
                gg = gg.max(residual(&commutator(&*cache.g(l)?, &*cache.g(m)?), &zero, scale));
            }
            let rhs = (&*cache.a(m + l)? - &*cache.a(m - l)?).scale(C64::new(0.5, 0.0));
            ga = ga.max(residual(&commutator(&*cache.g(l)?, &am), &rhs, scale));
        }
    }
    let dg = |m: i64, l: i64| -> Result<f64> {
        let (am, al) = (cache.a(m)?, cache.a(l)?);
        let c1 = commutator(&am, &al);
        let c3 = commutator(&commutator(&c1, &al), &al);
        Ok(residual(&c3, &c1, scale))
    };
    Ok(OnsagerReport {
        n: cache.chain().n(),
        l: cache.chain().l(),
        k_max,
        aa,
        ga,
        gg,
        g_antisymmetry: anti,
        dolan_grady_0: dg(1, 0)?,
        dolan_grady_1: dg(0, 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh, eigvalsh, kron};

    fn chain(n: usize, l: usize) -> ClockChain {
        ClockChain::new(n, l).unwrap()
    }

    /// Independent Kronecker-product construction of a one-site operator.
    fn kron_site(op: &DenseOperator, site: usize, n: usize, l: usize) -> DenseOperator {
        let id = DenseOperator::identity(n);
        let mut acc = if site == 1 { op.clone() } else { id.clone() };
        for j in 2..=l {
            acc = kron(&acc, if j == site { op } else { &id }).unwrap();
        }
        acc
    }

    fn power(op: &DenseOperator, k: usize) -> DenseOperator {
        (0..k).fold(DenseOperator::identity(op.dim()), |acc, _| acc.matmul(op))
    }

    fn kron_a0(c: &ClockChain) -> DenseOperator {
        let (n, l) = (c.n(), c.l());
        let mut h = DenseOperator::zeros(c.dim());
        for j in 1..=l {
            let xj = kron_site(c.site_x(), j, n, l);
            for m in 1..n {
                h.axpy(-alpha(n, m as i64) / n as f64, &power(&xj, m));
            }
        }
        h
    }

    fn kron_a1(c: &ClockChain) -> DenseOperator {
        let (n, l) = (c.n(), c.l());
        let mut h = DenseOperator::zeros(c.dim());
        for j in 1..=l {
            let prev = if j == 1 { l } else { j - 1 };
            let zz = kron_site(c.site_z(), prev, n, l).adjoint().matmul(&kron_site(c.site_z(), j, n, l));
            for m in 1..n {
                h.axpy(-alpha(n, m as i64) / n as f64, &power(&zz, m));
            }
        }
        h
    }

    fn dist(a: &DenseOperator, b: &DenseOperator) -> f64 {
        (a - b).frobenius_norm()
    }

    #[test]
    fn chain_validation() {
        assert!(matches!(ClockChain::new(3, 5), Err(Error::Domain(_))));
        assert!(ClockChain::new(1, 2).is_err());
        assert!(ClockChain::new(3, 2).is_err());
        let msg = ClockChain::new(3, 4).unwrap_err().to_string();
        assert!(msg.contains("frustrated"));
    }

    #[test]
    fn site_operators() {
        let c = chain(2, 2);
        let x = DenseOperator::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        assert_eq!(c.site_x(), &x);
        assert_eq!(c.site_z(), &DenseOperator::from_diagonal(&[ONE, -ONE]));

        for n in 2..=6 {
            let c = chain(n, n);
            for a in 0..n {
                let ket = StateVector::basis(n, a);
                assert_eq!(c.site_x().apply(&ket), StateVector::basis(n, (a + n - 1) % n));
            }
            let xz = c.site_x().matmul(c.site_z());
            let zx = c.site_z().matmul(c.site_x()).scale(c.omega());
            assert!(dist(&xz, &zx) < 1e-14);
            assert_eq!(power(c.site_x(), n), DenseOperator::identity(n));
            assert!(dist(&power(c.site_z(), n), &DenseOperator::identity(n)) < 1e-14);
        }
    }

    #[test]
    fn bond_energy_closed_form() {
        for n in [2usize, 3, 4, 6] {
            for x in 0..n {
                for y in 0..n {
                    let closed = (n as f64 - 1.0) / 2.0 - ((x as i64 - y as i64).rem_euclid(n as i64)) as f64;
                    assert!((bond_energy(n, x, y) + closed / n as f64).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn generators_match_kron_construction() {
        for (n, l) in [(2, 2), (2, 4), (3, 3), (4, 4)] {
            let c = chain(n, l);
            let a0 = build_a0(&c).unwrap();
            let a1 = build_a1(&c).unwrap();
            assert!(dist(&a0, &kron_a0(&c)) < 1e-12, "A_0 at N={n} L={l}");
            assert!(dist(&a1, &kron_a1(&c)) < 1e-12, "A_1 at N={n} L={l}");
            assert!(a0.hermiticity_defect() < 1e-12 && a1.hermiticity_defect() < 1e-12);
        }
    }

    #[test]
    fn a0_two_sites_is_transverse_field() {
        let c = chain(2, 2);
        let x = c.site_x().clone();
        let want = (&kron_site(&x, 1, 2, 2) + &kron_site(&x, 2, 2, 2)).scale(C64::new(-0.25, 0.0));
        assert!(dist(&build_a0(&c).unwrap(), &want) < 1e-14);
        let vals = eigvalsh(&build_a0(&c).unwrap()).unwrap();
        for (v, w) in vals.iter().zip([-0.5, 0.0, 0.0, 0.5]) {
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn a0_ground_state_unique_uniform() {
        for (n, l) in [(2, 4), (3, 3), (4, 4)] {
            let c = chain(n, l);
            let e = eigh(&build_a0(&c).unwrap()).unwrap();
            assert!((e.values[0] - c.e0()).abs() < 1e-10);
            assert!(e.values[1] - e.values[0] > 0.1);
            let uniform = StateVector::from_fn(c.dim(), |_| C64::new(1.0, 0.0)).normalized().unwrap();
            assert!((e.vector(0).fidelity(&uniform) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn a1_ferromagnetic_ground_states() {
        let c = chain(3, 3);
        let vals = eigvalsh(&build_a1(&c).unwrap()).unwrap();
        assert!(vals[..3].iter().all(|v| (v + 1.0).abs() < 1e-12));
        assert!(vals[3] > -1.0 + 0.1);
    }

    #[test]
    fn pivots_match_dense_exponentials() {
        let c = chain(3, 3);
        let cache = GeneratorCache::new(c.clone());
        let (u0, u1) = cache.pivots().unwrap();
        let u0_free = c.densify("U_0", |v| c.apply_pivot(0, v, false)).unwrap();
        let u1_free = c.densify("U_1", |v| c.apply_pivot(1, v, false)).unwrap();
        assert!(dist(&u0, &u0_free) < 1e-10);
        assert!(dist(&u1, &u1_free) < 1e-10);
        // A_2 = U_1 A_0 U_1†, A_{-1} = U_0 A_1 U_0†
        let a2 = u1.matmul(&cache.a(0).unwrap()).matmul(&u1.adjoint());
        assert!(dist(&a2, &cache.a(2).unwrap()) < 1e-10);
        let am1 = u0.matmul(&cache.a(1).unwrap()).matmul(&u0.adjoint());
        assert!(dist(&am1, &cache.a(-1).unwrap()) < 1e-10);
        // e^{sA_k} via the pivot route matches a dense exponential of A_k
        let s = C64::new(0.4, 0.0);
        for k in [-2i64, 2, 3] {
            let free = c.densify("exp", |v| c.apply_exp_a(k, s, v)).unwrap();
            let dense = matexp_hermitian(&cache.a(k).unwrap(), s).unwrap();
            assert!(dist(&free, &dense) < 1e-10, "k={k}");
        }
    }

    #[test]
    fn generator_spectra_and_hermiticity() {
        let c = chain(2, 4);
        let cache = GeneratorCache::new(c.clone());
        let s0 = eigvalsh(&cache.a(0).unwrap()).unwrap();
        let s1 = eigvalsh(&cache.a(1).unwrap()).unwrap();
        for k in -3i64..=4 {
            let ak = cache.a(k).unwrap();
            assert!(ak.hermiticity_defect() < 1e-10);
            let sk = eigvalsh(&ak).unwrap();
            let want = if k.rem_euclid(2) == 0 { &s0 } else { &s1 };
            assert!(sk.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-8), "k={k}");
            assert!((sk[0] - c.e0()).abs() < 1e-8);
            let g = cache.g(k).unwrap();
            assert!(g.anti_hermiticity_defect() < 1e-10);
        }
        assert!(cache.g(0).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn ising_a2_is_three_spin_term() {
        // For N=2: A_2 = −¼ Σ_j Z_{j−1} X_j Z_{j+1} up to the sign of each term.
        let c = chain(2, 4);
        let cache = GeneratorCache::new(c.clone());
        let z = c.site_z().clone();
        let x = c.site_x().clone();
        let mut h = DenseOperator::zeros(16);
        for j in 1..=4usize {
            let prev = if j == 1 { 4 } else { j - 1 };
            let next = if j == 4 { 1 } else { j + 1 };
            let t = kron_site(&z, prev, 2, 4).matmul(&kron_site(&x, j, 2, 4)).matmul(&kron_site(&z, next, 2, 4));
            h.axpy(C64::new(-0.25, 0.0), &t);
        }
        let a2 = cache.a(2).unwrap();
        let flipped = h.scale(-ONE);
        assert!(dist(&a2, &h).min(dist(&a2, &flipped)) < 1e-10);
        let rel = commutator(&a2, &cache.a(1).unwrap());
        assert!(dist(&rel, &cache.g(1).unwrap()) < 1e-10);
    }

    #[test]
    fn small_algebra_examples() {
        let cache = GeneratorCache::new(chain(2, 4));
        let lhs = commutator(&cache.g(1).unwrap(), &cache.a(1).unwrap());
        let rhs = (&*cache.a(2).unwrap() - &*cache.a(0).unwrap()).scale(C64::new(0.5, 0.0));
        assert!(dist(&lhs, &rhs) < 1e-10);

        let cache = GeneratorCache::new(chain(3, 3));
        let gg = commutator(&cache.g(1).unwrap(), &cache.g(2).unwrap());
        assert!(gg.frobenius_norm() < 1e-10);
    }

    #[test]
    fn onsager_report_small() {
        let report = verify_onsager(&GeneratorCache::new(chain(2, 4)), 2).unwrap();
        assert!(report.max() <= 1e-10, "{report:?}");
        assert!(verify_onsager(&GeneratorCache::new(chain(2, 2)), 0).is_err());
    }

    #[test]
    fn symmetry_operators() {
        let c = chain(3, 3);
        let (t, r) = symmetry_ops(&c).unwrap();
        let id = DenseOperator::identity(27);
        assert_eq!(power(&t, 3), id);
        assert_eq!(power(&r, 3), id);
        assert!(dist(&t.adjoint().matmul(&t), &id) < 1e-14);
        let cache = GeneratorCache::new(c.clone());
        for k in -2..=2 {
            let ak = cache.a(k).unwrap();
            assert!(commutator(&r, &ak).frobenius_norm() < 1e-10);
            assert!(commutator(&t, &ak).frobenius_norm() < 1e-10);
        }
        assert!(commutator(&r, &cache.a(1).unwrap()).frobenius_norm() < 1e-12);
        // T moves an operator on site j to site j+1
        let z1 = c.embed_site(c.site_z(), 1).unwrap();
        let z2 = c.embed_site(c.site_z(), 2).unwrap();
        assert!(dist(&t.matmul(&z1).matmul(&t.adjoint()), &z2) < 1e-14);
    }

    #[test]
    fn ladder_operator() {
        let cache = GeneratorCache::new(chain(2, 4));
        assert!(ladder_r(&cache, 1, 1).unwrap().frobenius_norm() < 1e-12);
        let r = ladder_r(&cache, 1, 0).unwrap();
        let a0 = cache.a(0).unwrap();
        assert!(dist(&commutator(&r, &a0), &r) < 1e-10);
        let rd = r.adjoint();
        assert!(dist(&commutator(&rd, &a0), &rd.scale(-ONE)) < 1e-10);
    }

    #[test]
    fn ha_examples() {
        let c = chain(3, 3);
        let cache = GeneratorCache::new(c.clone());
        let one = LaurentPoly::new(0, vec![1.0]).unwrap();
        assert!(dist(&build_ha(&cache, &one).unwrap(), &cache.a(0).unwrap()) < 1e-15);
        let inv = LaurentPoly::new(-1, vec![1.0]).unwrap();
        let h = build_ha(&cache, &inv).unwrap();
        assert!(h.hermiticity_defect() < 1e-10);
        let s = eigvalsh(&h).unwrap();
        let s1 = eigvalsh(&cache.a(1).unwrap()).unwrap();
        assert!(s.iter().zip(&s1).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn matrix_free_actions_match_dense() {
        let c = chain(3, 3);
        let cache = GeneratorCache::new(c.clone());
        let v = StateVector::from_fn(27, |i| C64::new((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()));
        for k in -3..=3 {
            let dense = cache.a(k).unwrap().apply(&v);
            assert!(dense.distance(&c.apply_a(k, &v).unwrap()) < 1e-10);
            let g = cache.g(k).unwrap().apply(&v);
            assert!(g.distance(&c.apply_g(k, &v).unwrap()) < 1e-10);
        }
    }
}
