//! Fixed-point ground states, skeleton eigenstates `M^(d)···M^(1)|ψ_p^±⟩`,
//! their momentum excitations and the transformed Hamiltonian.

use std::f64::consts::PI;

use serde::Serialize;

use crate::clock::{omega_pow, ClockChain, GeneratorCache};
use crate::error::{Error, Result};
use crate::laurent::{schur_cohn_bk_with, r_alpha, BkList, LaurentPoly, RAlphaList, SquareFactorization};
use crate::linalg::{commutator, matexp_hermitian, DenseOperator, StateVector, C64, ONE};

/// A point `f = sign · z^p · (Σ s_k z^k)²` on the skeleton, for a given chain.
#[derive(Debug, Clone)]
pub struct SkeletonSpec {
    chain: ClockChain,
    sign: i8,
    p: i64,
    s: Vec<f64>,
    bk: BkList,
    b: Vec<f64>,
    r: RAlphaList,
}

impl SkeletonSpec {
    /// Validates the point and derives `b_k` and `r_α`; refuses `|b_k| = 1`.
    pub fn new(chain: ClockChain, sign: i8, p: i64, s: Vec<f64>) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::contract(format!("sign must be +1 or -1, got {sign}")));
        }
        if s.is_empty() || s[0] == 0.0 {
            return Err(Error::contract("skeleton coefficients need s_0 ≠ 0"));
        }
        let bk = schur_cohn_bk_with(&s, chain.policy().singular_band)?;
        let b = bk.values()?;
        let r = r_alpha(&s)?;
        Ok(SkeletonSpec { chain, sign, p, s, bk, b, r })
    }

    pub fn from_factorization(chain: ClockChain, f: &SquareFactorization) -> Result<Self> {
        SkeletonSpec::new(chain, f.sign, f.p, f.s.clone())
    }

    pub fn chain(&self) -> &ClockChain {
        &self.chain
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn d(&self) -> usize {
        self.s.len() - 1
    }

    pub fn bk(&self) -> &BkList {
        &self.bk
    }

    /// `b_1..b_d`
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `β_k = 2 artanh b_k`; for `|b_k| > 1` this is `2 artanh(1/b_k) + iπ`.
    pub fn beta(&self) -> Vec<C64> {
        self.b.iter().map(|&b| layer_beta(b)).collect()
    }

    pub fn r(&self) -> &RAlphaList {
        &self.r
    }

    /// The Laurent polynomial of the Hamiltonian this point describes.
    pub fn hamiltonian(&self) -> Result<LaurentPoly> {
        SquareFactorization { sign: self.sign, p: self.p, s: self.s.clone() }.reconstruct()
    }

    fn sign_c(&self) -> C64 {
        C64::new(self.sign as f64, 0.0)
    }

    /// Applies `M^(d)···M^(1)` with `M^(k) = exp(∓β_k A_{p+k})`.
    fn apply_layers(&self, base: &StateVector) -> Result<StateVector> {
        let mut v = base.clone();
        for (k, beta) in self.beta().into_iter().enumerate() {
            v = self.chain.apply_exp_a(self.p + k as i64 + 1, -self.sign_c() * beta, &v)?;
        }
        Ok(v)
    }
}

fn layer_beta(b: f64) -> C64 {
    if b.abs() < 1.0 {
        C64::new(2.0 * b.atanh(), 0.0)
    } else {
        C64::new(2.0 * (1.0 / b).atanh(), PI)
    }
}

/// A ground state of `sign · A_p`.
#[derive(Debug, Clone)]
pub struct FixedPointState {
    pub p: i64,
    pub sign: i8,
    /// Charge `Q`: `r|ψ⟩ = ω^Q|ψ⟩`.
    pub branch: usize,
    pub vector: StateVector,
}

/// Ground state of `sign · A_p` with charge `branch`.
///
/// For even `p` the ground state is unique and `branch` must be 0. For odd
/// `p` the `N` degenerate ground states are labelled by their charge.
pub fn fixed_point_state(chain: &ClockChain, p: i64, sign: i8, branch: usize) -> Result<FixedPointState> {
    if sign != 1 && sign != -1 {
        return Err(Error::contract(format!("sign must be +1 or -1, got {sign}")));
    }
    let n = chain.n();
    let odd = p.rem_euclid(2) == 1;
    if !odd && branch != 0 {
        return Err(Error::contract(format!("ground state of ±A_{p} is unique; branch must be 0, got {branch}")));
    }
    if branch >= n {
        return Err(Error::contract(format!("branch must lie in 0..{n}, got {branch}")));
    }
    chain.check_state_capacity("fixed point state")?;
    let dim = chain.dim();
    let layout = chain.layout();
    let q = branch as i64;
    let base = match (odd, sign) {
        (false, 1) => StateVector::from_fn(dim, |_| ONE),
        // every site in the top eigenvector ω^a of the single-site term
        (false, _) => StateVector::from_fn(dim, |idx| {
            omega_pow(n, layout.digits(idx).iter().sum::<usize>() as i64)
        }),
        (true, 1) => {
            let mut v = StateVector::zeros(dim);
            for a in 0..n {
                v.amplitudes_mut()[layout.index_of(&vec![a; chain.l()])] = omega_pow(n, q * a as i64);
            }
            v
        }
        (true, _) => {
            let stair: Vec<usize> = (0..chain.l()).map(|j| j % n).collect();
            let stair = StateVector::basis(dim, layout.index_of(&stair));
            let mut v = StateVector::zeros(dim);
            for u in 0..n as i64 {
                v.axpy(omega_pow(n, -q * u), &chain.apply_translation(u, &stair)?);
            }
            v
        }
    };
    let vector = chain.apply_w_power(p.div_euclid(2), &base.normalized()?)?;
    Ok(FixedPointState { p, sign, branch, vector })
}

/// A constructed eigenstate with its Rayleigh quotient and residual.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub state: StateVector,
    pub eigenvalue: f64,
    pub residual: f64,
}

/// `‖Hv − ⟨v|H|v⟩v‖` together with the Rayleigh quotient, matrix-free.
pub fn rayleigh(chain: &ClockChain, f: &LaurentPoly, v: &StateVector) -> Result<(f64, f64)> {
    let hv = chain.apply_ha(f, v)?;
    let e = v.inner(&hv).re;
    Ok((e, hv.distance(&v.scale(C64::new(e, 0.0)))))
}

fn check_base(spec: &SkeletonSpec, base: &FixedPointState) -> Result<()> {
    if base.p != spec.p || base.sign != spec.sign {
        return Err(Error::contract(format!(
            "base state is for (p={}, sign={}), spec needs (p={}, sign={})",
            base.p, base.sign, spec.p, spec.sign
        )));
    }
    Ok(())
}

/// `|φ⟩ = M^(d)···M^(1)|ψ_p^±⟩`, normalized, with its energy under `H_A`.
///
/// Layers with `|b_k| > 1` use the complex `β_k` directly; see
/// [`rewrite_large_bk`] for the equivalent real construction.
pub fn skeleton_eigenstate(spec: &SkeletonSpec, base: &FixedPointState) -> Result<Eigenpair> {
    check_base(spec, base)?;
    let state = spec.apply_layers(&base.vector)?.normalized()?;
    let (eigenvalue, residual) = rayleigh(&spec.chain, &spec.hamiltonian()?, &state)?;
    Ok(Eigenpair { state, eigenvalue, residual })
}

/// Momentum `P = 2π·momentum/L` excitation above the skeleton state (even `p` only).
pub fn excited_state(spec: &SkeletonSpec, momentum: usize) -> Result<Eigenpair> {
    if spec.p.rem_euclid(2) != 0 {
        return Err(Error::Unsupported("excited states are only constructed for even p".into()));
    }
    let chain = &spec.chain;
    let l = chain.l();
    if momentum >= l {
        return Err(Error::contract(format!("momentum index must lie in 0..{l}")));
    }
    let psi0 = fixed_point_state(chain, 0, spec.sign, 0)?.vector;
    let z_power = -(spec.sign as i64);
    let p_val = 2.0 * PI * momentum as f64 / l as f64;
    let mut base = StateVector::zeros(chain.dim());
    for j in 1..=l as i64 {
        let phase = C64::from_polar(1.0 / (l as f64).sqrt(), -p_val * j as f64);
        base.axpy(phase, &chain.apply_site_z(j, z_power, &psi0)?);
    }
    let base = chain.apply_w_power(spec.p / 2, &base)?;
    let state = spec.apply_layers(&base)?.normalized()?;
    let (eigenvalue, residual) = rayleigh(chain, &spec.hamiltonian()?, &state)?;
    Ok(Eigenpair { state, eigenvalue, residual })
}

/// `r_0·sign⟨A_p⟩ + Σ_{α≥1} (r_α + r_{−α})·sign⟨A_{p+α}⟩` on the base state.
pub fn predicted_energy(spec: &SkeletonSpec, base: &FixedPointState) -> Result<f64> {
    check_base(spec, base)?;
    let chain = &spec.chain;
    let sign = spec.sign as f64;
    let r = &spec.r;
    let mut e = r.get(0) * sign * chain.expect_a(spec.p, &base.vector)?;
    for alpha in 1..=r.hi() {
        e += (r.get(alpha) + r.get(-alpha)) * sign * chain.expect_a(spec.p + alpha, &base.vector)?;
    }
    Ok(e)
}

/// `H̃ = Σ_α r_α (sign·A_{p+α} + G_α)` and its relative distance to the dense
/// conjugation `M^{(1)−1}···M^{(d)−1} H_A M^(d)···M^(1)`.
pub fn transformed_hamiltonian(spec: &SkeletonSpec, cache: &GeneratorCache) -> Result<(DenseOperator, f64)> {
    let chain = cache.chain();
    let dim = chain.dim();
    let limit = chain.policy().max_conjugation_dim;
    if dim > limit {
        return Err(Error::Capacity { what: "dense conjugation", requested: dim, limit });
    }
    let mut tilde = DenseOperator::zeros(dim);
    for (alpha, r) in spec.r.pairs() {
        let ak = cache.a(spec.p + alpha)?;
        tilde.axpy(C64::new(r * spec.sign as f64, 0.0), &ak);
        tilde.axpy(C64::new(r, 0.0), &*cache.g(alpha)?);
    }
    let f = spec.hamiltonian()?;
    let mut h = DenseOperator::zeros(dim);
    for (m, t) in f.terms() {
        if t != 0.0 {
            h.axpy(C64::new(t, 0.0), &*cache.a(m)?);
        }
    }
    let mut m_all = DenseOperator::identity(dim);
    let mut m_inv = DenseOperator::identity(dim);
    for (k, beta) in spec.beta().into_iter().enumerate() {
        let a = cache.a(spec.p + k as i64 + 1)?;
        let s = -spec.sign_c() * beta;
        m_all = matexp_hermitian(&a, s)?.matmul(&m_all);
        m_inv = m_inv.matmul(&matexp_hermitian(&a, -s)?);
    }
    let conj = m_inv.matmul(&h).matmul(&m_all);
    let scale = tilde.frobenius_norm().max(conj.frobenius_norm()).max(f64::MIN_POSITIVE);
    let residual = (&tilde - &conj).frobenius_norm() / scale;
    Ok((tilde, residual))
}

/// One factor of the rewritten layer string.
#[derive(Debug, Clone, Serialize)]
pub struct RewriteLayer {
    pub k: usize,
    /// Generator index after the pivots have been pushed through.
    pub index: i64,
    /// Real exponent `c` in `e^{c·A_index}`.
    pub exponent: f64,
    /// Pivot generated by this layer when `|b_k| > 1`.
    pub pivot: Option<i64>,
}

/// Real-exponent form of a skeleton construction with some `|b_k| > 1`.
///
/// Each such layer splits as `e^{∓β A_n} = e^{∓γ A_n} U_n^{±1}` with
/// `γ = 2 artanh(1/b)`. The pivot is moved to the right through the later
/// layers, mapping `A_q ↦ A_{2n−q}`, and finally acts on the base state,
/// which becomes a ground state of `sign·A_l`.
#[derive(Debug, Clone, Serialize)]
pub struct RewrittenConstruction {
    pub sign: i8,
    pub p: i64,
    /// Index of the fixed point the pivots land on.
    pub l: i64,
    /// Layers in application order (`k = 1` first).
    pub layers: Vec<RewriteLayer>,
    /// Pivot indices in the order they act on the base state.
    pub pivots: Vec<i64>,
}

pub fn rewrite_large_bk(spec: &SkeletonSpec) -> Result<RewrittenConstruction> {
    let d = spec.d();
    let sign = spec.sign;
    // current index of each layer k (1-based) and of the base
    let mut index: Vec<i64> = (1..=d as i64).map(|k| spec.p + k).collect();
    let mut base = spec.p;
    let mut layers = Vec::with_capacity(d);
    let mut pivots = Vec::new();
    for k in (1..=d).rev() {
        let b = spec.b[k - 1];
        let n = index[k - 1];
        if b.abs() < 1.0 {
            layers.push(RewriteLayer { k, index: n, exponent: -(sign as f64) * 2.0 * b.atanh(), pivot: None });
            continue;
        }
        let gamma = 2.0 * (1.0 / b).atanh();
        layers.push(RewriteLayer { k, index: n, exponent: -(sign as f64) * gamma, pivot: Some(n) });
        for q in index.iter_mut().take(k - 1) {
            *q = 2 * n - *q;
        }
        base = 2 * n - base;
        pivots.push(n);
    }
    layers.reverse();
    pivots.reverse();
    Ok(RewrittenConstruction { sign, p: spec.p, l: base, layers, pivots })
}

impl RewrittenConstruction {
    /// Applies the rewritten string to `base` (a ground state of `sign·A_p`).
    /// Pivots are `U_n` for sign `+` and `U_n†` for sign `−`.
    pub fn apply(&self, chain: &ClockChain, base: &StateVector) -> Result<StateVector> {
        let mut v = self.pushed_base(chain, base)?;
        for layer in &self.layers {
            v = chain.apply_exp_a(layer.index, C64::new(layer.exponent, 0.0), &v)?;
        }
        v.normalized()
    }

    /// The base state after all pivots: a ground state of `sign·A_l`.
    pub fn pushed_base(&self, chain: &ClockChain, base: &StateVector) -> Result<StateVector> {
        let mut v = base.clone();
        for &n in &self.pivots {
            v = chain.apply_pivot(n, &v, self.sign < 0)?;
        }
        Ok(v)
    }
}

/// `(A_n + G_n)|v⟩` split into its component along `|v⟩` and the remainder.
#[derive(Debug, Clone, Serialize)]
pub struct Proportionality {
    pub n: i64,
    pub constant_re: f64,
    pub constant_im: f64,
    pub residual: f64,
}

pub fn a_plus_g_on(chain: &ClockChain, n: i64, v: &StateVector) -> Result<Proportionality> {
    let w = &chain.apply_a(n, v)? + &chain.apply_g(n, v)?;
    let c = v.inner(&w) / v.inner(v);
    let residual = w.distance(&v.scale(c)) / v.norm();
    Ok(Proportionality { n, constant_re: c.re, constant_im: c.im, residual })
}

/// `⟨v|O|v⟩` for a dense `O`.
pub fn expectation(op: &DenseOperator, v: &StateVector) -> C64 {
    v.inner(&op.apply(v)) / v.inner(v)
}

/// Charge `Q` with `r|v⟩ = ω^Q|v⟩`, when `v` is a charge eigenvector within `tol`.
pub fn charge_of(chain: &ClockChain, v: &StateVector, tol: f64) -> Result<Option<usize>> {
    let rv = chain.apply_charge(1, v)?;
    let norm = v.norm();
    for q in 0..chain.n() {
        if rv.distance(&v.scale(omega_pow(chain.n(), q as i64))) <= tol * norm {
            return Ok(Some(q));
        }
    }
    Ok(None)
}

/// Dense commutator check used by sign-covariance tests: `[H, O]`.
pub fn commutes(a: &DenseOperator, b: &DenseOperator, tol: f64) -> bool {
    commutator(a, b).frobenius_norm() <= tol * (a.frobenius_norm() * b.frobenius_norm()).max(1.0)
}
