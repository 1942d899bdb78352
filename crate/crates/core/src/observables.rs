//! Disorder parameter, ground-state energy density and `(A_n + G_n)` checks.

use serde::Serialize;

use crate::clock::{alpha, omega_pow, ClockChain, GeneratorCache};
use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, StateVector, C64, ZERO};
use crate::skeleton::{a_plus_g_on, excited_state, fixed_point_state, Proportionality, SkeletonSpec};

/// `F_1(x, y) = Σ_m α_m ω^{−m(x−y)}` in closed form.
pub fn f1(x: i64, y: i64, n: usize) -> f64 {
    let n = n as i64;
    ((n - 1) as f64) / 2.0 - (x - y).rem_euclid(n) as f64
}

/// Odd-`m` part of [`f1`], `±N/4`; meaningful for even `N`.
pub fn f2(x: i64, y: i64, n: usize) -> f64 {
    let d = (x - y).rem_euclid(n as i64);
    if 2 * d < n as i64 {
        n as f64 / 4.0
    } else {
        -(n as f64) / 4.0
    }
}

/// `Σ α_m ω^{−m(x−y)}` over `m` in `1..N` (all `m`, or odd `m` only), summed directly.
pub fn f_sum(x: i64, y: i64, n: usize, odd_only: bool) -> f64 {
    (1..n as i64)
        .filter(|m| !odd_only || m % 2 == 1)
        .map(|m| alpha(n, m) * omega_pow(n, -m * (x - y)))
        .sum::<C64>()
        .re
}

/// Transfer matrix `T` and string-insertion matrix `B` of the `d = 1` disorder calculation.
#[derive(Debug, Clone)]
pub struct TransferPair {
    pub n: usize,
    pub a: f64,
    pub beta: f64,
    pub t: DenseOperator,
    pub b: DenseOperator,
}

fn check_disorder_args(n: usize, a: f64) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Unsupported(format!("the disorder operator needs even N, got N={n}")));
    }
    if !(a.abs() < 1.0) {
        return Err(Error::domain(format!("disorder parameter needs |a| < 1, got a={a}")));
    }
    Ok(())
}

pub fn disorder_transfer(n: usize, a: f64) -> Result<TransferPair> {
    check_disorder_args(n, a)?;
    let beta = 2.0 * a.atanh();
    let k = 2.0 * beta / n as f64;
    let t = DenseOperator::from_fn(n, |x, y| C64::new((k * f1(x as i64, y as i64, n)).exp(), 0.0));
    let b = DenseOperator::from_fn(n, |x, y| {
        let (x, y) = (x as i64, y as i64);
        C64::new((k * (f1(x, y, n) - f2(x, y, n))).exp(), 0.0)
    });
    Ok(TransferPair { n, a, beta, t, b })
}

/// Same matrices with entries from the direct `α_m` sums instead of the case tables.
pub fn disorder_transfer_by_sums(n: usize, a: f64) -> Result<TransferPair> {
    check_disorder_args(n, a)?;
    let beta = 2.0 * a.atanh();
    let k = 2.0 * beta / n as f64;
    let t = DenseOperator::from_fn(n, |x, y| C64::new((k * f_sum(x as i64, y as i64, n, false)).exp(), 0.0));
    let b = DenseOperator::from_fn(n, |x, y| {
        let (x, y) = (x as i64, y as i64);
        C64::new((k * (f_sum(x, y, n, false) - f_sum(x, y, n, true))).exp(), 0.0)
    });
    Ok(TransferPair { n, a, beta, t, b })
}

/// Eigenvalues `λ_k = Σ_d c_d ω^{dk}` of a circulant matrix with first row `c`.
pub fn circulant_spectrum(op: &DenseOperator) -> Vec<C64> {
    let n = op.dim();
    (0..n as i64)
        .map(|k| (0..n).map(|d| op.get(0, d) * omega_pow(n, d as i64 * k)).sum())
        .collect()
}

/// Is every row a cyclic right shift of the first?
pub fn is_circulant(op: &DenseOperator, tol: f64) -> bool {
    let n = op.dim();
    (0..n).all(|i| (0..n).all(|j| (op.get(i, j) - op.get(0, (j + n - i) % n)).norm() <= tol))
}

impl TransferPair {
    /// Perron eigenvalue of `T`, its row sum.
    pub fn lambda0(&self) -> f64 {
        (0..self.n).map(|j| self.t.get(0, j).re).sum()
    }

    /// `|λ_1|/λ_0` with `λ_1` the subleading eigenvalue of `T`.
    pub fn rate(&self) -> f64 {
        let mut mags: Vec<f64> = circulant_spectrum(&self.t).iter().map(|z| z.norm()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        mags.get(1).copied().unwrap_or(0.0) / mags[0]
    }
}

/// `Tr(T^{L−1}B)/Tr(T^L)` on a periodic chain of `L` sites.
pub fn disorder_finite_l(n: usize, a: f64, l: usize) -> Result<f64> {
    if l < 2 {
        return Err(Error::domain(format!("need L >= 2, got L={l}")));
    }
    let pair = disorder_transfer(n, a)?;
    // powers of T/λ_0 stay bounded
    let t = pair.t.scale(C64::new(1.0 / pair.lambda0(), 0.0));
    let mut p = DenseOperator::identity(n);
    for _ in 0..l - 1 {
        p = p.matmul(&t);
    }
    let num = p.matmul(&pair.b.scale(C64::new(1.0 / pair.lambda0(), 0.0))).trace();
    let den = p.matmul(&t).trace();
    Ok((num / den).re)
}

/// Thermodynamic limit `v_0ᵀ B v_0 / λ_0`, cross-checked against `1/cosh(β/2)` and `√(1−a²)`.
pub fn disorder_thermo(n: usize, a: f64) -> Result<f64> {
    let pair = disorder_transfer(n, a)?;
    let v0 = StateVector::from_vec(vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n]);
    let value = v0.inner(&pair.b.apply(&v0)).re / pair.lambda0();
    let cosh_form = 1.0 / (pair.beta / 2.0).cosh();
    let sqrt_form = (1.0 - a * a).sqrt();
    let dev = (value - cosh_form).abs().max((value - sqrt_form).abs());
    if dev > 1e-12 {
        return Err(Error::numeric(format!(
            "transfer value {value} disagrees with closed forms ({cosh_form}, {sqrt_form}) by {dev:e}"
        )));
    }
    Ok(value)
}

/// Geometric rate of `dev(L) → 0` read off a two-term linear recurrence fitted to the sequence.
///
/// Consecutive samples at unit spacing in `L`. Returns `None` when fewer than
/// three usable samples remain above `floor`.
pub fn fitted_rate(dev: &[f64], floor: f64) -> Option<f64> {
    let mut m = [[0.0f64; 2]; 2];
    let mut rhs = [0.0f64; 2];
    let mut rows = 0;
    for w in dev.windows(3) {
        let scale = w.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if scale <= floor {
            continue;
        }
        let (x, y, z) = (w[1] / scale, w[0] / scale, w[2] / scale);
        m[0][0] += x * x;
        m[0][1] += x * y;
        m[1][1] += y * y;
        rhs[0] += x * z;
        rhs[1] += y * z;
        rows += 1;
    }
    if rows < 2 {
        return None;
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[0][1];
    let (c1, c2) = if det.abs() > 1e-14 * (m[0][0] * m[1][1]).max(f64::MIN_POSITIVE) {
        ((rhs[0] * m[1][1] - rhs[1] * m[0][1]) / det, (m[0][0] * rhs[1] - m[0][1] * rhs[0]) / det)
    } else {
        (rhs[0] / m[0][0], 0.0)
    };
    // roots of z² − c1 z − c2
    let disc = C64::new(c1 * c1 + 4.0 * c2, 0.0).sqrt();
    let r1 = (C64::new(c1, 0.0) + disc) / 2.0;
    let r2 = (C64::new(c1, 0.0) - disc) / 2.0;
    Some(r1.norm().max(r2.norm()))
}

/// `⟨v| Π_{j=first}^{first+len−1} X_j^{power} |v⟩ / ⟨v|v⟩`, sites 1-based and periodic.
pub fn string_expectation(chain: &ClockChain, v: &StateVector, first: usize, len: usize, power: i64) -> Result<C64> {
    if v.dim() != chain.dim() {
        return Err(Error::contract(format!("state has dimension {}, chain needs {}", v.dim(), chain.dim())));
    }
    let layout = chain.layout();
    let n = chain.n() as i64;
    let sites: Vec<usize> = (0..len).map(|k| layout.wrap((first + k) as i64)).collect();
    let amps = v.amplitudes();
    let mut acc = ZERO;
    for (idx, &amp) in amps.iter().enumerate() {
        let mut digits = layout.digits(idx);
        for &s in &sites {
            // X|a⟩ = |a−1⟩
            digits[s - 1] = (digits[s - 1] as i64 - power).rem_euclid(n) as usize;
        }
        acc += amps[layout.index_of(&digits)].conj() * amp;
    }
    Ok(acc / v.inner(v))
}

/// Gauss–Kronrod 7/15 nodes on `[0, 1]` half-interval, Kronrod weights and Gauss weights.
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let s = f(c - h * GK_NODES[i]) + f(c + h * GK_NODES[i]);
        kron += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss–Kronrod integration to absolute tolerance `tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    const MAX_INTERVALS: usize = 4000;
    let mut parts = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    loop {
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= tol {
            break;
        }
        if parts.len() >= MAX_INTERVALS {
            let value: f64 = parts.iter().map(|p| p.2).sum();
            return Err(Error::numeric(format!(
                "quadrature on [{a}, {b}] did not converge: estimate {value}, error {err:e} after {} intervals",
                parts.len()
            )));
        }
        let worst = (0..parts.len()).max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3)).unwrap();
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    parts.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(Quadrature {
        value: parts.iter().map(|p| p.2).sum(),
        error_estimate: parts.iter().map(|p| p.3).sum(),
        intervals: parts.len(),
    })
}

/// `θ(ζ) ∈ [0, π]` with `tan(θ/2) = (sin ζ / sin(ζ + π/N))^{N/2}`.
pub fn baxter_theta(zeta: f64, n: usize) -> f64 {
    let e = n as f64 / 2.0;
    let num = zeta.sin().max(0.0).powf(e);
    let den = (zeta + std::f64::consts::PI / n as f64).sin().max(0.0).powf(e);
    2.0 * num.atan2(den)
}

/// Thermodynamic ground-state energy density `ε_0` for `f = ±z^p g²` with `g = Σ s_l z^l`.
pub fn energy_density_integral(s: &[f64], n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("need N >= 2, got N={n}")));
    }
    if s.is_empty() {
        return Err(Error::domain("empty coefficient list"));
    }
    let upper = std::f64::consts::PI * (1.0 - 1.0 / n as f64);
    let d = s.len();
    // Σ_{l,m} s_l s_m cos((l−m)θ) = c_0 + 2 Σ_{k≥1} c_k cos(kθ)
    let c: Vec<f64> = (0..d).map(|k| (0..d - k).map(|l| s[l] * s[l + k]).sum()).collect();
    let mut total = c[0] * upper;
    for (k, &ck) in c.iter().enumerate().skip(1) {
        if ck == 0.0 {
            continue;
        }
        let q = integrate(|z| (k as f64 * baxter_theta(z, n)).cos(), 0.0, upper, 1e-12)?;
        total += 2.0 * ck * q.value;
    }
    Ok(-total / (2.0 * std::f64::consts::PI))
}

/// `(A_n + G_n)` proportionality on the uniform ground state of `A_0` and on its
/// one-particle excitations.
#[derive(Debug, Clone, Serialize)]
pub struct APlusGReport {
    pub n_max: i64,
    pub ground: Vec<Proportionality>,
    /// `(momentum index, checks for n = 1..n_max)`
    pub excitations: Vec<(usize, Vec<Proportionality>)>,
}

impl APlusGReport {
    pub fn max_residual(&self) -> f64 {
        self.ground
            .iter()
            .chain(self.excitations.iter().flat_map(|(_, v)| v.iter()))
            .fold(0.0, |m, p| m.max(p.residual))
    }
}

pub fn a_plus_g_expectations(cache: &GeneratorCache, n_max: i64) -> Result<APlusGReport> {
    if n_max < 1 {
        return Err(Error::domain(format!("n_max must be >= 1, got {n_max}")));
    }
    let chain = cache.chain();
    let psi0 = fixed_point_state(chain, 0, 1, 0)?.vector;
    let ground = (1..=n_max).map(|k| a_plus_g_on(chain, k, &psi0)).collect::<Result<Vec<_>>>()?;
    let spec = SkeletonSpec::new(chain.clone(), 1, 0, vec![1.0])?;
    let mut excitations = Vec::with_capacity(chain.l());
    for momentum in 0..chain.l() {
        let v = excited_state(&spec, momentum)?.state;
        let checks = (1..=n_max).map(|k| a_plus_g_on(chain, k, &v)).collect::<Result<Vec<_>>>()?;
        excitations.push((momentum, checks));
    }
    Ok(APlusGReport { n_max, ground, excitations })
}

/// `⟨μ_0 μ_{L/2}⟩`-type string of `X^{N/2}` over half the ring on the `d = 1` skeleton state.
pub fn dense_two_point_string(n: usize, l: usize, a: f64) -> Result<f64> {
    check_disorder_args(n, a)?;
    let chain = ClockChain::new(n, l)?;
    let spec = SkeletonSpec::new(chain.clone(), 1, 0, vec![1.0, a])?;
    let base = fixed_point_state(&chain, 0, 1, 0)?;
    let phi = crate::skeleton::skeleton_eigenstate(&spec, &base)?.state;
    let v = string_expectation(&chain, &phi, 1, l / 2, n as i64 / 2)?;
    if v.im.abs() > 1e-10 * v.norm().max(1.0) {
        return Err(Error::numeric(format!("string expectation has imaginary part {}", v.im)));
    }
    Ok(v.re)
}
