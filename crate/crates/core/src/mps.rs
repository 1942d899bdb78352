//! Explicit matrix-product forms: the bond-dimension-`N` tensor of the `d = 1`
//! skeleton state and the bond-dimension-2 single-excitation chain.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::clock::{omega_pow, ClockChain};
use crate::error::{Error, Result};
use crate::linalg::{StateVector, C64, ONE, ZERO};
use crate::policy::NumericPolicy;

/// Tensor `A^{(a)}_{σ,σ'}` stored row-major in `(physical, left, right)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    pub physical_dim: usize,
    pub left_dim: usize,
    pub right_dim: usize,
    data: Vec<C64>,
}

impl SiteTensor {
    pub fn zeros(physical_dim: usize, left_dim: usize, right_dim: usize) -> Self {
        SiteTensor { physical_dim, left_dim, right_dim, data: vec![ZERO; physical_dim * left_dim * right_dim] }
    }

    fn offset(&self, a: usize, l: usize, r: usize) -> usize {
        (a * self.left_dim + l) * self.right_dim + r
    }

    pub fn get(&self, a: usize, l: usize, r: usize) -> C64 {
        self.data[self.offset(a, l, r)]
    }

    pub fn set(&mut self, a: usize, l: usize, r: usize, v: C64) {
        let o = self.offset(a, l, r);
        self.data[o] = v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// Periodic chain, amplitudes are traces of matrix products.
    Trace,
    /// Open chain closed by `⟨left| ··· |right⟩`.
    Boundary { left: Vec<(f64, f64)>, right: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsChain {
    pub tensors: Vec<SiteTensor>,
    pub closure: Closure,
}

impl MpsChain {
    pub fn new(tensors: Vec<SiteTensor>, closure: Closure) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::contract("MPS needs at least one site"));
        }
        let l = tensors.len();
        for j in 0..l {
            let next = &tensors[(j + 1) % l];
            let open_end = j + 1 == l && matches!(closure, Closure::Boundary { .. });
            if !open_end && tensors[j].right_dim != next.left_dim {
                return Err(Error::contract(format!("bond {} has mismatched dimensions", j + 1)));
            }
            if tensors[j].data.iter().any(|x| !x.is_finite()) {
                return Err(Error::contract("MPS tensors must be finite"));
            }
        }
        if let Closure::Boundary { left, right } = &closure {
            if left.len() != tensors[0].left_dim || right.len() != tensors[l - 1].right_dim {
                return Err(Error::contract("boundary vectors do not match the end bonds"));
            }
        }
        Ok(MpsChain { tensors, closure })
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn max_bond(&self) -> usize {
        self.tensors.iter().map(|t| t.left_dim.max(t.right_dim)).max().unwrap_or(0)
    }

    /// Moves the tensor of site `j` to site `j + shift`.
    pub fn rotated(&self, shift: usize) -> MpsChain {
        let l = self.len();
        let tensors = (0..l).map(|j| self.tensors[(j + l - shift % l) % l].clone()).collect();
        MpsChain { tensors, closure: self.closure.clone() }
    }
}

/// `exp(β F_1(a, σ)/N)` with `F_1(x, y) = (N−1)/2 − ((x−y) mod N)`.
fn d1_weight(n: usize, beta: f64, a: usize, sigma: usize) -> f64 {
    let diff = (a as i64 - sigma as i64).rem_euclid(n as i64) as f64;
    (beta * ((n as f64 - 1.0) / 2.0 - diff) / n as f64).exp()
}

/// Periodic MPS of `e^{−βA_1}|ψ_0⟩` with `β = 2 artanh a`, bond dimension `N`:
/// `A^{(a_j)}_{σ_{j−1}, σ_j} = δ_{σ_{j−1}, a_j} · exp(β F_1(a_j, σ_j)/N)`.
pub fn mps_d1(n: usize, l: usize, a: f64) -> Result<MpsChain> {
    if n < 2 || l < 1 {
        return Err(Error::domain("need N ≥ 2 and L ≥ 1"));
    }
    if !(a.abs() < 1.0) {
        return Err(Error::Singular { k: 1, value: a });
    }
    let beta = 2.0 * a.atanh();
    let mut t = SiteTensor::zeros(n, n, n);
    for phys in 0..n {
        for sigma in 0..n {
            t.set(phys, phys, sigma, C64::new(d1_weight(n, beta, phys, sigma), 0.0));
        }
    }
    MpsChain::new(vec![t; l], Closure::Trace)
}

/// Single-flip chain `Σ_j e^{−iPj}/√L |0…1_j…0⟩` with `P = 2π·momentum/L`.
pub fn excitation_mps(l: usize, momentum: usize) -> Result<MpsChain> {
    if l < 1 {
        return Err(Error::domain("need L ≥ 1"));
    }
    let p = 2.0 * PI * momentum as f64 / l as f64;
    let tensors = (1..=l)
        .map(|j| {
            let mut t = SiteTensor::zeros(2, 2, 2);
            t.set(0, 0, 0, ONE);
            t.set(0, 1, 1, ONE);
            t.set(1, 0, 1, C64::from_polar(1.0 / (l as f64).sqrt(), -p * j as f64));
            t
        })
        .collect();
    MpsChain::new(tensors, Closure::Boundary { left: vec![(1.0, 0.0), (0.0, 0.0)], right: vec![(0.0, 0.0), (1.0, 0.0)] })
}

/// Full amplitude vector, site 1 most significant.
pub fn contract(mps: &MpsChain) -> Result<StateVector> {
    contract_with_limit(mps, NumericPolicy::default().max_state_dim)
}

pub fn contract_with_limit(mps: &MpsChain, limit: usize) -> Result<StateVector> {
    let mut dim: usize = 1;
    for t in &mps.tensors {
        dim = dim.checked_mul(t.physical_dim).filter(|&d| d <= limit).ok_or(Error::Capacity {
            what: "MPS contraction",
            requested: dim.saturating_mul(t.physical_dim),
            limit,
        })?;
    }
    // Each prefix carries a row block: `rows × right_dim` (rows = 1 for
    // boundary closure, rows = left bond of site 1 for the trace).
    let first = &mps.tensors[0];
    let (rows, mut prefixes): (usize, Vec<Vec<C64>>) = match &mps.closure {
        Closure::Trace => {
            let rows = first.left_dim;
            let id: Vec<C64> =
                (0..rows * rows).map(|i| if i / rows == i % rows { ONE } else { ZERO }).collect();
            (rows, vec![id])
        }
        Closure::Boundary { left, .. } => (1, vec![left.iter().map(|&(re, im)| C64::new(re, im)).collect()]),
    };
    for t in &mps.tensors {
        let mut next = Vec::with_capacity(prefixes.len() * t.physical_dim);
        for pre in &prefixes {
            for a in 0..t.physical_dim {
                let mut out = vec![ZERO; rows * t.right_dim];
                for r in 0..rows {
                    for k in 0..t.left_dim {
                        let x = pre[r * t.left_dim + k];
                        if x == ZERO {
                            continue;
                        }
                        for c in 0..t.right_dim {
                            out[r * t.right_dim + c] += x * t.get(a, k, c);
                        }
                    }
                }
                next.push(out);
            }
        }
        prefixes = next;
    }
    let amps = prefixes
        .into_iter()
        .map(|block| match &mps.closure {
            Closure::Trace => (0..rows).map(|i| block[i * rows + i]).sum(),
            Closure::Boundary { right, .. } => {
                block.iter().zip(right).map(|(x, &(re, im))| x * C64::new(re, im)).sum()
            }
        })
        .collect();
    Ok(StateVector::from_vec(amps))
}

/// Maps an occupation vector over `{0,1}^L` to `Σ_n c_n ∏_j (Z_j^{power})^{n_j} |ψ_0⟩`
/// with `|ψ_0⟩` the uniform product state.
pub fn dress_occupations(chain: &ClockChain, occupations: &StateVector, power: i64) -> Result<StateVector> {
    let l = chain.l();
    if occupations.dim() != 1usize << l {
        return Err(Error::contract("occupation vector must have dimension 2^L"));
    }
    let layout = chain.layout();
    let norm = (chain.dim() as f64).sqrt().recip();
    let mut out = StateVector::zeros(chain.dim());
    for (occ, &c) in occupations.amplitudes().iter().enumerate() {
        if c == ZERO {
            continue;
        }
        for (idx, amp) in out.amplitudes_mut().iter_mut().enumerate() {
            let mut phase = 0i64;
            for j in 1..=l {
                if (occ >> (l - j)) & 1 == 1 {
                    phase += power * layout.digit(idx, j) as i64;
                }
            }
            *amp += c * omega_pow(chain.n(), phase) * norm;
        }
    }
    Ok(out)
}

/// Number of Schmidt values above `tol · σ_max` across the cut after site `cut`.
pub fn schmidt_rank(state: &StateVector, cut: usize, n: usize, l: usize, tol: f64) -> Result<usize> {
    let s = schmidt_values(state, cut, n, l)?;
    let top = s.first().copied().unwrap_or(0.0);
    Ok(s.iter().filter(|&&x| x > tol * top).count())
}

/// Singular values of the `N^cut × N^{L−cut}` reshaping, descending.
pub fn schmidt_values(state: &StateVector, cut: usize, n: usize, l: usize) -> Result<Vec<f64>> {
    if cut == 0 || cut >= l {
        return Err(Error::contract(format!("cut must lie in 1..{l}")));
    }
    let limit = NumericPolicy::default().max_state_dim;
    let dim = (n as u128).pow(l as u32);
    if dim > limit as u128 {
        return Err(Error::Capacity { what: "Schmidt decomposition", requested: dim as usize, limit });
    }
    if state.dim() as u128 != dim {
        return Err(Error::contract("state dimension does not match N^L"));
    }
    let cols = n.pow((l - cut) as u32);
    let rows = state.dim() / cols;
    let m = Mat::from_fn(rows, cols, |i, j| state.amplitudes()[i * cols + j]);
    m.singular_values().map_err(|e| Error::numeric(format!("SVD failed: {e:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{fixed_point_state, rayleigh};
    use crate::laurent::LaurentPoly;

    fn circuit_state(n: usize, l: usize, a: f64) -> StateVector {
        let c = ClockChain::new(n, l).unwrap();
        let psi0 = fixed_point_state(&c, 0, 1, 0).unwrap().vector;
        c.apply_exp_a(1, C64::new(-2.0 * a.atanh(), 0.0), &psi0).unwrap().normalized().unwrap()
    }

    #[test]
    fn product_state_contraction() {
        let mut t = SiteTensor::zeros(2, 1, 1);
        t.set(0, 0, 0, C64::new(0.6, 0.0));
        t.set(1, 0, 0, C64::new(0.8, 0.0));
        let v = contract(&MpsChain::new(vec![t; 3], Closure::Trace).unwrap()).unwrap();
        assert!((v.amplitudes()[0].re - 0.216).abs() < 1e-15);
        assert!((v.amplitudes()[7].re - 0.512).abs() < 1e-15);
        assert_eq!(schmidt_rank(&v, 1, 2, 3, 1e-10).unwrap(), 1);
        assert_eq!(schmidt_rank(&v, 2, 2, 3, 1e-10).unwrap(), 1);
    }

    #[test]
    fn d1_zero_coupling_is_uniform() {
        let v = contract(&mps_d1(3, 3, 0.0).unwrap()).unwrap();
        let first = v.amplitudes()[0];
        assert!(v.amplitudes().iter().all(|a| (a - first).norm() < 1e-14));
        assert!(mps_d1(3, 3, 1.0).is_err());
    }

    #[test]
    fn d1_matches_circuit() {
        for (n, l, a) in [(3, 3, 0.5), (2, 6, 0.7), (3, 6, -0.4), (4, 4, 0.3)] {
            let mps = mps_d1(n, l, a).unwrap();
            assert_eq!(mps.max_bond(), n);
            let v = contract(&mps).unwrap().normalized().unwrap();
            let w = circuit_state(n, l, a);
            assert!((v.fidelity(&w) - 1.0).abs() < 1e-10, "N={n} L={l} a={a}");
        }
        let c = ClockChain::new(2, 6).unwrap();
        let v = contract(&mps_d1(2, 6, 0.7).unwrap()).unwrap().normalized().unwrap();
        let f = LaurentPoly::new(0, vec![1.0, 1.4, 0.49]).unwrap();
        assert!(rayleigh(&c, &f, &v).unwrap().1 < 1e-8);
    }

    #[test]
    fn d1_ring_schmidt_rank_is_l_independent() {
        // a ring cut severs two bonds, so the bound is chi^2
        for &(n, l) in &[(2usize, 6usize), (2, 10), (3, 6)] {
            let v = circuit_state(n, l, 0.5);
            let ranks: Vec<usize> = (1..l).map(|c| schmidt_rank(&v, c, n, l, 1e-10).unwrap()).collect();
            assert_eq!(ranks[0], n);
            assert_eq!(ranks[l - 2], n);
            assert!(ranks.iter().all(|&r| r <= n * n));
        }
    }

    #[test]
    fn excitation_two_sites() {
        let v = contract(&excitation_mps(2, 0).unwrap()).unwrap();
        let h = C64::new(0.5f64.sqrt(), 0.0);
        let want = StateVector::from_vec(vec![ZERO, h, h, ZERO]);
        assert!(v.distance(&want) < 1e-15);
    }

    #[test]
    fn excitation_matches_sum_and_translates() {
        let l = 4;
        let v = contract(&excitation_mps(l, 2).unwrap()).unwrap();
        let mut want = StateVector::zeros(16);
        for j in 1..=l {
            want.amplitudes_mut()[1 << (l - j)] = C64::from_polar(0.5, -PI * j as f64);
        }
        assert!(v.distance(&want) < 1e-12);

        let l = 6;
        for m in 0..l {
            let mps = excitation_mps(l, m).unwrap();
            let v = contract(&mps).unwrap();
            let shifted = contract(&mps.rotated(1)).unwrap();
            let phase = C64::from_polar(1.0, 2.0 * PI * m as f64 / l as f64);
            assert!(shifted.distance(&v.scale(phase)) < 1e-12);
        }
    }

    #[test]
    fn dressed_excitation_matches_direct_sum() {
        let c = ClockChain::new(3, 3).unwrap();
        let psi0 = fixed_point_state(&c, 0, 1, 0).unwrap().vector;
        let occ = contract(&excitation_mps(3, 1).unwrap()).unwrap();
        let dressed = dress_occupations(&c, &occ, -1).unwrap();
        let mut want = StateVector::zeros(27);
        for j in 1..=3i64 {
            let phase = C64::from_polar(1.0 / 3f64.sqrt(), -2.0 * PI * j as f64 / 3.0);
            want.axpy(phase, &c.apply_site_z(j, -1, &psi0).unwrap());
        }
        assert!(dressed.distance(&want) < 1e-12);
    }

    #[test]
    fn capacity_and_cut_errors() {
        let mps = mps_d1(2, 6, 0.1).unwrap();
        assert!(matches!(contract_with_limit(&mps, 32), Err(Error::Capacity { .. })));
        let v = contract(&mps).unwrap();
        assert!(schmidt_rank(&v, 0, 2, 6, 1e-10).is_err());
        assert!(schmidt_rank(&v, 6, 2, 6, 1e-10).is_err());
    }
}
