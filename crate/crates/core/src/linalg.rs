//! Dense complex linear algebra shared by every other module.
//!
//! Operators are square `faer` matrices wrapped in [`DenseOperator`]; kets are
//! plain amplitude vectors in [`StateVector`]. Basis ordering follows the
//! Kronecker convention: site 1 is the most significant digit, so for `L` sites
//! of local dimension `N` the ket `|a_1 … a_L⟩` has index `Σ_j a_j N^{L-j}`.

use std::ops::{Add, Mul, Sub};

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix acting on a Hilbert space of dimension `dim`.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    mat: Mat<C64>,
}

impl PartialEq for DenseOperator {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|j| (0..self.dim()).all(|i| self.mat[(i, j)] == other.mat[(i, j)]))
    }
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "operator dimension must be positive");
        DenseOperator { mat: Mat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "operator dimension must be positive");
        DenseOperator { mat: Mat::identity(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim >= 1, "operator dimension must be positive");
        DenseOperator { mat: Mat::from_fn(dim, dim, f) }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut op = DenseOperator::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op.mat[(i, i)] = d;
        }
        op
    }

    /// Builds an operator from row-major nested slices.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::contract("from_rows expects a non-empty square array"));
        }
        Ok(DenseOperator::from_fn(dim, |i, j| rows[i][j]))
    }

    pub fn from_mat(mat: Mat<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::contract("operator matrix must be square and non-empty"));
        }
        Ok(DenseOperator { mat })
    }

    pub fn as_mat(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.mat[(i, j)] = value;
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator { mat: self.mat.adjoint().to_owned() }
    }

    pub fn scale(&self, s: C64) -> DenseOperator {
        let n = self.dim();
        DenseOperator { mat: Mat::from_fn(n, n, |i, j| self.mat[(i, j)] * s) }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: C64, other: &DenseOperator) {
        assert_eq!(self.dim(), other.dim(), "axpy dimension mismatch");
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                let v = other.mat[(i, j)];
                self.mat[(i, j)] += s * v;
            }
        }
    }

    pub fn matmul(&self, other: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), other.dim(), "matmul dimension mismatch");
        DenseOperator { mat: &self.mat * &other.mat }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm_l2()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| self.mat[(i, j)].is_finite()))
    }

    /// `‖h − h†‖_F / max(‖h‖_F, 1)`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                acc += (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt() / self.frobenius_norm().max(1.0)
    }

    /// `‖h + h†‖_F / max(‖h‖_F, 1)`.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..n {
                acc += (self.mat[(i, j)] + self.mat[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt() / self.frobenius_norm().max(1.0)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        assert_eq!(self.dim(), v.dim(), "operator/state dimension mismatch");
        let n = self.dim();
        let mut out = vec![ZERO; n];
        for (j, &x) in v.amplitudes().iter().enumerate() {
            if x == ZERO {
                continue;
            }
            let col = self.mat.col(j);
            for (o, &m) in out.iter_mut().zip(col.iter()) {
                *o += m * x;
            }
        }
        StateVector::from_vec(out)
    }

    /// Returns column `j` as a state vector.
    pub fn column(&self, j: usize) -> StateVector {
        StateVector::from_vec(self.mat.col(j).iter().copied().collect())
    }

    /// Builds an operator whose columns are the given states.
    pub fn from_columns(cols: &[StateVector]) -> Result<Self> {
        let n = cols.len();
        if n == 0 || cols.iter().any(|c| c.dim() != n) {
            return Err(Error::contract("from_columns expects dim vectors of length dim"));
        }
        Ok(DenseOperator::from_fn(n, |i, j| cols[j].amplitudes()[i]))
    }

    /// Applies `f` to every column, viewed as a state, and reassembles the result.
    pub fn map_columns(&self, mut f: impl FnMut(&StateVector) -> StateVector) -> DenseOperator {
        let n = self.dim();
        let mut mat = Mat::zeros(n, n);
        for j in 0..n {
            let out = f(&self.column(j));
            for (i, &x) in out.amplitudes().iter().enumerate() {
                mat[(i, j)] = x;
            }
        }
        DenseOperator { mat }
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "add dimension mismatch");
        DenseOperator { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "sub dimension mismatch");
        DenseOperator { mat: &self.mat - &rhs.mat }
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        self.matmul(rhs)
    }
}

/// `[a, b] = ab − ba`
pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> DenseOperator {
    &a.matmul(b) - &b.matmul(a)
}

/// `‖a − b‖_F / scale` with `scale = max(‖a‖_F + ‖b‖_F, floor)`.
pub fn relative_distance(a: &DenseOperator, b: &DenseOperator, floor: f64) -> f64 {
    let diff = (a - b).frobenius_norm();
    diff / (a.frobenius_norm() + b.frobenius_norm()).max(floor).max(f64::MIN_POSITIVE)
}

/// Complex amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "state dimension must be positive");
        StateVector { amps: vec![ZERO; dim] }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = StateVector::zeros(dim);
        v.amps[index] = ONE;
        v
    }

    pub fn from_vec(amps: Vec<C64>) -> Self {
        assert!(!amps.is_empty(), "state dimension must be positive");
        StateVector { amps }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> C64) -> Self {
        StateVector::from_vec((0..dim).map(f).collect())
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Returns the unit vector along `self`; errors on a zero vector.
    pub fn normalized(&self) -> Result<StateVector> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::numeric("cannot normalize a zero or non-finite state"));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, s: C64) -> StateVector {
        StateVector { amps: self.amps.iter().map(|a| a * s).collect() }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: C64, other: &StateVector) {
        assert_eq!(self.dim(), other.dim(), "axpy dimension mismatch");
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += s * b;
        }
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "distance dimension mismatch");
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|⟨self|other⟩|` for normalized inputs; insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm() / (self.norm() * other.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|a| a.is_finite())
    }
}

impl Add for &StateVector {
    type Output = StateVector;
    fn add(self, rhs: &StateVector) -> StateVector {
        let mut out = self.clone();
        out.axpy(ONE, rhs);
        out
    }
}

impl Sub for &StateVector {
    type Output = StateVector;
    fn sub(self, rhs: &StateVector) -> StateVector {
        let mut out = self.clone();
        out.axpy(-ONE, rhs);
        out
    }
}

/// Local dimension and site count of a chain, as needed for gate application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteLayout {
    pub local_dim: usize,
    pub sites: usize,
}

impl SiteLayout {
    pub fn hilbert_dim(&self) -> usize {
        self.local_dim.pow(self.sites as u32)
    }

    /// Stride of site `j` (1-based) in the flattened index.
    pub fn stride(&self, site: usize) -> usize {
        self.local_dim.pow((self.sites - site) as u32)
    }

    /// Digit `a_j` of basis index `index` at site `j` (1-based).
    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.stride(site)) % self.local_dim
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (1..=self.sites).map(|j| self.digit(index, j)).collect()
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &d| acc * self.local_dim + d)
    }

    /// Wraps a possibly out-of-range site label onto `1..=L`.
    pub fn wrap(&self, site: i64) -> usize {
        (site - 1).rem_euclid(self.sites as i64) as usize + 1
    }
}

/// Kronecker product with the crate's default capacity limit.
pub fn kron(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    kron_with_limit(a, b, NumericPolicy::default().max_matrix_dim)
}

pub fn kron_with_limit(a: &DenseOperator, b: &DenseOperator, limit: usize) -> Result<DenseOperator> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da.saturating_mul(db);
    if dim > limit {
        return Err(Error::Capacity { what: "kron", requested: dim, limit });
    }
    Ok(DenseOperator::from_fn(dim, |r, c| a.get(r / db, c / db) * b.get(r % db, c % db)))
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: DenseOperator,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> StateVector {
        self.vectors.column(k)
    }
}

fn check_hermitian(h: &DenseOperator, what: &str) -> Result<()> {
    let tol = NumericPolicy::default().hermiticity;
    let defect = h.hermiticity_defect();
    if !(defect <= tol) {
        return Err(Error::Contract(format!(
            "{what}: input is not Hermitian (relative defect {defect:.3e} > {tol:.0e})"
        )));
    }
    Ok(())
}

pub fn eigh(h: &DenseOperator) -> Result<Eigh> {
    check_hermitian(h, "eigh")?;
    let evd = h
        .as_mat()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::numeric(format!("Hermitian eigensolver failed: {e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().map(|x| x.re).collect();
    let vectors = DenseOperator { mat: evd.U().to_owned() };
    Ok(Eigh { values, vectors })
}

/// Eigenvalues only (ascending).
pub fn eigvalsh(h: &DenseOperator) -> Result<Vec<f64>> {
    check_hermitian(h, "eigvalsh")?;
    h.as_mat()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::numeric(format!("Hermitian eigensolver failed: {e:?}")))
}

/// `e^{scale·h}` for Hermitian `h`, through `h = VΛV†`.
pub fn matexp_hermitian(h: &DenseOperator, scale: C64) -> Result<DenseOperator> {
    if scale == ZERO {
        check_hermitian(h, "matexp_hermitian")?;
        return Ok(DenseOperator::identity(h.dim()));
    }
    let Eigh { values, vectors } = eigh(h)?;
    let n = h.dim();
    let phases: Vec<C64> = values.iter().map(|&l| (scale * l).exp()).collect();
    if phases.iter().any(|p| !p.is_finite()) {
        return Err(Error::numeric("matrix exponential overflowed"));
    }
    let v = vectors.as_mat();
    let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] * phases[j]);
    Ok(DenseOperator { mat: &scaled * v.adjoint() })
}

/// Applies `gate` to the `window` consecutive sites starting at `first_site`
/// (1-based, wrapping periodically), identity elsewhere.
pub fn apply_local_gate(
    state: &StateVector,
    gate: &DenseOperator,
    first_site: usize,
    window: usize,
    layout: SiteLayout,
) -> Result<StateVector> {
    if window == 0 || window > layout.sites {
        return Err(Error::contract(format!("gate window {window} invalid for {} sites", layout.sites)));
    }
    let gate_dim = layout.local_dim.pow(window as u32);
    if gate.dim() != gate_dim {
        return Err(Error::contract(format!(
            "gate dimension {} does not match N^window = {gate_dim}",
            gate.dim()
        )));
    }
    if state.dim() != layout.hilbert_dim() {
        return Err(Error::contract("state dimension does not match the chain"));
    }
    let n = layout.local_dim;
    let strides: Vec<usize> =
        (0..window).map(|t| layout.stride(layout.wrap((first_site + t) as i64))).collect();
    let offsets: Vec<usize> = (0..gate_dim)
        .map(|g| {
            let mut rem = g;
            let mut off = 0;
            for t in (0..window).rev() {
                off += (rem % n) * strides[t];
                rem /= n;
            }
            off
        })
        .collect();
    let mut out = state.amps.clone();
    let mut local = vec![ZERO; gate_dim];
    for base in 0..state.dim() {
        if strides.iter().any(|&s| (base / s) % n != 0) {
            continue;
        }
        for (g, l) in local.iter_mut().enumerate() {
            *l = state.amps[base + offsets[g]];
        }
        for r in 0..gate_dim {
            let mut acc = ZERO;
            for (c, &x) in local.iter().enumerate() {
                acc += gate.get(r, c) * x;
            }
            out[base + offsets[r]] = acc;
        }
    }
    Ok(StateVector { amps: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> DenseOperator {
        DenseOperator::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap()
    }

    fn close(a: &DenseOperator, b: &DenseOperator, tol: f64) -> bool {
        (a - b).frobenius_norm() <= tol
    }

    #[test]
    fn kron_identities() {
        let i2 = DenseOperator::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), DenseOperator::identity(4));

        // X ⊗ I applied to |00⟩ gives |10⟩
        let x1 = kron(&pauli_x(), &i2).unwrap();
        assert_eq!(x1.apply(&StateVector::basis(4, 0)), StateVector::basis(4, 2));

        let z = DenseOperator::from_diagonal(&[ONE, -ONE]);
        let zz = kron(&z, &z).unwrap();
        assert_eq!(zz, DenseOperator::from_diagonal(&[ONE, -ONE, -ONE, ONE]));
    }

    #[test]
    fn kron_capacity_error() {
        let a = DenseOperator::identity(8);
        let err = kron_with_limit(&a, &a, 32).unwrap_err();
        assert!(matches!(err, Error::Capacity { requested: 64, limit: 32, .. }));
    }

    #[test]
    fn kron_is_associative() {
        let a = DenseOperator::from_fn(2, |i, j| C64::new((i + 2 * j) as f64, 1.0));
        let b = DenseOperator::from_fn(3, |i, j| C64::new(i as f64 - j as f64, 0.5));
        let c = DenseOperator::from_fn(2, |i, j| C64::new(1.0, (i * j) as f64));
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn matexp_cases() {
        let h = DenseOperator::from_diagonal(&[ONE, C64::new(2.0, 0.0)]);
        assert_eq!(matexp_hermitian(&h, ZERO).unwrap(), DenseOperator::identity(2));
        let e = matexp_hermitian(&h, C64::new(2f64.ln(), 0.0)).unwrap();
        let want = DenseOperator::from_diagonal(&[C64::new(2.0, 0.0), C64::new(4.0, 0.0)]);
        assert!(close(&e, &want, 1e-12));

        // Pauli X: e^{βX} = cosh β I + sinh β X
        let beta = 0.73;
        let e = matexp_hermitian(&pauli_x(), C64::new(beta, 0.0)).unwrap();
        let mut want = DenseOperator::identity(2).scale(C64::new(beta.cosh(), 0.0));
        want.axpy(C64::new(beta.sinh(), 0.0), &pauli_x());
        assert!(close(&e, &want, 1e-12));
    }

    #[test]
    fn matexp_inverse_pair_and_unitarity() {
        let h = DenseOperator::from_fn(5, |i, j| {
            let re = 0.1 * (((i * 3 + j * 5) % 7) as f64 + ((j * 3 + i * 5) % 7) as f64);
            let im = (i as f64 - j as f64) * 0.03;
            C64::new(re, im)
        });
        let s = C64::new(0.37, 0.0);
        let prod = matexp_hermitian(&h, s).unwrap().matmul(&matexp_hermitian(&h, -s).unwrap());
        assert!(close(&prod, &DenseOperator::identity(5), 1e-10));

        let u = matexp_hermitian(&h, C64::new(0.0, 1.3)).unwrap();
        assert!(close(&u.adjoint().matmul(&u), &DenseOperator::identity(5), 1e-10));
    }

    #[test]
    fn matexp_rejects_non_hermitian() {
        let h = DenseOperator::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]).unwrap();
        assert!(matches!(matexp_hermitian(&h, ONE), Err(Error::Contract(_))));
        assert!(matches!(eigh(&h), Err(Error::Contract(_))));
    }

    #[test]
    fn eigh_diagonal_and_pauli_z() {
        let h = DenseOperator::from_diagonal(&[C64::new(3.0, 0.0), ONE, C64::new(2.0, 0.0)]);
        let e = eigh(&h).unwrap();
        assert_eq!(e.values.len(), 3);
        for (v, w) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - w).abs() < 1e-14);
        }
        // eigenvector for 1 is e_1 up to phase
        assert!((e.vector(0).amplitudes()[1].norm() - 1.0).abs() < 1e-12);

        let z = DenseOperator::from_diagonal(&[ONE, -ONE]);
        let vals = eigvalsh(&z).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_residuals_and_orthonormality() {
        let h = DenseOperator::from_fn(12, |i, j| {
            let a = (i * 7 + j * 11) % 13;
            let b = (j * 7 + i * 11) % 13;
            C64::new((a + b) as f64, (i as f64 - j as f64) * 0.1)
        });
        let e = eigh(&h).unwrap();
        let scale = h.frobenius_norm();
        for k in 0..12 {
            let v = e.vector(k);
            let hv = h.apply(&v);
            assert!(hv.distance(&v.scale(C64::new(e.values[k], 0.0))) <= 1e-9 * scale);
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = e.vectors.adjoint().matmul(&e.vectors);
        assert!(close(&gram, &DenseOperator::identity(12), 1e-10));
    }

    #[test]
    fn gate_identity_and_basis_action() {
        let layout = SiteLayout { local_dim: 2, sites: 2 };
        let psi = StateVector::from_fn(4, |i| C64::new(i as f64, -(i as f64)));
        let out = apply_local_gate(&psi, &DenseOperator::identity(2), 2, 1, layout).unwrap();
        assert_eq!(out, psi);
        let out = apply_local_gate(&StateVector::basis(4, 0), &pauli_x(), 1, 1, layout).unwrap();
        assert_eq!(out, StateVector::basis(4, 2));
    }

    #[test]
    fn gate_dimension_mismatch() {
        let layout = SiteLayout { local_dim: 2, sites: 3 };
        let err = apply_local_gate(&StateVector::basis(8, 0), &pauli_x(), 1, 2, layout).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn boundary_gate_matches_dense_kron() {
        // A generic two-site gate on sites (L, 1) of an N=2, L=4 chain.
        let layout = SiteLayout { local_dim: 2, sites: 4 };
        let gate = DenseOperator::from_fn(4, |i, j| C64::new((i * 4 + j) as f64 * 0.1, (i + j) as f64 * 0.05));
        let psi = StateVector::from_fn(16, |i| C64::new((i as f64).sin(), (i as f64).cos()));
        let got = apply_local_gate(&psi, &gate, 4, 2, layout).unwrap();

        // dense: gate acts on (site 4, site 1); build it on sites (1,2) then
        // conjugate by the cyclic shift that moves site 4 to site 1.
        let on12 = kron(&kron(&gate, &DenseOperator::identity(2)).unwrap(), &DenseOperator::identity(2)).unwrap();
        let shift = DenseOperator::from_fn(16, |r, c| {
            // |a1 a2 a3 a4⟩ -> |a4 a1 a2 a3⟩ moves site 4 into slot 1
            let d = layout.digits(c);
            let moved = [d[3], d[0], d[1], d[2]];
            if layout.index_of(&moved) == r { ONE } else { ZERO }
        });
        let dense = shift.adjoint().matmul(&on12).matmul(&shift);
        assert!(got.distance(&dense.apply(&psi)) < 1e-12);
    }
}
