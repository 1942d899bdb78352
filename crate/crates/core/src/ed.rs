//! Exact diagonalization: spectra, `(P, Q)` sector blocks, ground-state verdicts and gap scans.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::clock::{omega_pow, ClockChain};
use crate::error::{Error, Result};
use crate::laurent::{factor_square, winding_number, LaurentPoly};
use crate::linalg::{eigh, DenseOperator, Eigh, StateVector, C64, ZERO};
use crate::policy::NumericPolicy;
use crate::skeleton::{fixed_point_state, skeleton_eigenstate, SkeletonSpec};

/// Complete sorted spectrum with an orthonormal eigenbasis.
pub fn full_spectrum(h: &DenseOperator) -> Result<Eigh> {
    let limit = NumericPolicy::default().max_matrix_dim;
    if h.dim() > limit {
        return Err(Error::Capacity { what: "full spectrum", requested: h.dim(), limit });
    }
    eigh(h)
}

/// `‖Hv − ⟨v|H|v⟩v‖` for normalized `v`.
pub fn eigenstate_residual(h: &DenseOperator, v: &StateVector) -> f64 {
    let hv = h.apply(v);
    let e = v.inner(&hv);
    hv.distance(&v.scale(e))
}

/// Column-sparse operator, columns sorted by row.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    cols: Vec<Vec<(usize, C64)>>,
}

impl SparseOperator {
    pub fn from_dense(op: &DenseOperator, drop_tol: f64) -> Self {
        let dim = op.dim();
        let cols = (0..dim)
            .map(|j| (0..dim).filter_map(|i| Some((i, op.get(i, j))).filter(|(_, v)| v.norm() > drop_tol)).collect())
            .collect();
        SparseOperator { dim, cols }
    }

    /// Columns obtained by applying `f` to every basis vector.
    pub fn from_apply(dim: usize, drop_tol: f64, f: impl Fn(&StateVector) -> Result<StateVector>) -> Result<Self> {
        let mut cols = Vec::with_capacity(dim);
        for j in 0..dim {
            let col = f(&StateVector::basis(dim, j))?;
            cols.push(col.amplitudes().iter().enumerate().filter(|(_, v)| v.norm() > drop_tol).map(|(i, &v)| (i, v)).collect());
        }
        Ok(SparseOperator { dim, cols })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column(&self, j: usize) -> &[(usize, C64)] {
        &self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let col = &self.cols[j];
        col.binary_search_by_key(&i, |e| e.0).map(|k| col[k].1).unwrap_or(ZERO)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.dim);
        let o = out.amplitudes_mut();
        for (j, &x) in v.amplitudes().iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for &(i, a) in &self.cols[j] {
                o[i] += a * x;
            }
        }
        out
    }

    /// `Σ_k c_k O_k` over operators of equal dimension.
    pub fn linear_combination(terms: &[(f64, &SparseOperator)]) -> Result<Self> {
        let dim = terms.first().map(|t| t.1.dim).ok_or_else(|| Error::contract("empty linear combination"))?;
        if terms.iter().any(|t| t.1.dim != dim) {
            return Err(Error::contract("operators in a linear combination differ in dimension"));
        }
        let mut cols = Vec::with_capacity(dim);
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for j in 0..dim {
            acc.clear();
            for &(c, op) in terms {
                if c == 0.0 {
                    continue;
                }
                for &(i, a) in &op.cols[j] {
                    *acc.entry(i).or_insert(ZERO) += a * c;
                }
            }
            cols.push(acc.iter().filter(|(_, v)| **v != ZERO).map(|(&i, &v)| (i, v)).collect());
        }
        Ok(SparseOperator { dim, cols })
    }

    pub fn to_dense(&self) -> DenseOperator {
        let mut d = DenseOperator::zeros(self.dim);
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                d.set(i, j, v);
            }
        }
        d
    }
}

/// Columns of an operator commuting with `T` and `r`: one application per symmetry
/// orbit, the rest by permuting rows.
pub fn symmetric_from_apply(
    chain: &ClockChain,
    drop_tol: f64,
    f: impl Fn(&StateVector) -> Result<StateVector>,
) -> Result<SparseOperator> {
    let dim = chain.dim();
    let (n, l) = (chain.n(), chain.l());
    let (tmap, rmap) = index_maps(chain);
    let mut cols: Vec<Option<Vec<(usize, C64)>>> = vec![None; dim];
    for rep in 0..dim {
        if cols[rep].is_some() {
            continue;
        }
        let col = f(&StateVector::basis(dim, rep))?;
        let base: Vec<(usize, C64)> =
            col.amplitudes().iter().enumerate().filter(|(_, v)| v.norm() > drop_tol).map(|(i, &v)| (i, v)).collect();
        let mut rk = base;
        let mut jrk = rep;
        for _ in 0..n {
            let mut cur = rk.clone();
            let mut idx = jrk;
            for _ in 0..l {
                if cols[idx].is_none() {
                    let mut c = cur.clone();
                    c.sort_by_key(|e| e.0);
                    cols[idx] = Some(c);
                }
                cur.iter_mut().for_each(|e| e.0 = tmap[e.0]);
                idx = tmap[idx];
            }
            rk.iter_mut().for_each(|e| e.0 = rmap[e.0]);
            jrk = rmap[jrk];
        }
    }
    Ok(SparseOperator { dim, cols: cols.into_iter().map(|c| c.expect("every index lies in an orbit")).collect() })
}

/// Sparse generators `A_k` of one chain, built on demand.
#[derive(Debug)]
pub struct SparseGenerators {
    chain: ClockChain,
    ops: BTreeMap<i64, SparseOperator>,
}

impl SparseGenerators {
    pub fn new(chain: ClockChain) -> Result<Self> {
        chain.check_state_capacity("sparse generators")?;
        Ok(SparseGenerators { chain, ops: BTreeMap::new() })
    }

    pub fn chain(&self) -> &ClockChain {
        &self.chain
    }

    pub fn a(&mut self, k: i64) -> Result<&SparseOperator> {
        if !self.ops.contains_key(&k) {
            let chain = &self.chain;
            let op = symmetric_from_apply(chain, 1e-13, |v| chain.apply_a(k, v))?;
            self.ops.insert(k, op);
        }
        Ok(&self.ops[&k])
    }

    /// `H_A = Σ_m t_m A_m`
    pub fn hamiltonian(&mut self, f: &LaurentPoly) -> Result<SparseOperator> {
        for (m, _) in f.terms() {
            self.a(m)?;
        }
        let terms: Vec<(f64, &SparseOperator)> = f.terms().map(|(m, t)| (t, &self.ops[&m])).collect();
        SparseOperator::linear_combination(&terms)
    }
}

/// Momentum index `P` (momentum `2πP/L`) and charge `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SectorLabel {
    pub p: usize,
    pub q: usize,
}

/// Orthonormal orbit basis of one sector, each vector sparse.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub label: SectorLabel,
    pub vectors: Vec<Vec<(usize, C64)>>,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// `Σ_a w_a |v_a⟩`
    pub fn lift(&self, w: &StateVector, dim: usize) -> StateVector {
        let mut out = StateVector::zeros(dim);
        let o = out.amplitudes_mut();
        for (v, &c) in self.vectors.iter().zip(w.amplitudes()) {
            for &(i, x) in v {
                o[i] += x * c;
            }
        }
        out
    }

    /// Coordinates `⟨v_a|ψ⟩`.
    pub fn project(&self, psi: &StateVector) -> StateVector {
        let amps = psi.amplitudes();
        StateVector::from_vec(self.vectors.iter().map(|v| v.iter().map(|&(i, x)| x.conj() * amps[i]).sum()).collect())
    }
}

fn index_maps(chain: &ClockChain) -> (Vec<usize>, Vec<usize>) {
    let layout = chain.layout();
    let (n, l) = (chain.n(), chain.l());
    let dim = chain.dim();
    let mut t = vec![0; dim];
    let mut r = vec![0; dim];
    for (idx, (ti, ri)) in t.iter_mut().zip(r.iter_mut()).enumerate() {
        let d = layout.digits(idx);
        let moved: Vec<usize> = (0..l).map(|s| d[(s + l - 1) % l]).collect();
        *ti = layout.index_of(&moved);
        let shifted: Vec<usize> = d.iter().map(|&x| (x + n - 1) % n).collect();
        *ri = layout.index_of(&shifted);
    }
    (t, r)
}

/// Orbit bases of every `(P, Q)` sector of translation `T` and charge `r`, in label order.
pub fn sector_bases(chain: &ClockChain) -> Result<Vec<SectorBasis>> {
    chain.check_state_capacity("sector bases")?;
    let (n, l, dim) = (chain.n(), chain.l(), chain.dim());
    let (tmap, rmap) = index_maps(chain);
    let mut seen = vec![false; dim];
    let mut bases: Vec<SectorBasis> = (0..l)
        .flat_map(|p| (0..n).map(move |q| SectorBasis { label: SectorLabel { p, q }, vectors: Vec::new() }))
        .collect();
    for rep in 0..dim {
        if seen[rep] {
            continue;
        }
        // images[j][k] = T^j r^k |rep⟩
        let mut images = vec![vec![0usize; n]; l];
        let mut cur = rep;
        for k in 0..n {
            let mut c = cur;
            for row in images.iter_mut() {
                row[k] = c;
                seen[c] = true;
                c = tmap[c];
            }
            cur = rmap[cur];
        }
        for basis in bases.iter_mut() {
            let SectorLabel { p, q } = basis.label;
            let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
            for (j, row) in images.iter().enumerate() {
                let phase_t = C64::from_polar(1.0, -2.0 * PI * (p * j) as f64 / l as f64);
                for (k, &idx) in row.iter().enumerate() {
                    *acc.entry(idx).or_insert(ZERO) += phase_t * omega_pow(n, -((q * k) as i64));
                }
            }
            let norm = acc.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                basis.vectors.push(acc.into_iter().map(|(i, c)| (i, c / norm)).collect());
            }
        }
    }
    Ok(bases)
}

/// Dense projector `(1/LN) Σ_{j,k} e^{−iPj} ω^{−Qk} T^j r^k`.
pub fn sector_projector(chain: &ClockChain, label: SectorLabel) -> Result<DenseOperator> {
    let (n, l) = (chain.n(), chain.l());
    chain.densify("sector projector", |v| {
        let mut out = StateVector::zeros(v.dim());
        let mut rv = v.clone();
        for k in 0..n {
            let mut tv = rv.clone();
            for j in 0..l {
                let phase = C64::from_polar(1.0 / (l * n) as f64, -2.0 * PI * (label.p * j) as f64 / l as f64)
                    * omega_pow(n, -((label.q * k) as i64));
                out.axpy(phase, &tv);
                tv = chain.apply_translation(1, &tv)?;
            }
            rv = chain.apply_charge(1, &rv)?;
        }
        Ok(out)
    })
}

/// Spectrum of one sector block.
#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    pub label: SectorLabel,
    pub eigh: Eigh,
}

fn check_symmetric(chain: &ClockChain, h: &SparseOperator, tol: f64) -> Result<()> {
    let (tmap, rmap) = index_maps(chain);
    let scale = (0..h.dim()).flat_map(|j| h.column(j).iter().map(|e| e.1.norm())).fold(0.0, f64::max).max(1.0);
    for (name, map) in [("translation", &tmap), ("charge", &rmap)] {
        for j in 0..h.dim() {
            for &(i, v) in h.column(j) {
                if (h.get(map[i], map[j]) - v).norm() > tol * scale {
                    return Err(Error::contract(format!("Hamiltonian does not commute with {name}")));
                }
            }
            if h.column(j).len() != h.column(map[j]).len() {
                return Err(Error::contract(format!("Hamiltonian does not commute with {name}")));
            }
        }
    }
    Ok(())
}

/// Block-diagonalizes `h` over the `(P, Q)` sectors; blocks are returned in label order
/// and omit empty sectors.
pub fn sector_decompose(chain: &ClockChain, h: &SparseOperator) -> Result<Vec<SectorSpectrum>> {
    if h.dim() != chain.dim() {
        return Err(Error::contract(format!("operator has dimension {}, chain needs {}", h.dim(), chain.dim())));
    }
    check_symmetric(chain, h, 1e-9)?;
    let bases = sector_bases(chain)?;
    sector_decompose_with(chain, h, &bases)
}

fn sector_decompose_with(chain: &ClockChain, h: &SparseOperator, bases: &[SectorBasis]) -> Result<Vec<SectorSpectrum>> {
    let dim = chain.dim();
    let mut owner: Vec<(usize, C64)> = vec![(usize::MAX, ZERO); dim];
    let mut out = Vec::new();
    let mut scratch = vec![ZERO; dim];
    let mut touched: Vec<usize> = Vec::new();
    for basis in bases.iter().filter(|b| b.dim() > 0) {
        for (a, v) in basis.vectors.iter().enumerate() {
            for &(i, c) in v {
                owner[i] = (a, c);
            }
        }
        let m = basis.dim();
        let mut block = DenseOperator::zeros(m);
        for (b, v) in basis.vectors.iter().enumerate() {
            for &(j, c) in v {
                for &(i, x) in h.column(j) {
                    if scratch[i] == ZERO {
                        touched.push(i);
                    }
                    scratch[i] += x * c;
                }
            }
            for &i in &touched {
                let (a, c) = owner[i];
                if a != usize::MAX {
                    block.set(a, b, block.get(a, b) + c.conj() * scratch[i]);
                }
                scratch[i] = ZERO;
            }
            touched.clear();
        }
        for v in &basis.vectors {
            for &(i, _) in v {
                owner[i] = (usize::MAX, ZERO);
            }
        }
        // symmetrize away rounding before the Hermitian solver
        let block = (&block + &block.adjoint()).scale(C64::new(0.5, 0.0));
        out.push(SectorSpectrum { label: basis.label, eigh: eigh(&block)? });
    }
    Ok(out)
}

/// Dense entry point: checks `[H, T] = [H, r] = 0` and decomposes.
pub fn sector_decompose_dense(chain: &ClockChain, h: &DenseOperator) -> Result<Vec<SectorSpectrum>> {
    sector_decompose(chain, &SparseOperator::from_dense(h, 0.0))
}

/// Ground-state data assembled from sector spectra.
#[derive(Debug, Clone)]
pub struct GroundSpace {
    pub energy: f64,
    pub multiplicity: usize,
    pub gap: f64,
    pub sector: SectorLabel,
    /// Ground-space eigenvectors lifted to the full space.
    pub vectors: Vec<StateVector>,
}

pub fn ground_space(chain: &ClockChain, bases: &[SectorBasis], spectra: &[SectorSpectrum], degeneracy: f64) -> Result<GroundSpace> {
    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    for (s, sp) in spectra.iter().enumerate() {
        all.extend(sp.eigh.values.iter().enumerate().map(|(k, &e)| (e, s, k)));
    }
    if all.is_empty() {
        return Err(Error::numeric("empty spectrum"));
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let e0 = all[0].0;
    let thr = degeneracy * e0.abs().max(1.0);
    let g = all.iter().take_while(|x| x.0 - e0 <= thr).count();
    let gap = all.get(g).map(|x| x.0 - e0).unwrap_or(0.0);
    let sector = all[..g].iter().map(|x| spectra[x.1].label).min().expect("nonempty");
    let mut vectors = Vec::with_capacity(g);
    for &(_, s, k) in &all[..g] {
        let basis = bases.iter().find(|b| b.label == spectra[s].label).expect("basis for every spectrum");
        vectors.push(basis.lift(&spectra[s].eigh.vector(k), chain.dim()));
    }
    Ok(GroundSpace { energy: e0, multiplicity: g, gap, sector, vectors })
}

/// `Σ_i |⟨g_i|φ⟩|²` for normalized `φ`.
pub fn ground_overlap(ground: &GroundSpace, phi: &StateVector) -> f64 {
    ground.vectors.iter().map(|g| g.inner(phi).norm_sqr()).sum::<f64>() / phi.inner(phi).re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Ground,
    SectorGround,
    Excited,
}

/// Where a skeleton state sits in the finite-`L` spectrum of its Hamiltonian.
///
/// `GROUND` is a finite-size proxy for membership of the gapped region.
#[derive(Debug, Clone, Serialize)]
pub struct GroundCheck {
    pub verdict: Verdict,
    pub state_energy: f64,
    pub ground_energy: f64,
    pub ground_multiplicity: usize,
    pub gap: f64,
    pub overlap: f64,
    pub sector: Option<SectorLabel>,
    pub sector_minimum: Option<f64>,
}

pub fn ground_state_check(spec: &SkeletonSpec, branch: usize, tolerance: f64) -> Result<GroundCheck> {
    let chain = spec.chain();
    let base = fixed_point_state(chain, spec.p(), spec.sign(), branch)?;
    let phi = skeleton_eigenstate(spec, &base)?;
    let mut gens = SparseGenerators::new(chain.clone())?;
    let h = gens.hamiltonian(&spec.hamiltonian()?)?;
    let bases = sector_bases(chain)?;
    let spectra = sector_decompose_with(chain, &h, &bases)?;
    let degeneracy = chain.policy().degeneracy;
    let ground = ground_space(chain, &bases, &spectra, degeneracy)?;
    let overlap = ground_overlap(&ground, &phi.state);

    let mut sector = None;
    let mut sector_minimum = None;
    for (basis, sp) in bases.iter().filter(|b| b.dim() > 0).zip(&spectra) {
        let weight = basis.project(&phi.state).norm();
        if weight >= 1.0 - 1e-8 {
            sector = Some(basis.label);
            sector_minimum = sp.eigh.values.first().copied();
        }
    }
    let thr = degeneracy * ground.energy.abs().max(1.0);
    let verdict = if overlap >= 1.0 - tolerance {
        Verdict::Ground
    } else if sector_minimum.is_some_and(|m| (phi.eigenvalue - m).abs() <= thr) {
        Verdict::SectorGround
    } else {
        Verdict::Excited
    };
    Ok(GroundCheck {
        verdict,
        state_energy: phi.eigenvalue,
        ground_energy: ground.energy,
        ground_multiplicity: ground.multiplicity,
        gap: ground.gap,
        overlap,
        sector,
        sector_minimum,
    })
}

/// Coupling grid for [`gap_scan`].
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `H = αA_0 + βA_1 + γA_2` with `α + β + γ = 1` on a triangular lattice of the given resolution.
    Simplex { resolution: usize },
    /// Explicit polynomials.
    Points(Vec<LaurentPoly>),
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<LaurentPoly>> {
        match self {
            GridSpec::Points(p) => Ok(p.clone()),
            GridSpec::Simplex { resolution } => {
                let r = *resolution;
                if r == 0 {
                    return Err(Error::domain("simplex resolution must be positive"));
                }
                let mut out = Vec::new();
                for i in 0..=r {
                    for j in 0..=r - i {
                        let (a, b) = (i as f64 / r as f64, j as f64 / r as f64);
                        let c = (r - i - j) as f64 / r as f64;
                        out.push(LaurentPoly::from_terms(&[(0, a), (1, b), (2, c)])?);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// One grid point at one chain size.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub n: usize,
    pub l: usize,
    pub couplings: BTreeMap<i64, f64>,
    pub ground_energy: Option<f64>,
    pub gap: Option<f64>,
    pub winding: Option<i64>,
    pub skeleton_overlap: Option<f64>,
    pub b_singular: bool,
    pub sector: Option<SectorLabel>,
    pub error: Option<String>,
}

fn scan_point(gens: &mut SparseGenerators, bases: &[SectorBasis], f: &LaurentPoly, rec: &mut SweepRecord) -> Result<()> {
    let chain = gens.chain().clone();
    rec.winding = winding_number(f).ok();
    let h = gens.hamiltonian(f)?;
    let spectra = sector_decompose_with(&chain, &h, bases)?;
    let ground = ground_space(&chain, bases, &spectra, chain.policy().degeneracy)?;
    rec.ground_energy = Some(ground.energy);
    rec.gap = Some(ground.gap.max(0.0));
    rec.sector = Some(ground.sector);
    if let Some(fac) = factor_square(f) {
        match SkeletonSpec::from_factorization(chain.clone(), &fac) {
            Ok(spec) => {
                let base = fixed_point_state(&chain, spec.p(), spec.sign(), 0)?;
                let phi = skeleton_eigenstate(&spec, &base)?;
                rec.skeleton_overlap = Some(ground_overlap(&ground, &phi.state));
            }
            Err(Error::Singular { .. }) => rec.b_singular = true,
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Per-point ED diagnostics over a grid, in grid order for each size in turn.
/// Failures are recorded in the record, never propagated.
pub fn gap_scan(n: usize, sizes: &[usize], grid: &GridSpec, policy: NumericPolicy) -> Result<Vec<SweepRecord>> {
    let points = grid.points()?;
    let mut out = Vec::with_capacity(points.len() * sizes.len());
    for &l in sizes {
        let setup = ClockChain::with_policy(n, l, policy).and_then(|chain| {
            let bases = sector_bases(&chain)?;
            Ok((SparseGenerators::new(chain)?, bases))
        });
        let (mut gens, bases) = match setup {
            Ok(s) => (Some(s.0), s.1),
            Err(e) => {
                for f in &points {
                    let mut rec = empty_record(n, l, f);
                    rec.error = Some(e.to_string());
                    out.push(rec);
                }
                (None, Vec::new())
            }
        };
        let Some(gens) = gens.as_mut() else { continue };
        for f in &points {
            let mut rec = empty_record(n, l, f);
            if let Err(e) = scan_point(gens, &bases, f, &mut rec) {
                rec.error = Some(e.to_string());
            }
            out.push(rec);
        }
    }
    Ok(out)
}

fn empty_record(n: usize, l: usize, f: &LaurentPoly) -> SweepRecord {
    SweepRecord {
        n,
        l,
        couplings: f.terms().collect(),
        ground_energy: None,
        gap: None,
        winding: None,
        skeleton_overlap: None,
        b_singular: false,
        sector: None,
        error: None,
    }
}

/// Energy-density error of the truncated skeleton states `|φ_D⟩` against ED, with the analytic bound.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxRow {
    pub d: usize,
    pub g: Vec<f64>,
    pub sign: i8,
    pub p: i64,
    pub s: Vec<f64>,
    pub bound: f64,
    pub energy_density: f64,
    pub exact_density: f64,
    pub error: f64,
}

/// Rows for `D = 1..=d_max` on one chain; the reference is the ED ground-state density of `H_A`.
pub fn approximation_scan(chain: &ClockChain, f: &LaurentPoly, d_max: usize) -> Result<Vec<ApproxRow>> {
    winding_number(f)?;
    let l = chain.l() as f64;
    let mut gens = SparseGenerators::new(chain.clone())?;
    let h = gens.hamiltonian(f)?;
    let bases = sector_bases(chain)?;
    let spectra = sector_decompose_with(chain, &h, &bases)?;
    let exact = ground_space(chain, &bases, &spectra, chain.policy().degeneracy)?.energy / l;
    let mut rows = Vec::with_capacity(d_max);
    for d in 1..=d_max {
        let report = crate::laurent::sqrt_truncate(f, d)?;
        let bound = crate::laurent::truncation_error_bound(&report, chain.n())?;
        let fac = report.skeleton()?;
        let spec = SkeletonSpec::from_factorization(chain.clone(), &fac)?;
        let base = fixed_point_state(chain, spec.p(), spec.sign(), 0)?;
        let phi = skeleton_eigenstate(&spec, &base)?;
        let e = h.apply(&phi.state);
        let density = phi.state.inner(&e).re / l;
        rows.push(ApproxRow {
            d,
            g: report.g.clone(),
            sign: fac.sign,
            p: fac.p,
            s: fac.s,
            bound,
            energy_density: density,
            exact_density: exact,
            error: (density - exact).abs(),
        });
    }
    Ok(rows)
}

pub const SWEEP_HEADER: [&str; 10] =
    ["N", "L", "t_coeffs_json", "ground_energy", "gap", "winding", "skeleton_overlap", "b_singular", "P", "Q"];

fn fmt17(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// Writes records as CSV with the fixed header; floats carry 17 significant digits.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::numeric(format!("writing CSV: {e}"));
    wr.write_record(SWEEP_HEADER).map_err(io)?;
    for r in records {
        let coeffs: BTreeMap<String, f64> = r.couplings.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let json = serde_json::to_string(&coeffs).map_err(|e| Error::numeric(format!("serializing couplings: {e}")))?;
        wr.write_record([
            r.n.to_string(),
            r.l.to_string(),
            json,
            fmt17(r.ground_energy),
            fmt17(r.gap),
            r.winding.map(|w| w.to_string()).unwrap_or_default(),
            fmt17(r.skeleton_overlap),
            r.b_singular.to_string(),
            r.sector.map(|s| s.p.to_string()).unwrap_or_default(),
            r.sector.map(|s| s.q.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    wr.flush().map_err(|e| Error::numeric(format!("writing CSV: {e}")))?;
    Ok(())
}
