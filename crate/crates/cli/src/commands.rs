use onsager_skeleton::clock::{verify_onsager, ClockChain, GeneratorCache};
use onsager_skeleton::ed::{
    approximation_scan, gap_scan, ground_state_check, write_sweep_csv, GridSpec, SweepRecord,
};
use onsager_skeleton::laurent::{r_alpha, schur_cohn_bk, LaurentPoly};
use onsager_skeleton::linalg::C64;
use onsager_skeleton::mps::{mps_d1, Closure};
use onsager_skeleton::observables::{
    dense_two_point_string, disorder_finite_l, disorder_thermo, disorder_transfer,
};
use onsager_skeleton::skeleton::{excited_state, fixed_point_state, skeleton_eigenstate, SkeletonSpec};
use onsager_skeleton::{Error, NumericPolicy};
use serde_json::{json, Value};

use crate::config::{field_error, ConfigError, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

pub enum Payload {
    Json(Value),
    Csv(Vec<u8>),
}

/// A finished command: what to write and the exit status it earned.
pub struct Outcome {
    pub payload: Payload,
    pub status: i32,
}

pub enum Failure {
    Config(ConfigError),
    Lib(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_CAPACITY: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

pub fn exit_code(f: &Failure) -> i32 {
    match f {
        Failure::Config(_) => EXIT_REJECTED,
        Failure::Lib(Error::Capacity { .. }) => EXIT_CAPACITY,
        Failure::Lib(Error::Singular { .. }) => EXIT_SINGULAR,
        Failure::Lib(Error::Numeric(_)) => EXIT_FAILED,
        Failure::Lib(_) => EXIT_REJECTED,
    }
}

fn report(command: &str, policy: &NumericPolicy, body: Value) -> Value {
    let mut out = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "policy": policy,
    });
    if let (Value::Object(o), Value::Object(b)) = (&mut out, body) {
        o.extend(b);
    }
    out
}

fn cx(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn status(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

pub fn verify_algebra(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let n = cfg.n()?;
    let ls = cfg.lengths()?;
    let k_max = cfg.k_max.unwrap_or(2);
    if k_max < 1 {
        return Err(field_error("k_max", "must be at least 1").into());
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for l in ls {
        let chain = ClockChain::with_policy(n, l, cfg.policy)?;
        let rep = verify_onsager(&GeneratorCache::new(chain), k_max)?;
        let pass = rep.max() <= cfg.policy.algebra;
        ok &= pass;
        rows.push(json!({ "residuals": rep, "max": rep.max(), "pass": pass }));
    }
    Ok(Outcome {
        payload: Payload::Json(report("verify-algebra", &cfg.policy, json!({ "n": n, "k_max": k_max, "chains": rows }))),
        status: status(ok),
    })
}

pub fn eigenstate(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let n = cfg.n()?;
    let ls = cfg.lengths()?;
    let (sign, p, s) = cfg.skeleton()?;
    let branch = cfg.branch.unwrap_or(0);
    if branch >= n {
        return Err(field_error("branch", format!("must lie in 0..{n}")).into());
    }
    let mut rows = Vec::new();
    let mut ok = true;
    let mut head = Value::Null;
    for l in ls {
        let chain = ClockChain::with_policy(n, l, cfg.policy)?;
        let spec = SkeletonSpec::new(chain.clone(), sign, p, s.clone())?;
        if head.is_null() {
            head = json!({
                "b": spec.b(),
                "beta": spec.beta().into_iter().map(cx).collect::<Vec<_>>(),
                "r_alpha": spec.r().pairs().collect::<Vec<_>>(),
                "hamiltonian": spec.hamiltonian()?.terms().collect::<Vec<_>>(),
            });
        }
        let base = fixed_point_state(&chain, p, sign, branch)?;
        let phi = skeleton_eigenstate(&spec, &base)?;
        ok &= phi.residual <= cfg.policy.residual;
        let ground = if chain.dim() <= cfg.policy.max_matrix_dim {
            Some(ground_state_check(&spec, branch, cfg.policy.residual)?)
        } else {
            None
        };
        let mut excited = Vec::new();
        if p.rem_euclid(2) == 0 {
            for m in 0..l {
                let ex = excited_state(&spec, m)?;
                let t = ex.state.inner(&chain.apply_translation(1, &ex.state)?);
                ok &= ex.residual <= cfg.policy.residual;
                excited.push(json!({
                    "momentum_index": m,
                    "eigenvalue": ex.eigenvalue,
                    "residual": ex.residual,
                    "translation_eigenvalue": cx(t),
                }));
            }
        }
        rows.push(json!({
            "l": l,
            "eigenvalue": phi.eigenvalue,
            "residual": phi.residual,
            "ground_check": ground,
            "excited": excited,
        }));
    }
    let mut body = json!({ "n": n, "sign": sign, "p": p, "s": s, "branch": branch, "chains": rows });
    if let (Value::Object(b), Value::Object(h)) = (&mut body, head) {
        b.extend(h);
    }
    Ok(Outcome { payload: Payload::Json(report("eigenstate", &cfg.policy, body)), status: status(ok) })
}

pub fn sweep(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let n = cfg.n()?;
    let ls = cfg.lengths()?;
    let grid = match (&cfg.points, cfg.resolution) {
        (Some(_), Some(_)) => return Err(field_error("points", "give either points or resolution, not both").into()),
        (Some(pts), None) => {
            let min_deg = cfg.min_deg.unwrap_or(0);
            let polys = pts
                .iter()
                .map(|c| LaurentPoly::new(min_deg, c.clone()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| field_error("points", e))?;
            GridSpec::Points(polys)
        }
        (None, Some(r)) if r > 0 => GridSpec::Simplex { resolution: r },
        (None, Some(_)) => return Err(field_error("resolution", "must be positive").into()),
        (None, None) => return Err(field_error("resolution", "required (or points)").into()),
    };
    let records: Vec<SweepRecord> = gap_scan(n, &ls, &grid, cfg.policy)?;
    for r in records.iter().filter(|r| r.error.is_some()) {
        eprintln!("point {:?} at L={}: {}", r.couplings, r.l, r.error.as_deref().unwrap_or(""));
    }
    let all_failed = !records.is_empty() && records.iter().all(|r| r.error.is_some());
    let mut buf = Vec::new();
    write_sweep_csv(&records, &mut buf)?;
    Ok(Outcome { payload: Payload::Csv(buf), status: status(!all_failed) })
}

pub fn disorder(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let n = cfg.n()?;
    let a_list = cfg.a.clone().unwrap_or_else(|| (1..=9).map(|k| k as f64 / 10.0).collect());
    let ls = cfg.l.clone().unwrap_or_else(|| (4..=24).collect());
    if ls.iter().any(|&l| l < 2) {
        return Err(field_error("l", "finite chain lengths must be at least 2").into());
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for &a in &a_list {
        let thermo = disorder_thermo(n, a)?;
        let closed = (1.0 - a * a).sqrt();
        let rate = disorder_transfer(n, a)?.rate();
        let mut finite = Vec::new();
        let mut max_dev: f64 = 0.0;
        for &l in &ls {
            let v = disorder_finite_l(n, a, l)?;
            max_dev = max_dev.max((v - thermo).abs());
            finite.push(json!({ "l": l, "value": v }));
        }
        // dense check of the two-point string, only for small N = 2 rings
        let mut dense = Vec::new();
        if n == 2 {
            for &l in ls.iter().filter(|&&l| l % 2 == 0 && l <= 12) {
                let v = dense_two_point_string(n, l, a)?;
                let bound = rate.powi(l as i32 / 2);
                let within = (v - thermo * thermo).abs() <= bound;
                ok &= within;
                dense.push(json!({ "l": l, "two_point": v, "thermo_squared": thermo * thermo, "bound": bound, "within": within }));
            }
        }
        ok &= (thermo - closed).abs() <= 1e-12;
        rows.push(json!({
            "a": a,
            "finite": finite,
            "thermodynamic": thermo,
            "closed_form": closed,
            "rate": rate,
            "max_finite_deviation": max_dev,
            "dense_two_point": dense,
        }));
    }
    Ok(Outcome {
        payload: Payload::Json(report("disorder", &cfg.policy, json!({ "n": n, "rows": rows }))),
        status: status(ok),
    })
}

pub fn approx(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let n = cfg.n()?;
    let ls = cfg.lengths()?;
    let f = cfg.polynomial()?;
    let d = cfg.d.unwrap_or(6);
    if d == 0 {
        return Err(field_error("d", "must be at least 1").into());
    }
    let mut chains = Vec::new();
    let mut ok = true;
    for l in ls {
        let chain = ClockChain::with_policy(n, l, cfg.policy)?;
        let rows = approximation_scan(&chain, &f, d)?;
        ok &= rows.iter().all(|r| r.error <= r.bound);
        chains.push(json!({ "l": l, "rows": rows }));
    }
    Ok(Outcome {
        payload: Payload::Json(report(
            "approx",
            &cfg.policy,
            json!({ "n": n, "f": { "min_deg": f.min_deg(), "coeffs": f.coeffs() }, "chains": chains }),
        )),
        status: status(ok),
    })
}

pub fn bk(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let s = cfg.s_list()?;
    let list = schur_cohn_bk(&s)?;
    Ok(Outcome {
        payload: Payload::Json(report("bk", &cfg.policy, json!({ "s": s, "b": list.b, "singular": list.singular }))),
        status: EXIT_OK,
    })
}

pub fn ralpha(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let s = cfg.s_list()?;
    let r = r_alpha(&s)?;
    let pairs: Vec<(i64, f64)> = r.pairs().collect();
    Ok(Outcome {
        payload: Payload::Json(report("ralpha", &cfg.policy, json!({ "s": s, "d": r.d, "r_alpha": pairs }))),
        status: EXIT_OK,
    })
}

pub fn mps_export(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let n = cfg.n()?;
    let ls = cfg.lengths()?;
    let [l] = ls[..] else {
        return Err(field_error("l", "mps-export takes exactly one chain length").into());
    };
    let a = match cfg.a.as_deref() {
        Some([a]) => *a,
        _ => return Err(field_error("a", "mps-export takes exactly one coupling").into()),
    };
    let mps = mps_d1(n, l, a)?;
    let sites: Vec<Value> = mps
        .tensors
        .iter()
        .map(|t| {
            json!({
                "physical_dim": t.physical_dim,
                "left_dim": t.left_dim,
                "right_dim": t.right_dim,
                "re": t.data().iter().map(|z| z.re).collect::<Vec<_>>(),
                "im": t.data().iter().map(|z| z.im).collect::<Vec<_>>(),
            })
        })
        .collect();
    let closure = match mps.closure {
        Closure::Trace => "trace",
        Closure::Boundary { .. } => "boundary",
    };
    Ok(Outcome {
        payload: Payload::Json(json!({
            "schema_version": SCHEMA_VERSION,
            "N": n,
            "L": l,
            "a": a,
            "closure": closure,
            "layout": "row-major (physical, left, right)",
            "sites": sites,
        })),
        status: EXIT_OK,
    })
}
