//! One-sided, two-sided and multipartite correlation quantifiers via nested
//! max-then-min optimization over parameterized local bases, together with
//! the brute-force grid oracle, bounds and witnesses.
//!
//! The inner stage maximizes the summed absolute imaginary weak-value terms
//! over all product postselection bases; the outer stage then minimizes over
//! the local measurement bases. The order is fixed: swapping the two stages
//! collapses the quantity to zero.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::bases::{
    canonicalize_qubit_angles, param_len, params_for_basis, qubit_kets_raw, BasisParams,
    OrthonormalBasis, ProductBasis,
};
use crate::error::{Error, Result};
use crate::operator::{
    hermitian_eig, tensor, DensityMatrix, Operator, PureState,
};
use crate::optimize::{halton_point, multistart_minimize, SimplexOptions};

/// Multi-start search budget and tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub inner_restarts: usize,
    pub outer_restarts: usize,
    /// Simplex size and function-value stall tolerance.
    pub tol: f64,
    /// Iteration cap per simplex run.
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            inner_restarts: 32,
            outer_restarts: 16,
            tol: 1e-6,
            max_iterations: 2000,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inner_restarts < 1 || self.outer_restarts < 1 {
            return Err(Error::InvalidConfig {
                detail: "restarts must be at least 1",
            });
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig {
                detail: "tol must be positive",
            });
        }
        Ok(())
    }

    /// Reduced budget for bulk property sweeps.
    pub fn light(seed: u64) -> Self {
        Self {
            inner_restarts: 10,
            outer_restarts: 6,
            tol: 1e-6,
            max_iterations: 1200,
            seed,
        }
    }

    fn simplex_options(&self) -> SimplexOptions {
        SimplexOptions {
            max_iterations: self.max_iterations,
            ftol: self.tol,
            xtol: self.tol,
        }
    }
}

/// Optimal value with the bases that achieve it and search diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub value: f64,
    /// Measurement basis parameters, one entry per measured party.
    pub measurement_params: Vec<BasisParams>,
    /// Postselection basis parameters, one entry per party.
    pub postselection_params: Vec<BasisParams>,
    /// max - min over the outer restart optima.
    pub restart_spread: f64,
    /// Total inner-objective evaluations.
    pub evaluations: u64,
}

/// Upper bounds accompanying a quantifier value.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub w_value: f64,
    pub uncertainty_bound: f64,
    pub tsallis_bound: f64,
    /// Present for two-sided bipartite runs.
    pub l1_bound: Option<f64>,
    /// Present for pure bipartite one-sided runs.
    pub witness_pure: Option<f64>,
}

// ---------------------------------------------------------------------------
// Parameter layout over parties
// ---------------------------------------------------------------------------

fn coordinate_ranges(dims: &[usize], parties: &[usize]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &p in parties {
        match dims[p] {
            0 | 1 => {}
            2 => {
                out.push((0.0, std::f64::consts::PI));
                out.push((0.0, 2.0 * std::f64::consts::PI));
            }
            d => {
                for _ in 0..d * d {
                    out.push((-1.5, 1.5));
                }
            }
        }
    }
    out
}

fn coordinate_steps(dims: &[usize], parties: &[usize]) -> Vec<f64> {
    let mut out = Vec::new();
    for &p in parties {
        match dims[p] {
            0 | 1 => {}
            2 => {
                out.push(0.7);
                out.push(1.3);
            }
            d => {
                for _ in 0..d * d {
                    out.push(0.5);
                }
            }
        }
    }
    out
}

fn split_params<'a>(params: &'a [f64], dims: &[usize], parties: &[usize]) -> Vec<&'a [f64]> {
    let mut out = Vec::with_capacity(parties.len());
    let mut at = 0;
    for &p in parties {
        let len = param_len(dims[p]);
        out.push(&params[at..at + len]);
        at += len;
    }
    out
}

fn params_to_basis_params(params: &[f64], dims: &[usize], parties: &[usize]) -> Vec<BasisParams> {
    split_params(params, dims, parties)
        .into_iter()
        .zip(parties)
        .map(|(chunk, &p)| {
            let d = dims[p];
            if d == 2 {
                let (a, b) = canonicalize_qubit_angles(chunk[0], chunk[1]);
                BasisParams::new(2, vec![a, b]).unwrap()
            } else {
                BasisParams::new(d, chunk.to_vec()).unwrap()
            }
        })
        .collect()
}

fn halton_offset(seed: u64, stream: u64) -> u64 {
    1 + (seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)) % 65536
}

/// Special starting points followed by Halton points, `count` in total.
fn build_starts(
    special: &[Vec<f64>],
    count: usize,
    ranges: &[(f64, f64)],
    offset: u64,
) -> Vec<Vec<f64>> {
    let mut starts = Vec::with_capacity(count);
    for s in special.iter().take(count) {
        starts.push(s.clone());
    }
    let mut index = 0u64;
    while starts.len() < count {
        let unit = halton_point(offset + index, ranges.len());
        starts.push(
            unit.iter()
                .zip(ranges)
                .map(|(u, (lo, hi))| lo + u * (hi - lo))
                .collect(),
        );
        index += 1;
    }
    starts
}

fn computational_params(dims: &[usize], parties: &[usize]) -> Vec<f64> {
    let mut out = Vec::new();
    for &p in parties {
        out.extend(std::iter::repeat(0.0).take(param_len(dims[p])));
    }
    out
}

fn fourier_params(dims: &[usize], parties: &[usize]) -> Vec<f64> {
    let mut out = Vec::new();
    for &p in parties {
        let d = dims[p];
        if d == 2 {
            out.push(std::f64::consts::FRAC_PI_2);
            out.push(0.0);
        } else if d >= 3 {
            out.extend(
                params_for_basis(&OrthonormalBasis::fourier(d))
                    .values()
                    .iter()
                    .copied(),
            );
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Inner objective
// ---------------------------------------------------------------------------

/// Per-measurement-candidate precomputation: one matrix (Pi_emb * rho) per
/// measurement outcome, stored flat.
struct InnerProblem {
    m_ops: Vec<Vec<C64>>,
    n: usize,
    dims: Vec<usize>,
}

/// Reusable buffers for one evaluation stream.
struct PostScratch {
    /// Per party, d kets of d amplitudes, kets consecutive.
    kets: Vec<Vec<C64>>,
    buf_a: Vec<C64>,
    buf_b: Vec<C64>,
    combo: Vec<usize>,
}

impl PostScratch {
    fn new(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Self {
            kets: dims.iter().map(|&d| vec![C64::ZERO; d * d]).collect(),
            buf_a: vec![C64::ZERO; n],
            buf_b: vec![C64::ZERO; n],
            combo: vec![0; dims.len()],
        }
    }
}

#[inline]
fn quad_im(m: &[C64], phi: &[C64], n: usize) -> f64 {
    let mut acc = C64::ZERO;
    for i in 0..n {
        let ci = phi[i].conj();
        if ci.re == 0.0 && ci.im == 0.0 {
            continue;
        }
        let row = &m[i * n..(i + 1) * n];
        let mut s = C64::ZERO;
        for (j, &mij) in row.iter().enumerate() {
            s += mij * phi[j];
        }
        acc += ci * s;
    }
    acc.im
}

fn fill_local_kets(d: usize, params: &[f64], out: &mut [C64]) {
    match d {
        1 => out[0] = C64::ONE,
        2 => {
            let kets = qubit_kets_raw(params[0], params[1]);
            out[0] = kets[0][0];
            out[1] = kets[0][1];
            out[2] = kets[1][0];
            out[3] = kets[1][1];
        }
        _ => {
            let u = crate::bases::unitary_from_hermitian_params(d, params);
            for k in 0..d {
                for i in 0..d {
                    out[k * d + i] = u.entry(i, k);
                }
            }
        }
    }
}

impl InnerProblem {
    /// Build from raw measurement kets per measured party (kets consecutive,
    /// d*d amplitudes per party).
    fn from_meas_kets(rho: &DensityMatrix, meas_kets: &[Vec<C64>], measured: &[usize]) -> Self {
        let dims = rho.dims().to_vec();
        let outcome_dims: Vec<usize> = measured.iter().map(|&p| dims[p]).collect();
        let outcomes: usize = outcome_dims.iter().product();
        let mut m_ops = Vec::with_capacity(outcomes);
        for o in 0..outcomes {
            // Decode the outcome into per-measured-party ket indices.
            let mut idx = o;
            let mut kidx = vec![0usize; measured.len()];
            for s in (0..measured.len()).rev() {
                kidx[s] = idx % outcome_dims[s];
                idx /= outcome_dims[s];
            }
            let mut emb: Option<Operator> = None;
            for (p, &d) in dims.iter().enumerate() {
                let factor = match measured.iter().position(|&mp| mp == p) {
                    Some(s) => {
                        let k = kidx[s];
                        let amps = &meas_kets[s][k * d..(k + 1) * d];
                        Operator::from_fn(&[d], |i, j| amps[i] * amps[j].conj())
                    }
                    None => Operator::identity(&[d]),
                };
                emb = Some(match emb {
                    None => factor,
                    Some(prev) => tensor(&prev, &factor),
                });
            }
            let product = emb.unwrap().matmul(rho.op());
            m_ops.push(product.entries().to_vec());
        }
        Self {
            m_ops,
            n: rho.side(),
            dims,
        }
    }

    fn from_meas_params(rho: &DensityMatrix, meas_params: &[f64], measured: &[usize]) -> Self {
        let dims = rho.dims();
        let chunks = split_params(meas_params, dims, measured);
        let kets: Vec<Vec<C64>> = measured
            .iter()
            .zip(chunks)
            .map(|(&p, chunk)| {
                let d = dims[p];
                let mut out = vec![C64::ZERO; d * d];
                fill_local_kets(d, chunk, &mut out);
                out
            })
            .collect();
        Self::from_meas_kets(rho, &kets, measured)
    }

    /// Objective value for postselection parameters over all parties.
    fn eval_params(&self, params: &[f64], scratch: &mut PostScratch) -> f64 {
        let parties: Vec<usize> = (0..self.dims.len()).collect();
        let chunks = split_params(params, &self.dims, &parties);
        for (p, chunk) in chunks.into_iter().enumerate() {
            fill_local_kets(self.dims[p], chunk, &mut scratch.kets[p]);
        }
        self.eval_from_scratch_kets(scratch)
    }

    /// Objective value using the kets already present in `scratch`.
    fn eval_from_scratch_kets(&self, scratch: &mut PostScratch) -> f64 {
        let parties = self.dims.len();
        scratch.combo.iter_mut().for_each(|c| *c = 0);
        let mut value = 0.0;
        loop {
            // Joint product ket for the current outcome combination.
            let mut len = self.dims[0];
            let k0 = scratch.combo[0];
            scratch.buf_a[..len]
                .copy_from_slice(&scratch.kets[0][k0 * len..(k0 + 1) * len]);
            let mut src_is_a = true;
            for p in 1..parties {
                let d = self.dims[p];
                let kp = scratch.combo[p];
                let local = &scratch.kets[p][kp * d..(kp + 1) * d];
                let (src, dst) = if src_is_a {
                    (&scratch.buf_a, &mut scratch.buf_b)
                } else {
                    (&scratch.buf_b, &mut scratch.buf_a)
                };
                for i in 0..len {
                    let ai = src[i];
                    for (j, &lj) in local.iter().enumerate() {
                        dst[i * d + j] = ai * lj;
                    }
                }
                len *= d;
                src_is_a = !src_is_a;
            }
            let phi = if src_is_a {
                &scratch.buf_a[..len]
            } else {
                &scratch.buf_b[..len]
            };
            for m in &self.m_ops {
                value += quad_im(m, phi, self.n).abs();
            }
            // Odometer over per-party ket indices.
            let mut p = parties;
            loop {
                if p == 0 {
                    return value;
                }
                p -= 1;
                scratch.combo[p] += 1;
                if scratch.combo[p] < self.dims[p] {
                    break;
                }
                scratch.combo[p] = 0;
            }
        }
    }

    /// Objective for validated postselection bases.
    fn eval_bases(&self, post: &ProductBasis) -> f64 {
        let mut scratch = PostScratch::new(&self.dims);
        for (p, local) in post.locals().iter().enumerate() {
            let d = local.dim();
            for k in 0..d {
                let amps = local.ket(k).amplitudes();
                scratch.kets[p][k * d..(k + 1) * d].copy_from_slice(amps);
            }
        }
        self.eval_from_scratch_kets(&mut scratch)
    }

    /// Per-outcome objective contributions for validated bases.
    fn eval_bases_per_outcome(&self, post: &ProductBasis) -> Vec<f64> {
        let kets = post.joint_kets();
        self.m_ops
            .iter()
            .map(|m| {
                kets.iter()
                    .map(|phi| quad_im(m, phi.amplitudes(), self.n).abs())
                    .sum()
            })
            .collect()
    }
}

fn check_measured(dims: &[usize], measured: &[usize]) -> Result<Vec<usize>> {
    if measured.is_empty() {
        return Err(Error::EmptyMeasuredSet);
    }
    let mut m: Vec<usize> = measured.to_vec();
    m.sort_unstable();
    m.dedup();
    for &p in &m {
        if p >= dims.len() {
            return Err(Error::InvalidSubsystem {
                index: p,
                count: dims.len(),
            });
        }
    }
    Ok(m)
}

fn check_meas_bases(
    dims: &[usize],
    meas: &[OrthonormalBasis],
    measured: &[usize],
) -> Result<()> {
    if meas.len() != measured.len() {
        return Err(Error::LengthMismatch {
            expected: measured.len(),
            got: meas.len(),
        });
    }
    for (basis, &p) in meas.iter().zip(measured) {
        if basis.dim() != dims[p] {
            return Err(Error::DimensionMismatch {
                left: basis.dim(),
                right: dims[p],
            });
        }
    }
    Ok(())
}

fn check_post_basis(dims: &[usize], post: &ProductBasis) -> Result<()> {
    let post_dims = post.party_dims();
    if post_dims.len() != dims.len() || post_dims != dims {
        return Err(Error::DimensionMismatch {
            left: post_dims.iter().product(),
            right: dims.iter().product(),
        });
    }
    Ok(())
}

/// Sum over measurement outcomes and joint postselection outcomes of the
/// noncommutativity summand, with measured-party projectors embedded by
/// identity on unmeasured parties.
pub fn objective_inner(
    rho: &DensityMatrix,
    meas: &[OrthonormalBasis],
    post: &ProductBasis,
    measured: &[usize],
) -> Result<f64> {
    let measured = check_measured(rho.dims(), measured)?;
    check_meas_bases(rho.dims(), meas, &measured)?;
    check_post_basis(rho.dims(), post)?;
    let kets: Vec<Vec<C64>> = meas
        .iter()
        .map(|basis| {
            let d = basis.dim();
            let mut out = vec![C64::ZERO; d * d];
            for k in 0..d {
                out[k * d..(k + 1) * d].copy_from_slice(basis.ket(k).amplitudes());
            }
            out
        })
        .collect();
    let problem = InnerProblem::from_meas_kets(rho, &kets, &measured);
    Ok(problem.eval_bases(post))
}

/// Closed-form inner objective for the maximally entangled two-qubit state:
/// measurement angles (theta_a, eta_a), postselection angles per party.
pub fn closed_form_two_qubit_objective(
    theta_a: f64,
    eta_a: f64,
    alpha_a: f64,
    beta_a: f64,
    alpha_b: f64,
    beta_b: f64,
) -> f64 {
    (alpha_a.sin() * alpha_b.sin() * (beta_a + beta_b).sin() * theta_a.cos()
        - alpha_a.cos() * alpha_b.sin() * (beta_b + eta_a).sin() * theta_a.sin()
        - alpha_a.sin() * alpha_b.cos() * (beta_a - eta_a).sin() * theta_a.sin())
    .abs()
}

/// Result of the inner maximization stage.
#[derive(Debug, Clone)]
pub struct PostselectionMax {
    pub value: f64,
    /// Argmax postselection parameters, one entry per party.
    pub params: Vec<BasisParams>,
    pub restart_spread: f64,
    pub evaluations: u64,
}

fn inner_special_starts(problem_dims: &[usize], meas_params: &[f64], measured: &[usize]) -> Vec<Vec<f64>> {
    let all: Vec<usize> = (0..problem_dims.len()).collect();
    let mut mub = Vec::new();
    let meas_chunks = split_params(meas_params, problem_dims, measured);
    for (p, &d) in problem_dims.iter().enumerate() {
        match measured.iter().position(|&mp| mp == p) {
            Some(s) if d == 2 => {
                // Basis mutually unbiased with this party's measurement basis.
                mub.push(meas_chunks[s][0] + std::f64::consts::FRAC_PI_2);
                mub.push(meas_chunks[s][1]);
            }
            _ => {
                if d == 2 {
                    mub.push(std::f64::consts::FRAC_PI_2);
                    mub.push(0.0);
                } else if d >= 3 {
                    mub.extend(
                        params_for_basis(&OrthonormalBasis::fourier(d))
                            .values()
                            .iter()
                            .copied(),
                    );
                }
            }
        }
    }
    vec![
        mub,
        fourier_params(problem_dims, &all),
        computational_params(problem_dims, &all),
    ]
}

fn solve_inner(
    problem: &InnerProblem,
    meas_params: &[f64],
    measured: &[usize],
    cfg: &OptimizerConfig,
) -> (f64, Vec<f64>, f64, u64) {
    let all: Vec<usize> = (0..problem.dims.len()).collect();
    let ranges = coordinate_ranges(&problem.dims, &all);
    let steps = coordinate_steps(&problem.dims, &all);
    let special = inner_special_starts(&problem.dims, meas_params, measured);
    let starts = build_starts(
        &special,
        cfg.inner_restarts,
        &ranges,
        halton_offset(cfg.seed, 1),
    );
    let opts = cfg.simplex_options();
    let outcome = multistart_minimize(
        &|| {
            let mut scratch = PostScratch::new(&problem.dims);
            let problem = problem;
            Box::new(move |x: &[f64]| -problem.eval_params(x, &mut scratch))
        },
        &starts,
        &steps,
        &opts,
    );
    (-outcome.value, outcome.x, outcome.spread, outcome.evaluations)
}

/// Multi-start maximization of the inner objective over all postselection
/// product bases, at a fixed measurement basis.
pub fn max_over_postselection(
    rho: &DensityMatrix,
    meas: &[OrthonormalBasis],
    measured: &[usize],
    cfg: &OptimizerConfig,
) -> Result<PostselectionMax> {
    cfg.validate()?;
    let measured = check_measured(rho.dims(), measured)?;
    check_meas_bases(rho.dims(), meas, &measured)?;
    let dims = rho.dims().to_vec();
    let kets: Vec<Vec<C64>> = meas
        .iter()
        .map(|basis| {
            let d = basis.dim();
            let mut out = vec![C64::ZERO; d * d];
            for k in 0..d {
                out[k * d..(k + 1) * d].copy_from_slice(basis.ket(k).amplitudes());
            }
            out
        })
        .collect();
    let problem = InnerProblem::from_meas_kets(rho, &kets, &measured);
    // Describe the given bases in parameter form for the MUB-partner seed.
    let mut meas_params = Vec::new();
    for basis in meas {
        meas_params.extend(params_for_basis(basis).values().iter().copied());
    }
    let (value, x, spread, evaluations) = solve_inner(&problem, &meas_params, &measured, cfg);
    let all: Vec<usize> = (0..dims.len()).collect();
    Ok(PostselectionMax {
        value,
        params: params_to_basis_params(&x, &dims, &all),
        restart_spread: spread,
        evaluations,
    })
}

fn outer_special_starts(rho: &DensityMatrix, measured: &[usize]) -> Vec<Vec<f64>> {
    let dims = rho.dims();
    let mut eigen = Vec::new();
    for &p in measured {
        let marginal = rho
            .marginal(&[p])
            .expect("marginal of a valid state is valid");
        match hermitian_eig(marginal.op()) {
            Ok(spec) => {
                eigen.extend(params_for_basis(&spec.eigenvectors).values().iter().copied())
            }
            Err(_) => eigen.extend(std::iter::repeat(0.0).take(param_len(dims[p]))),
        }
    }
    vec![
        eigen,
        computational_params(dims, measured),
        fourier_params(dims, measured),
    ]
}

/// Generalized quantifier: weak measurement over the parties in `measured`
/// (identity embedding elsewhere), postselection over the full multi-party
/// product basis, maximization over postselections followed by minimization
/// over measurement bases.
pub fn c_multipartite(
    rho: &DensityMatrix,
    measured: &[usize],
    cfg: &OptimizerConfig,
) -> Result<CorrelationResult> {
    cfg.validate()?;
    let measured = check_measured(rho.dims(), measured)?;
    let dims = rho.dims().to_vec();
    let ranges = coordinate_ranges(&dims, &measured);
    let steps = coordinate_steps(&dims, &measured);
    let special = outer_special_starts(rho, &measured);
    let starts = build_starts(
        &special,
        cfg.outer_restarts,
        &ranges,
        halton_offset(cfg.seed, 2),
    );
    let opts = cfg.simplex_options();
    let inner_evals = AtomicU64::new(0);

    let outcome = multistart_minimize(
        &|| {
            let rho = rho;
            let measured = measured.clone();
            let cfg = cfg.clone();
            let inner_evals = &inner_evals;
            Box::new(move |meas_params: &[f64]| {
                let problem = InnerProblem::from_meas_params(rho, meas_params, &measured);
                let (value, _, _, evals) = solve_inner(&problem, meas_params, &measured, &cfg);
                inner_evals.fetch_add(evals, Ordering::Relaxed);
                value
            })
        },
        &starts,
        &steps,
        &opts,
    );

    // Re-solve the inner stage at the optimal measurement to recover the
    // argmax postselection basis; the search is deterministic, so the value
    // matches the outer optimum.
    let problem = InnerProblem::from_meas_params(rho, &outcome.x, &measured);
    let (value, post_x, _, final_evals) = solve_inner(&problem, &outcome.x, &measured, cfg);
    let all: Vec<usize> = (0..dims.len()).collect();
    Ok(CorrelationResult {
        value,
        measurement_params: params_to_basis_params(&outcome.x, &dims, &measured),
        postselection_params: params_to_basis_params(&post_x, &dims, &all),
        restart_spread: outcome.spread,
        evaluations: inner_evals.load(Ordering::Relaxed) + final_evals,
    })
}

/// One-sided quantifier: weak measurement on a single party.
pub fn c_one_sided(
    rho: &DensityMatrix,
    measured_party: usize,
    cfg: &OptimizerConfig,
) -> Result<CorrelationResult> {
    if rho.dims().len() < 2 {
        return Err(Error::TooFewParties {
            got: rho.dims().len(),
        });
    }
    c_multipartite(rho, &[measured_party], cfg)
}

/// Two-sided quantifier: product measurement basis over a pair of parties.
pub fn c_two_sided(
    rho: &DensityMatrix,
    measured_parties: (usize, usize),
    cfg: &OptimizerConfig,
) -> Result<CorrelationResult> {
    if rho.dims().len() < 2 {
        return Err(Error::TooFewParties {
            got: rho.dims().len(),
        });
    }
    if measured_parties.0 == measured_parties.1 {
        return Err(Error::InvalidConfig {
            detail: "two-sided run requires two distinct parties",
        });
    }
    c_multipartite(rho, &[measured_parties.0, measured_parties.1], cfg)
}

// ---------------------------------------------------------------------------
// Brute-force grid oracle (two qubits)
// ---------------------------------------------------------------------------

fn bloch_vector(alpha: f64, beta: f64) -> [f64; 3] {
    [
        alpha.sin() * beta.cos(),
        alpha.sin() * beta.sin(),
        alpha.cos(),
    ]
}

/// Pauli correlation data of one outcome operator N = [Pi, rho]/2i:
/// tr[(sigma_i (x) I)N], tr[(I (x) sigma_j)N], tr[(sigma_i (x) sigma_j)N].
struct PauliData {
    a: [f64; 3],
    b: [f64; 3],
    g: [[f64; 3]; 3],
}

fn pauli_data(n_op: &Operator, paulis: &[Operator; 4]) -> PauliData {
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        a[i] = tensor(&paulis[i + 1], &paulis[0]).matmul(n_op).trace().re;
        b[i] = tensor(&paulis[0], &paulis[i + 1]).matmul(n_op).trace().re;
        for j in 0..3 {
            g[i][j] = tensor(&paulis[i + 1], &paulis[j + 1])
                .matmul(n_op)
                .trace()
                .re;
        }
    }
    PauliData { a, b, g }
}

/// Imaginary-part operator (M rho - rho M)/2i for M the embedded projector.
fn im_part_operator(m: &Operator, rho: &Operator) -> Operator {
    m.matmul(rho)
        .sub(&rho.matmul(m))
        .scale(C64::new(0.0, -0.5))
}

/// Grid points over the qubit angle ranges: first coordinate uniform over
/// [0, pi] inclusive, second uniform over [0, 2 pi) half-open. When `n` is
/// even the pairs related by (a, b) -> (pi - a, b + pi) describe the same
/// basis and the redundant half is dropped.
fn angle_grid(n: usize, dedup: bool) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let alpha_step = std::f64::consts::PI / (n - 1) as f64;
    let beta_step = 2.0 * std::f64::consts::PI / n as f64;
    let i_max = if dedup { n / 2 } else { n };
    for i in 0..i_max {
        for j in 0..n {
            out.push((i as f64 * alpha_step, j as f64 * beta_step));
        }
    }
    out
}

/// Exhaustive max-then-min over uniform angle grids; independent check of
/// the optimizer for two-qubit states.
pub fn brute_force_oracle(
    rho: &DensityMatrix,
    measured: &[usize],
    grid_n: usize,
) -> Result<f64> {
    if rho.dims() != [2, 2] {
        return Err(Error::NotTwoQubits);
    }
    if grid_n < 2 {
        return Err(Error::InvalidConfig {
            detail: "grid_n must be at least 2",
        });
    }
    let measured = check_measured(rho.dims(), measured)?;
    let paulis = [
        Operator::identity(&[2]),
        crate::operator::sigma_x(),
        crate::operator::sigma_y(),
        crate::operator::sigma_z(),
    ];

    let dedup = grid_n % 2 == 0;
    let meas_grid = angle_grid(grid_n, dedup);
    let post_grid = angle_grid(grid_n, dedup);
    let post_bloch: Vec<[f64; 3]> = post_grid.iter().map(|&(a, b)| bloch_vector(a, b)).collect();

    // Measurement candidates: single-party for one-sided, product pairs for
    // two-sided. Each candidate yields the outcome operators N.
    let candidates: Vec<Vec<Operator>> = if measured.len() == 1 {
        let party = measured[0];
        meas_grid
            .iter()
            .map(|&(theta, eta)| {
                let kets = qubit_kets_raw(theta, eta);
                let proj = Operator::from_fn(&[2], |i, j| kets[0][i] * kets[0][j].conj());
                let emb = if party == 0 {
                    tensor(&proj, &paulis[0])
                } else {
                    tensor(&paulis[0], &proj)
                };
                // The complementary outcome gives the negated operator, so a
                // single outcome carries the whole (doubled) sum.
                vec![im_part_operator(&emb, rho.op())]
            })
            .collect()
    } else {
        let mut out = Vec::with_capacity(meas_grid.len() * meas_grid.len());
        for &(ta, ea) in &meas_grid {
            let kets_a = qubit_kets_raw(ta, ea);
            for &(tb, eb) in &meas_grid {
                let kets_b = qubit_kets_raw(tb, eb);
                let mut ops = Vec::with_capacity(4);
                for ka in &kets_a {
                    let pa = Operator::from_fn(&[2], |i, j| ka[i] * ka[j].conj());
                    for kb in &kets_b {
                        let pb = Operator::from_fn(&[2], |i, j| kb[i] * kb[j].conj());
                        ops.push(im_part_operator(&tensor(&pa, &pb), rho.op()));
                    }
                }
                out.push(ops);
            }
        }
        out
    };
    // value = weight * sum_outcomes sum_{s,t} |s x + t y + st z| / 4
    let weight = if measured.len() == 1 { 2.0 } else { 1.0 };

    let values: Vec<f64> = candidates
        .par_iter()
        .map(|ops| {
            let data: Vec<PauliData> = ops.iter().map(|n| pauli_data(n, &paulis)).collect();
            let k = post_bloch.len();
            // Per postselection point and outcome: u.a and G^T u.
            let mut xs = vec![0.0f64; k * data.len()];
            let mut ys = vec![0.0f64; k * data.len()];
            let mut ws = vec![[0.0f64; 3]; k * data.len()];
            for (ku, u) in post_bloch.iter().enumerate() {
                for (o, d) in data.iter().enumerate() {
                    let at = ku * data.len() + o;
                    xs[at] = u[0] * d.a[0] + u[1] * d.a[1] + u[2] * d.a[2];
                    ys[at] = u[0] * d.b[0] + u[1] * d.b[1] + u[2] * d.b[2];
                    for c in 0..3 {
                        ws[at][c] =
                            u[0] * d.g[0][c] + u[1] * d.g[1][c] + u[2] * d.g[2][c];
                    }
                }
            }
            let mut best = 0.0f64;
            for ku in 0..k {
                let base = ku * data.len();
                for (kv, v) in post_bloch.iter().enumerate() {
                    let vbase = kv * data.len();
                    let mut total = 0.0;
                    for o in 0..data.len() {
                        let x = xs[base + o];
                        let y = ys[vbase + o];
                        let w = &ws[base + o];
                        let z = w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
                        total += (x + y + z).abs()
                            + (x + y - z).abs()
                            + (x - y + z).abs()
                            + (x - y - z).abs();
                    }
                    if total > best {
                        best = total;
                    }
                }
            }
            weight * best / 4.0
        })
        .collect();

    Ok(values.into_iter().fold(f64::INFINITY, f64::min))
}

// ---------------------------------------------------------------------------
// Bounds and witnesses
// ---------------------------------------------------------------------------

/// 1 - sum p^2 of a probability vector.
pub fn tsallis2(probs: &[f64]) -> Result<f64> {
    if probs.iter().any(|&p| p < -1e-12) {
        return Err(Error::InvalidDistribution {
            detail: "negative probability".into(),
        });
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution {
            detail: format!("probabilities sum to {sum}"),
        });
    }
    Ok(1.0 - probs.iter().map(|p| p * p).sum::<f64>())
}

/// Measurement outcome probabilities of a product basis over the measured
/// parties' marginal.
fn measurement_probs(
    marginal: &DensityMatrix,
    kets: &PostScratch,
    dims: &[usize],
) -> Vec<f64> {
    let n: usize = dims.iter().product();
    let parties = dims.len();
    let mut combo = vec![0usize; parties];
    let mut probs = Vec::with_capacity(n);
    let mut buf_a = vec![C64::ZERO; n];
    let mut buf_b = vec![C64::ZERO; n];
    loop {
        let mut len = dims[0];
        let k0 = combo[0];
        buf_a[..len].copy_from_slice(&kets.kets[0][k0 * len..(k0 + 1) * len]);
        let mut src_is_a = true;
        for p in 1..parties {
            let d = dims[p];
            let kp = combo[p];
            let local = &kets.kets[p][kp * d..(kp + 1) * d];
            let (src, dst) = if src_is_a {
                (&buf_a, &mut buf_b)
            } else {
                (&buf_b, &mut buf_a)
            };
            for i in 0..len {
                for (j, &lj) in local.iter().enumerate() {
                    dst[i * d + j] = src[i] * lj;
                }
            }
            len *= d;
            src_is_a = !src_is_a;
        }
        let phi = if src_is_a { &buf_a[..len] } else { &buf_b[..len] };
        let m = marginal.op().entries();
        let mut acc = C64::ZERO;
        for i in 0..len {
            let ci = phi[i].conj();
            let row = &m[i * len..(i + 1) * len];
            let mut s = C64::ZERO;
            for j in 0..len {
                s += row[j] * phi[j];
            }
            acc += ci * s;
        }
        probs.push(acc.re);
        let mut p = parties;
        loop {
            if p == 0 {
                return probs;
            }
            p -= 1;
            combo[p] += 1;
            if combo[p] < dims[p] {
                break;
            }
            combo[p] = 0;
        }
    }
}

/// min over measurement bases of sum_a sqrt(p_a - p_a^2), the summed quantum
/// standard deviations of the projectors (idempotence applied).
pub fn local_uncertainty_bound(
    rho: &DensityMatrix,
    measured: &[usize],
    cfg: &OptimizerConfig,
) -> Result<f64> {
    cfg.validate()?;
    let measured = check_measured(rho.dims(), measured)?;
    let marginal = rho.marginal(&measured)?;
    let dims = marginal.dims().to_vec();
    let local: Vec<usize> = (0..dims.len()).collect();
    let ranges = coordinate_ranges(&dims, &local);
    let steps = coordinate_steps(&dims, &local);
    let special = outer_special_starts(&marginal, &local);
    let starts = build_starts(
        &special,
        cfg.outer_restarts,
        &ranges,
        halton_offset(cfg.seed, 3),
    );
    let opts = cfg.simplex_options();
    let outcome = multistart_minimize(
        &|| {
            let marginal = marginal.clone();
            let dims = dims.clone();
            let mut scratch = PostScratch::new(&dims);
            Box::new(move |x: &[f64]| {
                let local: Vec<usize> = (0..dims.len()).collect();
                let chunks = split_params(x, &dims, &local);
                for (p, chunk) in chunks.into_iter().enumerate() {
                    fill_local_kets(dims[p], chunk, &mut scratch.kets[p]);
                }
                measurement_probs(&marginal, &scratch, &dims)
                    .iter()
                    .map(|&p| (p - p * p).max(0.0).sqrt())
                    .sum::<f64>()
            })
        },
        &starts,
        &steps,
        &opts,
    );
    Ok(outcome.value)
}

/// sqrt(d_party) * sqrt(1 - Tr marginal^2) for a bipartite pure state;
/// reduces to the concurrence for two qubits.
pub fn linear_entropy_witness(psi: &PureState, party: usize) -> Result<f64> {
    if psi.dims().len() != 2 {
        return Err(Error::NotBipartite {
            got: psi.dims().len(),
        });
    }
    if party >= 2 {
        return Err(Error::InvalidSubsystem {
            index: party,
            count: 2,
        });
    }
    let rho = DensityMatrix::from_pure(psi);
    let marginal = rho.marginal(&[party])?;
    let d = psi.dims()[party] as f64;
    Ok((d * (1.0 - marginal.purity()).max(0.0)).sqrt())
}

/// min over product bases of the summed off-diagonal magnitudes
/// sum_{a' != a, b' != b} |<a,b|rho|a',b'>|.
pub fn l1_quantumness(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<f64> {
    cfg.validate()?;
    if rho.dims().len() != 2 {
        return Err(Error::NotBipartite {
            got: rho.dims().len(),
        });
    }
    let dims = rho.dims().to_vec();
    let local: Vec<usize> = (0..2).collect();
    let ranges = coordinate_ranges(&dims, &local);
    let steps = coordinate_steps(&dims, &local);
    let special = outer_special_starts(rho, &local);
    let starts = build_starts(
        &special,
        cfg.outer_restarts,
        &ranges,
        halton_offset(cfg.seed, 4),
    );
    let opts = cfg.simplex_options();
    let outcome = multistart_minimize(
        &|| {
            let rho = rho.clone();
            let dims = dims.clone();
            Box::new(move |x: &[f64]| l1_sum_at_params(&rho, &dims, x))
        },
        &starts,
        &steps,
        &opts,
    );
    Ok(outcome.value)
}

/// The l1 off-diagonal sum at a fixed product basis given by raw params.
fn l1_sum_at_params(rho: &DensityMatrix, dims: &[usize], params: &[f64]) -> f64 {
    let local: Vec<usize> = (0..2).collect();
    let chunks = split_params(params, dims, &local);
    let (da, db) = (dims[0], dims[1]);
    let mut kets_a = vec![C64::ZERO; da * da];
    let mut kets_b = vec![C64::ZERO; db * db];
    fill_local_kets(da, chunks[0], &mut kets_a);
    fill_local_kets(db, chunks[1], &mut kets_b);
    l1_sum_for_kets(rho, &kets_a, &kets_b, da, db)
}

fn l1_sum_for_kets(rho: &DensityMatrix, kets_a: &[C64], kets_b: &[C64], da: usize, db: usize) -> f64 {
    let n = da * db;
    let m = rho.op().entries();
    // joint[(a,b)][i] amplitudes
    let mut joint = vec![C64::ZERO; n * n];
    for a in 0..da {
        for b in 0..db {
            let at = (a * db + b) * n;
            for i in 0..da {
                for j in 0..db {
                    joint[at + i * db + j] = kets_a[a * da + i] * kets_b[b * db + j];
                }
            }
        }
    }
    let elem = |row: usize, col: usize| -> C64 {
        let bra = &joint[row * n..(row + 1) * n];
        let ket = &joint[col * n..(col + 1) * n];
        let mut acc = C64::ZERO;
        for i in 0..n {
            let ci = bra[i].conj();
            let mrow = &m[i * n..(i + 1) * n];
            let mut s = C64::ZERO;
            for j in 0..n {
                s += mrow[j] * ket[j];
            }
            acc += ci * s;
        }
        acc
    };
    let mut total = 0.0;
    for a in 0..da {
        for b in 0..db {
            for ap in 0..da {
                if ap == a {
                    continue;
                }
                for bp in 0..db {
                    if bp == b {
                        continue;
                    }
                    total += elem(a * db + b, ap * db + bp).norm();
                }
            }
        }
    }
    total
}

/// The l1 off-diagonal sum evaluated at explicit local bases, without
/// minimization.
pub fn l1_sum_at_basis(
    rho: &DensityMatrix,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
) -> Result<f64> {
    if rho.dims().len() != 2 {
        return Err(Error::NotBipartite {
            got: rho.dims().len(),
        });
    }
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    if basis_a.dim() != da || basis_b.dim() != db {
        return Err(Error::DimensionMismatch {
            left: basis_a.dim() * basis_b.dim(),
            right: da * db,
        });
    }
    let mut kets_a = vec![C64::ZERO; da * da];
    let mut kets_b = vec![C64::ZERO; db * db];
    for k in 0..da {
        kets_a[k * da..(k + 1) * da].copy_from_slice(basis_a.ket(k).amplitudes());
    }
    for k in 0..db {
        kets_b[k * db..(k + 1) * db].copy_from_slice(basis_b.ket(k).amplitudes());
    }
    Ok(l1_sum_for_kets(rho, &kets_a, &kets_b, da, db))
}

/// Per-outcome mean absolute estimation error sum_phi |Im<phi|(Pi_k (x) I)
/// rho|phi>| at a fixed measurement basis and postselection basis.
pub fn estimation_error_profile(
    rho: &DensityMatrix,
    meas: &OrthonormalBasis,
    post: &ProductBasis,
    measured_party: usize,
) -> Result<Vec<f64>> {
    let measured = check_measured(rho.dims(), &[measured_party])?;
    check_meas_bases(rho.dims(), std::slice::from_ref(meas), &measured)?;
    check_post_basis(rho.dims(), post)?;
    let d = meas.dim();
    let mut kets = vec![C64::ZERO; d * d];
    for k in 0..d {
        kets[k * d..(k + 1) * d].copy_from_slice(meas.ket(k).amplitudes());
    }
    let problem = InnerProblem::from_meas_kets(rho, &[kets], &measured);
    Ok(problem.eval_bases_per_outcome(post))
}

/// Quantifier value together with its uncertainty, Tsallis and (for
/// two-sided bipartite runs) l1 bounds; for pure bipartite one-sided runs
/// also the linear-entropy witness.
pub fn bounds_report(
    rho: &DensityMatrix,
    measured: &[usize],
    cfg: &OptimizerConfig,
) -> Result<BoundsReport> {
    let measured = check_measured(rho.dims(), measured)?;
    let w = c_multipartite(rho, &measured, cfg)?;
    let uncertainty_bound = local_uncertainty_bound(rho, &measured, cfg)?;

    let marginal = rho.marginal(&measured)?;
    let dim_product: usize = measured.iter().map(|&p| rho.dims()[p]).product();
    let tsallis_bound = if measured.len() == 1 {
        let s2 = (1.0 - marginal.purity()).max(0.0);
        (dim_product as f64).sqrt() * s2.sqrt()
    } else {
        // Product of the per-party eigenbases is the feasible analogue of
        // the eigenbasis minimizer.
        let dims = marginal.dims().to_vec();
        let mut scratch = PostScratch::new(&dims);
        for (p, &d) in dims.iter().enumerate() {
            let spec = hermitian_eig(rho.marginal(&[measured[p]])?.op())?;
            for k in 0..d {
                scratch.kets[p][k * d..(k + 1) * d]
                    .copy_from_slice(spec.eigenvectors.ket(k).amplitudes());
            }
        }
        let probs = measurement_probs(&marginal, &scratch, &dims);
        let clamped: Vec<f64> = probs.iter().map(|&p| p.max(0.0)).collect();
        let s2 = tsallis2(&clamped)?;
        (dim_product as f64).sqrt() * s2.max(0.0).sqrt()
    };

    let l1_bound = if measured.len() == 2 && rho.dims().len() == 2 {
        Some(l1_quantumness(rho, cfg)?)
    } else {
        None
    };

    let witness_pure = if measured.len() == 1 && rho.dims().len() == 2 {
        let spec = hermitian_eig(rho.op())?;
        if spec.eigenvalues[0] >= 1.0 - 1e-9 {
            let psi = spec.eigenvectors.ket(0).clone();
            Some(linear_entropy_witness(&psi, measured[0])?)
        } else {
            None
        }
    } else {
        None
    };

    Ok(BoundsReport {
        w_value: w.value,
        uncertainty_bound,
        tsallis_bound,
        l1_bound,
        witness_pure,
    })
}
