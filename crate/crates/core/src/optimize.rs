//! Derivative-free simplex minimization with deterministic multi-start.
//!
//! The objectives produced by the correlation quantifiers are non-smooth
//! (sums of absolute values) and multimodal, so every search runs a plain
//! Nelder-Mead simplex from several deterministic starting points and keeps
//! the best outcome. Restarts are independent and may run in parallel; the
//! merge is ordered by (value, restart index) and therefore bit-reproducible
//! regardless of scheduling.

use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iterations: usize,
    /// Function-value stall threshold.
    pub ftol: f64,
    /// Simplex size threshold.
    pub xtol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            ftol: 1e-6,
            xtol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: u64,
    pub iterations: usize,
}

/// Minimize `f` with the Nelder-Mead simplex started at `x0` with initial
/// per-coordinate steps `steps`.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    let n = x0.len();
    assert_eq!(steps.len(), n);
    if n == 0 {
        let value = f(x0);
        return SimplexResult {
            x: vec![],
            value,
            evaluations: 1,
            iterations: 0,
        };
    }

    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let mut evals: u64 = 0;
    let mut eval = |x: &[f64], evals: &mut u64| {
        *evals += 1;
        f(x)
    };

    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    verts.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        verts.push(v);
    }
    let mut vals: Vec<f64> = verts.iter().map(|v| eval(v, &mut evals)).collect();

    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;

        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let fspread = vals[worst] - vals[best];
        let mut size = 0.0f64;
        for v in &verts {
            for j in 0..n {
                size = size.max((v[j] - verts[best][j]).abs());
            }
        }
        if fspread <= opts.ftol && size <= opts.xtol {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for (k, v) in verts.iter().enumerate() {
            if k == worst {
                continue;
            }
            for j in 0..n {
                centroid[j] += v[j];
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let reflected: Vec<f64> = (0..n)
            .map(|j| centroid[j] + ALPHA * (centroid[j] - verts[worst][j]))
            .collect();
        let f_r = eval(&reflected, &mut evals);

        if f_r < vals[best] {
            let expanded: Vec<f64> = (0..n)
                .map(|j| centroid[j] + GAMMA * (reflected[j] - centroid[j]))
                .collect();
            let f_e = eval(&expanded, &mut evals);
            if f_e < f_r {
                verts[worst] = expanded;
                vals[worst] = f_e;
            } else {
                verts[worst] = reflected;
                vals[worst] = f_r;
            }
            continue;
        }
        if f_r < vals[second_worst] {
            verts[worst] = reflected;
            vals[worst] = f_r;
            continue;
        }

        let contracted: Vec<f64> = if f_r < vals[worst] {
            (0..n)
                .map(|j| centroid[j] + RHO * (reflected[j] - centroid[j]))
                .collect()
        } else {
            (0..n)
                .map(|j| centroid[j] + RHO * (verts[worst][j] - centroid[j]))
                .collect()
        };
        let f_c = eval(&contracted, &mut evals);
        if f_c < vals[worst].min(f_r) {
            verts[worst] = contracted;
            vals[worst] = f_c;
            continue;
        }

        // Shrink toward the best vertex.
        for k in 0..=n {
            if k == best {
                continue;
            }
            for j in 0..n {
                verts[k][j] = verts[best][j] + SIGMA * (verts[k][j] - verts[best][j]);
            }
            vals[k] = eval(&verts[k], &mut evals);
        }
    }

    let mut best = 0;
    for k in 1..=n {
        if vals[k] < vals[best] {
            best = k;
        }
    }
    SimplexResult {
        x: verts[best].clone(),
        value: vals[best],
        evaluations: evals,
        iterations,
    }
}

/// Radical-inverse of `index` in the given base.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate: u64 = 2;
    while primes.len() < count {
        if primes.iter().all(|&p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// Point `index` of the Halton low-discrepancy sequence in [0,1)^dim.
pub fn halton_point(index: u64, dim: usize) -> Vec<f64> {
    let primes = first_primes(dim);
    primes
        .iter()
        .map(|&p| radical_inverse(index, p))
        .collect()
}

#[derive(Debug, Clone)]
pub struct MultistartOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// max - min over the restart optima.
    pub spread: f64,
    pub evaluations: u64,
}

/// Run one simplex search per starting point and keep the best result.
/// `make_eval` produces an independent evaluator per restart so restarts can
/// carry their own scratch space across threads.
pub fn multistart_minimize<'a, M>(
    make_eval: &M,
    starts: &[Vec<f64>],
    steps: &[f64],
    opts: &SimplexOptions,
) -> MultistartOutcome
where
    M: Fn() -> Box<dyn FnMut(&[f64]) -> f64 + Send + 'a> + Sync,
{
    assert!(!starts.is_empty());
    let results: Vec<SimplexResult> = starts
        .par_iter()
        .map(|x0| {
            let mut f = make_eval();
            nelder_mead(&mut *f, x0, steps, opts)
        })
        .collect();

    let mut best = 0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut evaluations = 0u64;
    for (k, r) in results.iter().enumerate() {
        evaluations += r.evaluations;
        lo = lo.min(r.value);
        hi = hi.max(r.value);
        if r.value < results[best].value {
            best = k;
        }
    }
    MultistartOutcome {
        x: results[best].x.clone(),
        value: results[best].value,
        spread: hi - lo,
        evaluations,
    }
}
