//! Dense complex operators tagged with subsystem dimensions, plus the
//! density-matrix and pure-state wrappers every other module builds on.
//!
//! Entries are stored row-major. Subsystem ordering is tensor-construction
//! order: index 0 is the leftmost factor.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::bases::OrthonormalBasis;
use crate::error::{Error, Result};

/// Hermiticity tolerance for density matrices and eigendecomposition inputs.
pub const HERMITICITY_TOL: f64 = 1e-9;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-9;
/// Positivity tolerance; eigenvalues in [-POSITIVITY_TOL, 0) are clamped.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Norm tolerance for pure states.
pub const NORM_TOL: f64 = 1e-12;

/// Square complex matrix carrying the subsystem dimensions of the space it
/// acts on. The universal carrier for states, projectors and observables.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    n: usize,
    entries: Vec<C64>,
}

impl Operator {
    /// Build an operator from row-major entries. The matrix must be square
    /// with side length equal to the product of `dims`.
    pub fn from_entries(dims: Vec<usize>, entries: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::ZeroDim);
        }
        let n = dims.iter().product::<usize>();
        if entries.len() != n * n {
            let side = (entries.len() as f64).sqrt().round() as usize;
            if side * side != entries.len() {
                return Err(Error::NotSquare { len: entries.len() });
            }
            return Err(Error::DimsProductMismatch {
                side,
                dims_product: n,
            });
        }
        Ok(Self { dims, n, entries })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        assert!(!dims.is_empty() && dims.iter().all(|&d| d > 0));
        let n: usize = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            n,
            entries: vec![C64::ZERO; n * n],
        }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let mut m = Self::zeros(dims);
        for i in 0..m.n {
            m.entries[i * m.n + i] = C64::ONE;
        }
        m
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dims);
        for i in 0..m.n {
            for j in 0..m.n {
                m.entries[i * m.n + j] = f(i, j);
            }
        }
        m
    }

    /// Diagonal operator from real entries.
    pub fn from_diagonal(dims: &[usize], diag: &[f64]) -> Self {
        let mut m = Self::zeros(dims);
        assert_eq!(diag.len(), m.n);
        for i in 0..m.n {
            m.entries[i * m.n + i] = C64::new(diag[i], 0.0);
        }
        m
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.n + j] = v;
    }

    /// Reinterpret the same matrix with a different subsystem factorization.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::ZeroDim);
        }
        let n: usize = dims.iter().product();
        if n != self.n {
            return Err(Error::DimsProductMismatch {
                side: self.n,
                dims_product: n,
            });
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn matmul(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.n, rhs.n, "matmul requires equal side lengths");
        let n = self.n;
        let mut out = Operator::zeros(&self.dims);
        for i in 0..n {
            let row = &self.entries[i * n..(i + 1) * n];
            let orow = &mut out.entries[i * n..(i + 1) * n];
            for (k, &a_ik) in row.iter().enumerate() {
                if a_ik == C64::ZERO {
                    continue;
                }
                let brow = &rhs.entries[k * n..(k + 1) * n];
                for j in 0..n {
                    orow[j] += a_ik * brow[j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.n, rhs.n);
        let mut out = self.clone();
        for (o, r) in out.entries.iter_mut().zip(&rhs.entries) {
            *o += r;
        }
        out
    }

    pub fn sub(&self, rhs: &Operator) -> Operator {
        assert_eq!(self.n, rhs.n);
        let mut out = self.clone();
        for (o, r) in out.entries.iter_mut().zip(&rhs.entries) {
            *o -= r;
        }
        out
    }

    pub fn scale(&self, c: C64) -> Operator {
        let mut out = self.clone();
        for e in out.entries.iter_mut() {
            *e *= c;
        }
        out
    }

    pub fn scale_re(&self, c: f64) -> Operator {
        self.scale(C64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Operator {
        let n = self.n;
        Operator::from_fn(&self.dims, |i, j| self.entries[j * n + i].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.entries[i * self.n + i]).sum()
    }

    /// max_ij |A_ij - B_ij|
    pub fn max_abs_diff(&self, rhs: &Operator) -> f64 {
        assert_eq!(self.n, rhs.n);
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// max_ij |A_ij - conj(A_ji)|
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.n;
        let mut d = 0.0f64;
        for i in 0..n {
            for j in i..n {
                d = d.max((self.entries[i * n + j] - self.entries[j * n + i].conj()).norm());
            }
        }
        d
    }

    /// (A + A†)/2
    pub fn hermitian_part(&self) -> Operator {
        let n = self.n;
        Operator::from_fn(&self.dims, |i, j| {
            (self.entries[i * n + j] + self.entries[j * n + i].conj()) * 0.5
        })
    }

    /// <l|A|r>
    pub fn matrix_element(&self, left: &PureState, right: &PureState) -> C64 {
        assert_eq!(left.dim(), self.n);
        assert_eq!(right.dim(), self.n);
        let n = self.n;
        let mut acc = C64::ZERO;
        for i in 0..n {
            let li = left.amplitudes[i].conj();
            if li == C64::ZERO {
                continue;
            }
            let row = &self.entries[i * n..(i + 1) * n];
            let mut s = C64::ZERO;
            for j in 0..n {
                s += row[j] * right.amplitudes[j];
            }
            acc += li * s;
        }
        acc
    }

    /// <phi|A|phi>
    pub fn expectation(&self, phi: &PureState) -> C64 {
        self.matrix_element(phi, phi)
    }
}

/// Kronecker product; dims of the result are the concatenation of the
/// factors' dims.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    let na = a.n;
    let nb = b.n;
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    let n = na * nb;
    let mut entries = vec![C64::ZERO; n * n];
    for ia in 0..na {
        for ja in 0..na {
            let aij = a.entries[ia * na + ja];
            if aij == C64::ZERO {
                continue;
            }
            for ib in 0..nb {
                let row = (ia * nb + ib) * n + ja * nb;
                let brow = &b.entries[ib * nb..(ib + 1) * nb];
                for jb in 0..nb {
                    entries[row + jb] = aij * brow[jb];
                }
            }
        }
    }
    Operator { dims, n, entries }
}

/// Trace out every subsystem not in `keep`; kept subsystems retain their
/// original relative order.
pub fn partial_trace(m: &Operator, keep: &[usize]) -> Result<Operator> {
    let parties = m.dims.len();
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    for &k in &kept {
        if k >= parties {
            return Err(Error::InvalidSubsystem {
                index: k,
                count: parties,
            });
        }
    }
    let traced: Vec<usize> = (0..parties).filter(|p| !kept.contains(p)).collect();
    let out_dims: Vec<usize> = kept.iter().map(|&k| m.dims[k]).collect();
    if traced.is_empty() {
        return Ok(m.clone().with_dims(out_dims)?);
    }

    // Per flat index, its projection onto the kept and traced factors.
    let n = m.n;
    let out_n: usize = out_dims.iter().product();
    let mut kept_part = vec![0usize; n];
    let mut traced_part = vec![0usize; n];
    let mut strides = vec![1usize; parties];
    for p in (0..parties.saturating_sub(1)).rev() {
        strides[p] = strides[p + 1] * m.dims[p + 1];
    }
    for i in 0..n {
        let mut kp = 0;
        for &k in &kept {
            kp = kp * m.dims[k] + (i / strides[k]) % m.dims[k];
        }
        let mut tp = 0;
        for &t in &traced {
            tp = tp * m.dims[t] + (i / strides[t]) % m.dims[t];
        }
        kept_part[i] = kp;
        traced_part[i] = tp;
    }

    let mut out = Operator::zeros(&out_dims);
    for i in 0..n {
        for j in 0..n {
            if traced_part[i] == traced_part[j] {
                out.entries[kept_part[i] * out_n + kept_part[j]] += m.entries[i * n + j];
            }
        }
    }
    Ok(out)
}

/// ab - ba; anti-Hermitian when both arguments are Hermitian.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            left: a.n,
            right: b.n,
        });
    }
    Ok(a.matmul(b).sub(&b.matmul(a)))
}

/// Normalized state vector tagged with subsystem dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::ZeroDim);
        }
        let n: usize = dims.iter().product();
        if amplitudes.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let defect = (norm - 1.0).abs();
        if defect > NORM_TOL {
            return Err(Error::NormDefect { defect });
        }
        Ok(Self { dims, amplitudes })
    }

    /// Rescale to unit norm before constructing.
    pub fn normalized(dims: Vec<usize>, mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NormDefect { defect: 1.0 });
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Self::new(dims, amplitudes)
    }

    /// Computational basis ket |index> in the flattened product space.
    pub fn basis_ket(dims: Vec<usize>, index: usize) -> Self {
        let n: usize = dims.iter().product();
        assert!(index < n);
        let mut amplitudes = vec![C64::ZERO; n];
        amplitudes[index] = C64::ONE;
        Self { dims, amplitudes }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// <self|other>
    pub fn inner(&self, other: &PureState) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// |psi><psi| as an Operator with the same dims.
    pub fn projector(&self) -> Operator {
        Operator::from_fn(&self.dims, |i, j| {
            self.amplitudes[i] * self.amplitudes[j].conj()
        })
    }

    /// Tensor product of two pure states.
    pub fn tensor(a: &PureState, b: &PureState) -> PureState {
        let mut dims = a.dims.clone();
        dims.extend_from_slice(&b.dims);
        let mut amplitudes = Vec::with_capacity(a.dim() * b.dim());
        for &aa in &a.amplitudes {
            for &bb in &b.amplitudes {
                amplitudes.push(aa * bb);
            }
        }
        PureState { dims, amplitudes }
    }

    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if n != self.dim() {
            return Err(Error::DimsProductMismatch {
                side: self.dim(),
                dims_product: n,
            });
        }
        self.dims = dims;
        Ok(self)
    }
}

/// Validated density matrix with its recorded invariant defects.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
    hermiticity_defect: f64,
    trace_defect: f64,
    min_eigenvalue: f64,
}

impl DensityMatrix {
    /// Validate at the default tolerances.
    pub fn new(op: Operator) -> Result<Self> {
        validate_density(op, POSITIVITY_TOL)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix {
            op: psi.projector(),
            hermiticity_defect: 0.0,
            trace_defect: 0.0,
            min_eigenvalue: 0.0,
        }
    }

    #[inline]
    pub fn op(&self) -> &Operator {
        &self.op
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        self.op.dims()
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.op.side()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.hermiticity_defect
    }

    pub fn trace_defect(&self) -> f64 {
        self.trace_defect
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// Reduced state on the kept subsystems.
    pub fn marginal(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let reduced = partial_trace(&self.op, keep)?;
        validate_density(reduced, POSITIVITY_TOL)
    }

    /// <phi|rho|phi>, clamped to be nonnegative.
    pub fn postselection_probability(&self, phi: &PureState) -> f64 {
        self.op.expectation(phi).re.max(0.0)
    }

    pub fn purity(&self) -> f64 {
        self.op.matmul(&self.op).trace().re
    }
}

/// Real eigenvalues in descending order with orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: OrthonormalBasis,
}

/// Eigendecomposition of a Hermitian operator. Eigenvalues are sorted
/// descending; eigenvectors carry the operator's dims.
pub fn hermitian_eig(m: &Operator) -> Result<Spectrum> {
    let defect = m.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NonHermitian { defect });
    }
    let (vals, vecs) = eig_hermitian_raw(m);
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&k| vals[k]).collect();
    let kets: Vec<PureState> = order
        .iter()
        .map(|&k| PureState::normalized(m.dims.clone(), vecs[k].clone()))
        .collect::<Result<_>>()?;
    let eigenvectors = OrthonormalBasis::new(kets)?;
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Unsorted Hermitian eigendecomposition without validity checks.
pub(crate) fn eig_hermitian_raw(m: &Operator) -> (Vec<f64>, Vec<Vec<C64>>) {
    let n = m.n;
    let dm = DMatrix::from_row_slice(n, n, &m.entries);
    let se = nalgebra::linalg::SymmetricEigen::new(dm);
    let vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
    let vecs: Vec<Vec<C64>> = (0..n)
        .map(|k| se.eigenvectors.column(k).iter().copied().collect())
        .collect();
    (vals, vecs)
}

/// Validate Hermiticity, unit trace and positivity of `m` at tolerance
/// `tol`. Eigenvalues in [-tol, 0) are clamped to zero and the state is
/// rebuilt with a renormalized trace; exact inputs pass through untouched.
pub fn validate_density(m: Operator, tol: f64) -> Result<DensityMatrix> {
    let hermiticity_defect = m.hermiticity_defect();
    if hermiticity_defect > tol {
        return Err(Error::NonHermitian {
            defect: hermiticity_defect,
        });
    }
    let trace_defect = (m.trace() - C64::ONE).norm();
    if trace_defect > tol {
        return Err(Error::TraceNotOne {
            defect: trace_defect,
        });
    }
    let herm = m.hermitian_part();
    let (vals, vecs) = eig_hermitian_raw(&herm);
    let min_eigenvalue = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -tol {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    let op = if min_eigenvalue < 0.0 {
        let clamped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let n = m.n;
        let mut rebuilt = Operator::zeros(m.dims());
        for (k, &lam) in clamped.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            let w = lam / total;
            let v = &vecs[k];
            for i in 0..n {
                for j in 0..n {
                    rebuilt.entries[i * n + j] += v[i] * v[j].conj() * w;
                }
            }
        }
        rebuilt
    } else {
        m
    };
    Ok(DensityMatrix {
        op,
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
    })
}

pub fn sigma_x() -> Operator {
    Operator::from_entries(
        vec![2],
        vec![C64::ZERO, C64::ONE, C64::ONE, C64::ZERO],
    )
    .unwrap()
}

pub fn sigma_y() -> Operator {
    Operator::from_entries(
        vec![2],
        vec![
            C64::ZERO,
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::ZERO,
        ],
    )
    .unwrap()
}

pub fn sigma_z() -> Operator {
    Operator::from_entries(
        vec![2],
        vec![C64::ONE, C64::ZERO, C64::ZERO, -C64::ONE],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_op(dims: &[usize], seed: u64) -> Operator {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let n: usize = dims.iter().product();
        let entries = (0..n * n)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        Operator::from_entries(dims.to_vec(), entries).unwrap()
    }

    /// Entries that are small dyadic rationals so that products of three of
    /// them are exact in f64.
    fn random_dyadic_op(dims: &[usize], seed: u64) -> Operator {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let n: usize = dims.iter().product();
        let mut pick = |rng: &mut ChaCha12Rng| (rng.random_range(-32..=32i32) as f64) / 16.0;
        let entries = (0..n * n)
            .map(|_| C64::new(pick(&mut rng), pick(&mut rng)))
            .collect();
        Operator::from_entries(dims.to_vec(), entries).unwrap()
    }

    fn random_hermitian(dims: &[usize], seed: u64) -> Operator {
        let m = random_op(dims, seed);
        m.hermitian_part()
    }

    #[test]
    fn tensor_identities() {
        let i2 = Operator::identity(&[2]);
        let t = tensor(&i2, &i2);
        assert_eq!(t.dims(), &[2, 2]);
        assert_eq!(t.max_abs_diff(&Operator::identity(&[2, 2])), 0.0);

        let t = tensor(&sigma_z(), &i2);
        let expected = Operator::from_diagonal(&[2, 2], &[1.0, 1.0, -1.0, -1.0]);
        assert_eq!(t.max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn tensor_index_formula_oracle() {
        let a = random_op(&[2], 7);
        let b = random_op(&[3], 8);
        let t = tensor(&a, &b);
        assert_eq!(t.dims(), &[2, 3]);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    for l in 0..3 {
                        let expected = a.entry(i, j) * b.entry(k, l);
                        assert_eq!(t.entry(i * 3 + k, j * 3 + l), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_associative_exactly_on_dyadic_entries() {
        let a = random_dyadic_op(&[2], 1);
        let b = random_dyadic_op(&[3], 2);
        let c = random_dyadic_op(&[2], 3);
        let left = tensor(&tensor(&a, &b), &c);
        let right = tensor(&a, &tensor(&b, &c));
        assert_eq!(left.entries(), right.entries());
        assert_eq!(left.dims(), right.dims());
    }

    #[test]
    fn partial_trace_product_factorization() {
        let a = random_op(&[2], 11);
        let b = random_op(&[3], 12);
        let t = tensor(&a, &b);
        let reduced = partial_trace(&t, &[0]).unwrap();
        let expected = a.scale(b.trace());
        assert!(reduced.max_abs_diff(&expected) <= 1e-12);

        let reduced_b = partial_trace(&t, &[1]).unwrap();
        let expected_b = b.scale(a.trace());
        assert!(reduced_b.max_abs_diff(&expected_b) <= 1e-12);
    }

    #[test]
    fn partial_trace_bell_marginal() {
        let bell = crate::states::bell_plus().projector();
        let reduced = partial_trace(&bell, &[0]).unwrap();
        let expected = Operator::identity(&[2]).scale_re(0.5);
        assert!(reduced.max_abs_diff(&expected) <= 1e-15);
    }

    #[test]
    fn partial_trace_matches_basis_sum_oracle() {
        let rho = crate::states::random_density(&[2, 2, 2], 8, 42);
        let reduced = partial_trace(rho.op(), &[0, 1]).unwrap();
        // Independent oracle: out[(ab),(a'b')] = sum_c m[(ab)c, (a'b')c].
        let m = rho.op();
        for row in 0..4 {
            for col in 0..4 {
                let mut acc = C64::ZERO;
                for c in 0..2 {
                    acc += m.entry(row * 2 + c, col * 2 + c);
                }
                assert!((reduced.entry(row, col) - acc).norm() <= 1e-14);
            }
        }
        assert!((reduced.trace() - C64::ONE).norm() <= 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_subsystem() {
        let m = random_op(&[2, 2], 5);
        assert!(matches!(
            partial_trace(&m, &[3]),
            Err(Error::InvalidSubsystem { .. })
        ));
        assert!(matches!(partial_trace(&m, &[]), Err(Error::EmptyKeepSet)));
    }

    #[test]
    fn commutator_basics() {
        let m = random_op(&[2, 2], 9);
        let id = Operator::identity(&[2, 2]);
        assert!(commutator(&id, &m).unwrap().max_abs() <= 1e-15);

        let c = commutator(&sigma_x(), &sigma_y()).unwrap();
        let expected = sigma_z().scale(C64::new(0.0, 2.0));
        assert_eq!(c.max_abs_diff(&expected), 0.0);

        let a = random_op(&[2, 2], 21);
        let b = random_op(&[2, 2], 22);
        let ab = commutator(&a, &b).unwrap();
        let ba = commutator(&b, &a).unwrap();
        assert_eq!(ab.entries(), ba.scale_re(-1.0).entries());
    }

    #[test]
    fn commutator_vanishes_for_classical_quantum_state() {
        let basis = crate::bases::OrthonormalBasis::computational(2);
        let rho_b0 = DensityMatrix::from_pure(&PureState::basis_ket(vec![2], 0));
        let plus = PureState::new(
            vec![2],
            vec![
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ],
        )
        .unwrap();
        let rho_b1 = DensityMatrix::from_pure(&plus);
        let cq = crate::states::classical_quantum(&[0.3, 0.7], &basis, &[rho_b0, rho_b1]).unwrap();
        for k in 0..2 {
            let pi = tensor(&basis.projector(k), &Operator::identity(&[2]));
            let c = commutator(&pi, cq.op()).unwrap();
            assert!(c.max_abs() <= 1e-15);
        }
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let a = random_op(&[2], 1);
        let b = random_op(&[3], 2);
        assert!(matches!(
            commutator(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hermitian_eig_diagonal() {
        let m = Operator::from_diagonal(&[2], &[0.7, 0.3]);
        let spec = hermitian_eig(&m).unwrap();
        assert!((spec.eigenvalues[0] - 0.7).abs() <= 1e-12);
        assert!((spec.eigenvalues[1] - 0.3).abs() <= 1e-12);
        // Computational eigenvectors up to phase.
        let v0 = spec.eigenvectors.ket(0);
        assert!((v0.amplitudes()[0].norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn hermitian_eig_degenerate() {
        let m = Operator::identity(&[2]).scale_re(0.5);
        let spec = hermitian_eig(&m).unwrap();
        assert!((spec.eigenvalues[0] - 0.5).abs() <= 1e-12);
        assert!((spec.eigenvalues[1] - 0.5).abs() <= 1e-12);
        assert!(spec.eigenvectors.gram_defect() <= 1e-10);
    }

    #[test]
    fn hermitian_eig_reconstruction_oracle() {
        for seed in 0..5u64 {
            let m = random_hermitian(&[2, 2], 100 + seed);
            let spec = hermitian_eig(&m).unwrap();
            let mut rebuilt = Operator::zeros(&[2, 2]);
            for (k, &lam) in spec.eigenvalues.iter().enumerate() {
                rebuilt = rebuilt.add(&spec.eigenvectors.projector(k).scale_re(lam));
            }
            assert!(rebuilt.max_abs_diff(&m) <= 1e-9);
            assert!(spec.eigenvectors.gram_defect() <= 1e-10);
            // Descending order.
            for w in spec.eigenvalues.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn hermitian_eig_rejects_non_hermitian() {
        let m = random_op(&[2], 3);
        assert!(matches!(
            hermitian_eig(&m),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn validate_density_accepts_maximally_mixed() {
        let m = Operator::identity(&[2]).scale_re(0.5);
        let dm = validate_density(m, 1e-9).unwrap();
        assert!(dm.hermiticity_defect() <= 1e-15);
        assert!(dm.trace_defect() <= 1e-15);
        assert!(dm.min_eigenvalue() >= -1e-15);
    }

    #[test]
    fn validate_density_rejects_sigma_z() {
        let err = validate_density(sigma_z(), 1e-9).unwrap_err();
        match err {
            Error::TraceNotOne { defect } => assert!((defect - 1.0).abs() <= 1e-12),
            other => panic!("expected TraceNotOne, got {other:?}"),
        }
    }

    #[test]
    fn validate_density_rejects_non_hermitian_and_negative() {
        let m = Operator::from_entries(
            vec![2],
            vec![C64::ONE, C64::ONE, C64::ZERO, C64::ZERO],
        )
        .unwrap();
        assert!(matches!(
            validate_density(m, 1e-9),
            Err(Error::NonHermitian { .. })
        ));

        let m = Operator::from_diagonal(&[2], &[1.5, -0.5]);
        assert!(matches!(
            validate_density(m, 1e-9),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn validate_density_clamp_rule_oracle() {
        let m = Operator::from_diagonal(&[2], &[1.000_000_000_5, -0.000_000_000_5]);
        let dm = validate_density(m, 1e-9).unwrap();
        let expected = Operator::from_diagonal(&[2], &[1.0, 0.0]);
        assert!(dm.op().max_abs_diff(&expected) <= 1e-12);
        assert!((dm.op().trace() - C64::ONE).norm() <= 1e-15);
        assert!(dm.min_eigenvalue() < 0.0 && dm.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn pure_state_norm_enforced() {
        let bad = PureState::new(vec![2], vec![C64::ONE, C64::ONE]);
        assert!(matches!(bad, Err(Error::NormDefect { .. })));
        let ok = PureState::normalized(vec![2], vec![C64::ONE, C64::ONE]).unwrap();
        assert!((ok.norm() - 1.0).abs() <= 1e-15);
    }
}
