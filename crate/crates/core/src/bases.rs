//! Parameterized local orthonormal bases and product postselection bases.
//!
//! Qubit bases use the two-angle form
//! |phi+> = cos(a/2)|0> + sin(a/2) e^{ib} |1>,
//! |phi-> = sin(a/2)|0> - cos(a/2) e^{ib} |1>,
//! with 0 <= a <= pi and 0 <= b <= 2pi. For d >= 3 a basis is the column
//! set of exp(iH) with H Hermitian described by d^2 real coefficients.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{eig_hermitian_raw, Operator, PureState};

/// Gram-matrix tolerance for orthonormal bases.
pub const GRAM_TOL: f64 = 1e-10;

/// Ordered complete set of orthonormal kets of one Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    kets: Vec<PureState>,
}

impl OrthonormalBasis {
    /// Requires a complete basis: d kets of dimension d with Gram matrix
    /// within `GRAM_TOL` of the identity.
    pub fn new(kets: Vec<PureState>) -> Result<Self> {
        if kets.is_empty() {
            return Err(Error::LengthMismatch {
                expected: 1,
                got: 0,
            });
        }
        let d = kets[0].dim();
        if kets.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                got: kets.len(),
            });
        }
        let mut defect = 0.0f64;
        for i in 0..d {
            if kets[i].dim() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: kets[i].dim(),
                });
            }
            for j in 0..d {
                let g = kets[i].inner(&kets[j]);
                let target = if i == j { C64::ONE } else { C64::ZERO };
                defect = defect.max((g - target).norm());
            }
        }
        if defect > GRAM_TOL {
            return Err(Error::GramDefect { defect });
        }
        Ok(Self { kets })
    }

    pub fn computational(d: usize) -> Self {
        let kets = (0..d).map(|k| PureState::basis_ket(vec![d], k)).collect();
        Self { kets }
    }

    /// Discrete Fourier basis; mutually unbiased with the computational one.
    pub fn fourier(d: usize) -> Self {
        let w = 2.0 * std::f64::consts::PI / d as f64;
        let norm = 1.0 / (d as f64).sqrt();
        let kets = (0..d)
            .map(|k| {
                let amps = (0..d)
                    .map(|j| C64::from_polar(norm, w * (j * k) as f64))
                    .collect();
                PureState::new(vec![d], amps).unwrap()
            })
            .collect();
        Self { kets }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.kets.len()
    }

    #[inline]
    pub fn kets(&self) -> &[PureState] {
        &self.kets
    }

    #[inline]
    pub fn ket(&self, k: usize) -> &PureState {
        &self.kets[k]
    }

    /// Rank-1 projector onto the k-th ket.
    pub fn projector(&self, k: usize) -> Operator {
        self.kets[k].projector()
    }

    pub fn gram_defect(&self) -> f64 {
        let d = self.dim();
        let mut defect = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let g = self.kets[i].inner(&self.kets[j]);
                let target = if i == j { C64::ONE } else { C64::ZERO };
                defect = defect.max((g - target).norm());
            }
        }
        defect
    }

    /// Unitary whose k-th column is the k-th ket.
    pub fn to_unitary(&self) -> Operator {
        let d = self.dim();
        Operator::from_fn(&[d], |i, j| self.kets[j].amplitudes()[i])
    }
}

/// One local basis per party; joint kets are tensor products indexed
/// lexicographically.
#[derive(Debug, Clone)]
pub struct ProductBasis {
    locals: Vec<OrthonormalBasis>,
}

/// Assemble a product basis from per-party local bases.
pub fn product_basis(locals: Vec<OrthonormalBasis>) -> Result<ProductBasis> {
    if locals.is_empty() {
        return Err(Error::LengthMismatch {
            expected: 1,
            got: 0,
        });
    }
    Ok(ProductBasis { locals })
}

impl ProductBasis {
    #[inline]
    pub fn locals(&self) -> &[OrthonormalBasis] {
        &self.locals
    }

    pub fn party_dims(&self) -> Vec<usize> {
        self.locals.iter().map(|b| b.dim()).collect()
    }

    /// Number of joint kets (product of local dimensions).
    pub fn len(&self) -> usize {
        self.locals.iter().map(|b| b.dim()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Joint ket at lexicographic index `k` (leftmost party most significant).
    pub fn joint_ket(&self, k: usize) -> PureState {
        let dims = self.party_dims();
        let mut idx = k;
        let mut locals_idx = vec![0usize; dims.len()];
        for p in (0..dims.len()).rev() {
            locals_idx[p] = idx % dims[p];
            idx /= dims[p];
        }
        let mut ket = self.locals[0].ket(locals_idx[0]).clone();
        for p in 1..dims.len() {
            ket = PureState::tensor(&ket, self.locals[p].ket(locals_idx[p]));
        }
        ket
    }

    pub fn joint_kets(&self) -> Vec<PureState> {
        (0..self.len()).map(|k| self.joint_ket(k)).collect()
    }
}

/// Real parameter vector describing one local basis of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisParams {
    values: Vec<f64>,
    dim: usize,
}

/// Parameter count for a basis of dimension d: an angle pair for qubits,
/// d^2 Hermitian-generator coefficients otherwise.
pub fn param_len(d: usize) -> usize {
    match d {
        0 | 1 => 0,
        2 => 2,
        _ => d * d,
    }
}

impl BasisParams {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != param_len(dim) {
            return Err(Error::LengthMismatch {
                expected: param_len(dim),
                got: values.len(),
            });
        }
        Ok(Self { values, dim })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Postselection basis of a qubit, Bloch angles (alpha, beta).
pub fn qubit_basis(alpha: f64, beta: f64) -> OrthonormalBasis {
    let [k0, k1] = qubit_kets_raw(alpha, beta);
    OrthonormalBasis {
        kets: vec![
            PureState::new(vec![2], k0.to_vec()).unwrap(),
            PureState::new(vec![2], k1.to_vec()).unwrap(),
        ],
    }
}

/// Measurement basis of a qubit, angles (theta, eta); same construction as
/// `qubit_basis`.
pub fn measurement_basis_qubit(theta: f64, eta: f64) -> OrthonormalBasis {
    qubit_basis(theta, eta)
}

/// The two kets of the qubit parameterization without any wrapper types.
#[inline]
pub fn qubit_kets_raw(alpha: f64, beta: f64) -> [[C64; 2]; 2] {
    let (ha_sin, ha_cos) = (alpha * 0.5).sin_cos();
    let phase = C64::from_polar(1.0, beta);
    [
        [C64::new(ha_cos, 0.0), phase * ha_sin],
        [C64::new(ha_sin, 0.0), -phase * ha_cos],
    ]
}

/// Columns of exp(iH) where H is the Hermitian matrix encoded by `coeffs`:
/// d diagonal reals followed by (re, im) pairs for each i < j.
pub fn unitary_from_hermitian_params(d: usize, coeffs: &[f64]) -> Operator {
    assert_eq!(coeffs.len(), d * d);
    let mut h = Operator::zeros(&[d]);
    for i in 0..d {
        h.set(i, i, C64::new(coeffs[i], 0.0));
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let v = C64::new(coeffs[k], coeffs[k + 1]);
            k += 2;
            h.set(i, j, v);
            h.set(j, i, v.conj());
        }
    }
    let (vals, vecs) = eig_hermitian_raw(&h);
    // exp(iH) = V diag(e^{i lambda}) V^dagger
    let mut u = Operator::zeros(&[d]);
    for (m, &lam) in vals.iter().enumerate() {
        let phase = C64::from_polar(1.0, lam);
        let v = &vecs[m];
        for i in 0..d {
            let vi = v[i] * phase;
            for j in 0..d {
                let val = u.entry(i, j) + vi * v[j].conj();
                u.set(i, j, val);
            }
        }
    }
    u
}

/// Basis described by `p`: the qubit angle pair for d = 2, otherwise the
/// columns of exp(iH).
pub fn basis_from_params(p: &BasisParams) -> OrthonormalBasis {
    match p.dim {
        0 | 1 => OrthonormalBasis::computational(p.dim.max(1)),
        2 => qubit_basis(p.values[0], p.values[1]),
        d => {
            let u = unitary_from_hermitian_params(d, &p.values);
            let kets = (0..d)
                .map(|k| {
                    let amps = (0..d).map(|i| u.entry(i, k)).collect();
                    PureState::normalized(vec![d], amps).unwrap()
                })
                .collect();
            OrthonormalBasis { kets }
        }
    }
}

/// True iff every overlap magnitude |<a_i|b_j>| is within `tol` of 1/sqrt(d).
pub fn is_mutually_unbiased(a: &OrthonormalBasis, b: &OrthonormalBasis, tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let target = 1.0 / (a.dim() as f64).sqrt();
    for ka in a.kets() {
        for kb in b.kets() {
            if (ka.inner(kb).norm() - target).abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Wrap qubit angles into the canonical ranges alpha in [0, pi],
/// beta in [0, 2pi); the projector pair is unchanged.
pub fn canonicalize_qubit_angles(alpha: f64, beta: f64) -> (f64, f64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut a = alpha.rem_euclid(two_pi);
    let mut b = beta;
    if a > std::f64::consts::PI {
        a = two_pi - a;
        b += std::f64::consts::PI;
    }
    (a, b.rem_euclid(two_pi))
}

/// Angle pair whose `qubit_basis` reproduces the given basis as a projector
/// set (Bloch-vector inversion of the first ket's projector).
pub fn qubit_params_for_basis(basis: &OrthonormalBasis) -> [f64; 2] {
    let p = basis.projector(0);
    let rx = 2.0 * p.entry(0, 1).re;
    let ry = -2.0 * p.entry(0, 1).im;
    let rz = (p.entry(0, 0) - p.entry(1, 1)).re;
    let alpha = rz.clamp(-1.0, 1.0).acos();
    let beta = if rx == 0.0 && ry == 0.0 {
        0.0
    } else {
        ry.atan2(rx).rem_euclid(2.0 * std::f64::consts::PI)
    };
    [alpha, beta]
}

/// Hermitian-generator coefficients approximating the given basis for
/// d >= 3, found through a principal logarithm of its unitary. Used to seed
/// optimizers; exact whenever the log is nondegenerate.
pub fn params_for_basis(basis: &OrthonormalBasis) -> BasisParams {
    let d = basis.dim();
    if d == 2 {
        return BasisParams::new(2, qubit_params_for_basis(basis).to_vec()).unwrap();
    }
    if d < 2 {
        return BasisParams::new(d, vec![]).unwrap();
    }
    let v = basis.to_unitary();
    let vd = v.adjoint();
    // A = (V + V†)/2 and B = (V - V†)/2i commute for unitary V; a generic
    // combination has the joint eigenvectors.
    let a = v.add(&vd).scale_re(0.5);
    let b = v.sub(&vd).scale(C64::new(0.0, -0.5));
    let gamma = std::f64::consts::SQRT_2 - 1.0;
    let m = a.add(&b.scale_re(gamma));
    let (_, w) = eig_hermitian_raw(&m);
    let n = d;
    let mut h = Operator::zeros(&[d]);
    for wk in &w {
        // Rayleigh quotient picks the eigenphase of V on this eigenvector.
        let mut vq = C64::ZERO;
        for i in 0..n {
            let mut s = C64::ZERO;
            for j in 0..n {
                s += v.entry(i, j) * wk[j];
            }
            vq += wk[i].conj() * s;
        }
        let lam = vq.im.atan2(vq.re);
        for i in 0..n {
            for j in 0..n {
                let val = h.entry(i, j) + wk[i] * wk[j].conj() * lam;
                h.set(i, j, val);
            }
        }
    }
    let mut coeffs = vec![0.0; d * d];
    for i in 0..d {
        coeffs[i] = h.entry(i, i).re;
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            coeffs[k] = h.entry(i, j).re;
            coeffs[k + 1] = h.entry(i, j).im;
            k += 2;
        }
    }
    BasisParams::new(d, coeffs).unwrap()
}
