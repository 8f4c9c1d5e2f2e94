//! Constructors for the state families and channels used throughout, plus
//! seeded random ensembles for property tests.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bases::OrthonormalBasis;
use crate::error::{Error, Result};
use crate::operator::{partial_trace, tensor, validate_density, DensityMatrix, Operator, PureState};

/// CPTP channel given by Kraus operators acting on a single party.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus_ops: Vec<Operator>,
    acting_party: usize,
}

impl KrausChannel {
    /// Validates trace preservation: sum K†K within 1e-10 of the identity.
    pub fn new(kraus_ops: Vec<Operator>, acting_party: usize) -> Result<Self> {
        if kraus_ops.is_empty() {
            return Err(Error::LengthMismatch {
                expected: 1,
                got: 0,
            });
        }
        let d = kraus_ops[0].side();
        let mut sum = Operator::zeros(kraus_ops[0].dims());
        for k in &kraus_ops {
            if k.side() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: k.side(),
                });
            }
            sum = sum.add(&k.adjoint().matmul(k));
        }
        let defect = sum.max_abs_diff(&Operator::identity(kraus_ops[0].dims()));
        if defect > 1e-10 {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(Self {
            kraus_ops,
            acting_party,
        })
    }

    pub fn kraus_ops(&self) -> &[Operator] {
        &self.kraus_ops
    }

    pub fn acting_party(&self) -> usize {
        self.acting_party
    }

    pub fn party_dim(&self) -> usize {
        self.kraus_ops[0].side()
    }
}

/// (|00> + |11>)/sqrt(2)
pub fn bell_plus() -> PureState {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    PureState::new(vec![2, 2], vec![h, C64::ZERO, C64::ZERO, h]).unwrap()
}

/// (|000> + |111>)/sqrt(2)
pub fn ghz() -> PureState {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amps = vec![C64::ZERO; 8];
    amps[0] = h;
    amps[7] = h;
    PureState::new(vec![2, 2, 2], amps).unwrap()
}

/// Two-qubit Werner state with its separability flag (separable iff p < 1/3).
#[derive(Debug, Clone)]
pub struct WernerState {
    pub rho: DensityMatrix,
    pub p: f64,
    pub separable: bool,
}

/// (1-p)/4 * I + p |Psi+><Psi+|
pub fn werner(p: f64) -> Result<WernerState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
        });
    }
    let bell = bell_plus().projector();
    let mixed = Operator::identity(&[2, 2]).scale_re((1.0 - p) / 4.0);
    let rho = validate_density(mixed.add(&bell.scale_re(p)), 1e-9)?;
    Ok(WernerState {
        rho,
        p,
        separable: p < 1.0 / 3.0,
    })
}

fn check_probs(probs: &[f64]) -> Result<()> {
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
    Ok(())
}

/// Classical-quantum state sum_k p_k |k><k|_A (x) rho_B^k on the given A
/// basis.
pub fn classical_quantum(
    probs: &[f64],
    basis_a: &OrthonormalBasis,
    states_b: &[DensityMatrix],
) -> Result<DensityMatrix> {
    check_probs(probs)?;
    let da = basis_a.dim();
    if probs.len() != da || states_b.len() != da {
        return Err(Error::LengthMismatch {
            expected: da,
            got: probs.len().min(states_b.len()),
        });
    }
    let db = states_b[0].side();
    let mut acc = Operator::zeros(&[da, db]);
    for k in 0..da {
        if states_b[k].side() != db {
            return Err(Error::DimensionMismatch {
                left: db,
                right: states_b[k].side(),
            });
        }
        let term = tensor(&basis_a.projector(k), states_b[k].op()).scale_re(probs[k]);
        acc = acc.add(&term);
    }
    validate_density(acc, 1e-9)
}

/// Classical-classical state sum_kl p_kl |k><k|_A (x) |l><l|_B.
/// `joint_probs` is indexed [k][l].
pub fn classical_classical(
    joint_probs: &[Vec<f64>],
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
) -> Result<DensityMatrix> {
    let da = basis_a.dim();
    let db = basis_b.dim();
    if joint_probs.len() != da || joint_probs.iter().any(|row| row.len() != db) {
        return Err(Error::LengthMismatch {
            expected: da * db,
            got: joint_probs.iter().map(|r| r.len()).sum(),
        });
    }
    let flat: Vec<f64> = joint_probs.iter().flatten().copied().collect();
    check_probs(&flat)?;
    let mut acc = Operator::zeros(&[da, db]);
    for k in 0..da {
        for l in 0..db {
            let term = tensor(&basis_a.projector(k), &basis_b.projector(l))
                .scale_re(joint_probs[k][l]);
            acc = acc.add(&term);
        }
    }
    validate_density(acc, 1e-9)
}

fn complex_gaussian_vec(rng: &mut ChaCha12Rng, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

/// Haar-distributed pure state from a normalized complex Gaussian vector.
pub fn random_pure(dims: &[usize], seed: u64) -> PureState {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n: usize = dims.iter().product();
    loop {
        let amps = complex_gaussian_vec(&mut rng, n);
        if let Ok(psi) = PureState::normalized(dims.to_vec(), amps) {
            return psi;
        }
    }
}

/// Random density matrix by tracing an ancilla of dimension `rank` out of a
/// larger Haar-random pure state (induced measure).
pub fn random_density(dims: &[usize], rank: usize, seed: u64) -> DensityMatrix {
    assert!(rank >= 1);
    let mut full_dims = dims.to_vec();
    full_dims.push(rank);
    let psi = random_pure(&full_dims, seed);
    let keep: Vec<usize> = (0..dims.len()).collect();
    let reduced = partial_trace(&psi.projector(), &keep).unwrap();
    validate_density(reduced, 1e-9).expect("induced random state is valid")
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the standard
/// phase fix on the diagonal of R.
pub fn haar_unitary(d: usize, seed: u64) -> Operator {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let g = complex_gaussian_vec(&mut rng, d * d);
    let m = nalgebra::DMatrix::from_row_slice(d, d, &g);
    let qr = m.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = Operator::zeros(&[d]);
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() == 0.0 {
            C64::ONE
        } else {
            rjj / rjj.norm()
        };
        for i in 0..d {
            u.set(i, j, q[(i, j)] * phase);
        }
    }
    u
}

/// Apply a single-party Kraus channel: sum_k (I (x) K_k) rho (I (x) K_k)†.
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel) -> Result<DensityMatrix> {
    let parties = rho.dims().len();
    if ch.acting_party >= parties {
        return Err(Error::InvalidSubsystem {
            index: ch.acting_party,
            count: parties,
        });
    }
    if rho.dims()[ch.acting_party] != ch.party_dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dims()[ch.acting_party],
            right: ch.party_dim(),
        });
    }
    let mut acc = Operator::zeros(rho.dims());
    for k in ch.kraus_ops() {
        let mut emb: Option<Operator> = None;
        for p in 0..parties {
            let factor = if p == ch.acting_party {
                k.clone()
            } else {
                Operator::identity(&[rho.dims()[p]])
            };
            emb = Some(match emb {
                None => factor,
                Some(prev) => tensor(&prev, &factor),
            });
        }
        let emb = emb.unwrap();
        acc = acc.add(&emb.matmul(rho.op()).matmul(&emb.adjoint()));
    }
    validate_density(acc, 1e-9)
}

/// Qubit depolarizing channel: rho -> (1-lambda) rho + lambda I/2.
pub fn depolarizing(lambda: f64, acting_party: usize) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange {
            name: "lambda",
            value: lambda,
        });
    }
    let w0 = (1.0 - 0.75 * lambda).sqrt();
    let w = (0.25 * lambda).sqrt();
    KrausChannel::new(
        vec![
            Operator::identity(&[2]).scale_re(w0),
            crate::operator::sigma_x().scale_re(w),
            crate::operator::sigma_y().scale_re(w),
            crate::operator::sigma_z().scale_re(w),
        ],
        acting_party,
    )
}

/// Qubit amplitude-damping channel with decay probability gamma.
pub fn amplitude_damping(gamma: f64, acting_party: usize) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
        });
    }
    let k0 = Operator::from_entries(
        vec![2],
        vec![
            C64::ONE,
            C64::ZERO,
            C64::ZERO,
            C64::new((1.0 - gamma).sqrt(), 0.0),
        ],
    )
    .unwrap();
    let k1 = Operator::from_entries(
        vec![2],
        vec![
            C64::ZERO,
            C64::new(gamma.sqrt(), 0.0),
            C64::ZERO,
            C64::ZERO,
        ],
    )
    .unwrap();
    KrausChannel::new(vec![k0, k1], acting_party)
}

/// Qubit phase-damping channel with dephasing probability gamma.
pub fn phase_damping(gamma: f64, acting_party: usize) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
        });
    }
    let k0 = Operator::from_entries(
        vec![2],
        vec![
            C64::ONE,
            C64::ZERO,
            C64::ZERO,
            C64::new((1.0 - gamma).sqrt(), 0.0),
        ],
    )
    .unwrap();
    let k1 = Operator::from_entries(
        vec![2],
        vec![C64::ZERO, C64::ZERO, C64::ZERO, C64::new(gamma.sqrt(), 0.0)],
    )
    .unwrap();
    KrausChannel::new(vec![k0, k1], acting_party)
}
