//! Density matrices over declared bases, partial traces and fidelities.
//!
//! Mixed states appear after photon loss and after heralding; everything
//! upstream of those steps stays pure and sparse.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState, IonPair, JointState, ModeRegister};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Which ion a single-qubit basis refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IonSite {
    A,
    B,
}

/// The basis a [`DensityMatrix`] is expressed in.
#[derive(Clone, Debug, PartialEq)]
pub enum Basis {
    /// Both ion qubits, A-major: `s1s1, s1s2, s2s1, s2s2`.
    IonPair,
    /// A single ion qubit: `s1, s2`.
    SingleIon(IonSite),
    /// Two generic two-level systems, basis `gg, ge, eg, ee`. Used by the
    /// single-photon reference scheme.
    TwoLevelPair,
    /// Photonic Fock sector over `register`, enumerated by `states`.
    Photon {
        register: ModeRegister,
        states: Vec<FockState>,
    },
    /// Ion pair tensor photonic sector, ion-major:
    /// index = ion.index() * states.len() + fock index.
    Joint {
        register: ModeRegister,
        states: Vec<FockState>,
    },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::IonPair | Basis::TwoLevelPair => 4,
            Basis::SingleIon(_) => 2,
            Basis::Photon { states, .. } => states.len(),
            Basis::Joint { states, .. } => 4 * states.len(),
        }
    }
}

/// Which tensor factor to keep in a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    IonA,
    IonB,
    Ions,
    Photons,
    All,
}

/// Hermitian positive matrix over a declared basis. The trace equals 1 for
/// normalized states or the branch weight for subnormalized conditional
/// states.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    basis: Basis,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(basis: Basis, mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: mat.nrows(),
            });
        }
        Ok(Self { basis, mat })
    }

    pub fn from_pure(basis: Basis, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: amplitudes.len(),
            });
        }
        let dim = amplitudes.len();
        let mat = DMatrix::from_fn(dim, dim, |i, j| amplitudes[i] * amplitudes[j].conj());
        Ok(Self { basis, mat })
    }

    /// 4×4 ion-pair density matrix from row-major real and imaginary
    /// parts, as used at the C boundary and in JSON reports.
    pub fn ion_pair_from_parts(re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != 16 || im.len() != 16 {
            return Err(Error::DimensionMismatch {
                expected: 16,
                got: re.len().min(im.len()),
            });
        }
        let mat = DMatrix::from_fn(4, 4, |i, j| Complex64::new(re[i * 4 + j], im[i * 4 + j]));
        for entry in mat.iter() {
            if !entry.re.is_finite() || !entry.im.is_finite() {
                return Err(Error::InvalidParameter(
                    "density matrix entries must be finite".into(),
                ));
            }
        }
        Ok(Self {
            basis: Basis::IonPair,
            mat,
        })
    }

    pub fn maximally_mixed(basis: Basis) -> Self {
        let dim = basis.dim();
        let mat = DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0));
        Self { basis, mat }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    /// Trace (the state weight; 1 for normalized states).
    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let adj = self.mat.adjoint();
        let mut dev: f64 = 0.0;
        for i in 0..self.mat.nrows() {
            for j in 0..self.mat.ncols() {
                dev = dev.max((self.mat[(i, j)] - adj[(i, j)]).norm());
            }
        }
        dev
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        // Symmetrize first so the eigensolver sees an exactly Hermitian
        // matrix; the deviation is bounded by hermiticity_deviation().
        let herm = (&self.mat + self.mat.adjoint()).scale(0.5);
        let mut evals: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        evals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        evals
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Checks hermiticity, trace against `expected_trace`, and positivity.
    pub fn validate(&self, expected_trace: f64) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix not Hermitian (deviation {dev:e})"
            )));
        }
        let tr = self.trace();
        if (tr - expected_trace).abs() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!(
                "trace {tr} differs from expected {expected_trace}"
            )));
        }
        let min = self.min_eigenvalue();
        if min < EIGENVALUE_FLOOR {
            return Err(Error::InvalidParameter(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            basis: self.basis.clone(),
            mat: self.mat.scale(factor),
        }
    }

    pub fn normalized(&self) -> Self {
        self.scaled(1.0 / self.trace())
    }

    /// Convex mixture Σ wᵢ ρᵢ. All matrices must share the basis dimension.
    pub fn mix(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut mat = DMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: rho.dim(),
                });
            }
            mat += rho.mat.scale(*w);
        }
        Ok(Self {
            basis: first.1.basis.clone(),
            mat,
        })
    }

    /// ⟨target|ρ|target⟩ for a pure target state.
    pub fn fidelity(&self, target: &[Complex64]) -> Result<f64> {
        if target.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: target.len(),
            });
        }
        let mut value = Complex64::ZERO;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                value += target[i].conj() * self.mat[(i, j)] * target[j];
            }
        }
        // Rounding can push a pure-state fidelity a few ulp outside [0,1];
        // snap those back without masking real violations.
        let f = value.re;
        let f = if (-1e-9..0.0).contains(&f) {
            0.0
        } else if (1.0..=1.0 + 1e-9).contains(&f) {
            1.0
        } else {
            f
        };
        Ok(f)
    }

    /// Half the trace norm of ρ − σ.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let diff = Self {
            basis: self.basis.clone(),
            mat: &self.mat - &other.mat,
        };
        Ok(diff.eigenvalues().iter().map(|v| v.abs()).sum::<f64>() / 2.0)
    }

    /// Traces out everything except `keep`. Defined for `Joint` bases; for
    /// any basis `Keep::All` is the identity, and for `IonPair` the single
    /// ion reductions are available.
    pub fn partial_trace(&self, keep: Keep) -> Result<DensityMatrix> {
        if keep == Keep::All {
            return Ok(self.clone());
        }
        match (&self.basis, keep) {
            (Basis::Joint { states, .. }, Keep::Ions) => {
                let n = states.len();
                let mat = DMatrix::from_fn(4, 4, |i, ip| {
                    (0..n).map(|f| self.mat[(i * n + f, ip * n + f)]).sum()
                });
                Ok(DensityMatrix {
                    basis: Basis::IonPair,
                    mat,
                })
            }
            (Basis::Joint { register, states }, Keep::Photons) => {
                let n = states.len();
                let mat = DMatrix::from_fn(n, n, |f, fp| {
                    (0..4).map(|i| self.mat[(i * n + f, i * n + fp)]).sum()
                });
                Ok(DensityMatrix {
                    basis: Basis::Photon {
                        register: register.clone(),
                        states: states.clone(),
                    },
                    mat,
                })
            }
            (Basis::Joint { .. }, Keep::IonA | Keep::IonB) => {
                self.partial_trace(Keep::Ions)?.partial_trace(keep)
            }
            (Basis::IonPair, Keep::IonA) => {
                let mat = DMatrix::from_fn(2, 2, |a, ap| {
                    (0..2).map(|b| self.mat[(a * 2 + b, ap * 2 + b)]).sum()
                });
                Ok(DensityMatrix {
                    basis: Basis::SingleIon(IonSite::A),
                    mat,
                })
            }
            (Basis::IonPair, Keep::IonB) => {
                let mat = DMatrix::from_fn(2, 2, |b, bp| {
                    (0..2).map(|a| self.mat[(a * 2 + b, a * 2 + bp)]).sum()
                });
                Ok(DensityMatrix {
                    basis: Basis::SingleIon(IonSite::B),
                    mat,
                })
            }
            (Basis::IonPair, Keep::Ions) => Ok(self.clone()),
            _ => Err(Error::InvalidParameter(format!(
                "partial trace keeping {keep:?} is not defined on this basis"
            ))),
        }
    }
}

impl JointState {
    /// Dense density matrix of the full ion ⊗ photon state. The photonic
    /// basis is the sorted Fock support of the state.
    pub fn density_matrix(&self) -> DensityMatrix {
        let states: Vec<FockState> = {
            let mut v: Vec<FockState> = self.terms().map(|(_, f, _)| f.clone()).collect();
            v.sort();
            v.dedup();
            v
        };
        let n = states.len().max(1);
        let states = if states.is_empty() {
            vec![FockState::vacuum(self.register().len())]
        } else {
            states
        };
        let mut vec = vec![Complex64::ZERO; 4 * n];
        for (ions, fock, amp) in self.terms() {
            let f = states.binary_search(fock).expect("fock state in basis");
            vec[ions.index() * n + f] = *amp;
        }
        let mat = DMatrix::from_fn(4 * n, 4 * n, |i, j| vec[i] * vec[j].conj());
        DensityMatrix {
            basis: Basis::Joint {
                register: self.register().clone(),
                states,
            },
            mat,
        }
    }

    /// Partial trace of the pure joint state, computed directly from the
    /// sparse amplitudes.
    pub fn partial_trace(&self, keep: Keep) -> DensityMatrix {
        match keep {
            Keep::Ions => {
                let mut mat = DMatrix::zeros(4, 4);
                let by_fock = self.group_by_fock();
                for (_, v) in by_fock {
                    for i in 0..4 {
                        for j in 0..4 {
                            mat[(i, j)] += v[i] * v[j].conj();
                        }
                    }
                }
                DensityMatrix {
                    basis: Basis::IonPair,
                    mat,
                }
            }
            Keep::IonA | Keep::IonB => self
                .partial_trace(Keep::Ions)
                .partial_trace(keep)
                .expect("ion reduction"),
            Keep::Photons | Keep::All => {
                let dm = self.density_matrix();
                dm.partial_trace(keep).expect("joint reduction")
            }
        }
    }

    /// Groups amplitudes by Fock state into length-4 ion amplitude vectors.
    pub(crate) fn group_by_fock(&self) -> Vec<(FockState, [Complex64; 4])> {
        let mut out: Vec<(FockState, [Complex64; 4])> = Vec::new();
        for (ions, fock, amp) in self.terms() {
            match out.binary_search_by(|(f, _)| f.cmp(fock)) {
                Ok(pos) => out[pos].1[ions.index()] += amp,
                Err(pos) => {
                    let mut v = [Complex64::ZERO; 4];
                    v[ions.index()] = *amp;
                    out.insert(pos, (fock.clone(), v));
                }
            }
        }
        out
    }
}

/// Basis vector index of an ion pair configuration.
pub fn ion_index(ions: IonPair) -> usize {
    ions.index()
}
