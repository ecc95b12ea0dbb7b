//! Kraus-operator channels.
//!
//! Channels are represented only by their Kraus operators. The synthetic
//! constructors at the bottom of the module also record where the true
//! decoherence-free subspaces sit at the channel input; that record is kept
//! apart from the channel so the protocol can never see it.

use serde::{Deserialize, Serialize};

use crate::qmath::{
    max_abs_diff, trace_product, unitarity_error, CMatrix, Complex64, DensityMatrix, Ket, Subspace,
    STRICT_TOL,
};
use crate::{Error, Result};

/// A completely positive, trace-preserving map `ρ ↦ Σ K ρ K†`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    dim: usize,
    label: String,
}

/// A completely positive map given by Kraus operators, without the
/// trace-preservation requirement (adjoints of non-unital channels).
#[derive(Debug, Clone)]
pub struct KrausMap {
    ops: Vec<CMatrix>,
    dim: usize,
}

fn check_square(ops: &[CMatrix]) -> Result<usize> {
    let Some(first) = ops.first() else {
        return Err(Error::InvalidSpec("no Kraus operators".into()));
    };
    let d = first.nrows();
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    for k in ops {
        if k.nrows() != d || k.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: k.nrows().max(k.ncols()),
            });
        }
    }
    Ok(d)
}

fn kraus_sum(ops: &[CMatrix], m: &CMatrix) -> CMatrix {
    let d = m.nrows();
    ops.iter()
        .fold(CMatrix::zeros(d, d), |acc, k| acc + k * m * k.adjoint())
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>, label: impl Into<String>) -> Result<Self> {
        let dim = check_square(&ops)?;
        let ch = KrausChannel {
            ops,
            dim,
            label: label.into(),
        };
        let err = ch.completeness_error();
        if err > STRICT_TOL {
            return Err(Error::NotTracePreserving(err));
        }
        Ok(ch)
    }

    pub fn identity(d: usize) -> Result<Self> {
        KrausChannel::new(vec![CMatrix::identity(d, d)], "identity")
    }

    pub fn unitary(u: CMatrix, label: impl Into<String>) -> Result<Self> {
        let err = unitarity_error(&u);
        if err > STRICT_TOL {
            return Err(Error::NotUnitary(err));
        }
        KrausChannel::new(vec![u], label)
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `‖Σ K†K − I‖_max`.
    pub fn completeness_error(&self) -> f64 {
        let sum = self
            .ops
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, k| {
                acc + k.adjoint() * k
            });
        max_abs_diff(&sum, &CMatrix::identity(self.dim, self.dim))
    }

    /// `‖ε(I) − I‖_max`; zero for unital channels.
    pub fn unitality_error(&self) -> f64 {
        let id = CMatrix::identity(self.dim, self.dim);
        max_abs_diff(&kraus_sum(&self.ops, &id), &id)
    }

    pub fn is_unital(&self) -> bool {
        self.unitality_error() <= STRICT_TOL
    }

    /// Whether every Kraus operator is Hermitian, in which case the channel
    /// is its own adjoint.
    pub fn has_hermitian_kraus(&self) -> bool {
        self.ops
            .iter()
            .all(|k| max_abs_diff(k, &k.adjoint()) <= STRICT_TOL)
    }

    /// `Σ K M K†` for an arbitrary operator `M`.
    pub fn apply_operator(&self, m: &CMatrix) -> Result<CMatrix> {
        self.check_dim(m.nrows())?;
        Ok(kraus_sum(&self.ops, m))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_dim(rho.dim())?;
        DensityMatrix::new(kraus_sum(&self.ops, rho.matrix()))
    }

    /// Heisenberg-picture map `O ↦ Σ K† O K`.
    pub fn adjoint(&self) -> KrausMap {
        KrausMap {
            ops: self.ops.iter().map(|k| k.adjoint()).collect(),
            dim: self.dim,
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: d,
            });
        }
        Ok(())
    }
}

impl KrausMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn apply_operator(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.nrows(),
            });
        }
        Ok(kraus_sum(&self.ops, m))
    }
}

/// `ε(ρ)`.
pub fn apply(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.apply(rho)
}

/// `ε†`.
pub fn adjoint(ch: &KrausChannel) -> KrausMap {
    ch.adjoint()
}

/// The two-qubit swap `S|ab⟩ = |ba⟩`.
pub fn swap_operator() -> CMatrix {
    let mut s = CMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            s[(2 * b + a, 2 * a + b)] = Complex64::new(1.0, 0.0);
        }
    }
    s
}

/// The sometimes-swap channel `(1−p) ρ + p SρS`.
pub fn sswap(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let mut ops = Vec::with_capacity(2);
    if p < 1.0 {
        ops.push(CMatrix::identity(4, 4).scale((1.0 - p).sqrt()));
    }
    if p > 0.0 {
        ops.push(swap_operator().scale(p.sqrt()));
    }
    KrausChannel::new(ops, format!("sswap(p={p})"))
}

/// An inner channel sandwiched between unitaries, `ρ ↦ U₂ ε(U₁ρU₁†) U₂†`.
#[derive(Debug, Clone)]
pub struct DressedChannelSpec {
    pub inner: KrausChannel,
    pub u1: CMatrix,
    pub u2: CMatrix,
}

pub fn dressed(spec: &DressedChannelSpec) -> Result<KrausChannel> {
    let d = spec.inner.dim();
    for u in [&spec.u1, &spec.u2] {
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: u.nrows().max(u.ncols()),
            });
        }
        let err = unitarity_error(u);
        if err > STRICT_TOL {
            return Err(Error::NotUnitary(err));
        }
    }
    let ops = spec
        .inner
        .ops()
        .iter()
        .map(|k| &spec.u2 * k * &spec.u1)
        .collect();
    KrausChannel::new(ops, format!("dressed({})", spec.inner.label()))
}

/// Block structure for a dephasing test channel: consecutive computational
/// basis blocks of the given sizes, with residual inter-block coherence `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub block_dims: Vec<usize>,
    pub coherence: f64,
}

impl BlockSpec {
    pub fn validate(&self) -> Result<usize> {
        if self.block_dims.is_empty() || self.block_dims.contains(&0) {
            return Err(Error::InvalidSpec(
                "block dimensions must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.coherence) {
            return Err(Error::InvalidSpec(format!(
                "coherence {} outside [0, 1]",
                self.coherence
            )));
        }
        Ok(self.block_dims.iter().sum())
    }

    /// Index ranges of each block.
    pub fn ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.block_dims
            .iter()
            .map(|&k| {
                let r = start..start + k;
                start += k;
                r
            })
            .collect()
    }
}

/// `ρ ↦ U₂[λσ + (1−λ) Σ P_i σ P_i]U₂†` with `σ = U₁ρU₁†`.
pub fn block_dephasing(spec: &BlockSpec, u1: &CMatrix, u2: &CMatrix) -> Result<KrausChannel> {
    let d = spec.validate()?;
    for u in [u1, u2] {
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: u.nrows().max(u.ncols()),
            });
        }
    }
    let lambda = spec.coherence;
    let mut ops = Vec::new();
    if lambda > 0.0 {
        ops.push((u2 * u1).scale(lambda.sqrt()));
    }
    if lambda < 1.0 {
        for r in spec.ranges() {
            let mut p = CMatrix::zeros(d, d);
            for i in r {
                p[(i, i)] = Complex64::new(1.0, 0.0);
            }
            ops.push((u2 * p * u1).scale((1.0 - lambda).sqrt()));
        }
    }
    KrausChannel::new(
        ops,
        format!("block{:?}(λ={})", spec.block_dims, spec.coherence),
    )
}

/// `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> Ket {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ket::from_real(&[0.0, h, -h, 0.0]).expect("nonzero")
}

/// `{|00⟩, |11⟩, (|01⟩ + |10⟩)/√2}`.
pub fn triplet_span() -> Subspace {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Subspace::new(vec![
        Ket::basis(4, 0).expect("d=4"),
        Ket::basis(4, 3).expect("d=4"),
        Ket::from_real(&[0.0, h, h, 0.0]).expect("nonzero"),
    ])
    .expect("orthonormal")
}

/// Unitary whose columns are `|00⟩, |11⟩, |ψ+⟩, |ψ−⟩`: maps the
/// computational blocks `[3, 1]` onto the triplet span and the singlet.
pub fn triplet_singlet_basis() -> CMatrix {
    let mut w = CMatrix::zeros(4, 4);
    let cols: Vec<Ket> = triplet_span()
        .basis()
        .iter()
        .cloned()
        .chain(std::iter::once(singlet()))
        .collect();
    for (j, k) in cols.iter().enumerate() {
        w.set_column(j, k.amplitudes());
    }
    w
}

/// Input-side decoherence-free subspaces of a synthetic channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub blocks: Vec<Subspace>,
}

impl GroundTruth {
    /// The first one-dimensional block, if any.
    pub fn one_dimensional(&self) -> Option<&Ket> {
        self.blocks
            .iter()
            .find(|b| b.dim() == 1)
            .map(|b| &b.basis()[0])
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Subspace::dim).collect()
    }
}

/// A channel together with its known DFS decomposition.
#[derive(Debug, Clone)]
pub struct SyntheticChannel {
    pub channel: KrausChannel,
    pub truth: GroundTruth,
}

fn rotate_back(u1: &CMatrix, s: &Subspace) -> Result<Subspace> {
    let u1_dag = u1.adjoint();
    let vecs: Vec<Ket> = s
        .basis()
        .iter()
        .map(|k| k.transformed(&u1_dag))
        .collect::<Result<_>>()?;
    Subspace::new(vecs)
}

/// Dressed sometimes-swap. The input DFSs are `U₁†|ψ_s⟩` and `U₁†`(triplet span).
pub fn synthetic_sswap(p: f64, u1: CMatrix, u2: CMatrix) -> Result<SyntheticChannel> {
    let spec = DressedChannelSpec {
        inner: sswap(p)?,
        u1,
        u2,
    };
    let channel = dressed(&spec)?;
    let singlet_block = Subspace::new(vec![singlet()])?;
    let truth = GroundTruth {
        blocks: vec![
            rotate_back(&spec.u1, &singlet_block)?,
            rotate_back(&spec.u1, &triplet_span())?,
        ],
    };
    Ok(SyntheticChannel { channel, truth })
}

/// Block-dephasing channel. Input DFS `i` is `U₁†` applied to the i-th
/// computational block.
pub fn synthetic_block(spec: &BlockSpec, u1: CMatrix, u2: CMatrix) -> Result<SyntheticChannel> {
    let channel = block_dephasing(spec, &u1, &u2)?;
    let d = channel.dim();
    let blocks = spec
        .ranges()
        .into_iter()
        .map(|r| {
            let kets = r.map(|i| Ket::basis(d, i)).collect::<Result<Vec<_>>>()?;
            rotate_back(&u1, &Subspace::new(kets)?)
        })
        .collect::<Result<_>>()?;
    Ok(SyntheticChannel {
        channel,
        truth: GroundTruth { blocks },
    })
}

/// `tr(Π ε(ρ))` and `tr(ε†(Π) ρ)`, for checking trace duality.
pub fn duality_pair(ch: &KrausChannel, rho: &CMatrix, pi: &CMatrix) -> Result<(f64, f64)> {
    let forward = trace_product(pi, &ch.apply_operator(rho)?).re;
    let backward = trace_product(&ch.adjoint().apply_operator(pi)?, rho).re;
    Ok((forward, backward))
}
