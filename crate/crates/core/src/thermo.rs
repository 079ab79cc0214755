//! Finite-N thermodynamics: eigensolution, sector-summed partition functions,
//! Gibbs averages and boson-cutoff control.
//!
//! Partition functions run over every total-spin sector of the 2^N space,
//! each weighted by its multiplicity. Dicke blocks are further split into
//! the two excitation-parity subspaces before diagonalisation; the
//! Hamiltonian and all observables used here commute with that parity.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    boson_number, jx_squared, jz_matrix, kron, parity_signs, sector_decomposition,
    RealSymmetricMatrix, SpinSector,
};
use crate::error::{Error, Result};
use crate::models::{check_beta, dicke_block, effective_spin_block, ModelKind, ModelParams};

/// Hard cap on the boson cutoff searched by [`adaptive_cutoff`].
pub const DEFAULT_CUTOFF_CAP: usize = 400;

/// Step between successive cutoffs on the convergence ladder.
pub const CUTOFF_STEP: usize = 10;

/// Eigenvalues in ascending order, with the matching orthonormal
/// eigenvectors stored column-wise when requested.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    pub fn ground_energy(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }
}

/// Thermodynamic state of one model at one inverse temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub beta: f64,
    pub free_energy_per_atom: f64,
    pub internal_energy_per_atom: f64,
    pub entropy_per_atom: f64,
    /// ⟨J_x²⟩/N²
    pub jx2_per_atom2: f64,
    /// ⟨J_z⟩/N
    pub jz_per_atom: f64,
    /// ⟨a†a⟩/N, Dicke only.
    pub photon_density: Option<f64>,
    pub cutoff_used: Option<usize>,
}

/// Full symmetric eigendecomposition.
pub fn eigensolve(h: &RealSymmetricMatrix, want_vectors: bool) -> Result<Spectrum> {
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let m = h.to_dmatrix();
    if !want_vectors {
        let mut eigenvalues: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        return Ok(Spectrum { eigenvalues, eigenvectors: None });
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(h.dim(), h.dim(), |i, col| eig.eigenvectors[(i, order[col])]);
    Ok(Spectrum { eigenvalues, eigenvectors: Some(vectors) })
}

/// `ln Σ exp(x_k)` with the maximum factored out.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln Σ_k exp(−β e_k)`.
pub fn log_partition(spec: &Spectrum, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let e_min = spec.ground_energy().ok_or(Error::EmptySpectrum)?;
    let sum: f64 = spec.eigenvalues.iter().map(|e| (-beta * (e - e_min)).exp()).sum();
    Ok(-beta * e_min + sum.ln())
}

fn boltzmann_weights(eigenvalues: &[f64], beta: f64) -> Vec<f64> {
    let e_min = eigenvalues[0];
    let raw: Vec<f64> = eigenvalues.iter().map(|e| (-beta * (e - e_min)).exp()).collect();
    let norm: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / norm).collect()
}

/// Gibbs average `Σ_k w_k ⟨v_k|O|v_k⟩`.
pub fn gibbs_expectation(spec: &Spectrum, observable: &RealSymmetricMatrix, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let vectors = spec.eigenvectors.as_ref().ok_or(Error::MissingEigenvectors)?;
    if spec.eigenvalues.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if observable.dim() != vectors.nrows() {
        return Err(Error::DimensionMismatch { expected: vectors.nrows(), found: observable.dim() });
    }
    let weights = boltzmann_weights(&spec.eigenvalues, beta);
    Ok(weighted_diagonal(vectors, observable, &weights))
}

fn weighted_diagonal(vectors: &DMatrix<f64>, observable: &RealSymmetricMatrix, weights: &[f64]) -> f64 {
    let n = observable.dim();
    let diag = observable.diagonal();
    if (0..n).all(|i| (0..n).all(|j| i == j || observable.get(i, j) == 0.0)) {
        return weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * vectors.column(k).iter().zip(&diag).map(|(v, o)| v * v * o).sum::<f64>())
            .sum();
    }
    let ov = observable.to_dmatrix() * vectors;
    weights
        .iter()
        .enumerate()
        .map(|(k, w)| w * vectors.column(k).dot(&ov.column(k)))
        .sum()
}

/// One diagonalisable piece of a model's Hamiltonian: a spin sector, or a
/// parity subspace of a Dicke sector.
struct Block {
    log_multiplicity: f64,
    hamiltonian: RealSymmetricMatrix,
    /// Observables restricted to this block: J_x², J_z, a†a (Dicke only).
    observables: Option<[Option<RealSymmetricMatrix>; 3]>,
}

fn check_cutoff(kind: ModelKind, cutoff: Option<usize>) -> Result<()> {
    match (kind, cutoff) {
        (ModelKind::Dicke, None) => Err(Error::MissingCutoff),
        (k, Some(_)) if k.is_effective() => Err(Error::InvalidParameter(format!(
            "a boson cutoff only applies to the Dicke model, not {k}"
        ))),
        _ => Ok(()),
    }
}

fn sector_blocks(
    params: &ModelParams,
    kind: ModelKind,
    beta: f64,
    cutoff: Option<usize>,
    sector: SpinSector,
    with_observables: bool,
) -> Result<Vec<Block>> {
    let log_multiplicity = (sector.multiplicity as f64).ln();
    match (kind, cutoff) {
        (ModelKind::Dicke, Some(cutoff)) => {
            let h = dicke_block(params, sector, cutoff);
            let signs = parity_signs(sector.two_j, cutoff);
            let observables = with_observables.then(|| {
                let id_b = RealSymmetricMatrix::identity(cutoff + 1);
                let id_s = RealSymmetricMatrix::identity(sector.dim());
                [
                    kron(&id_b, &jx_squared(sector.two_j)),
                    kron(&id_b, &jz_matrix(sector.two_j)),
                    kron(&boson_number(cutoff), &id_s),
                ]
            });
            let blocks = [1.0, -1.0]
                .into_iter()
                .filter_map(|parity| {
                    let idx: Vec<usize> =
                        signs.iter().enumerate().filter(|(_, s)| **s == parity).map(|(i, _)| i).collect();
                    if idx.is_empty() {
                        return None;
                    }
                    Some(Block {
                        log_multiplicity,
                        hamiltonian: h.principal_submatrix(&idx),
                        observables: observables.as_ref().map(|obs| {
                            [
                                Some(obs[0].principal_submatrix(&idx)),
                                Some(obs[1].principal_submatrix(&idx)),
                                Some(obs[2].principal_submatrix(&idx)),
                            ]
                        }),
                    })
                })
                .collect();
            Ok(blocks)
        }
        _ => {
            let h = effective_spin_block(params, sector, kind, beta)?;
            let observables = with_observables
                .then(|| [Some(jx_squared(sector.two_j)), Some(jz_matrix(sector.two_j)), None]);
            Ok(vec![Block { log_multiplicity, hamiltonian: h, observables }])
        }
    }
}

fn model_blocks(
    params: &ModelParams,
    kind: ModelKind,
    beta: f64,
    cutoff: Option<usize>,
    with_observables: bool,
) -> Result<Vec<Block>> {
    check_beta(beta)?;
    check_cutoff(kind, cutoff)?;
    let sectors = sector_decomposition(params.n_atoms())?;
    let nested: Result<Vec<Vec<Block>>> = sectors
        .into_iter()
        .map(|s| sector_blocks(params, kind, beta, cutoff, s, with_observables))
        .collect();
    Ok(nested?.into_iter().flatten().collect())
}

/// `ln Z` summed over all spin sectors with multiplicities.
pub fn model_log_partition(
    params: &ModelParams,
    kind: ModelKind,
    beta: f64,
    cutoff: Option<usize>,
) -> Result<f64> {
    let blocks = model_blocks(params, kind, beta, cutoff, false)?;
    let terms: Result<Vec<f64>> = blocks
        .par_iter()
        .map(|b| Ok(b.log_multiplicity + log_partition(&eigensolve(&b.hamiltonian, false)?, beta)?))
        .collect();
    Ok(logsumexp(&terms?))
}

/// `f = −ln Z/(βN)`.
pub fn free_energy_per_atom(
    params: &ModelParams,
    kind: ModelKind,
    beta: f64,
    cutoff: Option<usize>,
) -> Result<f64> {
    let ln_z = model_log_partition(params, kind, beta, cutoff)?;
    Ok(-ln_z / (beta * params.n_atoms() as f64))
}

/// Lowest eigenvalue over all sectors.
pub fn ground_energy(params: &ModelParams, kind: ModelKind, beta: f64, cutoff: Option<usize>) -> Result<f64> {
    let blocks = model_blocks(params, kind, beta, cutoff, false)?;
    let lows: Result<Vec<f64>> = blocks
        .par_iter()
        .map(|b| Ok(eigensolve(&b.hamiltonian, false)?.eigenvalues[0]))
        .collect();
    Ok(lows?.into_iter().fold(f64::INFINITY, f64::min))
}

/// Initial cutoff `max(20, ⌈4λ²N/ω²⌉ + ⌈10/β⌉)`.
pub fn initial_cutoff(params: &ModelParams, beta: f64) -> usize {
    let lam = params.lambda();
    let displaced = (4.0 * lam * lam * params.n_atoms() as f64 / (params.omega() * params.omega())).ceil();
    let thermal = (10.0 / beta).ceil();
    20usize.max(displaced as usize + thermal as usize)
}

/// Every `(cutoff, f)` evaluated while searching for convergence: starts at
/// [`initial_cutoff`] and stops once two consecutive entries differ by less
/// than `tol`. The second-to-last entry is the converged cutoff.
pub fn cutoff_ladder(params: &ModelParams, beta: f64, tol: f64, cap: usize) -> Result<Vec<(usize, f64)>> {
    check_beta(beta)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    let f = |m: usize| free_energy_per_atom(params, ModelKind::Dicke, beta, Some(m));
    let mut cutoff = initial_cutoff(params, beta);
    if cutoff > cap {
        return Err(Error::CutoffCapExceeded { cap, last: cutoff, delta: f64::NAN });
    }
    let mut ladder = vec![(cutoff, f(cutoff)?)];
    loop {
        let next = cutoff + CUTOFF_STEP;
        let f_next = f(next)?;
        let delta = (ladder.last().unwrap().1 - f_next).abs();
        ladder.push((next, f_next));
        if delta < tol {
            return Ok(ladder);
        }
        if next > cap {
            return Err(Error::CutoffCapExceeded { cap, last: next, delta });
        }
        cutoff = next;
    }
}

/// Smallest cutoff on the ladder whose free energy agrees with the next
/// rung to within `tol`.
pub fn adaptive_cutoff(params: &ModelParams, beta: f64, tol: f64) -> Result<usize> {
    adaptive_cutoff_with_cap(params, beta, tol, DEFAULT_CUTOFF_CAP)
}

pub fn adaptive_cutoff_with_cap(params: &ModelParams, beta: f64, tol: f64, cap: usize) -> Result<usize> {
    let ladder = cutoff_ladder(params, beta, tol, cap)?;
    Ok(ladder[ladder.len() - 2].0)
}

/// All thermodynamic outputs at one point. Dicke points pick their boson
/// cutoff with [`adaptive_cutoff`] at tolerance `tol`.
pub fn thermo_point(params: &ModelParams, kind: ModelKind, beta: f64, tol: f64) -> Result<ThermoPoint> {
    check_beta(beta)?;
    let cutoff = match kind {
        ModelKind::Dicke => Some(adaptive_cutoff(params, beta, tol)?),
        _ => None,
    };
    thermo_point_at_cutoff(params, kind, beta, cutoff)
}

/// [`thermo_point`] with an explicit cutoff (required iff `kind` is Dicke).
pub fn thermo_point_at_cutoff(
    params: &ModelParams,
    kind: ModelKind,
    beta: f64,
    cutoff: Option<usize>,
) -> Result<ThermoPoint> {
    let blocks = model_blocks(params, kind, beta, cutoff, true)?;

    // (log weight, ⟨H⟩, ⟨J_x²⟩, ⟨J_z⟩, ⟨a†a⟩) per block
    let per_block: Result<Vec<[f64; 5]>> = blocks
        .par_iter()
        .map(|b| {
            let spec = eigensolve(&b.hamiltonian, true)?;
            let vectors = spec.eigenvectors.as_ref().expect("requested eigenvectors");
            let weights = boltzmann_weights(&spec.eigenvalues, beta);
            let energy: f64 = weights.iter().zip(&spec.eigenvalues).map(|(w, e)| w * e).sum();
            let obs = b.observables.as_ref().expect("requested observables");
            let avg = |o: &Option<RealSymmetricMatrix>| {
                o.as_ref().map_or(0.0, |o| weighted_diagonal(vectors, o, &weights))
            };
            Ok([
                b.log_multiplicity + log_partition(&spec, beta)?,
                energy,
                avg(&obs[0]),
                avg(&obs[1]),
                avg(&obs[2]),
            ])
        })
        .collect();
    let per_block = per_block?;

    let log_weights: Vec<f64> = per_block.iter().map(|r| r[0]).collect();
    let ln_z = logsumexp(&log_weights);
    let mut totals = [0.0; 4];
    for row in &per_block {
        let w = (row[0] - ln_z).exp();
        for (t, v) in totals.iter_mut().zip(&row[1..]) {
            *t += w * v;
        }
    }

    let n = params.n_atoms() as f64;
    let f = -ln_z / (beta * n);
    let u = totals[0] / n;
    let mut s = beta * (u - f);
    if s < 0.0 && s > -1e-10 {
        s = 0.0;
    }
    Ok(ThermoPoint {
        beta,
        free_energy_per_atom: f,
        internal_energy_per_atom: u,
        entropy_per_atom: s,
        jx2_per_atom2: totals[1] / (n * n),
        jz_per_atom: totals[2] / n,
        photon_density: cutoff.map(|_| totals[3] / n),
        cutoff_used: cutoff,
    })
}
