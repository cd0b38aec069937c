//! `Y`-valued extensions of scalar operators.
//!
//! Three constructions are provided:
//!
//! * the tensor extension `T ⊗ I_Y`, applying `T` to every coordinate of a
//!   vector-valued function;
//! * the basis expansion `Σ_n T⟨b_n*, f⟩ ⊗ b_n` for a basis of `Y` with
//!   biorthogonal functionals in `X`, together with its prefix sums;
//! * the adjoint route for operators out of `L^∞(μ)`: take the adjoint `S`
//!   with respect to `⟨L¹(μ), L^∞(μ)⟩` and `⟨F, G⟩`, extend it to
//!   `X`-valued functions, and recover `T_Y` as the adjoint of `S_X`.
//!
//! Each is checked against the defining relation `⟨x, T_Y f⟩ = T⟨x, f⟩`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duality::{bochner_norm, Basis, DualPair, FiniteBanachSpace, VectorFunction};
use crate::error::{check_dim, Error, Result};
use crate::funcspace::{FunctionSpace, ScalarFunction};
use crate::operator::MatrixOperator;
use crate::rng::trial_rng;

/// Applies `T` to each `Y`-coordinate column of `f`.
pub fn tensor_extension_apply(
    t: &MatrixOperator,
    y: &FiniteBanachSpace,
    f: &VectorFunction,
) -> Result<VectorFunction> {
    check_dim("vector function dimension", y.dim, f.dim())?;
    check_dim("vector function atoms", t.source().len(), f.atoms())?;
    Ok(VectorFunction(t.matrix() * &f.0))
}

/// Largest violation of the extension relation, with its location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationResidual {
    /// `max_x ‖⟨x, T_Y f⟩ − T⟨x, f⟩‖_G` over the probes.
    pub residual: f64,
    /// Probe index attaining the residual.
    pub probe: usize,
    /// Target atom carrying the largest pointwise discrepancy for that probe.
    pub atom: usize,
}

/// Coordinate functionals of `X` followed by `extra` random unit vectors.
pub fn default_probes(pair: &DualPair, extra: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = pair.x().dim;
    let mut probes: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        })
        .collect();
    for _ in 0..extra {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let s = pair.x().norm_unchecked(&v);
        probes.push(if s > 0.0 { v.iter().map(|c| c / s).collect() } else { v });
    }
    probes
}

/// Measures how far `output` is from satisfying `⟨x, output⟩ = T⟨x, f⟩`
/// pointwise for each probe `x ∈ X`.
pub fn verify_extension_relation(
    t: &MatrixOperator,
    output: &VectorFunction,
    pair: &DualPair,
    f: &VectorFunction,
    probes: &[Vec<f64>],
) -> Result<RelationResidual> {
    if probes.is_empty() {
        return Err(Error::Validation("at least one probe is required".into()));
    }
    check_dim("output atoms", t.target().len(), output.atoms())?;
    check_dim("output dimension", pair.dim(), output.dim())?;
    let mut worst = RelationResidual {
        residual: 0.0,
        probe: 0,
        atom: 0,
    };
    for (k, x) in probes.iter().enumerate() {
        let lhs = output.pair_pointwise(pair, x)?;
        let rhs = t.apply(&f.pair_pointwise(pair, x)?)?;
        let diff = &lhs.0 - &rhs.0;
        let r = t.target().norm_unchecked(diff.as_slice());
        if r > worst.residual {
            worst = RelationResidual {
                residual: r,
                probe: k,
                atom: diff.iamax(),
            };
        }
    }
    Ok(worst)
}

/// `max_b ( ‖(T_Y f)(b)‖_Y − (R ‖f(·)‖_Y)(b) )`; nonpositive when the
/// pointwise domination estimate holds.
pub fn domination_pointwise_check(
    t: &MatrixOperator,
    r: &MatrixOperator,
    y: &FiniteBanachSpace,
    f: &VectorFunction,
) -> Result<f64> {
    if !t.is_dominated_by(r)? {
        return Err(Error::Precondition("R does not dominate T".into()));
    }
    let lhs = tensor_extension_apply(t, y, f)?.pointwise_norm(y)?;
    let rhs = r.apply(&f.pointwise_norm(y)?)?;
    Ok((&lhs.0 - &rhs.0).max())
}

/// Output of the basis expansion truncated after `N` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisExtension {
    pub output: VectorFunction,
    /// `partial_sum_norms[k][b] = ‖Σ_{n≤k} (T⟨b_n*, f⟩)(b) b_n‖_Y` for `k < N`.
    pub partial_sum_norms: Vec<Vec<f64>>,
}

/// `Σ_{n<N} T⟨b_n*, f⟩ ⊗ b_n`.
pub fn basis_extension_apply(
    t: &MatrixOperator,
    basis: &Basis,
    pair: &DualPair,
    f: &VectorFunction,
    truncation: usize,
) -> Result<BasisExtension> {
    if truncation > basis.len() {
        return Err(Error::Validation(format!(
            "truncation {truncation} exceeds basis size {}",
            basis.len()
        )));
    }
    check_dim("vector function dimension", pair.dim(), f.dim())?;
    check_dim("vector function atoms", t.source().len(), f.atoms())?;
    let atoms = t.target().len();
    let mut out = DMatrix::zeros(atoms, pair.dim());
    let mut partial_sum_norms = Vec::with_capacity(truncation);
    for n in 0..truncation {
        let coeff = f.pair_pointwise(pair, &basis.functional(n))?;
        let tc = t.apply(&coeff)?;
        let b = DVector::from_vec(basis.vector(n));
        out += &tc.0 * b.transpose();
        partial_sum_norms.push(
            (0..atoms)
                .map(|a| pair.y().norm_unchecked(out.row(a).transpose().as_slice()))
                .collect(),
        );
    }
    Ok(BasisExtension {
        output: VectorFunction(out),
        partial_sum_norms,
    })
}

impl BasisExtension {
    /// Largest excess of a prefix norm over `K (R‖f‖_Y)(b)`.
    pub fn prefix_bound_defect(
        &self,
        t: &MatrixOperator,
        dominant: Option<&MatrixOperator>,
        basis: &Basis,
        y: &FiniteBanachSpace,
        f: &VectorFunction,
    ) -> Result<f64> {
        let r = dominant.ok_or_else(|| {
            Error::Precondition("a dominant is required for the prefix bound check".into())
        })?;
        if !t.is_dominated_by(r)? {
            return Err(Error::Precondition("R does not dominate T".into()));
        }
        let bound = r.apply(&f.pointwise_norm(y)?)?;
        let mut worst = f64::NEG_INFINITY;
        for row in &self.partial_sum_norms {
            for (v, b) in row.iter().zip(bound.0.iter()) {
                worst = worst.max(v - basis.constant() * b);
            }
        }
        Ok(worst)
    }
}

/// The series `Σ_k e_k ⊗ y_k` for scalar `e_k` and vectors `y_k`, together
/// with the bound `sup_k ‖y_k‖ · ‖Σ_k |e_k|‖_E` on its norm.
#[derive(Debug, Clone, PartialEq)]
pub struct DominatedSeries {
    pub sum: VectorFunction,
    pub norm: f64,
    pub bound: f64,
    /// `max_c ( ‖e(c)‖ − sup_k ‖y_k‖ Σ_k |e_k(c)| )`.
    pub pointwise_defect: f64,
}

pub fn dominated_series(
    e: &FunctionSpace,
    y: &FiniteBanachSpace,
    scalars: &[ScalarFunction],
    vectors: &[Vec<f64>],
) -> Result<DominatedSeries> {
    check_dim("series length", scalars.len(), vectors.len())?;
    let mut sum = DMatrix::zeros(e.len(), y.dim);
    let mut abs_sum = DVector::zeros(e.len());
    let mut sup = 0.0f64;
    for (ek, yk) in scalars.iter().zip(vectors) {
        check_dim("series scalar", e.len(), ek.len())?;
        sup = sup.max(y.norm(yk)?);
        sum += &ek.0 * DVector::from_column_slice(yk).transpose();
        abs_sum += ek.0.abs();
    }
    let sum = VectorFunction(sum);
    let pointwise = sum.pointwise_norm(y)?;
    let pointwise_defect = pointwise
        .0
        .iter()
        .zip(abs_sum.iter())
        .map(|(n, s)| n - sup * s)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DominatedSeries {
        norm: bochner_norm(e, y, &sum)?,
        bound: sup * e.norm_unchecked(abs_sum.as_slice()),
        sum,
        pointwise_defect,
    })
}

/// `S`, `S_X` and `T_Y` built from an operator `T: L^∞(μ) → G`.
#[derive(Debug, Clone)]
pub struct AdjointPipeline {
    t: MatrixOperator,
    s: MatrixOperator,
    pair: DualPair,
}

/// Builds the adjoint `S: F → L¹(μ)` of `T` for the pairings
/// `⟨L¹(μ), L^∞(μ)⟩` and `⟨F, G⟩` with `F = G^×`.
pub fn adjoint_extension_pipeline(t: &MatrixOperator, pair: &DualPair) -> Result<AdjointPipeline> {
    if !t.source().exponent().is_infinite() {
        return Err(Error::Precondition(format!(
            "pipeline needs an operator out of L^inf, got L^{}",
            t.source().exponent()
        )));
    }
    let l1 = t.source().kothe_dual();
    let f = t.target().kothe_dual();
    let s = t.adjoint_between(l1, f)?;
    Ok(AdjointPipeline {
        t: t.clone(),
        s,
        pair: pair.clone(),
    })
}

impl AdjointPipeline {
    pub fn s(&self) -> &MatrixOperator {
        &self.s
    }

    pub fn t(&self) -> &MatrixOperator {
        &self.t
    }

    pub fn pair(&self) -> &DualPair {
        &self.pair
    }

    /// `S_X g` for an `X`-valued `g` on the target atoms.
    pub fn apply_s_x(&self, g: &VectorFunction) -> Result<VectorFunction> {
        tensor_extension_apply(&self.s, self.pair.x(), g)
    }

    /// `T_Y f`, defined through `Σ_b ⟨g(b), (T_Y f)(b)⟩ ν_b = Σ_a ⟨(S_X g)(a), f(a)⟩ μ_a`:
    /// the right side is evaluated on `g = δ_b ⊗ e_i` for every target atom
    /// `b` and coordinate `i` of `X`, and the pairing matrix is inverted.
    pub fn apply_t_y(&self, f: &VectorFunction) -> Result<VectorFunction> {
        let mu = self.t.source().measure();
        let nu = self.t.target().measure();
        check_dim("vector function atoms", mu.len(), f.atoms())?;
        check_dim("vector function dimension", self.pair.dim(), f.dim())?;
        let dx = self.pair.x().dim;
        let lu = self.pair.pairing_matrix().clone().lu();
        let mut out = DMatrix::zeros(nu.len(), self.pair.dim());
        for b in 0..nu.len() {
            let mut rhs = DVector::zeros(dx);
            for i in 0..dx {
                let mut g = VectorFunction::zeros(nu.len(), dx);
                g.0[(b, i)] = 1.0;
                let sg = self.apply_s_x(&g)?;
                rhs[i] = crate::duality::bochner_pairing(mu, &self.pair, &sg, f)? / nu.weight(b);
            }
            let h = lu
                .solve(&rhs)
                .ok_or_else(|| Error::Validation("pairing matrix is singular".into()))?;
            out.set_row(b, &h.transpose());
        }
        Ok(VectorFunction(out))
    }

    /// `|Σ_b ⟨g(b), (T_Y f)(b)⟩ ν_b − Σ_a ⟨(S_X g)(a), f(a)⟩ μ_a|`.
    pub fn duality_residual(&self, f: &VectorFunction, g: &VectorFunction) -> Result<f64> {
        let lhs = crate::duality::bochner_pairing(self.t.target().measure(), &self.pair, g, &self.apply_t_y(f)?)?;
        let rhs = crate::duality::bochner_pairing(self.t.source().measure(), &self.pair, &self.apply_s_x(g)?, f)?;
        Ok((lhs - rhs).abs())
    }

    /// Entrywise gap between `T_Y f` and the direct tensor extension.
    pub fn tensor_agreement(&self, f: &VectorFunction) -> Result<f64> {
        let direct = tensor_extension_apply(&self.t, self.pair.y(), f)?;
        Ok(self.apply_t_y(f)?.max_abs_diff(&direct))
    }

    /// The matrix of `T_Y` acting on `vec(f)` (row-major over atoms then
    /// coordinates), assembled column by column.
    pub fn t_y_matrix(&self) -> Result<DMatrix<f64>> {
        let (na, nb, d) = (self.t.source().len(), self.t.target().len(), self.pair.dim());
        let mut m = DMatrix::zeros(nb * d, na * d);
        for a in 0..na {
            for j in 0..d {
                let mut f = VectorFunction::zeros(na, d);
                f.0[(a, j)] = 1.0;
                let h = self.apply_t_y(&f)?;
                for b in 0..nb {
                    for i in 0..d {
                        m[(b * d + i, a * d + j)] = h.0[(b, i)];
                    }
                }
            }
        }
        Ok(m)
    }
}

/// Result of a randomized search for large `‖T_Y f‖ / ‖f‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBoundReport {
    pub max_ratio: f64,
    pub witness: Vec<Vec<f64>>,
    pub m_norm: f64,
    pub operator_norm: f64,
    pub trials: usize,
}

/// Random vector functions with i.i.d. Gaussian entries, alternating with
/// functions whose values are signed coordinate vectors of random length.
pub fn random_vector_function(atoms: usize, dim: usize, rng: &mut impl Rng) -> VectorFunction {
    if rng.random_bool(0.5) {
        VectorFunction(DMatrix::from_fn(atoms, dim, |_, _| rng.sample(StandardNormal)))
    } else {
        let mut m = DMatrix::zeros(atoms, dim);
        for a in 0..atoms {
            let j = rng.random_range(0..dim);
            let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            m[(a, j)] = s * rng.random_range(0.1..1.0);
        }
        VectorFunction(m)
    }
}

/// `max ‖T_Y f‖_{G(Y)} / ‖f‖_{E(Y)}` over `trials` random `f`.
pub fn extension_norm_bound_check(
    t: &MatrixOperator,
    y: &FiniteBanachSpace,
    trials: usize,
    seed: u64,
) -> Result<NormBoundReport> {
    if trials == 0 {
        return Err(Error::Validation("trials must be at least 1".into()));
    }
    let (best, idx) = (0..trials as u64)
        .into_par_iter()
        .map(|k| -> Result<(f64, u64)> {
            let f = random_vector_function(t.source().len(), y.dim, &mut trial_rng(seed, 0xe27e, k));
            Ok((extension_ratio(t, y, &f)?, k))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
    let witness = random_vector_function(t.source().len(), y.dim, &mut trial_rng(seed, 0xe27e, idx));
    Ok(NormBoundReport {
        max_ratio: best,
        witness: witness.rows(),
        m_norm: t.m_norm()?,
        operator_norm: t.operator_norm()?.value,
        trials,
    })
}

/// `‖(T ⊗ I_Y) f‖_{G(Y)} / ‖f‖_{E(Y)}` (zero for `f = 0`).
pub fn extension_ratio(t: &MatrixOperator, y: &FiniteBanachSpace, f: &VectorFunction) -> Result<f64> {
    let den = bochner_norm(t.source(), y, f)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(bochner_norm(t.target(), y, &tensor_extension_apply(t, y, f)?)? / den)
}
