//! Conditional expectation with respect to a partition, scalar and
//! vector-valued.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::duality::{bochner_norm, bochner_pairing, DualPair, FiniteBanachSpace, VectorFunction};
use crate::error::{check_dim, Error, Result};
use crate::extension::tensor_extension_apply;
use crate::funcspace::{Exponent, FunctionSpace};
use crate::measure::{MeasureSpace, Partition};
use crate::operator::MatrixOperator;
use crate::rng::trial_rng;

/// Block-averaging matrix `M[a,a'] = μ_{a'} / μ(block(a))` when `a, a'` share a
/// block, as an operator on `L^∞(μ)`.
pub fn cond_exp_matrix(space: &MeasureSpace, partition: &Partition) -> Result<MatrixOperator> {
    cond_exp_operator(space, partition, Exponent::Infinity)
}

/// The same averaging operator on `L^p(μ)`.
pub fn cond_exp_operator(space: &MeasureSpace, partition: &Partition, p: Exponent) -> Result<MatrixOperator> {
    check_dim("partition atoms", space.len(), partition.num_atoms())?;
    let n = space.len();
    let masses: Vec<f64> = partition.blocks().iter().map(|b| space.mass_of(b)).collect();
    let m = DMatrix::from_fn(n, n, |a, c| {
        let block = partition.block_of(a);
        if partition.block_of(c) == block {
            space.weight(c) / masses[block]
        } else {
            0.0
        }
    });
    let e = FunctionSpace::new(space.clone(), p);
    MatrixOperator::new(m, e.clone(), e)
}

/// `E_{P,Y} f`: block averages of each coordinate.
pub fn cond_exp_vector(
    space: &MeasureSpace,
    partition: &Partition,
    y: &FiniteBanachSpace,
    f: &VectorFunction,
) -> Result<VectorFunction> {
    tensor_extension_apply(&cond_exp_matrix(space, partition)?, y, f)
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub name: String,
    pub max_residual: f64,
    pub bound: f64,
    pub pass: bool,
    /// Auxiliary checks are standard consequences rather than the main claims.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub auxiliary: bool,
}

impl PropertyCheck {
    fn new(name: &str, max_residual: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            max_residual,
            bound,
            pass: max_residual <= bound,
            auxiliary: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondExpReport {
    pub trials: usize,
    pub checks: Vec<PropertyCheck>,
    pub pass: bool,
}

impl CondExpReport {
    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Merges consecutive blocks pairwise; always coarser than `p`.
pub fn pairwise_coarsening(p: &Partition) -> Partition {
    let blocks: Vec<Vec<usize>> = p.blocks().chunks(2).map(|c| c.concat()).collect();
    Partition::with_atoms(blocks, p.num_atoms()).expect("merging blocks keeps a partition")
}

/// Randomized verification of the averaging identity, idempotence,
/// `L^p(Y)`-contractivity for `p ∈ {1, 2, ∞}`, the `⟨L¹(X), L^∞(Y)⟩` duality
/// identity, the self-adjointness of the scalar operator, and (auxiliary) the
/// tower property against `coarser` (or a pairwise coarsening).
pub fn verify_condexp_properties(
    space: &MeasureSpace,
    partition: &Partition,
    coarser: Option<&Partition>,
    pair: &DualPair,
    trials: usize,
    seed: u64,
) -> Result<CondExpReport> {
    let exps = [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity];
    verify_condexp_properties_with(space, partition, coarser, pair, &exps, trials, seed)
}

/// As [`verify_condexp_properties`], with contractivity checked for the given
/// exponents.
pub fn verify_condexp_properties_with(
    space: &MeasureSpace,
    partition: &Partition,
    coarser: Option<&Partition>,
    pair: &DualPair,
    exponents: &[Exponent],
    trials: usize,
    seed: u64,
) -> Result<CondExpReport> {
    if trials == 0 {
        return Err(Error::Validation("trials must be at least 1".into()));
    }
    let fallback;
    let coarse = match coarser {
        Some(c) => {
            if !c.is_coarser(partition) {
                return Err(Error::Validation("tower partition is not coarser".into()));
            }
            c
        }
        None => {
            fallback = pairwise_coarsening(partition);
            &fallback
        }
    };
    let e1 = cond_exp_operator(space, partition, Exponent::Finite(1.0))?;
    // E^∞ as the adjoint of E^1 for ⟨L¹, L^∞⟩
    let e_inf = e1.adjoint();
    let e_coarse = cond_exp_matrix(space, coarse)?;
    let y = pair.y();
    let x = pair.x();
    let n = space.len();
    let d = y.dim;

    let self_adjoint = (e_inf.matrix() - e1.matrix()).amax();

    let mut averaging = 0.0f64;
    let mut idempotence = 0.0f64;
    let mut contraction = f64::NEG_INFINITY;
    let mut duality = 0.0f64;
    let mut tower = 0.0f64;
    for k in 0..trials as u64 {
        let mut rng = trial_rng(seed, 0xc0e7, k);
        let f = VectorFunction(DMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal)));
        let g = VectorFunction(DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0)));
        let ef = tensor_extension_apply(&e_inf, y, &f)?;
        for block in partition.blocks() {
            for j in 0..d {
                let lhs: f64 = block.iter().map(|&a| space.weight(a) * f.0[(a, j)]).sum();
                let rhs: f64 = block.iter().map(|&a| space.weight(a) * ef.0[(a, j)]).sum();
                averaging = averaging.max((lhs - rhs).abs());
            }
        }
        idempotence = idempotence.max(tensor_extension_apply(&e_inf, y, &ef)?.max_abs_diff(&ef));
        for &p in exponents {
            let lp = FunctionSpace::new(space.clone(), p);
            contraction = contraction.max(bochner_norm(&lp, y, &ef)? - bochner_norm(&lp, y, &f)?);
        }
        // f is X-valued in L¹(X), g is Y-valued in L^∞(Y)
        let fx = VectorFunction(DMatrix::from_fn(n, x.dim, |a, j| f.0[(a, j)]));
        let lhs = bochner_pairing(space, pair, &fx, &tensor_extension_apply(&e_inf, y, &g)?)?;
        let rhs = bochner_pairing(space, pair, &tensor_extension_apply(&e1, x, &fx)?, &g)?;
        duality = duality.max((lhs - rhs).abs());
        let fine_then_coarse = tensor_extension_apply(&e_coarse, y, &ef)?;
        let coarse_only = tensor_extension_apply(&e_coarse, y, &f)?;
        tower = tower.max(fine_then_coarse.max_abs_diff(&coarse_only));
    }
    let mut tower_check = PropertyCheck::new("tower", tower, 1e-12);
    tower_check.auxiliary = true;
    let checks = vec![
        PropertyCheck::new("averaging_identity", averaging, 1e-12),
        PropertyCheck::new("idempotence", idempotence, 1e-12),
        PropertyCheck::new("contraction", contraction.max(0.0), 1e-10),
        PropertyCheck::new("duality", duality, 1e-10),
        PropertyCheck::new("scalar_self_adjoint", self_adjoint, 1e-12),
        tower_check,
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(CondExpReport { trials, checks, pass })
}
