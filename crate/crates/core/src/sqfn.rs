//! Square functions, the Krivine/Grothendieck square-function inequality and
//! the Marcinkiewicz–Zygmund constant from Gaussian moments.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_dim, Error, Result};
use crate::funcspace::{Exponent, FunctionSpace, ScalarFunction};
use crate::operator::{MatrixOperator, NormOptions};

/// Krivine's upper bound `π / (2 ln(1 + √2))` for the real Grothendieck
/// constant, rounded up in the sixth decimal.
pub const KRIVINE_BOUND: f64 = 1.782214;

/// Numeric constants with a moment cache.
#[derive(Debug)]
pub struct Constants {
    pub k_g_bound: f64,
    moments: RwLock<HashMap<u64, f64>>,
}

impl Default for Constants {
    fn default() -> Self {
        Self::new(KRIVINE_BOUND).expect("valid bound")
    }
}

impl Constants {
    pub fn new(k_g_bound: f64) -> Result<Self> {
        if k_g_bound.is_nan() || k_g_bound < 1.0 {
            return Err(Error::Validation(format!("K_G bound {k_g_bound} must be >= 1")));
        }
        Ok(Self {
            k_g_bound,
            moments: RwLock::new(HashMap::new()),
        })
    }

    pub fn gaussian_moment(&self, p: f64) -> Result<f64> {
        if let Some(v) = self.moments.read().expect("cache lock").get(&p.to_bits()) {
            return Ok(*v);
        }
        let v = gaussian_moment(p)?;
        self.moments.write().expect("cache lock").insert(p.to_bits(), v);
        Ok(v)
    }
}

/// `‖(Σ_k e_k²)^{1/2}‖_E`.
pub fn square_function(e: &FunctionSpace, es: &[ScalarFunction]) -> Result<f64> {
    if es.is_empty() {
        return Err(Error::Validation("square function of an empty family".into()));
    }
    let mut acc = DVector::<f64>::zeros(e.len());
    for f in es {
        check_dim("square function", e.len(), f.len())?;
        acc += f.0.component_mul(&f.0);
    }
    Ok(e.norm_unchecked(acc.map(f64::sqrt).as_slice()))
}

/// `‖(Σ|Se_k|²)^{1/2}‖_G / (‖S‖ ‖(Σ|e_k|²)^{1/2}‖_E)`.
pub fn krivine_ratio(s: &MatrixOperator, es: &[ScalarFunction]) -> Result<f64> {
    krivine_ratio_with(s, es, &NormOptions::default())
}

pub fn krivine_ratio_with(s: &MatrixOperator, es: &[ScalarFunction], opts: &NormOptions) -> Result<f64> {
    let den_sq = square_function(s.source(), es)?;
    if den_sq == 0.0 {
        return Err(Error::Validation("all functions in the family vanish".into()));
    }
    let images = es.iter().map(|e| s.apply(e)).collect::<Result<Vec<_>>>()?;
    let num = square_function(s.target(), &images)?;
    if num == 0.0 {
        return Ok(0.0);
    }
    let norm = s.operator_norm_with(opts)?.value;
    Ok(num / (norm * den_sq))
}

/// `‖γ‖_p = √2 (Γ((p+1)/2) / √π)^{1/p}` for a standard Gaussian `γ`.
pub fn gaussian_moment(p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Validation(format!("moment order {p} must be finite and >= 1")));
    }
    let log_e = (ln_gamma((p + 1.0) / 2.0) - 0.5 * PI.ln()) / p;
    Ok(2f64.sqrt() * log_e.exp())
}

/// `‖γ‖_p` by tanh-sinh quadrature of `2 ∫_0^∞ x^p φ(x) dx`, independent of
/// the Gamma function.
pub fn gaussian_moment_quadrature(p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Validation(format!("moment order {p} must be finite and >= 1")));
    }
    let upper = 12.0 + 2.0 * p.sqrt();
    let density = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    let integral = tanh_sinh(|x| x.powf(p) * density(x), 0.0, upper);
    Ok((2.0 * integral).powf(1.0 / p))
}

/// Tanh-sinh (double exponential) quadrature on `[a, b]`.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let h = 1.0 / 64.0;
    let mut sum = 0.0;
    let kmax = (4.5 / h) as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let u = 0.5 * PI * t.sinh();
        let cu = u.cosh();
        let w = 0.5 * PI * t.cosh() / (cu * cu);
        // distances to the endpoints, computed without cancellation
        let from_a = half * 2.0 / (1.0 + (-2.0 * u).exp());
        let from_b = half * 2.0 / (1.0 + (2.0 * u).exp());
        if !w.is_finite() || w == 0.0 {
            continue;
        }
        let x = if u <= 0.0 { a + from_a } else { b - from_b };
        if x <= a || x >= b {
            continue;
        }
        sum += w * f(x);
    }
    half * h * sum
}

/// Gauss–Hermite nodes and weights for the weight `e^{-x²/2}` normalized to
/// the standard Gaussian (weights sum to 1), by Golub–Welsch.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jac);
    let mut pts: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.into_iter().unzip()
}

/// `max{‖γ‖_{p1} / ‖γ‖_{p2}, 1}`.
pub fn mz_constant(p1: f64, p2: f64) -> Result<f64> {
    Ok((gaussian_moment(p1)? / gaussian_moment(p2)?).max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MzCheck {
    /// `‖(Σ|Se_k|²)^{1/2}‖_{p2}`
    pub lhs: f64,
    /// `K ‖S‖ ‖(Σ|e_k|²)^{1/2}‖_{p1}`
    pub rhs: f64,
    pub constant: f64,
    pub operator_norm: f64,
    pub defect: f64,
    pub pass: bool,
}

/// Checks the Marcinkiewicz–Zygmund square-function estimate for
/// `S: L^{p1} → L^{p2}`.
pub fn mz_ratio_check(s: &MatrixOperator, es: &[ScalarFunction], p1: f64, p2: f64) -> Result<MzCheck> {
    mz_ratio_check_with(s, es, p1, p2, &NormOptions::default())
}

/// As [`mz_ratio_check`], with explicit options for the `‖S‖` computation.
/// When `‖S‖` comes from ascent it is a lower bound, which only makes the
/// check stricter.
pub fn mz_ratio_check_with(
    s: &MatrixOperator,
    es: &[ScalarFunction],
    p1: f64,
    p2: f64,
    opts: &NormOptions,
) -> Result<MzCheck> {
    let (e1, e2) = (Exponent::new(p1)?, Exponent::new(p2)?);
    if s.source().exponent() != e1 || s.target().exponent() != e2 {
        return Err(Error::Validation(format!(
            "operator acts L^{} -> L^{}, but exponents ({p1}, {p2}) were given",
            s.source().exponent(),
            s.target().exponent()
        )));
    }
    let constant = mz_constant(p1, p2)?;
    let images = es.iter().map(|e| s.apply(e)).collect::<Result<Vec<_>>>()?;
    let lhs = square_function(s.target(), &images)?;
    let operator_norm = s.operator_norm_with(opts)?.value;
    let rhs = constant * operator_norm * square_function(s.source(), es)?;
    let defect = lhs - rhs;
    Ok(MzCheck {
        lhs,
        rhs,
        constant,
        operator_norm,
        defect,
        pass: defect <= 1e-8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{Basis, DualPair, FiniteBanachSpace, VectorFunction};
    use crate::extension::{basis_extension_apply, tensor_extension_apply};

    fn seq(n: usize, p: f64) -> FunctionSpace {
        FunctionSpace::sequence(n, p).unwrap()
    }

    fn sf(v: &[f64]) -> ScalarFunction {
        ScalarFunction::from_vec(v.to_vec())
    }

    #[test]
    fn krivine_bound_value() {
        let exact = PI / (2.0 * (1.0 + 2f64.sqrt()).ln());
        assert!(KRIVINE_BOUND >= exact && KRIVINE_BOUND - exact < 1e-6);
    }

    #[test]
    fn square_function_examples() {
        let es = [sf(&[1.0, 0.0]), sf(&[0.0, 1.0])];
        assert_eq!(square_function(&seq(2, 1.0), &es).unwrap(), 2.0);
        assert!((square_function(&seq(2, 2.0), &es).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let e = sf(&[-3.0, 4.0]);
        assert_eq!(square_function(&seq(2, 2.0), std::slice::from_ref(&e)).unwrap(), seq(2, 2.0).norm(&e.abs()).unwrap());
        assert!(square_function(&seq(2, 2.0), &[]).is_err());
    }

    #[test]
    fn krivine_examples() {
        let id = MatrixOperator::identity(seq(3, 2.0));
        let es = [sf(&[1.0, 2.0, 0.0]), sf(&[0.0, -1.0, 3.0])];
        assert!((krivine_ratio(&id, &es).unwrap() - 1.0).abs() < 1e-12);
        let s = MatrixOperator::from_rows(
            &[vec![1.0, -1.0, 0.5], vec![2.0, 0.0, 1.0]],
            seq(3, f64::INFINITY),
            seq(2, 1.0),
        )
        .unwrap();
        assert!(krivine_ratio(&s, &[sf(&[0.3, -1.0, 0.2])]).unwrap() <= 1.0 + 1e-12);
        assert!(krivine_ratio(&s, &[sf(&[0.0, 0.0, 0.0])]).is_err());
    }

    #[test]
    fn gaussian_moment_fixtures() {
        assert!((gaussian_moment(2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((gaussian_moment(1.0).unwrap() - (2.0 / PI).sqrt()).abs() < 1e-12);
        assert!((gaussian_moment(1.0).unwrap() - 0.7978845608).abs() < 1e-9);
        assert!((gaussian_moment(4.0).unwrap() - 3f64.powf(0.25)).abs() < 1e-12);
        assert!((gaussian_moment(4.0).unwrap() - 1.3160740130).abs() < 1e-9);
        assert!(gaussian_moment(0.5).is_err());
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for p in [1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 7.3, 12.0] {
            let a = gaussian_moment(p).unwrap();
            let b = gaussian_moment_quadrature(p).unwrap();
            assert!((a - b).abs() < 1e-10, "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn gauss_hermite_even_moments() {
        let (x, w) = gauss_hermite(40);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        // E γ^{2k} = (2k-1)!!
        for (k, dfact) in [(1, 1.0), (2, 3.0), (3, 15.0), (4, 105.0)] {
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(2 * k)).sum();
            assert!((m - dfact).abs() < 1e-10 * dfact, "k={k}: {m}");
            let closed = gaussian_moment(2.0 * k as f64).unwrap().powi(2 * k);
            assert!((m - closed).abs() < 1e-10 * dfact);
        }
    }

    #[test]
    fn moments_nondecreasing() {
        let ps: Vec<f64> = (0..40).map(|k| 1.0 + 0.25 * k as f64).collect();
        for w in ps.windows(2) {
            assert!(gaussian_moment(w[0]).unwrap() <= gaussian_moment(w[1]).unwrap());
        }
    }

    #[test]
    fn mz_constants() {
        assert_eq!(mz_constant(2.0, 2.0).unwrap(), 1.0);
        assert_eq!(mz_constant(1.0, 2.0).unwrap(), 1.0);
        let k = mz_constant(4.0, 1.0).unwrap();
        assert!((k - 3f64.powf(0.25) / (2.0 / PI).sqrt()).abs() < 1e-12);
        assert!((k - 1.6495).abs() < 1e-4);
    }

    #[test]
    fn mz_check_identity_and_homogeneity() {
        let id = MatrixOperator::identity(seq(3, 2.0));
        let es = [sf(&[1.0, 2.0, 0.0]), sf(&[0.0, -1.0, 3.0])];
        let c = mz_ratio_check(&id, &es, 2.0, 2.0).unwrap();
        assert!(c.pass);
        let s = MatrixOperator::from_rows(&[vec![1.0, -2.0, 0.5], vec![0.3, 1.0, 1.0]], seq(3, 1.0), seq(2, 2.0))
            .unwrap();
        let a = mz_ratio_check(&s, &es, 1.0, 2.0).unwrap();
        let b = mz_ratio_check(&s.scaled(3.5), &es, 1.0, 2.0).unwrap();
        assert!(a.pass && b.pass);
        assert!((b.lhs / b.rhs - a.lhs / a.rhs).abs() < 1e-12);
        assert!(mz_ratio_check(&s, &es, 2.0, 2.0).is_err());
    }

    #[test]
    fn hilbert_extension_is_basis_independent() {
        let t = MatrixOperator::from_rows(
            &[vec![1.0, -1.0, 0.5], vec![0.0, 2.0, -1.0]],
            seq(3, f64::INFINITY),
            seq(2, 2.0),
        )
        .unwrap();
        let y = FiniteBanachSpace::lp(3, 2.0).unwrap();
        let pair = DualPair::standard(y.clone());
        let f = VectorFunction::from_rows(&[vec![1.0, 0.0, 2.0], vec![-1.0, 3.0, 0.5], vec![0.2, 0.2, -0.7]]).unwrap();
        let direct = tensor_extension_apply(&t, &y, &f).unwrap();
        // orthonormal basis from a QR factorization
        let q = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -1.0, 1.0, 1.0, 0.5, 0.0, 3.0]).qr().q();
        let basis = Basis::new(q.clone(), &pair).unwrap();
        let via_basis = basis_extension_apply(&t, &basis, &pair, &f, 3).unwrap();
        assert!(via_basis.output.max_abs_diff(&direct) < 1e-13);
        // T_Y commutes with pointwise application of the orthogonal matrix
        let rotated = VectorFunction(&f.0 * q.transpose());
        let lhs = tensor_extension_apply(&t, &y, &rotated).unwrap();
        let rhs = VectorFunction(&direct.0 * q.transpose());
        assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }
}
