//! Weighted `L^p` spaces over a [`MeasureSpace`], their Köthe duals and the
//! integral pairing.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};
use crate::measure::MeasureSpace;
use crate::operator::{MatrixOperator, NormEstimate, NormOptions};

/// An exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::Validation(format!("exponent {p} is not in [1, inf]")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// Conjugate exponent `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_one(self) -> bool {
        self == Exponent::Finite(1.0)
    }

    pub fn is_two(self) -> bool {
        self == Exponent::Finite(2.0)
    }

    pub fn is_infinite(self) -> bool {
        self == Exponent::Infinity
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(p) => p,
            Raw::Str(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => f64::INFINITY,
            Raw::Str(s) => return Err(serde::de::Error::custom(format!("bad exponent {s:?}"))),
        };
        Exponent::new(p).map_err(serde::de::Error::custom)
    }
}

/// `ℓ^p` norm of a coordinate slice scaled by per-coordinate weights
/// (weights ignored for `p = ∞`).
pub(crate) fn weighted_lp_norm<'a>(
    p: Exponent,
    values: impl Iterator<Item = f64>,
    weights: impl Iterator<Item = &'a f64>,
) -> f64 {
    match p {
        Exponent::Infinity => values.fold(0.0, |m, v| m.max(v.abs())),
        Exponent::Finite(1.0) => values.zip(weights).map(|(v, w)| v.abs() * w).sum(),
        Exponent::Finite(2.0) => values
            .zip(weights)
            .map(|(v, w)| v * v * w)
            .sum::<f64>()
            .sqrt(),
        Exponent::Finite(p) => {
            let vals: Vec<(f64, f64)> = values.zip(weights.copied()).collect();
            // rescale by the largest entry to avoid overflow for large p
            let scale = vals.iter().fold(0.0f64, |m, (v, _)| m.max(v.abs()));
            if scale == 0.0 {
                return 0.0;
            }
            let s: f64 = vals.iter().map(|(v, w)| (v.abs() / scale).powf(p) * w).sum();
            scale * s.powf(1.0 / p)
        }
    }
}

/// A weighted `L^p(μ)` space on a finite measure space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionSpaceRepr", into = "FunctionSpaceRepr")]
pub struct FunctionSpace {
    space: MeasureSpace,
    p: Exponent,
}

#[derive(Serialize, Deserialize)]
struct FunctionSpaceRepr {
    kind: String,
    p: Exponent,
    weights: Vec<f64>,
}

impl TryFrom<FunctionSpaceRepr> for FunctionSpace {
    type Error = Error;
    fn try_from(r: FunctionSpaceRepr) -> Result<Self> {
        if !r.kind.eq_ignore_ascii_case("lp") {
            return Err(Error::Validation(format!(
                "unsupported function space kind {:?}",
                r.kind
            )));
        }
        Ok(FunctionSpace::new(MeasureSpace::new(r.weights)?, r.p))
    }
}

impl From<FunctionSpace> for FunctionSpaceRepr {
    fn from(e: FunctionSpace) -> Self {
        FunctionSpaceRepr {
            kind: "Lp".into(),
            p: e.p,
            weights: e.space.weights().to_vec(),
        }
    }
}

impl FunctionSpace {
    pub fn new(space: MeasureSpace, p: Exponent) -> Self {
        Self { space, p }
    }

    pub fn lp(space: MeasureSpace, p: f64) -> Result<Self> {
        Ok(Self::new(space, Exponent::new(p)?))
    }

    /// `ℓ^p_n` with counting measure.
    pub fn sequence(n: usize, p: f64) -> Result<Self> {
        Self::lp(MeasureSpace::counting(n)?, p)
    }

    pub fn measure(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Köthe dual: `L^p(μ)` becomes `L^{p'}(μ)` on the same measure space.
    pub fn kothe_dual(&self) -> FunctionSpace {
        Self::new(self.space.clone(), self.p.conjugate())
    }

    pub fn norm(&self, f: &ScalarFunction) -> Result<f64> {
        check_dim("function space norm", self.len(), f.len())?;
        Ok(self.norm_unchecked(f.as_slice()))
    }

    pub(crate) fn norm_unchecked(&self, f: &[f64]) -> f64 {
        weighted_lp_norm(self.p, f.iter().copied(), self.space.weights().iter())
    }

    /// Gradient of the norm at `f` (a subgradient where the norm is not
    /// differentiable). Returns zero at `f = 0`.
    pub(crate) fn norm_gradient(&self, f: &[f64]) -> Vec<f64> {
        let w = self.space.weights();
        let n = self.norm_unchecked(f);
        if n == 0.0 {
            return vec![0.0; f.len()];
        }
        match self.p {
            Exponent::Infinity => {
                let mut g = vec![0.0; f.len()];
                let (i, _) = f
                    .iter()
                    .enumerate()
                    .fold((0, -1.0), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
                g[i] = f[i].signum();
                g
            }
            Exponent::Finite(p) => f
                .iter()
                .zip(w)
                .map(|(&v, &m)| m * v.signum() * (v.abs() / n).powf(p - 1.0))
                .collect(),
        }
    }
}

impl FunctionSpace {
    /// `sup{ |⟨e, f⟩| : ‖e‖_E ≤ 1 }` evaluated by the operator-norm engine on
    /// the functional `e ↦ ⟨e, f⟩`, independently of the Köthe dual formula.
    pub fn dual_norm_numeric(&self, f: &ScalarFunction) -> Result<NormEstimate> {
        self.dual_norm_numeric_with(f, &NormOptions::default())
    }

    pub fn dual_norm_numeric_with(&self, f: &ScalarFunction, opts: &NormOptions) -> Result<NormEstimate> {
        check_dim("dual norm", self.len(), f.len())?;
        let row = DMatrix::from_fn(1, self.len(), |_, a| f.0[a] * self.space.weight(a));
        let scalars = FunctionSpace::new(MeasureSpace::counting(1)?, self.p);
        MatrixOperator::new(row, self.clone(), scalars)?.operator_norm_with(opts)
    }
}

/// Integral pairing `Σ_a e_a f_a μ_a`.
pub fn pairing(space: &MeasureSpace, e: &ScalarFunction, f: &ScalarFunction) -> Result<f64> {
    check_dim("pairing", space.len(), e.len())?;
    check_dim("pairing", space.len(), f.len())?;
    Ok(e.0
        .iter()
        .zip(f.0.iter())
        .zip(space.weights())
        .map(|((x, y), m)| x * y * m)
        .sum())
}

/// A real-valued function on the atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScalarFunction(pub DVector<f64>);

impl ScalarFunction {
    pub fn from_vec(v: Vec<f64>) -> Self {
        Self(DVector::from_vec(v))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }
}

impl From<ScalarFunction> for Vec<f64> {
    fn from(f: ScalarFunction) -> Self {
        f.0.as_slice().to_vec()
    }
}

impl From<Vec<f64>> for ScalarFunction {
    fn from(v: Vec<f64>) -> Self {
        Self::from_vec(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(v: &[f64]) -> ScalarFunction {
        ScalarFunction::from_vec(v.to_vec())
    }

    #[test]
    fn norm_examples() {
        let l1 = FunctionSpace::lp(MeasureSpace::new(vec![1.0, 2.0]).unwrap(), 1.0).unwrap();
        assert_eq!(l1.norm(&sf(&[3.0, -1.0])).unwrap(), 5.0);
        let linf = FunctionSpace::lp(MeasureSpace::new(vec![7.0, 0.1]).unwrap(), f64::INFINITY).unwrap();
        assert_eq!(linf.norm(&sf(&[3.0, -4.0])).unwrap(), 4.0);
        let l2 = FunctionSpace::sequence(2, 2.0).unwrap();
        assert_eq!(l2.norm(&sf(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(l2.norm(&sf(&[0.0, 0.0])).unwrap(), 0.0);
        assert!(l2.norm(&sf(&[1.0])).is_err());
    }

    #[test]
    fn large_exponent_does_not_overflow() {
        let e = FunctionSpace::sequence(2, 400.0).unwrap();
        let n = e.norm(&sf(&[1e300, 1e300])).unwrap();
        assert!((n / 1e300 - 2f64.powf(1.0 / 400.0)).abs() < 1e-12);
    }

    #[test]
    fn kothe_dual_exponents() {
        let m = MeasureSpace::counting(3).unwrap();
        let d = |p: f64| FunctionSpace::lp(m.clone(), p).unwrap().kothe_dual().exponent();
        assert_eq!(d(2.0), Exponent::Finite(2.0));
        assert_eq!(d(1.0), Exponent::Infinity);
        assert_eq!(d(f64::INFINITY), Exponent::Finite(1.0));
        assert_eq!(d(3.0), Exponent::Finite(1.5));
        let e = FunctionSpace::lp(m, 3.0).unwrap();
        assert_eq!(e.kothe_dual().kothe_dual(), e);
    }

    #[test]
    fn pairing_examples() {
        let m = MeasureSpace::counting(2).unwrap();
        assert_eq!(pairing(&m, &sf(&[1.0, 2.0]), &sf(&[3.0, 4.0])).unwrap(), 11.0);
        let m2 = MeasureSpace::new(vec![2.0, 1.0]).unwrap();
        assert_eq!(pairing(&m2, &sf(&[1.0, 1.0]), &sf(&[1.0, 1.0])).unwrap(), 3.0);
        assert_eq!(pairing(&m2, &sf(&[0.0, 0.0]), &sf(&[5.0, 1.0])).unwrap(), 0.0);
        assert!(pairing(&m2, &sf(&[0.0]), &sf(&[5.0, 1.0])).is_err());
    }

    #[test]
    fn dual_norm_examples() {
        let linf = FunctionSpace::sequence(2, f64::INFINITY).unwrap();
        let e = linf.dual_norm_numeric(&sf(&[1.0, 1.0])).unwrap();
        assert_eq!(e.value, 2.0);
        assert!(e.exact);
        let l1 = FunctionSpace::sequence(2, 1.0).unwrap();
        assert_eq!(l1.dual_norm_numeric(&sf(&[1.0, -3.0])).unwrap().value, 3.0);
        assert_eq!(l1.dual_norm_numeric(&sf(&[0.0, 0.0])).unwrap().value, 0.0);
        let l3 = FunctionSpace::lp(MeasureSpace::new(vec![0.5, 1.0, 2.0]).unwrap(), 3.0).unwrap();
        let f = sf(&[1.0, -2.0, 0.5]);
        let numeric = l3.dual_norm_numeric(&f).unwrap().value;
        let closed = l3.kothe_dual().norm(&f).unwrap();
        assert!((numeric - closed).abs() < 1e-8, "{numeric} vs {closed}");
    }

    #[test]
    fn exponent_json() {
        let e: FunctionSpace =
            serde_json::from_str(r#"{"kind":"Lp","p":"inf","weights":[1,2]}"#).unwrap();
        assert!(e.exponent().is_infinite());
        let e: FunctionSpace = serde_json::from_str(r#"{"kind":"Lp","p":2.0,"weights":[1]}"#).unwrap();
        assert!(e.exponent().is_two());
        assert!(serde_json::from_str::<FunctionSpace>(r#"{"kind":"Lp","p":0.5,"weights":[1]}"#).is_err());
        assert!(serde_json::from_str::<FunctionSpace>(r#"{"kind":"Orlicz","p":2,"weights":[1]}"#).is_err());
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"kind":"Lp","p":2.0,"weights":[1.0]}"#);
    }
}
