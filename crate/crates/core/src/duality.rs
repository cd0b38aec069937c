//! Finite-dimensional Banach dual pairs `⟨X, Y⟩`, vector-valued functions and
//! the Köthe–Bochner norm `‖‖f(·)‖_Y‖_E`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::funcspace::{weighted_lp_norm, Exponent, FunctionSpace, ScalarFunction};
use crate::measure::MeasureSpace;
use crate::operator::{MatrixOperator, NormOptions};
use crate::rng::trial_rng;

/// `K^dim` with the norm `scale · ‖·‖_p` on coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BanachRepr", into = "BanachRepr")]
pub struct FiniteBanachSpace {
    pub dim: usize,
    pub p: Exponent,
    pub scale: f64,
}

#[derive(Serialize, Deserialize)]
struct BanachRepr {
    #[serde(default = "lp_kind")]
    kind: String,
    p: Exponent,
    dim: usize,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    scale: f64,
}

fn lp_kind() -> String {
    "lp".into()
}

impl TryFrom<BanachRepr> for FiniteBanachSpace {
    type Error = Error;
    fn try_from(r: BanachRepr) -> Result<Self> {
        if !r.kind.eq_ignore_ascii_case("lp") {
            return Err(Error::Validation(format!("unsupported Banach space kind {:?}", r.kind)));
        }
        FiniteBanachSpace::lp(r.dim, r.p.value())?.rescaled(r.scale)
    }
}

impl From<FiniteBanachSpace> for BanachRepr {
    fn from(y: FiniteBanachSpace) -> Self {
        BanachRepr {
            kind: lp_kind(),
            p: y.p,
            dim: y.dim,
            scale: y.scale,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

impl FiniteBanachSpace {
    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("Banach space dimension must be at least 1".into()));
        }
        Ok(Self {
            dim,
            p: Exponent::new(p)?,
            scale: 1.0,
        })
    }

    /// Same space with the norm multiplied by `c > 0`.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Validation(format!("norm scale {c} must be positive")));
        }
        Ok(Self {
            scale: self.scale * c,
            ..self.clone()
        })
    }

    /// The norm dual under the coordinate pairing.
    pub fn dual(&self) -> Self {
        Self {
            dim: self.dim,
            p: self.p.conjugate(),
            scale: 1.0 / self.scale,
        }
    }

    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        check_dim("Banach space norm", self.dim, v.len())?;
        Ok(self.norm_unchecked(v))
    }

    pub(crate) fn norm_unchecked(&self, v: &[f64]) -> f64 {
        self.scale * weighted_lp_norm(self.p, v.iter().copied(), std::iter::repeat(&1.0))
    }

    /// Coordinates as an unweighted sequence space (ignores `scale`).
    pub fn coordinate_space(&self) -> FunctionSpace {
        FunctionSpace::new(
            MeasureSpace::counting(self.dim).expect("dim >= 1"),
            self.p,
        )
    }

    fn random_unit(&self, rng: &mut impl Rng) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = self.norm_unchecked(&v);
            if n > 0.0 {
                return v.into_iter().map(|x| x / n).collect();
            }
        }
    }
}

/// `y ↦ ‖y‖_Y`.
pub fn y_norm(y: &FiniteBanachSpace, v: &[f64]) -> Result<f64> {
    y.norm(v)
}

/// A dual pair `⟨X, Y⟩` with `⟨x, y⟩ = xᵀ P y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    x: FiniteBanachSpace,
    y: FiniteBanachSpace,
    pairing: DMatrix<f64>,
}

impl DualPair {
    pub fn new(x: FiniteBanachSpace, y: FiniteBanachSpace, pairing: DMatrix<f64>) -> Result<Self> {
        check_dim("dual pair dimensions", x.dim, y.dim)?;
        check_dim("pairing matrix rows", x.dim, pairing.nrows())?;
        check_dim("pairing matrix columns", y.dim, pairing.ncols())?;
        let sv = pairing.singular_values();
        let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
        if !(hi > 0.0 && lo > 1e-12 * hi) {
            return Err(Error::Validation(
                "pairing matrix is singular; the induced maps must be injective".into(),
            ));
        }
        Ok(Self { x, y, pairing })
    }

    /// `⟨Y*, Y⟩` with the identity pairing.
    pub fn standard(y: FiniteBanachSpace) -> Self {
        let n = y.dim;
        Self {
            x: y.dual(),
            y,
            pairing: DMatrix::identity(n, n),
        }
    }

    pub fn x(&self) -> &FiniteBanachSpace {
        &self.x
    }

    pub fn y(&self) -> &FiniteBanachSpace {
        &self.y
    }

    pub fn pairing_matrix(&self) -> &DMatrix<f64> {
        &self.pairing
    }

    pub fn dim(&self) -> usize {
        self.y.dim
    }

    pub fn pair(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim("pairing x", self.x.dim, x.len())?;
        check_dim("pairing y", self.y.dim, y.len())?;
        Ok(self.pair_unchecked(x, y))
    }

    pub(crate) fn pair_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, xi) in x.iter().enumerate() {
            if *xi != 0.0 {
                for (j, yj) in y.iter().enumerate() {
                    s += xi * self.pairing[(i, j)] * yj;
                }
            }
        }
        s
    }

    /// Estimates how far the pairing is from recovering both norms:
    /// `sup_{‖y‖=1} |‖y‖ − sup_{x∈B_X} ⟨x,y⟩|` and the symmetric quantity,
    /// over the coordinate directions and `samples` random unit vectors.
    pub fn is_norming(&self, tol: f64, samples: usize, seed: u64) -> Result<NormingReport> {
        let opts = NormOptions {
            seed,
            ..NormOptions::default()
        };
        // sup over B_X of xᵀ w is (1/scale_X)·‖w‖ in the dual coordinate norm
        let recover = |space: &FiniteBanachSpace, w: &DVector<f64>| -> Result<f64> {
            let e = space.coordinate_space();
            let target = FunctionSpace::new(MeasureSpace::counting(1)?, space.p);
            let row = DMatrix::from_row_slice(1, w.len(), w.as_slice());
            Ok(MatrixOperator::new(row, e, target)?.operator_norm_with(&opts)?.value / space.scale)
        };
        let probes = |space: &FiniteBanachSpace, stream: u64| -> Vec<Vec<f64>> {
            let mut out = Vec::with_capacity(space.dim + samples);
            for i in 0..space.dim {
                let mut v = vec![0.0; space.dim];
                v[i] = 1.0;
                let n = space.norm_unchecked(&v);
                out.push(v.into_iter().map(|x| x / n).collect());
            }
            for k in 0..samples as u64 {
                out.push(space.random_unit(&mut trial_rng(seed, stream, k)));
            }
            out
        };
        let mut y_defect = 0.0f64;
        for y in probes(&self.y, 1) {
            let w = &self.pairing * DVector::from_vec(y.clone());
            y_defect = y_defect.max((self.y.norm_unchecked(&y) - recover(&self.x, &w)?).abs());
        }
        let mut x_defect = 0.0f64;
        for x in probes(&self.x, 2) {
            let w = self.pairing.transpose() * DVector::from_vec(x.clone());
            x_defect = x_defect.max((self.x.norm_unchecked(&x) - recover(&self.y, &w)?).abs());
        }
        let max_defect = x_defect.max(y_defect);
        Ok(NormingReport {
            y_defect,
            x_defect,
            max_defect,
            norming: max_defect <= tol,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormingReport {
    pub y_defect: f64,
    pub x_defect: f64,
    pub max_defect: f64,
    pub norming: bool,
}

impl Serialize for DualPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let rows: Vec<Vec<f64>> = (0..self.pairing.nrows())
            .map(|i| self.pairing.row(i).iter().copied().collect())
            .collect();
        let mut st = s.serialize_struct("DualPair", 3)?;
        st.serialize_field("x", &self.x)?;
        st.serialize_field("y", &self.y)?;
        st.serialize_field("pairing", &rows)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for DualPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            x: Option<FiniteBanachSpace>,
            y: FiniteBanachSpace,
            pairing: Option<Vec<Vec<f64>>>,
        }
        let r = Repr::deserialize(d)?;
        let x = r.x.unwrap_or_else(|| r.y.dual());
        let n = r.y.dim;
        let p = match r.pairing {
            None => DMatrix::identity(n, n),
            Some(rows) => {
                if rows.len() != x.dim || rows.iter().any(|row| row.len() != n) {
                    return Err(serde::de::Error::custom("pairing matrix shape does not match dim(X) x dim(Y)"));
                }
                DMatrix::from_fn(x.dim, n, |i, j| rows[i][j])
            }
        };
        DualPair::new(x, r.y, p).map_err(serde::de::Error::custom)
    }
}

/// A function from the atoms into a coordinate Banach space, stored as an
/// `atoms × dim` matrix whose row `a` holds the coordinates of `f(a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFunction(pub DMatrix<f64>);

impl VectorFunction {
    pub fn zeros(atoms: usize, dim: usize) -> Self {
        Self(DMatrix::zeros(atoms, dim))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                context: "ragged vector function",
                expected: dim,
                found: r.len(),
            });
        }
        Ok(Self(DMatrix::from_fn(rows.len(), dim, |a, i| rows[a][i])))
    }

    /// The elementary tensor `e ⊗ y`.
    pub fn tensor(e: &ScalarFunction, y: &[f64]) -> Self {
        Self(&e.0 * DVector::from_column_slice(y).transpose())
    }

    pub fn atoms(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn row(&self, a: usize) -> Vec<f64> {
        self.0.row(a).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.atoms()).map(|a| self.row(a)).collect()
    }

    /// The scalar function `a ↦ ‖f(a)‖_Y`.
    pub fn pointwise_norm(&self, y: &FiniteBanachSpace) -> Result<ScalarFunction> {
        check_dim("vector function dimension", y.dim, self.dim())?;
        Ok(ScalarFunction::from_vec(
            (0..self.atoms()).map(|a| y.norm_unchecked(&self.row(a))).collect(),
        ))
    }

    /// The scalar function `a ↦ ⟨x, f(a)⟩`.
    pub fn pair_pointwise(&self, pair: &DualPair, x: &[f64]) -> Result<ScalarFunction> {
        check_dim("vector function dimension", pair.dim(), self.dim())?;
        check_dim("probe dimension", pair.x().dim, x.len())?;
        let px = pair.pairing_matrix().transpose() * DVector::from_column_slice(x);
        Ok(ScalarFunction(&self.0 * px))
    }

    pub fn max_abs_diff(&self, other: &VectorFunction) -> f64 {
        (&self.0 - &other.0).amax()
    }
}

impl Serialize for VectorFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for VectorFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        VectorFunction::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// `‖‖f(·)‖_Y‖_E`.
pub fn bochner_norm(e: &FunctionSpace, y: &FiniteBanachSpace, f: &VectorFunction) -> Result<f64> {
    check_dim("Bochner norm atoms", e.len(), f.atoms())?;
    e.norm(&f.pointwise_norm(y)?)
}

/// `Σ_a ⟨e(a), f(a)⟩ μ_a` for `X`-valued `e` and `Y`-valued `f`.
pub fn bochner_pairing(
    space: &MeasureSpace,
    pair: &DualPair,
    e: &VectorFunction,
    f: &VectorFunction,
) -> Result<f64> {
    check_dim("Bochner pairing atoms", space.len(), e.atoms())?;
    check_dim("Bochner pairing atoms", space.len(), f.atoms())?;
    check_dim("Bochner pairing X dimension", pair.x().dim, e.dim())?;
    check_dim("Bochner pairing Y dimension", pair.y().dim, f.dim())?;
    let pf = &f.0 * pair.pairing_matrix().transpose();
    Ok((0..space.len())
        .map(|a| e.0.row(a).dot(&pf.row(a)) * space.weight(a))
        .sum())
}

/// A basis `{b_n}` of `Y` with biorthogonal functionals `{b_n*}` in `X`
/// (`⟨b_m*, b_n⟩ = δ_mn`) and basis constant `K = max_N ‖Π_N‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    vectors: DMatrix<f64>,
    functionals: DMatrix<f64>,
    constant: f64,
    constant_exact: bool,
}

impl Basis {
    /// Columns of `vectors` are the basis vectors in `Y` coordinates.
    pub fn new(vectors: DMatrix<f64>, pair: &DualPair) -> Result<Self> {
        let n = pair.dim();
        check_dim("basis rows", n, vectors.nrows())?;
        check_dim("basis size", n, vectors.ncols())?;
        let pb = pair.pairing_matrix() * &vectors;
        let inv = pb
            .clone()
            .try_inverse()
            .filter(|_| {
                let sv = pb.singular_values();
                sv.min() > 1e-12 * sv.max()
            })
            .ok_or_else(|| Error::Validation("basis vectors are linearly dependent".into()))?;
        let functionals = inv.transpose();
        let mut basis = Self {
            vectors,
            functionals,
            constant: 1.0,
            constant_exact: true,
        };
        let (k, exact) = basis.compute_constant(pair)?;
        basis.constant = k.max(1.0);
        basis.constant_exact = exact;
        Ok(basis)
    }

    pub fn standard(pair: &DualPair) -> Result<Self> {
        Self::new(DMatrix::identity(pair.dim(), pair.dim()), pair)
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, n: usize) -> Vec<f64> {
        self.vectors.column(n).iter().copied().collect()
    }

    pub fn functional(&self, n: usize) -> Vec<f64> {
        self.functionals.column(n).iter().copied().collect()
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn functionals(&self) -> &DMatrix<f64> {
        &self.functionals
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// False when some projection norm came from ascent (lower bound).
    pub fn constant_is_exact(&self) -> bool {
        self.constant_exact
    }

    /// Matrix of `Π_N y = Σ_{n<N} ⟨b_n*, y⟩ b_n` in `Y` coordinates.
    pub fn projection(&self, pair: &DualPair, n: usize) -> DMatrix<f64> {
        let b = self.vectors.columns(0, n);
        let bs = self.functionals.columns(0, n);
        b * bs.transpose() * pair.pairing_matrix()
    }

    fn compute_constant(&self, pair: &DualPair) -> Result<(f64, bool)> {
        let y = pair.y().coordinate_space();
        let mut k = 1.0f64;
        let mut exact = true;
        for n in 1..=self.len() {
            let est = MatrixOperator::new(self.projection(pair, n), y.clone(), y.clone())?.operator_norm()?;
            k = k.max(est.value);
            exact &= est.exact;
        }
        Ok((k, exact))
    }

    /// Checks `⟨b_m*, b_n⟩ = δ_mn`; returns the largest deviation.
    pub fn biorthogonality_defect(&self, pair: &DualPair) -> f64 {
        let g = self.functionals.transpose() * pair.pairing_matrix() * &self.vectors;
        (g - DMatrix::identity(self.len(), self.len())).amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(v: &[f64]) -> ScalarFunction {
        ScalarFunction::from_vec(v.to_vec())
    }

    #[test]
    fn y_norm_examples() {
        assert_eq!(y_norm(&FiniteBanachSpace::lp(2, 2.0).unwrap(), &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(
            y_norm(&FiniteBanachSpace::lp(2, f64::INFINITY).unwrap(), &[3.0, -4.0]).unwrap(),
            4.0
        );
        assert_eq!(y_norm(&FiniteBanachSpace::lp(3, 1.0).unwrap(), &[1.0, 1.0, 1.0]).unwrap(), 3.0);
        assert!(y_norm(&FiniteBanachSpace::lp(3, 1.0).unwrap(), &[1.0]).is_err());
        assert!(FiniteBanachSpace::lp(0, 1.0).is_err());
    }

    #[test]
    fn norming_examples() {
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let pair = DualPair::standard(FiniteBanachSpace::lp(3, p).unwrap());
            let r = pair.is_norming(1e-8, 8, 7).unwrap();
            assert!(r.norming, "p={p}: {r:?}");
        }
        let y = FiniteBanachSpace::lp(2, 2.0).unwrap();
        let x = y.dual().rescaled(2.0).unwrap();
        let pair = DualPair::new(x, y, DMatrix::identity(2, 2)).unwrap();
        let r = pair.is_norming(1e-8, 8, 7).unwrap();
        assert!(!r.norming);
        assert!((r.y_defect - 0.5).abs() < 1e-12);
        assert!((r.x_defect - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_pairing_rejected() {
        let y = FiniteBanachSpace::lp(2, 2.0).unwrap();
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(DualPair::new(y.dual(), y, p).is_err());
    }

    #[test]
    fn bochner_norm_examples() {
        let f = VectorFunction::from_rows(&[vec![3.0, 4.0], vec![1.0, 0.0]]).unwrap();
        let y = FiniteBanachSpace::lp(2, 2.0).unwrap();
        let linf = FunctionSpace::sequence(2, f64::INFINITY).unwrap();
        assert_eq!(bochner_norm(&linf, &y, &f).unwrap(), 5.0);
        let l1 = FunctionSpace::sequence(2, 1.0).unwrap();
        assert_eq!(bochner_norm(&l1, &y, &f).unwrap(), 6.0);
        assert_eq!(bochner_norm(&l1, &y, &VectorFunction::zeros(2, 2)).unwrap(), 0.0);
        assert!(bochner_norm(&FunctionSpace::sequence(3, 1.0).unwrap(), &y, &f).is_err());
    }

    #[test]
    fn bochner_pairing_examples() {
        let m = MeasureSpace::counting(2).unwrap();
        let pair = DualPair::standard(FiniteBanachSpace::lp(2, 2.0).unwrap());
        let id = VectorFunction::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(bochner_pairing(&m, &pair, &id, &id).unwrap(), 2.0);
        assert_eq!(bochner_pairing(&m, &pair, &VectorFunction::zeros(2, 2), &id).unwrap(), 0.0);

        let mu = MeasureSpace::new(vec![0.5, 3.0]).unwrap();
        let p = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, -1.0, 1.0]);
        let y = FiniteBanachSpace::lp(2, 2.0).unwrap();
        let pair = DualPair::new(y.dual(), y, p).unwrap();
        let (e, f) = (sf(&[1.0, -2.0]), sf(&[0.5, 4.0]));
        let (x, yv) = ([1.0, 3.0], [-2.0, 0.25]);
        let lhs = bochner_pairing(&mu, &pair, &VectorFunction::tensor(&e, &x), &VectorFunction::tensor(&f, &yv))
            .unwrap();
        let rhs = crate::funcspace::pairing(&mu, &e, &f).unwrap() * pair.pair(&x, &yv).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn standard_basis_has_constant_one() {
        for p in [1.0, 2.0, f64::INFINITY] {
            let pair = DualPair::standard(FiniteBanachSpace::lp(3, p).unwrap());
            let b = Basis::standard(&pair).unwrap();
            assert_eq!(b.constant(), 1.0);
            assert!(b.constant_is_exact());
            assert_eq!(b.biorthogonality_defect(&pair), 0.0);
        }
    }

    #[test]
    fn skewed_basis_biorthogonals() {
        let y = FiniteBanachSpace::lp(2, f64::INFINITY).unwrap();
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 2.0]);
        let pair = DualPair::new(y.dual(), y, p).unwrap();
        let b = Basis::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]), &pair).unwrap();
        assert!(b.biorthogonality_defect(&pair) < 1e-14);
        // Π_1 y = (y_0 - y_1, 0), of norm 2 on ℓ^∞
        assert!((b.constant() - 2.0).abs() < 1e-12);
        assert!(b.constant_is_exact());
        assert!(Basis::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]), &pair).is_err());
    }

    #[test]
    fn json_fragments() {
        let y: FiniteBanachSpace = serde_json::from_str(r#"{"p":"inf","dim":3}"#).unwrap();
        assert_eq!(y.scale, 1.0);
        assert!(y.p.is_infinite());
        let pair: DualPair = serde_json::from_str(r#"{"y":{"p":2,"dim":2},"pairing":[[1,0],[0,2]]}"#).unwrap();
        assert_eq!(pair.pairing_matrix()[(1, 1)], 2.0);
        assert!(pair.x().p.is_two());
        assert!(serde_json::from_str::<DualPair>(r#"{"y":{"p":2,"dim":2},"pairing":[[1,1],[1,1]]}"#).is_err());
        let f: VectorFunction = serde_json::from_str("[[1,2],[3,4],[5,6]]").unwrap();
        assert_eq!((f.atoms(), f.dim()), (3, 2));
    }
}
