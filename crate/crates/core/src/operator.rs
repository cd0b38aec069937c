//! Matrix operators between weighted `L^p` spaces: application, adjoints,
//! least dominants, operator norms and the regular (`M`-) norm.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::funcspace::{Exponent, FunctionSpace, ScalarFunction};
use crate::rng::trial_rng;

/// Largest source dimension for which `L^∞` norms are computed by
/// enumerating sign vectors.
pub const ENUMERATION_CAP: usize = 24;

/// A linear operator `E → G` given by a `target × source` matrix:
/// `(Tf)_b = Σ_a M[b,a] f_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOperator {
    matrix: DMatrix<f64>,
    source: FunctionSpace,
    target: FunctionSpace,
}

impl MatrixOperator {
    pub fn new(matrix: DMatrix<f64>, source: FunctionSpace, target: FunctionSpace) -> Result<Self> {
        check_dim("operator rows vs target atoms", target.len(), matrix.nrows())?;
        check_dim("operator columns vs source atoms", source.len(), matrix.ncols())?;
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("operator matrix has non-finite entries".into()));
        }
        Ok(Self {
            matrix,
            source,
            target,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], source: FunctionSpace, target: FunctionSpace) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch {
                context: "ragged operator matrix",
                expected: ncols,
                found: r.len(),
            });
        }
        let m = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
        Self::new(m, source, target)
    }

    pub fn identity(space: FunctionSpace) -> Self {
        let n = space.len();
        Self {
            matrix: DMatrix::identity(n, n),
            source: space.clone(),
            target: space,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn source(&self) -> &FunctionSpace {
        &self.source
    }

    pub fn target(&self) -> &FunctionSpace {
        &self.target
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.matrix.nrows())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    /// Same matrix, different spaces.
    pub fn with_spaces(&self, source: FunctionSpace, target: FunctionSpace) -> Result<Self> {
        Self::new(self.matrix.clone(), source, target)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrix: &self.matrix * c,
            ..self.clone()
        }
    }

    pub fn apply(&self, f: &ScalarFunction) -> Result<ScalarFunction> {
        check_dim("operator application", self.matrix.ncols(), f.len())?;
        Ok(ScalarFunction(&self.matrix * &f.0))
    }

    pub fn is_positive(&self) -> bool {
        self.matrix.iter().all(|&v| v >= 0.0)
    }

    /// The least dominant `|T|`, which on finite atomic spaces is the entrywise
    /// absolute value.
    pub fn least_dominant(&self) -> MatrixOperator {
        Self {
            matrix: self.matrix.abs(),
            ..self.clone()
        }
    }

    /// True iff `r` is positive and `r ≥ |T|` entrywise.
    pub fn is_dominated_by(&self, r: &MatrixOperator) -> Result<bool> {
        check_dim("dominant rows", self.matrix.nrows(), r.matrix.nrows())?;
        check_dim("dominant columns", self.matrix.ncols(), r.matrix.ncols())?;
        Ok(r
            .matrix
            .iter()
            .zip(self.matrix.iter())
            .all(|(&rv, &tv)| rv >= 0.0 && rv >= tv.abs()))
    }

    /// Largest violation of `|Te| ≤ R|e|` over the supplied test functions
    /// (nonpositive when the domination holds on all of them).
    pub fn domination_defect_on(&self, r: &MatrixOperator, samples: &[ScalarFunction]) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for e in samples {
            let te = self.apply(e)?;
            let re = r.apply(&e.abs())?;
            for (a, b) in te.0.iter().zip(re.0.iter()) {
                worst = worst.max(a.abs() - b);
            }
        }
        Ok(worst)
    }

    /// Adjoint with respect to the Köthe pairings `⟨E^×, E⟩` and `⟨G^×, G⟩`:
    /// an operator `G^× → E^×`.
    pub fn adjoint(&self) -> MatrixOperator {
        self.adjoint_between(self.source.kothe_dual(), self.target.kothe_dual())
            .expect("Köthe duals share the measure spaces")
    }

    /// Adjoint `S: F → D` of `T: E → G` for the integral pairings `⟨D, E⟩` and
    /// `⟨F, G⟩`, i.e. `Σ_b g_b (Th)_b ν_b = Σ_a (Sg)_a h_a μ_a`.
    pub fn adjoint_between(&self, d: FunctionSpace, f: FunctionSpace) -> Result<MatrixOperator> {
        if d.measure() != self.source.measure() {
            return Err(Error::Validation(
                "adjoint: source pair does not share the operator's source measure".into(),
            ));
        }
        if f.measure() != self.target.measure() {
            return Err(Error::Validation(
                "adjoint: target pair does not share the operator's target measure".into(),
            ));
        }
        let mu = self.source.measure().weights();
        let nu = self.target.measure().weights();
        let m = DMatrix::from_fn(self.matrix.ncols(), self.matrix.nrows(), |a, b| {
            self.matrix[(b, a)] * nu[b] / mu[a]
        });
        MatrixOperator::new(m, f, d)
    }

    pub fn operator_norm(&self) -> Result<NormEstimate> {
        self.operator_norm_with(&NormOptions::default())
    }

    pub fn operator_norm_with(&self, opts: &NormOptions) -> Result<NormEstimate> {
        if opts.method == NormMethod::Ascent {
            return Ok(self.ascent_norm(opts));
        }
        let p = self.source.exponent();
        if p.is_one() {
            Ok(self.l1_source_norm())
        } else if p.is_infinite() {
            self.sign_enumeration_norm()
        } else if p.is_two() && self.target.exponent().is_two() {
            Ok(self.spectral_norm(opts))
        } else if self.target.exponent().is_infinite() {
            Ok(self.row_functional_norm())
        } else if self.target.exponent().is_one() {
            self.target_sign_norm()
        } else {
            Ok(self.ascent_norm(opts))
        }
    }

    /// `‖|T|‖`, the norm of the least dominant.
    pub fn m_norm(&self) -> Result<f64> {
        Ok(self.least_dominant().operator_norm()?.value)
    }

    pub fn m_norm_with(&self, opts: &NormOptions) -> Result<f64> {
        Ok(self.least_dominant().operator_norm_with(opts)?.value)
    }

    /// Largest `‖Σ|Te_n|‖_G / ‖Σ|e_n|‖_E` over the supplied tuples.
    pub fn buhvalov_ratio(&self, tuples: &[Vec<ScalarFunction>]) -> Result<f64> {
        if tuples.is_empty() {
            return Err(Error::Validation("buhvalov_ratio needs at least one tuple".into()));
        }
        let mut best = 0.0f64;
        for tuple in tuples {
            let mut num = DVector::zeros(self.matrix.nrows());
            let mut den = DVector::zeros(self.matrix.ncols());
            for e in tuple {
                num += self.apply(e)?.0.abs();
                den += e.0.abs();
            }
            let d = self.source.norm_unchecked(den.as_slice());
            if d > 0.0 {
                best = best.max(self.target.norm_unchecked(num.as_slice()) / d);
            }
        }
        Ok(best)
    }

    fn ratio(&self, x: &[f64]) -> f64 {
        let nx = self.source.norm_unchecked(x);
        if nx == 0.0 {
            return 0.0;
        }
        let y = &self.matrix * DVector::from_column_slice(x);
        self.target.norm_unchecked(y.as_slice()) / nx
    }

    fn certify(&self, witness: Vec<f64>, exact: bool) -> NormEstimate {
        NormEstimate {
            value: self.ratio(&witness),
            witness,
            exact,
        }
    }

    fn l1_source_norm(&self) -> NormEstimate {
        let mu = self.source.measure().weights();
        let mut best = (f64::NEG_INFINITY, 0);
        for (a, w) in mu.iter().enumerate() {
            let v = self.target.norm_unchecked(self.matrix.column(a).as_slice()) / w;
            if v > best.0 {
                best = (v, a);
            }
        }
        let mut witness = vec![0.0; mu.len()];
        witness[best.1] = 1.0 / mu[best.1];
        self.certify(witness, true)
    }

    fn sign_enumeration_norm(&self) -> Result<NormEstimate> {
        let n = self.matrix.ncols();
        if n > ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                n,
                cap: ENUMERATION_CAP,
            });
        }
        // The last sign is fixed to +1 (the norm is even). The next `high`
        // bits select a chunk; each chunk walks a Gray code over the rest.
        let free = n - 1;
        let high = free.min(8);
        let low = free - high;
        let chunks: Vec<u64> = (0..1u64 << high).collect();
        let best = chunks
            .par_iter()
            .map(|&chunk| {
                let mut signs = vec![1.0; n];
                for h in 0..high {
                    if chunk >> h & 1 == 1 {
                        signs[low + h] = -1.0;
                    }
                }
                let mut y = &self.matrix * DVector::from_column_slice(&signs);
                let mut best = (self.target.norm_unchecked(y.as_slice()), signs.clone());
                for k in 1..(1u64 << low) {
                    let j = k.trailing_zeros() as usize;
                    let s = signs[j];
                    y.axpy(-2.0 * s, &self.matrix.column(j), 1.0);
                    signs[j] = -s;
                    let v = self.target.norm_unchecked(y.as_slice());
                    if v > best.0 {
                        best = (v, signs.clone());
                    }
                }
                (best.0, chunk, best.1)
            })
            .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
            .expect("at least one chunk");
        Ok(self.certify(best.2, true))
    }

    /// A vector of unit `E`-norm attaining `sup_{‖x‖≤1} Σ_a c_a x_a` (Hölder
    /// equality case).
    fn attaining_vector(&self, c: &[f64]) -> Vec<f64> {
        let mu = self.source.measure().weights();
        let w: Vec<f64> = c.iter().zip(mu).map(|(c, m)| c / m).collect();
        let x: Vec<f64> = match self.source.exponent() {
            Exponent::Infinity => w.iter().map(|v| if *v < 0.0 { -1.0 } else { 1.0 }).collect(),
            Exponent::Finite(1.0) => {
                let a = w.iter().enumerate().fold(0, |bi, (i, v)| if v.abs() > w[bi].abs() { i } else { bi });
                let mut x = vec![0.0; w.len()];
                x[a] = w[a].signum() / mu[a];
                x
            }
            Exponent::Finite(p) => {
                let q = p / (p - 1.0);
                let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                w.iter()
                    .map(|v| if scale == 0.0 { 0.0 } else { v.signum() * (v.abs() / scale).powf(q - 1.0) })
                    .collect()
            }
        };
        let n = self.source.norm_unchecked(&x);
        if n > 0.0 {
            x.iter().map(|v| v / n).collect()
        } else {
            x
        }
    }

    /// Target `L^∞`: `‖T‖ = max_b sup_x |(Tx)_b|`, each row maximized in
    /// closed form.
    fn row_functional_norm(&self) -> NormEstimate {
        let mut best: Option<NormEstimate> = None;
        for b in 0..self.matrix.nrows() {
            let c: Vec<f64> = self.matrix.row(b).iter().copied().collect();
            let est = self.certify(self.attaining_vector(&c), true);
            if best.as_ref().is_none_or(|e| est.value > e.value) {
                best = Some(est);
            }
        }
        best.expect("at least one row")
    }

    /// Target `L¹`: `‖Tx‖_1 = max_s Σ_b s_b ν_b (Tx)_b` over sign vectors `s`,
    /// so `‖T‖` is the largest dual norm of the functionals `x ↦ ⟨sν, Tx⟩`.
    fn target_sign_norm(&self) -> Result<NormEstimate> {
        let m = self.matrix.nrows();
        if m > ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                n: m,
                cap: ENUMERATION_CAP,
            });
        }
        let nu = self.target.measure().weights();
        let best = (0..1u64 << (m - 1))
            .into_par_iter()
            .map(|bits| {
                let s = DVector::from_fn(m, |b, _| if bits >> b & 1 == 1 { -nu[b] } else { nu[b] });
                let c = self.matrix.transpose() * s;
                (self.certify(self.attaining_vector(c.as_slice()), true), bits)
            })
            .reduce_with(|a, b| if b.0.value > a.0.value || (b.0.value == a.0.value && b.1 < a.1) { b } else { a })
            .expect("at least one sign vector");
        Ok(best.0)
    }

    /// Largest singular value of `D_ν^{1/2} M D_μ^{-1/2}` by power iteration.
    fn spectral_norm(&self, opts: &NormOptions) -> NormEstimate {
        let mu = self.source.measure().weights();
        let nu = self.target.measure().weights();
        let a = DMatrix::from_fn(self.matrix.nrows(), self.matrix.ncols(), |b, c| {
            self.matrix[(b, c)] * nu[b].sqrt() / mu[c].sqrt()
        });
        let ata = a.transpose() * &a;
        let n = ata.nrows();
        let mut best: Option<NormEstimate> = None;
        for start in 0..4u64 {
            let mut rng = trial_rng(opts.seed, 0x5eed_0002, start);
            let mut v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            if v.norm() == 0.0 {
                v[0] = 1.0;
            }
            v.normalize_mut();
            let mut lambda = 0.0;
            for _ in 0..opts.max_iter.max(100) {
                let w = &ata * &v;
                let nw = w.norm();
                if nw == 0.0 {
                    break;
                }
                let next = w / nw;
                let l = (&ata * &next).dot(&next);
                let done = (l - lambda).abs() <= 1e-15 * l.abs() && (&next - &v).norm() < 1e-12;
                v = next;
                lambda = l;
                if done {
                    break;
                }
            }
            let witness: Vec<f64> = v.iter().zip(mu).map(|(x, m)| x / m.sqrt()).collect();
            let est = self.certify(witness, true);
            if best.as_ref().is_none_or(|b| est.value > b.value) {
                best = Some(est);
            }
        }
        best.expect("four starts")
    }

    /// Multistart projected-gradient ascent of `‖Tx‖_G` on the unit sphere of
    /// `E`, each iteration preceded by a conditional-gradient step (the
    /// nonlinear power method). Returns a lower bound with its witness.
    fn ascent_norm(&self, opts: &NormOptions) -> NormEstimate {
        let n = self.matrix.ncols();
        let results: Vec<(f64, Vec<f64>)> = (0..opts.starts as u64)
            .into_par_iter()
            .map(|start| {
                let x0: Vec<f64> = if (start as usize) < n {
                    let mut e = vec![0.0; n];
                    e[start as usize] = 1.0;
                    e
                } else if start as usize == n {
                    vec![1.0; n]
                } else {
                    let mut rng = trial_rng(opts.seed, 0x5eed_0001, start);
                    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
                };
                self.ascend_from(x0, opts)
            })
            .collect();
        let (_, witness) = results
            .into_iter()
            .fold((f64::NEG_INFINITY, Vec::new()), |best, r| if r.0 > best.0 { r } else { best });
        self.certify(witness, false)
    }

    fn ascend_from(&self, x0: Vec<f64>, opts: &NormOptions) -> (f64, Vec<f64>) {
        let src = &self.source;
        let normalize = |x: Vec<f64>| -> Option<Vec<f64>> {
            let nx = src.norm_unchecked(&x);
            (nx > 0.0 && nx.is_finite()).then(|| x.iter().map(|v| v / nx).collect())
        };
        let Some(mut x) = normalize(x0) else {
            return (0.0, vec![0.0; self.matrix.ncols()]);
        };
        let objective = |x: &[f64]| {
            let y = &self.matrix * DVector::from_column_slice(x);
            self.target.norm_unchecked(y.as_slice())
        };
        let mut val = objective(&x);
        let mut step = 1.0;
        for _ in 0..opts.max_iter {
            let y = &self.matrix * DVector::from_column_slice(&x);
            let gy = self.target.norm_gradient(y.as_slice());
            let g = self.matrix.transpose() * DVector::from_vec(gy);
            // conditional-gradient step: maximize the linearization over the
            // unit ball; by convexity of x ↦ ‖Mx‖ it never decreases the value
            let mut improved = false;
            let fw = self.attaining_vector(g.as_slice());
            let v = objective(&fw);
            if v > val {
                improved = v - val > opts.tol * v.max(1e-300);
                x = fw;
                val = v;
            }
            let y = &self.matrix * DVector::from_column_slice(&x);
            let g = self.matrix.transpose() * DVector::from_vec(self.target.norm_gradient(y.as_slice()));
            // project onto the tangent space of the constraint surface
            let nx = DVector::from_vec(src.norm_gradient(&x));
            let nn = nx.norm_squared();
            let gt = if nn > 0.0 { &g - &nx * (g.dot(&nx) / nn) } else { g };
            let scale = gt.amax();
            if scale <= 1e-300 {
                if improved {
                    continue;
                }
                break;
            }
            while step > 1e-18 {
                let cand: Vec<f64> = x.iter().zip(gt.iter()).map(|(a, b)| a + step * b / scale).collect();
                if let Some(cand) = normalize(cand) {
                    let v = objective(&cand);
                    if v > val {
                        let gain = v - val;
                        x = cand;
                        val = v;
                        step = (step * 2.0).min(1e3);
                        improved |= gain > opts.tol * val.max(1e-300);
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (val, x)
    }
}

impl Serialize for MatrixOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("MatrixOperator", 3)?;
        st.serialize_field("matrix", &self.rows())?;
        st.serialize_field("source", &self.source)?;
        st.serialize_field("target", &self.target)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for MatrixOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            matrix: Vec<Vec<f64>>,
            source: FunctionSpace,
            target: FunctionSpace,
        }
        let r = Repr::deserialize(d)?;
        MatrixOperator::from_rows(&r.matrix, r.source, r.target).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    /// Exact method where one exists, ascent otherwise.
    Auto,
    /// Always use multistart ascent.
    Ascent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormOptions {
    pub method: NormMethod,
    pub starts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            method: NormMethod::Auto,
            starts: 64,
            tol: 1e-10,
            max_iter: 20_000,
            seed: 0x6e6f_726d,
        }
    }
}

/// An operator-norm value together with the vector attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub witness: Vec<f64>,
    /// True for the enumeration, extreme-point and spectral methods; false for
    /// ascent, where `value` is a lower bound.
    pub exact: bool,
}
