//! Seeded randomized verification suites and their reports.
//!
//! Each suite draws a corpus of small instances from per-trial seed streams,
//! evaluates them in parallel and reduces to one [`CheckReport`] per property.
//! A failing check carries a [`Witness`]: a self-contained instance that
//! [`replay`] re-evaluates to reproduce the violation.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::condexp::{cond_exp_vector, pairwise_coarsening, verify_condexp_properties_with};
use crate::duality::{DualPair, FiniteBanachSpace, VectorFunction};
use crate::error::{Error, Result};
use crate::extension::{
    adjoint_extension_pipeline, default_probes, domination_pointwise_check, extension_ratio,
    random_vector_function, tensor_extension_apply, verify_extension_relation,
};
use crate::funcspace::{Exponent, FunctionSpace, ScalarFunction};
use crate::limits::{c0_counterexample, l1_counterexample, CesaroFunctional};
use crate::measure::{MeasureSpace, Partition};
use crate::operator::{MatrixOperator, NormMethod, NormOptions};
use crate::rng::{stream_id, trial_rng};
use crate::sqfn::{gaussian_moment, gaussian_moment_quadrature, krivine_ratio, mz_constant, mz_ratio_check, KRIVINE_BOUND};

/// Residual tolerance for identities that hold up to rounding.
pub const RELATION_TOL: f64 = 1e-10;
/// Slack allowed on sampled norm bounds.
pub const NORM_BOUND_TOL: f64 = 1e-8;
/// Required excess of a sampled `ℓ¹₂`-valued ratio over `‖T‖`.
pub const M_NORM_MARGIN: f64 = 0.05;
/// Upper bound asserted for sampled Krivine ratios.
pub const KRIVINE_TOL: f64 = 1e-6;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Extension,
    Sqfn,
    Condexp,
    Counterexample,
    Norms,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Extension,
        Suite::Sqfn,
        Suite::Condexp,
        Suite::Counterexample,
        Suite::Norms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Extension => "extension",
            Suite::Sqfn => "sqfn",
            Suite::Condexp => "condexp",
            Suite::Counterexample => "counterexample",
            Suite::Norms => "norms",
        }
    }
}

/// Adds `delta` to one entry of every computed `T_Y f` before the relation
/// check; the entry is drawn per trial unless pinned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corruption {
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate: Option<usize>,
}

impl Corruption {
    fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() || self.delta == 0.0 {
            return Err(Error::Validation("corruption.delta must be finite and nonzero".into()));
        }
        Ok(())
    }

    /// Corrupts `output` in place and returns the entry touched.
    fn apply(&self, output: &mut VectorFunction, rng: &mut impl Rng) -> [usize; 2] {
        let a = self.atom.unwrap_or_else(|| rng.random_range(0..output.atoms())) % output.atoms();
        let j = self
            .coordinate
            .unwrap_or_else(|| rng.random_range(0..output.dim()))
            % output.dim();
        output.0[(a, j)] += self.delta;
        [a, j]
    }
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn all_suites() -> Vec<Suite> {
    Suite::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "all_suites")]
    pub suites: Vec<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption: Option<Corruption>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            suites: all_suites(),
            corruption: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Validation("trials must be at least 1".into()));
        }
        if self.suites.is_empty() {
            return Err(Error::Validation("suites must name at least one suite".into()));
        }
        if let Some(c) = &self.corruption {
            c.validate()?;
        }
        Ok(())
    }
}

/// One verified property. For upper checks `pass ⇔ max_residual ≤ bound`; for
/// lower checks (existence of a witness) `max_residual` is the largest
/// observed value and `pass ⇔ max_residual ≥ bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub check: String,
    pub instances: usize,
    pub max_residual: f64,
    pub bound: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub lower: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CheckReport {
    fn upper(suite: Suite, check: &str, instances: usize, max: f64, bound: f64, witness: impl FnOnce() -> Witness) -> Self {
        let pass = max <= bound;
        Self {
            suite: suite.name().into(),
            check: check.into(),
            instances,
            max_residual: max,
            bound,
            pass,
            lower: false,
            witness: (!pass).then(witness),
        }
    }

    fn lower(suite: Suite, check: &str, instances: usize, max: f64, bound: f64, witness: Witness) -> Self {
        Self {
            suite: suite.name().into(),
            check: check.into(),
            instances,
            max_residual: max,
            bound,
            pass: max >= bound,
            lower: true,
            witness: Some(witness),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

impl RunReport {
    pub fn check(&self, suite: Suite, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.suite == suite.name() && c.check == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// A self-contained instance reproducing one measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `‖⟨probe, output⟩ − T⟨probe, f⟩‖_G`.
    Relation {
        operator: MatrixOperator,
        pair: DualPair,
        f: VectorFunction,
        output: VectorFunction,
        probe: Vec<f64>,
        atom: usize,
        residual: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        corrupted: Option<[usize; 2]>,
    },
    /// `‖T_Y f‖ / ‖f‖ − reference`, where the reference is `m_norm`,
    /// `operator_norm` or `k_g · operator_norm` of the operator.
    Ratio {
        operator: MatrixOperator,
        y: FiniteBanachSpace,
        f: VectorFunction,
        reference: Reference,
        excess: f64,
    },
    /// `max_b (‖(T_Y f)(b)‖ − (|T| ‖f‖)(b))`.
    Domination {
        operator: MatrixOperator,
        y: FiniteBanachSpace,
        f: VectorFunction,
        defect: f64,
    },
    PipelineDuality {
        operator: MatrixOperator,
        pair: DualPair,
        f: VectorFunction,
        g: VectorFunction,
        residual: f64,
    },
    PipelineAgreement {
        operator: MatrixOperator,
        pair: DualPair,
        f: VectorFunction,
        residual: f64,
    },
    Krivine {
        operator: MatrixOperator,
        family: Vec<ScalarFunction>,
        ratio: f64,
    },
    Mz {
        operator: MatrixOperator,
        family: Vec<ScalarFunction>,
        p1: f64,
        p2: f64,
        defect: f64,
    },
    /// `|closed form − quadrature|` for `‖γ‖_p`.
    Moment { p: f64, gap: f64 },
    /// `|quantity − expected|` for a fixed fixture.
    Fixture {
        quantity: Quantity,
        expected: f64,
        gap: f64,
    },
    /// `|‖T‖ − ‖T^×‖|`.
    AdjointNorm { operator: MatrixOperator, gap: f64 },
    /// `‖T‖ − m_norm(T)`.
    NormVsMNorm { operator: MatrixOperator, excess: f64 },
    CondExp {
        space: MeasureSpace,
        partition: Partition,
        coarser: Partition,
        pair: DualPair,
        exponents: Vec<Exponent>,
        trials: usize,
        seed: u64,
        check: String,
        residual: f64,
    },
    /// `|Λ_N(Sx) − Λ_N(x)| − 2 sup|x| / N`.
    Shift {
        window: usize,
        sequence: Vec<f64>,
        excess: f64,
    },
    /// Largest drop of `min_head` along increasing windows.
    C0Monotone {
        windows: Vec<usize>,
        head: usize,
        drop: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    MNorm,
    OperatorNorm,
    KrivineOperatorNorm,
}

/// Scalar quantities used by fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Quantity {
    OperatorNorm { operator: MatrixOperator },
    MNorm { operator: MatrixOperator },
    GaussianMoment { p: f64 },
    MzConstant { p1: f64, p2: f64 },
    C0MinHead { window: usize, head: usize },
    L1Gap { window: usize, head: usize },
    CondExpApply { space: MeasureSpace, partition: Partition, f: Vec<f64>, expected: Vec<f64> },
}

impl Quantity {
    pub fn evaluate(&self) -> Result<f64> {
        match self {
            Quantity::OperatorNorm { operator } => Ok(operator.operator_norm()?.value),
            Quantity::MNorm { operator } => operator.m_norm(),
            Quantity::GaussianMoment { p } => gaussian_moment(*p),
            Quantity::MzConstant { p1, p2 } => mz_constant(*p1, *p2),
            Quantity::C0MinHead { window, head } => Ok(c0_counterexample(*window, *head)?.min_head),
            Quantity::L1Gap { window, head } => Ok(l1_counterexample(*window, *head)?.gap),
            // largest entrywise gap to the expected output; the fixture expects 0
            Quantity::CondExpApply {
                space,
                partition,
                f,
                expected,
            } => {
                let y = FiniteBanachSpace::lp(1, 1.0)?;
                let fv = VectorFunction(DMatrix::from_column_slice(f.len(), 1, f));
                let out = cond_exp_vector(space, partition, &y, &fv)?;
                let ev = VectorFunction(DMatrix::from_column_slice(expected.len(), 1, expected));
                Ok(out.max_abs_diff(&ev))
            }
        }
    }
}

/// Re-evaluates a witness from its stored instance; the result is the
/// quantity the witness records (residual, excess, gap, …).
pub fn replay(w: &Witness) -> Result<f64> {
    match w {
        Witness::Relation {
            operator,
            pair,
            f,
            output,
            probe,
            ..
        } => Ok(verify_extension_relation(operator, output, pair, f, std::slice::from_ref(probe))?.residual),
        Witness::Ratio {
            operator,
            y,
            f,
            reference,
            ..
        } => {
            let r = extension_ratio(operator, y, f)?;
            Ok(r - reference_value(operator, *reference)?)
        }
        Witness::Domination { operator, y, f, .. } => {
            domination_pointwise_check(operator, &operator.least_dominant(), y, f)
        }
        Witness::PipelineDuality { operator, pair, f, g, .. } => {
            adjoint_extension_pipeline(operator, pair)?.duality_residual(f, g)
        }
        Witness::PipelineAgreement { operator, pair, f, .. } => {
            adjoint_extension_pipeline(operator, pair)?.tensor_agreement(f)
        }
        Witness::Krivine { operator, family, .. } => krivine_ratio(operator, family),
        Witness::Mz {
            operator,
            family,
            p1,
            p2,
            ..
        } => Ok(mz_ratio_check(operator, family, *p1, *p2)?.defect),
        Witness::Moment { p, .. } => Ok((gaussian_moment(*p)? - gaussian_moment_quadrature(*p)?).abs()),
        Witness::Fixture { quantity, expected, .. } => Ok((quantity.evaluate()? - expected).abs()),
        Witness::AdjointNorm { operator, .. } => adjoint_gap(operator),
        Witness::NormVsMNorm { operator, .. } => Ok(operator.operator_norm()?.value - operator.m_norm()?),
        Witness::CondExp {
            space,
            partition,
            coarser,
            pair,
            exponents,
            trials,
            seed,
            check,
            ..
        } => {
            let r = verify_condexp_properties_with(space, partition, Some(coarser), pair, exponents, *trials, *seed)?;
            r.check(check)
                .map(|c| c.max_residual)
                .ok_or_else(|| Error::Validation(format!("unknown conditional expectation check `{check}`")))
        }
        Witness::Shift { window, sequence, .. } => {
            let l = CesaroFunctional::new(*window)?;
            Ok(l.shift_defect(sequence)? - l.shift_defect_bound(sequence))
        }
        Witness::C0Monotone { windows, head, .. } => c0_drop(windows, *head),
    }
}

fn reference_value(t: &MatrixOperator, r: Reference) -> Result<f64> {
    Ok(match r {
        Reference::MNorm => t.m_norm()?,
        Reference::OperatorNorm => t.operator_norm()?.value,
        Reference::KrivineOperatorNorm => KRIVINE_BOUND * t.operator_norm()?.value,
    })
}

fn adjoint_gap(t: &MatrixOperator) -> Result<f64> {
    Ok((t.operator_norm()?.value - t.adjoint().operator_norm()?.value).abs())
}

fn c0_drop(windows: &[usize], head: usize) -> Result<f64> {
    let mut drop = 0.0f64;
    let mut prev: Option<f64> = None;
    for &n in windows {
        let v = c0_counterexample(n, head)?.min_head;
        if let Some(p) = prev {
            drop = drop.max(p - v);
        }
        prev = Some(v);
    }
    Ok(drop)
}

/// Runs the configured suites concurrently; checks are reported in suite
/// order, then in each suite's fixed check order.
pub fn run_suites(config: &SuiteConfig) -> Result<RunReport> {
    config.validate()?;
    let mut suites = config.suites.clone();
    suites.sort();
    suites.dedup();
    let per_suite = suites
        .par_iter()
        .map(|&s| run_suite(s, config))
        .collect::<Result<Vec<_>>>()?;
    let checks: Vec<CheckReport> = per_suite.into_iter().flatten().collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(RunReport {
        seed: config.seed,
        trials: config.trials,
        checks,
        pass,
    })
}

pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<Vec<CheckReport>> {
    config.validate()?;
    match suite {
        Suite::Extension => extension_suite(config),
        Suite::Sqfn => sqfn_suite(config.seed, config.trials),
        Suite::Condexp => condexp_suite(config.seed, config.trials),
        Suite::Counterexample => counterexample_suite(config.seed, config.trials),
        Suite::Norms => norms_suite(config.seed, config.trials),
    }
}

// ---------------------------------------------------------------------------
// random instances

const LATTICE_EXPONENTS: [f64; 3] = [1.0, 2.0, f64::INFINITY];
const Y_EXPONENTS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];

fn random_measure(n: usize, rng: &mut impl Rng) -> MeasureSpace {
    if rng.random_bool(0.3) {
        MeasureSpace::counting(n).expect("n >= 1")
    } else {
        MeasureSpace::new((0..n).map(|_| rng.random_range(0.25..2.0)).collect()).expect("positive weights")
    }
}

fn pick(choices: &[f64], rng: &mut impl Rng) -> f64 {
    choices[rng.random_range(0..choices.len())]
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn random_lattice_operator(rng: &mut impl Rng, max_atoms: usize) -> MatrixOperator {
    let n = rng.random_range(1..=max_atoms);
    let m = rng.random_range(1..=max_atoms);
    let e = FunctionSpace::lp(random_measure(n, rng), pick(&LATTICE_EXPONENTS, rng)).expect("valid exponent");
    let g = FunctionSpace::lp(random_measure(m, rng), pick(&LATTICE_EXPONENTS, rng)).expect("valid exponent");
    MatrixOperator::new(gaussian_matrix(m, n, rng), e, g).expect("shapes match")
}

/// `Q₁ diag(s) Q₂` with singular values in `[0.5, 2]`.
fn random_pairing_matrix(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let q1 = gaussian_matrix(d, d, rng).qr().q();
    let q2 = gaussian_matrix(d, d, rng).qr().q();
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| rng.random_range(0.5..2.0)));
    q1 * s * q2
}

/// Half standard pairings, half pairings through a random well-conditioned
/// matrix.
fn random_pair(y: FiniteBanachSpace, rng: &mut impl Rng) -> DualPair {
    if rng.random_bool(0.5) {
        DualPair::standard(y)
    } else {
        let p = random_pairing_matrix(y.dim, rng);
        DualPair::new(y.dual(), y, p).expect("well-conditioned pairing")
    }
}

fn random_y(rng: &mut impl Rng) -> FiniteBanachSpace {
    FiniteBanachSpace::lp(rng.random_range(1..=4), pick(&Y_EXPONENTS, rng)).expect("valid exponent")
}

fn hadamard_on_l2() -> MatrixOperator {
    let s = FunctionSpace::sequence(2, 2.0).expect("valid exponent");
    MatrixOperator::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]], s.clone(), s).expect("2x2")
}

/// Index of the largest key (first one on ties; NaN counts as +∞).
fn argmax<T>(items: &[T], key: impl Fn(&T) -> f64) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, it) in items.iter().enumerate() {
        let v = key(it);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

fn max_of<T>(items: &[T], key: impl Fn(&T) -> f64) -> f64 {
    if items.is_empty() {
        return f64::NEG_INFINITY;
    }
    let v = key(&items[argmax(items, &key)]);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

// ---------------------------------------------------------------------------
// extension suite

/// A scalar operator, a dual pair `⟨X, Y⟩` and a `Y`-valued input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionInstance {
    pub operator: MatrixOperator,
    pub pair: DualPair,
    pub f: VectorFunction,
}

/// Every sixteenth instance is the Hadamard matrix on `ℓ²₂` with `Y = ℓ¹₂`,
/// where `‖T_Y‖` exceeds `‖T‖`; the rest are random over `E, G ∈ {L¹, L², L^∞}`
/// and `Y = ℓ^p_m`.
pub fn extension_instance(seed: u64, index: u64) -> ExtensionInstance {
    let mut rng = trial_rng(seed, stream_id("extension"), index);
    let (operator, y) = if index.is_multiple_of(16) {
        (hadamard_on_l2(), FiniteBanachSpace::lp(2, 1.0).expect("valid"))
    } else {
        (random_lattice_operator(&mut rng, 6), random_y(&mut rng))
    };
    let pair = random_pair(y, &mut rng);
    let f = random_vector_function(operator.source().len(), pair.dim(), &mut rng);
    ExtensionInstance { operator, pair, f }
}

struct ExtensionOutcome {
    relation: f64,
    probe: Vec<f64>,
    atom: usize,
    output: VectorFunction,
    corrupted: Option<[usize; 2]>,
    ratio: f64,
    m_norm: f64,
    /// `ratio − ‖T‖` for `Y = ℓ¹₂` instances.
    l1_excess: Option<f64>,
    domination: f64,
}

fn evaluate_extension(inst: &ExtensionInstance, corruption: Option<&Corruption>, rng: &mut ChaCha8Rng) -> Result<ExtensionOutcome> {
    let y = inst.pair.y();
    let mut output = tensor_extension_apply(&inst.operator, y, &inst.f)?;
    let corrupted = corruption.map(|c| c.apply(&mut output, rng));
    let probes = default_probes(&inst.pair, 8, rng);
    let rel = verify_extension_relation(&inst.operator, &output, &inst.pair, &inst.f, &probes)?;
    let ratio = extension_ratio(&inst.operator, y, &inst.f)?;
    let m_norm = inst.operator.m_norm()?;
    let l1_excess = if y.dim == 2 && y.p.is_one() && y.scale == 1.0 {
        Some(ratio - inst.operator.operator_norm()?.value)
    } else {
        None
    };
    let domination = domination_pointwise_check(&inst.operator, &inst.operator.least_dominant(), y, &inst.f)?;
    Ok(ExtensionOutcome {
        relation: rel.residual,
        probe: probes[rel.probe].clone(),
        atom: rel.atom,
        output,
        corrupted,
        ratio,
        m_norm,
        l1_excess,
        domination,
    })
}

/// An operator out of `L^∞(μ)` with a dual pair and inputs `f`, `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineInstance {
    pub operator: MatrixOperator,
    pub pair: DualPair,
    pub f: VectorFunction,
    pub g: VectorFunction,
}

pub fn pipeline_instance(seed: u64, index: u64) -> PipelineInstance {
    let mut rng = trial_rng(seed, stream_id("pipeline"), index);
    let n = rng.random_range(1..=6);
    let m = rng.random_range(1..=6);
    let e = FunctionSpace::new(random_measure(n, &mut rng), Exponent::Infinity);
    let g_space = FunctionSpace::lp(random_measure(m, &mut rng), pick(&LATTICE_EXPONENTS, &mut rng)).expect("valid");
    let operator = MatrixOperator::new(gaussian_matrix(m, n, &mut rng), e, g_space).expect("shapes match");
    let pair = random_pair(random_y(&mut rng), &mut rng);
    let f = random_vector_function(n, pair.dim(), &mut rng);
    let g = random_vector_function(m, pair.x().dim, &mut rng);
    PipelineInstance { operator, pair, f, g }
}

fn extension_suite(config: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let (seed, trials) = (config.seed, config.trials);
    let suite = Suite::Extension;
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let inst = extension_instance(seed, k);
            let mut rng = trial_rng(seed, stream_id("extension/probes"), k);
            evaluate_extension(&inst, config.corruption.as_ref(), &mut rng).map(|o| (inst, o))
        })
        .collect::<Result<Vec<_>>>()?;

    let rel_i = argmax(&outcomes, |(_, o)| o.relation);
    let relation = CheckReport::upper(suite, "relation", trials, outcomes[rel_i].1.relation, RELATION_TOL, || {
        let (inst, o) = &outcomes[rel_i];
        Witness::Relation {
            operator: inst.operator.clone(),
            pair: inst.pair.clone(),
            f: inst.f.clone(),
            output: o.output.clone(),
            probe: o.probe.clone(),
            atom: o.atom,
            residual: o.relation,
            corrupted: o.corrupted,
        }
    });

    let nb_i = argmax(&outcomes, |(_, o)| o.ratio - o.m_norm);
    let nb = outcomes[nb_i].1.ratio - outcomes[nb_i].1.m_norm;
    let norm_bound = CheckReport::upper(suite, "norm_bound", trials, nb, NORM_BOUND_TOL, || {
        let (inst, _) = &outcomes[nb_i];
        Witness::Ratio {
            operator: inst.operator.clone(),
            y: inst.pair.y().clone(),
            f: inst.f.clone(),
            reference: Reference::MNorm,
            excess: nb,
        }
    });

    let l1: Vec<&(ExtensionInstance, ExtensionOutcome)> =
        outcomes.iter().filter(|(_, o)| o.l1_excess.is_some()).collect();
    let l1_i = argmax(&l1, |(_, o)| o.l1_excess.unwrap_or(f64::NEG_INFINITY));
    let (l1_inst, l1_out) = l1[l1_i];
    let l1_excess = l1_out.l1_excess.unwrap_or(f64::NEG_INFINITY);
    let m_norm_witness = CheckReport::lower(
        suite,
        "m_norm_witness",
        l1.len(),
        l1_excess,
        M_NORM_MARGIN,
        Witness::Ratio {
            operator: l1_inst.operator.clone(),
            y: l1_inst.pair.y().clone(),
            f: l1_inst.f.clone(),
            reference: Reference::OperatorNorm,
            excess: l1_excess,
        },
    );

    let dom_i = argmax(&outcomes, |(_, o)| o.domination);
    let dom = outcomes[dom_i].1.domination;
    let domination = CheckReport::upper(suite, "domination", trials, dom, RELATION_TOL, || {
        let (inst, _) = &outcomes[dom_i];
        Witness::Domination {
            operator: inst.operator.clone(),
            y: inst.pair.y().clone(),
            f: inst.f.clone(),
            defect: dom,
        }
    });

    let pipeline = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let inst = pipeline_instance(seed, k);
            let p = adjoint_extension_pipeline(&inst.operator, &inst.pair)?;
            Ok((p.duality_residual(&inst.f, &inst.g)?, p.tensor_agreement(&inst.f)?, inst))
        })
        .collect::<Result<Vec<_>>>()?;
    let du_i = argmax(&pipeline, |p| p.0);
    let duality = CheckReport::upper(suite, "pipeline_duality", trials, pipeline[du_i].0, RELATION_TOL, || {
        let (r, _, inst) = &pipeline[du_i];
        Witness::PipelineDuality {
            operator: inst.operator.clone(),
            pair: inst.pair.clone(),
            f: inst.f.clone(),
            g: inst.g.clone(),
            residual: *r,
        }
    });
    let ag_i = argmax(&pipeline, |p| p.1);
    let agreement = CheckReport::upper(suite, "pipeline_agreement", trials, pipeline[ag_i].1, RELATION_TOL, || {
        let (_, r, inst) = &pipeline[ag_i];
        Witness::PipelineAgreement {
            operator: inst.operator.clone(),
            pair: inst.pair.clone(),
            f: inst.f.clone(),
            residual: *r,
        }
    });

    Ok(vec![relation, norm_bound, m_norm_witness, domination, duality, agreement])
}

/// `verify extension` on a fixed operator and space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionScenario {
    pub operator: MatrixOperator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<FiniteBanachSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<DualPair>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption: Option<Corruption>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionScenarioReport {
    pub trials: usize,
    pub max_residual: f64,
    pub max_ratio: f64,
    pub m_norm: f64,
    pub operator_norm: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

fn resolve_pair(y: &Option<FiniteBanachSpace>, pair: &Option<DualPair>) -> Result<DualPair> {
    match (y, pair) {
        (_, Some(p)) => {
            if let Some(y) = y {
                if y != p.y() {
                    return Err(Error::Validation("`y` disagrees with `pair.y`".into()));
                }
            }
            Ok(p.clone())
        }
        (Some(y), None) => Ok(DualPair::standard(y.clone())),
        (None, None) => Err(Error::Validation("one of `y` or `pair` is required".into())),
    }
}

pub fn run_extension_scenario(sc: &ExtensionScenario) -> Result<ExtensionScenarioReport> {
    if sc.trials == 0 {
        return Err(Error::Validation("trials must be at least 1".into()));
    }
    if let Some(c) = &sc.corruption {
        c.validate()?;
    }
    let pair = resolve_pair(&sc.y, &sc.pair)?;
    let t = &sc.operator;
    let outcomes = (0..sc.trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(sc.seed, stream_id("scenario/extension"), k);
            let f = random_vector_function(t.source().len(), pair.dim(), &mut rng);
            let inst = ExtensionInstance {
                operator: t.clone(),
                pair: pair.clone(),
                f,
            };
            evaluate_extension(&inst, sc.corruption.as_ref(), &mut rng).map(|o| (inst, o))
        })
        .collect::<Result<Vec<_>>>()?;
    let m_norm = t.m_norm()?;
    let operator_norm = t.operator_norm()?.value;
    let rel_i = argmax(&outcomes, |(_, o)| o.relation);
    let rat_i = argmax(&outcomes, |(_, o)| o.ratio);
    let max_residual = outcomes[rel_i].1.relation;
    let max_ratio = outcomes[rat_i].1.ratio;
    let relation_ok = max_residual <= RELATION_TOL;
    let ratio_ok = max_ratio <= m_norm + NORM_BOUND_TOL;
    let witness = if !relation_ok {
        let (inst, o) = &outcomes[rel_i];
        Some(Witness::Relation {
            operator: inst.operator.clone(),
            pair: inst.pair.clone(),
            f: inst.f.clone(),
            output: o.output.clone(),
            probe: o.probe.clone(),
            atom: o.atom,
            residual: o.relation,
            corrupted: o.corrupted,
        })
    } else if !ratio_ok {
        let (inst, _) = &outcomes[rat_i];
        Some(Witness::Ratio {
            operator: inst.operator.clone(),
            y: pair.y().clone(),
            f: inst.f.clone(),
            reference: Reference::MNorm,
            excess: max_ratio - m_norm,
        })
    } else {
        None
    };
    Ok(ExtensionScenarioReport {
        trials: sc.trials,
        max_residual,
        max_ratio,
        m_norm,
        operator_norm,
        pass: relation_ok && ratio_ok,
        witness,
    })
}

// ---------------------------------------------------------------------------
// square-function suite

/// `S: ℓ^∞_n → ℓ¹_m` with a family of `k` functions, all dimensions ≤ 6.
/// Every hundredth instance is the identity with the constant family, where
/// the ratio is exactly 1.
pub fn krivine_instance(seed: u64, index: u64) -> (MatrixOperator, Vec<ScalarFunction>) {
    let mut rng = trial_rng(seed, stream_id("krivine"), index);
    let n = rng.random_range(1..=6);
    let e = FunctionSpace::sequence(n, f64::INFINITY).expect("valid");
    if index.is_multiple_of(100) {
        let g = FunctionSpace::sequence(n, 1.0).expect("valid");
        let s = MatrixOperator::new(DMatrix::identity(n, n), e, g).expect("square");
        return (s, vec![ScalarFunction::from_vec(vec![1.0; n])]);
    }
    let m = rng.random_range(1..=6);
    let g = FunctionSpace::sequence(m, 1.0).expect("valid");
    let s = MatrixOperator::new(gaussian_matrix(m, n, &mut rng), e, g).expect("shapes match");
    let k = rng.random_range(1..=6);
    let es = (0..k)
        .map(|_| ScalarFunction((0..n).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>().into()))
        .collect();
    (s, es)
}

pub const MZ_EXPONENTS: [(f64, f64); 4] = [(1.0, 2.0), (2.0, 1.0), (2.0, 2.0), (4.0, 2.0)];

/// Unweighted `S: ℓ^{p1}_n → ℓ^{p2}_m` with a family of `k` functions.
pub fn mz_instance(seed: u64, p1: f64, p2: f64, index: u64) -> (MatrixOperator, Vec<ScalarFunction>) {
    let label = format!("mz/{p1}/{p2}");
    let mut rng = trial_rng(seed, stream_id(&label), index);
    let n = rng.random_range(1..=6);
    let m = rng.random_range(1..=6);
    let e = FunctionSpace::sequence(n, p1).expect("valid");
    let g = FunctionSpace::sequence(m, p2).expect("valid");
    let s = MatrixOperator::new(gaussian_matrix(m, n, &mut rng), e, g).expect("shapes match");
    let k = rng.random_range(1..=6);
    let es = (0..k)
        .map(|_| ScalarFunction((0..n).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>().into()))
        .collect();
    (s, es)
}

/// Options for `‖S‖` in the `(4, 2)` case, where only ascent applies: a
/// smaller start budget keeps the corpus fast. An underestimate of `‖S‖` can
/// only make the check stricter, and apparent violations are re-checked with
/// the default budget.
fn mz_norm_options() -> NormOptions {
    NormOptions {
        starts: 12,
        ..NormOptions::default()
    }
}

fn sqfn_suite(seed: u64, trials: usize) -> Result<Vec<CheckReport>> {
    let suite = Suite::Sqfn;
    let mut checks = Vec::new();

    let kr = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let (s, es) = krivine_instance(seed, k);
            Ok((krivine_ratio(&s, &es)?, s, es))
        })
        .collect::<Result<Vec<_>>>()?;
    let kr_i = argmax(&kr, |x| x.0);
    let kr_max = kr[kr_i].0;
    let kr_witness = || Witness::Krivine {
        operator: kr[kr_i].1.clone(),
        family: kr[kr_i].2.clone(),
        ratio: kr_max,
    };
    checks.push(CheckReport::upper(suite, "krivine", trials, kr_max, KRIVINE_BOUND + KRIVINE_TOL, kr_witness));
    checks.push(CheckReport::lower(suite, "krivine_attained", trials, kr_max, 1.0, kr_witness()));

    let opts = mz_norm_options();
    for (p1, p2) in MZ_EXPONENTS {
        let mz = (0..trials as u64)
            .into_par_iter()
            .map(|k| {
                let (s, es) = mz_instance(seed, p1, p2, k);
                let mut c = crate::sqfn::mz_ratio_check_with(&s, &es, p1, p2, &opts)?;
                if c.defect > NORM_BOUND_TOL {
                    // confirm with the full start budget before reporting
                    c = mz_ratio_check(&s, &es, p1, p2)?;
                }
                Ok((c.defect, s, es))
            })
            .collect::<Result<Vec<_>>>()?;
        let i = argmax(&mz, |x| x.0);
        checks.push(CheckReport::upper(suite, &format!("mz_{p1}_{p2}"), trials, mz[i].0, NORM_BOUND_TOL, || {
            Witness::Mz {
                operator: mz[i].1.clone(),
                family: mz[i].2.clone(),
                p1,
                p2,
                defect: mz[i].0,
            }
        }));
    }

    let moment_fixtures = [(2.0, 1.0, 1e-12), (1.0, (2.0 / std::f64::consts::PI).sqrt(), 1e-9), (4.0, 3f64.powf(0.25), 1e-12)];
    for (p, expected, tol) in moment_fixtures {
        let q = Quantity::GaussianMoment { p };
        checks.push(fixture(suite, &format!("gaussian_moment_{p}"), q, expected, tol)?);
    }
    let orders: Vec<f64> = (2..=24).map(|k| k as f64 / 2.0).collect();
    let gaps = orders
        .iter()
        .map(|&p| Ok((gaussian_moment(p)? - gaussian_moment_quadrature(p)?).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let gi = argmax(&gaps, |g| *g);
    checks.push(CheckReport::upper(suite, "gaussian_moment_quadrature", orders.len(), gaps[gi], RELATION_TOL, || {
        Witness::Moment {
            p: orders[gi],
            gap: gaps[gi],
        }
    }));
    let g4 = 3f64.powf(0.25) / (2.0 / std::f64::consts::PI).sqrt();
    for (p1, p2, expected, tol) in [(2.0, 2.0, 1.0, 0.0), (1.0, 2.0, 1.0, 0.0), (4.0, 1.0, g4, 1e-12)] {
        checks.push(fixture(suite, &format!("mz_constant_{p1}_{p2}"), Quantity::MzConstant { p1, p2 }, expected, tol)?);
    }

    // Hilbert-valued extensions: both K_G‖T‖ and ‖|T|‖ bound the sampled ratio
    let hil = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, stream_id("hilbert"), k);
            let t = random_lattice_operator(&mut rng, 6);
            let y = FiniteBanachSpace::lp(rng.random_range(1..=4), 2.0)?;
            let f = random_vector_function(t.source().len(), y.dim, &mut rng);
            let r = extension_ratio(&t, &y, &f)?;
            let kg = r - KRIVINE_BOUND * t.operator_norm()?.value;
            let mn = r - t.m_norm()?;
            Ok((kg, mn, t, y, f))
        })
        .collect::<Result<Vec<_>>>()?;
    for (name, reference, tol) in [
        ("hilbert_krivine_bound", Reference::KrivineOperatorNorm, KRIVINE_TOL),
        ("hilbert_m_norm_bound", Reference::MNorm, NORM_BOUND_TOL),
    ] {
        let key = |x: &(f64, f64, MatrixOperator, FiniteBanachSpace, VectorFunction)| {
            if reference == Reference::MNorm {
                x.1
            } else {
                x.0
            }
        };
        let i = argmax(&hil, key);
        let v = key(&hil[i]);
        checks.push(CheckReport::upper(suite, name, trials, v, tol, || Witness::Ratio {
            operator: hil[i].2.clone(),
            y: hil[i].3.clone(),
            f: hil[i].4.clone(),
            reference,
            excess: v,
        }));
    }
    Ok(checks)
}

fn fixture(suite: Suite, name: &str, quantity: Quantity, expected: f64, tol: f64) -> Result<CheckReport> {
    let gap = (quantity.evaluate()? - expected).abs();
    Ok(CheckReport::upper(suite, name, 1, gap, tol, || Witness::Fixture {
        quantity,
        expected,
        gap,
    }))
}

/// Summary printed by `verify sqfn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqfnSummary {
    pub max_krivine_ratio: f64,
    pub max_mz_defect: f64,
    pub pass: bool,
}

impl SqfnSummary {
    pub fn from_checks(checks: &[CheckReport]) -> Self {
        let sq: Vec<&CheckReport> = checks.iter().filter(|c| c.suite == Suite::Sqfn.name()).collect();
        let max_krivine_ratio = sq
            .iter()
            .find(|c| c.check == "krivine")
            .map_or(f64::NAN, |c| c.max_residual);
        let max_mz_defect = sq
            .iter()
            .filter(|c| c.check.starts_with("mz_") && !c.check.starts_with("mz_constant"))
            .map(|c| c.max_residual)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            max_krivine_ratio,
            max_mz_defect,
            pass: sq.iter().all(|c| c.pass),
        }
    }
}

// ---------------------------------------------------------------------------
// conditional expectation suite

const CONDEXP_BATCH: usize = 100;

/// A random measure on 2..=12 atoms, a random partition of it and a dual pair.
pub fn condexp_instance(seed: u64, index: u64) -> (MeasureSpace, Partition, DualPair) {
    let mut rng = trial_rng(seed, stream_id("condexp"), index);
    let n = rng.random_range(2..=12);
    let space = random_measure(n, &mut rng);
    let nblocks = rng.random_range(1..=n);
    // every block gets one atom, the rest are assigned at random
    let mut labels: Vec<usize> = (0..n).map(|a| if a < nblocks { a } else { rng.random_range(0..nblocks) }).collect();
    for i in (1..n).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }
    let mut blocks = vec![Vec::new(); nblocks];
    for (a, &l) in labels.iter().enumerate() {
        blocks[l].push(a);
    }
    let partition = Partition::new(blocks, &space).expect("labels cover every atom");
    let pair = random_pair(random_y(&mut rng), &mut rng);
    (space, partition, pair)
}

fn condexp_suite(seed: u64, trials: usize) -> Result<Vec<CheckReport>> {
    let suite = Suite::Condexp;
    let batches = trials.div_ceil(CONDEXP_BATCH);
    let exps = vec![Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity];
    let reports = (0..batches as u64)
        .into_par_iter()
        .map(|k| {
            let (space, partition, pair) = condexp_instance(seed, k);
            let coarser = pairwise_coarsening(&partition);
            let inner = CONDEXP_BATCH.min(trials - k as usize * CONDEXP_BATCH);
            let inner_seed = crate::rng::derive_seed(seed, stream_id("condexp/inner"), k);
            let r = verify_condexp_properties_with(&space, &partition, Some(&coarser), &pair, &exps, inner, inner_seed)?;
            Ok((r, space, partition, coarser, pair, inner, inner_seed))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    for (ci, proto) in reports[0].0.checks.iter().enumerate() {
        let i = argmax(&reports, |r| r.0.checks[ci].max_residual);
        let (r, space, partition, coarser, pair, inner, inner_seed) = &reports[i];
        let c = &r.checks[ci];
        let name = if proto.auxiliary {
            format!("{} (auxiliary)", proto.name)
        } else {
            proto.name.clone()
        };
        checks.push(CheckReport::upper(suite, &name, trials, c.max_residual, c.bound, || Witness::CondExp {
            space: space.clone(),
            partition: partition.clone(),
            coarser: coarser.clone(),
            pair: pair.clone(),
            exponents: exps.clone(),
            trials: *inner,
            seed: *inner_seed,
            check: c.name.clone(),
            residual: c.max_residual,
        }));
    }
    let u = MeasureSpace::uniform_probability(4)?;
    let p = Partition::new(vec![vec![0, 1], vec![2, 3]], &u)?;
    let q = Quantity::CondExpApply {
        space: u,
        partition: p,
        f: vec![1.0, 3.0, 2.0, 6.0],
        expected: vec![2.0, 2.0, 4.0, 4.0],
    };
    checks.push(fixture(suite, "fixture_block_averages", q, 0.0, 0.0)?);
    Ok(checks)
}

/// `condexp --config`: a fixed measure and partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondExpScenario {
    pub weights: Vec<f64>,
    pub blocks: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarser: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<FiniteBanachSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<DualPair>,
    #[serde(default = "default_condexp_exponents")]
    pub p: Vec<Exponent>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_condexp_exponents() -> Vec<Exponent> {
    vec![Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity]
}

pub fn run_condexp_scenario(sc: &CondExpScenario) -> Result<crate::condexp::CondExpReport> {
    let space = MeasureSpace::new(sc.weights.clone())?;
    let partition = Partition::new(sc.blocks.clone(), &space)?;
    let coarser = sc.coarser.clone().map(|b| Partition::new(b, &space)).transpose()?;
    let pair = resolve_pair(&sc.y, &sc.pair)?;
    if sc.p.is_empty() {
        return Err(Error::Validation("p must list at least one exponent".into()));
    }
    verify_condexp_properties_with(&space, &partition, coarser.as_ref(), &pair, &sc.p, sc.trials, sc.seed)
}

// ---------------------------------------------------------------------------
// counterexample suite

pub const C0_WINDOWS: [usize; 8] = [100, 200, 400, 800, 1600, 3200, 6400, 10_000];

fn counterexample_suite(seed: u64, trials: usize) -> Result<Vec<CheckReport>> {
    let suite = Suite::Counterexample;
    let mut checks = vec![
        fixture(suite, "c0_min_head", Quantity::C0MinHead { window: 10_000, head: 100 }, 0.99, 1e-12)?,
        fixture(suite, "l1_gap", Quantity::L1Gap { window: 10_000, head: 100 }, 0.99, 1e-12)?,
        fixture(suite, "l1_full_window_gap", Quantity::L1Gap { window: 100, head: 100 }, 0.0, 1e-12)?,
    ];
    let drop = c0_drop(&C0_WINDOWS, 100)?;
    checks.push(CheckReport::upper(suite, "c0_monotone", C0_WINDOWS.len(), drop, 0.0, || Witness::C0Monotone {
        windows: C0_WINDOWS.to_vec(),
        head: 100,
        drop,
    }));
    let n_seq = (trials / 10).max(1);
    let shifts = (0..n_seq as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, stream_id("shift"), k);
            let window = rng.random_range(1..=1000);
            let x: Vec<f64> = (0..=window).map(|_| rng.random_range(-1.0..1.0)).collect();
            let l = CesaroFunctional::new(window)?;
            Ok((l.shift_defect(&x)? - 2.0 / window as f64, window, x))
        })
        .collect::<Result<Vec<_>>>()?;
    let i = argmax(&shifts, |s| s.0);
    checks.push(CheckReport::upper(suite, "shift_defect", n_seq, shifts[i].0, 0.0, || {
        let (_, window, x) = &shifts[i];
        let l = CesaroFunctional::new(*window).expect("window >= 1");
        Witness::Shift {
            window: *window,
            sequence: x.clone(),
            excess: l.shift_defect(x).expect("N + 1 terms") - l.shift_defect_bound(x),
        }
    }));
    Ok(checks)
}

// ---------------------------------------------------------------------------
// norms suite

fn norms_suite(seed: u64, trials: usize) -> Result<Vec<CheckReport>> {
    let suite = Suite::Norms;
    let h = hadamard_on_l2();
    let row = MatrixOperator::from_rows(
        &[vec![1.0, 1.0]],
        FunctionSpace::sequence(2, f64::INFINITY)?,
        FunctionSpace::sequence(1, 1.0)?,
    )?;
    let mut checks = vec![
        fixture(suite, "hadamard_l2", Quantity::OperatorNorm { operator: h.clone() }, 2f64.sqrt(), 1e-9)?,
        fixture(suite, "hadamard_m_norm", Quantity::MNorm { operator: h }, 2.0, 1e-9)?,
        fixture(suite, "row_sum_linf", Quantity::OperatorNorm { operator: row }, 2.0, 0.0)?,
    ];
    let n = (trials / 10).max(1);
    let ops = (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, stream_id("norms"), k);
            let t = random_lattice_operator(&mut rng, 6);
            let est = t.operator_norm()?;
            let m = t.m_norm()?;
            Ok((adjoint_gap(&t)?, est.value - m, t))
        })
        .collect::<Result<Vec<_>>>()?;
    let i = argmax(&ops, |o| o.0);
    checks.push(CheckReport::upper(suite, "adjoint_norm", n, ops[i].0, 1e-9, || Witness::AdjointNorm {
        operator: ops[i].2.clone(),
        gap: ops[i].0,
    }));
    let i = argmax(&ops, |o| o.1);
    checks.push(CheckReport::upper(suite, "norm_below_m_norm", n, ops[i].1, 1e-9, || Witness::NormVsMNorm {
        operator: ops[i].2.clone(),
        excess: ops[i].1,
    }));
    // ascent never exceeds the exact value on spaces where both apply
    let n_ascent = (trials / 100).max(1);
    let ascent = (0..n_ascent as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, stream_id("norms/ascent"), k);
            let t = random_lattice_operator(&mut rng, 4);
            let opts = NormOptions {
                method: NormMethod::Ascent,
                starts: 8,
                ..NormOptions::default()
            };
            Ok((t.operator_norm_with(&opts)?.value - t.operator_norm()?.value, t))
        })
        .collect::<Result<Vec<_>>>()?;
    let mx = max_of(&ascent, |a| a.0);
    let i = argmax(&ascent, |a| a.0);
    checks.push(CheckReport::upper(suite, "ascent_below_exact", n_ascent, mx, 1e-12, || Witness::Fixture {
        quantity: Quantity::OperatorNorm {
            operator: ascent[i].1.clone(),
        },
        expected: ascent[i].1.operator_norm().map_or(f64::NAN, |e| e.value),
        gap: mx,
    }));
    Ok(checks)
}

/// `norms --config`: one operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormScenario {
    pub operator: MatrixOperator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<NormMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormScenarioReport {
    pub value: f64,
    pub witness: Vec<f64>,
    pub exact: bool,
    pub m_norm: f64,
}

pub fn run_norm_scenario(sc: &NormScenario) -> Result<NormScenarioReport> {
    let mut opts = NormOptions::default();
    if let Some(m) = sc.method {
        opts.method = m;
    }
    if let Some(s) = sc.starts {
        if s == 0 {
            return Err(Error::Validation("starts must be at least 1".into()));
        }
        opts.starts = s;
    }
    if let Some(s) = sc.seed {
        opts.seed = s;
    }
    let est = sc.operator.operator_norm_with(&opts)?;
    Ok(NormScenarioReport {
        value: est.value,
        witness: est.witness,
        exact: est.exact,
        m_norm: sc.operator.m_norm_with(&opts)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(suites: Vec<Suite>) -> SuiteConfig {
        SuiteConfig {
            seed: 7,
            trials: 200,
            suites,
            corruption: None,
        }
    }

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let cfg = small(Suite::ALL.to_vec());
        let a = run_suites(&cfg).unwrap();
        for c in &a.checks {
            assert!(c.pass, "{c:?}");
        }
        let b = run_suites(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn corruption_fails_relation_with_replayable_witness() {
        let mut cfg = small(vec![Suite::Extension]);
        cfg.corruption = Some(Corruption {
            delta: 1e-3,
            atom: None,
            coordinate: None,
        });
        let r = run_suites(&cfg).unwrap();
        let c = r.check(Suite::Extension, "relation").unwrap();
        assert!(!c.pass);
        let w = c.witness.as_ref().unwrap();
        match w {
            Witness::Relation { atom, corrupted, .. } => assert_eq!(Some(*atom), corrupted.map(|e| e[0])),
            other => panic!("unexpected witness {other:?}"),
        }
        assert!(replay(w).unwrap() > RELATION_TOL);
        // the rest of the suite is unaffected
        assert!(r.check(Suite::Extension, "norm_bound").unwrap().pass);
    }

    #[test]
    fn config_validation() {
        let cfg: SuiteConfig = serde_json::from_str(r#"{"seed": 3, "suites": ["sqfn"]}"#).unwrap();
        assert_eq!(cfg.trials, DEFAULT_TRIALS);
        assert!(serde_json::from_str::<SuiteConfig>(r#"{"trails": 3}"#).is_err());
        assert!(serde_json::from_str::<SuiteConfig>(r#"{"suites": ["bogus"]}"#).is_err());
        let zero = SuiteConfig {
            trials: 0,
            ..SuiteConfig::default()
        };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn lower_witness_replays() {
        let r = run_suite(Suite::Extension, &small(vec![])).unwrap_err();
        assert!(matches!(r, Error::Validation(_)));
        let r = run_suite(Suite::Extension, &small(vec![Suite::Extension])).unwrap();
        let c = r.iter().find(|c| c.check == "m_norm_witness").unwrap();
        assert!(c.pass);
        let v = replay(c.witness.as_ref().unwrap()).unwrap();
        assert!((v - c.max_residual).abs() < 1e-12);
    }
}
