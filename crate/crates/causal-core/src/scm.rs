//! Structural causal models: per-node mechanisms and noise, ancestral
//! sampling, hard-intervention surgery, random model generation, and
//! mechanism perturbation.

use crate::graph::{topological_order, Dag};
use crate::prelude::*;
use crate::rng::{mix, Rng};
use crate::{CoreError, Result};
#[allow(unused_imports)]
use num_traits::Float;

const STREAM_SAMPLE: u64 = 0x5A4D_504C;
const STREAM_MODEL: u64 = 0x4D4F_444C;

/// Continuous or finite discrete with named states.
#[derive(Debug, Clone, PartialEq)]
pub enum VariableDomain {
    Continuous,
    Discrete { states: Vec<String> },
}

impl VariableDomain {
    pub fn discrete(states: &[&str]) -> Self {
        VariableDomain::Discrete {
            states: states.iter().map(|s| (*s).to_owned()).collect(),
        }
    }

    pub fn cardinality(&self) -> Option<usize> {
        match self {
            VariableDomain::Continuous => None,
            VariableDomain::Discrete { states } => Some(states.len()),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, VariableDomain::Discrete { .. })
    }

    /// Checks that `value` is representable in this domain (discrete values
    /// are integer state codes).
    pub fn admits(&self, value: f64) -> bool {
        match self {
            VariableDomain::Continuous => value.is_finite(),
            VariableDomain::Discrete { states } => {
                value.fract() == 0.0 && value >= 0.0 && (value as usize) < states.len()
            }
        }
    }
}

/// A shared pool of joint noise rows; the carrier of abducted posteriors.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePool {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl NoisePool {
    pub fn new(data: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(CoreError::Model("noise pool must be non-empty".into()));
        }
        Ok(NoisePool { data, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

/// Per-node exogenous noise distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSpec {
    Gaussian { mean: f64, std: f64 },
    Gamma { shape: f64, rate: f64 },
    GaussianMixture { weights: Vec<f64>, means: Vec<f64>, stds: Vec<f64> },
    /// One column of a shared pool of joint rows; rows are drawn jointly
    /// across nodes, so the coordinates need not be independent.
    EmpiricalJoint { pool: Arc<NoisePool>, column: usize },
    PointMass { value: f64 },
    /// Uniform variate on [0, 1); drives CPT inverse-CDF sampling.
    Uniform01,
}

impl NoiseSpec {
    pub fn std_gaussian() -> Self {
        NoiseSpec::Gaussian { mean: 0.0, std: 1.0 }
    }

    fn validate(&self) -> Result<()> {
        match self {
            NoiseSpec::Gaussian { std, .. } => {
                if *std <= 0.0 {
                    return Err(CoreError::Model("gaussian noise std must be > 0".into()));
                }
            }
            NoiseSpec::Gamma { shape, rate } => {
                if *shape <= 0.0 || *rate <= 0.0 {
                    return Err(CoreError::Model("gamma parameters must be > 0".into()));
                }
            }
            NoiseSpec::GaussianMixture { weights, means, stds } => {
                if weights.is_empty() || weights.len() != means.len() || means.len() != stds.len()
                {
                    return Err(CoreError::Model("mixture component lists must match".into()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w < 0.0) {
                    return Err(CoreError::Model("mixture weights must form a simplex".into()));
                }
                if stds.iter().any(|&s| s <= 0.0) {
                    return Err(CoreError::Model("mixture stds must be > 0".into()));
                }
            }
            NoiseSpec::EmpiricalJoint { pool, column } => {
                if *column >= pool.cols() {
                    return Err(CoreError::Model("pool column out of range".into()));
                }
            }
            NoiseSpec::PointMass { .. } | NoiseSpec::Uniform01 => {}
        }
        Ok(())
    }

    /// Draws one value. `pool_u` is the shared per-row uniform that selects
    /// the joint pool row for `EmpiricalJoint` noise.
    pub fn draw(&self, rng: &mut Rng, pool_u: f64) -> f64 {
        match self {
            NoiseSpec::Gaussian { mean, std } => mean + std * rng.normal(),
            NoiseSpec::Gamma { shape, rate } => rng.gamma(*shape, *rate),
            NoiseSpec::GaussianMixture { weights, means, stds } => {
                let u = rng.uniform();
                let mut cum = 0.0;
                let mut idx = weights.len() - 1;
                for (i, &w) in weights.iter().enumerate() {
                    cum += w;
                    if u < cum {
                        idx = i;
                        break;
                    }
                }
                means[idx] + stds[idx] * rng.normal()
            }
            NoiseSpec::EmpiricalJoint { pool, column } => {
                let row = ((pool_u * pool.rows() as f64) as usize).min(pool.rows() - 1);
                pool.get(row, *column)
            }
            NoiseSpec::PointMass { value } => *value,
            NoiseSpec::Uniform01 => rng.uniform(),
        }
    }

    /// Log density at `x`, for the priors the Gibbs sampler walks over.
    /// Empirical pools carry no density.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        const LN_2PI: f64 = 1.837_877_066_409_345_6;
        match self {
            NoiseSpec::Gaussian { mean, std } => {
                let z = (x - mean) / std;
                Ok(-0.5 * (z * z + LN_2PI) - std.ln())
            }
            NoiseSpec::Gamma { shape, rate } => {
                if x <= 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok((shape - 1.0) * x.ln() - rate * x + shape * rate.ln()
                    - libm::lgamma(*shape))
            }
            NoiseSpec::GaussianMixture { weights, means, stds } => {
                let mut best = f64::NEG_INFINITY;
                let logs: Vec<f64> = weights
                    .iter()
                    .zip(means.iter().zip(stds.iter()))
                    .map(|(&w, (&m, &s))| {
                        let z = (x - m) / s;
                        let l = w.max(1e-300).ln() - 0.5 * (z * z + LN_2PI) - s.ln();
                        if l > best {
                            best = l;
                        }
                        l
                    })
                    .collect();
                Ok(best + logs.iter().map(|l| (l - best).exp()).sum::<f64>().ln())
            }
            NoiseSpec::PointMass { value } => Ok(if (x - value).abs() <= 1e-12 {
                0.0
            } else {
                f64::NEG_INFINITY
            }),
            NoiseSpec::Uniform01 => Ok(if (0.0..1.0).contains(&x) {
                0.0
            } else {
                f64::NEG_INFINITY
            }),
            NoiseSpec::EmpiricalJoint { .. } => Err(CoreError::Model(
                "empirical joint noise has no closed-form density".into(),
            )),
        }
    }
}

/// Random Fourier feature map approximating a squared-exponential GP draw.
#[derive(Debug, Clone, PartialEq)]
pub struct RffParams {
    n_inputs: usize,
    freqs: Vec<f64>,
    phases: Vec<f64>,
    weights: Vec<f64>,
    scale: f64,
}

impl RffParams {
    pub fn draw(rng: &mut Rng, n_inputs: usize, n_features: usize, bandwidth: f64) -> Self {
        let freqs = (0..n_features * n_inputs)
            .map(|_| rng.normal() / bandwidth)
            .collect();
        let phases = (0..n_features)
            .map(|_| rng.range(0.0, 2.0 * core::f64::consts::PI))
            .collect();
        let weights = (0..n_features).map(|_| rng.normal()).collect();
        RffParams {
            n_inputs,
            freqs,
            phases,
            weights,
            scale: (2.0 / n_features as f64).sqrt(),
        }
    }

    /// Rebuilds a feature map from raw parts (deserialization).
    pub fn from_parts(
        n_inputs: usize,
        freqs: Vec<f64>,
        phases: Vec<f64>,
        weights: Vec<f64>,
        scale: f64,
    ) -> Result<Self> {
        if freqs.len() != phases.len() * n_inputs || phases.len() != weights.len() {
            return Err(CoreError::Model("inconsistent feature-map dimensions".into()));
        }
        if phases.is_empty() {
            return Err(CoreError::Model("feature map needs at least one feature".into()));
        }
        Ok(RffParams {
            n_inputs,
            freqs,
            phases,
            weights,
            scale,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn eval(&self, inputs: &[f64]) -> f64 {
        debug_assert_eq!(inputs.len(), self.n_inputs);
        let nf = self.phases.len();
        let mut acc = 0.0;
        for f in 0..nf {
            let mut arg = self.phases[f];
            for (i, &x) in inputs.iter().enumerate() {
                arg += self.freqs[f * self.n_inputs + i] * x;
            }
            acc += self.weights[f] * arg.cos();
        }
        self.scale * acc
    }
}

/// Conditional probability table over discrete parents.
///
/// Row index is mixed-radix over parent state codes with the first parent as
/// the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct CptTable {
    cardinality: usize,
    parent_cards: Vec<usize>,
    rows: Vec<f64>,
}

impl CptTable {
    pub fn new(cardinality: usize, parent_cards: Vec<usize>, rows: Vec<f64>) -> Result<Self> {
        if cardinality < 2 {
            return Err(CoreError::Model("CPT child cardinality must be >= 2".into()));
        }
        let n_rows: usize = parent_cards.iter().product();
        if rows.len() != n_rows * cardinality {
            return Err(CoreError::Model(format!(
                "CPT needs {n_rows} rows of {cardinality} entries, got {} values",
                rows.len()
            )));
        }
        for r in 0..n_rows {
            let row = &rows[r * cardinality..(r + 1) * cardinality];
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-6 || row.iter().any(|&p| p < 0.0) {
                return Err(CoreError::Model(format!(
                    "CPT row {r} is not a probability simplex (sums to {total})"
                )));
            }
        }
        Ok(CptTable {
            cardinality,
            parent_cards,
            rows,
        })
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn n_rows(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn row_index(&self, parent_states: &[usize]) -> usize {
        debug_assert_eq!(parent_states.len(), self.parent_cards.len());
        let mut idx = 0usize;
        for (s, c) in parent_states.iter().zip(self.parent_cards.iter()) {
            debug_assert!(s < c);
            idx = idx * c + s;
        }
        idx
    }

    pub fn row(&self, parent_states: &[usize]) -> &[f64] {
        let r = self.row_index(parent_states);
        &self.rows[r * self.cardinality..(r + 1) * self.cardinality]
    }

    pub fn row_at(&self, index: usize) -> &[f64] {
        &self.rows[index * self.cardinality..(index + 1) * self.cardinality]
    }

    pub fn rows_flat(&self) -> &[f64] {
        &self.rows
    }

    fn row_from_values(&self, parents: &[f64]) -> &[f64] {
        let states: Vec<usize> = parents.iter().map(|&v| v as usize).collect();
        self.row(&states)
    }
}

/// A node's structural assignment.
#[derive(Debug, Clone, PartialEq)]
pub enum Mechanism {
    Linear { weights: Vec<f64>, intercept: f64 },
    /// GP-style function of the parents, noise added afterwards.
    RffAdditive(RffParams),
    /// GP-style function with the noise as one extra input coordinate.
    RffNonAdditive(RffParams),
    Cpt(CptTable),
    Fixed(f64),
    /// `(1 - epsilon) * base + epsilon * other`.
    Mix { base: Box<Mechanism>, other: Box<Mechanism>, epsilon: f64 },
}

impl Mechanism {
    /// Expected parent count, if the mechanism constrains it.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Mechanism::Linear { weights, .. } => Some(weights.len()),
            Mechanism::RffAdditive(p) => Some(p.n_inputs),
            Mechanism::RffNonAdditive(p) => Some(p.n_inputs - 1),
            Mechanism::Cpt(t) => Some(t.parent_cards.len()),
            Mechanism::Fixed(_) => None,
            Mechanism::Mix { base, .. } => base.arity(),
        }
    }

    /// Whether the noise enters additively, i.e. `eval(pa, n) = det(pa) + n`.
    pub fn noise_additive(&self) -> bool {
        match self {
            Mechanism::Linear { .. } | Mechanism::RffAdditive(_) => true,
            Mechanism::RffNonAdditive(_) | Mechanism::Cpt(_) | Mechanism::Fixed(_) => false,
            Mechanism::Mix { base, other, .. } => base.noise_additive() && other.noise_additive(),
        }
    }

    /// The deterministic part of an additive-noise mechanism.
    pub fn eval_deterministic(&self, parents: &[f64]) -> Option<f64> {
        match self {
            Mechanism::Linear { weights, intercept } => Some(
                intercept
                    + weights
                        .iter()
                        .zip(parents.iter())
                        .map(|(w, x)| w * x)
                        .sum::<f64>(),
            ),
            Mechanism::RffAdditive(p) => Some(p.eval(parents)),
            Mechanism::Mix { base, other, epsilon } if self.noise_additive() => Some(
                (1.0 - epsilon) * base.eval_deterministic(parents)?
                    + epsilon * other.eval_deterministic(parents)?,
            ),
            _ => None,
        }
    }

    pub fn eval(&self, parents: &[f64], noise: f64) -> f64 {
        match self {
            Mechanism::Linear { weights, intercept } => {
                intercept
                    + noise
                    + weights
                        .iter()
                        .zip(parents.iter())
                        .map(|(w, x)| w * x)
                        .sum::<f64>()
            }
            Mechanism::RffAdditive(p) => p.eval(parents) + noise,
            Mechanism::RffNonAdditive(p) => {
                let mut inputs = Vec::with_capacity(parents.len() + 1);
                inputs.extend_from_slice(parents);
                inputs.push(noise);
                p.eval(&inputs)
            }
            Mechanism::Cpt(t) => {
                let row = t.row_from_values(parents);
                // noise is the uniform variate for inverse-CDF sampling
                let mut cum = 0.0;
                for (state, &p) in row.iter().enumerate() {
                    cum += p;
                    if noise < cum {
                        return state as f64;
                    }
                }
                (row.len() - 1) as f64
            }
            Mechanism::Fixed(v) => *v,
            Mechanism::Mix { base, other, epsilon } => {
                (1.0 - epsilon) * base.eval(parents, noise) + epsilon * other.eval(parents, noise)
            }
        }
    }
}

/// Evaluates a mechanism with an explicit arity check.
pub fn mechanism_eval(mech: &Mechanism, parent_values: &[f64], noise_value: f64) -> Result<f64> {
    if let Some(a) = mech.arity() {
        if a != parent_values.len() {
            return Err(CoreError::Mismatch(format!(
                "mechanism expects {a} parents, got {}",
                parent_values.len()
            )));
        }
    }
    Ok(mech.eval(parent_values, noise_value))
}

/// Full structural model or CPT-only causal Bayesian network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    StructuralModel,
    BayesNetOnly,
}

/// A partial assignment used for do-surgery.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Intervention(Vec<(usize, f64)>);

impl Intervention {
    pub fn empty() -> Self {
        Intervention(Vec::new())
    }

    pub fn new(assignments: Vec<(usize, f64)>) -> Result<Self> {
        let mut seen: Vec<usize> = assignments.iter().map(|&(n, _)| n).collect();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != assignments.len() {
            return Err(CoreError::Model("duplicate node in assignment".into()));
        }
        Ok(Intervention(assignments))
    }

    pub fn single(node: usize, value: f64) -> Self {
        Intervention(vec![(node, value)])
    }

    pub fn assignments(&self) -> &[(usize, f64)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate_for(&self, m: &Scm) -> Result<()> {
        for &(node, value) in &self.0 {
            if node >= m.node_count() {
                return Err(CoreError::Domain(format!("node {node} out of range")));
            }
            if !m.domains[node].admits(value) {
                return Err(CoreError::Domain(format!(
                    "value {value} outside the domain of node {}",
                    m.graph.label(node)
                )));
            }
        }
        Ok(())
    }
}

/// A partial observation used for abduction. Same shape as an intervention,
/// different role.
pub type Evidence = Intervention;

/// k joint draws, one row per draw, columns in model node order. Discrete
/// states are integer-coded.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl SampleMatrix {
    pub fn from_rows(data: Vec<f64>, rows: usize, cols: usize) -> Self {
        assert_eq!(data.len(), rows * cols);
        assert!(rows >= 1);
        SampleMatrix { data, rows, cols }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn column_mean(&self, c: usize) -> f64 {
        self.column(c).iter().sum::<f64>() / self.rows as f64
    }

    /// Sample covariance (denominator k).
    pub fn covariance(&self) -> Vec<f64> {
        let (k, d) = (self.rows, self.cols);
        let means: Vec<f64> = (0..d).map(|c| self.column_mean(c)).collect();
        let mut cov = vec![0.0; d * d];
        for r in 0..k {
            let row = self.row(r);
            for i in 0..d {
                let di = row[i] - means[i];
                for j in 0..d {
                    cov[i * d + j] += di * (row[j] - means[j]);
                }
            }
        }
        for v in cov.iter_mut() {
            *v /= k as f64;
        }
        cov
    }
}

/// The model object: a DAG plus per-node domain, mechanism and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Scm {
    graph: Dag,
    domains: Vec<VariableDomain>,
    mechanisms: Vec<Mechanism>,
    noises: Vec<NoiseSpec>,
    kind: ModelKind,
    topo: Vec<usize>,
}

impl Scm {
    pub fn new(
        graph: Dag,
        domains: Vec<VariableDomain>,
        mechanisms: Vec<Mechanism>,
        noises: Vec<NoiseSpec>,
        kind: ModelKind,
    ) -> Result<Self> {
        let d = graph.node_count();
        if domains.len() != d || mechanisms.len() != d || noises.len() != d {
            return Err(CoreError::Model(format!(
                "expected {d} domains/mechanisms/noises"
            )));
        }
        for v in 0..d {
            let n_parents = graph.parents(v).len();
            if let Some(a) = mechanisms[v].arity() {
                if a != n_parents {
                    return Err(CoreError::Model(format!(
                        "node {} has {n_parents} parents but its mechanism expects {a}",
                        graph.label(v)
                    )));
                }
            }
            noises[v].validate()?;
            if let Mechanism::Cpt(t) = &mechanisms[v] {
                let Some(card) = domains[v].cardinality() else {
                    return Err(CoreError::Model(format!(
                        "CPT mechanism on continuous node {}",
                        graph.label(v)
                    )));
                };
                if card != t.cardinality() {
                    return Err(CoreError::Model(format!(
                        "node {} has {card} states but its CPT has {}",
                        graph.label(v),
                        t.cardinality()
                    )));
                }
                for (slot, &p) in graph.parents(v).iter().enumerate() {
                    if domains[p].cardinality() != Some(t.parent_cards()[slot]) {
                        return Err(CoreError::Model(format!(
                            "CPT parent cardinality mismatch at node {}",
                            graph.label(v)
                        )));
                    }
                }
                if !matches!(
                    noises[v],
                    NoiseSpec::Uniform01 | NoiseSpec::EmpiricalJoint { .. } | NoiseSpec::PointMass { .. }
                ) {
                    return Err(CoreError::Model(format!(
                        "CPT node {} needs a uniform-variate noise",
                        graph.label(v)
                    )));
                }
            }
            if let Mechanism::Mix { epsilon, .. } = &mechanisms[v] {
                if !(0.0..=1.0).contains(epsilon) {
                    return Err(CoreError::Model("mix epsilon must lie in [0, 1]".into()));
                }
            }
        }
        if kind == ModelKind::BayesNetOnly
            && mechanisms
                .iter()
                .any(|m| !matches!(m, Mechanism::Cpt(_) | Mechanism::Fixed(_)))
        {
            return Err(CoreError::Model(
                "a causal Bayesian network uses only CPT mechanisms".into(),
            ));
        }
        let topo = topological_order(&graph);
        Ok(Scm {
            graph,
            domains,
            mechanisms,
            noises,
            kind,
            topo,
        })
    }

    pub fn graph(&self) -> &Dag {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn domains(&self) -> &[VariableDomain] {
        &self.domains
    }

    pub fn mechanisms(&self) -> &[Mechanism] {
        &self.mechanisms
    }

    pub fn noises(&self) -> &[NoiseSpec] {
        &self.noises
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    /// Same variable list: labels and domains (the precondition of every
    /// distance between two models).
    pub fn same_variables(&self, other: &Scm) -> bool {
        self.graph.labels() == other.graph.labels() && self.domains == other.domains
    }

    /// Replaces noises with one shared empirical pool (counterfactual models).
    pub fn with_noise_pool(&self, pool: Arc<NoisePool>) -> Result<Scm> {
        if pool.cols() != self.node_count() {
            return Err(CoreError::Model("pool width must match node count".into()));
        }
        let noises = (0..self.node_count())
            .map(|v| NoiseSpec::EmpiricalJoint {
                pool: Arc::clone(&pool),
                column: v,
            })
            .collect();
        Scm::new(
            self.graph.clone(),
            self.domains.clone(),
            self.mechanisms.clone(),
            noises,
            self.kind,
        )
    }

    /// Pushes one noise row through the structural equations in topological
    /// order. Nodes listed in `clamp` take their clamped value instead of
    /// their equation (used to condition on evidence).
    pub fn push_noise_row(&self, noise: &[f64], clamp: &[(usize, f64)], out: &mut [f64]) {
        debug_assert_eq!(noise.len(), self.node_count());
        debug_assert_eq!(out.len(), self.node_count());
        for &v in &self.topo {
            if let Some(&(_, val)) = clamp.iter().find(|&&(n, _)| n == v) {
                out[v] = val;
                continue;
            }
            let parents = self.graph.parents(v);
            let pa_values: Vec<f64> = parents.iter().map(|&p| out[p]).collect();
            out[v] = self.mechanisms[v].eval(&pa_values, noise[v]);
        }
    }

    /// Draws the noise vector for one sample row.
    pub fn draw_noise_row(&self, rng: &mut Rng, out: &mut [f64]) {
        let pool_u = if self
            .noises
            .iter()
            .any(|n| matches!(n, NoiseSpec::EmpiricalJoint { .. }))
        {
            rng.uniform()
        } else {
            0.0
        };
        for &v in &self.topo {
            out[v] = self.noises[v].draw(rng, pool_u);
        }
    }

    /// k independent joint draws by ancestral sampling. Row-level RNG
    /// streams are derived from `(seed, row)`, so the output is identical
    /// however rows are scheduled.
    pub fn sample(&self, k: usize, seed: u64) -> SampleMatrix {
        assert!(k >= 1);
        let d = self.node_count();
        let mut data = vec![0.0; k * d];
        let mut noise = vec![0.0; d];
        for r in 0..k {
            let mut rng = Rng::new(mix(seed, r as u64, STREAM_SAMPLE, 0));
            self.draw_noise_row(&mut rng, &mut noise);
            let (head, tail) = data.split_at_mut(r * d);
            let _ = head;
            self.push_noise_row(&noise, &[], &mut tail[..d]);
        }
        SampleMatrix::from_rows(data, k, d)
    }

    /// Hard intervention: assigned nodes get a `Fixed` mechanism, point-mass
    /// noise, and their incoming edges removed. The empty intervention
    /// returns an equal model.
    pub fn apply_intervention(&self, iv: &Intervention) -> Result<Scm> {
        iv.validate_for(self)?;
        if iv.is_empty() {
            return Ok(self.clone());
        }
        let assigned: Vec<usize> = iv.assignments().iter().map(|&(n, _)| n).collect();
        let edges: Vec<(usize, usize)> = self
            .graph
            .edges()
            .into_iter()
            .filter(|&(_, c)| !assigned.contains(&c))
            .collect();
        let graph = Dag::new(self.graph.labels().to_owned(), &edges)?;
        let mut mechanisms = self.mechanisms.clone();
        let mut noises = self.noises.clone();
        for &(node, value) in iv.assignments() {
            mechanisms[node] = Mechanism::Fixed(value);
            noises[node] = NoiseSpec::PointMass { value: 0.0 };
        }
        Scm::new(graph, self.domains.clone(), mechanisms, noises, self.kind)
    }
}

/// The four synthetic model families of the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parametrization {
    LinGauss,
    LinNGauss,
    GpAdditive,
    Gp,
}

impl Parametrization {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linGauss" => Some(Parametrization::LinGauss),
            "linNGauss" => Some(Parametrization::LinNGauss),
            "GPAddit" => Some(Parametrization::GpAdditive),
            "GP" => Some(Parametrization::Gp),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Parametrization::LinGauss => "linGauss",
            Parametrization::LinNGauss => "linNGauss",
            Parametrization::GpAdditive => "GPAddit",
            Parametrization::Gp => "GP",
        }
    }
}

pub const RFF_FEATURES: usize = 256;
pub const RFF_BANDWIDTH: f64 = 1.0;

fn random_linear_weights(rng: &mut Rng, n: usize) -> Vec<f64> {
    // magnitudes bounded away from zero so the faithfulness assumption holds
    (0..n)
        .map(|_| {
            let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
            sign * rng.range(0.5, 2.0)
        })
        .collect()
}

fn random_mechanism(
    rng: &mut Rng,
    parametrization: Parametrization,
    n_parents: usize,
) -> (Mechanism, NoiseSpec) {
    match parametrization {
        Parametrization::LinGauss => (
            Mechanism::Linear {
                weights: random_linear_weights(rng, n_parents),
                intercept: 0.0,
            },
            NoiseSpec::std_gaussian(),
        ),
        Parametrization::LinNGauss => {
            let weights = random_linear_weights(rng, n_parents);
            // the gamma parameters are drawn from standard normals and
            // clamped away from zero to stay a valid distribution
            let shape = rng.normal().abs() + 0.1;
            let rate = rng.normal().abs() + 0.1;
            (
                Mechanism::Linear {
                    weights,
                    intercept: 0.0,
                },
                NoiseSpec::Gamma { shape, rate },
            )
        }
        Parametrization::GpAdditive => (
            Mechanism::RffAdditive(RffParams::draw(rng, n_parents, RFF_FEATURES, RFF_BANDWIDTH)),
            NoiseSpec::std_gaussian(),
        ),
        Parametrization::Gp => (
            Mechanism::RffNonAdditive(RffParams::draw(
                rng,
                n_parents + 1,
                RFF_FEATURES,
                RFF_BANDWIDTH,
            )),
            NoiseSpec::std_gaussian(),
        ),
    }
}

/// Draws a random model: an Erdős–Rényi DAG plus mechanisms and noise from
/// the chosen parametrization.
pub fn random_scm(
    parametrization: Parametrization,
    d: usize,
    expected_degree: f64,
    seed: u64,
) -> Scm {
    let graph = crate::graph::random_dag(d, expected_degree, mix(seed, 1, STREAM_MODEL, 0));
    let mut mechanisms = Vec::with_capacity(d);
    let mut noises = Vec::with_capacity(d);
    for v in 0..d {
        let mut rng = Rng::new(mix(seed, 2 + v as u64, STREAM_MODEL, 1));
        let (m, n) = random_mechanism(&mut rng, parametrization, graph.parents(v).len());
        mechanisms.push(m);
        noises.push(n);
    }
    Scm::new(
        graph,
        vec![VariableDomain::Continuous; d],
        mechanisms,
        noises,
        ModelKind::StructuralModel,
    )
    .expect("random models are valid by construction")
}

/// Replaces node `node`'s mechanism `f` by `(1 - epsilon) f + epsilon g`,
/// with `g` a fresh random mechanism of the same family.
pub fn perturb_mechanism(m: &Scm, node: usize, epsilon: f64, seed: u64) -> Result<Scm> {
    if node >= m.node_count() {
        return Err(CoreError::Domain(format!("node {node} out of range")));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(CoreError::Domain("epsilon must lie in [0, 1]".into()));
    }
    if m.domains[node].is_discrete() {
        return Err(CoreError::Domain(
            "mechanism mixing is defined for continuous nodes only".into(),
        ));
    }
    if epsilon == 0.0 {
        return Ok(m.clone());
    }
    fn family(mech: &Mechanism) -> Result<Parametrization> {
        match mech {
            Mechanism::Linear { .. } => Ok(Parametrization::LinGauss),
            Mechanism::RffAdditive(_) => Ok(Parametrization::GpAdditive),
            Mechanism::RffNonAdditive(_) => Ok(Parametrization::Gp),
            Mechanism::Mix { base, .. } => family(base),
            Mechanism::Cpt(_) | Mechanism::Fixed(_) => Err(CoreError::Domain(
                "no random-mechanism family for this node".into(),
            )),
        }
    }
    let fam = family(&m.mechanisms[node])?;
    let mut rng = Rng::new(mix(seed, node as u64, STREAM_MODEL, 2));
    let (g, _) = random_mechanism(&mut rng, fam, m.graph.parents(node).len());
    let mut mechanisms = m.mechanisms.clone();
    mechanisms[node] = Mechanism::Mix {
        base: Box::new(m.mechanisms[node].clone()),
        other: Box::new(g),
        epsilon,
    };
    Scm::new(
        m.graph.clone(),
        m.domains.clone(),
        mechanisms,
        m.noises.clone(),
        m.kind,
    )
}
