//! Shared runtime helpers: model loading, parallel distance evaluation, and
//! the built-in model families used by the experiments.

use crate::pool::{parallel_map, thread_count};
use causal_core::dist::{CdPlan, DistanceConfig, DistanceEstimate, IdPlan};
use causal_core::graph::Dag;
use causal_core::ot::OtScratch;
use causal_core::scm::{Mechanism, ModelKind, NoiseSpec, Scm, VariableDomain};
use causal_core::CoreError;
use causal_io::{bif_to_scm, parse_bif, parse_scm_json};
use std::path::Path;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Core(CoreError),
    Format(causal_io::IoError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Format(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<causal_io::IoError> for CliError {
    fn from(e: causal_io::IoError) -> Self {
        CliError::Format(e)
    }
}

impl CliError {
    /// 2 for validation problems, 3 for numerical/convergence failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::Numerical(_)) | CliError::Core(CoreError::McmcNotConverged(_)) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_to_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Loads a model from `.bif` (Bayesian network) or `.scm`/`.json` (SCM
/// document) files.
pub fn load_model(path: &Path) -> CliResult<Scm> {
    let text = read_to_string(path)?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let model = match ext.as_str() {
        "bif" => bif_to_scm(&parse_bif(&text)?)?,
        "scm" | "json" => parse_scm_json(&text)?,
        _ => {
            return Err(CliError::Usage(format!(
                "unknown model extension {:?}; expected .bif, .scm or .json",
                path.display()
            )))
        }
    };
    Ok(model)
}

/// Interventional distance with cells spread over the worker pool.
pub fn id_parallel(m1: &Scm, m2: &Scm, cfg: &DistanceConfig) -> CliResult<DistanceEstimate> {
    let plan = IdPlan::new(m1, m2, cfg)?;
    let results = parallel_map(plan.len(), thread_count(), OtScratch::new, |i, scratch| {
        plan.eval(i, scratch)
    });
    let results: Result<Vec<f64>, _> = results.into_iter().collect();
    Ok(plan.combine(&results?)?)
}

/// Counterfactual distance with evidence cells spread over the worker pool.
pub fn cd_parallel(m1: &Scm, m2: &Scm, cfg: &DistanceConfig) -> CliResult<DistanceEstimate> {
    let plan = CdPlan::new(m1, m2, cfg)?;
    let results = parallel_map(plan.len(), thread_count(), OtScratch::new, |i, scratch| {
        plan.eval(i, scratch)
    });
    let results: Result<Vec<f64>, _> = results.into_iter().collect();
    Ok(plan.combine(&results?)?)
}

/// The four two-node model types of the geometry experiment: `A -> B` or
/// `B -> A` with weight `+beta` or `-beta`, unit Gaussian noise everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoNodeType {
    AToBUp,
    AToBDown,
    BToAUp,
    BToADown,
}

impl TwoNodeType {
    pub const ALL: [TwoNodeType; 4] = [
        TwoNodeType::AToBUp,
        TwoNodeType::AToBDown,
        TwoNodeType::BToAUp,
        TwoNodeType::BToADown,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TwoNodeType::AToBUp => "A->B(+)",
            TwoNodeType::AToBDown => "A->B(-)",
            TwoNodeType::BToAUp => "B->A(+)",
            TwoNodeType::BToADown => "B->A(-)",
        }
    }

    pub fn build(&self, beta: f64) -> Scm {
        let (edges, cause_is_a, sign): (&[(usize, usize)], bool, f64) = match self {
            TwoNodeType::AToBUp => (&[(0, 1)], true, 1.0),
            TwoNodeType::AToBDown => (&[(0, 1)], true, -1.0),
            TwoNodeType::BToAUp => (&[(1, 0)], false, 1.0),
            TwoNodeType::BToADown => (&[(1, 0)], false, -1.0),
        };
        let g = Dag::new(vec!["A".into(), "B".into()], edges).unwrap();
        let root = Mechanism::Linear { weights: vec![], intercept: 0.0 };
        let child = Mechanism::Linear { weights: vec![sign * beta], intercept: 0.0 };
        let (ma, mb) = if cause_is_a {
            (root, child)
        } else {
            (child, root)
        };
        Scm::new(
            g,
            vec![VariableDomain::Continuous; 2],
            vec![ma, mb],
            vec![NoiseSpec::std_gaussian(), NoiseSpec::std_gaussian()],
            ModelKind::StructuralModel,
        )
        .unwrap()
    }
}

/// The five-node discrete chain with strong dependencies used by the
/// Markov-equivalence sensitivity mode when no model file is given.
pub fn strong_chain_bayes_net(d: usize) -> Scm {
    use causal_core::scm::CptTable;
    let edges: Vec<(usize, usize)> = (0..d - 1).map(|i| (i, i + 1)).collect();
    let g = Dag::new((0..d).map(|i| format!("X{i}")).collect(), &edges).unwrap();
    let mut mechanisms = vec![Mechanism::Cpt(
        CptTable::new(2, vec![], vec![0.5, 0.5]).unwrap(),
    )];
    for _ in 1..d {
        mechanisms.push(Mechanism::Cpt(
            CptTable::new(2, vec![2], vec![0.9, 0.1, 0.1, 0.9]).unwrap(),
        ));
    }
    Scm::new(
        g,
        (0..d)
            .map(|_| VariableDomain::discrete(&["lo", "hi"]))
            .collect(),
        mechanisms,
        vec![NoiseSpec::Uniform01; d],
        ModelKind::BayesNetOnly,
    )
    .unwrap()
}

/// Spearman rank correlation of two equal-length sequences.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rank = |vals: &[f64]| -> Vec<f64> {
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let mut ranks = vec![0.0; vals.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && vals[order[j + 1]] == vals[order[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &o in &order[i..=j] {
                ranks[o] = avg;
            }
            i = j + 1;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (a, b) in rx.iter().zip(ry.iter()) {
        num += (a - mx) * (b - my);
        dx += (a - mx) * (a - mx);
        dy += (b - my) * (b - my);
    }
    if dx == 0.0 || dy == 0.0 {
        return 0.0;
    }
    num / (dx * dy).sqrt()
}
