//! Posterior noise inference given evidence (abduction) by
//! Metropolis-within-Gibbs over the noise coordinates, and sampling from the
//! resulting counterfactual models.

use crate::prelude::*;
use crate::rng::{mix, Rng};
use crate::scm::{Evidence, Intervention, Mechanism, ModelKind, NoisePool, NoiseSpec, SampleMatrix, Scm};
use crate::{CoreError, Result};
#[allow(unused_imports)]
use num_traits::Float;

const STREAM_CHAIN: u64 = 0x4348_4149;
const STREAM_CACHE: u64 = 0x4341_4348;
const LN_2PI: f64 = 1.837_877_066_409_345_6;

/// Gibbs sampler settings. The paper leaves these free; the defaults are
/// sized so counterfactual distances at ten nodes finish in minutes.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub chains: usize,
    pub burn_in: usize,
    pub thinning: usize,
    /// Initial random-walk proposal std per coordinate; adapted during
    /// burn-in toward 0.25 acceptance when `adapt` is set.
    pub proposal_std: f64,
    /// Total posterior pool rows across all chains.
    pub pool_size: usize,
    pub adapt: bool,
    /// Abort with a diagnostic when the chains disagree.
    pub check_convergence: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chains: 4,
            burn_in: 500,
            thinning: 5,
            proposal_std: 0.5,
            pool_size: 200,
            adapt: true,
            check_convergence: true,
        }
    }
}

impl McmcConfig {
    fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.burn_in == 0 || self.thinning == 0 || self.pool_size == 0 {
            return Err(CoreError::Model("mcmc counts must be >= 1".into()));
        }
        if self.proposal_std <= 0.0 {
            return Err(CoreError::Model("proposal std must be > 0".into()));
        }
        Ok(())
    }
}

/// Cached machinery for evidence likelihoods that have no closed form:
/// a fixed set of noise draws per node for the kernel density estimate, an
/// evenly spaced evidence grid over the node's empirical range, and a memo
/// keyed on the grid point and quantized parent values.
pub struct LikelihoodCache {
    nodes: Vec<Option<NodeCache>>,
}

struct NodeCache {
    noise_draws: Vec<f64>,
    grid: Vec<f64>,
    memo: alloc::collections::BTreeMap<(usize, u64), f64>,
}

const KDE_DRAWS: usize = 512;
const GRID_POINTS: usize = 64;

impl LikelihoodCache {
    /// Builds caches for the nodes that need them (non-additive continuous
    /// mechanisms). The evidence grid spans the 0.5-99.5 percentile range of
    /// a prior sample of the node.
    pub fn new(m: &Scm, seed: u64) -> Self {
        let d = m.node_count();
        let needs_kde: Vec<bool> = (0..d)
            .map(|v| {
                !m.domains()[v].is_discrete()
                    && !m.mechanisms()[v].noise_additive()
                    && !matches!(m.mechanisms()[v], Mechanism::Fixed(_))
            })
            .collect();
        if !needs_kde.iter().any(|&b| b) {
            return LikelihoodCache {
                nodes: (0..d).map(|_| None).collect(),
            };
        }
        let prior = m.sample(1024, mix(seed, 0, STREAM_CACHE, 0));
        let nodes = (0..d)
            .map(|v| {
                if !needs_kde[v] {
                    return None;
                }
                let mut rng = Rng::new(mix(seed, v as u64, STREAM_CACHE, 1));
                let noise_draws: Vec<f64> =
                    (0..KDE_DRAWS).map(|_| m.noises()[v].draw(&mut rng, 0.0)).collect();
                let mut col = prior.column(v);
                col.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
                let lo = col[(col.len() as f64 * 0.005) as usize];
                let hi = col[((col.len() as f64 * 0.995) as usize).min(col.len() - 1)];
                let (lo, hi) = if hi - lo < 1e-9 { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
                let grid = (0..GRID_POINTS)
                    .map(|i| lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64)
                    .collect();
                Some(NodeCache {
                    noise_draws,
                    grid,
                    memo: alloc::collections::BTreeMap::new(),
                })
            })
            .collect();
        LikelihoodCache { nodes }
    }
}

/// `p(node = value | parents)`: exact noise density for additive mechanisms,
/// CPT lookup for discrete nodes, kernel density estimate from fixed noise
/// pushforwards (memoized on the quantized evidence grid) otherwise.
pub fn evidence_likelihood(
    m: &Scm,
    node: usize,
    value: f64,
    parent_values: &[f64],
    cache: &mut LikelihoodCache,
) -> Result<f64> {
    let ll = evidence_log_likelihood(m, node, value, parent_values, cache)?;
    Ok(ll.exp())
}

/// Log-space variant; the Gibbs sampler works with this directly so that
/// evidence deep in a tail stays finite instead of underflowing to zero.
pub fn evidence_log_likelihood(
    m: &Scm,
    node: usize,
    value: f64,
    parent_values: &[f64],
    cache: &mut LikelihoodCache,
) -> Result<f64> {
    if node >= m.node_count() {
        return Err(CoreError::Domain(format!("node {node} out of range")));
    }
    let mech = &m.mechanisms()[node];
    if parent_values.len() != m.graph().parents(node).len() {
        return Err(CoreError::Mismatch(format!(
            "node {node} has {} parents, got {} values",
            m.graph().parents(node).len(),
            parent_values.len()
        )));
    }
    match mech {
        Mechanism::Cpt(t) => {
            if !m.domains()[node].admits(value) {
                return Ok(f64::NEG_INFINITY);
            }
            let states: Vec<usize> = parent_values.iter().map(|&v| v as usize).collect();
            let p = t.row(&states)[value as usize];
            Ok(if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
        }
        Mechanism::Fixed(v) => Err(CoreError::Model(format!(
            "evidence on the deterministic node fixed at {v} has no density"
        ))),
        mech if mech.noise_additive() => {
            let det = mech
                .eval_deterministic(parent_values)
                .expect("additive mechanisms have a deterministic part");
            match m.noises()[node] {
                NoiseSpec::PointMass { .. } => Err(CoreError::Model(
                    "evidence on a node with point-mass noise has no density".into(),
                )),
                ref noise => noise.log_density(value - det),
            }
        }
        _ => {
            // non-additive: KDE over pushforwards of fixed noise draws
            let nc = cache.nodes[node].as_mut().ok_or_else(|| {
                CoreError::Model(format!("likelihood cache missing for node {node}"))
            })?;
            // nearest grid neighbor of the requested evidence value
            let gi = nc
                .grid
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - value).abs().partial_cmp(&(b.1 - value).abs()).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap();
            let e = nc.grid[gi];
            let key = (gi, quantize_parents(parent_values));
            let memoizable = parent_values.len() <= 2;
            if memoizable {
                if let Some(&hit) = nc.memo.get(&key) {
                    return Ok(hit);
                }
            }
            let vals: Vec<f64> = nc
                .noise_draws
                .iter()
                .map(|&n| mech.eval(parent_values, n))
                .collect();
            let dens = kde_log_density(&vals, e);
            if memoizable {
                nc.memo.insert(key, dens);
            }
            Ok(dens)
        }
    }
}

fn quantize_parents(pa: &[f64]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &v in pa {
        let q = (v * 1024.0).round() as i64 as u64;
        h ^= q;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

fn kde_log_density(values: &[f64], at: f64) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mut sorted = values.to_owned();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let iqr = sorted[(0.75 * n) as usize] - sorted[(0.25 * n) as usize];
    // Silverman-style width on the smaller spread measure; pushforwards of
    // feature-map mechanisms are often multimodal, so the plain std would
    // oversmooth badly
    let spread = var.sqrt().min(iqr / 1.34).max(1e-9);
    let h = (0.9 * spread * n.powf(-0.2)).max(1e-6);
    // logsumexp over kernel terms
    let mut best = f64::NEG_INFINITY;
    let logs: Vec<f64> = values
        .iter()
        .map(|&v| {
            let z = (at - v) / h;
            let l = -0.5 * z * z;
            if l > best {
                best = l;
            }
            l
        })
        .collect();
    if best == f64::NEG_INFINITY {
        return -690.0;
    }
    let sum: f64 = logs.iter().map(|l| (l - best).exp()).sum();
    (best + sum.ln() - n.ln() - h.ln() - 0.5 * LN_2PI).max(-690.0)
}

/// A base model, evidence, and the abducted posterior over joint noise rows.
#[derive(Debug, Clone)]
pub struct CounterfactualModel {
    base: Scm,
    evidence: Evidence,
    pool: Arc<NoisePool>,
    /// Largest evidence-reproduction violation across pool rows; zero up to
    /// float rounding except for non-additive evidence mechanisms, where the
    /// noise is recovered by root finding and may be best-effort.
    reproduction_error: f64,
}

impl CounterfactualModel {
    pub fn base(&self) -> &Scm {
        &self.base
    }

    pub fn evidence(&self) -> &Evidence {
        &self.evidence
    }

    pub fn pool(&self) -> &Arc<NoisePool> {
        &self.pool
    }

    pub fn reproduction_error(&self) -> f64 {
        self.reproduction_error
    }

    /// The counterfactual model as a plain SCM: the base structural
    /// equations with the posterior noise pool in place of the priors.
    pub fn as_scm(&self) -> Scm {
        self.base
            .with_noise_pool(Arc::clone(&self.pool))
            .expect("pool width matches by construction")
    }
}

/// Samples from the counterfactual distribution: pool rows drawn jointly,
/// intervention surgery applied, equations pushed forward.
pub fn counterfactual_sample(
    cm: &CounterfactualModel,
    iv: &Intervention,
    k: usize,
    seed: u64,
) -> Result<SampleMatrix> {
    let scm = cm.as_scm();
    let done = scm.apply_intervention(iv)?;
    Ok(done.sample(k, seed))
}

struct GibbsProblem<'a> {
    m: &'a Scm,
    evidence: &'a [(usize, f64)],
    walkers: Vec<usize>,
    /// per walker: nodes (topological, non-evidence) whose values change
    /// when the walker's noise moves
    affected_values: Vec<Vec<usize>>,
    /// per walker: evidence nodes whose likelihood terms change
    affected_evidence: Vec<Vec<usize>>,
}

impl<'a> GibbsProblem<'a> {
    fn new(m: &'a Scm, evidence: &'a [(usize, f64)]) -> Self {
        let d = m.node_count();
        let is_evidence: Vec<bool> = {
            let mut v = vec![false; d];
            for &(n, _) in evidence {
                v[n] = true;
            }
            v
        };
        let walkers: Vec<usize> = m
            .topo_order()
            .iter()
            .copied()
            .filter(|&v| !is_evidence[v])
            .collect();
        let mut affected_values = Vec::with_capacity(walkers.len());
        let mut affected_evidence = Vec::with_capacity(walkers.len());
        for &w in &walkers {
            // forward reachability; clamped evidence nodes block propagation
            // because their values never change
            let mut reach = vec![false; d];
            reach[w] = true;
            for &v in m.topo_order() {
                if v == w || is_evidence[v] {
                    continue;
                }
                if m.graph().parents(v).iter().any(|&p| reach[p]) {
                    reach[v] = true;
                }
            }
            let values: Vec<usize> = m
                .topo_order()
                .iter()
                .copied()
                .filter(|&v| reach[v])
                .collect();
            // evidence slots whose likelihood depends on a reachable parent
            let slots: Vec<usize> = evidence
                .iter()
                .enumerate()
                .filter(|(_, &(e, _))| m.graph().parents(e).iter().any(|&p| reach[p]))
                .map(|(slot, _)| slot)
                .collect();
            affected_values.push(values);
            affected_evidence.push(slots);
        }
        GibbsProblem {
            m,
            evidence,
            walkers,
            affected_values,
            affected_evidence,
        }
    }
}

struct ChainState {
    noise: Vec<f64>,
    values: Vec<f64>,
    /// per evidence slot: current log likelihood
    ev_loglik: Vec<f64>,
    /// per node: current log prior of its noise (walkers only)
    priors: Vec<f64>,
}

fn recompute_values(
    p: &GibbsProblem,
    state: &mut ChainState,
    nodes: &[usize],
) {
    for &v in nodes {
        let pa: Vec<f64> = p.m.graph().parents(v).iter().map(|&q| state.values[q]).collect();
        state.values[v] = p.m.mechanisms()[v].eval(&pa, state.noise[v]);
    }
}

fn evidence_loglik(
    p: &GibbsProblem,
    cache: &mut LikelihoodCache,
    state: &ChainState,
    slot: usize,
) -> Result<f64> {
    let (e, val) = p.evidence[slot];
    let pa: Vec<f64> = p.m.graph().parents(e).iter().map(|&q| state.values[q]).collect();
    evidence_log_likelihood(p.m, e, val, &pa, cache)
}

/// Posterior noise inference given evidence, by Metropolis-within-Gibbs over
/// the non-evidence noise coordinates; evidence-node noise is recovered by
/// exact inversion (additive), constrained inverse-CDF sampling (CPT), or
/// root finding (non-additive). Pool rows are correlated draws from the
/// joint posterior.
pub fn abduct(m: &Scm, ev: &Evidence, cfg: &McmcConfig, seed: u64) -> Result<CounterfactualModel> {
    if m.kind() == ModelKind::BayesNetOnly {
        return Err(CoreError::CounterfactualUnsupported);
    }
    cfg.validate()?;
    if ev.is_empty() {
        return Err(CoreError::Model("abduction needs non-empty evidence".into()));
    }
    ev.validate_for(m)?;
    let d = m.node_count();
    let evidence = ev.assignments();
    let problem = GibbsProblem::new(m, evidence);
    let mut cache = LikelihoodCache::new(m, mix(seed, 7, STREAM_CACHE, 2));

    let per_chain = cfg.pool_size.div_ceil(cfg.chains);
    let mut pool_rows: Vec<f64> = Vec::with_capacity(cfg.chains * per_chain * d);
    let mut chain_means: Vec<Vec<f64>> = Vec::new();
    let mut chain_se2: Vec<Vec<f64>> = Vec::new();
    let mut chain_vars: Vec<Vec<f64>> = Vec::new();

    for chain in 0..cfg.chains {
        let mut rng = Rng::new(mix(seed, chain as u64, STREAM_CHAIN, 0));
        let mut state = init_state(&problem, &mut cache, &mut rng)?;
        let mut sigma: Vec<f64> = vec![cfg.proposal_std; d];
        let mut accept_count = vec![0usize; d];
        let mut rw_count = vec![0usize; d];
        let mut window = 0usize;

        let collect_target = per_chain;
        let mut collected: Vec<Vec<f64>> = Vec::with_capacity(collect_target);
        let total_sweeps = cfg.burn_in + collect_target * cfg.thinning;
        for sweep in 0..total_sweeps {
            for (wi, &w) in problem.walkers.iter().enumerate() {
                let old_noise = state.noise[w];
                // mix two kernels: a random walk, and an independence
                // proposal from the prior which accepts on the likelihood
                // ratio alone and hops between prior modes freely
                let from_prior = rng.uniform() < 0.25;
                let proposal = if from_prior {
                    m.noises()[w].draw(&mut rng, 0.0)
                } else {
                    rw_count[w] += 1;
                    let is_u01 = matches!(m.noises()[w], NoiseSpec::Uniform01);
                    let mut p = old_noise + sigma[w] * rng.normal();
                    if is_u01 {
                        // reflect into [0, 1)
                        p %= 2.0;
                        if p < 0.0 {
                            p += 2.0;
                        }
                        if p >= 1.0 {
                            p = (2.0 - p).min(1.0 - 1e-12);
                        }
                    }
                    p
                };
                let new_prior = match m.noises()[w].log_density(proposal) {
                    Ok(lp) => lp,
                    Err(e) => return Err(e),
                };
                if new_prior == f64::NEG_INFINITY {
                    continue;
                }
                // stash affected values and likelihood terms
                let affected = &problem.affected_values[wi];
                let saved_vals: Vec<f64> = affected.iter().map(|&v| state.values[v]).collect();
                let old_prior = state.priors[w];
                state.noise[w] = proposal;
                recompute_values(&problem, &mut state, affected);
                let mut delta = if from_prior {
                    0.0 // prior factors cancel against the proposal density
                } else {
                    new_prior - old_prior
                };
                let mut new_liks: Vec<(usize, f64)> = Vec::new();
                for &slot in &problem.affected_evidence[wi] {
                    let ll = evidence_loglik(&problem, &mut cache, &state, slot)?;
                    delta += ll - state.ev_loglik[slot];
                    new_liks.push((slot, ll));
                }
                let accept = delta >= 0.0 || rng.uniform().ln() < delta;
                if accept {
                    state.priors[w] = new_prior;
                    for (slot, ll) in new_liks {
                        state.ev_loglik[slot] = ll;
                    }
                    if !from_prior {
                        accept_count[w] += 1;
                    }
                } else {
                    state.noise[w] = old_noise;
                    for (&v, &sv) in affected.iter().zip(saved_vals.iter()) {
                        state.values[v] = sv;
                    }
                }
            }
            window += 1;
            if cfg.adapt && sweep < cfg.burn_in && window == 25 {
                for &w in &problem.walkers {
                    let rate = accept_count[w] as f64 / rw_count[w].max(1) as f64;
                    sigma[w] = (sigma[w] * (2.0 * (rate - 0.25)).exp()).clamp(1e-6, 50.0);
                    accept_count[w] = 0;
                    rw_count[w] = 0;
                }
                window = 0;
            }
            if sweep >= cfg.burn_in && (sweep - cfg.burn_in) % cfg.thinning == 0
                && collected.len() < collect_target
            {
                let row = complete_noise_row(m, evidence, &state, &mut rng)?;
                collected.push(row);
            }
        }

        // per-chain means and batch-means standard errors for the gate
        if cfg.check_convergence && !problem.walkers.is_empty() {
            let n = collected.len();
            let mut means = vec![0.0; problem.walkers.len()];
            let mut se2 = vec![0.0; problem.walkers.len()];
            let mut vars = vec![0.0; problem.walkers.len()];
            for (i, &w) in problem.walkers.iter().enumerate() {
                let xs: Vec<f64> = collected.iter().map(|r| r[w]).collect();
                let mean = xs.iter().sum::<f64>() / n as f64;
                means[i] = mean;
                vars[i] = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
                // batch means absorb the chain autocorrelation
                let bsize = (n / 5).max(2);
                let nb = n / bsize;
                let bmeans: Vec<f64> = (0..nb)
                    .map(|b| xs[b * bsize..(b + 1) * bsize].iter().sum::<f64>() / bsize as f64)
                    .collect();
                let bvar = bmeans
                    .iter()
                    .map(|bm| (bm - mean) * (bm - mean))
                    .sum::<f64>()
                    / (nb.max(2) - 1) as f64;
                se2[i] = bvar / nb as f64;
            }
            chain_means.push(means);
            chain_se2.push(se2);
            chain_vars.push(vars);
        }
        for row in &collected {
            pool_rows.extend_from_slice(row);
        }
    }

    if cfg.check_convergence && cfg.chains > 1 && !problem.walkers.is_empty() {
        for (i, &w) in problem.walkers.iter().enumerate() {
            let grand: f64 =
                chain_means.iter().map(|m| m[i]).sum::<f64>() / chain_means.len() as f64;
            let se_pool = (chain_se2.iter().map(|s| s[i]).sum::<f64>()
                / chain_se2.len() as f64)
                .sqrt();
            let sd_pool = (chain_vars.iter().map(|s| s[i]).sum::<f64>()
                / chain_vars.len() as f64)
                .sqrt();
            // stuck chains sit whole posterior widths apart; ordinary monte
            // carlo noise stays well inside half a width plus three errors
            let slack = 3.0 * se_pool + 0.5 * sd_pool + 1e-6 * (1.0 + grand.abs());
            for (c, means) in chain_means.iter().enumerate() {
                if (means[i] - grand).abs() > slack {
                    return Err(CoreError::McmcNotConverged(format!(
                        "noise coordinate {w}: chain {c} mean {:.4} vs pooled {:.4} \
                         (allowed spread {:.4})",
                        means[i], grand, slack
                    )));
                }
            }
        }
    }

    let rows = pool_rows.len() / d;
    let pool = Arc::new(NoisePool::new(pool_rows, rows, d)?);

    // evidence-reproduction check
    let mut worst: f64 = 0.0;
    let mut out = vec![0.0; d];
    for r in 0..rows {
        m.push_noise_row(pool.row(r), &[], &mut out);
        for &(e, val) in evidence {
            worst = worst.max((out[e] - val).abs());
        }
    }
    Ok(CounterfactualModel {
        base: m.clone(),
        evidence: ev.clone(),
        pool,
        reproduction_error: worst,
    })
}

fn init_state(
    p: &GibbsProblem,
    cache: &mut LikelihoodCache,
    rng: &mut Rng,
) -> Result<ChainState> {
    let d = p.m.node_count();
    for _try in 0..50 {
        let mut noise = vec![0.0; d];
        p.m.draw_noise_row(rng, &mut noise);
        let mut state = ChainState {
            noise,
            values: vec![0.0; d],
            ev_loglik: vec![0.0; p.evidence.len()],
            priors: vec![0.0; d],
        };
        // full value pass with evidence nodes clamped
        let mut vals = vec![0.0; d];
        p.m.push_noise_row(&state.noise, p.evidence, &mut vals);
        state.values = vals;
        let mut feasible = true;
        for slot in 0..p.evidence.len() {
            let ll = evidence_loglik(p, cache, &state, slot)?;
            if ll == f64::NEG_INFINITY {
                feasible = false;
                break;
            }
            state.ev_loglik[slot] = ll;
        }
        if !feasible {
            continue;
        }
        for &w in &p.walkers {
            state.priors[w] = p.m.noises()[w].log_density(state.noise[w])?;
        }
        return Ok(state);
    }
    Err(CoreError::InfeasibleEvidence(
        "no noise configuration with positive evidence likelihood found".into(),
    ))
}

/// Completes a pool row: walker noises from the chain state, evidence-node
/// noises recovered from the observed values.
fn complete_noise_row(
    m: &Scm,
    evidence: &[(usize, f64)],
    state: &ChainState,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let mut row = state.noise.clone();
    for &(e, val) in evidence {
        let pa: Vec<f64> = m.graph().parents(e).iter().map(|&q| state.values[q]).collect();
        let mech = &m.mechanisms()[e];
        row[e] = match mech {
            Mechanism::Cpt(t) => {
                // uniform over the inverse-CDF preimage of the observed state
                let states: Vec<usize> = pa.iter().map(|&v| v as usize).collect();
                let r = t.row(&states);
                let s = val as usize;
                let lo: f64 = r[..s].iter().sum();
                let width = r[s];
                if width <= 0.0 {
                    return Err(CoreError::InfeasibleEvidence(format!(
                        "state {s} has probability zero under its parents"
                    )));
                }
                lo + width * rng.uniform()
            }
            mech if mech.noise_additive() => {
                let det = mech.eval_deterministic(&pa).expect("additive");
                val - det
            }
            mech => invert_non_additive(m, e, mech, &pa, val, rng),
        };
    }
    Ok(row)
}

/// Root finding for f(pa, n) = e over the noise coordinate: grid scan for
/// sign changes, bisection, then a prior/|slope|-weighted draw among the
/// roots. Falls back to the grid argmin when no root exists.
fn invert_non_additive(
    m: &Scm,
    node: usize,
    mech: &Mechanism,
    pa: &[f64],
    target: f64,
    rng: &mut Rng,
) -> f64 {
    const GRID: usize = 512;
    let (lo, hi) = (-8.0f64, 8.0f64);
    let f = |n: f64| mech.eval(pa, n) - target;
    let mut best_abs = f64::INFINITY;
    let mut best_n = 0.0;
    let mut roots: Vec<f64> = Vec::new();
    let mut prev_n = lo;
    let mut prev_f = f(lo);
    for i in 1..=GRID {
        let n = lo + (hi - lo) * i as f64 / GRID as f64;
        let fv = f(n);
        if fv.abs() < best_abs {
            best_abs = fv.abs();
            best_n = n;
        }
        if prev_f == 0.0 {
            roots.push(prev_n);
        } else if prev_f.signum() != fv.signum() {
            let (mut a, mut b) = (prev_n, n);
            let (mut fa, _) = (prev_f, fv);
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fa.signum() != fm.signum() {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_n = n;
        prev_f = fv;
    }
    if roots.is_empty() {
        return best_n;
    }
    // weight roots by prior density over |f'| (the conditional on the level set)
    let weights: Vec<f64> = roots
        .iter()
        .map(|&r| {
            let prior = m.noises()[node].log_density(r).map(|l| l.exp()).unwrap_or(0.0);
            let h = 1e-5;
            let slope = ((f(r + h) - f(r - h)) / (2.0 * h)).abs().max(1e-9);
            prior / slope
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return roots[0];
    }
    let mut u = rng.uniform() * total;
    for (r, w) in roots.iter().zip(weights.iter()) {
        if u < *w {
            return *r;
        }
        u -= w;
    }
    *roots.last().unwrap()
}
