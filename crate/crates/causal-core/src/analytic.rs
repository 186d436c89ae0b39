//! Closed-form observational and interventional distributions for
//! linear-Gaussian models, plus the deterministic OD/ID oracle built on
//! them. Estimator validation anchors here.

use crate::gauss::{gaussian_kl, gaussian_w2_squared, GaussianDist};
use crate::linalg::gauss_hermite_normal;
use crate::prelude::*;
use crate::scm::{Intervention, Mechanism, NoiseSpec, Scm};
use crate::{CoreError, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// A linear-Gaussian model in structural-equation form:
/// `x_v = intercept_v + sum_p w_vp x_p + c_v n_v`, `n_v ~ N(mean_v, std_v^2)`
/// with `c_v` either 1 or 0 (0 for intervened / pinned nodes).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianView {
    d: usize,
    weights: Vec<f64>,    // d x d, row v = coefficients over all nodes
    intercepts: Vec<f64>,
    own_coeff: Vec<f64>,  // 1.0 or 0.0
    noise_means: Vec<f64>,
    noise_stds: Vec<f64>, // 0 allowed
    topo: Vec<usize>,
}

fn linear_parts(mech: &Mechanism) -> Option<(Vec<f64>, f64)> {
    match mech {
        Mechanism::Linear { weights, intercept } => Some((weights.clone(), *intercept)),
        Mechanism::Mix { base, other, epsilon } => {
            let (wa, ia) = linear_parts(base)?;
            let (wb, ib) = linear_parts(other)?;
            if wa.len() != wb.len() {
                return None;
            }
            let w = wa
                .iter()
                .zip(wb.iter())
                .map(|(a, b)| (1.0 - epsilon) * a + epsilon * b)
                .collect();
            Some((w, (1.0 - epsilon) * ia + epsilon * ib))
        }
        _ => None,
    }
}

impl LinearGaussianView {
    /// Extracts the view from a model whose mechanisms are all linear (or
    /// fixed, or mixes of linear) with Gaussian or point-mass noise.
    pub fn from_scm(m: &Scm) -> Result<Self> {
        let d = m.node_count();
        let mut view = LinearGaussianView {
            d,
            weights: vec![0.0; d * d],
            intercepts: vec![0.0; d],
            own_coeff: vec![1.0; d],
            noise_means: vec![0.0; d],
            noise_stds: vec![0.0; d],
            topo: m.topo_order().to_owned(),
        };
        for v in 0..d {
            match &m.mechanisms()[v] {
                Mechanism::Fixed(value) => {
                    view.intercepts[v] = *value;
                    view.own_coeff[v] = 0.0;
                }
                mech => {
                    let Some((w, intercept)) = linear_parts(mech) else {
                        return Err(CoreError::Model(format!(
                            "node {} is not linear",
                            m.graph().label(v)
                        )));
                    };
                    view.intercepts[v] = intercept;
                    for (slot, &p) in m.graph().parents(v).iter().enumerate() {
                        view.weights[v * d + p] = w[slot];
                    }
                }
            }
            match &m.noises()[v] {
                NoiseSpec::Gaussian { mean, std } => {
                    view.noise_means[v] = *mean;
                    view.noise_stds[v] = *std;
                }
                NoiseSpec::PointMass { value } => {
                    view.noise_means[v] = *value;
                    view.noise_stds[v] = 0.0;
                }
                _ => {
                    return Err(CoreError::Model(format!(
                        "node {} does not have Gaussian noise",
                        m.graph().label(v)
                    )));
                }
            }
        }
        Ok(view)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// The exact joint: mean from forward substitution, covariance
    /// `M diag(std^2) M^T` where `M[v][k]` is the coefficient of noise `k`
    /// in node `v`.
    pub fn joint(&self) -> GaussianDist {
        let d = self.d;
        let mut mean = vec![0.0; d];
        let mut m = vec![0.0; d * d];
        for &v in &self.topo {
            mean[v] = self.intercepts[v] + self.own_coeff[v] * self.noise_means[v];
            m[v * d + v] = self.own_coeff[v];
            for p in 0..d {
                let w = self.weights[v * d + p];
                if w != 0.0 {
                    mean[v] += w * mean[p];
                    for k in 0..d {
                        let t = w * m[p * d + k];
                        m[v * d + k] += t;
                    }
                }
            }
        }
        let mut cov = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += m[i * d + k] * self.noise_stds[k] * self.noise_stds[k] * m[j * d + k];
                }
                cov[i * d + j] = s;
            }
        }
        GaussianDist::new(mean, cov).expect("structural covariance is PSD by construction")
    }

    /// Graph surgery on the view: zero the intervened rows, pin the
    /// intercept, drop the noise.
    pub fn intervened(&self, iv: &Intervention) -> LinearGaussianView {
        let mut out = self.clone();
        for &(node, value) in iv.assignments() {
            for p in 0..self.d {
                out.weights[node * self.d + p] = 0.0;
            }
            out.intercepts[node] = value;
            out.own_coeff[node] = 0.0;
            out.noise_means[node] = 0.0;
            out.noise_stds[node] = 0.0;
        }
        out
    }
}

/// Standard Gaussian conditioning. Observed coordinates become point masses
/// at their observed values; free coordinates get the conditional mean and
/// covariance. Errors if the observed block is singular.
pub fn conditional_gaussian(g: &GaussianDist, observed: &[(usize, f64)]) -> Result<GaussianDist> {
    let d = g.dim();
    for &(c, _) in observed {
        if c >= d {
            return Err(CoreError::Mismatch(format!("coordinate {c} out of range")));
        }
    }
    let obs_idx: Vec<usize> = observed.iter().map(|&(c, _)| c).collect();
    let free: Vec<usize> = (0..d).filter(|v| !obs_idx.contains(v)).collect();
    let n_o = obs_idx.len();
    if n_o == 0 {
        return Ok(g.clone());
    }
    // sigma_22 (observed block) and its Cholesky factor
    let mut s22 = vec![0.0; n_o * n_o];
    for (a, &ca) in obs_idx.iter().enumerate() {
        for (b, &cb) in obs_idx.iter().enumerate() {
            s22[a * n_o + b] = g.cov()[ca * d + cb];
        }
    }
    let l = crate::linalg::cholesky(n_o, &s22).ok_or_else(|| {
        CoreError::Numerical("observed block of the covariance is singular".into())
    })?;
    let diff: Vec<f64> = observed.iter().map(|&(c, v)| v - g.mean()[c]).collect();
    let alpha = crate::linalg::chol_solve(n_o, &l, &diff);
    // solve sigma_22 X = sigma_21 column-wise for the covariance update
    let mut mean = g.mean().to_owned();
    let mut cov = vec![0.0; d * d];
    let mut s21_f: Vec<Vec<f64>> = Vec::with_capacity(free.len());
    for &fv in &free {
        let col: Vec<f64> = obs_idx.iter().map(|&c| g.cov()[fv * d + c]).collect();
        mean[fv] += col.iter().zip(alpha.iter()).map(|(a, b)| a * b).sum::<f64>();
        s21_f.push(col);
    }
    for (a, &fa) in free.iter().enumerate() {
        let solved = crate::linalg::chol_solve(n_o, &l, &s21_f[a]);
        for (b, &fb) in free.iter().enumerate() {
            let corr: f64 = s21_f[b].iter().zip(solved.iter()).map(|(x, y)| x * y).sum();
            cov[fa * d + fb] = g.cov()[fa * d + fb] - corr;
        }
    }
    for &(c, v) in observed {
        mean[c] = v;
    }
    GaussianDist::new(mean, cov)
}

/// Base distance for the analytic oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticBase {
    /// Root of the Bures form (the 2-Wasserstein distance).
    W2,
    /// KL divergence (asymmetric).
    Kl,
}

/// Exact OD between two linear-Gaussian models.
pub fn analytic_od(
    v1: &LinearGaussianView,
    v2: &LinearGaussianView,
    base: AnalyticBase,
) -> Result<f64> {
    analytic_od_gauss(&v1.joint(), &v2.joint(), base)
}

pub fn analytic_od_gauss(g1: &GaussianDist, g2: &GaussianDist, base: AnalyticBase) -> Result<f64> {
    match base {
        AnalyticBase::W2 => Ok(gaussian_w2_squared(g1, g2)?.sqrt()),
        AnalyticBase::Kl => gaussian_kl(g1, g2),
    }
}

/// Exact ID: the weighted average over the d+1 intervention targets (the
/// empty intervention plus each node) of the exact per-value OD, with the
/// value expectation under N(0,1) taken by Gauss-Hermite quadrature.
/// `weights`, when given, has d+1 entries starting with the empty target.
pub fn analytic_id(
    v1: &LinearGaussianView,
    v2: &LinearGaussianView,
    base: AnalyticBase,
    quadrature: usize,
    weights: Option<&[f64]>,
) -> Result<f64> {
    Ok(analytic_id_breakdown(v1, v2, base, quadrature, weights)?.0)
}

/// As [`analytic_id`] but also returning the per-target terms (empty target
/// first, then one per node).
pub fn analytic_id_breakdown(
    v1: &LinearGaussianView,
    v2: &LinearGaussianView,
    base: AnalyticBase,
    quadrature: usize,
    weights: Option<&[f64]>,
) -> Result<(f64, Vec<f64>)> {
    let d = v1.dim();
    if v2.dim() != d {
        return Err(CoreError::Mismatch(format!(
            "views have {d} and {} nodes",
            v2.dim()
        )));
    }
    if let Some(w) = weights {
        if w.len() != d + 1 {
            return Err(CoreError::Mismatch(format!(
                "need {} weights, got {}",
                d + 1,
                w.len()
            )));
        }
    }
    let rule = gauss_hermite_normal(quadrature);
    let mut terms = Vec::with_capacity(d + 1);
    terms.push(analytic_od(v1, v2, base)?);
    for node in 0..d {
        let mut acc = 0.0;
        for &(value, w) in &rule {
            let iv = Intervention::single(node, value);
            acc += w * analytic_od(&v1.intervened(&iv), &v2.intervened(&iv), base)?;
        }
        terms.push(acc);
    }
    let total = match weights {
        Some(w) => terms.iter().zip(w.iter()).map(|(t, w)| t * w).sum(),
        None => terms.iter().sum::<f64>() / (d + 1) as f64,
    };
    Ok((total, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Dag;
    use crate::scm::{
        random_scm, Mechanism, ModelKind, NoiseSpec, Parametrization, Scm, VariableDomain,
    };

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    /// A ~ N(mu_a, s_a^2); B := beta A + N(mu_b, s_b^2)
    fn two_node(beta: f64, mu_a: f64, mu_b: f64, s_a: f64, s_b: f64) -> Scm {
        let g = Dag::new(vec!["A".into(), "B".into()], &[(0, 1)]).unwrap();
        Scm::new(
            g,
            vec![VariableDomain::Continuous; 2],
            vec![
                Mechanism::Linear { weights: vec![], intercept: 0.0 },
                Mechanism::Linear { weights: vec![beta], intercept: 0.0 },
            ],
            vec![
                NoiseSpec::Gaussian { mean: mu_a, std: s_a },
                NoiseSpec::Gaussian { mean: mu_b, std: s_b },
            ],
            ModelKind::StructuralModel,
        )
        .unwrap()
    }

    #[test]
    fn two_node_joint_matches_supplementary_display() {
        let (beta, mu_a, mu_b, s_a, s_b) = (1.7, 0.4, -0.2, 0.8, 1.3);
        let v = LinearGaussianView::from_scm(&two_node(beta, mu_a, mu_b, s_a, s_b)).unwrap();
        let j = v.joint();
        approx(j.mean()[0], mu_a, 1e-12);
        approx(j.mean()[1], beta * mu_a + mu_b, 1e-12);
        approx(j.cov()[0], s_a * s_a, 1e-12);
        approx(j.cov()[1], beta * s_a * s_a, 1e-12);
        approx(j.cov()[2], beta * s_a * s_a, 1e-12);
        approx(j.cov()[3], beta * beta * s_a * s_a + s_b * s_b, 1e-12);
    }

    #[test]
    fn edgeless_model_has_diagonal_covariance() {
        let g = Dag::with_index_labels(3, &[]).unwrap();
        let m = Scm::new(
            g,
            vec![VariableDomain::Continuous; 3],
            vec![
                Mechanism::Linear { weights: vec![], intercept: 1.0 },
                Mechanism::Linear { weights: vec![], intercept: 2.0 },
                Mechanism::Linear { weights: vec![], intercept: 3.0 },
            ],
            vec![
                NoiseSpec::Gaussian { mean: 0.0, std: 1.0 },
                NoiseSpec::Gaussian { mean: 0.0, std: 2.0 },
                NoiseSpec::Gaussian { mean: 0.0, std: 3.0 },
            ],
            ModelKind::StructuralModel,
        )
        .unwrap();
        let j = LinearGaussianView::from_scm(&m).unwrap().joint();
        assert_eq!(j.mean(), &[1.0, 2.0, 3.0]);
        for i in 0..3 {
            for k in 0..3 {
                let expect = if i == k { ((i + 1) * (i + 1)) as f64 } else { 0.0 };
                approx(j.cov()[i * 3 + k], expect, 1e-12);
            }
        }
    }

    #[test]
    fn chain_variance_accumulates() {
        // unit-weight chain of 3: Var(last) = 3, cross-checked by sampling
        let g = Dag::with_index_labels(3, &[(0, 1), (1, 2)]).unwrap();
        let m = Scm::new(
            g,
            vec![VariableDomain::Continuous; 3],
            vec![
                Mechanism::Linear { weights: vec![], intercept: 0.0 },
                Mechanism::Linear { weights: vec![1.0], intercept: 0.0 },
                Mechanism::Linear { weights: vec![1.0], intercept: 0.0 },
            ],
            vec![NoiseSpec::std_gaussian(); 3],
            ModelKind::StructuralModel,
        )
        .unwrap();
        let j = LinearGaussianView::from_scm(&m).unwrap().joint();
        approx(j.cov()[8], 3.0, 1e-12);
        let cov = m.sample(40_000, 3).covariance();
        approx(cov[8], 3.0, 0.12);
    }

    #[test]
    fn interventional_gaussians() {
        let (beta, mu_b, s_a, s_b) = (1.7, -0.2, 0.8, 1.3);
        let v = LinearGaussianView::from_scm(&two_node(beta, 0.4, mu_b, s_a, s_b)).unwrap();
        // do(A = a): mean (a, beta a + mu_b), cov [[0,0],[0,s_b^2]]
        let a = 2.5;
        let ia = v.intervened(&Intervention::single(0, a));
        let ja = ia.joint();
        approx(ja.mean()[0], a, 1e-12);
        approx(ja.mean()[1], beta * a + mu_b, 1e-12);
        assert_eq!(ja.cov()[0], 0.0);
        approx(ja.cov()[3], s_b * s_b, 1e-12);
        // do on all nodes: zero covariance
        let all = v.intervened(&Intervention::new(vec![(0, 1.0), (1, 2.0)]).unwrap());
        assert!(all.joint().cov().iter().all(|&c| c == 0.0));
        // do(B = b) leaves A's marginal untouched (surgery, not conditioning);
        // the supplementary's do(B) display shows a conditional variance in
        // the A slot, which graph surgery and the monte-carlo check contradict
        let ib = v.intervened(&Intervention::single(1, -1.0));
        let jb = ib.joint();
        approx(jb.mean()[0], 0.4, 1e-12);
        approx(jb.cov()[0], s_a * s_a, 1e-12);
        approx(jb.mean()[1], -1.0, 1e-12);
        assert_eq!(jb.cov()[3], 0.0);
        let m = two_node(beta, 0.4, mu_b, s_a, s_b);
        let done = m.apply_intervention(&Intervention::single(1, -1.0)).unwrap();
        let s = done.sample(40_000, 11);
        approx(s.column_mean(0), 0.4, 0.02);
        approx(s.covariance()[0], s_a * s_a, 0.03);
    }

    #[test]
    fn conditional_gaussian_two_node() {
        let (beta, s_a, s_b) = (1.7, 0.8, 1.3);
        let v = LinearGaussianView::from_scm(&two_node(beta, 0.0, 0.0, s_a, s_b)).unwrap();
        let j = v.joint();
        let b = 1.1;
        let cond = conditional_gaussian(&j, &[(1, b)]).unwrap();
        // standard conditioning:
        // var(A | B=b) = s_a^2 - beta^2 s_a^4 / (beta^2 s_a^2 + s_b^2)
        let var_b = beta * beta * s_a * s_a + s_b * s_b;
        let expect_var = s_a * s_a - beta * beta * s_a.powi(4) / var_b;
        let expect_mean = beta * s_a * s_a / var_b * b;
        approx(cond.mean()[0], expect_mean, 1e-12);
        approx(cond.cov()[0], expect_var, 1e-12);
        // observed coordinate is pinned
        approx(cond.mean()[1], b, 1e-12);
        assert_eq!(cond.cov()[3], 0.0);
        // monte-carlo rejection-sampling cross-check
        let m = two_node(beta, 0.0, 0.0, s_a, s_b);
        let s = m.sample(400_000, 5);
        let kept: Vec<f64> = (0..s.rows())
            .filter(|&r| (s.get(r, 1) - b).abs() < 0.02 * var_b.sqrt())
            .map(|r| s.get(r, 0))
            .collect();
        assert!(kept.len() > 2000, "rejection kept {}", kept.len());
        let mean = kept.iter().sum::<f64>() / kept.len() as f64;
        let var = kept.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / kept.len() as f64;
        approx(mean, expect_mean, 0.03);
        approx(var, expect_var, 0.03);
        // independent coordinates: conditioning changes nothing
        let ind = GaussianDist::new(vec![1.0, 2.0], vec![1.0, 0.0, 0.0, 4.0]).unwrap();
        let c = conditional_gaussian(&ind, &[(1, 5.0)]).unwrap();
        approx(c.mean()[0], 1.0, 1e-12);
        approx(c.cov()[0], 1.0, 1e-12);
        // conditioning on all coordinates gives a point mass
        let c = conditional_gaussian(&j, &[(0, 0.3), (1, 0.7)]).unwrap();
        assert_eq!(c.mean(), &[0.3, 0.7]);
        assert!(c.cov().iter().all(|&v| v == 0.0));
        // singular observed block errors
        let sing = GaussianDist::new(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(conditional_gaussian(&sing, &[(1, 0.0)]).is_err());
    }

    /// Case study: C1 has B := A + N, C2 has B := -A + N.
    fn case_study_pair(s_a: f64, s_b: f64) -> (Scm, Scm) {
        (
            two_node(1.0, 0.0, 0.0, s_a, s_b),
            two_node(-1.0, 0.0, 0.0, s_a, s_b),
        )
    }

    #[test]
    fn analytic_od_case_study() {
        let (m1, m2) = case_study_pair(1.0, 1.0);
        let v1 = LinearGaussianView::from_scm(&m1).unwrap();
        let v2 = LinearGaussianView::from_scm(&m2).unwrap();
        assert_eq!(analytic_od(&v1, &v1, AnalyticBase::W2).unwrap(), 0.0);
        // Bures between the case-study joints: W2^2 = 6 - 2 sqrt(5), i.e.
        // W2 = sqrt(5) - 1
        let od = analytic_od(&v1, &v2, AnalyticBase::W2).unwrap();
        approx(od, 5.0f64.sqrt() - 1.0, 1e-9);
        // shrinking sigma_a makes the observational distributions nearly
        // indistinguishable
        let (n1, n2) = case_study_pair(0.1, 1.0);
        let od_small = analytic_od(
            &LinearGaussianView::from_scm(&n1).unwrap(),
            &LinearGaussianView::from_scm(&n2).unwrap(),
            AnalyticBase::W2,
        )
        .unwrap();
        assert!(od_small < 0.1 * od, "{od_small} vs {od}");
    }

    #[test]
    fn analytic_id_case_study_terms() {
        for s_a in [1.0, 0.1] {
            let (m1, m2) = case_study_pair(s_a, 1.0);
            let v1 = LinearGaussianView::from_scm(&m1).unwrap();
            let v2 = LinearGaussianView::from_scm(&m2).unwrap();
            assert_eq!(
                analytic_id(&v1, &v1, AnalyticBase::W2, 64, None).unwrap(),
                0.0
            );
            let (total, terms) =
                analytic_id_breakdown(&v1, &v2, AnalyticBase::W2, 512, None).unwrap();
            // do(A = a): both models shift to means (a, +/- a) with equal
            // covariance, so OD_a = 2|a| and the term is 2 sqrt(2/pi)
            let expect = 2.0 * (2.0 / core::f64::consts::PI).sqrt();
            approx(terms[1], expect, 3e-3);
            // do(B = b): both post-surgery models are identical
            approx(terms[2], 0.0, 1e-12);
            assert!((total - (terms[0] + terms[1] + terms[2]) / 3.0).abs() < 1e-12);
            if s_a == 1.0 {
                // frozen oracle value: (sqrt(5) - 1 + 2 sqrt(2/pi)) / 3
                approx(total, 0.943_945_7, 1e-3);
            }
        }
    }

    #[test]
    fn analytic_id_invariant_under_relabeling() {
        let m1 = random_scm(Parametrization::LinGauss, 5, 2.0, 21);
        let m2 = random_scm(Parametrization::LinGauss, 5, 2.0, 22);
        let v1 = LinearGaussianView::from_scm(&m1).unwrap();
        let v2 = LinearGaussianView::from_scm(&m2).unwrap();
        let id = analytic_id(&v1, &v2, AnalyticBase::W2, 48, None).unwrap();
        let perm = [2usize, 0, 4, 1, 3];
        let permute = |m: &Scm| -> Scm {
            let d = m.node_count();
            let mut inv = vec![0usize; d];
            for (new, &old) in perm.iter().enumerate() {
                inv[old] = new;
            }
            let edges: Vec<(usize, usize)> = m
                .graph()
                .edges()
                .into_iter()
                .map(|(p, c)| (inv[p], inv[c]))
                .collect();
            let g = Dag::with_index_labels(d, &edges).unwrap();
            let mut mechs = vec![Mechanism::Fixed(0.0); d];
            let mut noises = vec![NoiseSpec::std_gaussian(); d];
            for old in 0..d {
                let Mechanism::Linear { weights, intercept } = &m.mechanisms()[old] else {
                    panic!()
                };
                let old_parents = m.graph().parents(old);
                let new_parents = g.parents(inv[old]).to_owned();
                let mut w = vec![0.0; new_parents.len()];
                for (slot, &op) in old_parents.iter().enumerate() {
                    let pos = new_parents.iter().position(|&np| np == inv[op]).unwrap();
                    w[pos] = weights[slot];
                }
                mechs[inv[old]] = Mechanism::Linear { weights: w, intercept: *intercept };
                noises[inv[old]] = m.noises()[old].clone();
            }
            Scm::new(
                g,
                vec![VariableDomain::Continuous; d],
                mechs,
                noises,
                ModelKind::StructuralModel,
            )
            .unwrap()
        };
        let id_perm = analytic_id(
            &LinearGaussianView::from_scm(&permute(&m1)).unwrap(),
            &LinearGaussianView::from_scm(&permute(&m2)).unwrap(),
            AnalyticBase::W2,
            48,
            None,
        )
        .unwrap();
        approx(id, id_perm, 1e-9);
    }

    /// Hidden-confounder pair: Z ~ N(0,1), X = lambda Z, Y = -lambda Z versus
    /// the sign-flipped model; identical (X, Y) joints, divergent do(Z).
    fn hidden_confounder_pair(lambda: f64) -> (Scm, Scm) {
        let build = |sx: f64| -> Scm {
            let g = Dag::new(vec!["Z".into(), "X".into(), "Y".into()], &[(0, 1), (0, 2)]).unwrap();
            Scm::new(
                g,
                vec![VariableDomain::Continuous; 3],
                vec![
                    Mechanism::Linear { weights: vec![], intercept: 0.0 },
                    Mechanism::Linear { weights: vec![sx * lambda], intercept: 0.0 },
                    Mechanism::Linear { weights: vec![-sx * lambda], intercept: 0.0 },
                ],
                vec![
                    NoiseSpec::std_gaussian(),
                    NoiseSpec::PointMass { value: 0.0 },
                    NoiseSpec::PointMass { value: 0.0 },
                ],
                ModelKind::StructuralModel,
            )
            .unwrap()
        };
        (build(1.0), build(-1.0))
    }

    #[test]
    fn hidden_confounder_witness() {
        let mut prev = 0.0;
        for (i, lambda) in [1.0, 2.0, 4.0, 8.0].into_iter().enumerate() {
            let (m1, m2) = hidden_confounder_pair(lambda);
            let v1 = LinearGaussianView::from_scm(&m1).unwrap();
            let v2 = LinearGaussianView::from_scm(&m2).unwrap();
            // the observed (X, Y) marginals are identical for every lambda
            let od = analytic_od_gauss(
                &v1.joint().marginal(&[1, 2]).unwrap(),
                &v2.joint().marginal(&[1, 2]).unwrap(),
                AnalyticBase::W2,
            )
            .unwrap();
            approx(od, 0.0, 1e-9);
            // but do(Z = z) separates them, linearly in lambda
            let iv = Intervention::single(0, 1.5);
            let dz = analytic_od_gauss(
                &v1.intervened(&iv).joint().marginal(&[1, 2]).unwrap(),
                &v2.intervened(&iv).joint().marginal(&[1, 2]).unwrap(),
                AnalyticBase::W2,
            )
            .unwrap();
            let expect = 2.0 * core::f64::consts::SQRT_2 * lambda * 1.5;
            approx(dz, expect, 1e-9);
            if i > 0 {
                approx(dz / prev, 2.0, 1e-9);
            }
            prev = dz;
        }
    }

    #[test]
    fn joint_matches_sampling_moments_on_random_models() {
        for seed in 0..6u64 {
            let d = 3 + (seed as usize % 8);
            let m = random_scm(Parametrization::LinGauss, d, 2.0, seed);
            let v = LinearGaussianView::from_scm(&m).unwrap();
            let j = v.joint();
            let k = 60_000;
            let s = m.sample(k, seed + 100);
            let cov = s.covariance();
            let scale = (0..d).map(|i| j.cov()[i * d + i]).fold(0.1, f64::max);
            let tol = 4.0 / (k as f64).sqrt() * scale.max(1.0) * 2.0;
            for i in 0..d {
                assert!(
                    (s.column_mean(i) - j.mean()[i]).abs() < tol,
                    "seed {seed} mean {i}"
                );
                for c in 0..d {
                    assert!(
                        (cov[i * d + c] - j.cov()[i * d + c]).abs() < tol * 2.0,
                        "seed {seed} cov {i},{c}: {} vs {}",
                        cov[i * d + c],
                        j.cov()[i * d + c]
                    );
                }
            }
        }
    }

    #[test]
    fn from_scm_rejects_non_linear_gaussian() {
        let m = random_scm(Parametrization::Gp, 3, 2.0, 1);
        assert!(LinearGaussianView::from_scm(&m).is_err());
        let m = random_scm(Parametrization::LinNGauss, 3, 2.0, 1);
        assert!(LinearGaussianView::from_scm(&m).is_err());
    }
}
