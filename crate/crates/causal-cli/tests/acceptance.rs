//! Acceptance suite: every criterion runs at its stated tolerance and prints
//! one pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines as they complete.

use causal_cli::experiments::{
    run_geometry, run_sample_efficiency, run_sensitivity_mec, run_sensitivity_mix,
};
use causal_cli::run::{cd_parallel, id_parallel, strong_chain_bayes_net, TwoNodeType};
use causal_core::abduct::{abduct, McmcConfig};
use causal_core::analytic::{
    analytic_id, analytic_id_breakdown, analytic_od, analytic_od_gauss, conditional_gaussian,
    AnalyticBase, LinearGaussianView,
};
use causal_core::dist::{od, DistanceConfig, SeedMode};
use causal_core::graph::{random_dag, Dag};
use causal_core::graphdist::{shd, sid, sid_pair_falsely_inferred};
use causal_core::mds::classical_mds;
use causal_core::ot::BaseDistanceConfig;
use causal_core::rng::Rng;
use causal_core::scm::{
    random_scm, Evidence, Intervention, Mechanism, ModelKind, NoiseSpec, Parametrization, Scm,
    VariableDomain,
};
use causal_core::CoreError;
use std::path::Path;
use std::time::Instant;

/// Collects sub-check outcomes and prints the one-line verdict.
struct Criterion {
    id: &'static str,
    name: &'static str,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: &'static str, name: &'static str) -> Self {
        Criterion {
            id,
            name,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, label: impl Into<String>) {
        let label = label.into();
        if !ok {
            self.failures.push(label);
        }
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn finish(self) {
        let verdict = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "ACCEPTANCE {} [{}] {}{}{}",
            self.id,
            verdict,
            self.name,
            if self.notes.is_empty() { "" } else { " -- " },
            self.notes.join("; ")
        );
        for f in &self.failures {
            println!("  failed: {f}");
        }
        assert!(
            self.failures.is_empty(),
            "criterion {} failed: {:?}",
            self.id,
            self.failures
        );
    }
}

fn fixtures() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load_fixture_model(name: &str) -> Scm {
    let path = fixtures().join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    if name.ends_with(".bif") {
        causal_io::bif_to_scm(&causal_io::parse_bif(&text).unwrap()).unwrap()
    } else {
        causal_io::parse_scm_json(&text).unwrap()
    }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Criterion 1: sampling estimators agree with the closed-form oracle on
/// random linear-Gaussian pairs. On this hardware the stated five-minute
/// budget is far out of reach for 2010 exact assignment solves at k = 5000
/// (two cores; roughly 2.4 s per solve), so the runtime sub-check reports
/// the measured wall clock honestly.
#[test]
fn acceptance_01_oracle_agreement() {
    let mut c = Criterion::new("1", "oracle agreement at k=5000 (OD 5%, ID 8%, l=50)");
    let t0 = Instant::now();
    let mut worst_od: f64 = 0.0;
    let mut worst_id: f64 = 0.0;
    for i in 0..10u64 {
        let m1 = random_scm(Parametrization::LinGauss, 4, 2.0, 1000 + 2 * i);
        let m2 = random_scm(Parametrization::LinGauss, 4, 2.0, 1001 + 2 * i);
        let v1 = LinearGaussianView::from_scm(&m1).unwrap();
        let v2 = LinearGaussianView::from_scm(&m2).unwrap();
        let cfg = DistanceConfig {
            k: 5000,
            l: 50,
            base: BaseDistanceConfig::w2().with_cap(5000),
            seed: 40 + i,
            ..Default::default()
        };
        let od_oracle = analytic_od(&v1, &v2, AnalyticBase::W2).unwrap();
        let od_est = od(&m1, &m2, &cfg).unwrap().value;
        let od_rel = (od_est - od_oracle).abs() / od_oracle.max(0.05);
        worst_od = worst_od.max(od_rel);
        c.check(
            od_rel <= 0.05,
            format!("pair {i}: |OD {od_est:.4} - oracle {od_oracle:.4}| rel {od_rel:.4} > 5%"),
        );
        let id_oracle = analytic_id(&v1, &v2, AnalyticBase::W2, 256, None).unwrap();
        let id_est = id_parallel(&m1, &m2, &cfg).unwrap().value;
        let id_rel = (id_est - id_oracle).abs() / id_oracle.max(0.05);
        worst_id = worst_id.max(id_rel);
        c.check(
            id_rel <= 0.08,
            format!("pair {i}: |ID {id_est:.4} - oracle {id_oracle:.4}| rel {id_rel:.4} > 8%"),
        );
    }
    let elapsed = t0.elapsed().as_secs_f64();
    c.note(format!(
        "worst relative error: OD {worst_od:.4}, ID {worst_id:.4}; wall clock {elapsed:.0}s"
    ));
    c.check(
        elapsed <= 300.0,
        format!(
            "runtime {elapsed:.0}s exceeds the stated 5-minute budget \
             (hardware limit: {} cores for ~2000 exact n=5000 assignment solves)",
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        ),
    );
    c.finish();
}

/// Criterion 2: the two-model case study. The do(A) term and the graphical
/// zeros reproduce; the full interventional distance under the stated
/// uniform-(d+1) convention has oracle value (sqrt(5) - 1 + 2 sqrt(2/pi))/3
/// = 0.9439, which is incompatible with the quoted 1.4 +/- 0.2 (that value
/// is recovered only by excluding the empty intervention and averaging
/// squared distances: sqrt(E[W2^2]) = sqrt(2) = 1.414). The 1.4 sub-check is
/// asserted as stated and fails; see the decisions ledger.
#[test]
fn acceptance_02_case_study() {
    let mut c = Criterion::new("2", "case study: ID terms, SID = SHD = 0");
    let m1 = load_fixture_model("case_study_1.scm");
    let m2 = load_fixture_model("case_study_2.scm");
    let expect_do_a = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
    let cfg = DistanceConfig {
        k: 1024,
        l: 400,
        seed: 11,
        ..Default::default()
    };
    let est = id_parallel(&m1, &m2, &cfg).unwrap();
    let v1 = LinearGaussianView::from_scm(&m1).unwrap();
    let v2 = LinearGaussianView::from_scm(&m2).unwrap();
    let oracle = analytic_id(&v1, &v2, AnalyticBase::W2, 512, None).unwrap();
    c.note(format!(
        "sigma_a=1: ID estimate {:.4}, oracle {:.4}, do(A) term {:.4}",
        est.value, oracle, est.terms[1].mean
    ));
    c.check(
        (est.terms[1].mean - expect_do_a).abs() <= 0.05 * expect_do_a,
        format!(
            "sigma_a=1: do(A) term {:.4} not within 5% of 2 sqrt(2/pi) = {expect_do_a:.4}",
            est.terms[1].mean
        ),
    );
    c.check(
        (est.value - 1.4).abs() <= 0.2,
        format!(
            "full ID {:.4} not within 1.4 +/- 0.2 under uniform-(d+1) weights (oracle {:.4}; \
             documented discrepancy: sqrt(2) = 1.414 is recovered only under a \
             root-mean-square convention without the empty intervention)",
            est.value, oracle
        ),
    );
    // sigma_a = 0.1 variant, built in code
    let build = |beta: f64| -> Scm {
        let g = Dag::new(vec!["A".into(), "B".into()], &[(0, 1)]).unwrap();
        Scm::new(
            g,
            vec![VariableDomain::Continuous; 2],
            vec![
                Mechanism::Linear { weights: vec![], intercept: 0.0 },
                Mechanism::Linear { weights: vec![beta], intercept: 0.0 },
            ],
            vec![
                NoiseSpec::Gaussian { mean: 0.0, std: 0.1 },
                NoiseSpec::Gaussian { mean: 0.0, std: 1.0 },
            ],
            ModelKind::StructuralModel,
        )
        .unwrap()
    };
    let (n1, n2) = (build(1.0), build(-1.0));
    let est_small = id_parallel(&n1, &n2, &cfg).unwrap();
    c.check(
        (est_small.terms[1].mean - expect_do_a).abs() <= 0.05 * expect_do_a,
        format!(
            "sigma_a=0.1: do(A) term {:.4} not within 5% of {expect_do_a:.4}",
            est_small.terms[1].mean
        ),
    );
    let oracle_small = analytic_id(
        &LinearGaussianView::from_scm(&n1).unwrap(),
        &LinearGaussianView::from_scm(&n2).unwrap(),
        AnalyticBase::W2,
        512,
        None,
    )
    .unwrap();
    c.note(format!(
        "sigma_a=0.1: ID estimate {:.4} reported against oracle {:.4} (not against 1.4)",
        est_small.value, oracle_small
    ));
    c.check(
        (est_small.value - oracle_small).abs() <= 0.08 * oracle_small.max(0.05),
        format!(
            "sigma_a=0.1: ID {:.4} not within 8% of its oracle {:.4}",
            est_small.value, oracle_small
        ),
    );
    // the pair shares its graph, so both graphical distances vanish
    c.check(
        shd(m1.graph(), m2.graph()).unwrap() == 0 && sid(m1.graph(), m2.graph()).unwrap() == 0,
        "SID = SHD = 0 for the shared graph",
    );
    c.finish();
}

/// Criterion 3: ladder inequalities with the measured self-distance floors.
#[test]
fn acceptance_03_ladder_inequalities() {
    let mut c = Criterion::new("3", "ladder: OD <= (d+1) ID + 3 floor, ID <= (d+1) CD + 3 floor");
    let mcmc = McmcConfig {
        pool_size: 120,
        burn_in: 300,
        ..Default::default()
    };
    for i in 0..10u64 {
        let d = 3 + (i as usize) % 4;
        let m1 = random_scm(Parametrization::LinGauss, d, 2.0, 3000 + 2 * i);
        let m2 = random_scm(Parametrization::LinGauss, d, 2.0, 3001 + 2 * i);
        let cfg = DistanceConfig {
            k: 256,
            l: 12,
            m: 4,
            seed: 60 + i,
            seed_mode: SeedMode::Disjoint,
            mcmc: mcmc.clone(),
            ..Default::default()
        };
        let od_v = od(&m1, &m2, &cfg).unwrap().value;
        let id_v = id_parallel(&m1, &m2, &cfg).unwrap().value;
        let cd_v = cd_parallel(&m1, &m2, &cfg).unwrap().value;
        let floor_od = od(&m1, &m1, &cfg).unwrap().value.max(od(&m2, &m2, &cfg).unwrap().value);
        let floor_id = id_parallel(&m1, &m1, &cfg)
            .unwrap()
            .value
            .max(id_parallel(&m2, &m2, &cfg).unwrap().value);
        let bound1 = (d + 1) as f64 * id_v + 3.0 * floor_od;
        let bound2 = (d + 1) as f64 * cd_v + 3.0 * floor_id;
        c.check(
            od_v <= bound1,
            format!("pair {i} (d={d}): OD {od_v:.4} > (d+1) ID + 3 floor = {bound1:.4}"),
        );
        c.check(
            id_v <= bound2,
            format!("pair {i} (d={d}): ID {id_v:.4} > (d+1) CD + 3 floor = {bound2:.4}"),
        );
    }
    c.note("zero violations over 10 random pairs".to_string());
    c.finish();
}

// ---- exact-enumeration adjustment oracle over random binary CPTs ----

struct BinJoint {
    d: usize,
    probs: Vec<f64>,
    cpts: Vec<Vec<f64>>,
    g: Dag,
}

impl BinJoint {
    fn random(g: &Dag, rng: &mut Rng) -> Self {
        let d = g.node_count();
        let cpts: Vec<Vec<f64>> = (0..d)
            .map(|v| {
                let rows = 1usize << g.parents(v).len();
                (0..rows).map(|_| rng.range(0.1, 0.9)).collect()
            })
            .collect();
        let mut probs = vec![0.0; 1 << d];
        for state in 0..(1usize << d) {
            let mut p = 1.0;
            for v in 0..d {
                let mut row = 0usize;
                for &pa in g.parents(v) {
                    row = row * 2 + ((state >> pa) & 1);
                }
                let p1 = cpts[v][row];
                p *= if (state >> v) & 1 == 1 { p1 } else { 1.0 - p1 };
            }
            probs[state] = p;
        }
        BinJoint { d, probs, cpts, g: g.clone() }
    }

    fn marginal_j(&self, j: usize) -> f64 {
        (0..(1usize << self.d))
            .filter(|s| (s >> j) & 1 == 1)
            .map(|s| self.probs[s])
            .sum()
    }

    fn do_marginal(&self, i: usize, v: usize, j: usize) -> f64 {
        let mut total = 0.0;
        for state in 0..(1usize << self.d) {
            if (state >> i) & 1 != v || (state >> j) & 1 != 1 {
                continue;
            }
            let mut p = 1.0;
            for node in 0..self.d {
                if node == i {
                    continue;
                }
                let mut row = 0usize;
                for &pa in self.g.parents(node) {
                    row = row * 2 + ((state >> pa) & 1);
                }
                let p1 = self.cpts[node][row];
                p *= if (state >> node) & 1 == 1 { p1 } else { 1.0 - p1 };
            }
            total += p;
        }
        total
    }

    fn adjustment_estimate(&self, i: usize, v: usize, j: usize, zs: &[usize]) -> f64 {
        let mut total = 0.0;
        for zmask in 0..(1usize << zs.len()) {
            let mut pz = 0.0;
            let mut pxz = 0.0;
            let mut pvz = 0.0;
            for state in 0..(1usize << self.d) {
                let matches = zs
                    .iter()
                    .enumerate()
                    .all(|(slot, &zn)| (state >> zn) & 1 == (zmask >> slot) & 1);
                if !matches {
                    continue;
                }
                pz += self.probs[state];
                if (state >> i) & 1 == v {
                    pvz += self.probs[state];
                    if (state >> j) & 1 == 1 {
                        pxz += self.probs[state];
                    }
                }
            }
            if pvz > 0.0 {
                total += pz * pxz / pvz;
            }
        }
        total
    }

    fn pair_correct(&self, i: usize, j: usize, zs: &[usize]) -> bool {
        let tol = 1e-9;
        if zs.contains(&j) {
            let pj = self.marginal_j(j);
            (0..2).all(|v| (self.do_marginal(i, v, j) - pj).abs() < tol)
        } else {
            (0..2).all(|v| {
                (self.do_marginal(i, v, j) - self.adjustment_estimate(i, v, j, zs)).abs() < tol
            })
        }
    }
}

/// Criterion 4: the graphical SID verdict agrees with the numeric
/// adjustment oracle on every ordered pair of 50 random graph pairs.
#[test]
fn acceptance_04_sid_oracle_agreement() {
    let mut c = Criterion::new("4", "SID graphical verdicts match the exact adjustment oracle");
    let t0 = Instant::now();
    let mut rng = Rng::new(4242);
    let mut pairs_checked = 0usize;
    for t in 0..50u64 {
        let d = 2 + (t as usize) % 4;
        let g = random_dag(d, 1.8, 5000 + 2 * t);
        let h = random_dag(d, 1.8, 5001 + 2 * t);
        let joint = BinJoint::random(&g, &mut rng);
        for i in 0..d {
            let z = h.parents(i).to_vec();
            for j in 0..d {
                if i == j {
                    continue;
                }
                let graphical_wrong = sid_pair_falsely_inferred(&g, i, j, &z);
                let numeric_wrong = !joint.pair_correct(i, j, &z);
                pairs_checked += 1;
                c.check(
                    graphical_wrong == numeric_wrong,
                    format!(
                        "pair set {t} ({i} -> {j}): graphical {graphical_wrong} vs numeric \
                         {numeric_wrong}; g = {:?}, h = {:?}",
                        g.edges(),
                        h.edges()
                    ),
                );
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    c.note(format!("{pairs_checked} ordered pairs, wall clock {elapsed:.1}s"));
    c.check(elapsed <= 600.0, format!("runtime {elapsed:.0}s > 10 min"));
    c.finish();
}

/// Criterion 5: median self-distances strictly decrease in the sample count.
#[test]
fn acceptance_05_sample_efficiency() {
    let mut c = Criterion::new("5", "self-OD and self-ID medians strictly decrease in k");
    let k_grid = [100usize, 400, 1600, 6400];
    // the grid exceeds the exact cap, so all cells use the sliced base
    let base = BaseDistanceConfig::sliced(50);
    let (rows, _) = run_sample_efficiency(
        &k_grid,
        10,
        6,
        3.0,
        100,
        10,
        Parametrization::LinGauss,
        77,
        &["od".to_string(), "id".to_string()],
        base,
    )
    .unwrap();
    for dist in ["od", "id"] {
        let medians: Vec<f64> = k_grid
            .iter()
            .map(|&k| {
                let mut vals: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.distance == dist && r.k == k)
                    .map(|r| r.value)
                    .collect();
                assert_eq!(vals.len(), 10);
                median(&mut vals)
            })
            .collect();
        c.note(format!("{dist} medians over k {k_grid:?}: {medians:.4?}"));
        for w in medians.windows(2) {
            c.check(
                w[1] < w[0],
                format!("{dist} median did not strictly decrease: {medians:?}"),
            );
        }
    }
    c.finish();
}

/// Criterion 6: sensitivity to mechanism mixing (rank correlation with the
/// perturbation) and to Markov-equivalent refits (OD flat, ID grows).
#[test]
fn acceptance_06_sensitivity() {
    let mut c = Criterion::new("6", "sensitivity: mix Spearman >= 0.9; MEC leaves OD, moves ID");
    // mechanism mixing
    let model = random_scm(Parametrization::LinGauss, 5, 2.0, 600);
    let node = (0..model.node_count())
        .find(|&v| !model.graph().parents(v).is_empty())
        .unwrap();
    let cfg = DistanceConfig {
        k: 500,
        l: 20,
        m: 5,
        seed: 13,
        mcmc: McmcConfig { pool_size: 120, burn_in: 300, ..Default::default() },
        ..Default::default()
    };
    let epsilons = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    let (rows, report) = run_sensitivity_mix(&model, node, &epsilons, &cfg, 601).unwrap();
    let rho = &report.params["spearman"];
    c.note(format!(
        "mix spearman: od {:.3} id {:.3} cd {:.3}",
        rho["od"].as_f64().unwrap(),
        rho["id"].as_f64().unwrap(),
        rho["cd"].as_f64().unwrap()
    ));
    for name in ["od", "id", "cd"] {
        c.check(
            rho[name].as_f64().unwrap() >= 0.9,
            format!("mix mode: spearman({name}, epsilon) = {} < 0.9", rho[name]),
        );
    }
    c.check(
        rows[0].od == 0.0 && rows[0].id == 0.0 && rows[0].cd == 0.0,
        "epsilon = 0 sits at the shared-seed floor (exactly zero)",
    );
    // markov-equivalence refits on the strong five-node chain
    let truth = strong_chain_bayes_net(5);
    let mec_cfg = DistanceConfig {
        k: 2000,
        l: 20,
        seed: 17,
        base: BaseDistanceConfig::w2().with_cap(2000),
        ..Default::default()
    };
    let out = run_sensitivity_mec(&truth, 2000, &mec_cfg, 8).unwrap();
    let max_eps = out
        .rows
        .iter()
        .max_by(|a, b| a.epsilon.partial_cmp(&b.epsilon).unwrap())
        .unwrap();
    c.note(format!(
        "mec: {} members, floors od {:.4} id {:.4}, max-eps member od {:.4} id {:.4}",
        out.rows.len(),
        out.floor_od,
        out.floor_id,
        max_eps.od,
        max_eps.id
    ));
    for r in &out.rows {
        c.check(
            r.od <= 2.0 * out.floor_od,
            format!(
                "mec member {} (eps {:.2}): OD {:.4} above 2x floor {:.4}",
                r.member, r.epsilon, r.od, out.floor_od
            ),
        );
    }
    c.check(
        max_eps.id > 5.0 * out.floor_id,
        format!(
            "mec: ID at max eps {:.4} not above 5x floor {:.4}",
            max_eps.id, out.floor_id
        ),
    );
    c.finish();
}

/// Criterion 7: the 20-model geometry. SID collapses the models onto two
/// points; the exact ID matrix is monotone in the strength difference
/// within every type.
#[test]
fn acceptance_07_geometry() {
    let mut c = Criterion::new("7", "geometry: SID two-point collapse, ID monotone in |b1 - b2|");
    let betas = [0.1, 0.5, 1.0, 2.0, 5.0];
    let out = run_geometry(&betas, 128).unwrap();
    let n = out.names.len();
    // distinct rows of the SID matrix
    let mut rows: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            out.sid_matrix[i * n..(i + 1) * n]
                .iter()
                .map(|v| v.to_bits())
                .collect()
        })
        .collect();
    rows.sort();
    rows.dedup();
    c.check(
        rows.len() == 2,
        format!("SID matrix has {} distinct rows, expected 2", rows.len()),
    );
    // distinct MDS points at 1e-9
    let coords = classical_mds(n, &out.sid_matrix, 2);
    let mut distinct: Vec<&Vec<f64>> = Vec::new();
    for p in &coords {
        if !distinct
            .iter()
            .any(|q| (p[0] - q[0]).abs() < 1e-9 && (p[1] - q[1]).abs() < 1e-9)
        {
            distinct.push(p);
        }
    }
    c.check(
        distinct.len() == 2,
        format!("SID embedding has {} distinct points, expected 2", distinct.len()),
    );
    // within-type monotonicity of the exact ID matrix
    for (t, _ty) in TwoNodeType::ALL.iter().enumerate() {
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for a in 0..betas.len() {
            for b in (a + 1)..betas.len() {
                let (i, j) = (t * betas.len() + a, t * betas.len() + b);
                pairs.push(((betas[b] - betas[a]).abs(), out.id_matrix[i * n + j]));
            }
        }
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for w in pairs.windows(2) {
            c.check(
                w[1].1 > w[0].1,
                format!(
                    "type {t}: ID not monotone (|db| {:.2} -> {:.4}, |db| {:.2} -> {:.4})",
                    w[0].0, w[0].1, w[1].0, w[1].1
                ),
            );
        }
    }
    c.note("all 4 types monotone".to_string());
    c.finish();
}

/// Criterion 8: abduction posterior against exact Gaussian conditioning,
/// and exactness of full-evidence abduction.
#[test]
fn acceptance_08_counterfactual_correctness() {
    let mut c = Criterion::new("8", "abduction matches exact conditioning; full evidence exact");
    let g = Dag::new(vec!["A".into(), "B".into()], &[(0, 1)]).unwrap();
    let m = Scm::new(
        g,
        vec![VariableDomain::Continuous; 2],
        vec![
            Mechanism::Linear { weights: vec![], intercept: 0.0 },
            Mechanism::Linear { weights: vec![1.0], intercept: 0.0 },
        ],
        vec![NoiseSpec::std_gaussian(), NoiseSpec::std_gaussian()],
        ModelKind::StructuralModel,
    )
    .unwrap();
    let joint = LinearGaussianView::from_scm(&m).unwrap().joint();
    let mcmc = McmcConfig {
        pool_size: 2000,
        thinning: 10,
        ..Default::default()
    };
    for (i, &b) in [-2.0, -0.7, 0.0, 0.9, 1.8].iter().enumerate() {
        let cond = conditional_gaussian(&joint, &[(1, b)]).unwrap();
        let cm = abduct(&m, &Evidence::single(1, b), &mcmc, 700 + i as u64).unwrap();
        let pool = cm.pool();
        let col: Vec<f64> = (0..pool.rows()).map(|r| pool.get(r, 0)).collect();
        let nn = col.len() as f64;
        let mean = col.iter().sum::<f64>() / nn;
        let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / nn;
        // three monte-carlo standard errors, with the iid error inflated 3x
        // for chain autocorrelation
        let se = (cond.cov()[0] / nn).sqrt() * 3.0;
        c.check(
            (mean - cond.mean()[0]).abs() <= 3.0 * se,
            format!(
                "evidence B={b}: posterior mean {mean:.4} vs exact {:.4} (3 SE = {:.4})",
                cond.mean()[0],
                3.0 * se
            ),
        );
        c.check(
            (var - cond.cov()[0]).abs() <= 0.10 * cond.cov()[0],
            format!(
                "evidence B={b}: posterior variance {var:.4} vs exact {:.4} (+/- 10%)",
                cond.cov()[0]
            ),
        );
    }
    // full evidence: exact inversion to 1e-9
    let ev = Evidence::new(vec![(0, 0.4), (1, -1.1)]).unwrap();
    let cm = abduct(&m, &ev, &McmcConfig::default(), 9).unwrap();
    let pool = cm.pool();
    let mut exact = true;
    for r in 0..pool.rows() {
        exact &= (pool.get(r, 0) - 0.4).abs() < 1e-9;
        exact &= (pool.get(r, 1) - (-1.1 - 0.4)).abs() < 1e-9;
    }
    c.check(exact && cm.reproduction_error() < 1e-9, "full-evidence abduction exact to 1e-9");
    c.note("5 evidence values checked".to_string());
    c.finish();
}

/// Criterion 9: the hidden-confounder witness: identical observed joints
/// for every lambda, do(Z) distance doubling with lambda.
#[test]
fn acceptance_09_hidden_confounder() {
    let mut c = Criterion::new("9", "hidden confounder: OD(X,Y) = 0, do(Z) distance doubles");
    let build = |lambda: f64, sx: f64| -> Scm {
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
    let mut prev: Option<f64> = None;
    for lambda in [1.0, 2.0, 4.0, 8.0] {
        let v1 = LinearGaussianView::from_scm(&build(lambda, 1.0)).unwrap();
        let v2 = LinearGaussianView::from_scm(&build(lambda, -1.0)).unwrap();
        let od_xy = analytic_od_gauss(
            &v1.joint().marginal(&[1, 2]).unwrap(),
            &v2.joint().marginal(&[1, 2]).unwrap(),
            AnalyticBase::W2,
        )
        .unwrap();
        c.check(
            od_xy.abs() <= 1e-9,
            format!("lambda {lambda}: observed OD {od_xy:.2e} != 0"),
        );
        let iv = Intervention::single(0, 1.5);
        let dz = analytic_od_gauss(
            &v1.intervened(&iv).joint().marginal(&[1, 2]).unwrap(),
            &v2.intervened(&iv).joint().marginal(&[1, 2]).unwrap(),
            AnalyticBase::W2,
        )
        .unwrap();
        if let Some(p) = prev {
            let ratio = dz / p;
            c.check(
                (ratio - 2.0).abs() <= 0.02,
                format!("lambda {lambda}: ratio {ratio:.4} not 2 +/- 1%"),
            );
        }
        prev = Some(dz);
    }
    c.finish();
}

/// Exact per-node marginals of a CPT network by full joint enumeration.
fn exact_marginals(m: &Scm) -> Vec<Vec<f64>> {
    let d = m.node_count();
    let cards: Vec<usize> = m
        .domains()
        .iter()
        .map(|dom| dom.cardinality().unwrap())
        .collect();
    let total: usize = cards.iter().product();
    let mut marginals: Vec<Vec<f64>> = cards.iter().map(|&c| vec![0.0; c]).collect();
    let mut state = vec![0usize; d];
    for flat in 0..total {
        let mut rem = flat;
        for v in (0..d).rev() {
            state[v] = rem % cards[v];
            rem /= cards[v];
        }
        let mut p = 1.0;
        for v in 0..d {
            let Mechanism::Cpt(t) = &m.mechanisms()[v] else { panic!() };
            let parent_states: Vec<usize> =
                m.graph().parents(v).iter().map(|&q| state[q]).collect();
            p *= t.row(&parent_states)[state[v]];
        }
        for v in 0..d {
            marginals[v][state[v]] += p;
        }
    }
    marginals
}

/// Criterion 10: BIF round trips, marginal agreement with exact
/// enumeration, and the counterfactual refusal.
#[test]
fn acceptance_10_parsing() {
    let mut c = Criterion::new("10", "BIF round-trip, marginals vs enumeration, cd refusal");
    let files = ["cancer.bif", "earthquake.bif", "survey.bif", "asia.bif", "sachs.bif"];
    let k = 50_000;
    let tol = 3.0 / (k as f64).sqrt();
    for name in files {
        let text = std::fs::read_to_string(fixtures().join(name)).unwrap();
        let doc = causal_io::parse_bif(&text).unwrap();
        let again = causal_io::parse_bif(&causal_io::serialize_bif(&doc)).unwrap();
        c.check(doc == again, format!("{name}: round trip differs"));
        let m = causal_io::bif_to_scm(&doc).unwrap();
        let exact = exact_marginals(&m);
        let s = m.sample(k, 0xB1F + name.len() as u64);
        for v in 0..m.node_count() {
            let col = s.column(v);
            for (state, &target) in exact[v].iter().enumerate() {
                let freq =
                    col.iter().filter(|&&x| x as usize == state).count() as f64 / k as f64;
                c.check(
                    (freq - target).abs() <= tol,
                    format!(
                        "{name}: node {v} state {state} marginal {freq:.4} vs exact \
                         {target:.4} (tol {tol:.4})"
                    ),
                );
            }
        }
        let err = cd_parallel(&m, &m, &DistanceConfig::default()).unwrap_err();
        let is_unsupported = matches!(
            err,
            causal_cli::run::CliError::Core(CoreError::CounterfactualUnsupported)
        );
        c.check(is_unsupported, format!("{name}: cd did not refuse"));
    }
    c.note(format!("{} fixture networks", files.len()));
    c.finish();
}
