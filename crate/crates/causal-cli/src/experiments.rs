//! The experiment harness behind the geometry, sample-eff, sensitivity and
//! eval subcommands. Each experiment emits plot-ready CSV plus a JSON
//! manifest; every cell records the seed that reproduces it.

use crate::run::{cd_parallel, id_parallel, spearman, CliError, CliResult, TwoNodeType};
use causal_core::analytic::{
    analytic_id, analytic_od, AnalyticBase, LinearGaussianView,
};
use causal_core::dist::{od, DistanceConfig, SeedMode};
use causal_core::graph::markov_equivalence_class;
use causal_core::graphdist::{shd_with_cost, sid};
use causal_core::mds::classical_mds;
use causal_core::rng::mix;
use causal_core::scm::{perturb_mechanism, random_scm, Parametrization, Scm};
use causal_io::{
    fit_mle_and_orient, parse_dataset_csv, parse_graph_output, DatasetTable, ExperimentCell,
    ExperimentReport,
};
use serde_json::json;
use std::time::Instant;

fn csv_matrix(names: &[String], m: &[f64]) -> String {
    let n = names.len();
    let mut out = String::from("model");
    for name in names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for i in 0..n {
        out.push_str(&names[i]);
        for j in 0..n {
            out.push_str(&format!(",{}", m[i * n + j]));
        }
        out.push('\n');
    }
    out
}

fn csv_coords(names: &[String], coords: &[Vec<f64>]) -> String {
    let mut out = String::from("model,x,y\n");
    for (name, c) in names.iter().zip(coords.iter()) {
        out.push_str(&format!("{name},{},{}\n", c[0], c[1]));
    }
    out
}

pub struct GeometryOutput {
    pub names: Vec<String>,
    pub sid_matrix: Vec<f64>,
    pub od_matrix: Vec<f64>,
    pub id_matrix: Vec<f64>,
    pub mds_sid: Vec<Vec<f64>>,
    pub mds_od: Vec<Vec<f64>>,
    pub mds_id: Vec<Vec<f64>>,
    pub report: ExperimentReport,
    pub files: Vec<(String, String)>,
}

/// The 20-model geometry experiment: 4 two-node types times 5 connection
/// strengths; pairwise SID/OD/ID plus 2D embeddings by classical MDS.
/// All models are linear-Gaussian, so OD and ID come from the closed-form
/// oracle and the matrices are exact.
pub fn run_geometry(betas: &[f64], quadrature: usize) -> CliResult<GeometryOutput> {
    let t0 = Instant::now();
    let mut names = Vec::new();
    let mut models: Vec<Scm> = Vec::new();
    for ty in TwoNodeType::ALL {
        for &beta in betas {
            names.push(format!("{} b={beta}", ty.name()));
            models.push(ty.build(beta));
        }
    }
    let n = models.len();
    let views: Vec<LinearGaussianView> = models
        .iter()
        .map(|m| LinearGaussianView::from_scm(m).map_err(CliError::from))
        .collect::<CliResult<_>>()?;
    let mut sid_m = vec![0.0; n * n];
    let mut od_m = vec![0.0; n * n];
    let mut id_m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            sid_m[i * n + j] = sid(models[i].graph(), models[j].graph())? as f64;
            if i < j {
                let o = analytic_od(&views[i], &views[j], AnalyticBase::W2)?;
                let d = analytic_id(&views[i], &views[j], AnalyticBase::W2, quadrature, None)?;
                od_m[i * n + j] = o;
                od_m[j * n + i] = o;
                id_m[i * n + j] = d;
                id_m[j * n + i] = d;
            }
        }
    }
    let mds_sid = classical_mds(n, &sid_m, 2);
    let mds_od = classical_mds(n, &od_m, 2);
    let mds_id = classical_mds(n, &id_m, 2);
    let report = ExperimentReport {
        experiment: "geometry".into(),
        params: json!({"betas": betas, "types": TwoNodeType::ALL.map(|t| t.name()), "quadrature": quadrature}),
        cells: vec![],
        wall_clock_secs: t0.elapsed().as_secs_f64(),
    };
    let files = vec![
        ("sid_matrix.csv".to_string(), csv_matrix(&names, &sid_m)),
        ("od_matrix.csv".to_string(), csv_matrix(&names, &od_m)),
        ("id_matrix.csv".to_string(), csv_matrix(&names, &id_m)),
        ("mds_sid.csv".to_string(), csv_coords(&names, &mds_sid)),
        ("mds_od.csv".to_string(), csv_coords(&names, &mds_od)),
        ("mds_id.csv".to_string(), csv_coords(&names, &mds_id)),
        ("manifest.json".to_string(), report.to_json()),
    ];
    Ok(GeometryOutput {
        names,
        sid_matrix: sid_m,
        od_matrix: od_m,
        id_matrix: id_m,
        mds_sid,
        mds_od,
        mds_id,
        report,
        files,
    })
}

pub struct SampleEffRow {
    pub distance: &'static str,
    pub k: usize,
    pub repeat: usize,
    pub seed: u64,
    pub value: f64,
}

/// Self-distance of a model against itself with independent sampling
/// streams, across a grid of sample counts.
#[allow(clippy::too_many_arguments)]
pub fn run_sample_efficiency(
    k_grid: &[usize],
    repeats: usize,
    d: usize,
    degree: f64,
    l: usize,
    m: usize,
    parametrization: Parametrization,
    seed: u64,
    distances: &[String],
    base_cfg: causal_core::ot::BaseDistanceConfig,
) -> CliResult<(Vec<SampleEffRow>, ExperimentReport)> {
    let t0 = Instant::now();
    let mut rows = Vec::new();
    for rep in 0..repeats {
        let model_seed = mix(seed, rep as u64, 0x5345_4646, 0);
        let model = random_scm(parametrization, d, degree, model_seed);
        for &k in k_grid {
            let cfg = DistanceConfig {
                k,
                l,
                m,
                seed: mix(seed, rep as u64, 0x5345_4646, 1 + k as u64),
                seed_mode: SeedMode::Disjoint,
                base: base_cfg,
                ..Default::default()
            };
            for dist in distances {
                let value = match dist.as_str() {
                    "od" => od(&model, &model, &cfg)?.value,
                    "id" => id_parallel(&model, &model, &cfg)?.value,
                    "cd" => cd_parallel(&model, &model, &cfg)?.value,
                    other => {
                        return Err(CliError::Usage(format!(
                            "unknown distance {other:?} (expected od, id or cd)"
                        )))
                    }
                };
                rows.push(SampleEffRow {
                    distance: match dist.as_str() {
                        "od" => "od",
                        "id" => "id",
                        _ => "cd",
                    },
                    k,
                    repeat: rep,
                    seed: cfg.seed,
                    value,
                });
            }
        }
    }
    let cells = rows
        .iter()
        .map(|r| ExperimentCell {
            key: json!({"distance": r.distance, "k": r.k, "repeat": r.repeat}),
            value: r.value,
            std: None,
            seed: r.seed,
        })
        .collect();
    let report = ExperimentReport {
        experiment: "sample-efficiency".into(),
        params: json!({
            "k_grid": k_grid, "repeats": repeats, "d": d, "degree": degree,
            "l": l, "m": m, "parametrization": parametrization.name(), "seed": seed,
        }),
        cells,
        wall_clock_secs: t0.elapsed().as_secs_f64(),
    };
    Ok((rows, report))
}

pub fn sample_eff_csv(rows: &[SampleEffRow]) -> String {
    let mut out = String::from("distance,k,repeat,seed,value\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.distance, r.k, r.repeat, r.seed, r.value
        ));
    }
    out
}

pub struct SensitivityMixRow {
    pub epsilon: f64,
    pub od: f64,
    pub id: f64,
    pub cd: f64,
}

/// Mechanism-mixing sensitivity: perturb one mechanism by
/// `(1 - eps) f + eps g` and track all three distances against the original.
#[allow(clippy::too_many_arguments)]
pub fn run_sensitivity_mix(
    model: &Scm,
    node: usize,
    epsilons: &[f64],
    cfg: &DistanceConfig,
    perturb_seed: u64,
) -> CliResult<(Vec<SensitivityMixRow>, ExperimentReport)> {
    let t0 = Instant::now();
    let mut rows = Vec::new();
    for &eps in epsilons {
        let perturbed = perturb_mechanism(model, node, eps, perturb_seed)?;
        let o = od(model, &perturbed, cfg)?.value;
        let i = id_parallel(model, &perturbed, cfg)?.value;
        let c = cd_parallel(model, &perturbed, cfg)?.value;
        rows.push(SensitivityMixRow {
            epsilon: eps,
            od: o,
            id: i,
            cd: c,
        });
    }
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let rho_od = spearman(&eps, &rows.iter().map(|r| r.od).collect::<Vec<_>>());
    let rho_id = spearman(&eps, &rows.iter().map(|r| r.id).collect::<Vec<_>>());
    let rho_cd = spearman(&eps, &rows.iter().map(|r| r.cd).collect::<Vec<_>>());
    let cells = rows
        .iter()
        .flat_map(|r| {
            [("od", r.od), ("id", r.id), ("cd", r.cd)].map(|(name, value)| ExperimentCell {
                key: json!({"distance": name, "epsilon": r.epsilon}),
                value,
                std: None,
                seed: cfg.seed,
            })
        })
        .collect();
    let report = ExperimentReport {
        experiment: "sensitivity-mix".into(),
        params: json!({
            "node": node, "epsilons": epsilons, "k": cfg.k, "l": cfg.l, "m": cfg.m,
            "seed": cfg.seed, "perturb_seed": perturb_seed,
            "spearman": {"od": rho_od, "id": rho_id, "cd": rho_cd},
        }),
        cells,
        wall_clock_secs: t0.elapsed().as_secs_f64(),
    };
    Ok((rows, report))
}

pub fn sensitivity_mix_csv(rows: &[SensitivityMixRow]) -> String {
    let mut out = String::from("epsilon,od,id,cd\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.epsilon, r.od, r.id, r.cd));
    }
    out
}

pub struct SensitivityMecRow {
    pub member: usize,
    pub epsilon: f64,
    pub od: f64,
    pub id: f64,
}

/// Markov-equivalence sensitivity: refit every member of the truth's MEC by
/// maximum likelihood on data sampled from the truth; the perturbation size
/// is the SID normalized by the class maximum. Also measures the disjoint
/// self-distance floors of the truth at the same configuration.
pub struct SensitivityMecOutput {
    pub rows: Vec<SensitivityMecRow>,
    pub floor_od: f64,
    pub floor_id: f64,
    pub report: ExperimentReport,
}

pub fn run_sensitivity_mec(
    truth: &Scm,
    data_size: usize,
    cfg: &DistanceConfig,
    mec_cap: usize,
) -> CliResult<SensitivityMecOutput> {
    let t0 = Instant::now();
    let g = truth.graph();
    let mec = markov_equivalence_class(g, mec_cap)?;
    let sids: Vec<u32> = mec
        .iter()
        .map(|h| sid(h, g))
        .collect::<causal_core::Result<_>>()?;
    let max_sid = sids.iter().copied().max().unwrap_or(0).max(1);
    let data = truth.sample(data_size, mix(cfg.seed, 0, 0x4D45_43, 0));
    let table = DatasetTable::from_samples(g.labels().to_vec(), &data)?;
    let domains: Vec<(String, causal_core::scm::VariableDomain)> = g
        .labels()
        .iter()
        .cloned()
        .zip(truth.domains().iter().cloned())
        .collect();
    let mut rows = Vec::new();
    for (idx, h) in mec.iter().enumerate() {
        let fitted = fit_mle_and_orient(
            &causal_io::GraphOutput::Dag(h.clone()),
            &table,
            &domains,
        )?;
        let o = od(truth, &fitted, cfg)?.value;
        let i = id_parallel(truth, &fitted, cfg)?.value;
        rows.push(SensitivityMecRow {
            member: idx,
            epsilon: sids[idx] as f64 / max_sid as f64,
            od: o,
            id: i,
        });
    }
    // disjoint self-distance floors of the truth at the same config
    let floor_cfg = DistanceConfig {
        seed_mode: SeedMode::Disjoint,
        seed: mix(cfg.seed, 1, 0x4D45_43, 1),
        ..cfg.clone()
    };
    let floor_od = od(truth, truth, &floor_cfg)?.value;
    let floor_id = id_parallel(truth, truth, &floor_cfg)?.value;
    let cells = rows
        .iter()
        .flat_map(|r| {
            [("od", r.od), ("id", r.id)].map(|(name, value)| ExperimentCell {
                key: json!({"distance": name, "member": r.member, "epsilon": r.epsilon}),
                value,
                std: None,
                seed: cfg.seed,
            })
        })
        .collect();
    let report = ExperimentReport {
        experiment: "sensitivity-mec".into(),
        params: json!({
            "data_size": data_size, "k": cfg.k, "l": cfg.l, "seed": cfg.seed,
            "mec_size": mec.len(), "max_sid": max_sid,
            "floor_od": floor_od, "floor_id": floor_id,
        }),
        cells,
        wall_clock_secs: t0.elapsed().as_secs_f64(),
    };
    Ok(SensitivityMecOutput {
        rows,
        floor_od,
        floor_id,
        report,
    })
}

pub fn sensitivity_mec_csv(rows: &[SensitivityMecRow]) -> String {
    let mut out = String::from("member,epsilon,od,id\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.member, r.epsilon, r.od, r.id));
    }
    out
}

pub struct EvalRow {
    pub submission: String,
    pub sid: Option<u32>,
    pub shd: Option<u32>,
    pub id: Option<f64>,
    pub error: Option<String>,
}

/// Scores discovery outputs against a ground-truth model: orient and refit
/// each submitted graph on the training data, then SID, SHD and the
/// interventional distance against the truth. Failures are reported per
/// submission; the rest are still scored.
pub fn run_eval(
    truth: &Scm,
    data_csv: &str,
    submissions: &[(String, String)],
    cfg: &DistanceConfig,
    reversal_cost: u32,
) -> CliResult<(Vec<EvalRow>, ExperimentReport)> {
    let t0 = Instant::now();
    let labels = truth.graph().labels().to_vec();
    let domains: Vec<(String, causal_core::scm::VariableDomain)> = labels
        .iter()
        .cloned()
        .zip(truth.domains().iter().cloned())
        .collect();
    let table = parse_dataset_csv(data_csv, &domains)?;
    let mut rows = Vec::new();
    for (name, text) in submissions {
        let scored = (|| -> CliResult<(u32, u32, f64)> {
            let parsed = parse_graph_output(text, &labels)?;
            let fitted = fit_mle_and_orient(&parsed, &table, &domains)?;
            let s = sid(truth.graph(), fitted.graph())?;
            let h = shd_with_cost(truth.graph(), fitted.graph(), reversal_cost)?;
            let i = id_parallel(truth, &fitted, cfg)?.value;
            Ok((s, h, i))
        })();
        match scored {
            Ok((s, h, i)) => rows.push(EvalRow {
                submission: name.clone(),
                sid: Some(s),
                shd: Some(h),
                id: Some(i),
                error: None,
            }),
            Err(e) => rows.push(EvalRow {
                submission: name.clone(),
                sid: None,
                shd: None,
                id: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let cells = rows
        .iter()
        .filter(|r| r.error.is_none())
        .flat_map(|r| {
            [
                ("sid", r.sid.unwrap() as f64),
                ("shd", r.shd.unwrap() as f64),
                ("id", r.id.unwrap()),
            ]
            .map(|(metric, value)| ExperimentCell {
                key: json!({"submission": r.submission, "metric": metric}),
                value,
                std: None,
                seed: cfg.seed,
            })
        })
        .collect();
    let report = ExperimentReport {
        experiment: "eval".into(),
        params: json!({
            "k": cfg.k, "l": cfg.l, "seed": cfg.seed, "reversal_cost": reversal_cost,
            "submissions": submissions.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        }),
        cells,
        wall_clock_secs: t0.elapsed().as_secs_f64(),
    };
    Ok((rows, report))
}

pub fn eval_table(rows: &[EvalRow]) -> String {
    let mut out = String::from("submission,sid,shd,id,error\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.submission,
            r.sid.map(|v| v.to_string()).unwrap_or_default(),
            r.shd.map(|v| v.to_string()).unwrap_or_default(),
            r.id.map(|v| format!("{v:.6}")).unwrap_or_default(),
            r.error.clone().unwrap_or_default()
        ));
    }
    out
}
