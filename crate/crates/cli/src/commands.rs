use crate::args::*;
use crate::format::{human, machine, matrix_csv, table};
use crate::settings::Settings;
use crate::CliError;
use mpreg::aggregation::{aggregate_lfs, AggregatedModel};
use mpreg::data::{
    gen_synthetic, load_csv, load_matrix_csv, preprocess_nslkdd, read_raw_rows, CsvOptions, Dataset, FoldScheme, LabelColumn, Points,
    SyntheticTarget,
};
use mpreg::eval::{
    confusion_from_scores, error_rate, mean_squared_error, metrics, rate_experiment, ratio_to_f64, run_cv, CvConfig, CvProtocol,
    RateSettings,
};
use mpreg::graph::GraphSpec;
use mpreg::kernels::{KernelSpec, MultiViewKernel};
use mpreg::modelsel::{diagnose, grid_search, recommend_subsample_size, write_cv_table, GridSpec, Task};
use mpreg::multiview::{
    fit_multiview, fit_multiview_alternating, per_view_laplacians, CombinationWeights, LevelSpec, MultiViewConfig,
};
use mpreg::solver::model_io::{model_to_string, read_model, SavedModel};
use mpreg::solver::{fit_nystrom, select_landmarks, FitSpec, FullModel, LandmarkSelection, LaplacianScaling, NystromModel};
use nalgebra::DMatrix;
use num_rational::Ratio;
use std::fmt::Write as _;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

const DEFAULT_KERNEL: &str = "gaussian:0.04";
const DEFAULT_LAMBDA0: f64 = 1e-8;
const DEFAULT_LAMBDA1: f64 = 1.0;
const DEFAULT_GRAPH_B: f64 = 1e-3;
const DEFAULT_GAMMA_GRID: &str = "1e-4,1e-3,1e-2,1e-1,1";
const DEFAULT_RATE_SIZES: &str = "100,200,400,800,1600";

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Cv(a) => cv(a),
        Command::Grid(a) => grid(a),
        Command::Aggregate(a) => aggregate(a),
        Command::Diagnose(a) => diagnose_cmd(a),
        Command::Rate(a) => rate(a),
        Command::GenSynthetic(a) => synthetic(a),
        Command::PreprocessNslkdd(a) => nslkdd(a),
        Command::Multiview(a) => multiview(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Data(e.to_string()))
        }
    }
}

fn settings(common: &Common) -> Result<Settings, CliError> {
    Settings::load(common.config.as_deref())
}

fn seed(s: &Settings, common: &Common) -> Result<u64, CliError> {
    s.get(common.seed.as_deref(), "seed", 0)
}

fn label_column(text: &str) -> Result<LabelColumn, CliError> {
    match text {
        "last" => Ok(LabelColumn::Last),
        "none" => Ok(LabelColumn::None),
        other => other
            .parse()
            .map(LabelColumn::Index)
            .map_err(|_| CliError::Usage(format!("--label-col must be last, none or an index, got {other:?}"))),
    }
}

fn csv_options(s: &Settings, a: &DataArgs) -> Result<CsvOptions, CliError> {
    Ok(CsvOptions {
        has_header: s.switch(a.header, "header")?,
        label: label_column(&s.get(a.label_col.as_deref(), "label-col", "last".to_string())?)?,
        one_hot: s.switch(a.one_hot, "one-hot")?,
        labeled_count: s.opt(a.labeled.as_deref(), "labeled")?,
    })
}

fn load_data(s: &Settings, a: &DataArgs) -> Result<Dataset, CliError> {
    let path: PathBuf = s.require(a.data.as_deref(), "data")?;
    Ok(load_csv(path, &csv_options(s, a)?)?)
}

/// A kernel spec; `precomputed:<csv>` loads the matrix from disk.
fn parse_kernel(text: &str) -> Result<KernelSpec, CliError> {
    match text.strip_prefix("precomputed:") {
        Some(path) => Ok(KernelSpec::precomputed(load_matrix_csv(path)?)?),
        None => Ok(text.parse()?),
    }
}

/// Data and kernel for a fit. With a precomputed kernel each point becomes
/// its row index and the feature columns are ignored.
fn load_problem(s: &Settings, data: &DataArgs, kernel: Option<&str>) -> Result<(Dataset, KernelSpec), CliError> {
    let kernel = parse_kernel(&s.get(kernel, "kernel", DEFAULT_KERNEL.to_string())?)?;
    let mut dataset = load_data(s, data)?;
    if kernel.is_precomputed() {
        dataset = Dataset::indexed(dataset.len(), 1, dataset.labels().clone())?;
    }
    Ok((dataset, kernel))
}

fn fit_spec(s: &Settings, a: &RegArgs, kernel: KernelSpec) -> Result<FitSpec, CliError> {
    let mut spec = FitSpec::new(kernel, s.get(a.lambda0.as_deref(), "lambda0", DEFAULT_LAMBDA0)?);
    spec.scaling = s.get(a.scaling.as_deref(), "scaling", LaplacianScaling::default())?;
    if !s.switch(a.no_graph, "no-graph")? {
        let graph = GraphSpec {
            b: s.get(a.graph_b.as_deref(), "graph-b", DEFAULT_GRAPH_B)?,
            knn: s.opt(a.knn.as_deref(), "knn")?,
        };
        spec = spec.with_graph(s.get(a.lambda1.as_deref(), "lambda1", DEFAULT_LAMBDA1)?, graph);
    }
    Ok(spec)
}

fn landmark_selection(mode: &str, size: usize, seed: u64) -> Result<LandmarkSelection, CliError> {
    match mode {
        "uniform" => Ok(LandmarkSelection::Uniform { size, seed }),
        "first" => Ok(LandmarkSelection::FirstS(size)),
        other => Err(CliError::Usage(format!("--landmark-mode must be uniform or first, got {other:?}"))),
    }
}

/// Landmark sets for each requested size; size `r` draws with `seed + r`.
fn landmark_sets(s: &Settings, a: &LandmarkArgs, n: usize, seed: u64) -> Result<Vec<Vec<usize>>, CliError> {
    let sizes: Vec<usize> = s.list(a.landmarks.as_deref(), "landmarks")?;
    let mode: String = s.get(a.landmark_mode.as_deref(), "landmark-mode", "uniform".to_string())?;
    sizes
        .iter()
        .enumerate()
        .map(|(r, &size)| Ok(select_landmarks(n, landmark_selection(&mode, size, seed.wrapping_add(r as u64))?)?))
        .collect()
}

fn full_as_nystrom(full: FullModel) -> NystromModel {
    NystromModel {
        landmark_indices: (0..full.points.len()).collect(),
        landmark_points: full.points,
        coefficients: full.coefficients,
        kernel: full.kernel,
        regularization: full.regularization,
    }
}

fn fit(a: FitArgs) -> Result<(), CliError> {
    let s = settings(&a.common)?;
    let seed = seed(&s, &a.common)?;
    let (data, kernel) = load_problem(&s, &a.data, a.reg.kernel.as_deref())?;
    let spec = fit_spec(&s, &a.reg, kernel)?;
    let config = spec.config(&data)?;
    let sets = landmark_sets(&s, &a.landmarks, data.len(), seed)?;
    let model = match sets.len() {
        0 => SavedModel::Nystrom(full_as_nystrom(FullModel::fit(&data, &spec.kernel, &config)?)),
        1 => SavedModel::Nystrom(fit_nystrom(&data, &sets[0], &spec.kernel, &config)?),
        _ => {
            let members = sets
                .iter()
                .map(|l| fit_nystrom(&data, l, &spec.kernel, &config))
                .collect::<mpreg::Result<Vec<_>>>()?;
            SavedModel::Aggregate(aggregate_lfs(members, &data)?)
        }
    };
    emit(a.common.out.as_deref(), &model_to_string(&model))
}

fn load_model(s: &Settings, path: Option<&str>, kernel: Option<&str>) -> Result<SavedModel, CliError> {
    let path: PathBuf = s.require(path, "model")?;
    let file = std::fs::File::open(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut model = read_model(BufReader::new(file))?;
    if let Some(k) = kernel {
        let k = parse_kernel(k)?;
        if !k.is_precomputed() {
            return Err(CliError::Usage("--kernel here only supplies a precomputed kernel matrix".into()));
        }
        model.set_kernel(k);
    }
    Ok(model)
}

fn predict(a: PredictArgs) -> Result<(), CliError> {
    let s = settings(&a.common)?;
    let model = load_model(&s, a.model.as_deref(), a.kernel.as_deref())?;
    let path: PathBuf = s.require(a.data.as_deref(), "data")?;
    let options = CsvOptions {
        has_header: s.switch(a.header, "header")?,
        label: label_column(&s.get(a.label_col.as_deref(), "label-col", "none".to_string())?)?,
        one_hot: false,
        labeled_count: None,
    };
    let query = load_csv(path, &options)?;
    let scores = model.predict(query.points())?;
    emit(a.common.out.as_deref(), &matrix_csv("prediction", &scores))
}

fn ratio_text(r: Option<Ratio<u64>>) -> (String, String, String) {
    match r {
        Some(r) => (machine(ratio_to_f64(r)), human(ratio_to_f64(r)), format!("{}/{}", r.numer(), r.denom())),
        None => ("undefined".into(), "undefined".into(), "undefined".into()),
    }
}

fn evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let s = settings(&a.common)?;
    let model = load_model(&s, a.model.as_deref(), a.kernel.as_deref())?;
    let data = load_data(&s, &a.data)?;
    let m = data.labeled();
    if m == 0 {
        return Err(mpreg::Error::NoLabels.into());
    }
    let labeled: Vec<usize> = (0..m).collect();
    let scores = model.predict(&data.points().select(&labeled)?)?;
    let human_out = s.switch(a.human, "human")?;
    let mut rows: Vec<(String, String, String, String)> = Vec::new();
    let binary = data.labels().iter().all(|&y| y == 1.0 || y == -1.0);
    if data.outputs() == 1 && binary {
        let cm = confusion_from_scores(scores.as_slice(), data.labels().as_slice())?;
        for (name, v) in [("tp", cm.tp), ("fn", cm.fn_), ("fp", cm.fp), ("tn", cm.tn)] {
            rows.push((name.into(), v.to_string(), v.to_string(), v.to_string()));
        }
        let mt = metrics(&cm);
        for (name, r) in [
            ("accuracy", mt.accuracy),
            ("precision", mt.precision),
            ("sensitivity", mt.sensitivity),
            ("specificity", mt.specificity),
            ("f_measure", mt.f_measure),
        ] {
            let (mv, hv, exact) = ratio_text(r);
            rows.push((name.into(), mv, hv, exact));
        }
    } else if data.outputs() > 1 {
        let err = error_rate(&scores, data.labels())?;
        rows.push(("accuracy".into(), machine(1.0 - err), human(1.0 - err), String::new()));
    }
    let mse = mean_squared_error(&scores, data.labels())?;
    rows.push(("mse".into(), machine(mse), human(mse), String::new()));
    let text = if human_out {
        let body: Vec<Vec<String>> = rows.into_iter().map(|(n, _, h, e)| vec![n, h, e]).collect();
        table(&["metric", "value", "exact"], &body)
    } else {
        let mut t = String::from("metric,value,exact\n");
        for (n, v, _, e) in rows {
            let _ = writeln!(t, "{n},{v},{e}");
        }
        t
    };
    emit(a.common.out.as_deref(), &text)
}

fn cv(a: CvArgs) -> Result<(), CliError> {
    let s = settings(&a.common)?;
    let seed = seed(&s, &a.common)?;
    let (data, kernel) = load_problem(&s, &a.data, a.reg.kernel.as_deref())?;
    let spec = fit_spec(&s, &a.reg, kernel)?;
    let k: usize = s.get(a.folds.as_deref(), "folds", 10)?;
    let protocol = match s.get(a.protocol.as_deref(), "protocol", "paper".to_string())?.as_str() {
        "paper" | "paper_sequential" => CvProtocol::PaperSequential { k },
        "kfold" => CvProtocol::KFold {
            k,
            scheme: if s.switch(a.shuffle, "shuffle")? {
                FoldScheme::Shuffled(seed)
            } else {
                FoldScheme::PaperSequential
            },
        },
        other => return Err(CliError::Usage(format!("--protocol must be paper or kfold, got {other:?}"))),
    };
    let config = CvConfig {
        spec,
        protocol,
        subsample_sizes: s.list(a.landmarks.landmarks.as_deref(), "landmarks")?,
        redraws: s.get(a.redraws.as_deref(), "redraws", 1)?,
        seed,
        include_full: s.switch(a.full, "full")?,
        aggregate: s.switch(a.aggregate, "aggregate")?,
    };
    let result = run_cv(&data, &config)?;
    let mut buf = Vec::new();
    if s.switch(a.long, "long")? {
        result.write_long(&mut buf)?;
    } else {
        result.write_wide(&mut buf)?;
    }
    emit(a.common.out.as_deref(), &String::from_utf8_lossy(&buf))
}

fn grid(a: GridArgs) -> Result<(), CliError> {
    let s = settings(&a.common)?;
    let (data, kernel) = load_problem(&s, &a.data, a.reg.kernel.as_deref())?;
    let spec = fit_spec(&s, &a.reg, kernel)?;
    let task = match s.get(a.task.as_deref(), "task", "classification".to_string())?.as_str() {
        "classification" => Task::Classification,
        "regression" => Task::Regression,
        other => return Err(CliError::Usage(format!("--task must be classification or regression, got {other:?}"))),
    };
    let grid = GridSpec {
        lambda0: s.list_or(a.lambda0_grid.as_deref(), "lambda0-grid", "1e-8,1e-6,1e-4,1e-2")?,
        lambda1: s.list_or(a.lambda1_grid.as_deref(), "lambda1-grid", "0,1e-2,1")?,
        folds: s.get(a.folds.as_deref(), "folds", 5)?,
        seed: seed(&s, &a.common)?,
        landmarks: s.opt(a.landmarks.as_deref(), "landmarks")?,
        task,
    };
    let result = grid_search(&data, &spec, &grid)?;
    let mut buf = Vec::new();
    write_cv_table(&result.table, &mut buf)?;
    let mut text = String::from_utf8_lossy(&buf).into_owned();
    let _ = writeln!(
        text,
        "# best lambda0={} lambda1={} mean_metric={}",
        machine(result.lambda0),
        machine(result.lambda1),
        machine(result.mean_metric)
    );
    emit(a.common.out.as_deref(), &text)
}

fn aggregate(a: AggregateArgs) -> Result<(), CliError> {
    let s = settings(&a.common)?;
    let paths: Vec<String> = s.list(a.models.as_deref(), "models")?;
    if paths.is_empty() {
        return Err(CliError::Usage("missing --models".into()));
    }
    let mut members = Vec::new();
    for p in &paths {
        match load_model(&s, Some(p), a.kernel.as_deref())? {
            SavedModel::Nystrom(m) => members.push(m),
            SavedModel::Aggregate(agg) => members.extend(agg.members),
        }
    }
    let mut data = load_data(&s, &a.data)?;
    if members[0].kernel.is_precomputed() {
        data = Dataset::indexed(data.len(), 1, data.labels().clone())?;
    }
    let agg: AggregatedModel = aggregate_lfs(members, &data)?;
    emit(a.common.out.as_deref(), &model_to_string(&SavedModel::Aggregate(agg)))
}

fn diagnose_cmd(a: DiagnoseArgs) -> Result<(), CliError> {
    let s = settings(&a.common)?;
    let seed = seed(&s, &a.common)?;
    let (data, kernel) = load_problem(&s, &a.data, a.kernel.as_deref())?;
    let gammas: Vec<f64> = s.list_or(a.gamma_grid.as_deref(), "gamma-grid", DEFAULT_GAMMA_GRID)?;
    let eta: f64 = s.get(a.eta.as_deref(), "eta", 0.1)?;
    let landmarks = match s.opt::<usize>(a.landmarks.as_deref(), "landmarks")? {
        Some(size) => {
            let mode: String = s.get(a.landmark_mode.as_deref(), "landmark-mode", "uniform".to_string())?;
            Some(select_landmarks(data.len(), landmark_selection(&mode, size, seed)?)?)
        }
        None => None,
    };
    let header = [
        "gamma",
        "effective_dimension",
        "max_leverage",
        "n_infinity",
        "nystrom_gap_sq",
        "kappa_sq",
        "sample_condition",
        "recommended_s",
    ];
    let human_out = s.switch(a.human, "human")?;
    let fmt = |v: f64| if human_out { human(v) } else { machine(v) };
    let mut rows = Vec::new();
    for &g in &gammas {
        let r = diagnose(&kernel, &data, g, landmarks.as_deref(), eta)?;
        let max_lev = r.leverages.max();
        let n_inf = data.len() as f64 * max_lev;
        let recommended = recommend_subsample_size(g.min(1.0), eta, r.kappa_sq, n_inf)
            .map(|v| v.to_string())
            .unwrap_or_else(|_| "n/a".into());
        rows.push(vec![
            fmt(g),
            fmt(r.effective_dimension),
            fmt(max_lev),
            fmt(n_inf),
            r.nystrom_gap_sq.map_or_else(|| "n/a".into(), fmt),
            fmt(r.kappa_sq),
            r.sample_condition_ok.to_string(),
            recommended,
        ]);
    }
    let text = if human_out {
        table(&header, &rows)
    } else {
        let mut t = header.join(",") + "\n";
        for r in rows {
            t.push_str(&r.join(","));
            t.push('\n');
        }
        t
    };
    emit(a.common.out.as_deref(), &text)
}

fn target(s: &Settings, a: &TargetArgs, seed: u64) -> Result<SyntheticTarget, CliError> {
    let kernel = parse_kernel(&s.get(a.kernel.as_deref(), "kernel", "gaussian:1".to_string())?)?;
    Ok(SyntheticTarget::random(
        s.get(a.anchors.as_deref(), "anchors", 8)?,
        s.get(a.dim.as_deref(), "dim", 1)?,
        kernel,
        s.get(a.noise.as_deref(), "noise", 0.1)?,
        seed,
    )?)
}

fn rate(a: RateArgs) -> Result<(), CliError> {
    let s = settings(&a.common)?;
    let seed = seed(&s, &a.common)?;
    let target = target(&s, &a.target, seed)?;
    let mut settings = RateSettings::new(
        s.get(a.r.as_deref(), "r", 0.5)?,
        s.list_or(a.sizes.as_deref(), "sizes", DEFAULT_RATE_SIZES)?,
        s.get(a.trials.as_deref(), "trials", 5)?,
        seed.wrapping_add(1),
    );
    settings.b = s.opt(a.b.as_deref(), "b")?;
    settings.test_points = s.get(a.test_points.as_deref(), "test-points", settings.test_points)?;
    settings.graph = s.opt::<f64>(a.graph_b.as_deref(), "graph-b")?.map(GraphSpec::new);
    settings.scaling = s.get(a.scaling.as_deref(), "scaling", settings.scaling)?;
    let report = rate_experiment(&target, &settings)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    emit(a.common.out.as_deref(), &String::from_utf8_lossy(&buf))
}

fn synthetic(a: SyntheticArgs) -> Result<(), CliError> {
    let s = settings(&a.common)?;
    let seed = seed(&s, &a.common)?;
    let target = target(&s, &a.target, seed)?;
    let n: usize = s.get(a.points.as_deref(), "points", 200)?;
    let m: usize = s.get(a.labeled.as_deref(), "labeled", n)?;
    let sample = gen_synthetic(&target, m, n, seed.wrapping_add(1))?;
    let mut text = String::new();
    let labels = sample.dataset.labels();
    for (i, row) in sample.dataset.points().rows().enumerate() {
        let mut cells: Vec<String> = row.iter().map(|&v| machine(v)).collect();
        cells.push(if i < m { machine(labels[(i, 0)]) } else { String::new() });
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    if let Some(p) = s.opt::<PathBuf>(a.truth_out.as_ref().and_then(|p| p.to_str()), "truth-out")? {
        let truth = DMatrix::from_column_slice(n, 1, &sample.truth);
        emit(Some(&p), &matrix_csv("truth", &truth))?;
    }
    emit(a.common.out.as_deref(), &text)
}

fn nslkdd(a: NslKddArgs) -> Result<(), CliError> {
    let s = settings(&a.common)?;
    let input: PathBuf = s.require(a.input.as_deref(), "input")?;
    let rows = read_raw_rows(input, s.opt(a.limit.as_deref(), "limit")?)?;
    let fit_rows: usize = s.get(a.fit_rows.as_deref(), "fit-rows", rows.len())?;
    let pre = preprocess_nslkdd(&rows, fit_rows)?;
    let mut text = String::new();
    let labels = pre.dataset.labels();
    for (i, row) in pre.dataset.points().rows().enumerate() {
        let cells: Vec<String> = row.iter().map(|&v| machine(v)).collect();
        let _ = writeln!(text, "{},{}", cells.join(","), labels[(i, 0)]);
    }
    if let Some(p) = s.opt::<PathBuf>(a.encoding_out.as_ref().and_then(|p| p.to_str()), "encoding-out")? {
        emit(Some(&p), &pre.encoder.encoding_map())?;
    }
    emit(a.common.out.as_deref(), &text)
}

fn view_kernel(s: &Settings, a: &MultiviewArgs, dim: usize) -> Result<MultiViewKernel, CliError> {
    let kernels: Vec<String> = s.list_or(a.kernels.as_deref(), "kernels", "chi2:1")?;
    let kernels = kernels.iter().map(|k| parse_kernel(k)).collect::<Result<Vec<_>, _>>()?;
    let precomputed = kernels.iter().filter(|k| k.is_precomputed()).count();
    if precomputed > 0 {
        if precomputed != kernels.len() {
            return Err(CliError::Usage("precomputed kernels cannot be mixed with closed-form ones".into()));
        }
        let v = kernels.len();
        return Ok(MultiViewKernel::new(kernels, (0..v).map(|i| i..i + 1).collect())?);
    }
    let dims: Vec<usize> = s.list(a.view_dims.as_deref(), "view-dims")?;
    if dims.is_empty() {
        return Ok(MultiViewKernel::single(kernels[0].clone(), dim)?);
    }
    let kernels = match kernels.len() {
        1 => vec![kernels[0].clone(); dims.len()],
        k if k == dims.len() => kernels,
        k => return Err(CliError::Usage(format!("{k} kernels for {} views", dims.len()))),
    };
    let mut slices = Vec::new();
    let mut start = 0;
    for d in dims {
        slices.push(start..start + d);
        start += d;
    }
    Ok(MultiViewKernel::new(kernels, slices)?)
}

/// Rereads a dataset in index form when the kernels are precomputed.
fn as_view_points(data: Dataset, kernel: &MultiViewKernel) -> Result<Dataset, CliError> {
    if kernel.views()[0].is_precomputed() {
        Ok(Dataset::indexed(data.len(), kernel.view_count(), data.labels().clone())?)
    } else {
        Ok(data)
    }
}

fn multiview(a: MultiviewArgs) -> Result<(), CliError> {
    let s = settings(&a.common)?;
    let seed = seed(&s, &a.common)?;
    let raw = load_data(&s, &a.data)?;
    let kernel = view_kernel(&s, &a, raw.points().dim())?;
    let data = as_view_points(raw, &kernel)?;
    let config = MultiViewConfig {
        lambda_a: s.get(a.lambda_a.as_deref(), "lambda-a", 1e-5)?,
        lambda_b: s.get(a.lambda_b.as_deref(), "lambda-b", 1e-6)?,
        lambda_w: s.get(a.lambda_w.as_deref(), "lambda-w", 1e-6)?,
    };
    let graph = if config.lambda_w > 0.0 {
        if kernel.views()[0].is_precomputed() {
            return Err(CliError::Usage("the within-view graph needs feature views; set --lambda-w 0".into()));
        }
        let b = s.get(a.graph_b.as_deref(), "graph-b", DEFAULT_GRAPH_B)?;
        Some(per_view_laplacians(&data, &kernel, GraphSpec::new(b))?)
    } else {
        None
    };
    let sets = landmark_sets(&s, &a.landmarks, data.len(), seed)?;
    let levels: Vec<LevelSpec> = if sets.is_empty() {
        vec![LevelSpec {
            kernel: kernel.clone(),
            landmarks: None,
        }]
    } else {
        sets.into_iter()
            .map(|l| LevelSpec {
                kernel: kernel.clone(),
                landmarks: Some(l),
            })
            .collect()
    };
    let alpha: f64 = s.get(a.alpha.as_deref(), "alpha", 1.0)?;
    let model = if s.switch(a.optimize, "optimize")? {
        let validation = match s.opt::<PathBuf>(a.validation.as_deref(), "validation")? {
            Some(p) => {
                let mut opts = csv_options(&s, &a.data)?;
                opts.labeled_count = None;
                as_view_points(load_csv(p, &opts)?, &kernel)?
            }
            None => {
                let labeled: Vec<usize> = (0..data.labeled()).collect();
                data.select(&labeled, labeled.len())?
            }
        };
        let rounds = s.get(a.rounds.as_deref(), "rounds", 3)?;
        fit_multiview_alternating(&data, &validation, &levels, &config, graph.as_deref(), alpha, rounds, seed)?
    } else {
        let weights = CombinationWeights::uniform(kernel.view_count(), alpha)?;
        fit_multiview(&data, &levels, &weights, &config, graph.as_deref())?
    };
    let query = match s.opt::<PathBuf>(a.query.as_deref(), "query")? {
        Some(p) => {
            let opts = CsvOptions {
                has_header: s.switch(a.data.header, "header")?,
                label: LabelColumn::None,
                one_hot: false,
                labeled_count: None,
            };
            let q = load_csv(p, &opts)?;
            if kernel.views()[0].is_precomputed() {
                let idx: Vec<f64> = q.points().rows().flat_map(|r| std::iter::repeat_n(r[0], kernel.view_count())).collect();
                Points::new(idx, kernel.view_count())?
            } else {
                q.points().clone()
            }
        }
        None => data.points().clone(),
    };
    let scores = model.scores(&query)?;
    let classes = model.classify(&query)?;
    let weights: Vec<String> = model.weights.as_vector().iter().map(|&c| machine(c)).collect();
    let mut text = format!("# weights {}\n", weights.join(","));
    if let Some(lfs) = &model.lfs {
        let cbar: Vec<String> = lfs.cbar.iter().map(|&c| machine(c)).collect();
        let _ = writeln!(text, "# level_weights {}", cbar.join(","));
    }
    let header: Vec<String> = (1..=scores.ncols()).map(|j| format!("score{j}")).collect();
    let _ = writeln!(text, "class,{}", header.join(","));
    for (i, c) in classes.iter().enumerate() {
        let row: Vec<String> = scores.row(i).iter().map(|&v| machine(v)).collect();
        let _ = writeln!(text, "{c},{}", row.join(","));
    }
    emit(a.common.out.as_deref(), &text)
}
