use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use elastic_graphs::graph::{edge_distances, pad, permute, pre_shape_geodesic, total_length_normalize};
use elastic_graphs::inference::{
    classical_mds, covariate_correlation, hotelling_t2, permutation_test, two_sample_t, DistanceMatrix,
    PermutationStatistic, TestReport,
};
use elastic_graphs::io::{
    read_json, read_swc, save_graph, write_json, DistReport, GraphFile, MatchedEdge, MdsTable, MeanSummary,
    Normalization, RunConfig, ScoresTable,
};
use elastic_graphs::matching::register;
use elastic_graphs::statistics::{karcher_mean, principal_path, tangent_pca, variance_explained};
use elastic_graphs::GraphShape;
use nalgebra::DMatrix;
use serde_json::Value;

use super::{Command, Failure, GlobalArgs, Grouping, Space, StatisticArg, TestCommand};

type Metadata = BTreeMap<String, Value>;

/// One loaded input with its display label and metadata.
struct Sample {
    label: String,
    metadata: Metadata,
    graph: GraphShape,
}

fn config(global: &GlobalArgs) -> Result<RunConfig, Failure> {
    let mut config = match &global.config {
        Some(path) => read_json::<RunConfig>(path).map_err(|e| Failure::usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(s) = global.samples {
        config.samples_per_edge = s;
    }
    if let Some(s) = global.solver {
        config.solver = s;
    }
    if let Some(s) = global.seed {
        config.seed = s;
    }
    if let Some(d) = &global.out_dir {
        config.output_dir = d.clone();
    }
    if let Some(n) = global.normalize {
        config.normalization = n.into();
    }
    config
        .validate()
        .map_err(|e| Failure::usage(format!("configuration: {e}")))?;
    Ok(config)
}

fn read_graph_file(path: &Path) -> Result<GraphFile, Failure> {
    let is_swc = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("swc"));
    Ok(if is_swc { read_swc(path)? } else { read_json(path)? })
}

fn load(path: &Path, config: &RunConfig) -> Result<Sample, Failure> {
    let file = read_graph_file(path)?;
    let mut graph = file
        .to_graph(config.samples_per_edge)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    if config.normalization == Normalization::TotalLength {
        graph = total_length_normalize(&graph)?;
    }
    let label = file.text("subject").unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string())
    });
    Ok(Sample {
        label,
        metadata: file.metadata,
        graph,
    })
}

fn load_all(paths: &[PathBuf], config: &RunConfig) -> Result<Vec<Sample>, Failure> {
    paths.iter().map(|p| load(p, config)).collect()
}

fn output_dir(config: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Failure::data(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn emit<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    write_json(path, value)?;
    println!("{}", path.display());
    Ok(())
}

fn emit_graph(path: &Path, g: &GraphShape) -> Result<(), Failure> {
    save_graph(path, g)?;
    println!("{}", path.display());
    Ok(())
}

fn target(out: Option<PathBuf>, config: &RunConfig, default: &str) -> Result<PathBuf, Failure> {
    match out {
        Some(p) => Ok(p),
        None => Ok(output_dir(config)?.join(default)),
    }
}

pub fn run(global: &GlobalArgs, command: Command) -> Result<(), Failure> {
    let config = config(global)?;
    match command {
        Command::Dist { first, second, out } => dist(&config, &first, &second, out),
        Command::Geodesic {
            first,
            second,
            steps,
            space,
        } => geodesic(&config, &first, &second, steps, space),
        Command::Mean { graphs } => mean(&config, &graphs),
        Command::Pca { graphs, components } => pca(&config, &graphs, components),
        Command::Distmat { graphs, order_by } => distmat(&config, &graphs, order_by.as_deref()),
        Command::Mds { distmat, k } => mds(&config, &distmat, k),
        Command::Test { test } => run_test(&config, test),
        Command::IngestSwc { input, out } => {
            let file = read_swc(&input)?;
            emit(&out, &file)
        }
    }
}

fn dist(config: &RunConfig, first: &Path, second: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let a = load(first, config)?;
    let b = load(second, config)?;
    let (p1, p2, result) = register(&a.graph, &b.graph, &config.matching())?;
    let moved = permute(&result.permutation, &p2)?;
    let pair =
        |g: &GraphShape, i: usize, j: usize| g.has_edge(i, j).then(|| [g.labels()[i].clone(), g.labels()[j].clone()]);
    let matched_edges = edge_distances(&p1, &moved)?
        .into_iter()
        .map(|(i, j, distance)| MatchedEdge {
            first: pair(&p1, i, j),
            second: pair(&moved, i, j),
            distance,
        })
        .collect();
    let report = DistReport {
        first: a.label,
        second: b.label,
        distance: result.quotient_distance,
        solver: result.solver,
        permutation: result.permutation.mapping().to_vec(),
        first_labels: p1.labels().to_vec(),
        second_labels: p2.labels().to_vec(),
        matched_edges,
    };
    eprintln!("d_g = {}", report.distance);
    emit(&target(out, config, "dist.json")?, &report)
}

fn geodesic(config: &RunConfig, first: &Path, second: &Path, steps: usize, space: Space) -> Result<(), Failure> {
    if steps < 2 {
        return Err(Failure::usage("--steps must be at least 2"));
    }
    let a = load(first, config)?;
    let b = load(second, config)?;
    let (start, end) = match space {
        Space::Quotient => {
            let (p1, p2, result) = register(&a.graph, &b.graph, &config.matching())?;
            (p1, permute(&result.permutation, &p2)?)
        }
        Space::Preshape => {
            let n = a.graph.node_count().max(b.graph.node_count());
            (
                pad(&a.graph, n - a.graph.node_count()),
                pad(&b.graph, n - b.graph.node_count()),
            )
        }
    };
    let path = pre_shape_geodesic(&start, &end, steps)?;
    let dir = output_dir(config)?;
    for (k, g) in path.steps.iter().enumerate() {
        emit_graph(&dir.join(format!("geodesic_{k:03}.json")), g)?;
    }
    Ok(())
}

fn mean(config: &RunConfig, paths: &[PathBuf]) -> Result<(), Failure> {
    let samples = load_all(paths, config)?;
    let graphs: Vec<GraphShape> = samples.iter().map(|s| s.graph.clone()).collect();
    let result = karcher_mean(&graphs, &config.mean())?;
    let dir = output_dir(config)?;
    emit_graph(&dir.join("mean.json"), &result.mean)?;
    emit_graph(
        &dir.join("mean_display.json"),
        &result.display_mean(config.presence_threshold)?,
    )?;
    for (k, (g, s)) in result.registered.iter().zip(&samples).enumerate() {
        let file = GraphFile::from_graph(g).with_metadata(s.metadata.clone());
        emit(&dir.join(format!("registered_{k:03}.json")), &file)?;
    }
    let summary = MeanSummary {
        inputs: samples.iter().map(|s| s.label.clone()).collect(),
        iterations: result.iterations,
        final_variance: result.final_variance,
        variance_history: result.variance_history.clone(),
        stopped_on_increase: result.stopped_on_increase,
        permutations: result.permutations.iter().map(|p| p.mapping().to_vec()).collect(),
    };
    emit(&dir.join("mean_summary.json"), &summary)
}

fn pca(config: &RunConfig, paths: &[PathBuf], components: usize) -> Result<(), Failure> {
    if components == 0 {
        return Err(Failure::usage("--components must be at least 1"));
    }
    let samples = load_all(paths, config)?;
    let graphs: Vec<GraphShape> = samples.iter().map(|s| s.graph.clone()).collect();
    let model = tangent_pca(&graphs, &config.mean())?;
    let r = components.min(model.scores.ncols());
    let table = ScoresTable {
        labels: samples.iter().map(|s| s.label.clone()).collect(),
        metadata: samples.iter().map(|s| s.metadata.clone()).collect(),
        singular_values: model.singular_values.clone(),
        variance_explained: (1..=model.singular_values.len())
            .map(|k| variance_explained(&model, k))
            .collect(),
        scores: (0..model.scores.nrows())
            .map(|i| (0..r).map(|c| model.scores[(i, c)]).collect())
            .collect(),
    };
    let dir = output_dir(config)?;
    emit(&dir.join("scores.json"), &table)?;
    emit_graph(&dir.join("mean.json"), &model.mean)?;
    for c in 0..r.min(model.rank()) {
        for t in [-2i32, -1, 0, 1, 2] {
            let g = principal_path(&model, c, t as f64)?;
            emit_graph(&dir.join(format!("pc{}_t{t:+}.json", c + 1)), &g)?;
        }
    }
    Ok(())
}

fn distmat(config: &RunConfig, paths: &[PathBuf], order_by: Option<&str>) -> Result<(), Failure> {
    let samples = load_all(paths, config)?;
    let matching = config.matching();
    let labels = samples.iter().map(|s| s.label.clone()).collect();
    let mut d = DistanceMatrix::from_fn(labels, |i, j| {
        register(&samples[i].graph, &samples[j].graph, &matching).map(|(_, _, r)| r.quotient_distance)
    })?
    .with_metadata(samples.iter().map(|s| s.metadata.clone()).collect())?;
    if let Some(key) = order_by {
        let covariate = samples
            .iter()
            .map(|s| {
                s.metadata
                    .get(key)
                    .and_then(Value::as_f64)
                    .ok_or_else(|| Failure::data(format!("{}: no numeric `{key}` in metadata", s.label)))
            })
            .collect::<Result<Vec<f64>, Failure>>()?;
        d = d.with_covariate(covariate)?.ordered_by_covariate()?;
    }
    emit(&output_dir(config)?.join("distmat.json"), &d)
}

fn mds(config: &RunConfig, path: &Path, k: usize) -> Result<(), Failure> {
    let d: DistanceMatrix = read_json(path)?;
    let e = classical_mds(&d, k)?;
    let table = MdsTable {
        labels: d.labels.clone(),
        eigenvalues: e.eigenvalues.clone(),
        coords: (0..e.coords.nrows())
            .map(|i| e.coords.row(i).iter().copied().collect())
            .collect(),
    };
    emit(&output_dir(config)?.join("mds.json"), &table)
}

/// Splits samples in two by a metadata value: numeric values at or above the
/// threshold form the second group, otherwise exactly two distinct values
/// are required and the later one in sort order is the second group.
fn split(metadata: &[Metadata], labels: &[String], grouping: &Grouping) -> Result<Vec<bool>, Failure> {
    let key = &grouping.group_by;
    let values = metadata
        .iter()
        .zip(labels)
        .map(|(m, l)| {
            m.get(key)
                .filter(|v| !v.is_null())
                .ok_or_else(|| Failure::data(format!("{l}: no `{key}` in metadata")))
        })
        .collect::<Result<Vec<&Value>, Failure>>()?;
    if values.iter().all(|v| v.is_number()) {
        return Ok(values
            .iter()
            .map(|v| v.as_f64().is_some_and(|x| x >= grouping.threshold))
            .collect());
    }
    let text: Vec<String> = values
        .iter()
        .map(|v| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string()))
        .collect();
    let mut distinct = text.clone();
    distinct.sort();
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(Failure::data(format!(
            "`{key}` takes {} distinct values; a two-group test needs exactly 2",
            distinct.len()
        )));
    }
    Ok(text.iter().map(|t| *t == distinct[1]).collect())
}

fn scores_table(path: &Path) -> Result<(ScoresTable, usize), Failure> {
    let table: ScoresTable = read_json(path)?;
    if table.metadata.len() != table.labels.len() {
        return Err(Failure::data(format!(
            "{}: scores carry no per-sample metadata",
            path.display()
        )));
    }
    let r = table.scores.first().map_or(0, Vec::len);
    Ok((table, r))
}

fn column(table: &ScoresTable, available: usize, component: usize) -> Result<Vec<f64>, Failure> {
    if component == 0 || component > available {
        return Err(Failure::usage(format!(
            "component {component} requested; the scores have {available}"
        )));
    }
    Ok(table.scores.iter().map(|row| row[component - 1]).collect())
}

fn run_test(config: &RunConfig, test: TestCommand) -> Result<(), Failure> {
    let (report, out, name): (TestReport, Option<PathBuf>, &str) = match test {
        TestCommand::T {
            scores,
            grouping,
            component,
            pooled,
            out,
        } => {
            let (table, r) = scores_table(&scores)?;
            let x = column(&table, r, component)?;
            let groups = split(&table.metadata, &table.labels, &grouping)?;
            let (a, b): (Vec<_>, Vec<_>) = x.iter().zip(&groups).partition(|(_, g)| !**g);
            let a: Vec<f64> = a.into_iter().map(|(v, _)| *v).collect();
            let b: Vec<f64> = b.into_iter().map(|(v, _)| *v).collect();
            (two_sample_t(&a, &b, pooled)?, out, "test_t.json")
        }
        TestCommand::Hotelling {
            scores,
            grouping,
            components,
            out,
        } => {
            let (table, r) = scores_table(&scores)?;
            if components == 0 || components > r {
                return Err(Failure::usage(format!(
                    "{components} components requested; the scores have {r}"
                )));
            }
            let groups = split(&table.metadata, &table.labels, &grouping)?;
            let pick = |want: bool| {
                let rows: Vec<&Vec<f64>> = table
                    .scores
                    .iter()
                    .zip(&groups)
                    .filter(|(_, g)| **g == want)
                    .map(|(s, _)| s)
                    .collect();
                DMatrix::from_fn(rows.len(), components, |i, c| rows[i][c])
            };
            (hotelling_t2(&pick(false), &pick(true))?, out, "test_hotelling.json")
        }
        TestCommand::Corr {
            scores,
            covariate,
            component,
            out,
        } => {
            let (table, r) = scores_table(&scores)?;
            let x = column(&table, r, component)?;
            let y = table
                .metadata
                .iter()
                .zip(&table.labels)
                .map(|(m, l)| {
                    m.get(&covariate)
                        .and_then(Value::as_f64)
                        .ok_or_else(|| Failure::data(format!("{l}: no numeric `{covariate}` in metadata")))
                })
                .collect::<Result<Vec<f64>, Failure>>()?;
            (covariate_correlation(&x, &y)?, out, "test_corr.json")
        }
        TestCommand::Perm {
            distmat,
            grouping,
            n_perm,
            statistic,
            out,
        } => {
            let d: DistanceMatrix = read_json(&distmat)?;
            if d.metadata.len() != d.len() {
                return Err(Failure::data(format!(
                    "{}: distance matrix carries no per-sample metadata",
                    distmat.display()
                )));
            }
            let groups = split(&d.metadata, &d.labels, &grouping)?;
            let kind = match statistic {
                StatisticArg::MeanDifference => PermutationStatistic::MeanDifference,
                StatisticArg::PseudoF => PermutationStatistic::PseudoF,
            };
            let n = n_perm.unwrap_or(config.n_perm);
            (
                permutation_test(&d, &groups, n, config.seed, kind)?,
                out,
                "test_perm.json",
            )
        }
    };
    eprintln!("statistic = {}, p = {}", report.statistic, report.p_value);
    emit(&target(out, config, name)?, &report)
}
