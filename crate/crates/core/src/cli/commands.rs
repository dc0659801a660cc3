use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{thread_count, DataArgs, EvaluateArgs, ExplainArgs, GenSynthArgs, PredictArgs, TrainArgs, DEFAULT_UNIVERSE};
use crate::data::io::{self, load_dataset, load_fingerprints, load_labels, load_types};
use crate::data::{generate_planted, Dataset};
use crate::error::{Error, Result};
use crate::experiment::{cross_validate, train_full};
use crate::explain::{explain_pair, top_pairs_for_type};
use crate::fsutil::Outputs;
use crate::model::{load_model, write_model, FactorModel, TrainConfig, TrainReport};

pub const GEN_FINGERPRINTS: &str = "fingerprints.tsv";
pub const GEN_TRIPLES: &str = "triples.tsv";
pub const GEN_TYPES: &str = "types.txt";
pub const GEN_CHECKPOINT: &str = "planted.stnn";

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ));
    }
    Ok(())
}

fn load_data(args: &DataArgs) -> Result<Dataset> {
    for p in [&args.fingerprints, &args.triples, &args.types] {
        require_file(p)?;
    }
    let n = match args.n_substructures {
        Some(n) => n,
        None => io::universe_hint(&args.fingerprints)?.unwrap_or(DEFAULT_UNIVERSE),
    };
    load_dataset(&args.fingerprints, &args.triples, &args.types, n)
}

/// Writes `text` to `out`, or to stdout when no path is given.
fn emit(outputs: &mut Outputs, out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => outputs.write(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

#[derive(Serialize)]
struct TrainOutput<'a> {
    config: &'a TrainConfig,
    n: usize,
    drugs: usize,
    types: usize,
    positives: usize,
    #[serde(flatten)]
    report: &'a TrainReport,
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let cfg = args.train.to_config();
    cfg.validate()?;
    let ds = load_data(&args.data)?;
    let (model, report) = train_full(&ds, &cfg)?;
    let mut ckpt = Vec::new();
    write_model(&model, &mut ckpt).map_err(|e| Error::io(&args.checkpoint, e))?;
    let summary = TrainOutput {
        config: &cfg,
        n: ds.n,
        drugs: ds.m(),
        types: ds.f(),
        positives: ds.positives.len(),
        report: &report,
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');

    let mut outputs = Outputs::new();
    outputs.write(&args.checkpoint, &ckpt)?;
    emit(&mut outputs, args.out.as_deref(), &json)?;
    outputs.commit();
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let cfg = args.train.to_config();
    cfg.validate()?;
    let ds = load_data(&args.data)?;
    let report = cross_validate(&ds, args.task, args.folds, &cfg, thread_count())?;
    let mut outputs = Outputs::new();
    emit(&mut outputs, args.out.as_deref(), &report.to_json()?)?;
    outputs.commit();
    Ok(())
}

fn load_checked_model(checkpoint: &Path, types: &[String]) -> Result<FactorModel> {
    let model = load_model(checkpoint)?;
    if types.len() != model.f() {
        return Err(Error::Dimension {
            context: "interaction types in vocabulary vs checkpoint",
            expected: model.f(),
            found: types.len(),
        });
    }
    Ok(model)
}

fn type_index(types: &[String], id: &str) -> Result<usize> {
    types
        .iter()
        .position(|t| t == id)
        .ok_or_else(|| Error::Argument(format!("unknown type identifier `{id}`")))
}

fn drug_index(ids: &[String], id: &str) -> Result<usize> {
    ids.iter()
        .position(|d| d == id)
        .ok_or_else(|| Error::Argument(format!("drug `{id}` has no fingerprint")))
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let types = load_types(&args.types)?;
    let model = load_checked_model(&args.checkpoint, &types)?;
    let fps = load_fingerprints(&args.fingerprints, model.n())?;
    let fp_a = &fps.fingerprints[drug_index(&fps.drug_ids, &args.drug_a)?];
    let fp_b = &fps.fingerprints[drug_index(&fps.drug_ids, &args.drug_b)?];

    let mut rows: Vec<(usize, f64)> = match &args.type_id {
        Some(t) => {
            let k = type_index(&types, t)?;
            vec![(k, model.score(fp_a, fp_b, k)?)]
        }
        None => model.score_all_types(fp_a, fp_b)?.into_iter().enumerate().collect(),
    };
    rows.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut text = String::new();
    for (k, s) in rows {
        let _ = writeln!(text, "{}\t{}\t{}\t{}", args.drug_a, args.drug_b, types[k], s);
    }
    let mut outputs = Outputs::new();
    emit(&mut outputs, args.out.as_deref(), &text)?;
    outputs.commit();
    Ok(())
}

pub fn explain(args: &ExplainArgs) -> Result<()> {
    let types = load_types(&args.types)?;
    let model = load_checked_model(&args.checkpoint, &types)?;
    let k = type_index(&types, &args.type_id)?;
    let mut explanation = match (&args.drug_a, &args.drug_b) {
        (Some(a), Some(b)) => {
            let path = args
                .fingerprints
                .as_ref()
                .ok_or_else(|| Error::Argument("drug-pair mode needs --fingerprints".into()))?;
            let fps = load_fingerprints(path, model.n())?;
            let fp_a = &fps.fingerprints[drug_index(&fps.drug_ids, a)?];
            let fp_b = &fps.fingerprints[drug_index(&fps.drug_ids, b)?];
            let mut e = explain_pair(&model, fp_a, fp_b, k, args.top_k, args.bottom_k)?;
            e.context.drug_a = Some(a.clone());
            e.context.drug_b = Some(b.clone());
            e
        }
        _ => top_pairs_for_type(&model, k, args.top_k, args.bottom_k, None)?,
    };
    explanation.context.type_id = Some(args.type_id.clone());
    if let Some(path) = &args.labels {
        explanation = explanation.with_labels(&load_labels(path)?);
    }
    let mut outputs = Outputs::new();
    emit(&mut outputs, args.out.as_deref(), &explanation.to_json()?)?;
    outputs.commit();
    Ok(())
}

pub fn gen_synth(args: &GenSynthArgs) -> Result<()> {
    let (ds, model) = generate_planted(args.n, args.m, args.f, args.rank, args.density, args.seed)?;
    fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let mut ckpt = Vec::new();
    write_model(&model, &mut ckpt).map_err(|e| Error::io(&args.out, e))?;
    let mut outputs = Outputs::new();
    outputs.write(&args.out.join(GEN_FINGERPRINTS), io::format_fingerprints(&ds).as_bytes())?;
    outputs.write(&args.out.join(GEN_TRIPLES), io::format_triples(&ds).as_bytes())?;
    outputs.write(&args.out.join(GEN_TYPES), io::format_types(&ds).as_bytes())?;
    outputs.write(&args.out.join(GEN_CHECKPOINT), &ckpt)?;
    outputs.commit();
    Ok(())
}
