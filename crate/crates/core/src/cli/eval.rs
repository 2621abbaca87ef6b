use std::io::{BufReader, Write};

use super::encode::build_encoder;
use super::{open_input, open_output, CliError, EvalArgs};
use crate::lexicon::{load_table, WordEmbeddingTable};
use crate::probe::synthetic::synthetic_table;
use crate::probe::{dataset_features, grid_search, ClassifierConfig, GridOutcome, ProbingDataset};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub task: String,
    pub method: String,
    pub k: Option<usize>,
    pub outcome: GridOutcome,
}

impl EvalReport {
    pub const HEADER: &'static str = "task\tmethod\tk\thidden_size\tdropout\tdev_acc\ttest_acc";

    pub fn row(&self) -> String {
        let k = self.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
        format!(
            "{}\t{}\t{}\t{}\t{}\t{:.4}\t{:.4}",
            self.task,
            self.method,
            k,
            self.outcome.config.hidden_size,
            self.outcome.config.dropout,
            self.outcome.dev_accuracy,
            self.outcome.test_accuracy
        )
    }
}

fn grid(args: &EvalArgs) -> Result<Vec<ClassifierConfig>, CliError> {
    let base = ClassifierConfig {
        learning_rate: args.learning_rate,
        epochs: args.epochs,
        batch_size: args.batch_size,
        seed: args.seed,
        ..Default::default()
    };
    let configs = match args.grid.as_str() {
        "full" => base.full_grid(),
        "small" => base.grid(&[0, 50], &[0.0, 0.1]),
        other => return Err(CliError::Usage(format!("unknown grid {other:?} (full or small)"))),
    };
    configs
        .first()
        .expect("non-empty grid")
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(configs)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport, CliError> {
    let method = args.pooling.method()?;
    let configs = grid(args)?;
    let dataset = ProbingDataset::read_tsv(BufReader::new(open_input(&args.input)?), args.task)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.input.display())))?;
    let table: WordEmbeddingTable = match &args.vectors {
        Some(path) => load_table(path, None, args.oov)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
        None => {
            if args.dim == 0 {
                return Err(CliError::Usage("--dim must be at least 1".into()));
            }
            let mut t = synthetic_table(dataset.vocabulary(), args.dim, args.seed);
            t.set_oov_policy(args.oov);
            t
        }
    };
    let encoder = build_encoder(method, &table, args.pooling.max_len)?;
    let (features, empty) = dataset_features(&encoder, &table, &dataset).map_err(CliError::data)?;
    if empty > 0 {
        log::warn!("{empty} sentences had no in-vocabulary words; using zero features");
    }
    let outcome = grid_search(&configs, &dataset, &features).map_err(CliError::data)?;
    let report = EvalReport {
        task: args
            .task
            .map(|t| t.to_string())
            .unwrap_or_else(|| "unknown".into()),
        method: method.name().into(),
        k: method.k(),
        outcome,
    };
    let text = format!("{}\n{}\n", EvalReport::HEADER, report.row());
    let mut stdout = open_output(None)?;
    stdout.write_all(text.as_bytes())?;
    stdout.flush()?;
    if let Some(path) = &args.out {
        let mut f = open_output(Some(path))?;
        f.write_all(text.as_bytes())?;
        f.flush()?;
    }
    Ok(report)
}
