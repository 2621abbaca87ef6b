use std::io::{BufRead, BufReader, Write};

use super::{open_input, open_output, BenchArgs, CliError};
use crate::bench::{run_bench, synthetic_corpus, BenchReport};
use crate::encoder::{PoolingMethod, SentenceMatrix};
use crate::lexicon::{embed_tokens, load_table, tokenize};

fn load_corpus(args: &BenchArgs) -> Result<Vec<SentenceMatrix<f64>>, CliError> {
    let Some(input) = &args.input else {
        if args.dim == 0 || args.min_words == 0 || args.min_words > args.max_words {
            return Err(CliError::Usage(
                "synthetic corpus needs --dim ≥ 1 and 1 ≤ --min-words ≤ --max-words".into(),
            ));
        }
        return Ok(synthetic_corpus(
            args.sentences,
            args.dim,
            args.min_words,
            args.max_words.min(args.max_len),
            args.seed,
        ));
    };
    let vectors = args.vectors.as_ref().expect("clap requires --vectors with --input");
    let table = load_table(vectors, None, args.oov)
        .map_err(|e| CliError::Data(format!("{}: {e}", vectors.display())))?;
    let mut corpus = Vec::new();
    for line in BufReader::new(open_input(input)?).lines() {
        let mut m: SentenceMatrix<f64> = embed_tokens(&table, &tokenize(&line?)).map_err(CliError::data)?;
        m.truncate(args.max_len);
        // AVG is undefined on empty sentences.
        if !m.is_empty() {
            corpus.push(m);
        }
    }
    Ok(corpus)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<BenchReport, CliError> {
    if args.ks.is_empty() || args.ks.contains(&0) {
        return Err(CliError::Usage("--ks must list positive integers".into()));
    }
    if args.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let corpus = load_corpus(args)?;
    if corpus.is_empty() {
        return Err(CliError::Data("corpus is empty".into()));
    }
    let report = run_bench(&corpus, &args.ks, args.reps).map_err(CliError::data)?;

    let mut text = String::from("method\tk\tns_per_sentence\n");
    for row in &report.rows {
        let k = row.method.k().map(|k| k.to_string()).unwrap_or_else(|| "-".into());
        text.push_str(&format!("{}\t{k}\t{:.1}\n", row.method.name(), row.ns_per_sentence));
    }
    let mut out = open_output(args.out.as_deref())?;
    out.write_all(text.as_bytes())?;
    out.flush()?;

    if let Some(fit) = report.dct_fit() {
        eprintln!(
            "dct time ≈ {:.1} + {:.1}·K ns/sentence (R² = {:.4})",
            fit.intercept, fit.slope, fit.r_squared
        );
    }
    if let (Some(avg), Some(k1)) = (
        report.avg_ns(),
        report.rows.iter().find(|r| r.method == PoolingMethod::Dct { k: 1 }),
    ) {
        eprintln!("dct(1) / avg = {:.2}", k1.ns_per_sentence / avg);
    }
    eprintln!(
        "{} sentences, {} repetitions, median reported",
        report.sentences, report.repetitions
    );
    Ok(report)
}
