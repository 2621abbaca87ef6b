use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{CliError, GenArgs};
use crate::probe::{
    gen_bshift, gen_sentlen, gen_wc, BShiftParams, ProbingDataset, SentLenParams, Task, WcParams,
};

#[derive(Serialize)]
#[serde(untagged)]
enum Params {
    SentLen(SentLenParams),
    Wc(WcParams),
    BShift(BShiftParams),
}

#[derive(Serialize)]
struct Manifest<'a> {
    task: Task,
    seed: u64,
    params: &'a Params,
    examples: usize,
    label_count: usize,
    columns: [&'static str; 3],
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Parse `1-4,5-8` into `[(1, 4), (5, 8)]`.
pub(crate) fn parse_buckets(text: &str) -> Result<Vec<(usize, usize)>, CliError> {
    text.split(',')
        .map(|part| {
            let (lo, hi) = part
                .trim()
                .split_once('-')
                .ok_or_else(|| CliError::Usage(format!("bad bucket {part:?}, expected MIN-MAX")))?;
            let num = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad bucket bound {s:?}")))
            };
            Ok((num(lo)?, num(hi)?))
        })
        .collect()
}

fn generate(args: &GenArgs) -> Result<(Params, ProbingDataset), CliError> {
    let usage = |e: crate::probe::ProbeError| CliError::Usage(e.to_string());
    Ok(match args.task {
        Task::SentLen => {
            let d = SentLenParams::default();
            let p = SentLenParams {
                vocab_size: args.vocab.unwrap_or(d.vocab_size),
                buckets: match &args.buckets {
                    Some(b) => parse_buckets(b)?,
                    None => d.buckets,
                },
                per_bucket: args.per_bucket.unwrap_or(d.per_bucket),
                seed: args.seed,
            };
            let ds = gen_sentlen(&p).map_err(usage)?;
            (Params::SentLen(p), ds)
        }
        Task::Wc => {
            let d = WcParams::default();
            let p = WcParams {
                vocab_size: args.vocab.unwrap_or(d.vocab_size),
                target_words: args.target_words.unwrap_or(d.target_words),
                per_word: args.per_word.unwrap_or(d.per_word),
                sent_len: args.sent_len.unwrap_or(d.sent_len),
                seed: args.seed,
            };
            let ds = gen_wc(&p).map_err(usage)?;
            (Params::Wc(p), ds)
        }
        Task::BShift => {
            let d = BShiftParams::default();
            let p = BShiftParams {
                base_sentences: args.base.unwrap_or(d.base_sentences),
                sent_len: args.sent_len.unwrap_or(d.sent_len),
                vocab_size: args.vocab.unwrap_or(d.vocab_size),
                seed: args.seed,
            };
            let ds = gen_bshift(&p).map_err(usage)?;
            (Params::BShift(p), ds)
        }
    })
}

pub fn cmd_gen_tasks(args: &GenArgs) -> Result<(), CliError> {
    let (params, dataset) = generate(args)?;
    let mut tsv = Vec::new();
    dataset.write_tsv(&mut tsv)?;
    fs::write(&args.out, tsv).map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;

    let manifest = Manifest {
        task: args.task,
        seed: args.seed,
        params: &params,
        examples: dataset.len(),
        label_count: dataset.label_count,
        columns: ["split", "label", "sentence"],
    };
    let mut json = serde_json::to_string_pretty(&manifest).map_err(CliError::data)?;
    json.push('\n');
    let path = manifest_path(&args.out);
    fs::write(&path, json).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    eprintln!(
        "wrote {} {} examples to {} ({} labels)",
        dataset.len(),
        args.task,
        args.out.display(),
        dataset.label_count
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bucket_parsing() {
        assert_eq!(parse_buckets("1-4, 5-8").unwrap(), vec![(1, 4), (5, 8)]);
        assert!(parse_buckets("1-4,x").is_err());
        assert!(parse_buckets("3").is_err());
    }

    #[test]
    fn manifest_sits_next_to_dataset() {
        assert_eq!(
            manifest_path(Path::new("/tmp/a/bshift.tsv")),
            PathBuf::from("/tmp/a/bshift.tsv.manifest.json")
        );
    }
}
