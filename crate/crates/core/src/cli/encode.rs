use std::io::{self, BufRead, BufReader, Write};

use rayon::prelude::*;

use super::{open_input, open_output, CliError, EncodeArgs};
use crate::encoder::{EncodeError, Encoder, PoolingMethod};
use crate::format::{EmbeddingWriter, Format};
use crate::lexicon::{embed_tokens_counting, load_table, Tokenizer, WordEmbeddingTable};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EncodeSummary {
    pub lines: usize,
    pub encoded: usize,
    pub skipped: usize,
    pub truncated: usize,
    pub oov_tokens: usize,
    pub dim_out: usize,
}

enum LineResult {
    Record(Vec<f64>, usize, bool),
    Skipped(usize),
}

/// Encode `input` line by line into `output`.
///
/// Lines are processed in chunks of `chunk` lines, each chunk in parallel,
/// and written in input order, so memory use is bounded by the chunk size
/// rather than the corpus size.
#[allow(clippy::too_many_arguments)]
pub fn encode_stream<R: BufRead, W: Write>(
    table: &WordEmbeddingTable,
    encoder: &Encoder<f64>,
    tokenizer: Tokenizer,
    max_len: usize,
    input: R,
    output: W,
    format: Format,
    chunk: usize,
) -> Result<(EncodeSummary, W), CliError> {
    let method = encoder.method();
    let dim_out = method.output_len(table.dim());
    let mut writer = EmbeddingWriter::new(output, format, dim_out)?;
    let mut summary = EncodeSummary {
        dim_out,
        ..Default::default()
    };
    let mut lines = input.lines();
    let mut batch: Vec<String> = Vec::with_capacity(chunk);
    loop {
        batch.clear();
        for line in lines.by_ref().take(chunk.max(1)) {
            batch.push(line?);
        }
        if batch.is_empty() {
            break;
        }
        let first_line = summary.lines + 1;
        let results: Vec<Result<LineResult, CliError>> = batch
            .par_iter()
            .map(|line| encode_line(table, encoder, tokenizer, max_len, line))
            .collect();
        for (offset, result) in results.into_iter().enumerate() {
            let line_no = first_line + offset;
            match result.map_err(|e| CliError::Data(format!("line {line_no}: {e}")))? {
                LineResult::Record(values, oov, truncated) => {
                    if truncated {
                        log::warn!("line {line_no}: sentence truncated to {max_len} words");
                        summary.truncated += 1;
                    }
                    summary.oov_tokens += oov;
                    writer.write_record(&values)?;
                    summary.encoded += 1;
                }
                LineResult::Skipped(oov) => {
                    log::warn!("line {line_no}: no in-vocabulary words, skipped for {method}");
                    summary.oov_tokens += oov;
                    summary.skipped += 1;
                }
            }
        }
        summary.lines += batch.len();
    }
    Ok((summary, writer.finish()?))
}

fn encode_line(
    table: &WordEmbeddingTable,
    encoder: &Encoder<f64>,
    tokenizer: Tokenizer,
    max_len: usize,
    line: &str,
) -> Result<LineResult, CliError> {
    let sent = tokenizer.tokenize(line);
    let (mut mat, oov) = embed_tokens_counting::<f64>(table, &sent).map_err(CliError::data)?;
    let truncated = mat.n_rows() > max_len;
    mat.truncate(max_len);
    match encoder.encode(&mat) {
        Ok(emb) => Ok(LineResult::Record(emb.values, oov, truncated)),
        Err(EncodeError::EmptySentence { .. }) => Ok(LineResult::Skipped(oov)),
        Err(e) => Err(CliError::data(e)),
    }
}

pub(crate) fn build_encoder(
    method: PoolingMethod,
    table: &WordEmbeddingTable,
    max_len: usize,
) -> Result<Encoder<f64>, CliError> {
    if let PoolingMethod::DctStar { k } = method {
        if k > table.dim() {
            return Err(CliError::Data(format!(
                "dct-star keeps {k} coefficients but vectors have {} dimensions",
                table.dim()
            )));
        }
    }
    let plan_len = match method {
        PoolingMethod::DctStar { .. } => max_len.max(table.dim()),
        _ => max_len,
    };
    Encoder::new(method, plan_len).map_err(CliError::data)
}

pub fn cmd_encode(args: &EncodeArgs) -> Result<EncodeSummary, CliError> {
    let method = args.pooling.method()?;
    let table = load_table(&args.vectors, None, args.oov)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.vectors.display())))?;
    let encoder = build_encoder(method, &table, args.pooling.max_len)?;
    let tokenizer = Tokenizer {
        lowercase: !args.no_lowercase,
    };
    let input: Box<dyn BufRead> = match &args.input {
        Some(p) => Box::new(BufReader::new(open_input(p)?)),
        None => Box::new(io::stdin().lock()),
    };
    let output = open_output(args.out.as_deref())?;
    let (summary, _) = encode_stream(
        &table,
        &encoder,
        tokenizer,
        args.pooling.max_len,
        input,
        output,
        args.format,
        args.chunk,
    )?;
    eprintln!(
        "encoded {} sentences ({} skipped, {} truncated), {} OOV tokens, dim out {}",
        summary.encoded, summary.skipped, summary.truncated, summary.oov_tokens, summary.dim_out
    );
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{read_bin, read_tsv};
    use crate::lexicon::OovPolicy;

    fn table() -> WordEmbeddingTable {
        WordEmbeddingTable::read_text(
            "man 1 0 0.5\nbites 0 1 -1\ndog 0.25 0.5 2\n".as_bytes(),
            None,
            OovPolicy::Skip,
        )
        .unwrap()
    }

    const INPUT: &str = "Dog bites man.\nman bites dog\nthe dog\n";

    fn run(method: PoolingMethod, format: Format, input: &str, chunk: usize) -> (EncodeSummary, Vec<u8>) {
        let t = table();
        let enc = build_encoder(method, &t, 16).unwrap();
        encode_stream(&t, &enc, Tokenizer::default(), 16, input.as_bytes(), Vec::new(), format, chunk)
            .unwrap()
    }

    #[test]
    fn size_contract_per_method() {
        let (s, out) = run(PoolingMethod::Dct { k: 2 }, Format::Tsv, INPUT, 4096);
        let recs = read_tsv(&out[..]).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs.iter().all(|r| r.len() == 6));
        assert_eq!((s.encoded, s.oov_tokens, s.dim_out), (3, 1, 6));

        let (_, out) = run(PoolingMethod::Avg, Format::Tsv, INPUT, 4096);
        let recs = read_tsv(&out[..]).unwrap();
        assert!(recs.len() == 3 && recs.iter().all(|r| r.len() == 3));
    }

    #[test]
    fn chunking_does_not_change_output() {
        let big: String = INPUT.repeat(50);
        let (_, a) = run(PoolingMethod::Dct { k: 3 }, Format::Bin, &big, 4096);
        let (_, b) = run(PoolingMethod::Dct { k: 3 }, Format::Bin, &big, 7);
        assert_eq!(a, b);
        let (h, recs) = read_bin(&a[..]).unwrap();
        assert_eq!((h.record_len, recs.len()), (9, 150));
    }

    #[test]
    fn empty_lines() {
        let input = "dog\n\nunknown words\nman\n";
        let (s, out) = run(PoolingMethod::Dct { k: 2 }, Format::Tsv, input, 4096);
        let recs = read_tsv(&out[..]).unwrap();
        assert_eq!(recs.len(), 4);
        assert_eq!(recs[1], vec![0.0; 6]);
        assert_eq!(s.skipped, 0);

        let (s, out) = run(PoolingMethod::Max, Format::Tsv, input, 4096);
        assert_eq!(read_tsv(&out[..]).unwrap().len(), 2);
        assert_eq!((s.lines, s.encoded, s.skipped, s.oov_tokens), (4, 2, 2, 2));
    }

    #[test]
    fn long_sentences_are_truncated() {
        let t = table();
        let enc = build_encoder(PoolingMethod::Avg, &t, 2).unwrap();
        let (s, out) = encode_stream(
            &t, &enc, Tokenizer::default(), 2, "man bites dog\n".as_bytes(), Vec::new(), Format::Tsv, 10,
        )
        .unwrap();
        assert_eq!(s.truncated, 1);
        assert_eq!(read_tsv(&out[..]).unwrap()[0], vec![0.5, 0.5, -0.25]);
    }

    #[test]
    fn oov_error_policy_reports_line() {
        let mut t = table();
        t.set_oov_policy(OovPolicy::Error);
        let enc = build_encoder(PoolingMethod::Avg, &t, 8).unwrap();
        let err = encode_stream(
            &t, &enc, Tokenizer::default(), 8, "dog\ncat\n".as_bytes(), Vec::new(), Format::Tsv, 10,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("line 2") && err.to_string().contains("cat"));
    }

    #[test]
    fn dct_star_needs_k_at_most_dim() {
        assert!(build_encoder(PoolingMethod::DctStar { k: 4 }, &table(), 8).is_err());
        let (_, out) = run(PoolingMethod::DctStar { k: 2 }, Format::Tsv, INPUT, 10);
        assert!(read_tsv(&out[..]).unwrap().iter().all(|r| r.len() == 2));
    }
}
