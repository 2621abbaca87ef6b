use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use super::ProbeError;

/// Synthetic probing task families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    SentLen,
    Wc,
    BShift,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::SentLen => "sentlen",
            Task::Wc => "wc",
            Task::BShift => "bshift",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sentlen" => Ok(Task::SentLen),
            "wc" => Ok(Task::Wc),
            "bshift" => Ok(Task::BShift),
            _ => Err(format!("unknown task {s:?} (expected sentlen, wc or bshift)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn tag(&self) -> &'static str {
        match self {
            Split::Train => "tr",
            Split::Dev => "va",
            Split::Test => "te",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "tr" => Some(Split::Train),
            "va" => Some(Split::Dev),
            "te" => Some(Split::Test),
            _ => None,
        }
    }

    /// 80/10/10 assignment of position `i` among `n` shuffled units.
    pub(crate) fn for_position(i: usize, n: usize) -> Self {
        let train = n * 8 / 10;
        let dev = n / 10;
        if i < train {
            Split::Train
        } else if i < train + dev {
            Split::Dev
        } else {
            Split::Test
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub split: Split,
    pub label: usize,
    pub tokens: Vec<String>,
}

/// Labeled sentences for one probing task. Every example carries exactly one
/// split tag, so the splits are disjoint and cover the dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbingDataset {
    pub task: Option<Task>,
    pub examples: Vec<LabeledSentence>,
    pub label_count: usize,
}

impl ProbingDataset {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        self.examples
            .iter()
            .enumerate()
            .filter(|(_, e)| e.split == split)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.examples.iter().map(|e| e.label).collect()
    }

    /// Distinct tokens in first-seen order.
    pub fn vocabulary(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for tok in self.examples.iter().flat_map(|e| &e.tokens) {
            if seen.insert(tok.as_str()) {
                out.push(tok.as_str());
            }
        }
        out
    }

    /// One example per line: `split<TAB>label<TAB>space-joined tokens`.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.examples {
            writeln!(w, "{}\t{}\t{}", e.split.tag(), e.label, e.tokens.join(" "))?;
        }
        w.flush()
    }

    pub fn read_tsv<R: BufRead>(reader: R, task: Option<Task>) -> Result<Self, ProbeError> {
        let mut examples = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.is_empty() {
                continue;
            }
            let mut cols = line.splitn(3, '\t');
            let (Some(split), Some(label), Some(sentence)) = (cols.next(), cols.next(), cols.next())
            else {
                return Err(ProbeError::Format {
                    line: line_no,
                    message: "expected 3 tab-separated columns".into(),
                });
            };
            let split = Split::from_tag(split).ok_or_else(|| ProbeError::Format {
                line: line_no,
                message: format!("unknown split {split:?}"),
            })?;
            let label = label.parse().map_err(|_| ProbeError::Format {
                line: line_no,
                message: format!("bad label {label:?}"),
            })?;
            let tokens = sentence.split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect();
            examples.push(LabeledSentence { split, label, tokens });
        }
        if examples.is_empty() {
            return Err(ProbeError::EmptyDataset);
        }
        let label_count = examples.iter().map(|e| e.label).max().unwrap_or(0) + 1;
        Ok(Self {
            task,
            examples,
            label_count,
        })
    }
}
