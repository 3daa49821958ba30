//! FER2013 + FER+ CSV ingestion.
//!
//! `fer2013.csv` supplies pixels and the split (`emotion,pixels,Usage`, with
//! `Training`, `PublicTest` and `PrivateTest` mapped to train, val and test).
//! The FER+ vote file supplies ten annotator counts per row, in the same row
//! order. Columns are located by header name when a header row is present,
//! otherwise by the published FER+ order
//! (`Usage,Image name,neutral,...,unknown,NF`).

use std::fmt::Write as _;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use mixcut_core::dataset::{PreparedDataset, Split, VotedSample, NUM_CLASSES, VOTE_CATEGORIES};
use mixcut_core::LabelBatch;
use rayon::prelude::*;

use crate::{mxb1, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrepOptions {
    pub height: usize,
    pub width: usize,
}

impl Default for PrepOptions {
    fn default() -> Self {
        Self { height: 48, width: 48 }
    }
}

fn field<'a>(row: &'a Row, file: &str, col: usize) -> Result<&'a str> {
    row.fields
        .get(col)
        .ok_or_else(|| csv_err(file, row.line, format!("missing column {col}")))
}

struct Row {
    line: usize,
    fields: csv::StringRecord,
}

fn read_rows<R: Read>(input: R, file: &str) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    reader
        .records()
        .map(|r| {
            let fields = r.map_err(|e| Error::Csv {
                file: file.to_string(),
                row: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = fields.position().map_or(0, |p| p.line() as usize);
            Ok(Row { line, fields })
        })
        .collect()
}

fn find_column(header: &csv::StringRecord, name: &str) -> Option<usize> {
    header.iter().position(|h| h.trim().eq_ignore_ascii_case(name))
}

struct FerColumns {
    pixels: usize,
    usage: usize,
}

struct VoteColumns {
    usage: Option<usize>,
    votes: [usize; 10],
}

fn split_of(usage: &str) -> Option<Split> {
    match usage.trim() {
        "Training" => Some(Split::Train),
        "PublicTest" => Some(Split::Val),
        "PrivateTest" => Some(Split::Test),
        _ => None,
    }
}

fn csv_err(file: &str, row: usize, message: impl Into<String>) -> Error {
    Error::Csv {
        file: file.to_string(),
        row,
        message: message.into(),
    }
}

/// Parses a space-separated 0..=255 pixel string, scaled to `[0, 1]`.
pub fn parse_pixels(text: &str, expected: usize) -> std::result::Result<Vec<f32>, String> {
    let mut out = Vec::with_capacity(expected);
    for tok in text.split_ascii_whitespace() {
        let v: u8 = tok
            .parse()
            .map_err(|_| format!("pixel `{tok}` is not an integer in 0..=255"))?;
        out.push(f32::from(v) / 255.0);
    }
    if out.len() != expected {
        return Err(format!("expected {expected} pixels, found {}", out.len()));
    }
    Ok(out)
}

/// Relabels and filters FER2013 rows using the FER+ votes.
pub fn prepare_ferplus<A: Read, B: Read>(fer: A, votes: B, opts: PrepOptions) -> Result<PreparedDataset> {
    const FER: &str = "fer2013";
    const VOTES: &str = "ferplus";
    let mut fer_rows = read_rows(fer, FER)?;
    let mut vote_rows = read_rows(votes, VOTES)?;

    let fer_cols = match fer_rows.first() {
        Some(h) if find_column(&h.fields, "pixels").is_some() => {
            let cols = FerColumns {
                pixels: find_column(&h.fields, "pixels").unwrap_or(1),
                usage: find_column(&h.fields, "Usage")
                    .ok_or_else(|| csv_err(FER, h.line, "header lacks a `Usage` column"))?,
            };
            fer_rows.remove(0);
            cols
        }
        _ => FerColumns { pixels: 1, usage: 2 },
    };
    let vote_cols = match vote_rows.first() {
        Some(h) if find_column(&h.fields, "neutral").is_some() => {
            let mut votes = [0; 10];
            for (slot, name) in votes.iter_mut().zip(VOTE_CATEGORIES) {
                *slot = find_column(&h.fields, name)
                    .ok_or_else(|| csv_err(VOTES, h.line, format!("header lacks a `{name}` column")))?;
            }
            let cols = VoteColumns {
                usage: find_column(&h.fields, "Usage"),
                votes,
            };
            vote_rows.remove(0);
            cols
        }
        _ => VoteColumns {
            usage: Some(0),
            votes: std::array::from_fn(|i| i + 2),
        },
    };
    if fer_rows.len() != vote_rows.len() {
        return Err(Error::Csv {
            file: VOTES.into(),
            row: vote_rows.last().map_or(0, |r| r.line),
            message: format!(
                "row count mismatch: {} image rows, {} vote rows",
                fer_rows.len(),
                vote_rows.len()
            ),
        });
    }

    let expected = opts.height * opts.width;
    let samples: Vec<VotedSample> = fer_rows
        .par_iter()
        .zip(vote_rows.par_iter())
        .map(|(img, vote)| {
            let usage = field(img, FER, fer_cols.usage)?;
            let split = split_of(usage).ok_or_else(|| csv_err(FER, img.line, format!("unknown Usage `{usage}`")))?;
            if let Some(col) = vote_cols.usage {
                let theirs = field(vote, VOTES, col)?;
                if split_of(theirs) != Some(split) {
                    return Err(csv_err(
                        VOTES,
                        vote.line,
                        format!("Usage `{theirs}` disagrees with fer2013 `{usage}`"),
                    ));
                }
            }
            let pixels =
                parse_pixels(field(img, FER, fer_cols.pixels)?, expected).map_err(|m| csv_err(FER, img.line, m))?;
            let mut votes = [0u32; 10];
            for (slot, &col) in votes.iter_mut().zip(&vote_cols.votes) {
                let text = field(vote, VOTES, col)?.trim();
                *slot = text
                    .parse()
                    .map_err(|_| csv_err(VOTES, vote.line, format!("vote `{text}` is not a count")))?;
            }
            Ok(VotedSample { pixels, votes, split })
        })
        .collect::<Result<_>>()?;

    let mut dataset = PreparedDataset::new(opts.height, opts.width);
    for sample in samples {
        dataset.push(sample)?;
    }
    Ok(dataset)
}

pub fn prepare_ferplus_paths(fer: &Path, votes: &Path, opts: PrepOptions) -> Result<PreparedDataset> {
    let a = File::open(fer).map_err(|e| Error::io(fer, e))?;
    let b = File::open(votes).map_err(|e| Error::io(votes, e))?;
    prepare_ferplus(a, b, opts)
}

/// Summary written next to the prepared tensors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub height: usize,
    pub width: usize,
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub filtered: usize,
    pub no_votes: usize,
    pub ties: usize,
    pub files: Vec<PathBuf>,
}

impl Manifest {
    pub fn kept(&self) -> usize {
        self.train + self.val + self.test
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "format=mxb1");
        let _ = writeln!(s, "height={}", self.height);
        let _ = writeln!(s, "width={}", self.width);
        let _ = writeln!(s, "classes={NUM_CLASSES}");
        let _ = writeln!(s, "train={}", self.train);
        let _ = writeln!(s, "val={}", self.val);
        let _ = writeln!(s, "test={}", self.test);
        let _ = writeln!(s, "kept={}", self.kept());
        let _ = writeln!(s, "filtered={}", self.filtered);
        let _ = writeln!(s, "no_votes={}", self.no_votes);
        let _ = writeln!(s, "ties={}", self.ties);
        let _ = writeln!(s, "tie_break=lowest-index");
        for f in &self.files {
            let name = f
                .file_name()
                .map_or_else(|| f.display().to_string(), |n| n.to_string_lossy().into_owned());
            let _ = writeln!(s, "file={name}");
        }
        s
    }
}

/// `prefix` with `suffix` appended to its file name.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<prefix>.<split>.images.mxb`, `<prefix>.<split>.labels.mxb` for each
/// split and `<prefix>.manifest.txt`.
pub fn write_prepared(dataset: &PreparedDataset, prefix: &Path) -> Result<Manifest> {
    let (train, val, test) = dataset.split_sizes();
    let mut files = Vec::new();
    for split in Split::ALL {
        let data = dataset.split(split);
        let images = with_suffix(prefix, &format!(".{}.images.mxb", split.as_str()));
        let labels = with_suffix(prefix, &format!(".{}.labels.mxb", split.as_str()));
        mxb1::write_path(&images, &[data.len(), 1, dataset.height, dataset.width], &data.pixels)?;
        let label_data = if data.is_empty() {
            Vec::new()
        } else {
            mxb1::Tensor::from_labels(&LabelBatch::one_hot(&data.classes, NUM_CLASSES)?).data
        };
        mxb1::write_path(&labels, &[data.len(), NUM_CLASSES], &label_data)?;
        files.push(images);
        files.push(labels);
    }
    let manifest = Manifest {
        height: dataset.height,
        width: dataset.width,
        train,
        val,
        test,
        filtered: dataset.filtered,
        no_votes: dataset.no_votes,
        ties: dataset.ties,
        files,
    };
    let path = with_suffix(prefix, ".manifest.txt");
    std::fs::write(&path, manifest.render()).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pixels(n: usize, v: u8) -> String {
        vec![v.to_string(); n].join(" ")
    }

    fn fixture() -> (String, String) {
        let fer = format!(
            "emotion,pixels,Usage\n0,{},Training\n3,{},Training\n4,{},PrivateTest\n",
            pixels(4, 0),
            pixels(4, 255),
            pixels(4, 51)
        );
        let votes = "Usage,Image name,neutral,happiness,surprise,sadness,anger,disgust,fear,contempt,unknown,NF\n\
                     Training,fer0000000.png,4,0,0,0,6,0,0,0,0,0\n\
                     Training,fer0000001.png,0,0,0,0,0,0,0,0,1,9\n\
                     PrivateTest,fer0000002.png,0,3,0,0,3,0,0,0,2,2\n"
            .to_string();
        (fer, votes)
    }

    const TINY: PrepOptions = PrepOptions { height: 2, width: 2 };

    #[test]
    fn synthetic_three_rows() {
        let (fer, votes) = fixture();
        let ds = prepare_ferplus(fer.as_bytes(), votes.as_bytes(), TINY).unwrap();
        assert_eq!(ds.split_sizes(), (1, 0, 1));
        assert_eq!(ds.filtered, 1);
        assert_eq!(ds.ties, 1);
        assert_eq!(ds.split(Split::Train).classes, vec![4]);
        assert_eq!(ds.split(Split::Test).classes, vec![1]);
        assert_eq!(ds.split(Split::Test).pixels, vec![0.2; 4]);
    }

    #[test]
    fn headerless_vote_file_uses_published_order() {
        let (fer, votes) = fixture();
        let body: String = votes.lines().skip(1).map(|l| format!("{l}\n")).collect();
        let ds = prepare_ferplus(fer.as_bytes(), body.as_bytes(), TINY).unwrap();
        assert_eq!(ds.split_sizes(), (1, 0, 1));
    }

    #[test]
    fn reordered_vote_columns_are_found_by_name() {
        let fer = format!("emotion,pixels,Usage\n0,{},PublicTest\n", pixels(4, 10));
        let votes = "NF,unknown,contempt,fear,disgust,anger,sadness,surprise,happiness,neutral,Usage\n0,0,7,0,0,0,0,0,0,3,PublicTest\n";
        let ds = prepare_ferplus(fer.as_bytes(), votes.as_bytes(), TINY).unwrap();
        assert_eq!(ds.split(Split::Val).classes, vec![7]);
    }

    #[test]
    fn errors_report_rows() {
        let (fer, votes) = fixture();
        let short: String = votes.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            prepare_ferplus(fer.as_bytes(), short.as_bytes(), TINY),
            Err(Error::Csv { .. })
        ));
        let bad = fer.replace("0 0 0 0", "0 0 x 0");
        match prepare_ferplus(bad.as_bytes(), votes.as_bytes(), TINY) {
            Err(Error::Csv { row, message, .. }) => {
                assert_eq!(row, 2);
                assert!(message.contains("`x`"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let wrong_len = fer.replace("0 0 0 0", "0 0 0");
        assert!(prepare_ferplus(wrong_len.as_bytes(), votes.as_bytes(), TINY).is_err());
        let bad_vote = votes.replace(",4,0,0,0,6,", ",4,0,-1,0,6,");
        assert!(prepare_ferplus(fer.as_bytes(), bad_vote.as_bytes(), TINY).is_err());
        let bad_usage = fer.replace("PrivateTest", "Holdout");
        assert!(prepare_ferplus(bad_usage.as_bytes(), votes.as_bytes(), TINY).is_err());
    }

    #[test]
    fn pixel_parsing() {
        assert_eq!(parse_pixels("0 255", 2).unwrap(), vec![0.0, 1.0]);
        assert!(parse_pixels("256 0", 2).is_err());
        assert!(parse_pixels("1 2 3", 2).is_err());
    }

    #[test]
    fn writes_outputs_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let (fer, votes) = fixture();
        let ds = prepare_ferplus(fer.as_bytes(), votes.as_bytes(), TINY).unwrap();
        let prefix = dir.path().join("fer");
        let m = write_prepared(&ds, &prefix).unwrap();
        assert_eq!((m.kept(), m.filtered), (2, 1));
        let text = std::fs::read_to_string(dir.path().join("fer.manifest.txt")).unwrap();
        assert!(text.contains("train=1\nval=0\ntest=1\n"));
        assert!(text.contains("ties=1"));
        let imgs = mxb1::read_images(dir.path().join("fer.train.images.mxb")).unwrap();
        assert_eq!(imgs.dims(), [1, 1, 2, 2]);
        let empty = mxb1::read_path(dir.path().join("fer.val.labels.mxb")).unwrap();
        assert_eq!(empty.dims, vec![0, 8]);
    }
}
