//! FER+-style relabeling and the train/test image transforms.
//!
//! Vote vectors use the FER+ column order: neutral, happiness, surprise,
//! sadness, anger, disgust, fear, contempt, unknown, NF. The first eight are
//! kept as classes; samples whose majority falls on unknown or NF are dropped.
//! Ties go to the lowest category index.

use alloc::vec::Vec;

use crate::tensor::{Image, ImageBatch, LabelBatch, ROW_SUM_TOLERANCE};
use crate::{Error, Result, RngStream};

pub const VOTE_CATEGORIES: [&str; 10] = [
    "neutral",
    "happiness",
    "surprise",
    "sadness",
    "anger",
    "disgust",
    "fear",
    "contempt",
    "unknown",
    "NF",
];

/// Emotion classes kept after filtering.
pub const NUM_CLASSES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VoteOutcome {
    Class(usize),
    /// Majority vote went to unknown or NF.
    Filtered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VoteDecision {
    pub outcome: VoteOutcome,
    /// More than one category shared the top count.
    pub tied: bool,
}

/// Argmax of the ten vote counts, lowest index on ties.
pub fn majority_vote_label(votes: &[u32]) -> Result<VoteDecision> {
    if votes.len() != VOTE_CATEGORIES.len() {
        return Err(Error::VoteLength(votes.len()));
    }
    let max = votes.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(Error::NoVotes);
    }
    let winner = votes.iter().position(|&v| v == max).unwrap_or(0);
    let tied = votes.iter().filter(|&&v| v == max).count() > 1;
    let outcome = if winner < NUM_CLASSES {
        VoteOutcome::Class(winner)
    } else {
        VoteOutcome::Filtered
    };
    Ok(VoteDecision { outcome, tied })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One annotated grayscale sample before relabeling.
#[derive(Clone, Debug, PartialEq)]
pub struct VotedSample {
    /// `h * w` grayscale values in `[0, 1]`.
    pub pixels: Vec<f32>,
    pub votes: [u32; 10],
    pub split: Split,
}

/// Pixels and class indices of one split.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SplitData {
    pub pixels: Vec<f32>,
    pub classes: Vec<usize>,
}

impl SplitData {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// `(N x 1 x h x w, N x 8 one-hot)`, or `None` for an empty split.
    pub fn to_batches(&self, height: usize, width: usize) -> Result<Option<(ImageBatch, LabelBatch)>> {
        if self.is_empty() {
            return Ok(None);
        }
        let images = ImageBatch::new(self.len(), 1, height, width, self.pixels.clone())?;
        let labels = LabelBatch::one_hot(&self.classes, NUM_CLASSES)?;
        Ok(Some((images, labels)))
    }
}

/// Relabeled dataset with the original split assignment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PreparedDataset {
    pub height: usize,
    pub width: usize,
    pub splits: [SplitData; 3],
    /// Samples dropped because unknown or NF won the vote.
    pub filtered: usize,
    /// Samples with an all-zero vote vector, also dropped.
    pub no_votes: usize,
    /// Kept or filtered samples whose top vote was tied.
    pub ties: usize,
}

impl PreparedDataset {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            ..Self::default()
        }
    }

    pub fn split(&self, split: Split) -> &SplitData {
        &self.splits[split.index()]
    }

    /// `(train, val, test)` sample counts.
    pub fn split_sizes(&self) -> (usize, usize, usize) {
        (self.splits[0].len(), self.splits[1].len(), self.splits[2].len())
    }

    /// Relabels one sample and files it under its split.
    pub fn push(&mut self, sample: VotedSample) -> Result<()> {
        let expected = self.height * self.width;
        if sample.pixels.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "pixels per sample",
                expected,
                found: sample.pixels.len(),
            });
        }
        let decision = match majority_vote_label(&sample.votes) {
            Ok(d) => d,
            Err(Error::NoVotes) => {
                self.no_votes += 1;
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        if decision.tied {
            self.ties += 1;
        }
        match decision.outcome {
            VoteOutcome::Class(class) => {
                let split = &mut self.splits[sample.split.index()];
                split.pixels.extend_from_slice(&sample.pixels);
                split.classes.push(class);
            }
            VoteOutcome::Filtered => self.filtered += 1,
        }
        Ok(())
    }
}

/// A crop window, optionally mirrored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CropSpec {
    pub ox: usize,
    pub oy: usize,
    pub size: usize,
    pub mirrored: bool,
}

fn check_crop(image: &Image, size: usize) -> Result<()> {
    if size == 0 || size > image.height() || size > image.width() {
        return Err(Error::CropTooLarge {
            size,
            height: image.height(),
            width: image.width(),
        });
    }
    Ok(())
}

/// Cuts the `size x size` window at `(ox, oy)`, mirroring it if requested.
pub fn crop(image: &Image, spec: &CropSpec) -> Result<Image> {
    check_crop(image, spec.size)?;
    if spec.ox + spec.size > image.width() || spec.oy + spec.size > image.height() {
        return Err(Error::InvalidShape("crop window extends past the image"));
    }
    let s = spec.size;
    Image::from_fn(image.channels(), s, s, |c, y, x| {
        let col = if spec.mirrored { s - 1 - x } else { x };
        image.get(c, spec.oy + y, spec.ox + col)
    })
}

/// Draws `ox` then `oy`, each uniform over the valid offsets (two draws).
pub fn random_crop_spec(height: usize, width: usize, size: usize, rng: &mut RngStream) -> CropSpec {
    let ox = rng.sample_index(width - size + 1);
    let oy = rng.sample_index(height - size + 1);
    CropSpec {
        ox,
        oy,
        size,
        mirrored: false,
    }
}

pub fn random_crop(image: &Image, size: usize, rng: &mut RngStream) -> Result<Image> {
    check_crop(image, size)?;
    let spec = random_crop_spec(image.height(), image.width(), size, rng);
    crop(image, &spec)
}

/// Reflects columns: `x -> w - 1 - x`.
pub fn mirror_horizontal(image: &Image) -> Image {
    let w = image.width();
    let mut data = Vec::with_capacity(image.data().len());
    for row in image.data().chunks_exact(w) {
        data.extend(row.iter().rev());
    }
    Image::new(image.channels(), image.height(), w, data).expect("same shape")
}

/// Mirrors with probability 0.5 (one draw).
pub fn mirror(image: &Image, rng: &mut RngStream) -> Image {
    if rng.next_unit() < 0.5 {
        mirror_horizontal(image)
    } else {
        image.clone()
    }
}

/// Top-left, bottom-left, top-right, bottom-right and center windows, then
/// the mirrored versions of the same five.
pub fn ten_crop_specs(height: usize, width: usize, size: usize) -> Result<[CropSpec; 10]> {
    if size == 0 || size > height || size > width {
        return Err(Error::CropTooLarge { size, height, width });
    }
    let (dx, dy) = (width - size, height - size);
    let offsets = [(0, 0), (0, dy), (dx, 0), (dx, dy), (dx / 2, dy / 2)];
    let mut specs = [CropSpec {
        ox: 0,
        oy: 0,
        size,
        mirrored: false,
    }; 10];
    for (k, &(ox, oy)) in offsets.iter().enumerate() {
        specs[k] = CropSpec {
            ox,
            oy,
            size,
            mirrored: false,
        };
        specs[k + 5] = CropSpec {
            ox,
            oy,
            size,
            mirrored: true,
        };
    }
    Ok(specs)
}

pub fn ten_crop(image: &Image, size: usize) -> Result<Vec<Image>> {
    ten_crop_specs(image.height(), image.width(), size)?
        .iter()
        .map(|spec| crop(image, spec))
        .collect()
}

/// Mean of `k`-wide probability rows, and the argmax of the mean (lowest index on ties).
pub fn average_probabilities(probs: &[f64], k: usize) -> Result<(Vec<f64>, usize)> {
    if k == 0 || probs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if !probs.len().is_multiple_of(k) {
        return Err(Error::DimensionMismatch {
            what: "probability matrix length",
            expected: (probs.len() / k + 1) * k,
            found: probs.len(),
        });
    }
    let rows = probs.len() / k;
    let mut mean = alloc::vec![0.0; k];
    for (r, row) in probs.chunks_exact(k).enumerate() {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE || row.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::RowSum { row: r, sum });
        }
        for (m, &p) in mean.iter_mut().zip(row) {
            *m += p;
        }
    }
    for m in &mut mean {
        *m /= rows as f64;
    }
    let mut best = 0;
    for (i, &m) in mean.iter().enumerate() {
        if m > mean[best] {
            best = i;
        }
    }
    Ok((mean, best))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(h: usize, w: usize) -> Image {
        Image::from_fn(1, h, w, |_, y, x| ((y * w + x) % 251) as f32 / 251.0).unwrap()
    }

    #[test]
    fn unanimous_vote() {
        let mut v = [0u32; 10];
        v[3] = 10;
        let d = majority_vote_label(&v).unwrap();
        assert_eq!(
            d,
            VoteDecision {
                outcome: VoteOutcome::Class(3),
                tied: false
            }
        );
    }

    #[test]
    fn nf_and_unknown_majorities_are_filtered() {
        let nf = [1, 0, 0, 0, 0, 0, 0, 0, 2, 7];
        assert_eq!(majority_vote_label(&nf).unwrap().outcome, VoteOutcome::Filtered);
        let unknown = [0, 0, 0, 0, 0, 0, 0, 0, 6, 4];
        assert_eq!(majority_vote_label(&unknown).unwrap().outcome, VoteOutcome::Filtered);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let v = [0, 4, 0, 0, 4, 0, 0, 0, 2, 0];
        assert_eq!(
            majority_vote_label(&v).unwrap(),
            VoteDecision {
                outcome: VoteOutcome::Class(1),
                tied: true
            }
        );
    }

    #[test]
    fn vote_errors() {
        assert_eq!(majority_vote_label(&[0; 10]), Err(Error::NoVotes));
        assert_eq!(majority_vote_label(&[1; 9]), Err(Error::VoteLength(9)));
    }

    #[test]
    fn prepared_dataset_filters_and_counts() {
        let mut ds = PreparedDataset::new(2, 2);
        let px = alloc::vec![0.5; 4];
        let mut happy = [0u32; 10];
        happy[1] = 10;
        let mut nf = [0u32; 10];
        nf[9] = 10;
        ds.push(VotedSample {
            pixels: px.clone(),
            votes: happy,
            split: Split::Train,
        })
        .unwrap();
        ds.push(VotedSample {
            pixels: px.clone(),
            votes: nf,
            split: Split::Train,
        })
        .unwrap();
        ds.push(VotedSample {
            pixels: px.clone(),
            votes: happy,
            split: Split::Test,
        })
        .unwrap();
        ds.push(VotedSample {
            pixels: px.clone(),
            votes: [0; 10],
            split: Split::Val,
        })
        .unwrap();
        assert_eq!(ds.split_sizes(), (1, 0, 1));
        assert_eq!((ds.filtered, ds.no_votes, ds.ties), (1, 1, 0));
        let (_, labels) = ds.split(Split::Train).to_batches(2, 2).unwrap().unwrap();
        assert_eq!(labels.row(0), &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(ds.split(Split::Val).to_batches(2, 2).unwrap().is_none());
        assert!(ds
            .push(VotedSample {
                pixels: alloc::vec![0.0; 3],
                votes: happy,
                split: Split::Train
            })
            .is_err());
    }

    #[test]
    fn full_size_crop_is_identity() {
        let img = ramp(6, 6);
        let mut rng = RngStream::new(0);
        assert_eq!(random_crop(&img, 6, &mut rng).unwrap(), img);
        assert_eq!(rng.draws(), 2);
        assert!(random_crop(&img, 7, &mut rng).is_err());
    }

    #[test]
    fn random_crop_offsets_and_pixels() {
        let img = ramp(48, 48);
        let mut rng = RngStream::new(17);
        let mut seen = [[false; 5]; 5];
        for _ in 0..500 {
            let mut twin = rng.clone();
            let spec = random_crop_spec(48, 48, 44, &mut twin);
            assert!(spec.ox <= 4 && spec.oy <= 4);
            seen[spec.oy][spec.ox] = true;
            let out = random_crop(&img, 44, &mut rng).unwrap();
            for i in 0..44 {
                for j in 0..44 {
                    assert_eq!(out.get(0, i, j), img.get(0, spec.oy + i, spec.ox + j));
                }
            }
        }
        assert!(seen.iter().flatten().all(|&s| s));
    }

    #[test]
    fn mirror_examples() {
        let img = ramp(5, 7);
        assert_eq!(mirror_horizontal(&mirror_horizontal(&img)), img);
        let sym = Image::from_fn(1, 3, 4, |_, y, x| if x == 0 || x == 3 { 0.2 } else { 0.1 * y as f32 }).unwrap();
        assert_eq!(mirror_horizontal(&sym), sym);
        let dot = Image::from_fn(1, 5, 7, |_, y, x| if (y, x) == (1, 2) { 1.0 } else { 0.0 }).unwrap();
        let m = mirror_horizontal(&dot);
        assert_eq!(m.get(0, 1, 7 - 1 - 2), 1.0);
        assert_eq!(m.data().iter().filter(|&&v| v == 1.0).count(), 1);

        let mut rng = RngStream::new(2);
        let mut flips = 0;
        for _ in 0..10_000 {
            if mirror(&img, &mut rng) != img {
                flips += 1;
            }
        }
        assert!((flips as f64 / 10_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn ten_crop_layout() {
        let specs = ten_crop_specs(48, 48, 44).unwrap();
        let offsets: Vec<(usize, usize)> = specs.iter().map(|s| (s.ox, s.oy)).collect();
        assert_eq!(&offsets[..5], &[(0, 0), (0, 4), (4, 0), (4, 4), (2, 2)]);
        assert_eq!(&offsets[5..], &offsets[..5]);
        assert!(specs[..5].iter().all(|s| !s.mirrored) && specs[5..].iter().all(|s| s.mirrored));

        let img = ramp(48, 48);
        let views = ten_crop(&img, 44).unwrap();
        assert_eq!(views.len(), 10);
        for k in 0..5 {
            assert_eq!(views[k + 5], mirror_horizontal(&views[k]));
        }
        for a in 0..10 {
            for b in a + 1..10 {
                assert_ne!(views[a], views[b]);
            }
        }
        assert_eq!(ten_crop(&img, 44).unwrap(), views);
        assert!(ten_crop(&img, 49).is_err());
    }

    #[test]
    fn ten_crop_full_size() {
        let img = ramp(6, 6);
        let views = ten_crop(&img, 6).unwrap();
        let mirrored = mirror_horizontal(&img);
        assert!(views[..5].iter().all(|v| *v == img));
        assert!(views[5..].iter().all(|v| *v == mirrored));
    }

    #[test]
    fn averaging_examples() {
        let row = [0.1, 0.2, 0.7];
        let probs: Vec<f64> = row.iter().copied().cycle().take(30).collect();
        let (mean, arg) = average_probabilities(&probs, 3).unwrap();
        for (m, r) in mean.iter().zip(row) {
            assert!((m - r).abs() < 1e-15);
        }
        assert_eq!(arg, 2);

        let mut probs = Vec::new();
        for r in 0..10 {
            let mut row = [0.0; 4];
            row[if r < 6 { 0 } else { 1 }] = 1.0;
            probs.extend_from_slice(&row);
        }
        let (mean, arg) = average_probabilities(&probs, 4).unwrap();
        assert!((mean[0] - 0.6).abs() < 1e-12 && (mean[1] - 0.4).abs() < 1e-12);
        assert_eq!(arg, 0);
        assert!((mean.iter().sum::<f64>() - 1.0).abs() < 1e-6);

        assert!(matches!(
            average_probabilities(&[0.5, 0.4], 2),
            Err(Error::RowSum { .. })
        ));
        assert!(average_probabilities(&[0.5, 0.5, 1.0], 2).is_err());
    }

    #[test]
    fn averaging_ties_take_lowest_index() {
        let (_, arg) = average_probabilities(&[0.5, 0.5, 0.5, 0.5], 2).unwrap();
        assert_eq!(arg, 0);
    }
}
