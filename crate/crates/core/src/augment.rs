//! Batch-level augmentation operators.
//!
//! Every operator follows the same draw order on its [`RngStream`]:
//!
//! 1. one gate draw, `bernoulli(gamma)`; on failure the batch is returned unchanged;
//! 2. the pairing permutation (Fisher-Yates, `n - 1` draws) for the two-sample operators;
//! 3. per minibatch, or per sample when `per_sample` is set, in this order:
//!    λ (one draw unless fixed), η (one draw unless β is fixed),
//!    then the region center `cx`, `cy` (two draws unless the center is fixed).
//!
//! Operators use only the scalars they need: Mixup draws no η or center,
//! Cutout draws no permutation or λ, CutMix draws no λ.
//!
//! The `*_apply` functions take those scalars explicitly, so callers can run
//! an operator under forced parameters.

use alloc::vec::Vec;

use crate::geometry::{self, BinaryMask, CutRegion};
use crate::policy::{AugmentPolicy, CenterSpec, LambdaSpec, Method, RatioSpec};
use crate::tensor::{validate_batch, ImageBatch, LabelBatch};
use crate::{Error, Result, RngStream};

/// Pairing of A-side sample `i` with B-side sample `index_map[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairedBatch {
    index_map: Vec<usize>,
}

impl PairedBatch {
    pub fn identity(n: usize) -> Self {
        Self {
            index_map: (0..n).collect(),
        }
    }

    /// Checks that `index_map` is a permutation of `0..n`.
    pub fn from_index_map(index_map: Vec<usize>) -> Result<Self> {
        if index_map.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let n = index_map.len();
        let mut seen = alloc::vec![false; n];
        for &j in &index_map {
            if j >= n || core::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidShape("index map is not a permutation"));
            }
        }
        Ok(Self { index_map })
    }

    pub fn index_map(&self) -> &[usize] {
        &self.index_map
    }

    pub fn len(&self) -> usize {
        self.index_map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_map.is_empty()
    }

    pub fn into_index_map(self) -> Vec<usize> {
        self.index_map
    }
}

/// Uniform random permutation by Fisher-Yates: for `i = n-1 .. 1`, swap `i`
/// with `sample_index(i + 1)`. Consumes `n - 1` draws.
pub fn shuffle_pair(n: usize, rng: &mut RngStream) -> Result<PairedBatch> {
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let mut index_map: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.sample_index(i + 1);
        index_map.swap(i, j);
    }
    Ok(PairedBatch { index_map })
}

#[inline]
fn mix_pixel(a: f32, b: f32, lambda: f64) -> f32 {
    (lambda * f64::from(a) + (1.0 - lambda) * f64::from(b)) as f32
}

#[inline]
fn mix_label(a: f64, b: f64, lambda: f64) -> f64 {
    lambda * a + (1.0 - lambda) * b
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidRatio(lambda));
    }
    Ok(())
}

/// Elementwise `lambda * a + (1 - lambda) * b`, evaluated in `f64`.
pub fn mix_images(a: &ImageBatch, b: &ImageBatch, lambda: f64) -> Result<ImageBatch> {
    a.same_shape(b)?;
    check_lambda(lambda)?;
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| mix_pixel(x, y, lambda))
        .collect();
    let [n, c, h, w] = a.dims();
    ImageBatch::new(n, c, h, w, data)
}

/// Elementwise `lambda * ya + (1 - lambda) * yb`.
pub fn mix_labels(ya: &LabelBatch, yb: &LabelBatch, lambda: f64) -> Result<LabelBatch> {
    ya.same_shape(yb)?;
    check_lambda(lambda)?;
    let data = ya
        .data()
        .iter()
        .zip(yb.data())
        .map(|(&x, &y)| mix_label(x, y, lambda))
        .collect();
    LabelBatch::new(ya.len(), ya.classes(), data)
}

/// Multiplies each pixel by the mask, broadcast over samples and channels.
pub fn apply_mask(images: &ImageBatch, mask: &BinaryMask) -> Result<ImageBatch> {
    if mask.height() != images.height() {
        return Err(Error::DimensionMismatch {
            what: "mask height",
            expected: images.height(),
            found: mask.height(),
        });
    }
    if mask.width() != images.width() {
        return Err(Error::DimensionMismatch {
            what: "mask width",
            expected: images.width(),
            found: mask.width(),
        });
    }
    let plane = images.height() * images.width();
    let data = images
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| v * f32::from(mask.data()[i % plane]))
        .collect();
    let [n, c, h, w] = images.dims();
    ImageBatch::new(n, c, h, w, data)
}

/// Scalars used for one sample (or the whole minibatch).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleParams {
    /// Weight on the A side. For CutMix this is `1 - effective_area_ratio`.
    pub lambda: f64,
    pub eta: Option<f64>,
    pub region: Option<CutRegion>,
}

impl SampleParams {
    pub fn mix(lambda: f64) -> Self {
        Self {
            lambda,
            eta: None,
            region: None,
        }
    }

    pub fn with_region(lambda: f64, eta: f64, region: CutRegion) -> Self {
        Self {
            lambda,
            eta: Some(eta),
            region: Some(region),
        }
    }
}

/// What an operator did, for audits and logs.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AppliedRecord {
    pub method: Method,
    /// Gate outcome; `false` means the batch passed through untouched.
    pub applied: bool,
    pub per_sample: bool,
    pub permutation: Option<Vec<usize>>,
    /// One entry per minibatch, or one per sample in per-sample mode.
    pub params: Vec<SampleParams>,
    /// Draws consumed from the stream.
    pub draws: u64,
}

impl AppliedRecord {
    fn skipped(method: Method, per_sample: bool, draws: u64) -> Self {
        Self {
            method,
            applied: false,
            per_sample,
            permutation: None,
            params: Vec::new(),
            draws,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        self.params.first().map(|p| p.lambda)
    }

    pub fn eta(&self) -> Option<f64> {
        self.params.first().and_then(|p| p.eta)
    }

    pub fn region(&self) -> Option<CutRegion> {
        self.params.first().and_then(|p| p.region)
    }
}

/// Operator output.
#[derive(Clone, Debug, PartialEq)]
pub struct Augmented {
    pub images: ImageBatch,
    pub labels: LabelBatch,
    pub record: AppliedRecord,
}

fn prepare(images: &ImageBatch, labels: &LabelBatch, policy: &AugmentPolicy, expected: Method) -> Result<()> {
    if policy.method != expected {
        return Err(Error::MethodMismatch {
            expected: expected.as_str(),
            found: policy.method.as_str(),
        });
    }
    policy.validate()?;
    validate_batch(images, labels)
}

fn draw_lambda(spec: LambdaSpec, rng: &mut RngStream) -> f64 {
    match spec {
        LambdaSpec::Beta11 => rng.sample_beta11(),
        LambdaSpec::Fixed(v) => v,
    }
}

fn draw_eta(spec: RatioSpec, rng: &mut RngStream) -> f64 {
    match spec {
        RatioSpec::OneMinusEtaBeta11 => rng.sample_beta11(),
        RatioSpec::Fixed(beta) => 1.0 - beta,
    }
}

fn draw_region(center: CenterSpec, rng: &mut RngStream, width: usize, height: usize, eta: f64) -> Result<CutRegion> {
    match center {
        CenterSpec::Uniform => geometry::sample_cut_region(rng, width, height, eta),
        CenterSpec::Interior => geometry::sample_interior_cut_region(rng, width, height, eta),
        CenterSpec::Fixed { x, y } => geometry::cut_region_at(width, height, eta, x, y),
    }
}

fn draw_params(
    n: usize,
    per_sample: bool,
    rng: &mut RngStream,
    mut draw: impl FnMut(&mut RngStream) -> Result<SampleParams>,
) -> Result<Vec<SampleParams>> {
    let count = if per_sample { n } else { 1 };
    (0..count).map(|_| draw(rng)).collect()
}

fn params_for(params: &[SampleParams], i: usize) -> &SampleParams {
    if params.len() == 1 {
        &params[0]
    } else {
        &params[i]
    }
}

fn check_params(params: &[SampleParams], n: usize) -> Result<()> {
    if params.len() != 1 && params.len() != n {
        return Err(Error::DimensionMismatch {
            what: "parameter sets (1 or one per sample)",
            expected: n,
            found: params.len(),
        });
    }
    for p in params {
        check_lambda(p.lambda)?;
    }
    Ok(())
}

fn check_pairing(pairing: &PairedBatch, n: usize) -> Result<()> {
    if pairing.len() != n {
        return Err(Error::DimensionMismatch {
            what: "pairing length",
            expected: n,
            found: pairing.len(),
        });
    }
    Ok(())
}

fn check_region(region: &CutRegion, images: &ImageBatch) -> Result<()> {
    if region.width != images.width() || region.height != images.height() {
        return Err(Error::InvalidShape("region dimensions differ from image dimensions"));
    }
    Ok(())
}

fn mixed_labels(labels: &LabelBatch, pairing: &PairedBatch, params: &[SampleParams]) -> Result<LabelBatch> {
    let k = labels.classes();
    let mut data = Vec::with_capacity(labels.data().len());
    for (i, &j) in pairing.index_map().iter().enumerate() {
        let lambda = params_for(params, i).lambda;
        data.extend(
            labels
                .row(i)
                .iter()
                .zip(labels.row(j))
                .map(|(&a, &b)| mix_label(a, b, lambda)),
        );
    }
    LabelBatch::new(labels.len(), k, data)
}

/// Per-sample pixel kernel shared by the four operators.
fn map_pixels(
    images: &ImageBatch,
    pairing: Option<&PairedBatch>,
    params: &[SampleParams],
    mut pixel: impl FnMut(&SampleParams, bool, f32, f32) -> f32,
) -> Result<ImageBatch> {
    let [n, c, h, w] = images.dims();
    for p in params {
        if let Some(region) = &p.region {
            check_region(region, images)?;
        }
    }
    let mut data = Vec::with_capacity(images.data().len());
    for i in 0..n {
        let p = params_for(params, i);
        let a = images.sample(i);
        let b = images.sample(pairing.map_or(i, |pb| pb.index_map()[i]));
        let region = p.region.unwrap_or(CutRegion::empty(w, h));
        for ch in 0..c {
            for y in 0..h {
                for x in 0..w {
                    let at = (ch * h + y) * w + x;
                    data.push(pixel(p, region.contains(x, y), a[at], b[at]));
                }
            }
        }
    }
    ImageBatch::new(n, c, h, w, data)
}

/// `mask ⊙ (λ·A + (1-λ)·B)` and `λ·y_A + (1-λ)·y_B` for given scalars.
pub fn mixcut_apply(
    images: &ImageBatch,
    labels: &LabelBatch,
    pairing: &PairedBatch,
    params: &[SampleParams],
) -> Result<(ImageBatch, LabelBatch)> {
    validate_batch(images, labels)?;
    check_pairing(pairing, images.len())?;
    check_params(params, images.len())?;
    let out = map_pixels(images, Some(pairing), params, |p, inside, a, b| {
        let mixed = mix_pixel(a, b, p.lambda);
        if inside {
            0.0
        } else {
            mixed
        }
    })?;
    Ok((out, mixed_labels(labels, pairing, params)?))
}

/// Mixup for given scalars: no mask.
pub fn mixup_apply(
    images: &ImageBatch,
    labels: &LabelBatch,
    pairing: &PairedBatch,
    params: &[SampleParams],
) -> Result<(ImageBatch, LabelBatch)> {
    validate_batch(images, labels)?;
    check_pairing(pairing, images.len())?;
    check_params(params, images.len())?;
    let out = map_pixels(images, Some(pairing), params, |p, _, a, b| mix_pixel(a, b, p.lambda))?;
    Ok((out, mixed_labels(labels, pairing, params)?))
}

/// Cutout for given regions: zero the region, leave labels alone.
pub fn cutout_apply(images: &ImageBatch, params: &[SampleParams]) -> Result<ImageBatch> {
    images.validate()?;
    check_params(params, images.len())?;
    map_pixels(images, None, params, |_, inside, a, _| if inside { 0.0 } else { a })
}

/// CutMix for given regions: B inside the region, A outside. Label weights
/// come from `params[..].lambda` (the A-side weight).
pub fn cutmix_apply(
    images: &ImageBatch,
    labels: &LabelBatch,
    pairing: &PairedBatch,
    params: &[SampleParams],
) -> Result<(ImageBatch, LabelBatch)> {
    validate_batch(images, labels)?;
    check_pairing(pairing, images.len())?;
    check_params(params, images.len())?;
    let out = map_pixels(
        images,
        Some(pairing),
        params,
        |_, inside, a, b| if inside { b } else { a },
    )?;
    Ok((out, mixed_labels(labels, pairing, params)?))
}

/// Scalars drawn for one operator call, in contract order.
#[derive(Clone, Debug, PartialEq)]
pub struct DrawPlan {
    pub applied: bool,
    pub pairing: Option<PairedBatch>,
    pub params: Vec<SampleParams>,
    pub draws: u64,
}

/// Takes every draw `policy.method` needs for an `n`-sample batch of
/// `width x height` images. `none` draws nothing.
pub fn draw_plan(
    policy: &AugmentPolicy,
    n: usize,
    width: usize,
    height: usize,
    rng: &mut RngStream,
) -> Result<DrawPlan> {
    policy.validate()?;
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let start = rng.draws();
    let mut plan = DrawPlan {
        applied: false,
        pairing: None,
        params: Vec::new(),
        draws: 0,
    };
    if policy.method == Method::None {
        return Ok(plan);
    }
    if !rng.bernoulli(policy.gamma)? {
        plan.draws = rng.draws() - start;
        return Ok(plan);
    }
    plan.applied = true;
    if policy.method != Method::Cutout {
        plan.pairing = Some(shuffle_pair(n, rng)?);
    }
    plan.params = draw_params(n, policy.per_sample, rng, |rng| match policy.method {
        Method::MixCut => {
            let lambda = draw_lambda(policy.lambda, rng);
            let eta = draw_eta(policy.beta, rng);
            let region = draw_region(policy.center, rng, width, height, eta)?;
            Ok(SampleParams::with_region(lambda, eta, region))
        }
        Method::Mixup => Ok(SampleParams::mix(draw_lambda(policy.lambda, rng))),
        Method::Cutout => {
            let eta = draw_eta(policy.beta, rng);
            let region = draw_region(policy.center, rng, width, height, eta)?;
            Ok(SampleParams::with_region(1.0, eta, region))
        }
        Method::CutMix => {
            let eta = draw_eta(policy.beta, rng);
            let region = draw_region(policy.center, rng, width, height, eta)?;
            Ok(SampleParams::with_region(
                1.0 - region.effective_area_ratio(),
                eta,
                region,
            ))
        }
        Method::None => unreachable!(),
    })?;
    plan.draws = rng.draws() - start;
    Ok(plan)
}

fn run(
    images: &ImageBatch,
    labels: &LabelBatch,
    policy: &AugmentPolicy,
    rng: &mut RngStream,
    expected: Method,
) -> Result<Augmented> {
    prepare(images, labels, policy, expected)?;
    let plan = draw_plan(policy, images.len(), images.width(), images.height(), rng)?;
    if !plan.applied {
        return Ok(passthrough(images, labels, policy, plan.draws));
    }
    let pairing = plan.pairing.unwrap_or_else(|| PairedBatch::identity(images.len()));
    let (out_images, out_labels) = match expected {
        Method::MixCut => mixcut_apply(images, labels, &pairing, &plan.params)?,
        Method::Mixup => mixup_apply(images, labels, &pairing, &plan.params)?,
        Method::CutMix => cutmix_apply(images, labels, &pairing, &plan.params)?,
        Method::Cutout => (cutout_apply(images, &plan.params)?, labels.clone()),
        Method::None => (images.clone(), labels.clone()),
    };
    let permutation = (expected != Method::Cutout).then(|| pairing.into_index_map());
    Ok(Augmented {
        images: out_images,
        labels: out_labels,
        record: AppliedRecord {
            method: policy.method,
            applied: true,
            per_sample: policy.per_sample,
            permutation,
            params: plan.params,
            draws: plan.draws,
        },
    })
}

/// MixCut: interpolate each sample with its shuffled partner, then erase one square.
pub fn mixcut_batch(
    images: &ImageBatch,
    labels: &LabelBatch,
    policy: &AugmentPolicy,
    rng: &mut RngStream,
) -> Result<Augmented> {
    run(images, labels, policy, rng, Method::MixCut)
}

/// Cutout: erase a square of fixed area ratio β; labels untouched.
pub fn cutout_batch(
    images: &ImageBatch,
    labels: &LabelBatch,
    policy: &AugmentPolicy,
    rng: &mut RngStream,
) -> Result<Augmented> {
    run(images, labels, policy, rng, Method::Cutout)
}

/// Mixup: interpolate each sample with its shuffled partner.
pub fn mixup_batch(
    images: &ImageBatch,
    labels: &LabelBatch,
    policy: &AugmentPolicy,
    rng: &mut RngStream,
) -> Result<Augmented> {
    run(images, labels, policy, rng, Method::Mixup)
}

/// CutMix: paste the partner's pixels inside a square; label weight on the
/// partner is the clipped area ratio.
pub fn cutmix_batch(
    images: &ImageBatch,
    labels: &LabelBatch,
    policy: &AugmentPolicy,
    rng: &mut RngStream,
) -> Result<Augmented> {
    run(images, labels, policy, rng, Method::CutMix)
}

/// Dispatches on `policy.method`; `none` is the identity and draws nothing.
pub fn apply_policy(
    images: &ImageBatch,
    labels: &LabelBatch,
    policy: &AugmentPolicy,
    rng: &mut RngStream,
) -> Result<Augmented> {
    run(images, labels, policy, rng, policy.method)
}

fn passthrough(images: &ImageBatch, labels: &LabelBatch, policy: &AugmentPolicy, draws: u64) -> Augmented {
    Augmented {
        images: images.clone(),
        labels: labels.clone(),
        record: AppliedRecord::skipped(policy.method, policy.per_sample, draws),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{CenterSpec, LambdaSpec, RatioSpec};

    fn batch(n: usize, h: usize, w: usize) -> (ImageBatch, LabelBatch) {
        let images = ImageBatch::from_fn(n, 2, h, w, |i, c, y, x| {
            (1 + ((i * 31 + c * 17 + y * 5 + x * 3) % 250)) as f32 / 255.0
        })
        .unwrap();
        let classes: Vec<usize> = (0..n).map(|i| i % 4).collect();
        (images, LabelBatch::one_hot(&classes, 4).unwrap())
    }

    #[test]
    fn shuffle_single_and_permutation() {
        let mut rng = RngStream::new(1);
        assert_eq!(shuffle_pair(1, &mut rng).unwrap().index_map(), &[0]);
        assert_eq!(rng.draws(), 0);
        for n in 1..20 {
            let p = shuffle_pair(n, &mut rng).unwrap();
            let mut sorted = p.index_map().to_vec();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        }
        assert_eq!(shuffle_pair(0, &mut rng), Err(Error::EmptyBatch));
    }

    #[test]
    fn shuffle_consumes_n_minus_one_draws() {
        let mut rng = RngStream::new(4);
        shuffle_pair(9, &mut rng).unwrap();
        assert_eq!(rng.draws(), 8);
    }

    #[test]
    fn shuffle_of_three_is_uniform() {
        let mut rng = RngStream::new(77);
        let perms: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut counts = [0u32; 6];
        let trials = 60_000;
        for _ in 0..trials {
            let p = shuffle_pair(3, &mut rng).unwrap();
            let k = perms.iter().position(|q| q[..] == *p.index_map()).unwrap();
            counts[k] += 1;
        }
        for c in counts {
            let f = f64::from(c) / f64::from(trials);
            assert!((f - 1.0 / 6.0).abs() < 0.01, "frequency {f}");
        }
    }

    #[test]
    fn from_index_map_rejects_non_permutations() {
        assert!(PairedBatch::from_index_map(alloc::vec![0, 0]).is_err());
        assert!(PairedBatch::from_index_map(alloc::vec![0, 2]).is_err());
        assert!(PairedBatch::from_index_map(alloc::vec![1, 0]).is_ok());
    }

    #[test]
    fn mix_images_endpoints_and_midpoint() {
        let (a, _) = batch(2, 4, 4);
        let b = ImageBatch::from_fn(2, 2, 4, 4, |_, _, y, x| (y * 4 + x) as f32 / 16.0).unwrap();
        assert_eq!(mix_images(&a, &b, 1.0).unwrap(), a);
        assert_eq!(mix_images(&a, &b, 0.0).unwrap(), b);
        let pa = ImageBatch::new(1, 1, 1, 1, alloc::vec![0.2]).unwrap();
        let pb = ImageBatch::new(1, 1, 1, 1, alloc::vec![0.6]).unwrap();
        let m = mix_images(&pa, &pb, 0.5).unwrap();
        assert!((m.data()[0] - 0.4).abs() < 1e-7);
        assert!(mix_images(&a, &pa, 0.5).is_err());
        assert!(mix_images(&a, &b, 1.1).is_err());
    }

    #[test]
    fn mix_labels_examples() {
        let ya = LabelBatch::one_hot(&[1], 4).unwrap();
        let yb = LabelBatch::one_hot(&[3], 4).unwrap();
        assert_eq!(mix_labels(&ya, &yb, 1.0).unwrap(), ya);
        let m = mix_labels(&ya, &yb, 0.3).unwrap();
        assert_eq!(m.row(0)[0], 0.0);
        assert!((m.row(0)[1] - 0.3).abs() < 1e-15);
        assert!((m.row(0)[3] - 0.7).abs() < 1e-15);
        assert!(m.validate().is_ok());
        assert!(mix_labels(&ya, &LabelBatch::one_hot(&[1], 5).unwrap(), 0.5).is_err());
    }

    #[test]
    fn apply_mask_examples() {
        let (imgs, _) = batch(3, 8, 8);
        assert_eq!(apply_mask(&imgs, &BinaryMask::ones(8, 8)).unwrap(), imgs);
        let all = apply_mask(&imgs, &CutRegion::full(8, 8).to_mask()).unwrap();
        assert!(all.data().iter().all(|&v| v == 0.0));
        let region = CutRegion::new(2, 6, 2, 6, 8, 8).unwrap();
        let out = apply_mask(&imgs, &region.to_mask()).unwrap();
        for i in 0..3 {
            for c in 0..2 {
                for y in 0..8 {
                    for x in 0..8 {
                        let expect = if region.contains(x, y) {
                            0.0
                        } else {
                            imgs.get(i, c, y, x)
                        };
                        assert_eq!(out.get(i, c, y, x), expect);
                    }
                }
            }
        }
        assert!(apply_mask(&imgs, &BinaryMask::ones(8, 7)).is_err());
    }

    #[test]
    fn mixcut_gate_closed_is_identity() {
        let (imgs, labels) = batch(4, 8, 8);
        let mut rng = RngStream::new(3);
        let out = mixcut_batch(&imgs, &labels, &AugmentPolicy::mixcut().with_gamma(0.0), &mut rng).unwrap();
        assert_eq!(out.images, imgs);
        assert_eq!(out.labels, labels);
        assert!(!out.record.applied);
        assert_eq!(out.record.draws, 1);
    }

    #[test]
    fn mixcut_double_degenerate_is_identity() {
        let (imgs, labels) = batch(5, 8, 8);
        let policy = AugmentPolicy::mixcut()
            .with_gamma(1.0)
            .with_lambda(LambdaSpec::Fixed(1.0))
            .with_beta(RatioSpec::Fixed(0.0));
        let out = mixcut_batch(&imgs, &labels, &policy, &mut RngStream::new(9)).unwrap();
        assert!(out.record.applied);
        assert_eq!(out.images, imgs);
        assert_eq!(out.labels, labels);
    }

    #[test]
    fn mixcut_forced_region_brute_force() {
        let (imgs, labels) = batch(2, 8, 8);
        let pairing = PairedBatch::from_index_map(alloc::vec![1, 0]).unwrap();
        let region = CutRegion::new(2, 6, 2, 6, 8, 8).unwrap();
        let params = [SampleParams::with_region(0.5, 0.75, region)];
        let (out, lbl) = mixcut_apply(&imgs, &labels, &pairing, &params).unwrap();
        for i in 0..2 {
            let j = 1 - i;
            for c in 0..2 {
                for y in 0..8 {
                    for x in 0..8 {
                        let v = out.get(i, c, y, x);
                        if (2..6).contains(&x) && (2..6).contains(&y) {
                            assert_eq!(v, 0.0);
                        } else {
                            let want = 0.5 * f64::from(imgs.get(i, c, y, x)) + 0.5 * f64::from(imgs.get(j, c, y, x));
                            assert_eq!(v, want as f32);
                        }
                    }
                }
            }
            for k in 0..4 {
                assert_eq!(lbl.row(i)[k], 0.5 * labels.row(i)[k] + 0.5 * labels.row(j)[k]);
            }
        }
    }

    #[test]
    fn mixcut_draw_order() {
        let (imgs, labels) = batch(4, 10, 12);
        let policy = AugmentPolicy::mixcut().with_gamma(1.0);
        let mut rng = RngStream::new(21);
        let mut twin = rng.clone();
        let out = mixcut_batch(&imgs, &labels, &policy, &mut rng).unwrap();
        assert!(twin.bernoulli(1.0).unwrap());
        let pairing = shuffle_pair(4, &mut twin).unwrap();
        let lambda = twin.sample_beta11();
        let eta = twin.sample_beta11();
        let cx = twin.sample_uniform(0.0, 12.0).unwrap();
        let cy = twin.sample_uniform(0.0, 10.0).unwrap();
        let region = geometry::cut_region_at(12, 10, eta, cx, cy).unwrap();
        assert_eq!(out.record.permutation.as_deref(), Some(pairing.index_map()));
        assert_eq!(
            out.record.params,
            alloc::vec![SampleParams::with_region(lambda, eta, region)]
        );
        assert_eq!(out.record.draws, 1 + 3 + 4);
        assert_eq!(rng.draws(), twin.draws());
    }

    #[test]
    fn mixcut_labels_do_not_depend_on_region() {
        let (imgs, labels) = batch(3, 8, 8);
        let pairing = PairedBatch::from_index_map(alloc::vec![2, 0, 1]).unwrap();
        let small = [SampleParams::with_region(
            0.3,
            0.9,
            CutRegion::new(1, 3, 1, 3, 8, 8).unwrap(),
        )];
        let big = [SampleParams::with_region(0.3, 0.1, CutRegion::full(8, 8))];
        let (_, a) = mixcut_apply(&imgs, &labels, &pairing, &small).unwrap();
        let (_, b) = mixcut_apply(&imgs, &labels, &pairing, &big).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cutout_examples() {
        let (imgs, labels) = batch(2, 48, 48);
        let zero_beta = AugmentPolicy::cutout().with_beta(RatioSpec::Fixed(0.0));
        let out = cutout_batch(&imgs, &labels, &zero_beta, &mut RngStream::new(0)).unwrap();
        assert_eq!(out.images, imgs);

        let policy = AugmentPolicy::cutout().with_center(CenterSpec::Interior);
        let mut rng = RngStream::new(12);
        for _ in 0..50 {
            let out = cutout_batch(&imgs, &labels, &policy, &mut rng).unwrap();
            for i in 0..2 {
                for c in 0..2 {
                    let plane = &out.images.sample(i)[c * 48 * 48..(c + 1) * 48 * 48];
                    assert_eq!(plane.iter().filter(|&&v| v == 0.0).count(), 576);
                }
            }
            assert_eq!(out.labels, labels);
            assert_eq!(out.record.draws, 3);
        }
    }

    #[test]
    fn mixup_matches_mixcut_with_empty_mask() {
        let (imgs, labels) = batch(6, 8, 8);
        for seed in 0..20 {
            let mixup = mixup_batch(&imgs, &labels, &AugmentPolicy::mixup(), &mut RngStream::new(seed)).unwrap();
            let mixcut_policy = AugmentPolicy::mixcut().with_gamma(1.0).with_beta(RatioSpec::Fixed(0.0));
            let mixcut = mixcut_batch(&imgs, &labels, &mixcut_policy, &mut RngStream::new(seed)).unwrap();
            assert_eq!(mixup.images, mixcut.images);
            assert_eq!(mixup.labels, mixcut.labels);
            assert_eq!(mixup.record.lambda(), mixcut.record.lambda());
        }
        let forced = AugmentPolicy::mixup().with_lambda(LambdaSpec::Fixed(1.0));
        let out = mixup_batch(&imgs, &labels, &forced, &mut RngStream::new(1)).unwrap();
        assert_eq!(out.images, imgs);
        assert_eq!(out.labels, labels);
    }

    #[test]
    fn cutmix_endpoints_and_partition() {
        let (imgs, labels) = batch(3, 8, 8);
        let pairing = PairedBatch::from_index_map(alloc::vec![1, 2, 0]).unwrap();
        let empty = [SampleParams::with_region(1.0, 1.0, CutRegion::empty(8, 8))];
        let (out, lbl) = cutmix_apply(&imgs, &labels, &pairing, &empty).unwrap();
        assert_eq!((out, lbl), (imgs.clone(), labels.clone()));
        let full = [SampleParams::with_region(0.0, 0.0, CutRegion::full(8, 8))];
        let (out, lbl) = cutmix_apply(&imgs, &labels, &pairing, &full).unwrap();
        assert_eq!(out, imgs.gather(pairing.index_map()).unwrap());
        assert_eq!(lbl, labels.gather(pairing.index_map()).unwrap());

        let mut rng = RngStream::new(5);
        let policy = AugmentPolicy::cutmix().with_gamma(1.0);
        let out = cutmix_batch(&imgs, &labels, &policy, &mut rng).unwrap();
        let region = out.record.region().unwrap();
        let perm = out.record.permutation.clone().unwrap();
        let ratio = region.effective_area_ratio();
        #[allow(clippy::needless_range_loop)]
        for i in 0..3 {
            let mut from_b = 0;
            for y in 0..8 {
                for x in 0..8 {
                    let v = out.images.get(i, 0, y, x);
                    let (a, b) = (imgs.get(i, 0, y, x), imgs.get(perm[i], 0, y, x));
                    assert!(v == a || v == b);
                    if region.contains(x, y) {
                        assert_eq!(v, b);
                        from_b += 1;
                    } else {
                        assert_eq!(v, a);
                    }
                }
            }
            assert_eq!(from_b, region.area());
            for k in 0..4 {
                let want = (1.0 - ratio) * labels.row(i)[k] + ratio * labels.row(perm[i])[k];
                assert!((out.labels.row(i)[k] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn per_sample_mode_draws_one_set_per_sample() {
        let (imgs, labels) = batch(4, 8, 8);
        let policy = AugmentPolicy::mixcut().with_gamma(1.0).with_per_sample(true);
        let out = mixcut_batch(&imgs, &labels, &policy, &mut RngStream::new(31)).unwrap();
        assert_eq!(out.record.params.len(), 4);
        assert_eq!(out.record.draws, 1 + 3 + 4 * 4);
        assert!(out.labels.validate().is_ok());
    }

    #[test]
    fn apply_policy_dispatch() {
        let (imgs, labels) = batch(4, 8, 8);
        let none = apply_policy(&imgs, &labels, &AugmentPolicy::none(), &mut RngStream::new(0)).unwrap();
        assert_eq!((none.images, none.labels), (imgs.clone(), labels.clone()));
        let a = apply_policy(&imgs, &labels, &AugmentPolicy::mixcut(), &mut RngStream::new(8)).unwrap();
        let b = mixcut_batch(&imgs, &labels, &AugmentPolicy::mixcut(), &mut RngStream::new(8)).unwrap();
        assert_eq!(a, b);
        let c = apply_policy(&imgs, &labels, &AugmentPolicy::cutout(), &mut RngStream::new(8)).unwrap();
        assert_eq!(c.labels, labels);
    }

    #[test]
    fn wrong_method_and_bad_policy_are_errors() {
        let (imgs, labels) = batch(2, 4, 4);
        let mut rng = RngStream::new(0);
        assert!(matches!(
            mixup_batch(&imgs, &labels, &AugmentPolicy::mixcut(), &mut rng),
            Err(Error::MethodMismatch { .. })
        ));
        assert_eq!(
            apply_policy(&imgs, &labels, &AugmentPolicy::mixcut().with_gamma(1.5), &mut rng),
            Err(Error::InvalidProbability(1.5))
        );
        assert_eq!(rng.draws(), 0);
    }
}
