//! Variable-component Gaussian-mixture background model (MOG2) with optional
//! shadow detection.
//!
//! Unlike [`Mog`](crate::mog::Mog), the number of components per pixel
//! varies: every frame each weight pays a small complexity prior, and
//! components whose weight drops to zero are deleted. Matching uses the
//! squared Mahalanobis distance against `var_threshold`.

use crate::error::{Error, Result};
use crate::frame::{Frame, Mask, LABEL_BACKGROUND, LABEL_FOREGROUND, LABEL_SHADOW};
use crate::mog::{background_prefix_len_iter, MixtureComponent};
use crate::subtractor::{band_rows, check_dimensions, BackgroundSubtractor};

/// Upper bound on components per pixel.
pub const MOG2_MAX_COMPONENTS: usize = 5;
/// Variance of newly spawned components (15 squared).
pub const MOG2_VAR_INIT: f64 = 225.0;
/// Lower variance clamp.
pub const MOG2_VAR_MIN: f64 = 4.0;
/// Upper variance clamp (5 times the initial variance).
pub const MOG2_VAR_MAX: f64 = 5.0 * MOG2_VAR_INIT;
/// Per-frame weight tax that prunes unsupported components.
pub const MOG2_COMPLEXITY_PRIOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mog2Params {
    /// Frames over which the learning rate ramps down (alpha = 1/min(t, history)).
    pub history: u32,
    /// Squared-Mahalanobis match threshold.
    pub var_threshold: f64,
    /// Label darkened-background pixels as shadow (127) instead of foreground.
    pub detect_shadows: bool,
    /// Cumulative-weight threshold selecting the background prefix, in (0, 1].
    pub background_ratio: f64,
    /// Lower bound of the shadow intensity ratio, in (0, 1).
    pub shadow_threshold: f64,
}

impl Default for Mog2Params {
    fn default() -> Self {
        Self {
            history: 200,
            var_threshold: 16.0,
            detect_shadows: true,
            background_ratio: 0.9,
            shadow_threshold: 0.5,
        }
    }
}

impl Mog2Params {
    pub fn validate(&self) -> Result<()> {
        if self.history < 1 {
            return Err(Error::invalid_parameter("history", "must be at least 1"));
        }
        if !(self.var_threshold > 0.0) {
            return Err(Error::invalid_parameter(
                "var_threshold",
                format!("{} is not positive", self.var_threshold),
            ));
        }
        if !(self.background_ratio > 0.0 && self.background_ratio <= 1.0) {
            return Err(Error::invalid_parameter(
                "background_ratio",
                format!("{} is outside (0, 1]", self.background_ratio),
            ));
        }
        if !(self.shadow_threshold > 0.0 && self.shadow_threshold < 1.0) {
            return Err(Error::invalid_parameter(
                "shadow_threshold",
                format!("{} is outside (0, 1)", self.shadow_threshold),
            ));
        }
        Ok(())
    }
}

/// True iff `x` looks like a darkened version of a background pixel with mean
/// `mean_bg`: the intensity ratio lies in `[tau, 1)`. Always false when the
/// mean is not positive.
pub fn shadow_test(x: f64, mean_bg: f64, tau: f64) -> bool {
    if mean_bg <= 0.0 {
        return false;
    }
    let ratio = x / mean_bg;
    tau <= ratio && ratio < 1.0
}

/// Per-pixel MOG2 model over a fixed frame size.
#[derive(Debug)]
pub struct Mog2 {
    params: Mog2Params,
    width: u32,
    height: u32,
    frames_seen: u64,
    components: Vec<MixtureComponent>,
    counts: Vec<u8>,
    workers: usize,
}

#[derive(Clone, Copy)]
struct StepConfig {
    alpha: f64,
    var_threshold: f64,
    background_ratio: f64,
    detect_shadows: bool,
    shadow_threshold: f64,
}

impl Mog2 {
    pub fn new(params: Mog2Params, width: u32, height: u32) -> Result<Self> {
        params.validate()?;
        if width == 0 {
            return Err(Error::invalid_parameter("width", "must be at least 1"));
        }
        if height == 0 {
            return Err(Error::invalid_parameter("height", "must be at least 1"));
        }
        let pixels = width as usize * height as usize;
        Ok(Self {
            params,
            width,
            height,
            frames_seen: 0,
            components: vec![MixtureComponent::default(); pixels * MOG2_MAX_COMPONENTS],
            counts: vec![0; pixels],
            workers: 1,
        })
    }

    pub fn params(&self) -> &Mog2Params {
        &self.params
    }

    /// Components of one pixel in weight order (heaviest first).
    pub fn components_at(&self, x: u32, y: u32) -> &[MixtureComponent] {
        let p = y as usize * self.width as usize + x as usize;
        &self.components[p * MOG2_MAX_COMPONENTS..p * MOG2_MAX_COMPONENTS + self.counts[p] as usize]
    }

    /// Scans the whole model for violated invariants; used by instrumented
    /// acceptance runs. Returns a description of the first violation found.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (p, &count) in self.counts.iter().enumerate() {
            let count = count as usize;
            if count > MOG2_MAX_COMPONENTS {
                return Err(format!(
                    "pixel {p}: {count} components exceeds {MOG2_MAX_COMPONENTS}"
                ));
            }
            if count == 0 {
                continue;
            }
            let base = p * MOG2_MAX_COMPONENTS;
            let comps = &self.components[base..base + count];
            let sum: f64 = comps.iter().map(|c| c.weight).sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(format!("pixel {p}: weight sum {sum} deviates from 1"));
            }
            let mut prev = f64::INFINITY;
            for (j, c) in comps.iter().enumerate() {
                if c.weight < 0.0 {
                    return Err(format!("pixel {p} component {j}: negative weight"));
                }
                if !(MOG2_VAR_MIN..=MOG2_VAR_MAX).contains(&c.variance) {
                    return Err(format!(
                        "pixel {p} component {j}: variance {} outside [{MOG2_VAR_MIN}, {MOG2_VAR_MAX}]",
                        c.variance
                    ));
                }
                if c.weight > prev {
                    return Err(format!("pixel {p}: components not sorted by weight"));
                }
                prev = c.weight;
            }
        }
        Ok(())
    }

    fn step_config(&self) -> StepConfig {
        let t = (self.frames_seen + 1).min(u64::from(self.params.history));
        StepConfig {
            alpha: 1.0 / t as f64,
            var_threshold: self.params.var_threshold,
            background_ratio: self.params.background_ratio,
            detect_shadows: self.params.detect_shadows,
            shadow_threshold: self.params.shadow_threshold,
        }
    }

    fn process_band(
        cfg: StepConfig,
        pixels: &[u8],
        components: &mut [MixtureComponent],
        counts: &mut [u8],
        labels: &mut [u8],
    ) {
        const K: usize = MOG2_MAX_COMPONENTS;
        for (i, &value) in pixels.iter().enumerate() {
            let x = f64::from(value);
            let count = counts[i] as usize;
            let comps = &mut components[i * K..(i + 1) * K];

            let mut matched = None;
            for (j, c) in comps[..count].iter().enumerate() {
                let d = x - c.mean;
                if d * d < cfg.var_threshold * c.variance {
                    matched = Some(j);
                    break;
                }
            }

            // Weight update with the complexity prior, deleting components
            // whose weight falls to zero. A matched component always keeps a
            // positive weight, so it survives the compaction.
            let mut kept = 0usize;
            let mut matched_pos = None;
            for j in 0..count {
                let mut c = comps[j];
                let is_match = matched == Some(j);
                let target = if is_match { 1.0 } else { 0.0 };
                c.weight += cfg.alpha * (target - c.weight) - cfg.alpha * MOG2_COMPLEXITY_PRIOR;
                if c.weight > 0.0 {
                    if is_match {
                        matched_pos = Some(kept);
                    }
                    comps[kept] = c;
                    kept += 1;
                }
            }

            if let Some(j) = matched_pos {
                let c = &mut comps[j];
                let rho = (cfg.alpha / c.weight).min(1.0);
                c.mean += rho * (x - c.mean);
                let d = x - c.mean;
                c.variance =
                    (c.variance + rho * (d * d - c.variance)).clamp(MOG2_VAR_MIN, MOG2_VAR_MAX);
            } else {
                // No match: spawn a component, replacing the lightest one
                // (the list is weight-sorted, so that is the last slot).
                let slot = if kept < K {
                    kept += 1;
                    kept - 1
                } else {
                    K - 1
                };
                comps[slot] = MixtureComponent {
                    weight: cfg.alpha,
                    mean: x,
                    variance: MOG2_VAR_INIT,
                };
            }

            let sum: f64 = comps[..kept].iter().map(|c| c.weight).sum();
            for c in &mut comps[..kept] {
                c.weight /= sum;
            }
            counts[i] = kept as u8;

            let matched_pos = sort_by_weight(&mut comps[..kept], matched_pos);

            let background = background_prefix_len_iter(
                comps[..kept].iter().map(|c| c.weight),
                kept,
                cfg.background_ratio,
            );
            labels[i] = match matched_pos {
                Some(pos) if pos < background => LABEL_BACKGROUND,
                _ => {
                    if cfg.detect_shadows
                        && shadow_test(x, comps[0].mean, cfg.shadow_threshold)
                    {
                        LABEL_SHADOW
                    } else {
                        LABEL_FOREGROUND
                    }
                }
            };
        }
    }
}

/// Stable insertion sort by weight descending (ties keep the earlier
/// component first). Returns the post-sort position of `track`.
fn sort_by_weight(comps: &mut [MixtureComponent], track: Option<usize>) -> Option<usize> {
    let count = comps.len();
    let mut order = [0usize; MOG2_MAX_COMPONENTS];
    for (j, slot) in order[..count].iter_mut().enumerate() {
        *slot = j;
    }
    let weight = |idx: usize, c: &[MixtureComponent]| c[idx].weight;
    for a in 1..count {
        let idx = order[a];
        let key = weight(idx, comps);
        let mut b = a;
        while b > 0 && weight(order[b - 1], comps) < key {
            order[b] = order[b - 1];
            b -= 1;
        }
        order[b] = idx;
    }
    let mut sorted = [MixtureComponent::default(); MOG2_MAX_COMPONENTS];
    for (p, &idx) in order[..count].iter().enumerate() {
        sorted[p] = comps[idx];
    }
    comps.copy_from_slice(&sorted[..count]);
    track.map(|j| order[..count].iter().position(|&idx| idx == j).unwrap())
}

impl BackgroundSubtractor for Mog2 {
    fn apply(&mut self, frame: &Frame) -> Result<Mask> {
        check_dimensions(frame, self.width, self.height)?;
        let cfg = self.step_config();
        let w = self.width as usize;
        let h = self.height as usize;
        let mut labels = vec![0u8; w * h];

        if self.workers <= 1 {
            Self::process_band(
                cfg,
                frame.data(),
                &mut self.components,
                &mut self.counts,
                &mut labels,
            );
        } else {
            let rows = band_rows(h, self.workers);
            std::thread::scope(|scope| {
                let bands = frame
                    .data()
                    .chunks(rows * w)
                    .zip(self.components.chunks_mut(rows * w * MOG2_MAX_COMPONENTS))
                    .zip(self.counts.chunks_mut(rows * w))
                    .zip(labels.chunks_mut(rows * w));
                for (((pixels, components), counts), out) in bands {
                    scope.spawn(move || Self::process_band(cfg, pixels, components, counts, out));
                }
            });
        }

        self.frames_seen += 1;
        Ok(Mask::from_labels(self.width, self.height, labels))
    }

    fn reset(&mut self) {
        self.counts.fill(0);
        self.frames_seen = 0;
    }

    fn width(&self) -> u32 {
        self.width
    }

    fn height(&self) -> u32 {
        self.height
    }

    fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    fn name(&self) -> &'static str {
        "mog2"
    }

    fn set_workers(&mut self, workers: usize) {
        self.workers = workers.max(1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::masks_equal;

    fn constant_frame(w: u32, h: u32, v: u8) -> Frame {
        Frame::filled(w, h, v).unwrap()
    }

    #[test]
    fn new_with_defaults() {
        let model = Mog2::new(Mog2Params::default(), 2, 2).unwrap();
        assert_eq!(model.frames_seen(), 0);
        for y in 0..2 {
            for x in 0..2 {
                assert!(model.components_at(x, y).is_empty());
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        let bad = Mog2Params {
            history: 0,
            ..Mog2Params::default()
        };
        assert!(Mog2::new(bad, 2, 2).is_err());
        let bad = Mog2Params {
            var_threshold: -1.0,
            ..Mog2Params::default()
        };
        match Mog2::new(bad, 2, 2).unwrap_err() {
            Error::InvalidParameter { field, .. } => assert_eq!(field, "var_threshold"),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn first_frame_is_all_foreground() {
        let mut model = Mog2::new(Mog2Params::default(), 3, 2).unwrap();
        let mask = model.apply(&constant_frame(3, 2, 100)).unwrap();
        assert!(mask.data().iter().all(|&v| v == LABEL_FOREGROUND));
    }

    #[test]
    fn second_constant_frame_is_all_background() {
        let mut model = Mog2::new(Mog2Params::default(), 3, 2).unwrap();
        model.apply(&constant_frame(3, 2, 100)).unwrap();
        let mask = model.apply(&constant_frame(3, 2, 100)).unwrap();
        assert!(mask.data().iter().all(|&v| v == LABEL_BACKGROUND));
    }

    #[test]
    fn large_step_after_convergence_is_foreground() {
        let params = Mog2Params {
            detect_shadows: false,
            ..Mog2Params::default()
        };
        let mut model = Mog2::new(params, 2, 2).unwrap();
        let frame = constant_frame(2, 2, 100);
        for _ in 0..200 {
            model.apply(&frame).unwrap();
        }
        let mask = model.apply(&constant_frame(2, 2, 250)).unwrap();
        assert!(mask.data().iter().all(|&v| v == LABEL_FOREGROUND));
    }

    #[test]
    fn shadow_test_boundaries() {
        assert!(shadow_test(100.0, 200.0, 0.5)); // ratio exactly tau
        assert!(!shadow_test(210.0, 200.0, 0.5)); // ratio >= 1
        assert!(!shadow_test(50.0, 200.0, 0.5)); // ratio below tau
        assert!(!shadow_test(10.0, 0.0, 0.5)); // degenerate mean
    }

    #[test]
    fn darkened_background_is_labelled_shadow() {
        let mut model = Mog2::new(Mog2Params::default(), 2, 2).unwrap();
        let frame = constant_frame(2, 2, 200);
        for _ in 0..50 {
            model.apply(&frame).unwrap();
        }
        let mask = model.apply(&constant_frame(2, 2, 120)).unwrap();
        assert!(mask.data().iter().all(|&v| v == LABEL_SHADOW));
    }

    #[test]
    fn plateau_stream_grows_components_constant_stays_at_one() {
        let mut model = Mog2::new(Mog2Params::default(), 1, 1).unwrap();
        let mut max_count = 0;
        for &plateau in &[30u8, 128, 220] {
            for _ in 0..100 {
                model.apply(&constant_frame(1, 1, plateau)).unwrap();
                max_count = max_count.max(model.components_at(0, 0).len());
            }
        }
        assert!(max_count >= 3, "component count peaked at {max_count}");

        let mut constant = Mog2::new(Mog2Params::default(), 1, 1).unwrap();
        for _ in 0..300 {
            constant.apply(&constant_frame(1, 1, 128)).unwrap();
            assert_eq!(constant.components_at(0, 0).len(), 1);
        }
    }

    fn noisy_frame(w: u32, h: u32, base: u8, t: u64) -> Frame {
        let data = (0..w as u64 * h as u64)
            .map(|i| {
                let mix = (i.wrapping_mul(6364136223846793005).wrapping_add(t.wrapping_mul(1442695040888963407)))
                    >> 33;
                let jitter = (mix % 21) as i16 - 10;
                (i16::from(base) + jitter).clamp(0, 255) as u8
            })
            .collect();
        Frame::new(w, h, data).unwrap()
    }

    #[test]
    fn shadow_flag_only_swaps_shadow_and_foreground() {
        let with = Mog2Params::default();
        let without = Mog2Params {
            detect_shadows: false,
            ..Mog2Params::default()
        };
        let mut a = Mog2::new(with, 12, 9).unwrap();
        let mut b = Mog2::new(without, 12, 9).unwrap();
        for t in 0..120 {
            let base = if t % 29 == 0 { 60 } else { 160 };
            let frame = noisy_frame(12, 9, base, t);
            let ma = a.apply(&frame).unwrap();
            let mb = b.apply(&frame).unwrap();
            for (&va, &vb) in ma.data().iter().zip(mb.data()) {
                match (va, vb) {
                    (LABEL_SHADOW, LABEL_FOREGROUND) => {}
                    _ => assert_eq!(va, vb, "labels may differ only between 127 and 255"),
                }
            }
        }
    }

    #[test]
    fn lower_var_threshold_never_shrinks_nonzero_count() {
        let strict = Mog2Params {
            var_threshold: 8.0,
            ..Mog2Params::default()
        };
        let loose = Mog2Params::default();
        let mut a = Mog2::new(strict, 10, 10).unwrap();
        let mut b = Mog2::new(loose, 10, 10).unwrap();
        for t in 0..150 {
            let base = if t % 31 == 0 { 190 } else { 90 };
            let frame = noisy_frame(10, 10, base, t);
            let na = a.apply(&frame).unwrap().nonzero_count();
            let nb = b.apply(&frame).unwrap().nonzero_count();
            assert!(
                na >= nb,
                "frame {t}: threshold 8 produced {na} nonzero labels, 16 produced {nb}"
            );
        }
    }

    #[test]
    fn invariants_hold_on_a_noisy_run() {
        let mut model = Mog2::new(Mog2Params::default(), 16, 12).unwrap();
        for t in 0..150 {
            let base = if t % 37 == 0 { 200 } else { 90 };
            model.apply(&noisy_frame(16, 12, base, t)).unwrap();
            model.check_invariants().unwrap();
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut model = Mog2::new(Mog2Params::default(), 4, 4).unwrap();
        let err = model.apply(&constant_frame(5, 4, 0)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn reset_restores_fresh_behaviour() {
        let mut model = Mog2::new(Mog2Params::default(), 6, 4).unwrap();
        let mut fresh = Mog2::new(Mog2Params::default(), 6, 4).unwrap();
        for t in 0..20 {
            model.apply(&noisy_frame(6, 4, 120, t)).unwrap();
        }
        model.reset();
        for t in 0..20 {
            let a = model.apply(&noisy_frame(6, 4, 140, t)).unwrap();
            let b = fresh.apply(&noisy_frame(6, 4, 140, t)).unwrap();
            assert!(masks_equal(&a, &b));
        }
    }

    #[test]
    fn parallel_apply_matches_sequential() {
        let mut seq = Mog2::new(Mog2Params::default(), 16, 13).unwrap();
        let mut par = Mog2::new(Mog2Params::default(), 16, 13).unwrap();
        par.set_workers(4);
        for t in 0..60 {
            let frame = noisy_frame(16, 13, if t % 17 == 0 { 210 } else { 80 }, t);
            let a = seq.apply(&frame).unwrap();
            let b = par.apply(&frame).unwrap();
            assert!(masks_equal(&a, &b), "diverged at frame {t}");
        }
    }
}
