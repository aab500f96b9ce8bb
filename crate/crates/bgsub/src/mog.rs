//! Fixed-size Gaussian-mixture background model (MOG).
//!
//! Each pixel carries up to `nmixtures` Gaussian components kept sorted by
//! fitness weight/sigma. The update scheme is the classic adaptive-mixture
//! one: a matched component absorbs the sample at rate `rho = min(1,
//! alpha/weight)`, an unmatched sample spawns (or replaces) a component, and
//! the background is the smallest prefix of the sorted list whose cumulative
//! weight strictly exceeds `background_ratio`.

use crate::error::{Error, Result};
use crate::frame::{Frame, Mask, LABEL_BACKGROUND, LABEL_FOREGROUND};
use crate::subtractor::{band_rows, check_dimensions, BackgroundSubtractor};

/// Absolute variance floor; guards fitness and match tests against division
/// by zero when `noise_sigma` is set very small.
pub const MOG_VAR_MIN: f64 = 0.01;

/// Squared match threshold: a sample matches a component when it lies within
/// 2.5 standard deviations of its mean.
pub const MOG_MATCH_THRESHOLD: f64 = 2.5 * 2.5;

const DEFAULT_NOISE_SIGMA: f64 = 15.0;
const MAX_NMIXTURES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MogParams {
    /// Frames over which the learning rate ramps down (alpha = 1/min(t, history)).
    pub history: u32,
    /// Number of Gaussian components per pixel, 1..=8.
    pub nmixtures: usize,
    /// Cumulative-weight threshold selecting the background prefix, in (0, 1].
    pub background_ratio: f64,
    /// Accepted noise level (intensity standard deviation). New components
    /// start at this sigma and component variance never drops below its
    /// square. 0 selects the built-in default of 15.
    pub noise_sigma: f64,
}

impl Default for MogParams {
    fn default() -> Self {
        Self {
            history: 200,
            nmixtures: 5,
            background_ratio: 0.7,
            noise_sigma: 0.0,
        }
    }
}

impl MogParams {
    pub fn validate(&self) -> Result<()> {
        if self.history < 1 {
            return Err(Error::invalid_parameter("history", "must be at least 1"));
        }
        if self.nmixtures < 1 || self.nmixtures > MAX_NMIXTURES {
            return Err(Error::invalid_parameter(
                "nmixtures",
                format!("{} is outside 1..=8", self.nmixtures),
            ));
        }
        if !(self.background_ratio > 0.0 && self.background_ratio <= 1.0) {
            return Err(Error::invalid_parameter(
                "background_ratio",
                format!("{} is outside (0, 1]", self.background_ratio),
            ));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::invalid_parameter(
                "noise_sigma",
                format!("{} is negative", self.noise_sigma),
            ));
        }
        Ok(())
    }

    /// Effective sigma for new components: `noise_sigma`, or 15 when 0.
    pub fn effective_noise_sigma(&self) -> f64 {
        if self.noise_sigma == 0.0 {
            DEFAULT_NOISE_SIGMA
        } else {
            self.noise_sigma
        }
    }
}

/// One Gaussian of a per-pixel mixture.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Per-pixel MOG model over a fixed frame size.
#[derive(Debug)]
pub struct Mog {
    params: MogParams,
    width: u32,
    height: u32,
    frames_seen: u64,
    sigma0_sq: f64,
    var_floor: f64,
    components: Vec<MixtureComponent>,
    counts: Vec<u8>,
    workers: usize,
}

#[derive(Clone, Copy)]
struct StepConfig {
    nmixtures: usize,
    alpha: f64,
    background_ratio: f64,
    sigma0_sq: f64,
    var_floor: f64,
}

impl Mog {
    pub fn new(params: MogParams, width: u32, height: u32) -> Result<Self> {
        params.validate()?;
        if width == 0 {
            return Err(Error::invalid_parameter("width", "must be at least 1"));
        }
        if height == 0 {
            return Err(Error::invalid_parameter("height", "must be at least 1"));
        }
        let pixels = width as usize * height as usize;
        let sigma0 = params.effective_noise_sigma();
        let sigma0_sq = sigma0 * sigma0;
        Ok(Self {
            params,
            width,
            height,
            frames_seen: 0,
            sigma0_sq,
            var_floor: sigma0_sq.max(MOG_VAR_MIN),
            components: vec![MixtureComponent::default(); pixels * params.nmixtures],
            counts: vec![0; pixels],
            workers: 1,
        })
    }

    pub fn params(&self) -> &MogParams {
        &self.params
    }

    /// Components of one pixel in fitness order (highest first).
    pub fn components_at(&self, x: u32, y: u32) -> &[MixtureComponent] {
        let k = self.params.nmixtures;
        let p = y as usize * self.width as usize + x as usize;
        &self.components[p * k..p * k + self.counts[p] as usize]
    }

    /// Scans the whole model for violated invariants; used by instrumented
    /// acceptance runs. Returns a description of the first violation found.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let k = self.params.nmixtures;
        for (p, &count) in self.counts.iter().enumerate() {
            let count = count as usize;
            if count > k {
                return Err(format!("pixel {p}: {count} components exceeds {k}"));
            }
            if count == 0 {
                continue;
            }
            let comps = &self.components[p * k..p * k + count];
            let sum: f64 = comps.iter().map(|c| c.weight).sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(format!("pixel {p}: weight sum {sum} deviates from 1"));
            }
            let mut prev = f64::INFINITY;
            for (j, c) in comps.iter().enumerate() {
                if c.variance < self.var_floor {
                    return Err(format!(
                        "pixel {p} component {j}: variance {} below floor {}",
                        c.variance, self.var_floor
                    ));
                }
                let fitness = c.weight / c.variance.sqrt();
                if fitness > prev {
                    return Err(format!("pixel {p}: components not sorted by fitness"));
                }
                prev = fitness;
            }
        }
        Ok(())
    }

    fn step_config(&self) -> StepConfig {
        let t = (self.frames_seen + 1).min(u64::from(self.params.history));
        StepConfig {
            nmixtures: self.params.nmixtures,
            alpha: 1.0 / t as f64,
            background_ratio: self.params.background_ratio,
            sigma0_sq: self.sigma0_sq,
            var_floor: self.var_floor,
        }
    }

    fn process_band(
        cfg: StepConfig,
        pixels: &[u8],
        components: &mut [MixtureComponent],
        counts: &mut [u8],
        labels: &mut [u8],
    ) {
        let k = cfg.nmixtures;
        for (i, &value) in pixels.iter().enumerate() {
            let x = f64::from(value);
            let count = counts[i] as usize;
            let comps = &mut components[i * k..(i + 1) * k];

            let mut matched = None;
            for (j, c) in comps[..count].iter().enumerate() {
                let d = x - c.mean;
                if d * d < MOG_MATCH_THRESHOLD * c.variance {
                    matched = Some(j);
                    break;
                }
            }

            let new_count;
            match matched {
                Some(j) => {
                    for (jj, c) in comps[..count].iter_mut().enumerate() {
                        c.weight = (1.0 - cfg.alpha) * c.weight
                            + if jj == j { cfg.alpha } else { 0.0 };
                    }
                    let c = &mut comps[j];
                    let rho = (cfg.alpha / c.weight).min(1.0);
                    c.mean += rho * (x - c.mean);
                    let d = x - c.mean;
                    c.variance = (c.variance + rho * (d * d - c.variance)).max(cfg.var_floor);
                    new_count = count;
                }
                None => {
                    // Spawn a fresh component; the list is fitness-sorted so
                    // the last entry is the weakest when full.
                    let slot = if count < k { count } else { count - 1 };
                    comps[slot] = MixtureComponent {
                        weight: cfg.alpha,
                        mean: x,
                        variance: cfg.sigma0_sq,
                    };
                    new_count = if count < k { count + 1 } else { count };
                    let sum: f64 = comps[..new_count].iter().map(|c| c.weight).sum();
                    for c in &mut comps[..new_count] {
                        c.weight /= sum;
                    }
                }
            }
            counts[i] = new_count as u8;

            let matched_pos = sort_by_fitness(&mut comps[..new_count], matched);

            labels[i] = match matched_pos {
                None => LABEL_FOREGROUND,
                Some(pos) => {
                    let background = background_prefix_len_iter(
                        comps[..new_count].iter().map(|c| c.weight),
                        new_count,
                        cfg.background_ratio,
                    );
                    if pos < background {
                        LABEL_BACKGROUND
                    } else {
                        LABEL_FOREGROUND
                    }
                }
            };
        }
    }
}

/// Stable insertion sort by weight/sigma descending (ties keep the earlier
/// component first). Returns the post-sort position of `track`.
fn sort_by_fitness(comps: &mut [MixtureComponent], track: Option<usize>) -> Option<usize> {
    let count = comps.len();
    let mut fitness = [0.0f64; MAX_NMIXTURES];
    for (j, c) in comps.iter().enumerate() {
        fitness[j] = c.weight / c.variance.sqrt();
    }
    let mut order = [0usize; MAX_NMIXTURES];
    for (j, slot) in order[..count].iter_mut().enumerate() {
        *slot = j;
    }
    for a in 1..count {
        let idx = order[a];
        let key = fitness[idx];
        let mut b = a;
        while b > 0 && fitness[order[b - 1]] < key {
            order[b] = order[b - 1];
            b -= 1;
        }
        order[b] = idx;
    }
    let mut sorted = [MixtureComponent::default(); MAX_NMIXTURES];
    for (p, &idx) in order[..count].iter().enumerate() {
        sorted[p] = comps[idx];
    }
    comps.copy_from_slice(&sorted[..count]);
    track.map(|j| order[..count].iter().position(|&idx| idx == j).unwrap())
}

pub(crate) fn background_prefix_len_iter(
    weights: impl Iterator<Item = f64>,
    len: usize,
    background_ratio: f64,
) -> usize {
    let mut cumulative = 0.0;
    for (i, w) in weights.enumerate() {
        cumulative += w;
        if cumulative > background_ratio {
            return i + 1;
        }
    }
    len
}

/// Smallest prefix of a descending weight list whose cumulative weight
/// strictly exceeds `background_ratio`; the full length if none does.
pub fn background_prefix_len(weights_sorted_desc: &[f64], background_ratio: f64) -> usize {
    background_prefix_len_iter(
        weights_sorted_desc.iter().copied(),
        weights_sorted_desc.len(),
        background_ratio,
    )
}

impl BackgroundSubtractor for Mog {
    fn apply(&mut self, frame: &Frame) -> Result<Mask> {
        check_dimensions(frame, self.width, self.height)?;
        let cfg = self.step_config();
        let w = self.width as usize;
        let h = self.height as usize;
        let k = cfg.nmixtures;
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
                    .zip(self.components.chunks_mut(rows * w * k))
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
        "mog"
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
        let model = Mog::new(MogParams::default(), 4, 4).unwrap();
        assert_eq!(model.frames_seen(), 0);
        for y in 0..4 {
            for x in 0..4 {
                assert!(model.components_at(x, y).is_empty());
            }
        }
    }

    #[test]
    fn invalid_parameters_name_the_field() {
        let bad = MogParams {
            nmixtures: 0,
            ..MogParams::default()
        };
        match Mog::new(bad, 2, 2).unwrap_err() {
            Error::InvalidParameter { field, .. } => assert_eq!(field, "nmixtures"),
            other => panic!("unexpected error: {other}"),
        }
        let bad = MogParams {
            background_ratio: 1.2,
            ..MogParams::default()
        };
        match Mog::new(bad, 2, 2).unwrap_err() {
            Error::InvalidParameter { field, .. } => assert_eq!(field, "background_ratio"),
            other => panic!("unexpected error: {other}"),
        }
        let bad = MogParams {
            history: 0,
            ..MogParams::default()
        };
        assert!(Mog::new(bad, 2, 2).is_err());
        let bad = MogParams {
            nmixtures: 9,
            ..MogParams::default()
        };
        assert!(Mog::new(bad, 2, 2).is_err());
    }

    #[test]
    fn first_frame_is_all_foreground() {
        let mut model = Mog::new(MogParams::default(), 3, 2).unwrap();
        let mask = model.apply(&constant_frame(3, 2, 100)).unwrap();
        assert!(mask.data().iter().all(|&v| v == LABEL_FOREGROUND));
    }

    #[test]
    fn second_constant_frame_is_all_background() {
        let mut model = Mog::new(MogParams::default(), 3, 2).unwrap();
        model.apply(&constant_frame(3, 2, 100)).unwrap();
        let mask = model.apply(&constant_frame(3, 2, 100)).unwrap();
        assert!(mask.data().iter().all(|&v| v == LABEL_BACKGROUND));
    }

    #[test]
    fn large_step_after_convergence_is_foreground() {
        let mut model = Mog::new(MogParams::default(), 2, 2).unwrap();
        let frame = constant_frame(2, 2, 100);
        for _ in 0..200 {
            model.apply(&frame).unwrap();
        }
        let mask = model.apply(&constant_frame(2, 2, 250)).unwrap();
        assert!(mask.data().iter().all(|&v| v == LABEL_FOREGROUND));
    }

    #[test]
    fn static_scene_converges_after_first_frame() {
        let mut model = Mog::new(MogParams::default(), 8, 8).unwrap();
        let frame = constant_frame(8, 8, 77);
        model.apply(&frame).unwrap();
        for _ in 0..199 {
            let mask = model.apply(&frame).unwrap();
            assert_eq!(mask.foreground_count(), 0);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut model = Mog::new(MogParams::default(), 4, 4).unwrap();
        let err = model.apply(&constant_frame(4, 5, 0)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn background_prefix_examples() {
        assert_eq!(background_prefix_len(&[0.5, 0.3, 0.2], 0.7), 2);
        assert_eq!(background_prefix_len(&[1.0], 0.7), 1);
        assert_eq!(background_prefix_len(&[0.4, 0.3, 0.3], 0.9), 3);
        assert_eq!(background_prefix_len(&[], 0.7), 0);
    }

    #[test]
    fn fitness_sort_is_stable_under_ties() {
        // Two identical components plus a weaker one: the identical pair must
        // keep its original relative order.
        let tied_a = MixtureComponent {
            weight: 0.4,
            mean: 10.0,
            variance: 4.0,
        };
        let tied_b = MixtureComponent {
            weight: 0.4,
            mean: 99.0,
            variance: 4.0,
        };
        let weak = MixtureComponent {
            weight: 0.2,
            mean: 50.0,
            variance: 4.0,
        };
        let mut comps = [weak, tied_a, tied_b];
        let pos = sort_by_fitness(&mut comps, Some(0));
        assert_eq!(pos, Some(2));
        assert_eq!(comps[0].mean, 10.0);
        assert_eq!(comps[1].mean, 99.0);
        assert_eq!(comps[2].mean, 50.0);
    }

    /// Deterministic pseudo-noise without pulling in an RNG.
    fn noisy_frame(w: u32, h: u32, base: u8, t: u64) -> Frame {
        let data = (0..w as u64 * h as u64)
            .map(|i| {
                let mix = (i.wrapping_mul(6364136223846793005).wrapping_add(t.wrapping_mul(1442695040888963407)))
                    >> 33;
                let jitter = (mix % 11) as i16 - 5;
                (i16::from(base) + jitter).clamp(0, 255) as u8
            })
            .collect();
        Frame::new(w, h, data).unwrap()
    }

    #[test]
    fn weights_stay_normalized_and_counts_bounded() {
        let mut model = Mog::new(MogParams::default(), 16, 12).unwrap();
        for t in 0..150 {
            let base = if t % 37 == 0 { 200 } else { 90 };
            model.apply(&noisy_frame(16, 12, base, t)).unwrap();
            model.check_invariants().unwrap();
        }
    }

    #[test]
    fn shorter_history_recovers_faster_from_a_light_step() {
        let run = |history: u32| {
            let params = MogParams {
                history,
                ..MogParams::default()
            };
            let mut model = Mog::new(params, 4, 4).unwrap();
            let base = constant_frame(4, 4, 100);
            for _ in 0..300 {
                model.apply(&base).unwrap();
            }
            let stepped = constant_frame(4, 4, 160);
            let mut frames_to_converge = None;
            for t in 1..=400u32 {
                let mask = model.apply(&stepped).unwrap();
                if mask.foreground_count() == 0 {
                    frames_to_converge = Some(t);
                    break;
                }
            }
            frames_to_converge.expect("never re-converged")
        };
        let fast = run(5);
        let slow = run(200);
        assert!(
            fast < slow,
            "history=5 took {fast} frames, history=200 took {slow}"
        );
    }

    #[test]
    fn reset_restores_fresh_behaviour() {
        let mut model = Mog::new(MogParams::default(), 6, 4).unwrap();
        let mut fresh = Mog::new(MogParams::default(), 6, 4).unwrap();
        for t in 0..20 {
            model.apply(&noisy_frame(6, 4, 120, t)).unwrap();
        }
        model.reset();
        assert_eq!(model.frames_seen(), 0);
        for t in 0..20 {
            let a = model.apply(&noisy_frame(6, 4, 140, t)).unwrap();
            let b = fresh.apply(&noisy_frame(6, 4, 140, t)).unwrap();
            assert!(masks_equal(&a, &b));
        }
    }

    #[test]
    fn parallel_apply_matches_sequential() {
        let mut seq = Mog::new(MogParams::default(), 16, 13).unwrap();
        let mut par = Mog::new(MogParams::default(), 16, 13).unwrap();
        par.set_workers(4);
        for t in 0..60 {
            let frame = noisy_frame(16, 13, if t % 17 == 0 { 210 } else { 80 }, t);
            let a = seq.apply(&frame).unwrap();
            let b = par.apply(&frame).unwrap();
            assert!(masks_equal(&a, &b), "diverged at frame {t}");
        }
    }
}
