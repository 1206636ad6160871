//! Playback scheduling: activity-keyed clip sets, randomized no-repeat clip
//! selection, fade-out, placeholder clip synthesis, and WAV export.
//!
//! Speaking and idle predictions are always silent. Each consumption
//! activity owns ten 4-second clips from one sound family; selection is
//! uniform over the nine clips that differ from the previous pick, so the
//! same clip never plays twice in a row.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sensor_data::ActivityLabel;

/// Clips per activity set.
pub const CLIPS_PER_ACTIVITY: usize = 10;
/// Nominal clip length in seconds.
pub const CLIP_SECONDS: f64 = 4.0;
/// Fade-out applied to every clip, in seconds.
pub const FADE_SECONDS: f64 = 1.0;
/// Sample rate for synthesized placeholder clips.
pub const CLIP_SAMPLE_RATE: u32 = 22_050;

/// The three synthesized placeholder families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoundFamily {
    /// Dense noise bursts, crunchy-chips style.
    CrunchyChips,
    /// Consonant piano-like chord tones.
    PianoChords,
    /// Bubbly upward chirps, carbonated-water style.
    SparklingWater,
}

impl SoundFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            SoundFamily::CrunchyChips => "crunchy_chips",
            SoundFamily::PianoChords => "piano_chords",
            SoundFamily::SparklingWater => "sparkling_water",
        }
    }
}

/// Which sound family plays for each consumption activity.
///
/// The default is deliberately incongruent: crunchy chips sounds back the
/// soft food activity while piano chords back crunchy food, which keeps the
/// feedback surprising. The table is configuration, not a hard-coded rule.
pub type FamilyMapping = BTreeMap<ActivityLabel, SoundFamily>;

pub fn default_family_mapping() -> FamilyMapping {
    BTreeMap::from([
        (ActivityLabel::CrunchyFood, SoundFamily::PianoChords),
        (ActivityLabel::SoftFood, SoundFamily::CrunchyChips),
        (ActivityLabel::Beverage, SoundFamily::SparklingWater),
    ])
}

/// Mono float PCM in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl Clip {
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Ten clips for one activity, all from one family.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityClips {
    pub family: SoundFamily,
    pub clips: Vec<Clip>,
}

/// Clip sets for the three consumption activities.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipLibrary {
    sets: BTreeMap<ActivityLabel, ActivityClips>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SoundError {
    #[error("clip of {got} samples is shorter than the {need}-sample fade")]
    ClipTooShort { got: usize, need: usize },
    #[error("invalid clip library: {0}")]
    InvalidLibrary(String),
}

impl ClipLibrary {
    pub fn set(&self, activity: ActivityLabel) -> Option<&ActivityClips> {
        self.sets.get(&activity)
    }

    pub fn clip(&self, activity: ActivityLabel, clip_id: u8) -> Option<&Clip> {
        self.sets
            .get(&activity)
            .and_then(|s| s.clips.get(clip_id as usize))
    }

    /// Exactly three consumption activities x ten clips, every clip within
    /// [3.5, 4.5] s.
    pub fn check(&self) -> Result<(), SoundError> {
        let expected = [
            ActivityLabel::CrunchyFood,
            ActivityLabel::SoftFood,
            ActivityLabel::Beverage,
        ];
        if self.sets.len() != expected.len() {
            return Err(SoundError::InvalidLibrary(format!(
                "expected {} activity sets, found {}",
                expected.len(),
                self.sets.len()
            )));
        }
        for activity in expected {
            let set = self.sets.get(&activity).ok_or_else(|| {
                SoundError::InvalidLibrary(format!("missing clip set for {activity}"))
            })?;
            if set.clips.len() != CLIPS_PER_ACTIVITY {
                return Err(SoundError::InvalidLibrary(format!(
                    "{activity}: expected {CLIPS_PER_ACTIVITY} clips, found {}",
                    set.clips.len()
                )));
            }
            for (i, clip) in set.clips.iter().enumerate() {
                let d = clip.duration_s();
                if !(3.5..=4.5).contains(&d) {
                    return Err(SoundError::InvalidLibrary(format!(
                        "{activity} clip {i}: duration {d:.3}s outside [3.5, 4.5]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Applies a linear gain ramp from 1 down to exactly 0 over the final
/// `fade_out_s` seconds. Samples before the ramp are untouched; the ramp's
/// first sample keeps gain 1.
pub fn apply_fade(clip: &Clip, fade_out_s: f64) -> Result<Clip, SoundError> {
    let fade_len = (fade_out_s * clip.sample_rate as f64).round() as usize;
    if fade_len == 0 {
        return Ok(clip.clone());
    }
    if clip.samples.len() < fade_len {
        return Err(SoundError::ClipTooShort {
            got: clip.samples.len(),
            need: fade_len,
        });
    }
    let mut samples = clip.samples.clone();
    let start = samples.len() - fade_len;
    for j in 0..fade_len {
        let gain = if fade_len == 1 {
            0.0
        } else {
            1.0 - j as f64 / (fade_len - 1) as f64
        };
        samples[start + j] = (samples[start + j] as f64 * gain) as f32;
    }
    Ok(Clip {
        samples,
        sample_rate: clip.sample_rate,
    })
}

/// What the player should do for one prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PlaybackAction {
    Silence,
    Play {
        activity: ActivityLabel,
        clip_id: u8,
        fade_out_s: f64,
    },
}

impl PlaybackAction {
    pub fn kind(&self) -> &'static str {
        match self {
            PlaybackAction::Silence => "silence",
            PlaybackAction::Play { .. } => "play",
        }
    }
}

/// One scheduler decision, kept in the append-only session history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerEvent {
    pub t_ms: u64,
    pub predicted: ActivityLabel,
    pub action: PlaybackAction,
}

/// Per-session scheduler state: last clip per activity, the session rng,
/// and the event history.
#[derive(Debug, Clone)]
pub struct SchedulerState {
    last_clip: BTreeMap<ActivityLabel, u8>,
    rng: ChaCha8Rng,
    events: Vec<SchedulerEvent>,
}

impl SchedulerState {
    pub fn new(seed: u64) -> Self {
        Self {
            last_clip: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            events: Vec::new(),
        }
    }

    pub fn events(&self) -> &[SchedulerEvent] {
        &self.events
    }

    /// Decides the action for one prediction and appends it to the history.
    ///
    /// Speaking and idle yield silence. Consumption activities play a clip
    /// drawn uniformly from their set excluding the immediately previous
    /// clip for that activity.
    pub fn next_action(
        &mut self,
        t_ms: u64,
        predicted: ActivityLabel,
        library: &ClipLibrary,
    ) -> PlaybackAction {
        let action = if predicted.is_consumption() {
            let clip_id = self.draw_clip(predicted);
            debug_assert!(library.clip(predicted, clip_id).is_some());
            PlaybackAction::Play {
                activity: predicted,
                clip_id,
                fade_out_s: FADE_SECONDS,
            }
        } else {
            PlaybackAction::Silence
        };
        self.events.push(SchedulerEvent {
            t_ms,
            predicted,
            action,
        });
        action
    }

    fn draw_clip(&mut self, activity: ActivityLabel) -> u8 {
        let n = CLIPS_PER_ACTIVITY as u8;
        let clip_id = match self.last_clip.get(&activity) {
            None => self.rng.random_range(0..n),
            Some(&last) => {
                // uniform over the n-1 ids differing from last
                let draw = self.rng.random_range(0..n - 1);
                if draw >= last {
                    draw + 1
                } else {
                    draw
                }
            }
        };
        self.last_clip.insert(activity, clip_id);
        clip_id
    }

    /// Event history as CSV `t_ms,predicted,action,clip_id` (clip_id empty
    /// for silence).
    pub fn events_csv(&self) -> String {
        let mut out = String::from("t_ms,predicted,action,clip_id\n");
        for e in &self.events {
            match e.action {
                PlaybackAction::Silence => {
                    out.push_str(&format!("{},{},silence,\n", e.t_ms, e.predicted));
                }
                PlaybackAction::Play { clip_id, .. } => {
                    out.push_str(&format!("{},{},play,{}\n", e.t_ms, e.predicted, clip_id));
                }
            }
        }
        out
    }
}

/// Synthesizes the 30-clip placeholder library (three families x ten
/// clips), fade pre-applied, deterministic by seed.
pub fn build_placeholder_library(seed: u64) -> ClipLibrary {
    let mapping = default_family_mapping();
    let mut sets = BTreeMap::new();
    for (activity, family) in mapping {
        let mut clips = Vec::with_capacity(CLIPS_PER_ACTIVITY);
        for clip_id in 0..CLIPS_PER_ACTIVITY {
            // derive one stream per (family, clip); activities never share
            // buffers even if mappings change
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ ((family as u64 + 1) << 32) ^ clip_id as u64,
            );
            let raw = synthesize_clip(family, clip_id, &mut rng);
            clips.push(apply_fade(&raw, FADE_SECONDS).expect("placeholder clips exceed fade"));
        }
        sets.insert(activity, ActivityClips { family, clips });
    }
    ClipLibrary { sets, seed }
}

fn synthesize_clip(family: SoundFamily, clip_id: usize, rng: &mut ChaCha8Rng) -> Clip {
    let sr = CLIP_SAMPLE_RATE as f64;
    let n = (CLIP_SECONDS * sr) as usize;
    let mut samples = vec![0.0f32; n];
    match family {
        SoundFamily::CrunchyChips => {
            // dense grains of decaying white noise
            let grain_rate = 9.0 + clip_id as f64 * 0.7;
            let mut t = rng.random_range(0.0..0.08);
            while t < CLIP_SECONDS {
                let dur = rng.random_range(0.03..0.09);
                let amp = rng.random_range(0.25..0.65);
                let start = (t * sr) as usize;
                let len = (dur * sr) as usize;
                for j in 0..len.min(n.saturating_sub(start)) {
                    let env = (-6.0 * j as f64 / len as f64).exp();
                    samples[start + j] += (amp * env * rng.random_range(-1.0..1.0)) as f32;
                }
                t += rng.random_range(0.6..1.6) / grain_rate;
            }
        }
        SoundFamily::PianoChords => {
            // two legato strikes of a consonant triad with decaying partials
            let root = 196.0 * (2.0f64).powf((clip_id % 10) as f64 / 12.0);
            let intervals = [1.0, 1.25992, 1.49831, 2.0]; // root, M3, P5, octave
            for (strike, t0) in [(0, 0.0), (1, 1.9)] {
                let _ = strike;
                let start = (t0 * sr) as usize;
                let amp = rng.random_range(0.16..0.22);
                for (pi, interval) in intervals.iter().enumerate() {
                    let f = root * interval;
                    let phase = rng.random_range(0.0..std::f64::consts::TAU);
                    let partial_amp = amp / (1.0 + pi as f64 * 0.4);
                    for (j, sample) in samples.iter_mut().enumerate().skip(start) {
                        let tau = (j - start) as f64 / sr;
                        let env = (-1.4 * tau).exp();
                        *sample += (partial_amp
                            * env
                            * (std::f64::consts::TAU * f * tau + phase).sin())
                            as f32;
                    }
                }
            }
        }
        SoundFamily::SparklingWater => {
            // many short upward chirps over a faint noise bed
            for s in samples.iter_mut() {
                *s += (0.012 * rng.random_range(-1.0..1.0)) as f32;
            }
            let n_bubbles = 90 + clip_id * 6;
            for _ in 0..n_bubbles {
                let t0 = rng.random_range(0.0..CLIP_SECONDS - 0.09);
                let dur = rng.random_range(0.02..0.07);
                let f0 = rng.random_range(700.0..1400.0);
                let f1 = f0 * rng.random_range(1.6..2.6);
                let amp = rng.random_range(0.08..0.3);
                let start = (t0 * sr) as usize;
                let len = (dur * sr) as usize;
                for j in 0..len.min(n.saturating_sub(start)) {
                    let frac = j as f64 / len as f64;
                    let f = f0 + (f1 - f0) * frac;
                    let env = (std::f64::consts::PI * frac).sin();
                    samples[start + j] +=
                        (amp * env * (std::f64::consts::TAU * f * (frac * dur)).sin()) as f32;
                }
            }
        }
    }
    // normalize peaks into a consistent range
    let peak = samples.iter().fold(0.0f32, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        let gain = 0.8 / peak;
        for s in samples.iter_mut() {
            *s *= gain;
        }
    }
    Clip {
        samples,
        sample_rate: CLIP_SAMPLE_RATE,
    }
}

/// Encodes a clip as a standard RIFF WAV, PCM 16-bit mono.
pub fn encode_wav(clip: &Clip) -> Vec<u8> {
    let n = clip.samples.len() as u32;
    let byte_rate = clip.sample_rate * 2;
    let data_len = n * 2;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes()); // PCM chunk size
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM format
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&clip.sample_rate.to_le_bytes());
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &clip.samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speaking_and_idle_are_silent() {
        let library = build_placeholder_library(1);
        let mut state = SchedulerState::new(1);
        assert_eq!(
            state.next_action(0, ActivityLabel::Speaking, &library),
            PlaybackAction::Silence
        );
        assert_eq!(
            state.next_action(4000, ActivityLabel::Idle, &library),
            PlaybackAction::Silence
        );
        assert_eq!(state.events().len(), 2);
    }

    #[test]
    fn fresh_state_plays_some_clip_with_fade() {
        let library = build_placeholder_library(2);
        let mut state = SchedulerState::new(2);
        match state.next_action(0, ActivityLabel::Beverage, &library) {
            PlaybackAction::Play {
                activity,
                clip_id,
                fade_out_s,
            } => {
                assert_eq!(activity, ActivityLabel::Beverage);
                assert!(clip_id < 10);
                assert_eq!(fade_out_s, 1.0);
            }
            other => panic!("expected Play, got {other:?}"),
        }
    }

    #[test]
    fn no_immediate_repeats_and_near_uniform_frequencies() {
        let library = build_placeholder_library(3);
        let mut state = SchedulerState::new(99);
        let mut counts = [0usize; 10];
        let mut last: Option<u8> = None;
        for i in 0..10_000 {
            match state.next_action(i * 4000, ActivityLabel::CrunchyFood, &library) {
                PlaybackAction::Play { clip_id, .. } => {
                    if let Some(prev) = last {
                        assert_ne!(prev, clip_id, "draw {i} repeated clip {clip_id}");
                    }
                    counts[clip_id as usize] += 1;
                    last = Some(clip_id);
                }
                PlaybackAction::Silence => panic!("consumption never yields silence"),
            }
        }
        for (id, &c) in counts.iter().enumerate() {
            assert!((800..=1200).contains(&c), "clip {id} drawn {c} times");
        }
    }

    #[test]
    fn per_activity_last_clip_tracking_is_independent() {
        let library = build_placeholder_library(4);
        let mut state = SchedulerState::new(5);
        let mut last_per: BTreeMap<ActivityLabel, u8> = BTreeMap::new();
        let acts = [
            ActivityLabel::CrunchyFood,
            ActivityLabel::SoftFood,
            ActivityLabel::Beverage,
        ];
        for i in 0..3000 {
            let act = acts[i % 3];
            if let PlaybackAction::Play { clip_id, .. } =
                state.next_action(i as u64 * 4000, act, &library)
            {
                if let Some(&prev) = last_per.get(&act) {
                    assert_ne!(prev, clip_id);
                }
                last_per.insert(act, clip_id);
            }
        }
    }

    #[test]
    fn session_determinism() {
        let library = build_placeholder_library(6);
        let predictions = [
            ActivityLabel::CrunchyFood,
            ActivityLabel::Idle,
            ActivityLabel::Beverage,
            ActivityLabel::Beverage,
            ActivityLabel::SoftFood,
            ActivityLabel::Speaking,
            ActivityLabel::CrunchyFood,
        ];
        let run = |seed| {
            let mut state = SchedulerState::new(seed);
            for (i, &p) in predictions.iter().enumerate() {
                state.next_action(i as u64 * 4000, p, &library);
            }
            state.events().to_vec()
        };
        assert_eq!(run(7), run(7));
        assert_eq!(run(7).len(), predictions.len());
    }

    #[test]
    fn fade_matches_linear_ramp() {
        let clip = Clip {
            samples: vec![1.0; 32_000],
            sample_rate: 8_000,
        };
        let faded = apply_fade(&clip, 1.0).unwrap();
        // 3.0 s: ramp start, still unity gain
        assert_eq!(faded.samples[24_000], 1.0);
        // 3.5 s: halfway down
        assert!((faded.samples[28_000] - 0.5).abs() <= 1.0 / 8000.0);
        // final sample exactly zero
        assert_eq!(*faded.samples.last().unwrap(), 0.0);
        // pre-ramp region bit-identical
        assert_eq!(&faded.samples[..24_000], &clip.samples[..24_000]);
        // envelope monotone non-increasing over the ramp
        for w in faded.samples[24_000..].windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn zero_fade_is_identity() {
        let clip = Clip {
            samples: vec![0.25; 100],
            sample_rate: 100,
        };
        assert_eq!(apply_fade(&clip, 0.0).unwrap(), clip);
    }

    #[test]
    fn too_short_clip_rejected() {
        let clip = Clip {
            samples: vec![0.5; 50],
            sample_rate: 100,
        };
        assert!(matches!(
            apply_fade(&clip, 1.0),
            Err(SoundError::ClipTooShort { got: 50, need: 100 })
        ));
    }

    #[test]
    fn faded_tail_loses_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let clip = Clip {
            samples: (0..8000).map(|_| rng.random_range(-1.0f32..1.0)).collect(),
            sample_rate: 4000,
        };
        let faded = apply_fade(&clip, 1.0).unwrap();
        let tail = clip.samples.len() - 4000;
        let energy = |xs: &[f32]| xs.iter().map(|v| (*v as f64).powi(2)).sum::<f64>();
        assert!(energy(&faded.samples[tail..]) < energy(&clip.samples[tail..]));
    }

    #[test]
    fn placeholder_library_is_valid_and_deterministic() {
        let a = build_placeholder_library(11);
        a.check().unwrap();
        let b = build_placeholder_library(11);
        assert_eq!(a, b);
        let c = build_placeholder_library(12);
        assert_ne!(a, c);
    }

    #[test]
    fn library_clips_end_silent() {
        let library = build_placeholder_library(13);
        for act in [
            ActivityLabel::CrunchyFood,
            ActivityLabel::SoftFood,
            ActivityLabel::Beverage,
        ] {
            for clip in &library.set(act).unwrap().clips {
                assert_eq!(*clip.samples.last().unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn wav_encoding_shape() {
        let clip = Clip {
            samples: vec![0.0, 0.5, -0.5, 1.0],
            sample_rate: 22_050,
        };
        let bytes = encode_wav(&clip);
        assert_eq!(&bytes[..4], b"RIFF");
        assert_eq!(&bytes[8..12], b"WAVE");
        assert_eq!(bytes.len(), 44 + 8);
        // 16-bit little-endian payload
        let v = i16::from_le_bytes([bytes[44 + 2], bytes[44 + 3]]);
        assert_eq!(v, (0.5f32 * 32767.0).round() as i16);
    }

    /// Mean spectral centroid must order noise > chirps > chords.
    #[test]
    fn families_distinguishable_by_spectral_centroid() {
        use rustfft::{num_complex::Complex, FftPlanner};

        let library = build_placeholder_library(21);
        let centroid = |clip: &Clip| {
            let n = 16_384usize;
            let mut planner = FftPlanner::<f64>::new();
            let fft = planner.plan_fft_forward(n);
            let mut buf: Vec<Complex<f64>> = clip.samples[..n]
                .iter()
                .map(|&s| Complex::new(s as f64, 0.0))
                .collect();
            fft.process(&mut buf);
            let df = clip.sample_rate as f64 / n as f64;
            let (mut num, mut den) = (0.0, 0.0);
            for (k, c) in buf.iter().enumerate().take(n / 2).skip(1) {
                let mag = c.norm();
                num += k as f64 * df * mag;
                den += mag;
            }
            num / den
        };

        let mean_for = |family: SoundFamily| {
            let set = library
                .sets
                .values()
                .find(|s| s.family == family)
                .unwrap();
            set.clips.iter().map(centroid).sum::<f64>() / set.clips.len() as f64
        };

        let noise = mean_for(SoundFamily::CrunchyChips);
        let chirp = mean_for(SoundFamily::SparklingWater);
        let chord = mean_for(SoundFamily::PianoChords);
        assert!(
            noise > chirp && chirp > chord,
            "noise={noise:.0} chirp={chirp:.0} chord={chord:.0}"
        );
    }
}
