//! Deterministic synthetic IMU streams for the five activity classes.
//!
//! The signal models are intentionally simple burst processes, parameterized
//! so the classes are separable but overlapping: per-participant style and
//! per-event amplitude draws blur the class boundaries enough that
//! classification stays a real problem at desk scale.
//!
//! Class signatures (accel in g, gyro in deg/s, gravity along -y):
//! - crunchy: 1.5-2.2 Hz chew bursts, high amplitude, 8-14 Hz ring
//! - soft: 0.8-1.4 Hz chew bursts, low amplitude, 4-8 Hz ring
//! - beverage: sparse sip events; slow gyro tilt excursion plus brief
//!   swallow bursts
//! - speaking: 3-5 Hz syllabic bursts of mid-amplitude broadband jitter
//! - idle: gravity baseline plus sensor noise only

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::sensor_data::{ActivityLabel, ImuSample, LabeledDataset};

/// What to generate: participants x activities x minutes at a sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub participants: usize,
    pub minutes_per_activity: f64,
    pub sample_rate_hz: f64,
    /// Emitted in this order per participant; duplicates are rejected.
    pub activities: Vec<ActivityLabel>,
    pub seed: u64,
    /// Scales the sensor noise floor (and micro-sway); 0 gives exact
    /// noiseless baselines.
    pub noise_scale: f64,
}

impl GeneratorSpec {
    /// The four mouth activities recorded per participant.
    pub fn mouth_activities() -> Vec<ActivityLabel> {
        vec![
            ActivityLabel::CrunchyFood,
            ActivityLabel::SoftFood,
            ActivityLabel::Beverage,
            ActivityLabel::Speaking,
        ]
    }

    /// All five classes, for training sets that need idle support.
    pub fn all_activities() -> Vec<ActivityLabel> {
        ActivityLabel::ALL.to_vec()
    }

    pub fn with_idle(mut self) -> Self {
        if !self.activities.contains(&ActivityLabel::Idle) {
            self.activities.push(ActivityLabel::Idle);
        }
        self
    }

    pub fn check(&self) -> Result<(), GenError> {
        if self.participants == 0 {
            return Err(GenError::InvalidSpec("participants must be >= 1".into()));
        }
        if self.minutes_per_activity.is_nan() || self.minutes_per_activity <= 0.0 {
            return Err(GenError::InvalidSpec(
                "minutes_per_activity must be positive".into(),
            ));
        }
        if self.sample_rate_hz.is_nan() || self.sample_rate_hz <= 0.0 || self.sample_rate_hz > 1000.0
        {
            return Err(GenError::InvalidSpec(
                "sample_rate_hz must be in (0, 1000]".into(),
            ));
        }
        if self.activities.is_empty() {
            return Err(GenError::InvalidSpec("no activities selected".into()));
        }
        for (i, a) in self.activities.iter().enumerate() {
            if self.activities[..i].contains(a) {
                return Err(GenError::InvalidSpec(format!("duplicate activity {a}")));
            }
        }
        if self.noise_scale.is_nan() || self.noise_scale < 0.0 {
            return Err(GenError::InvalidSpec("noise_scale must be >= 0".into()));
        }
        Ok(())
    }

    pub fn expected_records(&self) -> usize {
        self.participants
            * self.activities.len()
            * ((self.minutes_per_activity * 60.0 * self.sample_rate_hz).round() as usize)
    }
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            participants: 6,
            minutes_per_activity: 3.0,
            sample_rate_hz: 50.0,
            activities: Self::mouth_activities(),
            seed: 42,
            noise_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("duration must be positive (got {0})")]
    InvalidDuration(f64),
}

/// Per-label signal parameters. Ranges are (lo, hi) with lo <= hi.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityModel {
    /// Burst events per second (chews, sips, syllable groups).
    pub event_rate_hz: (f64, f64),
    /// Peak accel burst amplitude in g.
    pub accel_amp: (f64, f64),
    /// Peak gyro burst amplitude in deg/s.
    pub gyro_amp: (f64, f64),
    /// Fraction of each event cycle spent inside the burst.
    pub duty: (f64, f64),
    /// Resting accelerometer reading in g.
    pub baseline_gravity: [f64; 3],
    /// Gaussian noise sigma per accel channel, in g.
    pub noise_floor_accel: f64,
    /// Gaussian noise sigma per gyro channel, in deg/s.
    pub noise_floor_gyro: f64,
}

impl ActivityModel {
    pub fn for_label(label: ActivityLabel) -> Self {
        let base = Self {
            event_rate_hz: (0.0, 0.0),
            accel_amp: (0.0, 0.0),
            gyro_amp: (0.0, 0.0),
            duty: (0.0, 0.0),
            baseline_gravity: [0.0, -1.0, 0.0],
            noise_floor_accel: 0.012,
            noise_floor_gyro: 0.8,
        };
        // adjacent classes deliberately share parameter territory (a quiet
        // crunchy session overlaps a loud soft one, sparse sips overlap
        // idle) so window classification stays non-trivial
        match label {
            ActivityLabel::CrunchyFood => Self {
                event_rate_hz: (1.3, 2.2),
                accel_amp: (0.12, 0.42),
                gyro_amp: (14.0, 55.0),
                duty: (0.30, 0.45),
                ..base
            },
            ActivityLabel::SoftFood => Self {
                event_rate_hz: (0.8, 1.6),
                accel_amp: (0.05, 0.20),
                gyro_amp: (6.0, 30.0),
                duty: (0.35, 0.55),
                ..base
            },
            ActivityLabel::Beverage => Self {
                event_rate_hz: (0.15, 0.35),
                accel_amp: (0.035, 0.11),
                gyro_amp: (15.0, 60.0),
                duty: (0.25, 0.40),
                ..base
            },
            ActivityLabel::Speaking => Self {
                event_rate_hz: (3.0, 5.0),
                accel_amp: (0.02, 0.09),
                gyro_amp: (2.5, 10.0),
                duty: (0.55, 0.85),
                ..base
            },
            ActivityLabel::Idle => base,
        }
    }

    pub fn check(&self) -> Result<(), GenError> {
        for (name, (lo, hi)) in [
            ("event_rate_hz", self.event_rate_hz),
            ("accel_amp", self.accel_amp),
            ("gyro_amp", self.gyro_amp),
            ("duty", self.duty),
        ] {
            if !(lo >= 0.0 && hi >= lo) {
                return Err(GenError::InvalidSpec(format!(
                    "{name} range must satisfy 0 <= lo <= hi (got {lo}..{hi})"
                )));
            }
        }
        Ok(())
    }
}

/// Session-level variation shared by all samples of one recording.
#[derive(Debug, Clone, Copy)]
struct Profile {
    /// Multiplier on burst amplitudes.
    style: f64,
    /// Multiplier on event rates.
    tempo: f64,
    /// Additive accel offset (head posture), in g.
    tilt: [f64; 3],
}

impl Profile {
    const NEUTRAL: Profile = Profile {
        style: 1.0,
        tempo: 1.0,
        tilt: [0.0, 0.0, 0.0],
    };

    fn draw(rng: &mut ChaCha8Rng) -> Self {
        Profile {
            style: rng.random_range(0.65..1.45),
            tempo: rng.random_range(0.85..1.2),
            tilt: [
                rng.random_range(-0.08..0.08),
                rng.random_range(-0.08..0.08),
                rng.random_range(-0.08..0.08),
            ],
        }
    }
}

/// Generates one activity recording with timestamps starting at zero.
/// Sample count = round(duration_s * rate_hz). Deterministic per rng state.
pub fn generate_activity(
    label: ActivityLabel,
    duration_s: f64,
    rate_hz: f64,
    rng: &mut ChaCha8Rng,
    noise_scale: f64,
) -> Result<Vec<ImuSample>, GenError> {
    if duration_s.is_nan() || duration_s <= 0.0 {
        return Err(GenError::InvalidDuration(duration_s));
    }
    let n = (duration_s * rate_hz).round() as usize;
    let channels = synthesize(label, n, rate_hz, &Profile::NEUTRAL, rng, noise_scale);
    Ok(channels
        .into_iter()
        .enumerate()
        .map(|(i, ch)| {
            ImuSample::new(
                timestamp_for(i, rate_hz),
                [ch[0], ch[1], ch[2]],
                [ch[3], ch[4], ch[5]],
            )
        })
        .collect())
}

/// Generates the full corpus: per participant, per activity, one contiguous
/// labeled segment on a shared session clock. Participant style/tempo/tilt
/// jitter is drawn from the seed, so recordings differ across participants
/// but reproduce exactly per seed.
pub fn generate_dataset(spec: &GeneratorSpec) -> Result<LabeledDataset, GenError> {
    spec.check()?;
    let mut seeder = ChaCha8Rng::seed_from_u64(spec.seed);
    let profile_seeds: Vec<u64> = (0..spec.participants).map(|_| seeder.next_u64()).collect();
    let segment_seeds: Vec<Vec<u64>> = (0..spec.participants)
        .map(|_| (0..spec.activities.len()).map(|_| seeder.next_u64()).collect())
        .collect();

    let per_segment = (spec.minutes_per_activity * 60.0 * spec.sample_rate_hz).round() as usize;
    let mut records = Vec::with_capacity(spec.expected_records());
    let mut global = 0usize;
    for p in 0..spec.participants {
        let profile = Profile::draw(&mut ChaCha8Rng::seed_from_u64(profile_seeds[p]));
        for (a, &label) in spec.activities.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(segment_seeds[p][a]);
            let channels = synthesize(
                label,
                per_segment,
                spec.sample_rate_hz,
                &profile,
                &mut rng,
                spec.noise_scale,
            );
            for ch in channels {
                records.push((
                    ImuSample::new(
                        timestamp_for(global, spec.sample_rate_hz),
                        [ch[0], ch[1], ch[2]],
                        [ch[3], ch[4], ch[5]],
                    ),
                    label,
                ));
                global += 1;
            }
        }
    }

    let source = format!(
        "synthgen seed={} participants={} minutes={} rate={} activities={} noise={}",
        spec.seed,
        spec.participants,
        spec.minutes_per_activity,
        spec.sample_rate_hz,
        spec.activities
            .iter()
            .map(|a| a.as_str())
            .collect::<Vec<_>>()
            .join("+"),
        spec.noise_scale
    );
    Ok(LabeledDataset::new(records, spec.sample_rate_hz, source))
}

fn timestamp_for(index: usize, rate_hz: f64) -> u64 {
    (index as f64 * 1000.0 / rate_hz).round() as u64
}

/// One burst event placed on the timeline.
struct BurstEvent {
    start_s: f64,
    dur_s: f64,
    accel_amp: f64,
    gyro_amp: f64,
    ring_hz: f64,
    phase: f64,
}

/// Slow multiplicative amplitude drift across a session, so windows within
/// one recording span a range instead of clustering at the session mean.
struct Drift {
    depth: f64,
    period_s: f64,
    phase: f64,
}

impl Drift {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        Drift {
            depth: rng.random_range(0.12..0.40),
            period_s: rng.random_range(20.0..60.0),
            phase: rng.random_range(0.0..std::f64::consts::TAU),
        }
    }

    fn gain(&self, t: f64) -> f64 {
        1.0 + self.depth * (std::f64::consts::TAU * t / self.period_s + self.phase).sin()
    }
}

fn synthesize(
    label: ActivityLabel,
    n: usize,
    rate_hz: f64,
    profile: &Profile,
    rng: &mut ChaCha8Rng,
    noise_scale: f64,
) -> Vec<[f64; 6]> {
    let model = ActivityModel::for_label(label);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let duration_s = n as f64 / rate_hz;

    // session-level draws (consumed even when unused, keeping the stream
    // layout identical across labels)
    let rate = rng.random_range(model.event_rate_hz.0..=model.event_rate_hz.1) * profile.tempo;
    let duty = rng.random_range(model.duty.0..=model.duty.1);
    let amp_center = rng.random_range(model.accel_amp.0..=model.accel_amp.1) * profile.style;
    let gyro_center = rng.random_range(model.gyro_amp.0..=model.gyro_amp.1) * profile.style;
    // chew/jitter direction: which axes the burst mostly lands on
    let dir = random_unit(rng);
    let gyro_dir = random_unit(rng);
    let sway_phase = rng.random_range(0.0..std::f64::consts::TAU);

    let events = if rate > 0.0 {
        plan_events(label, duration_s, rate, duty, amp_center, gyro_center, rng)
    } else {
        Vec::new()
    };

    // baseline: gravity + posture tilt + micro-sway + noise floor
    let mut out = vec![[0.0f64; 6]; n];
    let sway_amp = 0.004 * noise_scale;
    for (i, sample) in out.iter_mut().enumerate() {
        let t = i as f64 / rate_hz;
        let sway = sway_amp * (std::f64::consts::TAU * 0.25 * t + sway_phase).sin();
        let (accel, gyro) = sample.split_at_mut(3);
        for (c, v) in accel.iter_mut().enumerate() {
            *v = model.baseline_gravity[c]
                + profile.tilt[c]
                + sway
                + noise_scale * model.noise_floor_accel * normal.sample(rng);
        }
        for v in gyro.iter_mut() {
            *v = noise_scale * model.noise_floor_gyro * normal.sample(rng);
        }
    }

    for event in &events {
        render_event(label, event, &dir, &gyro_dir, rate_hz, rng, &mut out);
    }
    out
}

/// Lays out burst events with jittered spacing, per-event amplitudes, slow
/// session drift, and occasional pauses (nobody chews or talks without
/// stopping).
fn plan_events(
    label: ActivityLabel,
    duration_s: f64,
    rate: f64,
    duty: f64,
    amp_center: f64,
    gyro_center: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<BurstEvent> {
    let period = 1.0 / rate;
    let drift = Drift::draw(rng);
    let pause_prob = match label {
        ActivityLabel::Beverage => 0.0, // sips are already sparse
        _ => rng.random_range(0.05..0.15),
    };
    let mut events = Vec::new();
    let mut t = rng.random_range(0.0..period);
    while t < duration_s {
        let dur = (duty * period).clamp(0.06, 2.0);
        let ring_hz = match label {
            ActivityLabel::CrunchyFood => rng.random_range(6.0..12.0),
            ActivityLabel::SoftFood => rng.random_range(4.0..8.5),
            ActivityLabel::Beverage => rng.random_range(5.0..8.0),
            _ => rng.random_range(6.0..12.0),
        };
        let gain = drift.gain(t);
        events.push(BurstEvent {
            start_s: t,
            dur_s: dur,
            accel_amp: amp_center * gain * rng.random_range(0.55..1.5),
            gyro_amp: gyro_center * gain * rng.random_range(0.55..1.5),
            ring_hz,
            phase: rng.random_range(0.0..std::f64::consts::TAU),
        });
        t += period * rng.random_range(0.8..1.25);
        if rng.random_range(0.0..1.0) < pause_prob {
            t += rng.random_range(1.5..4.5);
        }
    }
    events
}

fn render_event(
    label: ActivityLabel,
    event: &BurstEvent,
    dir: &[f64; 3],
    gyro_dir: &[f64; 3],
    rate_hz: f64,
    rng: &mut ChaCha8Rng,
    out: &mut [[f64; 6]],
) {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let first = (event.start_s * rate_hz).ceil() as usize;
    let last = ((event.start_s + event.dur_s) * rate_hz).floor() as usize;
    for i in first..=last.min(out.len().saturating_sub(1)) {
        if i >= out.len() {
            break;
        }
        let tau = i as f64 / rate_hz - event.start_s;
        let frac = (tau / event.dur_s).clamp(0.0, 1.0);
        match label {
            ActivityLabel::CrunchyFood | ActivityLabel::SoftFood => {
                // ringing impact with exponential decay plus crackle
                let envelope = (-3.0 * frac).exp() * (std::f64::consts::PI * frac).sin().max(0.05);
                let ring = (std::f64::consts::TAU * event.ring_hz * tau + event.phase).sin();
                let crackle = 0.5 * normal.sample(rng);
                let a = event.accel_amp * envelope * (ring + crackle);
                let g = event.gyro_amp * envelope
                    * (std::f64::consts::TAU * event.ring_hz * 0.5 * tau + event.phase).sin();
                for c in 0..3 {
                    out[i][c] += a * dir[c];
                    out[i][c + 3] += g * gyro_dir[c];
                }
            }
            ActivityLabel::Beverage => {
                // tilt excursion over the first 70% of the sip, swallow
                // bursts near the end
                if frac < 0.7 {
                    let bump = (std::f64::consts::PI * frac / 0.7).sin();
                    out[i][3] += event.gyro_amp * bump * gyro_dir[0].abs();
                    out[i][5] += 0.45 * event.gyro_amp * bump * gyro_dir[2];
                    // gravity vector leans with the head tilt
                    let lean = 0.14 * (event.gyro_amp / 75.0) * bump;
                    out[i][0] += lean * dir[0].signum();
                    out[i][2] += 0.5 * lean * dir[2].signum();
                } else {
                    let swallow = (std::f64::consts::PI * (frac - 0.7) / 0.3).sin();
                    let burst = event.accel_amp
                        * swallow
                        * (std::f64::consts::TAU * event.ring_hz * tau).sin();
                    for c in 0..3 {
                        out[i][c] += burst * dir[c];
                    }
                    out[i][4] += 0.2 * event.gyro_amp * swallow * gyro_dir[1];
                }
            }
            ActivityLabel::Speaking => {
                // syllabic broadband jitter
                let envelope = (std::f64::consts::PI * frac).sin();
                let mod_4hz = 0.7 + 0.3 * (std::f64::consts::TAU * 4.2 * tau + event.phase).sin();
                for c in 0..3 {
                    out[i][c] += event.accel_amp * envelope * mod_4hz * normal.sample(rng) * dir[c].abs().max(0.4);
                    out[i][c + 3] +=
                        event.gyro_amp * envelope * mod_4hz * normal.sample(rng) * gyro_dir[c].abs().max(0.4);
                }
            }
            ActivityLabel::Idle => {}
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-3 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}
