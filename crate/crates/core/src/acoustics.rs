//! Resonance modes, vortex shedding and the lock-in rule.
//!
//! The emitted tone of the tube is the resonance mode nearest to the
//! vortex-shedding frequency, provided the shedding is strong enough to
//! capture it. Shedding strength falls off once cavities grow past a critical
//! width, and a wide inlet feeding a narrower downstream section does not
//! whistle at all.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::StretchedGeometry;

/// Speed of sound in air at 20 °C, m/s.
pub const SPEED_OF_SOUND: f64 = 343.0;

/// Relative slack used when comparing a frequency against a capture edge.
const EDGE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcousticConfig {
    pub speed_of_sound: f64,
    /// Audible band `(low, high)` in Hz; modes outside it never sound.
    pub band: (f64, f64),
    /// Capture half-width as a multiple of half the mode spacing.
    pub lock_in_factor: f64,
    /// Gaussian width of the lock-in strength, as a fraction of mode spacing.
    pub strength_width: f64,
    /// Cavity width beyond which shedding weakens, mm.
    pub critical_width_mm: f64,
    /// Shedding vanishes at `critical_width_mm * decay_span`.
    pub decay_span: f64,
    /// Inlet/downstream width ratio above which the tube falls silent.
    pub reversal_ratio: f64,
    /// Evaluate the sweep's mode table at the local Mach number.
    pub mach_correction: bool,
}

impl Default for AcousticConfig {
    fn default() -> Self {
        AcousticConfig {
            speed_of_sound: SPEED_OF_SOUND,
            band: (3000.0, 8000.0),
            lock_in_factor: 1.0,
            strength_width: 0.25,
            critical_width_mm: 4.2,
            decay_span: 1.35,
            reversal_ratio: 1.15,
            mach_correction: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    speed: f64,
    mach: f64,
}

impl FlowState {
    pub fn new(speed: f64, speed_of_sound: f64) -> Result<Self> {
        if !(speed >= 0.0) || !speed.is_finite() {
            return Err(Error::Domain(format!("flow speed {speed} must be non-negative")));
        }
        let mach = speed / speed_of_sound;
        if mach >= 1.0 {
            return Err(Error::Domain(format!("Mach number {mach} must be below 1")));
        }
        Ok(FlowState { speed, mach })
    }

    pub fn still() -> Self {
        FlowState { speed: 0.0, mach: 0.0 }
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn mach(&self) -> f64 {
        self.mach
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceMode {
    pub number: u32,
    pub frequency: f64,
}

/// `n c / 2L` for an open pipe of length `length_mm`.
pub fn open_pipe_mode(n: u32, length_mm: f64, speed_of_sound: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("mode number must be at least 1".into()));
    }
    if !(length_mm > 0.0) {
        return Err(Error::Domain(format!("pipe length {length_mm} must be positive")));
    }
    Ok(n as f64 * speed_of_sound / (2.0 * length_mm / 1000.0))
}

/// Open-pipe mode scaled by `(1 - M²) / (1 + correction_term)`.
pub fn corrugated_mode(n: u32, length_mm: f64, correction_term: f64, mach: f64, speed_of_sound: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&mach) {
        return Err(Error::Domain(format!("Mach number {mach} must be in [0, 1)")));
    }
    let base = open_pipe_mode(n, length_mm, speed_of_sound)?;
    Ok(base * (1.0 - mach * mach) / (1.0 + correction_term))
}

/// Resonance mode `n` of a corrugated tube; multi-profile tubes use the
/// length-weighted correction term.
pub fn cummings_mode(n: u32, g: &StretchedGeometry, flow: FlowState, speed_of_sound: f64) -> Result<f64> {
    corrugated_mode(n, g.total_length_mm(), g.correction_term(), flow.mach(), speed_of_sound)
}

/// Modes that fall inside `band`, ascending, together with the mode spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable {
    pub spacing: f64,
    pub modes: Vec<ResonanceMode>,
}

impl ModeTable {
    pub fn new(g: &StretchedGeometry, flow: FlowState, config: &AcousticConfig) -> Self {
        let c = config.speed_of_sound;
        let mode = |n: u32| cummings_mode(n, g, flow, c).expect("validated geometry and flow");
        let spacing = mode(1);
        let (low, high) = config.band;
        let mut modes = Vec::new();
        let mut n = 1;
        loop {
            let f = mode(n);
            if f > high {
                break;
            }
            if f >= low {
                modes.push(ResonanceMode {
                    number: n,
                    frequency: f,
                });
            }
            n += 1;
        }
        ModeTable { spacing, modes }
    }
}

/// Strouhal scaling between flow speed and shedding frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexModel {
    pub strouhal: f64,
    /// Characteristic length (inlet cavity width plus edge radius), mm.
    pub char_length_mm: f64,
}

impl VortexModel {
    pub fn new(strouhal: f64, char_length_mm: f64) -> Result<Self> {
        if !(strouhal > 0.0) || !(char_length_mm > 0.0) {
            return Err(Error::Domain(format!(
                "Strouhal number ({strouhal}) and characteristic length ({char_length_mm}) must be positive"
            )));
        }
        Ok(VortexModel {
            strouhal,
            char_length_mm,
        })
    }

    /// F-U slope in Hz per m/s.
    pub fn slope(&self) -> f64 {
        self.strouhal / (self.char_length_mm / 1000.0)
    }

    /// Same Strouhal number, characteristic length taken from `g`'s inlet.
    pub fn for_geometry(&self, g: &StretchedGeometry) -> Self {
        VortexModel {
            strouhal: self.strouhal,
            char_length_mm: characteristic_length_mm(g),
        }
    }
}

pub fn characteristic_length_mm(g: &StretchedGeometry) -> f64 {
    let inlet = g.inlet().profile;
    inlet.cavity_width_mm() + inlet.edge_radius_mm()
}

pub fn vortex_frequency(flow: FlowState, vm: &VortexModel) -> f64 {
    vm.strouhal * flow.speed() / (vm.char_length_mm / 1000.0)
}

/// Chooses the Strouhal number so that `g` sheds at `target_slope` Hz per m/s.
pub fn calibrate_strouhal(target_slope: f64, g: &StretchedGeometry) -> Result<VortexModel> {
    if !(target_slope > 0.0) {
        return Err(Error::Domain(format!("target slope {target_slope} must be positive")));
    }
    let char_length_mm = characteristic_length_mm(g);
    VortexModel::new(target_slope * char_length_mm / 1000.0, char_length_mm)
}

/// Shedding weakening with cavity width: 1 up to the critical width, then a
/// linear fall to 0 at `critical * decay_span`.
pub fn cavity_decay(width_mm: f64, config: &AcousticConfig) -> f64 {
    let critical = config.critical_width_mm;
    if width_mm <= critical {
        return 1.0;
    }
    let span = (config.decay_span - 1.0) * critical;
    (1.0 - (width_mm - critical) / span).max(0.0)
}

/// Overall shedding strength of a tube in `[0, 1]`.
///
/// The inlet cavities set whether vortices form at all; every segment then
/// contributes to the sustained tone in proportion to its length. A rest-state
/// inlet wider than `reversal_ratio` times a downstream cavity is silent.
pub fn vortex_strength(g: &StretchedGeometry, config: &AcousticConfig) -> f64 {
    let rest = g.base().segments();
    let inlet_rest = rest[0].profile.cavity_width_mm();
    let narrowest_downstream = rest[1..]
        .iter()
        .map(|s| s.profile.cavity_width_mm())
        .fold(f64::INFINITY, f64::min);
    if inlet_rest > config.reversal_ratio * narrowest_downstream {
        return 0.0;
    }
    let generation = cavity_decay(g.inlet().profile.cavity_width_mm(), config);
    let participation = g
        .segments()
        .iter()
        .map(|s| s.length_mm * cavity_decay(s.profile.cavity_width_mm(), config))
        .sum::<f64>()
        / g.total_length_mm();
    generation * participation
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockIn {
    pub frequency: Option<f64>,
    pub mode: Option<u32>,
}

impl LockIn {
    pub const SILENT: LockIn = LockIn {
        frequency: None,
        mode: None,
    };
}

/// Nearest in-band mode to `f_v`, or silence when none captures it.
pub fn lock_in(f_v: f64, g: &StretchedGeometry, flow: FlowState, config: &AcousticConfig) -> Result<LockIn> {
    let (low, high) = config.band;
    if !(low < high) {
        return Err(Error::Domain(format!("band ({low}, {high}) must be increasing")));
    }
    let table = ModeTable::new(g, flow, config);
    Ok(lock_in_table(f_v, &table, vortex_strength(g, config), config))
}

pub(crate) fn lock_in_table(f_v: f64, table: &ModeTable, strength: f64, config: &AcousticConfig) -> LockIn {
    if strength <= 0.0 {
        return LockIn::SILENT;
    }
    let mut best: Option<(f64, &ResonanceMode)> = None;
    for m in &table.modes {
        let d = (f_v - m.frequency).abs();
        // Ascending scan; a later mode must be clearly closer, so ties keep the lower one.
        if best.is_none_or(|(bd, _)| d < bd - EDGE_EPS * m.frequency) {
            best = Some((d, m));
        }
    }
    let Some((distance, mode)) = best else {
        return LockIn::SILENT;
    };
    let capture = 0.5 * table.spacing * config.lock_in_factor * strength;
    if distance > capture * (1.0 + EDGE_EPS) {
        return LockIn::SILENT;
    }
    LockIn {
        frequency: Some(mode.frequency),
        mode: Some(mode.number),
    }
}

/// Tone amplitude for shedding at `f_v` locked onto `locked_mode_freq`.
pub fn resonance_strength(
    f_v: f64,
    locked_mode_freq: f64,
    g: &StretchedGeometry,
    config: &AcousticConfig,
) -> Result<f64> {
    if !(locked_mode_freq > 0.0) {
        return Err(Error::Domain("locked mode frequency must be positive".into()));
    }
    let spacing = cummings_mode(1, g, FlowState::still(), config.speed_of_sound)?;
    Ok(strength_with(
        f_v,
        locked_mode_freq,
        spacing,
        vortex_strength(g, config),
        config,
    ))
}

fn strength_with(f_v: f64, f_n: f64, spacing: f64, vortex: f64, config: &AcousticConfig) -> f64 {
    let sigma = config.strength_width * spacing;
    let d = f_v - f_n;
    (-(d * d) / (2.0 * sigma * sigma)).exp() * vortex
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseSample {
    pub speed: f64,
    pub frequency: Option<f64>,
    pub amplitude: f64,
    pub mode: Option<u32>,
}

/// Emitted tone as a function of flow speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcousticResponse {
    pub samples: Vec<ResponseSample>,
}

impl AcousticResponse {
    pub fn is_silent(&self) -> bool {
        self.samples.iter().all(|s| s.frequency.is_none())
    }
}

/// Evaluates the lock-in model at every speed in `speeds`.
pub fn acoustic_response(
    g: &StretchedGeometry,
    vm: &VortexModel,
    speeds: &[f64],
    config: &AcousticConfig,
) -> Result<AcousticResponse> {
    let c = config.speed_of_sound;
    let strength = vortex_strength(g, config);
    let still = ModeTable::new(g, FlowState::still(), config);
    let samples = speeds
        .iter()
        .map(|&u| {
            let flow = FlowState::new(u, c)?;
            let f_v = vortex_frequency(flow, vm);
            let table;
            let table_ref = if config.mach_correction {
                table = ModeTable::new(g, flow, config);
                &table
            } else {
                &still
            };
            let lock = lock_in_table(f_v, table_ref, strength, config);
            let amplitude = match lock.frequency {
                Some(f_n) => strength_with(f_v, f_n, table_ref.spacing, strength, config),
                None => 0.0,
            };
            Ok(ResponseSample {
                speed: u,
                frequency: lock.frequency,
                amplitude,
                mode: lock.mode,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AcousticResponse { samples })
}
