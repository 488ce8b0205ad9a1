//! Tube geometry: corrugation profiles, the three sensor presets and the
//! effect of stretching each half segment.
//!
//! All lengths are millimetres. Geometry values are immutable once built and
//! validated; JSON (de)serialization goes through the same validation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inner radius shared by every fabricated sensor.
pub const INNER_RADIUS_MM: f64 = 1.9;
/// Outer radius shared by every fabricated sensor.
pub const OUTER_RADIUS_MM: f64 = 3.9;
/// Neutral-length fundamental the presets are sized to.
pub const NEUTRAL_FUNDAMENTAL_HZ: f64 = 722.0;
/// Sensing range of each half-segment elongation.
pub const MAX_STRETCH_MM: f64 = 10.0;

/// Cross-section of one corrugation period.
///
/// The wall follows `y = cos(k x)`, so the pitch is `2π / k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct CorrugationProfile {
    pitch_mm: f64,
    cavity_width_mm: f64,
    cavity_depth_mm: f64,
    edge_radius_mm: f64,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    pitch_mm: f64,
    cavity_width_mm: f64,
    cavity_depth_mm: f64,
    #[serde(default)]
    edge_radius_mm: f64,
}

impl TryFrom<RawProfile> for CorrugationProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        CorrugationProfile::new(
            raw.pitch_mm,
            raw.cavity_width_mm,
            raw.cavity_depth_mm,
            raw.edge_radius_mm,
        )
    }
}

impl From<CorrugationProfile> for RawProfile {
    fn from(p: CorrugationProfile) -> Self {
        RawProfile {
            pitch_mm: p.pitch_mm,
            cavity_width_mm: p.cavity_width_mm,
            cavity_depth_mm: p.cavity_depth_mm,
            edge_radius_mm: p.edge_radius_mm,
        }
    }
}

impl CorrugationProfile {
    pub fn new(pitch_mm: f64, cavity_width_mm: f64, cavity_depth_mm: f64, edge_radius_mm: f64) -> Result<Self> {
        let finite = [pitch_mm, cavity_width_mm, cavity_depth_mm, edge_radius_mm]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidGeometry("profile values must be finite".into()));
        }
        if pitch_mm <= 0.0 || cavity_width_mm <= 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "pitch ({pitch_mm}) and cavity width ({cavity_width_mm}) must be positive"
            )));
        }
        if cavity_depth_mm < 0.0 || edge_radius_mm < 0.0 {
            return Err(Error::InvalidGeometry(
                "cavity depth and edge radius must be non-negative".into(),
            ));
        }
        if cavity_width_mm > pitch_mm * (1.0 + 1e-12) {
            return Err(Error::InvalidGeometry(format!(
                "cavity width {cavity_width_mm} exceeds pitch {pitch_mm}"
            )));
        }
        Ok(CorrugationProfile {
            pitch_mm,
            cavity_width_mm,
            cavity_depth_mm,
            edge_radius_mm,
        })
    }

    /// Cosine profile with wavenumber `k` (1/mm); cavity width equals the pitch.
    pub fn cosine(wavenumber: f64, cavity_depth_mm: f64) -> Result<Self> {
        if !(wavenumber > 0.0) || !wavenumber.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "wavenumber {wavenumber} must be positive"
            )));
        }
        let pitch = 2.0 * PI / wavenumber;
        CorrugationProfile::new(pitch, pitch, cavity_depth_mm, 0.0)
    }

    pub fn pitch_mm(&self) -> f64 {
        self.pitch_mm
    }

    pub fn cavity_width_mm(&self) -> f64 {
        self.cavity_width_mm
    }

    pub fn cavity_depth_mm(&self) -> f64 {
        self.cavity_depth_mm
    }

    pub fn edge_radius_mm(&self) -> f64 {
        self.edge_radius_mm
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.pitch_mm
    }

    pub fn with_edge_radius(self, edge_radius_mm: f64) -> Result<Self> {
        CorrugationProfile::new(
            self.pitch_mm,
            self.cavity_width_mm,
            self.cavity_depth_mm,
            edge_radius_mm,
        )
    }

    /// Scales pitch and cavity width by `1 + strain`; depth and edge radius stay.
    fn stretched(&self, strain: f64) -> Self {
        CorrugationProfile {
            pitch_mm: self.pitch_mm * (1.0 + strain),
            cavity_width_mm: self.cavity_width_mm * (1.0 + strain),
            ..*self
        }
    }

    /// Geometric correction term of the corrugated-pipe resonance model,
    /// `(d_c/R)(w_c/p_c)(1 + d_c/2R)`.
    pub fn correction_term(&self, inner_radius_mm: f64) -> f64 {
        let depth_ratio = self.cavity_depth_mm / inner_radius_mm;
        depth_ratio * (self.cavity_width_mm / self.pitch_mm) * (1.0 + depth_ratio / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length_mm: f64,
    pub profile: CorrugationProfile,
}

/// Rest-state tube: radii plus segments ordered inlet to outlet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTube", into = "RawTube")]
pub struct TubeGeometry {
    inner_radius_mm: f64,
    outer_radius_mm: f64,
    segments: Vec<Segment>,
}

#[derive(Serialize, Deserialize)]
struct RawTube {
    inner_radius_mm: f64,
    outer_radius_mm: f64,
    segments: Vec<Segment>,
}

impl TryFrom<RawTube> for TubeGeometry {
    type Error = Error;

    fn try_from(raw: RawTube) -> Result<Self> {
        TubeGeometry::new(raw.inner_radius_mm, raw.outer_radius_mm, raw.segments)
    }
}

impl From<TubeGeometry> for RawTube {
    fn from(t: TubeGeometry) -> Self {
        RawTube {
            inner_radius_mm: t.inner_radius_mm,
            outer_radius_mm: t.outer_radius_mm,
            segments: t.segments,
        }
    }
}

impl TubeGeometry {
    pub fn new(inner_radius_mm: f64, outer_radius_mm: f64, segments: Vec<Segment>) -> Result<Self> {
        if !(inner_radius_mm > 0.0 && outer_radius_mm > inner_radius_mm) {
            return Err(Error::InvalidGeometry(format!(
                "radii must satisfy R_out > R > 0 (got R = {inner_radius_mm}, R_out = {outer_radius_mm})"
            )));
        }
        if segments.is_empty() {
            return Err(Error::InvalidGeometry("tube needs at least one segment".into()));
        }
        let wall = outer_radius_mm - inner_radius_mm;
        for (i, s) in segments.iter().enumerate() {
            if !(s.length_mm > 0.0) || !s.length_mm.is_finite() {
                return Err(Error::InvalidGeometry(format!(
                    "segment {i} rest length {} must be positive",
                    s.length_mm
                )));
            }
            let depth = s.profile.cavity_depth_mm();
            if (depth - wall).abs() > 1e-9 * wall.max(1.0) {
                return Err(Error::InvalidGeometry(format!(
                    "segment {i} cavity depth {depth} does not span the wall ({wall})"
                )));
            }
        }
        Ok(TubeGeometry {
            inner_radius_mm,
            outer_radius_mm,
            segments,
        })
    }

    pub fn inner_radius_mm(&self) -> f64 {
        self.inner_radius_mm
    }

    pub fn outer_radius_mm(&self) -> f64 {
        self.outer_radius_mm
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn rest_length_mm(&self) -> f64 {
        self.segments.iter().map(|s| s.length_mm).sum()
    }

    /// Same tube with the flow entering from the other end.
    pub fn reversed(&self) -> Self {
        let mut segments = self.segments.clone();
        segments.reverse();
        TubeGeometry {
            segments,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// The three fabricated sensor designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorPreset {
    /// Single 3.14 mm period (k = 2).
    P31,
    /// Single 4.18 mm period (k = 1.5).
    P41,
    /// 3.14 mm inlet half, 4.18 mm outlet half.
    Pdual,
}

impl SensorPreset {
    pub const ALL: [SensorPreset; 3] = [SensorPreset::P31, SensorPreset::P41, SensorPreset::Pdual];

    /// Measured neutral-length F-U slope each sensor is calibrated to, Hz per m/s.
    pub fn reference_slope(self) -> f64 {
        match self {
            SensorPreset::P31 => 660.0,
            SensorPreset::P41 => 570.0,
            SensorPreset::Pdual => 670.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SensorPreset::P31 => "p31",
            SensorPreset::P41 => "p41",
            SensorPreset::Pdual => "pdual",
        }
    }

    fn wavenumbers(self) -> (f64, f64) {
        match self {
            SensorPreset::P31 => (2.0, 2.0),
            SensorPreset::P41 => (1.5, 1.5),
            SensorPreset::Pdual => (2.0, 1.5),
        }
    }
}

impl fmt::Display for SensorPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SensorPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p31" => Ok(SensorPreset::P31),
            "p41" => Ok(SensorPreset::P41),
            "pdual" => Ok(SensorPreset::Pdual),
            other => Err(Error::Domain(format!("unknown sensor preset '{other}'"))),
        }
    }
}

/// Half-segment rest length that places the fundamental at 722 Hz.
///
/// Inverts the corrugated-pipe resonance model at zero flow for a tube whose
/// segments all share `correction_term`.
pub fn neutral_half_length_mm(correction_term: f64, speed_of_sound: f64) -> f64 {
    let total_m = speed_of_sound / (2.0 * NEUTRAL_FUNDAMENTAL_HZ * (1.0 + correction_term));
    total_m * 1000.0 / 2.0
}

pub fn build_sensor(preset: SensorPreset) -> TubeGeometry {
    let depth = OUTER_RADIUS_MM - INNER_RADIUS_MM;
    let (k_in, k_out) = preset.wavenumbers();
    let inlet = CorrugationProfile::cosine(k_in, depth).expect("preset profile");
    let outlet = CorrugationProfile::cosine(k_out, depth).expect("preset profile");
    // w_c = p_c in both halves, so the correction term is shared.
    let half = neutral_half_length_mm(inlet.correction_term(INNER_RADIUS_MM), crate::acoustics::SPEED_OF_SOUND);
    TubeGeometry::new(
        INNER_RADIUS_MM,
        OUTER_RADIUS_MM,
        vec![
            Segment {
                length_mm: half,
                profile: inlet,
            },
            Segment {
                length_mm: half,
                profile: outlet,
            },
        ],
    )
    .expect("preset geometry")
}

/// Elongation applied to the inlet and outlet halves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStretch", into = "RawStretch")]
pub struct StretchState {
    inlet_mm: f64,
    outlet_mm: f64,
}

#[derive(Serialize, Deserialize)]
struct RawStretch {
    inlet_mm: f64,
    outlet_mm: f64,
}

impl TryFrom<RawStretch> for StretchState {
    type Error = Error;

    fn try_from(raw: RawStretch) -> Result<Self> {
        StretchState::new(raw.inlet_mm, raw.outlet_mm)
    }
}

impl From<StretchState> for RawStretch {
    fn from(s: StretchState) -> Self {
        RawStretch {
            inlet_mm: s.inlet_mm,
            outlet_mm: s.outlet_mm,
        }
    }
}

impl StretchState {
    pub const NEUTRAL: StretchState = StretchState {
        inlet_mm: 0.0,
        outlet_mm: 0.0,
    };

    pub fn new(inlet_mm: f64, outlet_mm: f64) -> Result<Self> {
        check_range("delta_L_inlet", inlet_mm)?;
        check_range("delta_L_outlet", outlet_mm)?;
        Ok(StretchState { inlet_mm, outlet_mm })
    }

    /// Clamps each component into the sensing range. Returns the state and
    /// whether any clamping happened.
    pub fn clamped(inlet_mm: f64, outlet_mm: f64) -> (Self, bool) {
        let ci = inlet_mm.clamp(0.0, MAX_STRETCH_MM);
        let co = outlet_mm.clamp(0.0, MAX_STRETCH_MM);
        (
            StretchState {
                inlet_mm: ci,
                outlet_mm: co,
            },
            ci != inlet_mm || co != outlet_mm,
        )
    }

    pub fn inlet_mm(&self) -> f64 {
        self.inlet_mm
    }

    pub fn outlet_mm(&self) -> f64 {
        self.outlet_mm
    }

    pub fn total_mm(&self) -> f64 {
        self.inlet_mm + self.outlet_mm
    }

    pub fn swapped(&self) -> Self {
        StretchState {
            inlet_mm: self.outlet_mm,
            outlet_mm: self.inlet_mm,
        }
    }
}

fn check_range(field: &'static str, value: f64) -> Result<()> {
    if !(0.0..=MAX_STRETCH_MM).contains(&value) {
        return Err(Error::OutOfRange {
            field,
            value,
            min: 0.0,
            max: MAX_STRETCH_MM,
        });
    }
    Ok(())
}

/// A tube after elongation, with the effective per-segment dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchedGeometry {
    base: TubeGeometry,
    stretch: StretchState,
    segments: Vec<Segment>,
}

impl StretchedGeometry {
    /// Unstretched view of any tube, including single-segment ones.
    pub fn at_rest(base: &TubeGeometry) -> Self {
        StretchedGeometry {
            base: base.clone(),
            stretch: StretchState::NEUTRAL,
            segments: base.segments.clone(),
        }
    }

    pub fn base(&self) -> &TubeGeometry {
        &self.base
    }

    pub fn stretch(&self) -> StretchState {
        self.stretch
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn inner_radius_mm(&self) -> f64 {
        self.base.inner_radius_mm
    }

    pub fn inlet(&self) -> &Segment {
        &self.segments[0]
    }

    pub fn outlet(&self) -> &Segment {
        self.segments.last().expect("at least one segment")
    }

    pub fn total_length_mm(&self) -> f64 {
        self.segments.iter().map(|s| s.length_mm).sum()
    }

    /// Length-weighted mean of the per-segment correction term.
    pub fn correction_term(&self) -> f64 {
        let r = self.inner_radius_mm();
        let weighted: f64 = self
            .segments
            .iter()
            .map(|s| s.length_mm * s.profile.correction_term(r))
            .sum();
        weighted / self.total_length_mm()
    }
}

/// Elongates the inlet and outlet halves of a two-segment tube.
pub fn apply_stretch(geom: &TubeGeometry, stretch: StretchState) -> Result<StretchedGeometry> {
    check_range("delta_L_inlet", stretch.inlet_mm)?;
    check_range("delta_L_outlet", stretch.outlet_mm)?;
    if geom.segments.len() != 2 {
        return Err(Error::InvalidGeometry(format!(
            "segmented stretch needs an inlet and an outlet half, tube has {} segments",
            geom.segments.len()
        )));
    }
    let segments = geom
        .segments
        .iter()
        .zip([stretch.inlet_mm, stretch.outlet_mm])
        .map(|(s, delta)| {
            let strain = delta / s.length_mm;
            Segment {
                length_mm: s.length_mm + delta,
                profile: s.profile.stretched(strain),
            }
        })
        .collect();
    Ok(StretchedGeometry {
        base: geom.clone(),
        stretch,
        segments,
    })
}

pub fn total_length(g: &StretchedGeometry) -> f64 {
    g.total_length_mm()
}
