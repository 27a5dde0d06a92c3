//! Egocentric frames and relative-direction labels.
//!
//! Axis convention: `forward` is the horizontal heading, `up` is +z and
//! `left = up × forward`, which makes `forward × left = up` (right-handed).
//! Local coordinates are ordered (forward, left, up).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{up_axis, GeometryError, Vec3, LINEAR_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub origin: Vec3,
    pub forward: Vec3,
    pub left: Vec3,
    pub up: Vec3,
}

impl Frame {
    /// The world frame: forward +x, left +y, up +z.
    pub fn world() -> Self {
        Self {
            origin: Vec3::zeros(),
            forward: Vec3::x(),
            left: Vec3::y(),
            up: Vec3::z(),
        }
    }

    /// World point to local (forward, left, up) coordinates.
    pub fn project(&self, p: &Vec3) -> Vec3 {
        let d = p - self.origin;
        Vec3::new(d.dot(&self.forward), d.dot(&self.left), d.dot(&self.up))
    }

    /// Local (forward, left, up) coordinates back to a world point.
    pub fn unproject(&self, local: &Vec3) -> Vec3 {
        self.origin + self.forward * local.x + self.left * local.y + self.up * local.z
    }

    /// Orthonormal and right-handed within `LINEAR_TOL`.
    pub fn is_valid(&self) -> bool {
        let unit = |v: &Vec3| (v.norm() - 1.0).abs() <= LINEAR_TOL;
        unit(&self.forward)
            && unit(&self.left)
            && unit(&self.up)
            && self.forward.dot(&self.left).abs() <= LINEAR_TOL
            && self.forward.dot(&self.up).abs() <= LINEAR_TOL
            && self.left.dot(&self.up).abs() <= LINEAR_TOL
            && (self.forward.cross(&self.left) - self.up).norm() <= LINEAR_TOL
    }
}

/// Frame standing at `standing_at` and looking horizontally toward
/// `facing_toward`.
pub fn build_egocentric_frame(standing_at: &Vec3, facing_toward: &Vec3) -> Result<Frame, GeometryError> {
    let d = facing_toward - standing_at;
    let horizontal = Vec3::new(d.x, d.y, 0.0);
    let len = horizontal.norm();
    if !len.is_finite() || len <= LINEAR_TOL {
        return Err(GeometryError::DegenerateFrame);
    }
    let forward = horizontal / len;
    let up = up_axis();
    let left = up.cross(&forward);
    Ok(Frame {
        origin: *standing_at,
        forward,
        left,
        up,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    /// Labels this difficulty can produce, in option order.
    pub fn labels(self) -> &'static [DirectionLabel] {
        use DirectionLabel::*;
        match self {
            Difficulty::Easy => &[Left, Right],
            Difficulty::Medium => &[Left, Right, Back],
            Difficulty::Hard => &[FrontLeft, FrontRight, BackLeft, BackRight],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" | "med" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(format!("unknown difficulty '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionLabel {
    Left,
    Right,
    Back,
    FrontLeft,
    FrontRight,
    BackLeft,
    BackRight,
}

impl DirectionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            DirectionLabel::Left => "left",
            DirectionLabel::Right => "right",
            DirectionLabel::Back => "back",
            DirectionLabel::FrontLeft => "front-left",
            DirectionLabel::FrontRight => "front-right",
            DirectionLabel::BackLeft => "back-left",
            DirectionLabel::BackRight => "back-right",
        }
    }

    /// Left/right half of the label, if it has one.
    pub fn lateral(self) -> Option<DirectionLabel> {
        use DirectionLabel::*;
        match self {
            Left | FrontLeft | BackLeft => Some(Left),
            Right | FrontRight | BackRight => Some(Right),
            Back => None,
        }
    }
}

impl fmt::Display for DirectionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DirectionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .map(|c| if c == '_' || c == ' ' { '-' } else { c })
            .collect();
        use DirectionLabel::*;
        [Left, Right, Back, FrontLeft, FrontRight, BackLeft, BackRight]
            .into_iter()
            .find(|l| l.as_str() == norm)
            .ok_or_else(|| format!("unknown direction '{s}'"))
    }
}

/// Classifies a local (forward, left, up) vector.
///
/// - easy: left when `l >= 0`, else right.
/// - medium: back when `f < -|l|`, else left/right as for easy.
/// - hard: front when `f >= 0`, back otherwise, composed with left/right.
///
/// Ties on `l = 0`, `f = 0` or `|f| = |l|` resolve toward front and left.
pub fn classify_direction(local: &Vec3, difficulty: Difficulty) -> Result<DirectionLabel, GeometryError> {
    let (f, l) = (local.x, local.y);
    if !f.is_finite() || !l.is_finite() || f.hypot(l) <= LINEAR_TOL {
        return Err(GeometryError::DegenerateDirection);
    }
    let lateral_left = l >= 0.0;
    use DirectionLabel::*;
    Ok(match difficulty {
        Difficulty::Easy => {
            if lateral_left {
                Left
            } else {
                Right
            }
        }
        Difficulty::Medium => {
            if f < -l.abs() {
                Back
            } else if lateral_left {
                Left
            } else {
                Right
            }
        }
        Difficulty::Hard => match (f >= 0.0, lateral_left) {
            (true, true) => FrontLeft,
            (true, false) => FrontRight,
            (false, true) => BackLeft,
            (false, false) => BackRight,
        },
    })
}
