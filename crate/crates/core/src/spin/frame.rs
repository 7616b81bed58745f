use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ORTHO_TOL: f64 = 1e-10;

/// One of the four ⟨111⟩ orientations of the NV axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NvClass {
    C1,
    C2,
    C3,
    C4,
}

impl NvClass {
    pub const ALL: [NvClass; 4] = [NvClass::C1, NvClass::C2, NvClass::C3, NvClass::C4];

    /// Canonical (positive) representative of the class axis, normalized.
    pub fn axis(self) -> Vector3<f64> {
        let v = match self {
            NvClass::C1 => Vector3::new(1.0, 1.0, 1.0),
            NvClass::C2 => Vector3::new(1.0, -1.0, -1.0),
            NvClass::C3 => Vector3::new(-1.0, 1.0, -1.0),
            NvClass::C4 => Vector3::new(-1.0, -1.0, 1.0),
        };
        v / 3f64.sqrt()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl std::fmt::Display for NvClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.index() + 1)
    }
}

/// Right-handed local frame of one spin: ẑ along the NV axis, x̂ along the dominant
/// transverse field. Frames built from raw axes carry no class tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvClassFrame {
    pub class: Option<NvClass>,
    pub x: Vector3<f64>,
    pub y: Vector3<f64>,
    pub z: Vector3<f64>,
}

/// Reference direction used to pick x̂ when no transverse field defines it.
fn canonical_reference() -> Vector3<f64> {
    Vector3::new(1.0, -1.0, 0.0)
}

fn perpendicular_unit(z: &Vector3<f64>, hint: &Vector3<f64>) -> Vector3<f64> {
    let p = hint - z * z.dot(hint);
    if p.norm() > 1e-8 {
        return p.normalize();
    }
    // hint parallel to z; fall back to the crystal axis least aligned with z
    let mut best = Vector3::x();
    for e in [Vector3::x(), Vector3::y(), Vector3::z()] {
        if e.dot(z).abs() < best.dot(z).abs() {
            best = e;
        }
    }
    (best - z * z.dot(&best)).normalize()
}

impl NvClassFrame {
    /// Frame from explicit ẑ and x̂; ŷ = ẑ × x̂.
    pub fn from_axes(z: Vector3<f64>, x: Vector3<f64>) -> Result<Self> {
        let f = Self {
            class: None,
            x,
            y: z.cross(&x),
            z,
        };
        f.validate()?;
        Ok(f)
    }

    /// Canonical frame of a class: positive ⟨111⟩ representative, fixed x̂.
    pub fn canonical(class: NvClass) -> Self {
        let z = class.axis();
        let x = perpendicular_unit(&z, &canonical_reference());
        Self {
            class: Some(class),
            x,
            y: z.cross(&x),
            z,
        }
    }

    /// Frame of `class` adapted to a field direction: ẑ sign chosen so that `b·ẑ ≥ 0`,
    /// x̂ along the transverse projection of `b`. A zero field gives the canonical frame.
    pub fn in_field(class: NvClass, b: &Vector3<f64>) -> Self {
        let mut z = class.axis();
        let bn = b.norm();
        if bn == 0.0 || !bn.is_finite() {
            return Self::canonical(class);
        }
        if b.dot(&z) < 0.0 {
            z = -z;
        }
        let b_perp = b - z * z.dot(b);
        let x = if b_perp.norm() > 1e-12 * bn {
            b_perp.normalize()
        } else {
            perpendicular_unit(&z, &canonical_reference())
        };
        Self {
            class: Some(class),
            x,
            y: z.cross(&x),
            z,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("|x|", self.x.norm() - 1.0),
            ("|y|", self.y.norm() - 1.0),
            ("|z|", self.z.norm() - 1.0),
            ("x·z", self.x.dot(&self.z)),
            ("x·y", self.x.dot(&self.y)),
            ("y·z", self.y.dot(&self.z)),
        ];
        for (name, dev) in checks {
            if !dev.is_finite() || dev.abs() > ORTHO_TOL {
                return Err(Error::InvalidFrame(format!("{name} deviates by {dev:e}")));
            }
        }
        if (self.z.cross(&self.x) - self.y).norm() > ORTHO_TOL {
            return Err(Error::InvalidFrame("frame is not right-handed".into()));
        }
        Ok(())
    }

    /// Rotate the transverse axes by `angle` about ẑ.
    pub fn rotated_about_z(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let x = self.x * c + self.y * s;
        Self {
            class: self.class,
            x,
            y: self.z.cross(&x),
            z: self.z,
        }
    }

    /// Apply a proper rotation to all three axes.
    pub fn rotated(&self, r: &nalgebra::Rotation3<f64>) -> Self {
        Self {
            class: None,
            x: r * self.x,
            y: r * self.y,
            z: r * self.z,
        }
    }

    /// Components of a crystal-frame vector in this frame.
    pub fn project(&self, v: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(v.dot(&self.x), v.dot(&self.y), v.dot(&self.z))
    }

    pub fn axes(&self) -> [Vector3<f64>; 3] {
        [self.x, self.y, self.z]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_axes_tetrahedral() {
        for (i, a) in NvClass::ALL.iter().enumerate() {
            assert!((a.axis().norm() - 1.0).abs() < 1e-12);
            for b in &NvClass::ALL[i + 1..] {
                assert!((a.axis().dot(&b.axis()).abs() - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn canonical_frames_are_orthonormal() {
        for c in NvClass::ALL {
            NvClassFrame::canonical(c).validate().unwrap();
        }
    }

    #[test]
    fn field_frame_sign_and_x() {
        let b = Vector3::new(-1.0, -0.2, -0.5);
        for c in NvClass::ALL {
            let f = NvClassFrame::in_field(c, &b);
            f.validate().unwrap();
            assert!(b.dot(&f.z) >= 0.0);
            assert!(b.dot(&f.y).abs() < 1e-12);
            assert!(b.dot(&f.x) >= 0.0);
        }
    }

    #[test]
    fn field_along_axis_uses_canonical_x() {
        let f = NvClassFrame::in_field(NvClass::C1, &NvClass::C1.axis());
        f.validate().unwrap();
        assert_eq!(f.x, NvClassFrame::canonical(NvClass::C1).x);
    }

    #[test]
    fn rejects_skewed_frame() {
        let z = Vector3::z();
        let x = Vector3::new(1.0, 0.0, 0.1).normalize();
        assert!(matches!(
            NvClassFrame::from_axes(z, x),
            Err(Error::InvalidFrame(_))
        ));
    }
}
