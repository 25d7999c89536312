//! Plain-text transform descriptor files.
//!
//! A descriptor is a JSON object with a row-major matrix `A` (4 or 9 reals),
//! a translation `t` (2 or 3 reals) and optional intensity fields `con` and
//! `bri`. Reals are written in shortest round-trip form, so reading a written
//! descriptor reproduces every value bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AffineMap2D, AffineMap3D, IntensityMap};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformDescriptor {
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    pub t: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub con: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bri: Option<f64>,
}

impl TransformDescriptor {
    pub fn from_affine_2d(m: &AffineMap2D) -> Self {
        let a = m.matrix();
        Self { a: a.iter().flatten().copied().collect(), t: m.translation_part().to_vec(), con: None, bri: None }
    }

    pub fn from_affine_3d(m: &AffineMap3D) -> Self {
        let a = m.matrix();
        Self { a: a.iter().flatten().copied().collect(), t: m.translation_part().to_vec(), con: None, bri: None }
    }

    pub fn with_intensity(mut self, l: &IntensityMap) -> Self {
        self.con = Some(l.con);
        self.bri = Some(l.bri);
        self
    }

    pub fn dimension(&self) -> Result<usize> {
        match (self.a.len(), self.t.len()) {
            (4, 2) => Ok(2),
            (9, 3) => Ok(3),
            (a, t) => Err(Error::domain(format!("descriptor has {a} matrix entries and {t} translation entries"))),
        }
    }

    pub fn to_affine_2d(&self) -> Result<AffineMap2D> {
        if self.dimension()? != 2 {
            return Err(Error::domain("descriptor is not two-dimensional"));
        }
        AffineMap2D::new([[self.a[0], self.a[1]], [self.a[2], self.a[3]]], [self.t[0], self.t[1]])
    }

    pub fn to_affine_3d(&self) -> Result<AffineMap3D> {
        if self.dimension()? != 3 {
            return Err(Error::domain("descriptor is not three-dimensional"));
        }
        let a = &self.a;
        AffineMap3D::new(
            [[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]],
            [self.t[0], self.t[1], self.t[2]],
        )
    }

    /// The intensity part, or the identity when absent.
    pub fn intensity(&self) -> Result<IntensityMap> {
        match (self.con, self.bri) {
            (None, None) => Ok(IntensityMap::identity()),
            (Some(con), Some(bri)) => Ok(IntensityMap::new(con, bri)),
            _ => Err(Error::domain("descriptor must give both con and bri or neither")),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("descriptor serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(text)?;
        d.dimension()?;
        Ok(d)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(TransformDescriptor::parse(r#"{"A":[1,0,0,1],"t":[0,0,0]}"#).is_err());
        let d = TransformDescriptor::parse(r#"{"A":[1,0,0,1],"t":[0,0],"con":2}"#).unwrap();
        assert!(d.intensity().is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(a in proptest::array::uniform4(-1e6..1e6f64), t in proptest::array::uniform2(-1e6..1e6f64),
                                        con in 1e-3..1e3f64, bri in -1e3..1e3f64) {
            let d = TransformDescriptor { a: a.to_vec(), t: t.to_vec(), con: Some(con), bri: Some(bri) };
            let back = TransformDescriptor::parse(&d.to_text()).unwrap();
            for (x, y) in d.a.iter().zip(&back.a).chain(d.t.iter().zip(&back.t)) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
            prop_assert_eq!(back.con.unwrap().to_bits(), con.to_bits());
            prop_assert_eq!(back.bri.unwrap().to_bits(), bri.to_bits());
        }
    }
}
