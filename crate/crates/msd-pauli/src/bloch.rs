use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = BlochVector { x, y, z };
        if v.norm_sqr() > 1.0 + 1e-9 {
            return Err(Error::BlochNorm(v.norm()));
        }
        Ok(v)
    }

    /// The (1,1,1)/√3 magic direction.
    pub fn magic() -> Self {
        let r = 1.0 / 3f64.sqrt();
        BlochVector { x: r, y: r, z: r }
    }

    pub fn zero() -> Self {
        BlochVector { x: 0.0, y: 0.0, z: 0.0 }
    }

    pub fn component(&self, axis: usize) -> f64 {
        [self.x, self.y, self.z][axis]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}
