use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Wavenumber and wavelength of the monochromatic field, `k·λ = 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveContext {
    k: f64,
    wavelength: f64,
}

impl WaveContext {
    pub fn from_wavelength(wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "wavelength must be positive and finite, got {wavelength}"
            )));
        }
        Ok(WaveContext {
            k: 2.0 * PI / wavelength,
            wavelength,
        })
    }

    pub fn from_wavenumber(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "wavenumber must be positive and finite, got {k}"
            )));
        }
        Ok(WaveContext {
            k,
            wavelength: 2.0 * PI / k,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
}

impl Default for WaveContext {
    fn default() -> Self {
        WaveContext {
            k: 2.0 * PI,
            wavelength: 1.0,
        }
    }
}
