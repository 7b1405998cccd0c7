//! Shared numerical kernels.

pub mod banded;
pub mod eigen;
pub mod grid;
pub mod quadrature;

use serde::{Deserialize, Serialize};

pub use banded::BandedSymmetric;
pub use eigen::{symmetric_eigenvalues, symmetric_eigs, Eigenpairs, SymmetricMatrix};
pub use grid::{GridFunction, UniformGrid};
pub use quadrature::{
    fourier_coefficients, fourier_coefficients_pair, trapezoid_periodic, CubicHermite,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FourierGalerkin,
    FiniteDifference,
}

impl std::str::FromStr for Method {
    type Err = crate::OvalError;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "fourier_galerkin" | "galerkin" | "fg" => Ok(Method::FourierGalerkin),
            "finite_difference" | "fd" => Ok(Method::FiniteDifference),
            other => Err(crate::OvalError::Parse(format!("unknown method `{other}`"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::FourierGalerkin => "fourier_galerkin",
            Method::FiniteDifference => "finite_difference",
        })
    }
}

/// Ordered eigenvalues of a discretized operator, optionally with sampled
/// eigenfunctions of unit discrete L² norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<GridFunction>>,
    pub resolution: usize,
    pub method: Method,
    /// Number of returned eigenvalues that are negative (line problems).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_count: Option<usize>,
    /// `|Δλ₁|` between the requested resolution and a 1.5× refinement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement_delta: Option<f64>,
    /// Set when `refinement_delta` exceeds the agreement threshold.
    #[serde(default)]
    pub resolution_warning: bool,
}

impl Spectrum {
    pub fn new(eigenvalues: Vec<f64>, resolution: usize, method: Method) -> Self {
        Self {
            eigenvalues,
            eigenvectors: None,
            resolution,
            method,
            negative_count: None,
            refinement_delta: None,
            resolution_warning: false,
        }
    }

    pub fn lowest(&self) -> f64 {
        self.eigenvalues[0]
    }
}
