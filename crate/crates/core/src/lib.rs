//! Spherical-harmonic sound field diffuseness analysis.
//!
//! The crate models SH-domain signals as a sum of plane waves and a diffuse
//! noise background, analyses their covariance matrix and implements three
//! diffuseness estimators:
//!
//! * **COMEDIE**, from the spread of the covariance eigenvalues,
//! * **DirAC**, from the order-1 active intensity and energy,
//! * **Thiele-Gover**, from the spread of beamformed directional energy,
//!
//! together with order-by-order diffuseness profiles, a sweep harness for
//! synthetic experiments and file formats for exchanging SH signal blocks.
//!
//! ```
//! use diffusense::{covariance, estimators, field_sim, sh_math::Direction};
//!
//! let source = field_sim::Source::unit(Direction::from_degrees(30.0, 10.0));
//! let scenario = field_sim::ScenarioConfig::new(3, vec![source], 0.4);
//! let c = field_sim::analytic_covariance(&scenario).unwrap();
//! let d = estimators::comedie(&covariance::eigenvalues(&c).unwrap()).unwrap();
//! assert!((d - 0.4).abs() < 1e-12);
//! ```

pub mod cli;
pub mod config;
pub mod covariance;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod field_sim;
pub mod io;
pub mod linalg;
pub mod sh_math;

pub use covariance::{CovarianceMatrix, EigenSpectrum};
pub use error::{Error, Result};
pub use estimators::{DiffusenessProfile, Estimator};
pub use field_sim::{Correlation, ScenarioConfig, ShSignalBlock, Source};
pub use sh_math::{Direction, DirectionSet, ShVector};
