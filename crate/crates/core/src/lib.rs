//! Heat kernels and Markov jump processes on the finite and complete adele
//! rings.
//!
//! The ring of finite adeles `A_f` is the completion of the rationals under
//! an invariant ultrametric built from a division chain `{e^{ψ(n)}}`. For an
//! exponent `α > 0` the Fourier multiplier `‖ξ‖^α` generates a heat
//! semigroup whose kernel `Z(x, t)` is an explicit radial series; pairing it
//! with the symmetric β-stable kernel on `R` gives the heat kernel of the
//! complete adele ring `A = R × A_f`.
//!
//! The crate provides:
//!
//! - exact chain arithmetic and mixed-radix adele digits ([`filtration`],
//!   [`adele`]),
//! - finite-dimensional test-function spaces with their Fourier transform
//!   and the closed-form character integrals over balls and spheres
//!   ([`schwartz`]),
//! - certified evaluation of the radial heat kernel, shell masses, the
//!   radial CDF and transition probabilities, together with the classical
//!   bounds they satisfy ([`heat`]),
//! - exact increment sampling and path simulation for the associated jump
//!   process ([`markov`]),
//! - the Archimedean β-stable kernel with closed forms, oscillatory
//!   quadrature and exact samplers ([`stable`]),
//! - the product kernel on `A` ([`adelic`]) and a verification battery
//!   ([`verify`]) exposing every identity as a machine-checkable report.

pub mod adele;
pub mod adelic;
pub mod error;
pub mod filtration;
pub mod heat;
pub mod markov;
pub mod quadrature;
pub mod schwartz;
pub mod stable;
pub mod verify;

pub use adele::{character, parse_adele, sample_uniform_sphere, Ball, FiniteAdele, Sphere};
pub use error::{Error, Result};
pub use filtration::{Filtration, FiltrationConfig, FiltrationKind};
pub use verify::{run_all, run_named, CheckResult, VerifyConfig, VerifyReport, CHECK_NAMES};
pub use adelic::{dirac_limit_report, simulate_adelic_path, AdelePoint, AdelicKernel, AdelicPath, AdelicSampler};
pub use stable::{QuadConfig, QuadResult, StableKernel};
pub use markov::{derive_stream, goodness_of_fit, root_stream, simulate_path, FiniteAdeleSampler, PathSample, ShellFrequencies, Stream};
pub use heat::{convolve_radial, HeatKernelFin, RadialTable, TransitionFunction};
pub use schwartz::{
    char_integral_ball, char_integral_sphere, eigenfunction_eval, NormValue, RadialProfile,
    TestFunction,
};
