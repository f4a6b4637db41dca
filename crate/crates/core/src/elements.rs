//! Catalogue of standard devices.
//!
//! Two-mode layouts follow the usual convention: rows/columns `0, 1` are
//! the annihilators of modes 1 and 2, rows/columns `2, 3` their creators.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::group::ScatteringMatrix;
use crate::linalg::{ComplexMatrix, C64};
use crate::{Error, Result};

fn real(rows: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_row_iterator(rows, rows, entries.iter().map(|&x| C64::new(x, 0.0)))
}

/// Passive two-mode mixer with mixing angle `phi`.
pub fn beam_splitter(phi: f64) -> ScatteringMatrix {
    let (s, c) = phi.sin_cos();
    #[rustfmt::skip]
    let m = real(4, &[
        c,  -s,  0.0, 0.0,
        s,   c,  0.0, 0.0,
        0.0, 0.0, c,  -s,
        0.0, 0.0, s,   c,
    ]);
    ScatteringMatrix::trusted(m)
}

/// Two-mode parametric amplifier with squeezing parameter `zeta`.
pub fn parametric_amplifier(zeta: f64) -> ScatteringMatrix {
    let (ch, sh) = (zeta.cosh(), zeta.sinh());
    #[rustfmt::skip]
    let m = real(4, &[
        ch,  0.0, 0.0, sh,
        0.0, ch,  sh,  0.0,
        0.0, sh,  ch,  0.0,
        sh,  0.0, 0.0, ch,
    ]);
    ScatteringMatrix::trusted(m)
}

pub fn single_mode_squeezer(zeta: f64) -> ScatteringMatrix {
    let (ch, sh) = (zeta.cosh(), zeta.sinh());
    ScatteringMatrix::trusted(real(2, &[ch, sh, sh, ch]))
}

/// Single-mode squeezer followed by a phase shift of pi. No single
/// effective Hamiltonian generates it for `zeta != 0`.
pub fn squeezer_pi(zeta: f64) -> ScatteringMatrix {
    let (ch, sh) = (zeta.cosh(), zeta.sinh());
    ScatteringMatrix::trusted(real(2, &[-ch, -sh, -sh, -ch]))
}

pub fn phase_shifter(theta: f64) -> ScatteringMatrix {
    let e = C64::from_polar(1.0, theta);
    ScatteringMatrix::trusted(ComplexMatrix::from_row_slice(
        2,
        2,
        &[e, C64::new(0.0, 0.0), C64::new(0.0, 0.0), e.conj()],
    ))
}

/// Squeezing parameter that exactly compensates a beam splitter of angle
/// `phi`: the non-negative root of `cosh(zeta) cos(phi) = 1`.
pub fn compensating_zeta(phi: f64) -> Result<f64> {
    let c = phi.cos();
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::ParameterDomain(format!(
            "compensated tap needs cos(phi) in (0, 1], got {c}"
        )));
    }
    Ok((1.0 / c).acosh())
}

/// Beam splitter followed by an amplifier that restores the intensity.
/// The result is unipotent and not diagonalizable (except at `phi = 0`).
pub fn compensated_tap(phi: f64) -> Result<ScatteringMatrix> {
    let zeta = compensating_zeta(phi)?;
    let m = parametric_amplifier(zeta).matrix() * beam_splitter(phi).matrix();
    Ok(ScatteringMatrix::trusted(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    BeamSplitter,
    ParametricAmplifier,
    PhaseShifter,
    SingleModeSqueezer,
    SqueezerPi,
    CompensatedTap,
    Identity,
}

impl ElementKind {
    pub const ALL: [ElementKind; 7] = [
        ElementKind::BeamSplitter,
        ElementKind::ParametricAmplifier,
        ElementKind::PhaseShifter,
        ElementKind::SingleModeSqueezer,
        ElementKind::SqueezerPi,
        ElementKind::CompensatedTap,
        ElementKind::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::BeamSplitter => "beam_splitter",
            ElementKind::ParametricAmplifier => "parametric_amplifier",
            ElementKind::PhaseShifter => "phase_shifter",
            ElementKind::SingleModeSqueezer => "single_mode_squeezer",
            ElementKind::SqueezerPi => "squeezer_pi",
            ElementKind::CompensatedTap => "compensated_tap",
            ElementKind::Identity => "identity",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Natural mode count of the device.
    pub fn modes(self) -> usize {
        match self {
            ElementKind::BeamSplitter
            | ElementKind::ParametricAmplifier
            | ElementKind::CompensatedTap => 2,
            _ => 1,
        }
    }
}

/// A device kind plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementSpec {
    pub kind: ElementKind,
    /// Mixing angle.
    pub phi: f64,
    /// Squeezing parameter.
    pub zeta: f64,
    /// Phase.
    pub theta: f64,
    /// Mode count for `identity`; ignored otherwise.
    pub modes: usize,
}

impl ElementSpec {
    pub fn new(kind: ElementKind) -> Self {
        ElementSpec {
            kind,
            phi: 0.0,
            zeta: 0.0,
            theta: 0.0,
            modes: kind.modes(),
        }
    }

    pub fn build(&self) -> Result<ScatteringMatrix> {
        for (name, v) in [("phi", self.phi), ("zeta", self.zeta), ("theta", self.theta)] {
            if !v.is_finite() {
                return Err(Error::ParameterDomain(format!("{name} must be finite")));
            }
        }
        Ok(match self.kind {
            ElementKind::BeamSplitter => beam_splitter(self.phi),
            ElementKind::ParametricAmplifier => parametric_amplifier(self.zeta),
            ElementKind::PhaseShifter => phase_shifter(self.theta),
            ElementKind::SingleModeSqueezer => single_mode_squeezer(self.zeta),
            ElementKind::SqueezerPi => squeezer_pi(self.zeta),
            ElementKind::CompensatedTap => compensated_tap(self.phi)?,
            ElementKind::Identity => ScatteringMatrix::identity(self.modes)?,
        })
    }
}

/// Phase shift of pi, for building [`squeezer_pi`] out of parts.
pub fn pi_phase() -> ScatteringMatrix {
    phase_shifter(PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{compose, quasi_unitarity_residual, validate_scattering};
    use crate::linalg::{frobenius, identity, max_abs};

    #[test]
    fn zero_parameters_give_identity() {
        assert_eq!(beam_splitter(0.0).matrix(), &identity(4));
        assert_eq!(parametric_amplifier(0.0).matrix(), &identity(4));
        assert_eq!(single_mode_squeezer(0.0).matrix(), &identity(2));
        assert_eq!(phase_shifter(0.0).matrix(), &identity(2));
        assert_eq!(compensated_tap(0.0).unwrap().matrix(), &identity(4));
        assert_eq!(squeezer_pi(0.0).matrix(), &(-identity(2)));
    }

    #[test]
    fn beam_splitter_quarter_turn() {
        let m = beam_splitter(std::f64::consts::FRAC_PI_2);
        let a = m.matrix().view((0, 0), (2, 2)).into_owned();
        let expected = real(2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(max_abs(&(a - expected)) < 1e-15);
    }

    #[test]
    fn amplifier_corner_entry() {
        let m = parametric_amplifier(0.5);
        assert_eq!(m.matrix()[(0, 3)], C64::new(0.5f64.sinh(), 0.0));
        assert_eq!(m.matrix()[(1, 2)], C64::new(0.5f64.sinh(), 0.0));
    }

    #[test]
    fn quasi_unitary_to_machine_precision() {
        for p in [0.1, 1.0, 3.0] {
            assert!(quasi_unitarity_residual(beam_splitter(p).matrix()) < 1e-15);
        }
        for z in [0.0, 0.5, 1.0, 2.0] {
            assert!(quasi_unitarity_residual(parametric_amplifier(z).matrix()) < 1e-13);
        }
    }

    #[test]
    fn squeezer_pi_trace() {
        let s = squeezer_pi(0.3);
        assert!((s.trace().re - (-2.0 * 0.3f64.cosh())).abs() < 1e-15);
        assert!((s.trace().re + 2.09067).abs() < 1e-5);
    }

    #[test]
    fn squeezer_pi_is_phase_then_squeezer() {
        let p = compose(&pi_phase(), &single_mode_squeezer(0.3)).unwrap();
        assert!(frobenius(&(p.matrix() - squeezer_pi(0.3).matrix())) < 1e-15);
    }

    #[test]
    fn phase_shifter_pi_twice() {
        let p = compose(&pi_phase(), &pi_phase()).unwrap();
        assert!(frobenius(&(p.matrix() - identity(2))) < 1e-15);
    }

    #[test]
    fn compensated_tap_domain_and_constraint() {
        assert!(matches!(compensated_tap(2.0), Err(Error::ParameterDomain(_))));
        assert!(compensated_tap(std::f64::consts::FRAC_PI_2 + 0.1).is_err());
        for phi in [0.1, 0.5, 0.6435, 1.2] {
            let z = compensating_zeta(phi).unwrap();
            assert!(z >= 0.0);
            assert!((z.cosh() * phi.cos() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn spec_builds_every_kind() {
        for kind in ElementKind::ALL {
            let mut spec = ElementSpec::new(kind);
            spec.phi = 0.4;
            spec.zeta = 0.4;
            spec.theta = 0.4;
            let s = spec.build().unwrap();
            assert_eq!(s.n(), kind.modes());
            assert!(validate_scattering(s.matrix(), 1e-13).unwrap().passed);
            assert_eq!(ElementKind::parse(kind.name()), Some(kind));
        }
    }
}
