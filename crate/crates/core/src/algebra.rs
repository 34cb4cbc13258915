//! Shape-invariant potential families and their closed-form spectra.
//!
//! A family is described by its superpotential `W(x; a)`, the parameter map
//! `a_k -> a_{k+1}` and the remainder `R(a_k)` in
//! `A(a_k) A^dag(a_k) = A^dag(a_{k+1}) A(a_{k+1}) + R(a_k)`.
//! Bound levels of `H_1 = A^dag A` are partial sums of remainders,
//! `eps_n = R(a_1) + ... + R(a_n)`, and coupling the two partner channels
//! through `S = sigma_+ A + sigma_- A^dag` gives the dressed doublets
//! `E_m(+/-) = eps_{m+1} +/- sqrt(hbar Omega eps_{m+1})`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Unit system; only `hbar` enters the formulas explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Units {
    pub hbar: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self { hbar: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `W = sqrt(M/2) omega x`, translation with zero step.
    HarmonicOscillator { mass: f64, omega: f64 },
    /// `W = a_k - sqrt(V0) exp(-lambda x)`, `a_{k+1} = a_k - hbar lambda / sqrt(2M)`.
    Morse { v0: f64, lambda: f64, mass: f64 },
    /// Defined directly by its remainders `R(a_k) = r1 q^(k-1)`.
    ScalingChain { r1: f64, q: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialFamily {
    #[serde(flatten)]
    kind: FamilyKind,
    #[serde(skip)]
    units: Units,
}

impl PotentialFamily {
    pub fn new(kind: FamilyKind, units: Units) -> Result<Self> {
        let family = Self { kind, units };
        family.validate()?;
        Ok(family)
    }

    pub fn harmonic(mass: f64, omega: f64) -> Result<Self> {
        Self::new(FamilyKind::HarmonicOscillator { mass, omega }, Units::default())
    }

    pub fn morse(v0: f64, lambda: f64, mass: f64) -> Result<Self> {
        Self::new(FamilyKind::Morse { v0, lambda, mass }, Units::default())
    }

    pub fn scaling(r1: f64, q: f64) -> Result<Self> {
        Self::new(FamilyKind::ScalingChain { r1, q }, Units::default())
    }

    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        Self::new(self.kind, Units { hbar })
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn hbar(&self) -> f64 {
        self.units.hbar
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FamilyKind::HarmonicOscillator { .. } => "harmonic_oscillator",
            FamilyKind::Morse { .. } => "morse",
            FamilyKind::ScalingChain { .. } => "scaling_chain",
        }
    }

    /// Whether a position-space superpotential exists (grid operations).
    pub fn grid_supported(&self) -> bool {
        !matches!(self.kind, FamilyKind::ScalingChain { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let hbar = self.units.hbar;
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidFamily(format!("hbar must be positive, got {hbar}")));
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidFamily(format!("{name} must be positive, got {v}")))
            }
        };
        match self.kind {
            FamilyKind::HarmonicOscillator { mass, omega } => {
                positive("mass", mass)?;
                positive("omega", omega)
            }
            FamilyKind::Morse { v0, lambda, mass } => {
                positive("v0", v0)?;
                positive("lambda", lambda)?;
                positive("mass", mass)?;
                let a1 = v0.sqrt() - 0.5 * hbar * lambda / (2.0 * mass).sqrt();
                if a1 > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidFamily(format!(
                        "Morse well supports no bound state: a1 = sqrt(V0) - hbar lambda / (2 sqrt(2M)) = {a1}"
                    )))
                }
            }
            FamilyKind::ScalingChain { r1, q } => {
                positive("r1", r1)?;
                if q.is_finite() && q > 0.0 && q < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidFamily(format!("q must lie in (0, 1), got {q}")))
                }
            }
        }
    }

    /// `hbar lambda / sqrt(2M)`, the Morse parameter decrement.
    pub(crate) fn morse_step(&self) -> Option<f64> {
        match self.kind {
            FamilyKind::Morse { lambda, mass, .. } => Some(self.units.hbar * lambda / (2.0 * mass).sqrt()),
            _ => None,
        }
    }

    /// `hbar / sqrt(2M)`, the momentum prefactor in `A = W + (hbar/sqrt(2M)) d/dx`.
    pub fn derivative_prefactor(&self) -> Option<f64> {
        match self.kind {
            FamilyKind::HarmonicOscillator { mass, .. } | FamilyKind::Morse { mass, .. } => {
                Some(self.units.hbar / (2.0 * mass).sqrt())
            }
            FamilyKind::ScalingChain { .. } => None,
        }
    }

    pub fn mass(&self) -> Option<f64> {
        match self.kind {
            FamilyKind::HarmonicOscillator { mass, .. } | FamilyKind::Morse { mass, .. } => Some(mass),
            FamilyKind::ScalingChain { .. } => None,
        }
    }

    /// Morse parameter `a_k` (any `k >= 1`; may be non-positive past the
    /// bound range).
    fn morse_parameter(&self, k: usize) -> Option<f64> {
        match self.kind {
            FamilyKind::Morse { v0, .. } => {
                let step = self.morse_step()?;
                Some(v0.sqrt() - 0.5 * step - (k as f64 - 1.0) * step)
            }
            _ => None,
        }
    }
}

impl fmt::Display for PotentialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FamilyKind::HarmonicOscillator { mass, omega } => {
                write!(f, "harmonic_oscillator(mass={mass}, omega={omega})")?
            }
            FamilyKind::Morse { v0, lambda, mass } => write!(f, "morse(v0={v0}, lambda={lambda}, mass={mass})")?,
            FamilyKind::ScalingChain { r1, q } => write!(f, "scaling_chain(r1={r1}, q={q})")?,
        }
        write!(f, ", hbar={}", self.units.hbar)
    }
}

/// Ordered parameters `a_1 .. a_{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterChain {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLevel {
    pub n: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    /// Emission order: minus first.
    pub const BOTH: [Branch; 2] = [Branch::Minus, Branch::Plus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Minus => -1.0,
            Branch::Plus => 1.0,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Minus => "minus",
            Branch::Plus => "plus",
        })
    }
}

/// Number of bound excited levels above the ground level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelCount {
    Finite(usize),
    Unbounded,
}

impl LevelCount {
    pub fn contains(self, n: usize) -> bool {
        match self {
            LevelCount::Finite(max) => n <= max,
            LevelCount::Unbounded => true,
        }
    }

    fn check(self, n: usize) -> Result<()> {
        match self {
            LevelCount::Finite(max) if n > max => Err(Error::LevelOutOfRange {
                requested: n,
                available: max,
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for LevelCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelCount::Finite(n) => write!(f, "{n}"),
            LevelCount::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// Identifies one eigenvalue of the coupled Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LevelLabel {
    /// The uncoupled level `(0, |0>)` with eigenvalue 0.
    Ground,
    Dressed {
        m: usize,
        branch: Branch,
    },
}

impl LevelLabel {
    pub fn m(&self) -> Option<usize> {
        match self {
            LevelLabel::Ground => None,
            LevelLabel::Dressed { m, .. } => Some(*m),
        }
    }

    /// Analytic targets in canonical order: ground, then `(m, minus)`,
    /// `(m, plus)` for `m = 0, 1, ...`.
    pub fn canonical(count: usize) -> Vec<LevelLabel> {
        std::iter::once(LevelLabel::Ground)
            .chain((0..).flat_map(|m| Branch::BOTH.map(|branch| LevelLabel::Dressed { m, branch })))
            .take(count)
            .collect()
    }
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevelLabel::Ground => f.write_str("ground"),
            LevelLabel::Dressed { m, branch } => write!(f, "m{m}_{branch}"),
        }
    }
}

impl Serialize for LevelLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One dressed doublet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DressedLevel {
    pub m: usize,
    pub epsilon: f64,
    pub e_minus: f64,
    pub e_plus: f64,
}

impl DressedLevel {
    pub fn energy(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Minus => self.e_minus,
            Branch::Plus => self.e_plus,
        }
    }
}

/// Closed-form spectrum of the coupled Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumTable {
    pub family: PotentialFamily,
    pub hbar: f64,
    pub omega_drive: f64,
    pub ground: f64,
    pub levels: Vec<DressedLevel>,
}

impl SpectrumTable {
    /// All energies with labels, sorted ascending (ties keep canonical order).
    ///
    /// The uncoupled level 0 is not assumed to be the minimum: for
    /// `hbar Omega > eps_1` the minus branch of `m = 0` lies below it.
    pub fn sorted_energies(&self) -> Vec<(LevelLabel, f64)> {
        let mut all: Vec<(LevelLabel, f64)> = std::iter::once((LevelLabel::Ground, self.ground))
            .chain(self.levels.iter().flat_map(|lvl| {
                Branch::BOTH.map(|branch| (LevelLabel::Dressed { m: lvl.m, branch }, lvl.energy(branch)))
            }))
            .collect();
        all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        all
    }

    pub fn energy(&self, label: LevelLabel) -> Option<f64> {
        match label {
            LevelLabel::Ground => Some(self.ground),
            LevelLabel::Dressed { m, branch } => self.levels.get(m).map(|l| l.energy(branch)),
        }
    }
}

pub fn parameter_chain(family: &PotentialFamily, n: usize) -> Result<ParameterChain> {
    family.validate()?;
    let values = (1..=n + 1)
        .map(|k| match family.kind {
            FamilyKind::HarmonicOscillator { omega, .. } => omega,
            FamilyKind::Morse { .. } => family.morse_parameter(k).expect("morse"),
            FamilyKind::ScalingChain { r1, q } => r1 * q.powi(k as i32 - 1),
        })
        .collect();
    Ok(ParameterChain { values })
}

/// `R(a_k)` for `k >= 1`.
pub fn remainder(family: &PotentialFamily, k: usize) -> Result<f64> {
    family.validate()?;
    if k == 0 {
        return Err(Error::InvalidIndex(k));
    }
    match family.kind {
        FamilyKind::HarmonicOscillator { omega, .. } => Ok(family.hbar() * omega),
        FamilyKind::Morse { .. } => {
            level_count(family).check(k)?;
            let step = family.morse_step().expect("morse");
            let (a, b) = (
                family.morse_parameter(k).expect("morse"),
                family.morse_parameter(k + 1).expect("morse"),
            );
            // a^2 - b^2 with a - b = step
            Ok(step * (a + b))
        }
        FamilyKind::ScalingChain { r1, q } => Ok(r1 * q.powi(k as i32 - 1)),
    }
}

/// `eps_n`, the n-th bound level of `A^dag A` (`eps_0 = 0`).
pub fn energy_level(family: &PotentialFamily, n: usize) -> Result<EnergyLevel> {
    family.validate()?;
    level_count(family).check(n)?;
    let epsilon = match family.kind {
        FamilyKind::HarmonicOscillator { omega, .. } => n as f64 * family.hbar() * omega,
        FamilyKind::Morse { .. } => {
            // a_1^2 - a_{n+1}^2 = n step (a_1 + a_{n+1})
            let step = family.morse_step().expect("morse");
            let a1 = family.morse_parameter(1).expect("morse");
            let last = family.morse_parameter(n + 1).expect("morse");
            n as f64 * step * (a1 + last)
        }
        FamilyKind::ScalingChain { r1, q } => {
            if n == 0 {
                0.0
            } else {
                r1 * (1.0 - q.powi(n as i32)) / (1.0 - q)
            }
        }
    };
    Ok(EnergyLevel { n, epsilon })
}

/// Largest `n` with `a_{n+1} > 0` for Morse; unbounded otherwise.
pub fn level_count(family: &PotentialFamily) -> LevelCount {
    match family.kind {
        FamilyKind::Morse { .. } => {
            let (Some(step), Some(a1)) = (family.morse_step(), family.morse_parameter(1)) else {
                return LevelCount::Finite(0);
            };
            if a1.is_nan() || a1 <= 0.0 {
                return LevelCount::Finite(0);
            }
            let mut n = (a1 / step).floor() as usize;
            while n > 0 && family.morse_parameter(n + 1).unwrap_or(0.0) <= 0.0 {
                n -= 1;
            }
            LevelCount::Finite(n)
        }
        _ => LevelCount::Unbounded,
    }
}

fn check_drive(omega_drive: f64) -> Result<()> {
    if omega_drive.is_nan() || omega_drive < 0.0 || omega_drive.is_infinite() {
        return Err(Error::NegativeDriveStrength(omega_drive));
    }
    Ok(())
}

/// `E_m(branch) = eps_{m+1} +/- sqrt(hbar Omega eps_{m+1})`.
pub fn jc_eigenvalue(family: &PotentialFamily, omega_drive: f64, m: usize, branch: Branch) -> Result<f64> {
    check_drive(omega_drive)?;
    let eps = energy_level(family, m + 1)?.epsilon;
    Ok(eps + branch.sign() * (family.hbar() * omega_drive * eps).sqrt())
}

/// The Morse doublet written out term by term in the well parameters,
/// without going through the parameter chain.
pub fn morse_closed_form(family: &PotentialFamily, omega_drive: f64, m: usize, branch: Branch) -> Result<f64> {
    let FamilyKind::Morse { v0, lambda, mass } = family.kind else {
        return Err(Error::UnsupportedFamily {
            family: family.name(),
            operation: "morse_closed_form",
        });
    };
    family.validate()?;
    check_drive(omega_drive)?;
    level_count(family).check(m + 1)?;
    let hbar = family.hbar();
    let mp1 = m as f64 + 1.0;
    let base = v0.sqrt()
        * (hbar * lambda / (2.0 * mass).sqrt())
        * mp1
        * (2.0 - hbar * lambda / (2.0 * mass * v0).sqrt() * (m as f64 + 2.0));
    Ok(base + branch.sign() * (hbar * omega_drive * base).sqrt())
}

/// `W(x; a_k)`.
pub fn superpotential(family: &PotentialFamily, k: usize, x: f64) -> Result<f64> {
    family.validate()?;
    if k == 0 {
        return Err(Error::InvalidIndex(k));
    }
    match family.kind {
        FamilyKind::HarmonicOscillator { mass, omega } => Ok((mass / 2.0).sqrt() * omega * x),
        FamilyKind::Morse { v0, lambda, .. } => {
            Ok(family.morse_parameter(k).expect("morse") - v0.sqrt() * (-lambda * x).exp())
        }
        FamilyKind::ScalingChain { .. } => Err(Error::UnsupportedFamily {
            family: family.name(),
            operation: "superpotential",
        }),
    }
}

/// `dW/dx`, independent of `k` for both grid-supported families.
pub fn superpotential_derivative(family: &PotentialFamily, x: f64) -> Result<f64> {
    family.validate()?;
    match family.kind {
        FamilyKind::HarmonicOscillator { mass, omega } => Ok((mass / 2.0).sqrt() * omega),
        FamilyKind::Morse { v0, lambda, .. } => Ok(lambda * v0.sqrt() * (-lambda * x).exp()),
        FamilyKind::ScalingChain { .. } => Err(Error::UnsupportedFamily {
            family: family.name(),
            operation: "superpotential_derivative",
        }),
    }
}

/// Closed-form doublets for `m = 0 .. n_levels - 1` plus the uncoupled level.
pub fn spectrum_table(family: &PotentialFamily, omega_drive: f64, n_levels: usize) -> Result<SpectrumTable> {
    check_drive(omega_drive)?;
    if n_levels > 0 {
        level_count(family).check(n_levels)?;
    }
    let levels = (0..n_levels)
        .map(|m| {
            Ok(DressedLevel {
                m,
                epsilon: energy_level(family, m + 1)?.epsilon,
                e_minus: jc_eigenvalue(family, omega_drive, m, Branch::Minus)?,
                e_plus: jc_eigenvalue(family, omega_drive, m, Branch::Plus)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable {
        family: *family,
        hbar: family.hbar(),
        omega_drive,
        ground: 0.0,
        levels,
    })
}
