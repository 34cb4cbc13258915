//! Finite-difference position-space operators.
//!
//! Unknowns live on the interior points `x_i = x_min + (i + 1) h`,
//! `i = 0 .. n_points - 1`, with `h = (x_max - x_min) / (n_points + 1)` and
//! homogeneous Dirichlet walls. The kinetic term uses the 3-point second
//! difference and the first derivative the antisymmetric central difference,
//! so every assembled matrix is symmetric by construction.
//!
//! Two-channel matrices interleave the channels per grid point,
//! `[upper_0, lower_0, upper_1, lower_1, ...]`, giving half-bandwidth 3.

use std::fmt::Write as _;

use serde::Serialize;

use crate::algebra::{
    energy_level, level_count, parameter_chain, remainder, spectrum_table, superpotential, superpotential_derivative,
    FamilyKind, LevelCount, LevelLabel, PotentialFamily, SpectrumTable,
};
use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::linalg::{eig_symmetric, SymmetricBanded, SymmetricDense};

pub const MIN_POINTS: usize = 50;

/// Errors below this are treated as converged and left out of order fits.
pub const PRECISION_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "bounds must be finite, got [{x_min}, {x_max}]"
            )));
        }
        if x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "x_min ({x_min}) must be below x_max ({x_max})"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::GridTooCoarse {
                n_points,
                min: MIN_POINTS,
            });
        }
        Ok(Self { x_min, x_max, n_points })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points + 1) as f64
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i + 1) as f64 * self.h()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Same domain, spacing halved exactly (`n -> 2n + 1`).
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points + 1,
            ..*self
        }
    }

    pub fn with_points(&self, n_points: usize) -> Result<Self> {
        Self::new(self.x_min, self.x_max, n_points)
    }
}

fn points_for_spacing(length: f64, spacing: f64) -> usize {
    // tolerate round-off in length / spacing landing just above an integer
    ((length / spacing - 1e-9).ceil() as usize).saturating_sub(1)
}

fn require_grid_family(family: &PotentialFamily, operation: &'static str) -> Result<()> {
    family.validate()?;
    if family.grid_supported() {
        Ok(())
    } else {
        Err(Error::UnsupportedFamily {
            family: family.name(),
            operation,
        })
    }
}

/// Default domain and resolution.
///
/// Morse: `x in [-2.5/lambda, max(14/lambda, 18.42 hbar / (a_slow sqrt(2M)))]`
/// where `a_slow` is the parameter of the last bound level, spacing
/// `min(16.5 / 1001 / lambda, 0.085 hbar / sqrt(2 M V0))`, at least 1000
/// points. For the reference well this is `[-2.5, 14]` with 1000 points.
///
/// Harmonic oscillator: symmetric, half-width `8 l sqrt(n_levels)` with
/// `l = sqrt(hbar / (M omega))`, spacing `l / 100`.
pub fn default_grid(family: &PotentialFamily, n_levels: usize) -> Result<GridSpec> {
    require_grid_family(family, "default_grid")?;
    let hbar = family.hbar();
    match *family.kind() {
        FamilyKind::Morse { v0, lambda, mass } => {
            let bound = match level_count(family) {
                LevelCount::Finite(n) => n.max(1),
                LevelCount::Unbounded => 1,
            };
            let chain = parameter_chain(family, bound)?;
            let a_slow = chain.values[bound - 1];
            let sqrt_2m = (2.0 * mass).sqrt();
            let x_min = -2.5 / lambda;
            let x_max = (14.0 / lambda).max(18.42 * hbar / (a_slow * sqrt_2m));
            let spacing = (16.5 / 1001.0 / lambda).min(0.085 * hbar / (sqrt_2m * v0.sqrt()));
            let n = points_for_spacing(x_max - x_min, spacing).max(1000);
            GridSpec::new(x_min, x_max, n)
        }
        FamilyKind::HarmonicOscillator { mass, omega } => {
            let ell = (hbar / (mass * omega)).sqrt();
            let half = 8.0 * ell * (n_levels.max(1) as f64).sqrt();
            let n = points_for_spacing(2.0 * half, ell / 100.0);
            GridSpec::new(-half, half, n)
        }
        FamilyKind::ScalingChain { .. } => unreachable!("rejected above"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridHamiltonian {
    pub grid: GridSpec,
    pub channels: usize,
    pub matrix: SymmetricBanded,
}

impl GridHamiltonian {
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.matrix.eigenvalues()?)
    }
}

/// `kd` and `ko`: diagonal and off-diagonal of `-hbar^2/(2M) d^2/dx^2`.
fn kinetic(family: &PotentialFamily, grid: &GridSpec) -> (f64, f64) {
    let hbar = family.hbar();
    let mass = family.mass().expect("grid family has a mass");
    let h2 = grid.h() * grid.h();
    (hbar * hbar / mass / h2, -hbar * hbar / (2.0 * mass * h2))
}

fn partner_matrix(family: &PotentialFamily, k: usize, grid: &GridSpec, sign: f64) -> Result<GridHamiltonian> {
    require_grid_family(family, "grid discretization")?;
    let c = family.derivative_prefactor().expect("grid family");
    let (kd, ko) = kinetic(family, grid);
    let n = grid.n_points();
    let mut matrix = SymmetricBanded::zeros(n, 1)?;
    for i in 0..n {
        let x = grid.x(i);
        let w = superpotential(family, k, x)?;
        let dw = superpotential_derivative(family, x)?;
        matrix.set(i, i, kd + w * w + sign * c * dw)?;
        if i + 1 < n {
            matrix.set(i + 1, i, ko)?;
        }
    }
    matrix.check_finite()?;
    Ok(GridHamiltonian {
        grid: *grid,
        channels: 1,
        matrix,
    })
}

/// `A^dag A` at parameter `a_k`: `p^2/2M + W^2 - (hbar/sqrt(2M)) W'`.
pub fn build_single_channel(family: &PotentialFamily, k: usize, grid: &GridSpec) -> Result<GridHamiltonian> {
    partner_matrix(family, k, grid, -1.0)
}

/// `A A^dag` at parameter `a_k`: `p^2/2M + W^2 + (hbar/sqrt(2M)) W'`.
pub fn build_partner_channel(family: &PotentialFamily, k: usize, grid: &GridSpec) -> Result<GridHamiltonian> {
    partner_matrix(family, k, grid, 1.0)
}

/// Two-channel `H = [[A A^dag, g A], [g A^dag, A^dag A]]` at `a_1` with
/// `g = sqrt(hbar Omega)` and `A = W + (hbar/sqrt(2M)) D1`.
pub fn build_two_channel(family: &PotentialFamily, omega_drive: f64, grid: &GridSpec) -> Result<GridHamiltonian> {
    require_grid_family(family, "grid discretization")?;
    if omega_drive.is_nan() || omega_drive < 0.0 || omega_drive.is_infinite() {
        return Err(Error::NegativeDriveStrength(omega_drive));
    }
    let c = family.derivative_prefactor().expect("grid family");
    let g = (family.hbar() * omega_drive).sqrt();
    let (kd, ko) = kinetic(family, grid);
    let hop = g * c / (2.0 * grid.h());
    let n = grid.n_points();
    let mut matrix = SymmetricBanded::zeros(2 * n, 3)?;
    for i in 0..n {
        let x = grid.x(i);
        let w = superpotential(family, 1, x)?;
        let dw = superpotential_derivative(family, x)?;
        let (up, low) = (2 * i, 2 * i + 1);
        matrix.set(up, up, kd + w * w + c * dw)?;
        matrix.set(low, low, kd + w * w - c * dw)?;
        matrix.set(up, low, g * w)?;
        if i + 1 < n {
            matrix.set(up + 2, up, ko)?;
            matrix.set(low + 2, low, ko)?;
            // upper_i <- lower_{i+1} through +D1, upper_{i+1} <- lower_i through -D1
            matrix.set(low + 2, up, hop)?;
            matrix.set(up + 2, low, -hop)?;
        }
    }
    matrix.check_finite()?;
    Ok(GridHamiltonian {
        grid: *grid,
        channels: 2,
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelCheck {
    pub label: LevelLabel,
    pub analytic: f64,
    pub numeric: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub family: PotentialFamily,
    pub hbar: f64,
    pub omega_drive: f64,
    pub grid: GridSpec,
    pub levels: Vec<LevelCheck>,
    /// `err(h) / err(h/2)` of the largest relative error; only known after
    /// a refinement study.
    pub convergence_ratio: Option<f64>,
    pub ground_leakage: f64,
}

impl VerificationReport {
    pub fn max_rel_error(&self) -> f64 {
        self.levels.iter().fold(0.0_f64, |m, l| m.max(l.rel_error))
    }

    pub fn within(&self, tolerance: f64) -> bool {
        self.levels.iter().all(|l| l.rel_error <= tolerance)
    }

    pub fn level(&self, label: LevelLabel) -> Option<&LevelCheck> {
        self.levels.iter().find(|l| l.label == label)
    }
}

/// Compares the two-channel grid spectrum with the closed form.
///
/// The analytic targets are the first `n_levels` labels in canonical order
/// (ground, then minus and plus for `m = 0, 1, ...`). Numeric eigenvalues
/// above `max(target) + hbar Omega + eps_1 / 2` are discarded as box states;
/// each target then takes the nearest unused survivor. Relative errors are
/// measured against `max(|analytic|, eps_1)` so the zero level is well
/// defined.
pub fn verify_spectrum(
    family: &PotentialFamily,
    omega_drive: f64,
    grid: &GridSpec,
    n_levels: usize,
) -> Result<VerificationReport> {
    require_grid_family(family, "verify_spectrum")?;
    let (labels, table) = targets(family, omega_drive, n_levels)?;
    let ham = build_two_channel(family, omega_drive, grid)?;
    let values = ham.eigenvalues()?;
    let eps_1 = energy_level(family, 1)?.epsilon;

    let analytic: Vec<f64> = labels
        .iter()
        .map(|&l| table.energy(l).expect("table covers targets"))
        .collect();
    let threshold =
        analytic.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) + family.hbar() * omega_drive + 0.5 * eps_1;
    let candidates: Vec<f64> = values.iter().copied().filter(|&v| v <= threshold).collect();
    if candidates.len() < labels.len() {
        return Err(Error::MatchFailure(format!(
            "{} analytic levels requested but only {} grid eigenvalues lie below the box-state threshold {}",
            labels.len(),
            candidates.len(),
            fmt_sig(threshold)
        )));
    }

    let mut used = vec![false; candidates.len()];
    let mut levels = Vec::with_capacity(labels.len());
    for (&label, &target) in labels.iter().zip(&analytic) {
        let (idx, _) = candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
            .expect("enough candidates");
        used[idx] = true;
        let numeric = candidates[idx];
        let abs_error = (numeric - target).abs();
        levels.push(LevelCheck {
            label,
            analytic: target,
            numeric,
            abs_error,
            rel_error: abs_error / target.abs().max(eps_1),
        });
    }

    let ground = levels[0].numeric;
    let ground_leakage = ground_leakage(&ham, &values, ground, eps_1)?;

    Ok(VerificationReport {
        family: *family,
        hbar: family.hbar(),
        omega_drive,
        grid: *grid,
        levels,
        convergence_ratio: None,
        ground_leakage,
    })
}

fn targets(family: &PotentialFamily, omega_drive: f64, n_levels: usize) -> Result<(Vec<LevelLabel>, SpectrumTable)> {
    if n_levels == 0 {
        return Err(Error::MatchFailure("at least one level must be requested".into()));
    }
    let pairs = n_levels / 2;
    if let LevelCount::Finite(bound) = level_count(family) {
        if pairs > bound {
            return Err(Error::MatchFailure(format!(
                "{n_levels} levels requested but the {} family has {bound} bound excited levels, \
                 i.e. at most {} two-channel levels (ground plus {bound} pairs)",
                family.name(),
                1 + 2 * bound
            )));
        }
    }
    Ok((
        LevelLabel::canonical(n_levels),
        spectrum_table(family, omega_drive, pairs)?,
    ))
}

/// Smallest upper-channel weight over unit vectors in the numeric
/// eigenspace at the ground level. The eigenspace is every eigenvalue within
/// `1e-2 eps_1` of `ground`, so an accidental degeneracy (for instance the
/// oscillator with `hbar Omega = 4 hbar omega`, where `E_3,- = 0`) does not
/// masquerade as leakage.
fn ground_leakage(ham: &GridHamiltonian, values: &[f64], ground: f64, eps_1: f64) -> Result<f64> {
    let window = 1e-2 * eps_1;
    let cluster: Vec<f64> = values
        .iter()
        .copied()
        .filter(|v| (v - ground).abs() <= window)
        .collect();
    let vectors = ham.matrix.eigenvectors_for(&cluster)?;
    let k = vectors.len();
    let gram = SymmetricDense::from_lower_fn(k, |a, b| {
        vectors[a].iter().zip(&vectors[b]).step_by(2).map(|(x, y)| x * y).sum()
    })?;
    let smallest = eig_symmetric(&gram, false)?.values[0];
    Ok(smallest.max(0.0))
}

/// `A(a_k) v` (`sign = +1`) or `A^dag(a_k) v` (`sign = -1`) with Dirichlet
/// walls, `A = W + c D1`.
fn apply_ladder(family: &PotentialFamily, k: usize, grid: &GridSpec, sign: f64, v: &[f64]) -> Result<Vec<f64>> {
    let c = family.derivative_prefactor().expect("grid family");
    let inv_2h = 1.0 / (2.0 * grid.h());
    let n = v.len();
    (0..n)
        .map(|i| {
            let right = if i + 1 < n { v[i + 1] } else { 0.0 };
            let left = if i > 0 { v[i - 1] } else { 0.0 };
            Ok(superpotential(family, k, grid.x(i))? * v[i] + sign * c * (right - left) * inv_2h)
        })
        .collect()
}

/// Grid norm `sqrt(h sum v_i^2)` of
/// `(A(a_1) A^dag(a_1) - A^dag(a_2) A(a_2) - (R(a_1) + shift)) psi`
/// for a unit Gaussian `psi` centred mid-grid with width a tenth of the
/// domain. `shift = 0` tests the identity; a non-zero shift deliberately
/// breaks it.
pub fn shape_invariance_residual(family: &PotentialFamily, grid: &GridSpec, shift: f64) -> Result<f64> {
    require_grid_family(family, "shape_invariance_residual")?;
    let h = grid.h();
    let centre = 0.5 * (grid.x_min() + grid.x_max());
    let width = grid.length() / 10.0;
    let mut psi: Vec<f64> = grid
        .points()
        .iter()
        .map(|x| (-((x - centre) / width).powi(2)).exp())
        .collect();
    let norm = (h * psi.iter().map(|p| p * p).sum::<f64>()).sqrt();
    psi.iter_mut().for_each(|p| *p /= norm);

    let first = apply_ladder(family, 1, grid, 1.0, &apply_ladder(family, 1, grid, -1.0, &psi)?)?;
    let second = apply_ladder(family, 2, grid, -1.0, &apply_ladder(family, 2, grid, 1.0, &psi)?)?;
    let r = remainder(family, 1)? + shift;
    let sum_sq: f64 = first
        .iter()
        .zip(&second)
        .zip(&psi)
        .map(|((f, s), p)| (f - s - r * p).powi(2))
        .sum();
    Ok((h * sum_sq).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStep {
    pub h: f64,
    pub n_points: usize,
    pub max_rel_error: f64,
    pub rel_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelOrder {
    pub label: LevelLabel,
    /// `log2(err(h_j) / err(h_{j+1}))` for consecutive refinements; `None`
    /// where either error is below the precision floor.
    pub orders: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub steps: Vec<ConvergenceStep>,
    pub orders: Vec<LevelOrder>,
    /// Order from the largest relative error at the two coarsest grids.
    pub max_error_order: Option<f64>,
    /// Report at the starting grid, with its convergence ratio filled in.
    pub report: VerificationReport,
}

impl ConvergenceStudy {
    /// Every order above the precision floor.
    pub fn fitted_orders(&self) -> impl Iterator<Item = f64> + '_ {
        self.orders.iter().flat_map(|o| o.orders.iter().flatten().copied())
    }
}

fn order(coarse: f64, fine: f64) -> Option<f64> {
    (coarse >= PRECISION_FLOOR && fine >= PRECISION_FLOOR).then(|| (coarse / fine).log2())
}

/// Repeats [`verify_spectrum`] at `h`, `h/2` and `h/4` on the same domain.
pub fn convergence_study(
    family: &PotentialFamily,
    omega_drive: f64,
    grid: &GridSpec,
    n_levels: usize,
) -> Result<ConvergenceStudy> {
    let grids = [*grid, grid.refined(), grid.refined().refined()];
    let reports = grids
        .iter()
        .map(|g| verify_spectrum(family, omega_drive, g, n_levels))
        .collect::<Result<Vec<_>>>()?;

    let steps: Vec<ConvergenceStep> = reports
        .iter()
        .map(|r| ConvergenceStep {
            h: r.grid.h(),
            n_points: r.grid.n_points(),
            max_rel_error: r.max_rel_error(),
            rel_errors: r.levels.iter().map(|l| l.rel_error).collect(),
        })
        .collect();
    let orders = reports[0]
        .levels
        .iter()
        .enumerate()
        .map(|(i, lvl)| LevelOrder {
            label: lvl.label,
            orders: steps
                .windows(2)
                .map(|w| order(w[0].rel_errors[i], w[1].rel_errors[i]))
                .collect(),
        })
        .collect();
    let max_error_order = order(steps[0].max_rel_error, steps[1].max_rel_error);
    let mut report = reports.into_iter().next().expect("three reports");
    report.convergence_ratio = Some(steps[0].max_rel_error / steps[1].max_rel_error).filter(|r| r.is_finite());
    Ok(ConvergenceStudy {
        steps,
        orders,
        max_error_order,
        report,
    })
}

/// CSV of the lowest `count` eigenvectors: `x,channel,psi_0,...`.
///
/// Rows run over grid points for channel 0 (upper, or the only channel),
/// then channel 1 (lower). Vectors are normalized as wavefunctions,
/// `h sum |psi|^2 = 1`, with the sign fixed so the largest component is
/// positive.
pub fn eigenvector_csv(ham: &GridHamiltonian, count: usize) -> Result<String> {
    let values = ham.eigenvalues()?;
    let count = count.min(values.len());
    let vectors = ham.matrix.eigenvectors_for(&values[..count])?;
    let scale = 1.0 / ham.grid.h().sqrt();
    let mut out = String::from("x,channel");
    for j in 0..count {
        write!(out, ",psi_{j}").expect("write to string");
    }
    out.push('\n');
    let n = ham.grid.n_points();
    for channel in 0..ham.channels {
        for i in 0..n {
            let row = i * ham.channels + channel;
            write!(out, "{},{channel}", fmt_sig(ham.grid.x(i))).expect("write to string");
            for v in &vectors {
                write!(out, ",{}", fmt_sig(v[row] * scale)).expect("write to string");
            }
            out.push('\n');
        }
    }
    Ok(out)
}
