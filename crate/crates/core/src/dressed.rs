//! Truncated matrices in the dressed product basis.
//!
//! The two-channel basis is ordered `[v_0, u_0, v_1, u_1, v_2, ...,
//! u_{n_max}, v_{n_max+1}]`, where `v_n = (0, |n>)` is a lower-channel bound
//! state of `A^dag A` and `u_m = (T|m>, 0)` is the upper-channel state
//! obtained by the parameter shift. `S` only couples `u_m` with `v_{m+1}`
//! (amplitude `sqrt(eps_{m+1})`), so the truncation closes exactly on the
//! pairs and every eigenvalue of the truncated `H` is exact.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::algebra::{energy_level, level_count, spectrum_table, Branch, LevelLabel, PotentialFamily, SpectrumTable};
use crate::error::{Error, Result};
use crate::linalg::{eig_symmetric, DenseMatrix, SymmetricDense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    /// `(0, |n>)`
    Lower(usize),
    /// `(T|m>, 0)`
    Upper(usize),
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::Lower(n) => write!(f, "v{n}"),
            BasisLabel::Upper(m) => write!(f, "u{m}"),
        }
    }
}

impl Serialize for BasisLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DressedBasis {
    n_max: usize,
}

impl DressedBasis {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        2 * self.n_max + 3
    }

    pub fn upper(&self, m: usize) -> usize {
        1 + 2 * m
    }

    pub fn lower(&self, n: usize) -> usize {
        2 * n
    }

    pub fn label(&self, index: usize) -> BasisLabel {
        if index.is_multiple_of(2) {
            BasisLabel::Lower(index / 2)
        } else {
            BasisLabel::Upper(index / 2)
        }
    }

    pub fn labels(&self) -> Vec<BasisLabel> {
        (0..self.dim()).map(|i| self.label(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DressedMatrix {
    pub basis: DressedBasis,
    pub matrix: SymmetricDense,
}

impl DressedMatrix {
    pub fn get(&self, row: BasisLabel, col: BasisLabel) -> f64 {
        self.matrix.get(self.index(row), self.index(col))
    }

    fn index(&self, label: BasisLabel) -> usize {
        match label {
            BasisLabel::Lower(n) => self.basis.lower(n),
            BasisLabel::Upper(m) => self.basis.upper(m),
        }
    }

    /// Largest entry coupling different `(u_m, v_{m+1})` pairs (or `v_0`).
    pub fn off_block_leakage(&self) -> f64 {
        let dim = self.basis.dim();
        let block = |i: usize| if i == 0 { 0 } else { i.div_ceil(2) };
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                if block(i) != block(j) {
                    worst = worst.max(self.matrix.get(i, j).abs());
                }
            }
        }
        worst
    }
}

/// Single-channel ladder matrix on `|0> .. |n_max + 1>`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderMatrix {
    pub n_max: usize,
    pub matrix: DenseMatrix,
}

/// `eps_1 .. eps_{n_max+1}`
fn excitations(family: &PotentialFamily, n_max: usize) -> Result<Vec<f64>> {
    if !level_count(family).contains(n_max + 1) {
        return Err(Error::LevelOutOfRange {
            requested: n_max + 1,
            available: match level_count(family) {
                crate::algebra::LevelCount::Finite(n) => n,
                crate::algebra::LevelCount::Unbounded => usize::MAX,
            },
        });
    }
    (1..=n_max + 1).map(|n| Ok(energy_level(family, n)?.epsilon)).collect()
}

/// `B+ |m> = sqrt(eps_{m+1}) |m+1>`; the last column is truncated to zero.
pub fn b_plus_matrix(family: &PotentialFamily, n_max: usize) -> Result<LadderMatrix> {
    let eps = excitations(family, n_max)?;
    let dim = n_max + 2;
    let mut matrix = DenseMatrix::zeros(dim, dim);
    for (m, e) in eps.iter().enumerate() {
        matrix[(m + 1, m)] = e.sqrt();
    }
    Ok(LadderMatrix { n_max, matrix })
}

/// `S = sigma_+ A + sigma_- A^dag` in the dressed basis.
pub fn s_matrix(family: &PotentialFamily, n_max: usize) -> Result<DressedMatrix> {
    let eps = excitations(family, n_max)?;
    let basis = DressedBasis::new(n_max);
    let mut dense = DenseMatrix::zeros(basis.dim(), basis.dim());
    for (m, e) in eps.iter().enumerate() {
        let (u, v) = (basis.upper(m), basis.lower(m + 1));
        dense[(u, v)] = e.sqrt();
        dense[(v, u)] = e.sqrt();
    }
    Ok(DressedMatrix {
        basis,
        matrix: SymmetricDense::try_from(dense)?,
    })
}

/// `S^2` from the ladder relations alone: `T B- B+ T^dag` on `u_m` and
/// `B+ B-` on `v_n`, both diagonal with entries `eps_{m+1}` and `eps_n`.
pub fn s_squared_matrix(family: &PotentialFamily, n_max: usize) -> Result<DressedMatrix> {
    let eps = excitations(family, n_max)?;
    let basis = DressedBasis::new(n_max);
    let mut dense = DenseMatrix::zeros(basis.dim(), basis.dim());
    for (m, e) in eps.iter().enumerate() {
        dense[(basis.upper(m), basis.upper(m))] = *e;
        dense[(basis.lower(m + 1), basis.lower(m + 1))] = *e;
    }
    Ok(DressedMatrix {
        basis,
        matrix: SymmetricDense::try_from(dense)?,
    })
}

/// `H = S^2 + sqrt(hbar Omega) S`, formed by matrix products of `S`.
pub fn h_matrix(family: &PotentialFamily, omega_drive: f64, n_max: usize) -> Result<DressedMatrix> {
    if omega_drive.is_nan() || omega_drive < 0.0 || omega_drive.is_infinite() {
        return Err(Error::NegativeDriveStrength(omega_drive));
    }
    let s = s_matrix(family, n_max)?;
    let s_dense = s.matrix.as_dense();
    let squared = s_dense.matmul(s_dense)?;
    let h = squared.add_scaled((family.hbar() * omega_drive).sqrt(), s_dense)?;
    Ok(DressedMatrix {
        basis: s.basis,
        matrix: SymmetricDense::try_from(h)?,
    })
}

/// One 2x2 block `[[h_uu, h_uv], [h_uv, h_vv]]` on the pair `(u_m, v_{m+1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairBlock {
    pub m: usize,
    pub upper_diagonal: f64,
    pub lower_diagonal: f64,
    pub coupling: f64,
}

pub fn pair_blocks(h: &DressedMatrix) -> Vec<PairBlock> {
    (0..=h.basis.n_max())
        .map(|m| PairBlock {
            m,
            upper_diagonal: h.get(BasisLabel::Upper(m), BasisLabel::Upper(m)),
            lower_diagonal: h.get(BasisLabel::Lower(m + 1), BasisLabel::Lower(m + 1)),
            coupling: h.get(BasisLabel::Upper(m), BasisLabel::Lower(m + 1)),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DressedState {
    pub m: usize,
    pub branch: Branch,
    pub coefficients: Vec<f64>,
}

/// `|Psi_m,+/-> = (u_m +/- v_{m+1}) / sqrt(2)`, minus before plus.
pub fn dressed_states(family: &PotentialFamily, n_max: usize) -> Result<Vec<DressedState>> {
    excitations(family, n_max)?;
    let basis = DressedBasis::new(n_max);
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    Ok((0..=n_max)
        .flat_map(|m| {
            Branch::BOTH.map(|branch| {
                let mut coefficients = vec![0.0; basis.dim()];
                coefficients[basis.upper(m)] = amp;
                coefficients[basis.lower(m + 1)] = branch.sign() * amp;
                DressedState {
                    m,
                    branch,
                    coefficients,
                }
            })
        })
        .collect())
}

/// The uncoupled eigenvector `v_0` of eigenvalue 0.
pub fn ground_state(n_max: usize) -> Vec<f64> {
    let mut v = vec![0.0; DressedBasis::new(n_max).dim()];
    v[0] = 1.0;
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorDiagnostic {
    /// `<m| [B-, B+] |m>` for `m = 0 ..= n_max`.
    pub diagonal: Vec<f64>,
    /// The `|n_max + 1>` entry, corrupted by truncation (`-eps_{n_max+1}`).
    pub truncated_edge: f64,
}

/// Diagonal of `[B-, B+]` from explicit products of the truncated ladder
/// matrices (`B- = B+^T`).
pub fn commutator_diagnostic(family: &PotentialFamily, n_max: usize) -> Result<CommutatorDiagnostic> {
    let b_plus = b_plus_matrix(family, n_max)?.matrix;
    let b_minus = b_plus.transpose();
    let commutator = b_minus.matmul(&b_plus)?.add_scaled(-1.0, &b_plus.matmul(&b_minus)?)?;
    let mut diagonal = commutator.diagonal();
    let truncated_edge = diagonal.pop().expect("dimension n_max + 2 >= 2");
    Ok(CommutatorDiagnostic {
        diagonal,
        truncated_edge,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelComparison {
    pub label: LevelLabel,
    pub analytic: f64,
    pub numeric: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DressedSpectrum {
    pub table: SpectrumTable,
    /// Sorted by energy; labels assigned by matching against the closed form.
    pub levels: Vec<LevelComparison>,
    pub max_deviation: f64,
}

/// Diagonalizes the truncated `H` and pairs its sorted eigenvalues with the
/// sorted closed-form levels. Degenerate levels are matched by multiplicity
/// (sorted order), never by eigenvector.
pub fn diagonalize_dressed(family: &PotentialFamily, omega_drive: f64, n_max: usize) -> Result<DressedSpectrum> {
    let h = h_matrix(family, omega_drive, n_max)?;
    let numeric = eig_symmetric(&h.matrix, false)?.values;
    let table = spectrum_table(family, omega_drive, n_max + 1)?;
    let analytic = table.sorted_energies();
    debug_assert_eq!(analytic.len(), numeric.len());
    let levels: Vec<LevelComparison> = analytic
        .iter()
        .zip(&numeric)
        .map(|(&(label, value), &num)| LevelComparison {
            label,
            analytic: value,
            numeric: num,
            deviation: (num - value).abs(),
        })
        .collect();
    let max_deviation = levels.iter().fold(0.0_f64, |m, l| m.max(l.deviation));
    Ok(DressedSpectrum {
        table,
        levels,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::jc_eigenvalue;
    use crate::linalg::matvec;

    fn morse() -> PotentialFamily {
        PotentialFamily::morse(25.0, 1.0, 0.5).unwrap()
    }

    fn ho() -> PotentialFamily {
        PotentialFamily::harmonic(1.0, 1.0).unwrap()
    }

    fn scaling() -> PotentialFamily {
        PotentialFamily::scaling(1.0, 0.5).unwrap()
    }

    #[test]
    fn basis_layout() {
        let basis = DressedBasis::new(2);
        assert_eq!(basis.dim(), 7);
        let labels: Vec<String> = basis.labels().iter().map(|l| l.to_string()).collect();
        assert_eq!(labels, ["v0", "u0", "v1", "u1", "v2", "u2", "v3"]);
    }

    #[test]
    fn b_plus_subdiagonals() {
        let b = b_plus_matrix(&ho(), 2).unwrap().matrix;
        let sub: Vec<f64> = (0..3).map(|m| b[(m + 1, m)]).collect();
        assert_eq!(sub, vec![1.0, 2f64.sqrt(), 3f64.sqrt()]);
        assert!(b.column(3).iter().all(|&x| x == 0.0));

        let b = b_plus_matrix(&morse(), 2).unwrap().matrix;
        let sub: Vec<f64> = (0..3).map(|m| b[(m + 1, m)]).collect();
        assert_eq!(sub, vec![8f64.sqrt(), 14f64.sqrt(), 18f64.sqrt()]);
    }

    #[test]
    fn b_plus_b_minus_is_number_like() {
        // B+ B- |m> = eps_m |m>
        let b = b_plus_matrix(&ho(), 3).unwrap().matrix;
        let bb = b.matmul(&b.transpose()).unwrap();
        for (a, b) in bb.diagonal().iter().zip([0.0, 1.0, 2.0, 3.0, 4.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn s_matrix_structure() {
        let s = s_matrix(&ho(), 1).unwrap();
        assert_eq!(s.get(BasisLabel::Upper(0), BasisLabel::Lower(1)), 1.0);
        assert_eq!(s.get(BasisLabel::Upper(1), BasisLabel::Lower(2)), 2f64.sqrt());
        // v0 is annihilated
        let image = matvec(&s.matrix, &ground_state(1)).unwrap();
        assert!(image.iter().all(|&x| x == 0.0));
        let s2 = eig_symmetric(&s_squared_matrix(&ho(), 1).unwrap().matrix, false).unwrap();
        assert_eq!(s2.values, vec![0.0, 1.0, 1.0, 2.0, 2.0]);

        let s = s_matrix(&morse(), 3).unwrap();
        assert_eq!(s.get(BasisLabel::Upper(0), BasisLabel::Lower(1)), 8f64.sqrt());
        assert_eq!(s.off_block_leakage(), 0.0);
    }

    #[test]
    fn s_times_s_equals_s_squared() {
        for family in [ho(), morse(), scaling()] {
            let s = s_matrix(&family, 3).unwrap();
            let prod = s.matrix.as_dense().matmul(s.matrix.as_dense()).unwrap();
            let direct = s_squared_matrix(&family, 3).unwrap();
            let err = prod.add_scaled(-1.0, direct.matrix.as_dense()).unwrap().max_abs();
            assert!(err <= 1e-13, "{family}: {err}");
        }
    }

    #[test]
    fn s_spectrum_is_plus_minus_root_eps() {
        for family in [ho(), morse(), scaling()] {
            let values = eig_symmetric(&s_matrix(&family, 3).unwrap().matrix, false)
                .unwrap()
                .values;
            let mut expected = vec![0.0];
            for n in 1..=4 {
                let e = energy_level(&family, n).unwrap().epsilon.sqrt();
                expected.push(e);
                expected.push(-e);
            }
            expected.sort_by(f64::total_cmp);
            for (a, b) in values.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "{family}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn h_blocks_follow_closed_form() {
        let h = h_matrix(&ho(), 4.0, 2).unwrap();
        assert_eq!(h.off_block_leakage(), 0.0);
        assert_eq!(h.matrix.get(0, 0), 0.0);
        let blocks = pair_blocks(&h);
        assert_eq!(
            blocks[0],
            PairBlock {
                m: 0,
                upper_diagonal: 1.0,
                lower_diagonal: 1.0,
                coupling: 2.0
            }
        );
        let vals = eig_symmetric(&h.matrix, false).unwrap().values;
        assert!(vals.iter().any(|v| (v + 1.0).abs() < 1e-12));
        assert!(vals.iter().any(|v| (v - 3.0).abs() < 1e-12));

        // Omega = 0 reduces to S^2
        let h0 = h_matrix(&morse(), 0.0, 3).unwrap();
        let direct = s_squared_matrix(&morse(), 3).unwrap();
        let err = h0
            .matrix
            .as_dense()
            .add_scaled(-1.0, direct.matrix.as_dense())
            .unwrap()
            .max_abs();
        assert!(err < 1e-12);
    }

    #[test]
    fn h_rejects_negative_drive() {
        assert_eq!(h_matrix(&ho(), -0.5, 1), Err(Error::NegativeDriveStrength(-0.5)));
    }

    #[test]
    fn dressed_states_are_eigenvectors() {
        let family = morse();
        let omega = 2.0;
        let states = dressed_states(&family, 3).unwrap();
        let s = s_matrix(&family, 3).unwrap();
        let h = h_matrix(&family, omega, 3).unwrap();
        assert_eq!(states.len(), 8);
        for st in &states {
            let norm: f64 = st.coefficients.iter().map(|c| c * c).sum();
            assert!((norm - 1.0).abs() < 1e-14);

            let eps = energy_level(&family, st.m + 1).unwrap().epsilon;
            let s_image = matvec(&s.matrix, &st.coefficients).unwrap();
            for (a, b) in s_image.iter().zip(&st.coefficients) {
                assert!((a - st.branch.sign() * eps.sqrt() * b).abs() < 1e-12);
            }
            let e = jc_eigenvalue(&family, omega, st.m, st.branch).unwrap();
            let h_image = matvec(&h.matrix, &st.coefficients).unwrap();
            for (a, b) in h_image.iter().zip(&st.coefficients) {
                assert!((a - e * b).abs() < 1e-12);
            }
        }
        // pair partners are orthogonal
        for pair in states.chunks(2) {
            let dot: f64 = pair[0]
                .coefficients
                .iter()
                .zip(&pair[1].coefficients)
                .map(|(a, b)| a * b)
                .sum();
            assert_eq!(dot, 0.0);
        }
        assert_eq!(states[0].branch, Branch::Minus);
    }

    #[test]
    fn ground_eigenvector_lives_on_v0() {
        let h = h_matrix(&morse(), 2.0, 3).unwrap();
        let eig = eig_symmetric(&h.matrix, true).unwrap();
        let idx = eig.values.iter().position(|v| v.abs() < 1e-12).unwrap();
        let vec = eig.vector(idx).unwrap();
        assert!((vec[0].abs() - 1.0).abs() < 1e-12);
        assert!(vec[1..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn commutator_examples() {
        let c = commutator_diagnostic(&ho(), 3).unwrap();
        assert!(c.diagonal.iter().all(|d| (d - 1.0).abs() < 1e-12));
        assert!((c.truncated_edge + 4.0).abs() < 1e-12);

        let c = commutator_diagnostic(&morse(), 2).unwrap();
        for (a, b) in c.diagonal.iter().zip([8.0, 6.0, 4.0]) {
            assert!((a - b).abs() < 1e-12);
        }

        let c = commutator_diagnostic(&scaling(), 2).unwrap();
        for (a, b) in c.diagonal.iter().zip([1.0, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn commutator_equals_first_differences() {
        for family in [ho(), morse(), scaling()] {
            let c = commutator_diagnostic(&family, 3).unwrap();
            for (m, d) in c.diagonal.iter().enumerate() {
                let diff = energy_level(&family, m + 1).unwrap().epsilon - energy_level(&family, m).unwrap().epsilon;
                assert!((d - diff).abs() <= 1e-12 * diff.abs().max(1.0), "{family} m={m}");
            }
        }
    }

    #[test]
    fn out_of_range_truncation() {
        assert!(matches!(
            s_matrix(&morse(), 4),
            Err(Error::LevelOutOfRange {
                requested: 5,
                available: 4
            })
        ));
        assert!(matches!(
            commutator_diagnostic(&morse(), 4),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn diagonalization_matches_closed_form() {
        let spec = diagonalize_dressed(&morse(), 2.0, 3).unwrap();
        assert!(spec.max_deviation <= 1e-10);
        let numeric: Vec<f64> = spec.levels.iter().map(|l| l.numeric).collect();
        assert!((numeric[0]).abs() < 1e-12);
        assert!((numeric[1] - 4.0).abs() < 1e-12);

        // Omega = 0: doublets matched by multiplicity
        let spec = diagonalize_dressed(&morse(), 0.0, 3).unwrap();
        assert!(spec.max_deviation <= 1e-12);
        assert_eq!(
            spec.levels.iter().filter(|l| (l.analytic - 8.0).abs() < 1e-12).count(),
            2
        );

        // strong drive pushes a level below the uncoupled 0
        let spec = diagonalize_dressed(&ho(), 4.0, 2).unwrap();
        assert!((spec.levels[0].numeric + 1.0).abs() < 1e-12);
        assert_eq!(
            spec.levels[0].label,
            LevelLabel::Dressed {
                m: 0,
                branch: Branch::Minus
            }
        );
    }
}
