//! Substitution matrices of Rips pairs, Perron-Frobenius data and the
//! dimension `1 + ln mu / ln lambda`.
//!
//! Convention: lengths are row vectors and `l' = l A`, so `A[i][j]` counts how
//! many times long band `j` of the smaller complex runs through band `i` of
//! the larger one.

use crate::complex::{BandComplex, BandId};
use crate::error::{Error, Result};
use crate::gallery::{self, IntMatrix, Presentation, RipsStepWitness};
use crate::iso::isomorphic_scaled;
use crate::normalize::normalize_long_bands;
use crate::rational::{self, Rational};
use crate::rips::{collapse, FreeArc};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const ITERATION_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstitutionData {
    pub a: IntMatrix,
    /// Bands of the larger complex, in row order.
    pub rows: Vec<BandId>,
    /// Bands of the model, in column order.
    pub columns: Vec<BandId>,
    #[serde(with = "rational::serde_str")]
    pub lambda: Rational,
    pub mu: f64,
    pub residual: f64,
    /// Bands of the smaller complex that are whole, untouched bands of the
    /// larger one; the area argument assumes there are none.
    pub whole_bands: Vec<BandId>,
}

/// Base for the positional length trick: band `i` gets length `RADIX^i`, so
/// merged lengths spell out traversal counts digit by digit.
const RADIX: u64 = 1 << 32;

/// Replays `schedule` on `y` (each collapse followed by merging long bands,
/// as in [`gallery::search_collapses`]) and requires the result to be
/// isomorphic to `model` shrunk by `lambda`. For a self-similar complex the
/// model is `y` itself.
pub fn substitution_matrix(
    y: &BandComplex,
    schedule: &[FreeArc],
    model: &BandComplex,
    lambda: &Rational,
) -> Result<SubstitutionData> {
    let y = normalize_long_bands(&y.forget_lengths());
    let rows: Vec<BandId> = y.bands().iter().map(|b| b.id).collect();
    let radix = Rational::from_integer(BigInt::from(RADIX));
    let mut power = Rational::one();
    let mut weights = std::collections::BTreeMap::new();
    for id in &rows {
        weights.insert(*id, power.clone());
        power *= &radix;
    }
    let mut state = y.with_lengths(|b| weights[&b.id].clone());
    for arc in schedule {
        state = normalize_long_bands(&collapse(&state, arc)?);
    }
    if !lambda.is_positive() {
        return Err(Error::NonPositiveParameter(format!("lambda = {}", rational::format(lambda))));
    }
    let target = model.forget_lengths();
    let witness = isomorphic_scaled(&target, &state.forget_lengths(), &lambda.recip())
        .ok_or_else(|| Error::NotSelfSimilar("replayed schedule does not reach the rescaled complex".into()))?;

    let columns: Vec<BandId> = target.bands().iter().map(|b| b.id).collect();
    let mut a = vec![vec![0i64; columns.len()]; rows.len()];
    let mut whole_bands = Vec::new();
    for (image, (reached, _)) in &witness.bands {
        let j = columns.iter().position(|c| c == image).expect("witness keys are model bands");
        let band = state.band(*reached).expect("witness maps onto bands of the state");
        let counts = digits(band.length.as_ref().expect("lengths were set"), rows.len());
        for (i, count) in counts.iter().enumerate() {
            a[i][j] = *count;
        }
        if counts.iter().sum::<i64>() == 1 {
            let i = counts.iter().position(|&c| c == 1).unwrap();
            if y.bands()[i].width == band.width {
                whole_bands.push(*image);
            }
        }
    }
    whole_bands.sort();
    let pf = pf_eigen(&to_float(&a), DEFAULT_TOL)?;
    Ok(SubstitutionData {
        a,
        rows,
        columns,
        lambda: lambda.clone(),
        mu: pf.mu,
        residual: pf.residual,
        whole_bands,
    })
}

fn digits(x: &Rational, n: usize) -> Vec<i64> {
    assert!(x.is_integer(), "traversal lengths are integers");
    let mut rest = x.to_integer();
    let radix = BigInt::from(RADIX);
    (0..n)
        .map(|_| {
            let d = &rest % &radix;
            rest = &rest / &radix;
            d.to_i64().expect("digit fits")
        })
        .collect()
}

/// Substitution matrix of one gallery stage `Z(B(m,n) w', l) -> Z(w', l A)`,
/// folded onto the three length parameters (`B1` and `B4` share `l1`).
pub fn gallery_substitution(m: i64, n: i64, budget: usize) -> Result<(IntMatrix, RipsStepWitness)> {
    let ones = vec![rational::int(1); 5];
    let ell = vec![rational::int(1); 3];
    let witness = gallery::verify_rips_step(m, n, &ones, &ell, budget)?;
    let w = gallery::mat_vec(&gallery::matrix_b(m, n)?, &ones);
    let y = gallery::build_z(&w, None, Presentation::FourBand)?;
    let y_prime = gallery::build_z(&ones, None, Presentation::FourBand)?;
    let data = substitution_matrix(&y, &witness.schedule, &y_prime, &Rational::one())?;
    // band id -> length parameter
    let class = |b: BandId| if b.0 == 3 { 0 } else { b.0 as usize };
    let mut folded = vec![vec![0i64; 3]; 3];
    let mut seen = [false; 3];
    for (j, col) in data.columns.iter().enumerate() {
        let column: Vec<i64> = (0..3)
            .map(|a| data.rows.iter().enumerate().filter(|(_, r)| class(**r) == a).map(|(i, _)| data.a[i][j]).sum())
            .collect();
        let b = class(*col);
        if seen[b] {
            if (0..3).any(|a| folded[a][b] != column[a]) {
                return Err(Error::NotSelfSimilar("bands sharing a length disagree".into()));
            }
        } else {
            for a in 0..3 {
                folded[a][b] = column[a];
            }
            seen[b] = true;
        }
    }
    Ok((folded, witness))
}

fn to_float(a: &IntMatrix) -> Vec<Vec<f64>> {
    a.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PfEigen {
    pub mu: f64,
    /// Positive eigenvector with max entry 1.
    pub v: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Perron-Frobenius eigenvalue and right eigenvector of a nonnegative square
/// matrix, by power iteration on `M + I` (the shift makes periodic matrices
/// converge and moves every eigenvalue by exactly one).
pub fn pf_eigen(m: &[Vec<f64>], tol: f64) -> Result<PfEigen> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(Error::HypothesisViolated("matrix must be square and non-empty".into()));
    }
    if m.iter().flatten().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::HypothesisViolated("matrix must be nonnegative".into()));
    }
    if m.iter().any(|r| r.iter().all(|&x| x == 0.0)) {
        return Err(Error::HypothesisViolated("matrix has a zero row".into()));
    }
    let mut v = vec![1.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=ITERATION_CAP {
        let mut next: Vec<f64> = (0..n).map(|i| v[i] + dot(&m[i], &v)).collect();
        let top = next.iter().cloned().fold(0.0, f64::max);
        next.iter_mut().for_each(|x| *x /= top);
        v = next;
        let mv: Vec<f64> = m.iter().map(|r| dot(r, &v)).collect();
        let mu = mv.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / v.iter().map(|b| b * b).sum::<f64>();
        residual = mv.iter().zip(&v).map(|(a, b)| (a - mu * b).abs()).fold(0.0, f64::max);
        if residual <= tol {
            return Ok(PfEigen {
                mu,
                v,
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: ITERATION_CAP,
        residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn transpose(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..m.first().map_or(0, Vec::len)).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

/// `1 + ln mu / ln lambda`, defined for `1 < mu < lambda`.
pub fn hausdorff_dimension(mu: f64, lambda: f64) -> Result<f64> {
    if !(mu > 1.0) {
        return Err(Error::HypothesisViolated(format!("mu = {mu} must exceed 1")));
    }
    if !(mu < lambda) {
        return Err(Error::HypothesisViolated(format!("mu = {mu} must be below lambda = {lambda}")));
    }
    let d = 1.0 + mu.ln() / lambda.ln();
    debug_assert!(d > 1.0 && d < 2.0);
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaShrink {
    pub ratio: f64,
    pub expected: f64,
    pub within_tol: bool,
    pub strictly_smaller: bool,
}

impl AreaShrink {
    pub fn holds(&self) -> bool {
        self.within_tol && self.strictly_smaller
    }
}

/// With lengths set to the left PF vector `l` of `a` (`l A = mu l`), compares
/// `area(Y') = (l A) . K . w'` with `mu / lambda * area(Y)`, `area(Y) =
/// l . K . w`. `coupling` is `K`: the identity when rows are bands, `C` for
/// the gallery's length and width parameters.
pub fn area_shrink_check(
    a: &IntMatrix,
    coupling: &IntMatrix,
    w: &[f64],
    w_prime: &[f64],
    lambda: f64,
    mu: f64,
    tol: f64,
) -> Result<AreaShrink> {
    let fa = to_float(a);
    let ell = pf_eigen(&transpose(&fa), DEFAULT_TOL)?.v;
    let ell_prime: Vec<f64> = (0..fa[0].len()).map(|j| ell.iter().zip(&fa).map(|(l, r)| l * r[j]).sum()).collect();
    let k = to_float(coupling);
    let area = |l: &[f64], w: &[f64]| -> f64 { l.iter().zip(&k).map(|(x, r)| x * dot(r, w)).sum() };
    let before = area(&ell, w);
    let after = area(&ell_prime, w_prime);
    let expected = mu / lambda;
    Ok(AreaShrink {
        ratio: after / before,
        expected,
        within_tol: (after - expected * before).abs() <= tol * before,
        strictly_smaller: after < before,
    })
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub m: i64,
    pub n: i64,
    pub mu: f64,
    pub mu_residual: f64,
    pub lambda: f64,
    pub lambda_residual: f64,
    pub dimension: Option<f64>,
    pub hypothesis_checks: HypothesisChecks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisChecks {
    pub mu_above_one: bool,
    pub mu_below_lambda: bool,
    pub area_shrinks: bool,
}

/// Spectral data of the constant-`(m, n)` gallery: `mu` from `A(m,n)`,
/// `lambda` from `B(m,n)`, area check at the fixed-point widths.
pub fn constant_gallery_report(m: i64, n: i64, tol: f64) -> Result<SpectralReport> {
    let a = gallery::matrix_a(m, n)?;
    let b = gallery::matrix_b(m, n)?;
    let pa = pf_eigen(&to_float(&a), tol)?;
    let pb = pf_eigen(&to_float(&b), tol)?;
    let w_prime = pb.v.clone();
    let w: Vec<f64> = to_float(&b).iter().map(|r| dot(r, &w_prime)).collect();
    let shrink = area_shrink_check(&a, &gallery::matrix_c(), &w, &w_prime, pb.mu, pa.mu, 1e-9)?;
    let dimension = hausdorff_dimension(pa.mu, pb.mu).ok();
    Ok(SpectralReport {
        m,
        n,
        mu: pa.mu,
        mu_residual: pa.residual,
        lambda: pb.mu,
        lambda_residual: pb.residual,
        dimension,
        hypothesis_checks: HypothesisChecks {
            mu_above_one: pa.mu > 1.0,
            mu_below_lambda: pa.mu < pb.mu,
            area_shrinks: shrink.holds(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::ComplexBuilder;
    use crate::rational::int;

    #[test]
    fn identity_has_eigenvalue_one() {
        let p = pf_eigen(&to_float(&identity(4)), DEFAULT_TOL).unwrap();
        assert!((p.mu - 1.0).abs() < 1e-12);
        assert!(p.v.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn two_by_two_example() {
        // (x - 3)(x - 1)
        let p = pf_eigen(&[vec![2.0, 1.0], vec![1.0, 2.0]], DEFAULT_TOL).unwrap();
        assert!((p.mu - 3.0).abs() < 1e-12);
        assert!((p.v[0] - p.v[1]).abs() < 1e-12);
    }

    #[test]
    fn periodic_matrix_converges() {
        let p = pf_eigen(&[vec![0.0, 2.0], vec![2.0, 0.0]], DEFAULT_TOL).unwrap();
        assert!((p.mu - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_rows_and_negatives() {
        assert!(matches!(pf_eigen(&[vec![0.0]], 1e-9), Err(Error::HypothesisViolated(_))));
        assert!(matches!(pf_eigen(&[vec![-1.0]], 1e-9), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn dimension_formula() {
        assert!((hausdorff_dimension(3.0, 9.0).unwrap() - 1.5).abs() < 1e-15);
        let d = hausdorff_dimension(1.0 + 1e-6, 4.0).unwrap();
        assert!(d > 1.0 && d < 1.0 + 1e-5);
        assert!(matches!(hausdorff_dimension(2.0, 2.0), Err(Error::HypothesisViolated(_))));
        assert!(matches!(hausdorff_dimension(1.0, 2.0), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn identity_substitution_halves_area() {
        let s = area_shrink_check(&identity(2), &identity(2), &[2.0, 4.0], &[1.0, 2.0], 2.0, 1.0, 1e-12).unwrap();
        assert!((s.ratio - 0.5).abs() < 1e-12);
        assert!(s.holds());
    }

    #[test]
    fn empty_schedule_is_the_identity_substitution() {
        // y' is y shrunk by 2: every band runs through itself once
        let y = ComplexBuilder::new()
            .component(int(2))
            .component(int(2))
            .band(int(2), 0, int(0), 1, int(0))
            .band(int(1), 0, int(1), 1, int(0))
            .build()
            .unwrap();
        let model = y.scaled(&int(2));
        let data = substitution_matrix(&y, &[], &model, &int(2)).unwrap();
        assert_eq!(data.a, identity(2));
        assert!((data.mu - 1.0).abs() < 1e-12);
        // nothing was collapsed, so both bands survive whole
        assert_eq!(data.whole_bands.len(), 2);
        assert!(matches!(
            substitution_matrix(&y, &[], &model, &int(3)),
            Err(Error::NotSelfSimilar(_))
        ));
    }

    #[test]
    fn gallery_stage_reproduces_a() {
        let (a, _) = gallery_substitution(1, 1, 100_000).unwrap();
        assert_eq!(a, gallery::matrix_a(1, 1).unwrap());
    }

    #[test]
    fn constant_one_one_report() {
        let r = constant_gallery_report(1, 1, DEFAULT_TOL).unwrap();
        assert!(r.hypothesis_checks.mu_below_lambda && r.hypothesis_checks.area_shrinks);
        let d = r.dimension.unwrap();
        assert!(d > 1.0 && d < 2.0);
    }
}
