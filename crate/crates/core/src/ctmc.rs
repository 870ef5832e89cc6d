//! Exact analytics for small finite-state continuous-time Markov chains.
//!
//! A [`Generator`] is validated once and then treated as immutable. From it we
//! derive the stationary law, transient probabilities (by uniformization), the
//! deviation matrix `D = ∫₀^∞ (P(t) − Π) dt`, the long-run covariance
//! `C = diag(π)·D + Dᵀ·diag(π)` of the occupation times, and the scalar
//! `λᵀCλ` that drives the modulation noise of the queue.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Tolerance for accepting a supplied diagonal against the off-diagonal row sum.
pub const DIAGONAL_TOL: f64 = 1e-9;

/// Poisson tail mass at which the uniformization series is truncated.
const UNIFORMIZATION_TAIL: f64 = 1e-14;

/// Largest `Λu·t` handled in one uniformization pass; longer horizons are split
/// and recombined by repeated squaring.
const UNIFORMIZATION_CHUNK: f64 = 32.0;

/// A validated, irreducible CTMC generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    rates: DMatrix<f64>,
}

impl Generator {
    /// Validates a full rate matrix, diagonal included.
    ///
    /// The diagonal must agree with the negative off-diagonal row sum to within
    /// [`DIAGONAL_TOL`]; it is then reset to that sum so rows sum to zero
    /// to machine precision.
    pub fn new(rates: DMatrix<f64>) -> Result<Self> {
        let d = check_square(&rates)?;
        let mut rates = rates;
        for i in 0..d {
            let mut off = 0.0;
            for j in 0..d {
                let v = rates[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFiniteRate { row: i, col: j });
                }
                if i != j {
                    if v < 0.0 {
                        return Err(Error::NegativeRate {
                            row: i,
                            col: j,
                            value: v,
                        });
                    }
                    off += v;
                }
            }
            let diagonal = rates[(i, i)];
            if (diagonal + off).abs() > DIAGONAL_TOL {
                return Err(Error::RowSumViolation {
                    row: i,
                    diagonal,
                    expected: -off,
                });
            }
            rates[(i, i)] = -off;
        }
        check_irreducible(&rates)?;
        Ok(Self { rates })
    }

    /// Builds a generator from off-diagonal rates only; the diagonal is filled
    /// with the negative row sums. Any value supplied on the diagonal is ignored.
    pub fn from_off_diagonal(rates: DMatrix<f64>) -> Result<Self> {
        let d = check_square(&rates)?;
        let mut rates = rates;
        for i in 0..d {
            rates[(i, i)] = 0.0;
            let off: f64 = rates.row(i).sum();
            rates[(i, i)] = -off;
        }
        Self::new(rates)
    }

    /// Convenience constructor from row-major nested vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows_to_matrix(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.rates.nrows()
    }

    pub fn rates(&self) -> &DMatrix<f64> {
        &self.rates
    }

    /// Total rate of leaving state `i`, `q_i = −q_ii`.
    pub fn exit_rate(&self, i: usize) -> f64 {
        -self.rates[(i, i)]
    }

    pub fn max_exit_rate(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.exit_rate(i))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = rows.len();
    for r in rows {
        if r.len() != d {
            return Err(Error::NotSquare {
                rows: d,
                cols: r.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Every state must reach every other along positive off-diagonal rates.
/// Checking reachability from state 0 in the graph and its transpose suffices.
fn check_irreducible(rates: &DMatrix<f64>) -> Result<()> {
    let d = rates.nrows();
    for transpose in [false, true] {
        let mut seen = vec![false; d];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..d {
                let w = if transpose {
                    rates[(j, i)]
                } else {
                    rates[(i, j)]
                };
                if i != j && w > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            let (from, to) = if transpose { (k, 0) } else { (0, k) };
            return Err(Error::Reducible { from, to });
        }
    }
    Ok(())
}

/// Stationary distribution `π` with `πᵀQ = 0`, `Σπ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryLaw {
    pi: DVector<f64>,
}

impl StationaryLaw {
    pub fn pi(&self) -> &DVector<f64> {
        &self.pi
    }

    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.pi.as_slice()
    }

    /// `Π = 1πᵀ`: every row equals π.
    pub fn projector(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |_, j| self.pi[j])
    }

    /// Stationary mean `πᵀv` of a per-state quantity.
    pub fn expectation(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: values.len(),
            });
        }
        Ok(self.pi.iter().zip(values).map(|(p, v)| p * v).sum())
    }
}

/// Solves the augmented system `[Qᵀ; 1ᵀ] π = [0; 1]` through its normal
/// equations, followed by one round of iterative refinement.
pub fn stationary_distribution(g: &Generator) -> Result<StationaryLaw> {
    let d = g.dim();
    let mut a = DMatrix::<f64>::zeros(d + 1, d);
    a.view_mut((0, 0), (d, d)).copy_from(&g.rates.transpose());
    a.row_mut(d).fill(1.0);
    let mut b = DVector::<f64>::zeros(d + 1);
    b[d] = 1.0;

    let at = a.transpose();
    let lu = (&at * &a).lu();
    let mut pi = lu
        .solve(&(&at * &b))
        .ok_or(Error::SingularSystem("stationary distribution"))?;
    let residual = &b - &a * &pi;
    if let Some(corr) = lu.solve(&(&at * residual)) {
        pi += corr;
    }
    for p in pi.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let total = pi.sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::SingularSystem("stationary distribution"));
    }
    pi /= total;
    Ok(StationaryLaw { pi })
}

/// Transient matrix `P(t) = e^{Qt}` by uniformization.
///
/// With `Λu = max_i q_i` and `K = I + Q/Λu`, `P(t) = Σ_k Pois(k; Λu t)·K^k`,
/// truncated once the remaining Poisson mass drops below 1e-14. Horizons with
/// `Λu t` above a fixed chunk size are evaluated at `t/2^m` and squared `m`
/// times so the Poisson weights never underflow.
pub fn transient_matrix(g: &Generator, t: f64) -> Result<DMatrix<f64>> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let d = g.dim();
    let lam = g.max_exit_rate();
    if t == 0.0 || lam == 0.0 {
        return Ok(DMatrix::identity(d, d));
    }
    let mut squarings = 0u32;
    let mut span = lam * t;
    while span > UNIFORMIZATION_CHUNK {
        span /= 2.0;
        squarings += 1;
    }
    let k = DMatrix::identity(d, d) + g.rates() / lam;

    let mut weight = (-span).exp();
    let mut mass = weight;
    let mut power = DMatrix::identity(d, d);
    let mut p = &power * weight;
    let max_terms = (span + 12.0 * span.sqrt() + 64.0).ceil() as usize;
    for n in 1..=max_terms {
        if 1.0 - mass < UNIFORMIZATION_TAIL {
            break;
        }
        power = &power * &k;
        weight *= span / n as f64;
        mass += weight;
        p += &power * weight;
    }
    // Spread the truncated tail over the kept terms so rows sum to one
    // before squaring amplifies the deficit.
    p /= mass;
    for _ in 0..squarings {
        p = &p * &p;
    }
    Ok(p)
}

/// Deviation matrix `D_ij = ∫₀^∞ (p_ij(t) − π_j) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationMatrix {
    d: DMatrix<f64>,
}

impl DeviationMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }
}

/// `D = (Π − Q)⁻¹ − Π`, via LU with partial pivoting.
pub fn deviation_matrix(g: &Generator, law: &StationaryLaw) -> Result<DeviationMatrix> {
    if law.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: law.dim(),
        });
    }
    let projector = law.projector();
    let fundamental = (&projector - g.rates())
        .lu()
        .try_inverse()
        .ok_or(Error::SingularSystem("deviation matrix"))?;
    Ok(DeviationMatrix {
        d: fundamental - projector,
    })
}

/// Asymptotic covariance rate of the occupation-time vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceC {
    c: DMatrix<f64>,
}

impl CovarianceC {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }
}

/// `C_ij = π_i D_ij + π_j D_ji`.
pub fn covariance_c(law: &StationaryLaw, dev: &DeviationMatrix) -> Result<CovarianceC> {
    if law.dim() != dev.dim() {
        return Err(Error::DimensionMismatch {
            expected: dev.dim(),
            found: law.dim(),
        });
    }
    let weighted = DMatrix::from_diagonal(law.pi()) * dev.matrix();
    let c = &weighted + weighted.transpose();
    Ok(CovarianceC { c })
}

/// `Þ = λᵀCλ`, the diffusion coefficient contributed by modulation noise.
pub fn thorn(lambda: &[f64], c: &CovarianceC) -> Result<f64> {
    if lambda.len() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: lambda.len(),
        });
    }
    if let Some(&v) = lambda.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidModel(format!("arrival rate {v} is negative")));
    }
    let l = DVector::from_column_slice(lambda);
    // λᵀCλ ≥ 0 for PSD C; rounding can leave a −1e-17 residue.
    Ok(l.dot(&(c.matrix() * &l)).max(0.0))
}

/// Everything derived from a generator in one bundle.
#[derive(Debug, Clone)]
pub struct ChainAnalysis {
    pub stationary: StationaryLaw,
    pub deviation: DeviationMatrix,
    pub covariance: CovarianceC,
}

impl ChainAnalysis {
    pub fn new(g: &Generator) -> Result<Self> {
        let stationary = stationary_distribution(g)?;
        let deviation = deviation_matrix(g, &stationary)?;
        let covariance = covariance_c(&stationary, &deviation)?;
        Ok(Self {
            stationary,
            deviation,
            covariance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> Generator {
        Generator::from_rows(&[vec![-1.0, 1.0], vec![3.0, -3.0]]).unwrap()
    }

    #[test]
    fn accepts_two_state_and_trivial_chain() {
        assert_eq!(two_state().dim(), 2);
        let g = Generator::from_rows(&[vec![0.0]]).unwrap();
        assert_eq!(g.dim(), 1);
    }

    #[test]
    fn rejects_reducible() {
        let err = Generator::from_rows(&[vec![-1.0, 1.0], vec![0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::Reducible { .. }), "{err}");
    }

    #[test]
    fn rejects_negative_rate_and_bad_rows() {
        let err = Generator::from_rows(&[vec![1.0, -1.0], vec![1.0, -1.0]]).unwrap_err();
        assert!(matches!(err, Error::NegativeRate { row: 0, col: 1, .. }));
        let err = Generator::from_rows(&[vec![-1.0, 1.0], vec![2.0, -3.0]]).unwrap_err();
        assert!(matches!(err, Error::RowSumViolation { row: 1, .. }));
        let err = Generator::from_rows(&[vec![-1.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
    }

    #[test]
    fn auto_fills_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[7.0, 1.0, 3.0, 0.0]);
        let g = Generator::from_off_diagonal(m).unwrap();
        assert_eq!(g, two_state());
    }

    #[test]
    fn stationary_examples() {
        let law = stationary_distribution(&two_state()).unwrap();
        assert!((law.pi()[0] - 0.75).abs() < 1e-14);
        assert!((law.pi()[1] - 0.25).abs() < 1e-14);

        let law = stationary_distribution(&Generator::from_rows(&[vec![0.0]]).unwrap()).unwrap();
        assert_eq!(law.as_slice(), &[1.0]);

        let sym = Generator::from_rows(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let law = stationary_distribution(&sym).unwrap();
        assert!((law.pi()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn transient_matches_two_state_closed_form() {
        let g = two_state();
        let (q1, q2, qb) = (1.0, 3.0, 4.0);
        for &t in &[0.0, 0.01, 0.3, 1.0, 7.5, 40.0] {
            let p = transient_matrix(&g, t).unwrap();
            let e = (-qb * t).exp();
            let want = [
                [(q2 + q1 * e) / qb, (q1 - q1 * e) / qb],
                [(q2 - q2 * e) / qb, (q1 + q2 * e) / qb],
            ];
            for i in 0..2 {
                for j in 0..2 {
                    assert!((p[(i, j)] - want[i][j]).abs() < 1e-12, "t={t}");
                }
            }
        }
        assert!(matches!(
            transient_matrix(&g, -1.0),
            Err(Error::NegativeTime(_))
        ));
    }

    #[test]
    fn long_horizon_stays_stochastic() {
        let g = Generator::from_rows(&[vec![-500.0, 500.0], vec![1.0, -1.0]]).unwrap();
        let p = transient_matrix(&g, 100.0).unwrap();
        for i in 0..2 {
            assert!((p.row(i).sum() - 1.0).abs() < 1e-12);
            assert!(p.row(i).iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn trivial_chain_has_zero_deviation_and_covariance() {
        let g = Generator::from_rows(&[vec![0.0]]).unwrap();
        let a = ChainAnalysis::new(&g).unwrap();
        assert_eq!(a.deviation.matrix()[(0, 0)], 0.0);
        assert_eq!(a.covariance.matrix()[(0, 0)], 0.0);
        assert_eq!(thorn(&[5.0], &a.covariance).unwrap(), 0.0);
    }

    #[test]
    fn thorn_checks_dimensions() {
        let a = ChainAnalysis::new(&two_state()).unwrap();
        assert!(matches!(
            thorn(&[1.0], &a.covariance),
            Err(Error::DimensionMismatch { .. })
        ));
        let law1 = stationary_distribution(&Generator::from_rows(&[vec![0.0]]).unwrap()).unwrap();
        assert!(covariance_c(&law1, &a.deviation).is_err());
    }
}
