//! Explicit Bayesian zero-sum games and symmetric signaling schemes.
//!
//! A signaling scheme can be held either as a state-by-signal probability
//! matrix ([`SignalingScheme`]) or as a convex decomposition of the prior into
//! weighted posteriors ([`ConvexDecomposition`]). The two are interconvertible
//! and describe the same policy.

use serde::{Deserialize, Serialize};

use crate::error::{check_distribution, Error, Result};

/// Tolerance for construction-time invariant checks.
pub const CONSTRUCT_TOL: f64 = 1e-9;
/// Tolerance for cross-operation consistency checks (Bayes plausibility).
pub const CONSISTENCY_TOL: f64 = 1e-7;
/// Signals whose weight falls below this are pruned.
pub const PRUNE_WEIGHT: f64 = 1e-12;

pub type Matrix = Vec<Vec<f64>>;

fn check_matrix(a: &Matrix, rows: usize, cols: usize, what: &str) -> Result<()> {
    if a.len() != rows || a.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension(format!("{what} must be {rows}x{cols}")));
    }
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{what} has non-finite entries"
        )));
    }
    Ok(())
}

/// A two-player zero-sum game whose payoff matrix depends on a random state.
///
/// `payoffs[θ][i][j]` is the row player's payoff when the state is `θ`, the
/// row player picks `i` and the column player picks `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameFile", into = "GameFile")]
pub struct BayesianZeroSumGame {
    payoffs: Vec<Matrix>,
    prior: Vec<f64>,
    rows: usize,
    cols: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct GameFile {
    r: usize,
    c: usize,
    #[serde(rename = "M")]
    m: usize,
    prior: Vec<f64>,
    payoffs: Vec<Matrix>,
}

impl TryFrom<GameFile> for BayesianZeroSumGame {
    type Error = Error;

    fn try_from(f: GameFile) -> Result<Self> {
        if f.payoffs.len() != f.m || f.prior.len() != f.m {
            return Err(Error::Dimension(format!(
                "M = {} but {} payoff matrices and prior of length {}",
                f.m,
                f.payoffs.len(),
                f.prior.len()
            )));
        }
        let g = BayesianZeroSumGame::new(f.payoffs, f.prior)?;
        if g.rows != f.r || g.cols != f.c {
            return Err(Error::Dimension(format!(
                "declared {}x{}, matrices are {}x{}",
                f.r, f.c, g.rows, g.cols
            )));
        }
        Ok(g)
    }
}

impl From<BayesianZeroSumGame> for GameFile {
    fn from(g: BayesianZeroSumGame) -> Self {
        GameFile {
            r: g.rows,
            c: g.cols,
            m: g.payoffs.len(),
            prior: g.prior,
            payoffs: g.payoffs,
        }
    }
}

impl BayesianZeroSumGame {
    pub fn new(payoffs: Vec<Matrix>, prior: Vec<f64>) -> Result<Self> {
        let first = payoffs
            .first()
            .ok_or_else(|| Error::Dimension("at least one state is required".into()))?;
        let rows = first.len();
        let cols = first.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("payoff matrices must be non-empty".into()));
        }
        for (theta, a) in payoffs.iter().enumerate() {
            check_matrix(a, rows, cols, &format!("payoff matrix {theta}"))?;
        }
        if prior.len() != payoffs.len() {
            return Err(Error::Dimension(format!(
                "prior has length {}, expected {}",
                prior.len(),
                payoffs.len()
            )));
        }
        check_distribution("prior", &prior, CONSTRUCT_TOL)?;
        Ok(BayesianZeroSumGame {
            payoffs,
            prior,
            rows,
            cols,
        })
    }

    pub fn num_states(&self) -> usize {
        self.payoffs.len()
    }

    pub fn num_row_strategies(&self) -> usize {
        self.rows
    }

    pub fn num_col_strategies(&self) -> usize {
        self.cols
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn payoffs(&self) -> &[Matrix] {
        &self.payoffs
    }

    /// Largest absolute payoff over all states.
    pub fn max_abs_payoff(&self) -> f64 {
        self.payoffs
            .iter()
            .flatten()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// The same game seen from the column player: `B^θ = -(A^θ)ᵀ`. Its row
    /// player's value equals the negated row value of `self` for every
    /// posterior.
    pub fn swap_roles(&self) -> Self {
        let payoffs = self
            .payoffs
            .iter()
            .map(|a| {
                (0..self.cols)
                    .map(|j| (0..self.rows).map(|i| -a[i][j]).collect())
                    .collect()
            })
            .collect();
        BayesianZeroSumGame {
            payoffs,
            prior: self.prior.clone(),
            rows: self.cols,
            cols: self.rows,
        }
    }

    pub fn with_prior(&self, prior: Vec<f64>) -> Result<Self> {
        Self::new(self.payoffs.clone(), prior)
    }
}

/// Posterior expected payoff matrix `E_{θ∼posterior}[A^θ]`.
pub fn expected_matrix(game: &BayesianZeroSumGame, posterior: &[f64]) -> Result<Matrix> {
    if posterior.len() != game.num_states() {
        return Err(Error::Dimension(format!(
            "posterior has length {}, game has {} states",
            posterior.len(),
            game.num_states()
        )));
    }
    check_distribution("posterior", posterior, CONSTRUCT_TOL)?;
    let mut out = vec![vec![0.0; game.cols]; game.rows];
    for (a, &w) in game.payoffs.iter().zip(posterior) {
        if w == 0.0 {
            continue;
        }
        for (orow, arow) in out.iter_mut().zip(a) {
            for (o, v) in orow.iter_mut().zip(arow) {
                *o += w * v;
            }
        }
    }
    Ok(out)
}

/// A symmetric signaling scheme: `phi[θ][σ]` is the probability of announcing
/// signal `σ` when the state is `θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemeFile", into = "SchemeFile")]
pub struct SignalingScheme {
    phi: Matrix,
    num_signals: usize,
}

/// Scheme file layout. `phi` is written row-major as a flat array; nested
/// rows are accepted on input too.
#[derive(Serialize, Deserialize)]
struct SchemeFile {
    #[serde(rename = "M")]
    m: usize,
    signals: usize,
    phi: PhiLayout,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PhiLayout {
    Flat(Vec<f64>),
    Nested(Matrix),
}

impl TryFrom<SchemeFile> for SignalingScheme {
    type Error = Error;

    fn try_from(f: SchemeFile) -> Result<Self> {
        let phi = match f.phi {
            PhiLayout::Nested(rows) => rows,
            PhiLayout::Flat(flat) => {
                if f.signals == 0 || flat.len() != f.m * f.signals {
                    return Err(Error::Dimension(format!(
                        "phi has {} entries, expected {}x{}",
                        flat.len(),
                        f.m,
                        f.signals
                    )));
                }
                flat.chunks(f.signals).map(<[f64]>::to_vec).collect()
            }
        };
        let s = SignalingScheme::new(phi)?;
        if s.num_states() != f.m || s.num_signals != f.signals {
            return Err(Error::Dimension(format!(
                "declared {}x{}, phi is {}x{}",
                f.m,
                f.signals,
                s.num_states(),
                s.num_signals
            )));
        }
        Ok(s)
    }
}

impl From<SignalingScheme> for SchemeFile {
    fn from(s: SignalingScheme) -> Self {
        SchemeFile {
            m: s.phi.len(),
            signals: s.num_signals,
            phi: PhiLayout::Flat(s.phi.into_iter().flatten().collect()),
        }
    }
}

impl SignalingScheme {
    pub fn new(phi: Matrix) -> Result<Self> {
        let num_signals = phi.first().map_or(0, Vec::len);
        if phi.is_empty() || num_signals == 0 {
            return Err(Error::Dimension(
                "scheme needs at least one state and signal".into(),
            ));
        }
        check_matrix(&phi, phi.len(), num_signals, "phi")?;
        for row in &phi {
            check_distribution("scheme row", row, CONSTRUCT_TOL)?;
        }
        Ok(SignalingScheme { phi, num_signals })
    }

    /// One signal, always sent.
    pub fn opaque(num_states: usize) -> Self {
        SignalingScheme {
            phi: vec![vec![1.0]; num_states],
            num_signals: 1,
        }
    }

    /// The identity scheme: the state is announced.
    pub fn full_revelation(num_states: usize) -> Self {
        let phi = (0..num_states)
            .map(|t| {
                (0..num_states)
                    .map(|s| if s == t { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        SignalingScheme {
            phi,
            num_signals: num_states,
        }
    }

    pub fn num_states(&self) -> usize {
        self.phi.len()
    }

    pub fn num_signals(&self) -> usize {
        self.num_signals
    }

    pub fn phi(&self) -> &Matrix {
        &self.phi
    }
}

/// Weights `α` over signals and one posterior per signal. The weighted mean of
/// the posteriors is the prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecompositionFile", into = "DecompositionFile")]
pub struct ConvexDecomposition {
    weights: Vec<f64>,
    posteriors: Matrix,
    prior: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionFile {
    alpha: Vec<f64>,
    posteriors: Matrix,
}

impl TryFrom<DecompositionFile> for ConvexDecomposition {
    type Error = Error;

    fn try_from(f: DecompositionFile) -> Result<Self> {
        ConvexDecomposition::new(f.alpha, f.posteriors)
    }
}

impl From<ConvexDecomposition> for DecompositionFile {
    fn from(d: ConvexDecomposition) -> Self {
        DecompositionFile {
            alpha: d.weights,
            posteriors: d.posteriors,
        }
    }
}

impl ConvexDecomposition {
    /// Builds a decomposition whose prior is the weighted mean of the
    /// posteriors. Signals with weight below [`PRUNE_WEIGHT`] are dropped.
    pub fn new(weights: Vec<f64>, posteriors: Matrix) -> Result<Self> {
        let prior = Self::validate(&weights, &posteriors)?;
        Ok(Self::pruned(weights, posteriors, prior))
    }

    /// Builds a decomposition of a known prior, checking Bayes plausibility.
    pub fn with_prior(weights: Vec<f64>, posteriors: Matrix, prior: &[f64]) -> Result<Self> {
        let mean = Self::validate(&weights, &posteriors)?;
        if mean.len() != prior.len() {
            return Err(Error::Dimension(format!(
                "posteriors have length {}, prior {}",
                mean.len(),
                prior.len()
            )));
        }
        let deviation = max_deviation(&mean, prior);
        if deviation > CONSISTENCY_TOL {
            return Err(Error::InconsistentDecomposition { deviation });
        }
        Ok(Self::pruned(weights, posteriors, prior.to_vec()))
    }

    fn validate(weights: &[f64], posteriors: &Matrix) -> Result<Vec<f64>> {
        if weights.len() != posteriors.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} posteriors",
                weights.len(),
                posteriors.len()
            )));
        }
        check_distribution("signal weights", weights, CONSTRUCT_TOL)?;
        let m = posteriors[0].len();
        let mut mean = vec![0.0; m];
        for (w, x) in weights.iter().zip(posteriors) {
            if x.len() != m {
                return Err(Error::Dimension("posteriors differ in length".into()));
            }
            check_distribution("posterior", x, CONSTRUCT_TOL)?;
            for (acc, p) in mean.iter_mut().zip(x) {
                *acc += w * p;
            }
        }
        Ok(mean)
    }

    fn pruned(weights: Vec<f64>, posteriors: Matrix, prior: Vec<f64>) -> Self {
        let (weights, posteriors) = weights
            .into_iter()
            .zip(posteriors)
            .filter(|(w, _)| *w >= PRUNE_WEIGHT)
            .unzip();
        ConvexDecomposition {
            weights,
            posteriors,
            prior,
        }
    }

    pub fn num_signals(&self) -> usize {
        self.weights.len()
    }

    pub fn num_states(&self) -> usize {
        self.prior.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn posteriors(&self) -> &Matrix {
        &self.posteriors
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    /// Largest entrywise gap between `Σ α_σ x_σ` and the stored prior.
    pub fn plausibility_error(&self) -> f64 {
        let mut mean = vec![0.0; self.prior.len()];
        for (w, x) in self.weights.iter().zip(&self.posteriors) {
            for (acc, p) in mean.iter_mut().zip(x) {
                *acc += w * p;
            }
        }
        max_deviation(&mean, &self.prior)
    }

    pub fn check_prior(&self, prior: &[f64]) -> Result<()> {
        if prior.len() != self.prior.len() {
            return Err(Error::Dimension(format!(
                "decomposition over {} states, prior over {}",
                self.prior.len(),
                prior.len()
            )));
        }
        let deviation = max_deviation(&self.prior, prior).max(self.plausibility_error());
        if deviation > CONSISTENCY_TOL {
            return Err(Error::InconsistentDecomposition { deviation });
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.weights
            .iter()
            .copied()
            .zip(self.posteriors.iter().map(Vec::as_slice))
    }
}

fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `α_σ = Σ_θ π(θ)φ(θ,σ)` and `x_σ(θ) = π(θ)φ(θ,σ)/α_σ`.
pub fn scheme_to_decomposition(
    prior: &[f64],
    scheme: &SignalingScheme,
) -> Result<ConvexDecomposition> {
    check_distribution("prior", prior, CONSTRUCT_TOL)?;
    if scheme.num_states() != prior.len() {
        return Err(Error::Dimension(format!(
            "scheme has {} states, prior {}",
            scheme.num_states(),
            prior.len()
        )));
    }
    let mut weights = Vec::new();
    let mut posteriors = Vec::new();
    for sigma in 0..scheme.num_signals() {
        let joint: Vec<f64> = prior
            .iter()
            .zip(&scheme.phi)
            .map(|(p, row)| p * row[sigma])
            .collect();
        let alpha: f64 = joint.iter().sum();
        if alpha < PRUNE_WEIGHT {
            continue;
        }
        posteriors.push(joint.iter().map(|j| j / alpha).collect());
        weights.push(alpha);
    }
    Ok(ConvexDecomposition {
        weights,
        posteriors,
        prior: prior.to_vec(),
    })
}

/// Inverse map `φ(θ,σ) = α_σ x_σ(θ)/π(θ)`. States with zero prior get a
/// uniform row.
pub fn decomposition_to_scheme(
    prior: &[f64],
    dec: &ConvexDecomposition,
) -> Result<SignalingScheme> {
    check_distribution("prior", prior, CONSTRUCT_TOL)?;
    dec.check_prior(prior)?;
    let signals = dec.num_signals();
    let phi = prior
        .iter()
        .enumerate()
        .map(|(theta, &p)| {
            if p <= 0.0 {
                return vec![1.0 / signals as f64; signals];
            }
            let mut row: Vec<f64> = dec
                .iter()
                .map(|(alpha, x)| (alpha * x[theta] / p).max(0.0))
                .collect();
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.iter_mut().for_each(|v| *v /= total);
            } else {
                row.fill(1.0 / signals as f64);
            }
            row
        })
        .collect();
    SignalingScheme::new(phi)
}

/// Runs `a` with probability `weight` and `b` otherwise. The signal set of the
/// result is `a`'s signals followed by `b`'s.
pub fn mix_schemes(
    a: &SignalingScheme,
    b: &SignalingScheme,
    weight: f64,
) -> Result<SignalingScheme> {
    if a.num_states() != b.num_states() {
        return Err(Error::Dimension(format!(
            "schemes over {} and {} states",
            a.num_states(),
            b.num_states()
        )));
    }
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::InvalidParameter(format!(
            "mixing weight {weight} outside [0, 1]"
        )));
    }
    let phi = a
        .phi
        .iter()
        .zip(&b.phi)
        .map(|(ra, rb)| {
            ra.iter()
                .map(|v| weight * v)
                .chain(rb.iter().map(|v| (1.0 - weight) * v))
                .collect()
        })
        .collect();
    SignalingScheme::new(phi)
}

/// Shrinks a decomposition to at most `M + 1` signals without changing the
/// value `Σ α_σ f_σ`, where `values[σ]` is the subgame value of signal `σ`.
///
/// Repeatedly moves the weights along a null vector of the matrix stacking
/// the posteriors and the value row until a weight reaches zero.
pub fn reduce_signals(
    dec: &ConvexDecomposition,
    values: &[f64],
) -> Result<(ConvexDecomposition, Vec<f64>)> {
    if values.len() != dec.num_signals() {
        return Err(Error::Dimension(format!(
            "{} values for {} signals",
            values.len(),
            dec.num_signals()
        )));
    }
    let m = dec.num_states();
    let mut weights = dec.weights.clone();
    let mut posteriors = dec.posteriors.clone();
    let mut values = values.to_vec();

    while weights.len() > m + 1 {
        // Any m + 2 columns of the (m + 1)-row system are linearly dependent.
        let cols: Vec<usize> = (0..m + 2).collect();
        let system: Vec<Vec<f64>> = (0..=m)
            .map(|row| {
                cols.iter()
                    .map(|&c| {
                        if row < m {
                            posteriors[c][row]
                        } else {
                            values[c]
                        }
                    })
                    .collect()
            })
            .collect();
        let delta = null_vector(system);
        // Step t along -delta until the first weight with delta > 0 hits zero.
        let mut step = f64::INFINITY;
        let mut drop = 0;
        for (k, &c) in cols.iter().enumerate() {
            if delta[k] > 1e-14 {
                let t = weights[c] / delta[k];
                if t < step {
                    step = t;
                    drop = c;
                }
            }
        }
        for (k, &c) in cols.iter().enumerate() {
            weights[c] -= step * delta[k];
            if weights[c] < 0.0 {
                weights[c] = 0.0;
            }
        }
        weights[drop] = 0.0;
        let keep: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        weights = keep.iter().map(|&i| weights[i]).collect();
        posteriors = keep.iter().map(|&i| posteriors[i].clone()).collect();
        values = keep.iter().map(|&i| values[i]).collect();
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok((
        ConvexDecomposition {
            weights,
            posteriors,
            prior: dec.prior.clone(),
        },
        values,
    ))
}

/// A nonzero vector in the kernel of a wide `r × (r + 1)` system, normalized
/// so that its largest entry is positive.
fn null_vector(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let rows = a.len();
    let cols = a[0].len();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, mag) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if mag < 1e-12 {
            continue;
        }
        a.swap(r, best);
        let p = a[r][c];
        a[r].iter_mut().for_each(|v| *v /= p);
        for i in 0..rows {
            if i != r {
                let f = a[i][c];
                if f != 0.0 {
                    for j in 0..cols {
                        a[i][j] -= f * a[r][j];
                    }
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let free = (0..cols)
        .find(|c| !pivot_cols.contains(c))
        .unwrap_or(cols - 1);
    let mut v = vec![0.0; cols];
    v[free] = 1.0;
    for (i, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = -a[i][free];
    }
    let (imax, _) = v
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .unwrap();
    if v[imax] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn assert_vec(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_abs_diff_eq!(x, y, epsilon = tol);
        }
    }

    #[test]
    fn full_revelation_decomposition() {
        let d = scheme_to_decomposition(&[0.5, 0.5], &SignalingScheme::full_revelation(2)).unwrap();
        assert_vec(d.weights(), &[0.5, 0.5], 1e-15);
        assert_vec(&d.posteriors()[0], &[1.0, 0.0], 1e-15);
        assert_vec(&d.posteriors()[1], &[0.0, 1.0], 1e-15);
    }

    #[test]
    fn opaque_decomposition() {
        let d = scheme_to_decomposition(&[0.5, 0.5], &SignalingScheme::opaque(2)).unwrap();
        assert_vec(d.weights(), &[1.0], 1e-15);
        assert_vec(&d.posteriors()[0], &[0.5, 0.5], 1e-15);
    }

    #[test]
    fn direct_formula() {
        let s = SignalingScheme::new(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        let d = scheme_to_decomposition(&[0.5, 0.5], &s).unwrap();
        assert_vec(d.weights(), &[0.25, 0.75], 1e-15);
        assert_vec(&d.posteriors()[0], &[1.0, 0.0], 1e-15);
        assert_vec(&d.posteriors()[1], &[1.0 / 3.0, 2.0 / 3.0], 1e-15);
        let back = decomposition_to_scheme(&[0.5, 0.5], &d).unwrap();
        for (r, e) in back.phi().iter().zip(s.phi()) {
            assert_vec(r, e, 1e-9);
        }
    }

    #[test]
    fn inverse_map_examples() {
        let d = ConvexDecomposition::new(vec![1.0], vec![vec![0.3, 0.7]]).unwrap();
        let s = decomposition_to_scheme(&[0.3, 0.7], &d).unwrap();
        assert_eq!(s.phi(), &vec![vec![1.0], vec![1.0]]);

        let d =
            ConvexDecomposition::new(vec![0.5, 0.5], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = decomposition_to_scheme(&[0.5, 0.5], &d).unwrap();
        assert_eq!(s, SignalingScheme::full_revelation(2));
    }

    #[test]
    fn zero_prior_state_gets_uniform_row() {
        let d = ConvexDecomposition::new(
            vec![0.5, 0.5],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        )
        .unwrap();
        let s = decomposition_to_scheme(&[0.5, 0.5, 0.0], &d).unwrap();
        assert_vec(&s.phi()[2], &[0.5, 0.5], 0.0);
    }

    #[test]
    fn inconsistent_decomposition_rejected() {
        let d = ConvexDecomposition::new(vec![1.0], vec![vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            decomposition_to_scheme(&[0.6, 0.4], &d),
            Err(Error::InconsistentDecomposition { .. })
        ));
        assert!(
            ConvexDecomposition::with_prior(vec![1.0], vec![vec![0.5, 0.5]], &[0.6, 0.4]).is_err()
        );
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            scheme_to_decomposition(&[0.5, 0.6], &SignalingScheme::opaque(2)),
            Err(Error::InvalidDistribution { .. })
        ));
        assert!(matches!(
            scheme_to_decomposition(&[1.0], &SignalingScheme::opaque(2)),
            Err(Error::Dimension(_))
        ));
        assert!(SignalingScheme::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(BayesianZeroSumGame::new(
            vec![vec![vec![1.0]], vec![vec![1.0, 2.0]]],
            vec![0.5, 0.5]
        )
        .is_err());
        assert!(BayesianZeroSumGame::new(vec![vec![vec![f64::NAN]]], vec![1.0]).is_err());
    }

    #[test]
    fn zero_weight_signals_dropped() {
        let s = SignalingScheme::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let d = scheme_to_decomposition(&[0.5, 0.5], &s).unwrap();
        assert_eq!(d.num_signals(), 2);
        let d =
            ConvexDecomposition::new(vec![1.0, 0.0], vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        assert_eq!(d.num_signals(), 1);
    }

    #[test]
    fn expected_matrix_examples() {
        let g = BayesianZeroSumGame::new(vec![vec![vec![1.0]], vec![vec![-1.0]]], vec![0.5, 0.5])
            .unwrap();
        assert_eq!(expected_matrix(&g, &[1.0, 0.0]).unwrap(), vec![vec![1.0]]);
        assert_eq!(expected_matrix(&g, &[0.5, 0.5]).unwrap(), vec![vec![0.0]]);

        let g = BayesianZeroSumGame::new(
            vec![vec![vec![2.0, 0.0]], vec![vec![0.0, 2.0]]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let e = expected_matrix(&g, &[0.25, 0.75]).unwrap();
        assert_vec(&e[0], &[0.5, 1.5], 1e-15);
        assert!(expected_matrix(&g, &[1.0]).is_err());
    }

    #[test]
    fn mix_endpoints() {
        let a = SignalingScheme::full_revelation(2);
        let b = SignalingScheme::opaque(2);
        let m = mix_schemes(&a, &b, 1.0).unwrap();
        assert_eq!(m.phi(), &vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let m = mix_schemes(&a, &b, 0.0).unwrap();
        assert_eq!(m.phi(), &vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]]);
        assert!(mix_schemes(&a, &SignalingScheme::opaque(3), 0.5).is_err());
        assert!(mix_schemes(&a, &b, 1.5).is_err());
    }

    #[test]
    fn json_layouts() {
        let s = SignalingScheme::new(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"M":2,"signals":2,"phi":[0.5,0.5,0.0,1.0]}"#);
        let nested: SignalingScheme =
            serde_json::from_str(r#"{"M":2,"signals":2,"phi":[[0.5,0.5],[0.0,1.0]]}"#).unwrap();
        assert_eq!(nested, s);

        let g: BayesianZeroSumGame = serde_json::from_str(
            r#"{"r":1,"c":2,"M":2,"prior":[0.5,0.5],"payoffs":[[[2,0]],[[0,2]]]}"#,
        )
        .unwrap();
        assert_eq!(g.num_col_strategies(), 2);
        assert!(serde_json::from_str::<BayesianZeroSumGame>(
            r#"{"r":2,"c":2,"M":2,"prior":[0.5,0.5],"payoffs":[[[2,0]],[[0,2]]]}"#
        )
        .is_err());

        let d: ConvexDecomposition =
            serde_json::from_str(r#"{"alpha":[0.5,0.5],"posteriors":[[1,0],[0,1]]}"#).unwrap();
        assert_vec(d.prior(), &[0.5, 0.5], 0.0);
    }

    #[test]
    fn reduce_signals_keeps_value_and_prior() {
        // Five posteriors over two states collapse to at most three.
        let post = vec![
            vec![0.1, 0.9],
            vec![0.3, 0.7],
            vec![0.5, 0.5],
            vec![0.7, 0.3],
            vec![0.9, 0.1],
        ];
        let d = ConvexDecomposition::new(vec![0.2; 5], post).unwrap();
        let values = vec![0.3, -0.1, 0.8, 0.2, 0.5];
        let before: f64 = d.weights().iter().zip(&values).map(|(a, f)| a * f).sum();
        let (r, rv) = reduce_signals(&d, &values).unwrap();
        assert!(r.num_signals() <= 3);
        let after: f64 = r.weights().iter().zip(&rv).map(|(a, f)| a * f).sum();
        assert_abs_diff_eq!(before, after, epsilon = 1e-12);
        assert!(r.plausibility_error() < 1e-12);
    }

    fn arb_prior_scheme() -> impl Strategy<Value = (Vec<f64>, Matrix)> {
        (2usize..6, 1usize..6).prop_flat_map(|(m, s)| {
            (
                prop::collection::vec(0.05f64..1.0, m),
                prop::collection::vec(prop::collection::vec(0.0f64..1.0, s), m),
            )
        })
    }

    fn normalize(v: &mut [f64]) {
        let t: f64 = v.iter().sum();
        if t <= 0.0 {
            v.fill(1.0 / v.len() as f64);
        } else {
            v.iter_mut().for_each(|x| *x /= t);
        }
    }

    proptest! {
        #[test]
        fn round_trip((mut prior, mut phi) in arb_prior_scheme()) {
            normalize(&mut prior);
            phi.iter_mut().for_each(|r| normalize(r));
            let scheme = SignalingScheme::new(phi).unwrap();
            let dec = scheme_to_decomposition(&prior, &scheme).unwrap();
            prop_assert!(dec.plausibility_error() <= CONSISTENCY_TOL);
            let back = decomposition_to_scheme(&prior, &dec).unwrap();
            // Zero-weight signals vanish in the round trip; compare the rest.
            let kept: Vec<usize> = (0..scheme.num_signals())
                .filter(|&s| prior.iter().zip(scheme.phi()).map(|(p, r)| p * r[s]).sum::<f64>() >= PRUNE_WEIGHT)
                .collect();
            for (theta, row) in back.phi().iter().enumerate() {
                for (k, &s) in kept.iter().enumerate() {
                    prop_assert!((row[k] - scheme.phi()[theta][s]).abs() <= CONSISTENCY_TOL);
                }
            }
        }
    }
}
