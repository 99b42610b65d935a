//! Random measures centered at the empirical distribution.
//!
//! [`gen_rmeasure`] keeps a random subset of atoms and puts symmetric
//! Dirichlet weights on it, with the Dirichlet concentration chosen so each
//! weight has a requested coefficient of variation around its mean `1/N0`.
//!
//! Draw order inside [`gen_rmeasure`] is fixed: the retention probability
//! `theta`, then the binomial size `S`, then the subset, then `N0` gamma
//! variates. With `fixed_subset_size` set, `theta` and `S` are not drawn.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::seq::index;
use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma};

use crate::error::{Error, Result};
use crate::matrix::ReferenceSet;

/// Number of fresh gamma batches tried before giving up on an all-zero draw.
const MAX_GAMMA_REDRAWS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomMeasureParams {
    /// Target coefficient of variation of each weight.
    pub cv: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Minimum fraction of atoms retained.
    pub floor_frac: f64,
    /// Skip the randomized size rule and keep exactly this many atoms.
    pub fixed_subset_size: Option<usize>,
}

impl Default for RandomMeasureParams {
    fn default() -> Self {
        Self {
            cv: 0.4,
            theta_lo: 0.7,
            theta_hi: 0.9,
            floor_frac: 0.6,
            fixed_subset_size: None,
        }
    }
}

impl RandomMeasureParams {
    pub fn with_cv(cv: f64) -> Self {
        Self {
            cv,
            ..Self::default()
        }
    }

    /// Dir(1, ..., 1) on all `n` atoms.
    pub fn bayesian_bootstrap(n: usize) -> Self {
        Self {
            cv: ((n as f64 - 1.0) / (n as f64 + 1.0)).sqrt(),
            fixed_subset_size: Some(n),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.cv > 0.0
            && self.cv.is_finite()
            && self.theta_lo > 0.0
            && self.theta_lo <= self.theta_hi
            && self.theta_hi <= 1.0
            && self.floor_frac > 0.0
            && self.floor_frac <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "random measure parameters out of range: {self:?}"
            )))
        }
    }
}

/// Subset of atoms with normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomMeasure {
    /// Ascending, distinct atom indices.
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    /// Total Dirichlet concentration.
    pub kappa: f64,
    /// Per-component Dirichlet parameter `kappa / N0`.
    pub alpha: f64,
    pub cv: f64,
}

impl RandomMeasure {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Mass assigned to the atoms for which `member` returns true.
    pub fn mass_where(&self, mut member: impl FnMut(usize) -> bool) -> f64 {
        self.indices
            .iter()
            .zip(&self.weights)
            .filter(|(&m, _)| member(m))
            .map(|(_, &w)| w)
            .sum()
    }

    /// Text form: a `# n0=.. kappa=.. alpha=.. cv=.. seed=..` header followed
    /// by one `index,weight` line per atom, weights to 17 significant digits.
    pub fn write_text<W: Write>(&self, mut out: W, seed: u64) -> Result<()> {
        let mut s = String::with_capacity(32 * (self.len() + 1));
        writeln!(
            s,
            "# n0={} kappa={:?} alpha={:?} cv={:?} seed={}",
            self.len(),
            self.kappa,
            self.alpha,
            self.cv,
            seed
        )
        .unwrap();
        for (&m, &w) in self.indices.iter().zip(&self.weights) {
            writeln!(s, "{m},{w:.16e}").unwrap();
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }

    /// Parses the text form. Returns the measure and the recorded seed.
    pub fn read_text<R: BufRead>(input: R) -> Result<(RandomMeasure, Option<u64>)> {
        let mut header: Option<(usize, f64, f64, f64, Option<u64>)> = None;
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = k + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                header = Some(parse_header(rest, lineno)?);
                continue;
            }
            let (idx, w) = trimmed.split_once(',').ok_or_else(|| Error::Parse {
                line: lineno,
                column: 1,
                message: "expected `index,weight`".into(),
            })?;
            let idx: usize = idx.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                column: 1,
                message: format!("bad index `{idx}`"),
            })?;
            let w: f64 = w.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                column: 2,
                message: format!("bad weight `{w}`"),
            })?;
            indices.push(idx);
            weights.push(w);
        }
        let (n0, kappa, alpha, cv, seed) = header.ok_or_else(|| Error::Parse {
            line: 1,
            column: 1,
            message: "missing `# n0=...` header".into(),
        })?;
        if n0 != indices.len() {
            return Err(Error::DimensionMismatch {
                what: "random measure atom count",
                expected: n0,
                found: indices.len(),
            });
        }
        crate::geometry::validate_weights(&weights, n0)?;
        Ok((
            RandomMeasure {
                indices,
                weights,
                kappa,
                alpha,
                cv,
            },
            seed,
        ))
    }
}

fn parse_header(rest: &str, line: usize) -> Result<(usize, f64, f64, f64, Option<u64>)> {
    let mut n0 = None;
    let mut kappa = f64::NAN;
    let mut alpha = f64::NAN;
    let mut cv = f64::NAN;
    let mut seed = None;
    let bad = |key: &str| Error::Parse {
        line,
        column: 1,
        message: format!("bad header field `{key}`"),
    };
    for field in rest.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| bad(field))?;
        match key {
            "n0" => n0 = Some(value.parse().map_err(|_| bad(key))?),
            "kappa" => kappa = value.parse().map_err(|_| bad(key))?,
            "alpha" => alpha = value.parse().map_err(|_| bad(key))?,
            "cv" => cv = value.parse().map_err(|_| bad(key))?,
            "seed" => seed = Some(value.parse().map_err(|_| bad(key))?),
            _ => {}
        }
    }
    Ok((n0.ok_or_else(|| bad("n0"))?, kappa, alpha, cv, seed))
}

/// Retained subset size `N0 = max(ceil(floor_frac N), S)` with
/// `S ~ Binomial(N, theta)` and `theta ~ Unif(theta_lo, theta_hi)`.
pub fn draw_subset_size<R: Rng + ?Sized>(
    n: usize,
    params: &RandomMeasureParams,
    rng: &mut R,
) -> Result<usize> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 atoms to build a random measure, got {n}"
        )));
    }
    params.validate()?;
    if let Some(fixed) = params.fixed_subset_size {
        return Ok(fixed.clamp(2, n));
    }
    let u: f64 = rng.random();
    let theta = params.theta_lo + (params.theta_hi - params.theta_lo) * u;
    let s = Binomial::new(n as u64, theta)
        .map_err(|e| Error::Sampling(format!("binomial: {e}")))?
        .sample(rng) as usize;
    Ok(subset_size_rule(n, params.floor_frac, s))
}

/// `max(ceil(floor_frac N), S)`, never below 2 and never above `N`.
pub fn subset_size_rule(n: usize, floor_frac: f64, s: usize) -> usize {
    let floor = (floor_frac * n as f64).ceil() as usize;
    floor.max(s).clamp(2.min(n), n)
}

/// `n0` distinct indices from `0..n`, uniform over subsets, sorted ascending.
pub fn sample_subset<R: Rng + ?Sized>(n: usize, n0: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n0 > n {
        return Err(Error::InvalidParameter(format!(
            "cannot keep {n0} of {n} atoms"
        )));
    }
    let mut picked = index::sample(rng, n, n0).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Inverts `CV = sqrt((N0 - 1) / (kappa + 1))`; returns `(kappa, alpha)`.
pub fn calibrate_concentration(n0: usize, cv: f64) -> Result<(f64, f64)> {
    if n0 < 2 {
        return Err(Error::InvalidParameter(format!(
            "CV calibration needs at least 2 atoms, got {n0}"
        )));
    }
    let bound = ((n0 - 1) as f64).sqrt();
    if !(cv > 0.0) || cv >= bound || !cv.is_finite() {
        return Err(Error::InfeasibleCv { cv, n0, bound });
    }
    let kappa = (n0 - 1) as f64 / (cv * cv) - 1.0;
    if !(kappa > 0.0) {
        return Err(Error::InfeasibleCv { cv, n0, bound });
    }
    Ok((kappa, kappa / n0 as f64))
}

/// Coefficient of variation of a symmetric Dirichlet weight.
pub fn concentration_cv(n0: usize, kappa: f64) -> f64 {
    (((n0 - 1) as f64) / (kappa + 1.0)).sqrt()
}

/// Dir(alpha, ..., alpha) via normalized Gamma(alpha, 1) draws.
pub fn draw_symmetric_dirichlet<R: Rng + ?Sized>(
    n0: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n0 == 0 {
        return Err(Error::InvalidParameter("empty Dirichlet".into()));
    }
    let gamma = Gamma::new(alpha, 1.0)
        .map_err(|e| Error::InvalidParameter(format!("gamma shape {alpha}: {e}")))?;
    for _ in 0..MAX_GAMMA_REDRAWS {
        let h: Vec<f64> = (0..n0).map(|_| gamma.sample(rng)).collect();
        let total: f64 = h.iter().sum();
        if total > 0.0 && total.is_finite() {
            return Ok(h.into_iter().map(|v| v / total).collect());
        }
    }
    Err(Error::Sampling(format!(
        "all {n0} gamma variates with shape {alpha} were zero in {MAX_GAMMA_REDRAWS} attempts"
    )))
}

/// Subset, calibrate and weight in one draw.
pub fn gen_rmeasure<R: Rng + ?Sized>(
    reference: &ReferenceSet,
    params: &RandomMeasureParams,
    rng: &mut R,
) -> Result<RandomMeasure> {
    let n = reference.len();
    let n0 = draw_subset_size(n, params, rng)?;
    let indices = sample_subset(n, n0, rng)?;
    let (kappa, alpha) = calibrate_concentration(n0, params.cv)?;
    let weights = draw_symmetric_dirichlet(n0, alpha, rng)?;
    Ok(RandomMeasure {
        indices,
        weights,
        kappa,
        alpha,
        cv: params.cv,
    })
}

/// Truncated stick-breaking weights with `Beta(1, concentration)` breaks; the
/// last atom takes whatever stick remains.
pub fn sample_stick_breaking<R: Rng + ?Sized>(
    n_atoms: usize,
    concentration: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n_atoms == 0 {
        return Err(Error::InvalidParameter("need at least one atom".into()));
    }
    let beta = Beta::new(1.0, concentration)
        .map_err(|e| Error::InvalidParameter(format!("concentration {concentration}: {e}")))?;
    let mut weights = Vec::with_capacity(n_atoms);
    let mut remaining = 1.0;
    for _ in 0..n_atoms - 1 {
        let v: f64 = beta.sample(rng);
        let piece = remaining * v;
        weights.push(piece);
        remaining -= piece;
    }
    weights.push(remaining.max(0.0));
    Ok(weights)
}

/// Event `{y : normal . y <= offset}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    /// `{y : y[coord] <= threshold}` in dimension `dim`.
    pub fn coordinate(dim: usize, coord: usize, threshold: f64) -> Self {
        let mut normal = vec![0.0; dim];
        normal[coord] = 1.0;
        Self {
            normal,
            offset: threshold,
        }
    }

    pub fn whole_space(dim: usize) -> Self {
        Self {
            normal: vec![0.0; dim],
            offset: 0.0,
        }
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            normal: vec![0.0; dim],
            offset: -1.0,
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        crate::matrix::dot(&self.normal, y) <= self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenteringRow {
    /// Monte Carlo mean of the random measure's mass on the event.
    pub mean_random: f64,
    /// Empirical mass of the event.
    pub empirical: f64,
    pub std_error: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenteringReport {
    pub draws: usize,
    pub rows: Vec<CenteringRow>,
}

impl CenteringReport {
    pub fn fraction_within(&self, z_bound: f64) -> f64 {
        let ok = self.rows.iter().filter(|r| r.z.abs() < z_bound).count();
        ok as f64 / self.rows.len().max(1) as f64
    }
}

/// Compares the Monte Carlo mean mass of each event under repeated random
/// measures with its empirical mass.
pub fn estimate_centering_gap<R: Rng + ?Sized>(
    reference: &ReferenceSet,
    params: &RandomMeasureParams,
    n_draws: usize,
    events: &[HalfSpace],
    rng: &mut R,
) -> Result<CenteringReport> {
    if n_draws < 1000 {
        return Err(Error::InvalidParameter(format!(
            "centering check needs at least 1000 draws, got {n_draws}"
        )));
    }
    if let Some(e) = events.iter().find(|e| e.normal.len() != reference.dim()) {
        return Err(Error::DimensionMismatch {
            what: "event dimension",
            expected: reference.dim(),
            found: e.normal.len(),
        });
    }
    let n = reference.len();
    let membership: Vec<Vec<bool>> = events
        .iter()
        .map(|e| (0..n).map(|m| e.contains(reference.atom(m))).collect())
        .collect();

    let mut sum = vec![0.0; events.len()];
    let mut sum_sq = vec![0.0; events.len()];
    for _ in 0..n_draws {
        let measure = gen_rmeasure(reference, params, rng)?;
        for (k, inside) in membership.iter().enumerate() {
            let mass = measure.mass_where(|m| inside[m]);
            sum[k] += mass;
            sum_sq[k] += mass * mass;
        }
    }

    let draws = n_draws as f64;
    let rows = membership
        .iter()
        .enumerate()
        .map(|(k, inside)| {
            let empirical = inside.iter().filter(|&&b| b).count() as f64 / n as f64;
            let mean_random = sum[k] / draws;
            let var = ((sum_sq[k] - draws * mean_random * mean_random) / (draws - 1.0)).max(0.0);
            let std_error = (var / draws).sqrt();
            let gap = mean_random - empirical;
            let z = if std_error > 0.0 {
                gap / std_error
            } else if gap.abs() <= 1e-12 {
                0.0
            } else {
                gap.signum() * f64::INFINITY
            };
            CenteringRow {
                mean_random,
                empirical,
                std_error,
                z,
            }
        })
        .collect();
    Ok(CenteringReport {
        draws: n_draws,
        rows,
    })
}
