//! Power-law exponent estimation on rank-frequency data.
//!
//! Fits are ordinary least squares on `(log10 r, log10 f(r))`, one point per
//! rank, with `alpha = -slope`. No binning is applied, so the flat
//! low-frequency staircase contributes every one of its ranks; the bias this
//! introduces is visible in [`goodness_report`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freq::RankedDistribution;
use crate::scalar::Scalar;

pub const MIN_FIT_POINTS: usize = 10;
pub const MIN_BREAKPOINT_POINTS: usize = 30;
pub const MIN_SEGMENT_POINTS: usize = 10;
/// Improvement ratio below which reports flag a two-regime break.
pub const DEFAULT_BREAK_RATIO: f64 = 0.5;

/// Inclusive rank range `[r_min, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankWindow {
    pub r_min: usize,
    pub r_max: usize,
}

impl RankWindow {
    pub const DEFAULT: RankWindow = RankWindow { r_min: 10, r_max: 10_000 };

    pub fn new(r_min: usize, r_max: usize) -> Result<Self> {
        if r_min == 0 || r_min >= r_max {
            return Err(Error::InvalidWindow { r_min, r_max });
        }
        Ok(RankWindow { r_min, r_max })
    }

    pub fn contains(&self, rank: usize) -> bool {
        (self.r_min..=self.r_max).contains(&rank)
    }
}

impl Default for RankWindow {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit<F> {
    pub label: String,
    pub alpha: F,
    /// log10 amplitude: `log10 f(r) ≈ intercept - alpha * log10 r`.
    pub intercept: F,
    pub stderr_alpha: F,
    pub r_squared: F,
    pub window: RankWindow,
    pub n_points: usize,
}

impl<F: Scalar> ScalingFit<F> {
    /// Fitted log10 frequency at `rank`.
    pub fn predict_log10(&self, rank: usize) -> F {
        self.intercept - self.alpha * F::from_count(rank as u64).log10()
    }
}

/// Two independent line fits split at `breakpoint_rank`. The upper regime
/// starts at the breakpoint: ranks `< r*` are low, ranks `>= r*` are high.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFit<F> {
    pub label: String,
    pub window: RankWindow,
    pub breakpoint_rank: usize,
    pub alpha_low: F,
    pub alpha_high: F,
    pub intercept_low: F,
    pub intercept_high: F,
    pub n_low: usize,
    pub n_high: usize,
    /// Residual sum of squares of both segments together.
    pub sse: F,
    pub sse_single: F,
    /// `sse / sse_single`; 1 when the single line is already exact.
    pub improvement_ratio: F,
}

impl<F: Scalar> PiecewiseFit<F> {
    pub fn flags_break(&self, ratio_threshold: F) -> bool {
        self.improvement_ratio < ratio_threshold
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LineFit<F> {
    pub slope: F,
    pub intercept: F,
    pub sse: F,
    pub sst: F,
    pub sxx: F,
    pub n: usize,
}

/// Two-pass least squares on centered data.
pub(crate) fn ols<F: Scalar>(xs: &[F], ys: &[F]) -> LineFit<F> {
    let n = xs.len();
    let nf = F::from_count(n as u64);
    let mx = xs.iter().fold(F::zero(), |a, &x| a + x) / nf;
    let my = ys.iter().fold(F::zero(), |a, &y| a + y) / nf;
    let (mut sxx, mut sxy, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .fold(F::zero(), |a, v| a + v);
    LineFit { slope, intercept, sse, sst: syy, sxx, n }
}

struct LogPoints<F> {
    ranks: Vec<usize>,
    xs: Vec<F>,
    ys: Vec<F>,
}

fn log_points<F: Scalar>(dist: &RankedDistribution<F>, window: RankWindow, required: usize) -> Result<LogPoints<F>> {
    RankWindow::new(window.r_min, window.r_max)?;
    let pts = dist.window_points(window.r_min, window.r_max);
    if pts.len() < required {
        return Err(Error::InsufficientPoints { found: pts.len(), required });
    }
    let mut out = LogPoints { ranks: Vec::with_capacity(pts.len()), xs: Vec::new(), ys: Vec::new() };
    for p in pts {
        if !(p.frequency.is_finite() && p.frequency > F::zero()) {
            return Err(Error::Domain(format!("frequency at rank {} is not positive", p.rank)));
        }
        out.ranks.push(p.rank);
        out.xs.push(F::from_count(p.rank as u64).log10());
        out.ys.push(p.frequency.log10());
    }
    Ok(out)
}

fn scaling_fit<F: Scalar>(label: &str, window: RankWindow, line: &LineFit<F>) -> ScalingFit<F> {
    let r_squared = if line.sst > F::zero() {
        (F::one() - line.sse / line.sst).max(F::zero()).min(F::one())
    } else {
        F::zero()
    };
    let dof = F::from_count(line.n.saturating_sub(2) as u64);
    let stderr_alpha = (line.sse / dof / line.sxx).sqrt();
    ScalingFit {
        label: label.to_owned(),
        alpha: -line.slope,
        intercept: line.intercept,
        stderr_alpha,
        r_squared,
        window,
        n_points: line.n,
    }
}

/// Fits `f(r) ∝ r^(-alpha)` over the ranks of `dist` inside `window`.
pub fn fit_power_law<F: Scalar>(dist: &RankedDistribution<F>, window: RankWindow) -> Result<ScalingFit<F>> {
    let lp = log_points(dist, window, MIN_FIT_POINTS)?;
    let line = ols(&lp.xs, &lp.ys);
    Ok(scaling_fit(dist.label(), window, &line))
}

/// Running sums of centered coordinates for O(1) segment regressions.
struct PrefixSums<F> {
    x: Vec<F>,
    y: Vec<F>,
    xx: Vec<F>,
    xy: Vec<F>,
    yy: Vec<F>,
}

impl<F: Scalar> PrefixSums<F> {
    fn new(xs: &[F], ys: &[F]) -> Self {
        let n = F::from_count(xs.len() as u64);
        let mx = xs.iter().fold(F::zero(), |a, &v| a + v) / n;
        let my = ys.iter().fold(F::zero(), |a, &v| a + v) / n;
        let mut s = PrefixSums {
            x: vec![F::zero()],
            y: vec![F::zero()],
            xx: vec![F::zero()],
            xy: vec![F::zero()],
            yy: vec![F::zero()],
        };
        for (&x, &y) in xs.iter().zip(ys) {
            let (dx, dy) = (x - mx, y - my);
            let i = s.x.len() - 1;
            s.x.push(s.x[i] + dx);
            s.y.push(s.y[i] + dy);
            s.xx.push(s.xx[i] + dx * dx);
            s.xy.push(s.xy[i] + dx * dy);
            s.yy.push(s.yy[i] + dy * dy);
        }
        s
    }

    /// SSE of the least-squares line through points `lo..hi`.
    fn sse(&self, lo: usize, hi: usize) -> F {
        let n = F::from_count((hi - lo) as u64);
        let sx = self.x[hi] - self.x[lo];
        let sy = self.y[hi] - self.y[lo];
        let sxx = self.xx[hi] - self.xx[lo] - sx * sx / n;
        let sxy = self.xy[hi] - self.xy[lo] - sx * sy / n;
        let syy = self.yy[hi] - self.yy[lo] - sy * sy / n;
        if sxx <= F::zero() {
            return F::nan();
        }
        (syy - sxy * sxy / sxx).max(F::zero())
    }
}

/// Candidates re-scored with exact two-pass fits after the prefix-sum scan.
const REFINE_CANDIDATES: usize = 64;

/// Exhaustive two-segment fit. Every split leaving at least
/// [`MIN_SEGMENT_POINTS`] on each side is scored; the minimum total SSE wins,
/// with the lowest breakpoint rank winning exact ties. Segments are fitted
/// independently (no continuity at the breakpoint).
pub fn fit_breakpoint<F: Scalar>(dist: &RankedDistribution<F>, window: RankWindow) -> Result<PiecewiseFit<F>> {
    let lp = log_points(dist, window, MIN_BREAKPOINT_POINTS)?;
    let n = lp.xs.len();
    let sums = PrefixSums::new(&lp.xs, &lp.ys);

    let mut scored: Vec<(F, usize)> = (MIN_SEGMENT_POINTS..=n - MIN_SEGMENT_POINTS)
        .map(|k| (sums.sse(0, k) + sums.sse(k, n), k))
        .filter(|(s, _)| s.is_finite())
        .collect();
    if scored.is_empty() {
        return Err(Error::DegenerateBreakpoint);
    }
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));

    // Prefix sums lose a few ulps; settle near-ties with exact fits.
    let single = ols(&lp.xs, &lp.ys);
    let best_approx = scored[0].0;
    let slack = best_approx * F::from_f64_lossy(1e-6) + single.sst * F::epsilon() * F::from_f64_lossy(1e3);
    let mut best: Option<(F, usize, LineFit<F>, LineFit<F>)> = None;
    for &(_, k) in scored.iter().take_while(|(s, _)| *s <= best_approx + slack).take(REFINE_CANDIDATES) {
        let low = ols(&lp.xs[..k], &lp.ys[..k]);
        let high = ols(&lp.xs[k..], &lp.ys[k..]);
        let total = low.sse + high.sse;
        if !total.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((b, bk, _, _)) => total < *b || (total == *b && k < *bk),
        };
        if better {
            best = Some((total, k, low, high));
        }
    }
    let (sse, k, low, high) = best.ok_or(Error::DegenerateBreakpoint)?;

    let improvement_ratio = if single.sse <= single.sst * F::epsilon() * F::from_f64_lossy(1e3) {
        F::one()
    } else {
        sse / single.sse
    };
    Ok(PiecewiseFit {
        label: dist.label().to_owned(),
        window,
        breakpoint_rank: lp.ranks[k],
        alpha_low: -low.slope,
        alpha_high: -high.slope,
        intercept_low: low.intercept,
        intercept_high: high.intercept,
        n_low: low.n,
        n_high: high.n,
        sse,
        sse_single: single.sse,
        improvement_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecadeResidual<F> {
    /// First rank of the decade, a power of ten (clipped to the window).
    pub from_rank: usize,
    pub to_rank: usize,
    pub n_points: usize,
    pub mean_residual: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignRun {
    /// -1, 0 or 1.
    pub sign: i8,
    pub start_rank: usize,
    pub length: usize,
}

/// Residuals `log10 f(r) - fitted` summarized over a fit window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport<F> {
    pub label: String,
    pub window: RankWindow,
    pub n_points: usize,
    pub mean_abs_residual: F,
    pub max_abs_residual: F,
    pub decades: Vec<DecadeResidual<F>>,
    pub runs: Vec<SignRun>,
    pub longest_positive_run: usize,
    pub longest_negative_run: usize,
}

impl<F> GoodnessReport<F> {
    pub fn run_count(&self) -> usize {
        self.runs.len()
    }
}

/// Residual diagnostics for `fit` against the distribution it came from.
pub fn goodness_report<F: Scalar>(fit: &ScalingFit<F>, dist: &RankedDistribution<F>) -> Result<GoodnessReport<F>> {
    let lp = log_points(dist, fit.window, MIN_FIT_POINTS)?;
    if lp.xs.len() != fit.n_points {
        return Err(Error::MismatchedFit(format!(
            "fit used {} points, distribution has {} in window",
            fit.n_points,
            lp.xs.len()
        )));
    }
    let check = ols(&lp.xs, &lp.ys);
    let tol = F::epsilon().sqrt() * F::one().max(fit.alpha.abs());
    if (-check.slope - fit.alpha).abs() > tol || (check.intercept - fit.intercept).abs() > tol {
        return Err(Error::MismatchedFit("alpha or intercept differ from a refit".into()));
    }

    let residuals: Vec<F> =
        lp.xs.iter().zip(&lp.ys).map(|(&x, &y)| y - (fit.intercept - fit.alpha * x)).collect();
    let nf = F::from_count(residuals.len() as u64);
    let mean_abs = residuals.iter().fold(F::zero(), |a, r| a + r.abs()) / nf;
    let max_abs = residuals.iter().fold(F::zero(), |a, r| a.max(r.abs()));

    let mut decades: Vec<DecadeResidual<F>> = Vec::new();
    let mut sums: Vec<F> = Vec::new();
    for (&rank, &res) in lp.ranks.iter().zip(&residuals) {
        let start = decade_start(rank);
        match decades.last_mut() {
            Some(d) if decade_start(d.from_rank) == start => {
                d.to_rank = rank;
                d.n_points += 1;
                *sums.last_mut().expect("parallel to decades") = *sums.last().expect("nonempty") + res;
            }
            _ => {
                decades.push(DecadeResidual { from_rank: rank, to_rank: rank, n_points: 1, mean_residual: F::zero() });
                sums.push(res);
            }
        }
    }
    for (d, s) in decades.iter_mut().zip(sums) {
        d.mean_residual = s / F::from_count(d.n_points as u64);
    }

    let mut runs: Vec<SignRun> = Vec::new();
    for (&rank, (&res, &y)) in lp.ranks.iter().zip(residuals.iter().zip(&lp.ys)) {
        let zero_band = F::epsilon() * F::from_f64_lossy(64.0) * F::one().max(y.abs());
        let sign = if res > zero_band {
            1
        } else if res < -zero_band {
            -1
        } else {
            0
        };
        match runs.last_mut() {
            Some(r) if r.sign == sign => r.length += 1,
            _ => runs.push(SignRun { sign, start_rank: rank, length: 1 }),
        }
    }
    let longest = |s: i8| runs.iter().filter(|r| r.sign == s).map(|r| r.length).max().unwrap_or(0);

    Ok(GoodnessReport {
        label: fit.label.clone(),
        window: fit.window,
        n_points: residuals.len(),
        mean_abs_residual: mean_abs,
        max_abs_residual: max_abs,
        longest_positive_run: longest(1),
        longest_negative_run: longest(-1),
        decades,
        runs,
    })
}

fn decade_start(rank: usize) -> usize {
    let mut d = 1;
    while d * 10 <= rank {
        d *= 10;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_law(c: f64, alpha: f64, n: usize) -> RankedDistribution<f64> {
        let f: Vec<f64> = (1..=n).map(|r| c * (r as f64).powf(-alpha)).collect();
        RankedDistribution::from_frequencies("pl", &f, false).unwrap()
    }

    #[test]
    fn exact_unit_power_law() {
        let fit = fit_power_law(&power_law(1000.0, 1.0, 1000), RankWindow::new(1, 1000).unwrap()).unwrap();
        assert!((fit.alpha - 1.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-9);
        assert_eq!(fit.n_points, 1000);
    }

    #[test]
    fn exact_polish_exponent_in_default_window() {
        let fit = fit_power_law(&power_law(500.0, 0.90, 10_000), RankWindow::DEFAULT).unwrap();
        assert!((fit.alpha - 0.90).abs() < 1e-9);
        assert_eq!(fit.n_points, 9_991);
    }

    #[test]
    fn f32_fits_too() {
        let f: Vec<f32> = (1..=200).map(|r| 50.0 * (r as f32).powf(-1.2)).collect();
        let d = RankedDistribution::from_frequencies("f32", &f, false).unwrap();
        let fit = fit_power_law(&d, RankWindow::new(1, 200).unwrap()).unwrap();
        assert!((fit.alpha - 1.2).abs() < 1e-4);
    }

    #[test]
    fn window_errors() {
        assert!(RankWindow::new(0, 5).is_err());
        assert!(RankWindow::new(5, 5).is_err());
        let d = power_law(10.0, 1.0, 15);
        assert!(matches!(
            fit_power_law(&d, RankWindow::new(10, 100).unwrap()),
            Err(Error::InsufficientPoints { found: 6, required: 10 })
        ));
        assert!(fit_power_law(&d, RankWindow::new(1, 100).unwrap()).is_ok());
    }

    #[test]
    fn flat_window_has_zero_r_squared() {
        let d = RankedDistribution::<f64>::from_frequencies("flat", &[1.0; 20], false).unwrap();
        let fit = fit_power_law(&d, RankWindow::new(1, 20).unwrap()).unwrap();
        assert_eq!(fit.alpha, 0.0);
        assert_eq!(fit.r_squared, 0.0);
    }

    #[test]
    fn breakpoint_needs_thirty_points() {
        let d = power_law(100.0, 1.0, 29);
        assert!(matches!(
            fit_breakpoint(&d, RankWindow::new(1, 29).unwrap()),
            Err(Error::InsufficientPoints { required: 30, .. })
        ));
    }

    #[test]
    fn exact_single_law_has_unit_ratio() {
        let p = fit_breakpoint(&power_law(1e4, 1.1, 500), RankWindow::new(1, 500).unwrap()).unwrap();
        assert_eq!(p.improvement_ratio, 1.0);
        assert!(!p.flags_break(DEFAULT_BREAK_RATIO));
        assert!(p.breakpoint_rank > 1 && p.breakpoint_rank < 500);
    }

    #[test]
    fn goodness_on_exact_law() {
        let d = power_law(1e5, 1.0, 2000);
        let fit = fit_power_law(&d, RankWindow::new(1, 2000).unwrap()).unwrap();
        let g = goodness_report(&fit, &d).unwrap();
        assert!(g.max_abs_residual < 1e-9);
        assert!(g.max_abs_residual >= g.mean_abs_residual);
        assert_eq!(
            g.decades.iter().map(|d| (d.from_rank, d.to_rank, d.n_points)).collect::<Vec<_>>(),
            [(1, 9, 9), (10, 99, 90), (100, 999, 900), (1000, 2000, 1001)]
        );
    }

    #[test]
    fn goodness_rejects_foreign_fit() {
        let a = power_law(1e5, 1.0, 2000);
        let b = power_law(1e5, 1.3, 2000);
        let fit = fit_power_law(&a, RankWindow::new(1, 2000).unwrap()).unwrap();
        assert!(matches!(goodness_report(&fit, &b), Err(Error::MismatchedFit(_))));
        let short = power_law(1e5, 1.0, 1500);
        assert!(matches!(goodness_report(&fit, &short), Err(Error::MismatchedFit(_))));
    }
}
