//! Lattice random-walk approximation of the process: endpoint histograms,
//! occupation-band local-time estimates, first-passage samples, and
//! killed-path runs. Serves as the independent Monte Carlo oracle for every
//! analytic kernel.
//!
//! The walk lives on sites k/sqrt(n): from a positive site it steps up with
//! probability (1 + m1/sqrt(n))/2, from a negative site with
//! (1 + m2/sqrt(n))/2, and from the origin with probability p (the drift at
//! the single site 0 has no scaling-limit effect). Per-path generators are
//! derived from (seed, path index), so results are identical under any
//! degree of parallelism.

use std::io::Write;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::model::DriftParams;

/// Lattice resolution, path count, seed, and local-time bandwidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    /// Lattice steps per unit of time (n); the site spacing is 1/sqrt(n).
    pub steps_per_unit_time: u32,
    /// Number of independent paths.
    pub paths: usize,
    /// Master seed; path i uses stream i of a ChaCha generator keyed by it.
    pub seed: u64,
    /// Occupation-band exponent: the band half-width is n^(-band_exponent).
    pub band_exponent: f64,
}

impl WalkConfig {
    pub fn new(steps_per_unit_time: u32, paths: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            steps_per_unit_time,
            paths,
            seed,
            band_exponent: 0.25,
        };
        cfg.validate_shape()?;
        Ok(cfg)
    }

    pub fn with_band_exponent(mut self, band_exponent: f64) -> Result<Self> {
        self.band_exponent = band_exponent;
        self.validate_shape()?;
        Ok(self)
    }

    fn validate_shape(&self) -> Result<()> {
        if self.steps_per_unit_time == 0 {
            return Err(invalid("steps_per_unit_time must be positive"));
        }
        if self.paths == 0 {
            return Err(invalid("paths must be >= 1"));
        }
        if !(self.band_exponent > 0.0 && self.band_exponent < 0.5) {
            return Err(invalid(format!(
                "band_exponent must lie in (0, 1/2), got {}",
                self.band_exponent
            )));
        }
        Ok(())
    }

    /// Step probabilities (1 +- m/sqrt(n))/2 must stay in (0,1) with margin:
    /// n > 4 max(m1^2, m2^2).
    pub fn validate_against(&self, params: &DriftParams) -> Result<()> {
        self.validate_shape()?;
        let n = f64::from(self.steps_per_unit_time);
        let m_sq = params.m_sup() * params.m_sup();
        if n <= 4.0 * m_sq {
            return Err(invalid(format!(
                "steps_per_unit_time {} too small for drift magnitude {}: need n > {}",
                self.steps_per_unit_time,
                params.m_sup(),
                4.0 * m_sq
            )));
        }
        Ok(())
    }

    fn band_sites(&self) -> i64 {
        let n = f64::from(self.steps_per_unit_time);
        n.powf(0.5 - self.band_exponent).floor() as i64
    }

    fn epsilon(&self) -> f64 {
        f64::from(self.steps_per_unit_time).powf(-self.band_exponent)
    }
}

/// Per-path outcome of a walk run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    /// Final position (the absorption site for killed, absorbed paths).
    pub endpoint: f64,
    /// Occupation-band estimate of the local time at 0 over [0, t].
    pub local_time: f64,
    /// Time of the first visit to site 0 strictly after time 0, if any.
    pub first_hit_time: Option<f64>,
    /// Whether a killed run was absorbed at 0 before time t.
    pub absorbed: bool,
}

/// Binned distribution estimate with per-bin masses and binomial standard
/// errors. Masses sum to at most 1 (killed runs are sub-probability).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDensity {
    pub bin_edges: Vec<f64>,
    pub mass: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl EmpiricalDensity {
    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn bin_width(&self, i: usize) -> f64 {
        self.bin_edges[i + 1] - self.bin_edges[i]
    }

    /// Per-bin estimate on density scale: mass / width.
    pub fn densities(&self) -> Vec<f64> {
        self.mass
            .iter()
            .enumerate()
            .map(|(i, m)| m / self.bin_width(i))
            .collect()
    }

    pub fn density_stderr(&self) -> Vec<f64> {
        self.stderr
            .iter()
            .enumerate()
            .map(|(i, s)| s / self.bin_width(i))
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// 2D histogram over (endpoint, local time), density-normalized per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct JointHistogram {
    pub x_edges: Vec<f64>,
    pub l_edges: Vec<f64>,
    /// Row-major cell masses: mass[i * (l_edges.len()-1) + j].
    pub mass: Vec<f64>,
    pub stderr: Vec<f64>,
    pub paths: usize,
}

impl JointHistogram {
    fn cols(&self) -> usize {
        self.l_edges.len() - 1
    }

    pub fn cell_mass(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols() + j]
    }

    pub fn cell_density(&self, i: usize, j: usize) -> f64 {
        self.cell_mass(i, j) / self.cell_area(i, j)
    }

    pub fn cell_density_stderr(&self, i: usize, j: usize) -> f64 {
        self.stderr[i * self.cols() + j] / self.cell_area(i, j)
    }

    fn cell_area(&self, i: usize, j: usize) -> f64 {
        (self.x_edges[i + 1] - self.x_edges[i]) * (self.l_edges[j + 1] - self.l_edges[j])
    }

    /// Marginal over the local-time axis, on the endpoint bins.
    pub fn marginal_endpoint_mass(&self) -> Vec<f64> {
        let cols = self.cols();
        (0..self.x_edges.len() - 1)
            .map(|i| self.mass[i * cols..(i + 1) * cols].iter().sum())
            .collect()
    }
}

fn binomial_stderr(count: u64, total: usize) -> f64 {
    let n = total as f64;
    // zero-count bins still carry the resolution limit of the sample size
    let p_hat = if count == 0 { 1.0 / n } else { count as f64 / n };
    (p_hat * (1.0 - p_hat) / n).sqrt()
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for the k-th experiment of a suite.
pub fn subseed(master: u64, experiment: u64) -> u64 {
    splitmix64(master ^ experiment.wrapping_mul(GOLDEN_GAMMA))
}

fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

fn probability_to_cutoff(p: f64) -> u64 {
    debug_assert!((0.0..=1.0).contains(&p));
    (p * (u64::MAX as f64 + 1.0)) as u64
}

struct StepRule {
    up_pos: u64,
    up_neg: u64,
    up_zero: u64,
}

impl StepRule {
    fn new(params: &DriftParams, n: u32) -> Self {
        let sqrt_n = f64::from(n).sqrt();
        Self {
            up_pos: probability_to_cutoff(0.5 * (1.0 + params.m1() / sqrt_n)),
            up_neg: probability_to_cutoff(0.5 * (1.0 + params.m2() / sqrt_n)),
            up_zero: probability_to_cutoff(params.p()),
        }
    }

    #[inline]
    fn cutoff(&self, site: i64) -> u64 {
        if site > 0 {
            self.up_pos
        } else if site < 0 {
            self.up_neg
        } else {
            self.up_zero
        }
    }
}

fn round_to_site(x0: f64, sqrt_n: f64) -> i64 {
    (x0 * sqrt_n).round() as i64
}

fn run_one_path(
    rule: &StepRule,
    start_site: i64,
    steps: u64,
    band_sites: i64,
    dt: f64,
    inv_two_eps: f64,
    sqrt_n: f64,
    killed: bool,
    rng: &mut ChaCha8Rng,
) -> PathSummary {
    let mut site = start_site;
    let mut band_steps: u64 = 0;
    let mut first_hit: Option<u64> = None;
    let mut absorbed = false;

    for step in 1..=steps {
        let up = rng.next_u64() < rule.cutoff(site);
        site += if up { 1 } else { -1 };
        if site == 0 {
            if first_hit.is_none() {
                first_hit = Some(step);
            }
            if killed {
                absorbed = true;
                break;
            }
        }
        if site.abs() <= band_sites {
            band_steps += 1;
        }
    }

    PathSummary {
        endpoint: site as f64 / sqrt_n,
        local_time: band_steps as f64 * dt * inv_two_eps,
        first_hit_time: first_hit.map(|s| s as f64 * dt),
        absorbed,
    }
}

fn simulate_impl(
    params: &DriftParams,
    t: f64,
    x0: f64,
    cfg: &WalkConfig,
    killed: bool,
) -> Result<Vec<PathSummary>> {
    cfg.validate_against(params)?;
    if !(t > 0.0) {
        return Err(invalid(format!("simulation horizon must be positive, got {t}")));
    }
    let n = cfg.steps_per_unit_time;
    let steps = (f64::from(n) * t).floor() as u64;
    if steps == 0 {
        return Err(invalid(format!("t = {t} is below the lattice time step 1/{n}")));
    }
    let sqrt_n = f64::from(n).sqrt();
    let start_site = round_to_site(x0, sqrt_n);
    if killed && start_site <= 0 {
        return Err(invalid(format!(
            "killed runs need a start strictly above 0 on the lattice; x0 = {x0} rounds to site {start_site}"
        )));
    }
    let rule = StepRule::new(params, n);
    let dt = 1.0 / f64::from(n);
    let band_sites = cfg.band_sites();
    let inv_two_eps = 0.5 / cfg.epsilon();

    Ok((0..cfg.paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i as u64);
            run_one_path(
                &rule, start_site, steps, band_sites, dt, inv_two_eps, sqrt_n, killed, &mut rng,
            )
        })
        .collect())
}

/// Simulate `cfg.paths` independent walks over [0, t] from x0.
pub fn simulate_paths(
    params: &DriftParams,
    t: f64,
    x0: f64,
    cfg: &WalkConfig,
) -> Result<Vec<PathSummary>> {
    simulate_impl(params, t, x0, cfg, false)
}

/// As [`simulate_paths`], absorbing each path at its first visit to 0.
pub fn simulate_paths_killed(
    params: &DriftParams,
    t: f64,
    x0: f64,
    cfg: &WalkConfig,
) -> Result<Vec<PathSummary>> {
    simulate_impl(params, t, x0, cfg, true)
}

/// Histogram of surviving endpoints, normalized by the total path count, so
/// killed runs produce a sub-probability mass.
pub fn endpoint_density(summaries: &[PathSummary], bin_width: f64) -> Result<EmpiricalDensity> {
    if summaries.is_empty() {
        return Err(invalid("endpoint_density needs at least one path"));
    }
    if !(bin_width > 0.0) {
        return Err(invalid(format!("bin_width must be positive, got {bin_width}")));
    }
    let surviving: Vec<f64> = summaries
        .iter()
        .filter(|s| !s.absorbed)
        .map(|s| s.endpoint)
        .collect();
    let (lo, hi) = surviving
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
            (lo.min(e), hi.max(e))
        });
    let (lo, hi) = if surviving.is_empty() { (0.0, bin_width) } else { (lo, hi) };
    let first = (lo / bin_width).floor() * bin_width;
    let bins = (((hi - first) / bin_width).floor() as usize) + 1;
    let edges: Vec<f64> = (0..=bins).map(|i| first + i as f64 * bin_width).collect();

    let mut counts = vec![0u64; bins];
    for &e in &surviving {
        let idx = (((e - first) / bin_width).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let total = summaries.len();
    Ok(EmpiricalDensity {
        bin_edges: edges,
        mass: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        stderr: counts.iter().map(|&c| binomial_stderr(c, total)).collect(),
    })
}

/// Killed-walk endpoint histogram from x0 > 0; total mass estimates the
/// survival probability.
pub fn killed_endpoint_density(
    params: &DriftParams,
    t: f64,
    x0: f64,
    cfg: &WalkConfig,
    bin_width: f64,
) -> Result<EmpiricalDensity> {
    if !(x0 > 0.0) {
        return Err(invalid(format!("killed_endpoint_density requires x0 > 0, got {x0}")));
    }
    let summaries = simulate_paths_killed(params, t, x0, cfg)?;
    endpoint_density(&summaries, bin_width)
}

/// 2D histogram over (endpoint, local time) for paths started at 0.
pub fn joint_histogram(
    summaries: &[PathSummary],
    x_edges: &[f64],
    l_edges: &[f64],
) -> Result<JointHistogram> {
    if summaries.is_empty() {
        return Err(invalid("joint_histogram needs at least one path"));
    }
    if x_edges.len() < 2 || l_edges.len() < 2 {
        return Err(invalid("joint_histogram needs at least one bin per axis"));
    }
    if x_edges.windows(2).any(|w| w[0] >= w[1]) || l_edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("histogram edges must be strictly increasing"));
    }
    let rows = x_edges.len() - 1;
    let cols = l_edges.len() - 1;
    let mut counts = vec![0u64; rows * cols];
    for s in summaries {
        let Some(i) = bin_index(x_edges, s.endpoint) else { continue };
        let Some(j) = bin_index(l_edges, s.local_time) else { continue };
        counts[i * cols + j] += 1;
    }
    let total = summaries.len();
    Ok(JointHistogram {
        x_edges: x_edges.to_vec(),
        l_edges: l_edges.to_vec(),
        mass: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        stderr: counts.iter().map(|&c| binomial_stderr(c, total)).collect(),
        paths: total,
    })
}

fn bin_index(edges: &[f64], v: f64) -> Option<usize> {
    if v < edges[0] || v >= *edges.last().unwrap() {
        return None;
    }
    Some(edges.partition_point(|&e| e <= v) - 1)
}

/// Fraction of walks from x0 that reach the site of b before the site of a,
/// with its binomial standard error. The walk runs with no time horizon;
/// paths are capped at a step budget far beyond the expected exit time.
pub fn exit_frequency(
    params: &DriftParams,
    a: f64,
    x0: f64,
    b: f64,
    cfg: &WalkConfig,
) -> Result<(f64, f64)> {
    cfg.validate_against(params)?;
    if !(a < x0 && x0 < b) {
        return Err(invalid(format!("exit_frequency requires a < x0 < b, got {a}, {x0}, {b}")));
    }
    let n = cfg.steps_per_unit_time;
    let sqrt_n = f64::from(n).sqrt();
    let site_a = round_to_site(a, sqrt_n);
    let site_b = round_to_site(b, sqrt_n);
    let start = round_to_site(x0, sqrt_n);
    if !(site_a < start && start < site_b) {
        return Err(invalid(
            "interval too narrow for the lattice resolution: boundary sites collide with the start",
        ));
    }
    let rule = StepRule::new(params, n);
    let width = (b - a) * (b - a);
    let step_cap = (4000.0 * f64::from(n) * width) as u64;

    let hits: u64 = (0..cfg.paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i as u64);
            let mut site = start;
            for _ in 0..step_cap {
                let up = rng.next_u64() < rule.cutoff(site);
                site += if up { 1 } else { -1 };
                if site <= site_a {
                    return 0u64;
                }
                if site >= site_b {
                    return 1u64;
                }
            }
            0u64
        })
        .sum();

    let freq = hits as f64 / cfg.paths as f64;
    Ok((freq, (freq * (1.0 - freq) / cfg.paths as f64).sqrt()))
}

/// Samples for the strong-additivity check of the local time: for each path
/// from x0 that hits 0 at time s before t, the local time accrued over
/// (s, t] is paired with the local time of a fresh path run from 0 for the
/// same remaining duration. The two collections must be equal in law.
pub fn post_hit_local_time_samples(
    params: &DriftParams,
    t: f64,
    x0: f64,
    cfg: &WalkConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate_against(params)?;
    if x0 == 0.0 {
        return Err(invalid("post-hit sampling needs a start away from 0"));
    }
    if !(t > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {t}")));
    }
    let n = cfg.steps_per_unit_time;
    let steps = (f64::from(n) * t).floor() as u64;
    let sqrt_n = f64::from(n).sqrt();
    let start_site = round_to_site(x0, sqrt_n);
    let rule = StepRule::new(params, n);
    let dt = 1.0 / f64::from(n);
    let band_sites = cfg.band_sites();
    let inv_two_eps = 0.5 / cfg.epsilon();
    let fresh_seed = splitmix64(cfg.seed ^ GOLDEN_GAMMA);

    let pairs: Vec<Option<(f64, f64)>> = (0..cfg.paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i as u64);
            let mut site = start_site;
            let mut hit_step = None;
            let mut post_band: u64 = 0;
            for step in 1..=steps {
                let up = rng.next_u64() < rule.cutoff(site);
                site += if up { 1 } else { -1 };
                if site == 0 && hit_step.is_none() {
                    hit_step = Some(step);
                }
                if hit_step.is_some() && site.abs() <= band_sites {
                    post_band += 1;
                }
            }
            let hit = hit_step?;
            let remaining = steps - hit;
            if remaining == 0 {
                return None;
            }
            let mut fresh_rng = path_rng(fresh_seed, i as u64);
            let fresh = run_one_path(
                &rule,
                0,
                remaining,
                band_sites,
                dt,
                inv_two_eps,
                sqrt_n,
                false,
                &mut fresh_rng,
            );
            Some((post_band as f64 * dt * inv_two_eps, fresh.local_time))
        })
        .collect();

    let mut post = Vec::new();
    let mut fresh = Vec::new();
    for pair in pairs.into_iter().flatten() {
        post.push(pair.0);
        fresh.push(pair.1);
    }
    Ok((post, fresh))
}

/// Raw-summary CSV export: endpoint, local_time, first_hit_time (empty when
/// the path never visits 0), absorbed.
pub fn write_summaries_csv<W: Write>(summaries: &[PathSummary], mut out: W) -> Result<()> {
    writeln!(out, "endpoint,local_time,first_hit_time,absorbed")?;
    for s in summaries {
        match s.first_hit_time {
            Some(h) => writeln!(out, "{},{},{},{}", s.endpoint, s.local_time, h, s.absorbed)?,
            None => writeln!(out, "{},{},,{}", s.endpoint, s.local_time, s.absorbed)?,
        }
    }
    Ok(())
}

/// [`write_summaries_csv`] to a file path.
pub fn write_summaries_csv_file(summaries: &[PathSummary], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_summaries_csv(summaries, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_sf;

    fn params(m1: f64, m2: f64, p: f64) -> DriftParams {
        DriftParams::new(m1, m2, p).unwrap()
    }

    fn mean(xs: impl Iterator<Item = f64>) -> (f64, usize) {
        let mut sum = 0.0;
        let mut count = 0usize;
        for x in xs {
            sum += x;
            count += 1;
        }
        (sum / count as f64, count)
    }

    #[test]
    fn config_validation() {
        assert!(WalkConfig::new(0, 10, 1).is_err());
        assert!(WalkConfig::new(100, 0, 1).is_err());
        assert!(WalkConfig::new(100, 10, 1).unwrap().with_band_exponent(0.5).is_err());
        let cfg = WalkConfig::new(10, 10, 1).unwrap();
        assert!(cfg.validate_against(&params(2.0, 0.0, 0.5)).is_err());
        assert!(cfg.validate_against(&params(1.0, 0.0, 0.5)).is_ok());
    }

    #[test]
    fn determinism_per_seed() {
        let cfg = WalkConfig::new(400, 64, 12345).unwrap();
        let pr = params(1.0, -1.0, 0.5);
        let a = simulate_paths(&pr, 1.0, 0.0, &cfg).unwrap();
        let b = simulate_paths(&pr, 1.0, 0.0, &cfg).unwrap();
        assert_eq!(a, b);
        let other = WalkConfig::new(400, 64, 54321).unwrap();
        let c = simulate_paths(&pr, 1.0, 0.0, &other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn driftless_absolute_endpoint_moment() {
        let cfg = WalkConfig::new(2500, 40_000, 7).unwrap();
        let pr = params(0.0, 0.0, 0.5);
        let sums = simulate_paths(&pr, 1.0, 0.0, &cfg).unwrap();
        let (m, count) = mean(sums.iter().map(|s| s.endpoint.abs()));
        assert_eq!(count, 40_000);
        let want = (2.0 / std::f64::consts::PI).sqrt();
        let sd = (1.0 - 2.0 / std::f64::consts::PI).sqrt();
        let tol = 3.0 * sd / (count as f64).sqrt() + 1.0 / 50.0; // lattice rounding slack
        assert!((m - want).abs() < tol, "mean |endpoint| = {m}, want {want} +- {tol}");
    }

    #[test]
    fn local_time_estimator_calibrated_against_absolute_moment() {
        // E L_1 = E |B_1| for the driftless walk from 0
        let cfg = WalkConfig::new(10_000, 30_000, 11).unwrap();
        let pr = params(0.0, 0.0, 0.5);
        let sums = simulate_paths(&pr, 1.0, 0.0, &cfg).unwrap();
        let (m, count) = mean(sums.iter().map(|s| s.local_time));
        let want = (2.0 / std::f64::consts::PI).sqrt();
        let sd = (1.0 - 2.0 / std::f64::consts::PI).sqrt();
        let tol = 0.02 * want + 3.0 * sd / (count as f64).sqrt();
        assert!((m - want).abs() < tol, "mean local time = {m}, want {want} +- {tol}");
    }

    #[test]
    fn first_passage_fraction_driftless() {
        let cfg = WalkConfig::new(2500, 40_000, 3).unwrap();
        let pr = params(0.0, 0.0, 0.5);
        let sums = simulate_paths(&pr, 1.0, 1.0, &cfg).unwrap();
        let frac = sums.iter().filter(|s| s.first_hit_time.is_some()).count() as f64
            / sums.len() as f64;
        let want = 2.0 * gauss_sf(1.0);
        let stderr = (want * (1.0 - want) / sums.len() as f64).sqrt();
        assert!(
            (frac - want).abs() < 3.0 * stderr + 0.005,
            "hit fraction {frac}, want {want}"
        );
        for s in &sums {
            if let Some(h) = s.first_hit_time {
                assert!(h > 0.0 && h <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn endpoint_histogram_matches_gaussian() {
        let cfg = WalkConfig::new(2500, 40_000, 5).unwrap();
        let pr = params(0.0, 0.0, 0.5);
        let sums = simulate_paths(&pr, 1.0, 0.0, &cfg).unwrap();
        // 0.24 spans an even number of lattice sites at n = 2500, so every
        // bin holds the same number of reachable (fixed-parity) sites
        let hist = endpoint_density(&sums, 0.24).unwrap();
        assert!((hist.total_mass() - 1.0).abs() < 1e-12);
        let centers = hist.centers();
        let dens = hist.densities();
        let errs = hist.density_stderr();
        for i in 0..centers.len() {
            let want = crate::numerics::gauss_pdf(centers[i]);
            let tol = (0.01f64).max(3.0 * errs[i]) + 0.01; // binning bias slack
            assert!(
                (dens[i] - want).abs() < tol,
                "bin {i} center {}: got {} want {want}",
                centers[i],
                dens[i]
            );
        }
    }

    #[test]
    fn skew_histogram_matches_two_sided_kernel() {
        let cfg = WalkConfig::new(2500, 40_000, 9).unwrap();
        let pr = params(0.0, 0.0, 0.7);
        let sums = simulate_paths(&pr, 1.0, 0.0, &cfg).unwrap();
        let hist = endpoint_density(&sums, 0.24).unwrap();
        let centers = hist.centers();
        let dens = hist.densities();
        let errs = hist.density_stderr();
        for i in 0..centers.len() {
            let c = centers[i];
            if c.abs() < 0.25 {
                continue; // skip the bin straddling the kink at 0
            }
            let weight = if c > 0.0 { 2.0 * 0.7 } else { 2.0 * 0.3 };
            let want = weight * crate::numerics::gauss_pdf(c);
            let tol = (0.01f64).max(3.0 * errs[i]) + 0.012;
            assert!(
                (dens[i] - want).abs() < tol,
                "bin center {c}: got {} want {want}",
                dens[i]
            );
        }
    }

    #[test]
    fn killed_run_survival_mass() {
        let cfg = WalkConfig::new(2500, 40_000, 13).unwrap();
        let pr = params(0.0, 0.0, 0.5);
        let hist = killed_endpoint_density(&pr, 1.0, 1.0, &cfg, 0.25).unwrap();
        let want = 1.0 - 2.0 * gauss_sf(1.0);
        let got = hist.total_mass();
        assert!((got - want).abs() < 0.01, "survival {got}, want {want}");
        // all surviving endpoints sit strictly above 0
        assert!(hist.bin_edges[0] >= 0.0);
    }

    #[test]
    fn joint_histogram_marginalization_consistency() {
        let cfg = WalkConfig::new(900, 20_000, 17).unwrap();
        let pr = params(0.0, 0.0, 0.5);
        let sums = simulate_paths(&pr, 1.0, 0.0, &cfg).unwrap();
        let x_edges: Vec<f64> = (-8..=8).map(|i| f64::from(i) * 0.5).collect();
        let l_edges: Vec<f64> = (0..=10).map(|i| f64::from(i) * 0.4).collect();
        let joint = joint_histogram(&sums, &x_edges, &l_edges).unwrap();
        let hist = endpoint_density(&sums, 0.5).unwrap();
        let marg = joint.marginal_endpoint_mass();
        // compare on the shared interior bins
        for (i, edge) in x_edges.iter().take(x_edges.len() - 1).enumerate() {
            let Some(k) = hist
                .bin_edges
                .iter()
                .position(|e| (e - edge).abs() < 1e-12)
            else {
                continue;
            };
            if k >= hist.mass.len() {
                continue;
            }
            // the joint histogram clips local times beyond its grid
            assert!(marg[i] <= hist.mass[k] + 1e-12);
        }
        let l_max = *l_edges.last().unwrap();
        let clipped = sums
            .iter()
            .filter(|s| s.local_time >= l_max || s.endpoint.abs() >= 4.0)
            .count() as f64
            / sums.len() as f64;
        assert!((hist.total_mass() - joint.mass.iter().sum::<f64>()) <= clipped + 1e-12);
    }

    #[test]
    fn joint_histogram_classical_cell() {
        let cfg = WalkConfig::new(2500, 40_000, 19).unwrap();
        let pr = params(0.0, 0.0, 0.5);
        let sums = simulate_paths(&pr, 1.0, 0.0, &cfg).unwrap();
        let joint = joint_histogram(&sums, &[0.38, 0.62], &[0.38, 0.62]).unwrap();
        // classical joint density of (B_t, L_t) at (0.5, 0.5)
        let want = 0.241_970_724_519_143_37;
        let got = joint.cell_density(0, 0);
        let tol = (3.0 * joint.cell_density_stderr(0, 0)).max(0.01) + 0.01;
        assert!((got - want).abs() < tol, "cell density {got}, want {want}");
    }

    #[test]
    fn exit_frequency_matches_scale_identity() {
        let cfg = WalkConfig::new(900, 30_000, 23).unwrap();
        for (pr, want) in [
            (params(0.0, 0.0, 0.5), 0.5),
            (params(0.0, 0.0, 0.7), 0.7),
            (params(1.0, 1.0, 0.5), 0.880_797_077_977_882_4),
        ] {
            let (freq, stderr) = exit_frequency(&pr, -1.0, 0.0, 1.0, &cfg).unwrap();
            assert!(
                (freq - want).abs() < 3.0 * stderr + 0.01,
                "freq {freq}, want {want}"
            );
        }
    }

    #[test]
    fn reflection_statistics_match() {
        let cfg = WalkConfig::new(900, 30_000, 29).unwrap();
        let pr = params(1.0, -2.0, 0.3);
        let direct = simulate_paths(&pr, 1.0, 0.5, &cfg).unwrap();
        let mirrored = simulate_paths(&pr.reflected(), 1.0, -0.5, &cfg).unwrap();
        let (m1, _) = mean(direct.iter().map(|s| s.endpoint));
        let (m2, _) = mean(mirrored.iter().map(|s| -s.endpoint));
        let (sd, _) = mean(direct.iter().map(|s| s.endpoint * s.endpoint));
        let stderr = (sd / direct.len() as f64).sqrt();
        assert!((m1 - m2).abs() < 3.0 * 2.0f64.sqrt() * stderr, "{m1} vs {m2}");
        let (l1, _) = mean(direct.iter().map(|s| s.local_time));
        let (l2, _) = mean(mirrored.iter().map(|s| s.local_time));
        assert!((l1 - l2).abs() < 0.02, "{l1} vs {l2}");
    }

    #[test]
    fn csv_export_format() {
        let summaries = [
            PathSummary {
                endpoint: 0.25,
                local_time: 0.5,
                first_hit_time: Some(0.125),
                absorbed: false,
            },
            PathSummary {
                endpoint: -1.5,
                local_time: 0.0,
                first_hit_time: None,
                absorbed: true,
            },
        ];
        let mut buf = Vec::new();
        write_summaries_csv(&summaries, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "endpoint,local_time,first_hit_time,absorbed\n0.25,0.5,0.125,false\n-1.5,0,,true\n"
        );
    }

    #[test]
    fn subseed_is_stable() {
        assert_eq!(subseed(42, 1), subseed(42, 1));
        assert_ne!(subseed(42, 1), subseed(42, 2));
        assert_ne!(subseed(42, 1), subseed(43, 1));
    }
}
