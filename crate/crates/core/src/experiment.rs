//! Monte-Carlo probability sweeps over the default cascade.
//!
//! Each trial at grid point `g`, iteration `k` uses the child seed
//! `master_seed + k` for its network, balance sheets and shock draw (on
//! separate streams), so every grid point sees the same random inputs and
//! results are independent of scheduling.

use std::io::Write;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::balance::{build_sheets, SheetConfig};
use crate::cascade::{draw_shock, CascadeConfig, CascadeState};
use crate::error::{Error, Result};
use crate::netgen::{generate, NetworkConfig, WeightRule};
use crate::rng::child_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_banks: usize,
    pub n_shocked: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub grid_points: usize,
    pub iterations: usize,
    pub master_seed: u64,
    pub sheet_config: SheetConfig,
    pub weight_rule: WeightRule,
    pub cascade: CascadeConfig,
    /// Reuse the iteration-0 network and sheets at every iteration and only
    /// redraw the shock.
    pub fixed_network: bool,
    /// Shock these banks in every trial instead of drawing them.
    pub shock_ids: Option<Vec<usize>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_banks: 100,
            n_shocked: 15,
            p_min: 0.04,
            p_max: 0.10,
            grid_points: 15,
            iterations: 10,
            master_seed: 42,
            sheet_config: SheetConfig::default(),
            weight_rule: WeightRule::default(),
            cascade: CascadeConfig::default(),
            fixed_network: false,
            shock_ids: None,
        }
    }
}

impl SweepConfig {
    /// Every invalid field, one error each.
    pub fn problems(&self) -> Vec<Error> {
        let mut out = Vec::new();
        if self.n_banks == 0 {
            out.push(Error::config("n_banks", "need at least one bank"));
        }
        if self.n_shocked > self.n_banks {
            out.push(Error::config(
                "n_shocked",
                format!("{} shocked banks exceed {} banks", self.n_shocked, self.n_banks),
            ));
        }
        for (field, p) in [("p_min", self.p_min), ("p_max", self.p_max)] {
            if !(0.0..=1.0).contains(&p) {
                out.push(Error::config(field, format!("{p} is outside [0, 1]")));
            }
        }
        if self.p_min > self.p_max {
            out.push(Error::config("p_min", "p-min exceeds p-max"));
        }
        if self.grid_points == 0 {
            out.push(Error::config("grid_points", "need at least one grid point"));
        }
        if self.iterations == 0 {
            out.push(Error::config("iterations", "need at least one iteration"));
        }
        if let Some(ids) = &self.shock_ids {
            if let Some(&bad) = ids.iter().find(|&&id| id >= self.n_banks) {
                out.push(Error::config("shock_ids", format!("bank {bad} does not exist")));
            }
        }
        for check in [
            self.sheet_config.validate(),
            self.weight_rule.validate(),
            self.cascade.validate(),
        ] {
            if let Err(e) = check {
                out.push(e);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.problems().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// `grid_points` equally spaced values from `p_min` to `p_max` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.grid_points)
    }
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points)
                .map(|i| if i + 1 == points { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub p: f64,
    pub mean: f64,
    /// Population standard deviation over iterations.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub points: Vec<GridPoint>,
}

impl SweepResult {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|g| g.mean).collect()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.points.iter().map(|g| g.p).collect()
    }
}

/// Percent of banks solvent after one full cascade.
pub fn run_trial(config: &SweepConfig, p: f64, iteration: usize) -> Result<f64> {
    let trial_seed = child_seed(config.master_seed, iteration as u64);
    let world_seed = if config.fixed_network {
        child_seed(config.master_seed, 0)
    } else {
        trial_seed
    };
    let net_cfg = NetworkConfig {
        n: config.n_banks,
        p,
        weight_rule: config.weight_rule,
        seed: world_seed,
    };
    let net = generate(&net_cfg)?;
    let sheets = build_sheets(&net, &config.sheet_config, world_seed)?;
    let shock = match &config.shock_ids {
        Some(ids) => ids.clone(),
        None => draw_shock(config.n_banks, config.n_shocked, trial_seed)?,
    };
    let mut state = CascadeState::new(&net, sheets, config.cascade)?;
    state.apply_initial_shock(&shock)?;
    Ok(state.run_cascade().percent_solvent)
}

/// Runs every (grid point, iteration) trial, in parallel on the current
/// rayon pool. Output is identical for any pool size.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let grid = config.grid();
    let iterations = config.iterations;
    let values: Vec<f64> = (0..grid.len() * iterations)
        .into_par_iter()
        .map(|idx| run_trial(config, grid[idx / iterations], idx % iterations))
        .collect::<Result<_>>()?;
    let points = grid
        .iter()
        .zip(values.chunks(iterations))
        .map(|(&p, vals)| {
            let stats = SummaryStats::of(vals).expect("iterations >= 1");
            GridPoint {
                p,
                mean: stats.mean,
                std: stats.std,
                min: stats.min,
                max: stats.max,
                values: vals.to_vec(),
            }
        })
        .collect();
    Ok(SweepResult {
        config: config.clone(),
        points,
    })
}

/// Moments and order statistics. `std` divides by `n`; quartiles use
/// linear interpolation between order statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl SummaryStats {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("summary of an empty series".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            count: values.len(),
            mean,
            std: var.sqrt(),
            min: sorted[0],
            q25: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q75: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        })
    }

    pub fn rows(&self) -> [(&'static str, f64); 8] {
        [
            ("count", self.count as f64),
            ("mean", self.mean),
            ("std", self.std),
            ("min", self.min),
            ("25%", self.q25),
            ("50%", self.median),
            ("75%", self.q75),
            ("max", self.max),
        ]
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Summary statistics of the grid-point means.
pub fn summarize(result: &SweepResult) -> Result<SummaryStats> {
    SummaryStats::of(&result.means())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// Mean of `a`'s grid-point means minus mean of `b`'s.
    pub mean_difference: f64,
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    /// Two-sided, 5% level.
    pub significant: bool,
}

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Welch two-sample t-test on the grid-point means of two sweeps.
pub fn compare_sweeps(a: &SweepResult, b: &SweepResult) -> Result<ComparisonReport> {
    welch_t_test(&a.means(), &b.means())
}

pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<ComparisonReport> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Domain("t-test needs at least 2 values per sample".into()));
    }
    let moments = |xs: &[f64]| {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (n, mean, var)
    };
    let (na, ma, va) = moments(a);
    let (nb, mb, vb) = moments(b);
    let diff = ma - mb;
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        let same = diff == 0.0;
        return Ok(ComparisonReport {
            mean_difference: diff,
            t_statistic: if same { 0.0 } else { diff.signum() * f64::INFINITY },
            degrees_of_freedom: na + nb - 2.0,
            p_value: if same { 1.0 } else { 0.0 },
            significant: !same,
        });
    }
    let t = diff / se2.sqrt();
    let dof = se2.powi(2)
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Domain(format!("t distribution: {e}")))?;
    let p_value = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(ComparisonReport {
        mean_difference: diff,
        t_statistic: t,
        degrees_of_freedom: dof,
        p_value,
        significant: p_value < SIGNIFICANCE_LEVEL,
    })
}

/// Spearman rank correlation between `p` and mean solvency.
pub fn correlation(result: &SweepResult) -> Result<f64> {
    spearman(&result.probabilities(), &result.means())
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Domain("series lengths differ".into()));
    }
    if x.len() < 3 {
        return Err(Error::Domain("correlation needs at least 3 points".into()));
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut cov, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mean) * (b - mean);
        vx += (a - mean).powi(2);
        vy += (b - mean).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Domain("correlation undefined for a constant series".into()));
    }
    Ok(cov / (vx * vy).sqrt())
}

/// 1-based ranks; ties share their average rank.
fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

pub const SWEEP_CSV_HEADER: &str = "p,mean_solvent_pct,std_solvent_pct,min,max,iterations";

/// Grid rows followed by a `# summary` block of `stat,value` rows.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for g in &result.points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            g.p,
            g.mean,
            g.std,
            g.min,
            g.max,
            g.values.len()
        )?;
    }
    let summary = summarize(result)?;
    writeln!(out, "# summary")?;
    writeln!(out, "stat,value")?;
    for (name, value) in summary.rows() {
        writeln!(out, "{name},{value}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake(ps: &[f64], means: &[f64]) -> SweepResult {
        SweepResult {
            config: SweepConfig::default(),
            points: ps
                .iter()
                .zip(means)
                .map(|(&p, &m)| GridPoint {
                    p,
                    mean: m,
                    std: 0.0,
                    min: m,
                    max: m,
                    values: vec![m],
                })
                .collect(),
        }
    }

    #[test]
    fn grid_includes_endpoints() {
        let g = linspace(0.04, 0.10, 15);
        assert_eq!(g.len(), 15);
        assert_eq!(g[0], 0.04);
        assert_eq!(g[14], 0.10);
        assert_eq!(linspace(0.3, 0.5, 1), vec![0.3]);
    }

    #[test]
    fn no_links_means_only_the_shock() {
        let cfg = SweepConfig {
            p_min: 0.0,
            p_max: 0.0,
            grid_points: 3,
            iterations: 4,
            ..SweepConfig::default()
        };
        let res = run_sweep(&cfg).unwrap();
        for g in &res.points {
            assert!(g.values.iter().all(|&v| v == 85.0));
        }
    }

    #[test]
    fn invalid_fields_are_listed() {
        let cfg = SweepConfig {
            p_min: 0.2,
            p_max: 0.1,
            n_shocked: 200,
            iterations: 0,
            ..SweepConfig::default()
        };
        let fields: Vec<&str> = cfg
            .problems()
            .iter()
            .map(|e| match e {
                Error::InvalidConfig { field, .. } => *field,
                _ => "?",
            })
            .collect();
        assert_eq!(fields, vec!["n_shocked", "p_min", "iterations"]);
        assert!(run_sweep(&cfg).is_err());
    }

    #[test]
    fn summary_examples() {
        let s = SummaryStats::of(&[42.0]).unwrap();
        assert_eq!((s.mean, s.min, s.max, s.std), (42.0, 42.0, 42.0, 0.0));
        let s = SummaryStats::of(&[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(s.mean, 20.0);
        assert_eq!(s.median, 20.0);
        assert_eq!((s.q25, s.q75), (15.0, 25.0));
        // Population convention: sqrt(200 / 3).
        assert!((s.std - (200.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let s = SummaryStats::of(&[7.0; 5]).unwrap();
        assert_eq!((s.std, s.q25, s.median, s.q75), (0.0, 7.0, 7.0, 7.0));
        assert!(SummaryStats::of(&[]).is_err());
    }

    #[test]
    fn welch_examples() {
        let a = fake(&[0.1, 0.2, 0.3], &[50.0, 60.0, 70.0]);
        let r = compare_sweeps(&a, &a).unwrap();
        assert_eq!(r.mean_difference, 0.0);
        assert!(!r.significant);
        assert!(compare_sweeps(&a, &fake(&[0.1], &[1.0])).is_err());

        // Reference values from the textbook Welch formulas:
        // means 2 and 6, variances 2.5 and 2.5, n = 5 each:
        // t = -4 / sqrt(1) = -4, dof = 8, two-sided p = 0.00395.
        let r = welch_t_test(&[0.0, 1.0, 2.0, 3.0, 4.0], &[4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        assert!((r.t_statistic + 4.0).abs() < 1e-12);
        assert!((r.degrees_of_freedom - 8.0).abs() < 1e-12);
        assert!((r.p_value - 0.003949).abs() < 1e-5);
        assert!(r.significant);
    }

    #[test]
    fn spearman_examples() {
        let ps = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(correlation(&fake(&ps, &[1.0, 2.0, 5.0, 9.0])).unwrap(), 1.0);
        assert_eq!(correlation(&fake(&ps, &[9.0, 5.0, 2.0, 1.0])).unwrap(), -1.0);
        assert!(correlation(&fake(&ps, &[3.0; 4])).is_err());
        assert!(correlation(&fake(&ps[..2], &[1.0, 2.0])).is_err());
        // Ties take the average rank: ranks (1, 2.5, 2.5, 4).
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!((r - 4.5 / 4.5f64.sqrt() / 5.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let res = fake(&[0.1, 0.2], &[80.0, 85.0]);
        let mut buf = Vec::new();
        write_sweep_csv(&res, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert_eq!(lines[1], "0.1,80,0,80,80,1");
        assert_eq!(lines[3], "# summary");
        assert_eq!(lines[4], "stat,value");
        assert_eq!(lines[6], "mean,82.5");
    }
}
