//! Default cascades.
//!
//! Shocked banks lose all their assets and default. In each following round
//! every creditor of a bank that defaulted in the previous round writes off
//! `(1 - recovery_rate)` of its exposure, then all surviving banks are
//! re-tested simultaneously. The cascade stops at the first round with no
//! new defaults.

use std::io::Write;

use rand::seq::index;

use crate::balance::{BalanceSheet, SolvencyParams};
use crate::error::{Error, Result};
use crate::netgen::DirectedWeightedNetwork;
use crate::rng::{self, Stream};

/// How the defaulted fraction `phi` of a bank's interbank claims is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhiMode {
    /// Defaulted exposure weight over total interbank assets.
    #[default]
    Weight,
    /// Defaulted debtors over all debtors.
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeConfig {
    /// Fraction of an exposure recovered when the obligor defaults.
    pub recovery_rate: f64,
    /// Resale price of external assets; below 1 revalues every `A_M` once
    /// when the cascade state is created.
    pub q: f64,
    pub phi_mode: PhiMode,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            recovery_rate: 0.0,
            q: 1.0,
            phi_mode: PhiMode::Weight,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.recovery_rate) {
            return Err(Error::config(
                "recovery_rate",
                format!("{} is outside [0, 1]", self.recovery_rate),
            ));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::config("q", format!("{} is outside (0, 1]", self.q)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeResult {
    /// Sorted ids of every defaulted bank, shocked ones included.
    pub defaulted: Vec<usize>,
    /// Rounds after the shock that produced at least one default.
    pub rounds: usize,
    pub percent_solvent: f64,
}

#[derive(Debug, Clone)]
pub struct CascadeState<'a> {
    network: &'a DirectedWeightedNetwork,
    config: CascadeConfig,
    initial: Vec<BalanceSheet>,
    sheets: Vec<BalanceSheet>,
    defaulted: Vec<bool>,
    written_off: Vec<bool>,
    /// Defaulted in the last round, exposures not yet written off.
    pending: Vec<usize>,
    /// Gross exposure weight and number of debtors lost to defaults.
    lost_weight: Vec<f64>,
    lost_debtors: Vec<usize>,
    round: usize,
    timeline: Vec<(usize, Vec<usize>)>,
}

impl<'a> CascadeState<'a> {
    pub fn new(
        network: &'a DirectedWeightedNetwork,
        sheets: Vec<BalanceSheet>,
        config: CascadeConfig,
    ) -> Result<Self> {
        config.validate()?;
        let n = network.node_count();
        if sheets.len() != n {
            return Err(Error::Domain(format!(
                "{} balance sheets for {} banks",
                sheets.len(),
                n
            )));
        }
        let mut working = sheets.clone();
        if config.q < 1.0 {
            for s in &mut working {
                s.a_m *= config.q;
            }
        }
        Ok(Self {
            network,
            config,
            initial: sheets,
            sheets: working,
            defaulted: vec![false; n],
            written_off: vec![false; n],
            pending: Vec::new(),
            lost_weight: vec![0.0; n],
            lost_debtors: vec![0; n],
            round: 0,
            timeline: Vec::new(),
        })
    }

    pub fn network(&self) -> &DirectedWeightedNetwork {
        self.network
    }

    /// Working sheets: interbank assets written down, external assets
    /// revalued and shocked banks emptied.
    pub fn sheets(&self) -> &[BalanceSheet] {
        &self.sheets
    }

    pub fn defaulted(&self) -> &[bool] {
        &self.defaulted
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// `(round, newly defaulted ids)`; round 0 is the initial shock.
    pub fn timeline(&self) -> &[(usize, Vec<usize>)] {
        &self.timeline
    }

    pub fn default_count(&self) -> usize {
        self.defaulted.iter().filter(|&&d| d).count()
    }

    pub fn percent_solvent(&self) -> f64 {
        let n = self.defaulted.len();
        if n == 0 {
            return 100.0;
        }
        100.0 * (n - self.default_count()) as f64 / n as f64
    }

    /// Defaults the given banks and strips their assets. Already-defaulted
    /// ids are ignored.
    pub fn apply_initial_shock(&mut self, bank_ids: &[usize]) -> Result<()> {
        for &id in bank_ids {
            self.network.check_node(id)?;
        }
        let mut shocked: Vec<usize> = bank_ids
            .iter()
            .copied()
            .filter(|&id| !self.defaulted[id])
            .collect();
        shocked.sort_unstable();
        shocked.dedup();
        if shocked.is_empty() {
            return Ok(());
        }
        for &id in &shocked {
            self.defaulted[id] = true;
            self.sheets[id].a_ib = 0.0;
            self.sheets[id].a_m = 0.0;
        }
        self.pending.extend_from_slice(&shocked);
        self.pending.sort_unstable();
        match self.timeline.last_mut() {
            Some((0, ids)) => {
                ids.extend_from_slice(&shocked);
                ids.sort_unstable();
            }
            _ => self.timeline.push((0, shocked)),
        }
        Ok(())
    }

    /// One synchronous round, evaluating banks in id order.
    pub fn propagate_round(&mut self) -> Vec<usize> {
        let order: Vec<usize> = (0..self.defaulted.len()).collect();
        self.propagate_round_in_order(&order)
    }

    /// One synchronous round with an explicit evaluation order. Every bank
    /// is tested against the losses from the previous round only, so the
    /// result does not depend on `order`.
    pub fn propagate_round_in_order(&mut self, order: &[usize]) -> Vec<usize> {
        let loss_share = 1.0 - self.config.recovery_rate;
        for obligor in std::mem::take(&mut self.pending) {
            assert!(!self.written_off[obligor], "bank {obligor} written off twice");
            self.written_off[obligor] = true;
            for &(creditor, weight) in self.network.out_links(obligor) {
                self.lost_weight[creditor] += weight;
                self.lost_debtors[creditor] += 1;
                self.sheets[creditor].a_ib -= loss_share * weight;
            }
        }

        let mut fresh: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&bank| !self.defaulted[bank] && !self.solvent(bank))
            .collect();
        fresh.sort_unstable();
        if fresh.is_empty() {
            return fresh;
        }
        self.round += 1;
        for &bank in &fresh {
            self.defaulted[bank] = true;
        }
        self.pending = fresh.clone();
        self.timeline.push((self.round, fresh.clone()));
        fresh
    }

    fn solvent(&self, bank: usize) -> bool {
        let sheet = &self.initial[bank];
        let lost_fraction = match self.config.phi_mode {
            PhiMode::Weight if sheet.a_ib > 0.0 => self.lost_weight[bank] / sheet.a_ib,
            PhiMode::Count if self.network.in_degree(bank) > 0 => {
                self.lost_debtors[bank] as f64 / self.network.in_degree(bank) as f64
            }
            _ => 0.0,
        };
        let phi = ((1.0 - self.config.recovery_rate) * lost_fraction).clamp(0.0, 1.0);
        sheet.is_solvent_general(SolvencyParams {
            phi,
            q: self.config.q,
        })
    }

    /// Runs rounds until one produces no new default.
    pub fn run_cascade(&mut self) -> CascadeResult {
        let n = self.defaulted.len();
        for _ in 0..=n {
            if self.propagate_round().is_empty() {
                break;
            }
        }
        CascadeResult {
            defaulted: (0..n).filter(|&i| self.defaulted[i]).collect(),
            rounds: self.round,
            percent_solvent: self.percent_solvent(),
        }
    }

    pub fn write_timeline_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "round,bank_id")?;
        for (round, ids) in &self.timeline {
            for id in ids {
                writeln!(out, "{round},{id}")?;
            }
        }
        Ok(())
    }

    /// Sheet CSV of the working sheets with a `defaulted` column.
    pub fn write_final_state_csv<W: Write>(&self, out: W) -> Result<()> {
        crate::balance::write_sheets_csv(&self.sheets, Some(&self.defaulted), out)
    }
}

/// Draws `count` distinct banks uniformly from the seeded shock stream.
pub fn draw_shock(n: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count > n {
        return Err(Error::config(
            "n_shocked",
            format!("cannot shock {count} of {n} banks"),
        ));
    }
    let mut rng = rng::stream(seed, Stream::Shock);
    let mut ids = index::sample(&mut rng, n, count).into_vec();
    ids.sort_unstable();
    Ok(ids)
}
