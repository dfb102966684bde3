//! Bank balance sheets and solvency tests.
//!
//! Interbank assets and liabilities come straight from the exposure
//! network; external assets and deposits are drawn from a seeded stream.

use std::io::Write;


use crate::error::{Error, Result};
use crate::netgen::DirectedWeightedNetwork;
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BalanceSheet {
    /// Sum of incoming link weights (claims on other banks).
    pub a_ib: f64,
    /// Illiquid external assets.
    pub a_m: f64,
    /// Sum of outgoing link weights (obligations to other banks).
    pub l_ib: f64,
    /// Customer deposits.
    pub d: f64,
}

impl BalanceSheet {
    pub fn new(a_ib: f64, a_m: f64, l_ib: f64, d: f64) -> Self {
        Self { a_ib, a_m, l_ib, d }
    }

    pub fn total_assets(&self) -> f64 {
        self.a_ib + self.a_m
    }

    pub fn total_liabilities(&self) -> f64 {
        self.l_ib + self.d
    }

    /// Net assets `K = total assets - total liabilities`.
    pub fn capital_buffer(&self) -> f64 {
        self.total_assets() - self.total_liabilities()
    }

    /// Strict: `K = 0` is a default.
    pub fn is_solvent(&self) -> bool {
        self.capital_buffer() > 0.0
    }

    /// `(1 - phi) A_IB + q A_M - L_IB - D > 0`.
    pub fn is_solvent_general(&self, params: SolvencyParams) -> bool {
        (1.0 - params.phi) * self.a_ib + params.q * self.a_m - self.l_ib - self.d > 0.0
    }
}

/// Fraction `phi` of defaulted interbank claims and resale price `q` of
/// external assets. `q = 1` means no fire sales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvencyParams {
    pub phi: f64,
    pub q: f64,
}

impl Default for SolvencyParams {
    fn default() -> Self {
        Self { phi: 0.0, q: 1.0 }
    }
}

impl SolvencyParams {
    pub fn new(phi: f64, q: f64) -> Result<Self> {
        let params = Self { phi, q };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.phi) {
            return Err(Error::config("phi", format!("{} is outside [0, 1]", self.phi)));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(Error::config("q", format!("{} is outside (0, 1]", self.q)));
        }
        Ok(())
    }
}

/// Distribution of external assets `A_M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExternalAssetRule {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    /// `Uniform(lo * mu, hi * mu)` with `mu` the bank's own interbank assets,
    /// or the network mean when the bank has none (1.0 for an empty network).
    ScaledToInterbank { lo: f64, hi: f64 },
}

/// Distribution of deposits `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepositRule {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    /// Chosen so that `K = margin * total assets`. When interbank
    /// liabilities alone exceed `(1 - margin) * total assets`, deposits are
    /// zero and external assets are raised until the margin holds.
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SheetConfig {
    pub external_asset_rule: ExternalAssetRule,
    pub deposit_rule: DepositRule,
    pub target_buffer_margin: f64,
}

impl Default for SheetConfig {
    fn default() -> Self {
        Self {
            external_asset_rule: ExternalAssetRule::ScaledToInterbank { lo: 0.8, hi: 1.2 },
            deposit_rule: DepositRule::Residual,
            target_buffer_margin: DEFAULT_BUFFER_MARGIN,
        }
    }
}

/// Default capital buffer as a fraction of total assets.
pub const DEFAULT_BUFFER_MARGIN: f64 = 0.23;

fn check_range(field: &'static str, lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
        return Err(Error::config(field, format!("need 0 <= lo <= hi, got [{lo}, {hi}]")));
    }
    Ok(())
}

impl SheetConfig {
    pub fn validate(&self) -> Result<()> {
        match self.external_asset_rule {
            ExternalAssetRule::Constant(v) => check_range("external_asset_rule", v, v)?,
            ExternalAssetRule::Uniform { lo, hi }
            | ExternalAssetRule::ScaledToInterbank { lo, hi } => {
                check_range("external_asset_rule", lo, hi)?
            }
        }
        match self.deposit_rule {
            DepositRule::Constant(v) => check_range("deposit_rule", v, v)?,
            DepositRule::Uniform { lo, hi } => check_range("deposit_rule", lo, hi)?,
            DepositRule::Residual => {}
        }
        let m = self.target_buffer_margin;
        if !(0.0..1.0).contains(&m) {
            return Err(Error::config("target_buffer_margin", format!("{m} is outside [0, 1)")));
        }
        Ok(())
    }
}

fn draw<R: rand::Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// One sheet per bank, in node order.
pub fn build_sheets(
    net: &DirectedWeightedNetwork,
    cfg: &SheetConfig,
    seed: u64,
) -> Result<Vec<BalanceSheet>> {
    cfg.validate()?;
    let n = net.node_count();
    let mut rng = rng::stream(seed, Stream::Sheets);
    let total_weight: f64 = net.edges().map(|e| e.weight).sum();
    let mean_in = if total_weight > 0.0 {
        total_weight / n as f64
    } else {
        1.0
    };
    let margin = cfg.target_buffer_margin;

    let sheets = (0..n)
        .map(|i| {
            let a_ib = net.in_weight(i);
            let l_ib = net.out_weight(i);
            let mut a_m = match cfg.external_asset_rule {
                ExternalAssetRule::Constant(v) => v,
                ExternalAssetRule::Uniform { lo, hi } => draw(&mut rng, lo, hi),
                ExternalAssetRule::ScaledToInterbank { lo, hi } => {
                    let mu = if a_ib > 0.0 { a_ib } else { mean_in };
                    draw(&mut rng, lo * mu, hi * mu)
                }
            };
            let d = match cfg.deposit_rule {
                DepositRule::Constant(v) => v,
                DepositRule::Uniform { lo, hi } => draw(&mut rng, lo, hi),
                DepositRule::Residual => {
                    let total = a_ib + a_m;
                    let d = (1.0 - margin) * total - l_ib;
                    if d >= 0.0 {
                        d
                    } else {
                        a_m = l_ib / (1.0 - margin) - a_ib;
                        0.0
                    }
                }
            };
            BalanceSheet { a_ib, a_m, l_ib, d }
        })
        .collect();
    Ok(sheets)
}

pub const SHEET_CSV_HEADER: &str = "bank_id,a_ib,a_m,l_ib,d,k,solvent";

/// Writes `bank_id,a_ib,a_m,l_ib,d,k,solvent`, plus a trailing `defaulted`
/// column when flags are given.
pub fn write_sheets_csv<W: Write>(
    sheets: &[BalanceSheet],
    defaulted: Option<&[bool]>,
    mut out: W,
) -> Result<()> {
    match defaulted {
        Some(_) => writeln!(out, "{SHEET_CSV_HEADER},defaulted")?,
        None => writeln!(out, "{SHEET_CSV_HEADER}")?,
    }
    for (i, s) in sheets.iter().enumerate() {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            i,
            s.a_ib,
            s.a_m,
            s.l_ib,
            s.d,
            s.capital_buffer(),
            s.is_solvent()
        )?;
        match defaulted {
            Some(flags) => writeln!(out, ",{}", flags[i])?,
            None => writeln!(out)?,
        }
    }
    Ok(())
}
