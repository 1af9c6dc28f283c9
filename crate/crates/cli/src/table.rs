//! The time/approximation tradeoff table: one row per (n, gamma) cell with
//! every cost formula in log2, computed through the high-precision path so
//! printed values are reproducible bit-for-bit.

use anyhow::{bail, Result};
use latlab::formulas::{self, Ratio64};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct TradeoffCell {
    pub n: u64,
    pub gamma: String,
    pub gamma_value: f64,
    /// Ball-shift protocol rounds, general norm: 10 n (1 - 1/gamma)^{-n}.
    pub log2_gg_rounds_general: f64,
    /// Euclidean clause: 10 n^{3/2} (1 - 1/gamma^2)^{-(n+1)/2}.
    pub log2_gg_rounds_l2: f64,
    /// Odd k nearest to 16 n / gamma^2 (verifier factor ~ 4 sqrt(n/k)).
    pub conp_k: u32,
    pub log2_conp_witness: f64,
    pub log2_conp_eps: f64,
    pub log2_conp_fw_threshold: f64,
    /// Verifier time as base^{2k}; the true exponent is 2k + O(1) with the
    /// O(1) unresolved, so one extra exponent unit adds log2_conp_time_base.
    pub log2_conp_time_2k: f64,
    pub log2_conp_time_base: f64,
    /// coMA wrapper at this gamma: alpha^2 = beta^2 = 2/gamma.
    pub log2_coma_witness: f64,
    pub log2_coma_trials: f64,
    pub log2_coma_threshold: f64,
}

pub fn build_table(ns: &[u64], gammas: &[Ratio64]) -> Result<Vec<TradeoffCell>> {
    let mut cells = Vec::new();
    for &n in ns {
        for &gamma in gammas {
            cells.push(build_cell(n, gamma)?);
        }
    }
    Ok(cells)
}

pub fn build_cell(n: u64, gamma: Ratio64) -> Result<TradeoffCell> {
    if n < 2 {
        bail!("table needs n >= 2");
    }
    let gg = formulas::gg_costs(n, gamma)?;
    let k = formulas::conp_k_for_gamma(n, gamma.to_f64());
    let conp = formulas::conp_costs(n, k)?;
    let alpha_sq = formulas::coma_alpha_sq_for_gamma(gamma)?;
    let coma = formulas::coma_costs(n, alpha_sq, alpha_sq)?;
    Ok(TradeoffCell {
        n,
        gamma: format!("{}/{}", gamma.num, gamma.den),
        gamma_value: gamma.to_f64(),
        log2_gg_rounds_general: gg.log2_rounds_general,
        log2_gg_rounds_l2: gg.log2_rounds_l2,
        conp_k: k,
        log2_conp_witness: conp.log2_witness,
        log2_conp_eps: conp.log2_eps,
        log2_conp_fw_threshold: conp.log2_fw_threshold,
        log2_conp_time_2k: conp.log2_time_2k,
        log2_conp_time_base: conp.log2_time_base,
        log2_coma_witness: coma.log2_witness,
        log2_coma_trials: coma.log2_trials,
        log2_coma_threshold: coma.log2_threshold,
    })
}

pub fn to_csv(cells: &[TradeoffCell]) -> String {
    let mut out = String::from(
        "n,gamma,gamma_value,log2_gg_rounds_general,log2_gg_rounds_l2,conp_k,\
         log2_conp_witness,log2_conp_eps,log2_conp_fw_threshold,log2_conp_time_2k,\
         log2_conp_time_base,log2_coma_witness,log2_coma_trials,log2_coma_threshold\n",
    );
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            c.n,
            c.gamma,
            c.gamma_value,
            c.log2_gg_rounds_general,
            c.log2_gg_rounds_l2,
            c.conp_k,
            c.log2_conp_witness,
            c.log2_conp_eps,
            c.log2_conp_fw_threshold,
            c.log2_conp_time_2k,
            c.log2_conp_time_base,
            c.log2_coma_witness,
            c.log2_coma_trials,
            c.log2_coma_threshold,
        ));
    }
    out
}
