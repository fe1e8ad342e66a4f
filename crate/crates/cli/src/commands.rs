use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use vendi_core::bandwidth::{log_grid, select_bandwidth, BandwidthConfig, BandwidthSelection};
use vendi_core::decompose::{mode_decomposition, ModeReport};
use vendi_core::ingest::{load_embeddings, load_labels, pair, EmbeddingSet, Format, PairedDataset};
use vendi_core::oracle::scenarios::{
    mode_growth, substitution, theorem1_sweep, ModeGrowthConfig, Scenario, SubstitutionConfig,
    Theorem1Scenario,
};
use vendi_core::scores::{group_conditional_report, GroupScoreReport};
use vendi_core::{score_report, ScoreReport, VendiError};

use crate::output::{emit, to_json, Cell, Sig17, Table};
use crate::{BandwidthArgs, DecomposeArgs, OutputFormat, PairInput, Sigma, SimulateArgs};

fn load(path: &Path, format: Format) -> Result<EmbeddingSet> {
    load_embeddings(path, format).with_context(|| format!("loading {}", path.display()))
}

fn resolve_sigma(sigma: Sigma, set: &EmbeddingSet, alpha: f64, seed: u64) -> Result<f64> {
    Ok(match sigma {
        Sigma::Fixed(v) => v,
        Sigma::Auto => {
            let config = BandwidthConfig {
                alpha,
                seed,
                ..Default::default()
            };
            let sel = select_bandwidth(set, &config)?;
            if !sel.passed {
                eprintln!(
                    "warning: no bandwidth candidate for {} met the variance threshold; using {}",
                    set.source_label, sel.sigma
                );
            }
            sel.sigma
        }
    })
}

struct Loaded {
    data: PairedDataset,
    sigma_x: f64,
    sigma_t: f64,
}

fn load_pair(input: &PairInput, labels: Option<Vec<usize>>) -> Result<Loaded> {
    let x = load(&input.x, input.format)?;
    let t = load(&input.t, input.format)?;
    let data = pair(x, t, labels)?;
    let sigma_x = resolve_sigma(input.sigma_x, &data.x, input.alpha, input.seed)?;
    let sigma_t = resolve_sigma(input.sigma_t, &data.t, input.alpha, input.seed)?;
    Ok(Loaded {
        data,
        sigma_x,
        sigma_t,
    })
}

#[derive(Serialize)]
struct ScoreJson {
    order: Sig17,
    n: usize,
    sigma_x: Sig17,
    sigma_t: Sig17,
    vendi_x: Sig17,
    vendi_t: Sig17,
    conditional_vendi: Sig17,
    information_vendi: Sig17,
    h_x: Sig17,
    h_t: Sig17,
    h_xt: Sig17,
    h_x_given_t: Sig17,
    i_xt: Sig17,
}

impl From<&ScoreReport> for ScoreJson {
    fn from(r: &ScoreReport) -> Self {
        Self {
            order: Sig17(r.order),
            n: r.n,
            sigma_x: Sig17(r.sigma_x),
            sigma_t: Sig17(r.sigma_t),
            vendi_x: Sig17(r.vendi_x),
            vendi_t: Sig17(r.vendi_t),
            conditional_vendi: Sig17(r.conditional_vendi),
            information_vendi: Sig17(r.information_vendi),
            h_x: Sig17(r.h_x),
            h_t: Sig17(r.h_t),
            h_xt: Sig17(r.h_xt),
            h_x_given_t: Sig17(r.h_x_given_t),
            i_xt: Sig17(r.i_xt),
        }
    }
}

pub fn score(input: &PairInput, out: Option<&Path>, format: OutputFormat) -> Result<()> {
    let l = load_pair(input, None)?;
    let r = score_report(&l.data, l.sigma_x, l.sigma_t, input.alpha)?;
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    let bytes = match format {
        OutputFormat::Json => to_json(&ScoreJson::from(&r))?,
        OutputFormat::Csv => {
            let mut table = Table::new(vec![
                "order",
                "n",
                "sigma_x",
                "sigma_t",
                "vendi_x",
                "vendi_t",
                "conditional_vendi",
                "information_vendi",
                "h_x",
                "h_t",
                "h_xt",
                "h_x_given_t",
                "i_xt",
            ]);
            table.push(vec![
                Cell::Float(r.order),
                Cell::Int(r.n),
                Cell::Float(r.sigma_x),
                Cell::Float(r.sigma_t),
                Cell::Float(r.vendi_x),
                Cell::Float(r.vendi_t),
                Cell::Float(r.conditional_vendi),
                Cell::Float(r.information_vendi),
                Cell::Float(r.h_x),
                Cell::Float(r.h_t),
                Cell::Float(r.h_xt),
                Cell::Float(r.h_x_given_t),
                Cell::Float(r.i_xt),
            ]);
            table.to_bytes()
        }
    };
    emit(out, &bytes)
}

/// `auto`, `a,b,c`, or `lo:hi:count`.
fn parse_grid(spec: &str) -> Result<Option<Vec<f64>>> {
    let bad = || VendiError::Param(format!("bad grid spec '{spec}'"));
    if spec == "auto" {
        return Ok(None);
    }
    if let Some((lo, rest)) = spec.split_once(':') {
        let (hi, len) = rest.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let len: usize = len.trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi > lo && len >= 1) {
            return Err(bad().into());
        }
        return Ok(Some(log_grid(lo, hi, len)));
    }
    let values = spec
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(values))
}

#[derive(Serialize)]
struct BandwidthJson {
    sigma: Sig17,
    candidates: Vec<Sig17>,
    variances: Vec<Sig17>,
    threshold: Sig17,
    trials: usize,
    subsample_size: usize,
    seed: u64,
    passed: bool,
}

impl From<&BandwidthSelection> for BandwidthJson {
    fn from(s: &BandwidthSelection) -> Self {
        Self {
            sigma: Sig17(s.sigma),
            candidates: s.candidates.iter().copied().map(Sig17).collect(),
            variances: s.variances.iter().copied().map(Sig17).collect(),
            threshold: Sig17(s.threshold),
            trials: s.trials,
            subsample_size: s.subsample_size,
            seed: s.seed,
            passed: s.passed,
        }
    }
}

pub fn bandwidth(a: &BandwidthArgs, format: OutputFormat) -> Result<()> {
    let candidates = parse_grid(&a.grid)?;
    let x = load(&a.x, a.format)?;
    let config = BandwidthConfig {
        alpha: a.alpha,
        candidates,
        trials: a.trials,
        subsample_size: a.subsample,
        threshold: a.threshold,
        seed: a.seed,
        ..Default::default()
    };
    let sel = select_bandwidth(&x, &config)?;
    let bytes = match format {
        OutputFormat::Json => to_json(&BandwidthJson::from(&sel))?,
        OutputFormat::Csv => {
            let mut table = Table::new(vec!["sigma", "variance"]);
            for (s, v) in sel.candidates.iter().zip(&sel.variances) {
                table.push(vec![Cell::Float(*s), Cell::Float(*v)]);
            }
            table.to_bytes()
        }
    };
    emit(a.out.as_deref(), &bytes)
}

#[derive(Serialize)]
struct ModeJson {
    mode_index: usize,
    eigenvalue: Sig17,
    diversity: Sig17,
    vendi: Sig17,
    degenerate: bool,
    top_samples: Vec<usize>,
}

impl From<&ModeReport> for ModeJson {
    fn from(m: &ModeReport) -> Self {
        Self {
            mode_index: m.mode_index,
            eigenvalue: Sig17(m.text_eigenvalue),
            diversity: Sig17(m.mode_diversity),
            vendi: Sig17(m.mode_diversity.exp()),
            degenerate: m.degenerate,
            top_samples: m.top_samples.clone(),
        }
    }
}

#[derive(Serialize)]
struct GroupJson {
    group: usize,
    weight: Sig17,
    entropy: Sig17,
    vendi: Sig17,
}

#[derive(Serialize)]
struct GroupReportJson {
    order: Sig17,
    aggregate: Sig17,
    conditional_entropy: Sig17,
    gap: Sig17,
    groups: Vec<GroupJson>,
}

impl From<&GroupScoreReport> for GroupReportJson {
    fn from(r: &GroupScoreReport) -> Self {
        Self {
            order: Sig17(r.order),
            aggregate: Sig17(r.aggregate),
            conditional_entropy: Sig17(r.conditional_entropy_joint),
            gap: Sig17(r.gap()),
            groups: r
                .per_group
                .iter()
                .map(|g| GroupJson {
                    group: g.group,
                    weight: Sig17(g.weight),
                    entropy: Sig17(g.entropy),
                    vendi: Sig17(g.vendi),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct DecomposeJson {
    order: Sig17,
    sigma_x: Sig17,
    sigma_t: Sig17,
    modes: Vec<ModeJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    groups: Option<GroupReportJson>,
}

pub fn decompose(a: &DecomposeArgs, format: OutputFormat) -> Result<()> {
    let labels = a
        .labels
        .as_deref()
        .map(|p| load_labels(p).with_context(|| format!("loading {}", p.display())))
        .transpose()?;
    let has_labels = labels.is_some();
    let l = load_pair(&a.input, labels)?;
    let alpha = a.input.alpha;
    let modes = mode_decomposition(&l.data, l.sigma_x, l.sigma_t, a.modes, alpha, a.top_k)?;
    let groups = if has_labels {
        Some(group_conditional_report(
            &l.data, l.sigma_x, l.sigma_t, alpha, None,
        )?)
    } else {
        None
    };
    let bytes = match format {
        OutputFormat::Json => to_json(&DecomposeJson {
            order: Sig17(alpha),
            sigma_x: Sig17(l.sigma_x),
            sigma_t: Sig17(l.sigma_t),
            modes: modes.iter().map(ModeJson::from).collect(),
            groups: groups.as_ref().map(GroupReportJson::from),
        })?,
        OutputFormat::Csv => {
            let mut table = Table::new(vec![
                "mode_index",
                "eigenvalue",
                "diversity",
                "vendi",
                "degenerate",
            ]);
            for m in &modes {
                table.push(vec![
                    Cell::Int(m.mode_index),
                    Cell::Float(m.text_eigenvalue),
                    Cell::Float(m.mode_diversity),
                    Cell::Float(m.mode_diversity.exp()),
                    Cell::Bool(m.degenerate),
                ]);
            }
            table.to_bytes()
        }
    };
    emit(a.out.as_deref(), &bytes)
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let table = match a.scenario {
        Scenario::ModeGrowthSpecified | Scenario::ModeGrowthUnspecified => {
            let informative = a.scenario == Scenario::ModeGrowthSpecified;
            let rows = mode_growth(informative, a.seed, &ModeGrowthConfig::default())?;
            let mut t = Table::new(vec![
                "num_modes",
                "n",
                "vendi",
                "conditional_vendi",
                "information_vendi",
            ]);
            for r in rows {
                t.push(vec![
                    Cell::Int(r.num_modes),
                    Cell::Int(r.n),
                    Cell::Float(r.vendi),
                    Cell::Float(r.conditional_vendi),
                    Cell::Float(r.information_vendi),
                ]);
            }
            t
        }
        Scenario::Substitution => {
            let rows = substitution(a.seed, &SubstitutionConfig::default())?;
            let mut t = Table::new(vec![
                "rate",
                "vendi_x",
                "vendi_t",
                "conditional_vendi",
                "information_vendi",
            ]);
            for r in rows {
                t.push(vec![
                    Cell::Float(r.rate),
                    Cell::Float(r.vendi_x),
                    Cell::Float(r.vendi_t),
                    Cell::Float(r.conditional_vendi),
                    Cell::Float(r.information_vendi),
                ]);
            }
            t
        }
        Scenario::Theorem1 => {
            let rows = theorem1_sweep(a.seed, &Theorem1Scenario::default())?;
            let mut t = Table::new(vec![
                "num_modes",
                "n",
                "conditional_entropy",
                "aggregate",
                "gap",
                "bound",
                "vacuous",
                "pass",
            ]);
            for r in rows {
                t.push(vec![
                    Cell::Int(r.num_modes),
                    Cell::Int(r.n),
                    Cell::Float(r.conditional_entropy),
                    Cell::Float(r.aggregate),
                    Cell::Float(r.gap),
                    Cell::Float(r.bound),
                    Cell::Bool(r.vacuous),
                    Cell::Bool(r.pass),
                ]);
            }
            t
        }
    };
    emit(a.out.as_deref(), &table.to_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        assert_eq!(parse_grid("auto").unwrap(), None);
        assert_eq!(parse_grid("0.5, 1,2").unwrap(), Some(vec![0.5, 1.0, 2.0]));
        let g = parse_grid("0.01:10:4").unwrap().unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[1] - 0.1).abs() < 1e-12 && (g[3] - 10.0).abs() < 1e-12);
        for bad in ["", "1:2", "2:1:3", "a,b", "0:1:3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }
}
