//! Published reference scores (mean, SD over 10 trials) and the markdown
//! comparison report. Informational only; nothing here decides pass/fail.

use std::fmt::Write;

use super::{CellKey, CellSummary, Stat};
use crate::agent::Variant;
use crate::game::CommunicationMode;
use crate::metrics::kappa_band;

use CommunicationMode::{AllRejection as R, GibbsTopline as G, MH};
use Variant::{H2H, T2T};

/// Reference `(ari_a, ari_b, kappa)` for one grid cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceRow {
    pub variant: Variant,
    pub method: CommunicationMode,
    pub condition: u8,
    pub ari_a: (f64, f64),
    pub ari_b: (f64, f64),
    pub kappa: Option<(f64, f64)>,
}

const fn row(
    variant: Variant,
    method: CommunicationMode,
    condition: u8,
    ari_a: (f64, f64),
    ari_b: (f64, f64),
    kappa: Option<(f64, f64)>,
) -> ReferenceRow {
    ReferenceRow {
        variant,
        method,
        condition,
        ari_a,
        ari_b,
        kappa,
    }
}

pub const REFERENCE: [ReferenceRow; 24] = [
    row(T2T, MH, 1, (0.881, 0.031), (0.886, 0.035), Some((0.947, 0.046))),
    row(T2T, R, 1, (0.883, 0.035), (0.886, 0.039), Some((0.004, 0.019))),
    row(T2T, G, 1, (0.884, 0.033), (0.886, 0.031), None),
    row(H2H, MH, 1, (0.881, 0.031), (0.888, 0.033), Some((0.999, 0.003))),
    row(H2H, R, 1, (0.882, 0.037), (0.889, 0.037), Some((0.004, 0.032))),
    row(H2H, G, 1, (0.881, 0.031), (0.882, 0.042), None),
    row(T2T, MH, 2, (0.888, 0.033), (0.708, 0.009), Some((0.954, 0.024))),
    row(T2T, R, 2, (0.878, 0.037), (0.650, 0.025), Some((0.001, 0.012))),
    row(T2T, G, 2, (0.880, 0.033), (0.706, 0.009), None),
    row(H2H, MH, 2, (0.879, 0.033), (0.704, 0.006), Some((0.996, 0.011))),
    row(H2H, R, 2, (0.885, 0.053), (0.649, 0.035), Some((-0.010, 0.022))),
    row(H2H, G, 2, (0.881, 0.047), (0.705, 0.004), None),
    row(T2T, MH, 3, (0.882, 0.055), (0.453, 0.029), Some((0.931, 0.039))),
    row(T2T, R, 3, (0.874, 0.037), (0.342, 0.019), Some((-0.011, 0.027))),
    row(T2T, G, 3, (0.880, 0.029), (0.451, 0.035), None),
    row(H2H, MH, 3, (0.883, 0.070), (0.444, 0.016), Some((1.000, 0.000))),
    row(H2H, R, 3, (0.876, 0.031), (0.348, 0.018), Some((-0.011, 0.015))),
    row(H2H, G, 3, (0.881, 0.031), (0.447, 0.020), None),
    row(T2T, MH, 4, (0.710, 0.017), (0.460, 0.042), Some((0.943, 0.043))),
    row(T2T, R, 4, (0.658, 0.027), (0.348, 0.023), Some((-0.006, 0.023))),
    row(T2T, G, 4, (0.706, 0.015), (0.460, 0.014), None),
    row(H2H, MH, 4, (0.704, 0.010), (0.450, 0.015), Some((0.992, 0.012))),
    row(H2H, R, 4, (0.658, 0.024), (0.352, 0.011), Some((0.004, 0.024))),
    row(H2H, G, 4, (0.705, 0.009), (0.453, 0.023), None),
];

pub fn reference_for(key: &CellKey) -> Option<&'static ReferenceRow> {
    REFERENCE
        .iter()
        .find(|r| r.variant == key.variant && r.method == key.method && r.condition == key.condition.number())
}

fn cell(measured: Option<Stat>, reference: Option<(f64, f64)>) -> String {
    match (measured, reference) {
        (Some(m), Some((rm, rs))) => {
            format!("{:.3} ({:.3}) | {rm:.3} ({rs:.3}) | {:+.3}", m.mean, m.sd, m.mean - rm)
        }
        (Some(m), None) => format!("{:.3} ({:.3}) | -- | --", m.mean, m.sd),
        (None, Some((rm, rs))) => format!("-- | {rm:.3} ({rs:.3}) | --"),
        (None, None) => "-- | -- | --".to_string(),
    }
}

/// Markdown table of measured vs. reference scores, one row per summarized cell.
pub fn compare_to_reference(summaries: &[CellSummary]) -> String {
    let mut out = String::new();
    out.push_str(
        "| model | method | cond | ARI A | ref | diff | ARI B | ref | diff | kappa | ref | diff | agreement |\n",
    );
    out.push_str("|---|---|---|---|---|---|---|---|---|---|---|---|---|\n");
    let mut sorted: Vec<&CellSummary> = summaries.iter().collect();
    sorted.sort_by_key(|s| (s.key.condition, s.key.variant, s.key.method));
    for s in sorted {
        let reference = reference_for(&s.key);
        let band = s.kappa.map(|k| kappa_band(k.mean)).unwrap_or("--");
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            s.key.variant,
            s.key.method,
            s.key.condition,
            cell(Some(s.ari_a), reference.map(|r| r.ari_a)),
            cell(Some(s.ari_b), reference.map(|r| r.ari_b)),
            cell(s.kappa, reference.and_then(|r| r.kappa)),
            band,
        );
    }
    out
}
