//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Every export returns a JSON string; failures come back as `{"error": …}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use ising_ge::analysis::{porter_thomas_sample, run_ensemble, EnsembleConfig, TimePolicy};
use ising_ge::{spectral_scales, LatticeSpec, ModelParams, Result, StateDesignator};

/// Largest lattice the page will simulate.
pub const MAX_DEMO_QUBITS: usize = 10;

fn respond(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// Band and width estimates plus the regime for the central band.
#[wasm_bindgen]
pub fn scales(n: usize, splitting: f64, delta: f64, coupling: f64) -> String {
    respond((|| {
        let p = ModelParams::new(splitting, delta, coupling)?;
        let s = spectral_scales(&p, n, n / 2)?;
        Ok(json!({
            "N_B": s.band_degeneracy,
            "E_B": s.band_energy,
            "Delta_B": s.band_width,
            "Gamma_F": s.gamma_fgr,
            "Gamma_E": s.gamma_ergodic,
            "J_c": s.j_critical,
            "J_E": s.j_ergodic,
            "regime": s.regime.as_str(),
        }))
    })())
}

/// Disorder-averaged `P1`, `P2` and fidelity on a `2 × n/2` ladder.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn purity_curves(
    n: usize,
    splitting: f64,
    delta: f64,
    coupling: f64,
    state: &str,
    realizations: usize,
    t_max: f64,
    samples: usize,
    seed: u64,
) -> String {
    respond((|| {
        if n > MAX_DEMO_QUBITS {
            return Err(ising_ge::Error::InvalidParams(format!(
                "the demo is limited to n <= {MAX_DEMO_QUBITS}"
            )));
        }
        let mut cfg = EnsembleConfig::new(
            LatticeSpec::ladder(n)?,
            ModelParams::new(splitting, delta, coupling)?,
            state.parse::<StateDesignator>()?,
        );
        cfg.time = TimePolicy::Fixed { t_max, samples };
        cfg.realizations = realizations;
        cfg.seed = seed;
        let r = run_ensemble(&cfg)?;
        Ok(json!({
            "t": r.times,
            "P1": r.p1.mean,
            "P2": r.p2.mean,
            "F": r.fidelity.mean,
            "regime": r.scales.regime.as_str(),
        }))
    })())
}

/// Mean `ξ` and `P1` over random real superpositions of `n_inf` central-band states.
#[wasm_bindgen]
pub fn porter_thomas(n_inf: usize, draws: usize, seed: u64) -> String {
    respond((|| {
        let pt = porter_thomas_sample(n_inf, draws, seed)?;
        Ok(json!({
            "qubits": pt.qubits,
            "xi": pt.xi.mean,
            "xi_sem": pt.xi.sem,
            "xi_pred": 3.0 / n_inf as f64,
            "P1": pt.p1.mean,
            "P1_sem": pt.p1.sem,
            "P1_pred": 2.0 / n_inf as f64,
        }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn scales_report_regime() {
        let v = parse(scales(10, 1.0, 0.1, 0.1));
        assert_eq!(v["regime"], "ergodic");
        assert_eq!(v["N_B"], 252.0);
    }

    #[test]
    fn curves_start_pure() {
        let v = parse(purity_curves(6, 1.0, 0.1, 0.05, "central", 2, 20.0, 11, 1));
        assert_eq!(v["t"].as_array().unwrap().len(), 11);
        assert!((v["P1"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn errors_are_reported_as_json() {
        let v = parse(purity_curves(12, 1.0, 0.1, 0.05, "central", 2, 20.0, 11, 1));
        assert!(v["error"].as_str().unwrap().contains("limited"));
        assert!(parse(scales(10, 1.0, -1.0, 0.1))["error"].is_string());
    }

    #[test]
    fn porter_thomas_single_state() {
        let v = parse(porter_thomas(1, 5, 0));
        assert!((v["xi"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}
