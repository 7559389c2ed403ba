//! Block Hamiltonian DQI subcommand.

use multidqi::hamdqi::{
    dense_rho_p, gibbs_distance, ham_coefficients, protocol_simulation, random_commuting_hamiltonian, trace_norm,
    DENSE_TOLERANCE,
};
use multidqi::{BlockPauliHamiltonian, Error, Polynomial};

use crate::config::{join, ExperimentConfig};
use crate::output::{num, Csv, RunOutput};
use crate::{CliResult, HamdqiAction};

pub fn hamdqi(action: HamdqiAction, config: &mut ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let (seed, cap) = (config.seed, config.cap);
    let p = &mut config.params;
    let hamiltonian = match p.optional("hamiltonian") {
        Some(path) => BlockPauliHamiltonian::parse(&std::fs::read_to_string(path)?)?,
        None => {
            let qubits = p.usize("qubits", 4)?;
            let sizes = p.usize_list("sizes", &[2, 2])?;
            let weights = p.f64_list("g", &[1.0, 1.5])?;
            let independent = p.string("independent", "true")? == "true";
            random_commuting_hamiltonian(qubits, &sizes, &weights, independent, seed)?
        }
    };
    hamiltonian.commutation_check()?;
    out.write("hamiltonian.txt", &hamiltonian.to_text())?;
    match action {
        HamdqiAction::Coefficients => {
            out.set_action("coefficients");
            let poly = Polynomial::new(p.f64_list("poly", &[0.5, 1.0, 0.25])?)?;
            let coeffs = ham_coefficients(&hamiltonian, &poly, cap)?;
            let mut csv = Csv::new(&["j_tuple", "r_exact", "r", "gamma"]);
            for (k, j) in coeffs.index.iter().enumerate() {
                csv.row(&[
                    j.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
                    coeffs.exact[k].to_string(),
                    num(coeffs.r[k]),
                    num(coeffs.gamma[k]),
                ]);
            }
            out.csv("coefficients.csv", csv)?;
            out.note("normalization", num(coeffs.normalization));
            out.note("degree_tuples", coeffs.index.len());
        }
        HamdqiAction::Protocol => {
            out.set_action("protocol");
            let poly = Polynomial::new(p.f64_list("poly", &[0.5, 1.0, 0.25])?)?;
            let dense = dense_rho_p(&hamiltonian, &poly, cap)?;
            let protocol = protocol_simulation(&hamiltonian, &poly, cap)?;
            let distance = 0.5 * trace_norm(&(&dense.rho - &protocol.rho));
            out.note("path_gap", format!("{:e}", dense.path_gap));
            out.note("trace_distance", format!("{distance:e}"));
            out.note("support", protocol.support);
            if !(distance <= DENSE_TOLERANCE) {
                return Err(Error::ToleranceExceeded {
                    what: "protocol against dense reference".into(),
                    measured: distance,
                    tolerance: DENSE_TOLERANCE,
                }
                .into());
            }
            out.note("verdict", "PASS");
        }
        HamdqiAction::Gibbs => {
            out.set_action("gibbs");
            let betas = p.f64_list("beta", &[0.25, 0.5, 1.0])?;
            let delta = p.f64("delta", 0.1)?;
            let mut csv = Csv::new(&["beta", "degree", "norm", "distance", "delta"]);
            for &beta in &betas {
                let report = gibbs_distance(&hamiltonian, beta, delta)?;
                csv.row(&[
                    num(beta),
                    report.degree.to_string(),
                    num(report.norm),
                    num(report.distance),
                    num(report.delta),
                ]);
            }
            out.csv("gibbs.csv", csv)?;
            out.note("betas", join(&betas));
            out.note("verdict", "PASS");
        }
    }
    Ok(())
}
