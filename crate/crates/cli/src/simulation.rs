//! State simulations, concentration experiments and decoders.

use std::collections::HashSet;

use multidqi::decoding::{
    bm_decode, failure_profile, imperfect_expectation_monte_carlo, parse_failure_set, theorem_bound,
    weighted_prange, BoundedDistanceDecoder, FailureAnnotatedDecoder, ReedSolomonParams,
};
use multidqi::simulator::{
    basis_states, concentration_experiment, dqi_state_direct, exact_expectation, fourier_construction, gram_matrix,
    StateVector,
};
use multidqi::spectral::{expected_value, DistanceHypothesis, SpectralMatrix};
use multidqi::{BlockStructure, Error, PrimeField, WeightedMaxLinsatInstance};

use crate::config::{join, ExperimentConfig, Params};
use crate::output::{num, Csv, RunOutput};
use crate::{CliError, CliResult, DecodeAction, SimulateAction};

/// Agreement required between the two state constructions.
const AGREEMENT_TOLERANCE: f64 = 1e-9;

struct Setup {
    inst: WeightedMaxLinsatInstance,
    budget: usize,
    dual_distance: Option<usize>,
}

fn random_instance(p: &mut Params, seed: u64, cap: u64, defaults: (u32, usize, usize, usize)) -> CliResult<Setup> {
    let modulus = p.u32("p", defaults.0)?;
    let n = p.usize("n", defaults.1)?;
    let m = p.usize("m", defaults.2)?;
    let budget = p.usize("l", defaults.3)?;
    let r = p.usize("r", (modulus as usize / 2).max(1))?;
    let sizes = p.usize_list("sizes", &[m / 2, m - m / 2])?;
    let weights = p.f64_list("g", &[1.0, 2.0])?;
    if sizes.iter().sum::<usize>() != m {
        return Err(CliError::Usage(format!("block sizes {} do not sum to m = {m}", join(&sizes))));
    }
    let blocks = BlockStructure::contiguous(&sizes, weights)?;
    let inst = WeightedMaxLinsatInstance::random(PrimeField::new(modulus)?, n, blocks, r, seed)?;
    let dual_distance = inst.matrix().dual_min_distance(cap)?;
    Ok(Setup {
        inst,
        budget,
        dual_distance,
    })
}

fn distance_notes(setup: &Setup, strict: bool, out: &mut RunOutput) -> CliResult<bool> {
    let holds = DistanceHypothesis::Expectation.holds(setup.budget, setup.dual_distance);
    out.note(
        "dual_distance",
        setup.dual_distance.map_or("none (trivial dual)".to_string(), |d| d.to_string()),
    );
    out.note("hypothesis_2l+1<d", holds);
    if strict {
        DistanceHypothesis::Expectation.check(setup.budget, setup.dual_distance)?;
    }
    Ok(holds)
}

fn report_csv(rows: &[(&str, f64)]) -> Csv {
    let mut csv = Csv::new(&["quantity", "value"]);
    for (k, v) in rows {
        csv.row(&[k.to_string(), num(*v)]);
    }
    csv
}

pub fn simulate(action: SimulateAction, config: &mut ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let (seed, cap, strict) = (config.seed, config.cap, config.strict_distance);
    let setup = random_instance(&mut config.params, seed, cap, (2, 8, 12, 2))?;
    let holds = distance_notes(&setup, strict, out)?;
    let inst = &setup.inst;
    let blocks = inst.blocks();
    let stats = inst.centered_stats();
    let matrix = SpectralMatrix::for_blocks(&blocks.sizes(), blocks.weights(), setup.budget, stats.skew, cap)?;
    match action {
        SimulateAction::CrossCheck => {
            out.set_action("cross-check");
            let w = matrix.lambda_max()?.vector;
            let direct = dqi_state_direct(inst, matrix.index(), &w, cap)?;
            let decoder = BoundedDistanceDecoder::new(inst.matrix(), setup.budget, cap)?;
            let fourier = fourier_construction(inst, matrix.index(), &w, &decoder, cap)?;
            let gap = direct.distance_up_to_phase(&fourier.state);
            let rows = [
                ("amplitude_gap", gap),
                ("kept_norm_sq", fourier.kept_norm_sq),
                ("expectation_direct", exact_expectation(inst, &direct)?),
                ("expectation_fourier", exact_expectation(inst, &fourier.state)?),
                ("spectral_prediction", expected_value(inst, &matrix, &w, false, cap)?),
            ];
            out.csv("cross_check.csv", report_csv(&rows))?;
            out.write("state_direct.txt", &direct.dump())?;
            out.note("amplitude_gap", format!("{gap:e}"));
            let agree = gap <= AGREEMENT_TOLERANCE;
            if holds && !agree {
                return Err(Error::ToleranceExceeded {
                    what: "direct and Fourier constructions".into(),
                    measured: gap,
                    tolerance: AGREEMENT_TOLERANCE,
                }
                .into());
            }
            out.note("verdict", if agree { "PASS" } else { "DIFFER (distance hypothesis fails)" });
        }
        SimulateAction::Expectation => {
            out.set_action("expectation");
            let w = matrix.lambda_max()?.vector;
            let state = dqi_state_direct(inst, matrix.index(), &w, cap)?;
            let exact = exact_expectation(inst, &state)?;
            let predicted = expected_value(inst, &matrix, &w, strict, cap)?;
            let uniform = exact_expectation(inst, &StateVector::uniform(inst.p() as u32, inst.n()))?;
            let rows = [
                ("exact", exact),
                ("predicted", predicted),
                ("uniform", uniform),
                ("abs_error", (exact - predicted).abs()),
            ];
            out.csv("expectation.csv", report_csv(&rows))?;
            for (k, v) in rows {
                out.note(k, num(v));
            }
        }
        SimulateAction::Orthogonality => {
            out.set_action("orthogonality");
            let states = basis_states(inst, matrix.index(), cap)?;
            let gram = gram_matrix(&states);
            let mut csv = Csv::new(&["row", "col", "re", "im"]);
            let mut deviation: f64 = 0.0;
            for (a, row) in gram.iter().enumerate() {
                for (b, v) in row.iter().enumerate() {
                    let target = if a == b { 1.0 } else { 0.0 };
                    deviation = deviation.max((v.re - target).abs().max(v.im.abs()));
                    csv.row(&[a.to_string(), b.to_string(), num(v.re), num(v.im)]);
                }
            }
            out.csv("gram.csv", csv)?;
            out.note("max_deviation", format!("{deviation:e}"));
        }
    }
    Ok(())
}

pub fn concentration(config: &mut ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let (seed, cap) = (config.seed, config.cap);
    let p = &mut config.params;
    let m = p.usize("m", 16)?;
    let weights = p.f64_list("g", &[1.0, 2.0])?;
    let half = m / 2;
    let peaks = p.usize_list("peaks", &[half.div_ceil(3); 2])?;
    let widths = p.usize_list("widths", &[half.div_ceil(2); 2])?;
    let epsilon = p.f64("epsilon", 0.15)?;
    let blocks = BlockStructure::contiguous(&[half, m - half], weights)?;
    let field = PrimeField::new(2)?;
    // Square full-rank B: the dual code is trivial.
    let inst = (0..64)
        .map(|k| WeightedMaxLinsatInstance::random(field, m, blocks.clone(), 1, seed.wrapping_add(k)))
        .collect::<Result<Vec<_>, Error>>()?
        .into_iter()
        .find(|inst| inst.matrix().rank() == m)
        .ok_or_else(|| CliError::Usage("no full-rank instance within 64 seeds".into()))?;
    let report = concentration_experiment(&inst, &peaks, &widths, epsilon, cap)?;
    let mut csv = Csv::new(&["epsilon", "mass", "count", "conditional_mean", "predicted", "centers"]);
    csv.row(&[
        num(report.epsilon),
        num(report.mass),
        report.count.to_string(),
        num(report.conditional_mean),
        num(report.predicted),
        report.centers.iter().map(|c| num(*c)).collect::<Vec<_>>().join(";"),
    ]);
    out.csv("concentration.csv", csv)?;
    out.note("mass", num(report.mass));
    out.note("conditional_mean", num(report.conditional_mean));
    out.note("predicted", num(report.predicted));
    Ok(())
}

pub fn decode(action: DecodeAction, config: &mut ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let (seed, cap) = (config.seed, config.cap);
    match action {
        DecodeAction::Profile => {
            out.set_action("profile");
            let setup = random_instance(&mut config.params, seed, cap, (2, 9, 12, 2))?;
            let p = &mut config.params;
            let radius = p.usize("radius", setup.budget)?;
            let failures: HashSet<Vec<u32>> = match p.optional("failures") {
                Some(path) => parse_failure_set(&std::fs::read_to_string(&path)?)?.into_iter().collect(),
                None => HashSet::new(),
            };
            let samples = p.usize("samples", 0)?;
            let inst = &setup.inst;
            let blocks = inst.blocks();
            let members: Vec<Vec<usize>> = (0..blocks.block_count()).map(|t| blocks.members(t).to_vec()).collect();
            let stats = inst.centered_stats();
            let matrix = SpectralMatrix::for_blocks(&blocks.sizes(), blocks.weights(), setup.budget, stats.skew, cap)?;
            let w = matrix.lambda_max()?.vector;
            let decoder = FailureAnnotatedDecoder::new(BoundedDistanceDecoder::new(inst.matrix(), radius, cap)?, failures);
            let profile = failure_profile(inst.matrix(), &decoder, &members, setup.budget, cap)?;
            let bound = theorem_bound(&w, &matrix, &profile)?;
            out.write("failure_profile.csv", &profile.to_csv())?;
            out.note("gamma_max", num(profile.gamma_max));
            out.note("tilde_max", num(profile.tilde_max));
            out.note("bound", num(bound));
            if samples > 0 {
                let estimate =
                    imperfect_expectation_monte_carlo(inst, matrix.index(), &w, &decoder, samples, seed, cap)?;
                out.note("monte_carlo_mean", num(estimate.mean));
                out.note("monte_carlo_std_error", num(estimate.std_error));
            }
        }
        DecodeAction::Prange => {
            out.set_action("prange");
            let setup = random_instance(&mut config.params, seed, cap, (2, 8, 16, 1))?;
            let trials = config.params.usize("trials", 200)?;
            let outcome = weighted_prange(&setup.inst, trials, seed)?;
            let mut csv = Csv::new(&["trial", "ratio"]);
            for (k, r) in outcome.trial_ratios.iter().enumerate() {
                csv.row(&[k.to_string(), num(*r)]);
            }
            out.csv("prange.csv", csv)?;
            let (mean, ci) = outcome.mean_ratio();
            out.note("best_ratio", num(outcome.best_ratio()));
            out.note("mean_ratio", num(mean));
            out.note("ci95", num(ci));
            out.note("best_assignment", join(&outcome.best_assignment));
        }
        DecodeAction::Rs => {
            out.set_action("rs");
            let p = &mut config.params;
            let modulus = p.u32("p", 7)?;
            let n = p.usize("n", 3)?;
            let field = PrimeField::new(modulus)?;
            let primitive = field.primitive_element();
            let m = modulus as usize - 1;
            let locators: Vec<u32> = (0..m).map(|i| field.pow(primitive, i as u64)).collect();
            let params = ReedSolomonParams::new(field, locators.clone(), n)?;
            let radius = p.usize("radius", params.design_radius())?;
            let error_input = p.optional("error");
            let syndrome_input = p.optional("syndrome");
            let parse = |text: &str| -> CliResult<Vec<u32>> {
                text.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<u32>()
                            .map_err(|e| CliError::Usage(format!("bad field element `{v}`: {e}")))
                            .and_then(|x| Ok(field.check_element(x)?))
                    })
                    .collect()
            };
            let (syndrome, expected) = match (error_input, syndrome_input) {
                (Some(e), None) => {
                    let e = parse(&e)?;
                    if e.len() != m {
                        return Err(CliError::Usage(format!("error needs {m} entries")));
                    }
                    let s = (0..n)
                        .map(|k| {
                            e.iter().zip(&locators).fold(0, |acc, (&v, &x)| {
                                field.add(acc, field.mul(v, field.pow(x, k as u64)))
                            })
                        })
                        .collect();
                    (s, Some(e))
                }
                (None, Some(s)) => (parse(&s)?, None),
                _ => return Err(CliError::Usage("give exactly one of --error or --syndrome".into())),
            };
            let decoded = bm_decode(&params, &syndrome, radius)?;
            out.note("syndrome", join(&syndrome));
            out.note("decoded", join(&decoded));
            if let Some(e) = expected {
                if decoded != e {
                    return Err(Error::Inconsistent("decoded error differs from the input".into()).into());
                }
                out.note("verdict", "PASS");
            }
        }
    }
    Ok(())
}
