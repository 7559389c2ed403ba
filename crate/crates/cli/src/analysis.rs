//! Analytic subcommands: Γ sweeps, regimes, spectra, OPI and figures.

use multidqi::asymptotics::{
    gamma_functional, gamma_two_block, multivariate_vs_univariate_curve, normalized_gain, two_block_regimes,
};
use multidqi::decoding::weighted_prange;
use multidqi::opi::{build_opi_instance, dominance_csv, dominance_scan, end_to_end_small, r_dqi, r_prange, BlockAssignment};
use multidqi::spectral::{product_ansatz_for, SpectralMatrix};
use multidqi::Error;
use rayon::prelude::*;

use crate::config::{join, ExperimentConfig};
use crate::output::{num, Csv, Grouping, PlotSpec, RunOutput};
use crate::{CliError, CliResult, OpiAction};

fn equal_densities(count: usize) -> Vec<f64> {
    vec![1.0 / count as f64; count]
}

pub fn gamma(config: &mut ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let p = &mut config.params;
    let weights = p.f64_list("g", &[1.0, 2.0])?;
    let densities = p.f64_list("theta", &equal_densities(weights.len()))?;
    let kappa = p.f64("kappa", 0.0)?;
    let budgets = p.grid("mu-grid", "0.01:0.49:0.01")?;
    let total: f64 = weights.iter().sum();
    let solutions = budgets
        .par_iter()
        .map(|&mu| gamma_functional(&weights, &densities, kappa, mu))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut header = vec!["mu".to_string(), "gamma".into(), "normalized".into()];
    header.extend((1..=weights.len()).map(|t| format!("alpha_{t}")));
    header.extend(["multiplier".into(), "budget_active".into()]);
    let mut csv = Csv::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for (mu, s) in budgets.iter().zip(&solutions) {
        let mut row = vec![num(*mu), num(s.value), num(s.value / total)];
        row.extend(s.alphas.iter().map(|a| num(*a)));
        row.extend([num(s.multiplier), s.budget_active.to_string()]);
        csv.row(&row);
    }
    out.csv("gamma.csv", csv)?;
    out.plot(
        "plot_gamma.py",
        &PlotSpec {
            csv: "gamma.csv",
            image: "gamma.png",
            title: "Γ functional",
            x: "mu",
            series: vec![("gamma", "Γ", "-"), ("normalized", "Γ / Σg", "--")],
            group: None,
            xlabel: "μ",
            ylabel: "value",
            vline: None,
        },
    )?;
    out.note("points", budgets.len());
    if let Some(last) = solutions.last() {
        out.note("gamma_at_last_mu", num(last.value));
    }
    Ok(())
}

pub fn regimes(config: &mut ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let p = &mut config.params;
    let weights = p.f64_list("g", &[0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0])?;
    let densities = p.f64_list("theta", &[0.5, 0.5])?;
    let kappa = p.f64("kappa", 0.0)?;
    let mu = p.f64("mu", 0.25)?;
    let m = p.usize("m", 1000)?;
    let [th1, th2] = densities[..] else {
        return Err(CliError::Usage("theta needs exactly two densities".into()));
    };
    let mut csv = Csv::new(&["g", "ratio", "regime", "leading", "full", "error_scale"]);
    for &g in &weights {
        let report = two_block_regimes(g, [th1, th2], kappa, mu, m)?;
        csv.row(&[
            num(g),
            num(g * th2 / th1),
            report.regime.label().to_string(),
            num(report.leading_value),
            num(report.full_value),
            num(report.error_scale),
        ]);
    }
    out.csv("regimes.csv", csv)?;
    out.note("rows", weights.len());
    Ok(())
}

pub fn spectrum(config: &mut ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let cap = config.cap;
    let p = &mut config.params;
    let sizes = p.usize_list("sizes", &[8, 8])?;
    let weights = p.f64_list("g", &[1.0, 2.0])?;
    let kappa = p.f64("kappa", 0.0)?;
    let budgets = p.usize_list("l", &[1, 2, 3, 4])?;
    let method = p.string("method", "auto")?;
    let dump = p.string("dump", "false")? == "true";
    let m: usize = sizes.iter().sum();
    let densities: Vec<f64> = sizes.iter().map(|&s| s as f64 / m as f64).collect();
    let mut csv = Csv::new(&[
        "l",
        "dim",
        "lambda_max",
        "ansatz_rayleigh",
        "cw_bound",
        "lambda_over_m",
        "asymptotic_gamma",
    ]);
    let mut last = None;
    for &l in &budgets {
        let matrix = SpectralMatrix::for_blocks(&sizes, &weights, l, kappa, cap)?;
        let top = match method.as_str() {
            "auto" => matrix.lambda_max()?,
            "dense" => matrix.lambda_max_dense(),
            "power" => matrix.lambda_max_power(1e-12, 100_000)?,
            other => return Err(CliError::Usage(format!("unknown method `{other}`"))),
        };
        let ansatz = product_ansatz_for(&sizes, &weights, l, kappa)?;
        let rayleigh = matrix.rayleigh(&ansatz.tensor(matrix.index()))?;
        let cw = matrix.collatz_wielandt_bound(&vec![1.0; sizes.len()])?;
        let mu = l as f64 / m as f64;
        let asymptotic = if mu > 0.0 && mu < 1.0 {
            gamma_functional(&weights, &densities, kappa, mu)?.value
        } else {
            f64::NAN
        };
        csv.row(&[
            l.to_string(),
            matrix.dim().to_string(),
            num(top.value),
            num(rayleigh),
            num(cw),
            num(top.value / m as f64),
            num(asymptotic),
        ]);
        out.note(&format!("lambda_max[l={l}]"), num(top.value));
        last = Some(matrix);
    }
    out.csv("spectrum.csv", csv)?;
    if let (true, Some(matrix)) = (dump, last) {
        out.write("spectral_matrix.txt", &matrix.dump())?;
    }
    Ok(())
}

fn assignment(text: &str) -> CliResult<BlockAssignment> {
    match text {
        "alternating" => Ok(BlockAssignment::Alternating),
        "random" => Ok(BlockAssignment::RandomBalanced),
        other => Err(CliError::Usage(format!("unknown assignment `{other}`"))),
    }
}

fn dominance(weights: &[f64], xs: &[f64], out: &mut RunOutput, stem: &str, title: &str) -> CliResult<()> {
    // Evaluate per weight in parallel, then scan in grid order so the first
    // reported violation is deterministic.
    let rows = weights
        .par_iter()
        .map(|&g| dominance_scan(&[g], xs))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, Error>>()?
        .concat();
    let margin = rows.iter().map(|r| r.r_dqi - r.r_prange).fold(f64::INFINITY, f64::min);
    let csv_name = format!("{stem}.csv");
    out.write(&csv_name, &dominance_csv(&rows))?;
    out.plot(
        &format!("plot_{stem}.py"),
        &PlotSpec {
            csv: &csv_name,
            image: &format!("{stem}.png"),
            title,
            x: "x",
            series: vec![("r_dqi", "multivariate DQI", "b-"), ("r_prange", "weighted Prange", "--")],
            group: Some(("g", Grouping::Panels)),
            xlabel: "x = n/p",
            ylabel: "weighted satisfaction ratio",
            vline: Some(0.5),
        },
    )?;
    out.note("points", rows.len());
    out.note("min_margin", format!("{margin:e}"));
    out.note("verdict", "PASS");
    Ok(())
}

pub fn opi(action: OpiAction, config: &mut ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let seed = config.seed;
    let cap = config.cap;
    let p = &mut config.params;
    match action {
        OpiAction::Dominance => {
            out.set_action("dominance");
            let weights = p.f64_list("g", &[1.5, 2.0, 3.0, 10.0])?;
            let xs = p.grid("x-grid", "0.01:0.99:0.01")?;
            dominance(&weights, &xs, out, "dominance", "Weighted OPI: DQI against Prange")
        }
        OpiAction::Prange => {
            out.set_action("prange");
            let modulus = p.u32("p", 103)?;
            let weights = p.f64_list("g", &[1.0, 2.0])?;
            let xs = p.grid("x-grid", "0.25,0.75")?;
            let trials = p.usize("trials", 200)?;
            let how = assignment(&p.string("assignment", "alternating")?)?;
            let mut csv = Csv::new(&["p", "n", "g", "best", "mean", "ci95", "asymptotic", "dqi_asymptotic"]);
            for &g in &weights {
                for &x in &xs {
                    let n = (x * modulus as f64).round() as usize;
                    let (_, inst) = build_opi_instance(modulus, n, g, seed, how)?;
                    let outcome = weighted_prange(&inst, trials, seed)?;
                    let (mean, ci) = outcome.mean_ratio();
                    let xn = n as f64 / modulus as f64;
                    csv.row(&[
                        modulus.to_string(),
                        n.to_string(),
                        num(g),
                        num(outcome.best_ratio()),
                        num(mean),
                        num(ci),
                        num(r_prange(g, xn)?),
                        num(r_dqi(g, xn)?),
                    ]);
                }
            }
            out.csv("opi_prange.csv", csv)?;
            out.note("rows", weights.len() * xs.len());
            Ok(())
        }
        OpiAction::EndToEnd => {
            out.set_action("end-to-end");
            let modulus = p.u32("p", 13)?;
            let n = p.usize("n", 5)?;
            let g = p.f64("g", 2.0)?;
            let report = end_to_end_small(modulus, n, g, seed, cap)?;
            let mut csv = Csv::new(&["quantity", "value"]);
            let fields = [
                ("radius", report.radius as f64),
                ("dual_distance", report.dual_distance.map_or(f64::NAN, |d| d as f64)),
                ("simulated", report.simulated),
                ("predicted", report.predicted),
                ("uniform", report.uniform),
                ("lambda_max", report.lambda_max),
                ("dqi_ratio", report.dqi_ratio),
                ("prange_ratio", report.prange_ratio),
            ];
            for (k, v) in fields {
                csv.row(&[k.to_string(), num(v)]);
                out.note(k, num(v));
            }
            out.csv("end_to_end.csv", csv)?;
            Ok(())
        }
    }
}

const FIGURE_BUDGETS: [f64; 4] = [0.5, 0.25, 0.125, 0.01];

pub fn reproduce_figure(figure: u8, config: &mut ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let p = &mut config.params;
    match figure {
        1 | 2 => {
            let normalized = figure == 2;
            out.set_figure(if normalized {
                "Figure 2: normalized gain F_mu(g) against g, balanced F2 two-block case"
            } else {
                "Figure 1: Gamma_g^(2)(mu) against g, balanced F2 two-block case"
            });
            let gs = p.grid("g-grid", "0.05:10:0.05")?;
            let budgets = p.f64_list("mu", &FIGURE_BUDGETS)?;
            let column = if normalized { "f_mu" } else { "gamma" };
            let points: Vec<(f64, f64)> = budgets.iter().flat_map(|&mu| gs.iter().map(move |&g| (mu, g))).collect();
            let values = points
                .par_iter()
                .map(|&(mu, g)| if normalized { normalized_gain(g, mu) } else { gamma_two_block(g, mu) })
                .collect::<Result<Vec<_>, Error>>()?;
            let mut csv = Csv::new(&["mu", "g", column]);
            for ((mu, g), v) in points.iter().zip(&values) {
                csv.row(&[num(*mu), num(*g), num(*v)]);
            }
            let stem = format!("figure{figure}");
            out.csv(&format!("{stem}.csv"), csv)?;
            out.plot(
                &format!("plot_{stem}.py"),
                &PlotSpec {
                    csv: &format!("{stem}.csv"),
                    image: &format!("{stem}.png"),
                    title: if normalized { "F_μ(g)" } else { "Γ_g^(2)(μ)" },
                    x: "g",
                    series: vec![(column, if normalized { "F_μ(g)" } else { "Γ" }, "-")],
                    group: Some(("mu", Grouping::Curves)),
                    xlabel: "g",
                    ylabel: column,
                    vline: Some(1.0),
                },
            )?;
            out.note("points", points.len());
            Ok(())
        }
        3 => {
            out.set_figure("Figure 3: multivariate against univariate DQI, balanced F2 two-block case");
            let weights = p.f64_list("g", &[2.0, 3.0, 5.0, 8.0])?;
            let budgets = p.grid("mu", "0.005:0.495:0.005")?;
            let mut csv = Csv::new(&["g", "mu", "multivariate", "univariate"]);
            let mut min_gap = f64::INFINITY;
            for &g in &weights {
                for point in multivariate_vs_univariate_curve(g, &budgets)? {
                    let gap = point.multivariate - point.univariate;
                    if gap < -1e-12 || (g != 1.0 && gap <= 0.0) {
                        return Err(Error::Inconsistent(format!(
                            "multivariate value does not exceed univariate at g = {g}, mu = {}",
                            point.budget
                        ))
                        .into());
                    }
                    min_gap = min_gap.min(gap);
                    csv.row(&[num(g), num(point.budget), num(point.multivariate), num(point.univariate)]);
                }
            }
            out.csv("figure3.csv", csv)?;
            out.plot(
                "plot_figure3.py",
                &PlotSpec {
                    csv: "figure3.csv",
                    image: "figure3.png",
                    title: "Multivariate against univariate DQI",
                    x: "mu",
                    series: vec![("multivariate", "multivariate", "b-"), ("univariate", "univariate", "r--")],
                    group: Some(("g", Grouping::Panels)),
                    xlabel: "μ",
                    ylabel: "value",
                    vline: None,
                },
            )?;
            out.note("weights", join(&weights));
            out.note("min_gap", format!("{min_gap:e}"));
            out.note("verdict", "PASS");
            Ok(())
        }
        _ => {
            let (default, label): (&[f64], &str) = if figure == 4 {
                (&[1.5, 2.0, 3.0, 10.0], "Figure 4: weighted OPI, DQI against Prange, g >= 1")
            } else {
                (&[0.5, 0.25, 0.125, 0.1], "Figure 5: weighted OPI, DQI against Prange, g < 1")
            };
            out.set_figure(label);
            let weights = p.f64_list("g", default)?;
            let xs = p.grid("x-grid", "0.01:0.99:0.01")?;
            dominance(&weights, &xs, out, &format!("figure{figure}"), "Weighted OPI: DQI against Prange")
        }
    }
}
