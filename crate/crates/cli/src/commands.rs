use std::path::Path;

use speclab_core::constructions::{
    counterexample_csv, counterexample_inequalities, counterexample_prefix, counterexample_witness,
    TargetDims,
};
use speclab_core::equipositivity::verify_tail_positivity;
use speclab_core::fractal_dim::{dim_row_csv, dim_scan, MoranSpec};
use speclab_core::hadamard::stage_triple;
use speclab_core::measure_lab::{finite_convolution, sample, samples_csv};
use speclab_core::sequence::{Family, SequenceSpec};
use speclab_core::specfile::{parse_spec, print_spec};
use speclab_core::spectrum_verify::{
    check_orthogonality, check_parseval, random_grid, tower_spectrum, Spectrum,
};

use crate::output::{read_text, write_report, Output};
use crate::{Cli, CliError, Command, FamilyArg};

/// Runs one subcommand; `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    let cap = cli.cap;
    match &cli.cmd {
        Command::CheckPair { spec, k, tol } => check_pair(spec, *k, *tol),
        Command::VerifySpectrum {
            spec,
            n,
            grid,
            seed,
            spectrum,
            tol,
            out,
        } => verify_spectrum(
            spec,
            *n,
            *grid,
            *seed,
            spectrum.as_deref(),
            *tol,
            out.as_deref(),
            cap,
        ),
        Command::Dims {
            spec,
            k_max,
            window,
            out,
        } => dims(spec, *k_max, *window, out.as_deref()),
        Command::Equipositivity {
            spec,
            n,
            k_max,
            grid,
            seed,
            out,
        } => equipositivity(spec, *n, *k_max, *grid, *seed, out.as_deref()),
        Command::Construct {
            family,
            alpha,
            beta,
            d,
            out,
        } => {
            let t = TargetDims::new(*d, alpha.clone(), beta.clone())?;
            let fam = match family {
                FamilyArg::Compact => Family::Compact(t),
                FamilyArg::Noncompact => Family::Noncompact(t),
            };
            write_report(Some(out), &print_spec(&SequenceSpec::family(*d, fam)))?;
            println!("wrote {}", out.display());
            Ok(true)
        }
        Command::Counterexample { k_max, out } => counterexample(*k_max, out.as_deref()),
        Command::Sample {
            spec,
            k_max,
            count,
            seed,
            out,
        } => {
            let spec = load(spec)?;
            let pts = sample(&spec, *k_max, *count, *seed, cap)?;
            let to_stdout = write_report(out.as_deref(), &samples_csv(spec.d(), &pts))?;
            note(
                to_stdout,
                &format!("{} samples at level K={k_max}, seed {seed}", pts.len()),
            );
            Ok(true)
        }
    }
}

fn load(path: &Path) -> Result<SequenceSpec, CliError> {
    let text = read_text(path)?;
    parse_spec(&text).map_err(|e| match e {
        speclab_core::Error::Parse { line, msg } => {
            CliError::Usage(format!("{}:{line}: {msg}", path.display()))
        }
        other => other.into(),
    })
}

/// Summary lines go to stderr while the CSV is on stdout.
fn note(csv_on_stdout: bool, line: &str) {
    if csv_on_stdout {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

fn check_pair(spec: &Path, k: usize, tol: f64) -> Result<bool, CliError> {
    let spec = load(spec)?;
    let triple = stage_triple(&spec.stage(k)?, tol)?;
    println!("{}", triple.verified);
    Ok(triple.verified.passed())
}

#[allow(clippy::too_many_arguments)]
fn verify_spectrum(
    spec: &Path,
    n: usize,
    grid: usize,
    seed: u64,
    spectrum: Option<&Path>,
    tol: f64,
    out: Option<&Path>,
    cap: u128,
) -> Result<bool, CliError> {
    let spec = load(spec)?;
    let mu = finite_convolution(&spec, n, cap)?;
    let lambda = match spectrum {
        Some(p) => Spectrum::from_csv(&read_text(p)?)?,
        None => {
            let triples = spec
                .stages(n)?
                .iter()
                .map(|s| stage_triple(s, tol))
                .collect::<speclab_core::Result<Vec<_>>>()?;
            tower_spectrum(&triples, n)?
        }
    };
    if lambda.dim() != spec.d() {
        return Err(speclab_core::Error::DimensionMismatch {
            expected: spec.d(),
            found: lambda.dim(),
        }
        .into());
    }
    let xi = random_grid(spec.d(), grid, seed, 0.0, 1.0);
    let orth = check_orthogonality(&mu, &lambda, tol);
    let pars = check_parseval(&mu, &lambda, &xi);
    let to_stdout = write_report(out, &pars.to_csv(&xi))?;
    note(
        to_stdout,
        &format!("atoms {}, spectrum points {}", mu.len(), lambda.len()),
    );
    note(
        to_stdout,
        &format!("orthogonality max modulus {:.6e}", orth.worst_modulus),
    );
    note(
        to_stdout,
        &format!("parseval maxDefect {:.6e}", pars.max_defect),
    );
    Ok(orth.worst_modulus <= tol && pars.max_defect <= tol)
}

fn dims(spec: &Path, k_max: usize, window: usize, out: Option<&Path>) -> Result<bool, CliError> {
    let moran = MoranSpec::from_sequence(load(spec)?);
    let mut sink = Output::open(out)?;
    let to_stdout = sink.is_stdout();
    sink.write_str("k,log_num,log_den,ratio\n")?;
    let mut failed = None;
    let rep = dim_scan(&moran, k_max, window, |row| {
        if failed.is_none() {
            failed = sink.write_str(&dim_row_csv(row)).err();
        }
    })?;
    if let Some(e) = failed {
        return Err(e);
    }
    sink.finish()?;
    note(
        to_stdout,
        &format!(
            "window {} ending at K={k_max}: min {:.15e}, max {:.15e}",
            rep.window, rep.window_liminf, rep.window_limsup
        ),
    );
    let boxes = match rep.box_count_agreement {
        Some(true) => "agrees",
        Some(false) => "DISAGREES",
        None => "not enumerated",
    };
    note(to_stdout, &format!("box count {boxes}"));
    Ok(rep.box_count_agreement != Some(false))
}

fn equipositivity(
    spec: &Path,
    n: usize,
    k_max: usize,
    grid: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool, CliError> {
    let spec = load(spec)?;
    let xi = random_grid(spec.d(), grid, seed, -2.0 / 3.0, 2.0 / 3.0);
    let tp = verify_tail_positivity(&spec, n, k_max, &xi)?;
    let to_stdout = write_report(out, &tp.to_csv(&xi))?;
    note(
        to_stdout,
        &format!(
            "gridMin {:.6e}, epsilon {:.6e}, analytic floor {:.6e}: {}",
            tp.grid_min,
            tp.epsilon,
            tp.analytic_floor,
            if tp.ok { "gridMin > epsilon" } else { "FAIL" }
        ),
    );
    Ok(tp.ok)
}

fn counterexample(k_max: usize, out: Option<&Path>) -> Result<bool, CliError> {
    let p = counterexample_prefix(k_max)?;
    let report = counterexample_inequalities(&p);
    let to_stdout = write_report(out, &counterexample_csv(&p))?;
    let witnessed = (1..=k_max)
        .filter(|&n| counterexample_witness(&p, n).is_some())
        .count();
    note(
        to_stdout,
        &format!(
            "{} exact checks, {} failed; n/(n+1) witnessed for {witnessed} of {k_max}",
            report.checks.len(),
            report.failures().len()
        ),
    );
    for c in report.failures() {
        note(to_stdout, &format!("failed: k={:?} {}", c.k, c.name));
    }
    Ok(report.all_ok() && witnessed == k_max)
}
