use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use q4embed::construction::{build_with_bracket, well_start, EigenfunctionSample};
use q4embed::io::{column_csv, sig17, table_csv};
use q4embed::spectral::report::EmbeddingCriteria;
use q4embed::spectral::shooting::shoot_point_interaction;
use q4embed::zeros::{find_b_star, zero_curves};
use q4embed::{
    detect_embedded, discretize_quartic, discretize_schrodinger_and_square, eigensolve_symmetric,
    even_variant, schrodinger_square, singular_example, synthesize_eigenfunction,
    SchrodingerSquareSpec, SingularExample, SpectralReport, StateVector4,
};

use crate::{Cli, Command, Failure, GridArgs, PiecewiseArgs, SpectralArgs, SweepArgs};

/// Tolerance on `|nearest − target|` for the piecewise spectral check.
pub const PIECEWISE_TOLERANCE: f64 = 1e-2;
/// Tolerance on `|nearest − target|` for the squared Schrödinger operator.
pub const HSQUARE_TOLERANCE: f64 = 2e-3;
/// Tolerance on the lowest `H_n` eigenvalues against the bound states.
pub const BOUND_STATE_TOLERANCE: f64 = 1e-3;

/// Record of an `hsquare` run, enough to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsquareDocument {
    pub potential: String,
    #[serde(rename = "X", with = "sig17")]
    pub half_width: f64,
    pub n: usize,
    #[serde(with = "sig17::vec")]
    pub bound_states: Vec<f64>,
    #[serde(with = "sig17::vec")]
    pub predicted_eigenvalues: Vec<f64>,
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Singular(args) => singular(&cli.out, args, false),
        Command::EvenVariant(args) => singular(&cli.out, args, true),
        Command::Piecewise(args) => piecewise(&cli.out, args),
        Command::Hsquare(args) => hsquare(&cli.out, args),
        Command::Verify(args) => crate::verify::verify(args),
        Command::Sweep(args) => sweep(&cli.out, args),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("documents serialize");
    s.push('\n');
    s
}

fn check_grid_step(step: f64) -> Result<(), Failure> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Failure::validation(
            "argument",
            format!("grid-step must be positive, got {step}"),
        ));
    }
    Ok(())
}

fn check_spectral_args(half_width: f64, n: usize) -> Result<(), Failure> {
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Failure::validation(
            "argument",
            format!("X must be positive, got {half_width}"),
        ));
    }
    if n < q4embed::spectral::grid::MIN_POINTS {
        return Err(Failure::validation(
            "argument",
            format!("n must be at least 50, got {n}"),
        ));
    }
    if n > q4embed::spectral::eigen::DENSE_LIMIT {
        return Err(Failure::validation(
            "argument",
            format!("n must be at most 4000, got {n}"),
        ));
    }
    Ok(())
}

/// `(λ, mismatch)` on `[0.25, 3]` for the example's right-hand interaction.
pub fn mismatch_scan(ex: &SingularExample) -> Result<Vec<Vec<f64>>, Failure> {
    let right = ex
        .interfaces
        .iter()
        .copied()
        .find(|p| p.c > 0.0)
        .ok_or_else(|| Failure::validation("document", "no interaction at c > 0"))?;
    (0..=550)
        .map(|i| {
            let lambda = 0.25 + 0.005 * i as f64;
            let shot = shoot_point_interaction(ex.parity, &right, lambda)?;
            Ok(vec![lambda, shot.mismatch])
        })
        .collect()
}

fn singular(out: &Path, args: &GridArgs, even: bool) -> Result<(), Failure> {
    check_grid_step(args.grid_step)?;
    let (ex, sample) = if even {
        even_variant(args.grid_step)?
    } else {
        singular_example(args.grid_step)?
    };
    let stem = if even { "even_variant" } else { "singular" };
    write(out, &format!("{stem}.json"), &to_json(&ex))?;
    write(out, &format!("{stem}_eigenfunction.csv"), &sample.to_csv())?;
    write(
        out,
        &format!("{stem}_mismatch.csv"),
        &table_csv(&["lambda", "mismatch"], &mismatch_scan(&ex)?),
    )?;
    Ok(())
}

fn check_construction_args(k0: f64, a: f64, barrier: f64) -> Result<(), Failure> {
    if !(k0 > 0.0) || !k0.is_finite() {
        return Err(Failure::validation(
            "argument",
            format!("k0 must be positive, got {k0}"),
        ));
    }
    if !(a < 0.0) || !a.is_finite() {
        return Err(Failure::validation(
            "argument",
            format!("a must be negative, got {a}"),
        ));
    }
    if !(barrier > 0.0) || !barrier.is_finite() {
        return Err(Failure::validation(
            "argument",
            format!("A must be positive, got {barrier}"),
        ));
    }
    Ok(())
}

/// Discretizes `q` and produces the embedding report at `k₀⁴`.
pub fn piecewise_report(
    spec: &q4embed::EmbeddedPotentialSpec,
    half_width: f64,
    n: usize,
) -> Result<SpectralReport, Failure> {
    let op = discretize_quartic(&spec.full_potential(), half_width, n)?;
    let eig = eigensolve_symmetric(&op)?;
    Ok(detect_embedded(
        &eig,
        &op.grid,
        spec.lambda(),
        spec.k0,
        &EmbeddingCriteria::with_tolerance(PIECEWISE_TOLERANCE),
    ))
}

fn piecewise(out: &Path, args: &PiecewiseArgs) -> Result<(), Failure> {
    check_construction_args(args.k0, args.a, args.barrier)?;
    check_spectral_args(args.half_width, args.n)?;
    check_grid_step(args.grid_step)?;
    let (spec, bracket) = build_with_bracket(args.k0, args.a, args.barrier)?;
    let sample: EigenfunctionSample = synthesize_eigenfunction(&spec, args.grid_step)?;
    let report = piecewise_report(&spec, args.half_width, args.n)?;
    write(out, "piecewise_spec.json", &to_json(&spec))?;
    write(out, "piecewise_eigenfunction.csv", &sample.to_csv())?;
    write(out, "piecewise_report.json", &to_json(&report))?;
    write(
        out,
        "piecewise_eigenvalues.csv",
        &column_csv("eigenvalue", &report.eigenvalues),
    )?;
    println!(
        "B*={:.12} B_flat={} B_sharp={} verdict={:?} nearest={:.12}",
        bracket.b_star, bracket.b_flat, bracket.b_sharp, report.verdict, report.nearest
    );
    Ok(())
}

/// Spectra of `H_n` and `L_n = H_n²` plus one report per predicted eigenvalue.
pub struct HsquareRun {
    pub h_values: Vec<f64>,
    pub l_values: Vec<f64>,
    pub reports: Vec<SpectralReport>,
}

pub fn hsquare_run(
    spec: &SchrodingerSquareSpec,
    half_width: f64,
    n: usize,
) -> Result<HsquareRun, Failure> {
    let (h, l) = discretize_schrodinger_and_square(|x| (spec.v)(x), half_width, n)?;
    let eh = eigensolve_symmetric(&h)?;
    let el = eigensolve_symmetric(&l)?;
    let reports = schrodinger_square(spec)
        .predicted_eigenvalues()
        .into_iter()
        .zip(&spec.bound_states)
        .map(|(target, kappa)| {
            let decay = (-kappa).sqrt();
            detect_embedded(
                &el,
                &l.grid,
                target,
                decay,
                &EmbeddingCriteria::with_tolerance(HSQUARE_TOLERANCE),
            )
        })
        .collect();
    Ok(HsquareRun {
        h_values: eh.values,
        l_values: el.values,
        reports,
    })
}

fn hsquare(out: &Path, args: &SpectralArgs) -> Result<(), Failure> {
    check_spectral_args(args.half_width, args.n)?;
    let spec = SchrodingerSquareSpec::sech2_well();
    let HsquareRun {
        h_values: hv,
        l_values: lv,
        reports,
    } = hsquare_run(&spec, args.half_width, args.n)?;
    let doc = HsquareDocument {
        potential: spec.label.clone(),
        half_width: args.half_width,
        n: args.n,
        bound_states: spec.bound_states.clone(),
        predicted_eigenvalues: schrodinger_square(&spec).predicted_eigenvalues(),
    };
    write(out, "hsquare.json", &to_json(&doc))?;
    write(
        out,
        "hsquare_h_spectrum.csv",
        &column_csv("eigenvalue", &hv),
    )?;
    write(
        out,
        "hsquare_l_spectrum.csv",
        &column_csv("eigenvalue", &lv),
    )?;
    write(out, "hsquare_report.json", &to_json(&reports))?;
    for r in &reports {
        println!(
            "target={} verdict={:?} nearest={:.12}",
            r.target, r.verdict, r.nearest
        );
    }
    Ok(())
}

fn sweep(out: &Path, args: &SweepArgs) -> Result<(), Failure> {
    if args.points < 2 {
        return Err(Failure::validation("argument", "points must be at least 2"));
    }
    let start = match &args.jet {
        Some(j) if j.len() != 4 => {
            return Err(Failure::validation(
                "argument",
                format!("jet needs 4 values, got {}", j.len()),
            ));
        }
        Some(j) => StateVector4::new(0.0, [j[0], j[1], j[2], j[3]]),
        None => {
            check_construction_args(args.k0, args.a, args.barrier)?;
            well_start(args.k0, args.a, args.barrier)?
        }
    };
    let bracket = find_b_star(&start, None)?;
    let curve = zero_curves(&start, bracket.b_flat, bracket.b_sharp, args.points)?;
    let rows: Vec<Vec<f64>> = curve
        .iter()
        .map(|p| {
            vec![
                p.b,
                p.z1.map_or(f64::INFINITY, |z| z - start.x),
                p.z3.map_or(f64::INFINITY, |z| z - start.x),
            ]
        })
        .collect();
    write(
        out,
        "sweep_curves.csv",
        &table_csv(&["B", "z1", "z3"], &rows),
    )?;
    let summary = vec![vec![
        bracket.b_flat,
        bracket.b_star,
        bracket.b1.unwrap_or(f64::NAN),
        bracket.b_sharp,
        bracket.z_star - start.x,
    ]];
    write(
        out,
        "sweep_bracket.csv",
        &table_csv(&["B_flat", "B_star", "B1", "B_sharp", "z_star"], &summary),
    )?;
    Ok(())
}
