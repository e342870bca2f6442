use std::fs;

use serde::Deserialize;

use q4embed::construction::matching_residual;
use q4embed::spectral::shooting::shoot_point_interaction;
use q4embed::{
    interface_jumps, synthesize_eigenfunction, EmbeddedPotentialSpec, Parity,
    SchrodingerSquareSpec, SingularExample, Verdict,
};

use crate::commands::{
    hsquare_run, mismatch_scan, piecewise_report, HsquareDocument, HsquareRun,
    BOUND_STATE_TOLERANCE,
};
use crate::{Failure, VerifyArgs};

/// `|g'(0)| + |g'''(0)|` accepted for a piecewise spec.
pub const MATCHING_TOLERANCE: f64 = 1e-8;
/// Interface jumps against the closed-form eigenfunction.
pub const JUMP_TOLERANCE: f64 = 1e-10;
/// Shooting mismatch at the claimed eigenvalue.
pub const MISMATCH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Document {
    Piecewise(EmbeddedPotentialSpec),
    Singular(SingularExample),
    Hsquare(HsquareDocument),
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.document)?;
    let doc: Document = serde_json::from_str(&text)
        .map_err(|e| Failure::validation("document", format!("unrecognized document: {e}")))?;
    match doc {
        Document::Piecewise(spec) => verify_piecewise(&spec, args),
        Document::Singular(ex) => verify_singular(&ex),
        Document::Hsquare(doc) => verify_hsquare(&doc),
    }
}

fn fail(kind: &'static str, message: String) -> Failure {
    Failure::numerical(kind, message)
}

fn verify_piecewise(spec: &EmbeddedPotentialSpec, args: &VerifyArgs) -> Result<(), Failure> {
    if !(spec.k0 > 0.0 && spec.barrier > 0.0 && spec.well > 0.0)
        || !(spec.a < spec.b && spec.b < 0.0)
    {
        return Err(Failure::validation(
            "document",
            format!("need k0, A, B > 0 and a < b < 0, got {spec:?}"),
        ));
    }
    // residual of the potential described by the scalar fields
    let mut rebuilt = spec.clone();
    rebuilt.pieces =
        EmbeddedPotentialSpec::half_line_pieces(spec.k0, spec.a, spec.b, spec.barrier, spec.well)?;
    let (g1, g3) = matching_residual(&rebuilt)?;
    let residual = g1.abs() + g3.abs();
    if !(residual < MATCHING_TOLERANCE) {
        return Err(fail(
            "matching",
            format!("|g'(0)| + |g'''(0)| = {residual:e} exceeds {MATCHING_TOLERANCE:e}"),
        ));
    }
    spec.validate()?;
    let sample = synthesize_eigenfunction(spec, q4embed::construction::DEFAULT_GRID_STEP)?;
    let (left, right) = sample.fitted_decay_rates();
    for rate in [left, right] {
        if !(((rate - spec.k0) / spec.k0).abs() < 0.01) {
            return Err(fail(
                "decay",
                format!(
                    "tail decay {rate} differs from k0 = {} by more than 1%",
                    spec.k0
                ),
            ));
        }
    }
    let half_width = args.half_width.unwrap_or(25.0);
    let n = args.n.unwrap_or(1500);
    let report = piecewise_report(spec, half_width, n)?;
    if report.verdict != Verdict::EmbeddedCandidate {
        return Err(fail(
            "spectral",
            format!(
                "no embedded candidate near {} (nearest {}, ipr {})",
                report.target, report.nearest, report.ipr
            ),
        ));
    }
    println!(
        "ok piecewise residual={residual:e} nearest={:.12}",
        report.nearest
    );
    Ok(())
}

fn verify_singular(ex: &SingularExample) -> Result<(), Failure> {
    let c = ex.matching_point();
    if ex.interfaces.len() != 2 || !(c > 0.0) || ex.lambda != 1.0 {
        return Err(Failure::validation(
            "document",
            "expected two interfaces at ±c, c > 0, and lambda = 1",
        ));
    }
    let trig = match ex.parity {
        Parity::Odd => c.sin(),
        Parity::Even => c.cos(),
    };
    let amplitude = c.exp() * trig;
    if (ex.amplitude - amplitude).abs() > 1e-12 * amplitude.abs() {
        return Err(fail(
            "amplitude",
            format!(
                "amplitude {} but C¹ matching needs {amplitude}",
                ex.amplitude
            ),
        ));
    }
    for p in &ex.interfaces {
        let (l, r) = ex.one_sided_jets(p.c);
        let (j2, j3) = interface_jumps(p, l[0], l[1]);
        let err = (j2 - (r[2] - l[2])).abs().max((j3 - (r[3] - l[3])).abs());
        if !(err < JUMP_TOLERANCE) {
            return Err(fail(
                "jumps",
                format!(
                    "interaction at {} misses the eigenfunction jumps by {err:e}",
                    p.c
                ),
            ));
        }
    }
    let right = ex
        .interfaces
        .iter()
        .find(|p| p.c > 0.0)
        .copied()
        .expect("c > 0 checked");
    let shot = shoot_point_interaction(ex.parity, &right, ex.lambda)?;
    if !(shot.mismatch < MISMATCH_TOLERANCE) {
        return Err(fail(
            "mismatch",
            format!("mismatch {:e} at lambda = {}", shot.mismatch, ex.lambda),
        ));
    }
    // the scan's smallest value sits at the claimed eigenvalue
    let scan = mismatch_scan(ex)?;
    let best = scan
        .iter()
        .min_by(|a, b| a[1].total_cmp(&b[1]))
        .expect("non-empty scan");
    if (best[0] - ex.lambda).abs() > 0.0051 {
        return Err(fail(
            "mismatch",
            format!("mismatch minimum at {} instead of {}", best[0], ex.lambda),
        ));
    }
    println!(
        "ok singular parity={:?} mismatch={:e}",
        ex.parity, shot.mismatch
    );
    Ok(())
}

fn verify_hsquare(doc: &HsquareDocument) -> Result<(), Failure> {
    let spec = match doc.potential.as_str() {
        "sech2" => SchrodingerSquareSpec::sech2_well(),
        other => {
            return Err(Failure::validation(
                "document",
                format!("unknown potential {other:?}"),
            ))
        }
    };
    if spec.bound_states != doc.bound_states {
        return Err(fail(
            "bound_states",
            format!(
                "document lists {:?}, potential has {:?}",
                doc.bound_states, spec.bound_states
            ),
        ));
    }
    let HsquareRun {
        h_values: hv,
        l_values: lv,
        reports,
    } = hsquare_run(&spec, doc.half_width, doc.n)?;
    for (k, kappa) in spec.bound_states.iter().enumerate() {
        if !((hv[k] - kappa).abs() < BOUND_STATE_TOLERANCE) {
            return Err(fail(
                "bound_state",
                format!("H_n eigenvalue {} differs from {kappa}", hv[k]),
            ));
        }
    }
    let mut squares: Vec<f64> = hv.iter().map(|v| v * v).collect();
    squares.sort_by(f64::total_cmp);
    let scale = lv.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let defect = squares
        .iter()
        .zip(&lv)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !(defect < 1e-10 * scale) {
        return Err(fail(
            "square_identity",
            format!("spec(L_n) and spec(H_n)² differ by {defect:e}"),
        ));
    }
    for (r, want) in reports.iter().zip(&doc.predicted_eigenvalues) {
        if r.verdict != Verdict::EmbeddedCandidate || r.target != *want {
            return Err(fail(
                "spectral",
                format!("no embedded candidate near {want} (nearest {})", r.nearest),
            ));
        }
    }
    println!("ok hsquare targets={:?}", doc.predicted_eigenvalues);
    Ok(())
}
