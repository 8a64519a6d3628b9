//! One function per subcommand; each returns a [`Report`].

use serde_json::json;

use dipole_spectrum::bessel_im::{correction_size, ZeroTable};
use dipole_spectrum::bounds::{
    count_negative_radial, documented_split_instance, shargorodsky_functional_with,
    sum_rule_trials, PlaneGrid, SampledPotential,
};
use dipole_spectrum::channels::{
    count_in, counting_curve, decompose, dirac_slope, log_energy_grid, theoretical_slope,
    ChannelSet, DipoleSpec,
};
use dipole_spectrum::mathieu::{
    eigenvalues_below, ground_state_mclachlan, spectrum, trace_sqrt_neg,
};
use dipole_spectrum::oracle_radial::{self, RadialGrid};
use dipole_spectrum::{Error, Result, Tolerances};

use crate::output::{Cell, Report};
use crate::{BoundsArgs, Cli, Command, CountArgs, MathieuArgs, SlopeArgs, ZerosArgs};

pub fn run(cli: &Cli, tol: &Tolerances) -> Result<Report> {
    match &cli.command {
        Command::Mathieu(args) => mathieu(args, tol),
        Command::Zeros(args) => zeros(args, tol),
        Command::Count(args) => count(args, tol),
        Command::Slope(args) => slope(args, tol),
        Command::Bounds(args) => bounds(args, cli.global.seed),
    }
}

fn mathieu(args: &MathieuArgs, tol: &Tolerances) -> Result<Report> {
    if !args.b.is_finite() {
        return Err(Error::InvalidInput("b must be finite".into()));
    }
    let spec = spectrum(args.b, args.n, tol)?;
    let ground = ground_state_mclachlan(args.b.abs(), tol)?;
    let open = eigenvalues_below(args.b, args.a, tol)?;
    let trace = trace_sqrt_neg(args.b, args.a, tol)?;
    let mut report = if args.trace {
        let mut r = Report::new(&["b", "a", "open_channels", "trace_sqrt_neg"]);
        r.push(vec![
            args.b.into(),
            args.a.into(),
            open.len().into(),
            trace.into(),
        ]);
        r
    } else {
        let mut r = Report::new(&["k", "eigenvalue"]);
        for (k, m) in spec.eigenvalues.iter().enumerate() {
            r.push(vec![k.into(), (*m).into()]);
        }
        r
    };
    report.results = json!({
        "eigenvalues": spec.eigenvalues,
        "converged": spec.converged,
        "mclachlan": ground,
        "trace_sqrt_neg": trace,
        "open_channels": open.len(),
    });
    report.diagnostics = json!({
        "truncation": spec.truncation,
        "ground_matrix_minus_standard": spec.eigenvalues[0] - ground.standard_value,
    });
    Ok(report)
}

fn parse_index_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidInput(format!("bad index range '{s}'"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (
            lo.trim().parse().map_err(|_| bad())?,
            hi.trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let k = s.trim().parse().map_err(|_| bad())?;
            (k, k)
        }
    };
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn zeros(args: &ZerosArgs, tol: &Tolerances) -> Result<Report> {
    let (lo, hi) = parse_index_range(&args.n)?;
    let table = ZeroTable::build(args.nu, lo..=hi, tol)?;
    let mut report = Report::new(&["n", "asymptotic", "refined", "gap"]);
    for e in &table.entries {
        report.push(vec![
            e.n.into(),
            e.asymptotic.into(),
            e.refined.into(),
            e.relative_gap().into(),
        ]);
    }
    let rows: Vec<_> = table
        .entries
        .iter()
        .map(|e| {
            json!({
                "n": e.n,
                "asymptotic": e.asymptotic,
                "refined": e.refined,
                "gap": e.relative_gap(),
                "next_correction": correction_size(args.nu, e.n),
            })
        })
        .collect();
    report.results = json!({ "nu": args.nu, "zeros": rows });
    report.diagnostics = json!({
        "requested": [lo, hi],
        "emitted": table.entries.len(),
        "geometric_ratio": (-std::f64::consts::PI / args.nu).exp(),
    });
    Ok(report)
}

/// `lo..hi` of energy magnitudes (signs ignored), returned as `(E_lo, E_hi)`
/// with `E_lo < E_hi < 0`.
fn parse_energy_range(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidInput(format!("bad energy range '{s}'"));
    let (x, y) = s.split_once("..").ok_or_else(bad)?;
    let x: f64 = x.trim().parse().map_err(|_| bad())?;
    let y: f64 = y.trim().parse().map_err(|_| bad())?;
    let (small, large) = if x.abs() < y.abs() {
        (x.abs(), y.abs())
    } else {
        (y.abs(), x.abs())
    };
    if small.is_nan() || small <= 0.0 || small == large || !large.is_finite() {
        return Err(bad());
    }
    Ok((-large, -small))
}

fn oracle_grid(args: &CountArgs, e: f64, channels: &ChannelSet) -> Result<RadialGrid> {
    match (args.length, args.nodes) {
        (Some(length), Some(nodes)) => RadialGrid::new(length, nodes),
        (None, None) => Ok(RadialGrid::for_energy(e, channels.max_order())),
        _ => Err(Error::InvalidInput(
            "--length and --nodes go together".into(),
        )),
    }
}

fn count(args: &CountArgs, tol: &Tolerances) -> Result<Report> {
    let spec = DipoleSpec::new(args.a, args.b, args.bc.into())?;
    let energies = match (args.e, &args.e_range) {
        (Some(e), None) => vec![e],
        (None, Some(range)) => {
            let (lo, hi) = parse_energy_range(range)?;
            log_energy_grid(lo, hi, args.points)?
        }
        _ => {
            return Err(Error::InvalidInput(
                "give exactly one of --E and --E-range".into(),
            ))
        }
    };
    let channels = decompose(&spec, tol)?;
    let width = channels.channels.len();
    let mut headers = vec!["energy".to_string(), "total".to_string()];
    headers.extend((0..width).map(|k| format!("ch{k}")));
    if args.oracle {
        headers.push("oracle_total".into());
        headers.extend((0..width).map(|k| format!("oracle_ch{k}")));
        headers.push("discrepancy".into());
    }
    let mut report = Report {
        headers,
        ..Report::new(&[])
    };
    let mut samples = Vec::new();
    for &e in &energies {
        let c = count_in(&channels, e, tol)?;
        let mut row: Vec<Cell> = vec![e.into(), c.total.into()];
        row.extend(c.per_channel.iter().map(|&n| n.into()));
        let mut sample = json!({ "energy": e, "total": c.total, "per_channel": c.per_channel });
        if args.oracle {
            let grid = oracle_grid(args, e, &channels)?;
            let o = oracle_radial::count_below(&channels, e, &grid)?;
            let gap = c.total as i64 - o.total as i64;
            row.push(o.total.into());
            row.extend(o.per_channel.iter().map(|&n| n.into()));
            row.push(gap.into());
            sample["oracle"] =
                json!({ "total": o.total, "per_channel": o.per_channel, "grid": grid });
            sample["discrepancy"] = json!(gap);
        }
        report.push(row);
        samples.push(sample);
    }
    report.results = json!({ "samples": samples });
    report.diagnostics = json!({ "channels": channels.channels });
    Ok(report)
}

fn slope(args: &SlopeArgs, tol: &Tolerances) -> Result<Report> {
    if let Some(b) = args.dirac {
        let d = dirac_slope(b, tol)?;
        let s = theoretical_slope(&DipoleSpec::new(0.0, 2.0 * b, args.bc.into())?, tol)?;
        let gap = (d - 2.0 * s).abs();
        let mut report = Report::new(&["b", "dirac_slope", "schrodinger_slope", "identity_gap"]);
        report.push(vec![b.into(), d.into(), s.into(), gap.into()]);
        report.results = json!({
            "b": b,
            "dirac_slope": d,
            "schrodinger_slope": s,
            "identity_gap": gap,
        });
        report.diagnostics = json!({ "trace_sqrt_neg_2b": trace_sqrt_neg(2.0 * b, 0.0, tol)? });
        return Ok(report);
    }
    let spec = DipoleSpec::new(args.a, args.b, args.bc.into())?;
    let (lo, hi) = parse_energy_range(&args.e_range)?;
    let curve = counting_curve(&spec, lo, hi, args.points, tol)?;
    let mut report = Report::new(&["fitted_slope", "theoretical_slope", "residual"]);
    report.push(vec![
        curve.fitted_slope.into(),
        curve.theoretical_slope.into(),
        curve.residual.into(),
    ]);
    report.results = json!({
        "fitted_slope": curve.fitted_slope,
        "theoretical_slope": curve.theoretical_slope,
        "residual": curve.residual,
    });
    report.diagnostics = json!({ "samples": curve.samples });
    Ok(report)
}

fn bounds(args: &BoundsArgs, seed: u64) -> Result<Report> {
    if args.sum_rules {
        let summary = sum_rule_trials(args.trials, seed)?;
        let split = documented_split_instance()?;
        let mut report = Report::new(&[
            "trials",
            "seed",
            "literal_passes",
            "weyl_passes",
            "split_upper",
            "split_lower",
        ]);
        report.push(vec![
            summary.trials.into(),
            (summary.seed as i64).into(),
            summary.literal_passes.into(),
            summary.weyl_passes.into(),
            split.upper.into(),
            split.lower.into(),
        ]);
        report.results = json!({ "trials": summary, "split": split });
        report.diagnostics = json!({
            "literal_violations": summary.trials - summary.literal_passes,
        });
        return Ok(report);
    }
    let mut report = Report::new(&["alpha", "i1", "i2", "count", "ratio"]);
    let mut rows = Vec::new();
    for &alpha in &args.well {
        let v = SampledPotential::well(alpha)?;
        let f = shargorodsky_functional_with(&v, args.argument.into());
        let grid = PlaneGrid::for_support(1.0);
        let count = count_negative_radial(&v, &grid)?;
        let ratio = (f.total() > 0.0).then(|| (count.total as f64 - 1.0) / f.total());
        report.push(vec![
            alpha.into(),
            f.i1.into(),
            f.i2.into(),
            count.total.into(),
            ratio.into(),
        ]);
        rows.push(json!({
            "alpha": alpha,
            "i1": f.i1,
            "i2": f.i2,
            "count": count.total,
            "per_channel": count.per_channel,
            "ratio": ratio,
            "grid": grid,
        }));
    }
    report.results = json!({ "wells": rows });
    Ok(report)
}
