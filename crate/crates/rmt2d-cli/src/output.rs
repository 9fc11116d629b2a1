//! CSV and JSON writers for run outputs and analytic curves. All numeric
//! formatting uses Rust's shortest round-trip representation, so files are
//! byte-stable across runs and platforms.

use crate::{AnalyticArgs, AxisArg, CliError, CurveArg, GueKindArg, VariantArg};
use rmt2d::analytic::{
    self, FiniteNConditionalRatio, GinibreSpacingLaw, GueSurmiseKind, MarginalAxis,
    PentadiagonalSpec, SurmiseParams, SurmiseVariant,
};
use rmt2d::edgegap::{gap_first_order, gap_monotone_breakdown, EdgeKernelParams};
use rmt2d::harness::{ExperimentConfig, RunOutput};
use rmt2d::stats::StatAccumulator;
use std::io::Write;
use std::path::Path;

const SPACING_BINS: usize = 200;
const SPACING_S_MAX: f64 = 4.0;

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, CliError> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn write_run_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    output: &RunOutput,
    density_rows: usize,
) -> Result<(), CliError> {
    let regions: [(&str, &StatAccumulator); 3] =
        [("bulk", &output.bulk), ("edge", &output.edge), ("edge_ext", &output.edge_ext)];

    // moments.json
    let mut doc = serde_json::Map::new();
    let mut rescales = serde_json::Map::new();
    for (name, acc) in &regions {
        match acc.moments() {
            Ok(m) => {
                doc.insert((*name).into(), serde_json::to_value(&m).expect("serialize"));
            }
            Err(e) => {
                doc.insert((*name).into(), serde_json::json!({ "error": e.to_string() }));
            }
        }
        if let Ok(mean) = acc.nn_mean() {
            rescales.insert((*name).into(), serde_json::json!(1.0 / mean));
        }
    }
    doc.insert(
        "meta".into(),
        serde_json::json!({
            "config": config,
            "bounds": output.bounds,
            "neither_count": output.neither_count,
            "total_ratio_samples": output.total_ratio_samples,
            "spacing_rescale_factors": rescales,
            "histogram_points": output.histogram.total_points(),
        }),
    );
    let mut w = create(&dir.join("moments.json"))?;
    serde_json::to_writer_pretty(&mut w, &serde_json::Value::Object(doc))
        .map_err(|e| CliError::Io(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;

    // marginals.csv
    let mut w = create(&dir.join("marginals.csv"))?;
    writeln!(w, "region,kind,center,density,stderr")?;
    for (name, acc) in &regions {
        if let Ok((radial, angular)) = acc.marginals() {
            rmt2d::stats::write_density_csv(&mut w, name, "radial", &radial)?;
            rmt2d::stats::write_density_csv(&mut w, name, "angular", &angular)?;
        }
    }
    w.flush()?;

    // ratio2d.csv
    let mut w = create(&dir.join("ratio2d.csv"))?;
    writeln!(w, "region,x,y,density")?;
    for (name, acc) in &regions {
        for (x, y, d) in acc.ratio_density_2d() {
            writeln!(w, "{name},{x},{y},{d}")?;
        }
    }
    w.flush()?;

    // spacing.csv (first-moment normalized)
    let mut w = create(&dir.join("spacing.csv"))?;
    writeln!(w, "region,kind,center,density,stderr")?;
    for (name, acc) in &regions {
        if let Ok((nn, nnn, _factor)) = acc.spacing_histograms(true, SPACING_BINS, SPACING_S_MAX) {
            rmt2d::stats::write_density_csv(&mut w, name, "nn", &nn)?;
            rmt2d::stats::write_density_csv(&mut w, name, "nnn", &nnn)?;
        }
    }
    w.flush()?;

    // radial_density.csv, aggregated onto a coarse readable grid
    let mut w = create(&dir.join("radial_density.csv"))?;
    writeln!(w, "r,density,stderr")?;
    let hist = &output.histogram;
    let rows = density_rows.max(1).min(hist.bins());
    let per = hist.bins() / rows;
    let total = hist.total_points().max(1) as f64;
    let dr = hist.r_max() / hist.bins() as f64;
    for row in 0..rows {
        let lo = row * per;
        let hi = ((row + 1) * per).min(hist.bins());
        let count: u64 = hist.counts()[lo..hi].iter().sum();
        let r0 = lo as f64 * dr;
        let r1 = hi as f64 * dr;
        let area = std::f64::consts::PI * (r1 * r1 - r0 * r0);
        let density = count as f64 / (total * area);
        let stderr = (count as f64).sqrt() / (total * area);
        writeln!(w, "{},{density},{stderr}", 0.5 * (r0 + r1))?;
    }
    w.flush()?;
    Ok(())
}

fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("{flag} is required for this curve")))
}

fn variant_of(v: VariantArg) -> SurmiseVariant {
    match v {
        VariantArg::Conditional => SurmiseVariant::Conditional,
        VariantArg::Unconditional => SurmiseVariant::Unconditional,
    }
}

pub fn write_analytic_curve(args: &AnalyticArgs) -> Result<(), CliError> {
    let mut w = create(&args.out)?;
    let grid = args.grid.max(2);
    match args.curve {
        CurveArg::GinueDensity => {
            let n = require(args.n, "--n")?;
            writeln!(w, "r,value")?;
            for i in 0..grid {
                let r = 1.2 * (i as f64 + 0.5) / grid as f64;
                writeln!(w, "{r},{}", analytic::density_ginue(r, n)?)?;
            }
        }
        CurveArg::AiDensity => {
            let n = require(args.n, "--n")?;
            writeln!(w, "r,value")?;
            for i in 0..grid {
                let r = 1.2 * (i as f64 + 0.5) / grid as f64;
                writeln!(w, "{r},{}", analytic::density_ai_dag(r, n)?)?;
            }
        }
        CurveArg::GinueNn | CurveArg::GinueNnn => {
            let law = GinibreSpacingLaw::new(args.terms)?;
            writeln!(w, "s,value")?;
            for i in 0..grid {
                let s = SPACING_S_MAX * (i as f64 + 0.5) / grid as f64;
                let v = match args.curve {
                    CurveArg::GinueNn => law.nn(s),
                    _ => law.nnn(s),
                };
                writeln!(w, "{s},{v}")?;
            }
        }
        CurveArg::PoissonNn | CurveArg::PoissonNnn => {
            writeln!(w, "s,value")?;
            for i in 0..grid {
                let s = SPACING_S_MAX * (i as f64 + 0.5) / grid as f64;
                let v = match args.curve {
                    CurveArg::PoissonNn => analytic::poisson_nn(s),
                    _ => analytic::poisson_nnn(s),
                };
                writeln!(w, "{s},{v}")?;
            }
        }
        CurveArg::Surmise => {
            let tau = require(args.tau, "--tau")?;
            let variant = variant_of(require(args.variant, "--variant")?);
            let p = SurmiseParams::new(tau, variant)?;
            writeln!(w, "x,y,value")?;
            for iy in 0..grid {
                let y = -1.0 + 2.0 * (iy as f64 + 0.5) / grid as f64;
                for ix in 0..grid {
                    let x = -1.0 + 2.0 * (ix as f64 + 0.5) / grid as f64;
                    writeln!(w, "{x},{y},{}", analytic::surmise_eginue(x, y, &p))?;
                }
            }
        }
        CurveArg::SurmiseMarginal => {
            let tau = require(args.tau, "--tau")?;
            let variant = variant_of(require(args.variant, "--variant")?);
            let p = SurmiseParams::new(tau, variant)?;
            let axis = match require(args.axis, "--axis")? {
                AxisArg::Radial => MarginalAxis::Radial,
                AxisArg::Angular => MarginalAxis::Angular,
            };
            writeln!(w, "x,value")?;
            for (x, v) in analytic::surmise_marginal(&p, axis, grid)? {
                writeln!(w, "{x},{v}")?;
            }
        }
        CurveArg::GueSurmise => {
            let kind = match require(args.which, "--which")? {
                GueKindArg::Consecutive => GueSurmiseKind::Consecutive,
                GueKindArg::Nn => GueSurmiseKind::Nn,
                GueKindArg::ConditionalNn => GueSurmiseKind::ConditionalNn,
            };
            let hi = if kind == GueSurmiseKind::Consecutive { 6.0 } else { 1.0 };
            writeln!(w, "x,value")?;
            for i in 0..grid {
                let x = -1.0 + (hi + 1.0) * (i as f64 + 0.5) / grid as f64;
                writeln!(w, "{x},{}", analytic::gue_surmise(x, kind))?;
            }
        }
        CurveArg::HermitianLimit => {
            let variant = variant_of(require(args.variant, "--variant")?);
            writeln!(w, "x,value")?;
            for i in 0..grid {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / grid as f64;
                writeln!(w, "{x},{}", analytic::hermitian_limit_marginal(x, variant))?;
            }
        }
        CurveArg::Pentadiagonal => {
            let n = require(args.n, "--n")?;
            let law = FiniteNConditionalRatio::new(PentadiagonalSpec::new(n)?)?;
            writeln!(w, "x,y,value")?;
            for iy in 0..grid {
                let y = -1.0 + 2.0 * (iy as f64 + 0.5) / grid as f64;
                for ix in 0..grid {
                    let x = -1.0 + 2.0 * (ix as f64 + 0.5) / grid as f64;
                    writeln!(w, "{x},{y},{}", law.density(x, y)?)?;
                }
            }
        }
        CurveArg::EdgeGap => {
            let d = require(args.d, "--d")?;
            let p = EdgeKernelParams::new(d);
            let s_hi = gap_monotone_breakdown(&p, 3.0, 600);
            writeln!(w, "s,value")?;
            for i in 0..grid {
                let s = s_hi * (i as f64 + 0.5) / grid as f64;
                let v = gap_first_order(s, &p).map_err(|e| CliError::Numeric(e.to_string()))?;
                writeln!(w, "{s},{v}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
