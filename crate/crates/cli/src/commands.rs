use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use blaschke_core::frames::{
    build_frame_with_order, classify_redundancy, reconstruct, FrameSystem,
};
use blaschke_core::linalg;
use blaschke_core::operators::build_isometry;
use blaschke_core::{mt_basis, wold_decompose, CVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Format, Resolved, RunConfig};
use crate::error::{CliError, ExitStatus, Result};
use crate::formats::{self, WoldJson};
use crate::report::ReportJson;
use crate::verify::{self, Suite};

/// Reconstruction tolerance for Parseval synthesis and redundant deletions.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Labels carrying weight in a random reconstruction vector.
pub const RANDOM_SUPPORT: usize = 8;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

/// Writes `bytes` to `path`, or to `out` when there is none.
fn emit(
    path: Option<&Path>,
    out: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(io_err(p))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush().map_err(io_err(p))
        }
        None => write(out),
    }
}

fn write_all(w: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    w.write_all(bytes).map_err(|e| CliError::io("<stdout>", e))
}

fn build(r: &Resolved) -> Result<FrameSystem> {
    Ok(build_frame_with_order(
        &r.blaschke,
        &r.spec,
        r.config.series_order,
    )?)
}

/// Full frame report; disagreement between the two redundancy verdicts is an
/// invariant violation, reported after the report is written.
pub fn analyze(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<ExitStatus> {
    let r = config.resolve()?;
    let sys = build(&r)?;
    let report = classify_redundancy(&sys, &r.tolerances)?;
    let json = ReportJson::new(&r.config, &report);
    emit(config.output_path(), out, |w| match config.format() {
        Format::Json => write_all(w, json.to_json().as_bytes()),
        Format::Csv => json.write_csv(w),
    })?;
    if let Some(&m) = report.disagreements.first() {
        let _ = writeln!(err, "{}", report.check_agreement().unwrap_err());
        let _ = writeln!(err, "verdict disagreement at index {m}");
        return Ok(ExitStatus::Invariant);
    }
    Ok(ExitStatus::Pass)
}

pub fn verify(config: &RunConfig, suite: Suite, out: &mut dyn Write) -> Result<ExitStatus> {
    let r = config.resolve()?;
    let outcomes = verify::run_suites(&r, &[suite]);
    for o in &outcomes {
        writeln!(out, "{o}").map_err(|e| CliError::io("<stdout>", e))?;
    }
    let status = verify::overall(&outcomes);
    let passed = outcomes
        .iter()
        .filter(|o| o.status == verify::Status::Pass)
        .count();
    writeln!(out, "{passed}/{} suites passed", outcomes.len())
        .map_err(|e| CliError::io("<stdout>", e))?;
    Ok(status)
}

/// Vector to reconstruct: a basis vector `e<m>` or `random[:<seed>]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorSpec {
    Basis(usize),
    Random(Option<u64>),
}

impl FromStr for VectorSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(m) = s.strip_prefix('e') {
            return m
                .parse()
                .ok()
                .filter(|&m| m > 0)
                .map(VectorSpec::Basis)
                .ok_or_else(|| format!("bad basis index in `{s}`"));
        }
        match s.split_once(':') {
            None if s == "random" => Ok(VectorSpec::Random(None)),
            Some(("random", seed)) => seed
                .parse()
                .map(|x| VectorSpec::Random(Some(x)))
                .map_err(|_| format!("bad seed in `{s}`")),
            _ => Err(format!("expected `e<m>` or `random[:<seed>]`, got `{s}`")),
        }
    }
}

fn make_vector(sys: &FrameSystem, spec: VectorSpec, default_seed: u64) -> Result<CVector> {
    let n = sys.dim();
    match spec {
        VectorSpec::Basis(m) if m <= n => Ok(linalg::basis_vector(n, m)),
        VectorSpec::Basis(m) => Err(CliError::Config(crate::error::ConfigError::new(
            "vector",
            format_args!("index {m} exceeds dim {n}"),
        ))),
        VectorSpec::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(default_seed));
            let support = sys.tail_safe_support();
            let labels = &support[..support.len().min(RANDOM_SUPPORT)];
            Ok(verify::random_vector(&mut rng, n, labels))
        }
    }
}

pub fn reconstruct_cmd(
    config: &RunConfig,
    vector: VectorSpec,
    drop: &[usize],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<ExitStatus> {
    let r = config.resolve()?;
    let sys = build(&r)?;
    let f = make_vector(&sys, vector, config.seed)?;
    let rec = reconstruct(&sys, &f, drop, &r.tolerances)?;
    let o = |e| CliError::io("<stdout>", e);
    writeln!(out, "parseval error {:.6e}", rec.parseval_error).map_err(o)?;
    let mut status = if rec.parseval_error < RECONSTRUCTION_TOL {
        ExitStatus::Pass
    } else {
        ExitStatus::Invariant
    };
    if let Some(res) = rec.span_residual {
        for (&m, &red) in rec.drop.iter().zip(&rec.drop_redundant) {
            writeln!(
                out,
                "dropped {m}: {}",
                if red { "redundant" } else { "essential" }
            )
            .map_err(o)?;
        }
        writeln!(out, "span residual {res:.6e}").map_err(o)?;
        if rec.experimental {
            writeln!(
                out,
                "note: several indices dropped at once; result is experimental"
            )
            .map_err(o)?;
        }
        if let Some(w) = rec.witness {
            let _ = writeln!(
                err,
                "warning: an essential index was dropped; residual concentrated on e_{w} (consistent with essential)"
            );
        } else if res >= RECONSTRUCTION_TOL {
            status = ExitStatus::Invariant;
        }
    }
    Ok(status)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Artifact {
    /// Taylor coefficients of `B` as JSON `[re, im]` pairs.
    Taylor,
    /// MT Taylor rows as CSV, or JSON coefficient arrays.
    Mt,
    /// `B(V*)` as a dense matrix.
    Operator,
    /// The truncated isometry `V`.
    Isometry,
    /// Wold data as JSON.
    Wold,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ExportFormat {
    Json,
    Csv,
    Bin,
}

pub fn export(
    config: &RunConfig,
    what: Artifact,
    format: ExportFormat,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<ExitStatus> {
    let r = config.resolve()?;
    let unsupported = || {
        CliError::Config(crate::error::ConfigError::new(
            "format",
            format_args!("{format:?} is not available for {what:?}"),
        ))
    };
    let order = match r.config.series_order {
        Some(k) => k,
        None => r.blaschke.default_order()?,
    };
    match (what, format) {
        (Artifact::Taylor, ExportFormat::Json) => {
            let t = r.blaschke.taylor(order);
            let text = formats::coefficients_to_json(t.coeffs()) + "\n";
            emit(path, out, |w| write_all(w, text.as_bytes()))?;
        }
        (Artifact::Mt, ExportFormat::Csv) => {
            let basis = mt_basis(&r.blaschke, order)?;
            emit(path, out, |w| formats::write_mt_csv(&basis, w))?;
        }
        (Artifact::Mt, ExportFormat::Json) => {
            let basis = mt_basis(&r.blaschke, order)?;
            let rows: Vec<String> = basis
                .taylor
                .iter()
                .map(|s| formats::coefficients_to_json(s.coeffs()))
                .collect();
            let text = format!("[{}]\n", rows.join(","));
            emit(path, out, |w| write_all(w, text.as_bytes()))?;
        }
        (Artifact::Operator | Artifact::Isometry, ExportFormat::Bin | ExportFormat::Csv) => {
            let v = build_isometry(&r.spec);
            let m = if what == Artifact::Operator {
                build(&r)?.operator_bv.matrix
            } else {
                v.matrix
            };
            emit(path, out, |w| match format {
                ExportFormat::Bin => {
                    formats::write_matrix_binary(&m, w).map_err(|e| CliError::io("<output>", e))
                }
                _ => formats::write_matrix_csv(&m, w),
            })?;
        }
        (Artifact::Wold, ExportFormat::Json) => {
            let w = WoldJson::from(&wold_decompose(&r.spec));
            let text = serde_json::to_string_pretty(&w).expect("wold data serializes") + "\n";
            emit(path, out, |wr| write_all(wr, text.as_bytes()))?;
        }
        _ => return Err(unsupported()),
    }
    Ok(ExitStatus::Pass)
}
