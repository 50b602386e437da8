mod exit;
mod manifest;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use pnpcomp::codecs::{BlockDctCodec, CountingCodec, ExternalOptions};
use pnpcomp::denoise::DenoiserSpec;
use pnpcomp::io::{format_matrix, read_pgm, write_pgm};
use pnpcomp::quantlin::{
    dct_basis, geometric_steps, rotation_45, sweep_csv, sweep_grid, ApproxArea, GridRange,
    MonteCarlo, ScalarQuantizer, TransformCoder,
};
use pnpcomp::solver::{Linearization, SolverError};
use pnpcomp::{
    preset, BlockGrid, BlockShape, CodecKind, CodecSpec, OutputIterate, QualityReport,
    SolverConfig, SolverState, StepSet,
};

use exit::{Categorize, Category, Failure};
use manifest::RunManifest;

type CliResult<T = ()> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "pnpcomp", version, about = "Compression artifact removal by linearized PnP-ADMM")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Restore a decompressed image.
    Postprocess(PostprocessArgs),
    /// Sweep the optimal linear fit of a scalar quantizer over (x0, delta).
    AnalyzeQuantizer(QuantizerArgs),
    /// Fit a transform coder around a point and report per-coefficient gains.
    AnalyzeTransform(TransformArgs),
    /// Dump the block-diagonal Jacobian of a codec at an image.
    Jacobian(JacobianArgs),
    /// Print PSNR and SSIM of TEST against REFERENCE.
    Metrics { reference: PathBuf, test: PathBuf },
}

#[derive(Args)]
struct PostprocessArgs {
    #[arg(long, required_unless_present = "from_manifest")]
    input: Option<PathBuf>,
    /// scalar:STEP | pair:STEP | dct:SCALE | cmd:"TEMPLATE" | identity
    #[arg(long, required_unless_present = "from_manifest")]
    codec: Option<CodecSpec>,
    /// dct[:FACTOR] | gauss | identity | cmd:"TEMPLATE"
    #[arg(long, default_value = "dct")]
    denoiser: DenoiserSpec,
    /// Bit-rate selecting the preset (derived from the step for scalar and pair).
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Effective step; finite differences use 0.1·k times this, k = 1..5.
    #[arg(long)]
    delta_tilde: Option<f64>,
    /// Block shape HxW.
    #[arg(long)]
    block: Option<BlockShape>,
    #[arg(long)]
    stop_threshold: Option<f64>,
    #[arg(long, default_value = "v")]
    output_iterate: OutputIterate,
    /// Approximation area; `rotated` uses the analytic pair linearization.
    #[arg(long, default_value = "aligned")]
    area: ApproxArea,
    #[arg(long)]
    no_clip: bool,
    /// Timeout in seconds for external codecs and denoisers.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, required_unless_present = "from_manifest")]
    output: Option<PathBuf>,
    /// Per-iteration CSV log.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Where to write the run manifest (default: OUTPUT.manifest).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Repeat a recorded run; `--output`, `--log` and `--manifest` may redirect its outputs.
    #[arg(long, conflicts_with_all = [
        "input", "codec", "rate", "lambda", "beta", "mu", "max_iters",
        "delta_tilde", "block", "stop_threshold", "no_clip", "timeout",
    ])]
    from_manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum QuantizerKind {
    TwoLevel,
    Uniform,
}

#[derive(Args)]
struct QuantizerArgs {
    #[arg(long, value_enum)]
    kind: QuantizerKind,
    /// Step of the uniform quantizer.
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    /// Centre range start:step:stop.
    #[arg(long)]
    x0: GridRange,
    /// Half-width range start:step:stop.
    #[arg(long)]
    delta: GridRange,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TransformArgs {
    /// rotation45 | dct:N
    #[arg(long, default_value = "rotation45")]
    basis: String,
    /// two-level | uniform:STEP | geometric
    #[arg(long, default_value = "two-level")]
    quantizers: String,
    /// Comma-separated centre point (default: origin).
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long)]
    delta: GridRange,
    #[arg(long, default_value = "rotated")]
    area: ApproxArea,
    /// Monte-Carlo samples for the aligned area.
    #[arg(long, default_value_t = MonteCarlo::default().samples)]
    samples: usize,
    #[arg(long, default_value_t = MonteCarlo::default().seed)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct JacobianArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    codec: CodecSpec,
    #[arg(long)]
    block: Option<BlockShape>,
    /// Effective step giving the step set 0.1·k·Δ̃, k = 1..5.
    #[arg(long, conflicts_with = "steps")]
    delta_tilde: Option<f64>,
    /// Explicit comma-separated step set.
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<f64>>,
    /// Dump only the first N blocks.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    count_calls: bool,
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Category::Usage.code() } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> CliResult {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .or_fail(Category::Usage)?;
    }
    match cli.command {
        Command::Postprocess(a) => postprocess(a),
        Command::AnalyzeQuantizer(a) => analyze_quantizer(a),
        Command::AnalyzeTransform(a) => analyze_transform(a),
        Command::Jacobian(a) => jacobian(a),
        Command::Metrics { reference, test } => {
            let r = read_pgm(&reference).or_fail(Category::Io)?;
            let t = read_pgm(&test).or_fail(Category::Io)?;
            let report = QualityReport::compute(&r, &t).or_fail(Category::Usage)?;
            println!("{report}");
            Ok(())
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> CliResult {
    match output {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .or_fail(Category::Io),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .or_fail(Category::Io),
    }
}

fn timeout_of(secs: Option<f64>) -> CliResult<Option<Duration>> {
    secs.map(|s| Duration::try_from_secs_f64(s).map_err(|e| Failure::usage(format!("--timeout: {e}"))))
        .transpose()
}

fn preset_kind(codec: &CodecSpec) -> Option<CodecKind> {
    match codec {
        CodecSpec::Scalar { .. } => Some(CodecKind::Scalar),
        CodecSpec::Pair { .. } => Some(CodecKind::Pair),
        CodecSpec::Dct { .. } => Some(CodecKind::Dct),
        CodecSpec::Command { .. } | CodecSpec::Identity => None,
    }
}

/// Resolves preset values and explicit overrides into a full configuration.
fn resolve_config(a: &PostprocessArgs, codec: &CodecSpec) -> CliResult<SolverConfig> {
    let rate = match (codec, a.rate) {
        (_, Some(r)) => Some(r),
        (CodecSpec::Scalar { step }, None) => Some(8.0 - step.log2()),
        (CodecSpec::Pair { step }, None) => Some(16.0 - step.log2()),
        (CodecSpec::Dct { .. }, None) => {
            return Err(Failure::usage("--rate is required for the dct codec"));
        }
        _ => None,
    };
    let steps = a
        .delta_tilde
        .map(|d| StepSet::tenths(d).map_err(|e| Failure::usage(format!("--delta-tilde: {e}"))))
        .transpose()?;
    let mut cfg = match (preset_kind(codec), rate) {
        (Some(kind), Some(r)) => preset(kind, r, a.area)
            .map_err(|e| Failure::usage(format!("--rate {r}: {e}")))?
            .config,
        _ => {
            let missing = |name: &str| Failure::usage(format!("{} codec needs explicit --{name}", codec.kind()));
            SolverConfig::new(
                a.lambda.ok_or_else(|| missing("lambda"))?,
                a.beta.ok_or_else(|| missing("beta"))?,
                a.mu.ok_or_else(|| missing("mu"))?,
                steps.clone().ok_or_else(|| missing("delta-tilde"))?,
                a.max_iters.unwrap_or(10),
                a.block.ok_or_else(|| missing("block"))?,
            )
        }
    };
    if let Some(v) = a.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = a.beta {
        cfg.beta = v;
    }
    if let Some(v) = a.mu {
        cfg.mu = v;
    }
    if let Some(v) = a.max_iters {
        cfg.max_iters = v;
    }
    if let Some(s) = steps {
        cfg.steps = s;
    }
    if let Some(b) = a.block {
        cfg.block_shape = b;
    }
    if let Some(t) = a.stop_threshold {
        cfg.stop_threshold = t;
    }
    cfg.clip_output = !a.no_clip;
    cfg.output = a.output_iterate;
    if let (CodecSpec::Pair { step }, ApproxArea::Rotated) = (codec, a.area) {
        cfg.linearization = Linearization::PairRotated { step: *step };
    }
    cfg.validate().map_err(|e| Failure::usage(e))?;
    Ok(cfg)
}

fn postprocess(a: PostprocessArgs) -> CliResult {
    let m = match &a.from_manifest {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .or_fail(Category::Io)?;
            let mut m = RunManifest::parse(&text)
                .with_context(|| format!("manifest {}", path.display()))
                .or_fail(Category::Usage)?;
            m.config.validate().map_err(Failure::usage)?;
            if let Some(o) = &a.output {
                m.output = o.clone();
            }
            if a.log.is_some() {
                m.log = a.log.clone();
            }
            m
        }
        None => {
            let codec = a.codec.clone().expect("required by clap");
            RunManifest {
                input: a.input.clone().expect("required by clap"),
                output: a.output.clone().expect("required by clap"),
                log: a.log.clone(),
                config: resolve_config(&a, &codec)?,
                codec,
                denoiser: a.denoiser.clone(),
                timeout_secs: a.timeout,
            }
        }
    };
    let ext = ExternalOptions {
        workdir: None,
        timeout: timeout_of(m.timeout_secs)?,
    };
    let codec = m.codec.build(&ext).or_fail(Category::Codec)?;
    let denoiser = m.denoiser.build(&ext).or_fail(Category::Usage)?;
    let y = read_pgm(&m.input).or_fail(Category::Io)?;

    let manifest_path = a.manifest.clone().unwrap_or_else(|| {
        let mut p = m.output.clone().into_os_string();
        p.push(".manifest");
        p.into()
    });
    fs::write(&manifest_path, m.to_text())
        .with_context(|| format!("writing {}", manifest_path.display()))
        .or_fail(Category::Io)?;

    let result = pnpcomp::run(codec.as_ref(), &y, denoiser.as_ref(), &m.config);
    let state = match &result {
        Ok((_, s)) => s,
        Err(e) => &*e.state,
    };
    if let Some(log) = &m.log {
        fs::write(log, state_csv(state))
            .with_context(|| format!("writing {}", log.display()))
            .or_fail(Category::Io)?;
    }
    let (restored, state) = result.map_err(|e| Failure {
        category: solver_category(&e.source),
        error: anyhow!(e),
    })?;
    write_pgm(&m.output, &restored).or_fail(Category::Io)?;
    eprintln!(
        "iterations={} psnr_vs_input={}",
        state.iteration,
        state.psnr_vs_input.last().copied().unwrap_or(f64::INFINITY)
    );
    Ok(())
}

fn solver_category(e: &SolverError) -> Category {
    use pnpcomp::JacobianError;
    match e {
        SolverError::Codec(_) | SolverError::Jacobian(JacobianError::Codec(_)) => Category::Codec,
        SolverError::Config(_) => Category::Usage,
        _ => Category::Solver,
    }
}

fn state_csv(s: &SolverState) -> String {
    let mut out = String::from("iter,delta_u,objective,psnr_vs_input\n");
    for i in 0..s.iteration {
        out.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            s.delta_u[i],
            s.objective[i],
            s.psnr_vs_input[i]
        ));
    }
    out
}

fn analyze_quantizer(a: QuantizerArgs) -> CliResult {
    let q = match a.kind {
        QuantizerKind::TwoLevel => ScalarQuantizer::TwoLevel,
        QuantizerKind::Uniform => ScalarQuantizer::uniform(a.step).map_err(Failure::usage)?,
    };
    let rows = sweep_grid(&q, a.x0, a.delta).map_err(Failure::usage)?;
    emit(a.output.as_deref(), &sweep_csv(&rows))
}

fn parse_basis(s: &str) -> CliResult<pnpcomp::DenseMatrix> {
    match s.split_once(':') {
        None if s == "rotation45" => Ok(rotation_45()),
        Some(("dct", n)) => match n.parse::<usize>() {
            Ok(n) if n > 0 => Ok(dct_basis(n)),
            _ => Err(Failure::usage(format!("bad DCT size {n:?}"))),
        },
        _ => Err(Failure::usage(format!("unknown basis {s:?} (rotation45 | dct:N)"))),
    }
}

fn parse_quantizers(s: &str, n: usize) -> CliResult<Vec<ScalarQuantizer>> {
    match s.split_once(':') {
        None if s == "two-level" => Ok(vec![ScalarQuantizer::TwoLevel; n]),
        None if s == "geometric" => Ok(geometric_steps(n)),
        Some(("uniform", step)) => {
            let step: f64 = step.parse().map_err(|e| Failure::usage(format!("uniform step: {e}")))?;
            Ok(vec![ScalarQuantizer::uniform(step).map_err(Failure::usage)?; n])
        }
        _ => Err(Failure::usage(format!(
            "unknown quantizers {s:?} (two-level | uniform:STEP | geometric)"
        ))),
    }
}

fn analyze_transform(a: TransformArgs) -> CliResult {
    let basis = parse_basis(&a.basis)?;
    let n = basis.rows();
    let quantizers = parse_quantizers(&a.quantizers, n)?;
    let x0: Vec<f64> = match &a.x0 {
        Some(s) => s
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::usage(format!("--x0: {e}")))?,
        None => vec![0.0; n],
    };
    if x0.len() != n {
        return Err(Failure::usage(format!("--x0 needs {n} values, got {}", x0.len())));
    }
    let tc = TransformCoder::new(basis.clone(), quantizers).map_err(Failure::usage)?;
    let mc = MonteCarlo {
        samples: a.samples,
        seed: a.seed,
    };

    let mut out = String::from("delta,lmse");
    for i in 1..=n {
        out.push_str(&format!(",g{i}"));
    }
    out.push('\n');
    for delta in a.delta.values() {
        let fit = tc.fit(&x0, delta, a.area, mc).map_err(Failure::usage)?;
        // transform-domain gains: diag(UᵀAU)
        let gains = (0..n).map(|i| {
            (0..n)
                .flat_map(|r| (0..n).map(move |c| (r, c)))
                .map(|(r, c)| basis.get(r, i) * fit.a.get(r, c) * basis.get(c, i))
                .sum::<f64>()
        });
        out.push_str(&format_g_row(std::iter::once(delta).chain([fit.lmse]).chain(gains)));
    }
    emit(a.output.as_deref(), &out)
}

fn format_g_row(values: impl Iterator<Item = f64>) -> String {
    let cells: Vec<String> = values.map(pnpcomp::quantlin::format_g).collect();
    cells.join(",") + "\n"
}

fn jacobian(a: JacobianArgs) -> CliResult {
    let x = read_pgm(&a.input).or_fail(Category::Io)?;
    let ext = ExternalOptions {
        workdir: None,
        timeout: timeout_of(a.timeout)?,
    };
    let codec = CountingCodec::new(a.codec.build(&ext).or_fail(Category::Codec)?);
    let block = match (a.block, &a.codec) {
        (Some(b), _) => b,
        (None, CodecSpec::Scalar { .. }) => BlockShape::new(1, 1),
        (None, CodecSpec::Pair { .. }) => BlockShape::new(2, 1),
        (None, CodecSpec::Dct { .. }) => BlockShape::new(8, 8),
        (None, _) => return Err(Failure::usage("this codec needs an explicit --block")),
    };
    let steps = match (&a.steps, a.delta_tilde, &a.codec) {
        (Some(s), _, _) => StepSet::new(s.clone()),
        (None, Some(d), _) => StepSet::tenths(d),
        (None, None, CodecSpec::Scalar { step } | CodecSpec::Pair { step }) => StepSet::tenths(*step),
        (None, None, CodecSpec::Dct { scale }) => {
            let c = BlockDctCodec::jpeg_like(*scale).or_fail(Category::Codec)?;
            StepSet::tenths(c.effective_step())
        }
        (None, None, _) => return Err(Failure::usage("this codec needs --delta-tilde or --steps")),
    }
    .map_err(Failure::usage)?;
    let grid = BlockGrid::for_image(&x, block).map_err(Failure::usage)?;
    let lin = pnpcomp::jacobian::linearize(&codec, &x, &grid, &steps).map_err(|e| {
        let category = match e {
            pnpcomp::JacobianError::Codec(_) => Category::Codec,
            _ => Category::Solver,
        };
        Failure {
            category,
            error: e.into(),
        }
    })?;

    let mut out = String::new();
    let count = a.limit.unwrap_or(usize::MAX);
    for (b, m) in grid.blocks().iter().zip(lin.blocks()).take(count) {
        out.push_str(&format!(
            "# block row={} col={} size={}x{}\n",
            b.row, b.col, b.height, b.width
        ));
        out.push_str(&format_matrix(m));
    }
    emit(a.output.as_deref(), &out)?;
    if a.count_calls {
        println!("codec_calls={}", codec.calls());
    }
    Ok(())
}
