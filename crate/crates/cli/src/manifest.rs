//! Flat `key=value` record of a resolved postprocessing run.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use pnpcomp::denoise::DenoiserSpec;
use pnpcomp::solver::Linearization;
use pnpcomp::{BlockShape, CodecSpec, OutputIterate, SolverConfig, StepSet};

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub input: PathBuf,
    pub output: PathBuf,
    pub log: Option<PathBuf>,
    pub codec: CodecSpec,
    pub denoiser: DenoiserSpec,
    pub config: SolverConfig,
    pub timeout_secs: Option<f64>,
}

const FORMAT: &str = "pnpcomp-manifest-1";

fn linearization_text(l: &Linearization) -> String {
    match l {
        Linearization::FiniteDifference => "finite-difference".into(),
        Linearization::PairRotated { step } => format!("pair-rotated:{step}"),
    }
}

fn parse_linearization(s: &str) -> Result<Linearization> {
    match s.split_once(':') {
        None if s == "finite-difference" => Ok(Linearization::FiniteDifference),
        Some(("pair-rotated", step)) => Ok(Linearization::PairRotated {
            step: step.parse().context("pair-rotated step")?,
        }),
        _ => bail!("unknown linearization {s:?}"),
    }
}

impl RunManifest {
    /// Floats use the shortest representation that parses back exactly.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let steps: Vec<String> = c.steps.deltas().iter().map(f64::to_string).collect();
        let mut lines = vec![
            format!("format={FORMAT}"),
            format!("input={}", self.input.display()),
            format!("output={}", self.output.display()),
        ];
        if let Some(log) = &self.log {
            lines.push(format!("log={}", log.display()));
        }
        lines.extend([
            format!("codec={}", self.codec),
            format!("denoiser={}", self.denoiser),
            format!("lambda={}", c.lambda),
            format!("beta={}", c.beta),
            format!("mu={}", c.mu),
            format!("steps={}", steps.join(",")),
            format!("max_iters={}", c.max_iters),
            format!("stop_threshold={}", c.stop_threshold),
            format!("block={}", c.block_shape),
            format!("clip_output={}", c.clip_output),
            format!("output_iterate={}", c.output),
            format!("linearization={}", linearization_text(&c.linearization)),
        ]);
        if let Some(t) = self.timeout_secs {
            lines.push(format!("timeout_secs={t}"));
        }
        lines.join("\n") + "\n"
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", n + 1))?;
            if map.insert(k.to_string(), v.to_string()).is_some() {
                bail!("line {}: duplicate key {k:?}", n + 1);
            }
        }
        let mut take = |k: &str| map.remove(k).ok_or_else(|| anyhow!("manifest lacks {k:?}"));
        if take("format")? != FORMAT {
            bail!("unsupported manifest format");
        }
        fn num<T: FromStr>(k: &str, v: String) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>().map_err(|e| anyhow!("{k}: {e}"))
        }
        let input = PathBuf::from(take("input")?);
        let output = PathBuf::from(take("output")?);
        let codec: CodecSpec = num("codec", take("codec")?)?;
        let denoiser: DenoiserSpec = num("denoiser", take("denoiser")?)?;
        let steps = take("steps")?
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|e| anyhow!("steps: {e}")))
            .collect::<Result<Vec<_>>>()?;
        let mut config = SolverConfig::new(
            num("lambda", take("lambda")?)?,
            num("beta", take("beta")?)?,
            num("mu", take("mu")?)?,
            StepSet::new(steps)?,
            num("max_iters", take("max_iters")?)?,
            num::<BlockShape>("block", take("block")?)?,
        );
        config.stop_threshold = num("stop_threshold", take("stop_threshold")?)?;
        config.clip_output = num("clip_output", take("clip_output")?)?;
        config.output = num::<OutputIterate>("output_iterate", take("output_iterate")?)?;
        config.linearization = parse_linearization(&take("linearization")?)?;
        let log = map.remove("log").map(PathBuf::from);
        let timeout_secs = map
            .remove("timeout_secs")
            .map(|v| num("timeout_secs", v))
            .transpose()?;
        if let Some(k) = map.keys().next() {
            bail!("unknown manifest key {k:?}");
        }
        Ok(Self {
            input,
            output,
            log,
            codec,
            denoiser,
            config,
            timeout_secs,
        })
    }
}
