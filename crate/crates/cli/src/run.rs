use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, ValueEnum};
use dqc1_core::problems::{abc_instance, all_bit_strings, builtin_protocol, ip2_value, MiddleInstance};
use dqc1_core::protocol::{validate, CostReport, PlayerInput, ProtocolSpec};
use dqc1_core::simulator::{self, run_ensemble, RunReport, Sample};
use dqc1_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::report;
use crate::Common;

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendArg {
    Density,
    Ensemble,
    Trace,
}

/// Where a protocol comes from: a built-in family or a descriptor file.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Source {
    /// ip2-clocked, ip2-one-clean, middle, middle-one-clean, abc, accept-all, reject-all.
    #[arg(long, conflicts_with = "descriptor")]
    pub protocol: Option<String>,
    /// Protocol descriptor (JSON).
    #[arg(long)]
    pub descriptor: Option<PathBuf>,
    /// Problem size for built-in families.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
}

impl Source {
    pub fn load(&self) -> Result<ProtocolSpec, Error> {
        let p = match (&self.protocol, &self.descriptor) {
            (Some(name), None) => builtin_protocol(name, self.n)?,
            (None, Some(path)) => ProtocolSpec::from_descriptor(&report::read_file(path)?)?,
            _ => return Err(Error::Input("give exactly one of --protocol or --descriptor".into())),
        };
        let v = validate(&p);
        if !v.is_valid() {
            return Err(Error::Validation(v.violations.iter().map(|v| v.message.clone()).collect()));
        }
        Ok(p)
    }
}

#[derive(Args, Debug, Serialize)]
pub struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Alice's bits.
    #[arg(long)]
    x: Option<String>,
    /// Bob's bits.
    #[arg(long)]
    y: Option<String>,
    /// Every pair of n-bit strings.
    #[arg(long)]
    all_inputs: bool,
    /// This many random pairs of n-bit strings.
    #[arg(long, conflicts_with = "all_inputs")]
    samples: Option<usize>,
    /// ABC instance file (see `gen abc-instance`).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Generate an ABC instance with this label (1 or -1) from the seed.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "instance")]
    label: Option<i8>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Visit this many sampled mixed-register states on the ensemble backend.
    #[arg(long)]
    mixed_samples: Option<usize>,
    /// Reference acceptance for bias columns; required for descriptors.
    #[arg(long)]
    p: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct Record {
    #[serde(flatten)]
    report: RunReport,
    label: Option<u8>,
    bias: Option<f64>,
}

fn label_for(name: Option<&str>, x: &[u8], y: &[u8]) -> Result<Option<u8>, Error> {
    Ok(match name {
        Some("ip2" | "ip2-clocked" | "ip2-one-clean") => Some(ip2_value(x, y)),
        Some("middle" | "middle-one-clean") => Some(MiddleInstance::new(x.to_vec(), y.to_vec())?.label()),
        _ => None,
    })
}

fn bits_arg(s: &Option<String>) -> Result<PlayerInput, Error> {
    s.as_deref().map_or(Ok(PlayerInput::None), PlayerInput::parse_bits)
}

fn input_sets(a: &RunArgs) -> Result<Vec<(Vec<PlayerInput>, Option<u8>)>, Error> {
    let name = a.source.protocol.as_deref();
    if name == Some("abc") || a.instance.is_some() || a.label.is_some() {
        let inst = match (&a.instance, a.label) {
            (Some(path), _) => crate::gen::read_abc_instance(path)?,
            (None, Some(label)) => abc_instance(a.source.n, label, a.common.seed)?,
            (None, None) => return Err(Error::Input("abc needs --instance or --label".into())),
        };
        return Ok(vec![(inst.inputs(), Some(inst.answer()))]);
    }
    let n = a.source.n;
    let pairs: Vec<(Vec<u8>, Vec<u8>)> = if a.all_inputs {
        if 2 * n > 20 {
            return Err(Error::BackendLimit(format!("--all-inputs at n = {n} means 2^{} runs", 2 * n)));
        }
        all_bit_strings(n).into_iter().flat_map(|x| all_bit_strings(n).into_iter().map(move |y| (x.clone(), y))).collect()
    } else if let Some(k) = a.samples {
        let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
        let mut draw = || (0..n).map(|_| rng.random_range(0..2u8)).collect::<Vec<u8>>();
        (0..k).map(|_| (draw(), draw())).collect()
    } else {
        let (x, y) = (bits_arg(&a.x)?, bits_arg(&a.y)?);
        let label = match (&x, &y) {
            (PlayerInput::Bits(x), PlayerInput::Bits(y)) => label_for(name, x, y)?,
            _ => None,
        };
        return Ok(vec![(vec![x, y], label)]);
    };
    pairs
        .into_iter()
        .map(|(x, y)| {
            let label = label_for(name, &x, &y)?;
            Ok((vec![PlayerInput::Bits(x), PlayerInput::Bits(y)], label))
        })
        .collect()
}

fn simulate(a: &RunArgs, p: &ProtocolSpec, inputs: &[PlayerInput]) -> Result<RunReport, Error> {
    let mut r = match (a.backend, a.mixed_samples) {
        (Some(BackendArg::Density), _) => simulator::run_density(p, inputs)?,
        (Some(BackendArg::Trace), _) => simulator::run_trace(p, inputs)?,
        (_, Some(count)) => run_ensemble(p, inputs, Sample::Count { count, seed: a.common.seed })?,
        (Some(BackendArg::Ensemble), None) => run_ensemble(p, inputs, Sample::All)?,
        (None, None) => simulator::run(p, inputs, None)?,
    };
    if !a.common.timing {
        r.elapsed = 0.0;
    }
    Ok(r)
}

pub fn run(a: &RunArgs) -> Result<ExitCode, Error> {
    let p = a.source.load()?;
    let reference = match (a.p, &a.source.protocol) {
        (Some(r), _) => Some(r),
        (None, Some(_)) => p.declared.map(|d| d.p),
        (None, None) => None,
    };
    let mut records = Vec::new();
    for (inputs, label) in input_sets(a)? {
        let report = simulate(a, &p, &inputs)?;
        let bias = match (label, reference) {
            (Some(1), Some(r)) => Some(report.acceptance - r),
            (Some(_), Some(r)) => Some(r - report.acceptance),
            _ => None,
        };
        records.push(Record { report, label, bias });
    }
    let labelled: Vec<(f64, u8)> = records.iter().filter_map(|r| r.label.map(|l| (r.report.acceptance, l))).collect();
    let bias = match reference {
        Some(r) if labelled.len() == records.len() => Some(simulator::bias_from_acceptances(&labelled, r)?),
        _ => None,
    };
    let cost = bias.filter(|&b| b > 0.0 && b <= 0.5).map(|b| CostReport::for_protocol(&p, b)).transpose()?;

    let body = if a.common.csv {
        let mut out = report::csv_preamble("run", a, a.common.seed);
        out.push_str(RunReport::CSV_HEADER);
        out.push_str(",label,bias\n");
        for r in &records {
            out.push_str(&format!(
                "{},{},{}\n",
                r.report.csv_row(),
                r.label.map(|l| l.to_string()).unwrap_or_default(),
                r.bias.map(|b| b.to_string()).unwrap_or_default()
            ));
        }
        out
    } else {
        report::json(
            "run",
            a,
            a.common.seed,
            serde_json::json!({
                "reference": reference,
                "records": records,
                "bias": bias,
                "communication": dqc1_core::protocol::communication_cost(&p)?,
                "cost": cost,
            }),
        )
    };
    report::emit(&a.common, &body)?;
    Ok(ExitCode::SUCCESS)
}
