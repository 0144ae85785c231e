use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use dqc1_core::protocol::{validate, CostReport, ProtocolSpec};
use dqc1_core::transforms::{apply_chain, pp_to_oneway, PpProtocol, TransformCert, PASS_NAMES};
use dqc1_core::Error;
use serde::Serialize;

use crate::report;
use crate::run::Source;
use crate::Common;

#[derive(Args, Debug, Serialize)]
pub struct TransformArgs {
    #[command(flatten)]
    source: Source,
    /// Classical protocol for pp-oneway: xor-toy, and-xor-toy, or a JSON file.
    #[arg(long)]
    pp: Option<String>,
    /// Bias of the classical protocol (pp-oneway).
    #[arg(long)]
    eps: Option<f64>,
    /// Pass name; repeat or comma-separate to chain.
    #[arg(long = "pass", required = true, value_delimiter = ',')]
    passes: Vec<String>,
    /// Also write the transformed descriptor here.
    #[arg(long)]
    emit: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn load_pp(spec: &str) -> Result<PpProtocol, Error> {
    match spec {
        "xor-toy" => Ok(PpProtocol::xor_toy()),
        "and-xor-toy" => Ok(PpProtocol::and_xor_toy()),
        path => serde_json::from_str(&report::read_file(path.as_ref())?)
            .map_err(|e| Error::Parse { location: format!("{path}:{}:{}", e.line(), e.column()), message: e.to_string() }),
    }
}

fn apply(a: &TransformArgs) -> Result<(ProtocolSpec, TransformCert), Error> {
    if let Some(bad) = a.passes.iter().find(|p| !PASS_NAMES.contains(&p.as_str())) {
        return Err(Error::Input(format!("unknown pass '{bad}' (one of {})", PASS_NAMES.join(", "))));
    }
    let (start, rest, first) = if a.passes[0] == "pp-oneway" {
        let spec = a.pp.as_deref().ok_or_else(|| Error::Input("pp-oneway needs --pp".into()))?;
        let eps = a.eps.ok_or_else(|| Error::Input("pp-oneway needs --eps".into()))?;
        let (p, cert) = pp_to_oneway(&load_pp(spec)?, eps)?;
        (p, &a.passes[1..], Some(cert))
    } else {
        (a.source.load()?, &a.passes[..], None)
    };
    if rest.iter().any(|p| p == "pp-oneway") {
        return Err(Error::Input("pp-oneway can only start a chain".into()));
    }
    let names: Vec<&str> = rest.iter().map(String::as_str).collect();
    let (out, cert) = if names.is_empty() {
        let c = first.clone().ok_or_else(|| Error::Input("no passes given".into()))?;
        (start, c)
    } else {
        let (out, cert) = apply_chain(&names, &start)?;
        (out, first.map_or(cert.clone(), |f| f.then(&cert)))
    };
    Ok((out, cert))
}

pub fn transform(a: &TransformArgs) -> Result<ExitCode, Error> {
    let (out, cert) = apply(a)?;
    let validation = validate(&out);
    if let Some(path) = &a.emit {
        report::write_file(path, &(out.to_descriptor() + "\n"))?;
    }
    let cost = cert.predicted_bias.filter(|&b| b > 0.0 && b <= 0.5).map(|b| CostReport::for_protocol(&out, b)).transpose()?;
    let body = if a.common.csv {
        let mut s = report::csv_preamble("transform", a, a.common.seed);
        s.push_str(CostReport::CSV_HEADER);
        s.push('\n');
        if let Some(c) = &cost {
            s.push_str(&c.csv_row());
            s.push('\n');
        }
        s
    } else {
        let descriptor: serde_json::Value = serde_json::to_value(&out).expect("protocols serialize");
        report::json(
            "transform",
            a,
            a.common.seed,
            serde_json::json!({
                "cert": cert,
                "cost": cost,
                "valid": validation.is_valid(),
                "violations": validation.violations,
                "descriptor": if a.emit.is_some() { serde_json::Value::Null } else { descriptor },
            }),
        )
    };
    report::emit(&a.common, &body)?;
    if !validation.is_valid() {
        return Err(Error::Validation(validation.violations.iter().map(|v| v.message.clone()).collect()));
    }
    Ok(ExitCode::SUCCESS)
}
