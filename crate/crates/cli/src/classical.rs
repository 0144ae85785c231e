use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Subcommand};
use dqc1_core::classical::{
    abc_classical_with, cap_bound, cap_probability_mc, codebook_size, disc_bruteforce, knr_estimate_with, SignMatrix,
    Transcript, KNR_C,
};
use dqc1_core::problems::abc_instance;
use dqc1_core::qstate::haar_unit_vector;
use dqc1_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::report::{self, trial_seed};
use crate::Common;

#[derive(Subcommand)]
pub enum ClassicalCommand {
    /// Sign-sketch inner-product estimation on random unit vectors.
    Knr(KnrArgs),
    /// Randomized ABC protocol over a spherical-cap codebook.
    Abc(AbcArgs),
    /// Monte Carlo cap probability against its lower bound.
    Caps(CapsArgs),
    /// Exact rectangle discrepancy of a small sign matrix.
    Disc(DiscArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct KnrArgs {
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Constant in the sketch length ⌈c/ε²⌉.
    #[arg(long, default_value_t = KNR_C)]
    c: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct AbcArgs {
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Trials per label.
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Row of A (column of C) the players compare.
    #[arg(long, default_value_t = 0)]
    row: usize,
    #[arg(long, default_value_t = KNR_C)]
    c: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct CapsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct DiscArgs {
    /// CSV of ±1 entries.
    #[arg(long)]
    matrix: PathBuf,
    /// CSV of cell weights (uniform when absent).
    #[arg(long)]
    weights: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn knr(a: &KnrArgs) -> Result<String, Error> {
    let runs = (0..a.trials)
        .into_par_iter()
        .map(|t| {
            let s = trial_seed(a.common.seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (u, v) = (haar_unit_vector(a.n, &mut rng), haar_unit_vector(a.n, &mut rng));
            let ip: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
            knr_estimate_with(&u, &v, a.eps, a.c, s ^ 1).map(|r| ((r.estimate - ip).abs(), r.transcript))
        })
        .collect::<Result<Vec<(f64, Transcript)>, Error>>()?;
    let successes = runs.iter().filter(|(err, _)| *err <= a.eps).count();
    let rate = successes as f64 / a.trials.max(1) as f64;
    let mean_err = runs.iter().map(|r| r.0).sum::<f64>() / a.trials.max(1) as f64;
    let bits = runs.first().map_or(0, |r| r.1.total);
    Ok(if a.common.csv {
        report::csv_preamble("classical knr", a, a.common.seed)
            + &format!("trials,success_rate,transcript_bits,mean_abs_error\n{},{rate},{bits},{mean_err}\n", a.trials)
    } else {
        report::json(
            "classical knr",
            a,
            a.common.seed,
            serde_json::json!({
                "trials": a.trials,
                "success_rate": rate,
                "mean_abs_error": mean_err,
                "transcript": runs.first().map(|r| &r.1),
            }),
        )
    })
}

#[derive(Serialize)]
struct LabelSummary {
    label: i8,
    trials: u64,
    success_rate: f64,
    cap_rate: f64,
}

fn abc(a: &AbcArgs) -> Result<String, Error> {
    if a.k > 3 {
        eprintln!("warning: k = {} needs a codebook of {} vectors", a.k, codebook_size(a.k));
    }
    let mut summaries = Vec::new();
    let mut transcript = None;
    for (li, label) in [1i8, -1].into_iter().enumerate() {
        let runs = (0..a.trials)
            .into_par_iter()
            .map(|t| {
                let s = trial_seed(a.common.seed, 2 * t + li as u64);
                let inst = abc_instance(a.n, label, s)?;
                let run = abc_classical_with(&inst, a.row, a.k, a.c, s ^ 1)?;
                Ok((run.answer == inst.answer(), run.meets_cap(a.n, a.k), run.transcript))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let frac = |f: &dyn Fn(&(bool, bool, Transcript)) -> bool| {
            runs.iter().filter(|r| f(r)).count() as f64 / a.trials.max(1) as f64
        };
        summaries.push(LabelSummary { label, trials: a.trials, success_rate: frac(&|r| r.0), cap_rate: frac(&|r| r.1) });
        if transcript.is_none() {
            transcript = runs.into_iter().next().map(|r| r.2);
        }
    }
    Ok(if a.common.csv {
        let bits = transcript.as_ref().map_or(0, |t| t.total);
        let mut s = report::csv_preamble("classical abc", a, a.common.seed);
        s.push_str("label,trials,success_rate,transcript_bits,cap_rate\n");
        for l in &summaries {
            s.push_str(&format!("{},{},{},{bits},{}\n", l.label, l.trials, l.success_rate, l.cap_rate));
        }
        s
    } else {
        report::json(
            "classical abc",
            a,
            a.common.seed,
            serde_json::json!({ "codebook_size": codebook_size(a.k), "labels": summaries, "transcript": transcript }),
        )
    })
}

fn caps(a: &CapsArgs) -> Result<String, Error> {
    let estimate = cap_probability_mc(a.n, a.k, a.samples, a.common.seed)?;
    let bound = cap_bound(a.k);
    let pass = estimate > bound;
    Ok(if a.common.csv {
        report::csv_preamble("classical caps", a, a.common.seed)
            + &format!("n,k,samples,estimate,bound,pass\n{},{},{},{estimate},{bound},{pass}\n", a.n, a.k, a.samples)
    } else {
        report::json(
            "classical caps",
            a,
            a.common.seed,
            serde_json::json!({ "estimate": estimate, "bound": bound, "pass": pass }),
        )
    })
}

fn disc(a: &DiscArgs) -> Result<String, Error> {
    let matrix = report::read_file(&a.matrix)?;
    let weights = a.weights.as_ref().map(|p| report::read_file(p)).transpose()?;
    let d = disc_bruteforce(&SignMatrix::from_csv(&matrix, weights.as_deref())?)?;
    let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    Ok(if a.common.csv {
        report::csv_preamble("classical disc", a, a.common.seed)
            + &format!("value,rows,cols\n{},{},{}\n", d.value, join(&d.rows), join(&d.cols))
    } else {
        report::json(
            "classical disc",
            a,
            a.common.seed,
            serde_json::json!({ "value": d.value, "rectangle": { "rows": d.rows, "cols": d.cols } }),
        )
    })
}

pub fn classical(cmd: &ClassicalCommand) -> Result<ExitCode, Error> {
    let (common, body) = match cmd {
        ClassicalCommand::Knr(a) => (&a.common, knr(a)?),
        ClassicalCommand::Abc(a) => (&a.common, abc(a)?),
        ClassicalCommand::Caps(a) => (&a.common, caps(a)?),
        ClassicalCommand::Disc(a) => (&a.common, disc(a)?),
    };
    report::emit(common, &body)?;
    Ok(ExitCode::SUCCESS)
}
