use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Subcommand};
use dqc1_core::problems::{
    abc_instance, from_cmatrix, middle_pad, razborov_sample_with, to_cmatrix, AbcInstance, RazborovDist,
};
use dqc1_core::protocol::PlayerInput;
use dqc1_core::qstate::CMatrix;
use dqc1_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::report;
use crate::Common;

#[derive(Subcommand)]
pub enum GenCommand {
    /// Orthogonal A, B, C with ABC = label·I.
    AbcInstance(AbcArgs),
    /// Draws from the disjointness distributions.
    Razborov(RazborovArgs),
    /// Pads a short disjointness pair to a MIDDLE input.
    MiddlePad(PadArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct AbcArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    label: i8,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct RazborovArgs {
    #[arg(long)]
    n: usize,
    /// mu0 (one shared index) or mu1 (disjoint).
    #[arg(long, default_value = "mu1")]
    dist: String,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct PadArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    #[command(flatten)]
    common: Common,
}

/// On-disk ABC instance; matrices use the exchange format.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AbcFile {
    n: usize,
    label: i8,
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
}

pub fn read_abc_instance(path: &Path) -> Result<AbcInstance, Error> {
    let text = report::read_file(path)?;
    let f: AbcFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })?;
    let inst = AbcInstance::from_matrices(from_cmatrix(&f.a)?, from_cmatrix(&f.b)?, from_cmatrix(&f.c)?)?;
    if inst.label != f.label || inst.n != f.n {
        return Err(Error::Input(format!("{}: stored label or size disagrees with the matrices", path.display())));
    }
    Ok(inst)
}

fn bits_text(v: &[u8]) -> String {
    v.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
}

pub fn gen(cmd: &GenCommand) -> Result<ExitCode, Error> {
    match cmd {
        GenCommand::AbcInstance(a) => {
            let inst = abc_instance(a.n, a.label, a.common.seed)?;
            let f = AbcFile { n: inst.n, label: inst.label, a: to_cmatrix(&inst.a), b: to_cmatrix(&inst.b), c: to_cmatrix(&inst.c) };
            let body = serde_json::to_string_pretty(&f).expect("instances serialize") + "\n";
            report::emit(&a.common, &body)?;
        }
        GenCommand::Razborov(a) => {
            let which: RazborovDist = a.dist.parse()?;
            let label = match which {
                RazborovDist::Mu0 => 0,
                RazborovDist::Mu1 => 1,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
            let draws = (0..a.count)
                .map(|_| razborov_sample_with(a.n, which, &mut rng).map(|(x, y)| (bits_text(&x), bits_text(&y))))
                .collect::<Result<Vec<_>, Error>>()?;
            let body = if a.common.csv {
                let mut s = report::csv_preamble("gen razborov", a, a.common.seed) + "x,y,label\n";
                for (x, y) in &draws {
                    s.push_str(&format!("{x},{y},{label}\n"));
                }
                s
            } else {
                let rows: Vec<_> = draws.iter().map(|(x, y)| serde_json::json!({ "x": x, "y": y, "label": label })).collect();
                report::json("gen razborov", a, a.common.seed, serde_json::json!({ "draws": rows }))
            };
            report::emit(&a.common, &body)?;
        }
        GenCommand::MiddlePad(a) => {
            let x = PlayerInput::parse_bits(&a.x)?;
            let y = PlayerInput::parse_bits(&a.y)?;
            let (px, py) = middle_pad(x.bits()?, y.bits()?, a.n)?;
            let t = px.iter().zip(&py).filter(|(p, q)| **p == 1 && **q == 1).count() as i64 - a.n as i64 / 2;
            let (px, py) = (bits_text(&px), bits_text(&py));
            let body = if a.common.csv {
                report::csv_preamble("gen middle-pad", a, a.common.seed) + &format!("x,y,t\n{px},{py},{t}\n")
            } else {
                report::json("gen middle-pad", a, a.common.seed, serde_json::json!({ "x": px, "y": py, "t": t }))
            };
            report::emit(&a.common, &body)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
