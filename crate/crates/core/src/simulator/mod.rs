//! Exact acceptance probabilities of protocols.
//!
//! Three backends: a full density matrix, an average of pure-state runs over
//! the mixed register, and a trace evaluation for Hadamard-test shaped
//! protocols.

mod amplify;
mod oneway;
mod trace;

pub use amplify::{amplify, binomial_tail_ge, AmplifyResult, RepetitionPlan};
pub use oneway::{oneway_bias, oneway_protocol};
pub use trace::{run_trace, run_trace_blocks, trace_value};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{validate, PlayerInput, Prim, ProtocolSpec, Registry};
use crate::qstate::{checked_probability, kernel, DensityMatrix, C64, ONE, ZERO};

pub const DENSITY_LIMIT: usize = 12;
pub const ENSEMBLE_LIMIT: usize = 20;
pub const TRACE_LIMIT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Density,
    Ensemble,
    Trace,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Density => "density",
            Backend::Ensemble => "ensemble",
            Backend::Trace => "trace",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(Backend::Density),
            "ensemble" => Ok(Backend::Ensemble),
            "trace" => Ok(Backend::Trace),
            _ => Err(Error::Input(format!("unknown backend '{s}'"))),
        }
    }
}

/// Which mixed-register basis states the ensemble backend visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sample {
    All,
    Count { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub input: String,
    pub acceptance: f64,
    pub backend: Backend,
    pub seed: Option<u64>,
    pub elapsed: f64,
}

impl RunReport {
    pub const CSV_HEADER: &'static str = "input,acceptance,backend,seed,elapsed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.input,
            self.acceptance,
            self.backend.name(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.elapsed
        )
    }
}

/// Extra knobs shared by the backends.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions<'a> {
    pub registry: &'a Registry,
    /// Mixed qubits pinned to a basis value instead of `I/2`.
    pub fixed: &'a [(usize, bool)],
}

impl Default for RunOptions<'_> {
    fn default() -> Self {
        RunOptions { registry: Registry::builtin(), fixed: &[] }
    }
}

pub fn input_label(inputs: &[PlayerInput]) -> String {
    inputs.iter().map(|i| i.label()).collect::<Vec<_>>().join("|")
}

/// All rounds of `p` as primitive gates on global qubits.
pub fn lower_protocol(p: &ProtocolSpec, inputs: &[PlayerInput], reg: &Registry) -> Result<Vec<Prim>> {
    let none = PlayerInput::None;
    let mut prims = Vec::new();
    for round in &p.rounds {
        let input = inputs.get(round.player).unwrap_or(&none);
        for op in &round.ops {
            reg.lower(&op.unitary, &op.targets, input, &mut prims)?;
        }
    }
    Ok(prims)
}

fn check_fixed(p: &ProtocolSpec, fixed: &[(usize, bool)]) -> Result<()> {
    for (i, &(q, _)) in fixed.iter().enumerate() {
        if q < p.layout.clean || q >= p.total_qubits() {
            return Err(Error::Index(format!("qubit {q} is not a mixed qubit")));
        }
        if fixed[..i].iter().any(|&(o, _)| o == q) {
            return Err(Error::Index(format!("qubit {q} fixed twice")));
        }
    }
    Ok(())
}

fn initial_fixed(p: &ProtocolSpec, fixed: &[(usize, bool)]) -> Vec<(usize, bool)> {
    let mut all: Vec<(usize, bool)> = (0..p.layout.clean).map(|q| (q, false)).collect();
    all.extend_from_slice(fixed);
    all
}

/// `ρ₀ → U ρ₀ U†` over the full density matrix, then `Tr(Pρ)`.
pub fn run_density(p: &ProtocolSpec, inputs: &[PlayerInput]) -> Result<RunReport> {
    run_density_with(p, inputs, RunOptions::default())
}

pub fn run_density_with(p: &ProtocolSpec, inputs: &[PlayerInput], opts: RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    validate(p).into_result()?;
    let q = p.total_qubits();
    if q > DENSITY_LIMIT {
        return Err(Error::BackendLimit(format!(
            "density backend handles at most {DENSITY_LIMIT} qubits, protocol has {q}; try the ensemble or trace backend"
        )));
    }
    check_fixed(p, opts.fixed)?;
    let prims = lower_protocol(p, inputs, opts.registry)?;
    let mut rho = DensityMatrix::with_fixed_bits(q, &initial_fixed(p, opts.fixed));
    for g in &prims {
        kernel::conjugate_density(rho.data_mut(), q, &g.targets, &g.controls, &g.matrix);
    }
    let proj = p.measurement.projector()?;
    let mut prho = rho.into_matrix();
    kernel::apply_local(prho.data_mut(), 2 * q, &p.measurement.targets(), &[], proj.matrix());
    let acceptance = checked_probability(prho.trace())?;
    Ok(RunReport {
        input: input_label(inputs),
        acceptance,
        backend: Backend::Density,
        seed: None,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

pub fn run_ensemble(p: &ProtocolSpec, inputs: &[PlayerInput], sample: Sample) -> Result<RunReport> {
    run_ensemble_with(p, inputs, sample, RunOptions::default())
}

/// Average over pure-state runs, one per basis state of the free mixed qubits.
pub fn run_ensemble_with(
    p: &ProtocolSpec,
    inputs: &[PlayerInput],
    sample: Sample,
    opts: RunOptions,
) -> Result<RunReport> {
    let start = Instant::now();
    validate(p).into_result()?;
    let q = p.total_qubits();
    if q > ENSEMBLE_LIMIT {
        return Err(Error::BackendLimit(format!(
            "ensemble backend handles at most {ENSEMBLE_LIMIT} qubits, protocol has {q}"
        )));
    }
    check_fixed(p, opts.fixed)?;
    let prims = lower_protocol(p, inputs, opts.registry)?;
    let proj = p.measurement.projector()?;
    let mtargets = p.measurement.targets();

    let pinned = initial_fixed(p, opts.fixed);
    let free: Vec<usize> = (0..q).filter(|j| !pinned.iter().any(|&(f, _)| f == *j)).collect();
    let base = pinned.iter().filter(|&&(_, v)| v).fold(0usize, |acc, &(f, _)| acc | 1 << (q - 1 - f));
    let spread = |b: usize| -> usize {
        free.iter()
            .enumerate()
            .filter(|(i, _)| (b >> (free.len() - 1 - i)) & 1 == 1)
            .fold(base, |acc, (_, &f)| acc | 1 << (q - 1 - f))
    };

    let branch = |index: usize| -> Result<f64> {
        let mut psi = vec![ZERO; 1 << q];
        psi[index] = ONE;
        for g in &prims {
            kernel::apply_local(&mut psi, q, &g.targets, &g.controls, &g.matrix);
        }
        let before = psi.clone();
        kernel::apply_local(&mut psi, q, &mtargets, &[], proj.matrix());
        let overlap: C64 = before.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
        checked_probability(overlap)
    };

    let (acceptance, seed) = match sample {
        Sample::All => {
            let n = 1usize << free.len();
            let mut sum = 0.0;
            for b in 0..n {
                sum += branch(spread(b))?;
            }
            (sum / n as f64, None)
        }
        Sample::Count { count, seed } => {
            if count == 0 {
                return Err(Error::domain("ensemble sample count must be positive"));
            }
            let n = 1usize << free.len();
            let mut sum = 0.0;
            for i in 0..count {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                sum += branch(spread(rng.random_range(0..n)))?;
            }
            (sum / count as f64, Some(seed))
        }
    };
    Ok(RunReport {
        input: input_label(inputs),
        acceptance: acceptance.clamp(0.0, 1.0),
        backend: Backend::Ensemble,
        seed,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Runs on the requested backend (`None`: density when it fits, else ensemble).
pub fn run(p: &ProtocolSpec, inputs: &[PlayerInput], backend: Option<Backend>) -> Result<RunReport> {
    match backend {
        Some(Backend::Density) => run_density(p, inputs),
        Some(Backend::Ensemble) => run_ensemble(p, inputs, Sample::All),
        Some(Backend::Trace) => run_trace(p, inputs),
        None if p.total_qubits() <= DENSITY_LIMIT => run_density(p, inputs),
        None => run_ensemble(p, inputs, Sample::All),
    }
}

/// `min(min over 1-inputs (acc − p), min over 0-inputs (p − acc))`.
pub fn bias_from_acceptances(labelled: &[(f64, u8)], reference: f64) -> Result<f64> {
    if labelled.is_empty() {
        return Err(Error::domain("bias needs at least one labelled input"));
    }
    labelled
        .iter()
        .map(|&(acc, label)| match label {
            1 => Ok(acc - reference),
            0 => Ok(reference - acc),
            _ => Err(Error::domain(format!("label {label} is not 0 or 1"))),
        })
        .try_fold(f64::INFINITY, |m, e| e.map(|e| m.min(e)))
}

pub fn measure_bias(p: &ProtocolSpec, input_set: &[(Vec<PlayerInput>, u8)], reference: f64) -> Result<f64> {
    let accs = input_set
        .iter()
        .map(|(inp, label)| run(p, inp, None).map(|r| (r.acceptance, *label)))
        .collect::<Result<Vec<_>>>()?;
    bias_from_acceptances(&accs, reference)
}
