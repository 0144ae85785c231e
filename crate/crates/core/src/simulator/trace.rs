use std::time::Instant;

use super::{input_label, lower_protocol, Backend, RunReport, TRACE_LIMIT};
use crate::error::{Error, Result};
use crate::protocol::{validate, Measurement, PlayerInput, Prim, ProtocolSpec, Registry};
use crate::qstate::{checked_probability, kernel, CMatrix, C64, TOL};

/// Acceptance of a trace-form protocol: `½ ± Re Tr(W)/2^{d+1}` where `W` is
/// the operator controlled by the clean qubit.
pub fn run_trace(p: &ProtocolSpec, inputs: &[PlayerInput]) -> Result<RunReport> {
    let start = Instant::now();
    let blocks = run_trace_blocks(p, inputs)?;
    let acceptance = blocks.iter().sum::<f64>() / blocks.len() as f64;
    Ok(RunReport {
        input: input_label(inputs),
        acceptance: checked_probability(C64::new(acceptance, 0.0))?,
        backend: Backend::Trace,
        seed: None,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// `Tr(W)` for a trace-form protocol.
pub fn trace_value(p: &ProtocolSpec, inputs: &[PlayerInput]) -> Result<C64> {
    let shape = TraceShape::analyse(p, inputs, Registry::builtin())?;
    Ok(shape.block_traces()?.into_iter().sum())
}

/// Acceptance with the counter register started at each value `j`, in order.
/// Without a counter this is a single entry.
pub fn run_trace_blocks(p: &ProtocolSpec, inputs: &[PlayerInput]) -> Result<Vec<f64>> {
    let shape = TraceShape::analyse(p, inputs, Registry::builtin())?;
    let d = shape.register.len();
    let sign = shape.sign;
    shape
        .block_traces()?
        .into_iter()
        .map(|t| checked_probability(C64::new(0.5 + sign * t.re / 2f64.powi(d as i32 + 1), 0.0)))
        .collect()
}

struct TraceShape {
    /// Non-control, non-counter qubits, in index order.
    register: Vec<usize>,
    counter: Vec<usize>,
    body: Vec<Prim>,
    sign: f64,
}

impl TraceShape {
    fn analyse(p: &ProtocolSpec, inputs: &[PlayerInput], reg: &Registry) -> Result<Self> {
        validate(p).into_result()?;
        let tf = p.trace_form.as_ref().ok_or_else(|| Error::shape("protocol is not tagged as trace form"))?;
        let q = p.total_qubits();
        if q > TRACE_LIMIT {
            return Err(Error::BackendLimit(format!("trace backend handles at most {TRACE_LIMIT} qubits, protocol has {q}")));
        }
        let c = tf.control;
        if p.layout.clean != 1 || c != 0 {
            return Err(Error::shape("trace form needs qubit 0 as the only clean qubit and control"));
        }
        let sign = match p.measurement {
            Measurement::SingleQubit { index, outcome: 0, .. } if index == c => 1.0,
            Measurement::SingleQubit { index, outcome: 1, .. } if index == c => -1.0,
            _ => return Err(Error::shape("trace form must measure the control qubit")),
        };

        let prims = lower_protocol(p, inputs, reg)?;
        let is_h_on_c = |g: &Prim| {
            g.targets == [c] && g.controls.is_empty() && g.matrix.max_abs_diff(&crate::qstate::gates::h()) < TOL
        };
        let mut stack: Vec<Prim> = Vec::with_capacity(prims.len());
        for g in prims {
            if is_h_on_c(&g) && stack.last().is_some_and(is_h_on_c) {
                stack.pop();
            } else {
                stack.push(g);
            }
        }
        if stack.len() < 2 || !is_h_on_c(&stack[0]) || !is_h_on_c(&stack[stack.len() - 1]) {
            return Err(Error::shape("trace form must open and close with H on the control"));
        }
        let mut body: Vec<Prim> = stack[1..stack.len() - 1].to_vec();
        for g in &mut body {
            let before = g.controls.len();
            g.controls.retain(|&(q, v)| !(q == c && v));
            if g.controls.len() + 1 != before || g.targets.contains(&c) || g.controls.iter().any(|&(q, _)| q == c) {
                return Err(Error::shape("every inner gate must be controlled once by the control qubit"));
            }
        }
        let counter = tf.counter.clone();
        for g in &body {
            let on_counter = g.targets.iter().filter(|t| counter.contains(t)).count();
            if on_counter > 0 {
                let pure_counter = on_counter == g.targets.len()
                    && g.controls.iter().all(|(q, _)| counter.contains(q))
                    && permutation_of(&g.matrix).is_some();
                if !pure_counter {
                    return Err(Error::shape("gates on the counter must be permutations of the counter alone"));
                }
            }
        }
        let register: Vec<usize> = (0..q).filter(|j| *j != c && !counter.contains(j)).collect();
        Ok(TraceShape { register, counter, body, sign })
    }

    /// `Tr((I ⊗ ⟨j|) W (I ⊗ |j⟩))` for every counter value `j`.
    fn block_traces(&self) -> Result<Vec<C64>> {
        let d = self.register.len();
        let w = self.counter.len();
        let local = |qb: usize| self.register.iter().position(|&r| r == qb);
        let counter_bit = |value: usize, qb: usize| -> bool {
            let i = self.counter.iter().position(|&r| r == qb).expect("counter qubit");
            (value >> (w - 1 - i)) & 1 == 1
        };
        let mut out = Vec::with_capacity(1 << w);
        for j in 0..1usize << w {
            let mut value = j;
            let mut m = CMatrix::identity(1 << d);
            for g in &self.body {
                let ctr_ok = g
                    .controls
                    .iter()
                    .filter(|(q, _)| self.counter.contains(q))
                    .all(|&(q, v)| counter_bit(value, q) == v);
                if !ctr_ok {
                    continue;
                }
                if g.targets.iter().any(|t| self.counter.contains(t)) {
                    let perm = permutation_of(&g.matrix).expect("checked");
                    let t = g.targets.len();
                    let local_in = g.targets.iter().fold(0usize, |acc, &q| (acc << 1) | counter_bit(value, q) as usize);
                    let local_out = perm[local_in];
                    for (i, &q) in g.targets.iter().enumerate() {
                        let pos = self.counter.iter().position(|&r| r == q).expect("counter qubit");
                        let bit = 1usize << (w - 1 - pos);
                        if (local_out >> (t - 1 - i)) & 1 == 1 {
                            value |= bit;
                        } else {
                            value &= !bit;
                        }
                    }
                    continue;
                }
                let targets: Vec<usize> = g.targets.iter().map(|&q| local(q).expect("register qubit")).collect();
                let controls: Vec<(usize, bool)> = g
                    .controls
                    .iter()
                    .filter(|(q, _)| !self.counter.contains(q))
                    .map(|&(q, v)| (local(q).expect("register qubit"), v))
                    .collect();
                kernel::apply_local(m.data_mut(), 2 * d, &targets, &controls, &g.matrix);
            }
            out.push(if value == j { m.trace() } else { C64::new(0.0, 0.0) });
        }
        Ok(out)
    }
}

/// `perm[j] = i` when the matrix maps `|j⟩` to `|i⟩`; `None` unless it is a
/// 0/1 permutation matrix.
fn permutation_of(m: &CMatrix) -> Option<Vec<usize>> {
    let n = m.rows();
    let mut perm = vec![usize::MAX; n];
    for j in 0..n {
        for i in 0..n {
            let z = m[(i, j)];
            if (z.re - 1.0).abs() < TOL && z.im.abs() < TOL {
                if perm[j] != usize::MAX {
                    return None;
                }
                perm[j] = i;
            } else if z.norm() > TOL {
                return None;
            }
        }
    }
    perm.iter().all(|&p| p != usize::MAX).then_some(perm)
}
