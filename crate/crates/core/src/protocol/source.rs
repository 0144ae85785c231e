use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{gates, kernel, orthonormal_completion, CMatrix, C64};

/// A player's private input, as seen by generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlayerInput {
    #[default]
    None,
    Bits(Vec<u8>),
    Matrix(CMatrix),
}

impl PlayerInput {
    pub fn bits(&self) -> Result<&[u8]> {
        match self {
            PlayerInput::Bits(b) => Ok(b),
            _ => Err(Error::Input("expected a bit-string input".into())),
        }
    }

    pub fn matrix(&self) -> Result<&CMatrix> {
        match self {
            PlayerInput::Matrix(m) => Ok(m),
            _ => Err(Error::Input("expected a matrix input".into())),
        }
    }

    /// Parses literal `0`/`1` text.
    pub fn parse_bits(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Input(format!("'{s}' is not a 0/1 string"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(PlayerInput::Bits)
    }

    pub fn label(&self) -> String {
        match self {
            PlayerInput::None => "-".into(),
            PlayerInput::Bits(b) => b.iter().map(|&x| if x == 1 { '1' } else { '0' }).collect(),
            PlayerInput::Matrix(m) => format!("matrix{}x{}", m.rows(), m.cols()),
        }
    }
}

/// Where a round's operator comes from. Indices inside `Circuit` and
/// `Dispatch` bodies are local to the op's target list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitarySource {
    Explicit(CMatrix),
    Generator {
        name: String,
        #[serde(default)]
        params: serde_json::Value,
    },
    Adjoint(Box<UnitarySource>),
    /// First target is the control qubit.
    Controlled(Box<UnitarySource>),
    Circuit {
        width: usize,
        ops: Vec<GateOp>,
    },
    /// `X ⊗ |φ⟩⟨φ| + I ⊗ (I − |φ⟩⟨φ|)` with `|φ⟩ = prep|0…0⟩`; the first
    /// target is the flag.
    FlagState(Box<UnitarySource>),
    /// Targets are `register ++ counter`: applies `branches[j]` to the
    /// register when the counter reads `j`, then adds `shift` to the
    /// counter modulo `branches.len()`.
    Dispatch {
        register_width: usize,
        counter_width: usize,
        branches: Vec<UnitarySource>,
        #[serde(default)]
        shift: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateOp {
    pub unitary: UnitarySource,
    pub targets: Vec<usize>,
}

impl GateOp {
    pub fn new(unitary: UnitarySource, targets: Vec<usize>) -> Self {
        GateOp { unitary, targets }
    }

    pub fn explicit(m: CMatrix, targets: Vec<usize>) -> Self {
        GateOp::new(UnitarySource::Explicit(m), targets)
    }

    pub fn generator(name: &str, params: serde_json::Value, targets: Vec<usize>) -> Self {
        GateOp::new(UnitarySource::Generator { name: name.into(), params }, targets)
    }

    pub fn remap(&self, f: &impl Fn(usize) -> usize) -> Self {
        GateOp { unitary: self.unitary.clone(), targets: self.targets.iter().map(|&t| f(t)).collect() }
    }
}

/// A fully resolved gate on global qubits, active when every control matches.
#[derive(Debug, Clone)]
pub struct Prim {
    pub matrix: Arc<CMatrix>,
    pub targets: Vec<usize>,
    pub controls: Vec<(usize, bool)>,
}

pub type GeneratorFn = fn(&serde_json::Value, &PlayerInput) -> Result<CMatrix>;

/// Name → generator table. Built once; read-only afterwards.
#[derive(Clone, Default)]
pub struct Registry {
    map: HashMap<String, GeneratorFn>,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut names: Vec<&String> = self.map.keys().collect();
        names.sort();
        f.debug_struct("Registry").field("generators", &names).finish()
    }
}

static BUILTIN: once_cell::sync::Lazy<Registry> = once_cell::sync::Lazy::new(|| {
    let mut r = Registry::default();
    crate::problems::register_builtins(&mut r);
    crate::transforms::register_builtins(&mut r);
    r
});

impl Registry {
    pub fn builtin() -> &'static Registry {
        &BUILTIN
    }

    pub fn register(&mut self, name: &str, f: GeneratorFn) {
        self.map.insert(name.to_string(), f);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    pub fn resolve(&self, name: &str, params: &serde_json::Value, input: &PlayerInput) -> Result<CMatrix> {
        let f = self.map.get(name).ok_or_else(|| Error::UnknownGenerator(name.to_string()))?;
        let m = f(params, input)?;
        let dev = m.unitarity_deviation();
        if dev > crate::qstate::TOL {
            return Err(Error::NumericalIntegrity(format!(
                "generator '{name}' produced a non-unitary matrix (deviation {dev:.3e})"
            )));
        }
        Ok(m)
    }

    /// Expands `source` applied on global `targets` into primitive gates.
    pub fn lower(
        &self,
        source: &UnitarySource,
        targets: &[usize],
        input: &PlayerInput,
        out: &mut Vec<Prim>,
    ) -> Result<()> {
        match source {
            UnitarySource::Explicit(m) => push_checked(out, m.clone(), targets),
            UnitarySource::Generator { name, params } => {
                let m = self.resolve(name, params, input)?;
                push_checked(out, m, targets)
            }
            UnitarySource::Adjoint(inner) => {
                let mut tmp = Vec::new();
                self.lower(inner, targets, input, &mut tmp)?;
                out.extend(tmp.into_iter().rev().map(|p| Prim {
                    matrix: Arc::new(p.matrix.adjoint()),
                    targets: p.targets,
                    controls: p.controls,
                }));
                Ok(())
            }
            UnitarySource::Controlled(inner) => {
                let (&ctrl, rest) = targets
                    .split_first()
                    .ok_or_else(|| Error::shape("controlled op needs a control target"))?;
                let mut tmp = Vec::new();
                self.lower(inner, rest, input, &mut tmp)?;
                out.extend(tmp.into_iter().map(|mut p| {
                    p.controls.push((ctrl, true));
                    p
                }));
                Ok(())
            }
            UnitarySource::Circuit { width, ops } => {
                if targets.len() != *width {
                    return Err(Error::dim(format!("circuit of width {width} applied to {} qubits", targets.len())));
                }
                for op in ops {
                    let global = op
                        .targets
                        .iter()
                        .map(|&l| {
                            targets.get(l).copied().ok_or_else(|| {
                                Error::Index(format!("circuit-local qubit {l} outside width {width}"))
                            })
                        })
                        .collect::<Result<Vec<usize>>>()?;
                    self.lower(&op.unitary, &global, input, out)?;
                }
                Ok(())
            }
            UnitarySource::FlagState(prep) => {
                let (&flag, reg) = targets
                    .split_first()
                    .ok_or_else(|| Error::shape("flag-state op needs a flag target"))?;
                let phi = self.prepared_state(prep, reg.len(), input)?;
                let m = flag_matrix(&phi)?;
                let mut all = vec![flag];
                all.extend_from_slice(reg);
                push_checked(out, m, &all)
            }
            UnitarySource::Dispatch { register_width, counter_width, branches, shift } => {
                if targets.len() != register_width + counter_width {
                    return Err(Error::dim(format!(
                        "dispatch over {}+{} qubits applied to {}",
                        register_width,
                        counter_width,
                        targets.len()
                    )));
                }
                let r = branches.len();
                if r == 0 || r > (1usize << counter_width) {
                    return Err(Error::shape(format!("{r} branches do not fit a {counter_width}-qubit counter")));
                }
                let (reg, ctr) = targets.split_at(*register_width);
                for (j, b) in branches.iter().enumerate() {
                    let mut tmp = Vec::new();
                    self.lower(b, reg, input, &mut tmp)?;
                    let ctrl: Vec<(usize, bool)> = ctr
                        .iter()
                        .enumerate()
                        .map(|(i, &q)| (q, (j >> (counter_width - 1 - i)) & 1 == 1))
                        .collect();
                    out.extend(tmp.into_iter().map(|mut p| {
                        p.controls.extend_from_slice(&ctrl);
                        p
                    }));
                }
                if shift % r != 0 {
                    let perm: Vec<usize> = (0..1usize << counter_width)
                        .map(|j| if j < r { (j + shift) % r } else { j })
                        .collect();
                    out.push(Prim { matrix: Arc::new(gates::permutation(&perm)), targets: ctr.to_vec(), controls: vec![] });
                }
                Ok(())
            }
        }
    }

    /// `prep|0…0⟩` on `width` qubits.
    pub fn prepared_state(&self, prep: &UnitarySource, width: usize, input: &PlayerInput) -> Result<Vec<C64>> {
        let local: Vec<usize> = (0..width).collect();
        let mut prims = Vec::new();
        self.lower(prep, &local, input, &mut prims)?;
        let mut psi = vec![C64::new(0.0, 0.0); 1 << width];
        psi[0] = C64::new(1.0, 0.0);
        for p in &prims {
            kernel::apply_local(&mut psi, width, &p.targets, &p.controls, &p.matrix);
        }
        Ok(psi)
    }

    /// Dense matrix of `source` on `width` qubits (local targets `0..width`).
    pub fn dense(&self, source: &UnitarySource, width: usize, input: &PlayerInput) -> Result<CMatrix> {
        let local: Vec<usize> = (0..width).collect();
        let mut prims = Vec::new();
        self.lower(source, &local, input, &mut prims)?;
        Ok(dense_from_prims(&prims, width))
    }
}

pub(crate) fn dense_from_prims(prims: &[Prim], width: usize) -> CMatrix {
    let d = 1usize << width;
    // Columns of U are U|j⟩; evolve every basis vector at once as a 2·width register.
    let mut m = CMatrix::identity(d);
    for p in prims {
        kernel::apply_local(m.data_mut(), 2 * width, &p.targets, &p.controls, &p.matrix);
    }
    m
}

fn push_checked(out: &mut Vec<Prim>, m: CMatrix, targets: &[usize]) -> Result<()> {
    if !m.is_square() || m.rows() != 1usize << targets.len() {
        return Err(Error::dim(format!(
            "{}x{} matrix applied to {} qubits",
            m.rows(),
            m.cols(),
            targets.len()
        )));
    }
    out.push(Prim { matrix: Arc::new(m), targets: targets.to_vec(), controls: vec![] });
    Ok(())
}

/// Conjugates `X ⊗ |0⟩⟨0| + I ⊗ (I − |0⟩⟨0|)` by a basis completion `V` of
/// `phi`, giving `X ⊗ |φ⟩⟨φ| + I ⊗ (I − |φ⟩⟨φ|)`.
fn flag_matrix(phi: &[C64]) -> Result<CMatrix> {
    let d = phi.len();
    let v = orthonormal_completion(phi)?;
    let e0 = CMatrix::outer(&CMatrix::basis_ket(d, 0));
    let rest = CMatrix::identity(d).sub(&e0)?;
    let base = gates::x().kron(&e0).add(&CMatrix::identity(2).kron(&rest))?;
    let lift = CMatrix::identity(2).kron(v.matrix());
    lift.matmul(&base)?.matmul(&lift.adjoint())
}
