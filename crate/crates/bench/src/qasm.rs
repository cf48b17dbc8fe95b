//! OpenQASM 2.0 export of optimized circuits, plus a reader for the same
//! subset.
//!
//! Register index `i` is the simulator's qubit `i`, which is the most
//! significant bit of a basis index. `rz` differs from the simulator's `R_z`
//! by a global phase under the `qelib1.inc` definition.

use std::fmt::Write as _;
use std::path::Path;

use ipgq::ansatz::CircuitTemplate;
use ipgq::sim::{Angle, Circuit, Gate};

use crate::error::{BenchError, Result};

/// Circuit text with every angle resolved from `params`.
pub fn to_qasm(template: &CircuitTemplate, params: &[f64]) -> Result<String> {
    template.check_params(params)?;
    let q = template.num_qubits();
    let mut out = format!("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[{q}];\ncreg c[{q}];\n");
    for gate in template.gate_list() {
        let line = match gate {
            Gate::Rz { qubit, angle } => format!("rz({}) q[{qubit}];", fmt_angle(resolve(angle, params))),
            Gate::Ry { qubit, angle } => format!("ry({}) q[{qubit}];", fmt_angle(resolve(angle, params))),
            Gate::Cnot { control, target } => format!("cx q[{control}],q[{target}];"),
        };
        let _ = writeln!(out, "{line}");
    }
    out.push_str("measure q -> c;\n");
    Ok(out)
}

pub fn export_qasm(template: &CircuitTemplate, params: &[f64], path: &Path) -> Result<()> {
    let text = to_qasm(template, params)?;
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

fn resolve(angle: Angle, params: &[f64]) -> f64 {
    match angle {
        Angle::Fixed(v) => v,
        Angle::Param(i) => params[i],
    }
}

/// Seventeen significant digits, always with a decimal point.
fn fmt_angle(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reads the subset written by [`to_qasm`]: one register, `rz`, `ry`, `cx`.
/// Measurements and barriers are skipped.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut num_qubits = None;
    let mut gates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| BenchError::Qasm { line: line_no, message };
        let line = raw.split("//").next().unwrap_or("").trim();
        for stmt in line.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (head, rest) = stmt.split_once(char::is_whitespace).unwrap_or((stmt, ""));
            let rest = rest.trim();
            match head {
                "OPENQASM" => {
                    if rest != "2.0" {
                        return Err(err(format!("unsupported version {rest}")));
                    }
                }
                "include" | "creg" | "measure" | "barrier" => {}
                "qreg" => {
                    if num_qubits.is_some() {
                        return Err(err("more than one quantum register".into()));
                    }
                    let n = rest
                        .strip_prefix("q[")
                        .and_then(|r| r.strip_suffix(']'))
                        .and_then(|n| n.parse::<usize>().ok())
                        .ok_or_else(|| err(format!("bad register declaration '{rest}'")))?;
                    num_qubits = Some(n);
                }
                "cx" => {
                    let (c, t) = rest.split_once(',').ok_or_else(|| err(format!("bad cx operands '{rest}'")))?;
                    gates.push(Gate::Cnot { control: qubit(c).map_err(err)?, target: qubit(t).map_err(err)? });
                }
                _ => {
                    let (name, arg) = head
                        .split_once('(')
                        .and_then(|(n, a)| Some((n, a.strip_suffix(')')?)))
                        .ok_or_else(|| err(format!("unsupported statement '{stmt}'")))?;
                    let angle: f64 = arg.trim().parse().map_err(|_| err(format!("bad angle '{arg}'")))?;
                    let q = qubit(rest).map_err(err)?;
                    let angle = Angle::Fixed(angle);
                    gates.push(match name {
                        "rz" => Gate::Rz { qubit: q, angle },
                        "ry" => Gate::Ry { qubit: q, angle },
                        _ => return Err(err(format!("unsupported gate '{name}'"))),
                    });
                }
            }
        }
    }
    let n = num_qubits.ok_or(BenchError::Qasm { line: 0, message: "no qreg declaration".into() })?;
    Ok(Circuit::new(n, gates)?)
}

fn qubit(operand: &str) -> std::result::Result<usize, String> {
    operand
        .trim()
        .strip_prefix("q[")
        .and_then(|r| r.strip_suffix(']'))
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| format!("bad qubit operand '{}'", operand.trim()))
}
