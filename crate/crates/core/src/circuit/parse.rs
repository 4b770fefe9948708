//! Line-oriented circuit description files.
//!
//! ```text
//! // comment
//! qubits 2
//! #encoder angle            (or: #encoder amplitude)
//! RY 0 x0                   feature 0, encoded as angle π·x0
//! #layers
//! RX 0 free                 one trainable slot
//! CRX 0,1 free              control first, target second
//! U3 1 free3                three trainable slots
//! RZ 0 pi/2                 constant angle: float, or [k]pi[/d]
//! CX 1,0
//! #measure z 2              per-qubit ⟨Z⟩ on qubits 0..2
//! #measure group 3 0-4;5-9;10-14
//! ```
//!
//! Trainable slots are numbered in order of appearance.

use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{Circuit, Encoding, Gate, GateKind, MeasurementSpec, ParamRef, Readout};
use crate::error::{Error, Result};

const SYN4: &str = include_str!("../../circuits/syn4.qc");
const SYN16: &str = include_str!("../../circuits/syn16.qc");

/// Built-in reference architectures: `syn4` (2 qubits, 14 trainable gates) and
/// `syn16` (4 qubits, 22 trainable gates).
pub fn reference_circuit(name: &str) -> Result<Circuit> {
    match name {
        "syn4" => parse_circuit(SYN4),
        "syn16" => parse_circuit(SYN16),
        other => Err(Error::Config(format!("no reference circuit named {other:?}"))),
    }
}

#[derive(PartialEq)]
enum Section {
    Header,
    Encoder,
    Layers,
    Done,
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut n_qubits = None;
    let mut encoding = Encoding::Angle;
    let mut encoder = Vec::new();
    let mut layers = Vec::new();
    let mut measurement = None;
    let mut section = Section::Header;
    let mut next_slot = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "qubits" => {
                if section != Section::Header || n_qubits.is_some() {
                    return Err(Error::parse(line_no, "`qubits` must come first, once"));
                }
                let n: usize = toks
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(line_no, "expected `qubits <N>`"))?;
                if toks.len() != 2 {
                    return Err(Error::parse(line_no, "trailing tokens after qubit count"));
                }
                n_qubits = Some(n);
            }
            "#encoder" => {
                if section != Section::Header {
                    return Err(Error::parse(line_no, "#encoder must precede #layers"));
                }
                encoding = match toks.get(1).copied() {
                    None | Some("angle") => Encoding::Angle,
                    Some("amplitude") => Encoding::Amplitude,
                    Some(t) => return Err(Error::parse(line_no, format!("unknown encoding {t:?}"))),
                };
                section = Section::Encoder;
            }
            "#layers" => {
                if matches!(section, Section::Layers | Section::Done) {
                    return Err(Error::parse(line_no, "duplicate #layers"));
                }
                section = Section::Layers;
            }
            "#measure" => {
                let n = n_qubits.ok_or_else(|| Error::parse(line_no, "missing `qubits` header"))?;
                let spec = parse_measure(&toks[1..]).map_err(|m| Error::parse(line_no, m))?;
                spec.validate(n).map_err(|e| Error::parse(line_no, e.to_string()))?;
                measurement = Some(spec);
                section = Section::Done;
            }
            t if t.starts_with('#') => {
                return Err(Error::parse(line_no, format!("unknown section marker {t:?}")));
            }
            _ => {
                let in_encoder = match section {
                    Section::Encoder => true,
                    Section::Layers => false,
                    _ => return Err(Error::parse(line_no, "gate outside #encoder/#layers")),
                };
                let gate = parse_gate(&toks, in_encoder, &mut next_slot)
                    .map_err(|m| Error::parse(line_no, m))?;
                if let Some(n) = n_qubits {
                    if let Some(q) = gate.qubits.iter().find(|&&q| q >= n) {
                        return Err(Error::parse(line_no, format!("qubit {q} >= {n}")));
                    }
                }
                if in_encoder {
                    encoder.push(gate);
                } else {
                    layers.push(gate);
                }
            }
        }
    }

    let n_qubits = n_qubits.ok_or_else(|| Error::parse(0, "missing `qubits` header"))?;
    let measurement = measurement.ok_or_else(|| Error::parse(0, "missing #measure line"))?;
    Circuit::new(n_qubits, encoding, encoder, layers, measurement)
}

fn parse_gate(toks: &[&str], in_encoder: bool, next_slot: &mut usize) -> std::result::Result<Gate, String> {
    let kind = GateKind::from_name(toks[0]).ok_or_else(|| format!("unknown gate {:?}", toks[0]))?;
    let qubits = toks
        .get(1)
        .ok_or("missing qubit list")?
        .split(',')
        .map(|q| q.parse::<usize>().map_err(|_| format!("bad qubit index {q:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let rest = &toks[2..];
    let params = match rest {
        ["free"] | ["free3"] if in_encoder => return Err("encoder gates cannot be trainable".into()),
        ["free"] if kind.arity() == 1 => {
            *next_slot += 1;
            vec![ParamRef::Slot(*next_slot - 1)]
        }
        ["free3"] if kind.arity() == 3 => {
            let s = *next_slot;
            *next_slot += 3;
            (s..s + 3).map(ParamRef::Slot).collect()
        }
        [t] if t.starts_with('x') && kind.arity() == 1 => {
            if !in_encoder {
                return Err("feature angles are only allowed in #encoder".into());
            }
            let k = t[1..].parse().map_err(|_| format!("bad feature token {t:?}"))?;
            vec![ParamRef::Feature(k)]
        }
        angles if angles.len() == kind.arity() => angles
            .iter()
            .map(|t| parse_angle(t).map(ParamRef::Const))
            .collect::<std::result::Result<_, _>>()?,
        _ => {
            return Err(format!(
                "{kind} takes {} angle token(s), got {:?}",
                kind.arity(),
                rest
            ))
        }
    };
    Gate::new(kind, qubits, params).map_err(|e| e.to_string())
}

/// Float literal, or `[k]pi[/d]` with optional leading `-`.
fn parse_angle(t: &str) -> std::result::Result<f64, String> {
    if let Ok(v) = t.parse::<f64>() {
        if v.is_finite() {
            return Ok(v);
        }
    }
    let bad = || format!("bad angle {t:?}");
    let (sign, body) = match t.strip_prefix('-') {
        Some(b) => (-1.0, b),
        None => (1.0, t),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (body, 1.0),
    };
    let k = num.strip_suffix("pi").ok_or_else(bad)?;
    let k = if k.is_empty() { 1.0 } else { k.parse::<f64>().map_err(|_| bad())? };
    Ok(sign * k * PI / den)
}

fn parse_measure(toks: &[&str]) -> std::result::Result<MeasurementSpec, String> {
    match toks {
        ["z", n] => Ok(MeasurementSpec::per_qubit_z(
            n.parse().map_err(|_| format!("bad class count {n:?}"))?,
        )),
        ["group", n, groups] => {
            let n: usize = n.parse().map_err(|_| format!("bad class count {n:?}"))?;
            let groups = groups
                .split(';')
                .map(parse_index_set)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if groups.len() != n {
                return Err(format!("{} groups for {n} classes", groups.len()));
            }
            MeasurementSpec::grouping(groups).map_err(|e| e.to_string())
        }
        _ => Err(format!("expected `z <classes>` or `group <classes> <sets>`, got {toks:?}")),
    }
}

fn parse_index_set(s: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let bad = || format!("bad index set {s:?}");
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if b < a {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

/// Serializes a circuit in the format accepted by [`parse_circuit`].
pub fn write_circuit(c: &Circuit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "qubits {}", c.n_qubits);
    let enc = match c.encoding {
        Encoding::Angle => "angle",
        Encoding::Amplitude => "amplitude",
    };
    let _ = writeln!(s, "#encoder {enc}");
    let fmt_gate = |g: &Gate| {
        let qs: Vec<String> = g.qubits.iter().map(|q| q.to_string()).collect();
        let mut line = format!("{} {}", g.kind, qs.join(","));
        if g.trainable {
            line.push_str(if g.kind.arity() == 3 { " free3" } else { " free" });
        } else {
            for p in &g.params {
                match p {
                    ParamRef::Const(a) => {
                        let _ = write!(line, " {a:?}");
                    }
                    ParamRef::Feature(k) => {
                        let _ = write!(line, " x{k}");
                    }
                    ParamRef::Slot(_) => unreachable!("untrainable gate with slot"),
                }
            }
        }
        line
    };
    for g in &c.encoder {
        let _ = writeln!(s, "{}", fmt_gate(g));
    }
    let _ = writeln!(s, "#layers");
    for g in &c.layers {
        let _ = writeln!(s, "{}", fmt_gate(g));
    }
    match &c.measurement.readout {
        Readout::PerQubitZ => {
            let _ = writeln!(s, "#measure z {}", c.measurement.n_classes);
        }
        Readout::StateGrouping(groups) => {
            let sets: Vec<String> = groups
                .iter()
                .map(|g| g.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
                .collect();
            let _ = writeln!(s, "#measure group {} {}", groups.len(), sets.join(";"));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_circuits_have_expected_gate_counts() {
        let c = reference_circuit("syn4").unwrap();
        assert_eq!(c.n_qubits, 2);
        assert_eq!(c.trainable_gates().len(), 14);
        assert_eq!(c.n_features(), 4);
        let c = reference_circuit("syn16").unwrap();
        assert_eq!(c.n_qubits, 4);
        assert_eq!(c.trainable_gates().len(), 22);
        assert_eq!(c.n_features(), 16);
        assert!(reference_circuit("nope").is_err());
    }

    #[test]
    fn parses_all_forms() {
        let text = "qubits 4\n#encoder amplitude\n#layers\nU3 1 free3\nRZ 0 pi/2\nRX 2 -3pi/2\nCX 1,0\nCRY 0,3 free\n#measure group 3 0-4;5-9;10-14\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.n_params(), 4);
        assert_eq!(c.layers[1].params, vec![ParamRef::Const(PI / 2.0)]);
        assert_eq!(c.layers[2].params, vec![ParamRef::Const(-1.5 * PI)]);
        assert_eq!(c.measurement.n_classes, 3);
        let again = parse_circuit(&write_circuit(&c)).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("qubits 2\n#layers\nFOO 0 free\n#measure z 2\n", 3),
            ("qubits 2\n#layers\nRX 0 free\n#measure z 3\n", 4),
            ("qubits 2\n#bogus\n", 2),
            ("qubits 2\n#layers\nRX 5 free\n#measure z 1\n", 3),
            ("qubits 2\n#layers\nRX 0 x1\n#measure z 1\n", 3),
            ("qubits 2\n#encoder\nRX 0 free\n", 3),
            ("qubits 2\n#layers\nCX 0,1 free\n", 3),
        ];
        for (text, want) in cases {
            match parse_circuit(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }
}
