//! Add/mul circuits over ciphertexts: a line-oriented text format and a
//! level-aware evaluator that refreshes operands when a gate would run out of
//! noise budget.
//!
//! ```text
//! # comment
//! in a b
//! t = mul a b
//! y = add t a
//! out y
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::channel::{ArithmeticChannel, RandomSource};
use crate::cipher::{level_after, Ciphertext, LevelAfter, LevelOp};
use crate::error::{AcesError, Result};
use crate::homo::{hom_add, hom_mul};
use crate::keygen::{LambdaTensor, PublicKey, Refresher};
use crate::refresh::{make_refreshable, refresh_ct, refreshed_level, RefreshabilityCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateOp {
    Add,
    Mul,
}

impl GateOp {
    fn level_op(self) -> LevelOp {
        match self {
            GateOp::Add => LevelOp::Add,
            GateOp::Mul => LevelOp::Mul,
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateOp::Add => "add",
            GateOp::Mul => "mul",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub out: String,
    pub op: GateOp,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub inputs: Vec<String>,
    pub gates: Vec<Gate>,
    pub outputs: Vec<String>,
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut inputs = Vec::new();
    let mut gates = Vec::new();
    let mut outputs = Vec::new();
    let mut known: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| AcesError::Parse { line, message };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        let declare = |name: &str, known: &mut HashSet<String>| -> Result<()> {
            if !valid_name(name) {
                return Err(err(format!("invalid name '{name}'")));
            }
            if !known.insert(name.to_string()) {
                return Err(err(format!("duplicate name '{name}'")));
            }
            Ok(())
        };
        let operand = |name: &str, known: &HashSet<String>| -> Result<String> {
            if known.contains(name) {
                Ok(name.to_string())
            } else {
                Err(err(format!("unknown name '{name}'")))
            }
        };
        match words.as_slice() {
            ["in", names @ ..] if !names.is_empty() => {
                for &n in names {
                    declare(n, &mut known)?;
                    inputs.push(n.to_string());
                }
            }
            ["out", names @ ..] if !names.is_empty() => {
                for &n in names {
                    outputs.push(operand(n, &known)?);
                }
            }
            [out, "=", op, lhs, rhs] => {
                let op = match *op {
                    "add" => GateOp::Add,
                    "mul" => GateOp::Mul,
                    other => return Err(err(format!("unknown operation '{other}'"))),
                };
                let lhs = operand(lhs, &known)?;
                let rhs = operand(rhs, &known)?;
                declare(out, &mut known)?;
                gates.push(Gate {
                    out: out.to_string(),
                    op,
                    lhs,
                    rhs,
                });
            }
            _ => return Err(err(format!("malformed statement '{body}'"))),
        }
    }
    if outputs.is_empty() {
        return Err(AcesError::Parse {
            line: text.lines().count().max(1),
            message: "circuit declares no outputs".into(),
        });
    }
    Ok(Circuit {
        inputs,
        gates,
        outputs,
    })
}

impl Circuit {
    /// Plaintext evaluation over `Z_p`.
    pub fn eval_plain(&self, inputs: &HashMap<String, u64>, p: u64) -> Result<Vec<u64>> {
        let mut env: HashMap<&str, u64> = HashMap::new();
        for name in &self.inputs {
            let v = inputs
                .get(name)
                .ok_or_else(|| AcesError::Parameter(format!("input '{name}' is unbound")))?;
            env.insert(name, v % p);
        }
        for g in &self.gates {
            let (a, b) = (env[g.lhs.as_str()], env[g.rhs.as_str()]);
            let v = match g.op {
                GateOp::Add => (a + b) % p,
                GateOp::Mul => (a * b) % p,
            };
            env.insert(&g.out, v);
        }
        Ok(self.outputs.iter().map(|o| env[o.as_str()]).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefreshPolicy {
    Off,
    /// Refresh when a gate's level would exceed `(q+1)/p - 1 - safety`.
    Auto {
        safety: u64,
    },
}

impl RefreshPolicy {
    /// `safety = κ* + κ^*`, the level of a refreshed ciphertext.
    pub fn auto(ch: &ArithmeticChannel, refresher: &Refresher) -> Self {
        RefreshPolicy::Auto {
            safety: refreshed_level(ch, refresher).min(u64::MAX as u128) as u64,
        }
    }

    pub fn threshold(self, ch: &ArithmeticChannel) -> Option<u64> {
        match self {
            RefreshPolicy::Off => None,
            RefreshPolicy::Auto { safety } => Some(
                ((ch.q() + 1) / ch.p())
                    .saturating_sub(1)
                    .saturating_sub(safety),
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefreshEvent {
    pub wire: String,
    /// Gate whose level triggered the refresh.
    pub gate: String,
    pub pre_level: u64,
    pub post_level: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRefresh {
    pub wire: String,
    pub gate: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardViolation {
    pub gate: String,
    pub op: GateOp,
    pub lhs: (String, u64),
    pub rhs: (String, u64),
    /// Level the gate would have produced.
    pub required: u128,
}

impl fmt::Display for GuardViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gate '{}' = {} {} (level {}) {} (level {}) would reach level {}",
            self.gate, self.op, self.lhs.0, self.lhs.1, self.rhs.0, self.rhs.1, self.required
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalReport {
    /// Final level of every wire.
    pub levels: BTreeMap<String, u64>,
    pub refreshes: Vec<RefreshEvent>,
    pub skipped: Vec<SkippedRefresh>,
    pub violations: Vec<GuardViolation>,
}

#[derive(Debug, Clone)]
pub struct EvalFailure {
    pub wire: String,
    pub error: AcesError,
    pub report: EvalReport,
}

impl fmt::Display for EvalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "evaluation failed at wire '{}': {}",
            self.wire, self.error
        )
    }
}

impl std::error::Error for EvalFailure {}

fn failure(wire: String, error: AcesError, report: EvalReport) -> Box<EvalFailure> {
    Box::new(EvalFailure {
        wire,
        error,
        report,
    })
}

/// Public material the evaluator needs.
pub struct EvalKeys<'a> {
    pub pk: &'a PublicKey,
    pub lambda: &'a LambdaTensor,
    pub refresher: &'a Refresher,
    pub check: &'a dyn RefreshabilityCheck,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub outputs: Vec<(String, Ciphertext)>,
    pub report: EvalReport,
}

/// A gate is acceptable when its level guard holds and the result stays
/// decryptable.
fn gate_level(ch: &ArithmeticChannel, op: GateOp, k1: u64, k2: u64) -> LevelAfter {
    match level_after(op.level_op(), k1, k2, ch) {
        LevelAfter::Level(k) if !ch.is_decryptable_level(k) => LevelAfter::Overflow(k as u128),
        other => other,
    }
}

pub fn evaluate(
    ch: &ArithmeticChannel,
    circuit: &Circuit,
    mut env: HashMap<String, Ciphertext>,
    keys: &EvalKeys<'_>,
    policy: RefreshPolicy,
    rng: &mut RandomSource,
) -> std::result::Result<Evaluation, Box<EvalFailure>> {
    let mut report = EvalReport::default();
    for name in &circuit.inputs {
        match env.get(name) {
            Some(ct) => {
                if let Err(error) = ct.check(ch) {
                    return Err(failure(name.clone(), error, report));
                }
                report.levels.insert(name.clone(), ct.level);
            }
            None => {
                let error = AcesError::Parameter(format!("input '{name}' is unbound"));
                return Err(failure(name.clone(), error, report));
            }
        }
    }
    let threshold = policy.threshold(ch);

    for gate in &circuit.gates {
        let level_of = |env: &HashMap<String, Ciphertext>, w: &str| env[w].level;
        let mut la = gate_level(
            ch,
            gate.op,
            level_of(&env, &gate.lhs),
            level_of(&env, &gate.rhs),
        );

        if let Some(t) = threshold {
            let target = refreshed_level(ch, keys.refresher);
            let mut tried: HashSet<String> = HashSet::new();
            while la.raw() > t as u128 {
                // the higher-level operand that a refresh would actually lower
                let mut cands = vec![gate.lhs.clone(), gate.rhs.clone()];
                cands.sort_by_key(|w| std::cmp::Reverse(level_of(&env, w)));
                let Some(wire) = cands
                    .into_iter()
                    .find(|w| !tried.contains(w) && (level_of(&env, w) as u128) > target)
                else {
                    break;
                };
                tried.insert(wire.clone());
                let pre = level_of(&env, &wire);
                let attempt = make_refreshable(ch, keys.pk, keys.check, &env[&wire], rng)
                    .and_then(|ct| refresh_ct(ch, keys.pk, keys.lambda, keys.refresher, &ct, rng));
                match attempt {
                    Ok(fresh) => {
                        report.refreshes.push(RefreshEvent {
                            wire: wire.clone(),
                            gate: gate.out.clone(),
                            pre_level: pre,
                            post_level: fresh.level,
                        });
                        report.levels.insert(wire.clone(), fresh.level);
                        env.insert(wire, fresh);
                    }
                    Err(e) => report.skipped.push(SkippedRefresh {
                        wire,
                        gate: gate.out.clone(),
                        reason: e.to_string(),
                    }),
                }
                la = gate_level(
                    ch,
                    gate.op,
                    level_of(&env, &gate.lhs),
                    level_of(&env, &gate.rhs),
                );
            }
        }

        let (kl, kr) = (level_of(&env, &gate.lhs), level_of(&env, &gate.rhs));
        if let LevelAfter::Overflow(required) = la {
            let v = GuardViolation {
                gate: gate.out.clone(),
                op: gate.op,
                lhs: (gate.lhs.clone(), kl),
                rhs: (gate.rhs.clone(), kr),
                required,
            };
            let error = AcesError::NoiseBudget(v.to_string());
            report.violations.push(v);
            return Err(failure(gate.out.clone(), error, report));
        }
        let (a, b) = (&env[&gate.lhs], &env[&gate.rhs]);
        let out = match gate.op {
            GateOp::Add => hom_add(ch, a, b),
            GateOp::Mul => hom_mul(ch, keys.lambda, a, b),
        };
        match out {
            Ok(ct) => {
                report.levels.insert(gate.out.clone(), ct.level);
                env.insert(gate.out.clone(), ct);
            }
            Err(error) => return Err(failure(gate.out.clone(), error, report)),
        }
    }

    let outputs = circuit
        .outputs
        .iter()
        .map(|o| (o.clone(), env[o].clone()))
        .collect();
    Ok(Evaluation { outputs, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{decrypt, encrypt};
    use crate::keygen::keygen;
    use crate::refresh::SecretRefreshCheck;

    #[test]
    fn parse_examples() {
        let c = parse_circuit("in a\nout a").unwrap();
        assert_eq!(c.inputs, vec!["a"]);
        assert!(c.gates.is_empty());
        let c = parse_circuit("in a b\nt = add a b\nout t").unwrap();
        assert_eq!(
            c.gates,
            vec![Gate {
                out: "t".into(),
                op: GateOp::Add,
                lhs: "a".into(),
                rhs: "b".into()
            }]
        );
        match parse_circuit("t = add a a") {
            Err(AcesError::Parse { line: 1, message }) => assert!(message.contains("unknown")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            ("in a\nin a\nout a", 2, "duplicate"),
            ("in a\n# c\nt = sub a a\nout t", 3, "unknown operation"),
            ("in a\nt = add a\nout t", 2, "malformed"),
            ("in a b # inputs\nout c", 2, "unknown name"),
        ];
        for (text, want, needle) in cases {
            match parse_circuit(text) {
                Err(AcesError::Parse { line, message }) => {
                    assert_eq!(line, want, "{text}");
                    assert!(message.contains(needle), "{message}");
                }
                other => panic!("{other:?}"),
            }
        }
        assert!(parse_circuit("in a\n").is_err());
    }

    fn setup(seed: u64) -> (ArithmeticChannel, crate::keygen::KeyBundle, RandomSource) {
        let ch = ArithmeticChannel::desk();
        let mut rng = RandomSource::from_u64(seed);
        let b = keygen(&ch, &mut rng).unwrap();
        (ch, b, rng)
    }

    #[test]
    fn adder_and_identity() {
        let (ch, b, mut rng) = setup(41);
        let check = SecretRefreshCheck { sk: &b.secret };
        let keys = EvalKeys {
            pk: &b.public.key,
            lambda: &b.public.lambda,
            refresher: &b.public.refresher,
            check: &check,
        };
        let id = parse_circuit("in a\nout a").unwrap();
        let a = encrypt(&ch, &b.public.key, 1, &mut rng).unwrap();
        let env = HashMap::from([("a".to_string(), a.clone())]);
        let ev = evaluate(&ch, &id, env, &keys, RefreshPolicy::Off, &mut rng).unwrap();
        assert_eq!(ev.outputs[0].1, a);
        assert!(ev.report.refreshes.is_empty());

        let add = parse_circuit("in a b\nt = add a b\nout t").unwrap();
        for (ma, mb) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let env = HashMap::from([
                (
                    "a".to_string(),
                    encrypt(&ch, &b.public.key, ma, &mut rng).unwrap(),
                ),
                (
                    "b".to_string(),
                    encrypt(&ch, &b.public.key, mb, &mut rng).unwrap(),
                ),
            ]);
            let ev = evaluate(&ch, &add, env, &keys, RefreshPolicy::Off, &mut rng).unwrap();
            assert_eq!(
                decrypt(&ch, &b.secret, &ev.outputs[0].1).unwrap(),
                (ma + mb) % 2
            );
        }
    }

    #[test]
    fn squaring_chain_needs_refresh() {
        let (ch, b, mut rng) = setup(42);
        let check = SecretRefreshCheck { sk: &b.secret };
        let keys = EvalKeys {
            pk: &b.public.key,
            lambda: &b.public.lambda,
            refresher: &b.public.refresher,
            check: &check,
        };
        let chain =
            parse_circuit("in a\nt1 = mul a a\nt2 = mul t1 t1\nt3 = mul t2 t2\nout t3").unwrap();
        let a = encrypt(&ch, &b.public.key, 1, &mut rng).unwrap();
        let env = HashMap::from([("a".to_string(), a)]);

        let fail = evaluate(
            &ch,
            &chain,
            env.clone(),
            &keys,
            RefreshPolicy::Off,
            &mut rng,
        )
        .unwrap_err();
        assert_eq!(fail.wire, "t3");
        assert_eq!(fail.report.violations.len(), 1);

        let policy = RefreshPolicy::auto(&ch, &b.public.refresher);
        assert_eq!(policy.threshold(&ch), Some(7447));
        let ev = evaluate(&ch, &chain, env, &keys, policy, &mut rng).unwrap();
        assert!(!ev.report.refreshes.is_empty());
        assert!(ev.report.refreshes.iter().all(|r| r.post_level == 60));
        let out = &ev.outputs[0].1;
        assert_eq!(out.level, 7440);
        assert_eq!(decrypt(&ch, &b.secret, out).unwrap(), 1);
    }
}
