use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aces_core::cipher::in_sigma_submodule;
use aces_core::circuit::EvalFailure;
use aces_core::refresh::{build_locator_db, make_refreshable};
use aces_core::serial::*;
use aces_core::*;
use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "aces",
    version,
    about = "Homomorphic encryption over arithmetic channels"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a channel and key material.
    Keygen {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "bigN")]
        big_n: usize,
        #[arg(long)]
        k0: u64,
        #[arg(long)]
        seed: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        omega: u64,
        /// Coefficients of u, lowest degree first, comma separated
        /// (default X^degree - 1).
        #[arg(long, allow_hyphen_values = true)]
        u: Option<String>,
        /// Random vectors classified into the locator database.
        #[arg(long, default_value_t = 256)]
        locators: usize,
    },
    /// Encrypt a message in Z_p.
    Encrypt {
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        message: u64,
        #[arg(long)]
        seed: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a ciphertext and print the message.
    Decrypt {
        #[arg(long)]
        secret: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        ct: PathBuf,
    },
    /// Evaluate a circuit on encrypted inputs.
    Eval(EvalArgs),
    /// Reset the noise level of a refreshable ciphertext.
    Refresh {
        #[arg(long = "pub")]
        public: PathBuf,
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
        /// Skip the refreshability check.
        #[arg(long)]
        unchecked: bool,
        #[arg(long, default_value = "00")]
        seed: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print level and divisibility diagnostics for a ciphertext.
    Inspect {
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        channel: Option<PathBuf>,
        #[arg(long = "pub")]
        public: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long = "pub")]
    public: PathBuf,
    #[arg(long)]
    channel: PathBuf,
    /// Accepted for compatibility; lambda is always read from the public file.
    #[arg(long = "lambda-in-pub")]
    lambda_in_pub: bool,
    #[arg(long)]
    circuit: PathBuf,
    /// NAME=FILE, once per circuit input.
    #[arg(long = "input", value_parser = parse_binding)]
    inputs: Vec<(String, PathBuf)>,
    #[arg(long, value_enum, default_value_t = RefreshMode::Auto)]
    refresh: RefreshMode,
    #[command(flatten)]
    check: CheckArgs,
    #[arg(long, default_value = "00")]
    seed: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RefreshMode {
    Auto,
    Off,
}

/// How refreshability is decided: with the secret key, or publicly with a
/// locator database.
#[derive(clap::Args)]
struct CheckArgs {
    #[arg(long, conflicts_with = "locators")]
    secret: Option<PathBuf>,
    #[arg(long)]
    locators: Option<PathBuf>,
    /// Directors combined per public test.
    #[arg(long, default_value_t = 2)]
    budget: usize,
}

fn parse_binding(s: &str) -> std::result::Result<(String, PathBuf), String> {
    let (name, file) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=FILE, got '{s}'"))?;
    if name.is_empty() || file.is_empty() {
        return Err(format!("expected NAME=FILE, got '{s}'"));
    }
    Ok((name.to_string(), PathBuf::from(file)))
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        let code = match err.downcast_ref::<AcesError>() {
            Some(AcesError::NoiseBudget(_) | AcesError::RefreshRefused(_)) => 2,
            _ if err.is::<EvalFailure>() => 2,
            _ => 1,
        };
        Failure { code, err }
    }
}

impl From<AcesError> for Failure {
    fn from(e: AcesError) -> Self {
        anyhow::Error::from(e).into()
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn rng_from_hex(seed: &str) -> anyhow::Result<RandomSource> {
    let bytes = hex::decode(seed.trim_start_matches("0x"))
        .with_context(|| format!("seed '{seed}' is not hex"))?;
    Ok(RandomSource::from_seed_bytes(&bytes))
}

fn load_channel(path: &Path) -> anyhow::Result<ArithmeticChannel> {
    channel_from_json(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_ct(ch: &ArithmeticChannel, path: &Path) -> anyhow::Result<Ciphertext> {
    ciphertext_from_json(ch, &read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_public(ch: &ArithmeticChannel, path: &Path) -> anyhow::Result<PublicMaterial> {
    public_from_json(ch, &read(path)?).with_context(|| format!("in {}", path.display()))
}

enum Check {
    Secret(SecretKey),
    Public(LocatorDb, usize),
    Reject,
}

struct RejectAll;

impl RefreshabilityCheck for RejectAll {
    fn is_refreshable(&self, _: &ArithmeticChannel, _: &Ciphertext) -> bool {
        false
    }
}

impl Check {
    fn load(ch: &ArithmeticChannel, args: &CheckArgs) -> anyhow::Result<Self> {
        Ok(if let Some(p) = &args.secret {
            Check::Secret(secret_from_json(ch, &read(p)?)?)
        } else if let Some(p) = &args.locators {
            Check::Public(locators_from_json(ch, &read(p)?)?, args.budget)
        } else {
            Check::Reject
        })
    }

    fn with<R>(&self, f: impl FnOnce(&dyn RefreshabilityCheck) -> R) -> R {
        match self {
            Check::Secret(sk) => f(&SecretRefreshCheck { sk }),
            Check::Public(db, budget) => f(&PublicRefreshCheck {
                db,
                budget: *budget,
            }),
            Check::Reject => f(&RejectAll),
        }
    }
}

fn keygen_cmd(params: ChannelParams, seed: &str, out: &Path, locators: usize) -> Outcome {
    let ch = ArithmeticChannel::new(params)?;
    let mut rng = rng_from_hex(seed)?;
    let bundle = keygen(&ch, &mut rng)?;
    let db = build_locator_db(&ch, &bundle.public.key, &bundle.secret, locators, &mut rng);
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write(&out.join("channel.json"), &channel_to_json(&ch)?)?;
    write(&out.join("public.json"), &public_to_json(&bundle.public)?)?;
    write(&out.join("secret.json"), &secret_to_json(&bundle.secret)?)?;
    write(&out.join("locators.json"), &locators_to_json(&db)?)?;
    Ok(())
}

fn eval_cmd(args: &EvalArgs) -> Outcome {
    let EvalArgs {
        public,
        channel,
        circuit,
        inputs,
        refresh: mode,
        check,
        seed,
        out,
        ..
    } = args;
    let ch = load_channel(channel)?;
    let pm = load_public(&ch, public)?;
    let circ =
        parse_circuit(&read(circuit)?).with_context(|| format!("in {}", circuit.display()))?;
    let mut env = HashMap::new();
    for (name, file) in inputs {
        if !circ.inputs.contains(name) {
            return Err(anyhow!("circuit has no input named '{name}'").into());
        }
        if env.insert(name.clone(), load_ct(&ch, file)?).is_some() {
            return Err(anyhow!("input '{name}' bound twice").into());
        }
    }
    if let Some(missing) = circ.inputs.iter().find(|n| !env.contains_key(*n)) {
        return Err(anyhow!("input '{missing}' is not bound; pass --input {missing}=FILE").into());
    }
    let check = Check::load(&ch, check)?;
    let policy = match mode {
        RefreshMode::Auto => RefreshPolicy::auto(&ch, &pm.refresher),
        RefreshMode::Off => RefreshPolicy::Off,
    };
    let mut rng = rng_from_hex(seed)?;
    let result = check.with(|c| {
        let keys = EvalKeys {
            pk: &pm.key,
            lambda: &pm.lambda,
            refresher: &pm.refresher,
            check: c,
        };
        evaluate(&ch, &circ, env, &keys, policy, &mut rng)
    });
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    match result {
        Ok(ev) => {
            for (name, ct) in &ev.outputs {
                write(&out.join(format!("{name}.json")), &ciphertext_to_json(ct)?)?;
            }
            write(&out.join("report.json"), &report_json(&ev.report, None))?;
            Ok(())
        }
        Err(fail) => {
            write(
                &out.join("report.json"),
                &report_json(&fail.report, Some(&fail)),
            )?;
            Err(anyhow::Error::from(*fail).into())
        }
    }
}

fn report_json(report: &EvalReport, failure: Option<&EvalFailure>) -> String {
    let doc = json!({
        "levels": report.levels,
        "refreshes": report.refreshes.iter().map(|r| json!({
            "wire": r.wire, "gate": r.gate, "pre_level": r.pre_level, "post_level": r.post_level,
        })).collect::<Vec<_>>(),
        "skipped": report.skipped.iter().map(|s| json!({
            "wire": s.wire, "gate": s.gate, "reason": s.reason,
        })).collect::<Vec<_>>(),
        "violations": report.violations.iter().map(|v| json!({
            "gate": v.gate,
            "op": v.op.to_string(),
            "lhs": {"wire": v.lhs.0, "level": v.lhs.1},
            "rhs": {"wire": v.rhs.0, "level": v.rhs.1},
            "required": v.required.to_string(),
        })).collect::<Vec<_>>(),
        "failure": failure.map(|f| json!({"wire": f.wire, "error": f.error.to_string()})),
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

fn refresh_cmd(
    public: &Path,
    channel: &Path,
    ct: &Path,
    check: &CheckArgs,
    unchecked: bool,
    seed: &str,
    out: &Path,
) -> Outcome {
    let ch = load_channel(channel)?;
    let pm = load_public(&ch, public)?;
    let ct = load_ct(&ch, ct)?;
    let check = Check::load(&ch, check)?;
    let mut rng = rng_from_hex(seed)?;
    let ready = match (&check, unchecked) {
        (_, true) => ct,
        (Check::Reject, false) => {
            return Err(anyhow!(
                "refreshability cannot be decided; pass --secret, --locators or --unchecked"
            )
            .into())
        }
        _ => check.with(|c| make_refreshable(&ch, &pm.key, c, &ct, &mut rng))?,
    };
    let fresh = refresh_ct(&ch, &pm.key, &pm.lambda, &pm.refresher, &ready, &mut rng)?;
    write(out, &ciphertext_to_json(&fresh)?)?;
    Ok(())
}

fn inspect_cmd(ct: &Path, channel: Option<&Path>, public: Option<&Path>) -> Outcome {
    let text = read(ct)?;
    let Some(channel) = channel else {
        let raw: serde_json::Value =
            serde_json::from_str(&text).context("ciphertext is not JSON")?;
        let level = raw
            .get("level")
            .ok_or_else(|| anyhow!("ciphertext has no level"))?;
        println!("level: {level}");
        println!("pass --channel for decryptability and divisibility diagnostics");
        return Ok(());
    };
    let ch = load_channel(channel)?;
    let ct = ciphertext_from_json(&ch, &text)?;
    println!("level: {}", ct.level);
    println!(
        "decryptable: {} (max level {})",
        ch.is_decryptable_level(ct.level),
        ch.max_decryptable_level()
    );
    let pm = public.map(|p| load_public(&ch, p)).transpose()?;
    for (i, c) in ct.c.iter().enumerate() {
        let img = ch.eval(c);
        match &pm {
            Some(pm) => {
                let w = pm.rep.weight_of(i);
                println!(
                    "c[{i}]: image {img}, weight {w}, divisible: {}",
                    img % w == 0
                );
            }
            None => println!("c[{i}]: image {img}"),
        }
    }
    if let Some(pm) = &pm {
        println!(
            "sigma-submodule: {}",
            in_sigma_submodule(&ch, &pm.rep, &ct.c)
        );
    }
    println!("c' image: {}", ch.eval(&ct.cprime));
    Ok(())
}

fn parse_u(spec: &str) -> anyhow::Result<Vec<i64>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .with_context(|| format!("bad coefficient '{s}' in --u"))
        })
        .collect()
}

fn run(cli: Cli) -> Outcome {
    match cli.cmd {
        Cmd::Keygen {
            p,
            q,
            degree,
            n,
            big_n,
            k0,
            seed,
            out,
            omega,
            u,
            locators,
        } => {
            let mut params = ChannelParams::with_defaults(p, q, degree, n, big_n, k0);
            params.omega = omega;
            if let Some(u) = u {
                params.u = parse_u(&u)?;
            }
            keygen_cmd(params, &seed, &out, locators)
        }
        Cmd::Encrypt {
            public,
            channel,
            message,
            seed,
            out,
        } => {
            let ch = load_channel(&channel)?;
            let pm = load_public(&ch, &public)?;
            let mut rng = rng_from_hex(&seed)?;
            let ct = encrypt(&ch, &pm.key, message, &mut rng)?;
            write(&out, &ciphertext_to_json(&ct)?)?;
            Ok(())
        }
        Cmd::Decrypt {
            secret,
            channel,
            ct,
        } => {
            let ch = load_channel(&channel)?;
            let sk = secret_from_json(&ch, &read(&secret)?)?;
            let ct = load_ct(&ch, &ct)?;
            println!("{}", decrypt(&ch, &sk, &ct)?);
            Ok(())
        }
        Cmd::Eval(args) => eval_cmd(&args),
        Cmd::Refresh {
            public,
            channel,
            ct,
            check,
            unchecked,
            seed,
            out,
        } => refresh_cmd(&public, &channel, &ct, &check, unchecked, &seed, &out),
        Cmd::Inspect {
            ct,
            channel,
            public,
        } => inspect_cmd(&ct, channel.as_deref(), public.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
