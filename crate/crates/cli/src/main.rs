use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use f4e8::chevgroup::{self, EmbeddedF4};
use f4e8::classify::{self, ClassKind, SurveyConfig};
use f4e8::embedding::{self, EmbeddingTable};
use f4e8::hillclimb::{self, ClimbConfig};
use f4e8::{modrep, FieldScalar, Gf3, Gf9, LieAlgebra, RootSystem, RootSystemType};

const OUT_ENV: &str = "F4E8_OUT";
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "f4e8", version, about = "The maximal F4 subgroup of E8 in characteristic 3")]
struct Cli {
    /// Field for the computation.
    #[arg(long, value_enum, default_value_t = Field::Gf3, global = true)]
    field: Field,
    /// Seed for every randomized step.
    #[arg(long, default_value_t = 1, global = true)]
    seed: u64,
    /// What to print on stdout; files are always JSON (plus CSV or JSONL).
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Field {
    Gf3,
    Gf9,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Algebra {
    E8,
    F4,
}

#[derive(Subcommand)]
enum Command {
    /// Build the embedded F4 and run every structural check on it.
    VerifyEmbedding {
        /// Embedding table to check instead of the bundled one.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Random F4 elements tested for stabilizing the 52-span, per field.
        #[arg(long, default_value_t = 100)]
        group_samples: usize,
    },
    /// Decompose L(E8) under F4, restrict to B4, split by the involution.
    Decompose {
        /// Random algebra elements tried per irreducibility certificate.
        #[arg(long, default_value_t = 50)]
        budget: usize,
    },
    /// Survey unipotent classes and emit the fusion table.
    FuseUnipotent {
        #[arg(long, default_value_t = 400)]
        budget: usize,
    },
    /// Survey nilpotent classes and emit the fusion table.
    FuseNilpotent {
        #[arg(long, default_value_t = 400)]
        budget: usize,
    },
    /// Scramble the f4 toral basis and conjugate it back into the Cartan.
    Hillclimb {
        #[arg(long, default_value_t = 6000)]
        budget: usize,
        #[arg(long, default_value_t = 100)]
        kick_interval: usize,
        #[arg(long, default_value_t = 30)]
        scramble_steps: usize,
    },
    /// Write the root system with heights and lengths.
    DumpRoots {
        #[arg(long = "type", value_enum, default_value_t = Algebra::E8)]
        kind: Algebra,
    },
    /// Write the Chevalley basis and its structure constants.
    DumpAlgebra {
        #[arg(long = "type", value_enum, default_value_t = Algebra::E8)]
        kind: Algebra,
    },
}

/// Output directory and the run metadata stamped into every file.
struct Run {
    out: PathBuf,
    command: &'static str,
    seed: u64,
    config: Value,
    config_hash: String,
    format: Format,
}

impl Run {
    fn new(command: &'static str, seed: u64, config: Value, format: Format) -> Result<Self> {
        let out = PathBuf::from(std::env::var(OUT_ENV).unwrap_or_else(|_| "f4e8-out".into()));
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let digest = Sha256::digest(serde_json::to_vec(&config)?);
        let config_hash = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Ok(Run { out, command, seed, config, config_hash, format })
    }

    fn header(&self) -> Value {
        json!({
            "artifact": "f4e8",
            "version": VERSION,
            "command": self.command,
            "seed": self.seed,
            "config": self.config,
            "config_hash": self.config_hash,
        })
    }

    fn comment_header(&self) -> String {
        format!("# f4e8 {} {} seed={} config_hash={}\n", VERSION, self.command, self.seed, self.config_hash)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn write_json(&self, name: &str, passed: bool, result: Value) -> Result<PathBuf> {
        let mut doc = self.header();
        doc["passed"] = json!(passed);
        doc["result"] = result;
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        if self.format == Format::Json {
            print!("{text}");
        }
        self.write(name, &text)
    }

    fn say(&self, line: impl AsRef<str>) {
        if self.format == Format::Text {
            println!("{}", line.as_ref());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    let (seed, format, field) = (cli.seed, cli.format, cli.field);
    match cli.command {
        Command::VerifyEmbedding { data, group_samples } => {
            let config = json!({ "field": field, "data": data.as_ref().map(|p| p.display().to_string()), "group_samples": group_samples });
            let run = Run::new("verify-embedding", seed, config, format)?;
            let table = match &data {
                Some(p) => Some(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
                None => None,
            };
            match field {
                Field::Gf3 => verify_embedding::<Gf3>(&run, table.as_deref(), group_samples),
                Field::Gf9 => verify_embedding::<Gf9>(&run, table.as_deref(), group_samples),
            }
        }
        Command::Decompose { budget } => {
            let run = Run::new("decompose", seed, json!({ "field": field, "budget": budget }), format)?;
            match field {
                Field::Gf3 => decompose::<Gf3>(&run, budget),
                Field::Gf9 => decompose::<Gf9>(&run, budget),
            }
        }
        Command::FuseUnipotent { budget } => fuse(field, seed, format, budget, ClassKind::Unipotent),
        Command::FuseNilpotent { budget } => fuse(field, seed, format, budget, ClassKind::Nilpotent),
        Command::Hillclimb { budget, kick_interval, scramble_steps } => {
            let config = json!({ "field": field, "budget": budget, "kick_interval": kick_interval, "scramble_steps": scramble_steps });
            let run = Run::new("hillclimb", seed, config, format)?;
            let cfg = ClimbConfig { kick_interval, budget, seed };
            match field {
                Field::Gf3 => climb::<Gf3>(&run, cfg, scramble_steps),
                Field::Gf9 => climb::<Gf9>(&run, cfg, scramble_steps),
            }
        }
        Command::DumpRoots { kind } => {
            let run = Run::new("dump-roots", seed, json!({ "type": kind }), format)?;
            dump_roots(&run, kind)
        }
        Command::DumpAlgebra { kind } => {
            let run = Run::new("dump-algebra", seed, json!({ "field": field, "type": kind }), format)?;
            match field {
                Field::Gf3 => dump_algebra::<Gf3>(&run, kind),
                Field::Gf9 => dump_algebra::<Gf9>(&run, kind),
            }
        }
    }
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: Value,
}

/// Runs checks in order, stopping at the first failure.
struct Checks<'a> {
    run: &'a Run,
    done: Vec<Check>,
}

impl Checks<'_> {
    fn record(&mut self, name: &'static str, passed: bool, detail: Value) -> bool {
        self.run.say(format!("{} {name}", if passed { "PASS" } else { "FAIL" }));
        if !passed {
            eprintln!("check failed: {name}: {detail}");
        }
        self.done.push(Check { name, passed, detail });
        passed
    }

    fn finish(self) -> Result<bool> {
        let passed = self.done.iter().all(|c| c.passed);
        let first_failure = self.done.iter().find(|c| !c.passed).map(|c| c.name);
        self.run.write_json(
            &format!("{}.json", self.run.command),
            passed,
            json!({ "checks": self.done, "first_failure": first_failure }),
        )?;
        Ok(passed)
    }
}

fn group_normalization<F: FieldScalar>(table: &EmbeddingTable, seed: u64, samples: usize) -> Result<(usize, usize)> {
    let g = EmbeddedF4::<F>::new(table.clone())?;
    let ok = (0..samples as u64).filter(|&i| g.stabilizes_span(&g.random_f4_element(seed.wrapping_add(i), 12))).count();
    Ok((ok, samples))
}

fn verify_embedding<F: FieldScalar>(run: &Run, data: Option<&str>, samples: usize) -> Result<bool> {
    let mut checks = Checks { run, done: Vec::new() };
    let table = match data.map(EmbeddingTable::from_json).unwrap_or_else(|| Ok(embedding::load_embedding())) {
        Ok(t) => t,
        Err(e) => {
            checks.record("load", false, json!(e.to_string()));
            return checks.finish();
        }
    };
    let wf = embedding::check_well_formed(&table);
    if !checks.record("commuting-support", wf.passed(), serde_json::to_value(&wf)?) {
        return checks.finish();
    }
    let g = match EmbeddedF4::<F>::new(table.clone()) {
        Ok(g) => g,
        Err(e) => {
            checks.record("build", false, json!(e.to_string()));
            return checks.finish();
        }
    };
    let closure = embedding::verify_closure_and_maximality_witness(g.basis(), g.e8());
    let closure = match closure {
        Ok(c) => c,
        Err(e) => {
            checks.record("closure-52", false, json!(e.to_string()));
            return checks.finish();
        }
    };
    let c52 = closure.span_dim == 52 && closure.closure_dim == 52;
    if !checks.record("closure-52", c52, json!({ "span_dim": closure.span_dim, "closure_dim": closure.closure_dim })) {
        return checks.finish();
    }
    match embedding::verify_f4_relations(g.basis(), g.e8()) {
        Ok(rel) => {
            let detail = json!({
                "coroot_relations": rel.coroot_relations,
                "cartan_action_relations": rel.cartan_action_relations,
                "root_pair_relations": rel.root_pair_relations,
                "sign_flips": rel.sign_flips,
            });
            checks.record("relations", true, detail);
        }
        Err(e) => {
            checks.record("relations", false, json!(e.to_string()));
            return checks.finish();
        }
    }
    let n52 = closure.normalizer_dim == 52 && closure.centralizer_dim == 0;
    if !checks.record(
        "normalizer-52",
        n52,
        json!({ "normalizer_dim": closure.normalizer_dim, "centralizer_dim": closure.centralizer_dim }),
    ) {
        return checks.finish();
    }
    let w9 = EmbeddedF4::<Gf9>::new(table.clone()).and_then(|g9| embedding::weight_decomposition(g9.basis(), g9.e8()))?;
    if !checks.record("weights", w9.passed(), serde_json::to_value(&w9)?) {
        return checks.finish();
    }
    let (ok3, n3) = group_normalization::<Gf3>(&table, run.seed, samples)?;
    let (ok9, n9) = group_normalization::<Gf9>(&table, run.seed, samples)?;
    let gpass = ok3 == n3 && ok9 == n9;
    if !checks.record("group-normalization", gpass, json!({ "GF3": [ok3, n3], "GF9": [ok9, n9] })) {
        return checks.finish();
    }
    let g9 = EmbeddedF4::<Gf9>::new(table)?;
    let lines = chevgroup::torus_cross_check(&g9)?;
    let tpass = !lines.is_empty() && lines.iter().all(|l| l.diagonal && l.consistent());
    checks.record("h-lines", tpass, serde_json::to_value(&lines)?);
    for l in &lines {
        run.say(format!("  h_{}: {}", l.f4_root, l.note));
    }
    checks.finish()
}

fn decompose<F: FieldScalar>(run: &Run, budget: usize) -> Result<bool> {
    let g = EmbeddedF4::<F>::standard();
    let (rep, factors) = modrep::decompose_248(&g, run.seed, budget)?;
    run.say(format!("L(E8) factors {:?} irreducible {}", rep.dims(), rep.passed()));
    let b4 = modrep::restrict_to_b4(&g, &factors, run.seed.wrapping_add(1), budget)?;
    run.say(format!("B4 on 52 {:?}, on 196 {:?}", b4.dims_52(), b4.dims_196()));
    let inv = modrep::involution_split(&g)?;
    let split = inv.candidates.iter().find(|c| Some(&c.coroot) == inv.selected.as_ref());
    run.say(format!("involution {:?} split {:?} trace {}", inv.selected, split.map(|c| (c.plus, c.minus)), inv.trace));
    let passed = rep.passed() && b4.passed() && inv.passed();
    run.write_json("decompose.json", passed, json!({ "l_e8": rep, "b4": b4, "involution": inv }))?;
    Ok(passed)
}

fn fuse(field: Field, seed: u64, format: Format, budget: usize, kind: ClassKind) -> Result<bool> {
    let command = match kind {
        ClassKind::Unipotent => "fuse-unipotent",
        ClassKind::Nilpotent => "fuse-nilpotent",
    };
    let run = Run::new(command, seed, json!({ "field": field, "budget": budget }), format)?;
    let config = SurveyConfig { seed, budget };
    let report = match field {
        Field::Gf3 => classify::survey_classes(&EmbeddedF4::<Gf3>::standard(), kind, config)?,
        Field::Gf9 => classify::survey_classes(&EmbeddedF4::<Gf9>::standard(), kind, config)?,
    };
    let passed = report.passed();
    let csv = run.comment_header() + &report.to_csv();
    if format == Format::Csv {
        print!("{csv}");
    }
    run.write(&format!("{command}.csv"), &csv)?;
    for r in &report.rows {
        run.say(format!(
            "{:10} -> {:10} {:>3} cdim {:>3}  {}",
            r.f4_label, r.e8_label, r.signature.order_or_depth, r.signature.centralizer_dim, r.signature.jordan_248
        ));
    }
    run.say(format!(
        "classes {} collisions {:?} ambiguities {} passed {}",
        report.rows.len(),
        report.collisions,
        report.ambiguities.len(),
        passed
    ));
    run.write_json(&format!("{command}.json"), passed, serde_json::to_value(&report)?)?;
    Ok(passed)
}

fn climb<F: FieldScalar>(run: &Run, cfg: ClimbConfig, scramble_steps: usize) -> Result<bool> {
    let g = EmbeddedF4::<F>::standard();
    let (start, word) = hillclimb::scramble(&g, &hillclimb::f4_toral_basis(&g), cfg.seed, scramble_steps);
    let out = hillclimb::climb(&g, &start, &cfg)?;
    let replayed = hillclimb::replay(&g, &start, &out.best.history)? == out.best.targets;
    let solved = out.solved(g.e8());
    let mut trace = serde_json::to_string(&run.header())? + "\n";
    for e in &out.trace {
        trace += &serde_json::to_string(e)?;
        trace.push('\n');
    }
    run.write("hillclimb-trace.jsonl", &trace)?;
    let start_objective = hillclimb::ClimbState::new(g.e8(), start.clone(), cfg.seed).objective;
    run.say(format!(
        "objective {} -> {} in {} steps, solved {}, replay {}",
        start_objective, out.best.objective, out.steps, solved, replayed
    ));
    let result = json!({
        "scramble": word,
        "start_objective": start_objective,
        "objective": out.best.objective,
        "max_objective": out.best.max_objective(g.e8()),
        "steps": out.steps,
        "solved": solved,
        "replay_matches": replayed,
        "history": out.best.history,
    });
    run.write_json("hillclimb.json", solved && replayed, result)?;
    Ok(solved && replayed)
}

fn root_system(kind: Algebra) -> RootSystem {
    RootSystem::build(match kind {
        Algebra::E8 => RootSystemType::E8,
        Algebra::F4 => RootSystemType::F4,
    })
}

fn dump_roots(run: &Run, kind: Algebra) -> Result<bool> {
    let rs = root_system(kind);
    let roots: Vec<Value> = rs
        .roots()
        .iter()
        .enumerate()
        .map(|(i, r)| json!({ "index": i, "label": r.label(), "height": r.height(), "long": r.is_long() }))
        .collect();
    run.say(format!("{} roots, {} positive", rs.num_roots(), rs.num_roots() / 2));
    run.write_json(&format!("roots-{}.json", label(kind)), true, json!({ "cartan_matrix": rs.cartan_matrix(), "roots": roots }))?;
    Ok(true)
}

fn dump_algebra<F: FieldScalar>(run: &Run, kind: Algebra) -> Result<bool> {
    let alg = match kind {
        Algebra::E8 => LieAlgebra::<F>::e8(),
        Algebra::F4 => LieAlgebra::<F>::f4(),
    };
    let basis: Vec<String> = (0..alg.dim()).map(|k| alg.basis_label(k)).collect();
    let mut brackets = Vec::new();
    for i in 0..alg.dim() {
        for j in i + 1..alg.dim() {
            for &(k, c) in alg.basis_bracket(i, j) {
                brackets.push(json!([i, j, k, c]));
            }
        }
    }
    run.say(format!("dim {}, {} nonzero structure constants (i < j)", alg.dim(), brackets.len()));
    run.write_json(&format!("algebra-{}.json", label(kind)), true, json!({ "basis": basis, "brackets": brackets }))?;
    Ok(true)
}

fn label(kind: Algebra) -> &'static str {
    match kind {
        Algebra::E8 => "e8",
        Algebra::F4 => "f4",
    }
}
