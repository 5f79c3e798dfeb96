use std::fs;
use std::path::{Path, PathBuf};

use ccx_core::covering::{Coverage, HSequence, SearchBudget};
use ccx_core::diagonal::DiagonalState;
use ccx_core::enumerator::EnumerationState;
use ccx_core::exec::Exec;
use ccx_core::machine::{Dovetailer, Numbering, Scheme, DEFAULT_MAX_FUEL, NUMBERING_VERSION};
use ccx_core::numerals::{rat, Rational};
use ccx_core::polygon::PolygonalFunction;
use ccx_core::refutation::{refute, verify_certificate, Certificate, ModulusClaim, RefuteBudget, RefuteError, Refutation};
use ccx_core::verify::{bump_sweep, omega_sweep, partition_sweep, SweepReport};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::{Cli, Command, Construction, Pipeline, Suite};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Budget(_) => 3,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Everything needed to reproduce an output.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    numbering_version: &'static str,
    registry_files: Vec<String>,
    registry_digest: String,
    stages: Option<u64>,
    injections: Vec<String>,
    max_fuel: u64,
    outputs: Vec<String>,
}

struct Ctx<'a> {
    cli: &'a Cli,
    command: &'a str,
    numbering: Numbering,
    max_fuel: u64,
}

impl Ctx<'_> {
    fn manifest(&self, numbering: &Numbering, stages: Option<u64>, injections: &[String]) -> RunManifest {
        RunManifest {
            command: self.command.to_string(),
            numbering_version: NUMBERING_VERSION,
            registry_files: self.cli.registry.iter().map(|p| p.display().to_string()).collect(),
            registry_digest: numbering.registry_digest(),
            stages,
            injections: injections.to_vec(),
            max_fuel: self.max_fuel,
            outputs: self.cli.out.iter().map(|p| p.display().to_string()).collect(),
        }
    }

    /// Writes `payload` with the manifest under `"manifest"`.
    fn emit(&self, manifest: RunManifest, payload: impl Serialize) -> Result<(), CliError> {
        let mut value = serde_json::to_value(payload).map_err(usage)?;
        let obj = value.as_object_mut().ok_or_else(|| usage("output is not a JSON object"))?;
        obj.insert("manifest".into(), serde_json::to_value(manifest).map_err(usage)?);
        let mut text = serde_json::to_string_pretty(&value).map_err(usage)?;
        text.push('\n');
        self.write(&text)
    }

    fn write(&self, text: &str) -> Result<(), CliError> {
        match &self.cli.out {
            Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_registry(paths: &[PathBuf]) -> Result<Numbering, CliError> {
    let mut schemes = Vec::new();
    for p in paths {
        let text = read(p)?;
        schemes.extend(Scheme::parse_many(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?);
    }
    Ok(Numbering::new(schemes))
}

fn parse_rational(s: &str) -> Result<Rational, CliError> {
    s.parse().map_err(|e| usage(format!("{s:?}: {e}")))
}

fn parse_injections(raw: &[String]) -> Result<Vec<(Rational, u32)>, CliError> {
    raw.iter()
        .map(|s| {
            let (x, slot) = s.split_once('@').ok_or_else(|| usage(format!("injection {s:?} is not of the form x@slot")))?;
            let slot = slot.parse().map_err(|_| usage(format!("bad slot in {s:?}")))?;
            Ok((parse_rational(x)?, slot))
        })
        .collect()
}

pub fn run(cli: &Cli, command: &str) -> Result<(), CliError> {
    let ctx = Ctx {
        cli,
        command,
        numbering: load_registry(&cli.registry)?,
        max_fuel: cli.max_fuel.unwrap_or(DEFAULT_MAX_FUEL),
    };
    match &cli.command {
        Command::Cover { pipeline } => cover(&ctx, pipeline),
        Command::Hseq { pipeline, n, cover_points, search_stages, inject_accelerator } => {
            hseq(&ctx, pipeline, *n, cover_points, SearchBudget { stages: *search_stages, accelerate: *inject_accelerator })
        }
        Command::Enumerate { pipeline } => {
            let state = enumerate_with(&ctx, pipeline.stages);
            ctx.emit(ctx.manifest(&ctx.numbering, Some(pipeline.stages), &[]), state)
        }
        Command::Diagonal { construction, rows } => {
            let state = construct(&ctx, construction, *rows)?;
            ctx.emit(ctx.manifest(&ctx.numbering, Some(construction.pipeline.stages), &construction.pipeline.injections), &state)
        }
        Command::Build { construction, n } => {
            let state = construct(&ctx, construction, n + 1)?;
            let f = state.partial_sum(*n).map_err(usage)?;
            let payload = json!({ "n": n, "points": f.points() });
            ctx.emit(ctx.manifest(&ctx.numbering, Some(construction.pipeline.stages), &construction.pipeline.injections), payload)
        }
        Command::Eval { function, xs } => {
            let f = load_polygon(function)?;
            let mut values = Vec::new();
            for x in xs {
                let x = parse_rational(x)?;
                let y = f.eval(&x).map_err(usage)?;
                values.push(json!({ "x": x, "y": y }));
            }
            ctx.emit(ctx.manifest(&ctx.numbering, None, &[]), json!({ "function": function.display().to_string(), "values": values }))
        }
        Command::Verify { suite, seed, count, sequential, construction, rows, eps } => {
            let exec = if *sequential { Exec::Sequential } else { Exec::default() };
            verify(&ctx, *suite, *seed, *count, exec, construction, *rows, eps)
        }
        Command::Refute { scheme, stages, inject_accelerator } => {
            let claim = load_claim(scheme)?;
            let (refutation, _) = run_refute(&ctx, &claim, *stages, *inject_accelerator)?;
            let numbering = registered(&ctx, &claim);
            let payload = match &refutation {
                Refutation::Witness(cert) => {
                    let mut v = serde_json::to_value(cert).map_err(usage)?;
                    v["kind"] = json!("witness");
                    v
                }
                other => serde_json::to_value(other).map_err(usage)?,
            };
            ctx.emit(ctx.manifest(&numbering, Some(*stages), &[]), payload)
        }
        Command::CheckCert { cert, scheme, stages, inject_accelerator } => {
            let text = read(cert)?;
            let cert: Certificate = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", cert.display())))?;
            let claim = load_claim(scheme)?;
            let (_, state) = run_refute(&ctx, &claim, *stages, *inject_accelerator)?;
            let verdict = verify_certificate(&cert, &state);
            let numbering = registered(&ctx, &claim);
            ctx.emit(
                ctx.manifest(&numbering, Some(*stages), &[]),
                json!({ "valid": verdict.is_ok(), "reason": verdict.as_ref().err() }),
            )?;
            verdict.map_err(CliError::Verification)
        }
        Command::EmitCsv { function, n, construction, digits, refine } => {
            let f = match (function, n) {
                (Some(path), _) => load_polygon(path)?,
                (None, Some(n)) => construct(&ctx, construction, n + 1)?.partial_sum(*n).map_err(usage)?,
                (None, None) => return Err(usage("emit-csv needs --function or --n")),
            };
            let mut text = String::from("x,y\n");
            for (x, y) in f.plot_rows(*refine) {
                text.push_str(&format!("{},{}\n", x.to_decimal(*digits), y.to_decimal(*digits)));
            }
            ctx.write(&text)
        }
        Command::Selftest { seed } => selftest(&ctx, *seed),
    }
}

fn load_polygon(path: &Path) -> Result<PolygonalFunction, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_claim(path: &Path) -> Result<ModulusClaim, CliError> {
    let scheme = Scheme::parse(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(ModulusClaim { scheme })
}

fn registered(ctx: &Ctx, claim: &ModulusClaim) -> Numbering {
    let mut numbering = ctx.numbering.clone();
    numbering.register(claim.scheme.clone());
    numbering
}

fn run_refute(ctx: &Ctx, claim: &ModulusClaim, stages: u64, accelerate: bool) -> Result<(Refutation, DiagonalState), CliError> {
    let budget = RefuteBudget { stages, accelerate, max_fuel: Some(ctx.max_fuel) };
    refute(claim, ctx.numbering.clone(), budget).map_err(|e| match e {
        RefuteError::BudgetExhausted { .. } => CliError::Budget(e.to_string()),
        RefuteError::Diagonal(d) => CliError::Verification(d.to_string()),
    })
}

fn enumerate_with(ctx: &Ctx, stages: u64) -> EnumerationState {
    let d = Dovetailer::new(ctx.numbering.clone(), ccx_core::machine::self_application).with_max_fuel(ctx.max_fuel);
    let mut state = EnumerationState::with_dovetailer(d);
    state.run_stages(stages);
    state
}

fn build_hseq(ctx: &Ctx, pipeline: &Pipeline) -> Result<HSequence, CliError> {
    let injections = parse_injections(&pipeline.injections)?;
    HSequence::build(ctx.numbering.clone(), pipeline.stages, &injections, Some(ctx.max_fuel)).map_err(|e| CliError::Verification(e.to_string()))
}

fn cover(ctx: &Ctx, pipeline: &Pipeline) -> Result<(), CliError> {
    let hs = build_hseq(ctx, pipeline)?;
    let c = hs.covering();
    let payload = json!({
        "numbering_version": NUMBERING_VERSION,
        "stages": pipeline.stages,
        "count": c.len(),
        "total_length": c.total_length(),
        "length_budget": ccx_core::covering::length_budget(),
        "intervals": c.intervals(),
    });
    ctx.emit(ctx.manifest(&ctx.numbering, Some(pipeline.stages), &pipeline.injections), payload)
}

fn hseq(ctx: &Ctx, pipeline: &Pipeline, n: Option<usize>, points: &[String], budget: SearchBudget) -> Result<(), CliError> {
    let mut hs = build_hseq(ctx, pipeline)?;
    let mut searches = Vec::new();
    for p in points {
        let x = parse_rational(p)?;
        let found = hs.coverage_search(&x, budget).map_err(|e| CliError::Verification(e.to_string()))?;
        match found {
            Coverage::Found(k) => searches.push(json!({ "x": x, "n": k })),
            Coverage::BudgetExhausted { stages_run } => {
                return Err(CliError::Budget(format!("h_n({x}) = 2 not reached after {stages_run} extra stages")))
            }
        }
    }
    let top = n.unwrap_or(hs.max_index());
    let mut summary = Vec::new();
    for k in 0..=top {
        let h = hs.h(k).map_err(|e| CliError::Verification(e.to_string()))?;
        summary.push(json!({ "n": k, "integral": h.integral(), "max": h.max_value() }));
    }
    let last = hs.h(top).map_err(|e| CliError::Verification(e.to_string()))?.clone();
    let payload = json!({
        "stages": pipeline.stages,
        "intervals": hs.covering().len(),
        "summary": summary,
        "coverage": searches,
        "h_n": { "n": top, "points": last.points() },
    });
    ctx.emit(ctx.manifest(&ctx.numbering, Some(pipeline.stages), &pipeline.injections), payload)
}

fn construct(ctx: &Ctx, c: &Construction, rows: usize) -> Result<DiagonalState, CliError> {
    let injections = parse_injections(&c.pipeline.injections)?;
    let mut state = DiagonalState::build(ctx.numbering.clone(), c.pipeline.stages, &injections, Some(ctx.max_fuel))
        .map_err(|e| CliError::Verification(e.to_string()))?;
    let budget = SearchBudget { stages: c.search_stages, accelerate: c.inject_accelerator };
    state.extend_to(rows, budget).map_err(|e| match e {
        ccx_core::diagonal::DiagonalError::BudgetExhausted { .. } => CliError::Budget(e.to_string()),
        other => CliError::Verification(other.to_string()),
    })?;
    Ok(state)
}

fn sweep_result(ctx: &Ctx, report: SweepReport) -> Result<(), CliError> {
    let passed = report.passed();
    let summary = format!("{} sweep: {} violations", report.sweep, report.violations.len());
    ctx.emit(ctx.manifest(&ctx.numbering, None, &[]), json!({ "passed": passed, "report": report }))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification(summary))
    }
}

#[allow(clippy::too_many_arguments)]
fn verify(ctx: &Ctx, suite: Suite, seed: u64, count: usize, exec: Exec, c: &Construction, rows: usize, eps: &[String]) -> Result<(), CliError> {
    match suite {
        Suite::Omega => sweep_result(ctx, omega_sweep(seed, count, exec)),
        Suite::Partition => sweep_result(ctx, partition_sweep(seed, count, exec)),
        Suite::Bump => sweep_result(ctx, bump_sweep(seed, count, exec)),
        Suite::Riemann => {
            let eps: Vec<Rational> = if eps.is_empty() {
                vec![rat(1, 2), rat(1, 8), rat(1, 32)]
            } else {
                eps.iter().map(|e| parse_rational(e)).collect::<Result<_, _>>()?
            };
            let state = construct(ctx, c, rows)?;
            let mut reports = Vec::new();
            for terms in 0..=rows {
                for e in &eps {
                    reports.push(state.verify_riemann(terms, e).map_err(usage)?);
                }
            }
            let failed: Vec<String> = reports.iter().flat_map(|r| r.failures.clone()).collect();
            ctx.emit(
                ctx.manifest(&ctx.numbering, Some(c.pipeline.stages), &c.pipeline.injections),
                json!({ "passed": failed.is_empty(), "reports": reports }),
            )?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verification(failed.join("; ")))
            }
        }
    }
}

const SEEDS: &str = include_str!("../data/seeds.scm");
const CHEATER: &str = include_str!("../data/cheater.scm");

fn selftest(ctx: &Ctx, seed: u64) -> Result<(), CliError> {
    let mut results: Vec<Value> = Vec::new();
    let mut failures = Vec::new();
    let mut record = |name: &str, ok: bool, detail: String| {
        if !ok {
            failures.push(format!("{name}: {detail}"));
        }
        results.push(json!({ "check": name, "passed": ok, "detail": detail }));
    };

    for report in [omega_sweep(seed, 50, Exec::default()), partition_sweep(seed, 100, Exec::default()), bump_sweep(seed, 100, Exec::default())] {
        record(report.sweep, report.passed(), format!("{} comparisons, {} violations", report.comparisons, report.violations.len()));
    }

    let seeds = Numbering::new(Scheme::parse_many(SEEDS).expect("bundled seeds parse"));
    let covering = HSequence::build(seeds.clone(), 300, &[], Some(ctx.max_fuel));
    record("covering", covering.is_ok(), format!("{:?}", covering.as_ref().map(|h| h.covering().total_length().clone())));

    let built = DiagonalState::build(seeds, 300, &[], Some(ctx.max_fuel)).and_then(|mut s| {
        s.extend_to(4, SearchBudget { stages: 2000, accelerate: true })?;
        s.recheck_rows()?;
        Ok(s)
    });
    match built {
        Ok(state) => {
            record("diagonal", true, format!("nu = {:?}", state.nu()));
            let mut ok = true;
            for terms in 0..=4 {
                for e in [rat(1, 2), rat(1, 8), rat(1, 32)] {
                    ok &= state.verify_riemann(terms, &e).map(|r| r.passed()).unwrap_or(false);
                }
            }
            record("riemann", ok, "terms 0..=4, eps in {1/2, 1/8, 1/32}".into());
        }
        Err(e) => record("diagonal", false, e.to_string()),
    }

    let claim = ModulusClaim { scheme: Scheme::parse(CHEATER).expect("bundled claim parses") };
    let budget = RefuteBudget { stages: 2000, accelerate: true, max_fuel: Some(ctx.max_fuel) };
    match refute(&claim, Numbering::canonical(), budget) {
        Ok((Refutation::Witness(cert), state)) => {
            let verdict = verify_certificate(&cert, &state);
            record("refutation", verdict.is_ok(), verdict.err().unwrap_or_else(|| format!("gap 2^-{} at zeta = {}", cert.mu_m, cert.zeta)));
        }
        Ok((other, _)) => record("refutation", false, format!("{other:?}")),
        Err(e) => record("refutation", false, e.to_string()),
    }

    let passed = failures.is_empty();
    ctx.emit(ctx.manifest(&ctx.numbering, None, &[]), json!({ "seed": seed, "passed": passed, "checks": results }))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification(failures.join("; ")))
    }
}
