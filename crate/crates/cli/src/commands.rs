use std::collections::BTreeMap;
use std::path::Path;

use num_rational::Ratio;
use pgg_core::congestion::{parse_threshold, verify_isomorphism, KRule};
use pgg_core::dynamics::{run_dynamics, step_bound, Schedule};
use pgg_core::gadgets::{build_gadget, verify_contract, GadgetContract, GadgetKind, VerifyMode};
use pgg_core::generate::{generate_instance, random_profile, GraphModel, PatternSpec};
use pgg_core::pattern::Verdict;
use pgg_core::reduction::{
    assignment_to_profile, compile_reduction, parse_1in3, profile_to_assignment, ReductionCertificate, ReductionOptions,
};
use pgg_core::solver::{decide_pne, export_cnf, Decision};
use pgg_core::{parse_game, write_game, Error, Pattern, Profile};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::report::{write_file, Inputs, Outcome};
use crate::{
    CertifyArgs, ClassifyArgs, CongestionArgs, DynamicsArgs, GadgetArgs, GenArgs, Init, KRuleArg, Method, ModelArg,
    ReduceArgs, ScheduleArg, SolveArgs, ThresholdArgs, VerifyArg,
};

/// Flip limit for dynamics on games without a potential bound.
const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// Largest threshold game whose equilibria are listed by `threshold`.
const THRESHOLD_ENUMERATION_MAX_N: usize = 20;

fn load<T>(inputs: &mut Inputs, path: &Path, parse: impl FnOnce(&str) -> pgg_core::Result<T>) -> CliResult<T> {
    let text = inputs.read(path)?;
    parse(&text).map_err(|source| CliError::Input { path: path.to_owned(), source })
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn solve(a: &SolveArgs) -> CliResult<Outcome> {
    let mut inputs = Inputs::default();
    let g = load(&mut inputs, &a.file, parse_game)?;
    let method = match a.method {
        Method::Backtrack if a.enumerate => {
            return Err(CliError::Usage("--enumerate needs --method brute or auto".into()));
        }
        Method::Auto if a.enumerate => Method::Brute,
        Method::Auto => Method::Backtrack,
        m => m,
    };

    let mut result = serde_json::Map::new();
    let mut failure = None;
    let summary;
    if method == Method::Brute {
        let limit = if a.enumerate { a.max_count } else { Some(1) };
        let pne = g.enumerate_pne(limit)?;
        result.insert("exists".into(), json!(!pne.is_empty()));
        result.insert("profile".into(), json!(pne.first()));
        result.insert("nodes".into(), Value::Null);
        if a.enumerate {
            result.insert("count".into(), json!(pne.len()));
            result.insert("truncated".into(), json!(a.max_count == Some(pne.len())));
            result.insert("pne".into(), json!(pne));
        }
        summary = format!("{} vertices: {} equilibria found by enumeration", g.n(), pne.len());
    } else {
        let outcome = decide_pne(&g, a.budget);
        let exists = match &outcome.decision {
            Decision::Exists(s) => {
                result.insert("profile".into(), json!(s));
                json!(true)
            }
            Decision::NotExists => json!(false),
            Decision::BudgetExceeded => {
                failure = Some(CliError::Budget(a.budget));
                Value::Null
            }
        };
        summary = format!("{} vertices: exists = {exists} after {} nodes", g.n(), outcome.nodes);
        result.insert("exists".into(), exists);
        result.insert("nodes".into(), json!(outcome.nodes));
    }
    result.insert("method".into(), json!(if method == Method::Brute { "brute" } else { "backtrack" }));

    if let Some(path) = &a.cnf_out {
        let cnf = export_cnf(&g);
        write_file(path, &cnf.to_dimacs())?;
        result.insert("cnf".into(), json!({ "variables": cnf.num_vars, "clauses": cnf.clauses.len() }));
    }
    let mut out = Outcome::new(inputs, Value::Object(result), summary);
    out.failure = failure;
    Ok(out)
}

pub fn dynamics(a: &DynamicsArgs) -> CliResult<Outcome> {
    let mut inputs = Inputs::default();
    let g = load(&mut inputs, &a.file, parse_game)?;
    let n = g.n();
    let schedule_seed = a.seed.wrapping_add(1);
    let start = match a.init {
        Init::All0 => Profile::zeros(n),
        Init::All1 => Profile::ones(n),
        Init::Random => random_profile(n, a.seed),
    };
    let schedule = match a.schedule {
        ScheduleArg::Roundrobin => Schedule::round_robin(),
        ScheduleArg::First => Schedule::first_violator(),
        ScheduleArg::Random => Schedule::random(schedule_seed),
    };
    let bound = step_bound(&g).ok();
    let max_steps = a.max_steps.or(bound).unwrap_or(DEFAULT_MAX_STEPS);
    let trace = run_dynamics(&g, &start, schedule, max_steps)?;

    let mut result = json!({
        "converged": trace.converged,
        "steps": trace.steps.len(),
        "max_steps": max_steps,
        "step_bound": bound,
        "initial_profile": trace.initial,
        "final_profile": trace.final_profile,
    });
    if let Some(series) = &trace.potential_series {
        // i128 values go out as strings only if they leave the i64 range
        let as_json = |p: i128| i64::try_from(p).map_or_else(|_| json!(p.to_string()), |p| json!(p));
        result["potential_initial"] = as_json(series[0]);
        result["potential_final"] = as_json(*series.last().expect("series starts with the initial value"));
        if a.trace {
            result["potential_series"] = Value::Array(series.iter().map(|&p| as_json(p)).collect());
        }
    }
    if a.trace {
        result["trace"] = json!(trace.steps.iter().map(|s| json!([s.vertex + 1, u8::from(s.value)])).collect::<Vec<_>>());
    }
    let summary = format!(
        "{} after {} flips (limit {max_steps}); final profile {}",
        if trace.converged { "converged" } else { "stopped" },
        trace.steps.len(),
        trace.final_profile
    );
    let mut out = Outcome::new(inputs, result, summary);
    if a.init == Init::Random {
        out = out.seed("init", a.seed);
    }
    if a.schedule == ScheduleArg::Random {
        out = out.seed("schedule", schedule_seed);
    }
    Ok(out)
}

fn verdict_summary(v: Verdict) -> &'static str {
    match v {
        Verdict::AlwaysExists => "always has PNE",
        Verdict::Polynomial => "PNE existence decidable in polynomial time",
        Verdict::NpComplete => "PNE existence is NP-complete",
    }
}

pub fn classify(a: &ClassifyArgs) -> CliResult<Outcome> {
    let mut inputs = Inputs::default();
    inputs.hash(a.pattern.as_bytes());
    let p: Pattern = a.pattern.parse()?;
    let classes: Vec<Value> = p
        .classify()
        .into_iter()
        .map(|c| {
            json!({
                "class": c.class.notation(),
                "verdict": verdict_summary(c.verdict),
                "complexity": c.verdict.as_str(),
            })
        })
        .collect();
    let summary = if classes.is_empty() {
        format!("{p}: unclassified")
    } else {
        let names: Vec<String> = p
            .classify()
            .into_iter()
            .map(|c| format!("{} ({})", c.class.notation(), c.verdict.as_str()))
            .collect();
        format!("{p}: {}", names.join(", "))
    };
    let result = json!({ "pattern": p.to_string(), "unclassified": classes.is_empty(), "classes": classes });
    Ok(Outcome::new(inputs, result, summary))
}

pub fn gadget(a: &GadgetArgs) -> CliResult<Outcome> {
    let kind: GadgetKind = a.name.parse()?;
    if kind.fixed_arity().is_none() && a.arity.is_none() {
        return Err(CliError::Usage(format!("{kind} needs --arity")));
    }
    let g = build_gadget(kind, a.k, a.arity)?;
    g.check_structure()?;
    let contract = GadgetContract::standard(&g);
    let mut result = json!({
        "kind": kind,
        "k": g.k(),
        "arity": g.arity(),
        "vertices": g.n(),
        "edges": g.edges().len(),
        "pattern": g.pattern().to_string(),
        "membrane": g.membrane().iter().map(|v| v + 1).collect::<Vec<_>>(),
        "contract": contract.describe(),
    });
    let mut summary = format!("{kind} k={} arity={}: {} vertices, {} edges", g.k(), g.arity(), g.n(), g.edges().len());
    if let Some(mode) = a.verify {
        let mode = match mode {
            VerifyArg::Exact => VerifyMode::Exact,
            VerifyArg::Compositional => VerifyMode::Compositional,
        };
        let report = verify_contract(&g, &contract, mode)?;
        summary.push_str(&format!("; contract {}", if report.passed { "holds" } else { "VIOLATED" }));
        result["verification"] = json!(report);
    }
    if let Some(path) = &a.emit {
        write_file(path, &g.emit())?;
    }
    Ok(Outcome::new(Inputs::default(), result, summary))
}

pub fn reduce(a: &ReduceArgs) -> CliResult<Outcome> {
    let mut inputs = Inputs::default();
    let inst = load(&mut inputs, &a.satfile, parse_1in3)?;
    let unused: Vec<usize> = inst.unused_vars().iter().map(|x| x + 1).collect();
    if !unused.is_empty() {
        eprintln!("warning: variables {unused:?} occur in no clause and are left unconstrained");
    }
    let (g, cert) = compile_reduction(&inst, a.k, ReductionOptions { equiv_chain: a.equiv_chain })?;
    write_file(&a.output, &write_game(&g))?;
    let cert_json = serde_json::to_string_pretty(&cert).expect("certificates serialize");
    if let Some(path) = &a.cert {
        write_file(path, &(cert_json + "\n"))?;
    }
    let mut gadgets: BTreeMap<String, usize> = BTreeMap::new();
    for p in &cert.gadgets {
        *gadgets.entry(p.kind.to_string()).or_default() += 1;
    }
    let result = json!({
        "k": a.k,
        "variables": inst.num_vars,
        "clauses": inst.clauses.len(),
        "unused_variables": unused,
        "vertices": g.n(),
        "edges": g.edges().len(),
        "pattern": Pattern::picky(a.k).to_string(),
        "gadgets": gadgets,
        "equiv_chain": a.equiv_chain,
    });
    let summary = format!("compiled {} clauses into {} vertices and {} edges", inst.clauses.len(), g.n(), g.edges().len());
    Ok(Outcome::new(inputs, result, summary))
}

pub fn certify(a: &CertifyArgs) -> CliResult<Outcome> {
    let mut inputs = Inputs::default();
    let g = load(&mut inputs, &a.game, parse_game)?;
    let text = inputs.read(&a.cert)?;
    let cert: ReductionCertificate =
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: a.cert.clone(), source })?;
    inputs.hash(a.assignment.as_bytes());
    let rebuilt = cert.rebuild().map_err(|source| CliError::Input { path: a.cert.clone(), source })?;
    if rebuilt != g {
        return Err(CliError::Usage(format!(
            "{} does not describe the game in {}",
            a.cert.display(),
            a.game.display()
        )));
    }
    let inst = cert.instance()?;
    let sigma: Vec<bool> = a
        .assignment
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(CliError::Usage(format!("assignment must be a bit string, found {c:?}"))),
        })
        .collect::<CliResult<_>>()?;
    if sigma.len() != inst.num_vars {
        return Err(CliError::Usage(format!("assignment has {} bits, instance has {} variables", sigma.len(), inst.num_vars)));
    }

    let result = match assignment_to_profile(&inst, &cert, &sigma) {
        Ok(w) => {
            let report = g.is_pne(&w.profile)?;
            let back = profile_to_assignment(&inst, &cert, &w.profile)?;
            let occurring: Vec<usize> = (0..inst.num_vars).filter(|x| !inst.unused_vars().contains(x)).collect();
            let round_trip = occurring.iter().all(|&x| back[x] == sigma[x]);
            json!({
                "valid": report.is_pne && round_trip,
                "satisfies_instance": true,
                "is_pne": report.is_pne,
                "violators": report.violators.iter().map(|v| v + 1).collect::<Vec<_>>(),
                "round_trip": round_trip,
                "fallback_used": w.fallback_used,
                "profile": w.profile,
                "recovered_assignment": bits(&back),
            })
        }
        Err(Error::Assignment(reason)) => json!({
            "valid": false,
            "satisfies_instance": inst.is_satisfied_by(&sigma),
            "reason": reason,
        }),
        Err(e) => return Err(e.into()),
    };
    let summary = format!("assignment {}: {}", a.assignment, if result["valid"] == json!(true) { "certified" } else { "rejected" });
    Ok(Outcome::new(inputs, result, summary))
}

pub fn threshold(a: &ThresholdArgs) -> CliResult<Outcome> {
    let mut inputs = Inputs::default();
    let t = load(&mut inputs, &a.file, parse_threshold)?;
    let rule = match a.k_rule {
        KRuleArg::Floor => KRule::Floor,
        KRuleArg::FloorPlusOne => KRule::FloorPlusOne,
    };
    let (g, mapping) = t.to_pgg(rule)?;
    if let Some(path) = &a.output {
        write_file(path, &write_game(&g))?;
    }
    let mut result = json!({
        "rule": rule,
        "vertices": g.n(),
        "edges": g.edges().len(),
        "patterns": g.patterns().iter().map(ToString::to_string).collect::<Vec<_>>(),
    });
    let mut summary = format!("{} players mapped with rule {:?}", g.n(), rule);
    if g.n() <= THRESHOLD_ENUMERATION_MAX_N {
        let mut all_ok = true;
        let mut rows = Vec::new();
        for s in g.enumerate_pne(None)? {
            let sides = mapping.to_threshold(&s);
            let check = t.pne_check(&sides)?;
            all_ok &= check.is_pne;
            rows.push(json!({
                "profile": s,
                "sides": sides,
                "threshold_pne": check.is_pne,
                "threshold_violators": check.violators.iter().map(|v| v + 1).collect::<Vec<_>>(),
            }));
        }
        summary.push_str(&format!("; {} equilibria, mapping {}", rows.len(), if all_ok { "preserved" } else { "FAILED" }));
        result["pne"] = Value::Array(rows);
        result["mapping_ok"] = json!(all_ok);
    }
    Ok(Outcome::new(inputs, result, summary))
}

pub fn congestion(a: &CongestionArgs) -> CliResult<Outcome> {
    let mut inputs = Inputs::default();
    let g = load(&mut inputs, &a.file, parse_game)?;
    let report = verify_isomorphism(&g, a.check_samples, a.seed, a.exhaustive_n)?;
    let summary = format!(
        "{} profiles checked ({}): {}",
        report.profiles_checked,
        if report.exhaustive { "exhaustive" } else { "sampled" },
        if report.ok() { "no mismatch" } else { "MISMATCH" }
    );
    let mut result = json!(report);
    result["ok"] = json!(report.ok());
    let mut out = Outcome::new(inputs, result, summary);
    if !report.exhaustive {
        out = out.seed("samples", a.seed);
    }
    Ok(out)
}

/// Accepts `p/q`, integers and decimals such as `0.25`, all exactly.
fn parse_probability(text: &str) -> CliResult<Ratio<u64>> {
    let bad = || CliError::Usage(format!("invalid probability {text:?}"));
    let num = |s: &str| s.parse::<u64>().map_err(|_| bad());
    let r = if let Some((p, q)) = text.split_once('/') {
        let q = num(q)?;
        if q == 0 {
            return Err(bad());
        }
        Ratio::new(num(p)?, q)
    } else if let Some((int, frac)) = text.split_once('.') {
        let scale = 10u64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let int = if int.is_empty() { 0 } else { num(int)? };
        let frac = if frac.is_empty() { 0 } else { num(frac)? };
        Ratio::new(int.checked_mul(scale).and_then(|i| i.checked_add(frac)).ok_or_else(bad)?, scale)
    } else {
        Ratio::from_integer(num(text)?)
    };
    Ok(r)
}

pub fn gen(a: &GenArgs) -> CliResult<Outcome> {
    let model = match a.model {
        ModelArg::Gnp => GraphModel::Gnp { n: a.n, p: parse_probability(&a.p)? },
        ModelArg::CompleteWeighted => GraphModel::CompleteWeighted { n: a.n, wmax: a.wmax },
    };
    let patterns: Vec<Pattern> = a.patterns.iter().map(|p| p.parse()).collect::<pgg_core::Result<_>>()?;
    let spec = match patterns.as_slice() {
        [p] => PatternSpec::Homogeneous(p.clone()),
        _ => PatternSpec::RandomFrom(patterns.clone()),
    };
    let g = generate_instance(&model, &spec, a.seed)?;
    let text = write_game(&g);
    let mut result = json!({
        "model": model,
        "patterns": patterns.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "vertices": g.n(),
        "edges": g.edges().len(),
        "total_weight": g.total_weight(),
    });
    match &a.output {
        Some(path) => write_file(path, &text)?,
        None => result["game"] = json!(text),
    }
    let summary = format!("generated {} vertices and {} edges", g.n(), g.edges().len());
    Ok(Outcome::new(Inputs::default(), result, summary).seed("graph", a.seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities_are_exact() {
        assert_eq!(parse_probability("1/2").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_probability("0.25").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_probability("1").unwrap(), Ratio::from_integer(1));
        assert_eq!(parse_probability(".5").unwrap(), Ratio::new(1, 2));
        assert!(parse_probability("1/0").is_err());
        assert!(parse_probability("x").is_err());
    }

}
