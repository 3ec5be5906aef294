//! End-to-end acceptance checks. Prints one `PASS`/`FAIL` line per
//! criterion and exits non-zero if any fails.
//!
//! Tolerances: program outputs must match exactly; the filter program must
//! check and evaluate in under 100 ms (measured in-process); every generated
//! law runs 1000 cases from a fixed seed.

#[path = "../../core/tests/common/mod.rs"]
mod common;
#[allow(dead_code)]
#[path = "../../core/tests/laws/mod.rs"]
mod laws;

use std::collections::{BTreeSet, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use efflang_core::eval::bigstep::evaluate;
use efflang_core::eval::{run_traced, with_big_stack, Outcome, Rule};
use efflang_core::infer::{elaborate_signature, TypeMode, VarSupply};
use efflang_core::parse::parse_program;
use efflang_core::polarity::check_sr;
use efflang_core::session::{check_source, program_term, run_source, show_outcome, Options};
use efflang_core::syntax::{alpha_eq, Term};

const RUNTIME_LIMIT: Duration = Duration::from_millis(100);

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(name)
}

fn efflang(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_efflang"))
        .args(args)
        .env_remove("EFFLANG_MAX_STEPS")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn efflang");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn run_file(name: &str, flags: &[&str]) -> (i32, String, String) {
    let path = corpus(name);
    let mut args = vec!["run"];
    args.extend_from_slice(flags);
    args.push(path.to_str().unwrap());
    let out = efflang(&args, "");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).trim_end().to_string(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn expect_output(name: &str, flags: &[&str], expected: &str) -> Verdict {
    let (code, out, err) = run_file(name, flags);
    if code == 0 && out == expected {
        Ok(format!("{name} prints {out}"))
    } else {
        Err(format!("{name}: exit {code}, stdout `{out}`, stderr `{}`", err.trim()))
    }
}

fn filter_program() -> Verdict {
    let src = std::fs::read_to_string(corpus("filter.eff")).unwrap();
    let start = Instant::now();
    let (_, r) = run_source(&src, Options::default()).map_err(|d| format!("{d:?}"))?;
    let elapsed = start.elapsed();
    let shown = show_outcome(&r.ok_or("no main expression")?);
    let cli = expect_output("filter.eff", &[], "[3; 5]")?;
    if shown != "[3; 5]" {
        return Err(format!("in-process result {shown}"));
    }
    if elapsed >= RUNTIME_LIMIT {
        return Err(format!("took {elapsed:?}, limit {RUNTIME_LIMIT:?}"));
    }
    Ok(format!("{cli} in {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn two_select() -> Verdict {
    let trace = std::fs::read_to_string(corpus("two_select.trace")).unwrap();
    let oracle = trace
        .lines()
        .rev()
        .find_map(|l| l.strip_prefix("result ="))
        .and_then(|l| l.rsplit(" = ").next())
        .ok_or("trace has no result line")?
        .trim()
        .to_string();
    expect_output("two_select.eff", &[], &oracle).map(|s| format!("{s}, matching the hand trace"))
}

fn counterexample() -> Verdict {
    let path = corpus("counterexample.eff");
    let out = efflang(&["check", path.to_str().unwrap()], "");
    let err = String::from_utf8_lossy(&out.stderr);
    let wanted = "get_id: a occurs negatively in codomain a -> a";
    if out.status.code() != Some(1) || !err.contains(wanted) {
        return Err(format!("with the restriction: exit {:?}, stderr `{}`", out.status.code(), err.trim()));
    }
    let (code, stdout, _) = run_file("counterexample.eff", &["--no-sr"]);
    let first = stdout.lines().next().unwrap_or_default();
    if code != 3 || !first.starts_with("stuck: constant application is undefined") || !first.ends_with(" true") {
        return Err(format!("without the restriction: exit {code}, stdout `{stdout}`"));
    }
    Ok(format!("rejected ({wanted}); with --no-sr exit 3, `{first}`"))
}

fn signature_table() -> Verdict {
    let table = [
        ("effect fail : forall a. unit ~> a", true),
        ("effect select : forall a. a list ~> a", true),
        ("effect satisfy : forall a. (str -> (a * str) + unit) ~> a", true),
        ("effect get_id : forall a. unit ~> (a -> a)", false),
        ("effect weird : forall a. ((a -> int) -> a) ~> a", false),
    ];
    let mut agree = 0;
    let mut wrong = Vec::new();
    for (src, pass) in table {
        let p = parse_program(src).map_err(|d| format!("{src}: {d:?}"))?;
        let sig = elaborate_signature(&p.decls[0], &mut VarSupply::default(), TypeMode::Plain, &BTreeSet::new())
            .map_err(|d| d.message)?;
        if check_sr(&sig).pass == pass {
            agree += 1;
        } else {
            wrong.push(sig.op.to_string());
        }
    }
    if wrong.is_empty() {
        Ok(format!("{agree}/5 verdicts match"))
    } else {
        Err(format!("wrong verdicts for {wrong:?}"))
    }
}

fn repl_type() -> Verdict {
    let out = efflang(&["repl"], "effect select : forall a. a list ~> a\n:type fun x -> #select(x)\n");
    let stdout = String::from_utf8_lossy(&out.stdout);
    let wanted = "forall a. a list -> a";
    if stdout.lines().any(|l| l.trim() == wanted) {
        Ok(format!(":type fun x -> #select(x) reports {wanted}"))
    } else {
        Err(format!("stdout `{}`, stderr `{}`", stdout.trim(), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn effect_mode() -> Verdict {
    let accepted = corpus("mixed_effects.eff");
    let out = efflang(&["check", "--effects", accepted.to_str().unwrap()], "");
    if out.status.code() != Some(0) {
        return Err(format!("mixed_effects.eff rejected: {}", String::from_utf8_lossy(&out.stderr).trim()));
    }
    let rejected = corpus("mixed_effects_rejected.eff");
    let out = efflang(&["check", "--effects", rejected.to_str().unwrap()], "");
    let err = String::from_utf8_lossy(&out.stderr);
    let wanted = "cannot generalize `g`: its effect {get_id} violates the signature restriction";
    if out.status.code() != Some(1) || !err.contains(wanted) {
        return Err(format!("direct binding: exit {:?}, stderr `{}`", out.status.code(), err.trim()));
    }
    Ok(format!("accepted; direct #get_id() binding rejected ({wanted})"))
}

struct Case {
    name: String,
    src: String,
    options: Options,
    reject: bool,
    pure: bool,
}

fn load_corpus() -> Vec<Case> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "eff"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let src = std::fs::read_to_string(&p).unwrap();
            let has = |h: &str| src.lines().any(|l| l.starts_with(h));
            Case {
                name: p.file_name().unwrap().to_string_lossy().into_owned(),
                options: Options {
                    sr: !has("-- mode: no-sr"),
                    effects: has("-- mode: effects"),
                    ..Options::default()
                },
                reject: has("-- reject:"),
                pure: has("-- effect: {}"),
                src,
            }
        })
        .collect()
}

fn closed_program(c: &Case) -> Result<Term, String> {
    let checked = check_source(&c.src, c.options).map_err(|d| format!("{}: {}", c.name, d[0].message))?;
    program_term(&checked.program).ok_or_else(|| format!("{}: no main expression", c.name))
}

fn properties() -> Verdict {
    let mut failed = Vec::new();
    for (name, law) in laws::ALL {
        if std::panic::catch_unwind(law).is_err() {
            failed.push(name);
        }
    }
    let mut programs = 0;
    for c in load_corpus().iter().filter(|c| !c.reject) {
        let m = closed_program(c)?;
        let (small, big) = with_big_stack(move || (efflang_core::eval::run(&m, 1_000_000), evaluate(&m, 1_000_000)));
        let same = small.steps == big.1
            && match (&small.outcome, &big.0) {
                (Outcome::Value(a), Outcome::Value(b)) => alpha_eq(a, b),
                (Outcome::UnhandledOp { op: o1, arg: a1 }, Outcome::UnhandledOp { op: o2, arg: a2 }) => {
                    o1 == o2 && alpha_eq(a1, a2)
                }
                (a, b) => a.kind() == b.kind(),
            };
        if !same {
            failed.push("corpus differential");
            break;
        }
        programs += 1;
    }
    if failed.is_empty() {
        Ok(format!(
            "{} laws x {} cases (seed {:#x}); run = big step on {programs} corpus programs",
            laws::ALL.len(),
            common::CASES,
            common::SEED
        ))
    } else {
        Err(format!("failed: {failed:?}"))
    }
}

fn form(t: &Term) -> &'static str {
    match t {
        Term::Var(_) => "var",
        Term::Const(_) => "const",
        Term::Abs(..) => "abs",
        Term::App(..) => "app",
        Term::Op(..) => "op",
        Term::Handle(..) => "handle",
        Term::Let(..) => "let",
        Term::Pair(..) => "pair",
        Term::Proj1(_) => "fst",
        Term::Proj2(_) => "snd",
        Term::Inl(_) => "inl",
        Term::Inr(_) => "inr",
        Term::CaseSum(..) => "case-sum",
        Term::Nil => "nil",
        Term::Cons(_) => "cons",
        Term::CaseList(..) => "case-list",
        Term::Fix(..) => "fix",
        Term::If(..) => "if",
    }
}

fn soundness_sweep() -> Verdict {
    let cases: Vec<Case> = load_corpus().into_iter().filter(|c| c.options.sr && !c.reject).collect();
    if cases.len() < 25 {
        return Err(format!("only {} accepted programs", cases.len()));
    }
    let mut forms = BTreeSet::new();
    let mut rules = HashSet::new();
    let mut pure = 0;
    for c in &cases {
        let m = closed_program(c)?;
        m.visit(&mut |t| {
            forms.insert(form(t));
        });
        let (outcome, used) = with_big_stack(move || {
            let mut used = Vec::new();
            let r = run_traced(&m, 1_000_000, &mut |_, rule, _, _| used.push(rule));
            (r.outcome, used)
        });
        rules.extend(used);
        match &outcome {
            Outcome::Value(_) => pure += usize::from(c.pure),
            Outcome::UnhandledOp { .. } if !c.pure => {}
            o => return Err(format!("{}: {}", c.name, o.kind())),
        }
    }
    if forms.len() < 18 {
        return Err(format!("only {} term forms covered: {forms:?}", forms.len()));
    }
    if let Some(r) = Rule::ALL.iter().find(|r| !rules.contains(r)) {
        return Err(format!("rule {r} never used"));
    }
    Ok(format!(
        "{} programs, 0 stuck, {} term forms and {} rules covered; {pure} effect-mode programs at {{}} reach a value",
        cases.len(),
        forms.len(),
        Rule::ALL.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("filter program", filter_program),
        ("polymorphic nondeterminism", || expect_output("poly_nondet.eff", &[], "[2; 3; 20]")),
        ("two selects", two_select),
        ("counterexample", counterexample),
        ("signature table", signature_table),
        ("type of an operation call", repl_type),
        ("effect mode", effect_mode),
        ("property suite", properties),
        ("soundness sweep", soundness_sweep),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
