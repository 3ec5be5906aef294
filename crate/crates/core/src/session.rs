//! Checking and running whole programs, and the interactive session state
//! shared by the command-line driver.

use std::collections::BTreeSet;

use crate::diagnostic::{Diagnostic, Span};
use crate::effects::EffChecker;
use crate::eval::{self, trace_line, Outcome, RunResult};
use crate::infer::{CheckOptions, Checker};
use crate::parse::{parse_program_with, pretty_scheme, pretty_term, Main, Program};
use crate::syntax::{Effect, Name, Scheme, Term};

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const STATIC: i32 = 1;
    pub const IO: i32 = 2;
    pub const STUCK: i32 = 3;
    pub const OUT_OF_FUEL: i32 = 4;
    pub const UNHANDLED: i32 = 5;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    /// Enforce the signature restriction (at declarations, or at
    /// generalization in effect mode).
    pub sr: bool,
    pub effects: bool,
    pub trace: bool,
    pub max_steps: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options { sr: true, effects: false, trace: false, max_steps: eval::DEFAULT_MAX_STEPS }
    }
}

pub fn outcome_status(o: &Outcome) -> i32 {
    match o {
        Outcome::Value(_) => exit::OK,
        Outcome::Stuck(_) => exit::STUCK,
        Outcome::OutOfFuel => exit::OUT_OF_FUEL,
        Outcome::UnhandledOp { .. } => exit::UNHANDLED,
    }
}

/// `let b1 = M1 in ... in main`, or `None` without a main expression.
pub fn program_term(p: &Program) -> Option<Term> {
    let main = p.main.as_ref()?.term.clone();
    Some(p.bindings.iter().rev().fold(main, |body, b| {
        Term::Let(b.name.clone(), b.ann.clone(), Box::new(b.term.clone()), Box::new(body))
    }))
}

/// Evaluates a closed term on a large stack, printing trace lines to
/// stdout when `trace` is set.
pub fn execute(term: Term, max_steps: u64, trace: bool) -> RunResult {
    eval::with_big_stack(move || {
        if trace {
            eval::run_traced(&term, max_steps, &mut |n, rule, redex, contractum| {
                println!("{}", trace_line(n, rule, redex, contractum))
            })
        } else {
            eval::run(&term, max_steps)
        }
    })
}

/// Typing state for either type system.
#[derive(Clone, Debug)]
enum Typer {
    Plain(Checker),
    Effects(EffChecker),
}

/// A type as shown to the user: the scheme, plus the effect in effect mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Typing {
    pub scheme: Scheme,
    pub effect: Option<Effect>,
}

impl std::fmt::Display for Typing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&pretty_scheme(&self.scheme))?;
        if let Some(e) = &self.effect {
            write!(f, " ! {e}")?;
        }
        Ok(())
    }
}

/// Declarations, typed bindings and their values accumulated so far.
#[derive(Clone, Debug)]
pub struct Session {
    pub options: Options,
    typer: Typer,
    ops: BTreeSet<Name>,
    values: Vec<(Name, Term)>,
}

/// What checking one chunk of input produced.
#[derive(Clone, Debug, Default)]
pub struct Checked {
    pub program: Program,
    pub bindings: Vec<(Name, Typing)>,
    pub main: Option<Typing>,
}

impl Checked {
    /// `name : type` lines, with `-` for the main expression.
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.bindings.iter().map(|(n, t)| format!("{n} : {t}")).collect();
        if let Some(t) = &self.main {
            out.push(format!("- : {t}"));
        }
        out
    }
}

impl Session {
    pub fn new(options: Options) -> Self {
        let co = CheckOptions { sr: options.sr };
        let typer = if options.effects {
            Typer::Effects(EffChecker::new(co))
        } else {
            Typer::Plain(Checker::new(co))
        };
        Session { options, typer, ops: BTreeSet::new(), values: Vec::new() }
    }

    /// Parses and typechecks `src` on top of the session. On success the
    /// declarations and binding types are kept; values are not computed.
    pub fn check(&mut self, src: &str) -> Result<Checked, Vec<Diagnostic>> {
        let program = parse_program_with(src, &self.ops)?;
        // Work on a copy so that a failing chunk leaves the session unchanged.
        let mut typer = self.typer.clone();
        let mut bindings = Vec::new();
        let mut main = None;
        match &mut typer {
            Typer::Plain(c) => {
                let errors: Vec<Diagnostic> = program.decls.iter().filter_map(|d| c.declare(d).err()).collect();
                if !errors.is_empty() {
                    return Err(errors);
                }
                for b in &program.bindings {
                    let s = c.bind(b).map_err(|d| vec![d])?;
                    bindings.push((b.name.clone(), Typing { scheme: s, effect: None }));
                }
                if let Some(m) = &program.main {
                    let s = c.type_of(m).map_err(|d| vec![d])?;
                    main = Some(Typing { scheme: s, effect: None });
                }
            }
            Typer::Effects(c) => {
                c.declare_all(&program.decls)?;
                for b in &program.bindings {
                    let (s, e) = c.bind(b).map_err(|d| vec![d])?;
                    bindings.push((b.name.clone(), Typing { scheme: s, effect: Some(e) }));
                }
                if let Some(m) = &program.main {
                    let (s, e) = c.type_of(m).map_err(|d| vec![d])?;
                    main = Some(Typing { scheme: s, effect: Some(e) });
                }
            }
        }
        self.typer = typer;
        self.ops.extend(program.decls.iter().map(|d| d.name.clone()));
        Ok(Checked { program, bindings, main })
    }

    /// The type of an expression in the current session.
    pub fn type_of(&mut self, src: &str) -> Result<Typing, Vec<Diagnostic>> {
        let program = parse_program_with(src, &self.ops)?;
        let Some(m) = program.main.filter(|_| program.decls.is_empty() && program.bindings.is_empty()) else {
            return Err(vec![Diagnostic::error(Span::default(), "expected a single expression")]);
        };
        self.type_main(&m)
    }

    fn type_main(&mut self, m: &Main) -> Result<Typing, Vec<Diagnostic>> {
        let mut typer = self.typer.clone();
        let r = match &mut typer {
            Typer::Plain(c) => c.type_of(m).map(|s| Typing { scheme: s, effect: None }),
            Typer::Effects(c) => c.type_of(m).map(|(s, e)| Typing { scheme: s, effect: Some(e) }),
        };
        r.map_err(|d| vec![d])
    }

    /// Closes `t` over the values of earlier bindings.
    fn close(&self, t: &Term) -> Term {
        self.values.iter().rev().fold(t.clone(), |body, (x, v)| {
            Term::Let(x.clone(), None, Box::new(v.clone()), Box::new(body))
        })
    }

    /// Evaluates `t` in the session's environment.
    pub fn eval(&self, t: &Term, trace: bool) -> RunResult {
        execute(self.close(t), self.options.max_steps, trace)
    }

    /// Evaluates a checked binding and records its value. Returns the
    /// outcome if it was not a value.
    pub fn define(&mut self, name: &Name, t: &Term, trace: bool) -> RunResult {
        let r = self.eval(t, trace);
        if let Outcome::Value(v) = &r.outcome {
            self.values.push((name.clone(), v.clone()));
        }
        r
    }
}

/// Renders an outcome the way `run` prints it.
pub fn show_outcome(r: &RunResult) -> String {
    match &r.outcome {
        Outcome::OutOfFuel => format!("out of fuel after {} steps", r.steps),
        o => o.to_string(),
    }
}

/// Checks a whole file in a fresh session.
pub fn check_source(src: &str, options: Options) -> Result<Checked, Vec<Diagnostic>> {
    Session::new(options).check(src)
}

/// Checks and then runs a whole file. Static errors are returned as
/// diagnostics; a program without a main expression runs to nothing.
pub fn run_source(src: &str, options: Options) -> Result<(Checked, Option<RunResult>), Vec<Diagnostic>> {
    let checked = check_source(src, options)?;
    let result = program_term(&checked.program).map(|t| execute(t, options.max_steps, options.trace));
    Ok((checked, result))
}

/// Value printing for the REPL: `name : type = value`.
pub fn binding_line(name: &str, t: &Typing, v: &Term) -> String {
    format!("{name} : {t} = {}", pretty_term(v))
}
