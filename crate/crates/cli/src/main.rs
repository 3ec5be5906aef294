//! `efflang`: typecheck, run or interactively explore programs with
//! algebraic effects and handlers.

use std::io::{self, BufRead, IsTerminal, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use efflang_core::diagnostic::Diagnostic;
use efflang_core::eval::{Outcome, DEFAULT_MAX_STEPS};
use efflang_core::parse::pretty_term;
use efflang_core::session::{
    binding_line, exit, outcome_status, program_term, show_outcome, Options, Session,
};

#[derive(Parser)]
#[command(name = "efflang", version, about = "An ML-like language with polymorphic algebraic effects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck files and print the type of every binding.
    Check(Args),
    /// Typecheck and evaluate files.
    Run(Args),
    /// Start an interactive session, loading any files first.
    Repl(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Do not enforce the signature restriction.
    #[arg(long)]
    no_sr: bool,
    /// Use the type-and-effect system.
    #[arg(long)]
    effects: bool,
    /// Print every reduction step.
    #[arg(long)]
    trace: bool,
    /// Maximum number of reduction steps.
    #[arg(long, env = "EFFLANG_MAX_STEPS", default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    /// Source files; `check` and `run` read stdin when none are given.
    files: Vec<PathBuf>,
}

impl Args {
    fn options(&self) -> Options {
        Options { sr: !self.no_sr, effects: self.effects, trace: self.trace, max_steps: self.max_steps }
    }
}

fn report(file: &str, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}", d.render(file));
    }
}

/// Reads each input as `(display name, contents)`; unreadable files are
/// reported and skipped.
fn sources(files: &[PathBuf], status: &mut i32) -> Vec<(String, String)> {
    if files.is_empty() {
        let mut s = String::new();
        return match io::stdin().read_to_string(&mut s) {
            Ok(_) => vec![("<stdin>".into(), s)],
            Err(e) => {
                eprintln!("<stdin>: {e}");
                *status = exit::IO;
                vec![]
            }
        };
    }
    let mut out = Vec::new();
    for f in files {
        let name = f.display().to_string();
        match std::fs::read_to_string(f) {
            Ok(s) => out.push((name, s)),
            Err(e) => {
                eprintln!("{name}: {e}");
                if *status == exit::OK {
                    *status = exit::IO;
                }
            }
        }
    }
    out
}

fn set(status: &mut i32, s: i32) {
    if *status == exit::OK {
        *status = s;
    }
}

fn cmd_check(args: &Args) -> i32 {
    let mut status = exit::OK;
    for (name, src) in sources(&args.files, &mut status) {
        match Session::new(args.options()).check(&src) {
            Ok(c) => c.lines().iter().for_each(|l| println!("{l}")),
            Err(d) => {
                report(&name, &d);
                set(&mut status, exit::STATIC);
            }
        }
    }
    status
}

fn cmd_run(args: &Args) -> i32 {
    let mut status = exit::OK;
    for (name, src) in sources(&args.files, &mut status) {
        let mut session = Session::new(args.options());
        let checked = match session.check(&src) {
            Ok(c) => c,
            Err(d) => {
                report(&name, &d);
                set(&mut status, exit::STATIC);
                continue;
            }
        };
        let Some(term) = program_term(&checked.program) else { continue };
        let r = session.eval(&term, args.trace);
        println!("{}", show_outcome(&r));
        set(&mut status, outcome_status(&r.outcome));
    }
    status
}

struct Repl {
    session: Session,
}

impl Repl {
    /// Handles one complete input.
    fn input(&mut self, src: &str) {
        if let Some(rest) = src.strip_prefix(":type") {
            match self.session.type_of(rest) {
                Ok(t) => println!("{t}"),
                Err(d) => report("<repl>", &d),
            }
            return;
        }
        let (src, trace) = match src.strip_prefix(":trace") {
            Some(rest) => (rest, true),
            None => (src, false),
        };
        let checked = match self.session.check(src) {
            Ok(c) => c,
            Err(d) => return report("<repl>", &d),
        };
        for ((name, typing), b) in checked.bindings.iter().zip(&checked.program.bindings) {
            let r = self.session.define(name, &b.term, trace);
            match &r.outcome {
                Outcome::Value(v) => println!("{}", binding_line(name.as_str(), typing, v)),
                _ => println!("{name} : {typing}\n{}", show_outcome(&r)),
            }
        }
        if let (Some(m), Some(typing)) = (&checked.program.main, &checked.main) {
            let r = self.session.eval(&m.term, trace);
            match &r.outcome {
                Outcome::Value(v) => println!("- : {typing} = {}", pretty_term(v)),
                _ => println!("- : {typing}\n{}", show_outcome(&r)),
            }
        }
    }
}

/// Whether `src` failed to parse only because it stopped early.
fn incomplete(src: &str) -> bool {
    let probe = src.strip_prefix(":type").or_else(|| src.strip_prefix(":trace")).unwrap_or(src);
    match efflang_core::parse::parse_program(probe) {
        Err(d) => d.iter().any(|d| d.message.ends_with("found end of input")),
        Ok(_) => false,
    }
}

fn cmd_repl(args: &Args) -> i32 {
    let mut repl = Repl { session: Session::new(args.options()) };
    let mut status = exit::OK;
    let files = if args.files.is_empty() { vec![] } else { sources(&args.files, &mut status) };
    for (name, src) in files {
        match repl.session.check(&src) {
            Ok(c) => {
                for b in &c.program.bindings {
                    let r = repl.session.define(&b.name, &b.term, false);
                    if !matches!(r.outcome, Outcome::Value(_)) {
                        eprintln!("{name}: `{}`: {}", b.name, show_outcome(&r));
                    }
                }
            }
            Err(d) => report(&name, &d),
        }
    }
    let interactive = io::stdin().is_terminal();
    let prompt = |cont: bool| {
        if interactive {
            print!("{}", if cont { "  " } else { "# " });
            let _ = io::stdout().flush();
        }
    };
    let mut buf = String::new();
    prompt(false);
    for line in io::stdin().lock().lines() {
        let Ok(line) = line else { return exit::IO };
        if buf.is_empty() && matches!(line.trim(), ":quit" | ":q") {
            break;
        }
        buf.push_str(&line);
        buf.push('\n');
        if buf.trim().is_empty() {
            buf.clear();
        } else if !incomplete(buf.trim()) {
            let input = std::mem::take(&mut buf);
            repl.input(input.trim());
        }
        prompt(!buf.is_empty());
    }
    if !buf.trim().is_empty() {
        repl.input(buf.trim());
    }
    exit::OK
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Run(a) => cmd_run(a),
        Command::Repl(a) => cmd_repl(a),
    };
    ExitCode::from(status as u8)
}
