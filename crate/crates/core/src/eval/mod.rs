//! Evaluation: the small-step machine and a big-step reference evaluator.

pub mod bigstep;
pub mod machine;

pub use machine::{
    decompose, run, run_traced, step, trace_line, Decomposition, EvalContext, Frame, Outcome, Redex, Rule,
    RunResult, StepResult, Stuck, DEFAULT_MAX_STEPS,
};

/// Runs `f` on a thread with a large stack; terms are processed recursively
/// and long lists nest deeply.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new()
        .stack_size(512 << 20)
        .spawn(f)
        .expect("spawn evaluator thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}
