//! Bookkeeping for the acceptance run: timed criteria with a runtime budget
//! and one report line each.

use std::fmt;
use std::time::{Duration, Instant};

/// Verdict of one criterion before its runtime budget is applied.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub pass: bool,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn new() -> Self {
        Self {
            pass: true,
            notes: Vec::new(),
        }
    }

    pub fn failed(note: impl Into<String>) -> Self {
        Self {
            pass: false,
            notes: vec![note.into()],
        }
    }

    /// Records a sub-check; a false `cond` fails the criterion.
    pub fn check(&mut self, cond: bool, note: impl Into<String>) {
        let note = note.into();
        if cond {
            self.notes.push(note);
        } else {
            self.pass = false;
            self.notes.push(format!("FAILED {note}"));
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub elapsed: Duration,
    pub budget: Duration,
    pub notes: Vec<String>,
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<22} {} ({:.2}s of {}s) {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.notes.join(", ")
        )?;
        if self.elapsed > self.budget {
            write!(f, ", FAILED over budget")?;
        }
        Ok(())
    }
}

/// Runs `f`, failing the criterion when it overruns `budget_s` seconds.
pub fn timed(id: usize, name: &'static str, budget_s: u64, f: impl FnOnce() -> Outcome) -> Line {
    let t = Instant::now();
    let o = f();
    let elapsed = t.elapsed();
    let budget = Duration::from_secs(budget_s);
    Line {
        id,
        name,
        pass: o.pass && elapsed <= budget,
        elapsed,
        budget,
        notes: o.notes,
    }
}

/// Report lines sorted by criterion, then a summary; returns the failure count.
pub fn report(lines: &mut [Line], out: &mut impl std::io::Write) -> std::io::Result<usize> {
    lines.sort_by_key(|l| l.id);
    let failed = lines.iter().filter(|l| !l.pass).count();
    for l in lines.iter() {
        writeln!(out, "{l}")?;
    }
    writeln!(
        out,
        "acceptance: {} passed, {} failed",
        lines.len() - failed,
        failed
    )?;
    Ok(failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_accumulate() {
        let mut o = Outcome::new();
        o.check(true, "fine");
        assert!(o.pass);
        o.check(false, "broken");
        o.check(true, "fine again");
        assert!(!o.pass);
        assert_eq!(o.notes[1], "FAILED broken");
    }

    #[test]
    fn budget_overrun_fails() {
        let l = timed(3, "slow", 0, || {
            std::thread::sleep(Duration::from_millis(5));
            Outcome::new()
        });
        assert!(!l.pass);
        assert!(l.to_string().contains("over budget"));
    }

    #[test]
    fn report_sorts_and_counts() {
        let mut lines = vec![
            timed(2, "b", 10, || Outcome::failed("no")),
            timed(1, "a", 10, Outcome::new),
        ];
        let mut buf = Vec::new();
        assert_eq!(report(&mut lines, &mut buf).unwrap(), 1);
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("criterion  1 a"));
        assert!(text.ends_with("acceptance: 1 passed, 1 failed\n"));
    }
}
