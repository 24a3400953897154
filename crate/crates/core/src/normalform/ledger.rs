use std::fmt::Write as _;

/// Relative slack granted to non-strict rows for floating-point rounding.
pub const LEDGER_SLACK: f64 = 1e-12;

/// One certified inequality `measured <= claimed` (or `<` when `strict`).
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerRow {
    pub step: usize,
    pub label: String,
    pub claimed: f64,
    pub measured: f64,
    pub strict: bool,
}

impl LedgerRow {
    pub fn pass(&self) -> bool {
        if self.strict {
            self.measured < self.claimed
        } else {
            self.measured <= self.claimed + LEDGER_SLACK * self.claimed.abs()
        }
    }
}

/// Ordered list of ledger rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ledger {
    rows: Vec<LedgerRow>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, step: usize, label: impl Into<String>, claimed: f64, measured: f64) {
        self.rows.push(LedgerRow {
            step,
            label: label.into(),
            claimed,
            measured,
            strict: false,
        });
    }

    pub fn push_strict(&mut self, step: usize, label: impl Into<String>, claimed: f64, measured: f64) {
        self.rows.push(LedgerRow {
            step,
            label: label.into(),
            claimed,
            measured,
            strict: true,
        });
    }

    pub fn extend_with_step(&mut self, other: &Ledger, step: usize) {
        for r in &other.rows {
            let mut r = r.clone();
            r.step = step;
            self.rows.push(r);
        }
    }

    pub fn append(&mut self, other: Ledger) {
        self.rows.extend(other.rows);
    }

    pub fn rows(&self) -> &[LedgerRow] {
        &self.rows
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(LedgerRow::pass)
    }

    pub fn failures(&self) -> Vec<&LedgerRow> {
        self.rows.iter().filter(|r| !r.pass()).collect()
    }

    pub fn find(&self, label: &str) -> Option<&LedgerRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Tab-separated table `step label claimed measured pass`.
    pub fn to_table(&self) -> String {
        let mut out = String::from("step\tlabel\tclaimed\tmeasured\tpass\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{:.6e}\t{:.6e}\t{}",
                r.step,
                r.label,
                r.claimed,
                r.measured,
                if r.pass() { "yes" } else { "NO" }
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_and_slack() {
        let mut l = Ledger::new();
        l.push(0, "a", 1.0, 1.0 + 1e-14);
        l.push_strict(0, "b", 1.0, 1.0);
        assert!(l.rows()[0].pass());
        assert!(!l.rows()[1].pass());
        assert_eq!(l.failures().len(), 1);
        assert!(l.to_table().contains("NO"));
    }
}
