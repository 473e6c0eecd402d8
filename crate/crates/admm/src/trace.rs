use std::io::Write;
use std::time::Duration;

/// State after one ADMM iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: u64,
    /// `‖Σ_k A_k x_k‖∞`
    pub residual: f64,
    /// Generation cost of all regions, auxiliary units excluded.
    pub objective: f64,
    /// Per region, after this iteration's penalty update.
    pub rho: Vec<f64>,
    /// Per region local residual `Γ_k`.
    pub gamma: Vec<f64>,
    pub solve_time: Duration,
    pub exchange_time: Duration,
    pub update_time: Duration,
}

/// Append-only iteration history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub regions: Vec<u32>,
    records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn new(regions: Vec<u32>) -> Self {
        Self { regions, records: Vec::new() }
    }

    pub fn push(&mut self, record: IterationRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// One row per iteration: iteration, residual, objective, then `ρ_k` and
    /// `Γ_k` per region. Timings are left out so that identical runs give
    /// identical files.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["iteration".to_string(), "residual".into(), "objective".into()];
        header.extend(self.regions.iter().map(|r| format!("rho_{r}")));
        header.extend(self.regions.iter().map(|r| format!("gamma_{r}")));
        w.write_record(&header)?;
        for rec in &self.records {
            let mut row = vec![rec.iteration.to_string(), format!("{:e}", rec.residual), format!("{:e}", rec.objective)];
            row.extend(rec.rho.iter().map(|v| format!("{v:e}")));
            row.extend(rec.gamma.iter().map(|v| format!("{v:e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
