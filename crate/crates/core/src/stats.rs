//! Reference bounds, binomial error bars and the shared CSV row format.

use std::io::{self, Write};

use serde::Serialize;

/// Hits out of trials for a Bernoulli experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Tally {
    pub hits: u64,
    pub trials: u64,
}

impl Tally {
    pub fn new(hits: u64, trials: u64) -> Self {
        Self { hits, trials }
    }

    pub fn freq(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.hits as f64 / self.trials as f64
        }
    }

    /// Standard error of the empirical frequency.
    pub fn se(&self) -> f64 {
        binomial_se(self.freq(), self.trials)
    }
}

/// `sqrt(p(1-p)/trials)`.
pub fn binomial_se(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Whether `empirical <= bound + 3σ`, σ taken at the bound.
pub fn within_upper(empirical: f64, bound: f64, trials: u64) -> bool {
    empirical <= bound + 3.0 * binomial_se(bound, trials)
}

/// Whether `empirical + 3σ >= bound`, σ taken at the bound.
pub fn within_lower(empirical: f64, bound: f64, trials: u64) -> bool {
    empirical + 3.0 * binomial_se(bound, trials) >= bound
}

/// Tail of the bad-count in one almost-completeness tuple: `exp(-sqrt(n)(1-p)/3)`.
pub fn almost_complete_tail(n: usize, p: f64) -> f64 {
    (-(n as f64).sqrt() * (1.0 - p) / 3.0).exp()
}

/// Threshold `max(2 sqrt(n)(1-p), 9e^2 ln(kn))` for which `G(n,p,k)` is
/// almost-complete with high probability. Natural logarithm.
pub fn almost_complete_threshold(n: usize, p: f64, k: usize) -> f64 {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    (2.0 * (n as f64).sqrt() * (1.0 - p)).max(9.0 * e2 * ((k * n) as f64).ln())
}

/// Satisfaction bound for a rank-`r` system: `(3/4)^r`.
pub fn rank_bound(r: usize) -> f64 {
    0.75f64.powi(r as i32)
}

/// Walk success reference: `exp(-32 d beta - 64 d^2 (1 - alpha))`.
pub fn walk_success_bound(d: usize, alpha: f64, beta: f64) -> f64 {
    let d = d as f64;
    (-32.0 * d * beta - 64.0 * d * d * (1.0 - alpha)).exp()
}

/// Probability bound for more than `4d` loop iterations: `exp(-d/4)`.
pub fn overrun_bound(d: usize) -> f64 {
    (-(d as f64) / 4.0).exp()
}

/// One experiment summary row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub experiment_id: String,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub params: Vec<(String, String)>,
    pub empirical_value: f64,
    pub reference_bound: f64,
    pub trials: u64,
    pub seed: u64,
}

impl CsvRow {
    pub fn param(mut self, name: &str, value: impl ToString) -> Self {
        self.params.push((name.to_string(), value.to_string()));
        self
    }
}

/// Write rows as CSV. Comment lines (each prefixed by `# `) come first; the
/// header is taken from the first row's parameter names.
pub fn write_csv<W: Write>(out: W, comments: &[String], rows: &[CsvRow]) -> io::Result<()> {
    let mut out = out;
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    let names: Vec<&str> = rows
        .first()
        .map(|r| r.params.iter().map(|(k, _)| k.as_str()).collect())
        .unwrap_or_default();
    let mut header = vec!["experiment_id", "n", "k", "p"];
    header.extend(&names);
    header.extend(["empirical_value", "reference_bound", "trials", "seed"]);
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.experiment_id.clone(), r.n.to_string(), r.k.to_string(), r.p.to_string()];
        rec.extend(r.params.iter().map(|(_, v)| v.clone()));
        rec.extend([
            r.empirical_value.to_string(),
            r.reference_bound.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
        ]);
        w.write_record(&rec)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // exp(-64 * 0.1 / 3)
        assert!((almost_complete_tail(4096, 0.9) - 0.11844).abs() < 1e-4);
        assert_eq!(walk_success_bound(0, 0.5, 0.5), 1.0);
        assert!((rank_bound(2) - 0.5625).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let row = CsvRow {
            experiment_id: "t".into(),
            n: 4,
            k: 2,
            p: 0.5,
            params: vec![],
            empirical_value: 0.25,
            reference_bound: 1.0,
            trials: 8,
            seed: 3,
        }
        .param("d", 2);
        let mut buf = Vec::new();
        write_csv(&mut buf, &["cfg".into()], &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# cfg\nexperiment_id,n,k,p,d,empirical_value,reference_bound,trials,seed\nt,4,2,0.5,2,0.25,1,8,3\n"
        );
    }
}
