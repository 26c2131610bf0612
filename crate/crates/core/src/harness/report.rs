use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::method::Method;
use super::trial::TrialResult;
use crate::error::{Error, Result};

fn rate(results: &[TrialResult], flag: impl Fn(&TrialResult) -> bool) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::Empty("trial results"));
    }
    Ok(results.iter().filter(|r| flag(r)).count() as f64 / results.len() as f64)
}

/// Fraction of trials whose decoded string is feasible.
pub fn feasibility_rate(results: &[TrialResult]) -> Result<f64> {
    rate(results, |r| r.feasible)
}

/// Fraction of trials that are feasible and reach the optimal MKP value.
pub fn optimality_rate(results: &[TrialResult]) -> Result<f64> {
    rate(results, |r| r.optimal)
}

/// Mean of `opt_gap` over trials; `None` when every trial lacks a gap.
pub fn mean_optimality_gap(results: &[TrialResult]) -> Result<Option<f64>> {
    if results.is_empty() {
        return Err(Error::Empty("trial results"));
    }
    let gaps: Vec<f64> = results.iter().filter_map(|r| r.opt_gap).collect();
    Ok((!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64))
}

/// One row per method; every value is a mean over instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    /// Fraction of instances with at least one feasible trial.
    pub feasibility_best: f64,
    /// Fraction of instances with at least one optimal trial.
    pub optimality_best: f64,
    pub mean_feasibility_rate: f64,
    pub mean_optimality_rate: f64,
    /// Mean over instances with a defined gap; empty if there are none.
    pub mean_optimality_gap: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    /// Aggregates raw trials. Methods are listed in canonical order, unknown
    /// method names after them alphabetically.
    pub fn from_results(results: &[TrialResult]) -> Result<Self> {
        if results.is_empty() {
            return Err(Error::Empty("trial results"));
        }
        let mut grouped: BTreeMap<&str, BTreeMap<&str, Vec<TrialResult>>> = BTreeMap::new();
        for r in results {
            grouped
                .entry(r.method.as_str())
                .or_default()
                .entry(r.instance_id.as_str())
                .or_default()
                .push(r.clone());
        }
        let rank = |name: &str| {
            Method::ALL
                .iter()
                .position(|m| m.name() == name)
                .unwrap_or(Method::ALL.len())
        };
        let mut methods: Vec<&str> = grouped.keys().copied().collect();
        methods.sort_by_key(|m| (rank(m), *m));

        let mut rows = Vec::new();
        for method in methods {
            let per_instance = &grouped[method];
            let count = per_instance.len() as f64;
            let (mut fb, mut ob, mut fr, mut or) = (0.0, 0.0, 0.0, 0.0);
            let mut gaps = Vec::new();
            for trials in per_instance.values() {
                fb += f64::from(u8::from(trials.iter().any(|r| r.feasible)));
                ob += f64::from(u8::from(trials.iter().any(|r| r.optimal)));
                fr += feasibility_rate(trials)?;
                or += optimality_rate(trials)?;
                if let Some(g) = mean_optimality_gap(trials)? {
                    gaps.push(g);
                }
            }
            rows.push(ReportRow {
                method: method.to_string(),
                feasibility_best: fb / count,
                optimality_best: ob / count,
                mean_feasibility_rate: fr / count,
                mean_optimality_rate: or / count,
                mean_optimality_gap: (!gaps.is_empty())
                    .then(|| gaps.iter().sum::<f64>() / gaps.len() as f64),
            });
        }
        Ok(Self { rows })
    }

    pub fn row(&self, method: Method) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method.name())
    }
}

/// Outcome of [`audit`]: one message per broken invariant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub rows_checked: usize,
    pub problems: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }
}

const AUDIT_TOL: f64 = 1e-9;

/// Checks that the raw rows are internally consistent and, if given, that a
/// report matches the one recomputed from them.
pub fn audit(results: &[TrialResult], report: Option<&ExperimentReport>) -> AuditReport {
    let mut problems = Vec::new();
    let mut seen = BTreeMap::new();
    // implied optimum per instance: C_opt = C / (1 - gap)
    let mut implied: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for (line, r) in results.iter().enumerate() {
        let at = format!("row {} ({} {} trial {})", line + 1, r.instance_id, r.method, r.trial);
        if r.optimal && !r.feasible {
            problems.push(format!("{at}: optimal but not feasible"));
        }
        if !r.bitstring.chars().all(|c| c == '0' || c == '1') || r.bitstring.is_empty() {
            problems.push(format!("{at}: malformed bit-string {:?}", r.bitstring));
        }
        if seen.insert((&r.instance_id, &r.method, r.trial), ()).is_some() {
            problems.push(format!("{at}: duplicate trial"));
        }
        let checks = [
            ("opt_gap", r.opt_gap, r.qubo_objective),
            ("opt_gap_mkp", r.opt_gap_mkp, r.mkp_objective as f64),
        ];
        for (name, gap, value) in checks {
            let Some(gap) = gap else { continue };
            if !gap.is_finite() {
                problems.push(format!("{at}: non-finite {name}"));
                continue;
            }
            if (1.0 - gap).abs() < AUDIT_TOL {
                continue;
            }
            let opt = value / (1.0 - gap);
            let key = (r.instance_id.as_str(), name);
            match implied.get(&key) {
                Some(&prev) if (prev - opt).abs() > AUDIT_TOL * prev.abs().max(1.0) => problems.push(
                    format!("{at}: {name} implies optimum {opt}, earlier rows imply {prev}"),
                ),
                Some(_) => {}
                None => {
                    implied.insert(key, opt);
                }
            }
        }
        if let (Some(gap), true) = (r.opt_gap_mkp, r.optimal) {
            if gap.abs() > AUDIT_TOL {
                problems.push(format!("{at}: optimal row with nonzero MKP gap {gap}"));
            }
        }
    }

    match (ExperimentReport::from_results(results), report) {
        (Ok(recomputed), Some(given)) => {
            if recomputed.rows.len() != given.rows.len() {
                problems.push(format!(
                    "report has {} rows, results give {}",
                    given.rows.len(),
                    recomputed.rows.len()
                ));
            }
            for (a, b) in recomputed.rows.iter().zip(&given.rows) {
                let close = |x: f64, y: f64| (x - y).abs() <= AUDIT_TOL;
                let gaps_match = match (a.mean_optimality_gap, b.mean_optimality_gap) {
                    (Some(x), Some(y)) => close(x, y),
                    (None, None) => true,
                    _ => false,
                };
                if a.method != b.method
                    || !close(a.feasibility_best, b.feasibility_best)
                    || !close(a.optimality_best, b.optimality_best)
                    || !close(a.mean_feasibility_rate, b.mean_feasibility_rate)
                    || !close(a.mean_optimality_rate, b.mean_optimality_rate)
                    || !gaps_match
                {
                    problems.push(format!("report row {} does not match the results", b.method));
                }
            }
            check_report_invariants(&recomputed, &mut problems);
        }
        (Ok(recomputed), None) => check_report_invariants(&recomputed, &mut problems),
        (Err(e), _) => problems.push(format!("cannot aggregate results: {e}")),
    }
    AuditReport {
        rows_checked: results.len(),
        problems,
    }
}

fn check_report_invariants(report: &ExperimentReport, problems: &mut Vec<String>) {
    for r in &report.rows {
        let unit = [
            r.feasibility_best,
            r.optimality_best,
            r.mean_feasibility_rate,
            r.mean_optimality_rate,
        ];
        if unit.iter().any(|v| !(0.0..=1.0).contains(v)) {
            problems.push(format!("{}: rate outside [0, 1]", r.method));
        }
        if r.feasibility_best + AUDIT_TOL < r.mean_feasibility_rate {
            problems.push(format!("{}: best-of-trials feasibility below mean rate", r.method));
        }
        if r.optimality_best + AUDIT_TOL < r.mean_optimality_rate {
            problems.push(format!("{}: best-of-trials optimality below mean rate", r.method));
        }
        if r.mean_optimality_rate > r.mean_feasibility_rate + AUDIT_TOL {
            problems.push(format!("{}: optimality rate above feasibility rate", r.method));
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn row(instance: &str, method: &str, trial: usize, feasible: bool, optimal: bool, gap: f64) -> TrialResult {
        TrialResult {
            instance_id: instance.into(),
            method: method.into(),
            trial,
            seed: trial as u64,
            bitstring: "01".into(),
            mkp_objective: if optimal { 4 } else { 3 },
            feasible,
            optimal,
            qubo_objective: -5.0 * (1.0 - gap),
            opt_gap: Some(gap),
            opt_gap_mkp: Some(if optimal { 0.0 } else { 0.25 }),
            final_energy: 0.0,
            steps: 1,
            runtime_ms: 0,
        }
    }

    #[test]
    fn rate_examples() {
        let flags = [true, true, false, true, false];
        let rs: Vec<_> = flags.iter().enumerate().map(|(t, &f)| row("a", "hea", t, f, false, 0.0)).collect();
        assert!((feasibility_rate(&rs).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(optimality_rate(&rs).unwrap(), 0.0);
        let opt = [true, false, false, false, true];
        let rs: Vec<_> = opt.iter().enumerate().map(|(t, &o)| row("a", "hea", t, true, o, 0.0)).collect();
        assert!((optimality_rate(&rs).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(feasibility_rate(&rs).unwrap(), 1.0);
        assert!(feasibility_rate(&[]).is_err());
        assert!(mean_optimality_gap(&[]).is_err());
    }

    #[test]
    fn gap_examples() {
        let mut r = row("a", "hea", 0, true, false, 0.0);
        r.qubo_objective = -4.0;
        r.opt_gap = Some(1.0 - -4.0 / -5.0);
        assert!((r.opt_gap.unwrap() - 0.2).abs() < 1e-15);
        r.opt_gap = Some(1.0 - 10.0 / -5.0);
        assert_eq!(mean_optimality_gap(&[r.clone()]).unwrap(), Some(3.0));
        r.opt_gap = None;
        assert_eq!(mean_optimality_gap(&[r]).unwrap(), None);
    }

    #[test]
    fn report_aggregates_per_instance() {
        let results = vec![
            row("a", "hea", 0, true, true, 0.0),
            row("a", "hea", 1, false, false, 2.0),
            row("b", "hea", 0, false, false, 1.0),
            row("b", "hea", 1, false, false, 3.0),
            row("a", "qite-ihva", 0, true, false, 0.5),
        ];
        let rep = ExperimentReport::from_results(&results).unwrap();
        assert_eq!(rep.rows[0].method, "qite-ihva");
        let hea = rep.row(Method::Hea).unwrap();
        assert_eq!(hea.feasibility_best, 0.5);
        assert_eq!(hea.optimality_best, 0.5);
        assert_eq!(hea.mean_feasibility_rate, 0.25);
        assert_eq!(hea.mean_optimality_rate, 0.25);
        assert_eq!(hea.mean_optimality_gap, Some(1.5));
        assert!(ExperimentReport::from_results(&[]).is_err());
        assert!(audit(&results, Some(&rep)).is_clean());
    }

    #[test]
    fn audit_flags_inconsistencies() {
        let mut bad = vec![row("a", "hea", 0, false, true, 0.0)];
        assert!(!audit(&bad, None).is_clean());
        bad[0].feasible = true;
        assert!(audit(&bad, None).is_clean());
        bad.push(row("a", "hea", 1, true, false, 0.5));
        bad[1].qubo_objective = -1.0;
        let a = audit(&bad, None);
        assert_eq!(a.problems.len(), 1, "{:?}", a.problems);
        let mut rep = ExperimentReport::from_results(&bad[..1]).unwrap();
        rep.rows[0].mean_feasibility_rate = 0.5;
        assert!(!audit(&bad[..1], Some(&rep)).is_clean());
    }
}
