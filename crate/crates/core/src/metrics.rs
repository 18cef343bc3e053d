//! Error metrics over rounded distance predictions.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::sssp::Hops;

/// MAE of one true-distance class and its sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthStats {
    pub mae: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mae: f64,
    pub mre: f64,
    pub per_length: BTreeMap<Hops, LengthStats>,
    pub n_samples: usize,
}

/// MAE `mean |p − t|`, MRE `mean |p − t| / t`, and MAE grouped by `t`.
///
/// Every truth must be at least 2; one-hop pairs never reach evaluation.
pub fn evaluate(preds: &[u32], truths: &[Hops]) -> Result<EvalReport> {
    if preds.len() != truths.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} truths",
            preds.len(),
            truths.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::invalid("nothing to evaluate"));
    }
    if let Some(t) = truths.iter().find(|&&t| t < 2) {
        return Err(Error::invalid(format!("true distance {t} below 2")));
    }
    // Integer error sums keep the result independent of sample order.
    let mut abs_sum: u64 = 0;
    let mut groups: BTreeMap<Hops, (u64, usize)> = BTreeMap::new();
    for (&p, &t) in preds.iter().zip(truths) {
        let e = p.abs_diff(t) as u64;
        abs_sum += e;
        let g = groups.entry(t).or_insert((0, 0));
        g.0 += e;
        g.1 += 1;
    }
    let n = preds.len();
    let mre = groups
        .iter()
        .map(|(&t, &(e, _))| e as f64 / t as f64)
        .sum::<f64>()
        / n as f64;
    let per_length = groups
        .into_iter()
        .map(|(t, (e, c))| {
            (
                t,
                LengthStats {
                    mae: e as f64 / c as f64,
                    count: c,
                },
            )
        })
        .collect();
    Ok(EvalReport {
        mae: abs_sum as f64 / n as f64,
        mre,
        per_length,
        n_samples: n,
    })
}

impl EvalReport {
    /// CSV `length,mae,count`, ascending by length.
    pub fn write_per_length_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "length,mae,count")?;
        for (len, s) in &self.per_length {
            writeln!(w, "{len},{},{}", s.mae, s.count)?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV `metric,value` with `mae`, `mre` and `n_samples`.
    pub fn write_metrics_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "metric,value")?;
        writeln!(w, "mae,{}", self.mae)?;
        writeln!(w, "mre,{}", self.mre)?;
        writeln!(w, "n_samples,{}", self.n_samples)?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed() {
        let r = evaluate(&[2, 3], &[2, 4]).unwrap();
        assert_eq!(r.mae, 0.5);
        assert_eq!(r.mre, 0.125);
        assert_eq!(r.n_samples, 2);
        assert_eq!(r.per_length[&4], LengthStats { mae: 1.0, count: 1 });
    }

    #[test]
    fn perfect_predictions() {
        let r = evaluate(&[2, 5, 3], &[2, 5, 3]).unwrap();
        assert_eq!((r.mae, r.mre), (0.0, 0.0));
    }

    #[test]
    fn argument_errors() {
        assert!(evaluate(&[1], &[2, 3]).is_err());
        assert!(evaluate(&[], &[]).is_err());
        assert!(evaluate(&[1], &[1]).is_err());
    }

    #[test]
    fn csv_outputs() {
        let r = evaluate(&[3], &[2]).unwrap();
        let mut buf = Vec::new();
        r.write_per_length_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "length,mae,count\n2,1,1\n");
        let mut buf = Vec::new();
        r.write_metrics_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "metric,value\nmae,1\nmre,0.5\nn_samples,1\n");
    }
}
