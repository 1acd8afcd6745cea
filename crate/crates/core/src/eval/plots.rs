use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

use super::bench::MethodResult;

/// Relative-error histogram: bins of this width up to [`ERROR_BIN_TOP`],
/// then one open bin.
pub const ERROR_BIN_WIDTH: f64 = 0.01;
pub const ERROR_BIN_TOP: f64 = 0.2;

/// `(lo, hi, count)` over relative errors of pairs with positive truth; the
/// last bin has `hi = inf`.
pub fn error_histogram(pairs: &[(f64, f64)]) -> Vec<(f64, f64, usize)> {
    let bins = (ERROR_BIN_TOP / ERROR_BIN_WIDTH).round() as usize;
    let mut counts = vec![0usize; bins + 1];
    for &(t, p) in pairs {
        if t > 0.0 {
            let e = (p - t).abs() / t;
            let i = (e / ERROR_BIN_WIDTH).floor();
            let i = if i.is_finite() { (i as usize).min(bins) } else { bins };
            counts[i] += 1;
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let lo = i as f64 * ERROR_BIN_WIDTH;
            let hi = if i == bins { f64::INFINITY } else { lo + ERROR_BIN_WIDTH };
            (lo, hi, c)
        })
        .collect()
}

/// Writes `error_histogram.csv`, `scatter.csv` and `timing.csv` into `dir`.
pub fn emit_plots(results: &[MethodResult], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut h = BufWriter::new(fs::File::create(dir.join("error_histogram.csv"))?);
    writeln!(h, "method,lo,hi,count")?;
    for r in results {
        for (lo, hi, c) in error_histogram(&r.pairs) {
            writeln!(h, "{},{lo},{hi},{c}", r.timing.method.label())?;
        }
    }
    h.flush()?;

    let mut s = BufWriter::new(fs::File::create(dir.join("scatter.csv"))?);
    writeln!(s, "method,truth,pred")?;
    for r in results {
        for (t, p) in &r.pairs {
            writeln!(s, "{},{t},{p}", r.timing.method.label())?;
        }
    }
    s.flush()?;

    let mut t = BufWriter::new(fs::File::create(dir.join("timing.csv"))?);
    writeln!(t, "method,train_s,load_s,run_median_s,path_median_s")?;
    for r in results {
        let x = &r.timing;
        writeln!(
            t,
            "{},{},{},{},{}",
            x.method.label(),
            x.train_s,
            x.load_s,
            x.run_median(),
            x.path_median()
        )?;
    }
    t.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_conserves_counts() {
        let pairs = [(1.0, 1.0), (1.0, 1.005), (2.0, 2.5), (0.0, 3.0), (1.0, 9.0), (1.0, f64::INFINITY)];
        let h = error_histogram(&pairs);
        assert_eq!(h.len(), 21);
        assert_eq!(h.iter().map(|b| b.2).sum::<usize>(), 5);
        assert_eq!(h[0].2, 2);
        assert_eq!(h[20].2, 3);
    }
}
