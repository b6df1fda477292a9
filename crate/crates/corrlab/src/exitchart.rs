//! Information-transfer chart built from iterative-attack traces:
//! per-round (intrinsic, extrinsic) mutual-information pairs, binned
//! over the unit interval and diagnosed against the diagonal.

use crate::attack2::RoundTrace;

/// One executed round of one trial: the mutual information with the
/// truth entering the round and leaving it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExitRecord {
    pub intrinsic: f64,
    pub extrinsic: f64,
    pub trial: u64,
    /// 1-based round index.
    pub round: u32,
}

/// Expands a trace into one record per executed round; the first
/// round's intrinsic value is the pre-attack mutual information.
pub fn trace_to_records(trace: &RoundTrace, trial: u64) -> Vec<ExitRecord> {
    let mut records = Vec::with_capacity(trace.rounds.len());
    let mut intrinsic = trace.initial_mi;
    for (i, round) in trace.rounds.iter().enumerate() {
        records.push(ExitRecord {
            intrinsic,
            extrinsic: round.mi,
            trial,
            round: (i + 1) as u32,
        });
        intrinsic = round.mi;
    }
    records
}

/// Equal-width binning of records by intrinsic value with per-bin
/// extrinsic means. Bin i covers [i/d, (i+1)/d), the last bin closed
/// above; empty bins are kept, not interpolated.
#[derive(Clone, Debug, PartialEq)]
pub struct ExitChart {
    d: usize,
    sums: Vec<f64>,
    counts: Vec<usize>,
    /// Largest first-round intrinsic value: trajectories never start
    /// above it, so higher bins are outside the reachable region.
    start_max: Option<f64>,
}

pub fn bin_records(records: &[ExitRecord], d: usize) -> ExitChart {
    assert!(d >= 1, "at least one bin");
    let mut sums = vec![0.0; d];
    let mut counts = vec![0usize; d];
    let mut start_max: Option<f64> = None;
    for r in records {
        let bin = ((r.intrinsic * d as f64) as usize).min(d - 1);
        sums[bin] += r.extrinsic;
        counts[bin] += 1;
        if r.round == 1 && start_max.is_none_or(|m| r.intrinsic > m) {
            start_max = Some(r.intrinsic);
        }
    }
    ExitChart {
        d,
        sums,
        counts,
        start_max,
    }
}

impl ExitChart {
    pub fn bins(&self) -> usize {
        self.d
    }

    pub fn center(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) / self.d as f64
    }

    pub fn count(&self, bin: usize) -> usize {
        self.counts[bin]
    }

    pub fn mean_extrinsic(&self, bin: usize) -> Option<f64> {
        (self.counts[bin] > 0).then(|| self.sums[bin] / self.counts[bin] as f64)
    }

    pub fn occupied(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn total_records(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn start_max(&self) -> Option<f64> {
        self.start_max
    }

    /// Per-bin clearance above the diagonal (mean extrinsic minus bin
    /// center); None for empty bins.
    pub fn gaps(&self) -> Vec<Option<f64>> {
        (0..self.d)
            .map(|b| self.mean_extrinsic(b).map(|m| m - self.center(b)))
            .collect()
    }

    /// One row per bin; empty bins keep their center and a zero count
    /// with the mean field left blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_center,mean_extrinsic,count\n");
        for b in 0..self.d {
            let mean = self
                .mean_extrinsic(b)
                .map_or(String::new(), |m| format!("{m}"));
            out.push_str(&format!("{},{},{}\n", self.center(b), mean, self.counts[b]));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Every reachable occupied bin has mean extrinsic above its
    /// center: the transfer curve clears the diagonal.
    OpenGap,
    /// Lowest reachable occupied bin whose mean extrinsic does not
    /// exceed its center.
    Crossover(usize),
    InsufficientData,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::OpenGap => "open_gap",
            Verdict::Crossover(_) => "crossover",
            Verdict::InsufficientData => "insufficient_data",
        }
    }

    pub fn crossover_bin(self) -> Option<usize> {
        match self {
            Verdict::Crossover(b) => Some(b),
            _ => None,
        }
    }
}

/// Scans occupied bins from low intrinsic upward, ignoring bins whose
/// center lies above the largest starting intrinsic value (no
/// trajectory begins there). The first bin at or below the diagonal
/// decides a crossover; none means an open gap.
pub fn gap_report(chart: &ExitChart, min_occupied: usize) -> Verdict {
    if chart.occupied() < min_occupied {
        return Verdict::InsufficientData;
    }
    for b in 0..chart.bins() {
        let Some(mean) = chart.mean_extrinsic(b) else {
            continue;
        };
        let center = chart.center(b);
        if chart.start_max().is_none_or(|m| center > m) {
            continue;
        }
        if mean <= center {
            return Verdict::Crossover(b);
        }
    }
    Verdict::OpenGap
}
