use std::io::Write;

/// CSV schema revision, bumped whenever columns change.
pub const SCHEMA_VERSION: u32 = 1;

pub const HEADER: &str =
    "experiment,n_tiers,lambda,m_ues,k_b,bw_ratio,series,metric,mean,std_err,realizations,flags";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub n_tiers: usize,
    pub lambda: f64,
    pub m_ues: usize,
    pub k_b: f64,
    pub bw_ratio: f64,
    pub series: String,
    pub metric: String,
    pub mean: f64,
    pub std_err: f64,
    pub realizations: usize,
    pub flags: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    /// `key=value` pairs written as `#` comment lines.
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn push_meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "{HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.experiment,
                r.n_tiers,
                r.lambda,
                r.m_ues,
                r.k_b,
                r.bw_ratio,
                r.series,
                r.metric,
                r.mean,
                r.std_err,
                r.realizations,
                r.flags
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    /// Rows matching a series and metric, in emission order.
    pub fn select<'a>(&'a self, series: &'a str, metric: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.series == series && r.metric == metric)
    }
}

/// Running mean and standard error over values reduced in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}
