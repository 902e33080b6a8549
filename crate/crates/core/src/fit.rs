//! Least-squares line fits used by the decay-rate diagnostics.

/// Ordinary least squares y ~ intercept + slope * x.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the fit residuals.
    pub rms: f64,
    pub n: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (intercept + slope * x);
        ss += r * r;
    }
    Some(LineFit {
        slope,
        intercept,
        rms: (ss / nf).sqrt(),
        n,
    })
}

/// Exponential decay fit q(t) ~ amplitude * exp(-rate * t) through a
/// log-linear least squares on the strictly positive samples.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    /// RMS residual in log space.
    pub log_rms: f64,
    pub n: usize,
}

pub fn fit_decay(ts: &[f64], qs: &[f64]) -> Option<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, q) in ts.iter().zip(qs) {
        if *q > 0.0 && q.is_finite() {
            xs.push(*t);
            ys.push(q.ln());
        }
    }
    let lf = fit_line(&xs, &ys)?;
    Some(DecayFit {
        rate: -lf.slope,
        amplitude: lf.intercept.exp(),
        log_rms: lf.rms,
        n: lf.n,
    })
}
