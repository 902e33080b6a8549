//! Shared oracles for the integration tests. Everything here is kept
//! independent of the implementation paths it checks.

/// Romberg quadrature with up to 2^max_level panels.
pub fn romberg(f: &dyn Fn(f64) -> f64, a: f64, b: f64, max_level: usize, tol: f64) -> f64 {
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut h = b - a;
    let mut sum = 0.5 * (f(a) + f(b));
    table.push(vec![sum * h]);
    for level in 1..=max_level {
        let n_new = 1usize << (level - 1);
        let mut add = 0.0;
        for i in 0..n_new {
            let x = a + h * (i as f64 + 0.5);
            add += f(x);
        }
        sum += add;
        h *= 0.5;
        let mut row = vec![sum * h];
        let prev = &table[level - 1];
        for k in 1..=level {
            let factor = (4.0f64).powi(k as i32);
            let v = (factor * row[k - 1] - prev[k - 1]) / (factor - 1.0);
            row.push(v);
        }
        if level > 3 {
            let best = *row.last().unwrap();
            let prev_best = *prev.last().unwrap();
            if (best - prev_best).abs() <= tol * (1.0 + best.abs()) {
                return best;
            }
        }
        table.push(row);
    }
    *table.last().unwrap().last().unwrap()
}

#[allow(dead_code)]
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
