use crate::SimError;

/// Least-squares slope of `ln(switches)` against `ln(n)`.
///
/// Returns `(exponent, residual)` where the residual is the Euclidean norm of
/// the fit errors in log space. Two points are accepted (the fit is then
/// exact); fewer, or any non-positive coordinate, is an error.
pub fn fit_growth_exponent(points: &[(f64, f64)]) -> Result<(f64, f64), SimError> {
    if points.len() < 2 {
        return Err(SimError::Fit(format!("need at least 2 points, got {}", points.len())));
    }
    if let Some(&(n, t)) = points.iter().find(|&&(n, t)| !(n > 0.0 && t > 0.0)) {
        return Err(SimError::Fit(format!("non-positive point ({n}, {t})")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SimError::Fit("all n values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - icept - slope * x).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok((slope, residual))
}
