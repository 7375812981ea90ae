//! Algebraic (Kåsa) least-squares circle fit.

use nalgebra::{Matrix3, Vector3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: (f64, f64),
    pub radius: f64,
    /// RMS of `‖p − c‖ − R` over the fitted points.
    pub rms: f64,
}

/// Fits `x² + y² + D x + E y + F = 0`. Returns `None` for fewer than three
/// points or (near-)collinear data.
pub fn fit_circle(points: &[(f64, f64)]) -> Option<CircleFit> {
    let n = points.len();
    if n < 3 {
        return None;
    }
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(ax, ay), (x, y)| (ax + x, ay + y));
    let (mx, my) = (mx / n as f64, my / n as f64);
    let scale = (points
        .iter()
        .map(|(x, y)| (x - mx).powi(2) + (y - my).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }

    // Spread check on the scaled covariance: collinear points have one
    // vanishing principal direction.
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    let centred: Vec<(f64, f64)> = points
        .iter()
        .map(|(x, y)| ((x - mx) / scale, (y - my) / scale))
        .collect();
    for (u, v) in &centred {
        sxx += u * u;
        syy += v * v;
        sxy += u * v;
    }
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let disc = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    let lmin = 0.5 * (tr - disc).max(det.max(0.0) * 2.0 / (tr + disc));
    if lmin / tr < 1e-10 {
        return None;
    }

    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (u, v) in &centred {
        let row = Vector3::new(*u, *v, 1.0);
        normal += row * row.transpose();
        rhs -= row * (u * u + v * v);
    }
    let sol = normal.lu().solve(&rhs)?;
    let (cu, cv) = (-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = cu * cu + cv * cv - sol[2];
    if !(r2 > 0.0) || !r2.is_finite() {
        return None;
    }
    let radius_scaled = r2.sqrt();
    // A near-straight arc gives an enormous radius; treat it as degenerate.
    if radius_scaled > 1e6 {
        return None;
    }

    let center = (mx + cu * scale, my + cv * scale);
    let radius = radius_scaled * scale;
    let rms = (points
        .iter()
        .map(|(x, y)| ((x - center.0).hypot(y - center.1) - radius).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Some(CircleFit {
        center,
        radius,
        rms,
    })
}
