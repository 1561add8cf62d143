use super::{LinkKind, LinkPhysics};
use crate::error::{invalid, Result};
use crate::numeric::{
    integrate, integrate_to_infinity, ln_bessel_k, ln_gamma, regularized_gamma_lower, regularized_gamma_upper,
    Tolerance,
};

const TOL: Tolerance = Tolerance { abs: 1e-14, rel: 1e-11 };

/// Chi-square pointing-gain density with `n` degrees of freedom and scale
/// `omega`, i.e. a Gamma(n/2, omega) law.
pub fn pointing_pdf(z: f64, n: u32, omega: f64) -> f64 {
    if z < 0.0 {
        return 0.0;
    }
    let k = f64::from(n) / 2.0;
    if z == 0.0 {
        return match k.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => 1.0 / omega,
            _ => 0.0,
        };
    }
    ((k - 1.0) * z.ln() - z / omega - k * omega.ln() - ln_gamma(k)).exp()
}

/// Probability that the pointing gain is below `z`.
pub fn pointing_cdf(z: f64, n: u32, omega: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if n == 2 {
        return -(-z / omega).exp_m1();
    }
    regularized_gamma_lower(f64::from(n) / 2.0, z / omega)
}

fn pointing_survival(z: f64, n: u32, omega: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if n == 2 {
        return (-z / omega).exp();
    }
    regularized_gamma_upper(f64::from(n) / 2.0, z / omega)
}

fn check_shapes(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(invalid("gamma-gamma shape parameters must be positive"));
    }
    Ok(())
}

/// Gamma-gamma turbulence density with unit mean:
/// `2 (ab)^((a+b)/2) / (G(a) G(b)) y^((a+b)/2 - 1) K_(a-b)(2 sqrt(ab y))`.
pub fn turbulence_pdf(y: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_shapes(alpha, beta)?;
    if !(y > 0.0) {
        return Ok(0.0);
    }
    let ab = alpha * beta;
    let half = 0.5 * (alpha + beta);
    let log = std::f64::consts::LN_2 + half * ab.ln() - ln_gamma(alpha) - ln_gamma(beta)
        + (half - 1.0) * y.ln()
        + ln_bessel_k(alpha - beta, 2.0 * (ab * y).sqrt())?;
    Ok(log.exp())
}

/// Distribution function of the gamma-gamma law, by quadrature.
pub fn turbulence_cdf(y: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_shapes(alpha, beta)?;
    if y <= 0.0 {
        return Ok(0.0);
    }
    let mut err = None;
    let v = integrate(
        |s| match turbulence_pdf(s, alpha, beta) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        0.0,
        y,
        TOL,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v.min(1.0)),
    }
}

/// ISL outage by integrating the pointing density over `[0, eta]`.
pub fn outage_isl_by_quadrature(eta: f64, n: u32, omega: f64) -> Result<f64> {
    if eta <= 0.0 {
        return Ok(0.0);
    }
    let k = f64::from(n) / 2.0;
    if k < 1.0 {
        // Integrable singularity at the origin: substitute z = u^(1/k).
        let scale = (-ln_gamma(k) - k * omega.ln()).exp() / k;
        return integrate(|u| scale * (-u.powf(1.0 / k) / omega).exp(), 0.0, eta.powf(k), TOL);
    }
    integrate(|z| pointing_pdf(z, n, omega), 0.0, eta, TOL)
}

/// Outage probability of an inter-satellite link at distance `d`:
/// `P(h^2 < eta)`, `1 - exp(-eta / omega)` for two degrees of freedom.
pub fn outage_isl(d: f64, phys: &LinkPhysics) -> Result<f64> {
    let eta = phys.eta_threshold(d)?;
    if phys.chi_n == 2 {
        Ok(pointing_cdf(eta, 2, phys.omega))
    } else {
        outage_isl_by_quadrature(eta, phys.chi_n, phys.omega)
    }
}

pub(crate) fn isl_log_survival(eta: f64, phys: &LinkPhysics) -> f64 {
    if phys.chi_n == 2 {
        -eta / phys.omega
    } else {
        pointing_survival(eta, phys.chi_n, phys.omega).ln()
    }
}

fn downlink_integral(eta: f64, phys: &LinkPhysics, survival: bool) -> Result<f64> {
    check_shapes(phys.alpha_turb, phys.beta_turb)?;
    let (n, omega) = (phys.chi_n, phys.omega);
    let mut err = None;
    let mut integrand = |y: f64| {
        if y <= 0.0 {
            return 0.0;
        }
        let f = match turbulence_pdf(y, phys.alpha_turb, phys.beta_turb) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                return 0.0;
            }
        };
        if f == 0.0 {
            return 0.0;
        }
        let z = eta / y;
        f * if survival {
            pointing_survival(z, n, omega)
        } else {
            pointing_cdf(z, n, omega)
        }
    };
    // Octave breakpoints between 1 and eta keep the mass near y ~ 1 visible
    // to the adaptive rule when eta is far from 1.
    let mut cuts: Vec<f64> = vec![1.0];
    if eta > 0.0 && eta.is_finite() && eta != 1.0 {
        cuts.push(eta);
        let (lo, hi) = if eta < 1.0 { (eta, 1.0) } else { (1.0, eta) };
        let mut c = lo * 2.0;
        while c < hi {
            cuts.push(c);
            c *= 2.0;
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    let mut lo = 0.0;
    for &c in &cuts {
        total += integrate(&mut integrand, lo, c, TOL)?;
        lo = c;
    }
    total += integrate_to_infinity(&mut integrand, lo, TOL)?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Downlink outage `P(h^2 Y < eta)` for a given gain threshold.
pub fn outage_downlink_at(eta: f64, phys: &LinkPhysics) -> Result<f64> {
    if !(eta >= 0.0) {
        return Err(invalid("gain threshold must be non-negative"));
    }
    if eta == 0.0 {
        return Ok(0.0);
    }
    downlink_integral(eta, phys, false)
}

/// Downlink availability `P(h^2 Y >= eta)`, integrated directly so that
/// small values keep their relative precision.
pub fn survival_downlink_at(eta: f64, phys: &LinkPhysics) -> Result<f64> {
    if !(eta >= 0.0) {
        return Err(invalid("gain threshold must be non-negative"));
    }
    if eta == 0.0 {
        return Ok(1.0);
    }
    downlink_integral(eta, phys, true)
}

/// Outage probability of a downlink at distance `d`.
pub fn outage_downlink(d: f64, phys: &LinkPhysics) -> Result<f64> {
    outage_downlink_at(phys.eta_threshold(d)?, phys)
}

/// Availability of a downlink at distance `d`.
pub fn survival_downlink(d: f64, phys: &LinkPhysics) -> Result<f64> {
    survival_downlink_at(phys.eta_threshold(d)?, phys)
}

/// Link transmittance `(d/d_ref)^-gamma h^2 [Y]`; the turbulence factor
/// applies to downlinks only.
pub fn transmittance(d: f64, kind: LinkKind, pointing: f64, turbulence: f64, phys: &LinkPhysics) -> Result<f64> {
    if !(d > 0.0) {
        return Err(invalid("link distance must be positive"));
    }
    let base = (d / phys.reference_distance).powf(-phys.gamma) * pointing;
    Ok(match kind {
        LinkKind::Isl => base,
        LinkKind::Downlink => base * turbulence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phys() -> LinkPhysics {
        LinkPhysics::reference()
    }

    #[test]
    fn pointing_is_exponential_for_two_dof() {
        for z in [0.0, 0.5, 3.0] {
            assert!((pointing_pdf(z, 2, 1.7) - (-z / 1.7).exp() / 1.7).abs() < 1e-15);
        }
    }

    #[test]
    fn pointing_normalises_and_mean() {
        for (n, omega) in [(2, 1.0), (3, 0.5), (6, 2.0), (1, 1.3)] {
            let mass = outage_isl_by_quadrature(1e3, n, omega).unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "n={n}");
            let mean = integrate_to_infinity(|z| z * pointing_pdf(z, n, omega), 0.0, TOL).unwrap();
            assert!((mean - f64::from(n) * omega / 2.0).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn turbulence_normalises_with_unit_mean() {
        for (a, b) in [(2.1, 2.1), (4.0, 1.9), (1.2, 3.5)] {
            let mass = integrate_to_infinity(|y| turbulence_pdf(y, a, b).unwrap(), 0.0, TOL).unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "({a},{b}) mass {mass}");
            let mean = integrate_to_infinity(|y| y * turbulence_pdf(y, a, b).unwrap(), 0.0, TOL).unwrap();
            assert!((mean - 1.0).abs() < 1e-6, "({a},{b}) mean {mean}");
        }
        assert!(turbulence_pdf(1.0, 0.0, 1.0).is_err());
        assert!(turbulence_pdf(1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn isl_closed_form_values() {
        let p = phys();
        assert!((outage_isl(100_000.0, &p).unwrap() - (1.0 - (-0.55f64).exp())).abs() < 1e-15);
        assert_eq!(outage_isl_by_quadrature(0.0, 2, 1.0).unwrap(), 0.0);
        let at_omega = outage_isl_by_quadrature(1.0, 2, 1.0).unwrap();
        assert!((at_omega - 0.6321205588285577).abs() < 1e-12);
    }

    #[test]
    fn isl_quadrature_for_other_dof() {
        let mut p = phys();
        p.chi_n = 4;
        let eta = p.eta_threshold(100_000.0).unwrap();
        // Gamma(2, 1) CDF: 1 - e^-x (1 + x).
        let exact = 1.0 - (-eta).exp() * (1.0 + eta);
        assert!((outage_isl(100_000.0, &p).unwrap() - exact).abs() < 1e-10);
    }

    #[test]
    fn downlink_reference_values() {
        let p = phys();
        // Independent adaptive quadrature of the same double integral.
        for (eta, expected) in [
            (0.1, 0.21607087294569266),
            (0.55, 0.5821114936636544),
            (1.0, 0.7280107539686204),
        ] {
            let v = outage_downlink_at(eta, &p).unwrap();
            assert!((v - expected).abs() < 1e-8, "eta {eta}: {v}");
            let s = survival_downlink_at(eta, &p).unwrap();
            assert!((v + s - 1.0).abs() < 1e-9);
        }
        assert_eq!(outage_downlink_at(0.0, &p).unwrap(), 0.0);
        assert!(outage_downlink_at(1e6, &p).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn outages_monotone_in_distance() {
        let p = phys();
        let mut last = (0.0, 0.0);
        for k in 1..12 {
            let d = k as f64 * 25_000.0;
            let cur = (outage_isl(d, &p).unwrap(), outage_downlink(d, &p).unwrap());
            assert!(cur.0 >= last.0 && cur.1 >= last.1);
            last = cur;
        }
    }

    #[test]
    fn transmittance_forms() {
        let mut p = phys();
        assert_eq!(transmittance(1.0, LinkKind::Isl, 1.0, 7.0, &p).unwrap(), 1.0);
        let isl = transmittance(3e5, LinkKind::Isl, 0.8, 1.3, &p).unwrap();
        let dl = transmittance(3e5, LinkKind::Downlink, 0.8, 1.3, &p).unwrap();
        assert!((dl - isl * 1.3).abs() < 1e-25);
        p.reference_distance = 1000.0;
        let r = transmittance(2e6, LinkKind::Isl, 1.0, 1.0, &p).unwrap()
            / transmittance(1e6, LinkKind::Isl, 1.0, 1.0, &p).unwrap();
        assert!((r - 0.25).abs() < 1e-15);
        assert!(transmittance(0.0, LinkKind::Isl, 1.0, 1.0, &p).is_err());
    }
}
