//! Fluxoid quantization in the trapping ring.
//!
//! Cooling the ring through T_c with a prebias flux applied freezes in the
//! fluxoid number n that minimizes the ring's inductive energy. Below T_c, n
//! is fixed regardless of later changes of the applied field, and the
//! trapped fluxoid shifts the qubit's phase bias by n pi (mod 2pi).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{FLUX_QUANTUM, TWO_PI};
use crate::error::{Error, Result};
use crate::qubit::wrap_phase;

/// Ring inductances, henry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingParams {
    pub l_kinetic: f64,
    pub l_geometric: f64,
}

impl RingParams {
    pub fn new(l_kinetic: f64, l_geometric: f64) -> Result<Self> {
        let r = Self {
            l_kinetic,
            l_geometric,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_kinetic >= 0.0 && self.l_geometric >= 0.0) || !self.total().is_finite() {
            return Err(Error::invalid(format!(
                "ring inductances must be finite and >= 0, got L_k = {}, L_g = {}",
                self.l_kinetic, self.l_geometric
            )));
        }
        if self.total() <= 0.0 {
            return Err(Error::invalid("total ring inductance must be > 0"));
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.l_kinetic + self.l_geometric
    }
}

/// Coil current to prebias flux conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoilCalibration {
    /// Coil current producing one flux quantum in the ring, ampere.
    pub current_per_flux_quantum: f64,
    /// Flux threading the ring at zero coil current (stray field), in
    /// units of the flux quantum.
    #[serde(default)]
    pub flux_offset: f64,
}

impl CoilCalibration {
    pub fn new(current_per_flux_quantum: f64) -> Result<Self> {
        let c = Self {
            current_per_flux_quantum,
            flux_offset: 0.0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_offset(mut self, flux_offset: f64) -> Self {
        self.flux_offset = flux_offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.current_per_flux_quantum.is_finite() && self.current_per_flux_quantum > 0.0) {
            return Err(Error::invalid(format!(
                "current per flux quantum must be > 0, got {}",
                self.current_per_flux_quantum
            )));
        }
        if !self.flux_offset.is_finite() {
            return Err(Error::invalid("flux offset must be finite"));
        }
        Ok(())
    }
}

/// Outcome of the fluxoid-number selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrapSelection {
    pub n: i64,
    /// The prebias sat exactly on a half-integer; `n` came from the tie rule.
    pub tie: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapResult {
    pub n: i64,
    /// Ring supercurrent, ampere.
    pub i_s: f64,
    /// Inductive energy stored in the ring, joule.
    pub e_ring: f64,
    /// Phase offset n pi mod 2pi, radians.
    pub phi_trap: f64,
    /// Prebias flux at the transition, flux quanta.
    pub phi_prebias: f64,
    pub tie: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSample {
    /// Seconds.
    pub time: f64,
    /// Kelvin.
    pub temperature: f64,
    /// Ampere.
    pub coil_current: f64,
}

/// Temperature and coil-current trace of a trapping run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTimeline {
    pub samples: Vec<ProtocolSample>,
    /// Superconducting transition temperature of the ring, kelvin.
    pub t_c: f64,
}

impl ProtocolTimeline {
    pub fn new(samples: Vec<ProtocolSample>, t_c: f64) -> Result<Self> {
        let t = Self { samples, t_c };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_c.is_finite() && self.t_c > 0.0) {
            return Err(Error::invalid(format!("t_c must be > 0, got {}", self.t_c)));
        }
        if self.samples.is_empty() {
            return Err(Error::EmptyInput("protocol timeline"));
        }
        if self.samples.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(Error::Schema("timeline times must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationPoint {
    pub i_prebias: f64,
    pub phi_trap: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapStats {
    pub mean_deviation: f64,
    /// Population standard deviation.
    pub std_deviation: f64,
    pub per_point: Vec<DeviationPoint>,
}

/// Fluxoid number minimizing (n Phi0 - Phi_prebias)^2 / 2L, i.e. the integer
/// nearest to `phi_prebias` (in flux quanta). Exact half-integers go to the
/// candidate with smaller |n|, then to the negative one, and are flagged.
pub fn select_trapped_n(phi_prebias: f64, ring: &RingParams) -> TrapSelection {
    debug_assert!(ring.validate().is_ok());
    nearest_fluxoid(phi_prebias)
}

/// The selection of [`select_trapped_n`]; the ring inductance only scales
/// the energies and never changes the minimizer.
pub fn nearest_fluxoid(phi_prebias: f64) -> TrapSelection {
    let lower = phi_prebias.floor();
    let frac = phi_prebias - lower;
    if frac == 0.5 {
        let (a, b) = (lower as i64, lower as i64 + 1);
        let n = match a.abs().cmp(&b.abs()) {
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Equal => a.min(b),
        };
        TrapSelection { n, tie: true }
    } else {
        let n = if frac < 0.5 { lower } else { lower + 1.0 };
        TrapSelection {
            n: n as i64,
            tie: false,
        }
    }
}

/// Supercurrent (A) and stored energy (J) for fluxoid number `n` at
/// prebias `phi_prebias` flux quanta:
/// I_s = (n Phi0 - Phi_prebias) / (L_k + L_g), E = (L_k + L_g) I_s^2 / 2.
pub fn ring_state(n: i64, phi_prebias: f64, ring: &RingParams) -> Result<(f64, f64)> {
    ring.validate()?;
    let l = ring.total();
    let i_s = (n as f64 - phi_prebias) * FLUX_QUANTUM / l;
    Ok((i_s, 0.5 * l * i_s * i_s))
}

/// n pi reduced to [0, 2pi): 0 for even n, pi for odd n.
pub fn trap_phase(n: i64) -> f64 {
    if n.rem_euclid(2) == 1 {
        PI
    } else {
        0.0
    }
}

/// Prebias flux in flux quanta produced by coil current `i_prebias`.
pub fn current_to_prebias(i_prebias: f64, calib: &CoilCalibration) -> f64 {
    i_prebias / calib.current_per_flux_quantum + calib.flux_offset
}

/// Trap outcome for a known prebias flux.
pub fn trap_from_prebias(phi_prebias: f64, ring: &RingParams) -> Result<TrapResult> {
    ring.validate()?;
    let sel = select_trapped_n(phi_prebias, ring);
    let (i_s, e_ring) = ring_state(sel.n, phi_prebias, ring)?;
    Ok(TrapResult {
        n: sel.n,
        i_s,
        e_ring,
        phi_trap: trap_phase(sel.n),
        phi_prebias,
        tie: sel.tie,
    })
}

/// Coil current at the last downward crossing of T_c, linearly interpolated
/// across the bracketing samples, together with the crossing time.
pub fn last_downward_crossing(timeline: &ProtocolTimeline) -> Result<(f64, f64)> {
    timeline.validate()?;
    let t_c = timeline.t_c;
    let last = timeline.samples.last().expect("validated nonempty");
    if last.temperature >= t_c {
        return Err(Error::EndsNormal {
            temperature: last.temperature,
            t_c,
        });
    }
    timeline
        .samples
        .windows(2)
        .rev()
        .find(|w| w[0].temperature >= t_c && w[1].temperature < t_c)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let frac = (a.temperature - t_c) / (a.temperature - b.temperature);
            (
                a.coil_current + frac * (b.coil_current - a.coil_current),
                a.time + frac * (b.time - a.time),
            )
        })
        .ok_or(Error::NoCrossing { t_c })
}

/// Trap outcome of a cooldown: the fluxoid number is set by the coil
/// current at the last downward crossing of T_c and is unaffected by
/// anything after it.
pub fn simulate_protocol(
    timeline: &ProtocolTimeline,
    ring: &RingParams,
    calib: &CoilCalibration,
) -> Result<TrapResult> {
    calib.validate()?;
    let (current, _) = last_downward_crossing(timeline)?;
    trap_from_prebias(current_to_prebias(current, calib), ring)
}

/// Signed distance of `phi_trap` to the nearer ideal bias point 0 or pi,
/// in (-pi/2, pi/2].
pub fn deviation(phi_trap: f64) -> f64 {
    let phi = wrap_phase(phi_trap);
    if phi <= 0.5 * PI {
        phi
    } else if phi <= 1.5 * PI {
        phi - PI
    } else {
        phi - TWO_PI
    }
}

/// Per-point deviations with their mean and population standard deviation.
/// `points` are (i_prebias in A, phi_trap in rad).
pub fn deviation_stats(points: &[(f64, f64)]) -> Result<TrapStats> {
    if points.is_empty() {
        return Err(Error::EmptyInput("deviation list"));
    }
    let per_point: Vec<DeviationPoint> = points
        .iter()
        .map(|&(i_prebias, phi_trap)| DeviationPoint {
            i_prebias,
            phi_trap,
            delta: deviation(phi_trap),
        })
        .collect();
    let n = per_point.len() as f64;
    let mean = per_point.iter().map(|p| p.delta).sum::<f64>() / n;
    let var = per_point.iter().map(|p| (p.delta - mean).powi(2)).sum::<f64>() / n;
    Ok(TrapStats {
        mean_deviation: mean,
        std_deviation: var.sqrt(),
        per_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> RingParams {
        RingParams::new(0.7e-9, 0.3e-9).unwrap()
    }

    #[test]
    fn selection_examples() {
        let r = ring();
        assert_eq!(select_trapped_n(0.0, &r), TrapSelection { n: 0, tie: false });
        assert_eq!(select_trapped_n(500.0 / 540.0, &r).n, 1);
        assert_eq!(select_trapped_n(0.5, &r), TrapSelection { n: 0, tie: true });
        assert_eq!(select_trapped_n(-0.5, &r), TrapSelection { n: 0, tie: true });
        assert_eq!(select_trapped_n(1.5, &r), TrapSelection { n: 1, tie: true });
        assert_eq!(select_trapped_n(-1.5, &r), TrapSelection { n: -1, tie: true });
        assert_eq!(select_trapped_n(-0.7, &r).n, -1);
    }

    #[test]
    fn ring_state_examples() {
        let r = ring();
        assert_eq!(ring_state(0, 0.0, &r).unwrap(), (0.0, 0.0));
        assert_eq!(ring_state(1, 1.0, &r).unwrap(), (0.0, 0.0));
        let one_nh = RingParams::new(1e-9, 0.0).unwrap();
        let (i_s, e) = ring_state(1, 0.5, &one_nh).unwrap();
        // 0.5 * 2.067833848e-15 Wb / 1e-9 H
        assert!((i_s - 1.033_916_924e-6).abs() < 1e-15);
        assert!((e - 0.5 * 1e-9 * 1.033_916_924e-6f64.powi(2)).abs() < 1e-30);
        assert!((e - 5.345e-22).abs() < 1e-25);
        assert!(RingParams::new(0.0, 0.0).is_err());
        assert!(RingParams::new(-1e-9, 2e-9).is_err());
    }

    #[test]
    fn trap_phase_examples() {
        assert_eq!(trap_phase(0), 0.0);
        assert_eq!(trap_phase(1), PI);
        assert_eq!(trap_phase(2), 0.0);
        assert_eq!(trap_phase(-1), PI);
    }

    #[test]
    fn prebias_conversion() {
        let c = CoilCalibration::new(540e-9).unwrap();
        assert_eq!(current_to_prebias(540e-9, &c), 1.0);
        assert_eq!(current_to_prebias(0.0, &c), 0.0);
        assert!((current_to_prebias(270e-9, &c) - 0.5).abs() < 1e-15);
        assert!(CoilCalibration::new(0.0).is_err());
        let shifted = c.with_offset(0.25);
        assert!((current_to_prebias(270e-9, &shifted) - 0.75).abs() < 1e-15);
    }

    fn sample(time: f64, temperature: f64, coil_current: f64) -> ProtocolSample {
        ProtocolSample {
            time,
            temperature,
            coil_current,
        }
    }

    #[test]
    fn protocol_single_crossing() {
        let tl = ProtocolTimeline::new(
            vec![
                sample(0.0, 0.02, 0.0),
                sample(60.0, 7.0, 0.0),
                sample(120.0, 7.2, 500e-9),
                sample(180.0, 3.0, 500e-9),
                sample(240.0, 0.02, 500e-9),
                sample(300.0, 0.02, 0.0),
            ],
            5.6,
        )
        .unwrap();
        let res = simulate_protocol(&tl, &ring(), &CoilCalibration::new(540e-9).unwrap()).unwrap();
        assert_eq!(res.n, 1);
        assert_eq!(res.phi_trap, PI);
    }

    #[test]
    fn protocol_interpolates_current_across_crossing() {
        let tl = ProtocolTimeline::new(
            vec![
                sample(0.0, 6.0, 0.0),
                sample(1.0, 5.0, 1080e-9),
            ],
            5.5,
        )
        .unwrap();
        let (current, time) = last_downward_crossing(&tl).unwrap();
        assert!((current - 540e-9).abs() < 1e-18);
        assert!((time - 0.5).abs() < 1e-15);
    }

    #[test]
    fn protocol_errors() {
        let never_warm = ProtocolTimeline::new(
            vec![sample(0.0, 0.02, 0.0), sample(1.0, 0.02, 540e-9)],
            5.6,
        )
        .unwrap();
        assert!(matches!(
            simulate_protocol(&never_warm, &ring(), &CoilCalibration::new(540e-9).unwrap()),
            Err(Error::NoCrossing { .. })
        ));
        let ends_warm = ProtocolTimeline::new(
            vec![sample(0.0, 0.02, 0.0), sample(1.0, 8.0, 0.0)],
            5.6,
        )
        .unwrap();
        assert!(matches!(
            last_downward_crossing(&ends_warm),
            Err(Error::EndsNormal { .. })
        ));
        assert!(ProtocolTimeline::new(vec![sample(1.0, 1.0, 0.0), sample(1.0, 1.0, 0.0)], 5.6).is_err());
    }

    #[test]
    fn deviation_examples() {
        let d = deviation(TWO_PI * 0.50073);
        assert!((d - 0.004_586_7).abs() < 1e-6, "{d}");
        assert!((d - 0.00459).abs() < 5e-6);
        assert_eq!(deviation(0.0), 0.0);
        assert_eq!(deviation(PI), 0.0);
        assert!((deviation(TWO_PI - 0.01) + 0.01).abs() < 1e-12);
        assert_eq!(deviation(0.5 * PI), 0.5 * PI);
        assert!((deviation(1.5 * PI) - 0.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn stats_examples() {
        let s = deviation_stats(&[(500e-9, PI)]).unwrap();
        assert_eq!((s.mean_deviation, s.std_deviation), (0.0, 0.0));
        // dyadic offset keeps PI - a - PI exact
        let a = 2f64.powi(-10);
        let s = deviation_stats(&[(0.0, a), (600e-9, PI - a)]).unwrap();
        assert_eq!(s.mean_deviation, 0.0);
        assert_eq!(s.std_deviation, a);
        assert!(deviation_stats(&[]).is_err());
    }
}
