//! Temporal diagnostics of (possibly sign-alternating) pulse envelopes.

use crate::error::{Error, Result};
use crate::system::{Channel, ControlField};

#[derive(Clone, Debug, PartialEq)]
pub struct PulseDiagnostics {
    pub channel: Channel,
    /// `int t E^2 dt / int E^2 dt` (fs).
    pub centroid: f64,
    /// Full width at half maximum of `E^2` around its peak (fs).
    pub fwhm: f64,
    /// `max |E|` (rad/fs).
    pub peak_amplitude: f64,
    pub peak_time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ordering {
    /// Stokes centroid before pump centroid.
    Counterintuitive,
    Intuitive,
}

impl Ordering {
    pub fn as_str(&self) -> &'static str {
        match self {
            Ordering::Counterintuitive => "counterintuitive",
            Ordering::Intuitive => "intuitive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseOrdering {
    pub pulses: Vec<PulseDiagnostics>,
    /// `None` when the field set lacks a pump or a Stokes channel.
    pub verdict: Option<Ordering>,
}

impl PulseOrdering {
    pub fn get(&self, channel: Channel) -> Option<&PulseDiagnostics> {
        self.pulses.iter().find(|p| p.channel == channel)
    }
}

pub fn diagnose(field: &ControlField) -> Result<PulseDiagnostics> {
    let grid = field.grid();
    let intensity: Vec<f64> = field.samples().iter().map(|e| e * e).collect();
    let weight = grid.integrate(&intensity);
    if weight.is_nan() || weight <= 0.0 {
        return Err(Error::DegenerateField(format!(
            "{} field is identically zero",
            field.label()
        )));
    }
    let moment: Vec<f64> = intensity
        .iter()
        .enumerate()
        .map(|(i, w)| grid.time(i) * w)
        .collect();
    let centroid = grid.integrate(&moment) / weight;

    let (ipk, peak) =
        intensity.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |a, (i, &v)| if v > a.1 { (i, v) } else { a },
        );
    let half = 0.5 * peak;
    let dt = grid.dt();
    let mut left = 0.0;
    let mut i = ipk;
    while i > 0 {
        if intensity[i - 1] < half {
            let frac = (intensity[i] - half) / (intensity[i] - intensity[i - 1]);
            left = grid.time(i) - frac * dt;
            break;
        }
        i -= 1;
    }
    let mut right = grid.t_end();
    let mut j = ipk;
    while j + 1 < intensity.len() {
        if intensity[j + 1] < half {
            let frac = (intensity[j] - half) / (intensity[j] - intensity[j + 1]);
            right = grid.time(j) + frac * dt;
            break;
        }
        j += 1;
    }
    Ok(PulseDiagnostics {
        channel: field.label(),
        centroid,
        fwhm: right - left,
        peak_amplitude: peak.sqrt(),
        peak_time: grid.time(ipk),
    })
}

/// Per-channel diagnostics plus the pump/Stokes ordering verdict.
pub fn pulse_ordering(fields: &[ControlField]) -> Result<PulseOrdering> {
    let pulses = fields.iter().map(diagnose).collect::<Result<Vec<_>>>()?;
    let centroid = |c| {
        pulses
            .iter()
            .find(|p: &&PulseDiagnostics| p.channel == c)
            .map(|p| p.centroid)
    };
    let verdict = match (centroid(Channel::Stokes), centroid(Channel::Pump)) {
        (Some(s), Some(p)) if s < p => Some(Ordering::Counterintuitive),
        (Some(_), Some(_)) => Some(Ordering::Intuitive),
        _ => None,
    };
    Ok(PulseOrdering { pulses, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stirap::{make_stirap_fields, StirapParams};
    use crate::system::TimeGrid;

    fn stirap() -> Vec<ControlField> {
        let p = StirapParams::new(0.5, 12.0, 24.0, 100.0).unwrap();
        let (pump, stokes) = make_stirap_fields(&p, TimeGrid::new(100.0, 2000).unwrap()).unwrap();
        vec![pump, stokes]
    }

    #[test]
    fn stirap_pair_is_counterintuitive() {
        let o = pulse_ordering(&stirap()).unwrap();
        assert_eq!(o.verdict, Some(Ordering::Counterintuitive));
        let s = o.get(Channel::Stokes).unwrap();
        let p = o.get(Channel::Pump).unwrap();
        assert!((s.centroid - 38.0).abs() < 1e-3);
        assert!((p.centroid - 62.0).abs() < 1e-3);
        // FWHM of a squared Gaussian: 2 sigma sqrt(ln 2)
        let expect = 2.0 * 12.0 * 2f64.ln().sqrt();
        assert!((s.fwhm - expect).abs() < 1e-3, "{}", s.fwhm);
        assert!((p.peak_amplitude - 0.5).abs() < 1e-12);
        assert_eq!(p.peak_time, 62.0);
    }

    #[test]
    fn swapping_channels_flips_verdict() {
        let f = stirap();
        let swapped = vec![
            ControlField::new(*f[0].grid(), f[1].samples().to_vec(), Channel::Pump).unwrap(),
            ControlField::new(*f[0].grid(), f[0].samples().to_vec(), Channel::Stokes).unwrap(),
        ];
        assert_eq!(
            pulse_ordering(&swapped).unwrap().verdict,
            Some(Ordering::Intuitive)
        );
    }

    #[test]
    fn sign_of_field_is_ignored() {
        let f = stirap();
        let flipped: Vec<_> = f.iter().map(|x| x.map(|_, v| -v)).collect();
        assert_eq!(
            pulse_ordering(&f).unwrap(),
            pulse_ordering(&flipped).unwrap()
        );
    }

    #[test]
    fn zero_field_is_rejected() {
        let grid = TimeGrid::new(100.0, 100).unwrap();
        let f = vec![ControlField::zeros(grid, Channel::Pump)];
        assert!(matches!(pulse_ordering(&f), Err(Error::DegenerateField(_))));
    }
}
