use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::SceneError;
use crate::scalar::Real;
use crate::stepper::{CommandSource, State};

const TIME_EPS: f64 = 1e-9;

/// Constant command over `[t_start, t_end)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub v: Vec<f64>,
}

/// Commanded manipulator velocity over time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CommandProfile {
    Piecewise { segments: Vec<Segment> },
    /// Every finger translates with `speed (cos(pi t / period), sin(pi t /
    /// period))`, tracing half a circle over one period. Only for fingers
    /// without an orientation coordinate; `m` is the manipulator dimension.
    Semicircle { speed: f64, period: f64, m: usize },
}

impl CommandProfile {
    pub fn constant(v: Vec<f64>, duration: f64) -> Self {
        CommandProfile::Piecewise {
            segments: vec![Segment {
                t_start: 0.0,
                t_end: duration,
                v,
            }],
        }
    }

    /// Consecutive segments `(duration, v)` starting at `t = 0`.
    pub fn phases(phases: &[(f64, Vec<f64>)]) -> Self {
        let mut t = 0.0;
        let segments = phases
            .iter()
            .map(|(d, v)| {
                let s = Segment {
                    t_start: t,
                    t_end: t + d,
                    v: v.clone(),
                };
                t += d;
                s
            })
            .collect();
        CommandProfile::Piecewise { segments }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            CommandProfile::Piecewise { segments } => segments.first().map(|s| s.v.len()),
            CommandProfile::Semicircle { m, .. } => Some(*m),
        }
    }

    pub fn validate(&self, m: usize, duration: f64) -> Result<(), SceneError> {
        let bad = |msg: String| Err(SceneError::Invalid(format!("commands: {msg}")));
        match self {
            CommandProfile::Piecewise { segments } => {
                let Some(first) = segments.first() else {
                    return bad("no segments".into());
                };
                if first.t_start.abs() > TIME_EPS {
                    return bad(format!("first segment starts at {} instead of 0", first.t_start));
                }
                for (i, s) in segments.iter().enumerate() {
                    if !(s.t_end > s.t_start) {
                        return bad(format!("segment {i} is empty or reversed"));
                    }
                    if s.v.len() != m {
                        return bad(format!("segment {i} has {} entries, expected {m}", s.v.len()));
                    }
                    if s.v.iter().any(|x| !x.is_finite()) {
                        return bad(format!("segment {i} is not finite"));
                    }
                    if let Some(next) = segments.get(i + 1) {
                        if (next.t_start - s.t_end).abs() > TIME_EPS {
                            return bad(format!("gap or overlap between segments {i} and {}", i + 1));
                        }
                    }
                }
                let end = segments.last().map_or(0.0, |s| s.t_end);
                if end < duration - TIME_EPS {
                    return bad(format!("segments end at {end}, before the duration {duration}"));
                }
            }
            CommandProfile::Semicircle { speed, period, m: pm } => {
                if *pm != m || m % 2 != 0 {
                    return bad(format!("semicircle dimension {pm} does not match {m} translational coordinates"));
                }
                if !(speed.is_finite() && period.is_finite() && *period > 0.0) {
                    return bad("semicircle needs a finite speed and a positive period".into());
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        match self {
            CommandProfile::Piecewise { segments } => segments
                .iter()
                .find(|s| t + TIME_EPS >= s.t_start && t + TIME_EPS < s.t_end)
                .or_else(|| segments.last().filter(|s| t <= s.t_end + TIME_EPS))
                .map_or_else(|| vec![0.0; self.dim().unwrap_or(0)], |s| s.v.clone()),
            CommandProfile::Semicircle { speed, period, m } => {
                let a = PI * t / period;
                let (s, c) = a.sin_cos();
                (0..*m).map(|i| if i % 2 == 0 { speed * c } else { speed * s }).collect()
            }
        }
    }

    /// Largest command norm over the profile, for sizing the activation
    /// distance.
    pub fn max_speed(&self) -> f64 {
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        match self {
            CommandProfile::Piecewise { segments } => segments.iter().map(|s| norm(&s.v)).fold(0.0, f64::max),
            CommandProfile::Semicircle { speed, m, .. } => speed.abs() * ((*m / 2) as f64).sqrt(),
        }
    }
}

impl<T: Real> CommandSource<T> for CommandProfile {
    fn command(&self, t: f64, _state: &State<T>) -> DVector<T> {
        let v = self.at(t);
        DVector::from_iterator(v.len(), v.into_iter().map(T::lit))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_lookup_and_validation() {
        let p = CommandProfile::phases(&[(1.0, vec![1.0, 0.0]), (2.0, vec![0.0, -1.0])]);
        p.validate(2, 3.0).unwrap();
        assert_eq!(p.at(0.0), vec![1.0, 0.0]);
        assert_eq!(p.at(0.999), vec![1.0, 0.0]);
        assert_eq!(p.at(1.0), vec![0.0, -1.0]);
        assert_eq!(p.at(3.0), vec![0.0, -1.0]);
        assert_eq!(p.at(5.0), vec![0.0, 0.0]);
        assert!(p.validate(3, 3.0).is_err());
        assert!(p.validate(2, 4.0).is_err());
    }

    #[test]
    fn rejects_gaps_and_overlaps() {
        let gap = CommandProfile::Piecewise {
            segments: vec![
                Segment {
                    t_start: 0.0,
                    t_end: 1.0,
                    v: vec![0.0],
                },
                Segment {
                    t_start: 1.5,
                    t_end: 2.0,
                    v: vec![0.0],
                },
            ],
        };
        assert!(gap.validate(1, 2.0).is_err());
        let late = CommandProfile::Piecewise {
            segments: vec![Segment {
                t_start: 0.5,
                t_end: 2.0,
                v: vec![0.0],
            }],
        };
        assert!(late.validate(1, 2.0).is_err());
    }

    #[test]
    fn semicircle_turns_half_way() {
        let p = CommandProfile::Semicircle {
            speed: 0.1,
            period: 10.0,
            m: 4,
        };
        p.validate(4, 10.0).unwrap();
        let v0 = p.at(0.0);
        assert_eq!(v0, vec![0.1, 0.0, 0.1, 0.0]);
        let v5 = p.at(5.0);
        assert!(v5[0].abs() < 1e-15 && (v5[1] - 0.1).abs() < 1e-15);
        let v10 = p.at(10.0);
        assert!((v10[0] + 0.1).abs() < 1e-15);
        assert!(p.validate(3, 10.0).is_err());
    }
}
