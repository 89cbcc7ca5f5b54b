use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("cost table is empty")]
    Empty,
    #[error("method {method} has {got} costs, expected {want}")]
    Ragged { method: usize, got: usize, want: usize },
    #[error("cost {value} for method {method}, problem {problem} is not positive")]
    InvalidCost { method: usize, problem: usize, value: f64 },
    #[error("problem {0} was solved by no method")]
    DegenerateColumn(usize),
    #[error("no problem was solved by any method")]
    AllDegenerate,
}

/// Fraction of problems solved within each performance ratio, as a
/// right-continuous step function sampled at every breakpoint of the profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub method: String,
    /// `(τ, fraction)` pairs, τ increasing from 1.
    pub points: Vec<(f64, f64)>,
}

impl ProfileCurve {
    /// Fraction solved within ratio `tau`.
    pub fn at(&self, tau: f64) -> f64 {
        self.points.iter().take_while(|(t, _)| *t <= tau).last().map_or(0.0, |p| p.1)
    }

    /// Value for τ → ∞.
    pub fn solve_rate(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub curves: Vec<ProfileCurve>,
    /// Problems left out because no method solved them; each is reported as
    /// [`ProfileError::DegenerateColumn`].
    pub excluded: Vec<ProfileError>,
}

/// Performance profiles from `costs[method][problem]`, where an unsolved run
/// has infinite cost. Every curve is sampled on the common set of finite
/// ratios, so the CSV has one row per (method, breakpoint).
pub fn performance_profile(methods: &[String], costs: &[Vec<f64>]) -> Result<Profile, ProfileError> {
    let nm = costs.len();
    if nm == 0 || methods.len() != nm || costs[0].is_empty() {
        return Err(ProfileError::Empty);
    }
    let np = costs[0].len();
    for (i, row) in costs.iter().enumerate() {
        if row.len() != np {
            return Err(ProfileError::Ragged { method: i, got: row.len(), want: np });
        }
        for (j, &c) in row.iter().enumerate() {
            if !(c > 0.0) {
                return Err(ProfileError::InvalidCost { method: i, problem: j, value: c });
            }
        }
    }

    let mut excluded = vec![];
    let mut kept = vec![];
    for j in 0..np {
        let best = (0..nm).map(|i| costs[i][j]).fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            kept.push((j, best));
        } else {
            log::warn!("problem {j} was solved by no method; excluded from the profile");
            excluded.push(ProfileError::DegenerateColumn(j));
        }
    }
    if kept.is_empty() {
        return Err(ProfileError::AllDegenerate);
    }

    let ratios: Vec<Vec<f64>> = costs.iter().map(|row| kept.iter().map(|&(j, best)| row[j] / best).collect()).collect();
    let mut taus: Vec<f64> = ratios.iter().flatten().copied().filter(|r| r.is_finite()).collect();
    taus.push(1.0);
    taus.sort_by(f64::total_cmp);
    taus.dedup();

    let total = kept.len() as f64;
    let curves = methods
        .iter()
        .zip(&ratios)
        .map(|(name, r)| {
            let mut sorted = r.clone();
            sorted.sort_by(f64::total_cmp);
            let mut solved = 0;
            let points = taus
                .iter()
                .map(|&tau| {
                    while solved < sorted.len() && sorted[solved] <= tau {
                        solved += 1;
                    }
                    (tau, solved as f64 / total)
                })
                .collect();
            ProfileCurve { method: name.clone(), points }
        })
        .collect();
    Ok(Profile { curves, excluded })
}
