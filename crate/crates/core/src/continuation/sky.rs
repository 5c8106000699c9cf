//! Sky-catastrophe verdicts and Fuller-index invariance along families.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::track::{continue_orbit, ContinuationControls, OrbitTrack, TrackStatus};
use super::HomotopyFamily;
use crate::error::{Error, Result};
use crate::index::{fuller_index, rational_json, IndexControls, IndexRecord, Rational};
use crate::orbit::{orbit_space_distance, OrbitString, DEFAULT_TOL_MATCH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkyVerdict {
    None,
    /// Escape when moving from `t = 0` towards `t = 1`.
    Right,
    /// Escape when moving from `t = 1` towards `t = 0`.
    Left,
    /// The track stalled, or the re-run disagreed with the first run.
    Indeterminate,
}

/// Summary of one continuation run used as evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkyEvidence {
    pub window: f64,
    pub period_cap: f64,
    /// Track status, or `"stall"`.
    pub status: String,
    pub last_t: f64,
    pub max_excursion: f64,
    pub max_period: f64,
    /// Excursion or period grows monotonically over the last nodes.
    pub monotone_growth: bool,
    pub nodes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkyReport {
    pub verdict: SkyVerdict,
    pub indeterminate: bool,
    /// First run, then the run at doubled window and cap when one was made.
    pub evidence: Vec<SkyEvidence>,
    pub track: Option<OrbitTrack>,
}

/// Number of trailing nodes inspected for monotone growth.
const TREND_NODES: usize = 8;

fn monotone_tail(v: &[f64]) -> bool {
    let tail = &v[v.len().saturating_sub(TREND_NODES)..];
    tail.len() >= 2 && tail.windows(2).all(|w| w[1] > w[0])
}

fn evidence(track: &OrbitTrack) -> SkyEvidence {
    let exc = track.excursion_profile();
    let per: Vec<f64> = track.period_profile.iter().map(|p| p.1).collect();
    SkyEvidence {
        window: track.window,
        period_cap: track.period_cap,
        status: track.status.as_str().into(),
        last_t: track.last().t,
        max_excursion: exc.iter().copied().fold(0.0, f64::max),
        max_period: per.iter().copied().fold(0.0, f64::max),
        monotone_growth: match track.status {
            TrackStatus::EscapedWindow => monotone_tail(&exc),
            TrackStatus::PeriodCapHit => monotone_tail(&per),
            _ => false,
        },
        nodes: track.nodes.len(),
    }
}

fn stall_evidence(c: &ContinuationControls, t: f64) -> SkyEvidence {
    SkyEvidence {
        window: c.window,
        period_cap: c.period_cap,
        status: "stall".into(),
        last_t: t,
        max_excursion: f64::NAN,
        max_period: f64::NAN,
        monotone_growth: false,
        nodes: 0,
    }
}

fn diverged(s: TrackStatus) -> bool {
    matches!(s, TrackStatus::EscapedWindow | TrackStatus::PeriodCapHit)
}

/// Continues `start` from `from` and classifies the outcome. An escape counts
/// as a catastrophe only if a re-run with doubled window and period cap
/// escapes again with monotone growth.
pub fn detect_sky_catastrophe(
    family: &HomotopyFamily,
    start: &crate::orbit::ClosedOrbit,
    from: f64,
    c: &ContinuationControls,
) -> Result<SkyReport> {
    let first = match continue_orbit(family, start, from, c) {
        Ok(t) => t,
        Err(Error::Stall { t, .. }) => {
            return Ok(SkyReport {
                verdict: SkyVerdict::Indeterminate,
                indeterminate: true,
                evidence: vec![stall_evidence(c, t)],
                track: None,
            })
        }
        Err(e) => return Err(e),
    };
    let ev1 = evidence(&first);
    if !diverged(first.status) {
        return Ok(SkyReport { verdict: SkyVerdict::None, indeterminate: false, evidence: vec![ev1], track: Some(first) });
    }
    let wide = ContinuationControls { window: 2.0 * c.window, period_cap: 2.0 * c.period_cap, ..c.clone() };
    let (verdict, ev2) = match continue_orbit(family, start, from, &wide) {
        Ok(second) => {
            let ev2 = evidence(&second);
            let v = if diverged(second.status) && ev1.monotone_growth && ev2.monotone_growth {
                if from == 0.0 {
                    SkyVerdict::Right
                } else {
                    SkyVerdict::Left
                }
            } else if matches!(second.status, TrackStatus::ReachedT1 | TrackStatus::FoldTurnback) {
                SkyVerdict::None
            } else {
                SkyVerdict::Indeterminate
            };
            (v, ev2)
        }
        Err(Error::Stall { t, .. }) => (SkyVerdict::Indeterminate, stall_evidence(&wide, t)),
        Err(e) => return Err(e),
    };
    Ok(SkyReport {
        verdict,
        indeterminate: verdict == SkyVerdict::Indeterminate,
        evidence: vec![ev1, ev2],
        track: Some(first),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    #[serde(with = "rational_json")]
    pub i0: Rational,
    #[serde(with = "rational_json")]
    pub i1: Rational,
    pub equal: bool,
    pub tracks: Vec<OrbitTrack>,
    pub records_t0: Vec<IndexRecord>,
    pub records_t1: Vec<IndexRecord>,
    /// Smallest distance between distinct tracks at comparable parameters.
    pub min_track_separation: Option<f64>,
}

/// Nearest node of `b` in parameter, if within `dt`.
fn node_near(b: &OrbitTrack, t: f64, dt: f64) -> Option<&super::TrackNode> {
    b.nodes
        .iter()
        .min_by(|x, y| (x.t - t).abs().total_cmp(&(y.t - t).abs()))
        .filter(|n| (n.t - t).abs() <= dt)
}

fn as_string(o: &crate::orbit::ClosedOrbit, m: u32) -> OrbitString {
    OrbitString { representative: o.clone(), multiplicity: m, simple_period: o.period / m as f64 }
}

/// Continues every string of `n0` from `t = 0` to `t = 1` and compares the
/// Fuller index of the start set with that of the tracked end set.
pub fn fuller_invariance_check(
    family: &HomotopyFamily,
    n0: &[OrbitString],
    c: &ContinuationControls,
    ic: &IndexControls,
) -> Result<InvarianceReport> {
    let tracks: Vec<Result<OrbitTrack>> =
        n0.par_iter().map(|s| continue_orbit(family, &s.representative, 0.0, c)).collect();
    let mut ok = Vec::with_capacity(tracks.len());
    for (i, tr) in tracks.into_iter().enumerate() {
        match tr {
            Ok(tr) if tr.status == TrackStatus::ReachedT1 => ok.push(tr),
            Ok(tr) => return Err(Error::InvarianceNotApplicable { track: i, status: tr.status.as_str().into() }),
            Err(Error::Stall { .. }) => return Err(Error::InvarianceNotApplicable { track: i, status: "stall".into() }),
            Err(e) => return Err(e),
        }
    }

    let tol = DEFAULT_TOL_MATCH;
    let mut min_sep: Option<f64> = None;
    for i in 0..ok.len() {
        for j in i + 1..ok.len() {
            for node in &ok[i].nodes {
                let Some(other) = node_near(&ok[j], node.t, 1e-2) else { continue };
                // nearby parameters: compare the loops as if on the same model
                let mut b = as_string(&other.orbit, n0[j].multiplicity);
                b.representative.system = node.orbit.system.clone();
                let d = orbit_space_distance(&as_string(&node.orbit, n0[i].multiplicity), &b)?;
                min_sep = Some(min_sep.map_or(d, |m: f64| m.min(d)));
                if d <= tol {
                    return Err(Error::InvarianceNotApplicable { track: j, status: "collision".into() });
                }
            }
        }
    }

    let m0 = family.model_at(0.0)?;
    let m1 = family.model_at(1.0)?;
    let records_t0: Vec<IndexRecord> = n0.par_iter().map(|s| m0.index_record(s, ic)).collect::<Result<_>>()?;
    let records_t1: Vec<IndexRecord> = ok
        .par_iter()
        .zip(n0)
        .map(|(tr, s)| m1.index_record(&as_string(&tr.last().orbit, s.multiplicity), ic))
        .collect::<Result<_>>()?;
    let i0 = fuller_index(&records_t0)?;
    let i1 = fuller_index(&records_t1)?;
    Ok(InvarianceReport {
        i0,
        i1,
        equal: i0 == i1,
        tracks: ok,
        records_t0,
        records_t1,
        min_track_separation: min_sep,
    })
}
