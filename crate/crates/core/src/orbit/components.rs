//! Grouping of orbit strings into Morse–Bott components.
//!
//! Two degenerate strings of equal period are linked when the pointwise
//! midpoint of their aligned loops is itself a closed orbit within tolerance,
//! which is how members of a smooth family behave. A linked component with at
//! least [`MIN_CIRCLE_MEMBERS`] members whose nearest-neighbour chain closes
//! up is tagged as a circle.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flow::FlowSystem;
use crate::orbit::loops::TrigLoop;
use crate::orbit::{orbit_distance_with_shift, ClosedOrbit, OrbitString};

pub const MIN_CIRCLE_MEMBERS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Point,
    Circle,
    /// A linked family that does not close up into a ring.
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// Indices into the report's string list.
    pub members: Vec<usize>,
    pub topology: Topology,
    /// Orbit-space distance to the nearest string outside the component.
    pub isolation_radius: Option<f64>,
    pub degenerate: bool,
}

/// Pointwise midpoint of `b` and `a` aligned to `b`, as a closed orbit.
fn midpoint(a: &ClosedOrbit, b: &ClosedOrbit) -> Result<ClosedOrbit> {
    let (_, s) = orbit_distance_with_shift(a, b)?;
    let aligned = TrigLoop::new(&a.samples, &a.lift_shift()).shifted_samples(s);
    let mut m = b.clone();
    for (mp, ap) in m.samples.iter_mut().zip(&aligned) {
        for c in 0..mp.len() {
            let mut d = ap[c] - mp[c];
            if b.periodic[c] {
                d -= d.round();
            }
            mp[c] += 0.5 * d;
        }
    }
    m.period = 0.5 * (a.period + b.period);
    Ok(m)
}

fn constraint_defect(sys: &dyn FlowSystem, o: &ClosedOrbit) -> f64 {
    o.samples
        .iter()
        .flat_map(|p| sys.constraints(p).into_iter().map(|(v, _)| v.abs()))
        .fold(0.0, f64::max)
}

fn linked(sys: &dyn FlowSystem, a: &OrbitString, b: &OrbitString, tol_orbit: f64, tol_match: f64) -> Result<bool> {
    let (ra, rb) = (&a.representative, &b.representative);
    if a.multiplicity != b.multiplicity || (ra.period - rb.period).abs() > 10.0 * tol_orbit * ra.period.max(1.0) {
        return Ok(false);
    }
    let m = midpoint(ra, rb)?;
    let res = m.compute_flow_residual(sys)?.max(constraint_defect(sys, &m));
    Ok(res < tol_match)
}

/// Nearest-neighbour ring test: walking from member 0 to the nearest unvisited
/// member visits everything and the closing step is no longer than twice the
/// longest step taken.
fn closes_into_ring(dist: &[Vec<f64>], members: &[usize]) -> bool {
    let k = members.len();
    if k < MIN_CIRCLE_MEMBERS {
        return false;
    }
    let mut visited = vec![false; k];
    visited[0] = true;
    let mut cur = 0;
    let mut longest: f64 = 0.0;
    for _ in 1..k {
        let next = (0..k)
            .filter(|&j| !visited[j])
            .min_by(|&x, &y| dist[members[cur]][members[x]].total_cmp(&dist[members[cur]][members[y]]));
        let Some(next) = next else { return false };
        longest = longest.max(dist[members[cur]][members[next]]);
        visited[next] = true;
        cur = next;
    }
    dist[members[cur]][members[0]] <= 2.0 * longest
}

/// Groups strings into components. `degenerate[i]` comes from the monodromy of string `i`.
pub fn detect_components(
    sys: &dyn FlowSystem,
    strings: &[OrbitString],
    degenerate: &[bool],
    tol_orbit: f64,
    tol_match: f64,
) -> Result<Vec<Component>> {
    let k = strings.len();
    let mut dist = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let d = orbit_distance_with_shift(&strings[i].representative, &strings[j].representative)?.0;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let n = p[c];
            p[c] = r;
            c = n;
        }
        r
    }
    for i in 0..k {
        for j in i + 1..k {
            if degenerate[i] && degenerate[j] && find(&mut parent, i) != find(&mut parent, j)
                && linked(sys, &strings[i], &strings[j], tol_orbit, tol_match)?
            {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; k];
    for i in 0..k {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    Ok(groups
        .into_iter()
        .map(|members| {
            let topology = if members.len() == 1 {
                Topology::Point
            } else if closes_into_ring(&dist, &members) {
                Topology::Circle
            } else {
                Topology::Unknown
            };
            let isolation_radius = (0..k)
                .filter(|j| !members.contains(j))
                .flat_map(|j| members.iter().map(move |&i| (i, j)))
                .map(|(i, j)| dist[i][j])
                .reduce(f64::min);
            let degenerate = members.iter().any(|&i| degenerate[i]);
            Component { members, topology, isolation_radius, degenerate }
        })
        .collect())
}

/// Minimum separation between members of distinct components.
pub fn min_component_separation(components: &[Component]) -> Option<f64> {
    components.iter().filter_map(|c| c.isolation_radius).reduce(f64::min)
}
