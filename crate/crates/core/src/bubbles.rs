//! Force-driven node placement. Nodes ("bubbles") repel when closer than
//! the local target spacing and attract mildly when slightly farther, so a
//! damped relaxation drives them toward a packing whose nearest-neighbor
//! distances match the size field. Population control then inserts nodes
//! into gaps and deletes crowded ones until the worst pairwise mismatch
//! stops improving.
//!
//! Mobility classes: domain corners are fixed, boundary nodes slide along
//! their loop (one arc-length coordinate), interior nodes move freely.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryLoop, DomainGeometry};
use crate::sizing::SizeField;
use crate::vec2::Vec2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const TAU: f64 = std::f64::consts::TAU;

/// Pair force magnitude as a function of the length ratio `w = l / target`.
/// Positive repels, negative attracts; the cubic has exact roots at `w = 1`
/// (equilibrium spacing) and `w = 1.5` (support edge), and is zero beyond.
pub fn interbubble_force(w: f64, k0: f64) -> Result<f64> {
    if !w.is_finite() || w < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "length ratio must be finite and nonnegative, got {w}"
        )));
    }
    Ok(force_raw(w, k0))
}

#[inline]
fn force_raw(w: f64, k0: f64) -> f64 {
    if w >= 1.5 {
        0.0
    } else {
        // All coefficients are dyadic, so both roots evaluate to exactly 0.
        k0 * (((1.25 * w - 2.375) * w) * w + 1.125)
    }
}

/// Pairwise overlap measure `1 - l / target`: positive when two nodes sit
/// closer than the target spacing, negative when farther, 0 at the target.
pub fn fusion_degree(l: f64, target: f64) -> f64 {
    1.0 - l / target
}

/// How a bubble is allowed to move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mobility {
    /// Pinned (domain corners).
    Fixed,
    /// Constrained to boundary loop `loop_idx` at arc length `s`.
    Slider { loop_idx: usize, s: f64 },
    /// Unconstrained interior node.
    Free,
}

#[derive(Debug, Clone, Copy)]
pub struct Bubble {
    pub pos: Vec2,
    pub vel: Vec2,
    pub mobility: Mobility,
}

/// Relaxation parameters. Damping and time step are derived per bubble from
/// the local spacing `d`: the local stiffness of a near-hexagonal packing is
/// about `3 k0 / d`, so `omega = sqrt(3 k0 / (m d))`, the step is
/// `dt_scale / omega`, and damping is `damping_factor * sqrt(3 m k0 / d)`
/// (0.7 of critical at the default 1.4). This keeps steps-to-settle
/// independent of the size level.
#[derive(Debug, Clone, Copy)]
pub struct InnerParams {
    pub k0: f64,
    pub mass: f64,
    pub damping_factor: f64,
    /// Target `omega * dt` per bubble.
    pub dt_scale: f64,
    /// Convergence threshold on the residual force, in units of `k0`.
    pub tol_force: f64,
    pub max_steps: usize,
}

impl Default for InnerParams {
    fn default() -> Self {
        InnerParams {
            k0: 1.0,
            mass: 1.0,
            damping_factor: 1.4,
            dt_scale: 0.5,
            tol_force: 1e-3,
            // Measured: a chaotically seeded start needs 1500-3500 steps to
            // bring the residual under 1e-3 (settling is local, so this
            // barely grows as the spacing shrinks); rounds that start near
            // equilibrium need far fewer. The cap only catches pathologies.
            max_steps: 6000,
        }
    }
}

impl InnerParams {
    fn validate(&self) -> Result<()> {
        let ok = self.k0 > 0.0
            && self.mass > 0.0
            && self.damping_factor >= 0.0
            && self.dt_scale > 0.0
            && self.tol_force > 0.0
            && [self.k0, self.mass, self.damping_factor, self.dt_scale, self.tol_force]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad relaxation parameters: {self:?}")))
        }
    }
}

/// Result of one relaxation run.
#[derive(Debug, Clone, Copy)]
pub struct InnerStats {
    pub steps: usize,
    pub converged: bool,
    /// Residual force (max over movable bubbles) at exit.
    pub max_force: f64,
    pub max_velocity: f64,
    /// Worst pairwise |overlap| at exit, over natural-neighbor pairs.
    pub epsilon: f64,
}

/// Population-control parameters.
///
/// `theta_del` acts on each bubble's mean overlap with its natural
/// neighbors, the isotropic crowding signal; its value is also the
/// compression level the thinning tolerates, so the population stalls near
/// `1 / (1 - theta_del)^2` times the ideal density. Keep it a few percent.
/// `theta_ins` acts on a bubble's single worst (most stretched) contact,
/// since voids stay local and never dominate a mean.
#[derive(Debug, Clone, Copy)]
pub struct OuterParams {
    pub inner: InnerParams,
    pub max_rounds: usize,
    /// Fraction of the population that may change per round.
    pub churn_frac: f64,
    /// Delete an interior bubble when its mean overlap exceeds this.
    pub theta_del: f64,
    /// Insert into a contact whose overlap falls below this (negative:
    /// the pair is stretched far beyond its target spacing).
    pub theta_ins: f64,
}

impl Default for OuterParams {
    fn default() -> Self {
        OuterParams {
            inner: InnerParams::default(),
            max_rounds: 20,
            churn_frac: 0.05,
            theta_del: 0.05,
            theta_ins: -0.45,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OuterStats {
    /// Relaxation rounds executed (length of `eps_history`).
    pub rounds: usize,
    /// Worst |overlap| after each round; entry 0 is before any adjustment.
    pub eps_history: Vec<f64>,
    /// Population and relaxation effort per round.
    pub populations: Vec<usize>,
    pub inner_steps: Vec<usize>,
    pub inner_converged: Vec<bool>,
    pub best_round: usize,
    pub best_epsilon: f64,
    pub n_inserted: usize,
    pub n_deleted: usize,
}

/// A population of bubbles over a domain with a size field.
pub struct BubbleSystem {
    geom: DomainGeometry,
    size: SizeField,
    pub bubbles: Vec<Bubble>,
    /// Neighbor-search cell size: 1.5 x the largest target spacing.
    cell: f64,
    steps_taken: u64,
}

impl BubbleSystem {
    /// Seeds bubbles for a domain: fixed corner bubbles, boundary sliders at
    /// equal quantiles of `integral(ds / d)` per boundary segment, and an
    /// interior population chosen by how the hexagonal lattice meets the
    /// boundary.
    ///
    /// A lattice of pitch d anchored at the bounding-box corner is the ideal
    /// packing; when its clipped edge lines up with the boundary ring (no
    /// void in the contact band exceeds [`FILL_CLEARANCE`] of the local
    /// spacing, and an intact lattice can never exceed its cell circumradius
    /// 0.577 d there) the jittered lattice itself is the seeding and the
    /// relaxed system stays a crystal. Anywhere the boundary cuts the
    /// lattice at an angle or curves, that band opens wider voids no local
    /// patch can heal, so the interior is instead seeded by saturated dart
    /// throwing at [`CHAOS_EXCLUSION`] spacing (which oversaturates the
    /// lattice density) and the population control is left to thin it to a
    /// boundary-adapted packing.
    pub fn initialize(geom: &DomainGeometry, size: &SizeField, seed: u64) -> Result<Self> {
        size.validate_positive(geom.bbox(), 64)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bubbles = Vec::new();

        for (li, lp) in geom.loops().iter().enumerate() {
            seed_loop(lp, li, size, &mut bubbles);
        }

        // Interior lattice: rows dy = sqrt(3)/2 * d, columns dx = d, odd
        // rows offset d/2. Acceptance tests the candidate node; jitter
        // displaces the bubble afterwards, so the commensurability test
        // below sees the exact lattice geometry.
        let bbox = geom.bbox();
        let mut candidates: Vec<Vec2> = Vec::new();
        let mut jitters: Vec<Vec2> = Vec::new();
        let mut y = bbox.min.y;
        let mut row = 0usize;
        while y <= bbox.max.y {
            let d_row = size.evaluate(Vec2::new(bbox.min.x, y));
            let mut x = bbox.min.x + if row % 2 == 1 { 0.5 * d_row } else { 0.0 };
            while x <= bbox.max.x {
                let p = Vec2::new(x, y);
                let d_loc = size.evaluate(p);
                // Jitter is always drawn, accepted or not, so the stream of
                // random numbers depends only on the lattice walk.
                let u_r: f64 = rng.random();
                let u_a: f64 = rng.random();
                let jit = Vec2::new(
                    u_r * 0.1 * d_loc * (u_a * TAU).cos(),
                    u_r * 0.1 * d_loc * (u_a * TAU).sin(),
                );
                if geom.signed_distance(p) < -0.3 * d_loc {
                    candidates.push(p);
                    jitters.push(jit);
                }
                x += d_loc;
            }
            y += 0.5 * SQRT3 * d_row;
            row += 1;
        }

        let cell = 1.5 * size.range_on(bbox, 64).1;
        if lattice_fits_boundary(geom, size, &bubbles, &candidates, cell) {
            for (p, jit) in candidates.iter().zip(&jitters) {
                bubbles.push(Bubble { pos: *p + *jit, vel: Vec2::ZERO, mobility: Mobility::Free });
            }
        } else {
            chaos_seed(geom, size, &mut bubbles, cell, &mut rng);
        }
        Ok(BubbleSystem { geom: geom.clone(), size: size.clone(), bubbles, cell, steps_taken: 0 })
    }

    /// Seeds a system from an inherited point set, typically the nodes and
    /// edge midpoints of a coarser mesh of the same domain, which already
    /// sit near equilibrium for half the spacing. Boundary points are
    /// projected onto the true boundary and become sliders (or anchors when
    /// they land on a polygon vertex), so the boundary ring stays
    /// commensurate with the inherited first interior row; reseeding the
    /// ring from scratch instead leaves an off-by-one azimuthal seam that
    /// relaxation cannot heal. Interior points closer to the boundary than
    /// 0.3 of the local size are dropped. Deterministic, no jitter.
    pub fn initialize_seeded(
        geom: &DomainGeometry,
        size: &SizeField,
        interior: &[Vec2],
        boundary: &[Vec2],
    ) -> Result<Self> {
        size.validate_positive(geom.bbox(), 64)?;
        let snap = 1e-9 * geom.bbox().diameter();
        let mut bubbles = Vec::new();
        for &p in boundary {
            let (li, s, q) = geom.project_with_param(p);
            let on_vertex = match &geom.loops()[li] {
                BoundaryLoop::Polyline(verts) => verts.iter().any(|v| (*v - q).norm() <= snap),
                BoundaryLoop::Circle { .. } => false,
            };
            let mobility =
                if on_vertex { Mobility::Fixed } else { Mobility::Slider { loop_idx: li, s } };
            bubbles.push(Bubble { pos: q, vel: Vec2::ZERO, mobility });
        }
        for &p in interior {
            let d_loc = size.evaluate(p);
            if geom.signed_distance(p) < -0.3 * d_loc {
                bubbles.push(Bubble { pos: p, vel: Vec2::ZERO, mobility: Mobility::Free });
            }
        }
        let cell = 1.5 * size.range_on(geom.bbox(), 64).1;
        Ok(BubbleSystem { geom: geom.clone(), size: size.clone(), bubbles, cell, steps_taken: 0 })
    }

    /// Rebuilds a system from saved bubbles (resuming a dumped run).
    pub fn from_parts(geom: DomainGeometry, size: SizeField, bubbles: Vec<Bubble>) -> Result<Self> {
        size.validate_positive(geom.bbox(), 64)?;
        let cell = 1.5 * size.range_on(geom.bbox(), 64).1;
        Ok(BubbleSystem { geom, size, bubbles, cell, steps_taken: 0 })
    }

    pub fn geom(&self) -> &DomainGeometry {
        &self.geom
    }

    pub fn size(&self) -> &SizeField {
        &self.size
    }

    pub fn n_bubbles(&self) -> usize {
        self.bubbles.len()
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.bubbles.iter().map(|b| b.pos).collect()
    }

    pub fn bubbles(&self) -> &[Bubble] {
        &self.bubbles
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    fn local_sizes(&self) -> Vec<f64> {
        self.bubbles.iter().map(|b| self.size.evaluate(b.pos)).collect()
    }

    /// Accumulates pair forces. Pair targets use the cached per-bubble
    /// sizes, i.e. the average of the two endpoint sizes.
    fn forces(&self, sizes: &[f64], k0: f64) -> Vec<Vec2> {
        let pts = self.positions();
        let grid = Grid::build(&pts, self.cell);
        let mut f = vec![Vec2::ZERO; pts.len()];
        grid.for_pairs(&pts, |i, j| {
            let target = 0.5 * (sizes[i] + sizes[j]);
            let delta = pts[i] - pts[j];
            let l = delta.norm();
            let w = l / target;
            if w >= 1.5 {
                return;
            }
            let mag = force_raw(w, k0);
            // Coincident points get a fixed push direction; the jittered
            // seeding makes this effectively unreachable.
            let dir = if l > 1e-12 * target { delta / l } else { Vec2::new(1.0, 0.0) };
            f[i] += mag * dir;
            f[j] -= mag * dir;
        });
        f
    }

    /// Residual of a force set: the largest unbalanced force magnitude a
    /// mobile bubble feels. Sliders only count the tangential component. A
    /// free bubble resting on the boundary sheds the outward component,
    /// which the wall reacts against (it pushes, never pulls); without this
    /// an overdense population presses on the walls forever and no force
    /// tolerance is ever reachable.
    fn residual_of(&self, forces: &[Vec2]) -> f64 {
        let contact = 1e-8 * self.geom.bbox().diameter();
        let mut r = 0.0f64;
        for (b, f) in self.bubbles.iter().zip(forces) {
            match b.mobility {
                Mobility::Fixed => {}
                Mobility::Free => {
                    let mut f_eff = *f;
                    if self.geom.signed_distance(b.pos) > -contact {
                        let (_, _, proj) = self.geom.project_with_param(b.pos);
                        if let Some(n_out) = (proj - b.pos).try_normalize(1e-300) {
                            let push = f_eff.dot(n_out);
                            if push > 0.0 {
                                f_eff -= push * n_out;
                            }
                        }
                    }
                    r = r.max(f_eff.norm());
                }
                Mobility::Slider { loop_idx, s } => {
                    let t = self.geom.loops()[loop_idx].tangent_at(s);
                    r = r.max(f.dot(t).abs());
                }
            }
        }
        r
    }

    /// One semi-implicit Euler step from precomputed forces. Per-bubble time
    /// step and damping follow the local pair stiffness (about `3 k0 / d`
    /// at spacing d), keeping the damping ratio and step fraction uniform
    /// across size scales. Returns the step's max velocity.
    fn integrate(&mut self, sizes: &[f64], forces: &[Vec2], params: &InnerParams) -> Result<f64> {
        let diameter = self.geom.bbox().diameter();
        let m = params.mass;
        let mut max_v = 0.0f64;
        let step_id = self.steps_taken as usize;

        for (i, b) in self.bubbles.iter_mut().enumerate() {
            let d = sizes[i];
            let c = params.damping_factor * (3.0 * m * params.k0 / d).sqrt();
            let omega = (3.0 * params.k0 / (m * d)).sqrt();
            let dt = params.dt_scale / omega;
            let f = forces[i];
            match b.mobility {
                Mobility::Fixed => {
                    b.vel = Vec2::ZERO;
                }
                Mobility::Free => {
                    let a = (f - c * b.vel) / m;
                    b.vel += dt * a;
                    b.pos += dt * b.vel;
                    max_v = max_v.max(b.vel.norm());
                    if !(b.pos.is_finite() && b.vel.is_finite()) {
                        return Err(Error::SimulationDiverged {
                            step: step_id,
                            detail: format!("bubble {i} became non-finite"),
                        });
                    }
                    // Keep interior bubbles inside: project escapees back,
                    // nudge inward, drop the outward velocity component.
                    if self.geom.signed_distance(b.pos) >= 0.0 {
                        let (_, _, proj) = self.geom.project_with_param(b.pos);
                        let out = b.pos - proj;
                        if let Some(n_out) = out.try_normalize(1e-300) {
                            let vn = b.vel.dot(n_out);
                            if vn > 0.0 {
                                b.vel -= vn * n_out;
                            }
                            b.pos = proj - 1e-9 * diameter * n_out;
                        } else {
                            b.pos = proj;
                        }
                    }
                }
                Mobility::Slider { loop_idx, s } => {
                    let lp = &self.geom.loops()[loop_idx];
                    let tangent = lp.tangent_at(s);
                    let f_t = f.dot(tangent);
                    let v_t = b.vel.dot(tangent);
                    let a_t = (f_t - c * v_t) / m;
                    let v_new = v_t + dt * a_t;
                    let s_new = (s + dt * v_new).rem_euclid(lp.length());
                    b.pos = lp.point_at(s_new);
                    b.vel = v_new * tangent;
                    b.mobility = Mobility::Slider { loop_idx, s: s_new };
                    max_v = max_v.max(v_new.abs());
                    if !s_new.is_finite() {
                        return Err(Error::SimulationDiverged {
                            step: step_id,
                            detail: format!("slider {i} became non-finite"),
                        });
                    }
                }
            }
        }
        self.steps_taken += 1;
        if max_v > 50.0 * diameter {
            return Err(Error::SimulationDiverged {
                step: step_id,
                detail: format!("velocity {max_v} far exceeds the domain scale"),
            });
        }
        Ok(max_v)
    }

    /// Damped relaxation until the residual force drops below
    /// `tol_force * k0` or `max_steps` elapse. Convergence is checked before
    /// each step, so a system already at equilibrium is returned unchanged
    /// with zero steps. Velocities persist across calls, so a run can be
    /// chunked into several shorter calls.
    pub fn inner_loop(&mut self, params: &InnerParams) -> Result<InnerStats> {
        params.validate()?;
        let tol = params.tol_force * params.k0;
        let mut max_v_seen = 0.0f64;
        let mut steps = 0usize;
        loop {
            let sizes = self.local_sizes();
            let forces = self.forces(&sizes, params.k0);
            let residual = self.residual_of(&forces);
            if residual <= tol || steps == params.max_steps {
                return Ok(InnerStats {
                    steps,
                    converged: residual <= tol,
                    max_force: residual,
                    max_velocity: max_v_seen,
                    epsilon: self.epsilon(),
                });
            }
            let mv = self.integrate(&sizes, &forces, params)?;
            max_v_seen = max_v_seen.max(mv);
            steps += 1;
        }
    }

    /// Worst pairwise |overlap| over natural-neighbor pairs of the current
    /// positions. This is the quantity the population control records after
    /// each relaxation and optimizes across rounds.
    pub fn epsilon(&self) -> f64 {
        self.star_overlaps().epsilon
    }

    /// Overlap statistics over natural-neighbor pairs: the Delaunay edges
    /// of the current positions, restricted to triangles whose centroid
    /// lies inside the domain (the same rule that clips the final mesh).
    ///
    /// A fixed `l < 1.5 target` pair cutoff fails here: once the packing is
    /// compressed by a few tens of percent the second neighbor ring slides
    /// under the cutoff, and its large negative overlaps both cancel the
    /// crowding signal in per-bubble means and pin the worst |overlap| near
    /// 0.5 no matter how regular the packing is. The Delaunay edge set
    /// follows the packing instead of a fixed radius, so neither happens.
    /// Positions that admit no triangulation (fewer than 3 points, or all
    /// collinear) fall back to the distance cutoff; in such degenerate
    /// configurations the two pair sets agree.
    fn star_overlaps(&self) -> StarOverlaps {
        let n = self.bubbles.len();
        let sizes = self.local_sizes();
        let pts = self.positions();
        let mut eps = 0.0f64;
        let mut sum = vec![0.0f64; n];
        let mut cnt = vec![0u32; n];
        let mut stretch = vec![(f64::INFINITY, usize::MAX); n];
        {
            let mut visit = |i: usize, j: usize| {
                let target = 0.5 * (sizes[i] + sizes[j]);
                let c = fusion_degree(pts[i].dist(pts[j]), target);
                eps = eps.max(c.abs());
                sum[i] += c;
                sum[j] += c;
                cnt[i] += 1;
                cnt[j] += 1;
                if c < stretch[i].0 {
                    stretch[i] = (c, j);
                }
                if c < stretch[j].0 {
                    stretch[j] = (c, i);
                }
            };
            match crate::triangulate::delaunay(&pts) {
                Ok(mesh) => {
                    let keep: Vec<bool> = (0..mesh.n_tris())
                        .map(|t| self.geom.signed_distance(mesh.centroid(t)) < 0.0)
                        .collect();
                    for e in &mesh.edges {
                        if e.tris.iter().flatten().any(|&t| keep[t]) {
                            visit(e.nodes[0], e.nodes[1]);
                        }
                    }
                }
                Err(_) => {
                    let grid = Grid::build(&pts, self.cell);
                    grid.for_pairs(&pts, |i, j| {
                        if pts[i].dist(pts[j]) < 0.75 * (sizes[i] + sizes[j]) {
                            visit(i, j);
                        }
                    });
                }
            }
        }
        let mean = sum
            .iter()
            .zip(&cnt)
            .map(|(s, &k)| if k > 0 { s / k as f64 } else { 0.0 })
            .collect();
        StarOverlaps { epsilon: eps, mean, stretch }
    }

    /// One population-control pass driven by natural-neighbor overlaps,
    /// worst offenders first, changing at most `churn_frac` of the
    /// population:
    /// - a crowded interior bubble (mean overlap above `theta_del`) is
    ///   deleted; boundary bubbles stay, their spacing is owned by the 1D
    ///   seeding;
    /// - a genuinely stretched contact (incident overlap below `theta_ins`)
    ///   gets a new bubble at its midpoint. The trigger is the bubble's
    ///   worst contact, not its mean: inside a compressed bulk the mean of
    ///   a star with one void edge is still positive, so a mean test never
    ///   fires where insertion is most needed.
    ///
    /// Velocities are zeroed when anything changed. Returns
    /// (inserted, deleted).
    fn adjust_population(&mut self, params: &OuterParams) -> Result<(usize, usize)> {
        #[derive(Clone, Copy)]
        enum Action {
            Delete(usize),
            Insert(Vec2),
        }
        let n = self.bubbles.len();
        let pts = self.positions();
        let star = self.star_overlaps();

        // Severity is the threshold excess, comparable between kinds.
        let mut events: Vec<(f64, usize, Action)> = Vec::new();
        for i in 0..n {
            let (worst_c, across) = star.stretch[i];
            if across == usize::MAX {
                continue;
            }
            if star.mean[i] > params.theta_del {
                if self.bubbles[i].mobility == Mobility::Free {
                    events.push((star.mean[i] - params.theta_del, i, Action::Delete(i)));
                }
            } else if worst_c < params.theta_ins {
                let p = 0.5 * (pts[i] + pts[across]);
                if self.geom.signed_distance(p) < -0.3 * self.size.evaluate(p) {
                    events.push((params.theta_ins - worst_c, i, Action::Insert(p)));
                }
            }
        }

        events.sort_by(|a, b| {
            b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1))
        });

        // Deleting or anchoring marks the bubble and its close neighbors as
        // spent, so one defect is treated once per round.
        let cap = ((params.churn_frac * n as f64).ceil() as usize).max(1);
        let sizes = self.local_sizes();
        let mut touched = vec![false; n];
        let mut kill = vec![false; n];
        let mut inserts: Vec<Vec2> = Vec::new();
        let mut applied = 0usize;
        for &(_, anchor, action) in &events {
            if applied >= cap {
                break;
            }
            if touched[anchor] {
                continue;
            }
            match action {
                Action::Delete(v) => kill[v] = true,
                Action::Insert(p) => {
                    let d_p = self.size.evaluate(p);
                    if inserts.iter().any(|q| q.dist(p) < 0.7 * d_p) {
                        continue;
                    }
                    inserts.push(p);
                }
            }
            touched[anchor] = true;
            // Deletions keep a wide berth: two holes torn closer than this
            // can merge into a void wider than 1.5 target, which no force
            // reaches and no relaxation can close. Insertions spend only
            // their anchor, so a void spanning several vacancies collects
            // several inserts (the spacing guard above keeps them apart)
            // and heals in one round.
            if matches!(action, Action::Delete(_)) {
                for k in 0..n {
                    if !touched[k] && pts[k].dist(pts[anchor]) < 2.2 * sizes[anchor] {
                        touched[k] = true;
                    }
                }
            }
            applied += 1;
        }

        let n_deleted = kill.iter().filter(|&&k| k).count();
        let n_inserted = inserts.len();
        if n_deleted + n_inserted == 0 {
            return Ok((0, 0));
        }
        let old = std::mem::take(&mut self.bubbles);
        self.bubbles = old
            .into_iter()
            .enumerate()
            .filter(|(k, _)| !kill[*k])
            .map(|(_, b)| b)
            .collect();
        for p in inserts {
            self.bubbles.push(Bubble { pos: p, vel: Vec2::ZERO, mobility: Mobility::Free });
        }
        for b in &mut self.bubbles {
            b.vel = Vec2::ZERO;
        }
        Ok((n_inserted, n_deleted))
    }

    /// Full pipeline: relax, adjust population, repeat, tracking the worst
    /// pair overlap after each relaxation. Stops once that measure is
    /// essentially zero, sets no new best for four rounds, or at
    /// `max_rounds`; then rewinds the system to the best round recorded.
    pub fn outer_loop(&mut self, params: &OuterParams) -> Result<OuterStats> {
        if !(params.churn_frac > 0.0 && params.churn_frac <= 1.0)
            || !(params.theta_del > 0.0)
            || !(params.theta_ins < 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "bad population-control parameters: {params:?}"
            )));
        }
        let mut eps_history: Vec<f64> = Vec::new();
        let mut populations = Vec::new();
        let mut inner_steps = Vec::new();
        let mut inner_converged = Vec::new();
        let mut best_eps = f64::INFINITY;
        let mut best_round = 0usize;
        let mut best_bubbles: Vec<Bubble> = self.bubbles.clone();
        let mut n_inserted = 0usize;
        let mut n_deleted = 0usize;

        for round in 0..=params.max_rounds {
            let stats = self.inner_loop(&params.inner)?;
            let eps = stats.epsilon;
            eps_history.push(eps);
            populations.push(self.n_bubbles());
            inner_steps.push(stats.steps);
            inner_converged.push(stats.converged);
            if eps < best_eps {
                best_eps = eps;
                best_round = round;
                best_bubbles = self.bubbles.clone();
            }
            // A packing this tight cannot be improved by churn, and a run
            // of best-less rounds means the anneal has bottomed out (a
            // single flat round is often just churn noise, so it does not
            // stop anything by itself).
            if round == params.max_rounds || eps < 0.005 || round >= best_round + 4 {
                break;
            }
            let (ins, del) = self.adjust_population(params)?;
            n_inserted += ins;
            n_deleted += del;
        }

        self.bubbles = best_bubbles;
        Ok(OuterStats {
            rounds: eps_history.len(),
            eps_history,
            populations,
            inner_steps,
            inner_converged,
            best_round,
            best_epsilon: best_eps,
            n_inserted,
            n_deleted,
        })
    }
}

/// Per-bubble overlap statistics over natural-neighbor pairs.
struct StarOverlaps {
    /// Worst |overlap| over all pairs.
    epsilon: f64,
    /// Signed mean overlap of each bubble over its incident pairs; zero
    /// when the bubble has none.
    mean: Vec<f64>,
    /// Most stretched incident overlap per bubble and the bubble across
    /// that contact; `(inf, usize::MAX)` when the bubble has no pairs.
    stretch: Vec<(f64, usize)>,
}

/// Largest void, as a multiple of the local target spacing, that an intact
/// interior lattice can expose: its cell circumradius is 0.577 d, so any
/// interior point farther than this from every node proves the boundary
/// cuts the lattice instead of lining up with it.
const FILL_CLEARANCE: f64 = 0.62;

/// Exclusion radius of the chaotic seeding, as a multiple of the local pair
/// target spacing. Saturated dart throwing at this exclusion bounds the
/// initial defects on both sides: no pair is closer than 0.65 target
/// (overlap at most +0.35) and saturation leaves no gap wider than twice
/// that (overlap at least -0.3), so every initial defect lies within the
/// 1.5 target force range and can relax. The landed density is about 1.4x
/// ideal; the deletion side of the population control thins the surplus.
const CHAOS_EXCLUSION: f64 = 0.65;

/// Fills the interior with saturated random placement: uniform darts over
/// the bounding box, accepted when properly interior and no prior bubble
/// (boundary ring included) lies within [`CHAOS_EXCLUSION`] of the pair
/// target. Stops once a long run of consecutive rejections makes any
/// remaining hole vanishingly unlikely. Appends the accepted darts to
/// `bubbles` as free interior bubbles.
fn chaos_seed(
    geom: &DomainGeometry,
    size: &SizeField,
    bubbles: &mut Vec<Bubble>,
    cell: f64,
    rng: &mut ChaCha8Rng,
) {
    let bbox = geom.bbox();
    let span = bbox.max - bbox.min;
    let d_min = size.range_on(bbox, 64).0;
    // A run of this many rejections leaves an uncovered disk of radius
    // 0.65 d_min with probability under exp(-10).
    let fail_cap = 200
        + (10.0 * span.x * span.y / (CHAOS_EXCLUSION * d_min).powi(2)).ceil() as usize;

    let key = |p: Vec2| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut cells: HashMap<(i64, i64), Vec<(Vec2, f64)>> = HashMap::new();
    for b in bubbles.iter() {
        cells.entry(key(b.pos)).or_default().push((b.pos, size.evaluate(b.pos)));
    }

    let mut fails = 0usize;
    while fails < fail_cap {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let p = bbox.min + Vec2::new(u1 * span.x, u2 * span.y);
        let d_p = size.evaluate(p);
        let mut ok = geom.signed_distance(p) < -0.3 * d_p;
        if ok {
            let (cx, cy) = key(p);
            'scan: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(v) = cells.get(&(cx + dx, cy + dy)) {
                        for &(q, d_q) in v {
                            if q.dist(p) < CHAOS_EXCLUSION * 0.5 * (d_p + d_q) {
                                ok = false;
                                break 'scan;
                            }
                        }
                    }
                }
            }
        }
        if ok {
            bubbles.push(Bubble { pos: p, vel: Vec2::ZERO, mobility: Mobility::Free });
            cells.entry(key(p)).or_default().push((p, d_p));
            fails = 0;
        } else {
            fails += 1;
        }
    }
}

/// Tests whether the clipped lattice is commensurate with the boundary
/// ring. Probes on inward normals sweep the contact band; a probe that is
/// properly interior yet has no boundary bubble or lattice node within
/// [`FILL_CLEARANCE`] of the local spacing is a void the lattice cannot
/// close, so the lattice does not fit. Clearance is measured against the
/// exact (unjittered) lattice nodes, so the verdict does not depend on the
/// seed.
fn lattice_fits_boundary(
    geom: &DomainGeometry,
    size: &SizeField,
    boundary: &[Bubble],
    lattice: &[Vec2],
    cell: f64,
) -> bool {
    let mut base: Vec<Vec2> = boundary.iter().map(|b| b.pos).collect();
    base.extend_from_slice(lattice);
    if base.is_empty() {
        return true;
    }
    let grid = Grid::build(&base, cell);
    for lp in geom.loops() {
        let len = lp.length();
        let mut s = 0.0;
        while s < len {
            let bp = lp.point_at(s);
            let d_b = size.evaluate(bp);
            let t = lp.tangent_at(s);
            let n = Vec2::new(-t.y, t.x);
            let inward = if geom.signed_distance(bp + 0.05 * d_b * n) < 0.0 { n } else { -n };
            let mut depth = 0.375 * d_b;
            while depth <= 1.425 * d_b {
                let p = bp + depth * inward;
                let d_p = size.evaluate(p);
                if geom.signed_distance(p) < -0.3 * d_p
                    && grid.min_dist_to(&base, p) >= FILL_CLEARANCE * d_p
                {
                    return false;
                }
                depth += 0.15 * d_b;
            }
            s += 0.125 * d_b;
        }
    }
    true
}

/// Places fixed corner bubbles and boundary sliders on one loop.
fn seed_loop(lp: &BoundaryLoop, loop_idx: usize, size: &SizeField, out: &mut Vec<Bubble>) {
    let total_len = lp.length();
    match lp {
        BoundaryLoop::Polyline(verts) => {
            let params = lp.vertex_params();
            for v in verts {
                out.push(Bubble { pos: *v, vel: Vec2::ZERO, mobility: Mobility::Fixed });
            }
            for k in 0..verts.len() {
                let s0 = params[k];
                let s1 = if k + 1 < verts.len() { params[k + 1] } else { total_len };
                for s in segment_quantiles(lp, size, s0, s1, false) {
                    out.push(Bubble {
                        pos: lp.point_at(s),
                        vel: Vec2::ZERO,
                        mobility: Mobility::Slider { loop_idx, s },
                    });
                }
            }
        }
        BoundaryLoop::Circle { .. } => {
            for s in segment_quantiles(lp, size, 0.0, total_len, true) {
                out.push(Bubble {
                    pos: lp.point_at(s),
                    vel: Vec2::ZERO,
                    mobility: Mobility::Slider { loop_idx, s },
                });
            }
        }
    }
}

/// Arc-length positions subdividing `[s0, s1]` into `round(integral ds/d)`
/// intervals of equal size-weighted measure. Open segments (between two
/// corners) return the interior split points; closed loops also return the
/// start point and use at least 3 intervals.
fn segment_quantiles(
    lp: &BoundaryLoop,
    size: &SizeField,
    s0: f64,
    s1: f64,
    closed: bool,
) -> Vec<f64> {
    let len = s1 - s0;
    if len <= 0.0 {
        return Vec::new();
    }
    // Estimate the smallest spacing to pick a sampling density, then build
    // the cumulative size-weighted measure by trapezoids.
    let mut d_min = f64::INFINITY;
    for k in 0..=128 {
        let s = s0 + len * k as f64 / 128.0;
        d_min = d_min.min(size.evaluate(lp.point_at(s)));
    }
    let m = ((64.0 * len / d_min).ceil() as usize).clamp(512, 1 << 20);
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    let ds = len / m as f64;
    let mut prev = 1.0 / size.evaluate(lp.point_at(s0));
    for k in 1..=m {
        let s = s0 + ds * k as f64;
        let cur = 1.0 / size.evaluate(lp.point_at(s));
        cum.push(cum[k - 1] + 0.5 * (prev + cur) * ds);
        prev = cur;
    }
    let total = cum[m];
    let n = if closed {
        (total.round() as usize).max(3)
    } else {
        (total.round() as usize).max(1)
    };
    let targets: Vec<f64> = if closed {
        (0..n).map(|k| total * k as f64 / n as f64).collect()
    } else {
        (1..n).map(|k| total * k as f64 / n as f64).collect()
    };
    // Invert the cumulative measure by linear interpolation.
    let mut res = Vec::with_capacity(targets.len());
    let mut idx = 0usize;
    for t in targets {
        while idx + 1 < cum.len() && cum[idx + 1] < t {
            idx += 1;
        }
        let seg = cum[idx + 1] - cum[idx];
        let frac = if seg > 0.0 { (t - cum[idx]) / seg } else { 0.0 };
        res.push(s0 + ds * (idx as f64 + frac));
    }
    res
}

/// Uniform cell grid for neighbor search; cells are linked lists.
struct Grid {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    head: Vec<i32>,
    next: Vec<i32>,
}

impl Grid {
    fn build(pts: &[Vec2], cell: f64) -> Grid {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
            max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
        }
        if pts.is_empty() {
            min = Vec2::ZERO;
            max = Vec2::ZERO;
        }
        let nx = (((max.x - min.x) / cell).floor() as usize) + 1;
        let ny = (((max.y - min.y) / cell).floor() as usize) + 1;
        let mut grid = Grid {
            origin: min,
            cell,
            nx,
            ny,
            head: vec![-1; nx * ny],
            next: vec![-1; pts.len()],
        };
        for (i, p) in pts.iter().enumerate() {
            let c = grid.cell_index(*p);
            grid.next[i] = grid.head[c];
            grid.head[c] = i as i32;
        }
        grid
    }

    fn cell_index(&self, p: Vec2) -> usize {
        let cx = (((p.x - self.origin.x) / self.cell).floor() as isize)
            .clamp(0, self.nx as isize - 1) as usize;
        let cy = (((p.y - self.origin.y) / self.cell).floor() as isize)
            .clamp(0, self.ny as isize - 1) as usize;
        cy * self.nx + cx
    }

    /// Visits every unordered pair within one cell ring exactly once, in a
    /// fixed order.
    fn for_pairs(&self, _pts: &[Vec2], mut f: impl FnMut(usize, usize)) {
        // Forward half-stencil relative to (cx, cy).
        const FWD: [(isize, isize); 4] = [(1, 0), (-1, 1), (0, 1), (1, 1)];
        for cy in 0..self.ny as isize {
            for cx in 0..self.nx as isize {
                let c = cy as usize * self.nx + cx as usize;
                let mut i = self.head[c];
                while i >= 0 {
                    let mut j = self.next[i as usize];
                    while j >= 0 {
                        f(i as usize, j as usize);
                        j = self.next[j as usize];
                    }
                    i = self.next[i as usize];
                }
                for (dx, dy) in FWD {
                    let (ox, oy) = (cx + dx, cy + dy);
                    if ox < 0 || oy < 0 || ox >= self.nx as isize || oy >= self.ny as isize {
                        continue;
                    }
                    let oc = oy as usize * self.nx + ox as usize;
                    let mut i = self.head[c];
                    while i >= 0 {
                        let mut j = self.head[oc];
                        while j >= 0 {
                            f(i as usize, j as usize);
                            j = self.next[j as usize];
                        }
                        i = self.next[i as usize];
                    }
                }
            }
        }
    }

    /// Distance from `p` to the nearest stored point, exact for distances
    /// up to one cell size (the 3x3 neighborhood is scanned).
    fn min_dist_to(&self, pts: &[Vec2], p: Vec2) -> f64 {
        let cx = (((p.x - self.origin.x) / self.cell).floor() as isize)
            .clamp(0, self.nx as isize - 1);
        let cy = (((p.y - self.origin.y) / self.cell).floor() as isize)
            .clamp(0, self.ny as isize - 1);
        let mut best = f64::INFINITY;
        for oy in (cy - 1).max(0)..=(cy + 1).min(self.ny as isize - 1) {
            for ox in (cx - 1).max(0)..=(cx + 1).min(self.nx as isize - 1) {
                let mut i = self.head[oy as usize * self.nx + ox as usize];
                while i >= 0 {
                    best = best.min(pts[i as usize].dist(p));
                    i = self.next[i as usize];
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainGeometry;

    #[test]
    fn force_roots_are_exact() {
        assert_eq!(interbubble_force(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(interbubble_force(1.5, 1.0).unwrap(), 0.0);
        assert_eq!(interbubble_force(2.0, 1.0).unwrap(), 0.0);
        assert_eq!(interbubble_force(0.0, 1.0).unwrap(), 1.125);
        assert_eq!(interbubble_force(0.0, 2.0).unwrap(), 2.25);
        assert!(interbubble_force(-0.1, 1.0).is_err());
        assert!(interbubble_force(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn force_signs() {
        for k in 1..100 {
            let w = k as f64 / 100.0;
            assert!(interbubble_force(w, 1.0).unwrap() > 0.0, "repulsive at w={w}");
        }
        for k in 101..150 {
            let w = k as f64 / 100.0;
            assert!(interbubble_force(w, 1.0).unwrap() < 0.0, "attractive at w={w}");
        }
        assert_eq!(interbubble_force(1.75, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn fusion_degree_examples() {
        assert!((fusion_degree(0.08, 0.1) - 0.2).abs() < 1e-15);
        assert!((fusion_degree(0.12, 0.1) + 0.2).abs() < 1e-15);
        assert_eq!(fusion_degree(0.1, 0.1), 0.0);
        assert!((fusion_degree(0.072, 0.1) - 0.28).abs() < 1e-15);
        assert!((fusion_degree(0.13, 0.1) + 0.3).abs() < 1e-15);
    }

    #[test]
    fn coarse_triangle_seeding() {
        let geom = DomainGeometry::preset("equilateral_triangle").unwrap();
        let size = SizeField::constant(0.5).unwrap();
        let sys = BubbleSystem::initialize(&geom, &size, 7).unwrap();
        let fixed = sys.bubbles.iter().filter(|b| b.mobility == Mobility::Fixed).count();
        let sliders = sys
            .bubbles
            .iter()
            .filter(|b| matches!(b.mobility, Mobility::Slider { .. }))
            .count();
        let free = sys.bubbles.iter().filter(|b| b.mobility == Mobility::Free).count();
        assert_eq!(fixed, 3);
        assert_eq!(sliders, 3, "one mid-edge slider per side");
        assert_eq!(free, 0);
    }

    #[test]
    fn circle_boundary_count_matches_circumference() {
        let geom = DomainGeometry::preset("unit_circle").unwrap();
        let size = SizeField::constant(0.1).unwrap();
        let sys = BubbleSystem::initialize(&geom, &size, 7).unwrap();
        let sliders: Vec<&Bubble> = sys
            .bubbles
            .iter()
            .filter(|b| matches!(b.mobility, Mobility::Slider { .. }))
            .collect();
        assert_eq!(sliders.len(), 63, "round(2 pi / 0.1)");
        for b in &sliders {
            assert!((b.pos.norm() - 1.0).abs() < 1e-12);
        }
        assert!(sys.bubbles.iter().all(|b| b.mobility != Mobility::Fixed));
        // Interior seeding fills the disk at near-hexagonal density.
        let free = sys.n_bubbles() - sliders.len();
        let ideal = (std::f64::consts::PI / (0.5 * SQRT3 * 0.01)) as usize;
        assert!(free > ideal / 2 && free < ideal * 3 / 2, "free = {free}, ideal about {ideal}");
    }

    #[test]
    fn middle_bubble_settles_at_midpoint() {
        let geom = DomainGeometry::preset("square3").unwrap();
        let size = SizeField::constant(1.0).unwrap();
        let bubbles = vec![
            Bubble { pos: Vec2::new(-0.6, 0.0), vel: Vec2::ZERO, mobility: Mobility::Fixed },
            Bubble { pos: Vec2::new(0.6, 0.0), vel: Vec2::ZERO, mobility: Mobility::Fixed },
            Bubble { pos: Vec2::new(0.1, 0.0), vel: Vec2::ZERO, mobility: Mobility::Free },
        ];
        let mut sys = BubbleSystem::from_parts(geom, size, bubbles).unwrap();
        let params = InnerParams { tol_force: 1e-6, max_steps: 2000, ..Default::default() };
        let stats = sys.inner_loop(&params).unwrap();
        assert!(stats.converged, "residual {}", stats.max_force);
        let p = sys.bubbles[2].pos;
        assert!(p.x.abs() < 1e-5, "x = {}", p.x);
        assert_eq!(p.y, 0.0);
        assert!(stats.max_velocity.is_finite());
    }

    #[test]
    fn relaxation_is_deterministic_and_chunkable() {
        let geom = DomainGeometry::preset("unit_circle").unwrap();
        let size = SizeField::constant(0.3).unwrap();
        let params = InnerParams { max_steps: 21, ..Default::default() };

        let mut a = BubbleSystem::initialize(&geom, &size, 42).unwrap();
        a.inner_loop(&params).unwrap();

        let mut b = BubbleSystem::initialize(&geom, &size, 42).unwrap();
        let chunk = InnerParams { max_steps: 7, ..params };
        for _ in 0..3 {
            b.inner_loop(&chunk).unwrap();
        }

        assert_eq!(a.n_bubbles(), b.n_bubbles());
        for (x, y) in a.bubbles.iter().zip(&b.bubbles) {
            assert_eq!(x.pos.x, y.pos.x);
            assert_eq!(x.pos.y, y.pos.y);
        }

        let c = BubbleSystem::initialize(&geom, &size, 43).unwrap();
        let moved = c
            .bubbles
            .iter()
            .zip(BubbleSystem::initialize(&geom, &size, 42).unwrap().bubbles.iter())
            .any(|(x, y)| x.pos != y.pos);
        assert!(moved, "different seeds must jitter differently");
    }

    #[test]
    fn equilibrium_input_returns_unchanged_in_zero_steps() {
        let geom = DomainGeometry::preset("unit_circle").unwrap();
        let size = SizeField::constant(0.3).unwrap();
        let mut sys = BubbleSystem::initialize(&geom, &size, 1).unwrap();
        let p = InnerParams { max_steps: 2000, ..Default::default() };
        let s1 = sys.inner_loop(&p).unwrap();
        assert!(s1.converged);
        let before = sys.positions();
        let s2 = sys.inner_loop(&p).unwrap();
        assert!(s2.converged);
        assert_eq!(s2.steps, 0);
        for (a, b) in before.iter().zip(sys.positions()) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, b.y);
        }
    }

    #[test]
    fn containment_invariant_holds_during_relaxation() {
        let geom = DomainGeometry::preset("l_shape").unwrap();
        let size = SizeField::constant(0.35).unwrap();
        let mut sys = BubbleSystem::initialize(&geom, &size, 5).unwrap();
        let diam = geom.bbox().diameter();
        let p = InnerParams { max_steps: 10, ..Default::default() };
        for _ in 0..10 {
            sys.inner_loop(&p).unwrap();
            for b in &sys.bubbles {
                let sd = geom.signed_distance(b.pos);
                match b.mobility {
                    Mobility::Free => assert!(sd < 1e-9 * diam, "free bubble escaped: sdf {sd}"),
                    _ => assert!(sd.abs() < 1e-9 * diam, "boundary bubble off the loop: {sd}"),
                }
            }
        }
    }

    #[test]
    fn population_control_rewinds_to_best_round() {
        let geom = DomainGeometry::preset("unit_circle").unwrap();
        let size = SizeField::constant(0.25).unwrap();
        let mut sys = BubbleSystem::initialize(&geom, &size, 9).unwrap();
        let stats = sys.outer_loop(&OuterParams::default()).unwrap();
        assert!(!stats.eps_history.is_empty());
        assert!(stats.best_epsilon <= stats.eps_history[0]);
        assert_eq!(stats.best_epsilon, sys.epsilon());
        assert_eq!(stats.eps_history[stats.best_round], stats.best_epsilon);
        assert!(stats.rounds <= 21);
    }

    #[test]
    fn settled_system_exits_in_one_round() {
        // An ideal lattice relaxes to near-zero overlap immediately, so
        // the loop takes the low-overlap exit without ever touching the
        // population.
        let geom = DomainGeometry::preset("equilateral_triangle").unwrap();
        let size = SizeField::constant(0.2).unwrap();
        let mut sys = BubbleSystem::initialize(&geom, &size, 3).unwrap();
        let stats = sys.outer_loop(&OuterParams::default()).unwrap();
        assert!(stats.best_epsilon < 1e-3, "ideal subdivision, eps = {}", stats.best_epsilon);
        assert_eq!(stats.rounds, 1);
        assert_eq!(stats.n_inserted + stats.n_deleted, 0);
        assert_eq!(stats.populations[0], stats.populations[stats.rounds - 1]);
    }

    #[test]
    fn bad_parameters_rejected() {
        let geom = DomainGeometry::preset("unit_circle").unwrap();
        let size = SizeField::constant(0.3).unwrap();
        let mut sys = BubbleSystem::initialize(&geom, &size, 0).unwrap();
        let bad = InnerParams { tol_force: 0.0, ..Default::default() };
        assert!(sys.inner_loop(&bad).is_err());
        let bad_outer = OuterParams { churn_frac: 0.0, ..Default::default() };
        assert!(sys.outer_loop(&bad_outer).is_err());
        let bad_gap = OuterParams { theta_ins: 0.2, ..Default::default() };
        assert!(sys.outer_loop(&bad_gap).is_err());
    }
}
