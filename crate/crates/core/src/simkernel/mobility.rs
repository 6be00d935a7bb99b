//! Random waypoint mobility.
//!
//! A node moves in a straight line at constant speed toward a waypoint drawn
//! uniformly in the arena, pauses on arrival, then draws the next waypoint and
//! speed from its own seeded stream. The trajectory depends only on that
//! stream, not on when positions are queried.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::channel::Pos;
use crate::netmodel::Time;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arena {
    pub width_m: f64,
    pub height_m: f64,
}

impl Arena {
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Pos {
        Pos::new(rng.random_range(0.0..=self.width_m), rng.random_range(0.0..=self.height_m))
    }

    pub fn contains(&self, p: Pos) -> bool {
        (0.0..=self.width_m).contains(&p.x) && (0.0..=self.height_m).contains(&p.y)
    }

    fn clamp(&self, p: Pos) -> Pos {
        Pos::new(p.x.clamp(0.0, self.width_m), p.y.clamp(0.0, self.height_m))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityConfig {
    pub v_min: f64,
    pub v_max: f64,
    pub pause_s: f64,
}

impl MobilityConfig {
    pub fn is_static(&self) -> bool {
        self.v_max <= 0.0
    }
}

#[derive(Debug, Clone)]
pub struct MobilityState {
    pub pos: Pos,
    pub waypoint: Pos,
    pub speed: f64,
    pub pause_until: Time,
    last_update: Time,
    rng: ChaCha8Rng,
}

impl MobilityState {
    /// Starts at `pos`, heading for a freshly drawn waypoint. With a zero
    /// maximum speed the node never moves.
    pub fn new(pos: Pos, cfg: &MobilityConfig, arena: &Arena, mut rng: ChaCha8Rng) -> Self {
        let (waypoint, speed) = if cfg.is_static() {
            (pos, 0.0)
        } else {
            (arena.random_point(&mut rng), draw_speed(cfg, &mut rng))
        };
        MobilityState {
            pos,
            waypoint,
            speed,
            pause_until: 0.0,
            last_update: 0.0,
            rng,
        }
    }

    /// A state already travelling toward `waypoint` at `speed`.
    pub fn with_leg(pos: Pos, waypoint: Pos, speed: f64, rng: ChaCha8Rng) -> Self {
        MobilityState {
            pos,
            waypoint,
            speed,
            pause_until: 0.0,
            last_update: 0.0,
            rng,
        }
    }

    pub fn last_update(&self) -> Time {
        self.last_update
    }

    /// Advances the node to time `t` and returns its position.
    pub fn position_at(&mut self, t: Time, cfg: &MobilityConfig, arena: &Arena) -> Pos {
        debug_assert!(t >= self.last_update, "mobility queried backwards in time");
        let mut clock = self.last_update;
        while clock < t {
            if self.speed <= 0.0 {
                break;
            }
            if clock < self.pause_until {
                if t <= self.pause_until {
                    break;
                }
                clock = self.pause_until;
            }
            let dist = self.pos.distance(self.waypoint);
            let arrive_in = dist / self.speed;
            if clock + arrive_in > t {
                let frac = (t - clock) * self.speed / dist;
                self.pos = arena.clamp(Pos::new(
                    self.pos.x + (self.waypoint.x - self.pos.x) * frac,
                    self.pos.y + (self.waypoint.y - self.pos.y) * frac,
                ));
                break;
            }
            clock += arrive_in;
            self.pos = self.waypoint;
            self.pause_until = clock + cfg.pause_s;
            self.waypoint = arena.random_point(&mut self.rng);
            self.speed = draw_speed(cfg, &mut self.rng);
        }
        self.last_update = t;
        self.pos
    }
}

fn draw_speed<R: Rng + ?Sized>(cfg: &MobilityConfig, rng: &mut R) -> f64 {
    if cfg.v_min >= cfg.v_max {
        cfg.v_max
    } else {
        rng.random_range(cfg.v_min..=cfg.v_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    const ARENA: Arena = Arena {
        width_m: 1000.0,
        height_m: 1000.0,
    };

    fn cfg(v: f64) -> MobilityConfig {
        MobilityConfig {
            v_min: v,
            v_max: v,
            pause_s: 2.0,
        }
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn straight_line_kinematics() {
        let mut m = MobilityState::with_leg(Pos::new(100.0, 100.0), Pos::new(200.0, 100.0), 10.0, rng());
        let p = m.position_at(5.0, &cfg(10.0), &ARENA);
        assert!((p.x - 150.0).abs() < 1e-9 && (p.y - 100.0).abs() < 1e-9);
    }

    #[test]
    fn holds_waypoint_during_pause() {
        let mut m = MobilityState::with_leg(Pos::new(100.0, 100.0), Pos::new(200.0, 100.0), 10.0, rng());
        let p = m.position_at(11.0, &cfg(10.0), &ARENA);
        assert_eq!(p, Pos::new(200.0, 100.0));
        assert_eq!(m.pause_until, 12.0);
        let p = m.position_at(12.0, &cfg(10.0), &ARENA);
        assert_eq!(p, Pos::new(200.0, 100.0));
    }

    #[test]
    fn zero_speed_is_static() {
        let start = Pos::new(321.0, 654.0);
        let mut m = MobilityState::new(start, &cfg(0.0), &ARENA, rng());
        for t in [0.0, 1.0, 50.0, 1e6] {
            assert_eq!(m.position_at(t, &cfg(0.0), &ARENA), start);
        }
    }

    #[test]
    fn trajectory_independent_of_query_times() {
        let c = MobilityConfig {
            v_min: 5.0,
            v_max: 20.0,
            pause_s: 1.0,
        };
        let mut coarse = MobilityState::new(Pos::new(10.0, 10.0), &c, &ARENA, rng());
        let mut fine = coarse.clone();
        for step in 1..=2000 {
            fine.position_at(step as f64 * 0.05, &c, &ARENA);
        }
        let a = coarse.position_at(100.0, &c, &ARENA);
        let b = fine.position_at(100.0, &c, &ARENA);
        assert!(a.distance(b) < 1e-6, "{a:?} vs {b:?}");
    }

    #[test]
    fn stays_inside_arena() {
        let c = MobilityConfig {
            v_min: 5.0,
            v_max: 20.0,
            pause_s: 0.0,
        };
        let mut m = MobilityState::new(Pos::new(0.0, 1000.0), &c, &ARENA, rng());
        for step in 1..=5000 {
            let p = m.position_at(step as f64 * 0.1, &c, &ARENA);
            assert!(ARENA.contains(p), "{p:?}");
        }
    }

    #[test]
    fn speed_bounds_displacement() {
        let c = MobilityConfig {
            v_min: 5.0,
            v_max: 20.0,
            pause_s: 0.5,
        };
        let mut m = MobilityState::new(Pos::new(500.0, 500.0), &c, &ARENA, rng());
        let mut prev = m.pos;
        for step in 1..=1000 {
            let p = m.position_at(step as f64 * 0.1, &c, &ARENA);
            assert!(p.distance(prev) <= 20.0 * 0.1 + 1e-9);
            prev = p;
        }
    }
}
