use rand::Rng;

use crate::radio::{Geometry, Position};

const MAX_RESAMPLES: usize = 64;

/// Uniform point in a disk of radius `r`.
pub fn disk_step<R: Rng + ?Sized>(rng: &mut R, r: f64) -> (f64, f64) {
    if r <= 0.0 {
        return (0.0, 0.0);
    }
    let rad = r * rng.random::<f64>().sqrt();
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    (rad * theta.cos(), rad * theta.sin())
}

/// Random-walk step for every user; an uncovered proposal is redrawn, and a
/// user stays put if no covered proposal turns up.
pub fn move_users<R: Rng + ?Sized>(geometry: &mut Geometry, rng: &mut R, step_km: f64) {
    if step_km <= 0.0 {
        return;
    }
    for u in 0..geometry.user_positions.len() {
        let cur = geometry.user_positions[u];
        for _ in 0..MAX_RESAMPLES {
            let (dx, dy) = disk_step(rng, step_km);
            let next = Position::new(cur.x + dx, cur.y + dy);
            if geometry.is_covered(&next) {
                geometry.user_positions[u] = next;
                break;
            }
        }
    }
}

/// Uniform placement over the union of coverage disks.
pub fn place_users<R: Rng + ?Sized>(geometry: &mut Geometry, rng: &mut R, num_users: usize) {
    let r = geometry.coverage_radius_km;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for b in &geometry.bs_positions {
        x0 = x0.min(b.x - r);
        x1 = x1.max(b.x + r);
        y0 = y0.min(b.y - r);
        y1 = y1.max(b.y + r);
    }
    geometry.user_positions.clear();
    while geometry.user_positions.len() < num_users {
        let p = Position::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        if geometry.is_covered(&p) {
            geometry.user_positions.push(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geom() -> Geometry {
        Geometry {
            bs_positions: vec![Position::new(0.0, 0.0)],
            user_positions: vec![Position::new(0.0, 0.0), Position::new(2.49, 0.0)],
            jammer_position: None,
            coverage_radius_km: 2.5,
        }
    }

    #[test]
    fn zero_step_is_still() {
        let mut g = geom();
        let before = g.clone();
        move_users(&mut g, &mut ChaCha8Rng::seed_from_u64(1), 0.0);
        assert_eq!(g, before);
    }

    #[test]
    fn boundary_user_stays_covered() {
        let mut g = geom();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            move_users(&mut g, &mut rng, 0.05);
            assert!(g.all_users_covered());
        }
    }

    #[test]
    fn steps_are_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let (mut sx, mut sy, mut sxx) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let (dx, dy) = disk_step(&mut rng, 0.05);
            sx += dx;
            sy += dy;
            sxx += dx * dx;
        }
        // Var(dx) = r^2 / 4 for a uniform disk.
        let se = (0.05f64.powi(2) / 4.0 / n as f64).sqrt();
        assert!((sx / n as f64).abs() < 4.0 * se);
        assert!((sy / n as f64).abs() < 4.0 * se);
        assert!((sxx / n as f64 - 0.05f64.powi(2) / 4.0).abs() < 0.05 * 0.05f64.powi(2));
    }

    #[test]
    fn placement_is_covered() {
        let mut g = geom();
        place_users(&mut g, &mut ChaCha8Rng::seed_from_u64(5), 100);
        assert_eq!(g.user_positions.len(), 100);
        assert!(g.all_users_covered());
    }
}
