use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Which physical link a fading coefficient belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LinkKind {
    BsToUser,
    JammerToUser,
    BsToJammer,
}

/// Draws `CN(0, 1)`: independent real and imaginary parts with variance 1/2.
pub fn sample_cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// First-order complex Gauss-Markov fading for every (link, channel) pair.
#[derive(Clone, Debug)]
pub struct FadingField {
    pub rho: f64,
    pub num_bs: usize,
    pub num_users: usize,
    pub num_channels: usize,
    bs_user: Vec<Complex64>,
    jam_user: Vec<Complex64>,
    bs_jam: Vec<Complex64>,
}

impl FadingField {
    /// Samples every coefficient from the stationary `CN(0,1)` law.
    pub fn stationary<R: Rng + ?Sized>(
        rho: f64,
        num_bs: usize,
        num_users: usize,
        num_channels: usize,
        rng: &mut R,
        jammer_rng: &mut R,
    ) -> Self {
        let bs_user = (0..num_bs * num_users * num_channels).map(|_| sample_cn(rng)).collect();
        let jam_user = (0..num_users * num_channels).map(|_| sample_cn(jammer_rng)).collect();
        let bs_jam = (0..num_bs * num_channels).map(|_| sample_cn(jammer_rng)).collect();
        FadingField { rho, num_bs, num_users, num_channels, bs_user, jam_user, bs_jam }
    }

    /// All-equal coefficients, handy for deterministic tests.
    pub fn constant(rho: f64, num_bs: usize, num_users: usize, num_channels: usize, value: Complex64) -> Self {
        FadingField {
            rho,
            num_bs,
            num_users,
            num_channels,
            bs_user: vec![value; num_bs * num_users * num_channels],
            jam_user: vec![value; num_users * num_channels],
            bs_jam: vec![value; num_bs * num_channels],
        }
    }

    #[inline]
    pub fn bs_user(&self, b: usize, u: usize, c: usize) -> Complex64 {
        self.bs_user[(b * self.num_users + u) * self.num_channels + c]
    }

    #[inline]
    pub fn jam_user(&self, u: usize, c: usize) -> Complex64 {
        self.jam_user[u * self.num_channels + c]
    }

    #[inline]
    pub fn bs_jam(&self, b: usize, c: usize) -> Complex64 {
        self.bs_jam[b * self.num_channels + c]
    }

    pub fn set_bs_user(&mut self, b: usize, u: usize, c: usize, h: Complex64) {
        let i = (b * self.num_users + u) * self.num_channels + c;
        self.bs_user[i] = h;
    }

    pub fn set_jam_user(&mut self, u: usize, c: usize, h: Complex64) {
        self.jam_user[u * self.num_channels + c] = h;
    }

    pub fn set_bs_jam(&mut self, b: usize, c: usize, h: Complex64) {
        self.bs_jam[b * self.num_channels + c] = h;
    }

    pub fn coefficients(&self, kind: LinkKind) -> &[Complex64] {
        match kind {
            LinkKind::BsToUser => &self.bs_user,
            LinkKind::JammerToUser => &self.jam_user,
            LinkKind::BsToJammer => &self.bs_jam,
        }
    }

    /// `h' = rho h + sqrt(1 - rho^2) e` on one link family.
    pub fn evolve_kind<R: Rng + ?Sized>(&mut self, kind: LinkKind, rng: &mut R) {
        let rho = self.rho;
        let innov = (1.0 - rho * rho).max(0.0).sqrt();
        let coeffs = match kind {
            LinkKind::BsToUser => &mut self.bs_user,
            LinkKind::JammerToUser => &mut self.jam_user,
            LinkKind::BsToJammer => &mut self.bs_jam,
        };
        if innov == 0.0 {
            return;
        }
        for h in coeffs.iter_mut() {
            *h = *h * rho + sample_cn(rng) * innov;
        }
    }

    /// Advances victim links with `rng` and jammer links with `jammer_rng`.
    pub fn evolve<R: Rng + ?Sized>(&mut self, rng: &mut R, jammer_rng: &mut R) {
        self.evolve_kind(LinkKind::BsToUser, rng);
        self.evolve_kind(LinkKind::JammerToUser, jammer_rng);
        self.evolve_kind(LinkKind::BsToJammer, jammer_rng);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rho_one_keeps_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut jrng = ChaCha8Rng::seed_from_u64(2);
        let mut f = FadingField::stationary(1.0, 2, 3, 4, &mut rng, &mut jrng);
        let before = f.clone();
        f.evolve(&mut rng, &mut jrng);
        assert_eq!(before.coefficients(LinkKind::BsToUser), f.coefficients(LinkKind::BsToUser));
        assert_eq!(before.coefficients(LinkKind::BsToJammer), f.coefficients(LinkKind::BsToJammer));
    }

    #[test]
    fn rho_zero_resamples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut jrng = ChaCha8Rng::seed_from_u64(2);
        let mut f = FadingField::constant(0.0, 1, 1, 8, Complex64::new(5.0, 0.0));
        f.evolve(&mut rng, &mut jrng);
        let mut expect_rng = ChaCha8Rng::seed_from_u64(1);
        for c in 0..8 {
            assert_eq!(f.bs_user(0, 0, c), sample_cn(&mut expect_rng));
        }
    }

    #[test]
    fn jammer_stream_does_not_touch_victim_links() {
        let mk = |jseed| {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut jrng = ChaCha8Rng::seed_from_u64(jseed);
            let mut f = FadingField::stationary(0.9, 2, 2, 2, &mut rng, &mut jrng);
            for _ in 0..10 {
                f.evolve(&mut rng, &mut jrng);
            }
            f.coefficients(LinkKind::BsToUser).to_vec()
        };
        assert_eq!(mk(1), mk(2));
    }
}
