//! Line-of-sight BS–RIS channel from planar-array geometry, Rayleigh RIS–UE
//! fading, and the cascaded channel `V = diag(h)·H`.
//!
//! The LoS channel is the outer product `a_K a_Mᴴ`, so `V` is kept in
//! factored form: `V = (h ⊙ a_K) a_Mᴴ`. Dense matrices are built only on
//! request for cross-checks.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::vector::{ComplexVector, DenseMatrix};

/// Square planar array with `side × side` elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UspaGeometry {
    element_count: usize,
    side: usize,
    spacing_ratio: f64,
}

impl UspaGeometry {
    /// `spacing_ratio` is the element spacing in wavelengths (d/λ).
    pub fn new(element_count: usize, spacing_ratio: f64) -> Result<Self> {
        let side = exact_sqrt(element_count).ok_or_else(|| {
            Error::Configuration(format!(
                "array element count {element_count} is not a positive perfect square"
            ))
        })?;
        if !(spacing_ratio > 0.0 && spacing_ratio.is_finite()) {
            return Err(Error::Configuration(format!(
                "spacing ratio must be positive and finite, got {spacing_ratio}"
            )));
        }
        Ok(Self {
            element_count,
            side,
            spacing_ratio,
        })
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn spacing_ratio(&self) -> f64 {
        self.spacing_ratio
    }
}

/// Integer square root when `n` is a positive perfect square.
pub fn exact_sqrt(n: usize) -> Option<usize> {
    if n == 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

/// Azimuth and elevation in radians. No range normalization is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringAngles {
    pub azimuth: f64,
    pub elevation: f64,
}

impl SteeringAngles {
    pub fn new(azimuth: f64, elevation: f64) -> Result<Self> {
        if !(azimuth.is_finite() && elevation.is_finite()) {
            return Err(domain("steering angles must be finite"));
        }
        Ok(Self { azimuth, elevation })
    }
}

/// Array response of a square planar array.
///
/// Element `(x, y)` sits at index `x·side + y` and carries phase
/// `2π (d/λ)(x sinθᵃ sinθᵉ + y cosθᵉ)`; element `(0, 0)` is 1.
pub fn array_response(geometry: &UspaGeometry, angles: &SteeringAngles) -> ComplexVector {
    let side = geometry.side();
    let kx = TAU * geometry.spacing_ratio() * angles.azimuth.sin() * angles.elevation.sin();
    let ky = TAU * geometry.spacing_ratio() * angles.elevation.cos();
    let mut entries = Vec::with_capacity(geometry.element_count());
    for x in 0..side {
        for y in 0..side {
            let phase = x as f64 * kx + y as f64 * ky;
            entries.push(Complex64::from_polar(1.0, phase));
        }
    }
    ComplexVector::from_vec_unchecked(entries)
}

/// Uniform linear array response, entry `i` has phase `2π(d/λ)·i·sin(angle)`.
pub fn linear_array_response(
    count: usize,
    spacing_ratio: f64,
    angle: f64,
) -> Result<ComplexVector> {
    if count == 0 {
        return Err(Error::Configuration(
            "array element count must be positive".into(),
        ));
    }
    if !(spacing_ratio > 0.0 && spacing_ratio.is_finite()) || !angle.is_finite() {
        return Err(domain(
            "linear_array_response: spacing must be positive and angle finite",
        ));
    }
    let step = TAU * spacing_ratio * angle.sin();
    Ok(ComplexVector::from_vec_unchecked(
        (0..count)
            .map(|i| Complex64::from_polar(1.0, step * i as f64))
            .collect(),
    ))
}

/// Rank-1 LoS channel `H = a_K a_Mᴴ` between a K-element RIS and an
/// M-antenna BS, stored as its two factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LosChannel {
    rx_response: ComplexVector,
    tx_response: ComplexVector,
}

impl LosChannel {
    /// LoS channel from explicit steering vectors, e.g. for arrays that are
    /// not square planar. Every entry must have unit modulus (within 1e-12).
    pub fn from_responses(rx_response: ComplexVector, tx_response: ComplexVector) -> Result<Self> {
        for (name, v) in [("rx_response", &rx_response), ("tx_response", &tx_response)] {
            if v.iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
                return Err(Error::Configuration(format!(
                    "{name} entries must have unit modulus"
                )));
            }
        }
        Ok(Self {
            rx_response,
            tx_response,
        })
    }

    pub fn rx_response(&self) -> &ComplexVector {
        &self.rx_response
    }

    pub fn tx_response(&self) -> &ComplexVector {
        &self.tx_response
    }

    pub fn k_elements(&self) -> usize {
        self.rx_response.len()
    }

    pub fn m_antennas(&self) -> usize {
        self.tx_response.len()
    }

    /// Dense K×M matrix `a_K a_Mᴴ`.
    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.k_elements(), self.m_antennas(), |i, j| {
            self.rx_response[i] * self.tx_response[j].conj()
        })
    }
}

pub fn los_channel(
    ris_geometry: &UspaGeometry,
    ris_angles: &SteeringAngles,
    bs_geometry: &UspaGeometry,
    bs_angles: &SteeringAngles,
) -> LosChannel {
    LosChannel {
        rx_response: array_response(ris_geometry, ris_angles),
        tx_response: array_response(bs_geometry, bs_angles),
    }
}

/// Geometry of a complete BS–RIS deployment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub ris: UspaGeometry,
    pub ris_angles: SteeringAngles,
    pub bs: UspaGeometry,
    pub bs_angles: SteeringAngles,
}

impl LinkGeometry {
    /// All four angles at π/4 with half-wavelength spacing on both arrays.
    pub fn symmetric(k_elements: usize, m_antennas: usize) -> Result<Self> {
        let angles = SteeringAngles::new(PI / 4.0, PI / 4.0)?;
        Ok(Self {
            ris: UspaGeometry::new(k_elements, 0.5)?,
            ris_angles: angles,
            bs: UspaGeometry::new(m_antennas, 0.5)?,
            bs_angles: angles,
        })
    }

    pub fn los_channel(&self) -> LosChannel {
        los_channel(&self.ris, &self.ris_angles, &self.bs, &self.bs_angles)
    }
}

/// One draw of `CN(0, 1)`: real and imaginary parts are independent N(0, ½).
///
/// Consumes exactly two uniforms: the modulus is `sqrt(-ln(1-u₁))` (|h|² is
/// unit-mean exponential) and the phase is `2πu₂`.
#[inline]
fn standard_complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    Complex64::from_polar(rayleigh_modulus(u1), TAU * u2)
}

#[inline]
fn rayleigh_modulus(u: f64) -> f64 {
    (-(1.0 - u).ln()).sqrt()
}

/// K i.i.d. circularly-symmetric unit-variance complex Gaussian gains.
pub fn sample_fading<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<ComplexVector> {
    if k == 0 {
        return Err(domain("sample_fading: K must be at least 1"));
    }
    Ok(ComplexVector::from_vec_unchecked(
        (0..k).map(|_| standard_complex_normal(rng)).collect(),
    ))
}

/// `Σ|hᵢ|` for the K gains that [`sample_fading`] would draw from the same
/// stream state, without forming the phases.
#[inline]
pub fn sample_fading_magnitude_sum<R: Rng + ?Sized>(k: usize, rng: &mut R) -> f64 {
    let mut sum = 0.0;
    for _ in 0..k {
        let u1: f64 = rng.random();
        let _phase: f64 = rng.random();
        sum += rayleigh_modulus(u1);
    }
    sum
}

/// Cascaded channel `V = diag(h)·a_K a_Mᴴ = g a_Mᴴ` with `g = h ⊙ a_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadedChannel {
    ris_factor: ComplexVector,
    tx_response: ComplexVector,
    fading: ComplexVector,
}

impl CascadedChannel {
    /// `g = h ⊙ a_K`.
    pub fn ris_factor(&self) -> &ComplexVector {
        &self.ris_factor
    }

    /// `a_M`.
    pub fn tx_response(&self) -> &ComplexVector {
        &self.tx_response
    }

    /// `h`.
    pub fn fading(&self) -> &ComplexVector {
        &self.fading
    }

    pub fn k_elements(&self) -> usize {
        self.ris_factor.len()
    }

    pub fn m_antennas(&self) -> usize {
        self.tx_response.len()
    }

    /// Dense K×M matrix `V`.
    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.k_elements(), self.m_antennas(), |i, j| {
            self.ris_factor[i] * self.tx_response[j].conj()
        })
    }
}

pub fn cascaded_channel(h: &ComplexVector, los: &LosChannel) -> Result<CascadedChannel> {
    los.rx_response().check_len(h.len())?;
    let ris_factor = h
        .iter()
        .zip(los.rx_response())
        .map(|(hi, ai)| hi * ai)
        .collect();
    Ok(CascadedChannel {
        ris_factor: ComplexVector::from_vec_unchecked(ris_factor),
        tx_response: los.tx_response().clone(),
        fading: h.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quarter_pi_angles() -> SteeringAngles {
        SteeringAngles::new(PI / 4.0, PI / 4.0).unwrap()
    }

    #[test]
    fn linear_response_phases() {
        let a = linear_array_response(3, 0.5, PI / 2.0).unwrap();
        assert!((a[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((a[2] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(linear_array_response(0, 0.5, 0.1).is_err());
        assert!(linear_array_response(2, 0.0, 0.1).is_err());
    }

    #[test]
    fn explicit_responses_must_be_unimodular() {
        let ok = ComplexVector::new(vec![
            Complex64::from_polar(1.0, 0.3),
            Complex64::from_polar(1.0, -2.0),
        ])
        .unwrap();
        let bad = ComplexVector::from_real(&[1.0, 0.5]).unwrap();
        let los = LosChannel::from_responses(ok.clone(), ok.clone()).unwrap();
        assert_eq!(los.k_elements(), 2);
        assert!(LosChannel::from_responses(bad.clone(), ok.clone()).is_err());
        assert!(LosChannel::from_responses(ok, bad).is_err());
    }

    #[test]
    fn geometry_requires_perfect_square() {
        assert!(UspaGeometry::new(16, 0.5).is_ok());
        assert!(UspaGeometry::new(1, 0.5).is_ok());
        for bad in [0, 2, 15, 17, 35] {
            assert!(matches!(
                UspaGeometry::new(bad, 0.5),
                Err(Error::Configuration(_))
            ));
        }
        assert!(UspaGeometry::new(4, 0.0).is_err());
        assert!(UspaGeometry::new(4, f64::NAN).is_err());
        assert_eq!(exact_sqrt(36), Some(6));
        assert_eq!(exact_sqrt(1 << 40), Some(1 << 20));
    }

    #[test]
    fn single_element_response_is_one() {
        let a = array_response(
            &UspaGeometry::new(1, 0.5).unwrap(),
            &SteeringAngles::new(0.3, 1.2).unwrap(),
        );
        assert_eq!(a.as_slice(), &[Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn four_element_response_by_hand() {
        let a = array_response(&UspaGeometry::new(4, 0.5).unwrap(), &quarter_pi_angles());
        // sinθᵃ sinθᵉ = 0.5, cosθᵉ = 1/√2; index = x·2 + y
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let want = [0.0, PI * c, PI * 0.5, PI * (0.5 + c)];
        for (z, phase) in a.iter().zip(want) {
            assert!((z - Complex64::from_polar(1.0, phase)).norm() < 1e-14);
        }
    }

    #[test]
    fn sixteen_element_response_has_unit_entries() {
        let a = array_response(&UspaGeometry::new(16, 0.5).unwrap(), &quarter_pi_angles());
        assert!(a.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert!((a.norm_sqr() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn los_channel_shapes_and_norm() {
        let one = UspaGeometry::new(1, 0.5).unwrap();
        let h = los_channel(&one, &quarter_pi_angles(), &one, &quarter_pi_angles());
        assert_eq!(h.to_dense().get(0, 0), Complex64::new(1.0, 0.0));

        let ris = UspaGeometry::new(16, 0.5).unwrap();
        let bs = UspaGeometry::new(36, 0.3).unwrap();
        let h = los_channel(
            &ris,
            &SteeringAngles::new(0.2, 1.1).unwrap(),
            &bs,
            &quarter_pi_angles(),
        );
        let dense = h.to_dense();
        assert_eq!((dense.rows(), dense.cols()), (16, 36));
        assert!((dense.frobenius_norm() - (16.0f64 * 36.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn fading_is_deterministic_for_a_stream_state() {
        let a = sample_fading(8, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = sample_fading(8, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert!(sample_fading(0, &mut ChaCha8Rng::seed_from_u64(7)).is_err());
    }

    #[test]
    fn magnitude_sum_matches_full_draw() {
        for seed in 0..20 {
            let h = sample_fading(9, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let y = sample_fading_magnitude_sum(9, &mut ChaCha8Rng::seed_from_u64(seed));
            let from_h: f64 = h.iter().map(|z| z.norm()).sum();
            assert!(((y - from_h) / y).abs() < 1e-14);
        }
    }

    #[test]
    fn fading_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let (mut p, mut m) = (0.0, 0.0);
        for _ in 0..n {
            let h = standard_complex_normal(&mut rng);
            p += h.norm_sqr();
            m += h.norm();
        }
        let (p, m) = (p / n as f64, m / n as f64);
        assert!((p - 1.0).abs() < 0.01, "E|h|^2 = {p}");
        assert!((m / (PI.sqrt() / 2.0) - 1.0).abs() < 0.01, "E|h| = {m}");
    }

    #[test]
    fn cascade_examples() {
        let one = UspaGeometry::new(1, 0.5).unwrap();
        let los = los_channel(&one, &quarter_pi_angles(), &one, &quarter_pi_angles());
        let h = ComplexVector::from_real(&[1.0]).unwrap();
        let v = cascaded_channel(&h, &los).unwrap();
        assert_eq!(v.to_dense().get(0, 0), Complex64::new(1.0, 0.0));

        let los = LinkGeometry::symmetric(4, 4).unwrap().los_channel();
        let h = ComplexVector::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, -1.0),
            Complex64::new(2.0, 0.1),
            Complex64::new(-0.3, 0.3),
        ])
        .unwrap();
        let v = cascaded_channel(&h, &los).unwrap().to_dense();
        assert!(v.row(0).iter().all(|z| *z == Complex64::new(0.0, 0.0)));

        let short = ComplexVector::from_real(&[1.0, 2.0]).unwrap();
        assert!(matches!(
            cascaded_channel(&short, &los),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn cascade_matches_naive_dense_product() {
        let link = LinkGeometry {
            ris: UspaGeometry::new(16, 0.5).unwrap(),
            ris_angles: SteeringAngles::new(0.4, 1.0).unwrap(),
            bs: UspaGeometry::new(4, 0.5).unwrap(),
            bs_angles: SteeringAngles::new(-0.7, 0.2).unwrap(),
        };
        let los = link.los_channel();
        let h = sample_fading(16, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let v = cascaded_channel(&h, &los).unwrap();
        assert!(v.iter_invariant_holds());
        let dense_h = los.to_dense();
        let got = v.to_dense();
        // diag(h)·H by explicit triple loop
        for i in 0..16 {
            for j in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..16 {
                    let d = if l == i {
                        h[i]
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    acc += d * dense_h.get(l, j);
                }
                assert!((acc - got.get(i, j)).norm() < 1e-14);
            }
        }
    }

    impl CascadedChannel {
        fn iter_invariant_holds(&self) -> bool {
            self.ris_factor
                .iter()
                .zip(&self.fading)
                .all(|(g, h)| (g.norm() - h.norm()).abs() <= 1e-12 * h.norm().max(1.0))
        }
    }
}
