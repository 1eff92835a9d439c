//! Symmetric Gaussian quadrature rules on the reference triangle
//! `(0,0), (1,0), (0,1)`.
//!
//! Weights sum to 1, so an integral over a physical triangle `K` is
//! `|K| * sum(w_i * f(x_i))`. Over the reference triangle itself the area
//! factor is 1/2.

/// A fixed quadrature rule: points in reference coordinates, weights
/// normalized to sum to 1.
#[derive(Debug, Clone, Copy)]
pub struct QuadRule {
    pub points: &'static [[f64; 2]],
    pub weights: &'static [f64],
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadRule {
    /// Integrates `f` over the reference triangle (area 1/2 included).
    pub fn integrate_ref(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        0.5 * self
            .points
            .iter()
            .zip(self.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum::<f64>()
    }
}

/// Midpoint rule, exact for linears.
pub const CENTROID: QuadRule = QuadRule {
    points: &[[1.0 / 3.0, 1.0 / 3.0]],
    weights: &[1.0],
    degree: 1,
};

/// Three interior points, exact for quadratics.
pub const DEG2: QuadRule = QuadRule {
    points: &[
        [1.0 / 6.0, 1.0 / 6.0],
        [2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0],
    ],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    degree: 2,
};

const D4_A: f64 = 0.445_948_490_915_964_886_32;
const D4_B: f64 = 0.091_576_213_509_770_743_46;
const D4_WA: f64 = 0.223_381_589_678_011_465_70;
const D4_WB: f64 = 0.109_951_743_655_321_867_64;

/// Six points in two symmetric orbits, exact for quartics.
pub const DEG4: QuadRule = QuadRule {
    points: &[
        [D4_A, D4_A],
        [1.0 - 2.0 * D4_A, D4_A],
        [D4_A, 1.0 - 2.0 * D4_A],
        [D4_B, D4_B],
        [1.0 - 2.0 * D4_B, D4_B],
        [D4_B, 1.0 - 2.0 * D4_B],
    ],
    weights: &[D4_WA, D4_WA, D4_WA, D4_WB, D4_WB, D4_WB],
    degree: 4,
};

const D6_A: f64 = 0.249_286_745_170_910_421_29;
const D6_B: f64 = 0.063_089_014_491_502_228_34;
const D6_C1: f64 = 0.310_352_451_033_784_405_42;
const D6_C2: f64 = 0.053_145_049_844_816_947_35;
const D6_C3: f64 = 1.0 - D6_C1 - D6_C2;
const D6_WA: f64 = 0.116_786_275_726_379_366_03;
const D6_WB: f64 = 0.050_844_906_370_206_816_92;
const D6_WC: f64 = 0.082_851_075_618_373_575_19;

/// Twelve points in three symmetric orbits, exact for degree 6.
pub const DEG6: QuadRule = QuadRule {
    points: &[
        [D6_A, D6_A],
        [1.0 - 2.0 * D6_A, D6_A],
        [D6_A, 1.0 - 2.0 * D6_A],
        [D6_B, D6_B],
        [1.0 - 2.0 * D6_B, D6_B],
        [D6_B, 1.0 - 2.0 * D6_B],
        [D6_C1, D6_C2],
        [D6_C2, D6_C1],
        [D6_C1, D6_C3],
        [D6_C3, D6_C1],
        [D6_C2, D6_C3],
        [D6_C3, D6_C2],
    ],
    weights: &[
        D6_WA, D6_WA, D6_WA, D6_WB, D6_WB, D6_WB, D6_WC, D6_WC, D6_WC, D6_WC, D6_WC, D6_WC,
    ],
    degree: 6,
};

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Exact value of `int x^i y^j` over the reference triangle.
    fn monomial_integral(i: usize, j: usize) -> f64 {
        factorial(i) * factorial(j) / factorial(i + j + 2)
    }

    fn check_rule(rule: &QuadRule) {
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 1.0).abs() < 1e-15, "weights sum to {wsum}");
        for p in rule.points {
            assert!(p[0] > 0.0 && p[1] > 0.0 && p[0] + p[1] < 1.0, "point outside: {p:?}");
        }
        for i in 0..=rule.degree {
            for j in 0..=(rule.degree - i) {
                let got = rule.integrate_ref(|x, y| x.powi(i as i32) * y.powi(j as i32));
                let want = monomial_integral(i, j);
                assert!(
                    (got - want).abs() <= 1e-14 * want.abs(),
                    "x^{i} y^{j}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn centroid_rule_exact_degree_1() {
        check_rule(&CENTROID);
    }

    #[test]
    fn three_point_rule_exact_degree_2() {
        check_rule(&DEG2);
    }

    #[test]
    fn six_point_rule_exact_degree_4() {
        check_rule(&DEG4);
    }

    #[test]
    fn twelve_point_rule_exact_degree_6() {
        check_rule(&DEG6);
    }

    #[test]
    fn degree_is_sharp_for_higher_monomials() {
        // One degree past the stated exactness the rules must NOT be exact
        // (sanity that `degree` is honest, not conservative).
        for rule in [&CENTROID, &DEG2, &DEG4, &DEG6] {
            let d = rule.degree + 1;
            let worst = (0..=d)
                .map(|i| {
                    let j = d - i;
                    let got = rule.integrate_ref(|x, y| x.powi(i as i32) * y.powi(j as i32));
                    (got - monomial_integral(i, j)).abs()
                })
                .fold(0.0f64, f64::max);
            assert!(worst > 1e-12, "rule of degree {} looks exact at degree {d}", rule.degree);
        }
    }
}
