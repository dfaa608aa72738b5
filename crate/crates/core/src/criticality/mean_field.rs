use serde::{Deserialize, Serialize};

/// `J_c = (1 − g²)/2`, where the soft eigenvalue `λ₋` of the stability matrix vanishes.
pub fn critical_hopping(g: f64) -> f64 {
    0.5 * (1.0 - g * g)
}

/// Large-η mean-field picture at one `(g, J)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldResult {
    pub g: f64,
    pub j: f64,
    pub jc: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

pub fn mean_field(g: f64, j: f64) -> MeanFieldResult {
    let base = 1.0 - g * g;
    MeanFieldResult {
        g,
        j,
        jc: critical_hopping(g),
        lambda_plus: base + 2.0 * j,
        lambda_minus: base - 2.0 * j,
    }
}

impl MeanFieldResult {
    fn branch(&self, x_l: f64, x_r: f64, sign: f64) -> f64 {
        let g2 = self.g * self.g;
        let site = |x: f64| x * x + sign * (1.0 + 2.0 * g2 * x * x).sqrt();
        0.5 * (site(x_l) + site(x_r)) + 2.0 * self.j * x_l * x_r
    }

    /// Lower adiabatic branch `E₋(x_L, x_R)` (energies per `Ω`).
    pub fn energy_minus(&self, x_l: f64, x_r: f64) -> f64 {
        self.branch(x_l, x_r, -1.0)
    }

    pub fn energy_plus(&self, x_l: f64, x_r: f64) -> f64 {
        self.branch(x_l, x_r, 1.0)
    }

    /// Quadratic form `Λ` of `E₋` about the origin.
    pub fn stability_matrix(&self) -> [[f64; 2]; 2] {
        let d = 1.0 - self.g * self.g;
        [[d, 2.0 * self.j], [2.0 * self.j, d]]
    }

    pub fn is_normal_phase(&self) -> bool {
        self.lambda_minus > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_values() {
        assert_eq!(mean_field(0.5, 0.1).jc, 0.375);
        assert_eq!(mean_field(1.0, 0.0).jc, 0.0);
        let free = mean_field(0.0, 0.0);
        assert_eq!((free.lambda_plus, free.lambda_minus), (1.0, 1.0));
        for g in [0.0, 0.3, 0.5, 0.7, 0.8, 1.0] {
            let at_jc = mean_field(g, critical_hopping(g));
            assert!(at_jc.lambda_minus.abs() < 1e-15);
            assert!(at_jc.lambda_minus <= at_jc.lambda_plus);
        }
        assert!(mean_field(0.7, 0.2).is_normal_phase());
        assert!(!mean_field(0.7, 0.3).is_normal_phase());
    }

    #[test]
    fn hessian_of_lower_branch() {
        let step = 1e-4;
        for (g, j) in [(0.5, 0.1), (0.7, 0.255), (0.8, 0.4), (0.0, 0.3)] {
            let mf = mean_field(g, j);
            let e = |a: f64, b: f64| mf.energy_minus(a, b);
            let dll = (e(step, 0.0) - 2.0 * e(0.0, 0.0) + e(-step, 0.0)) / (step * step);
            let drr = (e(0.0, step) - 2.0 * e(0.0, 0.0) + e(0.0, -step)) / (step * step);
            let dlr = (e(step, step) - e(step, -step) - e(-step, step) + e(-step, -step))
                / (4.0 * step * step);
            let lam = mf.stability_matrix();
            assert!((dll - lam[0][0]).abs() < 1e-6, "{dll} vs {}", lam[0][0]);
            assert!((drr - lam[1][1]).abs() < 1e-6);
            assert!((dlr - lam[0][1]).abs() < 1e-6);
        }
    }

    #[test]
    fn branches_are_ordered() {
        let mf = mean_field(0.7, 0.3);
        for (a, b) in [(0.0, 0.0), (0.5, -0.3), (2.0, 1.0)] {
            assert!(mf.energy_minus(a, b) < mf.energy_plus(a, b));
        }
    }
}
