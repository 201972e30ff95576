//! Gauss-Legendre rules, adaptive Gauss-Kronrod, and cumulative panel integrals.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

/// One G7-K15 panel: `(kronrod estimate, |kronrod - gauss|)`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let center = f(mid);
    let mut kronrod = center * KRONROD_WEIGHTS[7];
    let mut gauss = center * GAUSS7_WEIGHTS[3];
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod quadrature to absolute tolerance `tol`.
///
/// Refinement also stops once a panel's error estimate is at the rounding
/// level of the whole integral, so noisy integrands cannot recurse forever.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, floor: f64, depth: u32) -> f64 {
        let (value, err) = gk15(f, a, b);
        if !err.is_finite() || err <= tol.max(floor) || depth == 0 || (b - a).abs() < 1e-15 * (a.abs() + b.abs()).max(1e-300) {
            return value;
        }
        let mid = 0.5 * (a + b);
        recurse(f, a, mid, 0.5 * tol, floor, depth - 1) + recurse(f, mid, b, 0.5 * tol, floor, depth - 1)
    }
    let (whole, _) = gk15(&f, a, b);
    recurse(&f, a, b, tol, 1e-15 * whole.abs(), 50)
}

/// Cumulative integral of a smooth integrand over `[0, 1]`.
///
/// The interval is split into equal panels, each integrated with a fixed
/// Gauss-Legendre rule; partial integrals inside a panel use the same rule
/// mapped onto the sub-interval.
#[derive(Clone, Debug)]
pub struct PanelIntegral {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `cumulative[i]` = integral over `[0, i / panels]`.
    cumulative: Vec<f64>,
}

impl PanelIntegral {
    pub fn new<F: Fn(f64) -> f64>(f: &F, panels: usize, order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        let mut cumulative = Vec::with_capacity(panels + 1);
        cumulative.push(0.0);
        let width = 1.0 / panels as f64;
        let mut acc = 0.0;
        for i in 0..panels {
            let a = i as f64 * width;
            acc += rule(f, &nodes, &weights, a, a + width);
            cumulative.push(acc);
        }
        Self { nodes, weights, cumulative }
    }

    pub fn panels(&self) -> usize {
        self.cumulative.len() - 1
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("at least one panel")
    }

    /// Integral over `[0, t]`, `t` clamped to `[0, 1]`.
    pub fn cumulative<F: Fn(f64) -> f64>(&self, f: &F, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let panels = self.panels();
        let width = 1.0 / panels as f64;
        let i = ((t / width) as usize).min(panels - 1);
        let a = i as f64 * width;
        if t == a {
            return self.cumulative[i];
        }
        self.cumulative[i] + rule(f, &self.nodes, &self.weights, a, t)
    }
}

fn rule<F: Fn(f64) -> f64>(f: &F, nodes: &[f64], weights: &[f64], a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    nodes.iter().zip(weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}
