//! Globally adaptive Gauss-Kronrod (10/21 point) quadrature.

use alloc::vec::Vec;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_645_914,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub converged: bool,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel, max_intervals: 2000 }
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * h;
    let res_abs = res_abs * h.abs();
    let res_asc = res_asc * h.abs();
    let mut err = ((res_k - res_g) * h).abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = libm::pow(200.0 * err / res_asc, 1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    let round = 50.0 * f64::EPSILON * res_abs;
    if round > f64::MIN_POSITIVE && err < round {
        err = round;
    }
    (value, err)
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Integrate `f` over `[points[0], points[last]]`, starting from the given subdivision.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: Tolerance) -> QuadResult {
    let mut ivs: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk21(&mut f, w[0], w[1]);
            ivs.push((w[0], w[1], v, e));
        }
    }
    loop {
        let total: f64 = ivs.iter().map(|iv| iv.2).sum();
        let err: f64 = ivs.iter().map(|iv| iv.3).sum();
        let target = tol.abs.max(tol.rel * total.abs());
        if err <= target || ivs.len() >= tol.max_intervals || !err.is_finite() {
            return QuadResult { value: total, abs_err: err, converged: err <= target, intervals: ivs.len() };
        }
        let (idx, _) = ivs
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, iv)| if iv.3 > best.1 { (i, iv.3) } else { best });
        let (a, b, _, _) = ivs[idx];
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return QuadResult { value: total, abs_err: err, converged: false, intervals: ivs.len() };
        }
        let (v1, e1) = gk21(&mut f, a, m);
        let (v2, e2) = gk21(&mut f, m, b);
        ivs[idx] = (a, m, v1, e1);
        ivs.push((m, b, v2, e2));
    }
}
