//! Adaptive Gauss–Kronrod (10/21) quadrature for vector-valued integrands.
//!
//! All components share one subdivision; an interval is split while the
//! summed error estimate of any component exceeds its tolerance.

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct Integral<const K: usize> {
    pub value: [f64; K],
    pub abs_error: [f64; K],
    pub intervals: usize,
}

impl<const K: usize> Integral<K> {
    /// Worst relative error estimate over the components.
    pub fn rel_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..K {
            let denom = self.value[k].abs();
            let r = if denom > 0.0 {
                self.abs_error[k] / denom
            } else if self.abs_error[k] == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(r);
        }
        worst
    }
}

#[derive(Clone, Copy)]
struct Piece<const K: usize> {
    a: f64,
    b: f64,
    value: [f64; K],
    err: [f64; K],
    absval: [f64; K],
}

fn gk21<const K: usize, F: Fn(f64) -> [f64; K]>(f: &F, a: f64, b: f64) -> Piece<K> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = [0.0; K];
    let mut rg = [0.0; K];
    let mut rabs = [0.0; K];
    let mut fv1 = [[0.0; K]; 10];
    let mut fv2 = [[0.0; K]; 10];
    for k in 0..K {
        rk[k] = WGK[10] * fc[k];
        rabs[k] = WGK[10] * fc[k].abs();
    }
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for k in 0..K {
            rk[k] += WGK[j] * (f1[k] + f2[k]);
            rabs[k] += WGK[j] * (f1[k].abs() + f2[k].abs());
            if j % 2 == 1 {
                rg[k] += WG[j / 2] * (f1[k] + f2[k]);
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }
    let mut err = [0.0; K];
    let mut value = [0.0; K];
    let mut absval = [0.0; K];
    for k in 0..K {
        let mean = 0.5 * rk[k];
        let mut asc = WGK[10] * (fc[k] - mean).abs();
        for j in 0..10 {
            asc += WGK[j] * ((fv1[j][k] - mean).abs() + (fv2[j][k] - mean).abs());
        }
        let asc = asc * h.abs();
        let raw = ((rk[k] - rg[k]) * h).abs();
        let mut e = raw;
        if asc != 0.0 && raw != 0.0 {
            e = asc * (200.0 * raw / asc).powf(1.5).min(1.0);
        }
        let resabs = rabs[k] * h.abs();
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * resabs);
        }
        value[k] = rk[k] * h;
        err[k] = e;
        absval[k] = resabs;
    }
    Piece { a, b, value, err, absval }
}

/// Integrate `f` over `[breaks[0], breaks[last]]`, starting from the given
/// breakpoints. Stops when every component meets `rel_tol` (relative to its
/// own value, floored near the round-off level of its absolute integral) or
/// after `max_intervals` pieces.
pub fn integrate<const K: usize, F: Fn(f64) -> [f64; K]>(
    f: F,
    breaks: &[f64],
    rel_tol: f64,
    max_intervals: usize,
) -> Integral<K> {
    assert!(breaks.len() >= 2);
    let mut pieces: Vec<Piece<K>> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk21(&f, w[0], w[1]))
        .collect();
    loop {
        let mut total = [0.0; K];
        let mut err = [0.0; K];
        let mut absval = [0.0; K];
        for pc in &pieces {
            for k in 0..K {
                total[k] += pc.value[k];
                err[k] += pc.err[k];
                absval[k] += pc.absval[k];
            }
        }
        let tol: [f64; K] =
            std::array::from_fn(|k| (rel_tol * total[k].abs()).max(100.0 * f64::EPSILON * absval[k]));
        let done = (0..K).all(|k| err[k] <= tol[k]);
        if done || pieces.len() >= max_intervals {
            return Integral {
                value: total,
                abs_error: err,
                intervals: pieces.len(),
            };
        }
        // split the piece carrying the largest tolerance-scaled error
        let mut worst = 0;
        let mut worst_score = -1.0;
        for (i, pc) in pieces.iter().enumerate() {
            let score = (0..K)
                .map(|k| if tol[k] > 0.0 { pc.err[k] / tol[k] } else { pc.err[k] })
                .fold(0.0f64, f64::max);
            if score > worst_score {
                worst_score = score;
                worst = i;
            }
        }
        let pc = pieces.swap_remove(worst);
        let mid = 0.5 * (pc.a + pc.b);
        if !(mid > pc.a && mid < pc.b) {
            // interval exhausted at machine precision
            return Integral {
                value: total,
                abs_error: err,
                intervals: pieces.len() + 1,
            };
        }
        pieces.push(gk21(&f, pc.a, mid));
        pieces.push(gk21(&f, mid, pc.b));
    }
}

/// Scalar convenience wrapper.
pub fn integrate1<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    let r = integrate(|x| [f(x)], &[a, b], rel_tol, 4000);
    (r.value[0], r.abs_error[0])
}
