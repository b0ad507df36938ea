//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any failed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use deformsynth::analytics::{
    confusion, evaluate_manifest, f1_score, manifest_features, metrics, pca_fit, rows_to_matrix, total_variance, train, ConfusionMatrix,
    LinearModel,
};
use deformsynth::composite::{close, dilate, erode, open, BinaryMask, KEY_GREEN};
use deformsynth::config::Config;
use deformsynth::dataset::{generate_dataset, split, BackgroundMode, DatasetManifest, Generator};
use deformsynth::deform::{ffd_evaluate, Lattice};
use deformsynth::{Label, Vec3};
use image::{Rgb, RgbImage};
use nalgebra::{DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_deformsynth")
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

/// Relative path → bytes for every file under `root`.
fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

struct Ctx {
    dir: tempfile::TempDir,
}

impl Ctx {
    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }
}

// ---- 1. determinism ----

fn determinism(ctx: &Ctx) -> Outcome {
    let a = ctx.path("det_a");
    let b = ctx.path("det_b");
    let t0 = Instant::now();
    run_cli(&["generate", "-n", "200", "--seed", "7", "--jobs", "1", "--out", a.to_str().unwrap()])?;
    let first = t0.elapsed();
    run_cli(&["generate", "-n", "200", "--seed", "7", "--jobs", "4", "--out", b.to_str().unwrap()])?;
    let rerun = run_cli(&["generate", "-n", "200", "--seed", "7", "--jobs", "2", "--out", a.to_str().unwrap()])?;
    let (ta, tb) = (tree(&a), tree(&b));
    let identical = ta == tb;
    let files = ta.len();
    check(
        identical && files == 401 && rerun.contains("0 files changed") && first < Duration::from_secs(300),
        format!("{files} files identical across --jobs 1/4: {identical}; rerun reports `0 files changed`; first run {first:.1?}"),
    )
}

// ---- 2. structure of the 200-sample run ----

fn structure(ctx: &Ctx) -> Outcome {
    let m = DatasetManifest::load(&ctx.path("det_a/manifest.jsonl")).map_err(|e| e.to_string())?;
    let g = Generator::new(&Config::default(), BackgroundMode::Black).map_err(|e| e.to_string())?;
    let keys = g.rig().keys();
    let theta = [[20.0, 70.0], [110.0, 160.0], [200.0, 250.0], [290.0, 340.0]];
    let (mut deformed, mut intact, mut bad) = (0, 0, Vec::new());
    let mut min_categories = usize::MAX;
    for (i, e) in m.entries.iter().enumerate() {
        let s = e.sample.as_ref().ok_or("missing sample spec")?;
        match s.label {
            Label::Deformed => {
                deformed += 1;
                let c = s.deformation.active_categories(keys).len();
                min_categories = min_categories.min(c);
                if c < 3 {
                    bad.push(format!("{i}: {c} categories"));
                }
            }
            Label::NonDeformed => intact += 1,
        }
        if s.deformation.tab_open > s.deformation.seal_open {
            bad.push(format!("{i}: tab > seal"));
        }
        let q = s.pose.quadrant as usize;
        let [lo, hi] = theta[q - 1];
        if q != 1 + i % 4 || !(lo..=hi).contains(&s.pose.theta) || !(50.0..=70.0).contains(&s.pose.phi) || !(0.3..=0.45).contains(&s.pose.r) {
            bad.push(format!("{i}: pose {:?}", s.pose));
        }
    }
    check(
        deformed == 100 && intact == 100 && bad.is_empty(),
        format!("{deformed}/{intact} split, min active lattice categories {min_categories}, violations {bad:?}"),
    )
}

// ---- 3. FFD affine precision ----

fn ffd_affine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let lo = Vec3::new(rng.random_range(-1.0..0.0), rng.random_range(-1.0..0.0), rng.random_range(-1.0..0.0));
        let hi = lo + Vec3::new(rng.random_range(0.1..1.0), rng.random_range(0.1..1.0), rng.random_range(0.1..1.0));
        let a = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let sign = |r: &mut ChaCha8Rng| if r.random::<bool>() { 1.0 } else { -1.0 };
        let b = Vec3::new(
            sign(&mut rng) * rng.random_range(6.0..8.0),
            sign(&mut rng) * rng.random_range(6.0..8.0),
            sign(&mut rng) * rng.random_range(6.0..8.0),
        );
        let res = [rng.random_range(2..6), rng.random_range(2..6), rng.random_range(2..6)];
        let mut lat = Lattice::new(res, lo, hi).map_err(|e| e.to_string())?;
        lat.map_points(|p, _| a * p + b);
        for _ in 0..10 {
            let p = lo + (hi - lo).component_mul(&Vec3::new(rng.random(), rng.random(), rng.random()));
            let want = a * p + b;
            let got = ffd_evaluate(&lat, &p);
            worst = worst.max((got - want).norm() / want.norm());
        }
    }
    check(worst < 1e-9, format!("max relative error {worst:.3e} over 1000 transforms x 10 points"))
}

// ---- 4. morphology vs naive window ----

fn naive(m: &BinaryMask, r: i64, erode: bool) -> BinaryMask {
    let (w, h) = (m.width() as i64, m.height() as i64);
    BinaryMask::from_fn(m.width(), m.height(), |x, y| {
        let mut all = true;
        let mut any = false;
        for dy in -r..=r {
            for dx in -r..=r {
                let (xx, yy) = (x as i64 + dx, y as i64 + dy);
                let v = xx >= 0 && yy >= 0 && xx < w && yy < h && m.get(xx as u32, yy as u32);
                all &= v;
                any |= v;
            }
        }
        if erode {
            all
        } else {
            any
        }
    })
}

fn morphology() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    for _ in 0..100 {
        let density = rng.random_range(0.2..0.9);
        let m = BinaryMask::from_fn(32, 32, |_, _| rng.random::<f64>() < density);
        for r in 1..=3u32 {
            let ri = r as i64;
            let ne = naive(&m, ri, true);
            let nd = naive(&m, ri, false);
            let pairs = [
                (erode(&m, r), ne.clone()),
                (dilate(&m, r), nd.clone()),
                (open(&m, r), naive(&ne, ri, false)),
                (close(&m, r), naive(&nd, ri, true)),
            ];
            mismatches += pairs.iter().filter(|(a, b)| a != b).count();
        }
    }
    check(mismatches == 0, format!("{mismatches} mismatches over 100 masks x radii 1..3 x 4 ops"))
}

// ---- 5. compositing on a pool batch ----

fn write_pool(dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..12u32 {
        let (w, h) = [(640, 480), (300, 300), (200, 350), (1024, 768)][i as usize % 4];
        let img = match i % 4 {
            0 => RgbImage::from_fn(w, h, |_, _| Rgb([rng.random(), rng.random(), rng.random()])),
            1 => RgbImage::from_fn(w, h, |x, y| Rgb([(x * 255 / w) as u8, (y * 255 / h) as u8, ((x + y) % 256) as u8])),
            2 => RgbImage::from_pixel(w, h, Rgb(KEY_GREEN)),
            _ => {
                let base: [u8; 3] = [rng.random(), rng.random(), rng.random()];
                RgbImage::from_fn(w, h, |x, y| if (x / 37 + y / 23) % 2 == 0 { Rgb(base) } else { Rgb(KEY_GREEN) })
            }
        };
        let ext = if i % 3 == 0 { "jpg" } else { "png" };
        img.save(dir.join(format!("bg_{i:02}.{ext}"))).unwrap();
    }
}

fn pool_config(ctx: &Ctx) -> Config {
    let mut cfg = Config::default();
    cfg.paths.background_dir = Some(ctx.path("pool"));
    cfg
}

fn compositing(ctx: &Ctx) -> Outcome {
    write_pool(&ctx.path("pool"));
    let cfg = pool_config(ctx);
    let summary = generate_dataset(&cfg, 100, BackgroundMode::Pool, &ctx.path("pool_batch"), 0).map_err(|e| e.to_string())?;
    let g = Generator::new(&cfg, BackgroundMode::Pool).map_err(|e| e.to_string())?;
    let mut key_pixels = 0usize;
    let mut min_iou = f64::INFINITY;
    for e in &summary.manifest.entries {
        let img = image::open(summary.manifest.image_path(e)).map_err(|e| e.to_string())?.to_rgb8();
        key_pixels += img.pixels().filter(|p| p.0 == KEY_GREEN).count();
        let s = g.sample(e.index).map_err(|e| e.to_string())?;
        min_iou = min_iou.min(s.mask.iou(&s.coverage));
    }
    check(
        key_pixels == 0 && min_iou >= 0.95,
        format!("{key_pixels} key-green pixels in 100 composites; min per-sample IoU(refined mask, coverage) {min_iou:.4}"),
    )
}

// ---- 6. confusion and metrics ----

fn metrics_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = 0;
    for v in 0..10_000 {
        let n = if v < 10 { 10_000 } else { rng.random_range(1..=300) };
        let labels: Vec<Label> = (0..n).map(|_| if rng.random() { Label::Deformed } else { Label::NonDeformed }).collect();
        let preds: Vec<Label> = (0..n).map(|_| if rng.random() { Label::Deformed } else { Label::NonDeformed }).collect();
        let mut counts = [[0u64; 2]; 2];
        for (a, p) in labels.iter().zip(&preds) {
            counts[(*a == Label::Deformed) as usize][(*p == Label::Deformed) as usize] += 1;
        }
        let (tp, fnn, fp, tn) = (counts[1][1], counts[1][0], counts[0][1], counts[0][0]);
        let cm = confusion(&labels, &preds).unwrap();
        let m = metrics(&cm).unwrap();
        let acc = (tp + tn) as f64 / n as f64;
        let prec = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let rec = if tp + fnn == 0 { 0.0 } else { tp as f64 / (tp + fnn) as f64 };
        let f1 = if prec + rec == 0.0 { 0.0 } else { 2.0 * prec * rec / (prec + rec) };
        let same = cm == ConfusionMatrix { tp, fp, fn_: fnn, tn }
            && m.accuracy == acc
            && m.precision == prec
            && m.recall == rec
            && (m.f1 - f1).abs() <= 1e-15
            && (m.accuracy * n as f64).round() as u64 == tp + tn;
        bad += !same as usize;
    }
    let f1 = f1_score(0.997, 1.0);
    let via_matrix = metrics(&ConfusionMatrix { tp: 997, fp: 3, fn_: 0, tn: 1000 }).unwrap().f1;
    check(
        bad == 0 && (f1 - 0.998).abs() <= 0.0005 && (via_matrix - f1).abs() < 1e-12,
        format!("{bad} disagreements over 10^4 vectors; F1(p=0.997, r=1.0) = {f1:.6}"),
    )
}

// ---- 7. baseline end-to-end ----

fn baseline(ctx: &Ctx) -> Outcome {
    let t0 = Instant::now();
    let cfg = Config::default();
    let summary = generate_dataset(&cfg, 1000, BackgroundMode::Black, &ctx.path("black_1000"), 0).map_err(|e| e.to_string())?;
    let m = summary.manifest;
    let s = split(&m, 0.8, cfg.seed).map_err(|e| e.to_string())?;
    let (train_m, test_m) = (m.subset(&s.train, "train"), m.subset(&s.test, "test"));
    let (xs, labels) = manifest_features(&train_m).map_err(|e| e.to_string())?;
    let model = train(&xs, &labels, &cfg.baseline, cfg.seed).map_err(|e| e.to_string())?.model;
    let (cm, rep) = evaluate_manifest(&model, &test_m).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    check(
        rep.accuracy >= 0.85 && elapsed < Duration::from_secs(600) && s.train.len() == 800,
        format!("test accuracy {:.4} on {} held out (tp {} fp {} fn {} tn {}); {elapsed:.1?}", rep.accuracy, cm.total(), cm.tp, cm.fp, cm.fn_, cm.tn),
    )
}

// ---- 8. PCA ----

/// Cyclic Jacobi eigensolver; returns (eigenvalues, eigenvectors as columns).
fn jacobi(mut a: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

fn pca(ctx: &Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut eig_err, mut vec_err) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let data = DMatrix::from_fn(10, 4, |_, _| rng.random_range(-1.0..1.0));
        let p = pca_fit(&data, 4).map_err(|e| e.to_string())?;
        let mean: Vec<f64> = (0..4).map(|j| data.column(j).sum() / 10.0).collect();
        let cov = DMatrix::from_fn(4, 4, |a, b| (0..10).map(|i| (data[(i, a)] - mean[a]) * (data[(i, b)] - mean[b])).sum::<f64>() / 9.0);
        let (vals, vecs) = jacobi(cov);
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        for (r, &c) in order.iter().enumerate() {
            eig_err = eig_err.max((p.variances[r] - vals[c]).abs());
            let comp = p.components.row(r).transpose();
            let oracle = vecs.column(c).into_owned();
            vec_err = vec_err.max((&comp - &oracle).norm().min((&comp + &oracle).norm()));
        }
    }

    let cfg = pool_config(ctx);
    let black = generate_dataset(&cfg, 100, BackgroundMode::Black, &ctx.path("black_100"), 0).map_err(|e| e.to_string())?.manifest;
    let pool = DatasetManifest::load(&ctx.path("pool_batch/manifest.jsonl")).map_err(|e| e.to_string())?;
    let (fb, _) = manifest_features(&black).map_err(|e| e.to_string())?;
    let (fp, _) = manifest_features(&pool).map_err(|e| e.to_string())?;
    let (vb, vp) = (total_variance(&rows_to_matrix(&fb).unwrap()), total_variance(&rows_to_matrix(&fp).unwrap()));
    let both: Vec<Vec<f64>> = fb.iter().chain(&fp).cloned().collect();
    let joint = pca_fit(&rows_to_matrix(&both).unwrap(), 10).map_err(|e| e.to_string())?;
    let ortho = (&joint.components * joint.components.transpose() - DMatrix::<f64>::identity(10, 10)).amax();
    check(
        ortho <= 1e-8 && eig_err <= 1e-8 && vec_err <= 1e-8 && vp > vb,
        format!(
            "orthonormality error {ortho:.2e}; oracle eigenvalue error {eig_err:.2e}, component error {vec_err:.2e}; total variance pool {vp:.3} vs black {vb:.3}"
        ),
    )
}

// ---- 9. gradient check ----

fn gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let d = 1024;
        let n = rng.random_range(4..32);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
        let labels: Vec<Label> = (0..n).map(|_| if rng.random() { Label::Deformed } else { Label::NonDeformed }).collect();
        let mut model = LinearModel::zeros(d);
        model.weights = (0..d).map(|_| rng.random_range(-0.1..0.1)).collect();
        model.bias = rng.random_range(-1.0..1.0);
        model.feature_mean = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        model.feature_scale = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
        let l2 = 0.01;
        let (_, gw, gb) = model.loss_and_grad(&xs, &labels, l2);
        let h = 1e-6;
        let mut num = Vec::with_capacity(d + 1);
        for j in 0..=d {
            let mut plus = model.clone();
            let mut minus = model.clone();
            if j < d {
                plus.weights[j] += h;
                minus.weights[j] -= h;
            } else {
                plus.bias += h;
                minus.bias -= h;
            }
            let lp = plus.loss_and_grad(&xs, &labels, l2).0;
            let lm = minus.loss_and_grad(&xs, &labels, l2).0;
            num.push((lp - lm) / (2.0 * h));
        }
        let ana: Vec<f64> = gw.iter().copied().chain(std::iter::once(gb)).collect();
        let diff: f64 = ana.iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = ana.iter().map(|a| a * a).sum::<f64>().sqrt().max(num.iter().map(|a| a * a).sum::<f64>().sqrt());
        worst = worst.max(diff / scale);
    }
    check(worst < 1e-5, format!("max relative error ‖g − g_fd‖ / max(‖g‖, ‖g_fd‖) = {worst:.2e} over 10 random batches"))
}

fn main() {
    // libtest-style flags (e.g. `--nocapture`, filters) are accepted and ignored.
    let ctx = Ctx {
        dir: tempfile::tempdir().expect("temp dir"),
    };
    let criteria: Vec<(&str, Box<dyn Fn(&Ctx) -> Outcome>)> = vec![
        ("determinism", Box::new(determinism)),
        ("dataset structure", Box::new(structure)),
        ("FFD affine precision", Box::new(|_: &Ctx| ffd_affine())),
        ("morphology oracle", Box::new(|_: &Ctx| morphology())),
        ("compositing", Box::new(compositing)),
        ("metrics oracle", Box::new(|_: &Ctx| metrics_oracle())),
        ("baseline end-to-end", Box::new(baseline)),
        ("PCA", Box::new(pca)),
        ("logistic gradient", Box::new(|_: &Ctx| gradient())),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| f(&ctx))).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{:.1?}]", t0.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{:.1?}]", t0.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
