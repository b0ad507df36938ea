use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder, Rgb, RgbImage};
use rayon::prelude::*;

use super::manifest::{sha256_hex, DatasetManifest, ManifestEntry, ManifestHeader, SampleSpec, KEY_BLACK, MANIFEST_VERSION};
use super::{stream_rng, BackgroundMode, StreamPurpose};
use crate::composite::{chroma_mask_with, composite, refine_mask, BackgroundPool, BinaryMask, KEY_GREEN};
use crate::config::Config;
use crate::deform::{sample_deformation, DeformRig};
use crate::mesh::{generate_can, load_obj};
use crate::render::{sample_camera, sample_light, Background, LabelTexture, Renderer};
use crate::{Error, Label, Result};

/// Pixels of one finished sample.
#[derive(Debug, Clone)]
pub struct GeneratedSample {
    pub spec: SampleSpec,
    pub image: RgbImage,
    /// Refined mask that selected foreground pixels.
    pub mask: BinaryMask,
    /// Raw rasterizer coverage before keying and clean-up.
    pub coverage: BinaryMask,
}

/// Everything shared by the samples of one run: the rigged mesh, the
/// material and the background pool.
#[derive(Debug)]
pub struct Generator {
    config: Config,
    mode: BackgroundMode,
    rig: DeformRig,
    renderer: Renderer,
    pool: Option<BackgroundPool>,
}

pub fn encode_rgb_png(img: &RgbImage) -> Vec<u8> {
    let mut buf = Vec::new();
    PngEncoder::new(&mut buf)
        .write_image(img.as_raw(), img.width(), img.height(), ExtendedColorType::Rgb8)
        .expect("in-memory PNG encode");
    buf
}

impl Generator {
    pub fn new(config: &Config, mode: BackgroundMode) -> Result<Self> {
        config.validate()?;
        let base = match &config.paths.mesh {
            Some(p) => load_obj(p)?,
            None => generate_can(&config.can)?,
        };
        let rig = DeformRig::build(base, &config.deform)?;
        let texture = match &config.paths.label_texture {
            Some(p) => LabelTexture::load(p)?,
            None => LabelTexture::procedural(),
        };
        let renderer = Renderer {
            texture,
            ..Renderer::default()
        };
        let pool = match mode {
            BackgroundMode::Black => None,
            BackgroundMode::Pool => {
                let dir = config
                    .paths
                    .background_dir
                    .as_ref()
                    .ok_or_else(|| Error::Config("pool backgrounds need `paths.background_dir`".into()))?;
                let pool = BackgroundPool::open(dir)?;
                if pool.is_empty() {
                    return Err(Error::Data(format!("background pool {} has no PNG/JPEG images", dir.display())));
                }
                Some(pool)
            }
        };
        Ok(Generator {
            config: config.clone(),
            mode,
            rig,
            renderer,
            pool,
        })
    }

    pub fn rig(&self) -> &DeformRig {
        &self.rig
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    /// Scenes alternate classes; with several views per scene consecutive
    /// indices share the scene.
    pub fn scene(&self, index: u64) -> u64 {
        index / self.config.dataset.views_per_scene as u64
    }

    pub fn label(&self, index: u64) -> Label {
        if self.scene(index) % 2 == 0 {
            Label::Deformed
        } else {
            Label::NonDeformed
        }
    }

    pub fn quadrant(index: u64) -> u8 {
        1 + (index % 4) as u8
    }

    /// Draws the sample record (and loads its pool background).
    fn draw(&self, index: u64) -> Result<(SampleSpec, Option<RgbImage>)> {
        let seed = self.config.seed;
        let label = self.label(index);
        let scene = self.scene(index);
        let mut deform_rng = stream_rng(seed, scene, StreamPurpose::Deformation);
        let deformation = sample_deformation(&mut deform_rng, self.rig.keys(), label, &self.config.sampling)?;
        let mut view_rng = stream_rng(seed, index, StreamPurpose::View);
        let pose = sample_camera(&mut view_rng, &self.config.camera, Self::quadrant(index))?;
        let light = sample_light(&mut view_rng, &self.config.light);
        let (background_id, bg) = match &self.pool {
            None => (KEY_BLACK.to_string(), None),
            Some(pool) => {
                let (idx, img) = pool.pick(seed, index)?;
                (pool.id(idx), Some(img))
            }
        };
        let spec = SampleSpec {
            index,
            label,
            deformation,
            pose,
            light,
            background_id,
            seed,
        };
        Ok((spec, bg))
    }

    pub fn spec(&self, index: u64) -> Result<SampleSpec> {
        Ok(self.draw(index)?.0)
    }

    pub fn sample(&self, index: u64) -> Result<GeneratedSample> {
        let (spec, bg) = self.draw(index)?;
        self.compose(spec, bg.as_ref())
    }

    /// Re-renders a recorded sample.
    pub fn realize(&self, spec: &SampleSpec) -> Result<GeneratedSample> {
        let bg = match (&self.pool, spec.background_id.as_str()) {
            (_, KEY_BLACK) => None,
            (Some(pool), id) => {
                let idx = (0..pool.len())
                    .find(|&i| pool.id(i) == id)
                    .ok_or_else(|| Error::Data(format!("background `{id}` not in pool {}", pool.root().display())))?;
                Some(pool.load(idx)?)
            }
            (None, id) => return Err(Error::Data(format!("sample needs pool background `{id}`"))),
        };
        self.compose(spec.clone(), bg.as_ref())
    }

    fn compose(&self, spec: SampleSpec, bg: Option<&RgbImage>) -> Result<GeneratedSample> {
        let mesh = self.rig.pose(&spec.deformation)?;
        let frame = self.renderer.render(&mesh, &spec.pose, &spec.light, Background::KeyGreen);
        let cfg = &self.config.composite;
        let keyed = chroma_mask_with(&frame.rgb, KEY_GREEN, cfg.keying, cfg.threshold);
        let mask = refine_mask(&keyed, cfg);
        let image = match bg {
            Some(bg) => composite(&frame.rgb, &mask, bg, KEY_GREEN)?,
            None => RgbImage::from_fn(frame.rgb.width(), frame.rgb.height(), |x, y| {
                if mask.get(x, y) {
                    *frame.rgb.get_pixel(x, y)
                } else {
                    Rgb(Background::Black.color())
                }
            }),
        };
        Ok(GeneratedSample {
            spec,
            image,
            mask,
            coverage: frame.coverage,
        })
    }

    pub fn header(&self) -> ManifestHeader {
        ManifestHeader {
            version: MANIFEST_VERSION,
            source: "synthetic".into(),
            config_hash: Some(self.config.hash()),
            seed: Some(self.config.seed),
            background: Some(self.mode.as_str().into()),
            views_per_scene: Some(self.config.dataset.views_per_scene),
            subset: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerateSummary {
    pub manifest: DatasetManifest,
    /// Files whose digest differs from the manifest previously in the
    /// output directory; `None` when there was none.
    pub changed: Option<usize>,
}

/// Renders `n` samples into `out_dir` with `jobs` worker threads (0 picks
/// the number of cores). Output bytes depend only on the config.
pub fn generate_dataset(config: &Config, n: u64, mode: BackgroundMode, out_dir: &Path, jobs: usize) -> Result<GenerateSummary> {
    let views = config.dataset.views_per_scene as u64;
    let block = 2 * views;
    if n == 0 || n % block != 0 {
        let what = if views == 1 {
            "must be even and positive".to_string()
        } else {
            format!("must be a positive multiple of {block} with {views} views per scene")
        };
        return Err(Error::param("n", format!("{what}, got {n}")));
    }
    let generator = Generator::new(config, mode)?;

    let manifest_path = out_dir.join("manifest.jsonl");
    let previous: Option<BTreeMap<String, String>> = manifest_path
        .exists()
        .then(|| DatasetManifest::load(&manifest_path).map(|m| m.digests().into_iter().collect()).unwrap_or_default());

    for sub in [Label::Deformed.as_str(), Label::NonDeformed.as_str(), "masks"] {
        let d = out_dir.join(sub);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let entries = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| write_sample(&generator, i, out_dir))
            .collect::<Result<Vec<_>>>()
    })?;

    let manifest = DatasetManifest {
        header: generator.header(),
        entries,
        root: out_dir.to_path_buf(),
    };
    manifest.save(&manifest_path)?;

    let changed = previous.map(|old| {
        let new: BTreeMap<String, String> = manifest.digests().into_iter().collect();
        let differing = new.iter().filter(|(k, v)| old.get(*k) != Some(*v)).count();
        differing + old.keys().filter(|k| !new.contains_key(*k)).count()
    });
    Ok(GenerateSummary { manifest, changed })
}

fn write_sample(generator: &Generator, index: u64, out_dir: &Path) -> Result<ManifestEntry> {
    let s = generator.sample(index)?;
    let image_rel = format!("{}/{index:06}.png", s.spec.label.as_str());
    let mask_rel = format!("masks/{index:06}.png");
    let image_png = encode_rgb_png(&s.image);
    let mask_png = s.mask.encode_png();
    for (rel, bytes) in [(&image_rel, &image_png), (&mask_rel, &mask_png)] {
        let p = out_dir.join(rel);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
    }
    Ok(ManifestEntry {
        index,
        label: s.spec.label,
        image: image_rel,
        image_sha256: sha256_hex(&image_png),
        mask: Some(mask_rel),
        mask_sha256: Some(sha256_hex(&mask_png)),
        sample: Some(s.spec),
        origin: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> Config {
        let mut c = Config::default();
        c.camera.image_size = 96;
        c
    }

    #[test]
    fn labels_and_quadrants_round_robin() {
        let g = Generator::new(&small_config(), BackgroundMode::Black).unwrap();
        let labels: Vec<_> = (0..8).map(|i| g.label(i)).collect();
        assert_eq!(labels.iter().filter(|l| **l == Label::Deformed).count(), 4);
        let quads: Vec<_> = (0..8).map(Generator::quadrant).collect();
        assert_eq!(quads, [1, 2, 3, 4, 1, 2, 3, 4]);
    }

    #[test]
    fn grouped_views_share_scene_state() {
        let mut cfg = small_config();
        cfg.dataset.views_per_scene = 4;
        let g = Generator::new(&cfg, BackgroundMode::Black).unwrap();
        let specs: Vec<_> = (0..8).map(|i| g.spec(i).unwrap()).collect();
        for s in &specs[1..4] {
            assert_eq!(s.deformation, specs[0].deformation);
            assert_eq!(s.label, Label::Deformed);
        }
        assert_eq!(specs[4].label, Label::NonDeformed);
        assert_ne!(specs[0].pose, specs[1].pose);
    }

    #[test]
    fn realize_reproduces_sample() {
        let g = Generator::new(&small_config(), BackgroundMode::Black).unwrap();
        let s = g.sample(3).unwrap();
        let again = g.realize(&s.spec).unwrap();
        assert_eq!(s.image, again.image);
        assert_eq!(s.mask, again.mask);
    }

    #[test]
    fn foreground_survives_and_key_does_not() {
        let g = Generator::new(&small_config(), BackgroundMode::Black).unwrap();
        let s = g.sample(0).unwrap();
        assert!(s.mask.count() > 0);
        assert!(s.mask.is_subset_of(&s.coverage));
        assert!(s.mask.iou(&s.coverage) > 0.8);
        assert!(s.image.pixels().all(|p| p.0 != KEY_GREEN));
        let lit = s.image.pixels().filter(|p| p.0 != [0, 0, 0]).count();
        assert!(lit >= s.mask.count() * 9 / 10);
    }

    #[test]
    fn odd_count_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let err = generate_dataset(&small_config(), 7, BackgroundMode::Black, dir.path(), 1).unwrap_err();
        assert!(err.to_string().contains("must be even"), "{err}");
    }

    #[test]
    fn pool_mode_without_images_fails() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config();
        cfg.paths.background_dir = Some(dir.path().to_path_buf());
        assert!(matches!(Generator::new(&cfg, BackgroundMode::Pool), Err(Error::Data(_))));
        cfg.paths.background_dir = None;
        assert!(Generator::new(&cfg, BackgroundMode::Pool).unwrap_err().is_usage());
    }
}
