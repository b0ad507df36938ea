//! Camera and light sampling and the z-buffered software rasterizer.

mod camera;
mod light;
mod raster;
mod texture;

pub use camera::{pose_from_unit, sample_camera, CameraConfig, CameraPose};
pub use light::{sample_light, LightConfig, LightSpec};
pub use raster::{rasterize, Background, RenderedSample, Renderer, NEAR_PLANE};
pub use texture::LabelTexture;
