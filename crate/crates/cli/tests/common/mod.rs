#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use binotone::io::write_hdr;
use binotone::scene::{generate, SceneSpec};
use binotone::HdrImage;

/// Writes a procedural scene as Radiance HDR and returns its path.
pub fn write_scene(dir: &Path, name: &str, width: usize, height: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    write_hdr(
        &generate(SceneSpec::new(width, height, seed)).unwrap(),
        &path,
    )
    .unwrap();
    path
}

pub fn write_constant(
    dir: &Path,
    name: &str,
    width: usize,
    height: usize,
    rgb: [f64; 3],
) -> PathBuf {
    let path = dir.join(name);
    write_hdr(
        &HdrImage::from_fn(width, height, |_, _| rgb).unwrap(),
        &path,
    )
    .unwrap();
    path
}

pub fn binotone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binotone"))
        .args(args)
        .output()
        .expect("spawn binotone")
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
