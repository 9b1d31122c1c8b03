//! Bundled simulation presets, so the pipeline can be exercised without
//! hand-writing a spec file.

/// Four Gaussian components in r = 4 with a small redrawn-noise
/// fraction, about the scale of one recording session.
pub const PAPERLIKE: &str = "\
schema = 1
kind = mixture
n = 300
weights = 0.35,0.30,0.20,0.15
mean_1 = 0,0,0,0
mean_2 = 8,0,4,-3
mean_3 = -6,7,-2,2
mean_4 = 3,-8,6,5
cov_1 = 1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1
cov_2 = 1.1,0,0,0;0,1.1,0,0;0,0,1.1,0;0,0,0,1.1
cov_3 = 0.7,0,0,0;0,0.7,0,0;0,0,0.7,0;0,0,0,0.7
cov_4 = 0.9,0,0,0;0,0.9,0,0;0,0,0.9,0;0,0,0,0.9
outlier_fraction = 0.05
outlier_scale = 4
";

/// Three spike-shaped templates plus per-sample noise, for the
/// waveform → PCA → run path.
pub const WAVEFORMS: &str = "\
schema = 1
kind = waveforms
counts = 120,100,80
noise_sd = 0.35
samples = 30
template_1 = 0,0.3,0.9,1.8,3.2,5.0,6.6,7.4,6.8,5.0,2.6,0.2,-1.8,-3.0,-3.4,-3.1,-2.4,-1.6,-0.9,-0.4,-0.1,0.1,0.2,0.2,0.1,0.1,0,0,0,0
template_2 = 0,-0.2,-0.7,-1.6,-3.0,-4.8,-6.2,-6.6,-5.6,-3.6,-1.2,1.0,2.6,3.4,3.3,2.7,1.9,1.2,0.6,0.2,0,-0.1,-0.1,0,0,0,0,0,0,0
template_3 = 0,0.2,0.5,1.1,2.2,3.6,4.6,4.8,4.0,2.4,0.4,-1.4,-2.6,-3.0,-2.8,-2.2,-1.5,-0.9,-0.4,-0.1,0.1,0.1,0.1,0,0,0,0,0,0,0
";

pub fn lookup(name: &str) -> Option<&'static str> {
    match name {
        "paperlike" => Some(PAPERLIKE),
        "waveforms" => Some(WAVEFORMS),
        _ => None,
    }
}

pub const NAMES: &[&str] = &["paperlike", "waveforms"];
