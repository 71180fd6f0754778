//! Named experiment files shipped with the binary.

pub const PRESETS: [(&str, &str); 7] = [
    ("table1", include_str!("../presets/table1.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
];

pub fn get(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// First comment block of a preset.
pub fn description(text: &str) -> String {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Experiment;
    use std::path::Path;

    #[test]
    fn every_preset_validates() {
        for (name, text) in PRESETS {
            let e = Experiment::from_toml(text, Path::new(".")).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(e.spec.name, name);
            let points = e.points().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(!points.is_empty());
            assert!(!description(text).is_empty(), "{name} lacks a description");
        }
    }

    #[test]
    fn table1_matches_builtin_defaults() {
        let e = Experiment::from_toml(get("table1").unwrap(), Path::new(".")).unwrap();
        let p = &e.points().unwrap()[0];
        assert_eq!(p.resolved.sim, urllc_core::engine::SimConfig::default());
    }

    #[test]
    fn sweep_sizes() {
        let n = |name| Experiment::from_toml(get(name).unwrap(), Path::new(".")).unwrap().points().unwrap().len();
        assert_eq!([n("fig3"), n("fig4"), n("fig5"), n("fig6"), n("fig7")], [9, 4, 6, 6, 2]);
    }
}
