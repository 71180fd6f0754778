//! TOML configuration files.
//!
//! Every key is optional; omitted keys take the default deployment values
//! (21 cells, 30 kHz, 4-symbol TTIs, dynamic TDD updated once per frame,
//! grant-free UL, 400-bit packets at 100 packets/s). See the README for
//! the full schema.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};
use urllc_core::duplexing::{DuplexMode, SlotFormat};
use urllc_core::engine::{CapacityConfig, CliCoupling, OutcomeModel, SimConfig};
use urllc_core::latency::{DelayConfig, UlScheme};
use urllc_core::numerology::{Numerology, Scs, TtiGrid};
use urllc_core::traffic::{offered_load, Packet, TrafficConfig};
use urllc_core::{ConfigError, Direction};

/// A config problem tied to a dotted key path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// One or more config problems.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<FieldError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl ConfigErrors {
    fn one(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigErrors(vec![FieldError { path: path.into(), message: message.to_string() }])
    }
}

fn core_error(prefix: &str, e: ConfigError) -> FieldError {
    let path = match &e {
        ConfigError::Invalid { field, .. } => (*field).to_string(),
        ConfigError::UnsupportedScs(_) => "scs_khz".into(),
        ConfigError::UnsupportedTti(_) => "tti_symbols".into(),
        ConfigError::NoPrbs => "capacity.n_prb".into(),
        ConfigError::Parse(_) => prefix.into(),
    };
    let message = match e {
        ConfigError::Invalid { reason, .. } => reason,
        other => other.to_string(),
    };
    FieldError { path, message }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Fdd,
    Tdd,
    StaticTdd,
    FlexFdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    GrantFree,
    DynamicGrant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayPreset {
    Fast,
    Slow,
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirName {
    Dl,
    Ul,
}

impl From<DirName> for Direction {
    fn from(d: DirName) -> Self {
        match d {
            DirName::Dl => Direction::Dl,
            DirName::Ul => Direction::Ul,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DuplexSection {
    pub mode: ModeName,
    /// Pattern update period; exclusive with `gamma_frames`. Neither set
    /// means one radio frame.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_slots: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_frames: Option<u32>,
    pub dl_bandwidth_fraction: f64,
    pub guard_prb_fraction: f64,
    /// Slot formats cycled by `static_tdd`.
    pub pattern: Vec<String>,
}

impl Default for DuplexSection {
    fn default() -> Self {
        DuplexSection {
            mode: ModeName::Tdd,
            gamma_slots: None,
            gamma_frames: None,
            dl_bandwidth_fraction: 0.5,
            guard_prb_fraction: 0.2,
            pattern: vec!["DDDDDDFUUUUUUF".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSection {
    pub k_dl: u32,
    pub k_ul: u32,
    pub f_dl_bits: u32,
    pub f_ul_bits: u32,
    pub lambda_dl: f64,
    pub lambda_ul: f64,
    /// Per-cell offered load; when set, replaces `k_dl` and `k_ul` by the
    /// equal UE count that produces it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub load_mbps: Option<f64>,
}

impl Default for TrafficSection {
    fn default() -> Self {
        let t = TrafficConfig::default();
        TrafficSection {
            k_dl: t.k_dl,
            k_ul: t.k_ul,
            f_dl_bits: t.f_dl_bits,
            f_ul_bits: t.f_ul_bits,
            lambda_dl: t.lambda_dl,
            lambda_ul: t.lambda_ul,
            load_mbps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelaySection {
    pub preset: DelayPreset,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bs_proc: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ue_proc_dl: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ue_proc_ul_prep: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nack_tx_dl: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nack_tx_ul: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sr_tx: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sg_tx: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sr_periodicity_ttis: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sg_delay_ttis: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_bler: Option<f64>,
}

impl Default for DelaySection {
    fn default() -> Self {
        DelaySection {
            preset: DelayPreset::Fast,
            bs_proc: None,
            ue_proc_dl: None,
            ue_proc_ul_prep: None,
            nack_tx_dl: None,
            nack_tx_ul: None,
            sr_tx: None,
            sg_tx: None,
            sr_periodicity_ttis: None,
            sg_delay_ttis: None,
            target_bler: None,
        }
    }
}

impl DelaySection {
    pub fn resolve(&self) -> DelayConfig {
        let mut d = match self.preset {
            DelayPreset::Fast => DelayConfig::fast(),
            DelayPreset::Slow => DelayConfig::slow(),
            DelayPreset::Reference => DelayConfig::reference(),
        };
        let set = |slot: &mut u32, v: Option<u32>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut d.bs_proc, self.bs_proc);
        set(&mut d.ue_proc_dl, self.ue_proc_dl);
        set(&mut d.ue_proc_ul_prep, self.ue_proc_ul_prep);
        set(&mut d.nack_tx_dl, self.nack_tx_dl);
        set(&mut d.nack_tx_ul, self.nack_tx_ul);
        set(&mut d.sr_tx, self.sr_tx);
        set(&mut d.sg_tx, self.sg_tx);
        set(&mut d.sr_periodicity_ttis, self.sr_periodicity_ttis);
        set(&mut d.sg_delay_ttis, self.sg_delay_ttis);
        if let Some(b) = self.target_bler {
            d.target_bler = b;
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacitySection {
    pub n_prb: u32,
    pub bits_per_prb_per_symbol: u32,
    pub segmentation: bool,
}

impl Default for CapacitySection {
    fn default() -> Self {
        let c = CapacityConfig::default();
        CapacitySection { n_prb: c.n_prb, bits_per_prb_per_symbol: c.bits_per_prb_per_symbol, segmentation: c.segmentation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlerSection {
    pub base: f64,
    pub retx: f64,
    /// Fail every packet's first `forced_failures` attempts instead of
    /// drawing outcomes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forced_failures: Option<u32>,
}

impl Default for BlerSection {
    fn default() -> Self {
        let d = SimConfig::default();
        BlerSection { base: d.bler_base, retx: d.bler_retx, forced_failures: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliSection {
    /// Same coupling between every pair of distinct cells.
    pub chi: f64,
    /// Full victim-by-aggressor matrix; exclusive with a non-zero `chi`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketEntry {
    #[serde(default)]
    pub cell: u32,
    #[serde(default)]
    pub ue: u32,
    pub dir: DirName,
    pub bits: u32,
    pub symbol: u64,
}

/// Explicit traffic instead of generated arrivals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrivalSection {
    /// Arrival trace CSV, relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub packets: Vec<PacketEntry>,
}

/// The config file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    /// Integer, or a string for values that do not fit a TOML integer.
    #[serde(with = "seed_repr")]
    pub seed: u64,
    pub n_cells: u32,
    pub scs_khz: u32,
    pub tti_symbols: u32,
    /// Traffic generation window; exclusive with `horizon_symbols`.
    pub horizon_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon_symbols: Option<u64>,
    pub ul_scheme: SchemeName,
    pub max_harq: u32,
    pub audit: bool,
    pub duplex: DuplexSection,
    pub traffic: TrafficSection,
    pub delays: DelaySection,
    pub capacity: CapacitySection,
    pub bler: BlerSection,
    pub cli: CliSection,
    #[serde(skip_serializing_if = "ArrivalSection::is_empty")]
    pub arrivals: ArrivalSection,
}

impl ArrivalSection {
    fn is_empty(&self) -> bool {
        self.trace.is_none() && self.packets.is_empty()
    }
}

impl Default for ConfigFile {
    fn default() -> Self {
        let d = SimConfig::default();
        ConfigFile {
            seed: d.seed,
            n_cells: d.n_cells,
            scs_khz: d.scs.khz(),
            tti_symbols: d.tti_symbols,
            horizon_s: 1.0,
            horizon_symbols: None,
            ul_scheme: SchemeName::GrantFree,
            max_harq: d.max_harq,
            audit: false,
            duplex: DuplexSection::default(),
            traffic: TrafficSection::default(),
            delays: DelaySection::default(),
            capacity: CapacitySection::default(),
            bler: BlerSection::default(),
            cli: CliSection::default(),
            arrivals: ArrivalSection::default(),
        }
    }
}

/// A config ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub sim: SimConfig,
    /// Explicit arrivals, if the file gives any.
    pub arrivals: Option<Vec<Packet>>,
}

/// Parse TOML text into a raw table.
pub fn parse_table(text: &str) -> Result<Table, ConfigErrors> {
    text.parse::<Table>().map_err(|e| ConfigErrors::one("", e.message()))
}

/// Apply `key.path=value`. The value is read as a TOML value when it parses
/// as one and as a bare string otherwise.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<(), ConfigErrors> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigErrors::one(spec, "override must look like key.path=value"))?;
    let key = key.trim();
    let value = match format!("v = {}", raw.trim()).parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => Value::String(raw.trim().to_string()),
    };
    set_path(table, key, value)
}

/// Set a dotted path, creating intermediate tables.
pub fn set_path(table: &mut Table, key: &str, value: Value) -> Result<(), ConfigErrors> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigErrors::one(key, "empty key segment"));
    }
    let mut cur = table;
    for (i, part) in parts[..parts.len() - 1].iter().enumerate() {
        let entry = cur.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(ConfigErrors::one(parts[..=i].join("."), "not a section")),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl ConfigFile {
    /// Deserialize, reporting the offending key path.
    pub fn from_table(table: Table) -> Result<Self, ConfigErrors> {
        serde_path_to_error::deserialize(Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            ConfigErrors::one(if path == "." { String::new() } else { path }, first_line(&e.into_inner().to_string()))
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigErrors> {
        Self::from_table(parse_table(text)?)
    }

    /// Canonical TOML with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`Self::to_toml`], hex encoded.
    pub fn hash(&self) -> String {
        sha256_hex(self.to_toml().as_bytes())
    }

    /// Build the simulator config, checking every section. `base_dir`
    /// anchors relative trace paths.
    pub fn resolve(&self, base_dir: &Path) -> Result<Resolved, ConfigErrors> {
        let mut errs = Vec::new();
        let mut err = |path: &str, msg: &dyn fmt::Display| errs.push(FieldError { path: path.into(), message: msg.to_string() });

        let scs = Scs::from_khz(self.scs_khz).unwrap_or_else(|e| {
            err("scs_khz", &e);
            Scs::Khz30
        });
        if let Err(e) = TtiGrid::new(self.tti_symbols) {
            err("tti_symbols", &e);
        }
        let num = Numerology::new(scs);
        let horizon_symbols = match self.horizon_symbols {
            Some(h) => h,
            None if self.horizon_s > 0.0 && self.horizon_s.is_finite() => num.symbol_at(self.horizon_s),
            None => {
                err("horizon_s", &"must be a positive number of seconds");
                1
            }
        };

        let gamma = match (self.duplex.gamma_slots, self.duplex.gamma_frames) {
            (Some(_), Some(_)) => {
                err("duplex.gamma_frames", &"set gamma_slots or gamma_frames, not both");
                1
            }
            (Some(s), None) => s,
            (None, f) => f.unwrap_or(1).saturating_mul(num.slots_per_frame() as u32),
        };
        let duplex = match self.duplex.mode {
            ModeName::Fdd => DuplexMode::Fdd { dl_bandwidth_fraction: self.duplex.dl_bandwidth_fraction },
            ModeName::Tdd => DuplexMode::DynamicTdd { gamma_slots: gamma },
            ModeName::FlexFdd => {
                DuplexMode::FlexibleFdd { guard_prb_fraction: self.duplex.guard_prb_fraction, gamma_slots: gamma }
            }
            ModeName::StaticTdd => {
                let mut pattern = Vec::new();
                for (i, s) in self.duplex.pattern.iter().enumerate() {
                    match s.parse::<SlotFormat>() {
                        Ok(f) => pattern.push(f),
                        Err(e) => err(&format!("duplex.pattern[{i}]"), &e),
                    }
                }
                DuplexMode::StaticTdd { pattern }
            }
        };

        let mut traffic = TrafficConfig {
            k_dl: self.traffic.k_dl,
            k_ul: self.traffic.k_ul,
            f_dl_bits: self.traffic.f_dl_bits,
            f_ul_bits: self.traffic.f_ul_bits,
            lambda_dl: self.traffic.lambda_dl,
            lambda_ul: self.traffic.lambda_ul,
        };
        if let Some(load) = self.traffic.load_mbps {
            match ues_for_load(&traffic, load) {
                Ok(k) => {
                    traffic.k_dl = k;
                    traffic.k_ul = k;
                }
                Err(m) => err("traffic.load_mbps", &m),
            }
        }

        let cli = match (&self.cli.matrix, self.cli.chi) {
            (Some(_), chi) if chi != 0.0 => {
                err("cli.matrix", &"set cli.chi or cli.matrix, not both");
                CliCoupling::none(self.n_cells)
            }
            (Some(m), _) => CliCoupling { chi: m.clone() },
            (None, 0.0) => CliCoupling::default(),
            (None, chi) => CliCoupling::symmetric(self.n_cells, chi),
        };

        let sim = SimConfig {
            n_cells: self.n_cells,
            scs,
            tti_symbols: self.tti_symbols,
            duplex,
            traffic,
            delays: self.delays.resolve(),
            ul_scheme: match self.ul_scheme {
                SchemeName::GrantFree => UlScheme::GrantFree,
                SchemeName::DynamicGrant => UlScheme::DynamicGrant,
            },
            capacity: CapacityConfig {
                n_prb: self.capacity.n_prb,
                bits_per_prb_per_symbol: self.capacity.bits_per_prb_per_symbol,
                segmentation: self.capacity.segmentation,
            },
            bler_base: self.bler.base,
            bler_retx: self.bler.retx,
            outcome: match self.bler.forced_failures {
                Some(failures) => OutcomeModel::Forced { failures },
                None => OutcomeModel::Bernoulli,
            },
            max_harq: self.max_harq,
            cli,
            horizon_symbols,
            seed: self.seed,
            audit: self.audit,
        };

        let arrivals = match self.arrivals(base_dir) {
            Ok(a) => a,
            Err(e) => {
                errs.extend(e.0);
                None
            }
        };

        if errs.is_empty() {
            errs.extend(section_errors(&sim));
        }
        if errs.is_empty() {
            if let Err(e) = sim.validate() {
                errs.push(core_error("", e));
            }
        }
        if errs.is_empty() {
            if let Some(a) = &arrivals {
                if let Some(e) = arrival_errors(&sim, a) {
                    errs.push(e);
                }
            }
        }
        if errs.is_empty() {
            Ok(Resolved { sim, arrivals })
        } else {
            Err(ConfigErrors(errs))
        }
    }

    fn arrivals(&self, base_dir: &Path) -> Result<Option<Vec<Packet>>, ConfigErrors> {
        match (&self.arrivals.trace, self.arrivals.packets.is_empty()) {
            (Some(_), false) => Err(ConfigErrors::one("arrivals", "set arrivals.trace or arrivals.packets, not both")),
            (Some(path), true) => crate::export::read_trace(&base_dir.join(path))
                .map(Some)
                .map_err(|e| ConfigErrors::one("arrivals.trace", e)),
            (None, false) => {
                let mut entries: Vec<&PacketEntry> = self.arrivals.packets.iter().collect();
                entries.sort_by_key(|p| p.symbol);
                Ok(Some(
                    entries
                        .into_iter()
                        .enumerate()
                        .map(|(i, p)| Packet {
                            id: i as u64,
                            cell: p.cell,
                            ue: p.ue,
                            direction: p.dir.into(),
                            size_bits: p.bits,
                            arrival_symbol: p.symbol,
                        })
                        .collect(),
                ))
            }
            (None, true) => Ok(None),
        }
    }
}

/// Checks that do not depend on each other, so all of them are reported.
fn section_errors(sim: &SimConfig) -> Vec<FieldError> {
    let mut out = Vec::new();
    if sim.n_cells == 0 {
        out.push(FieldError { path: "n_cells".into(), message: "at least one cell required".into() });
    }
    let checks = [
        sim.duplex.validate(),
        sim.traffic.validate(),
        sim.delays.validate(),
        sim.cli.validate(sim.n_cells),
    ];
    out.extend(checks.into_iter().filter_map(Result::err).map(|e| core_error("", e)));
    for (path, v) in [("bler.base", sim.bler_base), ("bler.retx", sim.bler_retx)] {
        if !(0.0..1.0).contains(&v) {
            out.push(FieldError { path: path.into(), message: format!("{v} outside [0, 1)") });
        }
    }
    out
}

fn arrival_errors(sim: &SimConfig, arrivals: &[Packet]) -> Option<FieldError> {
    for (i, p) in arrivals.iter().enumerate() {
        let msg = if p.id != i as u64 {
            format!("row {i} has id {}; ids must count up from 0 in arrival order", p.id)
        } else if p.cell >= sim.n_cells {
            format!("packet {i} targets cell {} of {}", p.cell, sim.n_cells)
        } else if p.size_bits == 0 {
            format!("packet {i} is empty")
        } else if !sim.fits_unsegmented(p.direction, p.size_bits) {
            format!("packet {i} never fits one TTI without segmentation")
        } else if i > 0 && arrivals[i - 1].arrival_symbol > p.arrival_symbol {
            format!("packet {i} arrives before packet {}", i - 1)
        } else {
            continue;
        };
        return Some(FieldError { path: "arrivals".into(), message: msg });
    }
    None
}

/// Equal DL/UL UE count giving `load_mbps` per cell, within 1%.
fn ues_for_load(t: &TrafficConfig, load_mbps: f64) -> Result<u32, String> {
    let per_ue_pair = f64::from(t.f_dl_bits) * t.lambda_dl + f64::from(t.f_ul_bits) * t.lambda_ul;
    if !(load_mbps >= 0.0 && load_mbps.is_finite()) {
        return Err(format!("{load_mbps} is not a valid load"));
    }
    if per_ue_pair <= 0.0 {
        return Err("packet sizes and rates give zero load per UE".into());
    }
    let k = (load_mbps * 1e6 / per_ue_pair).round();
    let got = offered_load(&TrafficConfig { k_dl: k as u32, k_ul: k as u32, ..t.clone() }).total_bps / 1e6;
    if (got - load_mbps).abs() > 0.01 * load_mbps {
        return Err(format!("nearest UE count {k} gives {got} Mbps; adjust packet size or rate"));
    }
    Ok(k as u32)
}

/// Serde messages from nested tables end with `in \`section\`` lines that
/// repeat the path.
/// TOML integers are signed 64-bit, so seeds at or above 2^63 are written
/// as `"0x..."` strings. Either form is accepted on input.
mod seed_repr {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&format!("{seed:#x}")),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(v),
            Repr::Text(t) => {
                let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
                    Some(hex) => u64::from_str_radix(hex, 16),
                    None => t.parse(),
                };
                parsed.map_err(|_| D::Error::custom(format!("`{t}` is not a 64-bit unsigned seed")))
            }
        }
    }
}

pub(crate) fn first_line(msg: &str) -> String {
    msg.lines().next().unwrap_or_default().trim().to_string()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
