//! Flat key=value configuration documents with bracketed sections.
//!
//! One assignment per line, `#` comments, `[section]` headers. Family
//! sections are named `[family.<name>]` and mirror the SpinSystem fields;
//! `[lineshape]`, `[grid]`, `[sweep]` and `[rates]` hold the synthesis and
//! rate-model settings. Unknown sections or keys are rejected with their
//! line number.

use std::collections::BTreeMap;
use std::path::Path;

use spin_toolkit::dynamics::{
    RateModel, LEVEL_ES0, LEVEL_ES1, LEVEL_GS0, LEVEL_GS1, LEVEL_SE,
};
use spin_toolkit::presets;
use spin_toolkit::spectra::{LineShape, LineShapeKind};
use spin_toolkit::spin::{Spin, SpinSystem};

use crate::exit::{CliError, CliResult};

#[derive(Clone, Debug)]
pub struct FamilyConfig {
    pub name: String,
    pub system: SpinSystem,
    pub family_scale: f64,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub b_min_mt: f64,
    pub b_max_mt: f64,
    pub b_step_mt: f64,
}

#[derive(Clone, Debug)]
pub struct GridConfig {
    pub f_min_mhz: f64,
    pub f_max_mhz: f64,
    pub f_step_mhz: f64,
}

#[derive(Clone, Debug)]
pub struct ConfigDocument {
    pub families: Vec<FamilyConfig>,
    pub lineshape: LineShape,
    pub grid: GridConfig,
    pub sweep: SweepConfig,
    pub rates: RateModel,
}

impl Default for ConfigDocument {
    fn default() -> Self {
        ConfigDocument {
            families: presets::FAMILY_NAMES
                .iter()
                .map(|name| FamilyConfig {
                    name: name.to_string(),
                    system: presets::family_by_name(name).unwrap(),
                    family_scale: presets::default_family_scale(name),
                })
                .collect(),
            lineshape: presets::default_lineshape(),
            grid: GridConfig {
                f_min_mhz: 10.0,
                f_max_mhz: 2000.0,
                f_step_mhz: 0.5,
            },
            sweep: SweepConfig {
                b_min_mt: 0.0,
                b_max_mt: 7.0,
                b_step_mt: 0.125,
            },
            rates: presets::rate_model_fig1f_default(),
        }
    }
}

impl ConfigDocument {
    /// The canonical preset document (Table of family constants plus the
    /// default optical-cycle rates).
    pub fn preset_document() -> String {
        Self::default().serialize()
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("# spin-toolkit configuration\n");
        out.push_str("# units: MHz, mT, 1/ns; angles in degrees\n\n");
        out.push_str("[lineshape]\n");
        out.push_str(&format!(
            "kind = {}\n",
            match self.lineshape.kind {
                LineShapeKind::Lorentzian => "lorentzian",
                LineShapeKind::Gaussian => "gaussian",
            }
        ));
        out.push_str(&format!("fwhm_mhz = {}\n\n", self.lineshape.fwhm_mhz));

        out.push_str("[grid]\n");
        out.push_str(&format!("f_min_mhz = {}\n", self.grid.f_min_mhz));
        out.push_str(&format!("f_max_mhz = {}\n", self.grid.f_max_mhz));
        out.push_str(&format!("f_step_mhz = {}\n\n", self.grid.f_step_mhz));

        out.push_str("[sweep]\n");
        out.push_str(&format!("b_min_mt = {}\n", self.sweep.b_min_mt));
        out.push_str(&format!("b_max_mt = {}\n", self.sweep.b_max_mt));
        out.push_str(&format!("b_step_mt = {}\n\n", self.sweep.b_step_mt));

        for f in &self.families {
            out.push_str(&format!("[family.{}]\n", f.name));
            let s = &f.system;
            out.push_str(&format!("s_electron = {}\n", s.s_electron.value()));
            out.push_str(&format!("i_nuclear = {}\n", s.i_nuclear.value()));
            out.push_str(&format!("d_mhz = {}\n", s.d_mhz));
            out.push_str(&format!("e_mhz = {}\n", s.e_mhz));
            out.push_str(&format!("a_mhz = {}\n", s.isotropic_hyperfine_mhz()));
            out.push_str(&format!("gamma_e_mhz_per_mt = {}\n", s.gamma_e_mhz_per_mt));
            out.push_str(&format!("gamma_n_mhz_per_mt = {}\n", s.gamma_n_mhz_per_mt));
            out.push_str(&format!("axis_polar_deg = {}\n", s.axis_polar_deg));
            out.push_str(&format!("axis_azimuth_deg = {}\n", s.axis_azimuth_deg));
            out.push_str(&format!("family_scale = {}\n\n", f.family_scale));
        }

        out.push_str("[rates]\n");
        let r = &self.rates;
        out.push_str(&format!("pump_per_ns = {}\n", r.pump_rate));
        out.push_str(&format!("rf_mix_per_ns = {}\n", r.rf_mix_rate));
        out.push_str(&format!(
            "radiative_per_ns = {}\n",
            r.rates[LEVEL_ES0][LEVEL_GS0]
        ));
        out.push_str(&format!(
            "isc_es0_se_per_ns = {}\n",
            r.rates[LEVEL_ES0][LEVEL_SE]
        ));
        out.push_str(&format!(
            "isc_es1_se_per_ns = {}\n",
            r.rates[LEVEL_ES1][LEVEL_SE]
        ));
        out.push_str(&format!("se_gs0_per_ns = {}\n", r.rates[LEVEL_SE][LEVEL_GS0]));
        out.push_str(&format!("se_gs1_per_ns = {}\n", r.rates[LEVEL_SE][LEVEL_GS1]));
        out
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let mut sections: Vec<(String, usize, BTreeMap<String, (String, usize)>)> = Vec::new();
        let mut current: Option<usize> = None;

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(CliError::Parse(format!(
                        "{origin}:{lineno}: unterminated section header"
                    )));
                }
                let name = line[1..line.len() - 1].trim().to_string();
                sections.push((name, lineno, BTreeMap::new()));
                current = Some(sections.len() - 1);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Parse(format!(
                    "{origin}:{lineno}: expected 'key = value'"
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let Some(sec) = current else {
                return Err(CliError::Parse(format!(
                    "{origin}:{lineno}: assignment outside any [section]"
                )));
            };
            if sections[sec].2.insert(key.clone(), (value, lineno)).is_some() {
                return Err(CliError::Parse(format!(
                    "{origin}:{lineno}: duplicate key '{key}'"
                )));
            }
        }

        let mut doc = ConfigDocument::default();
        doc.families.clear();

        for (name, header_line, keys) in sections {
            if let Some(family) = name.strip_prefix("family.") {
                doc.families
                    .push(parse_family(origin, family, header_line, keys)?);
            } else {
                match name.as_str() {
                    "lineshape" => parse_lineshape(origin, keys, &mut doc.lineshape)?,
                    "grid" => parse_grid(origin, keys, &mut doc.grid)?,
                    "sweep" => parse_sweep(origin, keys, &mut doc.sweep)?,
                    "rates" => parse_rates(origin, keys, &mut doc.rates)?,
                    other => {
                        return Err(CliError::Parse(format!(
                            "{origin}:{header_line}: unknown section '[{other}]'"
                        )))
                    }
                }
            }
        }
        Ok(doc)
    }
}

fn parse_f64(origin: &str, key: &str, value: &str, lineno: usize) -> CliResult<f64> {
    value.parse().map_err(|_| {
        CliError::Parse(format!(
            "{origin}:{lineno}: '{key}': not a number: '{value}'"
        ))
    })
}

fn parse_family(
    origin: &str,
    name: &str,
    header_line: usize,
    keys: BTreeMap<String, (String, usize)>,
) -> CliResult<FamilyConfig> {
    let mut s_electron = 1.0;
    let mut i_nuclear = 0.0;
    let mut d_mhz = 0.0;
    let mut e_mhz = 0.0;
    let mut a_mhz = 0.0;
    let mut gamma_e = spin_toolkit::spin::DEFAULT_GAMMA_E_MHZ_PER_MT;
    let mut gamma_n = spin_toolkit::spin::DEFAULT_GAMMA_N_MHZ_PER_MT;
    let mut polar = 0.0;
    let mut azimuth = 0.0;
    let mut family_scale = 1.0;

    for (key, (value, lineno)) in keys {
        let v = parse_f64(origin, &key, &value, lineno)?;
        match key.as_str() {
            "s_electron" => s_electron = v,
            "i_nuclear" => i_nuclear = v,
            "d_mhz" => d_mhz = v,
            "e_mhz" => e_mhz = v,
            "a_mhz" => a_mhz = v,
            "gamma_e_mhz_per_mt" => gamma_e = v,
            "gamma_n_mhz_per_mt" => gamma_n = v,
            "axis_polar_deg" => polar = v,
            "axis_azimuth_deg" => azimuth = v,
            "family_scale" => family_scale = v,
            other => {
                return Err(CliError::Parse(format!(
                    "{origin}:{lineno}: unknown key '{other}' in [family.{name}]"
                )))
            }
        }
    }

    let s = Spin::try_from_f64(s_electron)
        .map_err(|e| CliError::Parse(format!("{origin}:{header_line}: [family.{name}]: {e}")))?;
    let i = Spin::try_from_f64(i_nuclear)
        .map_err(|e| CliError::Parse(format!("{origin}:{header_line}: [family.{name}]: {e}")))?;
    let mut tensor = [[0.0; 3]; 3];
    for (k, row) in tensor.iter_mut().enumerate() {
        row[k] = a_mhz;
    }
    let system = SpinSystem::new(s, i, d_mhz, e_mhz, tensor, gamma_e, gamma_n, polar, azimuth)
        .map_err(|e| CliError::Parse(format!("{origin}:{header_line}: [family.{name}]: {e}")))?;
    Ok(FamilyConfig {
        name: name.to_string(),
        system,
        family_scale,
    })
}

fn parse_lineshape(
    origin: &str,
    keys: BTreeMap<String, (String, usize)>,
    out: &mut LineShape,
) -> CliResult<()> {
    let mut kind = out.kind;
    let mut fwhm = out.fwhm_mhz;
    for (key, (value, lineno)) in keys {
        match key.as_str() {
            "kind" => {
                kind = match value.as_str() {
                    "lorentzian" => LineShapeKind::Lorentzian,
                    "gaussian" => LineShapeKind::Gaussian,
                    other => {
                        return Err(CliError::Parse(format!(
                            "{origin}:{lineno}: unknown lineshape kind '{other}'"
                        )))
                    }
                }
            }
            "fwhm_mhz" => fwhm = parse_f64(origin, &key, &value, lineno)?,
            other => {
                return Err(CliError::Parse(format!(
                    "{origin}:{lineno}: unknown key '{other}' in [lineshape]"
                )))
            }
        }
    }
    *out = LineShape::new(kind, fwhm).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(())
}

fn parse_grid(
    origin: &str,
    keys: BTreeMap<String, (String, usize)>,
    out: &mut GridConfig,
) -> CliResult<()> {
    for (key, (value, lineno)) in keys {
        let v = parse_f64(origin, &key, &value, lineno)?;
        match key.as_str() {
            "f_min_mhz" => out.f_min_mhz = v,
            "f_max_mhz" => out.f_max_mhz = v,
            "f_step_mhz" => out.f_step_mhz = v,
            other => {
                return Err(CliError::Parse(format!(
                    "{origin}:{lineno}: unknown key '{other}' in [grid]"
                )))
            }
        }
    }
    Ok(())
}

fn parse_sweep(
    origin: &str,
    keys: BTreeMap<String, (String, usize)>,
    out: &mut SweepConfig,
) -> CliResult<()> {
    for (key, (value, lineno)) in keys {
        let v = parse_f64(origin, &key, &value, lineno)?;
        match key.as_str() {
            "b_min_mt" => out.b_min_mt = v,
            "b_max_mt" => out.b_max_mt = v,
            "b_step_mt" => out.b_step_mt = v,
            other => {
                return Err(CliError::Parse(format!(
                    "{origin}:{lineno}: unknown key '{other}' in [sweep]"
                )))
            }
        }
    }
    Ok(())
}

fn parse_rates(
    origin: &str,
    keys: BTreeMap<String, (String, usize)>,
    out: &mut RateModel,
) -> CliResult<()> {
    for (key, (value, lineno)) in keys {
        let v = parse_f64(origin, &key, &value, lineno)?;
        match key.as_str() {
            "pump_per_ns" => out.pump_rate = v,
            "rf_mix_per_ns" => out.rf_mix_rate = v,
            "radiative_per_ns" => {
                out.set_rate(LEVEL_ES0, LEVEL_GS0, v, true);
                out.set_rate(LEVEL_ES1, LEVEL_GS1, v, true);
            }
            "isc_es0_se_per_ns" => out.set_rate(LEVEL_ES0, LEVEL_SE, v, false),
            "isc_es1_se_per_ns" => out.set_rate(LEVEL_ES1, LEVEL_SE, v, false),
            "se_gs0_per_ns" => out.set_rate(LEVEL_SE, LEVEL_GS0, v, false),
            "se_gs1_per_ns" => out.set_rate(LEVEL_SE, LEVEL_GS1, v, false),
            other => {
                return Err(CliError::Parse(format!(
                    "{origin}:{lineno}: unknown key '{other}' in [rates]"
                )))
            }
        }
    }
    out.validate()
        .map_err(|e| CliError::Parse(format!("{origin}: [rates]: {e}")))?;
    Ok(())
}
