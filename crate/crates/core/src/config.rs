//! Run configuration shared by the command-line subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gwishart::PriorSettings;
use crate::ihmm::IhmmConfig;
use crate::mixture::MixtureConfig;
use crate::summaries::{BacktestConfig, BacktestWindow};
use crate::trace::ChainSettings;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    #[default]
    Dpm,
    PitmanYor,
    Ihmm,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown model {s:?}; expected dpm, pitman-yor or ihmm")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    pub data: Option<PathBuf>,
    pub out: PathBuf,
    /// Total iterations per chain, burn-in included.
    pub sweeps: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
    pub chains: usize,
    /// Centre and scale every column before fitting.
    pub standardize: bool,
    pub prior: PriorSettings,
    pub mixture: MixtureConfig,
    pub ihmm: IhmmConfig,
    pub backtest: BacktestWindow,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: Model::Dpm,
            data: None,
            out: PathBuf::from("out"),
            sweeps: 25_000,
            burnin: 5_000,
            thin: 1,
            seed: 1,
            chains: 1,
            standardize: true,
            prior: PriorSettings::default(),
            mixture: MixtureConfig::default(),
            ihmm: IhmmConfig::default(),
            backtest: BacktestWindow::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Overrides one value by dotted key, e.g. `mixture.discount=0.2` or
    /// `ihmm.graph_prior={"kind":"bernoulli","q":0.3}`. Values that do not
    /// parse as JSON are taken as strings.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut root = serde_json::to_value(&*self).expect("config serializes");
        let mut slot = &mut root;
        for part in key.split('.') {
            slot = slot
                .as_object_mut()
                .and_then(|m| m.get_mut(part))
                .ok_or_else(|| Error::Config(format!("unknown config key {key:?}")))?;
        }
        *slot = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
        *self = serde_json::from_value(root).map_err(|e| Error::Config(format!("{key}: {e}")))?;
        Ok(())
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<'a>(&mut self, pairs: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for pair in pairs {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {pair:?} is not of the form key=value")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn chain(&self) -> Result<ChainSettings> {
        ChainSettings::new(self.sweeps, self.burnin, self.thin)
    }

    /// The mixture settings as run: Pitman-Yor requires a positive discount
    /// and the DP forces it to zero.
    pub fn effective_mixture(&self) -> MixtureConfig {
        let mut m = self.mixture.clone();
        if self.model == Model::Dpm {
            m.discount = 0.0;
        }
        m
    }

    pub fn backtest_config(&self) -> BacktestConfig {
        BacktestConfig {
            window: self.backtest,
            prior: self.prior,
            ihmm: self.ihmm.clone(),
            mixture: self.effective_mixture(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.chain()?;
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        self.prior.spec::<f64>(1)?;
        self.mixture.validate()?;
        if self.model == Model::PitmanYor && self.mixture.discount == 0.0 {
            return Err(Error::Config("pitman-yor needs mixture.discount in (0, 1)".into()));
        }
        if self.model == Model::Dpm && self.mixture.discount != 0.0 {
            return Err(Error::Config(format!(
                "dpm has discount 0; use --model pitman-yor for discount {}",
                self.mixture.discount
            )));
        }
        self.ihmm.validate()?;
        self.backtest.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::GraphPrior;

    #[test]
    fn defaults_round_trip_and_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
        assert_eq!(RunConfig::from_json("{}").unwrap(), c);
    }

    #[test]
    fn dotted_overrides() {
        let mut c = RunConfig::default();
        c.apply_overrides([
            "mixture.discount=0.25",
            "model=pitman-yor",
            "ihmm.graph_prior={\"kind\":\"bernoulli\",\"q\":0.3}",
        ])
        .unwrap();
        assert_eq!(c.mixture.discount, 0.25);
        assert_eq!(c.model, Model::PitmanYor);
        assert_eq!(c.ihmm.graph_prior, GraphPrior::Bernoulli { q: 0.3 });
        c.validate().unwrap();
        assert!(c.set("mixture.nope", "1").is_err());
        assert!(c.set("sweeps", "many").is_err());
        assert!(c.apply_overrides(["sweeps"]).is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let mut c = RunConfig::default();
        c.mixture.discount = 1.5;
        let e = c.validate().unwrap_err();
        assert!(e.is_usage());
        assert!(e.to_string().contains("discount"));
        let mut c = RunConfig::default();
        c.burnin = c.sweeps;
        assert!(c.validate().unwrap_err().is_usage());
        let mut c = RunConfig::default();
        c.prior.delta0 = 2.0;
        assert!(c.validate().unwrap_err().is_usage());
        assert!(RunConfig::from_json(r#"{"sweep": 3}"#).unwrap_err().is_usage());
        assert!("hmm".parse::<Model>().is_err());
        assert_eq!("ihmm".parse::<Model>().unwrap(), Model::Ihmm);
    }
}
