//! Built-in experiment configurations at two scales: desk and full (`paper`).
//!
//! The TOML sources live in `presets/{desk,paper}/` and are compiled in.

use std::fmt;
use std::str::FromStr;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scale {
    /// Shortened runs that finish on a laptop core.
    Desk,
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3a,
    Fig3b,
    Fig3c,
    AppendixATanh,
    AppendixAHardTanh,
    AppendixASignSwish,
    AppendixC,
    /// Random-label MNIST: a tanh DNN and an STE BNN.
    AppendixD,
}

/// Thresholds for the desk-scale synthetic STE run. Calibrated on seeds
/// 0, 1, 2; revisit if the seeds change.
pub mod calibration {
    pub const LOSS_SMOOTHING_WINDOW: usize = 100;
    pub const MIN_LAST_HIDDEN_ITY_GAIN_BITS: f64 = 0.2;
    pub const MAX_ITX_DROP_BITS: f64 = 0.3;
    pub const RANDOM_LABEL_MIN_ACCURACY_GAP: f64 = 0.10;
    pub const RANDOM_LABEL_MAX_BNN_ACCURACY: f64 = 0.20;
}

impl Figure {
    pub const ALL: [Figure; 11] = [
        Figure::Fig2a,
        Figure::Fig2b,
        Figure::Fig2c,
        Figure::Fig3a,
        Figure::Fig3b,
        Figure::Fig3c,
        Figure::AppendixATanh,
        Figure::AppendixAHardTanh,
        Figure::AppendixASignSwish,
        Figure::AppendixC,
        Figure::AppendixD,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig2c => "fig2c",
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig3c => "fig3c",
            Figure::AppendixATanh => "appendix-a-tanh",
            Figure::AppendixAHardTanh => "appendix-a-hard-tanh",
            Figure::AppendixASignSwish => "appendix-a-sign-swish",
            Figure::AppendixC => "appendix-c",
            Figure::AppendixD => "appendix-d",
        }
    }

    fn sources(self, scale: Scale) -> Vec<&'static str> {
        macro_rules! both {
            ($f:literal) => {
                match scale {
                    Scale::Desk => include_str!(concat!("../../presets/desk/", $f, ".toml")),
                    Scale::Paper => include_str!(concat!("../../presets/paper/", $f, ".toml")),
                }
            };
        }
        match self {
            Figure::Fig2a => vec![both!("fig2a")],
            Figure::Fig2b => vec![both!("fig2b")],
            Figure::Fig2c => vec![both!("fig2c")],
            Figure::Fig3a => vec![both!("fig3a")],
            Figure::Fig3b => vec![both!("fig3b")],
            Figure::Fig3c => vec![both!("fig3c")],
            Figure::AppendixATanh => vec![both!("appendix-a-tanh")],
            Figure::AppendixAHardTanh => vec![both!("appendix-a-hard-tanh")],
            Figure::AppendixASignSwish => vec![both!("appendix-a-sign-swish")],
            Figure::AppendixC => vec![both!("appendix-c")],
            Figure::AppendixD => vec![both!("appendix-d-dnn"), both!("appendix-d-bnn")],
        }
    }

    /// One config per trained model (two for the random-label comparison).
    pub fn configs(self, scale: Scale) -> Result<Vec<ExperimentConfig>> {
        self.sources(scale)
            .into_iter()
            .map(ExperimentConfig::from_toml_str)
            .collect()
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Figure::ALL.iter().map(|f| f.name()).collect();
                Error::InvalidArgument(format!("unknown figure {s:?}, expected one of {names:?}"))
            })
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        })
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            _ => Err(Error::InvalidArgument(format!(
                "unknown scale {s:?}, expected desk or paper"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::DatasetSpec;
    use crate::nn::ActivationKind;

    #[test]
    fn every_preset_parses_and_validates() {
        for fig in Figure::ALL {
            for scale in [Scale::Desk, Scale::Paper] {
                for c in fig.configs(scale).unwrap() {
                    c.validate().unwrap();
                    assert!(c.name.ends_with(&scale.to_string()), "{}", c.name);
                }
            }
            assert_eq!(fig.name().parse::<Figure>().unwrap(), fig);
        }
        assert!("fig9".parse::<Figure>().is_err());
    }

    #[test]
    fn full_scale_hyperparameters() {
        for fig in [Figure::Fig2a, Figure::Fig2b, Figure::Fig2c] {
            let c = &fig.configs(Scale::Paper).unwrap()[0];
            assert_eq!(c.network.hidden, vec![10, 8, 6, 4, 2]);
            assert_eq!((c.batch_size, c.learning_rate, c.epochs), (64, 1e-4, 8000));
            assert_eq!(c.seeds.len(), 5);
            assert!(c.network.binary);
        }
        for fig in [Figure::Fig3a, Figure::Fig3b, Figure::Fig3c] {
            let c = &fig.configs(Scale::Paper).unwrap()[0];
            assert_eq!(c.network.hidden, vec![1024, 20, 20, 20]);
            assert_eq!((c.batch_size, c.learning_rate, c.epochs), (128, 1e-5, 5000));
            assert!(matches!(
                c.dataset,
                DatasetSpec::Mnist {
                    train_subset: None,
                    validation_subset: None,
                    ..
                }
            ));
        }
        let lr = |f: Figure| f.configs(Scale::Paper).unwrap()[0].learning_rate;
        assert_eq!(lr(Figure::AppendixATanh), 4e-4);
        assert_eq!(lr(Figure::AppendixAHardTanh), 4e-4);
        assert_eq!(lr(Figure::AppendixASignSwish), 1e-3);
    }

    #[test]
    fn desk_scale() {
        let c = &Figure::Fig2a.configs(Scale::Desk).unwrap()[0];
        assert_eq!((c.epochs, c.seeds.len()), (2000, 3));
        assert_eq!(c.network.activation, ActivationKind::SteSign);
        let c = &Figure::Fig3a.configs(Scale::Desk).unwrap()[0];
        assert_eq!((c.epochs, c.seeds.len()), (300, 2));
        let d = Figure::AppendixD.configs(Scale::Desk).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|c| c.label_shuffle && c.epochs == 300));
        assert!(!d[0].network.binary && d[1].network.binary);
    }
}
