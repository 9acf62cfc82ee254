//! JSON persistence for fitted models.

use randmix::{BasisAtom, CenterScheme, Domain, Error, FitReport, Kernel1D, MixtureModel, RandomBasis};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub kernel: String,
    pub omega: f64,
    /// One `[lo, hi]` pair per dimension.
    pub domain: Vec<[f64; 2]>,
    pub atoms: Vec<BasisAtom>,
    pub alpha: Vec<f64>,
    pub seed: u64,
    pub scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

impl ModelDocument {
    pub fn from_model(model: &MixtureModel, seed: u64, report: Option<&FitReport>) -> Self {
        let basis = model.basis();
        let domain = basis.domain();
        Self {
            format_version: FORMAT_VERSION,
            kernel: basis.kernel().name().to_string(),
            omega: basis.omega(),
            domain: domain.lo().iter().zip(domain.hi()).map(|(&l, &h)| [l, h]).collect(),
            atoms: basis.atoms().to_vec(),
            alpha: model.alpha().to_vec(),
            seed,
            scheme: basis.scheme().as_str().to_string(),
            converged: report.map(|r| r.converged),
            iterations: report.map(|r| r.iterations),
        }
    }

    pub fn to_model(&self) -> randmix::Result<MixtureModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported format_version {}", self.format_version)));
        }
        let _: Kernel1D = self.kernel.parse()?;
        let scheme: CenterScheme = self.scheme.parse()?;
        let domain = Domain::new(
            self.domain.iter().map(|p| p[0]).collect(),
            self.domain.iter().map(|p| p[1]).collect(),
        )?;
        let basis = RandomBasis::from_parts(self.atoms.clone(), self.omega, domain, scheme, Some(self.seed))?;
        MixtureModel::new(basis, self.alpha.clone())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> randmix::Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
