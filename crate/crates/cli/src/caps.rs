use anyhow::{bail, Context, Result};

/// Size limits applied before any expensive computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub ground_set: usize,
    pub rays: usize,
    pub dim: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { ground_set: 20, rays: 200, dim: 6 }
    }
}

impl Caps {
    /// Parses overrides like `ground_set=14,dim=4` on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut caps = Caps::default();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').with_context(|| format!("cap {part:?} is not key=value"))?;
            let value: usize = value.trim().parse().with_context(|| format!("cap {part:?} has a bad value"))?;
            if value == 0 {
                bail!("cap {key} must be positive");
            }
            match key.trim() {
                "ground_set" => caps.ground_set = value,
                "rays" => caps.rays = value,
                "dim" => caps.dim = value,
                other => bail!("unknown cap {other:?}, expected ground_set, rays or dim"),
            }
        }
        Ok(caps)
    }

    pub fn check_fan(&self, fan: &normalvol_core::fan::MarkedFan) -> Result<()> {
        if fan.n_rays() > self.rays {
            bail!("fan has {} rays, cap is {}", fan.n_rays(), self.rays);
        }
        if fan.dim() > self.dim {
            bail!("fan has dimension {}, cap is {}", fan.dim(), self.dim);
        }
        Ok(())
    }

    pub fn check_ground_set(&self, size: usize) -> Result<()> {
        if size > self.ground_set {
            bail!("ground set has {size} elements, cap is {}", self.ground_set);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        assert_eq!(Caps::parse("").unwrap(), Caps::default());
        assert_eq!(Caps::parse("dim=4, rays=10").unwrap(), Caps { ground_set: 20, rays: 10, dim: 4 });
        assert!(Caps::parse("dim=0").is_err());
        assert!(Caps::parse("depth=3").is_err());
        assert!(Caps::parse("rays").is_err());
    }
}
