//! Mini-language for naming operators on a GPO system:
//! `pi`, `phi`, `pi^N`, `phi^N`, `cos(pi)`, `cos(phi)`, `random(seed)`.

use mereology::gpo::GpoSystem;
use mereology::hilbert::{random_hermitian, Operator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OperatorSpec {
    PiPow(u32),
    PhiPow(u32),
    CosPi,
    CosPhi,
    Random(u64),
}

impl OperatorSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let s = text.trim();
        if s.is_empty() {
            return Err("operator spec is empty".into());
        }
        if let Some(rest) = s.strip_prefix("cos(").and_then(|r| r.strip_suffix(')')) {
            return match rest.trim() {
                "pi" => Ok(Self::CosPi),
                "phi" => Ok(Self::CosPhi),
                other => Err(format!("unknown cosine argument \"{other}\"")),
            };
        }
        if let Some(rest) = s.strip_prefix("random(").and_then(|r| r.strip_suffix(')')) {
            return rest
                .trim()
                .parse::<u64>()
                .map(Self::Random)
                .map_err(|_| format!("random() needs an unsigned seed, got \"{rest}\""));
        }
        let (base, power) = match s.split_once('^') {
            Some((b, p)) => {
                let n: u32 = p
                    .trim()
                    .parse()
                    .map_err(|_| format!("exponent \"{p}\" is not a positive integer"))?;
                if n == 0 {
                    return Err("exponent must be at least 1".into());
                }
                (b.trim(), n)
            }
            None => (s, 1),
        };
        match base {
            "pi" => Ok(Self::PiPow(power)),
            "phi" => Ok(Self::PhiPow(power)),
            other => Err(format!("unknown operator token \"{other}\"")),
        }
    }

    pub fn build(&self, g: &GpoSystem) -> Operator {
        match self {
            Self::PiPow(n) => g.pi_pow(*n as usize),
            Self::PhiPow(n) => g.phi_pow(*n as usize),
            Self::CosPi => g.cos_pi(),
            Self::CosPhi => g.cos_phi(),
            Self::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                random_hermitian(g.d, &mut rng)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::PiPow(1) => "pi".into(),
            Self::PiPow(n) => format!("pi^{n}"),
            Self::PhiPow(1) => "phi".into(),
            Self::PhiPow(n) => format!("phi^{n}"),
            Self::CosPi => "cos(pi)".into(),
            Self::CosPhi => "cos(phi)".into(),
            Self::Random(seed) => format!("random({seed})"),
        }
    }
}
