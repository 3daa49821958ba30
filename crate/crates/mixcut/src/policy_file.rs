//! Flat `key=value` policy files.
//!
//! ```text
//! # MixCut with fixed β
//! method=mixcut
//! lambda=beta11
//! beta=0.140625
//! gamma=0.5
//! ```
//!
//! `method` picks the defaults; the other keys override them. Recognized keys:
//! `method`, `lambda` (`beta11` or a number), `beta` (`beta11` meaning
//! `1 - η` with `η ~ Beta(1,1)`, or a fixed ratio), `gamma`, `per_sample`
//! (`true`/`false`) and `center` (`uniform`, `interior` or `x,y`).
//! Blank lines and `#` comments are ignored.

use std::path::Path;

use mixcut_core::{AugmentPolicy, Method};

use crate::{Error, Result};

pub const KEYS: [&str; 6] = ["method", "lambda", "beta", "gamma", "per_sample", "center"];

/// Builds a policy from `(key, value)` pairs, in the same way as a file.
pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (usize, &'a str, &'a str)>) -> Result<AugmentPolicy> {
    let pairs: Vec<_> = pairs.into_iter().collect();
    let err = |line: usize, message: String| Error::Policy { line, message };

    for &(line, key, _) in &pairs {
        if !KEYS.contains(&key) {
            return Err(err(line, format!("unknown key `{key}`")));
        }
        if pairs.iter().filter(|p| p.1 == key).count() > 1 {
            return Err(err(line, format!("duplicate key `{key}`")));
        }
    }
    let method = match pairs.iter().find(|p| p.1 == "method") {
        Some(&(line, _, v)) => v.parse::<Method>().map_err(|e| err(line, e.to_string()))?,
        None => Method::MixCut,
    };
    let mut policy = AugmentPolicy::for_method(method);
    for &(line, key, value) in &pairs {
        let bad = |e: mixcut_core::Error| err(line, e.to_string());
        match key {
            "lambda" => policy.lambda = value.parse().map_err(bad)?,
            "beta" => policy.beta = value.parse().map_err(bad)?,
            "center" => policy.center = value.parse().map_err(bad)?,
            "gamma" => {
                policy.gamma = value
                    .parse()
                    .map_err(|_| err(line, format!("gamma is not a number: `{value}`")))?
            }
            "per_sample" => {
                policy.per_sample = value
                    .parse()
                    .map_err(|_| err(line, format!("per_sample must be true or false: `{value}`")))?
            }
            _ => {}
        }
    }
    policy.validate()?;
    Ok(policy)
}

pub fn parse(text: &str) -> Result<AugmentPolicy> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Policy {
            line: i + 1,
            message: format!("expected key=value, found `{line}`"),
        })?;
        pairs.push((i + 1, key.trim(), value.trim()));
    }
    from_pairs(pairs)
}

pub fn read(path: impl AsRef<Path>) -> Result<AugmentPolicy> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text)
}

/// Canonical text form; `parse(&format(p)) == p`.
pub fn format(policy: &AugmentPolicy) -> String {
    format!(
        "method={}\nlambda={}\nbeta={}\ngamma={}\nper_sample={}\ncenter={}\n",
        policy.method, policy.lambda, policy.beta, policy.gamma, policy.per_sample, policy.center
    )
}

/// One-line form for logs and headers.
pub fn format_inline(policy: &AugmentPolicy) -> String {
    format(policy).trim_end().replace('\n', " ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use mixcut_core::{CenterSpec, LambdaSpec, RatioSpec};
    use proptest::prelude::*;

    #[test]
    fn parses_example_file() {
        let p = parse("# fixed beta\nmethod = mixcut\nlambda=beta11\nbeta=0.140625 # 9/64\ngamma=1\n").unwrap();
        assert_eq!(
            p,
            AugmentPolicy::mixcut()
                .with_beta(RatioSpec::Fixed(9.0 / 64.0))
                .with_gamma(1.0)
        );
    }

    #[test]
    fn method_sets_defaults() {
        assert_eq!(parse("method=cutout").unwrap(), AugmentPolicy::cutout());
        assert_eq!(parse("").unwrap(), AugmentPolicy::mixcut());
        assert_eq!(parse("method=none").unwrap(), AugmentPolicy::none());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("method=mixcut\ngamma=1.5").unwrap_err();
        assert!(matches!(e, Error::Core(mixcut_core::Error::InvalidProbability(_))));
        let e = parse("method=mixcut\n\nlamda=0.2").unwrap_err();
        assert!(matches!(e, Error::Policy { line: 3, .. }), "{e}");
        assert!(matches!(parse("method=lmix"), Err(Error::Policy { line: 1, .. })));
        assert!(parse("gamma=0.5\ngamma=0.7").is_err());
        assert!(parse("gamma").is_err());
    }

    fn policies() -> impl Strategy<Value = AugmentPolicy> {
        (
            prop::sample::select(Method::ALL.to_vec()),
            prop::option::of(0.0f64..=1.0),
            prop::option::of(0.0f64..=1.0),
            0.0f64..=1.0,
            any::<bool>(),
            prop_oneof![
                Just(CenterSpec::Uniform),
                Just(CenterSpec::Interior),
                (-10.0f64..60.0, -10.0f64..60.0).prop_map(|(x, y)| CenterSpec::Fixed { x, y })
            ],
        )
            .prop_map(|(method, lambda, beta, gamma, per_sample, center)| AugmentPolicy {
                method,
                lambda: lambda.map_or(LambdaSpec::Beta11, LambdaSpec::Fixed),
                beta: beta.map_or(RatioSpec::OneMinusEtaBeta11, RatioSpec::Fixed),
                gamma,
                per_sample,
                center,
            })
    }

    proptest! {
        #[test]
        fn format_then_parse_is_identity(p in policies()) {
            prop_assert_eq!(parse(&format(&p)).unwrap(), p);
        }
    }
}
