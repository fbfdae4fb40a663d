//! System specifications: shorthand strings such as `s3-dual`,
//! `rademacher:dims=2x3,n=10000` or `trig-blocked:dims=1,2,levels=6`, and
//! JSON files holding a serialized [`SystemRecipe`].

use std::collections::BTreeMap;
use std::path::Path;

use qoslab_core::matcore::RngStream;
use qoslab_core::systems::{complete_dims, BlockBase, FiniteGroup, QSystemInstance, SystemRecipe};

use crate::UsageError;

/// Stream id reserved for system construction, so experiment draws never
/// overlap the ensemble.
pub const SYSTEM_STREAM: u64 = 1;
pub const DEFAULT_SAMPLES: usize = 10_000;

/// `name[:key=value,...]`; a bare item after `key=value` extends that
/// value, so `dims=1,1,2` is one key.
fn split_shorthand(s: &str) -> Result<(String, BTreeMap<String, String>), UsageError> {
    let (name, rest) = s.split_once(':').unwrap_or((s, ""));
    let mut keys: BTreeMap<String, String> = BTreeMap::new();
    let mut last: Option<String> = None;
    for item in rest.split(',').filter(|t| !t.is_empty()) {
        match item.split_once('=') {
            Some((k, v)) => {
                let k = k.trim().to_ascii_lowercase();
                if keys.insert(k.clone(), v.trim().to_string()).is_some() {
                    return Err(UsageError(format!("key {k:?} given twice in {s:?}")));
                }
                last = Some(k);
            }
            None => {
                let k = last
                    .as_ref()
                    .ok_or_else(|| UsageError(format!("stray item {item:?} in {s:?}")))?;
                let v = keys.get_mut(k).expect("key was inserted");
                v.push(',');
                v.push_str(item.trim());
            }
        }
    }
    Ok((name.trim().to_ascii_lowercase(), keys))
}

/// `1,2,3` lists dimensions; `dxc` repeats `d` `c` times, so `1x8` is eight
/// scalar indices and `2x3,1` is `2,2,2,1`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>, UsageError> {
    let bad = || UsageError(format!("bad dimension list {s:?}"));
    let mut dims = Vec::new();
    for item in s.split(',') {
        match item.split_once('x') {
            Some((d, c)) => {
                let d: usize = d.trim().parse().map_err(|_| bad())?;
                let c: usize = c.trim().parse().map_err(|_| bad())?;
                dims.extend(std::iter::repeat(d).take(c));
            }
            None => dims.push(item.trim().parse().map_err(|_| bad())?),
        }
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(bad());
    }
    Ok(dims)
}

fn parse_twice_j(s: &str) -> Result<u32, UsageError> {
    let bad = || UsageError(format!("bad spin {s:?}; use 0, 1/2, 1, 3/2, …"));
    match s.split_once('/') {
        Some((n, "2")) => n.trim().parse().map_err(|_| bad()),
        Some(_) => Err(bad()),
        None => s.trim().parse::<u32>().map(|j| 2 * j).map_err(|_| bad()),
    }
}

fn take<T: std::str::FromStr>(
    keys: &mut BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, UsageError> {
    keys.remove(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| UsageError(format!("bad value {v:?} for {key}")))
        })
        .transpose()
}

/// Turns a shorthand or a JSON file path into a recipe. Random ensembles
/// draw from stream [`SYSTEM_STREAM`] of `seed` unless `seed=` overrides it.
pub fn parse_system(spec: &str, seed: u64) -> Result<SystemRecipe, UsageError> {
    if spec.ends_with(".json") || Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| UsageError(format!("cannot read {spec}: {e}")))?;
        return serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("bad system file {spec}: {e}")));
    }
    let (name, mut keys) = split_shorthand(spec)?;
    let seed = take::<u64>(&mut keys, "seed")?.unwrap_or(seed);
    let stream = RngStream::new(seed, SYSTEM_STREAM).descriptor();
    let recipe = match name.as_str() {
        "s3-dual" => SystemRecipe::GroupDual {
            group: FiniteGroup::S3,
        },
        "d4-dual" => SystemRecipe::GroupDual {
            group: FiniteGroup::D4,
        },
        "q8-dual" => SystemRecipe::GroupDual {
            group: FiniteGroup::Q8,
        },
        n if n.starts_with('z') && n.ends_with("-dual") => {
            let order = n[1..n.len() - 5]
                .parse()
                .map_err(|_| UsageError(format!("bad cyclic group {n:?}")))?;
            SystemRecipe::GroupDual {
                group: FiniteGroup::Cyclic(order),
            }
        }
        "su2" | "su2-dual" => {
            let twice_j_max = match keys.remove("j") {
                Some(j) => parse_twice_j(&j)?,
                None => 3,
            };
            let samples = take(&mut keys, "n")?.unwrap_or(DEFAULT_SAMPLES);
            SystemRecipe::Su2Dual {
                twice_j_max,
                samples,
                seed: stream,
            }
        }
        "rademacher" | "steinhaus" | "gaussian" => {
            let dims = match (keys.remove("dims"), take::<usize>(&mut keys, "d")?) {
                (Some(_), Some(_)) => {
                    return Err(UsageError("give either dims= or d=, not both".into()))
                }
                (Some(d), None) => parse_dims(&d)?,
                (None, Some(d)) => vec![d],
                (None, None) => vec![1],
            };
            let samples = take(&mut keys, "n")?.unwrap_or(DEFAULT_SAMPLES);
            match name.as_str() {
                "rademacher" => SystemRecipe::Rademacher {
                    dims,
                    samples,
                    seed: stream,
                },
                "steinhaus" => SystemRecipe::Steinhaus {
                    dims,
                    samples,
                    seed: stream,
                },
                _ => SystemRecipe::Gaussian {
                    dims,
                    samples,
                    seed: stream,
                },
            }
        }
        "signs" => SystemRecipe::SignEnumeration {
            count: take(&mut keys, "m")?.unwrap_or(2),
        },
        "walsh-blocked" | "trig-blocked" => {
            let base = if name.starts_with("walsh") {
                BlockBase::Walsh
            } else {
                BlockBase::Trig
            };
            let dims = parse_dims(&keys.remove("dims").unwrap_or_else(|| "1".into()))?;
            let levels = take(&mut keys, "levels")?;
            let (dims, levels) =
                complete_dims(&dims, levels).map_err(|e| UsageError(e.to_string()))?;
            SystemRecipe::BlockedScalar { base, dims, levels }
        }
        _ => return Err(UsageError(format!("unknown system {name:?}"))),
    };
    if let Some(k) = keys.keys().next() {
        return Err(UsageError(format!("unknown key {k:?} for {name}")));
    }
    Ok(recipe)
}

pub fn build_system(spec: &str, seed: u64) -> Result<(SystemRecipe, QSystemInstance), UsageError> {
    let recipe = parse_system(spec, seed)?;
    let sys = recipe.build().map_err(|e| UsageError(e.to_string()))?;
    Ok((recipe, sys))
}

/// Index positions from `--sigma`: `all`, a count `k` (the first `k`
/// indices) or a comma list of index ids.
pub fn parse_sigma(sys: &QSystemInstance, sigma: Option<&str>) -> Result<Vec<usize>, UsageError> {
    let params = sys.params();
    match sigma.map(str::trim) {
        None | Some("all") => Ok((0..params.len()).collect()),
        Some(s) => {
            if let Ok(k) = s.parse::<usize>() {
                if k == 0 || k > params.len() {
                    return Err(UsageError(format!(
                        "--sigma {k} outside 1..={}",
                        params.len()
                    )));
                }
                return Ok((0..k).collect());
            }
            s.split(',')
                .map(|id| {
                    params.position(id.trim()).ok_or_else(|| {
                        UsageError(format!(
                            "unknown index {id:?}; known: {}",
                            params.sigma_ids().join(",")
                        ))
                    })
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_grammar() {
        assert_eq!(parse_dims("1,1,2").unwrap(), [1, 1, 2]);
        assert_eq!(parse_dims("1x8").unwrap(), [1; 8]);
        assert_eq!(parse_dims("2x3,1").unwrap(), [2, 2, 2, 1]);
        assert!(parse_dims("0").is_err());
        assert!(parse_dims("a").is_err());
    }

    #[test]
    fn shorthands() {
        assert!(matches!(
            parse_system("q8-dual", 0).unwrap(),
            SystemRecipe::GroupDual {
                group: FiniteGroup::Q8
            }
        ));
        assert!(matches!(
            parse_system("z16-dual", 0).unwrap(),
            SystemRecipe::GroupDual {
                group: FiniteGroup::Cyclic(16)
            }
        ));
        match parse_system("su2:j=3/2,n=2000", 0).unwrap() {
            SystemRecipe::Su2Dual {
                twice_j_max,
                samples,
                ..
            } => assert_eq!((twice_j_max, samples), (3, 2000)),
            r => panic!("{r:?}"),
        }
        match parse_system("rademacher:dims=1x8,n=50000", 0).unwrap() {
            SystemRecipe::Rademacher { dims, samples, .. } => {
                assert_eq!((dims, samples), (vec![1; 8], 50000))
            }
            r => panic!("{r:?}"),
        }
        match parse_system("walsh-blocked:dims=1,1,2,levels=4", 0).unwrap() {
            SystemRecipe::BlockedScalar { dims, levels, .. } => {
                assert_eq!(levels, 4);
                assert_eq!(dims.iter().map(|d| d * d).sum::<usize>(), 16);
            }
            r => panic!("{r:?}"),
        }
        assert!(parse_system("nope", 0).is_err());
        assert!(parse_system("rademacher:dims=1,bogus=3", 0).is_err());
        assert!(parse_system("gaussian:d=1,dims=2", 0).is_err());
        assert!(parse_system("su2:j=1/3", 0).is_err());
    }

    #[test]
    fn seeds_feed_random_recipes() {
        let a = parse_system("steinhaus:d=2,n=1000", 5).unwrap();
        let b = parse_system("steinhaus:d=2,n=1000,seed=5", 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, parse_system("steinhaus:d=2,n=1000", 6).unwrap());
    }
}
