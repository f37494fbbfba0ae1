//! Seeded random games and exhaustive enumeration of small games.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::game::{Edge, GameKind, GameSpec, Node, Owner};
use crate::weight::{Rational, WeightValue};

/// Identifies the random stream; bump when the sampling procedure changes.
pub const GENERATOR_ID: &str = "chacha8/rand_chacha-0.3/u64-rejection/v1";

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    Invalid(String),
    #[error("enumeration has {size} games, more than the cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightSpec {
    /// Uniform over an explicit list.
    Set(Vec<Rational>),
    /// Uniform denominator in `1..=max_den`, then uniform numerator so that
    /// the value lies in `[lo, hi]`.
    Range { lo: i64, hi: i64, max_den: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub n: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    pub weights: WeightSpec,
    pub kind: GameKind,
    pub bipartite: bool,
    pub seed: u64,
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Invalid(m.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if self.min_degree == 0 || self.min_degree > self.max_degree {
            return bad("out-degree range must satisfy 1 <= min <= max");
        }
        if self.bipartite && self.n < 2 {
            return bad("bipartite games need at least two nodes");
        }
        match &self.weights {
            WeightSpec::Set(s) if s.is_empty() => return bad("empty weight set"),
            WeightSpec::Range { lo, hi, max_den } if lo > hi || *max_den == 0 => {
                return bad("weight range must satisfy lo <= hi and max_den >= 1")
            }
            _ => {}
        }
        if let GameKind::Discounted { lambda } = &self.kind {
            if *lambda <= Rational::from_integer(0.into()) || *lambda >= Rational::from_integer(1.into()) {
                return bad("discount out of range");
            }
        }
        Ok(())
    }
}

/// Uniform integer in `0..k` by rejection sampling.
fn below(rng: &mut ChaCha8Rng, k: u64) -> u64 {
    assert!(k > 0);
    let zone = u64::MAX - (u64::MAX % k);
    loop {
        let r = rng.next_u64();
        if r < zone {
            return r % k;
        }
    }
}

/// Uniform integer in `lo..=hi`.
fn between(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    let span = (hi as i128 - lo as i128 + 1) as u128;
    if span > u64::MAX as u128 {
        return rng.next_u64() as i64;
    }
    (lo as i128 + below(rng, span as u64) as i128) as i64
}

fn sample_weight(rng: &mut ChaCha8Rng, spec: &WeightSpec) -> Rational {
    match spec {
        WeightSpec::Set(s) => s[below(rng, s.len() as u64) as usize].clone(),
        WeightSpec::Range { lo, hi, max_den } => {
            let den = 1 + below(rng, *max_den) as i64;
            let num = between(rng, lo.saturating_mul(den), hi.saturating_mul(den));
            Rational::new(num.into(), den.into())
        }
    }
}

/// Seed of instance `index` in a batch started from `seed`: the first word
/// of ChaCha8 stream `index`.
pub fn instance_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

pub fn node_id(i: usize) -> String {
    format!("v{i}")
}

pub fn random_game(cfg: &GenConfig) -> Result<GameSpec, GenError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n;
    let owners: Vec<Owner> = (0..n)
        .map(|i| match (cfg.bipartite, i) {
            (true, 0) => Owner::Max,
            (true, 1) => Owner::Min,
            _ if below(&mut rng, 2) == 0 => Owner::Max,
            _ => Owner::Min,
        })
        .collect();
    let nodes: Vec<Node> = owners
        .iter()
        .enumerate()
        .map(|(i, &owner)| Node { id: node_id(i), owner })
        .collect();
    let mut edges = Vec::new();
    for (a, &owner) in owners.iter().enumerate() {
        let targets: Vec<usize> = (0..n)
            .filter(|&b| !cfg.bipartite || owners[b] != owner)
            .collect();
        let degree = cfg.min_degree + below(&mut rng, (cfg.max_degree - cfg.min_degree + 1) as u64) as usize;
        for _ in 0..degree {
            let to = targets[below(&mut rng, targets.len() as u64) as usize];
            let weight = sample_weight(&mut rng, &cfg.weights);
            edges.push(Edge { from: a, to, weight: WeightValue::Rational(weight) });
        }
    }
    Ok(GameSpec::new(cfg.kind.clone(), nodes, edges))
}

/// One node's owner and out-edges, as `(target, weight index)` pairs sorted
/// ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeChoice {
    pub owner: Owner,
    pub out: Vec<(usize, usize)>,
}

/// The space of all games on `n` nodes with out-degree in `1..=max_degree`
/// and weights from a fixed list.
///
/// Order: every node picks from the same list of choices, sorted by owner
/// (Max first), then out-degree, then the sorted out-edge multiset
/// lexicographically. Games are numbered in mixed radix with node 0 the most
/// significant digit.
#[derive(Clone, Debug)]
pub struct GameSpace {
    pub n: usize,
    pub weights: Vec<Rational>,
    pub kind: GameKind,
    choices: Vec<NodeChoice>,
}

fn multisets(items: usize, size: usize) -> Vec<Vec<usize>> {
    // non-decreasing sequences, in lexicographic order
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(items: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..items {
            cur.push(i);
            rec(items, size, i, cur, out);
            cur.pop();
        }
    }
    rec(items, size, 0, &mut cur, &mut out);
    out
}

impl GameSpace {
    pub fn new(n: usize, max_degree: usize, weights: Vec<Rational>, kind: GameKind) -> Result<Self, GenError> {
        if n == 0 || max_degree == 0 || weights.is_empty() {
            return Err(GenError::Invalid("need n >= 1, max_degree >= 1 and a weight".into()));
        }
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|t| (0..weights.len()).map(move |w| (t, w)))
            .collect();
        let mut choices = Vec::new();
        for owner in [Owner::Max, Owner::Min] {
            for d in 1..=max_degree {
                for m in multisets(pairs.len(), d) {
                    choices.push(NodeChoice { owner, out: m.iter().map(|&i| pairs[i]).collect() });
                }
            }
        }
        Ok(Self { n, weights, kind, choices })
    }

    pub fn choices(&self) -> &[NodeChoice] {
        &self.choices
    }

    pub fn len(&self) -> u128 {
        (self.choices.len() as u128).pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Choice index per node for game number `index`.
    pub fn digits(&self, mut index: u128) -> Vec<usize> {
        let base = self.choices.len() as u128;
        let mut d = vec![0usize; self.n];
        for slot in d.iter_mut().rev() {
            *slot = (index % base) as usize;
            index /= base;
        }
        d
    }

    pub fn game(&self, index: u128) -> GameSpec {
        let digits = self.digits(index);
        let nodes = digits
            .iter()
            .enumerate()
            .map(|(i, &c)| Node { id: node_id(i), owner: self.choices[c].owner })
            .collect();
        let mut edges = Vec::new();
        for (a, &c) in digits.iter().enumerate() {
            for &(to, w) in &self.choices[c].out {
                edges.push(Edge { from: a, to, weight: WeightValue::Rational(self.weights[w].clone()) });
            }
        }
        GameSpec::new(self.kind.clone(), nodes, edges)
    }

    pub fn iter(&self) -> impl Iterator<Item = GameSpec> + '_ {
        (0..self.len()).map(|i| self.game(i))
    }
}

/// Every game of the configuration space once, in [`GameSpace`] order.
pub fn enumerate_games(
    n: usize,
    max_degree: usize,
    weights: Vec<Rational>,
    kind: GameKind,
    cap: u128,
) -> Result<GameSpace, GenError> {
    let space = GameSpace::new(n, max_degree, weights, kind)?;
    if space.len() > cap {
        return Err(GenError::CapExceeded { size: space.len(), cap });
    }
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::json::serialize_game;
    use crate::weight::{int, rat};

    fn cfg(n: usize, bipartite: bool, seed: u64) -> GenConfig {
        GenConfig {
            n,
            min_degree: 1,
            max_degree: 3,
            weights: WeightSpec::Range { lo: -10, hi: 10, max_den: 4 },
            kind: GameKind::Discounted { lambda: rat(1, 2) },
            bipartite,
            seed,
        }
    }

    #[test]
    fn deterministic() {
        let a = serialize_game(&random_game(&cfg(6, false, 7)).unwrap());
        let b = serialize_game(&random_game(&cfg(6, false, 7)).unwrap());
        assert_eq!(a, b);
        let c = serialize_game(&random_game(&cfg(6, false, 8)).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn bipartite_is_honoured() {
        for seed in 0..50 {
            let g = random_game(&cfg(5, true, seed)).unwrap();
            assert!(g.is_bipartite());
            assert!(g.validate().is_ok());
        }
    }

    #[test]
    fn single_node_single_edge() {
        let mut c = cfg(1, false, 3);
        c.max_degree = 1;
        let g = random_game(&c).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!((g.edges[0].from, g.edges[0].to), (0, 0));
    }

    #[test]
    fn invalid_configs() {
        assert!(random_game(&cfg(1, true, 0)).is_err());
        let mut c = cfg(3, false, 0);
        c.min_degree = 0;
        assert!(random_game(&c).is_err());
    }

    #[test]
    fn range_weights_stay_in_range() {
        for seed in 0..30 {
            let g = random_game(&cfg(8, false, seed)).unwrap();
            for e in &g.edges {
                let w = e.weight.as_rational().unwrap();
                assert!(*w >= int(-10) && *w <= int(10));
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        let kind = GameKind::Energy;
        let s = enumerate_games(1, 1, vec![int(0)], kind.clone(), 100).unwrap();
        assert_eq!(s.len(), 2);
        let s = enumerate_games(1, 2, vec![int(-1), int(1)], kind.clone(), 100).unwrap();
        assert_eq!(s.len(), 10);
        let games: Vec<_> = s.iter().collect();
        assert!(games.iter().all(|g| g.validate().is_ok()));
        let mut bytes: Vec<_> = games.iter().map(serialize_game).collect();
        bytes.sort();
        bytes.dedup();
        assert_eq!(bytes.len(), 10);
        assert!(enumerate_games(3, 2, vec![int(0)], kind, 10).is_err());
    }

    #[test]
    fn enumeration_order_is_documented() {
        let s = enumerate_games(2, 1, vec![int(0)], GameKind::Energy, 100).unwrap();
        // choices: Max→0, Max→1, Min→0, Min→1
        assert_eq!(s.len(), 16);
        let g = s.game(1);
        assert_eq!(g.nodes[0].owner, Owner::Max);
        assert_eq!((g.edges[1].from, g.edges[1].to), (1, 1));
        let g = s.game(15);
        assert_eq!(g.nodes[0].owner, Owner::Min);
        assert_eq!(g.edges[0].to, 1);
    }
}
