use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    /// Every node inside one square; all connections hear each other.
    SingleSquare,
    /// Three clusters in a row; only adjacent clusters interfere.
    ThreeClusters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyConfig {
    pub setting: Setting,
    /// Side of the deployment square (single square), m.
    pub side: f64,
    /// Connections in the single-square setting.
    pub pairs: usize,
    /// Connections per cluster, left to right.
    pub cluster_pairs: [usize; 3],
    pub cluster_side: f64,
    /// Centre-to-centre cluster distance, m.
    pub cluster_spacing: f64,
    /// Standard deviation of node positions about the cluster centre, m.
    pub cluster_std: f64,
    /// Interference and control-channel range, m.
    pub range: f64,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            setting: Setting::SingleSquare,
            side: 0.20,
            pairs: 9,
            cluster_pairs: [4, 1, 4],
            cluster_side: 0.10,
            cluster_spacing: 0.20,
            cluster_std: 0.02,
            range: 0.30,
        }
    }
}

impl TopologyConfig {
    pub fn three_clusters() -> Self {
        TopologyConfig {
            setting: Setting::ThreeClusters,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("side", self.side),
            ("cluster_side", self.cluster_side),
            ("cluster_spacing", self.cluster_spacing),
            ("cluster_std", self.cluster_std),
            ("range", self.range),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config {
                    location: format!("topology.{name}"),
                    message: format!("must be positive, got {v}"),
                });
            }
        }
        let n = self.connection_count();
        if n == 0 {
            return Err(Error::Config {
                location: "topology".into(),
                message: "no connections configured".into(),
            });
        }
        Ok(())
    }

    pub fn connection_count(&self) -> usize {
        match self.setting {
            Setting::SingleSquare => self.pairs,
            Setting::ThreeClusters => self.cluster_pairs.iter().sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub pos: [f64; 2],
    pub cluster: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub tx: usize,
    pub rx: usize,
    pub cluster: usize,
    /// Position of the connection within its cluster, used for staging.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub nodes: Vec<Node>,
    pub connections: Vec<Connection>,
    pub range: f64,
    interferers: Vec<Vec<usize>>,
}

impl Topology {
    /// Builds the interference relation: connections `i` and `j` interfere
    /// when either transmitter is within range of the other's receiver.
    pub fn new(nodes: Vec<Node>, connections: Vec<Connection>, range: f64) -> Result<Self> {
        let mut used = vec![false; nodes.len()];
        for c in &connections {
            for n in [c.tx, c.rx] {
                if n >= nodes.len() || used[n] {
                    return Err(Error::invalid(format!("node {n} missing or in two connections")));
                }
                used[n] = true;
            }
        }
        let mut t = Topology {
            nodes,
            connections,
            range,
            interferers: Vec::new(),
        };
        let n = t.connections.len();
        t.interferers = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| {
                        let (a, b) = (t.connections[i], t.connections[j]);
                        j != i && (t.in_range(b.tx, a.rx) || t.in_range(a.tx, b.rx))
                    })
                    .collect()
            })
            .collect();
        Ok(t)
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.nodes[a].pos, self.nodes[b].pos);
        (p[0] - q[0]).hypot(p[1] - q[1])
    }

    pub fn in_range(&self, a: usize, b: usize) -> bool {
        self.distance(a, b) < self.range
    }

    /// Propagation delay between two nodes at sound speed `c`.
    pub fn delay(&self, a: usize, b: usize, c: f64) -> f64 {
        self.distance(a, b) / c
    }

    /// Power gain between two nodes: unity within range, zero beyond. The
    /// tabulated BER already carries the in-body channel, so distance only
    /// decides who hears whom.
    pub fn gain(&self, a: usize, b: usize) -> f64 {
        if a == b || self.in_range(a, b) {
            1.0
        } else {
            0.0
        }
    }

    /// Connections whose transmissions reach connection `i` (symmetric).
    pub fn interferers(&self, i: usize) -> &[usize] {
        &self.interferers[i]
    }

    pub fn cluster_count(&self) -> usize {
        self.nodes.iter().map(|n| n.cluster + 1).max().unwrap_or(0)
    }

    pub fn max_interferers(&self) -> usize {
        self.interferers.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Random node placement for `config`, reproducible from `seed`.
pub fn generate_topology(config: &TopologyConfig, seed: u64) -> Result<Topology> {
    config.validate()?;
    let mut rng = substream(seed, tag::TOPOLOGY, 0);
    let mut nodes = Vec::new();
    let mut connections = Vec::new();
    match config.setting {
        Setting::SingleSquare => {
            for rank in 0..config.pairs {
                for _ in 0..2 {
                    let pos = [rng.gen::<f64>() * config.side, rng.gen::<f64>() * config.side];
                    nodes.push(Node { pos, cluster: 0 });
                }
                connections.push(Connection {
                    tx: 2 * rank,
                    rx: 2 * rank + 1,
                    cluster: 0,
                    rank,
                });
            }
        }
        Setting::ThreeClusters => {
            let spread = Normal::new(0.0, config.cluster_std).map_err(|e| Error::invalid(e.to_string()))?;
            let half = config.cluster_side / 2.0;
            for (cluster, &pairs) in config.cluster_pairs.iter().enumerate() {
                let centre = [cluster as f64 * config.cluster_spacing, 0.0];
                for rank in 0..pairs {
                    for _ in 0..2 {
                        let mut pos = [0.0; 2];
                        for (p, c) in pos.iter_mut().zip(centre) {
                            let mut v = spread.sample(&mut rng);
                            while v.abs() > half {
                                v = spread.sample(&mut rng);
                            }
                            *p = c + v;
                        }
                        nodes.push(Node { pos, cluster });
                    }
                    let n = nodes.len();
                    connections.push(Connection {
                        tx: n - 2,
                        rx: n - 1,
                        cluster,
                        rank,
                    });
                }
            }
        }
    }
    Topology::new(nodes, connections, config.range)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_square_all_interfere() {
        let t = generate_topology(&TopologyConfig::default(), 5).unwrap();
        assert_eq!(t.nodes.len(), 18);
        for i in 0..9 {
            assert_eq!(t.interferers(i).len(), 8);
        }
    }

    #[test]
    fn clusters_only_adjacent() {
        let t = generate_topology(&TopologyConfig::three_clusters(), 11).unwrap();
        for (i, a) in t.connections.iter().enumerate() {
            for &j in t.interferers(i) {
                let b = t.connections[j];
                assert!((a.cluster as i64 - b.cluster as i64).abs() <= 1);
            }
        }
    }

    #[test]
    fn reproducible() {
        let c = TopologyConfig::three_clusters();
        assert_eq!(generate_topology(&c, 3).unwrap(), generate_topology(&c, 3).unwrap());
        assert_ne!(generate_topology(&c, 3).unwrap(), generate_topology(&c, 4).unwrap());
    }
}
