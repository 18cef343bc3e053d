//! Synthetic stand-in for the SNAP ego-Facebook graph.
//!
//! Ten ego networks with the original ego degrees scaled to 4,029 members.
//! Each ego links to all of its members; members of one network are wired
//! as a ring lattice with edge probability decaying over ring distance;
//! neighbouring networks share 200 random member-to-member bridges. The
//! result has 4,039 nodes, about 87k edges, maximum degree 1,010 and mean
//! hop distance about 3.7, close to the original's 4,039 / 88,234 / 1,045 /
//! 3.69.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIZES: [usize; 10] = [1010, 765, 730, 529, 335, 217, 164, 154, 64, 61];
/// Ego network each network is bridged to.
const PARENT: [Option<usize>; 10] = [None, Some(0), Some(0), Some(0), Some(0), Some(0), Some(3), Some(1), Some(2), Some(6)];
const BRIDGES: usize = 200;
const WINDOW: f64 = 30.0;
const P0: f64 = 0.7;

pub fn edges(seed: u64) -> (usize, Vec<(u32, u32)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = SIZES.iter().sum::<usize>() + SIZES.len();
    let mut edges = Vec::new();
    let mut groups: Vec<Vec<u32>> = Vec::new();
    let mut next = 0u32;
    for &s in &SIZES {
        let ego = next;
        let members: Vec<u32> = (next + 1..=next + s as u32).collect();
        next += 1 + s as u32;
        edges.extend(members.iter().map(|&m| (ego, m)));
        for i in 0..s {
            for j in i + 1..s {
                let gap = (j - i).min(s - (j - i)) as f64;
                if rng.random::<f64>() < P0 * (-gap / WINDOW).exp() {
                    edges.push((members[i], members[j]));
                }
            }
        }
        groups.push(members);
    }
    for (g, parent) in PARENT.iter().enumerate() {
        if let Some(p) = *parent {
            for _ in 0..BRIDGES {
                let a = groups[g][rng.random_range(0..groups[g].len())];
                let b = groups[p][rng.random_range(0..groups[p].len())];
                edges.push((a, b));
            }
        }
    }
    (n, edges)
}

pub fn edge_list_text(seed: u64) -> String {
    let (_, edges) = edges(seed);
    let mut text = String::from("# synthetic ego-network graph\n");
    for (u, v) in edges {
        text.push_str(&format!("{u} {v}\n"));
    }
    text
}
