//! Partitions of {1..m}: enumeration, crossing (inversion) counts and the
//! partition weights beta_q and t(sigma, q_1..q_m) used by the central
//! limit sums.

use thiserror::Error;

/// Enumeration caps keep every exhaustive sum at desk scale.
pub const MAX_PAIR_POINTS: usize = 16;
pub const MAX_SET_POINTS: usize = 10;
pub const MAX_MIXED_BLOCKS: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("pair partitions need an even point count, got {0}")]
    OddPoints(usize),
    #[error("point count {got} exceeds cap {cap}")]
    TooManyPoints { got: usize, cap: usize },
    #[error("invalid block structure: {0}")]
    Malformed(String),
}

/// Perfect pairing of {1..m}. Blocks are stored (small, large) and sorted
/// lexicographically, so equal partitions compare equal and can key maps.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairPartition {
    m: usize,
    blocks: Vec<(usize, usize)>,
}

impl PairPartition {
    pub fn new(m: usize, mut blocks: Vec<(usize, usize)>) -> Result<Self, PartitionError> {
        if m % 2 != 0 {
            return Err(PartitionError::OddPoints(m));
        }
        if blocks.len() != m / 2 {
            return Err(PartitionError::Malformed(format!(
                "expected {} blocks, got {}",
                m / 2,
                blocks.len()
            )));
        }
        for b in blocks.iter_mut() {
            if b.0 > b.1 {
                *b = (b.1, b.0);
            }
        }
        blocks.sort();
        let mut seen = vec![false; m + 1];
        for &(a, b) in &blocks {
            if a == 0 || b > m || a == b {
                return Err(PartitionError::Malformed(format!("bad block ({a},{b})")));
            }
            for x in [a, b] {
                if seen[x] {
                    return Err(PartitionError::Malformed(format!("point {x} repeated")));
                }
                seen[x] = true;
            }
        }
        Ok(PairPartition { m, blocks })
    }

    pub fn points(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    /// Index (into the lexicographic block list) of the block containing `point`.
    pub fn block_of(&self, point: usize) -> usize {
        self.blocks
            .iter()
            .position(|&(a, b)| a == point || b == point)
            .expect("point outside partition")
    }
}

/// Set partition of {1..m}, blocks canonically ordered by least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    m: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn points(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, point: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(&point))
            .expect("point outside partition")
    }

    /// True when every block has even cardinality; only those patterns
    /// survive the singleton condition of the sign models.
    pub fn all_blocks_even(&self) -> bool {
        self.blocks.iter().all(|b| b.len() % 2 == 0)
    }
}

/// Crossing pairs (i, j): the middle points of each pair of interleaved
/// blocks, i.e. r < i < j < l with {i,l} and {r,j} in distinct blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InversionSet {
    pairs: Vec<(usize, usize)>,
}

impl InversionSet {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn count(&self) -> usize {
        self.pairs.len()
    }
}

/// All (m-1)!! pairings of {1..m} in canonical order.
pub fn enumerate_pair_partitions(m: usize) -> Result<Vec<PairPartition>, PartitionError> {
    if m % 2 != 0 {
        return Err(PartitionError::OddPoints(m));
    }
    if m > MAX_PAIR_POINTS {
        return Err(PartitionError::TooManyPoints {
            got: m,
            cap: MAX_PAIR_POINTS,
        });
    }
    let mut out = Vec::new();
    let mut free: Vec<usize> = (1..=m).collect();
    let mut blocks = Vec::with_capacity(m / 2);
    pair_rec(&mut free, &mut blocks, &mut out, m);
    Ok(out)
}

fn pair_rec(
    free: &mut Vec<usize>,
    blocks: &mut Vec<(usize, usize)>,
    out: &mut Vec<PairPartition>,
    m: usize,
) {
    if free.is_empty() {
        out.push(PairPartition {
            m,
            blocks: blocks.clone(),
        });
        return;
    }
    let a = free[0];
    for idx in 1..free.len() {
        let b = free[idx];
        let mut rest: Vec<usize> = free.iter().copied().filter(|&x| x != a && x != b).collect();
        blocks.push((a, b));
        pair_rec(&mut rest, blocks, out, m);
        blocks.pop();
    }
}

/// All Bell(m) set partitions of {1..m}, canonical order, via restricted
/// growth strings.
pub fn enumerate_partitions(m: usize) -> Result<Vec<Partition>, PartitionError> {
    if m > MAX_SET_POINTS {
        return Err(PartitionError::TooManyPoints {
            got: m,
            cap: MAX_SET_POINTS,
        });
    }
    if m == 0 {
        return Ok(vec![Partition {
            m: 0,
            blocks: vec![],
        }]);
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; m];
    rgs_rec(&mut rgs, 1, 0, m, &mut out);
    Ok(out)
}

fn rgs_rec(rgs: &mut Vec<usize>, pos: usize, max_used: usize, m: usize, out: &mut Vec<Partition>) {
    if pos == m {
        let nblocks = max_used + 1;
        let mut blocks = vec![Vec::new(); nblocks];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i + 1);
        }
        out.push(Partition { m, blocks });
        return;
    }
    for b in 0..=max_used + 1 {
        rgs[pos] = b;
        rgs_rec(rgs, pos + 1, max_used.max(b), m, out);
    }
    rgs[pos] = 0;
}

/// Crossing set of a pair partition: two blocks (a,b), (c,d) with a<b, c<d
/// cross iff a<c<b<d or c<a<d<b; the recorded pair is the two middle points.
pub fn inversions(sigma: &PairPartition) -> InversionSet {
    let mut pairs = Vec::new();
    let bl = sigma.blocks();
    for s in 0..bl.len() {
        for t in s + 1..bl.len() {
            let (a, b) = bl[s];
            let (c, d) = bl[t];
            if a < c && c < b && b < d {
                pairs.push((c, b));
            } else if c < a && a < d && d < b {
                pairs.push((a, d));
            }
        }
    }
    pairs.sort();
    InversionSet { pairs }
}

/// q^{|I(sigma)|} with the convention 0^0 = 1.
pub fn beta_q(sigma: &PairPartition, q: f64) -> f64 {
    let count = inversions(sigma).count();
    if count == 0 {
        1.0
    } else {
        q.powi(count as i32)
    }
}

/// Mixed-color partition weight: the average over all orderings gamma of
/// the blocks (lexicographic base order) of the product over inversions
/// (i, j) of the color of whichever crossing point's block gamma ranks
/// later. Returns None when the colors are not constant on blocks (the
/// "sigma not below rho" case; callers treat the contribution as zero).
pub fn t_mixed(sigma: &PairPartition, colors: &[f64]) -> Result<Option<f64>, PartitionError> {
    let m = sigma.points();
    if colors.len() != m {
        return Err(PartitionError::Malformed(format!(
            "expected {} colors, got {}",
            m,
            colors.len()
        )));
    }
    let r = m / 2;
    if r > MAX_MIXED_BLOCKS {
        return Err(PartitionError::TooManyPoints {
            got: r,
            cap: MAX_MIXED_BLOCKS,
        });
    }
    for &(a, b) in sigma.blocks() {
        if colors[a - 1] != colors[b - 1] {
            return Ok(None);
        }
    }
    let inv = inversions(sigma);
    if inv.count() == 0 {
        return Ok(Some(1.0));
    }
    // For each inversion (i, j), cache the block indices of i and j.
    let pairs: Vec<(usize, usize, f64, f64)> = inv
        .pairs()
        .iter()
        .map(|&(i, j)| {
            (
                sigma.block_of(i),
                sigma.block_of(j),
                colors[i - 1],
                colors[j - 1],
            )
        })
        .collect();

    let mut total = 0.0;
    let mut count = 0usize;
    let mut ranks: Vec<usize> = (0..r).collect();
    permute(&mut ranks, 0, &mut |gamma| {
        let mut prod = 1.0;
        for &(bi, bj, qi, qj) in &pairs {
            // gamma[b] is the rank of block b; the later-ranked block's color wins.
            prod *= if gamma[bi] < gamma[bj] { qj } else { qi };
        }
        total += prod;
        count += 1;
    });
    Ok(Some(total / count as f64))
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

pub fn double_factorial(m: usize) -> u64 {
    let mut acc = 1u64;
    let mut k = m as i64;
    while k > 1 {
        acc *= k as u64;
        k -= 2;
    }
    acc
}
