//! Two-dimensional block-parity error correction and privacy amplification
//! with exact leakage accounting.
//!
//! Each pass folds both keys into `r x c` blocks under a shared random
//! permutation. Alice discloses every row and column parity; Bob flips the
//! bit at the unique (failing row, failing column) intersection when exactly
//! one of each fails in a block. Anything more ambiguous waits for the next
//! pass, which re-permutes the whole key. Passes repeat until two
//! consecutive passes are parity-clean (or the pass budget runs out); every
//! disclosed parity bit is counted in the leakage ledger.
//!
//! Privacy amplification comes in the two flavors the toolkit models: the
//! rudimentary row/column drop applied per block, and subset parities, where
//! output bit `i` is the parity of a pseudorandom key subset selected by a
//! public seed (Toeplitz membership: bit `j` belongs to subset `i` iff
//! `T[i+j]`, with `T` a seeded random bit vector).

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::messages::BlockParities;
use crate::protocol::{KeyBuffer, Stage};
use crate::Result;

/// A key fragment folded into an `rows x cols` matrix. Cells beyond the key
/// length are zero padding, flagged so they never reach the output key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityBlock {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
    padding: Vec<bool>,
}

impl ParityBlock {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bit(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn is_padding(&self, row: usize, col: usize) -> bool {
        self.padding[row * self.cols + col]
    }
}

/// Fold a bit string into `rows x cols` blocks in the given order, zero-
/// padding the tail of the last block.
pub fn fold_into_blocks(bits: &[bool], rows: usize, cols: usize) -> Result<Vec<ParityBlock>> {
    if rows < 2 || cols < 2 {
        return Err(Error::parameter("block_dimensions", format!("need r,c >= 2, got {rows}x{cols}")));
    }
    let block_size = rows * cols;
    let n_blocks = bits.len().div_ceil(block_size).max(1);
    let mut blocks = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let mut block_bits = vec![false; block_size];
        let mut padding = vec![true; block_size];
        for cell in 0..block_size {
            let idx = b * block_size + cell;
            if idx < bits.len() {
                block_bits[cell] = bits[idx];
                padding[cell] = false;
            }
        }
        blocks.push(ParityBlock { rows, cols, bits: block_bits, padding });
    }
    Ok(blocks)
}

/// Parities disclosed during one pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassRecord {
    pub pass: u32,
    pub blocks: Vec<BlockParities>,
}

/// Outcome of an error-correction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconciliationReport {
    /// Bob's key after correction, advanced to the reconciled stage with
    /// the parity leakage added to its ledger. The caller mirrors the same
    /// leak onto Alice's buffer.
    pub corrected_bob_key: KeyBuffer,
    /// Exact number of parity values sent over the public channel.
    pub parity_bits_disclosed: u64,
    /// Zero when the run ended with two clean passes; otherwise a rough
    /// fraction of bits still unexplained by parity.
    pub residual_error_estimate: f64,
    pub passes: u32,
    /// Whether two consecutive clean passes were reached in budget.
    pub converged: bool,
    /// Everything Alice disclosed, pass by pass, for the transcript.
    pub pass_records: Vec<PassRecord>,
}

fn parities_for(bits: &[bool], perm: &[usize], rows: usize, cols: usize, block: usize) -> (Vec<bool>, Vec<bool>) {
    let block_size = rows * cols;
    let at = |r: usize, c: usize| -> bool {
        let cell = block * block_size + r * cols + c;
        perm.get(cell).map_or(false, |&idx| bits[idx])
    };
    let row_parities = (0..rows)
        .map(|r| (0..cols).fold(false, |acc, c| acc ^ at(r, c)))
        .collect();
    let col_parities = (0..cols)
        .map(|c| (0..rows).fold(false, |acc, r| acc ^ at(r, c)))
        .collect();
    (row_parities, col_parities)
}

/// Run the two-dimensional block-parity procedure, correcting Bob's key
/// toward Alice's. Keys must be sifted-stage and aligned; `rows`/`cols`
/// must be at least 2. A report that did not converge signals residual
/// errors; the caller decides whether to abort the session.
pub fn block_parity_reconcile<R: Rng>(
    alice_key: &KeyBuffer,
    bob_key: &KeyBuffer,
    rows: usize,
    cols: usize,
    max_passes: u32,
    rng: &mut R,
) -> Result<ReconciliationReport> {
    if alice_key.len() != bob_key.len() {
        return Err(Error::LengthMismatch {
            context: "reconcile keys",
            left: alice_key.len(),
            right: bob_key.len(),
        });
    }
    if rows < 2 || cols < 2 {
        return Err(Error::parameter("block_dimensions", format!("need r,c >= 2, got {rows}x{cols}")));
    }
    if alice_key.is_empty() {
        return Err(Error::Protocol("cannot reconcile empty keys".into()));
    }

    let n = alice_key.len();
    let block_size = rows * cols;
    let n_blocks = n.div_ceil(block_size);
    let alice_bits = alice_key.bits().to_vec();
    let mut bob_bits = bob_key.bits().to_vec();

    let mut disclosed = 0u64;
    let mut passes = 0u32;
    let mut clean_streak = 0u32;
    let mut pass_records = Vec::new();
    let mut last_failing = (0usize, 0usize);

    while passes < max_passes && clean_streak < 2 {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);

        let mut blocks_disclosed = Vec::with_capacity(n_blocks);
        let mut pass_clean = true;
        let mut failing_rows_total = 0usize;
        let mut failing_cols_total = 0usize;

        for block in 0..n_blocks {
            let (alice_rows, alice_cols) = parities_for(&alice_bits, &perm, rows, cols, block);
            let (bob_rows, bob_cols) = parities_for(&bob_bits, &perm, rows, cols, block);
            disclosed += (rows + cols) as u64;
            blocks_disclosed.push(BlockParities {
                block_id: block as u32,
                row_parities: alice_rows.clone(),
                col_parities: alice_cols.clone(),
            });

            let bad_rows: Vec<usize> =
                (0..rows).filter(|&r| alice_rows[r] != bob_rows[r]).collect();
            let bad_cols: Vec<usize> =
                (0..cols).filter(|&c| alice_cols[c] != bob_cols[c]).collect();
            if bad_rows.is_empty() && bad_cols.is_empty() {
                continue;
            }
            pass_clean = false;
            failing_rows_total += bad_rows.len();
            failing_cols_total += bad_cols.len();

            if bad_rows.len() == 1 && bad_cols.len() == 1 {
                let cell = block * block_size + bad_rows[0] * cols + bad_cols[0];
                if let Some(&idx) = perm.get(cell) {
                    bob_bits[idx] = !bob_bits[idx];
                }
                // An intersection landing on padding means the failure
                // pattern was not a single error; the next pass re-permutes.
            }
        }

        pass_records.push(PassRecord { pass: passes, blocks: blocks_disclosed });
        passes += 1;
        if pass_clean {
            clean_streak += 1;
        } else {
            clean_streak = 0;
        }
        last_failing = (failing_rows_total, failing_cols_total);
    }

    let converged = clean_streak >= 2;
    let residual_error_estimate = if converged {
        0.0
    } else {
        last_failing.0.max(last_failing.1) as f64 / n as f64
    };

    let mut corrected = bob_key.clone();
    corrected.replace_bits(bob_bits)?;
    corrected.advance_to(Stage::Reconciled)?;
    corrected.note_leak(disclosed);

    Ok(ReconciliationReport {
        corrected_bob_key: corrected,
        parity_bits_disclosed: disclosed,
        residual_error_estimate,
        passes,
        converged,
        pass_records,
    })
}

/// Drop one uniformly chosen row and one column from a reconciled block;
/// both parties apply the same indices (the choice is public, the dropped
/// bits are not). Returns the surviving non-padding bits in row-major order.
pub fn privacy_amplify_drop<R: Rng>(block: &ParityBlock, rng: &mut R) -> Result<Vec<bool>> {
    if block.rows < 2 || block.cols < 2 {
        return Err(Error::parameter(
            "block_dimensions",
            format!("need r,c >= 2 to drop, got {}x{}", block.rows, block.cols),
        ));
    }
    let drop_row = rng.gen_range(0..block.rows);
    let drop_col = rng.gen_range(0..block.cols);
    let mut out = Vec::with_capacity((block.rows - 1) * (block.cols - 1));
    for r in 0..block.rows {
        if r == drop_row {
            continue;
        }
        for c in 0..block.cols {
            if c == drop_col || block.is_padding(r, c) {
                continue;
            }
            out.push(block.bit(r, c));
        }
    }
    Ok(out)
}

/// Subset-parity extraction against an arbitrary membership predicate.
/// `membership(i, j)` decides whether input bit `j` feeds output bit `i`.
/// This is the family hook behind [`privacy_amplify_subsets`]; it is also
/// how degenerate families (e.g. singleton subsets) are expressed.
pub fn extract_with_membership(
    key: &[bool],
    target_length: usize,
    membership: impl Fn(usize, usize) -> bool,
) -> Result<Vec<bool>> {
    if target_length >= key.len() {
        return Err(Error::parameter(
            "target_length",
            format!("must be < key length {}, got {target_length}", key.len()),
        ));
    }
    let out = (0..target_length)
        .map(|i| (0..key.len()).filter(|&j| membership(i, j)).fold(false, |acc, j| acc ^ key[j]))
        .collect();
    Ok(out)
}

/// Compress a reconciled key to `target_length` bits of subset parities.
///
/// Membership is Toeplitz: a seeded bit vector `T` of length
/// `n + m - 1` makes bit `j` a member of subset `i` iff `T[i + j]`, so each
/// subset contains every input bit with probability one half. Deterministic
/// given `(key, target_length, seed)`; both parties compute identical
/// output from the public seed.
pub fn privacy_amplify_subsets(key: &[bool], target_length: usize, seed: u64) -> Result<Vec<bool>> {
    if target_length >= key.len() {
        return Err(Error::parameter(
            "target_length",
            format!("must be < key length {}, got {target_length}", key.len()),
        ));
    }
    let n = key.len();
    let t_bits = n + target_length - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_words: Vec<u64> = (0..t_bits.div_ceil(64) + 1).map(|_| rng.gen()).collect();

    // Pack the key for word-at-a-time parity accumulation.
    let n_words = n.div_ceil(64);
    let mut key_words = vec![0u64; n_words];
    for (j, &b) in key.iter().enumerate() {
        if b {
            key_words[j / 64] |= 1 << (j % 64);
        }
    }
    // Mask off bits beyond the key length in the last word.
    let tail_mask = if n % 64 == 0 { u64::MAX } else { (1u64 << (n % 64)) - 1 };

    let mut out = Vec::with_capacity(target_length);
    for i in 0..target_length {
        let mut acc = 0u64;
        for w in 0..n_words {
            let bit_offset = i + w * 64;
            let q = bit_offset / 64;
            let r = bit_offset % 64;
            let window = if r == 0 {
                t_words[q]
            } else {
                (t_words[q] >> r) | (t_words[q + 1] << (64 - r))
            };
            let mut masked = window & key_words[w];
            if w == n_words - 1 {
                masked &= tail_mask;
            }
            acc ^= masked;
        }
        out.push(acc.count_ones() % 2 == 1);
    }
    Ok(out)
}

/// Final key length after subtracting public leakage, the bound on Eve's
/// knowledge and the security margin: `max(0, n - leaked - eve - s)`.
pub fn compute_final_length(
    n_reconciled: u64,
    leaked_bits: u64,
    eve_bound_bits: u64,
    security_parameter: u64,
) -> u64 {
    n_reconciled
        .saturating_sub(leaked_bits)
        .saturating_sub(eve_bound_bits)
        .saturating_sub(security_parameter)
}

/// Conservative bound on how many sifted bits Eve may know: the expected
/// number of multi-photon detected ticks (beamsplitting exposure) plus the
/// full-intercept equivalent of the observed error rate (a fraction
/// `qber / 0.25` of the key attacked, each attacked bit known with
/// probability 3/4).
pub fn eve_knowledge_bound(sifted_len: u64, qber: f64, multi_photon_fraction: f64) -> u64 {
    let beamsplit = (sifted_len as f64 * multi_photon_fraction).ceil();
    let intercept = (qber / 0.25 * sifted_len as f64 * 0.75).ceil();
    (beamsplit + intercept) as u64
}
