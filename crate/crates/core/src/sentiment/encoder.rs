use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// T x d token representations, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl TokenMatrix {
    pub fn new(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || dim == 0 {
            return Err(Error::argument(format!("token matrix must be non-empty, got {rows}x{dim}")));
        }
        if data.len() != rows * dim {
            return Err(Error::argument(format!(
                "token matrix {rows}x{dim} needs {} values, got {}",
                rows * dim,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::argument("token matrix contains non-finite values"));
        }
        Ok(Self { rows, dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::argument("ragged token rows"));
        }
        Self::new(rows.len(), dim, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Anything that turns text into per-token vectors of a fixed width.
pub trait TokenEncoder {
    fn dim(&self) -> usize;
    fn encode(&self, text: &str) -> Result<TokenMatrix>;
}

/// 64-bit FNV-1a over the UTF-8 bytes.
pub fn fnv1a64(s: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    s.bytes().fold(OFFSET, |h, b| (h ^ b as u64).wrapping_mul(PRIME))
}

/// Lower-cased alphanumeric runs; every other non-space character is a
/// token on its own.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            word.extend(c.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            tokens.push(c.to_string());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

/// Trainable embedding table addressed by `fnv1a64(token) % table_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct HashedEncoder {
    dim: usize,
    table_size: usize,
    pub(crate) table: Vec<f64>,
}

impl HashedEncoder {
    pub const DEFAULT_DIM: usize = 64;
    pub const DEFAULT_TABLE_SIZE: usize = 1 << 16;

    /// Table initialised uniformly in `[-scale, scale)`.
    pub fn random(dim: usize, table_size: usize, scale: f64, rng: &mut SplitMix64) -> Result<Self> {
        let table = (0..dim * table_size).map(|_| rng.uniform(-scale, scale)).collect();
        Self::from_table(dim, table_size, table)
    }

    pub fn from_table(dim: usize, table_size: usize, table: Vec<f64>) -> Result<Self> {
        if dim == 0 || table_size == 0 {
            return Err(Error::argument("encoder dimension and table size must be positive"));
        }
        if table.len() != dim * table_size {
            return Err(Error::argument("embedding table has the wrong size"));
        }
        Ok(Self { dim, table_size, table })
    }

    pub fn table_size(&self) -> usize {
        self.table_size
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn row(&self, id: usize) -> &[f64] {
        &self.table[id * self.dim..(id + 1) * self.dim]
    }

    pub fn token_id(&self, token: &str) -> usize {
        (fnv1a64(token) % self.table_size as u64) as usize
    }

    pub fn token_ids(&self, text: &str) -> Result<Vec<usize>> {
        let ids: Vec<usize> = tokenize(text).iter().map(|t| self.token_id(t)).collect();
        if ids.is_empty() {
            return Err(Error::EmptyInput(format!("no tokens in {text:?}")));
        }
        Ok(ids)
    }

    pub fn encode_ids(&self, ids: &[usize]) -> Result<TokenMatrix> {
        let data = ids.iter().flat_map(|&id| self.row(id).iter().copied()).collect();
        TokenMatrix::new(ids.len(), self.dim, data)
    }
}

impl TokenEncoder for HashedEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, text: &str) -> Result<TokenMatrix> {
        self.encode_ids(&self.token_ids(text)?)
    }
}
