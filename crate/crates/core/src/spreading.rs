//! Walsh-Hadamard codes and multi-user DCSK symbol composition.

use crate::error::{Error, Result};

/// Sylvester-ordered Walsh matrix with entries +1 / -1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalshMatrix {
    order: usize,
    rows: Vec<Vec<i8>>,
}

impl WalshMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Row `k`, 1-based as in `w_1 .. w_N`.
    pub fn row(&self, k: usize) -> &[i8] {
        &self.rows[k - 1]
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }

    /// Number of users the code set accommodates (two rows each).
    pub fn users(&self) -> usize {
        self.order / 2
    }

    pub fn assignment(&self, user: usize) -> Result<UserCodeAssignment> {
        UserCodeAssignment::new(user, self.users())
    }
}

/// Rows held by one user: `2u - 1` signals bit 1, `2u` signals bit 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UserCodeAssignment {
    pub user: usize,
    pub bit_one_row: usize,
    pub bit_zero_row: usize,
}

impl UserCodeAssignment {
    pub fn new(user: usize, users: usize) -> Result<Self> {
        if user == 0 || user > users {
            return Err(Error::InvalidUser { user, users });
        }
        Ok(Self { user, bit_one_row: 2 * user - 1, bit_zero_row: 2 * user })
    }

    pub fn row_for(&self, bit: bool) -> usize {
        if bit {
            self.bit_one_row
        } else {
            self.bit_zero_row
        }
    }
}

pub fn walsh(order: usize) -> Result<WalshMatrix> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::InvalidOrder(order));
    }
    let mut rows = vec![vec![1i8]];
    while rows.len() < order {
        let n = rows.len();
        let mut next = Vec::with_capacity(2 * n);
        for r in &rows {
            next.push(r.iter().chain(r.iter()).copied().collect());
        }
        for r in &rows {
            next.push(r.iter().copied().chain(r.iter().map(|v| -v)).collect());
        }
        rows = next;
    }
    Ok(WalshMatrix { order, rows })
}

/// Segment length `f = 2beta / 2U`, or a configuration error if it does not divide.
pub fn segment_length(two_beta: usize, order: usize) -> Result<usize> {
    if order == 0 || two_beta == 0 || !two_beta.is_multiple_of(order) {
        return Err(Error::Config(format!("spreading factor {two_beta} is not a multiple of Walsh order {order}")));
    }
    Ok(two_beta / order)
}

/// One symbol of user `user`: `2U` copies of `segment`, copy `i` scaled by `w_{2u-bit, i+1}`.
pub fn compose_user_signal(
    user: usize,
    bit: bool,
    segment: &[f64],
    walsh: &WalshMatrix,
    two_beta: usize,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; two_beta];
    add_user_signal(&mut out, user, bit, segment, walsh, 1.0)?;
    Ok(out)
}

/// Adds `gain` times the composed symbol into `out` (length `2beta`).
pub fn add_user_signal(
    out: &mut [f64],
    user: usize,
    bit: bool,
    segment: &[f64],
    walsh: &WalshMatrix,
    gain: f64,
) -> Result<()> {
    let f = segment.len();
    if f * walsh.order() != out.len() {
        return Err(Error::Config(format!(
            "segment length {f} x Walsh order {} != spreading factor {}",
            walsh.order(),
            out.len()
        )));
    }
    let row = walsh.row(walsh.assignment(user)?.row_for(bit));
    for (chunk, &w) in out.chunks_exact_mut(f).zip(row) {
        let g = gain * f64::from(w);
        for (o, c) in chunk.iter_mut().zip(segment) {
            *o += g * c;
        }
    }
    Ok(())
}
