//! Exact charge accounting in half-weight units.
//!
//! Every vertex starts with a charge equal to its weight, stored as
//! `2 * w(v)` half-units located at the vertex itself. Charge moves in
//! parcels that remember their source vertex, between vertices and a
//! per-source free pool. Whole, half, `1.5 w` and `2.5 w` amounts are all
//! integers in these units.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::error::{SolveError, Violation};
use crate::graph::{Vertex, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Holder {
    Vertex(Vertex),
    Free,
}

impl fmt::Display for Holder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Holder::Vertex(v) => write!(f, "{v}"),
            Holder::Free => f.write_str("free"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fraction {
    Half,
    Whole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub source: Vertex,
    pub amount: u64,
    pub from: Holder,
    pub to: Holder,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("holder {holder} has {available} half-units of vertex {owner}'s charge, {needed} needed")]
pub struct InsufficientCharge {
    pub owner: Vertex,
    pub holder: Holder,
    pub needed: u64,
    pub available: u64,
}

impl From<InsufficientCharge> for Violation {
    fn from(e: InsufficientCharge) -> Self {
        Violation::new("charge", e.to_string())
    }
}

impl From<InsufficientCharge> for SolveError {
    fn from(e: InsufficientCharge) -> Self {
        SolveError::InvariantViolation(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChargeLedger {
    initial: Vec<u64>,
    /// Per source: where its charge currently sits. Entries are positive.
    parcels: Vec<Vec<(Holder, u64)>>,
    held: Vec<u64>,
}

impl ChargeLedger {
    pub fn new(weights: &[Weight]) -> Self {
        let initial: Vec<u64> = weights.iter().map(|&w| 2 * w).collect();
        let parcels = initial
            .iter()
            .enumerate()
            .map(|(v, &c)| if c > 0 { vec![(Holder::Vertex(v), c)] } else { Vec::new() })
            .collect();
        ChargeLedger { held: initial.clone(), initial, parcels }
    }

    /// Initial charge of `source`, in half-units.
    pub fn charge_of(&self, source: Vertex) -> u64 {
        self.initial[source]
    }

    pub fn fraction_of(&self, source: Vertex, fraction: Fraction) -> u64 {
        match fraction {
            Fraction::Whole => self.initial[source],
            Fraction::Half => self.initial[source] / 2,
        }
    }

    /// Half-units of `source`'s charge located at `holder`.
    pub fn amount(&self, source: Vertex, holder: Holder) -> u64 {
        self.parcels[source].iter().find(|(h, _)| *h == holder).map_or(0, |&(_, a)| a)
    }

    /// Total half-units located at vertex `v`, from every source.
    pub fn held(&self, v: Vertex) -> u64 {
        self.held[v]
    }

    /// Released or never-transferred charge of `source`, in the free pool.
    pub fn free(&self, source: Vertex) -> u64 {
        self.amount(source, Holder::Free)
    }

    pub fn total(&self) -> u64 {
        self.parcels.iter().flatten().map(|&(_, a)| a).sum()
    }

    pub fn move_amount(
        &mut self,
        source: Vertex,
        amount: u64,
        from: Holder,
        to: Holder,
    ) -> Result<Move, InsufficientCharge> {
        let available = self.amount(source, from);
        if available < amount {
            return Err(InsufficientCharge { owner: source, holder: from, needed: amount, available });
        }
        let mv = Move { source, amount, from, to };
        if amount == 0 || from == to {
            return Ok(mv);
        }
        let list = &mut self.parcels[source];
        let idx = list.iter().position(|(h, _)| *h == from).expect("available > 0");
        list[idx].1 -= amount;
        if list[idx].1 == 0 {
            list.swap_remove(idx);
        }
        match list.iter_mut().find(|(h, _)| *h == to) {
            Some(entry) => entry.1 += amount,
            None => list.push((to, amount)),
        }
        if let Holder::Vertex(v) = from {
            self.held[v] -= amount;
        }
        if let Holder::Vertex(v) = to {
            self.held[v] += amount;
        }
        Ok(mv)
    }

    pub fn transfer(
        &mut self,
        source: Vertex,
        fraction: Fraction,
        from: Holder,
        to: Holder,
    ) -> Result<Move, InsufficientCharge> {
        let amount = self.fraction_of(source, fraction);
        self.move_amount(source, amount, from, to)
    }

    pub fn release(&mut self, source: Vertex, fraction: Fraction, from: Holder) -> Result<Move, InsufficientCharge> {
        self.transfer(source, fraction, from, Holder::Free)
    }

    /// Moves everything `source` has at `from` to `to`.
    pub fn move_all(&mut self, source: Vertex, from: Holder, to: Holder) -> Move {
        let amount = self.amount(source, from);
        self.move_amount(source, amount, from, to).expect("moving what is there")
    }

    /// Hands the parcels `(source, amount)` held by `from` to two targets:
    /// `first` is filled up to `need_first` half-units, splitting at most one
    /// parcel, and everything else goes to `second`. Fails unless the parcels
    /// cover `need_first + need_second`.
    pub fn split_transfer_to_two(
        &mut self,
        from: Vertex,
        parcels: &[(Vertex, u64)],
        (first, need_first): (Vertex, u64),
        (second, need_second): (Vertex, u64),
    ) -> Result<Vec<Move>, InsufficientCharge> {
        let holder = Holder::Vertex(from);
        for &(source, amount) in parcels {
            let available = self.amount(source, holder);
            if available < amount {
                return Err(InsufficientCharge { owner: source, holder, needed: amount, available });
            }
        }
        let total: u64 = parcels.iter().map(|&(_, a)| a).sum();
        if total < need_first + need_second {
            let source = parcels.first().map_or(from, |&(s, _)| s);
            return Err(InsufficientCharge {
                owner: source,
                holder,
                needed: need_first + need_second,
                available: total,
            });
        }
        let mut moves = Vec::new();
        let mut owed = need_first;
        for &(source, amount) in parcels {
            let to_first = amount.min(owed);
            owed -= to_first;
            if to_first > 0 {
                moves.push(self.move_amount(source, to_first, holder, Holder::Vertex(first))?);
            }
            if amount > to_first {
                moves.push(self.move_amount(source, amount - to_first, holder, Holder::Vertex(second))?);
            }
        }
        Ok(moves)
    }

    /// Every source's parcels sum to its initial charge.
    pub fn check_conservation(&self) -> Result<(), Violation> {
        for (source, list) in self.parcels.iter().enumerate() {
            let sum: u64 = list.iter().map(|&(_, a)| a).sum();
            if sum != self.initial[source] {
                return Err(Violation::new(
                    "conservation",
                    format!("vertex {source} has {sum} half-units in parcels, started with {}", self.initial[source]),
                ));
            }
        }
        Ok(())
    }

    /// One line `source amount location` per parcel, sorted.
    pub fn dump(&self) -> String {
        let mut rows: Vec<(Vertex, Holder, u64)> =
            self.parcels.iter().enumerate().flat_map(|(s, list)| list.iter().map(move |&(h, a)| (s, h, a))).collect();
        rows.sort();
        let mut out = String::new();
        for (s, h, a) in rows {
            writeln!(out, "{s} {a} {h}").unwrap();
        }
        out
    }
}
