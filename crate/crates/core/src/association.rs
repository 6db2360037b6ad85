//! Dual-connectivity association: the twelve subcases, two independent
//! classifiers for a distance triple, and the closed-form case
//! probabilities.
//!
//! Every candidate cell is ranked twice. In the UL all users transmit with
//! the same power, so the ranking is by plain distance. In the DL the MCell
//! transmits `P_m / P_s` times more power than an SCell, which is equivalent
//! to shrinking its distance by `sqrt(eta) = (P_m / P_s)^(1 / alpha)`.
//! A subcase is the pair of (best, second-best) cells on each link.

use std::fmt;

use crate::error::{Error, Result};
use crate::params::{Scenario, ValidParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    MCell,
    SCell1,
    SCell2,
}

impl Cell {
    pub const ALL: [Cell; 3] = [Cell::MCell, Cell::SCell1, Cell::SCell2];

    /// Precedence on exact distance ties: a lower rank is treated as closer.
    fn rank(self) -> u8 {
        match self {
            Cell::MCell => 0,
            Cell::SCell1 => 1,
            Cell::SCell2 => 2,
        }
    }

    /// Swaps the two SCell labels.
    pub fn mirror(self) -> Cell {
        match self {
            Cell::MCell => Cell::MCell,
            Cell::SCell1 => Cell::SCell2,
            Cell::SCell2 => Cell::SCell1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Cell::MCell => "MCell",
            Cell::SCell1 => "SCell1",
            Cell::SCell2 => "SCell2",
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Distances from the tagged user to the MCell and to the two SCells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceTriple {
    pub x_m: f64,
    pub x_1: f64,
    pub x_2: f64,
}

impl DistanceTriple {
    pub fn new(x_m: f64, x_1: f64, x_2: f64) -> Result<Self> {
        for (what, value) in [("x_m", x_m), ("x_1", x_1), ("x_2", x_2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Domain { what, value });
            }
        }
        Ok(DistanceTriple { x_m, x_1, x_2 })
    }

    pub fn distance(&self, cell: Cell) -> f64 {
        match cell {
            Cell::MCell => self.x_m,
            Cell::SCell1 => self.x_1,
            Cell::SCell2 => self.x_2,
        }
    }

    /// Distance of a role after folding subcase n.2 onto n.1 by swapping the
    /// SCell labels: `SCell1` is then the nearer SCell, `SCell2` the farther.
    pub fn role_distance(&self, role: Cell) -> f64 {
        match role {
            Cell::MCell => self.x_m,
            Cell::SCell1 => self.x_1.min(self.x_2),
            Cell::SCell2 => self.x_1.max(self.x_2),
        }
    }
}

/// Serving cells of the first and second UL and DL connections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Roles {
    pub ul1: Cell,
    pub dl1: Cell,
    pub ul2: Cell,
    pub dl2: Cell,
}

const fn roles(ul1: Cell, dl1: Cell, ul2: Cell, dl2: Cell) -> Roles {
    Roles { ul1, dl1, ul2, dl2 }
}

use Cell::{MCell as M, SCell1 as S1, SCell2 as S2};

/// The association table, in order 1.1, 1.2, 2.1, ..., 6.2.
const TABLE: [Roles; 12] = [
    roles(M, M, S1, S1),
    roles(M, M, S2, S2),
    roles(S1, S1, M, M),
    roles(S2, S2, M, M),
    roles(S1, S1, S2, M),
    roles(S2, S2, S1, M),
    roles(S1, M, S2, S1),
    roles(S2, M, S1, S2),
    roles(S1, M, M, S1),
    roles(S2, M, M, S2),
    roles(S1, S1, S2, S2),
    roles(S2, S2, S1, S1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subcase {
    case: u8,
    sub: u8,
}

impl Subcase {
    pub fn new(case: u8, sub: u8) -> Result<Self> {
        if !(1..=6).contains(&case) {
            return Err(Error::UnknownCase(case));
        }
        if !(1..=2).contains(&sub) {
            return Err(Error::Domain { what: "subcase id", value: sub as f64 });
        }
        Ok(Subcase { case, sub })
    }

    pub fn from_index(index: usize) -> Subcase {
        assert!(index < 12, "subcase index {index} out of range");
        Subcase { case: (index / 2) as u8 + 1, sub: (index % 2) as u8 + 1 }
    }

    pub fn all() -> impl Iterator<Item = Subcase> {
        (0..12).map(Subcase::from_index)
    }

    pub fn case(self) -> u8 {
        self.case
    }

    pub fn sub(self) -> u8 {
        self.sub
    }

    /// Position in the table, `0..12`.
    pub fn index(self) -> usize {
        (self.case as usize - 1) * 2 + self.sub as usize - 1
    }

    pub fn roles(self) -> Roles {
        TABLE[self.index()]
    }

    /// The mirror-image subcase with the SCell labels swapped.
    pub fn mirrored(self) -> Subcase {
        Subcase { case: self.case, sub: 3 - self.sub }
    }

    /// True when either connection is served by different cells in UL and DL.
    pub fn is_decoupled(self) -> bool {
        let r = self.roles();
        r.ul1 != r.dl1 || r.ul2 != r.dl2
    }
}

impl fmt::Display for Subcase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.case, self.sub)
    }
}

/// `(distance, cell)` comparison with the fixed tie precedence.
fn precedes(a: (f64, Cell), b: (f64, Cell)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1.rank() < b.1.rank())
}

/// Association classifier for a fixed power imbalance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classifier {
    scale: f64,
}

struct Keys {
    ul: [f64; 3],
    dl: [f64; 3],
}

impl Keys {
    fn ul(&self, a: Cell, b: Cell) -> bool {
        precedes((self.ul[a as usize], a), (self.ul[b as usize], b))
    }

    fn dl(&self, a: Cell, b: Cell) -> bool {
        precedes((self.dl[a as usize], a), (self.dl[b as usize], b))
    }
}

impl Classifier {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta >= 1.0 && eta.is_finite()) {
            return Err(Error::EtaBelowOne(eta));
        }
        Ok(Classifier { scale: eta.sqrt() })
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        Classifier { scale: s.distance_scale() }
    }

    /// `sqrt(eta)`.
    pub fn distance_scale(&self) -> f64 {
        self.scale
    }

    fn keys(&self, t: &DistanceTriple) -> Keys {
        Keys { ul: [t.x_m, t.x_1, t.x_2], dl: [t.x_m / self.scale, t.x_1, t.x_2] }
    }

    /// Classifies by testing each row's restricting inequalities.
    ///
    /// Every row is evaluated; exactly one must hold.
    pub fn by_inequalities(&self, t: &DistanceTriple) -> Result<Subcase> {
        let k = self.keys(t);
        let rows = [
            // 1.x: x_m < x_i < x_j
            k.ul(M, S1) && k.ul(S1, S2),
            k.ul(M, S2) && k.ul(S2, S1),
            // 2.x: sqrt(eta) x_i < x_m < x_j
            k.dl(S1, M) && k.ul(M, S2),
            k.dl(S2, M) && k.ul(M, S1),
            // 3.x: x_i < x_m / sqrt(eta) < x_j < x_m
            k.dl(S1, M) && k.dl(M, S2) && k.ul(S2, M),
            k.dl(S2, M) && k.dl(M, S1) && k.ul(S1, M),
            // 4.x: x_i < x_j < x_m < sqrt(eta) x_i
            k.ul(S1, S2) && k.ul(S2, M) && k.dl(M, S1),
            k.ul(S2, S1) && k.ul(S1, M) && k.dl(M, S2),
            // 5.x: x_m < x_j, x_i < x_m < sqrt(eta) x_i
            k.ul(M, S2) && k.ul(S1, M) && k.dl(M, S1),
            k.ul(M, S1) && k.ul(S2, M) && k.dl(M, S2),
            // 6.x: x_i < x_j < x_m / sqrt(eta)
            k.dl(S1, S2) && k.dl(S2, M),
            k.dl(S2, S1) && k.dl(S1, M),
        ];
        let mut hits = rows.iter().enumerate().filter(|(_, &hit)| hit).map(|(i, _)| i);
        match (hits.next(), hits.next()) {
            (Some(i), None) => Ok(Subcase::from_index(i)),
            (None, _) => Err(Error::Unclassifiable(*t)),
            (Some(_), Some(_)) => Err(Error::AmbiguousClassification {
                triple: *t,
                matches: rows.iter().filter(|&&h| h).count(),
            }),
        }
    }

    /// Classifies by ranking the three cells by UL and by DL received power
    /// and looking the resulting (best, second-best) pairs up in the table.
    pub fn by_orderings(&self, t: &DistanceTriple) -> Result<Subcase> {
        let k = self.keys(t);
        let mut ul = Cell::ALL;
        let mut dl = Cell::ALL;
        ul.sort_by(|&a, &b| rank_order(k.ul(a, b)));
        dl.sort_by(|&a, &b| rank_order(k.dl(a, b)));

        if ul[0] == Cell::MCell && dl[0] != Cell::MCell {
            return Err(Error::ImpossibleAssociation(*t));
        }
        let observed = Roles { ul1: ul[0], dl1: dl[0], ul2: ul[1], dl2: dl[1] };
        TABLE
            .iter()
            .position(|r| *r == observed)
            .map(Subcase::from_index)
            .ok_or(Error::Unclassifiable(*t))
    }

    /// Two-cell (MCell plus nearest SCell) single-connectivity association.
    pub fn single_link(&self, x_m: f64, x_s: f64) -> SingleAssociation {
        let ul_macro = precedes((x_m, M), (x_s, S1));
        let dl_macro = precedes((x_m / self.scale, M), (x_s, S1));
        match (ul_macro, dl_macro) {
            (true, _) => SingleAssociation::Macro,
            (false, true) => SingleAssociation::Decoupled,
            (false, false) => SingleAssociation::Small,
        }
    }
}

fn rank_order(a_first: bool) -> std::cmp::Ordering {
    if a_first {
        std::cmp::Ordering::Less
    } else {
        std::cmp::Ordering::Greater
    }
}

pub fn classify_by_inequalities(t: &DistanceTriple, params: &ValidParams) -> Result<Subcase> {
    Classifier::from_scenario(&params.scenario()).by_inequalities(t)
}

pub fn classify_by_orderings(t: &DistanceTriple, params: &ValidParams) -> Result<Subcase> {
    Classifier::from_scenario(&params.scenario()).by_orderings(t)
}

/// Closed-form probability of a case under the independent-Rayleigh model.
///
/// Cases 3 and 4 are written in factored form; each carries a factor
/// `(eta - 1)` so it vanishes exactly at equal powers. Case 5 is the
/// probability of `{x_1 < x_m < sqrt(eta) x_1, x_m < x_2}` (and its mirror).
pub fn case_probability(case: u8, lambda_m: f64, lambda_s: f64, eta: f64) -> Result<f64> {
    if !(eta >= 1.0 && eta.is_finite()) {
        return Err(Error::EtaBelowOne(eta));
    }
    for (what, value) in [("lambda_m", lambda_m), ("lambda_s", lambda_s)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain { what, value });
        }
    }
    let (lm, ls, e) = (lambda_m, lambda_s, eta);
    let p = match case {
        1 => lm / (2.0 * ls + lm),
        2 => 2.0 * ls * lm / ((ls + lm) * (ls + e * ls + e * lm)),
        3 => {
            2.0 * lm * ls * ls * (e - 1.0) * (2.0 * e * lm + e * ls + 2.0 * ls)
                / ((lm + ls) * (e * lm + ls) * (e * lm + 2.0 * ls) * (e * lm + e * ls + ls))
        }
        4 => {
            2.0 * lm * ls * ls * (e - 1.0) * (e - 1.0)
                / ((lm + 2.0 * ls) * (e * lm + 2.0 * ls) * (e * lm + e * ls + ls))
        }
        5 => 2.0 * lm * ls * (e - 1.0) / ((lm + 2.0 * ls) * (ls + (lm + ls) * e)),
        6 => 2.0 * ls * ls / ((lm * e + ls) * (lm * e + 2.0 * ls)),
        other => return Err(Error::UnknownCase(other)),
    };
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseProbabilities {
    p: [f64; 6],
}

impl CaseProbabilities {
    pub fn get(&self, case: u8) -> f64 {
        self.p[case as usize - 1]
    }

    pub fn as_array(&self) -> [f64; 6] {
        self.p
    }

    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Decoupled association: cases 3, 4 and 5.
    pub fn dude(&self) -> f64 {
        self.p[2] + self.p[3] + self.p[4]
    }

    /// Classical MCell/SCell dual connectivity: cases 1 and 2.
    pub fn dual_conn(&self) -> f64 {
        self.p[0] + self.p[1]
    }

    /// Both links to the two SCells: case 6.
    pub fn scell(&self) -> f64 {
        self.p[5]
    }
}

pub fn all_case_probabilities(s: &Scenario) -> CaseProbabilities {
    let mut p = [0.0; 6];
    for (i, slot) in p.iter_mut().enumerate() {
        *slot = case_probability(i as u8 + 1, s.lambda_m, s.lambda_s, s.eta)
            .expect("scenario invariants guarantee a valid domain");
    }
    CaseProbabilities { p }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SingleAssociation {
    /// UL and DL both to the MCell.
    Macro,
    /// UL to the SCell, DL to the MCell.
    Decoupled,
    /// UL and DL both to the SCell.
    Small,
}

/// Single-connectivity association probabilities with one MCell and the
/// nearest SCell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleConnProbabilities {
    pub macro_coupled: f64,
    pub decoupled: f64,
    pub small_coupled: f64,
}

pub fn single_connectivity_probabilities(lambda_m: f64, lambda_s: f64, eta: f64) -> Result<SingleConnProbabilities> {
    if !(eta >= 1.0 && eta.is_finite()) {
        return Err(Error::EtaBelowOne(eta));
    }
    let (lm, ls) = (lambda_m, lambda_s);
    Ok(SingleConnProbabilities {
        macro_coupled: lm / (lm + ls),
        // Pr(x_s < x_m < sqrt(eta) x_s)
        decoupled: lm * ls * (eta - 1.0) / ((lm + ls) * (lm * eta + ls)),
        small_coupled: ls / (lm * eta + ls),
    })
}
