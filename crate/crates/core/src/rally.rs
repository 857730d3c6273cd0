//! Rally domain types and the imputation primitives.
//!
//! Strokes are indexed from 1, so stroke 1 is always the serve. Coordinates
//! live in the opponent-half frame: `x` spans the court width in
//! `[-0.5, 0.5]`, `y` runs from the net (`0`) to the baseline (`1`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Longest rally accepted anywhere in the toolkit.
pub const MAX_RALLY_LEN: usize = 35;

/// The ten shot categories, with stable codes 0..=9 in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShotType {
    Clear,
    NetShot,
    Smash,
    PushRush,
    Drop,
    Drive,
    Lob,
    DefensiveShot,
    ShortService,
    LongService,
}

pub const NUM_SHOT_TYPES: usize = 10;

impl ShotType {
    pub const ALL: [ShotType; NUM_SHOT_TYPES] = [
        ShotType::Clear,
        ShotType::NetShot,
        ShotType::Smash,
        ShotType::PushRush,
        ShotType::Drop,
        ShotType::Drive,
        ShotType::Lob,
        ShotType::DefensiveShot,
        ShotType::ShortService,
        ShotType::LongService,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<ShotType> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ShotType::Clear => "clear",
            ShotType::NetShot => "net_shot",
            ShotType::Smash => "smash",
            ShotType::PushRush => "push_rush",
            ShotType::Drop => "drop",
            ShotType::Drive => "drive",
            ShotType::Lob => "lob",
            ShotType::DefensiveShot => "defensive_shot",
            ShotType::ShortService => "short_service",
            ShotType::LongService => "long_service",
        }
    }

    pub fn is_service(self) -> bool {
        matches!(self, ShotType::ShortService | ShotType::LongService)
    }
}

impl fmt::Display for ShotType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShotType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| contract(format!("unknown shot type {s:?}")))
    }
}

impl Serialize for ShotType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ShotType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// Landing position in the opponent-half frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub const fn new(x: f64, y: f64) -> Self {
        Coord { x, y }
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && (-0.5..=0.5).contains(&self.x)
            && (0.0..=1.0).contains(&self.y)
    }

    /// Clamps into the valid frame. Non-finite components map to the middle.
    pub fn clamped(self) -> Coord {
        let x = if self.x.is_finite() { self.x.clamp(-0.5, 0.5) } else { 0.0 };
        let y = if self.y.is_finite() { self.y.clamp(0.0, 1.0) } else { 0.5 };
        Coord { x, y }
    }
}

/// Server (`A`) or receiver (`B`) of a rally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlayerRole {
    A,
    B,
}

impl PlayerRole {
    /// Role that hits the stroke at 1-based `index`.
    pub fn at_index(index: usize) -> PlayerRole {
        if index % 2 == 1 {
            PlayerRole::A
        } else {
            PlayerRole::B
        }
    }

    pub fn opponent(self) -> PlayerRole {
        match self {
            PlayerRole::A => PlayerRole::B,
            PlayerRole::B => PlayerRole::A,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PlayerRole::A => "A",
            PlayerRole::B => "B",
        }
    }
}

impl fmt::Display for PlayerRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlayerRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(PlayerRole::A),
            "B" => Ok(PlayerRole::B),
            other => Err(contract(format!("unknown player role {other:?}"))),
        }
    }
}

/// Opaque player identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub String);

impl PlayerId {
    pub fn new(id: impl Into<String>) -> Self {
        PlayerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlayerId {
    fn from(s: &str) -> Self {
        PlayerId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub role: PlayerRole,
    pub player_id: PlayerId,
    pub shot: ShotType,
    pub area: Coord,
}

/// Small set of roles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoleSet {
    pub a: bool,
    pub b: bool,
}

impl RoleSet {
    pub const EMPTY: RoleSet = RoleSet { a: false, b: false };

    pub fn contains(&self, role: PlayerRole) -> bool {
        match role {
            PlayerRole::A => self.a,
            PlayerRole::B => self.b,
        }
    }

    pub fn insert(&mut self, role: PlayerRole) {
        match role {
            PlayerRole::A => self.a = true,
            PlayerRole::B => self.b = true,
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.a && !self.b
    }
}

/// Shot type of the imputation baseline: a defensive return.
pub const REFERENCE_SHOT: ShotType = ShotType::DefensiveShot;
/// Landing area of the imputation baseline: middle of the opponent half.
pub const REFERENCE_AREA: Coord = Coord::new(0.0, 0.5);

/// One rally. `tau` is the number of given strokes when the rally is used
/// for forecasting; dataset rallies leave it unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rally {
    pub id: String,
    pub player_a: PlayerId,
    pub player_b: PlayerId,
    pub strokes: Vec<Stroke>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,
    /// Roles whose identity was flipped to the opponent by player imputation.
    #[serde(default, skip_serializing_if = "RoleSet::is_empty")]
    pub swapped: RoleSet,
}

impl Rally {
    pub fn len(&self) -> usize {
        self.strokes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strokes.is_empty()
    }

    /// Stroke at 1-based `index`.
    pub fn stroke(&self, index: usize) -> &Stroke {
        &self.strokes[index - 1]
    }

    pub fn player(&self, role: PlayerRole) -> &PlayerId {
        match role {
            PlayerRole::A => &self.player_a,
            PlayerRole::B => &self.player_b,
        }
    }

    /// Identity the forecaster is conditioned on for `role`'s turns.
    pub fn conditioning_id(&self, role: PlayerRole) -> &PlayerId {
        if self.swapped.contains(role) {
            self.player(role.opponent())
        } else {
            self.player(role)
        }
    }

    pub fn tau(&self) -> Result<usize> {
        self.tau
            .ok_or_else(|| contract(format!("rally {} has no tau set", self.id)))
    }

    /// Copy with the given-stroke count set; requires `2 <= tau < len`.
    pub fn with_tau(&self, tau: usize) -> Result<Rally> {
        if tau < 2 || tau >= self.len() {
            return Err(contract(format!(
                "tau {tau} out of range for rally {} of length {}",
                self.id,
                self.len()
            )));
        }
        let mut r = self.clone();
        r.tau = Some(tau);
        Ok(r)
    }

    /// Future strokes `tau+1..=len`.
    pub fn future(&self) -> Result<&[Stroke]> {
        let tau = self.tau()?;
        Ok(&self.strokes[tau..])
    }
}

/// A broken rally invariant. Reported as data by [`validate_rally`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Length { len: usize },
    Alternation { index: usize },
    ServeType { shot: ShotType },
    Coordinates { index: usize },
    PlayerMismatch { index: usize },
    Tau { tau: usize, len: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Length { len } => {
                write!(f, "length: {len} strokes outside [2, {MAX_RALLY_LEN}]")
            }
            Violation::Alternation { index } => write!(f, "alternation: stroke {index} has wrong role"),
            Violation::ServeType { shot } => write!(f, "serve type: stroke 1 is {shot}"),
            Violation::Coordinates { index } => {
                write!(f, "coordinates: stroke {index} lands outside the frame")
            }
            Violation::PlayerMismatch { index } => {
                write!(f, "player: stroke {index} does not match the rally's players")
            }
            Violation::Tau { tau, len } => write!(f, "tau: {tau} outside [2, {}]", len.saturating_sub(1)),
        }
    }
}

/// Lists every invariant the rally breaks; empty means valid.
pub fn validate_rally(rally: &Rally) -> Vec<Violation> {
    let mut out = Vec::new();
    let len = rally.len();
    if !(2..=MAX_RALLY_LEN).contains(&len) {
        out.push(Violation::Length { len });
    }
    if let Some(first) = rally.strokes.first() {
        if !first.shot.is_service() {
            out.push(Violation::ServeType { shot: first.shot });
        }
    }
    // a swapped role shows the opponent's id on a prefix of its turns
    // (up to the imputation horizon) and its own id afterwards
    let mut flip_ended = RoleSet::EMPTY;
    for (i, stroke) in rally.strokes.iter().enumerate() {
        let index = i + 1;
        let role = PlayerRole::at_index(index);
        if stroke.role != role {
            out.push(Violation::Alternation { index });
        }
        if !stroke.area.is_valid() {
            out.push(Violation::Coordinates { index });
        }
        let own = rally.player(stroke.role);
        let ok = if index == 1 || !rally.swapped.contains(stroke.role) {
            &stroke.player_id == own
        } else if &stroke.player_id == rally.conditioning_id(stroke.role) && !flip_ended.contains(stroke.role) {
            true
        } else {
            flip_ended.insert(stroke.role);
            &stroke.player_id == own
        };
        if !ok {
            out.push(Violation::PlayerMismatch { index });
        }
    }
    if let Some(tau) = rally.tau {
        if tau < 2 || tau >= len {
            out.push(Violation::Tau { tau, len });
        }
    }
    out
}

pub fn reference_stroke(role: PlayerRole, player_id: PlayerId) -> Stroke {
    Stroke {
        role,
        player_id,
        shot: REFERENCE_SHOT,
        area: REFERENCE_AREA,
    }
}

/// Replaces the content of every stroke in `2..=tau` not listed in `keep`
/// with the reference stroke. Identities and roles are preserved.
pub fn impute_past(rally: &Rally, keep: &[usize]) -> Result<Rally> {
    let tau = rally.tau()?;
    if let Some(&bad) = keep.iter().find(|&&i| i < 2 || i > tau) {
        return Err(contract(format!(
            "keep index {bad} outside 2..={tau}"
        )));
    }
    let mut out = rally.clone();
    for index in 2..=tau {
        if !keep.contains(&index) {
            let s = &mut out.strokes[index - 1];
            s.shot = REFERENCE_SHOT;
            s.area = REFERENCE_AREA;
        }
    }
    Ok(out)
}

/// Turns `target` into a copy of its opponent: every `target` stroke in
/// `2..=horizon` is relabelled with the opponent's id, and those within the
/// given strokes also get the reference content. Stroke 1 is never touched.
pub fn impute_player(rally: &Rally, target: PlayerRole, horizon: usize) -> Result<Rally> {
    let tau = rally.tau()?;
    if horizon > rally.len() {
        return Err(contract(format!(
            "horizon {horizon} exceeds rally length {}",
            rally.len()
        )));
    }
    let replacement = rally.player(target.opponent()).clone();
    let mut out = rally.clone();
    out.swapped.insert(target);
    for index in 2..=horizon {
        let s = &mut out.strokes[index - 1];
        if s.role != target {
            continue;
        }
        s.player_id = replacement.clone();
        if index <= tau {
            s.shot = REFERENCE_SHOT;
            s.area = REFERENCE_AREA;
        }
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::testing::rally;
    use super::*;
    use proptest::prelude::*;
    use ShotType::*;

    fn six() -> Rally {
        rally(
            "r",
            &[
                (ShortService, 0.2, 0.2),
                (NetShot, -0.1, 0.1),
                (Lob, 0.3, 0.9),
                (Smash, -0.4, 0.6),
                (Clear, 0.1, 0.95),
                (Drop, 0.0, 0.2),
            ],
            Some(4),
        )
    }

    #[test]
    fn shot_codes_are_a_bijection() {
        for (code, t) in ShotType::ALL.iter().enumerate() {
            assert_eq!(t.code(), code);
            assert_eq!(ShotType::from_code(code), Some(*t));
            assert_eq!(t.name().parse::<ShotType>().unwrap(), *t);
            let json = serde_json::to_string(t).unwrap();
            assert_eq!(serde_json::from_str::<ShotType>(&json).unwrap(), *t);
        }
        assert_eq!(ShotType::from_code(10), None);
        assert!("smashh".parse::<ShotType>().is_err());
    }

    #[test]
    fn valid_four_stroke_rally() {
        let r = rally(
            "ok",
            &[
                (ShortService, 0.1, 0.2),
                (NetShot, 0.0, 0.1),
                (Lob, 0.2, 0.9),
                (Smash, -0.2, 0.5),
            ],
            Some(2),
        );
        assert!(validate_rally(&r).is_empty());
    }

    #[test]
    fn smash_serve_is_reported() {
        let mut r = six();
        r.strokes[0].shot = Smash;
        let v = validate_rally(&r);
        assert_eq!(v, vec![Violation::ServeType { shot: Smash }]);
        assert!(v[0].to_string().starts_with("serve type"));
    }

    #[test]
    fn double_a_is_reported() {
        let mut r = six();
        r.strokes[1].role = PlayerRole::A;
        r.strokes[1].player_id = r.player_a.clone();
        let v = validate_rally(&r);
        assert!(v.contains(&Violation::Alternation { index: 2 }));
        assert!(v.iter().any(|x| x.to_string().starts_with("alternation")));
    }

    #[test]
    fn length_coords_and_tau_are_reported() {
        let mut r = six();
        r.strokes[2].area = Coord::new(0.7, 0.5);
        r.tau = Some(6);
        let v = validate_rally(&r);
        assert!(v.contains(&Violation::Coordinates { index: 3 }));
        assert!(v.contains(&Violation::Tau { tau: 6, len: 6 }));

        let long: Vec<_> = (0..36)
            .map(|i| (if i == 0 { LongService } else { Clear }, 0.0, 0.5))
            .collect();
        let v = validate_rally(&rally("long", &long, None));
        assert_eq!(v, vec![Violation::Length { len: 36 }]);
    }

    #[test]
    fn reference_stroke_is_constant() {
        let s = reference_stroke(PlayerRole::A, "p7".into());
        assert_eq!(
            s,
            Stroke {
                role: PlayerRole::A,
                player_id: "p7".into(),
                shot: DefensiveShot,
                area: Coord::new(0.0, 0.5)
            }
        );
        let b = reference_stroke(PlayerRole::B, "p3".into());
        assert_eq!((b.shot, b.area), (DefensiveShot, Coord::new(0.0, 0.5)));
        assert_eq!(s, reference_stroke(PlayerRole::A, "p7".into()));
    }

    #[test]
    fn impute_past_full_coalition_is_identity() {
        let r = six();
        assert_eq!(impute_past(&r, &[2, 3, 4]).unwrap(), r);
    }

    #[test]
    fn impute_past_empty_coalition() {
        let r = six();
        let out = impute_past(&r, &[]).unwrap();
        assert_eq!(out.strokes[0], r.strokes[0]);
        for i in 2..=4 {
            assert_eq!(out.stroke(i).shot, DefensiveShot);
            assert_eq!(out.stroke(i).area, REFERENCE_AREA);
            assert_eq!(out.stroke(i).player_id, r.stroke(i).player_id);
        }
        assert_eq!(&out.strokes[4..], &r.strokes[4..]);
    }

    #[test]
    fn impute_past_partial() {
        let r = six();
        let out = impute_past(&r, &[3]).unwrap();
        assert_eq!(out.stroke(3), r.stroke(3));
        assert_eq!(out.stroke(2).shot, DefensiveShot);
        assert_eq!(out.stroke(4).shot, DefensiveShot);
    }

    #[test]
    fn impute_past_rejects_bad_index() {
        let r = six();
        assert!(matches!(impute_past(&r, &[1]), Err(Error::Contract(_))));
        assert!(matches!(impute_past(&r, &[5]), Err(Error::Contract(_))));
        let mut no_tau = r.clone();
        no_tau.tau = None;
        assert!(impute_past(&no_tau, &[]).is_err());
    }

    #[test]
    fn impute_player_a() {
        let r = six();
        let out = impute_player(&r, PlayerRole::A, 6).unwrap();
        assert_eq!(out.stroke(3).player_id, r.player_b);
        assert_eq!((out.stroke(3).shot, out.stroke(3).area), (REFERENCE_SHOT, REFERENCE_AREA));
        assert_eq!(out.stroke(5).player_id, r.player_b);
        assert_eq!((out.stroke(5).shot, out.stroke(5).area), (r.stroke(5).shot, r.stroke(5).area));
        for i in [1, 2, 4, 6] {
            assert_eq!(out.stroke(i), r.stroke(i));
        }
        assert_eq!(out.conditioning_id(PlayerRole::A), &r.player_b);
        assert!(validate_rally(&out).is_empty());
    }

    #[test]
    fn impute_player_b() {
        let r = rally(
            "r4",
            &[
                (LongService, 0.2, 0.9),
                (Clear, 0.1, 0.9),
                (Smash, 0.0, 0.5),
                (Drive, 0.2, 0.4),
            ],
            Some(2),
        );
        let out = impute_player(&r, PlayerRole::B, 4).unwrap();
        assert_eq!(out.stroke(2).player_id, r.player_a);
        assert_eq!(out.stroke(2).shot, REFERENCE_SHOT);
        assert_eq!(out.stroke(4).player_id, r.player_a);
        assert_eq!(out.stroke(4).shot, Drive);
        assert_eq!(out.stroke(3), r.stroke(3));
        assert!(impute_player(&r, PlayerRole::B, 5).is_err());
    }

    #[test]
    fn short_horizon_flips_a_prefix_and_stays_valid() {
        let r = six();
        let out = impute_player(&r, PlayerRole::A, 3).unwrap();
        assert_eq!(out.stroke(3).player_id, r.player_b);
        assert_eq!(out.stroke(5).player_id, r.player_a);
        assert!(validate_rally(&out).is_empty());
        let mut broken = out.clone();
        broken.strokes[4].player_id = r.player_b.clone();
        broken.strokes[2].player_id = r.player_a.clone();
        assert_eq!(validate_rally(&broken), vec![Violation::PlayerMismatch { index: 5 }]);
    }

    #[test]
    fn both_players_with_full_tau_leave_only_the_serve() {
        let mut r = six();
        r.strokes.push(Stroke { role: PlayerRole::A, player_id: r.player_a.clone(), shot: Drive, area: Coord::new(0.0, 0.3) });
        let r = r.with_tau(6).unwrap();
        let both = impute_player(&impute_player(&r, PlayerRole::A, 7).unwrap(), PlayerRole::B, 7).unwrap();
        // tau=6 < |R|; the sixth stroke is the last imputable content
        assert_eq!(both.strokes[0], r.strokes[0]);
        for i in 2..=6 {
            assert_eq!(both.stroke(i).shot, REFERENCE_SHOT);
        }
        assert!(validate_rally(&both).is_empty());
    }

    fn arb_rally() -> impl Strategy<Value = Rally> {
        (3usize..=MAX_RALLY_LEN)
            .prop_flat_map(|len| {
                (
                    Just(len),
                    2..len,
                    prop::collection::vec((0usize..10, -0.5f64..=0.5, 0.0f64..=1.0), len),
                    any::<bool>(),
                )
            })
            .prop_map(|(_, tau, raw, long)| {
                let shots: Vec<_> = raw
                    .iter()
                    .enumerate()
                    .map(|(i, &(c, x, y))| {
                        let shot = if i == 0 {
                            if long { LongService } else { ShortService }
                        } else {
                            ShotType::from_code(c).unwrap()
                        };
                        (shot, x, y)
                    })
                    .collect();
                rally("p", &shots, Some(tau))
            })
    }

    proptest! {
        #[test]
        fn imputations_preserve_invariants(
            r in arb_rally(),
            mask in any::<u64>(),
            roles in 0u8..4,
        ) {
            let tau = r.tau.unwrap();
            let keep: Vec<usize> = (2..=tau).filter(|i| mask >> i & 1 == 1).collect();
            let past = impute_past(&r, &keep).unwrap();
            prop_assert_eq!(&past.strokes[0], &r.strokes[0]);
            prop_assert!(validate_rally(&past).is_empty());
            prop_assert_eq!(&impute_past(&past, &keep).unwrap(), &past);
            for i in 2..=tau {
                if keep.contains(&i) {
                    prop_assert_eq!(past.stroke(i), r.stroke(i));
                } else {
                    prop_assert_eq!(past.stroke(i), &reference_stroke(r.stroke(i).role, r.stroke(i).player_id.clone()));
                }
            }
            let mut p = r.clone();
            if roles & 1 == 1 { p = impute_player(&p, PlayerRole::A, r.len()).unwrap(); }
            if roles & 2 == 2 { p = impute_player(&p, PlayerRole::B, r.len()).unwrap(); }
            prop_assert_eq!(&p.strokes[0], &r.strokes[0]);
            prop_assert!(validate_rally(&p).is_empty());
        }
    }
}
