//! Lineups, matchup records and season datasets.
//!
//! A season is read from a CSV file with one row per observed pairing of two
//! lineups. Rows for the same unordered pair are summed, and every stored
//! record is oriented so that `lineup_a < lineup_b`; the point differential is
//! always "points of `lineup_a` minus points of `lineup_b`".

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of players on court for one side.
pub const LINEUP_SIZE: usize = 5;

/// Column names of the matchup CSV, in order.
pub const CSV_HEADER: [&str; 8] = [
    "lineup_a_id",
    "lineup_b_id",
    "minutes",
    "point_diff",
    "players_a",
    "players_b",
    "team_a",
    "team_b",
];

#[derive(Debug, Error)]
pub enum DataError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header { found: Vec<String>, expected: Vec<String> },
    #[error("line {line}: column `{column}` has invalid value {value:?}")]
    Field {
        line: u64,
        column: &'static str,
        value: String,
    },
    #[error("line {line}: lineup {lineup} lists {count} players, expected {LINEUP_SIZE}")]
    LineupSize { line: u64, lineup: LineupId, count: usize },
    #[error("lineup {lineup}: player {player:?} listed more than once")]
    DuplicatePlayer { lineup: LineupId, player: String },
    #[error("lineup {lineup}: empty player token")]
    EmptyPlayer { lineup: LineupId },
    #[error("line {line}: minutes must be positive and finite, got {minutes}")]
    NonPositiveMinutes { line: u64, minutes: f64 },
    #[error("line {line}: point differential must be finite, got {value}")]
    NonFiniteDiff { line: u64, value: f64 },
    #[error("line {line}: lineup {lineup} is matched against itself")]
    SelfMatchup { line: u64, lineup: LineupId },
    #[error("lineup {lineup} appears with two different player sets")]
    ConflictingLineup { lineup: LineupId },
    #[error("lineup {lineup} is assigned to both team {first:?} and team {second:?}")]
    ConflictingTeam {
        lineup: LineupId,
        first: String,
        second: String,
    },
    #[error("matchup references unknown lineup {0}")]
    UnknownLineup(LineupId),
}

/// Opaque player token, unique within a dataset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlayerId(String);

impl PlayerId {
    pub fn new(token: impl Into<String>) -> Option<Self> {
        let token = token.into();
        if token.is_empty() {
            None
        } else {
            Some(Self(token))
        }
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

/// Dataset-scoped lineup identifier assigned by the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LineupId(pub u64);

impl fmt::Display for LineupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Five distinct players sharing the court for one team.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lineup {
    id: LineupId,
    // kept sorted so equality is set equality
    players: [PlayerId; LINEUP_SIZE],
}

impl Lineup {
    pub fn new(id: LineupId, players: Vec<PlayerId>) -> Result<Self, DataError> {
        let count = players.len();
        let mut players: [PlayerId; LINEUP_SIZE] = players.try_into().map_err(|_| DataError::LineupSize {
            line: 0,
            lineup: id,
            count,
        })?;
        players.sort();
        if let Some(w) = players.windows(2).find(|w| w[0] == w[1]) {
            return Err(DataError::DuplicatePlayer {
                lineup: id,
                player: w[0].to_string(),
            });
        }
        Ok(Self { id, players })
    }

    /// Parses a `|`-separated list of player tokens.
    pub fn parse(id: LineupId, list: &str) -> Result<Self, DataError> {
        let tokens: Vec<&str> = list.split('|').map(str::trim).collect();
        if tokens.len() != LINEUP_SIZE {
            return Err(DataError::LineupSize {
                line: 0,
                lineup: id,
                count: tokens.iter().filter(|t| !t.is_empty()).count(),
            });
        }
        let players = tokens
            .into_iter()
            .map(|t| PlayerId::new(t).ok_or(DataError::EmptyPlayer { lineup: id }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(id, players)
    }

    pub fn id(&self) -> LineupId {
        self.id
    }

    pub fn players(&self) -> &[PlayerId] {
        &self.players
    }

    pub fn contains(&self, player: &PlayerId) -> bool {
        self.players.binary_search(player).is_ok()
    }

    /// Players joined with `|`, the CSV form.
    pub fn player_list(&self) -> String {
        self.players.iter().map(PlayerId::as_str).collect::<Vec<_>>().join("|")
    }
}

/// Number of players two lineups have in common.
pub fn player_overlap(li: &Lineup, lj: &Lineup) -> usize {
    // both player arrays are sorted
    let (mut a, mut b, mut common) = (0, 0, 0);
    while a < LINEUP_SIZE && b < LINEUP_SIZE {
        match li.players[a].cmp(&lj.players[b]) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                a += 1;
                b += 1;
            }
        }
    }
    common
}

/// Aggregate pairing of two lineups, oriented so that `lineup_a < lineup_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchupRecord {
    pub lineup_a: LineupId,
    pub lineup_b: LineupId,
    /// Shared court time in minutes.
    pub minutes: f64,
    /// Points of `lineup_a` minus points of `lineup_b` over that time.
    pub point_diff: f64,
}

impl MatchupRecord {
    /// Builds a record from either orientation, swapping ids and negating the
    /// differential when `first > second`.
    pub fn oriented(first: LineupId, second: LineupId, minutes: f64, point_diff: f64) -> Self {
        if first <= second {
            Self {
                lineup_a: first,
                lineup_b: second,
                minutes,
                point_diff,
            }
        } else {
            Self {
                lineup_a: second,
                lineup_b: first,
                minutes,
                point_diff: -point_diff,
            }
        }
    }

    /// `Some(true)` when the lower-id lineup outperformed, `None` for a tie.
    pub fn label(&self) -> Option<bool> {
        if self.point_diff > 0.0 {
            Some(true)
        } else if self.point_diff < 0.0 {
            Some(false)
        } else {
            None
        }
    }

    pub fn involves(&self, id: LineupId) -> bool {
        self.lineup_a == id || self.lineup_b == id
    }
}

/// Options applied while ingesting a season.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Aggregated records with fewer minutes than this are dropped. 0 disables the filter.
    pub min_minutes: f64,
}

/// Validated season: lineup table, one record per unordered pair, optional teams.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeasonDataset {
    lineups: BTreeMap<LineupId, Lineup>,
    matchups: Vec<MatchupRecord>,
    team_of: BTreeMap<LineupId, String>,
}

impl SeasonDataset {
    /// Assembles a dataset from raw parts, aggregating duplicate pairs.
    pub fn from_parts(
        lineups: impl IntoIterator<Item = Lineup>,
        records: impl IntoIterator<Item = MatchupRecord>,
        teams: impl IntoIterator<Item = (LineupId, String)>,
    ) -> Result<Self, DataError> {
        let mut builder = Builder::default();
        for lineup in lineups {
            builder.add_lineup(lineup)?;
        }
        for (id, team) in teams {
            builder.add_team(id, &team)?;
        }
        for rec in records {
            builder.add_record(0, rec)?;
        }
        builder.finish(IngestOptions::default())
    }

    pub fn lineups(&self) -> impl ExactSizeIterator<Item = &Lineup> {
        self.lineups.values()
    }

    pub fn lineup(&self, id: LineupId) -> Option<&Lineup> {
        self.lineups.get(&id)
    }

    pub fn lineup_ids(&self) -> impl Iterator<Item = LineupId> + '_ {
        self.lineups.keys().copied()
    }

    pub fn matchups(&self) -> &[MatchupRecord] {
        &self.matchups
    }

    pub fn team_of(&self, id: LineupId) -> Option<&str> {
        self.team_of.get(&id).map(String::as_str)
    }

    pub fn has_teams(&self) -> bool {
        !self.team_of.is_empty()
    }

    /// Distinct team tokens in sorted order.
    pub fn teams(&self) -> Vec<&str> {
        self.team_of
            .values()
            .map(String::as_str)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Lineups assigned to `team`, in id order.
    pub fn team_lineups<'a>(&'a self, team: &'a str) -> impl Iterator<Item = &'a Lineup> + 'a {
        self.lineups
            .values()
            .filter(move |l| self.team_of(l.id()) == Some(team))
    }

    /// Records with a nonzero differential.
    pub fn labeled(&self) -> impl Iterator<Item = &MatchupRecord> {
        self.matchups.iter().filter(|m| m.label().is_some())
    }

    /// Total minutes a lineup spent in any recorded matchup.
    pub fn minutes_played(&self, id: LineupId) -> f64 {
        self.matchups.iter().filter(|m| m.involves(id)).map(|m| m.minutes).sum()
    }

    /// Same lineup table and teams, with a different set of records.
    pub(crate) fn with_matchups(&self, mut matchups: Vec<MatchupRecord>) -> Self {
        matchups.sort_by_key(|m| (m.lineup_a, m.lineup_b));
        Self {
            lineups: self.lineups.clone(),
            matchups,
            team_of: self.team_of.clone(),
        }
    }

    /// Writes the dataset in the ingestion CSV format, one row per record.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DataError> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(CSV_HEADER)?;
        for m in &self.matchups {
            let a = &self.lineups[&m.lineup_a];
            let b = &self.lineups[&m.lineup_b];
            out.write_record([
                m.lineup_a.to_string(),
                m.lineup_b.to_string(),
                m.minutes.to_string(),
                m.point_diff.to_string(),
                a.player_list(),
                b.player_list(),
                self.team_of(m.lineup_a).unwrap_or_default().to_owned(),
                self.team_of(m.lineup_b).unwrap_or_default().to_owned(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads a season from the matchup CSV format.
pub fn ingest<R: Read>(reader: R) -> Result<SeasonDataset, DataError> {
    ingest_with(reader, IngestOptions::default())
}

pub fn ingest_with<R: Read>(reader: R, options: IngestOptions) -> Result<SeasonDataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = rdr.records();
    let header = match rows.next() {
        None => return Ok(SeasonDataset::default()),
        Some(h) => h?,
    };
    if header.iter().ne(CSV_HEADER) {
        return Err(DataError::Header {
            found: header.iter().map(str::to_owned).collect(),
            expected: CSV_HEADER.iter().map(|s| (*s).to_owned()).collect(),
        });
    }

    let mut builder = Builder::default();
    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let id_a = LineupId(parse_field(&row, 0, line)?);
        let id_b = LineupId(parse_field(&row, 1, line)?);
        let minutes: f64 = parse_field(&row, 2, line)?;
        let point_diff: f64 = parse_field(&row, 3, line)?;
        let with_line = |e: DataError| match e {
            DataError::LineupSize { lineup, count, .. } => DataError::LineupSize { line, lineup, count },
            other => other,
        };
        builder.add_lineup(Lineup::parse(id_a, &row[4]).map_err(with_line)?)?;
        builder.add_lineup(Lineup::parse(id_b, &row[5]).map_err(with_line)?)?;
        builder.add_team(id_a, &row[6])?;
        builder.add_team(id_b, &row[7])?;
        if id_a == id_b {
            return Err(DataError::SelfMatchup { line, lineup: id_a });
        }
        builder.add_record(line, MatchupRecord::oriented(id_a, id_b, minutes, point_diff))?;
    }
    builder.finish(options)
}

fn parse_field<T: std::str::FromStr>(row: &csv::StringRecord, idx: usize, line: u64) -> Result<T, DataError> {
    let value = &row[idx];
    value.parse().map_err(|_| DataError::Field {
        line,
        column: CSV_HEADER[idx],
        value: value.to_owned(),
    })
}

#[derive(Default)]
struct Builder {
    lineups: BTreeMap<LineupId, Lineup>,
    team_of: BTreeMap<LineupId, String>,
    pairs: BTreeMap<(LineupId, LineupId), (f64, f64)>,
}

impl Builder {
    fn add_lineup(&mut self, lineup: Lineup) -> Result<(), DataError> {
        match self.lineups.get(&lineup.id) {
            Some(existing) if existing != &lineup => Err(DataError::ConflictingLineup { lineup: lineup.id }),
            Some(_) => Ok(()),
            None => {
                self.lineups.insert(lineup.id, lineup);
                Ok(())
            }
        }
    }

    fn add_team(&mut self, id: LineupId, team: &str) -> Result<(), DataError> {
        if team.is_empty() {
            return Ok(());
        }
        match self.team_of.get(&id) {
            Some(existing) if existing != team => Err(DataError::ConflictingTeam {
                lineup: id,
                first: existing.clone(),
                second: team.to_owned(),
            }),
            Some(_) => Ok(()),
            None => {
                self.team_of.insert(id, team.to_owned());
                Ok(())
            }
        }
    }

    fn add_record(&mut self, line: u64, rec: MatchupRecord) -> Result<(), DataError> {
        if !(rec.minutes > 0.0 && rec.minutes.is_finite()) {
            return Err(DataError::NonPositiveMinutes {
                line,
                minutes: rec.minutes,
            });
        }
        if !rec.point_diff.is_finite() {
            return Err(DataError::NonFiniteDiff {
                line,
                value: rec.point_diff,
            });
        }
        if rec.lineup_a == rec.lineup_b {
            return Err(DataError::SelfMatchup {
                line,
                lineup: rec.lineup_a,
            });
        }
        let rec = MatchupRecord::oriented(rec.lineup_a, rec.lineup_b, rec.minutes, rec.point_diff);
        let slot = self.pairs.entry((rec.lineup_a, rec.lineup_b)).or_insert((0.0, 0.0));
        slot.0 += rec.minutes;
        slot.1 += rec.point_diff;
        Ok(())
    }

    fn finish(self, options: IngestOptions) -> Result<SeasonDataset, DataError> {
        for &(a, b) in self.pairs.keys() {
            for id in [a, b] {
                if !self.lineups.contains_key(&id) {
                    return Err(DataError::UnknownLineup(id));
                }
            }
        }
        if let Some(id) = self.team_of.keys().find(|id| !self.lineups.contains_key(id)) {
            return Err(DataError::UnknownLineup(*id));
        }
        let matchups = self
            .pairs
            .into_iter()
            .filter(|(_, (minutes, _))| *minutes >= options.min_minutes)
            .map(|((a, b), (minutes, point_diff))| MatchupRecord {
                lineup_a: a,
                lineup_b: b,
                minutes,
                point_diff,
            })
            .collect();
        Ok(SeasonDataset {
            lineups: self.lineups,
            matchups,
            team_of: self.team_of,
        })
    }
}
