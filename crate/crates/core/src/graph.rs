//! Share events and the binary user–item interaction graph.
//!
//! Events arrive as newline-delimited JSON objects. Repeated shares of the
//! same item by the same user collapse into one edge. Internal indices are
//! dense and assigned in order of first appearance, so a given event file
//! always produces the same graph.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_kind() -> String {
    "share".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub user: String,
    pub item: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<u64>,
    #[serde(default = "default_kind")]
    pub kind: String,
}

impl InteractionEvent {
    pub fn new(user: impl Into<String>, item: impl Into<String>) -> Self {
        Self {
            user: user.into(),
            item: item.into(),
            ts: None,
            kind: default_kind(),
        }
    }
}

#[derive(Deserialize)]
struct RawEvent {
    user: String,
    item: String,
    #[serde(default)]
    ts: Option<i64>,
    #[serde(default)]
    kind: Option<String>,
}

fn parse_line(line: &str) -> std::result::Result<InteractionEvent, String> {
    let raw: RawEvent = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if raw.user.is_empty() {
        return Err("empty user".into());
    }
    if raw.item.is_empty() {
        return Err("empty item".into());
    }
    let ts = match raw.ts {
        Some(t) if t < 0 => return Err(format!("negative timestamp {t}")),
        Some(t) => Some(t as u64),
        None => None,
    };
    Ok(InteractionEvent {
        user: raw.user,
        item: raw.item,
        ts,
        kind: raw.kind.unwrap_or_else(default_kind),
    })
}

/// Result of reading an event stream.
#[derive(Debug, Clone, Default)]
pub struct ParsedEvents {
    pub events: Vec<InteractionEvent>,
    /// Malformed lines skipped in lenient mode.
    pub skipped: usize,
}

/// Reads newline-delimited event records.
///
/// Blank lines are ignored. In strict mode the first malformed line aborts
/// with its 1-based line number; otherwise malformed lines are skipped and
/// counted.
pub fn parse_events<R: BufRead>(reader: R, strict: bool) -> Result<ParsedEvents> {
    let mut out = ParsedEvents::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(ev) => out.events.push(ev),
            Err(reason) if strict => {
                return Err(Error::MalformedLine {
                    line: idx + 1,
                    reason,
                })
            }
            Err(_) => out.skipped += 1,
        }
    }
    Ok(out)
}

pub fn write_events<W: Write>(mut w: W, events: &[InteractionEvent]) -> Result<()> {
    for ev in events {
        serde_json::to_writer(&mut w, ev)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Bidirectional map between external identifiers and dense indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, idx: usize) -> &str {
        &self.ids[idx]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

/// Compressed adjacency: neighbours of row `r` are `indices[offsets[r]..offsets[r + 1]]`.
#[derive(Debug, Clone, PartialEq)]
struct Csr {
    offsets: Vec<usize>,
    indices: Vec<usize>,
}

impl Csr {
    /// `edges` must be sorted by (row, col) and duplicate-free.
    fn from_sorted(rows: usize, edges: impl Iterator<Item = (usize, usize)>) -> Self {
        let mut offsets = vec![0usize; rows + 1];
        let mut indices = Vec::new();
        for (r, c) in edges {
            offsets[r + 1] += 1;
            indices.push(c);
        }
        for r in 0..rows {
            offsets[r + 1] += offsets[r];
        }
        Csr { offsets, indices }
    }

    fn row(&self, r: usize) -> &[usize] {
        &self.indices[self.offsets[r]..self.offsets[r + 1]]
    }

    fn degree(&self, r: usize) -> usize {
        self.offsets[r + 1] - self.offsets[r]
    }
}

/// Immutable binary bipartite graph of who shared what.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    users: IdMap,
    items: IdMap,
    user_items: Csr,
    item_users: Csr,
}

impl InteractionGraph {
    fn from_edges(users: IdMap, items: IdMap, mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let user_items = Csr::from_sorted(users.len(), edges.iter().copied());
        let mut transposed: Vec<(usize, usize)> = edges.iter().map(|&(u, i)| (i, u)).collect();
        transposed.sort_unstable();
        let item_users = Csr::from_sorted(items.len(), transposed.into_iter());
        InteractionGraph {
            users,
            items,
            user_items,
            item_users,
        }
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    /// Total number of distinct edges.
    pub fn num_edges(&self) -> usize {
        self.user_items.indices.len()
    }

    /// Items shared by `u`, ascending.
    pub fn user_items(&self, u: usize) -> &[usize] {
        self.user_items.row(u)
    }

    /// Users who shared `i`, ascending.
    pub fn item_users(&self, i: usize) -> &[usize] {
        self.item_users.row(i)
    }

    pub fn user_degree(&self, u: usize) -> usize {
        self.user_items.degree(u)
    }

    pub fn item_degree(&self, i: usize) -> usize {
        self.item_users.degree(i)
    }

    pub fn user_ids(&self) -> &IdMap {
        &self.users
    }

    pub fn item_ids(&self) -> &IdMap {
        &self.items
    }

    pub fn has_edge(&self, u: usize, i: usize) -> bool {
        self.user_items(u).binary_search(&i).is_ok()
    }

    /// All edges as (user, item), ordered by user then item.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_users()).flat_map(move |u| self.user_items(u).iter().map(move |&i| (u, i)))
    }
}

/// Builds the graph, collapsing duplicate (user, item) pairs.
pub fn build_graph(events: &[InteractionEvent]) -> Result<InteractionGraph> {
    if events.is_empty() {
        return Err(Error::EmptyEventSet);
    }
    let mut users = IdMap::default();
    let mut items = IdMap::default();
    let edges = events
        .iter()
        .map(|ev| (users.intern(&ev.user), items.intern(&ev.item)))
        .collect();
    Ok(InteractionGraph::from_edges(users, items, edges))
}

/// Iteratively drops users below `min_user_deg` and items below
/// `min_item_deg` until nothing changes, then re-indexes densely.
///
/// Surviving nodes keep their relative order, so first-appearance order is
/// preserved.
pub fn prune(
    graph: &InteractionGraph,
    min_user_deg: usize,
    min_item_deg: usize,
) -> Result<InteractionGraph> {
    if min_user_deg < 1 || min_item_deg < 1 {
        return Err(Error::InvalidParams(
            "prune thresholds must be at least 1".into(),
        ));
    }
    let mut user_alive = vec![true; graph.num_users()];
    let mut item_alive = vec![true; graph.num_items()];
    let mut user_deg: Vec<usize> = (0..graph.num_users()).map(|u| graph.user_degree(u)).collect();
    let mut item_deg: Vec<usize> = (0..graph.num_items()).map(|i| graph.item_degree(i)).collect();

    loop {
        let mut changed = false;
        for u in 0..graph.num_users() {
            if user_alive[u] && user_deg[u] < min_user_deg {
                user_alive[u] = false;
                changed = true;
                for &i in graph.user_items(u) {
                    if item_alive[i] {
                        item_deg[i] -= 1;
                    }
                }
            }
        }
        for i in 0..graph.num_items() {
            if item_alive[i] && item_deg[i] < min_item_deg {
                item_alive[i] = false;
                changed = true;
                for &u in graph.item_users(i) {
                    if user_alive[u] {
                        user_deg[u] -= 1;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut users = IdMap::default();
    let user_map: Vec<Option<usize>> = (0..graph.num_users())
        .map(|u| user_alive[u].then(|| users.intern(graph.users.id(u))))
        .collect();
    let mut items = IdMap::default();
    let item_map: Vec<Option<usize>> = (0..graph.num_items())
        .map(|i| item_alive[i].then(|| items.intern(graph.items.id(i))))
        .collect();
    if users.is_empty() || items.is_empty() {
        return Err(Error::EmptyAfterPrune);
    }
    let edges = graph
        .edges()
        .filter_map(|(u, i)| Some((user_map[u]?, item_map[i]?)))
        .collect();
    Ok(InteractionGraph::from_edges(users, items, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(u: &str, i: &str) -> InteractionEvent {
        InteractionEvent::new(u, i)
    }

    #[test]
    fn parses_well_formed_lines_in_order() {
        let input = "{\"user\":\"u42\",\"item\":\"article-7\",\"ts\":1466380800,\"kind\":\"share\"}\n{\"user\":\"u1\",\"item\":\"a\"}\n";
        let parsed = parse_events(input.as_bytes(), true).unwrap();
        assert_eq!(parsed.events.len(), 2);
        assert_eq!(parsed.events[0].user, "u42");
        assert_eq!(parsed.events[0].ts, Some(1466380800));
        assert_eq!(parsed.events[1].kind, "share");
        assert_eq!(parsed.events[1].ts, None);
    }

    #[test]
    fn empty_stream_is_empty_list() {
        let parsed = parse_events("".as_bytes(), true).unwrap();
        assert!(parsed.events.is_empty());
        assert_eq!(parsed.skipped, 0);
    }

    #[test]
    fn missing_item_strict_vs_lenient() {
        let input = "{\"user\":\"u1\"}\n";
        match parse_events(input.as_bytes(), true) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected MalformedLine, got {other:?}"),
        }
        let parsed = parse_events(input.as_bytes(), false).unwrap();
        assert!(parsed.events.is_empty());
        assert_eq!(parsed.skipped, 1);
    }

    #[test]
    fn rejects_empty_ids_and_negative_ts() {
        for line in [
            "{\"user\":\"\",\"item\":\"a\"}",
            "{\"user\":\"u\",\"item\":\"\"}",
            "{\"user\":\"u\",\"item\":\"a\",\"ts\":-5}",
            "not json",
        ] {
            let input = format!("{{\"user\":\"ok\",\"item\":\"ok\"}}\n{line}\n");
            match parse_events(input.as_bytes(), true) {
                Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 2),
                other => panic!("expected MalformedLine for {line:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn builds_degrees() {
        let g = build_graph(&[ev("u1", "i1"), ev("u1", "i2"), ev("u2", "i2")]).unwrap();
        assert_eq!(g.num_edges(), 3);
        assert_eq!((0..2).map(|u| g.user_degree(u)).collect::<Vec<_>>(), [2, 1]);
        assert_eq!((0..2).map(|i| g.item_degree(i)).collect::<Vec<_>>(), [1, 2]);
    }

    #[test]
    fn duplicate_events_collapse() {
        let g = build_graph(&[ev("u1", "i1"), ev("u1", "i1")]).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.user_items(0), &[0]);
    }

    #[test]
    fn empty_event_set_is_error() {
        assert!(matches!(build_graph(&[]), Err(Error::EmptyEventSet)));
    }

    #[test]
    fn indices_follow_first_appearance() {
        let g = build_graph(&[ev("b", "y"), ev("a", "x"), ev("b", "x")]).unwrap();
        assert_eq!(g.user_ids().ids(), ["b", "a"]);
        assert_eq!(g.item_ids().ids(), ["y", "x"]);
        assert_eq!(g.user_items(0), &[0, 1]);
    }

    #[test]
    fn prune_identity_at_one() {
        let g = build_graph(&[ev("u1", "i1"), ev("u2", "i1"), ev("u2", "i2")]).unwrap();
        assert_eq!(prune(&g, 1, 1).unwrap(), g);
    }

    #[test]
    fn prune_chain_fixpoint() {
        let g = build_graph(&[ev("u1", "i1"), ev("u2", "i1"), ev("u2", "i2")]).unwrap();
        let p = prune(&g, 1, 2).unwrap();
        assert_eq!(p.num_users(), 2);
        assert_eq!(p.num_items(), 1);
        assert_eq!(p.item_ids().ids(), ["i1"]);
        assert_eq!(p.user_items(1), &[0]);
    }

    #[test]
    fn prune_to_nothing() {
        let g = build_graph(&[ev("u1", "i1")]).unwrap();
        assert!(matches!(prune(&g, 2, 2), Err(Error::EmptyAfterPrune)));
    }

    #[test]
    fn prune_rejects_zero_threshold() {
        let g = build_graph(&[ev("u1", "i1")]).unwrap();
        assert!(matches!(prune(&g, 0, 1), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn event_write_parse_roundtrip() {
        let mut e = ev("u", "i");
        e.ts = Some(3);
        let mut buf = Vec::new();
        write_events(&mut buf, &[e.clone()]).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "{\"user\":\"u\",\"item\":\"i\",\"ts\":3,\"kind\":\"share\"}\n"
        );
        assert_eq!(parse_events(&buf[..], true).unwrap().events, vec![e]);
    }
}
