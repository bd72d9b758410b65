use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::trec_io::{Collection, JudgmentRecord, JudgmentStore, Label, RankedList, Run};

use super::{Judge, JudgeError, JudgeItem, Verdict};

/// Binary labels for the first `min(depth, list_len)` items of one list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgmentVector {
    query_id: String,
    depth: usize,
    list_len: usize,
    labels: Vec<Label>,
}

impl JudgmentVector {
    /// `labels` must have exactly `min(depth, list_len)` entries.
    pub fn new(
        query_id: impl Into<String>,
        depth: usize,
        list_len: usize,
        labels: Vec<Label>,
    ) -> Result<Self, JudgeError> {
        if depth == 0 {
            return Err(JudgeError::ZeroDepth);
        }
        if labels.len() != depth.min(list_len) {
            return Err(JudgeError::Config(format!(
                "judgment vector has {} labels, expected min({depth}, {list_len})",
                labels.len()
            )));
        }
        Ok(Self {
            query_id: query_id.into(),
            depth,
            list_len,
            labels,
        })
    }

    /// A fully judged list: depth and list length both equal the label count.
    pub fn complete(query_id: impl Into<String>, labels: impl IntoIterator<Item = bool>) -> Self {
        let labels: Vec<Label> = labels.into_iter().map(Label::from).collect();
        let n = labels.len();
        Self {
            query_id: query_id.into(),
            depth: n.max(1),
            list_len: n,
            labels,
        }
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn list_len(&self) -> usize {
        self.list_len
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn relevant(&self) -> impl Iterator<Item = bool> + '_ {
        self.labels.iter().map(|l| l.is_relevant())
    }

    /// The same judgments seen at a shallower depth.
    pub fn truncated(&self, depth: usize) -> Self {
        let depth = depth.clamp(1, self.depth);
        Self {
            query_id: self.query_id.clone(),
            depth,
            list_len: self.list_len,
            labels: self.labels[..depth.min(self.list_len)].to_vec(),
        }
    }
}

/// Text sources and the concurrency limit for judge invocations.
#[derive(Debug, Clone, Copy)]
pub struct JudgingContext<'a> {
    pub queries: Option<&'a Collection>,
    pub corpus: Option<&'a Collection>,
    pub max_in_flight: usize,
}

impl Default for JudgingContext<'_> {
    fn default() -> Self {
        Self {
            queries: None,
            corpus: None,
            max_in_flight: 8,
        }
    }
}

impl<'a> JudgingContext<'a> {
    pub fn with_texts(queries: &'a Collection, corpus: &'a Collection) -> Self {
        Self {
            queries: Some(queries),
            corpus: Some(corpus),
            ..Self::default()
        }
    }
}

/// Outcome of judging a whole run.
#[derive(Debug, Default)]
pub struct RunJudgments {
    /// Vectors for queries whose every item was judged.
    pub vectors: BTreeMap<String, JudgmentVector>,
    /// Per-item failures, each a [`JudgeError::Item`].
    pub failures: Vec<JudgeError>,
    pub cache_hits: usize,
    pub invocations: usize,
    pub fallbacks: usize,
}

impl RunJudgments {
    pub fn failed_queries(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .failures
            .iter()
            .filter_map(|e| match e {
                JudgeError::Item { query_id, .. } => Some(query_id.as_str()),
                _ => None,
            })
            .collect();
        ids.dedup();
        ids
    }
}

struct Task<'r> {
    list: usize,
    position: usize,
    query_id: &'r str,
    doc_id: &'r str,
}

fn annotate(task: &Task<'_>, err: JudgeError) -> JudgeError {
    JudgeError::Item {
        query_id: task.query_id.to_string(),
        doc_id: task.doc_id.to_string(),
        position: task.position + 1,
        source: Box::new(err),
    }
}

fn execute<J: Judge + ?Sized>(
    judge: &J,
    items: &[JudgeItem<'_>],
    max_in_flight: usize,
) -> Vec<Result<Verdict, JudgeError>> {
    let workers = max_in_flight.min(items.len());
    if workers <= 1 {
        return items.iter().map(|i| judge.judge(i)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<Verdict, JudgeError>>>> =
        items.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = judge.judge(&items[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every slot filled"))
        .collect()
}

fn judge_lists<J: Judge + ?Sized>(
    lists: &[&RankedList],
    depth: usize,
    judge: &J,
    store: &mut JudgmentStore,
    ctx: &JudgingContext<'_>,
) -> Result<RunJudgments, JudgeError> {
    if depth == 0 {
        return Err(JudgeError::ZeroDepth);
    }
    let identity = judge.identity();
    let needs_text = judge.needs_text();
    let mut out = RunJudgments::default();

    let mut labels: Vec<Vec<Option<Label>>> = Vec::with_capacity(lists.len());
    let mut tasks: Vec<Task<'_>> = Vec::new();
    for (li, list) in lists.iter().enumerate() {
        let take = depth.min(list.len());
        let mut row = vec![None; take];
        for (pos, entry) in list.entries()[..take].iter().enumerate() {
            match store.lookup(list.query_id(), &entry.doc_id, &identity) {
                Some(rec) => {
                    out.cache_hits += 1;
                    row[pos] = Some(rec.label);
                }
                None => tasks.push(Task {
                    list: li,
                    position: pos,
                    query_id: list.query_id(),
                    doc_id: &entry.doc_id,
                }),
            }
        }
        labels.push(row);
    }

    // Resolve texts up front; items without text fail without a call.
    let mut runnable: Vec<(Task<'_>, JudgeItem<'_>)> = Vec::with_capacity(tasks.len());
    for task in tasks {
        let mut item = JudgeItem::ids(task.query_id, task.doc_id);
        if needs_text {
            item.query_text = ctx.queries.and_then(|c| c.text(task.query_id));
            item.doc_text = ctx.corpus.and_then(|c| c.text(task.doc_id));
            let missing = if item.query_text.is_none() {
                Some(("query", task.query_id))
            } else if item.doc_text.is_none() {
                Some(("document", task.doc_id))
            } else {
                None
            };
            if let Some((kind, id)) = missing {
                let err = JudgeError::MissingText {
                    kind,
                    id: id.to_string(),
                };
                out.failures.push(annotate(&task, err));
                continue;
            }
        }
        runnable.push((task, item));
    }

    let batch = ctx.max_in_flight.max(1) * 32;
    for chunk in runnable.chunks(batch) {
        let items: Vec<JudgeItem<'_>> = chunk.iter().map(|(_, i)| *i).collect();
        let results = execute(judge, &items, ctx.max_in_flight);
        out.invocations += results.len();
        for ((task, _), result) in chunk.iter().zip(results) {
            match result {
                Ok(verdict) => {
                    let mut rec =
                        JudgmentRecord::new(task.query_id, task.doc_id, verdict.label, &identity);
                    rec.raw_output = verdict.raw_output;
                    rec.fallback = verdict.fallback;
                    if rec.fallback {
                        out.fallbacks += 1;
                    }
                    store.append(rec)?;
                    labels[task.list][task.position] = Some(verdict.label);
                }
                Err(e) => out.failures.push(annotate(task, e)),
            }
        }
    }

    for (list, row) in lists.iter().zip(labels) {
        if let Some(row) = row.into_iter().collect::<Option<Vec<Label>>>() {
            let v = JudgmentVector::new(list.query_id(), depth, list.len(), row)?;
            out.vectors.insert(list.query_id().to_string(), v);
        }
    }
    Ok(out)
}

/// Judges the top `depth` items of one list, using the store as a cache
/// and appending every fresh judgment to it.
pub fn judge_list<J: Judge + ?Sized>(
    ranked: &RankedList,
    depth: usize,
    judge: &J,
    store: &mut JudgmentStore,
    ctx: &JudgingContext<'_>,
) -> Result<JudgmentVector, JudgeError> {
    let mut out = judge_lists(&[ranked], depth, judge, store, ctx)?;
    if let Some(first) = out.failures.into_iter().next() {
        return Err(first);
    }
    Ok(out
        .vectors
        .remove(ranked.query_id())
        .expect("no failures means the vector is complete"))
}

/// Judges every list of a run to `depth`. Item failures are collected
/// rather than aborting; only store I/O errors stop the pass.
pub fn judge_run<J: Judge + ?Sized>(
    run: &Run,
    depth: usize,
    judge: &J,
    store: &mut JudgmentStore,
    ctx: &JudgingContext<'_>,
) -> Result<RunJudgments, JudgeError> {
    let lists: Vec<&RankedList> = run.iter().collect();
    judge_lists(&lists, depth, judge, store, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::judging::OracleJudge;
    use crate::trec_io::{parse_qrels, JudgeIdentity, RankedEntry, Source};
    use std::sync::atomic::AtomicUsize;

    struct Counting {
        calls: AtomicUsize,
        fail_on: Option<&'static str>,
    }

    impl Counting {
        fn new() -> Self {
            Self {
                calls: AtomicUsize::new(0),
                fail_on: None,
            }
        }
    }

    impl Judge for Counting {
        fn identity(&self) -> JudgeIdentity {
            JudgeIdentity::new(Source::Llm, "counting")
        }

        fn judge(&self, item: &JudgeItem<'_>) -> Result<Verdict, JudgeError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            if Some(item.doc_id) == self.fail_on {
                return Err(JudgeError::EmptyCompletion {
                    query_id: item.query_id.into(),
                    doc_id: item.doc_id.into(),
                });
            }
            // relevant iff the doc id ends in an even digit
            let last = item.doc_id.bytes().last().unwrap_or(b'1');
            Ok(Verdict::label(Label::from((last - b'0').is_multiple_of(2))))
        }
    }

    fn list(qid: &str, n: usize) -> RankedList {
        let entries = (0..n)
            .map(|i| RankedEntry::new(format!("d{i}"), (n - i) as f64))
            .collect();
        RankedList::new(qid, "t", entries).unwrap()
    }

    #[test]
    fn cache_hits_skip_the_judge() {
        let judge = Counting::new();
        let mut store = JudgmentStore::in_memory();
        let l = list("q", 3);
        let ctx = JudgingContext::default();
        let first = judge_list(&l, 3, &judge, &mut store, &ctx).unwrap();
        assert_eq!(judge.calls.load(Ordering::SeqCst), 3);
        let second = judge_list(&l, 3, &judge, &mut store, &ctx).unwrap();
        assert_eq!(judge.calls.load(Ordering::SeqCst), 3);
        assert_eq!(first, second);
        assert_eq!(store.len(), 3);
    }

    #[test]
    fn depth_beyond_list_truncates() {
        let judge = Counting::new();
        let mut store = JudgmentStore::in_memory();
        let v = judge_list(
            &list("q", 3),
            5,
            &judge,
            &mut store,
            &JudgingContext::default(),
        )
        .unwrap();
        assert_eq!(v.labels().len(), 3);
        assert_eq!(v.depth(), 5);
    }

    #[test]
    fn oracle_labels_in_rank_order() {
        let qrels = parse_qrels("q 0 d1 2\nq 0 d2 0".as_bytes()).unwrap();
        let l = RankedList::new(
            "q",
            "t",
            vec![RankedEntry::new("d1", 2.0), RankedEntry::new("d2", 1.0)],
        )
        .unwrap();
        let mut store = JudgmentStore::in_memory();
        let v = judge_list(
            &l,
            2,
            &OracleJudge::new(&qrels, 2),
            &mut store,
            &JudgingContext::default(),
        )
        .unwrap();
        assert_eq!(v.labels(), &[Label::Relevant, Label::Irrelevant]);
    }

    #[test]
    fn order_is_kept_with_many_workers() {
        let judge = Counting::new();
        let mut store = JudgmentStore::in_memory();
        let ctx = JudgingContext {
            max_in_flight: 7,
            ..JudgingContext::default()
        };
        let v = judge_list(&list("q", 100), 100, &judge, &mut store, &ctx).unwrap();
        let expected: Vec<bool> = (0..100).map(|i| (i % 10) % 2 == 0).collect();
        assert_eq!(v.relevant().collect::<Vec<_>>(), expected);
        let stored: Vec<&str> = store.iter().map(|r| r.doc_id.as_str()).collect();
        let ranked: Vec<String> = (0..100).map(|i| format!("d{i}")).collect();
        assert_eq!(stored, ranked);
    }

    #[test]
    fn failure_is_annotated_and_successes_are_kept() {
        let judge = Counting {
            fail_on: Some("d1"),
            ..Counting::new()
        };
        let mut store = JudgmentStore::in_memory();
        let err = judge_list(
            &list("q", 3),
            3,
            &judge,
            &mut store,
            &JudgingContext::default(),
        )
        .unwrap_err();
        match err {
            JudgeError::Item {
                position, doc_id, ..
            } => assert_eq!((position, doc_id.as_str()), (2, "d1")),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn run_collects_failures_per_query() {
        let judge = Counting {
            fail_on: Some("d1"),
            ..Counting::new()
        };
        let run: Run = [list("a", 1), list("b", 2)].into_iter().collect();
        let mut store = JudgmentStore::in_memory();
        let out = judge_run(&run, 2, &judge, &mut store, &JudgingContext::default()).unwrap();
        assert!(out.vectors.contains_key("a"));
        assert!(!out.vectors.contains_key("b"));
        assert_eq!(out.failed_queries(), ["b"]);
        assert_eq!(out.invocations, 3);
    }

    #[test]
    fn zero_depth_rejected() {
        let mut store = JudgmentStore::in_memory();
        let r = judge_list(
            &list("q", 1),
            0,
            &Counting::new(),
            &mut store,
            &JudgingContext::default(),
        );
        assert!(matches!(r, Err(JudgeError::ZeroDepth)));
    }

    #[test]
    fn text_judge_without_texts_fails_without_calling() {
        struct NeedsText;
        impl Judge for NeedsText {
            fn identity(&self) -> JudgeIdentity {
                JudgeIdentity::new(Source::Llm, "t")
            }
            fn needs_text(&self) -> bool {
                true
            }
            fn judge(&self, _: &JudgeItem<'_>) -> Result<Verdict, JudgeError> {
                panic!("must not be called")
            }
        }
        let mut store = JudgmentStore::in_memory();
        let r = judge_list(
            &list("q", 1),
            1,
            &NeedsText,
            &mut store,
            &JudgingContext::default(),
        );
        assert!(matches!(r, Err(JudgeError::Item { .. })));
    }

    #[test]
    fn truncated_vector() {
        let v = JudgmentVector::complete("q", [true, false, true]);
        let t = v.truncated(2);
        assert_eq!(t.labels(), &[Label::Relevant, Label::Irrelevant]);
        assert_eq!(t.depth(), 2);
    }
}
