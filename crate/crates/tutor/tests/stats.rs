use logic_tutor::log::{read_log, EventRecord};
use logic_tutor::stats::{compute_stats, render_table, stats_from_log, StatFilter};
use logic_tutor_core::feedback::ErrorClass;

struct LogBuilder {
    records: Vec<EventRecord>,
}

impl LogBuilder {
    fn new() -> Self {
        LogBuilder { records: Vec::new() }
    }

    fn submit(&mut self, group: &str, session: &str, kind: &str, class: &str) -> &mut Self {
        let class: ErrorClass = class.parse().unwrap();
        let record = EventRecord {
            seq: self.records.len() as u64 + 1,
            timestamp: "2026-01-01T00:00:00.000Z".into(),
            session: session.into(),
            exercise: "ex".into(),
            group: Some(group.into()),
            task: 1,
            statement: Some(0),
            statement_type: Some(kind.into()),
            action: "submit-formula".into(),
            accepted: class == ErrorClass::None,
            classification: class,
            text: String::new(),
            score: None,
        };
        self.records.push(record);
        self
    }

    fn bytes(&self) -> Vec<u8> {
        self.records.iter().flat_map(|r| r.to_line().into_bytes()).collect()
    }
}

const SWAP: &str = "rule-diagnosed:implication-swap";
const XOR: &str = "rule-diagnosed:or-to-xor";

#[test]
fn two_of_four_sessions_err() {
    let mut log = LogBuilder::new();
    log.submit("EG1", "s1", "only-if", SWAP)
        .submit("EG1", "s1", "only-if", "none")
        .submit("EG1", "s2", "only-if", "none")
        .submit("EG1", "s3", "only-if", SWAP)
        .submit("EG1", "s3", "only-if", SWAP)
        .submit("EG1", "s4", "only-if", "none");
    let report = compute_stats(&log.records, &StatFilter::default());
    assert_eq!(report.rows.len(), 1);
    let row = &report.rows[0];
    assert_eq!((row.n, row.erring), (4, 2));
    assert_eq!(row.error_rate, 0.5);
    assert_eq!(row.most_frequent_error.as_ref().unwrap().to_string(), SWAP);
    assert_eq!(row.most_frequent_count, 2);
    assert_eq!(row.most_frequent_error_rate, 0.5);
}

#[test]
fn a_session_counts_once_per_class() {
    // s1 makes the swap twice; s2 makes it once and also confuses or with xor.
    let mut log = LogBuilder::new();
    log.submit("CG", "s1", "if-then", SWAP)
        .submit("CG", "s1", "if-then", SWAP)
        .submit("CG", "s2", "if-then", XOR)
        .submit("CG", "s2", "if-then", SWAP)
        .submit("CG", "s3", "if-then", "none");
    let row = &compute_stats(&log.records, &StatFilter::default()).rows[0];
    assert_eq!(row.n, 3);
    assert_eq!(row.erring, 2);
    assert_eq!(row.error_rate, 2.0 / 3.0);
    assert_eq!(row.most_frequent_error.as_ref().unwrap().to_string(), SWAP);
    assert_eq!(row.most_frequent_error_rate, 2.0 / 3.0);
    assert!(row.most_frequent_error_rate <= row.error_rate);
}

#[test]
fn ties_go_to_the_smaller_name() {
    let mut log = LogBuilder::new();
    log.submit("EG2", "a", "not-all", XOR).submit("EG2", "b", "not-all", SWAP);
    let row = &compute_stats(&log.records, &StatFilter::default()).rows[0];
    assert_eq!(row.most_frequent_error.as_ref().unwrap().to_string(), SWAP);
    assert_eq!(row.most_frequent_error_rate, 0.5);
    assert_eq!(row.error_rate, 1.0);
}

#[test]
fn rejected_syntax_errors_count_as_errors() {
    let mut log = LogBuilder::new();
    log.submit("EG1", "a", "if-then", "syntax").submit("EG1", "b", "if-then", "none");
    let row = &compute_stats(&log.records, &StatFilter::default()).rows[0];
    assert_eq!(row.error_rate, 0.5);
    assert_eq!(row.most_frequent_error, Some(ErrorClass::Syntax));
}

#[test]
fn rows_split_by_group_and_statement_and_filters_apply() {
    let mut log = LogBuilder::new();
    log.submit("EG1", "a", "if-then", SWAP).submit("EG1", "a", "only-if", "none").submit("EG2", "b", "if-then", "none");
    let report = compute_stats(&log.records, &StatFilter::default());
    let keys: Vec<(Option<&str>, &str)> =
        report.rows.iter().map(|r| (r.group.as_deref(), r.statement_type.as_str())).collect();
    assert_eq!(keys, [(Some("EG1"), "if-then"), (Some("EG1"), "only-if"), (Some("EG2"), "if-then")]);
    let eg2 = compute_stats(&log.records, &StatFilter { group: Some("EG2".into()), exercise: None });
    assert_eq!(eg2.rows.len(), 1);
    assert_eq!(eg2.rows[0].error_rate, 0.0);
    assert_eq!(eg2.rows[0].most_frequent_error, None);
    let other = compute_stats(&log.records, &StatFilter { group: None, exercise: Some("other".into()) });
    assert!(other.rows.is_empty());
}

#[test]
fn resubmitting_an_accepted_statement_is_no_error() {
    let mut log = LogBuilder::new();
    log.submit("EG1", "a", "if-then", "none");
    let mut again = log.records[0].clone();
    again.seq = 2;
    again.accepted = false;
    log.records.push(again);
    let row = &compute_stats(&log.records, &StatFilter::default()).rows[0];
    assert_eq!((row.n, row.erring), (1, 0));
}

#[test]
fn non_submissions_are_not_attempts() {
    let mut log = LogBuilder::new();
    log.submit("EG1", "a", "if-then", "none");
    let mut extra = log.records[0].clone();
    extra.seq = 2;
    extra.session = "b".into();
    extra.action = "undo".into();
    extra.accepted = false;
    log.records.push(extra);
    let row = &compute_stats(&log.records, &StatFilter::default()).rows[0];
    assert_eq!(row.n, 1);
}

#[test]
fn table_shows_two_decimals() {
    let mut log = LogBuilder::new();
    log.submit("EG1", "a", "if-then", SWAP).submit("EG1", "b", "if-then", "none").submit("EG1", "c", "if-then", "none");
    let (report, warnings) = stats_from_log(&log.bytes(), &StatFilter::default()).unwrap();
    assert!(warnings.is_empty());
    let table = render_table(&report);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("group"));
    assert!(lines[1].contains("0.33"), "{table}");
    assert!(lines[1].contains(SWAP));
}

#[test]
fn malformed_logs_report_the_line() {
    let mut log = LogBuilder::new();
    log.submit("EG1", "a", "if-then", "none").submit("EG1", "b", "if-then", "none");
    let mut bytes = log.bytes();
    bytes.extend_from_slice(b"{not json}\n");
    assert_eq!(stats_from_log(&bytes, &StatFilter::default()).unwrap_err().line, 3);

    let mut gap = log.records.clone();
    gap[1].seq = 5;
    let bytes: Vec<u8> = gap.iter().flat_map(|r| r.to_line().into_bytes()).collect();
    assert_eq!(read_log(&bytes).unwrap_err().line, 2);

    let mut torn = log.bytes();
    torn.extend_from_slice(b"{\"seq\":3");
    let contents = read_log(&torn).unwrap();
    assert_eq!(contents.records.len(), 2);
    assert_eq!(contents.warnings.len(), 1);
}
