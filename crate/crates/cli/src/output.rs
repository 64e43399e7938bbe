//! CSV and table output.

use std::io::Write;

use factrel_core::families::BlowupRow;
use factrel_core::Tuple;

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).flexible(true).from_writer(out)
}

/// Tuples as CSV records of their value texts, with an optional header.
pub fn csv_rows<'a, T, I>(out: &mut dyn Write, header: Option<&[&str]>, rows: I) -> csv::Result<()>
where
    T: std::borrow::Borrow<Tuple> + 'a,
    I: IntoIterator<Item = T>,
{
    let mut w = writer(out);
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for t in rows {
        w.write_record(t.borrow().texts())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_records(out: &mut dyn Write, rows: &[Vec<String>]) -> csv::Result<()> {
    let mut w = writer(out);
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const BENCH_COLUMNS: [&str; 8] = [
    "family",
    "n",
    "source_model",
    "source_size",
    "target_model",
    "target_size",
    "assertion",
    "status",
];

fn bench_fields(r: &BlowupRow) -> [String; 8] {
    [
        r.family.to_string(),
        r.n.to_string(),
        r.source_model.as_str().to_string(),
        r.source_size.to_string(),
        r.target_model.as_str().to_string(),
        r.target_size.as_ref().map_or(String::new(), |s| s.to_string()),
        r.assertion.clone(),
        r.status.as_str().to_string(),
    ]
}

pub fn write_bench_csv<W: Write>(out: W, rows: &[BlowupRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_COLUMNS)?;
    for r in rows {
        w.write_record(bench_fields(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned columns; skipped rows carry their reason in a trailing note.
pub fn bench_table(rows: &[BlowupRow]) -> String {
    let mut cells: Vec<Vec<String>> = vec![BENCH_COLUMNS.iter().map(|s| s.to_string()).collect()];
    for r in rows {
        let mut f = bench_fields(r).to_vec();
        if let factrel_core::families::RowStatus::Skipped(why) = &r.status {
            f[7] = format!("skipped ({why})");
        }
        cells.push(f);
    }
    let mut widths = [0usize; 8];
    for row in &cells {
        for (i, c) in row.iter().enumerate() {
            widths[i] = widths[i].max(c.chars().count());
        }
    }
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c:<w$}", w = widths[i]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting_follows_rfc4180() {
        let mut buf = Vec::new();
        let rows = [Tuple::from_texts(&["a,b", "say \"hi\"", "plain"])];
        csv_rows(&mut buf, None, rows.iter()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "\"a,b\",\"say \"\"hi\"\"\",plain\n");
    }
}
