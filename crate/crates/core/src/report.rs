//! Rendering of query results as JSON Lines or aligned text tables.

use std::io::{self, Write};

use serde::Serialize;

use crate::trivia::{CategoryScore, Explanation, MemberSurprise};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Jsonl,
    Table,
}

fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else if v > 0.0 {
        "inf".to_owned()
    } else if v < 0.0 {
        "-inf".to_owned()
    } else {
        "nan".to_owned()
    }
}

fn write_jsonl<W: Write + ?Sized, T: Serialize>(w: &mut W, rows: &[T]) -> io::Result<()> {
    for row in rows {
        serde_json::to_writer(&mut *w, row)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Columns padded to their widest cell; numeric columns right-aligned.
fn write_table<W: Write + ?Sized>(
    w: &mut W,
    header: &[&str],
    numeric: &[bool],
    rows: &[Vec<String>],
) -> io::Result<()> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (width, cell) in widths.iter_mut().zip(row) {
            *width = (*width).max(cell.chars().count());
        }
    }
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    for row in std::iter::once(&header).chain(rows) {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                let pad = widths[i] - cell.chars().count();
                if numeric[i] {
                    format!("{}{cell}", " ".repeat(pad))
                } else {
                    format!("{cell}{}", " ".repeat(pad))
                }
            })
            .collect();
        writeln!(w, "{}", cells.join("  ").trim_end())?;
    }
    Ok(())
}

pub fn write_scores<W: Write + ?Sized>(
    w: &mut W,
    format: OutputFormat,
    scores: &[CategoryScore],
) -> io::Result<()> {
    match format {
        OutputFormat::Jsonl => write_jsonl(w, scores),
        OutputFormat::Table => {
            let rows: Vec<Vec<String>> = scores
                .iter()
                .map(|s| {
                    vec![
                        s.category.clone(),
                        fmt_float(s.trivia),
                        fmt_float(s.surprise),
                        fmt_float(s.cohesiveness),
                        s.sample_size.to_string(),
                        if s.sampled { "yes" } else { "no" }.to_owned(),
                    ]
                })
                .collect();
            write_table(
                w,
                &[
                    "category",
                    "trivia",
                    "surprise",
                    "cohesiveness",
                    "sample_size",
                    "sampled",
                ],
                &[false, true, true, true, true, false],
                &rows,
            )
        }
    }
}

pub fn write_members<W: Write + ?Sized>(
    w: &mut W,
    format: OutputFormat,
    members: &[MemberSurprise],
) -> io::Result<()> {
    match format {
        OutputFormat::Jsonl => write_jsonl(w, members),
        OutputFormat::Table => {
            let rows: Vec<Vec<String>> = members
                .iter()
                .map(|m| {
                    vec![
                        m.article.clone(),
                        fmt_float(m.surprise),
                        fmt_float(m.similarity),
                    ]
                })
                .collect();
            write_table(
                w,
                &["article", "surprise", "similarity"],
                &[false, true, true],
                &rows,
            )
        }
    }
}

pub fn write_explanation<W: Write + ?Sized>(
    w: &mut W,
    format: OutputFormat,
    explanation: &Explanation,
    paragraph_text: &str,
) -> io::Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        paragraph: usize,
        score: f64,
        text: &'a str,
    }
    match format {
        OutputFormat::Jsonl => write_jsonl(
            w,
            &[Row {
                paragraph: explanation.paragraph,
                score: explanation.score,
                text: paragraph_text,
            }],
        ),
        OutputFormat::Table => {
            writeln!(w, "paragraph  {}", explanation.paragraph)?;
            writeln!(w, "score      {}", fmt_float(explanation.score))?;
            writeln!(w)?;
            writeln!(w, "{paragraph_text}")
        }
    }
}
