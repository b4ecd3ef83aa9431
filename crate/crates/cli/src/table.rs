//! Plain-text and CSV rendering of small result tables.

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(usize),
    Real(f64),
    Empty,
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Text(s) => f.write_str(s),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(x) => write!(f, "{x:.4}"),
            Cell::Empty => Ok(()),
        }
    }
}

pub fn render(header: &[String], rows: &[Vec<Cell>], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header).expect("writing to memory");
            for row in rows {
                w.write_record(row.iter().map(|c| c.to_string())).expect("writing to memory");
            }
            String::from_utf8(w.into_inner().expect("flushing to memory")).expect("utf-8 input")
        }
        Format::Table => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| r.iter().map(|c| if *c == Cell::Empty { "-".into() } else { c.to_string() }).collect())
                .collect();
            let widths: Vec<usize> = (0..header.len())
                .map(|j| cells.iter().map(|r| r[j].len()).chain([header[j].len()]).max().unwrap_or(0))
                .collect();
            let line = |items: &[String]| {
                let padded: Vec<String> =
                    items.iter().zip(&widths).map(|(s, &w)| format!("{s:>w$}")).collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            let mut out = line(header);
            for r in &cells {
                out += &line(r);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_table() {
        let header = vec!["name".to_string(), "v".to_string()];
        let rows = vec![vec![Cell::Text("a,b".into()), Cell::Int(3)], vec![Cell::Text("c".into()), Cell::Empty]];
        assert_eq!(render(&header, &rows, Format::Csv), "name,v\n\"a,b\",3\nc,\n");
        assert_eq!(render(&header, &rows, Format::Table), "name  v\n a,b  3\n   c  -\n");
    }
}
