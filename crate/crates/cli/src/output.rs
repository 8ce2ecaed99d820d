//! CSV tables with a `#` metadata header, optionally wrapped in a gnuplot script.

use std::fmt::Display;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotStyle {
    /// Every column after the first against the first.
    Lines,
    /// A heat map of the third column over the first two.
    Map,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub style: PlotStyle,
}

impl Table {
    pub fn new(columns: &[&str], style: PlotStyle) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            style,
        }
    }

    pub fn push<D: Display>(&mut self, row: &[D]) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row.iter().map(|v| v.to_string()).collect());
    }

    pub fn write_csv<W: Write>(&self, header: &str, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        self.write_body(&mut w)
    }

    fn write_body<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    }

    fn plot_commands(&self, source: &str) -> String {
        match self.style {
            PlotStyle::Lines => {
                let series: Vec<String> = (2..=self.columns.len())
                    .map(|k| {
                        let src = if k == 2 { source } else { "''" };
                        format!("{src} using 1:{k} with lines")
                    })
                    .collect();
                format!(
                    "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{}'\nset yrange [0:1.05]\nplot {}\n",
                    self.columns[0],
                    series.join(", \\\n     ")
                )
            }
            PlotStyle::Map => format!(
                "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{}'\nset ylabel '{}'\nset view map\nset contour base\n\
                 set cntrparam levels discrete 0.05,0.25,0.5,0.75\nsplot {source} using 1:2:3 with points palette pointsize 0.3 notitle\n",
                self.columns[0], self.columns[1]
            ),
        }
    }

    /// A self-contained script with the data inlined.
    pub fn write_gnuplot<W: Write>(&self, header: &str, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        writeln!(w, "$data << EOD")?;
        self.write_body(&mut w)?;
        writeln!(w, "EOD")?;
        write!(w, "{}", self.plot_commands("$data"))
    }

    /// A script plotting `csv_name`, which sits next to it.
    pub fn gnuplot_for_file(&self, header: &str, csv_name: &str) -> String {
        format!("{header}\n{}", self.plot_commands(&format!("'{csv_name}'")))
    }
}

/// `# improbe <command> key=value ...`, listing every setting in effect.
pub fn header(command: &str, settings: &[(&str, String)]) -> String {
    let mut h = format!("# improbe {command}");
    for (k, v) in settings {
        h.push_str(&format!(" {k}={v}"));
    }
    h
}
