//! Reader for the Solomon / Gehring & Homberger whitespace-column layout:
//!
//! ```text
//! C1_2_1
//!
//! VEHICLE
//! NUMBER     CAPACITY
//!   50          200
//!
//! CUSTOMER
//! CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE TIME
//!
//!     0      70         70          0          0       1351          0
//!     1      33         78         20        750        809         90
//! ```
//!
//! Lines starting with `#` are comments.

use super::InstanceError;

#[derive(Clone, Debug, PartialEq)]
pub struct GhNode {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub demand: f64,
    pub tw_start: f64,
    pub tw_end: f64,
    pub service: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GhInstance {
    pub name: String,
    /// Node rows in file order; node 0 is the depot.
    pub nodes: Vec<GhNode>,
}

pub fn parse_gh(text: &str) -> Result<GhInstance, InstanceError> {
    let err = |line: usize, message: String| InstanceError::Parse { line, message };
    let mut name: Option<String> = None;
    let mut in_customers = false;
    let mut nodes = Vec::new();
    let mut last_line = 1;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let upper = line.to_ascii_uppercase();
        if name.is_none() {
            name = Some(line.to_string());
            continue;
        }
        if upper.starts_with("CUSTOMER") {
            in_customers = true;
            continue;
        }
        if !in_customers || upper.starts_with("CUST") {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 7 {
            return Err(err(line_no, format!("expected 7 columns, found {}", cols.len())));
        }
        let id = cols[0]
            .parse::<u32>()
            .map_err(|_| err(line_no, format!("invalid node number `{}`", cols[0])))?;
        let mut vals = [0.0f64; 6];
        for (k, col) in cols[1..].iter().enumerate() {
            let v = col
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line_no, format!("non-numeric value `{col}`")))?;
            vals[k] = v;
        }
        nodes.push(GhNode {
            id,
            x: vals[0],
            y: vals[1],
            demand: vals[2],
            tw_start: vals[3],
            tw_end: vals[4],
            service: vals[5],
        });
    }

    let Some(name) = name else {
        return Err(err(1, "empty file".to_string()));
    };
    if !in_customers {
        return Err(err(last_line, "missing CUSTOMER section".to_string()));
    }
    if nodes.is_empty() {
        return Err(err(last_line, "no node rows".to_string()));
    }
    if nodes[0].id != 0 {
        return Err(err(last_line, "node 0 (depot) must be the first row".to_string()));
    }
    for (i, n) in nodes.iter().enumerate() {
        if n.id as usize != i {
            return Err(err(last_line, format!("node numbers must be consecutive, found {} at row {i}", n.id)));
        }
    }
    Ok(GhInstance { name, nodes })
}
