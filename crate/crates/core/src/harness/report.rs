use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::{Axis, ResultRow};
use crate::model::Objective;
use crate::policies::PolicyKind;
use crate::{Error, Result};

const FIXED: [&str; 15] = [
    "policy",
    "axis_name",
    "axis_value",
    "seed",
    "deployed_frac",
    "deployed_frac_VR",
    "deployed_frac_AC",
    "rej_cpu",
    "rej_storage",
    "rej_fronthaul",
    "rej_backhaul",
    "J_r",
    "J_edge",
    "J",
    "runtime_s",
];

/// Column names for `n_sbs` base stations and `n_hosts` hosts.
pub fn csv_header(n_sbs: usize, n_hosts: usize) -> Vec<String> {
    let mut h: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
    h.extend((0..n_sbs).map(|i| format!("util_uplink_h{i}")));
    for prefix in ["util_cpu_m", "util_storage_m", "util_in_m", "util_out_m"] {
        h.extend((0..n_hosts).map(|m| format!("{prefix}{m}")));
    }
    h
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// Writes the rows with a header. Numbers use the shortest representation
/// that reads back to the same value.
pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let (n_sbs, n_hosts) = rows.first().map_or((0, 0), |r| (r.util_uplink.len(), r.util_cpu.len()));
    w.write_record(csv_header(n_sbs, n_hosts)).map_err(csv_err)?;
    for r in rows {
        if (r.util_uplink.len(), r.util_cpu.len()) != (n_sbs, n_hosts) {
            return Err(Error::Contract("rows of one table must share the topology".into()));
        }
        let mut rec = vec![
            r.policy.name().to_string(),
            r.axis.name().to_string(),
            r.axis_value.to_string(),
            r.seed.to_string(),
        ];
        rec.extend(r.metrics().into_iter().map(|(_, v)| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(())
}

pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn write_csv(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_rows(f, rows)
}

/// Reads a table written by [`write_rows`].
pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rd = csv::Reader::from_reader(f);
    let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header.len() < FIXED.len() || header[..FIXED.len()] != FIXED {
        return Err(Error::parse("header", "not a sweep table"));
    }
    let count = |prefix: &str| header.iter().filter(|h| h.starts_with(prefix)).count();
    let (n_sbs, n_hosts) = (count("util_uplink_h"), count("util_cpu_m"));
    if header != csv_header(n_sbs, n_hosts) {
        return Err(Error::parse("header", "unexpected utilization columns"));
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let num = |c: usize| -> Result<f64> {
            rec[c]
                .parse()
                .map_err(|_| Error::parse(format!("row {}.{}", line + 1, header[c]), format!("bad number `{}`", &rec[c])))
        };
        let policy = PolicyKind::parse(&rec[0]).ok_or_else(|| Error::parse(format!("row {}.policy", line + 1), &rec[0]))?;
        let axis = Axis::parse(&rec[1]).ok_or_else(|| Error::parse(format!("row {}.axis_name", line + 1), &rec[1]))?;
        let seed = rec[3]
            .parse()
            .map_err(|_| Error::parse(format!("row {}.seed", line + 1), &rec[3]))?;
        let block = |start: usize, n: usize| -> Result<Vec<f64>> { (start..start + n).map(num).collect() };
        let u = FIXED.len();
        let rejects = [num(7)? as usize, num(8)? as usize, num(9)? as usize, num(10)? as usize];
        let deployed_frac = num(4)?;
        let j_r = num(11)?;
        rows.push(ResultRow {
            policy,
            axis,
            axis_value: num(2)?,
            seed,
            requested: j_r as usize + rejects.iter().sum::<usize>(),
            deployed_frac,
            deployed_frac_vr: num(5)?,
            deployed_frac_ac: num(6)?,
            rejects,
            objective: Objective {
                j_r,
                j_edge: num(12)?,
                j: num(13)?,
            },
            runtime_s: num(14)?,
            util_uplink: block(u, n_sbs)?,
            util_cpu: block(u + n_sbs, n_hosts)?,
            util_storage: block(u + n_sbs + n_hosts, n_hosts)?,
            util_in: block(u + n_sbs + 2 * n_hosts, n_hosts)?,
            util_out: block(u + n_sbs + 3 * n_hosts, n_hosts)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: f64) -> ResultRow {
        ResultRow {
            policy: PolicyKind::Lr,
            axis: Axis::Alpha,
            axis_value: v,
            seed: 7,
            requested: 3,
            deployed_frac: 2.0 / 3.0,
            deployed_frac_vr: 1.0,
            deployed_frac_ac: 0.0,
            rejects: [0, 0, 0, 1],
            objective: Objective {
                j_r: 2.0,
                j_edge: 0.1,
                j: 1.99,
            },
            runtime_s: 0.25,
            util_uplink: vec![0.1, 0.2],
            util_cpu: vec![0.5],
            util_storage: vec![0.25],
            util_in: vec![0.0],
            util_out: vec![1.0],
        }
    }

    #[test]
    fn header_matches_the_published_schema() {
        let h = csv_header(2, 1).join(",");
        assert_eq!(
            h,
            "policy,axis_name,axis_value,seed,deployed_frac,deployed_frac_VR,deployed_frac_AC,\
             rej_cpu,rej_storage,rej_fronthaul,rej_backhaul,J_r,J_edge,J,runtime_s,\
             util_uplink_h0,util_uplink_h1,util_cpu_m0,util_storage_m0,util_in_m0,util_out_m0"
        );
    }

    #[test]
    fn rows_round_trip_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rows = vec![row(0.0), row(0.6)];
        write_csv(&path, &rows).unwrap();
        assert_eq!(read_rows(&path).unwrap(), rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("lr,alpha,0,7,0.6666666666666666,1,0,0,0,0,1,2,0.1,1.99,0.25,"));
    }

    #[test]
    fn mixed_topologies_are_refused() {
        let mut b = row(1.0);
        b.util_cpu.push(0.0);
        assert!(rows_to_csv(&[row(0.0), b]).is_err());
    }
}
