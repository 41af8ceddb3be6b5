//! Offline fingerprint samples and online observations.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::zoneset::ZoneSet;

pub const FINGERPRINT_HEADER: [&str; 3] = ["zone_id", "ap_id", "rss_dbm"];
pub const OBSERVATION_HEADER: [&str; 2] = ["ap_id", "rss_dbm"];

/// RSS samples keyed by (zone, access point). Zones and APs keep the order
/// in which they were first seen, which fixes the bit assigned to each zone.
#[derive(Clone, Debug, PartialEq)]
pub struct FingerprintDatabase {
    zones: Vec<String>,
    aps: Vec<String>,
    /// `samples[zone * n_aps + ap]`
    samples: Vec<Vec<f64>>,
}

impl FingerprintDatabase {
    /// Builds a database from `(zone_id, ap_id, rss)` triples, validating
    /// every invariant.
    pub fn from_rows<Z, A, I>(rows: I) -> Result<Self>
    where
        Z: AsRef<str>,
        A: AsRef<str>,
        I: IntoIterator<Item = (Z, A, f64)>,
    {
        let mut builder = Builder::default();
        for (i, (z, a, rss)) in rows.into_iter().enumerate() {
            builder
                .push(z.as_ref(), a.as_ref(), rss)
                .map_err(|m| Error::Validation(format!("row {}: {m}", i + 1)))?;
        }
        builder.finish()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }

    /// Reads the `zone_id,ap_id,rss_dbm` CSV format.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv_reader(reader);
        check_header(&mut rdr, &FINGERPRINT_HEADER)?;
        let mut builder = Builder::default();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 fields, found {}", record.len()),
                });
            }
            let rss = parse_rss(&record[2], line)?;
            builder
                .push(&record[0], &record[1], rss)
                .map_err(|message| Error::Parse { line, message })?;
        }
        builder.finish()
    }

    /// Writes one row per sample, cell by cell, in an order that reloads
    /// with the same zone and AP order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(FINGERPRINT_HEADER)?;
        for (z, a) in self.cell_order() {
            for rss in self.samples(z, a) {
                wtr.write_record([
                    self.zones[z].as_str(),
                    self.aps[a].as_str(),
                    &rss.to_string(),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    /// Non-empty cells ordered so that zones and APs first appear in index
    /// order: everything inside the rectangle of already-introduced zones and
    /// APs goes out before a cell that introduces the next zone or AP.
    fn cell_order(&self) -> Vec<(usize, usize)> {
        let (n_z, n_a) = (self.n_zones(), self.n_aps());
        let filled = |z: usize, a: usize| !self.samples(z, a).is_empty();
        let mut done = vec![false; n_z * n_a];
        let mut order = Vec::new();
        let (mut nz, mut na) = (0, 0);
        loop {
            for z in 0..nz {
                for a in 0..na {
                    if !done[z * n_a + a] && filled(z, a) {
                        done[z * n_a + a] = true;
                        order.push((z, a));
                    }
                }
            }
            if nz == n_z && na == n_a {
                return order;
            }
            // Loading guarantees such a cell: the row that first introduced
            // the next zone or AP lies within one step of the rectangle.
            let (z, a) = (0..=nz.min(n_z - 1))
                .flat_map(|z| (0..=na.min(n_a - 1)).map(move |a| (z, a)))
                .find(|&(z, a)| !done[z * n_a + a] && filled(z, a))
                .expect("first-appearance order is realizable");
            done[z * n_a + a] = true;
            order.push((z, a));
            nz = nz.max(z + 1);
            na = na.max(a + 1);
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn zones(&self) -> &[String] {
        &self.zones
    }

    pub fn aps(&self) -> &[String] {
        &self.aps
    }

    pub fn n_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn n_aps(&self) -> usize {
        self.aps.len()
    }

    pub fn zone_index(&self, id: &str) -> Option<usize> {
        self.zones.iter().position(|z| z == id)
    }

    pub fn ap_index(&self, id: &str) -> Option<usize> {
        self.aps.iter().position(|a| a == id)
    }

    /// Samples of one (zone, AP) cell; empty if the AP was never heard there.
    pub fn samples(&self, zone: usize, ap: usize) -> &[f64] {
        &self.samples[zone * self.aps.len() + ap]
    }

    pub fn total_samples(&self) -> usize {
        self.samples.iter().map(Vec::len).sum()
    }

    /// Concatenates the samples of `ap` over every zone of `set`, ascending
    /// zone index first, original order within a zone.
    pub fn pool_samples(&self, ap: usize, set: ZoneSet) -> Result<Vec<f64>> {
        if set.is_empty() {
            return Err(Error::Domain(
                "cannot pool samples over the empty set".into(),
            ));
        }
        if !set.fits_frame(self.n_zones()) {
            return Err(Error::Domain(format!(
                "zone set {set} exceeds the {}-zone frame",
                self.n_zones()
            )));
        }
        if ap >= self.n_aps() {
            return Err(Error::Domain(format!("AP index {ap} out of range")));
        }
        Ok(set
            .zones()
            .flat_map(|k| self.samples(k, ap).iter().copied())
            .collect())
    }
}

#[derive(Default)]
struct Builder {
    zones: Vec<String>,
    zone_ix: HashMap<String, usize>,
    aps: Vec<String>,
    ap_ix: HashMap<String, usize>,
    rows: Vec<(usize, usize, f64)>,
}

impl Builder {
    fn push(&mut self, zone: &str, ap: &str, rss: f64) -> std::result::Result<(), String> {
        if zone.is_empty() {
            return Err("empty zone_id".into());
        }
        if ap.is_empty() {
            return Err("empty ap_id".into());
        }
        if !rss.is_finite() {
            return Err(format!("non-finite RSS value {rss}"));
        }
        let z = intern(&mut self.zones, &mut self.zone_ix, zone);
        let a = intern(&mut self.aps, &mut self.ap_ix, ap);
        self.rows.push((z, a, rss));
        Ok(())
    }

    fn finish(self) -> Result<FingerprintDatabase> {
        if self.zones.len() < 2 {
            return Err(Error::Validation(format!(
                "N_Z < 2: found {} distinct zone(s), need at least 2",
                self.zones.len()
            )));
        }
        let n_aps = self.aps.len();
        let mut samples = vec![Vec::new(); self.zones.len() * n_aps];
        for (z, a, rss) in self.rows {
            samples[z * n_aps + a].push(rss);
        }
        Ok(FingerprintDatabase {
            zones: self.zones,
            aps: self.aps,
            samples,
        })
    }
}

fn intern(list: &mut Vec<String>, index: &mut HashMap<String, usize>, id: &str) -> usize {
    if let Some(&i) = index.get(id) {
        return i;
    }
    list.push(id.to_owned());
    index.insert(id.to_owned(), list.len() - 1);
    list.len() - 1
}

/// One RSS reading per detected access point; absent APs were not detected.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Observation {
    readings: BTreeMap<String, f64>,
}

impl Observation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_readings<S, I>(readings: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, f64)>,
    {
        let mut obs = Observation::new();
        for (ap, rss) in readings {
            obs.insert(ap, rss)?;
        }
        Ok(obs)
    }

    /// Adds a reading. Duplicate APs and non-finite values are rejected.
    pub fn insert(&mut self, ap: impl Into<String>, rss: f64) -> Result<()> {
        let ap = ap.into();
        if ap.is_empty() {
            return Err(Error::Validation("empty ap_id in observation".into()));
        }
        if !rss.is_finite() {
            return Err(Error::Validation(format!("non-finite RSS for {ap}")));
        }
        if self.readings.contains_key(&ap) {
            return Err(Error::Validation(format!("duplicate reading for {ap}")));
        }
        self.readings.insert(ap, rss);
        Ok(())
    }

    pub fn get(&self, ap: &str) -> Option<f64> {
        self.readings.get(ap).copied()
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.readings.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }

    /// Reads the `ap_id,rss_dbm` CSV format.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv_reader(reader);
        check_header(&mut rdr, &OBSERVATION_HEADER)?;
        let mut obs = Observation::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 fields, found {}", record.len()),
                });
            }
            let rss = parse_rss(&record[1], line)?;
            obs.insert(&record[0], rss).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(obs)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(OBSERVATION_HEADER)?;
        for (ap, rss) in self.iter() {
            wtr.write_record([ap, &rss.to_string()])?;
        }
        wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let mut header = csv::StringRecord::new();
    if !rdr.read_record(&mut header)? {
        return Err(Error::Parse {
            line: 1,
            message: format!("missing header `{}`", expected.join(",")),
        });
    }
    let got: Vec<&str> = header.iter().collect();
    let got_first = got.first().map(|s| s.trim_start_matches('\u{feff}'));
    let matches =
        got.len() == expected.len() && got_first == Some(expected[0]) && got[1..] == expected[1..];
    if !matches {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "header must be `{}`, found `{}`",
                expected.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

fn parse_rss(field: &str, line: u64) -> Result<f64> {
    let rss: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("RSS `{field}` is not a number"),
    })?;
    if !rss.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("RSS `{field}` is not finite"),
        });
    }
    Ok(rss)
}
