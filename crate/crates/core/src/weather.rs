//! Daily weather records for one site.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::date::Date;
use crate::table::{Column, Table, TableError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherDay {
    pub date: Date,
    pub tmin: f64,
    pub tmax: f64,
    pub rain_mm: f64,
}

impl WeatherDay {
    pub fn is_wet(&self) -> bool {
        self.rain_mm > 0.0
    }

    /// Swap tmin/tmax if they arrived out of order.
    pub fn ordered(mut self) -> Self {
        if self.tmin > self.tmax {
            core::mem::swap(&mut self.tmin, &mut self.tmax);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WeatherSeries {
    pub days: Vec<WeatherDay>,
}

impl WeatherSeries {
    pub fn new(days: Vec<WeatherDay>) -> Self {
        WeatherSeries { days }
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Columns `date, tmin, tmax, rain_mm` with units attached.
    pub fn to_table(&self) -> Table {
        let t = Table::from_columns([
            ("date", Column::Date(self.days.iter().map(|d| d.date).collect())),
            ("tmin", Column::Float(self.days.iter().map(|d| d.tmin).collect())),
            ("tmax", Column::Float(self.days.iter().map(|d| d.tmax).collect())),
            ("rain_mm", Column::Float(self.days.iter().map(|d| d.rain_mm).collect())),
        ])
        .expect("weather columns are rectangular");
        t.with_units("tmin", "degC")
            .and_then(|t| t.with_units("tmax", "degC"))
            .and_then(|t| t.with_units("rain_mm", "mm"))
            .expect("columns exist")
    }

    pub fn from_table(table: &Table) -> Result<Self, TableError> {
        let dates = table.date("date")?;
        let tmin = table.numeric("tmin")?;
        let tmax = table.numeric("tmax")?;
        let rain = table.numeric("rain_mm")?;
        Ok(WeatherSeries {
            days: (0..table.n_rows())
                .map(|i| WeatherDay {
                    date: dates[i],
                    tmin: tmin[i],
                    tmax: tmax[i],
                    rain_mm: rain[i],
                })
                .collect(),
        })
    }
}
